"""Non-radiative spaces: power-law bases, Gram matrices, projections, cone solutions.

All routines work for odd d only.  A basis member is normalised so that it
equals (r/R)**alpha outside the ball of radius R: the L2 member g vanishes
inside, the H1 member f continues as the harmonic profile (r/R)**l.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np
import scipy.linalg

from . import _quad
from .errors import ConfigError, PreconditionError
from .fields import Channel, Field, HarmonicComponent, Monomial, PowerLaw, WaveData, Windowed, h1_norm, l2_norm
from .transform import t_op_physical

__all__ = [
    "ExponentLadder",
    "KernelBasis",
    "admissible_exponents",
    "gram",
    "gram_quadrature",
    "ProjectionReport",
    "project",
    "projection_norm_sq",
    "channel_identity_residual",
    "kernel_vanishing",
    "polynomial_image_fit",
    "NonradiativeTable",
    "nonradiative_table",
    "eval_nonradiative",
]

KINDS = ("L2", "H1")


def _require_odd(d: int):
    if d % 2 == 0 or d < 3:
        raise PreconditionError("kernel spaces are implemented for odd dimension d >= 3")


def _check_kind(kind: str):
    if kind not in KINDS:
        raise ConfigError(f"kind must be one of {KINDS}, got {kind!r}")


@dataclass(frozen=True)
class ExponentLadder:
    d: int
    l: int
    kind: str
    exponents: tuple

    def to_dict(self):
        return {"d": self.d, "l": self.l, "kind": self.kind, "exponents": list(self.exponents)}


def admissible_exponents(d: int, l: int, kind: str) -> ExponentLadder:
    """Exponents -l-d+2k (k >= 1) below -d/2 (L2) or 1-d/2 (H1)."""
    _require_odd(d)
    _check_kind(kind)
    if l < 0:
        raise ConfigError("degree must be non-negative")
    bound = -d / 2 if kind == "L2" else 1 - d / 2
    out = []
    k = 1
    while -l - d + 2 * k < bound:
        out.append(-l - d + 2 * k)
        k += 1
    return ExponentLadder(d, l, kind, tuple(out))


@dataclass(frozen=True)
class KernelBasis:
    R: float
    ladder: ExponentLadder

    def __post_init__(self):
        if not self.R > 0:
            raise ConfigError("kernel basis needs R > 0")

    @classmethod
    def build(cls, d: int, l: int, R: float, kind: str) -> "KernelBasis":
        return cls(R, admissible_exponents(d, l, kind))

    @property
    def d(self):
        return self.ladder.d

    @property
    def l(self):
        return self.ladder.l

    @property
    def kind(self):
        return self.ladder.kind

    def __len__(self):
        return len(self.ladder.exponents)

    def profile(self, k: int, coef: complex = 1.0) -> PowerLaw:
        a = self.ladder.exponents[k]
        inner = "harmonic" if self.kind == "H1" else None
        return PowerLaw(a, self.R, self.l, inner, coef * self.R ** (-a))

    def members(self, channel: Optional[str] = None) -> list:
        return [HarmonicComponent(self.l, self.profile(k), channel) for k in range(len(self))]


def _gram_closed(basis: KernelBasis) -> np.ndarray:
    d, l, R = basis.d, basis.l, basis.R
    ll = l * (l + d - 2)
    al = np.asarray(basis.ladder.exponents, dtype=float)
    A = al[:, None] + al[None, :]
    if basis.kind == "L2":
        return R**d / (-(A + d))
    # inside: harmonic part l R^(d-2); outside: (a_j a_k + ll) R^(d-2) / -(A + d - 2)
    return l * R ** (d - 2) + (al[:, None] * al[None, :] + ll) * R ** (d - 2) / (-(A + d - 2))


def gram(basis: KernelBasis, cond_max: float = 1e12) -> np.ndarray:
    """Analytic Gram matrix of the basis in its own inner product (L2 or H1)."""
    if len(basis) == 0:
        raise PreconditionError("empty kernel basis")
    G = _gram_closed(basis)
    cond = np.linalg.cond(G)
    if not np.isfinite(cond) or cond > cond_max:
        raise PreconditionError(f"Gram matrix ill-conditioned (condition {cond:.3g})")
    return G


def gram_quadrature(basis: KernelBasis, r_max_factor: float = 400.0) -> np.ndarray:
    """Brute-force Gram matrix: graded Gauss-Legendre plus a closed-form far tail."""
    d, l, R = basis.d, basis.l, basis.R
    ll = l * (l + d - 2)
    al = basis.ladder.exponents
    n = len(al)
    r_cut = R * r_max_factor
    edges = np.concatenate([np.linspace(0.0, R, 9), np.geomspace(R, r_cut, 60)[1:]])
    r, w = _quad.panels(edges, 32)
    G = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            pi = basis.profile(i)
            pj = basis.profile(j)
            if basis.kind == "L2":
                dens = pi.value(r) * pj.value(r)
                tail_exp = al[i] + al[j] + d - 1
                tail_coef = R ** (-al[i] - al[j])
            else:
                dens = pi.deriv(r) * pj.deriv(r) + ll * pi.value(r) * pj.value(r) / r**2
                tail_exp = al[i] + al[j] + d - 3
                tail_coef = R ** (-al[i] - al[j]) * (al[i] * al[j] + ll)
            G[i, j] = np.sum(np.real(dens) * r ** (d - 1) * w) - tail_coef * r_cut ** (tail_exp + 1) / (tail_exp + 1)
    return G


# ---------------------------------------------------------------------------
# projections


def _outer_pairing(ch: Channel, beta: float, R: float, d: int, kind: str, order: int = 32) -> complex:
    """int_R^inf of the channel profile against r**beta in the L2 or H1 pairing."""
    ll = ch.l * (ch.l + d - 2)
    hi = max(ch.r_end, R)
    total = 0.0 + 0.0j
    if hi > R:
        edges = _quad.split_interval(R, hi, ch.breakpoints, max_len=(hi - R) / 64)
        r, w = _quad.panels(edges, order)
        if kind == "L2":
            dens = ch.value(r) * r**beta
        else:
            dens = ch.deriv(r) * beta * r ** (beta - 1) + ll * ch.value(r) * r ** (beta - 2)
        total += np.sum(dens * r ** (d - 1) * w)
    for a, p in ch.power_tail():
        if kind == "L2":
            e, c = p + beta + d - 1, a
        else:
            e, c = p + beta + d - 3, a * (p * beta + ll)
        if e >= -1:
            raise PreconditionError("profile tail not integrable against the kernel basis")
        total += -c * hi ** (e + 1) / (e + 1)
    return total


def _inner_energy(ch: Channel, R: float, d: int, kind: str, order: int = 32) -> float:
    """Norm squared on [0, R] of the part kept by the projection."""
    ll = ch.l * (ch.l + d - 2)
    l = ch.l
    edges = _quad.split_interval(0.0, R, ch.breakpoints, max_len=R / 32)
    r, w = _quad.panels(edges, order)
    if kind == "L2":
        dens = np.abs(ch.value(r)) ** 2
    else:
        wR = ch.value(np.array([R]))[0]
        v = ch.value(r) - wR * (r / R) ** l
        dv = ch.deriv(r) - (wR * l * r ** (l - 1) / R**l if l else 0.0)
        dens = np.abs(dv) ** 2 + ll * np.abs(v / r) ** 2
    return float(np.sum(dens * r ** (d - 1) * w))


def _coefficients(ch: Channel, basis: KernelBasis) -> np.ndarray:
    d, l, R = basis.d, basis.l, basis.R
    c = np.zeros(len(basis), dtype=complex)
    for k, a in enumerate(basis.ladder.exponents):
        c[k] = R ** (-a) * _outer_pairing(ch, a, R, d, basis.kind)
        if basis.kind == "H1":
            wR = ch.value(np.array([R]))[0]
            c[k] += wR * l * R ** (d - 2)
    return c


@dataclass
class ProjectionReport:
    d: int
    R: float
    kind: str
    channels: dict = field(default_factory=dict)

    @property
    def norm_sq(self) -> float:
        return sum(v["proj_norm_sq"] for v in self.channels.values())

    def to_dict(self):
        return {"d": self.d, "R": self.R, "kind": self.kind, "norm_sq": self.norm_sq, "channels": self.channels}

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


def _project_channel(ch: Channel, basis: KernelBasis):
    R = basis.R
    d = basis.d
    kind = basis.kind
    inner = _inner_energy(ch, R, d, kind)
    if len(basis):
        G = gram(basis)
        c = _coefficients(ch, basis)
        x = scipy.linalg.cho_solve(scipy.linalg.cho_factor(G), c)
        span = float(np.real(np.vdot(c, x)))
    else:
        G = np.zeros((0, 0))
        x = np.zeros(0, dtype=complex)
        span = 0.0
    return inner, x, span, G


def _split_components(u: Field, key: str, ch: Channel, basis: KernelBasis, x: np.ndarray):
    """Components of proj and residual for one channel."""
    R, l = basis.R, basis.l
    proj, res = [], []
    kept = [HarmonicComponent(l, Windowed(p, 0.0, R), key) for p in ch.profiles]
    outside = [HarmonicComponent(l, Windowed(p, R, np.inf), key) for p in ch.profiles if not p.power_tail()]
    tails = [p for p in ch.profiles if p.power_tail()]
    if basis.kind == "L2":
        proj.extend(kept)
        res.extend(outside)
        for p in tails:
            res.extend(HarmonicComponent(l, m, key) for m in _outside_pieces(p, R))
    else:
        wR = ch.value(np.array([R]))[0]
        harm = Monomial(wR * R ** (-l), l, 0.0, R, l)
        proj.extend(kept)
        proj.append(HarmonicComponent(l, Monomial(-wR * R ** (-l), l, 0.0, R, l), key))
        res.extend(outside)
        for p in tails:
            res.extend(HarmonicComponent(l, m, key) for m in _outside_pieces(p, R))
        res.append(HarmonicComponent(l, harm, key))
    for k, xk in enumerate(x):
        proj.append(HarmonicComponent(l, basis.profile(k, xk), key))
        res.append(HarmonicComponent(l, basis.profile(k, -xk), key))
    return proj, res


def _outside_pieces(p, R):
    """Monomial description of a power-law profile restricted to r > R."""
    parts = []
    for lo, hi, c, q in p.pieces():
        a, b = max(lo, R), hi
        if b > a:
            parts.append(Monomial(c, q, a, b, p.l))
    return parts


def project(u: Field, R: float, kind: str):
    """Orthogonal projection onto the non-radiative space of radius R, per channel.

    Returns (proj, residual, report) with ``proj + residual == u``.
    """
    _require_odd(u.d)
    _check_kind(kind)
    proj_c, res_c = [], []
    report = ProjectionReport(u.d, R, kind)
    for key, ch in u.channels().items():
        basis = KernelBasis.build(u.d, ch.l, R, kind)
        inner, x, span, G = _project_channel(ch, basis)
        p, r = _split_components(u, key, ch, basis, x)
        proj_c.extend(p)
        res_c.extend(r)
        report.channels[key] = {
            "l": ch.l,
            "exponents": list(basis.ladder.exponents),
            "gram": G.tolist(),
            "coefficients": [[float(z.real), float(z.imag)] for z in x],
            "inner_norm_sq": inner,
            "span_norm_sq": span,
            "proj_norm_sq": inner + span,
        }
    return Field(u.d, tuple(proj_c)), Field(u.d, tuple(res_c)), report


def projection_norm_sq(u: WaveData, R: float) -> float:
    """||pi_R^1 u0||^2_{H1} + ||pi_R^0 u1||^2_{L2}."""
    _, _, r0 = project(u.u0, R, "H1")
    _, _, r1 = project(u.u1, R, "L2")
    return r0.norm_sq + r1.norm_sq


def _ext_energy_any(u: WaveData, R: float) -> float:
    """int_R^inf |dsTu0|^2 + |Tu1|^2 through the Gegenbauer path.

    Exact for compact data and power-law tails alike, unlike the frequency
    route whose truncated spectra leave a residue of order 1e-7 for bumps.
    """
    from .energy import ext_energy_physical

    return ext_energy_physical(u, R)


def channel_identity_residual(u: WaveData, R: float) -> float:
    """| ||u||^2 - 2 E_ext(u, R) - ||pi_R u||^2 | / ||u||^2."""
    _require_odd(u.d)
    if not R > 0:
        raise PreconditionError("channel identity needs R > 0")
    full = h1_norm(u.u0) ** 2 + l2_norm(u.u1) ** 2
    if full == 0:
        return 0.0
    E = _ext_energy_any(u, R)
    return abs(full - 2 * E - projection_norm_sq(u, R)) / full


# ---------------------------------------------------------------------------
# kernel vanishing and the polynomial image


def kernel_vanishing(d: int, l: int, R: float = 1.0, s_max_factor: float = 20.0, n_s: int = 400) -> list:
    """max over |s| >= R of |T g_k| and |ds T f_k| relative to the member norm."""
    out = []
    s_pos = np.linspace(R, s_max_factor * R, n_s)
    # the members jump (g) or kink (f) at r = R; sample the closed half-line from inside
    s_pos[0] = R * (1 + 1e-12)
    s = np.concatenate([-s_pos[::-1], s_pos])
    for kind, m_extra in (("L2", 0), ("H1", 1)):
        basis = KernelBasis.build(d, l, R, kind)
        for k, comp in enumerate(basis.members()):
            f = Field(d, (comp,))
            norm = l2_norm(f) if kind == "L2" else h1_norm(f)
            vals = t_op_physical(comp, l, d, s, m_extra).values
            out.append(
                {
                    "kind": kind,
                    "k": k + 1,
                    "alpha": basis.ladder.exponents[k],
                    "norm": norm,
                    "max_abs": float(np.max(np.abs(vals))),
                    "relative": float(np.max(np.abs(vals)) / norm),
                }
            )
    return out


def polynomial_image_fit(d: int, l: int, R: float = 1.0, n_s: int = 201) -> list:
    """Least-squares Chebyshev fit of T g_k and ds T f_k on (-R, R) at bounded degree.

    Degree bounds are l + (d-5)/2 for T g_k and l + (d-3)/2 for ds T f_k.
    """
    out = []
    s = R * np.cos(np.pi * (np.arange(n_s) + 0.5) / n_s)
    for kind, m_extra, deg in (("L2", 0, l + (d - 5) // 2), ("H1", 1, l + (d - 3) // 2)):
        basis = KernelBasis.build(d, l, R, kind)
        for k, comp in enumerate(basis.members()):
            vals = t_op_physical(comp, l, d, s, m_extra).values
            x = s / R
            if deg < 0:
                resid = float(np.max(np.abs(vals)))
            else:
                cr = np.polynomial.chebyshev.chebfit(x, vals.real, deg)
                ci = np.polynomial.chebyshev.chebfit(x, vals.imag, deg)
                fit = np.polynomial.chebyshev.chebval(x, cr) + 1j * np.polynomial.chebyshev.chebval(x, ci)
                resid = float(np.max(np.abs(fit - vals)))
            scale = float(np.max(np.abs(vals))) or 1.0
            out.append({"kind": kind, "k": k + 1, "degree": deg, "residual": resid / scale})
    return out


# ---------------------------------------------------------------------------
# non-radiative solutions in the truncated cone


@dataclass(frozen=True)
class NonradiativeTable:
    """v_k(t, r) = sum_j A[k][j] t^(2(k-j)) r^(beta_j), beta_j = -l-d+2+2j."""

    d: int
    l: int
    k_max: int
    A: tuple
    c: tuple
    degree_flags: tuple

    def beta(self, j: int) -> int:
        return -self.l - self.d + 2 + 2 * j

    def to_dict(self):
        return {
            "d": self.d,
            "l": self.l,
            "k_max": self.k_max,
            "A": [[str(x) for x in row] for row in self.A],
            "c": [str(x) for x in self.c],
            "degree_flags": list(self.degree_flags),
        }


def nonradiative_table(d: int, l: int, k_max: int) -> NonradiativeTable:
    """Coefficients of the polynomial-in-t solutions with data (r^beta_k Y_l, 0).

    Delta(r^beta_j Y) = e_j r^(beta_j - 2) Y with e_j = beta_j(beta_j + d - 2) - l(l+d-2),
    so the wave equation gives A[k][j] (2(k-j))(2(k-j)-1) = e_(j+1) A[k][j+1].
    """
    _require_odd(d)
    if k_max < 0:
        raise ConfigError("k_max must be non-negative")
    ll = l * (l + d - 2)

    def e(j):
        b = -l - d + 2 + 2 * j
        return Fraction(b * (b + d - 2) - ll)

    c = tuple(e(k + 1) for k in range(k_max + 1))
    rows = []
    flags = []
    B = (d + 1) // 2 + l
    for k in range(k_max + 1):
        row = [Fraction(0)] * (k + 1)
        row[k] = Fraction(1)
        for j in range(k - 1, -1, -1):
            n = 2 * (k - j)
            row[j] = row[j + 1] * e(j + 1) / (n * (n - 1))
        rows.append(tuple(row))
        top = max((2 * (k - j) for j in range(k + 1) if row[j] != 0), default=0)
        flags.append(top > B)
    return NonradiativeTable(d, l, k_max, tuple(rows), c, tuple(flags))


def eval_nonradiative(t, r, table: NonradiativeTable, k: int):
    """Radial profile of v_k at (t, r) (multiplies Y_l)."""
    if not 0 <= k <= table.k_max:
        raise ConfigError(f"k = {k} outside the table (k_max = {table.k_max})")
    t = np.asarray(t, dtype=float)
    r = np.asarray(r, dtype=float)
    out = np.zeros(np.broadcast(t, r).shape)
    for j, a in enumerate(table.A[k]):
        if a:
            out = out + float(a) * t ** (2 * (k - j)) * r ** float(table.beta(j))
    return out
