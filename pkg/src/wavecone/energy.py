"""Exterior mass and energy: formula route, even-dimension closed forms, Hilbert/Hankel lemma."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Callable, Optional

import numpy as np

from . import _quad
from .errors import PreconditionError
from .fields import Dimension, Field, WaveData, h1_norm, l2_norm
from .transform import FreqGrid, RadonProfile, ds_t_op, hilbert, ray_trace, t_op, t_op_physical

__all__ = [
    "ExtEnergyReport",
    "half_line_integral",
    "ext_mass",
    "ext_energy",
    "ext_energy_physical",
    "ext_energy_even_closed_form",
    "hankel_op",
    "hilbert_hankel_sides",
    "crossed_sides",
    "random_bandlimited",
]

# Gregory end-correction coefficients
_GREGORY = [
    Fraction(1, 12),
    Fraction(1, 24),
    Fraction(19, 720),
    Fraction(3, 160),
    Fraction(863, 60480),
    Fraction(275, 24192),
    Fraction(33953, 3628800),
    Fraction(8183, 1036800),
]


@lru_cache(maxsize=None)
def _gregory_weights(K: int = 8) -> np.ndarray:
    w = np.ones(K + 1)
    w[0] = 0.5
    for k in range(1, K + 1):
        for j in range(k + 1):
            w[j] += float((-1) ** (k + 1) * _GREGORY[k - 1]) * comb(k, j) * (-1) ** (k - j)
    w.setflags(write=False)
    return w


def half_line_integral(s: np.ndarray, g: np.ndarray, R: float) -> complex:
    """Integral of g over [R, s_end] on a uniform grid.

    The left end uses eighth-order Gregory corrections; an off-node R is handled
    by integrating a local degree-7 interpolant up to the next node.  The
    integrand is assumed negligible at the right end of the grid.
    """
    s = np.asarray(s)
    ds = s[1] - s[0]
    i0 = int(math.ceil((R - s[0]) / ds - 1e-9))
    if i0 < 0 or i0 >= len(s) - 10:
        raise PreconditionError("R outside the s-grid")
    w = _gregory_weights()
    tail = g[i0:]
    total = ds * (np.sum(tail) - np.sum(tail[: len(w)]) + np.dot(w, tail[: len(w)]))
    gap = s[i0] - R
    if gap > 1e-12 * ds:
        idx = np.arange(i0 - 4, i0 + 4)
        xs = s[idx]
        coef = np.polyfit(xs - R, g[idx], 7)
        anti = np.polyint(coef)
        total += np.polyval(anti, gap) - np.polyval(anti, 0.0)
    return total


@dataclass
class ExtEnergyReport:
    R: float
    forward_grad_limit: float
    forward_dt_limit: float
    backward_grad_limit: float
    backward_dt_limit: float
    E_ext: float
    method: str = "formula"
    cross_check: Optional[float] = None

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _sum_half_line(profiles: dict, R: float) -> float:
    total = 0.0
    for p in profiles.values():
        total += half_line_integral(p.s, np.abs(p.values) ** 2, R).real
    return total


def ext_mass(f: Field, g: Field, R: float, grid: Optional[FreqGrid] = None) -> float:
    """Limit of the mass outside |x| >= t + R from the half-wave profiles."""
    grid = grid or FreqGrid()
    d = f.d
    fm = ray_trace(f, -1, grid)
    gp = ray_trace(g, +1, grid)
    phase = np.exp(-1j * math.pi * (d - 1) / 2)
    total = 0.0
    for k in sorted(set(fm) | set(gp)):
        v = np.zeros(2 * grid.n, dtype=complex)
        if k in fm:
            v += fm[k].values
        if k in gp:
            v += phase * gp[k].values
        total += half_line_integral(grid.s, np.abs(v) ** 2, R).real
    return (2 * math.pi) ** (1 - d) * total


def _combined(a: dict, b: dict, sa: float, sb: float):
    out = {}
    for k in sorted(set(a) | set(b)):
        v = 0
        ref = a.get(k) or b.get(k)
        if k in a:
            v = v + sa * a[k].values
        if k in b:
            v = v + sb * b[k].values
        out[k] = RadonProfile(ref.s, v, ref.l, k)
    return out


def _forward_limit(u: WaveData, R: float, grid: FreqGrid) -> float:
    a = ds_t_op(u.u0, grid)
    b = t_op(u.u1, grid)
    return 0.5 * _sum_half_line(_combined(a, b, 1.0, -1.0), R)


def ext_energy(u: WaveData, R: float, grid: Optional[FreqGrid] = None) -> ExtEnergyReport:
    """Exterior energy limits outside the shifted cone |x| >= |t| + R (formula route).

    Forward limits come from (dsTu0 - Tu1); backward limits re-run the same
    computation on (u0, -u1).  Gradient and time-derivative limits coincide.
    """
    grid = grid or FreqGrid()
    fwd = _forward_limit(u, R, grid)
    bwd = _forward_limit(u.time_reversed(), R, grid)
    direct = _sum_half_line(ds_t_op(u.u0, grid), R) + _sum_half_line(t_op(u.u1, grid), R)
    averaged = 0.5 * (fwd + fwd + bwd + bwd)
    scale = max(abs(direct), 1e-300)
    defect = abs(averaged - direct) / scale
    if defect > 1e-8:
        raise PreconditionError(f"exterior energy routes disagree (relative defect {defect:.2e})")
    return ExtEnergyReport(R, fwd, fwd, bwd, bwd, direct, "formula", defect)


def ext_energy_physical(u: WaveData, R: float) -> float:
    """int_R^inf |dsTu0|^2 + |Tu1|^2 through the Gegenbauer path (odd d, any profile kind)."""
    total = 0.0
    d = u.d
    for field_, m_extra in ((u.u0, 1), (u.u1, 0)):
        for ch in field_.channels().values():
            hi = max(ch.r_end, R)
            if ch.power_tail():
                hi = max(hi, R) * 200.0
            edges = _quad.split_interval(R, hi, ch.breakpoints, max_len=max((hi - R) / 64, 1e-3))
            s, w = _quad.panels(edges, 32)
            vals = t_op_physical(ch, ch.l, d, s, m_extra).values
            total += float(np.sum(np.abs(vals) ** 2 * w))
    return total


# ---------------------------------------------------------------------------
# even dimension closed form


def _sqrt_panels(nu_end: float, n_panels: int, order: int):
    """Nodes in nu = x^2 with composite GL in x, graded towards 0."""
    X = math.sqrt(nu_end)
    edges = np.concatenate([_quad.graded_edges(0.0, X / n_panels, levels=8), np.linspace(X / n_panels, X, n_panels)[1:]])
    x, w = _quad.panels(edges, order)
    return x**2, 2 * x * w


def ext_energy_even_closed_form(u: WaveData, n_panels: int = 48, order: int = 24):
    """E_ext,0 and the forward gradient limit for even d from frequency profiles.

    Returns (E_ext0, forward_grad).
    """
    d = u.d
    if d % 2:
        raise PreconditionError("closed form applies to even dimension")
    m = (d - 1) / 2
    ch0 = u.u0.channels()
    ch1 = u.u1.channels()
    nu_end = max([c.nu_end for c in list(ch0.values()) + list(ch1.values())])
    r, wr = _sqrt_panels(nu_end, n_panels, order)
    # distinct node set for the principal value (order + 1 never shares nodes)
    S = nu_end * 1.5
    s2, ws2 = _sqrt_panels(S, n_panels, order + 1)
    norm_sq = h1_norm(u.u0, "frequency") ** 2 + l2_norm(u.u1, "frequency") ** 2
    hankel_sum = 0.0
    pv_sum = 0.0
    sign_d = (-1) ** (d // 2)
    for key in sorted(set(ch0) | set(ch1)):
        l = (ch0.get(key) or ch1.get(key)).l
        a0 = ch0[key].spectrum(r, d) if key in ch0 else np.zeros_like(r, dtype=complex)
        a1 = ch1[key].spectrum(r, d) if key in ch1 else np.zeros_like(r, dtype=complex)
        F0 = r**m * r * a0 * wr
        F1 = r**m * a1 * wr
        K = 1.0 / (r[:, None] + r[None, :])
        A0 = np.conj(F0) @ K @ F0
        A1 = np.conj(F1) @ K @ F1
        hankel_sum += (-1) ** l * (A0 - A1).real
        if key in ch0 and key in ch1:
            # PV int G(s)/(r-s) ds, G(s) = s^m conj(a1(s)), by subtraction
            G_s = s2**m * np.conj(ch1[key].spectrum(s2, d))
            G_r = r**m * np.conj(a1)
            diff = (G_s[None, :] - G_r[:, None]) / (r[:, None] - s2[None, :])
            inner = diff @ ws2 + G_r * np.log(r / (S - r))
            pv_sum += np.sum(r ** (m + 1) * a0 * wr * inner).real
    c = (2 * math.pi) ** (-(d + 1))
    E = 0.5 * norm_sq + sign_d * c * hankel_sum
    fwd = 0.5 * (E + 2 * c * pv_sum)
    return E, fwd


# ---------------------------------------------------------------------------
# Hankel operator and the Hilbert/Hankel lemma


def hankel_op(f, s, r: Optional[np.ndarray] = None, r_end: Optional[float] = None, breakpoints=(), order: int = 32):
    """Hf(s) = int_0^inf f(r) / (s + r) dr.

    ``f`` is either a callable (with ``r_end`` its support end) integrated on
    panels graded geometrically towards r = 0, or samples on the grid ``r``
    integrated exactly against 1/(s+r) after linear interpolation.
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))
    if r is not None:
        fv = np.asarray(f)
        r = np.asarray(r, dtype=float)
        h = np.diff(r)
        B = np.diff(fv) / h
        A = fv[:-1] - B * r[:-1]
        with np.errstate(divide="ignore"):
            logs = np.log((s[:, None] + r[None, 1:]) / (s[:, None] + r[None, :-1]))
        return (B[None, :] * h[None, :] + (A[None, :] - B[None, :] * s[:, None]) * logs).sum(axis=1)
    if r_end is None:
        raise ValueError("callable input needs r_end")
    out = np.zeros(s.shape, dtype=complex)
    base = set(_quad.split_interval(0.0, r_end, breakpoints, max_len=max(r_end / 32, 1e-3)).tolist())
    for k, sv in enumerate(s):
        edges = set(base)
        if 0 < sv < r_end:
            # geometric refinement towards the near-singularity at r = -s
            edges |= {sv * 0.5**j for j in range(0, 40)}
        edges = np.asarray(sorted(e for e in edges if 0.0 <= e <= r_end))
        x, w = _quad.panels(edges, order)
        out[k] = np.sum(f(x) / (sv + x) * w)
    return out


def random_bandlimited(rng, n_bumps: int = 4, band: float = 6.0, gap: float = 0.5, half: Optional[str] = None):
    """Random f-hat: complex combination of narrow Gaussians in gap <= |nu| <= band.

    Each Gaussian is cut off where it falls below 1e-16, so f-hat is supported
    away from 0 and f decays like a Gaussian in s.  Returns a vectorised
    callable nu -> f-hat(nu); ``half='positive'`` keeps only nu > 0.
    """
    width = 0.12
    cut = 8.6 * width
    centers = rng.uniform(gap + cut, band - cut, n_bumps)
    signs = rng.choice([-1.0, 1.0], n_bumps) if half is None else np.ones(n_bumps)
    coefs = rng.normal(size=n_bumps) + 1j * rng.normal(size=n_bumps)

    def fhat(nu):
        nu = np.asarray(nu, dtype=float)
        out = np.zeros(nu.shape, dtype=complex)
        for c, sg, a in zip(centers, signs, coefs):
            x = nu - sg * c
            out += a * np.where(np.abs(x) < cut, np.exp(-0.5 * (x / width) ** 2), 0.0)
        return out

    fhat.band = band
    return fhat


def _half_norms_from_fhat(fhat, grid: FreqGrid):
    F = fhat(grid.nu)
    f = grid.synthesize(F)
    prof = RadonProfile(grid.s, f, 0, periodic=True)
    Hf = hilbert(prof).values
    return f, Hf


def hilbert_hankel_sides(fhat: Callable, grid: Optional[FreqGrid] = None, order: int = 32, n_panels: int = 96) -> dict:
    """Both sides of the half-line Hilbert identity for one function.

    lhs1 = ||f||^2 on R+ plus ||Hf||^2 on R-, computed in physical space.
    rhs1 = (1/2pi)||f-hat||^2 + (1/pi^2) Im X, X = int int conj(f-hat(s)) f-hat(-r)/(r+s).
    rhs1_hankel uses the Hankel operator form; rhs1_first_line keeps the
    coefficient 1/pi on Im X for comparison.
    """
    grid = grid or FreqGrid(nu_max=32 * math.pi, n=1 << 14)
    f, Hf = _half_norms_from_fhat(fhat, grid)
    s = grid.s
    lhs = half_line_integral(s, np.abs(f) ** 2, 0.0).real
    lhs += half_line_integral(s, _mirror(np.abs(Hf) ** 2), 0.0).real
    band = fhat.band
    edges = np.linspace(0.0, band, n_panels + 1)
    nu, w = _quad.panels(edges, order)
    fp = fhat(nu)
    fm = fhat(-nu)
    norm_hat = np.sum((np.abs(fp) ** 2 + np.abs(fm) ** 2) * w)
    K = 1.0 / (nu[:, None] + nu[None, :])
    X = np.sum((np.conj(fp) * w)[:, None] * K * (fm * w)[None, :])
    # Hankel form: H applied to conj(f-hat(-s)) on s > 0
    phi = lambda x: np.conj(fhat(-x))
    Hphi = hankel_op(phi, nu, r_end=band)
    Y = np.sum(Hphi * fp * w)
    return {
        "lhs1": float(lhs),
        "rhs1": float(norm_hat / (2 * math.pi) + X.imag / math.pi**2),
        "rhs1_hankel": float(norm_hat / (2 * math.pi) - Y.imag / math.pi**2),
        "rhs1_first_line": float(norm_hat / (2 * math.pi) + X.imag / math.pi),
        "norm_sq": float(norm_hat / (2 * math.pi)),
    }


def _mirror(v: np.ndarray) -> np.ndarray:
    """Values at -s on the periodic grid s_m = (m - n) ds."""
    n = len(v) // 2
    idx = (2 * n - np.arange(len(v))) % len(v)
    return v[idx]


def _pv_half(A: Callable, B: Callable, band: float, sign: int, order: int, n_panels: int):
    """PV int_0^band int_0^band A(sign r) conj(B(sign s)) / (s - r) dr ds by subtraction."""
    edges = np.linspace(0.0, band, n_panels + 1)
    r, wr = _quad.panels(edges, order)
    s, ws = _quad.panels(edges, order + 1)
    Ar = A(sign * r)
    Gs = np.conj(B(sign * s))
    Gr = np.conj(B(sign * r))
    diff = (Gs[None, :] - Gr[:, None]) / (s[None, :] - r[:, None])
    with np.errstate(divide="ignore"):
        logterm = np.log((band - r) / r)
    inner = diff @ ws + Gr * logterm
    return np.sum(Ar * wr * inner)


def crossed_sides(fhat: Callable, ghat: Callable, grid: Optional[FreqGrid] = None, order: int = 32, n_panels: int = 96) -> dict:
    """Both sides of <f,g>_{R+} - <Hf,Hg>_{R-} = (1/(2 i pi^2)) (PV_+ - PV_-)."""
    grid = grid or FreqGrid(nu_max=32 * math.pi, n=1 << 14)
    f, Hf = _half_norms_from_fhat(fhat, grid)
    g, Hg = _half_norms_from_fhat(ghat, grid)
    s = grid.s
    lhs = half_line_integral(s, f * np.conj(g), 0.0) - half_line_integral(s, _mirror(Hf * np.conj(Hg)), 0.0)
    band = max(fhat.band, ghat.band)
    plus = _pv_half(fhat, ghat, band, +1, order, n_panels)
    minus = _pv_half(fhat, ghat, band, -1, order, n_panels)
    rhs = (plus - minus) / (2j * math.pi**2)
    return {"lhs2a": complex(lhs), "rhs2a": complex(rhs)}
