"""Time-domain oracle: per-channel radial wave solver and exterior measurements.

Each channel profile v(t, r) solves

    v_tt = v_rr + (d-1)/r v_r - l(l+d-2)/r^2 v

on a cell-centred grid r_i = (i + 1/2) h.  Odd d uses psi = r^((d-1)/2) v,
which satisfies psi_tt = psi_rr - q psi / r^2 with q = (l+m)(l+m-1),
m = (d-1)/2, and has parity (-1)^(l+m) through r = 0.  Even d keeps v and a
symmetric flux form built from a staggered fourth-order gradient, so the
semi-discrete energy is exactly conserved.  Time stepping is classical RK4.
"""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.interpolate import CubicSpline

from . import _quad
from .errors import ConfigError, PreconditionError, ResolutionError
from .fields import Channel, Field, RadialGrid, WaveData

__all__ = [
    "SolverConfig",
    "Snapshot",
    "solve_radial",
    "solve_field",
    "dalembert3d",
    "discrete_energy",
    "measure_exterior",
    "exterior_split",
    "radiation_error",
    "richardson_limit",
    "fd_channel_laplacian",
    "radial_weights",
    "snapshots_to_csv",
    "thread_count",
    "TimeDomainExterior",
    "time_domain_exterior",
]

CFL_MAX = 0.4


def thread_count() -> int:
    """Worker cap from WAVECONE_THREADS (default 1)."""
    raw = os.environ.get("WAVECONE_THREADS", "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise ConfigError(f"WAVECONE_THREADS must be an integer, got {raw!r}") from exc
    if n < 1:
        raise ConfigError("WAVECONE_THREADS must be at least 1")
    return n


@dataclass(frozen=True)
class SolverConfig:
    d: int
    l: int
    grid: RadialGrid
    t_max: float
    snapshot_times: tuple = ()
    cfl: float = CFL_MAX
    support: Optional[float] = None
    margin: float = 2.0

    def __post_init__(self):
        if self.cfl <= 0 or self.cfl > CFL_MAX + 1e-12:
            raise ConfigError(f"CFL ratio must lie in (0, {CFL_MAX}]")
        if self.t_max < 0:
            raise ConfigError("t_max must be non-negative")
        if self.l < 0 or self.d < 2:
            raise ConfigError("need d >= 2 and l >= 0")
        if self.support is not None and self.grid.r_max < self.support + self.t_max + self.margin:
            raise PreconditionError(
                f"r_max = {self.grid.r_max} does not contain support + t_max + margin "
                f"= {self.support + self.t_max + self.margin}"
            )

    @property
    def times(self) -> tuple:
        ts = sorted({0.0, *[float(t) for t in self.snapshot_times if 0 <= t <= self.t_max], float(self.t_max)})
        return tuple(ts)


@dataclass
class Snapshot:
    t: float
    r: np.ndarray
    v: np.ndarray
    vt: np.ndarray
    l: int
    d: int
    channel: str = ""
    energy: float = float("nan")


# ---------------------------------------------------------------------------
# operators


def _d2_matrix(n: int, h: float, parity: int) -> sp.csr_matrix:
    """Fourth-order second derivative with reflected ghosts at r = 0, zeros beyond r_max."""
    c = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / (12 * h * h)
    rows, cols, vals = [], [], []
    for off, cv in zip(range(-2, 3), c):
        i = np.arange(n)
        j = i + off
        inside = (j >= 0) & (j < n)
        rows.append(i[inside])
        cols.append(j[inside])
        vals.append(np.full(inside.sum(), cv))
        ghost = j < 0
        # ghost cell -1-k mirrors cell k
        rows.append(i[ghost])
        cols.append(-1 - j[ghost])
        vals.append(np.full(ghost.sum(), parity * cv))
    return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))


def _d1_matrix(n: int, h: float, parity: int) -> sp.csr_matrix:
    """Fourth-order centred first derivative at cell centres with the same ghosts."""
    c = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / (12 * h)
    rows, cols, vals = [], [], []
    for off, cv in zip(range(-2, 3), c):
        if cv == 0:
            continue
        i = np.arange(n)
        j = i + off
        inside = (j >= 0) & (j < n)
        rows.append(i[inside])
        cols.append(j[inside])
        vals.append(np.full(inside.sum(), cv))
        ghost = j < 0
        rows.append(i[ghost])
        cols.append(-1 - j[ghost])
        vals.append(np.full(ghost.sum(), parity * cv))
    return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))


def _face_gradient(n: int, h: float, parity: int) -> sp.csr_matrix:
    """Staggered fourth-order gradient from cells to faces r_f = f h, f = 0..n."""
    c = np.array([1.0, -27.0, 27.0, -1.0]) / (24 * h)
    rows, cols, vals = [], [], []
    f = np.arange(n + 1)
    for off, cv in zip(range(-2, 2), c):
        j = f + off
        inside = (j >= 0) & (j < n)
        rows.append(f[inside])
        cols.append(j[inside])
        vals.append(np.full(inside.sum(), cv))
        ghost = j < 0
        rows.append(f[ghost])
        cols.append(-1 - j[ghost])
        vals.append(np.full(ghost.sum(), parity * cv))
    return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n + 1, n))


@dataclass
class _Operator:
    """Semi-discrete operator A with y_tt = A y, and how to map y back to v."""

    A: sp.csr_matrix
    r: np.ndarray
    h: float
    d: int
    l: int
    odd: bool
    m: float
    parity: int
    energy_matrix: sp.csr_matrix
    mass: np.ndarray

    def to_v(self, y):
        return y / self.r**self.m if self.odd else y

    def from_v(self, v):
        return v * self.r**self.m if self.odd else v

    def energy(self, y, yt) -> float:
        """Semi-discrete conserved energy, approximating int (v_t^2 + v_r^2 + L v^2/r^2) r^(d-1) dr."""
        pot = np.vdot(y, self.energy_matrix @ y).real
        kin = np.sum(self.mass * np.abs(yt) ** 2)
        return float(kin + pot)


def radial_weights(r: np.ndarray, d: int) -> np.ndarray:
    """Weights w with sum w_i g(r_i) ~ int_0^inf r^(d-1) g(r) dr for even g on r_i = (i+1/2) h.

    The midpoint rule is corrected by the Euler-Maclaurin terms at r = 0,
    which only survive for even d; g is fitted by 1, r^2, r^4 on the first cells.
    """
    h = r[1] - r[0]
    w = h * r ** (d - 1)
    if d % 2:
        return w
    em = {1: -(h**2) / 24, 3: 7 * h**4 / 5760 * 6, 5: -31 * h**6 / 967680 * 120}
    V = np.array([[ri ** (2 * k) for k in range(3)] for ri in r[:3]])
    P = np.linalg.inv(V)
    for k in range(3):
        p = d - 1 + 2 * k
        if p in em:
            w[:3] += em[p] * P[k]
    return w


def _build_operator(d: int, l: int, grid: RadialGrid) -> _Operator:
    n, h = grid.n, grid.h
    r = grid.r
    L = l * (l + d - 2)
    if d % 2:
        m = (d - 1) // 2
        parity = (-1) ** (l + m)
        q = (l + m) * (l + m - 1)
        K = -_d2_matrix(n, h, parity) + sp.diags(q / r**2)
        K = K.tocsr()
        mass = np.full(n, h)
        return _Operator((-K).tocsr(), r, h, d, l, True, m, parity, (h * K).tocsr(), mass)
    parity = (-1) ** l
    D1 = _d1_matrix(n, h, parity)
    A = (_d2_matrix(n, h, parity) + sp.diags((d - 1) / r) @ D1 - sp.diags(L / r**2)).tocsr()
    Mv = radial_weights(r, d)
    S = (D1.T @ sp.diags(Mv) @ D1 + sp.diags(L * Mv / r**2)).tocsr()
    return _Operator(A, r, h, d, l, False, 0.0, parity, S, Mv)


def _sample(w, r):
    if w is None:
        return np.zeros_like(r)
    if callable(w) and not hasattr(w, "value"):
        return np.asarray(w(r))
    return np.asarray(w.value(r))


def _rk4_run(op: _Operator, y0, yt0, times, cfl):
    """Integrate y_tt = A y and return (t, y, y_t) at each requested time."""
    A = op.A
    y = np.array(y0, dtype=np.result_type(y0, yt0, float))
    z = np.array(yt0, dtype=y.dtype)
    out = [(times[0], y.copy(), z.copy())]
    t = times[0]
    # RK4 covers i*omega*dt for |omega dt| < 2.8; omega^2 <= row-sum norm of A
    omega = math.sqrt(abs(A).sum(axis=1).max())
    dt_max = min(cfl * op.h, 2.5 / omega)
    for t_next in times[1:]:
        span = t_next - t
        steps = max(1, int(math.ceil(span / dt_max - 1e-12)))
        dt = span / steps
        for _ in range(steps):
            k1y, k1z = z, A @ y
            y2, z2 = y + 0.5 * dt * k1y, z + 0.5 * dt * k1z
            k2y, k2z = z2, A @ y2
            y3, z3 = y + 0.5 * dt * k2y, z + 0.5 * dt * k2z
            k3y, k3z = z3, A @ y3
            y4, z4 = y + dt * k3y, z + dt * k3z
            k4y, k4z = z4, A @ y4
            y = y + dt / 6 * (k1y + 2 * k2y + 2 * k3y + k4y)
            z = z + dt / 6 * (k1z + 2 * k2z + 2 * k3z + k4z)
        t = t_next
        out.append((t, y.copy(), z.copy()))
    return out


def solve_radial(w0, w1, cfg: SolverConfig, channel: str = "") -> list:
    """Snapshots of one channel for data (w0, w1): profiles, callables or None."""
    op = _build_operator(cfg.d, cfg.l, cfg.grid)
    r = op.r
    v0 = _sample(w0, r)
    v1 = _sample(w1, r)
    y0 = op.from_v(v0)
    yt0 = op.from_v(v1)
    snaps = []
    for t, y, z in _rk4_run(op, y0, yt0, cfg.times, cfg.cfl):
        snaps.append(Snapshot(t, r, op.to_v(y), op.to_v(z), cfg.l, cfg.d, channel, op.energy(y, z)))
    edge = max(np.max(np.abs(s.v[-8:])) for s in snaps)
    scale = max(np.max(np.abs(s.v)) for s in snaps) or 1.0
    if edge > 1e-8 * scale:
        raise PreconditionError("solution reached the outer boundary (increase r_max)")
    return snaps


def solve_field(u: WaveData, grid: RadialGrid, t_max: float, snapshot_times: Sequence = (), cfl: float = CFL_MAX) -> dict:
    """Solve every channel of u; channels run on up to WAVECONE_THREADS workers."""
    ch0 = u.u0.channels()
    ch1 = u.u1.channels()
    keys = sorted(set(ch0) | set(ch1))

    def run(key):
        c0, c1 = ch0.get(key), ch1.get(key)
        l = (c0 or c1).l
        cfg = SolverConfig(u.d, l, grid, t_max, tuple(snapshot_times), cfl)
        return key, solve_radial(c0, c1, cfg, key)

    workers = min(thread_count(), max(1, len(keys)))
    if workers == 1:
        results = [run(k) for k in keys]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, keys))
    return dict(results)


def discrete_energy(snaps: list) -> np.ndarray:
    return np.array([s.energy for s in snaps])


# ---------------------------------------------------------------------------
# exact oracle, d = 3, l = 0


def _antiderivative_rho_w(w1, x, n_panels: int = 96, order: int = 16):
    """Phi(x) = int_0^|x| rho w1(rho) d rho (even in x)."""
    x = np.abs(np.asarray(x, dtype=float))
    r_end = getattr(w1, "r_end", None)
    top = np.minimum(x, r_end) if r_end else x
    t, wt = _quad.gauss_legendre(order)
    ref = np.linspace(0.0, 1.0, n_panels + 1)
    nodes = ((ref[:-1] + ref[1:])[:, None] / 2 + (ref[1:] - ref[:-1])[:, None] / 2 * t[None, :]).ravel()
    weights = ((ref[1:] - ref[:-1])[:, None] / 2 * wt[None, :]).ravel()
    flat = top.ravel()
    rho = flat[:, None] * nodes[None, :]
    vals = _sample(w1, rho.ravel()).reshape(rho.shape)
    return ((rho * vals) @ weights * flat).reshape(x.shape)


def dalembert3d(w0, w1, t: float, r, derivatives: bool = False):
    """Exact radial solution in d = 3, l = 0.

    With psi = r v and the odd extension psi0(rho) = rho w0(|rho|),
    r v(t, r) = (psi0(r+t) + psi0(r-t))/2 + (Phi(r+t) - Phi(r-t))/2,
    Phi' = rho w1(|rho|).  With ``derivatives`` returns (v, v_t, v_r).
    """
    r = np.asarray(r, dtype=float)
    a, b = r + t, r - t

    def psi0(x):
        return x * _sample(w0, np.abs(x))

    def dpsi0(x):
        if w0 is None:
            return np.zeros_like(x)
        return _sample(w0, np.abs(x)) + np.abs(x) * np.asarray(w0.deriv(np.abs(x)))

    def g(x):
        return x * _sample(w1, np.abs(x))

    def Phi(x):
        return np.zeros_like(x) if w1 is None else _antiderivative_rho_w(w1, x)

    psi = 0.5 * (psi0(a) + psi0(b)) + 0.5 * (Phi(a) - Phi(b))
    v = psi / r
    if not derivatives:
        return v
    psi_t = 0.5 * (dpsi0(a) - dpsi0(b)) + 0.5 * (g(a) + g(b))
    psi_r = 0.5 * (dpsi0(a) + dpsi0(b)) + 0.5 * (g(a) - g(b))
    return v, psi_t / r, psi_r / r - psi / r**2


# ---------------------------------------------------------------------------
# measurements


def _vr(s: Snapshot) -> np.ndarray:
    h = s.r[1] - s.r[0]
    D = _d1_matrix(len(s.r), h, (-1) ** s.l)
    return D @ s.v


def _densities(s: Snapshot):
    """(grad density, dt density, mass density), each times r^(d-1)."""
    L = s.l * (s.l + s.d - 2)
    wgt = s.r ** (s.d - 1)
    grad = (np.abs(_vr(s)) ** 2 + L * np.abs(s.v / s.r) ** 2) * wgt
    dt = np.abs(s.vt) ** 2 * wgt
    mass = np.abs(s.v) ** 2 * wgt
    return grad, dt, mass


def _integrate_from(r, dens, lo):
    r_max = r[-1]
    if lo >= r_max:
        return 0.0
    lo = max(lo, 0.0)
    if lo <= r[0]:
        # [0, r_0]: the density vanishes like r^(d-1) at the origin
        return float(CubicSpline(r, dens).integrate(r[0], r_max) + 0.5 * r[0] * dens[0])
    return float(CubicSpline(r, dens).integrate(lo, r_max))


def exterior_split(snaps_by_channel: dict, R: float) -> list:
    """Per snapshot time: (t, grad part, dt part, mass) outside r >= t + R, summed over channels."""
    keys = sorted(snaps_by_channel)
    n = len(snaps_by_channel[keys[0]])
    out = []
    for k in range(n):
        t = snaps_by_channel[keys[0]][k].t
        g = dtp = m = 0.0
        for key in keys:
            s = snaps_by_channel[key][k]
            gd, dd, md = _densities(s)
            g += _integrate_from(s.r, gd, t + R)
            dtp += _integrate_from(s.r, dd, t + R)
            m += _integrate_from(s.r, md, t + R)
        out.append((t, g, dtp, m))
    return out


def measure_exterior(snaps, R: float, what: str = "energy") -> list:
    """Series (t, value) of the energy or mass outside r >= t + R.

    ``snaps`` is a list of snapshots of one channel or a dict of such lists.
    """
    if what not in ("energy", "mass"):
        raise ConfigError("what must be 'energy' or 'mass'")
    if not isinstance(snaps, dict):
        snaps = {"": snaps}
    rows = exterior_split(snaps, R)
    if what == "energy":
        return [(t, g + d) for t, g, d, _ in rows]
    return [(t, m) for t, _, _, m in rows]


def radiation_error(snap: Snapshot, h_profile, scale: float = 1.0) -> float:
    """L2 norm over r >= t/2 of (v_t, v_r) minus (-F, F), F = (2 pi r)^(-(d-1)/2) h(r - t).

    ``h_profile`` is a callable s -> h(s) or an object with ``at``.
    """
    t = snap.t
    if t <= 0:
        raise PreconditionError("radiation error needs t > 0")
    h = snap.r[1] - snap.r[0]
    if h > 0.1:
        raise ResolutionError("grid too coarse near the cone")
    func = h_profile.at if hasattr(h_profile, "at") else h_profile
    r = snap.r
    sel = r >= t / 2
    rr = r[sel]
    F = scale * (2 * math.pi * rr) ** (-(snap.d - 1) / 2) * func(rr - t)
    vr = _vr(snap)[sel]
    dens = (np.abs(snap.vt[sel] + F) ** 2 + np.abs(vr - F) ** 2) * rr ** (snap.d - 1)
    return math.sqrt(float(CubicSpline(rr, dens).integrate(rr[0], rr[-1])))


def richardson_limit(times: Sequence[float], values: Sequence[float]) -> float:
    """Late-time limit from the last three samples by Aitken extrapolation.

    Falls back to the last value when the differences do not decrease
    geometrically (plateau already reached or noise dominated).
    """
    if len(values) < 3:
        return float(values[-1])
    a, b, c = (float(x) for x in values[-3:])
    d1, d2 = b - a, c - b
    den = d2 - d1
    if den == 0 or abs(d2) >= abs(d1) or d1 * d2 <= 0:
        return c
    return c - d2 * d2 / den


def fd_channel_laplacian(values: np.ndarray, r: np.ndarray, d: int, l: int) -> np.ndarray:
    """Fourth-order central differences of w'' + (d-1)/r w' - l(l+d-2) w / r^2.

    ``r`` must be uniform; the first and last two nodes are returned as NaN.
    """
    v = np.asarray(values)
    h = r[1] - r[0]
    out = np.full(v.shape, np.nan, dtype=np.result_type(v, float))
    i = slice(2, len(v) - 2)
    d2 = (-v[4:] + 16 * v[3:-1] - 30 * v[2:-2] + 16 * v[1:-3] - v[:-4]) / (12 * h * h)
    d1 = (-v[4:] + 8 * v[3:-1] - 8 * v[1:-3] + v[:-4]) / (12 * h)
    rr = r[i]
    out[i] = d2 + (d - 1) / rr * d1 - l * (l + d - 2) * v[i] / rr**2
    return out


def snapshots_to_csv(snaps_by_channel: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["channel", "t", "r", "re_v", "im_v", "re_vt", "im_vt"])
    for key in sorted(snaps_by_channel):
        for s in snaps_by_channel[key]:
            v = np.asarray(s.v, dtype=complex)
            vt = np.asarray(s.vt, dtype=complex)
            for j in range(len(s.r)):
                w.writerow(
                    [key, f"{s.t:.6g}", f"{s.r[j]:.10g}", f"{v[j].real:.12e}", f"{v[j].imag:.12e}", f"{vt[j].real:.12e}", f"{vt[j].imag:.12e}"]
                )
    return buf.getvalue()


@dataclass
class TimeDomainExterior:
    """Measured exterior energies of the forward run and of the time-reversed run."""

    R: float
    times: list
    forward_grad: list
    forward_dt: list
    backward_grad: list
    backward_dt: list

    @property
    def E_ext(self) -> list:
        return [0.5 * (a + b + c + d) for a, b, c, d in zip(self.forward_grad, self.forward_dt, self.backward_grad, self.backward_dt)]

    def limit(self) -> float:
        return richardson_limit(self.times, self.E_ext)

    def to_dict(self) -> dict:
        return {
            "R": self.R,
            "method": "time-domain",
            "times": list(self.times),
            "forward_grad": list(self.forward_grad),
            "forward_dt": list(self.forward_dt),
            "backward_grad": list(self.backward_grad),
            "backward_dt": list(self.backward_dt),
            "E_ext": self.E_ext,
            "E_ext_extrapolated": self.limit(),
        }


def time_domain_exterior(u: WaveData, R: float, grid: RadialGrid, t_max: float, snapshot_times: Sequence = ()) -> TimeDomainExterior:
    """Exterior energy outside r >= t + R for u and for the time-reversed data (u0, -u1)."""
    fwd = exterior_split(solve_field(u, grid, t_max, snapshot_times), R)
    bwd = exterior_split(solve_field(u.time_reversed(), grid, t_max, snapshot_times), R)
    keep = [k for k, row in enumerate(fwd) if row[0] > 0]
    return TimeDomainExterior(
        R,
        [fwd[k][0] for k in keep],
        [fwd[k][1] for k in keep],
        [fwd[k][2] for k in keep],
        [bwd[k][1] for k in keep],
        [bwd[k][2] for k in keep],
    )
