"""Fields decomposed into spherical-harmonic channels.

A channel is a radial profile ``w(r)`` multiplying one orthonormal spherical
harmonic of degree ``l``.  Its Fourier transform is ``a(|xi|) Y(xi/|xi|)``;
``a`` is the frequency profile.  Distinct channels are orthogonal in every
norm used here, so all computations reduce to one radial variable.
"""

from __future__ import annotations

import hashlib
import math
import threading
from collections import OrderedDict
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from scipy import special
from scipy.interpolate import CubicSpline

from . import _quad
from .errors import ConfigError, PreconditionError

__all__ = [
    "Dimension",
    "RadialGrid",
    "Gaussian",
    "Bump",
    "PowerLaw",
    "Monomial",
    "Windowed",
    "GridProfile",
    "SpectralProfile",
    "HarmonicComponent",
    "Field",
    "WaveData",
    "l2_norm",
    "h1_norm",
    "gaussian_pair",
    "rescale",
    "hankel_spectrum",
]


@dataclass(frozen=True)
class Dimension:
    d: int

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 2:
            raise ConfigError(f"dimension must be an integer >= 2, got {self.d}")

    @property
    def is_odd(self) -> bool:
        return self.d % 2 == 1

    @property
    def parity(self) -> str:
        return "odd" if self.is_odd else "even"

    @property
    def tau(self) -> float:
        return (self.d - 1) * math.pi / 4

    @property
    def c0(self) -> float:
        return 1.0 / math.sqrt(2.0 * (2 * math.pi) ** (self.d - 1))


@dataclass(frozen=True)
class RadialGrid:
    """Cell-centred grid r_i = (i + 1/2) h on (0, r_max)."""

    r_max: float
    n: int

    def __post_init__(self):
        if self.r_max <= 0 or self.n < 8:
            raise ConfigError("radial grid needs r_max > 0 and n >= 8")

    @property
    def h(self) -> float:
        return self.r_max / self.n

    @property
    def r(self) -> np.ndarray:
        return (np.arange(self.n) + 0.5) * self.h


# ---------------------------------------------------------------------------
# radial profiles


class RadialProfile:
    """Base class: a radial profile w(r) with optional closed-form pieces."""

    @property
    def breakpoints(self) -> tuple:
        """Finite points where the profile is not smooth."""
        return ()

    def value(self, r):
        raise NotImplementedError

    def deriv(self, r):
        raise NotImplementedError

    @property
    def r_end(self) -> float:
        """Radius beyond which the profile is zero or purely a power law."""
        return max(self.breakpoints, default=0.0)

    def power_tail(self):
        """Monomials (coef, power) describing the profile for r >= r_end."""
        return []

    def spectrum(self, nu, d: int):
        return hankel_spectrum(self, nu, d)

    @property
    def nu_end(self) -> float:
        return np.inf

    def rescaled(self, lam: float) -> "RadialProfile":
        raise NotImplementedError


@dataclass(frozen=True)
class Gaussian(RadialProfile):
    """amp * r**l * exp(-r**2 / (2 sigma**2))."""

    l: int
    sigma: float = 1.0
    amp: complex = 1.0
    center: float = 0.0

    def __post_init__(self):
        if self.sigma <= 0 or self.l < 0:
            raise ConfigError("Gaussian needs sigma > 0 and l >= 0")
        if self.center != 0.0:
            raise ConfigError("only centred Gaussians are supported")

    def value(self, r):
        r = np.asarray(r, dtype=float)
        return self.amp * r**self.l * np.exp(-(r**2) / (2 * self.sigma**2))

    def deriv(self, r):
        r = np.asarray(r, dtype=float)
        g = np.exp(-(r**2) / (2 * self.sigma**2))
        lead = self.l * r ** (self.l - 1) if self.l > 0 else 0.0
        return self.amp * (lead - r ** (self.l + 1) / self.sigma**2) * g

    @property
    def r_end(self) -> float:
        # exp(-r^2/2s^2) r^l below 1e-18 of its peak
        return self.sigma * (math.sqrt(2 * 42.0) + math.sqrt(self.l))

    @property
    def nu_end(self) -> float:
        return (math.sqrt(2 * 42.0) + math.sqrt(self.l)) / self.sigma

    def spectrum(self, nu, d: int):
        nu = np.asarray(nu, dtype=float)
        s = self.sigma
        return (
            self.amp
            * (2 * math.pi) ** (d / 2)
            * (-1j) ** self.l
            * s ** (2 * self.l + d)
            * nu**self.l
            * np.exp(-(s**2) * nu**2 / 2)
        )

    def rescaled(self, lam):
        return Gaussian(self.l, self.sigma / lam, self.amp * lam**self.l)


def _bump(x):
    out = np.zeros_like(x)
    inside = np.abs(x) < 1
    xi = x[inside]
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - xi**2))
    return out


def _bump_deriv(x):
    out = np.zeros_like(x)
    inside = np.abs(x) < 1
    xi = x[inside]
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - xi**2)) * (-2 * xi / (1 - xi**2) ** 2)
    return out


@dataclass(frozen=True)
class Bump(RadialProfile):
    """amp * r**l * phi(r), phi a smooth bump supported in [a, b]."""

    l: int
    a: float
    b: float
    amp: complex = 1.0

    def __post_init__(self):
        if not (0 <= self.a < self.b) or self.l < 0:
            raise ConfigError("Bump needs 0 <= a < b and l >= 0")

    @property
    def breakpoints(self):
        return (self.a, self.b)

    def _x(self, r):
        return (2 * np.asarray(r, dtype=float) - self.a - self.b) / (self.b - self.a)

    def value(self, r):
        r = np.asarray(r, dtype=float)
        return self.amp * r**self.l * _bump(self._x(r))

    def deriv(self, r):
        r = np.asarray(r, dtype=float)
        x = self._x(r)
        lead = self.l * r ** (self.l - 1) * _bump(x) if self.l > 0 else 0.0
        return self.amp * (lead + r**self.l * _bump_deriv(x) * 2 / (self.b - self.a))

    @property
    def nu_end(self) -> float:
        return 400.0 / (self.b - self.a)

    def rescaled(self, lam):
        return Bump(self.l, self.a / lam, self.b / lam, self.amp * lam**self.l)


@dataclass(frozen=True)
class PowerLaw(RadialProfile):
    """amp * r**alpha for r > R; inside either 0 or the harmonic profile matching at R."""

    alpha: float
    R: float
    l: int = 0
    inner: Optional[str] = None
    amp: complex = 1.0

    def __post_init__(self):
        if self.R <= 0:
            raise ConfigError("PowerLaw needs R > 0")
        if self.inner not in (None, "harmonic"):
            raise ConfigError("PowerLaw inner must be None or 'harmonic'")

    @property
    def breakpoints(self):
        return (self.R,)

    def pieces(self):
        """Monomial pieces (lo, hi, coef, power) describing the whole profile."""
        out = []
        if self.inner == "harmonic":
            out.append((0.0, self.R, self.amp * self.R ** (self.alpha - self.l), self.l))
        out.append((self.R, np.inf, self.amp, self.alpha))
        return out

    def value(self, r):
        r = np.asarray(r, dtype=float)
        out = np.zeros(r.shape, dtype=complex if np.iscomplexobj(self.amp) else float)
        for lo, hi, c, p in self.pieces():
            sel = (r > lo) & (r <= hi) if lo > 0 else (r >= lo) & (r <= hi)
            out[sel] = c * r[sel] ** p
        return out

    def deriv(self, r):
        r = np.asarray(r, dtype=float)
        out = np.zeros(r.shape, dtype=complex if np.iscomplexobj(self.amp) else float)
        for lo, hi, c, p in self.pieces():
            sel = (r > lo) & (r <= hi) if lo > 0 else (r >= lo) & (r <= hi)
            if p != 0:
                out[sel] = c * p * r[sel] ** (p - 1)
        return out

    def power_tail(self):
        return [(self.amp, self.alpha)]

    def spectrum(self, nu, d):
        raise PreconditionError("power-law profiles have no frequency representation here")

    def rescaled(self, lam):
        return PowerLaw(self.alpha, self.R / lam, self.l, self.inner, self.amp * lam**self.alpha)


@dataclass(frozen=True)
class Monomial(RadialProfile):
    """coef * r**power on lo < r <= hi, zero elsewhere."""

    coef: complex
    power: float
    lo: float
    hi: float
    l: int = 0
    amp: complex = 1.0

    @property
    def breakpoints(self):
        return tuple(b for b in (self.lo, self.hi) if 0 < b < np.inf)

    def pieces(self):
        return [(self.lo, self.hi, self.coef, self.power)]

    def _sel(self, r):
        return ((r > self.lo) | ((self.lo == 0) & (r >= 0))) & (r <= self.hi)

    def value(self, r):
        r = np.asarray(r, dtype=float)
        sel = self._sel(r)
        safe = np.where(sel, r, 1.0)
        return np.where(sel, self.coef * safe**self.power, 0.0)

    def deriv(self, r):
        r = np.asarray(r, dtype=float)
        sel = self._sel(r)
        safe = np.where(sel, r, 1.0)
        if self.power == 0:
            return np.zeros(r.shape, dtype=np.result_type(self.coef, float))
        return np.where(sel, self.coef * self.power * safe ** (self.power - 1), 0.0)

    def power_tail(self):
        return [(self.coef, self.power)] if np.isinf(self.hi) else []

    def spectrum(self, nu, d):
        raise PreconditionError("monomial pieces have no frequency representation here")

    def rescaled(self, lam):
        return Monomial(self.coef * lam**self.power, self.power, self.lo / lam, self.hi / lam, self.l)


class Windowed(RadialProfile):
    """A compactly described profile restricted to lo < r <= hi."""

    def __init__(self, base: RadialProfile, lo: float, hi: float = np.inf):
        if base.power_tail() and np.isinf(hi):
            raise ConfigError("windowed power-law tails are not supported")
        self.base = base
        self.lo = float(lo)
        self.hi = float(hi)
        self.l = base.l
        self.amp = 1.0

    @property
    def breakpoints(self):
        inner = [b for b in self.base.breakpoints if self.lo < b < self.hi]
        ends = [b for b in (self.lo, self.hi) if 0 < b < np.inf and b <= max(self.base.r_end, self.lo)]
        return tuple(sorted(set(inner + ends)))

    @property
    def r_end(self):
        return min(max(self.base.r_end, self.lo), self.hi)

    def _mask(self, r):
        r = np.asarray(r, dtype=float)
        return ((r > self.lo) | ((self.lo == 0) & (r >= 0))) & (r <= self.hi)

    def value(self, r):
        return np.where(self._mask(r), self.base.value(r), 0.0)

    def deriv(self, r):
        return np.where(self._mask(r), self.base.deriv(r), 0.0)

    def rescaled(self, lam):
        return Windowed(self.base.rescaled(lam), self.lo / lam, self.hi / lam)


class GridProfile(RadialProfile):
    """Samples on a grid, interpolated by a cubic spline; zero beyond the last node."""

    def __init__(self, r, values, l: int = 0):
        self.r_nodes = np.asarray(r, dtype=float)
        self.values = np.asarray(values)
        self.l = l
        self.amp = 1.0
        self._re = CubicSpline(self.r_nodes, self.values.real)
        self._im = CubicSpline(self.r_nodes, self.values.imag) if np.iscomplexobj(self.values) else None

    @property
    def breakpoints(self):
        return (float(self.r_nodes[-1]),)

    def _eval(self, r, nu):
        r = np.asarray(r, dtype=float)
        out = self._re(r, nu)
        if self._im is not None:
            out = out + 1j * self._im(r, nu)
        return np.where((r >= 0) & (r <= self.r_nodes[-1]), out, 0.0)

    def value(self, r):
        return self._eval(r, 0)

    def deriv(self, r):
        return self._eval(r, 1)

    @property
    def nu_end(self) -> float:
        return math.pi / np.min(np.diff(self.r_nodes))

    def rescaled(self, lam):
        return GridProfile(self.r_nodes / lam, self.values, self.l)


class SpectralProfile(RadialProfile):
    """A channel known only through its frequency profile a(nu)."""

    def __init__(self, func: Callable, l: int, nu_end: float = np.inf):
        self.func = func
        self.l = l
        self.amp = 1.0
        self._nu_end = nu_end

    def spectrum(self, nu, d):
        return self.func(np.asarray(nu, dtype=float))

    @property
    def nu_end(self) -> float:
        return self._nu_end

    def value(self, r):
        raise PreconditionError("spectral profile has no physical representation")

    deriv = value

    def rescaled(self, lam):
        # the dimension is only known at evaluation time, so rescale lazily
        return _RescaledSpectral(self, lam)


class _RescaledSpectral(SpectralProfile):
    def __init__(self, base: SpectralProfile, lam: float):
        self.base = base
        self.lam = lam
        self.l = base.l
        self.amp = 1.0
        self._nu_end = base.nu_end * lam

    def spectrum(self, nu, d):
        return self.lam ** (-d) * self.base.spectrum(np.asarray(nu) / self.lam, d)

    def rescaled(self, lam):
        return _RescaledSpectral(self.base, self.lam * lam)


_SPECTRUM_CACHE: "OrderedDict" = OrderedDict()
_SPECTRUM_CACHE_SIZE = 16
_SPECTRUM_LOCK = threading.Lock()


def hankel_spectrum(profile: RadialProfile, nu, d: int, order: int = 48):
    """Frequency profile of a physical channel by direct Hankel quadrature.

    a(nu) = (2 pi)^(d/2) (-i)^l nu^(1-d/2) int w(r) J_{l+d/2-1}(nu r) r^(d/2) dr

    Results for large node sets are memoised per (profile, d, nodes).
    """
    if profile.power_tail():
        raise PreconditionError("profile with a power-law tail has no computable spectrum")
    nu = np.asarray(nu, dtype=float)
    key = None
    if nu.size >= 1024:
        try:
            key = (profile, d, order, nu.shape, hashlib.sha1(np.ascontiguousarray(nu).tobytes()).hexdigest())
            with _SPECTRUM_LOCK:
                hit = _SPECTRUM_CACHE.get(key)
                if hit is not None:
                    _SPECTRUM_CACHE.move_to_end(key)
        except TypeError:
            key = hit = None
        if hit is not None:
            return hit.copy()
    out = _hankel_spectrum(profile, nu, d, order)
    if key is not None:
        with _SPECTRUM_LOCK:
            _SPECTRUM_CACHE[key] = out
            if len(_SPECTRUM_CACHE) > _SPECTRUM_CACHE_SIZE:
                _SPECTRUM_CACHE.popitem(last=False)
        out = out.copy()
    return out


def _hankel_spectrum(profile: RadialProfile, nu: np.ndarray, d: int, order: int):
    r_end = profile.r_end
    edges = _quad.split_interval(0.0, r_end, profile.breakpoints, max_len=r_end / 24)
    rn, wn = _quad.panels(edges, order)
    w = profile.value(rn) * rn ** (d / 2) * wn
    out = np.zeros(nu.shape, dtype=complex)
    order_j = profile.l + d / 2 - 1
    flat = nu.ravel()
    res = np.empty(flat.shape, dtype=complex)
    chunk = 2048
    for k in range(0, flat.size, chunk):
        nv = flat[k : k + chunk]
        J = special.jv(order_j, np.outer(nv, rn))
        res[k : k + chunk] = J @ w
    with np.errstate(divide="ignore", invalid="ignore"):
        pref = np.where(flat > 0, flat ** (1 - d / 2), 0.0)
    res = res * pref
    if d == 2 and profile.l == 0:
        # nu^0 J_0(0) = 1 at the origin
        zero = flat == 0
        res[zero] = np.sum(w)
    elif profile.l == 0 and d > 2:
        # limit nu^(1-d/2) J_{d/2-1}(nu r) -> r^(d/2-1) / (2^(d/2-1) Gamma(d/2))
        zero = flat == 0
        if np.any(zero):
            lim = np.sum(w * rn ** (d / 2 - 1)) / (2 ** (d / 2 - 1) * special.gamma(d / 2))
            res[zero] = lim
    out = (2 * math.pi) ** (d / 2) * (-1j) ** profile.l * res.reshape(nu.shape)
    return out


# ---------------------------------------------------------------------------
# components and fields


@dataclass(frozen=True)
class HarmonicComponent:
    """One radial profile attached to the spherical harmonic identified by ``channel``."""

    l: int
    profile: RadialProfile
    channel: Optional[str] = None

    def __post_init__(self):
        if self.l < 0:
            raise ConfigError("degree l must be non-negative")
        if getattr(self.profile, "l", self.l) != self.l:
            raise ConfigError("profile degree does not match component degree")

    @property
    def key(self) -> str:
        return self.channel if self.channel is not None else f"l{self.l}"


@dataclass(frozen=True)
class Channel:
    key: str
    l: int
    profiles: tuple

    def value(self, r):
        return sum(p.value(r) for p in self.profiles)

    def deriv(self, r):
        return sum(p.deriv(r) for p in self.profiles)

    def spectrum(self, nu, d):
        return sum(p.spectrum(nu, d) for p in self.profiles)

    @property
    def r_end(self):
        return max(p.r_end for p in self.profiles)

    @property
    def nu_end(self):
        return max(p.nu_end for p in self.profiles)

    @property
    def breakpoints(self):
        return tuple(sorted({b for p in self.profiles for b in p.breakpoints}))

    def power_tail(self):
        return [t for p in self.profiles for t in p.power_tail()]


@dataclass(frozen=True)
class Field:
    d: int
    components: tuple = ()

    def __post_init__(self):
        Dimension(self.d)
        object.__setattr__(self, "components", tuple(self.components))
        seen = {}
        for c in self.components:
            if seen.setdefault(c.key, c.l) != c.l:
                raise ConfigError(f"channel {c.key!r} mixes degrees")

    @property
    def dim(self) -> Dimension:
        return Dimension(self.d)

    def channels(self) -> dict:
        groups: dict[str, list] = {}
        degree = {}
        for c in self.components:
            groups.setdefault(c.key, []).append(c.profile)
            degree[c.key] = c.l
        return {k: Channel(k, degree[k], tuple(v)) for k, v in sorted(groups.items())}

    def __add__(self, other: "Field") -> "Field":
        if other.d != self.d:
            raise ConfigError("cannot add fields of different dimension")
        return Field(self.d, self.components + other.components)

    def scaled(self, c) -> "Field":
        return Field(self.d, tuple(replace(comp, profile=_Scaled(comp.profile, c)) for comp in self.components))


class _Scaled(RadialProfile):
    def __init__(self, base, c):
        self.base = base
        self.c = c
        self.l = base.l
        self.amp = 1.0

    def value(self, r):
        return self.c * self.base.value(r)

    def deriv(self, r):
        return self.c * self.base.deriv(r)

    def spectrum(self, nu, d):
        return self.c * self.base.spectrum(nu, d)

    @property
    def breakpoints(self):
        return self.base.breakpoints

    @property
    def r_end(self):
        return self.base.r_end

    @property
    def nu_end(self):
        return self.base.nu_end

    def power_tail(self):
        return [(self.c * a, p) for a, p in self.base.power_tail()]

    def pieces(self):
        return [(lo, hi, self.c * a, p) for lo, hi, a, p in self.base.pieces()]

    def rescaled(self, lam):
        return _Scaled(self.base.rescaled(lam), self.c)


@dataclass(frozen=True)
class WaveData:
    u0: Field
    u1: Field

    def __post_init__(self):
        if self.u0.d != self.u1.d:
            raise ConfigError("u0 and u1 must live in the same dimension")

    @property
    def d(self) -> int:
        return self.u0.d

    def time_reversed(self) -> "WaveData":
        return WaveData(self.u0, self.u1.scaled(-1.0))


# ---------------------------------------------------------------------------
# norms


def _radial_quadrature(ch: Channel, lo: float = 0.0, hi: Optional[float] = None, order: int = 32):
    hi = ch.r_end if hi is None else hi
    edges = _quad.split_interval(lo, hi, ch.breakpoints, max_len=max(hi - lo, 1e-300) / 64)
    return _quad.panels(edges, order)


def _tail_integral(tail, r0: float, shift: float, what: str):
    """Closed-form integral over [r0, inf) of products of tail monomials times r**shift."""
    total = 0.0
    for a1, p1 in tail:
        for a2, p2 in tail:
            beta = p1 + p2 + shift
            if beta >= -1:
                raise PreconditionError(f"profile is not in {what} (tail exponent {beta + 1:g} >= 0)")
            total += (np.conj(a1) * a2 * (-(r0 ** (beta + 1)) / (beta + 1))).real
    return total


def _tail_h1(tail, r0, d, ll):
    total = 0.0
    for a1, p1 in tail:
        for a2, p2 in tail:
            beta = p1 + p2 - 2 + d - 1
            if beta >= -1:
                raise PreconditionError(f"profile is not in H1 (tail exponent {beta + 1:g} >= 0)")
            total += ((np.conj(a1) * a2 * (p1 * p2 + ll)) * (-(r0 ** (beta + 1)) / (beta + 1))).real
    return total


def _frequency_sq(field: Field, power: int) -> float:
    total = 0.0
    d = field.d
    for ch in field.channels().values():
        nu_end = ch.nu_end
        if not np.isfinite(nu_end):
            raise PreconditionError("channel has no finite frequency cut-off")
        edges = _quad.split_interval(0.0, nu_end, (), max_len=nu_end / 64)
        nu, w = _quad.panels(edges, 32)
        a = ch.spectrum(nu, d)
        total += np.sum(np.abs(a) ** 2 * nu ** (d - 1 + power) * w)
    return total / (2 * math.pi) ** d


def l2_norm(f: Field, method: str = "physical") -> float:
    """L2 norm of a field, summed over orthogonal channels."""
    if method == "frequency":
        return math.sqrt(_frequency_sq(f, 0))
    d = f.d
    total = 0.0
    for ch in f.channels().values():
        r, w = _radial_quadrature(ch)
        total += np.sum(np.abs(ch.value(r)) ** 2 * r ** (d - 1) * w)
        tail = ch.power_tail()
        if tail:
            total += _tail_integral(tail, ch.r_end, d - 1, "L2")
    return math.sqrt(total)


def h1_norm(f: Field, method: str = "physical") -> float:
    """Homogeneous H1 norm: sqrt of sum over channels of int (|w'|^2 + l(l+d-2)|w/r|^2) r^(d-1) dr."""
    if method == "frequency":
        return math.sqrt(_frequency_sq(f, 2))
    d = f.d
    total = 0.0
    for ch in f.channels().values():
        ll = ch.l * (ch.l + d - 2)
        r, w = _radial_quadrature(ch)
        dens = np.abs(ch.deriv(r)) ** 2
        if ll:
            dens = dens + ll * np.abs(ch.value(r) / r) ** 2
        total += np.sum(dens * r ** (d - 1) * w)
        tail = ch.power_tail()
        if tail:
            total += _tail_h1(tail, ch.r_end, d, ll)
    return math.sqrt(total)


def gaussian_pair(d: int, l: int, sigma: float, amp: complex = 1.0, channel: Optional[str] = None) -> HarmonicComponent:
    """Gaussian channel r^l exp(-r^2/2 sigma^2) carrying both representations."""
    Dimension(d)
    return HarmonicComponent(l, Gaussian(l, sigma, amp), channel)


def rescale(f: Field, lam: float) -> Field:
    """Replace every channel profile w by w(lam r) (frequency: lam^-d a(nu/lam))."""
    if lam <= 0:
        raise ConfigError("rescale factor must be positive")
    return Field(f.d, tuple(replace(c, profile=c.profile.rescaled(lam)) for c in f.components))
