"""Gegenbauer polynomials and the polynomial kernels of the channelwise Radon transform.

Everything here is exact where it can be: Gegenbauer coefficients and kernel
tables are ``fractions.Fraction`` objects, and the Gamma function is only
ever needed at integers and half-integers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import PreconditionError

__all__ = [
    "as_fraction",
    "gamma_half",
    "sphere_area",
    "gegenbauer_eval",
    "gegenbauer_coeffs",
    "gegenbauer_at_one",
    "gegenbauer_weighted_norm",
    "KernelPolynomial",
    "radon_kernel",
    "laplacian_powerlog",
]


def as_fraction(x) -> Fraction:
    """Convert ints, floats with short binary expansions, or strings to Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    return Fraction(x).limit_denominator(1 << 20)


def gamma_half(x) -> float:
    """Gamma at a positive integer or half-integer, by recursion from 1 and 1/2."""
    x = as_fraction(x)
    if x <= 0 or (2 * x).denominator != 1:
        raise PreconditionError(f"Gamma only supported at positive (half-)integers, got {x}")
    if x.denominator == 1:
        return float(math.factorial(int(x) - 1))
    # x = n + 1/2
    n = int(x - Fraction(1, 2))
    val = math.sqrt(math.pi)
    for k in range(n):
        val *= k + 0.5
    return val


def sphere_area(n: int) -> float:
    """Surface measure of the unit sphere S^n in R^{n+1}."""
    if n < 0:
        raise ValueError("sphere dimension must be non-negative")
    return 2.0 * math.pi ** ((n + 1) / 2) / gamma_half(Fraction(n + 1, 2))


def _check_lambda(lam):
    lam = as_fraction(lam)
    if lam == 0:
        raise PreconditionError("lambda = 0 (Chebyshev case) is not supported")
    return lam


def gegenbauer_eval(l: int, lam, t):
    """Evaluate C_l^lam(t) with the three-term recurrence.

    Parameters
    ----------
    l : int
        Degree, ``l >= 0``.
    lam : rational
        Gegenbauer parameter, nonzero.
    t : float or ndarray
        Evaluation points.
    """
    if l < 0:
        raise ValueError("degree must be non-negative")
    lam = float(_check_lambda(lam))
    t = np.asarray(t, dtype=float)
    c_prev = np.ones_like(t)
    if l == 0:
        return c_prev if c_prev.ndim else float(c_prev)
    c = 2.0 * lam * t
    for n in range(2, l + 1):
        c_prev, c = c, (2.0 * t * (n + lam - 1) * c - (n + 2 * lam - 2) * c_prev) / n
    return c if c.ndim else float(c)


def gegenbauer_coeffs(l: int, lam) -> list[Fraction]:
    """Exact power-basis coefficients of C_l^lam, lowest degree first."""
    lam = _check_lambda(lam)
    prev = [Fraction(1)]
    if l == 0:
        return prev
    cur = [Fraction(0), 2 * lam]
    for n in range(2, l + 1):
        nxt = [Fraction(0)] * (n + 1)
        for k, c in enumerate(cur):
            nxt[k + 1] += 2 * (n + lam - 1) * c / n
        for k, c in enumerate(prev):
            nxt[k] -= (n + 2 * lam - 2) * c / n
        prev, cur = cur, nxt
    return cur


def gegenbauer_at_one(l: int, lam) -> Fraction:
    """C_l^lam(1) as an exact rational."""
    return sum(gegenbauer_coeffs(l, lam), Fraction(0))


def gegenbauer_weighted_norm(l: int, lam) -> float:
    """Closed form of the integral of C_l^lam(t)^2 (1-t^2)^(lam-1/2) over [-1, 1]."""
    lam = _check_lambda(lam)
    if lam <= Fraction(-1, 2):
        raise PreconditionError("lambda must exceed -1/2")
    return (
        math.pi
        * 2.0 ** (1 - 2 * float(lam))
        * gamma_half(l + 2 * lam)
        / (math.factorial(l) * float(l + lam) * gamma_half(lam) ** 2)
    )


def _poly_mul(a, b):
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


@dataclass(frozen=True)
class KernelPolynomial:
    """Exact table of ``sum c[i, j] s**i r**(-j)``.

    Represents the m-th s-derivative of C_l^lam(s/r) (1 - s^2/r^2)^((d-3)/2).
    """

    l: int
    d: int
    m: int
    coeffs: dict = field(default_factory=dict)

    def pairs(self):
        return sorted(self.coeffs)

    @property
    def s_degree(self) -> int:
        return max((i for i, _ in self.coeffs), default=-1)

    def __call__(self, s, r):
        s = np.asarray(s, dtype=float)
        r = np.asarray(r, dtype=float)
        out = np.zeros(np.broadcast(s, r).shape)
        for (i, j), c in self.coeffs.items():
            out = out + float(c) * s**i * r ** (-j)
        return out

    def diagonal(self) -> dict:
        """Laurent coefficients of the kernel restricted to r = s, as {power: coeff}."""
        out: dict[int, Fraction] = {}
        for (i, j), c in self.coeffs.items():
            out[i - j] = out.get(i - j, Fraction(0)) + c
        return {p: c for p, c in out.items() if c != 0}

    def derivative(self) -> "KernelPolynomial":
        new = {}
        for (i, j), c in self.coeffs.items():
            if i > 0:
                new[(i - 1, j)] = new.get((i - 1, j), Fraction(0)) + i * c
        return KernelPolynomial(self.l, self.d, self.m + 1, {k: v for k, v in new.items() if v != 0})


def radon_kernel(l: int, d: int, m: int) -> KernelPolynomial:
    """Exact coefficient table of the m-th s-derivative of the Gegenbauer Radon kernel.

    The kernel is C_l^lam(s/r) (1 - s^2/r^2)^((d-3)/2) with lam = d/2 - 1.
    """
    if d % 2 == 0 or d < 3:
        raise PreconditionError("Gegenbauer kernel requires odd dimension d >= 3")
    if l < 0 or m < 0:
        raise ValueError("l and m must be non-negative")
    if m > (d + 1) // 2 + l:
        raise ValueError("derivative order exceeds (d+1)/2 + l")
    lam = Fraction(d - 2, 2)
    poly = gegenbauer_coeffs(l, lam)
    weight = [Fraction(1)]
    for _ in range((d - 3) // 2):
        weight = _poly_mul(weight, [Fraction(1), Fraction(0), Fraction(-1)])
    x_poly = _poly_mul(poly, weight)
    kern = KernelPolynomial(l, d, 0, {(n, n): c for n, c in enumerate(x_poly) if c != 0})
    for _ in range(m):
        kern = kern.derivative()
    return kern


def laplacian_powerlog(alpha, p: int, l: int, d: int, r):
    """Radial part of the Laplacian of log(r)^p r^alpha Y_l for a degree-l harmonic Y_l.

    Returns the profile multiplying Y_l.
    """
    r = np.asarray(r, dtype=float)
    lg = np.log(r)
    ll = l * (l + d - 2)

    def lp(q):
        return lg**q if q >= 0 else np.zeros_like(r)

    bracket = (alpha * (alpha + d - 2) - ll) * lp(p)
    if p >= 1:
        bracket = bracket + p * (2 * alpha + d - 2) * lp(p - 1)
    if p >= 2:
        bracket = bracket + p * (p - 1) * lp(p - 2)
    return r ** (alpha - 2) * bracket
