import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wavecone._quad import gauss_legendre
from wavecone.errors import PreconditionError
from wavecone.specfun import (
    gamma_half,
    gegenbauer_at_one,
    gegenbauer_coeffs,
    gegenbauer_eval,
    gegenbauer_weighted_norm,
    laplacian_powerlog,
    radon_kernel,
    sphere_area,
)

LAMBDAS = [Fraction(1, 2), Fraction(1), Fraction(3, 2), Fraction(2)]


@pytest.mark.parametrize(
    "l, lam, t, expected",
    [(0, 0.5, 0.3, 1.0), (1, 2.0, 0.25, 1.0), (2, 1.0, 0.5, 0.0)],
)
def test_gegenbauer_eval_oracles(l, lam, t, expected):
    assert gegenbauer_eval(l, lam, t) == pytest.approx(expected, abs=1e-15)


def test_weighted_norm_oracles():
    assert gegenbauer_weighted_norm(0, Fraction(1, 2)) == pytest.approx(2.0, rel=1e-15)
    assert gegenbauer_weighted_norm(1, Fraction(1, 2)) == pytest.approx(2 / 3, rel=1e-15)


@pytest.mark.parametrize("lam", LAMBDAS)
@pytest.mark.parametrize("l", [0, 1, 3, 6, 8])
def test_weighted_norm_matches_quadrature(l, lam):
    # substitute t = sin(theta) to remove the endpoint singularity of the weight
    x, w = gauss_legendre(200)
    theta = x * math.pi / 2
    t = np.sin(theta)
    integrand = gegenbauer_eval(l, lam, t) ** 2 * np.cos(theta) ** (2 * float(lam) - 1) * np.cos(theta)
    quad = float(np.sum(integrand * w) * math.pi / 2)
    assert quad == pytest.approx(gegenbauer_weighted_norm(l, lam), rel=1e-10)


@pytest.mark.parametrize("lam", LAMBDAS)
def test_recurrence_matches_exact_coefficients(lam):
    t = np.linspace(-1, 1, 41)
    for l in range(13):
        c = [float(x) for x in gegenbauer_coeffs(l, lam)]
        exact = np.polyval(c[::-1], t)
        rec = gegenbauer_eval(l, lam, t)
        assert np.max(np.abs(rec - exact)) <= 1e-12 * max(1.0, np.max(np.abs(exact)))


@pytest.mark.parametrize("lam", LAMBDAS)
def test_orthogonality(lam):
    x, w = gauss_legendre(200)
    theta = x * math.pi / 2
    t = np.sin(theta)
    weight = np.cos(theta) ** (2 * float(lam)) * w * math.pi / 2
    for l in range(9):
        for m in range(l):
            val = np.sum(gegenbauer_eval(l, lam, t) * gegenbauer_eval(m, lam, t) * weight)
            assert abs(val) <= 1e-10


@pytest.mark.parametrize("lam", LAMBDAS)
def test_parity_on_coefficient_table(lam):
    for l in range(10):
        c = gegenbauer_coeffs(l, lam)
        for k, ck in enumerate(c):
            if (k - l) % 2:
                assert ck == 0


def test_value_at_one():
    # C_l^lam(1) = (2 lam)_l / l!
    for lam in LAMBDAS:
        for l in range(8):
            poch = Fraction(1)
            for k in range(l):
                poch *= 2 * lam + k
            assert gegenbauer_at_one(l, lam) == poch / math.factorial(l)


def test_kernel_oracles():
    k = radon_kernel(0, 3, 0)
    assert k(np.array([0.3, 2.0]), np.array([1.0, 5.0])) == pytest.approx([1.0, 1.0])
    assert radon_kernel(0, 3, 1).coeffs == {}
    s, r = np.array([0.2, -0.7, 1.3]), np.array([1.0, 2.0, 1.5])
    assert radon_kernel(1, 5, 0)(s, r) == pytest.approx(3 * s / r - 3 * s**3 / r**3, rel=1e-14)


@pytest.mark.parametrize("d", [3, 5, 7])
@pytest.mark.parametrize("l", range(6))
def test_kernel_degree(l, d):
    assert radon_kernel(l, d, 0).s_degree == l + d - 3


def test_kernel_even_dimension_rejected():
    with pytest.raises(PreconditionError):
        radon_kernel(0, 4, 0)


def test_gamma_and_sphere():
    assert gamma_half(Fraction(1, 2)) == pytest.approx(math.sqrt(math.pi))
    assert gamma_half(5) == 24.0
    with pytest.raises(PreconditionError):
        gamma_half(Fraction(1, 3))
    assert sphere_area(1) == pytest.approx(2 * math.pi)
    assert sphere_area(2) == pytest.approx(4 * math.pi)


@given(
    l=st.integers(0, 8),
    lam=st.sampled_from(LAMBDAS),
    t=st.floats(-1, 1),
)
def test_parity_property(l, lam, t):
    a = gegenbauer_eval(l, lam, -t)
    b = (-1) ** l * gegenbauer_eval(l, lam, t)
    assert a == pytest.approx(b, abs=1e-12 * max(1.0, abs(b)))


@given(
    alpha=st.floats(-4, 3),
    p=st.integers(0, 2),
    l=st.integers(0, 3),
    d=st.integers(2, 5),
)
def test_laplacian_powerlog_matches_fd(alpha, p, l, d):
    from wavecone.evolve import fd_channel_laplacian

    r = np.linspace(0.8, 2.0, 1201)
    w = np.log(r) ** p * r**alpha
    fd = fd_channel_laplacian(w, r, d, l)[2:-2]
    ex = laplacian_powerlog(alpha, p, l, d, r)[2:-2]
    # relative to the size of the individual terms, since they may cancel exactly
    terms = laplacian_powerlog(alpha, p, 0, 1, r) + l * (l + d - 2) * np.abs(w) / r**2
    scale = max(np.max(np.abs(ex)), np.max(np.abs(terms[2:-2])), 1e-3)
    assert np.max(np.abs(fd - ex)) <= 1e-6 * scale
