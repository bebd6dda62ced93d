from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wavecone.energy import ext_energy_physical
from wavecone.errors import ConfigError, PreconditionError
from wavecone.fields import Bump, Field, HarmonicComponent, WaveData, gaussian_pair, h1_norm, l2_norm, rescale
from wavecone.kernelspaces import (
    KernelBasis,
    admissible_exponents,
    channel_identity_residual,
    eval_nonradiative,
    gram,
    gram_quadrature,
    kernel_vanishing,
    nonradiative_table,
    polynomial_image_fit,
    project,
    projection_norm_sq,
)


def _f(d, *comps):
    return Field(d, tuple(comps))


def _norm_sq(f, kind):
    return l2_norm(f) ** 2 if kind == "L2" else h1_norm(f) ** 2


def _inner(a, b, kind):
    # real inner product by polarisation
    return 0.25 * (_norm_sq(a + b, kind) - _norm_sq(a + b.scaled(-1.0), kind))


@pytest.mark.parametrize(
    "d, l, kind, expected",
    [(3, 0, "L2", ()), (3, 0, "H1", (-1,)), (5, 0, "L2", (-3,)), (5, 0, "H1", (-3,))],
)
def test_exponent_oracles(d, l, kind, expected):
    assert admissible_exponents(d, l, kind).exponents == expected


def test_even_dimension_rejected():
    with pytest.raises(PreconditionError):
        admissible_exponents(4, 0, "L2")


@given(d=st.sampled_from([3, 5, 7, 9]), l=st.integers(0, 6), kind=st.sampled_from(["L2", "H1"]))
def test_exponents_in_space(d, l, kind):
    bound = -d / 2 if kind == "L2" else 1 - d / 2
    ex = admissible_exponents(d, l, kind).exponents
    assert all(a < bound for a in ex)
    assert all(a == -l - d + 2 * (k + 1) for k, a in enumerate(ex))


@pytest.mark.parametrize("d", [5, 7, 9])
@pytest.mark.parametrize("kind", ["L2", "H1"])
@pytest.mark.parametrize("l", [0, 2])
def test_gram_closed_matches_quadrature(d, l, kind):
    basis = KernelBasis.build(d, l, 1.3, kind)
    if len(basis) == 0:
        pytest.skip("empty ladder")
    G = gram(basis)
    Q = gram_quadrature(basis)
    assert np.max(np.abs(G - Q)) <= 1e-9 * np.max(np.abs(G))
    assert np.all(np.linalg.eigvalsh(G) > 0)


def test_gram_conditioning_gate():
    basis = KernelBasis.build(9, 0, 1.0, "L2")
    with pytest.raises(PreconditionError, match="ill-conditioned"):
        gram(basis, cond_max=1.0)


def test_compact_data_inside_ball_is_its_own_projection():
    u = _f(5, HarmonicComponent(1, Bump(1, 0.2, 0.9)))
    proj, res, rep = project(u, 1.0, "L2")
    assert rep.norm_sq == pytest.approx(l2_norm(u) ** 2, rel=1e-12)
    assert l2_norm(res) <= 1e-12 * l2_norm(u)


@pytest.mark.parametrize("kind", ["L2", "H1"])
def test_basis_member_projects_to_itself(kind):
    basis = KernelBasis.build(7, 1, 1.5, kind)
    u = _f(7, basis.members()[-1])
    _, res, rep = project(u, 1.5, kind)
    assert _norm_sq(res, kind) <= 1e-20 * _norm_sq(u, kind) + 1e-30
    assert rep.norm_sq == pytest.approx(_norm_sq(u, kind), rel=1e-10)


@given(R=st.sampled_from([0.5, 1.0, 2.0]), sigma=st.floats(0.5, 1.5), l=st.integers(0, 2), kind=st.sampled_from(["L2", "H1"]))
def test_orthogonal_decomposition(R, sigma, l, kind):
    d = 5
    u = _f(d, gaussian_pair(d, l, sigma), gaussian_pair(d, l + 1, sigma * 0.8, 0.5))
    proj, res, rep = project(u, R, kind)
    total = _norm_sq(u, kind)
    assert abs(total - rep.norm_sq - _norm_sq(res, kind)) <= 1e-10 * total
    assert abs(_inner(proj, res, kind)) <= 1e-10 * total


@pytest.mark.parametrize("kind", ["L2", "H1"])
def test_projection_self_adjoint(kind):
    d, R = 5, 1.0
    u = _f(d, gaussian_pair(d, 0, 0.9), gaussian_pair(d, 1, 1.2, 0.4))
    v = _f(d, gaussian_pair(d, 0, 1.4, -0.7), gaussian_pair(d, 1, 0.6))
    pu, _, _ = project(u, R, kind)
    pv, _, _ = project(v, R, kind)
    scale = np.sqrt(_norm_sq(u, kind) * _norm_sq(v, kind))
    assert abs(_inner(pu, v, kind) - _inner(u, pv, kind)) <= 1e-10 * scale


@pytest.mark.parametrize("kind, power", [("L2", 0), ("H1", 2)])
def test_projection_scaling_covariance(kind, power):
    d, R = 5, 1.7
    u = _f(d, gaussian_pair(d, 0, 0.9), gaussian_pair(d, 2, 1.2, 0.4))
    _, _, rep_R = project(u, R, kind)
    _, _, rep_1 = project(rescale(u, R), 1.0, kind)
    assert rep_R.norm_sq == pytest.approx(R ** (d - power) * rep_1.norm_sq, rel=1e-10)


def test_nonradiative_data_has_zero_exterior_energy():
    d, l, R = 5, 1, 1.0
    f = KernelBasis.build(d, l, R, "H1").members()[0]
    g = KernelBasis.build(d, l, R, "L2").members()[0]
    u = WaveData(_f(d, f), _f(d, g))
    assert ext_energy_physical(u, R) <= 1e-16 * (h1_norm(u.u0) ** 2 + l2_norm(u.u1) ** 2)
    assert channel_identity_residual(u, R) <= 1e-8


def test_compact_data_inside_ball_channel_identity():
    d, R = 3, 2.0
    u = WaveData(_f(d, HarmonicComponent(0, Bump(0, 0.0, 1.5))), _f(d, HarmonicComponent(1, Bump(1, 0.3, 1.8))))
    assert ext_energy_physical(u, R) <= 1e-20
    full = h1_norm(u.u0) ** 2 + l2_norm(u.u1) ** 2
    assert projection_norm_sq(u, R) == pytest.approx(full, rel=1e-10)
    assert channel_identity_residual(u, R) <= 1e-8


@given(seed=st.integers(0, 10_000), d=st.sampled_from([3, 5]))
def test_channel_identity_random(seed, d):
    rng = np.random.default_rng(seed)
    comps0 = [gaussian_pair(d, int(l), float(rng.uniform(0.5, 1.5)), complex(rng.normal(), rng.normal())) for l in rng.choice(4, 2, replace=False)]
    comps1 = [gaussian_pair(d, int(rng.integers(0, 4)), float(rng.uniform(0.5, 1.5)), float(rng.normal()))]
    u = WaveData(Field(d, tuple(comps0)), Field(d, tuple(comps1)))
    assert channel_identity_residual(u, 1.0) <= 1e-6


@pytest.mark.parametrize("d", [3, 5])
@pytest.mark.parametrize("l", range(5))
def test_kernel_vanishing_and_polynomial_image(d, l):
    assert all(r["relative"] <= 1e-8 for r in kernel_vanishing(d, l, 1.0))
    assert all(r["residual"] <= 1e-6 for r in polynomial_image_fit(d, l, 1.0))


def test_table_d3_l0():
    t = nonradiative_table(3, 0, 3)
    assert [[int(x) for x in row] for row in t.A] == [[1], [1, 1], [1, 6, 1], [1, 15, 15, 1]]
    assert all(isinstance(x, Fraction) for row in t.A for x in row)


def test_table_bounds():
    t = nonradiative_table(5, 1, 2)
    with pytest.raises(ConfigError):
        eval_nonradiative(1.0, 2.0, t, 3)
    with pytest.raises(PreconditionError):
        nonradiative_table(4, 0, 1)


@given(d=st.sampled_from([3, 5, 7]), l=st.integers(0, 3), k=st.integers(0, 3))
def test_table_solves_wave_equation(d, l, k):
    # v_tt = v_rr + (d-1)/r v_r - l(l+d-2)/r^2 v, checked by central differences
    table = nonradiative_table(d, l, 3)
    t0, r0, h = 0.7, 2.3, 1e-3
    v = lambda t, r: eval_nonradiative(t, r, table, k)  # noqa: E731
    vtt = (v(t0 + h, r0) - 2 * v(t0, r0) + v(t0 - h, r0)) / h**2
    vrr = (v(t0, r0 + h) - 2 * v(t0, r0) + v(t0, r0 - h)) / h**2
    vr = (v(t0, r0 + h) - v(t0, r0 - h)) / (2 * h)
    lap = vrr + (d - 1) / r0 * vr - l * (l + d - 2) / r0**2 * v(t0, r0)
    scale = max(abs(vrr), abs(vtt), abs((d - 1) / r0 * vr), 1e-12)
    assert abs(vtt - lap) <= 1e-5 * scale
