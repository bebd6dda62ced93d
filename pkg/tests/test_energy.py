import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wavecone.energy import (
    crossed_sides,
    ext_energy,
    ext_energy_even_closed_form,
    ext_energy_physical,
    ext_mass,
    half_line_integral,
    hankel_op,
    hilbert_hankel_sides,
    random_bandlimited,
)
from wavecone.fields import Field, WaveData, gaussian_pair, h1_norm, l2_norm
from wavecone.transform import FreqGrid, half_wave_profiles

GRID = FreqGrid(32 * math.pi, 1 << 14)


def _f(d, *comps):
    return Field(d, tuple(comps))


def _data(d, s0=0.8, s1=0.6, a1=0.5, l0=0, l1=1):
    return WaveData(_f(d, gaussian_pair(d, l0, s0), gaussian_pair(d, l1, s0, 0.3)), _f(d, gaussian_pair(d, l1, s1, a1)))


def _full(u):
    return h1_norm(u.u0) ** 2 + l2_norm(u.u1) ** 2


def test_half_line_integral_exact_for_gaussian():
    s = np.arange(-4000, 4000) * 0.01
    g = np.exp(-(s**2))
    for R in (0.0, 0.37, -1.005):
        from scipy.special import erfc

        exact = 0.5 * math.sqrt(math.pi) * erfc(R)
        assert half_line_integral(s, g, R).real == pytest.approx(exact, rel=1e-10)


def test_ext_mass_zero():
    z = _f(3, gaussian_pair(3, 0, 1.0, 0.0))
    assert ext_mass(z, z, 0.0, GRID) == 0.0


def test_ext_mass_large_negative_R_recovers_half_wave_mass():
    # u1 = 0 gives f = g = u0/2; the late-time mass is ||f||^2 + ||g||^2 = ||u0||^2 / 2
    u0 = _f(3, gaussian_pair(3, 0, 1.0), gaussian_pair(3, 2, 0.7))
    f, g = half_wave_profiles(WaveData(u0, Field(3)))
    assert ext_mass(f, g, -40.0, GRID) == pytest.approx(l2_norm(f, "frequency") ** 2 + l2_norm(g, "frequency") ** 2, rel=1e-4)
    assert ext_mass(f, g, -40.0, GRID) == pytest.approx(0.5 * l2_norm(u0) ** 2, rel=1e-4)


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_ext_energy_large_negative_R(d):
    u = _data(d)
    assert ext_energy(u, -40.0, FreqGrid()).E_ext == pytest.approx(_full(u), rel=1e-4)


@given(d=st.sampled_from([3, 5]), s0=st.floats(0.5, 1.5), s1=st.floats(0.5, 1.5), a1=st.floats(-2, 2), l=st.integers(0, 3))
def test_odd_R0_exact(d, s0, s1, a1, l):
    u = _data(d, s0, s1, a1, l, (l + 1) % 4)
    assert abs(ext_energy(u, 0.0, GRID).E_ext - 0.5 * _full(u)) <= 1e-8 * _full(u)


@given(d=st.integers(2, 5), R=st.floats(-2, 3), a1=st.floats(-2, 2))
def test_splitting(d, R, a1):
    u = _data(d, a1=a1, l1=0)
    grid = FreqGrid()
    E = ext_energy(u, R, grid).E_ext
    E0 = ext_energy(WaveData(u.u0, Field(d)), R, grid).E_ext
    E1 = ext_energy(WaveData(Field(d), u.u1), R, grid).E_ext
    assert abs(E - E0 - E1) <= 1e-8 * max(E, 1e-12)


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_monotone_in_R(d):
    u = _data(d)
    vals = [ext_energy(u, R, FreqGrid()).E_ext for R in np.linspace(-3, 5, 17)]
    assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))


def test_report_fields_and_json():
    rep = ext_energy(_data(3), 0.5, GRID)
    assert rep.method == "formula"
    assert rep.forward_grad_limit == rep.forward_dt_limit
    assert rep.backward_grad_limit == rep.backward_dt_limit
    assert rep.E_ext == pytest.approx(0.5 * (rep.forward_grad_limit * 2 + rep.backward_grad_limit * 2), rel=1e-8)
    assert json.loads(rep.to_json())["R"] == 0.5
    assert rep.to_json() == ext_energy(_data(3), 0.5, GRID).to_json()


def test_physical_route_matches_formula():
    u = _data(5)
    for R in (0.0, 0.7, 2.0):
        assert ext_energy_physical(u, R) == pytest.approx(ext_energy(u, R, GRID).E_ext, rel=1e-9)


@pytest.mark.parametrize("d", [2, 4])
def test_even_closed_form_matches_formula(d):
    u = _data(d, 0.6, 0.5, 0.4, 0, 0)
    E, fwd = ext_energy_even_closed_form(u)
    rep = ext_energy(u, 0.0)
    assert E == pytest.approx(rep.E_ext, rel=1e-4)
    assert fwd == pytest.approx(rep.forward_grad_limit, rel=1e-4)


def test_hankel_zero_and_indicator():
    s = np.array([0.1, 0.5, 1.0, 3.0])
    assert np.all(hankel_op(lambda r: np.zeros_like(r), s, r_end=1.0) == 0)
    ind = hankel_op(lambda r: np.ones_like(r), s, r_end=1.0)
    assert np.max(np.abs(ind - np.log((s + 1) / s))) <= 1e-12
    r = np.linspace(0, 1, 2001)
    lin = hankel_op(r, s, r=r)
    assert np.max(np.abs(lin - (1 - s * np.log((s + 1) / s)))) <= 1e-12


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_hilbert_hankel_identities(seed):
    rng = np.random.default_rng(seed)
    f, g = random_bandlimited(rng), random_bandlimited(rng)
    a = hilbert_hankel_sides(f)
    assert abs(a["lhs1"] - a["rhs1"]) <= 1e-6 * a["lhs1"]
    assert abs(a["lhs1"] - a["rhs1_hankel"]) <= 1e-6 * a["lhs1"]
    b = crossed_sides(f, g)
    assert abs(b["lhs2a"] - b["rhs2a"]) <= 1e-6 * abs(b["lhs2a"])


@given(seed=st.integers(0, 10_000))
def test_hankel_norm_bound(seed):
    rng = np.random.default_rng(seed)
    r = np.linspace(0, 6, 601)
    fv = rng.normal(size=r.size) * np.exp(-rng.uniform(0, 1) * r)
    s = np.concatenate([np.linspace(0, 8, 801)[1:], np.geomspace(8, 4000, 400)[1:]])
    Hf = hankel_op(fv, s, r=r)
    lhs = np.trapezoid(Hf**2, s)
    rhs = np.trapezoid(fv**2, r)
    assert lhs <= math.pi**2 * rhs
