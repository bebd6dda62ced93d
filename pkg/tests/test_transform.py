import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wavecone.errors import PreconditionError, ResolutionError
from wavecone.fields import Bump, Dimension, Field, Gaussian, GridProfile, HarmonicComponent, WaveData, gaussian_pair, h1_norm, l2_norm
from wavecone.specfun import gegenbauer_weighted_norm
from wavecone.transform import (
    FreqGrid,
    RadonProfile,
    constant_audit,
    ds_t_op,
    half_wave_profiles,
    hilbert,
    radiation_field,
    radon_direct_oracle,
    radon_l,
    radon_l_frequency,
    radon_l_star,
    radon_moments,
    radon_prefactor,
    ray_trace,
    t_op,
    t_op_physical,
)

GRID = FreqGrid(32 * math.pi, 1 << 14)
# even d: T decays only like |s|^(-d/2) so the isometry needs the longer default period
FULL = FreqGrid()


def _f(d, *comps):
    return Field(d, tuple(comps))


def _norm(profiles):
    return math.sqrt(sum(p.norm_sq() for p in profiles.values()))


def test_half_waves_with_zero_velocity():
    u0 = _f(3, gaussian_pair(3, 1, 1.0))
    f, g = half_wave_profiles(WaveData(u0, Field(3)))
    nu = np.linspace(0, 8, 50)
    a = u0.components[0].profile.spectrum(nu, 3)
    for h in (f, g):
        assert np.max(np.abs(h.components[0].profile.spectrum(nu, 3) - a / 2)) <= 1e-15


def test_half_waves_with_zero_position():
    u1 = _f(3, gaussian_pair(3, 0, 1.0))
    f, g = half_wave_profiles(WaveData(Field(3), u1))
    nu = np.linspace(0.01, 8, 50)
    a = f.components[0].profile.spectrum(nu, 3)
    b = g.components[0].profile.spectrum(nu, 3)
    assert np.max(np.abs(a + b)) <= 1e-15


def test_velocity_outside_range_of_D_rejected():
    with pytest.raises(PreconditionError, match="range of"):
        half_wave_profiles(WaveData(Field(2), _f(2, gaussian_pair(2, 0, 1.0))))


def test_unresolved_spectrum_detected():
    with pytest.raises(ResolutionError):
        t_op(_f(3, gaussian_pair(3, 0, 0.2)), FreqGrid(5.0, 1024))


def test_zero_field_zero_profile():
    p = t_op(_f(3, gaussian_pair(3, 0, 1.0, 0.0)), GRID)
    assert np.all(p["l0"].values == 0)


def test_isometry_gaussian_d3():
    f = _f(3, gaussian_pair(3, 0, 1.0))
    assert _norm(t_op(f, GRID)) == pytest.approx(l2_norm(f), rel=1e-6)


@given(
    d=st.integers(2, 5),
    l=st.integers(0, 3),
    s1=st.floats(0.6, 1.5),
    s2=st.floats(0.6, 1.5),
    a2=st.floats(-2, 2),
)
def test_isometry_mixtures(d, l, s1, s2, a2):
    f = _f(d, gaussian_pair(d, l, s1), gaussian_pair(d, l, s2, a2, "second"), gaussian_pair(d, (l + 1) % 4, s2))
    assert _norm(t_op(f, FULL)) == pytest.approx(l2_norm(f), rel=1e-6)
    assert _norm(ds_t_op(f, FULL)) == pytest.approx(h1_norm(f), rel=1e-6)


def test_ray_trace_recombines_to_T():
    d = 5
    f = _f(d, gaussian_pair(d, 2, 0.8))
    dim = Dimension(d)
    fm, fp = ray_trace(f, -1, GRID)["l2"], ray_trace(f, +1, GRID)["l2"]
    T = t_op(f, GRID)["l2"]
    comb = dim.c0 * (np.exp(1j * dim.tau) * fm.values + np.exp(-1j * dim.tau) * fp.values)
    assert np.max(np.abs(comb - T.values)) <= 1e-12 * np.max(np.abs(T.values))


@pytest.mark.parametrize("d", [3, 5])
@pytest.mark.parametrize("l", range(4))
def test_parity_tags(d, l):
    T = t_op(_f(d, gaussian_pair(d, l, 1.0)), GRID)[f"l{l}"]
    assert T.parity_defect() <= 1e-12


def test_radiation_field_routes_agree():
    d = 3
    u = WaveData(_f(d, gaussian_pair(d, 0, 0.8), gaussian_pair(d, 1, 0.6)), _f(d, gaussian_pair(d, 0, 0.5, 0.3)))
    h, defect = radiation_field(u, GRID)
    assert defect <= 1e-8
    assert set(h) == {"l0", "l1"}


def test_radon_gaussian_at_zero():
    assert radon_l(Gaussian(0, 1.0), 0, 3, np.array([0.0])).values[0] == pytest.approx(2 * math.pi, rel=1e-9)


def test_radon_beyond_support():
    vals = radon_l(Bump(0, 0.5, 2.0), 0, 3, np.array([2.0, 2.5, -3.0])).values
    assert np.max(np.abs(vals)) == 0.0


def test_radon_direct_oracle_d3():
    s = np.array([0.0, 0.4, 1.1, 2.0])
    for l in (0, 1, 2):
        g = Gaussian(l, 0.9)
        from wavecone.transform import zonal_pole_value

        direct = radon_direct_oracle(g, s, l) / zonal_pole_value(l)
        ours = radon_l(g, l, 3, s).values
        assert np.max(np.abs(direct - ours)) <= 1e-6 * np.max(np.abs(ours))


def test_constant_audit_keys():
    audit = constant_audit()
    assert audit["prefactor_d-2_rel_error"] <= 1e-6
    assert audit["prefactor_d-1_rel_error"] > 0.1
    assert audit["inversion_kappa_over_c0_sq"] == pytest.approx(1.0, rel=1e-6)


def test_prefactor_even_dimension_rejected_on_physical_path():
    with pytest.raises(PreconditionError, match="physical path requires odd dimension"):
        t_op_physical(Gaussian(0), 0, 4, np.array([0.0]))


@pytest.mark.parametrize("d", [3, 5])
def test_dual_constant_input(d):
    r = np.array([0.5, 1.0, 3.0])
    out = radon_l_star(lambda s: np.ones_like(s), 0, d, r)
    from fractions import Fraction

    lam = Fraction(d - 2, 2)
    expected = radon_prefactor(0, d) * gegenbauer_weighted_norm(0, lam) if d == 3 else None
    if expected is not None:
        assert out == pytest.approx(expected, rel=1e-12)
    assert np.ptp(out) <= 1e-12 * abs(out[0])


def test_dual_wrong_parity_vanishes():
    r = np.linspace(0.2, 3, 7)
    out = radon_l_star(lambda s: np.exp(-(s**2)), 1, 3, r)
    assert np.max(np.abs(out)) <= 1e-10


def test_hilbert_cos_to_sin():
    n = 256
    s = -math.pi + 2 * math.pi * np.arange(n) / n
    p = RadonProfile(s, np.cos(s).astype(complex), 0, periodic=True)
    out = hilbert(p)
    assert np.max(np.abs(out.values[2:-2] - np.sin(s[2:-2]))) <= 1e-8


@given(d=st.sampled_from([3, 5]), l=st.integers(0, 3), sigma=st.floats(0.6, 1.6))
def test_path_agreement(d, l, sigma):
    comp = gaussian_pair(d, l, sigma)
    T = t_op(_f(d, comp), GRID)[comp.key]
    idx = np.arange(GRID.index_of(-6.0), GRID.index_of(6.0) + 1, 8)
    P = t_op_physical(comp, l, d, GRID.s[idx]).values
    assert np.max(np.abs(P - T.values[idx])) <= 1e-4 * np.max(np.abs(T.values))


@given(d=st.sampled_from([3, 5]), l=st.integers(1, 4), sigma=st.floats(0.6, 1.6))
def test_moment_conditions(d, l, sigma):
    prof = radon_l_frequency(_f(d, gaussian_pair(d, l, sigma)), GRID)[f"l{l}"]
    mom = radon_moments(prof, l - 1, s_max=24.0)
    assert np.max(np.abs(mom)) <= 1e-8


def test_locality():
    d, R = 3, 1.5
    base = Gaussian(1, 1.0)
    a = HarmonicComponent(1, base)
    s = np.concatenate([-np.linspace(5, R + 1e-9, 40), np.linspace(R + 1e-9, 5, 40)])
    ta = t_op_physical(a, 1, d, s).values
    from wavecone.fields import Channel

    both = Channel("l1", 1, (base, Bump(1, 0.2, R)))
    tb = t_op_physical(both, 1, d, s).values
    assert np.max(np.abs(ta - tb)) <= 1e-9 * np.max(np.abs(ta))


def test_intertwining_laplacian():
    # T(Delta u) = ds^2 T u for the d = 3, l = 1 Gaussian channel
    d, l = 3, 1
    g = Gaussian(l, 1.0)
    r = np.linspace(1e-4, g.r_end, 6001)
    lap = (r**2 - (2 * l + d)) * g.value(r)
    lap_prof = GridProfile(r, lap, l)
    s = GRID.s[GRID.index_of(-4.0) : GRID.index_of(4.0) + 1 : 16]
    lhs = t_op_physical(lap_prof, l, d, s).values
    T = t_op(_f(d, HarmonicComponent(l, g)), GRID)[f"l{l}"]
    v = T.values
    h = GRID.ds
    d2 = (-np.roll(v, 2) + 16 * np.roll(v, 1) - 30 * v + 16 * np.roll(v, -1) - np.roll(v, -2)) / (12 * h * h)
    rhs = d2[GRID.index_of(-4.0) : GRID.index_of(4.0) + 1 : 16]
    assert np.max(np.abs(lhs - rhs)) <= 1e-5 * np.max(np.abs(rhs))
