import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wavecone.errors import ConfigError, PreconditionError, ResolutionError
from wavecone.evolve import (
    SolverConfig,
    dalembert3d,
    discrete_energy,
    measure_exterior,
    radial_weights,
    radiation_error,
    richardson_limit,
    snapshots_to_csv,
    solve_field,
    solve_radial,
    thread_count,
)
from wavecone.fields import Bump, Field, Gaussian, RadialGrid, WaveData, gaussian_pair
from wavecone.transform import radiation_field

W0, W1 = Gaussian(0, 0.5), Gaussian(0, 0.7, 0.5)


def _run(d, l, n=2048, r_max=32.0, t_max=10.0, times=(5.0,), w0=None, w1=None):
    return solve_radial(w0, w1, SolverConfig(d, l, RadialGrid(r_max, n), t_max, times))


def test_zero_data_zero_snapshots():
    snaps = _run(3, 1, n=256, t_max=2.0, times=())
    assert all(np.all(s.v == 0) and np.all(s.vt == 0) for s in snaps)


def test_initial_snapshot_is_data():
    w0 = Bump(2, 0.5, 3.0)
    snaps = _run(5, 2, n=512, t_max=1.0, times=(), w0=w0)
    assert snaps[0].t == 0.0
    ref = w0.value(snaps[0].r)
    assert np.max(np.abs(snaps[0].v - ref)) <= 1e-14 * np.max(np.abs(ref))


def test_dalembert_and_order():
    errs = []
    for n in (512, 1024, 2048):
        snaps = _run(3, 0, n=n, w0=W0, w1=W1)
        errs.append(max(np.max(np.abs(s.v - dalembert3d(W0, W1, s.t, s.r))) for s in snaps))
    assert errs[-1] <= 1e-4
    assert math.log2(errs[1] / errs[2]) >= 3.5


def test_dalembert_derivatives():
    r = np.linspace(0.1, 12, 300)
    t, h = 3.0, 1e-4
    v, vt, vr = dalembert3d(W0, W1, t, r, derivatives=True)
    fd_t = (dalembert3d(W0, W1, t + h, r) - dalembert3d(W0, W1, t - h, r)) / (2 * h)
    assert np.max(np.abs(vt - fd_t)) <= 1e-6
    assert np.array_equal(v, dalembert3d(W0, W1, t, r))
    assert dalembert3d(W0, W1, 0.0, r) == pytest.approx(W0.value(r), abs=1e-14)


@pytest.mark.parametrize("d, l", [(2, 0), (2, 1), (3, 0), (3, 2), (4, 1), (5, 0), (5, 3)])
def test_energy_conservation(d, l):
    snaps = _run(d, l, n=4096, r_max=24.0, t_max=10.0, w0=Bump(l, 0.0, 6.0), w1=Bump(l, 0.0, 5.0, 0.3))
    E = discrete_energy(snaps)
    assert np.max(np.abs(E / E[0] - 1)) <= 1e-6


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_finite_speed(d):
    g = RadialGrid(24.0, 2048)
    supp = 4.0
    snaps = solve_radial(Bump(0, 0.0, supp), None, SolverConfig(d, 0, g, 8.0, (4.0,)))
    for s in snaps[1:]:
        m = np.abs(s.v) ** 2 * s.r ** (d - 1)
        out = s.r > supp + s.t + 3 * g.h
        assert np.sum(m[out]) <= 1e-8 * np.sum(m)


@pytest.mark.parametrize("d", [3, 5])
def test_strong_huygens(d):
    from wavecone.evolve import _densities

    g = RadialGrid(32.0, 4096)
    supp = 4.0
    snaps = solve_radial(Bump(0, 0.0, supp), Bump(0, 0.0, 3.0, 0.3), SolverConfig(d, 0, g, 20.0, (10.0,)))
    for s in snaps[1:]:
        gd, dd, _ = _densities(s)
        tot = gd + dd
        inside = s.r < s.t - supp - 3 * g.h
        assert np.sum(tot[inside]) <= 1e-6 * np.sum(tot)


def test_boundary_reach_detected():
    with pytest.raises(PreconditionError, match="outer boundary"):
        solve_radial(Bump(0, 0.0, 2.0), None, SolverConfig(3, 0, RadialGrid(6.0, 512), 8.0))


def test_solver_config_gates():
    with pytest.raises(ConfigError):
        SolverConfig(3, 0, RadialGrid(10.0, 100), 1.0, cfl=0.9)
    with pytest.raises(PreconditionError):
        SolverConfig(3, 0, RadialGrid(10.0, 100), 9.0, support=2.0)
    cfg = SolverConfig(3, 0, RadialGrid(10.0, 100), 4.0, (1.0, 9.0, 2.0))
    assert cfg.times == (0.0, 1.0, 2.0, 4.0)


def test_thread_count(monkeypatch):
    monkeypatch.setenv("WAVECONE_THREADS", "3")
    assert thread_count() == 3
    monkeypatch.setenv("WAVECONE_THREADS", "0")
    with pytest.raises(ConfigError):
        thread_count()
    monkeypatch.delenv("WAVECONE_THREADS")
    assert thread_count() == 1


def test_threads_do_not_change_results(monkeypatch):
    d = 3
    u = WaveData(Field(d, (gaussian_pair(d, 0, 0.6), gaussian_pair(d, 1, 0.5), gaussian_pair(d, 2, 0.5))), Field(d))
    grid = RadialGrid(16.0, 512)
    monkeypatch.setenv("WAVECONE_THREADS", "1")
    a = snapshots_to_csv(solve_field(u, grid, 4.0, (2.0,)))
    monkeypatch.setenv("WAVECONE_THREADS", "3")
    b = snapshots_to_csv(solve_field(u, grid, 4.0, (2.0,)))
    assert a == b


def test_measure_exterior():
    snaps = _run(3, 0, n=2048, r_max=24.0, t_max=4.0, times=(2.0,), w0=W0, w1=W1)
    assert measure_exterior(snaps, 100.0) == [(s.t, 0.0) for s in snaps]
    series = measure_exterior(snaps, -50.0, "energy")
    E = discrete_energy(snaps)
    assert [v for _, v in series] == pytest.approx(list(E), rel=1e-6)
    with pytest.raises(ConfigError):
        measure_exterior(snaps, 0.0, "momentum")


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_radial_weights_exact_for_smooth_even_densities(d):
    r = RadialGrid(12.0, 1200).r
    w = radial_weights(r, d)
    f = np.exp(-(r**2))
    exact = math.gamma(d / 2) / 2
    assert np.sum(w * f) == pytest.approx(exact, rel=1e-10)


def test_radiation_error_sanity():
    d = 3
    u = WaveData(Field(d, (gaussian_pair(d, 0, 0.6),)), Field(d, (gaussian_pair(d, 0, 0.5, 0.4),)))
    h, _ = radiation_field(u, check=False)
    snaps = solve_field(u, RadialGrid(32.0, 2048), 20.0, ())
    s = snaps["l0"][-1]
    good = radiation_error(s, h["l0"])
    bad = radiation_error(s, h["l0"], scale=2.0)
    assert bad > 10 * good
    with pytest.raises(PreconditionError):
        radiation_error(snaps["l0"][0], h["l0"])
    coarse = solve_field(u, RadialGrid(32.0, 256), 20.0, ())["l0"][-1]
    with pytest.raises(ResolutionError):
        radiation_error(coarse, h["l0"])


@given(a=st.floats(0.5, 2), rate=st.floats(0.2, 0.8))
def test_richardson_geometric(a, rate):
    lim = 3.0
    vals = [lim + a * rate**k for k in range(3)]
    assert richardson_limit([1, 2, 3], vals) == pytest.approx(lim, rel=1e-10)


def test_csv_header_and_determinism():
    snaps = {"l0": _run(3, 0, n=64, r_max=8.0, t_max=0.5, times=(), w0=W0)}
    text = snapshots_to_csv(snaps)
    assert text.splitlines()[0] == "channel,t,r,re_v,im_v,re_vt,im_vt"
    assert text == snapshots_to_csv(snaps)
