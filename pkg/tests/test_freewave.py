import numpy as np
import pytest

from hyperwave.freewave import (
    FreeWave1p1State,
    cfl_bound,
    dalembert_pulse,
    free_wave_1p1_evolve,
)


def _run(N=128, center=-0.6, width=0.08, T0=-1.0, T1=-0.1, ds=None):
    w, wT, _ = dalembert_pulse(center, width)
    return free_wave_1p1_evolve(FreeWave1p1State.from_functions(T0, N, w, wT), T1, ds)


def test_zero_data():
    run = free_wave_1p1_evolve(FreeWave1p1State(-1.0, 32, np.zeros(32), np.zeros(32)), -0.5)
    assert np.all(run.energy == 0) and np.all(run.flux == 0)


def test_state_odd_at_origin():
    w, wT, _ = dalembert_pulse()
    s = FreeWave1p1State.from_functions(-1.0, 32, w, wT)
    assert s.R[0] == pytest.approx(1.0) and s.R[-1] > 0
    assert w(-1.0, 0.0) == 0.0
    with pytest.raises(ValueError):
        FreeWave1p1State(0.5, 4, np.zeros(4), np.zeros(4))


def test_energy_monotone_and_phases():
    run = _run()
    assert np.max(run.energy_increments()) <= 1e-10
    # the incoming half of F(T+R) - F(T-R) reaches R = -T near T = center/2 = -0.3;
    # before that the energy is constant, afterwards it drains through the boundary
    early = run.T <= -0.45
    assert np.ptp(run.energy[early]) <= 1e-10 * run.energy[0]
    assert run.energy[-1] < 0.01 * run.energy[0]
    late = (run.T > -0.32) & (run.T < -0.28)
    assert np.all(np.diff(run.energy[late]) < 0)


def test_flux_matches_exact():
    _, _, dF = dalembert_pulse()
    run = _run()
    exact = -2.0 * dF(2 * run.T) ** 2
    assert np.max(np.abs(run.flux - exact)) <= 1e-6 * np.max(np.abs(exact))


def test_flux_second_order():
    runs = [_run(ds=d) for d in (4e-4, 2e-4)]
    m = [np.max(np.abs(r.flux_mismatch())) for r in runs]
    assert m[0] / m[1] == pytest.approx(4.0, rel=0.1)


def test_iteration_protocol():
    hist, flux = _run(N=32, T1=-0.9)
    assert hist.shape[1] == 2 and flux.shape == hist.shape


def test_cfl_and_direction():
    w, wT, _ = dalembert_pulse()
    s = FreeWave1p1State.from_functions(-1.0, 32, w, wT)
    with pytest.raises(ValueError):
        free_wave_1p1_evolve(s, -0.5, ds=2 * cfl_bound(32))
    with pytest.raises(ValueError):
        free_wave_1p1_evolve(s, -2.0)
