import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hyperwave.evolution import (
    SQRT2,
    CoverageError,
    DegenerateWindowError,
    InstabilityError,
    NonlinearParams,
    Trajectory,
    cfl_bound,
    evolve_linear,
    evolve_nonlinear_radial,
    exact_family_va,
    fit_log_slope,
    measure_decay_rate,
    nonlinear_rhs,
    sigma_slice_norms,
    step_linear,
    step_nonlinear_radial,
    strichartz_c,
    strichartz_exponent,
    strichartz_norm,
    va_phi,
)
from hyperwave.geometry import DomainError
from hyperwave.spectral import ModeField, build_generator, energy_norm, grid, polynomial_field


def test_mode_reproduction(backend):
    N = 32
    g = grid(N)
    M0 = build_generator(0, g)
    tr = evolve_linear(ModeField(0, np.ones(N), 2 * np.ones(N)), M0, tau_end=1.0)
    expect = math.e * np.concatenate([np.ones(N), 2 * np.ones(N)])
    assert energy_norm(tr.states[-1] - expect, g, 0) <= 1e-8
    M1 = build_generator(1, g)
    y = np.concatenate([g.rho, 2 * g.rho])
    tr = evolve_linear(ModeField.from_vector(1, y), M1, tau_end=1.0)
    assert energy_norm(tr.states[-1] - y, g, 1) <= 1e-8
    tr = evolve_linear(ModeField.zeros(2, N), build_generator(2, g), tau_end=0.5)
    assert np.all(tr.states == 0)


def test_step_linear_matches_evolve():
    g = grid(16)
    M = build_generator(0, g)
    u = polynomial_field(0, g, np.random.default_rng(2))
    h = 0.5 * cfl_bound(M)
    one = step_linear(u, M, h)
    tr = evolve_linear(u, M, dtau=h, tau_end=h)
    np.testing.assert_allclose(one.vector, tr.states[-1], rtol=1e-12, atol=1e-14)
    with pytest.raises(ValueError):
        step_linear(u, M, 3 * cfl_bound(M))
    with pytest.raises(ValueError):
        step_linear(u, M, -1e-3)


def test_rk4_order():
    # global error on the v_a family at tau = 2 under halving of dtau
    N, a = 16, 0.05
    u0 = exact_family_va(a, 0.0, N)
    exact = exact_family_va(a, 2.0, N).vector
    errs = []
    for h in (0.04, 0.02, 0.01):
        tr = evolve_nonlinear_radial(u0, dtau=h, tau_end=2.0)
        errs.append(np.max(np.abs(tr.states[-1] - exact)))
    ratios = [errs[0] / errs[1], errs[1] / errs[2]]
    assert all(14 <= r <= 18 for r in ratios), ratios


def test_equilibria(backend):
    N = 24
    for c in (0.0, -SQRT2):
        u = ModeField(0, np.full(N, c), np.full(N, c))
        one = step_nonlinear_radial(u, 1e-3)
        assert np.max(np.abs(one.vector - u.vector)) <= 1e-12
        tr = evolve_nonlinear_radial(u, dtau=1e-3, tau_end=0.2)
        assert np.max(np.abs(tr.states - u.vector)) <= 1e-12 * 200


def test_va_family_examples():
    assert va_phi(0.0, 3.0) == (0.0, 0.0)
    p1, _ = va_phi(0.01, 0.0)
    assert p1 == pytest.approx(-SQRT2 * 0.01 / 1.01, rel=1e-15)
    p1, _ = va_phi(1e-9, 1.5)
    assert p1 / 1e-9 == pytest.approx(-SQRT2 * math.exp(1.5), rel=1e-8)
    with pytest.raises(DomainError):
        va_phi(-0.5, 1.0)


@given(st.floats(-0.3, 0.5), st.floats(0.0, 1.0))
def test_va_solves_system(a, tau):
    # phi2 = (d_tau + 1) phi1 and the u2 equation for constants:
    # d_tau phi2 = -2 phi2 + 6 phi1 + 3 sqrt2 phi1^2 + phi1^3
    h = 1e-4
    p1, p2 = va_phi(a, tau)
    d1 = (va_phi(a, tau + h)[0] - va_phi(a, tau - h)[0]) / (2 * h)
    d2 = (va_phi(a, tau + h)[1] - va_phi(a, tau - h)[1]) / (2 * h)
    assert p2 == pytest.approx(d1 + p1, rel=1e-6, abs=1e-9)
    rhs = -2 * p2 + 6 * p1 + 3 * SQRT2 * p1**2 + p1**3
    assert d2 == pytest.approx(rhs, rel=1e-6, abs=1e-8)


def test_va_evolution(backend):
    N = 48
    tr = evolve_nonlinear_radial(exact_family_va(0.01, 0.0, N), dtau=1e-3, tau_end=2.0)
    assert not tr.blown
    assert np.max(np.abs(tr.states[-1] - exact_family_va(0.01, 2.0, N).vector)) <= 1e-8


def test_blowup_flag():
    tr = evolve_nonlinear_radial(exact_family_va(-0.2, 0.0, 16), dtau=0.01, tau_end=5.0)
    assert tr.blown and tr.tau_blowup < math.log(5.0)
    out, blown = step_nonlinear_radial(ModeField(0, np.full(16, 20.0), np.zeros(16)), 1e-3, return_flag=True)
    assert blown
    with pytest.raises(ValueError):
        evolve_nonlinear_radial(ModeField.zeros(1, 16))


def test_nonlinear_rhs_params():
    M = build_generator(0, grid(16))
    x = np.concatenate([np.full(16, 0.1), np.zeros(16)])
    lin = nonlinear_rhs(x.copy(), M, NonlinearParams(0.0, 0.0))
    full = nonlinear_rhs(x.copy(), M)
    np.testing.assert_allclose(full[16:] - lin[16:], 3 * SQRT2 * 0.01 + 0.001, rtol=1e-12)


def test_instability_detector():
    taus = np.linspace(0, 2, 21)
    norms = np.exp(5 * taus)
    from hyperwave.evolution import _detect_instability

    with pytest.raises(InstabilityError):
        _detect_instability(taus, norms)
    _detect_instability(taus, np.exp(taus))


# decay fits -----------------------------------------------------------------


class _Synthetic:
    def __init__(self, rate):
        self.taus = np.linspace(0, 5, 51)
        self.norms = 3.0 * np.exp(rate * self.taus)


@pytest.mark.parametrize("rate", [-0.5, 1.0])
def test_measure_decay_synthetic(rate):
    fit = measure_decay_rate(_Synthetic(rate))
    assert fit.slope == pytest.approx(rate, abs=1e-12)
    assert fit.intercept == pytest.approx(math.log(3.0), abs=1e-12)
    assert fit.residual < 1e-12


def test_measure_decay_degenerate():
    with pytest.raises(DegenerateWindowError):
        measure_decay_rate(_Synthetic(-1), window=(0.0, 0.5))
    with pytest.raises(DegenerateWindowError):
        fit_log_slope([0, 1, 2], [1.0, 0.0, 1.0])


@pytest.mark.parametrize("N", [24, 32])
def test_stable_decay_two_resolutions(N):
    from hyperwave.spectral import spectral_projection

    g = grid(N)
    P = spectral_projection(0, g, "eigenvectors").matrix
    x = polynomial_field(0, g, np.random.default_rng(11)).vector
    x = x - P @ x
    tr = evolve_linear(ModeField.from_vector(0, x), build_generator(0, g), tau_end=5.0)
    assert measure_decay_rate(tr, (1.0, 5.0)).slope <= -0.45


# slice norms ----------------------------------------------------------------


def _linear_traj(N=24, tau_end=2.0, seed=4):
    g = grid(N)
    u = polynomial_field(0, g, np.random.default_rng(seed))
    return evolve_linear(u, build_generator(0, g), tau_end=tau_end)


def test_slice_norms_zero():
    tr = evolve_linear(ModeField.zeros(0, 16), build_generator(0, grid(16)), tau_end=1.0)
    for m in ("identity", "quadrature"):
        assert sigma_slice_norms(tr, -0.5, m) == (0.0, 0.0, 0.0)


def test_slice_norms_va():
    N = 24
    a = 0.01
    tr = evolve_nonlinear_radial(exact_family_va(a, 0.0, N), dtau=1e-3, tau_end=0.5)
    l2, h1, _ = sigma_slice_norms(tr, -1.0)
    p1, _ = va_phi(a, 0.0)
    assert l2 == pytest.approx(abs(p1) / math.sqrt(3.0), rel=1e-12)
    assert h1 == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("T", [-1.0, -0.6, -0.2])
def test_slice_norms_two_ways(T):
    tr = _linear_traj()
    a = np.array(sigma_slice_norms(tr, T, "identity"))
    b = np.array(sigma_slice_norms(tr, T, "quadrature"))
    np.testing.assert_allclose(b, a, rtol=1e-6)


def test_slice_norms_range():
    tr = _linear_traj(tau_end=1.0)
    with pytest.raises(CoverageError):
        sigma_slice_norms(tr, -0.1)
    with pytest.raises(CoverageError):
        sigma_slice_norms(tr, -2.0)
    with pytest.raises(CoverageError):
        tr.state_at(1.5)


def test_trajectory_consistency():
    tr = _linear_traj(tau_end=0.5)
    hist = tr.norm_history
    snaps = tr.snapshots
    assert len(hist) == len(snaps)
    for (t, n), (ts, f) in zip(hist[::10], snaps[::10]):
        assert t == ts and n == pytest.approx(energy_norm(f, tr.grid), rel=1e-12)
    with pytest.raises(ValueError):
        Trajectory(0, 16, 0.1, np.array([0.0, 0.0]), np.zeros((2, 32)), np.zeros((2, 32)), np.zeros(2))


# Strichartz functional --------------------------------------------------------


def _exp_traj(N=16, tau_end=4.0, h=0.01):
    # phi1 = 3^(1/4) e^(-tau/2) constant in space: ||phi1||_{L4}^4 = e^(-2 tau)
    taus = np.arange(0.0, tau_end + h / 2, h)
    A = 3.0**0.25
    p1 = A * np.exp(-taus / 2)
    states = np.zeros((taus.size, 2 * N))
    derivs = np.zeros_like(states)
    states[:, :N] = p1[:, None]
    derivs[:, :N] = -0.5 * p1[:, None]
    return Trajectory(0, N, h, taus, states, derivs, np.abs(p1))


@pytest.mark.parametrize("t,delta", [(2.0, 0.5), (5.0, 0.5), (10.0, 0.3)])
def test_strichartz_analytic(t, delta):
    tr = _exp_traj()
    c = strichartz_c(delta)
    exact = ((c * c - 0.25) / (2 * t * t)) ** 0.25
    assert strichartz_norm(tr, t, delta) == pytest.approx(exact, rel=1e-9)


def test_strichartz_exponent_and_zero():
    fit = strichartz_exponent(_exp_traj(), ts=np.geomspace(2, 20, 5))
    assert fit.slope == pytest.approx(-0.5, abs=1e-9)
    tr = evolve_linear(ModeField.zeros(0, 16), build_generator(0, grid(16)), tau_end=2.0)
    assert strichartz_norm(tr, 2.0) == 0.0


def test_strichartz_range_endpoints():
    # S range [-c/t, -1/(2t)] covers the localized cylinder: S <= -2t/(4t^2 - |x|^2) <= -1/(2t)
    rng = np.random.default_rng(0)
    for delta in (0.2, 0.5, 0.8):
        c = strichartz_c(delta)
        for _ in range(100):
            t0 = rng.uniform(1, 50)
            s = rng.uniform(t0, 2 * t0)
            r = rng.uniform(0, (1 - delta) * t0)
            S = -s / (s * s - r * r)
            assert -c / t0 - 1e-15 <= S <= -1 / (2 * t0) + 1e-15


def test_strichartz_errors():
    tr = _exp_traj(tau_end=2.0)
    with pytest.raises(CoverageError):
        strichartz_norm(tr, 20.0)
    with pytest.raises(ValueError):
        strichartz_norm(tr, 0.5)
    with pytest.raises(ValueError):
        strichartz_c(1.5)
