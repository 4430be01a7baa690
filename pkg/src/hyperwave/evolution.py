"""Method-of-lines evolution in similarity coordinates and its diagnostics.

Linear mode systems are advanced with the dense generator from
:mod:`hyperwave.spectral`; the radial (``l = 0``) nonlinear system adds
``(0, 3 sqrt2 u1^2 + u1^3)``. Both use classical RK4 from
:mod:`hyperwave.kernels`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from . import kernels
from .geometry import DomainError
from .spectral import (
    GeneratorMatrix,
    ModeField,
    build_generator,
    energy_norms,
    grid,
)

SQRT2 = math.sqrt(2.0)


class InstabilityError(ArithmeticError):
    """Norm growth faster than the analytic bound: the step size is unstable."""


class CoverageError(ValueError):
    """Requested time lies outside the trajectory."""


class DegenerateWindowError(ValueError):
    pass


@dataclass(frozen=True)
class NonlinearParams:
    """Coefficients of ``N(u) = (0, quadratic u1^2 + cubic u1^3)``."""

    quadratic: float = 3.0 * SQRT2
    cubic: float = 1.0

    def apply(self, u1):
        return u1 * u1 * (self.quadratic + self.cubic * u1)


@dataclass(eq=False)
class Trajectory:
    """Saved states of one evolution run.

    ``states[k]`` is the stacked vector ``(u1, u2)`` at ``taus[k]``, ``derivs[k]``
    its tau-derivative from the evolution equation and ``norms[k]`` its energy
    norm.
    """

    ell: int
    N: int
    dtau: float
    taus: np.ndarray
    states: np.ndarray
    derivs: np.ndarray
    norms: np.ndarray
    nonlinear: NonlinearParams | None = None
    blown: bool = False
    tau_blowup: float | None = None
    config: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.taus.size > 1 and not np.all(np.diff(self.taus) > 0):
            raise ValueError("trajectory times must be strictly increasing")

    @property
    def tau_end(self) -> float:
        return float(self.taus[-1])

    @property
    def grid(self):
        return grid(self.N)

    @property
    def snapshots(self):
        return [(float(t), ModeField.from_vector(self.ell, s)) for t, s in zip(self.taus, self.states)]

    @property
    def norm_history(self):
        return list(zip(self.taus.tolist(), self.norms.tolist()))

    @property
    def final(self) -> ModeField:
        return ModeField.from_vector(self.ell, self.states[-1])

    @cached_property
    def _spline(self):
        return CubicHermiteSpline(self.taus, self.states, self.derivs, axis=0)

    def _check(self, tau):
        tau = np.asarray(tau, dtype=float)
        lo, hi = self.taus[0], self.taus[-1]
        slack = 1e-12 * max(1.0, abs(hi))
        if np.any(tau < lo - slack) or np.any(tau > hi + slack):
            raise CoverageError(f"tau outside trajectory range [{lo}, {hi}]")
        return np.clip(tau, lo, hi)

    def state_at(self, tau) -> np.ndarray:
        """Cubic Hermite interpolant of the stacked state."""
        return self._spline(self._check(tau))

    def deriv_at(self, tau) -> np.ndarray:
        return self._spline(self._check(tau), 1)


# stepping -------------------------------------------------------------------


@lru_cache(maxsize=64)
def _spectral_radius(N, ell, with_potential):
    M = build_generator(ell, grid(N), with_potential)
    return float(np.max(np.abs(np.linalg.eigvals(M.matrix_w))))


def cfl_bound(M: GeneratorMatrix) -> float:
    """Largest stable RK4 step, ``2.7 / max|eig|``, for the generator matrix."""
    return 2.7 / _spectral_radius(M.N, M.ell, M.with_potential)


def default_dtau(N: int) -> float:
    return 2.0 / N**2


def _rk4(f, u, h):
    k1 = f(u)
    k2 = f(u + 0.5 * h * k1)
    k3 = f(u + 0.5 * h * k2)
    k4 = f(u + h * k3)
    return u + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _check_dtau(M, dtau):
    if not dtau > 0:
        raise ValueError(f"dtau must be positive, got {dtau}")
    bound = cfl_bound(M)
    if dtau > bound:
        raise ValueError(f"dtau = {dtau:.3e} exceeds the RK4 stability bound {bound:.3e} at N = {M.N}")


def step_linear(state: ModeField, M: GeneratorMatrix, dtau: float) -> ModeField:
    """One RK4 step of ``u' = M u``."""
    if state.ell != M.ell or state.N != M.N:
        raise ValueError("state does not match the generator")
    _check_dtau(M, dtau)
    A = M.matrix
    u = _rk4(lambda x: A @ x, state.vector, dtau)
    return ModeField.from_vector(state.ell, u, state.m)


def _nsteps(tau_end, dtau):
    n = max(1, int(math.ceil(tau_end / dtau - 1e-9)))
    return n, tau_end / n


def _detect_instability(taus, norms, window=1.0, slack=10.0):
    if not np.all(np.isfinite(norms)):
        k = int(np.argmax(~np.isfinite(norms)))
        raise InstabilityError(f"non-finite state at tau = {taus[k]:.4g}")
    j = 0
    for i in range(len(taus)):
        while taus[i] - taus[j] > window:
            j += 1
        dt = taus[i] - taus[j]
        if norms[j] > 0 and norms[i] > slack * math.exp(2.0 * dt) * norms[j]:
            raise InstabilityError(
                f"norm grew by {norms[i] / norms[j]:.3e} over [{taus[j]:.4g}, {taus[i]:.4g}], "
                f"faster than exp(2 dtau)"
            )


def evolve_linear(u0: ModeField, M: GeneratorMatrix, dtau: float | None = None, tau_end: float = 1.0,
                  save_every: int = 1) -> Trajectory:
    """Evolve ``u' = M u`` to ``tau_end`` with RK4 (step adjusted to land on ``tau_end``)."""
    if u0.ell != M.ell or u0.N != M.N:
        raise ValueError("initial data do not match the generator")
    dtau = default_dtau(M.N) if dtau is None else dtau
    n, h = _nsteps(tau_end, dtau)
    _check_dtau(M, h)
    x0 = np.real(u0.vector).astype(float)
    states = kernels.rk4_linear(M.matrix, x0, h, n, save_every)
    taus = h * save_every * np.arange(states.shape[0])
    derivs = states @ M.matrix.T
    norms = energy_norms(states, grid(M.N), M.ell)
    _detect_instability(taus, norms)
    return Trajectory(M.ell, M.N, h, taus, states, derivs, norms,
                      config={"dtau": h, "tau_end": tau_end, "N": M.N, "ell": M.ell,
                              "with_potential": M.with_potential})


def _radial_generator(N):
    return build_generator(0, grid(N), True)


def nonlinear_rhs(x: np.ndarray, M: GeneratorMatrix, params: NonlinearParams = NonlinearParams()) -> np.ndarray:
    """``M x + N(x)`` on stacked radial states (rows of ``x`` allowed)."""
    n = M.N
    r = M.apply_anchored(x)
    r[..., n:] += params.apply(x[..., :n])
    return r


def step_nonlinear_radial(state: ModeField, dtau: float, params: NonlinearParams = NonlinearParams(),
                          guard: float = 10.0, return_flag: bool = False):
    """One RK4 step of the radial nonlinear system.

    With ``return_flag`` the result is ``(state, blown)``, where ``blown``
    reports that ``max |u1|`` left the guard.
    """
    if state.ell != 0:
        raise ValueError("the nonlinear system is implemented for ell = 0 only")
    M = _radial_generator(state.N)
    _check_dtau(M, dtau)
    u = _rk4(lambda x: nonlinear_rhs(x, M, params), np.real(state.vector), dtau)
    out = ModeField.from_vector(0, u)
    blown = not (np.max(np.abs(out.u1)) <= guard)
    return (out, blown) if return_flag else out


def evolve_nonlinear_radial(u0: ModeField, dtau: float | None = None, tau_end: float = 1.0,
                            params: NonlinearParams = NonlinearParams(), guard: float = 10.0,
                            save_every: int = 1) -> Trajectory:
    """Evolve the radial nonlinear system; a guard trip ends the run and sets ``blown``."""
    if u0.ell != 0:
        raise ValueError("the nonlinear system is implemented for ell = 0 only")
    M = _radial_generator(u0.N)
    dtau = default_dtau(u0.N) if dtau is None else dtau
    n, h = _nsteps(tau_end, dtau)
    _check_dtau(M, h)
    states, taken, blown = kernels.rk4_cubic(M.matrix, M.constant_images, np.real(u0.vector).astype(float), h, n,
                                              save_every, params.quadratic, params.cubic, guard)
    taus = h * save_every * np.arange(states.shape[0], dtype=float)
    if blown:
        taus[-1] = h * taken
        if states.shape[0] > 1 and taus[-1] <= taus[-2]:
            states = np.delete(states, -2, axis=0)
            taus = np.delete(taus, -2)
    finite = np.all(np.isfinite(states), axis=1)
    states, taus = states[finite], taus[finite]
    derivs = nonlinear_rhs(states.copy(), M, params)
    norms = energy_norms(states, grid(u0.N), 0)
    return Trajectory(0, u0.N, h, taus, states, derivs, norms, params, blown,
                      float(h * taken) if blown else None,
                      config={"dtau": h, "tau_end": tau_end, "N": u0.N, "ell": 0, "guard": guard})


# exact solutions --------------------------------------------------------------


def va_phi(a: float, tau):
    """``(phi1, phi2)`` of the spatially constant solution ``v_a = sqrt2/(t + a(t^2 - |x|^2))``."""
    tau = np.asarray(tau, dtype=float)
    q = a * np.exp(tau)
    d = 1.0 + q
    if np.any(d <= 0):
        raise DomainError(f"1 + a e^tau <= 0 for a = {a}: past the blowup time")
    p1 = -SQRT2 * q / d
    p2 = p1 - SQRT2 * q / d**2
    return p1, p2


def exact_family_va(a: float, tau: float, N: int) -> ModeField:
    """Grid field of the ``v_a`` solution at similarity time ``tau``."""
    p1, p2 = va_phi(a, tau)
    return ModeField(0, np.full(N, float(p1)), np.full(N, float(p2)))


# diagnostics ------------------------------------------------------------------


@dataclass(frozen=True)
class DecayFit:
    slope: float
    intercept: float
    residual: float
    n: int


def fit_log_slope(x, y) -> DecayFit:
    """Least-squares line through ``(x, log y)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2:
        raise DegenerateWindowError("need at least two points")
    if np.any(~(y > 0)):
        raise DegenerateWindowError("norms must be positive for a log fit")
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, np.log(y), rcond=None)
    r = np.log(y) - A @ coef
    return DecayFit(float(coef[0]), float(coef[1]), float(np.sqrt(np.mean(r * r))), int(x.size))


def measure_decay_rate(traj, window=(None, None)) -> DecayFit:
    """Slope of ``log ||Phi(tau)||`` over ``window``.

    ``traj`` is a :class:`Trajectory` or any object with ``taus`` and ``norms``.
    """
    taus = np.asarray(traj.taus, dtype=float)
    norms = np.asarray(traj.norms, dtype=float)
    lo = taus[0] if window[0] is None else window[0]
    hi = taus[-1] if window[1] is None else window[1]
    sel = (taus >= lo - 1e-12) & (taus <= hi + 1e-12)
    if sel.sum() < 10:
        raise DegenerateWindowError(f"only {sel.sum()} snapshots in window [{lo}, {hi}]")
    return fit_log_slope(taus[sel], norms[sel])


def _radial_l2(g, f):
    return math.sqrt(max(float(np.dot(g.w2, f * f)), 0.0))


def sigma_slice_norms(traj: Trajectory, T: float, method: str = "identity", nquad: int = 64):
    """``(L2, H1dot, nabla_n L2)`` norms of ``v - v0`` on the slice ``Sigma_T``.

    ``"identity"`` rescales the similarity-chart norms of ``phi1``, ``d phi1``
    and ``phi2``. ``"quadrature"`` samples ``v - v0`` and its physical
    derivatives at Gauss-Legendre points of ``B_|T|`` through the inverse
    Kelvin map and integrates. Norms are per unit solid angle (radial fields).
    """
    if not -1.0 <= T < 0.0:
        raise CoverageError(f"T must lie in [-1, 0), got {T}")
    if traj.ell != 0:
        raise ValueError("slice norms are implemented for radial (ell = 0) trajectories")
    tau = -math.log(-T)
    g = traj.grid
    N = traj.N
    x = traj.state_at(tau)
    p1, p2 = x[:N], x[N:]
    aT = -T
    if method == "identity":
        dp1 = g.De @ p1
        return (aT**0.5 * _radial_l2(g, p1), aT**-0.5 * _radial_l2(g, dp1), aT**-0.5 * _radial_l2(g, p2))
    if method != "quadrature":
        raise ValueError(f"unknown method {method!r}")
    dx = traj.deriv_at(tau)
    p1t = dx[:N]
    dp1 = g.De @ p1
    xg, wg = np.polynomial.legendre.leggauss(nquad)
    R = 0.5 * aT * (xg + 1.0)
    wR = 0.5 * aT * wg

    def fields(Rv):
        # v - v0 and its physical derivatives at (t, r) = Kelvin image of (T, R)
        s = T * T - Rv * Rv
        t = -T / s
        r = Rv / s
        rho = r / t
        f1 = g.interp(p1, rho)
        f1r = g.interp(dp1, rho, -1)
        f1t = g.interp(p1t, rho)
        dv = f1 / t
        tau_t = (t * t + r * r) / (t * (t * t - r * r))
        tau_r = -2.0 * r / (t * t - r * r)
        dv_t = -f1 / t**2 + (f1r * (-r / t**2) + f1t * tau_t) / t
        dv_r = (f1r / t + f1t * tau_r) / t
        nabla = (t * t + r * r) * dv_t + 2.0 * t * r * dv_r + 2.0 * t * dv
        return dv / s, nabla / s

    h0, n0 = fields(R)
    l2 = math.sqrt(float(np.sum(wR * R * R * h0 * h0)))
    nn = math.sqrt(float(np.sum(wR * R * R * n0 * n0)))
    # radial derivative of the rescaled field by 4th-order central differences
    h = np.minimum(1e-4 * aT, 0.25 * (aT - R))
    hp1, _ = fields(R + h)
    hm1, _ = fields(R - h)
    hp2, _ = fields(R + 2 * h)
    hm2, _ = fields(R - 2 * h)
    dh = (8.0 * (hp1 - hm1) - (hp2 - hm2)) / (12.0 * h)
    h1 = math.sqrt(float(np.sum(wR * R * R * dh * dh)))
    return l2, h1, nn


def radial_l4(g, f) -> float:
    """``(int_0^1 f^4 rho^2 drho)^(1/4)``."""
    return float(np.dot(g.w2, f**4)) ** 0.25


def strichartz_c(delta: float) -> float:
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    return 1.0 / (delta * (2.0 - delta))


def strichartz_norm(traj: Trajectory, t: float, delta: float = 0.5, nodes: int = 8) -> float:
    """Localized space-time ``L4`` bound of ``v - v0`` over ``[t, 2t] x B_{(1-delta)t}``.

    The slice integral ``int |S|^-1 ||phi1(-log(-S))||_{L4}^4 dS`` over
    ``S in [-c/t, -1/(2t)]``, ``c = 1/(delta(2-delta))``, becomes
    ``int ||phi1(tau)||_{L4}^4 dtau`` over ``tau in [log(t/c), log(2t)]``;
    returns its fourth root.
    """
    if t < 1.0:
        raise ValueError("t must be at least 1")
    c = strichartz_c(delta)
    ta, tb = math.log(t / c), math.log(2.0 * t)
    if ta < traj.taus[0] - 1e-12 or tb > traj.taus[-1] + 1e-12:
        raise CoverageError(
            f"trajectory covers tau in [{traj.taus[0]:.4g}, {traj.taus[-1]:.4g}], "
            f"need [{ta:.4g}, {tb:.4g}]"
        )
    g = traj.grid
    N = traj.N
    knots = traj.taus[(traj.taus > ta) & (traj.taus < tb)]
    edges = np.concatenate([[ta], knots, [tb]])
    xg, wg = np.polynomial.legendre.leggauss(nodes)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        if b <= a:
            continue
        ts = 0.5 * (b - a) * xg + 0.5 * (a + b)
        X = traj.state_at(ts)[:, :N]
        q = (X**4) @ g.w2
        total += 0.5 * (b - a) * float(np.dot(wg, q))
    return total**0.25


def strichartz_exponent(traj: Trajectory, ts=None, delta: float = 0.5) -> DecayFit:
    """Power-law exponent of :func:`strichartz_norm` in ``t`` (slope of a log-log fit)."""
    ts = np.geomspace(2.0, 20.0, 7) if ts is None else np.asarray(ts, dtype=float)
    vals = np.array([strichartz_norm(traj, float(t), delta) for t in ts])
    return fit_log_slope(np.log(ts), vals)


from .freewave import FreeWave1p1State, FreeWaveRun, free_wave_1p1_evolve  # noqa: E402,F401
