"""Finite-parameter realization of the stable manifold of the attractor.

For radial data ``u`` the modified Duhamel map

    K_u(Phi)(tau) = S(tau)(1-P)u + int_0^tau S(tau-s)(1-P)N(Phi(s)) ds
                    - int_tau^inf S(tau-s) P N(Phi(s)) ds

is iterated to its fixed point. The rank-one radial projection ``P`` onto the
eigenvector ``v = (1, 2)`` turns the last integral into the scalar
``I(tau) = int_tau^inf e^(tau-s) c(s) ds`` with ``P N = c v``, so that
``P K_u(Phi) = -I v`` and the data correction is ``F(u) = -I(0) v``.
Integrals are truncated at ``tau_horizon``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from . import kernels
from .evolution import (
    NonlinearParams,
    Trajectory,
    cfl_bound,
    evolve_linear,
    evolve_nonlinear_radial,
    fit_log_slope,
)
from .spectral import (
    ModeField,
    build_generator,
    energy_norm,
    energy_norms,
    grid,
    unstable_mode,
)

SQRT2 = math.sqrt(2.0)


class NonContractionError(ArithmeticError):
    """The fixed-point iteration does not contract: the data are too large for ``delta``."""


class TailError(ValueError):
    """``tau_horizon`` too short for the requested truncation error."""


class SameOutcomeError(ValueError):
    pass


@dataclass(frozen=True)
class IterationConfig:
    """Parameters of the fixed-point iteration.

    ``h`` is the RK4 step (also the quadrature spacing in ``sigma``); the
    number of steps to ``tau_horizon`` is rounded up to an even count. Steps
    close to the RK4 stability limit amplify rounding through the
    non-normal high modes and put a floor under the iterate differences;
    ``h = 0.005`` at ``N = 32`` keeps that floor near ``1e-12`` relative.
    """

    delta: float = 0.05
    eps: float = 0.05
    max_iters: int = 60
    h: float = 0.005
    tau_horizon: float = 12.0
    N: int = 32
    tol: float = 1e-10
    tail_tol: float = 1e-10
    nonlinear: NonlinearParams = field(default_factory=NonlinearParams)

    def __post_init__(self):
        errs = []
        if not self.delta > 0:
            errs.append(f"delta must be positive (got {self.delta})")
        if not 0 < self.eps < 0.5:
            errs.append(f"eps must lie in (0, 1/2) (got {self.eps})")
        if self.max_iters < 1:
            errs.append("max_iters must be positive")
        if not self.h > 0:
            errs.append("h must be positive")
        if errs:
            raise ValueError("; ".join(errs))

    @property
    def nsteps(self) -> int:
        n = int(round(self.tau_horizon / self.h))
        return n + (n % 2)

    @property
    def taus(self) -> np.ndarray:
        return self.h * np.arange(self.nsteps + 1)

    @property
    def tail_bound(self) -> float:
        """``int_{tau_h}^inf e^{(-2+2 eps) s} ds``, the majorant of the truncated tail."""
        r = 2.0 - 2.0 * self.eps
        return math.exp(-r * self.tau_horizon) / r

    def validate(self):
        if self.tail_bound > self.tail_tol:
            raise TailError(
                f"tail bound {self.tail_bound:.3e} exceeds {self.tail_tol:.1e}; "
                f"increase tau_horizon beyond {self.tau_horizon}"
            )
        M = build_generator(0, grid(self.N), True)
        if self.h > cfl_bound(M):
            raise ValueError(f"h = {self.h} exceeds the RK4 stability bound {cfl_bound(M):.3e} at N = {self.N}")
        return self


@dataclass(frozen=True)
class CorrectionVector:
    """Coefficients of ``F(u)`` on ``(1, 2)`` (``l = 0``) and ``(rho, 2 rho) Y_1m``, ``m = -1, 0, 1``."""

    coefficients: tuple = (0.0, 0.0, 0.0, 0.0)

    def __post_init__(self):
        if len(self.coefficients) != 4:
            raise ValueError("a correction has exactly four coefficients")

    @property
    def c0(self):
        return self.coefficients[0]

    def radial_field(self, N: int) -> ModeField:
        c = self.coefficients[0]
        return ModeField(0, np.full(N, c), np.full(N, 2.0 * c))

    def norm(self, N: int = 32) -> float:
        # blocks of different spherical harmonics are orthogonal
        g = grid(N)
        n0 = energy_norm(ModeField(0, np.ones(N), 2.0 * np.ones(N)), g)
        n1 = energy_norm(ModeField(1, g.rho, 2.0 * g.rho), g)
        c = np.asarray(self.coefficients, dtype=float)
        return float(math.sqrt((c[0] * n0) ** 2 + np.sum((c[1:] * n1) ** 2)))

    def __sub__(self, other):
        return CorrectionVector(tuple(a - b for a, b in zip(self.coefficients, other.coefficients)))


@dataclass(eq=False)
class DuhamelResult:
    trajectory: Trajectory
    correction: CorrectionVector
    differences: list
    contraction: list
    converged: bool
    config: IterationConfig
    data: ModeField
    unstable_integral: np.ndarray = field(repr=False, default=None)

    @property
    def iterations(self) -> int:
        return len(self.differences)

    @property
    def max_contraction(self) -> float:
        # first ratio compares against the data-driven first iterate; skip it
        q = self.contraction[1:] if len(self.contraction) > 1 else self.contraction
        return float(max(q)) if q else 0.0


def _projector(N):
    v, w, _ = unstable_mode(0, grid(N))
    return v, w / (w @ v)


def weighted_norm(states, taus, g, eps, ell=0) -> float:
    """``max_k e^{(1/2 - eps) tau_k} ||Phi(tau_k)||`` over the saved states."""
    return float(np.max(np.exp((0.5 - eps) * taus) * energy_norms(states, g, ell)))


def _midpoints(G):
    # cubic Lagrange values at the interval midpoints of an equispaced sample
    n = G.shape[0] - 1
    H = np.empty((n,) + G.shape[1:])
    if n < 3:
        H[:] = 0.5 * (G[:-1] + G[1:])
        return H
    H[1 : n - 1] = (-G[0 : n - 2] + 9.0 * G[1 : n - 1] + 9.0 * G[2:n] - G[3 : n + 1]) / 16.0
    H[0] = (5.0 * G[0] + 15.0 * G[1] - 5.0 * G[2] + G[3]) / 16.0
    H[n - 1] = (G[n - 3] - 5.0 * G[n - 2] + 15.0 * G[n - 1] + 5.0 * G[n]) / 16.0
    return H


def _backward_integral(c, c_half, h):
    # I' = I - c with I(end) = 0, RK4 backward in tau
    n = c.size - 1
    I = np.zeros(n + 1)
    s = -h
    for k in range(n - 1, -1, -1):
        y = I[k + 1]
        k1 = y - c[k + 1]
        k2 = (y + 0.5 * s * k1) - c_half[k]
        k3 = (y + 0.5 * s * k2) - c_half[k]
        k4 = (y + s * k3) - c[k]
        I[k] = y + (s / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return I


def _apply_K(Phi, u0s, M, v, wn, cfg):
    n = cfg.N
    Nl = np.zeros_like(Phi)
    Nl[:, n:] = cfg.nonlinear.apply(Phi[:, :n])
    c = Nl @ wn
    G = Nl - np.outer(c, v)
    Gh = _midpoints(G)
    ch = _midpoints(c)
    Psi = kernels.rk4_forced(M, u0s, cfg.h, G, Gh)
    # the exact Psi has no unstable component; drop the e^tau-amplified rounding
    Psi -= np.outer(Psi @ wn, v)
    I = _backward_integral(c, ch, cfg.h)
    return Psi - np.outer(I, v), I


def duhamel_iterate(u: ModeField, cfg: IterationConfig = IterationConfig()) -> DuhamelResult:
    """Fixed point of the modified Duhamel map for data ``u``.

    Radial data use the full nonlinearity. For ``ell >= 1`` the nonlinearity
    is out of scope and the map reduces to ``S(tau)(1-P)u`` with ``F(u) = 0``.
    """
    cfg.validate()
    g = grid(cfg.N)
    if u.N != cfg.N:
        raise ValueError(f"data on N = {u.N} but config has N = {cfg.N}")
    nu = energy_norm(u, g)
    if nu > cfg.delta**2 * (1 + 1e-12):
        raise ValueError(f"||u|| = {nu:.4e} exceeds delta^2 = {cfg.delta**2:.4e}")
    taus = cfg.taus
    if u.ell != 0:
        from .spectral import spectral_projection

        M = build_generator(u.ell, g, True)
        P = spectral_projection(u.ell, g, "eigenvectors").matrix
        x0 = u.vector - P @ u.vector
        traj = evolve_linear(ModeField.from_vector(u.ell, x0), M, cfg.h, taus[-1])
        return DuhamelResult(traj, CorrectionVector(), [0.0], [], True, cfg, u)

    M = build_generator(0, g, True).matrix
    v, wn = _projector(cfg.N)
    x0 = np.real(u.vector).astype(float)
    u0s = x0 - v * (wn @ x0)
    Phi = np.zeros((taus.size, 2 * cfg.N))
    diffs, ratios = [], []
    converged = False
    I = np.zeros(taus.size)
    for it in range(cfg.max_iters):
        new, I = _apply_K(Phi, u0s, M, v, wn, cfg)
        d = weighted_norm(new - Phi, taus, g, cfg.eps)
        scale = weighted_norm(new, taus, g, cfg.eps)
        Phi = new
        if diffs and diffs[-1] > 0:
            ratios.append(d / diffs[-1])
        diffs.append(d)
        if d <= cfg.tol * max(scale, 1e-300) or d == 0.0:
            converged = True
            break
        if len(ratios) >= 3 and min(ratios[-3:]) >= 1.0:
            raise NonContractionError(
                f"iteration does not contract (ratios {ratios[-3:]}); reduce the data or delta"
            )
    if not converged:
        raise NonContractionError(f"no convergence in {cfg.max_iters} iterations; last difference {diffs[-1]:.3e}")
    Nl = np.zeros_like(Phi)
    Nl[:, cfg.N :] = cfg.nonlinear.apply(Phi[:, : cfg.N])
    derivs = Phi @ M.T + Nl
    traj = Trajectory(0, cfg.N, cfg.h, taus, Phi, derivs, energy_norms(Phi, g, 0), cfg.nonlinear,
                      config={"delta": cfg.delta, "eps": cfg.eps, "tau_horizon": cfg.tau_horizon,
                              "h": cfg.h, "N": cfg.N})
    F = CorrectionVector((float(-I[0]), 0.0, 0.0, 0.0))
    return DuhamelResult(traj, F, diffs, ratios, converged, cfg, u, I)


def fixed_point_residual(res: DuhamelResult) -> float:
    """``||Phi - K_u(Phi)||_X`` with ``K_u`` rebuilt independently.

    Uses the exact propagator ``expm(M h)`` and composite Simpson sums on the
    even time indices, not the RK4 accumulators of the iteration.
    """
    cfg = res.config
    if res.trajectory.ell != 0:
        return 0.0
    g = grid(cfg.N)
    n = cfg.N
    M = build_generator(0, g, True).matrix
    v, wn = _projector(n)
    h = cfg.h
    E = sla.expm(M * h)
    E2 = E @ E
    Phi = res.trajectory.states
    Nl = np.zeros_like(Phi)
    Nl[:, n:] = cfg.nonlinear.apply(Phi[:, :n])
    c = Nl @ wn
    G = Nl - np.outer(c, v)
    x0 = np.real(res.data.vector)
    u0s = x0 - v * (wn @ x0)
    K = cfg.nsteps
    idx = np.arange(0, K + 1, 2)
    free = np.empty((idx.size, 2 * n))
    J = np.empty((idx.size, 2 * n))
    free[0] = u0s
    J[0] = 0.0
    for m in range(1, idx.size):
        k = idx[m]
        free[m] = E2 @ free[m - 1]
        J[m] = E2 @ J[m - 1] + (h / 3.0) * (E2 @ G[k - 2] + 4.0 * (E @ G[k - 1]) + G[k])
    Iu = np.zeros(idx.size)
    e1, e2 = math.exp(-h), math.exp(-2 * h)
    for m in range(idx.size - 2, -1, -1):
        k = idx[m]
        Iu[m] = e2 * Iu[m + 1] + (h / 3.0) * (c[k] + 4.0 * e1 * c[k + 1] + e2 * c[k + 2])
    Kphi = free + J - np.outer(Iu, v)
    return weighted_norm(Phi[idx] - Kphi, cfg.taus[idx], g, cfg.eps)


def correction_map(u: ModeField, cfg: IterationConfig = IterationConfig()) -> CorrectionVector:
    """``F(u)``: the element of the unstable subspace that puts ``u + F(u)`` on the manifold."""
    return duhamel_iterate(u, cfg).correction


def equivalence_check(res: DuhamelResult) -> float:
    """Sup-norm distance between the fixed point and the unmodified evolution of ``u + F(u)``.

    The corrected data ``Phi(0)`` are evolved by plain RK4 with the same step;
    returns ``max |difference|`` over all grid values and saved times.
    """
    if res.trajectory.ell != 0:
        return 0.0
    cfg = res.config
    x = res.trajectory.states[0]
    tr = evolve_nonlinear_radial(ModeField.from_vector(0, x), cfg.h, res.trajectory.tau_end, cfg.nonlinear,
                                 guard=1e6)
    return float(np.max(np.abs(tr.states - res.trajectory.states)))


def lipschitz_probe(u: ModeField, v: ModeField, cfg: IterationConfig = IterationConfig()) -> float:
    """``||F(u) - F(v)|| / ||u - v||``; zero when ``u == v``."""
    g = grid(cfg.N)
    du = energy_norm(ModeField.from_vector(u.ell, u.vector - v.vector), g)
    if du == 0.0:
        return 0.0
    Fu = correction_map(u, cfg)
    Fv = correction_map(v, cfg)
    return (Fu - Fv).norm(cfg.N) / du


# data --------------------------------------------------------------------


def gaussian_bump(N: int, center: float = 0.4, width: float = 0.2, velocity: float = 0.0) -> ModeField:
    """Even radial bump ``exp(-(rho-c)^2/w^2) + exp(-(rho+c)^2/w^2)`` in ``u1`` (and ``velocity`` times it in ``u2``)."""
    r = grid(N).rho
    b = np.exp(-(((r - center) / width) ** 2)) + np.exp(-(((r + center) / width) ** 2))
    return ModeField(0, b, velocity * b)


def stable_part(f: ModeField) -> ModeField:
    """``(1 - P) f`` for radial data."""
    v, wn = _projector(f.N)
    x = np.real(f.vector)
    return ModeField.from_vector(0, x - v * (wn @ x))


def scaled_data(f: ModeField, scale: float) -> ModeField:
    """``scale * f / ||f||``; with ``scale = delta^2`` the data sit on the boundary of the admissible ball."""
    g = grid(f.N)
    nf = energy_norm(f, g)
    if nf == 0:
        return f
    return ModeField.from_vector(f.ell, f.vector * (scale / nf), f.m)


def pinned_pair(N: int, delta: float):
    """The two stable-projected bumps used for Lipschitz measurements, scaled to ``delta^2``."""
    a = stable_part(gaussian_bump(N, 0.3, 0.2, 0.5))
    b = stable_part(gaussian_bump(N, 0.6, 0.15, -0.3))
    return scaled_data(a, delta**2), scaled_data(b, delta**2)


# shooting ------------------------------------------------------------------


def va_family(N: int):
    """Data ``beta -> exact v_beta`` at ``tau = 0`` (spatially constant)."""
    from .evolution import exact_family_va

    return lambda beta: exact_family_va(beta, 0.0, N)


def bump_family(f: ModeField):
    """Data ``alpha -> f + alpha (1, 2)``."""

    def fam(alpha):
        return ModeField(0, f.u1 + alpha, f.u2 + 2.0 * alpha)

    return fam


@dataclass(frozen=True)
class ShootConfig:
    N: int = 24
    dtau: float | None = None
    tau_end: float = 20.0
    guard: float = 10.0
    tol: float = 1e-6
    max_bisections: int = 200


@dataclass(eq=False)
class ShootResult:
    alpha_star: float
    interval: tuple
    outcomes: list
    bisections: int

    def trajectory(self, family, cfg: ShootConfig = ShootConfig(), tau_end: float | None = None):
        u = family(self.alpha_star)
        return evolve_nonlinear_radial(u, cfg.dtau, cfg.tau_end if tau_end is None else tau_end, guard=cfg.guard)


def classify(u: ModeField, cfg: ShootConfig = ShootConfig()):
    """Outcome of the radial evolution of ``u`` and the side of the threshold it lies on.

    ``"blowup"`` is a guard trip and ``"dispersive"`` means ``phi1`` dropped below
    ``-sqrt2/2`` everywhere (drift toward the zero solution ``phi1 = -sqrt2``).
    Otherwise the outcome is ``"on-manifold"`` and the side is the sign of the
    unstable coefficient at the final time. Returns ``(outcome, side)`` with
    ``side = +1`` on the blowup side.
    """
    tr = evolve_nonlinear_radial(u, cfg.dtau, cfg.tau_end, guard=cfg.guard, save_every=50)
    if tr.blown:
        return "blowup", 1
    x = tr.states[-1]
    if np.max(x[: u.N]) < -SQRT2 / 2:
        return "dispersive", -1
    v, wn = _projector(u.N)
    a = float(wn @ x)
    return "on-manifold", (1 if a > 0 else -1)


def shoot_radial(family, alpha_range, cfg: ShootConfig = ShootConfig()) -> ShootResult:
    """Bisect ``alpha`` between blowup and dispersion for the data family ``family(alpha)``."""
    lo, hi = float(alpha_range[0]), float(alpha_range[1])
    if not lo < hi:
        raise ValueError("alpha_range must be increasing")
    o_lo, s_lo = classify(family(lo), cfg)
    o_hi, s_hi = classify(family(hi), cfg)
    outcomes = [(lo, o_lo), (hi, o_hi)]
    if s_lo == s_hi:
        raise SameOutcomeError(f"both endpoints on the same side: {o_lo} at {lo}, {o_hi} at {hi}")
    k = 0
    while hi - lo > cfg.tol and k < cfg.max_bisections:
        mid = 0.5 * (lo + hi)
        um = family(mid)
        o, s = classify(um, cfg)
        outcomes.append((mid, o))
        if o == "on-manifold" and not np.any(um.vector):
            # the unperturbed attractor itself sits exactly on the threshold
            return ShootResult(mid, (mid, mid), outcomes, k + 1)
        if s == s_lo:
            lo = mid
        else:
            hi = mid
        k += 1
    return ShootResult(0.5 * (lo + hi), (lo, hi), outcomes, k)


def threshold_decay_fit(res: ShootResult, family, cfg: ShootConfig = ShootConfig(), window=(1.0, None)):
    """Decay fit of the norm at ``alpha*`` up to the trust horizon.

    The residual unstable component ``|interval| e^tau`` overtakes the decaying
    part near ``tau = log(1/|interval|)/2``; the fit window ends there.
    """
    width = max(res.interval[1] - res.interval[0], 1e-300)
    trust = min(cfg.tau_end, 0.5 * math.log(1.0 / width))
    hi = trust if window[1] is None else min(window[1], trust)
    tr = res.trajectory(family, cfg, tau_end=max(hi, window[0] + 1.0))
    sel = (tr.taus >= window[0]) & (tr.taus <= hi)
    return fit_log_slope(tr.taus[sel], tr.norms[sel]), tr
