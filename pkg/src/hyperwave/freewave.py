"""Free 1+1 wave equation on the shrinking interval ``R in [0, -T)``.

With ``x = R/(-T)``, ``s = -log(-T)``, ``q1 = w`` and ``q2 = -T w_T`` the
equation ``w_TT = w_RR`` becomes

    d_s q1 = -x q1_x + q2
    d_s q2 = q1_xx - x q2_x - q2

on the fixed interval ``[0, 1]``. Odd extension in ``x`` enforces ``w = 0`` at
the origin; ``x = 1`` is an outflow boundary and takes no condition. The
energy ``E = 1/2 int (w_T^2 + w_R^2) dR`` loses
``1/2 (w_T - w_R)^2`` through ``R = -T``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .grid import RadialGrid


@lru_cache(maxsize=16)
def _system(N):
    g = RadialGrid(N)
    x = g.rho
    Do, D2o = g.Do, g.D2o
    I = np.eye(N)
    A = np.block([[-x[:, None] * Do, I], [D2o, -x[:, None] * Do - I]])
    ev = np.linalg.eigvals(A)
    return g, A, float(np.max(np.abs(ev)))


@dataclass
class FreeWave1p1State:
    """``w`` and ``w_T`` at the nodes ``R_i = -T rho_i`` of an odd Chebyshev grid."""

    T: float
    N: int
    w: np.ndarray
    wT: np.ndarray

    def __post_init__(self):
        if not self.T < 0:
            raise ValueError("T must be negative")
        self.w = np.asarray(self.w, dtype=float)
        self.wT = np.asarray(self.wT, dtype=float)
        if self.w.shape != (self.N,) or self.wT.shape != (self.N,):
            raise ValueError("w and wT must have one value per node")

    @property
    def R(self):
        return -self.T * _system(self.N)[0].rho

    @classmethod
    def from_functions(cls, T, N, w, wT):
        R = -T * _system(N)[0].rho
        return cls(T, N, w(T, R), wT(T, R))

    def q(self):
        return np.concatenate([self.w, -self.T * self.wT])

    @classmethod
    def from_q(cls, T, N, q):
        return cls(T, N, q[:N].copy(), q[N:] / (-T))


def energy(q, T, g: RadialGrid) -> float:
    """``1/2 int_0^{-T} (w_T^2 + w_R^2) dR`` from the rescaled variables."""
    N = g.N
    q1x = g.Do @ q[:N]
    q2 = q[N:]
    return 0.5 / (-T) * float(np.dot(g.w, q2 * q2 + q1x * q1x))


def boundary_flux(q, T, g: RadialGrid) -> float:
    """``dE/dT = -1/2 (w_T - w_R)^2`` at ``R = -T``."""
    N = g.N
    q1x = g.Do[0] @ q[:N]
    return -0.5 * (q[N] - q1x) ** 2 / T**2


@dataclass
class FreeWaveRun:
    """Energy and boundary flux at every step of a free-wave run."""

    T: np.ndarray
    energy: np.ndarray
    flux: np.ndarray
    final: FreeWave1p1State

    def __iter__(self):
        # (energy history, flux record)
        yield np.column_stack([self.T, self.energy])
        yield np.column_stack([self.T, self.flux])

    def energy_increments(self):
        return np.diff(self.energy)

    def flux_mismatch(self):
        """Difference quotient of ``E`` minus the trapezoid average of the flux, per step."""
        dq = np.diff(self.energy) / np.diff(self.T)
        avg = 0.5 * (self.flux[1:] + self.flux[:-1])
        return dq - avg


def cfl_bound(N: int) -> float:
    return 2.7 / _system(N)[2]


def free_wave_1p1_evolve(initial: FreeWave1p1State, T_end: float, ds: float | None = None) -> FreeWaveRun:
    """Advance to ``T_end`` with RK4 in ``s = -log(-T)``, recording ``E`` and the flux each step."""
    if not initial.T < T_end < 0:
        raise ValueError(f"need T_initial < T_end < 0, got {initial.T} and {T_end}")
    g, A, rad = _system(initial.N)
    bound = 2.7 / rad
    # well inside the stability region: near-boundary modes of the outflow
    # collocation are weakly damped by RK4 and pollute the energy otherwise
    ds = 0.1 * bound if ds is None else ds
    if ds > bound:
        raise ValueError(f"ds = {ds:.3e} violates the CFL bound {bound:.3e}")
    s0, s1 = -math.log(-initial.T), -math.log(-T_end)
    n = max(1, int(math.ceil((s1 - s0) / ds - 1e-9)))
    h = (s1 - s0) / n
    q = initial.q()
    Ts = np.empty(n + 1)
    E = np.empty(n + 1)
    F = np.empty(n + 1)
    Ts[0], E[0], F[0] = initial.T, energy(q, initial.T, g), boundary_flux(q, initial.T, g)
    for k in range(1, n + 1):
        k1 = A @ q
        k2 = A @ (q + 0.5 * h * k1)
        k3 = A @ (q + 0.5 * h * k2)
        k4 = A @ (q + h * k3)
        q = q + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        T = -math.exp(-(s0 + k * h))
        Ts[k], E[k], F[k] = T, energy(q, T, g), boundary_flux(q, T, g)
    return FreeWaveRun(Ts, E, F, FreeWave1p1State.from_q(Ts[-1], initial.N, q))


def dalembert_pulse(center: float = -0.6, width: float = 0.08):
    """Exact odd solution ``w = F(T + R) - F(T - R)`` for a Gaussian profile ``F``.

    Returns ``(w, w_T, F')`` as callables.
    """

    def F(y):
        return np.exp(-(((y - center) / width) ** 2))

    def dF(y):
        return -2.0 * (y - center) / width**2 * F(y)

    def w(T, R):
        return F(T + R) - F(T - R)

    def wT(T, R):
        return dF(T + R) - dF(T - R)

    return w, wT, dF
