"""Closed-form coordinate charts for the future light cone of the origin.

Four charts are supported:

* standard ``(t, x)`` with ``t > |x|``;
* hyperboloidal ``(T, X)`` obtained by Kelvin inversion, ``T < 0``, ``|X| < -T``;
* similarity ``(tau, xi)`` with ``tau = -log(-T)``, ``xi = X / (-T)``;
* Penrose ``(Tp, R)`` of the radial quotient, with conformal factor ``Omega``.

Everything here is a pure function on small value types.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class DomainError(ValueError):
    """A point lies outside the chart where a transform is defined."""


def _vec3(x) -> np.ndarray:
    v = np.asarray(x, dtype=float).reshape(-1)
    if v.size == 1:
        v = np.array([v[0], 0.0, 0.0])
    if v.size != 3:
        raise ValueError(f"expected a 3-vector, got shape {np.shape(x)}")
    return v


@dataclass(frozen=True)
class SpacetimePoint:
    t: float
    x: tuple[float, float, float] = (0.0, 0.0, 0.0)

    @property
    def r(self) -> float:
        return float(np.linalg.norm(self.x))

    def inside_cone(self) -> bool:
        return self.t > self.r


@dataclass(frozen=True)
class HyperboloidPoint:
    T: float
    X: tuple[float, float, float] = (0.0, 0.0, 0.0)

    @property
    def R(self) -> float:
        return float(np.linalg.norm(self.X))

    def admissible(self) -> bool:
        return self.T < 0 and self.R < -self.T


@dataclass(frozen=True)
class SimilarityPoint:
    tau: float
    xi: tuple[float, float, float] = (0.0, 0.0, 0.0)

    @property
    def rho(self) -> float:
        return float(np.linalg.norm(self.xi))


@dataclass(frozen=True)
class PenrosePoint:
    Tp: float
    R: float
    Omega: float


def _point(cls, a, v):
    return cls(float(a), tuple(float(c) for c in _vec3(v)))


def kelvin_forward(p: SpacetimePoint) -> HyperboloidPoint:
    """Map ``(t, x)`` inside the forward cone to ``(T, X)``.

    ``T = -t / (t^2 - |x|^2)`` and ``X = x / (t^2 - |x|^2)``.
    """
    x = _vec3(p.x)
    r2 = float(x @ x)
    if not (p.t > 0 and p.t * p.t > r2):
        raise DomainError(f"(t={p.t}, |x|={math.sqrt(r2)}) is not inside the forward cone")
    q = p.t * p.t - r2
    return _point(HyperboloidPoint, -p.t / q, x / q)


def kelvin_inverse(q: HyperboloidPoint) -> SpacetimePoint:
    """Inverse of :func:`kelvin_forward` (the map is its own inverse up to the sign of time)."""
    X = _vec3(q.X)
    R2 = float(X @ X)
    if not (q.T < 0 and R2 < q.T * q.T):
        raise DomainError(f"(T={q.T}, |X|={math.sqrt(R2)}) is not inside the backward cone")
    s = q.T * q.T - R2
    return _point(SpacetimePoint, -q.T / s, X / s)


def to_similarity(q: HyperboloidPoint) -> SimilarityPoint:
    if not q.admissible():
        raise DomainError(f"(T={q.T}, |X|={q.R}) is not an admissible hyperboloidal point")
    return _point(SimilarityPoint, -math.log(-q.T), _vec3(q.X) / (-q.T))


def from_similarity(s: SimilarityPoint) -> SpacetimePoint:
    """``t = e^tau / (1 - |xi|^2)``, ``x = e^tau xi / (1 - |xi|^2)``."""
    xi = _vec3(s.xi)
    r2 = float(xi @ xi)
    if not r2 < 1.0:
        raise DomainError(f"|xi| = {math.sqrt(r2)} is not inside the unit ball")
    f = math.exp(s.tau) / (1.0 - r2)
    return _point(SpacetimePoint, f, f * xi)


def similarity_to_hyperboloidal(s: SimilarityPoint) -> HyperboloidPoint:
    xi = _vec3(s.xi)
    if not float(xi @ xi) < 1.0:
        raise DomainError(f"|xi| = {s.rho} is not inside the unit ball")
    T = -math.exp(-s.tau)
    return _point(HyperboloidPoint, T, -T * xi)


def jacobian_det(q: HyperboloidPoint) -> float:
    """Modulus of the Jacobian determinant of ``(T, X) -> (t, x)``: ``(T^2 - |X|^2)^-4``."""
    X = _vec3(q.X)
    s = q.T * q.T - float(X @ X)
    if s == 0.0:
        raise DomainError("Jacobian is singular on the light cone T^2 = |X|^2")
    return s ** -4


def hyperboloid_height(T: float, x) -> float:
    """Time coordinate of the leaf ``Sigma_T`` above the spatial point ``x``."""
    if not T < 0:
        raise DomainError(f"T = {T} must be negative")
    r = float(np.linalg.norm(_vec3(x)))
    a = -0.5 / T
    return a + math.hypot(a, r)


def penrose_map(t: float, r: float) -> PenrosePoint:
    """Compactify the radial quotient ``(t, r)``.

    ``U = arctan(t - r)``, ``V = arctan(t + r)``, ``Tp = (V + U)/2``,
    ``R = (V - U)/2`` and ``Omega = cos U cos V``.
    """
    if r < 0:
        raise DomainError(f"r = {r} must be nonnegative")
    U = math.atan(t - r)
    V = math.atan(t + r)
    return PenrosePoint(Tp=0.5 * (V + U), R=0.5 * (V - U), Omega=math.cos(U) * math.cos(V))


def penrose_inverse(Tp: float, R: float) -> tuple[float, float]:
    """Inverse Penrose map ``(Tp, R) -> (t, r)``.

    The open diagram is ``R >= 0``, ``|Tp| + R < pi/2``; its boundary (where
    ``Omega`` vanishes) is rejected.
    """
    if R < 0 or abs(Tp) + R >= 0.5 * math.pi:
        raise DomainError(f"(Tp={Tp}, R={R}) is not strictly inside the Penrose diagram")
    v = math.tan(Tp + R)
    u = math.tan(Tp - R)
    return 0.5 * (v + u), 0.5 * (v - u)


def standard_to_penrose(p: SpacetimePoint) -> PenrosePoint:
    return penrose_map(p.t, p.r)


def all_charts(p: SpacetimePoint) -> dict:
    """Every chart representation of a point inside the cone, plus the Jacobian."""
    q = kelvin_forward(p)
    s = to_similarity(q)
    pp = standard_to_penrose(p)
    return {
        "t": p.t, "x0": p.x[0], "x1": p.x[1], "x2": p.x[2],
        "T": q.T, "X0": q.X[0], "X1": q.X[1], "X2": q.X[2],
        "tau": s.tau, "xi0": s.xi[0], "xi1": s.xi[1], "xi2": s.xi[2],
        "Tp": pp.Tp, "R": pp.R, "Omega": pp.Omega,
        "jacobian_det": jacobian_det(q),
    }


def to_standard(chart: str, c0: float, c1: float, c2: float, c3: float) -> SpacetimePoint:
    """Interpret a 4-tuple in the named chart and return the standard-chart point.

    For the Penrose chart only ``(Tp, R)`` are meaningful; ``c2, c3`` give the
    direction of ``x`` (defaulting to the first axis when both vanish).
    """
    if chart == "standard":
        return _point(SpacetimePoint, c0, (c1, c2, c3))
    if chart == "hyperboloidal":
        return kelvin_inverse(_point(HyperboloidPoint, c0, (c1, c2, c3)))
    if chart == "similarity":
        return from_similarity(_point(SimilarityPoint, c0, (c1, c2, c3)))
    if chart == "penrose":
        t, r = penrose_inverse(c0, c1)
        d = np.array([1.0, c2, c3])
        d = d / np.linalg.norm(d)
        return _point(SpacetimePoint, t, r * d)
    raise ValueError(f"unknown chart {chart!r}")
