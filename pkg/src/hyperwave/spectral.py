"""Linearized generator per spherical-harmonic mode and its spectral data.

Mode ``l`` states ``(u1, u2)`` are radial grid functions behaving like
``rho^l`` at the origin. The generator with the linearized potential acts as

    (L u)_1 = -rho u1' - u1 + u2
    (L u)_2 = u1'' + 2 u1'/rho - l(l+1) u1/rho^2 - rho u2' - 2 u2 + 6 u1

and the free generator drops the ``6 u1`` coupling. Matrices are assembled for
the regular unknowns ``w = rho^-l u`` (even polynomials), which keeps the
``rho = 0`` singularity out of the collocation, and conjugated to the ``u``
variables where fields are compared and evolved. No condition is imposed at
``rho = 1``: the principal part degenerates there and all characteristics leave
the ball.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.linalg as sla
from scipy import integrate

from . import specfun
from .grid import RadialGrid


class SpectralError(ArithmeticError):
    """Eigen- or linear-solver failure, with diagnostics."""


class GridMismatchError(ValueError):
    pass


# field and matrix types --------------------------------------------------------


@dataclass
class ModeField:
    """State ``(u1, u2)`` of mode ``(ell, m)`` sampled on a :class:`RadialGrid`."""

    ell: int
    u1: np.ndarray
    u2: np.ndarray
    m: int = 0

    def __post_init__(self):
        if self.ell < 0 or abs(self.m) > self.ell:
            raise ValueError(f"invalid mode labels ell={self.ell}, m={self.m}")
        self.u1 = np.asarray(self.u1)
        self.u2 = np.asarray(self.u2)
        if self.u1.shape != self.u2.shape or self.u1.ndim != 1:
            raise ValueError("u1 and u2 must be 1-d arrays of equal length")

    @property
    def N(self) -> int:
        return self.u1.size

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.u1, self.u2])

    @classmethod
    def from_vector(cls, ell, v, m=0):
        v = np.asarray(v)
        n = v.size // 2
        return cls(ell, v[:n].copy(), v[n:].copy(), m)

    @classmethod
    def from_functions(cls, ell, g: RadialGrid, f1, f2, m=0):
        return cls(ell, np.asarray(f1(g.rho), dtype=float) * np.ones(g.N),
                   np.asarray(f2(g.rho), dtype=float) * np.ones(g.N), m)

    @classmethod
    def zeros(cls, ell, N, m=0):
        return cls(ell, np.zeros(N), np.zeros(N), m)


@dataclass(frozen=True, eq=False)
class GeneratorMatrix:
    """Dense collocation matrix of ``L`` (or ``L0``) for one mode.

    ``matrix`` acts on ``(u1, u2)``; ``matrix_w`` on ``(w1, w2) = rho^-l (u1, u2)``.
    """

    ell: int
    N: int
    with_potential: bool
    matrix: np.ndarray
    matrix_w: np.ndarray
    grid: RadialGrid = field(repr=False)

    def __matmul__(self, v):
        return self.matrix @ v

    def apply(self, u: ModeField) -> ModeField:
        return ModeField.from_vector(self.ell, self.matrix @ u.vector, u.m)

    @property
    def constant_images(self) -> np.ndarray:
        """Exact images of the block constants ``(1, 0)`` and ``(0, 1)`` (``ell = 0`` only)."""
        if self.ell != 0:
            raise ValueError("constants are admissible states only for ell = 0")
        one = np.ones(self.N)
        k = 6.0 if self.with_potential else 0.0
        return np.column_stack([np.concatenate([-one, k * one]), np.concatenate([one, -2.0 * one])])

    def apply_anchored(self, x: np.ndarray) -> np.ndarray:
        """``M x`` for ``ell = 0`` with the derivative blocks acting on ``x - x(rho=1)``.

        Agrees with ``M @ x`` up to rounding and returns exact zeros from the
        derivative blocks on constant states.
        """
        n = self.N
        a1 = x[..., :1]
        a2 = x[..., n : n + 1]
        v = np.concatenate([x[..., :n] - a1, x[..., n:] - a2], axis=-1)
        Ac = self.constant_images
        return v @ self.matrix.T + a1 * Ac[:, 0] + a2 * Ac[:, 1]


@dataclass(frozen=True, eq=False)
class ProjectionMatrix:
    """Discretized Riesz projection for one mode, acting on ``(u1, u2)``."""

    ell: int
    matrix: np.ndarray
    rank: int
    method: str = "contour"
    trace_history: tuple = ()

    def apply(self, u: ModeField) -> ModeField:
        return ModeField.from_vector(self.ell, self.matrix @ u.vector, u.m)


def _parity(ell):
    return 1 if ell % 2 == 0 else -1


def _scaling(g: RadialGrid, ell: int) -> np.ndarray:
    s = g.rho**ell
    return np.concatenate([s, s])


# energy inner product ---------------------------------------------------------


def _check_pair(u: ModeField, v: ModeField, g: RadialGrid):
    if u.ell != v.ell:
        raise GridMismatchError(f"mode mismatch: ell {u.ell} vs {v.ell}")
    if u.N != g.N or v.N != g.N:
        raise GridMismatchError(f"fields of length {u.N}, {v.N} on a grid with N = {g.N}")


def energy_inner_product(u: ModeField, v: ModeField, g: RadialGrid) -> complex:
    """Energy inner product of two mode fields.

    ``int_0^1 (u1' conj(v1') + l(l+1) rho^-2 u1 conj(v1)) rho^2 drho
    + u1(1) conj(v1(1)) + int_0^1 u2 conj(v2) rho^2 drho``. Norms are per unit
    solid angle (no factor ``4 pi``).
    """
    _check_pair(u, v, g)
    D = g.D(_parity(u.ell))
    du = D @ u.u1
    dv = D @ v.u1
    lk = u.ell * (u.ell + 1)
    val = np.dot(g.w2, du * np.conj(dv))
    val += lk * np.dot(g.w, u.u1 * np.conj(v.u1))
    val += u.u1[0] * np.conj(v.u1[0])
    val += np.dot(g.w2, u.u2 * np.conj(v.u2))
    return complex(val)


@lru_cache(maxsize=64)
def _gram(N: int, ell: int) -> np.ndarray:
    g = grid(N)
    D = g.D(_parity(ell))
    G11 = D.T @ np.diag(g.w2) @ D + ell * (ell + 1) * np.diag(g.w)
    G11[0, 0] += 1.0
    Z = np.zeros((N, N))
    return np.block([[G11, Z], [Z, np.diag(g.w2)]])


def gram_matrix(g: RadialGrid, ell: int) -> np.ndarray:
    """Symmetric positive definite ``G`` with ``(u|v) = v^H G u`` on stacked vectors."""
    return _gram(g.N, ell).copy()


@lru_cache(maxsize=64)
def _gram_chol(N: int, ell: int):
    return np.linalg.cholesky(_gram(N, ell))


def energy_norm(u, g: RadialGrid, ell: int | None = None) -> float:
    """Energy norm of a :class:`ModeField` or a stacked vector (``ell`` required then)."""
    if isinstance(u, ModeField):
        ell, v = u.ell, u.vector
    else:
        v = np.asarray(u)
    G = _gram(g.N, ell)
    return math.sqrt(max(float(np.real(np.conj(v) @ G @ v)), 0.0))


def energy_norms(V, g: RadialGrid, ell: int) -> np.ndarray:
    """Energy norms of the rows of ``V``."""
    G = _gram(g.N, ell)
    V = np.atleast_2d(V)
    return np.sqrt(np.maximum(np.real(np.einsum("ki,ij,kj->k", np.conj(V), G, V)), 0.0))


def energy_operator_norm(A, g: RadialGrid, ell: int) -> float:
    """Operator norm of ``A`` induced by the energy norm: ``||C^T A C^-T||_2``, ``G = C C^T``."""
    C = _gram_chol(g.N, ell)
    B = C.T @ A @ np.linalg.inv(C.T)
    return float(np.linalg.norm(B, 2))


def dissipativity_check(u: ModeField, g: RadialGrid) -> float:
    """``Re(L0 u | u) + (u | u)/2`` for the free generator; nonpositive in theory."""
    L0 = build_generator(u.ell, g, with_potential=False)
    return energy_inner_product(L0.apply(u), u, g).real + 0.5 * energy_inner_product(u, u, g).real


# generator ------------------------------------------------------------------


@lru_cache(maxsize=32)
def grid(N: int) -> RadialGrid:
    """Cached :class:`RadialGrid`."""
    return RadialGrid(N)


@lru_cache(maxsize=128)
def _generator(N: int, ell: int, with_potential: bool) -> GeneratorMatrix:
    g = grid(N)
    r = g.rho
    I = np.eye(N)
    De, D2e = g.De, g.D2e
    rD = r[:, None] * De
    A11 = -rD - (ell + 1) * I
    A12 = I
    A21 = D2e + (2 * ell + 2) * (De / r[:, None])
    if with_potential:
        A21 = A21 + 6.0 * I
    A22 = -rD - (ell + 2) * I
    Mw = np.block([[A11, A12], [A21, A22]])
    s = _scaling(g, ell)
    Mu = s[:, None] * Mw / s[None, :]
    Mw.setflags(write=False)
    Mu.setflags(write=False)
    return GeneratorMatrix(ell, N, bool(with_potential), Mu, Mw, g)


def build_generator(ell: int, g: RadialGrid, with_potential: bool = True) -> GeneratorMatrix:
    """Collocation matrix of the mode-``ell`` generator (``L`` or, without potential, ``L0``)."""
    if ell < 0 or int(ell) != ell:
        raise ValueError(f"ell must be a nonnegative integer, got {ell}")
    return _generator(g.N, int(ell), bool(with_potential))


# spectrum -------------------------------------------------------------------


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues sorted by real part (descending) with resolution-filter flags."""

    ell: int
    N: int
    eigenvalues: np.ndarray
    accepted: np.ndarray | None = None

    @property
    def filtered(self) -> np.ndarray:
        if self.accepted is None:
            return self.eigenvalues
        return self.eigenvalues[self.accepted]


def _eigvals(A):
    try:
        ev = sla.eigvals(A)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SpectralError(f"eigensolver failed: {exc}; cond = {np.linalg.cond(A):.3e}") from exc
    if not np.all(np.isfinite(ev)):
        raise SpectralError(f"non-finite eigenvalues; cond = {np.linalg.cond(A):.3e}")
    return ev


def _sort(ev):
    return ev[np.lexsort((ev.imag, -ev.real))]


def spectrum(M: GeneratorMatrix, filtered: bool = False, tol: float = 1e-4) -> Spectrum:
    """Eigenvalues of a generator matrix, sorted by decreasing real part.

    With ``filtered=True`` the same operator is discretized with ``2N`` nodes
    and an eigenvalue is accepted only if the finer spectrum has one within
    ``tol``.
    """
    ev = _sort(_eigvals(M.matrix_w))
    if not filtered:
        return Spectrum(M.ell, M.N, ev)
    M2 = build_generator(M.ell, grid(2 * M.N), M.with_potential)
    ev2 = _eigvals(M2.matrix_w)
    dist = np.min(np.abs(ev[:, None] - ev2[None, :]), axis=1)
    return Spectrum(M.ell, M.N, ev, dist <= tol)


def quantization_function(ell: int, lam) -> complex:
    """``1/(Gamma(a) Gamma(b))`` with ``a = (l + lam - 1)/2``, ``b = (l + lam + 4)/2``.

    Entire in ``lam``; its zeros with ``Re lam > -1/2`` are the unstable
    eigenvalues of mode ``ell``.
    """
    p = specfun.family_params(ell, lam, "potential")
    return specfun.recip_gamma(p.a) * specfun.recip_gamma(p.b)


def find_eigenvalues(ell: int, eps: float = 0.05, step: float = 0.01, tol: float = 1e-10) -> list:
    """Real zeros of :func:`quantization_function` with ``lam > -1/2 + eps``.

    ``1/Gamma`` has only real zeros, so the real axis is scanned for sign
    changes (or exact zeros) up to ``max(1 - ell, 0) + 1``, beyond which
    ``a, b > 0`` and the function is positive. Roots are refined by secant
    iteration to ``tol``.
    """
    if not 0.0 < eps < 0.5:
        raise ValueError("eps must lie in (0, 1/2)")

    def q(x):
        return float(np.real(quantization_function(ell, x)))

    lo = -0.5 + eps
    hi = max(1.0 - ell, 0.0) + 1.0
    xs = np.arange(lo, hi + step, step)
    vals = [q(x) for x in xs]
    roots = []
    for i in range(len(xs)):
        if vals[i] == 0.0:
            roots.append(float(xs[i]))
            continue
        if i + 1 < len(xs) and vals[i + 1] != 0.0 and vals[i] * vals[i + 1] < 0:
            roots.append(_secant(q, xs[i], xs[i + 1], tol))
    out = []
    for r in roots:
        if r > lo and not any(abs(r - o) < 10 * tol for o in out):
            out.append(r)
    return out


def _secant(f, x0, x1, tol, maxiter=100):
    f0, f1 = f(x0), f(x1)
    a, b = x0, x1
    for _ in range(maxiter):
        if f1 == f0:
            break
        x2 = x1 - f1 * (x1 - x0) / (f1 - f0)
        if not (min(a, b) <= x2 <= max(a, b)):
            x2 = 0.5 * (a + b)
        f2 = f(x2)
        if f2 == 0.0:
            return float(x2)
        if f(a) * f2 < 0:
            b = x2
        else:
            a = x2
        if abs(x2 - x1) <= tol:
            return float(x2)
        x0, f0, x1, f1 = x1, f1, x2, f2
    return float(x1)


# resolvent --------------------------------------------------------------------


def _resolvent_residual(M, lam, u, f, g):
    r = lam * u - M.matrix @ u - f
    nf = energy_norm(f, g, M.ell)
    return energy_norm(r, g, M.ell) / nf if nf > 0 else energy_norm(r, g, M.ell)


def resolvent_solve(ell, lam, f: ModeField, g: RadialGrid, method="matrix",
                    with_potential=True, rtol=1e-8) -> ModeField:
    """Solve ``(lam - L) u = f`` for one mode.

    ``method="matrix"`` solves the collocation system; ``"variation_of_constants"``
    reduces to the scalar radial ODE for ``u1`` and integrates the Green's
    function built from the hypergeometric fundamental system (real ``lam``).
    """
    if f.ell != ell or f.N != g.N:
        raise GridMismatchError("right-hand side does not match ell/grid")
    M = build_generator(ell, g, with_potential)
    if method == "matrix":
        s = _scaling(g, ell)
        A = lam * np.eye(2 * g.N) - M.matrix_w
        rhs = f.vector / s
        try:
            w = np.linalg.solve(A, rhs)
        except np.linalg.LinAlgError as exc:
            raise SpectralError(f"lam = {lam} is a discrete eigenvalue: {exc}") from exc
        u = w * s
        res = _resolvent_residual(M, lam, u, f.vector, g)
        if not res <= rtol:
            raise SpectralError(
                f"resolvent residual {res:.3e} exceeds {rtol:.1e} at lam = {lam}; "
                f"cond = {np.linalg.cond(A):.3e}"
            )
        return ModeField.from_vector(ell, u, f.m)
    if method == "variation_of_constants":
        return _resolvent_voc(ell, lam, f, g, with_potential)
    raise ValueError(f"unknown method {method!r}")


def _resolvent_voc(ell, lam, f, g, with_potential):
    if np.iscomplexobj(lam) and np.imag(lam) != 0:
        raise ValueError("variation of constants is implemented for real lam")
    lam = float(np.real(lam))
    if lam <= 0:
        raise ValueError("variation of constants needs lam > 0 (integrable endpoint weight)")
    family = "potential" if with_potential else "free"
    par = _parity(ell)
    f1, f2 = np.real(f.u1), np.real(f.u2)
    df1 = g.D(par) @ f1
    rhs = f2 + g.rho * df1 + (lam + 2.0) * f1
    psi0 = specfun.ModeSolution(ell, lam, "phi0", family)
    psi1 = specfun.ModeSolution(ell, lam, "phi1", family)
    # W = C rho^-2 (1 - rho^2)^(-lam-1)
    C = float(specfun.wronskian(ell, lam, 0.5, family)) * 0.25 * 0.75 ** (lam + 1.0)

    def gfun(s):
        return float(g.interp(rhs, s, par)[0])

    # integrand of the rho..1 integral without the (1 - s)^lam factor
    def k1(s):
        return float(psi1(s)) * gfun(s) * s * s * (1.0 + s) ** lam / C

    def k0(s):
        return float(psi0(s)) * gfun(s) * s * s * (1.0 - s * s) ** lam / C

    r = g.rho  # decreasing from 1
    N = g.N
    I1 = np.zeros(N)  # int_rho^1
    # the algebraic weight is (b - s)^lam relative to the segment end, so it
    # only applies to the segment touching rho = 1
    seg, _ = integrate.quad(k1, r[1], r[0], weight="alg", wvar=(0.0, lam),
                            epsabs=1e-14, epsrel=1e-12, limit=200)
    I1[1] = seg
    for i in range(2, N):
        seg, _ = integrate.quad(lambda s: k1(s) * (1.0 - s) ** lam, r[i], r[i - 1],
                                epsabs=1e-14, epsrel=1e-12, limit=200)
        I1[i] = I1[i - 1] + seg
    I0 = np.zeros(N)  # int_0^rho
    edges = r[::-1]
    acc = integrate.quad(k0, 0.0, edges[0], epsabs=1e-15, epsrel=1e-12, limit=200)[0]
    I0_rev = [acc]
    for i in range(1, N):
        acc += integrate.quad(k0, edges[i - 1], edges[i], epsabs=1e-15, epsrel=1e-12, limit=200)[0]
        I0_rev.append(acc)
    I0 = np.array(I0_rev[::-1])
    p1 = psi1(r)
    u1 = -p1 * I0
    p0 = psi0(r[1:])
    u1[1:] -= p0 * I1[1:]
    du1 = g.D(par) @ u1
    u2 = g.rho * du1 + (lam + 1.0) * u1 - f1
    return ModeField(ell, u1, u2, f.m)


def resolvent_residual(ell, lam, u: ModeField, f: ModeField, g: RadialGrid, with_potential=True) -> float:
    """``||(lam - L) u - f|| / ||f||`` in the energy norm."""
    M = build_generator(ell, g, with_potential)
    return _resolvent_residual(M, lam, u.vector, f.vector, g)


# projections ------------------------------------------------------------------

CONTOURS = {
    "unstable": (0.5, 0.75),  # encloses 0 and 1
    "zero": (0.0, 0.5),
    "one": (1.0, 0.5),
}


def _contour_projection(Mw, center, radius, K0=64, tol=1e-9, Kmax=4096):
    n = Mw.shape[0]
    I = np.eye(n)
    history = []

    def trap(K):
        s = np.arange(K) / K
        acc = np.zeros((n, n), dtype=complex)
        for sk in s:
            e = np.exp(2j * np.pi * sk)
            z = center + radius * e
            acc += radius * e * np.linalg.solve(z * I - Mw, I)
        return acc / K

    K = K0
    P = trap(K)
    while True:
        K2 = 2 * K
        P2 = trap(K2)
        d = float(np.max(np.abs(P2 - P)))
        history.append((K2, d))
        if d <= tol:
            return P2.real, tuple(history)
        if K2 >= Kmax:
            raise SpectralError(f"contour quadrature did not converge; refinement trace {history}")
        K, P = K2, P2


def _eig_projection(Mw, center, radius):
    ev, vl, vr = sla.eig(Mw, left=True, right=True)
    inside = np.abs(ev - center) < radius
    n = Mw.shape[0]
    P = np.zeros((n, n), dtype=complex)
    for k in np.nonzero(inside)[0]:
        v = vr[:, k]
        w = vl[:, k]
        P += np.outer(v, np.conj(w)) / (np.conj(w) @ v)
    return P.real


def spectral_projection(ell: int, g: RadialGrid, method: str = "contour", contour: str = "unstable",
                        with_potential: bool = True) -> ProjectionMatrix:
    """Riesz projection of the mode-``ell`` generator for a circular contour.

    ``contour`` selects the circle: ``"unstable"`` (center 1/2, radius 3/4),
    ``"zero"`` (center 0, radius 1/2) or ``"one"`` (center 1, radius 1/2).
    ``method="contour"`` applies the trapezoid rule starting from 64 nodes and
    doubling until the matrix changes by at most 1e-9; ``"eigenvectors"`` sums
    biorthogonal rank-one projectors of the enclosed eigenvalues.
    """
    if g.N < 8:
        raise ValueError("grid too coarse")
    center, radius = CONTOURS[contour]
    M = build_generator(ell, g, with_potential)
    hist = ()
    if method == "contour":
        Pw, hist = _contour_projection(M.matrix_w, center, radius)
    elif method == "eigenvectors":
        Pw = _eig_projection(M.matrix_w, center, radius)
    else:
        raise ValueError(f"unknown method {method!r}")
    s = _scaling(g, ell)
    P = s[:, None] * Pw / s[None, :]
    rank = int(round(float(np.trace(Pw))))
    P.setflags(write=False)
    return ProjectionMatrix(ell, P, rank, method, hist)


def unstable_rank_total(g: RadialGrid, method: str = "eigenvectors") -> int:
    """Rank of the projection over all modes: the ``l = 0`` block plus three ``l = 1`` blocks (m = -1, 0, 1)."""
    r0 = spectral_projection(0, g, method).rank
    r1 = spectral_projection(1, g, method).rank
    return r0 + 3 * r1


@lru_cache(maxsize=16)
def _eig_data(N: int, ell: int):
    # eigenvector (1,2) rho^ell and the matching left eigenvector on the grid
    M = build_generator(ell, grid(N), True)
    lam = 1.0 if ell == 0 else 0.0
    ev, vl, vr = sla.eig(M.matrix_w, left=True, right=True)
    k = int(np.argmin(np.abs(ev - lam)))
    g = grid(N)
    v = np.concatenate([np.ones(N), 2.0 * np.ones(N)]) * _scaling(g, ell)
    # left eigenvector in u variables: w_u = w_w / s
    wl = np.real(vl[:, k] / np.max(np.abs(vl[:, k]))) / _scaling(g, ell)
    return v, wl, float(np.real(ev[k]))


def unstable_mode(ell: int, g: RadialGrid):
    """Right eigenvector ``rho^l (1, 2)`` and the grid left eigenvector for the unstable eigenvalue.

    Returns ``(v, w, lam_h)`` with ``P x = (w . x)/(w . v) v``.
    """
    if ell not in (0, 1):
        raise ValueError("unstable eigenvalues exist only for ell = 0, 1")
    return _eig_data(g.N, ell)


# decay of the linear flow -----------------------------------------------------


def polynomial_field(ell: int, g: RadialGrid, rng, degree: int = 5, scale: float = 1.0) -> ModeField:
    """Random smooth field ``rho^l sum_k c_k rho^{2k}`` in both components."""
    c1 = rng.standard_normal(degree + 1) * scale
    c2 = rng.standard_normal(degree + 1) * scale
    r2 = g.rho**2
    w1 = np.polyval(c1[::-1], r2)
    w2 = np.polyval(c2[::-1], r2)
    return ModeField(ell, g.rho**ell * w1, g.rho**ell * w2)


def subspace_decay_bound(ell: int, g: RadialGrid, tau_max: float = 5.0, part: str = "stable",
                         seed: int = 1234, n_data: int = 4, dtau: float | None = None,
                         fit_window=(1.0, None)) -> dict:
    """Fit ``log ||S(tau) f||`` for pinned random data projected by ``1 - P`` or ``P``.

    Returns the worst (largest) fitted slope over the data set, the slopes and
    fitted prefactors.
    """
    from .evolution import evolve_linear, measure_decay_rate

    if tau_max < 3:
        raise ValueError("tau_max must be at least 3")
    M = build_generator(ell, g, True)
    P = spectral_projection(ell, g, "eigenvectors").matrix
    rng = np.random.default_rng(seed)
    slopes, prefs = [], []
    for _ in range(n_data):
        f = polynomial_field(ell, g, rng)
        x = f.vector
        x = x - P @ x if part == "stable" else P @ x
        if energy_norm(x, g, ell) == 0.0:
            continue
        traj = evolve_linear(ModeField.from_vector(ell, x), M, dtau=dtau, tau_end=tau_max)
        w0 = fit_window[0]
        w1 = fit_window[1] if fit_window[1] is not None else tau_max
        fit = measure_decay_rate(traj, (w0, w1))
        slopes.append(fit.slope)
        prefs.append(math.exp(fit.intercept) / energy_norm(x, g, ell))
    return {"slope": max(slopes), "slopes": slopes, "prefactors": prefs}
