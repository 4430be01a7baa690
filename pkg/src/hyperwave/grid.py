"""Parity-folded Chebyshev collocation on the radial interval (0, 1].

The full Chebyshev-Gauss-Lobatto grid with ``2N`` points on ``[-1, 1]`` is
symmetric about the origin and never contains it. Keeping the ``N`` positive
nodes and folding the differentiation matrices by parity gives exact
differentiation of even or odd polynomials of degree below ``2N`` without a
node at ``rho = 0``. Node 0 is ``rho = 1``.
"""

from __future__ import annotations

from functools import cached_property

import numpy as np


def cheb(n: int):
    """Chebyshev-Gauss-Lobatto nodes ``cos(pi j / n)`` with first and second
    differentiation matrices.

    Node differences use the trigonometric identity and diagonals the
    negative-sum trick, which keeps rounding error near ``n^2 eps``.
    """
    j = np.arange(n + 1)
    th = np.pi * j / n
    x = np.sin(np.pi * (n - 2 * j) / (2 * n))
    c = np.hstack([2.0, np.ones(n - 1), 2.0]) * (-1.0) ** j
    dX = 2.0 * np.sin(0.5 * (th[None, :] + th[:, None])) * np.sin(0.5 * (th[None, :] - th[:, None]))
    off = ~np.eye(n + 1, dtype=bool)
    D = np.zeros((n + 1, n + 1))
    D[off] = (np.outer(c, 1.0 / c))[off] / dX[off]
    D[np.diag_indices(n + 1)] = -D.sum(axis=1)
    D2 = np.zeros_like(D)
    inv = np.zeros_like(D)
    inv[off] = 1.0 / dX[off]
    D2[off] = 2.0 * D[off] * (np.repeat(np.diag(D)[:, None], n + 1, axis=1)[off] - inv[off])
    D2[np.diag_indices(n + 1)] = -D2.sum(axis=1)
    return x, D, D2


def clenshaw_curtis(n: int) -> np.ndarray:
    """Clenshaw-Curtis weights on the ``n + 1`` nodes ``cos(pi j / n)``."""
    theta = np.pi * np.arange(n + 1) / n
    w = np.zeros(n + 1)
    v = np.ones(n - 1)
    ii = np.arange(1, n)
    if n % 2 == 0:
        w[0] = w[n] = 1.0 / (n * n - 1)
        for k in range(1, n // 2):
            v -= 2.0 * np.cos(2 * k * theta[ii]) / (4 * k * k - 1)
        v -= np.cos(n * theta[ii]) / (n * n - 1)
    else:
        w[0] = w[n] = 1.0 / (n * n)
        for k in range(1, (n - 1) // 2 + 1):
            v -= 2.0 * np.cos(2 * k * theta[ii]) / (4 * k * k - 1)
    w[ii] = 2.0 * v / n
    return w


class RadialGrid:
    """Collocation grid on ``(0, 1]`` with ``N`` nodes, ``rho[0] = 1``.

    Attributes
    ----------
    rho : ndarray
        Nodes, decreasing from 1.
    w : ndarray
        Weights for ``int_0^1 f drho`` of even integrands.
    w2 : ndarray
        Weights for ``int_0^1 f rho^2 drho`` of even integrands.
    """

    def __init__(self, N: int):
        if int(N) != N or N < 8:
            raise ValueError(f"N must be an integer >= 8, got {N}")
        self.N = int(N)
        n = 2 * self.N - 1
        x, D, D2 = cheb(n)
        self._x_full = x
        self._D = D
        self._D2 = D2
        self.rho = x[: self.N].copy()
        wf = clenshaw_curtis(n)
        self.w = wf[: self.N].copy()
        self.w2 = self.w * self.rho**2

    def __eq__(self, other):
        return isinstance(other, RadialGrid) and other.N == self.N

    def __hash__(self):
        return hash(("RadialGrid", self.N))

    def __repr__(self):
        return f"RadialGrid(N={self.N})"

    def _fold(self, A, parity):
        N = self.N
        idx = np.arange(N)
        mir = 2 * N - 1 - idx
        return A[:N][:, idx] + parity * A[:N][:, mir]

    @cached_property
    def De(self):
        return self._fold(self._D, 1)

    @cached_property
    def Do(self):
        return self._fold(self._D, -1)

    @cached_property
    def D2e(self):
        return self._fold(self._D2, 1)

    @cached_property
    def D2o(self):
        return self._fold(self._D2, -1)

    def D(self, parity: int) -> np.ndarray:
        """First derivative of a function with the given parity (+1 even, -1 odd)."""
        return self.De if parity > 0 else self.Do

    def D2(self, parity: int) -> np.ndarray:
        return self.D2e if parity > 0 else self.D2o

    def integrate(self, f) -> complex:
        """``int_0^1 f rho^2 drho`` for grid values of an even integrand."""
        return np.dot(self.w2, f)

    def interp(self, values, r, parity: int = 1):
        """Barycentric interpolation at points ``r`` in ``[0, 1]``.

        ``values`` may carry trailing axes (interpolated along the first).
        """
        values = np.asarray(values)
        r = np.atleast_1d(np.asarray(r, dtype=float))
        full = np.concatenate([values, parity * values[::-1]], axis=0)
        x = self._x_full
        n = x.size - 1
        c = (-1.0) ** np.arange(n + 1)
        c[0] *= 0.5
        c[-1] *= 0.5
        diff = r[:, None] - x[None, :]
        exact = diff == 0.0
        diff[exact] = 1.0
        k = c[None, :] / diff
        out = (k @ full.reshape(n + 1, -1)) / k.sum(axis=1)[:, None]
        hit_rows, hit_cols = np.nonzero(exact)
        out[hit_rows] = full.reshape(n + 1, -1)[hit_cols]
        return out.reshape((r.size,) + values.shape[1:])

    def parity_for(self, ell: int) -> int:
        return 1 if ell % 2 == 0 else -1
