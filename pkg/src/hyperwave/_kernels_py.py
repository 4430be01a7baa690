"""Pure-Python reference implementations of the hot loops.

The compiled module ``_kernels`` exposes the same functions with the same
signatures; :mod:`hyperwave.kernels` picks one at import time.
"""

import numpy as np

BACKEND = "python"


def hyp_series(a, b, c, z, maxiter=20000):
    """Partial sums of the Gauss series until the terms stop mattering.

    Returns ``(value, nterms)``. ``nterms == maxiter`` signals non-convergence.
    """
    a = complex(a)
    b = complex(b)
    c = complex(c)
    z = complex(z)
    s = 1.0 + 0.0j
    t = 1.0 + 0.0j
    small = 0
    for n in range(maxiter):
        t *= (a + n) * (b + n) / ((c + n) * (n + 1.0)) * z
        s += t
        if t == 0:
            return s, n + 1
        if abs(t) <= 1e-17 * abs(s):
            small += 1
            if small >= 3:
                return s, n + 1
        else:
            small = 0
    return s, maxiter


def taylor_step(a, b, c, z0, f0, df0, dz, maxiter=4000):
    """Advance ``(F, F')`` of the hypergeometric ODE from ``z0`` to ``z0 + dz``.

    Sums the local power series of the ODE solution about ``z0`` in the scaled
    coefficients ``e_k = c_k dz^k``; ``|dz|`` must be below the distance from
    ``z0`` to the singular points 0 and 1. Returns ``(F, F', nterms)``.
    """
    a = complex(a)
    b = complex(b)
    c = complex(c)
    z0 = complex(z0)
    h = complex(dz)
    A = z0 * (1.0 - z0)
    B = 1.0 - 2.0 * z0
    C = c - (a + b + 1.0) * z0
    D = -(a + b + 1.0)
    ab = a * b
    ek = complex(f0)
    ek1 = complex(df0) * h
    f = ek + ek1
    g = ek1  # sum of k e_k, equals dz * F'
    small = 0
    for k in range(maxiter):
        ek2 = -((B * k * (k + 1) + C * (k + 1)) * h * ek1 + (-k * (k - 1) + D * k - ab) * h * h * ek) / (
            A * (k + 1) * (k + 2)
        )
        f += ek2
        g += (k + 2) * ek2
        if abs(ek2) <= 1e-17 * abs(f) and (k + 2) * abs(ek2) <= 1e-17 * abs(g):
            small += 1
            if small >= 3:
                return f, g / h, k + 1
        else:
            small = 0
        ek, ek1 = ek1, ek2
    return f, g / h, maxiter


def rk4_linear(M, u0, h, nsteps, save_every):
    """Classical RK4 for ``u' = M u``; returns the states at every ``save_every`` step."""
    M = np.ascontiguousarray(M, dtype=float)
    u = np.array(u0, dtype=float)
    nsave = nsteps // save_every + 1
    out = np.empty((nsave, u.size))
    out[0] = u
    j = 1
    h2 = 0.5 * h
    for n in range(1, nsteps + 1):
        k1 = M @ u
        k2 = M @ (u + h2 * k1)
        k3 = M @ (u + h2 * k2)
        k4 = M @ (u + h * k3)
        u = u + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if n % save_every == 0:
            out[j] = u
            j += 1
    return out


def _rhs_cubic(M, Ac, u, n, c2, c3):
    # derivative blocks act on u minus its value at rho = 1, so constant
    # states see exact zeros; Ac holds the exact images of the block constants
    a1 = u[0]
    a2 = u[n]
    v = u.copy()
    v[:n] -= a1
    v[n:] -= a2
    r = M @ v + a1 * Ac[:, 0] + a2 * Ac[:, 1]
    p = u[:n]
    r[n:] += p * p * (c2 + c3 * p)
    return r


def rk4_cubic(M, Ac, u0, h, nsteps, save_every, c2, c3, guard):
    """RK4 for ``u' = M u + (0, c2 u1^2 + c3 u1^3)`` with a blowup guard.

    ``Ac`` (shape ``(2n, 2)``) is the exact action of ``M`` on the constant
    vectors ``(1, 0)`` and ``(0, 1)``. Returns ``(states, nsteps_taken, blown)``.
    Integration stops at the first step after which ``max |u1|`` exceeds
    ``guard`` or becomes non-finite; the offending state is stored as the last
    saved row.
    """
    M = np.ascontiguousarray(M, dtype=float)
    Ac = np.ascontiguousarray(Ac, dtype=float)
    u = np.array(u0, dtype=float)
    n = u.size // 2
    nsave = nsteps // save_every + 1
    # one spare row for a guard trip after the last regular save
    out = np.empty((nsave + 1, u.size))
    out[0] = u
    j = 1
    h2 = 0.5 * h
    for step in range(1, nsteps + 1):
        k1 = _rhs_cubic(M, Ac, u, n, c2, c3)
        k2 = _rhs_cubic(M, Ac, u + h2 * k1, n, c2, c3)
        k3 = _rhs_cubic(M, Ac, u + h2 * k2, n, c2, c3)
        k4 = _rhs_cubic(M, Ac, u + h * k3, n, c2, c3)
        u = u + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        m = np.max(np.abs(u[:n]))
        if not (m <= guard):
            out[j] = u
            return out[: j + 1], step, True
        if step % save_every == 0:
            out[j] = u
            j += 1
    return out[:nsave], nsteps, False


def rk4_forced(M, u0, h, F_full, F_half):
    """RK4 for ``u' = M u + f(tau)`` with forcing sampled at steps and half steps.

    ``F_full[k]`` is ``f(k h)`` and ``F_half[k]`` is ``f((k + 1/2) h)``.
    Returns every state, shape ``(nsteps + 1, dim)``.
    """
    M = np.ascontiguousarray(M, dtype=float)
    u = np.array(u0, dtype=float)
    nsteps = F_half.shape[0]
    out = np.empty((nsteps + 1, u.size))
    out[0] = u
    h2 = 0.5 * h
    for k in range(nsteps):
        k1 = M @ u + F_full[k]
        k2 = M @ (u + h2 * k1) + F_half[k]
        k3 = M @ (u + h2 * k2) + F_half[k]
        k4 = M @ (u + h * k3) + F_full[k + 1]
        u = u + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[k + 1] = u
    return out
