# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops; same functions and signatures as ``_kernels_py``.

Matrix-vector products go through BLAS ``dgemv`` (row-major ``M`` is passed
as its column-major transpose); the series loops run on C doubles.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, isfinite
from scipy.linalg.cython_blas cimport dgemv

cnp.import_array()

BACKEND = "cython"


cdef inline double cabs_(double complex z) nogil:
    return (z.real * z.real + z.imag * z.imag) ** 0.5


def hyp_series(a, b, c, z, int maxiter=20000):
    """Partial sums of the Gauss series; returns ``(value, nterms)``."""
    cdef double complex ca = complex(a), cb = complex(b), cc = complex(c), cz = complex(z)
    cdef double complex s = 1.0, t = 1.0
    cdef int n, small = 0
    cdef double dn
    for n in range(maxiter):
        dn = n
        t *= (ca + dn) * (cb + dn) / ((cc + dn) * (dn + 1.0)) * cz
        s += t
        if t == 0:
            return complex(s), n + 1
        if cabs_(t) <= 1e-17 * cabs_(s):
            small += 1
            if small >= 3:
                return complex(s), n + 1
        else:
            small = 0
    return complex(s), maxiter


def taylor_step(a, b, c, z0, f0, df0, dz, int maxiter=4000):
    """Advance ``(F, F')`` of the hypergeometric ODE by ``dz``; returns ``(F, F', nterms)``."""
    cdef double complex ca = complex(a), cb = complex(b), cc = complex(c)
    cdef double complex cz0 = complex(z0), h = complex(dz)
    cdef double complex A = cz0 * (1.0 - cz0)
    cdef double complex B = 1.0 - 2.0 * cz0
    cdef double complex C = cc - (ca + cb + 1.0) * cz0
    cdef double complex D = -(ca + cb + 1.0)
    cdef double complex ab = ca * cb
    cdef double complex ek = complex(f0)
    cdef double complex ek1 = complex(df0) * h
    cdef double complex ek2
    cdef double complex f = ek + ek1
    cdef double complex g = ek1
    cdef int k, small = 0
    cdef double dk
    for k in range(maxiter):
        dk = k
        ek2 = -((B * dk * (dk + 1) + C * (dk + 1)) * h * ek1 + (-dk * (dk - 1) + D * dk - ab) * h * h * ek) / (
            A * (dk + 1) * (dk + 2)
        )
        f += ek2
        g += (dk + 2) * ek2
        if cabs_(ek2) <= 1e-17 * cabs_(f) and (dk + 2) * cabs_(ek2) <= 1e-17 * cabs_(g):
            small += 1
            if small >= 3:
                return complex(f), complex(g / h), k + 1
        else:
            small = 0
        ek = ek1
        ek1 = ek2
    return complex(f), complex(g / h), maxiter


cdef inline void matvec(const double[:, ::1] M, double* x, double* y) nogil:
    # y = M x for a C-contiguous square M
    cdef int n = M.shape[0], inc = 1
    cdef double one = 1.0, zero = 0.0
    cdef char trans = b"T"
    dgemv(&trans, &n, &n, &one, <double*> &M[0, 0], &n, x, &inc, &zero, y, &inc)


def rk4_linear(M, u0, double h, int nsteps, int save_every):
    """Classical RK4 for ``u' = M u``; returns the states at every ``save_every`` step."""
    cdef const double[:, ::1] Mv = np.ascontiguousarray(M, dtype=float)
    cdef cnp.ndarray[double, ndim=1] u_arr = np.array(u0, dtype=float)
    cdef int dim = u_arr.shape[0]
    cdef int nsave = nsteps // save_every + 1
    out_arr = np.empty((nsave, dim))
    cdef double[:, ::1] out = out_arr
    cdef double[::1] u = u_arr
    cdef double[:, ::1] work = np.empty((5, dim))
    cdef double* k1 = &work[0, 0]
    cdef double* k2 = &work[1, 0]
    cdef double* k3 = &work[2, 0]
    cdef double* k4 = &work[3, 0]
    cdef double* tmp = &work[4, 0]
    cdef double h2 = 0.5 * h, h6 = h / 6.0
    cdef int n, i, j = 1
    out[0, :] = u
    with nogil:
        for n in range(1, nsteps + 1):
            matvec(Mv, &u[0], k1)
            for i in range(dim):
                tmp[i] = u[i] + h2 * k1[i]
            matvec(Mv, tmp, k2)
            for i in range(dim):
                tmp[i] = u[i] + h2 * k2[i]
            matvec(Mv, tmp, k3)
            for i in range(dim):
                tmp[i] = u[i] + h * k3[i]
            matvec(Mv, tmp, k4)
            for i in range(dim):
                u[i] = u[i] + h6 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
            if n % save_every == 0:
                out[j, :] = u
                j += 1
    return out_arr


cdef inline void rhs_cubic(const double[:, ::1] M, const double[:, ::1] Ac, double* u, double* v, double* r,
                           int n, double c2, double c3) nogil:
    cdef int i
    cdef double a1 = u[0], a2 = u[n], p
    for i in range(n):
        v[i] = u[i] - a1
        v[n + i] = u[n + i] - a2
    matvec(M, v, r)
    for i in range(2 * n):
        r[i] += a1 * Ac[i, 0] + a2 * Ac[i, 1]
    for i in range(n):
        p = u[i]
        r[n + i] += p * p * (c2 + c3 * p)


def rk4_cubic(M, Ac, u0, double h, int nsteps, int save_every, double c2, double c3, double guard):
    """RK4 for ``u' = M u + (0, c2 u1^2 + c3 u1^3)`` with a blowup guard.

    Returns ``(states, nsteps_taken, blown)``.
    """
    cdef const double[:, ::1] Mv = np.ascontiguousarray(M, dtype=float)
    cdef const double[:, ::1] Acv = np.ascontiguousarray(Ac, dtype=float)
    cdef cnp.ndarray[double, ndim=1] u_arr = np.array(u0, dtype=float)
    cdef int dim = u_arr.shape[0]
    cdef int n = dim // 2
    cdef int nsave = nsteps // save_every + 1
    # one spare row for a guard trip after the last regular save
    out_arr = np.empty((nsave + 1, dim))
    cdef double[:, ::1] out = out_arr
    cdef double[::1] u = u_arr
    cdef double[:, ::1] work = np.empty((6, dim))
    cdef double* k1 = &work[0, 0]
    cdef double* k2 = &work[1, 0]
    cdef double* k3 = &work[2, 0]
    cdef double* k4 = &work[3, 0]
    cdef double* tmp = &work[4, 0]
    cdef double* v = &work[5, 0]
    cdef double h2 = 0.5 * h, h6 = h / 6.0, m, a
    cdef int step, i, j = 1
    cdef bint blown = False
    out[0, :] = u
    with nogil:
        for step in range(1, nsteps + 1):
            rhs_cubic(Mv, Acv, &u[0], v, k1, n, c2, c3)
            for i in range(dim):
                tmp[i] = u[i] + h2 * k1[i]
            rhs_cubic(Mv, Acv, tmp, v, k2, n, c2, c3)
            for i in range(dim):
                tmp[i] = u[i] + h2 * k2[i]
            rhs_cubic(Mv, Acv, tmp, v, k3, n, c2, c3)
            for i in range(dim):
                tmp[i] = u[i] + h * k3[i]
            rhs_cubic(Mv, Acv, tmp, v, k4, n, c2, c3)
            m = 0.0
            for i in range(dim):
                u[i] = u[i] + h6 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
            for i in range(n):
                a = fabs(u[i])
                if not isfinite(a):
                    m = a
                    break
                if a > m:
                    m = a
            if not (m <= guard):
                out[j, :] = u
                blown = True
                break
            if step % save_every == 0:
                out[j, :] = u
                j += 1
    if blown:
        return out_arr[: j + 1], step, True
    return out_arr[:nsave], nsteps, False


def rk4_forced(M, u0, double h, F_full, F_half):
    """RK4 for ``u' = M u + f(tau)`` with forcing sampled at steps and half steps."""
    cdef const double[:, ::1] Mv = np.ascontiguousarray(M, dtype=float)
    cdef const double[:, ::1] Ff = np.ascontiguousarray(F_full, dtype=float)
    cdef const double[:, ::1] Fh = np.ascontiguousarray(F_half, dtype=float)
    cdef cnp.ndarray[double, ndim=1] u_arr = np.array(u0, dtype=float)
    cdef int dim = u_arr.shape[0]
    cdef int nsteps = Fh.shape[0]
    out_arr = np.empty((nsteps + 1, dim))
    cdef double[:, ::1] out = out_arr
    cdef double[::1] u = u_arr
    cdef double[:, ::1] work = np.empty((5, dim))
    cdef double* k1 = &work[0, 0]
    cdef double* k2 = &work[1, 0]
    cdef double* k3 = &work[2, 0]
    cdef double* k4 = &work[3, 0]
    cdef double* tmp = &work[4, 0]
    cdef double h2 = 0.5 * h, h6 = h / 6.0
    cdef int k, i
    out[0, :] = u
    with nogil:
        for k in range(nsteps):
            matvec(Mv, &u[0], k1)
            for i in range(dim):
                k1[i] += Ff[k, i]
                tmp[i] = u[i] + h2 * k1[i]
            matvec(Mv, tmp, k2)
            for i in range(dim):
                k2[i] += Fh[k, i]
                tmp[i] = u[i] + h2 * k2[i]
            matvec(Mv, tmp, k3)
            for i in range(dim):
                k3[i] += Fh[k, i]
                tmp[i] = u[i] + h * k3[i]
            matvec(Mv, tmp, k4)
            for i in range(dim):
                k4[i] += Ff[k + 1, i]
                u[i] = u[i] + h6 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
            out[k + 1, :] = u
    return out_arr
