"""Gamma and Gauss hypergeometric kernels for the radial mode solutions.

The radial spectral ODE for mode ``l`` reduces, with ``u(rho) = rho^l v(rho^2)``,
to the hypergeometric equation in ``z = rho^2`` with ``c = l + 3/2`` and

* ``a = (l + lam - 1)/2``, ``b = (l + lam + 4)/2`` for the generator with the
  linearized potential (``family="potential"``);
* ``a = (l + lam + 1)/2``, ``b = (l + lam + 2)/2`` for the free generator
  (``family="free"``); at ``lam = 1/2`` this is the degenerate elliptic family.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass
from importlib import resources

import numpy as np

from . import kernels

SERIES_RADIUS = 0.6
# c - a - b closer than this to an integer makes the 1-z connection ill-conditioned
_INTEGER_GAP = 0.05
# the connection terms may cancel for large parameters; beyond this the ODE route is used
_MAX_CANCELLATION = 4.0


class PoleError(ValueError):
    """Gamma evaluated at a nonpositive integer."""


class ParameterError(ValueError):
    """Hypergeometric parameters outside the supported set."""


class ConvergenceError(ArithmeticError):
    """A series did not reach working precision."""


def _load_lanczos():
    with resources.files("hyperwave").joinpath("data/lanczos.json").open() as fh:
        d = json.load(fh)
    return float(d["g"]), tuple(float(c) for c in d["coefficients"])


LANCZOS_G, LANCZOS_COEF = _load_lanczos()
_SQRT2PI = math.sqrt(2.0 * math.pi)


def _is_nonpos_int(z) -> bool:
    z = complex(z)
    return z.imag == 0.0 and z.real <= 0.0 and z.real == math.floor(z.real)


def _sinpi(z):
    # sin(pi z) with the argument reduced to |Re| <= 1/2 first
    n = round(z.real)
    s = cmath.sin(math.pi * (z - n))
    return -s if n % 2 else s


def _lanczos(z):
    # Gamma(z) for Re z >= 1/2
    z = z - 1.0
    x = LANCZOS_COEF[0]
    for i in range(1, len(LANCZOS_COEF)):
        x += LANCZOS_COEF[i] / (z + i)
    t = z + LANCZOS_G + 0.5
    return _SQRT2PI * cmath.exp((z + 0.5) * cmath.log(t) - t) * x


def gamma(z):
    """Gamma function (Lanczos, g = 7) with reflection for ``Re z < 1/2``.

    Returns a Python float for real input and a complex otherwise.
    """
    real = not isinstance(z, complex) and not np.iscomplexobj(z)
    zc = complex(z)
    if _is_nonpos_int(zc):
        raise PoleError(f"Gamma has a pole at z = {zc.real:g}")
    if zc.real < 0.5:
        g = math.pi / (_sinpi(zc) * _lanczos(1.0 - zc))
    else:
        g = _lanczos(zc)
    return g.real if real else g


def recip_gamma(z):
    """Entire function ``1/Gamma(z)``; exactly zero at the poles of Gamma."""
    real = not isinstance(z, complex) and not np.iscomplexobj(z)
    zc = complex(z)
    if _is_nonpos_int(zc):
        return 0.0 if real else 0j
    if zc.real < 0.5:
        r = _sinpi(zc) * _lanczos(1.0 - zc) / math.pi
    else:
        r = 1.0 / _lanczos(zc)
    return r.real if real else r


@dataclass(frozen=True)
class HypParams:
    a: complex
    b: complex
    c: complex

    def __call__(self, z):
        return hyp2f1(self.a, self.b, self.c, z)


def _terminating_order(a, b):
    # degree of the polynomial when a or b is a nonpositive integer, else None
    ns = [int(-complex(p).real) for p in (a, b) if _is_nonpos_int(p)]
    return min(ns) if ns else None


def _poly(a, b, c, z, n):
    s = 1.0 + 0.0j
    t = 1.0 + 0.0j
    for k in range(n):
        t *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z
        s += t
    return s


def _series(a, b, c, z):
    val, n = kernels.hyp_series(complex(a), complex(b), complex(c), complex(z))
    if n >= 20000:
        raise ConvergenceError(f"2F1 series did not converge at z = {z}")
    return val


def _connection(a, b, c, z):
    # DLMF 15.8.4: expansion about z = 1; also returns the cancellation ratio
    w = 1.0 - z
    s = c - a - b
    g1 = gamma(c) * gamma(s) * recip_gamma(c - a) * recip_gamma(c - b)
    g2 = gamma(c) * gamma(-s) * recip_gamma(a) * recip_gamma(b)
    t1 = g1 * _series(a, b, 1.0 - s, w) if g1 != 0 else 0.0
    t2 = g2 * cmath.exp(s * cmath.log(w)) * _series(c - a, c - b, 1.0 + s, w) if g2 != 0 else 0.0
    tot = t1 + t2
    ratio = (abs(t1) + abs(t2)) / abs(tot) if tot != 0 else math.inf
    return tot, ratio


def _continuation(a, b, c, z, with_derivative=False):
    # integrate the ODE along a straight path from a point where the series is cheap
    z = complex(z)
    z0 = 0.5 * z / abs(z)
    f = _series(a, b, c, z0)
    df = a * b / c * _series(a + 1, b + 1, c + 1, z0)
    while True:
        rem = z - z0
        radius = min(abs(z0), abs(1.0 - z0))
        if abs(rem) <= 0.5 * radius:
            dz = rem
        else:
            dz = rem / abs(rem) * 0.5 * radius
        f, df, n = kernels.taylor_step(a, b, c, z0, f, df, dz)
        if n >= 4000:
            raise ConvergenceError(f"ODE continuation stalled at z = {z0}")
        z0 = z0 + dz
        if dz == rem:
            break
    return (f, df) if with_derivative else f


def hyp2f1(a, b, c, z):
    """Gauss hypergeometric function ``2F1(a, b; c; z)``.

    Real ``z < 1`` and complex ``|z| < 1`` are supported. The evaluation route
    is chosen from the argument:

    * ``z = 0`` gives 1; a nonpositive integer ``a`` or ``b`` gives a polynomial;
    * ``|z| <= 0.6``: direct series;
    * ``Re z < 0`` outside that disc: Pfaff transformation onto ``(0, 1)``;
    * real ``z`` in ``(0.6, 1)``: connection formula to ``1 - z`` unless
      ``c - a - b`` is within 0.05 of an integer or the two connection terms
      cancel by more than a factor 4, in which cases the ODE is continued
      from ``z = 1/2`` by local Taylor series;
    * other complex ``z``: ODE continuation.

    The result is a float when every input is real.
    """
    real = all(not isinstance(p, complex) and not np.iscomplexobj(p) for p in (a, b, c, z))
    a, b, c, z = complex(a), complex(b), complex(c), complex(z)
    if _is_nonpos_int(c):
        raise ParameterError(f"c = {c.real:g} is a nonpositive integer")
    val = _hyp2f1(a, b, c, z)
    if real:
        return val.real
    return val


def _hyp2f1(a, b, c, z):
    if z == 0:
        return 1.0 + 0.0j
    n = _terminating_order(a, b)
    if n is not None:
        return _poly(a, b, c, z, n)
    if abs(z) >= 1.0 and not z.real < 0:
        raise ConvergenceError(f"z = {z} is outside the supported region")
    if abs(z) <= SERIES_RADIUS:
        return _series(a, b, c, z)
    if z.real < 0:
        # Pfaff: F(a,b;c;z) = (1-z)^-a F(a, c-b; c; z/(z-1))
        return cmath.exp(-a * cmath.log(1.0 - z)) * _hyp2f1(a, c - b, c, z / (z - 1.0))
    if z.imag == 0.0:
        s = c - a - b
        if abs(s.imag) > 0 or abs(s.real - round(s.real)) > _INTEGER_GAP:
            val, ratio = _connection(a, b, c, z)
            if ratio <= _MAX_CANCELLATION:
                return val
    return _continuation(a, b, c, z)


def hyp2f1_deriv(a, b, c, z):
    """``d/dz 2F1(a, b; c; z) = (ab/c) 2F1(a+1, b+1; c+1; z)``."""
    return a * b / c * hyp2f1(a + 1, b + 1, c + 1, z)


# mode families --------------------------------------------------------------

FAMILIES = ("potential", "free")


def family_params(ell: int, lam, family: str = "potential") -> HypParams:
    """Hypergeometric parameters of the mode-``ell`` spectral ODE at ``lam``."""
    if ell < 0 or int(ell) != ell:
        raise ValueError(f"ell must be a nonnegative integer, got {ell}")
    lam = complex(lam) if isinstance(lam, complex) else float(lam)
    if family == "potential":
        a = 0.5 * (ell + lam - 1.0)
        b = 0.5 * (ell + lam + 4.0)
    elif family == "free":
        a = 0.5 * (ell + lam + 1.0)
        b = 0.5 * (ell + lam + 2.0)
    else:
        raise ValueError(f"unknown family {family!r}")
    return HypParams(a, b, ell + 1.5)


def _vec(fun, z):
    z = np.asarray(z)
    if z.ndim == 0:
        return fun(z.item())
    vals = [fun(zz) for zz in z.ravel()]
    return np.array(vals).reshape(z.shape)


def phi0(ell, lam, z, family="potential"):
    """Solution analytic at ``z = 0``: ``2F1(a, b; c; z)``."""
    p = family_params(ell, lam, family)
    return _vec(lambda zz: hyp2f1(p.a, p.b, p.c, zz), z)


def phi1(ell, lam, z, family="potential"):
    """Solution analytic at ``z = 1``: ``2F1(a, b; a + b + 1 - c; 1 - z)``."""
    p = family_params(ell, lam, family)
    c1 = p.a + p.b + 1.0 - p.c
    return _vec(lambda zz: hyp2f1(p.a, p.b, c1, 1.0 - zz), z)


def phi0_tilde(ell, lam, z, family="potential"):
    """Second solution at ``z = 0``: ``z^(1-c) 2F1(a-c+1, b-c+1; 2-c; z)``."""
    p = family_params(ell, lam, family)

    def f(zz):
        return zz ** (1.0 - p.c) * hyp2f1(p.a - p.c + 1.0, p.b - p.c + 1.0, 2.0 - p.c, zz)

    return _vec(f, z)


def _log_solution(a, b, w, maxiter=200000):
    # second solution at w = 0 of the hypergeometric equation with c = 1:
    # F(a,b;1;w) log w + sum_n d/da,d/db corrections (DLMF 15.10.8, c = 1 case).
    # A = (a)_n / n!, dA = d/da (a)_n / n! (likewise for b), so nothing overflows.
    A, B = 1.0, 1.0
    dA, dB = 0.0, 0.0
    H = 0.0
    wn = 1.0
    F = 1.0
    G = 0.0
    for n in range(maxiter):
        dA = (dA * (a + n) + A) / (n + 1)
        dB = (dB * (b + n) + B) / (n + 1)
        A *= (a + n) / (n + 1)
        B *= (b + n) / (n + 1)
        H += 1.0 / (n + 1)
        wn *= w
        tF = A * B * wn
        tG = (dA * B + A * dB - 2.0 * A * B * H) * wn
        F += tF
        G += tG
        if abs(tF) <= 1e-17 * max(abs(F), 1e-300) and abs(tG) <= 1e-17 * max(abs(G), 1e-300):
            if n > 2:
                break
    else:
        raise ConvergenceError(f"logarithmic series did not converge at w = {w}")
    return F * math.log(w) + G


def phi1_tilde(ell, lam, z, family="potential"):
    """Second solution at ``z = 1``.

    For ``c - a - b`` not an integer this is
    ``(1-z)^(c-a-b) 2F1(c-a, c-b; c-a-b+1; 1-z)``. When ``c - a - b = 0``
    (``lam = 0`` for the potential family) it is the logarithmic solution,
    which behaves like ``log(1 - z)`` at ``z = 1``. Normalization constants
    relating this to ``phi0`` are left unassigned.
    """
    p = family_params(ell, lam, family)
    s = p.c - p.a - p.b
    sc = complex(s)
    if sc.imag == 0 and sc.real == round(sc.real):
        if round(sc.real) != 0:
            raise ParameterError(f"c - a - b = {sc.real:g}: only the c - a - b = 0 log case is supported")
        a, b = float(np.real(p.a)), float(np.real(p.b))
        return _vec(lambda zz: _log_solution(a, b, 1.0 - zz), z)

    def f(zz):
        w = 1.0 - zz
        return w**s * hyp2f1(p.c - p.a, p.c - p.b, s + 1.0, w)

    return _vec(f, z)


def phi1_elementary(ell: int, z, return_flag: bool = False):
    """Closed form of ``phi1`` for the free family at ``lam = 1/2``.

    ``[(1 - s)^-p - (1 + s)^-p] / ((2l + 1) s)`` with ``s = sqrt(1 - z)`` and
    ``p = l + 1/2``. Values beyond 1e300 saturate at 1e300; with
    ``return_flag=True`` a boolean overflow flag (array for array input) is
    returned as well.
    """
    zz = np.asarray(z, dtype=float)
    if np.any((zz <= 0) | (zz >= 1)):
        raise ValueError("phi1_elementary needs z in (0, 1)")
    s = np.sqrt(1.0 - zz)
    p = ell + 0.5
    A = -p * np.log1p(-s)
    Bv = -p * np.log1p(s)
    # e^A - e^B = 2 e^((A+B)/2) sinh((A-B)/2), evaluated in logs
    with np.errstate(over="ignore"):
        logmag = 0.5 * (A + Bv) + np.log(2.0 * np.sinh(0.5 * (A - Bv)) / ((2 * ell + 1) * s))
    flag = logmag > math.log(1e300)
    val = np.where(flag, 1e300, np.exp(np.minimum(logmag, math.log(1e300))))
    if zz.ndim == 0:
        val = float(val)
        flag = bool(flag)
    return (val, flag) if return_flag else val


def wronskian_constant(ell: int) -> float:
    """``c_l = -2^(l + 1/2)``, the value of ``rho^2 (1-rho^2)^(3/2) W(psi0, psi1)``."""
    if ell < 0:
        raise ValueError("ell must be nonnegative")
    return -(2.0 ** (ell + 0.5))


def phi0_boundary_limit(ell: int) -> float:
    """``lim_{z->1} (1-z)^(1/2) phi0(z) = 2^(l + 1/2)`` for the degenerate family."""
    if ell < 0:
        raise ValueError("ell must be nonnegative")
    return 2.0 ** (ell + 0.5)


# rho-form mode solutions ----------------------------------------------------


@dataclass(frozen=True)
class ModeSolution:
    """``psi(rho) = rho^l phi(rho^2)`` for one of the four fundamental solutions."""

    ell: int
    lam: complex
    kind: str = "phi0"
    family: str = "potential"

    _kinds = ("phi0", "phi1", "phi0_tilde", "phi1_tilde")

    def __post_init__(self):
        if self.kind not in self._kinds:
            raise ValueError(f"kind must be one of {self._kinds}")

    def phi(self, z):
        f = {"phi0": phi0, "phi1": phi1, "phi0_tilde": phi0_tilde, "phi1_tilde": phi1_tilde}[self.kind]
        return f(self.ell, self.lam, z, self.family)

    def __call__(self, rho):
        rho = np.asarray(rho, dtype=float)
        return rho**self.ell * self.phi(rho * rho)

    def derivative(self, rho):
        """``psi'(rho)``; analytic for ``phi0`` and ``phi1``."""
        rho = np.asarray(rho, dtype=float)
        p = family_params(self.ell, self.lam, self.family)
        if self.kind == "phi0":
            dphi = _vec(lambda zz: hyp2f1_deriv(p.a, p.b, p.c, zz), rho * rho)
        elif self.kind == "phi1":
            c1 = p.a + p.b + 1.0 - p.c
            dphi = -_vec(lambda zz: hyp2f1_deriv(p.a, p.b, c1, 1.0 - zz), rho * rho)
        else:
            raise NotImplementedError("analytic derivative only for phi0 and phi1")
        return 2.0 * rho ** (self.ell + 1) * dphi + self.ell * rho ** (self.ell - 1.0) * self.phi(rho * rho)


def wronskian(ell, lam, rho, family="potential"):
    """``W(psi0, psi1)(rho) = psi0 psi1' - psi0' psi1`` from the analytic derivatives."""
    p0 = ModeSolution(ell, lam, "phi0", family)
    p1 = ModeSolution(ell, lam, "phi1", family)
    return p0(rho) * p1.derivative(rho) - p0.derivative(rho) * p1(rho)


def wronskian_measured(ell, rho, method="analytic", h=1e-4):
    """``rho^2 (1-rho^2)^(3/2) W(psi0, psi1)`` for the degenerate family.

    ``method="analytic"`` differentiates through the hypergeometric derivative
    identity; ``method="fd"`` uses 4th-order central differences of step ``h``.
    """
    rho = np.asarray(rho, dtype=float)
    if method == "analytic":
        W = wronskian(ell, 0.5, rho, family="free")
    elif method == "fd":
        psi0 = ModeSolution(ell, 0.5, "phi0", "free")
        psi1 = ModeSolution(ell, 0.5, "phi1", "free")

        def d(f, r):
            return (f(r - 2 * h) - 8 * f(r - h) + 8 * f(r + h) - f(r + 2 * h)) / (12 * h)

        W = psi0(rho) * d(psi1, rho) - d(psi0, rho) * psi1(rho)
    else:
        raise ValueError(f"unknown method {method!r}")
    return rho**2 * (1 - rho**2) ** 1.5 * W


def gamma_boundary_limit(ell: int) -> float:
    """``Gamma(l + 3/2) Gamma(1/2) / (Gamma((3+2l)/4) Gamma((5+2l)/4))``."""
    return gamma(ell + 1.5) * gamma(0.5) / (gamma((3 + 2 * ell) / 4) * gamma((5 + 2 * ell) / 4))


def _neville(x, y, x0=0.0):
    # polynomial extrapolation of the samples (x, y) to x0
    p = np.array(y, dtype=float)
    x = np.asarray(x, dtype=float)
    n = len(x)
    for m in range(1, n):
        p[: n - m] = ((x0 - x[m:]) * p[: n - m] + (x[: n - m] - x0) * p[1 : n - m + 1]) / (x[: n - m] - x[m:])
    return p[0]


def boundary_limit_extrapolated(ell: int, s0: float = 0.05, levels: int = 6) -> float:
    """Extrapolate ``(1-z)^(1/2) phi0(z)`` (degenerate family) to ``z = 1``.

    The product is smooth in ``s = sqrt(1 - z)``; samples at ``s0 / 2^k`` are
    extrapolated to ``s = 0`` with Neville's scheme.
    """
    s = s0 / 2.0 ** np.arange(levels)
    z = 1.0 - s * s
    y = s * phi0(ell, 0.5, z, "free")
    return float(_neville(s, y))
