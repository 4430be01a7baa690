import os
import subprocess
import sys

import numpy as np
import pytest

from hyperwave import kernels
from hyperwave.spectral import build_generator, grid

BACKENDS = kernels.available_backends()
needs_both = pytest.mark.skipif("cython" not in BACKENDS, reason="compiled backend not built")


def _rel(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300))


def test_backend_selected():
    assert kernels.BACKEND in BACKENDS
    assert "python" in BACKENDS


def test_env_forces_python():
    env = dict(os.environ, HYPERWAVE_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from hyperwave import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@needs_both
@pytest.mark.parametrize("args", [(0.5, 1.5, 2.5, 0.3 + 0.1j), (1.25, -0.75, 0.3, -0.55), (-3, 2.0, 1.5, 0.9)])
def test_hyp_series_parity(args):
    p, c = BACKENDS["python"].hyp_series(*args), BACKENDS["cython"].hyp_series(*args)
    assert p[1] == c[1]
    assert abs(p[0] - c[0]) <= 1e-14 * abs(p[0])


@needs_both
def test_taylor_step_parity():
    args = (1.25, 2.25, 1.5, 0.7 + 0.1j, 2.0, 3.0, 0.1)
    p, c = BACKENDS["python"].taylor_step(*args), BACKENDS["cython"].taylor_step(*args)
    assert p[2] == c[2]
    assert abs(p[0] - c[0]) <= 1e-14 * abs(p[0]) and abs(p[1] - c[1]) <= 1e-14 * abs(p[1])


@needs_both
@pytest.mark.parametrize("N", [16, 32])
def test_rk4_parity(N):
    rng = np.random.default_rng(N)
    M = build_generator(0, grid(N))
    u = 1e-2 * rng.standard_normal(2 * N)
    h = 1.0 / N**2
    py, cy = BACKENDS["python"], BACKENDS["cython"]
    assert _rel(cy.rk4_linear(M.matrix, u, h, 200, 7), py.rk4_linear(M.matrix, u, h, 200, 7)) <= 1e-13
    a = py.rk4_cubic(M.matrix, M.constant_images, u, h, 200, 7, 3 * np.sqrt(2), 1.0, 10.0)
    b = cy.rk4_cubic(M.matrix, M.constant_images, u, h, 200, 7, 3 * np.sqrt(2), 1.0, 10.0)
    assert a[1:] == b[1:] and a[0].shape == b[0].shape and _rel(b[0], a[0]) <= 1e-13
    Ff = rng.standard_normal((51, 2 * N))
    Fh = rng.standard_normal((50, 2 * N))
    assert _rel(cy.rk4_forced(M.matrix, u, h, Ff, Fh), py.rk4_forced(M.matrix, u, h, Ff, Fh)) <= 1e-13


def test_rk4_linear_saves(backend):
    M = build_generator(0, grid(16))
    out = kernels.rk4_linear(M.matrix, np.ones(32), 1e-3, 10, 3)
    assert out.shape == (4, 32)
    out = kernels.rk4_linear(M.matrix, np.ones(32), 1e-3, 0, 1)
    np.testing.assert_array_equal(out, np.ones((1, 32)))


def test_rk4_cubic_guard_after_last_save(backend):
    # the guard trips on the step after the last regular save; the spare row takes it
    M = build_generator(0, grid(16))
    u = np.full(32, 1.0)
    n_ok = None
    for n in range(1, 400):
        _, taken, blown = kernels.rk4_cubic(M.matrix, M.constant_images, u, 0.01, n, 10, 3 * np.sqrt(2), 1.0, 10.0)
        if blown:
            n_ok = taken
            break
    assert n_ok is not None
    nsteps = n_ok
    save_every = max(nsteps - 1, 1)
    states, taken, blown = kernels.rk4_cubic(M.matrix, M.constant_images, u, 0.01, nsteps, save_every,
                                             3 * np.sqrt(2), 1.0, 10.0)
    assert blown and taken == nsteps
    assert states.shape[0] == nsteps // save_every + 2
    assert np.max(np.abs(states[-1][:16])) > 10.0


def test_rk4_cubic_no_blowup_shape(backend):
    M = build_generator(0, grid(16))
    states, taken, blown = kernels.rk4_cubic(M.matrix, M.constant_images, np.zeros(32), 0.01, 25, 5,
                                             3 * np.sqrt(2), 1.0, 10.0)
    assert not blown and taken == 25 and states.shape == (6, 32) and not np.any(states)
