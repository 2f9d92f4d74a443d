"""The numba kernels and their numpy twins must agree."""

import os
import subprocess
import sys

import numpy as np
import pytest

from bispectral import _accel

needs_numba = pytest.mark.skipif(_accel.NUMBA_KERNELS is None, reason="numba backend disabled")


@needs_numba
def test_airy_parity():
    t = np.linspace(-25.0, 25.0, 2001)
    a_np = _accel.NUMPY_KERNELS[0](t, _accel.U_COEF, _accel.V_COEF)
    a_nb = _accel.NUMBA_KERNELS[0](t, _accel.U_COEF, _accel.V_COEF)
    # the positive-argument series cancels to ~1e-13 absolute near t = 6,
    # and the two backends round differently there
    for u, v in zip(a_np, a_nb):
        assert np.allclose(u, v, rtol=1e-13, atol=1e-12)
    neg = t < 0
    for u, v in zip(a_np, a_nb):
        assert np.allclose(u[neg], v[neg], rtol=1e-12, atol=1e-300)


@needs_numba
def test_dynamics_kernel_parity():
    rng = np.random.default_rng(5)
    n = 4
    state = np.concatenate([np.array([-3.0, -1.0, 0.5, 2.0]), rng.normal(size=n)])
    assert np.allclose(_accel.NUMPY_KERNELS[1](state, n), _accel.NUMBA_KERNELS[1](state, n), rtol=1e-14)
    s_np = _accel.NUMPY_KERNELS[2](state, n, 1e-2, _accel._A, _accel._E)
    s_nb = _accel.NUMBA_KERNELS[2](state, n, 1e-2, _accel._A, _accel._E)
    for u, v in zip(s_np, s_nb):
        assert np.allclose(u, v, rtol=1e-12, atol=1e-15)


@needs_numba
def test_poly_eval_parity():
    rng = np.random.default_rng(2)
    exps = rng.integers(0, 4, size=(15, 3))
    coeffs = rng.normal(size=15)
    pts = rng.uniform(-2, 2, size=(50, 3))
    assert np.allclose(_accel.NUMPY_KERNELS[3](exps, coeffs, pts), _accel.NUMBA_KERNELS[3](exps, coeffs, pts), rtol=1e-12)


def test_env_flag_selects_numpy():
    env = dict(os.environ, BISPECTRAL_NUMBA="0")
    out = subprocess.run(
        [sys.executable, "-c", "from bispectral import _accel; print(_accel.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "numpy"


def test_rhs_matches_hamilton_equations():
    x = np.array([-1.0, 0.5, 2.0])
    y = np.array([0.3, -0.2, 0.1])
    v = _accel.cm_rhs(np.concatenate([x, y]), 3)
    assert np.allclose(v[:3], 2 * y)
    for i in range(3):
        force = 1.0 - sum(8.0 / (x[i] - x[j]) ** 3 for j in range(3) if j != i)
        assert v[3 + i] == pytest.approx(force, rel=1e-14)
