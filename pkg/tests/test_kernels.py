"""Parity between the compiled and pure-Python kernel backends."""

import numpy as np
import pytest

from sicmultiport import kernels
from sicmultiport.netlist import recompose_matrix

from test_netlist import product_matrix, random_netlist

cython = pytest.importorskip("sicmultiport._kernels")
BACKENDS = ["python", "cython"]


def test_active_backend_is_reported():
    assert kernels.BACKEND in BACKENDS
    with pytest.raises(ValueError):
        kernels.backend_module("fortran")


@pytest.mark.parametrize("seed", range(20))
def test_apply_elements_parity(seed):
    net = random_netlist(6, 40, seed)
    rng = np.random.default_rng(seed)
    states = rng.standard_normal((5, 6)) + 1j * rng.standard_normal((5, 6))
    arrays = net.kernel_arrays()
    outs = [kernels.apply_elements(*arrays, states, impl=kernels.backend_module(b)) for b in BACKENDS]
    assert np.allclose(outs[0], outs[1], atol=1e-14)
    for b in BACKENDS:
        assert np.allclose(recompose_matrix(net, impl=kernels.backend_module(b)), product_matrix(net))


def test_apply_elements_does_not_mutate_input():
    net = random_netlist(3, 5, 0)
    states = np.eye(3, dtype=complex)
    for b in BACKENDS:
        kernels.apply_elements(*net.kernel_arrays(), states, impl=kernels.backend_module(b))
    assert np.array_equal(states, np.eye(3))


def _random_lines(rng):
    return np.array([rng.choice(9, 3, replace=False) for _ in range(12)], dtype=np.int64)


def _reference_terms(p, lines):
    s2 = np.sum(p**2) - 1 / 6
    s3 = np.sum(p**3) / 3 - sum(p[a] * p[b] * p[c] for a, b, c in lines)
    return np.array([s2, s3])


@pytest.mark.parametrize("seed", range(20))
def test_purity_terms_parity_and_derivatives(seed):
    rng = np.random.default_rng(seed)
    lines = _random_lines(rng)
    p = rng.dirichlet(np.ones(9))
    results = [kernels.purity_terms(p, lines, impl=kernels.backend_module(b)) for b in BACKENDS]
    for h, jac, hess in results:
        assert np.allclose(h, _reference_terms(p, lines), atol=1e-15)
    (h0, j0, H0), (h1, j1, H1) = results
    assert np.allclose(j0, j1, atol=1e-15) and np.allclose(H0, H1, atol=1e-15)
    # central finite differences against the analytic gradient and cubic Hessian
    step = 1e-6
    for k in range(9):
        e = np.zeros(9)
        e[k] = step
        fd = (_reference_terms(p + e, lines) - _reference_terms(p - e, lines)) / (2 * step)
        assert np.allclose(j0[:, k], fd, atol=1e-8)
        gp = kernels.purity_terms(p + e, lines)[1][1]
        gm = kernels.purity_terms(p - e, lines)[1][1]
        assert np.allclose(H0[:, k], (gp - gm) / (2 * step), atol=1e-7)


def test_batch_residuals_parity():
    rng = np.random.default_rng(3)
    lines = _random_lines(rng)
    P = rng.dirichlet(np.ones(9), size=50)
    a, b = (kernels.purity_residuals_batch(P, lines, impl=kernels.backend_module(x)) for x in BACKENDS)
    assert np.allclose(a, b, atol=1e-15)
    ref = np.array([_reference_terms(p, lines) for p in P])
    assert np.allclose(a, ref, atol=1e-15)


def test_env_var_forces_python_fallback():
    import os
    import subprocess
    import sys

    env = dict(os.environ, SICMULTIPORT_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "import sicmultiport; print(sicmultiport.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "python"
