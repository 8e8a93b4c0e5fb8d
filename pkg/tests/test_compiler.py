import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import haar_unitary
from sicmultiport.compiler import (
    QUTRIT_EULER,
    EulerAngles,
    fourier_netlist,
    fourier_premix,
    qk_dagger_netlist,
    qubit_factors,
    qubit_sic_netlist,
    qutrit_blocks,
    qutrit_permutations,
    qutrit_phase_factors,
    qutrit_rotation,
    qutrit_sic_netlist,
    reck_decompose,
    rotation_to_elements,
    sic_netlist,
    verify_netlist,
)
from sicmultiport.naimark import fourier_matrix, qubit_naimark_matrix, qutrit_naimark_matrix
from sicmultiport.netlist import BEAM_SPLITTER, OpticalNetlist, recompose_matrix
from sicmultiport.qstate import check_unitary, phase_aligned_distance


def test_qubit_factor_product():
    prod = np.linalg.multi_dot(qubit_factors())
    assert np.linalg.norm(prod - qubit_naimark_matrix()) < 1e-10
    for f in qubit_factors():
        assert check_unitary(f, 1e-12).ok


def test_euler_angles_reproduce_rotation():
    assert np.linalg.norm(QUTRIT_EULER.matrix() - qutrit_rotation()) < 1e-12
    assert QUTRIT_EULER.x == pytest.approx(-math.pi / 4)
    assert QUTRIT_EULER.y == pytest.approx(-math.acos(-1 / math.sqrt(3)))
    assert QUTRIT_EULER.z == pytest.approx(math.pi / 2)


def test_block_factorization():
    R = qutrit_rotation()
    for q, g, d in zip(qutrit_blocks(), qutrit_permutations(), qutrit_phase_factors()):
        assert np.linalg.norm(q.conj().T - g @ R @ d) < 1e-10


def test_block_diagonal_gives_v():
    S = np.kron(fourier_matrix(), np.eye(3))
    Q = np.zeros((9, 9), dtype=complex)
    for k, q in enumerate(qutrit_blocks()):
        Q[3 * k : 3 * k + 3, 3 * k : 3 * k + 3] = q
    assert np.linalg.norm(S.conj().T @ Q @ S - qutrit_naimark_matrix()) < 1e-10


def test_fourier_premix():
    P = fourier_matrix()
    assert np.linalg.norm(qutrit_blocks()[0].conj().T @ fourier_premix() - P) < 1e-12


@pytest.mark.parametrize("alpha", np.linspace(-math.pi, math.pi, 17))
def test_rotation_elements(alpha):
    net = OpticalNetlist(2, tuple(rotation_to_elements(alpha)))
    c, s = math.cos(alpha), math.sin(alpha)
    assert np.allclose(recompose_matrix(net), [[c, -s], [s, c]], atol=1e-12)
    assert sum(el.kind == BEAM_SPLITTER for el in net.elements) == 1
    assert net.count() <= 2


@pytest.mark.parametrize("optimize", [True, False])
def test_qubit_netlist_exact(optimize):
    net = qubit_sic_netlist(optimize)
    assert np.linalg.norm(recompose_matrix(net) - qubit_naimark_matrix().conj().T) < 1e-12


def test_qubit_netlist_count():
    assert qubit_sic_netlist().count() <= 7


@pytest.mark.parametrize("k", [1, 2, 3])
def test_qk_dagger(k):
    net = qk_dagger_netlist(k)
    assert np.linalg.norm(recompose_matrix(net) - qutrit_blocks()[k - 1].conj().T) < 1e-12
    assert net.count() <= 4
    with pytest.raises(ValueError):
        qk_dagger_netlist(4)


def test_fourier_netlist():
    assert np.linalg.norm(recompose_matrix(fourier_netlist()) - fourier_matrix()) < 1e-12
    assert np.linalg.norm(recompose_matrix(fourier_netlist(False)) - fourier_matrix()) < 1e-12


@pytest.mark.parametrize("optimize", [True, False])
def test_qutrit_netlist_exact(optimize):
    net = qutrit_sic_netlist(optimize)
    assert np.linalg.norm(recompose_matrix(net) - qutrit_naimark_matrix().conj().T) < 1e-12


def test_qutrit_netlist_count():
    net = qutrit_sic_netlist()
    assert net.count() <= 44
    # optimization never loses to the layer-by-layer construction
    assert net.count() < qutrit_sic_netlist(False).count()


def test_sic_netlist_lookup():
    assert sic_netlist("qubit-sic") is qubit_sic_netlist()
    assert sic_netlist("qutrit") is qutrit_sic_netlist()
    with pytest.raises(ValueError):
        sic_netlist("ququart")


@pytest.mark.parametrize(
    "target, limit", [(qubit_naimark_matrix(), 15), (qutrit_naimark_matrix(), 80)]
)
def test_reck_on_device_unitaries(target, limit):
    net = reck_decompose(target)
    assert net.count() <= limit
    assert verify_netlist(net, target, tol=1e-9).passed


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 7), st.integers(0, 2**32))
def test_reck_random(n, seed):
    u = haar_unitary(n, seed)
    net = reck_decompose(u)
    assert net.count() <= n * n - 1
    assert phase_aligned_distance(recompose_matrix(net), u) < 1e-8


def test_reck_handles_permutations_and_identity():
    for u in (np.eye(4), np.eye(4)[[3, 1, 0, 2]], np.diag(np.exp(1j * np.arange(4)))):
        net = reck_decompose(u)
        assert phase_aligned_distance(recompose_matrix(net), u) < 1e-10
        assert net.count() <= 15


def test_reck_rejects_non_unitary():
    with pytest.raises(ValueError):
        reck_decompose(np.ones((3, 3)))


def test_verify_netlist_reports_defect():
    net = qubit_sic_netlist()
    rep = verify_netlist(net, np.eye(4))
    assert not rep.passed and rep.defect > 0.1
    exact = verify_netlist(net, qubit_naimark_matrix().conj().T, up_to_global_phase=False)
    assert exact.passed and exact.element_count == net.count()
    with pytest.raises(ValueError):
        verify_netlist(net, np.eye(3))


def test_global_phase_option():
    net = qubit_sic_netlist()
    target = 1j * qubit_naimark_matrix().conj().T
    assert verify_netlist(net, target).passed
    assert not verify_netlist(net, target, up_to_global_phase=False).passed


def test_euler_angles_type():
    e = EulerAngles(0.0, 0.0, 0.0)
    assert np.allclose(e.matrix(), np.eye(3))
