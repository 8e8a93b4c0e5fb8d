import numpy as np
import pytest

from sicmultiport.naimark import (
    NaimarkExtension,
    block_circulant_parts,
    complete_povm,
    embed_state,
    fourier_matrix,
    naimark_for_dim,
    qubit_naimark_matrix,
    qutrit_naimark_matrix,
    verify_probability_scaling,
)
from sicmultiport.qstate import PureState, check_unitary, random_pure_state
from sicmultiport.sic import OMEGA


@pytest.mark.parametrize("dim", [2, 3])
def test_reference_matrices_are_unitary(dim):
    m = qubit_naimark_matrix() if dim == 2 else qutrit_naimark_matrix()
    assert check_unitary(m, 1e-12).ok


@pytest.mark.parametrize("dim", [2, 3])
def test_column_property(dim):
    # U^dag applied to column j gives the basis vector e_j
    m = naimark_for_dim(dim).completion.matrix
    for j in range(m.shape[0]):
        out = m.conj().T @ m[:, j]
        assert np.allclose(out, np.eye(m.shape[0])[j], atol=1e-12)


@pytest.mark.parametrize("dim", [2, 3])
def test_probability_scaling_random_states(dim):
    ext = naimark_for_dim(dim)
    worst = max(verify_probability_scaling(random_pure_state(dim, s), ext) for s in range(100))
    assert worst < 1e-10


def test_qubit_embedding_rows_hold_scaled_sic(qubit_povm):
    ext = naimark_for_dim(2)
    assert ext.embedding == (0, 1)
    assert np.allclose(ext.completion.matrix[:2], qubit_povm.vectors.T / np.sqrt(2), atol=1e-12)


def test_qutrit_embedding_rows_match_sic_up_to_column_phase(qutrit_povm):
    ext = naimark_for_dim(3)
    rows = ext.completion.matrix[[0, 3, 6]] * np.sqrt(3)
    for j in range(9):
        overlap = abs(np.vdot(rows[:, j], qutrit_povm.vectors[j]))
        assert overlap == pytest.approx(1.0, abs=1e-12)


def test_embed_state():
    phi = PureState(np.array([0.6, 0.8]))
    assert np.allclose(embed_state(phi, 2), [0.6, 0.8, 0, 0])
    psi = random_pure_state(3, 0)
    v = embed_state(psi, 3)
    assert np.allclose(v[[0, 3, 6]], psi.amplitudes) and np.count_nonzero(v) == 3
    with pytest.raises(ValueError):
        embed_state(phi, 3)


def test_complete_povm_general(qubit_povm):
    ext = complete_povm(qubit_povm.vectors.T / np.sqrt(2))
    ext = NaimarkExtension(ext.scaled_vectors, ext.completion, ext.embedding, qubit_povm)
    assert check_unitary(ext.completion.matrix, 1e-12).ok
    for s in range(20):
        assert verify_probability_scaling(random_pure_state(2, s), ext) < 1e-12


def test_complete_povm_rejects_bad_input():
    with pytest.raises(ValueError):
        complete_povm(np.eye(2))  # square: nothing to extend
    with pytest.raises(ValueError):
        complete_povm(np.ones((2, 4)))  # rows not orthonormal


def test_extension_rejects_mismatched_rows():
    ext = naimark_for_dim(2)
    with pytest.raises(ValueError):
        NaimarkExtension(ext.scaled_vectors * 2, ext.completion, ext.embedding)


@pytest.mark.parametrize("dim", [2, 3])
def test_json_round_trip(dim):
    ext = naimark_for_dim(dim)
    obj = ext.to_json()
    assert obj["system_dim"] == dim
    back = NaimarkExtension.from_json(obj)
    assert np.array_equal(back.completion.matrix, ext.completion.matrix)
    assert back.embedding == ext.embedding


def test_block_circulant_structure():
    parts = block_circulant_parts(qutrit_naimark_matrix())
    assert np.allclose(parts.reassemble(), qutrit_naimark_matrix())
    # S V S^dag is block diagonal with the three Q blocks
    S = parts.S.matrix
    assert np.allclose(S @ qutrit_naimark_matrix() @ S.conj().T, parts.block_diagonal(), atol=1e-12)
    # the Q_k are the Fourier combinations of the blocks A, B, C
    for k, q in enumerate(parts.blocks):
        w = OMEGA ** (-k)
        expect = parts.A + w * parts.B + w**2 * parts.C
        assert np.allclose(q.matrix, expect, atol=1e-12) or np.allclose(
            q.matrix, parts.A + np.conj(w) * parts.B + np.conj(w) ** 2 * parts.C, atol=1e-12
        )


def test_block_circulant_rejects_generic_matrix():
    with pytest.raises(ValueError):
        block_circulant_parts(np.eye(9)[::-1])


def test_fourier_matrix_is_unitary():
    assert check_unitary(fourier_matrix(), 1e-12).ok
