"""Naimark dilations of rank-one POVMs.

Orientation: ``NaimarkExtension.completion`` is the unitary whose
*columns* form the projective measurement basis.  The system is embedded
on the modes listed in ``embedding``, and those rows of ``completion``
hold the scaled POVM vectors ``u_i / sqrt(d)`` (up to a phase per column
for the reference qutrit matrix).  Measuring detector ``j`` after applying
``completion^dag`` to the embedded state realizes outcome ``j``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .jsonio import decode_array, encode_array
from .qstate import PureState, UnitaryMatrix
from .sic import OMEGA, SicPovm, qubit_sic, qutrit_sic

_GS_SKIP = 1e-8


@dataclass(frozen=True)
class NaimarkExtension:
    scaled_vectors: np.ndarray
    completion: UnitaryMatrix
    embedding: tuple[int, ...]
    povm: SicPovm | None = None

    def __post_init__(self):
        sv = np.array(self.scaled_vectors, dtype=complex)
        sv.setflags(write=False)
        object.__setattr__(self, "scaled_vectors", sv)
        rows = self.completion.matrix[list(self.embedding)]
        if sv.shape != rows.shape or np.max(np.abs(rows - sv)) > 1e-12:
            raise ValueError("designated rows of the completion do not match the scaled vectors")

    @property
    def num_modes(self) -> int:
        return self.completion.dim

    @property
    def system_dim(self) -> int:
        return len(self.embedding)

    def embed(self, phi) -> np.ndarray:
        phi = phi.amplitudes if isinstance(phi, PureState) else np.asarray(phi, dtype=complex)
        if phi.size != self.system_dim:
            raise ValueError(f"state dim {phi.size} does not match extension dim {self.system_dim}")
        out = np.zeros(self.num_modes, dtype=complex)
        out[list(self.embedding)] = phi
        return out

    def mode_probabilities(self, phi) -> np.ndarray:
        """``|<phi'|col_j>|^2`` for every column ``j``."""
        amp = self.completion.matrix.conj().T @ self.embed(phi)
        return np.abs(amp) ** 2

    def to_json(self) -> dict:
        return {
            "unitary": encode_array(self.completion.matrix),
            "embedding": [k + 1 for k in self.embedding],
            "system_dim": self.system_dim,
        }

    @classmethod
    def from_json(cls, obj: dict) -> NaimarkExtension:
        u = UnitaryMatrix(decode_array(obj["unitary"]))
        emb = tuple(int(k) - 1 for k in obj["embedding"])
        return cls(u.matrix[list(emb)], u, emb)


@dataclass(frozen=True)
class BlockCirculantParts:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    S: UnitaryMatrix
    Q1: UnitaryMatrix
    Q2: UnitaryMatrix
    Q3: UnitaryMatrix

    @property
    def blocks(self) -> tuple[UnitaryMatrix, UnitaryMatrix, UnitaryMatrix]:
        return (self.Q1, self.Q2, self.Q3)

    def reassemble(self) -> np.ndarray:
        A, B, C = self.A, self.B, self.C
        return np.block([[A, B, C], [C, A, B], [B, C, A]])

    def block_diagonal(self) -> np.ndarray:
        q = np.zeros((9, 9), dtype=complex)
        for k, blk in enumerate(self.blocks):
            q[3 * k : 3 * k + 3, 3 * k : 3 * k + 3] = blk.matrix
        return q


def complete_povm(scaled_vectors, tol: float = 1e-10) -> NaimarkExtension:
    """Complete an ``m x n`` matrix with orthonormal rows to an ``n x n`` unitary.

    The extra rows come from Gram-Schmidt over the canonical basis vectors
    in ascending index order; candidates whose residual norm falls below
    1e-8 are skipped, so the result is deterministic.
    """
    v = np.asarray(scaled_vectors, dtype=complex)
    if v.ndim != 2:
        raise ValueError("scaled vectors must form a matrix")
    m, n = v.shape
    if n <= m:
        raise ValueError(f"need more outcomes than dimensions (n={n}, m={m})")
    gram_defect = np.linalg.norm(v @ v.conj().T - np.eye(m))
    if gram_defect > tol:
        raise ValueError(
            f"rows are not orthonormal (defect {gram_defect:.3g}); "
            "input is not a rank-one POVM decomposition"
        )
    rows = [r for r in v]
    for k in range(n):
        if len(rows) == n:
            break
        cand = np.zeros(n, dtype=complex)
        cand[k] = 1.0
        for _ in range(2):  # second pass restores orthogonality lost to rounding
            for r in rows:
                cand = cand - np.vdot(r, cand) * r
        nrm = np.linalg.norm(cand)
        if nrm < _GS_SKIP:
            continue
        rows.append(cand / nrm)
    u = UnitaryMatrix(np.array(rows))
    return NaimarkExtension(v, u, tuple(range(m)))


def qubit_naimark_matrix() -> np.ndarray:
    r2, r3 = np.sqrt(2.0), np.sqrt(3.0)
    a, b = np.exp(1j * np.pi / 3), np.exp(-1j * np.pi / 3)
    u = np.array(
        [
            [r3, 1, a, b],
            [0, r2, r2 * b, r2 * a],
            [r3, -1, -a, -b],
            [0, r2, -r2, -r2],
        ],
        dtype=complex,
    )
    return u / np.sqrt(6.0)


def qutrit_naimark_matrix() -> np.ndarray:
    w, w2, r = OMEGA, OMEGA**2, np.sqrt(2.0)
    v = np.array(
        [
            [0, 0, 0, -1, -w2, -w, 1, w, w2],
            [r, r, r, 0, 0, 0, 0, 0, 0],
            [1, w2, w, 1, w, w2, 0, 0, 0],
            [1, w, w2, 0, 0, 0, -1, -w2, -w],
            [0, 0, 0, r, r, r, 0, 0, 0],
            [0, 0, 0, 1, w2, w, 1, w, w2],
            [-1, -w2, -w, 1, w, w2, 0, 0, 0],
            [0, 0, 0, 0, 0, 0, r, r, r],
            [1, w, w2, 0, 0, 0, 1, w2, w],
        ],
        dtype=complex,
    )
    return v / np.sqrt(6.0)


def qubit_naimark_unitary() -> NaimarkExtension:
    u = UnitaryMatrix(qubit_naimark_matrix())
    return NaimarkExtension(u.matrix[:2], u, (0, 1), qubit_sic())


def qutrit_naimark_unitary() -> NaimarkExtension:
    v = UnitaryMatrix(qutrit_naimark_matrix())
    emb = (0, 3, 6)
    return NaimarkExtension(v.matrix[list(emb)], v, emb, qutrit_sic())


def naimark_for_dim(dim: int) -> NaimarkExtension:
    if dim == 2:
        return qubit_naimark_unitary()
    if dim == 3:
        return qutrit_naimark_unitary()
    raise ValueError(f"no SIC device for dimension {dim}")


def embed_state(phi: PureState, device_dim: int) -> np.ndarray:
    """Place a qubit on modes (1, 2) of four, a qutrit on modes (1, 4, 7) of nine."""
    if phi.dim != device_dim:
        raise ValueError(f"state dim {phi.dim} does not match device dim {device_dim}")
    if device_dim == 2:
        modes = (0, 1)
    elif device_dim == 3:
        modes = (0, 3, 6)
    else:
        raise ValueError(f"unsupported device dimension {device_dim}")
    out = np.zeros(device_dim**2, dtype=complex)
    out[list(modes)] = phi.amplitudes
    return out


def fourier_matrix() -> np.ndarray:
    w = OMEGA
    return np.array([[1, 1, 1], [w**2, w, 1], [w, w**2, 1]], dtype=complex) / np.sqrt(3.0)


def block_circulant_parts(V, tol: float = 1e-10) -> BlockCirculantParts:
    """Split a 9x9 block-circulant unitary and block-diagonalize it with ``S = P (x) I3``."""
    v = V.matrix if isinstance(V, UnitaryMatrix) else np.asarray(V, dtype=complex)
    if v.shape != (9, 9):
        raise ValueError("expected a 9x9 matrix")
    blk = lambda r, c: v[3 * r : 3 * r + 3, 3 * c : 3 * c + 3]  # noqa: E731
    A, B, C = blk(0, 0), blk(0, 1), blk(0, 2)
    expected = np.block([[A, B, C], [C, A, B], [B, C, A]])
    if np.max(np.abs(expected - v)) > tol:
        raise ValueError("matrix is not block-circulant in 3x3 blocks")
    S = np.kron(fourier_matrix(), np.eye(3))
    Q = S @ v @ S.conj().T
    off = sum(
        np.linalg.norm(Q[3 * r : 3 * r + 3, 3 * c : 3 * c + 3])
        for r in range(3)
        for c in range(3)
        if r != c
    )
    if off > tol:
        raise ValueError(f"S V S^dag is not block diagonal (off-diagonal norm {off:.3g})")
    qs = [UnitaryMatrix(Q[3 * k : 3 * k + 3, 3 * k : 3 * k + 3]) for k in range(3)]
    parts = [np.array(x) for x in (A, B, C)]
    for x in parts:
        x.setflags(write=False)
    return BlockCirculantParts(*parts, UnitaryMatrix(S), *qs)


def verify_probability_scaling(phi: PureState, ext: NaimarkExtension) -> float:
    """``max_j | |<phi'|U_j>|^2 - |<phi|u_j>|^2 / d |``."""
    if ext.povm is None:
        raise ValueError("extension has no associated POVM")
    d = ext.povm.dim
    if phi.dim != d:
        raise ValueError(f"state dim {phi.dim} does not match POVM dim {d}")
    circuit = ext.mode_probabilities(phi)
    born = np.abs(ext.povm.vectors.conj() @ phi.amplitudes) ** 2 / d
    return float(np.max(np.abs(circuit - born)))

