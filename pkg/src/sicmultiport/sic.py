"""Qubit and qutrit SIC-POVMs.

The qubit set is the fixed tetrahedral family with first vector |0>.  The
qutrit set is the Weyl-Heisenberg orbit of (0, 1, -1)/sqrt(2).  Qutrit
outcomes are numbered so that outcome ``i`` is measured by detector ``i``
of the 9x9 dilation in :mod:`sicmultiport.naimark`: within each block of
three the phase power ``m`` runs 0, 1, 2, and the shift power ``n`` runs
0, 2, 1 across the blocks (see ``QUTRIT_ORDERING``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .jsonio import decode_array, encode_array
from .qstate import TOLERANCES

OMEGA = np.exp(2j * np.pi / 3)

QUTRIT_ORDERING: tuple[tuple[int, int], ...] = tuple(
    (n, m) for n in (0, 2, 1) for m in range(3)
)

QUTRIT_FIDUCIAL = np.array([0.0, 1.0, -1.0], dtype=complex) / np.sqrt(2.0)


@dataclass(frozen=True)
class SicPovm:
    """``dim**2`` unit vectors; effects are ``|u><u| / dim``.

    ``ordering`` maps outcome index to the Weyl-Heisenberg label ``(n, m)``
    when the set is a group orbit, else ``None``.  The SIC conditions are
    deliberately not enforced here so that candidates can be checked with
    :func:`verify_sic`.
    """

    dim: int
    vectors: np.ndarray
    ordering: tuple[tuple[int, int], ...] | None = None

    def __post_init__(self):
        v = np.array(self.vectors, dtype=complex)
        if v.shape != (self.dim**2, self.dim):
            raise ValueError(f"expected {self.dim**2} vectors of length {self.dim}, got {v.shape}")
        norms = np.linalg.norm(v, axis=1)
        if np.max(np.abs(norms - 1.0)) > TOLERANCES["norm"]:
            raise ValueError("SIC vectors must be unit vectors")
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)

    @property
    def num_outcomes(self) -> int:
        return self.dim**2

    @property
    def projectors(self) -> np.ndarray:
        v = self.vectors
        return np.einsum("ia,ib->iab", v, v.conj())

    @property
    def effects(self) -> np.ndarray:
        return self.projectors / self.dim

    def to_json(self) -> dict:
        out = {"dim": self.dim, "vectors": [encode_array(u) for u in self.vectors]}
        if self.ordering is not None:
            out["ordering"] = [list(nm) for nm in self.ordering]
        return out

    @classmethod
    def from_json(cls, obj: dict) -> SicPovm:
        vectors = np.array([decode_array(u) for u in obj["vectors"]])
        ordering = obj.get("ordering")
        if ordering is not None:
            ordering = tuple(tuple(int(x) for x in nm) for nm in ordering)
        return cls(int(obj["dim"]), vectors, ordering)


@dataclass(frozen=True)
class WeylHeisenbergPair:
    X: np.ndarray
    Z: np.ndarray
    omega: complex

    def displacement(self, n: int, m: int) -> np.ndarray:
        return np.linalg.matrix_power(self.X, n % 3) @ np.linalg.matrix_power(self.Z, m % 3)


@dataclass(frozen=True)
class SicReport:
    gram_deviation: float
    identity_deviation: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.gram_deviation <= self.tol and self.identity_deviation <= self.tol


def qubit_sic() -> SicPovm:
    r3 = np.sqrt(3.0)
    e = lambda t: np.exp(1j * t)  # noqa: E731
    vectors = np.array(
        [
            [1.0, 0.0],
            [1.0 / r3, np.sqrt(2.0) / r3],
            [e(np.pi / 3) / r3, e(-np.pi / 3) * np.sqrt(2.0) / r3],
            [e(-np.pi / 3) / r3, e(np.pi / 3) * np.sqrt(2.0) / r3],
        ],
        dtype=complex,
    )
    return SicPovm(2, vectors)


def weyl_heisenberg() -> WeylHeisenbergPair:
    X = np.array([[0, 1, 0], [0, 0, 1], [1, 0, 0]], dtype=complex)
    Z = np.diag([1.0, OMEGA, OMEGA**2])
    for a in (X, Z):
        a.setflags(write=False)
    return WeylHeisenbergPair(X=X, Z=Z, omega=OMEGA)


def sic_orbit(fiducial, ordering=QUTRIT_ORDERING) -> SicPovm:
    """Orbit of ``fiducial`` under ``X^n Z^m`` in the given label order."""
    wh = weyl_heisenberg()
    psi = np.asarray(fiducial, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    vectors = np.array([wh.displacement(n, m) @ psi for n, m in ordering])
    return SicPovm(3, vectors, tuple(ordering))


def qutrit_sic() -> SicPovm:
    return sic_orbit(QUTRIT_FIDUCIAL)


def gram_target(dim: int) -> np.ndarray:
    n = dim * dim
    return (dim * np.eye(n) + 1.0) / (dim * dim * (dim + 1))


def verify_sic(povm: SicPovm, tol: float = 1e-12) -> SicReport:
    """Compare ``tr(E_i E_j)`` and ``sum_i E_i`` against the SIC conditions."""
    d = povm.dim
    v = povm.vectors
    overlaps = np.abs(v.conj() @ v.T) ** 2
    gram = overlaps / d**2
    gram_dev = float(np.max(np.abs(gram - gram_target(d))))
    ident_dev = float(np.max(np.abs(povm.effects.sum(axis=0) - np.eye(d))))
    return SicReport(gram_deviation=gram_dev, identity_deviation=ident_dev, tol=tol)
