"""Quantum state and operator value types shared by every other module.

All types wrap read-only numpy arrays and validate their invariants on
construction.  Default tolerances come from a named profile that can be
selected with the ``SICMULTIPORT_TOL_PROFILE`` environment variable
(``default``, ``strict`` or ``loose``).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

_PROFILES = {
    "default": {"unitary": 1e-10, "hermitian": 1e-10, "norm": 1e-12, "psd": 1e-10},
    "strict": {"unitary": 1e-12, "hermitian": 1e-12, "norm": 1e-13, "psd": 1e-12},
    "loose": {"unitary": 1e-8, "hermitian": 1e-8, "norm": 1e-10, "psd": 1e-8},
}

TOL_PROFILE = os.environ.get("SICMULTIPORT_TOL_PROFILE", "default")
if TOL_PROFILE not in _PROFILES:
    raise ImportError(
        f"unknown SICMULTIPORT_TOL_PROFILE {TOL_PROFILE!r}; "
        f"expected one of {sorted(_PROFILES)}"
    )
TOLERANCES = dict(_PROFILES[TOL_PROFILE])


def _frozen(a, dtype=complex):
    arr = np.array(a, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class PureState:
    """Normalized state vector of a ``dim``-level system."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = _frozen(self.amplitudes)
        if amps.ndim != 1 or amps.size < 1:
            raise ValueError("amplitudes must be a non-empty vector")
        norm = np.vdot(amps, amps).real
        if abs(norm - 1.0) > TOLERANCES["norm"]:
            raise ValueError(f"state is not normalized (|a|^2 = {norm!r})")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_amplitudes(cls, amplitudes) -> PureState:
        """Normalize ``amplitudes`` and wrap them."""
        v = np.asarray(amplitudes, dtype=complex)
        n = np.linalg.norm(v)
        if n == 0:
            raise ValueError("cannot normalize the zero vector")
        return cls(v / n)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def projector(self) -> DensityOperator:
        return DensityOperator(np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True)
class DensityOperator:
    """Hermitian, unit-trace operator.

    Positivity is *not* enforced: linear inversion can produce operators
    with small negative eigenvalues.  ``psd`` records whether every
    eigenvalue is above ``-TOLERANCES['psd']``.
    """

    matrix: np.ndarray
    psd: bool = field(init=False)

    def __post_init__(self):
        m = _frozen(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("density operator must be a square matrix")
        herm = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
        if herm > TOLERANCES["hermitian"]:
            raise ValueError(f"operator is not Hermitian (defect {herm:.3g})")
        tr = np.trace(m)
        if abs(tr - 1.0) > TOLERANCES["norm"]:
            raise ValueError(f"operator trace is {tr!r}, expected 1")
        object.__setattr__(self, "matrix", m)
        evals = np.linalg.eigvalsh(m)
        object.__setattr__(self, "psd", bool(evals.min() >= -TOLERANCES["psd"]))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def maximally_mixed(cls, dim: int) -> DensityOperator:
        return cls(np.eye(dim) / dim)

    def eigh(self):
        return np.linalg.eigh(self.matrix)


@dataclass(frozen=True)
class UnitaryMatrix:
    matrix: np.ndarray

    def __post_init__(self):
        m = _frozen(self.matrix)
        report = check_unitary(m, TOLERANCES["unitary"])
        if not report.ok:
            raise ValueError(f"matrix is not unitary (defect {report.defect:.3g})")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def dagger(self) -> UnitaryMatrix:
        return UnitaryMatrix(self.matrix.conj().T)


@dataclass(frozen=True)
class OutcomeDistribution:
    """Probability vector; tiny negative entries from rounding are clamped."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("probabilities must be a non-empty vector")
        if p.min() < -1e-14:
            raise ValueError(f"negative probability {p.min()!r}")
        p = np.clip(p, 0.0, 1.0)
        if abs(p.sum() - 1.0) > TOLERANCES["norm"]:
            raise ValueError(f"probabilities sum to {p.sum()!r}")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    def __len__(self):
        return self.probs.size


@dataclass(frozen=True)
class UnitarityReport:
    ok: bool
    defect: float
    tol: float


def check_unitary(m, tol: float | None = None) -> UnitarityReport:
    """Test ``||M^dag M - I||_F <= tol``."""
    if tol is None:
        tol = TOLERANCES["unitary"]
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    defect = float(np.linalg.norm(m.conj().T @ m - np.eye(m.shape[0])))
    return UnitarityReport(ok=defect <= tol, defect=defect, tol=tol)


def born_probability(state: DensityOperator, effect, tol: float | None = None) -> float:
    """Outcome probability ``tr(rho E)``, clamped to [0, 1]."""
    if tol is None:
        tol = TOLERANCES["hermitian"]
    e = np.asarray(effect, dtype=complex)
    if e.shape != state.matrix.shape:
        raise ValueError(f"effect shape {e.shape} does not match state dim {state.dim}")
    if np.max(np.abs(e - e.conj().T)) > tol:
        raise ValueError("effect is not Hermitian")
    val = np.einsum("ij,ji->", state.matrix, e)
    if abs(val.imag) > 1e-12:
        raise ValueError(f"tr(rho E) has imaginary part {val.imag!r}")
    return float(min(max(val.real, 0.0), 1.0))


def purity_traces(rho: DensityOperator) -> tuple[float, float]:
    """Return ``(tr rho^2, tr rho^3)``."""
    m = rho.matrix
    m2 = m @ m
    t2 = np.trace(m2)
    t3 = np.einsum("ij,ji->", m2, m)
    return float(t2.real), float(t3.real)


def random_pure_state(dim: int, seed: int) -> PureState:
    """Haar-random pure state, reproducible for a given ``seed``.

    Entries are independent standard complex Gaussians drawn from a
    Philox generator and then normalized.
    """
    if dim < 2:
        raise ValueError("dim must be at least 2")
    rng = np.random.Generator(np.random.Philox(seed))
    z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return PureState(z / np.linalg.norm(z))


def random_density_operator(dim: int, seed: int, rank: int | None = None) -> DensityOperator:
    """Random full-rank (or given-rank) density operator, Ginibre construction."""
    rng = np.random.Generator(np.random.Philox(seed))
    k = dim if rank is None else rank
    g = rng.standard_normal((dim, k)) + 1j * rng.standard_normal((dim, k))
    m = g @ g.conj().T
    m = 0.5 * (m + m.conj().T)
    return DensityOperator(m / np.trace(m).real)


def phase_aligned_distance(a, b) -> float:
    """``min over gamma of ||a - exp(i gamma) b||_F``."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    # align explicitly; the closed form sqrt(|a|^2 + |b|^2 - 2|<b,a>|) cancels badly
    overlap = np.vdot(b, a)
    phase = overlap / abs(overlap) if overlap != 0 else 1.0
    return float(np.linalg.norm(a - phase * b))


def remove_global_phase(a) -> np.ndarray:
    """Divide out the phase of the largest-magnitude entry (first one on ties)."""
    a = np.asarray(a, dtype=complex)
    flat = a.ravel()
    k = int(np.argmax(np.abs(flat)))
    if flat[k] == 0:
        return a.copy()
    return a * (abs(flat[k]) / flat[k])


def equal_up_to_phase(a, b, tol: float = 1e-10) -> bool:
    return phase_aligned_distance(a, b) <= tol
