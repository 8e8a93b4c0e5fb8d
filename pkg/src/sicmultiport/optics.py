"""Detector statistics for the SIC devices, from circuit propagation or the Born rule, and seeded sampling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .compiler import sic_netlist
from .naimark import embed_state
from .netlist import OpticalNetlist, propagate_batch
from .qstate import DensityOperator, OutcomeDistribution, PureState
from .sic import SicPovm, qubit_sic, qutrit_sic

RNG_ID = "numpy-philox4x64/sequential-binomial/v1"

DEVICES = {"qubit-sic": 2, "qutrit-sic": 3}


def device_label(device) -> str:
    aliases = {"qubit": "qubit-sic", "qutrit": "qutrit-sic", 2: "qubit-sic", 3: "qutrit-sic"}
    label = aliases.get(device, device)
    if label not in DEVICES:
        raise ValueError(f"unknown device {device!r}; expected one of {sorted(DEVICES)}")
    return label


def device_povm(device) -> SicPovm:
    return qubit_sic() if DEVICES[device_label(device)] == 2 else qutrit_sic()


@dataclass(frozen=True)
class DetectionRecord:
    counts: np.ndarray
    shots: int
    seed: int
    device_label: str = ""
    rng: str = RNG_ID

    def __post_init__(self):
        c = np.array(self.counts, dtype=np.int64)
        if c.ndim != 1 or c.min() < 0:
            raise ValueError("counts must be a vector of non-negative integers")
        if int(c.sum()) != self.shots:
            raise ValueError(f"counts sum to {int(c.sum())}, expected {self.shots} shots")
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)

    @property
    def frequencies(self) -> np.ndarray:
        return self.counts / self.shots

    def to_json(self, ideal: OutcomeDistribution | None = None) -> dict:
        out = {
            "counts": [int(x) for x in self.counts],
            "shots": int(self.shots),
            "seed": int(self.seed),
            "rng": self.rng,
            "device": self.device_label,
        }
        if ideal is not None:
            out["ideal"] = ideal.probs.tolist()
        return out

    @classmethod
    def from_json(cls, obj: dict) -> DetectionRecord:
        return cls(
            np.asarray(obj["counts"], dtype=np.int64),
            int(obj["shots"]),
            int(obj["seed"]),
            obj.get("device", ""),
            obj.get("rng", RNG_ID),
        )


def propagate(netlist: OpticalNetlist, amplitudes) -> np.ndarray:
    """Output mode amplitudes for one input vector."""
    v = np.asarray(amplitudes, dtype=complex)
    if v.ndim != 1 or v.size != netlist.num_modes:
        raise ValueError(f"input length {v.size} does not match {netlist.num_modes} modes")
    if abs(np.vdot(v, v).real - 1.0) > 1e-10:
        raise ValueError("input amplitudes are not normalized")
    return propagate_batch(netlist, v[None, :])[0]


def detector_distribution(state: DensityOperator, povm: SicPovm) -> OutcomeDistribution:
    """Born probabilities ``tr(rho E_i)`` for every effect."""
    if state.dim != povm.dim:
        raise ValueError(f"state dim {state.dim} does not match POVM dim {povm.dim}")
    v = povm.vectors
    p = np.einsum("ia,ab,ib->i", v.conj(), state.matrix, v).real / povm.dim
    return OutcomeDistribution(np.clip(p, 0.0, None))


def sample_counts(dist: OutcomeDistribution, shots: int, seed: int, device: str = "") -> DetectionRecord:
    """Multinomial sample as a chain of conditional binomials in detector order."""
    if shots < 1:
        raise ValueError("shots must be at least 1")
    rng = np.random.Generator(np.random.Philox(seed))
    p = dist.probs
    counts = np.zeros(p.size, dtype=np.int64)
    remaining = int(shots)
    mass = 1.0
    for i in range(p.size - 1):
        if remaining == 0:
            break
        q = 0.0 if mass <= 0.0 else min(max(p[i] / mass, 0.0), 1.0)
        counts[i] = rng.binomial(remaining, q)
        remaining -= int(counts[i])
        mass -= p[i]
    counts[-1] += remaining
    return DetectionRecord(counts, int(shots), int(seed), device)


def circuit_distribution(phi: PureState, device) -> np.ndarray:
    """Detector probabilities from propagating the embedded state through the device circuit."""
    label = device_label(device)
    out = propagate(sic_netlist(label), embed_state(phi, DEVICES[label]))
    return np.abs(out) ** 2


def _as_pure(state, tol=1e-10):
    if isinstance(state, PureState):
        return state
    evals, evecs = state.eigh()
    if abs(evals[-1] - 1.0) < tol:
        return PureState.from_amplitudes(evecs[:, -1])
    return None


def run_sic_experiment(state, device, shots: int, seed: int, agreement_tol: float = 1e-10):
    """Simulate one SIC measurement run.

    Pure inputs go through the compiled circuit; the Born-rule path is also
    evaluated and the two must agree within ``agreement_tol``.  Mixed inputs
    use the Born rule on the effects directly.  Returns ``(record, ideal)``.
    """
    label = device_label(device)
    d = DEVICES[label]
    rho = state.projector() if isinstance(state, PureState) else state
    if rho.dim != d:
        raise ValueError(f"state dim {rho.dim} does not match device {label}")
    born = detector_distribution(rho, device_povm(label))
    pure = _as_pure(state)
    if pure is not None:
        circuit = circuit_distribution(pure, label)
        gap = float(np.max(np.abs(circuit - born.probs)))
        if gap > agreement_tol:
            raise RuntimeError(f"circuit and Born probabilities disagree by {gap:.3g}")
        ideal = OutcomeDistribution(circuit)
    else:
        ideal = born
    record = sample_counts(ideal, shots, seed, label)
    return record, ideal
