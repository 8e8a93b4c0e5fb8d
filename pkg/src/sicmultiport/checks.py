"""Invariant suite behind ``verify-all`` and the pipeline gates."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .compiler import (
    QUTRIT_EULER,
    qubit_factors,
    qubit_sic_netlist,
    qutrit_blocks,
    qutrit_permutations,
    qutrit_phase_factors,
    qutrit_sic_netlist,
    reck_decompose,
    verify_netlist,
)
from .naimark import (
    block_circulant_parts,
    fourier_matrix,
    naimark_for_dim,
    qubit_naimark_matrix,
    qutrit_naimark_matrix,
    verify_probability_scaling,
)
from .netlist import OpticalNetlist, recompose_matrix, validate_netlist
from .qstate import check_unitary, random_pure_state
from .sic import qubit_sic, qutrit_sic, verify_sic
from .tomography import sic_probabilities, derive_affine_lines

QUBIT_ELEMENT_LIMIT = 7
QUTRIT_ELEMENT_LIMIT = 44


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: float | None = None
    limit: float | None = None
    detail: str = ""

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "value": self.value,
            "limit": self.limit,
            "detail": self.detail,
        }


def _bound(name, value, limit, detail=""):
    value = float(value)
    return CheckResult(name, bool(value <= limit), value, float(limit), detail)


def check_gram() -> list[CheckResult]:
    out = []
    for povm, tag in ((qubit_sic(), "qubit"), (qutrit_sic(), "qutrit")):
        rep = verify_sic(povm, tol=1e-12)
        out.append(_bound(f"sic-gram-{tag}", max(rep.gram_deviation, rep.identity_deviation), 1e-12))
    return out


def check_naimark(samples: int = 100, seed: int = 7) -> list[CheckResult]:
    out = []
    for d, tag in ((2, "qubit"), (3, "qutrit")):
        ext = naimark_for_dim(d)
        m = ext.completion.matrix
        out.append(_bound(f"naimark-unitary-{tag}", check_unitary(m, 1e-12).defect, 1e-12))
        cols = m.conj().T @ m
        out.append(_bound(f"naimark-columns-{tag}", np.max(np.abs(cols - np.eye(m.shape[0]))), 1e-10))
        worst = max(
            verify_probability_scaling(random_pure_state(d, seed + k), ext) for k in range(samples)
        )
        out.append(_bound(f"naimark-scaling-{tag}", worst, 1e-10, f"{samples} random states"))
    return out


def check_factorizations() -> list[CheckResult]:
    prod = np.linalg.multi_dot(qubit_factors())
    out = [_bound("factor-qubit", np.linalg.norm(prod - qubit_naimark_matrix()), 1e-10)]
    R = QUTRIT_EULER.matrix()
    blocks = [
        (G @ R @ D).conj().T for G, D in zip(qutrit_permutations(), qutrit_phase_factors())
    ]
    S = np.kron(fourier_matrix(), np.eye(3))
    Q = np.zeros((9, 9), dtype=complex)
    for k, b in enumerate(blocks):
        Q[3 * k : 3 * k + 3, 3 * k : 3 * k + 3] = b
    V = qutrit_naimark_matrix()
    out.append(_bound("factor-qutrit", np.linalg.norm(S.conj().T @ Q @ S - V), 1e-10))
    parts = block_circulant_parts(V)
    reference = qutrit_blocks()
    out.append(
        _bound(
            "factor-qutrit-blocks",
            max(np.linalg.norm(q.matrix - p) for q, p in zip(parts.blocks, reference)),
            1e-10,
        )
    )
    return out


def check_netlist(net: OpticalNetlist, target, limit: int, name: str, tol: float = 1e-9) -> list[CheckResult]:
    rep = verify_netlist(net, target, tol=tol)
    return [
        CheckResult(f"{name}-count", net.count() <= limit, float(net.count()), float(limit)),
        _bound(f"{name}-recompose", rep.defect, tol, "up to global phase"),
    ]


def check_compiled(tol: float = 1e-9) -> list[CheckResult]:
    U = qubit_naimark_matrix()
    V = qutrit_naimark_matrix()
    out = []
    out += check_netlist(qubit_sic_netlist(), U.conj().T, QUBIT_ELEMENT_LIMIT, "compile-qubit", tol)
    out += check_netlist(qutrit_sic_netlist(), V.conj().T, QUTRIT_ELEMENT_LIMIT, "compile-qutrit", tol)
    out += check_netlist(reck_decompose(U), U, 15, "reck-qubit", tol)
    out += check_netlist(reck_decompose(V), V, 80, "reck-qutrit", tol)
    return out


def check_manifold(samples: int = 1000, seed: int = 99) -> list[CheckResult]:
    try:
        lines = derive_affine_lines()
    except ValueError as exc:
        return [CheckResult("affine-lines", False, detail=str(exc))]
    from .kernels import purity_residuals_batch

    povm = qutrit_sic()
    states = np.array([random_pure_state(3, seed + k).amplitudes for k in range(samples)])
    res = purity_residuals_batch(sic_probabilities(povm, states), lines.as_array())
    return [
        CheckResult("affine-lines", True, 12.0, 12.0, "AG(2,3) structure"),
        _bound("manifold-quadratic", np.max(np.abs(res[:, 0])), 1e-10, f"{samples} random states"),
        _bound("manifold-cubic", np.max(np.abs(res[:, 1])), 1e-10, f"{samples} random states"),
    ]


def check_netlist_file(net: OpticalNetlist, name: str, tol: float = 1e-10) -> list[CheckResult]:
    problems = validate_netlist(net)
    if problems:
        return [CheckResult(f"{name}-elements", False, detail="; ".join(problems))]
    m = recompose_matrix(net)
    return [
        CheckResult(f"{name}-elements", True),
        _bound(f"{name}-unitary", check_unitary(m, tol).defect, tol),
    ]


def run_all(tol: float = 1e-9) -> list[CheckResult]:
    return check_gram() + check_naimark() + check_factorizations() + check_compiled(tol) + check_manifold()


def format_table(results: list[CheckResult]) -> str:
    width = max(len(r.name) for r in results)
    lines = []
    for r in results:
        val = "" if r.value is None else f"{r.value:.3e}"
        lim = "" if r.limit is None else f"<= {r.limit:.0e}" if r.limit < 1 else f"<= {r.limit:g}"
        status = "PASS" if r.passed else "FAIL"
        row = f"{status}  {r.name:<{width}}  {val:>10}  {lim:<9}"
        if r.detail:
            row += f"  {r.detail}"
        lines.append(row.rstrip())
    return "\n".join(lines)
