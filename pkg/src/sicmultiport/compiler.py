"""Compile unitaries into optical netlists.

Two routes:

* :func:`reck_decompose` handles any unitary with the triangular scheme
  (at most ``N**2 - 1`` elements).
* :func:`qubit_sic_netlist` and :func:`qutrit_sic_netlist` build the
  SIC measurement circuits from their hand factorizations, which need far
  fewer elements.

Every netlist here is checked by :func:`recompose` in the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .netlist import (
    OpticalNetlist,
    beam_splitter,
    mode_swap,
    permutation_swaps,
    phase_shifter,
    recompose_matrix,
    simplify,
    wrap_phase,
)
from .qstate import UnitaryMatrix, check_unitary, phase_aligned_distance
from .sic import OMEGA


@dataclass(frozen=True)
class EulerAngles:
    """Angles of ``R1(x) @ R2(y) @ R3(z)`` (rotations about axes 1, 2, 3)."""

    x: float
    y: float
    z: float

    def matrix(self) -> np.ndarray:
        return rot1(self.x) @ rot2(self.y) @ rot3(self.z)


def rot1(x: float) -> np.ndarray:
    c, s = math.cos(x), math.sin(x)
    return np.array([[1, 0, 0], [0, c, -s], [0, s, c]])


def rot2(y: float) -> np.ndarray:
    c, s = math.cos(y), math.sin(y)
    return np.array([[c, 0, -s], [0, 1, 0], [s, 0, c]])


def rot3(z: float) -> np.ndarray:
    c, s = math.cos(z), math.sin(z)
    return np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]])


QUTRIT_EULER = EulerAngles(-math.pi / 4, -math.acos(-1.0 / math.sqrt(3.0)), math.pi / 2)


# -- factor matrices ---------------------------------------------------------


def qubit_factors() -> list[np.ndarray]:
    """``[U1, ..., U7]`` with ``U = U1 @ U2 @ ... @ U7``."""
    r2, r3 = math.sqrt(2.0), math.sqrt(3.0)
    u1 = np.array([[1, 0, 1, 0], [0, 1, 0, 1], [1, 0, -1, 0], [0, 1, 0, -1]]) / r2
    u2 = np.array([[r3, 0, 0, 0], [0, 1, r2, 0], [0, -r2, 1, 0], [0, 0, 0, r3]]) / r3
    u3 = np.eye(4)[[0, 2, 1, 3]]
    u4 = np.diag([1, 1, np.exp(1j * math.pi / 3), np.exp(-1j * math.pi / 6)])
    u5 = np.diag([1.0, 1.0, -1.0, 1.0])
    u6 = np.array([[r2, 0, 0, 0], [0, r2, 0, 0], [0, 0, 1, 1], [0, 0, 1, -1]]) / r2
    u7 = np.diag([1, 1, 1, np.exp(-2j * math.pi / 3)])
    return [np.asarray(u, dtype=complex) for u in (u1, u2, u3, u4, u5, u6, u7)]


def qutrit_rotation() -> np.ndarray:
    r2, r3 = math.sqrt(2.0), math.sqrt(3.0)
    return np.array([[0, r2, 2], [r3, r2, -1], [-r3, r2, -1]]) / math.sqrt(6.0)


def qutrit_phase_factors() -> list[np.ndarray]:
    """``[D1, D2, D3]``; they differ only by a cube-root-of-unity phase on mode 3."""
    return [np.diag([-1j, 1, OMEGA**k]) for k in range(3)]


def qutrit_permutations() -> list[np.ndarray]:
    """``[G1, G2, G3]`` such that ``Q_k^dag = G_k @ R @ D_k``.

    G2 is the cyclic shift sending mode 1 to 2; G3 is its inverse.  With
    the two exchanged the identity fails for k = 2, 3.
    """
    g1 = np.eye(3)
    g2 = np.array([[0, 0, 1], [1, 0, 0], [0, 1, 0]])
    g3 = np.array([[0, 1, 0], [0, 0, 1], [1, 0, 0]])
    return [g1.astype(complex), g2.astype(complex), g3.astype(complex)]


def qutrit_blocks() -> list[np.ndarray]:
    """Reference ``Q1, Q2, Q3`` (diagonal blocks of ``S V S^dag``)."""
    w, w2, r = OMEGA, OMEGA**2, math.sqrt(2.0)
    q1 = np.array([[0, w - w2, w2 - w], [r, r, r], [2, -1, -1]])
    q2 = np.array([[w2 - w, 0, w - w2], [r, r, r], [-w2, 2 * w2, -w2]])
    q3 = np.array([[w - w2, w2 - w, 0], [r, r, r], [-w, -w, 2 * w]])
    return [np.asarray(q, dtype=complex) / math.sqrt(6.0) for q in (q1, q2, q3)]


def fourier_premix() -> np.ndarray:
    """The 3x3 matrix ``M`` with ``P = Q1^dag @ M``."""
    r2 = math.sqrt(2.0)
    return np.array([[1, -1, 0], [0, 0, r2], [1, 1, 0]], dtype=complex) / r2


# -- element builders --------------------------------------------------------


def rotation_to_elements(alpha: float, modes=(0, 1)) -> list:
    """Elements realizing ``[[cos a, -sin a], [sin a, cos a]]`` on ``modes``.

    Always one beam splitter with ``eps = cos(a)**2`` and one pi phase
    shifter.  The quadrant of ``a`` decides where the phase goes: for
    ``0 <= a <= pi/2`` it sits on the second mode before the beam splitter.
    """
    i, j = modes
    c, s = math.cos(alpha), math.sin(alpha)
    sc = -1.0 if c < -1e-15 else 1.0
    ss = -1.0 if s < -1e-15 else 1.0
    bs = beam_splitter(i, j, c * c)
    if sc * ss > 0:
        # R = BS @ diag(1, -1) or BS @ diag(-1, 1)
        return [phase_shifter(j if sc > 0 else i, math.pi), bs]
    # R = diag(1, -1) @ BS or diag(-1, 1) @ BS
    return [bs, phase_shifter(j if sc > 0 else i, math.pi)]


def _diag_elements(phases, modes):
    return [phase_shifter(m, ph) for m, ph in zip(modes, phases) if abs(ph) > 1e-15]


@lru_cache(maxsize=None)
def qubit_sic_netlist(optimize: bool = True) -> OpticalNetlist:
    """Netlist for ``U^dag`` on four modes.

    Reading ``U = U1 ... U7`` backwards and conjugating gives the element
    order ``U1^dag`` first.  With ``optimize`` the phases are merged and the
    sign of ``U2`` is absorbed as an input relabeling, giving 7 elements.
    """
    els = [
        # U1 (self-inverse): 50:50 on (1,3) and (2,4)
        beam_splitter(0, 2, 0.5),
        beam_splitter(1, 3, 0.5),
    ]
    # U2^dag is a rotation by arccos(1/sqrt(3)) on (2,3)
    els += rotation_to_elements(math.acos(1.0 / math.sqrt(3.0)), (1, 2))
    els.append(mode_swap(1, 2))  # U3
    els += _diag_elements([-math.pi / 3, math.pi / 6], (2, 3))  # U4^dag
    els.append(phase_shifter(2, math.pi))  # U5^dag
    els.append(beam_splitter(2, 3, 0.5))  # U6
    els.append(phase_shifter(3, 2 * math.pi / 3))  # U7^dag
    net = OpticalNetlist(4, tuple(els), "qubit-sic")
    return simplify(net) if optimize else net


def qk_dagger_netlist(k: int, optimize: bool = True) -> OpticalNetlist:
    """``Q_k^dag = G_k R D_k`` on three modes (k = 1, 2, 3)."""
    if k not in (1, 2, 3):
        raise ValueError("k must be 1, 2 or 3")
    d = np.diag(qutrit_phase_factors()[k - 1])
    els = _diag_elements(np.angle(d), range(3))
    ang = QUTRIT_EULER
    els += rotation_to_elements(ang.z, (0, 1))  # R3
    els += rotation_to_elements(ang.y, (0, 2))  # R2
    els += rotation_to_elements(ang.x, (1, 2))  # R1
    els += permutation_swaps(qutrit_permutations()[k - 1])
    net = OpticalNetlist(3, tuple(els), f"Q{k}^dag")
    return simplify(net) if optimize else net


def fourier_netlist(optimize: bool = True) -> OpticalNetlist:
    """Three-mode netlist for the Fourier matrix ``P = Q1^dag @ M``.

    ``M`` is an equal beam splitter on modes (1, 2) followed by routing
    the outputs to (3, 1) and mode 3 to mode 2.
    """
    pre = [beam_splitter(0, 1, 0.5), mode_swap(0, 1), mode_swap(1, 2)]
    net = OpticalNetlist(3, tuple(pre), "M").then(qk_dagger_netlist(1, optimize), label="P")
    return simplify(net) if optimize else net


_S_TRIPLES = ((0, 3, 6), (1, 4, 7), (2, 5, 8))
_Q_TRIPLES = ((0, 1, 2), (3, 4, 5), (6, 7, 8))


@lru_cache(maxsize=None)
def qutrit_sic_netlist(optimize: bool = True) -> OpticalNetlist:
    """Nine-mode netlist for ``V^dag = S^dag Q^dag S``.

    Layer 1 applies ``P`` on mode triples (1,4,7), (2,5,8), (3,6,9); layer 2
    applies ``Q_k^dag`` on (1,2,3), (4,5,6), (7,8,9); layer 3 applies ``P^dag``
    on the same triples as layer 1.
    """
    p = fourier_netlist(optimize)
    net = OpticalNetlist(9, (), "qutrit-sic")
    for tri in _S_TRIPLES:
        net = net.then(p.placed(tri, 9))
    for k, tri in enumerate(_Q_TRIPLES, start=1):
        net = net.then(qk_dagger_netlist(k, optimize).placed(tri, 9))
    pdag = p.dagger()
    for tri in _S_TRIPLES:
        net = net.then(pdag.placed(tri, 9))
    net = OpticalNetlist(9, net.elements, "qutrit-sic")
    return simplify(net) if optimize else net


def sic_netlist(device: str) -> OpticalNetlist:
    if device in ("qubit", "qubit-sic", "2"):
        return qubit_sic_netlist()
    if device in ("qutrit", "qutrit-sic", "3"):
        return qutrit_sic_netlist()
    raise ValueError(f"unknown device {device!r}")


# -- Reck triangular decomposition ------------------------------------------


def _nulling_params(a: complex, b: complex) -> tuple[float, float]:
    """``(eps, phi)`` with ``BS(eps) @ diag(exp(-i phi), 1) @ (a, b)`` having zero second entry."""
    na, nb = abs(a), abs(b)
    if nb == 0.0:
        return 1.0, 0.0
    if na == 0.0:
        return 0.0, 0.0
    eps = na * na / (na * na + nb * nb)
    return eps, float(np.angle(a) - np.angle(b))


def reck_decompose(U, tol: float = 1e-10) -> OpticalNetlist:
    """Triangular beam-splitter/phase-shifter mesh for ``U`` up to global phase.

    Sub-diagonal entries of ``U^dag`` are nulled column by column, bottom-up
    within a column, by adjacent-mode blocks.  Each block contributes one
    beam splitter and at most one phase shifter; at most ``N - 1`` output
    phase shifters follow.  The total never exceeds ``N**2 - 1``.
    """
    u = U.matrix if isinstance(U, UnitaryMatrix) else np.asarray(U, dtype=complex)
    report = check_unitary(u, tol)
    if not report.ok:
        raise ValueError(f"input is not unitary (defect {report.defect:.3g})")
    n = u.shape[0]
    a = u.conj().T.copy()
    blocks = []
    for c in range(n - 1):
        for r in range(n - 1, c, -1):
            eps, phi = _nulling_params(a[r - 1, c], a[r, c])
            t_dag = np.array(
                [
                    [math.sqrt(eps) * np.exp(-1j * phi), math.sqrt(1 - eps)],
                    [math.sqrt(1 - eps) * np.exp(-1j * phi), -math.sqrt(eps)],
                ]
            )
            a[[r - 1, r], :] = t_dag @ a[[r - 1, r], :]
            a[r, c] = 0.0
            blocks.append((r - 1, r, eps, phi))
    # now U^dag = T_1 ... T_K D, so U = D^dag T_K^dag ... T_1^dag
    els = []
    for i, j, eps, phi in blocks:
        if abs(wrap_phase(phi)) > 1e-14:
            els.append(phase_shifter(i, -phi))
        els.append(beam_splitter(i, j, eps))
    diag = np.angle(np.diag(a))
    ref = diag[0]
    for m in range(1, n):
        ph = -(diag[m] - ref)
        if abs(wrap_phase(ph)) > 1e-14:
            els.append(phase_shifter(m, ph))
    return OpticalNetlist(n, tuple(els), "reck")


# -- verification ------------------------------------------------------------


@dataclass(frozen=True)
class RecompositionReport:
    defect: float
    tol: float
    up_to_global_phase: bool
    element_count: int

    @property
    def passed(self) -> bool:
        return self.defect <= self.tol


def verify_netlist(net: OpticalNetlist, target, tol: float = 1e-9, up_to_global_phase: bool = True):
    """Compare ``recompose(net)`` with ``target`` in Frobenius norm."""
    t = target.matrix if isinstance(target, UnitaryMatrix) else np.asarray(target, dtype=complex)
    if t.shape != (net.num_modes, net.num_modes):
        raise ValueError(f"target shape {t.shape} does not match {net.num_modes} modes")
    m = recompose_matrix(net)
    if up_to_global_phase:
        defect = phase_aligned_distance(m, t)
    else:
        defect = float(np.linalg.norm(m - t))
    return RecompositionReport(defect, tol, up_to_global_phase, net.count())
