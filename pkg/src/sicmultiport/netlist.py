"""Optical netlists of two-mode beam splitters and single-mode phase shifters (plus free mode swaps).

Conventions
-----------
* Modes are 0-based in Python and 1-based in JSON.
* A beam splitter with reflectivity ``eps`` on the ordered pair ``(i, j)``
  acts as ``[[sqrt(eps), sqrt(1-eps)], [sqrt(1-eps), -sqrt(eps)]]``.
* A phase shifter multiplies one mode by ``exp(i*phase)``.
* Elements apply first-to-last to the input amplitude vector, so the
  netlist unitary is ``E_last @ ... @ E_first``.
* Mode swaps are relabelings and cost nothing in :meth:`OpticalNetlist.count`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .qstate import UnitaryMatrix

BEAM_SPLITTER = "beam_splitter"
PHASE_SHIFTER = "phase_shifter"
MODE_SWAP = "mode_swap"

_KIND_CODE = {BEAM_SPLITTER: 0, PHASE_SHIFTER: 1, MODE_SWAP: 2}
_JSON_KIND = {BEAM_SPLITTER: "bs", PHASE_SHIFTER: "ps", MODE_SWAP: "swap"}
_KIND_FROM_JSON = {v: k for k, v in _JSON_KIND.items()}

_EPS_CLAMP = 1e-9
_PHASE_ZERO = 1e-12


def wrap_phase(phase: float) -> float:
    """Map a phase into (-pi, pi]."""
    w = math.remainder(phase, 2 * math.pi)
    if w <= -math.pi:
        w += 2 * math.pi
    return w


@dataclass(frozen=True)
class OpticalElement:
    kind: str
    modes: tuple[int, ...]
    eps: float | None = None
    phase: float | None = None

    def __post_init__(self):
        if self.kind not in _KIND_CODE:
            raise ValueError(f"unknown element kind {self.kind!r}")
        modes = tuple(int(m) for m in self.modes)
        want = 1 if self.kind == PHASE_SHIFTER else 2
        if len(modes) != want:
            raise ValueError(f"{self.kind} takes {want} mode(s), got {modes}")
        if len(set(modes)) != len(modes):
            raise ValueError(f"mode indices must be distinct, got {modes}")
        object.__setattr__(self, "modes", modes)

    @property
    def cost(self) -> int:
        return 0 if self.kind == MODE_SWAP else 1

    def matrix(self) -> np.ndarray:
        """Local 2x2 (or 1x1) matrix on ``self.modes``."""
        if self.kind == BEAM_SPLITTER:
            r, t = math.sqrt(self.eps), math.sqrt(1.0 - self.eps)
            return np.array([[r, t], [t, -r]], dtype=complex)
        if self.kind == PHASE_SHIFTER:
            return np.array([[np.exp(1j * self.phase)]])
        return np.array([[0, 1], [1, 0]], dtype=complex)

    def dagger(self) -> OpticalElement:
        if self.kind == PHASE_SHIFTER:
            return phase_shifter(self.modes[0], -self.phase)
        return self

    def relabel(self, mapping) -> OpticalElement:
        return OpticalElement(self.kind, tuple(mapping[m] for m in self.modes), self.eps, self.phase)

    def to_json(self) -> dict:
        out = {"kind": _JSON_KIND[self.kind]}
        if self.kind == PHASE_SHIFTER:
            out["mode"] = self.modes[0] + 1
            out["phase"] = self.phase
        else:
            out["modes"] = [m + 1 for m in self.modes]
        if self.kind == BEAM_SPLITTER:
            out["eps"] = self.eps
        return out

    @classmethod
    def from_json(cls, obj: dict) -> OpticalElement:
        try:
            kind = _KIND_FROM_JSON[obj["kind"]]
        except KeyError as exc:
            raise ValueError(f"unknown element kind in {obj!r}") from exc
        if kind == PHASE_SHIFTER:
            return cls(kind, (int(obj["mode"]) - 1,), phase=float(obj["phase"]))
        modes = tuple(int(m) - 1 for m in obj["modes"])
        if kind == BEAM_SPLITTER:
            return cls(kind, modes, eps=float(obj["eps"]))
        return cls(kind, modes)


def beam_splitter(i: int, j: int, eps: float) -> OpticalElement:
    """Beam splitter with ``eps`` clamped into [0, 1] when it is off by rounding only."""
    if -_EPS_CLAMP <= eps < 0.0:
        eps = 0.0
    elif 1.0 < eps <= 1.0 + _EPS_CLAMP:
        eps = 1.0
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"reflectivity {eps!r} outside [0, 1]")
    return OpticalElement(BEAM_SPLITTER, (i, j), eps=float(eps))


def phase_shifter(i: int, phase: float) -> OpticalElement:
    return OpticalElement(PHASE_SHIFTER, (i,), phase=wrap_phase(float(phase)))


def mode_swap(i: int, j: int) -> OpticalElement:
    return OpticalElement(MODE_SWAP, (i, j))


@dataclass(frozen=True)
class OpticalNetlist:
    num_modes: int
    elements: tuple[OpticalElement, ...] = ()
    label: str = ""
    _arrays: tuple = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        els = tuple(self.elements)
        for el in els:
            for m in el.modes:
                if not 0 <= m < self.num_modes:
                    raise ValueError(
                        f"mode {m + 1} out of range for a {self.num_modes}-mode netlist"
                    )
        object.__setattr__(self, "elements", els)

    def __len__(self):
        return len(self.elements)

    def count(self, include_swaps: bool = False) -> int:
        """Number of optical elements; swaps only when ``include_swaps``."""
        if include_swaps:
            return len(self.elements)
        return sum(el.cost for el in self.elements)

    def count_by_kind(self) -> dict:
        out = {BEAM_SPLITTER: 0, PHASE_SHIFTER: 0, MODE_SWAP: 0}
        for el in self.elements:
            out[el.kind] += 1
        return out

    def then(self, other: OpticalNetlist, label: str | None = None) -> OpticalNetlist:
        """This netlist followed by ``other``."""
        if other.num_modes != self.num_modes:
            raise ValueError("cannot chain netlists with different mode counts")
        return OpticalNetlist(
            self.num_modes, self.elements + other.elements, self.label if label is None else label
        )

    def dagger(self) -> OpticalNetlist:
        """Netlist for the inverse unitary."""
        els = tuple(el.dagger() for el in reversed(self.elements))
        return OpticalNetlist(self.num_modes, els, self.label + "^dag" if self.label else "")

    def placed(self, modes, num_modes: int) -> OpticalNetlist:
        """Embed this netlist on the given modes of a larger device."""
        if len(modes) != self.num_modes:
            raise ValueError("mode map length must equal the netlist's mode count")
        els = tuple(el.relabel(modes) for el in self.elements)
        return OpticalNetlist(num_modes, els, self.label)

    def kernel_arrays(self):
        if self._arrays is None:
            n = len(self.elements)
            kinds = np.empty(n, dtype=np.int8)
            m1 = np.zeros(n, dtype=np.int64)
            m2 = np.zeros(n, dtype=np.int64)
            params = np.zeros(n)
            for k, el in enumerate(self.elements):
                kinds[k] = _KIND_CODE[el.kind]
                m1[k] = el.modes[0]
                if len(el.modes) > 1:
                    m2[k] = el.modes[1]
                if el.kind == BEAM_SPLITTER:
                    params[k] = el.eps
                elif el.kind == PHASE_SHIFTER:
                    params[k] = el.phase
            object.__setattr__(self, "_arrays", (kinds, m1, m2, params))
        return self._arrays

    def to_json(self) -> dict:
        out = {"modes": self.num_modes, "elements": [el.to_json() for el in self.elements]}
        if self.label:
            out["label"] = self.label
        return out

    @classmethod
    def from_json(cls, obj: dict) -> OpticalNetlist:
        els = [OpticalElement.from_json(e) for e in obj.get("elements", [])]
        return cls(int(obj["modes"]), tuple(els), obj.get("label", ""))


def validate_netlist(net: OpticalNetlist) -> list[str]:
    """Return a list of invariant violations (empty when the netlist is valid)."""
    problems = []
    for k, el in enumerate(net.elements):
        if el.kind == BEAM_SPLITTER:
            if el.eps is None or not (0.0 <= el.eps <= 1.0) or math.isnan(el.eps):
                problems.append(f"element {k + 1}: beam splitter reflectivity {el.eps!r} outside [0, 1]")
        elif el.kind == PHASE_SHIFTER:
            if el.phase is None or not math.isfinite(el.phase):
                problems.append(f"element {k + 1}: phase {el.phase!r} is not finite")
    return problems


def propagate_batch(net: OpticalNetlist, states, impl=None) -> np.ndarray:
    """Apply ``net`` to every row of ``states``."""
    states = np.atleast_2d(np.asarray(states, dtype=complex))
    if states.shape[1] != net.num_modes:
        raise ValueError(
            f"input has {states.shape[1]} modes, netlist has {net.num_modes}"
        )
    problems = validate_netlist(net)
    if problems:
        raise ValueError("; ".join(problems))
    return kernels.apply_elements(*net.kernel_arrays(), states, impl=impl)


def recompose_matrix(net: OpticalNetlist, impl=None) -> np.ndarray:
    """Unitary of ``net`` as a plain array (no unitarity check)."""
    # row k of the output is the image of basis vector k, i.e. column k of the unitary
    return propagate_batch(net, np.eye(net.num_modes), impl=impl).T


def recompose(net: OpticalNetlist) -> UnitaryMatrix:
    return UnitaryMatrix(recompose_matrix(net))


def embed_element_matrix(el: OpticalElement, num_modes: int) -> np.ndarray:
    """Full ``num_modes`` matrix of a single element (identity elsewhere)."""
    m = np.eye(num_modes, dtype=complex)
    idx = list(el.modes)
    m[np.ix_(idx, idx)] = el.matrix()
    return m


def permutation_swaps(perm_matrix, modes=None) -> list[OpticalElement]:
    """Swaps whose product is the given permutation matrix.

    ``perm_matrix[r, c] == 1`` routes input mode ``c`` to output mode ``r``.
    """
    pm = np.asarray(perm_matrix)
    n = pm.shape[0]
    modes = list(range(n)) if modes is None else list(modes)
    target = [int(np.argmax(np.abs(pm[r]))) for r in range(n)]
    content = list(range(n))
    swaps = []
    for r in range(n):
        if content[r] != target[r]:
            s = content.index(target[r])
            content[r], content[s] = content[s], content[r]
            swaps.append(mode_swap(modes[r], modes[s]))
    return swaps


# -- peephole simplification ------------------------------------------------


def _prev_on_mode(els, k, mode):
    for q in range(k - 1, -1, -1):
        if mode in els[q].modes:
            return q
    return None


def _next_on_mode(els, k, mode):
    for q in range(k + 1, len(els)):
        if mode in els[q].modes:
            return q
    return None


def _is_pi(el):
    return el.kind == PHASE_SHIFTER and abs(abs(el.phase) - math.pi) < _PHASE_ZERO


def _simplify_once(els):
    # degenerate beam splitters: eps=0 is a swap, eps=1 is a pi shift on the second mode
    for k, el in enumerate(els):
        if el.kind == BEAM_SPLITTER and el.eps == 0.0:
            els[k] = mode_swap(*el.modes)
            return True
        if el.kind == BEAM_SPLITTER and el.eps == 1.0:
            els[k] = phase_shifter(el.modes[1], math.pi)
            return True
    for k, el in enumerate(els):
        if el.kind != PHASE_SHIFTER:
            continue
        mode = el.modes[0]
        if abs(el.phase) < _PHASE_ZERO:
            del els[k]
            return True
        q = _prev_on_mode(els, k, mode)
        if q is None:
            continue
        prev = els[q]
        if prev.kind == PHASE_SHIFTER:
            els[q] = phase_shifter(mode, prev.phase + el.phase)
            del els[k]
            return True
        if prev.kind == MODE_SWAP:
            # a phase after a swap equals the same phase before it on the partner mode
            other = prev.modes[0] if prev.modes[1] == mode else prev.modes[1]
            del els[k]
            els.insert(q, phase_shifter(other, el.phase))
            return True
    for k, el in enumerate(els):
        if not _is_pi(el):
            continue
        mode = el.modes[0]
        # diag(1,-1) @ BS(eps) == BS(1-eps) @ swap
        q = _prev_on_mode(els, k, mode)
        if q is not None and els[q].kind == BEAM_SPLITTER and els[q].modes[1] == mode:
            bs = els[q]
            del els[k]
            els[q] = beam_splitter(*bs.modes, 1.0 - bs.eps)
            els.insert(q, mode_swap(*bs.modes))
            return True
        # BS(eps) @ diag(1,-1) == swap @ BS(1-eps)
        q = _next_on_mode(els, k, mode)
        if q is not None and els[q].kind == BEAM_SPLITTER and els[q].modes[1] == mode:
            bs = els[q]
            els[q] = beam_splitter(*bs.modes, 1.0 - bs.eps)
            els.insert(q + 1, mode_swap(*bs.modes))
            del els[k]
            return True
    for k, el in enumerate(els):
        if el.kind == MODE_SWAP:
            q = _next_on_mode(els, k, el.modes[0])
            if (
                q is not None
                and q == _next_on_mode(els, k, el.modes[1])
                and els[q].kind == MODE_SWAP
                and set(els[q].modes) == set(el.modes)
            ):
                del els[q]
                del els[k]
                return True
    return False


def absorb_swaps(els, num_modes: int) -> list:
    """Fold every swap into a relabeling of later elements.

    The residual permutation is emitted as at most ``num_modes - 1``
    swaps at the end of the circuit.
    """
    # the true state at mode k lives on wire perm[k] of the relabeled circuit
    perm = list(range(num_modes))
    out = []
    for el in els:
        if el.kind == MODE_SWAP:
            i, j = el.modes
            perm[i], perm[j] = perm[j], perm[i]
        else:
            out.append(el.relabel(perm))
    cur = list(range(num_modes))
    for k in range(num_modes):
        if cur[k] != perm[k]:
            j = cur.index(perm[k])
            out.append(mode_swap(k, j))
            cur[k], cur[j] = cur[j], cur[k]
    return out


def simplify(net: OpticalNetlist) -> OpticalNetlist:
    """Exact peephole rewrites that never increase the element count.

    Merges phase shifters on the same mode (moving them through swaps),
    drops zero phases and cancelling swap pairs, turns eps=0/1 beam
    splitters into a swap/phase, and absorbs a pi phase on a beam
    splitter's second mode into a swap plus ``eps -> 1 - eps``.  Finally
    all swaps are folded into a mode relabeling with one permutation at
    the output.
    """
    els = list(net.elements)
    while _simplify_once(els):
        pass
    els = absorb_swaps(els, net.num_modes)
    return OpticalNetlist(net.num_modes, tuple(els), net.label)
