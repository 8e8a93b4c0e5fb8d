"""State estimation from SIC statistics.

Two estimators:

* :func:`linear_reconstruct` inverts exact probabilities; on noisy
  frequencies the result stays Hermitian and unit-trace but can lose
  positivity.
* :func:`project_to_pure_manifold` (qutrit only) finds the probability
  vector closest to the observed frequencies among those produced by pure
  states.  That set is cut out by ``sum p^2 = 1/6`` and a cubic identity
  over the twelve lines of the affine plane AG(2,3) on the outcome labels.

The line set is not hard-coded.  :func:`derive_affine_lines` recovers it
from random pure-state statistics, so it always matches the outcome
ordering in :mod:`sicmultiport.sic`.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import kernels
from .qstate import DensityOperator, OutcomeDistribution, PureState, random_pure_state
from .sic import SicPovm, qutrit_sic


@dataclass(frozen=True)
class AffineLineSet:
    """Twelve 3-subsets of the nine outcomes with the incidence structure of AG(2,3)."""

    triples: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        triples = tuple(sorted(tuple(sorted(int(x) for x in t)) for t in self.triples))
        object.__setattr__(self, "triples", triples)
        problems = affine_structure_problems(triples)
        if problems:
            raise ValueError("not an affine plane of order 3: " + "; ".join(problems))

    def as_array(self) -> np.ndarray:
        return np.array(self.triples, dtype=np.int64)

    def parallel_classes(self) -> list[list[tuple[int, int, int]]]:
        return _parallel_classes(self.triples)

    def to_json(self) -> list:
        return [[i + 1 for i in t] for t in self.triples]


def _parallel_classes(triples):
    remaining = list(triples)
    classes = []
    while remaining:
        t = remaining.pop(0)
        cls = [t] + [u for u in remaining if not set(u) & set(t)]
        remaining = [u for u in remaining if u not in cls]
        classes.append(cls)
    return classes


def affine_structure_problems(triples) -> list[str]:
    problems = []
    if len(triples) != 12 or len(set(triples)) != 12:
        problems.append(f"expected 12 distinct triples, got {len(set(triples))}")
    if any(len(set(t)) != 3 or not all(0 <= i < 9 for i in t) for t in triples):
        problems.append("each triple must hold three distinct indices in 0..8")
        return problems
    counts = np.bincount([i for t in triples for i in t], minlength=9)
    if not np.all(counts == 4):
        problems.append(f"point multiplicities {counts.tolist()} (each should be 4)")
    pair_hits = {}
    for t in triples:
        for pr in itertools.combinations(t, 2):
            pair_hits[pr] = pair_hits.get(pr, 0) + 1
    if len(pair_hits) != 36 or any(v != 1 for v in pair_hits.values()):
        problems.append("some pair of points is not on exactly one line")
    classes = _parallel_classes(list(triples))
    if len(classes) != 4 or any(
        len(c) != 3 or sorted(i for t in c for i in t) != list(range(9)) for c in classes
    ):
        problems.append("lines do not split into 4 parallel classes partitioning the points")
    return problems


@dataclass(frozen=True)
class PureStateEstimate:
    p_star: OutcomeDistribution
    rho_star: DensityOperator
    state: PureState
    residual_quad: float
    residual_cubic: float
    distance: float
    iterations: int
    converged: bool
    kkt_residual: float
    eigen_gap: float
    diagnostics: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        from .jsonio import encode_array

        return {
            "p_star": self.p_star.probs.tolist(),
            "rho": encode_array(self.rho_star.matrix),
            "state": encode_array(self.state.amplitudes),
            "residual_quad": self.residual_quad,
            "residual_cubic": self.residual_cubic,
            "distance": self.distance,
            "iterations": self.iterations,
            "converged": self.converged,
            "kkt_residual": self.kkt_residual,
            "eigen_gap": self.eigen_gap,
            "simplex_constraints": True,
            "diagnostics": self.diagnostics,
        }


# -- linear inversion ----------------------------------------------------------


def linear_reconstruct(p, povm: SicPovm) -> DensityOperator:
    """``rho = sum_i [(d+1) p_i - 1/d] Pi_i``; ``psd`` may come out False."""
    probs = p.probs if isinstance(p, OutcomeDistribution) else np.asarray(p, dtype=float)
    d = povm.dim
    if probs.shape != (d * d,):
        raise ValueError(f"expected {d * d} probabilities, got {probs.shape}")
    # the inversion is only trace-one for normalized input
    probs = probs / probs.sum()
    coef = (d + 1) * probs - 1.0 / d
    rho = np.einsum("i,iab->ab", coef, povm.projectors)
    return DensityOperator(0.5 * (rho + rho.conj().T))


# -- purity constraints --------------------------------------------------------


def purity_residuals(p, lines: AffineLineSet) -> tuple[float, float]:
    """``(sum p^2 - 1/6, sum p^3 / 3 - sum over lines of p_i p_j p_k)``."""
    probs = p.probs if isinstance(p, OutcomeDistribution) else np.asarray(p, dtype=float)
    if probs.shape != (9,):
        raise ValueError(f"expected 9 probabilities, got {probs.shape}")
    h, _, _ = kernels.purity_terms(probs, lines.as_array())
    return float(h[0]), float(h[1])


def sic_probabilities(povm: SicPovm, states: np.ndarray) -> np.ndarray:
    return np.abs(states @ povm.vectors.conj().T) ** 2 / povm.dim


def derive_affine_lines(povm: SicPovm | None = None, samples: int = 240, seed: int = 20240611) -> AffineLineSet:
    """Identify the line set of the cubic purity identity by brute force.

    Every 3-subset monomial ``p_i p_j p_k`` (84 of them) is evaluated on
    ``samples`` random pure states, and the linear system reproducing
    ``sum p^3 / 3`` is solved.  The monomials are linearly dependent on
    pure states, so all 0/1 solutions in the affine solution space are
    enumerated; exactly one must exist and it must form AG(2,3).  The
    result is then checked on 1000 fresh states.
    """
    povm = qutrit_sic() if povm is None else povm
    if povm.dim != 3:
        raise ValueError("affine lines are defined for the qutrit SIC only")
    triples = list(itertools.combinations(range(9), 3))
    cols = np.array(triples)
    states = np.array([random_pure_state(3, seed + k).amplitudes for k in range(samples)])
    P = sic_probabilities(povm, states)
    A = P[:, cols[:, 0]] * P[:, cols[:, 1]] * P[:, cols[:, 2]]
    b = (P**3).sum(axis=1) / 3.0

    x0, *_ = np.linalg.lstsq(A, b, rcond=None)
    if np.max(np.abs(A @ x0 - b)) > 1e-10:
        raise ValueError("no combination of line monomials reproduces the cubic sum")
    _, sv, vt = np.linalg.svd(A)
    rank = int(np.sum(sv > sv[0] * 1e-10))
    null = vt[rank:].T  # 84 x k
    solutions = _binary_points(x0, null)
    if len(solutions) != 1:
        raise ValueError(
            f"found {len(solutions)} 0/1 solutions; the outcome ordering is not a valid SIC labeling"
        )
    sel = [triples[i] for i in np.flatnonzero(solutions[0])]
    lines = AffineLineSet(tuple(sel))

    check = np.array([random_pure_state(3, seed + 10_000 + k).amplitudes for k in range(1000)])
    res = kernels.purity_residuals_batch(sic_probabilities(povm, check), lines.as_array())
    worst = float(np.max(np.abs(res)))
    if worst > 1e-10:
        raise ValueError(f"derived lines fail validation on fresh states (residual {worst:.3g})")
    return lines


def _binary_points(x0, null, tol=1e-6):
    """All 0/1 vectors of the form ``x0 + null @ y``."""
    k = null.shape[1]
    if k == 0:
        r = np.round(x0)
        ok = np.all(np.abs(x0 - r) < tol) and np.all((r == 0) | (r == 1))
        return [r.astype(int)] if ok else []
    if k > 16:
        raise ValueError(f"null space of dimension {k} is too large to enumerate")
    # pick k coordinates where the null-space rows are independent (greedy pivoting)
    pivots = []
    basis = np.zeros((0, k))
    for i in np.argsort(-np.linalg.norm(null, axis=1)):
        trial = np.vstack([basis, null[i]])
        if np.linalg.matrix_rank(trial, tol=1e-8) > len(pivots):
            pivots.append(int(i))
            basis = trial
            if len(pivots) == k:
                break
    sub = null[pivots]
    found = []
    for bits in itertools.product((0.0, 1.0), repeat=k):
        y = np.linalg.solve(sub, np.array(bits) - x0[pivots])
        x = x0 + null @ y
        r = np.round(x)
        if np.all(np.abs(x - r) < tol) and np.all((r == 0) | (r == 1)):
            if not any(np.array_equal(r, f) for f in found):
                found.append(r)
    return [f.astype(int) for f in found]


@lru_cache(maxsize=1)
def qutrit_lines() -> AffineLineSet:
    return derive_affine_lines()


# -- pure-state projection -------------------------------------------------------


def project_simplex(v) -> np.ndarray:
    """Euclidean projection onto the probability simplex."""
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, v.size + 1)
    r = np.nonzero(u - css / idx > 0)[0][-1]
    return np.maximum(v - css[r] / (r + 1), 0.0)


_PLANE_BASIS = None


def _plane_basis(n=9):
    """Orthonormal basis of the sum-zero hyperplane."""
    global _PLANE_BASIS
    if _PLANE_BASIS is None or _PLANE_BASIS.shape[0] != n:
        q, _ = np.linalg.qr(np.eye(n) - 1.0 / n)
        _PLANE_BASIS = q[:, : n - 1]
    return _PLANE_BASIS


def _augmented_lagrangian(f, lines, tol, max_iter, inner_max=40):
    """Stage one: augmented Lagrangian over the quadratic and cubic constraints.

    Inner loop: damped Newton on the sum-one plane, with eigenvalue-modified
    Hessians and a negative-curvature step when the gradient vanishes at an
    infeasible point.  Each outer iteration ends with a projection onto the
    simplex, a multiplier update and, if feasibility stalled, a tenfold
    penalty increase.
    """
    Z = _plane_basis(f.size)
    p = project_simplex(f)
    lam = np.zeros(2)
    mu = 10.0
    newton_steps = 0
    prev_infeas = np.inf
    h, _, _ = kernels.purity_terms(p, lines)

    def merit(q):
        hq, _, _ = kernels.purity_terms(q, lines)
        r = q - f
        return 0.5 * r @ r + lam @ hq + 0.5 * mu * hq @ hq

    outer = 0
    if np.max(np.abs(h)) < tol:
        return p, h, outer, newton_steps
    for outer in range(1, max_iter + 1):
        for _ in range(inner_max):
            h, J, H2 = kernels.purity_terms(p, lines)
            w = lam + mu * h
            g = (p - f) + J.T @ w
            H = np.eye(p.size) + mu * (J.T @ J) + 2.0 * w[0] * np.eye(p.size) + w[1] * H2
            gr = Z.T @ g
            Hr = Z.T @ H @ Z
            evals, evecs = np.linalg.eigh(Hr)
            gnorm = np.linalg.norm(gr)
            if gnorm < 1e-3 * tol:
                if evals[0] < -1e-8 and np.max(np.abs(h)) > tol:
                    # stationary but infeasible saddle: follow negative curvature
                    step = Z @ evecs[:, 0] * math.sqrt(-evals[0] / max(np.abs(evals).max(), 1.0)) * 0.1
                    slope = 0.0
                else:
                    break
            else:
                mod = np.maximum(np.abs(evals), 1e-8 * max(1.0, np.abs(evals).max()))
                step = Z @ (evecs @ ((evecs.T @ -gr) / mod))
                slope = g @ step
            base = merit(p)
            t = 1.0
            while t > 1e-10:
                q = p + t * step
                if merit(q) <= base + 1e-4 * t * slope:
                    break
                t *= 0.5
            else:
                break
            p = q
            newton_steps += 1
        p = project_simplex(p)
        h, _, _ = kernels.purity_terms(p, lines)
        infeas = float(np.max(np.abs(h)))
        if infeas < tol:
            break
        lam = lam + mu * h
        if infeas > 0.25 * prev_infeas:
            mu = min(mu * 10.0, 1e12)
        prev_infeas = infeas
    return p, h, outer, newton_steps


def _state_probs_and_jac(x, vecs, d):
    """``p(psi)`` for real parameters ``x = (re psi, im psi)`` and its 9 x 2d Jacobian."""
    n3 = vecs.shape[1]
    psi = x[:n3] + 1j * x[n3:]
    nrm = np.vdot(psi, psi).real
    a = vecs.conj() @ psi
    amp2 = np.abs(a) ** 2
    p = amp2 / (d * nrm)
    # d|a_i|^2 / d(re psi_k) = 2 Re(conj(a_i) conj(u_ik)); imaginary part picks up a factor i
    da_re = 2.0 * np.real(a.conj()[:, None] * vecs.conj())
    da_im = 2.0 * np.real(1j * a.conj()[:, None] * vecs.conj())
    dn = 2.0 * x
    damp = np.hstack([da_re, da_im])
    J = (damp * nrm - amp2[:, None] * dn[None, :]) / (d * nrm * nrm)
    return p, J


def _manifold_polish(f, psi0, vecs, d, tol, max_iter=200):
    """Stage two: Levenberg-Marquardt over the state vector.

    Every iterate is exactly a pure-state distribution, so the constraints
    hold to rounding.  Stationarity is measured by the gradient of the
    objective along the manifold.
    """
    x = np.concatenate([psi0.real, psi0.imag])
    p, J = _state_probs_and_jac(x, vecs, d)
    r = p - f
    cost = r @ r
    nu = 1e-6
    it = 0
    for it in range(1, max_iter + 1):
        grad = J.T @ r
        if np.linalg.norm(grad) < tol:
            break
        A = J.T @ J
        improved = False
        while nu < 1e12:
            step = np.linalg.solve(A + nu * np.eye(A.shape[0]), -grad)
            xn = x + step
            xn /= np.linalg.norm(xn)
            pn, Jn = _state_probs_and_jac(xn, vecs, d)
            rn = pn - f
            cn = rn @ rn
            if cn <= cost:
                x, p, J, r = xn, pn, Jn, rn
                small = cost - cn <= 1e-32
                cost = cn
                nu = max(nu * 0.3, 1e-12)
                improved = True
                break
            nu *= 10.0
        if not improved or small:
            break
    grad = J.T @ r
    psi = x[: x.size // 2] + 1j * x[x.size // 2 :]
    return p, psi / np.linalg.norm(psi), float(np.linalg.norm(grad)), it


def project_to_pure_manifold(
    f,
    lines: AffineLineSet | None = None,
    tol: float = 1e-9,
    max_iter: int = 500,
    povm: SicPovm | None = None,
) -> PureStateEstimate:
    """Closest pure-state qutrit SIC distribution to the frequencies ``f``.

    Minimizes ``||p - f||_2`` subject to both purity constraints,
    ``sum p = 1`` and ``p >= 0``.  An augmented-Lagrangian stage gets within
    ``tol`` of the constraint set.  A Levenberg-Marquardt stage over the
    state vector then converges onto the manifold itself.  The two purity
    constraints are tangent at pure states, so the Lagrange conditions
    cannot certify optimality; ``kkt_residual`` is the norm of the
    objective gradient along the manifold instead.  If the iteration budget
    runs out, the estimate is still returned with ``converged=False``;
    ``max_iter`` is shared by both stages.
    """
    f = np.asarray(f.probs if isinstance(f, OutcomeDistribution) else f, dtype=float)
    if f.shape != (9,):
        raise ValueError(f"expected 9 frequencies, got {f.shape}")
    if np.any(f < 0) or abs(f.sum() - 1.0) > 1e-9:
        raise ValueError("frequencies must be non-negative and sum to 1")
    lines = qutrit_lines() if lines is None else lines
    povm = qutrit_sic() if povm is None else povm
    L = lines.as_array()

    p_al, h_al, outer, newton_steps = _augmented_lagrangian(f, L, tol, max_iter)

    rho_al = linear_reconstruct(p_al, povm)
    _, evecs = rho_al.eigh()
    budget = max(max_iter - outer, 0)
    p, psi, stationarity, polish_iter = _manifold_polish(
        f, evecs[:, -1], povm.vectors, povm.dim, tol, budget
    )

    p = np.clip(p, 0.0, None)
    p = p / p.sum()
    rq, rc = purity_residuals(p, lines)
    rho = linear_reconstruct(p, povm)
    evals, evecs = rho.eigh()
    state = PureState.from_amplitudes(evecs[:, -1])
    converged = stationarity < tol and abs(rq) < tol and abs(rc) < tol
    diagnostics = {
        "al_outer_iterations": int(outer),
        "al_newton_steps": int(newton_steps),
        "al_residual": float(np.max(np.abs(h_al))),
        "al_converged": bool(np.max(np.abs(h_al)) < tol),
        "polish_iterations": int(polish_iter),
        "tol": tol,
    }
    return PureStateEstimate(
        p_star=OutcomeDistribution(p),
        rho_star=state.projector(),
        state=state,
        residual_quad=rq,
        residual_cubic=rc,
        distance=float(np.linalg.norm(p - f)),
        iterations=int(outer + polish_iter),
        converged=bool(converged),
        kkt_residual=stationarity,
        eigen_gap=float(evals[-1] - evals[-2]),
        diagnostics=diagnostics,
    )


def pure_estimate_from_linear(p, povm: SicPovm) -> PureState:
    """Dominant eigenvector of the linear reconstruction."""
    _, evecs = linear_reconstruct(p, povm).eigh()
    return PureState.from_amplitudes(evecs[:, -1])


# -- fidelity --------------------------------------------------------------------------


def _psd_sqrt(m):
    evals, evecs = np.linalg.eigh(m)
    # eigenvalues at rounding level would contribute sqrt(1e-16) noise
    floor = 1e-14 * max(evals.max(), 1.0)
    evals = np.where(evals > floor, evals, 0.0)
    return (evecs * np.sqrt(evals)) @ evecs.conj().T


def estimate_fidelity(rho_est: DensityOperator, rho_true: DensityOperator) -> float:
    """Uhlmann fidelity ``(tr sqrt(sqrt(rho) sigma sqrt(rho)))^2``.

    When either input is pure the exact form ``<psi|rho|psi>`` is used.
    Negative eigenvalues (possible for linear-inversion estimates) are
    clipped to zero before taking square roots.
    """
    if rho_est.dim != rho_true.dim:
        raise ValueError(f"dimension mismatch {rho_est.dim} vs {rho_true.dim}")
    for a, b in ((rho_est, rho_true), (rho_true, rho_est)):
        evals, evecs = a.eigh()
        if abs(evals[-1] - 1.0) < 1e-12 and evals[0] > -1e-12:
            psi = evecs[:, -1]
            return float(min(max(np.vdot(psi, b.matrix @ psi).real, 0.0), 1.0))
    s = _psd_sqrt(rho_est.matrix)
    inner = s @ rho_true.matrix @ s
    ev = np.linalg.eigvalsh(0.5 * (inner + inner.conj().T))
    ev = np.where(ev > 1e-14, ev, 0.0)
    return float(min(max(np.sum(np.sqrt(ev)) ** 2, 0.0), 1.0))
