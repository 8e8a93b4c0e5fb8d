import itertools

import numpy as np
import pytest

from sicmultiport.optics import detector_distribution, run_sic_experiment, sample_counts
from sicmultiport.qstate import (
    DensityOperator,
    OutcomeDistribution,
    PureState,
    random_density_operator,
    random_pure_state,
)
from sicmultiport.sic import QUTRIT_FIDUCIAL, sic_orbit
from sicmultiport.tomography import (
    AffineLineSet,
    affine_structure_problems,
    derive_affine_lines,
    estimate_fidelity,
    linear_reconstruct,
    project_simplex,
    project_to_pure_manifold,
    pure_estimate_from_linear,
    purity_residuals,
    sic_probabilities,
)


def closest_pure_oracle(f, povm):
    """Independent global optimum of min ||p - f|| over pure-state distributions.

    A SIC is a 2-design, so ||p(rho) - f||^2 = ||rho - rho_f||_HS^2 / (d(d+1))
    with rho_f the linear inversion of f; the closest pure state is the top
    eigenvector of rho_f.
    """
    probs = np.asarray(f) / np.sum(f)
    coef = (povm.dim + 1) * probs - 1 / povm.dim
    rho_f = np.einsum("i,iab->ab", coef, povm.projectors)
    _, v = np.linalg.eigh(rho_f)
    return sic_probabilities(povm, v[:, -1][None])[0]


def ag23_lines():
    """Reference AG(2,3): points (x, y) in GF(3)^2, lines y = mx + c and x = c."""
    pts = [(x, y) for x in range(3) for y in range(3)]
    lines = set()
    for m, c in itertools.product(range(3), repeat=2):
        lines.add(frozenset(pts.index((x, (m * x + c) % 3)) for x in range(3)))
    for c in range(3):
        lines.add(frozenset(pts.index((c, y)) for y in range(3)))
    return [tuple(sorted(t)) for t in lines]


# -- linear inversion ---------------------------------------------------------------


@pytest.mark.parametrize("name", ["qubit_povm", "qutrit_povm"])
def test_uniform_gives_maximally_mixed(name, request):
    povm = request.getfixturevalue(name)
    d = povm.dim
    rho = linear_reconstruct(np.full(d * d, 1 / d**2), povm)
    assert np.allclose(rho.matrix, np.eye(d) / d, atol=1e-12)


@pytest.mark.parametrize("name", ["qubit_povm", "qutrit_povm"])
def test_round_trip(name, request):
    povm = request.getfixturevalue(name)
    for seed in range(100):
        rho0 = random_density_operator(povm.dim, seed)
        p = detector_distribution(rho0, povm)
        rho = linear_reconstruct(p, povm)
        assert np.max(np.abs(rho.matrix - rho0.matrix)) < 1e-10


def test_impossible_distribution_is_not_psd(qutrit_povm):
    rho = linear_reconstruct(np.eye(9)[0], qutrit_povm)
    assert not rho.psd
    assert np.linalg.eigvalsh(rho.matrix).min() < 0
    assert abs(np.trace(rho.matrix) - 1) < 1e-12
    assert np.max(np.abs(rho.matrix - rho.matrix.conj().T)) < 1e-12


def test_output_always_hermitian_unit_trace(qutrit_povm):
    rng = np.random.default_rng(5)
    for _ in range(50):
        rho = linear_reconstruct(rng.dirichlet(np.full(9, 0.3)), qutrit_povm)
        assert abs(np.trace(rho.matrix) - 1) < 1e-12


def test_linear_length_mismatch(qubit_povm):
    with pytest.raises(ValueError):
        linear_reconstruct(np.full(9, 1 / 9), qubit_povm)


# -- purity constraints ---------------------------------------------------------------


def test_residuals_on_random_pure_states(qutrit_povm, lines):
    for seed in range(200):
        p = sic_probabilities(qutrit_povm, random_pure_state(3, seed).amplitudes[None])[0]
        rq, rc = purity_residuals(p, lines)
        assert abs(rq) < 1e-12 and abs(rc) < 1e-12


def test_residuals_examples(lines):
    fid = np.array([1 / 3] + [1 / 12] * 8)
    assert abs(purity_residuals(fid, lines)[0]) < 1e-15
    rq, _ = purity_residuals(np.full(9, 1 / 9), lines)
    assert rq == pytest.approx(-1 / 18)
    with pytest.raises(ValueError):
        purity_residuals(np.full(4, 0.25), lines)


def test_residuals_vanish_only_for_pure(qutrit_povm, lines):
    # mixed states violate at least one of the two identities
    for seed in range(50):
        p = detector_distribution(random_density_operator(3, seed), qutrit_povm).probs
        assert max(abs(x) for x in purity_residuals(p, lines)) > 1e-6


# -- affine lines -------------------------------------------------------------------


def test_derived_lines_structure(lines):
    assert len(lines.triples) == 12
    counts = np.bincount(np.ravel(lines.triples), minlength=9)
    assert np.all(counts == 4)
    classes = lines.parallel_classes()
    assert len(classes) == 4 and all(len(c) == 3 for c in classes)
    assert not affine_structure_problems(lines.triples)


def test_derived_lines_isomorphic_to_reference(lines):
    # some relabeling of the points maps the derived set onto GF(3)^2 lines
    ref = {frozenset(t) for t in ag23_lines()}
    derived = [frozenset(t) for t in lines.triples]
    found = any(
        {frozenset(perm[i] for i in t) for t in derived} == ref
        for perm in itertools.permutations(range(9))
        if perm[0] == 0 and perm[1] == 1  # AG(2,3) is 2-transitive
    )
    assert found


def test_derived_lines_validate_on_fresh_states(qutrit_povm, lines):
    states = np.array([random_pure_state(3, 10**6 + k).amplitudes for k in range(1000)])
    P = sic_probabilities(qutrit_povm, states)
    for p in P[:: 50]:
        assert max(map(abs, purity_residuals(p, lines))) < 1e-10


def test_derivation_is_seed_independent(lines):
    assert derive_affine_lines(seed=12345).triples == lines.triples


def test_derivation_fails_for_non_sic():
    with pytest.raises(ValueError):
        derive_affine_lines(sic_orbit(np.array([1.0, 0.5, 0.0])))


def test_line_set_validation():
    good = ag23_lines()
    AffineLineSet(tuple(good))
    assert affine_structure_problems(good[:11])
    bad = list(good)
    bad[0] = (0, 1, 2) if bad[0] != (0, 1, 2) else (0, 1, 3)
    with pytest.raises(ValueError):
        AffineLineSet(tuple(bad))


def test_line_json_is_one_based(lines):
    obj = lines.to_json()
    assert min(min(t) for t in obj) == 1 and max(max(t) for t in obj) == 9


# -- pure-state projection ---------------------------------------------------------------


def test_simplex_projection():
    assert np.allclose(project_simplex([0.2, 0.8]), [0.2, 0.8])
    assert np.allclose(project_simplex([2.0, 0.0]), [1.0, 0.0])
    out = project_simplex([-1.0, 0.5, 0.9])
    assert np.isclose(out.sum(), 1) and out.min() >= 0


def test_fixed_point_on_manifold(qutrit_povm, lines):
    for seed in range(5):
        p = sic_probabilities(qutrit_povm, random_pure_state(3, seed).amplitudes[None])[0]
        est = project_to_pure_manifold(p / p.sum(), lines)
        assert est.converged
        assert est.distance < 1e-9
        assert np.allclose(est.p_star.probs, p, atol=1e-9)


def test_matches_closed_form_optimum(qutrit_povm, lines):
    rng = np.random.default_rng(11)
    for _ in range(40):
        f = rng.dirichlet(np.full(9, rng.uniform(0.3, 3)))
        est = project_to_pure_manifold(f, lines)
        assert est.converged
        assert np.max(np.abs(est.p_star.probs - closest_pure_oracle(f, qutrit_povm))) < 1e-8
        assert abs(est.residual_quad) < 1e-9 and abs(est.residual_cubic) < 1e-9
        assert est.p_star.probs.min() >= 0 and abs(est.p_star.probs.sum() - 1) < 1e-12


def test_no_pure_state_is_closer(qutrit_povm, lines):
    f = np.random.default_rng(2).dirichlet(np.ones(9))
    est = project_to_pure_manifold(f, lines)
    states = np.array([random_pure_state(3, k).amplitudes for k in range(2000)])
    dists = np.linalg.norm(sic_probabilities(qutrit_povm, states) - f, axis=1)
    assert dists.min() >= est.distance - 1e-12


def test_uniform_frequencies(lines):
    est = project_to_pure_manifold(np.full(9, 1 / 9), lines)
    assert est.converged and abs(est.residual_quad) < 1e-9
    # every pure state is equidistant from the uniform vector: sqrt(1/6 - 1/9)
    assert est.distance == pytest.approx(np.sqrt(1 / 18), abs=1e-12)


def test_estimate_improves_on_frequencies(qutrit_povm, lines):
    better = 0
    for seed in range(100):
        phi = random_pure_state(3, 777)
        record, ideal = run_sic_experiment(phi, "qutrit", 10**4, seed)
        est = project_to_pure_manifold(record.frequencies, lines)
        better += np.linalg.norm(est.p_star.probs - ideal.probs) < np.linalg.norm(
            record.frequencies - ideal.probs
        )
    assert better >= 90


def test_zero_counts_accepted(lines):
    f = np.array([0.5, 0.5, 0, 0, 0, 0, 0, 0, 0])
    est = project_to_pure_manifold(f, lines)
    assert est.converged


def test_invalid_frequencies(lines):
    with pytest.raises(ValueError):
        project_to_pure_manifold(np.full(4, 0.25), lines)
    with pytest.raises(ValueError):
        project_to_pure_manifold(np.full(9, 0.2), lines)
    with pytest.raises(ValueError):
        project_to_pure_manifold(np.array([1.1, -0.1] + [0] * 7), lines)


def test_unreachable_tolerance_reports_not_converged(lines):
    f = np.random.default_rng(4).dirichlet(np.ones(9))
    est = project_to_pure_manifold(f, lines, tol=1e-30, max_iter=20)
    assert not est.converged
    assert est.iterations <= 20


def test_estimate_fields(lines):
    f = np.random.default_rng(8).dirichlet(np.ones(9))
    est = project_to_pure_manifold(f, lines)
    assert est.rho_star.psd and np.isclose(np.trace(est.rho_star.matrix @ est.rho_star.matrix), 1)
    assert est.eigen_gap > 0
    obj = est.to_json()
    assert obj["simplex_constraints"] is True
    assert set(obj["diagnostics"]) >= {"al_outer_iterations", "al_residual", "polish_iterations"}


def test_consistency_in_shots(lines):
    phi = random_pure_state(3, 31)
    medians = []
    for shots in (10**3, 10**4, 10**5, 10**6):
        fids = []
        for seed in range(15):
            rec, _ = run_sic_experiment(phi, "qutrit", shots, seed)
            est = project_to_pure_manifold(rec.frequencies, lines)
            fids.append(estimate_fidelity(est.rho_star, phi.projector()))
        medians.append(np.median(fids))
    assert all(b >= a for a, b in zip(medians, medians[1:]))
    assert medians[-1] > 0.999


def test_qubit_pure_estimate(qubit_povm):
    phi = random_pure_state(2, 3)
    rec, _ = run_sic_experiment(phi, "qubit", 10**5, 1)
    est = pure_estimate_from_linear(rec.frequencies, qubit_povm)
    assert estimate_fidelity(est.projector(), phi.projector()) > 0.99


# -- fidelity ------------------------------------------------------------------------------


def test_fidelity_examples(qutrit_povm):
    rho = random_density_operator(3, 1)
    assert estimate_fidelity(rho, rho) == pytest.approx(1.0, abs=1e-10)
    a = PureState(np.array([1.0, 0, 0])).projector()
    b = PureState(np.array([0, 1.0, 0])).projector()
    assert estimate_fidelity(a, b) == pytest.approx(0.0, abs=1e-12)
    u0, u1 = (PureState(v).projector() for v in qutrit_povm.vectors[:2])
    assert estimate_fidelity(u0, u1) == pytest.approx(1 / 4, abs=1e-12)
    with pytest.raises(ValueError):
        estimate_fidelity(a, DensityOperator.maximally_mixed(2))


def test_fidelity_pure_formula_and_range():
    for seed in range(20):
        x, y = random_pure_state(3, seed), random_pure_state(3, seed + 100)
        f = estimate_fidelity(x.projector(), y.projector())
        assert f == pytest.approx(abs(np.vdot(x.amplitudes, y.amplitudes)) ** 2, abs=1e-10)
        g = estimate_fidelity(random_density_operator(3, seed), random_density_operator(3, seed + 1))
        assert -1e-10 <= g <= 1 + 1e-10


def test_fidelity_of_non_psd_estimate(qutrit_povm):
    rho = linear_reconstruct(np.eye(9)[0], qutrit_povm)
    f = estimate_fidelity(rho, PureState(QUTRIT_FIDUCIAL).projector())
    assert 0 <= f <= 1
