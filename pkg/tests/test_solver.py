import numpy as np
import pytest

from fixmk import (
    AffineMap,
    EmptyFixedSetError,
    Leaf,
    NormKind,
    NormSpec,
    NotConvergedError,
    Polytope,
    averaging_operator,
    affine_compose,
    common_fixed_subspace,
    contains,
    convex_combination,
    diameter,
    enumerate_elements,
    feasible_point,
    fip_check,
    fixed_subspace,
    map_deviation,
    polytope_image,
    residual,
    solve_cesaro,
    solve_exact,
    validate_structure,
)
from helpers import dihedral_node, markov_node, reflect_x, rot90, square
from oracles import stationary_distribution


# --- averaging_operator ----------------------------------------------------

def test_averaging_identity_leaf():
    node = Leaf((AffineMap.identity(2),))
    for n in (1, 4, 1024):
        assert map_deviation(averaging_operator(node, n), AffineMap.identity(2)) == 0.0


def test_averaging_rotation_collapses_at_four():
    op = averaging_operator(Leaf((rot90(),)), 4)
    assert np.abs(op.matrix).max() <= 1e-15 and np.abs(op.offset).max() <= 1e-15


def test_averaging_product_matches_hand_expansion():
    op = averaging_operator(dihedral_node(), 2)
    R, S, I = rot90().matrix, reflect_x().matrix, np.eye(2)
    expected = ((I + R) / 2) @ ((I + S) / 2)
    np.testing.assert_allclose(op.matrix, expected, atol=1e-15)
    np.testing.assert_allclose(op.offset, np.zeros(2), atol=1e-15)


# --- solve_cesaro ----------------------------------------------------------

def test_cesaro_identity_returns_start():
    node = Leaf((AffineMap.identity(2),))
    result = solve_cesaro(node, square(), [0.25, -0.5])
    np.testing.assert_allclose(result.point, [0.25, -0.5])
    assert result.max_residual == 0.0
    assert result.certificate.n_final == 1


def test_cesaro_rotation_to_origin():
    result = solve_cesaro(Leaf((rot90(),)), square(), [1.0, 1.0])
    np.testing.assert_allclose(result.point, [0.0, 0.0], atol=1e-12)
    assert result.method == "cesaro"


def test_cesaro_requires_start_inside():
    with pytest.raises(ValueError):
        solve_cesaro(Leaf((rot90(),)), square(), [3.0, 0.0])


def test_cesaro_residual_bound_history():
    node = markov_node()
    K = Polytope(np.eye(2))
    result = solve_cesaro(node, K, [1.0, 0.0], 1e-8, 2**40)
    diam = diameter(K, NormSpec(NormKind.MAX_ABS, 2))
    for (n, res), (n2, bound) in zip(
        result.certificate.residual_history, result.certificate.bound_history
    ):
        assert n == n2 and bound == diam / n
        assert res <= bound + 1e-9  # single-map stage obeys the 1/n law


def test_cesaro_not_converged_carries_best():
    with pytest.raises(NotConvergedError) as err:
        solve_cesaro(markov_node(), Polytope(np.eye(2)), [1.0, 0.0], 1e-10, 16)
    assert err.value.certificate.n_final == 16
    assert max(err.value.residuals.values()) < 0.1


# --- fixed_subspace / solve_exact ------------------------------------------

def test_fixed_subspace_identity_is_everything():
    sub = fixed_subspace(AffineMap.identity(2))
    assert sub.dimension == 2
    np.testing.assert_allclose(sub.point, [0.0, 0.0], atol=1e-12)


def test_fixed_subspace_contraction_is_origin():
    sub = fixed_subspace(AffineMap.linear(0.5 * np.eye(2)))
    assert sub.dimension == 0
    np.testing.assert_allclose(sub.point, [0.0, 0.0], atol=1e-12)


def test_fixed_subspace_translation_is_empty():
    assert fixed_subspace(AffineMap.translation([1.0, 0.0])) is None


def test_exact_identity_leaf_gives_centroid():
    result = solve_exact(Leaf((AffineMap.identity(2),)), square())
    np.testing.assert_allclose(result.point, [0.0, 0.0], atol=1e-9)
    assert result.max_residual == 0.0
    assert result.certificate is None


def test_exact_markov_matches_eigen_oracle():
    P = np.array([[0.9, 0.1], [0.2, 0.8]])
    result = solve_exact(markov_node(), Polytope(np.eye(2)))
    np.testing.assert_allclose(result.point, [2.0 / 3.0, 1.0 / 3.0], atol=1e-9)
    np.testing.assert_allclose(result.point, stationary_distribution(P), atol=1e-9)


def test_exact_dihedral_origin():
    result = solve_exact(dihedral_node(), square())
    np.testing.assert_allclose(result.point, [0.0, 0.0], atol=1e-12)


def test_exact_translation_raises_empty():
    node = Leaf((AffineMap.translation([2.0, 0.0]),))
    with pytest.raises(EmptyFixedSetError) as err:
        solve_exact(node, Polytope.box([0.0, 0.0], [1.0, 1.0]))
    assert err.value.reason == "empty-fixed-subspace"


def test_exact_fixed_point_outside_polytope():
    # contraction toward (5, 5): unique fixed point far from the square
    node = Leaf((AffineMap(0.5 * np.eye(2), np.array([2.5, 2.5])),))
    with pytest.raises(EmptyFixedSetError) as err:
        solve_exact(node, square())
    assert err.value.reason == "fixed-set-outside-polytope"


def test_exact_and_cesaro_agree():
    for node, K, x0 in [
        (dihedral_node(), square(), [1.0, 1.0]),
        (markov_node(), Polytope(np.eye(2)), [1.0, 0.0]),
    ]:
        exact = solve_exact(node, K, 1e-8)
        cesaro = solve_cesaro(node, K, x0, 1e-8, 2**40)
        assert exact.max_residual <= 1e-8
        assert cesaro.max_residual <= 1e-8
        np.testing.assert_allclose(exact.point, cesaro.point, atol=1e-6)


# --- residual ---------------------------------------------------------------

def test_residual_values():
    node = Leaf((AffineMap.translation([1.0, 0.0]),))
    assert residual([0.0, 0.0], node) == {"g0": 1.0}
    exact = solve_exact(dihedral_node(), square())
    assert all(v == 0.0 for v in exact.residuals.values())


def test_fixed_point_is_fixed_by_all_words():
    for node, K in [(dihedral_node(), square()), (markov_node(), Polytope(np.eye(2)))]:
        p = solve_exact(node, K).point
        assert max(residual(p, node).values()) <= 1e-10
        for w in enumerate_elements(node, 6):
            assert np.max(np.abs(w(p) - p)) <= 1e-8


# --- fip_check ---------------------------------------------------------------

def test_fip_identity_leaf():
    report = fip_check(Leaf((AffineMap.identity(2),)), square(), 2, "cof", seed=0)
    assert report.feasible
    assert contains(square(), report.witness, 1e-7)


def test_fip_rotation_cof():
    report = fip_check(Leaf((rot90(),)), square(), 3, "cof", seed=1)
    assert report.feasible
    # every sampled image contains the rotation-invariant origin
    assert contains(square(), report.witness, 1e-7)


def test_fip_product_families():
    node = dihedral_node()
    assert fip_check(node, square(), 5, "cof", seed=2).feasible
    assert fip_check(node, square(), 5, "coh-coq", seed=2).feasible


def test_fip_coh_coq_needs_product():
    with pytest.raises(ValueError):
        fip_check(Leaf((rot90(),)), square(), 3, "coh-coq", seed=0)


def test_fip_rejects_tiny_sample():
    with pytest.raises(ValueError):
        fip_check(Leaf((rot90(),)), square(), 1, "cof", seed=0)


def test_fip_adversarial_non_semigroup_is_infeasible():
    # two constant maps into far-apart points; invariance deliberately bypassed
    pull_a = AffineMap(np.zeros((2, 2)), np.array([-10.0, -10.0]))
    pull_b = AffineMap(np.zeros((2, 2)), np.array([10.0, 10.0]))
    report = fip_check(Leaf((pull_a, pull_b)), square(), 4, "cof", seed=0, word_budget=2)
    assert not report.feasible and report.witness is None


def test_fip_deterministic_per_seed():
    a = fip_check(dihedral_node(), square(), 5, "cof", seed=7)
    b = fip_check(dihedral_node(), square(), 5, "cof", seed=7)
    np.testing.assert_array_equal(a.witness, b.witness)


# --- image-intersection witnesses (abelian hulls) ---------------------------

@pytest.mark.parametrize("seed", range(20))
def test_feasible_witness_lies_in_composed_image(seed):
    # the canonical witness of f(K) ∩ g(K) also sits inside (f.g)(K)
    cases = [
        (Leaf((AffineMap(np.array([[0.5]]), np.array([0.25])),)),
         Polytope(np.array([[0.0], [1.0]]))),
        (Leaf((rot90(),)), square()),
    ]
    for node, K in cases:
        words = enumerate_elements(node, 6)
        rng = np.random.default_rng(seed)
        f = convex_combination(words, rng.dirichlet(np.ones(len(words))))
        g = convex_combination(words, rng.dirichlet(np.ones(len(words))))
        w = feasible_point([polytope_image(f, K), polytope_image(g, K)], 1e-9)
        assert w is not None
        assert contains(polytope_image(affine_compose(f, g), K), w, 1e-6)


# --- validation is honored ----------------------------------------------------

def test_validated_structures_have_fixed_points(solve_fixtures):
    for name, pf in solve_fixtures:
        payload = pf.payload
        report = validate_structure(payload.node, payload.polytope,
                                    pf.options.word_budget, pf.options.tol)
        assert report.ok, f"{name} failed validation: {report.failures}"
        assert 1 <= report.depth <= 3
