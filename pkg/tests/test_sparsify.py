"""Mask selection, efficiency scores and energy accounting."""

import itertools

import numpy as np
import pytest

from fedsparse.errors import ConfigurationError
from fedsparse.model import LayerSpec, ModelParams, init_params, mlp_layers
from fedsparse.sparsify import (
    PruningMask,
    apply_mask,
    build_cost_vector,
    cwmp_mask,
    efficiency_scores,
    energy_of,
    k_from_fraction,
    random_k_mask,
    top_k_mask,
)


def sort_oracle(keys, k):
    """Reference selection: full stable sort on (-key, index)."""
    order = sorted(range(len(keys)), key=lambda j: (-keys[j], j))
    return sorted(order[:k])


# ---- build_cost_vector ----

def test_cost_vector_two_tier():
    params = init_params(mlp_layers(3, [4], 2), 0)
    costs = build_cost_vector(params, 5.0, 1.0)
    classifier = params.layer_slices()[-1]
    assert np.all(costs[classifier] == 5.0)
    feature = np.ones(params.d, dtype=bool)
    feature[classifier] = False
    assert np.all(costs[feature] == 1.0)
    assert set(np.unique(costs)) == {1.0, 5.0}


def test_cost_vector_uniform():
    params = init_params(mlp_layers(3, [4], 2), 0)
    assert np.all(build_cost_vector(params, 1.0, 1.0) == 1.0)


def test_cost_vector_by_hand_layer_map():
    # 1->1 hidden layer contributes flat indices 0..1, 1->2 output layer 2..5;
    # hand enumeration of the layer map gives [1, 1, 5, 5, 5, 5]
    layers = (LayerSpec(1, 1, "relu"), LayerSpec(1, 2, "linear"))
    params = ModelParams(layers, np.zeros(6))
    np.testing.assert_array_equal(
        build_cost_vector(params, 5.0, 1.0), [1.0, 1.0, 5.0, 5.0, 5.0, 5.0]
    )


def test_cost_vector_rejects_non_positive():
    params = init_params(mlp_layers(2, [2], 2), 0)
    with pytest.raises(ConfigurationError):
        build_cost_vector(params, 0.0, 1.0)
    with pytest.raises(ConfigurationError):
        build_cost_vector(params, 1.0, -2.0)


# ---- top_k_mask ----

def test_top_k_hand_case():
    mask = top_k_mask(np.array([0.5, -2.0, 1.0]), 2)
    np.testing.assert_array_equal(mask.indices, [1, 2])


def test_top_k_full_selection():
    g = np.array([0.1, -0.2, 0.0, 3.0])
    np.testing.assert_array_equal(top_k_mask(g, 4).indices, np.arange(4))


def test_top_k_ties_break_by_ascending_index():
    g = np.array([2.0, -2.0, 2.0, -2.0])
    np.testing.assert_array_equal(top_k_mask(g, 2).indices, [0, 1])


def test_top_k_matches_full_sort_oracle():
    rng = np.random.default_rng(0)
    for _ in range(200):
        d = int(rng.integers(1, 30))
        # quantized values force frequent ties
        g = rng.integers(-3, 4, d) / 2.0
        k = int(rng.integers(1, d + 1))
        np.testing.assert_array_equal(
            top_k_mask(g, k).indices, sort_oracle(np.abs(g), k)
        )


def test_top_k_rejects_bad_k():
    with pytest.raises(ConfigurationError):
        top_k_mask(np.ones(3), 0)
    with pytest.raises(ConfigurationError):
        top_k_mask(np.ones(3), 4)


# ---- efficiency_scores ----

def test_scores_hand_case():
    s = efficiency_scores(np.array([0.5, -2.0, 1.0]), np.array([1.0, 5.0, 1.0]))
    np.testing.assert_allclose(s, [0.5, 0.4, 1.0], atol=0)


def test_scores_uniform_cost_preserves_order():
    rng = np.random.default_rng(1)
    g = rng.normal(size=40)
    s = efficiency_scores(g, np.full(40, 3.0))
    np.testing.assert_array_equal(np.argsort(s), np.argsort(np.abs(g)))


def test_scores_zero_gradient():
    np.testing.assert_array_equal(efficiency_scores(np.zeros(5), np.ones(5)), np.zeros(5))


def test_scores_length_mismatch():
    with pytest.raises(ConfigurationError):
        efficiency_scores(np.ones(3), np.ones(4))


# ---- cwmp_mask ----

def test_cwmp_hand_case_matches_subset_brute_force():
    g = np.array([0.5, -2.0, 1.0])
    c = np.array([1.0, 5.0, 1.0])
    s = np.abs(g) / c
    best = max(itertools.combinations(range(3), 2), key=lambda sub: sum(s[j] for j in sub))
    assert sorted(best) == [0, 2]
    np.testing.assert_array_equal(cwmp_mask(g, c, 2).indices, [0, 2])


def test_cwmp_uniform_cost_degenerates_to_top_k():
    rng = np.random.default_rng(2)
    for _ in range(300):
        d = int(rng.integers(2, 50))
        g = rng.normal(size=d)
        k = int(rng.integers(1, d + 1))
        alpha = float(rng.uniform(0.1, 10.0))
        np.testing.assert_array_equal(
            cwmp_mask(g, np.full(d, alpha), k).indices, top_k_mask(g, k).indices
        )


def test_cwmp_never_selects_prohibitive_cost():
    rng = np.random.default_rng(3)
    for _ in range(50):
        d = 20
        g = rng.normal(size=d) + 0.1
        c = np.ones(d)
        blocked = int(rng.integers(0, d))
        c[blocked] = 1e9
        for k in (1, 5, d - 1):
            assert blocked not in cwmp_mask(g, c, k).indices


# ---- apply_mask / energy_of ----

def test_apply_mask_identity_and_empty():
    g = np.array([3.0, -1.0, 2.0])
    full = apply_mask(g, PruningMask(np.arange(3), 3))
    np.testing.assert_array_equal(full.densify(), g)
    empty = apply_mask(g, PruningMask(np.array([], dtype=np.int64), 3))
    np.testing.assert_array_equal(empty.densify(), np.zeros(3))
    assert empty.payload == 0


def test_apply_mask_hand_case():
    sparse = apply_mask(np.array([3.0, -1.0, 2.0]), PruningMask(np.array([0, 2]), 3))
    np.testing.assert_array_equal(sparse.densify(), [3.0, 0.0, 2.0])
    assert sparse.payload == 2


def test_apply_mask_dimension_mismatch():
    with pytest.raises(ConfigurationError):
        apply_mask(np.ones(4), PruningMask(np.array([0]), 3))


def test_energy_of_hand_cases():
    c = np.array([1.0, 5.0, 2.0])
    assert energy_of(PruningMask(np.array([0, 2]), 3), c).energy == 3.0
    assert energy_of(PruningMask(np.array([], dtype=np.int64), 3), c).energy == 0.0
    uniform = np.full(7, 5.0)
    report = energy_of(PruningMask(np.arange(7), 7), uniform)
    assert report.energy == 35.0
    assert report.payload_indices == 7


def test_energy_matches_dense_dot_product():
    rng = np.random.default_rng(4)
    for _ in range(100):
        d = int(rng.integers(1, 40))
        c = rng.uniform(0.1, 5.0, d)
        k = int(rng.integers(1, d + 1))
        mask = random_k_mask(d, k, rng)
        assert energy_of(mask, c).energy == pytest.approx(float(mask.to_dense() @ c), rel=1e-15)


# ---- invariants ----

def test_cardinality_invariant():
    rng = np.random.default_rng(5)
    for _ in range(100):
        d = int(rng.integers(1, 60))
        g = rng.normal(size=d)
        c = rng.uniform(0.5, 2.0, d)
        k = int(rng.integers(1, d + 1))
        assert top_k_mask(g, k).k == k
        assert cwmp_mask(g, c, k).k == k


def test_exchange_optimality():
    # no swap of a selected for an unselected index may improve the criterion
    rng = np.random.default_rng(6)
    for _ in range(100):
        d = int(rng.integers(2, 40))
        g = rng.normal(size=d)
        c = rng.uniform(0.5, 2.0, d)
        k = int(rng.integers(1, d))
        for keys, mask in (
            (np.abs(g), top_k_mask(g, k)),
            (np.abs(g) / c, cwmp_mask(g, c, k)),
        ):
            out = np.setdiff1d(np.arange(d), mask.indices)
            assert keys[mask.indices].min() >= keys[out].max() - 1e-15


def test_scale_covariance():
    rng = np.random.default_rng(7)
    g = rng.normal(size=30)
    c = rng.uniform(0.5, 2.0, 30)
    for lam in (0.5, 3.0, 1e6):
        np.testing.assert_array_equal(top_k_mask(g, 7).indices, top_k_mask(lam * g, 7).indices)
        np.testing.assert_array_equal(
            cwmp_mask(g, c, 7).indices, cwmp_mask(lam * g, c, 7).indices
        )
        np.testing.assert_array_equal(
            cwmp_mask(g, c, 7).indices, cwmp_mask(g, lam * c, 7).indices
        )


def test_energy_monotone_in_support():
    rng = np.random.default_rng(8)
    for _ in range(50):
        d = 25
        c = rng.uniform(0.1, 4.0, d)
        small = random_k_mask(d, int(rng.integers(1, 20)), rng)
        extra = np.setdiff1d(np.arange(d), small.indices)
        grown = PruningMask(np.sort(np.concatenate([small.indices, extra[:2]])), d)
        assert energy_of(small, c).energy <= energy_of(grown, c).energy


def test_zero_gradient_selects_lowest_indices():
    mask = cwmp_mask(np.zeros(6), np.ones(6), 3)
    np.testing.assert_array_equal(mask.indices, [0, 1, 2])
    update = apply_mask(np.zeros(6), mask)
    np.testing.assert_array_equal(update.values, np.zeros(3))


def test_k_from_fraction():
    assert k_from_fraction(0.01, 2632) == 26
    assert k_from_fraction(1.0, 10) == 10
    assert k_from_fraction(1e-9, 10) == 1
    with pytest.raises(ConfigurationError):
        k_from_fraction(0.0, 10)
    with pytest.raises(ConfigurationError):
        k_from_fraction(1.5, 10)


def test_mask_validation():
    with pytest.raises(ConfigurationError):
        PruningMask(np.array([0, 0]), 3)
    with pytest.raises(ConfigurationError):
        PruningMask(np.array([2, 1]), 3)
    with pytest.raises(ConfigurationError):
        PruningMask(np.array([3]), 3)
