#!/usr/bin/env python3
"""
Singular-vector lab tests: perturbation matrices, sigma decay, the
subspace sweep, per-vector evaluation and the random-volume probe.
"""

import numpy as np
import pytest

from services.attacks.random_perturbations import feature_perturbation, random_waveform_perturbation
from services.core.errors import InvalidConfig
from services.numeric.svd import thin_svd
from services.signal.config import Representation
from services.svdlab.decay import decay_report, lambda_table
from services.svdlab.matrices import (
    RANDOM_L2,
    MatrixKind,
    PerturbationMatrix,
    build_matrix,
    compute_deepfool_perturbations,
)
from services.svdlab.sweep import sample_in_span, subspace_sweep
from services.svdlab.vector_eval import singular_vector_eval, top_two
from services.svdlab.volume_probe import volume_probe


@pytest.fixture(scope="module")
def anchors(desk_test):
    return desk_test.take_per_class(2, seed=0)


@pytest.fixture(scope="module")
def mfcc_basis(anchors, desk_model, desk_pipeline):
    matrix = build_matrix(anchors, desk_model, MatrixKind.RANDOM_R, "MFCC", desk_pipeline, seed=4)
    return thin_svd(matrix.rows).V


# ============================================================================
# MATRICES
# ============================================================================

def test_random_waveform_rows(anchors, desk_pipeline):
    """Test 1: RANDOM_R waveform rows are the seeded noise vectors, normalized"""
    matrix = build_matrix(anchors, None, "random", "WAVEFORM", desk_pipeline, seed=4)
    assert matrix.name == "random_WAVEFORM"
    assert matrix.rows.shape == (len(anchors), desk_pipeline.input_len)
    for i in range(len(anchors)):
        noise = random_waveform_perturbation((4, 1, i), RANDOM_L2, desk_pipeline.input_len).values
        np.testing.assert_allclose(matrix.rows[i], noise / RANDOM_L2, atol=1e-12)


def test_random_feature_rows_depend_on_anchor(anchors, desk_pipeline):
    """Test 2: SPEC rows are g(x_i + r_i) - g(x_i) at their own anchor"""
    matrix = build_matrix(anchors, None, MatrixKind.RANDOM_R, Representation.SPEC, desk_pipeline, seed=4)
    noise = random_waveform_perturbation((4, 1, 0), RANDOM_L2, desk_pipeline.input_len)
    own = feature_perturbation(anchors.waveforms[0], noise, "SPEC", desk_pipeline).values.ravel()
    other = feature_perturbation(anchors.waveforms[-1], noise, "SPEC", desk_pipeline).values.ravel()
    np.testing.assert_allclose(matrix.rows[0], own / np.linalg.norm(own), atol=1e-9)
    assert not np.allclose(matrix.rows[0], other / np.linalg.norm(other), atol=1e-6)
    np.testing.assert_allclose(np.linalg.norm(matrix.rows, axis=1), 1.0)


def test_uniform_matrix(anchors, desk_pipeline):
    """Test 3: uniform feature noise exists only in SPEC and MFCC"""
    matrix = build_matrix(anchors, None, "uniform", "MFCC", desk_pipeline, seed=4)
    assert matrix.rows.shape == (len(anchors), int(np.prod(desk_pipeline.mfcc_shape)))
    assert matrix.anchors == ()
    with pytest.raises(InvalidConfig):
        build_matrix(anchors, None, "uniform", "WAVEFORM", desk_pipeline, seed=4)


def test_deepfool_matrix(anchors, desk_model, desk_pipeline):
    """Test 4: every input is either an anchor row or skipped, in dataset order"""
    batch = compute_deepfool_perturbations(anchors, desk_model, workers=2)
    assert sorted(batch.anchors + batch.skipped) == list(range(len(anchors)))
    assert list(batch.anchors) == sorted(batch.anchors)
    matrix = build_matrix(anchors, desk_model, "deepfool", "WAVEFORM", desk_pipeline, seed=4,
                          deepfool_batch=batch)
    assert matrix.anchors == batch.anchors
    norms = np.linalg.norm(batch.perturbations, axis=1)
    np.testing.assert_allclose(matrix.rows, batch.perturbations / norms[:, None], atol=1e-12)


# ============================================================================
# DECAY
# ============================================================================

def test_decay_of_nearly_rank_one_matrix():
    """Test 5: a matrix of near-copies of one row decays faster than random rows"""
    stream = np.random.default_rng(8)
    base = stream.standard_normal(200)
    near = base + 1e-3 * stream.standard_normal((30, 200))
    spread = stream.standard_normal((30, 200))
    matrices = [
        PerturbationMatrix(near / np.linalg.norm(near, axis=1, keepdims=True), MatrixKind.DEEPFOOL_V,
                           Representation.MFCC, tuple(range(30))),
        PerturbationMatrix(spread / np.linalg.norm(spread, axis=1, keepdims=True), MatrixKind.RANDOM_R,
                           Representation.MFCC, tuple(range(30))),
    ]
    entries = decay_report(matrices)
    lambdas = lambda_table(entries)
    assert lambdas["deepfool_MFCC"] > lambdas["random_MFCC"]
    assert entries[0].sigma[0] == pytest.approx(np.sqrt(30), rel=1e-3)
    x, y = entries[0].scaled_series()
    assert y[0] == 1.0 and y.min() == 0.0
    assert entries[1].to_dict()["rows"] == 30


def test_decay_is_deterministic(anchors, desk_pipeline):
    """Test 6: rebuilding a matrix from the same seed gives the same fit"""
    runs = [
        lambda_table(decay_report([build_matrix(anchors, None, "uniform", "SPEC", desk_pipeline, seed=11)]))
        for _ in range(2)
    ]
    assert runs[0] == runs[1]


# ============================================================================
# SWEEP
# ============================================================================

def test_sample_in_span(mfcc_basis):
    """Test 7: sampled directions are unit vectors inside the span of the first N columns"""
    stream = np.random.default_rng(0)
    for n in (1, 3, 5):
        direction = sample_in_span(mfcc_basis, n, stream)
        V = mfcc_basis[:, :n]
        assert np.linalg.norm(direction) == pytest.approx(1.0)
        assert np.linalg.norm(direction - V @ (V.T @ direction)) <= 1e-9


def test_subspace_sweep(desk_model, desk_test, mfcc_basis):
    """Test 8: zero scale fools nothing; results do not depend on the worker count"""
    kwargs = dict(ns=[1, 4], scales=[0.0, 2.0, 20.0], trials=2, seed=3)
    one = subspace_sweep(desk_model, desk_test, mfcc_basis, workers=1, **kwargs)
    two = subspace_sweep(desk_model, desk_test, mfcc_basis, workers=2, **kwargs)
    assert one.fooling_rates.shape == (2, 3)
    assert np.all(one.fooling_rates[:, 0] == 0.0)
    assert np.all((one.fooling_rates >= 0.0) & (one.fooling_rates <= 1.0))
    np.testing.assert_array_equal(one.fooling_rates, two.fooling_rates)
    assert len(one.rows()) == 6
    with pytest.raises(ValueError):
        subspace_sweep(desk_model, desk_test, mfcc_basis, ns=[mfcc_basis.shape[1] + 1],
                       scales=[1.0], trials=1, seed=0)


# ============================================================================
# VECTOR EVALUATION
# ============================================================================

def test_singular_vector_eval(desk_model, desk_test, mfcc_basis):
    """Test 9: attribution counts reconcile with the per-class counts"""
    result = singular_vector_eval(desk_model, desk_test, mfcc_basis, count=3, scales=[-20.0, 0.0, 20.0])
    assert result.fooling_rates.shape == (3, 3)
    assert np.all(result.fooling_rates[:, 1] == 0.0)
    np.testing.assert_array_equal(result.counts.sum(axis=-1), result.class_counts.sum(axis=-1))
    totals = result.counts.sum(axis=-1)
    sums = result.frequencies.sum(axis=-1)
    np.testing.assert_allclose(sums[totals > 0], 1.0)
    assert np.all(sums[totals == 0] == 0.0)
    assert result.dominant_pair == top_two(result.class_counts)

    fixed = singular_vector_eval(desk_model, desk_test, mfcc_basis, count=3, scales=[20.0],
                                 dominant_pair=(4, 5))
    assert fixed.dominant_pair == (4, 5)
    rows = fixed.rows(desk_test.class_names)
    assert {"freq_left", "freq_right", "freq_others"} <= set(rows[0])


def test_top_two_ties():
    """Test 10: ties go to the lowest class index"""
    assert top_two(np.array([[0, 3, 3, 1]])) == (1, 2)
    assert top_two(np.array([[[5, 0, 0]], [[0, 0, 2]]])) == (0, 2)


# ============================================================================
# VOLUME PROBE
# ============================================================================

def test_volume_probe(desk_model):
    """Test 11: counts sum to n, are seeded and do not depend on the batch size"""
    a = volume_probe(desk_model, 300, seed=5)
    b = volume_probe(desk_model, 300, seed=5, batch_size=64)
    assert a.counts.sum() == 300
    np.testing.assert_array_equal(a.counts, b.counts)
    assert 0.0 < a.modal_share <= 1.0
    names = ("silence", "unknown", "yes", "no", "left", "right")
    assert sum(a.to_dict(names)["counts"].values()) == 300
    with pytest.raises(ValueError):
        volume_probe(desk_model, 0, seed=5)
