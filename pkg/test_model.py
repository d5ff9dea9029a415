#!/usr/bin/env python3
"""
Classifier tests: architecture shapes, initialization, softmax outputs,
input gradients, SGD training, accuracy tables and checkpoints.
"""

import numpy as np
import pytest
import torch

from services.core.errors import CheckpointFormatError, EmptyEvaluationSet, InvalidArch, ShapeMismatch
from services.model.accuracy import accuracy, accuracy_from_predictions
from services.model.architecture import ArchConfig
from services.model.checkpoint import load_checkpoint, save_checkpoint
from services.model.classifier import LinearClassifier, init_classifier
from services.model.gradients import class_gradients, input_gradient
from services.model.training import TrainConfig, train
from services.signal.config import PRESETS


def _params(model):
    return [p.detach().numpy().copy() for p in model.parameters()]


def _logits_and_relu_mask(model, w):
    """Logits of one waveform and the on/off pattern of both ReLU layers."""
    with torch.no_grad():
        feats = model.features(torch.from_numpy(w)[None])
        z = ((feats - model.feature_mean) / model.feature_std).reshape(-1, 1, *model.feature_shape)
        first = model.conv1(z)
        second = model.conv2(torch.relu(first))
        logits = model.logits_from_features(feats)[0].numpy()
    mask = np.concatenate([(first > 0).numpy().ravel(), (second > 0).numpy().ravel()])
    return logits, mask


# ============================================================================
# ARCHITECTURE / INIT
# ============================================================================

def test_output_shapes(desk_pipeline):
    """Test 1: desk MFCC input 61 x 13 flows through both convolutions"""
    shapes = ArchConfig().output_shapes(desk_pipeline)
    assert shapes["input"] == (61, 13)
    assert shapes["conv1"] == (8, 27, 5)
    assert shapes["conv2"] == (16, 12, 2)
    assert shapes["dense_in"] == (384,)


def test_kernel_too_large(desk_pipeline):
    """Test 2: a kernel wider than the MFCC input raises InvalidArch"""
    with pytest.raises(InvalidArch):
        init_classifier(ArchConfig(conv1_kernel=(8, 20)), desk_pipeline, 6, seed=0)
    with pytest.raises(InvalidArch):
        init_classifier(ArchConfig(), desk_pipeline, 1, seed=0)


def test_init_is_seeded(desk_pipeline):
    """Test 3: same seed gives identical parameters, another seed differs"""
    a = init_classifier(ArchConfig(), desk_pipeline, 6, seed=0)
    b = init_classifier(ArchConfig(), desk_pipeline, 6, seed=0)
    c = init_classifier(ArchConfig(), desk_pipeline, 6, seed=1)
    assert all(np.array_equal(x, y) for x, y in zip(_params(a), _params(b)))
    assert not all(np.array_equal(x, y) for x, y in zip(_params(a), _params(c)))
    assert all(np.array_equal(p, p.astype(np.float32)) for p in _params(a))


def test_fresh_forward_is_a_distribution(desk_pipeline, desk_test):
    """Test 4: forward of a fresh classifier is a probability vector"""
    model = init_classifier(ArchConfig(), desk_pipeline, 6, seed=3)
    probs = model.confidences_batch(desk_test.waveforms[:20])
    assert probs.shape == (20, 6)
    assert np.all(probs >= 0)
    np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-6)


def test_forward_features_shape_mismatch(desk_model):
    """Test 5: features of the wrong shape raise ShapeMismatch"""
    with pytest.raises(ShapeMismatch):
        desk_model.forward_features(np.zeros((60, 13)))


# ============================================================================
# SOFTMAX PROPERTIES
# ============================================================================

def test_logit_shift_invariance(linear_factory):
    """Test 6: adding a constant to every logit leaves the confidences unchanged"""
    model = linear_factory(0)
    shifted = LinearClassifier(model.weight.detach().numpy(), model.bias.detach().numpy() + 7.5)
    x = np.random.default_rng(1).standard_normal(50)
    np.testing.assert_allclose(model.confidences(x), shifted.confidences(x), atol=1e-6)


def test_doubling_sharpens_without_flipping():
    """Test 7: doubling a 2-class toy keeps the argmax and raises the top confidence"""
    weight, bias = np.array([[1.0, 0.5], [-0.5, 0.25]]), np.array([0.1, -0.2])
    single = LinearClassifier(weight, bias)
    double = LinearClassifier(2 * weight, 2 * bias)
    for x in np.random.default_rng(2).standard_normal((20, 2)):
        p, q = single.confidences(x), double.confidences(x)
        assert np.argmax(p) == np.argmax(q)
        if abs(p[0] - p[1]) > 0:
            assert q.max() > p.max()


def test_argmax_logits_equals_argmax_probs(desk_model, desk_test):
    """Test 8: predict agrees with the argmax of the softmax confidences"""
    x = desk_test.waveforms[:50]
    np.testing.assert_array_equal(desk_model.predict_batch(x), np.argmax(desk_model.confidences_batch(x), axis=1))


# ============================================================================
# GRADIENTS
# ============================================================================

def test_linear_gradient_is_weight_difference(linear_factory):
    """Test 9: for a linear classifier grad(f_j - f_i) equals W_j - W_i"""
    model = linear_factory(4)
    W = model.weight.detach().numpy()
    x = np.random.default_rng(4).standard_normal(50)
    np.testing.assert_allclose(input_gradient(model, x, 3, 1), W[3] - W[1], atol=1e-12)


def test_self_difference_gradient(linear_factory):
    """Test 10: j == i is rejected in strict mode and exactly zero otherwise"""
    model = linear_factory(5)
    x = np.zeros(50)
    with pytest.raises(ValueError):
        input_gradient(model, x, 2, 2)
    assert np.all(input_gradient(model, x, 2, 2, strict=False) == 0.0)


def test_gradient_matches_finite_differences(desk_model, desk_test):
    """Test 11: input gradients match central differences at 20 random coordinates on 5 inputs"""
    stream = np.random.default_rng(11)
    h = 1e-4
    speech = np.flatnonzero(desk_test.labels != desk_test.class_index("silence"))
    compared = 0
    for idx in stream.choice(speech, size=5, replace=False):
        x = desk_test.waveforms[idx]
        j, i = (int(c) for c in stream.choice(6, size=2, replace=False))
        grad = input_gradient(desk_model, x, j, i)

        for coord in stream.choice(x.size, size=20, replace=False):
            step = np.zeros(x.size)
            step[coord] = h
            plus, plus_mask = _logits_and_relu_mask(desk_model, x + step)
            minus, minus_mask = _logits_and_relu_mask(desk_model, x - step)
            # f is not differentiable where the step crosses a ReLU kink
            if not np.array_equal(plus_mask, minus_mask):
                continue
            fd = ((plus[j] - plus[i]) - (minus[j] - minus[i])) / (2 * h)
            assert abs(fd - grad[coord]) / max(abs(fd), 1e-8) <= 1e-3
            compared += 1
    assert compared >= 90


def test_class_gradients_rows(desk_model, desk_test):
    """Test 12: class_gradients rows match pairwise input_gradient differences"""
    x = desk_test.waveforms[0]
    scores, grads = class_gradients(desk_model, x, [0, 2, 4])
    assert scores.shape == (6,)
    np.testing.assert_allclose(grads[1] - grads[0], input_gradient(desk_model, x, 2, 0), atol=1e-10)


# ============================================================================
# TRAINING
# ============================================================================

def test_training_reduces_loss(trained):
    """Test 13: loss history is finite and ends below where it starts"""
    _, history = trained
    assert len(history) == 31
    assert np.all(np.isfinite(history))
    assert history[-1] < history[0]


def test_training_reaches_desk_accuracy(desk_model, desk_test):
    """Test 14: trained desk model reaches at least 85% test accuracy"""
    report = accuracy(desk_model, desk_test)
    assert report.overall >= 0.85
    assert report.mean_per_class >= 0.85


def test_zero_epochs_is_a_no_op(desk_pipeline, desk_train):
    """Test 15: epochs=0 returns an unchanged copy and an empty history"""
    model = init_classifier(ArchConfig(), desk_pipeline, 6, seed=4)
    copy, history = train(model, desk_train, TrainConfig(epochs=0))
    assert history == []
    assert copy is not model
    assert all(np.array_equal(x, y) for x, y in zip(_params(model), _params(copy)))


def test_training_is_deterministic(desk_pipeline, desk_train):
    """Test 16: same seeds give bit-identical parameters"""
    small = desk_train.take_per_class(10, seed=0)
    model = init_classifier(ArchConfig(), desk_pipeline, 6, seed=5)
    a, ha = train(model, small, TrainConfig(epochs=2, seed=3))
    b, hb = train(model, small, TrainConfig(epochs=2, seed=3))
    assert ha == hb
    assert all(np.array_equal(x, y) for x, y in zip(_params(a), _params(b)))


# ============================================================================
# ACCURACY
# ============================================================================

def test_perfect_predictor():
    """Test 17: perfect predictions give 100% in every class"""
    labels = np.repeat(np.arange(6), 5)
    report = accuracy_from_predictions(labels, labels, [str(i) for i in range(6)])
    assert all(row["accuracy_pct"] == 100.0 for row in report.rows())


def test_constant_predictor():
    """Test 18: a constant predictor on a uniform 6-class set has mean accuracy 1/6"""
    labels = np.repeat(np.arange(6), 5)
    report = accuracy_from_predictions(np.zeros_like(labels), labels, [str(i) for i in range(6)])
    assert report.mean_per_class == pytest.approx(1 / 6)
    assert report.rows()[-1]["class"] == "mean"


def test_hand_confusion():
    """Test 19: 20-sample hand fixture matches hand-computed accuracies"""
    labels = np.array([0] * 8 + [1] * 7 + [2] * 5)
    preds = np.array([0, 0, 0, 0, 0, 0, 1, 2] + [1, 1, 1, 0, 0, 2, 1] + [2, 2, 2, 2, 2])
    report = accuracy_from_predictions(preds, labels, ["a", "b", "c"])
    np.testing.assert_allclose(report.per_class, [6 / 8, 4 / 7, 1.0])
    assert report.overall == pytest.approx(15 / 20)
    assert [row["samples"] for row in report.rows()] == [8, 7, 5, 20]


def test_empty_evaluation_set():
    """Test 20: no samples raises EmptyEvaluationSet"""
    with pytest.raises(EmptyEvaluationSet):
        accuracy_from_predictions([], [], ["a", "b"])


# ============================================================================
# CHECKPOINTS
# ============================================================================

def test_checkpoint_round_trip(tmp_path, desk_model, desk_test):
    """Test 21: a reloaded checkpoint predicts identically and re-saves to the same digest"""
    digest = save_checkpoint(desk_model, tmp_path / "a.bin", desk_test.class_names)
    loaded, header = load_checkpoint(tmp_path / "a.bin")
    assert header["class_names"] == list(desk_test.class_names)
    np.testing.assert_array_equal(loaded.predict_batch(desk_test.waveforms), desk_model.predict_batch(desk_test.waveforms))
    assert save_checkpoint(loaded, tmp_path / "b.bin", desk_test.class_names) == digest


@pytest.mark.parametrize("mangle", [
    lambda blob: b"NOTACKPT" + blob[8:],
    lambda blob: blob[:-4],
    lambda blob: blob + b"\x00\x00\x00\x00",
    lambda blob: blob[:12],
])
def test_checkpoint_rejects_damage(tmp_path, desk_model, mangle):
    """Test 22: bad magic, truncation and trailing bytes raise CheckpointFormatError"""
    path = tmp_path / "ckpt.bin"
    save_checkpoint(desk_model, path)
    path.write_bytes(mangle(path.read_bytes()))
    with pytest.raises(CheckpointFormatError):
        load_checkpoint(path)


def test_training_rejects_empty_set(desk_pipeline, desk_train):
    """Test 23: an empty training set raises EmptyEvaluationSet with its error code"""
    empty = desk_train.subset([])
    model = init_classifier(ArchConfig(), desk_pipeline, 6, seed=6)
    with pytest.raises(EmptyEvaluationSet) as exc:
        train(model, empty, TrainConfig(epochs=1))
    assert exc.value.code == "EMPTY_EVALUATION_SET"
