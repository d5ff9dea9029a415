#!/usr/bin/env python3
"""
Attack tests: l_p projection, DeepFool (linear oracle and desk model),
UAP-HC, the target-confidence attack and random / induced perturbations.
"""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from services.attacks.deepfool import deepfool
from services.attacks.perturbation import Perturbation, Provenance
from services.attacks.projection import project_lp, quantize_into_ball
from services.attacks.random_perturbations import feature_perturbation, random_waveform_perturbation
from services.attacks.target_confidence import INIT_RANGE, run_target_trials, target_confidence_attack
from services.attacks.uap_hc import UapConfig, uap_hc
from services.core.errors import AlreadyFooled, InvalidConfig, ShapeMismatch
from services.model.classifier import LinearClassifier
from services.numeric.sampling import rng
from services.signal.config import PipelineConfig, Representation


# ============================================================================
# PROJECTION
# ============================================================================

def test_projection_examples():
    """Test 1: interior points stay, (3, 4) -> (0.6, 0.8), l_inf clamps"""
    v = np.array([0.1, -0.2])
    np.testing.assert_array_equal(project_lp(v, 2, 1.0), v)
    np.testing.assert_allclose(project_lp(np.array([3.0, 4.0]), 2, 1.0), [0.6, 0.8], atol=1e-15)
    np.testing.assert_array_equal(project_lp(np.array([0.3, -0.7]), "inf", 0.5), [0.3, -0.5])


def test_projection_keeps_perturbation_type():
    """Test 2: projecting a Perturbation returns a Perturbation with the same provenance"""
    v = Perturbation(np.array([3.0, 4.0]), Representation.WAVEFORM, Provenance.UAP_HC)
    out = project_lp(v, 2, 1.0)
    assert isinstance(out, Perturbation)
    assert out.provenance is Provenance.UAP_HC
    assert out.norm_l2 == pytest.approx(1.0)


def test_projection_oracle():
    """Test 3: 1000 random cases match the closed form and beat 100 feasible points each"""
    stream = np.random.default_rng(0)
    for _ in range(1000):
        d = int(stream.integers(1, 20))
        v = stream.standard_normal(d) * stream.uniform(0.1, 5.0)
        xi = stream.uniform(0.05, 3.0)
        p = "inf" if stream.uniform() < 0.5 else 2
        out = project_lp(v, p, xi)
        if p == 2:
            expected = v * min(1.0, xi / np.linalg.norm(v))
            feasible = stream.standard_normal((100, d))
            feasible *= (xi * stream.uniform(0, 1, (100, 1)) ** (1 / d)) / np.linalg.norm(feasible, axis=1, keepdims=True)
        else:
            expected = np.clip(v, -xi, xi)
            feasible = stream.uniform(-xi, xi, (100, d))
        np.testing.assert_allclose(out, expected, atol=1e-9)
        assert np.all(np.linalg.norm(out - v) <= np.linalg.norm(feasible - v, axis=1) + 1e-12)


@settings(max_examples=100, deadline=None)
@given(
    values=st.lists(st.floats(-100, 100, allow_nan=False), min_size=1, max_size=30),
    xi=st.floats(0.01, 50),
    p=st.sampled_from([2, "inf"]),
)
def test_projection_is_idempotent(values, xi, p):
    """Test 4: project(project(v)) == project(v) exactly"""
    once = project_lp(np.array(values), p, xi)
    np.testing.assert_array_equal(project_lp(once, p, xi), once)


def test_quantize_into_ball():
    """Test 5: float32 storage never leaves the ball"""
    stream = np.random.default_rng(1)
    for _ in range(200):
        v = stream.standard_normal(300)
        xi = float(stream.uniform(0.01, 2.0))
        for p in (2, "inf"):
            q = quantize_into_ball(v, p, xi)
            assert np.array_equal(q, q.astype(np.float32).astype(np.float64))
            size = np.max(np.abs(q)) if p == "inf" else np.linalg.norm(q)
            assert size <= xi


# ============================================================================
# DEEPFOOL
# ============================================================================

@pytest.mark.parametrize("seed", range(50))
def test_deepfool_linear_oracle(linear_factory, seed):
    """Test 6: on linear classifiers one step lands on the nearest boundary and overshoot flips the class"""
    model = linear_factory(seed, d=50, k=5)
    W, b = model.weight.detach().numpy(), model.bias.detach().numpy()
    x = np.random.default_rng(1000 + seed).standard_normal(50)
    logits = W @ x + b
    source = int(np.argmax(logits))
    others = [j for j in range(5) if j != source]
    distances = [abs(logits[j] - logits[source]) / np.linalg.norm(W[j] - W[source]) for j in others]

    result = deepfool(x, model)
    assert result.iterations == 1
    assert result.raw_norm == pytest.approx(min(distances), rel=1e-4)
    assert model.predict(x + result.perturbation.values) != source
    assert result.converged


def test_deepfool_two_class_closed_form():
    """Test 7: 2-class linear toy: ||r|| = g / ||w|| and r reaches the boundary exactly"""
    weight = np.array([[2.0, 1.0, 0.0], [0.0, -1.0, 1.0]])
    model = LinearClassifier(weight, np.zeros(2))
    x = np.array([1.0, 0.5, 0.2])
    gap = (weight[0] - weight[1]) @ x
    result = deepfool(x, model)
    assert result.raw_norm == pytest.approx(gap / np.linalg.norm(weight[0] - weight[1]), rel=1e-12)
    assert (weight[0] - weight[1]) @ (x + result.raw) == pytest.approx(0.0, abs=1e-12)
    assert result.final_class == 1


@pytest.mark.parametrize("seed", range(10))
def test_deepfool_single_allowed_target(linear_factory, seed):
    """Test 8: restricting all but one other class sends a converged run to that class"""
    model = linear_factory(seed, d=20, k=5)
    x = np.random.default_rng(seed).standard_normal(20)
    source = model.predict(x)
    target = (source + 1) % 5
    restricted = [j for j in range(5) if j not in (source, target)]
    result = deepfool(x, model, restricted=restricted)
    if result.converged:
        assert result.final_class == target
        assert model.predict(x + result.perturbation.values) == target


def test_deepfool_preconditions(linear_factory):
    """Test 9: a wrong label raises AlreadyFooled, a full restriction raises InvalidConfig"""
    model = linear_factory(3, d=10, k=3)
    x = np.random.default_rng(3).standard_normal(10)
    source = model.predict(x)
    with pytest.raises(AlreadyFooled):
        deepfool(x, model, label=(source + 1) % 3)
    with pytest.raises(InvalidConfig):
        deepfool(x, model, restricted=[j for j in range(3) if j != source])


def test_deepfool_never_lands_in_restricted(desk_model, desk_test):
    """Test 10: over 100 seeded desk inputs, converged DeepFool never ends in the restricted class"""
    left = desk_test.class_index("left")
    predictions = desk_model.predict_batch(desk_test.waveforms)
    eligible = np.flatnonzero((predictions == desk_test.labels) & (desk_test.labels != left))
    assert eligible.size >= 100
    converged = 0
    for idx in np.random.default_rng(10).choice(eligible, size=100, replace=False):
        x, label = desk_test.waveforms[idx], int(desk_test.labels[idx])
        result = deepfool(x, desk_model, restricted=[left], label=label)
        if result.converged:
            converged += 1
            assert result.final_class not in (left, label)
            assert desk_model.predict(x + result.perturbation.values) == result.final_class
    assert converged > 0


# ============================================================================
# UAP-HC
# ============================================================================

@pytest.fixture(scope="module")
def uap_inputs(desk_train):
    return desk_train.take_per_class(4, seed=5)


def test_uap_delta_one_returns_zero(desk_model, uap_inputs):
    """Test 11: delta=1 stops before the first pass with a zero perturbation"""
    result = uap_hc(uap_inputs, desk_model, UapConfig(xi=1.0, delta=1.0, seed=0))
    assert np.all(result.perturbation.values == 0.0)
    assert result.trace.passes_completed == 0
    assert len(result.trace) == 0
    assert result.fooling_rate == 0.0


@pytest.fixture(scope="module")
def uap_run(desk_model, uap_inputs, desk_train):
    left = desk_train.class_index("left")
    cfg = UapConfig(xi=1.0, delta=0.2, i_max=2, restricted=(left,), seed=7)
    return cfg, uap_hc(uap_inputs, desk_model, cfg)


def test_uap_trace_is_monotone(uap_run):
    """Test 12: fooling rate strictly increases at every accepted update"""
    _, result = uap_run
    rates = result.trace.fooling_rates()
    assert np.all(np.diff(rates) > 0)
    assert all(e.norm_l2 <= 1.0 * (1 + 1e-9) for e in result.trace.entries)


def test_uap_respects_ball_and_restriction(uap_run):
    """Test 13: stored perturbation lies in the ball and no update is triggered into left"""
    cfg, result = uap_run
    assert result.perturbation.norm_l2 <= cfg.xi
    assert all(e.triggering_class not in cfg.restricted for e in result.trace.entries)
    assert result.perturbation.meta["restricted"] == list(cfg.restricted)


def test_uap_is_deterministic(desk_model, uap_inputs, uap_run):
    """Test 14: rerunning a seed reproduces the perturbation bit-exactly"""
    cfg, result = uap_run
    again = uap_hc(uap_inputs, desk_model, cfg)
    assert again.perturbation.values.tobytes() == result.perturbation.values.tobytes()


def test_uap_linf(desk_model, uap_inputs):
    """Test 15: the l_inf variant keeps every sample within xi"""
    result = uap_hc(uap_inputs, desk_model, UapConfig(xi=0.05, p="inf", i_max=1, seed=1))
    assert result.perturbation.norm_inf <= 0.05


def test_uap_rejects_over_restriction(desk_model, uap_inputs):
    """Test 16: restricting k-1 classes leaves too few targets"""
    with pytest.raises(InvalidConfig):
        uap_hc(uap_inputs, desk_model, UapConfig(restricted=(0, 1, 2, 3, 4)))


# ============================================================================
# TARGET CONFIDENCE
# ============================================================================

def test_target_zero_iterations(desk_model):
    """Test 17: iters=0 returns the projected initialization"""
    result = target_confidence_attack(desk_model, 2, xi=1.0, iters=0, seed=(3, 2, 0))
    init = project_lp(rng((3, 2, 0)).uniform(-INIT_RANGE, INIT_RANGE, desk_model.input_len), 2, 1.0)
    np.testing.assert_array_equal(result.perturbation.values, quantize_into_ball(init, 2, 1.0))
    assert result.history == (result.best_objective,)


def test_target_history_and_norm(desk_model):
    """Test 18: best-so-far objective never decreases and ||v|| <= xi"""
    for target in (0, 4):
        result = target_confidence_attack(desk_model, target, xi=1.0, iters=30, seed=target)
        assert np.all(np.diff(result.history) >= 0)
        assert result.perturbation.norm_l2 <= 1.0
        assert result.best_objective == pytest.approx(max(result.history))


def test_target_trials_independent_of_workers(desk_model):
    """Test 19: trial results come back in (target, trial) order whatever the worker count"""
    one = run_target_trials(desk_model, [1, 3], xi=1.0, iters=5, step=0.01, trials=2, seed=9, workers=1)
    three = run_target_trials(desk_model, [1, 3], xi=1.0, iters=5, step=0.01, trials=2, seed=9, workers=3)
    assert [r.target for r in one] == [1, 1, 3, 3]
    for a, b in zip(one, three):
        assert a.perturbation.values.tobytes() == b.perturbation.values.tobytes()


# ============================================================================
# RANDOM / INDUCED PERTURBATIONS
# ============================================================================

def test_random_waveform_perturbation():
    """Test 20: exact target norm, seeded, and nearly orthogonal across seeds"""
    v = random_waveform_perturbation(4, 0.1, 2000)
    assert v.norm_l2 == pytest.approx(0.1, abs=1e-9)
    assert np.array_equal(v.values, random_waveform_perturbation(4, 0.1, 2000).values)
    for seed in range(20):
        a = random_waveform_perturbation((seed, 0), 1.0, 2000).values
        b = random_waveform_perturbation((seed, 1), 1.0, 2000).values
        assert abs(a @ b) < 0.1


def test_feature_perturbation_zero_and_anchor(desk_pipeline, desk_test):
    """Test 21: v=0 induces nothing and the induced SPEC perturbation depends on the anchor"""
    zero = Perturbation.zeros(desk_pipeline)
    assert np.all(feature_perturbation(desk_test.waveforms[0], zero, "MFCC", desk_pipeline).values == 0.0)
    v = random_waveform_perturbation(1, 0.5, desk_pipeline.input_len)
    a = feature_perturbation(desk_test.waveforms[0], v, "SPEC", desk_pipeline)
    b = feature_perturbation(desk_test.waveforms[-1], v, "SPEC", desk_pipeline)
    assert a.domain is Representation.SPEC
    assert not np.allclose(a.values, b.values)


def test_feature_perturbation_hand_dft():
    """Test 22: toy 8-sample SPEC perturbation equals |DFT(x + v)| - |DFT(x)|"""
    cfg = PipelineConfig(input_len=8, frame_len=8, hop=8, fft_size=8, retained_bins=5,
                         n_mels=2, n_mfcc=1, sample_rate_hz=8000, window="rectangular")
    stream = np.random.default_rng(6)
    x, values = stream.uniform(-1, 1, 8), stream.uniform(-0.2, 0.2, 8)
    v = Perturbation(values, Representation.WAVEFORM, Provenance.RANDOM)
    n = np.arange(8)
    dft = np.exp(-2j * np.pi * np.arange(5)[:, None] * n / 8)
    expected = np.abs(dft @ (x + values)) - np.abs(dft @ x)
    np.testing.assert_allclose(feature_perturbation(x, v, "SPEC", cfg).values[0], expected, atol=2e-6)


def test_perturbation_shape_check(desk_pipeline):
    """Test 23: a perturbation of the wrong length fails check_shape"""
    v = Perturbation(np.zeros(10), Representation.WAVEFORM, Provenance.RANDOM)
    with pytest.raises(ShapeMismatch):
        v.check_shape(desk_pipeline)


def test_target_step_is_normalized(linear_factory):
    """Test 24: one ascent iteration moves the start by exactly `step` along the confidence gradient"""
    model = linear_factory(12)
    W, b = model.weight.detach().numpy(), model.bias.detach().numpy()
    start = rng(7).uniform(-INIT_RANGE, INIT_RANGE, 50)

    logits = W @ start + b
    p = np.exp(logits - logits.max())
    p /= p.sum()
    g = p[1] * (W[1] - p @ W)
    expected = start + 0.01 * g / np.linalg.norm(g)

    result = target_confidence_attack(model, 1, xi=100.0, iters=1, step=0.01, seed=7)
    np.testing.assert_allclose(result.perturbation.values, expected, atol=1e-7)
    assert np.linalg.norm(result.perturbation.values - start) == pytest.approx(0.01, rel=1e-4)
