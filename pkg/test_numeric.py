#!/usr/bin/env python3
"""
Numeric kernel tests: Jacobi SVD, row normalization, exponential decay fit
and seeded random streams.
"""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import FIXTURES, read_golden
from services.core.errors import DegenerateSeries, NonFinite, ZeroRow
from services.numeric.curve_fit import LAMBDA_GRID, fit_exp_decay, scale_series
from services.numeric.sampling import quantize_f32, rng, sample_uniform, sample_unit_sphere, split_streams
from services.numeric.svd import _round_robin, normalize_rows, thin_svd


# ============================================================================
# SVD
# ============================================================================

def test_round_robin_covers_every_pair_once():
    """Test 1: tournament rounds are disjoint and cover every column pair exactly once"""
    for n in (2, 5, 8):
        seen = []
        for I, J in _round_robin(n):
            cols = np.concatenate([I, J])
            assert cols.size == np.unique(cols).size
            seen += list(zip(I.tolist(), J.tolist()))
        assert sorted(seen) == [(i, j) for i in range(n) for j in range(i + 1, n)]


def test_identity():
    """Test 2: identity 4 x 4 has singular values (1, 1, 1, 1)"""
    result = thin_svd(np.eye(4))
    np.testing.assert_allclose(result.sigma, np.ones(4), atol=1e-14)


def test_rank_one():
    """Test 3: a b^T has exactly one singular value above 1e-10 * sigma_1"""
    stream = np.random.default_rng(0)
    a, b = stream.standard_normal(12), stream.standard_normal(7)
    result = thin_svd(np.outer(a, b))
    assert int(np.sum(result.sigma > 1e-10 * result.sigma[0])) == 1
    assert result.sigma[0] == pytest.approx(np.linalg.norm(a) * np.linalg.norm(b), rel=1e-12)


@pytest.mark.parametrize("seed", range(20))
def test_random_matrix_invariants(seed):
    """Test 4: reconstruction, orthonormality, ordering and eigenvalue oracle on 20 x 30"""
    M = np.random.default_rng(seed).standard_normal((20, 30))
    result = thin_svd(M)
    assert result.U.shape == (20, 20) and result.V.shape == (30, 20)
    assert np.linalg.norm(result.reconstruct() - M) <= 1e-6 * np.linalg.norm(M)
    np.testing.assert_allclose(result.U.T @ result.U, np.eye(20), atol=1e-6)
    np.testing.assert_allclose(result.V.T @ result.V, np.eye(20), atol=1e-6)
    assert np.all(np.diff(result.sigma) <= 0) and np.all(result.sigma >= 0)
    oracle = np.sqrt(np.clip(np.sort(np.linalg.eigvalsh(M @ M.T))[::-1], 0, None))
    np.testing.assert_allclose(result.sigma, oracle, atol=1e-8 * oracle[0])


def test_tall_matrix_and_sign_convention():
    """Test 5: tall input works and every V column starts with a positive component"""
    M = np.random.default_rng(7).standard_normal((30, 6))
    result = thin_svd(M)
    assert np.linalg.norm(result.reconstruct() - M) <= 1e-9 * np.linalg.norm(M)
    for col in range(result.V.shape[1]):
        nonzero = np.flatnonzero(np.abs(result.V[:, col]) > 1e-14)
        assert result.V[nonzero[0], col] > 0


def test_spectral_norm_dominance():
    """Test 6: sigma_1 >= ||M x|| for 100 random unit x"""
    stream = np.random.default_rng(8)
    M = stream.standard_normal((15, 25))
    sigma1 = thin_svd(M).sigma[0]
    for _ in range(100):
        x = sample_unit_sphere(stream, 25)
        assert np.linalg.norm(M @ x) <= sigma1 * (1 + 1e-12)


def test_rank_deficient_completion():
    """Test 7: zero columns still give an orthonormal U"""
    M = np.zeros((5, 4))
    M[:, 0] = np.arange(5)
    result = thin_svd(M)
    np.testing.assert_allclose(result.U.T @ result.U, np.eye(4), atol=1e-10)
    np.testing.assert_allclose(result.reconstruct(), M, atol=1e-12)


def test_non_finite_rejected():
    """Test 8: NaN entries raise NonFinite"""
    with pytest.raises(NonFinite):
        thin_svd(np.array([[1.0, np.nan], [0.0, 1.0]]))


# ============================================================================
# ROW NORMALIZATION
# ============================================================================

def test_normalize_rows_examples():
    """Test 9: (3, 4) -> (0.6, 0.8) and unit rows stay put"""
    np.testing.assert_allclose(normalize_rows(np.array([[3.0, 4.0]])), [[0.6, 0.8]])
    unit = normalize_rows(np.random.default_rng(1).standard_normal((10, 5)))
    np.testing.assert_allclose(np.linalg.norm(unit, axis=1), 1.0, atol=1e-12)
    np.testing.assert_allclose(normalize_rows(unit), unit, atol=1e-12)


def test_normalize_rows_zero_row():
    """Test 10: a zero row raises ZeroRow naming the row"""
    with pytest.raises(ZeroRow) as exc:
        normalize_rows(np.array([[1.0, 0.0], [0.0, 0.0]]))
    assert exc.value.details["rows"] == [1]


# ============================================================================
# EXPONENTIAL DECAY FIT
# ============================================================================

@pytest.mark.parametrize("lam", [0.5, 5.0, 50.0])
@pytest.mark.parametrize("omega", [0.0, 0.1])
def test_fit_recovers_lambda(lam, omega):
    """Test 11: noiseless rho * exp(-x lambda) + omega recovers lambda within 5%"""
    x = np.linspace(0.0, 1.0, 100)
    fit = fit_exp_decay(1.0 * np.exp(-x * lam) + omega)
    assert fit.lambda_ == pytest.approx(lam, rel=0.05)
    assert fit.rmse < 1e-3


@pytest.mark.parametrize("seed", range(20))
def test_linear_series_decays_slower(seed):
    """Test 12: a straight descending line fits a smaller lambda than an exponential of equal range"""
    stream = np.random.default_rng(seed)
    n = int(stream.integers(20, 200))
    lo, hi = sorted(stream.uniform(0, 10, 2))
    x = np.linspace(0.0, 1.0, n)
    linear = hi - (hi - lo) * x
    exponential = lo + (hi - lo) * np.exp(-x * stream.uniform(1.0, 20.0))
    assert fit_exp_decay(linear).lambda_ < fit_exp_decay(exponential).lambda_


def test_fit_is_scale_invariant():
    """Test 13: multiplying the series by 10 leaves the fit unchanged"""
    series = np.sort(np.random.default_rng(3).exponential(1.0, 50))[::-1]
    a, b = fit_exp_decay(series), fit_exp_decay(10.0 * series)
    assert a.lambda_ == pytest.approx(b.lambda_, rel=1e-6)
    assert a.rho == pytest.approx(b.rho, rel=1e-6)
    assert a.omega == pytest.approx(b.omega, abs=1e-6)


def test_fit_beats_every_grid_candidate():
    """Test 14: the returned objective is no worse than any grid point"""
    series = np.sort(np.random.default_rng(4).exponential(1.0, 60))[::-1]
    x, y = scale_series(series)
    fit = fit_exp_decay(series)
    sse = fit.rmse ** 2 * y.size
    for lam in LAMBDA_GRID:
        basis = np.column_stack([np.exp(-x * lam), np.ones_like(x)])
        coef, *_ = np.linalg.lstsq(basis, y, rcond=None)
        resid = basis @ coef - y
        assert sse <= resid @ resid + 1e-12


def test_fit_degenerate_series():
    """Test 15: constant input raises DegenerateSeries"""
    with pytest.raises(DegenerateSeries):
        fit_exp_decay(np.ones(10))


# ============================================================================
# RANDOM STREAMS
# ============================================================================

def test_same_seed_same_stream():
    """Test 16: identical seeds give identical streams, split streams differ"""
    assert np.array_equal(rng(11).uniform(size=5), rng(11).uniform(size=5))
    a, b = split_streams(11, 2)
    assert not np.array_equal(a.uniform(size=5), b.uniform(size=5))


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), d=st.integers(1, 500))
def test_unit_sphere_norm(seed, d):
    """Test 17: unit-sphere samples have norm 1 within 1e-12"""
    assert np.linalg.norm(sample_unit_sphere(rng(seed), d)) == pytest.approx(1.0, abs=1e-12)


def test_uniform_moments():
    """Test 18: 1e5 uniform samples in [-1, 1] have mean ~0 and variance ~1/3"""
    samples = sample_uniform(rng(5), -1.0, 1.0, 100_000)
    assert abs(samples.mean()) < 0.01
    assert abs(samples.var() - 1.0 / 3.0) < 0.02
    with pytest.raises(ValueError):
        sample_uniform(rng(5), 1.0, 1.0, 3)


def test_pinned_golden_vector(golden):
    """Test 19: a pinned seed reproduces the stored golden vector"""
    values = quantize_f32(rng([2024, 6, 11]).uniform(-1.0, 1.0, 8)).tolist()
    assert values == golden("rng_golden", values)


def test_golden_files_are_never_written_silently(tmp_path):
    """Test 20: a missing golden file fails, and is written only when recording is on"""
    with pytest.raises(pytest.fail.Exception):
        read_golden(tmp_path, "absent", [1.0])
    assert not (tmp_path / "absent.json").exists()

    assert read_golden(tmp_path, "absent", [1.0], record=True) == [1.0]
    assert read_golden(tmp_path, "absent", [2.0]) == [1.0]
    assert (FIXTURES / "rng_golden.json").exists()
