"""Tests for least squares and the conditional Wald estimator"""

import logging

import numpy as np
import pytest

from civforge.estimation import (
    EstimateResult,
    ace_error,
    first_stage_f,
    naive_ols_ace,
    ols,
    ols_fit,
    residualize,
    two_stage_ace,
    wald_civ,
)
from civforge.exceptions import RankDeficiencyError, ShapeError, WeakInstrumentError
from civforge.simulation import ScmSpec, generate


@pytest.fixture
def iv_data():
    """Linear IV data: w confounds nothing, u confounds t and y, effect 1.5."""
    rng = np.random.default_rng(12)
    n = 20000
    s = rng.normal(size=n)
    w = rng.normal(size=(n, 2))
    u = rng.normal(size=n)
    t = 0.8 * s + w[:, 0] + u + rng.normal(size=n)
    y = 1.5 * t + w[:, 1] - 2.0 * u + rng.normal(size=n)
    return s, w, t, y


def test_ols_exact_line():
    """Test y = 3 + 2x"""
    x = np.arange(10.0)
    np.testing.assert_allclose(ols(x, 3.0 + 2.0 * x), [3.0, 2.0], atol=1e-10)


def test_ols_residuals_are_orthogonal():
    """Test the normal equations hold"""
    rng = np.random.default_rng(0)
    design = rng.normal(size=(200, 4))
    fit = ols_fit(design, rng.normal(size=200))
    full = np.column_stack([np.ones(200), design])
    np.testing.assert_allclose(full.T @ fit.residuals, np.zeros(5), atol=1e-8)
    assert fit.n_params == 5


def test_ols_without_intercept():
    """Test intercept=False"""
    x = np.arange(1.0, 6.0)
    np.testing.assert_allclose(ols(x, 4.0 * x, intercept=False), [4.0])


def test_ols_errors():
    """Test rank deficiency, too few rows and shape mismatch"""
    x = np.arange(10.0)
    with pytest.raises(RankDeficiencyError, match="rank deficient"):
        ols(np.column_stack([x, x]), x)
    with pytest.raises(RankDeficiencyError):
        ols(np.ones((2, 2)), np.ones(2))
    with pytest.raises(ShapeError):
        ols(np.ones((5, 1)), np.ones(4))
    with pytest.raises(ValueError, match="non-finite"):
        ols(np.array([1.0, np.nan, 3.0, 4.0]), np.ones(4))


@pytest.mark.parametrize("seed", range(20))
def test_ols_matches_lstsq(seed):
    """Test coefficients and residuals against numpy's SVD least squares"""
    rng = np.random.default_rng(300 + seed)
    n, k = int(rng.integers(20, 200)), int(rng.integers(1, 7))
    design = rng.normal(size=(n, k)) * rng.uniform(0.1, 10.0, size=k) + rng.normal(size=k)
    target = rng.normal(size=n) * 3.0 + design @ rng.normal(size=k)

    fit = ols_fit(design, target)
    full = np.column_stack([np.ones(n), design])
    reference, *_ = np.linalg.lstsq(full, target, rcond=None)
    np.testing.assert_allclose(fit.coef, reference, rtol=1e-9, atol=1e-9)
    np.testing.assert_allclose(fit.residuals, target - full @ reference, atol=1e-9)


def _design_with_condition(rng, n, k, condition):
    left, _ = np.linalg.qr(rng.normal(size=(n, k)))
    right, _ = np.linalg.qr(rng.normal(size=(k, k)))
    return left @ np.diag(np.geomspace(1.0, 1.0 / condition, k)) @ right.T


def test_ols_condition_number_boundary():
    """Test ill-conditioned designs just inside the limit fit and those beyond it fail"""
    rng = np.random.default_rng(41)
    coef = rng.normal(size=4)

    inside = _design_with_condition(rng, 60, 4, 1e9)
    fit = ols_fit(inside, inside @ coef, intercept=False)
    reference, *_ = np.linalg.lstsq(inside, inside @ coef, rcond=None)
    np.testing.assert_allclose(fit.coef, reference, rtol=1e-4)
    np.testing.assert_allclose(fit.coef, coef, rtol=1e-4)

    outside = _design_with_condition(rng, 60, 4, 1e11)
    with pytest.raises(RankDeficiencyError, match="condition number"):
        ols_fit(outside, outside @ coef, intercept=False)


def test_residualize_without_controls():
    """Test demeaning when there are no controls"""
    np.testing.assert_allclose(residualize([1.0, 2.0, 3.0], np.empty((3, 0))), [-1.0, 0.0, 1.0])


def test_wald_exact_system():
    """Test t = s, y = 2t with no conditioners"""
    s = np.array([0.0, 1.0, 2.0, 3.0, 4.0, 5.0])
    result = wald_civ(s, None, s, 2.0 * s)
    assert result.ace == pytest.approx(2.0)
    assert result.n == 6
    assert result.epsilon_ace is None
    assert result.first_stage_f > 1e6


def test_wald_recovers_confounded_effect(iv_data):
    """Test the instrument removes confounding that biases OLS"""
    s, w, t, y = iv_data
    result = wald_civ(s, w, t, y, true_ace=1.5)

    assert abs(result.ace - 1.5) < 0.1
    assert result.epsilon_ace == pytest.approx(abs(result.ace - 1.5))
    assert result.first_stage_f > 100
    assert result.ace == pytest.approx(result.numerator / result.denominator)
    assert abs(naive_ols_ace(t, y).ace - 1.5) > 0.3


def test_wald_invariances(iv_data):
    """Test instrument scaling, outcome shifts and conditioner order"""
    s, w, t, y = iv_data
    base = wald_civ(s, w, t, y).ace
    assert wald_civ(-3.0 * s, w, t, y).ace == pytest.approx(base, abs=1e-8)
    assert wald_civ(s, w, t, y + 17.0).ace == pytest.approx(base, abs=1e-8)
    assert wald_civ(s, w[:, ::-1], t, y).ace == pytest.approx(base, abs=1e-10)


def test_ratio_and_two_stage_forms_agree(iv_data):
    """Test the single-instrument ratio equals the projection form"""
    s, w, t, y = iv_data
    assert two_stage_ace(s, w, t, y) == pytest.approx(wald_civ(s, w, t, y).ace, abs=1e-8)


def test_multiple_instruments(iv_data):
    """Test the two-stage form with two instruments"""
    s, w, t, y = iv_data
    rng = np.random.default_rng(1)
    second = rng.normal(size=s.shape[0])
    t2 = t + 0.5 * second
    result = wald_civ(np.column_stack([s, second]), w, t2, y + 0.75 * second)

    assert abs(result.ace - 1.5) < 0.1
    expected = two_stage_ace(np.column_stack([s, second]), w, t2, y + 0.75 * second)
    assert result.ace == pytest.approx(expected)


def test_weak_instrument_is_rejected():
    """Test an instrument unrelated to t"""
    rng = np.random.default_rng(2)
    w = rng.normal(size=50)
    s = np.linspace(-1, 1, 50)
    t = 2.0 * w
    with pytest.raises(WeakInstrumentError):
        wald_civ(s, w, t, rng.normal(size=50))


def test_weak_first_stage_warns(caplog):
    """Test F < 10 is logged"""
    rng = np.random.default_rng(3)
    n = 200
    s = rng.normal(size=n)
    t = 0.01 * s + rng.normal(size=n)
    with caplog.at_level(logging.WARNING, logger="civforge.estimation.iv"):
        result = wald_civ(s, None, t, t + rng.normal(size=n))
    assert result.first_stage_f < 10
    assert "weak first stage" in caplog.text


def test_wald_shape_errors():
    """Test row mismatches and empty instruments"""
    with pytest.raises(ShapeError):
        wald_civ(np.ones(5), None, np.ones(4), np.ones(4))
    with pytest.raises(ShapeError):
        wald_civ(np.empty((5, 0)), None, np.ones(5), np.ones(5))


def test_first_stage_f_matches_definition(iv_data):
    """Test F against residual sums of squares"""
    s, w, t, _ = iv_data
    n = t.shape[0]
    rss_full = np.sum(ols_fit(np.column_stack([s, w]), t).residuals ** 2)
    rss_restricted = np.sum(ols_fit(w, t).residuals ** 2)
    expected = (rss_restricted - rss_full) / (rss_full / (n - 4))
    assert first_stage_f(s.reshape(-1, 1), w, t) == pytest.approx(expected)


def test_ace_error():
    """Test absolute error"""
    assert ace_error(2.26, 2.0) == pytest.approx(0.26)
    assert ace_error(2.0, 2.0) == 0.0
    assert ace_error(1.5, 2.0) == 0.5


def test_estimate_result_invariants():
    """Test the ratio and nonzero denominator checks"""
    with pytest.raises(WeakInstrumentError):
        EstimateResult(ace=1.0, numerator=1.0, denominator=0.0, first_stage_f=1.0, n=3)
    with pytest.raises(ValueError, match="differs"):
        EstimateResult(ace=1.0, numerator=3.0, denominator=2.0, first_stage_f=1.0, n=3)
    scaled = EstimateResult(ace=1.5, numerator=3.0, denominator=2.0, first_stage_f=1.0, n=3)
    assert scaled.scaled(2.0).ace == 3.0
    assert scaled.with_truth(1.0).epsilon_ace == 0.5


def test_simulated_conditional_instrument():
    """Test S given {X1, X2} on simulated data with a strong S -> T edge"""
    data = generate(ScmSpec().with_coefficient("T", "S", 2.0), 100000, seed=3)
    s = data.column("S")
    conditioned = wald_civ(s, data.columns_matrix(["X1", "X2"]), data.t, data.y, true_ace=2.0)
    unconditioned = wald_civ(s, None, data.t, data.y, true_ace=2.0)

    assert conditioned.epsilon_ace < 0.15
    assert unconditioned.epsilon_ace > 0.3


def test_naive_ols_is_biased_on_simulated_data():
    """Test regression of Y on T alone"""
    data = generate(ScmSpec(), 100000, seed=3)
    result = naive_ols_ace(data.t, data.y, true_ace=2.0)
    assert result.method == "naive_ols"
    assert result.epsilon_ace > 0.5


@pytest.mark.slow
def test_simulated_oracle_at_full_size():
    """Test S given {X1, X2} with the default model at n = 10^6"""
    data = generate(ScmSpec(), 1_000_000, seed=3)
    s = data.column("S")
    conditioned = wald_civ(s, data.columns_matrix(["X1", "X2"]), data.t, data.y, true_ace=2.0)
    unconditioned = wald_civ(s, None, data.t, data.y, true_ace=2.0)

    assert conditioned.epsilon_ace < 0.2
    assert unconditioned.epsilon_ace > 0.05
