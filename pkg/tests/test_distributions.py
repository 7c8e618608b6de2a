"""Tests for Gaussian and Bernoulli terms"""

import math

import numpy as np
import pytest

from civforge.exceptions import ShapeError
from civforge.nn import (
    GaussParams,
    backprop,
    bern_logpmf,
    gauss_logpdf,
    gauss_reparam,
    kl_diag_gauss,
    kl_standard_normal,
    parameter,
)


def _gauss(mu, var):
    return GaussParams(mu=np.array(mu, dtype=float), log_var=np.log(np.array(var, dtype=float)))


def test_reparam_values():
    """Test mu + sigma * noise"""
    assert gauss_reparam(_gauss([0.0], [1.0]), np.array([1.5])).numpy()[0] == 1.5
    assert gauss_reparam(_gauss([2.0], [4.0]), np.array([-1.0])).numpy()[0] == pytest.approx(0.0)


def test_reparam_gradient_wrt_mean():
    """Test d sample / d mu = 1"""
    mu = parameter(np.array([0.3]))
    p = GaussParams(mu=mu, log_var=np.array([0.2]))
    grad = backprop(gauss_reparam(p, np.array([0.7])).sum(), [mu])[0]
    assert grad[0] == 1.0


def test_reparam_shape_check():
    """Test noise of the wrong shape"""
    with pytest.raises(ShapeError):
        gauss_reparam(_gauss([0.0, 1.0], [1.0, 1.0]), np.array([1.0]))


def test_reparam_moments():
    """Test empirical mean and variance of many draws"""
    rng = np.random.default_rng(0)
    n = 100000
    p = GaussParams(mu=np.full(n, 1.5), log_var=np.full(n, math.log(0.25)))
    draws = gauss_reparam(p, rng.standard_normal(n)).numpy()
    assert abs(draws.mean() - 1.5) < 5 * 0.5 / math.sqrt(n)
    assert abs(draws.var() - 0.25) < 5 * 0.25 * math.sqrt(2.0 / n)


def test_kl_closed_forms():
    """Test KL values with known answers"""
    assert kl_diag_gauss(_gauss([0.3], [2.0]), _gauss([0.3], [2.0])).item() == pytest.approx(0.0)
    assert kl_diag_gauss(_gauss([1.0], [1.0]), _gauss([0.0], [1.0])).item() == pytest.approx(0.5)
    expected = 0.5 * (4.0 - 1.0 - math.log(4.0))
    assert kl_diag_gauss(_gauss([0.0], [4.0]), _gauss([0.0], [1.0])).item() == pytest.approx(
        expected, abs=1e-12
    )


def test_kl_standard_normal_agrees():
    """Test the standard-normal shortcut"""
    q = _gauss([0.4, -1.0], [0.5, 3.0])
    assert kl_standard_normal(q).item() == pytest.approx(
        kl_diag_gauss(q, _gauss([0.0, 0.0], [1.0, 1.0])).item(), abs=1e-12
    )


def test_kl_nonnegative():
    """Test KL >= 0 on random parameters"""
    rng = np.random.default_rng(3)
    for _ in range(100):
        q = GaussParams(mu=rng.normal(size=3), log_var=rng.normal(size=3))
        p = GaussParams(mu=rng.normal(size=3), log_var=rng.normal(size=3))
        assert kl_diag_gauss(q, p).item() >= 0.0


def test_kl_batched_rows():
    """Test batched KL returns one value per row"""
    q = GaussParams(mu=np.zeros((4, 2)), log_var=np.zeros((4, 2)))
    assert kl_standard_normal(q).shape == (4,)
    with pytest.raises(ShapeError):
        kl_diag_gauss(q, GaussParams.standard((4, 3)))


def test_gauss_logpdf_standard():
    """Test log N(0; 0, 1)"""
    value = gauss_logpdf(np.array([0.0]), _gauss([0.0], [1.0])).numpy()[0]
    assert value == pytest.approx(-0.5 * math.log(2 * math.pi), abs=1e-12)


def test_gauss_density_integrates_to_one():
    """Test numerical integration over +-8 sigma"""
    rng = np.random.default_rng(9)
    for _ in range(5):
        mu, sd = rng.normal(), math.exp(rng.normal() * 0.5)
        grid = np.linspace(mu - 8 * sd, mu + 8 * sd, 4001)
        p = GaussParams(mu=np.full_like(grid, mu), log_var=np.full_like(grid, 2 * math.log(sd)))
        density = np.exp(gauss_logpdf(grid, p).numpy())
        assert density.sum() * (grid[1] - grid[0]) == pytest.approx(1.0, abs=1e-3)


def test_bernoulli_mass():
    """Test Bernoulli log-mass and its normalisation"""
    assert bern_logpmf(np.array([1.0]), np.array([0.5])).numpy()[0] == pytest.approx(
        math.log(0.5)
    )
    total = np.exp(bern_logpmf(np.array([0.0, 1.0]), np.array([0.3, 0.3])).numpy()).sum()
    assert total == pytest.approx(1.0)


def test_bernoulli_clamps_extremes():
    """Test probabilities of exactly 0 and 1 give finite values"""
    values = bern_logpmf(np.array([1.0, 0.0]), np.array([0.0, 1.0])).numpy()
    assert np.all(np.isfinite(values))
    assert values[0] == pytest.approx(math.log(1e-6))


def test_logdensity_rejects_nonfinite():
    """Test NaN inputs"""
    with pytest.raises(ValueError):
        gauss_logpdf(np.array([np.nan]), _gauss([0.0], [1.0]))
    with pytest.raises(ValueError):
        bern_logpmf(np.array([1.0]), np.array([np.nan]))
