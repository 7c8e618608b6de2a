"""Tests for the synthetic data generator"""

import math

import numpy as np
import pytest

from civforge.estimation import ols_fit
from civforge.exceptions import SimulationError
from civforge.simulation import COVARIATES, LATENTS, ScmSpec, generate, true_ace, variable_rng


def test_default_true_ace():
    """Test the outcome coefficient of T"""
    spec = ScmSpec()
    assert true_ace(spec) == 2.0
    assert true_ace(spec.with_coefficient("Y", "T", 0.0)) == 0.0
    assert true_ace(spec.with_coefficient("Y", "T", -1.5)) == -1.5


def test_generate_layout(small_sim):
    """Test columns, treatment coding and provenance"""
    assert small_sim.columns == COVARIATES
    assert small_sim.x.shape == (2000, 6)
    assert set(np.unique(small_sim.t)) == {0.0, 1.0}
    assert small_sim.true_ace == 2.0
    assert small_sim.latents is None
    assert "seed=7" in small_sim.provenance


def test_generate_is_deterministic():
    """Test identical inputs give identical bytes"""
    first = generate(ScmSpec(), 2, seed=0)
    second = generate(ScmSpec(), 2, seed=0)

    assert first.x.tobytes() == second.x.tobytes()
    assert first.t.tobytes() == second.t.tobytes()
    assert first.y.tobytes() == second.y.tobytes()


def test_different_seeds_differ():
    """Test distinct seeds give distinct draws"""
    assert not np.array_equal(generate(ScmSpec(), 50, 1).x, generate(ScmSpec(), 50, 2).x)


def test_editing_outcome_leaves_covariates(small_sim):
    """Test per-variable streams: changing Y's equation does not move X or T"""
    edited = generate(ScmSpec().with_coefficient("Y", "T", 0.0), 2000, seed=7)

    np.testing.assert_array_equal(edited.x, small_sim.x)
    np.testing.assert_array_equal(edited.t, small_sim.t)
    np.testing.assert_allclose(small_sim.y - edited.y, 2.0 * small_sim.t)


def test_variable_streams_are_distinct():
    """Test two variables of one seed draw different values"""
    assert variable_rng(0, "U").random() != variable_rng(0, "U1").random()


def test_observed_moments():
    """Test X4 and X5 means"""
    data = generate(ScmSpec(), 10000, seed=1)
    assert abs(data.column("X4").mean() - 1.0) < 0.05
    assert abs(data.column("X5").mean() - 3.0) < 0.05


def test_x1_variance_with_sd_convention():
    """Test Var(X1) = 1 + 0.25 + 0.25 when noise parameters are standard deviations"""
    data = generate(ScmSpec(), 100000, seed=7)
    assert abs(data.column("X1").var() - 1.5) < 0.05
    assert abs(data.column("S").mean()) < 5 * math.sqrt(12.0 / 100000)


@pytest.mark.parametrize(
    "name,variance",
    [("U", 1.0), ("X1", 1.5), ("X2", 1.5), ("X3", 1.5), ("X4", 1.0), ("X5", 1.0), ("S", 12.0)],
)
def test_variances_within_five_standard_errors(name, variance):
    """Test each Gaussian variable's sample variance against its structural variance"""
    n = 100000
    data = generate(ScmSpec(), n, seed=19, keep_latents=True)
    values = data.latents[name] if name in LATENTS else data.column(name)
    standard_error = variance * math.sqrt(2.0 / (n - 1))
    assert abs(values.var(ddof=1) - variance) < 5 * standard_error


def test_x1_variance_with_variance_convention():
    """Test Var(X1) = 1 + 0.25 + 0.5 when noise parameters are variances"""
    spec = ScmSpec(second_param_is_sd=False)
    data = generate(spec, 100000, seed=7)
    assert abs(data.column("X1").var() - 1.75) < 0.05


def test_treatment_probability_matches_logit():
    """Test P(T=1) against the logit recomputed from the latents"""
    data = generate(ScmSpec(), 100000, seed=3, keep_latents=True)
    x3 = data.column("X3")
    logit = -2.0 + data.latents["U"] + data.latents["U1"] + x3
    expected = float(np.mean(1.0 / (1.0 + np.exp(-logit))))
    assert abs(data.t.mean() - expected) < 0.01


def test_oracle_regression_recovers_effect():
    """Test Y on (T, U, U3, U4, X4, X5) with latent access"""
    data = generate(ScmSpec(), 1000000, seed=11, keep_latents=True)
    design = np.column_stack(
        [data.t, data.latents["U"], data.latents["U3"], data.latents["U4"],
         data.column("X4"), data.column("X5")]
    )
    fit = ols_fit(design, data.y)
    assert abs(fit.coef[1] - 2.0) < 0.02


def test_naive_regression_is_confounded():
    """Test Y on T alone is biased by more than 0.5"""
    data = generate(ScmSpec(), 100000, seed=11)
    fit = ols_fit(data.t, data.y)
    assert abs(fit.coef[1] - 2.0) > 0.5


def test_keep_latents():
    """Test latent columns are attached on request"""
    data = generate(ScmSpec(), 10, seed=0, keep_latents=True)
    assert sorted(data.latents) == sorted(LATENTS)
    assert all(values.shape == (10,) for values in data.latents.values())


def test_generate_rejects_small_n():
    """Test n < 2"""
    with pytest.raises(SimulationError):
        generate(ScmSpec(), 1, seed=0)


def test_spec_validation():
    """Test malformed coefficient edits"""
    with pytest.raises(SimulationError, match="generation order"):
        ScmSpec().with_coefficient("X1", "S", 1.0)
    with pytest.raises(SimulationError, match="non-finite"):
        ScmSpec().with_coefficient("Y", "T", float("nan"))
    with pytest.raises(SimulationError, match="unknown variable"):
        ScmSpec().with_coefficient("Y", "Z9", 1.0)
    with pytest.raises(SimulationError):
        generate(ScmSpec(outcome_noise=-1.0), 10, seed=0)


def test_treatment_weight_edit():
    """Test editing the treatment logit"""
    spec = ScmSpec().with_coefficient("T", "X3", 0.0)
    assert spec.treatment_weights["X3"] == 0.0
    assert ScmSpec().treatment_weights["X3"] == 1.0
