"""Tests for the CIV.VAE networks, objective and representations"""

import math

import numpy as np
import pytest

from civforge.data import Dataset
from civforge.exceptions import NonFiniteLossError, SchemaError, ShapeError
from civforge.model import (
    VARIANCE_FLOOR,
    CivVaeConfig,
    CivVaeModel,
    LossBreakdown,
    NoiseDraw,
    compute_objective,
    extract_representations,
    init_model,
    network_layout,
    objective,
    stream_rng,
)
from civforge.nn import backprop, parameter_vector


def _zero_parameters(model):
    for _, tensor in model.parameters():
        tensor.data[...] = 0.0


def test_network_layout_names(tiny_config):
    """Test separate and shared auxiliary predictors"""
    names = [name for name, *_ in network_layout(tiny_config, 4)]
    assert names[:5] == ["encoder_zt", "encoder_zc", "prior_zc", "dec_x", "aux_t"]
    assert "aux_y_mu1" in names and "aux_y_var0" in names

    shared = tiny_config.model_copy(update={"share_predictors": True})
    shared_names = [name for name, *_ in network_layout(shared, 4)]
    assert not [name for name in shared_names if name.startswith("aux_")]
    assert "dec_t" in shared_names and "dec_y_mu0" in shared_names


def test_generative_heads_only_when_trained(tiny_config, toy_dataset):
    """Test dec_t and dec_y are built only when the evidence term uses them"""
    plain = init_model(tiny_config, toy_dataset.x_kinds)
    assert not [name for name in plain.networks if name.startswith(("dec_t", "dec_y"))]
    assert plain.dec_y is None

    generative = tiny_config.model_copy(update={"generative_ty": True})
    model = init_model(generative, toy_dataset.x_kinds)
    heads = sorted(name for name in model.networks if name.startswith(("dec_t", "dec_y")))
    assert heads == ["dec_t", "dec_y_mu0", "dec_y_mu1", "dec_y_var0", "dec_y_var1"]
    assert model.auxiliary_network_names() == [
        "aux_t",
        "aux_y_mu0",
        "aux_y_mu1",
        "aux_y_var0",
        "aux_y_var1",
    ]

    with pytest.raises(ShapeError, match="dec_t"):
        objective(plain, toy_dataset, NoiseDraw.zeros(toy_dataset.n, generative), generative)
    with pytest.raises(ShapeError, match="do not match"):
        CivVaeModel(generative, plain.networks)


def test_binary_outcome_layout(tiny_config):
    """Test a binary outcome uses one sigmoid network of [T, Z_C]"""
    config = tiny_config.model_copy(update={"outcome_kind": "binary"})
    layout = {entry[0]: entry[1:] for entry in network_layout(config, 4)}
    assert layout["aux_y_prob"] == (1 + config.dim_zc, 1, "sigmoid")
    assert "aux_y_mu1" not in layout


def test_init_model_is_seeded(tiny_config, toy_dataset):
    """Test initial parameters depend only on the seed"""
    a = init_model(tiny_config, toy_dataset.x_kinds)
    b = init_model(tiny_config, toy_dataset.x_kinds)
    c = init_model(tiny_config.model_copy(update={"seed": 4}), toy_dataset.x_kinds)

    nets = lambda model: [model.networks[name] for name in sorted(model.networks)]  # noqa: E731
    assert parameter_vector(nets(a)).tobytes() == parameter_vector(nets(b)).tobytes()
    assert parameter_vector(nets(a)).tobytes() != parameter_vector(nets(c)).tobytes()
    assert a.x_dim == 3
    np.testing.assert_array_equal(a.binary_mask, [0.0, 0.0, 1.0])


def test_init_model_validation(tiny_config):
    """Test kind counts must match the covariate count"""
    with pytest.raises(ShapeError):
        init_model(tiny_config, 3, x_kinds=["continuous"])
    with pytest.raises(ValueError, match="one-hot"):
        CivVaeConfig(x_kinds=["categorical"])


def test_stream_rng_is_keyed():
    """Test model streams differ by key"""
    assert stream_rng(1, 0).random() != stream_rng(1, 1).random()
    assert stream_rng(1, 2).random() == stream_rng(1, 2).random()


def test_objective_at_zero_parameters(tiny_config, toy_dataset):
    """Test the objective against a closed form when every weight is zero"""
    config = tiny_config.model_copy(update={"alpha": 0.7, "beta": 1.3})
    model = init_model(config, toy_dataset.x_kinds)
    _zero_parameters(model)

    breakdown = objective(model, toy_dataset, NoiseDraw.zeros(toy_dataset.n, config), config)

    x = toy_dataset.x
    log_2pi = math.log(2 * math.pi)
    recon_x = np.mean(-0.5 * (x[:, 0] ** 2 + x[:, 1] ** 2 + 2 * log_2pi) + math.log(0.5))
    variance = math.log(2.0) + VARIANCE_FLOOR
    aux_y = np.mean(-0.5 * (toy_dataset.y**2 / variance + math.log(variance) + log_2pi))
    assert breakdown.kl_zt == pytest.approx(0.0, abs=1e-12)
    assert breakdown.kl_zc == pytest.approx(0.0, abs=1e-12)
    assert breakdown.recon_x == pytest.approx(recon_x, rel=1e-10)
    assert breakdown.aux_t == pytest.approx(math.log(0.5), rel=1e-10)
    assert breakdown.aux_y == pytest.approx(aux_y, rel=1e-10)
    expected = -recon_x - 0.7 * math.log(0.5) - 1.3 * aux_y
    assert breakdown.total == pytest.approx(expected, rel=1e-10)


def test_breakdown_recombines(tiny_config, toy_dataset):
    """Test total equals its recombined components"""
    for generative_ty in (False, True):
        update = {"alpha": 0.5, "beta": 2.0, "generative_ty": generative_ty}
        config = tiny_config.model_copy(update=update)
        model = init_model(config, toy_dataset.x_kinds)
        noise = NoiseDraw.sample(np.random.default_rng(1), toy_dataset.n, config)
        breakdown = objective(model, toy_dataset, noise, config)
        assert breakdown.total == pytest.approx(breakdown.recombine(0.5, 2.0), rel=1e-10)
        if generative_ty:
            assert breakdown.recon_t < 0 and breakdown.recon_y != 0
        else:
            assert breakdown.recon_t == 0.0 and breakdown.recon_y == 0.0


def test_zero_weights_leave_auxiliary_gradients_zero(tiny_config, toy_dataset):
    """Test alpha = beta = 0 gives no gradient to the auxiliary networks"""
    config = tiny_config.model_copy(update={"alpha": 0.0, "beta": 0.0})
    model = init_model(config, toy_dataset.x_kinds)
    aux = model.parameters_of(*model.auxiliary_network_names())
    noise = NoiseDraw.sample(np.random.default_rng(2), toy_dataset.n, config)

    loss, _ = compute_objective(model, toy_dataset, noise, config)
    grads = backprop(loss, [tensor for _, tensor in aux])
    assert aux
    assert all(not grad.any() for grad in grads)

    weighted = config.model_copy(update={"alpha": 1.0})
    loss, _ = compute_objective(model, toy_dataset, noise, weighted)
    grads = backprop(loss, [tensor for name, tensor in aux if name.startswith("aux_t.")])
    assert any(grad.any() for grad in grads)


def test_shared_predictors_reuse_generative_heads(tiny_config, toy_dataset):
    """Test share_predictors points the auxiliary terms at the decoders"""
    config = tiny_config.model_copy(update={"share_predictors": True})
    model = init_model(config, toy_dataset.x_kinds)
    assert model.aux_t is model.networks["dec_t"]
    assert model.aux_y is model.dec_y
    assert model.auxiliary_network_names() == []


def test_monte_carlo_draws_average(tiny_config, toy_dataset):
    """Test several identical draws give the single-draw value"""
    model = init_model(tiny_config, toy_dataset.x_kinds)
    noise = NoiseDraw.sample(np.random.default_rng(5), toy_dataset.n, tiny_config)
    single = objective(model, toy_dataset, noise, tiny_config)
    repeated = objective(model, toy_dataset, [noise, noise, noise], tiny_config)
    assert repeated.total == pytest.approx(single.total, rel=1e-12)


def test_binary_outcome_objective(tiny_config, toy_dataset):
    """Test a Bernoulli outcome likelihood"""
    binary = Dataset(
        x=toy_dataset.x,
        columns=toy_dataset.columns,
        t=toy_dataset.t,
        y=(toy_dataset.y > 0) * 1.0,
        x_kinds=toy_dataset.x_kinds,
        outcome_kind="binary",
    )
    config = tiny_config.model_copy(update={"outcome_kind": "binary"})
    model = init_model(config, binary.x_kinds)
    _zero_parameters(model)
    breakdown = objective(model, binary, NoiseDraw.zeros(binary.n, config), config)
    assert breakdown.aux_y == pytest.approx(math.log(0.5))


def test_objective_rejects_mismatched_batches(tiny_config, toy_dataset, small_sim):
    """Test covariate count and outcome kind checks"""
    model = init_model(tiny_config, toy_dataset.x_kinds)
    with pytest.raises(SchemaError, match="covariates"):
        objective(model, small_sim, NoiseDraw.zeros(small_sim.n, tiny_config), tiny_config)
    binary = tiny_config.model_copy(update={"outcome_kind": "binary"})
    with pytest.raises(SchemaError, match="outcome"):
        objective(model, toy_dataset, NoiseDraw.zeros(toy_dataset.n, binary), binary)


def test_objective_reports_nonfinite_loss(tiny_config, toy_dataset):
    """Test an overflowing reconstruction raises with the breakdown attached"""
    model = init_model(tiny_config, toy_dataset.x_kinds)
    model.networks["dec_x"].layers[-1].bias.data[:] = 1e200
    with np.errstate(all="ignore"), pytest.raises(NonFiniteLossError) as info:
        objective(model, toy_dataset, NoiseDraw.zeros(toy_dataset.n, tiny_config), tiny_config)
    assert "recon_x" in info.value.breakdown


def test_loss_breakdown_mean_of():
    """Test size-weighted averaging"""
    a = LossBreakdown(recon_x=1.0, kl_zt=0.0, kl_zc=0.0, aux_t=0.0, aux_y=0.0, total=1.0)
    b = LossBreakdown(recon_x=4.0, kl_zt=0.0, kl_zc=0.0, aux_t=0.0, aux_y=0.0, total=4.0)
    assert LossBreakdown.mean_of([a, b], weights=[2, 1]).total == pytest.approx(2.0)
    with pytest.raises(ValueError):
        LossBreakdown.mean_of([])


def test_extract_representations(tiny_config, toy_dataset):
    """Test shapes, mean determinism and sampled extraction"""
    model = init_model(tiny_config, toy_dataset.x_kinds)
    z_t, z_c = extract_representations(model, toy_dataset.x)
    again_t, _ = extract_representations(model, toy_dataset.x)

    assert z_t.shape == (120, 1) and z_c.shape == (120, 2)
    np.testing.assert_array_equal(z_t, again_t)
    sampled_t, _ = extract_representations(model, toy_dataset.x, sample=True)
    assert not np.array_equal(sampled_t, z_t)
    with pytest.raises(ShapeError):
        extract_representations(model, toy_dataset.x[:, :2])


def test_extraction_uses_conditional_prior(tiny_config, toy_dataset):
    """Test Z_C comes from p(Z_C|X), not the inference network"""
    model = init_model(tiny_config, toy_dataset.x_kinds)
    for _, tensor in model.parameters_of("prior_zc"):
        tensor.data[...] = 0.0
    _, z_c = extract_representations(model, toy_dataset.x)
    np.testing.assert_array_equal(z_c, np.zeros((120, 2)))


LOG_2PI = math.log(2 * math.pi)

SCALAR_ACTIVATIONS = {
    "elu": lambda a: a if a > 0 else math.expm1(a),
    "softplus": lambda a: max(a, 0.0) + math.log1p(math.exp(-abs(a))),
    "sigmoid": lambda a: 1.0 / (1.0 + math.exp(-a)),
    "identity": lambda a: a,
}


def _scalar_forward(net, inputs):
    values = [float(v) for v in inputs]
    for layer in net.layers:
        weight, bias = layer.weight.data, layer.bias.data
        outputs = []
        for j in range(weight.shape[1]):
            total = float(bias[j])
            for i, value in enumerate(values):
                total += value * float(weight[i, j])
            outputs.append(SCALAR_ACTIVATIONS[layer.activation](total))
        values = outputs
    return values


def _scalar_bernoulli(x, prob):
    prob = min(max(prob, 1e-6), 1.0 - 1e-6)
    return x * math.log(prob) + (1.0 - x) * math.log(1.0 - prob)


def _scalar_outcome(model, prefix, t, zc, y):
    nets = model.networks
    if model.config.outcome_kind == "binary":
        return _scalar_bernoulli(y, _scalar_forward(nets[f"{prefix}_prob"], [t] + zc)[0])
    mean = t * _scalar_forward(nets[f"{prefix}_mu1"], zc)[0]
    mean += (1.0 - t) * _scalar_forward(nets[f"{prefix}_mu0"], zc)[0]
    variance = t * _scalar_forward(nets[f"{prefix}_var1"], zc)[0]
    variance += (1.0 - t) * _scalar_forward(nets[f"{prefix}_var0"], zc)[0] + VARIANCE_FLOOR
    return -0.5 * ((y - mean) ** 2 / variance + math.log(variance) + LOG_2PI)


def _scalar_objective(model, batch, draws):
    """Row-by-row evaluation of every term of the objective."""
    config = model.config
    nets = model.networks
    dzt, dzc = config.dim_zt, config.dim_zc
    aux = "dec" if config.share_predictors else "aux"
    names = ["recon_x", "kl_zt", "kl_zc", "aux_t", "aux_y", "recon_t", "recon_y"]
    terms = {name: 0.0 for name in names}
    n = batch.n
    for i in range(n):
        x, t, y = batch.x[i], float(batch.t[i]), float(batch.y[i])
        head_t = _scalar_forward(nets["encoder_zt"], x)
        head_c = _scalar_forward(nets["encoder_zc"], x)
        prior = _scalar_forward(nets["prior_zc"], x)
        mu_t, lv_t = head_t[:dzt], head_t[dzt:]
        mu_c, lv_c = head_c[:dzc], head_c[dzc:]
        mu_p, lv_p = prior[:dzc], prior[dzc:]

        for m, lv in zip(mu_t, lv_t):
            terms["kl_zt"] += 0.5 * (math.exp(lv) + m * m - lv - 1.0) / n
        for mq, lq, mp, lp in zip(mu_c, lv_c, mu_p, lv_p):
            ratio = (math.exp(lq) + (mq - mp) ** 2) / math.exp(lp)
            terms["kl_zc"] += 0.5 * (lp - lq + ratio - 1.0) / n

        weight = 1.0 / (n * len(draws))
        for draw in draws:
            zt = [m + math.exp(0.5 * lv) * e for m, lv, e in zip(mu_t, lv_t, draw.eps_zt[i])]
            zc = [m + math.exp(0.5 * lv) * e for m, lv, e in zip(mu_c, lv_c, draw.eps_zc[i])]
            out = _scalar_forward(nets["dec_x"], zt + zc)
            recon = 0.0
            for value, mean, kind in zip(x, out, config.x_kinds):
                if kind == "continuous":
                    recon += -0.5 * ((value - mean) ** 2 + LOG_2PI)
                else:
                    recon += _scalar_bernoulli(value, SCALAR_ACTIVATIONS["sigmoid"](mean))
            terms["recon_x"] += weight * recon
            terms["aux_t"] += weight * _scalar_bernoulli(
                t, _scalar_forward(nets[f"{aux}_t"], zt + zc)[0]
            )
            terms["aux_y"] += weight * _scalar_outcome(model, f"{aux}_y", t, zc, y)
            if config.generative_ty:
                terms["recon_t"] += weight * _scalar_bernoulli(
                    t, _scalar_forward(nets["dec_t"], zt + zc)[0]
                )
                terms["recon_y"] += weight * _scalar_outcome(model, "dec_y", t, zc, y)

    evidence = terms["recon_x"] + terms["recon_t"] + terms["recon_y"]
    evidence -= terms["kl_zt"] + terms["kl_zc"]
    terms["total"] = -evidence - config.alpha * terms["aux_t"] - config.beta * terms["aux_y"]
    return terms


@pytest.mark.parametrize("seed", range(10))
def test_objective_matches_scalar_evaluation(seed, tiny_config, toy_dataset):
    """Test every objective term on random frozen models against a row-by-row evaluation"""
    rng = np.random.default_rng(100 + seed)
    batch = toy_dataset.subset(np.arange(25))
    if seed in (4, 9):
        batch = Dataset(
            x=batch.x,
            columns=batch.columns,
            t=batch.t,
            y=(batch.y > 0) * 1.0,
            x_kinds=batch.x_kinds,
            outcome_kind="binary",
        )
    update = {
        "alpha": float(rng.uniform(0.1, 2.0)),
        "beta": float(rng.uniform(0.1, 2.0)),
        "generative_ty": seed % 2 == 1,
        "share_predictors": seed % 3 == 2,
        "outcome_kind": batch.outcome_kind,
        "seed": seed,
    }
    model = init_model(tiny_config.model_copy(update=update), batch.x_kinds)
    for _, tensor in model.parameters():
        tensor.data[...] = rng.normal(scale=0.4, size=tensor.data.shape)
    config = model.config
    draws = [NoiseDraw.sample(rng, batch.n, config) for _ in range(1 + seed % 2)]

    breakdown = objective(model, batch, draws, config)
    expected = _scalar_objective(model, batch, draws)

    for name, value in expected.items():
        assert getattr(breakdown, name) == pytest.approx(value, rel=1e-10, abs=1e-10), name
