"""CIV.VAE inference and generative networks."""

import logging
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..exceptions import ShapeError
from ..nn import GaussParams, Mlp, Tensor, bern_logpmf, concat, gauss_logpdf
from .config import CivVaeConfig

logger = logging.getLogger(__name__)

# Added to softplus variance heads so the outcome log-density stays finite
VARIANCE_FLOOR = 1e-6

# Random stream keys derived from config.seed, under the model namespace
MODEL_STREAMS = 1
INIT_STREAM = 0
SHUFFLE_STREAM = 1
NOISE_STREAM = 2

# Outcome head networks by outcome kind
OUTCOME_NETWORKS = {"continuous": ["mu1", "mu0", "var1", "var0"], "binary": ["prob"]}


def stream_rng(seed: int, key: int) -> np.random.Generator:
    """PCG64 generator for one named use of a seed."""
    sequence = np.random.SeedSequence(seed, spawn_key=(MODEL_STREAMS, key))
    return np.random.Generator(np.random.PCG64(sequence))


class OutcomeHead:
    """
    Outcome likelihood p(Y | T, Z_C).

    Continuous outcomes use four separate networks of Z_C: arm means
    (``mu1`` for T=1, ``mu0`` for T=0) and softplus arm variances. A binary
    outcome uses a single sigmoid network of [T, Z_C].
    """

    def __init__(self, kind: str, nets: Dict[str, Mlp]):
        expected = set(OUTCOME_NETWORKS[kind])
        if set(nets) != expected:
            raise ShapeError(f"{kind} outcome head needs networks {sorted(expected)}")
        self.kind = kind
        self.nets = nets

    def log_likelihood(self, t: Tensor, zc: Tensor, y: Tensor) -> Tensor:
        """Per-row log-likelihood (n x 1)."""
        if self.kind == "binary":
            return bern_logpmf(y, self.nets["prob"](concat([t, zc])))
        mean = t * self.nets["mu1"](zc) + (1.0 - t) * self.nets["mu0"](zc)
        variance = t * self.nets["var1"](zc) + (1.0 - t) * self.nets["var0"](zc) + VARIANCE_FLOOR
        return gauss_logpdf(y, GaussParams(mu=mean, log_var=variance.log()))


class CivVaeModel:
    """All sub-networks of the model, addressed by name."""

    def __init__(self, config: CivVaeConfig, networks: Dict[str, Mlp]):
        self.config = config
        self.networks = networks
        self.x_dim = networks["encoder_zt"].in_dim
        kinds = config.x_kinds or ["continuous"] * self.x_dim
        if len(kinds) != self.x_dim:
            raise ShapeError(f"{len(kinds)} column kinds for {self.x_dim} covariates")
        self.continuous_mask = np.array([kind == "continuous" for kind in kinds], dtype=np.float64)
        self.binary_mask = 1.0 - self.continuous_mask
        # Covariate names seen in training; filled by the trainer and checkpoints
        self.columns: List[str] = []
        self._check_dimensions()

        expected = {name for name, *_ in network_layout(config, self.x_dim)}
        if set(networks) != expected:
            raise ShapeError(
                f"networks {sorted(networks)} do not match the configuration, "
                f"which needs {sorted(expected)}"
            )

        # Generative T and Y heads exist only when something trains them
        self.dec_y: Optional[OutcomeHead] = None
        if "dec_t" in networks:
            self.dec_y = self._outcome_head("dec_y")
        if config.share_predictors:
            self.aux_t = networks["dec_t"]
            self.aux_y = self.dec_y
        else:
            self.aux_t = networks["aux_t"]
            self.aux_y = self._outcome_head("aux_y")

    def _outcome_head(self, prefix: str) -> OutcomeHead:
        names = OUTCOME_NETWORKS[self.config.outcome_kind]
        return OutcomeHead(
            self.config.outcome_kind, {name: self.networks[f"{prefix}_{name}"] for name in names}
        )

    def _check_dimensions(self) -> None:
        c = self.config
        z_dim = c.dim_zt + c.dim_zc
        expected = {
            "encoder_zt": (self.x_dim, 2 * c.dim_zt),
            "encoder_zc": (self.x_dim, 2 * c.dim_zc),
            "prior_zc": (self.x_dim, 2 * c.dim_zc),
            "dec_x": (z_dim, self.x_dim),
            "dec_t": (z_dim, 1),
            "aux_t": (z_dim, 1),
        }
        for name, net in self.networks.items():
            if name in expected and (net.in_dim, net.out_dim) != expected[name]:
                raise ShapeError(
                    f"network {name} maps {net.in_dim}->{net.out_dim}, "
                    f"expected {expected[name][0]}->{expected[name][1]}"
                )

    def __getattr__(self, name: str) -> Mlp:
        networks = self.__dict__.get("networks", {})
        if name in networks:
            return networks[name]
        raise AttributeError(name)

    def parameters(self) -> List[Tuple[str, Tensor]]:
        """Named parameters of every network, sorted by network name."""
        named = []
        for name in sorted(self.networks):
            named.extend(self.networks[name].parameters(prefix=f"{name}."))
        return named

    def parameters_of(self, *names: str) -> List[Tuple[str, Tensor]]:
        return [
            pair
            for name in names
            for pair in self.networks[name].parameters(prefix=f"{name}.")
        ]

    def auxiliary_network_names(self) -> List[str]:
        """Names of networks used only by the auxiliary predictors."""
        return sorted(name for name in self.networks if name.startswith("aux_"))

    def encode(self, x: Union[Tensor, np.ndarray]) -> Tuple[GaussParams, GaussParams, GaussParams]:
        """q(Z_T|X), q(Z_C|X) and the conditional prior p(Z_C|X)."""
        c = self.config
        q_zt = GaussParams.from_head(self.networks["encoder_zt"](x), c.dim_zt)
        q_zc = GaussParams.from_head(self.networks["encoder_zc"](x), c.dim_zc)
        p_zc = GaussParams.from_head(self.networks["prior_zc"](x), c.dim_zc)
        return q_zt, q_zc, p_zc


def _sizes(fan_in: int, fan_out: int, config: CivVaeConfig) -> List[int]:
    return [fan_in] + [config.hidden_dim] * config.hidden_layers + [fan_out]


def network_layout(config: CivVaeConfig, x_dim: int) -> List[Tuple[str, int, int, str]]:
    """(name, input width, output width, output activation) in initialisation order."""
    z_dim = config.dim_zt + config.dim_zc
    layout = [
        ("encoder_zt", x_dim, 2 * config.dim_zt, "identity"),
        ("encoder_zc", x_dim, 2 * config.dim_zc, "identity"),
        ("prior_zc", x_dim, 2 * config.dim_zc, "identity"),
        ("dec_x", z_dim, x_dim, "identity"),
    ]
    # Shared auxiliary predictors are the generative heads
    prefixes = []
    if config.generative_ty or config.share_predictors:
        prefixes.append("dec")
    if not config.share_predictors:
        prefixes.append("aux")
    for prefix in prefixes:
        layout.append((f"{prefix}_t", z_dim, 1, "sigmoid"))
        if config.outcome_kind == "continuous":
            layout += [
                (f"{prefix}_y_mu1", config.dim_zc, 1, "identity"),
                (f"{prefix}_y_mu0", config.dim_zc, 1, "identity"),
                (f"{prefix}_y_var1", config.dim_zc, 1, "softplus"),
                (f"{prefix}_y_var0", config.dim_zc, 1, "softplus"),
            ]
        else:
            layout.append((f"{prefix}_y_prob", 1 + config.dim_zc, 1, "sigmoid"))
    return layout


def init_model(
    config: CivVaeConfig,
    data_dims: Union[int, Sequence[str]],
    x_kinds: Optional[Sequence[str]] = None,
) -> CivVaeModel:
    """
    Build a freshly initialised model.

    Args:
        config: Model settings; config.seed fixes the initial parameters
        data_dims: Number of covariate columns, or their likelihood kinds
        x_kinds: Per-column kinds when data_dims is a count (defaults to
            config.x_kinds, then to all continuous)

    Returns:
        CivVaeModel

    Raises:
        ShapeError: The column kinds do not match the covariate count
    """
    if isinstance(data_dims, int):
        x_dim = data_dims
        kinds = list(x_kinds or config.x_kinds or ["continuous"] * x_dim)
    else:
        kinds = list(data_dims)
        x_dim = len(kinds)
    if x_dim < 1:
        raise ShapeError("the model needs at least one covariate")
    if len(kinds) != x_dim:
        raise ShapeError(f"{len(kinds)} column kinds given for {x_dim} covariates")
    config = config.model_copy(update={"x_kinds": kinds})

    rng = stream_rng(config.seed, INIT_STREAM)
    networks = {}
    for name, fan_in, fan_out, activation in network_layout(config, x_dim):
        networks[name] = Mlp.build(
            _sizes(fan_in, fan_out, config), rng, output_activation=activation
        )
    logger.debug("initialised %d networks for %d covariates", len(networks), x_dim)
    return CivVaeModel(config, networks)
