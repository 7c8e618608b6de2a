"""The training objective: negative evidence bound minus weighted auxiliary terms.

With M = recon_x (+ recon_t + recon_y) - kl_zt - kl_zc, the minimised loss is

    total = -M - alpha * aux_t - beta * aux_y

where aux_t and aux_y are log-likelihoods of the observed T and Y under the
auxiliary predictors. Every component is averaged over the batch.
"""

import math
from dataclasses import asdict, dataclass, fields
from typing import List, Sequence, Tuple, Union

import numpy as np

from ..data.dataset import Dataset
from ..exceptions import NonFiniteLossError, SchemaError, ShapeError
from ..nn import GaussParams, Tensor, bern_logpmf, concat, gauss_logpdf, gauss_reparam
from ..nn import kl_diag_gauss, kl_standard_normal
from .config import CivVaeConfig
from .network import CivVaeModel


@dataclass
class LossBreakdown:
    """Batch means of the objective's components."""

    recon_x: float
    kl_zt: float
    kl_zc: float
    aux_t: float
    aux_y: float
    total: float
    recon_t: float = 0.0
    recon_y: float = 0.0

    def is_finite(self) -> bool:
        return all(math.isfinite(value) for value in asdict(self).values())

    def recombine(self, alpha: float, beta: float) -> float:
        """total recomputed from the other components."""
        evidence = self.recon_x + self.recon_t + self.recon_y - self.kl_zt - self.kl_zc
        return -evidence - alpha * self.aux_t - beta * self.aux_y

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def mean_of(cls, breakdowns: Sequence["LossBreakdown"], weights=None) -> "LossBreakdown":
        """(Weighted) mean of each component."""
        if not breakdowns:
            raise ValueError("cannot average an empty list of loss breakdowns")
        w = np.ones(len(breakdowns)) if weights is None else np.asarray(weights, dtype=np.float64)
        w = w / w.sum()
        values = {
            f.name: float(sum(wi * getattr(b, f.name) for wi, b in zip(w, breakdowns)))
            for f in fields(cls)
        }
        return cls(**values)


@dataclass
class NoiseDraw:
    """Standard-normal draws for one reparameterised sample of Z_T and Z_C."""

    eps_zt: np.ndarray
    eps_zc: np.ndarray

    @classmethod
    def sample(cls, rng: np.random.Generator, n: int, config: CivVaeConfig) -> "NoiseDraw":
        return cls(
            eps_zt=rng.standard_normal((n, config.dim_zt)),
            eps_zc=rng.standard_normal((n, config.dim_zc)),
        )

    @classmethod
    def zeros(cls, n: int, config: CivVaeConfig) -> "NoiseDraw":
        return cls(eps_zt=np.zeros((n, config.dim_zt)), eps_zc=np.zeros((n, config.dim_zc)))


def _check_batch(model: CivVaeModel, batch: Dataset, config: CivVaeConfig) -> None:
    if batch.n == 0:
        raise SchemaError("cannot evaluate the objective on an empty batch")
    if batch.d != model.x_dim:
        raise SchemaError(f"batch has {batch.d} covariates, the model expects {model.x_dim}")
    if batch.outcome_kind != config.outcome_kind:
        raise SchemaError(
            f"batch outcome is {batch.outcome_kind} but the model is configured "
            f"for a {config.outcome_kind} outcome"
        )
    if config.generative_ty and model.dec_y is None:
        raise ShapeError("generative_ty needs the dec_t and dec_y networks, which the model lacks")


def _mean(per_row: Tensor) -> Tensor:
    return per_row.reshape(-1).mean()


def compute_objective(
    model: CivVaeModel,
    batch: Dataset,
    noise: Union[NoiseDraw, Sequence[NoiseDraw]],
    config: CivVaeConfig,
) -> Tuple[Tensor, LossBreakdown]:
    """
    Loss tensor (for backprop) and its breakdown.

    Args:
        model: The model
        batch: Standardized mini-batch
        noise: One draw per Monte-Carlo sample
        config: Supplies alpha, beta and the generative_ty switch

    Returns:
        (scalar loss tensor, LossBreakdown)

    Raises:
        SchemaError: Empty batch or mismatched covariates/outcome kind
        ShapeError: generative_ty is set but the model has no generative heads
        NonFiniteLossError: The loss is NaN or infinite
    """
    _check_batch(model, batch, config)
    draws: List[NoiseDraw] = [noise] if isinstance(noise, NoiseDraw) else list(noise)
    if not draws:
        raise ValueError("at least one noise draw is required")

    x = Tensor(batch.x)
    t = Tensor(batch.t.reshape(-1, 1))
    y = Tensor(batch.y.reshape(-1, 1))
    zeros_x = Tensor(np.zeros(batch.x.shape))
    q_zt, q_zc, p_zc = model.encode(x)

    kl_zt = _mean(kl_standard_normal(q_zt))
    kl_zc = _mean(kl_diag_gauss(q_zc, p_zc))

    recon_x = recon_t = recon_y = aux_t = aux_y = None
    scale = 1.0 / len(draws)
    for draw in draws:
        zt = gauss_reparam(q_zt, draw.eps_zt)
        zc = gauss_reparam(q_zc, draw.eps_zc)
        z = concat([zt, zc])

        out_x = model.networks["dec_x"](z)
        per_column = (
            gauss_logpdf(x, GaussParams(mu=out_x, log_var=zeros_x)) * model.continuous_mask
            + bern_logpmf(x, out_x.sigmoid()) * model.binary_mask
        )
        terms = {
            "recon_x": _mean(per_column.sum(axis=1)),
            "aux_t": _mean(bern_logpmf(t, model.aux_t(z))),
            "aux_y": _mean(model.aux_y.log_likelihood(t, zc, y)),
        }
        if config.generative_ty:
            terms["recon_t"] = _mean(bern_logpmf(t, model.networks["dec_t"](z)))
            terms["recon_y"] = _mean(model.dec_y.log_likelihood(t, zc, y))

        recon_x = _accumulate(recon_x, terms["recon_x"], scale)
        aux_t = _accumulate(aux_t, terms["aux_t"], scale)
        aux_y = _accumulate(aux_y, terms["aux_y"], scale)
        if config.generative_ty:
            recon_t = _accumulate(recon_t, terms["recon_t"], scale)
            recon_y = _accumulate(recon_y, terms["recon_y"], scale)

    evidence = recon_x - kl_zt - kl_zc
    if config.generative_ty:
        evidence = evidence + recon_t + recon_y
    loss = -evidence
    # Zero weights leave the auxiliary networks out of the graph entirely
    if config.alpha > 0:
        loss = loss - config.alpha * aux_t
    if config.beta > 0:
        loss = loss - config.beta * aux_y

    breakdown = LossBreakdown(
        recon_x=recon_x.item(),
        kl_zt=kl_zt.item(),
        kl_zc=kl_zc.item(),
        aux_t=aux_t.item(),
        aux_y=aux_y.item(),
        total=loss.item(),
        recon_t=recon_t.item() if recon_t is not None else 0.0,
        recon_y=recon_y.item() if recon_y is not None else 0.0,
    )
    if not breakdown.is_finite():
        raise NonFiniteLossError(breakdown.to_dict())
    return loss, breakdown


def _accumulate(total, term: Tensor, scale: float) -> Tensor:
    term = term * scale
    return term if total is None else total + term


def objective(
    model: CivVaeModel,
    batch: Dataset,
    noise: Union[NoiseDraw, Sequence[NoiseDraw]],
    config: CivVaeConfig,
) -> LossBreakdown:
    """Evaluate the objective's components on a batch."""
    return compute_objective(model, batch, noise, config)[1]
