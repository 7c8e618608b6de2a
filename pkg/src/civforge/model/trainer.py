"""Mini-batch training loop and model checkpoints."""

import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from tqdm import tqdm

from ..data.dataset import Dataset
from ..data.transforms import TransformRecord, standardize
from ..exceptions import (
    CheckpointError,
    GradientError,
    SchemaError,
    ShapeError,
    TrainingDivergedError,
)
from ..nn import AdamOptimizer, backprop, load_checkpoint, save_checkpoint
from ..settings import get_settings
from .config import CivVaeConfig
from .network import (
    NOISE_STREAM,
    SHUFFLE_STREAM,
    CivVaeModel,
    init_model,
    network_layout,
    stream_rng,
)
from .objective import LossBreakdown, NoiseDraw, compute_objective

logger = logging.getLogger(__name__)


class CivVaeTrainer:
    """
    Trains a CivVaeModel with Adam on shuffled mini-batches.

    Shuffling and reparameterisation noise come from separate streams of
    config.seed, so a run is reproducible from (dataset, config).
    """

    def __init__(
        self,
        model: CivVaeModel,
        transform: Optional[TransformRecord] = None,
        checkpoint_dir: Optional[Union[str, Path]] = None,
    ):
        """
        Initialize the trainer

        Args:
            model: Model to train; its config supplies every hyperparameter
            transform: Standardization applied to the training data, stored in checkpoints
            checkpoint_dir: Directory for per-epoch checkpoints (None disables them)
        """
        self.model = model
        self.config = model.config
        self.transform = transform or TransformRecord()
        self.checkpoint_dir = Path(checkpoint_dir) if checkpoint_dir else None
        if self.checkpoint_dir is not None:
            self.checkpoint_dir.mkdir(parents=True, exist_ok=True)

        self.optimizer = AdamOptimizer(model.parameters(), learning_rate=self.config.learning_rate)
        self.shuffle_rng = stream_rng(self.config.seed, SHUFFLE_STREAM)
        self.noise_rng = stream_rng(self.config.seed, NOISE_STREAM)

        # One breakdown per completed epoch
        self.training_history: List[LossBreakdown] = []

    def _check_dataset(self, dataset: Dataset) -> None:
        if dataset.d != self.model.x_dim:
            raise SchemaError(
                f"dataset has {dataset.d} covariates, the model expects {self.model.x_dim}"
            )
        kinds = self.config.x_kinds
        if kinds and list(dataset.x_kinds) != list(kinds):
            raise SchemaError("dataset column kinds differ from the model configuration")
        if dataset.outcome_kind != self.config.outcome_kind:
            raise SchemaError(
                f"dataset outcome is {dataset.outcome_kind}, "
                f"the model expects {self.config.outcome_kind}"
            )

    def train_step(self, batch: Dataset, epoch: int, batch_index: int) -> LossBreakdown:
        """
        One optimizer update on a mini-batch.

        Raises:
            TrainingDivergedError: Non-finite loss or gradient
        """
        draws = [
            NoiseDraw.sample(self.noise_rng, batch.n, self.config)
            for _ in range(self.config.mc_samples)
        ]
        breakdown = None
        try:
            loss, breakdown = compute_objective(self.model, batch, draws, self.config)
            grads = backprop(loss, self.optimizer.tensors)
            self.optimizer.step(grads)
        except GradientError as exc:
            detail = getattr(exc, "breakdown", None) or (breakdown.to_dict() if breakdown else None)
            raise TrainingDivergedError(epoch, batch_index, detail) from exc
        return breakdown

    def train_epoch(self, dataset: Dataset, epoch: int) -> LossBreakdown:
        """Pass over a freshly shuffled copy of the dataset; returns the size-weighted mean."""
        order = self.shuffle_rng.permutation(dataset.n)
        breakdowns, sizes = [], []
        for batch_index, start in enumerate(range(0, dataset.n, self.config.batch_size)):
            rows = order[start : start + self.config.batch_size]
            breakdowns.append(self.train_step(dataset.subset(rows), epoch, batch_index))
            sizes.append(len(rows))
        return LossBreakdown.mean_of(breakdowns, weights=sizes)

    def train(self, dataset: Dataset, verbose: Optional[bool] = None) -> List[LossBreakdown]:
        """
        Train for config.epochs epochs.

        Args:
            dataset: Standardized training data
            verbose: Show a progress bar (defaults to the progress setting)

        Returns:
            Per-epoch mean loss breakdowns (empty when epochs is 0)
        """
        self._check_dataset(dataset)
        self.model.columns = list(dataset.columns)
        if verbose is None:
            verbose = get_settings().progress
        epochs = self.config.epochs
        logger.info("training CIV.VAE on %d rows for %d epochs", dataset.n, epochs)

        iterator = tqdm(range(1, epochs + 1), disable=not verbose, leave=False)
        for epoch in iterator:
            breakdown = self.train_epoch(dataset, epoch)
            self.training_history.append(breakdown)
            iterator.set_description(f"Epoch {epoch}/{epochs} - Loss: {breakdown.total:.4f}")
            if self.checkpoint_dir is not None:
                self.save_checkpoint(self.checkpoint_dir / f"checkpoint_epoch_{epoch}.json")

        if self.training_history:
            logger.info("final epoch loss %.6f", self.training_history[-1].total)
        return self.training_history

    def checkpoint_header(self) -> Dict[str, Any]:
        return {
            "config": self.config.model_dump(),
            "transform": self.transform.to_dict(),
            "x_dim": self.model.x_dim,
            "columns": list(self.model.columns),
            "training_history": [b.to_dict() for b in self.training_history],
        }

    def save_checkpoint(self, path: Union[str, Path]) -> Path:
        """Save networks, config, transform and history."""
        path = save_checkpoint(path, self.model.networks, self.checkpoint_header())
        logger.debug("checkpoint saved to %s", path)
        return path


def load_model(path: Union[str, Path]) -> Tuple[CivVaeModel, TransformRecord, List[LossBreakdown]]:
    """
    Load a model checkpoint.

    Returns:
        (model, transform, training history)

    Raises:
        CheckpointError: Missing header fields or networks inconsistent with the config
    """
    header, networks = load_checkpoint(path)
    if "config" not in header:
        raise CheckpointError(f"{path} has no model configuration in its header")
    config = CivVaeConfig(**header["config"])
    expected = {name for name, *_ in network_layout(config, 1)}
    if set(networks) != expected:
        raise CheckpointError(
            f"{path} networks {sorted(networks)} do not match the configuration"
        )
    try:
        model = CivVaeModel(config, networks)
    except ValueError as exc:
        raise CheckpointError(f"{path}: {exc}")
    model.columns = list(header.get("columns", []))
    history = [LossBreakdown(**entry) for entry in header.get("training_history", [])]
    return model, TransformRecord.from_dict(header.get("transform", {})), history


def train(
    model: CivVaeModel, dataset: Dataset, config: Optional[CivVaeConfig] = None
) -> Tuple[CivVaeModel, List[LossBreakdown]]:
    """
    Functional training entry point.

    Args:
        model: Initialised model (trained in place)
        dataset: Standardized training data
        config: Overrides the model's training settings when given

    Returns:
        (the trained model, per-epoch loss breakdowns)

    Raises:
        ShapeError: The override implies different networks than the model has
    """
    if config is not None:
        config = config.model_copy(update={"x_kinds": model.config.x_kinds})
        needed = {name for name, *_ in network_layout(config, model.x_dim)}
        if needed != set(model.networks):
            raise ShapeError(
                f"the configuration needs networks {sorted(needed)}, "
                f"the model has {sorted(model.networks)}"
            )
        model.config = config
    trainer = CivVaeTrainer(model)
    history = trainer.train(dataset)
    return model, history


def fit_civvae(
    dataset: Dataset,
    config: CivVaeConfig,
    checkpoint_dir: Optional[Union[str, Path]] = None,
    verbose: Optional[bool] = None,
) -> CivVaeTrainer:
    """
    Standardize raw data, initialise a model for it and train.

    Returns:
        The trainer, holding the model, transform and history
    """
    config = config.for_dataset(dataset)
    standardized, transform = standardize(dataset)
    model = init_model(config, dataset.x_kinds)
    trainer = CivVaeTrainer(model, transform=transform, checkpoint_dir=checkpoint_dir)
    trainer.train(standardized, verbose=verbose)
    return trainer
