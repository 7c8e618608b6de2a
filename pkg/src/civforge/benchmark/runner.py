"""Replication cells and their aggregation into a benchmark report."""

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
from tqdm import tqdm

from ..data.dataset import Dataset
from ..data.loader import load_csv
from ..data.schema import DatasetSchema, ReferenceEffect, load_schema
from ..estimation import EstimateResult, naive_ols_ace, wald_civ
from ..exceptions import BenchmarkConfigError, SchemaError
from ..model import estimate_ace, fit_civvae
from ..settings import get_settings
from ..simulation import generate
from .config import ExperimentConfig

logger = logging.getLogger(__name__)

# Known conditional instrument of the simulated data and its conditioning set
SIMULATION_INSTRUMENT = "S"
SIMULATION_CONDITIONS = ["X1", "X2"]


@dataclass
class CellResult:
    """One method on one (setting, replication) pair."""

    method: str
    setting: str
    replication: int
    seed: int
    estimate: float = math.nan
    epsilon_ace: Optional[float] = None
    first_stage_f: float = math.nan
    seconds: Optional[float] = None
    error: Optional[str] = None
    loss_trace: List[float] = field(default_factory=list)
    in_interval: Optional[bool] = None
    reference_lo: Optional[float] = None
    reference_hi: Optional[float] = None

    @property
    def failed(self) -> bool:
        return self.error is not None

    @property
    def key(self) -> str:
        return f"{self.method}_{self.setting}_r{self.replication}"

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class AggregateRow:
    """Mean and sample standard deviation of one method in one setting."""

    method: str
    setting: str
    mean: float
    std: float
    n_reps: int
    seconds: Optional[float] = None
    reference_lo: Optional[float] = None
    reference_hi: Optional[float] = None
    in_interval: Optional[bool] = None


def aggregate_values(values: Sequence[float]):
    """
    Mean, sample std (n-1) and count of the finite values.

    Returns:
        (mean, std, count); mean is NaN without finite values, std is NaN
        with fewer than two
    """
    finite = np.array([v for v in values if v is not None and math.isfinite(v)], dtype=np.float64)
    if finite.size == 0:
        return math.nan, math.nan, 0
    std = float(np.std(finite, ddof=1)) if finite.size > 1 else math.nan
    return float(np.mean(finite)), std, int(finite.size)


@dataclass
class BenchmarkReport:
    """
    Per-replication cells of a run.

    In synthetic mode the aggregated quantity is epsilon_ace; in real mode
    it is the estimate itself, compared against the reference interval.
    """

    mode: str
    settings: List[str]
    methods: List[str]
    cells: List[CellResult] = field(default_factory=list)
    record_timing: bool = False

    @property
    def metric(self) -> str:
        return "epsilon_ace" if self.mode == "synthetic" else "estimate"

    def cell_value(self, cell: CellResult) -> Optional[float]:
        return getattr(cell, self.metric)

    def cells_for(self, method: str, setting: str) -> List[CellResult]:
        return [c for c in self.cells if c.method == method and c.setting == setting]

    def aggregates(self) -> List[AggregateRow]:
        """One row per (method, setting) that has at least one cell, in report order."""
        rows = []
        for method in self.methods:
            for setting in self.settings:
                cells = self.cells_for(method, setting)
                if not cells:
                    continue
                mean, std, count = aggregate_values([self.cell_value(c) for c in cells])
                seconds = None
                if self.record_timing:
                    seconds = float(sum(c.seconds or 0.0 for c in cells))
                row = AggregateRow(method, setting, mean, std, count, seconds)
                reference = next((c for c in cells if c.reference_lo is not None), None)
                if reference is not None:
                    row.reference_lo = reference.reference_lo
                    row.reference_hi = reference.reference_hi
                    if count:
                        row.in_interval = reference.reference_lo <= mean <= reference.reference_hi
                rows.append(row)
        return rows

    def failures(self) -> List[CellResult]:
        return [c for c in self.cells if c.failed]


@dataclass
class CellTask:
    """A unit of work for the pool: all enabled methods on one dataset draw."""

    config: ExperimentConfig
    setting: str
    replication: int
    sample_size: Optional[int] = None
    schema_path: Optional[Path] = None

    @property
    def seed(self) -> int:
        return self.config.base_seed + self.replication


def _with_reference(cell: CellResult, reference: Optional[ReferenceEffect]) -> CellResult:
    if reference is None or reference.is_ground_truth:
        return cell
    cell.reference_lo = reference.lo
    cell.reference_hi = reference.hi
    if math.isfinite(cell.estimate):
        cell.in_interval = reference.contains(cell.estimate)
    return cell


def _run_method(
    task: CellTask,
    method: str,
    estimator: Callable[[], EstimateResult],
    reference: Optional[ReferenceEffect],
) -> CellResult:
    cell = CellResult(method=method, setting=task.setting, replication=task.replication,
                      seed=task.seed)
    start = time.perf_counter()
    try:
        result = estimator()
        cell.estimate = result.ace
        cell.epsilon_ace = result.epsilon_ace
        cell.first_stage_f = result.first_stage_f
    except Exception as exc:
        cell.error = f"{type(exc).__name__}: {exc}"
        logger.warning("cell %s failed: %s", cell.key, cell.error)
    if task.config.record_timing:
        cell.seconds = time.perf_counter() - start
    return _with_reference(cell, reference)


def _civvae_estimator(task: CellTask, dataset: Dataset, cell_log: Dict[str, List[float]]):
    def run() -> EstimateResult:
        config = task.config.civvae.model_copy(update={"seed": task.seed})
        trainer = fit_civvae(dataset, config, verbose=False)
        cell_log["loss_trace"] = [breakdown.total for breakdown in trainer.training_history]
        return estimate_ace(trainer.model, dataset, trainer.transform)

    return run


def _instrument_columns(dataset: Dataset, known_iv: str) -> List[str]:
    """The known instrument, or its one-hot columns when it was categorical."""
    return [c for c in dataset.columns if c == known_iv or c.startswith(f"{known_iv}=")]


def _oracle_estimator(dataset: Dataset, instruments: List[str], conditions: List[str]):
    def run() -> EstimateResult:
        return wald_civ(
            dataset.columns_matrix(instruments),
            dataset.columns_matrix(conditions),
            dataset.t,
            dataset.y,
            true_ace=dataset.true_ace,
        )

    return run


def _failed_cells(task: CellTask, methods: List[str], error: Exception) -> List[CellResult]:
    message = f"{type(error).__name__}: {error}"
    logger.warning("no data for %s r%d: %s", task.setting, task.replication, message)
    return [
        CellResult(method=m, setting=task.setting, replication=task.replication,
                   seed=task.seed, error=message)
        for m in methods
    ]


def _load_task_data(task: CellTask):
    """(dataset, instruments, conditions, reference) for a task."""
    if task.schema_path is None:
        dataset = generate(task.config.scm, task.sample_size, task.seed)
        return dataset, [SIMULATION_INSTRUMENT], list(SIMULATION_CONDITIONS), None

    schema: DatasetSchema = load_schema(task.schema_path)
    if schema.source is None:
        raise SchemaError(f"schema {task.schema_path} has no source file")
    dataset = load_csv(schema.source, schema, drop_invalid=task.config.real.drop_invalid)
    instruments, conditions = [], []
    if schema.known_iv is not None:
        instruments = _instrument_columns(dataset, schema.known_iv)
        conditions = [c for c in dataset.columns if c not in instruments]
    return dataset, instruments, conditions, schema.reference


def run_cell(task: CellTask) -> List[CellResult]:
    """
    Run every enabled method on one dataset draw.

    Never raises for data or estimation failures: they become NaN cells with
    the error text attached.
    """
    methods = task.config.baselines.enabled()
    try:
        dataset, instruments, conditions, reference = _load_task_data(task)
    except Exception as exc:
        return _failed_cells(task, methods, exc)

    results = []
    for method in methods:
        cell_log: Dict[str, List[float]] = {}
        if method == "civvae":
            estimator = _civvae_estimator(task, dataset, cell_log)
        elif method == "oracle_2sls":
            if not instruments:
                logger.debug("%s has no known instrument, skipping oracle_2sls", task.setting)
                continue
            estimator = _oracle_estimator(dataset, instruments, conditions)
        else:
            estimator = lambda: naive_ols_ace(dataset.t, dataset.y, dataset.true_ace)  # noqa: E731
        cell = _run_method(task, method, estimator, reference)
        cell.loss_trace = cell_log.get("loss_trace", [])
        results.append(cell)
    return results


def _cell_order(report: BenchmarkReport):
    settings = {s: i for i, s in enumerate(report.settings)}
    methods = {m: i for i, m in enumerate(report.methods)}
    return lambda c: (settings[c.setting], c.replication, methods[c.method])


def execute_tasks(
    tasks: List[CellTask], sequential: bool = False, verbose: Optional[bool] = None
) -> List[CellResult]:
    """
    Run tasks, on a process pool when CIVFORGE_THREADS allows it.

    Results come back in completion order; callers sort them.
    """
    settings = get_settings()
    if verbose is None:
        verbose = settings.progress
    workers = min(settings.threads, len(tasks)) if tasks else 1
    cells: List[CellResult] = []
    progress = tqdm(total=len(tasks), disable=not verbose, leave=False)

    if sequential or workers <= 1:
        for task in tasks:
            cells.extend(run_cell(task))
            progress.update(1)
            progress.set_description(f"Cell {task.setting} r{task.replication}")
    else:
        logger.info("running %d cells on %d worker processes", len(tasks), workers)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(run_cell, task) for task in tasks]
            for future in as_completed(futures):
                cells.extend(future.result())
                progress.update(1)
    progress.close()
    return cells


def _finish(report: BenchmarkReport, cells: List[CellResult]) -> BenchmarkReport:
    report.cells = sorted(cells, key=_cell_order(report))
    failed = report.failures()
    if failed:
        logger.warning("%d of %d cells failed", len(failed), len(report.cells))
    logger.info("benchmark finished with %d cells", len(report.cells))
    return report


def run_synthetic_benchmark(config: ExperimentConfig) -> BenchmarkReport:
    """
    Replications x sample sizes on the simulated structural model.

    Replication r of every sample size uses seed base_seed + r for both the
    data and the model; the streams are split inside generate and init_model.

    Args:
        config: Experiment configuration in synthetic mode

    Returns:
        BenchmarkReport of epsilon_ace per cell
    """
    if config.mode != "synthetic":
        raise BenchmarkConfigError(f"expected a synthetic config, got mode {config.mode}")
    settings = [str(n) for n in config.sample_sizes]
    tasks = [
        CellTask(config=config, setting=str(n), replication=r, sample_size=n)
        for n in config.sample_sizes
        for r in range(config.replications)
    ]
    logger.info(
        "synthetic benchmark: sizes=%s replications=%d base_seed=%d",
        settings, config.replications, config.base_seed,
    )
    report = BenchmarkReport(
        mode="synthetic",
        settings=settings,
        methods=config.baselines.enabled(),
        record_timing=config.record_timing,
    )
    return _finish(report, execute_tasks(tasks, sequential=config.sequential))


def run_real_benchmark(
    config: ExperimentConfig, schemas: Optional[List[Path]] = None
) -> BenchmarkReport:
    """
    CIV.VAE and baselines on schema-described CSV datasets.

    Args:
        config: Experiment configuration
        schemas: Schema files to use instead of config.real.schemas

    Returns:
        BenchmarkReport of estimates with reference interval membership
    """
    paths = [Path(p) for p in (schemas if schemas is not None else config.real.schemas)]
    if not paths:
        raise BenchmarkConfigError("no dataset schemas given for the real-data benchmark")

    names = []
    for path in paths:
        try:
            names.append(load_schema(path).name)
        except (OSError, SchemaError) as exc:
            logger.warning("cannot read schema %s: %s", path, exc)
            names.append(path.stem)
    duplicates = sorted({name for name in names if names.count(name) > 1})
    if duplicates:
        raise BenchmarkConfigError(f"duplicate dataset names: {', '.join(duplicates)}")

    tasks = [
        CellTask(config=config, setting=name, replication=r, schema_path=path)
        for name, path in zip(names, paths)
        for r in range(config.replications)
    ]
    report = BenchmarkReport(
        mode="real",
        settings=names,
        methods=config.baselines.enabled(),
        record_timing=config.record_timing,
    )
    return _finish(report, execute_tasks(tasks, sequential=config.sequential))


def run_benchmark(config: ExperimentConfig) -> BenchmarkReport:
    """Dispatch on config.mode."""
    if config.mode == "synthetic":
        return run_synthetic_benchmark(config)
    return run_real_benchmark(config)
