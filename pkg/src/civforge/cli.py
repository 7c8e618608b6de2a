"""Command-line interface: ``civforge <subcommand> ...``.

Results are printed as ``key=value`` lines. Invalid input of any kind
prints ``error=<message>`` and exits with status 2.
"""

import argparse
import logging
import sys
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import replace
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

from .benchmark import emit_report, load_experiment_config, run_benchmark
from .data import Dataset, load_csv, load_schema, write_columns_csv, write_dataset_csv
from .data.loader import format_float
from .estimation import wald_civ
from .exceptions import CheckpointError, SchemaError
from .graph import find_conditioning_set, format_path, is_civ, load_dag
from .graph.catalog import CATALOG
from .model import CivVaeConfig, estimate_ace, extract_representations, fit_civvae, load_model
from .settings import get_settings
from .simulation import ScmSpec, generate

logger = logging.getLogger(__name__)

EXIT_INVALID = 2


def _emit(**fields: Any) -> None:
    for key, value in fields.items():
        if value is None:
            text = ""
        elif isinstance(value, bool):
            text = str(value).lower()
        elif isinstance(value, float):
            text = format_float(value)
        else:
            text = str(value)
        print(f"{key}={text}")


def _names(value: Optional[str]) -> List[str]:
    if not value:
        return []
    return [name.strip() for name in value.split(",") if name.strip()]


def _load_graph(source: str):
    if source in CATALOG:
        return CATALOG[source]()
    path = Path(source)
    if not path.exists():
        raise SchemaError(
            f"{source} is neither a graph file nor a catalog graph ({', '.join(sorted(CATALOG))})"
        )
    return load_dag(path)


def cmd_verify_graph(args: argparse.Namespace) -> int:
    dag = _load_graph(args.dag)
    conditions = _names(args.cond)
    if not conditions:
        found = find_conditioning_set(dag, args.civ)
        _emit(conditioning_set="none" if found is None else ",".join(sorted(found)))
        if found is None:
            return 0
        conditions = sorted(found)

    verdict = is_civ(dag, args.civ, conditions)
    _emit(
        civ=args.civ,
        cond=",".join(sorted(conditions)),
        is_civ=verdict.is_civ,
        condition1=verdict.condition1,
        condition2=verdict.condition2,
        condition3=verdict.condition3,
    )
    for path in verdict.witness_paths:
        _emit(witness_path=format_path(dag, path))
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    spec = ScmSpec()
    dataset = generate(spec, args.n, args.seed, keep_latents=bool(args.emit_latents))
    write_dataset_csv(dataset, args.out)
    if args.emit_latents:
        write_columns_csv(dataset.latents, args.emit_latents)
    _emit(out=args.out, n=dataset.n, seed=args.seed, true_ace=dataset.true_ace)
    return 0


def _civvae_config(path: Optional[str]) -> CivVaeConfig:
    """The [civvae] table of a TOML file (or the whole file when it has no such table)."""
    if path is None:
        return CivVaeConfig()
    with open(path, "rb") as handle:
        payload = tomllib.load(handle)
    return CivVaeConfig(**payload.get("civvae", payload))


def cmd_train(args: argparse.Namespace) -> int:
    schema = load_schema(args.schema)
    dataset = load_csv(args.data, schema, drop_invalid=args.drop_invalid)
    config = _civvae_config(args.config)
    if args.seed is not None:
        config = config.model_copy(update={"seed": args.seed})
    if args.epochs is not None:
        config = config.model_copy(update={"epochs": args.epochs})

    trainer = fit_civvae(dataset, config, checkpoint_dir=args.checkpoint_dir)
    trainer.save_checkpoint(args.out)
    history = trainer.training_history
    _emit(
        out=args.out,
        n=dataset.n,
        covariates=dataset.d,
        epochs=len(history),
        final_loss=history[-1].total if history else None,
    )
    return 0


def _in_training_order(model, dataset: Dataset) -> Dataset:
    """Covariates reordered to the columns the model was trained on."""
    if not model.columns:
        return dataset
    missing = [name for name in model.columns if name not in dataset.columns]
    if missing:
        raise SchemaError(f"the data lacks trained covariates: {', '.join(missing)}")
    return replace(
        dataset,
        x=dataset.columns_matrix(list(model.columns)),
        columns=list(model.columns),
        x_kinds=list(model.config.x_kinds),
    )


def _covariates_for(model, data: str, schema_path: Optional[str]) -> Dataset:
    if schema_path is not None:
        return _in_training_order(model, load_csv(data, load_schema(schema_path)))
    if not model.columns:
        raise CheckpointError("the checkpoint does not name its covariates; pass --schema")
    frame = pd.read_csv(data)
    missing = [name for name in model.columns if name not in frame.columns]
    if missing:
        raise SchemaError(f"{data} is missing covariate columns: {', '.join(missing)}")
    x = frame[model.columns].to_numpy(dtype=np.float64)
    n = x.shape[0]
    # Treatment and outcome are not needed for extraction
    return Dataset(x=x, columns=list(model.columns), t=np.zeros(n), y=np.zeros(n),
                   x_kinds=list(model.config.x_kinds))


def cmd_extract(args: argparse.Namespace) -> int:
    model, transform, _ = load_model(args.model)
    dataset = transform.apply(_covariates_for(model, args.data, args.schema))
    z_t, z_c = extract_representations(model, dataset.x, sample=args.sample or None)
    columns: Dict[str, np.ndarray] = {}
    for j in range(z_t.shape[1]):
        columns[f"z_t{j}"] = z_t[:, j]
    for j in range(z_c.shape[1]):
        columns[f"z_c{j}"] = z_c[:, j]
    write_columns_csv(columns, args.out)
    _emit(out=args.out, n=z_t.shape[0], dim_zt=z_t.shape[1], dim_zc=z_c.shape[1])
    return 0


def _append_result(path: str, row: Dict[str, Any]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame([row])
    frame.to_csv(
        path, mode="a", header=not path.exists(), index=False,
        float_format="%.17g", lineterminator="\n",
    )


def cmd_estimate(args: argparse.Namespace) -> int:
    schema = load_schema(args.schema)
    dataset = load_csv(args.data, schema, drop_invalid=args.drop_invalid)
    if args.model is not None:
        if args.instrument:
            raise SchemaError("use either --model or --instrument, not both")
        model, transform, _ = load_model(args.model)
        result = estimate_ace(
            model, _in_training_order(model, dataset), transform, sample=args.sample or None
        )
    else:
        instruments = _names(args.instrument)
        if not instruments:
            raise SchemaError("either --instrument or --model is required")
        result = wald_civ(
            dataset.columns_matrix(instruments),
            dataset.columns_matrix(_names(args.condition)),
            dataset.t,
            dataset.y,
            true_ace=dataset.true_ace,
        )

    fields = result.to_dict()
    if schema.reference is not None and not schema.reference.is_ground_truth:
        fields["in_interval"] = schema.reference.contains(result.ace)
    _emit(**fields)
    if args.results_csv:
        _append_result(args.results_csv, {"dataset": schema.name, **fields})
    return 0


def cmd_benchmark(args: argparse.Namespace) -> int:
    config = load_experiment_config(args.config)
    if args.output_dir:
        config.output_dir = Path(args.output_dir)
    if args.sequential:
        config.sequential = True
    report = run_benchmark(config)
    written = emit_report(report, config.output_dir)
    _emit(
        mode=report.mode,
        cells=len(report.cells),
        failed=len(report.failures()),
        report=written.get("report.csv"),
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="civforge",
        description="Conditional IV representation learning and causal effect estimation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify-graph", help="check the conditional-IV conditions on a DAG")
    p.add_argument("--dag", required=True, help="graph file or catalog name")
    p.add_argument("--civ", required=True, help="candidate instrument node")
    p.add_argument("--cond", help="comma-separated conditioning set (searched when omitted)")
    p.set_defaults(handler=cmd_verify_graph)

    p = sub.add_parser("simulate", help="sample the synthetic structural model")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--emit-latents", help="also write U, U1..U4 to this CSV")
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("train", help="train CIV.VAE and save a checkpoint")
    p.add_argument("--data", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--config", help="TOML file with a [civvae] table")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--checkpoint-dir", help="write a checkpoint after every epoch")
    p.add_argument("--drop-invalid", action="store_true")
    p.set_defaults(handler=cmd_train)

    p = sub.add_parser("extract", help="write Z_T and Z_C for a dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--schema", help="needed when covariates must be encoded from raw columns")
    p.add_argument("--out", required=True)
    p.add_argument("--sample", action="store_true", help="draw instead of taking means")
    p.set_defaults(handler=cmd_extract)

    p = sub.add_parser("estimate", help="conditional IV estimate of the ACE")
    p.add_argument("--data", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--instrument", help="comma-separated instrument columns")
    p.add_argument("--condition", help="comma-separated conditioning columns")
    p.add_argument("--model", help="use a trained CIV.VAE checkpoint instead")
    p.add_argument("--sample", action="store_true")
    p.add_argument("--results-csv", help="append the estimate to this CSV")
    p.add_argument("--drop-invalid", action="store_true")
    p.set_defaults(handler=cmd_estimate)

    p = sub.add_parser("benchmark", help="run a benchmark from a TOML config")
    p.add_argument("--config", required=True)
    p.add_argument("--output-dir", help="override [experiment] output_dir")
    p.add_argument("--sequential", action="store_true")
    p.set_defaults(handler=cmd_benchmark)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    settings = get_settings()
    logging.basicConfig(
        level=getattr(logging, settings.log_level.upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.handler(args)
    except (ValueError, OSError) as exc:
        logger.debug("command failed", exc_info=True)
        _emit(error=str(exc))
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
