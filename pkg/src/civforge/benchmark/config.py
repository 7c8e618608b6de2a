"""Experiment configuration loaded from TOML files.

Example::

    [experiment]
    mode = "synthetic"
    sample_sizes = "2000, 10000"    # or [2000, 10000]
    replications = 5
    base_seed = 0
    output_dir = "results/desk"
    record_timing = false

    [civvae]
    epochs = 100

    [baselines]
    oracle_2sls = true
    naive_ols = true

    [real]
    schemas = ["../data/schemas/k401.schema"]
"""

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import List, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ..exceptions import BenchmarkConfigError
from ..model.config import CivVaeConfig
from ..simulation.scm import ScmSpec

# Smallest sample size accepted in synthetic mode
MIN_SYNTHETIC_N = 100

# Estimators in report order
METHODS = ["civvae", "oracle_2sls", "naive_ols"]


def _split_list(value):
    """Accept TOML arrays or comma-separated strings."""
    if isinstance(value, str):
        return [item.strip() for item in value.split(",") if item.strip()]
    return value


class BaselineToggles(BaseModel):
    """Which estimators run next to CIV.VAE."""

    model_config = ConfigDict(extra="forbid")

    civvae: bool = True
    # Known instrument: S given {X1, X2} on simulated data, the schema's known_iv on real data
    oracle_2sls: bool = True
    naive_ols: bool = True

    def enabled(self) -> List[str]:
        return [name for name in METHODS if getattr(self, name)]


class RealDataConfig(BaseModel):
    """Datasets for real mode."""

    model_config = ConfigDict(extra="forbid")

    schemas: List[Path] = Field(default_factory=list)
    drop_invalid: bool = False

    @field_validator("schemas", mode="before")
    @classmethod
    def _split_schemas(cls, value):
        return _split_list(value)


class ExperimentConfig(BaseModel):
    """A complete benchmark run."""

    model_config = ConfigDict(extra="forbid")

    mode: Literal["synthetic", "real"] = "synthetic"
    sample_sizes: List[int] = Field(default_factory=lambda: [2000, 10000])
    replications: int = Field(default=5, ge=1)
    base_seed: int = Field(default=0, ge=0)
    output_dir: Path = Path("results")
    # Leave the seconds columns blank so reruns produce identical bytes
    record_timing: bool = False
    # Ignore CIVFORGE_THREADS and run cells one after another
    sequential: bool = False
    civvae: CivVaeConfig = Field(default_factory=CivVaeConfig.for_simulation)
    baselines: BaselineToggles = Field(default_factory=BaselineToggles)
    real: RealDataConfig = Field(default_factory=RealDataConfig)
    scm: ScmSpec = Field(default_factory=ScmSpec)

    @field_validator("sample_sizes", mode="before")
    @classmethod
    def _split_sizes(cls, value):
        return _split_list(value)

    @model_validator(mode="after")
    def _check_mode(self):
        if self.mode == "synthetic":
            if not self.sample_sizes:
                raise ValueError("synthetic mode needs at least one sample size")
            small = [n for n in self.sample_sizes if n < MIN_SYNTHETIC_N]
            if small:
                raise ValueError(f"sample sizes must be at least {MIN_SYNTHETIC_N}, got {small}")
        elif not self.real.schemas:
            raise ValueError("real mode needs at least one schema under [real]")
        return self


def experiment_config_from_dict(
    payload: dict, base_dir: Union[str, Path, None] = None
) -> ExperimentConfig:
    """
    Build an ExperimentConfig from parsed TOML tables.

    Relative output and schema paths are resolved against base_dir.

    Raises:
        BenchmarkConfigError: Unknown sections or keys, or invalid values
    """
    unknown = sorted(set(payload) - {"experiment", "civvae", "baselines", "real", "scm"})
    if unknown:
        raise BenchmarkConfigError(f"unknown config sections: {', '.join(unknown)}")
    fields = dict(payload.get("experiment", {}))
    civvae = dict(payload.get("civvae", {}))
    if fields.get("mode") == "real":
        civvae.setdefault("dim_zc", 2)
    fields["civvae"] = civvae
    for section in ("baselines", "real", "scm"):
        if section in payload:
            fields[section] = payload[section]

    try:
        config = ExperimentConfig(**fields)
    except ValidationError as exc:
        raise BenchmarkConfigError(f"invalid experiment config: {exc}")

    if base_dir is not None:
        base = Path(base_dir)
        resolve = lambda path: path if path.is_absolute() else base / path  # noqa: E731
        config.output_dir = resolve(config.output_dir)
        config.real.schemas = [resolve(path) for path in config.real.schemas]
    return config


def load_experiment_config(path: Union[str, Path]) -> ExperimentConfig:
    """Read a TOML experiment file; relative paths are taken from the file's directory."""
    path = Path(path)
    try:
        with open(path, "rb") as handle:
            payload = tomllib.load(handle)
    except FileNotFoundError:
        raise BenchmarkConfigError(f"config file {path} does not exist")
    except tomllib.TOMLDecodeError as exc:
        raise BenchmarkConfigError(f"{path}: {exc}")
    return experiment_config_from_dict(payload, base_dir=path.parent)
