"""Typed dataset schemas and their line-oriented file format.

Schema file statements (one per line, ``#`` comments)::

    dataset k401
    source 401ksubs.csv
    column p401k treatment binary positive=1
    column pira outcome binary
    column inc covariate continuous
    column ethnicity covariate categorical
    column Erk treatment binary threshold=median
    column wage outcome continuous transform=log
    known_iv e401k
    reference_ace 0.0712 0.047 0.095

``reference_ace VALUE`` without an interval marks VALUE as the ground truth
(simulated data); with ``LO HI`` it is a literature reference.
"""

from enum import Enum
from pathlib import Path
from typing import List, Literal, Optional, Union

from pydantic import BaseModel, Field, model_validator

from ..exceptions import SchemaError
from .dataset import ColumnKind


class ColumnRole(str, Enum):
    """How a column is used."""

    COVARIATE = "covariate"
    TREATMENT = "treatment"
    OUTCOME = "outcome"
    IGNORE = "ignore"


class ColumnSpec(BaseModel):
    """One declared column."""

    name: str
    role: ColumnRole
    kind: ColumnKind
    positive: Optional[str] = Field(default=None, description="Label mapped to 1")
    threshold: Optional[Union[float, Literal["median"]]] = Field(
        default=None, description="Binarize a numeric column: value > threshold maps to 1"
    )
    transform: Optional[Literal["log"]] = None


class ReferenceEffect(BaseModel):
    """Reference ACE, optionally with a literature interval."""

    value: float
    lo: Optional[float] = None
    hi: Optional[float] = None

    @model_validator(mode="after")
    def _check_interval(self):
        if (self.lo is None) != (self.hi is None):
            raise ValueError("reference interval needs both bounds")
        if self.lo is not None and self.lo > self.hi:
            raise ValueError(f"reference interval ({self.lo}, {self.hi}) is reversed")
        return self

    @property
    def is_ground_truth(self) -> bool:
        return self.lo is None

    def contains(self, estimate: float) -> bool:
        if self.lo is None:
            return False
        return self.lo <= estimate <= self.hi


class DatasetSchema(BaseModel):
    """Column roles and kinds for a CSV dataset."""

    name: str = "dataset"
    columns: List[ColumnSpec]
    known_iv: Optional[str] = None
    reference: Optional[ReferenceEffect] = None
    source: Optional[Path] = None

    @model_validator(mode="after")
    def _check_roles(self):
        names = [column.name for column in self.columns]
        duplicates = sorted({name for name in names if names.count(name) > 1})
        if duplicates:
            raise ValueError(f"duplicate column declarations: {', '.join(duplicates)}")
        for role in (ColumnRole.TREATMENT, ColumnRole.OUTCOME):
            count = sum(column.role is role for column in self.columns)
            if count != 1:
                raise ValueError(f"expected exactly one {role.value} column, found {count}")
        if self.treatment.kind is not ColumnKind.BINARY:
            raise ValueError(
                f"treatment {self.treatment.name} must be binary "
                "(use threshold= to binarize a numeric column)"
            )
        if self.outcome.kind is ColumnKind.CATEGORICAL:
            raise ValueError(f"outcome {self.outcome.name} cannot be categorical")
        for column in self.columns:
            if column.threshold is not None and column.kind is not ColumnKind.BINARY:
                raise ValueError(f"threshold= needs a binary column ({column.name})")
        if self.known_iv is not None and self.known_iv not in [c.name for c in self.covariates]:
            raise ValueError(f"known_iv {self.known_iv} is not a covariate column")
        return self

    @property
    def treatment(self) -> ColumnSpec:
        return next(c for c in self.columns if c.role is ColumnRole.TREATMENT)

    @property
    def outcome(self) -> ColumnSpec:
        return next(c for c in self.columns if c.role is ColumnRole.OUTCOME)

    @property
    def covariates(self) -> List[ColumnSpec]:
        return [c for c in self.columns if c.role is ColumnRole.COVARIATE]

    def required_columns(self) -> List[str]:
        return [c.name for c in self.columns if c.role is not ColumnRole.IGNORE]


def _parse_column(tokens: List[str], line_number: int) -> ColumnSpec:
    if len(tokens) < 4:
        raise SchemaError(f"line {line_number}: expected 'column NAME ROLE KIND [key=value ...]'")
    _, name, role, kind, *options = tokens
    fields = {"name": name, "role": role, "kind": kind}
    for option in options:
        key, sep, value = option.partition("=")
        if not sep or key not in ("positive", "threshold", "transform"):
            raise SchemaError(f"line {line_number}: unknown column option '{option}'")
        if key == "threshold" and value != "median":
            try:
                fields[key] = float(value)
            except ValueError:
                raise SchemaError(f"line {line_number}: threshold must be a number or 'median'")
        else:
            fields[key] = value
    try:
        return ColumnSpec(**fields)
    except ValueError as exc:
        raise SchemaError(f"line {line_number}: {exc}")


def parse_schema(text: str, base_dir: Optional[Path] = None) -> DatasetSchema:
    """
    Parse schema text.

    Args:
        text: Schema file contents
        base_dir: Directory that a relative ``source`` path is resolved against

    Returns:
        Validated DatasetSchema

    Raises:
        SchemaError: On malformed lines or role/kind violations
    """
    fields: dict = {"columns": []}
    for line_number, raw in enumerate(text.splitlines(), start=1):
        tokens = raw.split("#", 1)[0].split()
        if not tokens:
            continue
        keyword = tokens[0]
        if keyword == "column":
            fields["columns"].append(_parse_column(tokens, line_number))
        elif keyword in ("dataset", "known_iv", "source"):
            if len(tokens) != 2:
                raise SchemaError(f"line {line_number}: expected '{keyword} VALUE'")
            key = "name" if keyword == "dataset" else keyword
            fields[key] = tokens[1]
        elif keyword == "reference_ace":
            if len(tokens) not in (2, 4):
                raise SchemaError(f"line {line_number}: expected 'reference_ace VALUE [LO HI]'")
            try:
                numbers = [float(token) for token in tokens[1:]]
            except ValueError:
                raise SchemaError(f"line {line_number}: reference_ace values must be numbers")
            lo, hi = (numbers[1], numbers[2]) if len(numbers) == 3 else (None, None)
            try:
                fields["reference"] = ReferenceEffect(value=numbers[0], lo=lo, hi=hi)
            except ValueError as exc:
                raise SchemaError(f"line {line_number}: {exc}")
        else:
            raise SchemaError(f"line {line_number}: unknown statement '{keyword}'")

    if "source" in fields and base_dir is not None:
        source = Path(fields["source"])
        fields["source"] = source if source.is_absolute() else base_dir / source
    try:
        return DatasetSchema(**fields)
    except ValueError as exc:
        raise SchemaError(str(exc))


def load_schema(path: Union[str, Path]) -> DatasetSchema:
    """Read a schema file; ``source`` is resolved relative to the file."""
    path = Path(path)
    return parse_schema(path.read_text(encoding="utf-8"), base_dir=path.parent)


def format_schema(schema: DatasetSchema) -> str:
    """Render a schema back to its text form."""
    lines = [f"dataset {schema.name}"]
    if schema.source is not None:
        lines.append(f"source {schema.source}")
    for column in schema.columns:
        parts = ["column", column.name, column.role.value, column.kind.value]
        if column.positive is not None:
            parts.append(f"positive={column.positive}")
        if column.threshold is not None:
            parts.append(f"threshold={column.threshold}")
        if column.transform is not None:
            parts.append(f"transform={column.transform}")
        lines.append(" ".join(parts))
    if schema.known_iv is not None:
        lines.append(f"known_iv {schema.known_iv}")
    if schema.reference is not None:
        ref = schema.reference
        bounds = "" if ref.lo is None else f" {ref.lo!r} {ref.hi!r}"
        lines.append(f"reference_ace {ref.value!r}{bounds}")
    return "\n".join(lines) + "\n"
