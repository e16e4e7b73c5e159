"""Hybrid dataset representation, schema, CSV ingestion and serialization.

A dataset holds a binary outcome plus ``l`` discrete covariates (level codes
``1..M_j``) followed by ``h`` continuous covariates, with a boolean mask
marking observed cells (True = observed).  Values of masked cells are stored
as NaN.  Datasets are immutable after construction and safe to share.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, SchemaError

CONTINUOUS = "continuous"
DISCRETE = "discrete"


@dataclass(frozen=True)
class VariableSchema:
    """One covariate column: name, kind, and level count for discrete kinds.

    ``labels`` optionally maps string categories (in level order) to the
    integer codes ``1..levels`` at ingestion time.
    """

    name: str
    kind: str
    levels: int | None = None
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.kind not in (CONTINUOUS, DISCRETE):
            raise SchemaError(f"unknown variable kind {self.kind!r} for {self.name!r}")
        if self.kind == DISCRETE:
            if self.levels is None or self.levels < 2:
                raise SchemaError(f"discrete variable {self.name!r} needs levels >= 2")
            if self.labels is not None and len(self.labels) != self.levels:
                raise SchemaError(
                    f"variable {self.name!r}: {len(self.labels)} labels for {self.levels} levels"
                )
        elif self.levels is not None:
            raise SchemaError(f"continuous variable {self.name!r} must not declare levels")


def validate_schema(schema) -> tuple[VariableSchema, ...]:
    schema = tuple(schema)
    names = [v.name for v in schema]
    if len(set(names)) != len(names):
        raise SchemaError("variable names must be unique")
    kinds = [v.kind for v in schema]
    first_cont = kinds.index(CONTINUOUS) if CONTINUOUS in kinds else len(kinds)
    if DISCRETE in kinds[first_cont:]:
        raise SchemaError("schema must list all discrete variables before continuous ones")
    return schema


@dataclass(frozen=True)
class HybridDataset:
    """n samples of binary outcome plus mixed covariates with missingness mask."""

    schema: tuple[VariableSchema, ...]
    outcomes: np.ndarray
    values: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        schema = validate_schema(self.schema)
        y = np.asarray(self.outcomes, dtype=np.int64)
        values = np.asarray(self.values, dtype=float)
        mask = np.asarray(self.mask, dtype=bool)
        if values.ndim != 2 or values.shape[1] != len(schema):
            raise SchemaError(
                f"values shape {values.shape} does not match {len(schema)} schema columns"
            )
        if mask.shape != values.shape:
            raise SchemaError(f"mask shape {mask.shape} != values shape {values.shape}")
        if y.shape != (values.shape[0],):
            raise SchemaError("outcomes must be one value per row")
        if not np.isin(y, (0, 1)).all():
            raise DataError("outcomes must be binary 0/1 and never missing")
        values = values.copy()
        values[~mask] = np.nan
        for j, var in enumerate(schema):
            col = values[mask[:, j], j]
            if not np.isfinite(col).all():
                raise DataError(f"column {var.name!r} has non-finite observed cells")
            if var.kind == DISCRETE:
                if col.size and (np.any(col != np.round(col)) or col.min() < 1 or col.max() > var.levels):
                    raise DataError(
                        f"column {var.name!r} has observed levels outside 1..{var.levels}"
                    )
        values.setflags(write=False)
        mask = mask.copy()
        mask.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "schema", schema)
        object.__setattr__(self, "outcomes", y)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "mask", mask)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def n_discrete(self) -> int:
        return sum(v.kind == DISCRETE for v in self.schema)

    @property
    def n_continuous(self) -> int:
        return sum(v.kind == CONTINUOUS for v in self.schema)

    @property
    def discrete_levels(self) -> tuple[int, ...]:
        return tuple(v.levels for v in self.schema if v.kind == DISCRETE)

    def column_index(self, name: str) -> int:
        for j, v in enumerate(self.schema):
            if v.name == name:
                return j
        raise SchemaError(f"no column named {name!r}")

    def sample_view(self, i: int) -> "SampleView":
        l = self.n_discrete
        md = self.mask[i, :l]
        mc = self.mask[i, l:]
        return SampleView(
            index=i,
            y=int(self.outcomes[i]),
            obs_d_idx=tuple(np.flatnonzero(md)),
            obs_d_val=self.values[i, :l][md].astype(np.int64),
            mis_d_idx=tuple(np.flatnonzero(~md)),
            obs_c_idx=tuple(np.flatnonzero(mc)),
            obs_c_val=self.values[i, l:][mc],
            mis_c_idx=tuple(np.flatnonzero(~mc)),
        )

    def subset(self, rows) -> "HybridDataset":
        rows = np.asarray(rows, dtype=int)
        return HybridDataset(self.schema, self.outcomes[rows], self.values[rows], self.mask[rows])

    def with_cells(self, values=None, mask=None) -> "HybridDataset":
        return HybridDataset(
            self.schema,
            self.outcomes,
            self.values if values is None else values,
            self.mask if mask is None else mask,
        )


@dataclass(frozen=True)
class SampleView:
    """Partition of one sample's coordinates into observed/missing blocks.

    Discrete indices are positions within the discrete block (0..l-1) and
    continuous indices positions within the continuous block (0..h-1).
    """

    index: int
    y: int
    obs_d_idx: tuple[int, ...]
    obs_d_val: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    mis_d_idx: tuple[int, ...] = ()
    obs_c_idx: tuple[int, ...] = ()
    obs_c_val: np.ndarray = field(default_factory=lambda: np.zeros(0))
    mis_c_idx: tuple[int, ...] = ()


def pattern_groups(ds: HybridDataset) -> list[tuple[tuple[bool, ...], np.ndarray]]:
    """Rows grouped by missingness pattern, in a canonical sorted order."""
    groups: dict[tuple[bool, ...], list[int]] = {}
    for i, row in enumerate(ds.mask):
        groups.setdefault(tuple(bool(b) for b in row), []).append(i)
    return [(key, np.asarray(rows, dtype=int)) for key, rows in sorted(groups.items())]


# ---------------------------------------------------------------------------
# CSV + schema sidecar I/O


def schema_to_json(schema, outcome: str, path) -> None:
    doc = {
        "outcome": outcome,
        "variables": [
            {
                "name": v.name,
                "kind": v.kind,
                **({"levels": v.levels} if v.levels is not None else {}),
                **({"labels": list(v.labels)} if v.labels is not None else {}),
            }
            for v in schema
        ],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def schema_from_json(path) -> tuple[str, tuple[VariableSchema, ...]]:
    """Read the sidecar config naming each column's kind/levels and the outcome column."""
    with open(path) as fh:
        doc = json.load(fh)
    try:
        outcome = doc["outcome"]
        schema = tuple(
            VariableSchema(
                name=v["name"],
                kind=v["kind"],
                levels=v.get("levels"),
                labels=tuple(v["labels"]) if "labels" in v else None,
            )
            for v in doc["variables"]
        )
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"malformed schema file {path}: {exc}") from exc
    return outcome, validate_schema(schema)


def _parse_cell(raw: str, var: VariableSchema, row: int) -> float:
    if var.kind == DISCRETE:
        if var.labels is not None and raw in var.labels:
            return float(var.labels.index(raw) + 1)
        try:
            level = int(raw)
        except ValueError as exc:
            raise DataError(
                f"row {row}, column {var.name!r}: cannot parse {raw!r} as a level"
            ) from exc
        if not 1 <= level <= var.levels:
            raise DataError(
                f"row {row}, column {var.name!r}: level {level} outside 1..{var.levels}"
            )
        return float(level)
    try:
        return float(raw)
    except ValueError as exc:
        raise DataError(f"row {row}, column {var.name!r}: cannot parse {raw!r} as a real") from exc


def load_csv(
    path,
    schema,
    na_token: str = "NA",
    outcome: str = "y",
    delimiter: str = ",",
) -> HybridDataset:
    """Read a header CSV into a dataset; cells equal to ``na_token`` become missing."""
    schema = validate_schema(schema)
    with open(path, newline="") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        expected = [outcome] + [v.name for v in schema]
        if header != expected:
            raise SchemaError(f"{path}: header {header} does not match {expected}")
        y, values, mask = [], [], []
        for r, line in enumerate(reader, start=1):
            if len(line) != len(expected):
                raise DataError(f"row {r}: {len(line)} cells for {len(expected)} columns")
            if line[0] == na_token:
                raise DataError(f"row {r}: outcome is missing")
            try:
                yi = int(line[0])
            except ValueError as exc:
                raise DataError(f"row {r}: cannot parse outcome {line[0]!r}") from exc
            if yi not in (0, 1):
                raise DataError(f"row {r}: outcome {yi} is not binary")
            vrow = np.full(len(schema), np.nan)
            mrow = np.zeros(len(schema), dtype=bool)
            for j, var in enumerate(schema):
                raw = line[j + 1]
                if raw == na_token:
                    continue
                vrow[j] = _parse_cell(raw, var, r)
                mrow[j] = True
            y.append(yi)
            values.append(vrow)
            mask.append(mrow)
    if not y:
        raise DataError(f"{path}: no data rows")
    return HybridDataset(schema, np.array(y), np.array(values), np.array(mask))


def save_csv(
    ds: HybridDataset,
    path,
    na_token: str = "NA",
    outcome: str = "y",
    delimiter: str = ",",
) -> None:
    """Write a dataset; ``load_csv`` of the output reproduces it exactly.

    Discrete cells are written as integers and continuous cells with
    ``repr``, which round-trips float64 exactly.
    """
    l = ds.n_discrete
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, delimiter=delimiter)
        writer.writerow([outcome] + [v.name for v in ds.schema])
        for i in range(ds.n):
            row = [str(int(ds.outcomes[i]))]
            for j in range(len(ds.schema)):
                if not ds.mask[i, j]:
                    row.append(na_token)
                elif j < l:
                    row.append(str(int(ds.values[i, j])))
                else:
                    row.append(repr(float(ds.values[i, j])))
            writer.writerow(row)


def split_train_test(
    ds: HybridDataset, test_fraction: float, seed: int
) -> tuple[HybridDataset, HybridDataset]:
    """Disjoint row split into (train, test) with ``floor(n * f)`` test rows."""
    if not 0.0 < test_fraction < 1.0:
        raise DataError(f"test fraction {test_fraction} outside (0, 1)")
    if ds.n < 2:
        raise DataError("need at least 2 rows to split")
    n_test = int(np.floor(ds.n * test_fraction))
    perm = np.random.default_rng(seed).permutation(ds.n)
    test_rows = np.sort(perm[:n_test])
    train_rows = np.sort(perm[n_test:])
    return ds.subset(train_rows), ds.subset(test_rows)
