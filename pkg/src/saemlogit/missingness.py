"""MCAR and MAR missingness injection for fully observed columns.

Both mechanisms are ignorable by construction: the mask draw never reads the
value of the cell being masked.  MAR masks each target column through a
logistic model on fully observed driver columns, with the intercept
calibrated by bisection so the mean masking probability hits the target rate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import HybridDataset
from .distributions import sigmoid
from .errors import DataError, NumericsError

MCAR = "MCAR"
MAR = "MAR"

_BISECTION_STEPS = 60
_LOGIT_BRACKET = 30.0
_CALIBRATION_TOL = 0.005


@dataclass(frozen=True)
class MissingnessSpec:
    """Mechanism, target rate, and column roles for one injection."""

    mechanism: str
    rate: float
    target_columns: tuple[str, ...]
    driver_columns: tuple[str, ...] = ()
    driver_coefficients: dict[str, np.ndarray] | None = None
    seed: int = 0

    def __post_init__(self):
        if self.mechanism not in (MCAR, MAR):
            raise DataError(f"unknown mechanism {self.mechanism!r}")
        if not 0.0 < self.rate < 1.0:
            raise DataError(f"missingness rate {self.rate} outside (0, 1)")
        object.__setattr__(self, "target_columns", tuple(self.target_columns))
        object.__setattr__(self, "driver_columns", tuple(self.driver_columns))
        if self.mechanism == MAR:
            overlap = set(self.target_columns) & set(self.driver_columns)
            if overlap:
                raise DataError(f"columns {sorted(overlap)} are both targets and drivers")
            if not self.driver_columns:
                raise DataError("MAR needs at least one driver column")


def _check_fully_observed(ds: HybridDataset, columns, role: str) -> np.ndarray:
    idx = np.array([ds.column_index(c) for c in columns], dtype=int)
    for c, j in zip(columns, idx):
        if not ds.mask[:, j].all():
            raise DataError(f"{role} column {c!r} must be fully observed before injection")
    return idx


def inject_mcar(ds: HybridDataset, spec: MissingnessSpec) -> HybridDataset:
    """Mask each target cell independently with probability ``spec.rate``."""
    if spec.mechanism != MCAR:
        raise DataError("inject_mcar requires an MCAR spec")
    targets = _check_fully_observed(ds, spec.target_columns, "target")
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed))
    mask = ds.mask.copy()
    for j in targets:
        mask[:, j] = rng.random(ds.n) >= spec.rate
    return ds.with_cells(mask=mask)


def _calibrate_intercept(eta_drivers: np.ndarray, rate: float) -> float:
    """Bisection on alpha so that mean(sigmoid(alpha + eta)) == rate.

    The mean is monotone increasing in alpha, so 60 steps on the bracket
    [-30, 30] pin the rate far below the required 0.005.
    """
    lo, hi = -_LOGIT_BRACKET, _LOGIT_BRACKET
    mean_at = lambda a: float(np.mean(sigmoid(a + eta_drivers)))
    if not mean_at(lo) <= rate <= mean_at(hi):
        raise NumericsError(
            f"target rate {rate} cannot be bracketed within +-{_LOGIT_BRACKET} logits"
        )
    for _ in range(_BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        if mean_at(mid) < rate:
            lo = mid
        else:
            hi = mid
    alpha = 0.5 * (lo + hi)
    if abs(mean_at(alpha) - rate) > _CALIBRATION_TOL:
        raise NumericsError("intercept calibration did not reach the target rate")
    return alpha


def inject_mar(ds: HybridDataset, spec: MissingnessSpec) -> HybridDataset:
    """Mask target cells with probability sigmoid(alpha_k + gamma_k . drivers).

    Drivers are standardized internally for calibration only, so the default
    unit coefficients give a rate-controlled, reproducible mechanism.  Driver
    columns stay fully observed.
    """
    if spec.mechanism != MAR:
        raise DataError("inject_mar requires a MAR spec")
    targets = _check_fully_observed(ds, spec.target_columns, "target")
    drivers = _check_fully_observed(ds, spec.driver_columns, "driver")

    z = ds.values[:, drivers].astype(float)
    z = z - z.mean(axis=0)
    sd = z.std(axis=0)
    sd[sd == 0.0] = 1.0
    z = z / sd

    rng = np.random.default_rng(np.random.SeedSequence(spec.seed))
    mask = ds.mask.copy()
    for name, j in zip(spec.target_columns, targets):
        gamma = np.ones(len(drivers))
        if spec.driver_coefficients and name in spec.driver_coefficients:
            gamma = np.asarray(spec.driver_coefficients[name], dtype=float)
            if gamma.shape != (len(drivers),):
                raise DataError(
                    f"driver coefficients for {name!r} must have {len(drivers)} entries"
                )
        eta = z @ gamma
        alpha = _calibrate_intercept(eta, spec.rate)
        pi = sigmoid(alpha + eta)
        mask[:, j] = rng.random(ds.n) >= pi
    return ds.with_cells(mask=mask)


def inject(ds: HybridDataset, spec: MissingnessSpec) -> HybridDataset:
    return inject_mcar(ds, spec) if spec.mechanism == MCAR else inject_mar(ds, spec)
