"""Exploratory statistics: skewness, correlations, OLS, VIF, grouped tables.

Everything here is a pure function emitting plain data (floats, dataclasses,
CSV-writable tables). No plotting.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .constants import CATEGORICAL_FIELDS, FIELD_TO_COLUMN, NUMERIC_FIELDS, SEASON_RANK
from .dataset import Dataset
from .errors import (
    DimensionMismatch,
    LengthMismatch,
    RankDeficient,
    TooFewValues,
    UnknownColumn,
    ZeroVariance,
)


def skewness(values) -> float:
    """Moment skewness g1 = m3 / m2^(3/2), central moments over n."""
    x = np.asarray(values, dtype=float)
    if x.size < 3:
        raise TooFewValues(f"skewness needs n >= 3, got {x.size}")
    d = x - x.mean()
    m2 = float(np.mean(d * d))
    if m2 == 0.0:
        raise ZeroVariance("skewness undefined for a constant sample")
    m3 = float(np.mean(d * d * d))
    return m3 / m2 ** 1.5


def pearson_correlation(x, y) -> float:
    """Sample Pearson correlation coefficient."""
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    if xa.size != ya.size:
        raise LengthMismatch(f"{xa.size} vs {ya.size}")
    if xa.size < 2:
        raise TooFewValues("correlation needs n >= 2")
    dx = xa - xa.mean()
    dy = ya - ya.mean()
    sx = float(np.sqrt(np.sum(dx * dx)))
    sy = float(np.sqrt(np.sum(dy * dy)))
    if sx == 0.0 or sy == 0.0:
        raise ZeroVariance("correlation undefined for a constant argument")
    r = float(np.sum(dx * dy)) / (sx * sy)
    return min(1.0, max(-1.0, r))


@dataclass
class CorrelationMatrix:
    labels: list[str]
    values: np.ndarray  # square, symmetric, unit diagonal

    def lookup(self, a: str, b: str) -> float:
        return float(self.values[self.labels.index(a), self.labels.index(b)])


def correlation_matrix(dataset: Dataset, columns: list[str]) -> CorrelationMatrix:
    """Pairwise Pearson correlations over the named numeric columns."""
    if len(columns) < 2:
        raise TooFewValues("need at least two columns")
    series = {}
    for name in columns:
        vals = dataset.numeric(name)
        if np.isnan(vals).any():
            raise ZeroVariance(f"column {name!r} has missing values; clean first")
        series[name] = vals
    m = len(columns)
    out = np.eye(m)
    for i in range(m):
        for j in range(i + 1, m):
            try:
                r = pearson_correlation(series[columns[i]], series[columns[j]])
            except ZeroVariance as exc:
                raise ZeroVariance(f"pair ({columns[i]}, {columns[j]}): {exc}") from None
            out[i, j] = out[j, i] = r
    return CorrelationMatrix(labels=list(columns), values=out)


def ols_fit(design: np.ndarray, target: np.ndarray):
    """Least squares via SVD; returns (coefficients, r_squared).

    The design matrix must carry its own intercept column and have full
    column rank. r_squared is computed against the centered target.
    """
    x = np.asarray(design, dtype=float)
    y = np.asarray(target, dtype=float)
    if x.ndim != 2 or y.ndim != 1 or x.shape[0] != y.shape[0]:
        raise DimensionMismatch(f"design {x.shape}, target {y.shape}")
    n, p = x.shape
    if n <= p:
        raise DimensionMismatch(f"need n > p, got n={n}, p={p}")
    coef, _, rank, _ = np.linalg.lstsq(x, y, rcond=None)
    if rank < p:
        raise RankDeficient(f"design rank {rank} < {p} columns")
    resid = y - x @ coef
    rss = float(resid @ resid)
    dy = y - y.mean()
    tss = float(dy @ dy)
    if tss == 0.0:
        raise ZeroVariance("target is constant")
    r_squared = 1.0 - rss / tss
    return coef, min(1.0, max(0.0, r_squared))


class VifSeverity(enum.Enum):
    LOW = "Low"
    MODERATE = "Moderate"
    HIGH = "High"


def _severity(vif: float) -> VifSeverity:
    if vif < 5.0:
        return VifSeverity.LOW
    if vif <= 10.0:
        return VifSeverity.MODERATE
    return VifSeverity.HIGH


@dataclass(frozen=True)
class VifEntry:
    column: str
    r_squared: float
    vif: float  # inf when the column is an exact combination of the others
    severity: VifSeverity

    @property
    def perfectly_collinear(self) -> bool:
        return not np.isfinite(self.vif)


def vif_from_r_squared(r_squared: float) -> float:
    return 1.0 / (1.0 - r_squared)


def vif_table(dataset: Dataset, columns: list[str]) -> list[VifEntry]:
    """Variance inflation factor of each column against all the others.

    Each column is regressed (with intercept) on the remaining listed
    columns; VIF = 1/(1 - R^2). R^2 >= 1 - 1e-12 is reported as an
    infinite-VIF entry rather than a crash.
    """
    if len(columns) < 3:
        raise TooFewValues("VIF needs at least three columns")
    mat = np.column_stack([dataset.numeric(c) for c in columns])
    if np.isnan(mat).any():
        raise ZeroVariance("missing values present; clean before VIF")
    for idx, name in enumerate(columns):
        if np.all(mat[:, idx] == mat[0, idx]):
            raise ZeroVariance(f"column {name!r} is constant")
    out = []
    n = mat.shape[0]
    for idx, name in enumerate(columns):
        others = np.delete(mat, idx, axis=1)
        design = np.column_stack([np.ones(n), others])
        _, r2 = ols_fit(design, mat[:, idx])
        if r2 >= 1.0 - 1e-12:
            out.append(VifEntry(name, r2, float("inf"), VifSeverity.HIGH))
        else:
            v = vif_from_r_squared(r2)
            out.append(VifEntry(name, r2, v, _severity(v)))
    return out


def vif_with_aliases(dataset: Dataset, columns: list[str]) -> list[VifEntry]:
    """VIF table that survives exact linear identities among the columns.

    Columns that are exact combinations of earlier ones (e.g. a total that
    is the sum of two parts) would make every auxiliary regression rank
    deficient; they are reported directly as infinite-VIF entries and the
    regressions run on the independent remainder.
    """
    mat = np.column_stack([dataset.numeric(c) for c in columns])
    kept: list[str] = []
    aliased: list[str] = []
    basis = np.empty((mat.shape[0], 0))
    for i, name in enumerate(columns):
        candidate = np.column_stack([basis, mat[:, i]])
        if np.linalg.matrix_rank(candidate) == candidate.shape[1]:
            kept.append(name)
            basis = candidate
        else:
            aliased.append(name)
    entries = vif_table(dataset, kept) if len(kept) >= 3 else []
    entries += [VifEntry(name, 1.0, float("inf"), VifSeverity.HIGH) for name in aliased]
    order = {c: i for i, c in enumerate(columns)}
    entries.sort(key=lambda e: order[e.column])
    return entries


class GroupStat(enum.Enum):
    MEAN = "Mean"
    STD = "Std"


def grouped_aggregate(dataset: Dataset, value_column: str, group_column: str,
                      stat: GroupStat) -> list[tuple[str, float]]:
    """One (group, stat) row per distinct group value.

    Seasons are ordered by their chronological rank, years ascending, other
    groups lexicographically. Std is the sample standard deviation (0 for
    singleton groups).
    """
    if group_column not in set(CATEGORICAL_FIELDS) | {"year"}:
        raise UnknownColumn(group_column)
    if value_column not in NUMERIC_FIELDS and value_column not in dataset.extra_columns:
        raise UnknownColumn(value_column)
    values = dataset.numeric(value_column)
    groups = [str(getattr(r, group_column)) for r in dataset.records]
    buckets: dict[str, list[float]] = {}
    for g, v in zip(groups, values):
        buckets.setdefault(g, []).append(v)
    if group_column == "season":
        order = sorted(buckets, key=lambda s: SEASON_RANK[s])
    elif group_column == "year":
        order = sorted(buckets, key=int)
    else:
        order = sorted(buckets)
    out = []
    for g in order:
        arr = np.array(buckets[g])
        if stat is GroupStat.MEAN:
            out.append((g, float(arr.mean())))
        else:
            out.append((g, float(np.std(arr, ddof=1)) if arr.size > 1 else 0.0))
    return out


def iqr_flags(values) -> np.ndarray:
    """True where a value falls outside [Q1 - 1.5*IQR, Q3 + 1.5*IQR]."""
    x = np.asarray(values, dtype=float)
    if x.size < 4:
        raise TooFewValues("IQR flags need n >= 4")
    q1, q3 = np.quantile(x, [0.25, 0.75])
    iqr = q3 - q1
    return (x < q1 - 1.5 * iqr) | (x > q3 + 1.5 * iqr)


# -- CSV emission ---------------------------------------------------------------


def skewness_table(dataset: Dataset, columns: list[str]) -> list[tuple[str, float]]:
    return [(FIELD_TO_COLUMN.get(c, c), skewness(dataset.numeric(c))) for c in columns]


def write_csv_rows(path, header: list[str], rows) -> None:
    import csv
    from pathlib import Path

    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(list(row))
