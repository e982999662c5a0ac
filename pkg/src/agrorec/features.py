"""Temporal ordering, grouped lag construction and design-matrix encoding.

Lag columns hold values of earlier rows within a group under the temporal
order, so they never see the future. Encoding (one-hot + standardization)
is fitted on training rows only and applied to anything else.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np

from .constants import (
    CROP_INDEX,
    CROPS,
    DEFAULT_CATEGORICAL_FEATURES,
    DEFAULT_NUMERIC_FEATURES,
    NUMERIC_FIELDS,
    SEASON_RANK,
    SEASONS,
    STATES,
)
from .dataset import CropRecord, Dataset
from .errors import EmptyTraining, NonNumericColumn, NotSorted, UnknownLabel, UnknownSeason


def temporal_key(record: CropRecord) -> tuple[int, int]:
    """(year, season rank); the season order within a year is fixed."""
    try:
        return record.year, SEASON_RANK[record.season]
    except KeyError:
        raise UnknownSeason(record.season) from None


def temporal_sort(dataset: Dataset) -> Dataset:
    """Stable sort by (year, season rank); ties keep their input order."""
    keys = [temporal_key(r) for r in dataset.records]
    order = sorted(range(len(keys)), key=keys.__getitem__)
    return dataset.take(order)


def is_temporally_sorted(dataset: Dataset) -> bool:
    keys = [temporal_key(r) for r in dataset.records]
    return all(keys[i] <= keys[i + 1] for i in range(len(keys) - 1))


class ImputePolicy(enum.Enum):
    GROUP_MEDIAN = "GroupMedian"
    CARRY_CURRENT = "CarryCurrent"
    DROP_ROW = "DropRow"


class OrderKey(enum.Enum):
    YEAR = "Year"
    SEASON_WITHIN_GROUP = "SeasonWithinGroup"


@dataclass(frozen=True)
class LagSpec:
    columns: tuple[str, ...]
    group_keys: tuple[str, ...]
    order_key: OrderKey = OrderKey.YEAR
    max_order: int = 1
    impute_policy: ImputePolicy = ImputePolicy.GROUP_MEDIAN

    def __post_init__(self):
        if self.max_order < 1:
            raise ValueError("max_order must be >= 1")
        if not self.group_keys:
            raise ValueError("group_keys must be nonempty")


# Defaults matching the evaluation pipeline: yearly lags on the economic
# columns grouped by (state, crop); seasonal lags on the weather columns
# grouped by (state, crop, season) so "previous" means the same season in
# an earlier year.
YEAR_LAG_SPEC = LagSpec(
    columns=("operational_cost", "fixed_cost", "total_cost", "msp"),
    group_keys=("state", "crop"),
    order_key=OrderKey.YEAR,
    max_order=5,
)
SEASON_LAG_SPEC = LagSpec(
    columns=("temperature", "precipitation", "humidity", "wind_speed"),
    group_keys=("state", "crop", "season"),
    order_key=OrderKey.SEASON_WITHIN_GROUP,
    max_order=7,
)


@dataclass
class LagReport:
    """Counts of history-poor positions and how they were resolved."""
    imputed: dict = field(default_factory=dict)  # column name -> count
    dropped_rows: int = 0


def make_lags(dataset: Dataset, spec: LagSpec) -> tuple[Dataset, LagReport]:
    """Add lag_{j}_{column} for j = 1..max_order, shifted within each group.

    The dataset must already be temporally sorted; each group's rows keep
    dataset order, and lag j of a row is the value j rows earlier in its
    group. Positions without enough history resolve per the impute policy.
    """
    if not is_temporally_sorted(dataset):
        raise NotSorted("make_lags requires a temporally sorted dataset")
    for col in spec.columns:
        if col not in NUMERIC_FIELDS and col not in dataset.extra_columns:
            raise NonNumericColumn(col)

    n = len(dataset.records)
    groups: dict[tuple, list[int]] = {}
    for i, rec in enumerate(dataset.records):
        key = tuple(getattr(rec, g) for g in spec.group_keys)
        groups.setdefault(key, []).append(i)

    report = LagReport()
    new_cols: dict[str, np.ndarray] = {}
    missing_any = np.zeros(n, dtype=bool)
    for col in spec.columns:
        base = dataset.numeric(col)
        for j in range(1, spec.max_order + 1):
            lagged = np.full(n, np.nan)
            for idx in groups.values():
                for pos in range(j, len(idx)):
                    lagged[idx[pos]] = base[idx[pos - j]]
            name = f"lag{j}_{col}"
            miss = np.isnan(lagged)
            if miss.any():
                report.imputed[name] = int(miss.sum())
                if spec.impute_policy is ImputePolicy.GROUP_MEDIAN:
                    for idx in groups.values():
                        gvals = lagged[idx]
                        gmiss = np.isnan(gvals)
                        if not gmiss.any():
                            continue
                        defined = gvals[~gmiss]
                        if defined.size:
                            fill = float(np.median(defined))
                            gvals[gmiss] = fill
                            lagged[idx] = gvals
                    still = np.isnan(lagged)
                    if still.any():
                        defined = lagged[~still]
                        if defined.size:
                            lagged[still] = float(np.median(defined))
                        else:
                            lagged[still] = base[still]
                elif spec.impute_policy is ImputePolicy.CARRY_CURRENT:
                    lagged[miss] = base[miss]
                else:  # DROP_ROW: resolved after all columns are built
                    missing_any |= miss
            new_cols[name] = lagged

    out = replace(dataset, extra_columns=dict(dataset.extra_columns))
    out.extra_columns.update(new_cols)
    if spec.impute_policy is ImputePolicy.DROP_ROW and missing_any.any():
        keep = np.nonzero(~missing_any)[0]
        report.dropped_rows = int(missing_any.sum())
        out = out.take(keep)
    return out, report


# -- encoding -------------------------------------------------------------------


@dataclass(frozen=True)
class EncodingConfig:
    numeric_features: tuple[str, ...] = DEFAULT_NUMERIC_FEATURES
    categorical_features: tuple[str, ...] = DEFAULT_CATEGORICAL_FEATURES
    standardize: bool = True
    include_lags: bool = True


@dataclass
class EncodingModel:
    numeric_columns: list[str]          # surviving standardized columns, in order
    means: np.ndarray
    stds: np.ndarray
    one_hot_map: dict                    # categorical column -> ordered category list
    feature_names: list[str]
    dropped_constant: list[str]
    standardize: bool
    class_names: tuple[str, ...] = CROPS
    unseen_category_count: int = 0

    def n_features(self) -> int:
        return len(self.feature_names)


def _category_order(column: str, seen: set[str]) -> list[str]:
    """Fixed global orders: seasons by rank, states by canonical list, the
    rest lexicographic. Only categories seen in training are kept."""
    if column == "season":
        return [s for s in SEASONS if s in seen]
    if column == "state":
        canon = [s for s in STATES if s in seen]
        return canon + sorted(seen - set(canon))
    return sorted(seen)


def encode_fit(train: Dataset, config: EncodingConfig = EncodingConfig()) -> EncodingModel:
    """Fit one-hot maps and standardization statistics on training rows only.

    Constant numeric columns are dropped from the standardized set and
    recorded. With standardization on, applying the model to its own
    training rows yields per-feature mean 0 and std 1.
    """
    if len(train.records) == 0:
        raise EmptyTraining("encoding requires at least one training row")
    numeric = list(config.numeric_features)
    if config.include_lags:
        numeric += sorted(train.extra_columns)
    cols = []
    means = []
    stds = []
    dropped = []
    for name in numeric:
        vals = train.numeric(name)
        if np.isnan(vals).any():
            raise NonNumericColumn(f"{name} has missing values")
        mu = float(vals.mean())
        sd = float(vals.std(ddof=0))
        if sd == 0.0:
            dropped.append(name)
            continue
        cols.append(name)
        means.append(mu)
        stds.append(sd)
    one_hot = {}
    for name in config.categorical_features:
        seen = set(str(getattr(r, name)) for r in train.records)
        one_hot[name] = _category_order(name, seen)
    feature_names = list(cols)
    for name, cats in one_hot.items():
        feature_names += [f"{name}={c}" for c in cats]
    return EncodingModel(
        numeric_columns=cols,
        means=np.array(means),
        stds=np.array(stds),
        one_hot_map=one_hot,
        feature_names=feature_names,
        dropped_constant=dropped,
        standardize=config.standardize,
    )


def encode_apply(dataset: Dataset, model: EncodingModel, with_labels: bool = True):
    """Encode records into (X, y) using train-fitted statistics.

    Unseen categories map to an all-zero one-hot block and increment the
    model's counter. Labels are indices into the fixed class list; a crop
    outside it raises UnknownLabel.
    """
    n = len(dataset.records)
    blocks = []
    if model.numeric_columns:
        num = np.column_stack([dataset.numeric(c) for c in model.numeric_columns])
        if np.isnan(num).any():
            raise NonNumericColumn("missing values in numeric features")
        if model.standardize:
            num = (num - model.means) / model.stds
        blocks.append(num)
    for name, cats in model.one_hot_map.items():
        block = np.zeros((n, len(cats)))
        index = {c: i for i, c in enumerate(cats)}
        for row, rec in enumerate(dataset.records):
            pos = index.get(str(getattr(rec, name)))
            if pos is None:
                model.unseen_category_count += 1
            else:
                block[row, pos] = 1.0
        blocks.append(block)
    x = np.hstack(blocks) if blocks else np.zeros((n, 0))
    if not with_labels:
        return x, None
    y = np.empty(n, dtype=np.int64)
    for i, rec in enumerate(dataset.records):
        if rec.crop not in CROP_INDEX:
            raise UnknownLabel(f"crop {rec.crop!r} is not one of the {len(CROPS)} classes")
        y[i] = CROP_INDEX[rec.crop]
    return x, y
