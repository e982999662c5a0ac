"""Parsing, key normalization, merging and cleaning of the two CSV sources.

The environmental source has one row per (state, district, year, season,
crop); the economic source has one row per (state, year, crop). Merging is
an inner join on (state, year, crop) that broadcasts the economic values to
every matching environmental row. Every row-changing step is appended to an
audit log so the cleaned dataset is reproducible from the log alone.
"""

from __future__ import annotations

import csv
import enum
import importlib.resources
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .constants import (
    CLEANED_HEADER,
    COLUMN_TO_FIELD,
    CROPS,
    DEFAULT_KEEP_YEARS,
    ECON_HEADER,
    ENV_HEADER,
    FIELD_TO_COLUMN,
    NUMERIC_FIELDS,
    SEASONS,
    STATES,
)
from .errors import (
    EmptyDataset,
    EmptyJoin,
    HeaderMismatch,
    MissingFile,
    RaggedRow,
    TooMuchMissing,
    TypeCoercion,
    UnknownSeason,
)


class Schema(enum.Enum):
    ENVIRONMENTAL = "environmental"
    ECONOMIC = "economic"


SCHEMA_HEADERS = {
    Schema.ENVIRONMENTAL: ENV_HEADER,
    Schema.ECONOMIC: ECON_HEADER,
}


class CleaningRule(enum.Enum):
    KEY_NORMALIZATION = "KeyNormalization"
    DROP_MISSING_PRODUCTION = "DropMissingProduction"
    DROP_YEAR = "DropYear"
    YIELD_OUTLIER_REMOVAL = "YieldOutlierRemoval"
    DUPLICATE_CHECK = "DuplicateCheck"
    # Extra audit events beyond the row-removal rules.
    UNMATCHED_ROW = "UnmatchedRow"
    OUTLIER_SCAN = "OutlierScan"


@dataclass(frozen=True)
class CleaningAction:
    rule: CleaningRule
    rows_affected: int
    detail: str = ""

    def __post_init__(self):
        if self.rows_affected < 0:
            raise ValueError("rows_affected must be >= 0")

    def as_line(self) -> str:
        return f"{self.rule.value}\t{self.rows_affected}\t{self.detail}"


@dataclass
class CropRecord:
    state: str
    district: str
    year: int
    season: str  # one of SEASONS
    crop: str
    area: float
    temperature: float
    wind_speed: float
    precipitation: float
    humidity: float
    soil_type: str
    n: float
    p: float
    k: float
    production: float | None = None
    operational_cost: float = 0.0
    fixed_cost: float = 0.0
    total_cost: float = 0.0
    msp: float = 0.0
    yield_: float | None = None


@dataclass(frozen=True)
class ColumnInfo:
    name: str
    kind: str  # "numeric" | "categorical"
    unit: str = ""


COLUMNS: tuple[ColumnInfo, ...] = (
    ColumnInfo("State Names", "categorical"),
    ColumnInfo("District Names", "categorical"),
    ColumnInfo("Crop Year", "numeric", "calendar year"),
    ColumnInfo("Season Names", "categorical"),
    ColumnInfo("Crop Names", "categorical"),
    ColumnInfo("Area", "numeric", "hectare"),
    ColumnInfo("Temperature", "numeric", "deg C"),
    ColumnInfo("Wind Speed", "numeric"),
    ColumnInfo("Precipitation", "numeric"),
    ColumnInfo("Humidity", "numeric", "percent"),
    ColumnInfo("Soil Type", "categorical"),
    ColumnInfo("N", "numeric"),
    ColumnInfo("P", "numeric"),
    ColumnInfo("K", "numeric"),
    ColumnInfo("Production", "numeric", "tonne"),
    ColumnInfo("Operational Cost", "numeric", "Rs/hectare"),
    ColumnInfo("Fixed Cost", "numeric", "Rs/hectare"),
    ColumnInfo("Total Cost", "numeric", "Rs/hectare"),
    ColumnInfo("MSP", "numeric", "Rs"),
    ColumnInfo("Yield", "numeric", "tonne/hectare"),
)


@dataclass
class Dataset:
    records: list[CropRecord]
    columns: tuple[ColumnInfo, ...] = COLUMNS
    provenance: dict = field(default_factory=dict)
    cleaning_log: list[CleaningAction] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    # Derived columns (lags) as parallel float arrays, row-aligned to records.
    extra_columns: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.records)

    def numeric(self, name: str) -> np.ndarray:
        """Column values as float64 with NaN for missing entries.

        Accepts CropRecord field names or derived column names.
        """
        if name in self.extra_columns:
            return np.asarray(self.extra_columns[name], dtype=float)
        vals = [getattr(r, name) for r in self.records]
        return np.array([np.nan if v is None else float(v) for v in vals])

    def categorical(self, name: str) -> list[str]:
        return [str(getattr(r, name)) for r in self.records]

    def numeric_field_names(self) -> list[str]:
        return [f for f in NUMERIC_FIELDS] + sorted(self.extra_columns)

    def take(self, indices) -> "Dataset":
        """Row subset/reorder; extra columns follow the records."""
        idx = list(indices)
        return replace(
            self,
            records=[self.records[i] for i in idx],
            cleaning_log=list(self.cleaning_log),
            warnings=list(self.warnings),
            extra_columns={k: np.asarray(v)[idx] for k, v in self.extra_columns.items()},
        )

    def log(self, rule: CleaningRule, rows_affected: int, detail: str = "") -> None:
        self.cleaning_log.append(CleaningAction(rule, rows_affected, detail))


@dataclass(frozen=True)
class CleaningConfig:
    keep_years: tuple[int, ...] = DEFAULT_KEEP_YEARS
    max_missing_fraction: float = 0.05
    yield_outlier_k: float = 10.0
    total_cost_tolerance: float = 1.0


# -- parsing ------------------------------------------------------------------


def parse_csv(path: str | Path, schema: Schema) -> list[dict]:
    """Read one raw source file into a list of column->string maps.

    No numeric coercion happens here. Raises MissingFile, HeaderMismatch
    (required schema columns absent) or RaggedRow (cell count differs from
    the header, reported with the 1-based line number).
    """
    path = Path(path)
    if not path.exists():
        raise MissingFile(str(path))
    required = SCHEMA_HEADERS[schema]
    with path.open(newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise HeaderMismatch(list(required), str(path)) from None
        header = [h.strip() for h in header]
        missing = [c for c in required if c not in header]
        if missing:
            raise HeaderMismatch(missing, str(path))
        rows = []
        for line_no, cells in enumerate(reader, start=2):
            if not cells:
                continue
            if len(cells) != len(header):
                raise RaggedRow(line_no, len(header), len(cells))
            rows.append(dict(zip(header, cells)))
    return rows


def load_alias_table() -> dict[str, dict[str, str]]:
    """Alias map per kind (state/crop/season), casefolded alias -> canonical."""
    table: dict[str, dict[str, str]] = {"state": {}, "crop": {}, "season": {}}
    ref = importlib.resources.files("agrorec").joinpath("data/aliases.csv")
    reader = csv.DictReader(ref.read_text(encoding="utf-8").splitlines())
    for row in reader:
        table[row["kind"]][_squash(row["alias"])] = row["canonical"]
    return table


def _squash(name: str) -> str:
    return " ".join(name.split()).casefold()


_CANONICAL = {
    "state": {_squash(s): s for s in STATES},
    "crop": {_squash(c): c for c in CROPS},
    "season": {_squash(s): s for s in SEASONS},
}

_KEY_COLUMNS = {
    "State Names": "state",
    "Crop Names": "crop",
    "Season Names": "season",
}


def normalize_keys(rows: list[dict], aliases: dict | None = None):
    """Map state/crop/season names through the canonical alias table.

    Matching is case-insensitive and whitespace-insensitive. Unknown names
    pass through unchanged and are reported in the returned warning list.
    Returns (rows, changed_cell_count, warnings). Idempotent.
    """
    aliases = aliases if aliases is not None else load_alias_table()
    changed = 0
    unknown: dict[str, None] = {}
    out = []
    for row in rows:
        new = dict(row)
        for col, kind in _KEY_COLUMNS.items():
            if col not in new:
                continue
            raw = new[col]
            key = _squash(raw)
            canon = _CANONICAL[kind].get(key) or aliases.get(kind, {}).get(key)
            if canon is None:
                cleaned = " ".join(raw.split())
                if cleaned != raw:
                    new[col] = cleaned
                    changed += 1
                unknown.setdefault(f"unknown {kind} name: {cleaned!r}")
            elif canon != raw:
                new[col] = canon
                changed += 1
        out.append(new)
    return out, changed, list(unknown)


# -- merging ------------------------------------------------------------------


def _coerce_float(row_no: int, column: str, value: str, allow_missing: bool = False,
                  minimum: float | None = None) -> float | None:
    s = value.strip()
    if s == "" or s.upper() in ("NA", "NAN"):
        if allow_missing:
            return None
        raise TypeCoercion(row_no, column, value)
    try:
        v = float(s)
    except ValueError:
        raise TypeCoercion(row_no, column, value) from None
    if not np.isfinite(v) or (minimum is not None and v < minimum):
        raise TypeCoercion(row_no, column, value)
    return v


def _coerce_year(row_no: int, column: str, value: str) -> int:
    v = _coerce_float(row_no, column, value)
    if v != int(v):
        raise TypeCoercion(row_no, column, value)
    return int(v)


def _coerce_season(row_no: int, value: str) -> str:
    key = _squash(value)
    canon = _CANONICAL["season"].get(key)
    if canon is None:
        raise UnknownSeason(f"row {row_no}: unrecognized season {value!r}")
    return canon


def merge_sources(env_rows: list[dict], econ_rows: list[dict],
                  total_cost_tolerance: float = 1.0) -> Dataset:
    """Inner join on (state, year, crop), broadcasting economic values.

    Unmatched rows on either side are counted in the cleaning log. Numeric
    coercion failures raise TypeCoercion with the offending row and column;
    a join with zero matches raises EmptyJoin.
    """
    econ_by_key: dict[tuple, dict] = {}
    dup_econ = 0
    for i, row in enumerate(econ_rows, start=2):
        key = (row["State Names"], _coerce_year(i, "Crop Year", row["Crop Year"]),
               row["Crop Names"])
        if key in econ_by_key:
            dup_econ += 1
            continue
        econ_by_key[key] = {
            "operational_cost": _coerce_float(i, "Operational Cost", row["Operational Cost"], minimum=0.0),
            "fixed_cost": _coerce_float(i, "Fixed Cost", row["Fixed Cost"], minimum=0.0),
            "total_cost": _coerce_float(i, "Total Cost", row["Total Cost"], minimum=0.0),
            "msp": _coerce_float(i, "MSP", row["MSP"], minimum=0.0),
        }

    records = []
    matched_keys = set()
    unmatched_env = 0
    cost_mismatch = 0
    for i, row in enumerate(env_rows, start=2):
        year = _coerce_year(i, "Crop Year", row["Crop Year"])
        key = (row["State Names"], year, row["Crop Names"])
        econ = econ_by_key.get(key)
        if econ is None:
            unmatched_env += 1
            continue
        matched_keys.add(key)
        rec = CropRecord(
            state=row["State Names"],
            district=row["District Names"],
            year=year,
            season=_coerce_season(i, row["Season Names"]),
            crop=row["Crop Names"],
            area=_coerce_float(i, "Area", row["Area"], minimum=0.0),
            temperature=_coerce_float(i, "Temperature", row["Temperature"]),
            wind_speed=_coerce_float(i, "Wind Speed", row["Wind Speed"]),
            precipitation=_coerce_float(i, "Precipitation", row["Precipitation"]),
            humidity=_coerce_float(i, "Humidity", row["Humidity"]),
            soil_type=row["Soil Type"].strip(),
            n=_coerce_float(i, "N", row["N"]),
            p=_coerce_float(i, "P", row["P"]),
            k=_coerce_float(i, "K", row["K"]),
            production=_coerce_float(i, "Production", row["Production"], allow_missing=True),
            **econ,
        )
        if abs(rec.total_cost - (rec.operational_cost + rec.fixed_cost)) > total_cost_tolerance:
            cost_mismatch += 1
        records.append(rec)

    if not records:
        raise EmptyJoin("no environmental row matched an economic row")

    ds = Dataset(records=records)
    unmatched_econ = len(econ_by_key) - len(matched_keys)
    if unmatched_env or unmatched_econ:
        ds.log(CleaningRule.UNMATCHED_ROW, unmatched_env + unmatched_econ,
               f"environmental rows without economic match: {unmatched_env}; "
               f"economic keys never matched: {unmatched_econ}")
    if dup_econ:
        ds.warnings.append(f"duplicate economic keys ignored: {dup_econ}")
    if cost_mismatch:
        ds.warnings.append(
            f"total cost differs from operational+fixed beyond "
            f"{total_cost_tolerance} on {cost_mismatch} rows")
    return ds


def derive_yield(dataset: Dataset) -> Dataset:
    """Populate yield = production / area.

    Rows with missing production keep yield unset (cleaning removes them).
    Rows with production present but zero area are flagged, never divided.
    """
    zero_area = 0
    for rec in dataset.records:
        if rec.production is None:
            rec.yield_ = None
        elif rec.area > 0:
            rec.yield_ = rec.production / rec.area
        else:
            rec.yield_ = None
            zero_area += 1
    if zero_area:
        dataset.warnings.append(f"zero-area rows with production present: {zero_area}")
    return dataset


# -- cleaning -----------------------------------------------------------------


def clean_dataset(dataset: Dataset, config: CleaningConfig = CleaningConfig()):
    """Apply the row-removal rules, in order, appending one action per rule.

    (a) drop years outside config.keep_years; (b) drop rows whose yield is
    underivable, provided missing production stays under the policy ceiling;
    (c) drop extreme-yield rows above Q3 + k*IQR; (d) detect (never remove)
    1.5*IQR outliers in the other numeric columns; (e) flag duplicate rows.
    Returns (cleaned dataset, list of actions appended by this call).
    """
    before = len(dataset.cleaning_log)
    records = list(dataset.records)

    keep = set(config.keep_years)
    kept = [r for r in records if r.year in keep]
    if len(kept) != len(records):
        dropped_years = sorted({r.year for r in records} - keep)
        dataset.log(CleaningRule.DROP_YEAR, len(records) - len(kept),
                    f"kept years {sorted(keep)}; removed years {dropped_years}")
    records = kept

    missing = [r for r in records if r.production is None]
    if records and len(missing) / len(records) >= config.max_missing_fraction:
        raise TooMuchMissing(
            f"{len(missing)} of {len(records)} rows lack production "
            f"({len(missing) / len(records):.1%} >= {config.max_missing_fraction:.0%})")
    zero_area = [r for r in records if r.production is not None and r.yield_ is None]
    if missing or zero_area:
        dataset.log(CleaningRule.DROP_MISSING_PRODUCTION, len(missing) + len(zero_area),
                    f"missing production: {len(missing)}; zero area: {len(zero_area)}")
        records = [r for r in records if r.yield_ is not None]

    yields = np.array([r.yield_ for r in records], dtype=float)
    if yields.size >= 4:
        q1, q3 = np.quantile(yields, [0.25, 0.75])
        fence = q3 + config.yield_outlier_k * (q3 - q1)
        flagged = yields > fence
        if flagged.any():
            dataset.log(CleaningRule.YIELD_OUTLIER_REMOVAL, int(flagged.sum()),
                        f"yield > Q3 + {config.yield_outlier_k:g}*IQR = {fence:.6g}")
            records = [r for r, f in zip(records, flagged) if not f]

    detected = []
    for fname in NUMERIC_FIELDS:
        if fname == "yield_":
            continue
        vals = np.array([getattr(r, fname) for r in records], dtype=float)
        if vals.size < 4:
            continue
        q1, q3 = np.quantile(vals, [0.25, 0.75])
        iqr = q3 - q1
        n_out = int(((vals < q1 - 1.5 * iqr) | (vals > q3 + 1.5 * iqr)).sum())
        if n_out:
            detected.append(f"{FIELD_TO_COLUMN[fname]}: {n_out}")
    dataset.log(CleaningRule.OUTLIER_SCAN, 0,
                "outliers detected but retained -- " + ("; ".join(detected) if detected else "none"))

    seen: dict[tuple, int] = {}
    for r in records:
        key = (r.state, r.district, r.year, r.season, r.crop, r.area)
        seen[key] = seen.get(key, 0) + 1
    dups = sum(c - 1 for c in seen.values() if c > 1)
    dataset.log(CleaningRule.DUPLICATE_CHECK, dups,
                "duplicate (state, district, year, season, crop, area) rows retained"
                if dups else "no duplicated instances")

    dataset.records = records
    dataset.extra_columns = {}
    return dataset, dataset.cleaning_log[before:]


@dataclass(frozen=True)
class ColumnSummary:
    column: str
    count: int
    missing: int
    minimum: float
    q1: float
    median: float
    q3: float
    maximum: float
    mean: float
    std: float


def summarize_columns(dataset: Dataset) -> list[ColumnSummary]:
    """Per numeric column: count, missing, five-number summary, mean, std.

    Quartiles use linear interpolation between order statistics; std is the
    sample standard deviation (0 for singleton columns).
    """
    if not dataset.records:
        raise EmptyDataset("cannot summarize an empty dataset")
    out = []
    for fname in dataset.numeric_field_names():
        vals = dataset.numeric(fname)
        present = vals[~np.isnan(vals)]
        missing = int(np.isnan(vals).sum())
        if present.size == 0:
            continue
        q1, med, q3 = np.quantile(present, [0.25, 0.5, 0.75])
        std = float(np.std(present, ddof=1)) if present.size > 1 else 0.0
        out.append(ColumnSummary(
            column=FIELD_TO_COLUMN.get(fname, fname),
            count=int(present.size),
            missing=missing,
            minimum=float(present.min()),
            q1=float(q1),
            median=float(med),
            q3=float(q3),
            maximum=float(present.max()),
            mean=float(present.mean()),
            std=std,
        ))
    return out


# -- I/O ----------------------------------------------------------------------


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_cleaned_csv(dataset: Dataset, path: str | Path) -> None:
    """Cleaned dataset as CSV: the 20-column schema plus any derived columns."""
    extra_names = sorted(dataset.extra_columns)
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(CLEANED_HEADER) + extra_names)
        for i, rec in enumerate(dataset.records):
            row = [_format_cell(getattr(rec, COLUMN_TO_FIELD[c])) for c in CLEANED_HEADER]
            row += [_format_cell(float(dataset.extra_columns[name][i])) for name in extra_names]
            writer.writerow(row)


def read_cleaned_csv(path: str | Path) -> Dataset:
    """Read a CSV written by write_cleaned_csv (derived columns included)."""
    path = Path(path)
    if not path.exists():
        raise MissingFile(str(path))
    with path.open(newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise HeaderMismatch(list(CLEANED_HEADER), str(path)) from None
        missing = [c for c in CLEANED_HEADER if c not in header]
        if missing:
            raise HeaderMismatch(missing, str(path))
        extra_names = [c for c in header if c not in CLEANED_HEADER]
        records = []
        extras: dict[str, list[float]] = {name: [] for name in extra_names}
        for line_no, cells in enumerate(reader, start=2):
            if not cells:
                continue
            if len(cells) != len(header):
                raise RaggedRow(line_no, len(header), len(cells))
            row = dict(zip(header, cells))
            rec = CropRecord(
                state=row["State Names"],
                district=row["District Names"],
                year=_coerce_year(line_no, "Crop Year", row["Crop Year"]),
                season=_coerce_season(line_no, row["Season Names"]),
                crop=row["Crop Names"],
                area=_coerce_float(line_no, "Area", row["Area"], minimum=0.0),
                temperature=_coerce_float(line_no, "Temperature", row["Temperature"]),
                wind_speed=_coerce_float(line_no, "Wind Speed", row["Wind Speed"]),
                precipitation=_coerce_float(line_no, "Precipitation", row["Precipitation"]),
                humidity=_coerce_float(line_no, "Humidity", row["Humidity"]),
                soil_type=row["Soil Type"].strip(),
                n=_coerce_float(line_no, "N", row["N"]),
                p=_coerce_float(line_no, "P", row["P"]),
                k=_coerce_float(line_no, "K", row["K"]),
                production=_coerce_float(line_no, "Production", row["Production"], allow_missing=True),
                operational_cost=_coerce_float(line_no, "Operational Cost", row["Operational Cost"], minimum=0.0),
                fixed_cost=_coerce_float(line_no, "Fixed Cost", row["Fixed Cost"], minimum=0.0),
                total_cost=_coerce_float(line_no, "Total Cost", row["Total Cost"], minimum=0.0),
                msp=_coerce_float(line_no, "MSP", row["MSP"], minimum=0.0),
                yield_=_coerce_float(line_no, "Yield", row["Yield"], allow_missing=True),
            )
            records.append(rec)
            for name in extra_names:
                extras[name].append(_coerce_float(line_no, name, row[name]))
    ds = Dataset(records=records, provenance={"source": str(path)})
    ds.extra_columns = {name: np.array(vals) for name, vals in extras.items()}
    return ds


def write_cleaning_log(dataset: Dataset, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for action in dataset.cleaning_log:
            fh.write(action.as_line() + "\n")
        for warning in dataset.warnings:
            fh.write(f"warning\t0\t{warning}\n")


def ingest_files(env_path: str | Path, econ_path: str | Path,
                 config: CleaningConfig = CleaningConfig()) -> Dataset:
    """Full ingestion pipeline: parse, normalize, merge, derive yield, clean."""
    env = parse_csv(env_path, Schema.ENVIRONMENTAL)
    econ = parse_csv(econ_path, Schema.ECONOMIC)
    aliases = load_alias_table()
    env, changed_env, warn_env = normalize_keys(env, aliases)
    econ, changed_econ, warn_econ = normalize_keys(econ, aliases)
    ds = merge_sources(env, econ, total_cost_tolerance=config.total_cost_tolerance)
    ds.cleaning_log.insert(0, CleaningAction(
        CleaningRule.KEY_NORMALIZATION, changed_env + changed_econ,
        f"environmental cells renamed: {changed_env}; economic cells renamed: {changed_econ}"))
    ds.warnings = warn_env + warn_econ + ds.warnings
    ds.provenance = {"environmental": str(env_path), "economic": str(econ_path)}
    derive_yield(ds)
    clean_dataset(ds, config)
    return ds
