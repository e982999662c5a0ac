"""Command-line front end.

Subcommands: ingest, eda, train, evaluate, recommend, synth, report.
Exit code 0 on success; nonzero with one machine-parsable error line
(``ERROR<TAB>kind<TAB>message``) on stderr otherwise. Verbosity comes from
the AGROREC_LOG environment variable (debug|info|quiet).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig, apply_overrides, load_config
from .constants import FIELD_TO_COLUMN, NUMERIC_FIELDS
from .dataset import (
    Dataset,
    ingest_files,
    read_cleaned_csv,
    write_cleaned_csv,
    write_cleaning_log,
)
from .eda import (
    GroupStat,
    correlation_matrix,
    grouped_aggregate,
    skewness,
    vif_with_aliases,
    write_csv_rows,
)
from .errors import AgroRecError, BadParams, ConfigInvalid
from .evaluation import compare_reports, run_approach
from .features import encode_apply, encode_fit
from .forest import RfParams, rf_train
from .model_io import load_model, save_model
from .recommend import rank_crops
from .reporting import read_report_json, render_report, write_report_json
from .svm import svm_train_multiclass
from .synth import generate_synthetic

log = logging.getLogger("agrorec")

# EDA defaults: weather spread by season, economic means by year.
_EDA_STD_BY_SEASON = ("temperature", "humidity", "wind_speed", "precipitation")
_EDA_MEAN_BY_YEAR = ("msp", "operational_cost", "fixed_cost")


def _setup_logging() -> None:
    level = {"debug": logging.DEBUG, "info": logging.INFO,
             "quiet": logging.ERROR}.get(os.environ.get("AGROREC_LOG", "info"), logging.INFO)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _config_from_args(args) -> RunConfig:
    cfg = load_config(getattr(args, "config", None))
    overrides = {}
    for item in getattr(args, "set", []) or []:
        if "=" not in item:
            raise ConfigInvalid(item, "overrides look like section.key=value")
        key, value = item.split("=", 1)
        overrides[key.strip()] = value
    if overrides:
        cfg = apply_overrides(cfg, overrides)
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    return cfg


def _cmd_ingest(args) -> int:
    cfg = _config_from_args(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ds = ingest_files(args.env, args.econ, cfg.cleaning)
    write_cleaned_csv(ds, out / "cleaned.csv")
    write_cleaning_log(ds, out / "cleaning_log.txt")
    # the CSV schema is fixed, so its provenance hash lives in a sidecar
    (out / "manifest.txt").write_text(
        f"config {cfg.digest()}\nenv {args.env}\necon {args.econ}\nrows {len(ds)}\n",
        encoding="utf-8")
    log.info("ingested %d rows -> %s", len(ds), out / "cleaned.csv")
    for action in ds.cleaning_log:
        log.info("cleaning: %s", action.as_line())
    print(f"rows={len(ds)} out={out / 'cleaned.csv'}")
    return 0


def _numeric_columns_for_eda(ds: Dataset) -> list[str]:
    cols = []
    for name in NUMERIC_FIELDS:
        vals = ds.numeric(name)
        if not np.isnan(vals).any() and not np.all(vals == vals[0]):
            cols.append(name)
    return cols


def _cmd_eda(args) -> int:
    ds = read_cleaned_csv(args.data)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cols = _numeric_columns_for_eda(ds)

    write_csv_rows(out / "skewness.csv", ["column", "skew"],
                   [(FIELD_TO_COLUMN[c], repr(skewness(ds.numeric(c)))) for c in cols])

    cm = correlation_matrix(ds, cols)
    header = ["column"] + [FIELD_TO_COLUMN[c] for c in cm.labels]
    rows = [[FIELD_TO_COLUMN[c]] + [repr(float(v)) for v in cm.values[i]]
            for i, c in enumerate(cm.labels)]
    write_csv_rows(out / "correlation.csv", header, rows)

    entries = vif_with_aliases(ds, cols)
    write_csv_rows(out / "vif.csv", ["column", "r2", "vif", "severity"],
                   [(FIELD_TO_COLUMN[e.column], repr(e.r_squared),
                     "inf" if not np.isfinite(e.vif) else repr(e.vif),
                     e.severity.value) for e in entries])

    for col in _EDA_STD_BY_SEASON:
        table = grouped_aggregate(ds, col, "season", GroupStat.STD)
        write_csv_rows(out / f"group_std_{col}_by_season.csv",
                       ["season", "std"], [(g, repr(v)) for g, v in table])
    for col in _EDA_MEAN_BY_YEAR:
        table = grouped_aggregate(ds, col, "year", GroupStat.MEAN)
        write_csv_rows(out / f"group_mean_{col}_by_year.csv",
                       ["year", "mean"], [(g, repr(v)) for g, v in table])
    print(f"eda tables written to {out}")
    return 0


def _cmd_train(args) -> int:
    cfg = _config_from_args(args)
    ds = read_cleaned_csv(args.data)
    enc = encode_fit(ds, cfg.encoding)
    x, y = encode_apply(ds, enc)
    if args.model == "rf":
        if cfg.rf.mtry is not None and cfg.rf.mtry > x.shape[1]:
            raise ConfigInvalid("rf.mtry", f"{cfg.rf.mtry} exceeds {x.shape[1]} encoded features")
        params = RfParams(**{**cfg.rf.__dict__, "seed": cfg.seed})
        model = rf_train(x, y, params, feature_names=enc.feature_names)
    else:
        model = svm_train_multiclass(x, y, cfg.svm, feature_names=enc.feature_names)
    model.encoding = enc
    model.config_hash = cfg.digest()
    save_model(model, args.out)
    oob = getattr(model, "oob_error", None)
    log.info("trained %s on %d rows, %d features%s", args.model, x.shape[0], x.shape[1],
             f", oob_error={oob:.4f}" if oob is not None else "")
    print(f"model={args.out} rows={x.shape[0]} features={x.shape[1]} "
          f"config={cfg.digest()}")
    return 0


def _cmd_evaluate(args) -> int:
    cfg = _config_from_args(args)
    ds = read_cleaned_csv(args.data)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report = run_approach(ds, args.approach, cfg.pipeline(args.model), seed=cfg.seed)
    base = out / f"report_a{args.approach}_{args.model}"
    write_report_json(report, base.with_suffix(".json"))
    base.with_suffix(".txt").write_text(render_report(report), encoding="utf-8")
    print(f"approach={args.approach} model={args.model} "
          f"accuracy={report.accuracy:.4f} "
          f"kappa={'NA' if report.kappa is None else f'{report.kappa:.4f}'} "
          f"out={base.with_suffix('.json')}")
    return 0


def _parse_record_values(text: str) -> dict:
    path = Path(text)
    if text.endswith(".csv") and path.exists():
        with path.open(newline="", encoding="utf-8-sig") as fh:
            reader = csv.DictReader(fh)
            try:
                row = next(iter(reader))
            except StopIteration:
                raise ConfigInvalid("--input", "record CSV has no data row") from None
        return {k: v for k, v in row.items() if v not in (None, "")}
    values = {}
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        if "=" not in chunk:
            raise ConfigInvalid("--input", f"expected key=value, got {chunk!r}")
        key, val = chunk.split("=", 1)
        values[key.strip()] = val.strip()
    return values


def _cmd_recommend(args) -> int:
    model = load_model(args.model)
    values = _parse_record_values(args.input)
    ranking = rank_crops(model, values)
    for crop, score in ranking:
        print(f"{score:.6f}\t{crop}")
    if args.out:
        Path(args.out).write_text(
            json.dumps([{"crop": c, "score": s} for c, s in ranking], indent=2) + "\n",
            encoding="utf-8")
    return 0


def _cmd_synth(args) -> int:
    cfg = _config_from_args(args)
    spec = cfg.synth
    ds = generate_synthetic(spec)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_cleaned_csv(ds, out)
    _write_source_splits(ds, out)
    print(f"rows={len(ds)} out={out} sources={out.with_suffix('.env.csv')},"
          f"{out.with_suffix('.econ.csv')}")
    return 0


def _write_source_splits(ds: Dataset, merged_path: Path) -> None:
    """Split a generated dataset back into the two raw source schemas."""
    from .constants import COLUMN_TO_FIELD, ECON_HEADER, ENV_HEADER

    env_path = merged_path.with_suffix(".env.csv")
    econ_path = merged_path.with_suffix(".econ.csv")
    with env_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(ENV_HEADER)
        for rec in ds.records:
            writer.writerow([_cell(getattr(rec, COLUMN_TO_FIELD[c])) for c in ENV_HEADER])
    seen = set()
    with econ_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(ECON_HEADER)
        for rec in ds.records:
            key = (rec.state, rec.year, rec.crop)
            if key in seen:
                continue
            seen.add(key)
            writer.writerow([_cell(getattr(rec, COLUMN_TO_FIELD[c])) for c in ECON_HEADER])


def _cell(v) -> str:
    if v is None:
        return ""
    return repr(v) if isinstance(v, float) else str(v)


def _cmd_report(args) -> int:
    in_dir = Path(args.infile)
    reports = [read_report_json(p) for p in sorted(in_dir.glob("report_*.json"))]
    if len(reports) < 2:
        raise ConfigInvalid("--in", f"need at least two report_*.json files in {in_dir}")
    rows = compare_reports(reports)
    write_csv_rows(args.out, ["model", "approach", "accuracy", "kappa", "macro_f1"],
                   [(r["model"], r["approach"], repr(r["accuracy"]),
                     "NA" if r["kappa"] is None else repr(r["kappa"]),
                     "NA" if r["macro_f1"] is None else repr(r["macro_f1"]))
                    for r in rows])
    for r in rows:
        print(f"{r['model']}\ta{r['approach']}\t{r['accuracy']:.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="agrorec",
                                     description="Crop recommendation pipeline")
    parser.add_argument("--version", action="version", version=f"agrorec {__version__}")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("ingest", help="parse, merge and clean the two CSV sources")
    p.add_argument("--env", required=True, help="environmental CSV")
    p.add_argument("--econ", required=True, help="economic CSV")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--config")
    p.add_argument("--set", action="append", metavar="section.key=value")
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("eda", help="emit skewness/correlation/VIF/grouped tables")
    p.add_argument("--data", required=True, help="cleaned CSV")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_eda)

    p = sub.add_parser("train", help="train a model on a cleaned CSV")
    p.add_argument("--data", required=True)
    p.add_argument("--model", required=True, choices=("rf", "svm"))
    p.add_argument("--config")
    p.add_argument("--set", action="append", metavar="section.key=value")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True, help="model file (.agrorec-model)")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("evaluate", help="run one evaluation protocol")
    p.add_argument("--data", required=True)
    p.add_argument("--approach", required=True, type=int, choices=(1, 2, 3))
    p.add_argument("--model", required=True, choices=("rf", "svm"))
    p.add_argument("--seed", type=int)
    p.add_argument("--config")
    p.add_argument("--set", action="append", metavar="section.key=value")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("recommend", help="rank crops for one feature record")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True,
                   help="record CSV path or comma-separated key=value list")
    p.add_argument("--out", help="optional JSON output path")
    p.set_defaults(func=_cmd_recommend)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("--spec", dest="config", help="config file with a [synth] section")
    p.add_argument("--set", action="append", metavar="section.key=value")
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("report", help="compare evaluation reports")
    p.add_argument("--in", dest="infile", required=True, help="directory of report JSONs")
    p.add_argument("--out", required=True, help="comparison CSV path")
    p.set_defaults(func=_cmd_report)
    return parser


_COMMANDS = ("ingest", "eda", "train", "evaluate", "recommend", "synth", "report")


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    if argv and not argv[0].startswith("-") and argv[0] not in _COMMANDS:
        print(f"ERROR\tUnknownCommand\t{argv[0]}", file=sys.stderr)
        return 2
    parser = build_parser()
    args = parser.parse_args(argv)
    if not getattr(args, "func", None):
        parser.print_help()
        return 2
    try:
        return args.func(args)
    except BadParams as exc:
        print(f"ERROR\tConfigInvalid\t{exc}", file=sys.stderr)
        return 3
    except AgroRecError as exc:
        print(f"ERROR\t{type(exc).__name__}\t{exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
