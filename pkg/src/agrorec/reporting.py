"""Serialization of evaluation reports: canonical JSON and a human summary."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .evaluation import ClassMetrics, ConfusionMatrix, EvaluationReport


def _opt(x):
    return None if x is None else float(x)


def report_to_dict(report: EvaluationReport) -> dict:
    return {
        "approach": report.approach,
        "model": report.model_id,
        "accuracy": report.accuracy,
        "expected_agreement": report.expected_agreement,
        "kappa": _opt(report.kappa),
        "macro_f1": _opt(report.macro_f1),
        "ci95": [report.ci_low, report.ci_high],
        "nir": report.nir,
        "p_value_acc_gt_nir": report.p_value_acc_gt_nir,
        "per_class": [
            {
                "class": m.name,
                "support": m.support,
                "precision": _opt(m.precision),
                "recall": _opt(m.recall),
                "specificity": _opt(m.specificity),
                "f1": _opt(m.f1),
            }
            for m in report.per_class
        ],
        "confusion": {
            "class_names": list(report.confusion.class_names),
            "counts": report.confusion.counts.tolist(),
        },
        # wall-clock time is process output, not part of the canonical
        # artifact: re-running the same config must reproduce identical bytes
        "runtime_seconds": None,
        "seed": report.seed,
        "leakage_warning": report.leakage_warning,
        "config_hash": report.config_hash,
        "effective_config": list(report.effective_config),
        "fold_accuracies": report.fold_accuracies,
        "fold_mean_accuracy": _opt(report.fold_mean_accuracy),
        "notes": report.notes,
    }


def report_from_dict(d: dict) -> EvaluationReport:
    cm = ConfusionMatrix(class_names=tuple(d["confusion"]["class_names"]),
                         counts=np.array(d["confusion"]["counts"], dtype=np.int64))
    per_class = [
        ClassMetrics(m["class"], m["support"], m["precision"], m["recall"],
                     m["specificity"], m["f1"])
        for m in d["per_class"]
    ]
    return EvaluationReport(
        approach=d["approach"],
        model_id=d["model"],
        accuracy=d["accuracy"],
        expected_agreement=d["expected_agreement"],
        kappa=d["kappa"],
        per_class=per_class,
        macro_f1=d["macro_f1"],
        ci_low=d["ci95"][0],
        ci_high=d["ci95"][1],
        nir=d["nir"],
        p_value_acc_gt_nir=d["p_value_acc_gt_nir"],
        confusion=cm,
        runtime_seconds=d["runtime_seconds"] or 0.0,
        seed=d["seed"],
        leakage_warning=d["leakage_warning"],
        config_hash=d["config_hash"],
        effective_config=tuple(d.get("effective_config", ())),
        fold_accuracies=d.get("fold_accuracies"),
        fold_mean_accuracy=d.get("fold_mean_accuracy"),
        notes=list(d.get("notes", [])),
    )


def write_report_json(report: EvaluationReport, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(report_to_dict(report), indent=2, sort_keys=True) + "\n",
        encoding="utf-8")


def read_report_json(path: str | Path) -> EvaluationReport:
    return report_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _fmt(x, width: int = 9, digits: int = 4) -> str:
    if x is None:
        return "NA".rjust(width)
    return f"{x:.{digits}f}".rjust(width)


def render_report(report: EvaluationReport) -> str:
    """Human-readable summary: overall block, then per-class statistics."""
    p = report.p_value_acc_gt_nir
    p_text = "< 2.2e-16" if p < 2.2e-16 else f"{p:.4g}"
    lines = [
        f"Protocol           : approach {report.approach} ({report.model_id})",
        "",
        "Overall Statistics",
        f"      Accuracy : {report.accuracy:.4f}",
        f"      95% CI   : ({report.ci_low:.4f}, {report.ci_high:.4f})",
        f"  No Information Rate : {report.nir:.4f}",
        f"  P-Value [Acc > NIR] : {p_text}",
        "",
        f"      Kappa : {'NA' if report.kappa is None else f'{report.kappa:.4f}'}",
        f"      Macro F1 : {'NA' if report.macro_f1 is None else f'{report.macro_f1:.4f}'}",
    ]
    if report.fold_mean_accuracy is not None:
        lines.append(f"      Fold-mean Accuracy : {report.fold_mean_accuracy:.4f}")
    if report.leakage_warning:
        lines.append("  Warning: protocol ignores temporal order (random folds)")
    for note in report.notes:
        lines.append(f"  Note: {note}")
    lines += [
        "",
        "Statistics by Class:",
        f"{'Class':<22}{'Support':>8}{'Precision':>11}{'Recall':>9}"
        f"{'Specificity':>13}{'F1':>9}",
    ]
    for m in report.per_class:
        lines.append(
            f"{m.name:<22}{m.support:>8}{_fmt(m.precision, 11)}{_fmt(m.recall, 9)}"
            f"{_fmt(m.specificity, 13)}{_fmt(m.f1, 9)}")
    lines += [
        "",
        f"Seed: {report.seed}   Config: {report.config_hash}",
    ]
    return "\n".join(lines) + "\n"
