"""Evaluation protocols and the classification metric suite.

Three protocols: (1) seeded stratified 10-fold cross-validation, which
ignores time on purpose; (2) a chronological 80/20 split that trains on the
past only; (3) the chronological split after grouped lag augmentation.
Metrics cover accuracy, Cohen's kappa, per-class precision/recall/
specificity/F1, the exact binomial confidence interval on accuracy, and the
no-information-rate test.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as _scipy_stats

from .constants import CROPS
from .dataset import Dataset
from .errors import BadK, BadLevel, EmptyMatrix, EmptySide, LengthMismatch, ProtocolMisuse, UnknownLabel
from .features import (
    SEASON_LAG_SPEC,
    YEAR_LAG_SPEC,
    EncodingConfig,
    LagSpec,
    encode_apply,
    encode_fit,
    make_lags,
    temporal_key,
    temporal_sort,
)
from .forest import RfParams, rf_train
from .rng import spawn
from .svm import SvmParams, svm_train_multiclass


def stratified_kfold(labels, k: int = 10, seed: int = 0) -> np.ndarray:
    """Fold assignment spreading each class as evenly as possible.

    Rows are shuffled with the seed, then dealt round-robin one class at a
    time with a continuing counter, so per-class fold counts deviate from
    proportional by at most one and total fold sizes stay balanced.
    """
    y = np.asarray(labels)
    n = y.shape[0]
    if k < 2 or k > n:
        raise BadK(f"k={k} invalid for {n} rows")
    rng = spawn(seed, "kfold-shuffle")
    perm = rng.permutation(n)
    assign = np.empty(n, dtype=np.int64)
    counter = 0
    for cls in sorted(set(y.tolist())):
        for i in perm:
            if y[i] == cls:
                assign[i] = counter % k
                counter += 1
    return assign


def chronological_split(dataset: Dataset, train_fraction: float = 0.8):
    """(train indices, test indices) at floor(train_fraction * n).

    The dataset must be temporally sorted; everything strictly after the
    boundary is future relative to the training rows.
    """
    n = len(dataset.records)
    boundary = int(np.floor(train_fraction * n))
    if boundary <= 0 or boundary >= n:
        raise EmptySide(f"train_fraction={train_fraction} leaves an empty side for n={n}")
    return np.arange(boundary), np.arange(boundary, n)


@dataclass
class ConfusionMatrix:
    class_names: tuple[str, ...]
    counts: np.ndarray  # counts[i, j]: true class i predicted as j

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def tp(self, c: int) -> int:
        return int(self.counts[c, c])

    def fp(self, c: int) -> int:
        return int(self.counts[:, c].sum() - self.counts[c, c])

    def fn(self, c: int) -> int:
        return int(self.counts[c, :].sum() - self.counts[c, c])

    def tn(self, c: int) -> int:
        return self.total - self.tp(c) - self.fp(c) - self.fn(c)


def confusion_matrix(truth, predictions, class_names=CROPS) -> ConfusionMatrix:
    t = np.asarray(truth, dtype=np.int64)
    p = np.asarray(predictions, dtype=np.int64)
    if t.shape != p.shape:
        raise LengthMismatch(f"{t.shape} vs {p.shape}")
    k = len(class_names)
    if t.size and (t.min() < 0 or t.max() >= k or p.min() < 0 or p.max() >= k):
        raise UnknownLabel("label outside the class set")
    counts = np.zeros((k, k), dtype=np.int64)
    np.add.at(counts, (t, p), 1)
    return ConfusionMatrix(class_names=tuple(class_names), counts=counts)


@dataclass
class ClassMetrics:
    name: str
    support: int                     # true instances in the test set
    precision: float | None          # None marks an undefined 0/0 ratio
    recall: float | None
    specificity: float | None
    f1: float | None


@dataclass
class MetricsResult:
    accuracy: float
    expected_agreement: float
    kappa: float | None              # None when expected agreement is 1
    per_class: list[ClassMetrics]
    macro_f1: float | None


def classification_metrics(cm: ConfusionMatrix) -> MetricsResult:
    """Accuracy, chance-corrected agreement and per-class ratios.

    Undefined ratios (0/0) stay None and are excluded from the macro-F1
    average rather than being coerced to 0.
    """
    total = cm.total
    if total == 0:
        raise EmptyMatrix("confusion matrix has no observations")
    accuracy = float(np.trace(cm.counts)) / total
    row = cm.counts.sum(axis=1).astype(float)
    col = cm.counts.sum(axis=0).astype(float)
    p_e = float(np.sum(row * col)) / (total * total)
    kappa = None if p_e >= 1.0 else (accuracy - p_e) / (1.0 - p_e)

    per_class = []
    f1_defined = []
    for c, name in enumerate(cm.class_names):
        tp, fp, fn, tn = cm.tp(c), cm.fp(c), cm.fn(c), cm.tn(c)
        precision = tp / (tp + fp) if tp + fp > 0 else None
        recall = tp / (tp + fn) if tp + fn > 0 else None
        specificity = tn / (tn + fp) if tn + fp > 0 else None
        if precision is None or recall is None:
            f1 = None
        elif precision + recall == 0.0:
            f1 = 0.0
        else:
            f1 = 2.0 * precision * recall / (precision + recall)
        if f1 is not None:
            f1_defined.append(f1)
        per_class.append(ClassMetrics(name, int(tp + fn), precision, recall,
                                      specificity, f1))
    macro_f1 = float(np.mean(f1_defined)) if f1_defined else None
    return MetricsResult(accuracy=accuracy, expected_agreement=p_e, kappa=kappa,
                         per_class=per_class, macro_f1=macro_f1)


def accuracy_ci(correct: int, total: int, level: float = 0.95):
    """Exact (Clopper-Pearson) binomial interval from beta quantiles."""
    if not 0.0 < level < 1.0:
        raise BadLevel(f"level={level} outside (0, 1)")
    if total <= 0 or not 0 <= correct <= total:
        raise EmptyMatrix(f"bad counts: {correct}/{total}")
    alpha = 1.0 - level
    low = 0.0 if correct == 0 else float(
        _scipy_stats.beta.ppf(alpha / 2.0, correct, total - correct + 1))
    high = 1.0 if correct == total else float(
        _scipy_stats.beta.ppf(1.0 - alpha / 2.0, correct + 1, total - correct))
    return low, high


def nir_test(cm: ConfusionMatrix):
    """(no-information rate, one-sided p-value of accuracy exceeding it).

    NIR is the largest true-class prevalence; the p-value is the exact
    binomial tail P(X >= correct) with X ~ Binomial(total, NIR).
    """
    total = cm.total
    if total == 0:
        raise EmptyMatrix("confusion matrix has no observations")
    nir = float(cm.counts.sum(axis=1).max()) / total
    correct = int(np.trace(cm.counts))
    p_value = float(_scipy_stats.binom.sf(correct - 1, total, nir))
    return nir, p_value


# -- protocol runs ------------------------------------------------------------


@dataclass
class PipelineConfig:
    """Everything a protocol run needs besides the dataset."""
    model: str = "rf"  # "rf" | "svm"
    rf: RfParams = field(default_factory=RfParams)
    svm: SvmParams = field(default_factory=SvmParams)
    encoding: EncodingConfig = field(default_factory=EncodingConfig)
    year_lags: LagSpec = YEAR_LAG_SPEC
    season_lags: LagSpec = SEASON_LAG_SPEC
    folds: int = 10
    train_fraction: float = 0.8
    stratify: bool = True
    config_hash: str = ""
    effective_config: tuple[str, ...] = ()  # resolved `section.key=value` lines


@dataclass
class EvaluationReport:
    approach: int
    model_id: str
    accuracy: float
    expected_agreement: float
    kappa: float | None
    per_class: list[ClassMetrics]
    macro_f1: float | None
    ci_low: float
    ci_high: float
    nir: float
    p_value_acc_gt_nir: float
    confusion: ConfusionMatrix
    runtime_seconds: float
    seed: int
    leakage_warning: bool
    config_hash: str
    effective_config: tuple[str, ...] = ()
    fold_accuracies: list[float] | None = None
    fold_mean_accuracy: float | None = None
    notes: list[str] = field(default_factory=list)


def _train_model(x, y, config: PipelineConfig, feature_names, seed: int):
    if config.model == "rf":
        params = RfParams(**{**config.rf.__dict__, "seed": seed})
        return rf_train(x, y, params, feature_names=feature_names)
    if config.model == "svm":
        return svm_train_multiclass(x, y, config.svm, feature_names=feature_names)
    raise ProtocolMisuse(f"unknown model {config.model!r}")


def _labels_of(dataset: Dataset) -> np.ndarray:
    from .constants import CROP_INDEX

    return np.array([CROP_INDEX[r.crop] for r in dataset.records], dtype=np.int64)


def _with_lags(dataset: Dataset, config: PipelineConfig) -> Dataset:
    lagged, _ = make_lags(dataset, config.year_lags)
    lagged, _ = make_lags(lagged, config.season_lags)
    return lagged


def run_approach(dataset: Dataset, approach: int, config: PipelineConfig,
                 seed: int = 0) -> EvaluationReport:
    """Run one (protocol, model) evaluation and assemble the full report."""
    if approach not in (1, 2, 3):
        raise ProtocolMisuse(f"approach must be 1, 2 or 3, got {approach}")
    started = time.perf_counter()
    notes: list[str] = []

    if approach == 1:
        labels = _labels_of(dataset)
        if config.stratify:
            folds = stratified_kfold(labels, k=config.folds, seed=seed)
        else:
            rng = spawn(seed, "plain-kfold")
            folds = rng.permutation(len(labels)) % config.folds
            notes.append("plain (non-stratified) folds")
        pooled = np.zeros((len(CROPS), len(CROPS)), dtype=np.int64)
        fold_acc = []
        for f in range(config.folds):
            test_idx = np.nonzero(folds == f)[0]
            train_idx = np.nonzero(folds != f)[0]
            train_ds = dataset.take(train_idx)
            test_ds = dataset.take(test_idx)
            enc = encode_fit(train_ds, config.encoding)
            x_tr, y_tr = encode_apply(train_ds, enc)
            x_te, y_te = encode_apply(test_ds, enc)
            model = _train_model(x_tr, y_tr, config, enc.feature_names,
                                 seed=int(spawn(seed, "fold-model", f).integers(2**31)))
            pred, _ = model.predict_batch(x_te)
            pooled += confusion_matrix(y_te, pred).counts
            fold_acc.append(float(np.mean(pred == y_te)))
        cm = ConfusionMatrix(class_names=CROPS, counts=pooled)
        leakage_warning = True
        fold_accuracies = fold_acc
        fold_mean = float(np.mean(fold_acc))
    else:
        ds = temporal_sort(dataset)
        if approach == 3:
            ds = _with_lags(ds, config)
        train_idx, test_idx = chronological_split(ds, config.train_fraction)
        max_train = max(temporal_key(ds.records[i]) for i in train_idx)
        min_test = min(temporal_key(ds.records[i]) for i in test_idx)
        if max_train > min_test:
            raise ProtocolMisuse("chronological split violated temporal order")
        train_ds = ds.take(train_idx)
        test_ds = ds.take(test_idx)
        enc = encode_fit(train_ds, config.encoding)
        x_tr, y_tr = encode_apply(train_ds, enc)
        x_te, y_te = encode_apply(test_ds, enc)
        model = _train_model(x_tr, y_tr, config, enc.feature_names, seed=seed)
        pred, _ = model.predict_batch(x_te)
        cm = confusion_matrix(y_te, pred)
        leakage_warning = False
        fold_accuracies = None
        fold_mean = None

    metrics = classification_metrics(cm)
    correct = int(np.trace(cm.counts))
    low, high = accuracy_ci(correct, cm.total)
    nir, p_value = nir_test(cm)
    return EvaluationReport(
        approach=approach,
        model_id=config.model,
        accuracy=metrics.accuracy,
        expected_agreement=metrics.expected_agreement,
        kappa=metrics.kappa,
        per_class=metrics.per_class,
        macro_f1=metrics.macro_f1,
        ci_low=low,
        ci_high=high,
        nir=nir,
        p_value_acc_gt_nir=p_value,
        confusion=cm,
        runtime_seconds=time.perf_counter() - started,
        seed=seed,
        leakage_warning=leakage_warning,
        config_hash=config.config_hash,
        effective_config=tuple(config.effective_config),
        fold_accuracies=fold_accuracies,
        fold_mean_accuracy=fold_mean,
        notes=notes,
    )


def compare_reports(reports: list[EvaluationReport]) -> list[dict]:
    """Side-by-side table sorted by accuracy descending (model id on ties)."""
    if len(reports) < 2:
        raise EmptyMatrix("need at least two reports to compare")
    rows = [
        {
            "model": r.model_id,
            "approach": r.approach,
            "accuracy": r.accuracy,
            "kappa": r.kappa,
            "macro_f1": r.macro_f1,
        }
        for r in reports
    ]
    rows.sort(key=lambda row: (-row["accuracy"], row["model"], row["approach"]))
    return rows
