"""Run configuration: a commented INI file plus command-line overrides.

Every key is validated (unknown sections or keys are rejected with their
path) and the resolved effective configuration is hashed so reports and
artifacts can state exactly what produced them.
"""

from __future__ import annotations

import configparser
import hashlib
from dataclasses import dataclass, field, fields
from pathlib import Path

from .constants import NUMERIC_FIELDS
from .dataset import CleaningConfig
from .errors import ConfigInvalid
from .evaluation import PipelineConfig
from .features import SEASON_LAG_SPEC, YEAR_LAG_SPEC, EncodingConfig, ImputePolicy, LagSpec
from .forest import RfParams
from .svm import SvmParams
from .synth import SyntheticSpec


@dataclass
class RunConfig:
    cleaning: CleaningConfig = field(default_factory=CleaningConfig)
    encoding: EncodingConfig = field(default_factory=EncodingConfig)
    year_lags: LagSpec = YEAR_LAG_SPEC
    season_lags: LagSpec = SEASON_LAG_SPEC
    rf: RfParams = field(default_factory=RfParams)
    svm: SvmParams = field(default_factory=SvmParams)
    synth: SyntheticSpec = field(default_factory=SyntheticSpec)
    folds: int = 10
    train_fraction: float = 0.8
    stratify: bool = True
    seed: int = 0

    def pipeline(self, model: str) -> PipelineConfig:
        return PipelineConfig(
            model=model,
            rf=self.rf,
            svm=self.svm,
            encoding=self.encoding,
            year_lags=self.year_lags,
            season_lags=self.season_lags,
            folds=self.folds,
            train_fraction=self.train_fraction,
            stratify=self.stratify,
            config_hash=self.digest(),
            effective_config=tuple(self.canonical_lines()),
        )

    def canonical_lines(self) -> list[str]:
        lines = []
        for section, obj in (
            ("cleaning", self.cleaning),
            ("encoding", self.encoding),
            ("rf", self.rf),
            ("svm", self.svm),
            ("synth", self.synth),
            ("year_lags", self.year_lags),
            ("season_lags", self.season_lags),
        ):
            for f in fields(obj):
                value = getattr(obj, f.name)
                if isinstance(value, ImputePolicy):
                    value = value.value
                lines.append(f"{section}.{f.name}={value!r}")
        lines.append(f"run.folds={self.folds}")
        lines.append(f"run.train_fraction={self.train_fraction!r}")
        lines.append(f"run.stratify={self.stratify}")
        lines.append(f"run.seed={self.seed}")
        return sorted(lines)

    def digest(self) -> str:
        blob = "\n".join(self.canonical_lines()).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()[:16]


def _parse_int(section, key, raw, allow_none=False):
    raw = raw.strip()
    if raw == "" and allow_none:
        return None
    try:
        return int(raw)
    except ValueError:
        raise ConfigInvalid(f"{section}.{key}", f"expected an integer, got {raw!r}") from None


def _parse_float(section, key, raw, allow_none=False):
    raw = raw.strip()
    if raw == "" and allow_none:
        return None
    try:
        return float(raw)
    except ValueError:
        raise ConfigInvalid(f"{section}.{key}", f"expected a number, got {raw!r}") from None


def _parse_bool(section, key, raw):
    v = raw.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigInvalid(f"{section}.{key}", f"expected a boolean, got {raw!r}")


def _parse_names(section, key, raw, allowed=None):
    items = tuple(s.strip() for s in raw.split(",") if s.strip())
    if allowed is not None:
        bad = [x for x in items if x not in allowed]
        if bad:
            raise ConfigInvalid(f"{section}.{key}", f"unknown column(s): {', '.join(bad)}")
    return items


def _parse_years(section, key, raw):
    raw = raw.strip()
    try:
        if "-" in raw and "," not in raw:
            lo, hi = raw.split("-")
            return tuple(range(int(lo), int(hi) + 1))
        return tuple(int(x) for x in raw.split(",") if x.strip())
    except ValueError:
        raise ConfigInvalid(f"{section}.{key}", f"expected years like 2011-2014, got {raw!r}") from None


_HANDLERS = {
    ("cleaning", "keep_years"): lambda c, s, k, v: _set(c.cleaning, "keep_years", _parse_years(s, k, v)),
    ("cleaning", "max_missing_fraction"): lambda c, s, k, v: _set(c.cleaning, "max_missing_fraction", _parse_float(s, k, v)),
    ("cleaning", "yield_outlier_k"): lambda c, s, k, v: _set(c.cleaning, "yield_outlier_k", _parse_float(s, k, v)),
    ("cleaning", "total_cost_tolerance"): lambda c, s, k, v: _set(c.cleaning, "total_cost_tolerance", _parse_float(s, k, v)),
    ("encoding", "numeric_features"): lambda c, s, k, v: _set(c.encoding, "numeric_features", _parse_names(s, k, v, NUMERIC_FIELDS)),
    ("encoding", "categorical_features"): lambda c, s, k, v: _set(c.encoding, "categorical_features", _parse_names(s, k, v, ("state", "district", "season", "soil_type"))),
    ("encoding", "standardize"): lambda c, s, k, v: _set(c.encoding, "standardize", _parse_bool(s, k, v)),
    ("encoding", "include_lags"): lambda c, s, k, v: _set(c.encoding, "include_lags", _parse_bool(s, k, v)),
    ("lags", "year_columns"): lambda c, s, k, v: _set_lag(c, "year_lags", "columns", _parse_names(s, k, v, NUMERIC_FIELDS)),
    ("lags", "year_max_order"): lambda c, s, k, v: _set_lag(c, "year_lags", "max_order", _parse_int(s, k, v)),
    ("lags", "season_columns"): lambda c, s, k, v: _set_lag(c, "season_lags", "columns", _parse_names(s, k, v, NUMERIC_FIELDS)),
    ("lags", "season_max_order"): lambda c, s, k, v: _set_lag(c, "season_lags", "max_order", _parse_int(s, k, v)),
    ("lags", "impute_policy"): lambda c, s, k, v: _set_impute(c, s, k, v),
    ("rf", "n_trees"): lambda c, s, k, v: _set(c.rf, "n_trees", _parse_int(s, k, v)),
    ("rf", "mtry"): lambda c, s, k, v: _set(c.rf, "mtry", _parse_int(s, k, v, allow_none=True)),
    ("rf", "max_depth"): lambda c, s, k, v: _set(c.rf, "max_depth", _parse_int(s, k, v, allow_none=True)),
    ("rf", "min_node"): lambda c, s, k, v: _set(c.rf, "min_node", _parse_int(s, k, v)),
    ("rf", "n_jobs"): lambda c, s, k, v: _set(c.rf, "n_jobs", _parse_int(s, k, v)),
    ("svm", "c"): lambda c, s, k, v: _set(c.svm, "c", _parse_float(s, k, v)),
    ("svm", "kernel"): lambda c, s, k, v: _set_kernel(c, s, k, v),
    ("svm", "gamma"): lambda c, s, k, v: _set(c.svm, "gamma", _parse_float(s, k, v, allow_none=True)),
    ("svm", "tol"): lambda c, s, k, v: _set(c.svm, "tol", _parse_float(s, k, v)),
    ("svm", "max_passes"): lambda c, s, k, v: _set(c.svm, "max_passes", _parse_int(s, k, v)),
    ("svm", "n_jobs"): lambda c, s, k, v: _set(c.svm, "n_jobs", _parse_int(s, k, v)),
    ("evaluation", "folds"): lambda c, s, k, v: setattr(c, "folds", _parse_int(s, k, v)),
    ("evaluation", "train_fraction"): lambda c, s, k, v: setattr(c, "train_fraction", _parse_float(s, k, v)),
    ("evaluation", "stratify"): lambda c, s, k, v: setattr(c, "stratify", _parse_bool(s, k, v)),
    ("synth", "n_rows"): lambda c, s, k, v: _set(c.synth, "n_rows", _parse_int(s, k, v)),
    ("synth", "n_states"): lambda c, s, k, v: _set(c.synth, "n_states", _parse_int(s, k, v)),
    ("synth", "n_crops"): lambda c, s, k, v: _set(c.synth, "n_crops", _parse_int(s, k, v)),
    ("synth", "years"): lambda c, s, k, v: _set(c.synth, "years", _parse_years(s, k, v)),
    ("synth", "seed"): lambda c, s, k, v: _set(c.synth, "seed", _parse_int(s, k, v)),
    ("synth", "drift_strength"): lambda c, s, k, v: _set(c.synth, "drift_strength", _parse_float(s, k, v)),
    ("synth", "noise_std"): lambda c, s, k, v: _set(c.synth, "noise_std", _parse_float(s, k, v)),
    ("synth", "season_effect"): lambda c, s, k, v: _set(c.synth, "season_effect", _parse_float(s, k, v)),
    ("run", "seed"): lambda c, s, k, v: setattr(c, "seed", _parse_int(s, k, v)),
}


def _set(obj, name, value):
    # dataclasses here are frozen or not; rebuild frozen ones via __dict__ swap
    try:
        setattr(obj, name, value)
    except  AttributeError:
        object.__setattr__(obj, name, value)


def _set_lag(cfg: RunConfig, which: str, name: str, value):
    import dataclasses

    setattr(cfg, which, dataclasses.replace(getattr(cfg, which), **{name: value}))


def _set_impute(cfg: RunConfig, section, key, raw):
    import dataclasses

    try:
        policy = ImputePolicy(raw.strip())
    except ValueError:
        choices = ", ".join(p.value for p in ImputePolicy)
        raise ConfigInvalid(f"{section}.{key}", f"must be one of {choices}") from None
    cfg.year_lags = dataclasses.replace(cfg.year_lags, impute_policy=policy)
    cfg.season_lags = dataclasses.replace(cfg.season_lags, impute_policy=policy)


def _set_kernel(cfg: RunConfig, section, key, raw):
    v = raw.strip().lower()
    if v not in ("linear", "rbf"):
        raise ConfigInvalid(f"{section}.{key}", "must be linear or rbf")
    cfg.svm.kernel = v


def load_config(path: str | Path | None) -> RunConfig:
    """Read an INI config file; unknown sections or keys are errors."""
    cfg = RunConfig()
    if path is None:
        return cfg
    path = Path(path)
    if not path.exists():
        raise ConfigInvalid(str(path), "config file does not exist")
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise ConfigInvalid(str(path), f"cannot parse: {exc}") from None
    for section in parser.sections():
        for key, value in parser.items(section):
            handler = _HANDLERS.get((section, key))
            if handler is None:
                raise ConfigInvalid(f"{section}.{key}", "unknown configuration key")
            handler(cfg, section, key, value)
    # frozen dataclasses are replaced wholesale by their handlers; rebuild the
    # frozen cleaning/encoding/synth values if handlers mutated them in place
    return _freeze(cfg)


def _freeze(cfg: RunConfig) -> RunConfig:
    import dataclasses

    cfg.cleaning = dataclasses.replace(cfg.cleaning)
    cfg.encoding = dataclasses.replace(cfg.encoding)
    cfg.synth = dataclasses.replace(cfg.synth)
    return cfg


def apply_overrides(cfg: RunConfig, overrides: dict[str, str]) -> RunConfig:
    """Apply `section.key=value` strings (command-line) over the file values."""
    for dotted, value in overrides.items():
        if "." not in dotted:
            raise ConfigInvalid(dotted, "override keys look like section.key")
        section, key = dotted.split(".", 1)
        handler = _HANDLERS.get((section, key))
        if handler is None:
            raise ConfigInvalid(dotted, "unknown configuration key")
        handler(cfg, section, key, value)
    return _freeze(cfg)
