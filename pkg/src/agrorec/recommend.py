"""Score one feature record against a trained model: ranked crop list."""

from __future__ import annotations

import numpy as np

from .constants import COLUMN_TO_FIELD, CROPS, NUMERIC_FIELDS
from .dataset import CropRecord, Dataset
from .errors import IncompleteInput, ModelLoad
from .features import encode_apply

_RECORD_DEFAULTS = {
    "state": "", "district": "", "year": 0, "season": "Kharif", "crop": "",
    "area": 0.0, "temperature": 0.0, "wind_speed": 0.0, "precipitation": 0.0,
    "humidity": 0.0, "soil_type": "", "n": 0.0, "p": 0.0, "k": 0.0,
    "production": 0.0, "operational_cost": 0.0, "fixed_cost": 0.0,
    "total_cost": 0.0, "msp": 0.0, "yield_": 0.0,
}


def required_inputs(model) -> list[str]:
    """Source columns the model's encoding reads from a record."""
    enc = model.encoding
    if enc is None:
        raise ModelLoad("model file carries no encoding; cannot score raw records")
    return list(enc.numeric_columns) + list(enc.one_hot_map)


def _normalize_name(name: str) -> str:
    name = name.strip()
    if name in COLUMN_TO_FIELD:
        return COLUMN_TO_FIELD[name]
    if name == "yield":
        return "yield_"
    return name


def rank_crops(model, values: dict) -> list[tuple[str, float]]:
    """All classes ranked by normalized vote share, best first.

    `values` maps field or CSV column names to raw (unencoded) values; every
    column the encoding needs must be present, otherwise IncompleteInput
    lists what is absent. The top entry always agrees with the model's
    plain prediction.
    """
    given = {_normalize_name(k): v for k, v in values.items()}
    needed = required_inputs(model)
    missing = [c for c in needed if c not in given]
    if missing:
        raise IncompleteInput(sorted(missing))

    record_kwargs = dict(_RECORD_DEFAULTS)
    extra = {}
    for name, raw in given.items():
        if name in _RECORD_DEFAULTS:
            if name in NUMERIC_FIELDS or name == "year":
                record_kwargs[name] = float(raw) if name != "year" else int(float(raw))
            else:
                record_kwargs[name] = str(raw)
        else:
            extra[name] = np.array([float(raw)])
    ds = Dataset(records=[CropRecord(**record_kwargs)])
    ds.extra_columns = extra

    x, _ = encode_apply(ds, model.encoding, with_labels=False)
    predicted, votes = model.predict_batch(x)
    votes = votes[0].astype(float)
    total = votes.sum()
    scores = votes / total if total > 0 else np.full(len(votes), 1.0 / len(votes))
    order = sorted(range(len(scores)), key=lambda c: (-scores[c], c))
    top = int(predicted[0])
    if order[0] != top:
        order.remove(top)
        order.insert(0, top)
    names = model.class_names if model.class_names else CROPS
    return [(names[c], float(scores[c])) for c in order]
