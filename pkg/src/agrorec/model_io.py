"""Versioned text serialization for trained models (.agrorec-model).

Layout (see docs/model_format.md):

    agrorec-model <version>
    <one-line JSON payload>
    sha256 <hex digest of the payload line>

The payload is self-contained: hyperparameters, class list, feature names,
the fitted encoding, and the tree or support-vector data needed to predict.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .errors import CorruptFile, ModelLoad, VersionMismatch
from .features import EncodingModel
from .forest import RandomForestModel, Tree
from .svm import BinaryMachine, KernelSpec, SvmModel, SvmParams

FORMAT_NAME = "agrorec-model"
FORMAT_VERSION = 1


def _encoding_to_dict(enc: EncodingModel | None):
    if enc is None:
        return None
    return {
        "numeric_columns": enc.numeric_columns,
        "means": enc.means.tolist(),
        "stds": enc.stds.tolist(),
        "one_hot_map": {k: list(v) for k, v in enc.one_hot_map.items()},
        "feature_names": enc.feature_names,
        "dropped_constant": enc.dropped_constant,
        "standardize": enc.standardize,
        "class_names": list(enc.class_names),
    }


def _encoding_from_dict(d) -> EncodingModel | None:
    if d is None:
        return None
    return EncodingModel(
        numeric_columns=list(d["numeric_columns"]),
        means=np.array(d["means"], dtype=float),
        stds=np.array(d["stds"], dtype=float),
        one_hot_map={k: list(v) for k, v in d["one_hot_map"].items()},
        feature_names=list(d["feature_names"]),
        dropped_constant=list(d["dropped_constant"]),
        standardize=bool(d["standardize"]),
        class_names=tuple(d["class_names"]),
    )


def _payload(model) -> dict:
    if isinstance(model, RandomForestModel):
        return {
            "kind": "rf",
            "n_trees": model.n_trees,
            "mtry": model.mtry,
            "seed": model.seed,
            "max_depth": model.max_depth,
            "min_node": model.min_node,
            "oob_error": model.oob_error,
            "config_hash": model.config_hash,
            "class_names": list(model.class_names),
            "feature_names": model.feature_names,
            "encoding": _encoding_to_dict(model.encoding),
            "trees": [
                {
                    "feature": t.feature.tolist(),
                    "threshold": t.threshold.tolist(),
                    "left": t.left.tolist(),
                    "right": t.right.tolist(),
                    "n_samples": t.n_samples.tolist(),
                    "impurity_decrease": t.impurity_decrease.tolist(),
                    "class_counts": t.class_counts.tolist(),
                }
                for t in model.trees
            ],
        }
    if isinstance(model, SvmModel):
        return {
            "kind": "svm",
            "params": {
                "c": model.params.c,
                "kernel": model.params.kernel,
                "gamma": model.params.gamma,
                "tol": model.params.tol,
                "max_passes": model.params.max_passes,
                "seed": model.params.seed,
            },
            "class_names": list(model.class_names),
            "feature_names": model.feature_names,
            "encoding": _encoding_to_dict(model.encoding),
            "config_hash": model.config_hash,
            "omitted_pairs": [list(p) for p in model.omitted_pairs],
            "machines": [
                {
                    "pair": list(m.class_pair),
                    "support_vectors": m.support_vectors.tolist(),
                    "alpha_y": m.alpha_y.tolist(),
                    "bias": m.bias,
                    "kernel_kind": m.kernel.kind,
                    "gamma": m.kernel.gamma,
                    "c": m.c,
                    "converged": m.converged,
                    "sweeps": m.sweeps,
                }
                for m in model.machines.values()
            ],
        }
    raise ModelLoad(f"cannot serialize object of type {type(model).__name__}")


def save_model(model, path: str | Path) -> None:
    body = json.dumps(_payload(model), sort_keys=True, separators=(",", ":"),
                      allow_nan=False)
    digest = hashlib.sha256(body.encode("utf-8")).hexdigest()
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write(f"{FORMAT_NAME} {FORMAT_VERSION}\n")
        fh.write(body + "\n")
        fh.write(f"sha256 {digest}\n")


def load_model(path: str | Path):
    path = Path(path)
    if not path.exists():
        raise ModelLoad(f"no such model file: {path}")
    lines = path.read_text(encoding="utf-8").splitlines()
    if len(lines) < 3 or not lines[0].startswith(FORMAT_NAME + " "):
        raise CorruptFile(f"{path} is not an {FORMAT_NAME} file")
    try:
        version = int(lines[0].split()[1])
    except (IndexError, ValueError):
        raise CorruptFile(f"{path}: malformed version line") from None
    if version > FORMAT_VERSION:
        raise VersionMismatch(
            f"{path} uses format version {version}; this build reads <= {FORMAT_VERSION}")
    body = lines[1]
    check = lines[2].split()
    if len(check) != 2 or check[0] != "sha256":
        raise CorruptFile(f"{path}: missing checksum line")
    if hashlib.sha256(body.encode("utf-8")).hexdigest() != check[1]:
        raise CorruptFile(f"{path}: checksum mismatch")
    try:
        payload = json.loads(body)
    except json.JSONDecodeError as exc:
        raise CorruptFile(f"{path}: payload is not valid JSON ({exc})") from None

    kind = payload.get("kind")
    if kind == "rf":
        trees = [
            Tree(
                feature=np.array(t["feature"], dtype=np.int64),
                threshold=np.array(t["threshold"], dtype=float),
                left=np.array(t["left"], dtype=np.int64),
                right=np.array(t["right"], dtype=np.int64),
                n_samples=np.array(t["n_samples"], dtype=np.int64),
                impurity_decrease=np.array(t["impurity_decrease"], dtype=float),
                class_counts=np.array(t["class_counts"], dtype=np.int64),
            )
            for t in payload["trees"]
        ]
        return RandomForestModel(
            trees=trees,
            n_trees=payload["n_trees"],
            mtry=payload["mtry"],
            seed=payload["seed"],
            max_depth=payload["max_depth"],
            min_node=payload["min_node"],
            feature_names=list(payload["feature_names"]),
            class_names=tuple(payload["class_names"]),
            oob_error=payload["oob_error"],
            encoding=_encoding_from_dict(payload.get("encoding")),
            config_hash=payload.get("config_hash", ""),
        )
    if kind == "svm":
        p = payload["params"]
        params = SvmParams(c=p["c"], kernel=p["kernel"], gamma=p["gamma"],
                           tol=p["tol"], max_passes=p["max_passes"], seed=p["seed"])
        machines = {}
        for m in payload["machines"]:
            pair = (int(m["pair"][0]), int(m["pair"][1]))
            machines[pair] = BinaryMachine(
                class_pair=pair,
                support_vectors=np.array(m["support_vectors"], dtype=float),
                alpha_y=np.array(m["alpha_y"], dtype=float),
                bias=float(m["bias"]),
                kernel=KernelSpec(m["kernel_kind"], m["gamma"]),
                c=float(m["c"]),
                converged=bool(m["converged"]),
                sweeps=int(m["sweeps"]),
            )
        return SvmModel(
            machines=machines,
            params=params,
            feature_names=list(payload["feature_names"]),
            class_names=tuple(payload["class_names"]),
            omitted_pairs=[tuple(q) for q in payload["omitted_pairs"]],
            encoding=_encoding_from_dict(payload.get("encoding")),
            config_hash=payload.get("config_hash", ""),
        )
    raise CorruptFile(f"{path}: unknown model kind {kind!r}")
