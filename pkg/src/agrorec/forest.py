"""Random forest built on CART trees with Gini impurity.

Trees are stored as flat arrays (feature, threshold, children, counts) so
prediction routes through the compiled kernel and models serialize to a
plain text format. All randomness is drawn from per-tree generators derived
from (seed, tree index): training is bit-reproducible no matter how many
worker threads run.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .constants import CROPS
from .errors import ArityMismatch, BadParams, EmptyInput, EmptyNode
from .rng import spawn


def gini(counts) -> float:
    """Gini impurity 1 - sum((c_i / n)^2) of a class-count vector."""
    c = np.asarray(counts, dtype=float)
    if c.size == 0 or c.sum() <= 0:
        raise EmptyNode("gini needs a nonempty count vector")
    if (c < 0).any():
        raise ValueError("negative class count")
    p = c / c.sum()
    return float(1.0 - np.sum(p * p))


def best_split(rows: np.ndarray, labels: np.ndarray, candidate_features,
               n_classes: int | None = None):
    """Exhaustive best split over the candidate features.

    Scans midpoints between consecutive distinct sorted values and maximizes
    the weighted Gini decrease; ties break to the lower feature index, then
    the lower threshold. Returns (feature, threshold, decrease) or None when
    no split reduces impurity.
    """
    x = np.asarray(rows, dtype=float)
    y = np.asarray(labels, dtype=np.int64)
    if n_classes is None:
        n_classes = int(y.max()) + 1
    feats = np.sort(np.asarray(candidate_features, dtype=np.int64))
    sub = np.ascontiguousarray(x[:, feats])
    col, thr, best, parent = kernels.split_scan(sub, y, n_classes)
    if col < 0:
        return None
    n = x.shape[0]
    decrease = (best - parent) / n
    return int(feats[col]), float(thr), float(decrease)


@dataclass
class TreeParams:
    max_depth: int | None = None
    min_node: int = 1
    mtry: int | None = None  # None -> all features


@dataclass
class Tree:
    """Flat-array CART tree; feature[i] == -1 marks a leaf."""
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    n_samples: np.ndarray
    impurity_decrease: np.ndarray
    class_counts: np.ndarray  # (n_nodes, n_classes)

    @property
    def n_nodes(self) -> int:
        return self.feature.shape[0]

    def leaf_ids(self, x: np.ndarray) -> np.ndarray:
        return kernels.tree_route(self.feature, self.threshold, self.left,
                                  self.right, np.ascontiguousarray(x, dtype=float))

    def predict(self, x: np.ndarray) -> np.ndarray:
        """Leaf prediction: argmax of class counts, lowest index on ties."""
        return np.argmax(self.class_counts[self.leaf_ids(x)], axis=1)


def grow_tree(rows: np.ndarray, labels: np.ndarray, params: TreeParams,
              rng: np.random.Generator, n_classes: int) -> Tree:
    """Recursive CART induction, deterministic given the rng stream.

    Nodes are expanded depth-first, left child first; the feature subsample
    for a node is drawn exactly when that node is expanded, which pins the
    rng consumption order.
    """
    x = np.asarray(rows, dtype=float)
    y = np.asarray(labels, dtype=np.int64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise EmptyInput("grow_tree needs at least one row")
    n, p = x.shape
    mtry = p if params.mtry is None else params.mtry
    if not 1 <= mtry <= p:
        raise BadParams(f"mtry={mtry} outside 1..{p}")

    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    n_samples: list[int] = []
    decrease: list[float] = []
    counts_rows: list[np.ndarray] = []

    def new_node(idx: np.ndarray) -> int:
        node = len(feature)
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        n_samples.append(idx.size)
        decrease.append(0.0)
        counts_rows.append(np.bincount(y[idx], minlength=n_classes).astype(np.int64))
        return node

    root_idx = np.arange(n, dtype=np.int64)
    stack: list[tuple[int, np.ndarray, int]] = [(new_node(root_idx), root_idx, 0)]
    while stack:
        node, idx, depth = stack.pop()
        counts = counts_rows[node]
        if idx.size < 2 or idx.size <= params.min_node:
            continue
        if int((counts > 0).sum()) <= 1:
            continue
        if params.max_depth is not None and depth >= params.max_depth:
            continue
        feats = np.sort(rng.choice(p, size=mtry, replace=False))
        sub = np.ascontiguousarray(x[idx][:, feats])
        col, thr, best, parent = kernels.split_scan(sub, y[idx], n_classes)
        if col < 0:
            continue
        f = int(feats[col])
        mask = x[idx, f] <= thr
        left_idx = idx[mask]
        right_idx = idx[~mask]
        feature[node] = f
        threshold[node] = float(thr)
        decrease[node] = (best - parent) / idx.size
        lid = new_node(left_idx)
        rid = new_node(right_idx)
        left[node] = lid
        right[node] = rid
        # push right first so the left child is expanded next
        stack.append((rid, right_idx, depth + 1))
        stack.append((lid, left_idx, depth + 1))

    return Tree(
        feature=np.array(feature, dtype=np.int64),
        threshold=np.array(threshold, dtype=float),
        left=np.array(left, dtype=np.int64),
        right=np.array(right, dtype=np.int64),
        n_samples=np.array(n_samples, dtype=np.int64),
        impurity_decrease=np.array(decrease, dtype=float),
        class_counts=np.vstack(counts_rows).astype(np.int64),
    )


@dataclass
class RfParams:
    n_trees: int = 500
    mtry: int | None = None  # None -> floor(sqrt(p))
    max_depth: int | None = None
    min_node: int = 1
    seed: int = 0
    n_jobs: int = 1


@dataclass
class RandomForestModel:
    trees: list[Tree]
    n_trees: int
    mtry: int
    seed: int
    max_depth: int | None
    min_node: int
    feature_names: list[str]
    class_names: tuple[str, ...] = CROPS
    oob_error: float | None = None
    encoding: object = None  # EncodingModel carried for raw-record scoring
    config_hash: str = ""

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    def predict_batch(self, x: np.ndarray):
        """(classes, votes): majority vote over trees, lowest index on ties."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != self.n_features:
            raise ArityMismatch(f"expected {self.n_features} features, got {x.shape[1]}")
        votes = np.zeros((x.shape[0], len(self.class_names)), dtype=np.int64)
        for tree in self.trees:
            preds = tree.predict(x)
            votes[np.arange(x.shape[0]), preds] += 1
        return np.argmax(votes, axis=1), votes

    def predict(self, x: np.ndarray):
        classes, votes = self.predict_batch(np.asarray(x, dtype=float).reshape(1, -1))
        return int(classes[0]), votes[0]


def rf_train(x: np.ndarray, y: np.ndarray, params: RfParams = RfParams(),
             feature_names: list[str] | None = None,
             class_names: tuple[str, ...] = CROPS) -> RandomForestModel:
    """Bootstrap-aggregated CART trees.

    Each tree draws its bootstrap sample and per-node feature subsamples
    from a generator derived from (seed, tree index); trees may be built in
    parallel threads and are merged in index order, so the model is
    identical for any n_jobs.
    """
    x = np.ascontiguousarray(x, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    if x.ndim != 2 or x.shape[0] == 0 or x.shape[0] != y.shape[0]:
        raise EmptyInput("rf_train needs a nonempty matrix with matching labels")
    n, p = x.shape
    if params.n_trees < 1:
        raise BadParams("n_trees must be >= 1")
    mtry = params.mtry if params.mtry is not None else max(1, int(np.sqrt(p)))
    if not 1 <= mtry <= p:
        raise BadParams(f"rf.mtry={mtry} outside 1..{p}")
    n_classes = len(class_names)
    if y.min() < 0 or y.max() >= n_classes:
        raise BadParams("labels outside the class range")

    tree_params = TreeParams(max_depth=params.max_depth, min_node=params.min_node,
                             mtry=mtry)

    def build(t: int):
        rng = spawn(params.seed, "rf-tree", t)
        boot = rng.integers(0, n, size=n)
        tree = grow_tree(x[boot], y[boot], tree_params, rng, n_classes)
        inbag = np.zeros(n, dtype=bool)
        inbag[boot] = True
        return tree, ~inbag

    if params.n_jobs > 1:
        with ThreadPoolExecutor(max_workers=params.n_jobs) as pool:
            built = list(pool.map(build, range(params.n_trees)))
    else:
        built = [build(t) for t in range(params.n_trees)]

    oob_votes = np.zeros((n, n_classes), dtype=np.int64)
    for tree, oob_mask in built:
        idx = np.nonzero(oob_mask)[0]
        if idx.size:
            preds = tree.predict(x[idx])
            oob_votes[idx, preds] += 1
    covered = oob_votes.sum(axis=1) > 0
    oob_error = None
    if covered.all():
        oob_error = float(np.mean(np.argmax(oob_votes, axis=1) != y))

    return RandomForestModel(
        trees=[t for t, _ in built],
        n_trees=params.n_trees,
        mtry=mtry,
        seed=params.seed,
        max_depth=params.max_depth,
        min_node=params.min_node,
        feature_names=list(feature_names) if feature_names is not None
        else [f"f{i}" for i in range(p)],
        class_names=tuple(class_names),
        oob_error=oob_error,
    )


def rf_predict(model: RandomForestModel, x: np.ndarray):
    return model.predict(x)


# -- importance ---------------------------------------------------------------


@dataclass
class ImportanceReport:
    method: str  # "MeanDecreaseImpurity" | "Permutation"
    scores: list[tuple[str, float]] = field(default_factory=list)  # descending

    def ranking(self) -> list[str]:
        return [name for name, _ in self.scores]


def _rank(scores: dict[str, float]) -> list[tuple[str, float]]:
    return sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))


def rf_importance(model: RandomForestModel, aggregate_one_hot: bool = False) -> ImportanceReport:
    """Mean decrease in impurity: per feature, the sample-weighted impurity
    decrease of every node splitting on it, summed and averaged over trees."""
    totals = np.zeros(model.n_features)
    for tree in model.trees:
        root_n = tree.n_samples[0]
        split_nodes = np.nonzero(tree.feature >= 0)[0]
        for node in split_nodes:
            weight = tree.n_samples[node] / root_n
            totals[tree.feature[node]] += weight * tree.impurity_decrease[node]
    totals /= len(model.trees)
    scores: dict[str, float] = {}
    for name, value in zip(model.feature_names, totals):
        key = name.split("=", 1)[0] if aggregate_one_hot else name
        scores[key] = scores.get(key, 0.0) + float(value)
    return ImportanceReport(method="MeanDecreaseImpurity", scores=_rank(scores))


def permutation_importance(model, x: np.ndarray, y: np.ndarray, seed: int = 0,
                           repeats: int = 5) -> ImportanceReport:
    """Accuracy drop after shuffling each column, averaged over seeded repeats.

    Works for any model exposing predict_batch and feature_names.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    if x.shape[0] == 0:
        raise EmptyInput("permutation importance needs evaluation rows")
    base_pred, _ = model.predict_batch(x)
    base = float(np.mean(base_pred == y))
    scores: dict[str, float] = {}
    for f, name in enumerate(model.feature_names):
        drops = []
        for rep in range(repeats):
            rng = spawn(seed, "perm-importance", f, rep)
            xp = x.copy()
            xp[:, f] = xp[rng.permutation(x.shape[0]), f]
            pred, _ = model.predict_batch(xp)
            drops.append(base - float(np.mean(pred == y)))
        scores[name] = float(np.mean(drops))
    return ImportanceReport(method="Permutation", scores=_rank(scores))
