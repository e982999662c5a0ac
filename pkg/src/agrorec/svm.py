"""Multiclass SVM: one binary machine per class pair, trained by SMO.

The pairwise dual problems are solved by the compiled SMO kernel; this
module owns kernel (Gram) evaluation, one-vs-one training and voting.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .constants import CROPS
from .errors import ArityMismatch, SingleClass


@dataclass(frozen=True)
class KernelSpec:
    kind: str = "rbf"  # "linear" | "rbf"
    gamma: float | None = None  # rbf width; None -> 1/n_features at train time

    def resolved(self, n_features: int) -> "KernelSpec":
        if self.kind == "rbf" and self.gamma is None:
            return KernelSpec("rbf", 1.0 / n_features)
        return self


def kernel_eval(spec: KernelSpec, x, y) -> float:
    """Single kernel evaluation: dot(x, y) or exp(-gamma * ||x - y||^2)."""
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    if xa.shape != ya.shape:
        raise ArityMismatch(f"{xa.shape} vs {ya.shape}")
    if spec.kind == "linear":
        return float(xa @ ya)
    if spec.kind == "rbf":
        d = xa - ya
        return float(np.exp(-spec.gamma * (d @ d)))
    raise ValueError(f"unknown kernel {spec.kind!r}")


def gram_matrix(spec: KernelSpec, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape[1] != b.shape[1]:
        raise ArityMismatch(f"{a.shape[1]} vs {b.shape[1]} features")
    if spec.kind == "linear":
        return a @ b.T
    if spec.kind == "rbf":
        sq = (np.sum(a * a, axis=1)[:, None] + np.sum(b * b, axis=1)[None, :]
              - 2.0 * (a @ b.T))
        np.maximum(sq, 0.0, out=sq)
        return np.exp(-spec.gamma * sq)
    raise ValueError(f"unknown kernel {spec.kind!r}")


@dataclass
class BinaryMachine:
    """One pairwise classifier; decision > 0 votes for the lower class index."""
    class_pair: tuple[int, int]
    support_vectors: np.ndarray
    alpha_y: np.ndarray  # alpha_i * y_i per support vector
    bias: float
    kernel: KernelSpec
    c: float
    converged: bool
    sweeps: int

    def decision(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != self.support_vectors.shape[1]:
            raise ArityMismatch(
                f"expected {self.support_vectors.shape[1]} features, got {x.shape[1]}")
        return gram_matrix(self.kernel, x, self.support_vectors) @ self.alpha_y + self.bias


@dataclass
class SmoResult:
    alpha: np.ndarray
    bias: float
    converged: bool
    sweeps: int
    objective_history: np.ndarray
    f_values: np.ndarray  # decision values without bias, training rows


def smo_train_binary(x: np.ndarray, y: np.ndarray, c: float = 1.0,
                     kernel: KernelSpec = KernelSpec("linear"), tol: float = 1e-3,
                     max_passes: int = 200, track_objective: bool = False) -> SmoResult:
    """Solve the binary soft-margin dual for labels in {-1, +1}.

    The sweep loop enforces KKT to a tolerance strictly tighter than `tol`
    so that the final bias (averaged over the free support vectors) keeps
    every point's KKT residual under `tol`. Hitting max_passes returns the
    best iterate with converged=False.
    """
    x = np.ascontiguousarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    labels = set(np.unique(y))
    if not labels <= {-1.0, 1.0}:
        raise ValueError("labels must be -1/+1")
    if len(labels) < 2:
        raise SingleClass("both classes must be present")
    spec = kernel.resolved(x.shape[1])
    gram = gram_matrix(spec, x, x)
    cap = 100_000 if track_objective else 0
    obj_out = np.zeros(cap)
    alpha, _, sweeps, converged, n_rec = kernels.smo_solve(
        gram, y, float(c), 0.4 * tol, int(max_passes), obj_out)

    f_values = gram @ (alpha * y)
    bound_eps = 1e-8 * max(1.0, c)
    interior = (alpha > bound_eps) & (alpha < c - bound_eps)
    support = alpha > bound_eps
    if interior.any():
        bias = float(np.mean(y[interior] - f_values[interior]))
    elif support.any():
        bias = float(np.mean(y[support] - f_values[support]))
    else:
        bias = 0.0
    return SmoResult(alpha=alpha, bias=bias, converged=bool(converged),
                     sweeps=int(sweeps), objective_history=obj_out[:n_rec],
                     f_values=f_values)


def kkt_residuals(alpha: np.ndarray, y: np.ndarray, f_values: np.ndarray,
                  bias: float, c: float) -> np.ndarray:
    """Per-point violation of the KKT case implied by each alpha."""
    margins = y * (f_values + bias)  # y_i * f(x_i)
    res = np.zeros_like(alpha)
    bound_eps = 1e-8 * max(1.0, c)
    lower = alpha <= bound_eps            # require margin >= 1
    upper = alpha >= c - bound_eps        # require margin <= 1
    inter = ~lower & ~upper               # require margin == 1
    res[lower] = np.maximum(0.0, 1.0 - margins[lower])
    res[upper] = np.maximum(0.0, margins[upper] - 1.0)
    res[inter] = np.abs(margins[inter] - 1.0)
    return res


def dual_objective(alpha: np.ndarray, y: np.ndarray, gram: np.ndarray) -> float:
    ay = alpha * y
    return float(alpha.sum() - 0.5 * ay @ (gram @ ay))


@dataclass
class SvmParams:
    c: float = 1.0
    kernel: str = "rbf"
    gamma: float | None = None  # None -> 1/n_features
    tol: float = 1e-3
    max_passes: int = 200
    n_jobs: int = 1
    seed: int = 0  # recorded for provenance; training itself is deterministic


@dataclass
class SvmModel:
    machines: dict  # (i, j) with i < j -> BinaryMachine
    params: SvmParams
    feature_names: list[str]
    class_names: tuple[str, ...] = CROPS
    omitted_pairs: list[tuple[int, int]] = field(default_factory=list)
    encoding: object = None
    config_hash: str = ""

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    def predict_batch(self, x: np.ndarray):
        """One-vs-one vote. Ties break by summed |decision| of the won
        machines, then by the lowest class index."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != self.n_features:
            raise ArityMismatch(f"expected {self.n_features} features, got {x.shape[1]}")
        n = x.shape[0]
        k = len(self.class_names)
        votes = np.zeros((n, k), dtype=np.int64)
        strength = np.zeros((n, k))
        for (a, b), machine in self.machines.items():
            f = machine.decision(x)
            wins_a = f > 0
            votes[wins_a, a] += 1
            votes[~wins_a, b] += 1
            strength[wins_a, a] += np.abs(f[wins_a])
            strength[~wins_a, b] += np.abs(f[~wins_a])
        best = np.argmax(votes, axis=1)
        top = votes[np.arange(n), best]
        tied = (votes == top[:, None]).sum(axis=1) > 1
        for row in np.nonzero(tied)[0]:
            cands = np.nonzero(votes[row] == top[row])[0]
            best[row] = cands[np.argmax(strength[row, cands])]
        return best, votes

    def predict(self, x: np.ndarray):
        classes, votes = self.predict_batch(np.asarray(x, dtype=float).reshape(1, -1))
        return int(classes[0]), votes[0]


def svm_train_multiclass(x: np.ndarray, y: np.ndarray, params: SvmParams = SvmParams(),
                         feature_names: list[str] | None = None,
                         class_names: tuple[str, ...] = CROPS) -> SvmModel:
    """Train one machine per unordered pair of classes present in y.

    Class-pair problems are independent; they may run on a thread pool and
    are merged in pair order. Pairs whose classes have no rows are omitted
    and recorded.
    """
    x = np.ascontiguousarray(x, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    present = sorted(int(c) for c in np.unique(y))
    if len(present) < 2:
        raise SingleClass("need at least two classes with rows")
    spec = KernelSpec(params.kernel, params.gamma).resolved(x.shape[1])

    k = len(class_names)
    all_pairs = [(a, b) for a in range(k) for b in range(a + 1, k)]
    trainable = [(a, b) for (a, b) in all_pairs if a in present and b in present]
    omitted = [p for p in all_pairs if p not in set(trainable)]

    def build(pair):
        a, b = pair
        mask = (y == a) | (y == b)
        xs = x[mask]
        ybin = np.where(y[mask] == a, 1.0, -1.0)
        result = smo_train_binary(xs, ybin, c=params.c, kernel=spec, tol=params.tol,
                                  max_passes=params.max_passes)
        sv = result.alpha > 1e-10
        return BinaryMachine(
            class_pair=pair,
            support_vectors=xs[sv].copy(),
            alpha_y=(result.alpha * ybin)[sv].copy(),
            bias=result.bias,
            kernel=spec,
            c=params.c,
            converged=result.converged,
            sweeps=result.sweeps,
        )

    if params.n_jobs > 1:
        with ThreadPoolExecutor(max_workers=params.n_jobs) as pool:
            machines = list(pool.map(build, trainable))
    else:
        machines = [build(p) for p in trainable]

    return SvmModel(
        machines={m.class_pair: m for m in machines},
        params=params,
        feature_names=list(feature_names) if feature_names is not None
        else [f"f{i}" for i in range(x.shape[1])],
        class_names=tuple(class_names),
        omitted_pairs=omitted,
    )


def svm_predict(model: SvmModel, x: np.ndarray):
    return model.predict(x)
