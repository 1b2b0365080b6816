"""RBF-kernel soft-margin SVM trained with a deterministic SMO solver,
plus stratified cross-validation and train/eval splitting.

The solver is the classic two-multiplier coordinate ascent on the dual:
pick a KKT-violating multiplier, pair it with the one maximizing
|E_i - E_j| (ties to the lowest index, so runs are reproducible), solve the
two-variable subproblem analytically, repeat until a full pass changes
nothing. Desk-scale problems converge in a handful of passes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConvergenceError,
    InvalidInputError,
    InvalidParameterError,
    InvalidTrainingSetError,
)
from .features import stratified_folds

KKT_TOL = 1e-3
MAX_PASSES = 100_000


def rbf_kernel(x: np.ndarray, x2: np.ndarray, gamma: float) -> float:
    """exp(-gamma * ||x - x2||^2); in (0, 1], symmetric."""
    x = np.asarray(x, dtype=np.float64)
    x2 = np.asarray(x2, dtype=np.float64)
    if x.shape != x2.shape:
        raise InvalidInputError(f"dimension mismatch: {x.shape} vs {x2.shape}")
    if gamma <= 0:
        raise InvalidParameterError(f"gamma must be > 0, got {gamma}")
    d = x - x2
    return float(np.exp(-gamma * np.dot(d, d)))


def _gram(X: np.ndarray, Y: np.ndarray, gamma: float) -> np.ndarray:
    sq = (
        np.sum(X * X, axis=1)[:, None]
        + np.sum(Y * Y, axis=1)[None, :]
        - 2.0 * (X @ Y.T)
    )
    return np.exp(-gamma * np.maximum(sq, 0.0))


def median_heuristic_gamma(X: np.ndarray) -> float:
    """gamma = 1 / (2 sigma^2), sigma = median pairwise Euclidean distance."""
    X = np.asarray(X, dtype=np.float64)
    n = len(X)
    if n < 2:
        raise InvalidInputError("need at least 2 rows for the median heuristic")
    sq = (
        np.sum(X * X, axis=1)[:, None]
        + np.sum(X * X, axis=1)[None, :]
        - 2.0 * (X @ X.T)
    )
    iu = np.triu_indices(n, k=1)
    sigma = float(np.median(np.sqrt(np.maximum(sq[iu], 0.0))))
    if sigma == 0.0:
        raise InvalidTrainingSetError("all rows identical: median distance is zero")
    return 1.0 / (2.0 * sigma * sigma)


@dataclass(frozen=True)
class SvmModel:
    support_vectors: np.ndarray  # (n_sv, d)
    dual_coef: np.ndarray  # alpha_i * y_i, |.| <= C
    bias: float
    gamma: float
    c: float
    class_labels: tuple[str, str]  # maps to (-1, +1)

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.support_vectors.shape[1]:
            raise InvalidInputError(
                f"dimension mismatch: model expects {self.support_vectors.shape[1]}, "
                f"got {X.shape[1]}"
            )
        k = _gram(X, self.support_vectors, self.gamma)
        return k @ self.dual_coef + self.bias


def svm_fit(
    X: np.ndarray,
    y,
    c: float = 1.0,
    gamma: float | None = None,
    tol: float = KKT_TOL,
    max_passes: int = MAX_PASSES,
) -> SvmModel:
    """Fit the soft-margin dual by sequential minimal optimization.

    y holds exactly two label values (any hashable/str); the smaller sorts
    to -1. gamma defaults to the median pairwise-distance heuristic.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or not np.all(np.isfinite(X)):
        raise InvalidInputError("X must be a finite 2-D array")
    labels = np.asarray(y)
    classes = sorted(set(labels.tolist()))
    if len(classes) != 2:
        raise InvalidTrainingSetError(f"need exactly 2 classes, got {classes}")
    if c <= 0:
        raise InvalidParameterError(f"C must be > 0, got {c}")
    if gamma is None:
        gamma = median_heuristic_gamma(X)
    if gamma <= 0:
        raise InvalidParameterError(f"gamma must be > 0, got {gamma}")

    yv = np.where(labels == classes[1], 1.0, -1.0)
    n = len(X)
    K = _gram(X, X, gamma)
    alpha = np.zeros(n)
    b = 0.0
    # error cache: E[i] = f(x_i) - y_i; with alpha = 0, f = b = 0
    E = -yv.copy()

    def take_step(i: int, j: int) -> bool:
        nonlocal b
        if i == j:
            return False
        if yv[i] == yv[j]:
            lo = max(0.0, alpha[i] + alpha[j] - c)
            hi = min(c, alpha[i] + alpha[j])
        else:
            lo = max(0.0, alpha[j] - alpha[i])
            hi = min(c, c + alpha[j] - alpha[i])
        if hi - lo < 1e-12:
            return False
        eta = 2.0 * K[i, j] - K[i, i] - K[j, j]
        if eta >= 0.0:
            return False
        aj_new = alpha[j] - yv[j] * (E[i] - E[j]) / eta
        aj_new = min(hi, max(lo, aj_new))
        if abs(aj_new - alpha[j]) < 1e-12:
            return False
        ai_new = alpha[i] + yv[i] * yv[j] * (alpha[j] - aj_new)
        d_i = (ai_new - alpha[i]) * yv[i]
        d_j = (aj_new - alpha[j]) * yv[j]
        b1 = b - E[i] - d_i * K[i, i] - d_j * K[i, j]
        b2 = b - E[j] - d_i * K[i, j] - d_j * K[j, j]
        if 0.0 < ai_new < c:
            b_new = b1
        elif 0.0 < aj_new < c:
            b_new = b2
        else:
            b_new = (b1 + b2) / 2.0
        E[:] += d_i * K[i] + d_j * K[j] + (b_new - b)
        alpha[i], alpha[j], b = ai_new, aj_new, b_new

        return True

    def violates(i: int) -> bool:
        r = E[i] * yv[i]
        return (r < -tol and alpha[i] < c) or (r > tol and alpha[i] > 0.0)

    passes = 0
    examine_all = True
    while True:
        passes += 1
        if passes > max_passes:
            raise ConvergenceError(
                f"SMO did not converge within {max_passes} passes "
                f"(n={n}, C={c}, gamma={gamma:.4g})"
            )
        changed = 0
        idx = range(n) if examine_all else [k for k in range(n) if 0.0 < alpha[k] < c]
        for i in idx:
            if not violates(i):
                continue
            # second choice: maximize |E_i - E_j|, lowest index on ties
            j = int(np.argmax(np.abs(E[i] - E)))
            if take_step(i, j):
                changed += 1
                continue
            stepped = False
            for j in range(n):
                if take_step(i, j):
                    changed += 1
                    stepped = True
                    break
            if not stepped:
                continue
        if examine_all:
            if changed == 0:
                break
            examine_all = False
        elif changed == 0:
            examine_all = True

    sv = alpha > 1e-12
    return SvmModel(
        support_vectors=X[sv].copy(),
        dual_coef=(alpha * yv)[sv],
        bias=float(b),
        gamma=float(gamma),
        c=float(c),
        class_labels=(str(classes[0]), str(classes[1])),
    )


def svm_predict(model: SvmModel, x) -> tuple[str, float]:
    """Label of one feature row, plus the raw decision value."""
    value = float(model.decision_function(np.atleast_2d(x))[0])
    return (model.class_labels[1] if value >= 0 else model.class_labels[0]), value


def predict_labels(model: SvmModel, X: np.ndarray) -> np.ndarray:
    values = model.decision_function(X)
    return np.where(values >= 0, model.class_labels[1], model.class_labels[0])


def cross_validate(
    X: np.ndarray,
    y,
    k: int = 5,
    seed: int = 0,
    c: float = 1.0,
    gamma: float | None = None,
) -> tuple[float, float, list[float]]:
    """Stratified k-fold accuracy: (mean, sample std, per-fold accuracies)."""
    X = np.asarray(X, dtype=np.float64)
    labels = np.asarray(y)
    if k < 2:
        raise InvalidParameterError(f"k must be >= 2, got {k}")
    for cls in np.unique(labels):
        n_c = int(np.sum(labels == cls))
        if n_c < k:
            raise InvalidParameterError(
                f"class {cls!r} has {n_c} rows, fewer than k={k}"
            )
    folds = stratified_folds(labels, k, seed)
    per_fold = []
    for i in range(k):
        test = folds[i]
        train = np.setdiff1d(np.arange(len(labels)), test)
        model = svm_fit(X[train], labels[train], c=c, gamma=gamma)
        pred = predict_labels(model, X[test])
        per_fold.append(float(np.mean(pred == labels[test].astype(str))))
    mean = float(np.mean(per_fold))
    std = float(np.std(per_fold, ddof=1)) if k > 1 else 0.0
    return mean, std, per_fold


def train_eval_split(
    X: np.ndarray, y, train_fraction: float = 0.8, seed: int = 0
) -> tuple[np.ndarray, np.ndarray]:
    """Stratified row-index split: (train_idx, eval_idx), disjoint, exhaustive."""
    if not (0.0 < train_fraction < 1.0):
        raise InvalidParameterError(
            f"train_fraction must be in (0, 1), got {train_fraction}"
        )
    labels = np.asarray(y)
    rng = np.random.default_rng(seed)
    train, evl = [], []
    for cls in np.unique(labels):
        idx = np.flatnonzero(labels == cls)
        rng.shuffle(idx)
        n_train = int(round(train_fraction * len(idx)))
        train.extend(idx[:n_train].tolist())
        evl.extend(idx[n_train:].tolist())
    if not train or not evl:
        raise InvalidParameterError(
            f"train_fraction {train_fraction} leaves an empty side "
            f"({len(train)} train / {len(evl)} eval rows)"
        )
    return np.array(sorted(train), dtype=np.int64), np.array(sorted(evl), dtype=np.int64)


def save_model(model: SvmModel, path, metadata: dict | None = None) -> None:
    """JSON persistence; repr-exact floats, so reload predicts identically."""
    doc = {
        "format": "emglabel-svm-v1",
        "gamma": model.gamma,
        "c": model.c,
        "bias": model.bias,
        "class_labels": list(model.class_labels),
        "dual_coef": model.dual_coef.tolist(),
        "support_vectors": model.support_vectors.tolist(),
    }
    if metadata:
        doc["metadata"] = metadata
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_model(path) -> tuple[SvmModel, dict]:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format") != "emglabel-svm-v1":
        raise InvalidInputError(f"{path}: not an emglabel SVM model file")
    model = SvmModel(
        support_vectors=np.array(doc["support_vectors"], dtype=np.float64),
        dual_coef=np.array(doc["dual_coef"], dtype=np.float64),
        bias=float(doc["bias"]),
        gamma=float(doc["gamma"]),
        c=float(doc["c"]),
        class_labels=tuple(doc["class_labels"]),
    )
    return model, doc.get("metadata", {})
