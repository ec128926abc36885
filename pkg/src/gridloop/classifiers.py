"""Supervised detectors: numpy-only classifiers with JSON round-tripping.

Three binary classifiers share one small contract: ``fit(X, y)`` with
labels in {0, 1} (both present), ``predict_score(X)`` returning an
attack probability/score in [0, 1], and lossless (de)serialization via
``to_dict``/``from_dict`` so fitted models survive a JSON round trip.

All three drop constant feature columns at fit time (with a warning) and
remember which columns survived, because a zero-variance column breaks
z-scoring and likelihoods and can never carry a split.
"""

from __future__ import annotations

import json
import math
import warnings

import numpy as np

from gridloop.seeds import stream

__all__ = [
    "GaussianNaiveBayes",
    "LogisticRegression",
    "RandomForest",
    "load_model",
    "save_model",
]

_MAX_BINS = 256


def _validate_xy(X, y):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    if X.ndim != 2:
        raise ValueError("X must be 2-d (rows x features)")
    if y.shape != (X.shape[0],):
        raise ValueError("y must be 1-d with one label per row")
    if not np.all((y == 0) | (y == 1)):
        raise ValueError("labels must be 0 or 1")
    if y.min() == y.max():
        raise ValueError("training labels must contain both classes")
    return X, y.astype(np.int8)


def _drop_constant(X):
    keep = X.min(axis=0) < X.max(axis=0)
    if not np.all(keep):
        warnings.warn(
            f"dropping {int((~keep).sum())} constant feature column(s)",
            stacklevel=3,
        )
    if not np.any(keep):
        raise ValueError("all feature columns are constant")
    return X[:, keep], keep


class LogisticRegression:
    """L2-penalized logistic regression on z-scored features.

    Full-batch gradient descent with a backtracking step size: the step
    doubles down (x1.1) while the penalized mean log-loss improves and
    halves on any overshoot. Training stops when the loss improves by
    less than ``tol`` or after ``max_epochs`` accepted steps. The
    intercept is not penalized.
    """

    def __init__(self, l2: float = 1.0, max_epochs: int = 1000, tol: float = 1e-8):
        self.l2 = float(l2)
        self.max_epochs = int(max_epochs)
        self.tol = float(tol)
        self.mu = None
        self.sd = None
        self.weights = None
        self.bias = 0.0
        self.kept = None
        self.n_epochs_ = 0

    def _loss_grad(self, Z, y, w, b):
        n = len(y)
        margin = Z @ w + b
        # mean log(1 + exp(-s*margin)) with s = +-1, stably
        signed = np.where(y == 1, -margin, margin)
        loss = float(np.mean(np.logaddexp(0.0, signed)))
        loss += 0.5 * self.l2 * float(w @ w) / n
        p = 1.0 / (1.0 + np.exp(-np.clip(margin, -500, 500)))
        err = p - y
        grad_w = Z.T @ err / n + self.l2 * w / n
        grad_b = float(np.mean(err))
        return loss, grad_w, grad_b

    def fit(self, X, y):
        X, y = _validate_xy(X, y)
        X, self.kept = _drop_constant(X)
        self.mu = X.mean(axis=0)
        self.sd = X.std(axis=0)
        Z = (X - self.mu) / self.sd

        w = np.zeros(Z.shape[1])
        b = 0.0
        lr = 1.0
        loss, gw, gb = self._loss_grad(Z, y, w, b)
        for epoch in range(self.max_epochs):
            while True:
                w_new = w - lr * gw
                b_new = b - lr * gb
                new_loss, new_gw, new_gb = self._loss_grad(Z, y, w_new, b_new)
                if new_loss <= loss or lr < 1e-12:
                    break
                lr *= 0.5
            improved = loss - new_loss
            w, b, loss, gw, gb = w_new, b_new, new_loss, new_gw, new_gb
            lr *= 1.1
            self.n_epochs_ = epoch + 1
            if abs(improved) < self.tol:
                break
        self.weights = w
        self.bias = b
        return self

    def predict_score(self, X):
        X = np.asarray(X, dtype=float)[:, self.kept]
        z = (X - self.mu) / self.sd
        margin = z @ self.weights + self.bias
        return 1.0 / (1.0 + np.exp(-np.clip(margin, -500, 500)))

    def to_dict(self) -> dict:
        return {
            "model": "logistic_regression",
            "l2": self.l2,
            "kept": self.kept.tolist(),
            "mu": self.mu.tolist(),
            "sd": self.sd.tolist(),
            "weights": self.weights.tolist(),
            "bias": self.bias,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "LogisticRegression":
        model = cls(l2=payload["l2"])
        model.kept = np.asarray(payload["kept"], dtype=bool)
        model.mu = np.asarray(payload["mu"], dtype=float)
        model.sd = np.asarray(payload["sd"], dtype=float)
        model.weights = np.asarray(payload["weights"], dtype=float)
        model.bias = float(payload["bias"])
        return model


class GaussianNaiveBayes:
    """Per-class independent Gaussians with frequency priors.

    Class-conditional variances are smoothed by 1e-9 times the largest
    per-feature variance of the whole training matrix, so a feature that
    is constant within one class cannot zero out a likelihood.
    """

    VAR_SMOOTHING = 1e-9

    def __init__(self):
        self.kept = None
        self.priors = None
        self.means = None
        self.vars = None

    def fit(self, X, y):
        X, y = _validate_xy(X, y)
        X, self.kept = _drop_constant(X)
        eps = self.VAR_SMOOTHING * float(X.var(axis=0).max())
        means, variances, priors = [], [], []
        for cls in (0, 1):
            rows = X[y == cls]
            means.append(rows.mean(axis=0))
            variances.append(rows.var(axis=0) + eps)
            priors.append(len(rows) / len(y))
        self.means = np.stack(means)
        self.vars = np.stack(variances)
        self.priors = np.asarray(priors)
        return self

    def _joint_log_likelihood(self, X):
        jll = np.empty((len(X), 2))
        for cls in (0, 1):
            gauss = -0.5 * (
                np.log(2.0 * np.pi * self.vars[cls])
                + (X - self.means[cls]) ** 2 / self.vars[cls]
            ).sum(axis=1)
            jll[:, cls] = math.log(self.priors[cls]) + gauss
        return jll

    def predict_score(self, X):
        X = np.asarray(X, dtype=float)[:, self.kept]
        jll = self._joint_log_likelihood(X)
        shifted = jll - jll.max(axis=1, keepdims=True)
        probs = np.exp(shifted)
        return probs[:, 1] / probs.sum(axis=1)

    def to_dict(self) -> dict:
        return {
            "model": "gaussian_nb",
            "kept": self.kept.tolist(),
            "priors": self.priors.tolist(),
            "means": self.means.tolist(),
            "vars": self.vars.tolist(),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "GaussianNaiveBayes":
        model = cls()
        model.kept = np.asarray(payload["kept"], dtype=bool)
        model.priors = np.asarray(payload["priors"], dtype=float)
        model.means = np.asarray(payload["means"], dtype=float)
        model.vars = np.asarray(payload["vars"], dtype=float)
        return model


class RandomForest:
    """Bagged Gini trees grown on quantile-binned features.

    Each tree bootstraps rows and, at every node, examines
    ceil(sqrt(n_features)) candidate features; the best Gini split wins,
    with ties resolved toward the earlier candidate feature and the lowest
    cut. Split thresholds are actual training values (predicate
    ``x <= value``), so predictions depend only on feature order and are
    unchanged by order-preserving transforms applied consistently to
    training and test data. Nodes stop at purity, fewer than 2 samples,
    or when no cut separates them; leaves vote their majority class (tie
    -> 0) and the forest score is the fraction of trees voting 1.

    Features with more than 256 distinct values are binned to 256
    quantile-spaced cut points (still actual observed values).
    """

    def __init__(self, n_trees: int = 100, mtry: int | None = None, seed: int = 0):
        if n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        self.n_trees = int(n_trees)
        self.mtry = mtry
        self.seed = int(seed)
        self.kept = None
        self.trees: list[dict] = []

    def fit(self, X, y):
        X, y = _validate_xy(X, y)
        X, self.kept = _drop_constant(X)
        n, d = X.shape
        mtry = self.mtry if self.mtry is not None else math.ceil(math.sqrt(d))
        mtry = min(mtry, d)

        cuts = []
        bins = np.empty((n, d), dtype=np.uint8)
        for f in range(d):
            uniq = np.unique(X[:, f])
            if len(uniq) > _MAX_BINS:
                pick = np.unique(
                    np.round(np.linspace(0, len(uniq) - 1, _MAX_BINS)).astype(int)
                )
                uniq = uniq[pick]
            cuts.append(uniq)
            bins[:, f] = np.searchsorted(uniq, X[:, f], side="left")

        self.trees = []
        for t in range(self.n_trees):
            rng = stream(self.seed, "tree", t)
            boot = rng.integers(0, n, size=n)
            self.trees.append(_grow_tree(bins[boot], y[boot], cuts, mtry, rng))
        return self

    def predict_score(self, X):
        X = np.asarray(X, dtype=float)[:, self.kept]
        votes = np.zeros(len(X))
        for tree in self.trees:
            votes += _tree_votes(tree, X)
        return votes / self.n_trees

    def to_dict(self) -> dict:
        return {
            "model": "random_forest",
            "n_trees": self.n_trees,
            "mtry": self.mtry,
            "seed": self.seed,
            "kept": self.kept.tolist(),
            "trees": [
                {key: tree[key].tolist() for key in ("feature", "threshold", "left", "right", "vote")}
                for tree in self.trees
            ],
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "RandomForest":
        model = cls(n_trees=payload["n_trees"], mtry=payload["mtry"], seed=payload["seed"])
        model.kept = np.asarray(payload["kept"], dtype=bool)
        model.trees = [
            {
                "feature": np.asarray(t["feature"], dtype=np.int32),
                "threshold": np.asarray(t["threshold"], dtype=float),
                "left": np.asarray(t["left"], dtype=np.int32),
                "right": np.asarray(t["right"], dtype=np.int32),
                "vote": np.asarray(t["vote"], dtype=np.int8),
            }
            for t in payload["trees"]
        ]
        return model


def _grow_tree(bins, y, cuts, mtry, rng):
    """Level-wise CART on pre-binned features; returns flat node arrays."""
    n, d = bins.shape
    feature = [0]
    threshold = [np.inf]
    left = [0]
    right = [0]
    vote = [np.int8(-1)]

    node_of = np.zeros(n, dtype=np.int32)
    alive = np.ones(n, dtype=bool)

    while np.any(alive):
        idx = np.flatnonzero(alive)
        slot_ids, inv = np.unique(node_of[idx], return_inverse=True)
        n_slots = len(slot_ids)
        counts = np.bincount(inv, minlength=n_slots)
        ones = np.bincount(inv, weights=y[idx], minlength=n_slots)

        resolve = (counts < 2) | (ones == 0) | (ones == counts)
        candidates = np.full((n_slots, mtry), -1, dtype=np.int32)
        for s in range(n_slots):
            if resolve[s]:
                _set_leaf(vote, slot_ids[s], ones[s], counts[s])
            else:
                candidates[s] = rng.choice(d, size=mtry, replace=False)

        best_score = np.full(n_slots, np.inf)
        best_feat = np.full(n_slots, -1, dtype=np.int32)
        best_bin = np.full(n_slots, -1, dtype=np.int64)

        open_slots = ~resolve
        for f in range(d):
            uses = open_slots & np.any(candidates == f, axis=1)
            if not np.any(uses):
                continue
            slot_pos = np.full(n_slots, -1, dtype=np.int64)
            active = np.flatnonzero(uses)
            slot_pos[active] = np.arange(len(active))
            pos = slot_pos[inv]
            m = pos >= 0
            rows = idx[m]
            n_bins = len(cuts[f])
            composite = (pos[m] * n_bins + bins[rows, f]) * 2 + y[rows]
            hist = np.bincount(composite, minlength=len(active) * n_bins * 2)
            hist = hist.reshape(len(active), n_bins, 2)
            cum = np.cumsum(hist, axis=1)
            total = cum[:, -1, :]  # (k, 2)
            l0 = cum[:, :-1, 0]
            l1 = cum[:, :-1, 1]
            nl = l0 + l1
            r0 = total[:, None, 0] - l0
            r1 = total[:, None, 1] - l1
            nr = r0 + r1
            valid = (nl > 0) & (nr > 0)
            nl_safe = np.where(nl > 0, nl, 1)
            nr_safe = np.where(nr > 0, nr, 1)
            gini_l = 1.0 - (l0**2 + l1**2) / (nl_safe**2)
            gini_r = 1.0 - (r0**2 + r1**2) / (nr_safe**2)
            score = (nl * gini_l + nr * gini_r) / (nl + nr).clip(min=1)
            score = np.where(valid, score, np.inf)
            if score.shape[1] == 0:
                continue
            arg = np.argmin(score, axis=1)
            val = score[np.arange(len(active)), arg]
            better = val < best_score[active]
            upd = active[better]
            best_score[upd] = val[better]
            best_feat[upd] = f
            best_bin[upd] = arg[better]

        # materialize splits; unsplittable open slots become forced leaves
        slot_feat = np.full(n_slots, -1, dtype=np.int32)
        slot_bin = np.zeros(n_slots, dtype=np.int64)
        slot_left = np.zeros(n_slots, dtype=np.int32)
        slot_right = np.zeros(n_slots, dtype=np.int32)
        for s in range(n_slots):
            if resolve[s]:
                continue
            if best_feat[s] < 0:
                _set_leaf(vote, slot_ids[s], ones[s], counts[s])
                resolve[s] = True
                continue
            f = int(best_feat[s])
            b = int(best_bin[s])
            nid = int(slot_ids[s])
            child_l = len(feature)
            child_r = child_l + 1
            for _ in range(2):
                feature.append(0)
                threshold.append(np.inf)
                left.append(len(left))
                right.append(len(right))
                vote.append(np.int8(-1))
            feature[nid] = f
            threshold[nid] = float(cuts[f][b])
            left[nid] = child_l
            right[nid] = child_r
            # leaf self-loops already set by construction above
            left[child_l] = child_l
            right[child_l] = child_l
            left[child_r] = child_r
            right[child_r] = child_r
            slot_feat[s] = f
            slot_bin[s] = b
            slot_left[s] = child_l
            slot_right[s] = child_r

        dead = resolve[inv]
        alive[idx[dead]] = False
        move = ~dead
        if np.any(move):
            rows = idx[move]
            s_of = inv[move]
            go_left = bins[rows, slot_feat[s_of]] <= slot_bin[s_of]
            node_of[rows] = np.where(go_left, slot_left[s_of], slot_right[s_of])

    return {
        "feature": np.asarray(feature, dtype=np.int32),
        "threshold": np.asarray(threshold, dtype=float),
        "left": np.asarray(left, dtype=np.int32),
        "right": np.asarray(right, dtype=np.int32),
        "vote": np.asarray(vote, dtype=np.int8),
    }


def _set_leaf(vote, nid, n_ones, n_total):
    majority = 1 if 2 * n_ones > n_total else 0  # tie -> 0
    vote[nid] = np.int8(majority)


def _tree_votes(tree, X):
    node = np.zeros(len(X), dtype=np.int32)
    vote = tree["vote"]
    feature = tree["feature"]
    threshold = tree["threshold"]
    left = tree["left"]
    right = tree["right"]
    pending = vote[node] == -1
    while np.any(pending):
        rows = np.flatnonzero(pending)
        cur = node[rows]
        go_left = X[rows, feature[cur]] <= threshold[cur]
        node[rows] = np.where(go_left, left[cur], right[cur])
        pending = vote[node] == -1
    return vote[node].astype(float)


def save_model(model, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(model.to_dict(), fh)
        fh.write("\n")


def load_model(path: str):
    with open(path) as fh:
        payload = json.load(fh)
    registry = {
        "logistic_regression": LogisticRegression,
        "gaussian_nb": GaussianNaiveBayes,
        "random_forest": RandomForest,
    }
    kind = payload.get("model")
    if kind not in registry:
        raise ValueError(f"unknown model kind {kind!r}")
    return registry[kind].from_dict(payload)
