"""Gradient-boosted regression trees, trained from scratch.

One ensemble per (algorithm, measure) pair predicts a quality measure from
a feature vector.  Squared-error boosting over CART trees: each round fits
a depth-limited tree to the current residuals by scanning sorted unique
feature values for the variance-maximizing split.  Everything is
deterministic; ties go to the lowest feature index, then lowest threshold.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import NonFiniteInput, SchemaMismatch, TooFewSamples, UnfittedModel
from .features import CATALOG_VERSION, FeatureDescriptor, FeatureVector, N_FEATURES

MIN_SPLIT_GAIN = 1e-12


@dataclass
class TrainingDataset:
    """Rows of feature values with one target measure value per row."""

    X: np.ndarray
    y: np.ndarray
    ids: tuple[str, ...] = ()

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        if self.X.ndim != 2 or len(self.X) != len(self.y):
            raise TooFewSamples(f"X/y shape mismatch: {self.X.shape} vs {self.y.shape}")
        if not (np.isfinite(self.X).all() and np.isfinite(self.y).all()):
            raise NonFiniteInput("training data contains NaN or infinity")


@dataclass(frozen=True)
class TreeNode:
    feature: int = -1  # -1 marks a leaf
    threshold: float = 0.0
    left: int = -1
    right: int = -1
    value: float = 0.0
    cover: int = 0  # training samples that reached this node
    gain: float = 0.0

    @property
    def is_leaf(self) -> bool:
        return self.feature < 0


@dataclass(frozen=True)
class RegressionTree:
    nodes: tuple[TreeNode, ...]

    def predict_one(self, x: Sequence[float]) -> float:
        i = 0
        node = self.nodes[0]
        while not node.is_leaf:
            i = node.left if x[node.feature] <= node.threshold else node.right
            node = self.nodes[i]
        return node.value

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.array([self.predict_one(row) for row in X])

    def expected_value(self) -> float:
        """Cover-weighted mean leaf value (the path-dependent expectation)."""

        def walk(i: int) -> float:
            node = self.nodes[i]
            if node.is_leaf:
                return node.value
            lw = self.nodes[node.left].cover
            rw = self.nodes[node.right].cover
            return (walk(node.left) * lw + walk(node.right) * rw) / (lw + rw)

        return walk(0)

    def split_features(self) -> set[int]:
        return {n.feature for n in self.nodes if not n.is_leaf}

    def to_lists(self) -> list[list]:
        return [
            [n.feature, n.threshold, n.left, n.right, n.value, n.cover, n.gain]
            for n in self.nodes
        ]

    @staticmethod
    def from_lists(rows: list[list]) -> "RegressionTree":
        return RegressionTree(
            nodes=tuple(
                TreeNode(
                    feature=int(r[0]),
                    threshold=float(r[1]),
                    left=int(r[2]),
                    right=int(r[3]),
                    value=float(r[4]),
                    cover=int(r[5]),
                    gain=float(r[6]),
                )
                for r in rows
            )
        )


@dataclass(frozen=True)
class GradientBoostedEnsemble:
    base_score: float
    learning_rate: float
    trees: tuple[RegressionTree, ...]
    feature_schema: tuple[int, ...]
    n_features: int = N_FEATURES
    seed: int = 0

    def _validate(self, x) -> np.ndarray:
        if isinstance(x, FeatureVector):
            x = x.values
        arr = np.asarray(x, dtype=float)
        if arr.shape != (self.n_features,):
            raise SchemaMismatch(
                f"expected {self.n_features} feature values, got {arr.shape}"
            )
        return arr

    def raw_predict(self, x) -> float:
        """Unclamped additive output: base + lr * sum of tree outputs."""
        arr = self._validate(x)
        total = self.base_score
        for tree in self.trees:
            total += self.learning_rate * tree.predict_one(arr)
        return total

    def predict(self, x) -> float:
        return max(0.0, min(1.0, self.raw_predict(x)))

    def predict_batch(self, X: np.ndarray) -> np.ndarray:
        out = np.full(len(X), self.base_score)
        for tree in self.trees:
            out += self.learning_rate * tree.predict(X)
        return np.clip(out, 0.0, 1.0)


def _best_split(X, residual, idx, schema, min_leaf):
    """Scan sorted unique values of every schema feature; returns the
    (gain, feature, threshold) maximizing SSE reduction, or None."""
    n = len(idx)
    r = residual[idx]
    total = r.sum()
    parent_score = total * total / n
    best_gain = 0.0
    best: tuple[int, float] | None = None
    for f in schema:
        xs = X[idx, f]
        order = np.argsort(xs, kind="stable")
        xs_sorted = xs[order]
        csum = np.cumsum(r[order])[:-1]
        n_left = np.arange(1, n)
        boundary = xs_sorted[:-1] < xs_sorted[1:]
        valid = boundary & (n_left >= min_leaf) & (n - n_left >= min_leaf)
        if not valid.any():
            continue
        gains = np.where(
            valid,
            csum * csum / n_left + (total - csum) ** 2 / (n - n_left) - parent_score,
            -np.inf,
        )
        pos = int(np.argmax(gains))  # first maximum = lowest threshold
        if gains[pos] > best_gain:
            threshold = float((xs_sorted[pos] + xs_sorted[pos + 1]) / 2.0)
            if threshold >= xs_sorted[pos + 1]:  # midpoint rounded onto b
                threshold = float(xs_sorted[pos])
            best_gain = float(gains[pos])
            best = (f, threshold)
    if best is None or best_gain < MIN_SPLIT_GAIN:
        return None
    return best_gain, best[0], best[1]


def _build_tree(X, residual, schema, max_depth, min_leaf) -> RegressionTree:
    nodes: list[TreeNode] = []

    def grow(idx: np.ndarray, depth: int) -> int:
        my_id = len(nodes)
        nodes.append(TreeNode())  # placeholder
        value = float(residual[idx].mean())
        cover = len(idx)
        split = None
        if depth < max_depth and cover >= 2 * min_leaf:
            split = _best_split(X, residual, idx, schema, min_leaf)
        if split is None:
            nodes[my_id] = TreeNode(value=value, cover=cover)
            return my_id
        gain, feature, threshold = split
        mask = X[idx, feature] <= threshold
        left = grow(idx[mask], depth + 1)
        right = grow(idx[~mask], depth + 1)
        nodes[my_id] = TreeNode(
            feature=feature,
            threshold=threshold,
            left=left,
            right=right,
            value=value,
            cover=cover,
            gain=gain,
        )
        return my_id

    grow(np.arange(len(residual)), 0)
    return RegressionTree(nodes=tuple(nodes))


def fit(
    data: TrainingDataset,
    n_trees: int = 100,
    max_depth: int = 4,
    learning_rate: float = 0.1,
    min_samples_leaf: int = 3,
    seed: int = 0,
    feature_schema: Sequence[int] | None = None,
) -> GradientBoostedEnsemble:
    """Squared-error gradient boosting; stops early once no split clears
    the minimum gain."""
    n, d = data.X.shape
    if n < 2 * min_samples_leaf:
        raise TooFewSamples(f"{n} rows < 2 * min_samples_leaf ({min_samples_leaf})")
    schema = tuple(feature_schema) if feature_schema is not None else tuple(range(d))
    base = float(data.y.mean())
    pred = np.full(n, base)
    trees: list[RegressionTree] = []
    for _ in range(n_trees):
        residual = data.y - pred
        tree = _build_tree(data.X, residual, schema, max_depth, min_samples_leaf)
        if len(tree.nodes) == 1:  # best split gain below threshold
            break
        trees.append(tree)
        pred += learning_rate * tree.predict(data.X)
    return GradientBoostedEnsemble(
        base_score=base,
        learning_rate=learning_rate,
        trees=tuple(trees),
        feature_schema=schema,
        n_features=d,
        seed=seed,
    )


def predict(model: GradientBoostedEnsemble, x) -> float:
    return model.predict(x)


@dataclass
class CvReport:
    """Per-fold and mean held-out metrics from k-fold cross-validation."""

    k: int
    seed: int
    fold_mae: list[float]
    fold_rmse: list[float]
    fold_r2: list[float]
    fold_baseline_mae: list[float]
    fold_sizes: list[int]

    @property
    def mean_mae(self) -> float:
        return float(np.mean(self.fold_mae))

    @property
    def mean_rmse(self) -> float:
        return float(np.mean(self.fold_rmse))

    @property
    def mean_r2(self) -> float:
        return float(np.mean(self.fold_r2))

    @property
    def mean_baseline_mae(self) -> float:
        return float(np.mean(self.fold_baseline_mae))

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "seed": self.seed,
            "folds": [
                {
                    "mae": self.fold_mae[i],
                    "rmse": self.fold_rmse[i],
                    "r2": self.fold_r2[i],
                    "baseline_mae": self.fold_baseline_mae[i],
                    "size": self.fold_sizes[i],
                }
                for i in range(self.k)
            ],
            "mean": {
                "mae": self.mean_mae,
                "rmse": self.mean_rmse,
                "r2": self.mean_r2,
                "baseline_mae": self.mean_baseline_mae,
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def to_csv(self) -> str:
        lines = ["fold,size,mae,rmse,r2,baseline_mae"]
        for i in range(self.k):
            lines.append(
                f"{i},{self.fold_sizes[i]},{self.fold_mae[i]!r},"
                f"{self.fold_rmse[i]!r},{self.fold_r2[i]!r},{self.fold_baseline_mae[i]!r}"
            )
        lines.append(
            f"mean,,{self.mean_mae!r},{self.mean_rmse!r},{self.mean_r2!r},{self.mean_baseline_mae!r}"
        )
        return "\n".join(lines) + "\n"


def cross_validate(
    data: TrainingDataset,
    k: int = 5,
    seed: int = 0,
    **fit_params,
) -> CvReport:
    """Seeded shuffle, k equal-as-possible folds, each held out once."""
    n = len(data.y)
    if n < k:
        raise TooFewSamples(f"{n} rows < {k} folds")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    folds = np.array_split(perm, k)
    mae, rmse, r2, base_mae, sizes = [], [], [], [], []
    for test_idx in folds:
        mask = np.ones(n, dtype=bool)
        mask[test_idx] = False
        train = TrainingDataset(X=data.X[mask], y=data.y[mask])
        model = fit(train, seed=seed, **fit_params)
        pred = model.predict_batch(data.X[test_idx])
        truth = data.y[test_idx]
        err = np.abs(pred - truth)
        mae.append(float(err.mean()))
        rmse.append(float(np.sqrt(((pred - truth) ** 2).mean())))
        ss_res = float(((pred - truth) ** 2).sum())
        ss_tot = float(((truth - truth.mean()) ** 2).sum())
        r2.append(1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0)
        baseline = float(train.y.mean())
        base_mae.append(float(np.abs(baseline - truth).mean()))
        sizes.append(len(test_idx))
    return CvReport(
        k=k,
        seed=seed,
        fold_mae=mae,
        fold_rmse=rmse,
        fold_r2=r2,
        fold_baseline_mae=base_mae,
        fold_sizes=sizes,
    )


def feature_importance(model: GradientBoostedEnsemble) -> dict[int, float]:
    """Total split gain per feature, normalized to sum 1 over the schema."""
    gains = {f: 0.0 for f in model.feature_schema}
    for tree in model.trees:
        for node in tree.nodes:
            if not node.is_leaf:
                gains[node.feature] += node.gain
    total = sum(gains.values())
    if total <= 0.0:
        return {f: 0.0 for f in model.feature_schema}
    return {f: g / total for f, g in gains.items()}


def featurer_insights(
    models: Mapping[tuple[str, str], GradientBoostedEnsemble],
    catalog: Sequence[FeatureDescriptor],
    measure_order: Sequence[str] = ("fitness", "precision", "generalization", "simplicity"),
) -> list[dict]:
    """Catalog enriched with usage and importance across all regressors."""

    def model_key(item):
        (alg, measure), _ = item
        order = measure_order.index(measure) if measure in measure_order else len(measure_order)
        return (alg, order)

    ordered = sorted(models.items(), key=model_key)
    importances = [(key, feature_importance(m)) for key, m in ordered]
    n_models = len(ordered)

    rows = []
    for desc in catalog:
        used_in = 0
        best_key = None
        best_gain = 0.0
        total = 0.0
        for (alg, measure), imp in importances:
            g = imp.get(desc.index, 0.0)
            total += g
            model = models[(alg, measure)]
            if any(desc.index in t.split_features() for t in model.trees):
                used_in += 1
            if g > best_gain:
                best_gain = g
                best_key = (alg, measure)
        rows.append(
            {
                "index": desc.index,
                "name": desc.name,
                "description": desc.description,
                "source": desc.source,
                "used_in_count": used_in,
                "most_important_for": (
                    {"algorithm": best_key[0], "measure": best_key[1]} if best_key else None
                ),
                "score": total / n_models if n_models else 0.0,
            }
        )
    for rank, row in enumerate(
        sorted(rows, key=lambda r: (-r["score"], r["index"])), start=1
    ):
        row["rank"] = rank
    rows.sort(key=lambda r: r["index"])
    return rows


@dataclass
class ModelBundle:
    """All 24 fitted ensembles plus the retained schema, in one file."""

    models: dict[tuple[str, str], GradientBoostedEnsemble]
    feature_schema: tuple[int, ...]
    catalog_version: str = CATALOG_VERSION
    version: str = ""

    def __post_init__(self):
        if not self.version:
            self.version = self.content_hash()

    def content_hash(self) -> str:
        payload = json.dumps(self._payload(), sort_keys=True).encode()
        return hashlib.sha256(payload).hexdigest()[:16]

    def _payload(self) -> dict:
        return {
            "catalog_version": self.catalog_version,
            "feature_schema": list(self.feature_schema),
            "models": {
                f"{alg}:{measure}": {
                    "base_score": m.base_score,
                    "learning_rate": m.learning_rate,
                    "n_features": m.n_features,
                    "seed": m.seed,
                    "feature_schema": list(m.feature_schema),
                    "trees": [t.to_lists() for t in m.trees],
                }
                for (alg, measure), m in sorted(self.models.items())
            },
        }

    def get(self, algorithm: str, measure: str) -> GradientBoostedEnsemble:
        try:
            return self.models[(algorithm, measure)]
        except KeyError:
            raise UnfittedModel(f"no model for ({algorithm}, {measure})") from None

    def save(self, path) -> None:
        doc = self._payload()
        doc["version"] = self.version
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, sort_keys=True)

    @staticmethod
    def load(path) -> "ModelBundle":
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        models = {}
        for key, spec in doc["models"].items():
            alg, measure = key.split(":", 1)
            models[(alg, measure)] = GradientBoostedEnsemble(
                base_score=float(spec["base_score"]),
                learning_rate=float(spec["learning_rate"]),
                trees=tuple(RegressionTree.from_lists(rows) for rows in spec["trees"]),
                feature_schema=tuple(spec["feature_schema"]),
                n_features=int(spec["n_features"]),
                seed=int(spec["seed"]),
            )
        return ModelBundle(
            models=models,
            feature_schema=tuple(doc["feature_schema"]),
            catalog_version=doc["catalog_version"],
            version=doc.get("version", ""),
        )
