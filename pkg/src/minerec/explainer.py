"""Exact per-prediction Shapley attributions for the boosted-tree models.

Uses the polynomial path algorithm: a path of (feature, zero-fraction,
one-fraction, weight) elements is extended at every split and unwound at
leaves, with node covers supplying the conditional-expectation weights.
Attributions explain the unclamped additive ensemble output; the payload
flags when clamping changed the reported prediction.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import UnfittedModel
from .features import FeatureDescriptor, FeatureVector
from .learner import GradientBoostedEnsemble, RegressionTree


@dataclass(frozen=True)
class Attribution:
    """base_value + sum(contributions) equals the unclamped prediction."""

    base_value: float
    prediction: float
    clamped_prediction: float
    feature_indices: tuple[int, ...]
    x_values: tuple[float, ...]
    contributions: tuple[float, ...]


def _extend(m: list[list[float]], pz: float, po: float, pi: int) -> list[list[float]]:
    l = len(m)
    out = [row[:] for row in m]
    out.append([pi, pz, po, 1.0 if l == 0 else 0.0])
    for i in range(l - 1, -1, -1):
        out[i + 1][3] += po * out[i][3] * (i + 1) / (l + 1)
        out[i][3] = pz * out[i][3] * (l - i) / (l + 1)
    return out


def _unwind(m: list[list[float]], index: int) -> list[list[float]]:
    l = len(m) - 1
    one = m[index][2]
    zero = m[index][1]
    out = [row[:] for row in m[:l]]
    next_one = m[l][3]
    for i in range(l - 1, -1, -1):
        if one != 0.0:
            tmp = out[i][3]
            out[i][3] = next_one * (l + 1) / ((i + 1) * one)
            next_one = tmp - out[i][3] * zero * (l - i) / (l + 1)
        else:
            out[i][3] = out[i][3] * (l + 1) / (zero * (l - i))
    for i in range(index, l):
        out[i][0], out[i][1], out[i][2] = m[i + 1][0], m[i + 1][1], m[i + 1][2]
    return out


def _unwound_sum(m: list[list[float]], index: int) -> float:
    l = len(m) - 1
    one = m[index][2]
    zero = m[index][1]
    next_one = m[l][3]
    total = 0.0
    if one != 0.0:
        for i in range(l - 1, -1, -1):
            tmp = next_one * (l + 1) / ((i + 1) * one)
            total += tmp
            next_one = m[i][3] - tmp * zero * (l - i) / (l + 1)
    else:
        for i in range(l - 1, -1, -1):
            total += m[i][3] * (l + 1) / (zero * (l - i))
    return total


def tree_shap_values(tree: RegressionTree, x: Sequence[float], n_features: int) -> np.ndarray:
    """Per-feature Shapley values of a single tree at x (cover-weighted)."""
    phi = np.zeros(n_features)
    nodes = tree.nodes

    def recurse(node_idx: int, m: list[list[float]], pz: float, po: float, pi: int):
        m = _extend(m, pz, po, pi)
        node = nodes[node_idx]
        if node.is_leaf:
            for i in range(1, len(m)):
                w = _unwound_sum(m, i)
                d, z, o, _ = m[i]
                phi[int(d)] += w * (o - z) * node.value
            return
        if x[node.feature] <= node.threshold:
            hot, cold = node.left, node.right
        else:
            hot, cold = node.right, node.left
        iz = io = 1.0
        k = next((j for j in range(len(m)) if m[j][0] == node.feature), None)
        if k is not None:
            iz, io = m[k][1], m[k][2]
            m = _unwind(m, k)
        cover = node.cover
        recurse(hot, m, iz * nodes[hot].cover / cover, io, node.feature)
        recurse(cold, m, iz * nodes[cold].cover / cover, 0.0, node.feature)

    recurse(0, [], 1.0, 1.0, -1)
    return phi


def shap_values(model: GradientBoostedEnsemble, x) -> Attribution:
    """Attribution for one prediction, summed over trees and scaled by the
    learning rate.  Local accuracy holds against the unclamped output."""
    if not isinstance(model, GradientBoostedEnsemble):
        raise UnfittedModel("expected a fitted ensemble")
    arr = model._validate(x)
    phi = np.zeros(model.n_features)
    expected = model.base_score
    for tree in model.trees:
        phi += model.learning_rate * tree_shap_values(tree, arr, model.n_features)
        expected += model.learning_rate * tree.expected_value()
    raw = model.raw_predict(arr)
    schema = model.feature_schema
    return Attribution(
        base_value=float(expected),
        prediction=float(raw),
        clamped_prediction=max(0.0, min(1.0, float(raw))),
        feature_indices=tuple(schema),
        x_values=tuple(float(arr[i]) for i in schema),
        contributions=tuple(float(phi[i]) for i in schema),
    )


def explanation_payload(attr: Attribution, catalog: Sequence[FeatureDescriptor]) -> dict:
    """Display list: features by |contribution| descending (ties by index),
    with a running cumulative sum from base_value to prediction."""
    names = {d.index: d.name for d in catalog}
    order = sorted(
        range(len(attr.feature_indices)),
        key=lambda i: (-abs(attr.contributions[i]), attr.feature_indices[i]),
    )
    items = []
    cumulative = [attr.base_value]
    running = attr.base_value
    for i in order:
        idx = attr.feature_indices[i]
        contribution = attr.contributions[i]
        running += contribution
        cumulative.append(running)
        items.append(
            {
                "feature": names.get(idx, f"feature_{idx}"),
                "index": idx,
                "value": attr.x_values[i],
                "contribution": contribution,
            }
        )
    return {
        "base": attr.base_value,
        "prediction": attr.prediction,
        "clamped_prediction": attr.clamped_prediction,
        "clamped": attr.clamped_prediction != attr.prediction,
        "items": items,
        "cumulative": cumulative,
    }


def payload_json(attr: Attribution, catalog: Sequence[FeatureDescriptor]) -> str:
    return json.dumps(explanation_payload(attr, catalog), sort_keys=True)
