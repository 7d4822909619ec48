"""Weighted scoring and ranking of the algorithm portfolio.

Each algorithm gets four predicted measure values from the model bundle;
the score is the weight-normalized sum, so scaling all weights by the same
positive factor changes nothing.  Rankings sort by score descending with
ties broken by algorithm name.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping

from . import discovery, features, quality
from .errors import AllZeroWeights, InvalidWeights, SchemaMismatch
from .learner import ModelBundle
from .quality import MEASURES
from .xes import EventLog


@dataclass(frozen=True)
class WeightVector:
    """User preference per measure, each within [0, 100], not all zero."""

    fitness: float
    precision: float
    generalization: float
    simplicity: float

    def __post_init__(self):
        for measure in MEASURES:
            w = getattr(self, measure)
            if not 0.0 <= w <= 100.0:
                raise InvalidWeights(f"weight {measure}={w} outside [0, 100]")
        if self.total() == 0.0:
            raise AllZeroWeights("all four weights are zero")

    def total(self) -> float:
        return sum(getattr(self, m) for m in MEASURES)

    def as_dict(self) -> dict[str, float]:
        return {m: getattr(self, m) for m in MEASURES}

    @staticmethod
    def from_mapping(values: Mapping[str, float]) -> "WeightVector":
        missing = [m for m in MEASURES if m not in values]
        if missing:
            raise InvalidWeights(f"missing weights for {missing}")
        extra = [k for k in values if k not in MEASURES]
        if extra:
            raise InvalidWeights(f"unknown measures {extra}")
        return WeightVector(**{m: float(values[m]) for m in MEASURES})


@dataclass(frozen=True)
class AlgorithmScore:
    algorithm: str
    predicted: dict[str, float]
    score: float
    failed: bool = False
    error: str | None = None

    def to_dict(self) -> dict:
        out = {
            "algorithm": self.algorithm,
            "score": self.score,
            "predicted": {m: self.predicted.get(m) for m in MEASURES},
        }
        if self.failed:
            out["failed"] = True
            out["error"] = self.error
        return out


@dataclass(frozen=True)
class Recommendation:
    log_id: str
    weights: dict[str, float]
    results: tuple[AlgorithmScore, ...]
    bundle_version: str

    def ranking(self) -> list[str]:
        return [r.algorithm for r in self.results]

    def to_dict(self) -> dict:
        return {
            "log_id": self.log_id,
            "weights": {m: self.weights[m] for m in MEASURES},
            "results": [r.to_dict() for r in self.results],
            "bundle_version": self.bundle_version,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def score(predicted: Mapping[str, float], weights: WeightVector) -> float:
    """Weight-normalized mean of the four predicted measure values."""
    total = weights.total()
    return sum(getattr(weights, m) * predicted[m] for m in MEASURES) / total


def _ranked(results: list[AlgorithmScore]) -> tuple[AlgorithmScore, ...]:
    return tuple(
        sorted(results, key=lambda r: (r.failed, -r.score, r.algorithm))
    )


def recommend(
    log: EventLog,
    weights: WeightVector,
    bundle: ModelBundle,
    log_id: str = "",
    feature_vector: features.FeatureVector | None = None,
) -> Recommendation:
    """Predict all 24 measures from the log's features, score and rank."""
    if bundle.catalog_version != features.CATALOG_VERSION:
        raise SchemaMismatch(
            f"bundle catalog {bundle.catalog_version} != {features.CATALOG_VERSION}"
        )
    fv = feature_vector if feature_vector is not None else features.extract(log, log_id)
    results = []
    for algorithm in discovery.PORTFOLIO:
        predicted = {
            m: bundle.get(algorithm, m).predict(fv) for m in MEASURES
        }
        results.append(
            AlgorithmScore(
                algorithm=algorithm,
                predicted=predicted,
                score=score(predicted, weights),
            )
        )
    return Recommendation(
        log_id=log_id or fv.log_id,
        weights=weights.as_dict(),
        results=_ranked(results),
        bundle_version=bundle.version,
    )


def evaluate_ground_truth(
    log: EventLog,
    weights: WeightVector,
    log_id: str = "",
    params: Mapping[str, Mapping[str, float]] | None = None,
) -> Recommendation:
    """Same shape as recommend, but with measured values: every portfolio
    algorithm is run and its model evaluated.  A failing algorithm is
    ranked last and flagged instead of aborting the grid."""
    results = []
    for algorithm in discovery.PORTFOLIO:
        alg_params = (params or {}).get(algorithm)
        try:
            net = discovery.discover(algorithm, log, alg_params)
            report = quality.evaluate_all(log, net)
            measured = {m: report.value(m) for m in MEASURES}
            results.append(
                AlgorithmScore(
                    algorithm=algorithm,
                    predicted=measured,
                    score=score(measured, weights),
                )
            )
        except Exception as exc:  # per-cell failure, not fatal
            results.append(
                AlgorithmScore(
                    algorithm=algorithm,
                    predicted={m: 0.0 for m in MEASURES},
                    score=0.0,
                    failed=True,
                    error=type(exc).__name__,
                )
            )
    return Recommendation(
        log_id=log_id,
        weights=weights.as_dict(),
        results=_ranked(results),
        bundle_version="ground-truth",
    )
