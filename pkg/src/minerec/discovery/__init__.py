"""The discovery-algorithm portfolio: event log in, workflow net out."""
from __future__ import annotations

from typing import Mapping

from ..errors import DiscoveryFailure, UnsupportedAlgorithm
from ..petri import PetriNet
from ..xes import EventLog
from .alpha import alpha_plus, alpha_steps
from .heuristics import heuristics_dependency, heuristics_net
from .inductive import (
    discover_inductive,
    discover_inductive_direct,
    discover_inductive_infrequent,
    flower_net,
    flower_tree,
    inductive_tree,
)
from .process_tree import ProcessTree, tree_to_net

ALPHA = "alpha"
ALPHA_PLUS = "alpha_plus"
HEURISTICS = "heuristics"
INDUCTIVE = "inductive"
INDUCTIVE_INFREQUENT = "inductive_infrequent"
INDUCTIVE_DIRECT = "inductive_direct"

PORTFOLIO: tuple[str, ...] = (
    ALPHA,
    ALPHA_PLUS,
    HEURISTICS,
    INDUCTIVE,
    INDUCTIVE_INFREQUENT,
    INDUCTIVE_DIRECT,
)

DEFAULT_PARAMS: dict[str, dict[str, float]] = {
    ALPHA: {},
    ALPHA_PLUS: {},
    HEURISTICS: {"dependency_threshold": 0.5},
    INDUCTIVE: {},
    INDUCTIVE_INFREQUENT: {"noise_threshold": 0.2},
    INDUCTIVE_DIRECT: {},
}


def discover(algorithm: str, log: EventLog, params: Mapping[str, float] | None = None) -> PetriNet:
    """Run one portfolio member; deterministic for fixed inputs."""
    if algorithm not in PORTFOLIO:
        raise UnsupportedAlgorithm(f"unknown algorithm {algorithm!r}")
    merged = dict(DEFAULT_PARAMS[algorithm])
    for key, value in (params or {}).items():
        if key not in merged:
            raise DiscoveryFailure(f"{algorithm} takes no parameter {key!r}")
        merged[key] = float(value)
    for key, value in merged.items():
        if not 0.0 <= value <= 1.0:
            raise DiscoveryFailure(f"parameter {key}={value} outside [0, 1]")

    if algorithm == ALPHA:
        return alpha_steps(log)
    if algorithm == ALPHA_PLUS:
        return alpha_plus(log)
    if algorithm == HEURISTICS:
        return heuristics_net(log, dependency_threshold=merged["dependency_threshold"])
    if algorithm == INDUCTIVE:
        return discover_inductive(log)
    if algorithm == INDUCTIVE_INFREQUENT:
        return discover_inductive_infrequent(log, noise_threshold=merged["noise_threshold"])
    return discover_inductive_direct(log)


__all__ = [
    "PORTFOLIO",
    "DEFAULT_PARAMS",
    "discover",
    "alpha_steps",
    "alpha_plus",
    "heuristics_net",
    "heuristics_dependency",
    "discover_inductive",
    "discover_inductive_infrequent",
    "discover_inductive_direct",
    "inductive_tree",
    "flower_net",
    "flower_tree",
    "ProcessTree",
    "tree_to_net",
]
