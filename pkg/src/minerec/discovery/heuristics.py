"""Heuristics miner: dependency-filtered DFG converted to a workflow net.

Edges are kept when the dependency measure clears the threshold; every
activity additionally keeps its strongest incoming/outgoing edge so the
graph stays connected.  The net realizes each dependency edge through a
silent transition between per-activity input/output places, which treats
multiple inputs/outputs of an activity as exclusive choices (the
single-binding assumption; full AND-binding mining is out of scope).
"""
from __future__ import annotations

from .. import xes
from ..petri import PetriNet, make_net
from ..xes import DirectlyFollowsGraph, EventLog


def heuristics_dependency(graph: DirectlyFollowsGraph, a: str, b: str) -> float:
    """Dependency measure in (-1, 1); 0 when neither direction was seen."""
    if a == b:
        loops = graph.edges.get((a, a), 0)
        return loops / (loops + 1)
    ab = graph.edges.get((a, b), 0)
    ba = graph.edges.get((b, a), 0)
    if ab == 0 and ba == 0:
        return 0.0
    return (ab - ba) / (ab + ba + 1)


def heuristics_net(log: EventLog, dependency_threshold: float = 0.5) -> PetriNet:
    graph = xes.dfg(log)
    activities = sorted(graph.nodes)
    kept: set[tuple[str, str]] = set()
    for a, b in graph.edges:
        if heuristics_dependency(graph, a, b) >= dependency_threshold:
            kept.add((a, b))

    # all-tasks-connected: non-start activities keep their best incoming
    # edge, non-end activities their best outgoing edge
    for b in activities:
        if b in graph.start_activities:
            continue
        if any(b2 == b and a2 != b for a2, b2 in kept):
            continue
        incoming = [(a2, b2) for (a2, b2) in graph.edges if b2 == b and a2 != b]
        if incoming:
            best = max(
                incoming,
                key=lambda e: (heuristics_dependency(graph, *e), graph.edges[e], e[0]),
            )
            kept.add(best)
    for a in activities:
        if a in graph.end_activities:
            continue
        if any(a2 == a and b2 != a for a2, b2 in kept):
            continue
        outgoing = [(a2, b2) for (a2, b2) in graph.edges if a2 == a and b2 != a]
        if outgoing:
            best = max(
                outgoing,
                key=lambda e: (heuristics_dependency(graph, *e), graph.edges[e], e[1]),
            )
            kept.add(best)

    places = ["source", "sink"]
    transitions: dict[str, str | None] = {}
    arcs: list[tuple[str, str]] = []
    for a in activities:
        p_in, p_out = f"pin_{a}", f"pout_{a}"
        places.extend([p_in, p_out])
        transitions[f"t_{a}"] = a
        arcs.append((p_in, f"t_{a}"))
        arcs.append((f"t_{a}", p_out))
    for a in sorted(graph.start_activities):
        t = f"tau_start_{a}"
        transitions[t] = None
        arcs.append(("source", t))
        arcs.append((t, f"pin_{a}"))
    for a in sorted(graph.end_activities):
        t = f"tau_end_{a}"
        transitions[t] = None
        arcs.append((f"pout_{a}", t))
        arcs.append((t, "sink"))
    for a, b in sorted(kept):
        t = f"tau_dep_{a}__{b}"
        transitions[t] = None
        arcs.append((f"pout_{a}", t))
        arcs.append((t, f"pin_{b}"))

    return make_net(places, transitions, arcs, {"source": 1}, {"sink": 1})
