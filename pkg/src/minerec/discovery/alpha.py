"""Classic alpha miner and the length-one-loop extension.

The classic algorithm derives maximal (A, B) activity-set pairs from the
footprint (every a in A causally precedes every b in B, and both sides are
pairwise in choice) and creates one place per maximal pair plus a source
and a sink.  On pathological logs where no pairs exist the degenerate
source/sink skeleton is returned instead of failing, so every log yields
a scoreable model.
"""
from __future__ import annotations

from .. import xes
from ..petri import PetriNet, make_net
from ..xes import CHOICE, SEQUENCE, EventLog

# pair enumeration is exponential in the worst case; above these caps the
# skeleton net is returned (degenerate but scoreable)
MAX_ALPHABET = 40
MAX_CANDIDATE_PAIRS = 5000

Pair = tuple[tuple[str, ...], tuple[str, ...]]


def alpha_steps(log: EventLog) -> PetriNet:
    graph = xes.dfg(log)
    fp = xes.footprint_from_dfg(graph)
    activities = sorted(graph.nodes)
    starts = sorted(graph.start_activities)
    ends = sorted(graph.end_activities)

    pairs: list[Pair] = []
    if len(activities) <= MAX_ALPHABET:
        pairs = _maximal_pairs(activities, fp)

    return _assemble(activities, starts, ends, pairs, {})


def alpha_plus(log: EventLog) -> PetriNet:
    """Alpha with length-one-loop pre/post-processing: self-looping
    activities are removed, the core log is mined with alpha, then each
    removed activity is re-attached as a self-loop on every place whose
    pre/post sets are covered by its observed neighbors."""
    graph = xes.dfg(log)
    l1l = sorted(a for (a, b) in graph.edges if a == b)
    if not l1l:
        return alpha_steps(log)

    l1l_set = set(l1l)
    filtered = [
        tuple(a for a in trace.activities if a not in l1l_set)
        for trace in log.traces
    ]
    filtered = [seq for seq in filtered if seq]
    if not filtered:
        # every event belongs to a self-looping activity: degenerate skeleton
        return _assemble(
            sorted(graph.nodes),
            sorted(graph.start_activities),
            sorted(graph.end_activities),
            [],
            {},
        )

    core_log = xes.log_from_sequences(filtered)
    core_graph = xes.dfg(core_log)
    core_fp = xes.footprint_from_dfg(core_graph)
    activities = sorted(core_graph.nodes)
    pairs: list[Pair] = []
    if len(activities) <= MAX_ALPHABET:
        pairs = _maximal_pairs(activities, core_fp)

    # neighbors of each self-loop activity in the original log
    reattach: dict[str, tuple[set[str], set[str]]] = {}
    for t in l1l:
        before = {a for (a, b) in graph.edges if b == t and a != t and a not in l1l_set}
        after = {b for (a, b) in graph.edges if a == t and b != t and b not in l1l_set}
        reattach[t] = (before, after)

    return _assemble(
        activities,
        sorted(core_graph.start_activities),
        sorted(core_graph.end_activities),
        pairs,
        reattach,
    )


def _maximal_pairs(activities: list[str], fp: xes.FootprintMatrix) -> list[Pair]:
    """All maximal (A, B) pairs; grown from causal singletons by unioning."""
    causal = [
        (a, b)
        for a in activities
        for b in activities
        if fp.relation(a, b) == SEQUENCE
    ]
    base: list[Pair] = [((a,), (b,)) for a, b in causal]

    def valid(a_side: tuple[str, ...], b_side: tuple[str, ...]) -> bool:
        for a in a_side:
            for b in b_side:
                if fp.relation(a, b) != SEQUENCE:
                    return False
        for i, a in enumerate(a_side):
            for a2 in a_side[i:]:
                if fp.relation(a, a2) != CHOICE:
                    return False
        for i, b in enumerate(b_side):
            for b2 in b_side[i:]:
                if fp.relation(b, b2) != CHOICE:
                    return False
        return True

    found: set[Pair] = set(base)
    frontier = list(base)
    while frontier and len(found) < MAX_CANDIDATE_PAIRS:
        fresh: set[Pair] = set()
        for a_side, b_side in frontier:
            for a2_side, b2_side in base:
                cand = (
                    tuple(sorted(set(a_side) | set(a2_side))),
                    tuple(sorted(set(b_side) | set(b2_side))),
                )
                if cand in found or cand in fresh:
                    continue
                if valid(*cand):
                    fresh.add(cand)
        found |= fresh
        frontier = sorted(fresh)

    maximal = [
        (a_side, b_side)
        for a_side, b_side in found
        if not any(
            (set(a_side) <= set(a2) and set(b_side) <= set(b2))
            and (a_side, b_side) != (a2, b2)
            for a2, b2 in found
        )
    ]
    return sorted(maximal)


def _assemble(
    activities: list[str],
    starts: list[str],
    ends: list[str],
    pairs: list[Pair],
    reattach: dict[str, tuple[set[str], set[str]]],
) -> PetriNet:
    places = ["source", "sink"]
    transitions: dict[str, str | None] = {}
    arcs: list[tuple[str, str]] = []

    def tid(activity: str) -> str:
        return f"t_{activity}"

    for a in activities:
        transitions[tid(a)] = a
    for t, _ in sorted(reattach.items()):
        transitions[tid(t)] = t

    for a in starts:
        arcs.append(("source", tid(a)))
    for a in ends:
        arcs.append((tid(a), "sink"))

    pair_index = {pair: f"p_{i}" for i, pair in enumerate(pairs)}
    for (a_side, b_side), place in sorted(pair_index.items(), key=lambda kv: kv[1]):
        places.append(place)
        for a in a_side:
            arcs.append((tid(a), place))
        for b in b_side:
            arcs.append((place, tid(b)))

    for t, (before, after) in sorted(reattach.items()):
        for (a_side, b_side), place in pair_index.items():
            if set(a_side) <= before and set(b_side) <= after:
                arcs.append((place, tid(t)))
                arcs.append((tid(t), place))

    return make_net(places, transitions, arcs, {"source": 1}, {"sink": 1})
