"""Labeled Petri nets with firing semantics, DOT and JSON export.

Nets are immutable after construction.  Transitions without a label are
silent and fire without consuming log events during replay.  Discovered
nets follow the workflow-net convention: a single source place carrying
the initial marking and a single sink place carrying the final one.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import NotEnabled

Marking = dict[str, int]


@dataclass(frozen=True)
class PetriNet:
    places: frozenset[str]
    transitions: frozenset[str]
    labels: dict[str, str]  # transition id -> activity label; absent = silent
    arcs: frozenset[tuple[str, str]]  # (place, transition) or (transition, place)
    initial_marking: dict[str, int]
    final_marking: dict[str, int]
    # derived, filled in __post_init__
    preset: dict[str, tuple[str, ...]] = field(default_factory=dict, compare=False)
    postset: dict[str, tuple[str, ...]] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        pre: dict[str, list[str]] = {t: [] for t in self.transitions}
        post: dict[str, list[str]] = {t: [] for t in self.transitions}
        for src, dst in self.arcs:
            if dst in self.transitions:
                pre[dst].append(src)
            else:
                post[src].append(dst)
        object.__setattr__(self, "preset", {t: tuple(sorted(v)) for t, v in pre.items()})
        object.__setattr__(self, "postset", {t: tuple(sorted(v)) for t, v in post.items()})

    def label_of(self, transition: str) -> str | None:
        return self.labels.get(transition)

    def is_silent(self, transition: str) -> bool:
        return transition not in self.labels

    def labeled_transitions(self) -> list[str]:
        return sorted(self.labels.keys())

    def silent_transitions(self) -> list[str]:
        return sorted(t for t in self.transitions if t not in self.labels)

    def transitions_for_label(self, label: str) -> list[str]:
        return sorted(t for t, l in self.labels.items() if l == label)

    def source_places(self) -> list[str]:
        with_input = {dst for _, dst in self.arcs if dst in self.places}
        return sorted(self.places - with_input)

    def sink_places(self) -> list[str]:
        with_output = {src for src, _ in self.arcs if src in self.places}
        return sorted(self.places - with_output)


def make_net(
    places: list[str],
    transitions: dict[str, str | None],
    arcs: list[tuple[str, str]],
    initial: Marking,
    final: Marking,
) -> PetriNet:
    """Build a net, validating arc endpoints."""
    place_set = frozenset(places)
    trans_set = frozenset(transitions.keys())
    for src, dst in arcs:
        p2t = src in place_set and dst in trans_set
        t2p = src in trans_set and dst in place_set
        if not (p2t or t2p):
            raise ValueError(f"arc ({src}, {dst}) does not connect a place and a transition")
    labels = {t: l for t, l in transitions.items() if l is not None}
    return PetriNet(
        places=place_set,
        transitions=trans_set,
        labels=labels,
        arcs=frozenset(arcs),
        initial_marking=dict(initial),
        final_marking=dict(final),
    )


def enabled(net: PetriNet, marking: Marking) -> set[str]:
    """Transitions whose every input place holds at least one token."""
    out = set()
    for t in net.transitions:
        if all(marking.get(p, 0) >= 1 for p in net.preset[t]):
            out.add(t)
    return out


def is_enabled(net: PetriNet, marking: Marking, transition: str) -> bool:
    return all(marking.get(p, 0) >= 1 for p in net.preset[transition])


def fire(net: PetriNet, marking: Marking, transition: str) -> Marking:
    """Fire a transition, returning the successor marking."""
    if not is_enabled(net, marking, transition):
        raise NotEnabled(f"transition {transition} not enabled")
    result = dict(marking)
    for p in net.preset[transition]:
        result[p] -= 1
        if result[p] == 0:
            del result[p]
    for p in net.postset[transition]:
        result[p] = result.get(p, 0) + 1
    return result


def to_dot(net: PetriNet) -> str:
    """GraphViz DOT text: places as circles, transitions as boxes, silent
    transitions filled.  Deterministic (nodes sorted by id)."""
    lines = [
        "digraph petri_net {",
        "  rankdir=LR;",
        '  node [fontname="Helvetica"];',
    ]
    for p in sorted(net.places):
        marks = []
        if net.initial_marking.get(p):
            marks.append(f"i={net.initial_marking[p]}")
        if net.final_marking.get(p):
            marks.append(f"f={net.final_marking[p]}")
        note = f" ({', '.join(marks)})" if marks else ""
        lines.append(f'  "{p}" [shape=circle, label="{p}{note}"];')
    for t in sorted(net.transitions):
        label = net.label_of(t)
        if label is None:
            lines.append(f'  "{t}" [shape=box, style=filled, fillcolor=black, label=""];')
        else:
            lines.append(f'  "{t}" [shape=box, label="{label}"];')
    for src, dst in sorted(net.arcs):
        lines.append(f'  "{src}" -> "{dst}";')
    lines.append("}")
    return "\n".join(lines) + "\n"


def to_json_dict(net: PetriNet) -> dict:
    """Viewer JSON: {places, transitions:[{id,label}], arcs, initial, final}."""
    return {
        "places": sorted(net.places),
        "transitions": [
            {"id": t, "label": net.label_of(t)} for t in sorted(net.transitions)
        ],
        "arcs": [{"from": src, "to": dst} for src, dst in sorted(net.arcs)],
        "initial": dict(sorted(net.initial_marking.items())),
        "final": dict(sorted(net.final_marking.items())),
    }
