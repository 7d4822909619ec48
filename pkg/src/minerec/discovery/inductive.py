"""Inductive miner family: classic, infrequent and DFG-only variants.

The classic recursion finds an exclusive-choice, sequence, parallel or
loop cut of the directly-follows graph, splits the log accordingly and
recurses; when no cut exists it falls through to a flower model over the
remaining alphabet.  The infrequent variant retries cut detection on a
frequency-filtered DFG before falling through.  The direct variant applies
cuts to the DFG alone and never re-partitions the log.
"""
from __future__ import annotations

from collections import Counter

import networkx as nx

from .. import xes
from ..petri import PetriNet, make_net
from ..xes import EventLog
from . import process_tree as pt
from .process_tree import ProcessTree

TraceCounts = Counter  # Counter[tuple[str, ...]]


def discover_inductive(log: EventLog) -> PetriNet:
    return pt.tree_to_net(inductive_tree(log))


def discover_inductive_infrequent(log: EventLog, noise_threshold: float = 0.2) -> PetriNet:
    return pt.tree_to_net(inductive_tree(log, noise_threshold=noise_threshold, filtering=True))


def discover_inductive_direct(log: EventLog) -> PetriNet:
    return pt.tree_to_net(inductive_direct_tree(log))


def inductive_tree(log: EventLog, noise_threshold: float = 0.0, filtering: bool = False) -> ProcessTree:
    traces: TraceCounts = Counter(t.activities for t in log.traces)
    return _im(traces, noise_threshold if filtering else 0.0, filtering)


def inductive_direct_tree(log: EventLog) -> ProcessTree:
    graph = xes.dfg(log)
    return _imd(
        frozenset(graph.nodes),
        set(graph.edges.keys()),
        set(graph.start_activities),
        set(graph.end_activities),
    )


def flower_tree(activities: set[str]) -> ProcessTree:
    """loop(tau, xor over the alphabet): replays any sequence."""
    acts = sorted(activities)
    if not acts:
        return pt.silent()
    if len(acts) == 1:
        redo = pt.leaf(acts[0])
    else:
        redo = pt.xor(*(pt.leaf(a) for a in acts))
    return pt.loop(pt.silent(), redo)


def flower_net(activities: set[str]) -> PetriNet:
    """The canonical flower: one central place, one transition per activity."""
    acts = sorted(activities)
    places = ["source", "center", "sink"]
    transitions: dict[str, str | None] = {"tau_start": None, "tau_end": None}
    arcs: list[tuple[str, str]] = [
        ("source", "tau_start"),
        ("tau_start", "center"),
        ("center", "tau_end"),
        ("tau_end", "sink"),
    ]
    for a in acts:
        transitions[f"t_{a}"] = a
        arcs.append(("center", f"t_{a}"))
        arcs.append((f"t_{a}", "center"))
    return make_net(places, transitions, arcs, {"source": 1}, {"sink": 1})


# ---------------------------------------------------------------- classic

def _im(traces: TraceCounts, f: float, filtering: bool) -> ProcessTree:
    total = sum(traces.values())
    if total == 0:
        return pt.silent()

    nonempty = Counter({t: c for t, c in traces.items() if t})
    n_empty = total - sum(nonempty.values())
    if not nonempty:
        return pt.silent()
    if n_empty > 0:
        if filtering and n_empty < f * total:
            return _im(nonempty, f, filtering)
        return pt.xor(pt.silent(), _im(nonempty, f, filtering))

    alphabet = {a for t in nonempty for a in t}
    if len(alphabet) == 1:
        a = next(iter(alphabet))
        if all(len(t) == 1 for t in nonempty):
            return pt.leaf(a)
        return pt.loop(pt.leaf(a), pt.silent())

    edges, starts, ends = _dfg_of(nonempty)
    cut = _find_cut(alphabet, set(edges), starts, ends)
    if cut is None and filtering and f > 0:
        fe, fs, fends = _filter_dfg(edges, starts, ends, f)
        cut = _find_cut(alphabet, fe, fs, fends)
    if cut is None:
        return flower_tree(alphabet)

    kind, groups = cut
    if kind == "xor":
        parts = _split_xor(nonempty, groups)
        return pt.xor(*(_im(p, f, filtering) for p in parts))
    if kind == "sequence":
        parts = _split_projection(nonempty, groups)
        return pt.seq(*(_im(p, f, filtering) for p in parts))
    if kind == "parallel":
        parts = _split_projection(nonempty, groups)
        return pt.parallel(*(_im(p, f, filtering) for p in parts))
    # loop: groups[0] is the body, the rest are redo components
    body_log, redo_logs = _split_loop(nonempty, groups[0], groups[1:])
    do = _im(body_log, f, filtering)
    redos = [_im(r, f, filtering) for r in redo_logs]
    redo = redos[0] if len(redos) == 1 else pt.xor(*redos)
    return pt.loop(do, redo)


def _dfg_of(traces: TraceCounts):
    edges: Counter[tuple[str, str]] = Counter()
    starts: Counter[str] = Counter()
    ends: Counter[str] = Counter()
    for t, c in traces.items():
        starts[t[0]] += c
        ends[t[-1]] += c
        for a, b in zip(t, t[1:]):
            edges[(a, b)] += c
    return edges, starts, ends


def _filter_dfg(edges: Counter, starts: Counter, ends: Counter, f: float):
    """Per-source relative frequency filter, as in the infrequent variant."""
    max_out: dict[str, int] = {}
    for (a, _), c in edges.items():
        max_out[a] = max(max_out.get(a, 0), c)
    kept = {(a, b) for (a, b), c in edges.items() if c >= f * max_out[a]}
    smax = max(starts.values())
    emax = max(ends.values())
    fstarts = {a for a, c in starts.items() if c >= f * smax}
    fends = {a for a, c in ends.items() if c >= f * emax}
    return kept, fstarts, fends


# ------------------------------------------------------------- cut search

def _find_cut(alphabet, edges, starts, ends):
    starts = set(starts)
    ends = set(ends)
    groups = _xor_cut(alphabet, edges)
    if groups:
        return "xor", groups
    groups = _sequence_cut(alphabet, edges)
    if groups:
        return "sequence", groups
    groups = _parallel_cut(alphabet, edges, starts, ends)
    if groups:
        return "parallel", groups
    groups = _loop_cut(alphabet, edges, starts, ends)
    if groups:
        return "loop", groups
    return None


def _sorted_groups(components) -> list[set[str]]:
    return sorted((set(c) for c in components), key=lambda g: min(g))


def _xor_cut(alphabet, edges):
    g = nx.Graph()
    g.add_nodes_from(alphabet)
    g.add_edges_from((a, b) for a, b in edges if a != b)
    comps = _sorted_groups(nx.connected_components(g))
    return comps if len(comps) >= 2 else None


def _sequence_cut(alphabet, edges):
    """Ordered partition where every activity of an earlier group reaches
    every activity of a later group and never the reverse.  Mutually
    reachable or mutually unreachable activities are forced together."""
    g = nx.DiGraph()
    g.add_nodes_from(alphabet)
    g.add_edges_from(edges)
    nodes = sorted(alphabet)
    reach = {a: nx.descendants(g, a) for a in nodes}

    parent = {a: a for a in nodes}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    for i, a in enumerate(nodes):
        for b in nodes[i + 1:]:
            ab = b in reach[a]
            ba = a in reach[b]
            if ab == ba:  # same cycle, or unordered: must share a group
                union(a, b)

    by_root: dict[str, set[str]] = {}
    for a in nodes:
        by_root.setdefault(find(a), set()).add(a)
    groups = _sorted_groups(by_root.values())

    def reaches(g1: set[str], g2: set[str]) -> bool:
        return any(y in reach[x] for x in g1 for y in g2)

    # cross-member inconsistencies: merge group pairs not strictly ordered
    merged = True
    while merged and len(groups) > 1:
        merged = False
        for i in range(len(groups)):
            for j in range(i + 1, len(groups)):
                if reaches(groups[i], groups[j]) == reaches(groups[j], groups[i]):
                    groups[i] |= groups[j]
                    del groups[j]
                    merged = True
                    break
            if merged:
                break
    if len(groups) < 2:
        return None
    reach_counts = [
        sum(1 for other in groups if other is not grp and reaches(grp, other))
        for grp in groups
    ]
    return [g for _, g in sorted(zip(reach_counts, groups), key=lambda p: (-p[0], min(p[1])))]


def _parallel_cut(alphabet, edges, starts, ends):
    g = nx.Graph()
    g.add_nodes_from(alphabet)
    for a in alphabet:
        for b in alphabet:
            if a < b and not ((a, b) in edges and (b, a) in edges):
                g.add_edge(a, b)
    comps = _sorted_groups(nx.connected_components(g))
    if len(comps) < 2:
        return None
    for comp in comps:
        if not (comp & starts) or not (comp & ends):
            return None
    return comps


def _loop_cut(alphabet, edges, starts, ends):
    body = set(starts) | set(ends)
    rest = set(alphabet) - body
    if not rest:
        return None
    g = nx.Graph()
    g.add_nodes_from(rest)
    g.add_edges_from((a, b) for a, b in edges if a in rest and b in rest and a != b)
    comps = _sorted_groups(nx.connected_components(g))
    redos = []
    for comp in comps:
        ok = True
        for a, b in edges:
            if a in comp and b not in comp and b not in starts:
                ok = False  # redo exits must re-enter the body at a start
                break
            if b in comp and a not in comp and a not in ends:
                ok = False  # redo entries must come from a body end
                break
        if ok:
            # completeness: every body end reaches every redo entry, and
            # every redo exit reaches every body start
            entries = {b for a, b in edges if b in comp and a not in comp}
            exits = {a for a, b in edges if a in comp and b not in comp}
            for b in entries:
                if any((a, b) not in edges for a in ends):
                    ok = False
                    break
            if ok:
                for a in exits:
                    if any((a, s) not in edges for s in starts):
                        ok = False
                        break
        if ok:
            redos.append(comp)
        else:
            body |= comp
    if not redos:
        return None
    return [body] + redos


# ------------------------------------------------------------- log splits

def _split_xor(traces: TraceCounts, groups: list[set[str]]) -> list[TraceCounts]:
    parts = [Counter() for _ in groups]
    for t, c in traces.items():
        overlaps = [sum(1 for a in t if a in g) for g in groups]
        best = max(range(len(groups)), key=lambda i: (overlaps[i], -i))
        projected = tuple(a for a in t if a in groups[best])
        parts[best][projected] += c
    return parts


def _split_projection(traces: TraceCounts, groups: list[set[str]]) -> list[TraceCounts]:
    parts = [Counter() for _ in groups]
    for t, c in traces.items():
        for i, g in enumerate(groups):
            parts[i][tuple(a for a in t if a in g)] += c
    return parts


def _split_loop(traces: TraceCounts, body: set[str], redo_groups: list[set[str]]):
    body_log: TraceCounts = Counter()
    redo_logs: list[TraceCounts] = [Counter() for _ in redo_groups]

    def group_of(a: str) -> int:
        for i, g in enumerate(redo_groups):
            if a in g:
                return i
        return -1  # unknown activity (noise): treat as body

    for t, c in traces.items():
        segment: list[str] = []
        mode = -1  # -1 = body, otherwise redo group index
        for a in t:
            target = -1 if a in body else group_of(a)
            if target == mode:
                segment.append(a)
                continue
            if mode == -1:
                body_log[tuple(segment)] += c
            else:
                redo_logs[mode][tuple(segment)] += c
                if target != -1:
                    # redo handed over to another redo: insert empty body
                    body_log[()] += c
            segment = [a]
            mode = target
        if mode == -1:
            body_log[tuple(segment)] += c
        else:
            redo_logs[mode][tuple(segment)] += c
            body_log[()] += c  # trace ended inside the redo part
    return body_log, redo_logs


# ----------------------------------------------------------------- direct

def _imd(nodes: frozenset[str], edges: set, starts: set[str], ends: set[str]) -> ProcessTree:
    if not nodes:
        return pt.silent()
    if len(nodes) == 1:
        a = next(iter(nodes))
        if (a, a) in edges:
            return pt.loop(pt.leaf(a), pt.silent())
        return pt.leaf(a)

    if not starts:
        starts = {a for a in nodes if not any(b == a for _, b in edges)} or set(nodes)
    if not ends:
        ends = {a for a in nodes if not any(b == a for b, _ in edges)} or set(nodes)

    cut = _find_cut(nodes, edges, starts, ends)
    if cut is None:
        return flower_tree(set(nodes))

    kind, groups = cut
    subs = []
    if kind == "xor":
        for g in groups:
            subs.append(_sub_dfg(g, edges, starts & g, ends & g))
        return pt.xor(*(_imd(*s) for s in subs))
    if kind == "sequence":
        for i, g in enumerate(groups):
            before = set().union(*groups[:i]) if i else set()
            after = set().union(*groups[i + 1:]) if i + 1 < len(groups) else set()
            s = (starts & g) | {b for a, b in edges if a in before and b in g}
            e = (ends & g) | {a for a, b in edges if a in g and b in after}
            subs.append(_sub_dfg(g, edges, s, e))
        return pt.seq(*(_imd(*s) for s in subs))
    if kind == "parallel":
        for g in groups:
            s = (starts & g) | {b for a, b in edges if a not in g and b in g}
            e = (ends & g) | {a for a, b in edges if a in g and b not in g}
            subs.append(_sub_dfg(g, edges, s, e))
        return pt.parallel(*(_imd(*s) for s in subs))
    body, redo_groups = groups[0], groups[1:]
    body_sub = _sub_dfg(body, edges, starts & body, ends & body)
    redo_subs = []
    for g in redo_groups:
        s = {b for a, b in edges if a in ends and b in g}
        e = {a for a, b in edges if a in g and b in starts}
        redo_subs.append(_sub_dfg(g, edges, s or g, e or g))
    do = _imd(*body_sub)
    redos = [_imd(*s) for s in redo_subs]
    redo = redos[0] if len(redos) == 1 else pt.xor(*redos)
    return pt.loop(do, redo)


def _sub_dfg(group: set[str], edges: set, starts: set[str], ends: set[str]):
    sub_edges = {(a, b) for a, b in edges if a in group and b in group}
    return frozenset(group), sub_edges, set(starts), set(ends)
