"""The four model-quality measures for a (log, net) pair.

Fitness is token replay (produced/consumed/missing/remaining bookkeeping),
precision counts escaping edges over replayed log prefixes, generalization
penalizes rarely-executed transitions and simplicity is inverse mean arc
degree.  Silent transitions are crossed via breadth-first search up to
SILENT_DEPTH firings, which is bounded, deterministic and sufficient for
the portfolio's nets at the default corpus depth.
"""
from __future__ import annotations

import json
import math
from collections import Counter, deque
from dataclasses import dataclass

from . import xes
from .petri import Marking, PetriNet, fire, is_enabled
from .xes import EventLog

MEASURES: tuple[str, ...] = ("fitness", "precision", "generalization", "simplicity")

SILENT_DEPTH = 10
MAX_SEARCH_STATES = 20000


@dataclass(frozen=True)
class QualityReport:
    fitness: float
    precision: float
    generalization: float
    simplicity: float
    produced: int
    consumed: int
    missing: int
    remaining: int
    warnings: tuple[str, ...] = ()

    def value(self, measure: str) -> float:
        if measure not in MEASURES:
            raise KeyError(measure)
        return getattr(self, measure)

    def to_dict(self) -> dict:
        return {
            "fitness": self.fitness,
            "precision": self.precision,
            "generalization": self.generalization,
            "simplicity": self.simplicity,
            "diagnostics": {
                "produced": self.produced,
                "consumed": self.consumed,
                "missing": self.missing,
                "remaining": self.remaining,
            },
            "warnings": list(self.warnings),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _key(marking: Marking) -> frozenset:
    return frozenset(marking.items())


class _SilentSearch:
    """Shared BFS over silent firings with per-marking memoization."""

    def __init__(self, net: PetriNet):
        self.net = net
        self.silent = net.silent_transitions()
        self.by_label: dict[str, list[str]] = {}
        for t in net.labeled_transitions():
            self.by_label.setdefault(net.label_of(t), []).append(t)
        self._allowed_cache: dict[frozenset, frozenset[str]] = {}
        self._enable_cache: dict[tuple[frozenset, str], tuple[tuple[str, ...], Marking] | None] = {}
        self._final_cache: dict[frozenset, tuple[str, ...] | None] = {}

    def _frontier(self, marking: Marking):
        for t in self.silent:
            if is_enabled(self.net, marking, t):
                yield t, fire(self.net, marking, t)

    def allowed_labels(self, marking: Marking) -> frozenset[str]:
        """Labels of transitions fireable after at most SILENT_DEPTH silent steps."""
        key = _key(marking)
        hit = self._allowed_cache.get(key)
        if hit is not None:
            return hit
        labels: set[str] = set()
        seen = {key}
        layer = [marking]
        for _ in range(SILENT_DEPTH + 1):
            for m in layer:
                for t in self.net.labeled_transitions():
                    if is_enabled(self.net, m, t):
                        labels.add(self.net.label_of(t))
            nxt = []
            for m in layer:
                for _, m2 in self._frontier(m):
                    k2 = _key(m2)
                    if k2 not in seen and len(seen) < MAX_SEARCH_STATES:
                        seen.add(k2)
                        nxt.append(m2)
            if not nxt:
                break
            layer = nxt
        result = frozenset(labels)
        self._allowed_cache[key] = result
        return result

    def path_to_enable(self, marking: Marking, label: str):
        """Shortest silent firing sequence after which some transition with
        this label is enabled; returns (path, marking at path end) or None."""
        targets = self.by_label.get(label, [])
        if not targets:
            return None
        key = (_key(marking), label)
        if key in self._enable_cache:
            hit = self._enable_cache[key]
            return (hit[0], dict(hit[1])) if hit else None
        result = self._bfs(marking, lambda m: any(is_enabled(self.net, m, t) for t in targets))
        self._enable_cache[key] = result
        return (result[0], dict(result[1])) if result else None

    def path_to_final(self, marking: Marking):
        """Shortest silent firing sequence reaching the final marking exactly."""
        final = {p: c for p, c in self.net.final_marking.items() if c > 0}
        key = _key(marking)
        if key in self._final_cache:
            hit = self._final_cache[key]
            return None if hit is None else hit
        result = self._bfs(marking, lambda m: m == final)
        path = result[0] if result else None
        self._final_cache[key] = path
        return path

    def _bfs(self, marking: Marking, goal):
        if goal(marking):
            return (), dict(marking)
        seen = {_key(marking)}
        queue = deque([(marking, ())])
        while queue:
            m, path = queue.popleft()
            if len(path) >= SILENT_DEPTH:
                continue
            for t, m2 in self._frontier(m):
                k2 = _key(m2)
                if k2 in seen:
                    continue
                seen.add(k2)
                p2 = path + (t,)
                if goal(m2):
                    return p2, m2
                if len(seen) < MAX_SEARCH_STATES:
                    queue.append((m2, p2))
        return None


@dataclass
class _ReplayTotals:
    produced: int = 0
    consumed: int = 0
    missing: int = 0
    remaining: int = 0
    exec_counts: Counter = None  # labeled transition -> firings

    def __post_init__(self):
        if self.exec_counts is None:
            self.exec_counts = Counter()


def _replay_variant(search: _SilentSearch, activities: tuple[str, ...]) -> _ReplayTotals:
    net = search.net
    totals = _ReplayTotals()
    marking = {p: c for p, c in net.initial_marking.items() if c > 0}
    totals.produced += sum(marking.values())

    def fire_counted(t: str, m: Marking) -> Marking:
        totals.consumed += len(net.preset[t])
        totals.produced += len(net.postset[t])
        return fire(net, m, t)

    for activity in activities:
        candidates = search.by_label.get(activity, [])
        if not candidates:
            # label absent from the net: a token is conjured and consumed
            totals.missing += 1
            totals.consumed += 1
            continue
        chosen = next((t for t in candidates if is_enabled(net, marking, t)), None)
        if chosen is None:
            found = search.path_to_enable(marking, activity)
            if found is not None:
                for t in found[0]:
                    marking = fire_counted(t, marking)
                chosen = next(t for t in candidates if is_enabled(net, marking, t))
        if chosen is None:
            # force-fire the candidate needing the fewest inserted tokens
            def deficit(t: str) -> int:
                return sum(1 for p in net.preset[t] if marking.get(p, 0) < 1)

            chosen = min(candidates, key=lambda t: (deficit(t), t))
            for p in net.preset[chosen]:
                if marking.get(p, 0) < 1:
                    totals.missing += 1
                    marking[p] = marking.get(p, 0) + 1
        marking = fire_counted(chosen, marking)
        totals.exec_counts[chosen] += 1

    final = {p: c for p, c in net.final_marking.items() if c > 0}
    if marking != final:
        path = search.path_to_final(marking)
        if path is not None:
            for t in path:
                marking = fire_counted(t, marking)
    totals.consumed += sum(final.values())
    for place, need in final.items():
        have = marking.get(place, 0)
        if have < need:
            totals.missing += need - have
    for place, have in marking.items():
        extra = have - final.get(place, 0)
        if extra > 0:
            totals.remaining += extra
    return totals


def _replay_log(search: _SilentSearch, log: EventLog) -> _ReplayTotals:
    totals = _ReplayTotals()
    for variant, count in sorted(xes.variants(log).items()):
        one = _replay_variant(search, variant)
        totals.produced += one.produced * count
        totals.consumed += one.consumed * count
        totals.missing += one.missing * count
        totals.remaining += one.remaining * count
        for t, n in one.exec_counts.items():
            totals.exec_counts[t] += n * count
    return totals


def _fitness_from_totals(t: _ReplayTotals) -> float:
    miss_term = 1.0 - t.missing / t.consumed if t.consumed > 0 else 1.0
    rem_term = 1.0 - t.remaining / t.produced if t.produced > 0 else 1.0
    return max(0.0, min(1.0, 0.5 * miss_term + 0.5 * rem_term))


def fitness_token_replay(log: EventLog, net: PetriNet) -> float:
    """Token-replay fitness: 1/2(1 - missing/consumed) + 1/2(1 - remaining/produced)."""
    return _fitness_from_totals(_replay_log(_SilentSearch(net), log))


def _generalization_from_counts(net: PetriNet, exec_counts: Counter) -> float:
    labeled = net.labeled_transitions()
    if not labeled:
        return 0.0
    total = 0.0
    for t in labeled:
        n = exec_counts.get(t, 0)
        total += 1.0 if n == 0 else 1.0 / math.sqrt(n)
    return max(0.0, min(1.0, 1.0 - total / len(labeled)))


def generalization(log: EventLog, net: PetriNet) -> float:
    """Square-root execution-count generalization over the fitness replay."""
    totals = _replay_log(_SilentSearch(net), log)
    return _generalization_from_counts(net, totals.exec_counts)


def simplicity(net: PetriNet) -> float:
    """Inverse arc degree: 1/(1 + max(0, mean_degree - 2))."""
    n_nodes = len(net.places) + len(net.transitions)
    if n_nodes == 0:
        return 1.0
    mean_degree = 2.0 * len(net.arcs) / n_nodes
    return 1.0 / (1.0 + max(0.0, mean_degree - 2.0))


class _TrieNode:
    __slots__ = ("children", "weight")

    def __init__(self):
        self.children: dict[str, _TrieNode] = {}
        self.weight = 0


def _build_trie(log: EventLog) -> _TrieNode:
    root = _TrieNode()
    for variant, count in sorted(xes.variants(log).items()):
        root.weight += count
        node = root
        for a in variant:
            node = node.children.setdefault(a, _TrieNode())
            node.weight += count
    return root


def _precision_with_search(log: EventLog, net: PetriNet, search: _SilentSearch):
    root = _build_trie(log)
    initial = {p: c for p, c in net.initial_marking.items() if c > 0}
    escaping = 0.0
    allowed_total = 0.0

    stack: list[tuple[_TrieNode, Marking]] = [(root, initial)]
    while stack:
        node, marking = stack.pop()
        allowed = search.allowed_labels(marking)
        observed = set(node.children)
        escaping += node.weight * len(allowed - observed)
        allowed_total += node.weight * len(allowed)
        for label in sorted(node.children, reverse=True):
            if label not in allowed:
                continue  # non-fitting prefix: subtree skipped
            found = search.path_to_enable(marking, label)
            if found is None:
                continue
            path, m2 = found
            candidates = [t for t in search.by_label[label] if is_enabled(net, m2, t)]
            m3 = fire(net, m2, sorted(candidates)[0])
            stack.append((node.children[label], m3))

    if allowed_total == 0.0:
        return 1.0, True  # no labeled transition reachable: degenerate model
    value = 1.0 - escaping / allowed_total
    return max(0.0, min(1.0, value)), False


def precision_escaping_edges(log: EventLog, net: PetriNet) -> float:
    """Escaping-edges precision over replayed log prefixes, weighted by
    prefix frequency; non-fitting prefixes are skipped."""
    value, _ = _precision_with_search(log, net, _SilentSearch(net))
    return value


def evaluate_all(log: EventLog, net: PetriNet) -> QualityReport:
    """All four measures; the token replay is shared by fitness and
    generalization, and the silent-path caches by every replay."""
    search = _SilentSearch(net)
    totals = _replay_log(search, log)
    precision, degenerate = _precision_with_search(log, net, search)
    warnings = ("degenerate_model",) if degenerate else ()
    return QualityReport(
        fitness=_fitness_from_totals(totals),
        precision=precision,
        generalization=_generalization_from_counts(net, totals.exec_counts),
        simplicity=simplicity(net),
        produced=totals.produced,
        consumed=totals.consumed,
        missing=totals.missing,
        remaining=totals.remaining,
        warnings=warnings,
    )
