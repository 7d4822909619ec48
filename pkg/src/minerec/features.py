"""Fixed-schema feature extraction from event logs.

The catalog is a versioned, ordered list of 48 features in six groups
(log statistics, trace lengths, activities, variants, DFG, footprint).
Every feature is a finite scalar computable in one pass over the log plus
cheap graph analysis; none requires discovering a model first.  Redundant
features are pruned at training time via Pearson correlation; the runtime
schema is the retained index set frozen into the model bundle.
"""
from __future__ import annotations

import io
import json
import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from . import xes
from .errors import LengthMismatch, TooFewSamples
from .xes import CHOICE, PARALLEL, SEQUENCE, EventLog

CATALOG_VERSION = "48-v1"

SOURCE_LOG = "log-statistics"
SOURCE_TRACE_LEN = "trace-length"
SOURCE_ACTIVITY = "activity"
SOURCE_VARIANT = "variant"
SOURCE_DFG = "dfg"
SOURCE_FOOTPRINT = "footprint"


@dataclass(frozen=True)
class FeatureDescriptor:
    name: str
    description: str
    source: str
    index: int


@dataclass(frozen=True)
class FeatureVector:
    values: tuple[float, ...]
    log_id: str = ""

    def __len__(self) -> int:
        return len(self.values)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)


_CATALOG_SPEC: list[tuple[str, str, str]] = [
    # --- log statistics ---
    ("n_events", "Total number of events in the log", SOURCE_LOG),
    ("n_cases", "Number of traces (cases)", SOURCE_LOG),
    ("n_activities", "Number of distinct activities", SOURCE_LOG),
    ("n_variants", "Number of distinct trace variants", SOURCE_VARIANT),
    ("events_per_case_mean", "Mean number of events per case", SOURCE_LOG),
    ("activity_density", "Distinct activities divided by total events", SOURCE_LOG),
    ("variant_case_ratio", "Distinct variants divided by number of cases", SOURCE_LOG),
    # --- trace-length statistics ---
    ("trace_len_min", "Minimum trace length", SOURCE_TRACE_LEN),
    ("trace_len_max", "Maximum trace length", SOURCE_TRACE_LEN),
    ("trace_len_mean", "Mean trace length", SOURCE_TRACE_LEN),
    ("trace_len_median", "Median trace length", SOURCE_TRACE_LEN),
    ("trace_len_std", "Standard deviation of trace lengths", SOURCE_TRACE_LEN),
    ("trace_len_p25", "25th percentile of trace lengths", SOURCE_TRACE_LEN),
    ("trace_len_p75", "75th percentile of trace lengths", SOURCE_TRACE_LEN),
    ("trace_len_iqr", "Interquartile range of trace lengths", SOURCE_TRACE_LEN),
    ("trace_len_range", "Max minus min trace length", SOURCE_TRACE_LEN),
    ("trace_len_cv", "Coefficient of variation of trace lengths", SOURCE_TRACE_LEN),
    # --- activity statistics ---
    ("activity_freq_min", "Minimum activity frequency", SOURCE_ACTIVITY),
    ("activity_freq_max", "Maximum activity frequency", SOURCE_ACTIVITY),
    ("activity_freq_mean", "Mean activity frequency", SOURCE_ACTIVITY),
    ("activity_freq_std", "Standard deviation of activity frequencies", SOURCE_ACTIVITY),
    ("activity_freq_median", "Median activity frequency", SOURCE_ACTIVITY),
    ("n_start_activities", "Number of distinct first activities", SOURCE_ACTIVITY),
    ("n_end_activities", "Number of distinct last activities", SOURCE_ACTIVITY),
    ("activity_entropy", "Shannon entropy (nats) of the activity distribution", SOURCE_ACTIVITY),
    ("activity_entropy_norm", "Activity entropy normalized by log(#activities)", SOURCE_ACTIVITY),
    # --- variant statistics ---
    ("ratio_most_common_variant", "Share of traces following the most common variant", SOURCE_VARIANT),
    ("ratio_top_10pct_variants", "Share of traces covered by the top 10% of variants", SOURCE_VARIANT),
    ("variant_entropy", "Shannon entropy (nats) of the variant distribution", SOURCE_VARIANT),
    ("variant_entropy_norm", "Variant entropy normalized by log(#variants)", SOURCE_VARIANT),
    ("ratio_unique_variants", "Fraction of variants that occur exactly once", SOURCE_VARIANT),
    ("variant_len_mean", "Mean length over distinct variants", SOURCE_VARIANT),
    ("variant_len_std", "Std deviation of lengths over distinct variants", SOURCE_VARIANT),
    # --- DFG-based ---
    ("dfg_n_edges", "Number of directly-follows edges", SOURCE_DFG),
    ("dfg_edge_density", "Edges divided by activities squared", SOURCE_DFG),
    ("dfg_out_degree_max", "Maximum node out-degree in the DFG", SOURCE_DFG),
    ("dfg_out_degree_mean", "Mean node out-degree in the DFG", SOURCE_DFG),
    ("dfg_n_self_loops", "Number of self-loop edges (a,a)", SOURCE_DFG),
    ("dfg_n_nodes_in_cycles", "Number of DFG nodes lying on a directed cycle", SOURCE_DFG),
    ("dfg_reciprocal_edge_ratio", "Fraction of adjacent pairs connected in both directions", SOURCE_DFG),
    ("dfg_max_edge_over_events", "Largest edge count divided by total events", SOURCE_DFG),
    ("n_start_activities_dfg", "Number of DFG start activities", SOURCE_DFG),
    ("n_end_activities_dfg", "Number of DFG end activities", SOURCE_DFG),
    # --- footprint-based ---
    ("fp_seq_ratio", "Fraction of ordered activity pairs in sequence relation", SOURCE_FOOTPRINT),
    ("fp_parallel_ratio", "Fraction of ordered activity pairs in parallel relation", SOURCE_FOOTPRINT),
    ("fp_choice_ratio", "Fraction of ordered activity pairs in choice relation", SOURCE_FOOTPRINT),
    ("fp_self_parallel_ratio", "Fraction of activities in self-parallel relation", SOURCE_FOOTPRINT),
    ("fp_seq_chain3_count", "Number of activity triples chained by sequence relations", SOURCE_FOOTPRINT),
]


def feature_catalog() -> list[FeatureDescriptor]:
    """The full ordered catalog; indices are contiguous from 0."""
    return [
        FeatureDescriptor(name=name, description=desc, source=src, index=i)
        for i, (name, desc, src) in enumerate(_CATALOG_SPEC)
    ]


def feature_names() -> list[str]:
    return [name for name, _, _ in _CATALOG_SPEC]


N_FEATURES = len(_CATALOG_SPEC)


def _entropy(counts: list[int]) -> float:
    total = sum(counts)
    if total == 0:
        return 0.0
    h = 0.0
    for c in counts:
        if c > 0:
            p = c / total
            h -= p * math.log(p)
    return max(0.0, h)


def extract(log: EventLog, log_id: str = "") -> FeatureVector:
    """Map a log to the fixed 48-value feature vector.  Deterministic and
    independent of case ids and timestamps."""
    lengths = np.array([len(t.events) for t in log.traces], dtype=float)
    n_cases = len(log.traces)
    n_events = int(lengths.sum())

    activity_counts = Counter(a for t in log.traces for a in t.activities)
    n_activities = len(activity_counts)
    freqs = np.array(sorted(activity_counts.values()), dtype=float)

    variant_counts = xes.variants(log)
    n_variants = len(variant_counts)
    vcounts = sorted(variant_counts.values(), reverse=True)
    vlengths = np.array([len(v) for v in variant_counts], dtype=float)

    graph = xes.dfg(log)
    fp = xes.footprint_from_dfg(graph)

    values: list[float] = []

    # log statistics
    values.append(float(n_events))
    values.append(float(n_cases))
    values.append(float(n_activities))
    values.append(float(n_variants))
    values.append(n_events / n_cases)
    values.append(n_activities / n_events)
    values.append(n_variants / n_cases)

    # trace lengths
    mean_len = float(lengths.mean())
    std_len = float(lengths.std())
    p25, p75 = np.percentile(lengths, [25, 75])
    values.append(float(lengths.min()))
    values.append(float(lengths.max()))
    values.append(mean_len)
    values.append(float(np.median(lengths)))
    values.append(std_len)
    values.append(float(p25))
    values.append(float(p75))
    values.append(float(p75 - p25))
    values.append(float(lengths.max() - lengths.min()))
    values.append(std_len / mean_len if mean_len > 0 else 0.0)

    # activities
    values.append(float(freqs.min()))
    values.append(float(freqs.max()))
    values.append(float(freqs.mean()))
    values.append(float(freqs.std()))
    values.append(float(np.median(freqs)))
    values.append(float(len(graph.start_activities)))
    values.append(float(len(graph.end_activities)))
    act_entropy = _entropy(list(activity_counts.values()))
    values.append(act_entropy)
    values.append(act_entropy / math.log(n_activities) if n_activities > 1 else 0.0)

    # variants
    values.append(vcounts[0] / n_cases)
    top_k = max(1, math.ceil(0.1 * n_variants))
    values.append(sum(vcounts[:top_k]) / n_cases)
    var_entropy = _entropy(vcounts)
    values.append(var_entropy)
    values.append(var_entropy / math.log(n_variants) if n_variants > 1 else 0.0)
    values.append(sum(1 for c in vcounts if c == 1) / n_variants)
    values.append(float(vlengths.mean()))
    values.append(float(vlengths.std()))

    # DFG
    n_edges = len(graph.edges)
    out_degree = Counter(a for a, _ in graph.edges)
    max_edge = max(graph.edges.values()) if graph.edges else 0
    values.append(float(n_edges))
    values.append(n_edges / (n_activities * n_activities))
    values.append(float(max(out_degree.values())) if out_degree else 0.0)
    values.append(n_edges / n_activities)
    values.append(float(sum(1 for a, b in graph.edges if a == b)))
    values.append(float(_nodes_in_cycles(graph)))
    values.append(_reciprocal_ratio(graph))
    values.append(max_edge / n_events)
    values.append(float(len(graph.start_activities)))
    values.append(float(len(graph.end_activities)))

    # footprint
    n_pairs = n_activities * n_activities
    seq = par = cho = self_par = 0
    for a, b, rel in fp.pairs():
        if rel == SEQUENCE:
            seq += 1
        elif rel == PARALLEL:
            par += 1
            if a == b:
                self_par += 1
        elif rel == CHOICE:
            cho += 1
    values.append(seq / n_pairs)
    values.append(par / n_pairs)
    values.append(cho / n_pairs)
    values.append(self_par / n_activities)
    values.append(float(_seq_chain3_count(fp)))

    assert len(values) == N_FEATURES
    out = tuple(float(v) for v in values)
    assert all(math.isfinite(v) for v in out)
    return FeatureVector(values=out, log_id=log_id)


def _nodes_in_cycles(graph: xes.DirectlyFollowsGraph) -> int:
    """Nodes in a non-trivial SCC or with a self-loop."""
    import networkx as nx

    g = nx.DiGraph()
    g.add_nodes_from(graph.nodes)
    g.add_edges_from(graph.edges.keys())
    count = 0
    for scc in nx.strongly_connected_components(g):
        if len(scc) > 1:
            count += len(scc)
        else:
            node = next(iter(scc))
            if (node, node) in graph.edges:
                count += 1
    return count


def _reciprocal_ratio(graph: xes.DirectlyFollowsGraph) -> float:
    adjacent: set[frozenset[str]] = set()
    reciprocal = 0
    for a, b in graph.edges:
        if a == b:
            continue
        pair = frozenset((a, b))
        if pair in adjacent:
            continue
        adjacent.add(pair)
        if (b, a) in graph.edges:
            reciprocal += 1
    if not adjacent:
        return 0.0
    return reciprocal / len(adjacent)


def _seq_chain3_count(fp: xes.FootprintMatrix) -> int:
    """Triples (a, b, c) with a->b and b->c; the sequence relation is
    irreflexive and antisymmetric, so counting via in/out degrees is exact."""
    indeg: Counter[str] = Counter()
    outdeg: Counter[str] = Counter()
    for a, b, rel in fp.pairs():
        if rel == SEQUENCE:
            outdeg[a] += 1
            indeg[b] += 1
    return sum(indeg[x] * outdeg[x] for x in fp.activities)


def pearson(x, y) -> float:
    """Sample Pearson correlation; 0 when either input has zero variance."""
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    if xa.shape != ya.shape:
        raise LengthMismatch(f"lengths {xa.shape} vs {ya.shape}")
    if xa.size < 2:
        raise TooFewSamples("need at least 2 samples")
    xd = xa - xa.mean()
    yd = ya - ya.mean()
    denom = math.sqrt(float(xd @ xd)) * math.sqrt(float(yd @ yd))
    if denom == 0.0:
        return 0.0
    r = float(xd @ yd) / denom
    return max(-1.0, min(1.0, r))


def prune_redundant(matrix, threshold: float = 0.95) -> list[int]:
    """Greedy pruning in catalog order: feature j is dropped iff its absolute
    correlation with an already-retained feature is >= threshold.

    ``matrix``: one row per log (FeatureVector or plain sequence).
    Returns the sorted retained index list (never empty).
    """
    rows = [fv.values if isinstance(fv, FeatureVector) else tuple(fv) for fv in matrix]
    data = np.asarray(rows, dtype=float)
    if data.ndim != 2 or data.shape[0] < 2:
        raise TooFewSamples("need at least 2 rows to estimate correlations")
    retained: list[int] = []
    for j in range(data.shape[1]):
        redundant = any(
            abs(pearson(data[:, j], data[:, k])) >= threshold for k in retained
        )
        if not redundant:
            retained.append(j)
    return retained


def vectors_to_csv(vectors: list[FeatureVector]) -> str:
    """CSV with the catalog names as header and one row per log."""
    buf = io.StringIO()
    buf.write("log_id," + ",".join(feature_names()) + "\n")
    for fv in vectors:
        buf.write(fv.log_id + "," + ",".join(repr(v) for v in fv.values) + "\n")
    return buf.getvalue()


def vector_to_json(fv: FeatureVector) -> str:
    return json.dumps(
        {
            "log_id": fv.log_id,
            "catalog_version": CATALOG_VERSION,
            "values": {n: v for n, v in zip(feature_names(), fv.values)},
        },
        sort_keys=True,
    )


def catalog_to_json() -> str:
    return json.dumps(
        {
            "catalog_version": CATALOG_VERSION,
            "features": [
                {
                    "index": d.index,
                    "name": d.name,
                    "description": d.description,
                    "source": d.source,
                }
                for d in feature_catalog()
            ],
        },
        sort_keys=True,
    )
