"""Synthetic training corpus: random process trees, playout logs, and the
labeled grid feeding the 24 regressors.

Trees are built from a seeded RNG with configurable operator mix, depth
and alphabet ranges; every leaf gets a distinct activity.  Playout runs
the tree (loop redos capped at 3), optionally mutating a trace with one
noise operation.  Corpus artifacts are deterministic for fixed seeds and
persist as .xes.gz logs plus features.csv and labels.csv.
"""
from __future__ import annotations

import csv
import gzip
import io
import json
import random
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import discovery, features, quality, xes
from .discovery import process_tree as pt
from .discovery.process_tree import ProcessTree
from .learner import TrainingDataset
from .quality import MEASURES, QualityReport
from .xes import EventLog

LOOP_REDO_CAP = 3
REDO_CHANCE = 0.35


@dataclass(frozen=True)
class GeneratorConfig:
    seed: int = 0
    n_activities: tuple[int, int] = (5, 15)
    depth: tuple[int, int] = (2, 4)
    operator_probabilities: dict[str, float] = field(
        default_factory=lambda: {"sequence": 0.4, "xor": 0.3, "parallel": 0.2, "loop": 0.1}
    )
    n_traces: tuple[int, int] = (10, 40)
    noise: float = 0.0

    def __post_init__(self):
        probs = self.operator_probabilities
        if set(probs) != {"sequence", "xor", "parallel", "loop"}:
            raise ValueError("operator_probabilities must cover exactly the four operators")
        if abs(sum(probs.values()) - 1.0) > 1e-9:
            raise ValueError("operator probabilities must sum to 1")
        for lo, hi in (self.n_activities, self.depth, self.n_traces):
            if lo > hi or lo < 1:
                raise ValueError(f"empty or invalid range ({lo}, {hi})")
        if not 0.0 <= self.noise <= 1.0:
            raise ValueError("noise must lie in [0, 1]")

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "n_activities": list(self.n_activities),
            "depth": list(self.depth),
            "operator_probabilities": dict(self.operator_probabilities),
            "n_traces": list(self.n_traces),
            "noise": self.noise,
        }

    @staticmethod
    def from_dict(doc: dict) -> "GeneratorConfig":
        return GeneratorConfig(
            seed=int(doc.get("seed", 0)),
            n_activities=tuple(doc.get("n_activities", (5, 15))),
            depth=tuple(doc.get("depth", (2, 4))),
            operator_probabilities=dict(
                doc.get(
                    "operator_probabilities",
                    {"sequence": 0.4, "xor": 0.3, "parallel": 0.2, "loop": 0.1},
                )
            ),
            n_traces=tuple(doc.get("n_traces", (10, 40))),
            noise=float(doc.get("noise", 0.0)),
        )


def random_tree(config: GeneratorConfig, seed: int | None = None) -> ProcessTree:
    """Seeded random tree; distinct leaf labels, depth within the range."""
    rng = random.Random(config.seed if seed is None else seed)
    n_act = rng.randint(*config.n_activities)
    max_depth = rng.randint(*config.depth)
    labels = iter(f"act_{i:02d}" for i in range(n_act))

    ops = sorted(config.operator_probabilities)
    weights = [config.operator_probabilities[o] for o in ops]

    def pick_op(allow_loop: bool) -> str:
        while True:
            op = rng.choices(ops, weights=weights)[0]
            if op != "loop" or allow_loop:
                return op

    def build(budget: int, depth_left: int) -> ProcessTree:
        if budget <= 1 or depth_left <= 0:
            return pt.leaf(next(labels))
        if depth_left == 1:
            # children must all be leaves
            op = pick_op(allow_loop=(budget == 2))
            leaves = [pt.leaf(next(labels)) for _ in range(budget)]
            if op == "loop":
                return pt.loop(leaves[0], leaves[1])
            return ProcessTree(operator=op, children=tuple(leaves))
        op = pick_op(allow_loop=True)
        k = 2 if op == "loop" else rng.randint(2, min(4, budget))
        parts = _partition(rng, budget, k)
        parts.sort(reverse=True)  # largest share first keeps depth available
        children = tuple(build(p, depth_left - 1) for p in parts)
        if op == "loop":
            return pt.loop(children[0], children[1])
        return ProcessTree(operator=op, children=children)

    if n_act == 1:
        return pt.leaf(next(labels))
    return build(n_act, max_depth)


def _partition(rng: random.Random, total: int, k: int) -> list[int]:
    """Random composition of total into k positive parts."""
    cuts = sorted(rng.sample(range(1, total), k - 1))
    parts = []
    prev = 0
    for c in cuts + [total]:
        parts.append(c - prev)
        prev = c
    return parts


def playout(
    tree: ProcessTree, n_traces: int, noise: float = 0.0, seed: int = 0
) -> EventLog:
    """Random executions of the tree; per trace, with probability ``noise``,
    one event is dropped, two adjacent events swapped, or an alien activity
    inserted."""
    rng = random.Random(seed)

    def run(node: ProcessTree) -> list[str]:
        if node.is_leaf():
            return [node.label] if node.label is not None else []
        if node.operator == pt.SEQUENCE:
            out: list[str] = []
            for child in node.children:
                out.extend(run(child))
            return out
        if node.operator == pt.XOR:
            return run(rng.choice(node.children))
        if node.operator == pt.PARALLEL:
            streams = [run(c) for c in node.children]
            merged: list[str] = []
            heads = [0] * len(streams)
            while True:
                open_streams = [i for i, s in enumerate(streams) if heads[i] < len(s)]
                if not open_streams:
                    return merged
                i = rng.choice(open_streams)
                merged.append(streams[i][heads[i]])
                heads[i] += 1
        # loop
        do, redo = node.children
        out = run(do)
        redos = 0
        while redos < LOOP_REDO_CAP and rng.random() < REDO_CHANCE:
            out.extend(run(redo))
            out.extend(run(do))
            redos += 1
        return out

    sequences: list[list[str]] = []
    for _ in range(n_traces):
        seq = run(tree)
        if noise > 0 and rng.random() < noise and seq:
            mutation = rng.choice(("drop", "swap", "insert"))
            if mutation == "drop" and len(seq) >= 2:
                del seq[rng.randrange(len(seq))]
            elif mutation == "swap" and len(seq) >= 2:
                i = rng.randrange(len(seq) - 1)
                seq[i], seq[i + 1] = seq[i + 1], seq[i]
            elif mutation == "insert":
                seq.insert(rng.randrange(len(seq) + 1), f"alien_{rng.randrange(3)}")
        if seq:
            sequences.append(seq)
    if not sequences:
        sequences = [run(tree) or ["act_00"]]
    return xes.log_from_sequences(sequences)


def generate_log(config: GeneratorConfig) -> tuple[ProcessTree, EventLog]:
    tree = random_tree(config)
    rng = random.Random(config.seed + 1)
    n_traces = rng.randint(*config.n_traces)
    log = playout(tree, n_traces, noise=config.noise, seed=config.seed + 2)
    return tree, log


@dataclass
class CorpusCell:
    """Quality labels for one (log, algorithm) pair, or a failure flag."""

    log_id: str
    algorithm: str
    report: QualityReport | None
    failed: bool = False
    error: str | None = None


@dataclass
class LabeledCorpus:
    log_ids: list[str]
    logs: dict[str, EventLog]
    feature_vectors: dict[str, features.FeatureVector]
    cells: dict[tuple[str, str], CorpusCell]
    configs: dict[str, dict]

    def training_dataset(self, algorithm: str, measure: str) -> TrainingDataset:
        rows, targets, ids = [], [], []
        for log_id in self.log_ids:
            cell = self.cells[(log_id, algorithm)]
            if cell.failed or cell.report is None:
                continue
            rows.append(self.feature_vectors[log_id].values)
            targets.append(cell.report.value(measure))
            ids.append(log_id)
        return TrainingDataset(X=np.array(rows), y=np.array(targets), ids=tuple(ids))

    def feature_matrix(self) -> list[features.FeatureVector]:
        return [self.feature_vectors[i] for i in self.log_ids]


def build_corpus(
    configs: list[GeneratorConfig],
    portfolio: tuple[str, ...] = discovery.PORTFOLIO,
    extra_logs: dict[str, EventLog] | None = None,
) -> LabeledCorpus:
    """Generate one log per config (plus any ingested logs), extract
    features and evaluate every portfolio algorithm on every log.
    Per-cell failures are flagged, never fatal."""
    log_ids: list[str] = []
    logs: dict[str, EventLog] = {}
    vectors: dict[str, features.FeatureVector] = {}
    cells: dict[tuple[str, str], CorpusCell] = {}
    provenance: dict[str, dict] = {}

    for i, config in enumerate(configs):
        log_id = f"gen_{config.seed:08d}_{i:04d}"
        _, log = generate_log(config)
        logs[log_id] = log
        provenance[log_id] = config.to_dict()
        log_ids.append(log_id)
    for log_id, log in (extra_logs or {}).items():
        logs[log_id] = log
        provenance[log_id] = {"source": "ingested"}
        log_ids.append(log_id)

    for log_id in log_ids:
        log = logs[log_id]
        vectors[log_id] = features.extract(log, log_id)
        for algorithm in portfolio:
            try:
                net = discovery.discover(algorithm, log)
                report = quality.evaluate_all(log, net)
                cells[(log_id, algorithm)] = CorpusCell(log_id, algorithm, report)
            except Exception as exc:
                cells[(log_id, algorithm)] = CorpusCell(
                    log_id, algorithm, None, failed=True, error=type(exc).__name__
                )
    return LabeledCorpus(
        log_ids=log_ids,
        logs=logs,
        feature_vectors=vectors,
        cells=cells,
        configs=provenance,
    )


def save_corpus(corpus: LabeledCorpus, out_dir: str | Path) -> None:
    out = Path(out_dir)
    (out / "logs").mkdir(parents=True, exist_ok=True)
    for log_id in corpus.log_ids:
        data = gzip.compress(xes.write_xes(corpus.logs[log_id]))
        (out / "logs" / f"{log_id}.xes.gz").write_bytes(data)
    (out / "features.csv").write_text(
        features.vectors_to_csv(corpus.feature_matrix()), encoding="utf-8"
    )
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["log_id", "algorithm", "measure", "value", "failed"])
    for log_id in corpus.log_ids:
        for algorithm in sorted({a for (_, a) in corpus.cells}):
            cell = corpus.cells[(log_id, algorithm)]
            if cell.failed or cell.report is None:
                writer.writerow([log_id, algorithm, "", "", "1"])
                continue
            for measure in MEASURES:
                writer.writerow(
                    [log_id, algorithm, measure, repr(cell.report.value(measure)), "0"]
                )
    (out / "labels.csv").write_text(buf.getvalue(), encoding="utf-8")
    (out / "provenance.json").write_text(
        json.dumps(corpus.configs, sort_keys=True, indent=2), encoding="utf-8"
    )


def load_corpus(corpus_dir: str | Path, portfolio=discovery.PORTFOLIO) -> LabeledCorpus:
    """Rebuild a corpus from its persisted directory: parse the logs back
    and recompute features and labels (cheap at desk scale, and keeps the
    loader honest against the on-disk XES)."""
    root = Path(corpus_dir)
    logs = {}
    for path in sorted((root / "logs").glob("*.xes.gz")):
        logs[path.name.removesuffix(".xes.gz")] = xes.parse_xes(path.read_bytes())
    configs = {}
    prov = root / "provenance.json"
    if prov.exists():
        configs = json.loads(prov.read_text(encoding="utf-8"))
    corpus = build_corpus([], portfolio=portfolio, extra_logs=logs)
    corpus.configs = configs
    return corpus


def train_bundle(
    corpus: LabeledCorpus,
    prune_threshold: float = 0.95,
    portfolio: tuple[str, ...] = discovery.PORTFOLIO,
    **fit_params,
):
    """Prune the feature schema once globally, then fit one ensemble per
    (algorithm, measure) pair on the corpus labels."""
    from . import learner
    from .learner import ModelBundle

    matrix = corpus.feature_matrix()
    retained = features.prune_redundant(matrix, threshold=prune_threshold)
    models = {}
    for algorithm in portfolio:
        for measure in MEASURES:
            data = corpus.training_dataset(algorithm, measure)
            models[(algorithm, measure)] = learner.fit(
                data, feature_schema=retained, **fit_params
            )
    return ModelBundle(models=models, feature_schema=tuple(retained))


def config_grid(
    n_logs: int,
    base_seed: int = 0,
    noise_levels: tuple[float, ...] = (0.0,),
    depth_choices: tuple[tuple[int, int], ...] = ((2, 4),),
    n_activities: tuple[int, int] = (5, 15),
    n_traces: tuple[int, int] = (10, 40),
) -> list[GeneratorConfig]:
    """A deterministic family of per-log configs cycling through the given
    noise levels and depth ranges."""
    out = []
    for i in range(n_logs):
        out.append(
            GeneratorConfig(
                seed=base_seed + 1000 * i,
                n_activities=n_activities,
                depth=depth_choices[i % len(depth_choices)],
                n_traces=n_traces,
                noise=noise_levels[i % len(noise_levels)],
            )
        )
    return out
