import pytest

from minerec import corpus as corpus_mod
from minerec import xes

# the classic concurrency-and-choice log: b and c interleave, e is the bypass
L1_SEQUENCES = [
    ("a", "b", "c", "d"),
    ("a", "c", "b", "d"),
    ("a", "e", "d"),
]


@pytest.fixture(scope="session")
def l1_log():
    return xes.log_from_sequences(L1_SEQUENCES)


def make_xes(traces, declare_case_ids=True):
    """Hand-rolled XES document for parser tests."""
    parts = ['<?xml version="1.0" encoding="UTF-8"?>', '<log xes.version="1.0">']
    for i, seq in enumerate(traces):
        parts.append("<trace>")
        if declare_case_ids:
            parts.append(f'<string key="concept:name" value="case_{i}"/>')
        for j, activity in enumerate(seq):
            parts.append("<event>")
            parts.append(f'<string key="concept:name" value="{activity}"/>')
            parts.append(
                f'<date key="time:timestamp" value="2024-03-01T10:{i:02d}:{j:02d}.000+00:00"/>'
            )
            parts.append("</event>")
        parts.append("</trace>")
    parts.append("</log>")
    return "\n".join(parts).encode("utf-8")


@pytest.fixture(scope="session")
def mini_corpus():
    """Small labeled corpus shared by learner/recommender/gateway tests."""
    configs = corpus_mod.config_grid(
        16, base_seed=400, noise_levels=(0.0, 0.35), depth_choices=((2, 3), (2, 4))
    )
    return corpus_mod.build_corpus(configs)


@pytest.fixture(scope="session")
def mini_bundle(mini_corpus):
    return corpus_mod.train_bundle(mini_corpus, n_trees=20, max_depth=3)


@pytest.fixture(scope="session")
def bundle_file(mini_bundle, tmp_path_factory):
    path = tmp_path_factory.mktemp("bundle") / "bundle.json"
    mini_bundle.save(path)
    return path
