import gzip

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from minerec import xes
from minerec.errors import EmptyLog, MalformedXml, MissingActivity, MissingTimestamp
from minerec.xes import CHOICE, PARALLEL, REVERSE, SEQUENCE

from conftest import make_xes


def test_parse_minimal_document():
    log = xes.parse_xes(make_xes([("a", "b")]))
    assert len(log.traces) == 1
    assert log.traces[0].activities == ("a", "b")
    assert log.traces[0].case_id == "case_0"


def test_parse_truncated_document_raises():
    with pytest.raises(MalformedXml):
        xes.parse_xes(b'<?xml version="1.0"?><log><trace>')


def test_parse_event_without_activity_raises():
    doc = (
        b'<log><trace><event>'
        b'<date key="time:timestamp" value="2024-01-01T00:00:00+00:00"/>'
        b"</event></trace></log>"
    )
    with pytest.raises(MissingActivity):
        xes.parse_xes(doc)


def test_parse_event_without_timestamp_raises():
    doc = (
        b'<log><trace><event>'
        b'<string key="concept:name" value="a"/>'
        b"</event></trace></log>"
    )
    with pytest.raises(MissingTimestamp):
        xes.parse_xes(doc)


def test_parse_empty_log_raises():
    with pytest.raises(EmptyLog):
        xes.parse_xes(b"<log></log>")


def test_parse_synthesizes_case_ids_when_absent():
    log = xes.parse_xes(make_xes([("a",), ("b",)], declare_case_ids=False))
    assert [t.case_id for t in log.traces] == ["case_0", "case_1"]


def test_parse_sorts_events_by_timestamp_stable():
    doc = b"""<log><trace>
      <event><string key="concept:name" value="late"/>
             <date key="time:timestamp" value="2024-01-01T12:00:00+00:00"/></event>
      <event><string key="concept:name" value="early"/>
             <date key="time:timestamp" value="2024-01-01T08:00:00+00:00"/></event>
      <event><string key="concept:name" value="tie1"/>
             <date key="time:timestamp" value="2024-01-01T12:00:00+00:00"/></event>
    </trace></log>"""
    log = xes.parse_xes(doc)
    assert log.traces[0].activities == ("early", "late", "tie1")


def test_parse_accepts_gzip():
    data = gzip.compress(make_xes([("a", "b")]))
    log = xes.parse_xes(data)
    assert log.traces[0].activities == ("a", "b")


def test_parse_handles_namespaced_xes_and_zulu_timestamps():
    doc = b"""<log xmlns="http://www.xes-standard.org/">
      <trace>
        <string key="concept:name" value="c1"/>
        <event><string key="concept:name" value="a"/>
               <date key="time:timestamp" value="2024-01-01T08:00:00Z"/></event>
      </trace></log>"""
    log = xes.parse_xes(doc)
    assert log.traces[0].case_id == "c1"
    assert log.traces[0].events[0].timestamp.utcoffset().total_seconds() == 0


def test_roundtrip_preserves_ids_sequences_timestamps():
    original = xes.parse_xes(make_xes([("a", "b", "c"), ("a", "c")]))
    again = xes.parse_xes(xes.write_xes(original))
    assert [t.case_id for t in again.traces] == [t.case_id for t in original.traces]
    assert again.activity_sequences() == original.activity_sequences()
    for t1, t2 in zip(original.traces, again.traces):
        for e1, e2 in zip(t1.events, t2.events):
            assert e1.timestamp == e2.timestamp


def test_variants_grouping():
    log = xes.log_from_sequences([("a", "b"), ("a", "b"), ("a", "c")])
    assert xes.variants(log) == {("a", "b"): 2, ("a", "c"): 1}


def test_variants_single_trace():
    log = xes.log_from_sequences([("a",)])
    assert xes.variants(log) == {("a",): 1}


def test_variants_ten_identical_traces():
    log = xes.log_from_sequences([("a", "b")] * 10)
    assert xes.variants(log) == {("a", "b"): 10}


def test_dfg_counts_adjacent_pairs():
    log = xes.log_from_sequences([("a", "b", "c"), ("a", "c")])
    g = xes.dfg(log)
    assert g.edges == {("a", "b"): 1, ("b", "c"): 1, ("a", "c"): 1}
    assert g.start_activities == {"a": 2}
    assert g.end_activities == {"c": 2}


def test_dfg_single_event_trace():
    g = xes.dfg(xes.log_from_sequences([("a",)]))
    assert g.edges == {}
    assert g.start_activities == {"a": 1}
    assert g.end_activities == {"a": 1}


def test_dfg_self_loop():
    g = xes.dfg(xes.log_from_sequences([("a", "a")]))
    assert g.edges == {("a", "a"): 1}


def test_footprint_sequence_relation():
    fp = xes.footprint(xes.log_from_sequences([("a", "b")]))
    assert fp.relation("a", "b") == SEQUENCE
    assert fp.relation("b", "a") == REVERSE
    assert fp.relation("a", "a") == CHOICE
    assert fp.relation("b", "b") == CHOICE


def test_footprint_parallel_relation():
    fp = xes.footprint(xes.log_from_sequences([("a", "b"), ("b", "a")]))
    assert fp.relation("a", "b") == PARALLEL
    assert fp.relation("b", "a") == PARALLEL


def test_footprint_choice_relation():
    fp = xes.footprint(xes.log_from_sequences([("a",), ("b",)]))
    assert fp.relation("a", "b") == CHOICE


activity_names = st.sampled_from(["a", "b", "c", "d", "e"])
random_logs = st.lists(
    st.lists(activity_names, min_size=1, max_size=6).map(tuple),
    min_size=1,
    max_size=12,
)


@given(random_logs)
@settings(max_examples=60, deadline=None)
def test_variant_and_dfg_count_invariants(sequences):
    log = xes.log_from_sequences(sequences)
    assert sum(xes.variants(log).values()) == len(log.traces)
    g = xes.dfg(log)
    assert sum(g.start_activities.values()) == len(log.traces)
    assert sum(g.end_activities.values()) == len(log.traces)
    assert sum(g.edges.values()) == sum(len(s) - 1 for s in sequences)
    for a, b in g.edges:
        assert a in g.nodes and b in g.nodes
    assert all(count >= 1 for count in g.edges.values())


@given(random_logs)
@settings(max_examples=60, deadline=None)
def test_footprint_symmetry_invariants(sequences):
    fp = xes.footprint(xes.log_from_sequences(sequences))
    for a in fp.activities:
        for b in fp.activities:
            rel = fp.relation(a, b)
            mirror = fp.relation(b, a)
            if rel == SEQUENCE:
                assert mirror == REVERSE
            elif rel == REVERSE:
                assert mirror == SEQUENCE
            else:
                assert mirror == rel
