"""Event logs: XES parsing and the behavioral abstractions built on top.

A log is an ordered collection of traces; each trace is a timestamp-ordered
sequence of activity-labeled events.  From a log we derive trace variants,
the directly-follows graph and the footprint matrix, which feed features,
discovery and conformance checking.
"""
from __future__ import annotations

import gzip
import io
import json
import xml.etree.ElementTree as ET
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from typing import IO, Iterable, Mapping, Union

from .errors import EmptyLog, MalformedXml, MissingActivity, MissingTimestamp

Scalar = Union[str, int, float, bool, datetime]

# footprint relation symbols
SEQUENCE = "->"
REVERSE = "<-"
PARALLEL = "||"
CHOICE = "#"

_XES_TYPE_TAGS = {"string", "date", "int", "float", "boolean", "id"}


@dataclass(frozen=True)
class Event:
    """One activity execution: label, UTC time point, scalar attributes."""

    activity: str
    timestamp: datetime
    attributes: Mapping[str, Scalar] = field(default_factory=dict)


@dataclass(frozen=True)
class Trace:
    """One case: an identifier and its timestamp-ordered events."""

    case_id: str
    events: tuple[Event, ...]

    @property
    def activities(self) -> tuple[str, ...]:
        return tuple(e.activity for e in self.events)


@dataclass(frozen=True)
class EventLog:
    traces: tuple[Trace, ...]
    attributes: Mapping[str, Scalar] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.traces)

    def activity_sequences(self) -> list[tuple[str, ...]]:
        return [t.activities for t in self.traces]

    def alphabet(self) -> set[str]:
        return {a for t in self.traces for a in t.activities}


@dataclass(frozen=True)
class DirectlyFollowsGraph:
    """Immediate-successor counts plus first/last activity counts."""

    nodes: frozenset[str]
    edges: Mapping[tuple[str, str], int]
    start_activities: Mapping[str, int]
    end_activities: Mapping[str, int]


class FootprintMatrix:
    """Pairwise activity relations derived from directly-follows.

    relation(a, b) is "->" iff a is directly followed by b but never the
    reverse, "<-" for the mirror case, "||" when both directions occur and
    "#" when neither does.
    """

    def __init__(self, activities: list[str], follows: set[tuple[str, str]]):
        self.activities = sorted(activities)
        self._follows = follows

    def relation(self, a: str, b: str) -> str:
        ab = (a, b) in self._follows
        ba = (b, a) in self._follows
        if ab and ba:
            return PARALLEL
        if ab:
            return SEQUENCE
        if ba:
            return REVERSE
        return CHOICE

    def pairs(self) -> Iterable[tuple[str, str, str]]:
        for a in self.activities:
            for b in self.activities:
                yield a, b, self.relation(a, b)


def _strip_ns(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _parse_timestamp(raw: str) -> datetime:
    text = raw.strip()
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    try:
        ts = datetime.fromisoformat(text)
    except ValueError as exc:
        raise MissingTimestamp(f"unparseable timestamp {raw!r}") from exc
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def _parse_attribute(elem: ET.Element) -> tuple[str, Scalar] | None:
    tag = _strip_ns(elem.tag)
    if tag not in _XES_TYPE_TAGS:
        return None  # containers/lists are ignored, only scalars kept
    key = elem.get("key")
    value = elem.get("value")
    if key is None or value is None:
        return None
    if tag == "int":
        return key, int(value)
    if tag == "float":
        return key, float(value)
    if tag == "boolean":
        return key, value.strip().lower() == "true"
    if tag == "date":
        return key, _parse_timestamp(value)
    return key, value


def parse_xes(source: Union[bytes, str, IO[bytes]]) -> EventLog:
    """Parse an IEEE XES document (optionally gzip-compressed) into a log.

    Activity comes from the event's ``concept:name``, the timestamp from
    ``time:timestamp`` and the case id from the trace's ``concept:name``
    (synthesized as ``case_<index>`` when absent).  Events are sorted by
    timestamp within each trace; the sort is stable, so equal timestamps
    keep file order.
    """
    if isinstance(source, str):
        data = source.encode("utf-8")
    elif isinstance(source, bytes):
        data = source
    else:
        data = source.read()
    if data[:2] == b"\x1f\x8b":
        try:
            data = gzip.decompress(data)
        except OSError as exc:
            raise MalformedXml(f"bad gzip stream: {exc}") from exc
    try:
        root = ET.parse(io.BytesIO(data)).getroot()
    except ET.ParseError as exc:
        raise MalformedXml(str(exc)) from exc
    if _strip_ns(root.tag) != "log":
        raise MalformedXml(f"root element is <{_strip_ns(root.tag)}>, expected <log>")

    log_attrs: dict[str, Scalar] = {}
    for child in root:
        parsed = _parse_attribute(child)
        if parsed is not None:
            log_attrs[parsed[0]] = parsed[1]

    traces: list[Trace] = []
    for index, trace_elem in enumerate(e for e in root if _strip_ns(e.tag) == "trace"):
        case_id = f"case_{index}"
        events: list[Event] = []
        for child in trace_elem:
            tag = _strip_ns(child.tag)
            if tag == "event":
                events.append(_parse_event(child, index, len(events)))
            else:
                parsed = _parse_attribute(child)
                if parsed is not None and parsed[0] == "concept:name":
                    case_id = str(parsed[1])
        if not events:
            continue
        events.sort(key=lambda e: e.timestamp)  # stable: ties keep file order
        traces.append(Trace(case_id=case_id, events=tuple(events)))

    if not traces:
        raise EmptyLog("log contains no traces with events")
    return EventLog(traces=tuple(traces), attributes=log_attrs)


def _parse_event(elem: ET.Element, trace_index: int, event_index: int) -> Event:
    activity: str | None = None
    timestamp: datetime | None = None
    attrs: dict[str, Scalar] = {}
    for child in elem:
        parsed = _parse_attribute(child)
        if parsed is None:
            continue
        key, value = parsed
        if key == "concept:name":
            activity = str(value)
        elif key == "time:timestamp":
            if not isinstance(value, datetime):
                value = _parse_timestamp(str(value))
            timestamp = value
        else:
            attrs[key] = value
    where = f"trace {trace_index}, event {event_index}"
    if not activity:
        raise MissingActivity(f"event lacks concept:name ({where})")
    if timestamp is None:
        raise MissingTimestamp(f"event lacks time:timestamp ({where})")
    return Event(activity=activity, timestamp=timestamp, attributes=attrs)


def variants(log: EventLog) -> dict[tuple[str, ...], int]:
    """Distinct activity sequences with their trace counts."""
    counts: Counter[tuple[str, ...]] = Counter()
    for trace in log.traces:
        counts[trace.activities] += 1
    return dict(counts)


def dfg(log: EventLog) -> DirectlyFollowsGraph:
    """Directly-follows graph: counts of immediate successions."""
    edges: Counter[tuple[str, str]] = Counter()
    starts: Counter[str] = Counter()
    ends: Counter[str] = Counter()
    nodes: set[str] = set()
    for trace in log.traces:
        seq = trace.activities
        nodes.update(seq)
        starts[seq[0]] += 1
        ends[seq[-1]] += 1
        for a, b in zip(seq, seq[1:]):
            edges[(a, b)] += 1
    return DirectlyFollowsGraph(
        nodes=frozenset(nodes),
        edges=dict(edges),
        start_activities=dict(starts),
        end_activities=dict(ends),
    )


def footprint(log: EventLog) -> FootprintMatrix:
    """Footprint matrix over the log's alphabet."""
    graph = dfg(log)
    return footprint_from_dfg(graph)


def footprint_from_dfg(graph: DirectlyFollowsGraph) -> FootprintMatrix:
    return FootprintMatrix(sorted(graph.nodes), set(graph.edges.keys()))


def log_from_sequences(
    sequences: Iterable[Iterable[str]], attributes: Mapping[str, Scalar] | None = None
) -> EventLog:
    """Build a log from bare activity sequences with synthetic timestamps."""
    base = datetime(2024, 1, 1, tzinfo=timezone.utc)
    traces = []
    for i, seq in enumerate(sequences):
        events = tuple(
            Event(activity=a, timestamp=base + timedelta(hours=i, seconds=j))
            for j, a in enumerate(seq)
        )
        if not events:
            continue
        traces.append(Trace(case_id=f"case_{i}", events=events))
    if not traces:
        raise EmptyLog("no non-empty sequences")
    return EventLog(traces=tuple(traces), attributes=dict(attributes or {}))


def write_xes(log: EventLog) -> bytes:
    """Serialize a log back to XES; inverse of parse_xes for the core fields."""
    root = ET.Element("log", {"xes.version": "1.0"})
    for key, value in sorted(log.attributes.items()):
        _append_attribute(root, key, value)
    for trace in log.traces:
        trace_elem = ET.SubElement(root, "trace")
        _append_attribute(trace_elem, "concept:name", trace.case_id)
        for event in trace.events:
            event_elem = ET.SubElement(trace_elem, "event")
            _append_attribute(event_elem, "concept:name", event.activity)
            _append_attribute(event_elem, "time:timestamp", event.timestamp)
            for key, value in sorted(event.attributes.items()):
                _append_attribute(event_elem, key, value)
    buffer = io.BytesIO()
    ET.ElementTree(root).write(buffer, encoding="utf-8", xml_declaration=True)
    return buffer.getvalue()


def _append_attribute(parent: ET.Element, key: str, value: Scalar) -> None:
    if isinstance(value, bool):
        ET.SubElement(parent, "boolean", {"key": key, "value": "true" if value else "false"})
    elif isinstance(value, int):
        ET.SubElement(parent, "int", {"key": key, "value": str(value)})
    elif isinstance(value, float):
        ET.SubElement(parent, "float", {"key": key, "value": repr(value)})
    elif isinstance(value, datetime):
        iso = value.astimezone(timezone.utc).isoformat(timespec="milliseconds")
        ET.SubElement(parent, "date", {"key": key, "value": iso})
    else:
        ET.SubElement(parent, "string", {"key": key, "value": str(value)})


def write_jsonl(log: EventLog) -> str:
    """Line-delimited JSON export of traces, for debugging."""
    lines = []
    for trace in log.traces:
        lines.append(json.dumps({
            "case_id": trace.case_id,
            "events": [
                {"activity": e.activity, "timestamp": e.timestamp.isoformat()}
                for e in trace.events
            ],
        }, sort_keys=True))
    return "\n".join(lines) + "\n"
