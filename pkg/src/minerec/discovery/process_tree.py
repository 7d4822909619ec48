"""Process trees and their translation to workflow nets.

Trees are the intermediate form of the inductive-miner family and the
corpus generator.  Operators: sequence, xor (exclusive choice), parallel,
loop (exactly two children: do-part, redo-part).  A leaf carries one
activity label or none (silent).
"""
from __future__ import annotations

from dataclasses import dataclass, field

from ..petri import PetriNet, make_net

SEQUENCE = "sequence"
XOR = "xor"
PARALLEL = "parallel"
LOOP = "loop"

_OPERATORS = {SEQUENCE, XOR, PARALLEL, LOOP}


@dataclass(frozen=True)
class ProcessTree:
    operator: str | None = None  # None = leaf
    label: str | None = None  # leaf label; None on a leaf = silent
    children: tuple["ProcessTree", ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.operator is None:
            if self.children:
                raise ValueError("leaves have no children")
        else:
            if self.operator not in _OPERATORS:
                raise ValueError(f"unknown operator {self.operator!r}")
            if self.label is not None:
                raise ValueError("operator nodes carry no label")
            if self.operator == LOOP:
                if len(self.children) != 2:
                    raise ValueError("loop takes exactly two children (do, redo)")
            elif len(self.children) < 2:
                raise ValueError(f"{self.operator} needs at least two children")

    def is_leaf(self) -> bool:
        return self.operator is None

    def is_silent(self) -> bool:
        return self.operator is None and self.label is None

    def leaves(self) -> list[str]:
        """Labels of all labeled leaves, left to right."""
        if self.is_leaf():
            return [self.label] if self.label is not None else []
        out: list[str] = []
        for child in self.children:
            out.extend(child.leaves())
        return out

    def depth(self) -> int:
        if self.is_leaf():
            return 0
        return 1 + max(c.depth() for c in self.children)

    def __str__(self) -> str:
        if self.is_leaf():
            return self.label if self.label is not None else "tau"
        inner = ", ".join(str(c) for c in self.children)
        return f"{self.operator}({inner})"


def leaf(label: str) -> ProcessTree:
    return ProcessTree(label=label)


def silent() -> ProcessTree:
    return ProcessTree()


def seq(*children: ProcessTree) -> ProcessTree:
    return ProcessTree(operator=SEQUENCE, children=tuple(children))


def xor(*children: ProcessTree) -> ProcessTree:
    return ProcessTree(operator=XOR, children=tuple(children))


def parallel(*children: ProcessTree) -> ProcessTree:
    return ProcessTree(operator=PARALLEL, children=tuple(children))


def loop(do: ProcessTree, redo: ProcessTree) -> ProcessTree:
    return ProcessTree(operator=LOOP, children=(do, redo))


class _NetBuilder:
    def __init__(self):
        self.places: list[str] = []
        self.transitions: dict[str, str | None] = {}
        self.arcs: list[tuple[str, str]] = []

    def place(self, name: str) -> str:
        self.places.append(name)
        return name

    def transition(self, name: str, label: str | None) -> str:
        self.transitions[name] = label
        return name

    def arc(self, src: str, dst: str) -> None:
        self.arcs.append((src, dst))


def tree_to_net(tree: ProcessTree) -> PetriNet:
    """Compositional, language-preserving translation to a workflow net.

    Sequence composes serially and choice children share their entry/exit
    places, so neither adds silent transitions; parallel uses an AND
    split/join pair; loop enters and exits through silent guards with the
    redo child wired back from the loop exit to the loop entry.  Keeping
    choices silent-free bounds the silent chains replay has to cross,
    which the depth-limited silent search relies on.  Node names encode
    the construction path, so identical trees give identical nets.
    """
    b = _NetBuilder()
    source = b.place("source")
    sink = b.place("sink")
    _build(tree, "0", source, sink, b)
    return make_net(b.places, b.transitions, b.arcs, {source: 1}, {sink: 1})


def _build(node: ProcessTree, path: str, p_in: str, p_out: str, b: _NetBuilder) -> None:
    if node.is_leaf():
        t = b.transition(f"t_{path}", node.label)
        b.arc(p_in, t)
        b.arc(t, p_out)
        return

    if node.operator == SEQUENCE:
        boundary = p_in
        for i, child in enumerate(node.children):
            nxt = p_out if i == len(node.children) - 1 else b.place(f"p_{path}_{i}")
            _build(child, f"{path}.{i}", boundary, nxt, b)
            boundary = nxt
        return

    if node.operator == XOR:
        for i, child in enumerate(node.children):
            _build(child, f"{path}.{i}", p_in, p_out, b)
        return

    if node.operator == PARALLEL:
        t_split = b.transition(f"tau_{path}_split", None)
        t_join = b.transition(f"tau_{path}_join", None)
        b.arc(p_in, t_split)
        b.arc(t_join, p_out)
        for i, child in enumerate(node.children):
            entry = b.place(f"p_{path}_{i}_in")
            exit_ = b.place(f"p_{path}_{i}_out")
            b.arc(t_split, entry)
            _build(child, f"{path}.{i}", entry, exit_, b)
            b.arc(exit_, t_join)
        return

    # loop(do, redo): do, then any number of (redo, do) rounds; the silent
    # guards keep the loop's places private to the loop
    do, redo = node.children
    q_in = b.place(f"p_{path}_loop_in")
    q_out = b.place(f"p_{path}_loop_out")
    t_enter = b.transition(f"tau_{path}_enter", None)
    t_exit = b.transition(f"tau_{path}_exit", None)
    b.arc(p_in, t_enter)
    b.arc(t_enter, q_in)
    b.arc(q_out, t_exit)
    b.arc(t_exit, p_out)
    _build(do, f"{path}.0", q_in, q_out, b)
    _build(redo, f"{path}.1", q_out, q_in, b)
