"""Priority VASS models, exact step semantics and the bounded reachability oracle.

A model is a finite multigraph whose edges carry an integer update vector and a
zero-test level ``g``: the edge may only fire when counters ``1..g`` are zero.
All values here are immutable; vectors are plain tuples of ints.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Sequence, Union

Vector = tuple[int, ...]
Bound = Union[int, Sequence[int]]

STATE_MISMATCH = "state mismatch"
NEGATIVITY = "negativity"
ZERO_TEST = "failed zero test"


class ModelError(ValueError):
    """Malformed model, or a reference to an unknown state or edge."""


class RunError(ValueError):
    """An edge word could not be executed."""

    def __init__(self, index: int, reason: str):
        super().__init__(f"edge at index {index} not applicable: {reason}")
        self.index = index
        self.reason = reason


@dataclass(frozen=True)
class Edge:
    src: str
    dst: str
    update: Vector
    zerotest: int
    id: int


@dataclass(frozen=True)
class Configuration:
    state: str
    counters: Vector

    def __str__(self) -> str:
        return f"({self.state},{format_vector(self.counters)})"


@dataclass(frozen=True)
class Pvass:
    dim: int
    states: tuple[str, ...]
    edges: tuple[Edge, ...]

    @cached_property
    def _edge_index(self) -> dict[int, Edge]:
        return {e.id: e for e in self.edges}

    @cached_property
    def out_edges(self) -> dict[str, tuple[Edge, ...]]:
        out: dict[str, list[Edge]] = {q: [] for q in self.states}
        for e in self.edges:
            out.setdefault(e.src, []).append(e)
        return {q: tuple(es) for q, es in out.items()}

    def edge(self, eid: int) -> Edge:
        try:
            return self._edge_index[eid]
        except KeyError:
            raise ModelError(f"unknown edge id {eid}") from None

    @property
    def max_zerotest(self) -> int:
        return max((e.zerotest for e in self.edges), default=0)

    @property
    def is_vass(self) -> bool:
        return all(e.zerotest == 0 for e in self.edges)

    @property
    def is_normalized(self) -> bool:
        """True when no edge updates a counter it tests for zero."""
        return all(not any(e.update[: e.zerotest]) for e in self.edges)

    def restrict(self, max_level: int) -> Pvass:
        """Keep only edges whose zero-test level is at most ``max_level``."""
        return Pvass(self.dim, self.states, tuple(e for e in self.edges if e.zerotest <= max_level))


@dataclass(frozen=True)
class Run:
    configs: tuple[Configuration, ...]
    edges: tuple[int, ...]

    @property
    def source(self) -> Configuration:
        return self.configs[0]

    @property
    def target(self) -> Configuration:
        return self.configs[-1]

    @property
    def dir(self) -> tuple[Configuration, Configuration]:
        return (self.source, self.target)

    def __len__(self) -> int:
        return len(self.edges)


@dataclass(frozen=True)
class Section:
    """Reachability from ``p`` to ``q`` with the leading counters pinned.

    The relation lives on the free trailing coordinates: inputs of length
    ``dim - len(bs)`` and outputs of length ``dim - len(bt)``.
    """

    model: Pvass
    p: str
    q: str
    bs: Vector = ()
    bt: Vector = ()

    @property
    def in_dim(self) -> int:
        return self.model.dim - len(self.bs)

    @property
    def out_dim(self) -> int:
        return self.model.dim - len(self.bt)

    def check(self) -> None:
        m = self.model
        if self.p not in m.states or self.q not in m.states:
            raise ModelError(f"section endpoints {self.p!r}, {self.q!r} must be states of the model")
        if len(self.bs) > m.dim or len(self.bt) > m.dim:
            raise ModelError("fixed prefix longer than the model dimension")
        if any(v < 0 for v in self.bs + self.bt):
            raise ModelError("fixed prefixes must be natural vectors")


def format_vector(v: Iterable[int]) -> str:
    return "(" + ",".join(str(x) for x in v) + ")"


def caps_for(bound: Bound, n: int) -> Vector:
    """Per-coordinate caps for an ``n``-dimensional vector.

    An int caps every coordinate. A sequence is aligned with the trailing
    coordinates; missing leading entries take the largest given cap.
    """
    if isinstance(bound, int):
        return (bound,) * n
    b = tuple(bound)
    if len(b) >= n:
        return b[len(b) - n :]
    return (max(b, default=0),) * (n - len(b)) + b


def vectors_upto(caps: Sequence[int]) -> Iterator[Vector]:
    return itertools.product(*(range(c + 1) for c in caps))


def within(v: Sequence[int], caps: Sequence[int]) -> bool:
    return all(0 <= x <= c for x, c in zip(v, caps))


def add(u: Sequence[int], v: Sequence[int]) -> Vector:
    return tuple(a + b for a, b in zip(u, v))


def sub(u: Sequence[int], v: Sequence[int]) -> Vector:
    return tuple(a - b for a, b in zip(u, v))


def scale(n: int, v: Sequence[int]) -> Vector:
    return tuple(n * a for a in v)


def validate_model(m: Pvass) -> list[str]:
    problems = []
    if m.dim < 1:
        problems.append(f"dim must be positive, got {m.dim}")
    if len(set(m.states)) != len(m.states):
        problems.append("duplicate state names")
    known = set(m.states)
    seen_ids: set[int] = set()
    for e in m.edges:
        tag = f"edge e{e.id} ({e.src}->{e.dst})"
        if e.id in seen_ids:
            problems.append(f"{tag}: duplicate edge id")
        seen_ids.add(e.id)
        for end in (e.src, e.dst):
            if end not in known:
                problems.append(f"{tag}: unknown state {end!r}")
        if len(e.update) != m.dim:
            problems.append(f"{tag}: update has length {len(e.update)}, expected {m.dim}")
        if not 0 <= e.zerotest <= m.dim:
            problems.append(f"{tag}: zerotest {e.zerotest} outside 0..{m.dim}")
    return problems


def _failure(e: Edge, state: str, x: Vector) -> str | None:
    if state != e.src:
        return STATE_MISMATCH
    if any(x[: e.zerotest]):
        return ZERO_TEST
    if any(a + b < 0 for a, b in zip(x, e.update)):
        return NEGATIVITY
    return None


def step(m: Pvass, c: Configuration, eid: int) -> Configuration | None:
    e = m.edge(eid)
    if _failure(e, c.state, c.counters) is not None:
        return None
    return Configuration(e.dst, add(c.counters, e.update))


def run_from_word(m: Pvass, start: Configuration, word: Sequence[int]) -> Run:
    configs = [start]
    for i, eid in enumerate(word):
        e = m.edge(eid)
        cur = configs[-1]
        reason = _failure(e, cur.state, cur.counters)
        if reason is not None:
            raise RunError(i, reason)
        configs.append(Configuration(e.dst, add(cur.counters, e.update)))
    return Run(tuple(configs), tuple(word))


def validate_run(m: Pvass, run: Run) -> list[str]:
    problems = []
    if not run.configs:
        return ["run has no configurations"]
    if len(run.edges) != len(run.configs) - 1:
        problems.append("edge count must be one less than configuration count")
    for c in run.configs:
        if len(c.counters) != m.dim or any(v < 0 for v in c.counters):
            problems.append(f"configuration {c} is not in Q x N^{m.dim}")
    for i, (a, eid, b) in enumerate(zip(run.configs, run.edges, run.configs[1:])):
        try:
            nxt = step(m, a, eid)
        except ModelError as exc:
            problems.append(f"step {i}: {exc}")
            continue
        if nxt != b:
            problems.append(f"step {i}: e{eid} does not lead from {a} to {b}")
    return problems


def _successors(m: Pvass, state: str, x: Vector, caps: Vector) -> Iterator[tuple[Edge, Vector]]:
    for e in m.out_edges.get(state, ()):
        if any(x[: e.zerotest]):
            continue
        y = tuple(a + b for a, b in zip(x, e.update))
        if all(0 <= v <= c for v, c in zip(y, caps)):
            yield e, y


def reach_within(m: Pvass, state: str, x: Vector, caps: Vector) -> set[tuple[str, Vector]]:
    seen = {(state, x)}
    todo = deque(seen)
    while todo:
        s, v = todo.popleft()
        for e, y in _successors(m, s, v, caps):
            node = (e.dst, y)
            if node not in seen:
                seen.add(node)
                todo.append(node)
    return seen


def reach_set_bounded(m: Pvass, start: Configuration, bound: Bound) -> frozenset[Configuration]:
    """Configurations reachable from ``start`` with every counter kept within the bound."""
    caps = caps_for(bound, m.dim)
    if not within(start.counters, caps):
        raise ValueError(f"start {start} exceeds the bound")
    if start.state not in m.states:
        raise ModelError(f"unknown state {start.state!r}")
    return frozenset(Configuration(s, v) for s, v in reach_within(m, start.state, start.counters, caps))


def section_eval_bounded(s: Section, bound: Bound) -> frozenset[tuple[Vector, Vector]]:
    s.check()
    caps = caps_for(bound, s.model.dim)
    nbs, nbt = len(s.bs), len(s.bt)
    if not (within(s.bs, caps[:nbs]) and within(s.bt, caps[:nbt])):
        raise ValueError("fixed prefixes exceed the bound")
    pairs = set()
    for x in vectors_upto(caps[nbs:]):
        for state, y in reach_within(s.model, s.p, s.bs + x, caps):
            if state == s.q and y[:nbt] == s.bt:
                pairs.add((x, y[nbt:]))
    return frozenset(pairs)


def reachable_states(m: Pvass, start: str) -> set[str]:
    """States reachable in the underlying graph, ignoring counters."""
    seen = {start}
    todo = [start]
    while todo:
        for e in m.out_edges.get(todo.pop(), ()):
            if e.dst not in seen:
                seen.add(e.dst)
                todo.append(e.dst)
    return seen


def trim(m: Pvass, p: str, q: str) -> Pvass:
    """Drop states that lie on no graph path from ``p`` to ``q``; edge ids are kept."""
    fwd = reachable_states(m, p)
    rev = Pvass(m.dim, m.states, tuple(Edge(e.dst, e.src, e.update, e.zerotest, e.id) for e in m.edges))
    useful = (fwd & reachable_states(rev, q)) | {p, q}
    states = tuple(s for s in m.states if s in useful)
    edges = tuple(e for e in m.edges if e.src in useful and e.dst in useful)
    return Pvass(m.dim, states, edges)


# -- normalization ---------------------------------------------------------


def split_tested_updates(m: Pvass) -> Pvass:
    """Route every edge that updates a zero-tested counter through a fresh state.

    The first half keeps the test with a zero update, the second half applies
    the update without testing. Models that need no change come back equal.
    """
    if m.is_normalized:
        return m
    taken = set(m.states)
    states = list(m.states)
    edges: list[Edge] = []
    for e in m.edges:
        if not any(e.update[: e.zerotest]):
            edges.append(Edge(e.src, e.dst, e.update, e.zerotest, len(edges)))
            continue
        mid = f"{e.src}~{e.id}"
        while mid in taken:
            mid += "'"
        taken.add(mid)
        states.append(mid)
        edges.append(Edge(e.src, mid, (0,) * m.dim, e.zerotest, len(edges)))
        edges.append(Edge(mid, e.dst, e.update, 0, len(edges)))
    return Pvass(m.dim, tuple(states), tuple(edges))


ELIMINATED_STATE = "main"


@dataclass(frozen=True)
class StateElimination:
    """A single-state model that simulates ``original`` with extra control counters.

    Control counters sit right after the first ``offset`` counters, so zero
    tests never reach them. ``encoding`` maps each original state to its
    control vector.
    """

    model: Pvass
    original: Pvass
    offset: int
    encoding: dict[str, Vector]

    @property
    def width(self) -> int:
        return self.model.dim - self.original.dim

    @property
    def control_cap(self) -> int:
        return max(max(v) for v in self.encoding.values())

    def lift_counters(self, state: str, x: Sequence[int]) -> Vector:
        x = tuple(x)
        return x[: self.offset] + self.encoding[state] + x[self.offset :]

    def lift_configuration(self, c: Configuration) -> Configuration:
        return Configuration(ELIMINATED_STATE, self.lift_counters(c.state, c.counters))

    def lift_section(self, s: Section) -> Section:
        if min(len(s.bs), len(s.bt)) < self.offset:
            raise ModelError(
                f"both fixed prefixes must cover the {self.offset} zero-tested counters "
                "so the control counters stay inside the fixed prefix"
            )
        return Section(
            self.model,
            ELIMINATED_STATE,
            ELIMINATED_STATE,
            self.lift_counters(s.p, s.bs),
            self.lift_counters(s.q, s.bt),
        )

    def caps(self, bound: int) -> Vector:
        """Bound the original counters by ``bound`` and the control counters by the code range."""
        d = self.original.dim
        return (bound,) * self.offset + (self.control_cap,) * self.width + (bound,) * (d - self.offset)


def _pseudo_graph(m: Pvass) -> tuple[list[str], list[tuple[str, str]]]:
    nodes = list(m.states)
    arcs = []
    for e in m.edges:
        if e.src == e.dst:
            mid = f"{e.src}~loop{e.id}"
            nodes.append(mid)
            arcs += [(e.src, mid), (mid, e.src)]
        else:
            arcs.append((e.src, e.dst))
    return nodes, list(dict.fromkeys(arcs))


def _fires_elsewhere(enc: dict[str, Vector], arcs: list[tuple[str, str]]) -> bool:
    for u, v in arcs:
        if u not in enc or v not in enc:
            continue
        for w, cw in enc.items():
            if w != u and all(a + b - c >= 0 for a, b, c in zip(cw, enc[v], enc[u])):
                return True
    return False


def _search_encoding(nodes, arcs, width=3, max_value=4, budget=200_000):
    """Smallest-range injective code under which each control update fires only at its source."""
    for top in range(1, max_value + 1):
        pool = list(itertools.product(range(top + 1), repeat=width))
        enc: dict[str, Vector] = {}
        used: set[Vector] = set()
        visits = 0

        def extend(i: int) -> bool:
            nonlocal visits
            if i == len(nodes):
                return True
            for v in pool:
                visits += 1
                if visits > budget:
                    return False
                if v in used:
                    continue
                enc[nodes[i]] = v
                used.add(v)
                if not _fires_elsewhere(enc, arcs) and extend(i + 1):
                    return True
                del enc[nodes[i]]
                used.discard(v)
            return False

        if extend(0):
            return dict(enc)
    return None


def eliminate_states(m: Pvass) -> StateElimination:
    """Encode the control state into extra counters, leaving a single-state model.

    Self-loops pass through an intermediate control value so that every
    control update changes the code. A three-counter code is searched first;
    if none is found within the search budget a one-hot code is used.
    """
    nodes, arcs = _pseudo_graph(m)
    code = _search_encoding(nodes, arcs)
    if code is None:
        code = {n: tuple(int(i == j) for j in range(len(nodes))) for i, n in enumerate(nodes)}
    width = len(next(iter(code.values())))
    k = m.max_zerotest

    def lifted(update: Vector, control: Vector) -> Vector:
        return update[:k] + control + update[k:]

    edges: list[Edge] = []
    for e in m.edges:
        if e.src == e.dst:
            mid = code[f"{e.src}~loop{e.id}"]
            here = code[e.src]
            edges.append(Edge(ELIMINATED_STATE, ELIMINATED_STATE, lifted(e.update, sub(mid, here)), e.zerotest, len(edges)))
            edges.append(Edge(ELIMINATED_STATE, ELIMINATED_STATE, lifted((0,) * m.dim, sub(here, mid)), 0, len(edges)))
        else:
            delta = sub(code[e.dst], code[e.src])
            edges.append(Edge(ELIMINATED_STATE, ELIMINATED_STATE, lifted(e.update, delta), e.zerotest, len(edges)))
    single = Pvass(m.dim + width, (ELIMINATED_STATE,), tuple(edges))
    return StateElimination(single, m, k, {q: code[q] for q in m.states})


def normalize(m: Pvass, *, split: bool = True, eliminate: bool = False) -> Pvass:
    out = split_tested_updates(m) if split else m
    if eliminate:
        out = eliminate_states(out).model
    return out
