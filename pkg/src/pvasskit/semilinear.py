"""Semilinear sets, linear path schemes, flatness by transition words, and bounded invariant checks."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .core import (
    Bound,
    Configuration,
    Edge,
    Pvass,
    Section,
    Vector,
    add,
    caps_for,
    section_eval_bounded,
    step,
    vectors_upto,
)
from .regex import join, star_closure


@dataclass(frozen=True)
class LinearSet:
    base: Vector
    periods: tuple[Vector, ...] = ()

    def __post_init__(self):
        n = len(self.base)
        if any(len(p) != n for p in self.periods):
            raise ValueError("periods must have the length of the base")
        if any(v < 0 for v in self.base) or any(v < 0 for p in self.periods for v in p):
            raise ValueError("linear sets are generated by natural vectors")
        object.__setattr__(self, "periods", tuple(p for p in self.periods if any(p)))

    @property
    def dim(self) -> int:
        return len(self.base)


@dataclass(frozen=True)
class SemilinearSet:
    dim: int
    components: tuple[LinearSet, ...] = ()

    def __post_init__(self):
        if any(c.dim != self.dim for c in self.components):
            raise ValueError(f"all components must have dimension {self.dim}")

    def __contains__(self, x: Sequence[int]) -> bool:
        return semilinear_membership(self, x).member


@dataclass(frozen=True)
class Membership:
    member: bool
    component: int | None = None
    coefficients: tuple[int, ...] = ()


def linear_coefficients(ls: LinearSet, x: Sequence[int]) -> tuple[int, ...] | None:
    rest = tuple(a - b for a, b in zip(x, ls.base))
    if any(v < 0 for v in rest):
        return None
    periods = ls.periods

    def search(i: int, r: Vector) -> list[int] | None:
        if i == len(periods):
            return [] if not any(r) else None
        p = periods[i]
        top = min(r[j] // p[j] for j in range(len(p)) if p[j])
        for n in range(top + 1):
            tail = search(i + 1, tuple(a - n * b for a, b in zip(r, p)))
            if tail is not None:
                return [n, *tail]
        return None

    found = search(0, rest)
    return None if found is None else tuple(found)


def semilinear_membership(s: SemilinearSet, x: Sequence[int]) -> Membership:
    if len(x) != s.dim:
        raise ValueError(f"vector of length {len(x)} queried against a set of dimension {s.dim}")
    for i, comp in enumerate(s.components):
        coeffs = linear_coefficients(comp, x)
        if coeffs is not None:
            return Membership(True, i, coeffs)
    return Membership(False)


def linear_points_upto(ls: LinearSet, bound: int) -> set[Vector]:
    """All members with every entry at most ``bound``, by saturation from the base."""
    if any(v > bound for v in ls.base):
        return set()
    seen = {ls.base}
    todo = deque(seen)
    while todo:
        v = todo.popleft()
        for p in ls.periods:
            w = add(v, p)
            if max(w) <= bound and w not in seen:
                seen.add(w)
                todo.append(w)
    return seen


# -- linear path schemes ---------------------------------------------------


@dataclass(frozen=True)
class LinearPathScheme:
    """A composition of monotone transitive closures of single end pairs."""

    dim: int
    end_pairs: tuple[tuple[Vector, Vector], ...] = ()

    def __post_init__(self):
        for s, t in self.end_pairs:
            if len(s) != self.dim or len(t) != self.dim:
                raise ValueError(f"end pairs must have dimension {self.dim}")


def monotone_lift(pair: tuple[Vector, Vector], bound: Bound) -> frozenset[tuple[Vector, Vector]]:
    """``(s + u, t + u)`` for every natural ``u`` keeping both sides within the bound."""
    s, t = pair
    caps = caps_for(bound, len(s))
    room = tuple(c - max(a, b) for c, a, b in zip(caps, s, t))
    if any(r < 0 for r in room):
        return frozenset()
    return frozenset((add(s, u), add(t, u)) for u in vectors_upto(room))


def mtc_bounded(pair: tuple[Vector, Vector], bound: Bound) -> frozenset[tuple[Vector, Vector]]:
    return star_closure(monotone_lift(pair, bound), caps_for(bound, len(pair[0])))


def lps_relation_bounded(scheme: LinearPathScheme, bound: Bound) -> frozenset[tuple[Vector, Vector]]:
    caps = caps_for(bound, scheme.dim)
    rel = frozenset((x, x) for x in vectors_upto(caps))
    for pair in scheme.end_pairs:
        rel = join(rel, mtc_bounded(pair, bound))
    return rel


def lps_membership_bounded(scheme: LinearPathScheme, pair: tuple[Vector, Vector], bound: Bound) -> bool:
    x, y = pair
    if len(x) != scheme.dim or len(y) != scheme.dim:
        raise ValueError("query pair does not match the scheme dimension")
    return (tuple(x), tuple(y)) in lps_relation_bounded(scheme, bound)


# -- transition-word flatness ----------------------------------------------


@dataclass(frozen=True)
class FlatWitness:
    words: tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class FlatVerdict:
    included: bool
    missing: tuple[Configuration, Configuration] | None = None
    checked: int = 0


ConfigPair = tuple[Configuration, Configuration]


def section_config_pairs(s: Section, bound: Bound) -> frozenset[ConfigPair]:
    """The section relation at the bound, written as pairs of full configurations."""
    return frozenset(
        (Configuration(s.p, s.bs + x), Configuration(s.q, s.bt + y)) for x, y in section_eval_bounded(s, bound)
    )


def word_step_relation(m: Pvass, word: Sequence[int], bound: Bound) -> dict[Configuration, Configuration]:
    """Configurations within the bound mapped to their image under ``word``; intermediates stay within the bound."""
    for eid in word:
        m.edge(eid)
    caps = caps_for(bound, m.dim)
    out = {}
    for q in m.states:
        for x in vectors_upto(caps):
            c: Configuration | None = Configuration(q, x)
            start = c
            for eid in word:
                c = step(m, c, eid)
                if c is None or any(v > b for v, b in zip(c.counters, caps)):
                    c = None
                    break
            if c is not None:
                out[start] = c
    return out


def word_flat_check(m: Pvass, fw: FlatWitness, target: Iterable[ConfigPair], bound: Bound) -> FlatVerdict:
    """Check that every pair of ``target`` lies in the composition of the starred word relations."""
    steps = [word_step_relation(m, w, bound) for w in fw.words]
    pairs = sorted(target, key=lambda p: (p[0].state, p[0].counters, p[1].state, p[1].counters))
    images: dict[Configuration, set[Configuration]] = {}
    for src, tgt in pairs:
        if src not in images:
            frontier = {src}
            for succ in steps:
                frontier = _closure(frontier, succ)
            images[src] = frontier
        if tgt not in images[src]:
            return FlatVerdict(False, (src, tgt), len(pairs))
    return FlatVerdict(True, None, len(pairs))


def _closure(starts: set[Configuration], succ: dict[Configuration, Configuration]) -> set[Configuration]:
    seen = set(starts)
    todo = list(starts)
    while todo:
        nxt = succ.get(todo.pop())
        if nxt is not None and nxt not in seen:
            seen.add(nxt)
            todo.append(nxt)
    return seen


# -- intersection with a semilinear relation ---------------------------------


def intersect_section_semilinear(x: Section, s: SemilinearSet) -> Section:
    """A PVASS section whose outputs are exactly the pairs of ``x`` that lie in ``s``.

    The result has no free input; its output vector is the pair ``(in, out)``
    concatenated. Counters come in blocks of ``d``: the original run, a copy of
    the guessed input, the element of ``s`` (two blocks), and the output (two blocks).
    """
    d, din, dout = x.model.dim, x.in_dim, x.out_dim
    if s.dim != din + dout:
        raise ValueError(f"semilinear set has dimension {s.dim}, expected {din}+{dout}")
    dim = 6 * d
    A, CP, M1, M2, LX = 0, d, 2 * d, 3 * d, 6 * d - din - dout
    LY = 6 * d - dout

    def vec(*entries: tuple[int, int]) -> Vector:
        v = [0] * dim
        for pos, val in entries:
            v[pos] += val
        return tuple(v)

    states = ["guess"] + [f"run.{q}" for q in x.model.states]
    edges: list[Edge] = []

    def edge(src: str, dst: str, update: Vector, test: int = 0) -> None:
        edges.append(Edge(src, dst, update, test, len(edges)))

    nbs, nbt = len(x.bs), len(x.bt)
    for i in range(din):
        edge("guess", "guess", vec((A + nbs + i, 1), (CP + d - din + i, 1)))
    edge("guess", f"run.{x.p}", vec(*((A + j, b) for j, b in enumerate(x.bs))))
    for e in x.model.edges:
        edge(f"run.{e.src}", f"run.{e.dst}", e.update + (0,) * (5 * d), e.zerotest)
    leave = tuple((A + j, -b) for j, b in enumerate(x.bt))
    for k, comp in enumerate(s.components):
        gen = f"gen{k}"
        states.append(gen)

        def place(v: Vector) -> tuple[tuple[int, int], ...]:
            return tuple((M1 + d - din + i, v[i]) for i in range(din)) + tuple(
                (M2 + d - dout + i, v[din + i]) for i in range(dout)
            )

        edge(f"run.{x.q}", gen, vec(*leave, *place(comp.base)))
        for p in comp.periods:
            edge(gen, gen, vec(*place(p)))
        edge(gen, "check", (0,) * dim)
    states.append("check")
    for i in range(din):
        edge("check", "check", vec((CP + d - din + i, -1), (M1 + d - din + i, -1), (LX + i, 1)))
    for i in range(dout):
        edge("check", "check", vec((A + nbt + i, -1), (M2 + d - dout + i, -1), (LY + i, 1)))
    model = Pvass(dim, tuple(states), tuple(edges))
    return Section(model, "guess", "check", (0,) * dim, (0,) * (dim - din - dout))


def split_pairs(rel: Iterable[tuple[Vector, Vector]], din: int) -> frozenset[tuple[Vector, Vector]]:
    """Turn the output of an intersection section back into ``(in, out)`` pairs."""
    return frozenset((y[:din], y[din:]) for _, y in rel)


# -- invariants --------------------------------------------------------------


def encode_configuration(m: Pvass, c: Configuration) -> Vector:
    """One-hot state (in model order) followed by the counters."""
    return tuple(int(q == c.state) for q in m.states) + tuple(c.counters)


@dataclass(frozen=True)
class InvariantVerdict:
    ok: bool
    counterexample: tuple[Configuration, int] | None = None
    checked: int = 0


def inductive_invariant_check(m: Pvass, s: SemilinearSet, bound: int) -> InvariantVerdict:
    """Look for a configuration within the bound inside ``s`` whose successor leaves ``s``.

    Membership of successors is exact; only the sweep over sources is bounded.
    """
    if s.dim != len(m.states) + m.dim:
        raise ValueError(f"invariant has dimension {s.dim}, expected {len(m.states)} states + {m.dim} counters")
    checked = 0
    for q in m.states:
        for x in vectors_upto(caps_for(bound, m.dim)):
            c = Configuration(q, x)
            if encode_configuration(m, c) not in s:
                continue
            checked += 1
            for e in sorted(m.out_edges.get(q, ()), key=lambda e: e.id):
                nxt = step(m, c, e.id)
                if nxt is not None and encode_configuration(m, nxt) not in s:
                    return InvariantVerdict(False, (c, e.id), checked)
    return InvariantVerdict(True, None, checked)


@dataclass(frozen=True)
class SeparatorVerdict:
    ok: bool
    failed_clause: str | None = None
    detail: str = ""
    invariant: InvariantVerdict | None = field(default=None, compare=False)


def separator_check(m: Pvass, s: SemilinearSet, source: Configuration, target: Configuration, bound: int) -> SeparatorVerdict:
    if encode_configuration(m, source) not in s:
        return SeparatorVerdict(False, "source", f"{source} is not in the set")
    if encode_configuration(m, target) in s:
        return SeparatorVerdict(False, "target", f"{target} is in the set")
    inv = inductive_invariant_check(m, s, bound)
    if not inv.ok:
        c, eid = inv.counterexample
        return SeparatorVerdict(False, "inductive", f"e{eid} leaves the set from {c}", inv)
    return SeparatorVerdict(True, None, f"inductive up to bound {bound} ({inv.checked} configurations)", inv)

