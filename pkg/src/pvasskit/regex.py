"""Regular expressions whose letters are VASS sections, and translations to and from PVASS sections.

Expressions are immutable trees that may share subtrees. Node tags are
positions in a preorder walk of the unfolded tree, so a shared subtree gets a
distinct tag at every place it occurs.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from typing import Iterator

from .core import (
    Bound,
    Edge,
    ModelError,
    Pvass,
    Section,
    Vector,
    caps_for,
    reachable_states,
    section_eval_bounded,
    trim,
    vectors_upto,
)

Relation = frozenset[tuple[Vector, Vector]]


class TranslationError(ValueError):
    """Raised when a translation precondition fails or dimensions stop lining up."""


@dataclass(frozen=True, eq=False)
class Leaf:
    section: Section

    @property
    def in_dim(self) -> int:
        return self.section.in_dim

    @property
    def out_dim(self) -> int:
        return self.section.out_dim


@dataclass(frozen=True, eq=False)
class Comp:
    left: Expression
    right: Expression

    @property
    def in_dim(self) -> int:
        return self.left.in_dim

    @property
    def out_dim(self) -> int:
        return self.right.out_dim


@dataclass(frozen=True, eq=False)
class Union:
    left: Expression
    right: Expression

    @property
    def in_dim(self) -> int:
        return self.left.in_dim

    @property
    def out_dim(self) -> int:
        return self.left.out_dim


@dataclass(frozen=True, eq=False)
class Star:
    inner: Expression

    @property
    def in_dim(self) -> int:
        return self.inner.in_dim

    @property
    def out_dim(self) -> int:
        return self.inner.in_dim


Expression = Leaf | Comp | Union | Star


def children(e: Expression) -> tuple[Expression, ...]:
    if isinstance(e, (Comp, Union)):
        return (e.left, e.right)
    if isinstance(e, Star):
        return (e.inner,)
    return ()


def unfolded_size(e: Expression, _memo: dict | None = None) -> int:
    memo = {} if _memo is None else _memo
    key = id(e)
    if key not in memo:
        memo[key] = 1 + sum(unfolded_size(c, memo) for c in children(e))
    return memo[key]


def child_tags(e: Expression, tag: int, _memo: dict | None = None) -> tuple[int, ...]:
    """Tags of the children of the node at position ``tag``."""
    memo = {} if _memo is None else _memo
    tags, nxt = [], tag + 1
    for c in children(e):
        tags.append(nxt)
        nxt += unfolded_size(c, memo)
    return tuple(tags)


def preorder(e: Expression, tag: int = 0) -> Iterator[tuple[int, Expression]]:
    """Yield ``(tag, node)`` for every position of the unfolded tree."""
    stack = [(tag, e)]
    memo: dict = {}
    while stack:
        t, node = stack.pop()
        yield t, node
        pairs = list(zip(child_tags(node, t, memo), children(node)))
        stack.extend(reversed(pairs))


def distinct_nodes(e: Expression) -> list[Expression]:
    seen: dict[int, Expression] = {}
    todo = [e]
    while todo:
        n = todo.pop()
        if id(n) not in seen:
            seen[id(n)] = n
            todo.extend(children(n))
    return list(seen.values())


def leaves(e: Expression) -> list[Leaf]:
    return [n for n in distinct_nodes(e) if isinstance(n, Leaf)]


def kind(e: Expression) -> str:
    return {Leaf: "leaf", Comp: "comp", Union: "union", Star: "star"}[type(e)]


def validate_expression(e: Expression) -> list[str]:
    problems: list[str] = []
    for tag, n in preorder(e):
        where = f"E{tag} ({kind(n)})"
        if isinstance(n, Leaf):
            s = n.section
            if not s.model.is_vass:
                problems.append(f"{where}: leaf model has zero-tested edges")
            try:
                s.check()
            except ModelError as exc:
                problems.append(f"{where}: {exc}")
        elif isinstance(n, Comp):
            if n.left.out_dim != n.right.in_dim:
                problems.append(f"{where}: left output dim {n.left.out_dim} != right input dim {n.right.in_dim}")
        elif isinstance(n, Union):
            a, b = n.left, n.right
            if (a.in_dim, a.out_dim) != (b.in_dim, b.out_dim):
                problems.append(f"{where}: branch dims {a.in_dim}->{a.out_dim} and {b.in_dim}->{b.out_dim} differ")
        elif n.inner.in_dim != n.inner.out_dim:
            problems.append(f"{where}: starred expression has dims {n.inner.in_dim}->{n.inner.out_dim}")
    return problems


# -- bounded semantics -----------------------------------------------------


def join(r1: Relation, r2: Relation) -> Relation:
    by_src: dict[Vector, list[Vector]] = {}
    for m, y in r2:
        by_src.setdefault(m, []).append(y)
    return frozenset((x, y) for x, m in r1 for y in by_src.get(m, ()))


def star_closure(r: Relation, caps: Vector) -> Relation:
    """Reflexive-transitive closure of ``r`` over all vectors within ``caps``."""
    succ: dict[Vector, list[Vector]] = {}
    for x, y in r:
        succ.setdefault(x, []).append(y)
    out = set()
    for x in vectors_upto(caps):
        seen = {x}
        todo = deque([x])
        while todo:
            for y in succ.get(todo.popleft(), ()):
                if y not in seen:
                    seen.add(y)
                    todo.append(y)
        out.update((x, y) for y in seen)
    return frozenset(out)


def eval_expression_bounded(e: Expression, bound: Bound) -> Relation:
    """The relation of ``e`` restricted to vectors within the bound.

    A sequence bound is aligned with trailing coordinates, like the free
    coordinates of every node.
    """
    problems = validate_expression(e)
    if problems:
        raise TranslationError("invalid expression: " + "; ".join(problems))
    memo: dict[int, Relation] = {}

    def ev(n: Expression) -> Relation:
        key = id(n)
        if key in memo:
            return memo[key]
        if isinstance(n, Leaf):
            res = section_eval_bounded(n.section, bound)
        elif isinstance(n, Comp):
            res = join(ev(n.left), ev(n.right))
        elif isinstance(n, Union):
            res = ev(n.left) | ev(n.right)
        else:
            res = star_closure(ev(n.inner), caps_for(bound, n.in_dim))
        memo[key] = res
        return res

    return ev(e)


# -- PVASS section to expression --------------------------------------------


def _union(a: Expression | None, b: Expression | None) -> Expression | None:
    if a is None:
        return b
    if b is None:
        return a
    if (a.in_dim, a.out_dim) != (b.in_dim, b.out_dim):
        raise TranslationError(f"union of {a.in_dim}->{a.out_dim} with {b.in_dim}->{b.out_dim}")
    return Union(a, b)


def _comp(*parts: Expression | None) -> Expression | None:
    if any(p is None for p in parts):
        return None
    out = parts[0]
    for p in parts[1:]:
        if out.out_dim != p.in_dim:
            raise TranslationError(f"composition through {out.out_dim} and {p.in_dim} counters")
        out = Comp(out, p)
    return out


def _zero_edges_leaf(m: Pvass, level: int, edges: list[Edge]) -> Leaf:
    """A VASS leaf that takes exactly one of ``edges`` between two fixed zero prefixes."""
    states = ["in", "out"] + [f"z{e.id}" for e in edges]
    new = []
    for e in edges:
        new.append(Edge("in", f"z{e.id}", e.update, 0, len(new)))
        new.append(Edge(f"z{e.id}", "out", (0,) * m.dim, 0, len(new)))
    zeros = (0,) * level
    return Leaf(Section(Pvass(m.dim, tuple(states), tuple(new)), "in", "out", zeros, zeros))


def pvass_to_regex(s: Section) -> Expression:
    """An expression over VASS sections with the same relation as ``s``.

    Works by induction on the highest zero-test level ``k``: a run either
    avoids level-``k`` tests, or splits at its first and last such test, with
    every piece in between starting and ending on a zero prefix of length ``k``.
    """
    s.check()
    m = s.model
    if not m.is_normalized:
        raise TranslationError("model must be normalized: some edge updates a counter it tests for zero")
    levels = {lvl: m.restrict(lvl) for lvl in range(m.max_zerotest + 1)}
    reach = {
        lvl: {q: reachable_states(v, q) for q in m.states} for lvl, v in levels.items()
    }
    on_cycle = {
        lvl: {q for q in m.states if any(e.dst in reach[lvl] and q in reach[lvl][e.dst] for e in v.out_edges.get(q, ()))}
        for lvl, v in levels.items()
    }
    memo: dict[tuple, Expression | None] = {}

    def build(k: int, p: str, q: str, bs: Vector, bt: Vector) -> Expression | None:
        key = (k, p, q, bs, bt)
        if key in memo:
            return memo[key]
        tested = [e for e in m.edges if e.zerotest == k]
        if k == 0:
            res: Expression | None = Leaf(Section(trim(levels[0], p, q), p, q, bs, bt))
        elif not tested:
            res = build(k - 1, p, q, bs, bt)
        else:
            res = _tested_level(k, p, q, bs, bt, tested)
        memo[key] = res
        return res

    def segment(k: int, p: str, q: str, bs: Vector, bt: Vector) -> Expression | None:
        return build(k, p, q, bs, bt) if q in reach[k][p] else None

    def _tested_level(k, p, q, bs, bt, tested) -> Expression | None:
        zeros = (0,) * k
        plain = segment(k - 1, p, q, bs, bt)
        if len(m.states) == 1:
            loop = Star(_union(segment(k - 1, p, p, zeros, zeros), _zero_edges_leaf(m, k, tested)))
            return _union(plain, _comp(segment(k - 1, p, p, bs, zeros), loop, segment(k - 1, p, q, zeros, bt)))
        junctions = list(dict.fromkeys([e.src for e in tested] + [e.dst for e in tested]))
        closure = _path_closure(k, junctions, tested, zeros)
        res = plain
        for u in dict.fromkeys(e.src for e in tested):
            if u not in reach[k - 1][p]:
                continue
            for v in dict.fromkeys(e.dst for e in tested):
                if (u, v) in closure and q in reach[k - 1][v]:
                    res = _union(res, _comp(build(k - 1, p, u, bs, zeros), closure[u, v], build(k - 1, v, q, zeros, bt)))
        return res

    def _path_closure(k, junctions, tested, zeros) -> dict[tuple[str, str], Expression]:
        r: dict[tuple[str, str], Expression] = {}
        for u in junctions:
            for v in junctions:
                step = None
                if v in reach[k - 1][u] and (u != v or u in on_cycle[k - 1]):
                    step = build(k - 1, u, v, zeros, zeros)
                direct = [e for e in tested if e.src == u and e.dst == v]
                if direct:
                    step = _union(step, _zero_edges_leaf(m, k, direct))
                if step is not None:
                    r[u, v] = step
        for mid in junctions:
            loop = r.get((mid, mid))
            via = Star(loop) if loop is not None else None
            nxt = dict(r)
            for u in junctions:
                if (u, mid) not in r:
                    continue
                for v in junctions:
                    if (mid, v) not in r:
                        continue
                    parts = [r[u, mid]] + ([via] if via is not None else []) + [r[mid, v]]
                    nxt[u, v] = _union(r.get((u, v)), _comp(*parts))
            r = nxt
        return r

    res = build(m.max_zerotest, s.p, s.q, s.bs, s.bt)
    if res is None:
        res = Leaf(Section(Pvass(m.dim, (s.p, s.q) if s.p != s.q else (s.p,), ()), s.p, s.q, s.bs, s.bt))
    return res


# -- expression to PVASS section --------------------------------------------


def regex_to_pvass(e: Expression) -> Section:
    """A normalized PVASS section with the same relation as ``e``.

    Every leaf is padded with leading unused counters to the largest leaf
    dimension ``d``. A fragment for a node with input dimension ``d'`` is
    entered with its first ``d - d'`` counters at zero; glue edges zero-test
    that prefix wherever fragments meet.
    """
    problems = validate_expression(e)
    if problems:
        raise TranslationError("invalid expression: " + "; ".join(problems))
    d = max(leaf.section.model.dim for leaf in leaves(e))
    zero = (0,) * d
    states: list[str] = []
    edges: list[Edge] = []

    def state(name: str) -> str:
        states.append(name)
        return name

    def edge(src: str, dst: str, update: Vector = zero, test: int = 0) -> None:
        edges.append(Edge(src, dst, update, test, len(edges)))

    def build(n: Expression, tag: int) -> tuple[str, str]:
        if isinstance(n, Leaf):
            return leaf(n.section, tag)
        sub = child_tags(n, tag)
        if isinstance(n, Comp):
            a_in, a_out = build(n.left, sub[0])
            b_in, b_out = build(n.right, sub[1])
            edge(a_out, b_in, test=d - n.left.out_dim)
            return a_in, b_out
        if isinstance(n, Union):
            entry, exit_ = state(f"E{tag}.in"), state(f"E{tag}.out")
            for c, t in zip(children(n), sub):
                c_in, c_out = build(c, t)
                edge(entry, c_in)
                edge(c_out, exit_)
            return entry, exit_
        hub = state(f"E{tag}.hub")
        c_in, c_out = build(n.inner, sub[0])
        edge(hub, c_in, test=d - n.in_dim)
        edge(c_out, hub, test=d - n.in_dim)
        return hub, hub

    def leaf(s: Section, tag: int) -> tuple[str, str]:
        m = s.model
        pad = d - m.dim
        names = {q: state(f"E{tag}.{q}") for q in m.states}
        for x in m.edges:
            edge(names[x.src], names[x.dst], (0,) * pad + x.update)
        entry, exit_ = names[s.p], names[s.q]
        if any(s.bs):
            entry = state(f"E{tag}.enter")
            edge(entry, names[s.p], (0,) * pad + s.bs + (0,) * s.in_dim)
        if any(s.bt):
            exit_ = state(f"E{tag}.leave")
            edge(names[s.q], exit_, (0,) * pad + tuple(-v for v in s.bt) + (0,) * s.out_dim)
        return entry, exit_

    entry, exit_ = build(e, 0)
    model = Pvass(d, tuple(states), tuple(edges))
    return Section(model, entry, exit_, (0,) * (d - e.in_dim), (0,) * (d - e.out_dim))


# -- monotonicity ------------------------------------------------------------


@dataclass(frozen=True)
class MonotoneReport:
    """Per-tag minimum free dimension over the subtree rooted at that tag."""

    min_dim: dict[int, int]
    star_on_monotone: bool
    offending_stars: tuple[int, ...]


def monotone_analysis(e: Expression) -> MonotoneReport:
    memo: dict[int, int] = {}

    def low(n: Expression) -> int:
        key = id(n)
        if key not in memo:
            memo[key] = min([n.in_dim, n.out_dim] + [low(c) for c in children(n)])
        return memo[key]

    per_tag, bad = {}, []
    for tag, n in preorder(e):
        per_tag[tag] = low(n)
        if isinstance(n, Star) and low(n) < n.in_dim:
            bad.append(tag)
    return MonotoneReport(per_tag, not bad, tuple(bad))


def normalize_star_monotone(e: Expression) -> Expression:
    """Rebuild ``e`` so every star sits over a relation that is monotone in all its coordinates."""
    if monotone_analysis(e).star_on_monotone:
        return e
    return pvass_to_regex(regex_to_pvass(e))


def monotone_violations(rel: Relation, in_dim: int, out_dim: int, j: int, caps_small: Vector, rel_big: Relation) -> list:
    """Pairs of ``rel`` whose shift in the ``j``-th last coordinate is missing from ``rel_big``.

    Shifts that leave ``caps_small`` are not checked. Passing the relation at
    a larger bound as ``rel_big`` keeps truncation from causing false alarms.
    """
    out = []
    for x, y in sorted(rel):
        xs = x[: in_dim - j] + (x[in_dim - j] + 1,) + x[in_dim - j + 1 :]
        ys = y[: out_dim - j] + (y[out_dim - j] + 1,) + y[out_dim - j + 1 :]
        if all(a <= c for a, c in zip(xs, caps_small[-in_dim:] if in_dim else ())) and all(
            b <= c for b, c in zip(ys, caps_small[-out_dim:] if out_dim else ())
        ):
            if (xs, ys) not in rel_big:
                out.append((x, y))
    return out


def relation_sum(r1: Relation, r2: Relation) -> Relation:
    return frozenset(
        (tuple(a + b for a, b in zip(x1, x2)), tuple(a + b for a, b in zip(y1, y2)))
        for (x1, y1), (x2, y2) in itertools.product(r1, r2)
    )
