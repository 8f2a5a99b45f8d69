"""Orderings on runs: Dickson, Higman, and the structural ordering on tagged expression runs."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Callable, Iterable, Sequence

from .core import Bound, Configuration, Run, Section, Vector, add, caps_for, format_vector, validate_run, vectors_upto
from .regex import Comp, Expression, Leaf, Star, Union, child_tags, kind


class TagMismatch(ValueError):
    """A run does not belong to the expression position it is compared at."""


@dataclass(frozen=True)
class LeafRun:
    tag: int
    run: Run
    source: Vector
    target: Vector


@dataclass(frozen=True)
class CompRun:
    tag: int
    left: ExprRun
    right: ExprRun

    @property
    def source(self) -> Vector:
        return self.left.source

    @property
    def target(self) -> Vector:
        return self.right.target


@dataclass(frozen=True)
class UnionRun:
    tag: int
    branch: int
    child: ExprRun

    @property
    def source(self) -> Vector:
        return self.child.source

    @property
    def target(self) -> Vector:
        return self.child.target


@dataclass(frozen=True)
class StarRun:
    tag: int
    source: Vector
    segments: tuple[ExprRun, ...]
    target: Vector


ExprRun = LeafRun | CompRun | UnionRun | StarRun


def run_dir(r: ExprRun) -> tuple[Vector, Vector]:
    return (r.source, r.target)


def step_count(r: ExprRun) -> int:
    if isinstance(r, LeafRun):
        return len(r.run.edges)
    if isinstance(r, CompRun):
        return step_count(r.left) + step_count(r.right)
    if isinstance(r, UnionRun):
        return step_count(r.child)
    return sum(step_count(s) for s in r.segments)


def leaf_run(section: Section, tag: int, run: Run) -> LeafRun:
    return LeafRun(tag, run, run.source.counters[len(section.bs) :], run.target.counters[len(section.bt) :])


def star_run(tag: int, segments: Sequence[ExprRun], source: Vector | None = None) -> StarRun:
    segs = tuple(segments)
    if not segs:
        if source is None:
            raise ValueError("an empty star run needs an explicit source")
        return StarRun(tag, source, (), source)
    return StarRun(tag, segs[0].source, segs, segs[-1].target)


def format_expr_run(r: ExprRun) -> str:
    t = f"E{r.tag}"
    if isinstance(r, LeafRun):
        parts = [str(r.run.configs[0])]
        for eid, c in zip(r.run.edges, r.run.configs[1:]):
            parts += [f"e{eid}", str(c)]
        body = " ".join(parts)
        return f"[{t}| {body} |{t}]"
    if isinstance(r, CompRun):
        return f"[{t}| {format_expr_run(r.left)} {format_expr_run(r.right)} |{t}]"
    if isinstance(r, UnionRun):
        return f"[{t}|{'LR'[r.branch]} {format_expr_run(r.child)} |{t}]"
    parts = [format_vector(r.source)] + [format_expr_run(s) for s in r.segments] + [format_vector(r.target)]
    return f"[{t}| {' '.join(parts)} |{t}]"


def validate_expr_run(e: Expression, r: ExprRun, tag: int = 0) -> list[str]:
    """Problems that keep ``r`` from being a run of ``e`` at position ``tag``."""
    where = f"E{tag}"
    if r.tag != tag:
        return [f"{where}: run carries tag E{r.tag}"]
    if isinstance(e, Leaf):
        if not isinstance(r, LeafRun):
            return [f"{where}: expected a leaf run"]
        s = e.section
        probs = [f"{where}: {p}" for p in validate_run(s.model, r.run)]
        src, tgt = r.run.source, r.run.target
        if src.state != s.p or src.counters[: len(s.bs)] != s.bs:
            probs.append(f"{where}: run does not start in ({s.p}, {format_vector(s.bs)}, ...)")
        if tgt.state != s.q or tgt.counters[: len(s.bt)] != s.bt:
            probs.append(f"{where}: run does not end in ({s.q}, {format_vector(s.bt)}, ...)")
        if (r.source, r.target) != (src.counters[len(s.bs) :], tgt.counters[len(s.bt) :]):
            probs.append(f"{where}: recorded ends differ from the run's free coordinates")
        return probs
    sub = child_tags(e, tag)
    if isinstance(e, Comp):
        if not isinstance(r, CompRun):
            return [f"{where}: expected a composition run"]
        probs = validate_expr_run(e.left, r.left, sub[0]) + validate_expr_run(e.right, r.right, sub[1])
        if r.left.target != r.right.source:
            probs.append(f"{where}: halves do not meet ({format_vector(r.left.target)} vs {format_vector(r.right.source)})")
        return probs
    if isinstance(e, Union):
        if not isinstance(r, UnionRun) or r.branch not in (0, 1):
            return [f"{where}: expected a union run"]
        return validate_expr_run((e.left, e.right)[r.branch], r.child, sub[r.branch])
    if not isinstance(r, StarRun):
        return [f"{where}: expected a star run"]
    probs = []
    for s in r.segments:
        probs += validate_expr_run(e.inner, s, sub[0])
    ends = [r.source] + [v for s in r.segments for v in (s.source, s.target)] + [r.target]
    for i in range(0, len(ends), 2):
        if ends[i] != ends[i + 1]:
            probs.append(f"{where}: junction {i // 2} does not chain")
    if len(r.source) != e.in_dim:
        probs.append(f"{where}: end vectors must have length {e.in_dim}")
    return probs


# -- orderings ---------------------------------------------------------------


@dataclass(frozen=True)
class Embedding:
    """Matched positions, plus nested witnesses for the matched elements."""

    indices: tuple[int, ...] = ()
    children: tuple[Any, ...] = ()


@dataclass(frozen=True)
class OrderVerdict:
    leq: bool
    witness: Embedding | None = None

    def __bool__(self) -> bool:
        return self.leq


NO = OrderVerdict(False)


def dickson_leq(x: Sequence[int], y: Sequence[int]) -> bool:
    if len(x) != len(y):
        raise ValueError(f"vectors of lengths {len(x)} and {len(y)} are not comparable")
    return all(a <= b for a, b in zip(x, y))


def higman_leq(w: Sequence, w2: Sequence, elem_leq: Callable[[Any, Any], Any]) -> OrderVerdict:
    """Subword embedding found by matching each element at the leftmost possible position."""
    indices, nested = [], []
    j = 0
    for a in w:
        while j < len(w2):
            v = elem_leq(a, w2[j])
            j += 1
            if v:
                indices.append(j - 1)
                nested.append(v.witness if isinstance(v, OrderVerdict) else None)
                break
        else:
            return NO
    return OrderVerdict(True, Embedding(tuple(indices), tuple(nested)))


def higman_leq_exhaustive(w: Sequence, w2: Sequence, elem_leq: Callable[[Any, Any], Any]) -> bool:
    n, m = len(w), len(w2)

    @lru_cache(maxsize=None)
    def fits(i: int, j: int) -> bool:
        if i == n:
            return True
        if m - j < n - i:
            return False
        return (bool(elem_leq(w[i], w2[j])) and fits(i + 1, j + 1)) or fits(i, j + 1)

    return fits(0, 0)


def replays(w: Sequence, w2: Sequence, elem_leq: Callable[[Any, Any], Any], emb: Embedding) -> bool:
    idx = emb.indices
    return (
        len(idx) == len(w)
        and all(0 <= i < len(w2) for i in idx)
        and all(a < b for a, b in zip(idx, idx[1:]))
        and all(elem_leq(a, w2[i]) for a, i in zip(w, idx))
    )


def leaf_word(r: LeafRun) -> list[tuple[Vector, int]]:
    """The step word: each edge paired with the counters it fires from."""
    return [(c.counters, e) for c, e in zip(r.run.configs, r.run.edges)]


def step_leq(a: tuple[Vector, int], b: tuple[Vector, int]) -> bool:
    return a[1] == b[1] and dickson_leq(a[0], b[0])


def run_leq(e: Expression, r1: ExprRun, r2: ExprRun, tag: int = 0) -> OrderVerdict:
    if r1.tag != tag or r2.tag != tag:
        raise TagMismatch(f"runs tagged E{r1.tag} and E{r2.tag} compared at E{tag}")
    expected = {Leaf: LeafRun, Comp: CompRun, Union: UnionRun, Star: StarRun}[type(e)]
    if not (isinstance(r1, expected) and isinstance(r2, expected)):
        raise TagMismatch(f"E{tag} is a {kind(e)} node")
    if not (dickson_leq(r1.source, r2.source) and dickson_leq(r1.target, r2.target)):
        return NO
    if isinstance(e, Leaf):
        return higman_leq(leaf_word(r1), leaf_word(r2), step_leq)
    sub = child_tags(e, tag)
    if isinstance(e, Comp):
        left = run_leq(e.left, r1.left, r2.left, sub[0])
        right = left and run_leq(e.right, r1.right, r2.right, sub[1])
        return OrderVerdict(True, Embedding((), (left.witness, right.witness))) if right else NO
    if isinstance(e, Union):
        if r1.branch != r2.branch:
            return NO
        child = run_leq((e.left, e.right)[r1.branch], r1.child, r2.child, sub[r1.branch])
        return OrderVerdict(True, Embedding((r1.branch,), (child.witness,))) if child else NO
    return higman_leq(r1.segments, r2.segments, lambda a, b: run_leq(e.inner, a, b, sub[0]))


def minimal_elements(rs: Iterable[ExprRun], e: Expression) -> list[ExprRun]:
    """The runs of ``rs`` with no strictly smaller run in ``rs``."""
    pool = sorted(set(rs), key=_order_key)
    keep = []
    for r in pool:
        if not any(o is not r and run_leq(e, o, r) and not run_leq(e, r, o) for o in pool):
            keep.append(r)
    return keep


def _order_key(r: ExprRun) -> tuple[int, str]:
    return (step_count(r), format_expr_run(r))


# -- bounded enumeration ----------------------------------------------------


def _leaf_runs(s: Section, tag: int, caps: Vector, max_steps: int) -> list[LeafRun]:
    m = s.model
    out = []
    nbt = len(s.bt)
    for x in vectors_upto(caps[len(s.bs) :]):
        start = s.bs + x
        if any(v > c for v, c in zip(start, caps)):
            continue
        stack = [(Configuration(s.p, start),)]
        words: list[tuple[int, ...]] = [()]
        while stack:
            configs = stack.pop()
            word = words.pop()
            last = configs[-1]
            if last.state == s.q and last.counters[:nbt] == s.bt:
                out.append(leaf_run(s, tag, Run(configs, word)))
            if len(word) == max_steps:
                continue
            for e in m.out_edges.get(last.state, ()):
                if any(last.counters[: e.zerotest]):
                    continue
                y = add(last.counters, e.update)
                if all(0 <= v <= c for v, c in zip(y, caps)):
                    stack.append(configs + (Configuration(e.dst, y),))
                    words.append(word + (e.id,))
    return out


def enumerate_runs_bounded(e: Expression, bound: Bound, max_steps: int, max_segments: int | None = None) -> list[ExprRun]:
    """Every run of ``e`` with all counters within the bound and at most ``max_steps`` leaf steps.

    Star runs are additionally limited to ``max_segments`` segments, by
    default ``max_steps + 1``, since segments without steps could repeat forever.
    """
    seg_cap = max_steps + 1 if max_segments is None else max_segments
    memo: dict[tuple[int, int], list[ExprRun]] = {}

    def runs(n: Expression, tag: int) -> list[ExprRun]:
        key = (id(n), tag)
        if key in memo:
            return memo[key]
        if isinstance(n, Leaf):
            res: list[ExprRun] = list(_leaf_runs(n.section, tag, caps_for(bound, n.section.model.dim), max_steps))
        else:
            sub = child_tags(n, tag)
            if isinstance(n, Comp):
                rights = _by_source(runs(n.right, sub[1]))
                res = [
                    CompRun(tag, a, b)
                    for a in runs(n.left, sub[0])
                    for b in rights.get(a.target, ())
                    if step_count(a) + step_count(b) <= max_steps
                ]
            elif isinstance(n, Union):
                res = [UnionRun(tag, i, r) for i, c in enumerate((n.left, n.right)) for r in runs(c, sub[i])]
            else:
                res = _star_runs(n, tag, runs(n.inner, sub[0]))
        memo[key] = res
        return res

    def _star_runs(n: Star, tag: int, inner: list[ExprRun]) -> list[ExprRun]:
        by_src = _by_source(inner)
        res: list[ExprRun] = [StarRun(tag, x, (), x) for x in vectors_upto(caps_for(bound, n.in_dim))]
        frontier = [((r,), step_count(r)) for r in inner]
        depth = 1
        while frontier and depth <= seg_cap:
            nxt = []
            for segs, steps in frontier:
                res.append(star_run(tag, segs))
                if depth == seg_cap:
                    continue
                for r in by_src.get(segs[-1].target, ()):
                    total = steps + step_count(r)
                    if total <= max_steps:
                        nxt.append((segs + (r,), total))
            frontier = nxt
            depth += 1
        return res

    return sorted(runs(e, 0), key=_order_key)


def _by_source(rs: Iterable[ExprRun]) -> dict[Vector, list[ExprRun]]:
    out: dict[Vector, list[ExprRun]] = {}
    for r in rs:
        out.setdefault(r.source, []).append(r)
    return out

