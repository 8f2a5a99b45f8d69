"""Transformer relations of runs and configurations, and constructive pumping of comparable runs."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Sequence

from .core import (
    Configuration,
    Pvass,
    Run,
    Section,
    Vector,
    add,
    caps_for,
    format_vector,
    reach_within,
    run_from_word,
    scale,
    sub,
    vectors_upto,
)
from .regex import Comp, Expression, Leaf, Relation, Star, Union, child_tags, eval_expression_bounded, join
from .wqo import (
    CompRun,
    Embedding,
    ExprRun,
    LeafRun,
    OrderVerdict,
    StarRun,
    UnionRun,
    leaf_run,
    run_dir,
    run_leq,
    star_run,
    validate_expr_run,
)


class PumpError(RuntimeError):
    """A pumped or assembled run failed validation."""


class IncomparableRuns(ValueError):
    pass


@dataclass(frozen=True)
class PumpPair:
    base: ExprRun
    bigger: ExprRun
    delta: tuple[Vector, Vector]
    verdict: OrderVerdict


def make_pump_pair(e: Expression, base: ExprRun, bigger: ExprRun) -> PumpPair:
    verdict = run_leq(e, base, bigger)
    if not verdict:
        raise IncomparableRuns("the first run is not below the second")
    delta = (sub(bigger.source, base.source), sub(bigger.target, base.target))
    return PumpPair(base, bigger, delta, verdict)


def shift_run(r: ExprRun, u: Vector) -> ExprRun:
    """Add ``u`` to the trailing coordinates of every vector in ``r``."""
    if not any(u):
        return r
    k = len(u)

    def sh(v: Vector) -> Vector:
        return v[: len(v) - k] + add(v[len(v) - k :], u)

    if isinstance(r, LeafRun):
        configs = tuple(Configuration(c.state, sh(c.counters)) for c in r.run.configs)
        return LeafRun(r.tag, Run(configs, r.run.edges), sh(r.source), sh(r.target))
    if isinstance(r, CompRun):
        return CompRun(r.tag, shift_run(r.left, u), shift_run(r.right, u))
    if isinstance(r, UnionRun):
        return UnionRun(r.tag, r.branch, shift_run(r.child, u))
    return StarRun(r.tag, sh(r.source), tuple(shift_run(s, u) for s in r.segments), sh(r.target))


def _copies(block: Sequence[ExprRun], a: Vector, b: Vector, n: int) -> list[ExprRun]:
    """``n`` chained copies of ``block``, the ``j``-th raised by ``(n-1-j)a + jb``."""
    out = []
    for j in range(n):
        u = add(scale(n - 1 - j, a), scale(j, b))
        out += [shift_run(s, u) for s in block]
    return out


def _pump(e: Expression, tag: int, base: ExprRun, big: ExprRun, wit: Embedding, n: int) -> ExprRun:
    if isinstance(e, Leaf):
        return _pump_leaf(e.section, tag, base, big, wit.indices, n)
    subs = child_tags(e, tag)
    if isinstance(e, Comp):
        lw, rw = wit.children
        return CompRun(tag, _pump(e.left, subs[0], base.left, big.left, lw, n), _pump(e.right, subs[1], base.right, big.right, rw, n))
    if isinstance(e, Union):
        b = base.branch
        return UnionRun(tag, b, _pump((e.left, e.right)[b], subs[b], base.child, big.child, wit.children[0], n))
    return _pump_star(e, tag, base, big, wit, n)


def _pump_leaf(s: Section, tag: int, base: LeafRun, big: LeafRun, f: Sequence[int], n: int) -> LeafRun:
    word, bigword = base.run.edges, big.run.edges
    cuts = [-1, *f, len(bigword)]
    blocks = [bigword[lo + 1 : hi] for lo, hi in zip(cuts, cuts[1:])]
    pumped: list[int] = list(blocks[0]) * n
    for eid, block in zip(word, blocks[1:]):
        pumped += [eid, *(list(block) * n)]
    start = add(base.run.source.counters, scale(n, sub(big.run.source.counters, base.run.source.counters)))
    return leaf_run(s, tag, run_from_word(s.model, Configuration(s.p, start), pumped))


def _pump_star(e: Star, tag: int, base: StarRun, big: StarRun, wit: Embedding, n: int) -> StarRun:
    inner_tag = child_tags(e, tag)[0]
    f = wit.indices
    matched = [
        _pump(e.inner, inner_tag, seg, big.segments[j], w, n) for seg, j, w in zip(base.segments, f, wit.children)
    ]
    cuts = [-1, *f, len(big.segments)]
    blocks = [big.segments[lo + 1 : hi] for lo, hi in zip(cuts, cuts[1:])]
    # excess carried into and out of each unmatched block
    excess_in = [sub(big.source, base.source)]
    excess_out = []
    for seg, j in zip(base.segments, f):
        excess_out.append(sub(big.segments[j].source, seg.source))
        excess_in.append(sub(big.segments[j].target, seg.target))
    excess_out.append(sub(big.target, base.target))
    segments: list[ExprRun] = []
    for i, block in enumerate(blocks):
        segments += _copies(block, excess_in[i], excess_out[i], n)
        if i < len(matched):
            segments.append(matched[i])
    return star_run(tag, segments, add(base.source, scale(n, excess_in[0])))


def pump_run(e: Expression, pp: PumpPair, n: int) -> ExprRun:
    """A run with ends ``dir(base) + n * delta`` that dominates ``base``.

    Inserted material of the bigger run is repeated ``n`` times in place;
    inside stars, copies of inserted segments are raised so that they chain.
    """
    if n < 0:
        raise ValueError("n must be a natural number")
    out = _pump(e, 0, pp.base, pp.bigger, pp.verdict.witness, n)
    problems = validate_expr_run(e, out)
    if problems:
        raise PumpError("pumped run is invalid: " + "; ".join(problems))
    want = (add(pp.base.source, scale(n, pp.delta[0])), add(pp.base.target, scale(n, pp.delta[1])))
    if run_dir(out) != want:
        raise PumpError(f"pumped run has ends {run_dir(out)}, expected {want}")
    if not run_leq(e, pp.base, out):
        raise PumpError("pumped run does not dominate the base run")
    return out


# -- transformer relations -------------------------------------------------


@dataclass(frozen=True)
class TransformerSample:
    context: str
    pairs: frozenset[tuple[Vector, Vector]]
    bound: int | None

    def lines(self) -> list[str]:
        body = [f"{format_vector(x)} -> {format_vector(y)}" for x, y in sorted(self.pairs)]
        return [f"transformer {self.context} bound={self.bound} pairs={len(self.pairs)}", *body]


def _shifted_pairs(rel: Relation, c: Vector, bound: int) -> frozenset[tuple[Vector, Vector]]:
    out = set()
    for x in vectors_upto(tuple(bound - v for v in c)):
        for y in vectors_upto(tuple(bound - v for v in c)):
            if (add(c, x), add(c, y)) in rel:
                out.add((x, y))
    return frozenset(out)


def transformer_config_sample(e_star: Expression, c: Vector, bound: int, relation: Relation | None = None) -> TransformerSample:
    """Pairs ``(x, y)`` with ``c + x`` related to ``c + y``; ``c + x`` and ``c + y`` stay within the bound."""
    if not isinstance(e_star, Star):
        raise ValueError("expected a starred expression")
    if len(c) != e_star.in_dim or any(v > bound for v in c):
        raise ValueError("configuration has the wrong length or exceeds the bound")
    rel = eval_expression_bounded(e_star, bound) if relation is None else relation
    return TransformerSample(f"star@{tuple(c)}", _shifted_pairs(rel, tuple(c), bound), bound)


def transformer_run_sample(e: Expression, base: ExprRun, window: Iterable[ExprRun]) -> TransformerSample:
    pairs = frozenset(
        (sub(r.source, base.source), sub(r.target, base.target))
        for r in window
        if r.tag == base.tag and run_leq(e, base, r)
    )
    return TransformerSample("run", pairs, None)


def config_loop_relation(m: Pvass, c: Configuration, bound: int) -> frozenset[tuple[Vector, Vector]]:
    """Pairs ``(x, y)`` such that ``(q, c+x)`` reaches ``(q, c+y)`` within the bound."""
    caps = caps_for(bound, m.dim)
    out = set()
    for x in vectors_upto(tuple(b - v for b, v in zip(caps, c.counters))):
        for state, y in reach_within(m, c.state, add(c.counters, x), caps):
            if state == c.state:
                out.add((x, sub(y, c.counters)))
    return frozenset(out)


@dataclass(frozen=True)
class ConfigLoopFactor:
    model: Pvass
    config: Configuration


@dataclass(frozen=True)
class LeafFactor:
    """Loops at the configurations of a leaf run, restricted to the section's free coordinates."""

    tag: int
    section: Section
    loops: tuple[ConfigLoopFactor, ...]


@dataclass(frozen=True)
class StarConfigFactor:
    tag: int
    expression: Star
    config: Vector


@dataclass(frozen=True)
class Decomposition:
    tag: int
    factors: tuple[LeafFactor | StarConfigFactor | Decomposition, ...]


def decompose_transformer(e: Expression, r: ExprRun, tag: int = 0) -> Decomposition:
    """Factor the transformer relation of ``r`` into a composition of configuration relations."""
    if isinstance(e, Leaf):
        loops = tuple(ConfigLoopFactor(e.section.model, c) for c in r.run.configs)
        return Decomposition(tag, (LeafFactor(tag, e.section, loops),))
    subs = child_tags(e, tag)
    if isinstance(e, Comp):
        return Decomposition(tag, (decompose_transformer(e.left, r.left, subs[0]), decompose_transformer(e.right, r.right, subs[1])))
    if isinstance(e, Union):
        return Decomposition(tag, (decompose_transformer((e.left, e.right)[r.branch], r.child, subs[r.branch]),))
    factors: list = [StarConfigFactor(tag, e, r.source)]
    for seg in r.segments:
        factors += [decompose_transformer(e.inner, seg, subs[0]), StarConfigFactor(tag, e, seg.target)]
    return Decomposition(tag, tuple(factors))


def factor_count(d: Decomposition) -> int:
    return sum(factor_count(f) if isinstance(f, Decomposition) else 1 for f in d.factors)


def sample_decomposition(d: Decomposition, bound: int) -> frozenset[tuple[Vector, Vector]]:
    """Compose the bounded samples of all factors."""
    cache: dict[int, Relation] = {}

    def star_rel(e: Star) -> Relation:
        if id(e) not in cache:
            cache[id(e)] = eval_expression_bounded(e, bound)
        return cache[id(e)]

    def ev(f) -> frozenset:
        if isinstance(f, StarConfigFactor):
            return transformer_config_sample(f.expression, f.config, bound, star_rel(f.expression)).pairs
        if isinstance(f, LeafFactor):
            rel = config_loop_relation(f.loops[0].model, f.loops[0].config, bound)
            for loop in f.loops[1:]:
                rel = join(rel, config_loop_relation(loop.model, loop.config, bound))
            nbs, nbt = len(f.section.bs), len(f.section.bt)
            return frozenset((x[nbs:], y[nbt:]) for x, y in rel if not any(x[:nbs]) and not any(y[:nbt]))
        rel = ev(f.factors[0])
        for g in f.factors[1:]:
            rel = join(rel, ev(g))
        return rel

    return ev(d)


class JunctionError(ValueError):
    pass


def compose_witness(
    e_star: Star,
    base: StarRun,
    w: Sequence[Vector],
    v: Sequence[Vector],
    boundary_runs: Sequence[StarRun],
    transitions: Sequence[ExprRun],
) -> StarRun:
    """Assemble ``rho_0 eta'_1 rho_1 ... eta'_r rho_r`` from per-junction witnesses.

    With junction configurations ``c_0 = src(eta_1)`` and ``c_i = tgt(eta_i)``,
    ``boundary_runs[i]`` must go from ``c_i + v[i]`` to ``c_i + w[i]`` and
    ``transitions[i-1]`` from ``src(eta_i) + w[i-1]`` to ``tgt(eta_i) + v[i]``.
    """
    r = len(base.segments)
    if not (len(w) == len(v) == len(boundary_runs) == r + 1 and len(transitions) == r):
        raise JunctionError(f"a run with {r} segments needs {r + 1} boundary runs and {r} transitions")
    junctions = [base.source] + [s.target for s in base.segments]
    inner_tag = child_tags(e_star, base.tag)[0]
    segments: list[ExprRun] = []
    for i in range(r + 1):
        rho = boundary_runs[i]
        c = junctions[i]
        if (rho.source, rho.target) != (add(c, v[i]), add(c, w[i])):
            raise JunctionError(f"junction {i}: boundary run goes {rho.source}->{rho.target}, expected {add(c, v[i])}->{add(c, w[i])}")
        segments += rho.segments
        if i < r:
            eta, new = base.segments[i], transitions[i]
            want = (add(eta.source, w[i]), add(eta.target, v[i + 1]))
            if run_dir(new) != want:
                raise JunctionError(f"junction {i}: transition {i + 1} goes {run_dir(new)}, expected {want}")
            if new.tag != inner_tag or not run_leq(e_star.inner, eta, new, inner_tag):
                raise JunctionError(f"junction {i}: transition {i + 1} does not dominate segment {i + 1}")
            segments.append(new)
    out = star_run(base.tag, segments, add(base.source, v[0]))
    problems = validate_expr_run(e_star, out, base.tag)
    if problems:
        raise PumpError("assembled run is invalid: " + "; ".join(problems))
    return out


def retag(r: ExprRun, delta: int) -> ExprRun:
    """Shift every tag in ``r`` by ``delta``; used to move runs between expression positions."""
    if isinstance(r, LeafRun):
        return replace(r, tag=r.tag + delta)
    if isinstance(r, CompRun):
        return CompRun(r.tag + delta, retag(r.left, delta), retag(r.right, delta))
    if isinstance(r, UnionRun):
        return UnionRun(r.tag + delta, r.branch, retag(r.child, delta))
    return StarRun(r.tag + delta, r.source, tuple(retag(s, delta) for s in r.segments), r.target)
