"""Named sample models and small random generators used by tests and the CLI."""

from __future__ import annotations

import random

from .core import Edge, Pvass, Section, Vector
from .semilinear import LinearSet, SemilinearSet


def _build(dim: int, states: list[str], edges: list[tuple[str, str, tuple[int, ...], int]]) -> Pvass:
    return Pvass(dim, tuple(states), tuple(Edge(s, t, f, g, i) for i, (s, t, f, g) in enumerate(edges)))


def transfer_model() -> Pvass:
    """Counters (x, y, z). Each round moves part of x into y, bumps z, and may restart only once x is empty."""
    return _build(
        3,
        ["q_s", "q_1", "q_2", "q_t"],
        [
            ("q_s", "q_1", (0, 0, 0), 0),
            ("q_1", "q_1", (1, 0, 0), 0),
            ("q_1", "q_2", (0, 0, 0), 0),
            ("q_2", "q_2", (-1, 1, 0), 0),
            ("q_2", "q_t", (0, 0, 1), 0),
            ("q_t", "q_s", (0, 0, 0), 1),
        ],
    )


TRANSFER_RESTART_EDGE = 5


def flattened_transfer_model() -> Pvass:
    """Loop-free restarts followed by one final transfer round in a primed copy."""
    return _build(
        3,
        ["q_s", "q_1", "q_2", "q_t", "q_s'", "q_1'", "q_2'", "q_t'"],
        [
            ("q_s", "q_1", (0, 0, 0), 0),
            ("q_1", "q_2", (0, 0, 0), 0),
            ("q_2", "q_t", (0, 0, 1), 0),
            ("q_t", "q_s", (0, 0, 0), 1),
            ("q_t", "q_s'", (0, 0, 0), 1),
            ("q_s'", "q_1'", (0, 0, 0), 0),
            ("q_1'", "q_1'", (1, 0, 0), 0),
            ("q_1'", "q_2'", (0, 0, 0), 0),
            ("q_2'", "q_2'", (-1, 1, 0), 0),
            ("q_2'", "q_t'", (0, 0, 1), 0),
        ],
    )


def transfer_flat_words() -> list[tuple[int, ...]]:
    """Edge words over ``transfer_model`` mirroring the loop structure of the flattened model."""
    return [(0, 2, 4, 5), (0,), (1,), (2,), (3,), (4,)]


def transfer_round() -> Pvass:
    """``transfer_model`` without its zero-tested restart edge."""
    return transfer_model().restrict(0)


def crossing_runs_model() -> Pvass:
    """Two states; runs that take the loops in different places are incomparable."""
    return _build(
        3,
        ["q", "p"],
        [
            ("q", "q", (0, 1, -1), 0),
            ("q", "p", (1, 0, 0), 0),
            ("p", "p", (0, -1, 2), 0),
        ],
    )


def inc_dec_vas() -> Pvass:
    """One counter, one state, increment and decrement."""
    return _build(1, ["q"], [("q", "q", (1,), 0), ("q", "q", (-1,), 0)])


def edgeless_pvas(dim: int = 2) -> Pvass:
    return Pvass(dim, ("q",), ())


def random_model(
    rng: random.Random,
    *,
    dim: int | None = None,
    n_states: int | None = None,
    n_edges: int | None = None,
    max_zerotest: int = 2,
    normalized: bool = True,
    span: int = 1,
) -> Pvass:
    """A small random PVASS; with ``normalized`` no edge updates a counter it tests."""
    dim = rng.randint(1, 4) if dim is None else dim
    n_states = rng.randint(1, 3) if n_states is None else n_states
    n_edges = rng.randint(1, 6) if n_edges is None else n_edges
    states = [f"s{i}" for i in range(n_states)]
    edges = []
    for _ in range(n_edges):
        g = rng.randint(0, min(max_zerotest, dim)) if rng.random() < 0.4 else 0
        f = [rng.randint(-span, span) for _ in range(dim)]
        if normalized:
            f[:g] = [0] * g
        edges.append((rng.choice(states), rng.choice(states), tuple(f), g))
    return _build(dim, states, edges)


def random_section(rng: random.Random, model: Pvass, *, bound: int = 1, min_fixed: int = 0) -> Section:
    d = model.dim
    ns = rng.randint(min(min_fixed, d), d)
    nt = rng.randint(min(min_fixed, d), d)
    bs = tuple(rng.randint(0, bound) if rng.random() < 0.3 else 0 for _ in range(ns))
    bt = tuple(rng.randint(0, bound) if rng.random() < 0.3 else 0 for _ in range(nt))
    return Section(model, rng.choice(model.states), rng.choice(model.states), bs, bt)


def random_expression(rng: random.Random, in_dim: int, out_dim: int, depth: int = 2):
    """A random well-dimensioned expression over small VASS leaves."""
    from .regex import Comp, Leaf, Star, Union

    choice = rng.random() if depth > 0 else 0.0
    if choice < 0.3:
        d = max(in_dim, out_dim, 1) + rng.randint(0, 1)
        m = random_model(rng, dim=d, n_states=rng.randint(1, 2), n_edges=rng.randint(0, 3), max_zerotest=0)
        bs = tuple(rng.choice((0, 0, 1)) for _ in range(d - in_dim))
        bt = tuple(rng.choice((0, 0, 1)) for _ in range(d - out_dim))
        return Leaf(Section(m, rng.choice(m.states), rng.choice(m.states), bs, bt))
    if choice < 0.55:
        mid = rng.randint(0, 2)
        return Comp(random_expression(rng, in_dim, mid, depth - 1), random_expression(rng, mid, out_dim, depth - 1))
    if choice < 0.75 or in_dim != out_dim:
        return Union(random_expression(rng, in_dim, out_dim, depth - 1), random_expression(rng, in_dim, out_dim, depth - 1))
    return Star(random_expression(rng, in_dim, in_dim, depth - 1))


def transfer_separator() -> SemilinearSet:
    """An invariant of the transfer model from ``(q_s, 0)`` that excludes ``(q_s, (0,1,0))``."""
    n_states, dim = 4, 3
    qs, q1, q2 = 0, 1, 2
    x, y, z = (n_states + i for i in range(dim))

    def unit(*idx: int) -> Vector:
        v = [0] * (n_states + dim)
        for i in idx:
            v[i] += 1
        return tuple(v)

    comps = [
        LinearSet(unit(qs)),
        LinearSet(unit(q1), (unit(x),)),
        LinearSet(unit(q2), (unit(x), unit(y))),
    ]
    comps += [LinearSet(unit(q, z), (unit(x), unit(y), unit(z))) for q in range(n_states)]
    return SemilinearSet(n_states + dim, tuple(comps))
