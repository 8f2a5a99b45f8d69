import itertools

import pytest

from pvasskit.core import Configuration, Section, run_from_word
from pvasskit.models import crossing_runs_model, edgeless_pvas, transfer_model, transfer_round
from pvasskit.regex import Comp, Leaf, Star, Union, pvass_to_regex
from pvasskit.wqo import (
    TagMismatch,
    dickson_leq,
    enumerate_runs_bounded,
    format_expr_run,
    higman_leq,
    higman_leq_exhaustive,
    leaf_run,
    minimal_elements,
    replays,
    run_dir,
    run_leq,
    star_run,
    step_leq,
    validate_expr_run,
)


def crossing_pair():
    m = crossing_runs_model()
    s = Section(m, "q", "p")
    start = Configuration("q", (0, 1, 1))
    short = leaf_run(s, 0, run_from_word(m, start, [1]))
    long = leaf_run(s, 0, run_from_word(m, start, [0, 1, 2]))
    return Leaf(s), short, long


def test_dickson():
    assert dickson_leq((1, 2), (1, 3))
    assert not dickson_leq((2, 1), (1, 3))
    assert dickson_leq((), ())
    with pytest.raises(ValueError):
        dickson_leq((1,), (1, 2))


def test_higman_basics():
    eq = lambda a, b: a == b  # noqa: E731
    assert higman_leq([], [1, 2], eq)
    v = higman_leq([1, 2], [1, 2], eq)
    assert v and v.witness.indices == (0, 1)
    assert not higman_leq([2, 1], [1, 2], eq)


def test_higman_respects_counter_order_on_steps():
    short = [((0, 1, 1), 1)]
    long = [((0, 1, 1), 0), ((0, 2, 0), 1), ((1, 2, 0), 2)]
    assert not higman_leq(short, long, step_leq)


def test_greedy_witness_replays():
    words = [w for n in range(5) for w in itertools.product(range(3), repeat=n)]
    le = lambda a, b: a <= b  # noqa: E731
    for w in words:
        for w2 in words:
            v = higman_leq(w, w2, le)
            assert bool(v) == higman_leq_exhaustive(w, w2, le)
            if v:
                assert replays(w, w2, le, v.witness)


def test_crossing_runs_are_incomparable():
    e, short, long = crossing_pair()
    assert run_leq(e, short, short) and run_leq(e, long, long)
    assert not run_leq(e, short, long)
    assert not run_leq(e, long, short)
    assert set(minimal_elements([short, long], e)) == {short, long}


def test_star_run_with_shifted_copy():
    v0 = transfer_round()
    s = Section(v0, "q_s", "q_t")
    inner = Leaf(s)
    e = Star(inner)
    eta = leaf_run(s, 1, run_from_word(v0, Configuration("q_s", (0, 0, 0)), [0, 2, 4]))
    eta_up = leaf_run(s, 1, run_from_word(v0, Configuration("q_s", (0, 0, 1)), [0, 2, 4]))
    one = star_run(0, [eta])
    two = star_run(0, [eta, eta_up])
    assert validate_expr_run(e, two) == []
    assert run_leq(e, one, two)
    assert not run_leq(e, two, one)


def test_order_implies_dickson_on_ends():
    v0 = transfer_round()
    e = Leaf(Section(v0, "q_s", "q_t"))
    window = enumerate_runs_bounded(e, 2, 6)
    for a, b in itertools.product(window[:30], repeat=2):
        if run_leq(e, a, b):
            (sa, ta), (sb, tb) = run_dir(a), run_dir(b)
            assert dickson_leq(sa, sb) and dickson_leq(ta, tb)


def test_minimal_elements_of_chain():
    v0 = transfer_round()
    s = Section(v0, "q_s", "q_t")
    start = Configuration("q_s", (0, 0, 0))
    chain = [leaf_run(s, 0, run_from_word(v0, start, w)) for w in ([0, 2, 4], [0, 1, 2, 4], [0, 1, 1, 2, 4])]
    e = Leaf(s)
    assert minimal_elements(chain, e) == [chain[0]]
    assert minimal_elements(chain[:1], e) == chain[:1]


def test_minimal_elements_basis(rng):
    e = Star(Leaf(Section(transfer_round(), "q_s", "q_t")))
    window = enumerate_runs_bounded(e, 1, 6, 2)
    sample = rng.sample(window, min(40, len(window)))
    mins = minimal_elements(sample, e)
    for a, b in itertools.permutations(mins, 2):
        assert not run_leq(e, a, b)
    for r in sample:
        assert any(run_leq(e, m, r) for m in mins)


def test_edgeless_star_enumeration():
    e = Star(Leaf(Section(edgeless_pvas(1), "q", "q")))
    runs = enumerate_runs_bounded(e, 1, 0)
    texts = sorted(format_expr_run(r) for r in runs)
    assert len(runs) == 4
    assert sum(len(r.segments) == 0 for r in runs) == 2
    assert sum(len(r.segments) == 1 for r in runs) == 2
    assert texts[0].startswith("[E0|")


def test_zero_bound_runs_have_zero_ends():
    e = pvass_to_regex(Section(transfer_model(), "q_s", "q_s", (0,), (0,)))
    for r in enumerate_runs_bounded(e, 0, 0):
        assert run_dir(r) == ((0, 0), (0, 0))


def test_transfer_expression_witnesses_increment():
    e = pvass_to_regex(Section(transfer_model(), "q_s", "q_s", (0,), (0,)))
    runs = enumerate_runs_bounded(e, 1, 6)
    assert all(validate_expr_run(e, r) == [] for r in runs)
    assert any(r.source == (0, 0) and r.target == (0, 1) for r in runs)


def test_tag_mismatch():
    e, short, _ = crossing_pair()
    with pytest.raises(TagMismatch):
        run_leq(Comp(e, e), short, short)


def test_union_branches_are_incomparable():
    v0 = transfer_round()
    s = Section(v0, "q_s", "q_t")
    e = Union(Leaf(s), Leaf(s))
    runs = enumerate_runs_bounded(e, 1, 3)
    left = [r for r in runs if r.branch == 0]
    right = [r for r in runs if r.branch == 1]
    assert left and right
    assert not any(run_leq(e, a, b) for a in left for b in right)
