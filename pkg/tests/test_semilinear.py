import itertools

import pytest

from pvasskit.core import Configuration, ModelError, Section, reach_set_bounded, section_eval_bounded, vectors_upto
from pvasskit.models import random_model, random_section, transfer_flat_words, transfer_model, transfer_round, transfer_separator
from pvasskit.semilinear import (
    FlatWitness,
    LinearPathScheme,
    LinearSet,
    SemilinearSet,
    encode_configuration,
    inductive_invariant_check,
    intersect_section_semilinear,
    linear_points_upto,
    lps_membership_bounded,
    lps_relation_bounded,
    mtc_bounded,
    section_config_pairs,
    semilinear_membership,
    separator_check,
    split_pairs,
    word_flat_check,
)


def everything(n):
    units = tuple(tuple(int(i == j) for j in range(n)) for i in range(n))
    return SemilinearSet(n, (LinearSet((0,) * n, units),))


def test_membership_examples():
    s = SemilinearSet(2, (LinearSet((1, 1), ((2, 0), (0, 3))),))
    found = semilinear_membership(s, (5, 4))
    assert found.member and found.coefficients == (2, 1)
    assert not semilinear_membership(s, (2, 1)).member
    base = semilinear_membership(s, (1, 1))
    assert base.member and base.coefficients == (0, 0)


def test_zero_periods_are_dropped():
    assert LinearSet((1,), ((0,), (2,))).periods == ((2,),)


def test_membership_matches_generation(rng):
    for _ in range(30):
        n = rng.randint(1, 3)
        ls = LinearSet(
            tuple(rng.randint(0, 2) for _ in range(n)),
            tuple(tuple(rng.randint(0, 2) for _ in range(n)) for _ in range(rng.randint(0, 3))),
        )
        points = linear_points_upto(ls, 4)
        s = SemilinearSet(n, (ls,))
        for x in vectors_upto((4,) * n):
            assert (x in s) == (x in points)


def test_lps_examples():
    assert lps_relation_bounded(LinearPathScheme(2, ()), 2) == {(x, x) for x in vectors_upto((2, 2))}
    assert lps_membership_bounded(LinearPathScheme(2, (((0, 0), (0, 1)),)), ((0, 0), (0, 3)), 3)
    assert not lps_membership_bounded(LinearPathScheme(2, (((1, 0), (0, 0)),)), ((0, 0), (1, 0)), 3)


def test_mtc_contains_pair_and_is_shift_closed(rng):
    for _ in range(10):
        pair = (tuple(rng.randint(0, 1) for _ in range(2)), tuple(rng.randint(0, 1) for _ in range(2)))
        rel = mtc_bounded(pair, 3)
        assert pair in rel
        for x, y in rel:
            for i in range(2):
                xs = tuple(v + (j == i) for j, v in enumerate(x))
                ys = tuple(v + (j == i) for j, v in enumerate(y))
                if max(xs + ys) <= 3:
                    assert (xs, ys) in rel


def test_flat_check_trivial_cases():
    m = transfer_model()
    assert word_flat_check(m, FlatWitness(()), [], 2).included
    a, b = Configuration("q_s", (0, 0, 0)), Configuration("q_1", (0, 0, 0))
    verdict = word_flat_check(m, FlatWitness(()), [(a, b)], 2)
    assert not verdict.included and verdict.missing == (a, b)
    with pytest.raises(ModelError):
        word_flat_check(m, FlatWitness(((9,),)), [(a, b)], 2)


def test_flat_check_transfer_at_bound_one():
    left = Section(transfer_model(), "q_s", "q_t", (0,), ())
    fw = FlatWitness(tuple(transfer_flat_words()))
    assert word_flat_check(transfer_model(), fw, section_config_pairs(left, 1), 1).included


def test_flat_check_monotone_in_bound():
    left = Section(transfer_model(), "q_s", "q_t", (0,), ())
    fw = FlatWitness(tuple(transfer_flat_words()))
    small = section_config_pairs(left, 1)
    assert word_flat_check(transfer_model(), fw, small, 1).included
    assert word_flat_check(transfer_model(), fw, small, 2).included


def test_intersection_neutral_and_empty():
    s = Section(transfer_round(), "q_s", "q_t", (0,), (0,))
    n = s.in_dim + s.out_dim
    full = split_pairs(section_eval_bounded(intersect_section_semilinear(s, everything(n)), 2), s.in_dim)
    assert full == section_eval_bounded(s, 2)
    none = intersect_section_semilinear(s, SemilinearSet(n, ()))
    assert section_eval_bounded(none, 2) == frozenset()


def test_intersection_with_positive_output():
    s = Section(transfer_round(), "q_s", "q_t", (0,), (0,))
    units = tuple(tuple(int(i == j) for j in range(4)) for i in range(4))
    out_z = SemilinearSet(4, (LinearSet((0, 0, 0, 1), units),))
    x = intersect_section_semilinear(s, out_z)
    assert x.model.dim == 18
    want = frozenset(p for p in section_eval_bounded(s, 2) if p[1][1] >= 1)
    assert split_pairs(section_eval_bounded(x, 2), s.in_dim) == want


def test_intersection_random(rng):
    for _ in range(8):
        m = random_model(rng, dim=rng.randint(1, 2))
        s = random_section(rng, m)
        n = s.in_dim + s.out_dim
        sl = SemilinearSet(n, (LinearSet(tuple(rng.randint(0, 1) for _ in range(n)), tuple(tuple(rng.randint(0, 1) for _ in range(n)) for _ in range(2))),))
        for b in (1, 2):
            want = frozenset(p for p in section_eval_bounded(s, b) if p[0] + p[1] in sl)
            assert split_pairs(section_eval_bounded(intersect_section_semilinear(s, sl), b), s.in_dim) == want


def test_intersection_dimension_mismatch():
    s = Section(transfer_round(), "q_s", "q_t")
    with pytest.raises(ValueError):
        intersect_section_semilinear(s, everything(2))


def test_invariant_checks():
    m = transfer_model()
    assert inductive_invariant_check(m, everything(7), 2).ok
    assert inductive_invariant_check(m, transfer_separator(), 3).ok
    only_start = SemilinearSet(7, (LinearSet(encode_configuration(m, Configuration("q_s", (0, 0, 0)))),))
    v = inductive_invariant_check(m, only_start, 2)
    assert not v.ok and v.counterexample == (Configuration("q_s", (0, 0, 0)), 0)


def test_separator_clauses():
    m = transfer_model()
    src, tgt = Configuration("q_s", (0, 0, 0)), Configuration("q_s", (0, 1, 0))
    assert separator_check(m, everything(7), src, tgt, 2).failed_clause == "target"
    assert separator_check(m, SemilinearSet(7, ()), src, tgt, 2).failed_clause == "source"
    verdict = separator_check(m, transfer_separator(), src, tgt, 3)
    assert verdict.ok and verdict.failed_clause is None
    assert tgt not in reach_set_bounded(m, src, 4)


def test_separator_soundness_on_random_models(rng):
    for _ in range(10):
        m = random_model(rng, dim=rng.randint(1, 2))
        src = Configuration(rng.choice(m.states), (0,) * m.dim)
        reach = reach_set_bounded(m, src, 2)
        n = len(m.states) + m.dim
        for tgt in itertools.islice(sorted(reach, key=str), 3):
            candidate = SemilinearSet(n, tuple(LinearSet(encode_configuration(m, c)) for c in reach if c != tgt))
            assert not separator_check(m, candidate, src, tgt, 2).ok


def test_encode_configuration():
    m = transfer_model()
    assert encode_configuration(m, Configuration("q_2", (1, 2, 3))) == (0, 0, 1, 0, 1, 2, 3)
