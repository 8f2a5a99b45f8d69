import itertools

import pytest

from pvasskit.core import Edge, Pvass, Section, caps_for, section_eval_bounded, vectors_upto
from pvasskit.models import edgeless_pvas, inc_dec_vas, random_expression, random_model, random_section, transfer_model
from pvasskit.regex import (
    Comp,
    Leaf,
    Star,
    TranslationError,
    Union,
    child_tags,
    eval_expression_bounded,
    join,
    leaves,
    monotone_analysis,
    normalize_star_monotone,
    preorder,
    pvass_to_regex,
    regex_to_pvass,
    relation_sum,
    unfolded_size,
    validate_expression,
)


def inc_dec_comp():
    v = inc_dec_vas()
    return Comp(Leaf(Section(v, "q", "q", (), (0,))), Leaf(Section(v, "q", "q", (1,), ())))


def through_one_dim():
    w = edgeless_pvas(2)
    return Star(Comp(Leaf(Section(w, "q", "q", (), (0,))), Leaf(Section(w, "q", "q", (0,), ()))))


def through_one_dim_repaired():
    w = edgeless_pvas(2)
    return Star(Comp(Leaf(Section(w, "q", "q", (0,), (0,))), Leaf(Section(w, "q", "q", (0,), (0,)))))


def diagonal(dim, bound):
    return frozenset((x, x) for x in vectors_upto(caps_for(bound, dim)))


def test_validate_expression():
    assert validate_expression(through_one_dim()) == []
    w = edgeless_pvas(2)
    two_to_two = Leaf(Section(w, "q", "q"))
    one_to_one = Leaf(Section(w, "q", "q", (0,), (0,)))
    assert len(validate_expression(Comp(two_to_two, one_to_one))) == 1
    assert len(validate_expression(Star(Leaf(Section(w, "q", "q", (), (0,)))))) == 1


def test_inc_dec_comp_is_full_square():
    e = inc_dec_comp()
    want = {((x,), (y,)) for x in range(3) for y in range(3)}
    assert eval_expression_bounded(e, 2) == want
    s = regex_to_pvass(e)
    assert section_eval_bounded(s, 2) == want
    assert sum(edge.zerotest == 1 for edge in s.model.edges) == 1


def test_identity_examples():
    for e in (through_one_dim(), through_one_dim_repaired()):
        assert eval_expression_bounded(e, 2) == diagonal(e.in_dim, 2)
        assert section_eval_bounded(regex_to_pvass(e), 2) == diagonal(e.in_dim, 2)


def test_union_idempotent(rng):
    for _ in range(10):
        e = random_expression(rng, 1, 1, 2)
        assert eval_expression_bounded(Union(e, e), 2) == eval_expression_bounded(e, 2)


def test_star_is_reflexive(rng):
    for _ in range(10):
        k = rng.randint(0, 2)
        e = Star(random_expression(rng, k, k, 2))
        assert diagonal(k, 2) <= eval_expression_bounded(e, 2)


def test_join():
    r1 = {((0,), (1,)), ((1,), (2,))}
    r2 = {((1,), (5,))}
    assert join(r1, r2) == {((0,), (5,))}


def test_monotone_analysis():
    assert not monotone_analysis(through_one_dim()).star_on_monotone
    assert monotone_analysis(through_one_dim_repaired()).star_on_monotone
    leaf = Leaf(Section(inc_dec_vas(), "q", "q"))
    assert monotone_analysis(leaf).star_on_monotone


def test_normalize_star_monotone():
    e = through_one_dim()
    n = normalize_star_monotone(e)
    assert monotone_analysis(n).star_on_monotone
    assert eval_expression_bounded(n, 2) == diagonal(2, 2)
    leaf = Leaf(Section(inc_dec_vas(), "q", "q"))
    assert eval_expression_bounded(normalize_star_monotone(leaf), 2) == eval_expression_bounded(leaf, 2)


def test_vass_section_translates_to_single_leaf():
    s = Section(inc_dec_vas(), "q", "q")
    e = pvass_to_regex(s)
    assert isinstance(e, Leaf) or all(not isinstance(n, Star) for _, n in preorder(e))
    assert eval_expression_bounded(e, 2) == section_eval_bounded(s, 2)


@pytest.mark.parametrize("bound", [1, 2])
def test_transfer_round_trip(bound):
    for bs, bt in [((0,), (0,)), ((0,), ()), ((), ())]:
        s = Section(transfer_model(), "q_s", "q_s", bs, bt)
        e = pvass_to_regex(s)
        want = section_eval_bounded(s, bound)
        assert eval_expression_bounded(e, bound) == want
        assert section_eval_bounded(regex_to_pvass(e), bound) == want


def test_unreachable_zero_test_branch():
    # the tested edge needs counter 1 at zero, but it never leaves 1
    m = Pvass(2, ("a",), (Edge("a", "a", (0, 1), 0, 0), Edge("a", "a", (0, 5), 1, 1)))
    s = Section(m, "a", "a", (1,), (1,))
    base = Section(m.restrict(0), "a", "a", (1,), (1,))
    assert eval_expression_bounded(pvass_to_regex(s), 2) == section_eval_bounded(base, 2)


def test_non_normalized_model_rejected():
    m = Pvass(1, ("a",), (Edge("a", "a", (-1,), 1, 0),))
    with pytest.raises(TranslationError):
        pvass_to_regex(Section(m, "a", "a"))


def test_random_round_trip(rng):
    for _ in range(25):
        s = random_section(rng, random_model(rng))
        e = pvass_to_regex(s)
        for b in (1, 2):
            want = section_eval_bounded(s, b)
            assert eval_expression_bounded(e, b) == want
            assert section_eval_bounded(regex_to_pvass(e), b) == want


def test_tags_are_preorder_positions():
    e = through_one_dim()
    tags = [t for t, _ in preorder(e)]
    assert tags == list(range(unfolded_size(e)))
    assert child_tags(e, 0) == (1,)
    assert child_tags(e.inner, 1) == (2, 3)
    shared = Leaf(Section(inc_dec_vas(), "q", "q"))
    twice = Comp(shared, shared)
    assert [t for t, _ in preorder(twice)] == [0, 1, 2]
    assert len(leaves(twice)) == 1


def test_distribution_of_sums_over_composition(rng):
    for _ in range(10):
        e1, e2 = random_expression(rng, 1, 1, 1), random_expression(rng, 1, 1, 1)
        f1, f2 = random_expression(rng, 1, 1, 1), random_expression(rng, 1, 1, 1)
        r = [eval_expression_bounded(x, 1) for x in (e1, e2, f1, f2)]
        left = relation_sum(join(r[0], r[2]), join(r[1], r[3]))
        right = join(relation_sum(r[0], r[1]), relation_sum(r[2], r[3]))
        assert left <= right


def test_dimension_mismatch_in_comp_is_rejected():
    w2, w1 = edgeless_pvas(2), edgeless_pvas(1)
    bad = Comp(Leaf(Section(w2, "q", "q")), Leaf(Section(w1, "q", "q")))
    assert validate_expression(bad)
    with pytest.raises(ValueError):
        eval_expression_bounded(bad, 1)


def test_star_pairs_compose(rng):
    for _ in range(5):
        e = Star(random_expression(rng, 1, 1, 2))
        rel = eval_expression_bounded(e, 2)
        for (x, y), (y2, z) in itertools.product(rel, repeat=2):
            if y == y2:
                assert (x, z) in rel
