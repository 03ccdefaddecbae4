import pytest
from hypothesis import given, strategies as st

from flexsym.pmap import (
    InjectivityError,
    LazyPermutation,
    PartialBijection,
    cycles_to_mapping,
    evaluate_word,
    format_pairs,
    parse_pairs,
)
from flexsym.words import parse_word


def test_basic_ops():
    g = PartialBijection([(3, 4), (4, 0)])
    assert g.apply(3) == 4 and g.apply(0) is None
    assert g.unapply(0) == 4
    assert g.inverse().pairs() == [(0, 4), (4, 3)]
    assert str(g) == "3->4, 4->0"
    assert parse_pairs(str(g)) == g
    assert g.extend(5, 5).issubset(g.extend(5, 5).extend(6, 7))
    assert g.restrict([3]).pairs() == [(3, 4)]


def test_injectivity_enforced():
    g = PartialBijection([(0, 1)])
    with pytest.raises(InjectivityError):
        g.extend(2, 1)
    with pytest.raises(InjectivityError):
        PartialBijection([(0, 1), (0, 2)])
    with pytest.raises(ValueError):
        PartialBijection([(-1, 0)])


@given(st.dictionaries(st.integers(0, 30), st.integers(0, 30)))
def test_pairs_round_trip(d):
    inv = {}
    for a, b in d.items():
        inv.setdefault(b, a)
    pb = PartialBijection((a, b) for b, a in inv.items())
    assert parse_pairs(format_pairs(pb.pairs())) == pb


def test_cycles():
    assert cycles_to_mapping([(0, 3), (1, 5)]) == {0: 3, 3: 0, 1: 5, 5: 1}
    with pytest.raises(ValueError):
        cycles_to_mapping([(0, 1), (1, 2)])
    f = LazyPermutation.from_cycles([(0, 1, 2)])
    assert [f(i) for i in range(4)] == [1, 2, 0, 3]
    assert f.unapply(0) == 2


def test_evaluate_word_applies_right_to_left():
    f0 = PartialBijection([(0, 1), (1, 2)])
    f1 = PartialBijection([(1, 7)])
    # x1 x0: first x0 then x1
    assert evaluate_word(parse_word("x1 x0"), [f0, f1], 0) == 7
    assert evaluate_word(parse_word("x0 x1"), [f0, f1], 0) is None
    assert evaluate_word(parse_word("x0^-2"), [f0, f1], 2) == 0


class _Swap:
    covers_stage = True

    def step(self, lp, s):
        if s % 2 == 0:
            lp.add(s, s + 1)
            lp.add(s + 1, s)


def test_lazy_permutation_tags_and_views():
    lp = LazyPermutation(_Swap())
    assert lp.apply(5) == 4
    assert lp.horizon >= 5
    assert lp.fragment_at(1).apply(0) == 1
    assert lp.fragment_at(0).apply(0) is None
    assert len(lp.fragment_at(3)) == 4
    assert lp.memo_items()[0] == (0, 1, 1)
