import random
from fractions import Fraction
from itertools import islice, takewhile

import pytest

from flexsym.pmap import LazyPermutation, PartialBijection
from flexsym.structures import (
    QOrder,
    Rado,
    Sections,
    TrivialStructure,
    build_structure,
    cantor_pair,
    cantor_unpair,
    parse_descriptor,
    rado_edge,
    rational_of,
    section_class,
    verify_window_iso,
)


def test_rational_enumeration():
    assert [rational_of(n) for n in range(7)] == [
        0, 1, -1, Fraction(1, 2), Fraction(-1, 2), 2, -2
    ]
    assert len({rational_of(n) for n in range(2000)}) == 2000


def test_cantor_pairing():
    for n in range(500):
        assert cantor_pair(*cantor_unpair(n)) == n
    assert section_class(cantor_pair(4, 9)) == 4


def test_rado_extension_property_on_small_sets():
    # every pair of disjoint sets U, V below 8 has a witness adjacent to U and not to V
    for mask in range(1 << 6):
        U = {i for i in range(6) if mask >> i & 1}
        V = set(range(6)) - U
        z = next(z for z in range(6, 1 << 12) if all(rado_edge(z, u) for u in U)
                 and not any(rado_edge(z, v) for v in V))
        assert z not in U | V


@pytest.mark.parametrize("s", [TrivialStructure(), QOrder(), Sections(), Rado()])
def test_candidates_match_brute_force(s):
    rng = random.Random(3)
    for _ in range(30):
        g = PartialBijection()
        # grow a random member of the family
        for a in rng.sample(range(12), 5):
            small = list(islice(takewhile(lambda b: b <= 200, s.right_candidates(g, a)), 3))
            if not small:
                continue
            g = g.extend(a, rng.choice(small))
        assert s.contains(g)
        a = next(x for x in range(20) if g.apply(x) is None)
        top = 40
        got = list(takewhile(lambda b: b <= top, s.right_candidates(g, a)))
        want = [b for b in range(top + 1) if g.unapply(b) is None and s.contains(g.extend(a, b))]
        assert got == want
        b = next(y for y in range(40) if g.unapply(y) is None)
        got = list(takewhile(lambda x: x <= top, s.left_candidates(g, b)))
        want = [x for x in range(top + 1) if g.apply(x) is None and s.contains(g.extend(x, b))]
        assert got == want


def test_candidate_streams_are_increasing_and_infinite():
    g = PartialBijection([(0, 1), (1, 2)])
    for s in (QOrder(), Sections(), Rado()):
        bs = list(islice(s.right_candidates(g, 5), 25))
        assert bs == sorted(bs) and len(set(bs)) == 25


def test_descriptor_round_trip():
    d = parse_descriptor("kind=qorder;scramble=(0 3)(1 5)")
    assert str(d) == "kind=qorder;scramble=(0 3)(1 5)"
    assert parse_descriptor(str(d)) == d
    assert parse_descriptor("sections").kind == "sections"
    for bad in ("kind=nope", "kind=qorder;scramble=(0 1)(1 2)", "kind=qorder;scramble=0 1", "x=1"):
        with pytest.raises(ValueError):
            parse_descriptor(bad)


def test_transported_structure_and_window_check():
    base = build_structure(parse_descriptor("qorder"))
    moved = build_structure(parse_descriptor("kind=qorder;scramble=(0 3)(1 5)"))
    sigma = LazyPermutation.from_cycles([(0, 3), (1, 5)])
    assert verify_window_iso(base, moved, sigma, 30).ok
    rep = verify_window_iso(base, moved, LazyPermutation.identity(), 30)
    assert not rep.ok and str(rep).startswith("FAIL rel< at (")
    # candidates of the transported structure are the legal ones
    g = PartialBijection([(3, 3)])
    got = list(islice(moved.right_candidates(g, 0), 10))
    want = [b for b in range(200) if b != 3 and moved.contains(g.extend(0, b))][:10]
    assert got == want


def test_sections_iso_failure_reports_class():
    s = Sections()
    rep = verify_window_iso(s, s, PartialBijection((i, i + 1) for i in range(10)), 5)
    assert not rep.ok and rep.relation.startswith("R")
    rep = verify_window_iso(s, s, PartialBijection([(0, 0)]), 3)
    assert not rep.ok and rep.relation == "dom"


def test_rado_candidates_with_huge_range_points():
    s = Rado()
    g = PartialBijection([(8, 1 << 40), (16, 3), (32, (1 << 40) + 5)])
    assert s.contains(g)
    # 1 is adjacent to none of 8, 16, 32
    bs = list(islice(s.right_candidates(g, 1), 8))
    assert bs == sorted(bs)
    assert [b for b in range(bs[-1] + 1) if g.unapply(b) is None and s.contains(g.extend(1, b))] == bs
    # 5 is adjacent to 32 only: 2 is the one small candidate, later ones are astronomically large
    it = s.right_candidates(g, 5)
    assert next(it) == 2
    with pytest.raises(OverflowError):
        next(it)
