import random

from flexsym.itinerary import C, find_collision, itinerary_from, path_value, trace_collision
from flexsym.pmap import AtomMapContext, PartialBijection
from flexsym.words import atom_sequence, parse_word

from oracles import oracle_itinerary, random_pb, random_word


def _it(word, maps, i, a):
    w = parse_word(word)
    return itinerary_from(atom_sequence(w), AtomMapContext(maps[0], maps[1:]), i, a)


def test_examples():
    f = PartialBijection([(0, 1)])
    assert _it("x0", [f], 0, 0).lines() == ["t[1] = 1", "t[0] = 0"]
    assert _it("x0", [f], 0, 5).lines() == ["t[1] = c", "t[0] = 5"]
    t = _it("x0^2", [PartialBijection([(3, 4), (4, 3)])], 0, 3)
    assert t.slots == (3, 4, 3)
    assert find_collision(t) == (0, 2)
    t = _it("x0^2", [PartialBijection([(3, 4)])], 1, 4)
    assert t.slots == (3, 4, C)


def test_collision_is_lexicographically_least():
    g = PartialBijection([(0, 1), (1, 0)])
    t = _it("x0^4", [g], 0, 0)
    assert t.slots == (0, 1, 0, 1, 0)
    assert find_collision(t) == (0, 2)


def test_against_oracle_and_determinism():
    rng = random.Random(7)
    for _ in range(300):
        n = rng.randint(0, 2)
        w = random_word(rng, n, 5)
        maps = [random_pb(rng, rng.randint(0, 8), 10) for _ in range(n + 1)]
        seq = atom_sequence(w)
        ctx = AtomMapContext(maps[0], maps[1:])
        i = rng.randint(0, len(seq))
        a = rng.randint(0, 10)
        t = itinerary_from(seq, ctx, i, a)
        assert [None if v is C else v for v in t.slots] == oracle_itinerary(w, maps, i, a)
        for j, v in t.naturals():
            assert itinerary_from(seq, ctx, j, v) == t
            assert all(path_value(seq, ctx, j, k, v) == u for k, u in t.naturals())


def test_trace_collision_with_same_maps_is_immediate():
    g = PartialBijection([(3, 4), (4, 3)])
    seq = atom_sequence(parse_word("x0^2"))
    ctx = AtomMapContext(g)
    t = itinerary_from(seq, ctx, 0, 3)
    assert trace_collision(t, seq, ctx) == (0, 2)
    assert trace_collision(t, seq, ctx.with_f0(PartialBijection([(3, 4)]))) is None
