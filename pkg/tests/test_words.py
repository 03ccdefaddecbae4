from itertools import product

import pytest
from hypothesis import given, strategies as st

from flexsym.words import (
    Letter,
    Word,
    alphabet,
    atom_sequence,
    dagger_decompose,
    enumerate_words,
    format_word,
    invert,
    make_word,
    parse_word,
    word_enumeration,
)

letters = st.builds(Letter, st.integers(0, 3), st.sampled_from([1, -1]))
raw_words = st.lists(letters, max_size=12)


def brute_enumeration(n, max_len):
    alpha = alphabet(n)
    out = []
    for length in range(1, max_len + 1):
        for s in product(alpha, repeat=length):
            if any(p.gen == q.gen and p.sign == -q.sign for p, q in zip(s, s[1:])):
                continue
            if any(l.gen == 0 for l in s):
                out.append(Word(s))
    return out


def test_worked_example():
    w = parse_word("x1 x0^2 x1^-1 x0")
    d = dagger_decompose(w)
    assert d.exponents == (1, 2)
    assert [format_word(u) for u in d.u_blocks] == ["x1^-1"]
    assert d.u0 is None and format_word(d.utop) == "x1"
    assert d.j == 2 and d.lprime == 5
    assert [str(v) for v in atom_sequence(w)] == ["x0", "[x1^-1]", "x0", "x0", "[x1]"]


def test_pure_power():
    d = dagger_decompose(parse_word("x0^3"))
    assert d.lprime == 3 and d.j == 0


def test_word_without_x0_rejected():
    with pytest.raises(ValueError):
        dagger_decompose(parse_word("x1 x2"))


def test_unreduced_word_rejected():
    with pytest.raises(ValueError):
        Word((Letter(0), Letter(0, -1)))
    assert not make_word([Letter(0), Letter(0, -1)])


@pytest.mark.parametrize("n,max_len", [(0, 4), (1, 4), (2, 3)])
def test_enumeration_matches_brute_force(n, max_len):
    assert enumerate_words(n, max_len) == brute_enumeration(n, max_len)


def test_enumeration_order_and_index():
    assert enumerate_words(0, 2) == [parse_word(t) for t in ("x0", "x0^-1", "x0^2", "x0^-2")]
    en = word_enumeration(1)
    ws = en.first(40)
    assert [en.index(w) for w in ws] == list(range(40))


@given(raw_words)
def test_make_word_is_reduced_and_idempotent(ls):
    w = make_word(ls)
    assert make_word(w.letters) == w


@given(raw_words)
def test_parse_format_round_trip(ls):
    w = make_word(ls)
    assert parse_word(format_word(w)) == w


@given(raw_words, raw_words)
def test_group_laws(a, b):
    u, v = make_word(a), make_word(b)
    assert not (u * invert(u))
    assert invert(u * v) == invert(v) * invert(u)


@given(raw_words)
def test_decomposition_reassembles(ls):
    w = make_word(ls)
    if not w.uses(0):
        return
    d = dagger_decompose(w)
    seq = atom_sequence(w)
    assert d.reassemble() == w
    assert seq.reassemble() == w
    assert len(seq) == d.lprime == sum(abs(k) for k in d.exponents) + d.j
    assert all(not v.block.uses(0) for v in seq if v.sign == 0)
