"""Reduced words in the free group on generators x0, x1, x2, ...

Words are stored in written order (leftmost letter first), so ``x1 x0``
means "apply x0, then x1".  The atom sequence produced by
:func:`atom_sequence` is indexed from the right instead: atom 0 is the first
one applied, which is what the itinerary machinery wants.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import groupby
from typing import Iterable, Iterator, Optional, Sequence


@dataclass(frozen=True)
class Letter:
    gen: int
    sign: int = 1

    def __post_init__(self):
        if self.gen < 0:
            raise ValueError(f"generator index must be >= 0, got {self.gen}")
        if self.sign not in (1, -1):
            raise ValueError(f"letter sign must be +1 or -1, got {self.sign}")

    def inverse(self) -> "Letter":
        return Letter(self.gen, -self.sign)

    def sort_key(self):
        # x_i before x_i^-1, lower generators first
        return (self.gen, -self.sign)

    def __str__(self):
        return f"x{self.gen}" if self.sign > 0 else f"x{self.gen}^-1"


def x(gen: int, power: int = 1) -> list[Letter]:
    """Letters of ``x_gen ** power`` (convenience for building words)."""
    sign = 1 if power > 0 else -1
    return [Letter(gen, sign)] * abs(power)


def _is_reduced(letters: Sequence[Letter]) -> bool:
    return all(
        not (p.gen == q.gen and p.sign == -q.sign) for p, q in zip(letters, letters[1:])
    )


@dataclass(frozen=True)
class Word:
    """A reduced word.  Use :func:`make_word` to build one from arbitrary letters."""

    letters: tuple[Letter, ...] = ()

    def __post_init__(self):
        if not _is_reduced(self.letters):
            raise ValueError(f"word is not reduced: {' '.join(map(str, self.letters))}")

    def __len__(self):
        return len(self.letters)

    def __bool__(self):
        return bool(self.letters)

    def __mul__(self, other: "Word") -> "Word":
        return concat(self, other)

    def __str__(self):
        return format_word(self)

    def __repr__(self):
        return f"Word({format_word(self)!r})"

    def inverse(self) -> "Word":
        return invert(self)

    def uses(self, i: int) -> bool:
        return uses(self, i)

    def generators(self) -> set[int]:
        return {l.gen for l in self.letters}

    def rename(self, mapping: dict[int, int]) -> "Word":
        """Substitute generator indices; ``mapping`` must be injective on used generators."""
        return Word(tuple(Letter(mapping[l.gen], l.sign) for l in self.letters))


TRIVIAL = Word(())


def make_word(letters: Iterable[Letter]) -> Word:
    """Freely reduce ``letters`` (given in written order)."""
    stack: list[Letter] = []
    for letter in letters:
        if stack and stack[-1].gen == letter.gen and stack[-1].sign == -letter.sign:
            stack.pop()
        else:
            stack.append(letter)
    return Word(tuple(stack))


def invert(w: Word) -> Word:
    return Word(tuple(l.inverse() for l in reversed(w.letters)))


def concat(w1: Word, w2: Word) -> Word:
    return make_word(w1.letters + w2.letters)


def uses(w: Word, i: int) -> bool:
    return any(l.gen == i for l in w.letters)


_TOKEN = re.compile(r"x(\d+)(?:\^(-?\d+))?$")


def parse_word(text: str) -> Word:
    """Parse ``"x0 x1^-2 x0"`` style text.  ``1`` or an empty string is the trivial word."""
    letters: list[Letter] = []
    for token in text.replace("*", " ").split():
        if token in ("1", "e"):
            continue
        m = _TOKEN.match(token)
        if m is None:
            raise ValueError(f"bad word token {token!r}")
        power = int(m.group(2)) if m.group(2) is not None else 1
        letters.extend(x(int(m.group(1)), power))
    return make_word(letters)


def format_word(w: Word) -> str:
    if not w.letters:
        return "1"
    parts = []
    for letter, run in groupby(w.letters):
        k = len(list(run)) * letter.sign
        parts.append(f"x{letter.gen}" if k == 1 else f"x{letter.gen}^{k}")
    return " ".join(parts)


# --- (dagger) decomposition and atoms ---------------------------------------


@dataclass(frozen=True)
class DaggerDecomposition:
    """``W = (Utop) x0^k_m ... U_1 x0^k_0 (U0)``."""

    exponents: tuple[int, ...]
    u_blocks: tuple[Word, ...]
    u0: Optional[Word]
    utop: Optional[Word]
    j: int
    lprime: int

    @property
    def m(self) -> int:
        return len(self.exponents) - 1

    def reassemble(self) -> Word:
        letters: list[Letter] = []
        if self.utop is not None:
            letters.extend(self.utop.letters)
        for idx in range(self.m, -1, -1):
            letters.extend(x(0, self.exponents[idx]))
            if idx > 0:
                letters.extend(self.u_blocks[idx - 1].letters)
        if self.u0 is not None:
            letters.extend(self.u0.letters)
        return Word(tuple(letters))


def _require_x0(w: Word) -> None:
    if not uses(w, 0):
        raise ValueError(f"word {format_word(w)} does not use x0")


def dagger_decompose(w: Word) -> DaggerDecomposition:
    _require_x0(w)
    # maximal runs, rightmost first
    runs = [
        (is_x0, tuple(reversed(list(grp))))
        for is_x0, grp in groupby(reversed(w.letters), key=lambda l: l.gen == 0)
    ]
    u0 = utop = None
    if not runs[0][0]:
        u0 = Word(runs.pop(0)[1])
    if not runs[-1][0]:
        utop = Word(runs.pop()[1])
    exponents = tuple(len(r) * r[0].sign for is_x0, r in runs if is_x0)
    u_blocks = tuple(Word(r) for is_x0, r in runs if not is_x0)
    m = len(exponents) - 1
    j = m + (u0 is not None) + (utop is not None)
    return DaggerDecomposition(
        exponents=exponents,
        u_blocks=u_blocks,
        u0=u0,
        utop=utop,
        j=j,
        lprime=sum(abs(k) for k in exponents) + j,
    )


@dataclass(frozen=True)
class Atom:
    """One factor of the atom sequence: x0 (sign=1), x0^-1 (sign=-1) or an x0-free block."""

    sign: int
    block: Optional[Word] = None
    # (gen, sign) pairs in application order; filled in for blocks
    code: tuple[tuple[int, int], ...] = field(default=(), compare=False, repr=False)

    @classmethod
    def ublock(cls, w: Word) -> "Atom":
        if not w or uses(w, 0):
            raise ValueError(f"U-block must be nontrivial and avoid x0: {format_word(w)}")
        code = tuple((l.gen, l.sign) for l in reversed(w.letters))
        return cls(0, w, code)

    @property
    def is_x0(self) -> bool:
        return self.sign != 0

    def word(self) -> Word:
        if self.sign:
            return Word((Letter(0, self.sign),))
        return self.block

    def __str__(self):
        return {1: "x0", -1: "x0^-1"}.get(self.sign) or f"[{format_word(self.block)}]"


X0_POS = Atom(1)
X0_NEG = Atom(-1)


@dataclass(frozen=True)
class AtomSequence:
    """Atoms ``V_0, ..., V_{L'-1}`` with ``W = V_{L'-1} ... V_0``."""

    word: Word
    atoms: tuple[Atom, ...]

    def __len__(self):
        return len(self.atoms)

    def __getitem__(self, i):
        return self.atoms[i]

    def __iter__(self):
        return iter(self.atoms)

    @property
    def lprime(self) -> int:
        return len(self.atoms)

    @property
    def plus(self) -> tuple[int, ...]:
        return tuple(i for i, v in enumerate(self.atoms) if v.sign == 1)

    @property
    def minus(self) -> tuple[int, ...]:
        return tuple(i for i, v in enumerate(self.atoms) if v.sign == -1)

    @property
    def blocks(self) -> tuple[int, ...]:
        return tuple(i for i, v in enumerate(self.atoms) if v.sign == 0)

    def reassemble(self) -> Word:
        letters: list[Letter] = []
        for v in reversed(self.atoms):
            letters.extend(v.word().letters)
        return Word(tuple(letters))


@lru_cache(maxsize=None)
def atom_sequence(w: Word) -> AtomSequence:
    d = dagger_decompose(w)
    atoms: list[Atom] = []
    if d.u0 is not None:
        atoms.append(Atom.ublock(d.u0))
    for idx, k in enumerate(d.exponents):
        atoms.extend([X0_POS if k > 0 else X0_NEG] * abs(k))
        if idx < d.m:
            atoms.append(Atom.ublock(d.u_blocks[idx]))
    if d.utop is not None:
        atoms.append(Atom.ublock(d.utop))
    return AtomSequence(w, tuple(atoms))


# --- canonical enumeration ----------------------------------------------------


def alphabet(n: int) -> list[Letter]:
    return sorted((Letter(g, s) for g in range(n + 1) for s in (1, -1)), key=Letter.sort_key)


def _reduced_strings(letters: list[Letter], length: int) -> Iterator[tuple[Letter, ...]]:
    if length == 0:
        yield ()
        return
    stack = [()]
    # depth-first, children pushed in reverse so output is lexicographic
    while stack:
        prefix = stack.pop()
        if len(prefix) == length:
            yield prefix
            continue
        for letter in reversed(letters):
            if prefix and prefix[-1].gen == letter.gen and prefix[-1].sign == -letter.sign:
                continue
            stack.append(prefix + (letter,))


def iter_words(n: int) -> Iterator[Word]:
    """All reduced words over x0..xn that use x0, in length-lexicographic order (infinite)."""
    letters = alphabet(n)
    length = 1
    while True:
        for s in _reduced_strings(letters, length):
            if any(l.gen == 0 for l in s):
                yield Word(s)
        length += 1


def enumerate_words(n: int, max_len: int) -> list[Word]:
    out = []
    for w in iter_words(n):
        if len(w) > max_len:
            break
        out.append(w)
    return out


class WordEnumeration:
    """Memoised prefix of :func:`iter_words` with index lookup."""

    def __init__(self, n: int):
        self.n = n
        self._it = iter_words(n)
        self._words: list[Word] = []
        self._index: dict[Word, int] = {}

    def first(self, count: int) -> list[Word]:
        while len(self._words) < count:
            w = next(self._it)
            self._index[w] = len(self._words)
            self._words.append(w)
        return self._words[:count]

    def index(self, w: Word) -> int:
        if any(l.gen > self.n for l in w.letters) or not uses(w, 0):
            raise ValueError(f"{format_word(w)} is not enumerated over x0..x{self.n}")
        while w not in self._index:
            self.first(len(self._words) + 64)
        return self._index[w]


@lru_cache(maxsize=None)
def word_enumeration(n: int) -> WordEnumeration:
    return WordEnumeration(n)
