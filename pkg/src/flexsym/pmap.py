"""Finite partial bijections of the naturals and lazily realised permutations.

Anything with ``apply(x)`` and ``unapply(y)`` returning an int or ``None`` can be
substituted for a generator; :class:`PartialBijection` is the finite kind and
:class:`LazyPermutation` the total kind.
"""

from __future__ import annotations

import re
from typing import Callable, Iterable, Iterator, Optional, Protocol, Sequence

from .words import Atom, Word


class InjectivityError(ValueError):
    pass


class StrategyError(RuntimeError):
    """An extension strategy broke its contract (no legal extension produced)."""


class PartialMap(Protocol):
    def apply(self, a: int) -> Optional[int]: ...

    def unapply(self, b: int) -> Optional[int]: ...


class PartialBijection:
    """Immutable finite injective map on the naturals."""

    __slots__ = ("_fwd", "_bwd", "_hash")

    def __init__(self, pairs: Iterable[tuple[int, int]] = ()):
        fwd: dict[int, int] = {}
        bwd: dict[int, int] = {}
        for a, b in pairs:
            if a < 0 or b < 0:
                raise ValueError(f"points must be naturals: ({a}, {b})")
            if fwd.get(a, b) != b or bwd.get(b, a) != a:
                raise InjectivityError(f"({a}, {b}) clashes with an existing pair")
            fwd[a] = b
            bwd[b] = a
        self._fwd = fwd
        self._bwd = bwd
        self._hash = None

    @classmethod
    def _from_dicts(cls, fwd, bwd):
        pb = cls.__new__(cls)
        pb._fwd, pb._bwd, pb._hash = fwd, bwd, None
        return pb

    def apply(self, a: int) -> Optional[int]:
        return self._fwd.get(a)

    def unapply(self, b: int) -> Optional[int]:
        return self._bwd.get(b)

    def extend(self, a: int, b: int) -> "PartialBijection":
        if a in self._fwd:
            raise InjectivityError(f"{a} is already in the domain")
        if b in self._bwd:
            raise InjectivityError(f"{b} is already in the range")
        fwd = dict(self._fwd)
        bwd = dict(self._bwd)
        fwd[a] = b
        bwd[b] = a
        return PartialBijection._from_dicts(fwd, bwd)

    def inverse(self) -> "PartialBijection":
        return PartialBijection._from_dicts(self._bwd, self._fwd)

    def restrict(self, points: Iterable[int]) -> "PartialBijection":
        return PartialBijection((a, self._fwd[a]) for a in points if a in self._fwd)

    def domain(self) -> frozenset[int]:
        return frozenset(self._fwd)

    def range(self) -> frozenset[int]:
        return frozenset(self._bwd)

    def pairs(self) -> list[tuple[int, int]]:
        return sorted(self._fwd.items())

    def issubset(self, other: "PartialBijection") -> bool:
        return all(other._fwd.get(a) == b for a, b in self._fwd.items())

    def __contains__(self, pair) -> bool:
        a, b = pair
        return self._fwd.get(a) == b and a in self._fwd

    def __len__(self):
        return len(self._fwd)

    def __iter__(self) -> Iterator[tuple[int, int]]:
        return iter(self.pairs())

    def __eq__(self, other):
        if not isinstance(other, PartialBijection):
            return NotImplemented
        return self._fwd == other._fwd

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(tuple(self.pairs()))
        return self._hash

    def __str__(self):
        return format_pairs(self.pairs())

    def __repr__(self):
        return f"PartialBijection({self.pairs()})"


_ARROW = re.compile(r"^\s*(\d+)\s*->\s*(\d+)\s*$")


def parse_pairs(text: str) -> PartialBijection:
    """Parse ``"3->4, 4->0"``; an empty string is the empty map."""
    pairs = []
    for chunk in text.split(","):
        if not chunk.strip():
            continue
        m = _ARROW.match(chunk)
        if m is None:
            raise ValueError(f"bad pair {chunk.strip()!r}, expected 'a->b'")
        pairs.append((int(m.group(1)), int(m.group(2))))
    return PartialBijection(pairs)


def format_pairs(pairs: Iterable[tuple[int, int]]) -> str:
    return ", ".join(f"{a}->{b}" for a, b in pairs)


class Composed:
    """``outer . inner`` as a partial map (inner applied first)."""

    __slots__ = ("outer", "inner")

    def __init__(self, outer: PartialMap, inner: PartialMap):
        self.outer = outer
        self.inner = inner

    def apply(self, a):
        b = self.inner.apply(a)
        return None if b is None else self.outer.apply(b)

    def unapply(self, c):
        b = self.outer.unapply(c)
        return None if b is None else self.inner.unapply(b)


class TaggedView:
    """Partial map of the pairs of ``fwd`` whose tag is ``<= limit``.

    Used to look at an earlier finite stage of a growing map without copying.
    """

    __slots__ = ("_fwd", "_bwd", "_tag", "limit")

    def __init__(self, fwd: dict, bwd: dict, tag: dict, limit: int):
        self._fwd, self._bwd, self._tag, self.limit = fwd, bwd, tag, limit

    def apply(self, a):
        b = self._fwd.get(a)
        if b is None or self._tag[a] > self.limit:
            return None
        return b

    def unapply(self, b):
        a = self._bwd.get(b)
        if a is None or self._tag[a] > self.limit:
            return None
        return a

    def __len__(self):
        return sum(1 for t in self._tag.values() if t <= self.limit)

    def freeze(self) -> PartialBijection:
        return PartialBijection((a, b) for a, b in self._fwd.items() if self._tag[a] <= self.limit)


# --- lazy permutations --------------------------------------------------------


class LazyPermutation:
    """A bijection of the naturals realised stage by stage.

    ``strategy.step(lp, s)`` is called for s = 0, 1, 2, ... and must record new
    pairs through :meth:`add`.  Strategies with ``covers_stage = True`` promise
    that point s is in both domain and range once stage s is done.  Lookups of
    points not yet realised advance the permutation as far as needed.
    """

    max_extra_stages = 100_000

    def __init__(self, strategy, name: Optional[str] = None):
        self.strategy = strategy
        self.name = name
        self.horizon = -1
        self._fwd: dict[int, int] = {}
        self._bwd: dict[int, int] = {}
        # tag of a pair = first stage index t such that the pair belongs to u_t
        self.stage_of: dict[int, int] = {}
        self._stepping = False

    def __repr__(self):
        return f"LazyPermutation({self.name or self.strategy!r}, horizon={self.horizon})"

    def add(self, a: int, b: int, tag: Optional[int] = None) -> None:
        if self._fwd.get(a, b) != b or self._bwd.get(b, a) != a:
            raise InjectivityError(f"({a}, {b}) contradicts the realised fragment")
        if a in self._fwd:
            return
        self._fwd[a] = b
        self._bwd[b] = a
        self.stage_of[a] = self.horizon + 2 if tag is None else tag

    def advance(self, stage: int) -> "LazyPermutation":
        if self._stepping:
            raise StrategyError(f"{self!r}: re-entrant advance to stage {stage}")
        while self.horizon < stage:
            s = self.horizon + 1
            self._stepping = True
            try:
                self.strategy.step(self, s)
            finally:
                self._stepping = False
            if getattr(self.strategy, "covers_stage", False) and (
                s not in self._fwd or s not in self._bwd
            ):
                raise StrategyError(f"{self!r}: stage {s} left point {s} uncovered")
            self.horizon = s
        return self

    def _chase(self, table: dict, key: int, forward: bool) -> int:
        direct = getattr(self.strategy, "direct", None)
        if direct is not None:
            value = direct(key, forward)
            if value is None:
                raise StrategyError(f"{self!r} is undefined at {key}")
            return value
        if not self._stepping:
            self.advance(max(key, self.horizon))
            limit = self.horizon + self.max_extra_stages
            while key not in table and self.horizon < limit:
                self.advance(self.horizon + 1)
        if key not in table:
            raise StrategyError(f"{self!r}: could not realise a value at {key}")
        return table[key]

    def apply(self, a: int) -> int:
        b = self._fwd.get(a)
        return b if b is not None else self._chase(self._fwd, a, True)

    def unapply(self, b: int) -> int:
        a = self._bwd.get(b)
        return a if a is not None else self._chase(self._bwd, b, False)

    def __call__(self, a: int) -> int:
        return self.apply(a)

    def fragment(self) -> PartialBijection:
        """Snapshot of the realised memo."""
        return PartialBijection._from_dicts(dict(self._fwd), dict(self._bwd))

    def fragment_at(self, t: int) -> TaggedView:
        """The finite stage ``u_t``: pairs realised no later than tag ``t``."""
        return TaggedView(self._fwd, self._bwd, self.stage_of, t)

    def memo_items(self) -> list[tuple[int, int, int]]:
        return sorted((a, b, self.stage_of[a]) for a, b in self._fwd.items())

    # --- constructors ---------------------------------------------------------

    @classmethod
    def from_functions(cls, fwd: Callable[[int], Optional[int]], bwd: Callable[[int], Optional[int]], name=None):
        """Permutation given by explicit formulas; values are memoised on lookup."""
        return cls(FormulaStrategy(fwd, bwd), name=name)

    @classmethod
    def identity(cls) -> "LazyPermutation":
        return cls.from_functions(lambda a: a, lambda b: b, name="id")

    @classmethod
    def finite_support(cls, mapping: dict[int, int], name=None) -> "LazyPermutation":
        """Permutation moving only the keys of ``mapping`` (which must permute them)."""
        mapping = {a: b for a, b in mapping.items() if a != b}
        if sorted(mapping) != sorted(mapping.values()):
            raise ValueError("finite-support mapping must permute its own support")
        inv = {b: a for a, b in mapping.items()}
        return cls.from_functions(lambda a: mapping.get(a, a), lambda b: inv.get(b, b), name=name)

    @classmethod
    def from_cycles(cls, cycles: Sequence[Sequence[int]], name=None) -> "LazyPermutation":
        return cls.finite_support(cycles_to_mapping(cycles), name=name)


class FormulaStrategy:
    covers_stage = False

    def __init__(self, fwd, bwd):
        self.fwd = fwd
        self.bwd = bwd
        self._lp = None

    def step(self, lp: LazyPermutation, s: int) -> None:
        b = self.fwd(s)
        if b is not None:
            lp.add(s, b)
        a = self.bwd(s)
        if a is not None:
            lp.add(a, s)

    def direct(self, key: int, forward: bool) -> Optional[int]:
        return self.fwd(key) if forward else self.bwd(key)


def cycles_to_mapping(cycles: Sequence[Sequence[int]]) -> dict[int, int]:
    mapping: dict[int, int] = {}
    seen: set[int] = set()
    for cyc in cycles:
        for p in cyc:
            if p < 0:
                raise ValueError(f"cycle entries must be naturals: {cyc}")
            if p in seen:
                raise ValueError(f"cycles are not disjoint at {p}")
            seen.add(p)
        for i, p in enumerate(cyc):
            mapping[p] = cyc[(i + 1) % len(cyc)]
    return mapping


# --- atom evaluation ----------------------------------------------------------


class AtomMapContext:
    """The substitution ``x0 -> f0, x1 -> rest[0], ..., xn -> rest[n-1]``.

    Block evaluations only involve ``rest``, which never changes, so they are
    cached; :meth:`with_f0` shares that cache.
    """

    __slots__ = ("f0", "rest", "_cache")

    def __init__(self, f0: PartialMap, rest: Sequence[PartialMap] = (), cache: Optional[dict] = None):
        rest = tuple(rest)
        if len({id(f) for f in rest}) != len(rest):
            raise ValueError("maps substituted for x1..xn must be pairwise distinct")
        self.f0 = f0
        self.rest = rest
        self._cache = {} if cache is None else cache

    def with_f0(self, f0: PartialMap) -> "AtomMapContext":
        ctx = AtomMapContext.__new__(AtomMapContext)
        ctx.f0, ctx.rest, ctx._cache = f0, self.rest, self._cache
        return ctx

    def block(self, code: tuple, a: int, forward: bool) -> Optional[int]:
        key = (code, a, forward)
        cache = self._cache
        if key in cache:
            return cache[key]
        rest = self.rest
        v: Optional[int] = a
        seq = code if forward else reversed(code)
        for gen, sign in seq:
            if gen > len(rest):
                raise ValueError(f"x{gen} has no map in this context")
            f = rest[gen - 1]
            v = f.apply(v) if (sign > 0) == forward else f.unapply(v)
            if v is None:
                break
        cache[key] = v
        return v


def atom_apply(atom: Atom, ctx: AtomMapContext, a: int, forward: bool = True) -> Optional[int]:
    """Image (``forward``) or preimage of ``a`` under ``atom`` evaluated in ``ctx``."""
    if atom.sign == 0:
        # blocks are checked to avoid x0 when the atom is built
        return ctx.block(atom.code, a, forward)
    if (atom.sign > 0) == forward:
        return ctx.f0.apply(a)
    return ctx.f0.unapply(a)


def evaluate_word(w: Word, maps: Sequence[PartialMap], a: int) -> Optional[int]:
    """``W(maps)(a)`` with ``x_k -> maps[k]``; ``None`` if undefined along the way."""
    v: Optional[int] = a
    for letter in reversed(w.letters):
        f = maps[letter.gen]
        v = f.apply(v) if letter.sign > 0 else f.unapply(v)
        if v is None:
            return None
    return v
