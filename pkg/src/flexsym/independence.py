"""Collision-avoiding extension of partial automorphisms and strongly independent families.

The central routine is :func:`safe_extend_right` (and its mirror): given a
finite partial automorphism ``g`` and a new point, it picks the least legal
image that cannot create a new collision in any itinerary of the words in a
:class:`WordContext`.  Iterating it back and forth produces permutations
whose words have only the fixed points already forced by the seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import partial
from itertools import count
from typing import Iterable, Iterator, Optional, Sequence

from .itinerary import C, Itinerary, collision_from_slot, itinerary_from
from .pmap import (
    AtomMapContext,
    Composed,
    LazyPermutation,
    PartialBijection,
    PartialMap,
    StrategyError,
    evaluate_word,
)
from .structures import FlexibleStructure, TrivialStructure
from .words import AtomSequence, Letter, Word, atom_sequence, format_word, word_enumeration


class WordContext:
    """Words that must not gain collisions, with their atom sequences precomputed."""

    def __init__(self, words: Iterable[Word] = ()):
        self.words: list[Word] = []
        self.atoms: list[AtomSequence] = []
        self._seen: set[Word] = set()
        self.extend(words)

    def extend(self, words: Iterable[Word]) -> None:
        for w in words:
            if w in self._seen:
                continue
            seq = atom_sequence(w)  # rejects words without x0
            self._seen.add(w)
            self.words.append(w)
            self.atoms.append(seq)

    def __len__(self):
        return len(self.words)

    def __iter__(self):
        return iter(self.atoms)


def _context(h: Optional[PartialMap], g: PartialMap, rest, cache=None) -> AtomMapContext:
    f0 = g if h is None else Composed(h, g)
    return AtomMapContext(f0, rest, cache)


class _Steps:
    """One-step maps of every atom of a word in a fixed context, ready to call."""

    __slots__ = ("fwd", "bwd")

    def __init__(self, atoms: AtomSequence, ctx: AtomMapContext):
        f0 = ctx.f0
        self.fwd = []
        self.bwd = []
        for v in atoms.atoms:
            if v.sign > 0:
                self.fwd.append(f0.apply)
                self.bwd.append(f0.unapply)
            elif v.sign < 0:
                self.fwd.append(f0.unapply)
                self.bwd.append(f0.apply)
            else:
                self.fwd.append(partial(ctx.block, v.code, forward=True))
                self.bwd.append(partial(ctx.block, v.code, forward=False))

    def values(self, i: int, a: int) -> set:
        """Natural entries of the itinerary with slot ``i`` equal to ``a``."""
        out = {a}
        fwd, bwd = self.fwd, self.bwd
        v = a
        for k in range(i, len(fwd)):
            v = fwd[k](v)
            if v is None:
                break
            out.add(v)
        v = a
        for k in range(i - 1, -1, -1):
            v = bwd[k](v)
            if v is None:
                break
            out.add(v)
        return out

    def images(self, source, target: int, out: set) -> None:
        """Add to ``out`` the slot-``target`` value of every itinerary meeting ``source``."""
        fwd, bwd = self.fwd, self.bwd
        for x in source:
            for j in range(len(fwd) + 1):
                v = x
                for k in range(j, target):
                    v = fwd[k](v)
                    if v is None:
                        break
                else:
                    for k in range(j - 1, target - 1, -1):
                        v = bwd[k](v)
                        if v is None:
                            break
                    else:
                        out.add(v)


def bad_images_right(h, g, a, rest, wc: WordContext, cache=None) -> set[int]:
    """Values ``h(b)`` that would let ``g + (a, b)`` create a new collision (includes ``a``)."""
    ctx = _context(h, g, rest, cache)
    bad = {a}
    for atoms in wc:
        steps = _Steps(atoms, ctx)
        for i in atoms.plus:
            steps.images(steps.values(i, a), i + 1, bad)
        for i in atoms.minus:
            steps.images(steps.values(i + 1, a), i, bad)
    return bad


def bad_points_left(h, g, b, rest, wc: WordContext, cache=None) -> set[int]:
    """Points ``a`` for which ``g + (a, b)`` could create a new collision (includes ``h(b)``)."""
    ctx = _context(h, g, rest, cache)
    hb = b if h is None else h.apply(b)
    bad = {hb}
    for atoms in wc:
        steps = _Steps(atoms, ctx)
        for i in atoms.plus:
            steps.images(steps.values(i + 1, hb), i, bad)
        for i in atoms.minus:
            steps.images(steps.values(i, hb), i + 1, bad)
    return bad


def safe_extend_right(
    s: FlexibleStructure,
    h: Optional[PartialMap],
    g: PartialBijection,
    a: int,
    rest: Sequence[PartialMap],
    wc: WordContext,
    cache=None,
) -> tuple[int, PartialBijection]:
    """Least ``b`` with ``g + (a, b)`` in the structure's family and no new collisions.

    ``h=None`` stands for the identity.
    """
    if g.apply(a) is not None:
        raise ValueError(f"{a} is already in the domain of g")
    bad = bad_images_right(h, g, a, rest, wc, cache)
    if h is not None:
        bad = {h.unapply(y) for y in bad}
    for b in s.right_candidates(g, a):
        if b not in bad:
            return b, g.extend(a, b)
    raise StrategyError("candidate stream ended")  # pragma: no cover


def safe_extend_left(
    s: FlexibleStructure,
    h: Optional[PartialMap],
    g: PartialBijection,
    b: int,
    rest: Sequence[PartialMap],
    wc: WordContext,
    cache=None,
) -> tuple[int, PartialBijection]:
    if g.unapply(b) is not None:
        raise ValueError(f"{b} is already in the range of g")
    bad = bad_points_left(h, g, b, rest, wc, cache)
    for a in s.left_candidates(g, b):
        if a not in bad:
            return a, g.extend(a, b)
    raise StrategyError("candidate stream ended")  # pragma: no cover


# --- seeds -----------------------------------------------------------------------


def iter_seeds() -> Iterator[PartialBijection]:
    """Every finite partial bijection exactly once: by largest entry, then size, then pairs."""
    yield PartialBijection()
    for top in count():
        batch = []
        pts = range(top + 1)
        # all injective partial maps on {0..top} that mention top
        def rec(i, used, acc):
            if i > top:
                if any(top in p for p in acc):
                    batch.append(tuple(acc))
                return
            rec(i + 1, used, acc)
            for b in pts:
                if b not in used:
                    acc.append((i, b))
                    used.add(b)
                    rec(i + 1, used, acc)
                    used.discard(b)
                    acc.pop()

        rec(0, set(), [])
        batch.sort(key=lambda ps: (len(ps), ps))
        for ps in batch:
            yield PartialBijection(ps)


def canonical_seeds(k: int) -> list[PartialBijection]:
    it = iter_seeds()
    return [next(it) for _ in range(k)]


# --- family members ------------------------------------------------------------


def guard_words(n: int) -> list[Word]:
    """``x0 xk^-1`` for ``1 <= k <= n``: keep the new member away from each earlier one."""
    return [Word((Letter(0, 1), Letter(k, -1))) for k in range(1, n + 1)]


def length_cap(s: int) -> int:
    """Longest word protected at stage ``s``; grows like log2(s)."""
    return (s + 1).bit_length() + 1


def first_protected_stage(index: int, length: int) -> int:
    """Least stage ``s >= index`` with ``length_cap(s) >= length``."""
    return max(index, (1 << max(length - 2, 0)) - 1)


class MemberStrategy:
    """Back-and-forth chain ``q = u_0 <= u_1 <= ...`` for a new family member.

    Stage ``s`` covers point ``s`` on both sides.  The words protected at
    stage ``s`` are the guards plus those among the first ``s + 1`` words of
    the canonical enumeration over ``x0..xn`` whose length is at most
    :func:`length_cap` ``(s)``.
    """

    covers_stage = True

    def __init__(self, seed: PartialBijection, rest: Sequence[LazyPermutation], structure=None):
        self.seed = seed
        self.rest = tuple(rest)
        self.n = len(self.rest)
        self.structure = structure or TrivialStructure()
        self.wc = WordContext(guard_words(self.n))
        self._guards = set(self.wc.words)
        self._enum = word_enumeration(self.n)
        self._cache: dict = {}
        self.g = seed

    def attach(self, lp: LazyPermutation) -> None:
        for a, b in self.seed.pairs():
            lp.add(a, b, tag=0)

    def step(self, lp: LazyPermutation, s: int) -> None:
        cap = length_cap(s)
        self.wc.extend(w for w in self._enum.first(s + 1) if len(w) <= cap)
        g = self.g
        if g.apply(s) is None:
            b, g = safe_extend_right(self.structure, None, g, s, self.rest, self.wc, self._cache)
            lp.add(s, b)
        if g.unapply(s) is None:
            a, g = safe_extend_left(self.structure, None, g, s, self.rest, self.wc, self._cache)
            lp.add(a, s)
        self.g = g

    def assign(self, lp: LazyPermutation, others: Sequence, length: int) -> Optional["Assignment"]:
        """How ``lp`` plays x0 against ``others`` (``None`` unless built over all of them)."""
        gens = {id(f): k + 1 for k, f in enumerate(self.rest)}
        if not all(id(f) in gens for f in others):
            return None

        def protected_from(w: Word) -> int:
            return 0 if w in self._guards else first_protected_stage(self._enum.index(w), len(w))

        return Assignment(
            rest=self.rest,
            gens=gens,
            protected_from=protected_from,
            x0_at=lp.fragment_at,
            realized=lambda: lp.horizon + 1,
        )


@dataclass
class Assignment:
    """Variable assignment and stage history used to certify fixed points.

    ``x0_at(t)`` is the finite map substituted for x0 at stage ``t``;
    ``protected_from(w)`` is the stage from which collisions of ``w`` must
    trace back to that stage.
    """

    rest: tuple
    gens: dict
    protected_from: object
    x0_at: object
    realized: object


def build_member(fb: "FamilyBuilder", q: PartialBijection, n: Optional[int] = None, name=None) -> LazyPermutation:
    """Lazy permutation extending ``q`` that is strongly independent over ``fb.members[:n]``."""
    n = len(fb.members) if n is None else n
    if not fb.structure.contains(q):
        raise ValueError("seed is not in the structure's family")
    strategy = MemberStrategy(q, fb.members[:n], fb.structure)
    lp = LazyPermutation(strategy, name=name)
    strategy.attach(lp)
    return lp


@dataclass
class FamilyBuilder:
    structure: FlexibleStructure = field(default_factory=TrivialStructure)
    members: list = field(default_factory=list)
    seeds: list = field(default_factory=list)

    def add_member(self, q: PartialBijection, horizon: int = 0) -> LazyPermutation:
        lp = build_member(self, q, name=f"J{len(self.members) + 1}")
        lp.advance(horizon)
        self.members.append(lp)
        self.seeds.append(q)
        return lp

    def realize(self, horizon: int) -> None:
        for m in self.members:
            m.advance(horizon)

    def __len__(self):
        return len(self.members)

    def __getitem__(self, k):
        return self.members[k]

    def __iter__(self):
        return iter(self.members)


def build_dense_family(count_: int, horizon: int) -> FamilyBuilder:
    """``count_`` members built from the first canonical seeds, all realised to ``horizon``."""
    fb = FamilyBuilder()
    for q in canonical_seeds(count_):
        fb.add_member(q, horizon)
    fb.realize(horizon)
    return fb


# --- auditing ---------------------------------------------------------------------


@dataclass
class StrongIndependenceReport:
    word: Word
    window: int
    fixed_points: list = field(default_factory=list)
    certificates: list = field(default_factory=list)
    violations: list = field(default_factory=list)
    bound: Optional[int] = None
    bound_stage: Optional[int] = None
    renamed: Optional[Word] = None
    # stage from which the word was protected during construction
    protected_from: Optional[int] = None

    @property
    def ok(self) -> bool:
        return not self.violations and (self.bound is None or len(self.fixed_points) <= self.bound)

    def to_dict(self) -> dict:
        return {
            "word": format_word(self.word),
            "renamed": None if self.renamed is None else format_word(self.renamed),
            "window": self.window,
            "fixed_points": self.fixed_points,
            "count": len(self.fixed_points),
            "bound": self.bound,
            "bound_stage": self.bound_stage,
            "protected_from": self.protected_from,
            "certificates": self.certificates,
            "violations": self.violations,
            "ok": self.ok,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _pick_top(used: list, length: int):
    """The member built over all the others, with its variable assignment."""
    for f in reversed(used):
        assign = getattr(getattr(f, "strategy", None), "assign", None)
        if assign is None:
            continue
        got = assign(f, [g for g in used if g is not f], length)
        if got is not None:
            return f, got
    return None


def block_fixed_points(atom, ctx: AtomMapContext, upto: int) -> int:
    return sum(1 for x in range(upto + 1) if ctx.block(atom.code, x, True) == x)


def audit_fixed_points(family: Sequence, w: Word, window: int) -> StrongIndependenceReport:
    """Fixed points of ``W(family)`` in ``{0..window}`` with a collision certificate for each.

    Generator ``x_k`` is interpreted as ``family[k]``.  Each fixed point is
    traced back to the earliest construction stage whose finite fragment
    already shows the collision; a fixed point that cannot be traced to the
    stage from which the word was protected is a violation.
    """
    if not w:
        raise ValueError("the trivial word has no meaningful fixed-point audit")
    maps = list(family)
    used_gens = sorted(w.generators())
    if max(used_gens) >= len(maps):
        raise ValueError(f"word uses x{max(used_gens)} but the family has {len(maps)} members")
    used = [maps[k] for k in used_gens]
    if len({id(f) for f in used}) != len(used):
        raise ValueError("family members substituted into a word must be distinct")

    report = StrongIndependenceReport(word=w, window=window)
    report.fixed_points = [a for a in range(window + 1) if evaluate_word(w, maps, a) == a]

    top = _pick_top(used, len(w))
    if top is None:
        report.violations.append("no member of the word was built over all the others")
        return report
    f_top, asg = top
    gen_of = {k: 0 if maps[k] is f_top else asg.gens[id(maps[k])] for k in used_gens}
    renamed = w.rename(gen_of)
    report.renamed = renamed
    atoms = atom_sequence(renamed)
    ctx_full = AtomMapContext(f_top, asg.rest)
    protected = asg.protected_from(renamed)
    report.protected_from = protected

    fulls = [itinerary_from(atoms, ctx_full, 0, a) for a in report.fixed_points]
    stage_cap = min(protected, asg.realized())

    def collides(t: int, full: Itinerary) -> Optional[tuple[int, int]]:
        ctx = ctx_full.with_f0(asg.x0_at(t))
        for i0, v in enumerate(full.slots):
            if v is C:
                continue
            j0 = collision_from_slot(itinerary_from(atoms, ctx, i0, v), i0)
            if j0 is not None:
                return i0, j0
        return None

    top_value = window
    for a, full in zip(report.fixed_points, fulls):
        top_value = max([top_value] + [v for v in full.slots if v is not C])
        if collides(stage_cap, full) is None:
            report.violations.append(
                f"fixed point {a}: no collision at stage {stage_cap} (protected from {protected})"
            )
            continue
        lo, hi = 0, stage_cap
        while lo < hi:
            mid = (lo + hi) // 2
            if collides(mid, full) is None:
                lo = mid + 1
            else:
                hi = mid
        i0, j0 = collides(lo, full)
        report.certificates.append(
            {"point": a, "i0": i0, "j0": j0, "stage": lo, "protected_from": protected}
        )

    x0_atoms = len(atoms.plus) + len(atoms.minus)
    dom_size = len(asg.x0_at(stage_cap))
    block_fix = sum(block_fixed_points(atoms[k], ctx_full, top_value) for k in atoms.blocks)
    report.bound = x0_atoms * dom_size + block_fix
    report.bound_stage = stage_cap
    return report


def audit_words(family: Sequence, max_len: int, window: int) -> list[StrongIndependenceReport]:
    """Audit every nontrivial reduced word over ``family`` of length at most ``max_len``."""
    from .words import alphabet, _reduced_strings

    letters = alphabet(len(family) - 1)
    out = []
    for length in range(1, max_len + 1):
        for s in _reduced_strings(letters, length):
            out.append(audit_fixed_points(family, Word(s), window))
    return out


# --- family files ---------------------------------------------------------------------


def dump_family(fb: FamilyBuilder) -> str:
    """Line-oriented text: seeds, realised horizon and tagged memo of every member."""
    lines = [f"family count={len(fb.members)}"]
    for k, (m, q) in enumerate(zip(fb.members, fb.seeds), start=1):
        lines.append(f"member {k}")
        lines.append(f"seed: {q}")
        lines.append(f"realized: {m.horizon}")
        lines.append("memo: " + ", ".join(f"{a}->{b}@{t}" for a, b, t in m.memo_items()))
    return "\n".join(lines) + "\n"


def load_family(text: str) -> FamilyBuilder:
    """Inverse of :func:`dump_family`; loaded members keep extending deterministically."""
    from .pmap import parse_pairs

    fb = FamilyBuilder()
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines or not lines[0].startswith("family"):
        raise ValueError("not a family file")
    body = lines[1:]
    if len(body) % 4:
        raise ValueError("truncated family file")
    for k in range(0, len(body), 4):
        head, seed_ln, real_ln, memo_ln = body[k : k + 4]
        if not (head.startswith("member") and seed_ln.startswith("seed:")
                and real_ln.startswith("realized:") and memo_ln.startswith("memo:")):
            raise ValueError(f"malformed member block at line {k + 2}")
        q = parse_pairs(seed_ln[len("seed:"):])
        lp = build_member(fb, q, name=f"J{len(fb.members) + 1}")
        for chunk in memo_ln[len("memo:"):].split(","):
            if not chunk.strip():
                continue
            pair, tag = chunk.split("@")
            a, b = (int(v) for v in pair.split("->"))
            lp.add(a, b, tag=int(tag))
        lp.horizon = int(real_ln[len("realized:"):])
        lp.strategy.g = lp.fragment()
        fb.members.append(lp)
        fb.seeds.append(q)
    return fb
