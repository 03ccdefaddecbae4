"""Generic isomorphisms that keep a strongly independent family independent.

Conditions are pairs ``(g, H)``: a finite partial automorphism ``g`` of the
source structure and a finite ordered list ``H`` of family members.  A run
meets the requirements "cover point a in the domain", "cover a in the range"
and "include the next family member" in round-robin order, so the union of
the chain is an automorphism ``g`` and ``f = h o g`` is an isomorphism onto
the target structure that stays strongly independent over the family.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

from .independence import (
    Assignment,
    StrongIndependenceReport,
    WordContext,
    audit_fixed_points,
    safe_extend_left,
    safe_extend_right,
)
from .itinerary import find_collision, itinerary_from, trace_collision
from .pmap import (
    AtomMapContext,
    Composed,
    LazyPermutation,
    PartialBijection,
    PartialMap,
    TaggedView,
    parse_pairs,
)
from .structures import (
    FlexibleStructure,
    StructureDescriptor,
    build_structure,
    parse_descriptor,
    verify_window_iso,
)
from .words import Word, enumerate_words


@dataclass(frozen=True)
class Condition:
    g: PartialBijection = field(default_factory=PartialBijection)
    H: tuple = ()

    def __post_init__(self):
        if len({id(f) for f in self.H}) != len(self.H):
            raise ValueError("handles in H must be distinct")

    @property
    def n(self) -> int:
        return len(self.H)

    def __str__(self):
        names = ", ".join(getattr(f, "name", None) or repr(f) for f in self.H)
        return f"({{{self.g}}}, [{names}])"


@dataclass(frozen=True)
class DomCovers:
    a: int

    def met_by(self, p: Condition) -> bool:
        return p.g.apply(self.a) is not None


@dataclass(frozen=True)
class RanCovers:
    a: int

    def met_by(self, p: Condition) -> bool:
        return p.g.unapply(self.a) is not None


@dataclass(frozen=True, eq=False)
class Includes:
    handle: object

    def met_by(self, p: Condition) -> bool:
        return any(f is self.handle for f in p.H)


Requirement = Union[DomCovers, RanCovers, Includes]


class GenericContext:
    """Source structure, the base isomorphism ``h`` and cached word lists.

    ``h=None`` means the identity.
    """

    def __init__(self, structure: FlexibleStructure, h: Optional[PartialMap] = None):
        self.structure = structure
        self.h = h
        self._words: dict[int, WordContext] = {}
        self._caches: dict[tuple, dict] = {}

    def words(self, n: int) -> WordContext:
        """All reduced words over x0..xn that use x0 and have length at most n."""
        wc = self._words.get(n)
        if wc is None:
            wc = self._words[n] = WordContext(enumerate_words(n, n))
        return wc

    def block_cache(self, H: tuple) -> dict:
        return self._caches.setdefault(tuple(id(f) for f in H), {})

    def x0_map(self, g: PartialMap) -> PartialMap:
        return g if self.h is None else Composed(self.h, g)


def extend_to_meet(p: Condition, r: Requirement, ctx: GenericContext) -> Condition:
    """An extension of ``p`` meeting ``r`` (``p`` itself if it already does)."""
    if r.met_by(p):
        return p
    if isinstance(r, Includes):
        return Condition(p.g, p.H + (r.handle,))
    wc = ctx.words(p.n)
    cache = ctx.block_cache(p.H)
    if isinstance(r, DomCovers):
        _, g = safe_extend_right(ctx.structure, ctx.h, p.g, r.a, p.H, wc, cache)
    else:
        _, g = safe_extend_left(ctx.structure, ctx.h, p.g, r.a, p.H, wc, cache)
    return Condition(g, p.H)


def leq_check_bounded(p: Condition, q: Condition, ctx: GenericContext, window: int) -> bool:
    """Whether ``p <= q``, with the collision clause checked on seeds ``<= window``.

    The clause looks at every word over x0..xn (n = |H_p|, variables listed in
    the order of ``H_p``) of length at most n and every itinerary wrt ``h o g_q``
    seeded at a slot holding a value ``<= window``.  A collision there must be
    traceable to a collision wrt ``h o g_p``.
    """
    if not p.g.issubset(q.g):
        return False
    if not all(any(f is f2 for f2 in q.H) for f in p.H):
        return False
    cache = ctx.block_cache(p.H)
    new = AtomMapContext(ctx.x0_map(q.g), p.H, cache)
    old = new.with_f0(ctx.x0_map(p.g))
    for atoms in ctx.words(p.n):
        for i in range(len(atoms) + 1):
            for a in range(window + 1):
                t = itinerary_from(atoms, new, i, a)
                if find_collision(t) is not None and trace_collision(t, atoms, old) is None:
                    return False
    return True


def class_key(p: Condition) -> PartialBijection:
    return p.g


def centered_upper_bound(conds: Sequence[Condition]) -> Condition:
    """``(g, union of the H's)`` for conditions sharing the same ``g``."""
    if not conds:
        raise ValueError("need at least one condition")
    g = class_key(conds[0])
    if any(class_key(p) != g for p in conds):
        raise ValueError("conditions have different class keys")
    H: list = []
    for p in conds:
        for f in p.H:
            if not any(f is f2 for f2 in H):
                H.append(f)
    return Condition(g, tuple(H))


# --- the run ------------------------------------------------------------------------


class _StageView:
    """``h o g`` restricted to the chain prefix ending at a given index."""

    def __init__(self, h: Optional[PartialMap], view: TaggedView):
        self._view = view
        self._map = view if h is None else Composed(h, view)

    def apply(self, a):
        return self._map.apply(a)

    def unapply(self, b):
        return self._map.unapply(b)

    def __len__(self):
        return len(self._view)


class GenericStrategy:
    """Builds the chain lazily; step ``s`` meets DomCovers(s), RanCovers(s), Includes(next)."""

    covers_stage = False

    def __init__(self, ctx: GenericContext, handles: Sequence, start: Optional[Condition] = None):
        self.ctx = ctx
        self.handles = list(handles)
        self.chain: list[Condition] = [start or Condition()]
        self.schedule: list[Requirement] = []
        self._next_handle = 0
        # g pairs with the chain index that introduced them
        self._fwd: dict[int, int] = {}
        self._bwd: dict[int, int] = {}
        self.tag: dict[int, int] = {}
        for a, b in self.chain[0].g.pairs():
            self._record(a, b, 0)

    def _record(self, a: int, b: int, index: int) -> None:
        self._fwd[a] = b
        self._bwd[b] = a
        self.tag[a] = index

    def requirements(self, s: int) -> list[Requirement]:
        reqs: list[Requirement] = [DomCovers(s), RanCovers(s)]
        if self._next_handle < len(self.handles):
            reqs.append(Includes(self.handles[self._next_handle]))
            self._next_handle += 1
        return reqs

    def step(self, lp: LazyPermutation, s: int) -> None:
        h = self.ctx.h
        for r in self.requirements(s):
            self.schedule.append(r)
            p = self.chain[-1]
            q = extend_to_meet(p, r, self.ctx)
            if q is p:
                continue
            self.chain.append(q)
            for a, b in q.g.pairs():
                if a not in self._fwd:
                    self._record(a, b, len(self.chain) - 1)
                    lp.add(a, b if h is None else h.apply(b))

    @property
    def g(self) -> PartialBijection:
        return self.chain[-1].g

    def stage_map(self, t: int) -> _StageView:
        return _StageView(self.ctx.h, TaggedView(self._fwd, self._bwd, self.tag, t))

    def first_index_with(self, size: int) -> Optional[int]:
        for k, p in enumerate(self.chain):
            if p.n >= size:
                return k
        return None

    def assign(self, lp: LazyPermutation, others: Sequence, length: int) -> Optional[Assignment]:
        H = self.chain[-1].H
        gens = {id(f): k + 1 for k, f in enumerate(H)}
        if not all(id(f) in gens for f in others):
            return None

        def protected_from(w: Word) -> int:
            need = max([len(w)] + [k for k in w.generators()])
            k = self.first_index_with(need)
            return len(self.chain) if k is None else k

        return Assignment(
            rest=H,
            gens=gens,
            protected_from=protected_from,
            x0_at=self.stage_map,
            realized=lambda: len(self.chain) - 1,
        )


@dataclass
class FilterRun:
    source: FlexibleStructure
    target: FlexibleStructure
    h: Optional[PartialMap]
    iso: LazyPermutation

    @property
    def strategy(self) -> GenericStrategy:
        return self.iso.strategy

    @property
    def chain(self) -> list[Condition]:
        return self.strategy.chain

    @property
    def schedule(self) -> list[Requirement]:
        return self.strategy.schedule

    @property
    def g(self) -> PartialBijection:
        return self.strategy.g

    def unmet(self) -> list[Requirement]:
        """Scheduled requirements not met by the last chain element (should be empty)."""
        last = self.chain[-1]
        return [r for r in self.schedule if not r.met_by(last)]

    def p0_for(self, handles: Sequence, length: int) -> Optional[int]:
        """First chain index whose H contains ``handles`` and has at least ``length`` members."""
        for k, p in enumerate(self.chain):
            if p.n >= length and all(any(f is f2 for f2 in p.H) for f in handles):
                return k
        return None


def run_generic(
    s1: FlexibleStructure,
    s2: FlexibleStructure,
    h: Optional[PartialMap],
    handles: Sequence,
    horizon: int,
    name: str = "f",
) -> FilterRun:
    """Chain of conditions meeting every requirement up to ``horizon``; ``f = h o g``."""
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    check = verify_window_iso(s1, s2, h or LazyPermutation.identity(), horizon)
    if not check.ok:
        raise ValueError(f"h is not an isomorphism on the window: {check}")
    ctx = GenericContext(s1, h)
    iso = LazyPermutation(GenericStrategy(ctx, handles), name=name)
    iso.advance(horizon)
    return FilterRun(s1, s2, h, iso)


def iso_between(d1: StructureDescriptor, d2: StructureDescriptor) -> LazyPermutation:
    """``sigma2 o sigma1^-1``: an isomorphism between two scrambles of the same base."""
    if d1.kind != d2.kind:
        raise ValueError(f"no built-in isomorphism from {d1.kind} to {d2.kind}")
    s1, s2 = d1.sigma(), d2.sigma()
    inv1 = {b: a for a, b in s1.items()}
    support = set(s1) | set(s2)
    mapping = {x: s2.get(inv1.get(x, x), inv1.get(x, x)) for x in support}
    return LazyPermutation.finite_support(mapping, name="h")


def build_iso(d1: StructureDescriptor, d2: StructureDescriptor, handles: Sequence, horizon: int) -> FilterRun:
    return run_generic(build_structure(d1), build_structure(d2), iso_between(d1, d2), handles, horizon)


# --- properness witness ------------------------------------------------------------


def z_code(z: int) -> int:
    return 2 * z if z >= 0 else -2 * z - 1


def z_decode(n: int) -> int:
    return n // 2 if n % 2 == 0 else -(n + 1) // 2


def _shift_fwd(n: int) -> int:
    z = z_decode(n)
    return z_code(z + 2) if z % 2 == 0 else n


def _shift_bwd(n: int) -> int:
    z = z_decode(n)
    return z_code(z - 2) if z % 2 == 0 else n


@dataclass
class PropernessReport:
    window: int
    witness_fixed: int
    threshold: int
    words_audited: int = 0
    words_ok: int = 0
    max_word_fixed: int = 0
    max_word_bound: int = 0

    @property
    def ok(self) -> bool:
        return self.witness_fixed >= self.threshold and self.words_ok == self.words_audited

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["ok"] = self.ok
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def properness_witness(
    window: int, family: Sequence = (), max_len: int = 4
) -> tuple[LazyPermutation, PropernessReport]:
    """The even-shift permutation and its window evidence against a built family.

    Under the coding ``z >= 0 -> 2z``, ``z < 0 -> -2z - 1`` the witness moves
    every even ``z`` to ``z + 2`` and fixes the odd ones, so half the window is
    fixed.  Every nontrivial word of length at most ``max_len`` over ``family``
    is audited alongside.
    """
    from .independence import audit_words

    f = LazyPermutation.from_functions(_shift_fwd, _shift_bwd, name="shift")
    fixed = sum(1 for n in range(window + 1) if f.apply(n) == n)
    report = PropernessReport(window, fixed, window // 2 - 1)
    if family:
        for r in audit_words(family, max_len, window):
            report.words_audited += 1
            report.words_ok += r.ok
            report.max_word_fixed = max(report.max_word_fixed, len(r.fixed_points))
            report.max_word_bound = max(report.max_word_bound, r.bound or 0)
    return f, report


# --- iso files -----------------------------------------------------------------------


@dataclass
class IsoRecord:
    source: StructureDescriptor
    target: StructureDescriptor
    horizon: int
    handles: int
    g: list  # (a, b, chain index)
    f: PartialBijection

    def dumps(self) -> str:
        return (
            "iso\n"
            f"from: {self.source}\n"
            f"to: {self.target}\n"
            f"horizon: {self.horizon}\n"
            f"handles: {self.handles}\n"
            "g: " + ", ".join(f"{a}->{b}@{t}" for a, b, t in self.g) + "\n"
            f"f: {self.f}\n"
        )


def iso_record(run: FilterRun, d1: StructureDescriptor, d2: StructureDescriptor, horizon: int) -> IsoRecord:
    st = run.strategy
    g = sorted((a, b, st.tag[a]) for a, b in st._fwd.items())
    return IsoRecord(d1, d2, horizon, len(run.chain[-1].H), g, run.iso.fragment())


def load_iso(text: str) -> IsoRecord:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != "iso":
        raise ValueError("not an iso file")
    fields = {}
    for ln in lines[1:]:
        key, sep, value = ln.partition(":")
        if not sep:
            raise ValueError(f"bad iso line {ln!r}")
        fields[key.strip()] = value.strip()
    missing = {"from", "to", "horizon", "handles", "g", "f"} - set(fields)
    if missing:
        raise ValueError(f"iso file lacks {', '.join(sorted(missing))}")
    g = []
    for chunk in fields["g"].split(","):
        if chunk.strip():
            pair, tag = chunk.split("@")
            a, b = (int(v) for v in pair.split("->"))
            g.append((a, b, int(tag)))
    return IsoRecord(
        parse_descriptor(fields["from"]),
        parse_descriptor(fields["to"]),
        int(fields["horizon"]),
        int(fields["handles"]),
        g,
        parse_pairs(fields["f"]),
    )


def audit_iso_words(run: FilterRun, words: Sequence[Word], window: int) -> list[StrongIndependenceReport]:
    """Audit words with x0 read as the run's ``f`` and x_k as the k-th handle."""
    family = [run.iso] + list(run.strategy.handles)
    return [audit_fixed_points(family, w, window) for w in words]
