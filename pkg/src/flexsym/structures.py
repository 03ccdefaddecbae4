"""Inductively flexible structures on the naturals.

Each structure carries its family of finite partial automorphisms through
``contains`` and the candidate streams, which list every legal one-point
extension in increasing order and never run dry.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from itertools import count, product
from math import isqrt
from typing import Iterable, Iterator, Optional, Sequence

from .pmap import PartialBijection, PartialMap, cycles_to_mapping


class FlexibleStructure:
    kind = "abstract"

    def contains(self, pb: PartialBijection) -> bool:
        raise NotImplementedError

    def right_candidates(self, pb: PartialBijection, a: int) -> Iterator[int]:
        raise NotImplementedError

    def left_candidates(self, pb: PartialBijection, b: int) -> Iterator[int]:
        if b in pb.range():
            raise ValueError(f"{b} is already in the range")
        return self.right_candidates(pb.inverse(), b)

    def relation_ids(self, points: Iterable[int]) -> list[tuple[str, int]]:
        """Relations (name, arity) that can hold on ``points``."""
        return []

    def rel_eval(self, rel: str, args: Sequence[int]) -> bool:
        raise KeyError(rel)

    def _check_extendable(self, pb: PartialBijection, a: int) -> None:
        if a in pb.domain():
            raise ValueError(f"{a} is already in the domain")


class TrivialStructure(FlexibleStructure):
    """No relations; every finite partial injection is allowed."""

    kind = "trivial"

    def contains(self, pb):
        return True

    def right_candidates(self, pb, a):
        self._check_extendable(pb, a)
        ran = pb.range()
        return (b for b in count() if b not in ran)


# --- Q-type order ---------------------------------------------------------------


class _CalkinWilf:
    """Memoised Calkin-Wilf sequence 1, 1/2, 2, 1/3, 3/2, ..."""

    def __init__(self):
        self._seq = [Fraction(1)]

    def __getitem__(self, k: int) -> Fraction:
        seq = self._seq
        while len(seq) <= k:
            q = seq[-1]
            seq.append(1 / (2 * (q.numerator // q.denominator) - q + 1))
        return seq[k]


_CW = _CalkinWilf()
_RATIONALS: list[Fraction] = []


def rational_of(n: int) -> Fraction:
    """Canonical bijection from the naturals onto the rationals: 0, cw0, -cw0, cw1, -cw1, ..."""
    while len(_RATIONALS) <= n:
        m = len(_RATIONALS)
        if m == 0:
            _RATIONALS.append(Fraction(0))
        else:
            q = _CW[(m - 1) // 2]
            _RATIONALS.append(q if m % 2 else -q)
    return _RATIONALS[n]


class QOrder(FlexibleStructure):
    """The naturals ordered as the rationals via :func:`rational_of`."""

    kind = "qorder"

    @staticmethod
    def less(a: int, b: int) -> bool:
        return rational_of(a) < rational_of(b)

    def contains(self, pb):
        pairs = pb.pairs()
        ra = [(rational_of(a), rational_of(b)) for a, b in pairs]
        for (x, y), (x2, y2) in zip(sorted(ra), sorted(ra)[1:]):
            if not y < y2:
                return False
        return True

    def _interval(self, pb: PartialBijection, a: int) -> tuple[Optional[Fraction], Optional[Fraction]]:
        r = rational_of(a)
        lo = hi = None
        for x, y in pb.pairs():
            rx, ry = rational_of(x), rational_of(y)
            if rx < r:
                lo = ry if lo is None or ry > lo else lo
            else:
                hi = ry if hi is None or ry < hi else hi
        return lo, hi

    def right_candidates(self, pb, a):
        self._check_extendable(pb, a)
        lo, hi = self._interval(pb, a)
        for b in count():
            rb = rational_of(b)
            if (lo is None or lo < rb) and (hi is None or rb < hi):
                yield b

    def relation_ids(self, points):
        return [("<", 2)]

    def rel_eval(self, rel, args):
        if rel != "<":
            raise KeyError(rel)
        a, b = args
        return self.less(a, b)


# --- aleph_0-sections ------------------------------------------------------------


def cantor_unpair(n: int) -> tuple[int, int]:
    w = (isqrt(8 * n + 1) - 1) // 2
    y = n - w * (w + 1) // 2
    return w - y, y


def cantor_pair(x: int, y: int) -> int:
    return (x + y) * (x + y + 1) // 2 + y


def section_class(n: int) -> int:
    return cantor_unpair(n)[0]


class Sections(FlexibleStructure):
    """Partition of the naturals into the infinite classes ``{pair(k, y) : y}``.

    Presented as unary relations ``R<k>``; a partial map is allowed iff it
    preserves the class of every point.
    """

    kind = "sections"

    def contains(self, pb):
        return all(section_class(a) == section_class(b) for a, b in pb.pairs())

    def right_candidates(self, pb, a):
        self._check_extendable(pb, a)
        k = section_class(a)
        ran = pb.range()
        return (b for b in (cantor_pair(k, y) for y in count()) if b not in ran)

    def relation_ids(self, points):
        return [(f"R{k}", 1) for k in sorted({section_class(p) for p in points})]

    def rel_eval(self, rel, args):
        if not rel.startswith("R"):
            raise KeyError(rel)
        (a,) = args
        return section_class(a) == int(rel[1:])


# --- Rado graph -----------------------------------------------------------------


def rado_edge(m: int, n: int) -> bool:
    if m == n:
        return False
    lo, hi = (m, n) if m < n else (n, m)
    return bool((hi >> lo) & 1)


_RADO_BIT_LIMIT = 1 << 16


def _next_match(x: int, mask: int, val: int) -> int:
    """Least ``y >= x`` with ``y & mask == val``."""
    while True:
        diff = (x ^ val) & mask
        if not diff:
            return x
        hb = diff.bit_length() - 1
        if (val >> hb) & 1:
            x = ((x >> hb) | 1) << hb
        else:
            x = ((x >> hb) + 1) << hb


def _rado_interval(lo, hi, mask, val, upper) -> Iterator[int]:
    """Points ``b`` in ``[lo, hi)`` with bits ``mask`` equal to ``val`` and, for each
    ``(y, e)`` in ``upper`` (all ``y >= hi``), bit ``b`` of ``y`` equal to ``e``."""
    trues = [y for y, e in upper if e]
    if trues:
        # b must be a set bit of every required neighbour above it
        y0 = min(trues, key=int.bit_length)
        p = lo
        while hi is None or p < hi:
            rest = y0 >> p
            if not rest:
                return
            p += (rest & -rest).bit_length() - 1
            if hi is not None and p >= hi:
                return
            if p & mask == val and all(((y >> p) & 1) == e for y, e in upper):
                yield p
            p += 1
        return
    x = lo
    while True:
        x = _next_match(x, mask, val)
        if hi is not None and x >= hi:
            return
        if all(not (y >> x) & 1 for y, _ in upper):
            yield x
        x += 1


class Rado(FlexibleStructure):
    """The random graph: ``m < n`` adjacent iff bit ``m`` of ``n`` is set."""

    kind = "rado"

    def contains(self, pb):
        pairs = pb.pairs()
        for i, (a, b) in enumerate(pairs):
            for a2, b2 in pairs[i + 1 :]:
                if rado_edge(a, a2) != rado_edge(b, b2):
                    return False
        return True

    def right_candidates(self, pb, a):
        self._check_extendable(pb, a)
        want = {y: rado_edge(a, x) for x, y in pb.pairs()}
        cuts = sorted(want)
        # the open intervals between range points, in increasing order
        bounds = [-1] + cuts + [None]
        for k in range(len(bounds) - 1):
            lo, hi = bounds[k] + 1, bounds[k + 1]
            mask = val = 0
            for y in cuts[:k]:
                if y >= _RADO_BIT_LIMIT:
                    if want[y]:
                        raise OverflowError(f"next Rado candidate for {a} needs bit {y} set")
                    # a zero bit that far up holds for every representable b
                    continue
                mask |= 1 << y
                if want[y]:
                    val |= 1 << y
            upper = [(y, want[y]) for y in cuts[k:]]
            yield from _rado_interval(lo, hi, mask, val, upper)

    def relation_ids(self, points):
        return [("E", 2)]

    def rel_eval(self, rel, args):
        if rel != "E":
            raise KeyError(rel)
        return rado_edge(*args)


# --- transport along a finite-support scramble -----------------------------------


class Transported(FlexibleStructure):
    """``base`` moved along the finite-support permutation ``sigma``.

    ``R'(sigma x, sigma y)`` iff ``R(x, y)``, so ``sigma`` is an isomorphism
    from ``base`` onto this structure.
    """

    def __init__(self, base: FlexibleStructure, sigma: dict[int, int]):
        self.base = base
        self.sigma = {a: b for a, b in sigma.items() if a != b}
        self.sigma_inv = {b: a for a, b in self.sigma.items()}
        self.kind = base.kind
        self._support_max = max(self.sigma, default=-1)

    def fwd(self, a: int) -> int:
        return self.sigma.get(a, a)

    def inv(self, a: int) -> int:
        return self.sigma_inv.get(a, a)

    def _pull(self, pb: PartialBijection) -> PartialBijection:
        return PartialBijection((self.inv(a), self.inv(b)) for a, b in pb.pairs())

    def contains(self, pb):
        return self.base.contains(self._pull(pb))

    def right_candidates(self, pb, a):
        base_stream = self.base.right_candidates(self._pull(pb), self.inv(a))
        head = []
        for b in base_stream:
            if b > self._support_max:
                break
            head.append(self.fwd(b))
        else:  # pragma: no cover - base streams are infinite
            return
        yield from sorted(head)
        # sigma is the identity above its support
        yield b
        yield from base_stream

    def relation_ids(self, points):
        return self.base.relation_ids([self.inv(p) for p in points])

    def rel_eval(self, rel, args):
        return self.base.rel_eval(rel, [self.inv(a) for a in args])


# --- descriptors -------------------------------------------------------------------

_BASES = {
    "trivial": TrivialStructure,
    "qorder": QOrder,
    "sections": Sections,
    "rado": Rado,
}

_CYCLE = re.compile(r"\(([^()]*)\)")


@dataclass(frozen=True)
class StructureDescriptor:
    kind: str
    scramble: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        if self.kind not in _BASES:
            raise ValueError(f"unknown structure kind {self.kind!r}")
        cycles_to_mapping(self.scramble)

    def sigma(self) -> dict[int, int]:
        return cycles_to_mapping(self.scramble)

    def __str__(self):
        cycles = "".join("(" + " ".join(map(str, c)) + ")" for c in self.scramble)
        return f"kind={self.kind};scramble={cycles}"


def parse_descriptor(text: str) -> StructureDescriptor:
    """Parse ``kind=qorder;scramble=(0 3)(1 5)``; a bare kind name is also accepted."""
    fields = {}
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            fields.setdefault("kind", part)
            continue
        key, value = part.split("=", 1)
        fields[key.strip()] = value.strip()
    unknown = set(fields) - {"kind", "scramble"}
    if unknown or "kind" not in fields:
        raise ValueError(f"bad structure descriptor {text!r}")
    scramble_text = fields.get("scramble", "")
    if _CYCLE.sub("", scramble_text).strip():
        raise ValueError(f"bad scramble {scramble_text!r}")
    cycles = []
    for body in _CYCLE.findall(scramble_text):
        try:
            cyc = tuple(int(t) for t in body.replace(",", " ").split())
        except ValueError:
            raise ValueError(f"bad cycle ({body})") from None
        if len(cyc) > 1:
            cycles.append(cyc)
    return StructureDescriptor(fields["kind"], tuple(cycles))


def build_structure(d: StructureDescriptor) -> FlexibleStructure:
    base = _BASES[d.kind]()
    sigma = d.sigma()
    return Transported(base, sigma) if sigma else base


# --- window isomorphism check ---------------------------------------------------------


@dataclass(frozen=True)
class WindowIsoReport:
    ok: bool
    window: int
    relation: Optional[str] = None
    args: Optional[tuple[int, ...]] = None
    checked: int = 0

    def __str__(self):
        if self.ok:
            return f"OK window={self.window} checked={self.checked}"
        inner = ",".join(map(str, self.args))
        return f"FAIL rel{self.relation} at ({inner})"


def verify_window_iso(
    s1: FlexibleStructure, s2: FlexibleStructure, f: PartialMap, n: int
) -> WindowIsoReport:
    """Check ``R(a..) <-> R'(f a..)`` for every relation and tuple from ``{0..n}``."""
    window = range(n + 1)
    image = []
    for a in window:
        b = f.apply(a)
        if b is None:
            return WindowIsoReport(False, n, "dom", (a,))
        image.append(b)
    rels = dict(s1.relation_ids(window))
    rels.update(s2.relation_ids(image))
    checked = 0
    for rel, arity in sorted(rels.items()):
        for args in product(window, repeat=arity):
            checked += 1
            mapped = [image[a] for a in args]
            if s1.rel_eval(rel, args) != s2.rel_eval(rel, mapped):
                return WindowIsoReport(False, n, rel, tuple(args), checked)
    return WindowIsoReport(True, n, checked=checked)
