"""Itineraries: pushing a point forwards and backwards through the atoms of a word.

An itinerary has ``L' + 1`` slots ``t_0 .. t_L'``; slot ``i + 1`` is the image of
slot ``i`` under atom ``V_i``.  Where movement is undefined the slot holds the
sentinel :data:`C`, and once a ``C`` appears it fills the rest of that side.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from .pmap import AtomMapContext, atom_apply
from .words import AtomSequence


class _Undefined:
    __slots__ = ()

    def __repr__(self):
        return "c"

    __str__ = __repr__

    def __reduce__(self):
        return "C"


C = _Undefined()

Slot = Union[int, _Undefined]


@dataclass(frozen=True)
class Itinerary:
    slots: tuple  # slots[i] is t_i

    def __len__(self):
        return len(self.slots)

    def __getitem__(self, i) -> Slot:
        return self.slots[i]

    def naturals(self) -> list[tuple[int, int]]:
        return [(i, t) for i, t in enumerate(self.slots) if t is not C]

    def lines(self) -> list[str]:
        return [f"t[{i}] = {self.slots[i]}" for i in range(len(self.slots) - 1, -1, -1)]

    def __str__(self):
        return "(" + ", ".join(str(t) for t in reversed(self.slots)) + ")"


def itinerary_from(atoms: AtomSequence, ctx: AtomMapContext, i: int, a: int) -> Itinerary:
    """The unique itinerary with ``t_i = a``."""
    n = len(atoms.atoms)
    if not 0 <= i <= n:
        raise IndexError(f"slot {i} outside 0..{n}")
    seq = atoms.atoms
    slots: list[Slot] = [C] * (n + 1)
    slots[i] = a
    v: Optional[int] = a
    for k in range(i, n):
        v = atom_apply(seq[k], ctx, v, True)
        if v is None:
            break
        slots[k + 1] = v
    v = a
    for k in range(i - 1, -1, -1):
        v = atom_apply(seq[k], ctx, v, False)
        if v is None:
            break
        slots[k] = v
    return Itinerary(tuple(slots))


def set_of(t: Itinerary) -> frozenset[int]:
    return frozenset(s for s in t.slots if s is not C)


def find_collision(t: Itinerary) -> Optional[tuple[int, int]]:
    """Lexicographically least pair ``(i, j)``, ``i < j``, with ``t_i = t_j`` a natural."""
    slots = t.slots
    for i, a in enumerate(slots):
        if a is C:
            continue
        for j in range(i + 1, len(slots)):
            if slots[j] == a:
                return i, j
    return None


def path_value(
    atoms: AtomSequence, ctx: AtomMapContext, from_slot: int, to_slot: int, x: int
) -> Optional[int]:
    """Coordinate ``to_slot`` of the itinerary with ``t_from_slot = x`` (``None`` for c)."""
    seq = atoms.atoms
    v: Optional[int] = x
    if from_slot <= to_slot:
        for k in range(from_slot, to_slot):
            v = atom_apply(seq[k], ctx, v, True)
            if v is None:
                return None
    else:
        for k in range(from_slot - 1, to_slot - 1, -1):
            v = atom_apply(seq[k], ctx, v, False)
            if v is None:
                return None
    return v


def collision_from_slot(t: Itinerary, i0: int) -> Optional[int]:
    """Least ``j0 > i0`` with ``t_j0 = t_i0`` a natural."""
    a = t.slots[i0]
    if a is C:
        return None
    for j in range(i0 + 1, len(t.slots)):
        if t.slots[j] == a:
            return j
    return None


def trace_collision(
    t_new: Itinerary, atoms: AtomSequence, ctx_old: AtomMapContext
) -> Optional[tuple[int, int]]:
    """Find ``i0 < j0`` such that the old-context itinerary through ``(i0, t_new[i0])`` collides at ``(i0, j0)``.

    This is the certificate that a collision in ``t_new`` was already present
    before the maps were extended.  Returns ``None`` if no such pair exists.
    """
    for i0, a in enumerate(t_new.slots):
        if a is C:
            continue
        old = itinerary_from(atoms, ctx_old, i0, a)
        j0 = collision_from_slot(old, i0)
        if j0 is not None:
            return i0, j0
    return None
