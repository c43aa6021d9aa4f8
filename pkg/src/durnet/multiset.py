"""Finite multisets of places and of time-stamped tokens.

Two value types share the same multiset algebra: :class:`PlaceMultiset`
(elements are place names) and :class:`DurationalMarking` (elements are
``(place, stamp)`` token kinds). Both are immutable, hashable and iterate
in a canonical order (place name, then stamp), so they can serve as cache
keys and serialize deterministically.

Counts and stamps are plain Python ints, hence unbounded; a count of zero
is never stored (absent means zero).
"""

from __future__ import annotations

import sys
from typing import Iterable, Iterator, Mapping


class MultisetUnderflow(ValueError):
    """Subtraction would drive some count below zero."""


class NegativeStamp(ValueError):
    """An operation produced or received a negative time-stamp."""


def _intern_place(name: str) -> str:
    if not isinstance(name, str) or not name:
        raise ValueError(f"place name must be a non-empty string, got {name!r}")
    return sys.intern(name)


class _Multiset:
    """Shared multiset machinery; keys are validated by subclasses."""

    __slots__ = ("_entries", "_hash")

    def __init__(self, entries: Mapping | Iterable[tuple] = ()):
        d = {}
        items = entries.items() if isinstance(entries, Mapping) else entries
        for key, count in items:
            key = self._check_key(key)
            if not isinstance(count, int) or isinstance(count, bool):
                raise ValueError(f"count must be an int, got {count!r}")
            if count < 0:
                raise ValueError(f"negative count {count} for {key!r}")
            if count:
                d[key] = d.get(key, 0) + count
        object.__setattr__(self, "_entries", d)
        object.__setattr__(self, "_hash", None)

    def _check_key(self, key):
        raise NotImplementedError

    def __setattr__(self, name, value):
        raise AttributeError(f"{type(self).__name__} is immutable")

    # -- canonical views ---------------------------------------------------

    def items(self) -> list[tuple]:
        """Entries as (element, count) pairs in canonical order."""
        return sorted(self._entries.items())

    def key(self) -> tuple:
        """Canonical hashable form; equal multisets share one key."""
        return tuple(self.items())

    def __iter__(self) -> Iterator:
        """Iterate elements with multiplicity, in canonical order."""
        for elem, count in self.items():
            for _ in range(count):
                yield elem

    def __getitem__(self, elem) -> int:
        return self._entries.get(elem, 0)

    def __contains__(self, elem) -> bool:
        return elem in self._entries

    def __len__(self) -> int:
        """Total number of tokens (cardinality, with multiplicity)."""
        return sum(self._entries.values())

    def __bool__(self) -> bool:
        return bool(self._entries)

    def support(self) -> list:
        """Distinct elements, canonical order."""
        return sorted(self._entries)

    # -- algebra -----------------------------------------------------------

    def _same_kind(self, other):
        if type(other) is not type(self):
            raise TypeError(
                f"cannot combine {type(self).__name__} with {type(other).__name__}"
            )

    def add(self, other):
        """Point-wise sum (multiset union)."""
        self._same_kind(other)
        d = dict(self._entries)
        for key, count in other._entries.items():
            d[key] = d.get(key, 0) + count
        return self._wrap(d)

    def sub(self, other):
        """Point-wise difference; raises MultisetUnderflow unless other <= self."""
        self._same_kind(other)
        d = dict(self._entries)
        for key, count in other._entries.items():
            have = d.get(key, 0)
            if count > have:
                raise MultisetUnderflow(
                    f"cannot remove {count} x {key!r}: only {have} present"
                )
            if count == have:
                del d[key]
            else:
                d[key] = have - count
        return self._wrap(d)

    def leq(self, other) -> bool:
        """Point-wise order: every count of self is <= the count in other."""
        self._same_kind(other)
        return all(count <= other._entries.get(key, 0)
                   for key, count in self._entries.items())

    def _wrap(self, entries: dict):
        new = object.__new__(type(self))
        object.__setattr__(new, "_entries", entries)
        object.__setattr__(new, "_hash", None)
        return new

    __add__ = add
    __sub__ = sub
    __le__ = leq

    def __ge__(self, other) -> bool:
        self._same_kind(other)
        return other.leq(self)

    def __eq__(self, other) -> bool:
        return type(other) is type(self) and self._entries == other._entries

    def __ne__(self, other) -> bool:
        return not self.__eq__(other)

    def __hash__(self) -> int:
        h = self._hash
        if h is None:
            h = hash((type(self).__name__, self.key()))
            object.__setattr__(self, "_hash", h)
        return h

    def __repr__(self) -> str:
        return f"{type(self).__name__}({str(self)!r})"


class PlaceMultiset(_Multiset):
    """Ordinary marking: a finite multiset of places.

    Text form: whitespace-separated ``place`` or ``place*k`` atoms,
    ``~`` for the empty multiset (see ``durnet.textio``).
    """

    __slots__ = ()

    def _check_key(self, key):
        return _intern_place(key)

    @classmethod
    def of(cls, *places: str) -> "PlaceMultiset":
        """Build from elements listed with multiplicity: of('p','p','q')."""
        d: dict[str, int] = {}
        for p in places:
            p = _intern_place(p)
            d[p] = d.get(p, 0) + 1
        return cls(d)

    def __str__(self) -> str:
        if not self._entries:
            return "~"
        return " ".join(p if k == 1 else f"{p}*{k}" for p, k in self.items())


class DurationalMarking(_Multiset):
    """Durational marking: a finite multiset of (place, stamp) tokens.

    Text form: ``t@place`` or ``t@place*k`` atoms, ``~`` when empty.
    """

    __slots__ = ()

    def _check_key(self, key):
        place, stamp = key
        place = _intern_place(place)
        if not isinstance(stamp, int) or isinstance(stamp, bool):
            raise ValueError(f"stamp must be an int, got {stamp!r}")
        if stamp < 0:
            raise NegativeStamp(f"negative stamp {stamp} on place {place!r}")
        return (place, stamp)

    @classmethod
    def of(cls, *tokens: tuple[str, int]) -> "DurationalMarking":
        """Build from (place, stamp) tokens listed with multiplicity."""
        d: dict[tuple[str, int], int] = {}
        for tok in tokens:
            d[tok] = d.get(tok, 0) + 1
        return cls(d)

    @classmethod
    def at(cls, stamp: int, places: PlaceMultiset) -> "DurationalMarking":
        """Stamp every token of an ordinary multiset with the same time."""
        return cls({(p, stamp): k for p, k in places.items()})

    def untime(self) -> PlaceMultiset:
        """Erase all time-stamps, preserving per-place counts."""
        d: dict[str, int] = {}
        for (place, _stamp), count in self._entries.items():
            d[place] = d.get(place, 0) + count
        return PlaceMultiset(d)

    def stamps(self) -> set[int]:
        """The set (not multiset) of stamps occurring in the marking."""
        return {stamp for (_place, stamp) in self._entries}

    def max_stamp(self) -> int:
        """Greatest stamp present, or 0 for the empty marking."""
        return max(self.stamps(), default=0)

    def min_stamp(self) -> int:
        """Smallest stamp present, or 0 for the empty marking."""
        return min(self.stamps(), default=0)

    def shift(self, delta: int) -> "DurationalMarking":
        """Translate every stamp by delta; counts unchanged.

        Raises NegativeStamp if any stamp would drop below zero.
        """
        if delta == 0:
            return self
        d = {}
        for (place, stamp), count in self._entries.items():
            moved = stamp + delta
            if moved < 0:
                raise NegativeStamp(
                    f"shift by {delta} takes stamp {stamp} on {place!r} below zero"
                )
            d[(place, moved)] = count
        return self._wrap(d)

    def at_stamp(self, stamp: int) -> PlaceMultiset:
        """The ordinary multiset of places whose tokens carry this stamp."""
        d = {}
        for (place, s), count in self._entries.items():
            if s == stamp:
                d[place] = count
        return PlaceMultiset(d)

    def by_stamp(self) -> dict[int, PlaceMultiset]:
        """Per-stamp slices, one pass; keys ascending."""
        grouped: dict[int, dict[str, int]] = {}
        for (place, stamp), count in self._entries.items():
            grouped.setdefault(stamp, {})[place] = count
        return {stamp: PlaceMultiset(grouped[stamp]) for stamp in sorted(grouped)}

    def __str__(self) -> str:
        if not self._entries:
            return "~"
        return " ".join(
            f"{s}@{p}" if k == 1 else f"{s}@{p}*{k}"
            for (p, s), k in self.items()
        )


EMPTY_PLACES = PlaceMultiset()
EMPTY_MARKING = DurationalMarking()
