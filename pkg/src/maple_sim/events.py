"""Countable actions of a row-wise product accelerator.

Three kinds are computations (MAC, CSR compress/decompress, intersection) and
four are data movements between a MAC unit and successively more distant
storage.  Movement events may carry a tag naming the storage element involved
(e.g. ``"POB"``), so per-buffer traffic can be audited without widening the
cost categories.
"""

from __future__ import annotations

from collections import Counter
from enum import Enum
from typing import Iterator, Mapping, Optional


class EventKind(str, Enum):
    MAC_OP = "MacOp"
    COMPRESS_DECOMPRESS = "CompressDecompress"
    INTERSECTION = "Intersection"
    L0_MAC = "L0Mac"
    PE_MAC = "PeMac"
    L1_MAC = "L1Mac"
    L2_MAC = "L2Mac"

    def __str__(self) -> str:
        return self.value

    @classmethod
    def parse(cls, name: str) -> "EventKind":
        """Look up a kind by its canonical (case-sensitive) name."""
        try:
            return cls(name)
        except ValueError:
            raise KeyError(name) from None


COMPUTE_KINDS = (EventKind.MAC_OP, EventKind.COMPRESS_DECOMPRESS, EventKind.INTERSECTION)
MOVEMENT_KINDS = (EventKind.L0_MAC, EventKind.PE_MAC, EventKind.L1_MAC, EventKind.L2_MAC)


class EventCounts:
    """Non-negative tallies per :class:`EventKind`, with optional per-tag detail.

    Tagged counts are a refinement: ``add(kind, n, tag)`` increments both the
    kind total and the ``(kind, tag)`` entry.
    """

    __slots__ = ("_counts", "_tags")

    def __init__(self, counts: Optional[Mapping] = None, tags: Optional[Mapping] = None):
        self._counts = Counter({k: 0 for k in EventKind})
        self._tags: Counter = Counter()
        for kind, n in (counts or {}).items():
            self.add(EventKind(kind), n)
        for (kind, tag), n in (tags or {}).items():
            if n < 0:
                raise ValueError("event counts must be non-negative")
            self._tags[(EventKind(kind), tag)] += n

    def add(self, kind: EventKind, n: int = 1, tag: Optional[str] = None) -> None:
        if n < 0:
            raise ValueError("event counts must be non-negative")
        self._counts[kind] += n
        if tag is not None:
            self._tags[(kind, tag)] += n

    def __getitem__(self, kind: EventKind) -> int:
        return self._counts[EventKind(kind)]

    def tagged(self, kind: EventKind, tag: str) -> int:
        return self._tags[(EventKind(kind), tag)]

    @property
    def tags(self) -> dict[tuple[EventKind, str], int]:
        return dict(sorted(self._tags.items(), key=lambda kv: (kv[0][0].value, kv[0][1])))

    def items(self) -> Iterator[tuple[EventKind, int]]:
        return ((k, self._counts[k]) for k in EventKind)

    def total(self) -> int:
        return sum(self._counts.values())

    def __iadd__(self, other: "EventCounts") -> "EventCounts":
        self._counts.update(other._counts)
        self._tags.update(other._tags)
        return self

    def __add__(self, other: "EventCounts") -> "EventCounts":
        out = self.copy()
        out += other
        return out

    def copy(self) -> "EventCounts":
        out = EventCounts()
        out._counts = Counter(self._counts)
        out._tags = Counter(self._tags)
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, EventCounts):
            return NotImplemented
        return dict(self.items()) == dict(other.items()) and +self._tags == +other._tags

    def as_dict(self) -> dict[str, int]:
        return {k.value: n for k, n in self.items()}

    def __repr__(self) -> str:
        body = ", ".join(f"{k.value}={n}" for k, n in self.items() if n)
        return f"EventCounts({body})"
