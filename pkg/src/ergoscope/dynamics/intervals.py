"""
Finite unions of left-closed, right-open intervals.

Works over any ordered number type; the tower construction uses
``Fraction`` endpoints so that unions, differences and measures are exact.
"""
from bisect import bisect_right
from typing import Iterable, Iterator, List, Sequence, Tuple, TypeVar

from ergoscope.core.helpers import pairs_to_json

N = TypeVar("N")
Piece = Tuple[N, N]


def _normalize(pieces: Iterable[Sequence[N]]) -> List[Piece]:
    ordered = sorted((p[0], p[1]) for p in pieces if p[1] > p[0])
    merged: List[Piece] = []
    for lo, hi in ordered:
        if merged and lo <= merged[-1][1]:
            if hi > merged[-1][1]:
                merged[-1] = (merged[-1][0], hi)
        else:
            merged.append((lo, hi))
    return merged


class IntervalUnion:
    """
    Normalized union of intervals ``[lo, hi)``.

    Pieces are kept sorted, pairwise disjoint and non-adjacent, so two unions
    describing the same set compare equal.
    """

    __slots__ = ("_pieces", "_los")

    def __init__(self, pieces: Iterable[Sequence[N]] = ()):
        self._pieces: Tuple[Piece, ...] = tuple(_normalize(pieces))
        self._los = [lo for lo, _ in self._pieces]

    @classmethod
    def interval(cls, lo: N, hi: N) -> "IntervalUnion":
        return cls([(lo, hi)])

    @classmethod
    def on_circle(cls, lo: N, hi: N) -> "IntervalUnion":
        """
        The arc from ``lo`` to ``hi`` on ``[0,1)``, split at 0 if it wraps.

        Arcs of length at least one cover the whole circle.
        """
        if hi - lo >= 1:
            return cls([(0 * lo, 0 * lo + 1)])
        shift = lo - (lo % 1)
        lo, hi = lo - shift, hi - shift
        if hi <= 1:
            return cls([(lo, hi)])
        return cls([(lo, 0 * lo + 1), (0 * lo, hi - 1)])

    @property
    def pieces(self) -> Tuple[Piece, ...]:
        return self._pieces

    def measure(self):
        total = 0
        for lo, hi in self._pieces:
            total += hi - lo
        return total

    def contains(self, x: N) -> bool:
        idx = bisect_right(self._los, x) - 1
        return idx >= 0 and x < self._pieces[idx][1]

    def union(self, other: "IntervalUnion") -> "IntervalUnion":
        return IntervalUnion(self._pieces + other._pieces)

    def intersection(self, other: "IntervalUnion") -> "IntervalUnion":
        out: List[Piece] = []
        a, b = self._pieces, other._pieces
        i = j = 0
        while i < len(a) and j < len(b):
            lo = max(a[i][0], b[j][0])
            hi = min(a[i][1], b[j][1])
            if lo < hi:
                out.append((lo, hi))
            if a[i][1] < b[j][1]:
                i += 1
            else:
                j += 1
        return IntervalUnion(out)

    def difference(self, other: "IntervalUnion") -> "IntervalUnion":
        out: List[Piece] = []
        cuts = other._pieces
        j = 0
        for lo, hi in self._pieces:
            cur = lo
            while j < len(cuts) and cuts[j][1] <= cur:
                j += 1
            k = j
            while k < len(cuts) and cuts[k][0] < hi:
                if cuts[k][0] > cur:
                    out.append((cur, cuts[k][0]))
                cur = max(cur, cuts[k][1])
                if cur >= hi:
                    break
                k += 1
            if cur < hi:
                out.append((cur, hi))
        return IntervalUnion(out)

    def is_disjoint(self, other: "IntervalUnion") -> bool:
        return not self.intersection(other)

    def translate(self, shift: N) -> "IntervalUnion":
        return IntervalUnion((lo + shift, hi + shift) for lo, hi in self._pieces)

    def endpoints(self) -> List[N]:
        return [x for piece in self._pieces for x in piece]

    def to_list(self):
        return pairs_to_json(self._pieces)

    def __iter__(self) -> Iterator[Piece]:
        return iter(self._pieces)

    def __len__(self) -> int:
        return len(self._pieces)

    def __bool__(self) -> bool:
        return bool(self._pieces)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, IntervalUnion):
            return NotImplemented
        return self._pieces == other._pieces

    def __hash__(self) -> int:
        return hash(self._pieces)

    def __repr__(self) -> str:
        shown = ", ".join(f"[{lo}, {hi})" for lo, hi in self._pieces[:4])
        more = f", ... ({len(self._pieces)} pieces)" if len(self._pieces) > 4 else ""
        return f"IntervalUnion({shown}{more})"


def union_all(unions: Iterable[IntervalUnion]) -> IntervalUnion:
    """Union of many unions in one normalization pass."""
    return IntervalUnion(p for u in unions for p in u.pieces)
