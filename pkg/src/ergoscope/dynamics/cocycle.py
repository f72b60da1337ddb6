"""
Piecewise-affine skew products over an interval exchange.

An :class:`AffineSkew` stores the pair ``(T^m, S_m f)`` for a roof that is
affine on each exchanged interval: on every piece ``[lo, hi)`` the base map
is ``x + shift`` and the Birkhoff sum is ``intercept + slope * x``. Both
roof families of the tower construction have this form, so powers of the
skew product give the Birkhoff cocycle in closed form.
"""
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, List, Sequence, Tuple

from ergoscope.core.exceptions import InvalidParams, OutOfDomain
from ergoscope.dynamics.intervals import IntervalUnion
from ergoscope.utils import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class SkewPiece:
    """``x -> (x + shift, intercept + slope * x)`` on ``[lo, hi)``."""
    lo: Fraction
    hi: Fraction
    shift: Fraction
    intercept: Fraction
    slope: Fraction

    def sum_at(self, x):
        return self.intercept + self.slope * x

    def same_action(self, other: "SkewPiece") -> bool:
        return (
            self.shift == other.shift
            and self.intercept == other.intercept
            and self.slope == other.slope
        )

    def restrict(self, lo, hi) -> "SkewPiece":
        return SkewPiece(lo, hi, self.shift, self.intercept, self.slope)


class AffineSkew:
    """
    Piecewise map on ``[0, total)`` carrying a shift and an affine sum.

    Pieces are sorted, contiguous, and adjacent pieces with identical action
    are merged.
    """

    def __init__(self, pieces: Sequence[SkewPiece]):
        merged: List[SkewPiece] = []
        for piece in sorted(pieces, key=lambda p: p.lo):
            if piece.hi <= piece.lo:
                continue
            if merged and merged[-1].hi == piece.lo and merged[-1].same_action(piece):
                merged[-1] = merged[-1].restrict(merged[-1].lo, piece.hi)
            else:
                merged.append(piece)
        if not merged:
            raise InvalidParams("AffineSkew needs at least one non-empty piece")
        for left, right in zip(merged, merged[1:]):
            if left.hi != right.lo:
                raise InvalidParams(f"Pieces are not contiguous at {left.hi} / {right.lo}")
        self._pieces: Tuple[SkewPiece, ...] = tuple(merged)
        self._los = [p.lo for p in self._pieces]

    @classmethod
    def identity(cls, lo, hi) -> "AffineSkew":
        zero = Fraction(0)
        return cls([SkewPiece(lo, hi, zero, zero, zero)])

    @property
    def pieces(self) -> Tuple[SkewPiece, ...]:
        return self._pieces

    @property
    def domain(self) -> Tuple[Fraction, Fraction]:
        return self._pieces[0].lo, self._pieces[-1].hi

    def __len__(self) -> int:
        return len(self._pieces)

    def piece_at(self, x) -> SkewPiece:
        lo, hi = self.domain
        if not lo <= x < hi:
            raise OutOfDomain(f"x={x} outside [{lo}, {hi})")
        return self._pieces[bisect_right(self._los, x) - 1]

    def evaluate(self, x) -> Tuple[Fraction, Fraction]:
        """``(T^m x, S_m f(x))``."""
        piece = self.piece_at(x)
        return x + piece.shift, piece.sum_at(x)

    def compose(self, inner: "AffineSkew") -> "AffineSkew":
        """
        Apply ``inner`` first, then ``self``.

        For ``inner = (T^k, S_k)`` and ``self = (T^m, S_m)`` the result is
        ``(T^{m+k}, S_k + S_m o T^k)``.
        """
        out: List[SkewPiece] = []
        outer = self._pieces
        los = self._los
        for g in inner.pieces:
            img_lo, img_hi = g.lo + g.shift, g.hi + g.shift
            j = bisect_right(los, img_lo) - 1
            if j < 0:
                raise OutOfDomain(f"Image {img_lo} of inner piece leaves the domain")
            while j < len(outer) and outer[j].lo < img_hi:
                f = outer[j]
                lo = max(g.lo, f.lo - g.shift)
                hi = min(g.hi, f.hi - g.shift)
                if lo < hi:
                    out.append(SkewPiece(
                        lo,
                        hi,
                        g.shift + f.shift,
                        g.intercept + f.intercept + f.slope * g.shift,
                        g.slope + f.slope,
                    ))
                j += 1
        return AffineSkew(out)

    def power(self, m: int) -> "AffineSkew":
        """``(T^m, S_m f)`` by binary exponentiation."""
        if m < 0:
            raise InvalidParams(f"Only non-negative powers are supported, got {m}")
        lo, hi = self.domain
        result = AffineSkew.identity(lo, hi)
        base = self
        while m:
            if m & 1:
                result = base.compose(result)
            m >>= 1
            if m:
                base = base.compose(base)
        logger.debug(f"Skew power computed with {len(result)} pieces")
        return result

    def pieces_over(self, union: IntervalUnion) -> Iterator[SkewPiece]:
        """Maximal pieces restricted to ``union``, in increasing order."""
        pieces = self._pieces
        i = 0
        for lo, hi in union:
            while i < len(pieces) and pieces[i].hi <= lo:
                i += 1
            j = i
            while j < len(pieces) and pieces[j].lo < hi:
                p = pieces[j]
                a, b = max(lo, p.lo), min(hi, p.hi)
                if a < b:
                    yield p.restrict(a, b)
                j += 1

    def __repr__(self) -> str:
        lo, hi = self.domain
        return f"AffineSkew([{lo}, {hi}), {len(self._pieces)} pieces)"
