"""
Continued fractions, circle rotations and Ostrowski numeration.

The rotation number is carried by its partial quotients. Exact statements
(convergent bounds, partition lengths, orbit minima) are evaluated with the
convergent ``p_N/q_N`` of the full stored quotient list standing in for
``alpha``; everything up to index ``N-1`` is then identical to the
irrational being modelled.
"""
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from mpmath import mp, mpf

from ergoscope.config import get_settings
from ergoscope.core.exceptions import (
    DepthExceeded,
    EmptyInput,
    InvalidParams,
    OutOfRange,
    PrecisionExhausted,
    SingularOrbit,
)
from ergoscope.utils import get_logger

logger = get_logger(__name__)

RealLike = Union[int, float, Fraction, str, mpf]


def _precision(prec_bits: Optional[int]) -> int:
    return get_settings().runtime.precision_bits if prec_bits is None else prec_bits


@dataclass(frozen=True)
class ContinuedFraction:
    """
    Partial quotients ``a_1, a_2, ...`` of a number in (0, 1).

    Attributes:
        quotients: positive integers, ``a_0 = 0`` implicit
        planted: spike positions ``n_k`` when built by :func:`make_ckl`
    """
    quotients: Tuple[int, ...]
    planted: Tuple[int, ...] = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "quotients", tuple(int(a) for a in self.quotients))
        if any(a < 1 for a in self.quotients):
            raise InvalidParams(
                "Partial quotients must be positive integers",
                details=str(self.quotients[:20]),
            )

    @property
    def depth(self) -> int:
        return len(self.quotients)

    def a(self, n: int) -> int:
        """The quotient ``a_n`` (1-based)."""
        if not 1 <= n <= self.depth:
            raise DepthExceeded(f"a_{n} requested but depth is {self.depth}")
        return self.quotients[n - 1]

    @cached_property
    def _table(self) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
        p = [0]
        q = [1]
        p_prev, q_prev = 1, 0
        for a in self.quotients:
            p_next = a * p[-1] + p_prev
            q_next = a * q[-1] + q_prev
            p_prev, q_prev = p[-1], q[-1]
            p.append(p_next)
            q.append(q_next)
        return tuple(p), tuple(q)

    def p(self, n: int) -> int:
        return convergents(self, n)[0]

    def q(self, n: int) -> int:
        return convergents(self, n)[1]

    @property
    def denominators(self) -> Tuple[int, ...]:
        """``q_0, q_1, ..., q_N``."""
        return self._table[1]

    @property
    def alpha(self) -> Fraction:
        """The rational ``p_N / q_N`` standing in for alpha."""
        p, q = self._table
        return Fraction(p[-1], q[-1])

    def value(self, prec_bits: Optional[int] = None) -> mpf:
        """Real-valued view of alpha at the requested binary precision."""
        alpha = self.alpha
        prec_bits = _precision(prec_bits)
        with mp.workprec(prec_bits):
            return mpf(alpha.numerator) / alpha.denominator

    def largest_index_below(self, bound: int) -> int:
        """Largest ``n`` with ``q_n <= bound``."""
        qs = self.denominators
        n = 0
        while n + 1 < len(qs) and qs[n + 1] <= bound:
            n += 1
        return n

    def to_dict(self) -> Dict[str, Any]:
        return {"quotients": list(self.quotients), "planted": list(self.planted)}


@dataclass(frozen=True)
class OrbitMinima:
    """
    Closest approaches of a finite orbit to 0.

    Attributes:
        minus: min over j of ``x + j*alpha mod 1``
        plus: min over j of ``1 - (x + j*alpha mod 1)``
        argmin_index: j attaining ``minus``
        plus_index: j attaining ``plus``
    """
    minus: Fraction
    plus: Fraction
    argmin_index: int
    plus_index: int = 0

    @property
    def closest(self) -> Fraction:
        return min(self.minus, self.plus)

    @property
    def closest_index(self) -> int:
        return self.argmin_index if self.minus <= self.plus else self.plus_index


@dataclass(frozen=True)
class DiophantineWitness:
    """Indices ``n_k`` satisfying the spike condition for a given ``(K, L, c)``."""
    indices: Tuple[int, ...]
    c: float
    K: int
    L: int

    @property
    def window(self) -> Tuple[int, int]:
        s = self.K ** 2 + self.L ** 2
        return 100 * s, 200 * s

    def to_dict(self) -> Dict[str, Any]:
        return {"indices": list(self.indices), "c": self.c, "K": self.K, "L": self.L}


def _mp_real(alpha: RealLike) -> mpf:
    if isinstance(alpha, Fraction):
        return mpf(alpha.numerator) / alpha.denominator
    return mpf(alpha)


def cf_expand(alpha: RealLike, depth: int, prec_bits: Optional[int] = None) -> ContinuedFraction:
    """
    Expand a real number in (0, 1) into ``depth`` partial quotients.

    A running bound on the absolute error of the remainder is carried through
    every Gauss-map step; extraction stops with :class:`PrecisionExhausted`
    as soon as the next digit is no longer determined.

    Args:
        alpha: the number (mpmath real, decimal string, Fraction or float)
        depth: number of quotients to extract
        prec_bits: working precision in bits (default ``runtime.precision_bits``)

    Returns:
        The continued fraction with exactly ``depth`` quotients
    """
    if depth < 1:
        raise InvalidParams(f"depth must be at least 1, got {depth}")

    prec_bits = _precision(prec_bits)
    with mp.workprec(prec_bits):
        x = _mp_real(alpha)
        if not 0 < x < 1:
            raise InvalidParams(f"alpha must lie in (0, 1), got {mp.nstr(x, 20)}")
        err = mpf(2) ** (-(prec_bits - 4))
        quotients: List[int] = []
        for step in range(depth):
            if x <= err:
                raise PrecisionExhausted(
                    f"Remainder below precision floor after {step} quotients",
                    details=f"requested depth {depth}, precision {prec_bits} bits",
                )
            y = 1 / x
            err = err / (x * (x - err))
            a = int(mp.floor(y))
            frac = y - a
            if frac <= err or 1 - frac <= err:
                raise PrecisionExhausted(
                    f"Quotient a_{step + 1} not determined at {prec_bits} bits",
                    details=f"extracted {step} of {depth} quotients",
                )
            quotients.append(a)
            x = frac

    logger.debug(f"Expanded alpha to depth {depth}: {quotients[:8]}...")
    return ContinuedFraction(tuple(quotients))


def convergents(cf: ContinuedFraction, n: int) -> Tuple[int, int]:
    """``(p_n, q_n)`` for ``0 <= n <= depth``."""
    if not 0 <= n <= cf.depth:
        raise DepthExceeded(
            f"Convergent {n} requested but only {cf.depth} quotients are stored"
        )
    p, q = cf._table
    return p[n], q[n]


def alpha_from_quotients(quotients: Sequence[int]) -> Tuple[Fraction, Fraction]:
    """
    The rational ``p_N / q_N`` of a quotient list and its error guarantee.

    Any irrational whose expansion starts with ``quotients`` lies within the
    returned bound ``1 / q_N**2`` of the returned value.
    """
    if not quotients:
        raise EmptyInput("Quotient list is empty")
    cf = ContinuedFraction(tuple(quotients))
    q_n = cf.denominators[-1]
    return cf.alpha, Fraction(1, q_n * q_n)


def rational_quotients(value: Fraction) -> List[int]:
    """Euclid expansion ``[a_1, ..., a_k]`` of a rational in (0, 1)."""
    value = Fraction(value)
    if not 0 < value < 1:
        raise InvalidParams(f"Expected a rational in (0, 1), got {value}")
    num, den = value.numerator, value.denominator
    quotients = []
    while num:
        a, r = divmod(den, num)
        quotients.append(a)
        den, num = num, r
    return quotients


def random_quotients(depth: int, seed: int, max_quotient: int = 20) -> ContinuedFraction:
    """Seeded random quotient sequence with entries in ``[1, max_quotient]``."""
    rng = np.random.default_rng(seed)
    draws = rng.integers(1, max_quotient + 1, size=depth)
    return ContinuedFraction(tuple(int(a) for a in draws))


def circle_norm(x):
    """Distance to the nearest integer, ``min(x mod 1, 1 - x mod 1)``."""
    r = x % 1
    return min(r, 1 - r)


def ostrowski_decompose(ell: int, cf: ContinuedFraction) -> List[int]:
    """
    Greedy Ostrowski digits ``b_0, ..., b_{N-1}`` with ``ell = sum b_i q_i``.

    The greedy choice yields ``0 <= b_i <= a_{i+1}`` (``b_0 < a_1``) and the
    carry rule ``b_i = a_{i+1} => b_{i-1} = 0``.
    """
    qs = cf.denominators
    if not 0 <= ell < qs[-1]:
        raise OutOfRange(f"ell={ell} outside [0, q_N) = [0, {qs[-1]})")

    digits = [0] * cf.depth
    rest = ell
    for i in range(cf.depth - 1, -1, -1):
        if qs[i] <= rest:
            digits[i], rest = divmod(rest, qs[i])
    return digits


def ostrowski_value(digits: Sequence[int], cf: ContinuedFraction) -> int:
    """Inverse of :func:`ostrowski_decompose`."""
    qs = cf.denominators
    return sum(b * qs[i] for i, b in enumerate(digits))


def ostrowski_is_admissible(digits: Sequence[int], cf: ContinuedFraction) -> bool:
    """Check the digit bounds and the carry rule."""
    for i, b in enumerate(digits):
        limit = cf.a(i + 1) - (1 if i == 0 else 0)
        if not 0 <= b <= limit:
            return False
        if i > 0 and b == cf.a(i + 1) and digits[i - 1] != 0:
            return False
    return True


def orbit_min_distance(
    x,
    cf: ContinuedFraction,
    n: int,
    exact: bool = True,
    prec_bits: Optional[int] = None,
) -> OrbitMinima:
    """
    Closest approach to 0 of ``x, x + alpha, ..., x + (q_n - 1) alpha``.

    With ``exact`` the scan is done in integer arithmetic against the
    rational surrogate of alpha; otherwise mpmath at ``prec_bits``.
    """
    _, q_n = convergents(cf, n)

    if exact:
        x = Fraction(x)
        alpha = cf.alpha
        modulus = x.denominator * alpha.denominator
        start = x.numerator * alpha.denominator
        step = alpha.numerator * x.denominator
        best_minus = best_plus = None
        minus_j = plus_j = 0
        for j in range(q_n):
            r = (start + j * step) % modulus
            if r == 0:
                raise SingularOrbit(f"x + {j}*alpha is 0 mod 1", details=f"x={x}")
            plus = modulus - r
            if best_minus is None or r < best_minus:
                best_minus, minus_j = r, j
            if best_plus is None or plus < best_plus:
                best_plus, plus_j = plus, j
        return OrbitMinima(
            minus=Fraction(best_minus, modulus),
            plus=Fraction(best_plus, modulus),
            argmin_index=minus_j,
            plus_index=plus_j,
        )

    prec_bits = _precision(prec_bits)
    with mp.workprec(prec_bits):
        alpha = cf.value(prec_bits)
        x0 = _mp_real(x)
        best_minus = best_plus = None
        minus_j = plus_j = 0
        for j in range(q_n):
            y = mp.frac(x0 + j * alpha)
            if y == 0:
                raise SingularOrbit(f"x + {j}*alpha is 0 mod 1", details=f"x={x}")
            plus = 1 - y
            if best_minus is None or y < best_minus:
                best_minus, minus_j = y, j
            if best_plus is None or plus < best_plus:
                best_plus, plus_j = plus, j
        return OrbitMinima(
            minus=Fraction(str(best_minus)),
            plus=Fraction(str(best_plus)),
            argmin_index=minus_j,
            plus_index=plus_j,
        )


def convergent_bounds(cf: ContinuedFraction, n: int) -> Dict[str, Any]:
    """
    Exact check of ``1/(2 q_n q_{n+1}) <= ||alpha - p_n/q_n|| <= 1/(q_n q_{n+1})``.
    """
    if n + 1 >= cf.depth:
        raise DepthExceeded(f"Need n + 1 < depth ({cf.depth}) for an exact check, got n={n}")
    p_n, q_n = convergents(cf, n)
    q_next = cf.q(n + 1)
    distance = circle_norm(cf.alpha - Fraction(p_n, q_n))
    lower = Fraction(1, 2 * q_n * q_next)
    upper = Fraction(1, q_n * q_next)
    return {
        "n": n,
        "distance": distance,
        "lower": lower,
        "upper": upper,
        "holds": lower <= distance <= upper,
    }


def partition_lengths(cf: ContinuedFraction, n: int) -> Dict[str, Any]:
    """
    Gaps of the circle partition by ``{-i alpha}``, ``0 <= i < q_n``.

    Checks every gap against ``[1/q_n - 2/q_{n+1}, 1/q_n + 2/q_{n+1}]``.
    """
    if n + 1 >= cf.depth:
        raise DepthExceeded(f"Need n + 1 < depth ({cf.depth}) for an exact check, got n={n}")
    q_n = cf.q(n)
    q_next = cf.q(n + 1)
    alpha = cf.alpha
    modulus = alpha.denominator
    points = sorted((-i * alpha.numerator) % modulus for i in range(q_n))
    gaps = [b - a for a, b in zip(points, points[1:])]
    gaps.append(points[0] + modulus - points[-1])

    shortest = Fraction(min(gaps), modulus)
    longest = Fraction(max(gaps), modulus)
    lower = Fraction(1, q_n) - Fraction(2, q_next)
    upper = Fraction(1, q_n) + Fraction(2, q_next)
    return {
        "n": n,
        "cells": len(gaps),
        "shortest": shortest,
        "longest": longest,
        "lower": lower,
        "upper": upper,
        "holds": lower <= shortest and longest <= upper,
    }


def find_diophantine_indices(
    cf: ContinuedFraction, K: int, L: int, c: float
) -> DiophantineWitness:
    """
    All ``n_k >= 1`` with ``100(K^2+L^2) < a_{n_k+1} < 200(K^2+L^2)`` and
    ``a_{n_k+1-n} <= e^{cn}`` for ``1 <= n <= n_k``.
    """
    s = K * K + L * L
    lo, hi = 100 * s, 200 * s
    found = []
    for n_k in range(1, cf.depth):
        spike = cf.a(n_k + 1)
        if not lo < spike < hi:
            continue
        if all(math.log(cf.a(n_k + 1 - n)) <= c * n for n in range(1, n_k + 1)):
            found.append(n_k)
    logger.debug(f"Diophantine scan (K={K}, L={L}, c={c}): {found}")
    return DiophantineWitness(indices=tuple(found), c=c, K=K, L=L)


def make_ckl(
    K: int, L: int, count: int, c: float = 1.0, filler_bound: int = 2
) -> ContinuedFraction:
    """
    Quotient sequence with ``count`` planted spikes of value ``150(K^2+L^2)``.

    Fillers cycle through ``1..filler_bound``. Spikes are spaced so that each
    earlier spike still satisfies ``a_{n_k+1-n} <= e^{cn}`` from the point of
    view of every later one.
    """
    if K < 1 or L < 1 or count < 0:
        raise InvalidParams(f"Need K, L >= 1 and count >= 0, got K={K}, L={L}, count={count}")
    s = K * K + L * L
    if not 100 * s + 1 < 200 * s:
        raise InvalidParams(f"Empty spike window for K={K}, L={L}")
    if c <= 0 or filler_bound < 1 or math.log(filler_bound) > c:
        raise InvalidParams(
            f"filler_bound={filler_bound} must satisfy 1 <= filler_bound <= e^c (c={c})"
        )
    if filler_bound > 100 * s:
        raise InvalidParams("filler_bound must stay below the spike window")

    spike = 150 * s
    gap = max(2, math.ceil(math.log(spike) / c))

    quotients: List[int] = []
    planted: List[int] = []
    counter = 0

    def fill(length: int) -> None:
        nonlocal counter
        for _ in range(length):
            quotients.append(1 + counter % filler_bound)
            counter += 1

    fill(gap)
    for _ in range(count):
        planted.append(len(quotients))
        quotients.append(spike)
        fill(gap)

    logger.info(f"Built C_KL quotients: K={K}, L={L}, spikes at {planted}, depth {len(quotients)}")
    return ContinuedFraction(tuple(quotients), planted=tuple(planted))
