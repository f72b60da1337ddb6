"""
Interval exchange transformations over exact rationals.

Covers the IET itself, Rauzy-Veech induction (right-end cuts, one subtraction
per step), the accumulated induction matrices, the Rokhlin towers they
describe, and the search for a strictly positive induction path ending at a
permutation with swapped endpoints.
"""
from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from string import ascii_uppercase
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ergoscope.core.exceptions import (
    DegenerateStep,
    InconsistentRecord,
    InvalidParams,
    NonPositiveLength,
    NotFound,
    OutOfDomain,
)
from ergoscope.core.helpers import frac_to_str, matrix_to_json, parse_fraction
from ergoscope.dynamics.intervals import IntervalUnion, union_all
from ergoscope.utils import get_logger

logger = get_logger(__name__)

Matrix = Tuple[Tuple[int, ...], ...]

STEP_TOP = "top"
STEP_BOTTOM = "bottom"


def default_alphabet(d: int) -> Tuple[str, ...]:
    if not 1 <= d <= len(ascii_uppercase):
        raise InvalidParams(f"Alphabet size must lie in [1, 26], got {d}")
    return tuple(ascii_uppercase[:d])


@dataclass(frozen=True)
class Permutation:
    """
    A pair of orderings of the alphabet.

    ``top[j - 1]`` is ``pi0^{-1}(j)`` and ``bottom[j - 1]`` is ``pi1^{-1}(j)``;
    the alphabet order fixes the indexing of length vectors and matrices.

    Attributes:
        alphabet: letters in matrix order
        top: the letters in the order of the intervals before the exchange
        bottom: the letters in the order after the exchange
    """
    alphabet: Tuple[str, ...]
    top: Tuple[str, ...]
    bottom: Tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "alphabet", tuple(self.alphabet))
        object.__setattr__(self, "top", tuple(self.top))
        object.__setattr__(self, "bottom", tuple(self.bottom))
        letters = set(self.alphabet)
        if len(letters) != len(self.alphabet):
            raise InvalidParams(f"Repeated letters in alphabet {self.alphabet}")
        if set(self.top) != letters or len(self.top) != len(letters):
            raise InvalidParams(f"Top row {self.top} is not a bijection onto {self.alphabet}")
        if set(self.bottom) != letters or len(self.bottom) != len(letters):
            raise InvalidParams(
                f"Bottom row {self.bottom} is not a bijection onto {self.alphabet}"
            )

    @classmethod
    def from_rows(cls, top: Sequence[str], bottom: Sequence[str]) -> "Permutation":
        return cls(alphabet=tuple(sorted(top)), top=tuple(top), bottom=tuple(bottom))

    @classmethod
    def symmetric(cls, d: int) -> "Permutation":
        """The reversal ``(A B ... ; ... B A)``."""
        letters = default_alphabet(d)
        return cls(alphabet=letters, top=letters, bottom=tuple(reversed(letters)))

    @classmethod
    def identity(cls, d: int) -> "Permutation":
        letters = default_alphabet(d)
        return cls(alphabet=letters, top=letters, bottom=letters)

    @property
    def d(self) -> int:
        return len(self.alphabet)

    def index(self, letter: str) -> int:
        """Position of ``letter`` in the alphabet (matrix index)."""
        return self.alphabet.index(letter)

    def pi0(self, letter: str) -> int:
        return self.top.index(letter) + 1

    def pi1(self, letter: str) -> int:
        return self.bottom.index(letter) + 1

    def pi0_inv(self, j: int) -> str:
        return self.top[j - 1]

    def pi1_inv(self, j: int) -> str:
        return self.bottom[j - 1]

    def has_swapped_ends(self) -> bool:
        """``pi0^{-1}(1) = pi1^{-1}(d)`` and ``pi0^{-1}(d) = pi1^{-1}(1)``."""
        return self.top[0] == self.bottom[-1] and self.top[-1] == self.bottom[0]

    def with_rows(self, top: Sequence[str], bottom: Sequence[str]) -> "Permutation":
        return Permutation(alphabet=self.alphabet, top=tuple(top), bottom=tuple(bottom))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "alphabet": list(self.alphabet),
            "pi0": list(self.top),
            "pi1": list(self.bottom),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Permutation":
        return cls(alphabet=tuple(data["alphabet"]), top=tuple(data["pi0"]), bottom=tuple(data["pi1"]))

    def __str__(self) -> str:
        return f"({' '.join(self.top)} / {' '.join(self.bottom)})"


def is_irreducible(perm: Permutation) -> bool:
    """True iff no proper prefix of the top row is a prefix set of the bottom row."""
    seen_top, seen_bottom = set(), set()
    for k in range(perm.d - 1):
        seen_top.add(perm.top[k])
        seen_bottom.add(perm.bottom[k])
        if seen_top == seen_bottom:
            return False
    return True


@dataclass(frozen=True)
class IET:
    """
    An interval exchange ``T`` on ``[0, |lambda|)``.

    Attributes:
        perm: the permutation pair
        lengths: interval lengths in alphabet order, exact and positive
    """
    perm: Permutation
    lengths: Tuple[Fraction, ...]
    _top_starts: Tuple[Fraction, ...] = field(init=False, repr=False, compare=False)
    _bottom_starts: Tuple[Fraction, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        lengths = tuple(parse_fraction(x) for x in self.lengths)
        object.__setattr__(self, "lengths", lengths)
        if len(lengths) != self.perm.d:
            raise InvalidParams(
                f"Expected {self.perm.d} lengths for {self.perm}, got {len(lengths)}"
            )
        for letter, value in zip(self.perm.alphabet, lengths):
            if value <= 0:
                raise NonPositiveLength(f"Length of {letter} must be positive, got {value}")

        object.__setattr__(self, "_top_starts", self._starts(self.perm.top))
        object.__setattr__(self, "_bottom_starts", self._starts(self.perm.bottom))

    def _starts(self, row: Sequence[str]) -> Tuple[Fraction, ...]:
        # start of each letter's interval, indexed like the row
        out = []
        pos = Fraction(0)
        for letter in row:
            out.append(pos)
            pos += self.length(letter)
        return tuple(out)

    @property
    def d(self) -> int:
        return self.perm.d

    @property
    def total(self) -> Fraction:
        return sum(self.lengths, Fraction(0))

    def length(self, letter: str) -> Fraction:
        return self.lengths[self.perm.index(letter)]

    def top_start(self, letter: str) -> Fraction:
        return self._top_starts[self.perm.top.index(letter)]

    def bottom_start(self, letter: str) -> Fraction:
        return self._bottom_starts[self.perm.bottom.index(letter)]

    def shift(self, letter: str) -> Fraction:
        """Translation applied to the interval ``I_letter``."""
        return self.bottom_start(letter) - self.top_start(letter)

    def interval(self, letter: str) -> Tuple[Fraction, Fraction]:
        lo = self.top_start(letter)
        return lo, lo + self.length(letter)

    def letter_at(self, x) -> str:
        """The letter whose exchanged interval contains ``x``."""
        if not 0 <= x < self.total:
            raise OutOfDomain(f"x={x} outside [0, {self.total})")
        return self.perm.top[bisect_right(self._top_starts, x) - 1]

    def discontinuities(self) -> List[Fraction]:
        """Left endpoints of the exchanged intervals (0 included)."""
        return list(self._top_starts)

    def __call__(self, x):
        letter = self.letter_at(x)
        return x + self.shift(letter)

    def inverse(self) -> "IET":
        """The inverse exchange: rows swapped, same lengths."""
        return IET(self.perm.with_rows(self.perm.bottom, self.perm.top), self.lengths)

    def normalized(self) -> "IET":
        total = self.total
        return IET(self.perm, tuple(x / total for x in self.lengths))

    def image_of_union(self, union: IntervalUnion) -> IntervalUnion:
        """``T(union)`` computed piece by piece."""
        out = []
        for letter in self.perm.top:
            lo, hi = self.interval(letter)
            part = union.intersection(IntervalUnion.interval(lo, hi))
            if part:
                out.append(part.translate(self.shift(letter)))
        return union_all(out)

    def preimage_of_union(self, union: IntervalUnion) -> IntervalUnion:
        return self.inverse().image_of_union(union)

    def to_dict(self) -> Dict[str, Any]:
        data = self.perm.to_dict()
        data["lengths"] = [frac_to_str(x) for x in self.lengths]
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "IET":
        return cls(Permutation.from_dict(data), tuple(parse_fraction(x) for x in data["lengths"]))

    def __repr__(self) -> str:
        shown = ", ".join(f"{a}={v}" for a, v in zip(self.perm.alphabet, self.lengths))
        return f"IET({self.perm}, {shown})"


def make_iet(
    perm: Permutation, lengths: Sequence[Any], normalize: bool = False
) -> IET:
    """Build an IET; ``normalize`` rescales the domain to ``[0, 1)``."""
    iet = IET(perm, tuple(parse_fraction(x) for x in lengths))
    if normalize:
        iet = iet.normalized()
    logger.debug(f"Built {iet!r}")
    return iet


def apply_iet(T: IET, x, power: int = 1):
    """``T^power(x)``; negative powers use the inverse exchange."""
    if not 0 <= x < T.total:
        raise OutOfDomain(f"x={x} outside [0, {T.total})")
    step = T if power >= 0 else T.inverse()
    for _ in range(abs(power)):
        x = step(x)
    return x


def first_return_time(T: IET, x, base: IntervalUnion, max_iter: int = 10 ** 6) -> int:
    """Smallest ``m >= 1`` with ``T^m x`` in ``base`` (orbit simulation)."""
    y = x
    for m in range(1, max_iter + 1):
        y = T(y)
        if base.contains(y):
            return m
    raise NotFound(f"No return to base within {max_iter} iterations", steps=max_iter)


def identity_matrix(d: int) -> Matrix:
    return tuple(tuple(1 if i == j else 0 for j in range(d)) for i in range(d))


def elementary_matrix(d: int, winner: int, loser: int) -> Matrix:
    """``I + E[winner, loser]``."""
    return tuple(
        tuple(1 if i == j or (i == winner and j == loser) else 0 for j in range(d))
        for i in range(d)
    )


def mat_mul(A: Sequence[Sequence[int]], B: Sequence[Sequence[int]]) -> Matrix:
    n, m, p = len(A), len(B), len(B[0])
    return tuple(
        tuple(sum(A[i][k] * B[k][j] for k in range(m)) for j in range(p)) for i in range(n)
    )


def mat_vec(A: Sequence[Sequence[int]], v: Sequence[Any]) -> Tuple[Any, ...]:
    return tuple(sum((a * x for a, x in zip(row, v)), Fraction(0)) for row in A)


def column_sums(A: Sequence[Sequence[int]]) -> Tuple[int, ...]:
    return tuple(sum(row[j] for row in A) for j in range(len(A[0])))


def determinant(A: Sequence[Sequence[int]]) -> Fraction:
    """Exact determinant by fraction-valued Gaussian elimination."""
    M = [[Fraction(x) for x in row] for row in A]
    n = len(M)
    det = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if M[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            M[col], M[pivot] = M[pivot], M[col]
            det = -det
        det *= M[col][col]
        for r in range(col + 1, n):
            factor = M[r][col] / M[col][col]
            if factor:
                M[r] = [a - factor * b for a, b in zip(M[r], M[col])]
    return det


def is_positive(A: Sequence[Sequence[int]]) -> bool:
    return all(x > 0 for row in A for x in row)


@dataclass(frozen=True)
class RauzyMove:
    """One induction step: which row won, and the winning and losing letters."""
    step_type: str
    winner: str
    loser: str


def rauzy_step(T: IET) -> Tuple[IET, Matrix, str]:
    """
    One step of right Rauzy-Veech induction.

    Returns the induced exchange on ``[0, |lambda| - min(last lengths))``,
    the elementary matrix ``A`` with ``A lambda' = lambda`` and the step type.
    """
    T_next, move = _rauzy_move(T)
    d = T.d
    matrix = elementary_matrix(d, T.perm.index(move.winner), T.perm.index(move.loser))
    return T_next, matrix, move.step_type


def _rauzy_move(T: IET, step: int = 0) -> Tuple[IET, RauzyMove]:
    perm = T.perm
    top_last, bottom_last = perm.top[-1], perm.bottom[-1]
    len_top, len_bottom = T.length(top_last), T.length(bottom_last)
    if len_top == len_bottom:
        raise DegenerateStep(
            f"Equal last lengths at step {step}: |{top_last}| = |{bottom_last}| = {len_top}",
            step=step,
        )

    lengths = list(T.lengths)
    if len_top > len_bottom:
        winner, loser = top_last, bottom_last
        bottom = [a for a in perm.bottom if a != loser]
        bottom.insert(bottom.index(winner) + 1, loser)
        new_perm = perm.with_rows(perm.top, bottom)
        step_type = STEP_TOP
    else:
        winner, loser = bottom_last, top_last
        top = [a for a in perm.top if a != loser]
        top.insert(top.index(winner) + 1, loser)
        new_perm = perm.with_rows(top, perm.bottom)
        step_type = STEP_BOTTOM

    w = perm.index(winner)
    lengths[w] = lengths[w] - T.length(loser)
    return IET(new_perm, tuple(lengths)), RauzyMove(step_type, winner, loser)


@dataclass(frozen=True)
class InductionRecord:
    """
    The outcome of ``n`` induction steps.

    Attributes:
        steps: number of steps performed
        matrix: ``A^(n)``, the ordered product of the elementary matrices
        end_state: the induced exchange (normalized when requested)
        moves: the step history
        permutations: permutation after each step
        scale: ``|lambda^n|`` in the original units; 1 unless normalized
    """
    steps: int
    matrix: Matrix
    end_state: IET
    moves: Tuple[RauzyMove, ...] = ()
    permutations: Tuple[Permutation, ...] = ()
    scale: Fraction = Fraction(1)

    @property
    def step_types(self) -> Tuple[str, ...]:
        return tuple(m.step_type for m in self.moves)

    @property
    def heights(self) -> Tuple[int, ...]:
        """Column sums of ``A^(n)``: first-return times of the induced intervals."""
        return column_sums(self.matrix)

    @property
    def raw_lengths(self) -> Tuple[Fraction, ...]:
        """Induced lengths in the units of the starting exchange."""
        return tuple(x * self.scale for x in self.end_state.lengths)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "steps": self.steps,
            "matrix": matrix_to_json(self.matrix),
            "end_state": self.end_state.to_dict(),
            "step_types": list(self.step_types),
            "scale": frac_to_str(self.scale),
        }


def rauzy_induct(T: IET, n: int, normalized: bool = False) -> InductionRecord:
    """
    Run ``n`` induction steps from ``T``.

    Raises:
        DegenerateStep: With ``step`` set to the 0-based index of the failing step
    """
    if n < 0:
        raise InvalidParams(f"Number of steps must be non-negative, got {n}")

    d = T.d
    matrix = [list(row) for row in identity_matrix(d)]
    current = T
    scale = Fraction(1)
    moves: List[RauzyMove] = []
    perms: List[Permutation] = []

    for step in range(n):
        current, move = _rauzy_move(current, step)
        w, l = current.perm.index(move.winner), current.perm.index(move.loser)
        # right-multiplying by I + E[w, l] adds column w into column l
        for row in matrix:
            row[l] += row[w]
        if normalized:
            total = current.total
            scale *= total
            current = IET(current.perm, tuple(x / total for x in current.lengths))
        moves.append(move)
        perms.append(current.perm)

    logger.debug(f"Induced {n} steps from {T.perm}; heights {column_sums(matrix)}")
    return InductionRecord(
        steps=n,
        matrix=tuple(tuple(row) for row in matrix),
        end_state=current,
        moves=tuple(moves),
        permutations=tuple(perms),
        scale=scale,
    )


def check_matrix_identity(T: IET, record: InductionRecord) -> bool:
    """``A^(n) lambda^n == lambda`` exactly (scale restored when normalized)."""
    return mat_vec(record.matrix, record.raw_lengths) == T.lengths


def check_mnozmac(T: IET, lambda_prime: Sequence[Any]) -> Dict[str, Any]:
    """
    One-step matrix stability.

    For ``T = (pi, lambda)`` with first step ``(A, pi')``, the exchange
    ``(pi, A lambda')`` must take the same first step for every positive
    ``lambda'``.
    """
    lambda_prime = tuple(parse_fraction(x) for x in lambda_prime)
    T1, matrix, step_type = rauzy_step(T)
    other = IET(T.perm, mat_vec(matrix, lambda_prime))
    T2, matrix2, step_type2 = rauzy_step(other)
    return {
        "matrix": matrix_to_json(matrix),
        "same_matrix": matrix == matrix2,
        "same_permutation": T1.perm == T2.perm,
        "same_step_type": step_type == step_type2,
        "induced_lengths_match": T2.lengths == lambda_prime,
        "holds": matrix == matrix2 and T1.perm == T2.perm and T2.lengths == lambda_prime,
    }


@dataclass
class TowerDecomposition:
    """
    Rokhlin towers over the induced intervals.

    Attributes:
        bases: ``I^n_b`` per letter, in the starting exchange's units
        heights: ``s_b^n`` per letter (column sums of ``A^(n)``)
        levels: for each letter the intervals ``T^i I^n_b``, ``0 <= i < s_b^n``
    """
    bases: Dict[str, Tuple[Fraction, Fraction]]
    heights: Dict[str, int]
    levels: Dict[str, List[Tuple[Fraction, Fraction]]]

    def level_union(self, letters: Optional[Sequence[str]] = None) -> IntervalUnion:
        letters = self.levels.keys() if letters is None else letters
        return IntervalUnion(p for a in letters for p in self.levels[a])

    def total_measure(self) -> Fraction:
        return sum(
            ((hi - lo) * self.heights[a] for a, (lo, hi) in self.bases.items()),
            Fraction(0),
        )

    def is_partition_of(self, lo, hi) -> bool:
        """Levels are pairwise disjoint and cover ``[lo, hi)`` exactly."""
        union = self.level_union()
        return union == IntervalUnion.interval(lo, hi) and union.measure() == self.total_measure()

    def discontinuities_on_left_ends(self, T: IET) -> bool:
        left_ends = {lo for levels in self.levels.values() for lo, _ in levels}
        return all(x in left_ends for x in T.discontinuities())

    def to_dict(self) -> Dict[str, Any]:
        return {
            "heights": dict(self.heights),
            "bases": {a: [frac_to_str(lo), frac_to_str(hi)] for a, (lo, hi) in self.bases.items()},
        }


def tower_decomposition(T: IET, record: InductionRecord) -> TowerDecomposition:
    """
    Towers ``{T^i I^n_b}`` of ``record`` realised inside ``T``.

    The levels are followed by iterating ``T`` on the left endpoints; each
    level lies inside one exchanged interval, so ``T`` moves it rigidly.

    Raises:
        InconsistentRecord: If the record does not describe ``T``
    """
    if not check_matrix_identity(T, record):
        raise InconsistentRecord(
            "Induction record does not reproduce the lengths of T",
            details=f"steps={record.steps}",
        )

    induced = record.end_state
    scale = record.scale
    domain_end = induced.total * scale
    heights = dict(zip(T.perm.alphabet, record.heights))

    bases: Dict[str, Tuple[Fraction, Fraction]] = {}
    levels: Dict[str, List[Tuple[Fraction, Fraction]]] = {}
    for letter in induced.perm.top:
        lo = induced.top_start(letter) * scale
        width = induced.length(letter) * scale
        bases[letter] = (lo, lo + width)
        tower = []
        x = lo
        for i in range(heights[letter]):
            if i > 0 and x < domain_end:
                raise InconsistentRecord(
                    f"Tower over {letter} returns early at level {i}",
                    details=f"height {heights[letter]}",
                )
            if x + width > T.interval(T.letter_at(x))[1]:
                raise InconsistentRecord(f"Level {i} of tower {letter} straddles a cut")
            tower.append((x, x + width))
            x = T(x)
        if x >= domain_end:
            raise InconsistentRecord(f"Tower over {letter} does not return after {heights[letter]}")
        levels[letter] = tower

    logger.debug(f"Tower decomposition: heights {heights}")
    return TowerDecomposition(bases=bases, heights=heights, levels=levels)


def rho(B: Sequence[Sequence[int]]) -> Union[Fraction, float]:
    """
    Balance ``max_{i,j,k} B_ij / B_ik`` of a strictly positive matrix.

    Returns ``math.inf`` when some entry is zero.
    """
    if not is_positive(B):
        logger.debug("rho of a matrix with zero entries is infinite")
        return float("inf")
    return max(Fraction(max(row), min(row)) for row in B)


@dataclass(frozen=True)
class PositivePath:
    """
    A strictly positive induction path.

    Attributes:
        B: the accumulated matrix along the path
        pi_start: permutation the path starts from
        pi_hat: permutation the path ends at (endpoints swapped)
        moves: the step history
        start_lengths: the random lengths that realised the path
    """
    B: Matrix
    pi_start: Permutation
    pi_hat: Permutation
    moves: Tuple[RauzyMove, ...]
    start_lengths: Tuple[Fraction, ...]

    @property
    def steps(self) -> int:
        return len(self.moves)

    @property
    def rho(self) -> Fraction:
        return rho(self.B)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "B": matrix_to_json(self.B),
            "rho": frac_to_str(self.rho),
            "pi_start": self.pi_start.to_dict(),
            "pi_hat": self.pi_hat.to_dict(),
            "step_types": [m.step_type for m in self.moves],
            "start_lengths": [frac_to_str(x) for x in self.start_lengths],
        }


def random_lengths(d: int, rng: np.random.Generator, denominator_bound: int = 10 ** 4) -> Tuple[Fraction, ...]:
    """Positive rationals with denominators at most ``denominator_bound``."""
    dens = rng.integers(2, denominator_bound + 1, size=d)
    nums = [int(rng.integers(1, int(q))) for q in dens]
    return tuple(Fraction(p, int(q)) for p, q in zip(nums, dens))


def find_positive_path(
    perm_start: Permutation,
    max_steps: int = 200,
    seed: int = 0,
    target: Callable[[Permutation], bool] = Permutation.has_swapped_ends,
    denominator_bound: int = 10 ** 4,
    attempts: int = 20,
) -> PositivePath:
    """
    Induct from random rational lengths until the matrix is strictly positive
    and the current permutation satisfies ``target`` (by default: swapped endpoints).

    A degenerate step restarts the search with fresh lengths.

    Raises:
        NotFound: If no attempt succeeds within ``max_steps`` steps
    """
    if not is_irreducible(perm_start):
        raise InvalidParams(f"Permutation {perm_start} is reducible")

    rng = np.random.default_rng(seed)
    d = perm_start.d
    for attempt in range(attempts):
        lengths = random_lengths(d, rng, denominator_bound)
        current = IET(perm_start, lengths)
        matrix = [list(row) for row in identity_matrix(d)]
        moves: List[RauzyMove] = []
        try:
            for step in range(max_steps):
                current, move = _rauzy_move(current, step)
                w, l = perm_start.index(move.winner), perm_start.index(move.loser)
                for row in matrix:
                    row[l] += row[w]
                moves.append(move)
                if is_positive(matrix) and target(current.perm):
                    B = tuple(tuple(row) for row in matrix)
                    logger.info(
                        f"Positive path found after {step + 1} steps "
                        f"(attempt {attempt + 1}); rho(B) = {rho(B)}"
                    )
                    return PositivePath(
                        B=B,
                        pi_start=perm_start,
                        pi_hat=current.perm,
                        moves=tuple(moves),
                        start_lengths=lengths,
                    )
        except DegenerateStep as e:
            logger.debug(f"Attempt {attempt + 1} degenerated at step {e.step}; retrying")
            continue

    raise NotFound(
        f"No positive path from {perm_start} within {max_steps} steps",
        steps=max_steps,
        details=f"{attempts} attempts, seed {seed}",
    )
