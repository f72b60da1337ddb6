"""
Birkhoff sums over rotations for roofs with a symmetric logarithmic singularity.

The roof is ``f(x) = C_f (-log x - log(1 - x)) + g(x)`` with ``g`` a positive
trigonometric polynomial. Rotation offsets ``{j alpha}`` are computed exactly
against the rational surrogate of alpha and rounded once; scalar sums are
correctly rounded with ``math.fsum``, grid sums use Neumaier compensation in
fixed chunks so the result does not depend on the thread count.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from mpmath import mp, mpf
from scipy import stats

from ergoscope.config import get_settings
from ergoscope.core.exceptions import (
    GridTooCoarse,
    InvalidParams,
    OrderUnsupported,
    SingularityHit,
)
from ergoscope.dynamics.cf_rotation import (
    ContinuedFraction,
    DiophantineWitness,
    circle_norm,
    orbit_min_distance,
)
from ergoscope.dynamics.intervals import IntervalUnion, union_all
from ergoscope.utils import get_logger

logger = get_logger(__name__)

CHUNK_SIZE = 8192
EPS = np.finfo(float).eps
SUPPORTED_ORDERS = (0, 1, 2, 3)


@dataclass(frozen=True)
class LogRoof:
    """
    Roof with a symmetric logarithmic singularity at 0.

    Attributes:
        C_f: multiplier of the singular part (0 leaves only ``g``)
        a0: constant term of ``g``
        cos_coeffs: ``a_k`` of ``cos(2 pi k x)``, k = 1, 2, ...
        sin_coeffs: ``b_k`` of ``sin(2 pi k x)``, k = 1, 2, ...
    """
    C_f: float = 1.0
    a0: float = 2.0
    cos_coeffs: Tuple[float, ...] = ()
    sin_coeffs: Tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "cos_coeffs", tuple(float(a) for a in self.cos_coeffs))
        object.__setattr__(self, "sin_coeffs", tuple(float(b) for b in self.sin_coeffs))
        if self.C_f < 0:
            raise InvalidParams(f"C_f must be non-negative, got {self.C_f}")
        amplitude = sum(abs(a) for a in self.cos_coeffs) + sum(abs(b) for b in self.sin_coeffs)
        if not self.a0 > amplitude:
            raise InvalidParams(
                f"g must be positive: need a0 > sum |a_k| + |b_k| = {amplitude}, got a0={self.a0}"
            )

    @property
    def degree(self) -> int:
        return max(len(self.cos_coeffs), len(self.sin_coeffs))

    def _coeff_pairs(self):
        for k in range(1, self.degree + 1):
            a = self.cos_coeffs[k - 1] if k <= len(self.cos_coeffs) else 0.0
            b = self.sin_coeffs[k - 1] if k <= len(self.sin_coeffs) else 0.0
            yield k, a, b

    def smooth_part(self) -> "LogRoof":
        """The roof with the singular part removed."""
        return LogRoof(0.0, self.a0, self.cos_coeffs, self.sin_coeffs)

    def mean(self) -> float:
        """``int_0^1 f``; the singular part contributes ``2 C_f``."""
        return 2.0 * self.C_f + self.a0

    def g_variation_bound(self) -> float:
        """Upper bound on the total variation of ``g``: ``sum 4k hypot(a_k, b_k)``."""
        return sum(4.0 * k * math.hypot(a, b) for k, a, b in self._coeff_pairs())

    def g_values(self, y, r: int = 0):
        """``g^{(r)}`` at ``y`` (numpy-vectorised)."""
        y = np.asarray(y, dtype=float)
        out = np.full(y.shape, self.a0 if r == 0 else 0.0)
        for k, a, b in self._coeff_pairs():
            w = 2.0 * np.pi * k
            phase = w * y + r * np.pi / 2
            out = out + (w ** r) * (a * np.cos(phase) + b * np.sin(phase))
        return out

    def values(self, y, ybar, r: int = 0):
        """
        ``f^{(r)}`` at ``y``, with ``ybar = 1 - y`` passed separately so the
        right-hand singularity keeps full relative precision.
        """
        y = np.asarray(y, dtype=float)
        ybar = np.asarray(ybar, dtype=float)
        if r == 0:
            singular = -np.log(y) - np.log(ybar)
        else:
            singular = math.factorial(r - 1) * ((-1) ** r * y ** (-r) + ybar ** (-r))
        return self.C_f * singular + self.g_values(y, r)

    def mp_value(self, y: mpf, ybar: mpf, r: int = 0) -> mpf:
        """High-precision ``f^{(r)}`` for oracle sums."""
        if r == 0:
            singular = -mp.log(y) - mp.log(ybar)
        else:
            singular = math.factorial(r - 1) * ((-1) ** r * y ** (-r) + ybar ** (-r))
        total = mpf(self.a0) if r == 0 else mpf(0)
        for k, a, b in self._coeff_pairs():
            w = 2 * mp.pi * k
            phase = w * y + r * mp.pi / 2
            total += w ** r * (a * mp.cos(phase) + b * mp.sin(phase))
        return self.C_f * singular + total

    def to_dict(self) -> Dict[str, Any]:
        return {
            "C_f": self.C_f,
            "a0": self.a0,
            "cos_coeffs": list(self.cos_coeffs),
            "sin_coeffs": list(self.sin_coeffs),
        }


@dataclass(frozen=True)
class BirkhoffValue:
    """A Birkhoff sum with its rounding-error bound."""
    value: float
    error: float
    n_terms: int
    order: int


@dataclass(frozen=True)
class CenterStats:
    """
    Recentring constant at one witness index.

    Attributes:
        k: position in the witness list
        n_k: the convergent index
        q: ``q_{n_k}``
        x_k: ``1 / (2 q)``
        c_k: ``S_q(f)(x_k)``
        error: summation error bound for ``c_k``
    """
    k: int
    n_k: int
    q: int
    x_k: Fraction
    c_k: float
    error: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "k": self.k,
            "n_k": self.n_k,
            "q": self.q,
            "x_k": self.x_k,
            "c_k": self.c_k,
            "error": self.error,
        }


@dataclass
class TailTable:
    """
    Grid estimate of ``Leb{x : |S_{wq}(f)(x) - w c_k| >= w b}`` over a b grid.

    Attributes:
        b_values: increasing thresholds
        masses: grid fractions, non-increasing in b
        w: multiplier of ``q``
        k: witness position
        n_k: convergent index
        grid_size: number of grid points
    """
    b_values: List[float]
    masses: List[float]
    w: int
    k: int
    n_k: int
    grid_size: int

    def rows(self) -> List[Dict[str, Any]]:
        return [
            {
                "k": self.k,
                "w": self.w,
                "n_k": self.n_k,
                "grid_size": self.grid_size,
                "b": b,
                "mass": m,
            }
            for b, m in zip(self.b_values, self.masses)
        ]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "k": self.k,
            "w": self.w,
            "n_k": self.n_k,
            "grid_size": self.grid_size,
            "b_values": list(self.b_values),
            "masses": list(self.masses),
        }


@dataclass
class TailFit:
    """Least-squares line through ``(b, log mass)`` and the sandwich constant."""
    slope: float
    intercept: float
    D: float
    points: int

    def to_dict(self) -> Dict[str, Any]:
        return {"slope": self.slope, "intercept": self.intercept, "D": self.D, "points": self.points}


@dataclass
class RecentredSums:
    """``S_{wq}(f) - w c_k`` on a uniform grid."""
    xs: np.ndarray
    values: np.ndarray
    center: CenterStats
    w: int


@dataclass
class SeparationReport:
    """
    Attributes:
        violations: grid points with ``|V_0| >= b/(2L)`` and ``|V_i| >= b`` for some ``i != 0``
        margin: ``min (b/(2L) - |V_0|)`` over points with some ``|V_i| >= b``; None if none
        below_threshold: True when ``b`` is under the supplied ``b0`` estimate
    """
    b: float
    L: int
    violations: int
    margin: Optional[float]
    checked_points: int
    below_threshold: bool = False
    b0: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return dict(self.__dict__)


@dataclass
class IntervalCover:
    """Union of arcs of radius ``D e^{-b} / (2q)`` around ``-j alpha``."""
    union: IntervalUnion
    radius: float
    arcs: int
    length: float = field(init=False)

    def __post_init__(self):
        self.length = float(self.union.measure())

    @property
    def is_full_circle(self) -> bool:
        return self.length >= 1.0 - 1e-15

    def to_dict(self) -> Dict[str, Any]:
        return {"radius": self.radius, "arcs": self.arcs, "length": self.length,
                "pieces": len(self.union)}


def _check_order(r: int) -> None:
    if r not in SUPPORTED_ORDERS:
        raise OrderUnsupported(f"Derivative order {r} not supported; use one of {SUPPORTED_ORDERS}")


def _resolve_guard(guard: Optional[float]) -> float:
    """Explicit guard, else ``runtime.singularity_guard``."""
    return get_settings().runtime.singularity_guard if guard is None else guard


def rotation_offsets(cf: ContinuedFraction, count: int, start: int = 0) -> np.ndarray:
    """``{j alpha}`` for ``start <= j < start + count``, exact then rounded once."""
    alpha = cf.alpha
    p, q = alpha.numerator, alpha.denominator
    out = np.empty(count, dtype=float)
    r = (start * p) % q
    for j in range(count):
        out[j] = r / q
        r = (r + p) % q
    return out


def shift_offset(cf: ContinuedFraction, m: int) -> float:
    """``{m alpha}`` rounded once; ``m`` may be negative."""
    alpha = cf.alpha
    return ((m * alpha.numerator) % alpha.denominator) / alpha.denominator


def uniform_grid(grid_size: int) -> np.ndarray:
    """
    Midpoints of a uniform partition of ``[0, 1)``, nudged by a fixed
    irrational fraction of a cell so no point sits on a rational orbit.
    """
    nudge = 0.1 * (math.sqrt(2.0) - 1.0)
    return (np.arange(grid_size, dtype=float) + 0.5 + nudge) / grid_size


def birkhoff_sum(
    roof: LogRoof,
    cf: ContinuedFraction,
    r: int,
    n_terms: int,
    x,
    guard: Optional[float] = None,
    prec_bits: Optional[int] = None,
) -> BirkhoffValue:
    """
    ``sum_{i < n_terms} f^{(r)}(x + i alpha)``.

    Rational ``x`` is followed exactly; float ``x`` uses rounded offsets. With
    ``prec_bits`` the terms are evaluated and summed in mpmath (oracle mode).

    Raises:
        SingularityHit: If an orbit point comes within ``guard`` of 0 or 1
        OrderUnsupported: For ``r`` outside {0, 1, 2, 3}
    """
    _check_order(r)
    if n_terms < 0:
        raise InvalidParams(f"n_terms must be non-negative, got {n_terms}")
    guard = _resolve_guard(guard)

    alpha = cf.alpha
    if isinstance(x, (int, Fraction)):
        x = Fraction(x)
        modulus = x.denominator * alpha.denominator
        start = (x.numerator * alpha.denominator) % modulus
        step = alpha.numerator * x.denominator
        residues = [(start + j * step) % modulus for j in range(n_terms)]
        ys = [(res, modulus - res) for res in residues]
    else:
        modulus = None
        offs = rotation_offsets(cf, n_terms)
        ys = []
        for off in offs:
            y = (float(x) + off) % 1.0
            ys.append((y, 1.0 - y))

    for j, (a, b) in enumerate(ys):
        near = min(a, b) / modulus if modulus else min(a, b)
        if near < guard:
            raise SingularityHit(
                f"Orbit point {j} is within {guard:g} of the singularity", index=j,
                details=f"distance {near}",
            )

    if prec_bits is not None:
        with mp.workprec(prec_bits):
            if modulus:
                terms = [roof.mp_value(mpf(a) / modulus, mpf(b) / modulus, r) for a, b in ys]
            else:
                terms = [roof.mp_value(mpf(a), mpf(b), r) for a, b in ys]
            total = mp.fsum(terms)
            abs_total = mp.fsum(abs(t) for t in terms)
            error = float(abs_total * mpf(2) ** (-(prec_bits - 8))) + EPS * abs(float(total))
            return BirkhoffValue(float(total), error, n_terms, r)

    if modulus:
        y = np.array([a / modulus for a, _ in ys], dtype=float)
        ybar = np.array([b / modulus for _, b in ys], dtype=float)
    else:
        y = np.array([a for a, _ in ys], dtype=float)
        ybar = np.array([b for _, b in ys], dtype=float)
    terms = roof.values(y, ybar, r) if n_terms else np.empty(0)
    total = math.fsum(terms.tolist())
    error = 8 * EPS * float(np.sum(np.abs(terms))) + EPS * abs(total)
    return BirkhoffValue(total, error, n_terms, r)


def _grid_chunk(
    roof: LogRoof, offsets: np.ndarray, r: int, xs: np.ndarray, guard: float
) -> Tuple[np.ndarray, np.ndarray]:
    s = np.zeros_like(xs)
    comp = np.zeros_like(xs)
    abs_sum = np.zeros_like(xs)
    for j, off in enumerate(offsets):
        y = xs + off
        y -= np.floor(y)
        ybar = 1.0 - y
        near = np.minimum(y, ybar)
        if near.min() < guard:
            raise SingularityHit(
                f"Grid orbit point {j} is within {guard:g} of the singularity", index=j
            )
        t = roof.values(y, ybar, r)
        tmp = s + t
        comp += np.where(np.abs(s) >= np.abs(t), (s - tmp) + t, (t - tmp) + s)
        s = tmp
        abs_sum += np.abs(t)
    return s + comp, 8 * EPS * abs_sum


@dataclass
class GridSums:
    values: np.ndarray
    errors: np.ndarray


def birkhoff_sum_grid(
    roof: LogRoof,
    cf: ContinuedFraction,
    r: int,
    n_terms: int,
    xs: np.ndarray,
    guard: Optional[float] = None,
    threads: int = 1,
    chunk_size: int = CHUNK_SIZE,
) -> GridSums:
    """
    Vectorised :func:`birkhoff_sum` over grid points ``xs``.

    The grid is cut into fixed chunks processed independently, so values are
    identical for any thread count.
    """
    _check_order(r)
    xs = np.asarray(xs, dtype=float)
    guard = _resolve_guard(guard)
    offsets = rotation_offsets(cf, n_terms)
    chunks = [xs[i:i + chunk_size] for i in range(0, xs.size, chunk_size)]

    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            parts = list(executor.map(lambda c: _grid_chunk(roof, offsets, r, c, guard), chunks))
    else:
        parts = [_grid_chunk(roof, offsets, r, c, guard) for c in chunks]

    if not parts:
        return GridSums(np.empty(0), np.empty(0))
    return GridSums(
        values=np.concatenate([p[0] for p in parts]),
        errors=np.concatenate([p[1] for p in parts]),
    )


def _witness_q(cf: ContinuedFraction, witness: DiophantineWitness, k: int) -> Tuple[int, int]:
    if not 0 <= k < len(witness.indices):
        raise InvalidParams(f"Witness has {len(witness.indices)} indices, requested k={k}")
    n_k = witness.indices[k]
    return n_k, cf.q(n_k)


def center_stats(
    roof: LogRoof,
    cf: ContinuedFraction,
    witness: DiophantineWitness,
    k: int,
    guard: Optional[float] = None,
) -> CenterStats:
    """``c_k = S_{q_{n_k}}(f)(1 / (2 q_{n_k}))``."""
    n_k, q = _witness_q(cf, witness, k)
    x_k = Fraction(1, 2 * q)
    value = birkhoff_sum(roof, cf, 0, q, x_k, guard=guard)
    logger.debug(f"c_{k} = {value.value:.6f} (n_k={n_k}, q={q})")
    return CenterStats(k=k, n_k=n_k, q=q, x_k=x_k, c_k=value.value, error=value.error)


def _deviation_rows(
    roof: LogRoof,
    cf: ContinuedFraction,
    q: int,
    c_k: float,
    xs: np.ndarray,
    rows: Sequence[int],
    guard: Optional[float],
    threads: int,
) -> Dict[int, np.ndarray]:
    """``V_i(x) = S_q(f)(x + i q alpha) - c_k`` for each requested ``i``."""

    def one(i: int) -> np.ndarray:
        shifted = xs + shift_offset(cf, i * q)
        shifted -= np.floor(shifted)
        return birkhoff_sum_grid(roof, cf, 0, q, shifted, guard=guard).values - c_k

    if threads > 1 and len(rows) > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            values = list(executor.map(one, rows))
    else:
        values = [one(i) for i in rows]
    return dict(zip(rows, values))


def _check_grid(grid_size: int, q: int) -> None:
    if grid_size < 10 * q:
        raise GridTooCoarse(f"Grid of {grid_size} points is below 10 q = {10 * q}")


def recentred_sums(
    roof: LogRoof,
    cf: ContinuedFraction,
    witness: DiophantineWitness,
    k: int,
    w: int,
    grid_size: int,
    guard: Optional[float] = None,
    threads: int = 1,
) -> RecentredSums:
    """
    ``S_{wq}(f) - w c_k`` on the grid via the cocycle identity
    ``S_{wq} = sum_{i<w} S_q o R^{iq}``.
    """
    if w < 1:
        raise InvalidParams(f"w must be at least 1, got {w}")
    n_k, q = _witness_q(cf, witness, k)
    _check_grid(grid_size, q)
    center = center_stats(roof, cf, witness, k, guard)
    xs = uniform_grid(grid_size)
    rows = _deviation_rows(roof, cf, q, center.c_k, xs, list(range(w)), guard, threads)
    total = np.zeros_like(xs)
    for i in range(w):
        total += rows[i]
    return RecentredSums(xs=xs, values=total, center=center, w=w)


def tail_mass(
    roof: LogRoof,
    cf: ContinuedFraction,
    witness: DiophantineWitness,
    k: int,
    w: int,
    b_grid: Sequence[float],
    grid_size: int,
    guard: Optional[float] = None,
    threads: int = 1,
) -> TailTable:
    """
    Grid estimate of ``Leb{x : |S_{wq}(f)(x) - w c_k| >= w b}`` for each b.

    Raises:
        GridTooCoarse: If ``grid_size < 10 q_{n_k}``
    """
    sums = recentred_sums(roof, cf, witness, k, w, grid_size, guard, threads)
    deviation = np.abs(sums.values)
    b_values = sorted(float(b) for b in b_grid)
    masses = [float(np.mean(deviation >= w * b)) for b in b_values]
    logger.info(
        f"Tail table k={k} w={w}: q={sums.center.q}, grid={grid_size}, "
        f"mass at b={b_values[0] if b_values else None}: {masses[0] if masses else None}"
    )
    return TailTable(
        b_values=b_values,
        masses=masses,
        w=w,
        k=k,
        n_k=sums.center.n_k,
        grid_size=grid_size,
    )


def ak_interval_cover(
    cf: ContinuedFraction, witness: DiophantineWitness, k: int, b: float, D: float
) -> IntervalCover:
    """Arcs ``[-j alpha - r, -j alpha + r]``, ``r = D e^{-b} / (2 q)``, ``j < q``."""
    if D < 1 or b <= 0:
        raise InvalidParams(f"Need D >= 1 and b > 0, got D={D}, b={b}")
    n_k, q = _witness_q(cf, witness, k)
    radius = D * math.exp(-b) / (2 * q)
    centers = [shift_offset(cf, -j) for j in range(q)]
    union = union_all(IntervalUnion.on_circle(c - radius, c + radius) for c in centers)
    return IntervalCover(union=union, radius=radius, arcs=q)


def _orbit_distance(xs: np.ndarray, cf: ContinuedFraction, q: int) -> np.ndarray:
    """``min_{j<q} ||x + j alpha||`` for each x."""
    points = np.sort(np.array([shift_offset(cf, -j) for j in range(q)]))
    idx = np.searchsorted(points, xs)
    right = points[idx % q]
    left = points[(idx - 1) % q]
    d_right = np.abs(xs - right)
    d_left = np.abs(xs - left)
    d_right = np.minimum(d_right, 1.0 - d_right)
    d_left = np.minimum(d_left, 1.0 - d_left)
    return np.minimum(d_left, d_right)


def separation_check(
    roof: LogRoof,
    cf: ContinuedFraction,
    witness: DiophantineWitness,
    k: int,
    b: float,
    L: int,
    grid_size: int,
    b0: Optional[float] = None,
    guard: Optional[float] = None,
    threads: int = 1,
) -> SeparationReport:
    """
    Count grid points with ``|V_0| >= b/(2L)`` and ``|V_i| >= b`` for some
    ``0 < |i| <= L``, where ``V_i = S_q(f) o R^{iq} - c_k``.
    """
    return separation_scan(roof, cf, witness, k, [b], L, grid_size, b0, guard, threads)[0]


def _separation_report(
    V: Dict[int, np.ndarray], b: float, L: int, b0: Optional[float]
) -> SeparationReport:
    base = np.abs(V[0])
    far = np.zeros(base.shape, dtype=bool)
    for i, row in V.items():
        if i != 0 and abs(i) <= L:
            far |= np.abs(row) >= b
    small = b / (2 * L)
    violations = int(np.count_nonzero(far & (base >= small)))
    margin = float(np.min(small - base[far])) if far.any() else None

    report = SeparationReport(
        b=b,
        L=L,
        violations=violations,
        margin=margin,
        checked_points=int(base.size),
        below_threshold=b0 is not None and b < b0,
        b0=b0,
    )
    if violations and not report.below_threshold:
        logger.warning(f"Separation check found {violations} violations at b={b}, L={L}")
    return report


def separation_scan(
    roof: LogRoof,
    cf: ContinuedFraction,
    witness: DiophantineWitness,
    k: int,
    b_values: Sequence[float],
    L: int,
    grid_size: int,
    b0: Optional[float] = None,
    guard: Optional[float] = None,
    threads: int = 1,
) -> List[SeparationReport]:
    """:func:`separation_check` for several thresholds sharing one set of rows."""
    if L < 1:
        raise InvalidParams(f"L must be at least 1, got {L}")
    n_k, q = _witness_q(cf, witness, k)
    _check_grid(grid_size, q)
    center = center_stats(roof, cf, witness, k, guard)
    xs = uniform_grid(grid_size)
    V = _deviation_rows(roof, cf, q, center.c_k, xs, list(range(-L, L + 1)), guard, threads)
    return [_separation_report(V, float(b), L, b0) for b in sorted(b_values)]


def fit_separation_threshold(reports: Sequence[SeparationReport]) -> Optional[float]:
    """Smallest tested ``b`` from which every larger tested ``b`` has no violations."""
    b0 = None
    for report in sorted(reports, key=lambda r: r.b, reverse=True):
        if report.violations:
            break
        b0 = report.b
    return b0


def tail_tables(
    roof: LogRoof,
    cf: ContinuedFraction,
    witness: DiophantineWitness,
    k: int,
    ws: Sequence[int],
    b_grid: Sequence[float],
    grid_size: int,
    guard: Optional[float] = None,
    threads: int = 1,
) -> Dict[int, TailTable]:
    """
    :func:`tail_mass` for every ``w`` in ``ws``; the rows ``V_i``,
    ``i < max(ws)``, are computed once and partially summed.
    """
    if not ws or min(ws) < 1:
        raise InvalidParams(f"Multipliers must be positive, got {list(ws)}")
    n_k, q = _witness_q(cf, witness, k)
    _check_grid(grid_size, q)
    center = center_stats(roof, cf, witness, k, guard)
    xs = uniform_grid(grid_size)
    top = max(ws)
    rows = _deviation_rows(roof, cf, q, center.c_k, xs, list(range(top)), guard, threads)
    b_values = sorted(float(b) for b in b_grid)

    tables: Dict[int, TailTable] = {}
    running = np.zeros_like(xs)
    for w in range(1, top + 1):
        running = running + rows[w - 1]
        if w not in ws:
            continue
        deviation = np.abs(running)
        tables[w] = TailTable(
            b_values=b_values,
            masses=[float(np.mean(deviation >= w * b)) for b in b_values],
            w=w,
            k=k,
            n_k=n_k,
            grid_size=grid_size,
        )
    logger.info(f"Tail tables k={k}: q={q}, grid={grid_size}, w in {sorted(tables)}")
    return tables


def fit_tail(table: TailTable) -> TailFit:
    """
    Slope and intercept of ``log mass`` against ``b``, plus the smallest ``D``
    with ``D^{-1} e^{-b} <= mass <= D e^{-b}`` on the positive entries.
    """
    pts = [(b, m) for b, m in zip(table.b_values, table.masses) if m > 0]
    if len(pts) < 2:
        return TailFit(slope=float("nan"), intercept=float("nan"), D=float("inf"), points=len(pts))
    bs = np.array([b for b, _ in pts])
    logs = np.log(np.array([m for _, m in pts]))
    slope, intercept = np.polyfit(bs, logs, 1)
    D = max(max(math.exp(lm + b), math.exp(-b - lm)) for b, lm in zip(bs, logs))
    return TailFit(slope=float(slope), intercept=float(intercept), D=float(D), points=len(pts))


def fit_cover_constant(
    roof: LogRoof,
    cf: ContinuedFraction,
    witness: DiophantineWitness,
    k: int,
    b: float,
    grid_size: int,
    guard: Optional[float] = None,
    threads: int = 1,
) -> Dict[str, Any]:
    """Smallest ``D`` whose arc cover contains every grid point of ``A_k(b)``."""
    sums = recentred_sums(roof, cf, witness, k, 1, grid_size, guard, threads)
    q = sums.center.q
    inside = np.abs(sums.values) >= b
    if not inside.any():
        return {"b": b, "D": 1.0, "points": 0}
    dist = _orbit_distance(sums.xs[inside], cf, q)
    D = max(1.0, float(np.max(2 * q * dist * math.exp(b))))
    return {"b": b, "D": D, "points": int(np.count_nonzero(inside))}


def rescaled_tail_comparison(table_K: TailTable, table_L: TailTable) -> Dict[str, Any]:
    """
    Ratios ``mass_K(b) / mass_L(b)`` with a relative noise bound
    ``1 / sqrt(grid * mass)`` on the smaller mass.
    """
    rows = []
    signature = False
    by_b = dict(zip(table_L.b_values, table_L.masses))
    for b, m_K in zip(table_K.b_values, table_K.masses):
        if b not in by_b:
            continue
        m_L = by_b[b]
        if m_K > 0 and m_L > 0:
            ratio = m_K / m_L
            noise = 1.0 / math.sqrt(min(table_K.grid_size * m_K, table_L.grid_size * m_L))
            if ratio >= 2 or ratio <= 0.5:
                signature = True
        else:
            ratio, noise = None, None
        rows.append({"b": b, "mass_K": m_K, "mass_L": m_L, "ratio": ratio, "noise": noise})
    noises = [r["noise"] for r in rows if r["noise"] is not None]
    return {
        "w_K": table_K.w,
        "w_L": table_L.w,
        "rows": rows,
        "signature": signature,
        "max_noise": max(noises) if noises else None,
    }


def tail_distribution_distance(
    roof: LogRoof,
    cf: ContinuedFraction,
    witness: DiophantineWitness,
    k: int,
    K: int,
    L: int,
    grid_size: int,
    guard: Optional[float] = None,
    threads: int = 1,
) -> Dict[str, float]:
    """Two-sample KS distance between ``(S_{Kq} - K c_k)/K`` and ``(S_{Lq} - L c_k)/L``."""
    s_K = recentred_sums(roof, cf, witness, k, K, grid_size, guard, threads)
    s_L = recentred_sums(roof, cf, witness, k, L, grid_size, guard, threads)
    result = stats.ks_2samp(s_K.values / K, s_L.values / L)
    return {"statistic": float(result.statistic), "pvalue": float(result.pvalue)}


def denjoy_koksma_check(
    roof: LogRoof,
    cf: ContinuedFraction,
    n: int,
    grid_size: int,
    guard: Optional[float] = None,
    threads: int = 1,
) -> Dict[str, Any]:
    """``max |S_{q_n}(g) - q_n int g|`` on the grid against ``Var(g)``."""
    q = cf.q(n)
    smooth = roof.smooth_part()
    sums = birkhoff_sum_grid(smooth, cf, 0, q, uniform_grid(grid_size), guard, threads)
    deviation = np.abs(sums.values - q * smooth.a0)
    worst = int(np.argmax(deviation))
    bound = smooth.g_variation_bound()
    budget = float(sums.errors[worst]) + 4 * q * EPS * smooth.a0
    return {
        "n": n,
        "q": q,
        "max_deviation": float(deviation[worst]),
        "variation_bound": bound,
        "error_budget": budget,
        "holds": bool(np.all(deviation <= bound + sums.errors + 4 * q * EPS * smooth.a0)),
    }


def fit_dk_constant(
    roof: LogRoof,
    cf: ContinuedFraction,
    ns: Sequence[int],
    grid_size: int,
    guard: Optional[float] = None,
    threads: int = 1,
) -> Dict[str, Any]:
    """Per-n ``C' = max |S_{q_n}(f')| / (q_n + 1/x_min)`` and its spread across n."""
    xs = uniform_grid(grid_size)
    constants = {}
    for n in ns:
        q = cf.q(n)
        sums = birkhoff_sum_grid(roof, cf, 1, q, xs, guard, threads)
        x_min = _orbit_distance(xs, cf, q)
        constants[n] = float(np.max(np.abs(sums.values) / (q + 1.0 / x_min)))
    values = list(constants.values())
    spread = max(values) / min(values) if values and min(values) > 0 else float("inf")
    return {"constants": constants, "spread": spread, "stable": spread <= 2.0}


def dklog_residual(
    cf: ContinuedFraction, n: int, r: int, x, guard: Optional[float] = None
) -> Dict[str, Any]:
    """
    Residual of ``S_{q_n}(h^{(r)})(x)`` against the closest-point prediction
    ``(r-1)! ((-1)^r (x^-)^{-r} + (x^+)^{-r})``, with the bound
    ``100 (r-1)! ||q_{n-1} alpha||^{-r}``.
    """
    if r not in (1, 2, 3):
        raise OrderUnsupported(f"Residual check needs r in (1, 2, 3), got {r}")
    if n < 1:
        raise InvalidParams(f"Need n >= 1, got {n}")
    h = LogRoof(C_f=1.0, a0=1.0)
    q = cf.q(n)
    value = birkhoff_sum(h, cf, r, q, x, guard=guard)
    minima = orbit_min_distance(x, cf, n)
    fact = math.factorial(r - 1)
    prediction = fact * ((-1) ** r * float(minima.minus) ** (-r) + float(minima.plus) ** (-r))
    gap = float(circle_norm(cf.q(n - 1) * cf.alpha))
    bound = 100 * fact * gap ** (-r)
    residual = abs(value.value - prediction)
    return {
        "n": n,
        "r": r,
        "value": value.value,
        "prediction": prediction,
        "residual": residual,
        "bound": bound,
        "holds": residual <= bound + value.error,
    }


def fit_best_constant(
    roof: LogRoof,
    cf: ContinuedFraction,
    witness: DiophantineWitness,
    k: int,
    c2: float,
    sample_points: Sequence[float],
    guard: Optional[float] = None,
) -> Dict[str, Any]:
    """
    ``C'' = max_{l <= q} |S_l(f')(x)| / q`` over sample points whose
    ``q``-orbit stays outside ``[-c2/q, c2/q]``.
    """
    n_k, q = _witness_q(cf, witness, k)
    xs = np.asarray(sample_points, dtype=float)
    keep = _orbit_distance(xs, cf, q) >= c2 / q
    offsets = rotation_offsets(cf, q)
    best = 0.0
    for x in xs[keep]:
        y = (x + offsets) % 1.0
        terms = roof.values(y, 1.0 - y, 1)
        best = max(best, float(np.max(np.abs(np.cumsum(terms)))) / q)
    return {"k": k, "q": q, "c2": c2, "constant": best,
            "used_points": int(np.count_nonzero(keep)), "skipped": int(np.count_nonzero(~keep))}
