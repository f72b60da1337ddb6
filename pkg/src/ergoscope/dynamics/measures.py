"""
Probability measures on the line.

Four representations share one interface: finite atomic measures, densities
that are piecewise linear with continuous nodes, piecewise constant densities
and empirical sample measures. Exact variants (Fraction data) give exact CDFs,
rescalings and Kolmogorov-Smirnov distances; float variants are compared with a
fixed tolerance, and the two are never silently mixed.
"""
import math
from abc import ABC, abstractmethod
from bisect import bisect_left, bisect_right
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from ergoscope.core.exceptions import (
    DegenerateSupport,
    InvalidParams,
    MixedArithmetic,
    SubProbability,
    ZeroScale,
)
from ergoscope.core.helpers import is_exact, jsonable, parse_fraction
from ergoscope.utils import get_logger

logger = get_logger(__name__)

FLOAT_TOL = 1e-12
MASS_TOL = 1e-9


def _all_exact(values: Iterable[Any]) -> bool:
    return all(is_exact(v) for v in values)


def _coerce(values: Sequence[Any], exact: bool) -> List[Any]:
    if exact:
        return [Fraction(v) for v in values]
    return [float(v) for v in values]


class ProbMeasure(ABC):
    """Common interface of the measure representations."""

    kind: str = "abstract"

    @property
    @abstractmethod
    def is_exact(self) -> bool:
        ...

    @property
    @abstractmethod
    def total_mass(self):
        ...

    @abstractmethod
    def cdf(self, t):
        """``P((-inf, t])``."""

    @abstractmethod
    def cdf_left(self, t):
        """``P((-inf, t))``."""

    @abstractmethod
    def breakpoints(self) -> List[Any]:
        """Points where the CDF may fail to be smooth, sorted."""

    @abstractmethod
    def rescaled(self, w) -> "ProbMeasure":
        ...

    @abstractmethod
    def scaled_mass(self, factor) -> "ProbMeasure":
        ...

    @abstractmethod
    def support(self) -> Tuple[Any, Any]:
        ...

    @abstractmethod
    def as_float(self) -> "ProbMeasure":
        ...

    @abstractmethod
    def to_dict(self) -> Dict[str, Any]:
        ...

    def atoms(self) -> List[Tuple[Any, Any]]:
        return []

    def density_on(self, lo, hi) -> Tuple[Any, Any]:
        """Density just right of ``lo`` and just left of ``hi`` on a breakpoint-free segment."""
        zero = Fraction(0) if self.is_exact else 0.0
        return zero, zero

    def is_probability(self) -> bool:
        if self.is_exact:
            return self.total_mass == 1
        return abs(self.total_mass - 1) <= MASS_TOL

    def conditional(self) -> "ProbMeasure":
        """The measure normalized to total mass one."""
        total = self.total_mass
        if total == 0:
            raise DegenerateSupport("Cannot normalize a measure of zero mass")
        return self.scaled_mass(1 / total if not self.is_exact else Fraction(1) / total)

    def tail(self, t):
        """``P((-inf, -t) u (t, inf))``."""
        return self.cdf_left(-t) + (self.total_mass - self.cdf(t))


class AtomicMeasure(ProbMeasure):
    """
    Finite sum of point masses.

    Atoms at the same location merge on construction: exactly for rationals,
    within ``1e-12`` for floats.
    """

    kind = "atomic"

    def __init__(self, atoms: Iterable[Tuple[Any, Any]]):
        atoms = list(atoms)
        exact = _all_exact(v for atom in atoms for v in atom)
        merged: List[List[Any]] = []
        for loc, mass in sorted(
            ((Fraction(l) if exact else float(l), Fraction(m) if exact else float(m)) for l, m in atoms),
            key=lambda a: a[0],
        ):
            if mass < 0:
                raise SubProbability(f"Negative atom mass {mass} at {loc}")
            if mass == 0:
                continue
            if merged and (loc == merged[-1][0] or (not exact and abs(loc - merged[-1][0]) <= FLOAT_TOL)):
                merged[-1][1] += mass
            else:
                merged.append([loc, mass])
        self._exact = exact
        self._locs = [a[0] for a in merged]
        self._masses = [a[1] for a in merged]
        self._cum = _running(self._masses)

    @property
    def is_exact(self) -> bool:
        return self._exact

    @property
    def total_mass(self):
        if not self._masses:
            return Fraction(0) if self._exact else 0.0
        return self._cum[-1]

    def atoms(self) -> List[Tuple[Any, Any]]:
        return list(zip(self._locs, self._masses))

    def cdf(self, t):
        k = bisect_right(self._locs, t)
        return self._cum[k - 1] if k else (Fraction(0) if self._exact else 0.0)

    def cdf_left(self, t):
        k = bisect_left(self._locs, t)
        return self._cum[k - 1] if k else (Fraction(0) if self._exact else 0.0)

    def breakpoints(self) -> List[Any]:
        return list(self._locs)

    def rescaled(self, w) -> "AtomicMeasure":
        return AtomicMeasure((loc / w, m) for loc, m in self.atoms())

    def scaled_mass(self, factor) -> "AtomicMeasure":
        return AtomicMeasure((loc, m * factor) for loc, m in self.atoms())

    def support(self):
        if not self._locs:
            raise DegenerateSupport("Empty atomic measure has no support")
        return self._locs[0], self._locs[-1]

    def as_float(self) -> "AtomicMeasure":
        return AtomicMeasure((float(l), float(m)) for l, m in self.atoms())

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, "atoms": jsonable(self.atoms())}

    def __repr__(self) -> str:
        return f"AtomicMeasure({len(self._locs)} atoms, mass {self.total_mass})"


def _running(values: Sequence[Any]) -> List[Any]:
    out, acc = [], Fraction(0)
    for v in values:
        acc += v
        out.append(acc)
    return out


class _SegmentDensity(ProbMeasure):
    """Shared machinery for densities given on consecutive breakpoints."""

    def __init__(self, breakpoints: Sequence[Any], values: Sequence[Any], n_values: int):
        if len(breakpoints) < 2:
            raise DegenerateSupport("A density needs at least two breakpoints")
        if len(values) != n_values:
            raise DegenerateSupport(
                f"Expected {n_values} density values for {len(breakpoints)} breakpoints, got {len(values)}"
            )
        exact = _all_exact(breakpoints) and _all_exact(values)
        self._exact = exact
        self._bps = _coerce(breakpoints, exact)
        self._vals = _coerce(values, exact)
        if any(b <= a for a, b in zip(self._bps, self._bps[1:])):
            raise DegenerateSupport("Breakpoints must be strictly increasing")
        if any(v < 0 for v in self._vals):
            raise SubProbability("Density values must be non-negative")
        self._cum = [Fraction(0) if exact else 0.0]
        for k in range(len(self._bps) - 1):
            self._cum.append(self._cum[-1] + self._segment_mass(k))

    @abstractmethod
    def _segment_mass(self, k: int):
        ...

    @abstractmethod
    def _value_in(self, k: int, t):
        """Density at ``t`` inside segment ``k`` (closed at both ends)."""

    @property
    def is_exact(self) -> bool:
        return self._exact

    @property
    def total_mass(self):
        return self._cum[-1]

    @property
    def values(self) -> List[Any]:
        return list(self._vals)

    def breakpoints(self) -> List[Any]:
        return list(self._bps)

    def support(self):
        return self._bps[0], self._bps[-1]

    def _partial(self, k: int, t):
        a = self._bps[k]
        # trapezoid rule is exact for linear pieces
        return (t - a) * (self._value_in(k, a) + self._value_in(k, t)) / 2

    def cdf(self, t):
        if t <= self._bps[0]:
            return self._cum[0]
        if t >= self._bps[-1]:
            return self._cum[-1]
        k = bisect_right(self._bps, t) - 1
        return self._cum[k] + self._partial(k, t)

    def cdf_left(self, t):
        return self.cdf(t)

    def density(self, t):
        """Right-continuous density value at ``t``."""
        if t < self._bps[0] or t >= self._bps[-1]:
            return Fraction(0) if self._exact else 0.0
        k = bisect_right(self._bps, t) - 1
        return self._value_in(k, t)

    def density_on(self, lo, hi):
        k = bisect_right(self._bps, lo) - 1
        if k < 0 or k >= len(self._bps) - 1 or hi > self._bps[k + 1]:
            zero = Fraction(0) if self._exact else 0.0
            return zero, zero
        return self._value_in(k, lo), self._value_in(k, hi)

    def _mapped_breakpoints(self, w) -> Tuple[List[Any], bool]:
        bps = [b / w for b in self._bps]
        flip = w < 0
        return (bps[::-1] if flip else bps), flip


class PiecewiseLinearDensity(_SegmentDensity):
    """Density linear between consecutive nodes, zero outside ``[b_0, b_last]``."""

    kind = "pl_density"

    def __init__(self, breakpoints: Sequence[Any], values: Sequence[Any]):
        super().__init__(breakpoints, values, len(breakpoints))

    def _segment_mass(self, k: int):
        return (self._bps[k + 1] - self._bps[k]) * (self._vals[k] + self._vals[k + 1]) / 2

    def _value_in(self, k: int, t):
        a, b = self._bps[k], self._bps[k + 1]
        va, vb = self._vals[k], self._vals[k + 1]
        return va + (vb - va) * (t - a) / (b - a)

    def node_values(self) -> List[Tuple[Any, Any]]:
        return list(zip(self._bps, self._vals))

    def rescaled(self, w) -> "PiecewiseLinearDensity":
        bps, flip = self._mapped_breakpoints(w)
        vals = [v * abs(w) for v in self._vals]
        return PiecewiseLinearDensity(bps, vals[::-1] if flip else vals)

    def scaled_mass(self, factor) -> "PiecewiseLinearDensity":
        return PiecewiseLinearDensity(self._bps, [v * factor for v in self._vals])

    def as_float(self) -> "PiecewiseLinearDensity":
        return PiecewiseLinearDensity([float(b) for b in self._bps], [float(v) for v in self._vals])

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, "breakpoints": jsonable(self._bps), "values": jsonable(self._vals)}

    def __repr__(self) -> str:
        return f"PiecewiseLinearDensity({len(self._bps)} nodes on [{self._bps[0]}, {self._bps[-1]}])"


class PiecewiseConstantDensity(_SegmentDensity):
    """Density constant on each ``[b_k, b_{k+1})``."""

    kind = "pc_density"

    def __init__(self, breakpoints: Sequence[Any], values: Sequence[Any]):
        super().__init__(breakpoints, values, len(breakpoints) - 1)

    @classmethod
    def from_segments(cls, segments: Iterable[Tuple[Any, Any, Any]]) -> "PiecewiseConstantDensity":
        """
        Sum of uniform densities ``(lo, hi, value)`` by a sweep over endpoints.
        """
        events: Dict[Any, Any] = {}
        for lo, hi, value in segments:
            if hi <= lo:
                continue
            events[lo] = events.get(lo, 0) + value
            events[hi] = events.get(hi, 0) - value
        if len(events) < 2:
            raise DegenerateSupport("No segments with positive length")
        points = sorted(events)
        values = []
        level = 0
        for p in points[:-1]:
            level += events[p]
            values.append(level)
        return cls(points, values)

    def _segment_mass(self, k: int):
        return (self._bps[k + 1] - self._bps[k]) * self._vals[k]

    def _value_in(self, k: int, t):
        return self._vals[k]

    def rescaled(self, w) -> "PiecewiseConstantDensity":
        bps, flip = self._mapped_breakpoints(w)
        vals = [v * abs(w) for v in self._vals]
        return PiecewiseConstantDensity(bps, vals[::-1] if flip else vals)

    def scaled_mass(self, factor) -> "PiecewiseConstantDensity":
        return PiecewiseConstantDensity(self._bps, [v * factor for v in self._vals])

    def as_float(self) -> "PiecewiseConstantDensity":
        return PiecewiseConstantDensity([float(b) for b in self._bps], [float(v) for v in self._vals])

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, "breakpoints": jsonable(self._bps), "values": jsonable(self._vals)}

    def __repr__(self) -> str:
        return f"PiecewiseConstantDensity({len(self._vals)} cells on [{self._bps[0]}, {self._bps[-1]}])"


class EmpiricalMeasure(ProbMeasure):
    """Weighted sample measure (float only)."""

    kind = "empirical"

    def __init__(self, samples: Sequence[float], weights: Optional[Sequence[float]] = None):
        samples = np.asarray(samples, dtype=float)
        if samples.size == 0:
            raise DegenerateSupport("Empirical measure needs at least one sample")
        if weights is None:
            weights = np.full(samples.size, 1.0 / samples.size)
        weights = np.asarray(weights, dtype=float)
        if weights.shape != samples.shape or np.any(weights < 0):
            raise SubProbability("Weights must be non-negative and match the samples")
        order = np.argsort(samples, kind="stable")
        self._samples = samples[order]
        self._weights = weights[order]
        self._cum = np.cumsum(self._weights)

    @property
    def samples(self) -> np.ndarray:
        return self._samples

    @property
    def is_exact(self) -> bool:
        return False

    @property
    def total_mass(self) -> float:
        return float(self._cum[-1])

    def cdf(self, t) -> float:
        k = int(np.searchsorted(self._samples, float(t), side="right"))
        return float(self._cum[k - 1]) if k else 0.0

    def cdf_left(self, t) -> float:
        k = int(np.searchsorted(self._samples, float(t), side="left"))
        return float(self._cum[k - 1]) if k else 0.0

    def breakpoints(self) -> List[float]:
        return np.unique(self._samples).tolist()

    def atoms(self) -> List[Tuple[float, float]]:
        return AtomicMeasure(zip(self._samples.tolist(), self._weights.tolist())).atoms()

    def rescaled(self, w) -> "EmpiricalMeasure":
        return EmpiricalMeasure(self._samples / float(w), self._weights)

    def scaled_mass(self, factor) -> "EmpiricalMeasure":
        return EmpiricalMeasure(self._samples, self._weights * float(factor))

    def support(self):
        return float(self._samples[0]), float(self._samples[-1])

    def as_float(self) -> "EmpiricalMeasure":
        return self

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "samples": self._samples.tolist(),
            "weights": self._weights.tolist(),
        }

    def __repr__(self) -> str:
        return f"EmpiricalMeasure({self._samples.size} samples)"


def measure_from_dict(data: Dict[str, Any]) -> ProbMeasure:
    """Inverse of ``to_dict`` for every variant."""
    kind = data.get("kind")

    def num(x):
        return float(x) if isinstance(x, float) else parse_fraction(x)

    if kind == AtomicMeasure.kind:
        return AtomicMeasure((num(l), num(m)) for l, m in data["atoms"])
    if kind == PiecewiseLinearDensity.kind:
        return PiecewiseLinearDensity([num(b) for b in data["breakpoints"]], [num(v) for v in data["values"]])
    if kind == PiecewiseConstantDensity.kind:
        return PiecewiseConstantDensity([num(b) for b in data["breakpoints"]], [num(v) for v in data["values"]])
    if kind == EmpiricalMeasure.kind:
        return EmpiricalMeasure(data["samples"], data.get("weights"))
    raise InvalidParams(f"Unknown measure kind: {kind!r}")


def rescale(P: ProbMeasure, w) -> ProbMeasure:
    """
    ``Res_w(P)``: the measure ``A -> P(w A)``.

    Atoms move ``x -> x / w`` and densities become ``x -> |w| f(w x)``.
    """
    if w == 0:
        raise ZeroScale("Res_w needs w != 0")
    if P.is_exact:
        if not is_exact(w):
            raise MixedArithmetic(f"Exact measure rescaled by inexact factor {w!r}")
        w = Fraction(w)
    else:
        w = float(w)
    return P.rescaled(w)


def cdf(P: ProbMeasure, t):
    return P.cdf(t)


def cdf_table(P: ProbMeasure, ts: Iterable[Any]) -> List[Tuple[Any, Any]]:
    """``(t, F(t))`` rows for plotting and CSV dumps."""
    return [(t, P.cdf(t)) for t in ts]


def _harmonize(P: ProbMeasure, Q: ProbMeasure) -> Tuple[ProbMeasure, ProbMeasure]:
    if P.is_exact == Q.is_exact:
        return P, Q
    if isinstance(P, EmpiricalMeasure) or isinstance(Q, EmpiricalMeasure):
        return P.as_float(), Q.as_float()
    raise MixedArithmetic(
        f"Cannot compare exact and floating-point measures ({P.kind} vs {Q.kind})"
    )


def ks_distance(P: ProbMeasure, Q: ProbMeasure):
    """
    Kolmogorov-Smirnov distance ``sup_t |F_P(t) - F_Q(t)|``.

    The supremum is taken over the merged breakpoints (both one-sided limits)
    and over the interior points of each segment where the two densities
    cross; the CDF difference is quadratic on each segment, so these
    candidates are exhaustive.
    """
    for M in (P, Q):
        if not M.is_probability():
            raise SubProbability(f"{M.kind} measure has total mass {M.total_mass}, expected 1")
    P, Q = _harmonize(P, Q)

    points = sorted(set(P.breakpoints()) | set(Q.breakpoints()))
    best = Fraction(0) if P.is_exact else 0.0
    for t in points:
        best = max(best, abs(P.cdf(t) - Q.cdf(t)), abs(P.cdf_left(t) - Q.cdf_left(t)))

    for a, b in zip(points, points[1:]):
        p0, p1 = P.density_on(a, b)
        q0, q1 = Q.density_on(a, b)
        d0, d1 = p0 - q0, p1 - q1
        if d0 * d1 < 0:
            t = a + (b - a) * d0 / (d0 - d1)
            best = max(best, abs(P.cdf(t) - Q.cdf(t)))
    return best


def atom_spectrum(P: ProbMeasure, mass_threshold=0) -> List[Tuple[Any, Any]]:
    """Atoms of mass at least ``mass_threshold``, sorted by location."""
    return [(loc, m) for loc, m in P.atoms() if m >= mass_threshold and m > 0]


def exp_decay_check(
    P: ProbMeasure, c: float, b: float, grid: Optional[Sequence[float]] = None
) -> bool:
    """
    True iff ``P(|x| > t) < c e^{-b t}`` at every grid point and every
    ``|breakpoint|``.
    """
    if c <= 0 or b <= 0:
        raise InvalidParams(f"Need c, b > 0, got c={c}, b={b}")
    lo, hi = P.support()
    radius = max(abs(float(lo)), abs(float(hi)))
    if grid is None:
        grid = np.linspace(0.0, 2.0 * radius + 1.0, 201).tolist()
    ts = set(abs(t) for t in P.breakpoints()) | set(grid)
    for t in sorted(ts):
        bound = c * math.exp(-b * float(t))
        if not P.tail(t) < bound:
            logger.debug(f"Tail bound fails at t={t}: {P.tail(t)} >= {bound}")
            return False
    return True


def find_exp_decay(P: ProbMeasure) -> Tuple[float, float]:
    """
    Constants ``(c, b)`` certifying exponential decay of a compactly
    supported measure: ``b = 1`` (smaller for very wide supports) and
    ``c = 1.01 e^{b R}`` with ``R`` the support radius.
    """
    lo, hi = P.support()
    radius = max(abs(float(lo)), abs(float(hi)))
    b = 1.0 if radius <= 700 else 700.0 / radius
    c = math.exp(b * radius) * 1.01
    return c, b
