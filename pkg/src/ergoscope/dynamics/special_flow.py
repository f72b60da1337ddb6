"""
Roof functions over the constructed exchange and the exact distribution of
their recentred Birkhoff sums.

Both roof families are affine on every continuity piece of ``T``, so
``S_m f`` is affine on every continuity piece of ``T^m`` and its
distribution under Lebesgue measure on the controlled set is computed in
closed form: atoms for the piecewise constant roof, a piecewise constant
density for the piecewise linear one.
"""
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from ergoscope.core.exceptions import (
    BetaInForbiddenRegion,
    DegenerateSupport,
    InvalidParams,
    MassMismatch,
    OutOfRange,
)
from ergoscope.core.helpers import frac_to_str, is_exact, parse_fraction
from ergoscope.dynamics.cocycle import AffineSkew, SkewPiece
from ergoscope.dynamics.iet_core import IET
from ergoscope.dynamics.measures import (
    MASS_TOL,
    AtomicMeasure,
    PiecewiseConstantDensity,
    PiecewiseLinearDensity,
    ProbMeasure,
    rescale,
)
from ergoscope.dynamics.tower_construction import ConstructionState, verify_rigidity
from ergoscope.utils import get_logger

logger = get_logger(__name__)

ROOF_PC = "pc"
ROOF_PL = "pl"


@dataclass(frozen=True)
class RoofPC:
    """
    Piecewise constant roof: ``c_a`` on ``I_a``, plus ``jump`` on
    ``[beta, right end of the interval containing beta)``.

    Attributes:
        constants: ``c_a`` per letter
        beta: location of the extra discontinuity
        jump: ``D_beta``, non-zero
    """
    constants: Dict[str, Fraction]
    beta: Fraction
    jump: Fraction

    kind = ROOF_PC

    def __post_init__(self):
        object.__setattr__(self, "constants", {a: parse_fraction(c) for a, c in self.constants.items()})
        object.__setattr__(self, "beta", parse_fraction(self.beta))
        object.__setattr__(self, "jump", parse_fraction(self.jump))
        if self.jump == 0:
            raise InvalidParams("Jump D_beta must be non-zero")
        if not 0 < self.beta < 1:
            raise InvalidParams(f"beta must lie in (0, 1), got {self.beta}")
        for letter, c in self.constants.items():
            if c <= 0 or c + self.jump <= 0:
                raise InvalidParams(f"Roof is not positive on {letter}: c={c}, jump={self.jump}")

    @classmethod
    def default(cls, T: IET, beta: Any, jump: Any) -> "RoofPC":
        """Constants ``1 + |D_beta| + k/d`` for the k-th letter."""
        jump = parse_fraction(jump)
        d = T.d
        constants = {a: 1 + abs(jump) + Fraction(k, d) for k, a in enumerate(T.perm.alphabet)}
        return cls(constants=constants, beta=beta, jump=jump)

    def value(self, T: IET, x) -> Fraction:
        letter = T.letter_at(x)
        c = self.constants[letter]
        lo, hi = T.interval(letter)
        if lo <= self.beta <= x < hi:
            c += self.jump
        return c

    def skew(self, T: IET) -> AffineSkew:
        """``(T, f)`` as a piecewise-affine skew product."""
        zero = Fraction(0)
        pieces = []
        for letter in T.perm.top:
            lo, hi = T.interval(letter)
            shift = T.shift(letter)
            c = self.constants[letter]
            if lo < self.beta < hi:
                pieces.append(SkewPiece(lo, self.beta, shift, c, zero))
                pieces.append(SkewPiece(self.beta, hi, shift, c + self.jump, zero))
            else:
                pieces.append(SkewPiece(lo, hi, shift, c + (self.jump if self.beta == lo else 0), zero))
        return AffineSkew(pieces)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "constants": {a: frac_to_str(c) for a, c in self.constants.items()},
            "beta": frac_to_str(self.beta),
            "jump": frac_to_str(self.jump),
        }


@dataclass(frozen=True)
class RoofPL:
    """
    Piecewise linear roof ``f(x) = kappa x + c_a`` on ``I_a``.

    Attributes:
        kappa: the common non-zero slope
        offsets: ``c_a`` per letter
    """
    kappa: Fraction
    offsets: Dict[str, Fraction]

    kind = ROOF_PL

    def __post_init__(self):
        object.__setattr__(self, "kappa", parse_fraction(self.kappa))
        object.__setattr__(self, "offsets", {a: parse_fraction(c) for a, c in self.offsets.items()})
        if self.kappa == 0:
            raise InvalidParams("Slope kappa must be non-zero")

    @classmethod
    def default(cls, T: IET, kappa: Any) -> "RoofPL":
        """Offsets ``1 + |kappa| + k/d`` for the k-th letter; positive on ``[0, 1)``."""
        kappa = parse_fraction(kappa)
        d = T.d
        offsets = {a: 1 + abs(kappa) + Fraction(k, d) for k, a in enumerate(T.perm.alphabet)}
        return cls(kappa=kappa, offsets=offsets)

    def value(self, T: IET, x) -> Fraction:
        return self.kappa * x + self.offsets[T.letter_at(x)]

    def skew(self, T: IET) -> AffineSkew:
        pieces = []
        for letter in T.perm.top:
            lo, hi = T.interval(letter)
            c = self.offsets[letter]
            if min(c + self.kappa * lo, c + self.kappa * hi) <= 0:
                raise InvalidParams(f"Roof is not positive on {letter}: kappa={self.kappa}, c={c}")
            pieces.append(SkewPiece(lo, hi, T.shift(letter), c, self.kappa))
        return AffineSkew(pieces)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "kappa": frac_to_str(self.kappa),
            "offsets": {a: frac_to_str(c) for a, c in self.offsets.items()},
        }


Roof = Union[RoofPC, RoofPL]


def cocycle_sum(T: IET, roof: Roof, n_terms: int, x: Any) -> Fraction:
    """
    ``S_n f(x) = sum_{i < n} f(T^i x)`` by walking the orbit.

    Raises:
        OutOfDomain: If ``x`` is outside ``[0, |T|)``
    """
    if n_terms < 0:
        raise InvalidParams(f"n_terms must be non-negative, got {n_terms}")
    x = parse_fraction(x)
    total = Fraction(0)
    for _ in range(n_terms):
        total += roof.value(T, x)
        x = T(x)
    return total


@dataclass
class PushforwardResult:
    """
    Distribution of ``S_{i q_n} f - i a_n`` under Lebesgue on the controlled set.

    Attributes:
        measure: atomic (pc roof) or piecewise constant density (pl roof)
        i: multiplier of ``q_n``
        a_n: ``S_{q_n} f(0)``
        controlled_mass: ``Leb(W_n u Z_n u U_n)``; equals the total mass
        pieces: continuity pieces of ``T^{i q_n}`` over the controlled set
    """
    measure: ProbMeasure
    i: int
    a_n: Fraction
    controlled_mass: Fraction
    pieces: int = 0

    def conditional(self) -> ProbMeasure:
        return self.measure.conditional()

    def to_dict(self) -> Dict[str, Any]:
        return {
            "i": self.i,
            "a_n": frac_to_str(self.a_n),
            "controlled_mass": frac_to_str(self.controlled_mass),
            "pieces": self.pieces,
            "measure": self.measure.to_dict(),
        }


def roof_power(state: ConstructionState, roof: Roof, i: int) -> AffineSkew:
    """``(T^{i q_n}, S_{i q_n} f)``."""
    return roof.skew(state.T).power(i * state.q_n)


def pushforward_exact(
    state: ConstructionState,
    roof: Roof,
    i: int,
    power: Optional[AffineSkew] = None,
) -> PushforwardResult:
    """
    Exact law of ``S_{i q_n}(f) - i a_n`` on ``W_n u Z_n u U_n``.

    Args:
        state: the construction
        roof: a :class:`RoofPC` or :class:`RoofPL`
        i: multiplier in ``[1, K]``
        power: a precomputed :func:`roof_power`, reused when given

    Returns:
        The raw result; ``conditional()`` gives the normalized law

    Raises:
        BetaInForbiddenRegion: If the pc roof jumps outside
            ``union_m T^m [|J|/2, |J|)``
    """
    if not 1 <= i <= state.params.K:
        raise OutOfRange(f"Multiplier i must lie in [1, {state.params.K}], got {i}")
    if isinstance(roof, RoofPC) and not state.beta_window.contains(roof.beta):
        raise BetaInForbiddenRegion(
            f"beta={roof.beta} is outside the admissible window at n={state.n}",
            details="use pick_beta to place the jump",
        )
    if power is None:
        power = roof_power(state, roof, i)

    a_n = cocycle_sum(state.T, roof, state.q_n, 0)
    centre = i * a_n
    controlled = state.controlled
    count = 0

    if isinstance(roof, RoofPC):
        atoms: Dict[Fraction, Fraction] = {}
        for piece in power.pieces_over(controlled):
            loc = piece.intercept - centre
            atoms[loc] = atoms.get(loc, Fraction(0)) + (piece.hi - piece.lo)
            count += 1
        measure: ProbMeasure = AtomicMeasure(atoms.items())
    else:
        segments = []
        for piece in power.pieces_over(controlled):
            v0 = piece.sum_at(piece.lo) - centre
            v1 = piece.sum_at(piece.hi) - centre
            segments.append((min(v0, v1), max(v0, v1), 1 / abs(piece.slope)))
            count += 1
        measure = PiecewiseConstantDensity.from_segments(segments)

    logger.debug(
        f"Pushforward n={state.n} i={i}: {count} pieces, mass {float(measure.total_mass):.6f}"
    )
    return PushforwardResult(
        measure=measure,
        i=i,
        a_n=a_n,
        controlled_mass=controlled.measure(),
        pieces=count,
    )


def predicted_atomic(i: int, gamma: Any, alpha_mass: Any, beta_mass: Any, D_beta: Any) -> AtomicMeasure:
    """
    ``alpha delta_0 + beta delta_{i D} + 2 gamma sum_{0<j<i} delta_{j D}``.

    Raises:
        MassMismatch: Unless ``alpha + beta + 2 gamma (i - 1) = 1`` and
            ``alpha, beta >= gamma``
    """
    if i < 1:
        raise InvalidParams(f"i must be at least 1, got {i}")
    values = (gamma, alpha_mass, beta_mass, D_beta)
    if all(is_exact(v) or isinstance(v, str) for v in values):
        gamma, alpha_mass, beta_mass, D_beta = (parse_fraction(v) for v in values)
        total_ok = alpha_mass + beta_mass + 2 * gamma * (i - 1) == 1
    else:
        gamma, alpha_mass, beta_mass, D_beta = (float(v) for v in values)
        total_ok = abs(alpha_mass + beta_mass + 2 * gamma * (i - 1) - 1) <= MASS_TOL
    if not total_ok:
        raise MassMismatch(
            f"Masses do not sum to one: alpha={alpha_mass}, beta={beta_mass}, gamma={gamma}, i={i}"
        )
    if alpha_mass < gamma or beta_mass < gamma:
        raise MassMismatch(f"Need alpha, beta >= gamma, got {alpha_mass}, {beta_mass} < {gamma}")
    atoms = [(0 * D_beta, alpha_mass), (i * D_beta, beta_mass)]
    atoms.extend((j * D_beta, 2 * gamma) for j in range(1, i))
    return AtomicMeasure(atoms)


def _hat(nodes: Sequence[Tuple[Any, Any]], t):
    """Value at ``t`` of the piecewise linear function through ``nodes`` (zero outside)."""
    if t < nodes[0][0] or t > nodes[-1][0]:
        return 0 * t
    for (x0, y0), (x1, y1) in zip(nodes, nodes[1:]):
        if x0 <= t <= x1:
            if x1 == x0:
                return max(y0, y1)
            return y0 + (y1 - y0) * (t - x0) / (x1 - x0)
    return 0 * t


def predicted_density(i: int, kappa: Any, gamma: Any, rescaled: bool = False) -> PiecewiseLinearDensity:
    """
    Limit density for the piecewise linear roof.

    With ``rescaled`` the density of ``Res_i(P_i)``: a trapezoid of height
    ``1/|kappa|`` on ``c + kappa [-gamma, 1 - (i-1) gamma)`` with
    ``c = (i-1) kappa gamma / 2``, plus ``i - 1`` triangles of height
    ``1/|kappa|`` and base ``2 |kappa| gamma`` centred at
    ``c + kappa (p/i - p gamma)``. Otherwise its image under ``Res_{1/i}``.
    Negative slopes reflect the picture.

    Raises:
        DegenerateSupport: Unless ``0 < gamma < 1/(i+1)`` and ``kappa != 0``
    """
    if i < 1:
        raise InvalidParams(f"i must be at least 1, got {i}")
    exact = is_exact(kappa) and is_exact(gamma)
    if exact:
        kappa, gamma = Fraction(kappa), Fraction(gamma)
        one = Fraction(1)
    else:
        kappa, gamma = float(kappa), float(gamma)
        one = 1.0
    if kappa == 0:
        raise DegenerateSupport("Slope kappa must be non-zero")
    if not 0 < gamma < one / (i + 1):
        raise DegenerateSupport(f"Need 0 < gamma < 1/{i + 1}, got {gamma}")

    k = abs(kappa)
    h = one / k
    c = (i - 1) * k * gamma / 2
    zero = 0 * one
    components: List[List[Tuple[Any, Any]]] = [[
        (c - k * gamma, zero),
        (c, h),
        (c + k * (1 - i * gamma), h),
        (c + k * (1 - (i - 1) * gamma), zero),
    ]]
    for p in range(1, i):
        centre = c + k * (one * p / i - p * gamma)
        components.append([(centre - k * gamma, zero), (centre, h), (centre + k * gamma, zero)])

    nodes = sorted({x for comp in components for x, _ in comp})
    values = [sum((_hat(comp, t) for comp in components), zero) for t in nodes]
    if kappa < 0:
        nodes = [-t for t in reversed(nodes)]
        values = list(reversed(values))
    density = PiecewiseLinearDensity(nodes, values)
    if rescaled:
        return density
    return rescale(density, one / i)


def count_level_maxima(density: PiecewiseLinearDensity, level: Any, tol: float = 1e-12) -> int:
    """Nodes where the density equals ``level`` and is a local maximum."""
    nodes = density.node_values()
    count = 0
    for idx, (_, value) in enumerate(nodes):
        hit = value == level if density.is_exact else abs(value - level) <= tol
        if not hit:
            continue
        left = nodes[idx - 1][1] if idx > 0 else 0
        right = nodes[idx + 1][1] if idx + 1 < len(nodes) else 0
        if left <= value and right <= value and (left < value or right < value):
            count += 1
    return count


def second_moment(measure: ProbMeasure):
    """``int v^2 dP`` for atomic and piecewise constant laws, exactly."""
    if isinstance(measure, AtomicMeasure):
        return sum((m * v * v for v, m in measure.atoms()), 0 * measure.total_mass)
    if isinstance(measure, PiecewiseConstantDensity):
        bps, vals = measure.breakpoints(), measure.values
        total = 0 * measure.total_mass
        for lo, hi, rho in zip(bps, bps[1:], vals):
            total += rho * (hi ** 3 - lo ** 3) / 3
        return total
    raise InvalidParams(f"Second moment not available for {measure.kind} measures")


@dataclass
class HypothesesReport:
    """
    Checkable form of the limit-theorem hypotheses on ``C = W u Z u U``.

    Attributes:
        controlled_mass: ``Leb(C)``
        rigidity_deviation: ``max |T^{i q_n} x - x - i Delta_n|`` on ``C``
        second_moment: ``int_C |S_{i q_n} f - i a_n|^2``
        conditional: the conditional law of ``S_{i q_n} f - i a_n``
    """
    n: int
    i: int
    controlled_mass: Fraction
    rigidity_deviation: Fraction
    second_moment: Fraction
    conditional: ProbMeasure

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "i": self.i,
            "controlled_mass": frac_to_str(self.controlled_mass),
            "rigidity_deviation": frac_to_str(self.rigidity_deviation),
            "second_moment": frac_to_str(self.second_moment),
            "conditional_kind": self.conditional.kind,
        }


def main_hypotheses(state: ConstructionState, roof: Roof, i: int) -> HypothesesReport:
    power = roof_power(state, roof, i)
    rigidity = verify_rigidity(state, i, power=power)
    result = pushforward_exact(state, roof, i, power=power)
    return HypothesesReport(
        n=state.n,
        i=i,
        controlled_mass=result.controlled_mass,
        rigidity_deviation=rigidity.max_deviation,
        second_moment=second_moment(result.measure),
        conditional=result.conditional(),
    )


def cocycle_additivity(
    state: ConstructionState, roof: Roof, i: int, power: Optional[AffineSkew] = None
) -> Dict[str, Any]:
    """
    ``S_{i q_n} f(x) = sum_{m < i} S_{q_n} f(T^{m q_n} x)`` at the left end
    and midpoint of every continuity piece over the controlled set.
    """
    if power is None:
        power = roof_power(state, roof, i)
    one_period = roof_power(state, roof, 1)
    checked = 0
    failures = 0
    for piece in power.pieces_over(state.controlled):
        for x in (piece.lo, (piece.lo + piece.hi) / 2):
            _, direct = power.evaluate(x)
            y, total = x, Fraction(0)
            for _ in range(i):
                y, s = one_period.evaluate(y)
                total += s
            checked += 1
            if total != direct:
                failures += 1
    if failures:
        logger.warning(f"Cocycle additivity fails at {failures} of {checked} points (n={state.n}, i={i})")
    return {"n": state.n, "i": i, "checked": checked, "failures": failures, "holds": failures == 0}


def atomic_structure(
    state: ConstructionState, result: PushforwardResult, jump: Fraction
) -> Dict[str, Any]:
    """
    Support of a pc pushforward against ``{j D_beta : 0 <= j <= i}`` and the
    mass lower bounds at ``0`` and ``i D_beta``.
    """
    i = result.i
    lattice = {j * jump for j in range(i + 1)}
    atoms = result.measure.atoms()
    masses = dict(atoms)
    K = state.params.K
    top_slice = state.U[K - i] if 0 <= K - i < len(state.U) else None
    return {
        "n": state.n,
        "i": i,
        "support_on_lattice": all(loc in lattice for loc, _ in atoms),
        "atom_count": len(atoms),
        "mass_at_zero_bound": masses.get(Fraction(0), 0) >= state.Z.measure(),
        "mass_at_top_bound": (
            top_slice is None or masses.get(i * jump, 0) >= top_slice.measure()
        ),
        "interior_masses": [m for loc, m in atoms if loc not in (0, i * jump)],
    }


def disjointness_witness(result_K: PushforwardResult, result_L: PushforwardResult) -> Dict[str, Any]:
    """
    Atom counts of ``Res_K`` of the ``i = K`` law and ``Res_L`` of the
    ``i = L`` law; rescaling keeps the count, so differing counts witness
    distinct limit measures.
    """
    P_K = rescale(result_K.conditional(), result_K.i)
    P_L = rescale(result_L.conditional(), result_L.i)
    count_K, count_L = len(P_K.atoms()), len(P_L.atoms())
    return {"K": result_K.i, "L": result_L.i, "atoms_K": count_K, "atoms_L": count_L,
            "differ": count_K != count_L}
