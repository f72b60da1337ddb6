"""
Rigid Rokhlin towers along a prescribed induction path.

For a level ``n`` the construction fixes a length vector ``lambda'`` in the
recurrence set ``Y_n^K``, builds the exchange ``T = T(pi0, B lambda' / |B lambda'|)``
on ``[0, 1)`` and inducts ``N`` steps along the positive path (reaching
``(pi_hat, lambda')``) followed by ``(d - 1)(n - 1)`` steps that only cut from
the first interval. The resulting towers give explicit interval unions
``W_n``, ``Z_n``, ``U_{n,p}`` on which ``T^{i q_n}`` is translation by
``i Delta_n``, and the uncontrolled remainder ``X_n``. Everything is exact.
"""
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

from ergoscope.core.exceptions import (
    InvariantViolated,
    OutOfRange,
    PermutationMismatch,
)
from ergoscope.core.helpers import frac_to_str, parse_fraction
from ergoscope.dynamics.cocycle import AffineSkew, SkewPiece
from ergoscope.dynamics.iet_core import (
    IET,
    InductionRecord,
    Permutation,
    PositivePath,
    TowerDecomposition,
    column_sums,
    make_iet,
    mat_vec,
    rauzy_induct,
    tower_decomposition,
)
from ergoscope.dynamics.intervals import IntervalUnion, union_all
from ergoscope.utils import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class ConstructionParams:
    """
    Parameters of the level-``n`` construction.

    Attributes:
        K: the larger time multiplier
        L: the smaller time multiplier
        n: construction level
        epsilon: below ``min(1/(100 rho(B)), 1/(100 K))``
        delta: ``delta' < delta < epsilon / 2``
        delta_prime: ``epsilon / 3 < delta'``
        path: the positive induction path supplying ``B``, ``pi0`` and ``pi_hat``
    """
    K: int
    L: int
    n: int
    epsilon: Fraction
    delta: Fraction
    delta_prime: Fraction
    path: PositivePath

    def __post_init__(self):
        for name in ("epsilon", "delta", "delta_prime"):
            object.__setattr__(self, name, parse_fraction(getattr(self, name)))

    @property
    def B(self):
        return self.path.B

    @property
    def pi0(self) -> Permutation:
        return self.path.pi_start

    @property
    def pi_hat(self) -> Permutation:
        return self.path.pi_hat

    @property
    def rho(self) -> Fraction:
        return self.path.rho

    @property
    def d(self) -> int:
        return self.pi_hat.d

    def check(self) -> None:
        """
        Raises:
            InvariantViolated: Naming the first parameter that is out of range
        """
        if not self.K > self.L >= 1:
            raise InvariantViolated(f"Need K > L >= 1, got K={self.K}, L={self.L}")
        if self.n < 2:
            raise InvariantViolated(f"Construction level n must be at least 2, got {self.n}")
        bound = min(1 / (100 * self.rho), Fraction(1, 100 * self.K))
        if not 0 < self.epsilon < bound:
            raise InvariantViolated(
                f"epsilon={self.epsilon} must lie in (0, {bound})",
                details=f"rho(B)={self.rho}, K={self.K}",
            )
        if not self.epsilon / 3 < self.delta_prime < self.delta < self.epsilon / 2:
            raise InvariantViolated(
                "Need epsilon/3 < delta' < delta < epsilon/2",
                details=f"epsilon={self.epsilon}, delta={self.delta}, delta'={self.delta_prime}",
            )
        if not self.pi_hat.has_swapped_ends():
            raise InvariantViolated(f"pi_hat={self.pi_hat} does not swap its endpoints")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "K": self.K,
            "L": self.L,
            "n": self.n,
            "epsilon": frac_to_str(self.epsilon),
            "delta": frac_to_str(self.delta),
            "delta_prime": frac_to_str(self.delta_prime),
            "path": self.path.to_dict(),
        }


def default_params(K: int, L: int, n: int, path: PositivePath) -> ConstructionParams:
    """
    ``epsilon = min(1/(100 rho), 1/(100 K)) / 2``, ``delta' = 3 epsilon / 8``
    and ``delta = 11 epsilon / 24``.
    """
    epsilon = min(1 / (100 * path.rho), Fraction(1, 100 * K)) / 2
    params = ConstructionParams(
        K=K,
        L=L,
        n=n,
        epsilon=epsilon,
        delta=epsilon * Fraction(11, 24),
        delta_prime=epsilon * Fraction(3, 8),
        path=path,
    )
    params.check()
    return params


@dataclass
class YnReport:
    """
    Exact evaluation of the ``Y_n^K`` membership conditions.

    Attributes:
        holds: ``Q_n > 0`` and every margin positive
        Q_n: ``lambda_a - (n - 2) sum_{j >= 2} lambda_j``
        ratios: the four tested ratios
        margins: distance of each ratio to the nearer end of its window
    """
    holds: bool
    Q_n: Fraction
    ratios: Dict[str, Fraction]
    margins: Dict[str, Fraction]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "holds": self.holds,
            "Q_n": frac_to_str(self.Q_n),
            "ratios": {k: frac_to_str(v) for k, v in self.ratios.items()},
            "margins": {k: frac_to_str(v) for k, v in self.margins.items()},
        }


def _roles(perm: Permutation) -> Tuple[str, Tuple[str, ...], str]:
    # first letter, middle letters, last letter of the top row
    return perm.top[0], tuple(perm.top[1:-1]), perm.top[-1]


def check_Yn(lengths: Sequence[Any], params: ConstructionParams) -> YnReport:
    """
    Evaluate ``Q_n > 0`` and the three two-sided window conditions, plus the
    derived ``epsilon/2 < (lambda_d - lambda~_a)/Q_n < epsilon`` sandwich.
    """
    lengths = tuple(parse_fraction(x) for x in lengths)
    perm = params.pi_hat
    a, middle, last = _roles(perm)
    lam = {letter: lengths[perm.index(letter)] for letter in perm.alphabet}
    n = params.n
    gap = params.delta - params.delta_prime
    rest = sum((lam[b] for b in perm.top[1:]), Fraction(0))
    mid = sum((lam[b] for b in middle), Fraction(0))
    Q = lam[a] - (n - 2) * rest
    if Q <= 0:
        return YnReport(False, Q, {}, {"Q_n": Q})

    reduced = lam[a] - (n - 1) * rest
    windows = {
        "ineq1": (
            reduced / Q,
            Fraction(1, 2) - params.delta + 3 * gap / 8,
            Fraction(1, 2) - params.delta + 5 * gap / 8,
        ),
        "ineq2": (
            lam[last] / Q,
            Fraction(1, 2) + params.delta_prime + 3 * gap / 8,
            Fraction(1, 2) + params.delta_prime + 5 * gap / 8,
        ),
        "ineq3": (mid / Q, None, 1 / (n + params.rho)),
        "ineq4": ((lam[last] - reduced) / Q, params.epsilon / 2, params.epsilon),
    }
    ratios = {}
    margins = {}
    for name, (value, lo, hi) in windows.items():
        ratios[name] = value
        upper = hi - value
        margins[name] = upper if lo is None else min(value - lo, upper)
    holds = all(m > 0 for m in margins.values())
    return YnReport(holds=holds, Q_n=Q, ratios=ratios, margins=margins)


def sample_Yn(params: ConstructionParams) -> Tuple[Fraction, ...]:
    """
    The explicit point of ``Y_n^K`` (normalized), in alphabet order.

    Middle coordinates are ``(delta - delta')/((d - 1)(n + rho))``; the last
    and first coordinates are set so that the window conditions hold with
    room to spare.

    Raises:
        InvariantViolated: If the parameters are inadmissible or the vector
            misses the window (for ``d = 2`` this happens when
            ``n + rho(B)`` is too small)
    """
    params.check()
    perm = params.pi_hat
    d = perm.d
    a, middle, last = _roles(perm)
    gap = params.delta - params.delta_prime
    filler = gap / ((d - 1) * (params.n + params.rho))

    lam = {b: filler for b in middle}
    lam[last] = Fraction(1, 2) + params.delta_prime + Fraction(3, 8) * gap + filler
    rest = sum(lam.values(), Fraction(0))
    lam[a] = (
        Fraction(1, 2) - params.delta + Fraction(5, 8) * gap - 2 * filler
        + (params.n - 1) * rest
    )
    total = sum(lam.values(), Fraction(0))
    vector = tuple(lam[b] / total for b in perm.alphabet)

    report = check_Yn(vector, params)
    if not report.holds:
        failing = [k for k, m in report.margins.items() if m <= 0]
        raise InvariantViolated(
            f"Sample vector misses Y_n at n={params.n}: {', '.join(failing)}",
            details=f"margins={ {k: float(v) for k, v in report.margins.items()} }",
        )
    logger.debug(f"Sampled Y_n point for n={params.n}: filler {filler}")
    return vector


@dataclass(frozen=True)
class ConstructionState:
    """
    The towers and controlled sets at level ``n``.

    Attributes:
        params: the construction parameters
        T: top-level exchange on ``[0, 1)``
        record: the full induction record (path plus extra steps)
        towers: Rokhlin towers of ``record`` inside ``T``
        lambda_rn: final induced lengths per letter
        s: column sums of ``B`` per letter
        q_n: ``s_d + n s_1``
        Delta_n: ``lambda_d - lambda_a`` at the final level
        Sigma_n: left end of the last induced interval
        I_length: ``|I^n| = Q_n(lambda')`` in ``[0, 1)`` units
        J_length: ``|J^n| = lambda_a - K Delta_n``
        W: ``union_{i < q_n} T^i J^n``
        Z: ``union_{i < h_d} T^i [Sigma_n, Sigma_n + Delta_n)``
        U: ``U_{n,p}`` for ``p = 1..K``, each already minus ``X_n``
        X_parts: the middle towers, the top slab and the short-time preimages
            of the middle bases
        beta_window: ``union_{m < q_n} T^m [|J|/2, |J|)``
        partition_ok: ``W, Z, U, X`` are disjoint and cover ``[0, 1)``
    """
    params: ConstructionParams
    T: IET
    record: InductionRecord
    towers: TowerDecomposition
    lambda_rn: Dict[str, Fraction]
    s: Dict[str, int]
    q_n: int
    Delta_n: Fraction
    Sigma_n: Fraction
    I_length: Fraction
    J_length: Fraction
    W: IntervalUnion
    Z: IntervalUnion
    U: Tuple[IntervalUnion, ...]
    X_parts: Tuple[IntervalUnion, IntervalUnion, IntervalUnion]
    beta_window: IntervalUnion
    partition_ok: bool
    lambda_prime: Tuple[Fraction, ...] = field(default=())

    @property
    def n(self) -> int:
        return self.params.n

    @property
    def first_letter(self) -> str:
        return self.params.pi_hat.top[0]

    @property
    def last_letter(self) -> str:
        return self.params.pi_hat.top[-1]

    @property
    def s_1(self) -> int:
        return self.s[self.first_letter]

    @property
    def last_height(self) -> int:
        """Height ``s_d + (n - 1) s_1`` of the tower over the last interval."""
        return self.towers.heights[self.last_letter]

    @property
    def gamma_n(self) -> Fraction:
        return self.q_n * self.Delta_n

    @property
    def U_union(self) -> IntervalUnion:
        return union_all(self.U)

    @property
    def X(self) -> IntervalUnion:
        return union_all(self.X_parts)

    @property
    def controlled(self) -> IntervalUnion:
        """``C = W_n u Z_n u U_n``."""
        return union_all((self.W, self.Z, *self.U))

    def W_level_start(self, m: int) -> Fraction:
        """Left end of ``T^m J^n``."""
        if m < self.s_1:
            return self.towers.levels[self.first_letter][m][0]
        return self.towers.levels[self.last_letter][m - self.s_1][0] + self.Delta_n

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "params": self.params.to_dict(),
            "T": self.T.to_dict(),
            "lambda_prime": [frac_to_str(x) for x in self.lambda_prime],
            "lambda_rn": {a: frac_to_str(v) for a, v in self.lambda_rn.items()},
            "s": dict(self.s),
            "heights": dict(self.towers.heights),
            "q_n": self.q_n,
            "Delta_n": frac_to_str(self.Delta_n),
            "Sigma_n": frac_to_str(self.Sigma_n),
            "I_length": frac_to_str(self.I_length),
            "J_length": frac_to_str(self.J_length),
            "gamma_n": frac_to_str(self.gamma_n),
            "partition_ok": self.partition_ok,
            "W": self.W.to_list(),
            "Z": self.Z.to_list(),
            "U": [u.to_list() for u in self.U],
            "X": self.X.to_list(),
        }


def _orbit_slices(
    state_levels: Dict[str, List[Tuple[Fraction, Fraction]]],
    first: str,
    last: str,
    s_1: int,
    Delta: Fraction,
    offset: Fraction,
    width: Fraction,
    count: int,
) -> IntervalUnion:
    """
    ``union_{i < count} T^i [offset, offset + width)`` for a slice of the
    first base; after ``s_1`` steps the slice sits ``Delta`` further right
    in the last base and climbs its tower.
    """
    pieces = []
    for i in range(min(count, s_1)):
        lo = state_levels[first][i][0] + offset
        pieces.append((lo, lo + width))
    for i in range(s_1, count):
        lo = state_levels[last][i - s_1][0] + Delta + offset
        pieces.append((lo, lo + width))
    return IntervalUnion(pieces)


def _check_path(params: ConstructionParams, T: IET, extra: int) -> Tuple[InductionRecord, InductionRecord]:
    N = params.path.steps
    head = rauzy_induct(T, N)
    if head.matrix != params.B or head.end_state.perm != params.pi_hat:
        raise PermutationMismatch(
            f"Induction of T does not follow the positive path after {N} steps",
            details=f"reached {head.end_state.perm}, expected {params.pi_hat}",
        )
    full = rauzy_induct(T, N + extra)
    d = params.d
    a = params.pi_hat.top[0]
    for block in range(1, params.n):
        idx = N + block * (d - 1) - 1
        if full.permutations[idx] != params.pi_hat:
            raise PermutationMismatch(
                f"Permutation does not return to pi_hat after block {block}",
                details=f"got {full.permutations[idx]}",
            )
    for move in full.moves[N:]:
        if move.winner != a:
            raise PermutationMismatch(
                f"Extra induction step cut from {move.winner} instead of {a}"
            )
    return head, full


def build_construction(
    params: ConstructionParams, lambda_prime: Optional[Sequence[Any]] = None
) -> ConstructionState:
    """
    Build the towers and controlled sets at level ``params.n``.

    Args:
        params: construction parameters
        lambda_prime: a point of ``Y_n^K``; defaults to :func:`sample_Yn`

    Returns:
        The immutable construction state

    Raises:
        InvariantViolated: If ``lambda_prime`` is not in ``Y_n^K`` or a derived
            invariant fails
        PermutationMismatch: If the induction leaves the prescribed path
        DegenerateStep: If induction meets two equal last lengths
    """
    params.check()
    if lambda_prime is None:
        lambda_prime = sample_Yn(params)
    lambda_prime = tuple(parse_fraction(x) for x in lambda_prime)
    report = check_Yn(lambda_prime, params)
    if not report.holds:
        raise InvariantViolated(
            f"lambda' is not in Y_n at n={params.n}",
            details=f"margins={ {k: float(v) for k, v in report.margins.items()} }",
        )

    n, K, d = params.n, params.K, params.d
    top_lengths = mat_vec(params.B, lambda_prime)
    T = make_iet(params.pi0, top_lengths, normalize=True)

    extra = (d - 1) * (n - 1)
    head, full = _check_path(params, T, extra)
    towers = tower_decomposition(T, full)

    perm = params.pi_hat
    a, middle, last = _roles(perm)
    s = dict(zip(perm.alphabet, column_sums(params.B)))
    s_1 = s[a]
    for letter in perm.top[1:]:
        if towers.heights[letter] != s[letter] + (n - 1) * s_1:
            raise InvariantViolated(
                f"Tower over {letter} has height {towers.heights[letter]}, "
                f"expected {s[letter] + (n - 1) * s_1}"
            )
    if towers.heights[a] != s_1:
        raise InvariantViolated(f"Tower over {a} has height {towers.heights[a]}, expected {s_1}")

    induced = full.end_state
    lam = {b: induced.length(b) for b in perm.alphabet}
    q_n = s[last] + n * s_1
    Delta = lam[last] - lam[a]
    Sigma = induced.top_start(last)
    I_length = induced.total
    J_length = lam[a] - K * Delta
    if Delta <= 0 or J_length <= 0:
        raise InvariantViolated(f"Need 0 < Delta_n and 0 < |J^n|, got {Delta}, {J_length}")

    levels = towers.levels
    h_last = towers.heights[last]

    W = _orbit_slices(levels, a, last, s_1, Delta, Fraction(0), J_length, q_n)
    Z = IntervalUnion((lo, lo + Delta) for lo, _ in levels[last])

    X1 = towers.level_union(middle)
    slab_start = max(0, (n - 3) * s_1)
    X2 = IntervalUnion(
        (lo + lam[last] - K * Delta, lo + lam[last])
        for lo, _ in levels[last][slab_start:h_last]
    )
    X3 = _middle_preimages(T, towers, middle, K * q_n)
    X = union_all((X1, X2, X3))

    U_count = max(0, (n - 2) * s_1)
    U = tuple(
        _orbit_slices(levels, a, last, s_1, Delta, J_length + (p - 1) * Delta, Delta, U_count).difference(X)
        for p in range(1, K + 1)
    )
    beta_window = _orbit_slices(levels, a, last, s_1, Delta, J_length / 2, J_length / 2, q_n)

    partition_ok = _is_partition([W, Z, *U, X])
    if not partition_ok:
        logger.warning(f"Controlled sets do not partition [0, 1) at n={n}")

    state = ConstructionState(
        params=params,
        T=T,
        record=full,
        towers=towers,
        lambda_rn=lam,
        s=s,
        q_n=q_n,
        Delta_n=Delta,
        Sigma_n=Sigma,
        I_length=I_length,
        J_length=J_length,
        W=W,
        Z=Z,
        U=U,
        X_parts=(X1, X2, X3),
        beta_window=beta_window,
        partition_ok=partition_ok,
        lambda_prime=lambda_prime,
    )
    logger.info(
        f"Construction n={n}: q_n={q_n}, Delta_n={float(Delta):.3e}, "
        f"Leb(X_n)={float(state.X.measure()):.4f}"
    )
    return state


def _middle_preimages(
    T: IET, towers: TowerDecomposition, middle: Sequence[str], count: int
) -> IntervalUnion:
    """``union_{i < count} T^{-i}`` of the middle bases."""
    current = IntervalUnion(towers.bases[b] for b in middle)
    if not current:
        return current
    T_inv = T.inverse()
    parts = [current]
    for _ in range(1, count):
        current = T_inv.image_of_union(current)
        parts.append(current)
    return union_all(parts)


def _is_partition(parts: Sequence[IntervalUnion]) -> bool:
    total = Fraction(0)
    for i, first in enumerate(parts):
        total += first.measure()
        for second in parts[i + 1:]:
            if not first.is_disjoint(second):
                return False
    return total == 1 and union_all(parts) == IntervalUnion.interval(Fraction(0), Fraction(1))


def translation_skew(T: IET) -> AffineSkew:
    """``T`` as a skew product with zero cocycle."""
    zero = Fraction(0)
    pieces = []
    for letter in T.perm.top:
        lo, hi = T.interval(letter)
        pieces.append(SkewPiece(lo, hi, T.shift(letter), zero, zero))
    return AffineSkew(pieces)


@dataclass
class RigidityReport:
    """
    Attributes:
        i: the multiplier of ``q_n``
        max_deviation: ``max |T^{i q_n} x - x - i Delta_n|`` on the controlled set
        verified_measure: measure of the checked set
        pieces: number of continuity pieces checked
        per_set: deviation per controlled set
    """
    i: int
    max_deviation: Fraction
    verified_measure: Fraction
    pieces: int
    per_set: Dict[str, Fraction]

    @property
    def holds(self) -> bool:
        return self.max_deviation == 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "i": self.i,
            "max_deviation": frac_to_str(self.max_deviation),
            "verified_measure": frac_to_str(self.verified_measure),
            "pieces": self.pieces,
            "per_set": {k: frac_to_str(v) for k, v in self.per_set.items()},
            "holds": self.holds,
        }


def verify_rigidity(
    state: ConstructionState, i: int, power: Optional[AffineSkew] = None
) -> RigidityReport:
    """
    Check ``T^{i q_n} x = x + i Delta_n`` on ``W_n``, ``Z_n`` and ``U_n``.

    ``T^{i q_n}`` is a translation on each of its continuity pieces, so the
    check is exact piece by piece.
    """
    if not 1 <= i <= state.params.K:
        raise OutOfRange(f"Rigidity multiplier must lie in [1, {state.params.K}], got {i}")
    if power is None:
        power = translation_skew(state.T).power(i * state.q_n)
    target = i * state.Delta_n
    per_set: Dict[str, Fraction] = {}
    pieces = 0
    measure = Fraction(0)
    named = {"W": state.W, "Z": state.Z, "U": state.U_union}
    for name, union in named.items():
        worst = Fraction(0)
        for piece in power.pieces_over(union):
            worst = max(worst, abs(piece.shift - target))
            pieces += 1
            measure += piece.hi - piece.lo
        per_set[name] = worst
    deviation = max(per_set.values())
    if deviation:
        logger.warning(f"Rigidity fails at n={state.n}, i={i}: deviation {deviation}")
    return RigidityReport(
        i=i, max_deviation=deviation, verified_measure=measure, pieces=pieces, per_set=per_set
    )


def measure_report(state: ConstructionState) -> Dict[str, Any]:
    """Exact measures of the four sets with the identities they satisfy."""
    params = state.params
    leb_W = state.W.measure()
    leb_Z = state.Z.measure()
    leb_U = state.U_union.measure()
    leb_X = state.X.measure()
    total = leb_W + leb_Z + leb_U + leb_X
    return {
        "n": state.n,
        "Leb_W": leb_W,
        "Leb_Z": leb_Z,
        "Leb_U": leb_U,
        "Leb_X": leb_X,
        "total": total,
        "q_n_Delta_n": state.gamma_n,
        "gamma_n": state.gamma_n,
        "sums_to_one": total == 1,
        "Z_identity": leb_Z == (state.q_n - state.s_1) * state.Delta_n,
        "W_identity": leb_W == state.q_n * state.J_length,
        "gamma_bound": state.gamma_n > params.epsilon / (2 * params.rho),
        "W_bound": leb_W > Fraction(3, 10) / params.rho,
    }


def x_part_measures(state: ConstructionState) -> Dict[str, Any]:
    """
    Measures of the three parts of ``X_n`` next to ``2/(n-1)``,
    ``2 (2 + rho) K epsilon / (n-1)`` and ``4K/(n-1)``.
    """
    params = state.params
    n, K = params.n, params.K
    X1, X2, X3 = state.X_parts
    if n < 2:
        bounds = (None, None, None)
    else:
        bounds = (
            Fraction(2, n - 1),
            2 * (2 + params.rho) * K * params.epsilon / (n - 1),
            Fraction(4 * K, n - 1),
        )
    parts = []
    for name, part, bound in zip(("middle_towers", "top_slab", "middle_preimages"), (X1, X2, X3), bounds):
        m = part.measure()
        parts.append({
            "part": name,
            "measure": m,
            "bound": bound,
            "within_bound": bound is not None and m <= bound,
        })
    return {"n": n, "parts": parts, "total": state.X.measure()}


def verify_gluing(state: ConstructionState) -> Dict[str, Any]:
    """
    For ``s_1 <= i < (n - 2) s_1`` the sets ``T^i G``, ``G = [lambda_a, |I^n|)``,
    are intervals and the right end of ``T^i G`` is the left end of
    ``T^{i + s_1} G``.
    """
    s_1 = state.s_1
    n = state.n
    lo_i, hi_i = s_1, (n - 2) * s_1
    current = IntervalUnion.interval(state.lambda_rn[state.first_letter], state.I_length)
    images: List[IntervalUnion] = [current]
    for _ in range(1, hi_i + s_1):
        current = state.T.image_of_union(current)
        images.append(current)

    failures = []
    for i in range(lo_i, hi_i):
        here, ahead = images[i], images[i + s_1]
        if len(here) != 1 or len(ahead) != 1:
            failures.append({"i": i, "reason": "not an interval"})
        elif here.pieces[0][1] != ahead.pieces[0][0]:
            failures.append({"i": i, "reason": "ends do not meet"})
    checked = max(0, hi_i - lo_i)
    if failures:
        logger.warning(f"Gluing fails at {len(failures)} of {checked} levels (n={n})")
    return {"n": n, "checked": checked, "failures": failures, "holds": not failures}


def pick_beta(state: ConstructionState, m: int, offset: Any) -> Fraction:
    """
    The point at relative position ``offset`` inside ``T^m [0, |J^n|)``.

    Offsets in ``[1/2, 1)`` land in ``T^m [|J|/2, |J|)``.

    Raises:
        OutOfRange: If ``m`` is not in ``[0, q_n)`` or ``offset`` not in ``[1/2, 1)``
    """
    offset = parse_fraction(offset)
    if not 0 <= m < state.q_n:
        raise OutOfRange(f"Level m must lie in [0, {state.q_n}), got {m}")
    if not Fraction(1, 2) <= offset < 1:
        raise OutOfRange(f"Offset must lie in [1/2, 1), got {offset}")
    beta = state.W_level_start(m) + offset * state.J_length
    if not state.beta_window.contains(beta):
        raise OutOfRange(f"beta={beta} misses the admissible window")
    return beta
