"""
Acceptance suite behind ``ergoscope verify``.

Ten numbered criteria, property based where the underlying statements are
asymptotic. Criteria 5 to 9 drive the registered experiments through the
engine; the others exercise the dynamics modules directly. ``quick`` keeps
every check and shrinks instance counts, grids and the construction range.
"""
import time
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ergoscope.config import get_settings
from ergoscope.config.experiment import experiment_from_dict
from ergoscope.core.engine import ExperimentEngine
from ergoscope.core.exceptions import DegenerateStep, ErgoscopeError, ExperimentError
from ergoscope.core.models import CheckResult, CheckStatus, ResultBundle
from ergoscope.dynamics.cf_rotation import (
    convergent_bounds,
    partition_lengths,
    random_quotients,
    rational_quotients,
)
from ergoscope.dynamics.iet_core import (
    IET,
    Permutation,
    check_matrix_identity,
    first_return_time,
    random_lengths,
    rauzy_induct,
    rauzy_step,
    tower_decomposition,
)
from ergoscope.dynamics.intervals import IntervalUnion
from ergoscope.dynamics.measures import (
    AtomicMeasure,
    PiecewiseConstantDensity,
    ks_distance,
    rescale,
)
from ergoscope.dynamics.special_flow import count_level_maxima, predicted_density
from ergoscope.experiments.iet_flow import IetFlowExperiment
from ergoscope.experiments.rotation_log import RotationLogExperiment
from ergoscope.utils import get_logger, log_function_call

logger = get_logger(__name__)

INTERIOR_TOLERANCE = Fraction(1, 5)
KS_TOLERANCE = Fraction(2, 25)
TREND_START = 6


@dataclass(frozen=True)
class SuiteSizes:
    """Instance counts and grids for one suite run."""
    cf_sequences: int = 200
    cf_depth: int = 40
    partition_max_q: int = 10 ** 4
    rationals: int = 100
    rational_max_q: int = 10 ** 4
    iets: int = 50
    iet_steps: int = 30
    max_height: int = 10 ** 4
    n_max: int = 10
    measure_cases: int = 1000
    rotation_grid: int = 100_000
    dk_grid: int = 20_000

    @classmethod
    def quick(cls) -> "SuiteSizes":
        return cls(
            cf_sequences=20,
            partition_max_q=10 ** 3,
            rationals=20,
            iets=10,
            iet_steps=20,
            max_height=2000,
            n_max=8,
            measure_cases=100,
            rotation_grid=20_000,
            dk_grid=5_000,
        )

    @classmethod
    def for_run(cls, quick: bool = False) -> "SuiteSizes":
        """Full or quick sizes; the tower height cap comes from ``runtime.max_height``."""
        cap = get_settings().runtime.max_height
        if quick:
            sizes = cls.quick()
            return replace(sizes, max_height=min(sizes.max_height, cap))
        return cls(max_height=cap)


def _non_increasing(values: Sequence[Any]) -> bool:
    return all(a >= b for a, b in zip(values, values[1:]))


def _levels(bundle: ResultBundle) -> Tuple[int, int]:
    """``(L, K)`` from the configuration echo of an IET bundle."""
    block = bundle.config[bundle.kind.block]
    return block["L"], block["K"]


def euclid_run_lengths(value: Fraction) -> List[int]:
    """
    Run lengths of equal step types of the two-interval induction on
    ``(numerator, denominator)``; the final equal-lengths step closes the
    last run.
    """
    value = Fraction(value)
    T = IET(Permutation.symmetric(2), (value.numerator, value.denominator))
    runs: List[int] = []
    last_type = None
    for _ in range(value.denominator + 1):
        try:
            T, _, step_type = rauzy_step(T)
        except DegenerateStep:
            runs[-1] += 1
            return runs
        if step_type == last_type:
            runs[-1] += 1
        else:
            runs.append(1)
            last_type = step_type
    return runs


def random_iets(count: int, steps: int, seed: int) -> List[Tuple[IET, Any]]:
    """Seeded rational exchanges on the reversal of four letters, with their records."""
    rng = np.random.default_rng(seed)
    perm = Permutation.symmetric(4)
    instances = []
    for _ in range(count):
        T = IET(perm, random_lengths(4, rng))
        n = int(rng.integers(1, steps + 1))
        try:
            record = rauzy_induct(T, n)
        except DegenerateStep as e:
            record = rauzy_induct(T, e.step)
        instances.append((T, record))
    return instances


def _random_atomic(rng: np.random.Generator) -> AtomicMeasure:
    size = int(rng.integers(1, 7))
    locs = [Fraction(int(rng.integers(-50, 51)), int(rng.integers(1, 11))) for _ in range(size)]
    weights = [int(rng.integers(1, 20)) for _ in range(size)]
    total = sum(weights)
    return AtomicMeasure((loc, Fraction(w, total)) for loc, w in zip(locs, weights))


def _random_density(rng: np.random.Generator) -> PiecewiseConstantDensity:
    segments = []
    for _ in range(int(rng.integers(1, 4))):
        lo = Fraction(int(rng.integers(-20, 20)), int(rng.integers(1, 5)))
        width = Fraction(int(rng.integers(1, 10)), int(rng.integers(1, 5)))
        segments.append((lo, lo + width, Fraction(int(rng.integers(1, 5)))))
    density = PiecewiseConstantDensity.from_segments(segments)
    return density.scaled_mass(1 / density.total_mass)


def _random_scale(rng: np.random.Generator, positive: bool = False) -> Fraction:
    w = Fraction(int(rng.integers(1, 13)), int(rng.integers(1, 13)))
    if not positive and rng.integers(0, 2):
        w = -w
    return w


def _same(P, Q) -> bool:
    if isinstance(P, AtomicMeasure):
        return P.atoms() == Q.atoms()
    return P.breakpoints() == Q.breakpoints() and P.values == Q.values


class AcceptanceSuite:
    """
    Runs the numbered acceptance criteria.

    Each criterion yields one :class:`CheckResult` named ``criterion_<k>``;
    its details hold the measured values behind the verdict.
    """

    def __init__(self, seed: int = 0, threads: int = 1, quick: bool = False):
        """
        Args:
            seed: Seed for every random instance and the induction path
            threads: Worker count for the engine-driven criteria
            quick: Use the quick sizes of :meth:`SuiteSizes.for_run`
        """
        self.seed = seed
        self.threads = threads
        self.quick = quick
        self.sizes = SuiteSizes.for_run(quick)
        self._bundles: Dict[str, ResultBundle] = {}

        self.criteria: Dict[int, Tuple[str, Callable[[], CheckResult]]] = {
            1: ("continued-fraction exactness", self.check_cf_exactness),
            2: ("Euclid equivalence", self.check_euclid_equivalence),
            3: ("matrix identity", self.check_matrix_identity),
            4: ("tower oracle", self.check_tower_oracle),
            5: ("construction invariants", self.check_construction),
            6: ("exact rigidity", self.check_rigidity),
            7: ("piecewise constant limit structure", self.check_pc_limit),
            8: ("piecewise linear limit structure", self.check_pl_limit),
            9: ("rotation-log tails", self.check_rotation_tails),
            10: ("measure algebra", self.check_measure_algebra),
        }

    @log_function_call
    def run(self, only: Optional[Sequence[int]] = None) -> List[CheckResult]:
        """
        Run the selected criteria in order.

        Args:
            only: Criterion numbers; all when None

        Returns:
            One CheckResult per criterion

        Raises:
            ExperimentError: If a criterion number is unknown or a criterion
                cannot be evaluated
        """
        selected = sorted(set(only)) if only else sorted(self.criteria)
        unknown = [k for k in selected if k not in self.criteria]
        if unknown:
            raise ExperimentError(
                f"Unknown acceptance criteria: {unknown}",
                context={"available": sorted(self.criteria)},
            )

        results = []
        for number in selected:
            title, method = self.criteria[number]
            logger.info(f"Criterion {number}: {title}")
            start = time.time()
            try:
                result = method()
            except ExperimentError:
                raise
            except ErgoscopeError as e:
                raise ExperimentError(
                    f"Criterion {number} ({title}) could not be evaluated: {e.message}",
                    context={"criterion": number},
                    details=e.details,
                ) from e
            result.execution_time = time.time() - start
            logger.info(f"Criterion {number}: {result.status.value} ({result.execution_time:.1f}s)")
            results.append(result)
        return results

    def _result(self, number: int, ok: bool, summary: str, **details: Any) -> CheckResult:
        return CheckResult.from_bool(f"criterion_{number}", ok, summary, **details)

    # criteria 1-4 and 10: direct checks

    def check_cf_exactness(self) -> CheckResult:
        sizes = self.sizes
        bound_failures, partition_failures, partitions = [], [], 0
        for s in range(sizes.cf_sequences):
            cf = random_quotients(sizes.cf_depth, self.seed + s)
            for n in range(sizes.cf_depth - 1):
                if not convergent_bounds(cf, n)["holds"]:
                    bound_failures.append((s, n))
                if cf.q(n) <= sizes.partition_max_q:
                    partitions += 1
                    if not partition_lengths(cf, n)["holds"]:
                        partition_failures.append((s, n))
        ok = not bound_failures and not partition_failures
        return self._result(
            1, ok,
            f"{sizes.cf_sequences} sequences: {len(bound_failures)} convergent-bound and "
            f"{len(partition_failures)} partition failures ({partitions} partitions checked)",
            bound_failures=bound_failures[:10],
            partition_failures=partition_failures[:10],
        )

    def check_euclid_equivalence(self) -> CheckResult:
        rng = np.random.default_rng(self.seed)
        mismatches = []
        for _ in range(self.sizes.rationals):
            q = int(rng.integers(2, self.sizes.rational_max_q + 1))
            value = Fraction(int(rng.integers(1, q)), q)
            runs = euclid_run_lengths(value)
            quotients = rational_quotients(value)
            if runs != quotients:
                mismatches.append({"value": value, "runs": runs, "quotients": quotients})
        return self._result(
            2, not mismatches,
            f"{self.sizes.rationals} rationals, {len(mismatches)} mismatches",
            mismatches=mismatches[:5],
        )

    def check_matrix_identity(self) -> CheckResult:
        instances = random_iets(self.sizes.iets, self.sizes.iet_steps, self.seed)
        failures = [k for k, (T, record) in enumerate(instances) if not check_matrix_identity(T, record)]
        return self._result(
            3, not failures,
            f"A^(n) lambda^n = lambda for {len(instances) - len(failures)} of {len(instances)} exchanges",
            failures=failures,
            steps=[record.steps for _, record in instances],
        )

    def check_tower_oracle(self) -> CheckResult:
        instances = random_iets(self.sizes.iets, self.sizes.iet_steps, self.seed)
        checked, failures = 0, []
        for k, (T, record) in enumerate(instances):
            if max(record.heights) > self.sizes.max_height:
                continue
            towers = tower_decomposition(T, record)
            base = IntervalUnion.interval(0, record.end_state.total * record.scale)
            for letter, (lo, hi) in towers.bases.items():
                for x in (lo, (lo + hi) / 2):
                    checked += 1
                    if first_return_time(T, x, base) != towers.heights[letter]:
                        failures.append({"instance": k, "letter": letter, "x": x})
            if not towers.is_partition_of(0, T.total):
                failures.append({"instance": k, "reason": "levels do not partition the domain"})
        return self._result(
            4, not failures,
            f"{checked} return times against tower heights, {len(failures)} failures",
            failures=failures[:10],
        )

    def check_measure_algebra(self) -> CheckResult:
        rng = np.random.default_rng(self.seed)
        counts = {"group_action": 0, "identity": 0, "atom_count": 0, "metric": 0, "invariance": 0}
        for case in range(self.sizes.measure_cases):
            makers = (_random_atomic, _random_density)
            P = makers[case % 2](rng)
            Q = _random_atomic(rng) if case % 3 else _random_density(rng)
            R = _random_atomic(rng)
            a, b = _random_scale(rng), _random_scale(rng)

            if not _same(rescale(rescale(P, a), b), rescale(P, a * b)):
                counts["group_action"] += 1
            if not _same(rescale(P, 1), P):
                counts["identity"] += 1
            if isinstance(P, AtomicMeasure) and len(rescale(P, a).atoms()) != len(P.atoms()):
                counts["atom_count"] += 1

            d_pq, d_qp = ks_distance(P, Q), ks_distance(Q, P)
            d_pr, d_qr = ks_distance(P, R), ks_distance(Q, R)
            if not (ks_distance(P, P) == 0 and d_pq == d_qp and 0 <= d_pq <= 1 and d_pr <= d_pq + d_qr):
                counts["metric"] += 1

            w = _random_scale(rng, positive=True)
            if ks_distance(rescale(P, w), rescale(Q, w)) != d_pq:
                counts["invariance"] += 1
        failed = sum(counts.values())
        return self._result(
            10, failed == 0,
            f"{self.sizes.measure_cases} randomized cases, {failed} violations",
            violations=counts,
        )

    # criteria 5-9: engine-driven

    def _bundle(self, kind: str) -> ResultBundle:
        if kind not in self._bundles:
            block = kind.replace("-", "_")
            if kind == "rotation-log":
                params = {"grid_size": self.sizes.rotation_grid, "dk_grid_size": self.sizes.dk_grid}
                experiment = RotationLogExperiment()
            else:
                params = {"d": 4, "K": 3, "L": 2, "n_min": 3, "n_max": self.sizes.n_max}
                experiment = IetFlowExperiment()
            config = experiment_from_dict({
                "kind": kind,
                "seed": self.seed,
                "threads": self.threads,
                block: params,
            })
            engine = ExperimentEngine()
            engine.register_experiment(experiment)
            self._bundles[kind] = engine.run(config)
        return self._bundles[kind]

    def _trend_values(self, records: List[Dict[str, Any]], value: Callable[[Dict[str, Any]], Any]) -> List[Any]:
        return [value(rec) for rec in records if rec["n"] >= TREND_START]

    def check_construction(self) -> CheckResult:
        bundle = self._bundle("iet-pc")
        records = [t.records for t in bundle.tasks]
        failed = [
            c.name for c in bundle.all_checks
            if c.status == CheckStatus.FAIL
            and c.name.split("[")[0] in ("Yn_margins", "measures", "x_measure", "x_measure_decreasing")
        ]
        x_measures = {rec["n"]: rec["measures"]["Leb_X"] for rec in records}
        margins = {
            rec["n"]: min(rec["Yn"].margins.values()) for rec in records
        }
        return self._result(
            5, not failed,
            f"n in {min(x_measures)}..{max(x_measures)}: "
            + ("all invariants hold" if not failed else f"failed: {', '.join(failed)}"),
            Leb_X=x_measures,
            smallest_margin=margins,
            q_n={rec["n"]: rec["q_n"] for rec in records},
        )

    def check_rigidity(self) -> CheckResult:
        bundle = self._bundle("iet-pc")
        deviations = {
            t.records["n"]: {i: r.max_deviation for i, r in t.records["rigidity"].items()}
            for t in bundle.tasks
        }
        worst = max(v for per_n in deviations.values() for v in per_n.values())
        return self._result(
            6, worst == 0,
            f"largest deviation {worst} over i=1..3 and {len(deviations)} levels",
            deviations=deviations,
        )

    def check_pc_limit(self) -> CheckResult:
        bundle = self._bundle("iet-pc")
        records = [t.records for t in bundle.tasks]
        _, K = _levels(bundle)
        problems = []
        for rec in records:
            n = rec["n"]
            if not rec["pushforwards"][K]["structure"]["support_on_lattice"]:
                problems.append(f"support off lattice at n={n}")
            if n >= 4 and not rec["disjointness"]["differ"]:
                problems.append(f"equal atom counts at n={n}")

        last = records[-1]
        final_error = last["pushforwards"][K]["interior_error"]
        if final_error is None or final_error > INTERIOR_TOLERANCE:
            problems.append(f"interior error {final_error} at n={last['n']} exceeds {INTERIOR_TOLERANCE}")
        trend = self._trend_values(records, lambda rec: rec["pushforwards"][K]["interior_error"])
        if not _non_increasing(trend):
            problems.append("interior error increases")
        return self._result(
            7, not problems,
            "atoms on the lattice, interior masses near 2 gamma_n" if not problems else "; ".join(problems),
            interior_error={rec["n"]: rec["pushforwards"][K]["interior_error"] for rec in records},
            atom_counts={rec["n"]: rec["disjointness"] for rec in records},
        )

    def check_pl_limit(self) -> CheckResult:
        bundle = self._bundle("iet-pl")
        records = [t.records for t in bundle.tasks]
        ks_values: Dict[int, Dict[int, Any]] = {}
        problems = []
        for i in _levels(bundle):
            for rec in records:
                n, pushforward = rec["n"], rec["pushforwards"][i]
                if pushforward["conditional_mass"] != 1:
                    problems.append(f"conditional mass {pushforward['conditional_mass']} at n={n}, i={i}")
                if rec["gamma_n"] < Fraction(1, i + 1):
                    oracle = predicted_density(i, 1, rec["gamma_n"])
                    if oracle.total_mass != 1:
                        problems.append(f"oracle mass {oracle.total_mass} at n={n}, i={i}")
            ks_values[i] = {rec["n"]: rec["pushforwards"][i]["ks"] for rec in records}
            final = records[-1]["pushforwards"][i]["ks"]
            if final is None or final > KS_TOLERANCE:
                problems.append(f"KS {final} at n={records[-1]['n']}, i={i} exceeds {KS_TOLERANCE}")
            trend = self._trend_values(records, lambda rec: rec["pushforwards"][i]["ks"])
            if None in trend or not _non_increasing(trend):
                problems.append(f"KS not non-increasing for i={i}")

        maxima = {}
        for i in range(2, 6):
            density = predicted_density(i, 1, Fraction(1, 4 * i), rescaled=True)
            maxima[i] = count_level_maxima(density, 2)
            if maxima[i] != i - 1:
                problems.append(f"{maxima[i]} level-2 maxima for i={i}")
        return self._result(
            8, not problems,
            "exact laws approach the predicted densities" if not problems else "; ".join(problems),
            ks=ks_values,
            level_maxima=maxima,
        )

    def check_rotation_tails(self) -> CheckResult:
        bundle = self._bundle("rotation-log")
        by_kind: Dict[str, List[CheckResult]] = {}
        for check in bundle.all_checks:
            by_kind.setdefault(check.name.split("[")[0], []).append(check)
        failed = [c.name for c in bundle.all_checks if c.status == CheckStatus.FAIL]
        signature = by_kind.get("rescaled_tail_signature", [])
        noise = signature[0].summary if signature and signature[0].status == CheckStatus.REPORT else None
        summary = "tails, separation and Denjoy-Koksma bound hold" if not failed else f"failed: {', '.join(failed)}"
        if noise:
            summary += f"; signature report-only ({noise})"
        return self._result(
            9, not failed, summary,
            slopes=bundle.sections.get("slopes"),
            checks={c.name: c.status.value for c in bundle.all_checks},
        )
