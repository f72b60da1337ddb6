"""
Tail behaviour of Birkhoff sums over a planted rotation.

For every witness index ``n_k`` (restricted to ``q_{n_k} <= max_q``) the task
estimates the tails of ``S_{w q}(f) - w c_k`` for ``w`` in ``{1, K, L}``,
fits their exponential decay, scans the separation property and checks the
Denjoy-Koksma bound for the smooth part. The run summary compares the
rescaled tails of the two multipliers at the largest witness.
"""
from typing import Any, Dict, List, Tuple

from ergoscope.config.experiment import ExperimentConfig, RotationLogParams
from ergoscope.core.exceptions import InvalidParams
from ergoscope.core.models import (
    CheckResult,
    CheckStatus,
    ExperimentKind,
    ExperimentTask,
    TaskResult,
)
from ergoscope.dynamics.birkhoff_log import (
    LogRoof,
    center_stats,
    denjoy_koksma_check,
    fit_dk_constant,
    fit_separation_threshold,
    fit_tail,
    rescaled_tail_comparison,
    separation_scan,
    tail_tables,
)
from ergoscope.dynamics.cf_rotation import (
    ContinuedFraction,
    DiophantineWitness,
    find_diophantine_indices,
    make_ckl,
)
from ergoscope.experiments.base import BaseExperiment
from ergoscope.utils import get_logger, log_function_call

logger = get_logger(__name__)

SLOPE_WINDOW = (-1.3, -0.7)


def build_rotation(params: RotationLogParams) -> Tuple[ContinuedFraction, DiophantineWitness]:
    """
    The planted rotation number and its witnesses with ``q_{n_k} <= max_q``.

    Raises:
        InvalidParams: If no witness is small enough
    """
    cf = make_ckl(params.K, params.L, params.spike_count, c=params.c, filler_bound=params.filler_bound)
    found = find_diophantine_indices(cf, params.K, params.L, params.c)
    indices = tuple(n for n in found.indices if cf.q(n) <= params.max_q)
    if not indices:
        raise InvalidParams(
            f"No witness index with q <= {params.max_q}",
            details=f"witnesses {list(found.indices)}",
        )
    logger.info(f"Rotation witnesses (q <= {params.max_q}): {list(indices)}")
    return cf, DiophantineWitness(indices=indices, c=params.c, K=params.K, L=params.L)


def build_roof(params: RotationLogParams) -> LogRoof:
    return LogRoof(
        C_f=params.C_f,
        a0=params.a0,
        cos_coeffs=tuple(params.cos_coeffs),
        sin_coeffs=tuple(params.sin_coeffs),
    )


class RotationLogExperiment(BaseExperiment):
    """Kind ``rotation-log``."""

    kinds = (ExperimentKind.ROTATION_LOG,)

    @log_function_call
    def plan(self, config: ExperimentConfig) -> List[ExperimentTask]:
        params = config.params
        cf, witness = build_rotation(params)
        roof = build_roof(params)
        count = len(witness.indices)
        inner_threads = config.threads if count == 1 else 1
        return [
            ExperimentTask(
                index=k,
                label=f"k={k}",
                params={
                    "k": k,
                    "n_k": witness.indices[k],
                    "cf": cf,
                    "witness": witness,
                    "roof": roof,
                    "inner_threads": inner_threads,
                },
            )
            for k in range(count)
        ]

    def run_task(self, config: ExperimentConfig, task: ExperimentTask) -> TaskResult:
        params: RotationLogParams = config.params
        k = task.params["k"]
        cf: ContinuedFraction = task.params["cf"]
        witness: DiophantineWitness = task.params["witness"]
        roof: LogRoof = task.params["roof"]
        threads = task.params["inner_threads"]
        n_k = witness.indices[k]
        K, L = params.K, params.L

        center = center_stats(roof, cf, witness, k, params.guard)
        ws = sorted({1, K, L})
        tables = tail_tables(
            roof, cf, witness, k, ws, params.b_grid, params.grid_size, params.guard, threads
        )
        fits = {w: fit_tail(table) for w, table in tables.items()}

        span = max(K, L)
        separation = separation_scan(
            roof, cf, witness, k, params.separation_b, span, params.grid_size,
            b0=params.b0, guard=params.guard, threads=threads,
        )
        b0 = params.b0 if params.b0 is not None else fit_separation_threshold(separation)

        dk = denjoy_koksma_check(roof, cf, n_k, params.dk_grid_size, params.guard, threads)
        comparison = rescaled_tail_comparison(tables[K], tables[L])

        result = TaskResult(
            index=task.index,
            label=task.label,
            records={
                "k": k,
                "n_k": n_k,
                "q": center.q,
                "center": center.to_dict(),
                "tails": {w: t.to_dict() for w, t in tables.items()},
                "fits": {w: f.to_dict() for w, f in fits.items()},
                "separation": [r.to_dict() for r in separation],
                "b0": b0,
                "denjoy_koksma": dk,
                "comparison": comparison,
            },
        )
        for table in tables.values():
            result.add_rows("tails", table.rows())

        slope = fits[1].slope
        lo, hi = SLOPE_WINDOW
        result.checks.append(CheckResult.from_bool(
            f"tail_slope[k={k}]",
            lo <= slope <= hi,
            f"w=1 slope {slope:.3f} (window [{lo}, {hi}])",
            slope=slope, D=fits[1].D,
        ))
        relevant = [r for r in separation if b0 is not None and r.b >= b0]
        violations = sum(r.violations for r in relevant)
        result.checks.append(CheckResult.from_bool(
            f"separation[k={k}]",
            b0 is not None and violations == 0,
            f"{violations} violations at b >= {b0}" if b0 is not None else "violations at every tested b",
            b0=b0, violations=violations,
        ))
        result.checks.append(CheckResult.from_bool(
            f"denjoy_koksma[k={k}]",
            dk["holds"],
            f"max deviation {dk['max_deviation']:.3e} vs Var(g) bound {dk['variation_bound']:.3e}",
            **dk,
        ))
        logger.info(f"Rotation task k={k} done: slope {slope:.3f}, b0 {b0}")
        return result

    def summarize(
        self, config: ExperimentConfig, results: List[TaskResult]
    ) -> Tuple[Dict[str, Any], List[CheckResult]]:
        params: RotationLogParams = config.params
        cf, witness = build_rotation(params)
        roof = build_roof(params)

        largest = results[-1].records
        comparison = largest["comparison"]
        last_n = cf.largest_index_below(params.max_q)
        dk_ns = [n for n in range(max(1, last_n - 3), last_n + 1)]
        dk_constant = fit_dk_constant(roof, cf, dk_ns, params.dk_grid_size, params.guard)

        sections = {
            "alpha": cf.to_dict(),
            "witness": witness.to_dict(),
            "roof": roof.to_dict(),
            "slopes": {r.records["k"]: r.records["fits"][1]["slope"] for r in results},
            "comparison": comparison,
            "dk_constant": dk_constant,
        }

        checks = []
        if comparison["signature"]:
            checks.append(CheckResult(
                name="rescaled_tail_signature",
                status=CheckStatus.PASS,
                summary=f"mass_K/mass_L leaves [1/2, 2] at the largest witness (k={largest['k']})",
                details={"max_noise": comparison["max_noise"]},
            ))
        else:
            checks.append(CheckResult(
                name="rescaled_tail_signature",
                status=CheckStatus.REPORT,
                summary=(
                    "no ratio outside [1/2, 2]; grid noise bound "
                    f"{comparison['max_noise']}"
                ),
                details={"max_noise": comparison["max_noise"]},
            ))
        checks.append(CheckResult(
            name="dk_constant_stability",
            status=CheckStatus.REPORT,
            summary=f"C' spread {dk_constant['spread']:.3f} over n in {dk_ns}",
            details=dk_constant,
        ))
        return sections, checks
