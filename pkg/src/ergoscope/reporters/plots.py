"""
SVG figures for result bundles.

Figures are rendered with the Agg backend and a fixed SVG hash salt and no
date metadata, so re-plotting a bundle reproduces the files byte for byte.
"""
import math
from pathlib import Path
from typing import Any, Dict, List, Tuple, Union

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from ergoscope.core.exceptions import IoError  # noqa: E402
from ergoscope.core.helpers import jsonable, parse_fraction  # noqa: E402
from ergoscope.core.models import ExperimentKind, ResultBundle  # noqa: E402
from ergoscope.dynamics.measures import measure_from_dict  # noqa: E402
from ergoscope.utils import get_logger  # noqa: E402

logger = get_logger(__name__)

PLOT_DIR = "plots"
FIGSIZE = (6.4, 4.0)

matplotlib.rcParams.update({
    "svg.hashsalt": "ergoscope",
    "svg.fonttype": "none",
    "font.size": 9,
})


def _num(value: Any) -> float:
    return float(parse_fraction(value)) if isinstance(value, str) else float(value)


def _save(fig, path: Path) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(path, format="svg", metadata={"Date": None}, bbox_inches="tight")
    except OSError as e:
        raise IoError(f"Cannot write plot {path}", details=str(e)) from e
    finally:
        plt.close(fig)
    logger.debug(f"Wrote {path}")
    return path


def _group(rows: List[Dict[str, Any]], keys: Tuple[str, ...]) -> Dict[Tuple[int, ...], List[Dict[str, Any]]]:
    groups: Dict[Tuple[int, ...], List[Dict[str, Any]]] = {}
    for row in rows:
        groups.setdefault(tuple(int(row[k]) for k in keys), []).append(row)
    return groups


def plot_density_overlay(
    n: int, i: int, rows: List[Dict[str, Any]], oracle: Any, target: Path
) -> Path:
    """Exact density of the rescaled law against the predicted density."""
    fig, ax = plt.subplots(figsize=FIGSIZE)
    xs = [_num(r["breakpoint"]) / i for r in rows]
    ys = [_num(r["value"]) * i for r in rows]
    ax.step(xs, ys, where="post", color="tab:blue", linewidth=1.2, label="exact (rescaled)")
    if oracle:
        predicted = measure_from_dict(oracle)
        nodes = predicted.node_values()
        ax.plot(
            [float(x) for x, _ in nodes], [float(v) for _, v in nodes],
            color="tab:red", linewidth=1.0, linestyle="--", label="predicted",
        )
    ax.set_xlabel("t")
    ax.set_ylabel("density")
    ax.set_title(f"n={n}, i={i}")
    ax.legend(loc="upper right")
    return _save(fig, target / f"density_n{n}_i{i}.svg")


def plot_atoms(n: int, i: int, rows: List[Dict[str, Any]], target: Path) -> Path:
    """Stem plot of the atoms of the conditional law."""
    fig, ax = plt.subplots(figsize=FIGSIZE)
    locs = [_num(r["location"]) for r in rows]
    masses = [_num(r["mass"]) for r in rows]
    if locs:
        ax.stem(locs, masses, basefmt=" ")
    ax.set_xlabel("location")
    ax.set_ylabel("mass")
    ax.set_ylim(bottom=0)
    ax.set_title(f"atoms, n={n}, i={i}")
    return _save(fig, target / f"atoms_n{n}_i{i}.svg")


def plot_tails(k: int, rows: List[Dict[str, Any]], fits: Dict[str, Any], target: Path) -> Path:
    """``log mass`` against ``b`` per multiplier, with the fitted lines."""
    fig, ax = plt.subplots(figsize=FIGSIZE)
    by_w = _group(rows, ("w",))
    for (w,), w_rows in sorted(by_w.items()):
        points = [(_num(r["b"]), _num(r["mass"])) for r in w_rows if _num(r["mass"]) > 0]
        if not points:
            continue
        bs = [b for b, _ in points]
        logs = [math.log(m) for _, m in points]
        ax.scatter(bs, logs, s=12, label=f"w={w}")
        fit = fits.get(str(w))
        if fit and fit.get("slope") is not None and math.isfinite(fit["slope"]):
            ax.plot(
                [bs[0], bs[-1]],
                [fit["intercept"] + fit["slope"] * bs[0], fit["intercept"] + fit["slope"] * bs[-1]],
                linewidth=0.8,
            )
    ax.set_xlabel("b")
    ax.set_ylabel("log mass")
    ax.set_title(f"tails, k={k}")
    ax.legend(loc="upper right")
    return _save(fig, target / f"tails_k{k}.svg")


def emit_plot(bundle: ResultBundle, target: Union[str, Path]) -> List[Path]:
    """
    Write the figures of a bundle into ``target``.

    Args:
        bundle: Result bundle (in memory or loaded from ``bundle.json``)
        target: Output directory

    Returns:
        Written SVG paths in a fixed order

    Raises:
        IoError: If a figure cannot be written
    """
    target = Path(target)
    written: List[Path] = []

    for task in bundle.tasks:
        records = jsonable(task.records)
        rows = jsonable(task.rows)

        if bundle.kind is ExperimentKind.IET_PL:
            for (n, i), group in sorted(_group(rows.get("density", []), ("n", "i")).items()):
                oracle = records.get("pushforwards", {}).get(str(i), {}).get("oracle")
                written.append(plot_density_overlay(n, i, group, oracle, target))
        elif bundle.kind is ExperimentKind.IET_PC:
            for (n, i), group in sorted(_group(rows.get("atoms", []), ("n", "i")).items()):
                written.append(plot_atoms(n, i, group, target))
        else:
            tails = rows.get("tails", [])
            if tails:
                written.append(plot_tails(int(records["k"]), tails, records.get("fits", {}), target))

    logger.info(f"Wrote {len(written)} plots to {target}")
    return written
