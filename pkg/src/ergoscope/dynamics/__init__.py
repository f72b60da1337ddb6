"""Numerical core: rotations, interval exchanges, towers, cocycles and measures."""

from .intervals import IntervalUnion, union_all
from .cf_rotation import (
    ContinuedFraction,
    DiophantineWitness,
    OrbitMinima,
    cf_expand,
    convergents,
    find_diophantine_indices,
    make_ckl,
    orbit_min_distance,
    ostrowski_decompose,
)
from .birkhoff_log import (
    LogRoof,
    TailTable,
    birkhoff_sum,
    center_stats,
    separation_check,
    tail_mass,
)
from .iet_core import (
    IET,
    InductionRecord,
    Permutation,
    PositivePath,
    find_positive_path,
    make_iet,
    rauzy_induct,
    rauzy_step,
    tower_decomposition,
)
from .cocycle import AffineSkew, SkewPiece
from .tower_construction import (
    ConstructionParams,
    ConstructionState,
    build_construction,
    default_params,
    measure_report,
    sample_Yn,
    verify_rigidity,
)
from .special_flow import (
    RoofPC,
    RoofPL,
    cocycle_sum,
    predicted_atomic,
    predicted_density,
    pushforward_exact,
)
from .measures import (
    AtomicMeasure,
    EmpiricalMeasure,
    PiecewiseConstantDensity,
    PiecewiseLinearDensity,
    ProbMeasure,
    atom_spectrum,
    cdf,
    exp_decay_check,
    ks_distance,
    rescale,
)

__all__ = [
    "IntervalUnion",
    "union_all",
    "ContinuedFraction",
    "DiophantineWitness",
    "OrbitMinima",
    "cf_expand",
    "convergents",
    "find_diophantine_indices",
    "make_ckl",
    "orbit_min_distance",
    "ostrowski_decompose",
    "LogRoof",
    "TailTable",
    "birkhoff_sum",
    "center_stats",
    "separation_check",
    "tail_mass",
    "IET",
    "InductionRecord",
    "Permutation",
    "PositivePath",
    "find_positive_path",
    "make_iet",
    "rauzy_induct",
    "rauzy_step",
    "tower_decomposition",
    "AffineSkew",
    "SkewPiece",
    "ConstructionParams",
    "ConstructionState",
    "build_construction",
    "default_params",
    "measure_report",
    "sample_Yn",
    "verify_rigidity",
    "RoofPC",
    "RoofPL",
    "cocycle_sum",
    "predicted_atomic",
    "predicted_density",
    "pushforward_exact",
    "AtomicMeasure",
    "EmpiricalMeasure",
    "PiecewiseConstantDensity",
    "PiecewiseLinearDensity",
    "ProbMeasure",
    "atom_spectrum",
    "cdf",
    "exp_decay_check",
    "ks_distance",
    "rescale",
]
