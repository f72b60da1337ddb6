"""
Experiment configuration files.

An experiment file is YAML with top-level keys ``kind``, ``seed``, ``threads``,
``output_dir`` and one parameter block named after the kind (``rotation_log``,
``iet_pc`` or ``iet_pl``). Rational parameters accept ``"num/den"`` strings,
integers or decimals.
"""
import math
from fractions import Fraction
from pathlib import Path
from typing import Annotated, Any, Dict, List, Optional, Union

import yaml
from pydantic import (
    BaseModel,
    BeforeValidator,
    ConfigDict,
    Field,
    PlainSerializer,
    ValidationError,
    field_validator,
    model_validator,
)

from ergoscope.config.settings import get_settings
from ergoscope.core.exceptions import ConfigurationError
from ergoscope.core.helpers import frac_to_str, parse_fraction
from ergoscope.core.models import ExperimentKind
from ergoscope.utils import get_logger

logger = get_logger(__name__)

Rational = Annotated[
    Fraction,
    BeforeValidator(parse_fraction),
    PlainSerializer(frac_to_str, return_type=str),
]


class _Block(BaseModel):
    model_config = ConfigDict(extra="forbid", arbitrary_types_allowed=True)


class RotationLogParams(_Block):
    """Rotation by a planted ``C_{K,L}`` number under a log-singular roof."""

    K: int = Field(2, ge=1)
    L: int = Field(3, ge=1)
    C_f: float = Field(1.0, ge=0)
    a0: float = 2.0
    cos_coeffs: List[float] = Field(default_factory=list)
    sin_coeffs: List[float] = Field(default_factory=list)
    c: float = Field(1.0, gt=0)
    spike_count: int = Field(3, ge=1)
    filler_bound: int = Field(2, ge=1)
    max_q: int = Field(10_000, ge=2)
    grid_size: int = Field(100_000, ge=10)
    b_grid: List[float] = Field(default_factory=lambda: [2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0])
    separation_b: List[float] = Field(default_factory=lambda: [4.0, 6.0, 8.0, 10.0])
    b0: Optional[float] = Field(None, gt=0)
    dk_grid_size: int = Field(20_000, ge=10)
    guard: Optional[float] = Field(None, gt=0, lt=1e-3)

    @field_validator("b_grid", "separation_b")
    @classmethod
    def _positive_grid(cls, value: List[float]) -> List[float]:
        if not value:
            raise ValueError("grid of b values must not be empty")
        if any(b <= 0 for b in value):
            raise ValueError("b values must be positive")
        return sorted(value)

    @model_validator(mode="after")
    def _check(self) -> "RotationLogParams":
        if self.K == self.L:
            raise ValueError(f"K and L must differ, got K=L={self.K}")
        s = self.K ** 2 + self.L ** 2
        if not 100 * s + 1 < 200 * s:
            raise ValueError(f"spike window (100(K^2+L^2), 200(K^2+L^2)) is empty for K={self.K}, L={self.L}")
        if math.log(self.filler_bound) > self.c:
            raise ValueError(f"filler_bound={self.filler_bound} exceeds e^c with c={self.c}")
        amplitude = sum(abs(a) for a in self.cos_coeffs) + sum(abs(b) for b in self.sin_coeffs)
        if not self.a0 > amplitude:
            raise ValueError(f"a0={self.a0} must exceed the coefficient amplitude {amplitude}")
        if self.guard is None:
            self.guard = get_settings().runtime.singularity_guard
        return self


class IetParams(_Block):
    """Shared parameters of the interval exchange experiments."""

    d: int = 4
    K: int = Field(3, ge=2)
    L: int = Field(2, ge=1)
    n_min: int = 3
    n_max: int = 8
    max_path_steps: int = Field(200, ge=1)
    epsilon: Optional[Rational] = None
    delta: Optional[Rational] = None
    delta_prime: Optional[Rational] = None
    additivity_check: bool = False

    @field_validator("d")
    @classmethod
    def _supported_d(cls, value: int) -> int:
        if value not in (2, 4):
            raise ValueError(f"d must be 2 or 4, got {value}")
        return value

    @model_validator(mode="after")
    def _check(self) -> "IetParams":
        if not self.K > self.L >= 1:
            raise ValueError(f"need K > L >= 1, got K={self.K}, L={self.L}")
        if self.n_min < 3:
            raise ValueError(f"n_min must be at least 3, got {self.n_min}")
        if self.n_max < self.n_min:
            raise ValueError(f"n_max={self.n_max} is below n_min={self.n_min}")
        given = [x is not None for x in (self.epsilon, self.delta, self.delta_prime)]
        if any(given) and not all(given):
            raise ValueError("give all of epsilon, delta, delta_prime or none of them")
        if all(given):
            eps = self.epsilon
            if not (0 < eps and eps / 3 < self.delta_prime < self.delta < eps / 2):
                raise ValueError(
                    "need epsilon/3 < delta_prime < delta < epsilon/2, got "
                    f"epsilon={eps}, delta={self.delta}, delta_prime={self.delta_prime}"
                )
        return self

    @property
    def n_values(self) -> List[int]:
        return list(range(self.n_min, self.n_max + 1))


class IetPcParams(IetParams):
    """Piecewise constant roof with one extra jump ``D_beta`` at ``beta``."""

    beta_level: int = Field(0, ge=0)
    beta_offset: Rational = Fraction(3, 4)
    D_beta: Rational = Fraction(1)

    @field_validator("beta_offset")
    @classmethod
    def _offset_window(cls, value: Fraction) -> Fraction:
        if not Fraction(1, 2) <= value < 1:
            raise ValueError(f"beta_offset must lie in [1/2, 1), got {value}")
        return value

    @field_validator("D_beta")
    @classmethod
    def _nonzero_jump(cls, value: Fraction) -> Fraction:
        if value == 0:
            raise ValueError("D_beta must be non-zero")
        return value


class IetPlParams(IetParams):
    """Piecewise linear roof with slope ``kappa``."""

    kappa: Rational = Fraction(1)

    @field_validator("kappa")
    @classmethod
    def _nonzero_slope(cls, value: Fraction) -> Fraction:
        if value == 0:
            raise ValueError("kappa must be non-zero")
        return value


Block = Union[RotationLogParams, IetPcParams, IetPlParams]

_BLOCKS = {
    ExperimentKind.ROTATION_LOG: RotationLogParams,
    ExperimentKind.IET_PC: IetPcParams,
    ExperimentKind.IET_PL: IetPlParams,
}


class ExperimentConfig(BaseModel):
    """
    A validated experiment.

    Exactly the block matching ``kind`` may be present; a missing block is
    filled with defaults. ``threads`` and ``output_dir`` fall back to the
    runtime settings.
    """

    model_config = ConfigDict(extra="forbid", arbitrary_types_allowed=True)

    kind: ExperimentKind
    seed: int = Field(0, ge=0)
    threads: Optional[int] = Field(None, ge=1)
    output_dir: Optional[str] = None
    rotation_log: Optional[RotationLogParams] = None
    iet_pc: Optional[IetPcParams] = None
    iet_pl: Optional[IetPlParams] = None

    @model_validator(mode="after")
    def _runtime_defaults(self) -> "ExperimentConfig":
        runtime = get_settings().runtime
        if self.threads is None:
            self.threads = runtime.threads
        if self.output_dir is None:
            self.output_dir = runtime.output_dir
        return self

    @model_validator(mode="after")
    def _one_block(self) -> "ExperimentConfig":
        for kind, model in _BLOCKS.items():
            present = getattr(self, kind.block) is not None
            if kind is not self.kind and present:
                raise ValueError(f"block '{kind.block}' does not belong to kind '{self.kind.value}'")
            if kind is self.kind and not present:
                setattr(self, kind.block, model())
        return self

    @property
    def params(self) -> Block:
        """The parameter block of this kind."""
        return getattr(self, self.kind.block)

    def with_overrides(self, output_dir: Optional[str] = None, threads: Optional[int] = None) -> "ExperimentConfig":
        """Copy with CLI overrides applied (and re-validated)."""
        data = self.model_dump()
        if output_dir is not None:
            data["output_dir"] = output_dir
        if threads is not None:
            data["threads"] = threads
        return _validate(data, source="command line overrides")

    def to_dict(self) -> Dict[str, Any]:
        data = self.model_dump(mode="json")
        return {k: v for k, v in data.items() if v is not None}


def _format_errors(exc: ValidationError) -> str:
    parts = []
    for err in exc.errors():
        key = ".".join(str(p) for p in err.get("loc", ())) or "<root>"
        message = err.get("msg", "invalid value")
        parts.append(f"{key}: {message}")
    return "; ".join(parts)


def _validate(data: Dict[str, Any], source: str) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigurationError(
            f"Invalid experiment configuration ({source}): {_format_errors(exc)}",
            details=str(exc),
        ) from exc


def experiment_from_dict(data: Dict[str, Any]) -> ExperimentConfig:
    """Validate an already parsed mapping."""
    if not isinstance(data, dict):
        raise ConfigurationError(f"Experiment configuration must be a mapping, got {type(data).__name__}")
    return _validate(data, source="mapping")


def load_experiment_config(path: Union[str, Path]) -> ExperimentConfig:
    """
    Load and validate an experiment file.

    Args:
        path: YAML file

    Returns:
        The validated configuration

    Raises:
        ConfigurationError: If the file is missing, is not YAML, or any key
            fails validation (the message names the key)
    """
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"Experiment file not found: {path}")
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = yaml.safe_load(f)
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"Cannot parse {path} as YAML", details=str(exc)) from exc

    if not isinstance(data, dict):
        raise ConfigurationError(f"{path} must contain a mapping of experiment keys")

    config = _validate(data, source=str(path))
    logger.info(f"Loaded experiment config {path}: kind={config.kind.value}, seed={config.seed}")
    return config
