"""Experiment families for ergoscope."""

from .base import BaseExperiment
from .rotation_log import RotationLogExperiment
from .iet_flow import IetFlowExperiment
from .acceptance import AcceptanceSuite, SuiteSizes


def default_experiments():
    """One instance of every experiment family, in registration order."""
    return [RotationLogExperiment(), IetFlowExperiment()]


__all__ = [
    "BaseExperiment",
    "RotationLogExperiment",
    "IetFlowExperiment",
    "AcceptanceSuite",
    "SuiteSizes",
    "default_experiments",
]
