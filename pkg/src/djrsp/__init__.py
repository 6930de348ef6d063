"""Simulation and analysis of noisy GHZ-based joint remote state preparation."""

from .analysis import (
    ClosedFormId,
    QuadratureSpec,
    closed_form,
    de_improvement_region,
    optimize_r,
    si_average_fidelity,
    verdict_bitflip,
    verdict_phaseflip,
)
from .channels import NoiseKind, PostSelectionError, ProtectionConfig, kraus_set
from .protocol import ProtocolMode, TargetState, noisy_resource, run

__all__ = [
    "ClosedFormId",
    "NoiseKind",
    "PostSelectionError",
    "ProtectionConfig",
    "ProtocolMode",
    "QuadratureSpec",
    "TargetState",
    "closed_form",
    "de_improvement_region",
    "kraus_set",
    "noisy_resource",
    "optimize_r",
    "run",
    "si_average_fidelity",
    "verdict_bitflip",
    "verdict_phaseflip",
]
__version__ = "0.1.0"
