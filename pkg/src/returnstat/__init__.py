"""Return-time statistics for periodic cylinders of stationary symbolic sources."""

from .dist import (
    DistributionOnN,
    compound_poisson,
    geometric,
    poisson,
    polya_aeppli,
    total_variation,
)
from .errors import (
    CapacityError,
    DomainError,
    ParameterError,
    ProbabilityUnderflow,
    ReturnStatError,
    UnsupportedOperation,
    UsageError,
)
from .models import model_from_config
from .symbolic import ReturnSetup

__version__ = "0.1.0"

__all__ = [
    "DistributionOnN",
    "compound_poisson",
    "geometric",
    "poisson",
    "polya_aeppli",
    "total_variation",
    "CapacityError",
    "DomainError",
    "ParameterError",
    "ProbabilityUnderflow",
    "ReturnStatError",
    "UnsupportedOperation",
    "UsageError",
    "model_from_config",
    "ReturnSetup",
]
