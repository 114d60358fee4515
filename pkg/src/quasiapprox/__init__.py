"""Finite quasigroup approximations of locally compact groups."""
from .approximation import (ApproximationProblem, ApproximationReport, FiniteLeftQuasigroup,
                            HallViolation, build_approximation, verify_approximation)
from .group_models import CompactRegion, Neighborhood, get_model, model_names

__all__ = ["ApproximationProblem", "ApproximationReport", "CompactRegion", "FiniteLeftQuasigroup",
           "HallViolation", "Neighborhood", "build_approximation", "get_model", "model_names",
           "verify_approximation"]
