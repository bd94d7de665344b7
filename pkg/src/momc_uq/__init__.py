"""Asymptotic-preserving finite-volume IMEX solvers for multiscale
hyperbolic relaxation systems, with multi-order Monte Carlo estimators
for uncertainty quantification."""

from .mesh import CellField, Grid1D, fill_ghosts, l1_norm
from .models import (Burgers, BloodFlow, BloodFlowElastic, JinXin,
                     ShallowWater, equilibrium_project, initial_condition,
                     max_wave_speed, physical_flux, reduced_model_of,
                     relaxation_source)
from .sampling import DistributionSpec, SampleHierarchy, allocate_samples, sample
from .stepping import StepperConfig, advance, cfl_dt, stepper_for
from .tableaux import EXPLICIT_TABLEAUX, IMEX_TABLEAUX, ImexTableau

__version__ = "0.1.0"

__all__ = [
    "Burgers", "BloodFlow", "BloodFlowElastic", "JinXin", "ShallowWater",
    "CellField", "Grid1D", "fill_ghosts", "l1_norm",
    "DistributionSpec", "SampleHierarchy", "allocate_samples", "sample",
    "StepperConfig", "advance", "cfl_dt", "stepper_for",
    "EXPLICIT_TABLEAUX", "IMEX_TABLEAUX", "ImexTableau",
    "equilibrium_project", "initial_condition", "max_wave_speed",
    "physical_flux", "reduced_model_of", "relaxation_source",
    "__version__",
]


def __getattr__(name):  # defer the __main__ import cycle
    if name == "main":
        from .cli import main
        return main
    raise AttributeError(name)
