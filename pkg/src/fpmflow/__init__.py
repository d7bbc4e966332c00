"""Pseudo-spectral fractional porous medium flow on the periodic torus.

Library layout:

- :mod:`fpmflow.spectral`    grids, transforms, Fourier multipliers, dealiasing
- :mod:`fpmflow.model`       velocity law, flux divergence, mollified data
- :mod:`fpmflow.stepper`     integrating-factor RK4 with CFL control
- :mod:`fpmflow.diagnostics` norms, blow-up functionals, trilinear form
- :mod:`fpmflow.verify`      numerical checks of the analytic inequalities
- :mod:`fpmflow.driver`      CLI, experiment campaigns, file formats
"""

from .model import InitialCondition, ModelParams
from .spectral import (
    RealField,
    SpectralField,
    TorusGrid,
    forward_transform,
    inverse_transform,
)
from .stepper import StepperConfig, integrate

__all__ = [
    "InitialCondition",
    "ModelParams",
    "RealField",
    "SpectralField",
    "StepperConfig",
    "TorusGrid",
    "forward_transform",
    "integrate",
    "inverse_transform",
]

__version__ = "0.1.0"
