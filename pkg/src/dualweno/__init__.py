"""Low-diffusivity scalar transport on stretched staggered meshes.

WENO5 convection, fourth-order diffusion, a 2D Boussinesq projection solver
and a dual-mesh scheme that advances scalars on a refined subgrid.
"""

from dualweno.errors import (
    ConfigurationError,
    NumericalDegeneracyError,
    SimulationBlowUp,
    SolverStagnationError,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError",
    "NumericalDegeneracyError",
    "SimulationBlowUp",
    "SolverStagnationError",
    "__version__",
]
