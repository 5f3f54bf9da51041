"""Exception types raised across the package."""

from __future__ import annotations


class ConfigurationError(ValueError):
    """Invalid mesh, boundary, scheme or case configuration."""


class NumericalDegeneracyError(ArithmeticError):
    """Coincident coordinates or another degenerate stencil geometry."""


class SolverStagnationError(RuntimeError):
    """The pressure solver hit its iteration cap before converging."""

    def __init__(self, message: str, residual: float, iterations: int):
        super().__init__(f"{message} (relative residual {residual:.3e} after {iterations} iterations)")
        self.residual = residual
        self.iterations = iterations


class SimulationBlowUp(RuntimeError):
    """Non-finite values appeared during time integration."""

    def __init__(self, message: str, cell: tuple[int, ...] | None = None, stage: int | None = None):
        super().__init__(message)
        self.cell = cell
        self.stage = stage
