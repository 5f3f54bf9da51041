"""Time integrators and step-size selection.

Scalars use the three-stage strong-stability-preserving Runge-Kutta
scheme, momentum uses second-order Adams-Bashforth started by one forward
Euler step.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from dualweno.errors import ConfigurationError
from dualweno.mesh import StaggeredGrid2D


@dataclass(frozen=True)
class StepControl:
    """Courant number, step cap and whether the step is fixed.

    In ``"fixed"`` mode ``dt_fixed`` is used verbatim.
    """

    cfl: float = 0.4
    dt_cap: float | None = None
    mode: str = "auto"
    dt_fixed: float | None = None

    def __post_init__(self):
        if not 0.0 < self.cfl <= 1.0:
            raise ConfigurationError(f"cfl must lie in (0, 1], got {self.cfl}")
        if self.mode not in ("auto", "fixed"):
            raise ConfigurationError(f"mode must be 'auto' or 'fixed', got {self.mode!r}")
        if self.mode == "fixed" and not (self.dt_fixed and self.dt_fixed > 0):
            raise ConfigurationError("fixed mode needs dt_fixed > 0")
        if self.dt_cap is not None and not self.dt_cap > 0:
            raise ConfigurationError(f"dt_cap must be > 0, got {self.dt_cap}")


def rk3_step(phi: np.ndarray, rhs: Callable[[np.ndarray], np.ndarray], dt: float,
             fill: Callable[[np.ndarray], None] | None = None) -> np.ndarray:
    """One SSP-RK3 step; ``fill`` refreshes ghosts before each ``rhs`` call.

    ``rhs`` must not modify its argument except through ``fill``.
    """
    # increment form of the Shu-Osher stages: identical map, but a zero
    # right-hand side leaves phi bitwise unchanged
    if fill is not None:
        fill(phi)
    k1 = rhs(phi)
    p1 = phi + dt * k1
    if fill is not None:
        fill(p1)
    k2 = rhs(p1)
    p2 = phi + (0.25 * dt) * (k1 + k2)
    if fill is not None:
        fill(p2)
    k3 = rhs(p2)
    out = phi + (dt / 6.0) * (k1 + k2 + 4.0 * k3)
    if fill is not None:
        fill(out)
    return out


def ab2_step(u: np.ndarray, a_now: np.ndarray, a_prev: np.ndarray | None, dt: float,
             dt_prev: float | None = None) -> np.ndarray:
    """Adams-Bashforth predictor; forward Euler when no history exists.

    With ``dt_prev`` differing from ``dt`` the variable-step weights
    ``1 + r/2`` and ``-r/2`` (``r = dt/dt_prev``) are used, which reduce to
    3/2 and -1/2 for equal steps.
    """
    if a_prev is None:
        return u + dt * a_now
    if dt_prev is None or dt_prev == dt:
        return u + dt * (1.5 * a_now - 0.5 * a_prev)
    r = dt / dt_prev
    return u + dt * ((1.0 + 0.5 * r) * a_now - 0.5 * r * a_prev)


def convective_limit(u: np.ndarray, w: np.ndarray, grid: StaggeredGrid2D) -> float:
    """min over faces of (local spacing / |velocity|); ``inf`` for a fluid at rest.

    ``u`` and ``w`` are interior face arrays of ``grid``.
    """
    dx = grid.mesh_x.spacing_g
    dz = grid.mesh_z.spacing_g
    g = 3
    # the spacing attached to face f is the smaller neighbour cell
    hx = np.minimum(dx[g - 1:g + grid.nx], dx[g:g + grid.nx + 1])
    hz = np.minimum(dz[g - 1:g + grid.nz], dz[g:g + grid.nz + 1])
    limit = np.inf
    with np.errstate(divide="ignore"):
        au = np.abs(u)
        if au.max(initial=0.0) > 0:
            limit = min(limit, float(np.min(hx[:, None] / au)))
        aw = np.abs(w)
        if aw.max(initial=0.0) > 0:
            limit = min(limit, float(np.min(hz[None, :] / aw)))
    return limit


def diffusive_limit(grid: StaggeredGrid2D, d_max: float) -> float:
    if d_max <= 0:
        return np.inf
    h = min(grid.mesh_x.spacing.min(), grid.mesh_z.spacing.min())
    return h * h / (4.0 * d_max)


def ab2_diffusive_limit(grid: StaggeredGrid2D, nu: float) -> float:
    """Largest AB2 step for explicit fourth-order viscous terms.

    The stencil's most negative eigenvalue is -16/3 per 1/h^2 and AB2 is
    stable on [-1, 0] of the real axis.
    """
    if nu <= 0:
        return np.inf
    hx = grid.mesh_x.spacing.min()
    hz = grid.mesh_z.spacing.min()
    return 3.0 / (16.0 * nu * (1.0 / hx ** 2 + 1.0 / hz ** 2))


def select_dt(u: np.ndarray, w: np.ndarray, grid: StaggeredGrid2D, d_max: float, control: StepControl) -> float:
    """Stable step on ``grid`` from the convective and diffusive limits."""
    if control.mode == "fixed":
        return float(control.dt_fixed)
    dt = control.cfl * min(convective_limit(u, w, grid), diffusive_limit(grid, d_max))
    if control.dt_cap is not None:
        dt = min(dt, control.dt_cap)
    if not np.isfinite(dt):
        raise ConfigurationError("no stability limit applies; set dt_cap")
    return float(dt)
