"""Sheared-blob test: a cosine bump sheared by a prescribed flow, then un-sheared."""

from __future__ import annotations

import math

import numpy as np

from dualweno.boundary import BoundaryConditions
from dualweno.mesh import DualMesh, StaggeredGrid2D, build_uniform_mesh
from dualweno.reconstruction import SchemeVariant
from dualweno.transport import ScalarSpec, ScalarTransport

from dualweno.cases.config import CaseConfig, boundary_conditions
from dualweno.cases.convergence import ConvergenceReport, l1_error

CENTER = (2.5, 2.5)


def blob(x, z) -> np.ndarray:
    """0.5 (1 + cos(pi r)) inside the unit circle around the center, 0 outside."""
    r = np.sqrt((np.asarray(x) - CENTER[0]) ** 2 + (np.asarray(z) - CENTER[1]) ** 2)
    return np.where(r <= 1.0, 0.5 * (1.0 + np.cos(np.pi * np.minimum(r, 1.0))), 0.0)


def shear_velocity(z) -> np.ndarray:
    return 2.0 * np.arctan(10.0 * (np.asarray(z) - CENTER[1])) / np.pi


def blob_grid(n: int, domain=(0.0, 5.0, 0.0, 5.0)) -> StaggeredGrid2D:
    return StaggeredGrid2D(build_uniform_mesh(n, domain[0], domain[1], periodic=True),
                           build_uniform_mesh(n, domain[2], domain[3]))


def run_blob(n: int, variant: SchemeVariant, end_time: float = 2.0, reverse_time: float = 1.0,
             cfl: float = 0.4, bcs: BoundaryConditions | None = None, speed: float = 1.0):
    """Run the shear/unshear cycle on an n x n mesh; returns (transport, L1 error vs initial field).

    ``speed`` scales the prescribed velocity (0 gives the quiescent check).
    """
    grid = blob_grid(n)
    if bcs is None:
        bcs = BoundaryConditions.from_dict(
            {"left": "periodic", "right": "periodic", "bottom": "neumann", "top": "neumann"})
    dual = DualMesh(grid, 1)
    spec = ScalarSpec("phi", 0.0, bcs, initial=blob)
    tr = ScalarTransport(dual, [spec], variant)
    initial = tr.interior("phi").copy()

    u = grid.zeros("xface")
    u[grid.interior("xface")] = speed * shear_velocity(grid.mesh_z.centers)[None, :]
    w = grid.zeros("zface")
    h = float(grid.mesh_x.spacing.min())
    dt_target = cfl * h
    t = 0.0
    for phase_end, sign in ((reverse_time, 1.0), (end_time, -1.0)):
        duration = phase_end - t
        if duration <= 0:
            continue
        steps = max(1, int(math.ceil(duration / dt_target - 1e-9)))
        dt = duration / steps
        tr.set_fine_velocity(sign * u, w)
        for _ in range(steps):
            tr.advance(dt)
        t = phase_end
    return tr, l1_error(tr.interior("phi"), initial)


def case_2d_sheared_blob(cfg: CaseConfig) -> ConvergenceReport:
    variant = cfg.scheme()
    bcs = boundary_conditions(cfg, "phi")
    errors = [run_blob(n, variant, cfg.end_time, cfl=cfg.cfl, bcs=bcs)[1] for n in cfg.sizes]
    return ConvergenceReport(list(cfg.sizes), errors, {"case": "blob", "variant": variant.name,
                                                       "epsilon": variant.epsilon})
