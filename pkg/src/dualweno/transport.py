"""Dual-mesh scalar transport.

Scalars live on the fine grid of a :class:`DualMesh`.  Base-grid face
velocities are interpolated onto fine faces, then every scalar is advanced
with SSP-RK3 using WENO convection and fourth-order diffusion.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from dualweno.boundary import BoundaryConditions, apply_boundaries, apply_velocity_boundaries
from dualweno.diffusion import build_stencil, diffusive_term
from dualweno.errors import ConfigurationError, SimulationBlowUp
from dualweno.mesh import GHOSTS, DualMesh, StaggeredGrid2D
from dualweno.reconstruction import ConvectionOperator, SchemeVariant
from dualweno.timestep import rk3_step


@dataclass(frozen=True)
class ScalarSpec:
    """One transported scalar.

    ``initial`` is a constant or a callable of the fine center coordinate
    grids ``(X, Z)``.
    """

    name: str
    diffusivity: float
    bcs: BoundaryConditions
    initial: float | Callable = 0.0
    couples_to_buoyancy: bool = False

    def __post_init__(self):
        if not self.diffusivity >= 0:
            raise ConfigurationError(f"{self.name}: diffusivity must be >= 0, got {self.diffusivity}")

    @classmethod
    def from_numbers(cls, name: str, re: float, number: float, bcs: BoundaryConditions, **kw) -> ScalarSpec:
        """Diffusivity 1 / (Re * Sc) or 1 / (Re * Pr)."""
        if not (re > 0 and number > 0):
            raise ConfigurationError(f"{name}: Re and Sc/Pr must be > 0")
        return cls(name, 1.0 / (re * number), bcs, **kw)


@dataclass(frozen=True)
class NondimensionalMap:
    """Affine map sending ``zero_ref`` to 0 and ``one_ref`` to 1.

    For temperature ``zero_ref`` is the surface value and ``one_ref`` the
    initial bulk value; for gas concentration it is the other way round.
    """

    zero_ref: float
    one_ref: float

    def __post_init__(self):
        if self.one_ref == self.zero_ref:
            raise ConfigurationError("reference values must differ")

    def to_nondim(self, q):
        return (np.asarray(q, dtype=float) - self.zero_ref) / (self.one_ref - self.zero_ref)

    def to_dim(self, q_star):
        return self.zero_ref + np.asarray(q_star, dtype=float) * (self.one_ref - self.zero_ref)


def interpolate_velocity(u_base: np.ndarray, w_base: np.ndarray, dual: DualMesh,
                         velocity_bcs: BoundaryConditions | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Ghost-extended fine face velocities from ghost-extended base ones."""
    base, fine = dual.base, dual.fine
    u_f = fine.zeros("xface")
    w_f = fine.zeros("zface")
    ub = u_base[base.interior("xface")]
    wb = w_base[base.interior("zface")]
    if base.mesh_x.periodic:
        ub = ub[:-1]  # closing face is a copy of face 0
    if base.mesh_z.periodic:
        wb = wb[:, :-1]
    ui = dual.interpolate("u", ub)
    wi = dual.interpolate("w", wb)
    g = GHOSTS
    u_f[g:g + ui.shape[0], g:g + ui.shape[1]] = ui
    w_f[g:g + wi.shape[0], g:g + wi.shape[1]] = wi
    if velocity_bcs is not None:
        apply_velocity_boundaries(u_f, w_f, velocity_bcs)
    return u_f, w_f


def restrict_to_base(fine_values: np.ndarray, dual: DualMesh) -> np.ndarray:
    """Area-weighted mean of each base cell's R x R subcells (interior arrays)."""
    r = dual.refine_factor
    if r == 1:
        return np.array(fine_values, dtype=float)
    area = dual.fine.cell_areas()
    nx, nz = dual.base.nx, dual.base.nz
    weighted = (fine_values * area).reshape(nx, r, nz, r).sum(axis=(1, 3))
    return weighted / area.reshape(nx, r, nz, r).sum(axis=(1, 3))


def total_scalar(values: np.ndarray, grid: StaggeredGrid2D) -> float:
    """Sum of interior values times cell areas."""
    return float(np.sum(values * grid.cell_areas()))


class ScalarTransport:
    """Fine-grid scalar state and its RK3 advancement."""

    def __init__(self, dual: DualMesh, specs: list[ScalarSpec], variant: SchemeVariant,
                 velocity_bcs: BoundaryConditions | None = None):
        if sum(s.couples_to_buoyancy for s in specs) > 1:
            raise ConfigurationError("at most one scalar may couple to buoyancy")
        if len({s.name for s in specs}) != len(specs):
            raise ConfigurationError("scalar names must be unique")
        self.dual = dual
        self.grid = dual.fine
        self.specs = {s.name: s for s in specs}
        self.variant = variant
        fx, fz = self.grid.mesh_x, self.grid.mesh_z
        if velocity_bcs is None:
            # periodic where the mesh is, impermeable walls elsewhere
            px = "periodic" if fx.periodic else "free-slip"
            pz = "periodic" if fz.periodic else "free-slip"
            velocity_bcs = BoundaryConditions.from_dict({"left": px, "right": px, "bottom": pz, "top": pz})
        self.velocity_bcs = velocity_bcs
        for s in specs:
            if s.bcs.periodic_x != fx.periodic or s.bcs.periodic_z != fz.periodic:
                raise ConfigurationError(f"{s.name}: periodic sides must match periodic meshes")
        self.convection = ConvectionOperator(fx, fz, variant)
        self.stencils = (build_stencil(fx, "center"), build_stencil(fz, "center"))
        self.u = self.grid.zeros("xface")
        self.w = self.grid.zeros("zface")
        self.fields: dict[str, np.ndarray] = {}
        xc, zc = np.meshgrid(fx.centers, fz.centers, indexing="ij")
        for s in specs:
            data = self.grid.zeros("center")
            init = s.initial(xc, zc) if callable(s.initial) else s.initial
            data[self.grid.interior("center")] = init
            apply_boundaries(data, "center", s.bcs)
            self.fields[s.name] = data

    def interior(self, name: str) -> np.ndarray:
        return self.fields[name][self.grid.interior("center")]

    def set_fine_velocity(self, u_fine: np.ndarray, w_fine: np.ndarray) -> None:
        self.u = u_fine
        self.w = w_fine

    def set_base_velocity(self, u_base: np.ndarray, w_base: np.ndarray) -> None:
        self.u, self.w = interpolate_velocity(u_base, w_base, self.dual, self.velocity_bcs)

    def rhs(self, name: str, phi: np.ndarray) -> np.ndarray:
        """WENO convection plus diffusion at interior fine centers (ghosts must be filled)."""
        spec = self.specs[name]
        out = np.zeros_like(phi)
        g = GHOSTS
        self.convection.add_x(phi, self.u, out, (g, phi.shape[1] - g))
        self.convection.add_z(phi, self.w, out, (g, phi.shape[0] - g))
        if spec.diffusivity > 0:
            diffusive_term(phi, self.stencils[0], self.stencils[1], spec.diffusivity, out=out)
        return out

    def advance(self, dt: float) -> None:
        """One RK3 step of every scalar with the current fine velocities."""
        for name, spec in self.specs.items():
            stage = [0]

            def fill(a, bcs=spec.bcs):
                apply_boundaries(a, "center", bcs)

            def rhs(a, name=name):
                stage[0] += 1
                r = self.rhs(name, a)
                if not np.all(np.isfinite(r)):
                    bad = np.argwhere(~np.isfinite(r))[0]
                    cell = (int(bad[0]) - GHOSTS, int(bad[1]) - GHOSTS)
                    raise SimulationBlowUp(f"{name}: non-finite right-hand side in RK stage {stage[0]} at cell {cell}",
                                           cell=cell, stage=stage[0])
                return r

            self.fields[name] = rk3_step(self.fields[name], rhs, dt, fill)

    def total(self, name: str) -> float:
        return total_scalar(self.interior(name), self.grid)


def scalar_rhs(phi: np.ndarray, u_fine: np.ndarray, w_fine: np.ndarray, spec: ScalarSpec,
               variant: SchemeVariant, dual: DualMesh) -> np.ndarray:
    """Right-hand side of one scalar on ``dual.fine``; builds the operators each call."""
    tr = ScalarTransport(dual, [spec], variant)
    tr.set_fine_velocity(u_fine, w_fine)
    return tr.rhs(spec.name, phi)


def advance_scalars(transport: ScalarTransport, dt: float) -> ScalarTransport:
    transport.advance(dt)
    return transport
