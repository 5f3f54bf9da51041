"""Buoyancy-driven mass transfer below a cooled surface.

The temperature T* (1 in the bulk, 0 at the surface) and the gas
concentration phi* (0 in the bulk, 1 at the surface) diffuse from the top
of a 5 x 5 box that is periodic in x.  At ``t_inject`` a uniform random
field is added to T*, seeding a Rayleigh-Taylor type instability whose
falling plumes carry both scalars downwards.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from dualweno.boundary import apply_boundaries
from dualweno.errors import ConfigurationError
from dualweno.flow import FlowParameters, FlowSolver, center_to_face_table
from dualweno.mesh import (GHOSTS, DualMesh, StaggeredGrid2D, StretchSpec, build_stretched_mesh,
                           build_uniform_mesh)
from dualweno.timestep import StepControl, ab2_diffusive_limit, convective_limit, diffusive_limit
from dualweno.transport import ScalarSpec, ScalarTransport, restrict_to_base, total_scalar

from dualweno.cases.config import CaseConfig, boundary_conditions

NOT_REACHED = float("inf")
REFERENCE_ARRIVAL_TIMES = {0.010: 23.75, 0.020: 22.30, 0.040: 20.85}
REFERENCE_GROWTH_RATE = 0.478
MOMENTUM_SAFETY = 0.8  # fraction of the AB2 viscous limit on the base grid


def draw_disturbance(shape: tuple[int, int], seed: int, cells: tuple[int, int] | None = None) -> np.ndarray:
    """Uniform [0, 1) field of ``shape`` from a counter-based generator; scale by T_ran before use.

    With ``cells`` the values are drawn on that coarser lattice and each one
    fills a block of ``shape[0] // cells[0]`` by ``shape[1] // cells[1]`` cells.
    """
    if cells is None:
        cells = shape
    mx, mz = int(cells[0]), int(cells[1])
    if shape[0] % mx or shape[1] % mz:
        raise ConfigurationError(f"disturbance lattice {mx}x{mz} does not divide the fine grid {shape}")
    coarse = np.random.Generator(np.random.Philox(seed)).random((mx, mz))
    return np.repeat(np.repeat(coarse, shape[0] // mx, axis=0), shape[1] // mz, axis=1)


def save_disturbance(field_: np.ndarray, path) -> Path:
    path = Path(path)
    np.save(path, field_)
    return path


def load_disturbance(path, shape: tuple[int, int]) -> np.ndarray:
    data = np.load(path)
    if data.shape != tuple(shape):
        raise ConfigurationError(f"disturbance file {path} has shape {data.shape}, expected {tuple(shape)}")
    return data


def buoyancy_grid(nx: int, nz: int, delta: float, domain=(0.0, 5.0, 0.0, 5.0)) -> StaggeredGrid2D:
    """Periodic uniform x, z stretched towards the top surface."""
    mx = build_uniform_mesh(nx, domain[0], domain[1], periodic=True)
    if delta == 0.0:
        mz = build_uniform_mesh(nz, domain[2], domain[3])
    else:
        mz = build_stretched_mesh(StretchSpec(delta, nz, domain[2], domain[3]))
    return StaggeredGrid2D(mx, mz)


def linear_row_weights(coords: np.ndarray, target: float) -> tuple[int, float]:
    """Index ``k`` and weight ``a`` with value = (1 - a) f[k] + a f[k + 1] at ``target``."""
    k = int(np.searchsorted(coords, target, side="right") - 1)
    k = min(max(k, 0), coords.size - 2)
    a = (target - coords[k]) / (coords[k + 1] - coords[k])
    return k, float(a)


def profile_at(values: np.ndarray, grid: StaggeredGrid2D, spec: str) -> tuple[np.ndarray, np.ndarray]:
    """Line profile ``"z=4.5"`` (along x) or ``"x=1.3"`` (along z) by linear interpolation."""
    axis, _, pos = spec.partition("=")
    target = float(pos)
    if axis.strip() == "z":
        k, a = linear_row_weights(grid.mesh_z.centers, target)
        return grid.mesh_x.centers.copy(), (1 - a) * values[:, k] + a * values[:, k + 1]
    if axis.strip() == "x":
        i, a = linear_row_weights(grid.mesh_x.centers, target)
        return grid.mesh_z.centers.copy(), (1 - a) * values[i, :] + a * values[i + 1, :]
    raise ConfigurationError(f"profile spec must look like 'z=4.5' or 'x=1.3', got {spec!r}")


def crossing_time(t0: float, v0: float, t1: float, v1: float, level: float) -> float:
    """Time at which a linear ramp from (t0, v0) to (t1, v1) passes ``level``."""
    if v1 == v0:
        return t1
    return t0 + (level - v0) * (t1 - t0) / (v1 - v0)


def plume_arrival_time(times, front_values, threshold: float = 0.5) -> float:
    """First time the tracked minimum of T* at the target depth drops to ``threshold``.

    ``front_values[j]`` is min over x of T* at the depth at ``times[j]``.
    Returns ``NOT_REACHED`` when the series never gets there.
    """
    times = list(times)
    vals = list(front_values)
    for j, v in enumerate(vals):
        if v <= threshold:
            if j == 0:
                return float(times[0])
            return crossing_time(times[j - 1], vals[j - 1], times[j], v, threshold)
    return NOT_REACHED


def growth_rate(arrival_times) -> float:
    """ln 2 over the mean arrival shift between successive amplitude doublings."""
    t = sorted(arrival_times, reverse=True)
    shifts = [a - b for a, b in zip(t, t[1:])]
    if not shifts or any(s <= 0 for s in shifts):
        return float("nan")
    return math.log(2.0) / float(np.mean(shifts))


@dataclass
class BuoyancyRecord:
    """Time series sampled at output times plus per-step extrema."""

    times: list[float] = field(default_factory=list)
    total_phi: list[float] = field(default_factory=list)
    total_t: list[float] = field(default_factory=list)
    max_w: list[float] = field(default_factory=list)
    kinetic_energy: list[float] = field(default_factory=list)
    max_divergence: list[float] = field(default_factory=list)
    step_times: list[float] = field(default_factory=list)
    front: list[float] = field(default_factory=list)
    phi_min: float = 0.0
    phi_max: float = 0.0
    # extrema once the disturbance is in, i.e. while convection acts
    phi_min_convective: float = float("inf")
    phi_max_convective: float = float("-inf")
    profiles: dict = field(default_factory=dict)

    def series(self) -> dict[str, np.ndarray]:
        return {k: np.asarray(getattr(self, k)) for k in
                ("times", "total_phi", "total_t", "max_w", "kinetic_energy", "max_divergence")}


class BuoyancyRun:
    """Coupled flow and dual-mesh scalar integration for one configuration."""

    def __init__(self, cfg: CaseConfig, disturbance: np.ndarray | None = None):
        if cfg.case != "buoyancy":
            raise ConfigurationError(f"expected a buoyancy configuration, got {cfg.case!r}")
        self.cfg = cfg
        domain = cfg.domain or [0.0, 5.0, 0.0, 5.0]
        self.base = buoyancy_grid(cfg.nx, cfg.nz, cfg.delta or 0.0, domain)
        self.dual = DualMesh(self.base, cfg.refine)
        self.fine = self.dual.fine
        self.velocity_bcs = boundary_conditions(cfg, "velocity")
        self.t_bcs = boundary_conditions(cfg, "T")
        self.phi_bcs = boundary_conditions(cfg, "phi")
        self.flow = FlowSolver(self.base, self.velocity_bcs,
                               FlowParameters(re=cfg.re, ri=cfg.ri, poisson_tol=cfg.poisson_tol))
        specs = [
            ScalarSpec.from_numbers("T", cfg.re, cfg.pr, self.t_bcs, initial=1.0, couples_to_buoyancy=True),
            ScalarSpec.from_numbers("phi", cfg.re, cfg.sc, self.phi_bcs, initial=0.0),
        ]
        self.transport = ScalarTransport(self.dual, specs, cfg.scheme(), self.velocity_bcs)
        self.control = StepControl(cfl=cfg.cfl, dt_cap=cfg.dt_cap, mode=cfg.dt_mode, dt_fixed=cfg.dt_fixed)
        self.d_scalar = max(s.diffusivity for s in specs)

        shape = self.fine.interior_shape("center")
        if disturbance is None:
            if cfg.disturbance.file:
                disturbance = load_disturbance(cfg.disturbance.file, shape)
            else:
                cells = cfg.disturbance.cells or (cfg.nx, cfg.nz)
                disturbance = draw_disturbance(shape, cfg.disturbance.seed, tuple(cells))
        if disturbance.shape != shape:
            raise ConfigurationError(f"disturbance shape {disturbance.shape} does not match fine grid {shape}")
        self.disturbance = disturbance
        self.injected = False
        self._tw_table = center_to_face_table(self.base.mesh_z)
        self._t_base = self.base.zeros("center")
        self._front_k = linear_row_weights(self.fine.mesh_z.centers, cfg.plume_depth)
        self.time = 0.0
        self.steps = 0
        self.record = BuoyancyRecord()
        self._sample()
        self._track_front()

    # -- coupling -----------------------------------------------------------

    def temperature_at_w(self) -> np.ndarray:
        """Buoyancy temperature at base w-points, minus its horizontal mean, plus 1.

        The horizontally uniform part of the buoyancy force is a pure
        vertical gradient and is balanced exactly by the pressure, so it is
        dropped here; this keeps a horizontally uniform state exactly at rest.
        """
        base = self.base
        self._t_base[base.interior("center")] = restrict_to_base(self.transport.interior("T"), self.dual)
        apply_boundaries(self._t_base, "center", self.t_bcs)
        t_w = base.zeros("zface")
        g = GHOSTS
        nzf = base.nz + 1
        tab = self._tw_table
        for b in range(4):
            ks = np.arange(g, g + nzf)
            t_w[:, g:g + nzf] += tab[ks, b][None, :] * self._t_base[:, ks - 2 + b]
        inner = t_w[g:g + base.nx, g:g + nzf]
        # offsets from the first column first, so uniform rows give exactly zero
        inner -= inner[:1].copy()
        inner -= inner.mean(axis=0, keepdims=True)
        inner += 1.0
        return t_w

    def stable_dt(self) -> float:
        if self.control.mode == "fixed":
            return float(self.control.dt_fixed)
        uf = self.transport.u[self.fine.interior("xface")]
        wf = self.transport.w[self.fine.interior("zface")]
        ub = self.flow.u[self.base.interior("xface")]
        wb = self.flow.w[self.base.interior("zface")]
        limit = min(convective_limit(uf, wf, self.fine), convective_limit(ub, wb, self.base),
                    diffusive_limit(self.fine, self.d_scalar))
        dt = min(self.control.cfl * limit, MOMENTUM_SAFETY * ab2_diffusive_limit(self.base, 1.0 / self.cfg.re))
        if self.control.dt_cap is not None:
            dt = min(dt, self.control.dt_cap)
        return float(dt)

    def inject(self) -> None:
        t = self.transport.fields["T"]
        t[self.fine.interior("center")] += self.cfg.disturbance.amplitude * self.disturbance
        apply_boundaries(t, "center", self.t_bcs)
        self.injected = True

    def step(self, dt: float) -> None:
        u_old = self.flow.u.copy()
        w_old = self.flow.w.copy()
        self.flow.step(dt, self.temperature_at_w())
        self.transport.set_base_velocity(0.5 * (u_old + self.flow.u), 0.5 * (w_old + self.flow.w))
        self.transport.advance(dt)
        self.time += dt
        self.steps += 1

    # -- diagnostics --------------------------------------------------------

    def front_value(self) -> float:
        k, a = self._front_k
        t = self.transport.interior("T")
        return float(np.min((1 - a) * t[:, k] + a * t[:, k + 1]))

    def _track_front(self) -> None:
        self.record.step_times.append(self.time)
        self.record.front.append(self.front_value())
        phi = self.transport.interior("phi")
        lo, hi = float(phi.min()), float(phi.max())
        if len(self.record.step_times) == 1:
            self.record.phi_min, self.record.phi_max = lo, hi
        else:
            self.record.phi_min = min(self.record.phi_min, lo)
            self.record.phi_max = max(self.record.phi_max, hi)
        if self.injected:
            self.record.phi_min_convective = min(self.record.phi_min_convective, lo)
            self.record.phi_max_convective = max(self.record.phi_max_convective, hi)

    def _sample(self) -> None:
        rec = self.record
        rec.times.append(self.time)
        rec.total_phi.append(total_scalar(self.transport.interior("phi"), self.fine))
        rec.total_t.append(total_scalar(self.transport.interior("T"), self.fine))
        wb = self.flow.w[self.base.interior("zface")]
        rec.max_w.append(float(np.abs(wb).max()))
        hist = self.flow.history
        rec.kinetic_energy.append(hist[-1].kinetic_energy if hist else 0.0)
        rec.max_divergence.append(hist[-1].div_after if hist else 0.0)
        for spec in self.cfg.output.profiles:
            rec.profiles.setdefault(spec, []).append(self.profile("phi", spec)[1])

    def profile(self, name: str, spec: str) -> tuple[np.ndarray, np.ndarray]:
        if name == "w":
            wb = self.flow.w[self.base.interior("zface")]
            axis, _, pos = spec.partition("=")
            if axis.strip() != "z":
                raise ConfigurationError("w profiles are taken along x at a fixed z")
            k, a = linear_row_weights(self.base.mesh_z.faces, float(pos))
            return self.base.mesh_x.centers.copy(), (1 - a) * wb[:, k] + a * wb[:, k + 1]
        return profile_at(self.transport.interior(name), self.fine, spec)

    def arrival_time(self) -> float:
        return plume_arrival_time(self.record.step_times, self.record.front, self.cfg.plume_threshold)

    # -- driver -------------------------------------------------------------

    def run(self, end_time: float | None = None, on_output: Callable[[BuoyancyRun], None] | None = None,
            stop_on_arrival: float | None = None) -> BuoyancyRecord:
        """Integrate to ``end_time``; steps land exactly on injection and output times.

        ``stop_on_arrival`` ends the run that many time units after the
        plume front reaches the target depth.
        """
        end = self.cfg.end_time if end_time is None else end_time
        interval = self.cfg.output.interval
        t_inject = self.cfg.disturbance.t_inject
        eps = 1e-9 * max(1.0, end)
        next_output = (math.floor(self.time / interval + eps) + 1) * interval
        if on_output is not None and self.steps == 0:
            on_output(self)
        while self.time < end - eps:
            if not self.injected and abs(self.time - t_inject) <= eps:
                self.inject()
            targets = [end, next_output]
            if not self.injected:
                targets.append(t_inject)
            horizon = min(t for t in targets if t > self.time + eps)
            dt = min(self.stable_dt(), horizon - self.time)
            if horizon - (self.time + dt) < 1e-6 * dt:
                dt = horizon - self.time
            self.step(dt)
            if abs(self.time - horizon) <= eps:
                self.time = horizon
            self._track_front()
            if abs(self.time - next_output) <= eps:
                self._sample()
                next_output += interval
                if on_output is not None:
                    on_output(self)
            if stop_on_arrival is not None:
                arrival = self.arrival_time()
                if arrival != NOT_REACHED and self.time >= arrival + stop_on_arrival:
                    break
        if not self.injected and abs(self.time - t_inject) <= eps:
            self.inject()
        return self.record


def case_2d_buoyancy(cfg: CaseConfig, **kw) -> BuoyancyRun:
    run = BuoyancyRun(cfg)
    run.run(**kw)
    return run
