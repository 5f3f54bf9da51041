"""One-dimensional convection and diffusion benchmarks."""

from __future__ import annotations

import math

import numpy as np

from dualweno.diffusion import add_diffusion_x, build_stencil
from dualweno.mesh import GHOSTS, Mesh1D, StretchSpec, build_stretched_mesh, build_uniform_mesh, stretch_fraction
from dualweno.reconstruction import ConvectionOperator, SchemeVariant
from dualweno.timestep import rk3_step

from dualweno.cases.config import CaseConfig
from dualweno.cases.convergence import ConvergenceReport, l1_error

_erf = np.vectorize(math.erf, otypes=[float])


def _periodic_fill(a: np.ndarray, n: int) -> None:
    g = GHOSTS
    a[:g] = a[n:n + g]
    a[g + n:] = a[g:2 * g]


def convection_mesh(n: int, delta: float, x_start: float = 0.0, x_end: float = 2.0) -> Mesh1D:
    """Periodic mesh; stretched ones are mirrored about the midpoint (finest there).

    On stretched meshes the tanh law places the solution nodes and faces sit
    halfway between them.
    """
    if delta == 0.0:
        return build_uniform_mesh(n, x_start, x_end, periodic=True)
    return build_stretched_mesh(StretchSpec(delta, n, x_start, x_end, mirrored=True, periodic=True,
                                            layout="nodes"))


def convection_step_size(mesh: Mesh1D, speed: float = 1.0) -> float:
    """Step small enough that RK3's error stays below the fifth-order spatial error.

    Scales as h^(5/3) of the finest cell; 0.5 h^(5/3) keeps the Courant
    number below 0.5 on every mesh of the sweep.
    """
    h = float(mesh.spacing.min())
    return 0.5 * h ** (5.0 / 3.0) / abs(speed)


def run_convection(n: int, variant: SchemeVariant, delta: float = 0.0, end_time: float = 1.0,
                   speed: float = 1.0, dt: float | None = None) -> tuple[Mesh1D, np.ndarray, float]:
    """Advect sin(pi x) on [0, 2] with constant speed; returns mesh, final values and L1 error."""
    mesh = convection_mesh(n, delta)
    op = ConvectionOperator(mesh, None, variant)
    g = GHOSTS
    phi = np.zeros((n + 2 * g, 1))
    phi[g:g + n, 0] = np.sin(np.pi * mesh.centers)
    u = np.full((n + 1 + 2 * g, 1), float(speed))

    def rhs(a):
        out = np.zeros_like(a)
        return op.add_x(a, u, out, (0, 1))

    if dt is None:
        dt = convection_step_size(mesh, speed)
    steps = max(1, int(math.ceil(end_time / dt - 1e-9)))
    dt = end_time / steps
    for _ in range(steps):
        phi = rk3_step(phi, rhs, dt, lambda a: _periodic_fill(a, n))
    values = phi[g:g + n, 0]
    exact = np.sin(np.pi * (mesh.centers - speed * end_time))
    return mesh, values, l1_error(values, exact)


def case_1d_convection(cfg: CaseConfig) -> ConvergenceReport:
    variant = cfg.scheme()
    delta = cfg.delta or 0.0
    sizes = list(cfg.sizes)
    errors = [run_convection(n, variant, delta, cfg.end_time, dt=cfg.dt_fixed)[2] for n in sizes]
    return ConvergenceReport(sizes, errors, {"case": "conv1d", "variant": variant.name,
                                             "epsilon": variant.epsilon, "delta": delta})


def diffusion_mesh(n: int, delta: float, length: float = 5.0) -> Mesh1D:
    """Mesh on [0, length] refined towards x = 0, where the Dirichlet value sits."""
    frac = stretch_fraction(delta, np.arange(n + 1), n)
    faces = length * (1.0 - frac[::-1])
    faces[0] = 0.0
    faces[-1] = length
    return Mesh1D(faces, periodic=False, uniform=delta == 0.0)


def erf_solution(x, t: float, d: float) -> np.ndarray:
    return 1.0 - _erf(np.asarray(x, dtype=float) / math.sqrt(4.0 * d * t))


def run_diffusion(n: int, delta: float, d: float = 2e-5, t_start: float = 10.0, duration: float = 1.0,
                  dt: float | None = None) -> tuple[Mesh1D, np.ndarray, float]:
    """Diffuse the erf profile with phi(0) = 1 and zero flux at the far end."""
    mesh = diffusion_mesh(n, delta)
    stencil = build_stencil(mesh, "center")
    g = GHOSTS
    phi = np.zeros((n + 2 * g, 1))
    phi[g:g + n, 0] = erf_solution(mesh.centers, t_start, d)

    def fill(a):
        for i in range(1, g + 1):
            a[g - i] = 2.0 - a[g + i - 1]
            a[g + n - 1 + i] = a[g + n - i]

    def rhs(a):
        out = np.zeros_like(a)
        add_diffusion_x(a, stencil.coef, d, out, 0, 1)
        return out

    if duration > 0:
        if dt is None:
            h = float(mesh.spacing.min())
            dt = min(1e-3, 0.2 * h * h / d)
        steps = max(1, int(math.ceil(duration / dt - 1e-9)))
        dt = duration / steps
        for _ in range(steps):
            phi = rk3_step(phi, rhs, dt, fill)
    values = phi[g:g + n, 0]
    return mesh, values, l1_error(values, erf_solution(mesh.centers, t_start + duration, d))


def case_1d_diffusion(cfg: CaseConfig) -> ConvergenceReport:
    delta = cfg.delta if cfg.delta is not None else 3.0
    sizes = list(cfg.sizes)
    errors = [run_diffusion(n, delta, cfg.scalar_diffusivity, duration=cfg.end_time, dt=cfg.dt_fixed)[2]
              for n in sizes]
    return ConvergenceReport(sizes, errors, {"case": "diff1d", "delta": delta, "D": cfg.scalar_diffusivity})
