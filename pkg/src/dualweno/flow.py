"""2D incompressible Navier-Stokes on the staggered base grid.

Momentum is advanced with Adams-Bashforth 2, using fourth-order
skew-symmetric convection, fourth-order diffusion and Boussinesq buoyancy.
The predictor is then projected onto the divergence-free space with a
pressure from a Jacobi-preconditioned conjugate-gradient solve.
"""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass

import numba
import numpy as np

from dualweno.boundary import BoundaryConditions, apply_velocity_boundaries, check_velocity_boundaries
from dualweno.diffusion import build_stencil, diffusive_term
from dualweno.errors import ConfigurationError, SimulationBlowUp, SolverStagnationError
from dualweno.mesh import GHOSTS, Mesh1D, StaggeredGrid2D, lagrange_weights
from dualweno.timestep import ab2_step


@dataclass(frozen=True)
class FlowParameters:
    """Reynolds number, buoyancy coefficient and pressure-solver settings.

    ``poisson_maxiter`` of ``None`` means ten times the square root of the
    number of cells.
    """

    re: float = 100.0
    ri: float = 0.74
    poisson_tol: float = 1e-10
    poisson_maxiter: int | None = None

    def __post_init__(self):
        if not self.re > 0:
            raise ConfigurationError(f"Re must be > 0, got {self.re}")
        if not self.ri >= 0:
            raise ConfigurationError(f"Ri must be >= 0, got {self.ri}")
        if not 0 < self.poisson_tol < 1:
            raise ConfigurationError(f"poisson_tol must lie in (0, 1), got {self.poisson_tol}")


# ---------------------------------------------------------------------------
# interpolation between staggered locations


def interpolation_table(src: np.ndarray, dst: np.ndarray, offset: int) -> np.ndarray:
    """4-point Lagrange weights from ``src[J + offset: J + offset + 4]`` to ``dst[J]``.

    Rows whose stencil would leave ``src`` are zero.
    """
    table = np.zeros((dst.size, 4))
    for j in range(dst.size):
        lo = j + offset
        if lo < 0 or lo + 4 > src.size:
            continue
        table[j] = lagrange_weights(src[lo:lo + 4], dst[j])
    return table


@numba.njit(cache=True, error_model="numpy")
def _interp2(src, tx, ox, tz, oz, out):
    ni, nk = out.shape
    for i in range(ni):
        for k in range(nk):
            s = 0.0
            for a in range(4):
                wa = tx[i, a]
                if wa == 0.0:
                    continue
                for b in range(4):
                    wb = tz[k, b]
                    if wb != 0.0:
                        s += wa * wb * src[i + ox + a, k + oz + b]
            out[i, k] = s


@dataclass(frozen=True)
class StaggerInterpolation:
    """Weights moving ``w`` to u-points and ``u`` to w-points."""

    w_to_u: tuple[np.ndarray, np.ndarray]
    u_to_w: tuple[np.ndarray, np.ndarray]

    @classmethod
    def build(cls, grid: StaggeredGrid2D) -> StaggerInterpolation:
        mx, mz = grid.mesh_x, grid.mesh_z
        # center -> face sits at offset -2, face -> center at offset -1
        w_to_u = (interpolation_table(mx.centers_g, mx.faces_g, -2),
                  interpolation_table(mz.faces_g, mz.centers_g, -1))
        u_to_w = (interpolation_table(mx.faces_g, mx.centers_g, -1),
                  interpolation_table(mz.centers_g, mz.faces_g, -2))
        return cls(w_to_u, u_to_w)

    def wbar(self, w: np.ndarray, out: np.ndarray) -> np.ndarray:
        tx, tz = self.w_to_u
        _interp2(w, tx, -2, tz, -1, out)
        return out

    def ubar(self, u: np.ndarray, out: np.ndarray) -> np.ndarray:
        tx, tz = self.u_to_w
        _interp2(u, tx, -1, tz, -2, out)
        return out


# ---------------------------------------------------------------------------
# convection


def _four_point_denominators(x: np.ndarray) -> np.ndarray:
    """-x[j+2] + 8 x[j+1] - 8 x[j-1] + x[j-2] (12 h on a uniform mesh)."""
    den = np.full(x.size, np.nan)
    den[2:-2] = -x[4:] + 8.0 * x[3:-1] - 8.0 * x[1:-3] + x[:-4]
    return den


@numba.njit(cache=True, error_model="numpy")
def _skew_convection(q, vbar_x, vbar_z, den_x, den_z, out, i0, i1, k0, k1):
    """-1/2 [d(q a)/dx + a dq/dx + ...], the skew-symmetric product form.

    ``vbar_x`` is the advecting velocity along x at the points of ``q``
    (``q`` itself for the self-advected component) and ``vbar_z`` along z.
    """
    for i in range(i0, i1):
        for k in range(k0, k1):
            a0 = vbar_x[i, k]
            sx = (-q[i + 2, k] * (a0 + vbar_x[i + 2, k]) + 8.0 * q[i + 1, k] * (a0 + vbar_x[i + 1, k])
                  - 8.0 * q[i - 1, k] * (a0 + vbar_x[i - 1, k]) + q[i - 2, k] * (a0 + vbar_x[i - 2, k]))
            b0 = vbar_z[i, k]
            sz = (-q[i, k + 2] * (b0 + vbar_z[i, k + 2]) + 8.0 * q[i, k + 1] * (b0 + vbar_z[i, k + 1])
                  - 8.0 * q[i, k - 1] * (b0 + vbar_z[i, k - 1]) + q[i, k - 2] * (b0 + vbar_z[i, k - 2]))
            out[i, k] = -0.5 * (sx / den_x[i] + sz / den_z[k])


class MomentumOperator:
    """Convection, diffusion and buoyancy terms on one staggered grid."""

    def __init__(self, grid: StaggeredGrid2D, params: FlowParameters):
        self.grid = grid
        self.params = params
        mx, mz = grid.mesh_x, grid.mesh_z
        self.interp = StaggerInterpolation.build(grid)
        self.den_u = (_four_point_denominators(mx.faces_g), _four_point_denominators(mz.centers_g))
        self.den_w = (_four_point_denominators(mx.centers_g), _four_point_denominators(mz.faces_g))
        self.diff_u = (build_stencil(mx, "face"), build_stencil(mz, "center"))
        self.diff_w = (build_stencil(mx, "center"), build_stencil(mz, "face"))
        self._wbar = grid.zeros("xface")
        self._ubar = grid.zeros("zface")

    def convective_u(self, u: np.ndarray, w: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
        """C_x at u-points; ghost entries of the result are zero."""
        if out is None:
            out = self.grid.zeros("xface")
        wbar = self.interp.wbar(w, self._wbar)
        sx, sz = self.grid.interior("xface")
        _skew_convection(u, u, wbar, self.den_u[0], self.den_u[1], out, sx.start, sx.stop, sz.start, sz.stop)
        return out

    def convective_w(self, u: np.ndarray, w: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
        """C_z at w-points; ghost entries of the result are zero."""
        if out is None:
            out = self.grid.zeros("zface")
        ubar = self.interp.ubar(u, self._ubar)
        sx, sz = self.grid.interior("zface")
        _skew_convection(w, ubar, w, self.den_w[0], self.den_w[1], out, sx.start, sx.stop, sz.start, sz.stop)
        return out

    def rhs(self, u: np.ndarray, w: np.ndarray, t_w: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Right-hand sides ``a`` and ``c``; ``t_w`` is T* at w-points (ghost-shaped)."""
        nu = 1.0 / self.params.re
        a = self.convective_u(u, w)
        diffusive_term(u, self.diff_u[0], self.diff_u[1], nu, out=a)
        c = self.convective_w(u, w)
        diffusive_term(w, self.diff_w[0], self.diff_w[1], nu, out=c)
        if t_w is not None and self.params.ri != 0.0:
            sx, sz = self.grid.interior("zface")
            c[sx, sz] += self.params.ri * (t_w[sx, sz] - 1.0)
        return a, c


def momentum_rhs(u: np.ndarray, w: np.ndarray, t_w: np.ndarray | None, grid: StaggeredGrid2D,
                 re: float = 100.0, ri: float = 0.74) -> tuple[np.ndarray, np.ndarray]:
    """One-shot momentum right-hand side; builds the operator each call."""
    return MomentumOperator(grid, FlowParameters(re=re, ri=ri)).rhs(u, w, t_w)


# ---------------------------------------------------------------------------
# pressure


@numba.njit(cache=True, error_model="numpy")
def _apply_laplacian(p, ce, cn, out):
    nx, nz = p.shape
    for i in range(nx):
        ie = i + 1
        iw = i - 1
        if ie == nx:
            ie = 0
        if iw < 0:
            iw = nx - 1
        for k in range(nz):
            kn = k + 1
            ks = k - 1
            if kn == nz:
                kn = 0
            if ks < 0:
                ks = nz - 1
            p0 = p[i, k]
            s = ce[i, k] * (p0 - p[ie, k]) + ce[iw, k] * (p0 - p[iw, k])
            s += cn[i, k] * (p0 - p[i, kn]) + cn[i, ks] * (p0 - p[i, ks])
            out[i, k] = s


@numba.njit(cache=True, error_model="numpy")
def _dot(a, b):
    s = 0.0
    for i in range(a.shape[0]):
        for k in range(a.shape[1]):
            s += a[i, k] * b[i, k]
    return s


@numba.njit(cache=True, error_model="numpy")
def _apply_dot(p, ce, cn, out):
    """``out = A p`` and return ``p . A p`` in the same sweep."""
    nx, nz = p.shape
    acc = 0.0
    for i in range(nx):
        ie = i + 1 if i + 1 < nx else 0
        iw = i - 1 if i > 0 else nx - 1
        for k in range(nz):
            kn = k + 1 if k + 1 < nz else 0
            ks = k - 1 if k > 0 else nz - 1
            p0 = p[i, k]
            s = ce[i, k] * (p0 - p[ie, k]) + ce[iw, k] * (p0 - p[iw, k])
            s += cn[i, k] * (p0 - p[i, kn]) + cn[i, ks] * (p0 - p[i, ks])
            out[i, k] = s
            acc += p0 * s
    return acc


@numba.njit(cache=True, error_model="numpy")
def _pcg(b, x, ce, cn, diag, tol, maxiter):
    nx, nz = b.shape
    r = np.empty_like(b)
    ap = np.empty_like(b)
    inv = 1.0 / diag
    _apply_laplacian(x, ce, cn, ap)
    for i in range(nx):
        for k in range(nz):
            r[i, k] = b[i, k] - ap[i, k]
    bnorm = math.sqrt(_dot(b, b))
    if bnorm == 0.0:
        for i in range(nx):
            for k in range(nz):
                x[i, k] = 0.0
        return 0, 0.0
    d = r * inv
    rz = _dot(r, d)
    res = math.sqrt(_dot(r, r)) / bnorm
    it = 0
    while res > tol and it < maxiter:
        dad = _apply_dot(d, ce, cn, ap)
        if dad <= 0.0:
            break
        alpha = rz / dad
        rr = 0.0
        rz_new = 0.0
        # x, r update fused with both inner products of the new residual
        for i in range(nx):
            for k in range(nz):
                x[i, k] += alpha * d[i, k]
                rik = r[i, k] - alpha * ap[i, k]
                r[i, k] = rik
                rr += rik * rik
                rz_new += rik * rik * inv[i, k]
        it += 1
        res = math.sqrt(rr) / bnorm
        if res <= tol:
            break
        beta = rz_new / rz
        rz = rz_new
        for i in range(nx):
            for k in range(nz):
                d[i, k] = r[i, k] * inv[i, k] + beta * d[i, k]
    return it, res


@dataclass
class PoissonInfo:
    iterations: int
    residual: float


class PoissonOperator:
    """Volume-weighted pressure Laplacian, symmetric positive semi-definite.

    ``A p = -vol * div(grad p)`` with zero normal gradient on walls and
    wrap-around on periodic sides.  ``ce[i, k]`` couples cell ``i`` with
    ``i + 1`` and ``cn[i, k]`` couples ``k`` with ``k + 1``.
    """

    def __init__(self, grid: StaggeredGrid2D, tol: float = 1e-10, maxiter: int | None = None):
        self.grid = grid
        self.tol = tol
        nx, nz = grid.nx, grid.nz
        self.maxiter = maxiter if maxiter is not None else int(10 * math.sqrt(nx * nz))
        mx, mz = grid.mesh_x, grid.mesh_z
        g = GHOSTS
        dxc = np.diff(mx.centers_g)[g:g + nx]  # x_{i+1} - x_i
        dzc = np.diff(mz.centers_g)[g:g + nz]
        self.ce = np.outer(1.0 / dxc, mz.spacing)
        self.cn = np.outer(mx.spacing, 1.0 / dzc)
        if not mx.periodic:
            self.ce[-1, :] = 0.0
        if not mz.periodic:
            self.cn[:, -1] = 0.0
        self.diag = (self.ce + np.roll(self.ce, 1, axis=0) + self.cn + np.roll(self.cn, 1, axis=1))
        self.vol = grid.cell_areas()

    def apply(self, p: np.ndarray) -> np.ndarray:
        out = np.empty_like(p)
        _apply_laplacian(np.ascontiguousarray(p), self.ce, self.cn, out)
        return out

    def dense(self) -> np.ndarray:
        """Assembled matrix; only sensible on small grids."""
        n = self.grid.nx * self.grid.nz
        mat = np.zeros((n, n))
        e = np.zeros((self.grid.nx, self.grid.nz))
        for j in range(n):
            e.flat[j] = 1.0
            mat[:, j] = self.apply(e).ravel()
            e.flat[j] = 0.0
        return mat

    def solve(self, div: np.ndarray, dt: float, x0: np.ndarray | None = None) -> tuple[np.ndarray, PoissonInfo]:
        """Pressure with ``div(grad p) = div / dt`` and zero mean."""
        b = -self.vol * div / dt
        b = b - b.mean()
        x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=float)
        it, res = _pcg(b, x, self.ce, self.cn, self.diag, self.tol, self.maxiter)
        if res > self.tol:
            raise SolverStagnationError("pressure solve did not converge", res, it)
        x -= x.mean()
        return x, PoissonInfo(int(it), float(res))


def pressure_poisson_solve(div: np.ndarray, dt: float, grid: StaggeredGrid2D, tol: float = 1e-10,
                           maxiter: int | None = None, x0: np.ndarray | None = None) -> tuple[np.ndarray, PoissonInfo]:
    return PoissonOperator(grid, tol, maxiter).solve(div, dt, x0)


def divergence(u: np.ndarray, w: np.ndarray, grid: StaggeredGrid2D) -> np.ndarray:
    """Discrete divergence at interior cell centers."""
    g = GHOSTS
    nx, nz = grid.nx, grid.nz
    du = (u[g + 1:g + nx + 1, g:g + nz] - u[g:g + nx, g:g + nz]) / grid.mesh_x.spacing[:, None]
    dw = (w[g:g + nx, g + 1:g + nz + 1] - w[g:g + nx, g:g + nz]) / grid.mesh_z.spacing[None, :]
    return du + dw


def project(u: np.ndarray, w: np.ndarray, p: np.ndarray, dt: float, grid: StaggeredGrid2D) -> None:
    """Subtract ``dt * grad p`` from interior faces in place; wall faces are left alone."""
    g = GHOSTS
    nx, nz = grid.nx, grid.nz
    mx, mz = grid.mesh_x, grid.mesh_z
    dxc = np.diff(mx.centers_g)[g:g + nx]
    dzc = np.diff(mz.centers_g)[g:g + nz]
    # face i+1 lies between cells i and i+1
    gx = (p[1:, :] - p[:-1, :]) / dxc[:-1, None]
    u[g + 1:g + nx, g:g + nz] -= dt * gx
    if mx.periodic:
        u[g, g:g + nz] -= dt * (p[0, :] - p[-1, :]) / dxc[-1]
        u[g + nx, g:g + nz] = u[g, g:g + nz]
    gz = (p[:, 1:] - p[:, :-1]) / dzc[None, :-1]
    w[g:g + nx, g + 1:g + nz] -= dt * gz
    if mz.periodic:
        w[g:g + nx, g] -= dt * (p[:, 0] - p[:, -1]) / dzc[-1]
        w[g:g + nx, g + nz] = w[g:g + nx, g]


def kinetic_energy(u: np.ndarray, w: np.ndarray, grid: StaggeredGrid2D) -> float:
    """0.5 * sum of squared face velocities times their control volumes."""
    g = GHOSTS
    mx, mz = grid.mesh_x, grid.mesh_z
    nx, nz = grid.nx, grid.nz
    # face control volumes: half cells at walls, full spacing between centers inside
    vx = np.diff(mx.centers_g)[g - 1:g + nx]
    if not mx.periodic:
        vx = vx.copy()
        vx[0] = 0.5 * mx.spacing[0]
        vx[-1] = 0.5 * mx.spacing[-1]
    else:
        vx = vx.copy()
        vx[-1] = 0.0  # closing face duplicates face 0
    vz = np.diff(mz.centers_g)[g - 1:g + nz]
    vz = vz.copy()
    if not mz.periodic:
        vz[0] = 0.5 * mz.spacing[0]
        vz[-1] = 0.5 * mz.spacing[-1]
    else:
        vz[-1] = 0.0
    ui = u[g:g + nx + 1, g:g + nz]
    wi = w[g:g + nx, g:g + nz + 1]
    return 0.5 * float(np.sum(ui * ui * vx[:, None] * mz.spacing[None, :])
                       + np.sum(wi * wi * mx.spacing[:, None] * vz[None, :]))


# ---------------------------------------------------------------------------
# time stepping


@dataclass
class FlowDiagnostics:
    step: int
    time: float
    dt: float
    div_before: float
    div_after: float
    cg_iterations: int
    cg_residual: float
    kinetic_energy: float


class FlowSolver:
    """Owns the velocity and pressure state and advances it in time."""

    def __init__(self, grid: StaggeredGrid2D, bcs: BoundaryConditions, params: FlowParameters | None = None):
        check_velocity_boundaries(bcs)
        if bcs.periodic_x != grid.mesh_x.periodic or bcs.periodic_z != grid.mesh_z.periodic:
            raise ConfigurationError("periodic velocity sides must match periodic meshes")
        self.grid = grid
        self.bcs = bcs
        self.params = params or FlowParameters()
        self.operator = MomentumOperator(grid, self.params)
        self.poisson = PoissonOperator(grid, self.params.poisson_tol, self.params.poisson_maxiter)
        self.u = grid.zeros("xface")
        self.w = grid.zeros("zface")
        self.p = np.zeros((grid.nx, grid.nz))
        self.time = 0.0
        self.step_count = 0
        self._prev: tuple[np.ndarray, np.ndarray] | None = None
        self._dt_prev: float | None = None
        self._p_prev: np.ndarray | None = None
        self.history: list[FlowDiagnostics] = []

    def fill_ghosts(self) -> None:
        apply_velocity_boundaries(self.u, self.w, self.bcs)

    def set_velocity(self, u_interior: np.ndarray, w_interior: np.ndarray) -> None:
        self.u[self.grid.interior("xface")] = u_interior
        self.w[self.grid.interior("zface")] = w_interior
        self.fill_ghosts()

    def step(self, dt: float, t_w: np.ndarray | None = None) -> FlowDiagnostics:
        """Advance one AB2 step and project; ``t_w`` is T* at w-points."""
        self.fill_ghosts()
        a, c = self.operator.rhs(self.u, self.w, t_w)
        a_prev, c_prev = self._prev if self._prev is not None else (None, None)
        u_star = ab2_step(self.u, a, a_prev, dt, self._dt_prev)
        w_star = ab2_step(self.w, c, c_prev, dt, self._dt_prev)
        apply_velocity_boundaries(u_star, w_star, self.bcs)
        div_star = divergence(u_star, w_star, self.grid)
        guess = self.p
        if self._p_prev is not None:
            # pressure varies smoothly in time; extrapolate the initial guess
            guess = self.p + (dt / self._dt_prev) * (self.p - self._p_prev)
        p, info = self.poisson.solve(div_star, dt, x0=guess)
        project(u_star, w_star, p, dt, self.grid)
        apply_velocity_boundaries(u_star, w_star, self.bcs)
        self._p_prev = self.p
        self.u, self.w, self.p = u_star, w_star, p
        self._prev = (a, c)
        self._dt_prev = dt
        self.time += dt
        self.step_count += 1
        div_after = float(np.abs(divergence(self.u, self.w, self.grid)).max())
        if not (np.isfinite(div_after) and np.all(np.isfinite(self.u)) and np.all(np.isfinite(self.w))):
            bad = np.argwhere(~np.isfinite(self.u))
            cell = tuple(int(v) for v in bad[0]) if bad.size else None
            raise SimulationBlowUp(f"non-finite velocity at t={self.time:.6g}", cell=cell)
        diag = FlowDiagnostics(self.step_count, self.time, dt, float(np.abs(div_star).max()), div_after,
                               info.iterations, info.residual, kinetic_energy(self.u, self.w, self.grid))
        self.history.append(diag)
        return diag

    def write_log(self, path) -> None:
        fields = list(FlowDiagnostics.__dataclass_fields__)
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=fields)
            writer.writeheader()
            for row in self.history:
                writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in asdict(row).items()})


def center_to_face_table(mesh: Mesh1D) -> np.ndarray:
    """Weights mapping ghost-extended centers to faces (used to move T* onto w-points)."""
    return interpolation_table(mesh.centers_g, mesh.faces_g, -2)
