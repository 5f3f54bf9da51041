"""Fourth-order second derivatives on uniform and stretched meshes.

Uniform meshes use the classic five-point central formula.  On stretched
meshes the same five-point formula is applied with the local cell width
``h`` to values at the virtual points ``x_i + m h`` (``m = -2..2``), which
are Lagrange-interpolated from the seven nearest mesh points.  The result
keeps the fourth-order truncation error of the five-point formula.  Both
forms are stored as seven-wide coefficient tables (the uniform pattern
padded with zeros) so a single kernel applies either.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from dualweno.errors import NumericalDegeneracyError
from dualweno.mesh import GHOSTS, Mesh1D, lagrange_weights

UNIFORM_PATTERN = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0


def uniform_second_derivative(values, h: float) -> float:
    """(-f[i+2] + 16 f[i+1] - 30 f[i] + 16 f[i-1] - f[i-2]) / (12 h^2)."""
    fm2, fm1, f0, fp1, fp2 = (float(v) for v in values)
    return (-fp2 + 16.0 * fp1 - 30.0 * f0 + 16.0 * fm1 - fm2) / (12.0 * h * h)


def fornberg_weights(nodes, x0: float, order: int) -> np.ndarray:
    """Finite-difference weights of derivatives 0..order at ``x0``.

    Returns an array of shape (order + 1, len(nodes)).
    """
    nodes = np.asarray(nodes, dtype=float)
    n = nodes.size
    c = np.zeros((order + 1, n))
    c1 = 1.0
    c4 = nodes[0] - x0
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, order)
        c2 = 1.0
        c5 = c4
        c4 = nodes[i] - x0
        for j in range(i):
            c3 = nodes[i] - nodes[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[k, i] = c1 * (k * c[k - 1, i - 1] - c5 * c[k, i - 1]) / c2
                c[0, i] = -c1 * c5 * c[0, i - 1] / c2
            for k in range(mn, 0, -1):
                c[k, j] = (c4 * c[k, j] - k * c[k - 1, j]) / c3
            c[0, j] = c4 * c[0, j] / c3
        c1 = c2
    return c


def _check_points(points) -> np.ndarray:
    points = np.asarray(points, dtype=float)
    if points.size != 7:
        raise ValueError(f"need seven points, got {points.size}")
    if not np.all(np.diff(points) > 0):
        raise NumericalDegeneracyError("stencil points must be strictly increasing")
    return points


def lagrange_second_derivative(points, x_eval: float) -> np.ndarray:
    """Weights of the second derivative of the degree-6 interpolant at ``x_eval``."""
    return fornberg_weights(_check_points(points), x_eval, 2)[2]


def nonuniform_stencil(points, x_eval: float, h: float) -> np.ndarray:
    """Seven weights of the five-point formula on interpolated virtual points.

    ``h`` is the local cell width.  Exact for polynomials up to degree 5;
    on a uniform mesh with ``h`` equal to the spacing it reduces to the
    padded five-point pattern.
    """
    points = _check_points(points)
    if not h > 0:
        raise NumericalDegeneracyError(f"cell width must be positive, got {h}")
    coef = np.zeros(7)
    for m, e in zip(range(-2, 3), UNIFORM_PATTERN):
        coef += e / (h * h) * lagrange_weights(points, x_eval + m * h)
    return coef


@dataclass(frozen=True)
class DiffusionStencil:
    """Seven coefficients per ghost-extended point along one axis.

    Row ``I`` multiplies values at ``I - 3 .. I + 3``; rows outside the
    interior are zero.
    """

    coef: np.ndarray
    location: str

    @property
    def width(self) -> int:
        return self.coef.shape[1]


def build_stencil(mesh: Mesh1D, location: str = "center") -> DiffusionStencil:
    """Coefficient table for all interior points of ``location`` on ``mesh``."""
    xs = mesh.coords(location)
    npts = mesh.n + (1 if location == "face" else 0)
    # width of the control volume around each point
    if location == "face":
        widths = np.diff(mesh.centers_g, prepend=np.nan)
    else:
        widths = mesh.spacing_g
    coef = np.zeros((xs.size, 7))
    for I in range(GHOSTS, GHOSTS + npts):
        h = widths[I]
        if mesh.uniform:
            coef[I, 1:6] = UNIFORM_PATTERN / (h * h)
        else:
            coef[I] = nonuniform_stencil(xs[I - 3:I + 4], xs[I], h)
    coef.setflags(write=False)
    return DiffusionStencil(coef, location)


@numba.njit(cache=True, error_model="numpy")
def add_diffusion_x(phi, coef, d, out, j0, j1):
    g = 3
    for I in range(g, phi.shape[0] - g):
        for j in range(j0, j1):
            s = 0.0
            for m in range(7):
                s += coef[I, m] * phi[I - 3 + m, j]
            out[I, j] += d * s


@numba.njit(cache=True, error_model="numpy")
def add_diffusion_z(phi, coef, d, out, i0, i1):
    g = 3
    for i in range(i0, i1):
        for K in range(g, phi.shape[1] - g):
            s = 0.0
            for m in range(7):
                s += coef[K, m] * phi[i, K - 3 + m]
            out[i, K] += d * s


def diffusive_term(data: np.ndarray, stencil_x: DiffusionStencil, stencil_z: DiffusionStencil,
                   d: float, out: np.ndarray | None = None) -> np.ndarray:
    """D * (d2/dx2 + d2/dz2) of a ghost-filled array; ghost entries of the result are zero."""
    if out is None:
        out = np.zeros_like(data)
    g = GHOSTS
    add_diffusion_x(data, stencil_x.coef, d, out, g, data.shape[1] - g)
    add_diffusion_z(data, stencil_z.coef, d, out, g, data.shape[0] - g)
    return out
