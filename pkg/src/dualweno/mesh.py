"""Stretched 1D meshes, staggered 2D grids and dual-mesh refinement.

Index convention used throughout the package: every array carries
``GHOSTS`` layers on each side, so interior cell ``i`` lives at array index
``i + GHOSTS``.  Face ``f`` (``f = 0..n``) sits between cells ``f - 1`` and
``f``; face-located arrays therefore have ``n + 1 + 2 * GHOSTS`` entries
along that axis.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from dualweno.errors import ConfigurationError, NumericalDegeneracyError

GHOSTS = 3
MIN_CELLS = 4
SUPPORTED_REFINEMENT = (1, 2, 3, 4, 5)

LOCATIONS = ("center", "xface", "zface")


@dataclass(frozen=True)
class StretchSpec:
    """Parameters of the tanh stretching.

    ``n`` is the total number of cells between ``x_start`` and ``x_end``.
    With ``mirrored`` the stretching is applied on the first half of the
    interval and reflected about the midpoint, so ``n`` must be even.
    Cells are finest towards ``x_end`` (or towards the midpoint when
    mirrored).

    ``layout`` says what the tanh law places: ``"faces"`` (cell centers at
    face midpoints) or ``"nodes"`` (the points carrying the solution, with
    faces halfway between neighbouring nodes).  Node placement needs a
    periodic mesh, where the first node sits on ``x_start``.
    """

    delta: float
    n: int
    x_start: float = 0.0
    x_end: float = 1.0
    mirrored: bool = False
    periodic: bool = False
    layout: str = "faces"

    def __post_init__(self):
        if not np.isfinite(self.delta) or self.delta < 0:
            raise ConfigurationError(f"stretching parameter must be >= 0, got {self.delta}")
        if self.n < MIN_CELLS:
            raise ConfigurationError(f"need at least {MIN_CELLS} cells, got {self.n}")
        if not self.x_start < self.x_end:
            raise ConfigurationError(f"x_start ({self.x_start}) must be < x_end ({self.x_end})")
        if self.mirrored and self.n % 2:
            raise ConfigurationError(f"mirrored mesh needs an even cell count, got {self.n}")
        if self.layout not in ("faces", "nodes"):
            raise ConfigurationError(f"layout must be 'faces' or 'nodes', got {self.layout!r}")
        if self.layout == "nodes" and not self.periodic:
            raise ConfigurationError("node layout is only defined for periodic meshes")


def stretch_fraction(delta: float, i, n: int):
    """Fraction tanh(delta/2 * i/n) / tanh(delta/2); linear for delta == 0."""
    i = np.asarray(i, dtype=float)
    if delta == 0.0:
        return i / n
    return np.tanh(0.5 * delta * i / n) / np.tanh(0.5 * delta)


class Mesh1D:
    """Face and center coordinates of a 1D mesh, extended by ghost layers.

    Ghost faces are the periodic images of interior faces on periodic
    meshes and mirror images about the end faces otherwise (the spacing is
    reflected), which matches the odd/even ghost-value fills.  Centers are
    face midpoints unless given explicitly; ghost centers follow the same
    periodic or mirror rule as the faces.
    """

    def __init__(self, faces, periodic: bool = False, uniform: bool = False, centers=None):
        faces = np.array(faces, dtype=float)
        if faces.ndim != 1 or faces.size < MIN_CELLS + 1:
            raise ConfigurationError(f"need at least {MIN_CELLS} cells, got {faces.size - 1}")
        if not np.all(np.diff(faces) > 0):
            raise ConfigurationError("mesh faces must be strictly increasing")

        self.n = faces.size - 1
        self.periodic = bool(periodic)
        self.uniform = bool(uniform)
        self.faces = faces
        self.length = faces[-1] - faces[0]

        g = GHOSTS
        if self.periodic:
            left = faces[self.n - g:self.n] - self.length
            right = faces[1:g + 1] + self.length
        else:
            left = 2.0 * faces[0] - faces[g:0:-1]
            right = 2.0 * faces[-1] - faces[-2:-g - 2:-1]
        self.faces_g = np.concatenate([left, faces, right])
        if not np.all(np.diff(self.faces_g) > 0):
            raise NumericalDegeneracyError("ghost-extended faces are not strictly increasing")
        if centers is None:
            self.centers_g = 0.5 * (self.faces_g[1:] + self.faces_g[:-1])
        else:
            c = np.array(centers, dtype=float)
            if c.shape != (self.n,) or not (np.all(c > faces[:-1]) and np.all(c < faces[1:])):
                raise ConfigurationError("each center must lie strictly inside its cell")
            if self.periodic:
                left_c, right_c = c[self.n - g:] - self.length, c[:g] + self.length
            else:
                left_c, right_c = 2.0 * faces[0] - c[g - 1::-1], 2.0 * faces[-1] - c[:-g - 1:-1]
            self.centers_g = np.concatenate([left_c, c, right_c])
        self.spacing_g = np.diff(self.faces_g)

        for arr in (self.faces, self.faces_g, self.centers_g, self.spacing_g):
            arr.setflags(write=False)

    def __repr__(self):
        kind = "periodic" if self.periodic else "bounded"
        return f"Mesh1D(n={self.n}, [{self.faces[0]:g}, {self.faces[-1]:g}], {kind}, uniform={self.uniform})"

    @property
    def centers(self) -> np.ndarray:
        return self.centers_g[GHOSTS:GHOSTS + self.n]

    @property
    def spacing(self) -> np.ndarray:
        return self.spacing_g[GHOSTS:GHOSTS + self.n]

    def coords(self, location: str) -> np.ndarray:
        """Ghost-extended coordinates of ``"center"`` or ``"face"`` points."""
        if location == "center":
            return self.centers_g
        if location == "face":
            return self.faces_g
        raise ValueError(f"unknown location {location!r}")

    def points(self, location: str) -> np.ndarray:
        """Distinct interior points; the closing face is dropped when periodic."""
        if location == "center":
            return self.centers
        if location == "face":
            return self.faces[:-1] if self.periodic else self.faces
        raise ValueError(f"unknown location {location!r}")

    def refine(self, factor: int) -> Mesh1D:
        """Split every cell into ``factor`` equal subcells."""
        frac = np.arange(factor) / factor
        inner = (self.faces[:-1, None] + frac[None, :] * np.diff(self.faces)[:, None]).ravel()
        faces = np.append(inner, self.faces[-1])
        faces[::factor] = self.faces
        return Mesh1D(faces, periodic=self.periodic, uniform=self.uniform)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["index", "face", "center", "spacing"])
            for i in range(self.n):
                writer.writerow([i, repr(self.faces[i]), repr(self.centers[i]), repr(self.spacing[i])])
            writer.writerow([self.n, repr(self.faces[-1]), "", ""])


def build_stretched_mesh(spec: StretchSpec) -> Mesh1D:
    """Mesh whose faces (or nodes) follow the tanh law, optionally mirrored about the midpoint."""
    if spec.layout == "nodes":
        points = build_stretched_mesh(replace(spec, layout="faces", periodic=False)).faces
        nodes = points[:-1]
        length = spec.x_end - spec.x_start
        ext = np.concatenate([nodes[-1:] - length, nodes, nodes[:1] + length])
        return Mesh1D(0.5 * (ext[1:] + ext[:-1]), periodic=True, uniform=spec.delta == 0.0, centers=nodes)
    if spec.mirrored:
        half = spec.n // 2
        mid = 0.5 * (spec.x_start + spec.x_end)
        first = spec.x_start + (mid - spec.x_start) * stretch_fraction(spec.delta, np.arange(half + 1), half)
        first[-1] = mid
        faces = np.concatenate([first, (2.0 * mid - first[-2::-1])])
        faces[-1] = spec.x_end
    else:
        faces = spec.x_start + (spec.x_end - spec.x_start) * stretch_fraction(
            spec.delta, np.arange(spec.n + 1), spec.n)
        faces[-1] = spec.x_end
    faces[0] = spec.x_start
    if not np.all(np.diff(faces) > 0):
        raise NumericalDegeneracyError(f"stretched mesh is not monotone for {spec}")
    return Mesh1D(faces, periodic=spec.periodic, uniform=spec.delta == 0.0)


def build_uniform_mesh(n: int, x_start: float, x_end: float, periodic: bool = False) -> Mesh1D:
    if n < MIN_CELLS:
        raise ConfigurationError(f"need at least {MIN_CELLS} cells, got {n}")
    if not x_start < x_end:
        raise ConfigurationError(f"x_start ({x_start}) must be < x_end ({x_end})")
    faces = x_start + (x_end - x_start) * np.arange(n + 1) / n
    faces[-1] = x_end
    return Mesh1D(faces, periodic=periodic, uniform=True)


class StaggeredGrid2D:
    """Tensor product of two meshes with C-grid staggering.

    Scalars and pressure sit at cell centers, ``u`` on x-faces and ``w`` on
    z-faces.
    """

    def __init__(self, mesh_x: Mesh1D, mesh_z: Mesh1D):
        self.mesh_x = mesh_x
        self.mesh_z = mesh_z
        self.nx = mesh_x.n
        self.nz = mesh_z.n

    def __repr__(self):
        return f"StaggeredGrid2D({self.mesh_x!r}, {self.mesh_z!r})"

    def interior_shape(self, location: str) -> tuple[int, int]:
        if location == "center":
            return self.nx, self.nz
        if location == "xface":
            return self.nx + 1, self.nz
        if location == "zface":
            return self.nx, self.nz + 1
        raise ValueError(f"unknown location {location!r}")

    def shape(self, location: str) -> tuple[int, int]:
        nx, nz = self.interior_shape(location)
        return nx + 2 * GHOSTS, nz + 2 * GHOSTS

    def interior(self, location: str) -> tuple[slice, slice]:
        nx, nz = self.interior_shape(location)
        return slice(GHOSTS, GHOSTS + nx), slice(GHOSTS, GHOSTS + nz)

    def axis_locations(self, location: str) -> tuple[str, str]:
        """1D location (``"center"``/``"face"``) along x and along z."""
        return {
            "center": ("center", "center"),
            "xface": ("face", "center"),
            "zface": ("center", "face"),
        }[location]

    def coords(self, location: str) -> tuple[np.ndarray, np.ndarray]:
        lx, lz = self.axis_locations(location)
        return self.mesh_x.coords(lx), self.mesh_z.coords(lz)

    def zeros(self, location: str) -> np.ndarray:
        return np.zeros(self.shape(location))

    def cell_areas(self) -> np.ndarray:
        return np.outer(self.mesh_x.spacing, self.mesh_z.spacing)

    def field(self, name: str, location: str, data: np.ndarray | None = None) -> Field:
        if data is None:
            data = self.zeros(location)
        elif data.shape != self.shape(location):
            raise ConfigurationError(f"{name}: expected shape {self.shape(location)}, got {data.shape}")
        return Field(name, location, self, data)


@dataclass
class Field:
    """A named ghost-extended array bound to one staggering location."""

    name: str
    location: str
    grid: StaggeredGrid2D
    data: np.ndarray = field(repr=False)

    @property
    def interior(self) -> np.ndarray:
        return self.data[self.grid.interior(self.location)]

    def copy(self) -> Field:
        return Field(self.name, self.location, self.grid, self.data.copy())


def lagrange_weights(nodes: np.ndarray, x: float) -> np.ndarray:
    """Lagrange basis values of ``nodes`` at ``x``.

    A target that coincides with a node (to 1e-12 of the local spacing)
    gets the exact unit vector, so coincident points are copied bitwise.
    """
    nodes = np.asarray(nodes, dtype=float)
    scale = np.ptp(nodes)
    if scale == 0.0 or np.min(np.diff(np.sort(nodes))) == 0.0:
        raise NumericalDegeneracyError("coincident interpolation nodes")
    hit = np.flatnonzero(np.abs(nodes - x) <= 1e-12 * scale)
    weights = np.zeros(nodes.size)
    if hit.size:
        weights[hit[0]] = 1.0
        return weights
    for j in range(nodes.size):
        others = np.delete(nodes, j)
        weights[j] = np.prod((x - others) / (nodes[j] - others))
    return weights


def interpolation_stencil(src: np.ndarray, dst: np.ndarray, periodic: bool, period: float = 0.0,
                          width: int = 4) -> tuple[np.ndarray, np.ndarray]:
    """Indices into ``src`` and Lagrange weights for each ``dst`` point.

    The nearest ``width`` points are used, centered on the target.  On
    bounded axes the stencil is shifted inward instead of reaching past the
    first or last source point; on periodic axes it wraps.
    """
    src = np.asarray(src, dtype=float)
    dst = np.asarray(dst, dtype=float)
    n = src.size
    if n < width:
        raise ConfigurationError(f"need at least {width} source points, got {n}")
    half = width // 2
    idx = np.empty((dst.size, width), dtype=np.int64)
    wts = np.empty((dst.size, width))
    if periodic:
        ext = np.concatenate([src[n - width:] - period, src, src[:width] + period])
    for m, x in enumerate(dst):
        if periodic:
            j = np.searchsorted(ext, x, side="right") - 1
            j0 = j - half + 1
            local = np.arange(j0, j0 + width)
            idx[m] = (local - width) % n
            wts[m] = lagrange_weights(ext[local], x)
        else:
            j = np.searchsorted(src, x, side="right") - 1
            j0 = min(max(j - half + 1, 0), n - width)
            local = np.arange(j0, j0 + width)
            idx[m] = local
            wts[m] = lagrange_weights(src[local], x)
    return idx, wts


@dataclass(frozen=True)
class AxisStencil:
    """Source indices and weights mapping base points to fine points on one axis."""

    index: np.ndarray
    weight: np.ndarray

    def apply(self, values: np.ndarray, axis: int) -> np.ndarray:
        """Interpolate ``values`` (interior points only) along ``axis``."""
        moved = np.moveaxis(values, axis, 0)
        out = np.zeros((self.index.shape[0],) + moved.shape[1:])
        for k in range(self.index.shape[1]):
            w = self.weight[:, k].reshape((-1,) + (1,) * (moved.ndim - 1))
            out += w * moved[self.index[:, k]]
        return np.moveaxis(out, 0, axis)


class DualMesh:
    """Base grid plus a subgrid refined ``R`` times in both directions.

    ``stencils[component] = (x_stencil, z_stencil)`` maps base velocity
    points to fine velocity points by tensor-product 4-point Lagrange
    interpolation, for ``component`` in ``("u", "w")``.
    """

    def __init__(self, base: StaggeredGrid2D, refine_factor: int):
        if refine_factor not in SUPPORTED_REFINEMENT:
            raise ConfigurationError(
                f"refinement factor must be one of {SUPPORTED_REFINEMENT}, got {refine_factor}")
        self.base = base
        self.refine_factor = int(refine_factor)
        if self.refine_factor == 1:
            self.fine = base
        else:
            self.fine = StaggeredGrid2D(base.mesh_x.refine(refine_factor), base.mesh_z.refine(refine_factor))
        self.stencils = {
            "u": (self._axis_stencil(base.mesh_x, self.fine.mesh_x, "face"),
                  self._axis_stencil(base.mesh_z, self.fine.mesh_z, "center")),
            "w": (self._axis_stencil(base.mesh_x, self.fine.mesh_x, "center"),
                  self._axis_stencil(base.mesh_z, self.fine.mesh_z, "face")),
        }

    def __repr__(self):
        return f"DualMesh(R={self.refine_factor}, base={self.base.nx}x{self.base.nz}, fine={self.fine.nx}x{self.fine.nz})"

    @staticmethod
    def _axis_stencil(base: Mesh1D, fine: Mesh1D, location: str) -> AxisStencil:
        src = base.points(location)
        dst = fine.points(location)
        if fine is base:
            index = np.arange(src.size)[:, None] * np.ones(4, dtype=np.int64)
            weight = np.zeros((src.size, 4))
            weight[:, 0] = 1.0
            return AxisStencil(index, weight)
        index, weight = interpolation_stencil(src, dst, base.periodic, base.length)
        return AxisStencil(index, weight)

    def interpolate(self, component: str, base_values: np.ndarray) -> np.ndarray:
        """Interpolate interior base velocity points to interior fine velocity points."""
        sx, sz = self.stencils[component]
        return sz.apply(sx.apply(base_values, 0), 1)


def refine_dual(base: StaggeredGrid2D, refine_factor: int) -> DualMesh:
    return DualMesh(base, refine_factor)


def dump_mesh_csv(mesh: Mesh1D, path) -> Path:
    path = Path(path)
    mesh.to_csv(path)
    return path
