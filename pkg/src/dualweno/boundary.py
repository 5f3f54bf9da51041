"""Ghost-layer fills for Dirichlet, Neumann, periodic and free-slip sides.

Interior stencils are never modified near a boundary; instead the three
ghost layers are populated so the same stencil applies everywhere.  A
Dirichlet value on a cell-centered quantity is imposed on the boundary
face by odd reflection, a Neumann (zero-gradient) condition by even
reflection.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from dualweno.errors import ConfigurationError
from dualweno.mesh import GHOSTS, Field

SIDES = ("left", "right", "bottom", "top")
_SIDE_AXIS = {"left": (0, 0), "right": (0, 1), "bottom": (1, 0), "top": (1, 1)}


@dataclass(frozen=True)
class Periodic:
    def __str__(self):
        return "periodic"


@dataclass(frozen=True)
class Dirichlet:
    value: float = 0.0

    def __str__(self):
        return f"dirichlet({self.value:g})"


@dataclass(frozen=True)
class Neumann:
    def __str__(self):
        return "neumann"


@dataclass(frozen=True)
class FreeSlipVelocity:
    def __str__(self):
        return "free-slip"


BoundaryKind = Periodic | Dirichlet | Neumann | FreeSlipVelocity


def parse_kind(spec) -> BoundaryKind:
    """Build a kind from ``"periodic"``, ``"neumann"``, ``"free-slip"`` or ``{"dirichlet": Q}``."""
    if isinstance(spec, (Periodic, Dirichlet, Neumann, FreeSlipVelocity)):
        return spec
    if isinstance(spec, dict) and set(spec) == {"dirichlet"}:
        return Dirichlet(float(spec["dirichlet"]))
    if isinstance(spec, str):
        name = spec.strip().lower()
        if name == "periodic":
            return Periodic()
        if name in ("neumann", "zero-flux", "adiabatic"):
            return Neumann()
        if name in ("free-slip", "freeslip"):
            return FreeSlipVelocity()
        if name.startswith("dirichlet(") and name.endswith(")"):
            return Dirichlet(float(name[len("dirichlet("):-1]))
    raise ConfigurationError(f"unknown boundary kind {spec!r}")


def kind_to_json(kind: BoundaryKind):
    if isinstance(kind, Dirichlet):
        return {"dirichlet": kind.value}
    return str(kind)


@dataclass(frozen=True)
class BoundaryConditions:
    """One boundary kind per side of the domain for a single field."""

    left: BoundaryKind
    right: BoundaryKind
    bottom: BoundaryKind
    top: BoundaryKind

    def __post_init__(self):
        for a, b in (("left", "right"), ("bottom", "top")):
            pa = isinstance(getattr(self, a), Periodic)
            pb = isinstance(getattr(self, b), Periodic)
            if pa != pb:
                raise ConfigurationError(f"periodic boundaries must be paired ({a}/{b})")

    @classmethod
    def from_dict(cls, spec: dict) -> BoundaryConditions:
        unknown = set(spec) - set(SIDES)
        if unknown:
            raise ConfigurationError(f"unknown boundary sides {sorted(unknown)}")
        missing = set(SIDES) - set(spec)
        if missing:
            raise ConfigurationError(f"missing boundary sides {sorted(missing)}")
        return cls(**{side: parse_kind(spec[side]) for side in SIDES})

    def to_dict(self) -> dict:
        return {side: kind_to_json(getattr(self, side)) for side in SIDES}

    def side(self, name: str) -> BoundaryKind:
        return getattr(self, name)

    @property
    def periodic_x(self) -> bool:
        return isinstance(self.left, Periodic)

    @property
    def periodic_z(self) -> bool:
        return isinstance(self.bottom, Periodic)


def fill_axis(data: np.ndarray, axis: int, side: str, kind: BoundaryKind, face_located: bool) -> None:
    """Fill the three ghost layers of one side of ``data`` in place.

    ``face_located`` tells whether the quantity lives on faces along
    ``axis``; the boundary then coincides with a stored point, otherwise
    it lies halfway between the last interior center and the first ghost.
    """
    if isinstance(kind, FreeSlipVelocity):
        raise ConfigurationError("free-slip applies to velocity pairs; use fill_velocity_ghosts_freeslip")
    g = GHOSTS
    a = np.moveaxis(data, axis, 0)
    size = a.shape[0]
    n = size - 2 * g - (1 if face_located else 0)  # number of cells
    upper = side in ("right", "top")

    if isinstance(kind, Periodic):
        if not upper:
            for i in range(1, g + 1):
                a[g - i] = a[g + n - i]
        else:
            # the closing face n is rewritten as the image of face 0
            for i in range(0, g + (1 if face_located else 0)):
                a[g + n + i] = a[g + i]
        return

    if face_located:
        b = g + n if upper else g  # index of the boundary face
        step = 1 if upper else -1
        if isinstance(kind, Dirichlet):
            q = kind.value
            a[b] = q
            for i in range(1, g + 1):
                a[b + step * i] = 2.0 * q - a[b - step * i]
        elif isinstance(kind, Neumann):
            for i in range(1, g + 1):
                a[b + step * i] = a[b - step * i]
        else:
            raise ConfigurationError(f"unsupported boundary kind {kind!r}")
        return

    if upper:
        # ghost cell n-1+i mirrors interior cell n-i
        ghost = [g + n - 1 + i for i in range(1, g + 1)]
        inner = [g + n - i for i in range(1, g + 1)]
    else:
        ghost = [g - i for i in range(1, g + 1)]
        inner = [g + i - 1 for i in range(1, g + 1)]
    if isinstance(kind, Dirichlet):
        q = kind.value
        for gi, ii in zip(ghost, inner):
            a[gi] = 2.0 * q - a[ii]
    elif isinstance(kind, Neumann):
        for gi, ii in zip(ghost, inner):
            a[gi] = a[ii]
    else:
        raise ConfigurationError(f"unsupported boundary kind {kind!r}")


def _face_located(location: str, axis: int) -> bool:
    return (location == "xface" and axis == 0) or (location == "zface" and axis == 1)


def fill_scalar_ghosts(field: Field, side: str, kind: BoundaryKind) -> Field:
    """Populate the ghost layers of ``field`` on one side; the interior is untouched."""
    if side not in _SIDE_AXIS:
        raise ConfigurationError(f"unknown side {side!r}")
    axis, _ = _SIDE_AXIS[side]
    fill_axis(field.data, axis, side, kind, _face_located(field.location, axis))
    return field


def apply_boundaries(data: np.ndarray, location: str, bcs: BoundaryConditions) -> np.ndarray:
    """Fill all ghosts of a scalar-like array: x sides first, then z sides."""
    for side in SIDES:
        axis, _ = _SIDE_AXIS[side]
        fill_axis(data, axis, side, bcs.side(side), _face_located(location, axis))
    return data


def velocity_component_kind(kind: BoundaryKind, component: str, side: str) -> BoundaryKind:
    """Translate a velocity side condition into the kind used for one component."""
    if isinstance(kind, Periodic):
        return kind
    if not isinstance(kind, FreeSlipVelocity):
        raise ConfigurationError(f"velocity sides must be periodic or free-slip, got {kind}")
    axis, _ = _SIDE_AXIS[side]
    normal = (component == "u" and axis == 0) or (component == "w" and axis == 1)
    return Dirichlet(0.0) if normal else Neumann()


def fill_velocity_ghosts_freeslip(u: Field, w: Field, side: str) -> tuple[Field, Field]:
    """Free-slip wall: even reflection of the tangential, odd of the normal component."""
    if side not in _SIDE_AXIS:
        raise ConfigurationError(f"unknown side {side!r}")
    axis, _ = _SIDE_AXIS[side]
    mesh = u.grid.mesh_x if axis == 0 else u.grid.mesh_z
    if mesh.periodic:
        raise ConfigurationError(f"cannot apply free-slip on periodic side {side!r}")
    for f, comp in ((u, "u"), (w, "w")):
        kind = velocity_component_kind(FreeSlipVelocity(), comp, side)
        fill_axis(f.data, axis, side, kind, _face_located(f.location, axis))
    return u, w


def apply_velocity_boundaries(u: np.ndarray, w: np.ndarray, bcs: BoundaryConditions) -> None:
    """Fill ghosts of both velocity components, x sides first."""
    for side in SIDES:
        kind = bcs.side(side)
        axis, _ = _SIDE_AXIS[side]
        if isinstance(kind, Periodic):
            fill_axis(u, axis, side, kind, _face_located("xface", axis))
            fill_axis(w, axis, side, kind, _face_located("zface", axis))
            continue
        if not isinstance(kind, FreeSlipVelocity):
            raise ConfigurationError(f"velocity sides must be periodic or free-slip, got {kind}")
        fill_axis(u, axis, side, velocity_component_kind(kind, "u", side), _face_located("xface", axis))
        fill_axis(w, axis, side, velocity_component_kind(kind, "w", side), _face_located("zface", axis))


def check_velocity_boundaries(bcs: BoundaryConditions) -> None:
    for side in SIDES:
        kind = bcs.side(side)
        if not isinstance(kind, (Periodic, FreeSlipVelocity)):
            raise ConfigurationError(f"velocity boundary on {side} must be periodic or free-slip, got {kind}")
