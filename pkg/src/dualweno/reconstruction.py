"""WENO5 face reconstruction and the conservative convective operator.

Two nonlinear weightings are provided, the original Liu-Osher-Chan one
(``weno5-loc``) and the Jiang-Shu one (``weno5-js``), plus the linear
fifth-order upstream-central limit obtained by zeroing every smoothness
indicator (``central5``).  Candidate polynomials are the modified quadratic
Lagrange interpolants built from physical center coordinates, so the same
code path serves uniform and stretched meshes.

The scalar functions below are straightforward references; the sweep
kernels at the bottom are what the solvers call.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from dualweno.errors import ConfigurationError, NumericalDegeneracyError
from dualweno.mesh import GHOSTS, Mesh1D

# Denominator of the curvature correction in the modified Lagrange
# polynomial.  24 turns point values into the primitive-function flux that
# makes the flux difference fifth-order on uniform meshes.
CORRECTION_DENOMINATOR = 24.0

LOC, JS, CENTRAL = 0, 1, 2
PLUS, MINUS = 0, 1

# linear weights per side for stencils (i-2..i), (i-1..i+1), (i..i+2)
LOC_COEFFS = {PLUS: (1.0 / 12.0, 1.0 / 2.0, 1.0 / 4.0), MINUS: (1.0 / 4.0, 1.0 / 2.0, 1.0 / 12.0)}
JS_COEFFS = {PLUS: (0.1, 0.6, 0.3), MINUS: (0.3, 0.6, 0.1)}
LOC_POWER = 3

_NAMES = {"weno5-loc": LOC, "weno5-js": JS, "weno5-js2": JS, "weno5-js3": JS, "central5": CENTRAL}


@dataclass(frozen=True)
class SchemeVariant:
    """Which weighting to use and its parameters.

    ``power`` only matters for Jiang-Shu; Liu-Osher-Chan always cubes.
    """

    kind: int
    epsilon: float = 1e-6
    power: int = 3

    def __post_init__(self):
        if self.kind not in (LOC, JS, CENTRAL):
            raise ConfigurationError(f"unknown scheme kind {self.kind}")
        if self.kind != CENTRAL and not self.epsilon > 0:
            raise ConfigurationError(f"epsilon must be > 0, got {self.epsilon}")
        if self.kind == JS and self.power not in (2, 3):
            raise ConfigurationError(f"Jiang-Shu power must be 2 or 3, got {self.power}")

    @classmethod
    def from_name(cls, name: str, epsilon: float = 1e-6, power: int | None = None) -> SchemeVariant:
        key = name.strip().lower()
        if key not in _NAMES:
            raise ConfigurationError(f"unknown scheme {name!r}; expected one of {sorted(_NAMES)}")
        kind = _NAMES[key]
        if power is None:
            power = 2 if key == "weno5-js2" else 3
        return cls(kind, float(epsilon), int(power))

    @property
    def name(self) -> str:
        if self.kind == LOC:
            return "weno5-loc"
        if self.kind == CENTRAL:
            return "central5"
        return f"weno5-js{self.power}"


# ---------------------------------------------------------------------------
# reference scalar operations


def lagrange_p_coefficients(coords, x: float) -> np.ndarray:
    """Weights of (phi_{i-1}, phi_i, phi_{i+1}) in the modified polynomial P_i(x)."""
    xm, x0, xp = (float(c) for c in coords)
    if xm == x0 or x0 == xp or xm == xp:
        raise NumericalDegeneracyError(f"coincident stencil coordinates {coords}")
    lm = (x - x0) * (x - xp) / ((xm - x0) * (xm - xp))
    l0 = (x - xm) * (x - xp) / ((x0 - xm) * (x0 - xp))
    lp = (x - xm) * (x - x0) / ((xp - xm) * (xp - x0))
    den = CORRECTION_DENOMINATOR * (xp - x0)
    return np.array([lm - (xp - x0) / den, l0 + (xp - xm) / den, lp - (x0 - xm) / den])


def lagrange_p(values, coords, x: float) -> float:
    """Quadratic Lagrange interpolant through three points minus the curvature correction."""
    return float(np.dot(lagrange_p_coefficients(coords, x), np.asarray(values, dtype=float)))


def smoothness_loc(phi_m2: float, phi_m1: float, phi_0: float) -> float:
    return 0.5 * ((phi_m1 - phi_m2) ** 2 + (phi_0 - phi_m1) ** 2) + (phi_0 - 2.0 * phi_m1 + phi_m2) ** 2


def smoothness_js(values) -> tuple[float, float, float]:
    fm2, fm1, f0, fp1, fp2 = (float(v) for v in values)
    is0 = 13.0 / 12.0 * (fm2 - 2.0 * fm1 + f0) ** 2 + 0.25 * (fm2 - 4.0 * fm1 + 3.0 * f0) ** 2
    is1 = 13.0 / 12.0 * (fm1 - 2.0 * f0 + fp1) ** 2 + 0.25 * (fm1 - fp1) ** 2
    is2 = 13.0 / 12.0 * (f0 - 2.0 * fp1 + fp2) ** 2 + 0.25 * (3.0 * f0 - 4.0 * fp1 + fp2) ** 2
    return is0, is1, is2


def indicators(variant: SchemeVariant, values) -> tuple[float, float, float]:
    """Smoothness indicators of the three sub-stencils of a five-point stencil."""
    v = [float(a) for a in values]
    if variant.kind == JS:
        return smoothness_js(v)
    if variant.kind == LOC:
        return smoothness_loc(*v[0:3]), smoothness_loc(*v[1:4]), smoothness_loc(*v[2:5])
    return 0.0, 0.0, 0.0


def weights(variant: SchemeVariant, indicator_values, side: int) -> tuple[np.ndarray, np.ndarray]:
    """Raw weights ``a_k`` and normalized weights ``a_k / sum(a)``.

    For ``central5`` the raw weights are the linear coefficients themselves
    (the zero-indicator limit up to a common factor).
    """
    ind = np.asarray(indicator_values, dtype=float)
    if variant.kind == LOC:
        raw = np.array(LOC_COEFFS[side]) / (variant.epsilon + ind) ** LOC_POWER
    elif variant.kind == JS:
        raw = np.array(JS_COEFFS[side]) / (variant.epsilon + ind) ** variant.power
    else:
        raw = np.array(JS_COEFFS[side])
    return raw, raw / raw.sum()


def reconstruct_face(variant: SchemeVariant, values, coords, face_x: float, side: int) -> float:
    """R^+ (``side=PLUS``, right face) or R^- (left face) of the middle cell."""
    values = np.asarray(values, dtype=float)
    coords = np.asarray(coords, dtype=float)
    if not np.all(np.diff(coords) > 0):
        raise NumericalDegeneracyError("stencil coordinates must be strictly increasing")
    polys = [lagrange_p(values[s:s + 3], coords[s:s + 3], face_x) for s in range(3)]
    _, w = weights(variant, indicators(variant, values), side)
    return float(np.dot(w, polys))


def face_flux(u_face: float, r_plus_left: float, r_minus_right: float) -> float:
    """Upwinded flux through a face; zero velocity takes the left state."""
    return u_face * (r_plus_left if u_face >= 0.0 else r_minus_right)


def convective_term(u_left: float, u_right: float, r_plus_im1: float, r_plus_i: float,
                    r_minus_i: float, r_minus_ip1: float, dx: float) -> float:
    """-(F_{i+1/2} - F_{i-1/2}) / dx_i with the four upwind cases."""
    f_right = face_flux(u_right, r_plus_i, r_minus_ip1)
    f_left = face_flux(u_left, r_plus_im1, r_minus_i)
    return -(f_right - f_left) / dx


def face_coefficients(mesh: Mesh1D) -> tuple[np.ndarray, np.ndarray]:
    """Polynomial weights for R^+ and R^- of every cell that needs them.

    ``cp[I, s, m]`` multiplies ``phi[I - 2 + s + m]`` in sub-stencil ``s``
    evaluated at the right face of ghost-extended cell ``I``; ``cm`` does
    the same at the left face.  Entries are filled for cells -1..n.
    """
    xc = mesh.centers_g
    xf = mesh.faces_g
    size = xc.size
    cp = np.zeros((size, 3, 3))
    cm = np.zeros((size, 3, 3))
    for I in range(GHOSTS - 1, GHOSTS + mesh.n + 1):
        for s in range(3):
            j = I - 1 + s
            stencil = xc[j - 1:j + 2]
            cp[I, s] = lagrange_p_coefficients(stencil, xf[I + 1])
            cm[I, s] = lagrange_p_coefficients(stencil, xf[I])
    return cp, cm


# ---------------------------------------------------------------------------
# compiled kernels


@numba.njit(cache=True, error_model="numpy", inline="always")
def _reconstruct(f0, f1, f2, f3, f4, coef, I, side, kind, eps, power):
    p0 = coef[I, 0, 0] * f0 + coef[I, 0, 1] * f1 + coef[I, 0, 2] * f2
    p1 = coef[I, 1, 0] * f1 + coef[I, 1, 1] * f2 + coef[I, 1, 2] * f3
    p2 = coef[I, 2, 0] * f2 + coef[I, 2, 1] * f3 + coef[I, 2, 2] * f4
    if kind == CENTRAL:
        if side == PLUS:
            return 0.1 * p0 + 0.6 * p1 + 0.3 * p2
        return 0.3 * p0 + 0.6 * p1 + 0.1 * p2
    if kind == LOC:
        d0 = f1 - f0
        d1 = f2 - f1
        d2 = f3 - f2
        d3 = f4 - f3
        is0 = 0.5 * (d0 * d0 + d1 * d1) + (d1 - d0) * (d1 - d0)
        is1 = 0.5 * (d1 * d1 + d2 * d2) + (d2 - d1) * (d2 - d1)
        is2 = 0.5 * (d2 * d2 + d3 * d3) + (d3 - d2) * (d3 - d2)
        b0 = eps + is0
        b1 = eps + is1
        b2 = eps + is2
        if side == PLUS:
            a0 = 1.0 / (12.0 * b0 * b0 * b0)
            a1 = 1.0 / (2.0 * b1 * b1 * b1)
            a2 = 1.0 / (4.0 * b2 * b2 * b2)
        else:
            a0 = 1.0 / (4.0 * b0 * b0 * b0)
            a1 = 1.0 / (2.0 * b1 * b1 * b1)
            a2 = 1.0 / (12.0 * b2 * b2 * b2)
    else:
        t0 = f0 - 2.0 * f1 + f2
        t1 = f1 - 2.0 * f2 + f3
        t2 = f2 - 2.0 * f3 + f4
        s0 = f0 - 4.0 * f1 + 3.0 * f2
        s1 = f1 - f3
        s2 = 3.0 * f2 - 4.0 * f3 + f4
        b0 = eps + 13.0 / 12.0 * t0 * t0 + 0.25 * s0 * s0
        b1 = eps + 13.0 / 12.0 * t1 * t1 + 0.25 * s1 * s1
        b2 = eps + 13.0 / 12.0 * t2 * t2 + 0.25 * s2 * s2
        if power == 2:
            b0 = b0 * b0
            b1 = b1 * b1
            b2 = b2 * b2
        else:
            b0 = b0 * b0 * b0
            b1 = b1 * b1 * b1
            b2 = b2 * b2 * b2
        if side == PLUS:
            a0 = 0.1 / b0
            a1 = 0.6 / b1
            a2 = 0.3 / b2
        else:
            a0 = 0.3 / b0
            a1 = 0.6 / b1
            a2 = 0.1 / b2
    return (a0 * p0 + a1 * p1 + a2 * p2) / (a0 + a1 + a2)


@numba.njit(cache=True, error_model="numpy")
def flux_x(phi, u, cp, cm, kind, eps, power, flux, j0, j1):
    """Upwinded WENO flux through every x-face, for columns ``j0 <= j < j1``."""
    g = 3
    nf = u.shape[0] - 2 * g
    for f in range(nf):
        F = f + g
        for j in range(j0, j1):
            v = u[F, j]
            if v >= 0.0:
                I = F - 1
                r = _reconstruct(phi[I - 2, j], phi[I - 1, j], phi[I, j], phi[I + 1, j], phi[I + 2, j],
                                 cp, I, PLUS, kind, eps, power)
            else:
                I = F
                r = _reconstruct(phi[I - 2, j], phi[I - 1, j], phi[I, j], phi[I + 1, j], phi[I + 2, j],
                                 cm, I, MINUS, kind, eps, power)
            flux[f, j] = v * r


@numba.njit(cache=True, error_model="numpy")
def flux_z(phi, w, cp, cm, kind, eps, power, flux, i0, i1):
    """Upwinded WENO flux through every z-face, for rows ``i0 <= i < i1``."""
    g = 3
    nf = w.shape[1] - 2 * g
    for i in range(i0, i1):
        for f in range(nf):
            F = f + g
            v = w[i, F]
            if v >= 0.0:
                K = F - 1
                r = _reconstruct(phi[i, K - 2], phi[i, K - 1], phi[i, K], phi[i, K + 1], phi[i, K + 2],
                                 cp, K, PLUS, kind, eps, power)
            else:
                K = F
                r = _reconstruct(phi[i, K - 2], phi[i, K - 1], phi[i, K], phi[i, K + 1], phi[i, K + 2],
                                 cm, K, MINUS, kind, eps, power)
            flux[i, f] = v * r


@numba.njit(cache=True, error_model="numpy")
def add_flux_divergence_x(flux, dx, out, j0, j1):
    g = 3
    n = flux.shape[0] - 1
    for i in range(n):
        for j in range(j0, j1):
            out[i + g, j] -= (flux[i + 1, j] - flux[i, j]) / dx[i]


@numba.njit(cache=True, error_model="numpy")
def add_flux_divergence_z(flux, dz, out, i0, i1):
    g = 3
    n = flux.shape[1] - 1
    for i in range(i0, i1):
        for k in range(n):
            out[i, k + g] -= (flux[i, k + 1] - flux[i, k]) / dz[k]


class ConvectionOperator:
    """WENO convection on one staggered grid, dimension by dimension.

    Holds the precomputed polynomial weights and flux scratch buffers.
    """

    def __init__(self, mesh_x: Mesh1D, mesh_z: Mesh1D | None, variant: SchemeVariant):
        self.variant = variant
        self.mesh_x = mesh_x
        self.mesh_z = mesh_z
        self.cpx, self.cmx = face_coefficients(mesh_x)
        self.dx = np.ascontiguousarray(mesh_x.spacing)
        if mesh_z is not None:
            self.cpz, self.cmz = face_coefficients(mesh_z)
            self.dz = np.ascontiguousarray(mesh_z.spacing)
        self._fx = None
        self._fz = None

    def _buffers(self, shape_x, shape_z):
        if self._fx is None or self._fx.shape != shape_x:
            self._fx = np.zeros(shape_x)
        if shape_z is not None and (self._fz is None or self._fz.shape != shape_z):
            self._fz = np.zeros(shape_z)

    def add_x(self, phi: np.ndarray, u: np.ndarray, out: np.ndarray, cols: tuple[int, int]) -> np.ndarray:
        """Accumulate -d(u phi)/dx into ``out`` over the interior cells of ``cols``."""
        v = self.variant
        self._buffers((u.shape[0] - 2 * GHOSTS, phi.shape[1]), None)
        flux_x(phi, u, self.cpx, self.cmx, v.kind, v.epsilon, v.power, self._fx, cols[0], cols[1])
        add_flux_divergence_x(self._fx, self.dx, out, cols[0], cols[1])
        return out

    def add_z(self, phi: np.ndarray, w: np.ndarray, out: np.ndarray, rows: tuple[int, int]) -> np.ndarray:
        v = self.variant
        shape = (phi.shape[0], w.shape[1] - 2 * GHOSTS)
        if self._fz is None or self._fz.shape != shape:
            self._fz = np.zeros(shape)
        flux_z(phi, w, self.cpz, self.cmz, v.kind, v.epsilon, v.power, self._fz, rows[0], rows[1])
        add_flux_divergence_z(self._fz, self.dz, out, rows[0], rows[1])
        return out

    @property
    def last_flux_x(self) -> np.ndarray:
        return self._fx

    @property
    def last_flux_z(self) -> np.ndarray:
        return self._fz
