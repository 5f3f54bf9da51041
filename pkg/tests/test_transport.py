from __future__ import annotations

import numpy as np
import pytest

from dualweno.boundary import BoundaryConditions, apply_boundaries
from dualweno.diffusion import build_stencil, diffusive_term
from dualweno.errors import ConfigurationError, SimulationBlowUp
from dualweno.mesh import GHOSTS, DualMesh, StaggeredGrid2D, StretchSpec, build_stretched_mesh, build_uniform_mesh
from dualweno.reconstruction import LOC, ConvectionOperator, SchemeVariant
from dualweno.timestep import rk3_step
from dualweno.transport import (NondimensionalMap, ScalarSpec, ScalarTransport, advance_scalars,
                                interpolate_velocity, restrict_to_base, scalar_rhs, total_scalar)

from dualweno.cases.blob import blob, blob_grid

from conftest import ALL_PERIODIC, periodic_grid

G = GHOSTS
WALLS = BoundaryConditions.from_dict({"left": "neumann", "right": "neumann", "bottom": "neumann", "top": "neumann"})
COLUMN = BoundaryConditions.from_dict(
    {"left": "periodic", "right": "periodic", "bottom": "neumann", "top": {"dirichlet": 1.0}})


def boxed_grid(nx=8, nz=8, delta=0.0):
    mz = build_stretched_mesh(StretchSpec(delta, nz, 0.0, 1.0)) if delta else build_uniform_mesh(nz, 0.0, 1.0)
    return StaggeredGrid2D(build_uniform_mesh(nx, 0.0, 2.0), mz)


def base_velocity(grid, fu, fw):
    u = grid.zeros("xface")
    w = grid.zeros("zface")
    xu, zu = np.meshgrid(grid.mesh_x.faces, grid.mesh_z.centers, indexing="ij")
    xw, zw = np.meshgrid(grid.mesh_x.centers, grid.mesh_z.faces, indexing="ij")
    u[grid.interior("xface")] = fu(xu, zu)
    w[grid.interior("zface")] = fw(xw, zw)
    return u, w


class TestInterpolateVelocity:
    def test_identity_r1(self, rng):
        grid = boxed_grid()
        u = rng.random(grid.shape("xface"))
        w = rng.random(grid.shape("zface"))
        uf, wf = interpolate_velocity(u, w, DualMesh(grid, 1))
        np.testing.assert_array_equal(uf[grid.interior("xface")], u[grid.interior("xface")])
        np.testing.assert_array_equal(wf[grid.interior("zface")], w[grid.interior("zface")])

    @pytest.mark.parametrize("r", [2, 3, 4])
    @pytest.mark.parametrize("delta", [0.0, 2.5])
    def test_bilinear_exact(self, r, delta):
        grid = boxed_grid(delta=delta)
        fu = lambda x, z: 0.3 + 0.5 * x - 0.2 * z + 0.7 * x * z
        fw = lambda x, z: -0.1 + 0.4 * x + 0.9 * z - 0.3 * x * z
        dual = DualMesh(grid, r)
        uf, wf = interpolate_velocity(*base_velocity(grid, fu, fw), dual)
        exact_u, exact_w = base_velocity(dual.fine, fu, fw)
        fi = dual.fine
        np.testing.assert_allclose(uf[fi.interior("xface")], exact_u[fi.interior("xface")], atol=1e-13)
        np.testing.assert_allclose(wf[fi.interior("zface")], exact_w[fi.interior("zface")], atol=1e-13)

    def test_cubic_in_x(self):
        grid = boxed_grid(16, 8)
        f = lambda x, z: 1.0 + x - 0.5 * x ** 2 + 0.25 * x ** 3 + 0 * z
        dual = DualMesh(grid, 2)
        uf, wf = interpolate_velocity(*base_velocity(grid, f, f), dual)
        exact_u, exact_w = base_velocity(dual.fine, f, f)
        fi = dual.fine
        np.testing.assert_allclose(uf[fi.interior("xface")], exact_u[fi.interior("xface")], atol=1e-12)
        np.testing.assert_allclose(wf[fi.interior("zface")], exact_w[fi.interior("zface")], atol=1e-12)


class TestRestriction:
    def test_constant(self):
        dual = DualMesh(boxed_grid(delta=3.0), 3)
        np.testing.assert_allclose(restrict_to_base(np.full((24, 24), 0.4), dual), 0.4, rtol=1e-15)

    def test_checkerboard(self):
        dual = DualMesh(boxed_grid(), 2)
        fine = (np.add.outer(np.arange(16), np.arange(16)) % 2).astype(float)
        np.testing.assert_allclose(restrict_to_base(fine, dual), 0.5, atol=1e-15)

    @pytest.mark.parametrize("r", [2, 3])
    def test_linear_cell_means(self, r):
        dual = DualMesh(boxed_grid(delta=3.0), r)
        f = lambda x, z: 2.0 - x + 3.0 * z
        xf, zf = np.meshgrid(dual.fine.mesh_x.centers, dual.fine.mesh_z.centers, indexing="ij")
        xb, zb = np.meshgrid(dual.base.mesh_x.centers, dual.base.mesh_z.centers, indexing="ij")
        # the mean of a linear function over a cell is its value at the cell center
        np.testing.assert_allclose(restrict_to_base(f(xf, zf), dual), f(xb, zb), atol=1e-13)


class TestTotals:
    def test_unit_field(self):
        grid = StaggeredGrid2D(build_uniform_mesh(20, 0.0, 5.0), build_stretched_mesh(StretchSpec(3.0, 20, 0.0, 5.0)))
        assert total_scalar(np.ones((20, 20)), grid) == pytest.approx(25.0, rel=1e-14)

    def test_blob_integral(self):
        grid = blob_grid(320)
        x, z = np.meshgrid(grid.mesh_x.centers, grid.mesh_z.centers, indexing="ij")
        exact = np.pi / 2 - 2 / np.pi  # integral of 0.5(1 + cos(pi r)) over the unit disc
        assert total_scalar(blob(x, z), grid) == pytest.approx(exact, rel=1e-6)


def _transport(dual, bcs, d=0.0, initial=0.0, variant=SchemeVariant(LOC)):
    return ScalarTransport(dual, [ScalarSpec("phi", d, bcs, initial=initial)], variant)


class TestScalarRHS:
    def test_rest_constant(self):
        dual = DualMesh(boxed_grid(), 2)
        tr = _transport(dual, WALLS, d=0.01, initial=0.7)
        out = tr.rhs("phi", tr.fields["phi"])
        np.testing.assert_allclose(out, 0.0, atol=1e-12)

    def test_one_shot_matches_transport(self, rng):
        dual = DualMesh(periodic_grid(8, 8), 2)
        tr = _transport(dual, ALL_PERIODIC, d=0.01, initial=lambda x, z: np.sin(2 * np.pi * x) * np.cos(2 * np.pi * z))
        u = rng.random(dual.fine.shape("xface"))
        w = rng.random(dual.fine.shape("zface"))
        tr.set_fine_velocity(u, w)
        spec = tr.specs["phi"]
        np.testing.assert_array_equal(scalar_rhs(tr.fields["phi"], u, w, spec, tr.variant, dual),
                                      tr.rhs("phi", tr.fields["phi"]))

    def test_erf_diffusion_rate(self):
        # pure diffusion matches the analytic time derivative of the erf profile
        from math import erf, exp, pi, sqrt
        n, d, t = 160, 2e-5, 10.0
        grid = StaggeredGrid2D(build_uniform_mesh(8, 0.0, 5.0, periodic=True),
                               build_stretched_mesh(StretchSpec(3.0, n, 0.0, 5.0)))
        depth = 5.0 - grid.mesh_z.centers
        prof = np.array([1.0 - erf(s / sqrt(4 * d * t)) for s in depth])
        tr = _transport(DualMesh(grid, 1), COLUMN, d=d, initial=lambda x, z: np.tile(prof, (x.shape[0], 1)))
        rate = tr.rhs("phi", tr.fields["phi"])[G + 3, G:G + n]
        exact = depth / (2 * t * sqrt(pi * d * t)) * np.exp(-depth ** 2 / (4 * d * t))
        band = depth < 0.1
        assert np.max(np.abs(rate - exact)[band]) < 1e-2 * np.max(exact)


class TestAdvance:
    def test_zero_step(self):
        dual = DualMesh(boxed_grid(), 2)
        tr = _transport(dual, WALLS, d=0.1, initial=lambda x, z: x * z)
        before = tr.fields["phi"].copy()
        advance_scalars(tr, 0.0)
        np.testing.assert_array_equal(tr.fields["phi"], before)

    def test_periodic_conservation(self, rng):
        dual = DualMesh(periodic_grid(16, 16), 2)
        tr = _transport(dual, ALL_PERIODIC, initial=lambda x, z: 1 + np.sin(2 * np.pi * x) * np.sin(4 * np.pi * z))
        u = dual.base.zeros("xface")
        w = dual.base.zeros("zface")
        u[dual.base.interior("xface")] = 0.5 + 0.3 * rng.random(dual.base.interior_shape("xface"))
        w[dual.base.interior("zface")] = 0.2 * rng.standard_normal(dual.base.interior_shape("zface"))
        from dualweno.boundary import apply_velocity_boundaries
        apply_velocity_boundaries(u, w, ALL_PERIODIC)
        tr.set_base_velocity(u, w)
        total0 = tr.total("phi")
        for _ in range(1000):
            tr.advance(2e-3)
        assert abs(tr.total("phi") - total0) <= 1e-10 * abs(total0)

    def test_r1_matches_single_mesh(self, rng):
        grid = periodic_grid(16, 16)
        init = lambda x, z: np.exp(-20 * ((x - 0.5) ** 2 + (z - 0.5) ** 2))
        tr = _transport(DualMesh(grid, 1), ALL_PERIODIC, d=1e-3, initial=init)
        u = rng.random(grid.shape("xface"))
        w = rng.random(grid.shape("zface"))
        from dualweno.boundary import apply_velocity_boundaries
        apply_velocity_boundaries(u, w, ALL_PERIODIC)
        tr.set_base_velocity(u, w)

        op = ConvectionOperator(grid.mesh_x, grid.mesh_z, SchemeVariant(LOC))
        sx, sz = build_stencil(grid.mesh_x), build_stencil(grid.mesh_z)
        phi = grid.zeros("center")
        x, z = np.meshgrid(grid.mesh_x.centers, grid.mesh_z.centers, indexing="ij")
        phi[grid.interior("center")] = init(x, z)

        def rhs(a):
            out = np.zeros_like(a)
            op.add_x(a, u, out, (G, a.shape[1] - G))
            op.add_z(a, w, out, (G, a.shape[0] - G))
            return diffusive_term(a, sx, sz, 1e-3, out=out)

        for _ in range(5):
            tr.advance(1e-3)
            phi = rk3_step(phi, rhs, 1e-3, lambda a: apply_boundaries(a, "center", ALL_PERIODIC))
        np.testing.assert_array_equal(tr.fields["phi"], phi)

    def test_blow_up_reports_cell_and_stage(self):
        dual = DualMesh(boxed_grid(), 1)
        tr = _transport(dual, WALLS, d=0.1)
        tr.fields["phi"][G + 2, G + 5] = np.nan
        with pytest.raises(SimulationBlowUp) as err:
            tr.advance(1e-3)
        assert err.value.stage == 1
        # first non-finite cell lies within the five-point stencil reach of the seeded NaN
        assert abs(err.value.cell[0] - 2) <= 2 and abs(err.value.cell[1] - 5) <= 3

    def test_validation(self):
        dual = DualMesh(boxed_grid(), 1)
        specs = [ScalarSpec("a", 0.1, WALLS, couples_to_buoyancy=True),
                 ScalarSpec("b", 0.1, WALLS, couples_to_buoyancy=True)]
        with pytest.raises(ConfigurationError):
            ScalarTransport(dual, specs, SchemeVariant(LOC))
        with pytest.raises(ConfigurationError):
            ScalarTransport(dual, [ScalarSpec("a", 0.1, ALL_PERIODIC)], SchemeVariant(LOC))
        with pytest.raises(ConfigurationError):
            ScalarSpec("a", -1.0, WALLS)


class TestNondimensional:
    def test_temperature(self):
        m = NondimensionalMap(zero_ref=20.0, one_ref=23.0)
        assert m.to_nondim(20.0) == 0.0
        assert m.to_nondim(23.0) == 1.0
        assert m.to_dim(0.5) == pytest.approx(21.5)

    def test_diffusivity_from_numbers(self):
        assert ScalarSpec.from_numbers("phi", 100.0, 500.0, WALLS).diffusivity == pytest.approx(2e-5)

    def test_degenerate(self):
        with pytest.raises(ConfigurationError):
            NondimensionalMap(1.0, 1.0)
