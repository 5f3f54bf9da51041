from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dualweno.errors import ConfigurationError
from dualweno.mesh import (GHOSTS, DualMesh, Mesh1D, StaggeredGrid2D, StretchSpec, build_stretched_mesh,
                           build_uniform_mesh, lagrange_weights, refine_dual)


class TestStretchedMesh:
    def test_endpoints(self):
        m = build_stretched_mesh(StretchSpec(3.0, 10, 0.0, 1.0))
        assert m.faces[0] == 0.0
        assert m.faces[-1] == 1.0

    def test_midpoint_against_tanh_ratio(self):
        # independent evaluation with the decimal-precise math module
        expected = math.tanh(0.75) / math.tanh(1.5)
        m = build_stretched_mesh(StretchSpec(3.0, 10, 0.0, 1.0))
        assert m.faces[5] == pytest.approx(expected, abs=1e-15)
        assert expected == pytest.approx(0.70171, abs=5e-6)

    def test_finest_cells_towards_end(self):
        m = build_stretched_mesh(StretchSpec(3.0, 20, 0.0, 5.0))
        assert m.spacing[-1] < m.spacing[0]
        assert np.all(np.diff(m.spacing) < 0)

    def test_delta_zero_is_uniform(self):
        m = build_stretched_mesh(StretchSpec(0.0, 16, 0.0, 2.0))
        np.testing.assert_allclose(m.spacing, 0.125, rtol=1e-14)

    @pytest.mark.parametrize("delta", np.arange(0.0, 6.01, 0.5))
    @pytest.mark.parametrize("n", [8, 10, 40, 160, 640])
    def test_monotone_with_ghosts(self, delta, n):
        for mirrored in (False, True):
            m = build_stretched_mesh(StretchSpec(float(delta), n, 0.0, 2.0, mirrored=mirrored, periodic=mirrored))
            assert np.all(np.diff(m.faces_g) > 0)
            assert np.all((m.centers_g > m.faces_g[:-1]) & (m.centers_g < m.faces_g[1:]))

    @pytest.mark.parametrize("delta", [1.0, 3.0, 4.5])
    def test_mirror_symmetry(self, delta):
        m = build_stretched_mesh(StretchSpec(delta, 40, 0.0, 2.0, mirrored=True))
        np.testing.assert_allclose(m.faces + m.faces[::-1], 2.0, atol=1e-13)
        # finest cells sit at the midpoint
        assert m.spacing[19] == pytest.approx(m.spacing.min())

    @pytest.mark.parametrize("kw", [dict(delta=-1.0, n=10), dict(delta=1.0, n=3), dict(delta=1.0, n=9, mirrored=True)])
    def test_invalid_spec(self, kw):
        with pytest.raises(ConfigurationError):
            StretchSpec(**kw)

    def test_reversed_bounds(self):
        with pytest.raises(ConfigurationError):
            StretchSpec(1.0, 10, 1.0, 0.0)


class TestUniformMesh:
    def test_faces(self):
        m = build_uniform_mesh(4, 0.0, 2.0)
        np.testing.assert_array_equal(m.faces, [0.0, 0.5, 1.0, 1.5, 2.0])

    def test_spacing(self):
        m = build_uniform_mesh(10, 0.0, 2.0)
        np.testing.assert_allclose(m.spacing, 0.2, rtol=1e-14)

    def test_periodic_ghost_faces(self):
        m = build_uniform_mesh(4, 0.0, 2.0, periodic=True)
        np.testing.assert_allclose(m.faces_g[:GHOSTS], [-1.5, -1.0, -0.5])
        np.testing.assert_allclose(m.faces_g[-GHOSTS:], [2.5, 3.0, 3.5])

    def test_bounded_ghosts_mirror_spacing(self):
        m = build_stretched_mesh(StretchSpec(3.0, 12, 0.0, 1.0))
        np.testing.assert_allclose(m.spacing_g[:GHOSTS], m.spacing[:GHOSTS][::-1])
        np.testing.assert_allclose(m.spacing_g[-GHOSTS:], m.spacing[-GHOSTS:][::-1])

    def test_too_few_cells(self):
        with pytest.raises(ConfigurationError):
            build_uniform_mesh(3, 0.0, 1.0)

    def test_csv_dump(self, tmp_path):
        m = build_uniform_mesh(4, 0.0, 1.0)
        path = tmp_path / "mesh.csv"
        m.to_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "index,face,center,spacing"
        assert len(lines) == 6


class TestStaggeredGrid:
    def test_shapes(self):
        g = StaggeredGrid2D(build_uniform_mesh(6, 0, 1), build_uniform_mesh(5, 0, 1))
        assert g.interior_shape("xface") == (7, 5)
        assert g.interior_shape("zface") == (6, 6)
        assert g.interior_shape("center") == (6, 5)
        assert g.shape("center") == (12, 11)

    def test_field_shape_checked(self):
        g = StaggeredGrid2D(build_uniform_mesh(6, 0, 1), build_uniform_mesh(5, 0, 1))
        with pytest.raises(ConfigurationError):
            g.field("phi", "center", np.zeros((3, 3)))


def _base(delta=0.0, nx=8, nz=8):
    mx = build_uniform_mesh(nx, 0.0, 2.0, periodic=True)
    mz = build_stretched_mesh(StretchSpec(delta, nz, 0.0, 1.0)) if delta else build_uniform_mesh(nz, 0.0, 1.0)
    return StaggeredGrid2D(mx, mz)


class TestDualMesh:
    def test_identity_for_r1(self, rng):
        dual = refine_dual(_base(), 1)
        assert dual.fine is dual.base
        u = rng.random((8, 8))
        np.testing.assert_array_equal(dual.interpolate("u", u), u)

    @pytest.mark.parametrize("r", [0, 6])
    def test_unsupported_factor(self, r):
        with pytest.raises(ConfigurationError):
            DualMesh(_base(), r)

    @pytest.mark.parametrize("r", [2, 3, 4, 5])
    @pytest.mark.parametrize("delta", [0.0, 3.0])
    def test_tiling(self, r, delta):
        dual = DualMesh(_base(delta), r)
        for base, fine in ((dual.base.mesh_x, dual.fine.mesh_x), (dual.base.mesh_z, dual.fine.mesh_z)):
            np.testing.assert_array_equal(fine.faces[::r], base.faces)
            np.testing.assert_allclose(fine.spacing.reshape(-1, r).sum(axis=1), base.spacing, atol=1e-13)

    def test_r3_center_coincidence(self):
        dual = DualMesh(_base(), 3)
        st = dual.stencils["w"][0]
        fine_x = dual.fine.mesh_x.centers
        base_x = dual.base.mesh_x.centers
        np.testing.assert_allclose(fine_x[1::3], base_x, atol=1e-14)
        central = st.weight[1::3]
        assert np.all(np.sort(central, axis=1) == [0.0, 0.0, 0.0, 1.0])

    @pytest.mark.parametrize("r", [2, 3])
    @pytest.mark.parametrize("delta", [0.0, 2.5])
    def test_weights_sum_to_one(self, r, delta):
        dual = DualMesh(_base(delta), r)
        for comp in ("u", "w"):
            for st in dual.stencils[comp]:
                np.testing.assert_allclose(st.weight.sum(axis=1), 1.0, atol=1e-13)

    def test_linear_exact_r2(self):
        dual = DualMesh(_base(), 2)
        xb = dual.base.mesh_z.centers
        u = np.tile(xb, (8, 1))  # f = z at base u-points
        out = dual.interpolate("u", u)
        np.testing.assert_allclose(out, np.tile(dual.fine.mesh_z.centers, (16, 1)), atol=1e-13)

    @pytest.mark.parametrize("r", [2, 3, 5])
    def test_cubic_exact_bounded_axis(self, r):
        # degree-3 in z is reproduced exactly, also next to the walls
        dual = DualMesh(_base(3.0), r)
        f = lambda z: 1.0 - 2.0 * z + 0.5 * z ** 2 + 3.0 * z ** 3
        zb = dual.base.mesh_z.faces
        w = np.tile(f(zb), (8, 1))
        out = dual.interpolate("w", w)
        expected = np.tile(f(dual.fine.mesh_z.faces), (8 * r, 1))
        np.testing.assert_allclose(out, expected, rtol=1e-12, atol=1e-12)

    def test_periodic_axis_smooth_function(self):
        dual = DualMesh(_base(nx=32), 2)
        xb = dual.base.mesh_x.points("face")
        u = np.repeat(np.sin(np.pi * xb)[:, None], 8, axis=1)
        out = dual.interpolate("u", u)
        exact = np.sin(np.pi * dual.fine.mesh_x.points("face"))
        assert np.max(np.abs(out[:, 0] - exact)) < 1e-4


class TestLagrangeWeights:
    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.floats(0.05, 1.0), min_size=4, max_size=4), st.floats(-0.5, 4.5))
    def test_reproduces_cubics(self, gaps, x):
        nodes = np.cumsum(gaps)
        w = lagrange_weights(nodes, x)
        for p in range(4):
            assert np.dot(w, nodes ** p) == pytest.approx(x ** p, rel=1e-9, abs=1e-9 * max(1.0, abs(x)) ** 3)

    def test_coincident_node_exact(self):
        w = lagrange_weights(np.array([0.0, 1.0, 2.0, 3.0]), 2.0)
        np.testing.assert_array_equal(w, [0.0, 0.0, 1.0, 0.0])


class TestNodeLayout:
    def _spec(self, **kw):
        return StretchSpec(**{"delta": 3.0, "n": 20, "x_start": 0.0, "x_end": 2.0, "mirrored": True,
                              "periodic": True, "layout": "nodes", **kw})

    def test_centers_follow_tanh_law(self):
        mesh = build_stretched_mesh(self._spec())
        points = build_stretched_mesh(self._spec(layout="faces", periodic=False)).faces
        np.testing.assert_array_equal(mesh.centers, points[:-1])
        assert mesh.centers[0] == 0.0
        assert mesh.centers[10] == 1.0

    def test_faces_halfway_between_nodes(self):
        mesh = build_stretched_mesh(self._spec())
        c = mesh.centers_g
        np.testing.assert_allclose(mesh.faces_g[1:-1], 0.5 * (c[1:] + c[:-1]), rtol=0, atol=1e-15)
        assert mesh.length == pytest.approx(2.0, abs=1e-15)

    def test_centers_inside_cells(self):
        mesh = build_stretched_mesh(self._spec(delta=5.0, n=40))
        assert np.all(mesh.centers_g > mesh.faces_g[:-1])
        assert np.all(mesh.centers_g < mesh.faces_g[1:])

    def test_periodic_ghost_centers(self):
        mesh = build_stretched_mesh(self._spec())
        np.testing.assert_allclose(mesh.centers_g[:GHOSTS], mesh.centers[-GHOSTS:] - 2.0, atol=1e-15)
        np.testing.assert_allclose(mesh.centers_g[-GHOSTS:], mesh.centers[:GHOSTS] + 2.0, atol=1e-15)

    def test_zero_delta_is_uniform_shifted(self):
        mesh = build_stretched_mesh(self._spec(delta=0.0, n=8))
        np.testing.assert_allclose(mesh.centers, np.arange(8) * 0.25, atol=1e-15)
        np.testing.assert_allclose(mesh.spacing, 0.25, rtol=1e-14)

    def test_bounded_rejected(self):
        with pytest.raises(ConfigurationError):
            self._spec(periodic=False)

    def test_unknown_layout(self):
        with pytest.raises(ConfigurationError):
            self._spec(layout="edges")

    def test_explicit_centers_validated(self):
        with pytest.raises(ConfigurationError):
            Mesh1D(np.linspace(0.0, 1.0, 6), centers=np.linspace(0.0, 1.0, 5))
