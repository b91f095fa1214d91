import math

import numpy as np
import pytest

from geoops import meshes
from geoops.curvature import (cylinder_patch, euler_characteristic, gaussian_curvature_parametric,
                              sphere_patch, torus_patch, total_curvature_mesh, total_curvature_parametric,
                              total_curvature_profile)
from geoops.errors import GeoOpsError


# =========================
# Parametric
# =========================
def test_unit_sphere_curvature_is_one():
    patch = sphere_patch()
    for u, v in [(0.3, 0.7), (2.0, 1.5), (5.5, 2.9)]:
        assert gaussian_curvature_parametric(patch, u, v) == pytest.approx(1.0, abs=1e-10)


def test_sphere_curvature_scales_with_radius():
    assert gaussian_curvature_parametric(sphere_patch(2.0), 1.0, 1.0) == pytest.approx(0.25, abs=1e-10)


def test_cylinder_is_flat():
    patch = cylinder_patch(radius=1.5)
    u = np.linspace(0.1, 6.0, 7)
    v = np.linspace(0.1, 0.9, 7)
    assert np.all(np.abs(gaussian_curvature_parametric(patch, u, v)) < 1e-12)


def test_torus_outer_equator():
    K = gaussian_curvature_parametric(torus_patch(2.0, 0.5), 0.4, 0.0)
    assert K == pytest.approx(0.8, abs=1e-9)


def test_torus_inner_equator_is_negative():
    K = gaussian_curvature_parametric(torus_patch(2.0, 0.5), 0.4, math.pi)
    assert K == pytest.approx(-1.0 / (0.5 * 1.5), abs=1e-9)


def test_pole_is_degenerate():
    with pytest.raises(GeoOpsError) as e:
        gaussian_curvature_parametric(sphere_patch(), 0.5, 0.0)
    assert e.value.code == "DEGENERATE_POINT"


def test_integrated_sphere():
    total = total_curvature_parametric(sphere_patch(), (200, 200))
    assert total == pytest.approx(4.0 * math.pi, rel=1e-3)


def test_integrated_torus_cancels():
    assert abs(total_curvature_parametric(torus_patch(), (200, 200))) < 1e-6


def test_integrated_half_sphere():
    total = total_curvature_parametric(sphere_patch(u_range=(0.0, math.pi)), (200, 200))
    assert total == pytest.approx(2.0 * math.pi, rel=1e-3)


# =========================
# Meshes
# =========================
def test_cube_total_curvature(unit_cube):
    summary = total_curvature_mesh(unit_cube)
    assert summary.total_curvature == pytest.approx(4.0 * math.pi, abs=1e-9)
    assert summary.to_json_dict()["chi_estimate"] == pytest.approx(2.0, abs=1e-10)


def test_icosphere_total_curvature():
    summary = total_curvature_mesh(meshes.icosphere(3))
    assert summary.total_curvature == pytest.approx(4.0 * math.pi, abs=1e-9)
    assert summary.euler_characteristic_estimate == pytest.approx(2.0, abs=1e-10)


def test_torus_total_curvature(ring_torus):
    assert abs(total_curvature_mesh(ring_torus).total_curvature) < 1e-8


def test_deficits_agree_with_combinatorial_count(unit_cube, sphere4, ring_torus):
    for mesh in (meshes.tetrahedron(), unit_cube, sphere4, ring_torus, meshes.cylinder()):
        chi = euler_characteristic(mesh)
        assert total_curvature_mesh(mesh).euler_characteristic_estimate == pytest.approx(chi, abs=1e-9)


def test_rigid_motion_and_scale_invariance(sphere4):
    c, s = math.cos(0.7), math.sin(0.7)
    rot = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    moved = sphere4.transformed(rot, [1.0, -2.0, 3.0]).scaled(3.0)
    a = total_curvature_mesh(sphere4).total_curvature
    b = total_curvature_mesh(moved).total_curvature
    assert b == pytest.approx(a, abs=1e-10)


def test_open_mesh_rejected():
    with pytest.raises(GeoOpsError) as e:
        total_curvature_mesh(meshes.tetrahedron().without_faces([0]))
    assert e.value.code == "HAS_BOUNDARY"


def test_per_vertex_frame(unit_cube):
    frame = total_curvature_mesh(unit_cube).per_vertex_frame()
    assert list(frame.columns) == ["vertex", "deficit"]
    assert len(frame) == 8
    np.testing.assert_allclose(frame["deficit"], math.pi / 2.0, atol=1e-12)


# =========================
# Profiles
# =========================
def test_convex_profile_turns_once():
    assert total_curvature_profile(meshes.regular_polygon_profile(11)) == pytest.approx(2.0 * math.pi)


def test_airfoil_turns_at_least_once(mid_airfoil):
    assert total_curvature_profile(mid_airfoil) >= 2.0 * math.pi - 1e-9
