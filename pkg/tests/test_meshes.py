import math

import numpy as np
import pytest

from geoops import meshes
from geoops.curvature import euler_characteristic
from geoops.errors import GeoOpsError
from geoops.shapes import check_mesh_validity


@pytest.mark.parametrize("sub", [0, 1, 2, 3])
def test_icosphere_counts(sub):
    mesh = meshes.icosphere(sub)
    assert mesh.n_vertices == 10 * 4 ** sub + 2
    assert mesh.n_faces == 20 * 4 ** sub
    np.testing.assert_allclose(np.linalg.norm(mesh.vertices, axis=1), 1.0, rtol=0, atol=1e-14)


@pytest.mark.parametrize("builder,chi", [
    (meshes.tetrahedron, 2),
    (meshes.cube, 2),
    (lambda: meshes.icosphere(2), 2),
    (meshes.uv_sphere, 2),
    (meshes.torus, 0),
    (meshes.cylinder, 2),
    (meshes.cone, 2),
])
def test_builders_are_closed_outward_meshes(builder, chi):
    mesh = builder()
    assert check_mesh_validity(mesh).valid
    assert mesh.signed_volume() > 0
    assert euler_characteristic(mesh) == chi


def test_cylinder_volume_is_prism_volume():
    n, r, h = 64, 1.0, 2.0
    base = 0.5 * n * r * r * math.sin(2 * math.pi / n)
    assert meshes.cylinder(r, h, n).signed_volume() == pytest.approx(base * h, rel=1e-12)


def test_cone_volume_is_pyramid_volume():
    n, r, h = 48, 1.5, 3.0
    base = 0.5 * n * r * r * math.sin(2 * math.pi / n)
    assert meshes.cone(r, h, n).signed_volume() == pytest.approx(base * h / 3.0, rel=1e-12)


def test_torus_volume_close_to_analytic():
    mesh = meshes.torus(2.0, 0.5, 96, 48)
    assert mesh.signed_volume() == pytest.approx(2 * math.pi ** 2 * 2.0 * 0.25, rel=1e-2)


def test_cube_size_and_origin():
    mesh = meshes.cube(2.0, origin=(1.0, 0.0, -1.0))
    assert mesh.signed_volume() == pytest.approx(8.0)
    np.testing.assert_array_equal(mesh.vertices.min(axis=0), [1.0, 0.0, -1.0])


def test_regular_polygon_is_ccw_and_starts_on_phase():
    prof = meshes.regular_polygon_profile(6, radius=2.0, centre=(1.0, 1.0))
    assert prof.signed_area > 0
    np.testing.assert_allclose(prof.points[0], [3.0, 1.0])
    assert prof.signed_area == pytest.approx(0.5 * 6 * 4.0 * math.sin(math.pi / 3))


def test_square_profile_area():
    assert meshes.square_profile(3.0).signed_area == pytest.approx(9.0)


def test_family_scales_unit_rows_onto_bounds():
    family = meshes.MESH_FAMILIES["cone"]
    assert family.param_names == ["radius", "height"]
    np.testing.assert_allclose(family.scale([[0.0, 0.0], [1.0, 0.5]]), [[0.5, 1.0], [1.5, 2.5]])


def test_family_build_uses_keyword_values():
    mesh = meshes.MESH_FAMILIES["cylinder"].build([1.0, 3.0])
    assert mesh.vertices[:, 2].max() == pytest.approx(3.0)
    assert np.hypot(mesh.vertices[:, 0], mesh.vertices[:, 1]).max() == pytest.approx(1.0)


def test_family_needs_one_value_per_parameter():
    with pytest.raises(GeoOpsError):
        meshes.MESH_FAMILIES["uv_sphere"].build([1.0, 2.0])
