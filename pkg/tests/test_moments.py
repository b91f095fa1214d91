import math

import numpy as np
import pytest

from geoops import meshes
from geoops.errors import GeoOpsError
from geoops.moments import (CENTRAL, CENTRAL_SCALE_NORMALISED, cardinality, centroid, divergence_consistency,
                            exponent_tuples, moments_2d, moments_3d, sac_moment_identity_residual, to_central,
                            to_scale_normalised, with_variant)
from geoops.shapes import ClosedProfile2D


# =========================
# Indexing
# =========================
@pytest.mark.parametrize("s,dim,expected", [(5, 3, 56), (0, 3, 1), (10, 2, 66), (4, 2, 15)])
def test_cardinality(s, dim, expected):
    assert cardinality(s, dim) == expected
    assert len(exponent_tuples(s, dim)) == expected


def test_cardinality_exclude_first():
    assert cardinality(3, 3, exclude_first=True) == 17
    assert cardinality(2, 2, exclude_first=True) == 4


def test_exponent_order_is_graded():
    assert exponent_tuples(2, 3)[:5] == [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1), (2, 0, 0)]
    assert exponent_tuples(2, 2) == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]


@pytest.mark.parametrize("s", range(0, 9))
def test_moment_vector_length_matches_cardinality(unit_cube, s):
    assert len(moments_3d(unit_cube, s)) == cardinality(s, 3)


def test_labels_and_dict_keys(unit_cube):
    mv = moments_3d(unit_cube, 1)
    assert mv.labels() == ["m_0_0_0", "m_1_0_0", "m_0_1_0", "m_0_0_1"]
    assert list(mv.as_dict())[1] == "1,0,0"


# =========================
# 3D
# =========================
def test_unit_cube_moments_exact(unit_cube):
    mv = moments_3d(unit_cube, 5)
    assert len(mv) == 56
    for (p, q, r), value in mv:
        assert value == pytest.approx(1.0 / ((p + 1) * (q + 1) * (r + 1)), rel=1e-12)


def test_divergence_forms_agree(unit_cube, sphere4, ring_torus):
    for mesh in (unit_cube, sphere4, ring_torus):
        assert divergence_consistency(mesh, 4) < 1e-10


def test_icosphere_volume_and_symmetry(sphere4):
    mv = moments_3d(sphere4, 2)
    assert mv.volume == pytest.approx(4.0 * math.pi / 3.0, rel=5e-3)
    assert abs(mv.value(1, 0, 0)) < 1e-9


def test_moments_need_closed_mesh():
    with pytest.raises(GeoOpsError) as e:
        moments_3d(meshes.tetrahedron().without_faces([0]), 2)
    assert e.value.code == "NOT_WATERTIGHT"


def test_order_above_maximum(unit_cube):
    with pytest.raises(GeoOpsError) as e:
        moments_3d(unit_cube, 17)
    assert e.value.code == "ORDER_TOO_LARGE"


# =========================
# 2D
# =========================
def test_unit_square_moments():
    mv = moments_2d(meshes.square_profile(), 4)
    for (p, q), value in mv:
        assert value == pytest.approx(1.0 / ((p + 1) * (q + 1)), rel=1e-12)


def test_orientation_does_not_change_moments():
    ccw = meshes.square_profile()
    cw = ClosedProfile2D(ccw.points[::-1])
    np.testing.assert_allclose(moments_2d(cw, 3).values, moments_2d(ccw, 3).values, rtol=1e-12)


def test_moments_are_additive():
    square = moments_2d(meshes.square_profile(), 4).values
    lower = moments_2d(ClosedProfile2D([[0, 0], [1, 0], [1, 1]]), 4).values
    upper = moments_2d(ClosedProfile2D([[0, 0], [1, 1], [0, 1]]), 4).values
    np.testing.assert_allclose(lower + upper, square, atol=1e-12)


def test_polygon_disc_approaches_circle():
    mv = moments_2d(meshes.circle_profile(256), 2)
    assert mv.volume == pytest.approx(math.pi, rel=1e-3)
    assert mv.value(2, 0) == pytest.approx(math.pi / 4.0, rel=5e-3)


# =========================
# Variants
# =========================
def test_central_unit_square():
    central = to_central(moments_2d(meshes.square_profile(), 2))
    assert central.variant == CENTRAL
    assert central.value(2, 0) == pytest.approx(1.0 / 12.0, rel=1e-12)
    assert abs(central.value(1, 0)) < 1e-15
    assert abs(central.value(0, 1)) < 1e-15


def test_centroid_of_shifted_cube():
    mv = moments_3d(meshes.cube(origin=(2, 2, 2)), 1)
    np.testing.assert_allclose(centroid(mv), [2.5, 2.5, 2.5], rtol=1e-12)


def test_central_moments_translation_invariant_2d():
    base = meshes.regular_polygon_profile(9)
    a = to_central(moments_2d(base, 4)).values
    b = to_central(moments_2d(base.translated(3.0, -2.0), 4)).values
    np.testing.assert_allclose(b, a, rtol=1e-9, atol=1e-10)


def test_central_moments_translation_invariant_3d(unit_cube):
    a = to_central(moments_3d(unit_cube, 4)).values
    b = to_central(moments_3d(meshes.cube(origin=(2, 2, 2)), 4)).values
    np.testing.assert_allclose(b, a, rtol=1e-9, atol=1e-10)


def test_scale_normalised_ignores_size(unit_cube):
    a = to_scale_normalised(to_central(moments_3d(unit_cube, 4)))
    b = with_variant(moments_3d(meshes.cube(size=2.0), 4), CENTRAL_SCALE_NORMALISED)
    assert a.values[0] == 1.0
    np.testing.assert_allclose(b.values, a.values, rtol=1e-9, atol=1e-12)


def test_central_requires_raw(unit_cube):
    central = to_central(moments_3d(unit_cube, 2))
    with pytest.raises(GeoOpsError):
        to_central(central)


# =========================
# Sectional area curve
# =========================
@pytest.mark.parametrize("p", [1, 2, 3])
def test_sac_identity_on_offset_sphere(p):
    mesh = meshes.icosphere(3).translated([1.0, 0.0, 0.0])
    assert sac_moment_identity_residual(mesh, p) < 1e-2


def test_sac_zeroth_moment_vanishes():
    mesh = meshes.icosphere(3).translated([1.0, 0.0, 0.0])
    assert sac_moment_identity_residual(mesh, 0) == 0.0


def test_sac_needs_vanishing_end_areas(unit_cube):
    with pytest.raises(GeoOpsError) as e:
        sac_moment_identity_residual(unit_cube, 1)
    assert e.value.code == "ASSUMPTION_VIOLATED"
