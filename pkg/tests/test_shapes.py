import numpy as np
import pytest

from geoops import meshes
from geoops.errors import GeoOpsError
from geoops.shapes import (AIRFOIL_PARAM_TABLE, DEGENERATE_FACE, INVERTED_ORIENTATION, NON_MANIFOLD_EDGE,
                           OPEN_EDGE, SELF_INTERSECT, AirfoilParams, ClosedProfile2D, TriangleMesh,
                           airfoil_param_names, check_mesh_validity, check_profile_validity,
                           find_self_intersections, generate_airfoil, is_watertight,
                           profile_from_coordinates, resample_profile)


# =========================
# Profiles
# =========================
def test_profile_rejects_too_few_points():
    with pytest.raises(GeoOpsError) as e:
        ClosedProfile2D([[0, 0], [1, 0]])
    assert e.value.code == "TOO_FEW_POINTS"


def test_profile_rejects_repeated_consecutive_point():
    with pytest.raises(GeoOpsError) as e:
        ClosedProfile2D([[0, 0], [1, 0], [1, 0], [0, 1]])
    assert e.value.code == "INVALID_ARGUMENT"
    assert e.value.details["index"] == 1


def test_profile_is_immutable():
    prof = meshes.square_profile()
    with pytest.raises(ValueError):
        prof.points[0, 0] = 5.0


def test_oriented_ccw_flips_clockwise_loop_and_keeps_start():
    cw = ClosedProfile2D([[0, 0], [0, 1], [1, 1], [1, 0]])
    assert cw.signed_area == pytest.approx(-1.0)
    ccw = cw.oriented_ccw()
    assert ccw.signed_area == pytest.approx(1.0)
    np.testing.assert_array_equal(ccw.points[0], [0, 0])
    np.testing.assert_array_equal(ccw.points, [[0, 0], [1, 0], [1, 1], [0, 1]])


def test_flat_round_trips_through_coordinates():
    prof = meshes.regular_polygon_profile(7)
    back = profile_from_coordinates(prof.flat())
    np.testing.assert_array_equal(back.points, prof.points)


def test_resample_keeps_start_and_count(mid_airfoil):
    for mode in ("arclength", "curvature"):
        out = resample_profile(mid_airfoil, 100, mode=mode)
        assert len(out) == 100
        np.testing.assert_array_equal(out.points[0], mid_airfoil.points[0])


def test_curvature_resampling_gathers_points_at_leading_edge(mid_airfoil):
    even = resample_profile(mid_airfoil, 192, mode="arclength")
    bent = resample_profile(mid_airfoil, 192, mode="curvature")
    assert np.sum(bent.points[:, 0] < 0.05) > np.sum(even.points[:, 0] < 0.05)


def test_resample_rejects_unknown_mode(mid_airfoil):
    with pytest.raises(GeoOpsError):
        resample_profile(mid_airfoil, 64, mode="spline")


# =========================
# Aerofoil parameters
# =========================
def test_param_table_has_eleven_named_entries():
    assert len(AIRFOIL_PARAM_TABLE) == 11
    assert airfoil_param_names()[0] == "le_radius"
    assert all(lo < hi for _, lo, hi in AIRFOIL_PARAM_TABLE)


@pytest.mark.parametrize("bad", [-0.01, 1.01])
def test_params_outside_unit_interval_rejected(bad):
    vals = [0.5] * 11
    vals[3] = bad
    with pytest.raises(GeoOpsError) as e:
        AirfoilParams(tuple(vals))
    assert e.value.code == "PARAM_OUT_OF_RANGE"
    assert e.value.details["index"] == 4


def test_params_need_eleven_values():
    with pytest.raises(GeoOpsError):
        AirfoilParams((0.5,) * 10)


def test_midpoint_airfoil_shape(mid_airfoil):
    pts = mid_airfoil.points
    assert len(mid_airfoil) == 192
    assert pts[:, 0].min() == pytest.approx(0.0, abs=1e-15)
    assert pts[:, 0].max() == pytest.approx(1.0)
    assert mid_airfoil.signed_area > 0
    assert mid_airfoil.signed_area == pytest.approx(0.13339000265528705, rel=1e-12)
    assert mid_airfoil.perimeter == pytest.approx(2.0880441713619757, rel=1e-12)
    assert check_profile_validity(mid_airfoil).valid


def test_midpoint_airfoil_is_symmetric(mid_airfoil):
    pts = mid_airfoil.points
    m = len(pts) // 2
    np.testing.assert_allclose(pts[m:], pts[:m][::-1] * [1.0, -1.0], atol=1e-15)


def test_lhs_style_airfoils_are_valid(rng):
    for row in rng.random((20, 11)):
        prof = generate_airfoil(AirfoilParams(tuple(row)))
        assert len(prof) == 192
        assert prof.signed_area > 0


def test_airfoil_point_count_must_be_even():
    with pytest.raises(GeoOpsError):
        generate_airfoil(AirfoilParams.midpoint(), 101)


# =========================
# Self-intersection
# =========================
def test_bow_tie_is_self_intersecting(bow_tie):
    verdict = check_profile_validity(ClosedProfile2D(bow_tie))
    assert not verdict.valid
    assert verdict.code == SELF_INTERSECT
    np.testing.assert_array_equal(find_self_intersections(bow_tie), [[0, 2]])


def test_convex_polygon_is_valid():
    assert check_profile_validity(meshes.regular_polygon_profile(12)).code == "VALID"


def test_touching_non_adjacent_edges_count_as_intersection():
    # vertex 3 lies on edge 0-1
    pts = np.array([[0, 0], [2, 0], [2, 1], [1, 0], [0, 1]], dtype=float)
    assert len(find_self_intersections(pts)) > 0


@pytest.mark.slow
def test_sweep_matches_brute_force_on_random_loops(rng):
    for _ in range(1000):
        n = int(rng.integers(4, 40))
        pts = rng.random((n, 2))
        brute = find_self_intersections(pts, method="brute")
        sweep = find_self_intersections(pts, method="sweep")
        np.testing.assert_array_equal(brute, sweep)


# =========================
# Mesh validity
# =========================
def test_closed_meshes_are_valid(unit_cube, sphere4, ring_torus):
    for mesh in (meshes.tetrahedron(), unit_cube, sphere4, ring_torus):
        verdict = check_mesh_validity(mesh)
        assert verdict.valid, verdict.code


def test_open_faced_tetrahedron_detected():
    verdict = check_mesh_validity(meshes.tetrahedron().without_faces([0]))
    assert OPEN_EDGE in verdict.reasons
    assert not is_watertight(verdict)


def test_inverted_mesh_detected(unit_cube):
    verdict = check_mesh_validity(unit_cube.flipped())
    assert verdict.reasons == (INVERTED_ORIENTATION,)
    assert is_watertight(verdict)


def test_non_manifold_edge_detected():
    tet = meshes.tetrahedron()
    extra = TriangleMesh(np.vstack([tet.vertices, [[1.0, 1.0, 0.0]]]),
                         np.vstack([tet.faces, [[0, 1, 4]]]))
    assert NON_MANIFOLD_EDGE in check_mesh_validity(extra).reasons


def test_degenerate_face_detected():
    mesh = TriangleMesh([[0, 0, 0], [1, 0, 0], [2, 0, 0]], [[0, 1, 2]])
    assert DEGENERATE_FACE in check_mesh_validity(mesh).reasons


def test_mesh_rejects_bad_indices():
    with pytest.raises(GeoOpsError):
        TriangleMesh([[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 1, 3]])
    with pytest.raises(GeoOpsError):
        TriangleMesh([[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 1, 1]])


def test_signed_volume_and_areas(unit_cube):
    assert unit_cube.signed_volume() == pytest.approx(1.0)
    assert unit_cube.face_areas().sum() == pytest.approx(6.0)
    assert unit_cube.scaled(2.0).signed_volume() == pytest.approx(8.0)
    assert unit_cube.translated([3, -1, 2]).signed_volume() == pytest.approx(1.0)


def test_closed_mesh_edges(unit_cube, ring_torus):
    assert unit_cube.edges.shape == (18, 2)
    assert np.all(unit_cube.edges[:, 0] < unit_cube.edges[:, 1])
    assert len(ring_torus.edges) == 3 * ring_torus.n_faces // 2
