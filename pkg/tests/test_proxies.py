import math

import numpy as np
import pytest

from geoops import meshes
from geoops.errors import GeoOpsError
from geoops.proxies import camber_and_thickness, lift_to_drag_proxy, wave_resistance_proxy, zero_lift_angle
from geoops.shapes import AirfoilParams, ClosedProfile2D, TriangleMesh, generate_airfoil


def _ellipse(a=1.0, b=0.1, n=400):
    t = 2.0 * math.pi * np.arange(n) / n
    return ClosedProfile2D(np.column_stack([a * np.cos(t), b * np.sin(t)]))


def test_parabolic_camber_zero_lift_angle():
    x = 0.5 * (1.0 - np.cos(np.linspace(0.0, math.pi, 2001)))
    h = 0.02
    assert zero_lift_angle(x, 4.0 * h * x * (1.0 - x)) == pytest.approx(-2.0 * h, abs=1e-4)


def test_symmetric_airfoil_has_flat_camber(mid_airfoil):
    x, camber, thickness = camber_and_thickness(mid_airfoil)
    assert x[0] == 0.0
    assert x[-1] == pytest.approx(1.0)
    np.testing.assert_allclose(camber, 0.0, atol=1e-12)
    assert np.all(thickness >= -1e-12)
    assert abs(zero_lift_angle(x, camber)) < 1e-12


def test_ellipse_thickness():
    _, camber, thickness = camber_and_thickness(_ellipse())
    assert thickness.max() == pytest.approx(0.1, rel=1e-3)
    np.testing.assert_allclose(camber, 0.0, atol=1e-12)


def test_symmetric_airfoil_lift_to_drag(mid_airfoil):
    assert lift_to_drag_proxy(mid_airfoil, alpha_deg=0.0) == pytest.approx(0.0, abs=1e-9)
    assert lift_to_drag_proxy(mid_airfoil, alpha_deg=4.0) > 0.0


def test_lift_to_drag_varies_with_shape(rng):
    values = {round(lift_to_drag_proxy(generate_airfoil(AirfoilParams(tuple(r)))), 6)
              for r in rng.random((5, 11))}
    assert len(values) == 5


def test_bad_reynolds(mid_airfoil):
    with pytest.raises(GeoOpsError):
        lift_to_drag_proxy(mid_airfoil, reynolds=0.0)


def test_wave_resistance_positive_and_mirror_symmetric():
    body = meshes.icosphere(3).scaled(0.5).translated([1.0, 0.0, 0.0])
    mirrored = TriangleMesh(body.vertices * [-1.0, 1.0, 1.0], body.faces[:, ::-1])
    a = wave_resistance_proxy(body)
    assert a > 0.0
    assert wave_resistance_proxy(mirrored) == pytest.approx(a, rel=1e-8)
