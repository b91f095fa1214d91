"""
Cheap synthetic performance labels.

Neither proxy is a flow solver. They give monotone, smooth, geometry-driven
targets so the surrogate and quality commands have something physical-looking
to learn:

  lift_to_drag_proxy     thin-aerofoil lift from the mean camber line over a
                         flat-plate skin friction drag with a thickness form
                         factor and an induced term
  wave_resistance_proxy  slender-body wave resistance from the slope of the
                         sectional area curve
"""
from __future__ import annotations

import logging
import math

import numpy as np
from scipy import integrate

from geoops.errors import GeoOpsError, require
from geoops.shapes import ClosedProfile2D, TriangleMesh
from geoops.slicing import sectional_area_curve

logger = logging.getLogger(__name__)

CAMBER_STATIONS = 201
INDUCED_FACTOR = 0.01


def camber_and_thickness(profile: ClosedProfile2D, stations: int = CAMBER_STATIONS):
    """Mean camber line and thickness on a cosine-spaced chord grid.

    The profile is normalised so the leading edge (min x) sits at 0 and the
    trailing edge (max x) at 1. Returns (x, camber, thickness).
    """
    pts = profile.oriented_ccw().points
    x_min, x_max = float(pts[:, 0].min()), float(pts[:, 0].max())
    chord = x_max - x_min
    if not chord > 0:
        raise GeoOpsError("ZERO_MEASURE", "profile has zero chord")
    i_te = int(np.argmax(pts[:, 0]))
    pts = np.roll(pts, -i_te, axis=0)
    i_le = int(np.argmin(pts[:, 0]))
    require(0 < i_le < len(pts) - 1, "profile has no distinct upper and lower sides")
    norm = (pts - [x_min, 0.0]) / chord
    # CCW from the trailing edge runs over the upper side first
    upper = norm[: i_le + 1][::-1]
    lower = norm[i_le:]
    if norm[0, 0] > lower[-1, 0]:
        lower = np.vstack([lower, norm[:1]])
    upper = upper[np.argsort(upper[:, 0], kind="stable")]
    lower = lower[np.argsort(lower[:, 0], kind="stable")]
    x = 0.5 * (1.0 - np.cos(np.linspace(0.0, math.pi, stations)))
    yu = np.interp(x, upper[:, 0], upper[:, 1])
    yl = np.interp(x, lower[:, 0], lower[:, 1])
    return x, 0.5 * (yu + yl), yu - yl


def zero_lift_angle(x: np.ndarray, camber: np.ndarray) -> float:
    """alpha_L0 = -(1/pi) * integral over theta of dz/dx * (cos(theta) - 1), x = (1 - cos theta)/2."""
    slope = np.gradient(camber, x)
    theta = np.arccos(np.clip(1.0 - 2.0 * x, -1.0, 1.0))
    return -float(integrate.trapezoid(slope * (np.cos(theta) - 1.0), theta)) / math.pi


def lift_to_drag_proxy(profile: ClosedProfile2D, alpha_deg: float = 4.0, reynolds: float = 1e6) -> float:
    require(reynolds > 0, "reynolds number must be positive", reynolds=reynolds)
    x, camber, thickness = camber_and_thickness(profile)
    t_max = float(np.max(thickness))
    if t_max <= 0:
        raise GeoOpsError("ZERO_MEASURE", "profile has no thickness")
    alpha = math.radians(alpha_deg)
    cl = 2.0 * math.pi * (alpha - zero_lift_angle(x, camber))
    cf = 0.074 / reynolds ** 0.2
    cd = 2.0 * cf * (1.0 + 2.0 * t_max + 60.0 * t_max ** 4) + INDUCED_FACTOR * cl * cl
    logger.debug("L/D proxy: cl=%.4f cd=%.5f t=%.4f", cl, cd, t_max)
    return cl / cd


def wave_resistance_proxy(mesh: TriangleMesh, n_sections: int = 64, axis: int = 0) -> float:
    """Slender-body estimate -sum_ij S'(x_i) S'(x_j) log|x_i - x_j| dx^2.

    The diagonal uses the cell average of log|x - xi| over a cell of width
    dx, i.e. log(dx) - 3/2.
    """
    xs, areas = sectional_area_curve(mesh, n_sections, axis=axis)
    dx = float(xs[1] - xs[0])
    if not dx > 0:
        raise GeoOpsError("ZERO_MEASURE", "mesh has no extent along the axis", axis=axis)
    slope = np.gradient(areas, dx)
    gap = np.abs(xs[:, None] - xs[None, :])
    np.fill_diagonal(gap, 1.0)
    kernel = np.log(gap)
    np.fill_diagonal(kernel, math.log(dx) - 1.5)
    return -float(slope @ kernel @ slope) * dx * dx
