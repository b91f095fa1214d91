"""
Gaussian curvature and its integral.

Parametric surfaces: K = (LN - M^2) / (EG - F^2) from the first and second
fundamental forms. Meshes: per-vertex angle deficit 2pi - sum of incident
corner angles, whose sum equals 2pi * chi on a closed surface.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np
import pandas as pd

from geoops.errors import GeoOpsError, require
from geoops.shapes import ClosedProfile2D, TriangleMesh, turning_angles

logger = logging.getLogger(__name__)

DEGENERATE_METRIC = 1e-20
TWO_PI = 2.0 * math.pi

Vec = np.ndarray
Derivatives = Tuple[Vec, Vec, Vec, Vec, Vec]


@dataclass(frozen=True)
class ParametricPatch:
    """Surface P(u, v) with analytic partials.

    ``derivatives(u, v)`` returns (P_u, P_v, P_uu, P_uv, P_vv), each with a
    trailing axis of length 3; u and v may be arrays.
    """
    name: str
    position: Callable[[Vec, Vec], Vec]
    derivatives: Callable[[Vec, Vec], Derivatives]
    u_range: Tuple[float, float]
    v_range: Tuple[float, float]


def sphere_patch(radius: float = 1.0, u_range=(0.0, TWO_PI), v_range=(0.0, math.pi)) -> ParametricPatch:
    r = float(radius)

    def position(u, v):
        return np.stack([r * np.cos(u) * np.sin(v), r * np.sin(u) * np.sin(v), r * np.cos(v) + 0 * u], axis=-1)

    def derivatives(u, v):
        cu, su, cv, sv = np.cos(u), np.sin(u), np.cos(v), np.sin(v)
        z = 0.0 * u * v
        pu = np.stack([-r * su * sv, r * cu * sv, z], axis=-1)
        pv = np.stack([r * cu * cv, r * su * cv, -r * sv + z], axis=-1)
        puu = np.stack([-r * cu * sv, -r * su * sv, z], axis=-1)
        puv = np.stack([-r * su * cv, r * cu * cv, z], axis=-1)
        pvv = np.stack([-r * cu * sv, -r * su * sv, -r * cv + z], axis=-1)
        return pu, pv, puu, puv, pvv

    return ParametricPatch("sphere", position, derivatives, tuple(u_range), tuple(v_range))


def torus_patch(major: float = 2.0, minor: float = 0.5,
                u_range=(0.0, TWO_PI), v_range=(0.0, TWO_PI)) -> ParametricPatch:
    R, r = float(major), float(minor)

    def position(u, v):
        ring = R + r * np.cos(v)
        return np.stack([ring * np.cos(u), ring * np.sin(u), r * np.sin(v) + 0 * u], axis=-1)

    def derivatives(u, v):
        cu, su, cv, sv = np.cos(u), np.sin(u), np.cos(v), np.sin(v)
        ring = R + r * cv
        z = 0.0 * u * v
        pu = np.stack([-ring * su, ring * cu, z], axis=-1)
        pv = np.stack([-r * sv * cu, -r * sv * su, r * cv + z], axis=-1)
        puu = np.stack([-ring * cu, -ring * su, z], axis=-1)
        puv = np.stack([r * sv * su, -r * sv * cu, z], axis=-1)
        pvv = np.stack([-r * cv * cu, -r * cv * su, -r * sv + z], axis=-1)
        return pu, pv, puu, puv, pvv

    return ParametricPatch("torus", position, derivatives, tuple(u_range), tuple(v_range))


def cylinder_patch(radius: float = 1.0, height: float = 1.0,
                   u_range=(0.0, TWO_PI), v_range=None) -> ParametricPatch:
    r = float(radius)

    def position(u, v):
        return np.stack([r * np.cos(u) + 0 * v, r * np.sin(u) + 0 * v, v + 0 * u], axis=-1)

    def derivatives(u, v):
        cu, su = np.cos(u), np.sin(u)
        z = 0.0 * u * v
        one = z + 1.0
        pu = np.stack([-r * su + z, r * cu + z, z], axis=-1)
        pv = np.stack([z, z, one], axis=-1)
        puu = np.stack([-r * cu + z, -r * su + z, z], axis=-1)
        zero = np.stack([z, z, z], axis=-1)
        return pu, pv, puu, zero, zero

    return ParametricPatch("cylinder", position, derivatives, tuple(u_range),
                           tuple(v_range) if v_range is not None else (0.0, float(height)))


def _fundamental_forms(patch: ParametricPatch, u, v):
    pu, pv, puu, puv, pvv = patch.derivatives(np.asarray(u, dtype=np.float64), np.asarray(v, dtype=np.float64))
    E = np.sum(pu * pu, axis=-1)
    F = np.sum(pu * pv, axis=-1)
    G = np.sum(pv * pv, axis=-1)
    det = E * G - F * F
    if np.any(det < DEGENERATE_METRIC):
        raise GeoOpsError("DEGENERATE_POINT", "surface is not regular here", patch=patch.name,
                          min_metric=float(np.min(det)))
    n = np.cross(pu, pv)
    n = n / np.linalg.norm(n, axis=-1, keepdims=True)
    L = np.sum(puu * n, axis=-1)
    M = np.sum(puv * n, axis=-1)
    N = np.sum(pvv * n, axis=-1)
    return det, L, M, N


def gaussian_curvature_parametric(patch: ParametricPatch, u, v):
    det, L, M, N = _fundamental_forms(patch, u, v)
    K = (L * N - M * M) / det
    return float(K) if np.ndim(K) == 0 else K


def total_curvature_parametric(patch: ParametricPatch, grid: Tuple[int, int] = (200, 200)) -> float:
    """Composite midpoint rule for the integral of K * sqrt(EG - F^2) du dv."""
    nu, nv = grid
    require(nu >= 1 and nv >= 1, "grid must be positive", grid=grid)
    (u0, u1), (v0, v1) = patch.u_range, patch.v_range
    du, dv = (u1 - u0) / nu, (v1 - v0) / nv
    u = u0 + (np.arange(nu) + 0.5) * du
    v = v0 + (np.arange(nv) + 0.5) * dv
    uu, vv = np.meshgrid(u, v, indexing="ij")
    det, L, M, N = _fundamental_forms(patch, uu, vv)
    integrand = (L * N - M * M) / np.sqrt(det)
    return float(np.sum(integrand) * du * dv)


# =========================
# Meshes
# =========================
@dataclass(frozen=True)
class CurvatureSummary:
    total_curvature: float
    per_vertex_deficit: np.ndarray

    @property
    def euler_characteristic_estimate(self) -> float:
        return self.total_curvature / TWO_PI

    def to_json_dict(self) -> dict:
        return {"total": self.total_curvature, "chi_estimate": self.euler_characteristic_estimate}

    def per_vertex_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"vertex": np.arange(len(self.per_vertex_deficit)),
                             "deficit": self.per_vertex_deficit})


def corner_angles(mesh: TriangleMesh) -> np.ndarray:
    """(F, 3) interior angles at each face corner, via atan2(|a x b|, a . b)."""
    v = mesh.vertices[mesh.faces]
    out = np.empty((mesh.n_faces, 3))
    for k in range(3):
        a = v[:, (k + 1) % 3] - v[:, k]
        b = v[:, (k + 2) % 3] - v[:, k]
        out[:, k] = np.arctan2(np.linalg.norm(np.cross(a, b), axis=1), np.einsum("ij,ij->i", a, b))
    return out


def total_curvature_mesh(mesh: TriangleMesh) -> CurvatureSummary:
    _, counts = mesh.edge_counts()
    if np.any(counts == 1):
        raise GeoOpsError("HAS_BOUNDARY", "angle-deficit total needs a closed surface",
                          open_edges=int(np.sum(counts == 1)))
    if np.any(counts > 2):
        logger.warning("mesh has %d non-manifold edge(s); deficits may be meaningless", int(np.sum(counts > 2)))
    angles = corner_angles(mesh)
    angle_sum = np.zeros(mesh.n_vertices)
    for k in range(3):
        np.add.at(angle_sum, mesh.faces[:, k], angles[:, k])
    used = np.zeros(mesh.n_vertices, dtype=bool)
    used[mesh.faces.ravel()] = True
    deficit = np.where(used, TWO_PI - angle_sum, 0.0)
    return CurvatureSummary(float(np.sum(deficit)), deficit)


def euler_characteristic(mesh: TriangleMesh) -> int:
    """V - E + F counting only vertices referenced by some face."""
    edges, _ = mesh.edge_counts()
    n_used = len(np.unique(mesh.faces))
    return int(n_used - len(edges) + mesh.n_faces)


def total_curvature_profile(profile: ClosedProfile2D) -> float:
    """Planar total absolute curvature: sum of |turning angle| over the loop."""
    return float(np.sum(np.abs(turning_angles(profile.points))))
