"""Deterministic reference shapes with known integrals and topology.

All closed meshes are outward-oriented. Used as analytic fixtures by the
tests; MESH_FAMILIES exposes a few of them as parametric design spaces.

Usage:
  python -m geoops features --generator mesh --mesh-family cylinder --n-designs 20
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np

from geoops.errors import require
from geoops.shapes import ClosedProfile2D, TriangleMesh


def tetrahedron() -> TriangleMesh:
    v = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
    f = [[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]]
    return TriangleMesh(v, f)


def cube(size: float = 1.0, origin: Sequence[float] = (0.0, 0.0, 0.0)) -> TriangleMesh:
    # vertex i sits at bits (x, y, z) = (i & 1, i >> 1 & 1, i >> 2 & 1)
    v = np.array([[(i & 1), (i >> 1) & 1, (i >> 2) & 1] for i in range(8)], dtype=np.float64)
    f = [
        [0, 2, 3], [0, 3, 1],  # z = 0
        [4, 5, 7], [4, 7, 6],  # z = 1
        [0, 1, 5], [0, 5, 4],  # y = 0
        [2, 6, 7], [2, 7, 3],  # y = 1
        [0, 4, 6], [0, 6, 2],  # x = 0
        [1, 3, 7], [1, 7, 5],  # x = 1
    ]
    return TriangleMesh(v * float(size) + np.asarray(origin, dtype=np.float64), f)


def _orient_outward(vertices: np.ndarray, faces: np.ndarray) -> np.ndarray:
    """Flip faces whose normal points toward the origin (star-shaped solids only)."""
    a, b, c = vertices[faces[:, 0]], vertices[faces[:, 1]], vertices[faces[:, 2]]
    inward = np.einsum("ij,ij->i", np.cross(b - a, c - a), a + b + c) < 0
    faces = faces.copy()
    faces[inward] = faces[inward][:, ::-1]
    return faces


def icosphere(subdivisions: int = 3, radius: float = 1.0) -> TriangleMesh:
    require(subdivisions >= 0, "subdivisions must be >= 0", subdivisions=subdivisions)
    t = (1.0 + math.sqrt(5.0)) / 2.0
    verts = [
        [-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
        [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
        [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1],
    ]
    faces = [
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ]
    pts = [np.asarray(p, dtype=np.float64) / np.linalg.norm(p) for p in verts]

    for _ in range(subdivisions):
        cache: Dict[Tuple[int, int], int] = {}

        def midpoint(i: int, j: int) -> int:
            key = (min(i, j), max(i, j))
            if key not in cache:
                m = pts[i] + pts[j]
                pts.append(m / np.linalg.norm(m))
                cache[key] = len(pts) - 1
            return cache[key]

        refined = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            refined.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]])
        faces = refined

    v = np.asarray(pts) * float(radius)
    return TriangleMesh(v, _orient_outward(v, np.asarray(faces, dtype=np.int64)))


def uv_sphere(radius: float = 1.0, n_lat: int = 16, n_lon: int = 32) -> TriangleMesh:
    require(n_lat >= 2 and n_lon >= 3, "uv sphere needs n_lat >= 2 and n_lon >= 3")
    rows = [[0.0, 0.0, radius]]
    for i in range(1, n_lat):
        theta = math.pi * i / n_lat
        for j in range(n_lon):
            phi = 2.0 * math.pi * j / n_lon
            rows.append([radius * math.sin(theta) * math.cos(phi),
                         radius * math.sin(theta) * math.sin(phi),
                         radius * math.cos(theta)])
    rows.append([0.0, 0.0, -radius])
    south = len(rows) - 1

    def ring(i: int, j: int) -> int:
        return 1 + (i - 1) * n_lon + (j % n_lon)

    faces = []
    for j in range(n_lon):
        faces.append([0, ring(1, j), ring(1, j + 1)])
        faces.append([south, ring(n_lat - 1, j + 1), ring(n_lat - 1, j)])
    for i in range(1, n_lat - 1):
        for j in range(n_lon):
            a, b = ring(i, j), ring(i, j + 1)
            c, d = ring(i + 1, j), ring(i + 1, j + 1)
            faces.append([a, c, d])
            faces.append([a, d, b])
    v = np.asarray(rows)
    return TriangleMesh(v, _orient_outward(v, np.asarray(faces, dtype=np.int64)))


def torus(major: float = 2.0, minor: float = 0.5, nu: int = 48, nv: int = 24) -> TriangleMesh:
    require(major > minor > 0, "torus needs major > minor > 0")
    u = 2.0 * math.pi * np.arange(nu) / nu
    v = 2.0 * math.pi * np.arange(nv) / nv
    uu, vv = np.meshgrid(u, v, indexing="ij")
    ring = major + minor * np.cos(vv)
    verts = np.stack([ring * np.cos(uu), ring * np.sin(uu), minor * np.sin(vv)], axis=-1).reshape(-1, 3)

    i, j = np.meshgrid(np.arange(nu), np.arange(nv), indexing="ij")
    a = (i * nv + j).ravel()
    b = (((i + 1) % nu) * nv + j).ravel()
    c = (((i + 1) % nu) * nv + (j + 1) % nv).ravel()
    d = (i * nv + (j + 1) % nv).ravel()
    faces = np.concatenate([np.stack([a, b, c], axis=1), np.stack([a, c, d], axis=1)])
    return TriangleMesh(verts, faces)


def cylinder(radius: float = 1.0, height: float = 2.0, segments: int = 64) -> TriangleMesh:
    """Capped cylinder along z on [0, height]."""
    require(segments >= 3, "cylinder needs >= 3 segments", segments=segments)
    ang = 2.0 * math.pi * np.arange(segments) / segments
    ring = np.stack([radius * np.cos(ang), radius * np.sin(ang)], axis=1)
    bottom = np.column_stack([ring, np.zeros(segments)])
    top = np.column_stack([ring, np.full(segments, float(height))])
    verts = np.vstack([bottom, top, [[0.0, 0.0, 0.0]], [[0.0, 0.0, float(height)]]])
    cb, ct = 2 * segments, 2 * segments + 1
    faces = []
    for k in range(segments):
        n = (k + 1) % segments
        faces.append([k, n, segments + n])
        faces.append([k, segments + n, segments + k])
        faces.append([cb, n, k])
        faces.append([ct, segments + k, segments + n])
    return TriangleMesh(verts, faces)


def cone(radius: float = 1.0, height: float = 2.0, segments: int = 64) -> TriangleMesh:
    """Apex at (0, 0, height), base disc at z = 0; side faces fan from the apex."""
    require(segments >= 3, "cone needs >= 3 segments", segments=segments)
    ang = 2.0 * math.pi * np.arange(segments) / segments
    base = np.column_stack([radius * np.cos(ang), radius * np.sin(ang), np.zeros(segments)])
    verts = np.vstack([base, [[0.0, 0.0, float(height)]], [[0.0, 0.0, 0.0]]])
    apex, centre = segments, segments + 1
    faces = []
    for k in range(segments):
        n = (k + 1) % segments
        faces.append([k, n, apex])
        faces.append([centre, n, k])
    return TriangleMesh(verts, faces)


def regular_polygon_profile(sides: int, radius: float = 1.0,
                            centre: Sequence[float] = (0.0, 0.0), phase: float = 0.0) -> ClosedProfile2D:
    """Counter-clockwise regular polygon; vertex 0 at angle ``phase``."""
    require(sides >= 3, "polygon needs >= 3 sides", sides=sides)
    ang = phase + 2.0 * math.pi * np.arange(sides) / sides
    pts = np.column_stack([radius * np.cos(ang), radius * np.sin(ang)]) + np.asarray(centre, dtype=np.float64)
    return ClosedProfile2D(pts)


def circle_profile(n: int = 256, radius: float = 1.0, centre: Sequence[float] = (0.0, 0.0)) -> ClosedProfile2D:
    return regular_polygon_profile(n, radius=radius, centre=centre)


def square_profile(size: float = 1.0, origin: Sequence[float] = (0.0, 0.0)) -> ClosedProfile2D:
    ox, oy = origin
    return ClosedProfile2D([[ox, oy], [ox + size, oy], [ox + size, oy + size], [ox, oy + size]])


# =========================
# Parametric families
# =========================
@dataclass(frozen=True)
class MeshFamily:
    """A builder plus (keyword, low, high) bounds; unit rows map linearly onto the bounds."""
    builder: Callable[..., TriangleMesh]
    bounds: Tuple[Tuple[str, float, float], ...]

    @property
    def param_names(self) -> List[str]:
        return [name for name, _, _ in self.bounds]

    def scale(self, unit_rows: np.ndarray) -> np.ndarray:
        lo = np.array([b[1] for b in self.bounds])
        hi = np.array([b[2] for b in self.bounds])
        return lo + np.asarray(unit_rows, dtype=np.float64) * (hi - lo)

    def build(self, values: Sequence[float]) -> TriangleMesh:
        require(len(values) == len(self.bounds), "one value per family parameter",
                expected=len(self.bounds), got=len(values))
        return self.builder(**{name: float(v) for name, v in zip(self.param_names, values)})


MESH_FAMILIES: Dict[str, MeshFamily] = {
    "cylinder": MeshFamily(cylinder, (("radius", 0.5, 1.5), ("height", 1.0, 4.0))),
    "cone": MeshFamily(cone, (("radius", 0.5, 1.5), ("height", 1.0, 4.0))),
    "uv_sphere": MeshFamily(uv_sphere, (("radius", 0.5, 1.5),)),
}
