"""
Planar cross-sections of triangle meshes.

A cutting plane {x_axis = value} splits vertices into "above" (d > 0) and
"not above" (d <= 0); a face is cut iff its corners fall into both groups,
which always yields exactly two crossing edges. Crossing points are computed
on each edge in canonical (low index, high index) order so neighbouring faces
produce bit-identical endpoints.

Section coordinates are the two remaining axes in cyclic order
(x -> (y, z), y -> (z, x), z -> (x, y)); loops are counter-clockwise when
viewed from the +axis side.
"""
from __future__ import annotations

import logging
from typing import List, Tuple

import numpy as np
from scipy.spatial import cKDTree

from geoops.errors import GeoOpsError, require
from geoops.shapes import POINT_TOL, ClosedProfile2D, TriangleMesh

logger = logging.getLogger(__name__)

STITCH_TOL = 1e-9
_CYCLIC = {0: (1, 2), 1: (2, 0), 2: (0, 1)}


def section_segments(mesh: TriangleMesh, axis: int, value: float) -> np.ndarray:
    """Oriented section segments as a (k, 2, 2) array in section coordinates."""
    require(axis in _CYCLIC, "axis must be 0, 1 or 2", axis=axis)
    v = mesh.vertices
    f = mesh.faces
    d = v[:, axis] - float(value)
    above = d > 0
    fa = above[f]
    cut = fa.any(axis=1) & ~fa.all(axis=1)
    if not np.any(cut):
        return np.zeros((0, 2, 2))
    fc = f[cut]
    above_c = fa[cut]

    pts = []
    for k in range(3):
        i, j = fc[:, k], fc[:, (k + 1) % 3]
        crosses = above_c[:, k] != above_c[:, (k + 1) % 3]
        lo, hi = np.minimum(i, j), np.maximum(i, j)
        gap = d[lo] - d[hi]
        t = np.divide(d[lo], gap, out=np.zeros_like(gap), where=crosses)
        p = v[lo] + t[:, None] * (v[hi] - v[lo])
        pts.append((crosses, p))

    # each cut face has exactly two crossing edges; take them in corner order
    first = np.where(pts[0][0], 0, 1)
    second = np.where(pts[2][0], 2, 1)
    stack = np.stack([pts[0][1], pts[1][1], pts[2][1]], axis=1)
    rows = np.arange(len(fc))
    a = stack[rows, first]
    b = stack[rows, second]

    normals = mesh.face_normals()[cut]
    e = np.zeros(3)
    e[axis] = 1.0
    tangent = np.cross(e, normals)
    flip = np.einsum("ij,ij->i", b - a, tangent) < 0
    a2, b2 = a.copy(), b.copy()
    a2[flip], b2[flip] = b[flip], a[flip]

    u, w = _CYCLIC[axis]
    return np.stack([a2[:, [u, w]], b2[:, [u, w]]], axis=1)


def section_area(mesh: TriangleMesh, axis: int, value: float) -> float:
    seg = section_segments(mesh, axis, value)
    if len(seg) == 0:
        return 0.0
    a, b = seg[:, 0], seg[:, 1]
    return 0.5 * float(np.sum(a[:, 0] * b[:, 1] - b[:, 0] * a[:, 1]))


def sectional_area_curve(mesh: TriangleMesh, n_sections: int, axis: int = 0) -> Tuple[np.ndarray, np.ndarray]:
    """Section areas at ``n_sections`` planes spanning the full extent, ends included."""
    require(n_sections >= 3, "need at least 3 sections", n_sections=n_sections)
    lo, hi = float(mesh.vertices[:, axis].min()), float(mesh.vertices[:, axis].max())
    xs = np.linspace(lo, hi, n_sections)
    areas = np.array([section_area(mesh, axis, x) for x in xs])
    return xs, areas


def section_loops(mesh: TriangleMesh, axis: int, value: float) -> List[ClosedProfile2D]:
    """Stitch the section segments into closed loops by matching endpoints."""
    seg = section_segments(mesh, axis, value)
    length = np.linalg.norm(seg[:, 1] - seg[:, 0], axis=1) if len(seg) else np.zeros(0)
    seg = seg[length > POINT_TOL]
    if len(seg) == 0:
        return []
    starts = cKDTree(seg[:, 0])
    used = np.zeros(len(seg), dtype=bool)
    loops: List[ClosedProfile2D] = []
    for s0 in range(len(seg)):
        if used[s0]:
            continue
        chain = [s0]
        used[s0] = True
        cur = s0
        while True:
            cand = sorted(starts.query_ball_point(seg[cur, 1], STITCH_TOL))
            if s0 in cand and len(chain) >= 3:
                break
            nxt = next((c for c in cand if not used[c]), None)
            if nxt is None:
                raise GeoOpsError("NOT_WATERTIGHT", "section does not close into a loop",
                                  axis=axis, value=float(value))
            chain.append(nxt)
            used[nxt] = True
            cur = nxt
        pts = seg[chain, 0]
        keep = np.linalg.norm(np.roll(pts, -1, axis=0) - pts, axis=1) > POINT_TOL
        loops.append(ClosedProfile2D(pts[keep]))
    logger.debug("section %s=%.6g: %d loop(s)", "xyz"[axis], value, len(loops))
    return loops
