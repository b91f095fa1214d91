"""
Shape representations and geometric validity.

- ClosedProfile2D: ordered planar loop (aerofoil boundary), chord units.
- TriangleMesh:    indexed triangle surface, model units.
- AirfoilParams:   11 dimensionless parameters in [0,1] driving a four-segment
                   cubic Bezier aerofoil (see AIRFOIL_PARAM_TABLE).
- ValidityVerdict: valid flag + machine-readable defect codes.

Values are immutable after construction (numpy arrays are made read-only).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from geoops.errors import GeoOpsError, require

logger = logging.getLogger(__name__)

POINT_TOL = 1e-12
COLLINEAR_TOL = 1e-12
DEGENERATE_FACE_AREA = 1e-14
BRUTE_FORCE_MAX_EDGES = 512
DEFAULT_PROFILE_POINTS = 192

SELF_INTERSECT = "SELF_INTERSECT"
OPEN_EDGE = "OPEN_EDGE"
NON_MANIFOLD_EDGE = "NON_MANIFOLD_EDGE"
INVERTED_ORIENTATION = "INVERTED_ORIENTATION"
DEGENERATE_FACE = "DEGENERATE_FACE"


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


# =========================
# Profiles
# =========================
@dataclass(frozen=True)
class ClosedProfile2D:
    points: np.ndarray
    closed: bool = True

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise GeoOpsError("INVALID_ARGUMENT", "profile points must be an (n, 2) array",
                              shape=tuple(pts.shape))
        if len(pts) < 3:
            raise GeoOpsError("TOO_FEW_POINTS", "a profile needs at least 3 points", count=len(pts))
        if not np.all(np.isfinite(pts)):
            raise GeoOpsError("NAN_INPUT", "profile points must be finite")
        steps = np.linalg.norm(np.roll(pts, -1, axis=0) - pts, axis=1)
        if not self.closed:
            steps = steps[:-1]
        bad = np.flatnonzero(steps <= POINT_TOL)
        if bad.size:
            raise GeoOpsError("INVALID_ARGUMENT", "consecutive profile points coincide",
                              index=int(bad[0]))
        object.__setattr__(self, "points", _frozen(pts))

    def __len__(self) -> int:
        return len(self.points)

    @property
    def signed_area(self) -> float:
        x, y = self.points[:, 0], self.points[:, 1]
        return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))

    @property
    def edge_lengths(self) -> np.ndarray:
        return np.linalg.norm(np.roll(self.points, -1, axis=0) - self.points, axis=1)

    @property
    def perimeter(self) -> float:
        return float(np.sum(self.edge_lengths))

    def oriented_ccw(self) -> "ClosedProfile2D":
        """Same loop traversed counter-clockwise, starting point kept."""
        if self.signed_area >= 0:
            return self
        return ClosedProfile2D(np.roll(self.points[::-1], 1, axis=0), closed=True)

    def translated(self, dx: float, dy: float) -> "ClosedProfile2D":
        return ClosedProfile2D(self.points + np.array([dx, dy]), closed=self.closed)

    def scaled(self, factor: float) -> "ClosedProfile2D":
        return ClosedProfile2D(self.points * float(factor), closed=self.closed)

    def flat(self) -> np.ndarray:
        """Interleaved coordinates x1, y1, x2, y2, ... (the discretisation vector)."""
        return self.points.reshape(-1).copy()


def profile_from_coordinates(flat: Sequence[float]) -> ClosedProfile2D:
    arr = np.asarray(flat, dtype=np.float64).reshape(-1)
    require(arr.size % 2 == 0, "coordinate vector must have even length", size=int(arr.size))
    return ClosedProfile2D(arr.reshape(-1, 2), closed=True)


def resample_polyline(points: np.ndarray, weights: np.ndarray, n: int) -> np.ndarray:
    """Place n points along a closed polyline at equal increments of weighted length.

    ``weights`` holds one density per edge (edge i runs from point i to i+1);
    the first output point is input point 0.
    """
    nxt = np.roll(points, -1, axis=0)
    lengths = np.linalg.norm(nxt - points, axis=1)
    w = lengths * weights
    cum = np.concatenate([[0.0], np.cumsum(w)])
    total = cum[-1]
    if not total > 0:
        raise GeoOpsError("ZERO_PERIMETER", "profile has zero length")
    targets = np.arange(n, dtype=np.float64) * (total / n)
    edge = np.clip(np.searchsorted(cum, targets, side="right") - 1, 0, len(points) - 1)
    span = w[edge]
    frac = np.where(span > 0, (targets - cum[edge]) / np.where(span > 0, span, 1.0), 0.0)
    return points[edge] + frac[:, None] * (nxt[edge] - points[edge])


def turning_angles(points: np.ndarray) -> np.ndarray:
    """Signed exterior angle at every vertex of a closed polyline."""
    prev = points - np.roll(points, 1, axis=0)
    nxt = np.roll(points, -1, axis=0) - points
    cross = prev[:, 0] * nxt[:, 1] - prev[:, 1] * nxt[:, 0]
    dot = np.sum(prev * nxt, axis=1)
    return np.arctan2(cross, dot)


def resample_profile(profile: ClosedProfile2D, n: int = DEFAULT_PROFILE_POINTS,
                     mode: str = "curvature", curvature_weight: float = 1.0) -> ClosedProfile2D:
    """Bring a profile to ``n`` points, start point preserved.

    ``mode="arclength"`` spaces points uniformly; ``mode="curvature"`` scales
    the local spacing by 1 / (1 + w * L * kappa / 2pi) so points gather where
    the boundary turns fastest (a circle stays uniform).
    """
    require(n >= 3, "need at least 3 output points", n=n)
    require(mode in ("arclength", "curvature"), "unknown resampling mode", mode=mode)
    pts = profile.points
    density = np.ones(len(pts))
    if mode == "curvature":
        lengths = profile.edge_lengths
        local = 0.5 * (lengths + np.roll(lengths, 1))
        kappa = np.abs(turning_angles(pts)) / local
        edge_kappa = 0.5 * (kappa + np.roll(kappa, -1))
        density = 1.0 + curvature_weight * profile.perimeter * edge_kappa / (2.0 * math.pi)
    return ClosedProfile2D(resample_polyline(pts, density, n), closed=True)


# =========================
# Parametric aerofoil
# =========================
AIRFOIL_PARAM_TABLE_VERSION = 1

# name, low, high: raw p in [0,1] maps to low + p * (high - low)
AIRFOIL_PARAM_TABLE: Tuple[Tuple[str, float, float], ...] = (
    ("le_radius", 0.005, 0.04),
    ("upper_crest_x", 0.15, 0.55),
    ("upper_crest_y", 0.03, 0.18),
    ("upper_flatness", 0.2, 0.8),
    ("lower_crest_x", 0.15, 0.55),
    ("lower_crest_y", -0.18, -0.03),
    ("lower_flatness", 0.2, 0.8),
    ("te_upper_angle_deg", 1.0, 15.0),
    ("te_lower_angle_deg", 1.0, 15.0),
    ("te_thickness", 0.001, 0.02),
    ("te_camber", -0.03, 0.03),
)


def airfoil_param_names() -> List[str]:
    return [name for name, _, _ in AIRFOIL_PARAM_TABLE]


@dataclass(frozen=True)
class AirfoilParams:
    values: Tuple[float, ...]

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if len(vals) != len(AIRFOIL_PARAM_TABLE):
            raise GeoOpsError("INVALID_ARGUMENT", "aerofoil needs 11 parameters", count=len(vals))
        for i, v in enumerate(vals):
            if not (0.0 <= v <= 1.0):
                raise GeoOpsError("PARAM_OUT_OF_RANGE", "parameter outside [0,1]",
                                  index=i + 1, value=v)
        object.__setattr__(self, "values", vals)

    @classmethod
    def midpoint(cls) -> "AirfoilParams":
        return cls((0.5,) * len(AIRFOIL_PARAM_TABLE))

    def physical(self) -> dict:
        return {name: lo + p * (hi - lo) for (name, lo, hi), p in zip(AIRFOIL_PARAM_TABLE, self.values)}


def _bezier(ctrl: np.ndarray, t: np.ndarray) -> np.ndarray:
    u = 1.0 - t
    b = np.stack([u ** 3, 3.0 * u * u * t, 3.0 * u * t * t, t ** 3], axis=1)
    return b @ ctrl


def _side_controls(crest_x: float, crest_h: float, flatness: float, le_radius: float,
                   te_y: float, te_angle_deg: float) -> Tuple[np.ndarray, np.ndarray]:
    """Control polygons of one side, built with the crest above y=0.

    Segment 1 runs leading edge -> crest (vertical tangent at the leading
    edge, horizontal at the crest); segment 2 runs crest -> trailing edge.
    """
    a = flatness * crest_x
    handle = min(math.sqrt(2.0 * le_radius * (crest_x - a) / 3.0), crest_h)
    seg1 = np.array([[0.0, 0.0], [0.0, handle], [crest_x - a, crest_h], [crest_x, crest_h]])
    b = 0.5 * flatness * (1.0 - crest_x)
    e = 0.5 * (1.0 - crest_x)
    theta = math.radians(te_angle_deg)
    seg2 = np.array([
        [crest_x, crest_h],
        [crest_x + b, crest_h],
        [1.0 - e * math.cos(theta), te_y + e * math.sin(theta)],
        [1.0, te_y],
    ])
    return seg1, seg2


def _sample_side(seg1: np.ndarray, seg2: np.ndarray, crest_x: float, s: np.ndarray) -> np.ndarray:
    first = s < crest_x
    out = np.empty((len(s), 2))
    out[first] = _bezier(seg1, s[first] / crest_x)
    out[~first] = _bezier(seg2, (s[~first] - crest_x) / (1.0 - crest_x))
    return out


def airfoil_control_polygons(params: AirfoilParams) -> dict:
    """Control points of the four segments in raw (un-normalised) chord units."""
    ph = params.physical()
    c, t = ph["te_camber"], ph["te_thickness"]
    up1, up2 = _side_controls(ph["upper_crest_x"], ph["upper_crest_y"], ph["upper_flatness"],
                              ph["le_radius"], c + 0.5 * t, ph["te_upper_angle_deg"])
    lo1, lo2 = _side_controls(ph["lower_crest_x"], -ph["lower_crest_y"], ph["lower_flatness"],
                              ph["le_radius"], 0.5 * t - c, ph["te_lower_angle_deg"])
    mirror = np.array([1.0, -1.0])
    return {"upper_le": up1, "upper_te": up2, "lower_le": lo1 * mirror, "lower_te": lo2 * mirror}


def generate_airfoil(params: AirfoilParams, n_points: int = DEFAULT_PROFILE_POINTS) -> ClosedProfile2D:
    """Closed aerofoil loop: trailing edge -> upper side -> leading edge -> lower side.

    Each side carries n_points/2 samples on a half-cosine grid that clusters
    them toward the leading edge; the chord is normalised to [0, 1].
    """
    if not isinstance(params, AirfoilParams):
        params = AirfoilParams(tuple(params))
    require(n_points >= 32 and n_points % 2 == 0, "n_points must be even and >= 32", n_points=n_points)
    m = n_points // 2
    ph = params.physical()
    k = np.arange(1, m + 1, dtype=np.float64)
    s = 1.0 - np.cos(0.5 * math.pi * (k - 0.5) / (m - 0.5))
    s[-1] = 1.0

    polys = airfoil_control_polygons(params)
    upper = _sample_side(polys["upper_le"], polys["upper_te"], ph["upper_crest_x"], s)
    lower = _sample_side(polys["lower_le"], polys["lower_te"], ph["lower_crest_x"], s)

    pts = np.vstack([upper[::-1], lower])
    x0, x1 = pts[:, 0].min(), pts[:, 0].max()
    chord = x1 - x0
    pts[:, 0] = (pts[:, 0] - x0) / chord
    pts[:, 1] = pts[:, 1] / chord
    return ClosedProfile2D(pts, closed=True)


# =========================
# Meshes
# =========================
@dataclass(frozen=True)
class TriangleMesh:
    vertices: np.ndarray
    faces: np.ndarray
    _edge_cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        v = np.array(self.vertices, dtype=np.float64).reshape(-1, 3)
        f = np.array(self.faces, dtype=np.int64).reshape(-1, 3)
        if f.size and (f.min() < 0 or f.max() >= len(v)):
            raise GeoOpsError("INVALID_ARGUMENT", "face index out of range",
                              n_vertices=len(v), max_index=int(f.max()))
        rep = (f[:, 0] == f[:, 1]) | (f[:, 1] == f[:, 2]) | (f[:, 0] == f[:, 2])
        if np.any(rep):
            raise GeoOpsError("INVALID_ARGUMENT", "face repeats a vertex", face=int(np.flatnonzero(rep)[0]))
        if not np.all(np.isfinite(v)):
            raise GeoOpsError("NAN_INPUT", "mesh vertices must be finite")
        object.__setattr__(self, "vertices", _frozen(v))
        object.__setattr__(self, "faces", _frozen(f))

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    def corners(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        v = self.vertices
        return v[self.faces[:, 0]], v[self.faces[:, 1]], v[self.faces[:, 2]]

    def face_normals(self) -> np.ndarray:
        """Unnormalised normals (v1 - v0) x (v2 - v0); length is twice the area."""
        a, b, c = self.corners()
        return np.cross(b - a, c - a)

    def face_areas(self) -> np.ndarray:
        return 0.5 * np.linalg.norm(self.face_normals(), axis=1)

    def signed_volume(self) -> float:
        a, b, c = self.corners()
        return float(np.sum(np.einsum("ij,ij->i", a, np.cross(b, c)))) / 6.0

    def edge_counts(self) -> Tuple[np.ndarray, np.ndarray]:
        """Undirected edges (sorted vertex pairs) and how many faces use each."""
        if "counts" not in self._edge_cache:
            f = self.faces
            e = np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]])
            e.sort(axis=1)
            uniq, counts = np.unique(e, axis=0, return_counts=True)
            self._edge_cache["counts"] = (uniq, counts)
        return self._edge_cache["counts"]

    @property
    def edges(self) -> np.ndarray:
        return self.edge_counts()[0]

    def translated(self, offset: Sequence[float]) -> "TriangleMesh":
        return TriangleMesh(self.vertices + np.asarray(offset, dtype=np.float64), self.faces)

    def scaled(self, factor: float) -> "TriangleMesh":
        return TriangleMesh(self.vertices * float(factor), self.faces)

    def transformed(self, rotation: np.ndarray, offset: Sequence[float] = (0.0, 0.0, 0.0)) -> "TriangleMesh":
        return TriangleMesh(self.vertices @ np.asarray(rotation).T + np.asarray(offset), self.faces)

    def flipped(self) -> "TriangleMesh":
        return TriangleMesh(self.vertices, self.faces[:, ::-1])

    def without_faces(self, indices: Sequence[int]) -> "TriangleMesh":
        keep = np.ones(len(self.faces), dtype=bool)
        keep[list(indices)] = False
        return TriangleMesh(self.vertices, self.faces[keep])


# =========================
# Validity
# =========================
@dataclass(frozen=True)
class ValidityVerdict:
    reasons: Tuple[str, ...] = ()

    @property
    def valid(self) -> bool:
        return not self.reasons

    @property
    def code(self) -> str:
        return ";".join(self.reasons) if self.reasons else "VALID"


def _orient(ax, ay, bx, by, cx, cy) -> np.ndarray:
    o = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    return np.where(np.abs(o) <= COLLINEAR_TOL, 0.0, np.sign(o))


def _within(a, b, c, tol=COLLINEAR_TOL):
    return (np.minimum(a, b) - tol <= c) & (c <= np.maximum(a, b) + tol)


def segments_intersect(p1: np.ndarray, p2: np.ndarray, q1: np.ndarray, q2: np.ndarray) -> np.ndarray:
    """Vectorised closed-segment intersection test on rows of (k, 2) arrays."""
    o1 = _orient(p1[:, 0], p1[:, 1], p2[:, 0], p2[:, 1], q1[:, 0], q1[:, 1])
    o2 = _orient(p1[:, 0], p1[:, 1], p2[:, 0], p2[:, 1], q2[:, 0], q2[:, 1])
    o3 = _orient(q1[:, 0], q1[:, 1], q2[:, 0], q2[:, 1], p1[:, 0], p1[:, 1])
    o4 = _orient(q1[:, 0], q1[:, 1], q2[:, 0], q2[:, 1], p2[:, 0], p2[:, 1])

    def on_seg(a, b, c):
        return _within(a[:, 0], b[:, 0], c[:, 0]) & _within(a[:, 1], b[:, 1], c[:, 1])

    boxes = (_within(np.minimum(p1[:, 0], p2[:, 0]), np.maximum(p1[:, 0], p2[:, 0]), q1[:, 0]) |
             _within(np.minimum(p1[:, 0], p2[:, 0]), np.maximum(p1[:, 0], p2[:, 0]), q2[:, 0]) |
             _within(np.minimum(q1[:, 0], q2[:, 0]), np.maximum(q1[:, 0], q2[:, 0]), p1[:, 0]))
    general = (o1 != o2) & (o3 != o4)
    touching = (((o1 == 0) & on_seg(p1, p2, q1)) | ((o2 == 0) & on_seg(p1, p2, q2)) |
                ((o3 == 0) & on_seg(q1, q2, p1)) | ((o4 == 0) & on_seg(q1, q2, p2)))
    return boxes & (general | touching)


def _non_adjacent(i: np.ndarray, j: np.ndarray, n: int) -> np.ndarray:
    return (j - i >= 2) & ~((i == 0) & (j == n - 1))


def _pairs_brute(n: int) -> Tuple[np.ndarray, np.ndarray]:
    i, j = np.triu_indices(n, k=2)
    keep = _non_adjacent(i, j, n)
    return i[keep], j[keep]


def _pairs_sweep(points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Candidate edge pairs whose x-extents overlap (sort-and-sweep)."""
    n = len(points)
    nxt = np.roll(points, -1, axis=0)
    lo = np.minimum(points[:, 0], nxt[:, 0]) - COLLINEAR_TOL
    hi = np.maximum(points[:, 0], nxt[:, 0]) + COLLINEAR_TOL
    order = np.argsort(lo, kind="stable")
    active: List[int] = []
    ci: List[int] = []
    cj: List[int] = []
    for e in order:
        start = lo[e]
        active = [a for a in active if hi[a] >= start]
        for a in active:
            ci.append(min(a, e))
            cj.append(max(a, e))
        active.append(int(e))
    i = np.asarray(ci, dtype=np.int64)
    j = np.asarray(cj, dtype=np.int64)
    keep = _non_adjacent(i, j, n)
    return i[keep], j[keep]


def find_self_intersections(points: np.ndarray, method: str = "auto") -> np.ndarray:
    """Sorted (k, 2) array of intersecting non-adjacent edge pairs of a closed loop."""
    pts = np.asarray(points, dtype=np.float64)
    n = len(pts)
    if method == "auto":
        method = "brute" if n <= BRUTE_FORCE_MAX_EDGES else "sweep"
    require(method in ("brute", "sweep"), "unknown intersection method", method=method)
    i, j = _pairs_brute(n) if method == "brute" else _pairs_sweep(pts)
    if i.size == 0:
        return np.zeros((0, 2), dtype=np.int64)
    nxt = np.roll(pts, -1, axis=0)
    hit = segments_intersect(pts[i], nxt[i], pts[j], nxt[j])
    pairs = np.stack([i[hit], j[hit]], axis=1)
    if len(pairs):
        pairs = pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))]
    return pairs


def check_profile_validity(profile: ClosedProfile2D, method: str = "auto") -> ValidityVerdict:
    hits = find_self_intersections(profile.points, method=method)
    if len(hits):
        logger.debug("profile self-intersects at %d edge pair(s), first %s", len(hits), hits[0].tolist())
        return ValidityVerdict((SELF_INTERSECT,))
    return ValidityVerdict()


def check_mesh_validity(mesh: TriangleMesh) -> ValidityVerdict:
    require(mesh.n_faces > 0, "mesh has no faces")
    reasons: List[str] = []
    _, counts = mesh.edge_counts()
    has_open = bool(np.any(counts == 1))
    has_nonmanifold = bool(np.any(counts > 2))
    if has_open:
        reasons.append(OPEN_EDGE)
    if has_nonmanifold:
        reasons.append(NON_MANIFOLD_EDGE)
    if np.any(mesh.face_areas() < DEGENERATE_FACE_AREA):
        reasons.append(DEGENERATE_FACE)
    if not has_open and not has_nonmanifold and mesh.signed_volume() < 0:
        reasons.append(INVERTED_ORIENTATION)
    return ValidityVerdict(tuple(reasons))


def is_watertight(verdict: ValidityVerdict) -> bool:
    return OPEN_EDGE not in verdict.reasons and NON_MANIFOLD_EDGE not in verdict.reasons
