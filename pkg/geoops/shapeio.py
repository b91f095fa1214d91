"""
Readers and writers for profile and mesh files.

Formats:
  UIUC .dat    name line + "x y" rows, Selig ordering (TE -> upper -> LE -> lower -> TE)
  OBJ          `v` and triangular `f` records; other records ignored
  STL_ASCII    solid / facet / outer loop / vertex ... layout
  STL_BINARY   80-byte header, uint32 count, 50-byte little-endian records

STL stores every facet corner separately; corners within 1e-9 model units
are merged back into shared vertices on load.
"""
from __future__ import annotations

import logging
import pathlib
import re
from typing import List, Optional, Tuple, Union

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from geoops.errors import GeoOpsError, require
from geoops.shapes import POINT_TOL, ClosedProfile2D, TriangleMesh

logger = logging.getLogger(__name__)

OBJ = "OBJ"
STL_ASCII = "STL_ASCII"
STL_BINARY = "STL_BINARY"
MESH_FORMATS = (OBJ, STL_ASCII, STL_BINARY)
MERGE_TOL = 1e-9

_STL_RECORD = np.dtype([
    ("normal", "<f4", (3,)),
    ("corners", "<f4", (3, 3)),
    ("attr", "<u2"),
])

PathLike = Union[str, pathlib.Path]


def _as_text(data: Union[str, bytes]) -> str:
    if isinstance(data, bytes):
        return data.decode("utf-8", errors="replace")
    return data


# =========================
# UIUC profiles
# =========================
def load_uiuc_dat(text: Union[str, bytes]) -> Tuple[str, ClosedProfile2D]:
    lines = _as_text(text).splitlines()
    if not lines:
        raise GeoOpsError("PARSE_ERROR", "empty profile file", line=1)
    name = lines[0].strip()
    coords: List[Tuple[float, float]] = []
    line_nos: List[int] = []
    for no, raw in enumerate(lines[1:], start=2):
        tokens = raw.split()
        if not tokens:
            continue
        if len(tokens) != 2:
            raise GeoOpsError("PARSE_ERROR", "expected an 'x y' pair", line=no)
        try:
            x, y = float(tokens[0]), float(tokens[1])
        except ValueError:
            raise GeoOpsError("PARSE_ERROR", "non-numeric coordinate", line=no) from None
        if not (np.isfinite(x) and np.isfinite(y)):
            raise GeoOpsError("PARSE_ERROR", "non-finite coordinate", line=no)
        coords.append((x, y))
        line_nos.append(no)

    if len(coords) >= 2 and np.hypot(coords[0][0] - coords[-1][0], coords[0][1] - coords[-1][1]) <= POINT_TOL:
        coords.pop()
        line_nos.pop()
    if len(coords) < 3:
        raise GeoOpsError("TOO_FEW_POINTS", "profile needs at least 3 coordinate rows", count=len(coords))

    pts = np.asarray(coords, dtype=np.float64)
    steps = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    dup = np.flatnonzero(steps <= POINT_TOL)
    if dup.size:
        raise GeoOpsError("PARSE_ERROR", "repeated consecutive point", line=line_nos[int(dup[0]) + 1])
    profile = ClosedProfile2D(pts, closed=True).oriented_ccw()
    return name, profile


def dump_uiuc_dat(name: str, profile: ClosedProfile2D) -> str:
    rows = [name.strip() or "profile"]
    rows.extend(f"{x:.17g} {y:.17g}" for x, y in profile.points)
    return "\n".join(rows) + "\n"


def read_profile(path: PathLike) -> Tuple[str, ClosedProfile2D]:
    return load_uiuc_dat(pathlib.Path(path).read_bytes())


# =========================
# Meshes: parsing
# =========================
def merge_vertices(corners: np.ndarray, tol: float = MERGE_TOL) -> Tuple[np.ndarray, np.ndarray]:
    """Collapse corner points closer than ``tol`` into shared vertices.

    Returns (vertices, index per corner); vertices keep first-occurrence order.
    """
    n = len(corners)
    pairs = cKDTree(corners).query_pairs(tol, output_type="ndarray")
    graph = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n)) if len(pairs) \
        else coo_matrix((n, n))
    _, labels = connected_components(graph, directed=False)
    _, first = np.unique(labels, return_index=True)
    order = np.argsort(first, kind="stable")
    remap = np.empty(len(first), dtype=np.int64)
    remap[order] = np.arange(len(first))
    return corners[np.sort(first)], remap[labels]


def _mesh_from_corners(corners: np.ndarray) -> TriangleMesh:
    vertices, index = merge_vertices(corners.reshape(-1, 3))
    faces = index.reshape(-1, 3)
    try:
        return TriangleMesh(vertices, faces)
    except GeoOpsError as e:
        raise GeoOpsError("PARSE_ERROR", f"triangles collapse after vertex merge: {e.message}") from e


def _obj_index(token: str, n_vertices: int, line: int) -> int:
    head = token.split("/")[0]
    try:
        idx = int(head)
    except ValueError:
        raise GeoOpsError("PARSE_ERROR", "bad face index", line=line) from None
    if idx < 0:
        idx = n_vertices + idx
    else:
        idx -= 1
    if not (0 <= idx < n_vertices):
        raise GeoOpsError("PARSE_ERROR", "face index out of range", line=line)
    return idx


def parse_obj(text: Union[str, bytes]) -> TriangleMesh:
    vertices: List[List[float]] = []
    faces: List[List[int]] = []
    for no, raw in enumerate(_as_text(text).splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        tag = tokens[0]
        if tag == "v":
            if len(tokens) < 4:
                raise GeoOpsError("PARSE_ERROR", "vertex needs 3 coordinates", line=no)
            try:
                vertices.append([float(t) for t in tokens[1:4]])
            except ValueError:
                raise GeoOpsError("PARSE_ERROR", "non-numeric vertex coordinate", line=no) from None
        elif tag == "f":
            refs = tokens[1:]
            if len(refs) > 3:
                raise GeoOpsError("NON_TRIANGULAR_FACE", "only triangular faces are supported",
                                  line=no, corners=len(refs))
            if len(refs) < 3:
                raise GeoOpsError("PARSE_ERROR", "face needs 3 vertices", line=no)
            faces.append([_obj_index(t, len(vertices), no) for t in refs])
    if not faces:
        raise GeoOpsError("PARSE_ERROR", "no faces found")
    try:
        return TriangleMesh(np.asarray(vertices, dtype=np.float64), np.asarray(faces, dtype=np.int64))
    except GeoOpsError as e:
        raise GeoOpsError("PARSE_ERROR", e.message, **e.details) from e


_STL_VERTEX = re.compile(r"^\s*vertex\s+(\S+)\s+(\S+)\s+(\S+)\s*$")


def parse_stl_ascii(text: Union[str, bytes]) -> TriangleMesh:
    lines = _as_text(text).splitlines()
    if not lines or not lines[0].lstrip().lower().startswith("solid"):
        raise GeoOpsError("PARSE_ERROR", "ASCII STL must start with 'solid'", line=1)
    corners: List[List[float]] = []
    facets = 0
    for no, raw in enumerate(lines, start=1):
        stripped = raw.strip().lower()
        if stripped.startswith("facet"):
            facets += 1
        elif stripped.startswith("vertex"):
            m = _STL_VERTEX.match(raw)
            if not m:
                raise GeoOpsError("PARSE_ERROR", "malformed vertex record", line=no)
            try:
                corners.append([float(m.group(1)), float(m.group(2)), float(m.group(3))])
            except ValueError:
                raise GeoOpsError("PARSE_ERROR", "non-numeric vertex coordinate", line=no) from None
    if not corners or len(corners) != 3 * facets:
        raise GeoOpsError("PARSE_ERROR", "facet/vertex count mismatch", facets=facets, vertices=len(corners))
    return _mesh_from_corners(np.asarray(corners, dtype=np.float64))


def parse_stl_binary(data: bytes) -> TriangleMesh:
    if len(data) < 84:
        raise GeoOpsError("PARSE_ERROR", "binary STL shorter than its header", size=len(data))
    count = int(np.frombuffer(data, dtype="<u4", count=1, offset=80)[0])
    expected = 84 + count * _STL_RECORD.itemsize
    if len(data) != expected or count == 0:
        raise GeoOpsError("PARSE_ERROR", "binary STL size does not match facet count",
                          facets=count, size=len(data), expected=expected)
    records = np.frombuffer(data, dtype=_STL_RECORD, count=count, offset=84)
    corners = records["corners"].astype(np.float64)
    if not np.all(np.isfinite(corners)):
        raise GeoOpsError("PARSE_ERROR", "non-finite vertex coordinate")
    return _mesh_from_corners(corners)


def sniff_mesh_format(path: PathLike, data: Optional[bytes] = None) -> str:
    p = pathlib.Path(path)
    suffix = p.suffix.lower()
    if suffix == ".obj":
        return OBJ
    if suffix != ".stl":
        raise GeoOpsError("INVALID_ARGUMENT", "cannot infer mesh format from suffix", path=str(p))
    data = p.read_bytes() if data is None else data
    if len(data) >= 84:
        count = int(np.frombuffer(data, dtype="<u4", count=1, offset=80)[0])
        if len(data) == 84 + count * _STL_RECORD.itemsize:
            return STL_BINARY
    if data.lstrip()[:5].lower() == b"solid":
        return STL_ASCII
    return STL_BINARY


def load_mesh(path: PathLike, format: Optional[str] = None) -> TriangleMesh:
    p = pathlib.Path(path)
    if not p.is_file():
        raise GeoOpsError("PARSE_ERROR", "mesh file not found", path=str(p))
    data = p.read_bytes()
    fmt = (format or sniff_mesh_format(p, data)).upper()
    require(fmt in MESH_FORMATS, "unknown mesh format", format=fmt)
    if fmt == OBJ:
        mesh = parse_obj(data)
    elif fmt == STL_ASCII:
        mesh = parse_stl_ascii(data)
    else:
        mesh = parse_stl_binary(data)
    logger.debug("loaded %s: %d vertices, %d faces", p.name, mesh.n_vertices, mesh.n_faces)
    return mesh


# =========================
# Meshes: writing
# =========================
def dump_obj(mesh: TriangleMesh) -> str:
    rows = [f"v {x:.17g} {y:.17g} {z:.17g}" for x, y, z in mesh.vertices]
    rows.extend(f"f {a + 1} {b + 1} {c + 1}" for a, b, c in mesh.faces)
    return "\n".join(rows) + "\n"


def _unit_normals(mesh: TriangleMesh) -> np.ndarray:
    n = mesh.face_normals()
    length = np.linalg.norm(n, axis=1, keepdims=True)
    return np.divide(n, length, out=np.zeros_like(n), where=length > 0)


def dump_stl_ascii(mesh: TriangleMesh, name: str = "geoops") -> str:
    rows = [f"solid {name}"]
    normals = _unit_normals(mesh)
    for face, nrm in zip(mesh.faces, normals):
        rows.append(f"  facet normal {nrm[0]:.17g} {nrm[1]:.17g} {nrm[2]:.17g}")
        rows.append("    outer loop")
        for v in mesh.vertices[face]:
            rows.append(f"      vertex {v[0]:.17g} {v[1]:.17g} {v[2]:.17g}")
        rows.append("    endloop")
        rows.append("  endfacet")
    rows.append(f"endsolid {name}")
    return "\n".join(rows) + "\n"


def dump_stl_binary(mesh: TriangleMesh, header: bytes = b"geoops binary STL") -> bytes:
    records = np.zeros(mesh.n_faces, dtype=_STL_RECORD)
    records["normal"] = _unit_normals(mesh)
    records["corners"] = mesh.vertices[mesh.faces]
    head = header[:80].ljust(80, b" ")
    return head + np.uint32(mesh.n_faces).astype("<u4").tobytes() + records.tobytes()


def save_mesh(path: PathLike, mesh: TriangleMesh, format: Optional[str] = None) -> pathlib.Path:
    p = pathlib.Path(path)
    fmt = (format or (OBJ if p.suffix.lower() == ".obj" else STL_BINARY)).upper()
    require(fmt in MESH_FORMATS, "unknown mesh format", format=fmt)
    p.parent.mkdir(parents=True, exist_ok=True)
    if fmt == OBJ:
        p.write_text(dump_obj(mesh), encoding="utf-8", newline="\n")
    elif fmt == STL_ASCII:
        p.write_text(dump_stl_ascii(mesh), encoding="utf-8", newline="\n")
    else:
        p.write_bytes(dump_stl_binary(mesh))
    return p
