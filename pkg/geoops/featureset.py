"""
Geometric-operator (GO) feature records and design matrices.

A GoVector bundles, for one design:
  p   parameter vector (or flattened discretisation when no parameters exist)
  m   MomentVector
  k   total curvature (surface angle-deficit total, or planar turning total)
  ft  Fourier total energy

Column names: p_1..p_D, m_<p>_<q>[_<r>], k, ft. Column order is always
P -> M (graded-lex) -> K -> FT.
"""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from geoops.curvature import CurvatureSummary, total_curvature_mesh, total_curvature_profile
from geoops.errors import GeoOpsError, require
from geoops.fourier import (FourierGrid, PlanarSpectrum, planar_fd, resample_arclength, sectional_fd_3d,
                            total_energy)
from geoops.moments import RAW, VARIANTS, MomentVector, moments_2d, moments_3d, with_variant
from geoops.shapes import ClosedProfile2D, TriangleMesh, check_profile_validity

logger = logging.getLogger(__name__)

Design = Union[ClosedProfile2D, TriangleMesh]
COMPONENTS = ("p", "m", "k", "ft")
_TOKENS = {"P": "p", "M": "m", "K": "k", "FT": "ft", "F_T": "ft", "F": "ft"}


@dataclass(frozen=True)
class GoConfig:
    moment_order: int = 4
    moment_variant: str = RAW
    fd_points: int = 256
    fd_sections: int = 32
    fd_per_section: int = 64
    include_mean_energy: bool = True

    def __post_init__(self):
        require(self.moment_variant in VARIANTS, "unknown moment variant", variant=self.moment_variant)

    def to_dict(self) -> dict:
        return asdict(self)


# =========================
# Records
# =========================
@dataclass(frozen=True)
class GoVector:
    design_id: str
    p: Optional[np.ndarray] = None
    m: Optional[MomentVector] = None
    k: Optional[float] = None
    ft: Optional[float] = None

    @property
    def components(self) -> Tuple[str, ...]:
        return tuple(c for c in COMPONENTS if getattr(self, c) is not None)

    def require(self, combo: "ComboSpec") -> None:
        for c in combo.components:
            if getattr(self, c) is None:
                raise GeoOpsError("MISSING_COMPONENT", "design lacks a component the combination needs",
                                  design_id=self.design_id, component=c)

    def columns(self, combo: "ComboSpec") -> List[str]:
        self.require(combo)
        cols: List[str] = []
        if combo.include_p:
            cols.extend(f"p_{i + 1}" for i in range(len(self.p)))
        if combo.include_m:
            cols.extend(self.m.labels())
        if combo.include_k:
            cols.append("k")
        if combo.include_ft:
            cols.append("ft")
        return cols

    def row(self, combo: "ComboSpec") -> np.ndarray:
        self.require(combo)
        parts: List[np.ndarray] = []
        if combo.include_p:
            parts.append(np.asarray(self.p, dtype=np.float64))
        if combo.include_m:
            parts.append(self.m.values)
        if combo.include_k:
            parts.append(np.array([self.k]))
        if combo.include_ft:
            parts.append(np.array([self.ft]))
        return np.concatenate(parts)


@dataclass(frozen=True)
class ComboSpec:
    include_p: bool = False
    include_m: bool = False
    include_k: bool = False
    include_ft: bool = False

    def __post_init__(self):
        if not (self.include_p or self.include_m or self.include_k or self.include_ft):
            raise GeoOpsError("INVALID_ARGUMENT", "a combination needs at least one component")

    @classmethod
    def parse(cls, text: str) -> "ComboSpec":
        flags = {}
        for tok in str(text).replace("+", ",").split(","):
            tok = tok.strip().upper()
            if not tok:
                continue
            if tok not in _TOKENS:
                raise GeoOpsError("INVALID_ARGUMENT", "unknown combination token", token=tok)
            flags["include_" + _TOKENS[tok]] = True
        return cls(**flags)

    @classmethod
    def all_go_combinations(cls) -> List["ComboSpec"]:
        """The seven non-empty subsets of (M, K, FT), singles first."""
        return [cls.parse(t) for t in ("M", "K", "FT", "M,K", "M,FT", "K,FT", "M,K,FT")]

    @property
    def components(self) -> Tuple[str, ...]:
        return tuple(c for c in COMPONENTS if getattr(self, "include_" + c))

    @property
    def label(self) -> str:
        return "+".join(c.upper() for c in self.components)

    def __str__(self) -> str:
        return self.label

    def selects(self, column: str) -> bool:
        if column.startswith("p_"):
            return self.include_p
        if column.startswith("m_"):
            return self.include_m
        if column == "k":
            return self.include_k
        if column == "ft":
            return self.include_ft
        return False


# =========================
# Assembly
# =========================
@dataclass(frozen=True)
class GoDetail:
    """Intermediate descriptors behind the K and FT entries of one GoVector."""
    k: float
    ft: float
    spectrum: Union[PlanarSpectrum, FourierGrid]
    curvature: Optional[CurvatureSummary] = None


def _profile_components(profile: ClosedProfile2D, config: GoConfig):
    verdict = check_profile_validity(profile)
    if not verdict.valid:
        raise GeoOpsError(verdict.reasons[0], "design failed the validity check", reasons=verdict.code)
    prof = profile.oriented_ccw()
    m = moments_2d(prof, config.moment_order)
    spectrum = planar_fd(resample_arclength(prof, config.fd_points))
    ft = total_energy(spectrum, include_mean=config.include_mean_energy)
    return m, GoDetail(total_curvature_profile(prof), ft, spectrum)


def _mesh_components(mesh: TriangleMesh, config: GoConfig):
    m = moments_3d(mesh, config.moment_order)
    curvature = total_curvature_mesh(mesh)
    grid = sectional_fd_3d(mesh, config.fd_sections, config.fd_per_section)
    ft = total_energy(grid, include_mean=config.include_mean_energy)
    return m, GoDetail(curvature.total_curvature, ft, grid, curvature)


def describe_go(design: Design, params: Optional[Sequence[float]] = None,
                config: GoConfig = GoConfig(), design_id: str = "") -> Tuple[GoVector, GoDetail]:
    """GoVector plus the spectrum and curvature summary it was built from."""
    try:
        if isinstance(design, ClosedProfile2D):
            m, detail = _profile_components(design, config)
            p = design.flat() if params is None else np.asarray(params, dtype=np.float64)
        elif isinstance(design, TriangleMesh):
            m, detail = _mesh_components(design, config)
            p = design.vertices.reshape(-1).copy() if params is None else np.asarray(params, dtype=np.float64)
        else:
            raise GeoOpsError("INVALID_ARGUMENT", "design must be a profile or a triangle mesh",
                              kind=type(design).__name__)
        m = with_variant(m, config.moment_variant)
    except GeoOpsError as e:
        raise e.annotate(design_id=design_id) from e
    vec = GoVector(design_id, p, m, float(detail.k), float(detail.ft))
    if not (np.all(np.isfinite(vec.p)) and np.all(np.isfinite(vec.m.values))
            and np.isfinite(vec.k) and np.isfinite(vec.ft)):
        raise GeoOpsError("NAN_INPUT", "non-finite GO component", design_id=design_id)
    return vec, detail


def assemble_go(design: Design, params: Optional[Sequence[float]] = None,
                config: GoConfig = GoConfig(), design_id: str = "") -> GoVector:
    return describe_go(design, params, config, design_id)[0]


def go_frame(gos: Sequence[GoVector]) -> pd.DataFrame:
    """Raw (unstandardised) table of every present component, one row per design."""
    require(len(gos) > 0, "no GO vectors to tabulate")
    full = ComboSpec(*(c in gos[0].components for c in COMPONENTS))
    cols = gos[0].columns(full)
    rows = []
    for g in gos:
        if g.columns(full) != cols:
            raise GeoOpsError("DIMENSION_MISMATCH", "designs disagree on feature columns", design_id=g.design_id)
        rows.append(g.row(full))
    frame = pd.DataFrame(np.vstack(rows), columns=cols)
    frame.insert(0, "design_id", [g.design_id for g in gos])
    return frame


def signed_log(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return np.sign(x) * np.log10(1.0 + np.abs(x))


# =========================
# Design matrix
# =========================
CONSTANT_STD_TOL = 1e-12


def _standardisation(values: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    mean = values.mean(axis=0)
    std = values.std(axis=0)
    constant = std <= CONSTANT_STD_TOL * np.maximum(1.0, np.abs(mean))
    std = np.where(constant, 1.0, std)
    return mean, std


@dataclass(frozen=True)
class DesignMatrix:
    values: np.ndarray
    column_names: Tuple[str, ...]
    design_ids: Tuple[str, ...]
    combo: Optional[ComboSpec] = None
    mean: Optional[np.ndarray] = None
    std: Optional[np.ndarray] = None
    transform: str = "none"
    meta: Dict[str, object] = field(default_factory=dict, compare=False)

    @property
    def standardised(self) -> bool:
        return self.mean is not None

    @property
    def shape(self) -> Tuple[int, int]:
        return self.values.shape

    def __len__(self) -> int:
        return len(self.values)

    @classmethod
    def from_values(cls, values: np.ndarray, column_names: Sequence[str], design_ids: Sequence[str],
                    combo: Optional[ComboSpec] = None, standardise: bool = True,
                    transform: str = "none") -> "DesignMatrix":
        vals = np.asarray(values, dtype=np.float64)
        require(vals.ndim == 2 and vals.shape[1] == len(column_names), "values do not match column names")
        require(transform in ("none", "signed_log"), "unknown transform", transform=transform)
        if transform == "signed_log":
            m_cols = np.array([c.startswith("m_") for c in column_names])
            vals = vals.copy()
            vals[:, m_cols] = signed_log(vals[:, m_cols])
        mean = std = None
        if standardise:
            mean, std = _standardisation(vals)
            vals = (vals - mean) / std
        return cls(vals, tuple(column_names), tuple(str(d) for d in design_ids), combo, mean, std, transform)

    @classmethod
    def from_frame(cls, frame: pd.DataFrame, combo: ComboSpec, standardise: bool = True,
                   transform: str = "none") -> "DesignMatrix":
        cols = [c for c in frame.columns if combo.selects(c)]
        for comp in combo.components:
            if not any(ComboSpec(**{"include_" + comp: True}).selects(c) for c in cols):
                raise GeoOpsError("MISSING_COMPONENT", "feature table lacks a component", component=comp)
        ids = frame["design_id"].astype(str).tolist() if "design_id" in frame.columns \
            else [str(i) for i in range(len(frame))]
        return cls.from_values(frame[cols].to_numpy(dtype=np.float64), cols, ids, combo, standardise, transform)

    def select(self, columns: Sequence[str]) -> "DesignMatrix":
        index = {c: i for i, c in enumerate(self.column_names)}
        missing = [c for c in columns if c not in index]
        if missing:
            raise GeoOpsError("MISSING_COMPONENT", "column not in matrix", component=missing[0])
        idx = [index[c] for c in columns]
        return replace(self, values=self.values[:, idx], column_names=tuple(columns), combo=None,
                       mean=None if self.mean is None else self.mean[idx],
                       std=None if self.std is None else self.std[idx])

    def standardise_rows(self, rows: np.ndarray) -> np.ndarray:
        rows = np.asarray(rows, dtype=np.float64)
        if self.transform == "signed_log":
            m_cols = np.array([c.startswith("m_") for c in self.column_names])
            rows = rows.copy()
            rows[..., m_cols] = signed_log(rows[..., m_cols])
        if not self.standardised:
            return rows
        return (rows - self.mean) / self.std

    def unstandardise(self, rows: np.ndarray) -> np.ndarray:
        """Map standardised rows back to the (possibly signed-log) feature scale."""
        rows = np.asarray(rows, dtype=np.float64)
        if not self.standardised:
            return rows
        return rows * self.std + self.mean

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.values, columns=list(self.column_names))
        frame.insert(0, "design_id", list(self.design_ids))
        return frame

    def sidecar(self) -> dict:
        out = {"combo": self.combo.label if self.combo else None, "columns": list(self.column_names),
               "standardised": self.standardised, "transform": self.transform,
               "n_rows": len(self.values)}
        if self.standardised:
            out["mean"] = self.mean.tolist()
            out["std"] = self.std.tolist()
        out.update(self.meta)
        return out


def build_matrix(gos: Sequence[GoVector], combo: ComboSpec, standardise: bool = True,
                 transform: str = "none") -> DesignMatrix:
    require(len(gos) > 0, "no GO vectors")
    cols = gos[0].columns(combo)
    rows = []
    for g in gos:
        if g.columns(combo) != cols:
            raise GeoOpsError("DIMENSION_MISMATCH", "designs disagree on feature columns", design_id=g.design_id)
        rows.append(g.row(combo))
    return DesignMatrix.from_values(np.vstack(rows), cols, [g.design_id for g in gos], combo,
                                    standardise, transform)


# =========================
# Sampling
# =========================
def lhs_sample(dim: int, n: int, seed: int) -> np.ndarray:
    """Latin hypercube in [0,1]^dim: one point per stratum [k/n, (k+1)/n) in every dimension."""
    require(dim >= 1 and n >= 1, "lhs needs dim >= 1 and n >= 1", dim=dim, n=n)
    rng = np.random.default_rng(seed)
    out = np.empty((n, dim))
    for d in range(dim):
        strata = rng.permutation(n)
        out[:, d] = (strata + rng.random(n)) / n
    return out
