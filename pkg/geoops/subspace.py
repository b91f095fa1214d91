"""
Karhunen-Loeve (KLE) subspaces of design matrices, latent sampling and
batch scoring of the decoded designs.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import partial
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy import linalg
from scipy.spatial.distance import pdist, squareform

from geoops.batch import map_ordered
from geoops.errors import GeoOpsError, require
from geoops.featureset import DesignMatrix
from geoops.shapes import (AirfoilParams, ClosedProfile2D, TriangleMesh, ValidityVerdict,
                           check_mesh_validity, check_profile_validity, generate_airfoil,
                           profile_from_coordinates)

logger = logging.getLogger(__name__)

EIGEN_FLOOR = 1e-12
NEGATIVE_EIGEN_TOL = 1e-10
DECODE_FAIL = "DECODE_FAIL"

Rows = Union[DesignMatrix, np.ndarray]


def _as_array(data: Rows) -> np.ndarray:
    return np.asarray(data.values if isinstance(data, DesignMatrix) else data, dtype=np.float64)


@dataclass(frozen=True)
class KleBasis:
    mean: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    retained_dims: int
    variance_threshold: float

    @property
    def dim(self) -> int:
        return len(self.mean)

    @property
    def retained_values(self) -> np.ndarray:
        return self.eigenvalues[: self.retained_dims]

    @property
    def retained_vectors(self) -> np.ndarray:
        return self.eigenvectors[:, : self.retained_dims]

    def cumulative_variance(self) -> np.ndarray:
        total = float(np.sum(self.eigenvalues))
        return np.cumsum(self.eigenvalues) / total

    def eigen_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"mode": np.arange(1, len(self.eigenvalues) + 1),
                             "eigenvalue": self.eigenvalues,
                             "cumulative": self.cumulative_variance()})

    def to_json_dict(self) -> dict:
        return {"eigenvalues": self.eigenvalues, "cumulative": self.cumulative_variance(),
                "retained_dims": self.retained_dims, "variance_threshold": self.variance_threshold}

    def vectors_frame(self, column_names: Optional[Sequence[str]] = None) -> pd.DataFrame:
        cols = [f"mode_{i + 1}" for i in range(self.eigenvectors.shape[1])]
        frame = pd.DataFrame(self.eigenvectors, columns=cols)
        frame.insert(0, "feature", list(column_names) if column_names is not None else np.arange(self.dim))
        return frame


def _retained(eigenvalues: np.ndarray, threshold: float) -> int:
    cum = np.cumsum(eigenvalues) / np.sum(eigenvalues)
    return int(np.argmax(cum >= threshold - 1e-12)) + 1


def fit_kle(data: Rows, threshold: float = 0.95) -> KleBasis:
    X = _as_array(data)
    require(X.ndim == 2 and len(X) >= 2, "KLE needs at least 2 rows", shape=X.shape)
    require(0.0 < threshold <= 1.0, "threshold must lie in (0, 1]", threshold=threshold)
    n, d = X.shape
    mean = X.mean(axis=0)
    Xc = X - mean
    scale = max(1.0, float(np.max(np.abs(X))) ** 2)
    if float(np.sum(Xc * Xc)) / (n - 1) <= 1e-24 * scale:
        raise GeoOpsError("DEGENERATE_DATA", "all rows are identical", n_rows=n)

    modes = min(n - 1, d)
    if d > n:
        gram = Xc @ Xc.T / (n - 1)
        lam, U = linalg.eigh(gram)
        lam, U = lam[::-1], U[:, ::-1]
    else:
        cov = Xc.T @ Xc / (n - 1)
        lam, V = linalg.eigh(cov)
        lam, V = lam[::-1], V[:, ::-1]

    lam = lam[:modes]
    floor = -NEGATIVE_EIGEN_TOL * max(float(lam[0]), 1.0)
    if np.any(lam < floor):
        raise GeoOpsError("ILL_CONDITIONED", "covariance has a significantly negative eigenvalue",
                          eigenvalue=float(lam.min()))
    lam = np.maximum(lam, 0.0)

    if d > n:
        keep = lam > EIGEN_FLOOR * max(float(lam[0]), 1e-300)
        lam = lam[keep]
        V = Xc.T @ U[:, :modes][:, keep] / np.sqrt((n - 1) * lam)
    else:
        V = V[:, :modes]

    retained = _retained(lam, threshold)
    logger.debug("kle: %d modes, %d retained at %.3f", len(lam), retained, threshold)
    return KleBasis(mean, lam, V, retained, float(threshold))


def project(basis: KleBasis, row: np.ndarray) -> np.ndarray:
    row = np.asarray(row, dtype=np.float64)
    if row.shape[-1] != basis.dim:
        raise GeoOpsError("DIMENSION_MISMATCH", "row length differs from basis", expected=basis.dim,
                          got=int(row.shape[-1]))
    return (row - basis.mean) @ basis.retained_vectors


def reconstruct(basis: KleBasis, latent: np.ndarray) -> np.ndarray:
    latent = np.asarray(latent, dtype=np.float64)
    if latent.shape[-1] != basis.retained_dims:
        raise GeoOpsError("DIMENSION_MISMATCH", "latent length differs from retained dims",
                          expected=basis.retained_dims, got=int(latent.shape[-1]))
    return basis.mean + latent @ basis.retained_vectors.T


def sample_latent(basis: KleBasis, n: int, seed: int, scale: float = 1.0) -> np.ndarray:
    """Uniform draws in +-scale*sqrt(3*lambda_i); per-mode variance is lambda_i at scale 1."""
    require(n >= 1, "need n >= 1", n=n)
    require(scale > 0, "scale must be positive", scale=scale)
    rng = np.random.default_rng(seed)
    half = scale * np.sqrt(3.0 * basis.retained_values)
    return rng.uniform(-1.0, 1.0, size=(n, basis.retained_dims)) * half


# =========================
# Batch scores
# =========================
def median_heuristic(rows: np.ndarray) -> float:
    d = pdist(np.asarray(rows, dtype=np.float64))
    med = float(np.median(d)) if d.size else 0.0
    return med if med > 0 else 1.0


def rbf_similarity(rows: np.ndarray, kernel_length: float) -> np.ndarray:
    require(kernel_length > 0, "kernel length must be positive", kernel_length=kernel_length)
    sq = squareform(pdist(np.asarray(rows, dtype=np.float64), "sqeuclidean"))
    return np.exp(-sq / (2.0 * kernel_length ** 2))


def floored_logdet(matrix: np.ndarray) -> Tuple[float, bool]:
    lam = linalg.eigvalsh(matrix)
    degenerate = bool(np.any(lam < EIGEN_FLOOR))
    return float(np.sum(np.log(np.maximum(lam, EIGEN_FLOOR)))), degenerate


def diversity_score(rows: np.ndarray, kernel_length: Optional[float] = None) -> float:
    rows = np.asarray(rows, dtype=np.float64)
    require(len(rows) >= 2, "diversity needs at least 2 rows", n=len(rows))
    length = median_heuristic(rows) if kernel_length is None else kernel_length
    logdet, degenerate = floored_logdet(rbf_similarity(rows, length))
    if degenerate:
        logger.debug("diversity: similarity eigenvalues floored at %g", EIGEN_FLOOR)
    return logdet / len(rows)


# =========================
# Validity of decoded designs
# =========================
Decoded = Union[ClosedProfile2D, TriangleMesh]


def decode_airfoil_params(row: np.ndarray, columns: Optional[slice] = None) -> ClosedProfile2D:
    vals = np.asarray(row, dtype=np.float64)
    if columns is not None:
        vals = vals[columns]
    return generate_airfoil(AirfoilParams(tuple(vals)))


def decode_profile_coordinates(row: np.ndarray, columns: Optional[slice] = None) -> ClosedProfile2D:
    vals = np.asarray(row, dtype=np.float64)
    if columns is not None:
        vals = vals[columns]
    return profile_from_coordinates(vals)


def default_checker(design: Decoded) -> ValidityVerdict:
    if isinstance(design, TriangleMesh):
        return check_mesh_validity(design)
    return check_profile_validity(design)


def design_verdict(row: np.ndarray, decode: Callable[[np.ndarray], Decoded],
                   checker: Callable[[Decoded], ValidityVerdict] = default_checker) -> str:
    try:
        design = decode(row)
    except GeoOpsError as e:
        logger.debug("decode failed: %s", e)
        return DECODE_FAIL
    return checker(design).code


@dataclass(frozen=True)
class ValidityReport:
    codes: Tuple[str, ...]

    @property
    def n_invalid(self) -> int:
        return sum(1 for c in self.codes if c != "VALID")

    @property
    def n_decode_fail(self) -> int:
        return sum(1 for c in self.codes if c == DECODE_FAIL)

    @property
    def rate(self) -> float:
        return self.n_invalid / len(self.codes) if self.codes else 0.0

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"sample": np.arange(len(self.codes)), "verdict": list(self.codes)})


def validity_rate(latents: np.ndarray, basis: KleBasis, decode: Callable[[np.ndarray], Decoded],
                  checker: Callable[[Decoded], ValidityVerdict] = default_checker,
                  jobs: int = 1) -> ValidityReport:
    """Fraction of decoded latent samples that are invalid (decode failures included)."""
    rows = reconstruct(basis, np.atleast_2d(latents))
    codes = map_ordered(partial(design_verdict, decode=decode, checker=checker), list(rows), jobs=jobs)
    report = ValidityReport(tuple(codes))
    logger.debug("validity: %d/%d invalid (%d decode failures)", report.n_invalid, len(codes),
                 report.n_decode_fail)
    return report
