"""
Quality-weighted DPP kernels and batch scores for generated designs.

L(i, j) = k(x_i, x_j) * (q_i * q_j) ** gamma0 with an RBF similarity k.
The loss term is -(1/n) * sum(log lambda_i) over the eigenvalues of L,
floored at 1e-12.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
from scipy import linalg
from scipy.spatial.distance import cdist

from geoops.errors import GeoOpsError, require
from geoops.featureset import ComboSpec, DesignMatrix, GoVector, build_matrix
from geoops.subspace import EIGEN_FLOOR, diversity_score, median_heuristic, rbf_similarity

logger = logging.getLogger(__name__)

PSD_TOL = 1e-8
QUALITY_COMBO = ComboSpec(include_m=True, include_k=True, include_ft=True)


@dataclass(frozen=True)
class DppKernel:
    L: np.ndarray
    gamma0: float
    kernel_length: float

    @property
    def eigenvalues(self) -> np.ndarray:
        return linalg.eigvalsh(self.L)

    @property
    def degenerate(self) -> bool:
        return bool(np.any(self.eigenvalues < EIGEN_FLOOR))


def build_dpp_kernel(batch: np.ndarray, qualities: Sequence[float], gamma0: float = 1.0,
                     kernel_length: Optional[float] = None) -> DppKernel:
    rows = np.asarray(batch, dtype=np.float64)
    rows = rows[:, None] if rows.ndim == 1 else rows
    q = np.asarray(qualities, dtype=np.float64).reshape(-1)
    require(len(rows) >= 2, "DPP batch needs at least 2 designs", n=len(rows))
    require(len(q) == len(rows), "one quality per design required", designs=len(rows), qualities=len(q))
    if not (np.all(np.isfinite(rows)) and np.all(np.isfinite(q))):
        raise GeoOpsError("NAN_INPUT", "batch and qualities must be finite")
    if np.any(q < 0):
        raise GeoOpsError("NEGATIVE_QUALITY", "qualities must be nonnegative", index=int(np.argmin(q)))
    length = median_heuristic(rows) if kernel_length is None else float(kernel_length)
    weight = np.power(np.outer(q, q), gamma0)
    L = rbf_similarity(rows, length) * weight
    L = 0.5 * (L + L.T)
    lam_min = float(linalg.eigvalsh(L)[0])
    if lam_min < -PSD_TOL * max(1.0, float(np.max(np.abs(L)))):
        logger.warning("dpp: kernel has eigenvalue %.3g below zero", lam_min)
    return DppKernel(L, float(gamma0), length)


def dpp_loss_term(kernel: DppKernel) -> float:
    lam = kernel.eigenvalues
    if np.any(lam < EIGEN_FLOOR):
        logger.warning("dpp: degenerate kernel, %d eigenvalues floored at %g",
                       int(np.sum(lam < EIGEN_FLOOR)), EIGEN_FLOOR)
    return -float(np.mean(np.log(np.maximum(lam, EIGEN_FLOOR))))


# =========================
# Quality from GO components
# =========================
def go_quality(x: Union[GoVector, np.ndarray], reference: Optional[DesignMatrix] = None) -> float:
    """L1 norm of the standardised (M, K, FT) sub-vector.

    A GoVector is standardised with ``reference`` (a standardised matrix
    holding the M, K and FT columns); a plain array is taken as already
    standardised.
    """
    if isinstance(x, GoVector):
        cols = x.columns(QUALITY_COMBO)
        raw = x.row(QUALITY_COMBO)
        if reference is None:
            raise GeoOpsError("INVALID_ARGUMENT", "raw GO vector needs a standardisation reference",
                              design_id=x.design_id)
        if not reference.standardised:
            raise GeoOpsError("INVALID_ARGUMENT", "reference matrix is not standardised")
        vec = reference.select(cols).standardise_rows(raw)
    else:
        vec = np.asarray(x, dtype=np.float64).reshape(-1)
        require(vec.size > 0, "empty component vector")
    if not np.all(np.isfinite(vec)):
        raise GeoOpsError("NAN_INPUT", "non-finite GO component")
    return float(np.sum(np.abs(vec)))


def go_qualities(gos: Sequence[GoVector]) -> np.ndarray:
    """Qualities of a batch, standardised against the batch itself."""
    matrix = build_matrix(gos, QUALITY_COMBO, standardise=True)
    return np.sum(np.abs(matrix.values), axis=1)


# =========================
# Batch scores
# =========================
@dataclass(frozen=True)
class BatchScores:
    diversity: float
    quality: float
    novelty: float
    n_generated: int
    n_training: int
    gamma0: Optional[float]
    kernel_length: float
    dpp_loss: Optional[float] = None

    def to_json_dict(self) -> dict:
        out = {"diversity": self.diversity, "quality": self.quality, "novelty": self.novelty,
               "n_generated": self.n_generated, "n_training": self.n_training,
               "gamma0": self.gamma0, "kernel_length": self.kernel_length}
        if self.dpp_loss is not None:
            out["dpp_loss"] = self.dpp_loss
        return out


def novelty_score(generated: np.ndarray, training: np.ndarray) -> float:
    g = np.atleast_2d(np.asarray(generated, dtype=np.float64))
    t = np.atleast_2d(np.asarray(training, dtype=np.float64))
    if g.shape[1] != t.shape[1]:
        raise GeoOpsError("DIMENSION_MISMATCH", "generated and training widths differ",
                          generated=g.shape[1], training=t.shape[1])
    return float(np.mean(cdist(g, t).min(axis=1)))


def batch_scores(generated: np.ndarray, training: np.ndarray, qualities: Sequence[float],
                 kernel_length: Optional[float] = None, gamma0: Optional[float] = None) -> BatchScores:
    """Diversity, mean quality and novelty of a generated batch.

    With ``gamma0`` set, the DPP loss term of the quality-weighted kernel is
    reported as well.
    """
    g = np.atleast_2d(np.asarray(generated, dtype=np.float64))
    t = np.atleast_2d(np.asarray(training, dtype=np.float64))
    q = np.asarray(qualities, dtype=np.float64).reshape(-1)
    require(len(g) >= 1 and len(t) >= 1, "both sets must be non-empty", generated=len(g), training=len(t))
    require(len(q) == len(g), "one quality per generated design", generated=len(g), qualities=len(q))
    length = median_heuristic(g) if kernel_length is None else float(kernel_length)
    diversity = diversity_score(g, length) if len(g) >= 2 else 0.0
    novelty = novelty_score(g, t)
    loss = None
    if gamma0 is not None and len(g) >= 2:
        loss = dpp_loss_term(build_dpp_kernel(g, q, gamma0, length))
    logger.debug("batch scores: diversity=%.4g novelty=%.4g", diversity, novelty)
    return BatchScores(diversity, float(np.mean(q)), novelty, len(g), len(t), gamma0, length, loss)
