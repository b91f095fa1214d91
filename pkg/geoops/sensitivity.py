"""
Variance-based (Sobol) sensitivity analysis.

Sampling: one scrambled Sobol stream of dimension 2d; the first d columns
form A, the last d form B, and AB_i is A with column i taken from B.

Estimators (outputs centred on the pooled A u B mean, V = pooled variance):
  first order  S_i  = mean(f_B * (f_ABi - f_A)) / V
  total order  S_Ti = mean((f_A - f_ABi)^2) / (2 V)
Vector outputs sum numerators and variances over output columns
(trace of the covariance decomposition).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from functools import partial
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.stats import qmc

from geoops.batch import map_ordered
from geoops.errors import GeoOpsError, require
from geoops.featureset import GoConfig, assemble_go

logger = logging.getLogger(__name__)

SCALAR = "SCALAR"
VECTOR = "VECTOR"
CLAMP_LOW, CLAMP_HIGH = -0.05, 1.05
DEFAULT_EPSILON = 0.05
ZERO_VARIANCE_TOL = 1e-14
GO_QOIS = ("M", "K", "FT", "M+K", "M+FT", "K+FT", "M+K+FT")


@dataclass(frozen=True)
class SaltelliDesign:
    A: np.ndarray
    B: np.ndarray
    AB: np.ndarray
    seed: int

    @property
    def d(self) -> int:
        return self.A.shape[1]

    @property
    def n(self) -> int:
        return self.A.shape[0]

    def evaluation_rows(self) -> np.ndarray:
        """A, B, AB_1 .. AB_d stacked: n * (d + 2) rows."""
        return np.vstack([self.A, self.B, *self.AB])

    def split(self, values: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Inverse of evaluation_rows for an output array with one leading entry per row."""
        values = np.asarray(values)
        n, d = self.n, self.d
        require(len(values) == n * (d + 2), "output count must be n*(d+2)", got=len(values))
        tail = values[2 * n:]
        return values[:n], values[n:2 * n], tail.reshape((d, n) + values.shape[1:])


def saltelli_design(d: int, n: int, seed: int) -> SaltelliDesign:
    require(d >= 1, "need d >= 1", d=d)
    require(n >= 64, "need n >= 64 base samples", n=n)
    sampler = qmc.Sobol(d=2 * d, scramble=True, seed=seed)
    m = int(np.log2(n))
    base = sampler.random_base2(m) if 2 ** m == n else sampler.random(n)
    A, B = base[:, :d].copy(), base[:, d:].copy()
    AB = np.repeat(A[None, :, :], d, axis=0)
    for i in range(d):
        AB[i, :, i] = B[:, i]
    return SaltelliDesign(A, B, AB, seed)


@dataclass(frozen=True)
class SobolReport:
    first_order_raw: np.ndarray
    total_order_raw: np.ndarray
    qoi_kind: str = SCALAR
    epsilon: float = DEFAULT_EPSILON
    use_total: bool = True
    names: Tuple[str, ...] = ()
    qoi: str = ""
    n_rows: int = 0
    n_excluded: int = 0
    meta: Dict[str, object] = field(default_factory=dict, compare=False)

    @property
    def first_order(self) -> np.ndarray:
        return np.clip(self.first_order_raw, CLAMP_LOW, CLAMP_HIGH)

    @property
    def total_order(self) -> np.ndarray:
        return np.clip(self.total_order_raw, CLAMP_LOW, CLAMP_HIGH)

    @property
    def selected_mask(self) -> np.ndarray:
        return select_features(self, self.epsilon, self.use_total)

    def with_epsilon(self, epsilon: float) -> "SobolReport":
        return replace(self, epsilon=float(epsilon))

    def to_frame(self) -> pd.DataFrame:
        names = list(self.names) or [f"x{i + 1}" for i in range(len(self.first_order_raw))]
        return pd.DataFrame({
            "parameter": names,
            "S": self.first_order,
            "S_T": self.total_order,
            "S_raw": self.first_order_raw,
            "S_T_raw": self.total_order_raw,
            "selected": self.selected_mask.astype(int),
        })

    def to_json_dict(self) -> dict:
        return {"qoi": self.qoi, "qoi_kind": self.qoi_kind, "epsilon": self.epsilon,
                "index_family": "total" if self.use_total else "first",
                "first_order": self.first_order.tolist(), "total_order": self.total_order.tolist(),
                "first_order_raw": self.first_order_raw.tolist(),
                "total_order_raw": self.total_order_raw.tolist(),
                "selected": self.selected_mask.astype(int).tolist(),
                "n_rows": self.n_rows, "n_excluded": self.n_excluded, **self.meta}


def _log_clamps(raw: np.ndarray, family: str) -> None:
    outside = (raw < CLAMP_LOW) | (raw > CLAMP_HIGH)
    if np.any(outside):
        logger.debug("%s-order indices clamped at %s", family, np.flatnonzero(outside).tolist())


def sobol_indices_vector(FA: np.ndarray, FB: np.ndarray, FAB: np.ndarray,
                         standardise: bool = True, **report_fields) -> SobolReport:
    """Generalised indices for an (n, q) output; FAB has shape (d, n, q)."""
    FA = np.asarray(FA, dtype=np.float64)
    FB = np.asarray(FB, dtype=np.float64)
    FAB = np.asarray(FAB, dtype=np.float64)
    if FA.ndim == 1:
        FA, FB, FAB = FA[:, None], FB[:, None], FAB[:, :, None]
    if FA.shape != FB.shape or FAB.shape[1:] != FA.shape:
        raise GeoOpsError("DIMENSION_MISMATCH", "A, B and AB outputs must share a shape",
                          A=FA.shape, B=FB.shape, AB=FAB.shape)
    if not (np.all(np.isfinite(FA)) and np.all(np.isfinite(FB)) and np.all(np.isfinite(FAB))):
        raise GeoOpsError("NAN_INPUT", "model outputs must be finite")

    pooled = np.vstack([FA, FB])
    mu = pooled.mean(axis=0)
    var = pooled.var(axis=0)
    live = var > ZERO_VARIANCE_TOL * np.maximum(mu ** 2, 1e-300)
    if standardise:
        # drop rounding-noise columns such as central first-order moments
        live &= np.sqrt(var) > 1e-12 * np.maximum(np.abs(mu), 1.0)
    if not np.any(live):
        raise GeoOpsError("ZERO_VARIANCE", "output variance vanishes", variance=float(np.sum(var)))
    FA, FB, FAB, mu, var = FA[:, live], FB[:, live], FAB[:, :, live], mu[live], var[live]
    scale = np.sqrt(var) if standardise else np.ones_like(var)
    fa = (FA - mu) / scale
    fb = (FB - mu) / scale
    fab = (FAB - mu) / scale
    total_var = float(np.sum(var / scale ** 2))

    first = np.sum(np.mean(fb[None] * (fab - fa[None]), axis=1), axis=-1) / total_var
    total = np.sum(np.mean((fa[None] - fab) ** 2, axis=1), axis=-1) / (2.0 * total_var)
    _log_clamps(first, "first")
    _log_clamps(total, "total")
    kind = report_fields.pop("qoi_kind", SCALAR if fa.shape[1] == 1 and FA.shape[1] == 1 else VECTOR)
    return SobolReport(first, total, qoi_kind=kind, n_rows=len(fa), **report_fields)


def sobol_indices_scalar(fA: np.ndarray, fB: np.ndarray, fAB: np.ndarray, **report_fields) -> SobolReport:
    fA = np.asarray(fA, dtype=np.float64).reshape(-1)
    fB = np.asarray(fB, dtype=np.float64).reshape(-1)
    fAB = np.asarray(fAB, dtype=np.float64)
    require(fAB.ndim == 2 and fAB.shape[1] == len(fA), "fAB must have shape (d, n)", shape=fAB.shape)
    return sobol_indices_vector(fA, fB, fAB, standardise=False, qoi_kind=SCALAR, **report_fields)


def select_features(report: SobolReport, epsilon: float, use_total: bool = True) -> np.ndarray:
    indices = report.total_order if use_total else report.first_order
    return indices >= epsilon


def index_mse(a: Sequence[float], b: Sequence[float]) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise GeoOpsError("DIMENSION_MISMATCH", "index vectors differ in length", a=a.shape, b=b.shape)
    return float(np.mean((a - b) ** 2))


def index_cosine(a: Sequence[float], b: Sequence[float]) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise GeoOpsError("DIMENSION_MISMATCH", "index vectors differ in length", a=a.shape, b=b.shape)
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise GeoOpsError("ZERO_VECTOR", "cosine is undefined for a zero vector")
    return float(np.dot(a, b) / (na * nb))


def compare_index_vectors(a: Sequence[float], b: Sequence[float]) -> Tuple[float, float]:
    return index_cosine(a, b), index_mse(a, b)


# =========================
# GO study
# =========================
def go_outputs(row: np.ndarray, generator: Callable, config: GoConfig) -> Optional[np.ndarray]:
    """[moment values..., k, ft] for one parameter row, or None when the design fails."""
    try:
        go = assemble_go(generator(row), params=row, config=config)
    except GeoOpsError as e:
        logger.debug("design rejected in sensitivity study: %s", e.code)
        return None
    return np.concatenate([go.m.values, [go.k, go.ft]])


def qoi_columns(n_moments: int) -> Dict[str, np.ndarray]:
    m = np.arange(n_moments)
    k = np.array([n_moments])
    ft = np.array([n_moments + 1])
    parts = {"M": m, "K": k, "FT": ft}
    return {name: np.concatenate([parts[t] for t in name.split("+")]) for name in GO_QOIS}


def go_sensitivity_study(generator: Callable, go_config: GoConfig, d: int, n: int, seed: int,
                         epsilon: float = DEFAULT_EPSILON, use_total: bool = True, jobs: int = 1,
                         names: Sequence[str] = ()) -> Dict[str, SobolReport]:
    design = saltelli_design(d, n, seed)
    rows = design.evaluation_rows()
    outputs = map_ordered(partial(go_outputs, generator=generator, config=go_config), list(rows), jobs=jobs)
    ok = np.array([o is not None for o in outputs])
    if not np.any(ok):
        raise GeoOpsError("DEGENERATE_DATA", "every generated design failed", rows=len(rows))
    width = len(next(o for o in outputs if o is not None))
    table = np.vstack([o if o is not None else np.full(width, np.nan) for o in outputs])

    okA, okB, okAB = design.split(ok)
    keep = okA & okB & okAB.all(axis=0)
    excluded = int(np.sum(~keep))
    if excluded:
        logger.warning("sensitivity: excluded %d of %d base rows with failed designs", excluded, n)
    FA, FB, FAB = design.split(table)
    FA, FB, FAB = FA[keep], FB[keep], FAB[:, keep]

    common = dict(epsilon=epsilon, use_total=use_total, names=tuple(names), n_excluded=excluded)
    reports: Dict[str, SobolReport] = {}
    for qoi, cols in qoi_columns(width - 2).items():
        try:
            if len(cols) == 1:
                rep = sobol_indices_scalar(FA[:, cols[0]], FB[:, cols[0]], FAB[:, :, cols[0]], qoi=qoi, **common)
            else:
                rep = sobol_indices_vector(FA[:, cols], FB[:, cols], FAB[:, :, cols], qoi=qoi, **common)
        except GeoOpsError as e:
            if e.code != "ZERO_VARIANCE":
                raise
            # e.g. K is exactly 2*pi on every convex profile
            logger.warning("sensitivity: %s does not vary over the design; indices set to 0", qoi)
            rep = SobolReport(np.zeros(d), np.zeros(d), qoi_kind=SCALAR if len(cols) == 1 else VECTOR,
                              qoi=qoi, n_rows=int(np.sum(keep)), meta={"zero_variance": True}, **common)
        reports[qoi] = rep
    return reports


def comparison_table(reports: Dict[str, SobolReport], use_total: bool = True) -> pd.DataFrame:
    """Pairwise cosine / MSE of index vectors; cosine left empty where undefined."""
    rows = []
    for a, ra in reports.items():
        for b, rb in reports.items():
            va = ra.total_order if use_total else ra.first_order
            vb = rb.total_order if use_total else rb.first_order
            try:
                cos = index_cosine(va, vb)
            except GeoOpsError:
                cos = None
            rows.append({"qoi_a": a, "qoi_b": b, "cosine": cos, "mse": index_mse(va, vb)})
    return pd.DataFrame(rows)
