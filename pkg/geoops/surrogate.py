"""
Gaussian-process regression surrogates and the GO-combination ablation.

Targets are standardised before fitting; hyperparameters (ARD length-scales,
signal variance, noise variance, and alpha for the rational-quadratic kernel)
live in log space and are chosen by minimising the negative log marginal
likelihood with L-BFGS-B from several seeded starts.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy import linalg, optimize
from scipy.spatial.distance import cdist

from geoops.errors import GeoOpsError, require
from geoops.featureset import ComboSpec, DesignMatrix

logger = logging.getLogger(__name__)

RBF = "RBF"
MATERN_5_2 = "MATERN_5_2"
RATIONAL_QUADRATIC = "RATIONAL_QUADRATIC"
KERNELS = (RBF, MATERN_5_2, RATIONAL_QUADRATIC)
ZERO, CONSTANT = "ZERO", "CONSTANT"

N_STARTS = 8
NOISE_FLOOR = 1e-8
JITTER_START = 1e-10
JITTER_CAP = 1e-4
MAPE_FLOOR = 1e-12
_BAD_NLML = 1e25

Inputs = Union[DesignMatrix, np.ndarray]


def _as_rows(X: Inputs) -> np.ndarray:
    arr = X.values if isinstance(X, DesignMatrix) else X
    arr = np.asarray(arr, dtype=np.float64)
    return arr[:, None] if arr.ndim == 1 else arr


# =========================
# Kernels
# =========================
@dataclass(frozen=True)
class Hyper:
    length_scales: np.ndarray
    signal_variance: float
    noise_variance: float
    alpha: Optional[float] = None

    def to_log(self) -> np.ndarray:
        parts = [np.log(self.length_scales), [math.log(self.signal_variance), math.log(self.noise_variance)]]
        if self.alpha is not None:
            parts.append([math.log(self.alpha)])
        return np.concatenate(parts)

    @classmethod
    def from_log(cls, theta: np.ndarray, dim: int, kernel: str) -> "Hyper":
        ls = np.exp(theta[:dim])
        alpha = float(np.exp(theta[dim + 2])) if kernel == RATIONAL_QUADRATIC else None
        return cls(ls, float(np.exp(theta[dim])), float(np.exp(theta[dim + 1])), alpha)


def kernel_matrix(kernel: str, X1: np.ndarray, X2: np.ndarray, hyper: Hyper) -> np.ndarray:
    r2 = cdist(X1 / hyper.length_scales, X2 / hyper.length_scales, "sqeuclidean")
    s2 = hyper.signal_variance
    if kernel == RBF:
        return s2 * np.exp(-0.5 * r2)
    if kernel == MATERN_5_2:
        r = np.sqrt(5.0 * r2)
        return s2 * (1.0 + r + r * r / 3.0) * np.exp(-r)
    if kernel == RATIONAL_QUADRATIC:
        return s2 * (1.0 + r2 / (2.0 * hyper.alpha)) ** (-hyper.alpha)
    raise GeoOpsError("INVALID_ARGUMENT", "unknown kernel", kernel=kernel)


def _kernel_gradients(kernel: str, X: np.ndarray, hyper: Hyper, Kf: np.ndarray) -> List[np.ndarray]:
    """dK/dtheta for theta = (log l_1..log l_D, log s2[, log alpha]); noise handled by the caller."""
    scaled = X / hyper.length_scales
    r2 = cdist(scaled, scaled, "sqeuclidean")
    s2 = hyper.signal_variance
    if kernel == RBF:
        factor = Kf
    elif kernel == MATERN_5_2:
        r = np.sqrt(5.0 * r2)
        factor = s2 * (5.0 / 3.0) * (1.0 + r) * np.exp(-r)
    else:
        base = 1.0 + r2 / (2.0 * hyper.alpha)
        factor = s2 * base ** (-hyper.alpha - 1.0)
    grads = []
    for d in range(X.shape[1]):
        diff = scaled[:, d, None] - scaled[None, :, d]
        grads.append(factor * diff * diff)
    grads.append(Kf)
    if kernel == RATIONAL_QUADRATIC:
        base = 1.0 + r2 / (2.0 * hyper.alpha)
        grads.append(Kf * (-hyper.alpha * np.log(base) + r2 / (2.0 * base)))
    return grads


def _cholesky(K: np.ndarray) -> Tuple[np.ndarray, float]:
    """Lower Cholesky factor, adding diagonal jitter x10 from 1e-10 until it succeeds."""
    jitter = 0.0
    n = len(K)
    while True:
        try:
            return linalg.cholesky(K + jitter * np.eye(n), lower=True), jitter
        except linalg.LinAlgError:
            jitter = JITTER_START if jitter == 0.0 else jitter * 10.0
            if jitter > JITTER_CAP * (1.0 + 1e-9):
                raise GeoOpsError("ILL_CONDITIONED", "kernel matrix not positive definite within jitter cap",
                                  jitter_cap=JITTER_CAP) from None


def negative_log_marginal_likelihood(theta: np.ndarray, kernel: str, X: np.ndarray, y: np.ndarray,
                                     with_grad: bool = True):
    n, dim = X.shape
    hyper = Hyper.from_log(theta, dim, kernel)
    Kf = kernel_matrix(kernel, X, X, hyper)
    K = Kf + hyper.noise_variance * np.eye(n)
    try:
        L, _ = _cholesky(K)
    except GeoOpsError:
        return (_BAD_NLML, np.zeros_like(theta)) if with_grad else _BAD_NLML
    alpha = linalg.cho_solve((L, True), y)
    nlml = 0.5 * float(y @ alpha) + float(np.sum(np.log(np.diag(L)))) + 0.5 * n * math.log(2.0 * math.pi)
    if not with_grad:
        return nlml
    W = np.outer(alpha, alpha) - linalg.cho_solve((L, True), np.eye(n))
    grads = _kernel_gradients(kernel, X, hyper, Kf)
    out = np.empty_like(theta)
    for i, dK in enumerate(grads[:dim + 1]):
        out[i] = -0.5 * float(np.sum(W * dK))
    out[dim + 1] = -0.5 * hyper.noise_variance * float(np.trace(W))
    if kernel == RATIONAL_QUADRATIC:
        out[dim + 2] = -0.5 * float(np.sum(W * grads[-1]))
    return nlml, out


# =========================
# Model
# =========================
@dataclass(frozen=True)
class GprModel:
    kernel: str
    hyper: Hyper
    mean_fn: str
    X_train: np.ndarray
    y_offset: float
    y_scale: float
    chol: np.ndarray
    alpha: np.ndarray
    jitter: float
    nlml: float
    column_names: Tuple[str, ...] = ()
    standardisation: Dict[str, object] = field(default_factory=dict, compare=False)

    @property
    def length_scales(self) -> np.ndarray:
        return self.hyper.length_scales

    @property
    def signal_variance(self) -> float:
        return self.hyper.signal_variance

    @property
    def noise_variance(self) -> float:
        return self.hyper.noise_variance

    @property
    def prior_variance(self) -> float:
        """Signal variance in target units."""
        return self.hyper.signal_variance * self.y_scale ** 2

    def to_json_dict(self) -> dict:
        return {"kernel": self.kernel, "mean_fn": self.mean_fn,
                "length_scales": self.hyper.length_scales.tolist(),
                "signal_variance": self.hyper.signal_variance, "noise_variance": self.hyper.noise_variance,
                "alpha": self.hyper.alpha, "y_offset": self.y_offset, "y_scale": self.y_scale,
                "jitter": self.jitter, "nlml": self.nlml, "columns": list(self.column_names),
                "standardisation": self.standardisation}

    def training_frame(self) -> pd.DataFrame:
        """Training inputs (model units) with the targets recovered from the factorised system."""
        names = list(self.column_names) or [f"x_{i + 1}" for i in range(self.X_train.shape[1])]
        frame = pd.DataFrame(self.X_train, columns=names)
        frame["y"] = self.y_offset + self.y_scale * (self.chol @ (self.chol.T @ self.alpha))
        return frame


def _starts(X: np.ndarray, kernel: str, seed: int) -> Tuple[List[np.ndarray], List[Tuple[float, float]]]:
    spread = X.std(axis=0)
    spread = np.where(spread > 0, spread, 1.0)
    rng = np.random.default_rng(seed)
    starts = []
    for g in np.logspace(-1, 1, N_STARTS):
        ls = spread * g * np.exp(rng.uniform(-0.1, 0.1, len(spread)))
        alpha = 1.0 if kernel == RATIONAL_QUADRATIC else None
        starts.append(Hyper(ls, 1.0, 1e-2, alpha).to_log())
    bounds = [(math.log(s * 1e-3), math.log(s * 1e3)) for s in spread]
    bounds += [(math.log(1e-4), math.log(1e4)), (math.log(NOISE_FLOOR), math.log(10.0))]
    if kernel == RATIONAL_QUADRATIC:
        bounds.append((math.log(1e-2), math.log(1e2)))
    return starts, bounds


def fit_gpr(X: Inputs, y: Sequence[float], kernel: str = RBF, seed: int = 0, mean_fn: str = CONSTANT,
            hyper: Optional[Hyper] = None) -> GprModel:
    """Fit a GP; pass ``hyper`` to skip optimisation and use fixed hyperparameters."""
    require(kernel in KERNELS, "unknown kernel", kernel=kernel)
    require(mean_fn in (ZERO, CONSTANT), "unknown mean function", mean_fn=mean_fn)
    Xa = _as_rows(X)
    ya = np.asarray(y, dtype=np.float64).reshape(-1)
    require(len(Xa) == len(ya), "X and y lengths differ", n_x=len(Xa), n_y=len(ya))
    require(len(Xa) >= 8, "GP fit needs at least 8 training rows", n=len(Xa))
    if not (np.all(np.isfinite(Xa)) and np.all(np.isfinite(ya))):
        raise GeoOpsError("NAN_INPUT", "training data must be finite")

    offset = float(ya.mean()) if mean_fn == CONSTANT else 0.0
    scale = float(np.sqrt(np.mean((ya - offset) ** 2)))
    scale = scale if scale > 1e-12 * max(1.0, abs(offset)) else 1.0
    ys = (ya - offset) / scale

    if hyper is None:
        starts, bounds = _starts(Xa, kernel, seed)
        best_theta, best_val = None, math.inf
        for theta0 in starts:
            val0 = negative_log_marginal_likelihood(theta0, kernel, Xa, ys, with_grad=False)
            if val0 < best_val:
                best_theta, best_val = theta0, val0
            res = optimize.minimize(negative_log_marginal_likelihood, theta0, args=(kernel, Xa, ys),
                                    jac=True, method="L-BFGS-B", bounds=bounds)
            if np.isfinite(res.fun) and res.fun < best_val:
                best_theta, best_val = np.asarray(res.x), float(res.fun)
        hyper = Hyper.from_log(best_theta, Xa.shape[1], kernel)
    else:
        hyper = Hyper(np.asarray(hyper.length_scales, dtype=np.float64).reshape(-1) *
                      np.ones(Xa.shape[1]), hyper.signal_variance, max(hyper.noise_variance, NOISE_FLOOR),
                      hyper.alpha if kernel == RATIONAL_QUADRATIC else None)
        if kernel == RATIONAL_QUADRATIC and hyper.alpha is None:
            raise GeoOpsError("INVALID_ARGUMENT", "rational quadratic needs alpha")

    K = kernel_matrix(kernel, Xa, Xa, hyper) + hyper.noise_variance * np.eye(len(Xa))
    L, jitter = _cholesky(K)
    if jitter:
        logger.warning("gp: kernel matrix needed jitter %.1e", jitter)
    alpha = linalg.cho_solve((L, True), ys)
    nlml = negative_log_marginal_likelihood(hyper.to_log(), kernel, Xa, ys, with_grad=False)
    names = tuple(X.column_names) if isinstance(X, DesignMatrix) else ()
    std_info = X.sidecar() if isinstance(X, DesignMatrix) else {}
    logger.debug("gp %s: nlml=%.6g noise=%.3g", kernel, nlml, hyper.noise_variance)
    return GprModel(kernel, hyper, mean_fn, Xa, offset, scale, L, alpha, jitter, float(nlml), names, std_info)


def predict(model: GprModel, X_star: Inputs) -> Tuple[np.ndarray, np.ndarray]:
    Xs = _as_rows(X_star)
    if Xs.shape[1] != model.X_train.shape[1]:
        raise GeoOpsError("DIMENSION_MISMATCH", "prediction inputs have the wrong width",
                          expected=model.X_train.shape[1], got=Xs.shape[1])
    Ks = kernel_matrix(model.kernel, Xs, model.X_train, model.hyper)
    mean = model.y_offset + model.y_scale * (Ks @ model.alpha)
    v = linalg.solve_triangular(model.chol, Ks.T, lower=True)
    var = model.hyper.signal_variance - np.sum(v * v, axis=0)
    return mean, np.maximum(var, 0.0) * model.y_scale ** 2


# =========================
# Metrics
# =========================
@dataclass(frozen=True)
class FitMetrics:
    r2: float
    mape: float
    rmse: float
    n_floored: int = 0

    def to_dict(self) -> dict:
        return {"r2": self.r2, "mape": self.mape, "rmse": self.rmse, "mape_floored": self.n_floored}


def metrics(y_true: Sequence[float], y_pred: Sequence[float]) -> FitMetrics:
    yt = np.asarray(y_true, dtype=np.float64).reshape(-1)
    yp = np.asarray(y_pred, dtype=np.float64).reshape(-1)
    require(len(yt) == len(yp) and len(yt) > 0, "metric inputs must be equal and non-empty")
    res = float(np.sum((yt - yp) ** 2))
    tot = float(np.sum((yt - yt.mean()) ** 2))
    if tot == 0.0:
        r2 = 1.0 if res == 0.0 else 0.0
    else:
        r2 = 1.0 - res / tot
    denom = np.abs(yt)
    floored = int(np.sum(denom < MAPE_FLOOR))
    mape = 100.0 * float(np.mean(np.abs(yp - yt) / np.maximum(denom, MAPE_FLOOR)))
    rmse = math.sqrt(res / len(yt))
    return FitMetrics(r2, mape, rmse, floored)


def evaluate(model: GprModel, X_test: Inputs, y_test: Sequence[float]) -> FitMetrics:
    mean, _ = predict(model, X_test)
    return metrics(y_test, mean)


# =========================
# Ablation
# =========================
def train_test_split(n: int, test_fraction: float, seed: int) -> Tuple[np.ndarray, np.ndarray]:
    require(0.0 < test_fraction < 1.0, "test fraction must lie in (0, 1)", test_fraction=test_fraction)
    perm = np.random.default_rng(seed).permutation(n)
    n_test = max(1, int(round(test_fraction * n)))
    return np.sort(perm[n_test:]), np.sort(perm[:n_test])


def ablation_study(frame: pd.DataFrame, labels: Sequence[float], combos: Sequence[ComboSpec],
                   kernels: Sequence[str] = KERNELS, seed: int = 0, test_fraction: float = 0.2,
                   validation_fraction: float = 0.2, transform: str = "none",
                   models: Optional[Dict[str, GprModel]] = None) -> pd.DataFrame:
    """Per combination: hold out a test split, standardise with the training rows'
    statistics, choose the kernel on a validation split of the training rows,
    refit on all training rows and score on the test rows.

    When ``models`` is given, the refitted model of each combination is stored
    in it under the combination label.
    """
    y = np.asarray(labels, dtype=np.float64).reshape(-1)
    require(len(y) == len(frame), "one label per design required", designs=len(frame), labels=len(y))
    if not np.all(np.isfinite(y)):
        raise GeoOpsError("NAN_INPUT", "labels must be finite")
    train, test = train_test_split(len(y), test_fraction, seed)
    fit_rows, val_rows = train_test_split(len(train), validation_fraction, seed + 1)
    fit_idx, val_idx = train[fit_rows], train[val_rows]

    rows = []
    for combo in combos:
        reference = DesignMatrix.from_frame(frame.iloc[train], combo, standardise=True, transform=transform)
        X = reference.standardise_rows(DesignMatrix.from_frame(frame, combo, standardise=False).values)
        best_kernel, best_val = None, -math.inf
        for kern in kernels:
            model = fit_gpr(X[fit_idx], y[fit_idx], kernel=kern, seed=seed)
            score = evaluate(model, X[val_idx], y[val_idx]).r2
            logger.debug("ablation %s/%s: validation r2=%.4f", combo.label, kern, score)
            if score > best_val:
                best_kernel, best_val = kern, score
        model = fit_gpr(reference, y[train], kernel=best_kernel, seed=seed)
        m = evaluate(model, X[test], y[test])
        if models is not None:
            models[combo.label] = model
        logger.info("ablation %s: kernel=%s r2=%.4f rmse=%.4g", combo.label, best_kernel, m.r2, m.rmse)
        rows.append({"combo": combo.label, "kernel": best_kernel, "r2": m.r2, "mape": m.mape, "rmse": m.rmse,
                     "n_train": len(train), "n_test": len(test), "seed": seed,
                     "validation_r2": best_val, "mape_floored": m.n_floored})
    return pd.DataFrame(rows)
