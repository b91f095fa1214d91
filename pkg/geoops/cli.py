"""
geoops command line.

Usage:
  python -m geoops gen-airfoils --out data/outputs/airfoils --n-designs 200
  python -m geoops features --params data/outputs/airfoils/params.csv --out data/outputs/features
  python -m geoops features --generator mesh --mesh-family cone --n-designs 20 --out data/outputs/hulls
  python -m geoops surrogate --features data/outputs/features/features.csv \
      --labels data/outputs/airfoils/labels.csv --out data/outputs/surrogate
  python -m geoops reduce --features data/outputs/features/features.csv --out data/outputs/reduce
  python -m geoops sensitivity --n 1024 --out data/outputs/sensitivity
  python -m geoops quality --generated gen.csv --training train.csv --out data/outputs/quality

Every command takes --config (JSON profile, flat or keyed by command),
--out, --seed, --jobs, --log-level and --xlsx. Flags override the profile.
features also writes per-design moments, spectra and curvature under
designs/, and a wave_resistance labels.csv when the designs are meshes.
Exit codes: 0 ok, 1 runtime failure, 2 usage or configuration error.
"""
from __future__ import annotations

import argparse
import logging
import re
from dataclasses import dataclass, fields
from functools import partial
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from geoops.batch import map_ordered
from geoops.config import (COMMAND_CONFIGS, FeaturesConfig, GenAirfoilsConfig, QualityConfig,
                           ReduceConfig, SensitivityConfig, SurrogateConfig, config_dict,
                           load_profile, resolve_config)
from geoops.errors import GeoOpsError
from geoops.featureset import (ComboSpec, DesignMatrix, GoConfig, GoDetail, GoVector, describe_go, go_frame,
                               lhs_sample)
from geoops.logs import configure_logging
from geoops.meshes import MESH_FAMILIES
from geoops.proxies import lift_to_drag_proxy, wave_resistance_proxy
from geoops.quality import QUALITY_COMBO, batch_scores
from geoops.reporting import (bundle_workbook, errors_frame, write_csv, write_json, write_manifest,
                              write_text)
from geoops.sensitivity import comparison_table, go_sensitivity_study
from geoops.shapeio import dump_uiuc_dat, load_mesh, read_profile
from geoops.shapes import (AIRFOIL_PARAM_TABLE, AIRFOIL_PARAM_TABLE_VERSION, AirfoilParams, TriangleMesh,
                           airfoil_param_names, generate_airfoil, resample_profile)
from geoops.subspace import (decode_airfoil_params, decode_profile_coordinates, diversity_score, fit_kle,
                             reconstruct, sample_latent, validity_rate)
from geoops.surrogate import GprModel, ablation_study

logger = logging.getLogger("geoops.cli")

RESOLVED_CONFIG = "config.resolved.json"
PROFILE_SUFFIXES = (".dat", ".txt")
MESH_SUFFIXES = (".obj", ".stl")


def _read_table(path: str) -> pd.DataFrame:
    p = Path(path)
    if not p.is_file():
        raise GeoOpsError("CONFIG_ERROR", "input table not found", path=str(p))
    return pd.read_csv(p, float_precision="round_trip")


def _safe_label(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9]+", "_", text).strip("_")


def _design_id(i: int) -> str:
    return f"design_{i + 1:04d}"


def _error_record(design_id: str, source: str, err: Exception) -> dict:
    code = err.code if isinstance(err, GeoOpsError) else type(err).__name__
    message = err.message if isinstance(err, GeoOpsError) else str(err)
    return {"design_id": design_id, "source": source, "code": code, "message": message}


# =========================
# features
# =========================
def _go_config(cfg) -> GoConfig:
    return GoConfig(moment_order=cfg.moment_order, moment_variant=cfg.moment_variant,
                    fd_points=cfg.fd_points,
                    fd_sections=getattr(cfg, "fd_sections", 32),
                    fd_per_section=getattr(cfg, "fd_per_section", 64),
                    include_mean_energy=getattr(cfg, "include_mean_energy", True))


@dataclass(frozen=True)
class _FeatureOutcome:
    go: Optional[GoVector] = None
    detail: Optional[GoDetail] = None
    wave_resistance: Optional[float] = None
    error: Optional[dict] = None


def _feature_job(job: Tuple[str, str, str, object], cfg: FeaturesConfig) -> _FeatureOutcome:
    """Never raises for a bad design; the failure comes back as an error record."""
    design_id, source, kind, payload = job
    params = None
    try:
        if kind == "airfoil":
            params = np.asarray(payload, dtype=np.float64)
            design = generate_airfoil(AirfoilParams(tuple(params)), cfg.n_points)
        elif kind == "profile":
            _, design = read_profile(payload)
            if cfg.resample_mode != "none":
                design = resample_profile(design, cfg.profile_points, mode=cfg.resample_mode)
        elif kind == "family":
            params = np.asarray(payload, dtype=np.float64)
            design = MESH_FAMILIES[cfg.mesh_family].build(params)
        else:
            design = load_mesh(payload)
        go, detail = describe_go(design, params, _go_config(cfg), design_id)
        wave = wave_resistance_proxy(design, cfg.wave_sections) if isinstance(design, TriangleMesh) else None
        return _FeatureOutcome(go, detail, wave)
    except (GeoOpsError, OSError) as e:
        return _FeatureOutcome(error=_error_record(design_id, source, e))


def _param_rows(path: str) -> Tuple[List[str], np.ndarray]:
    table = _read_table(path)
    names = airfoil_param_names()
    if all(n in table.columns for n in names):
        cols = names
    else:
        cols = [f"p_{i + 1}" for i in range(len(names))]
        if not all(c in table.columns for c in cols):
            raise GeoOpsError("CONFIG_ERROR", "params table lacks the aerofoil parameter columns", path=path)
    ids = table["design_id"].astype(str).tolist() if "design_id" in table.columns \
        else [_design_id(i) for i in range(len(table))]
    return ids, table[cols].to_numpy(dtype=np.float64)


def _feature_jobs(cfg: FeaturesConfig) -> List[Tuple[str, str, str, object]]:
    jobs = []
    if cfg.inputs:
        for path in cfg.inputs:
            p = Path(path)
            suffix = p.suffix.lower()
            if suffix in PROFILE_SUFFIXES:
                kind = "profile"
            elif suffix in MESH_SUFFIXES:
                kind = "mesh"
            else:
                raise GeoOpsError("CONFIG_ERROR", "unsupported input suffix", path=str(p))
            jobs.append((p.stem, str(p), kind, str(p)))
    elif cfg.params:
        ids, rows = _param_rows(cfg.params)
        jobs = [(did, cfg.params, "airfoil", tuple(r)) for did, r in zip(ids, rows)]
    elif cfg.generator == "mesh":
        family = MESH_FAMILIES[cfg.mesh_family]
        rows = family.scale(lhs_sample(len(family.bounds), cfg.n_designs, cfg.seed))
        source = f"generator:mesh:{cfg.mesh_family}"
        jobs = [(_design_id(i), source, "family", tuple(r)) for i, r in enumerate(rows)]
    else:
        rows = lhs_sample(len(AIRFOIL_PARAM_TABLE), cfg.n_designs, cfg.seed)
        jobs = [(_design_id(i), "generator:airfoil", "airfoil", tuple(r)) for i, r in enumerate(rows)]
    return jobs


def _design_files(go: GoVector, detail: GoDetail, out: Path) -> List[Path]:
    """Per-design moments, Fourier coefficients and curvature under designs/."""
    base = out / "designs"
    sid = _safe_label(go.design_id)
    produced = [
        write_csv(go.m.to_frame(), base / f"{sid}_moments.csv"),
        write_json(go.m.to_json_dict(), base / f"{sid}_moments.json"),
        write_csv(detail.spectrum.to_frame(), base / f"{sid}_fd.csv"),
        write_csv(detail.spectrum.to_frame(magnitudes_only=True), base / f"{sid}_fd_magnitudes.csv"),
    ]
    curvature = {"total": detail.k}
    if detail.curvature is not None:
        curvature = detail.curvature.to_json_dict()
        produced.append(write_csv(detail.curvature.per_vertex_frame(), base / f"{sid}_curvature_vertices.csv"))
    produced.append(write_json(curvature, base / f"{sid}_curvature.json"))
    return produced


def _column_groups(columns: Sequence[str]) -> Dict[str, List[str]]:
    return {c: [col for col in columns if ComboSpec.parse(c).selects(col)] for c in ("P", "M", "K", "FT")}


def cmd_features(cfg: FeaturesConfig, out: Path) -> List[Path]:
    jobs = _feature_jobs(cfg)
    results = map_ordered(partial(_feature_job, cfg=cfg), jobs, jobs=cfg.jobs)
    ok = [r for r in results if r.error is None]
    errors = [r.error for r in results if r.error is not None]
    for e in errors:
        logger.warning("%s: %s %s", e["design_id"], e["code"], e["message"])
    produced = [write_csv(errors_frame(errors), out / "errors.csv")]
    if not ok:
        raise GeoOpsError("DEGENERATE_DATA", "every design failed", designs=len(jobs))

    frame = go_frame([r.go for r in ok])
    produced.append(write_csv(frame, out / "features.csv"))
    if cfg.design_files:
        for r in ok:
            produced.extend(_design_files(r.go, r.detail, out))
    waves = [{"design_id": r.go.design_id, "wave_resistance": r.wave_resistance}
             for r in ok if r.wave_resistance is not None]
    if waves:
        produced.append(write_csv(pd.DataFrame(waves, columns=["design_id", "wave_resistance"]),
                                  out / "labels.csv"))

    columns = list(frame.columns[1:])
    groups = _column_groups(columns)
    sidecar = {"go_config": _go_config(cfg).to_dict(), "columns": columns, "column_groups": groups,
               "combo": "+".join(c for c in groups if groups[c]), "seed": cfg.seed,
               "n_designs": len(jobs), "n_ok": len(ok), "n_failed": len(errors)}
    if not cfg.inputs and (cfg.params or cfg.generator == "airfoil"):
        sidecar["param_names"] = airfoil_param_names()
        sidecar["param_table_version"] = AIRFOIL_PARAM_TABLE_VERSION
    elif not cfg.inputs:
        sidecar["param_names"] = MESH_FAMILIES[cfg.mesh_family].param_names
        sidecar["mesh_family"] = cfg.mesh_family
    produced.append(write_json(sidecar, out / "sidecar.json"))
    logger.info("features: %d designs, %d failed", len(ok), len(errors))
    return produced


# =========================
# reduce
# =========================
def _decode_standardised(row: np.ndarray, mean: np.ndarray, std: np.ndarray, n_p: int, decoder: str):
    vals = (np.asarray(row) * std + mean)[:n_p]
    if decoder == "airfoil_params":
        return decode_airfoil_params(vals)
    return decode_profile_coordinates(vals)


def cmd_reduce(cfg: ReduceConfig, out: Path) -> List[Path]:
    frame = _read_table(cfg.features)
    produced: List[Path] = []
    rows = []
    for text in cfg.combos:
        combo = ComboSpec.parse(text)
        label = _safe_label(combo.label)
        matrix = DesignMatrix.from_frame(frame, combo, standardise=True, transform=cfg.transform)
        basis = fit_kle(matrix, cfg.threshold)
        latents = sample_latent(basis, cfg.samples, cfg.seed, cfg.latent_scale)
        samples = reconstruct(basis, latents)
        diversity = diversity_score(samples, cfg.kernel_length)

        row = {"combo": combo.label, "n_features": matrix.shape[1], "n_modes": len(basis.eigenvalues),
               "retained_dims": basis.retained_dims, "threshold": cfg.threshold,
               "variance_retained": float(basis.cumulative_variance()[basis.retained_dims - 1]),
               "diversity": diversity, "invalid_rate": None, "n_invalid": None, "n_decode_fail": None,
               "samples": cfg.samples, "seed": cfg.seed}
        n_p = sum(1 for c in matrix.column_names if c.startswith("p_"))
        if combo.include_p and cfg.decoder != "none":
            decode = partial(_decode_standardised, mean=matrix.mean, std=matrix.std, n_p=n_p,
                             decoder=cfg.decoder)
            report = validity_rate(latents, basis, decode, jobs=cfg.jobs)
            row.update(invalid_rate=report.rate, n_invalid=report.n_invalid, n_decode_fail=report.n_decode_fail)
            produced.append(write_csv(report.to_frame(), out / f"validity_{label}.csv"))
        rows.append(row)
        produced.append(write_csv(basis.eigen_frame(), out / f"kle_{label}_eigen.csv"))
        produced.append(write_json(basis.to_json_dict(), out / f"kle_{label}_eigen.json"))
        produced.append(write_csv(basis.vectors_frame(matrix.column_names), out / f"kle_{label}_vectors.csv"))
        produced.append(write_json(matrix.sidecar(), out / f"kle_{label}_standardisation.json"))
        logger.info("reduce %s: %d of %d modes retained", combo.label, basis.retained_dims,
                    len(basis.eigenvalues))
    produced.append(write_csv(pd.DataFrame(rows), out / "reduce_report.csv"))
    return produced


# =========================
# sensitivity
# =========================
def _eps_label(eps: float) -> str:
    return f"selected_eps_{eps:g}"


def cmd_sensitivity(cfg: SensitivityConfig, out: Path) -> List[Path]:
    go_config = GoConfig(moment_order=cfg.moment_order, moment_variant=cfg.moment_variant,
                         fd_points=cfg.fd_points)
    names = airfoil_param_names()
    reports = go_sensitivity_study(decode_airfoil_params, go_config, len(names), cfg.n, cfg.seed,
                                   epsilon=cfg.epsilons[0], use_total=cfg.use_total, jobs=cfg.jobs,
                                   names=names)
    produced: List[Path] = []
    summary: Dict[str, dict] = {}
    for qoi, report in reports.items():
        frame = report.to_frame().drop(columns=["selected"])
        record = report.to_json_dict()
        record["selections"] = {}
        for eps in cfg.epsilons:
            mask = report.with_epsilon(eps).selected_mask.astype(int)
            frame[_eps_label(eps)] = mask
            record["selections"][f"{eps:g}"] = mask.tolist()
        produced.append(write_csv(frame, out / f"sobol_{_safe_label(qoi)}.csv"))
        summary[qoi] = record
    produced.append(write_json({"reports": summary, "n": cfg.n, "d": len(names), "seed": cfg.seed},
                               out / "sobol_reports.json"))
    produced.append(write_csv(comparison_table(reports, cfg.use_total), out / "comparison.csv"))
    return produced


# =========================
# surrogate
# =========================
LABEL_CANDIDATES = ["label", "y", "lift_to_drag", "wave_resistance", "qoi"]


def _label_vector(features: pd.DataFrame, labels: pd.DataFrame, column: Optional[str]) -> np.ndarray:
    if column is None:
        for c in LABEL_CANDIDATES:
            if c in labels.columns:
                column = c
                break
    if column is None:
        numeric = [c for c in labels.columns if c != "design_id" and pd.api.types.is_numeric_dtype(labels[c])]
        column = numeric[0] if numeric else None
    if column is None or column not in labels.columns:
        raise GeoOpsError("CONFIG_ERROR", "label column not found", column=column)
    if "design_id" in features.columns and "design_id" in labels.columns:
        lookup = labels.assign(design_id=labels["design_id"].astype(str)).set_index("design_id")[column]
        ids = features["design_id"].astype(str)
        missing = [d for d in ids if d not in lookup.index]
        if missing:
            raise GeoOpsError("CONFIG_ERROR", "designs without a label", design_id=missing[0])
        return lookup.loc[ids].to_numpy(dtype=np.float64)
    if len(labels) != len(features):
        raise GeoOpsError("CONFIG_ERROR", "label table length differs from features",
                          features=len(features), labels=len(labels))
    return labels[column].to_numpy(dtype=np.float64)


def cmd_surrogate(cfg: SurrogateConfig, out: Path) -> List[Path]:
    features = _read_table(cfg.features)
    y = _label_vector(features, _read_table(cfg.labels), cfg.label_column)
    combos = [ComboSpec.parse(c) for c in cfg.combos]
    models: Dict[str, GprModel] = {}
    table = ablation_study(features, y, combos, kernels=cfg.kernels, seed=cfg.seed,
                           test_fraction=cfg.test_fraction, validation_fraction=cfg.validation_fraction,
                           transform=cfg.transform, models=models)
    produced = [write_csv(table, out / "ablation.csv")]
    for label, model in models.items():
        stem = f"model_{_safe_label(label)}"
        produced.append(write_json(model.to_json_dict(), out / f"{stem}.json"))
        produced.append(write_csv(model.training_frame(), out / f"{stem}_training.csv"))
    return produced


# =========================
# quality
# =========================
QUALITY_CANDIDATES = ["quality", "q", "lift_to_drag"]


def cmd_quality(cfg: QualityConfig, out: Path) -> List[Path]:
    generated = _read_table(cfg.generated)
    training = _read_table(cfg.training)
    qcol = cfg.quality_column
    if qcol is None:
        qcol = next((c for c in QUALITY_CANDIDATES if c in generated.columns), None)
    elif qcol not in generated.columns:
        raise GeoOpsError("CONFIG_ERROR", "quality column not found", column=qcol)

    skip = {"design_id", qcol} | set(QUALITY_CANDIDATES)
    cols = [c for c in generated.columns if c not in skip and pd.api.types.is_numeric_dtype(generated[c])]
    missing = [c for c in cols if c not in training.columns]
    if not cols or missing:
        raise GeoOpsError("DIMENSION_MISMATCH", "generated and training feature columns differ",
                          column=missing[0] if missing else None)
    reference = DesignMatrix.from_values(training[cols].to_numpy(dtype=np.float64), cols,
                                         training.get("design_id", pd.Series(range(len(training)))).tolist())
    gen_rows = reference.standardise_rows(generated[cols].to_numpy(dtype=np.float64))

    if qcol is not None:
        qualities = generated[qcol].to_numpy(dtype=np.float64)
        source = qcol
    else:
        go_cols = [c for c in cols if QUALITY_COMBO.selects(c)]
        if not any(c.startswith("m_") for c in go_cols) or "k" not in go_cols or "ft" not in go_cols:
            raise GeoOpsError("MISSING_COMPONENT", "no quality column and no M, K, FT columns to derive one")
        idx = [cols.index(c) for c in go_cols]
        qualities = np.sum(np.abs(gen_rows[:, idx]), axis=1)
        source = "go_l1"

    scores = batch_scores(gen_rows, reference.values, qualities, cfg.kernel_length, cfg.gamma0)
    record = scores.to_json_dict()
    record.update(quality_source=source, seed=cfg.seed)
    return [write_json(record, out / "scores.json")]


# =========================
# gen-airfoils
# =========================
def _airfoil_job(job: Tuple[str, Tuple[float, ...]], cfg: GenAirfoilsConfig):
    design_id, params = job
    try:
        profile = generate_airfoil(AirfoilParams(params), cfg.n_points)
        ld = lift_to_drag_proxy(profile, cfg.alpha_deg, cfg.reynolds)
        return profile, ld, None
    except GeoOpsError as e:
        return None, None, _error_record(design_id, "generator:airfoil", e)


def cmd_gen_airfoils(cfg: GenAirfoilsConfig, out: Path) -> List[Path]:
    names = airfoil_param_names()
    rows = lhs_sample(len(names), cfg.n_designs, cfg.seed)
    jobs = [(_design_id(i), tuple(r)) for i, r in enumerate(rows)]
    results = map_ordered(partial(_airfoil_job, cfg=cfg), jobs, jobs=cfg.jobs)

    params = pd.DataFrame(rows, columns=names)
    params.insert(0, "design_id", [j[0] for j in jobs])
    labels, errors, produced = [], [], []
    for (design_id, _), (profile, ld, err) in zip(jobs, results):
        if err is not None:
            logger.warning("%s: %s %s", design_id, err["code"], err["message"])
            errors.append(err)
            continue
        labels.append({"design_id": design_id, "lift_to_drag": ld})
        if cfg.write_dat:
            produced.append(write_text(dump_uiuc_dat(design_id, profile), out / "dat" / f"{design_id}.dat"))
    produced.append(write_csv(params, out / "params.csv"))
    produced.append(write_csv(pd.DataFrame(labels, columns=["design_id", "lift_to_drag"]), out / "labels.csv"))
    produced.append(write_csv(errors_frame(errors), out / "errors.csv"))
    if not labels:
        raise GeoOpsError("DEGENERATE_DATA", "every aerofoil failed", designs=len(jobs))
    return produced


COMMANDS: Dict[str, Callable] = {
    "features": cmd_features,
    "reduce": cmd_reduce,
    "sensitivity": cmd_sensitivity,
    "surrogate": cmd_surrogate,
    "quality": cmd_quality,
    "gen-airfoils": cmd_gen_airfoils,
}


# =========================
# CLI & Main
# =========================
def _flag(ap: argparse.ArgumentParser, name: str, **kw) -> None:
    ap.add_argument(name, default=None, **kw)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    _flag(common, "--config", help="JSON study profile (flat or keyed by command)")
    _flag(common, "--out", help="Output directory (default data/outputs/<command>)")
    _flag(common, "--seed", type=int)
    _flag(common, "--jobs", type=int)
    common.add_argument("--log-level", default="info", choices=["debug", "info", "warn", "error"])
    common.add_argument("--xlsx", action="store_true", help="Also bundle every CSV into report.xlsx")

    ap = argparse.ArgumentParser("geoops", description="Geometric-operator features for design spaces.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("features", parents=[common], help="GO feature table for designs")
    _flag(p, "--inputs", nargs="+", help=".dat / .obj / .stl files")
    _flag(p, "--params", help="CSV of aerofoil parameter rows")
    _flag(p, "--generator", choices=["airfoil", "mesh", "none"])
    _flag(p, "--mesh-family", choices=sorted(MESH_FAMILIES))
    _flag(p, "--n-designs", type=int)
    _flag(p, "--n-points", type=int)
    _flag(p, "--profile-points", type=int)
    _flag(p, "--resample-mode", choices=["curvature", "arclength", "none"])
    _flag(p, "--moment-order", type=int)
    _flag(p, "--moment-variant")
    _flag(p, "--fd-points", type=int)
    _flag(p, "--fd-sections", type=int)
    _flag(p, "--fd-per-section", type=int)
    p.add_argument("--no-mean-energy", dest="include_mean_energy", action="store_const", const=False,
                   default=None)
    _flag(p, "--wave-sections", type=int)
    p.add_argument("--no-design-files", dest="design_files", action="store_const", const=False, default=None,
                   help="Skip the per-design files under designs/")

    p = sub.add_parser("reduce", parents=[common], help="KLE subspaces, diversity and validity")
    _flag(p, "--features")
    _flag(p, "--combos", nargs="+", help='e.g. "P" "P,M,K,FT"')
    _flag(p, "--threshold", type=float)
    _flag(p, "--samples", type=int)
    _flag(p, "--latent-scale", type=float)
    _flag(p, "--decoder", choices=["airfoil_params", "coordinates", "none"])
    _flag(p, "--transform", choices=["none", "signed_log"])
    _flag(p, "--kernel-length", type=float)

    p = sub.add_parser("sensitivity", parents=[common], help="Sobol indices of GO outputs")
    _flag(p, "--n", type=int)
    _flag(p, "--epsilons", type=float, nargs="+")
    _flag(p, "--moment-order", type=int)
    _flag(p, "--moment-variant")
    _flag(p, "--fd-points", type=int)
    p.add_argument("--first-order", dest="use_total", action="store_const", const=False, default=None)

    p = sub.add_parser("surrogate", parents=[common], help="GP ablation over GO combinations")
    _flag(p, "--features")
    _flag(p, "--labels")
    _flag(p, "--label-column")
    _flag(p, "--combos", nargs="+")
    _flag(p, "--kernels", nargs="+")
    _flag(p, "--test-fraction", type=float)
    _flag(p, "--validation-fraction", type=float)
    _flag(p, "--transform", choices=["none", "signed_log"])

    p = sub.add_parser("quality", parents=[common], help="Diversity, quality and novelty of a batch")
    _flag(p, "--generated")
    _flag(p, "--training")
    _flag(p, "--quality-column")
    _flag(p, "--gamma0", type=float)
    _flag(p, "--kernel-length", type=float)

    p = sub.add_parser("gen-airfoils", parents=[common], help="LHS aerofoils with proxy labels")
    _flag(p, "--n-designs", type=int)
    _flag(p, "--n-points", type=int)
    p.add_argument("--write-dat", action="store_const", const=True, default=None)
    _flag(p, "--alpha-deg", type=float)
    _flag(p, "--reynolds", type=float)
    return ap


def _overrides(args: argparse.Namespace, cls) -> dict:
    return {f.name: getattr(args, f.name) for f in fields(cls) if getattr(args, f.name, None) is not None}


def run(args: argparse.Namespace) -> int:
    command = args.command
    cls = COMMAND_CONFIGS[command]
    try:
        profile = load_profile(args.config) if args.config else None
        cfg = resolve_config(cls, profile, _overrides(args, cls), command=command)
    except GeoOpsError as e:
        logger.error("config: %s", e)
        return 2

    out = Path(args.out or Path("data/outputs") / command)
    out.mkdir(parents=True, exist_ok=True)
    produced = [write_json(config_dict(cfg, command), out / RESOLVED_CONFIG)]
    try:
        produced.extend(COMMANDS[command](cfg, out))
    except GeoOpsError as e:
        logger.error("%s failed: %s", command, e)
        return 2 if e.code == "CONFIG_ERROR" else 1
    except Exception:
        logger.exception("%s failed", command)
        return 1

    if args.xlsx:
        bundle_workbook(produced, out / "report.xlsx")
    write_manifest(out, produced)
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    configure_logging(args.log_level)
    return run(args)


if __name__ == "__main__":
    raise SystemExit(main())
