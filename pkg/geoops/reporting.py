"""Output writers shared by the CLI commands: CSV, JSON, manifest, workbook."""
from __future__ import annotations

import hashlib
import json
import logging
import math
import re
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

MANIFEST = "manifest.json"
ERROR_COLUMNS = ["design_id", "source", "code", "message"]


def _plain(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else None
    return obj


def write_csv(frame: pd.DataFrame, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format="%.17g", lineterminator="\n", encoding="utf-8")
    logger.info("Wrote %s", path)
    return path


def write_json(obj: Any, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(_plain(obj), indent=2, sort_keys=True) + "\n"
    path.write_text(text, encoding="utf-8", newline="\n")
    logger.info("Wrote %s", path)
    return path


def write_text(text: str, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8", newline="\n")
    logger.debug("Wrote %s", path)
    return path


def errors_frame(records: Iterable[Dict[str, Any]]) -> pd.DataFrame:
    return pd.DataFrame(list(records), columns=ERROR_COLUMNS)


def sha256_of(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(out_dir: Path, files: Iterable[Path]) -> Path:
    """List produced files (relative to ``out_dir``) with their SHA-256, sorted by name."""
    out_dir = Path(out_dir)
    entries = []
    for p in sorted({Path(f) for f in files}, key=lambda q: q.relative_to(out_dir).as_posix()):
        entries.append({"file": p.relative_to(out_dir).as_posix(), "sha256": sha256_of(p),
                        "bytes": p.stat().st_size})
    return write_json({"files": entries}, out_dir / MANIFEST)


def sheet_name(stem: str, taken: List[str]) -> str:
    """Excel sheet names: at most 31 characters, no []:*?/\\, unique within a workbook."""
    base = re.sub(r"[\[\]:*?/\\]", "_", stem)[:31] or "Sheet"
    name, i = base, 2
    while name.lower() in (t.lower() for t in taken):
        suffix = f"_{i}"
        name = base[: 31 - len(suffix)] + suffix
        i += 1
    taken.append(name)
    return name


def bundle_workbook(csv_files: Iterable[Path], xlsx_path: Path) -> Optional[Path]:
    """One sheet per CSV, written through openpyxl."""
    csv_files = [Path(p) for p in csv_files if Path(p).suffix.lower() == ".csv"]
    if not csv_files:
        return None
    taken: List[str] = []
    with pd.ExcelWriter(xlsx_path, engine="openpyxl") as writer:
        for p in csv_files:
            pd.read_csv(p).to_excel(writer, sheet_name=sheet_name(p.stem, taken), index=False)
    logger.info("Wrote %s", xlsx_path)
    return Path(xlsx_path)
