"""
Study configuration: dataclass defaults <- JSON profile <- explicit flags.

A profile is either flat ({"moment_order": 3, ...}) or keyed by command
({"features": {...}, "reduce": {...}}). Unknown keys and wrong types are
CONFIG_ERROR.

Usage:
  python -m geoops reduce --config data/config/studies/airfoil_study.json --threshold 0.99
  python -m geoops features --config data/config/studies/quick_features.json
"""
from __future__ import annotations

import json
import typing
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple, Type, TypeVar, Union

from geoops.errors import GeoOpsError
from geoops.featureset import ComboSpec
from geoops.meshes import MESH_FAMILIES
from geoops.moments import MAX_ORDER, RAW, VARIANTS
from geoops.surrogate import KERNELS

C = TypeVar("C")


def _fail(message: str, **details) -> None:
    raise GeoOpsError("CONFIG_ERROR", message, **details)


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def _check_airfoil_points(n_points: int) -> None:
    # generate_airfoil splits the loop into two equal half-cosine sides
    if n_points < 32 or n_points % 2:
        _fail("n_points must be even and >= 32", n_points=n_points)


def _check_combos(combos: Tuple[str, ...]) -> None:
    if not combos:
        _fail("at least one combination is required")
    for text in combos:
        try:
            ComboSpec.parse(text)
        except GeoOpsError as e:
            _fail("bad combination", combo=text, reason=e.message)


@dataclass(frozen=True)
class FeaturesConfig:
    inputs: Tuple[str, ...] = ()
    params: Optional[str] = None
    generator: str = "airfoil"
    mesh_family: str = "cylinder"
    n_designs: int = 10
    n_points: int = 192
    profile_points: int = 192
    resample_mode: str = "curvature"
    moment_order: int = 4
    moment_variant: str = RAW
    fd_points: int = 256
    fd_sections: int = 32
    fd_per_section: int = 64
    include_mean_energy: bool = True
    wave_sections: int = 64
    design_files: bool = True
    seed: int = 0
    jobs: int = 1

    def __post_init__(self):
        if self.generator not in ("airfoil", "mesh", "none"):
            _fail("unknown generator", generator=self.generator)
        if self.mesh_family not in MESH_FAMILIES:
            _fail("unknown mesh family", mesh_family=self.mesh_family, known=sorted(MESH_FAMILIES))
        if not self.inputs and self.generator == "none" and not self.params:
            _fail("no inputs and no generator")
        if self.n_designs < 1:
            _fail("n_designs must be >= 1", n_designs=self.n_designs)
        if not 0 <= self.moment_order <= MAX_ORDER:
            _fail("moment_order out of range", moment_order=self.moment_order)
        if self.moment_variant not in VARIANTS:
            _fail("unknown moment variant", moment_variant=self.moment_variant)
        if self.resample_mode not in ("curvature", "arclength", "none"):
            _fail("unknown resample mode", resample_mode=self.resample_mode)
        if not (_is_pow2(self.fd_points) and self.fd_points >= 16):
            _fail("fd_points must be a power of two >= 16", fd_points=self.fd_points)
        if not (_is_pow2(self.fd_sections) and self.fd_sections >= 4):
            _fail("fd_sections must be a power of two >= 4", fd_sections=self.fd_sections)
        if not (_is_pow2(self.fd_per_section) and self.fd_per_section >= 16):
            _fail("fd_per_section must be a power of two >= 16", fd_per_section=self.fd_per_section)
        _check_airfoil_points(self.n_points)
        if self.profile_points < 16:
            _fail("profile_points must be >= 16", profile_points=self.profile_points)
        if self.wave_sections < 3:
            _fail("wave_sections must be >= 3", wave_sections=self.wave_sections)
        if self.jobs < 1:
            _fail("jobs must be >= 1", jobs=self.jobs)


@dataclass(frozen=True)
class ReduceConfig:
    features: str = "features.csv"
    combos: Tuple[str, ...] = ("P", "P,M,K,FT")
    threshold: float = 0.95
    samples: int = 100
    latent_scale: float = 1.0
    decoder: str = "airfoil_params"
    transform: str = "none"
    kernel_length: Optional[float] = None
    seed: int = 0
    jobs: int = 1

    def __post_init__(self):
        _check_combos(self.combos)
        if not 0.0 < self.threshold <= 1.0:
            _fail("threshold must lie in (0, 1]", threshold=self.threshold)
        if self.samples < 2:
            _fail("samples must be >= 2", samples=self.samples)
        if self.latent_scale <= 0:
            _fail("latent_scale must be positive", latent_scale=self.latent_scale)
        if self.decoder not in ("airfoil_params", "coordinates", "none"):
            _fail("unknown decoder", decoder=self.decoder)
        if self.transform not in ("none", "signed_log"):
            _fail("unknown transform", transform=self.transform)
        if self.kernel_length is not None and self.kernel_length <= 0:
            _fail("kernel_length must be positive", kernel_length=self.kernel_length)
        if self.jobs < 1:
            _fail("jobs must be >= 1", jobs=self.jobs)


@dataclass(frozen=True)
class SensitivityConfig:
    generator: str = "airfoil"
    n: int = 1024
    epsilons: Tuple[float, ...] = (0.1, 0.05)
    use_total: bool = True
    moment_order: int = 2
    moment_variant: str = RAW
    fd_points: int = 256
    seed: int = 0
    jobs: int = 1

    def __post_init__(self):
        if self.generator != "airfoil":
            _fail("unknown generator", generator=self.generator)
        if self.n < 64:
            _fail("n must be >= 64", n=self.n)
        if not self.epsilons or any(not 0.0 <= e <= 1.0 for e in self.epsilons):
            _fail("epsilons must lie in [0, 1]", epsilons=list(self.epsilons))
        if not 0 <= self.moment_order <= MAX_ORDER:
            _fail("moment_order out of range", moment_order=self.moment_order)
        if self.moment_variant not in VARIANTS:
            _fail("unknown moment variant", moment_variant=self.moment_variant)
        if not (_is_pow2(self.fd_points) and self.fd_points >= 16):
            _fail("fd_points must be a power of two >= 16", fd_points=self.fd_points)
        if self.jobs < 1:
            _fail("jobs must be >= 1", jobs=self.jobs)


@dataclass(frozen=True)
class SurrogateConfig:
    features: str = "features.csv"
    labels: str = "labels.csv"
    label_column: Optional[str] = None
    combos: Tuple[str, ...] = ("P", "P,M", "P,M,K,FT")
    kernels: Tuple[str, ...] = KERNELS
    test_fraction: float = 0.2
    validation_fraction: float = 0.2
    transform: str = "none"
    seed: int = 0

    def __post_init__(self):
        _check_combos(self.combos)
        if not self.kernels or any(k not in KERNELS for k in self.kernels):
            _fail("unknown kernel", kernels=list(self.kernels))
        for name in ("test_fraction", "validation_fraction"):
            if not 0.0 < getattr(self, name) < 1.0:
                _fail(f"{name} must lie in (0, 1)", **{name: getattr(self, name)})
        if self.transform not in ("none", "signed_log"):
            _fail("unknown transform", transform=self.transform)


@dataclass(frozen=True)
class QualityConfig:
    generated: str = "generated.csv"
    training: str = "training.csv"
    quality_column: Optional[str] = None
    gamma0: float = 1.0
    kernel_length: Optional[float] = None
    seed: int = 0

    def __post_init__(self):
        if self.gamma0 < 0:
            _fail("gamma0 must be nonnegative", gamma0=self.gamma0)
        if self.kernel_length is not None and self.kernel_length <= 0:
            _fail("kernel_length must be positive", kernel_length=self.kernel_length)


@dataclass(frozen=True)
class GenAirfoilsConfig:
    n_designs: int = 100
    n_points: int = 192
    write_dat: bool = False
    alpha_deg: float = 4.0
    reynolds: float = 1e6
    seed: int = 0
    jobs: int = 1

    def __post_init__(self):
        if self.n_designs < 1:
            _fail("n_designs must be >= 1", n_designs=self.n_designs)
        _check_airfoil_points(self.n_points)
        if self.reynolds <= 0:
            _fail("reynolds must be positive", reynolds=self.reynolds)
        if self.jobs < 1:
            _fail("jobs must be >= 1", jobs=self.jobs)


COMMAND_CONFIGS: Dict[str, Type[Any]] = {
    "features": FeaturesConfig,
    "reduce": ReduceConfig,
    "sensitivity": SensitivityConfig,
    "surrogate": SurrogateConfig,
    "quality": QualityConfig,
    "gen-airfoils": GenAirfoilsConfig,
}


# =========================
# Loading
# =========================
def load_profile(path: Union[str, Path]) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise GeoOpsError("CONFIG_ERROR", "profile read error", path=str(path), reason=str(e)) from None
    if not isinstance(data, dict):
        _fail("profile must be a JSON object", path=str(path))
    return data


def _section(profile: Mapping[str, Any], command: str) -> Dict[str, Any]:
    """Flat profiles apply as-is; keyed profiles contribute only this command's block."""
    if any(k in COMMAND_CONFIGS for k in profile):
        stray = [k for k in profile if k not in COMMAND_CONFIGS]
        if stray:
            _fail("keyed profile mixes command blocks and plain keys", key=stray[0])
        block = profile.get(command, {})
        if not isinstance(block, dict):
            _fail("command block must be an object", command=command)
        return dict(block)
    return dict(profile)


def _coerce(name: str, hint: Any, value: Any) -> Any:
    origin = typing.get_origin(hint)
    args = typing.get_args(hint)
    if origin is Union:
        if value is None and type(None) in args:
            return None
        inner = [a for a in args if a is not type(None)]
        return _coerce(name, inner[0], value)
    if origin in (tuple, Tuple):
        if isinstance(value, str):
            value = [value]
        if not isinstance(value, (list, tuple)):
            _fail("expected a list", key=name)
        return tuple(_coerce(name, args[0], v) for v in value)
    if hint is bool:
        if not isinstance(value, bool):
            _fail("expected true/false", key=name, value=value)
        return value
    if hint is int:
        if isinstance(value, bool) or not isinstance(value, int):
            _fail("expected an integer", key=name, value=value)
        return value
    if hint is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            _fail("expected a number", key=name, value=value)
        return float(value)
    if hint is str:
        if not isinstance(value, str):
            _fail("expected a string", key=name, value=value)
        return value
    return value


def resolve_config(cls: Type[C], profile: Optional[Mapping[str, Any]] = None,
                   overrides: Optional[Mapping[str, Any]] = None, command: str = "") -> C:
    """Build ``cls`` from its defaults, the profile block, then non-None overrides."""
    hints = typing.get_type_hints(cls)
    names = {f.name for f in fields(cls)}
    merged: Dict[str, Any] = {}
    block = _section(profile or {}, command) if profile else {}
    for key, value in block.items():
        if key not in names:
            _fail("unknown configuration key", key=key, command=command)
        merged[key] = _coerce(key, hints[key], value)
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key not in names:
            _fail("unknown configuration key", key=key, command=command)
        merged[key] = _coerce(key, hints[key], value)
    return cls(**merged)


def config_dict(config: Any, command: str) -> dict:
    out = asdict(config)
    for k, v in out.items():
        if isinstance(v, tuple):
            out[k] = list(v)
    out["command"] = command
    return out
