import json

import pytest

from geoops.config import (FeaturesConfig, GenAirfoilsConfig, QualityConfig, ReduceConfig, SensitivityConfig,
                           SurrogateConfig, config_dict, load_profile, resolve_config)
from geoops.errors import GeoOpsError


def _code(exc_info):
    return exc_info.value.code


def test_defaults_apply():
    cfg = resolve_config(FeaturesConfig, None, {}, "features")
    assert cfg == FeaturesConfig()
    assert cfg.moment_order == 4


def test_flat_profile_then_flags():
    cfg = resolve_config(ReduceConfig, {"threshold": 0.9, "samples": 50}, {"samples": 20, "seed": None}, "reduce")
    assert cfg.threshold == 0.9
    assert cfg.samples == 20
    assert cfg.seed == 0


def test_keyed_profile_uses_command_block():
    profile = {"features": {"moment_order": 3}, "reduce": {"threshold": 0.8}}
    assert resolve_config(FeaturesConfig, profile, {}, "features").moment_order == 3
    assert resolve_config(ReduceConfig, profile, {}, "reduce").threshold == 0.8
    assert resolve_config(QualityConfig, profile, {}, "quality") == QualityConfig()


def test_mixed_profile_rejected():
    with pytest.raises(GeoOpsError) as e:
        resolve_config(FeaturesConfig, {"features": {}, "seed": 3}, {}, "features")
    assert _code(e) == "CONFIG_ERROR"


def test_unknown_key_rejected():
    with pytest.raises(GeoOpsError) as e:
        resolve_config(FeaturesConfig, {"moment_orders": 3}, {}, "features")
    assert _code(e) == "CONFIG_ERROR"
    assert e.value.details["key"] == "moment_orders"


@pytest.mark.parametrize("key,value", [("moment_order", "4"), ("moment_order", True), ("include_mean_energy", 1),
                                       ("inputs", 5)])
def test_wrong_types_rejected(key, value):
    with pytest.raises(GeoOpsError) as e:
        resolve_config(FeaturesConfig, {key: value}, {}, "features")
    assert _code(e) == "CONFIG_ERROR"


def test_lists_and_numbers_are_coerced():
    cfg = resolve_config(SensitivityConfig, {"epsilons": [0.2, 0], "n": 128}, {}, "sensitivity")
    assert cfg.epsilons == (0.2, 0.0)
    cfg = resolve_config(SurrogateConfig, {"combos": "P,M"}, {}, "surrogate")
    assert cfg.combos == ("P,M",)


@pytest.mark.parametrize("cls,bad", [
    (FeaturesConfig, {"fd_points": 100}),
    (FeaturesConfig, {"moment_order": 17}),
    (FeaturesConfig, {"moment_variant": "HU"}),
    (FeaturesConfig, {"n_points": 20}),
    (FeaturesConfig, {"n_points": 97}),
    (FeaturesConfig, {"generator": "hull"}),
    (FeaturesConfig, {"mesh_family": "torus"}),
    (FeaturesConfig, {"wave_sections": 2}),
    (GenAirfoilsConfig, {"n_points": 20}),
    (GenAirfoilsConfig, {"n_points": 33}),
    (ReduceConfig, {"threshold": 0.0}),
    (ReduceConfig, {"combos": ["P,Q"]}),
    (SensitivityConfig, {"n": 32}),
    (SurrogateConfig, {"kernels": ["LINEAR"]}),
    (QualityConfig, {"gamma0": -1.0}),
])
def test_validation_failures(cls, bad):
    with pytest.raises(GeoOpsError) as e:
        resolve_config(cls, bad, {}, "")
    assert _code(e) == "CONFIG_ERROR"


def test_load_profile(tmp_path):
    path = tmp_path / "study.json"
    path.write_text(json.dumps({"features": {"seed": 4}}))
    assert load_profile(path) == {"features": {"seed": 4}}


@pytest.mark.parametrize("text", ["{not json", "[1, 2]"])
def test_bad_profile_files(tmp_path, text):
    path = tmp_path / "bad.json"
    path.write_text(text)
    with pytest.raises(GeoOpsError) as e:
        load_profile(path)
    assert _code(e) == "CONFIG_ERROR"


def test_missing_profile(tmp_path):
    with pytest.raises(GeoOpsError):
        load_profile(tmp_path / "absent.json")


def test_config_dict_is_json_ready():
    out = config_dict(ReduceConfig(), "reduce")
    assert out["command"] == "reduce"
    assert out["combos"] == ["P", "P,M,K,FT"]
    json.dumps(out)
