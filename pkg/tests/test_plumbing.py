import logging
import operator

import pytest

from geoops.batch import map_ordered
from geoops.errors import GeoOpsError, require
from geoops.logs import configure_logging


def test_error_carries_code_and_details():
    err = GeoOpsError("PARSE_ERROR", "bad coordinate", line=3, path="a.dat")
    assert err.code == "PARSE_ERROR"
    assert err.details == {"line": 3, "path": "a.dat"}
    assert str(err) == "PARSE_ERROR: bad coordinate (line=3, path=a.dat)"
    assert isinstance(err, ValueError)


def test_message_defaults_to_code():
    assert str(GeoOpsError("ZERO_VECTOR")) == "ZERO_VECTOR: ZERO_VECTOR"


def test_annotate_returns_a_copy():
    err = GeoOpsError("NOT_WATERTIGHT", "open edges", edges=4)
    tagged = err.annotate(design_id="d7")
    assert tagged.details == {"edges": 4, "design_id": "d7"}
    assert tagged.code == err.code
    assert "design_id" not in err.details


def test_require():
    require(True, "unused")
    with pytest.raises(GeoOpsError) as e:
        require(False, "n must be positive", n=0)
    assert e.value.code == "INVALID_ARGUMENT"
    assert e.value.details == {"n": 0}


@pytest.mark.parametrize("jobs", [1, 2])
def test_map_ordered_keeps_input_order(jobs):
    assert map_ordered(operator.neg, range(9), jobs=jobs) == [-i for i in range(9)]


def test_map_ordered_empty():
    assert map_ordered(operator.neg, [], jobs=4) == []


def test_tagged_log_lines(capsys):
    configure_logging("info")
    log = logging.getLogger("geoops.test")
    log.debug("hidden")
    log.info("Wrote %s", "x.csv")
    log.warning("d3: NOT_WATERTIGHT open edges")
    err = capsys.readouterr().err.splitlines()
    assert err == ["[info] Wrote x.csv", "[warn] d3: NOT_WATERTIGHT open edges"]
    configure_logging("warn")
    log.info("quiet")
    assert capsys.readouterr().err == ""


def test_cli_usage_block_names_every_command():
    from geoops import cli
    assert "Usage:" in cli.__doc__
    for command in cli.COMMANDS:
        assert f"python -m geoops {command}" in cli.__doc__
