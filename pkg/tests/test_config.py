import json
import logging

import pytest
from pythonjsonlogger import jsonlogger

from src.config import (
    DEFAULTS,
    build_alpha_profile,
    build_cross_section,
    build_shape,
    build_tube_config,
    load_descriptor,
    resolve_descriptor,
    setup_logging,
    validate_descriptor,
)
from src.cross_section import Disc, Polygon
from src.decorators import command_handler
from src.errors import InvalidConfigError, InvariantViolation, OutputError, SolverFailure, TiltUndefinedError
from src.utils import INVALID_CONFIG, INVARIANT_VIOLATION, IO_ERROR, SOLVER_FAILURE, SUCCESS, create_result


def test_setup_logging_installs_json_formatter():
    setup_logging("DEBUG")
    root = logging.getLogger()

    assert len(root.handlers) == 1
    assert isinstance(root.handlers[0].formatter, jsonlogger.JsonFormatter)
    assert root.level == logging.DEBUG
    setup_logging("INFO")


def test_resolve_fills_every_default():
    resolved = resolve_descriptor({"helix": {"beta0": 2.0}}, "frenet")

    assert resolved["command"] == "frenet"
    assert resolved["helix"] == {"R0": 1.0, "beta0": 2.0}
    assert resolved["tolerances"] == DEFAULTS["tolerances"]
    assert resolved["workers"] >= 1
    assert DEFAULTS["helix"]["beta0"] == 1.0


def test_shape_block_is_replaced_not_merged():
    square = {"type": "polygon", "vertices": [[0, 0], [1, 0], [1, 1], [0, 1]]}
    resolved = resolve_descriptor({"cross_section": {"shape": square}})

    assert resolved["cross_section"]["shape"] == square
    assert resolved["cross_section"]["grid_spacing"] == 0.1


def test_build_shapes():
    assert isinstance(build_shape({"type": "disc", "radius": 2.0}), Disc)
    assert isinstance(build_shape({"type": "polygon", "vertices": [[0, 0], [1, 0], [0, 1]]}), Polygon)
    xmin, xmax, _, _ = build_shape({"type": "segment", "length": 3.0}).bounding_box()
    assert xmax - xmin == pytest.approx(3.0)
    with pytest.raises(InvalidConfigError):
        build_shape({"type": "ellipse"})


def test_build_tube_config():
    descriptor = resolve_descriptor({
        "alpha_profile": {"kind": "tent", "epsilon": 0.1, "s0": 1.0, "cap_width": 0.05},
        "grid": {"s_box": 4.0, "s_spacing": 0.2},
    }, "tube-bind")
    config = build_tube_config(descriptor)

    assert config.alpha_profile.kind == "tent"
    assert config.theta_rate == 1.0
    assert config.s_box == 4.0
    assert config.cross_section == build_cross_section(descriptor["cross_section"])
    assert build_alpha_profile(descriptor["alpha_profile"]) == config.alpha_profile


def test_validation_collects_every_violation(fixtures_dir):
    descriptor = resolve_descriptor(load_descriptor(fixtures_dir / "invalid.json"), "frenet")
    descriptor["output"]["format"] = "xml"

    with pytest.raises(InvalidConfigError) as info:
        validate_descriptor(descriptor)
    violations = info.value.violations
    assert len(violations) == 3
    assert any("R0" in v for v in violations)
    assert any("half_width" in v for v in violations)
    assert any("output.format" in v for v in violations)


def test_validation_of_tube_grid():
    descriptor = resolve_descriptor({
        "alpha_profile": {"kind": "bump", "epsilon": 0.1, "half_width": 5.0},
        "grid": {"s_box": 3.0},
    }, "tube-bind")
    with pytest.raises(InvalidConfigError, match="inside the box"):
        validate_descriptor(descriptor)


def test_valid_descriptor_passes(fixtures_dir):
    descriptor = resolve_descriptor(load_descriptor(fixtures_dir / "tube_bind.json"), "tube-bind")
    assert validate_descriptor(descriptor) is descriptor


def test_load_descriptor_errors(tmp_path):
    with pytest.raises(OutputError):
        load_descriptor(tmp_path / "missing.json")
    broken = tmp_path / "broken.json"
    broken.write_text("{not json", encoding="utf-8")
    with pytest.raises(InvalidConfigError):
        load_descriptor(broken)
    listed = tmp_path / "list.json"
    listed.write_text(json.dumps([1, 2]), encoding="utf-8")
    with pytest.raises(InvalidConfigError):
        load_descriptor(listed)


def test_result_envelope():
    result, code = create_result(SUCCESS, "done", {"rows": 3})
    assert code == 0
    assert result == {"code": 0, "message": "done", "data": {"rows": 3}, "payLoad": {}}


@pytest.mark.parametrize("error, status", [
    (InvalidConfigError("bad", ["a", "b"]), INVALID_CONFIG),
    (TiltUndefinedError("flat"), INVALID_CONFIG),
    (SolverFailure("stuck", best_residual=1e-3), SOLVER_FAILURE),
    (InvariantViolation("slope"), INVARIANT_VIOLATION),
    (OutputError("disk"), IO_ERROR),
])
def test_command_handler_maps_errors(error, status):
    @command_handler
    def failing(descriptor):
        raise error

    result, code = failing({"command": "frenet"})
    assert code == status
    assert result["code"] == status
    assert result["message"] == str(error)


def test_command_handler_success_carries_descriptor():
    @command_handler
    def succeeding(descriptor):
        return "ok", {"value": 1}

    descriptor = {"command": "frenet"}
    result, code = succeeding(descriptor)
    assert code == SUCCESS
    assert result["data"] == {"value": 1}
    assert result["payLoad"] is descriptor


def test_solver_failure_reports_residual():
    @command_handler
    def failing(descriptor):
        raise SolverFailure("stuck", best_residual=0.25)

    result, _ = failing({})
    assert result["data"] == {"best_residual": 0.25}


def test_time_limit_overrun_is_logged(caplog):
    @command_handler
    def succeeding(descriptor):
        return "ok", {}

    with caplog.at_level(logging.WARNING, logger="src.decorators"):
        _, code = succeeding({"command": "frenet", "time_limits_seconds": {"frenet": -1.0}})
    assert code == SUCCESS
    assert any("time limit" in record.getMessage() for record in caplog.records)
