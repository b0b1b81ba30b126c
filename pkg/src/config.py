"""Run descriptor defaults, validation and logging configuration"""

import copy
import json
import logging

from pythonjsonlogger import jsonlogger

from .cross_section import CrossSection, Disc, Polygon, segment
from .errors import InvalidConfigError, OutputError
from .geometry import HelixParams, PerturbationProfile
from .numerics import default_workers
from .straightened_tube import AlphaProfile, TubeConfig

logger = logging.getLogger(__name__)

COMMANDS = ("frenet", "cross-spectrum", "tube-bind", "effective", "critical-pitch", "phase-diagram")
FORMATS = ("csv", "json")
SHAPES = ("disc", "polygon", "segment")

DEFAULTS = {
    "output": {"format": "csv", "path": None},
    "helix": {"R0": 1.0, "beta0": 1.0},
    "perturbation": {"amplitude": 1.0, "center": 0.0, "half_width": 1.0, "epsilon": 0.0, "kind": "bump"},
    "cross_section": {
        "shape": {"type": "disc", "center": [0.0, 0.0], "radius": 1.0},
        "scaling_center": [0.0, 0.0],
        "grid_spacing": 0.1,
    },
    "alpha_profile": {"kind": "constant", "epsilon": 0.0, "half_width": 1.0, "center": 0.0, "s0": 1.0,
                      "cap_width": 0.0},
    "grid": {
        "s_box": 12.0,
        "s_spacing": 0.1,
        "s_core": None,
        "stretch": 1.0,
        "max_s_spacing": None,
        "samples": 201,
        "alphas": [0.8, 0.9, 1.0, 1.1, 1.2],
        "memory_cap": 4_000_000,
    },
    "tolerances": {"eig": 1e-9, "bisection": 1e-4, "exact_pitch": 1e-3},
    "ladder": {"base": 1e-2, "ratio": 2.0, "rungs": 4},
    "effective": {
        "kind": "circular",
        "confirm": True,
        "pitches": [0.25 * k for k in range(1, 17)],
        "epsilon": 1e-3,
        "amplitude": 4.0,
        "half_width": 4.0,
    },
    "eigenpairs": 3,
    "workers": None,
    "time_limits_seconds": {"cross-spectrum": 10, "tube-bind": 600, "phase-diagram": 300},
}


def setup_logging(level="INFO"):
    """Setup JSON logging"""
    log_handler = logging.StreamHandler()
    formatter = jsonlogger.JsonFormatter(
        '%(asctime)s %(name)s %(levelname)s %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    )
    log_handler.setFormatter(formatter)

    root_logger = logging.getLogger()
    root_logger.handlers = [log_handler]
    root_logger.setLevel(level)


def load_descriptor(path):
    """Read one JSON run descriptor"""
    try:
        with open(path, encoding="utf-8") as f:
            raw = json.load(f)
    except OSError as e:
        raise OutputError(f"cannot read descriptor {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise InvalidConfigError(f"descriptor {path} is not valid JSON: {e}") from e
    if not isinstance(raw, dict):
        raise InvalidConfigError(f"descriptor {path} must hold a JSON object")
    return raw


def _merge(defaults, overrides):
    merged = copy.deepcopy(defaults)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict) and key != "shape":
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def resolve_descriptor(raw, command=None):
    """Fill every default so the manifest records the complete run"""
    resolved = _merge(DEFAULTS, raw)
    if command is not None:
        resolved["command"] = command
    if resolved.get("workers") is None:
        resolved["workers"] = default_workers()
    return resolved


def build_helix(block):
    return HelixParams(float(block["R0"]), float(block["beta0"]))


def build_perturbation(block):
    return PerturbationProfile(float(block["amplitude"]), float(block["center"]), float(block["half_width"]),
                               float(block["epsilon"]), block["kind"])


def build_shape(block):
    kind = block.get("type")
    if kind == "disc":
        return Disc(tuple(block.get("center", (0.0, 0.0))), float(block.get("radius", 1.0)))
    if kind == "polygon":
        return Polygon(tuple(tuple(v) for v in block["vertices"]))
    if kind == "segment":
        return segment(float(block["length"]), tuple(block.get("center", (0.0, 0.0))))
    raise InvalidConfigError(f"cross_section.shape.type must be one of {SHAPES}, got {kind!r}")


def build_cross_section(block):
    return CrossSection(build_shape(block["shape"]), tuple(block["scaling_center"]), float(block["grid_spacing"]))


def build_alpha_profile(block):
    return AlphaProfile(block["kind"], float(block["epsilon"]), float(block["half_width"]), float(block["center"]),
                        float(block["s0"]), float(block["cap_width"]))


def build_tube_config(descriptor):
    grid = descriptor["grid"]
    return TubeConfig(
        build_cross_section(descriptor["cross_section"]),
        float(descriptor["helix"]["beta0"]),
        build_alpha_profile(descriptor["alpha_profile"]),
        s_box=float(grid["s_box"]),
        s_spacing=float(grid["s_spacing"]),
        s_core=grid["s_core"],
        stretch=float(grid["stretch"]),
        max_s_spacing=grid["max_s_spacing"],
        memory_cap=int(grid["memory_cap"]),
    )


# blocks each command builds into domain objects
_BUILDERS = {
    "frenet": (("helix", build_helix), ("perturbation", build_perturbation)),
    "cross-spectrum": (("cross_section", build_cross_section),),
    "tube-bind": (("cross_section", build_cross_section), ("alpha_profile", build_alpha_profile)),
    "effective": (("helix", build_helix), ("perturbation", build_perturbation)),
    "critical-pitch": (),
    "phase-diagram": (),
}


def _is_number(value):
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _is_integer(value):
    return isinstance(value, int) and not isinstance(value, bool)


def validate_descriptor(descriptor):
    """Collect every violated invariant before failing"""
    violations = []
    command = descriptor.get("command")
    if command not in COMMANDS:
        violations.append(f"command must be one of {COMMANDS}, got {command!r}")
    malformed = set()
    for name, default in DEFAULTS.items():
        if isinstance(default, dict) and not isinstance(descriptor.get(name), dict):
            malformed.add(name)
            violations.append(f"{name} must be a JSON object, got {descriptor.get(name)!r}")

    if "output" not in malformed and descriptor["output"].get("format") not in FORMATS:
        violations.append(f"output.format must be one of {FORMATS}, got {descriptor['output'].get('format')!r}")
    if "tolerances" not in malformed:
        for name in ("eig", "bisection", "exact_pitch"):
            value = descriptor["tolerances"].get(name)
            if not (_is_number(value) and value > 0):
                violations.append(f"tolerances.{name} must be a number > 0, got {value!r}")
    if "effective" not in malformed:
        effective = descriptor["effective"]
        if effective.get("kind") not in ("circular", "ribbon"):
            violations.append(f"effective.kind must be circular or ribbon, got {effective.get('kind')!r}")
        if not (_is_number(effective.get("epsilon")) and effective["epsilon"] > 0):
            violations.append(f"effective.epsilon must be a number > 0, got {effective.get('epsilon')!r}")
    if "grid" not in malformed:
        grid = descriptor["grid"]
        if not (_is_integer(grid.get("samples")) and grid["samples"] >= 2):
            violations.append(f"grid.samples must be an integer >= 2, got {grid.get('samples')!r}")
        alphas = grid.get("alphas")
        if not (isinstance(alphas, list) and alphas and all(_is_number(a) and a > 0 for a in alphas)):
            violations.append(f"grid.alphas must be a non-empty list of numbers > 0, got {alphas!r}")
    for name in ("eigenpairs", "workers"):
        value = descriptor.get(name)
        if not (_is_integer(value) and value >= 1):
            violations.append(f"{name} must be an integer >= 1, got {value!r}")

    for block, builder in _BUILDERS.get(command, ()):
        if block in malformed:
            continue
        try:
            builder(descriptor[block])
        except InvalidConfigError as e:
            violations.extend(e.violations or [str(e)])
        except (KeyError, TypeError, ValueError) as e:
            violations.append(f"{block}: malformed block ({e})")
    if command == "tube-bind" and not violations:
        try:
            build_tube_config(descriptor)
        except InvalidConfigError as e:
            violations.extend(e.violations or [str(e)])
        except (KeyError, TypeError, ValueError) as e:
            violations.append(f"grid: malformed block ({e})")

    if violations:
        for violation in violations:
            logger.warning("descriptor violation", extra={"violation": violation})
        raise InvalidConfigError("invalid run descriptor:\n" + "\n".join(f"  - {v}" for v in violations),
                                 violations)
    return descriptor
