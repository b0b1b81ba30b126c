"""Command-line entry point"""

import argparse
import json
import logging
import sys
import time

from .commands import HANDLERS
from .config import COMMANDS, load_descriptor, resolve_descriptor, setup_logging, validate_descriptor
from .decorators import command_handler
from .errors import WaveguideError
from .utils import create_result, write_manifest

logger = logging.getLogger(__name__)

# commands that run without a descriptor file
OPTIONAL_DESCRIPTOR = ("critical-pitch", "phase-diagram")


def create_parser():
    """Argument parser factory"""
    parser = argparse.ArgumentParser(
        prog="helical-waveguide",
        description="Spectral computations for perturbed helical quantum waveguides.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        sub = subparsers.add_parser(command)
        nargs = "?" if command in OPTIONAL_DESCRIPTOR else None
        sub.add_argument("descriptor", nargs=nargs, default=None, help="JSON run descriptor")
        sub.add_argument("--output-dir", default="results", help="Directory for tables and manifest.json")
        sub.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
        sub.add_argument("--workers", type=int, default=None, help="Process pool size (default: CPU count)")
        if command in OPTIONAL_DESCRIPTOR:
            sub.add_argument("--kind", choices=["circular", "ribbon"], default=None)
    return parser


@command_handler
def run(descriptor, output_dir):
    """Validate a resolved descriptor, dispatch it and record the manifest"""
    validate_descriptor(descriptor)
    started = time.perf_counter()
    message, data = HANDLERS[descriptor["command"]](descriptor, output_dir)
    manifest = write_manifest(output_dir, descriptor, data.get("outputs", []), data.get("diagnostics", {}),
                              time.perf_counter() - started)
    data["manifest"] = str(manifest)
    return message, data


def main(argv=None):
    args = create_parser().parse_args(argv)
    setup_logging(args.log_level)
    try:
        raw = load_descriptor(args.descriptor) if args.descriptor else {}
    except WaveguideError as e:
        result, code = create_result(e.exit_code, str(e))
        logger.error("Descriptor not loaded", extra={"result": result})
        return code
    kind = getattr(args, "kind", None)
    if kind and isinstance(raw.setdefault("effective", {}), dict):
        raw["effective"]["kind"] = kind
    if args.workers is not None:
        raw["workers"] = args.workers
    descriptor = resolve_descriptor(raw, args.command)
    result, code = run(descriptor, args.output_dir)
    logger.info("Run result", extra={"result": result["message"], "code": code})
    print(json.dumps({k: result[k] for k in ("code", "message")}))
    return code


if __name__ == "__main__":
    sys.exit(main())
