"""Bound states of the straightened tube below the continuum threshold"""

import logging

from ..config import build_tube_config
from ..straightened_tube import bound_states_below_threshold
from ..utils import emit_table

logger = logging.getLogger(__name__)

BOUND_STATE_COLUMNS = ("index", "eigenvalue", "depth", "refined_eigenvalue", "residual")


def run_tube_bind(descriptor, output_dir):
    config = build_tube_config(descriptor)
    result = bound_states_below_threshold(config, k=int(descriptor["eigenpairs"]),
                                          tol=float(descriptor["tolerances"]["eig"]))
    threshold = result.metadata["threshold"]
    rows = [(i, value, threshold - value, refined, residual)
            for i, (value, refined, residual) in enumerate(zip(result.eigenvalues, result.metadata["refined_kept"],
                                                               result.residual_norms))]
    path = emit_table(output_dir, descriptor, "tube_bind", BOUND_STATE_COLUMNS, rows, comments=(
        f"threshold E(1) = {threshold!r} (1/length^2): lowest eigenvalue of the cross-section operator at alpha = 1",
        "index: position in ascending eigenvalue order, from 0",
        "eigenvalue: discrete eigenvalue of the straightened-tube form that persists at 1.5 L (1/length^2)",
        "depth: threshold - eigenvalue (1/length^2)",
        "refined_eigenvalue: the same state with half the s and transverse spacings (1/length^2)",
        "residual: ||K v - lambda W v|| / ||v|| of the eigenpair",
    ))
    message = f"{result.count} bound states below the threshold" if result.count else "no bound states"
    logger.info(message, extra={"threshold": threshold, "count": result.count})
    return message, {"outputs": [str(path)], "diagnostics": result.metadata}
