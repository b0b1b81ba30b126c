"""Frenet data of the perturbed helix sampled in arc length"""

import logging

import numpy as np

from ..config import build_helix, build_perturbation
from ..geometry import SAMPLE_COLUMNS, helix_curve, sample_curve
from ..utils import emit_table

logger = logging.getLogger(__name__)


def run_frenet(descriptor, output_dir):
    helix = build_helix(descriptor["helix"])
    pert = build_perturbation(descriptor["perturbation"])
    curve = helix_curve(helix, pert)
    box = float(descriptor["grid"]["s_box"])
    s_values = np.linspace(-box, box, int(descriptor["grid"]["samples"]))
    rows = sample_curve(curve, s_values)
    path = emit_table(output_dir, descriptor, "frenet", SAMPLE_COLUMNS, rows, comments=(
        "t: parameter of the perturbed helix r(t) = (t, R(t) cos(beta0 t), R(t) sin(beta0 t)), R = R0 + eps delta(t)",
        "s: arc length int_0^t |r'(u)| du (length)",
        "x, y, z: components of r(t) (length)",
        "kappa: |r' x r''| / |r'|^3 (1/length)",
        "tau: (r' x r'') . r''' / |r' x r''|^2 (1/length)",
        "alpha: ribbon tilt from the Frenet normal, tan(alpha) = n_x / b_x along the axis x, in (-pi/2, pi/2] (radians)",
    ))
    logger.info("Frenet samples written", extra={"rows": len(rows), "path": str(path)})
    diagnostics = {"kappa0": helix.kappa0, "tau0": helix.tau0, "samples": len(rows)}
    return f"Sampled {len(rows)} points", {"outputs": [str(path)], "diagnostics": diagnostics}
