"""Transverse ground energies E(alpha) and the slope at alpha = 1"""

import logging

import numpy as np

from ..config import build_cross_section
from ..cross_section import ENERGY_COLUMNS, Disc, bessel_oracle, energy_curve, energy_slope, transverse_grid
from ..numerics import richardson_ladder
from ..utils import emit_table

logger = logging.getLogger(__name__)


def _centred_disc(cs):
    shape = cs.shape
    return (isinstance(shape, Disc) and np.allclose(shape.center, (0.0, 0.0))
            and np.allclose(cs.scaling_center, (0.0, 0.0)))


def run_cross_spectrum(descriptor, output_dir):
    cs = build_cross_section(descriptor["cross_section"])
    beta0 = float(descriptor["helix"]["beta0"])
    tol = float(descriptor["tolerances"]["eig"])
    rows = energy_curve(cs, descriptor["grid"]["alphas"], beta0, descriptor["workers"])
    path = emit_table(output_dir, descriptor, "cross_spectrum", ENERGY_COLUMNS, rows, comments=(
        "alpha: factor of the radial scaling of the cross section about its scaling centre (dimensionless)",
        "energy: lowest eigenvalue of -Laplacian - beta0^2 (t2 d3 - t3 d2)^2 with Dirichlet conditions on the "
        "scaled section, assembled on the master grid (1/length^2)",
        "energy_extrapolated: (4 E(h/2) - E(h)) / 3 from the master grid and its refinement (1/length^2)",
    ))

    ladder = descriptor["ladder"]
    slope = energy_slope(cs, beta0, richardson_ladder(ladder["base"], ladder["ratio"], ladder["rungs"]), tol=tol)
    diagnostics = {
        "nodes": transverse_grid(cs).size,
        "energy_slope": slope.value,
        "energy_slope_coarse": slope.coarse,
        "energy_slope_error": slope.error_estimate,
        "energy_slope_flagged": slope.flagged,
    }
    if _centred_disc(cs):
        oracle = float(bessel_oracle(beta0, count=1, radius=cs.shape.radius)[0])
        diagnostics["bessel_oracle"] = oracle
        diagnostics["bessel_slope"] = -2.0 * oracle
    logger.info("Cross-section spectrum written", extra={"rows": len(rows), "slope": slope.value})
    return f"Computed E(alpha) at {len(rows)} scalings", {"outputs": [str(path)], "diagnostics": diagnostics}
