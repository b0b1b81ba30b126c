"""Effective 1D potentials, binding verdicts, critical pitch and phase diagram"""

import logging

import numpy as np

from ..config import build_helix, build_perturbation
from ..effective_model import (
    PHASE_COLUMNS,
    POTENTIAL_COLUMNS,
    binding_verdict,
    critical_pitch,
    inflate_profile,
    phase_diagram,
    potential_profile,
    sample_potential,
    squeeze_profile,
)
from ..utils import emit_table

logger = logging.getLogger(__name__)


def run_effective(descriptor, output_dir):
    block = descriptor["effective"]
    kind = block["kind"]
    helix = build_helix(descriptor["helix"])
    pert = build_perturbation(descriptor["perturbation"])
    box = float(descriptor["grid"]["s_box"])
    s_values = np.linspace(-box, box, int(descriptor["grid"]["samples"]))
    rows = potential_profile(kind, helix, pert, s_values)
    path = emit_table(output_dir, descriptor, f"effective_{kind}", POTENTIAL_COLUMNS, rows, comments=(
        f"{kind} cross section; energies in units hbar^2/2m = 1",
        "s: arc length of the perturbed helix (length)",
        "V_exact: -kappa^2/4 (circular) or -kappa^2 cos^2(alpha)/4 + (tau - alpha')^2/2 (ribbon) on the exact "
        "perturbed geometry (1/length^2)",
        "V_expansion: E0 + eps (c_delta delta + c_ddot delta'') at the unperturbed parameter of s (1/length^2)",
    ))
    pot = sample_potential(kind, helix, pert, box, float(s_values[1] - s_values[0]))
    verdict = binding_verdict(pot, confirm=bool(block["confirm"]))
    diagnostics = {
        "E0": pot.E0,
        "mean_integral": verdict.mean_integral,
        "leading_integral": verdict.leading_integral,
        "binds": verdict.binds,
        "critical": verdict.critical,
        "shallow_ratio": verdict.shallow_ratio,
    }
    if verdict.eigenvalue_check is not None:
        diagnostics["eigenvalues"] = verdict.eigenvalue_check.eigenvalues.tolist()
        diagnostics["confirmation"] = verdict.metadata
    message = "attractive in the mean" if verdict.binds else "not attractive in the mean"
    return message, {"outputs": [str(path)], "diagnostics": diagnostics}


def run_critical_pitch(descriptor, output_dir):
    kind = descriptor["effective"]["kind"]
    tolerances = descriptor["tolerances"]
    result = critical_pitch(kind, R0=float(descriptor["helix"]["R0"]), tol=float(tolerances["bisection"]),
                            exact_tol=float(tolerances["exact_pitch"]))
    path = emit_table(output_dir, descriptor, f"critical_pitch_{kind}",
                      ("kind", "pitch", "exact_pitch", "exact_lo", "exact_hi"),
                      [(kind, result.value, result.exact_value, *result.exact_bracket)],
                      comments=(
                          "pitch: R0 beta0 where the coefficient c_delta of V_eff changes sign (dimensionless)",
                          "exact_pitch: midpoint of the final bisection interval on which int (V_eff - E0) ds "
                          "changes sign for a small squeeze on the exact geometry (dimensionless)",
                          "exact_lo, exact_hi: end points of that interval (dimensionless)",
                      ))
    return f"{result.value:.4f}", {"outputs": [str(path)], "diagnostics": {"kind": kind, "pitch": result.value}}


def run_phase_diagram(descriptor, output_dir):
    block = descriptor["effective"]
    kind = block["kind"]
    epsilon = float(block["epsilon"])
    profiles = {
        "squeeze": squeeze_profile(epsilon, block["amplitude"], block["half_width"]),
        "inflate": inflate_profile(epsilon, block["amplitude"], block["half_width"]),
    }
    rows = phase_diagram(kind, block["pitches"], profiles, epsilon, R0=float(descriptor["helix"]["R0"]),
                         confirm=bool(block["confirm"]), workers=descriptor["workers"])
    path = emit_table(output_dir, descriptor, f"phase_diagram_{kind}", PHASE_COLUMNS, rows, comments=(
        f"{kind} cross section, epsilon = {epsilon!r}",
        "pitch: R0 beta0 (dimensionless)",
        "profile: squeeze (delta <= 0) or inflate (delta >= 0)",
        "mean_integral: int (V_eff - E0) ds on the exact geometry (1/length)",
        "leading_integral: eps c_delta sqrt(1 + R0^2 beta0^2) int delta dt (1/length)",
        "binds: mean_integral < 0",
        "expected: c_delta int delta < 0",
        "eigenvalue: lowest eigenvalue of -d^2/ds^2 + V_eff below E0 when confirmed (1/length^2)",
        "shallow_ratio: -4 (eigenvalue - E0) / mean_integral^2 (dimensionless)",
    ))
    mismatches = sum(1 for row in rows if row[4] != row[5])
    return (f"{len(rows)} verdicts, {mismatches} off the two-regime prediction",
            {"outputs": [str(path)], "diagnostics": {"mismatches": mismatches}})
