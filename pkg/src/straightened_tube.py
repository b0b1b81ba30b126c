"""Straightened helical tube: metric, quadratic form, trial functions, bound states"""

import logging
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp

from .cross_section import CrossSection, ground_energy, ground_state, transverse_grid
from .errors import InvalidConfigError
from .numerics import DEFAULT_EIG_TOL, SparseSymmetricOperator, SpectralResult, smallest_eigenpairs

logger = logging.getLogger(__name__)

ALPHA_KINDS = ("constant", "bump", "tent")
DEFAULT_MEMORY_CAP = 4_000_000
TAIL_FLOOR = 1e-8


@dataclass(frozen=True)
class AlphaProfile:
    """Scaling alpha(s) of the cross section along the tube.

    ``bump``: 1 + epsilon (1 - ((s - center)/half_width)^2)^3.
    ``tent``: 1 + epsilon (s0 - |s|)_+, optionally rounded at its three kinks
    by quadratic caps of width ``cap_width`` (C^1).
    """

    kind: str = "constant"
    epsilon: float = 0.0
    half_width: float = 1.0
    center: float = 0.0
    s0: float = 1.0
    cap_width: float = 0.0

    def __post_init__(self):
        violations = []
        if self.kind not in ALPHA_KINDS:
            violations.append(f"AlphaProfile.kind must be one of {ALPHA_KINDS}, got {self.kind!r}")
        if not self.half_width > 0:
            violations.append(f"AlphaProfile.half_width must be > 0, got {self.half_width}")
        if not self.s0 > 0:
            violations.append(f"AlphaProfile.s0 must be > 0, got {self.s0}")
        if not 0 <= self.cap_width < self.s0:
            violations.append(f"AlphaProfile.cap_width must lie in [0, s0), got {self.cap_width}")
        if violations:
            raise InvalidConfigError("; ".join(violations), violations)

    @property
    def support_end(self):
        """alpha == 1 for |s| >= support_end"""
        if self.kind == "constant" or self.epsilon == 0:
            return 0.0
        if self.kind == "bump":
            return abs(self.center) + self.half_width
        return self.s0 + 0.5 * self.cap_width

    def _tent(self, s):
        eps, s0 = self.epsilon, self.s0
        inside = np.abs(s) < s0
        value = np.where(inside, eps * (s0 - np.abs(s)), 0.0)
        slope = np.where(inside, -eps * np.sign(s), 0.0)
        w = self.cap_width
        if w > 0:
            for kink, m1, m2 in ((-s0, 0.0, eps), (0.0, eps, -eps), (s0, -eps, 0.0)):
                x = s - (kink - 0.5 * w)
                cap = (x > 0) & (x < w)
                start = eps * max(s0 - abs(kink - 0.5 * w), 0.0)
                value = np.where(cap, start + m1 * x + (m2 - m1) * x**2 / (2.0 * w), value)
                slope = np.where(cap, m1 + (m2 - m1) * x / w, slope)
        return value, slope

    def evaluate(self, s):
        """(alpha(s), alpha'(s))"""
        s = np.asarray(s, dtype=float)
        if self.kind == "constant":
            return np.ones_like(s), np.zeros_like(s)
        if self.kind == "bump":
            u = (s - self.center) / self.half_width
            inside = np.abs(u) < 1.0
            q = np.where(inside, 1.0 - u**2, 0.0)
            value = self.epsilon * q**3
            slope = np.where(inside, -6.0 * self.epsilon * u * q**2 / self.half_width, 0.0)
            return 1.0 + value, slope
        value, slope = self._tent(s)
        return 1.0 + value, slope

    def value(self, s):
        return self.evaluate(s)[0]

    def derivative(self, s):
        return self.evaluate(s)[1]

    def to_dict(self):
        return {"kind": self.kind, "epsilon": self.epsilon, "half_width": self.half_width,
                "center": self.center, "s0": self.s0, "cap_width": self.cap_width}


@dataclass(frozen=True)
class LongitudinalGrid:
    """Nodes -L = s_0 < ... < s_N = L; Dirichlet at both ends"""

    nodes: np.ndarray

    @property
    def intervals(self):
        return np.diff(self.nodes)

    @property
    def midpoints(self):
        return 0.5 * (self.nodes[1:] + self.nodes[:-1])

    @property
    def interior(self):
        return self.nodes[1:-1]

    @property
    def weights(self):
        """Trapezoid weights of the interior nodes"""
        d = self.intervals
        return 0.5 * (d[:-1] + d[1:])

    @property
    def size(self):
        return self.nodes.size - 2


def longitudinal_grid(L, spacing, core=None, stretch=1.0, max_spacing=None):
    """Uniform core |s| <= core with spacing h, geometrically stretched beyond it up to L"""
    if not (L > 0 and spacing > 0 and stretch >= 1.0):
        raise InvalidConfigError("longitudinal grid needs L > 0, spacing > 0 and stretch >= 1")
    core = L if core is None else min(core, L)
    if core >= L or stretch == 1.0 and max_spacing is None:
        n = max(2, int(round(L / spacing)))
        return LongitudinalGrid(np.linspace(-L, L, 2 * n + 1))
    n_core = max(1, int(round(core / spacing)))
    positions = list(spacing * np.arange(n_core + 1))
    step = spacing
    limit = np.inf if max_spacing is None else max_spacing
    while positions[-1] < L:
        step = min(step * stretch, limit)
        following = positions[-1] + step
        if following > L - 0.5 * step:
            following = L
        positions.append(following)
    half = np.array(positions)
    return LongitudinalGrid(np.concatenate([-half[::-1], half[1:]]))


@dataclass(frozen=True)
class TubeConfig:
    """Straightened tube over [-L, L] x omega rotating at rate theta_rate"""

    cross_section: CrossSection
    theta_rate: float
    alpha_profile: AlphaProfile = field(default_factory=AlphaProfile)
    s_box: float = 12.0
    s_spacing: float = 0.1
    s_core: float = None
    stretch: float = 1.0
    max_s_spacing: float = None
    memory_cap: int = DEFAULT_MEMORY_CAP

    def __post_init__(self):
        violations = []
        if not self.s_box > 0:
            violations.append(f"TubeConfig.s_box must be > 0, got {self.s_box}")
        if not self.s_spacing > 0:
            violations.append(f"TubeConfig.s_spacing must be > 0, got {self.s_spacing}")
        if not self.stretch >= 1.0:
            violations.append(f"TubeConfig.stretch must be >= 1, got {self.stretch}")
        if not self.alpha_profile.support_end < self.s_box:
            violations.append(
                f"alpha profile must equal 1 inside the box: support ends at {self.alpha_profile.support_end}, "
                f"box half-length {self.s_box}")
        if violations:
            raise InvalidConfigError("; ".join(violations), violations)
        alpha = self.alpha_profile.value(self.longitudinal_grid().nodes)
        if np.any(alpha <= 0):
            raise InvalidConfigError("alpha(s) must stay positive")

    def longitudinal_grid(self):
        return longitudinal_grid(self.s_box, self.s_spacing, self.s_core, self.stretch, self.max_s_spacing)

    def with_box(self, s_box):
        return replace(self, s_box=s_box)

    def with_profile(self, profile):
        return replace(self, alpha_profile=profile)

    def refined(self):
        """Same tube with half the s and transverse spacings"""
        cs = replace(self.cross_section, grid_spacing=0.5 * self.cross_section.grid_spacing)
        max_s = None if self.max_s_spacing is None else 0.5 * self.max_s_spacing
        return replace(self, cross_section=cs, s_spacing=0.5 * self.s_spacing, max_s_spacing=max_s)

    def to_dict(self):
        return {"cross_section": self.cross_section.to_dict(), "theta_rate": self.theta_rate,
                "alpha_profile": self.alpha_profile.to_dict(), "s_box": self.s_box,
                "s_spacing": self.s_spacing, "s_core": self.s_core, "stretch": self.stretch,
                "max_s_spacing": self.max_s_spacing}


@dataclass(frozen=True)
class MetricData:
    h2: float
    h3: float
    G_inverse: np.ndarray
    det_G_root: float
    log_weight: float


def shear_coefficients(points, scaling_center, alpha, alpha_dot, theta_rate):
    """h2 = (t2 - t2^0) alpha' + t~3 theta', h3 = (t3 - t3^0) alpha' - t~2 theta' with t~ = l_alpha(t)"""
    t0 = np.asarray(scaling_center, dtype=float)
    points = np.asarray(points, dtype=float)
    scaled = t0 + alpha * (points - t0)
    h2 = (points[..., 0] - t0[0]) * alpha_dot + scaled[..., 1] * theta_rate
    h3 = (points[..., 1] - t0[1]) * alpha_dot - scaled[..., 0] * theta_rate
    return h2, h3


def metric_at(config, s, t):
    """Inverse metric of the straightened tube at (s, t)"""
    t = np.asarray(t, dtype=float)
    if not config.cross_section.shape.in_closure(t[None, :])[0]:
        raise InvalidConfigError(f"point {t.tolist()} lies outside the cross section")
    alpha, alpha_dot = (float(v) for v in config.alpha_profile.evaluate(s))
    h2, h3 = (float(v) for v in shear_coefficients(t, config.cross_section.scaling_center, alpha,
                                                   alpha_dot, config.theta_rate))
    h = np.array([h2, h3])
    G_inverse = np.empty((3, 3))
    G_inverse[0, 0] = 1.0
    G_inverse[0, 1:] = G_inverse[1:, 0] = -h / alpha
    G_inverse[1:, 1:] = (np.eye(2) + np.outer(h, h)) / alpha**2
    if np.min(np.linalg.eigvalsh(G_inverse)) <= 0:
        raise InvalidConfigError(f"inverse metric not positive definite at s={s}, t={t.tolist()}")
    det_root = 1.0 / np.sqrt(np.linalg.det(G_inverse))
    return MetricData(h2, h3, G_inverse, det_root, 0.5 * np.log(det_root))


class _SliceOperators:
    """Transverse pieces on the master grid, shared by every s-location"""

    def __init__(self, config):
        cs = config.cross_section
        self.grid = transverse_grid(cs)
        self.laplacian = self.grid.laplacian()
        self.g2, self.g3 = self.grid.gradients()
        self.center = cs.scaling_center
        self.theta_rate = config.theta_rate
        self._cache = {}

    def shear(self, alpha, alpha_dot):
        """B = h2 d2 + h3 d3 + alpha'"""
        key = (float(alpha), float(alpha_dot))
        if key not in self._cache:
            h2, h3 = shear_coefficients(self.grid.points, self.center, alpha, alpha_dot, self.theta_rate)
            self._cache[key] = (sp.diags(h2) @ self.g2 + sp.diags(h3) @ self.g3
                                + alpha_dot * sp.identity(self.grid.size)).tocsr()
        return self._cache[key]


@dataclass(frozen=True)
class TubeForm:
    operator: SparseSymmetricOperator
    s_grid: LongitudinalGrid
    transverse: object

    @property
    def shape(self):
        return (self.s_grid.size, self.transverse.size)


def _difference_matrices(s_grid):
    """Interval differences and averages of interior node values, zero at s = +-L"""
    n = s_grid.size
    d = s_grid.intervals
    rows = np.arange(n + 1)
    upper = sp.coo_matrix((1.0 / d[:-1], (rows[:-1], np.arange(n))), shape=(n + 1, n))
    lower = sp.coo_matrix((1.0 / d[1:], (rows[1:], np.arange(n))), shape=(n + 1, n))
    difference = (upper - lower).tocsr()
    average = 0.5 * (sp.coo_matrix((np.ones(n), (rows[:-1], np.arange(n))), shape=(n + 1, n))
                     + sp.coo_matrix((np.ones(n), (rows[1:], np.arange(n))), shape=(n + 1, n)))
    return difference, average.tocsr()


def assemble_tube_form(config, slices=None):
    """alpha^-2 (|alpha d_s psi - h2 d2 psi - h3 d3 psi - alpha' psi|^2 + |grad_t psi|^2).

    Unknowns are ordered slice-major over the interior s-nodes and the master
    nodes of omega. s-differences live on the intervals; the transverse
    energy and |B psi|^2 (B = h2 d2 + h3 d3 + alpha') sit at the nodes with
    trapezoid weights, and the mixed term -2 alpha^-1 (d_s psi) (B psi) is
    the difference of two Gram matrices on the intervals. The diagonal
    weights carry the L^2 quadrature.
    """
    slices = _SliceOperators(config) if slices is None else slices
    s_grid = config.longitudinal_grid()
    n_s, n_t = s_grid.size, slices.grid.size
    unknowns = n_s * n_t
    if unknowns > config.memory_cap:
        needed = config.s_spacing * unknowns / config.memory_cap
        raise InvalidConfigError(
            f"{unknowns} unknowns exceed the cap of {config.memory_cap}; try s_spacing >= {needed:.3g}")

    area = slices.grid.cell_area
    profile = config.alpha_profile
    alpha_n, alpha_dot_n = profile.evaluate(s_grid.interior)
    alpha_m, alpha_dot_m = profile.evaluate(s_grid.midpoints)
    weights = s_grid.weights
    intervals = s_grid.intervals

    nodal = []
    for a, ad, w in zip(alpha_n, alpha_dot_n, weights):
        b = slices.shear(a, ad)
        nodal.append((w * area / a**2) * (b.T @ b + slices.laplacian))
    shear_mid = sp.block_diag([slices.shear(a, ad) / a for a, ad in zip(alpha_m, alpha_dot_m)], format="csr")

    difference, average = _difference_matrices(s_grid)
    eye = sp.identity(n_t, format="csr")
    sheared = shear_mid @ sp.kron(average, eye, format="csr")
    derivative = sp.kron(difference, eye, format="csr") - sheared
    quadrature = sp.diags(np.repeat(intervals * area, n_t))
    matrix = (derivative.T @ quadrature @ derivative - sheared.T @ quadrature @ sheared
              + sp.block_diag(nodal, format="csr"))
    mass = np.repeat(weights * area, n_t)
    logger.debug("tube form assembled", extra={"s_nodes": n_s, "transverse_nodes": n_t, "nnz": matrix.nnz})
    return TubeForm(SparseSymmetricOperator(matrix.tocsr(), weights=mass), s_grid, slices.grid)


def _as_slices(psi, form_shape):
    psi = np.asarray(psi, dtype=float)
    if psi.size != form_shape[0] * form_shape[1]:
        raise InvalidConfigError(f"grid function of size {psi.size} does not match the tube grid {form_shape}")
    return psi.reshape(form_shape)


def tube_form_value(config, psi):
    """Direct slice-by-slice quadrature of the tube form (no assembled matrix)"""
    slices = _SliceOperators(config)
    s_grid = config.longitudinal_grid()
    psi = _as_slices(psi, (s_grid.size, slices.grid.size))
    padded = np.vstack([np.zeros(psi.shape[1]), psi, np.zeros(psi.shape[1])])
    area = slices.grid.cell_area
    profile = config.alpha_profile

    total = 0.0
    for k, (dk, sm) in enumerate(zip(s_grid.intervals, s_grid.midpoints)):
        a, ad = (float(v) for v in profile.evaluate(sm))
        d = (padded[k + 1] - padded[k]) / dk
        mean = 0.5 * (padded[k + 1] + padded[k])
        total += dk * area * (d @ d - 2.0 / a * d @ (slices.shear(a, ad) @ mean))
    for w, sn, row in zip(s_grid.weights, s_grid.interior, psi):
        a, ad = (float(v) for v in profile.evaluate(sn))
        sheared = slices.shear(a, ad) @ row
        total += w * area / a**2 * (sheared @ sheared + slices.grid.spacing**-2 * _edge_energy(slices.grid, row))
    return float(total)


def _edge_energy(grid, values):
    """h^2 |grad u|^2 summed over grid edges, cut edges weighted by h/d"""
    kept = grid.neighbors >= 0
    own = np.repeat(values[:, None], 4, axis=1)
    other = np.where(kept, values[np.maximum(grid.neighbors, 0)], 0.0)
    # interior edges are visited from both ends
    interior = 0.5 * np.sum(np.where(kept, (own - other) ** 2, 0.0))
    cut = np.sum(np.where(kept, 0.0, own**2 * grid.spacing / grid.distances))
    return interior + cut


def _node_derivatives(nodes, psi):
    """Second-order d/ds at every node, boundary rows included, with zero end values"""
    padded = np.vstack([np.zeros(psi.shape[1]), psi, np.zeros(psi.shape[1])])
    d = np.diff(nodes)[:, None]
    hb, hf = d[:-1], d[1:]
    interior = (hb / (hf * (hb + hf)) * padded[2:] - hf / (hb * (hb + hf)) * padded[:-2]
                + (hf - hb) / (hb * hf) * padded[1:-1])
    d1, d2 = d[0], d[1]
    left = (d1 + d2) / (d1 * d2) * padded[1] - d1 / (d2 * (d1 + d2)) * padded[2]
    e1, e2 = d[-1], d[-2]
    right = -((e1 + e2) / (e1 * e2) * padded[-2] - e1 / (e2 * (e1 + e2)) * padded[-3])
    return left, interior, right


def quad_form_value(config, psi):
    """int |grad_t psi|^2 + |d_s psi + theta' (t2 d3 - t3 d2) psi|^2 with node-based s-derivatives.

    Only defined for alpha == 1; serves as an independent discretization of
    the untransformed form. The trapezoid sum runs over every node, so the
    end nodes contribute |d_s psi|^2 from one-sided differences.
    """
    if config.alpha_profile.support_end > 0:
        raise InvalidConfigError("the untransformed form is only evaluated for alpha == 1")
    grid = transverse_grid(config.cross_section)
    s_grid = config.longitudinal_grid()
    psi = _as_slices(psi, (s_grid.size, grid.size))
    left, ds, right = _node_derivatives(s_grid.nodes, psi)
    twist = grid.twist(grid.points)
    lap = grid.laplacian()
    intervals = s_grid.intervals
    total = 0.5 * (intervals[0] * left @ left + intervals[-1] * right @ right) * grid.cell_area
    for w, row, derivative in zip(s_grid.weights, psi, ds):
        combined = derivative + config.theta_rate * (twist @ row)
        total += w * grid.cell_area * (combined @ combined + row @ (lap @ row))
    return float(total)


def tube_threshold(config, tol=DEFAULT_EIG_TOL):
    """E_h(1) on the tube's master grid: bottom of the essential spectrum"""
    cs = config.cross_section
    return ground_energy(transverse_grid(cs), 1.0, config.theta_rate, cs.scaling_center, tol)


def norm_squared(config, psi):
    form = assemble_tube_form(config)
    return form.operator.norm_squared(np.ravel(psi))


def rayleigh_quotient(config, psi):
    form = assemble_tube_form(config)
    return form.operator.rayleigh_quotient(np.ravel(psi))


def required_box(s0, decay_delta, floor=TAIL_FLOOR):
    """Smallest L with exp(-delta (L - s0)) <= floor"""
    return s0 + np.log(1.0 / floor) / decay_delta


def trial_function(config, s0, eps, decay_delta, tol=DEFAULT_EIG_TOL):
    """Psi(s, t) = f_{alpha(s)}(t) phi_delta(s) on the tube grid.

    phi_delta is 1 on [-s0, s0] and exp(-delta (|s| - s0)) outside; the
    transverse factor on every slice is the ground state of h(alpha(s)) pulled
    back to omega. Returned with shape (s-nodes, transverse nodes).
    """
    if not decay_delta > 0:
        raise InvalidConfigError(f"decay_delta must be > 0, got {decay_delta}")
    if np.exp(-decay_delta * (config.s_box - s0)) > TAIL_FLOOR:
        raise InvalidConfigError(
            f"box too short for exponential tails: need s_box >= {required_box(s0, decay_delta):.6g}")
    s_grid = config.longitudinal_grid()
    s = s_grid.interior
    alpha = config.alpha_profile.value(s)
    lower = 1.0 + eps * np.maximum(s0 - np.abs(s), 0.0)
    if np.any(alpha < lower - 1e-12):
        raise InvalidConfigError("alpha profile does not dominate the tent 1 + eps (s0 - |s|)_+")

    cs = config.cross_section
    grid = transverse_grid(cs)
    phi = np.where(np.abs(s) <= s0, 1.0, np.exp(-decay_delta * (np.abs(s) - s0)))
    factors = {}
    psi = np.empty((s.size, grid.size))
    for k, a in enumerate(alpha):
        key = float(a)
        if key not in factors:
            factors[key] = _pullback(cs, grid, key, config.theta_rate, tol)
        psi[k] = factors[key] * phi[k]
    return psi


def _pullback(cs, grid, alpha, theta_rate, tol):
    # unitarily equivalent ground state on omega, normalized in L^2(omega)
    return ground_state(cs, alpha, theta_rate, two_grid=False, tol=tol, grid=grid).pullback


def variational_gap(config, psi, threshold=None):
    """q[Psi] - E(1) ||Psi||^2 through the assembled form"""
    form = assemble_tube_form(config)
    threshold = tube_threshold(config) if threshold is None else threshold
    flat = np.ravel(psi)
    gap = form.operator.form(flat) - threshold * form.operator.norm_squared(flat)
    logger.debug("variational gap", extra={"gap": gap, "threshold": threshold})
    return float(gap)


def _dirichlet_floor(config):
    """Ground energy of -Lap on omega, a floor for the transverse energies"""
    grid = transverse_grid(config.cross_section)
    op = SparseSymmetricOperator(grid.laplacian(), lower_bound=0.0)
    return float(smallest_eigenpairs(op, k=1).eigenvalues[0])


def _lowest_tube_states(config, k, threshold, floor, tol):
    form = assemble_tube_form(config)
    alpha_max = float(np.max(config.alpha_profile.value(form.s_grid.nodes)))
    sigma = floor / alpha_max**2 - 0.02 * threshold
    k = min(k, form.operator.dimension - 1)
    return smallest_eigenpairs(form.operator, k=k, tol=tol, sigma=sigma), form


def bound_states_below_threshold(config, k=3, safety=0.1, persistence=0.1, max_growth=4.0, refine=True,
                                 tol=DEFAULT_EIG_TOL):
    """Discrete eigenvalues below E_h(1) that survive enlarging the box and refining the grids.

    Candidates lie below E_h(1) - safety (pi / 2L)^2. If the shallowest one
    decays more slowly than L/12 the box is enlarged once (at most by
    ``max_growth``); every candidate is then re-solved at 1.5 L and kept
    when its shift stays below ``persistence`` times its depth. With
    ``refine`` the candidates must also reappear below the threshold of the
    grid with half the s and transverse spacings.
    """
    threshold = tube_threshold(config, tol)
    floor = _dirichlet_floor(config)

    def candidates_at(cfg, cfg_threshold, cfg_floor):
        result, form = _lowest_tube_states(cfg, k, cfg_threshold, cfg_floor, tol)
        margin = safety * (np.pi / (2.0 * cfg.s_box)) ** 2
        return result.below(cfg_threshold - margin), form

    first, form = candidates_at(config, threshold, floor)
    if first.count:
        depth = threshold - float(first.eigenvalues.max())
        wanted = 12.0 / np.sqrt(depth)
        if wanted > config.s_box:
            config = config.with_box(min(wanted, max_growth * config.s_box))
            logger.info("enlarging box for slowly decaying candidate", extra={"s_box": config.s_box})
            first, form = candidates_at(config, threshold, floor)

    larger, _ = _lowest_tube_states(config.with_box(1.5 * config.s_box), k, threshold, floor, tol)
    shifts, persisted = [], []
    for i, value in enumerate(first.eigenvalues):
        other = larger.eigenvalues[i] if i < larger.count else np.inf
        shift = abs(other - value)
        shifts.append(float(shift))
        persisted.append(bool(shift < persistence * (threshold - value)))

    refined, refined_threshold = [None] * first.count, None
    if refine and first.count:
        fine = config.refined()
        refined_threshold = tube_threshold(fine, tol)
        fine_states, _ = candidates_at(fine, refined_threshold, _dirichlet_floor(fine))
        refined = [float(fine_states.eigenvalues[i]) if i < fine_states.count else None
                   for i in range(first.count)]
    resolved = [value is not None or not refine for value in refined]
    keep = np.array([p and r for p, r in zip(persisted, resolved)], dtype=bool)

    metadata = {
        "threshold": threshold,
        "s_box": config.s_box,
        "s_box_check": 1.5 * config.s_box,
        "candidates": first.eigenvalues.tolist(),
        "shifts": shifts,
        "persisted": persisted,
        "refined_threshold": refined_threshold,
        "refined": refined,
        "refined_kept": [value for value, kept in zip(refined, keep) if kept],
        "resolved": resolved,
        "unknowns": form.operator.dimension,
    }
    logger.info("tube bound states", extra={k_: v for k_, v in metadata.items() if k_ != "candidates"})
    vectors = first.eigenvectors[:, keep] if first.eigenvectors is not None and keep.size else None
    return SpectralResult(first.eigenvalues[keep], first.residual_norms[keep], vectors,
                          config.s_spacing, metadata)
