"""Cross-section operator on radially scaled cross sections and its ground state"""

import logging
from dataclasses import dataclass, field
from functools import partial

import numpy as np
import scipy.sparse as sp
from scipy.special import jn_zeros

from .errors import InvalidConfigError, InvariantViolation
from .numerics import (
    DEFAULT_EIG_TOL,
    SparseSymmetricOperator,
    extract_linear_coefficient,
    parallel_map,
    smallest_eigenpairs,
)

logger = logging.getLogger(__name__)

# nodes closer than this fraction of h to the boundary (along an axis) are dropped
CUT_FRACTION = 0.05
MIN_NODES = 20
SEGMENT_ASPECT = 100.0

# (axis, direction) in neighbour order +t2, -t2, +t3, -t3
DIRECTIONS = ((0, 1), (0, -1), (1, 1), (1, -1))


@dataclass(frozen=True)
class Disc:
    center: tuple
    radius: float
    kind = "disc"

    def __post_init__(self):
        if not self.radius > 0:
            raise InvalidConfigError(f"Disc.radius must be > 0, got {self.radius}")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))

    def contains(self, points):
        d = np.asarray(points, dtype=float) - self.center
        return np.sum(d * d, axis=-1) < self.radius**2

    def in_closure(self, points, tol=1e-9):
        d = np.asarray(points, dtype=float) - self.center
        return np.sqrt(np.sum(d * d, axis=-1)) <= self.radius + tol

    def ray_distance(self, points, axis, sign):
        d = np.asarray(points, dtype=float) - self.center
        b = sign * d[:, axis]
        c = np.sum(d * d, axis=-1) - self.radius**2
        return -b + np.sqrt(np.maximum(b * b - c, 0.0))

    def bounding_box(self):
        (x, y), r = self.center, self.radius
        return x - r, x + r, y - r, y + r

    def boundary_points(self, count=256):
        phi = np.linspace(0.0, 2.0 * np.pi, count, endpoint=False)
        return np.column_stack([np.cos(phi), np.sin(phi)]) * self.radius + self.center

    def scaled(self, alpha, anchor):
        anchor = np.asarray(anchor, dtype=float)
        return Disc(tuple(anchor + alpha * (np.asarray(self.center) - anchor)), alpha * self.radius)

    def to_dict(self):
        return {"kind": self.kind, "center": list(self.center), "radius": self.radius}


@dataclass(frozen=True)
class Polygon:
    vertices: tuple
    kind = "polygon"

    def __post_init__(self):
        vertices = np.asarray(self.vertices, dtype=float)
        if vertices.ndim != 2 or vertices.shape[0] < 3 or vertices.shape[1] != 2:
            raise InvalidConfigError("Polygon needs at least three (t2, t3) vertices")
        x, y = vertices[:, 0], vertices[:, 1]
        area = 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)
        if abs(area) < 1e-14:
            raise InvalidConfigError("Polygon has zero area")
        object.__setattr__(self, "vertices", tuple(map(tuple, vertices.tolist())))

    @property
    def _edges(self):
        start = np.asarray(self.vertices)
        return start, np.roll(start, -1, axis=0)

    def contains(self, points):
        """Even-odd rule, vectorized over points and edges"""
        p = np.atleast_2d(np.asarray(points, dtype=float))
        a, b = self._edges
        px, py = p[:, 0:1], p[:, 1:2]
        straddle = (a[:, 1] > py) != (b[:, 1] > py)
        dy = np.where(straddle, b[:, 1] - a[:, 1], 1.0)
        x_cross = a[:, 0] + (py - a[:, 1]) * (b[:, 0] - a[:, 0]) / dy
        crossings = np.sum(straddle & (px < x_cross), axis=1)
        # open set: points on an edge are outside
        inside = (crossings % 2 == 1) & (self._segment_distance(p) > 1e-12)
        return inside.reshape(np.shape(points)[:-1])

    def _segment_distance(self, points):
        p = np.atleast_2d(np.asarray(points, dtype=float))[:, None, :]
        a, b = self._edges
        ab = b - a
        u = np.clip(np.sum((p - a) * ab, axis=-1) / np.sum(ab * ab, axis=-1), 0.0, 1.0)
        return np.min(np.linalg.norm(p - (a + u[..., None] * ab), axis=-1), axis=1)

    def in_closure(self, points, tol=1e-9):
        inside = np.atleast_1d(self.contains(points))
        return (inside | (self._segment_distance(points) <= tol)).reshape(np.shape(points)[:-1])

    def ray_distance(self, points, axis, sign):
        p = np.asarray(points, dtype=float)
        a, b = self._edges
        other = 1 - axis
        q = p[:, other:other + 1]
        straddle = (a[:, other] > q) != (b[:, other] > q)
        denom = np.where(straddle, b[:, other] - a[:, other], 1.0)
        cross = a[:, axis] + (q - a[:, other]) * (b[:, axis] - a[:, axis]) / denom
        reach = sign * (cross - p[:, axis:axis + 1])
        reach = np.where(straddle & (reach > 0), reach, np.inf)
        return np.min(reach, axis=1)

    def bounding_box(self):
        v = np.asarray(self.vertices)
        return v[:, 0].min(), v[:, 0].max(), v[:, 1].min(), v[:, 1].max()

    def boundary_points(self, count=256):
        a, b = self._edges
        per_edge = max(2, count // len(a))
        u = np.linspace(0.0, 1.0, per_edge, endpoint=False)[:, None, None]
        return (a + u * (b - a)).reshape(-1, 2)

    def scaled(self, alpha, anchor):
        anchor = np.asarray(anchor, dtype=float)
        return Polygon(tuple(map(tuple, anchor + alpha * (np.asarray(self.vertices) - anchor))))

    def to_dict(self):
        return {"kind": self.kind, "vertices": [list(v) for v in self.vertices]}


def segment(length, center=(0.0, 0.0)):
    """Ribbon cross section as a hard-wall rectangle of aspect ratio 100:1"""
    if not length > 0:
        raise InvalidConfigError(f"segment length must be > 0, got {length}")
    half_l, half_w = 0.5 * length, 0.5 * length / SEGMENT_ASPECT
    cx, cy = center
    return Polygon(((cx - half_l, cy - half_w), (cx + half_l, cy - half_w),
                    (cx + half_l, cy + half_w), (cx - half_l, cy + half_w)))


@dataclass(frozen=True)
class CrossSection:
    """Region omega with scaling centre t0 and master grid spacing h.

    omega(alpha) is the image of omega under l_alpha(t) = t0 + alpha (t - t0).
    """

    shape: object
    scaling_center: tuple = (0.0, 0.0)
    grid_spacing: float = 0.1

    def __post_init__(self):
        if not self.grid_spacing > 0:
            raise InvalidConfigError(f"CrossSection.grid_spacing must be > 0, got {self.grid_spacing}")
        object.__setattr__(self, "scaling_center", tuple(float(c) for c in self.scaling_center))
        if not self.shape.in_closure(np.array([self.scaling_center]))[0]:
            logger.warning("scaling centre lies outside the closure of the cross section",
                           extra={"scaling_center": list(self.scaling_center)})

    def scaled(self, alpha):
        if not alpha > 0:
            raise InvalidConfigError(f"scaling factor must be > 0, got {alpha}")
        return CrossSection(self.shape.scaled(alpha, self.scaling_center), self.scaling_center,
                            alpha * self.grid_spacing)

    def refined(self, factor=2):
        return CrossSection(self.shape, self.scaling_center, self.grid_spacing / factor)

    def l_alpha(self, points, alpha):
        t0 = np.asarray(self.scaling_center)
        return t0 + alpha * (np.asarray(points, dtype=float) - t0)

    def is_star_shaped(self, samples=128, steps=64):
        """Every sampled boundary point is visible from t0 through the closure"""
        t0 = np.asarray(self.scaling_center)
        boundary = self.shape.boundary_points(samples)
        lam = np.linspace(0.0, 1.0, steps + 1)[1:-1]
        chords = t0 + lam[:, None, None] * (boundary - t0)
        return bool(np.all(self.shape.in_closure(chords.reshape(-1, 2))))

    def to_dict(self):
        return {"shape": self.shape.to_dict(), "scaling_center": list(self.scaling_center),
                "grid_spacing": self.grid_spacing}


def scale_cross_section(cs, alpha):
    return cs.scaled(alpha)


@dataclass(frozen=True)
class TransverseGrid:
    """Lattice nodes anchor + h (i, j) kept inside the region.

    ``neighbors[p, d]`` is the index of the neighbour in direction d or -1
    when that edge is cut by the boundary, in which case ``distances[p, d]``
    is the distance from node p to the boundary crossing.
    """

    spacing: float
    anchor: np.ndarray
    indices: np.ndarray
    points: np.ndarray
    neighbors: np.ndarray
    distances: np.ndarray
    _lookup: dict = field(default=None, repr=False, compare=False)

    @property
    def size(self):
        return int(self.points.shape[0])

    @property
    def cell_area(self):
        return self.spacing**2

    @property
    def interior(self):
        """Nodes whose four edges all end at grid nodes"""
        return np.all(self.neighbors >= 0, axis=1)

    def norm(self, values):
        return float(np.sqrt(self.cell_area * np.sum(np.asarray(values) ** 2)))

    def locate(self, indices):
        """Node numbers of lattice indices, -1 where absent"""
        lookup = self._lookup
        return np.array([lookup.get((int(i), int(j)), -1) for i, j in np.asarray(indices)], dtype=int)

    def laplacian(self):
        """-Laplacian with cut-edge Dirichlet weights 1/(h d)"""
        h = self.spacing
        n = self.size
        kept = self.neighbors >= 0
        diag = np.sum(np.where(kept, 1.0 / h**2, 1.0 / (h * self.distances)), axis=1)
        rows = np.repeat(np.arange(n), 4)[kept.ravel()]
        cols = self.neighbors.ravel()[kept.ravel()]
        off = sp.coo_matrix((np.full(rows.size, -1.0 / h**2), (rows, cols)), shape=(n, n))
        return (sp.diags(diag) + off).tocsr()

    def gradients(self):
        """Three-point first derivatives along t2 and t3 with zero boundary values"""
        n = self.size
        result = []
        for forward, backward in ((0, 1), (2, 3)):
            hf, hb = self.distances[:, forward], self.distances[:, backward]
            cf = hb / (hf * (hb + hf))
            cb = -hf / (hb * (hb + hf))
            cp = (hf - hb) / (hb * hf)
            rows, cols, vals = [np.arange(n)], [np.arange(n)], [cp]
            for d, coef in ((forward, cf), (backward, cb)):
                kept = self.neighbors[:, d] >= 0
                rows.append(np.arange(n)[kept])
                cols.append(self.neighbors[kept, d])
                vals.append(coef[kept])
            result.append(sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                                        shape=(n, n)).tocsr())
        return tuple(result)

    def twist(self, coordinates):
        """t2 d/dt3 - t3 d/dt2 with the given absolute coordinates per node"""
        g2, g3 = self.gradients()
        return (sp.diags(coordinates[:, 0]) @ g3 - sp.diags(coordinates[:, 1]) @ g2).tocsr()


def build_grid(shape, anchor, spacing, cut_fraction=CUT_FRACTION):
    """Rasterize ``shape`` on the lattice anchored at ``anchor``"""
    xmin, xmax, ymin, ymax = shape.bounding_box()
    required = min(xmax - xmin, ymax - ymin) / MIN_NODES
    if spacing > required * (1.0 + 1e-12):
        raise InvalidConfigError(
            f"grid spacing {spacing:g} too coarse: need <= {required:g} for {MIN_NODES} nodes per direction")
    ax, ay = anchor
    i_range = np.arange(np.floor((xmin - ax) / spacing), np.ceil((xmax - ax) / spacing) + 1).astype(int)
    j_range = np.arange(np.floor((ymin - ay) / spacing), np.ceil((ymax - ay) / spacing) + 1).astype(int)
    ii, jj = np.meshgrid(i_range, j_range, indexing="ij")
    indices = np.column_stack([ii.ravel(), jj.ravel()])
    points = np.asarray(anchor, dtype=float) + spacing * indices
    inside = shape.contains(points)
    indices, points = indices[inside], points[inside]

    reach = np.column_stack([shape.ray_distance(points, axis, sign) for axis, sign in DIRECTIONS])
    keep = np.all(reach >= cut_fraction * spacing, axis=1)
    indices, points, reach = indices[keep], points[keep], reach[keep]

    lookup = {(int(i), int(j)): k for k, (i, j) in enumerate(indices)}
    neighbors = np.full((len(indices), 4), -1, dtype=int)
    for d, (axis, sign) in enumerate(DIRECTIONS):
        step = np.zeros(2, dtype=int)
        step[axis] = sign
        neighbors[:, d] = [lookup.get((int(i), int(j)), -1) for i, j in indices + step]
    distances = np.where(neighbors >= 0, spacing, np.minimum(reach, spacing * (1.0 + cut_fraction)))
    grid = TransverseGrid(spacing, np.asarray(anchor, dtype=float), indices, points, neighbors, distances, lookup)
    logger.debug("transverse grid built", extra={"nodes": grid.size, "spacing": spacing})
    return grid


def transverse_grid(cs, alpha=1.0, spacing=None, anchor=None):
    """Grid of omega(alpha); by default the l_alpha image of the master lattice"""
    shape = cs.shape if alpha == 1.0 else cs.shape.scaled(alpha, cs.scaling_center)
    spacing = alpha * cs.grid_spacing if spacing is None else spacing
    anchor = cs.scaling_center if anchor is None else anchor
    return build_grid(shape, anchor, spacing)


def scaled_matrix(grid, alpha, beta0, scaling_center):
    """h(alpha) on the unscaled master grid: alpha^-2 (-Lap + beta0^2 D~^T D~).

    D~ uses the scaled absolute coordinates l_alpha(t), so the matrix equals
    the direct discretization on omega(alpha) with spacing alpha h.
    """
    matrix = grid.laplacian()
    if beta0 != 0.0:
        t0 = np.asarray(scaling_center)
        twist = grid.twist(t0 + alpha * (grid.points - t0))
        matrix = matrix + beta0**2 * (twist.T @ twist)
    return (matrix / alpha**2).tocsr()


def direct_operator(grid, beta0):
    """Operator on the grid's own nodes, twist in their absolute coordinates"""
    matrix = grid.laplacian()
    if beta0 != 0.0:
        twist = grid.twist(grid.points)
        matrix = matrix + beta0**2 * (twist.T @ twist)
    return SparseSymmetricOperator(matrix, lower_bound=0.0)


def assemble_transverse_operator(cs, alpha, beta0, spacing=None, anchor=None):
    """-Lap_D - beta0^2 (t2 d3 - t3 d2)^2 assembled directly on omega(alpha)"""
    if not alpha > 0:
        raise InvalidConfigError(f"scaling factor must be > 0, got {alpha}")
    return direct_operator(transverse_grid(cs, alpha, spacing, anchor), beta0)


@dataclass(frozen=True)
class TransverseGroundState:
    """Ground state f_alpha of h~(alpha), stored at the master nodes.

    ``eigenfunction`` holds f_alpha at l_alpha(master nodes) normalized in
    L^2(omega(alpha)); ``pullback`` is the unitarily equivalent alpha * f_alpha o l_alpha
    normalized in L^2(omega).
    """

    alpha: float
    beta0: float
    energy: float
    eigenfunction: np.ndarray
    grid: TransverseGrid
    grid_spacing: float
    residual: float
    positive: bool
    energy_extrapolated: float = None

    @property
    def pullback(self):
        return self.alpha * self.eigenfunction

    def norm(self):
        return float(np.sqrt((self.alpha * self.grid_spacing) ** 2 * np.sum(self.eigenfunction**2)))


def _normalized_ground_state(grid, alpha, beta0, scaling_center, tol):
    op = SparseSymmetricOperator(scaled_matrix(grid, alpha, beta0, scaling_center), lower_bound=0.0)
    result = smallest_eigenpairs(op, k=1, tol=tol)
    f = result.eigenvectors[:, 0]
    f = f * np.sign(np.sum(f)) / np.sqrt((alpha * grid.spacing) ** 2 * np.sum(f * f))
    return float(result.eigenvalues[0]), f, float(result.residual_norms[0])


def ground_state(cs, alpha, beta0, two_grid=True, tol=DEFAULT_EIG_TOL, grid=None):
    """Smallest eigenpair of h~(alpha) with positive-normalized eigenfunction"""
    if not alpha > 0:
        raise InvalidConfigError(f"scaling factor must be > 0, got {alpha}")
    grid = transverse_grid(cs) if grid is None else grid
    energy, f, residual = _normalized_ground_state(grid, alpha, beta0, cs.scaling_center, tol)
    positive = bool(np.all(f[grid.interior] > 0))
    if not positive:
        logger.warning("ground state not positive at interior nodes",
                       extra={"alpha": alpha, "beta0": beta0, "min_value": float(f[grid.interior].min())})
    extrapolated = None
    if two_grid:
        fine = transverse_grid(cs.refined())
        energy_fine = _normalized_ground_state(fine, alpha, beta0, cs.scaling_center, tol)[0]
        extrapolated = (4.0 * energy_fine - energy) / 3.0
    return TransverseGroundState(alpha, beta0, energy, f, grid, cs.grid_spacing, residual, positive, extrapolated)


def ground_energy(grid, alpha, beta0, scaling_center, tol=DEFAULT_EIG_TOL):
    return _normalized_ground_state(grid, alpha, beta0, scaling_center, tol)[0]


@dataclass(frozen=True)
class EnergySlope:
    """dE/dalpha at alpha = 1, per grid level and two-grid extrapolated"""

    value: float
    coarse: float
    fine: float
    error_estimate: float
    flagged: bool


def energy_slope(cs, beta0, eps_ladder=None, tolerance=None, two_grid=True, tol=DEFAULT_EIG_TOL):
    """E^(1) by Richardson extrapolation of (E(1 + eps) - E(1)) / eps.

    A non-negative result contradicts the monotone decrease of E under
    nested scaling and raises InvariantViolation.
    """
    levels = [cs, cs.refined()] if two_grid else [cs]
    estimates = []
    for level in levels:
        grid = transverse_grid(level)
        estimates.append(extract_linear_coefficient(
            lambda eps, grid=grid: ground_energy(grid, 1.0 + eps, beta0, cs.scaling_center, tol),
            eps_ladder, tolerance))
    coarse = estimates[0].value
    fine = estimates[-1].value
    value = (4.0 * fine - coarse) / 3.0 if two_grid else coarse
    error = max(e.error_estimate for e in estimates)
    flagged = any(e.flagged for e in estimates)
    logger.info("energy slope", extra={"beta0": beta0, "slope": value, "coarse": coarse, "fine": fine,
                                       "error_estimate": error})
    if not value < 0:
        raise InvariantViolation(f"energy slope E1 = {value:.6g} is not negative for a nested scaling family")
    return EnergySlope(value, coarse, fine, error, flagged)


def _as_grid_function(psi, points, shape, scale=1.0):
    if callable(psi):
        boundary = shape.boundary_points()
        values = np.asarray(psi(points[:, 0], points[:, 1]), dtype=float)
        edge = np.max(np.abs(psi(boundary[:, 0], boundary[:, 1])))
        if edge > 1e-8 * max(1.0, np.max(np.abs(values))):
            raise InvalidConfigError(f"test function does not vanish on the boundary (max {edge:.3e})")
        return values * scale
    return None


def transverse_form_value(cs, alpha, beta0, psi, path="scaled"):
    """(psi, h(alpha) psi) on the unscaled omega.

    ``path="scaled"`` evaluates the unitarily equivalent form on the master
    grid; ``path="direct"`` assembles on omega(alpha) and applies it to
    alpha^-1 psi o l_alpha^-1. ``psi`` is a callable psi(t2, t3) or an array
    on the master nodes.
    """
    master = transverse_grid(cs)
    if path == "scaled":
        values = _as_grid_function(psi, master.points, cs.shape)
        if values is None:
            values = _check_grid_values(psi, master)
        matrix = scaled_matrix(master, alpha, beta0, cs.scaling_center)
        return float(master.cell_area * values @ (matrix @ values))
    if path != "direct":
        raise InvalidConfigError(f"unknown form path {path!r}")

    grid = transverse_grid(cs, alpha)
    op = direct_operator(grid, beta0)
    values = _as_grid_function(psi, cs.l_alpha(grid.points, 1.0 / alpha), cs.shape, 1.0 / alpha)
    if values is None:
        master_values = _check_grid_values(psi, master)
        where = master.locate(grid.indices)
        values = np.where(where >= 0, master_values[np.maximum(where, 0)], 0.0) / alpha
    return grid.cell_area * op.form(values)


def _check_grid_values(psi, grid):
    values = np.asarray(psi, dtype=float)
    if values.shape != (grid.size,):
        raise InvalidConfigError(f"grid function has shape {values.shape}, expected ({grid.size},)")
    return values


def bessel_oracle(beta0, count=5, radius=1.0):
    """Lowest eigenvalues (j_{m,n}/R)^2 + beta0^2 m^2 of the centred disc, with multiplicity"""
    values = []
    for m in range(count + 2):
        energies = (jn_zeros(m, count) / radius) ** 2 + (beta0 * m) ** 2
        values.extend(energies.tolist() * (1 if m == 0 else 2))
    return np.sort(values)[:count]


ENERGY_COLUMNS = ("alpha", "energy", "energy_extrapolated")


def _energy_row(alpha, cs, beta0):
    state = ground_state(cs, alpha, beta0)
    return [alpha, state.energy, state.energy_extrapolated]


def energy_curve(cs, alphas, beta0, workers=None):
    """Rows (alpha, E_h(alpha), two-grid E(alpha)) for the given scalings"""
    rows = parallel_map(partial(_energy_row, cs=cs, beta0=beta0), [float(a) for a in alphas], workers)
    return np.array(rows, dtype=float).reshape(-1, len(ENERGY_COLUMNS))


def shifted_ground_state_energy(cs, alpha, beta0, shift_steps=(0, 0), tol=DEFAULT_EIG_TOL):
    """Rayleigh quotient on omega(alpha) of the omega ground state moved by whole lattice steps.

    The grid of omega(alpha) shares spacing h and anchor t0 with omega's master
    grid, so the moved ground state (zero where it leaves the grid) is an
    admissible trial vector and the quotient bounds E_h(alpha) from above.
    """
    master = transverse_grid(cs)
    f = _normalized_ground_state(master, 1.0, beta0, cs.scaling_center, tol)[1]
    target = transverse_grid(cs, alpha, spacing=cs.grid_spacing)
    op = direct_operator(target, beta0)
    where = target.locate(master.indices + np.asarray(shift_steps, dtype=int))
    trial = np.zeros(target.size)
    trial[where[where >= 0]] = f[where >= 0]
    return op.rayleigh_quotient(trial)
