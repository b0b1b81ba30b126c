"""Shared numerical kernels: eigensolvers, stencils, quadrature, extrapolation"""

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import pyamg
import scipy.sparse as sp
from scipy.integrate import simpson
from scipy.linalg import eigh, eigh_tridiagonal
from scipy.optimize import bisect
from scipy.sparse.linalg import ArpackNoConvergence, eigsh, lobpcg
from tenacity import Retrying, retry_if_exception_type, stop_after_attempt

from .errors import InvalidConfigError, SolverFailure

logger = logging.getLogger(__name__)

DEFAULT_EIG_TOL = 1e-9
DEFAULT_BISECTION_TOL = 1e-4
SYMMETRY_TOL = 1e-14

# auto method selection thresholds (unknowns)
DENSE_LIMIT = 400
SHIFT_INVERT_LIMIT = 300_000

METHODS = ("auto", "dense", "shift-invert", "lobpcg")


@dataclass(frozen=True)
class SparseSymmetricOperator:
    """Symmetric matrix K of a discretized quadratic form.

    The form value of a grid function ``psi`` is ``psi @ K @ psi``; the
    optional ``weights`` are the diagonal of the quadrature (mass) matrix W,
    so eigenpairs solve ``K v = lambda W v``. Without weights W = I.
    ``lower_bound`` is a known lower bound of the spectrum (0 for forms
    that are sums of squares) used to place the shift.
    """

    matrix: sp.csr_matrix
    weights: np.ndarray = None
    lower_bound: float = None
    symmetric: bool = True

    def __post_init__(self):
        matrix = sp.csr_matrix(self.matrix, dtype=float)
        object.__setattr__(self, "matrix", matrix)
        n, m = matrix.shape
        if n != m or n == 0:
            raise InvalidConfigError(f"operator must be square with dimension > 0, got {matrix.shape}")
        if not np.all(np.isfinite(matrix.diagonal())):
            raise InvalidConfigError("operator has non-finite diagonal entries")
        asym = abs(matrix - matrix.T)
        scale = abs(matrix).max() if matrix.nnz else 0.0
        if asym.nnz and asym.max() > SYMMETRY_TOL + 1e-12 * scale:
            raise InvalidConfigError(f"operator is not symmetric (max |A - A^T| = {asym.max():.3e})")
        if self.weights is not None:
            weights = np.asarray(self.weights, dtype=float)
            if weights.shape != (n,) or np.any(weights <= 0):
                raise InvalidConfigError("weights must be a positive vector matching the dimension")
            object.__setattr__(self, "weights", weights)

    @classmethod
    def from_entries(cls, dimension, entries, **kwargs):
        """Build from (row, col, value) triples; both triangles must be listed"""
        if dimension <= 0:
            raise InvalidConfigError("dimension must be positive")
        rows, cols, values = zip(*entries) if entries else ((), (), ())
        matrix = sp.coo_matrix((values, (rows, cols)), shape=(dimension, dimension))
        return cls(matrix.tocsr(), **kwargs)

    @property
    def dimension(self):
        return self.matrix.shape[0]

    @property
    def entries(self):
        coo = self.matrix.tocoo()
        return list(zip(coo.row.tolist(), coo.col.tolist(), coo.data.tolist()))

    def form(self, psi):
        psi = np.asarray(psi, dtype=float)
        return float(psi @ (self.matrix @ psi))

    def norm_squared(self, psi):
        psi = np.asarray(psi, dtype=float)
        if self.weights is None:
            return float(psi @ psi)
        return float(np.sum(self.weights * psi * psi))

    def rayleigh_quotient(self, psi):
        return self.form(psi) / self.norm_squared(psi)


@dataclass(frozen=True)
class SpectralResult:
    """Eigenvalues in ascending order with per-pair residuals.

    Energies are in units where hbar^2/2m = 1.
    """

    eigenvalues: np.ndarray
    residual_norms: np.ndarray
    eigenvectors: np.ndarray = None
    grid_spacing: float = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        values = np.asarray(self.eigenvalues, dtype=float).reshape(-1)
        if np.any(np.diff(values) < 0):
            raise InvalidConfigError("eigenvalues must be sorted ascending")
        object.__setattr__(self, "eigenvalues", values)
        object.__setattr__(self, "residual_norms", np.asarray(self.residual_norms, dtype=float).reshape(-1))

    @property
    def count(self):
        return int(self.eigenvalues.size)

    def below(self, threshold):
        """Pairs strictly below ``threshold``"""
        keep = self.eigenvalues < threshold
        vectors = self.eigenvectors[:, keep] if self.eigenvectors is not None else None
        return SpectralResult(
            self.eigenvalues[keep], self.residual_norms[keep], vectors,
            self.grid_spacing, dict(self.metadata, threshold=threshold),
        )


def _gershgorin_bounds(matrix):
    diag = matrix.diagonal()
    radius = np.asarray(abs(matrix).sum(axis=1)).ravel() - np.abs(diag)
    return float(np.min(diag - radius)), float(np.max(diag + radius))


def _residual_norms(matrix, values, vectors):
    if vectors.size == 0:
        return np.zeros(0)
    residual = matrix @ vectors - vectors * values
    return np.linalg.norm(residual, axis=0) / np.linalg.norm(vectors, axis=0)


def _dense(matrix, k):
    return eigh(matrix.toarray(), subset_by_index=[0, k - 1])


def _shift_invert(matrix, k, tol, sigma, max_iterations):
    n = matrix.shape[0]
    v0 = np.ones(n) / np.sqrt(n)
    base_ncv = min(n, max(2 * k + 1, 20))
    try:
        for attempt in Retrying(
            stop=stop_after_attempt(3),
            retry=retry_if_exception_type(ArpackNoConvergence),
            reraise=True,
        ):
            with attempt:
                widen = 2 ** (attempt.retry_state.attempt_number - 1)
                ncv = min(n, base_ncv * widen)
                if widen > 1:
                    logger.warning("ARPACK did not converge, widening Krylov space", extra={"ncv": ncv, "k": k})
                return eigsh(matrix, k=k, sigma=sigma, which="LM", v0=v0, tol=tol * 1e-3,
                             ncv=ncv, maxiter=max_iterations)
    except ArpackNoConvergence as e:
        best = None
        if e.eigenvectors is not None and e.eigenvectors.size:
            best = float(np.min(_residual_norms(matrix, e.eigenvalues, e.eigenvectors)))
        raise SolverFailure(f"shift-invert Lanczos did not converge for k={k}", best_residual=best) from e


def _lobpcg(matrix, k, tol, max_iterations):
    n = matrix.shape[0]
    rng = np.random.default_rng(0)
    block = rng.standard_normal((n, k))
    block[:, 0] = 1.0
    preconditioner = pyamg.smoothed_aggregation_solver(matrix.tocsr()).aspreconditioner()
    values, vectors = lobpcg(matrix, block, M=preconditioner, tol=tol, largest=False,
                             maxiter=max_iterations or 1000)
    return values, vectors


def smallest_eigenpairs(op, k=1, tol=DEFAULT_EIG_TOL, method="auto", sigma=None, max_iterations=None):
    """k smallest eigenpairs of ``op`` (generalized with its diagonal weights).

    Residuals ||K v - lambda W v|| / ||v|| are measured in the W-normalized
    frame and must not exceed ``tol * max(1, |lambda|)``.
    """
    if not op.symmetric:
        raise InvalidConfigError("operator is flagged asymmetric")
    if k < 1:
        raise InvalidConfigError(f"k must be >= 1, got {k}")
    if tol <= 0:
        raise InvalidConfigError(f"tol must be > 0, got {tol}")
    if method not in METHODS:
        raise InvalidConfigError(f"unknown eigensolver method {method!r}")
    n = op.dimension
    if k > n:
        raise InvalidConfigError(f"requested {k} eigenpairs of a {n}-dimensional operator")

    matrix = op.matrix
    scale = None
    if op.weights is not None:
        scale = 1.0 / np.sqrt(op.weights)
        matrix = sp.diags(scale) @ matrix @ sp.diags(scale)
        matrix = matrix.tocsr()

    if method == "auto":
        method = "dense" if n <= DENSE_LIMIT else "shift-invert" if n <= SHIFT_INVERT_LIMIT else "lobpcg"
    if method == "shift-invert" and k >= n:
        method = "dense"

    if method == "dense":
        values, vectors = _dense(matrix, k)
    elif method == "shift-invert":
        if sigma is None:
            if op.lower_bound is not None:
                base = op.lower_bound
            else:
                base = _gershgorin_bounds(matrix)[0]
            sigma = base - 1e-3 * max(1.0, abs(base))
        values, vectors = _shift_invert(matrix, k, tol, sigma, max_iterations)
    else:
        values, vectors = _lobpcg(matrix, k, tol, max_iterations)

    order = np.argsort(values)
    values, vectors = values[order], vectors[:, order]
    residuals = _residual_norms(matrix, values, vectors)
    limit = tol * np.maximum(1.0, np.abs(values))
    if np.any(residuals > limit):
        raise SolverFailure(
            f"{method} eigensolver residual {residuals.max():.3e} exceeds tolerance {tol:.1e}",
            best_residual=float(residuals.min()),
        )
    if scale is not None:
        vectors = vectors * scale[:, None]
    logger.debug("eigenpairs computed", extra={"method": method, "dimension": n, "k": k,
                                               "max_residual": float(residuals.max())})
    return SpectralResult(values, residuals, vectors, metadata={"method": method, "dimension": n})


def dirichlet_laplacian_1d(n, h):
    """-d^2/dx^2 on n interior nodes of spacing h with zero end values"""
    if n < 1 or h <= 0:
        raise InvalidConfigError("need n >= 1 interior nodes and h > 0")
    main = np.full(n, 2.0 / h**2)
    off = np.full(n - 1, -1.0 / h**2)
    return SparseSymmetricOperator(sp.diags([off, main, off], [-1, 0, 1]), lower_bound=0.0)


def dirichlet_laplacian_2d(nx, ny, h):
    """5-point -Laplacian on an nx-by-ny interior node block"""
    lx = dirichlet_laplacian_1d(nx, h).matrix
    ly = dirichlet_laplacian_1d(ny, h).matrix
    matrix = sp.kron(lx, sp.identity(ny)) + sp.kron(sp.identity(nx), ly)
    return SparseSymmetricOperator(matrix, lower_bound=0.0)


def solve_1d_schrodinger(V, h, E0, settle_tol=1e-8):
    """Bound states of -d^2/ds^2 + V strictly below E0.

    ``V`` samples the potential on the uniform grid of [-L, L] including
    both end points, where Dirichlet conditions truncate the line. The
    tridiagonal problem is shifted by E0 and solved by bisection, so every
    eigenvalue below the threshold is returned (possibly none).
    """
    V = np.asarray(V, dtype=float)
    if V.ndim != 1 or V.size < 3:
        raise InvalidConfigError("potential needs at least three samples")
    if h <= 0:
        raise InvalidConfigError(f"grid spacing must be > 0, got {h}")
    if not np.all(np.isfinite(V)):
        raise InvalidConfigError("potential must be bounded")

    settled = bool(abs(V[0] - E0) <= settle_tol and abs(V[-1] - E0) <= settle_tol)
    metadata = {"threshold": float(E0), "settled": settled, "box_half_length": 0.5 * h * (V.size - 1)}
    if not settled:
        logger.warning("potential not settled at box ends, truncation bias unquantified",
                       extra={"V_left": float(V[0]), "V_right": float(V[-1]), "E0": float(E0)})

    diag = 2.0 / h**2 + (V[1:-1] - E0)
    off = np.full(diag.size - 1, -1.0 / h**2)
    radius = np.full(diag.size, 2.0 / h**2)
    radius[[0, -1]] = 1.0 / h**2
    lower = float(np.min(diag - radius))
    if diag.size == 1:
        lower = float(diag[0])
    if lower >= 0.0:
        return SpectralResult(np.zeros(0), np.zeros(0), np.zeros((diag.size, 0)), h, metadata)

    values, vectors = eigh_tridiagonal(diag, off, select="v", select_range=(lower - 1.0, 0.0))
    keep = values < 0.0
    values, vectors = values[keep], vectors[:, keep]
    applied = diag[:, None] * vectors
    applied[1:] += off[:, None] * vectors[:-1]
    applied[:-1] += off[:, None] * vectors[1:]
    residuals = np.linalg.norm(applied - vectors * values, axis=0) if values.size else np.zeros(0)
    return SpectralResult(values + E0, residuals, vectors, h, metadata)


def simpson_integral(values, spacing):
    """Composite Simpson rule on uniformly spaced samples"""
    return float(simpson(np.asarray(values, dtype=float), dx=spacing))


def richardson_ladder(base=1e-2, ratio=2.0, rungs=4):
    if base <= 0 or ratio <= 1 or rungs < 2:
        raise InvalidConfigError("ladder needs base > 0, ratio > 1 and at least two rungs")
    return base / ratio ** np.arange(rungs)


@dataclass(frozen=True)
class Extrapolation:
    value: object
    error_estimate: float
    flagged: bool
    ladder: np.ndarray
    difference_quotients: np.ndarray


def extract_linear_coefficient(f, eps_ladder=None, tolerance=None):
    """Richardson estimate of df/d(eps) at eps = 0.

    The difference quotients (f(eps) - f(0)) / eps are extrapolated to
    eps = 0 by Neville's scheme; the error estimate is the gap between
    the last two diagonal extrapolants. ``f`` may return arrays, in
    which case the estimate is element-wise and the error is the max.
    """
    ladder = richardson_ladder() if eps_ladder is None else np.asarray(eps_ladder, dtype=float)
    if ladder.ndim != 1 or ladder.size < 2:
        raise InvalidConfigError("ladder needs at least two rungs")
    if np.any(ladder <= 0) or np.any(np.diff(ladder) >= 0):
        raise InvalidConfigError("ladder must be strictly decreasing positive reals")

    f0 = np.asarray(f(0.0), dtype=float)
    quotients = np.array([(np.asarray(f(eps), dtype=float) - f0) / eps for eps in ladder])

    table = [[q] for q in quotients]
    for j in range(1, ladder.size):
        for i in range(j, ladder.size):
            x_new, x_old = ladder[i], ladder[i - j]
            table[i].append((x_new * table[i - 1][j - 1] - x_old * table[i][j - 1]) / (x_new - x_old))
    value = table[-1][-1]
    error = float(np.max(np.abs(value - table[-2][-1])))
    flagged = tolerance is not None and error > tolerance
    if flagged:
        logger.warning("Richardson extrapolation inconsistent", extra={"error_estimate": error, "tolerance": tolerance})
    value = float(value) if np.ndim(value) == 0 else value
    return Extrapolation(value, error, flagged, ladder, quotients)


def find_sign_change(g, bracket, tol=DEFAULT_BISECTION_TOL):
    """Root of g inside ``bracket`` by bisection"""
    lo, hi = bracket
    if not lo < hi:
        raise InvalidConfigError(f"bracket must satisfy lo < hi, got {bracket}")
    if not g(lo) * g(hi) < 0:
        raise InvalidConfigError(f"no sign change on [{lo}, {hi}]")
    try:
        return float(bisect(g, lo, hi, xtol=tol))
    except RuntimeError as e:
        raise SolverFailure(f"bisection failed on [{lo}, {hi}]: {e}") from e


def find_sign_bracket(g, bracket, tol=DEFAULT_BISECTION_TOL):
    """Bisect ``bracket`` to width <= tol; g changes sign on the returned interval"""
    lo, hi = (float(x) for x in bracket)
    if not lo < hi:
        raise InvalidConfigError(f"bracket must satisfy lo < hi, got {bracket}")
    if tol <= 0:
        raise InvalidConfigError(f"bisection tolerance must be > 0, got {tol}")
    g_lo, g_hi = g(lo), g(hi)
    if not g_lo * g_hi < 0:
        raise InvalidConfigError(f"no sign change on [{lo}, {hi}]")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        g_mid = g(mid)
        if not np.isfinite(g_mid):
            raise SolverFailure(f"non-finite value at {mid} while bisecting [{lo}, {hi}]")
        if g_mid == 0:
            return mid, mid
        if g_lo * g_mid < 0:
            hi = mid
        else:
            lo, g_lo = mid, g_mid
    return lo, hi


def default_workers():
    return os.cpu_count() or 1


def parallel_map(fn, items, workers=None):
    """Map a picklable function over independent tasks with a bounded pool"""
    items = list(items)
    workers = default_workers() if workers is None else workers
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))
