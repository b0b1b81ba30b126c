"""Perturbed helices: analytic derivatives, Frenet frames, arc length, ribbon tilt"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad, solve_ivp

from .errors import FrameUndefinedError, InvalidConfigError, SolverFailure, TiltUndefinedError

logger = logging.getLogger(__name__)

FRAME_KAPPA_MIN = 1e-12
TILT_MIN = 1e-14
ARC_LENGTH_TOL = 1e-10


@dataclass(frozen=True)
class HelixParams:
    """Base helix t -> (t, R0 cos(beta0 t), R0 sin(beta0 t))"""

    R0: float
    beta0: float

    def __post_init__(self):
        violations = []
        if not self.R0 > 0:
            violations.append(f"HelixParams.R0 must be > 0, got {self.R0}")
        if not self.beta0 >= 0:
            violations.append(f"HelixParams.beta0 must be >= 0, got {self.beta0}")
        if violations:
            raise InvalidConfigError("; ".join(violations), violations)

    @property
    def pitch(self):
        """Dimensionless product R0*beta0"""
        return self.R0 * self.beta0

    @property
    def stretch(self):
        """ds/dt of the unperturbed helix"""
        return np.sqrt(1.0 + self.pitch**2)

    @property
    def kappa0(self):
        return self.R0 * self.beta0**2 / (1.0 + self.pitch**2)

    @property
    def tau0(self):
        return self.beta0 / (1.0 + self.pitch**2)

    def t0(self, s):
        """Unperturbed arc-length to parameter map"""
        return np.asarray(s, dtype=float) / self.stretch


PROFILE_KINDS = ("bump", "parabolic_cap")


@dataclass(frozen=True)
class PerturbationProfile:
    """Radius perturbation R(t) = R0 + epsilon * delta(t).

    ``bump`` is A (1 - u^2)^3 with u = (t - center)/half_width, which is C^2
    with compact support. ``parabolic_cap`` is A (1 - u^2): continuous but
    with jumps of delta' at the support ends, kept to show what C^2 buys.
    """

    amplitude: float = 1.0
    center: float = 0.0
    half_width: float = 1.0
    epsilon: float = 0.0
    kind: str = "bump"

    def __post_init__(self):
        violations = []
        if self.kind not in PROFILE_KINDS:
            violations.append(f"PerturbationProfile.kind must be one of {PROFILE_KINDS}, got {self.kind!r}")
        if not self.half_width > 0:
            violations.append(f"PerturbationProfile.half_width must be > 0, got {self.half_width}")
        if not self.epsilon >= 0:
            violations.append(f"PerturbationProfile.epsilon must be >= 0, got {self.epsilon}")
        if violations:
            raise InvalidConfigError("; ".join(violations), violations)

    @property
    def support(self):
        return (self.center - self.half_width, self.center + self.half_width)

    def with_epsilon(self, epsilon):
        return PerturbationProfile(self.amplitude, self.center, self.half_width, epsilon, self.kind)

    def _closed_form(self, u):
        w, A = self.half_width, self.amplitude
        if self.kind == "bump":
            q = 1.0 - u**2
            return [
                A * q**3,
                -6.0 * A * u * q**2 / w,
                -6.0 * A * q * (1.0 - 5.0 * u**2) / w**2,
                24.0 * A * u * (3.0 - 5.0 * u**2) / w**3,
            ]
        return [
            A * (1.0 - u**2),
            -2.0 * A * u / w,
            np.full_like(u, -2.0 * A / w**2),
            np.zeros_like(u),
        ]

    def derivatives(self, t, order=3):
        """delta and its first ``order`` t-derivatives, zero outside the support"""
        t = np.asarray(t, dtype=float)
        u = (t - self.center) / self.half_width
        inside = np.abs(u) < 1.0
        values = self._closed_form(np.where(inside, u, 0.0))
        return [np.where(inside, v, 0.0) for v in values[: order + 1]]

    def on_support(self, t, order=2):
        """delta and derivatives on the closed support, one-sided limits at its ends"""
        u = np.clip((np.asarray(t, dtype=float) - self.center) / self.half_width, -1.0, 1.0)
        return self._closed_form(u)[: order + 1]

    def delta(self, t):
        return self.derivatives(t, order=0)[0]

    def integral(self):
        """Closed-form integral of delta over the line"""
        factor = 32.0 / 35.0 if self.kind == "bump" else 4.0 / 3.0
        return self.amplitude * self.half_width * factor

    def sup_norm(self):
        return abs(self.amplitude)

    def is_c2(self, tol=1e-10):
        """One-sided limits of delta, delta', delta'' vanish at both support ends"""
        limits = self._closed_form(np.array([-1.0, 1.0]))[:3]
        scale = max(1.0, self.sup_norm())
        return all(np.max(np.abs(v)) <= tol * scale for v in limits)

    def check_against(self, helix):
        if not self.epsilon * self.sup_norm() < helix.R0:
            raise InvalidConfigError(
                f"perturbation too large: epsilon*max|delta| = {self.epsilon * self.sup_norm()} >= R0 = {helix.R0}")


@dataclass(frozen=True)
class HelixCurve:
    """Gamma(t) = (t, R(t) cos(beta0 t), R(t) sin(beta0 t)) with analytic derivatives.

    Derivatives are composed in the co-rotating basis e_r = (0, cos, sin),
    e_phi = (0, -sin, cos), which satisfies e_r' = beta0 e_phi and
    e_phi' = -beta0 e_r.
    """

    helix: HelixParams
    perturbation: PerturbationProfile

    def _radius(self, t):
        eps = self.perturbation.epsilon
        d = self.perturbation.derivatives(t, order=3)
        return self.helix.R0 + eps * d[0], eps * d[1], eps * d[2], eps * d[3]

    def _basis(self, t):
        theta = self.helix.beta0 * np.asarray(t, dtype=float)
        c, s = np.cos(theta), np.sin(theta)
        zero = np.zeros_like(theta)
        e_r = np.stack([zero, c, s], axis=-1)
        e_phi = np.stack([zero, -s, c], axis=-1)
        return e_r, e_phi

    def point(self, t):
        t = np.asarray(t, dtype=float)
        R = self._radius(t)[0]
        e_r, _ = self._basis(t)
        return R[..., None] * e_r + np.stack([t, 0 * t, 0 * t], axis=-1)

    def derivatives(self, t):
        """Gamma', Gamma'', Gamma''' at t (each of shape t.shape + (3,))"""
        t = np.asarray(t, dtype=float)
        b = self.helix.beta0
        R, R1, R2, R3 = self._radius(t)
        e_r, e_phi = self._basis(t)
        e_x = np.zeros(t.shape + (3,))
        e_x[..., 0] = 1.0
        d1 = e_x + R1[..., None] * e_r + (R * b)[..., None] * e_phi
        d2 = (R2 - R * b**2)[..., None] * e_r + (2.0 * R1 * b)[..., None] * e_phi
        d3 = (R3 - 3.0 * R1 * b**2)[..., None] * e_r + (3.0 * R2 * b - R * b**3)[..., None] * e_phi
        return d1, d2, d3

    def speed(self, t):
        return np.linalg.norm(self.derivatives(t)[0], axis=-1)


def helix_curve(params, perturbation=None):
    perturbation = perturbation if perturbation is not None else PerturbationProfile()
    perturbation.check_against(params)
    return HelixCurve(params, perturbation)


@dataclass(frozen=True)
class FrenetFrame:
    point: np.ndarray
    tangent: np.ndarray
    normal: np.ndarray
    binormal: np.ndarray
    kappa: object
    tau: object


def curvature_torsion(curve, t):
    """kappa = |G' x G''| / |G'|^3, tau = det(G', G'', G''') / |G' x G''|^2.

    Torsion is reported as 0 where the curvature vanishes.
    """
    d1, d2, d3 = curve.derivatives(t)
    cross = np.cross(d1, d2)
    cross_sq = np.sum(cross * cross, axis=-1)
    speed = np.linalg.norm(d1, axis=-1)
    kappa = np.sqrt(cross_sq) / speed**3
    safe = np.where(cross_sq > 0, cross_sq, 1.0)
    tau = np.where(cross_sq > 0, np.sum(cross * d3, axis=-1) / safe, 0.0)
    return kappa, tau


def frenet_frame(curve, t):
    """Frenet triad with n = b x t, which points to the axis for the bare helix"""
    t = np.asarray(t, dtype=float)
    kappa, tau = curvature_torsion(curve, t)
    if np.any(kappa < FRAME_KAPPA_MIN):
        raise FrameUndefinedError(f"curvature below {FRAME_KAPPA_MIN:g}, Frenet normal undefined")
    d1, d2, _ = curve.derivatives(t)
    tangent = d1 / np.linalg.norm(d1, axis=-1)[..., None]
    cross = np.cross(d1, d2)
    binormal = cross / np.linalg.norm(cross, axis=-1)[..., None]
    normal = np.cross(binormal, tangent)
    kappa = float(kappa) if kappa.ndim == 0 else kappa
    tau = float(tau) if np.ndim(tau) == 0 else tau
    return FrenetFrame(curve.point(t), tangent, normal, binormal, kappa, tau)


def arc_length(curve, t):
    """s(t) = integral of |Gamma'| from 0 to t"""
    lo, hi = sorted((0.0, float(t)))
    if lo == hi:
        return 0.0
    a, b = curve.perturbation.support
    points = [p for p in (a, b) if lo < p < hi]
    value, _ = quad(lambda x: float(curve.speed(x)), lo, hi, epsabs=1e-13, epsrel=1e-13,
                    limit=200, points=points or None)
    return value if t >= 0 else -value


def arc_length_param(curve, s, max_iterations=50):
    """t(s) by Newton iteration on the quadrature of |Gamma'|"""
    t = s / curve.helix.stretch
    tol = ARC_LENGTH_TOL * (1.0 + abs(s)) * 1e-2
    for _ in range(max_iterations):
        residual = arc_length(curve, t) - s
        if abs(residual) <= tol:
            return float(t)
        t -= residual / float(curve.speed(t))
    raise SolverFailure(f"arc-length inversion did not converge at s={s}", best_residual=abs(residual))


def arc_length_table(curve, s_values):
    """t(s) for many s at once by integrating dt/ds = 1/|Gamma'(t)| from s = 0"""
    s_values = np.asarray(s_values, dtype=float)
    result = np.empty_like(s_values)

    def rhs(_, y):
        return 1.0 / curve.speed(y[0])

    for sign in (1.0, -1.0):
        mask = s_values * sign > 0
        if not np.any(mask):
            continue
        targets = s_values[mask]
        order = np.argsort(sign * targets)
        span = (0.0, float(targets[order][-1]))
        sol = solve_ivp(rhs, span, [0.0], method="DOP853", t_eval=targets[order], rtol=1e-12, atol=1e-13)
        if not sol.success:
            raise SolverFailure(f"arc-length integration failed: {sol.message}")
        values = np.empty(targets.size)
        values[order] = sol.y[0]
        result[mask] = values
    result[s_values == 0] = 0.0
    return result


def _tilt_from_derivatives(d1, d2, d3):
    """tan(alpha) = n_1 / b_1 and d(alpha)/dt from Gamma', Gamma'', Gamma'''"""
    cross = np.cross(d1, d2)
    dcross = np.cross(d1, d3)
    speed = np.linalg.norm(d1, axis=-1)
    dspeed = np.sum(d1 * d2, axis=-1) / speed
    # n = (C x G') / (|C| |G'|), b = C / |C|, so n_1 / b_1 = N / (C_1 |G'|)
    N = np.cross(cross, d1)[..., 0]
    dN = (np.cross(dcross, d1) + np.cross(cross, d2))[..., 0]
    C1, dC1 = cross[..., 0], dcross[..., 0]
    norm_c = np.linalg.norm(cross, axis=-1)
    n1 = N / (norm_c * speed)
    b1 = C1 / norm_c
    if np.any((np.abs(n1) < TILT_MIN) & (np.abs(b1) < TILT_MIN)):
        raise TiltUndefinedError("normal and binormal both perpendicular to the helix axis")
    # tan(alpha) = P / Q with P = N, Q = C_1 |G'|; folded into (-pi/2, pi/2]
    P, Q = N, C1 * speed
    dP, dQ = dN, dC1 * speed + C1 * dspeed
    alpha = np.arctan2(P, Q)
    alpha = np.where(alpha > 0.5 * np.pi, alpha - np.pi, np.where(alpha <= -0.5 * np.pi, alpha + np.pi, alpha))
    return alpha, (Q * dP - P * dQ) / (P**2 + Q**2), speed


def ribbon_tilt(curve, s):
    """Tilt alpha(s) keeping n cos(alpha) - b sin(alpha) perpendicular to the axis.

    Returns (alpha, d alpha / ds); the derivative comes from analytic
    differentiation of tan(alpha) = n_1/b_1 along t, divided by |Gamma'|.
    The branch lies in (-pi/2, pi/2) and is 0 where the curve is a bare helix.
    """
    scalar = np.ndim(s) == 0
    t = arc_length_param(curve, float(s)) if scalar else arc_length_table(curve, s)
    alpha, dalpha_dt, speed = tilt_at_parameter(curve, t)
    if scalar:
        return float(alpha), float(dalpha_dt / speed)
    return alpha, dalpha_dt / speed


def tilt_at_parameter(curve, t):
    kappa, _ = curvature_torsion(curve, t)
    if np.any(kappa < FRAME_KAPPA_MIN):
        raise FrameUndefinedError("ribbon tilt needs a defined Frenet frame")
    return _tilt_from_derivatives(*curve.derivatives(t))


SAMPLE_COLUMNS = ("t", "s", "x", "y", "z", "kappa", "tau", "alpha")


def sample_curve(curve, s_values):
    """Rows (t, s, x, y, z, kappa, tau, alpha) at the given arc lengths"""
    s_values = np.asarray(s_values, dtype=float)
    t = arc_length_table(curve, s_values)
    point = curve.point(t)
    kappa, tau = curvature_torsion(curve, t)
    if curve.helix.beta0 > 0:
        alpha = tilt_at_parameter(curve, t)[0]
    else:
        alpha = np.zeros_like(t)
    return np.column_stack([t, s_values, point, kappa, tau, alpha])
