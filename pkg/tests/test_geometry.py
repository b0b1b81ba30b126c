import numpy as np
import pytest
from scipy.integrate import quad

from src.errors import FrameUndefinedError, InvalidConfigError
from src.geometry import (
    SAMPLE_COLUMNS,
    HelixParams,
    PerturbationProfile,
    arc_length,
    arc_length_param,
    arc_length_table,
    curvature_torsion,
    frenet_frame,
    helix_curve,
    ribbon_tilt,
    sample_curve,
    _tilt_from_derivatives,
)


def test_unperturbed_curvature_and_torsion(rng):
    for _ in range(100):
        R0, beta0 = rng.uniform(0.2, 3.0), rng.uniform(0.1, 3.0)
        helix = HelixParams(R0, beta0)
        t = rng.uniform(-10.0, 10.0, size=5)
        kappa, tau = curvature_torsion(helix_curve(helix), t)

        np.testing.assert_allclose(kappa, R0 * beta0**2 / (1.0 + R0**2 * beta0**2), rtol=1e-10)
        np.testing.assert_allclose(tau, beta0 / (1.0 + R0**2 * beta0**2), rtol=1e-10)


def test_unperturbed_frenet_triad(rng):
    for _ in range(20):
        R0, beta0 = rng.uniform(0.2, 3.0), rng.uniform(0.1, 3.0)
        t = rng.uniform(-10.0, 10.0)
        frame = frenet_frame(helix_curve(HelixParams(R0, beta0)), t)
        c, s = np.cos(beta0 * t), np.sin(beta0 * t)
        root = np.sqrt(1.0 + R0**2 * beta0**2)

        np.testing.assert_allclose(frame.tangent, np.array([1.0, -R0 * beta0 * s, R0 * beta0 * c]) / root, atol=1e-10)
        np.testing.assert_allclose(frame.normal, [0.0, -c, -s], atol=1e-10)
        np.testing.assert_allclose(frame.binormal, np.array([R0 * beta0, s, -c]) / root, atol=1e-10)


def test_helix_parameters():
    helix = HelixParams(1.0, 1.0)
    assert helix.pitch == 1.0
    assert helix.kappa0 == pytest.approx(0.5)
    assert helix.tau0 == pytest.approx(0.5)
    assert helix.t0(np.sqrt(2.0)) == pytest.approx(1.0)


@pytest.mark.parametrize("R0, beta0", [(0.0, 1.0), (1.0, -1.0)])
def test_helix_rejects_invalid(R0, beta0):
    with pytest.raises(InvalidConfigError):
        HelixParams(R0, beta0)


def test_straight_line_has_no_curvature():
    kappa, tau = curvature_torsion(helix_curve(HelixParams(1.0, 0.0)), np.linspace(-1.0, 1.0, 5))
    np.testing.assert_allclose(kappa, 0.0, atol=1e-15)
    np.testing.assert_allclose(tau, 0.0)


def test_frame_undefined_on_straight_line():
    with pytest.raises(FrameUndefinedError):
        frenet_frame(helix_curve(HelixParams(1.0, 0.0)), 0.3)


def test_arc_length_of_bare_helix(unit_helix):
    curve = helix_curve(unit_helix)
    assert arc_length(curve, 2.0) == pytest.approx(2.0 * np.sqrt(2.0), rel=1e-12)
    assert arc_length(curve, -2.0) == pytest.approx(-2.0 * np.sqrt(2.0), rel=1e-12)
    assert arc_length_param(curve, 3.0) == pytest.approx(3.0 / np.sqrt(2.0), rel=1e-10)


def test_arc_length_table_matches_newton(unit_helix, bump):
    curve = helix_curve(unit_helix, bump.with_epsilon(0.2))
    s = np.array([-4.0, -1.5, 0.0, 0.7, 3.2])
    table = arc_length_table(curve, s)

    np.testing.assert_allclose(table, [arc_length_param(curve, v) for v in s], atol=1e-9)
    np.testing.assert_allclose([arc_length(curve, t) for t in table], s, atol=1e-9)


@pytest.mark.parametrize("kind", ["bump", "parabolic_cap"])
def test_profile_integral_closed_form(kind):
    profile = PerturbationProfile(amplitude=1.5, center=0.3, half_width=2.0, kind=kind)
    a, b = profile.support
    numeric, _ = quad(lambda t: float(profile.delta(t)), a, b)

    assert profile.integral() == pytest.approx(numeric, rel=1e-10)


def test_profile_smoothness():
    assert PerturbationProfile(kind="bump").is_c2()
    assert not PerturbationProfile(kind="parabolic_cap").is_c2()


def test_profile_derivatives_vanish_outside_support():
    values = PerturbationProfile(half_width=1.0).derivatives(np.array([-2.0, 1.5]), order=3)
    for v in values:
        np.testing.assert_array_equal(v, 0.0)


def test_profile_rejects_invalid():
    with pytest.raises(InvalidConfigError):
        PerturbationProfile(half_width=0.0)
    with pytest.raises(InvalidConfigError):
        PerturbationProfile(kind="gaussian")
    with pytest.raises(InvalidConfigError):
        helix_curve(HelixParams(1.0, 1.0), PerturbationProfile(amplitude=2.0, epsilon=0.5))


def test_bare_helix_has_no_tilt(unit_helix):
    curve = helix_curve(unit_helix)
    alpha, dalpha = ribbon_tilt(curve, np.array([-1.0, 0.0, 2.0]))
    np.testing.assert_allclose(alpha, 0.0, atol=1e-12)
    np.testing.assert_allclose(dalpha, 0.0, atol=1e-12)


def test_tilt_derivative_matches_finite_difference(unit_helix, bump):
    curve = helix_curve(unit_helix, bump.with_epsilon(0.1))
    s, h = 0.5, 1e-4
    _, dalpha = ribbon_tilt(curve, s)
    forward, _ = ribbon_tilt(curve, s + h)
    backward, _ = ribbon_tilt(curve, s - h)

    assert dalpha == pytest.approx((forward - backward) / (2.0 * h), abs=1e-6)


def test_perturbed_frames_are_right_handed_orthonormal(unit_helix, bump):
    curve = helix_curve(unit_helix, bump.with_epsilon(0.2))
    frame = frenet_frame(curve, np.linspace(-4.0, 4.0, 1000))
    triad = np.stack([frame.tangent, frame.normal, frame.binormal], axis=-2)

    gram = np.einsum("kij,klj->kil", triad, triad)
    np.testing.assert_allclose(gram, np.broadcast_to(np.eye(3), gram.shape), atol=1e-12)
    np.testing.assert_allclose(np.linalg.det(triad), 1.0, atol=1e-12)


def test_perturbed_frames_obey_frenet_serret(unit_helix, bump):
    curve = helix_curve(unit_helix, bump.with_epsilon(0.2))
    t, h = np.linspace(-1.9, 1.9, 39), 1e-5
    frame = frenet_frame(curve, t)
    ahead, behind = frenet_frame(curve, t + h), frenet_frame(curve, t - h)
    speed = np.linalg.norm(curve.derivatives(t)[0], axis=-1)[:, None]

    dtangent = (ahead.tangent - behind.tangent) / (2.0 * h * speed)
    dbinormal = (ahead.binormal - behind.binormal) / (2.0 * h * speed)
    np.testing.assert_allclose(dtangent, frame.kappa[:, None] * frame.normal, atol=1e-6)
    np.testing.assert_allclose(dbinormal, -frame.tau[:, None] * frame.normal, atol=1e-6)


def test_tilt_is_finite_where_the_binormal_has_no_axial_component():
    # b_1 = 0 with n_1 = 1
    d1, d2, d3 = np.array([0.0, 1.0, 0.0]), np.array([1.0, 0.0, 0.0]), np.zeros(3)
    alpha, dalpha, speed = _tilt_from_derivatives(d1, d2, d3)

    assert float(alpha) == pytest.approx(np.pi / 2.0)
    assert np.isfinite(dalpha) and float(dalpha) == pytest.approx(0.0)
    assert float(speed) == pytest.approx(1.0)


def test_sample_curve_rows(unit_helix):
    s = np.linspace(-3.0, 3.0, 7)
    rows = sample_curve(helix_curve(unit_helix), s)

    assert rows.shape == (7, len(SAMPLE_COLUMNS))
    np.testing.assert_allclose(rows[:, SAMPLE_COLUMNS.index("kappa")], 0.5, rtol=1e-12)
    np.testing.assert_allclose(rows[:, SAMPLE_COLUMNS.index("t")], s / np.sqrt(2.0), atol=1e-10)
