import numpy as np
import pytest

from hypelastica import closing, elastica, elliptic, flow, hypgeo
from hypelastica.elastica import Case
from hypelastica.errors import (DegenerateElasticaError, DomainError, NoElasticaError,
                                NotAnElasticaError)


def random_params(rng, case):
    lam = rng.uniform(-0.9, 1.5)
    if case is Case.ORBITLIKE:
        while True:
            k2 = rng.uniform(lam + 2, 2 * lam + 4)
            if abs(k2 - lam - 4) > 1e-3:
                return elastica.classify(lam, k2)
    return elastica.classify(lam, rng.uniform(2 * lam + 4.01, 2 * lam + 12))


# -- classification -----------------------------------------------------------

def test_circular_row():
    P = elastica.classify(0.0, 2.0)
    assert P.case is Case.CIRCULAR and P.C == pytest.approx(-1.0)
    k, kp = elastica.curvature_profile(P, np.linspace(0, 5, 7))
    assert np.allclose(k * k, 2.0) and np.all(kp == 0)


def test_asymptotic_row():
    P = elastica.classify(0.0, 4.0)
    assert P.case is Case.ASYMPTOTIC and P.C == 0.0 and P.r == pytest.approx(1.0)
    s = np.linspace(-3, 3, 11)
    k, _ = elastica.curvature_profile(P, s)
    np.testing.assert_allclose(k * k, 4.0 / np.cosh(s) ** 2, rtol=1e-14)


def test_wavelike_modulus_at_lambda_0_6():
    P = elastica.classify_from_C(0.6, 0.36)
    assert P.case is Case.WAVELIKE
    root = np.sqrt(2.6**2 + 1.44)
    assert P.p**2 == pytest.approx((2.6 + root) / (2 * root), rel=1e-12)


def test_no_elastica_below_lambda_plus_two():
    with pytest.raises(NoElasticaError):
        elastica.classify(0.0, 1.0)
    with pytest.raises(NoElasticaError):
        elastica.classify(1.0, 2.9)


def test_degenerate_locus_is_rejected_or_flagged():
    with pytest.raises(DegenerateElasticaError):
        elastica.classify(0.5, 4.5)
    with pytest.raises(DegenerateElasticaError):
        elastica.classify(0.5, 4.5 + 5e-10)
    P = elastica.classify(0.5, 4.5, allow_degenerate=True)
    assert "degenerate" in P.flags
    assert (P.lam + 2) ** 2 + 4 * P.C == pytest.approx(4.0, abs=1e-9)
    assert P.r**2 * P.p**2 == pytest.approx(1.0, abs=1e-9)


def test_near_asymptotic_boundary_flags_modulus():
    P = elastica.classify(0.0, 4.0000000001)
    assert P.case is Case.WAVELIKE and "modulus-near-one" in P.flags


def test_table_invariants(rng):
    for case in (Case.ORBITLIKE, Case.WAVELIKE):
        for _ in range(100):
            P = random_params(rng, case)
            lam, k2, p, r = P.lam, P.kappa0_sq, P.p, P.r
            assert 4 * P.C == pytest.approx(k2 * k2 - (2 * lam + 4) * k2, abs=1e-10)
            if case is Case.ORBITLIKE:
                assert P.C < 0
                assert k2 == pytest.approx((2 * lam + 4) / (2 - p * p), rel=1e-12)
                assert r == pytest.approx(0.5 * np.sqrt((2 * lam + 4) / (2 - p * p)), rel=1e-12)
            else:
                assert P.C > 0 and 1 / np.sqrt(2) < p < 1
                assert k2 == pytest.approx((2 * lam + 4) * p * p / (2 * p * p - 1), rel=1e-11)
                assert r == pytest.approx(0.5 * np.sqrt((2 * lam + 4) / (2 * p * p - 1)), rel=1e-11)


def test_both_classification_routes_agree():
    for lam in np.linspace(-0.9, 2.0, 20):
        lo = -(lam + 2) ** 2 / 4
        for C in np.concatenate([np.linspace(lo * 0.98, lo * 0.02, 5), np.linspace(0.05, 3, 5)]):
            try:
                Q = elastica.classify_from_C(lam, C)
            except DegenerateElasticaError:
                continue
            P = elastica.classify(lam, Q.kappa0_sq)
            assert P.case is Q.case
            assert P.C == pytest.approx(Q.C, abs=1e-10)
            assert P.p == pytest.approx(Q.p, abs=1e-10)
            assert P.r == pytest.approx(Q.r, abs=1e-10)


def test_params_json_field_names():
    P = elastica.classify(0.3, 3.0)
    assert set(P.to_dict()) == {"lambda", "kappa0_sq", "C", "case", "p", "r"}
    assert elastica.ElasticaParams.from_dict(P.to_dict()) == P
    kp = elastica.killing_params(P, 1.0)
    assert set(kp.to_dict()) == {"a", "c", "y"}


# -- profiles -----------------------------------------------------------------

@pytest.mark.parametrize("lam,k2", [(0.0, 3.5), (0.3, 6.0), (-0.5, 2.0), (1.0, 4.0), (0.0, 4.0)])
def test_profile_vertex_and_first_integral(lam, k2):
    P = elastica.classify(lam, k2)
    k, kp = elastica.curvature_profile(P, 0.0)
    assert k == pytest.approx(np.sqrt(k2)) and kp == pytest.approx(0.0, abs=1e-15)
    s = np.linspace(-20, 20, 2001)
    assert np.max(np.abs(elastica.once_integrated_residual(P, s))) < 1e-9


def test_orbitlike_curvature_minimum_at_half_period():
    P = elastica.classify(0.0, 3.2)
    k, _ = elastica.curvature_profile(P, elliptic.complete_K(P.p) / P.r)
    assert k == pytest.approx(P.kappa0 * np.sqrt(1 - P.p**2), rel=1e-12)


def test_profile_derivative_against_finite_differences(rng):
    h = 1e-5
    for P in (elastica.classify(0.2, 3.0), elastica.classify(0.2, 7.0), elastica.classify(0.2, 4.4)):
        s = rng.uniform(-15, 15, 1000)
        kp_fd = (elastica.curvature_profile(P, s + h)[0] - elastica.curvature_profile(P, s - h)[0]) / (2 * h)
        assert np.max(np.abs(kp_fd - elastica.curvature_profile(P, s)[1])) < 1e-7


def test_theta_modulus_identity(rng):
    for case in (Case.ORBITLIKE, Case.WAVELIKE):
        P = random_params(rng, case)
        s = rng.uniform(-10, 10, 300)
        th = elastica.theta(P, s)
        k, _ = elastica.curvature_profile(P, s)
        np.testing.assert_allclose(np.abs(th) ** 2, P.lam**2 + 4 * P.C + 4 * k * k, atol=1e-10,
                                   rtol=1e-12)


# -- Killing data -------------------------------------------------------------

def test_killing_constraints(rng):
    for _ in range(1000):
        P = random_params(rng, Case.ORBITLIKE if rng.random() < 0.5 else Case.WAVELIKE)
        y = float(np.exp(rng.uniform(-2, 2)))
        for kp in elastica.killing_branches(P, y):
            assert kp.a * kp.c == pytest.approx(-(P.lam**2 + 4 * P.C) / 4, abs=1e-10)
            assert -kp.a * y * y + kp.c == pytest.approx((P.kappa0_sq - P.lam) * y, abs=1e-10)


def test_killing_kind_follows_case():
    orb = elastica.classify_from_C(0.0, -0.3)
    assert all(kp.kind == "rotational" for kp in elastica.killing_branches(orb, 1.0))
    wav = elastica.classify_from_C(0.6, 0.36)
    assert all(kp.kind == "translational" for kp in elastica.killing_branches(wav, 1.0))
    ag = elastica.classify(0.0, 4.0)
    assert elastica.killing_params(ag, 1.0).kind == "horocyclical"


def test_killing_data_refuses_circles():
    with pytest.raises(DomainError):
        elastica.killing_params(elastica.classify(0.0, 2.0), 1.0)


def test_rotational_members_have_lambda_above_minus_one(catalog):
    for rec in catalog:
        if rec.kp is not None and rec.kp.kind == "rotational":
            assert rec.params.lam > -1


def test_killing_field_zero_and_constant_field():
    kp = elastica.killing_params(elastica.classify_from_C(0.0, -0.3), 1.0)
    zero = np.sqrt(kp.c / kp.a)
    assert np.allclose(elastica.killing_field_eval(kp, (0.0, zero)), 0.0, atol=1e-12)
    flat = elastica.KillingParams(0.0, 2.5, 1.0)
    assert elastica.killing_field_eval(flat, (3.0, 7.0)) == (2.5, 0.0)


def test_killing_field_along_the_curve():
    P = elastica.classify_from_C(0.2, -0.4)
    kp = elastica.killing_params(P, 1.0)
    s = np.linspace(0, 6, 4097)
    curve, _ = elastica.certify(P, kp, s)
    z = curve.z
    h = s[1] - s[0]
    dz = np.zeros_like(z)
    dz[2:-2] = (z[:-4] - 8 * z[1:-3] + 8 * z[3:-1] - z[4:]) / (12 * h)
    dz[:2], dz[-2:] = dz[2], dz[-3]
    T = dz / np.abs(dz)  # Euclidean unit direction
    k, kp_ = elastica.curvature_profile(P, s)
    J = ((k * k - P.lam) * T + 2 * kp_ * 1j * T) * z.imag
    F = np.array(elastica.killing_field_eval(kp, (z.real, z.imag)))
    err = np.abs(J - (F[0] + 1j * F[1]))[5:-5]
    assert err.max() < 1e-6 * max(1.0, np.abs(J).max())


# -- sampling -----------------------------------------------------------------

@pytest.mark.parametrize("lam,C", [(0.0, -0.39), (0.5, -1.2), (-0.5, -0.2), (0.6, 0.36),
                                   (0.1, 0.03), (0.0, 1.5)])
def test_sampled_curves_certify(lam, C):
    P = elastica.classify_from_C(lam, C)
    kp = elastica.killing_params(P, 1.0)
    s = np.linspace(0, elastica.curvature_period(P), 4096)
    curve, rep = elastica.certify(P, kp, s, order=4)
    assert rep.unit_speed < 1e-6 and rep.killing < 1e-6 and rep.curvature < 1e-4
    assert abs(curve.z[0] - 1j) < 1e-14
    assert elastica.sample_curve(P, kp, s).n == 4096


def test_asymptotic_curves_sample_on_windows():
    P = elastica.classify(0.3, 4.6)
    kp = elastica.killing_params(P, 2.0)
    curve, rep = elastica.certify(P, kp, np.linspace(-15, 15, 4001), order=4)
    assert rep.unit_speed < 1e-6 and rep.killing < 1e-6 and not rep.closed


def test_curvature_extrema_sit_where_the_derivative_vanishes():
    P = elastica.classify_from_C(0.0, -0.39)
    kp = elastica.killing_params(P, 1.0)
    T = elastica.curvature_period(P)
    s = np.linspace(0, 2 * T, 4096, endpoint=False)
    curve, _ = elastica.certify(P, kp, s, closed=False, order=4)
    kd = hypgeo.hyperbolic_curvature(curve, order=4)
    interior = slice(50, -50)
    i = np.argmin(kd[interior]) + 50
    # the analytic minima sit at half periods
    assert abs((s[i] - T / 2) - T * np.round((s[i] - T / 2) / T)) < 2 * (s[1] - s[0])
    assert abs(elastica.curvature_profile(P, s[i])[1]) < 1e-2


def test_wrong_killing_branch_is_not_an_elastica():
    P = elastica.classify_from_C(0.0, -0.39)
    good = elastica.killing_params(P, 1.0)
    bogus = elastica.KillingParams(good.a * 1.3, good.c, 1.0)
    with pytest.raises((NotAnElasticaError, DomainError)):
        elastica.sample_curve(P, bogus, np.linspace(0, 5, 512))


def test_degenerate_parameters_cannot_be_sampled():
    P = elastica.classify(0.5, 4.5, allow_degenerate=True)
    kp = elastica.killing_params(P, 1.0)
    with pytest.raises(DegenerateElasticaError):
        elastica.trace(P, kp, np.linspace(0, 1, 16))


def test_clifford_circle_from_circular_params():
    P = elastica.classify(0.0, 2.0)
    y = elastica.clifford_start_height()
    rho, centre = elastica.circle_geometry(P, y)
    L = 2 * np.pi * np.sinh(rho)
    c = elastica.sample_circle(P, y, L * np.arange(1024) / 1024)
    assert np.allclose(np.abs(c.z - 1j), 1 / np.sqrt(2), atol=1e-13)
    assert np.min(c.y) == pytest.approx(y)


def test_figure_eight_apex_height():
    """Apex of the lambda = 0.6 closed wavelike curve drawn through (0, 1)."""
    rec = closing.solve_figure_eight(0.6, N=4096)
    z = flow.normalize_lowest(rec.curve.z)
    apex = float(np.max(z.imag))
    assert abs(apex - 13.5) <= 0.05 * 13.5, f"apex at y = {apex:.4g}"
