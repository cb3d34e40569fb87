"""Randomized properties checked with hypothesis."""

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from hypelastica import closing, elastica, elliptic, hypgeo
from hypelastica.elastica import Case
from hypelastica.errors import DegenerateElasticaError

moduli = st.floats(0.0, 0.999)
args = st.floats(-50.0, 50.0)


@settings(max_examples=300, deadline=None)
@given(x=args, p=moduli)
def test_jacobi_identities(x, p):
    j = elliptic.jacobi(x, p)
    assert abs(j.sn**2 + j.cn**2 - 1) < 1e-12
    assert abs(j.dn**2 + p * p * j.sn**2 - 1) < 1e-12
    assert abs(np.sin(j.am) - j.sn) < 1e-12 and abs(np.cos(j.am) - j.cn) < 1e-12


@settings(max_examples=200, deadline=None)
@given(x=args, p=moduli)
def test_jacobi_parity(x, p):
    a, b = elliptic.jacobi(x, p), elliptic.jacobi(-x, p)
    assert abs(a.sn + b.sn) < 1e-12 and abs(a.cn - b.cn) < 1e-12 and abs(a.dn - b.dn) < 1e-12


@settings(max_examples=200, deadline=None)
@given(p=st.floats(0.001, 0.999))
def test_legendre_relation(p):
    q = np.sqrt(1 - p * p)
    K, E = elliptic.complete_KE(p)
    Kq, Eq = elliptic.complete_KE(q)
    assert abs(E * Kq + Eq * K - K * Kq - np.pi / 2) < 1e-11 * max(1.0, K * Kq)


@settings(max_examples=300, deadline=None)
@given(lam=st.floats(-1.5, 3.0), excess=st.floats(1e-6, 20.0))
def test_classification_round_trips_through_C(lam, excess):
    k2 = lam + 2 + excess
    try:
        P = elastica.classify(lam, k2)
    except DegenerateElasticaError:
        return
    Q = elastica.classify_from_C(lam, P.C, allow_degenerate=True)
    assert Q.case is P.case
    assert abs(Q.kappa0_sq - P.kappa0_sq) < 1e-8 * max(1.0, k2)


@settings(max_examples=150, deadline=None)
@given(lam=st.floats(-1.5, 3.0), excess=st.floats(1e-3, 20.0), s=st.floats(-30.0, 30.0))
def test_curvature_profile_solves_first_integral(lam, excess, s):
    k2 = lam + 2 + excess
    try:
        P = elastica.classify(lam, k2)
    except DegenerateElasticaError:
        return
    if P.case is Case.CIRCULAR:
        return
    res = elastica.once_integrated_residual(P, np.array([s]))
    assert np.all(np.abs(res) < 1e-8 * max(1.0, k2**2))


@settings(max_examples=60, deadline=None)
@given(lam=st.floats(-0.9, 0.38), frac=st.floats(0.02, 0.98))
def test_winding_routes_agree(lam, frac):
    lo, hi, deg = closing.rotational_interval(lam)
    C = lo + frac * (hi - lo)
    if deg is not None and abs(C - deg) < 1e-3:
        return
    a = closing.winding_per_period(lam, C)
    b = closing.winding_per_period_u(lam, C)
    assert abs(a - b) < 1e-9


@settings(max_examples=50, deadline=None)
@given(th=st.floats(0, 2 * np.pi), s=st.floats(0.1, 10), x0=st.floats(-5, 5))
def test_length_is_invariant_under_isometries(th, s, x0):
    c = hypgeo.lemniscate(0.5, 2.0, 1024)
    rot = hypgeo.MobiusMap(np.cos(th / 2), 2 * np.sin(th / 2), -np.sin(th / 2) / 2, np.cos(th / 2))
    move = hypgeo.MobiusMap(np.sqrt(s), x0 / np.sqrt(s), 0.0, 1 / np.sqrt(s))
    w = hypgeo.apply_mobius(move.compose(rot), c)
    assert abs(hypgeo.length(w, order=4) / hypgeo.length(c, order=4) - 1) < 1e-7
    assert hypgeo.turning_number(w) == 0
