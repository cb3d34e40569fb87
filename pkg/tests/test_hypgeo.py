import numpy as np
import pytest

from hypelastica import hypgeo
from hypelastica.errors import AmbiguousTurningNumber, CurveError, DomainError


def clifford(n=512):
    return hypgeo.euclidean_circle((0.0, 1.0), 1 / np.sqrt(2), n)


def random_map(rng, centre=2.0):
    """Rotation about a point near ``i*centre`` followed by a dilation and a translation."""
    th = rng.uniform(0, 2 * np.pi)
    h = centre * np.exp(rng.uniform(-0.3, 0.3))
    rot = hypgeo.MobiusMap(np.cos(th / 2), h * np.sin(th / 2), -np.sin(th / 2) / h, np.cos(th / 2))
    s, x0 = np.exp(rng.uniform(-2, 2)), rng.uniform(-5, 5)
    move = hypgeo.MobiusMap(np.sqrt(s), x0 / np.sqrt(s), 0.0, 1 / np.sqrt(s))
    return move.compose(rot)


def test_curve_invariants_are_enforced():
    with pytest.raises(CurveError):
        hypgeo.SampledCurve(np.zeros(4), np.ones(4))
    with pytest.raises(CurveError):
        hypgeo.SampledCurve(np.arange(8.0), -np.ones(8))
    with pytest.raises(CurveError):
        hypgeo.SampledCurve(np.array([0, 0, 1, 2, 3, 4, 5, 6.0]), np.ones(8))
    with pytest.raises(CurveError):
        hypgeo.SampledCurve(np.arange(8.0), np.ones(8), param="bogus")


def test_curve_samples_are_immutable():
    c = clifford(16)
    with pytest.raises(ValueError):
        c.x[0] = 3.0


def test_clifford_circle_curvature_length_energy():
    c = clifford(512)
    k = hypgeo.hyperbolic_curvature(c)
    assert np.max(np.abs(k - np.sqrt(2))) < 1e-3
    assert hypgeo.length(c) == pytest.approx(2 * np.pi, abs=1e-3)
    assert hypgeo.energy(c, 0.0) == pytest.approx(4 * np.pi, abs=1e-2)


def test_euclidean_circle_oracle_by_fine_quadrature():
    # a Euclidean circle with centre height m and radius r has length 2 pi r / sqrt(m^2 - r^2)
    m, r = 3.0, 1.2
    c = hypgeo.euclidean_circle((0.5, m), r, 1 << 14)
    assert hypgeo.length(c, order=4) == pytest.approx(2 * np.pi * r / np.sqrt(m * m - r * r), rel=1e-10)
    assert np.allclose(hypgeo.hyperbolic_curvature(c), m / r, atol=1e-6)


def test_horizontal_line_has_unit_curvature():
    x = np.linspace(-1, 1, 64)
    line = hypgeo.SampledCurve(x, np.full_like(x, 2.0), closed=False)
    k = hypgeo.hyperbolic_curvature(line)
    assert np.allclose(np.abs(k[1:-1]), 1.0, atol=1e-12)


def test_curvature_refinement_order():
    # a non-uniformly parametrized circle exercises the generic second-order path
    errs = []
    for n in (64, 128, 256):
        t = 2 * np.pi * np.arange(n) / n
        t = t + 0.3 * np.sin(t)
        z = 1.5j + 0.8 * np.exp(1j * t)
        c = hypgeo.SampledCurve(z.real, z.imag)
        errs.append(np.max(np.abs(hypgeo.hyperbolic_curvature(c) - 1.5 / 0.8)))
    slopes = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(slopes >= 1.9)


def test_dilation_invariance():
    c = hypgeo.lemniscate(2.0, 3.0, 512)
    s = c.scaled(7.3)
    assert hypgeo.length(s) == pytest.approx(hypgeo.length(c), rel=1e-10)
    assert hypgeo.energy(s) == pytest.approx(hypgeo.energy(c), rel=1e-10)


def test_energy_is_linear_in_lambda():
    c = hypgeo.lemniscate(1.0, 2.0, 256)
    assert hypgeo.energy(c, 0.7) - hypgeo.energy(c, 0.0) == pytest.approx(
        0.7 * hypgeo.length(c), abs=1e-12)


def test_mobius_identity_and_dilation():
    c = clifford(64)
    same = hypgeo.apply_mobius(hypgeo.MobiusMap.identity(), c)
    np.testing.assert_array_equal(same.z, c.z)
    s = 2.5
    dil = hypgeo.apply_mobius(hypgeo.MobiusMap(np.sqrt(s), 0.0, 0.0, 1 / np.sqrt(s)), c)
    np.testing.assert_allclose(dil.z, s * c.z, rtol=1e-14)


def test_mobius_rejects_bad_determinant():
    with pytest.raises(DomainError):
        hypgeo.MobiusMap(1.0, 1.0, 1.0, 1.0)


def test_isometry_invariance_under_random_maps(rng):
    c = hypgeo.lemniscate(0.5, 2.0, 4096)
    L0, E0 = hypgeo.length(c, order=4), hypgeo.energy(c, 0.3, order=4)
    for _ in range(100):
        w = hypgeo.apply_mobius(random_map(rng), c)
        assert hypgeo.length(w, order=4) == pytest.approx(L0, rel=1e-9)
        assert hypgeo.energy(w, 0.3, order=4) == pytest.approx(E0, rel=1e-9)
        assert hypgeo.turning_number(w) == 0


def test_normalize_initial_identity():
    g = hypgeo.normalize_initial((0.0, 2.0), (2.0, 0.0), 2.0)
    np.testing.assert_allclose([g.a, g.b, g.c, g.d], [1, 0, 0, 1], atol=1e-14)


def test_normalize_initial_post_conditions():
    z = 3 + 2j
    v = 2.0 * np.exp(0.7j)
    g = hypgeo.normalize_initial((3.0, 2.0), (v.real, v.imag), 1.0)
    assert g.a * g.d - g.b * g.c == pytest.approx(1.0, abs=1e-12)
    assert abs(g(z) - 1j) < 1e-10
    assert abs(g.derivative(z) * v - 1.0) < 1e-10


def test_normalize_initial_rejects_non_unit_vector():
    with pytest.raises(DomainError):
        hypgeo.normalize_initial((0.0, 2.0), (1.0, 0.0), 1.0)


def test_normalized_curve_keeps_curvature():
    c = hypgeo.lemniscate(0.8, 2.5, 1024)
    dz = (np.roll(c.z, -1) - np.roll(c.z, 1))
    v = dz[10] / abs(dz[10]) * c.y[10]
    g = hypgeo.normalize_initial((c.x[10], c.y[10]), (v.real, v.imag), 1.0)
    w = hypgeo.apply_mobius(g, c)
    assert abs(w.z[10] - 1j) < 1e-10
    k0 = hypgeo.hyperbolic_curvature(c, order=4)
    k1 = hypgeo.hyperbolic_curvature(w, order=4)
    assert np.max(np.abs(np.abs(k1) - np.abs(k0))) < 1e-6 * max(1, np.max(np.abs(k0)))


def test_turning_numbers():
    assert hypgeo.turning_number(clifford(128)) == 1
    assert hypgeo.turning_number(hypgeo.lemniscate(1, 2, 256)) == 0
    assert hypgeo.turning_number(hypgeo.euclidean_circle((0, 3), 1, 257, turns=2)) == 2
    rev = clifford(128)
    rev = hypgeo.SampledCurve(rev.x[::-1], rev.y[::-1])
    assert hypgeo.turning_number(rev) == -1


def test_under_resolved_turning_number_is_ambiguous():
    # half a circle closed by its diameter: a corner the samples cannot resolve
    arc = 3j + np.exp(1j * np.linspace(0, np.pi, 6))
    arc = np.append(arc, 3j + np.array([-0.5, 0.0, 0.5]))
    with pytest.raises(AmbiguousTurningNumber):
        hypgeo.turning_number(hypgeo.SampledCurve(arc.real, arc.imag))


def test_simplicity():
    assert hypgeo.is_simple(clifford(200))
    assert not hypgeo.is_simple(hypgeo.lemniscate(1, 2, 200))


def test_hyperbolic_distance():
    assert hypgeo.hyperbolic_distance(1j, np.e * 1j) == pytest.approx(1.0, abs=1e-14)
    assert hypgeo.hyperbolic_distance(2 + 1j, 2 + 1j) == 0.0


def test_csv_round_trip_is_bit_exact(tmp_path, rng):
    z = 1.3j + 0.7 * np.exp(1j * np.sort(rng.uniform(0, 2 * np.pi, 50)))
    c = hypgeo.SampledCurve(z.real, z.imag)
    path = tmp_path / "c.csv"
    hypgeo.write_curve_csv(path, c)
    raw = path.read_bytes()
    assert raw.startswith(b"t,x,y\n") and b"\r" not in raw
    back = hypgeo.read_curve_csv(path)
    np.testing.assert_array_equal(back.x, c.x)
    np.testing.assert_array_equal(back.y, c.y)


def test_csv_loader_rejects_bad_files(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("t,x,y\n0,0,1\n1,1,-1\n2,2,1\n3,3,1\n")
    with pytest.raises(CurveError):
        hypgeo.read_curve_csv(bad)
    bad.write_text("a,b,c\n0,0,1\n")
    with pytest.raises(CurveError):
        hypgeo.read_curve_csv(bad)
    with pytest.raises(CurveError):
        hypgeo.read_curve_csv(tmp_path / "missing.csv")
