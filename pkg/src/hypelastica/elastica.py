"""Elastica in the hyperbolic plane: curvature profiles, Killing data and
closed-form sampling.

An arclength-parametrized curve is an elastica when
``2 k'' + k**3 - (lam + 2) k = 0``. Integrating once gives
``k'**2 + k**4/4 - (lam + 2)/2 k**2 = C``. The value ``kappa0_sq`` of
``k**2`` at a vertex (``k' = 0``) fixes ``C`` and the shape of the profile.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import elliptic
from .errors import (CertificationError, DegenerateElasticaError, DomainError,
                     NoElasticaError, NotAnElasticaError)
from .hypgeo import ARCLENGTH, HPoint, SampledCurve, hyperbolic_curvature, hyperbolic_distance


class Case(str, Enum):
    CIRCULAR = "circular"
    ORBITLIKE = "orbitlike"
    ASYMPTOTIC = "asymptotically-geodesic"
    WAVELIKE = "wavelike"


BOUNDARY_RTOL = 1e-12
DEGENERATE_TOL = 1e-9
NEAR_ONE = 1e-6


@dataclass(frozen=True)
class ElasticaParams:
    lam: float
    kappa0_sq: float
    C: float
    case: Case
    p: float | None
    r: float | None
    flags: tuple = field(default=(), compare=False)

    @property
    def kappa0(self):
        return float(np.sqrt(self.kappa0_sq))

    @property
    def degenerate_gap(self):
        """Signed distance of kappa0^2 from the excluded value lambda + 4."""
        return self.kappa0_sq - self.lam - 4.0

    def to_dict(self):
        return {
            "lambda": self.lam,
            "kappa0_sq": self.kappa0_sq,
            "C": self.C,
            "case": self.case.value,
            "p": self.p,
            "r": self.r,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(float(d["lambda"]), float(d["kappa0_sq"]), float(d["C"]), Case(d["case"]),
                   None if d.get("p") is None else float(d["p"]),
                   None if d.get("r") is None else float(d["r"]))


@dataclass(frozen=True)
class KillingParams:
    a: float
    c: float
    y: float

    def __post_init__(self):
        if not self.y > 0:
            raise DomainError("start height y must be positive")

    @property
    def kind(self):
        ac = self.a * self.c
        scale = max(abs(self.a) * self.y, abs(self.c) / self.y, 1e-300) ** 2
        if abs(ac) <= 1e-13 * scale:
            return "horocyclical"
        return "rotational" if ac > 0 else "translational"

    def to_dict(self):
        return {"a": self.a, "c": self.c, "y": self.y}

    @classmethod
    def from_dict(cls, d):
        return cls(float(d["a"]), float(d["c"]), float(d["y"]))


# -- classification -----------------------------------------------------------

def _near(a, b):
    return abs(a - b) <= BOUNDARY_RTOL * max(1.0, abs(a), abs(b))


def _finish(lam, k2, C, case, p, r, allow_degenerate):
    flags = []
    if p is not None:
        if p > 1.0 - NEAR_ONE:
            flags.append("modulus-near-one")
        p, clamped = elliptic.clamp_modulus(p)
        if clamped:
            flags.append("modulus-clamped")
    if case is Case.ORBITLIKE and abs(k2 - lam - 4.0) <= DEGENERATE_TOL:
        if not allow_degenerate:
            raise DegenerateElasticaError(
                f"kappa0^2 = {k2!r} lies on the excluded locus lambda + 4 = {lam + 4.0!r}")
        flags.append("degenerate")
    return ElasticaParams(float(lam), float(k2), float(C), case, p, r, tuple(flags))


def classify(lam, kappa0_sq, allow_degenerate=False):
    """Classify the profile with vertex curvature squared ``kappa0_sq``."""
    lam, k2 = float(lam), float(kappa0_sq)
    if not (np.isfinite(lam) and np.isfinite(k2)):
        raise DomainError("lambda and kappa0_sq must be finite")
    if k2 < 0:
        raise NoElasticaError("kappa0_sq must be non-negative")
    if _near(k2, lam + 2.0):
        if lam + 2.0 <= 0:
            raise NoElasticaError("constant curvature needs lambda > -2")
        return _finish(lam, lam + 2.0, -(lam + 2.0) ** 2 / 4.0, Case.CIRCULAR, None, None,
                       allow_degenerate)
    if k2 < lam + 2.0:
        raise NoElasticaError(f"no elastica with kappa0^2 = {k2!r} < lambda + 2 = {lam + 2.0!r}")
    if _near(k2, 2.0 * lam + 4.0):
        r = 0.5 * np.sqrt(2.0 * lam + 4.0)
        return _finish(lam, 2.0 * lam + 4.0, 0.0, Case.ASYMPTOTIC, None, r, allow_degenerate)
    C = 0.25 * k2 * (k2 - 2.0 * lam - 4.0)
    if k2 < 2.0 * lam + 4.0:
        p = np.sqrt(2.0 - (2.0 * lam + 4.0) / k2)
        r = 0.5 * np.sqrt(k2)
        return _finish(lam, k2, C, Case.ORBITLIKE, p, r, allow_degenerate)
    p = np.sqrt(k2 / (2.0 * (k2 - lam - 2.0)))
    r = 0.5 * np.sqrt(k2) / p
    return _finish(lam, k2, C, Case.WAVELIKE, p, r, allow_degenerate)


def cubic_roots(lam, C):
    """Roots ``alpha <= beta <= gamma`` of ``-u**3 + 2(lam+2)u**2 + 4Cu``."""
    disc = (lam + 2.0) ** 2 + 4.0 * C
    if disc < 0:
        if disc > -BOUNDARY_RTOL * max(1.0, (lam + 2.0) ** 2):
            disc = 0.0
        else:
            raise NoElasticaError(f"no real profile for lambda={lam!r}, C={C!r}")
    s = np.sqrt(disc)
    return tuple(sorted((0.0, lam + 2.0 - s, lam + 2.0 + s)))


def classify_from_C(lam, C, allow_degenerate=False):
    """Same classification reached through the roots of the cubic in u = k^2."""
    lam, C = float(lam), float(C)
    alpha, beta, gamma = cubic_roots(lam, C)
    if gamma <= 0:
        raise NoElasticaError(f"no positive curvature level for lambda={lam!r}, C={C!r}")
    k2 = gamma
    if _near(beta, gamma):
        return classify(lam, lam + 2.0, allow_degenerate)
    if abs(C) <= BOUNDARY_RTOL * max(1.0, (lam + 2.0) ** 2):
        return classify(lam, 2.0 * lam + 4.0, allow_degenerate)
    p = np.sqrt((gamma - beta) / (gamma - alpha))
    r = 0.5 * np.sqrt(gamma - alpha)
    case = Case.ORBITLIKE if C < 0 else Case.WAVELIKE
    return _finish(lam, k2, C, case, p, r, allow_degenerate)


# -- profiles -----------------------------------------------------------------

def curvature_profile(params, s):
    """Curvature and its arclength derivative, vertex at ``s = 0``."""
    s = np.asarray(s, dtype=float)
    k0 = params.kappa0
    if params.case is Case.CIRCULAR:
        return np.full_like(s, k0), np.zeros_like(s)
    r = params.r
    u = r * s
    if params.case is Case.ASYMPTOTIC:
        sech = 1.0 / np.cosh(u)
        return k0 * sech, -k0 * r * sech * np.tanh(u)
    j = elliptic.jacobi(u, params.p)
    if params.case is Case.ORBITLIKE:
        return k0 * j.dn, -k0 * r * params.p ** 2 * j.sn * j.cn
    return k0 * j.cn, -k0 * r * j.sn * j.dn


def once_integrated_residual(params, s):
    k, kp = curvature_profile(params, s)
    return kp**2 + k**4 / 4 - 0.5 * (params.lam + 2.0) * k**2 - params.C


def theta(params, s):
    """``k**2 - lam + 2i k'`` along the profile."""
    k, kp = curvature_profile(params, s)
    return k * k - params.lam + 2j * kp


def curvature_period(params):
    """Arclength period of the profile (None if aperiodic)."""
    if params.case is Case.ORBITLIKE:
        return 2.0 * elliptic.complete_K(params.p) / params.r
    if params.case is Case.WAVELIKE:
        return 4.0 * elliptic.complete_K(params.p) / params.r
    return None


# -- Killing data -------------------------------------------------------------

def killing_branches(params, y):
    """Both solutions (a, c) of the Killing constraints at start height ``y``."""
    if params.case is Case.CIRCULAR:
        raise DomainError("constant-curvature elastica have no reduced Killing data")
    if not y > 0:
        raise DomainError("start height y must be positive")
    q = params.kappa0_sq - params.lam
    k0 = params.kappa0
    out = []
    for sign in (1.0, -1.0):
        a = (-q + sign * 2.0 * k0) / (2.0 * y)
        c = a * y * y + q * y
        out.append(KillingParams(float(a), float(c), float(y)))
    return tuple(out)


def killing_params(params, y):
    """Killing data of the elastica starting at ``iy`` heading in +x with curvature +kappa0."""
    return killing_branches(params, y)[0]


def killing_field_eval(kp, pt):
    """Field a*(x^2 - y^2, 2xy) + c*(1, 0) at an HPoint or at arrays ``(x, y)``."""
    if isinstance(pt, HPoint):
        x, y = pt.x, pt.y
    else:
        x, y = (np.asarray(v, dtype=float) for v in pt)
        if np.any(y <= 0):
            raise DomainError("points must lie in the upper half-plane")
    return (kp.a * (x * x - y * y) + kp.c, 2.0 * kp.a * x * y)


# -- uniformizing map ---------------------------------------------------------

def _tan(u):
    # tan of complex argument with the real part reduced modulo pi
    x = np.mod(u.real + 0.5 * np.pi, np.pi) - 0.5 * np.pi
    y2 = np.clip(2.0 * u.imag, -700.0, 700.0)
    den = np.cos(2.0 * x) + np.cosh(y2)
    return (np.sin(2.0 * x) + 1j * np.sinh(y2)) / den


def _tanh(u):
    return -1j * _tan(1j * u)


def _cot(u):
    return _tan(0.5 * np.pi - u)


class _Uniformizer:
    """The map f with f' = a f**2 + c and f(z1) = iy."""

    def __init__(self, kp):
        a, c, y = kp.a, kp.c, kp.y
        self.a, self.c = a, c
        kind = kp.kind
        if kind == "horocyclical":
            if abs(a) * y <= abs(c) / y:
                self.mode = "linear"
                self.z1 = 1j * y / c
            else:
                self.mode = "inverse"
                self.z1 = 1j / (a * y)
        elif kind == "rotational":
            self.q = np.sqrt(c / a)
            self.w = np.sqrt(a * c)
            if a > 0:
                if y >= self.q:
                    raise DomainError("start point on or above the Killing zero")
                self.mode = "tan"
                self.z1 = 1j * np.arctanh(y / self.q) / self.w
            else:
                if y <= self.q:
                    raise DomainError("start point on or below the Killing zero")
                self.mode = "cot"
                self.z1 = -1j * np.arctanh(self.q / y) / self.w
        else:
            self.q = np.sqrt(-c / a)
            self.w = np.sqrt(-a * c)
            self.sign = np.sign(c)
            self.mode = "tanh"
            self.z1 = 1j * np.arctan(self.sign * y / self.q) / self.w

    def __call__(self, z):
        if self.mode == "linear":
            return self.c * z
        if self.mode == "inverse":
            return -1.0 / (self.a * z)
        u = self.w * z
        if self.mode == "tan":
            return self.q * _tan(u)
        if self.mode == "cot":
            return self.q * _cot(u)
        return self.sign * self.q * _tanh(u)


_GL_CACHE = {}


def _gl(n):
    if n not in _GL_CACHE:
        _GL_CACHE[n] = np.polynomial.legendre.leggauss(n)
    return _GL_CACHE[n]


def _panel_integrals(params, lo, hi, panels, nodes=8):
    """Integral of 1/theta over each [lo_k, hi_k] using ``panels`` GL panels."""
    x, w = _gl(nodes)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    width = (hi - lo) / panels
    total = np.zeros(lo.shape, dtype=complex)
    for j in range(panels):
        a = lo + j * width
        mid = a + 0.5 * width
        s = mid[..., None] + 0.5 * width[..., None] * x
        total += 0.5 * width * np.sum(w / theta(params, s), axis=-1)
    return total


def _adaptive_panels(params, lo, hi, tol=1e-10):
    panels = 1
    prev = _panel_integrals(params, lo, hi, panels)
    while panels < 1024:
        panels *= 2
        cur = _panel_integrals(params, lo, hi, panels)
        # relative once |z| is large: 1/theta grows without bound when lambda^2 + 4C = 0
        if np.all(np.abs(cur - prev) < tol * np.maximum(1.0, np.abs(cur))):
            return cur
        prev = cur
    raise CertificationError("quadrature of 1/theta did not converge")


def uniformizing_coordinate(params, s, tol=1e-10):
    """``z(s) - z1`` i.e. the integral of 1/theta from 0 to each ``s`` (sorted)."""
    s = np.asarray(s, dtype=float)
    if np.any(np.diff(s) <= 0):
        raise DomainError("s grid must be strictly increasing")
    head = s[0]
    # integral from 0 to s[0], split into steps no wider than the grid spacing
    step = (s[-1] - s[0]) / max(s.size - 1, 1) if s.size > 1 else 1.0
    m = max(1, int(np.ceil(abs(head) / step)))
    edges = np.linspace(0.0, head, m + 1)
    if head >= 0:
        z0 = np.sum(_adaptive_panels(params, edges[:-1], edges[1:], tol))
    else:
        z0 = -np.sum(_adaptive_panels(params, edges[1:], edges[:-1], tol))
    parts = _adaptive_panels(params, s[:-1], s[1:], tol)
    return z0 + np.concatenate([[0.0], np.cumsum(parts)])


def _check_sampleable(params):
    if params.case is Case.CIRCULAR:
        raise DomainError("use sample_circle for constant curvature")
    if "degenerate" in params.flags:
        raise DegenerateElasticaError("cannot sample on the degenerate locus")
    lo = params.lam**2 + 4.0 * params.C
    if params.case is Case.ORBITLIKE:
        bad = lo + 4.0 * params.kappa0_sq * (1 - params.p**2) <= 0
    elif params.case is Case.ASYMPTOTIC:
        # the curvature only tends to zero, so theta stays away from 0 on finite windows
        bad = lo < 0
    else:
        bad = lo <= 0
    if bad:
        raise DegenerateElasticaError("theta vanishes along the profile")


def trace(params, kp, s):
    """Curve points ``gamma(s)`` as complex numbers (no certification)."""
    _check_sampleable(params)
    f = _Uniformizer(kp)
    return f(f.z1 + uniformizing_coordinate(params, s))


# central 8th-order first-derivative weights
_D8 = np.array([1 / 280, -4 / 105, 1 / 5, -4 / 5, 0.0, 4 / 5, -1 / 5, 4 / 105, -1 / 280])


def _uniform_step(s):
    s = np.asarray(s, dtype=float)
    if s.size < 8:
        raise DomainError("need at least 8 samples")
    h = (s[-1] - s[0]) / (s.size - 1)
    if np.max(np.abs(np.diff(s) - h)) > 1e-9 * max(abs(h), 1.0):
        raise DomainError("s grid must be uniform")
    return h


@dataclass(frozen=True)
class SampleReport:
    unit_speed: float
    killing: float
    curvature: float
    closure: float
    closed: bool
    tangent: float = 0.0


def certify(params, kp, s_grid, closed=None, order=2):
    """Trace the curve on ``s_grid`` and measure its three residuals.

    Returns ``(points, report)``. The derivative used for the unit-speed and
    Killing residuals is an 8th-order difference of the samples themselves.
    """
    s = np.asarray(s_grid, dtype=float)
    h = _uniform_step(s)
    ext = np.concatenate([s[0] + h * np.arange(-4, 0), s, s[-1] + h * np.arange(1, 6)])
    g_ext = trace(params, kp, ext)
    g = g_ext[4:-5]
    g_next = g_ext[-5]
    dg = np.zeros(s.size, dtype=complex)
    for k, wk in enumerate(_D8):
        if wk:
            dg += wk * g_ext[k:k + s.size]
    dg /= h
    speed = np.abs(dg) / g.imag
    unit = float(np.max(np.abs(speed - 1.0)))
    k, kprime = curvature_profile(params, s)
    th = k * k - params.lam + 2j * kprime
    kill = float(np.max(np.abs(th * dg - (kp.a * g * g + kp.c)) / g.imag))
    closure = float(hyperbolic_distance(g_next, g[0]))
    # unit tangents (Euclidean direction scaled by 1/y) from the Killing identity
    k_end, kp_end = curvature_profile(params, np.array([s[-1] + h]))
    th_end = k_end[0] ** 2 - params.lam + 2j * kp_end[0]
    t_end = (kp.a * g_next * g_next + kp.c) / th_end / g_next.imag
    t_start = (kp.a * g[0] * g[0] + kp.c) / th[0] / g[0].imag
    tangent = float(abs(t_end - t_start))
    if closed is None:
        closed = closure < 1e-6
    curve = SampledCurve.from_complex(g, param=ARCLENGTH,
                                      period_hint=h * s.size if closed else None, closed=closed)
    kd = hyperbolic_curvature(curve, order=order)
    if closed:
        curv = float(np.max(np.abs(kd - k)))
    else:
        curv = float(np.max(np.abs(kd - k)[2:-2]))
    return curve, SampleReport(unit, kill, curv, closure, bool(closed), tangent)


def sample_curve(params, kp, s_grid, closed=None, strict=True):
    """Sampled elastica from its closed-form representation.

    Raises NotAnElasticaError when the representation fails the unit-speed
    test, and CertificationError (only with ``strict``) when any residual
    misses its tolerance.
    """
    curve, rep = certify(params, kp, s_grid, closed)
    if rep.unit_speed > 1e-3:
        raise NotAnElasticaError(f"unit-speed residual {rep.unit_speed:.3g} exceeds 1e-3")
    if strict and (rep.unit_speed > 1e-6 or rep.killing > 1e-6):
        raise CertificationError(
            f"residuals unit-speed={rep.unit_speed:.3g}, killing={rep.killing:.3g} exceed 1e-6")
    return curve


def circle_geometry(params, y):
    """Hyperbolic radius and Euclidean centre height of the circular elastica whose lowest point is iy."""
    if params.case is not Case.CIRCULAR:
        raise DomainError("not a circular elastica")
    k = params.kappa0
    if k <= 1:
        raise NoElasticaError("closed constant-curvature curves need kappa > 1")
    rho = np.arctanh(1.0 / k)
    return rho, y * np.exp(rho) * np.cosh(rho)


def sample_circle(params, y, s_grid):
    """Circular elastica through ``iy`` at its lowest point, counter-clockwise."""
    rho, _ = circle_geometry(params, y)
    s = np.asarray(s_grid, dtype=float)
    t = np.tanh(rho / 2.0)
    w = t * np.exp(1j * (np.pi + s / np.sinh(rho)))
    z = y * np.exp(rho) * 1j * (1 + w) / (1 - w)
    L = 2.0 * np.pi * np.sinh(rho)
    h = (s[-1] - s[0]) / (s.size - 1)
    closed = abs(h * s.size - L) < 1e-9 * L
    return SampledCurve.from_complex(z, param=ARCLENGTH, period_hint=L if closed else None,
                                     closed=closed)


def clifford_start_height():
    """Start height that puts the lambda = 0 circle at centre (0, 1), radius 1/sqrt(2)."""
    return 1.0 - 1.0 / np.sqrt(2.0)
