"""Discrete curves in the upper half-plane model of the hyperbolic plane.

Points are stored as Euclidean coordinates ``(x, y)`` with ``y > 0``.
Curvature is signed with respect to the normal obtained by rotating the
unit tangent by +90 degrees, so a counter-clockwise Euclidean circle has
positive curvature.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import AmbiguousTurningNumber, CurveError, DomainError

UNIFORM = "uniform-parameter"
ARCLENGTH = "hyperbolic-arclength"


@dataclass(frozen=True)
class HPoint:
    x: float
    y: float

    def __post_init__(self):
        if not (np.isfinite(self.x) and np.isfinite(self.y)) or self.y <= 0:
            raise DomainError(f"point ({self.x}, {self.y}) is not in the upper half-plane")

    @property
    def z(self):
        return complex(self.x, self.y)


@dataclass(frozen=True, eq=False)
class SampledCurve:
    """Samples of a curve; closed (periodic) unless ``closed=False``.

    ``period_hint`` is the hyperbolic length when the samples are spaced
    uniformly in hyperbolic arclength.
    """

    x: np.ndarray
    y: np.ndarray
    param: str = UNIFORM
    period_hint: float | None = None
    closed: bool = True
    _z: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        y = np.array(self.y, dtype=float)
        if x.ndim != 1 or x.shape != y.shape:
            raise CurveError("x and y must be 1-d arrays of equal length")
        if x.size < 8:
            raise CurveError(f"need at least 8 samples, got {x.size}")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise CurveError("non-finite sample")
        if np.any(y <= 0):
            raise CurveError("sample with y <= 0 is outside the upper half-plane")
        if self.param not in (UNIFORM, ARCLENGTH):
            raise CurveError(f"unknown parametrization tag {self.param!r}")
        dz = np.hypot(np.diff(x), np.diff(y))
        if self.closed:
            dz = np.append(dz, np.hypot(x[0] - x[-1], y[0] - y[-1]))
        if np.any(dz <= 0):
            raise CurveError("consecutive samples coincide")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        z = x + 1j * y
        z.setflags(write=False)
        object.__setattr__(self, "_z", z)

    @classmethod
    def from_complex(cls, z, **kw):
        z = np.asarray(z)
        return cls(z.real, z.imag, **kw)

    @property
    def z(self):
        return self._z

    @property
    def n(self):
        return self.x.size

    def __len__(self):
        return self.x.size

    def points(self):
        return [HPoint(float(a), float(b)) for a, b in zip(self.x, self.y)]

    def scaled(self, s):
        """Euclidean dilation about the origin (an isometry)."""
        hint = self.period_hint
        return SampledCurve(s * self.x, s * self.y, self.param, hint, self.closed)


# -- finite differences -------------------------------------------------------

_CENTRAL = {
    2: ([-0.5, 0.0, 0.5], [1.0, -2.0, 1.0]),
    4: ([1 / 12, -2 / 3, 0.0, 2 / 3, -1 / 12], [-1 / 12, 4 / 3, -5 / 2, 4 / 3, -1 / 12]),
}


def _periodic_derivs(f, h, order):
    w1, w2 = _CENTRAL[order]
    half = len(w1) // 2
    d1 = np.zeros_like(f)
    d2 = np.zeros_like(f)
    for k, (a, b) in enumerate(zip(w1, w2)):
        shifted = np.roll(f, half - k)
        d1 += a * shifted
        d2 += b * shifted
    return d1 / h, d2 / (h * h)


def _open_derivs(f, h):
    d1 = np.gradient(f, h, edge_order=2)
    d2 = np.empty_like(f)
    d2[1:-1] = (f[2:] - 2 * f[1:-1] + f[:-2]) / (h * h)
    d2[0] = (2 * f[0] - 5 * f[1] + 4 * f[2] - f[3]) / (h * h)
    d2[-1] = (2 * f[-1] - 5 * f[-2] + 4 * f[-3] - f[-4]) / (h * h)
    return d1, d2


def parameter_derivatives(curve, order=2):
    """First and second derivatives of x and y in a unit-spaced parameter."""
    if order not in _CENTRAL:
        raise DomainError(f"supported difference orders are {sorted(_CENTRAL)}")
    h = 1.0
    if curve.closed:
        x1, x2 = _periodic_derivs(curve.x, h, order)
        y1, y2 = _periodic_derivs(curve.y, h, order)
    else:
        x1, x2 = _open_derivs(curve.x, h)
        y1, y2 = _open_derivs(curve.y, h)
    speed = np.hypot(x1, y1)
    if np.any(speed <= 1e-14 * (np.max(speed) + 1e-300)):
        raise CurveError("degenerate segment: parameter speed vanishes")
    return x1, y1, x2, y2


def hyperbolic_curvature(curve, order=2):
    """Signed hyperbolic curvature at each sample.

    Builds the covariant acceleration of the arclength reparametrization
    and projects it on the unit normal.
    """
    x1, y1, x2, y2 = parameter_derivatives(curve, order)
    y = curve.y
    sp = np.hypot(x1, y1)
    w = y / sp
    # derivative of w = y / |gamma'| along the parameter
    w1 = y1 / sp - y * (x1 * x2 + y1 * y2) / sp**3
    gs1, gs2 = w * x1, w * y1
    gss1 = w * (w1 * x1 + w * x2)
    gss2 = w * (w1 * y1 + w * y2)
    k1 = gss1 - 2.0 / y * gs1 * gs2
    k2 = gss2 + (gs1 * gs1 - gs2 * gs2) / y
    n1, n2 = -y1 / sp, x1 / sp
    return (k1 * n1 + k2 * n2) / y


def _weights(curve, order=2):
    x1, y1, _, _ = parameter_derivatives(curve, order)
    ds = np.hypot(x1, y1) / curve.y
    if not curve.closed:
        ds = ds.copy()
        ds[0] *= 0.5
        ds[-1] *= 0.5
    return ds


def length(curve, order=2):
    return float(np.sum(_weights(curve, order)))


def energy(curve, lam=0.0, order=2):
    """Discrete integral of (kappa^2 + lambda) ds."""
    ds = _weights(curve, order)
    k = hyperbolic_curvature(curve, order)
    return float(np.sum((k * k + lam) * ds))


def hyperbolic_distance(z, w):
    z, w = np.asarray(z), np.asarray(w)
    return np.arccosh(1.0 + np.abs(z - w) ** 2 / (2.0 * z.imag * w.imag))


# -- Moebius maps -------------------------------------------------------------

@dataclass(frozen=True)
class MobiusMap:
    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        if abs(det - 1.0) > 1e-12 * max(1.0, abs(self.a * self.d), abs(self.b * self.c)):
            raise DomainError(f"Moebius determinant must be 1, got {det!r}")

    @classmethod
    def normalized(cls, a, b, c, d):
        det = a * d - b * c
        if det <= 0:
            raise DomainError("map must have positive determinant")
        s = 1.0 / np.sqrt(det)
        return cls(a * s, b * s, c * s, d * s)

    @classmethod
    def identity(cls):
        return cls(1.0, 0.0, 0.0, 1.0)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        den = self.c * z + self.d
        if np.any(np.abs(den) < 1e-300):
            raise DomainError("pole of the Moebius map hit")
        return (self.a * z + self.b) / den

    def derivative(self, z):
        return 1.0 / (self.c * np.asarray(z, dtype=complex) + self.d) ** 2

    def compose(self, other):
        """``self o other``."""
        a, b, c, d = self.a, self.b, self.c, self.d
        e, f, g, h = other.a, other.b, other.c, other.d
        return MobiusMap.normalized(a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)


def apply_mobius(mobius, curve):
    w = mobius(curve.z)
    if np.any(w.imag <= 0):
        raise CurveError("Moebius image left the upper half-plane")
    return SampledCurve(w.real, w.imag, curve.param, curve.period_hint, curve.closed)


def normalize_initial(z, v, y_target):
    """Isometry sending ``z`` to ``(0, y_target)`` and unit vector ``v`` to ``(y_target, 0)``."""
    if not isinstance(z, HPoint):
        z = HPoint(*z)
    if y_target <= 0:
        raise DomainError("y_target must be positive")
    v = complex(v[0], v[1])
    if abs(abs(v) / z.y - 1.0) > 1e-8:
        raise DomainError("v is not a unit vector in the hyperbolic metric")
    r = z.y
    # After translating z to ir we need (c*ir + d)^2 = v / y_target.
    w = np.sqrt(v / y_target)
    c = w.imag / r
    d = w.real
    det = d * d + r * r * c * c
    a = d / det
    b = -r * r * c / det
    x0 = z.x
    return MobiusMap.normalized(a, b - a * x0, c, d - c * x0)


# -- topology -----------------------------------------------------------------

def _edges(curve):
    z = curve.z
    if curve.closed:
        return np.roll(z, -1) - z
    return np.diff(z)


def turning_number(curve, tol=0.05):
    """Number of turns of the Euclidean tangent of the closed polygon.

    The exterior-angle sum of a closed polygon is always an integer, so the
    under-resolution alarm compares it with the smooth estimate
    (1/2pi) * sum Im(z''/z') du from periodic central differences.
    """
    if not curve.closed:
        raise CurveError("turning number needs a closed curve")
    e = _edges(curve)
    k = int(np.rint(np.sum(np.angle(np.roll(e, -1) / e)) / (2.0 * np.pi)))
    z = curve.z
    d1 = 0.5 * (np.roll(z, -1) - np.roll(z, 1))
    d2 = np.roll(z, -1) - 2.0 * z + np.roll(z, 1)
    smooth = float(np.sum((d2 / d1).imag)) / (2.0 * np.pi)
    if abs(smooth - k) >= tol:
        raise AmbiguousTurningNumber(
            f"polygon gives {k} turns but the smooth estimate is {smooth:.4f}; curve under-resolved")
    return k


def _orient(ax, ay, bx, by, cx, cy):
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def is_simple(curve, block=256):
    """True iff no two non-adjacent polygon edges meet."""
    x, y = curve.x, curve.y
    if curve.closed:
        x2, y2 = np.roll(x, -1), np.roll(y, -1)
        m = x.size
    else:
        x2, y2 = x[1:], y[1:]
        x, y = x[:-1], y[:-1]
        m = x.size
    xmin, xmax = np.minimum(x, x2), np.maximum(x, x2)
    ymin, ymax = np.minimum(y, y2), np.maximum(y, y2)
    idx = np.arange(m)
    for start in range(0, m, block):
        i = idx[start:start + block, None]
        j = idx[None, :]
        mask = j > i + 1
        if curve.closed:
            mask &= ~((i == 0) & (j == m - 1))
        bbox = (xmin[i] <= xmax[j]) & (xmin[j] <= xmax[i]) & (ymin[i] <= ymax[j]) & (ymin[j] <= ymax[i])
        mask &= bbox
        if not mask.any():
            continue
        ii, jj = np.nonzero(mask)
        ii = ii + start
        o1 = _orient(x[ii], y[ii], x2[ii], y2[ii], x[jj], y[jj])
        o2 = _orient(x[ii], y[ii], x2[ii], y2[ii], x2[jj], y2[jj])
        o3 = _orient(x[jj], y[jj], x2[jj], y2[jj], x[ii], y[ii])
        o4 = _orient(x[jj], y[jj], x2[jj], y2[jj], x2[ii], y2[ii])
        # touching or collinear overlaps count as intersections (bbox already overlaps)
        if np.any((o1 * o2 <= 0) & (o3 * o4 <= 0)):
            return False
    return True


# -- constructors used by tests and the command line --------------------------

def hyperbolic_circle(center_height, rho, n=512):
    """Circle of hyperbolic radius ``rho`` about ``(0, center_height)``.

    Sampled uniformly in hyperbolic arclength, counter-clockwise, starting
    at the lowest point.
    """
    t = np.tanh(rho / 2.0)
    psi = np.pi + 2.0 * np.pi * np.arange(n) / n
    w = t * np.exp(1j * psi)
    z = center_height * 1j * (1 + w) / (1 - w)
    return SampledCurve.from_complex(z, param=ARCLENGTH, period_hint=2 * np.pi * np.sinh(rho))


def euclidean_circle(center, radius, n=512, turns=1):
    th = -np.pi / 2 + 2.0 * np.pi * turns * np.arange(n) / n
    z = complex(*center) + radius * np.exp(1j * th)
    return SampledCurve.from_complex(z)


def lemniscate(width, height, n=512):
    """Bernoulli lemniscate of half-width ``width`` centred at ``(0, height)``."""
    t = 2.0 * np.pi * np.arange(n) / n
    den = 1.0 + np.sin(t) ** 2
    x = width * np.cos(t) / den
    y = height + width * np.sin(t) * np.cos(t) / den
    return SampledCurve(x, y)


# -- CSV ----------------------------------------------------------------------

def write_curve_csv(path, curve, t=None):
    """Write ``t,x,y`` rows with 17 significant digits."""
    if t is None:
        if curve.param == ARCLENGTH and curve.period_hint:
            t = curve.period_hint * np.arange(curve.n) / curve.n
        else:
            t = np.arange(curve.n) / curve.n
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("t,x,y\n")
        for a, b, c in zip(t, curve.x, curve.y):
            fh.write(f"{a:.17g},{b:.17g},{c:.17g}\n")


def read_curve_csv(path, param=UNIFORM, closed=True):
    try:
        with open(path, encoding="utf-8") as fh:
            header = fh.readline().strip()
            if header != "t,x,y":
                raise CurveError(f"{path}: expected header 't,x,y', got {header!r}")
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
    except (OSError, ValueError) as exc:
        if isinstance(exc, CurveError):
            raise
        raise CurveError(f"{path}: {exc}") from exc
    if data.shape[1] != 3 or data.shape[0] < 4:
        raise CurveError(f"{path}: need at least 4 rows of t,x,y")
    if np.any(data[:, 2] <= 0):
        raise CurveError(f"{path}: sample with y <= 0")
    return SampledCurve(data[:, 1], data[:, 2], param=param, closed=closed)
