"""L2-gradient flow of the elastic energy for closed curves in the upper half-plane.

The curve is stored as N samples of a periodic map u -> X(u), u in [0, 1).
Derivatives are spectral. Each step moves the samples along the hyperbolic
unit normal by a scalar displacement w solved from

    (1 + dt * sigma * k^4) w_hat = -dt * V_hat,

which treats a frozen-coefficient fourth-order term implicitly and the rest
of the velocity V = 2 k_ss + k^3 - (2 + lam) k explicitly. Steps that raise
the energy are rejected and retried with half the step.
"""

import csv
import logging
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
from scipy.integrate import solve_ivp

from . import hypgeo
from .errors import CurveError, DomainError, ModelBreakdownError, StiffnessError

log = logging.getLogger(__name__)

ENERGY_RTOL = 1e-12
DT_FLOOR = 1e-14
REPARAM_EVERY = 25
REPARAM_UNIFORMITY = 0.05
MAX_MOVE = 0.25
GROW_AFTER = 10
Y_RATIO_SENTINEL = 1e6
DIAGNOSTIC_FIELDS = ("t", "energy", "length", "ratio", "turning", "min_y", "max_kappa")


# -- spectral geometry --------------------------------------------------------

def _wavenumbers(n):
    k = 2.0 * np.pi * np.fft.fftfreq(n, d=1.0 / n)
    if n % 2 == 0:
        k[n // 2] = 0.0
    return k


@lru_cache(maxsize=16)
def _filter(n, strength=36.0, order=36):
    # exponential filter: identity on the lower two thirds of the spectrum
    eta = np.abs(np.fft.fftfreq(n, d=1.0 / n)) / (n / 2)
    return np.exp(-strength * eta**order)


def _smooth(z):
    return np.fft.ifft(np.fft.fft(z) * _filter(z.size))


def _du(f, k):
    return np.fft.ifft(1j * k * np.fft.fft(f))


@dataclass(frozen=True)
class _Geometry:
    z: np.ndarray
    speed: np.ndarray      # |X_u|
    tangent: np.ndarray    # unit Euclidean tangent, complex
    ds: np.ndarray         # hyperbolic length element per unit u
    kappa: np.ndarray      # hyperbolic curvature


def _geometry(z):
    z = np.asarray(z, dtype=complex)
    k = _wavenumbers(z.size)
    zu = _du(z, k)
    zuu = _du(zu, k)
    speed = np.abs(zu)
    if np.min(speed) <= 1e-12 * max(np.max(speed), 1e-300):
        raise CurveError("curve parametrization degenerates (zero speed)")
    y = z.imag
    tangent = zu / speed
    kappa_e = np.imag(np.conj(zu) * zuu) / speed**3
    return _Geometry(z, speed, tangent, speed / y, y * kappa_e + tangent.real)


def flow_energy(z, lam=0.0):
    """Spectrally accurate E_lam = integral of (kappa^2 + lam) ds."""
    g = _geometry(z)
    return float(np.mean((g.kappa**2 + lam) * g.ds))


def flow_length(z):
    return float(np.mean(_geometry(z).ds))


def _velocity(g, lam):
    k = _wavenumbers(g.z.size)
    d_s = 1.0 / g.ds
    ks = np.real(_du(g.kappa, k)) * d_s
    kss = np.real(_du(ks, k)) * d_s
    return 2.0 * kss + g.kappa**3 - (2.0 + lam) * g.kappa


def _uniformity(g):
    return float(np.max(np.abs(g.ds / np.mean(g.ds) - 1.0)))


def resolution_noise(curve):
    """Size of the part of 2 k_ss carried by the top half of the resolved spectrum.

    For a resolved curve this is at round-off level; when it is not, it is
    a direct estimate of the stencil noise in the velocity.
    """
    g = _geometry(curve.z)
    n = g.z.size
    k = _wavenumbers(n)
    d_s = 1.0 / g.ds
    kss = np.real(_du(np.real(_du(g.kappa, k)) * d_s, k)) * d_s
    high = np.abs(np.fft.fftfreq(n, d=1.0 / n)) > n / 4
    tail = np.fft.ifft(np.where(high, np.fft.fft(2.0 * kss), 0.0))
    return float(np.max(np.abs(tail)))


def gradient(curve, lam=0.0, check_uniform=True, check_resolution=True):
    """Normal velocity V = 2 k_ss + k^3 - (2 + lam) k at the samples.

    The flow moves each sample by -V along the hyperbolic unit normal.
    Raises CurveError when the sampling is too coarse for V to mean anything,
    i.e. when the high-frequency part of 2 k_ss exceeds a tenth of max(|V|, 1).
    """
    g = _geometry(curve.z)
    if check_uniform and _uniformity(g) > 0.2:
        raise CurveError("hyperbolic speed deviates more than 20% from uniform; reparametrize first")
    V = _velocity(g, lam)
    if check_resolution:
        noise = resolution_noise(curve)
        if noise > 0.1 * max(float(np.max(np.abs(V))), 1.0):
            raise CurveError(f"curve under-resolved at N={g.z.size}: spectral tail {noise:.3g} "
                             "in the velocity; use more samples")
    return V


def normal_field(z):
    """Hyperbolic unit normal i*T scaled by y, as complex numbers."""
    g = _geometry(z)
    return 1j * g.tangent * g.z.imag


def l2_inner(curve, f, h):
    """Discrete L2(ds) inner product of two functions sampled on the curve."""
    g = _geometry(curve.z)
    return float(np.mean(f * h * g.ds))


# -- reparametrization --------------------------------------------------------

def _fourier_eval(coef, u):
    n = coef.size
    m = np.fft.fftfreq(n, d=1.0 / n)
    if n % 2 == 0:
        # split the Nyquist mode between +n/2 and -n/2 so real data stays real
        m = np.append(m, n // 2)
        coef = np.append(coef, coef[n // 2] / 2.0)
        coef[n // 2] /= 2.0
    return np.exp(2j * np.pi * np.outer(u, m)) @ coef / n


def _zero_pad(coef, m):
    """Samples of the trigonometric interpolant on a finer uniform grid of m points."""
    n = coef.size
    fine = np.zeros(m, dtype=complex)
    if n % 2 == 0:
        h = n // 2
        fine[:h] = coef[:h]
        fine[m - h + 1:] = coef[h + 1:]
        fine[h] = fine[m - h] = coef[h] / 2.0
    else:
        h = (n - 1) // 2
        fine[:h + 1] = coef[:h + 1]
        fine[m - h:] = coef[n - h:]
    return np.fft.ifft(fine) * (m / n)


def reparametrize(z, upsample=2, newton=8):
    """Resample the same closed curve uniformly in hyperbolic arclength.

    The arclength s(u) is built as an exact Fourier antiderivative of the
    (oversampled) length element, and s(u) = target is solved by Newton.
    """
    z = np.asarray(z, dtype=complex)
    n = z.size
    coef = np.fft.fft(z)
    fine_n = upsample * n
    dsf = _geometry(_zero_pad(coef, fine_n)).ds
    d_hat = np.fft.fft(dsf) / fine_n
    m = np.fft.fftfreq(fine_n, d=1.0 / fine_n)
    mean = d_hat[0].real
    nz = m != 0
    s_hat = np.zeros_like(d_hat)
    s_hat[nz] = d_hat[nz] / (2j * np.pi * m[nz])

    def s_of(u):
        e = np.exp(2j * np.pi * np.outer(u, m))
        return mean * u + np.real(e @ s_hat - s_hat.sum()), np.real(e @ d_hat)

    targets = np.arange(n) / n
    u = targets.copy()
    for _ in range(newton):
        s_u, ds_u = s_of(u)
        step_u = (s_u / mean - targets) / (ds_u / mean)
        u = u - step_u
        if np.max(np.abs(step_u)) < 1e-15:
            break
    return _fourier_eval(coef, u)


# -- state and stepping -------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FlowState:
    curve: hypgeo.SampledCurve
    time: float = 0.0
    dt: float = 1e-4
    lam: float = 0.0
    step_count: int = 0
    dt_max: float = 2e-3
    streak: int = 0
    energy: float = field(default=float("nan"))

    def __post_init__(self):
        if not self.time >= 0.0:
            raise DomainError("time must be non-negative")
        if not self.dt > 0.0:
            raise DomainError("dt must be positive")
        if np.isnan(self.energy):
            object.__setattr__(self, "energy", flow_energy(self.curve.z, self.lam))


def initial_state(curve, lam=0.0, dt=1e-4, dt_max=2e-3):
    z = reparametrize(curve.z)
    c = hypgeo.SampledCurve.from_complex(z, param=hypgeo.UNIFORM)
    return FlowState(c, 0.0, dt, lam, 0, dt_max)


def _trial(z, dt, lam):
    g = _geometry(z)
    V = _velocity(g, lam)
    k = _wavenumbers(z.size)
    sigma = 2.0 * np.max((1.0 / g.ds) ** 4)
    w_hat = np.fft.fft(-dt * V) / (1.0 + dt * sigma * k**4)
    if z.size % 2 == 0:
        # the Nyquist mode has no derivative to damp it, so it is never moved
        w_hat[z.size // 2] = 0.0
    w = np.real(np.fft.ifft(w_hat))
    # largest normal move measured in sample spacings
    move = float(np.max(np.abs(w)) / np.mean(g.ds / z.size))
    return _smooth(z + w * 1j * g.tangent * z.imag), move


def step(state):
    """One accepted step (with internal retries); returns the new state."""
    z = state.curve.z
    E0 = state.energy
    dt = state.dt
    while True:
        if dt < DT_FLOOR:
            raise StiffnessError(f"time step fell below {DT_FLOOR:g} at t={state.time:.6g}", state)
        z_new, move = _trial(z, dt, state.lam)
        if move > MAX_MOVE or np.any(~np.isfinite(z_new)):
            dt *= 0.5
            continue
        if np.any(z_new.imag <= 0.0):
            if dt <= 4 * DT_FLOOR:
                raise ModelBreakdownError(f"sample left the upper half-plane at t={state.time:.6g}",
                                          state)
            dt *= 0.5
            continue
        try:
            E1 = flow_energy(z_new, state.lam)
        except CurveError:
            dt *= 0.5
            continue
        if E1 - E0 > ENERGY_RTOL * (1.0 + abs(E0)):
            dt *= 0.5
            continue
        break
    t_new = state.time + dt
    count = state.step_count + 1
    streak = state.streak + 1 if dt == state.dt else 1
    next_dt = dt
    if streak >= GROW_AFTER:
        next_dt = min(1.5 * dt, state.dt_max)
        streak = 0
    if count % REPARAM_EVERY == 0 or _uniformity(_geometry(z_new)) > REPARAM_UNIFORMITY:
        z_re = _smooth(reparametrize(z_new))
        E_re = flow_energy(z_re, state.lam)
        if E_re - E1 <= ENERGY_RTOL * (1.0 + abs(E1)):
            z_new, E1 = z_re, E_re
    curve = hypgeo.SampledCurve.from_complex(z_new, param=hypgeo.UNIFORM)
    return FlowState(curve, t_new, next_dt, state.lam, count, state.dt_max, streak, E1)


# -- diagnostics --------------------------------------------------------------

@dataclass
class FlowDiagnostics:
    samples: list = field(default_factory=list)
    stop_reason: str = ""
    final_state: FlowState | None = None

    def column(self, name):
        i = DIAGNOSTIC_FIELDS.index(name)
        return np.array([row[i] for row in self.samples])

    def write_csv(self, path):
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(DIAGNOSTIC_FIELDS)
            for row in self.samples:
                w.writerow([f"{v:.17g}" if isinstance(v, float) else v for v in row])


def diagnose(state):
    z = state.curve.z
    g = _geometry(z)
    L = float(np.mean(g.ds))
    E = state.energy
    return (float(state.time), float(E), L, float(E / L), int(hypgeo.turning_number(state.curve)),
            float(np.min(z.imag)), float(np.max(np.abs(g.kappa))))


def evolve(state, t_end, sample_every=10, snapshot=None, snapshot_every=0):
    """Step until ``t_end`` (or the blow-up sentinel); returns FlowDiagnostics.

    ``snapshot(state)`` is called every ``snapshot_every`` accepted steps when given.
    """
    diag = FlowDiagnostics()
    diag.samples.append(diagnose(state))
    T0 = diag.samples[0][4]
    while state.time < t_end:
        if state.time + state.dt > t_end:
            state = replace(state, dt=max(t_end - state.time, DT_FLOOR))
        state = step(state)
        last = state.time >= t_end
        if state.step_count % sample_every == 0 or last:
            row = diagnose(state)
            diag.samples.append(row)
            if row[4] != T0:
                log.warning("turning number changed from %d to %d at t=%g", T0, row[4], row[0])
        if snapshot is not None and snapshot_every and state.step_count % snapshot_every == 0:
            snapshot(state)
        y = state.curve.y
        if np.max(y) / np.min(y) > Y_RATIO_SENTINEL:
            if diag.samples[-1][0] != state.time:
                diag.samples.append(diagnose(state))
            diag.stop_reason = "blow-up sentinel"
            break
    else:
        diag.stop_reason = "t_end"
    diag.final_state = state
    return diag


# -- circle oracle ------------------------------------------------------------

def circle_rate(rho, lam=0.0):
    """Radius rate of a geodesic circle under the flow."""
    c = 1.0 / np.tanh(rho)
    return c * (c * c - 2.0 - lam)


@lru_cache(maxsize=None)
def verify_circle_rate(samples=1000, seed=0):
    """Check the radius rate against minus the derivative of the circle energy over its length."""
    import sympy as sp

    rho, lam = sp.symbols("rho lam", positive=True)
    E = (sp.coth(rho) ** 2 + lam) * 2 * sp.pi * sp.sinh(rho)
    rate = -sp.diff(E, rho) / (2 * sp.pi * sp.sinh(rho))
    f = sp.lambdify((rho, lam), rate, "numpy")
    rng = np.random.default_rng(seed)
    r = rng.uniform(0.05, 5.0, samples)
    lm = rng.uniform(-0.9, 2.0, samples)
    err = np.max(np.abs(f(r, lm) - circle_rate(r, lm)) / (1.0 + np.abs(circle_rate(r, lm))))
    if err > 1e-10:
        raise AssertionError(f"circle rate disagrees with the energy gradient by {err:.3g}")
    return float(err)


def circle_ode_oracle(rho0, lam, t_grid):
    """Geodesic radius of a circle evolving under the flow, at the times in ``t_grid``."""
    if not rho0 > 0:
        raise DomainError("rho0 must be positive")
    verify_circle_rate()
    t = np.asarray(t_grid, dtype=float)
    sol = solve_ivp(lambda _, r: circle_rate(r, lam), (0.0, float(t.max())), [rho0],
                    method="DOP853", t_eval=t, rtol=1e-10, atol=1e-12)
    if not sol.success:
        raise DomainError(sol.message)
    return sol.y[0]


def circle_radius(curve):
    """Geodesic radius of a circle with the same hyperbolic length."""
    return float(np.arcsinh(flow_length(curve.z) / (2.0 * np.pi)))


# -- initial data -------------------------------------------------------------

def make_zero_turning_curve(style="lemniscate", scale=1.0, n=512, lam_fe=0.1):
    """Closed curve with turning number 0, lying in y >= scale."""
    if not scale > 0:
        raise DomainError("scale must be positive")
    if style == "lemniscate":
        return hypgeo.lemniscate(2.0 * scale, 2.0 * scale, n)
    if style == "elastic-figure-eight":
        from .closing import solve_figure_eight

        rec = solve_figure_eight(lam_fe, y=scale, N=n)
        return rec.curve
    raise DomainError(f"unknown style {style!r}")


# -- shape comparison ---------------------------------------------------------

def normalize_lowest(z, refine=64):
    """Dilate and translate horizontally so the lowest point sits at (0, 1).

    The lowest point is located on the trigonometric interpolant of the samples.
    """
    z = np.asarray(z, dtype=complex)
    fine = _zero_pad(np.fft.fft(z), refine * z.size)
    low = fine[int(np.argmin(fine.imag))]
    return (z - low.real) / low.imag


def hausdorff(a, b, points=1 << 15):
    """Euclidean Hausdorff distance between two closed smooth curves given by samples.

    Both are densified by trigonometric interpolation before the nearest-point search.
    """
    from scipy.spatial import cKDTree

    def dense(z):
        z = np.asarray(z, dtype=complex)
        m = max(z.size, points)
        d = _zero_pad(np.fft.fft(z), m)
        return np.column_stack([d.real, d.imag])

    pa, pb = dense(a), dense(b)
    da, _ = cKDTree(pb).query(pa)
    db, _ = cKDTree(pa).query(pb)
    return float(max(da.max(), db.max()))


def clifford_curve(n=2048):
    t = 2.0 * np.pi * np.arange(n) / n
    return 1j + np.exp(1j * t) / np.sqrt(2.0)
