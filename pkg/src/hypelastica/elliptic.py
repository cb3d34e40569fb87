"""Jacobi elliptic functions and elliptic integrals of real argument.

The modulus is ``p`` (not the parameter ``m = p**2``). All routines accept
``p = 0`` exactly and reject ``p`` outside ``[0, 1)``.

K and E come from the arithmetic-geometric mean, the amplitude from the
descending Landen sequence, and the incomplete integral of the first kind
from Carlson's symmetric form R_F.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

P_MAX = 1.0 - 1e-12
_EPS = 1e-16


def check_modulus(p):
    """Return ``p`` as a float after checking 0 <= p < 1."""
    p = float(p)
    if not np.isfinite(p) or p < 0.0 or p >= 1.0:
        raise DomainError(f"elliptic modulus must lie in [0, 1), got {p!r}")
    return p


def clamp_modulus(p):
    """Clamp ``p`` to ``[0, P_MAX]``; returns ``(p, clamped)``."""
    p = float(p)
    if p > P_MAX:
        return P_MAX, True
    if p < 0.0:
        return 0.0, True
    return p, False


def _agm_sequence(p):
    # a_n, b_n, c_n of the descending sequence with c_0 = p.
    a, b, c = 1.0, np.sqrt((1.0 - p) * (1.0 + p)), p
    a_s, c_s = [a], [c]
    while c > _EPS * a:
        a_next = 0.5 * (a + b)
        c = 0.25 * c * c / a_next
        b = np.sqrt(a * b)
        a = a_next
        a_s.append(a)
        c_s.append(c)
        if len(a_s) > 64:
            break
    return a_s, c_s


def complete_K(p):
    """Complete elliptic integral of the first kind."""
    p = check_modulus(p)
    a_s, _ = _agm_sequence(p)
    return np.pi / (2.0 * a_s[-1])


def complete_E(p):
    """Complete elliptic integral of the second kind."""
    p = check_modulus(p)
    a_s, c_s = _agm_sequence(p)
    s = 0.5 * c_s[0] ** 2
    for n in range(1, len(c_s)):
        s += 2.0 ** (n - 1) * c_s[n] ** 2
    return np.pi / (2.0 * a_s[-1]) * (1.0 - s)


def complete_KE(p):
    """Both complete integrals from one AGM run."""
    p = check_modulus(p)
    a_s, c_s = _agm_sequence(p)
    K = np.pi / (2.0 * a_s[-1])
    s = 0.5 * c_s[0] ** 2
    for n in range(1, len(c_s)):
        s += 2.0 ** (n - 1) * c_s[n] ** 2
    return K, K * (1.0 - s)


@dataclass(frozen=True)
class JacobiTriple:
    sn: np.ndarray
    cn: np.ndarray
    dn: np.ndarray
    am: np.ndarray


def _amplitude_reduced(x, p, a_s, c_s):
    # Landen descent, valid for |x| <= K
    N = len(a_s) - 1
    phi = (2.0 ** N) * a_s[N] * x
    for n in range(N, 0, -1):
        phi = 0.5 * (phi + np.arcsin(c_s[n] / a_s[n] * np.sin(phi)))
    return phi


def jacobi(x, p):
    """Amplitude and sn, cn, dn at real ``x`` (scalar or array)."""
    p = check_modulus(p)
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise DomainError("jacobi argument must be finite")
    shape = x.shape
    x = x.reshape(-1)
    a_s, c_s = _agm_sequence(p)
    K = np.pi / (2.0 * a_s[-1])
    # am(x + 2lK) = l*pi + am(x)
    shift = np.round(x / (2.0 * K))
    xr = x - 2.0 * K * shift
    am_r = _amplitude_reduced(xr, p, a_s, c_s)
    am = am_r + np.pi * shift
    sn = np.sin(am)
    cn = np.cos(am)
    # 1 - p^2 sn^2 written as a sum of positive terms, accurate near p = 1
    dn = np.sqrt(cn * cn + (1.0 - p) * (1.0 + p) * sn * sn)
    # near the quarter period cos(am) loses relative accuracy; reflect about K instead
    far = np.abs(am_r) > 0.25 * np.pi
    if np.any(far):
        kp = np.sqrt((1.0 - p) * (1.0 + p))
        t = K - np.abs(xr[far])
        phi = _amplitude_reduced(t, p, a_s, c_s)
        st, ct = np.sin(phi), np.cos(phi)
        dt = np.sqrt(ct * ct + kp * kp * st * st)
        sign = np.where(shift[far] % 2 == 0, 1.0, -1.0)
        sn[far] = sign * np.sign(xr[far]) * ct / dt
        cn[far] = sign * kp * st / dt
        dn[far] = kp / dt
    if not shape:
        return JacobiTriple(float(sn[0]), float(cn[0]), float(dn[0]), float(am[0]))
    return JacobiTriple(sn=sn.reshape(shape), cn=cn.reshape(shape), dn=dn.reshape(shape),
                        am=am.reshape(shape))


def amplitude(x, p):
    return jacobi(x, p).am


def carlson_rf(x, y, z):
    """Carlson's symmetric integral R_F by duplication; arrays broadcast."""
    x, y, z = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x, y, z)))
    x, y, z = x.copy(), y.copy(), z.copy()
    for _ in range(60):
        mu = (x + y + z) / 3.0
        dx, dy, dz = 1 - x / mu, 1 - y / mu, 1 - z / mu
        if np.max(np.abs(np.stack([dx, dy, dz])), initial=0.0) < 1e-4:
            break
        sx, sy, sz = np.sqrt(x), np.sqrt(y), np.sqrt(z)
        lam = sx * (sy + sz) + sy * sz
        x, y, z = 0.25 * (x + lam), 0.25 * (y + lam), 0.25 * (z + lam)
    mu = (x + y + z) / 3.0
    dx, dy, dz = 1 - x / mu, 1 - y / mu, 1 - z / mu
    e2 = dx * dy - dz * dz
    e3 = dx * dy * dz
    series = 1 + (e2 / 24 - 0.1 - 3 * e3 / 44) * e2 + e3 / 14
    return series / np.sqrt(mu)


def incomplete_F(phi, p):
    """Incomplete elliptic integral of the first kind F(phi, p)."""
    p = check_modulus(p)
    phi = np.asarray(phi, dtype=float)
    if not np.all(np.isfinite(phi)):
        raise DomainError("incomplete_F argument must be finite")
    K = complete_K(p)
    shift = np.round(phi / np.pi)
    pr = phi - np.pi * shift
    s = np.sin(pr)
    c = np.cos(pr)
    val = s * carlson_rf(c * c, (1.0 - p * s) * (1.0 + p * s), 1.0)
    out = 2.0 * K * shift + val
    return out if out.ndim else float(out)
