"""Low-pass IIR design from first principles, plus zero-phase application.

Five classic analog prototypes (Butterworth, Chebyshev I/II, elliptic,
Bessel) are designed at unit cutoff, scaled to a pre-warped analog
frequency, mapped to the z-domain with the bilinear transform, and
factored into second-order sections. Every design is normalized to
unit gain at DC.

Cutoff conventions per family:

* Butterworth, Chebyshev II, Bessel: -3 dB point at the cutoff.
* Chebyshev I, elliptic: passband edge (response leaves the ripple
  band) at the cutoff.

The elliptic prototype is computed with Landen/Gauss transformations of
the Jacobi elliptic functions; this is the hardest numeric path in the
package and is validated by dense frequency-response sweeps in the test
suite rather than closed-form spot values.
"""

import cmath
import math

import numpy as np

from .kernels import sosfilt


# ---------------------------------------------------------------------------
# Jacobi elliptic machinery (Landen transformation form)
# ---------------------------------------------------------------------------

def _landen(k: float) -> list:
    """Descending Landen sequence k_1, k_2, ... until convergence."""
    v = []
    while k > 1e-16 and len(v) < 64:
        k = (k / (1.0 + math.sqrt(1.0 - k * k))) ** 2
        v.append(k)
    return v


def _ellipk(k: float) -> float:
    """Complete elliptic integral of the first kind K(k)."""
    if k >= 1.0:
        return math.inf
    prod = 1.0
    for ki in _landen(k):
        prod *= 1.0 + ki
    return prod * math.pi / 2.0


def _cde(u, k: float):
    """cd(u*K(k), k) for real or complex u (scalar or array)."""
    w = np.cos(np.asarray(u) * (np.pi / 2.0))
    for vi in reversed(_landen(k)):
        w = (1.0 + vi) * w / (1.0 + vi * w * w)
    return w


def _sne(u, k: float):
    """sn(u*K(k), k) for real or complex u."""
    w = np.sin(np.asarray(u) * (np.pi / 2.0))
    for vi in reversed(_landen(k)):
        w = (1.0 + vi) * w / (1.0 + vi * w * w)
    return w


def _asne(w, k: float):
    """Inverse of _sne: u with sn(u*K(k), k) = w. Complex-capable."""
    w = complex(w)
    k_prev = k
    for vi in _landen(k):
        w = 2.0 * w / ((1.0 + vi) * (1.0 + cmath.sqrt(1.0 - k_prev * k_prev * w * w)))
        k_prev = vi
    return 2.0 * cmath.asin(w) / math.pi


def _modulus_from_nome(q: float) -> float:
    """Elliptic modulus k for a given nome q, via theta functions."""
    theta2 = 2.0 * q**0.25 * sum(q ** (m * (m + 1)) for m in range(30))
    theta3 = 1.0 + 2.0 * sum(q ** (m * m) for m in range(1, 30))
    return (theta2 / theta3) ** 2


def _nome(k: float) -> float:
    kp = math.sqrt((1.0 - k) * (1.0 + k))
    return math.exp(-math.pi * _ellipk(kp) / _ellipk(k))


# ---------------------------------------------------------------------------
# Analog prototypes at unit cutoff: (zeros, poles, gain) with H(0) = 1
# ---------------------------------------------------------------------------

def _butter_zpk(n: int):
    k = np.arange(n)
    poles = np.exp(1j * np.pi * (2 * k + n + 1) / (2 * n))
    return np.array([]), poles, float(np.prod(-poles).real)


def _cheby1_zpk(n: int, ripple_db: float):
    eps = math.sqrt(10.0 ** (ripple_db / 10.0) - 1.0)
    mu = math.asinh(1.0 / eps) / n
    theta = np.pi * (2 * np.arange(n) + 1) / (2 * n)
    poles = -math.sinh(mu) * np.sin(theta) + 1j * math.cosh(mu) * np.cos(theta)
    return np.array([]), poles, float(np.prod(-poles).real)


def _cheby2_zpk(n: int, atten_db: float):
    # Inverse-Chebyshev with the stopband edge placed so the -3 dB point
    # falls at unit frequency.
    eps = 1.0 / math.sqrt(10.0 ** (atten_db / 10.0) - 1.0)
    x3 = math.cosh(math.acosh(1.0 / eps) / n)  # stopband edge / -3 dB freq
    mu = math.asinh(1.0 / eps) / n
    theta = np.pi * (2 * np.arange(n) + 1) / (2 * n)
    base = -math.sinh(mu) * np.sin(theta) + 1j * math.cosh(mu) * np.cos(theta)
    poles = x3 / base
    cos_t = np.cos(theta)
    zeros = 1j * x3 / cos_t[np.abs(cos_t) > 1e-12]  # odd n: middle zero -> infinity
    gain = np.prod(-poles) / np.prod(-zeros)
    return zeros, poles, float(gain.real)


def _ellip_zpk(n: int, ripple_db: float, atten_db: float):
    eps_p = math.sqrt(10.0 ** (ripple_db / 10.0) - 1.0)
    eps_s = math.sqrt(10.0 ** (atten_db / 10.0) - 1.0)
    k1 = eps_p / eps_s

    # Degree equation: modulus k giving exactly ripple/attenuation at
    # order n, solved through the nome to stay accurate for k -> 1.
    q = _nome(k1) ** (1.0 / n)
    k = _modulus_from_nome(q)

    L = n // 2
    ui = (2.0 * np.arange(1, L + 1) - 1.0) / n
    zeta = _cde(ui, k).real
    zeros_half = 1j / (k * zeta)

    v0 = complex(-1j * _asne(1j / eps_p, k1) / n)
    poles_half = 1j * _cde(ui - 1j * v0, k)

    zeros = np.concatenate([zeros_half, zeros_half.conj()])
    poles = np.concatenate([poles_half, poles_half.conj()])
    if n % 2:
        p0 = 1j * _sne(1j * v0, k)
        poles = np.concatenate([poles, [complex(p0).real]])
    gain = np.prod(-poles) / np.prod(-zeros)
    return zeros, poles, float(gain.real)


def _bessel_poly(n: int) -> np.ndarray:
    """Reverse Bessel polynomial coefficients, highest power first."""
    prev, cur = np.array([1.0]), np.array([1.0, 1.0])  # theta_0, theta_1
    for m in range(2, n + 1):
        cur, prev = np.polyadd((2 * m - 1) * cur, np.polymul([1.0, 0.0, 0.0], prev)), cur
    return cur if n >= 1 else prev


def _bessel_zpk(n: int):
    theta = _bessel_poly(n)
    half_power = 2.0 * theta[-1] ** 2

    def over(w):  # |theta(jw)|^2 - 2*theta(0)^2, monotone in w
        return abs(np.polyval(theta, 1j * w)) ** 2 - half_power

    lo, hi = 0.0, 2.0 * n
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if over(mid) > 0:
            hi = mid
        else:
            lo = mid
    w3 = 0.5 * (lo + hi)

    poles = np.roots(theta) / w3
    return np.array([]), poles, float(np.prod(-poles).real)


# ---------------------------------------------------------------------------
# Transformation to digital second-order sections
# ---------------------------------------------------------------------------

def _bilinear_zpk(zeros, poles, gain, fs: float):
    c = 2.0 * fs
    zd = (c + zeros) / (c - zeros)
    pd = (c + poles) / (c - poles)
    gd = gain * (np.prod(c - zeros) / np.prod(c - poles)).real
    # Analog zeros at infinity map to z = -1.
    zd = np.concatenate([zd, -np.ones(len(poles) - len(zeros))])
    return zd, pd, gd


def _split_conjugates(roots, tol=1e-9):
    """Return (upper-half-plane roots, real roots) from a conjugate set."""
    roots = np.asarray(roots, dtype=np.complex128)
    upper = roots[roots.imag > tol]
    real = np.sort(roots[np.abs(roots.imag) <= tol].real)
    return upper, real


def _zpk_to_sos(zeros, poles, gain) -> np.ndarray:
    """Factor a conjugate-symmetric zpk set into second-order sections.

    Complex pole pairs are matched with the zero pair nearest in angle;
    sections are ordered with poles closest to the unit circle last and
    the overall gain folded into the first section.
    """
    pz, pr = _split_conjugates(poles)
    zz, zr = _split_conjugates(zeros)
    zz = list(zz)
    zr = list(zr)

    entries = []  # (|pole|, denominator, paired-zero picker)
    for p in sorted(pz, key=lambda q: -abs(q)):
        den = np.array([1.0, -2.0 * p.real, abs(p) ** 2])
        if zz:
            j = int(np.argmin([abs(np.angle(z) - np.angle(p)) for z in zz]))
            z = zz.pop(j)
            num = np.array([1.0, -2.0 * z.real, abs(z) ** 2])
        elif len(zr) >= 2:
            z0, z1 = zr.pop(), zr.pop()
            num = np.array([1.0, -(z0 + z1), z0 * z1])
        else:
            num = np.array([1.0, 0.0, 0.0])
        entries.append((abs(p), num, den))
    for p in pr:
        den = np.array([1.0, -p, 0.0])
        if zr:
            z = zr.pop()
            num = np.array([1.0, -z, 0.0])
        else:
            num = np.array([1.0, 0.0, 0.0])
        entries.append((abs(p), num, den))

    entries.sort(key=lambda e: e[0])  # farthest from unit circle first
    sos = np.array([np.concatenate([num, den]) for _, num, den in entries])
    sos[0, :3] *= gain
    return sos


_NEEDS_RIPPLE = {"cheby1", "elliptic"}
_NEEDS_ATTEN = {"cheby2", "elliptic"}


def design_lowpass_sos(
    family: str,
    order: int,
    cutoff_hz: float,
    sample_rate_hz: int,
    ripple_db: float = 1.0,
    atten_db: float = 40.0,
) -> np.ndarray:
    """Design a digital low-pass as an (n_sections, 6) biquad cascade.

    ``family`` is one of butterworth/cheby1/cheby2/elliptic/bessel. The
    analog prototype is scaled to the tan-pre-warped cutoff so the
    family's characteristic frequency lands exactly at ``cutoff_hz``
    after the bilinear transform.
    """
    if not 0 < cutoff_hz < sample_rate_hz / 2:
        raise ValueError(f"cutoff {cutoff_hz} Hz must lie below Nyquist ({sample_rate_hz / 2} Hz)")
    if order < 1:
        raise ValueError(f"order must be >= 1, got {order}")

    if family == "butterworth":
        z, p, k = _butter_zpk(order)
    elif family == "cheby1":
        z, p, k = _cheby1_zpk(order, ripple_db)
    elif family == "cheby2":
        z, p, k = _cheby2_zpk(order, atten_db)
    elif family == "elliptic":
        z, p, k = _ellip_zpk(order, ripple_db, atten_db)
    elif family == "bessel":
        z, p, k = _bessel_zpk(order)
    else:
        raise ValueError(f"unknown IIR family {family!r}")

    warped = 2.0 * sample_rate_hz * math.tan(math.pi * cutoff_hz / sample_rate_hz)
    z = z * warped
    p = p * warped
    k = k * warped ** (len(p) - len(z))

    zd, pd, kd = _bilinear_zpk(z, p, k, sample_rate_hz)
    if np.any(np.abs(pd) >= 1.0):
        raise ValueError(f"unstable design: {family} order {order} at {cutoff_hz} Hz")
    return _zpk_to_sos(zd, pd, kd)


def sos_response(sos: np.ndarray, freqs_hz, sample_rate_hz: int) -> np.ndarray:
    """Complex frequency response of a biquad cascade at the given Hz."""
    w = 2.0 * np.pi * np.asarray(freqs_hz, dtype=np.float64) / sample_rate_hz
    z1 = np.exp(-1j * w)
    z2 = z1 * z1
    h = np.ones_like(z1, dtype=np.complex128)
    for b0, b1, b2, _, a1, a2 in sos:
        h *= (b0 + b1 * z1 + b2 * z2) / (1.0 + a1 * z1 + a2 * z2)
    return h


# ---------------------------------------------------------------------------
# Zero-phase application
# ---------------------------------------------------------------------------

def _sosfilt_zi(sos: np.ndarray) -> np.ndarray:
    """Per-section steady-state for a unit-step input (DF2T state)."""
    zi = np.zeros((sos.shape[0], 2))
    u = 1.0
    for s, (b0, b1, b2, _, a1, a2) in enumerate(sos):
        y = u * (b0 + b1 + b2) / (1.0 + a1 + a2)
        zi[s, 0] = (b1 + b2) * u - (a1 + a2) * y
        zi[s, 1] = b2 * u - a2 * y
        u = y
    return zi


def sosfiltfilt(sos: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Forward-backward (zero-phase) biquad-cascade filtering.

    The signal is extended at both ends by odd reflection and the
    filter states are initialized to the step steady state, suppressing
    start-up transients. Effective magnitude response is |H|^2; output
    length equals input length.
    """
    sos = np.asarray(sos, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    n = len(x)
    if n < 2:
        raise ValueError("signal too short to filter")
    pad = min(3 * (2 * sos.shape[0] + 1), n - 1)

    left = 2.0 * x[0] - x[pad:0:-1]
    right = 2.0 * x[-1] - x[-2 : -pad - 2 : -1]
    ext = np.concatenate([left, x, right])

    zi = _sosfilt_zi(sos)
    y = sosfilt(sos, ext, zi * ext[0])
    y = sosfilt(sos, y[::-1], zi * y[-1])[::-1]
    return y[pad : pad + n]
