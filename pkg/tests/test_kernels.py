"""Hot-loop kernels: the compiled extension and the pure-NumPy fallback
must be interchangeable, and both must agree with reference results."""

import numpy as np
import pytest
import scipy.signal

from phaserepair import kernels
from phaserepair import _fallback


def _random_sos(rng, n_sections=3):
    """Random stable biquad cascade."""
    sos = []
    for _ in range(n_sections):
        # poles inside the unit circle
        r = rng.uniform(0.1, 0.95)
        th = rng.uniform(0, np.pi)
        a1, a2 = -2 * r * np.cos(th), r * r
        b = rng.standard_normal(3)
        sos.append([b[0], b[1], b[2], 1.0, a1, a2])
    return np.asarray(sos, dtype=np.float64)


def test_sosfilt_matches_scipy(rng):
    sos = _random_sos(rng)
    x = rng.standard_normal(4096)
    zi = np.zeros((sos.shape[0], 2))
    got = kernels.sosfilt(sos, x, zi)
    want = scipy.signal.sosfilt(sos, x)
    np.testing.assert_allclose(got, want, rtol=1e-12, atol=1e-12)


def test_sosfilt_initial_conditions_match_scipy(rng):
    sos = _random_sos(rng, n_sections=2)
    x = rng.standard_normal(512)
    zi = rng.standard_normal((2, 2))
    got = kernels.sosfilt(sos, x, zi)
    want, _ = scipy.signal.sosfilt(sos, x, zi=zi)
    np.testing.assert_allclose(got, want, rtol=1e-12, atol=1e-12)


def test_sosfilt_does_not_mutate_zi(rng):
    sos = _random_sos(rng)
    x = rng.standard_normal(100)
    zi = rng.standard_normal((sos.shape[0], 2))
    zi_copy = zi.copy()
    kernels.sosfilt(sos, x, zi)
    np.testing.assert_array_equal(zi, zi_copy)


def _brute_polyphase(h, up, down, x, n_out):
    """Textbook rational resampling: zero-stuff, convolve, pick every
    `down`-th sample. Slow but unambiguous."""
    stuffed = np.zeros(len(x) * up)
    stuffed[::up] = x
    full = np.convolve(stuffed, h)
    half = (len(h) - 1) // 2
    y = np.zeros(n_out)
    for j in range(n_out):
        k = half + j * down
        if k < len(full):
            y[j] = full[k]
    return y


@pytest.mark.parametrize("up,down", [(1, 2), (2, 1), (3, 2), (7, 16), (160, 147)])
def test_polyphase_matches_brute_force(rng, up, down):
    half = 8 * max(up, down)
    m = np.arange(-half, half + 1)
    wn = 0.9 / max(up, down)
    h = wn * np.sinc(wn * m) * np.kaiser(2 * half + 1, 5.0)
    x = rng.standard_normal(500)
    n_out = -(-len(x) * up // down)
    got = kernels.polyphase_filter(h, up, down, x, n_out)
    want = _brute_polyphase(h, up, down, x, n_out)
    np.testing.assert_allclose(got, want, rtol=1e-12, atol=1e-12)


def test_backends_agree_bit_for_bit(rng):
    """Whichever backend got imported must equal the fallback exactly."""
    sos = _random_sos(rng)
    x = rng.standard_normal(2048)
    zi = rng.standard_normal((sos.shape[0], 2))
    assert np.array_equal(kernels.sosfilt(sos, x, zi), _fallback.sosfilt(sos, x, zi))

    up, down = 3, 2
    half = 8 * max(up, down)
    m = np.arange(-half, half + 1)
    h = 0.4 * np.sinc(0.4 * m) * np.kaiser(2 * half + 1, 5.0)
    n_out = -(-len(x) * up // down)
    assert np.array_equal(
        kernels.polyphase_filter(h, up, down, x, n_out),
        _fallback.polyphase_filter(h, up, down, x, n_out),
    )


def test_backend_reports_name():
    assert kernels.BACKEND in ("compiled", "numpy")
