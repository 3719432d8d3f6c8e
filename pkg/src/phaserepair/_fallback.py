"""Pure-numpy implementations of the hot kernels.

Used when the compiled extension is unavailable (or disabled via
PHASEREPAIR_NO_EXT). Same contracts as ``phaserepair._kernels``.
"""

import numpy as np


def sosfilt(sos: np.ndarray, x: np.ndarray, zi: np.ndarray) -> np.ndarray:
    """Apply a cascade of biquads (direct form II transposed) to ``x``.

    ``sos`` has shape (n_sections, 6) with rows [b0, b1, b2, 1, a1, a2];
    ``zi`` has shape (n_sections, 2) and is not mutated.
    """
    y = np.asarray(x, dtype=np.float64).copy()
    for s in range(sos.shape[0]):
        b0, b1, b2, _, a1, a2 = sos[s]
        s1, s2 = float(zi[s, 0]), float(zi[s, 1])
        for n in range(y.shape[0]):
            xn = y[n]
            yn = b0 * xn + s1
            s1 = b1 * xn - a1 * yn + s2
            s2 = b2 * xn - a2 * yn
            y[n] = yn
    return y


def polyphase_filter(h: np.ndarray, up: int, down: int, x: np.ndarray, n_out: int) -> np.ndarray:
    """Zero-centered polyphase FIR resampling core.

    ``h`` is an odd-length kernel sampled on the high-rate grid (rate
    ``up`` times the input rate), centered at index ``(len(h)-1)//2``:

        y[j] = sum_i h[center + j*down - i*up] * x[i]

    Out-of-range input samples are treated as zero.
    """
    h = np.asarray(h, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    half = (h.shape[0] - 1) // 2

    # Vectorize over output samples; loop over the (short) per-phase taps.
    pos = np.arange(n_out, dtype=np.int64) * down
    s = pos - half
    i0 = -((-s) // up)  # ceil(s / up)
    r = i0 * up - s  # in [0, up)

    xpad_off = half // up + 2
    xpad = np.concatenate([np.zeros(xpad_off), x, np.zeros(xpad_off + 2)])
    hpad = np.concatenate([np.zeros(up), h])  # guard for the last tap row

    y = np.zeros(n_out)
    n_taps = (2 * half) // up + 1
    base_h = up + 2 * half - r
    base_x = xpad_off + i0
    for t in range(n_taps):
        y += hpad[base_h - t * up] * xpad[base_x + t]
    return y
