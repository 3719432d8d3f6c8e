"""Short-time Fourier analysis/synthesis and polar decomposition.

Analysis is centered: the signal is reflection-padded by half a window
on each side, so frame l is centered on sample l*hop and two equal-length
signals always align frame-for-frame. Synthesis is weighted overlap-add
with squared-window normalization, which reconstructs exactly wherever
the window energy is nonzero.
"""

from dataclasses import dataclass

import numpy as np

from .audio import Waveform


@dataclass(frozen=True)
class StftParams:
    """Analysis settings: FFT size, hop, window length, window kind."""

    fft_size: int = 1024
    hop: int = 256
    win_length: int = 1024
    window: str = "hann"

    def __post_init__(self):
        if not (0 < self.hop <= self.win_length <= self.fft_size):
            raise ValueError(
                f"need 0 < hop <= win_length <= fft_size, got "
                f"({self.fft_size}, {self.hop}, {self.win_length})"
            )
        if self.win_length % self.hop != 0:
            raise ValueError(f"hop {self.hop} must divide win_length {self.win_length}")
        if self.window != "hann":
            raise ValueError(f"unsupported window {self.window!r}")

    @property
    def n_bins(self) -> int:
        return self.fft_size // 2 + 1


def _window(p: StftParams) -> np.ndarray:
    # Periodic (DFT-even) hann: exact overlap-add behaviour at hop = win/4.
    n = np.arange(p.win_length)
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * n / p.win_length)


@dataclass
class ComplexSpectrogram:
    """Frames x bins complex matrix with its analysis settings."""

    data: np.ndarray
    params: StftParams
    sample_rate_hz: int

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.complex128)
        if self.data.ndim != 2 or self.data.shape[1] != self.params.n_bins:
            raise ValueError(
                f"expected (frames, {self.params.n_bins}) data, got shape {self.data.shape}"
            )
        if not np.all(np.isfinite(self.data)):
            raise ValueError("spectrogram contains NaN or Inf")

    @property
    def n_frames(self) -> int:
        return self.data.shape[0]

    @property
    def bin_frequencies_hz(self) -> np.ndarray:
        return np.arange(self.params.n_bins) * self.sample_rate_hz / self.params.fft_size


def stft(w: Waveform, p: StftParams = StftParams()) -> ComplexSpectrogram:
    """Centered one-sided STFT; frame count is floor(len/hop) + 1."""
    x = w.samples
    if len(x) == 0:
        raise ValueError("empty signal")
    pad = p.win_length // 2
    xp = np.pad(x, pad, mode="reflect")
    n_frames = len(x) // p.hop + 1
    idx = np.arange(p.win_length)[None, :] + p.hop * np.arange(n_frames)[:, None]
    frames = xp[idx] * _window(p)[None, :]
    data = np.fft.rfft(frames, n=p.fft_size, axis=1)
    return ComplexSpectrogram(data, p, w.sample_rate_hz)


def istft(s: ComplexSpectrogram, length: int) -> Waveform:
    """Weighted overlap-add inverse of :func:`stft`.

    ``length`` is the number of output samples (at most frames*hop).
    Raises if the accumulated squared-window normalizer vanishes
    anywhere in the requested range.
    """
    p = s.params
    if not 0 < length <= s.n_frames * p.hop:
        raise ValueError(f"length {length} outside (0, {s.n_frames * p.hop}]")
    win = _window(p)
    frames = np.fft.irfft(s.data, n=p.fft_size, axis=1)[:, : p.win_length] * win[None, :]

    pad = p.win_length // 2
    total = (s.n_frames - 1) * p.hop + p.win_length
    acc = np.zeros(total)
    den = np.zeros(total)
    w2 = win * win
    for l in range(s.n_frames):
        acc[l * p.hop : l * p.hop + p.win_length] += frames[l]
        den[l * p.hop : l * p.hop + p.win_length] += w2

    acc = acc[pad : pad + length]
    den = den[pad : pad + length]
    if np.min(den) < 1e-12:
        raise ValueError(
            "degenerate overlap-add normalization: squared-window sum below 1e-12 "
            f"(hop={p.hop}, win_length={p.win_length})"
        )
    return Waveform(acc / den, s.sample_rate_hz)


def magnitude(s: ComplexSpectrogram) -> np.ndarray:
    """Elementwise modulus of the spectrogram."""
    return np.abs(s.data)


def phase(s: ComplexSpectrogram) -> np.ndarray:
    """Elementwise argument of the spectrogram, in (-pi, pi]."""
    return np.angle(s.data)


def polar_combine(mag: np.ndarray, ph: np.ndarray, p: StftParams, sample_rate_hz: int) -> ComplexSpectrogram:
    """Rebuild a complex spectrogram from magnitude and phase matrices."""
    mag = np.asarray(mag, dtype=np.float64)
    ph = np.asarray(ph, dtype=np.float64)
    if mag.shape != ph.shape:
        raise ValueError(f"shape mismatch: magnitude {mag.shape} vs phase {ph.shape}")
    if np.any(mag < 0):
        raise ValueError("negative magnitude")
    return ComplexSpectrogram(mag * np.exp(1j * ph), p, sample_rate_hz)
