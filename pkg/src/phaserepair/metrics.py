"""Objective evaluation: log-spectral distance and the multi-resolution
spectral/waveform losses.

All functions are pure and operate on equal-length Waveform pairs; a
length mismatch is an error, never an implicit trim.
"""

from dataclasses import dataclass

import numpy as np

from .audio import Waveform, resample
from .spectral import StftParams, stft

_LSD_POWER_FLOOR = 1e-10  # on squared magnitudes
_LOGMAG_FLOOR = 1e-7  # on magnitudes


def _default_resolutions():
    return tuple(
        StftParams(fft_size=f, hop=h, win_length=wl)
        for f, h, wl in zip((512, 1024, 2048), (256, 512, 1024), (512, 1024, 2048))
    )


@dataclass(frozen=True)
class LossConfig:
    """Resolutions, wave scales, and the spectral/wave balance weight."""

    stft_resolutions: tuple = None
    wave_scales: tuple = (1, 2, 4)
    lam: float = 1000.0

    def __post_init__(self):
        if self.stft_resolutions is None:
            object.__setattr__(self, "stft_resolutions", _default_resolutions())
        if not self.stft_resolutions or not self.wave_scales:
            raise ValueError("stft_resolutions and wave_scales must be non-empty")
        if self.lam <= 0:
            raise ValueError(f"lam must be positive, got {self.lam}")


def _check_pair(a: Waveform, b: Waveform):
    if len(a.samples) != len(b.samples):
        raise ValueError(f"length mismatch: {len(a.samples)} vs {len(b.samples)}")
    if a.sample_rate_hz != b.sample_rate_hz:
        raise ValueError(f"sample rate mismatch: {a.sample_rate_hz} vs {b.sample_rate_hz}")


def lsd(reference: Waveform, estimate: Waveform, p: StftParams = StftParams()) -> float:
    """Log-spectral distance: per-frame RMS of the log10 power difference.

    Powers are floored at 1e-10 before the log, so content that is
    absent from both signals contributes zero distance.
    """
    _check_pair(reference, estimate)
    py = np.maximum(np.abs(stft(reference, p).data) ** 2, _LSD_POWER_FLOOR)
    pe = np.maximum(np.abs(stft(estimate, p).data) ** 2, _LSD_POWER_FLOOR)
    d = np.log10(py) - np.log10(pe)
    return float(np.mean(np.sqrt(np.mean(d * d, axis=1))))


def stft_loss(reference: Waveform, estimate: Waveform, p: StftParams) -> float:
    """Single-resolution spectral loss: convergence + log-magnitude terms.

    Spectral convergence ||Y - Y_hat||_F / ||Y||_F is normalized by the
    reference and therefore asymmetric; the log-magnitude L1 term
    (natural log, magnitudes floored at 1e-7) is symmetric.
    """
    _check_pair(reference, estimate)
    my = np.abs(stft(reference, p).data)
    me = np.abs(stft(estimate, p).data)
    sc = np.linalg.norm(my - me) / max(np.linalg.norm(my), 1e-12)
    logmag = np.mean(
        np.abs(np.log(np.maximum(my, _LOGMAG_FLOOR)) - np.log(np.maximum(me, _LOGMAG_FLOOR)))
    )
    return float(sc + logmag)


def mrstft_loss(reference: Waveform, estimate: Waveform, cfg: LossConfig = LossConfig()) -> float:
    """Mean spectral loss over the configured resolutions."""
    return float(
        np.mean([stft_loss(reference, estimate, p) for p in cfg.stft_resolutions])
    )


def wave_loss(reference: Waveform, estimate: Waveform) -> float:
    """Mean absolute sample difference."""
    _check_pair(reference, estimate)
    return float(np.mean(np.abs(reference.samples - estimate.samples)))


def mrwave_loss(reference: Waveform, estimate: Waveform, cfg: LossConfig = LossConfig()) -> float:
    """Mean wave loss over anti-aliased downsamplings of both signals."""
    _check_pair(reference, estimate)
    vals = []
    for s in cfg.wave_scales:
        if s == 1:
            vals.append(wave_loss(reference, estimate))
        else:
            rate = reference.sample_rate_hz // s
            vals.append(wave_loss(resample(reference, rate), resample(estimate, rate)))
    return float(np.mean(vals))


def total_loss(reference: Waveform, estimate: Waveform, cfg: LossConfig = LossConfig()) -> float:
    """Spectral term plus lam-weighted waveform term."""
    return mrstft_loss(reference, estimate, cfg) + cfg.lam * mrwave_loss(reference, estimate, cfg)
