"""Randomized low-pass degradation: fabricate band-limited inputs from
wide-band music.

A degradation is described by a :class:`FilterSpec` drawn from a
:class:`DegradeConfig`: one of seven low-pass families, a cutoff
uniform in the configured bandwidth range, and (for the IIR families)
an order uniform in [order_lo, order_hi]. Sampling uses the Philox
4x64 counter-based generator keyed by the seed, with the draw index
placed in the counter, so any (seed, draw_index) pair yields the same
spec on every platform and in any processing order.

IIR filtering is applied forward-backward (zero phase) so degraded
signals stay sample-aligned with their wide-band references.
"""

import enum
from dataclasses import dataclass

import numpy as np

from . import filters
from .audio import Waveform, resample
from .spectral import StftParams, istft, stft


class FilterFamily(str, enum.Enum):
    BUTTERWORTH = "butterworth"
    CHEBYSHEV1 = "chebyshev1"
    CHEBYSHEV2 = "chebyshev2"
    ELLIPTIC = "elliptic"
    BESSEL = "bessel"
    SUBSAMPLING = "subsampling"
    STFT_ZEROING = "stft_zeroing"


IIR_FAMILIES = (
    FilterFamily.BUTTERWORTH,
    FilterFamily.CHEBYSHEV1,
    FilterFamily.CHEBYSHEV2,
    FilterFamily.ELLIPTIC,
    FilterFamily.BESSEL,
)

DEFAULT_RIPPLE_DB = 1.0
DEFAULT_ATTEN_DB = 40.0

_FILTER_DESIGN_NAME = {
    FilterFamily.BUTTERWORTH: "butterworth",
    FilterFamily.CHEBYSHEV1: "cheby1",
    FilterFamily.CHEBYSHEV2: "cheby2",
    FilterFamily.ELLIPTIC: "elliptic",
    FilterFamily.BESSEL: "bessel",
}


@dataclass(frozen=True)
class FilterSpec:
    """One concrete degradation: family, order, cutoff, ripple/attenuation.

    ``order`` is ignored by the Subsampling and StftZeroing families but
    still carried (and drawn) for RNG stream-position stability.
    """

    family: FilterFamily
    order: int
    cutoff_hz: float
    passband_ripple_db: float = DEFAULT_RIPPLE_DB
    stopband_atten_db: float = DEFAULT_ATTEN_DB


@dataclass(frozen=True)
class DegradeConfig:
    """Sampling ranges for the degradation pipeline."""

    bandwidth_lo_hz: float = 2500.0
    bandwidth_hi_hz: float = 4000.0
    families: tuple = tuple(FilterFamily)
    seed: int = 0
    order_lo: int = 6
    order_hi: int = 10

    def __post_init__(self):
        if self.bandwidth_lo_hz > self.bandwidth_hi_hz:
            raise ValueError("bandwidth_lo_hz must not exceed bandwidth_hi_hz")
        if not self.families:
            raise ValueError("families must be non-empty")
        if not 1 <= self.order_lo <= self.order_hi:
            raise ValueError("need 1 <= order_lo <= order_hi")
        object.__setattr__(self, "families", tuple(self.families))


def sample_spec(cfg: DegradeConfig, draw_index: int) -> FilterSpec:
    """Draw the FilterSpec at position ``draw_index`` of the seed's stream.

    Deterministic and platform-independent: Philox(key=seed) with the
    draw index in the second 64-bit counter word; three raw draws map
    to family, cutoff, and order.
    """
    bg = np.random.Philox(key=cfg.seed, counter=int(draw_index) << 64)
    raw = bg.random_raw(3)

    ordered = [f for f in FilterFamily if f in set(cfg.families)]
    family = ordered[int(raw[0] % len(ordered))]
    u = (int(raw[1]) >> 11) * 2.0**-53  # uniform in [0, 1)
    cutoff = cfg.bandwidth_lo_hz + (cfg.bandwidth_hi_hz - cfg.bandwidth_lo_hz) * u
    order = cfg.order_lo + int(raw[2] % (cfg.order_hi - cfg.order_lo + 1))
    return FilterSpec(family=family, order=order, cutoff_hz=float(cutoff))


def design_iir(spec: FilterSpec, sample_rate_hz: int) -> np.ndarray:
    """Second-order-section cascade for one of the five IIR families."""
    if spec.family not in IIR_FAMILIES:
        raise ValueError(f"{spec.family.value} is not an IIR design")
    return filters.design_lowpass_sos(
        _FILTER_DESIGN_NAME[spec.family],
        spec.order,
        spec.cutoff_hz,
        sample_rate_hz,
        ripple_db=spec.passband_ripple_db,
        atten_db=spec.stopband_atten_db,
    )


def apply_iir(w: Waveform, sections: np.ndarray) -> Waveform:
    """Zero-phase (forward-backward) filtering; length is preserved."""
    return Waveform(filters.sosfiltfilt(sections, w.samples), w.sample_rate_hz)


def stft_zeroing_lowpass(w: Waveform, cutoff_hz: float, p: StftParams = StftParams()) -> Waveform:
    """Zero every spectrogram bin above ``cutoff_hz`` and resynthesize.

    A cutoff at or above Nyquist zeroes nothing, so the signal round-trips
    through analysis/synthesis unchanged (to reconstruction precision).
    """
    s = stft(w, p)
    keep = s.bin_frequencies_hz <= cutoff_hz
    s.data[:, ~keep] = 0.0
    return istft(s, len(w.samples))


def subsampling_lowpass(w: Waveform, cutoff_hz: float) -> Waveform:
    """Resample down to a rate of 2*cutoff and back up, preserving length."""
    if cutoff_hz > w.sample_rate_hz / 2:
        raise ValueError(f"cutoff {cutoff_hz} Hz must not exceed Nyquist")
    low_rate = int(round(2.0 * cutoff_hz))
    down = resample(w, low_rate)
    up = resample(down, w.sample_rate_hz)
    return Waveform(up.samples[: len(w.samples)], w.sample_rate_hz)


def degrade(w: Waveform, spec: FilterSpec) -> Waveform:
    """Apply the degradation described by ``spec``; output length = input."""
    if spec.family in IIR_FAMILIES:
        return apply_iir(w, design_iir(spec, w.sample_rate_hz))
    if spec.family is FilterFamily.SUBSAMPLING:
        return subsampling_lowpass(w, spec.cutoff_hz)
    if spec.family is FilterFamily.STFT_ZEROING:
        return stft_zeroing_lowpass(w, spec.cutoff_hz)
    raise ValueError(f"unknown filter family {spec.family!r}")
