"""Time-domain phase repair.

The repair operator keeps the magnitude spectrogram of one waveform
(the magnitude donor — typically a band-extended signal whose phase is
distorted) and re-synthesizes it with phase taken from another source:
an externally produced waveform, the ground-truth recording (the
oracle variant), or a Griffin-Lim estimate computed from the donor
magnitude itself.

After phase replacement the combined spectrogram is generally
inconsistent — no waveform has exactly that STFT — so synthesis is a
single least-squares inverse STFT projection. Post-hoc magnitude drift
is expected and measured by the metrics module, not eliminated here.
"""

from dataclasses import dataclass
from typing import Union

import numpy as np

from .audio import Waveform
from .spectral import ComplexSpectrogram, StftParams, istft, magnitude, phase, polar_combine, stft


@dataclass(frozen=True)
class External:
    """Phase from a waveform produced outside this package."""

    waveform: Waveform


@dataclass(frozen=True)
class GroundTruth:
    """Phase from the reference recording (oracle upper bound)."""

    waveform: Waveform


@dataclass(frozen=True)
class GriffinLim:
    """Phase estimated from the donor magnitude by alternating projection."""

    iterations: int = 64
    init: str = "zero"  # "zero" or "random"
    seed: int = 0


PhaseSource = Union[External, GroundTruth, GriffinLim]


def replace_phase(mag_donor: ComplexSpectrogram, phase_donor: ComplexSpectrogram) -> ComplexSpectrogram:
    """Combine one spectrogram's magnitude with another's phase.

    The output magnitude equals the magnitude donor's exactly.
    """
    if mag_donor.params != phase_donor.params:
        raise ValueError(
            f"analysis params differ: {mag_donor.params} vs {phase_donor.params}"
        )
    if mag_donor.data.shape != phase_donor.data.shape:
        raise ValueError(
            f"spectrogram shapes differ: {mag_donor.data.shape} vs {phase_donor.data.shape}"
        )
    return polar_combine(
        magnitude(mag_donor), phase(phase_donor), mag_donor.params, mag_donor.sample_rate_hz
    )


def _reconcile(a: Waveform, b: Waveform, hop: int):
    """Truncate the longer of two waveforms when they differ by <= 2*hop."""
    diff = abs(len(a.samples) - len(b.samples))
    if diff > 2 * hop:
        raise ValueError(
            f"waveform lengths differ by {diff} samples (> {2 * hop}); "
            "inputs are not alignable frame-for-frame"
        )
    n = min(len(a.samples), len(b.samples))
    return Waveform(a.samples[:n], a.sample_rate_hz), Waveform(b.samples[:n], b.sample_rate_hz)


def repair(degraded_sr_output: Waveform, source: PhaseSource, p: StftParams = StftParams()) -> Waveform:
    """Re-synthesize the donor's magnitude with repaired phase.

    Output length equals the (length-reconciled) donor length.
    """
    donor = degraded_sr_output
    if isinstance(source, (External, GroundTruth)):
        other = source.waveform
        if other.sample_rate_hz != donor.sample_rate_hz:
            raise ValueError(
                f"sample rates differ: donor {donor.sample_rate_hz} Hz "
                f"vs phase source {other.sample_rate_hz} Hz"
            )
        donor, other = _reconcile(donor, other, p.hop)
        combined = replace_phase(stft(donor, p), stft(other, p))
        return istft(combined, len(donor.samples))

    if isinstance(source, GriffinLim):
        if source.iterations < 1:
            raise ValueError("GriffinLim needs at least one iteration")
        donor_spec = stft(donor, p)
        estimate = griffin_lim(
            magnitude(donor_spec),
            p,
            source.iterations,
            init=source.init,
            sample_rate_hz=donor.sample_rate_hz,
            seed=source.seed,
            length=len(donor.samples),
        )
        combined = replace_phase(donor_spec, stft(estimate, p))
        return istft(combined, len(donor.samples))

    raise TypeError(f"unknown phase source {source!r}")


def griffin_lim(
    mag: np.ndarray,
    p: StftParams,
    iterations: int,
    init: str = "zero",
    *,
    sample_rate_hz: int,
    seed: int = 0,
    length: int = None,
    return_errors: bool = False,
):
    """Classic alternating-projection phase retrieval from a magnitude.

    Each iteration projects onto the set of consistent spectrograms
    (inverse then forward STFT) and restores the target magnitude. With
    the least-squares inverse used here, the relative consistency error
    || |stft(x_k)| - mag ||_F / ||mag||_F is non-increasing in k.

    With ``return_errors=True`` the per-iteration consistency errors are
    returned alongside the waveform.
    """
    mag = np.asarray(mag, dtype=np.float64)
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    if np.any(mag < 0):
        raise ValueError("negative magnitude")
    if length is None:
        # Largest length whose analysis frame count matches mag's rows.
        length = max((mag.shape[0] - 1) * p.hop, 1)

    if init == "zero":
        ph = np.zeros_like(mag)
    elif init == "random":
        gen = np.random.Generator(np.random.Philox(key=seed))
        ph = gen.uniform(-np.pi, np.pi, size=mag.shape)
    else:
        raise ValueError(f"unknown init {init!r}; use 'zero' or 'random'")

    mag_norm = np.linalg.norm(mag)
    errors = []
    x = istft(polar_combine(mag, ph, p, sample_rate_hz), length)
    for _ in range(iterations):
        s = stft(x, p)
        if return_errors:
            if mag_norm > 0.0:
                errors.append(np.linalg.norm(np.abs(s.data) - mag) / mag_norm)
            else:
                errors.append(0.0)
        x = istft(polar_combine(mag, phase(s), p, sample_rate_hz), length)
    if return_errors:
        return x, errors
    return x
