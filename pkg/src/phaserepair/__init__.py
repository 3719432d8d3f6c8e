"""Phase repair toolkit for music bandwidth extension.

Simulates low-pass degradations, repairs the phase of band-extended
audio from a donor spectrogram, and scores results with log-spectral
and multi-resolution losses. A listening-test HTTP service covers
subjective evaluation.
"""

from .audio import Waveform, peak_normalize, read_wav, resample, write_wav
from .degrade import (
    DegradeConfig,
    FilterFamily,
    FilterSpec,
    apply_iir,
    degrade,
    design_iir,
    sample_spec,
    stft_zeroing_lowpass,
    subsampling_lowpass,
)
from .kernels import BACKEND
from .metrics import LossConfig, lsd, mrstft_loss, mrwave_loss, stft_loss, total_loss, wave_loss
from .repair import External, GriffinLim, GroundTruth, PhaseSource, griffin_lim, repair, replace_phase
from .spectral import ComplexSpectrogram, StftParams, istft, magnitude, phase, polar_combine, stft

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ComplexSpectrogram",
    "DegradeConfig",
    "External",
    "FilterFamily",
    "FilterSpec",
    "GriffinLim",
    "GroundTruth",
    "LossConfig",
    "PhaseSource",
    "StftParams",
    "Waveform",
    "apply_iir",
    "degrade",
    "design_iir",
    "griffin_lim",
    "istft",
    "lsd",
    "magnitude",
    "mrstft_loss",
    "mrwave_loss",
    "peak_normalize",
    "phase",
    "polar_combine",
    "read_wav",
    "repair",
    "replace_phase",
    "resample",
    "sample_spec",
    "stft",
    "stft_loss",
    "stft_zeroing_lowpass",
    "subsampling_lowpass",
    "total_loss",
    "wave_loss",
    "write_wav",
]
