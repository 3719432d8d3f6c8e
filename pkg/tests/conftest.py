import numpy as np
import pytest

from phaserepair import Waveform


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def noise_wave(rng):
    """One second of white noise at 16 kHz with peak exactly 0.5."""
    x = rng.standard_normal(16000)
    return Waveform(0.5 * x / np.max(np.abs(x)), 16000)


def make_tone(freq_hz: float, duration_s: float = 1.0, sample_rate_hz: int = 16000,
              amplitude: float = 0.5) -> Waveform:
    n = int(duration_s * sample_rate_hz)
    t = np.arange(n) / sample_rate_hz
    return Waveform(amplitude * np.sin(2 * np.pi * freq_hz * t), sample_rate_hz)
