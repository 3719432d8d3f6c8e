"""STFT analysis/synthesis and the round-trip guarantees everything
else leans on."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phaserepair import (
    ComplexSpectrogram,
    StftParams,
    Waveform,
    istft,
    magnitude,
    phase,
    polar_combine,
    stft,
)
from conftest import make_tone

RESOLUTIONS = [
    StftParams(fft_size=512, hop=128, win_length=512),
    StftParams(fft_size=1024, hop=256, win_length=1024),
    StftParams(fft_size=2048, hop=512, win_length=2048),
    StftParams(fft_size=2048, hop=256, win_length=1024),  # zero-padded analysis
]


class TestStftParams:
    def test_defaults(self):
        p = StftParams()
        assert (p.win_length, p.hop, p.fft_size, p.window) == (1024, 256, 1024, "hann")
        assert p.n_bins == 513

    @pytest.mark.parametrize("win,hop,fft_size", [
        (1024, 0, 1024),      # hop must be positive
        (1024, 2048, 1024),   # hop > win
        (1024, 256, 512),     # fft < win
        (1000, 300, 1024),    # hop does not divide win
    ])
    def test_invalid_combinations(self, win, hop, fft_size):
        with pytest.raises(ValueError):
            StftParams(fft_size=fft_size, hop=hop, win_length=win)

    def test_unsupported_window(self):
        with pytest.raises(ValueError):
            StftParams(window="hamming")


class TestFrameCount:
    @pytest.mark.parametrize("n,hop,expect", [
        (16000, 256, 63),   # floor(16000/256) + 1
        (256, 256, 2),
        (255, 256, 1),
        (1, 256, 1),
    ])
    def test_frame_count(self, n, hop, expect):
        w = Waveform(np.zeros(n) + 0.1, 16000)
        s = stft(w, StftParams(hop=hop))
        assert s.n_frames == expect


class TestRoundTrip:
    @pytest.mark.parametrize("p", RESOLUTIONS + [StftParams()])
    def test_noise_roundtrip(self, p, noise_wave):
        s = stft(noise_wave, p)
        back = istft(s, length=len(noise_wave.samples))
        assert back.sample_rate_hz == noise_wave.sample_rate_hz
        assert np.max(np.abs(back.samples - noise_wave.samples)) < 1e-10

    def test_odd_length_roundtrip(self):
        w = Waveform(np.sin(np.arange(12345) * 0.01), 16000)
        back = istft(stft(w, StftParams()), length=12345)
        assert np.max(np.abs(back.samples - w.samples)) < 1e-10

    @given(st.integers(min_value=2, max_value=4000))
    @settings(max_examples=25, deadline=None)
    def test_any_length_roundtrip(self, n):
        rng = np.random.default_rng(n)
        w = Waveform(0.3 * rng.standard_normal(n), 16000)
        p = StftParams(fft_size=512, hop=128, win_length=512)
        back = istft(stft(w, p), length=n)
        assert np.max(np.abs(back.samples - w.samples)) < 1e-9

    def test_double_pass_stable(self, noise_wave):
        """stft→istft→stft lands on the same spectrogram."""
        p = StftParams()
        s1 = stft(noise_wave, p)
        w1 = istft(s1, length=len(noise_wave.samples))
        s2 = stft(w1, p)
        err = np.linalg.norm(s2.data - s1.data) / np.linalg.norm(s1.data)
        assert err < 1e-10

    def test_degenerate_normalization_rejected(self):
        # hop == win with a hann window leaves OLA gaps (w[0] = 0 for the
        # periodic window), which must be reported, not silently divided.
        w = Waveform(np.ones(4096) * 0.1, 16000)
        p = StftParams(fft_size=1024, hop=1024, win_length=1024)
        s = stft(w, p)
        with pytest.raises(ValueError):
            istft(s, length=4096)


class TestSpectralValues:
    def test_impulse_at_frame_center(self):
        # unit impulse aligned with an analysis-frame center shows up with
        # the window's center value (periodic hann peak = 1) in every bin
        p = StftParams()
        n = 4 * p.hop + 1
        x = np.zeros(n)
        x[2 * p.hop] = 1.0  # frame 2's center under centered framing
        s = stft(Waveform(x, 16000), p)
        np.testing.assert_allclose(np.abs(s.data[2]), 1.0, atol=1e-12)

    def test_tone_lands_in_right_bin(self):
        w = make_tone(1000.0, duration_s=1.0, sample_rate_hz=16000)
        p = StftParams()
        s = stft(w, p)
        mid = s.n_frames // 2
        assert np.argmax(np.abs(s.data[mid])) == 64  # 1000/(16000/1024)

    def test_bin_frequencies(self):
        s = stft(Waveform(np.zeros(1000) + 0.1, 16000), StftParams())
        f = s.bin_frequencies_hz
        assert f[0] == 0.0
        assert f[-1] == 8000.0
        assert len(f) == 513

    def test_linearity(self, rng):
        p = StftParams(fft_size=512, hop=128, win_length=512)
        a = rng.standard_normal(3000)
        b = rng.standard_normal(3000)
        sa = stft(Waveform(a, 16000), p).data
        sb = stft(Waveform(b, 16000), p).data
        sab = stft(Waveform(2.0 * a - 0.5 * b, 16000), p).data
        np.testing.assert_allclose(sab, 2.0 * sa - 0.5 * sb, atol=1e-9)

    def test_parseval_on_interior_frame(self, rng):
        # for one frame: sum |X[k]|^2 over the full fft grid equals
        # fft * sum |windowed x|^2 (rfft halves need doubling)
        p = StftParams()
        x = rng.standard_normal(8 * p.hop)
        s = stft(Waveform(x, 16000), p)
        frame = s.data[4]
        power_spec = np.abs(frame[0]) ** 2 + np.abs(frame[-1]) ** 2
        power_spec += 2 * np.sum(np.abs(frame[1:-1]) ** 2)
        seg = x[4 * p.hop - p.win_length // 2: 4 * p.hop + p.win_length // 2]
        win = 0.5 - 0.5 * np.cos(2 * np.pi * np.arange(p.win_length) / p.win_length)
        power_time = np.sum((seg * win) ** 2)
        assert power_spec == pytest.approx(p.fft_size * power_time, rel=1e-6)


class TestHelpers:
    def test_magnitude_phase_polar(self, noise_wave):
        s = stft(noise_wave, StftParams())
        m, ph = magnitude(s), phase(s)
        back = polar_combine(m, ph, s.params, noise_wave.sample_rate_hz)
        np.testing.assert_allclose(back.data, s.data, atol=1e-12)

    def test_polar_combine_rejects_negative_magnitude(self, noise_wave):
        s = stft(noise_wave, StftParams())
        m = magnitude(s)
        m[0, 0] = -1.0
        with pytest.raises(ValueError):
            polar_combine(m, phase(s), s.params, noise_wave.sample_rate_hz)

    def test_spectrogram_validates_shape(self):
        with pytest.raises(ValueError):
            ComplexSpectrogram(np.zeros((3, 100), dtype=np.complex128),
                               StftParams(), 16000)

    def test_istft_length_cap(self, noise_wave):
        p = StftParams()
        s = stft(noise_wave, p)
        with pytest.raises(ValueError):
            istft(s, length=s.n_frames * p.hop + 1)
