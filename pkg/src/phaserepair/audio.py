"""Mono waveform I/O, resampling, and peak normalization.

WAV support is deliberately narrow: RIFF/WAVE, little-endian, 16-bit
integer or 32-bit float PCM. Multi-channel files are downmixed to mono
by the channel mean; processing downstream is channel-independent.
"""

import logging
import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .kernels import polyphase_filter

log = logging.getLogger(__name__)

# Kaiser beta for >= 60 dB stopband rejection in the resampler kernel.
_KAISER_BETA = 5.65326
# Kernel half-extent in low-rate samples; 64 taps per polyphase branch.
_TAPS_HALF = 64
# Fractional transition width of the Kaiser kernel at the lower rate.
_TRANSITION_FRAC = 0.028304


@dataclass
class Waveform:
    """A mono audio signal: float64 samples plus a sample rate in Hz."""

    samples: np.ndarray
    sample_rate_hz: int

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1:
            raise ValueError(f"samples must be 1-D, got shape {self.samples.shape}")
        if int(self.sample_rate_hz) <= 0:
            raise ValueError(f"sample rate must be positive, got {self.sample_rate_hz}")
        self.sample_rate_hz = int(self.sample_rate_hz)
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("samples contain NaN or Inf")

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate_hz


def _parse_chunks(data: bytes):
    """Yield (chunk_id, payload) pairs from a RIFF body."""
    pos = 12
    while pos + 8 <= len(data):
        cid, size = struct.unpack_from("<4sI", data, pos)
        payload = data[pos + 8 : pos + 8 + size]
        yield cid, payload
        pos += 8 + size + (size & 1)  # chunks are word-aligned


def read_wav(path) -> Waveform:
    """Read a WAV file as a mono Waveform.

    16-bit PCM is scaled to [-1, 1] by dividing by 32768; 32-bit float
    is taken as-is. Channels are averaged.
    """
    raw = Path(path).read_bytes()
    if len(raw) < 12 or raw[:4] != b"RIFF" or raw[8:12] != b"WAVE":
        raise ValueError(f"{path}: not a RIFF/WAVE file")

    fmt = None
    frames = None
    for cid, payload in _parse_chunks(raw):
        if cid == b"fmt ":
            fmt = struct.unpack_from("<HHIIHH", payload, 0)
        elif cid == b"data":
            frames = payload
    if fmt is None or frames is None:
        raise ValueError(f"{path}: missing fmt or data chunk")

    audio_format, n_channels, sample_rate, _, _, bits = fmt
    if audio_format == 1 and bits == 16:
        x = np.frombuffer(frames, dtype="<i2").astype(np.float64) / 32768.0
    elif audio_format == 3 and bits == 32:
        x = np.frombuffer(frames, dtype="<f4").astype(np.float64)
    else:
        raise ValueError(
            f"{path}: unsupported codec (format tag {audio_format}, {bits}-bit); "
            "only 16-bit integer and 32-bit float PCM are readable"
        )
    if n_channels < 1:
        raise ValueError(f"{path}: invalid channel count {n_channels}")
    if n_channels > 1:
        x = x[: len(x) - len(x) % n_channels].reshape(-1, n_channels).mean(axis=1)
    if len(x) == 0:
        raise ValueError(f"{path}: zero-length audio")
    return Waveform(x, sample_rate)


def write_wav(path, w: Waveform, format: str = "int16") -> None:
    """Write a mono Waveform as WAV ('int16' or 'float32').

    Samples outside [-1, 1] are hard-clipped; the clip count is logged
    as a warning. float32 output round-trips bit-exactly.
    """
    x = w.samples
    n_clipped = int(np.count_nonzero((x < -1.0) | (x > 1.0)))
    if n_clipped:
        log.warning("%s: clipped %d sample(s) outside [-1, 1]", path, n_clipped)
        x = np.clip(x, -1.0, 1.0)

    if format == "int16":
        pcm = np.clip(np.round(x * 32768.0), -32768, 32767).astype("<i2")
        payload = pcm.tobytes()
        fmt_chunk = struct.pack("<HHIIHH", 1, 1, w.sample_rate_hz, w.sample_rate_hz * 2, 2, 16)
        chunks = [(b"fmt ", fmt_chunk), (b"data", payload)]
    elif format == "float32":
        payload = x.astype("<f4").tobytes()
        fmt_chunk = struct.pack("<HHIIHHH", 3, 1, w.sample_rate_hz, w.sample_rate_hz * 4, 4, 32, 0)
        fact_chunk = struct.pack("<I", len(x))
        chunks = [(b"fmt ", fmt_chunk), (b"fact", fact_chunk), (b"data", payload)]
    else:
        raise ValueError(f"unknown sample format {format!r}; use 'int16' or 'float32'")

    body = b"".join(
        struct.pack("<4sI", cid, len(payload)) + payload + (b"\x00" if len(payload) & 1 else b"")
        for cid, payload in chunks
    )
    with open(path, "wb") as f:
        f.write(struct.pack("<4sI4s", b"RIFF", 4 + len(body), b"WAVE"))
        f.write(body)


def resample(w: Waveform, target_rate_hz: int) -> Waveform:
    """Polyphase rational-ratio resampling with a Kaiser-windowed sinc.

    Output length is ceil(len * target / source). Equal rates return
    the samples unchanged.
    """
    target_rate_hz = int(target_rate_hz)
    if target_rate_hz <= 0:
        raise ValueError(f"target rate must be positive, got {target_rate_hz}")
    if target_rate_hz == w.sample_rate_hz:
        return Waveform(w.samples.copy(), w.sample_rate_hz)

    g = math.gcd(w.sample_rate_hz, target_rate_hz)
    up = target_rate_hz // g
    down = w.sample_rate_hz // g

    # Anti-aliasing cutoff: just below the lower Nyquist, backed off by
    # half the Kaiser transition width so the stopband starts at Nyquist.
    rate_low = min(w.sample_rate_hz, target_rate_hz)
    rate_high = w.sample_rate_hz * up
    cutoff_hz = rate_low / 2 - _TRANSITION_FRAC * rate_low / 2
    wn = 2.0 * cutoff_hz / rate_high  # cutoff relative to high-rate Nyquist

    half = _TAPS_HALF * max(up, down)
    m = np.arange(-half, half + 1)
    h = up * wn * np.sinc(wn * m) * np.kaiser(2 * half + 1, _KAISER_BETA)

    n_out = -(-len(w.samples) * up // down)
    y = polyphase_filter(h, up, down, w.samples, n_out)
    return Waveform(y, target_rate_hz)


def peak_normalize(w: Waveform, target_dbfs: float = -1.0) -> Waveform:
    """Scale so the peak magnitude sits at ``target_dbfs`` (<= 0).

    All-zero input is returned unchanged (with a warning) since it has
    no peak to place.
    """
    if target_dbfs > 0:
        raise ValueError(f"target must be <= 0 dBFS, got {target_dbfs}")
    peak = float(np.max(np.abs(w.samples))) if len(w.samples) else 0.0
    if peak == 0.0:
        log.warning("peak_normalize: all-zero input left unchanged")
        return Waveform(w.samples.copy(), w.sample_rate_hz)
    scale = 10.0 ** (target_dbfs / 20.0) / peak
    return Waveform(w.samples * scale, w.sample_rate_hz)
