"""WAV parsing, resampling, normalization and noise injection.

Everything operates on mono float64 clips. Integer PCM is scaled by
2^(bits-1) so full negative scale maps to -1.0; multi-channel audio is
averaged down to mono on read.
"""

import math
import struct
from dataclasses import dataclass, replace

import numpy as np
from scipy.signal import fftconvolve

from .errors import ContractError, WavFormatError

PCM_FORMAT = 1
FLOAT_FORMAT = 3


@dataclass
class AudioClip:
    samples: np.ndarray
    rate: int
    normalized: bool = False

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1:
            raise ContractError("clip samples must be one-dimensional")
        if self.rate <= 0:
            raise ContractError("sample rate must be positive")

    def __len__(self):
        return len(self.samples)

    @property
    def duration(self):
        return len(self.samples) / self.rate


def read_wav(data: bytes) -> AudioClip:
    """Decode a RIFF/WAVE byte string (PCM 8/16/24-bit or 32-bit float)."""
    if len(data) < 12 or data[0:4] != b"RIFF":
        raise WavFormatError("missing RIFF magic", 0)
    if data[8:12] != b"WAVE":
        raise WavFormatError("missing WAVE form type", 8)

    fmt = None
    payload = None
    pos = 12
    while pos + 8 <= len(data):
        chunk_id = data[pos:pos + 4]
        (size,) = struct.unpack_from("<I", data, pos + 4)
        body_start = pos + 8
        if body_start + size > len(data):
            raise WavFormatError(f"chunk {chunk_id!r} truncated", pos)
        if chunk_id == b"fmt ":
            if size < 16:
                raise WavFormatError("fmt chunk too short", pos)
            fmt = struct.unpack_from("<HHIIHH", data, body_start)
        elif chunk_id == b"data":
            payload = data[body_start:body_start + size]
            payload_offset = body_start
        pos = body_start + size + (size & 1)  # chunks are word-aligned

    if fmt is None:
        raise WavFormatError("no fmt chunk found", len(data))
    if payload is None:
        raise WavFormatError("no data chunk found", len(data))

    audio_format, channels, rate, _, _, bits = fmt
    if channels < 1:
        raise WavFormatError("zero channels", payload_offset)
    if audio_format == PCM_FORMAT and bits == 8:
        raw = np.frombuffer(payload, dtype=np.uint8)
        samples = (raw.astype(np.float64) - 128.0) / 128.0
    elif audio_format == PCM_FORMAT and bits == 16:
        raw = np.frombuffer(payload[: len(payload) - len(payload) % 2], dtype="<i2")
        samples = raw.astype(np.float64) / 32768.0
    elif audio_format == PCM_FORMAT and bits == 24:
        usable = len(payload) - len(payload) % 3
        raw = np.frombuffer(payload[:usable], dtype=np.uint8).reshape(-1, 3)
        value = (
            raw[:, 0].astype(np.int32)
            | raw[:, 1].astype(np.int32) << 8
            | raw[:, 2].astype(np.int32) << 16
        )
        value = np.where(value >= 1 << 23, value - (1 << 24), value)
        samples = value.astype(np.float64) / float(1 << 23)
    elif audio_format == FLOAT_FORMAT and bits == 32:
        raw = np.frombuffer(payload[: len(payload) - len(payload) % 4], dtype="<f4")
        samples = raw.astype(np.float64)
    else:
        raise WavFormatError(
            f"unsupported codec (format {audio_format}, {bits}-bit)", payload_offset
        )

    if channels > 1:
        frames = len(samples) // channels
        samples = samples[: frames * channels].reshape(frames, channels).mean(axis=1)
    return AudioClip(samples, rate, normalized=False)


def write_wav(clip: AudioClip) -> bytes:
    """Encode a clip as 16-bit mono PCM (fixture/export helper)."""
    scaled = np.clip(np.round(clip.samples * 32768.0), -32768, 32767).astype("<i2")
    payload = scaled.tobytes()
    header = struct.pack(
        "<4sI4s4sIHHIIHH4sI",
        b"RIFF", 36 + len(payload), b"WAVE",
        b"fmt ", 16, PCM_FORMAT, 1, clip.rate, clip.rate * 2, 2, 16,
        b"data", len(payload),
    )
    return header + payload


def _antialias_kernel(rate_in, target_rate, n_taps=127):
    """Windowed-sinc low-pass, cutoff 0.45*target_rate.

    The kernel support spans n_taps periods of the *target* rate and is
    discretized at the input rate, so the transition width is fixed in hertz
    regardless of the input rate.
    """
    cutoff = 0.45 * target_rate
    half = int(math.ceil((n_taps / 2) * rate_in / target_rate))
    k = np.arange(-half, half + 1) / rate_in
    kernel = 2.0 * cutoff / rate_in * np.sinc(2.0 * cutoff * k)
    kernel *= np.hamming(len(kernel))
    return kernel / kernel.sum()


def resample(clip: AudioClip, target_rate: int = 4000) -> AudioClip:
    """Low-pass filter and linearly interpolate down to target_rate."""
    if clip.rate < target_rate:
        raise ContractError(
            f"upsampling {clip.rate} -> {target_rate} Hz is not supported"
        )
    if clip.rate == target_rate:
        return AudioClip(clip.samples.copy(), clip.rate, clip.normalized)
    out_len = len(clip) * target_rate // clip.rate
    if out_len == 0:
        return AudioClip(np.empty(0), target_rate, clip.normalized)
    filtered = fftconvolve(clip.samples, _antialias_kernel(clip.rate, target_rate), mode="same")
    t_in = np.arange(len(clip)) / clip.rate
    t_out = np.arange(out_len) / target_rate
    return AudioClip(np.interp(t_out, t_in, filtered), target_rate, normalized=False)


def normalize(clip: AudioClip) -> AudioClip:
    """Peak-normalize to [-1, 1]; silence passes through, idempotent."""
    if len(clip) == 0:
        raise ContractError("cannot normalize an empty clip")
    peak = float(np.max(np.abs(clip.samples)))
    if not np.isfinite(peak):
        raise ContractError("clip contains non-finite samples")
    if peak == 0.0:
        return AudioClip(clip.samples.copy(), clip.rate, normalized=True)
    return AudioClip(clip.samples / peak, clip.rate, normalized=True)


def add_white_noise(clip: AudioClip, snr_db, seed) -> AudioClip:
    """Add seeded Gaussian noise at the requested SNR, then re-peak-normalize.

    snr_db = inf is the no-noise sentinel and returns the clip unchanged.
    """
    if not clip.normalized:
        raise ContractError("noise injection expects a normalized clip")
    if snr_db == math.inf:
        return AudioClip(clip.samples.copy(), clip.rate, normalized=True)
    if not np.isfinite(snr_db):
        raise ContractError("snr_db must be finite (or +inf for no noise)")
    signal_power = float(np.mean(clip.samples**2))
    if signal_power == 0.0:
        raise ContractError("SNR is undefined for a silent clip")
    noise_power = signal_power / 10.0 ** (snr_db / 10.0)
    rng = np.random.default_rng(seed)
    noisy = clip.samples + rng.normal(0.0, math.sqrt(noise_power), len(clip))
    return normalize(AudioClip(noisy, clip.rate))


def window_clip(clip: AudioClip, window_s=1.0):
    """Cut into non-overlapping windows of window_s seconds (tail dropped)."""
    win = int(round(window_s * clip.rate))
    if win <= 0:
        raise ContractError("window length must be positive")
    n_windows = len(clip) // win
    return [
        AudioClip(clip.samples[i * win:(i + 1) * win].copy(), clip.rate, clip.normalized)
        for i in range(n_windows)
    ]
