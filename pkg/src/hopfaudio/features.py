"""Feature maps: atanh activation, skip-sampling, Mel baseline, distances.

A Hopf feature map is the reservoir's (4000, N) response activated with
inverse hyperbolic tangent, decimated to 200 time rows and min-max rescaled
into [0, 1]. The Mel spectrogram plays the legacy-baseline role with the same
[0, 1] convention so maps from either space can be compared after
cell-count normalization.
"""

from dataclasses import dataclass

import numpy as np

from .audio import AudioClip
from .errors import ContractError
from .reservoir import ReservoirResponse

HOPF_KIND = "hopf-virtual-nodes"
MEL_KIND = "mel-bands"
TIME_ROWS = 200


@dataclass(frozen=True)
class ActivationConfig:
    apply_atanh: bool = True
    clamp_margin: float = 1e-3

    def __post_init__(self):
        if not 0 < self.clamp_margin < 1:
            raise ContractError("clamp_margin must be in (0, 1)")


@dataclass
class FeatureMap:
    grid: np.ndarray
    kind: str
    source_id: str = ""

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=np.float64)
        if self.grid.ndim != 2:
            raise ContractError("feature map grid must be 2-D")

    @property
    def shape(self):
        return self.grid.shape


def atanh_activate(matrix, cfg: ActivationConfig = ActivationConfig()):
    """Peak-scale to [-1, 1], clamp to 1 - margin, apply atanh.

    With apply_atanh off only the peak scaling happens (the "no activation"
    experiment variant). An all-zero matrix passes through unchanged.
    """
    matrix = np.asarray(matrix, dtype=np.float64)
    if not np.all(np.isfinite(matrix)):
        raise ContractError("activation input must be finite")
    peak = np.max(np.abs(matrix)) if matrix.size else 0.0
    if peak == 0.0:
        return matrix.copy()
    scaled = matrix / peak
    if not cfg.apply_atanh:
        return scaled
    limit = 1.0 - cfg.clamp_margin
    return np.arctanh(np.clip(scaled, -limit, limit))


def skip_sample_rows(matrix, factor):
    """Pure decimation: row i of the output is row factor*i of the input."""
    if factor < 1:
        raise ContractError("skip factor must be >= 1")
    return matrix[::factor]


def rescale01(matrix):
    """Min-max rescale to [0, 1]; constant input maps to all 0.5."""
    lo, hi = float(np.min(matrix)), float(np.max(matrix))
    if hi == lo:
        return np.full_like(matrix, 0.5)
    return (matrix - lo) / (hi - lo)


def assemble_feature_map(resp: ReservoirResponse, cfg: ActivationConfig = ActivationConfig(),
                         source_id="") -> FeatureMap:
    """Activate, skip-sample 4000 -> 200 rows, rescale to [0, 1]."""
    rows = resp.matrix.shape[0]
    if rows != resp.audio_rate or rows % TIME_ROWS != 0:
        raise ContractError(
            f"expected a 1 s response ({resp.audio_rate} rows), got {rows}"
        )
    activated = atanh_activate(resp.matrix, cfg)
    decimated = skip_sample_rows(activated, rows // TIME_ROWS)
    return FeatureMap(rescale01(decimated), HOPF_KIND, source_id)


def hz_to_mel(freq_hz):
    return 2595.0 * np.log10(1.0 + np.asarray(freq_hz, dtype=np.float64) / 700.0)


def mel_to_hz(mel):
    return 700.0 * (10.0 ** (np.asarray(mel, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(n_fft, n_bands, rate):
    """Triangular filters on mel-spaced centers from 0 to Nyquist.

    Returns (filters, centers_hz) where filters has shape
    (n_bands, n_fft // 2 + 1). Filters are unnormalized triangles.
    """
    edges_hz = mel_to_hz(np.linspace(0.0, hz_to_mel(rate / 2.0), n_bands + 2))
    bin_hz = np.fft.rfftfreq(n_fft, 1.0 / rate)
    filters = np.zeros((n_bands, len(bin_hz)))
    for b in range(n_bands):
        left, center, right = edges_hz[b], edges_hz[b + 1], edges_hz[b + 2]
        up = (bin_hz - left) / (center - left)
        down = (right - bin_hz) / (right - center)
        filters[b] = np.maximum(0.0, np.minimum(up, down))
    return filters, edges_hz[1:-1]


def mel_spectrogram(clip: AudioClip, n_bands=100, hop_s=0.025, source_id="") -> FeatureMap:
    """Non-overlapping Hann frames -> power spectrum -> mel log-energies.

    Rows are frames, columns the n_bands mel bands; the whole map is min-max
    rescaled to [0, 1].
    """
    frame_len = int(round(hop_s * clip.rate))
    if len(clip) < frame_len or frame_len < 2:
        raise ContractError(
            f"clip of {len(clip)} samples is shorter than one {frame_len}-sample frame"
        )
    n_frames = len(clip) // frame_len
    frames = clip.samples[: n_frames * frame_len].reshape(n_frames, frame_len)
    spectra = np.abs(np.fft.rfft(frames * np.hanning(frame_len), axis=1)) ** 2
    filters, _ = mel_filterbank(frame_len, n_bands, clip.rate)
    energies = np.log(spectra @ filters.T + 1e-12)
    return FeatureMap(rescale01(energies), MEL_KIND, source_id)


def _grid(map_or_array):
    return map_or_array.grid if isinstance(map_or_array, FeatureMap) else np.asarray(map_or_array)


def euclidean_distance(a, b):
    """Frobenius norm of the elementwise difference of two same-shape maps."""
    ga, gb = _grid(a), _grid(b)
    if ga.shape != gb.shape:
        raise ContractError(f"shape mismatch {ga.shape} vs {gb.shape}")
    return float(np.linalg.norm(ga - gb))


def normalized_distance(a, b):
    """Euclidean distance divided by sqrt(cell count), for cross-space comparison."""
    ga = _grid(a)
    return euclidean_distance(a, b) / np.sqrt(ga.size)


def export_pgm(fmap: FeatureMap) -> bytes:
    """Binary 8-bit PGM (P5), one byte per cell, row-major."""
    grid = fmap.grid
    rows, cols = grid.shape
    payload = np.clip(np.rint(grid * 255.0), 0, 255).astype(np.uint8)
    return f"P5\n{cols} {rows}\n255\n".encode("ascii") + payload.tobytes()
