"""Deterministic signal synthesis and dataset bookkeeping.

Labeled desk-scale suites stand in for the urban/wake-word/digit corpora:
each class is a parametrized signal family and per-clip variation comes from
a seeded RNG, so any suite is reproducible from (name, seed) alone.
"""

import csv
import io
from dataclasses import dataclass, field, replace

import numpy as np

from .audio import AudioClip, normalize
from .errors import ContractError

KINDS = ("tone", "chirp", "am_tone", "noise_band", "siren", "mixture")
SPLITS = ("train", "test", "unassigned")


@dataclass(frozen=True)
class SynthSpec:
    """One synthesizable signal.

    kind-specific fields: tone uses freq/phase; chirp sweeps freq -> freq_end;
    am_tone modulates carrier freq at mod_rate with depth mod_depth;
    noise_band keeps seeded white noise inside band=(lo, hi) Hz; siren sweeps
    freq <-> freq_end as a triangle at mod_rate cycles/s; mixture sums
    components (spec, amplitude, start_s) on a shared timeline, then
    peak-normalizes.
    """

    kind: str
    duration: float
    seed: int = 0
    freq: float = 0.0
    freq_end: float = 0.0
    mod_rate: float = 0.0
    mod_depth: float = 1.0
    band: tuple = ()
    phase: float = 0.0
    components: tuple = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ContractError(f"unknown synth kind {self.kind!r}")
        if self.kind != "mixture" and not self.duration > 0:
            raise ContractError("duration must be positive")


def _check_below_nyquist(rate, *freqs):
    for f in freqs:
        if f >= rate / 2:
            raise ContractError(f"frequency {f} Hz is not below Nyquist ({rate / 2} Hz)")


def synthesize(spec: SynthSpec, rate: int) -> AudioClip:
    """Render a spec at the given rate. Mixtures come back peak-normalized."""
    n = int(round(spec.duration * rate))
    t = np.arange(n) / rate

    if spec.kind == "tone":
        _check_below_nyquist(rate, spec.freq)
        samples = np.sin(2 * np.pi * spec.freq * t + spec.phase)

    elif spec.kind == "chirp":
        _check_below_nyquist(rate, spec.freq, spec.freq_end)
        sweep = (spec.freq_end - spec.freq) / spec.duration
        samples = np.sin(2 * np.pi * (spec.freq * t + 0.5 * sweep * t * t) + spec.phase)

    elif spec.kind == "am_tone":
        _check_below_nyquist(rate, spec.freq, spec.mod_rate)
        envelope = 1.0 + spec.mod_depth * np.sin(2 * np.pi * spec.mod_rate * t)
        samples = envelope / (1.0 + spec.mod_depth) * np.sin(
            2 * np.pi * spec.freq * t + spec.phase
        )

    elif spec.kind == "noise_band":
        lo, hi = spec.band
        _check_below_nyquist(rate, hi)
        if not 0 <= lo < hi:
            raise ContractError(f"invalid band {spec.band}")
        rng = np.random.default_rng(spec.seed)
        white = rng.normal(0.0, 1.0, n)
        spectrum = np.fft.rfft(white)
        freqs = np.fft.rfftfreq(n, 1.0 / rate)
        spectrum[(freqs < lo) | (freqs > hi)] = 0.0
        samples = np.fft.irfft(spectrum, n)

    elif spec.kind == "siren":
        _check_below_nyquist(rate, spec.freq, spec.freq_end)
        # Triangle-swept instantaneous frequency between freq and freq_end.
        saw = (t * spec.mod_rate) % 1.0
        tri = 1.0 - np.abs(2.0 * saw - 1.0)
        inst_freq = spec.freq + (spec.freq_end - spec.freq) * tri
        phase = 2 * np.pi * np.cumsum(inst_freq) / rate + spec.phase
        samples = np.sin(phase)

    else:  # mixture
        if not spec.components:
            raise ContractError("mixture needs at least one component")
        end = max(sub.duration + start for sub, _, start in spec.components)
        total = np.zeros(int(round(end * rate)))
        for sub, amplitude, start in spec.components:
            rendered = synthesize(sub, rate)
            i0 = int(round(start * rate))
            total[i0:i0 + len(rendered)] += amplitude * rendered.samples
        return normalize(AudioClip(total, rate))

    return AudioClip(samples, rate, normalized=False)


@dataclass(frozen=True)
class ManifestEntry:
    source: object  # WAV path (str) or SynthSpec
    label: str
    split: str = "unassigned"


@dataclass
class DatasetManifest:
    entries: list
    class_names: list
    seed: int = 0

    def __post_init__(self):
        names = set(self.class_names)
        for e in self.entries:
            if e.label not in names:
                raise ContractError(f"label {e.label!r} not in class_names")
            if e.split not in SPLITS:
                raise ContractError(f"bad split tag {e.split!r}")

    def subset(self, split):
        return [e for e in self.entries if e.split == split]


def split_dataset(manifest: DatasetManifest, train_fraction=0.8, seed=0) -> DatasetManifest:
    """Stratified shuffle split; round(train_fraction * n) per class to train."""
    by_class = {name: [] for name in manifest.class_names}
    for i, e in enumerate(manifest.entries):
        by_class[e.label].append(i)
    for name, idxs in by_class.items():
        if 0 < len(idxs) < 5:
            raise ContractError(f"class {name!r} has {len(idxs)} entries, need >= 5")

    splits = ["unassigned"] * len(manifest.entries)
    rng = np.random.default_rng(seed)
    for name in manifest.class_names:
        idxs = np.array(by_class[name], dtype=int)
        rng.shuffle(idxs)
        n_train = int(np.floor(train_fraction * len(idxs) + 0.5))
        for j, i in enumerate(idxs):
            splits[i] = "train" if j < n_train else "test"

    entries = [replace(e, split=s) for e, s in zip(manifest.entries, splits)]
    return DatasetManifest(entries, list(manifest.class_names), seed=seed)


def write_manifest_csv(manifest: DatasetManifest) -> str:
    """CSV with a class-name comment line, a path,label header, then rows."""
    buf = io.StringIO()
    buf.write("# classes: " + ",".join(manifest.class_names) + "\n")
    writer = csv.writer(buf)
    writer.writerow(["path", "label"])
    for e in manifest.entries:
        if not isinstance(e.source, str):
            raise ContractError("only file-backed entries can be written to CSV")
        writer.writerow([e.source, e.label])
    return buf.getvalue()


def read_manifest_csv(text: str) -> DatasetManifest:
    lines = text.splitlines()
    class_names = None
    if lines and lines[0].startswith("# classes:"):
        class_names = [c.strip() for c in lines[0].split(":", 1)[1].split(",") if c.strip()]
        lines = lines[1:]
    rows = list(csv.reader(lines))
    if not rows or [c.strip() for c in rows[0]] != ["path", "label"]:
        raise ContractError("manifest CSV must start with a path,label header")
    entries = [ManifestEntry(path, label) for path, label in rows[1:] if path]
    if class_names is None:
        seen = []
        for e in entries:
            if e.label not in seen:
                seen.append(e.label)
        class_names = seen
    return DatasetManifest(entries, class_names)


def _jitter(rng, lo, hi):
    return float(rng.uniform(lo, hi))


def build_suite(name, clips_per_class, duration=1.0, seed=0) -> DatasetManifest:
    """Built-in synthetic suites.

    "tones4": tone / up-chirp / AM tone / broadband noise.
    "tones4b": a second 4-class task in different parameter regimes, used for
    reconfiguration runs.
    """
    if name == "tones4":
        classes = {
            "tone": lambda rng: SynthSpec(
                "tone", duration, freq=_jitter(rng, 350, 450),
                phase=_jitter(rng, 0, 2 * np.pi)),
            "chirp": lambda rng: SynthSpec(
                "chirp", duration, freq=_jitter(rng, 180, 260),
                freq_end=_jitter(rng, 700, 900), phase=_jitter(rng, 0, 2 * np.pi)),
            "am": lambda rng: SynthSpec(
                "am_tone", duration, freq=_jitter(rng, 550, 650),
                mod_rate=_jitter(rng, 4, 8), mod_depth=1.0,
                phase=_jitter(rng, 0, 2 * np.pi)),
            "noise": lambda rng: SynthSpec(
                "noise_band", duration, band=(100.0, _jitter(rng, 1200, 1600)),
                seed=int(rng.integers(2**31))),
        }
    elif name == "tones4b":
        classes = {
            "hitone": lambda rng: SynthSpec(
                "tone", duration, freq=_jitter(rng, 1100, 1300),
                phase=_jitter(rng, 0, 2 * np.pi)),
            "downchirp": lambda rng: SynthSpec(
                "chirp", duration, freq=_jitter(rng, 900, 1100),
                freq_end=_jitter(rng, 150, 250), phase=_jitter(rng, 0, 2 * np.pi)),
            "siren": lambda rng: SynthSpec(
                "siren", duration, freq=_jitter(rng, 400, 500),
                freq_end=_jitter(rng, 900, 1100), mod_rate=_jitter(rng, 1.5, 3.0)),
            "fastam": lambda rng: SynthSpec(
                "am_tone", duration, freq=_jitter(rng, 700, 800),
                mod_rate=_jitter(rng, 20, 30), mod_depth=1.0,
                phase=_jitter(rng, 0, 2 * np.pi)),
        }
    else:
        raise ContractError(f"unknown suite {name!r}")

    entries = []
    for ci, (label, make) in enumerate(classes.items()):
        for k in range(clips_per_class):
            rng = np.random.default_rng(np.random.SeedSequence([seed, ci, k]))
            entries.append(ManifestEntry(make(rng), label))
    return DatasetManifest(entries, list(classes.keys()), seed=seed)
