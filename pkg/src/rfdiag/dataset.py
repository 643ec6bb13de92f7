"""Labeled dataset generation and binary serialization.

Impairment parameters are drawn per sample from counter-based random streams
keyed by (master_seed, sample_index), so parallel generation is bit-identical
to sequential generation. Binary labels flag each front-end component whose
impairment magnitude exceeds the quality-tier threshold.
"""

from __future__ import annotations

import enum
import json
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .impairments import PARAM_FIELDS, ImpairmentParams, apply_chain, gain_imbalance_percent
from .waveform import WaveformConfig, frame_to_features, generate_frame

COMPONENTS = ("filter", "ps", "lo", "mixer")

# Uniform draw ranges shared by every tier.
GI_RANGE = (0.0, 1.0)
QO_RANGE_DEG = (-90.0, 90.0)
PN_RANGE_DEG = (0.0, 90.0)
FO_RANGE_HZ = (0.0, 100.0)
IQ_OFFSET_RANGE = (-0.5, 0.5)


class QualityTier(enum.Enum):
    HIGH = "high"
    MIDDLE = "middle"
    LOW = "low"


@dataclass(frozen=True)
class Thresholds:
    """Per-tier decision boundaries; a component is distorted above them."""

    gi_threshold: float
    qo_threshold_deg: float
    pn_threshold_deg: float
    fo_threshold_hz: float
    iqo_threshold: float

    def __post_init__(self):
        for name in ("gi_threshold", "qo_threshold_deg", "pn_threshold_deg",
                     "fo_threshold_hz", "iqo_threshold"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


TIER_THRESHOLDS = {
    QualityTier.HIGH: Thresholds(0.2, 20.0, 20.0, 20.0, 0.1),
    QualityTier.MIDDLE: Thresholds(0.4, 40.0, 40.0, 40.0, 0.2),
    QualityTier.LOW: Thresholds(0.6, 60.0, 60.0, 60.0, 0.3),
}

_TIER_CODES = {QualityTier.HIGH: 0, QualityTier.MIDDLE: 1, QualityTier.LOW: 2}
_CODE_TIERS = {code: tier for tier, code in _TIER_CODES.items()}


@dataclass(frozen=True)
class LabelVector:
    """One distortion bit per component, in COMPONENTS order."""

    filter: int
    ps: int
    lo: int
    mixer: int

    def __post_init__(self):
        for name in COMPONENTS:
            if getattr(self, name) not in (0, 1):
                raise ValueError(f"{name} label must be 0 or 1")

    def to_array(self) -> np.ndarray:
        return np.array([self.filter, self.ps, self.lo, self.mixer], dtype=np.uint8)

    @classmethod
    def from_array(cls, values) -> "LabelVector":
        values = np.asarray(values)
        if values.shape != (len(COMPONENTS),):
            raise ValueError(f"expected {len(COMPONENTS)} labels, got shape {values.shape}")
        return cls(*(int(v) for v in values))


@dataclass(frozen=True)
class DatasetConfig:
    tier: QualityTier
    total_samples: int = 60000
    split: tuple[int, int, int] = (40000, 10000, 10000)
    master_seed: int = 0
    waveform: WaveformConfig = WaveformConfig()

    def __post_init__(self):
        if self.total_samples <= 0:
            raise ValueError(f"total_samples must be positive, got {self.total_samples}")
        if len(self.split) != 3 or any(int(s) != s or s < 0 for s in self.split):
            raise ValueError(f"split must be three non-negative integers, got {self.split}")
        if self.split[0] < 1:
            raise ValueError("train split must hold at least one sample")
        if sum(self.split) != self.total_samples:
            raise ValueError(
                f"split {self.split} sums to {sum(self.split)}, not total_samples={self.total_samples}"
            )
        if self.master_seed < 0:
            raise ValueError(f"master_seed must be non-negative, got {self.master_seed}")

    def to_dict(self) -> dict:
        return {
            "tier": self.tier.value,
            "total_samples": self.total_samples,
            "split": list(self.split),
            "master_seed": self.master_seed,
            "waveform": {
                "symbol_count": self.waveform.symbol_count,
                "oversample_factor": self.waveform.oversample_factor,
                "seed": self.waveform.seed,
                "sample_rate_hz": self.waveform.sample_rate_hz,
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DatasetConfig":
        return cls(
            tier=QualityTier(data["tier"]),
            total_samples=int(data["total_samples"]),
            split=tuple(int(s) for s in data["split"]),
            master_seed=int(data["master_seed"]),
            waveform=WaveformConfig(**data["waveform"]),
        )


def _sample_rng(master_seed: int, sample_index: int) -> np.random.Generator:
    # Counter-based stream: block offset sample_index << 128 gives every sample
    # a disjoint 2**128-block slice of the Philox sequence.
    return np.random.default_rng(np.random.Philox(key=master_seed, counter=sample_index << 128))


def draw_params(sample_index: int, master_seed: int) -> ImpairmentParams:
    """Draw one impairment parameter set, deterministic in (master_seed, index).

    The gain-imbalance scalar g is uniform on GI_RANGE and mapped to
    i_gain = 1 + g with q_gain = 1, so the imbalance percentage is g*100.
    """
    rng = _sample_rng(master_seed, sample_index)
    g = rng.uniform(*GI_RANGE)
    return ImpairmentParams(
        i_gain=1.0 + g,
        q_gain=1.0,
        quad_offset_deg=rng.uniform(*QO_RANGE_DEG),
        phase_noise_deg=rng.uniform(*PN_RANGE_DEG),
        freq_offset_hz=rng.uniform(*FO_RANGE_HZ),
        i_offset=rng.uniform(*IQ_OFFSET_RANGE),
        q_offset=rng.uniform(*IQ_OFFSET_RANGE),
    )


def label(params: ImpairmentParams, tier: QualityTier) -> LabelVector:
    """Flag each component whose impairment exceeds the tier threshold.

    The oscillator is implicated by either of its two symptoms (phase noise,
    frequency offset); the mixer by either offset magnitude.
    """
    thr = TIER_THRESHOLDS[tier]
    gi = gain_imbalance_percent(params.i_gain, params.q_gain) / 100.0
    return LabelVector(
        filter=int(gi > thr.gi_threshold),
        ps=int(abs(params.quad_offset_deg) > thr.qo_threshold_deg),
        lo=int(
            params.phase_noise_deg > thr.pn_threshold_deg
            or params.freq_offset_hz > thr.fo_threshold_hz
        ),
        mixer=int(
            abs(params.i_offset) > thr.iqo_threshold
            or abs(params.q_offset) > thr.iqo_threshold
        ),
    )


@dataclass(frozen=True)
class SplitView:
    features: np.ndarray
    labels: np.ndarray
    params: np.ndarray

    def __len__(self) -> int:
        return self.features.shape[0]


@dataclass
class Dataset:
    """In-memory dataset: float32 features, uint8 labels, float64 params.

    Rows are ordered by sample index; splits are contiguous ranges in
    train/validation/test order.
    """

    config: DatasetConfig
    features: np.ndarray
    labels: np.ndarray
    params: np.ndarray

    SPLITS = ("train", "validation", "test")

    @property
    def feature_width(self) -> int:
        return self.features.shape[1]

    def split_slice(self, name: str) -> slice:
        if name not in self.SPLITS:
            raise ValueError(f"unknown split {name!r}; expected one of {self.SPLITS}")
        train, val, _ = self.config.split
        starts = {"train": 0, "validation": train, "test": train + val}
        sizes = dict(zip(self.SPLITS, self.config.split))
        start = starts[name]
        return slice(start, start + sizes[name])

    def split(self, name: str) -> SplitView:
        s = self.split_slice(name)
        return SplitView(self.features[s], self.labels[s], self.params[s])


def generate_dataset(config: DatasetConfig, threads: int = 1) -> Dataset:
    """Generate all samples of `config` from the single shared clean frame.

    Per sample i: params = draw_params(i, master_seed), features are the
    interleaved I/Q of the distorted frame (stored float32), labels re-derive
    from params and tier. The result is a pure function of `config`; `threads`
    only fans the fill loop out over index chunks.
    """
    clean = generate_frame(config.waveform)
    n = config.total_samples
    width = config.waveform.feature_width
    features = np.empty((n, width), dtype=np.float32)
    labels = np.empty((n, len(COMPONENTS)), dtype=np.uint8)
    params = np.empty((n, len(PARAM_FIELDS)), dtype=np.float64)

    def fill(start: int, stop: int) -> None:
        for i in range(start, stop):
            p = draw_params(i, config.master_seed)
            distorted = apply_chain(clean, p)
            features[i] = frame_to_features(distorted)
            labels[i] = label(p, config.tier).to_array()
            params[i] = p.as_array()

    if threads <= 1:
        fill(0, n)
    else:
        chunk = max(1, -(-n // threads))
        bounds = [(lo, min(lo + chunk, n)) for lo in range(0, n, chunk)]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for future in [pool.submit(fill, lo, hi) for lo, hi in bounds]:
                future.result()

    return Dataset(config, features, labels, params)


class DatasetFormatError(Exception):
    """Raised when a dataset file fails magic, version, or length checks."""


DATASET_MAGIC = b"RFD1"
DATASET_VERSION = 1

# Little-endian header: magic, version, total/train/validation/test counts,
# feature width, label width, tier code, master seed, then the waveform
# fields (symbol count, oversample factor, seed, sample rate) so the config
# round-trips losslessly. The JSON sidecar duplicates the config for humans.
_HEADER = struct.Struct("<4sIQQQQIIIQIIQd")


def _record_dtype(feature_width: int) -> np.dtype:
    return np.dtype(
        [
            ("features", "<f4", (feature_width,)),
            ("labels", "u1", (len(COMPONENTS),)),
            ("params", "<f8", (len(PARAM_FIELDS),)),
        ]
    )


def write_dataset(dataset: Dataset, path, chunk_samples: int = 2048) -> None:
    """Write the binary dataset file plus its JSON config sidecar."""
    config = dataset.config
    n = config.total_samples
    width = dataset.feature_width
    header = _HEADER.pack(
        DATASET_MAGIC,
        DATASET_VERSION,
        n,
        config.split[0],
        config.split[1],
        config.split[2],
        width,
        len(COMPONENTS),
        _TIER_CODES[config.tier],
        config.master_seed,
        config.waveform.symbol_count,
        config.waveform.oversample_factor,
        config.waveform.seed,
        config.waveform.sample_rate_hz,
    )
    rec_dtype = _record_dtype(width)
    with open(path, "wb") as f:
        f.write(header)
        for lo in range(0, n, chunk_samples):
            hi = min(lo + chunk_samples, n)
            block = np.empty(hi - lo, dtype=rec_dtype)
            block["features"] = dataset.features[lo:hi]
            block["labels"] = dataset.labels[lo:hi]
            block["params"] = dataset.params[lo:hi]
            f.write(block.tobytes())
    with open(f"{path}.json", "w") as f:
        json.dump({"format": DATASET_MAGIC.decode(), "version": DATASET_VERSION,
                   "config": config.to_dict()}, f, indent=2)
        f.write("\n")


def read_dataset(path) -> Dataset:
    """Read a dataset file back; raises DatasetFormatError on any corruption."""
    with open(path, "rb") as f:
        header = f.read(_HEADER.size)
        if len(header) < _HEADER.size:
            raise DatasetFormatError(
                f"file ends at byte {len(header)}; expected a {_HEADER.size}-byte header"
            )
        (magic, version, total, train, val, test, width, label_width, tier_code,
         master_seed, symbol_count, oversample_factor, waveform_seed,
         sample_rate_hz) = _HEADER.unpack(header)
        if magic != DATASET_MAGIC:
            raise DatasetFormatError(f"bad magic {magic!r} at byte 0; expected {DATASET_MAGIC!r}")
        if version != DATASET_VERSION:
            raise DatasetFormatError(
                f"unsupported version {version} at byte 4; expected {DATASET_VERSION}"
            )
        if train + val + test != total:
            raise DatasetFormatError(
                f"split counts {train}/{val}/{test} at byte 16 do not sum to total {total}"
            )
        if label_width != len(COMPONENTS):
            raise DatasetFormatError(f"label width {label_width} at byte 52; expected {len(COMPONENTS)}")
        if tier_code not in _CODE_TIERS:
            raise DatasetFormatError(f"unknown tier code {tier_code} at byte 56")
        config = DatasetConfig(
            tier=_CODE_TIERS[tier_code],
            total_samples=total,
            split=(train, val, test),
            master_seed=master_seed,
            waveform=WaveformConfig(symbol_count, oversample_factor, waveform_seed, sample_rate_hz),
        )
        if width != config.waveform.feature_width:
            raise DatasetFormatError(
                f"feature width {width} at byte 48 does not match waveform "
                f"fields ({config.waveform.feature_width})"
            )
        rec_dtype = _record_dtype(width)
        records = np.fromfile(f, dtype=rec_dtype, count=total)
        if records.size < total:
            raise DatasetFormatError(
                f"file truncated at byte {_HEADER.size + records.size * rec_dtype.itemsize}; "
                f"expected {total} records ({_HEADER.size + total * rec_dtype.itemsize} bytes)"
            )
        if f.read(1):
            raise DatasetFormatError(
                f"trailing data at byte {_HEADER.size + total * rec_dtype.itemsize}"
            )
    return Dataset(config, records["features"], records["labels"], records["params"])
