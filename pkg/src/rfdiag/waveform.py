"""QPSK baseband frame generation and feature packing.

Every dataset sample starts from one shared clean frame: Gray-mapped QPSK
symbols, rectangular-pulse oversampled, flattened to interleaved I/Q reals.
With the defaults (500 symbols, oversample 4, 2 kHz) the frame spans exactly
one second and packs into a 4000-wide feature vector. The frame is a pure
function of its seed, so regeneration is bit-identical.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Gray mapping indexed by the two symbol bits (b1 b0):
# 00 -> (+1+j)/sqrt2, 01 -> (-1+j)/sqrt2, 10 -> (+1-j)/sqrt2, 11 -> (-1-j)/sqrt2
QPSK_POINTS = np.array([1 + 1j, -1 + 1j, 1 - 1j, -1 - 1j], dtype=np.complex128) / np.sqrt(2.0)

DEFAULT_SAMPLE_RATE_HZ = 2000.0


@dataclass(frozen=True)
class WaveformConfig:
    """Parameters of the shared clean frame.

    sample_rate_hz defaults to symbol_count * oversample_factor per second, so
    a frequency offset in Hz reads directly as rotations per frame.
    """

    symbol_count: int = 500
    oversample_factor: int = 4
    seed: int = 0
    sample_rate_hz: float = DEFAULT_SAMPLE_RATE_HZ

    def __post_init__(self):
        if self.symbol_count <= 0:
            raise ValueError(f"symbol_count must be positive, got {self.symbol_count}")
        if self.oversample_factor <= 0:
            raise ValueError(f"oversample_factor must be positive, got {self.oversample_factor}")
        if not self.sample_rate_hz > 0:
            raise ValueError(f"sample_rate_hz must be positive, got {self.sample_rate_hz}")
        if self.seed < 0:
            raise ValueError(f"seed must be non-negative, got {self.seed}")

    @property
    def frame_length(self) -> int:
        return self.symbol_count * self.oversample_factor

    @property
    def feature_width(self) -> int:
        return 2 * self.frame_length


@dataclass(frozen=True)
class ComplexFrame:
    """A baseband signal: non-empty 1-D complex128 samples plus sample rate."""

    samples: np.ndarray
    sample_rate_hz: float

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.complex128)
        object.__setattr__(self, "samples", samples)
        if samples.ndim != 1 or samples.size == 0:
            raise ValueError("samples must be a non-empty 1-D array")
        if not np.all(np.isfinite(samples)):
            raise ValueError("samples must be finite")
        if not self.sample_rate_hz > 0:
            raise ValueError(f"sample_rate_hz must be positive, got {self.sample_rate_hz}")

    def __len__(self) -> int:
        return self.samples.size


def generate_symbols(count: int, seed: int) -> np.ndarray:
    """Draw `count` Gray-mapped QPSK symbols from a seeded uniform bit stream.

    Each result is one of the four unit-energy points of QPSK_POINTS; the
    sequence is deterministic for a fixed seed.
    """
    if count <= 0:
        raise ValueError(f"count must be positive, got {count}")
    rng = np.random.default_rng(seed)
    return QPSK_POINTS[rng.integers(0, 4, size=count)]


def oversample(symbols, factor: int, sample_rate_hz: float = DEFAULT_SAMPLE_RATE_HZ) -> ComplexFrame:
    """Repeat each symbol `factor` consecutive times (rectangular pulse)."""
    symbols = np.asarray(symbols, dtype=np.complex128)
    if symbols.size == 0:
        raise ValueError("symbols must be non-empty")
    if factor < 1:
        raise ValueError(f"factor must be >= 1, got {factor}")
    return ComplexFrame(np.repeat(symbols, factor), sample_rate_hz)


def generate_frame(config: WaveformConfig | None = None) -> ComplexFrame:
    """Build the shared clean frame for a configuration (defaults if omitted)."""
    if config is None:
        config = WaveformConfig()
    symbols = generate_symbols(config.symbol_count, config.seed)
    return oversample(symbols, config.oversample_factor, config.sample_rate_hz)


def frame_to_features(frame: ComplexFrame) -> np.ndarray:
    """Flatten a frame to interleaved reals [re0, im0, re1, im1, ...]."""
    features = np.empty(2 * len(frame), dtype=np.float64)
    features[0::2] = frame.samples.real
    features[1::2] = frame.samples.imag
    return features


def features_to_frame(features, sample_rate_hz: float = DEFAULT_SAMPLE_RATE_HZ) -> ComplexFrame:
    """Inverse of frame_to_features."""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 1 or features.size == 0 or features.size % 2:
        raise ValueError("features must be a non-empty 1-D array of even length")
    return ComplexFrame(features[0::2] + 1j * features[1::2], sample_rate_hz)
