"""Walk through the canonical transmit frame, from symbols to feature vector.

Run:  python3 demos/01_clean_qpsk_frame.py
"""

import numpy as np

from rfdiag.waveform import (
    QPSK_POINTS,
    WaveformConfig,
    frame_to_features,
    generate_frame,
)

config = WaveformConfig()
print("frame geometry")
print(f"  {config.symbol_count} QPSK symbols x oversample {config.oversample_factor}"
      f" = {config.frame_length} complex samples")
print(f"  sample rate {config.sample_rate_hz:.0f} Hz -> "
      f"{config.frame_length / config.sample_rate_hz:.1f} s of signal")
print(f"  interleaved I/Q feature width: {config.feature_width}")

print("\nconstellation points (unit energy, one per quadrant):")
for p in QPSK_POINTS:
    print(f"  {p.real:+.4f} {p.imag:+.4f}j   |.|={abs(p):.4f}")

frame = generate_frame(config)
counts = {p: int(np.sum(np.isclose(frame.samples, p))) for p in QPSK_POINTS}
print("\nsample counts per point (seeded symbol draw, so these are fixed):")
for p, c in counts.items():
    print(f"  {p.real:+.3f}{p.imag:+.3f}j : {c}")

features = frame_to_features(frame)
print(f"\nfeature vector: shape {features.shape}, dtype {features.dtype}")
print(f"  features[0:6] = {np.round(features[:6], 4)}")
print("  (even indices are I, odd indices are Q, sample by sample)")

# oversampling means each symbol occupies 4 consecutive samples
block = frame.samples[:8]
print(f"\nfirst 8 samples show 4x repetition:\n  {np.round(block, 3)}")
