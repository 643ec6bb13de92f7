"""Apply each front-end impairment in isolation and show what it does to the
constellation: gain imbalance squashes, quadrature offset shears, phase noise
rotates, frequency offset smears around the circle, and I/Q offset translates.

Run:  python3 demos/02_impairment_gallery.py
"""

import numpy as np

from rfdiag.impairments import (
    ImpairmentParams,
    apply_chain,
    gain_imbalance_percent,
)
from rfdiag.waveform import WaveformConfig, generate_frame

clean = generate_frame(WaveformConfig(symbol_count=200, seed=0))


def describe(name, params):
    out = apply_chain(clean, params)
    pts = out.samples
    print(f"{name:<28} centroid ({np.mean(pts.real):+.3f}, {np.mean(pts.imag):+.3f})"
          f"  |.| range [{np.abs(pts).min():.3f}, {np.abs(pts).max():.3f}]"
          f"  distinct points ~{len(np.unique(np.round(pts, 6)))}")


describe("clean", ImpairmentParams())

describe("gain imbalance Ig=1.6", ImpairmentParams(i_gain=1.6))
print(f"    imbalance metric: {gain_imbalance_percent(1.6, 1.0):.0f}%")

describe("quadrature offset 45 deg", ImpairmentParams(quad_offset_deg=45.0))
print("    I picks up a component of Q: the square shears into a rhombus")

describe("phase noise 68 deg", ImpairmentParams(phase_noise_deg=68.0))
print("    rigid rotation: 4 points, magnitudes untouched")

describe("frequency offset 42 Hz", ImpairmentParams(freq_offset_hz=42.0))
print("    rotation angle grows with sample index: points smear into a circle")

describe("I/Q offset (-0.32, +0.45)", ImpairmentParams(i_offset=-0.32, q_offset=0.45))
print("    pure translation: centroid lands on the offset")

# Everything at once, the pathological-transmitter look
allp = ImpairmentParams(i_gain=0.65, q_gain=0.42, quad_offset_deg=60.0,
                        phase_noise_deg=68.0, freq_offset_hz=42.0,
                        i_offset=-0.32, q_offset=0.45)
describe("all five together", allp)
print("    (the CLI `constellation` subcommand dumps these point clouds as CSV)")
