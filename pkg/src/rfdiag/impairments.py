"""Deterministic transmitter impairment models over a complex baseband frame.

Five impairments, each the signature of one front-end component:

    gain imbalance      (band-pass filter)  unequal I/Q branch gains
    quadrature offset   (phase shifter)     I/Q branch angle off 90 degrees
    phase noise         (local oscillator)  constant rotation of every sample
    frequency offset    (local oscillator)  rotation growing with sample index
    I/Q offset          (mixer)             additive DC shift

All stages are pure and total on finite inputs: they return new frames and
never mutate their argument, so they are safe to apply concurrently across
frames.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, fields

import numpy as np

from .waveform import ComplexFrame

PARAM_FIELDS = (
    "i_gain",
    "q_gain",
    "quad_offset_deg",
    "phase_noise_deg",
    "freq_offset_hz",
    "i_offset",
    "q_offset",
)


@dataclass(frozen=True)
class ImpairmentParams:
    """The seven scalar knobs of the impairment chain.

    Defaults are the identity setting: chaining with them returns the input
    unchanged.
    """

    i_gain: float = 1.0
    q_gain: float = 1.0
    quad_offset_deg: float = 0.0
    phase_noise_deg: float = 0.0
    freq_offset_hz: float = 0.0
    i_offset: float = 0.0
    q_offset: float = 0.0

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not np.isfinite(value):
                raise ValueError(f"{f.name} must be finite, got {value}")
        if self.i_gain <= 0 or self.q_gain <= 0:
            raise ValueError(
                f"gains must be positive, got i_gain={self.i_gain}, q_gain={self.q_gain}"
            )

    def as_array(self) -> np.ndarray:
        """Field values in PARAM_FIELDS order, float64."""
        return np.array([getattr(self, name) for name in PARAM_FIELDS], dtype=np.float64)

    @classmethod
    def from_array(cls, values) -> "ImpairmentParams":
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (len(PARAM_FIELDS),):
            raise ValueError(f"expected {len(PARAM_FIELDS)} values, got shape {values.shape}")
        return cls(**dict(zip(PARAM_FIELDS, (float(v) for v in values))))


def apply_gain_imbalance_qo(
    frame: ComplexFrame, i_gain: float, q_gain: float, quad_offset_deg: float
) -> ComplexFrame:
    """Scale the I/Q branches and fold Q toward I by the quadrature angle psi.

    Per-sample baseband mapping:

        out = i_gain*re + q_gain*im*sin(psi) + j * q_gain*im*cos(psi)

    i.e. the up-converted signal with a psi-skewed sine branch projected back
    onto the cos/sin basis. The +sin convention follows the skew being applied
    inside the sine branch. psi = 0 with unit gains is the identity; psi = +/-90
    collapses Q fully onto I (allowed, no clamping).
    """
    if i_gain <= 0 or q_gain <= 0:
        raise ValueError(f"gains must be positive, got i_gain={i_gain}, q_gain={q_gain}")
    if abs(quad_offset_deg) > 90.0:
        warnings.warn(
            f"quadrature offset {quad_offset_deg} deg is outside [-90, 90]; "
            "the constellation folds past the I axis",
            stacklevel=2,
        )
    psi = np.radians(quad_offset_deg)
    re = i_gain * frame.samples.real + q_gain * frame.samples.imag * np.sin(psi)
    im = q_gain * frame.samples.imag * np.cos(psi)
    return ComplexFrame(re + 1j * im, frame.sample_rate_hz)


def apply_phase_noise(frame: ComplexFrame, phase_noise_deg: float) -> ComplexFrame:
    """Rotate every sample by a constant phase (oscillator noise held fixed
    over the frame)."""
    rotation = np.exp(1j * np.radians(phase_noise_deg))
    return ComplexFrame(frame.samples * rotation, frame.sample_rate_hz)


def apply_frequency_offset(frame: ComplexFrame, freq_offset_hz: float) -> ComplexFrame:
    """Rotate sample n by 2*pi*f_o*n/f_s.

    The rotation grows with the sample index, which smears the constellation
    into a circle once the accumulated phase covers a full turn.
    """
    n = np.arange(len(frame))
    rotation = np.exp(2j * np.pi * freq_offset_hz * n / frame.sample_rate_hz)
    return ComplexFrame(frame.samples * rotation, frame.sample_rate_hz)


def apply_iq_offset(frame: ComplexFrame, i_offset: float, q_offset: float) -> ComplexFrame:
    """Shift the whole constellation by the DC leakage i_offset + j*q_offset."""
    return ComplexFrame(frame.samples + (i_offset + 1j * q_offset), frame.sample_rate_hz)


def apply_chain(frame: ComplexFrame, params: ImpairmentParams) -> ComplexFrame:
    """Apply all stages in front-end order: gain/quadrature, phase noise,
    frequency offset, then I/Q offset."""
    out = apply_gain_imbalance_qo(frame, params.i_gain, params.q_gain, params.quad_offset_deg)
    out = apply_phase_noise(out, params.phase_noise_deg)
    out = apply_frequency_offset(out, params.freq_offset_hz)
    return apply_iq_offset(out, params.i_offset, params.q_offset)


def gain_imbalance_percent(i_gain: float, q_gain: float) -> float:
    """Gain imbalance as a percentage: (i_gain / q_gain - 1) * 100."""
    if q_gain == 0:
        raise ZeroDivisionError("q_gain is zero")
    return (i_gain / q_gain - 1.0) * 100.0
