import numpy as np
import pytest

from rfdiag.impairments import (
    ImpairmentParams,
    apply_chain,
    apply_frequency_offset,
    apply_gain_imbalance_qo,
    apply_iq_offset,
    apply_phase_noise,
    gain_imbalance_percent,
)
from rfdiag.waveform import ComplexFrame, WaveformConfig, generate_frame


def _frame(n=16, seed=0):
    return generate_frame(WaveformConfig(symbol_count=n, oversample_factor=1, seed=seed))


def test_identity_params_are_exact():
    """All-identity parameters must leave samples bit-for-bit unchanged."""
    frame = _frame(64)
    out = apply_chain(frame, ImpairmentParams())
    np.testing.assert_array_equal(out.samples, frame.samples)


def test_gain_imbalance_qo_oracle():
    # i_gain=0.65, q_gain=0.42, psi=60deg on (1+1j)/sqrt(2):
    #   re' = 0.65*s.re + 0.42*s.im*sin(60deg), im' = 0.42*s.im*cos(60deg)
    frame = ComplexFrame(np.array([(1 + 1j) / np.sqrt(2.0)]), 2000.0)
    out = apply_gain_imbalance_qo(frame, 0.65, 0.42, 60.0)
    np.testing.assert_allclose(out.samples[0].real, 0.7168158307634895, rtol=1e-14)
    np.testing.assert_allclose(out.samples[0].imag, 0.14849242404917498, rtol=1e-14)


def test_gain_imbalance_identity_passthrough():
    frame = _frame()
    out = apply_gain_imbalance_qo(frame, 1.0, 1.0, 0.0)
    np.testing.assert_array_equal(out.samples, frame.samples)


def test_phase_noise_oracle():
    frame = ComplexFrame(np.array([1 + 0j]), 2000.0)
    out = apply_phase_noise(frame, 68.0)
    np.testing.assert_allclose(out.samples[0].real, 0.37460659341591196, rtol=1e-14)
    np.testing.assert_allclose(out.samples[0].imag, 0.9271838545667874, rtol=1e-14)


def test_rotations_preserve_magnitude():
    frame = _frame(128, seed=5)
    mags = np.abs(frame.samples)
    np.testing.assert_allclose(np.abs(apply_phase_noise(frame, 37.3).samples), mags, atol=1e-12)
    np.testing.assert_allclose(
        np.abs(apply_frequency_offset(frame, 42.0).samples), mags, atol=1e-12
    )


def test_frequency_offset_sample_indexed():
    frame = ComplexFrame(np.ones(4, dtype=complex), 2000.0)
    out = apply_frequency_offset(frame, 42.0)
    # n=0 picks up no rotation at all
    assert out.samples[0] == 1 + 0j
    np.testing.assert_allclose(out.samples[3].real, 0.9226727398701148, rtol=1e-14)
    np.testing.assert_allclose(out.samples[3].imag, 0.38558399227739654, rtol=1e-14)


def test_iq_offset_translates():
    frame = _frame()
    out = apply_iq_offset(frame, -0.32, 0.45)
    np.testing.assert_array_equal(out.samples, frame.samples + (-0.32 + 0.45j))


def test_chain_matches_staged_application():
    """Chained application must equal the four stages applied in order."""
    rng = np.random.default_rng(1234)
    frame = _frame(64, seed=2)
    for _ in range(100):
        p = ImpairmentParams(
            i_gain=1.0 + rng.uniform(0.0, 1.0),
            q_gain=1.0,
            quad_offset_deg=rng.uniform(-90.0, 90.0),
            phase_noise_deg=rng.uniform(0.0, 90.0),
            freq_offset_hz=rng.uniform(0.0, 100.0),
            i_offset=rng.uniform(-0.5, 0.5),
            q_offset=rng.uniform(-0.5, 0.5),
        )
        staged = apply_gain_imbalance_qo(frame, p.i_gain, p.q_gain, p.quad_offset_deg)
        staged = apply_phase_noise(staged, p.phase_noise_deg)
        staged = apply_frequency_offset(staged, p.freq_offset_hz)
        staged = apply_iq_offset(staged, p.i_offset, p.q_offset)
        chained = apply_chain(frame, p)
        np.testing.assert_allclose(chained.samples, staged.samples, atol=1e-12)


def test_gain_imbalance_percent():
    np.testing.assert_allclose(gain_imbalance_percent(0.65, 0.42), 54.761904761904766)
    assert gain_imbalance_percent(1.0, 1.0) == 0.0
    with pytest.raises(ZeroDivisionError):
        gain_imbalance_percent(1.0, 0.0)


def test_nonpositive_gain_rejected():
    frame = _frame()
    with pytest.raises(ValueError):
        apply_gain_imbalance_qo(frame, 0.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        ImpairmentParams(i_gain=-0.5)


def test_quad_offset_beyond_90_warns():
    frame = _frame()
    with pytest.warns(UserWarning):
        apply_gain_imbalance_qo(frame, 1.0, 1.0, 95.0)


def test_params_array_roundtrip():
    p = ImpairmentParams(1.3, 0.8, 12.0, 30.0, 55.0, 0.1, -0.2)
    q = ImpairmentParams.from_array(p.as_array())
    assert p == q
