import json

import numpy as np
import pytest

from rfdiag.dataset import (
    COMPONENTS,
    Dataset,
    DatasetConfig,
    DatasetFormatError,
    LabelVector,
    QualityTier,
    TIER_THRESHOLDS,
    draw_params,
    generate_dataset,
    label,
    read_dataset,
    write_dataset,
)
from rfdiag.impairments import ImpairmentParams
from rfdiag.waveform import WaveformConfig

SMALL = DatasetConfig(
    tier=QualityTier.HIGH,
    total_samples=60,
    split=(40, 10, 10),
    master_seed=11,
    waveform=WaveformConfig(symbol_count=20, seed=1),
)


def test_tier_thresholds_table():
    h = TIER_THRESHOLDS[QualityTier.HIGH]
    m = TIER_THRESHOLDS[QualityTier.MIDDLE]
    low = TIER_THRESHOLDS[QualityTier.LOW]
    assert (h.gi_threshold, h.qo_threshold_deg, h.pn_threshold_deg,
            h.fo_threshold_hz, h.iqo_threshold) == (0.2, 20.0, 20.0, 20.0, 0.1)
    assert (m.gi_threshold, m.qo_threshold_deg, m.pn_threshold_deg,
            m.fo_threshold_hz, m.iqo_threshold) == (0.4, 40.0, 40.0, 40.0, 0.2)
    assert (low.gi_threshold, low.qo_threshold_deg, low.pn_threshold_deg,
            low.fo_threshold_hz, low.iqo_threshold) == (0.6, 60.0, 60.0, 60.0, 0.3)


def test_draw_params_ranges():
    for i in range(500):
        p = draw_params(i, master_seed=0)
        assert 1.0 <= p.i_gain <= 2.0 and p.q_gain == 1.0
        assert -90.0 <= p.quad_offset_deg <= 90.0
        assert 0.0 <= p.phase_noise_deg <= 90.0
        assert 0.0 <= p.freq_offset_hz <= 100.0
        assert -0.5 <= p.i_offset <= 0.5 and -0.5 <= p.q_offset <= 0.5


def test_draw_params_deterministic_and_distinct():
    assert draw_params(7, 42) == draw_params(7, 42)
    assert draw_params(7, 42) != draw_params(8, 42)
    assert draw_params(7, 42) != draw_params(7, 43)


def test_label_single_component_cases():
    tier = QualityTier.HIGH
    base = dict(quad_offset_deg=0.0, phase_noise_deg=0.0, freq_offset_hz=0.0,
                i_offset=0.0, q_offset=0.0)
    assert label(ImpairmentParams(i_gain=1.5, q_gain=1.0, **base), tier) == LabelVector(1, 0, 0, 0)
    assert label(ImpairmentParams(i_gain=1.1, q_gain=1.0, **base), tier) == LabelVector(0, 0, 0, 0)
    assert label(ImpairmentParams(quad_offset_deg=-25.0), tier) == LabelVector(0, 1, 0, 0)
    assert label(ImpairmentParams(phase_noise_deg=21.0), tier) == LabelVector(0, 0, 1, 0)
    assert label(ImpairmentParams(freq_offset_hz=99.0), tier) == LabelVector(0, 0, 1, 0)
    assert label(ImpairmentParams(i_offset=-0.2), tier) == LabelVector(0, 0, 0, 1)
    assert label(ImpairmentParams(q_offset=0.11), tier) == LabelVector(0, 0, 0, 1)


def test_label_threshold_is_strict():
    # exactly at the boundary is still healthy
    tier = QualityTier.HIGH
    assert label(ImpairmentParams(i_gain=1.2), tier).filter == 0
    assert label(ImpairmentParams(quad_offset_deg=20.0), tier).ps == 0
    assert label(ImpairmentParams(phase_noise_deg=20.0), tier).lo == 0
    assert label(ImpairmentParams(i_offset=0.1), tier).mixer == 0


def test_label_tier_monotonicity():
    # a fixed fault can flip from distorted to acceptable as tier loosens
    p = ImpairmentParams(quad_offset_deg=50.0)
    assert label(p, QualityTier.HIGH).ps == 1
    assert label(p, QualityTier.MIDDLE).ps == 1
    assert label(p, QualityTier.LOW).ps == 0


def test_generate_dataset_shapes_and_splits():
    ds = generate_dataset(SMALL)
    assert ds.features.shape == (60, SMALL.waveform.feature_width)
    assert ds.features.dtype == np.float32
    assert ds.labels.shape == (60, 4) and ds.labels.dtype == np.uint8
    assert ds.params.shape == (60, 7)
    assert len(ds.split("train")) == 40
    assert len(ds.split("validation")) == 10
    assert len(ds.split("test")) == 10
    with pytest.raises(ValueError):
        ds.split("bogus")


def test_stored_labels_match_reevaluation():
    ds = generate_dataset(SMALL)
    for i in range(len(ds.features)):
        p = ImpairmentParams.from_array(ds.params[i])
        np.testing.assert_array_equal(ds.labels[i], label(p, SMALL.tier).to_array())


def test_generate_dataset_threaded_is_identical():
    a = generate_dataset(SMALL, threads=1)
    b = generate_dataset(SMALL, threads=3)
    np.testing.assert_array_equal(a.features, b.features)
    np.testing.assert_array_equal(a.labels, b.labels)
    np.testing.assert_array_equal(a.params, b.params)


def test_roundtrip(tmp_path):
    ds = generate_dataset(SMALL)
    path = tmp_path / "small.rfd"
    write_dataset(ds, path)
    back = read_dataset(path)
    assert back.config == SMALL
    np.testing.assert_array_equal(back.features, ds.features)
    np.testing.assert_array_equal(back.labels, ds.labels)
    np.testing.assert_array_equal(back.params, ds.params)
    sidecar = json.loads((tmp_path / "small.rfd.json").read_text())
    assert sidecar["config"]["tier"] == "high"
    assert sidecar["config"]["master_seed"] == 11


def test_read_rejects_bad_magic(tmp_path):
    ds = generate_dataset(SMALL)
    path = tmp_path / "bad.rfd"
    write_dataset(ds, path)
    raw = bytearray(path.read_bytes())
    raw[:4] = b"XXXX"
    path.write_bytes(raw)
    with pytest.raises(DatasetFormatError, match="magic"):
        read_dataset(path)


def test_read_rejects_truncation(tmp_path):
    ds = generate_dataset(SMALL)
    path = tmp_path / "trunc.rfd"
    write_dataset(ds, path)
    raw = path.read_bytes()
    path.write_bytes(raw[: len(raw) - 100])
    with pytest.raises(DatasetFormatError, match="truncated"):
        read_dataset(path)


def test_read_rejects_trailing_bytes(tmp_path):
    ds = generate_dataset(SMALL)
    path = tmp_path / "trail.rfd"
    write_dataset(ds, path)
    path.write_bytes(path.read_bytes() + b"\x00")
    with pytest.raises(DatasetFormatError, match="trailing"):
        read_dataset(path)


def test_read_rejects_short_header(tmp_path):
    path = tmp_path / "short.rfd"
    path.write_bytes(b"RFD1\x01")
    with pytest.raises(DatasetFormatError, match="header"):
        read_dataset(path)


def test_config_validation():
    with pytest.raises(ValueError):
        DatasetConfig(tier=QualityTier.HIGH, total_samples=10, split=(5, 4, 2))
    with pytest.raises(ValueError):
        DatasetConfig(tier=QualityTier.HIGH, total_samples=10, split=(0, 5, 5))
    # zero validation/test splits are allowed
    DatasetConfig(tier=QualityTier.HIGH, total_samples=10, split=(10, 0, 0))


def test_label_vector_roundtrip():
    lv = LabelVector(1, 0, 1, 1)
    assert LabelVector.from_array(lv.to_array()) == lv
    with pytest.raises(ValueError):
        LabelVector(2, 0, 0, 0)
    assert COMPONENTS == ("filter", "ps", "lo", "mixer")
