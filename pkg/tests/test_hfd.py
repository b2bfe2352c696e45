import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import make_recording
from hfdkit.errors import ChannelErrors, DegenerateCurveLength, InvalidOffset, InvalidParameter, SignalTooShort, ValidationError
from hfdkit.hfd import (
    HfdParams,
    HfdVector,
    HfdWindowSeries,
    compute_features,
    curve_length_lk,
    curve_length_lmk,
    curve_lengths,
    hfd_per_channel,
    hfd_sweep,
    hfd_windowed,
    higuchi_fd,
    max_kmax,
)
from hfdkit.signal import ChannelRegistry
from hfdkit.synth import SynthSpec, generate
from oracles import hfd_loop, lk_loop, lmk_loop

RAMP9 = np.arange(1.0, 10.0)


def test_lmk_ramp_values():
    assert curve_length_lmk(RAMP9, 1, 2) == pytest.approx(4.0, abs=1e-12)
    assert curve_length_lmk(RAMP9, 2, 2) == pytest.approx(4.0, abs=1e-12)
    assert curve_length_lmk(np.full(9, 3.3), 2, 3) == 0.0


def test_lk_values():
    assert curve_length_lk(RAMP9, 2) == pytest.approx(4.0, abs=1e-12)
    assert curve_length_lk(RAMP9, 1) == pytest.approx(8.0, abs=1e-12)
    assert curve_length_lk([0, 1, 0, 1, 0, 1, 0, 1], 2) == 0.0


def test_invalid_offsets():
    with pytest.raises(InvalidOffset):
        curve_length_lmk(RAMP9, 3, 2)
    with pytest.raises(InvalidOffset):
        curve_length_lmk(RAMP9, 0, 2)
    with pytest.raises(InvalidOffset):
        curve_length_lmk(np.arange(4.0), 2, 3)  # M = 0


@given(st.integers(5, 200), st.data())
def test_ramp_lmk_identity(n, data):
    k = data.draw(st.integers(1, (n - 1) // 2))
    m = data.draw(st.integers(1, k))
    x = np.arange(float(n))
    assert curve_length_lmk(x, m, k) == pytest.approx((n - 1) / k, rel=1e-12)


finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


@given(arrays(np.float64, st.integers(5, 120), elements=finite), st.data())
def test_curve_lengths_match_loop_oracle(x, data):
    k_max = data.draw(st.integers(2, max_kmax(x.size)))
    got = curve_lengths(x, k_max)
    want = [lk_loop(list(x), k) for k in range(1, k_max + 1)]
    assert np.allclose(got, want, rtol=1e-11, atol=1e-9)
    k = data.draw(st.integers(1, k_max))
    m = data.draw(st.integers(1, k))
    assert curve_length_lmk(x, m, k) == pytest.approx(lmk_loop(list(x), m, k), rel=1e-11, abs=1e-9)


@pytest.mark.parametrize("seed", range(5))
def test_hfd_matches_loop_oracle(seed):
    x = np.random.default_rng(seed).normal(size=300).cumsum()
    assert higuchi_fd(x, 20) == pytest.approx(hfd_loop(list(x), 20), abs=1e-10)


@pytest.mark.parametrize("n", [32, 100, 1024])
def test_ramp_dimension_is_one(n):
    assert abs(higuchi_fd(np.arange(float(n)), 8) - 1.0) < 1e-9


def test_alternating_is_degenerate():
    with pytest.raises(DegenerateCurveLength) as ei:
        higuchi_fd(np.tile([0.0, 1.0], 50), 5)
    assert ei.value.k == 2


def test_kmax_bounds():
    with pytest.raises(InvalidParameter):
        HfdParams(1)
    with pytest.raises(SignalTooShort):
        higuchi_fd(np.arange(10.0), 5)
    higuchi_fd(np.arange(11.0), 5)  # (11 - 1) // 2 = 5


def test_sweep_equals_individual_fits():
    x = np.random.default_rng(1).normal(size=500)
    sweep = hfd_sweep(x, [20, 2, 100])
    for k, v in sweep.items():
        assert v == higuchi_fd(x, k)


@given(arrays(np.float64, st.integers(16, 200), elements=st.integers(-1000, 1000).map(float)),
       st.sampled_from([0.5, 3.0, -2.0, 1e-3]), st.floats(-1e3, 1e3))
def test_affine_invariance(x, a, b):
    try:
        base = higuchi_fd(x, 5)
    except DegenerateCurveLength:
        return
    assert abs(higuchi_fd(a * x + b, 5) - base) <= 1e-9


def test_fbm_monotone_in_hurst():
    means = []
    for h in (0.2, 0.5, 0.8):
        means.append(np.mean([higuchi_fd(generate(SynthSpec("fbm", 4096, seed=s, hurst=h)), 50) for s in range(20)]))
    assert means[0] > means[1] > means[2]


def test_mean_hfd_nondecreasing_in_kmax_for_band_limited_noise():
    # Scale-free noise has the same expected HFD at every k_max; a low-passed
    # signal is smooth at small strides and noisy at large ones.
    grid = [2, 5, 20, 100]
    rows = []
    for s in range(20):
        x = np.convolve(np.random.default_rng(s).normal(size=8195), np.ones(4) / 4, mode="valid")
        sw = hfd_sweep(x, grid)
        rows.append([sw[k] for k in grid])
    means = np.mean(rows, axis=0)
    assert np.all(np.diff(means) >= 0)


def test_hfd_vector_band_checks():
    HfdVector({"a": 1.5}, HfdParams(5))
    with pytest.raises(ValidationError):
        HfdVector({"a": 2.7}, HfdParams(5))
    with pytest.raises(ValidationError):
        HfdVector({"a": float("nan")}, HfdParams(5))


def test_per_channel_ramp_and_order():
    reg = ChannelRegistry.default()
    rec = make_recording(np.tile(np.arange(64.0), (124, 1)), reg.labels)
    vec = hfd_per_channel(rec, HfdParams(8))
    assert vec.channels == reg.labels
    assert np.allclose(vec.as_array(), 1.0, atol=1e-9)
    assert (vec.subject_id, vec.presentation_id) == ("S001", "1A")


def test_per_channel_errors_name_the_channel():
    data = np.vstack([np.arange(64.0), np.full(64, 2.0), np.random.default_rng(0).normal(size=64)])
    rec = make_recording(data, ["Fp1", "Fpz", "Fp2"])
    with pytest.raises(ChannelErrors) as ei:
        hfd_per_channel(rec, 8)
    assert set(ei.value.failures) == {"Fpz"}


def test_windowed_counts_and_whole_window_consistency():
    rng = np.random.default_rng(3)
    data = rng.normal(size=(2, 40 * 64))
    rec = make_recording(data, ["Fp1", "Fpz"], rate=64.0)
    ws = hfd_windowed(rec, 10, 8.0)
    assert isinstance(ws, HfdWindowSeries)
    assert ws.n_windows == 5 and ws.as_array().shape == (2, 5)
    assert ws.values["Fpz"][2] == higuchi_fd(data[1, 2 * 512:3 * 512], 10)
    whole = hfd_windowed(rec, 10, 40.0)
    assert whole.values["Fp1"][0] == higuchi_fd(data[0], 10)


def test_windowed_errors_tagged_with_window():
    x = np.random.default_rng(0).normal(size=64)
    x[16:32] = 1.0
    rec = make_recording([x], ["Fp1"], rate=16.0)
    with pytest.raises(ChannelErrors) as ei:
        hfd_windowed(rec, 3, 1.0)
    assert set(ei.value.failures) == {("Fp1", 1)}


def test_windowed_fbm_near_theory():
    labels = ["Fp1", "Fpz"]
    data = [generate(SynthSpec("fbm", 4 * 4096, seed=s, hurst=0.7)).samples for s in range(2)]
    rec = make_recording(data, labels, rate=512.0)
    ws = hfd_windowed(rec, 100, 8.0)
    assert ws.n_windows == 4
    assert np.all(np.abs(ws.as_array() - 1.3) <= 0.15)


def test_window_series_requires_equal_counts():
    with pytest.raises(ValidationError):
        HfdWindowSeries({"a": [1.5, 1.5], "b": [1.5]}, 8.0)


def test_compute_features_independent_of_workers():
    rng = np.random.default_rng(5)
    recs = [make_recording(rng.normal(size=(3, 400)), ["a", "b", "c"], subject=f"S{i}") for i in range(6)]
    serial = compute_features(recs, 20)
    parallel = compute_features(recs, 20, n_jobs=3)
    for s, p in zip(serial, parallel):
        assert s.values == p.values
    assert math.isfinite(serial[0].values["a"])
