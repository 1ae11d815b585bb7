import math

import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from freqxai.errors import DataError, EmptyTrace, MissingData
from freqxai.signal import (
    AREA_ROCOF_PARAMS,
    FrequencyTrace,
    IndicatorTable,
    RocofParams,
    compute_integral,
    compute_msd,
    compute_nadir,
    compute_rocof,
    estimate_derivative,
    extract_indicators,
    nadir_occurrence_histogram,
    read_frequency_csv,
    rocof_params_for,
    write_frequency_csv,
)

START = pd.Timestamp("2019-03-01", tz="UTC")


def day_trace(values):
    return FrequencyTrace(START, values)


def hour_oracle(values, i):
    """Per-hour indicators straight from the formulas, with plain Python loops."""
    window = [float(v) for v in values[i * 3600:i * 3600 + 3601]]
    peak = max(range(len(window)), key=lambda k: (abs(window[k]), -k))
    return {
        "nadir": window[peak],
        "integral": math.fsum(window),
        "msd": math.fsum(v * v for v in window) / 3600,
    }


# -- window indicators ---------------------------------------------------

def test_nadir_zero():
    assert compute_nadir(np.zeros(3601)) == 0.0


def test_nadir_unique_negative_extreme():
    w = np.full(3601, 0.01)
    w[1234] = -0.30
    assert compute_nadir(w) == -0.30


def test_nadir_sinusoid_matches_closed_form_argmax():
    t = np.arange(3601)
    closed = [0.05 * math.sin(2 * math.pi * k / 3600) for k in range(3601)]
    expected = closed[max(range(3601), key=lambda k: (abs(closed[k]), -k))]
    got = compute_nadir(0.05 * np.sin(2 * np.pi * t / 3600))
    assert got == pytest.approx(expected, abs=1e-15)
    assert got == pytest.approx(0.05, abs=1e-15)


def test_nadir_tie_takes_earliest():
    w = np.zeros(3601)
    w[10], w[20] = 0.2, -0.2
    assert compute_nadir(w) == 0.2


def test_missing_sample_raises():
    w = np.zeros(3601)
    w[5] = np.nan
    for fn in (compute_nadir, compute_integral, compute_msd):
        with pytest.raises(MissingData):
            fn(w)


def test_integral_values():
    assert compute_integral(np.zeros(3601)) == 0.0
    assert compute_integral(np.full(3601, 0.05)) == pytest.approx(180.05, abs=1e-10)
    half = np.linspace(0.1, 0.001, 1800)
    antisym = np.concatenate([half, [0.0], -half[::-1]])
    assert compute_integral(antisym) == pytest.approx(0.0, abs=1e-13)


def test_msd_values():
    assert compute_msd(np.zeros(3601)) == 0.0
    assert compute_msd(np.full(3601, 0.1)) == pytest.approx(3601 * 0.01 / 3600, abs=1e-15)
    a = 0.07
    w = np.concatenate([np.full(1800, a), np.full(1801, -a)])
    expected = math.fsum([a * a] * 3601) / 3600
    assert compute_msd(w) == pytest.approx(expected, abs=1e-15)
    assert compute_msd(w) == pytest.approx(a * a, rel=1e-3)


# -- derivative and RoCoF ------------------------------------------------

@pytest.mark.parametrize("L", [1, 2, 7, 30, 60])
def test_derivative_of_ramp_is_slope(L):
    s = 3.7e-4
    f = 0.01 + s * np.arange(5000)
    d = estimate_derivative(f, L)
    valid = ~np.isnan(d)
    assert valid.sum() == 5000 - L
    np.testing.assert_allclose(d[valid], s, atol=1e-12, rtol=0)


def test_derivative_of_constant_is_zero():
    d = estimate_derivative(np.full(400, 0.02), 60)
    assert np.all(d[~np.isnan(d)] == 0.0)


def test_derivative_step_plateau_matches_convolution():
    h, t0, L, n = -0.1, 500, 60, 1000
    f = np.where(np.arange(n) >= t0, h, 0.0)
    increments = np.zeros(n)
    increments[t0] = h
    # centered rectangle: position t averages increments t-30 .. t+29
    oracle = np.array([sum(increments[t - 30:t + 30]) / L if 31 <= t <= n - 30 else np.nan
                       for t in range(n)])
    d = estimate_derivative(f, L)
    both = ~np.isnan(oracle)
    np.testing.assert_allclose(d[both], oracle[both], atol=1e-15)
    plateau = np.flatnonzero(np.abs(d - h / L) < 1e-15)
    assert len(plateau) == 60
    assert plateau[0] == t0 - 29 and plateau[-1] == t0 + 30


def test_derivative_marks_boundary_and_missing():
    f = np.zeros(300)
    f[150] = np.nan
    d = estimate_derivative(f, 10)
    assert np.isnan(d[:6]).all()  # increment 0 is undefined, positions 0..5 touch it
    assert not np.isnan(d[6])
    assert np.isnan(d[-4:]).all()
    assert np.isnan(d[146:157]).all()  # increments 150 and 151 are missing
    assert not np.isnan(d[145]) and not np.isnan(d[157])


def test_rocof_values():
    assert compute_rocof(np.zeros(400), 200, 60) == 0.0
    d = np.full(400, 0.001)
    d[230] = -0.004
    assert compute_rocof(d, 200, 60) == -0.004


def test_rocof_window_outside_trace():
    with pytest.raises(MissingData):
        compute_rocof(np.zeros(400), 30, 60)
    with pytest.raises(MissingData):
        compute_rocof(np.zeros(400), 350, 60)


def test_rocof_of_trading_step():
    n, t0 = 7201, 3600
    f = np.where(np.arange(n) >= t0, -0.1, 0.0)
    d = estimate_derivative(f, 60)
    assert compute_rocof(d, t0, 60) == pytest.approx(-0.1 / 60, abs=1e-15)


def test_rocof_params():
    assert rocof_params_for("CE") == RocofParams(60, 60)
    assert rocof_params_for("GB") == RocofParams(60, 60)
    assert rocof_params_for("Nordic") == RocofParams(30, 30)
    with pytest.raises(ValueError):
        RocofParams(0, 10)
    with pytest.raises(ValueError):
        RocofParams(10, 1801)
    with pytest.raises(KeyError):
        rocof_params_for("Baltic")


# -- trace and table -----------------------------------------------------

def test_trace_invariants():
    with pytest.raises(ValueError):
        FrequencyTrace(START + pd.Timedelta(minutes=1), np.zeros(10))
    with pytest.raises(ValueError):
        FrequencyTrace(START, np.zeros(10), np.zeros(9, dtype=bool))
    tr = FrequencyTrace(START, np.array([0.0, 2.5, np.nan, -0.1]))
    assert tr.missing.tolist() == [False, True, True, False]
    assert tr.n_flagged == 1


def test_day_of_zeros():
    table = extract_indicators(day_trace(np.zeros(24 * 3600 + 1)), RocofParams(60, 60))
    frame = table.to_frame()
    assert len(frame) == 24
    assert np.isnan(frame["rocof"].iloc[0])
    assert (frame["rocof"].iloc[1:] == 0).all()
    assert (frame[["nadir", "msd", "integral"]] == 0).all().all()


def test_trace_without_closing_sample_loses_last_hour():
    frame = extract_indicators(day_trace(np.zeros(24 * 3600))).to_frame()
    assert len(frame) == 24
    assert np.isnan(frame["nadir"].iloc[-1])
    assert frame["nadir"].iloc[:-1].notna().all()


def test_corrupted_second_poisons_its_hour():
    values = np.zeros(24 * 3600 + 1)
    values[5 * 3600 + 17] = np.nan
    frame = extract_indicators(day_trace(values)).to_frame()
    assert frame.iloc[5][["nadir", "msd", "integral"]].isna().all()
    assert frame.drop(frame.index[5])[["nadir", "msd", "integral"]].notna().all().all()


def test_shared_closing_sample_poisons_previous_hour():
    values = np.zeros(3 * 3600 + 1)
    values[3600] = np.nan
    frame = extract_indicators(day_trace(values)).to_frame()
    assert frame["nadir"].isna().tolist() == [True, True, False]


def test_missing_tolerance_knob():
    values = np.full(2 * 3600 + 1, 0.01)
    values[100] = np.nan
    strict = extract_indicators(day_trace(values)).to_frame()
    lenient = extract_indicators(day_trace(values), missing_tolerance=1).to_frame()
    assert np.isnan(strict["integral"].iloc[0])
    assert lenient["integral"].iloc[0] == pytest.approx(3600 * 0.01, abs=1e-12)


def test_sawtooth_day_matches_per_hour_oracle():
    t = np.arange(24 * 3600 + 1)
    values = 0.08 * ((t % 1337) / 1337 - 0.4) + 0.01 * np.sin(t / 500)
    frame = extract_indicators(day_trace(values)).to_frame()
    for i in range(24):
        oracle = hour_oracle(values, i)
        for name, value in oracle.items():
            assert frame[name].iloc[i] == pytest.approx(value, abs=1e-10)


def test_empty_trace():
    with pytest.raises(EmptyTrace):
        extract_indicators(day_trace(np.zeros(100)))


@settings(max_examples=25, deadline=None)
@given(c=st.floats(-3.0, 3.0).filter(lambda c: abs(c) > 1e-3), seed=st.integers(0, 2**16))
def test_scaling_and_sign_symmetry(c, seed):
    rng = np.random.default_rng(seed)
    values = rng.normal(0, 0.02, 3 * 3600 + 1)
    base = extract_indicators(day_trace(values), RocofParams(30, 30)).to_frame()
    scaled = extract_indicators(day_trace(c * values), RocofParams(30, 30)).to_frame()
    for name in ("nadir", "integral", "rocof"):
        np.testing.assert_allclose(scaled[name], c * base[name], rtol=1e-12, atol=1e-15)
    np.testing.assert_allclose(scaled["msd"], c * c * base["msd"], rtol=1e-12)
    # mean square over a window dominates the squared mean
    msd_mean = base["msd"] * 3600 / 3601
    mean = base["integral"] / 3601
    assert (msd_mean >= mean**2 - 1e-15).all()


def test_time_shift_permutes_rows():
    rng = np.random.default_rng(3)
    values = rng.normal(0, 0.03, 5 * 3600 + 1)
    full = extract_indicators(day_trace(values), RocofParams(60, 60)).to_frame()
    shifted = extract_indicators(
        FrequencyTrace(START + pd.Timedelta(hours=2), values[2 * 3600:]), RocofParams(60, 60)
    ).to_frame()
    common = shifted.index[1:]
    pd.testing.assert_frame_equal(shifted.loc[common], full.loc[common])


def test_integral_bound():
    rng = np.random.default_rng(5)
    values = rng.normal(0, 0.05, 4 * 3600 + 1)
    frame = extract_indicators(day_trace(values)).to_frame()
    for i in range(4):
        peak = np.max(np.abs(values[i * 3600:i * 3600 + 3601]))
        assert abs(frame["integral"].iloc[i]) <= 3600 * peak + peak
        assert frame["msd"].iloc[i] >= 0


# -- occurrence histogram ------------------------------------------------

def test_histogram_all_in_minute_zero():
    values = np.full(10 * 3600 + 1, 0.001)
    values[np.arange(10) * 3600 + 7] = 0.2
    hist = nadir_occurrence_histogram(day_trace(values), density=True)
    assert hist.shape == (60,)
    assert hist[0] == 1.0


def test_histogram_uniform_peaks_is_flat():
    rng = np.random.default_rng(11)
    n_hours = 3000
    values = rng.uniform(-0.01, 0.01, n_hours * 3600)
    peaks = rng.integers(0, 3600, n_hours)
    values[np.arange(n_hours) * 3600 + peaks] = 0.5
    counts = nadir_occurrence_histogram(day_trace(values))
    assert counts.sum() == n_hours
    assert stats.chisquare(counts).pvalue > 0.001


def test_histogram_ce_like_concentrates_early():
    rng = np.random.default_rng(2)
    n_hours = 200
    values = rng.normal(0, 0.01, n_hours * 3600)
    early = rng.random(n_hours) < 0.7
    peaks = np.where(early, rng.integers(0, 300, n_hours), rng.integers(300, 3600, n_hours))
    values[np.arange(n_hours) * 3600 + peaks] = 0.3
    hist = nadir_occurrence_histogram(day_trace(values), density=True)
    assert hist[:5].sum() >= 0.5


def test_histogram_requires_complete_hour():
    with pytest.raises(EmptyTrace):
        nadir_occurrence_histogram(day_trace(np.zeros(100)))
    with pytest.raises(EmptyTrace):
        nadir_occurrence_histogram(day_trace(np.full(3600, np.nan)))


# -- file formats --------------------------------------------------------

def test_frequency_csv_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    values = np.round(rng.normal(0, 0.02, 2 * 3600 + 1), 6)
    values[10] = np.nan
    path = tmp_path / "f.csv"
    write_frequency_csv(day_trace(values), path)
    back = read_frequency_csv(path)
    assert back.start == START
    np.testing.assert_allclose(back.values, values, atol=1e-9)
    assert back.missing[10]


def test_frequency_csv_gaps_become_missing(tmp_path):
    path = tmp_path / "f.csv"
    path.write_text("timestamp_utc,frequency_hz\n"
                    "2019-03-01T00:00:00Z,50.01\n"
                    "2019-03-01T00:00:01Z,nan\n"
                    "2019-03-01T00:00:03Z,49.98\n")
    tr = read_frequency_csv(path)
    assert len(tr) == 4
    assert tr.missing.tolist() == [False, True, True, False]
    assert tr.values[3] == pytest.approx(-0.02)


def test_frequency_csv_corrupted_row_names_line(tmp_path):
    path = tmp_path / "f.csv"
    path.write_text("timestamp_utc,frequency_hz\n"
                    "2019-03-01T00:00:00Z,50.01\n"
                    "2019-03-01T00:00:01Z,fifty\n")
    with pytest.raises(DataError, match=r"f\.csv:3"):
        read_frequency_csv(path)


def test_indicator_csv_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    table = extract_indicators(day_trace(rng.normal(0, 0.02, 3 * 3600 + 1)))
    path = tmp_path / "ind.csv"
    table.to_csv(path)
    header = path.read_text().splitlines()[0]
    assert header == "hour_utc,nadir_hz,rocof_hz_per_s,msd_hz2,integral_hz_s"
    back = IndicatorTable.read_csv(path)
    pd.testing.assert_frame_equal(back.to_frame(), table.to_frame(), check_freq=False)


def test_area_defaults_cover_three_areas():
    assert set(AREA_ROCOF_PARAMS) == {"CE", "GB", "Nordic"}
