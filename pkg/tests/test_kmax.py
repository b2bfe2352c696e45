import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import make_recording
from hfdkit.errors import EmptyVector, GridInfeasible, InvalidParameter
from hfdkit.hfd import HfdParams, HfdVector, hfd_sweep
from hfdkit.kmax import DEFAULT_GRID, KmaxGrid, channel_spread, report_from_aggregates, select_kmax, tune_kmax

GRID = (2, 5, 20, 100, 150)


def peaked_cohort(n=6):
    """Channel Fp1: period-60 sine plus weak noise; Fpz: white noise.

    The sine's HFD dips toward 1 for strides under half its period and climbs
    back once strides alias it, so the spread against pure noise peaks
    around k_max = 20 on the grid above.
    """
    recs = []
    t = np.arange(1024)
    for s in range(n):
        rng = np.random.default_rng(s)
        a = np.sin(2 * np.pi * t / 60) + 0.1 * rng.normal(size=t.size)
        b = rng.normal(size=t.size)
        recs.append(make_recording([a, b], ["Fp1", "Fpz"], subject=f"S{s:03d}"))
    return recs


def test_grid_validation():
    assert KmaxGrid().candidates == DEFAULT_GRID
    assert KmaxGrid.parse("2, 5,20").candidates == (2, 5, 20)
    for bad in [(), (5, 2), (2, 2), (1, 5)]:
        with pytest.raises(InvalidParameter):
            KmaxGrid(bad)


def test_channel_spread_examples():
    assert channel_spread([1.5, 1.5, 1.5]) == 0.0
    assert channel_spread({"a": 1.60, "b": 1.72, "c": 1.68}) == pytest.approx(0.12, abs=1e-12)
    assert channel_spread(HfdVector({"a": 1.2, "b": 1.9}, HfdParams(5))) == pytest.approx(0.7)
    with pytest.raises(EmptyVector):
        channel_spread([])


@given(st.lists(st.floats(0.5, 2.5), min_size=1, max_size=50))
def test_channel_spread_nonnegative(vals):
    assert channel_spread(vals) >= 0


def test_select_ties_go_to_smaller():
    assert select_kmax({5: 0.3, 2: 0.3, 20: 0.1}) == 2
    assert select_kmax({20: 0.1}) == 20


def test_replay_fixture_selects_100(reference):
    f1, f2 = reference["kmax_mean_hfd"], reference["kmax_channel_spread"]
    rep = report_from_aggregates(dict(zip(f1["k_max"], f1["mean"])), dict(zip(f2["k_max"], f2["mean"])),
                                 dict(zip(f1["k_max"], f1["std"])), dict(zip(f2["k_max"], f2["std"])))
    assert rep.chosen == 100
    means = [rep.mean_hfd[k] for k in rep.candidates]
    assert all(b > a for a, b in zip(means, means[1:]))
    assert rep.mean_spread[100] == pytest.approx(0.34311, abs=1e-5)
    assert rep.to_dict()["chosen_k_max"] == 100


def test_single_candidate_grid():
    rep = tune_kmax(peaked_cohort(2), [20])
    assert rep.chosen == 20 and rep.candidates == [20]


def test_constructed_cohort_peaks_at_20():
    recs = peaked_cohort()
    rep = tune_kmax(recs, GRID)
    # recompute the spread curve directly
    direct = {k: [] for k in GRID}
    for r in recs:
        sweeps = [hfd_sweep(ts, GRID) for ts in r.channels.values()]
        for k in GRID:
            vals = [s[k] for s in sweeps]
            direct[k].append(max(vals) - min(vals))
    for k in GRID:
        assert rep.mean_spread[k] == pytest.approx(np.mean(direct[k]), abs=1e-12)
        assert rep.std_spread[k] == pytest.approx(np.std(direct[k]), abs=1e-12)
    assert rep.chosen == 20
    assert all(v >= 0 for v in rep.mean_spread.values())


def test_grid_infeasible_for_short_recordings():
    recs = peaked_cohort(1)
    with pytest.raises(GridInfeasible):
        tune_kmax(recs, (2, 600))


def test_order_scale_and_worker_invariance():
    recs = peaked_cohort(4)
    base = tune_kmax(recs, GRID)
    rev = tune_kmax(recs[::-1], GRID, n_jobs=2)
    assert rev.to_dict() == base.to_dict()
    scaled = [make_recording(3.0 * r.as_array() + 7.0, r.labels, subject=r.subject_id) for r in recs]
    assert tune_kmax(scaled, GRID).chosen == base.chosen
