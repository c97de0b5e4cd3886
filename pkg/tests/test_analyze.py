import csv

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from golsi import analyze
from golsi.analyze import ScanSpec, detect_minima, detect_snngpp
from golsi.model import NumericError


def test_minima_examples():
    assert detect_minima([3, 1, 2]) == [1]
    assert detect_minima([1, 2, 3, 4]) == []
    assert detect_minima([4, 3, 2, 1]) == []
    assert detect_minima([2, 1, 1, 2]) == []  # flat bottoms are not strict minima
    with pytest.raises(ValueError):
        detect_minima([1, 2])


def test_snngpp_examples():
    assert detect_snngpp([-1, 1]) == [1]
    assert detect_snngpp([-1, -2, -3]) == []
    assert detect_snngpp([-1, 0, 2]) == [2]
    assert detect_snngpp([1, -1, 1, -1, 1]) == [2, 4]
    with pytest.raises(ValueError):
        detect_snngpp([1])


@given(coefs=st.lists(st.floats(-3, 3), min_size=1, max_size=4),
       freqs=st.lists(st.floats(0.5, 12), min_size=4, max_size=4),
       n=st.integers(20, 200))
def test_smooth_minima_sit_next_to_sign_changes(coefs, freqs, n):
    grid = np.linspace(0.0, 1.0, n)
    F = sum(c * np.sin(w * grid + k) for k, (c, w) in enumerate(zip(coefs, freqs)))
    dF = sum(c * w * np.cos(w * grid + k) for k, (c, w) in enumerate(zip(coefs, freqs)))
    snn = detect_snngpp(dF)
    for i in detect_minima(F):
        assert any(abs(i - j) <= 1 for j in snn)


def test_scan_spec_validation():
    assert ScanSpec().grid.size == 100
    assert ScanSpec().grid[1] == pytest.approx(0.002)
    assert np.all(np.diff(ScanSpec().grid) > 0)
    for kw in (dict(grid_points=2), dict(spacing=0.0), dict(repeats=0), dict(start=-1.0)):
        with pytest.raises(ValueError):
            ScanSpec(**kw)


@pytest.fixture(scope="module")
def small_study(iris_problem):
    return analyze.localization_study(iris_problem, ScanSpec(batch_sizes=(10, 150), repeats=100))


def test_full_batch_is_single_spike(small_study):
    full = small_study.histograms[1]
    assert full.batch_size == 150
    assert np.count_nonzero(full.snngpp_count) == 1
    assert full.snngpp_count.max() == full.repeats
    assert np.argmax(full.snngpp_count) == small_study.optimum_cell
    assert full.snngpp_std == 0.0


def test_full_batch_optimum_matches_minimum(small_study):
    assert len(small_study.full_minima) == 1
    assert abs(small_study.full_minima[0] - small_study.optimum_cell) <= 1


def test_small_batch_minima_spread_evenly(small_study):
    h = small_study.histograms[0]
    interior = h.minima_count[1:-1]
    assert interior.max() / interior.mean() < 3


def test_small_batch_snngpp_tighter_than_minima(small_study):
    h = small_study.histograms[0]
    assert h.snngpp_std < 0.5 * h.minima_std


def test_histogram_mass_and_fractions(small_study):
    for h in small_study.histograms:
        assert np.all(h.minima_count >= 0) and np.all(h.snngpp_count >= 0)
        assert h.snngpp_count.sum() == len(h.snngpp_cells)
        assert h.snngpp_count.sum() <= h.repeats * h.alphas.size
    for row in small_study.summary_rows():
        assert 0.0 <= row["frac_near_optimum"] <= 1.0


def test_snngpp_ball_covers_detections(small_study):
    h = small_study.histograms[0]
    lo, hi = analyze.snngpp_ball(h)
    assert lo <= h.alphas[min(h.snngpp_cells)] and hi >= h.alphas[max(h.snngpp_cells)]
    lo95, hi95 = analyze.snngpp_ball(h, 0.95)
    assert lo <= lo95 <= hi95 <= hi


def test_study_is_reproducible(iris_problem):
    spec = ScanSpec(batch_sizes=(25,), repeats=5, grid_points=20)
    a = analyze.localization_study(iris_problem, spec)
    b = analyze.localization_study(iris_problem, spec)
    assert a.histograms[0].snngpp_cells == b.histograms[0].snngpp_cells
    assert a.histograms[0].minima_cells == b.histograms[0].minima_cells


def test_warmup_moves_reference_point(iris_problem):
    x0 = analyze.reference_point(iris_problem, ScanSpec(warmup_iters=0))
    x2 = analyze.reference_point(iris_problem, ScanSpec(warmup_iters=2))
    assert not np.array_equal(x0, x2)


def test_numeric_failure_skips_repeat(iris_problem, monkeypatch):
    real_scan = analyze.scan
    calls = {"n": 0}

    def flaky(probe, grid):
        calls["n"] += 1
        if calls["n"] == 3:
            raise NumericError("boom", layer=1)
        return real_scan(probe, grid)

    monkeypatch.setattr(analyze, "scan", flaky)
    res = analyze.localization_study(iris_problem, ScanSpec(batch_sizes=(10,), repeats=4, grid_points=10))
    h = res.histograms[0]
    assert (h.skipped, h.completed) == (1, 3)


def test_csv_outputs(tmp_path, small_study):
    analyze.write_histograms(tmp_path / "h.csv", small_study)
    analyze.write_summary(tmp_path / "s.csv", small_study)
    hist = list(csv.DictReader(open(tmp_path / "h.csv")))
    assert list(hist[0]) == ["batch_size", "cell_index", "alpha", "minima_count", "snngpp_count"]
    assert len(hist) == 200
    summ = list(csv.DictReader(open(tmp_path / "s.csv")))
    assert list(summ[0]) == analyze.SUMMARY_COLUMNS
    assert "std_ratio" in summ[0]
    assert float(summ[0]["std_ratio"]) < 0.5
