import csv

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from golsi.model import Architecture, evaluate, init_params
from golsi.probe import CallableProbe, LineProbe, scan, write_scan_csv
from golsi.sampler import BatchSampler, Mode, SamplerMode

SMALL = Architecture((4, 6, 3))


class _Fixed:
    """Sampler stand-in that always returns one given batch."""

    def __init__(self, batch):
        self.batch = np.asarray(batch)

    def draw(self):
        return self.batch


def _full_probe(problem, arch=SMALL, seed=0):
    d = problem.train
    x = init_params(arch, seed)
    g = evaluate(arch, x, d, np.arange(d.M)).gradient
    return LineProbe(arch, d, x, -g, BatchSampler(d.M, SamplerMode(Mode.FULL))), g


def test_steepest_descent_slope_at_origin(iris_problem):
    probe, g = _full_probe(iris_problem)
    _, fp = probe.eval_at(0.0)
    assert fp == pytest.approx(-(g @ g), rel=1e-12)
    assert fp < 0


def test_zero_direction_has_flat_slope(iris_problem):
    d = iris_problem.train
    probe = LineProbe(SMALL, d, init_params(SMALL, 0), np.zeros(SMALL.n_params),
                      BatchSampler(d.M, SamplerMode(Mode.DYNAMIC, 10), 0))
    for a in (0.0, 0.5, 3.0):
        assert probe.eval_at(a)[1] == 0.0


def test_rejects_bad_alpha_and_shapes(iris_problem):
    probe, _ = _full_probe(iris_problem)
    for bad in (-1e-3, float("nan"), float("inf")):
        with pytest.raises(ValueError):
            probe.eval_at(bad)
    with pytest.raises(ValueError):
        LineProbe(SMALL, iris_problem.train, np.zeros(3), np.zeros(3), _Fixed([0]))


def test_one_draw_per_evaluation_same_batch_for_value_and_slope(iris_problem):
    d = iris_problem.train
    x = init_params(SMALL, 1)
    direction = np.random.default_rng(0).standard_normal(SMALL.n_params)
    probe = LineProbe(SMALL, d, x, direction, BatchSampler(d.M, SamplerMode(Mode.DYNAMIC, 10), 5))
    replay = BatchSampler(d.M, SamplerMode(Mode.DYNAMIC, 10), 5)
    for a in (0.0, 0.1, 0.2):
        F, Fp = probe.eval_at(a)
        ref = evaluate(SMALL, x + a * direction, d, replay.draw())
        assert F == ref.loss
        assert Fp == pytest.approx(direction @ ref.gradient, rel=1e-14)
    assert probe.eval_counter == 3


@given(alpha=st.floats(1e-6, 2.0))
def test_full_mode_slope_matches_central_difference(iris_problem, alpha):
    probe, _ = _full_probe(iris_problem)
    h = 1e-6
    _, fp = probe.eval_at(alpha)
    fd = (probe.eval_at(alpha + h)[0] - probe.eval_at(alpha - h)[0]) / (2 * h)
    assert abs(fd - fp) <= 1e-5 * max(1.0, abs(fp))


def test_singleton_average_of_slope_equals_full(iris_problem):
    d = iris_problem.train
    x = init_params(SMALL, 2)
    direction = np.random.default_rng(2).standard_normal(SMALL.n_params)
    full = LineProbe(SMALL, d, x, direction, BatchSampler(d.M, SamplerMode(Mode.FULL)))
    for a in (0.0, 0.3):
        parts = [LineProbe(SMALL, d, x, direction, _Fixed([i])).eval_at(a)[1] for i in range(d.M)]
        assert abs(np.mean(parts) - full.eval_at(a)[1]) < 1e-12


def test_scan_counts_and_grid(iris_problem):
    probe, _ = _full_probe(iris_problem)
    grid = 0.002 * np.arange(100)
    pts = scan(probe, grid)
    assert len(pts) == 100
    assert probe.eval_counter == 100
    assert [p.batch_seq for p in pts] == list(range(1, 101))
    assert scan(probe, []) == []
    assert probe.eval_counter == 100
    with pytest.raises(ValueError):
        scan(probe, [0.2, 0.1])


def test_convex_slice_slope_increasing(bcwd_logr):
    d = bcwd_logr.train
    a = bcwd_logr.arch
    x = init_params(a, 0)
    g = evaluate(a, x, d, np.arange(d.M)).gradient
    probe = LineProbe(a, d, x, -g, BatchSampler(d.M, SamplerMode(Mode.FULL)))
    grid = np.linspace(0.0, 2.0, 60)
    pts = scan(probe, grid)
    fp = np.array([p.Fprime for p in pts])
    F = np.array([p.F for p in pts])
    assert np.all(np.diff(fp) > 0)
    # secant slopes sit between the endpoint derivatives
    sec = np.diff(F) / np.diff(grid)
    assert np.all(sec >= fp[:-1] - 1e-9) and np.all(sec <= fp[1:] + 1e-9)


def _total_variation(values):
    return float(np.sum(np.abs(np.diff(values))))


def test_static_smooth_dynamic_jumps(iris_problem):
    d = iris_problem.train
    x = init_params(SMALL, 0)
    g = evaluate(SMALL, x, d, np.arange(d.M)).gradient
    grid = 0.01 * np.arange(50)
    static_tv = []
    for seed in range(4):
        sampler = BatchSampler(d.M, SamplerMode(Mode.STATIC, 10), seed)
        pinned = sampler.draw().copy()
        pts = scan(LineProbe(SMALL, d, x, -g, sampler), grid)
        exact = [LineProbe(SMALL, d, x, -g, _Fixed(pinned)).eval_at(a)[1] for a in grid]
        assert [p.Fprime for p in pts] == exact
        static_tv.append(_total_variation(exact))
    dyn = scan(LineProbe(SMALL, d, x, -g, BatchSampler(d.M, SamplerMode(Mode.DYNAMIC, 10), 9)), grid)
    assert _total_variation([p.Fprime for p in dyn]) > 3 * max(static_tv)


def test_callable_probe_history():
    p = CallableProbe(lambda a: a - 1.0, f=lambda a: 0.5 * (a - 1.0) ** 2)
    assert p.eval_at(3.0) == (2.0, 2.0)
    assert p.history == [3.0] and p.eval_counter == 1


def test_scan_csv(tmp_path, iris_problem):
    probe, _ = _full_probe(iris_problem)
    pts = scan(probe, [0.0, 0.1])
    path = tmp_path / "scan.csv"
    write_scan_csv(path, pts)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["alpha", "F", "Fprime", "batch_seq"]
    assert float(rows[2][2]) == pts[1].Fprime
