"""Where do minima and SNN-GPPs sit along a line under dynamic sub-sampling?

A fixed direction (full-batch steepest descent at a seeded point) is scanned on
a uniform step grid many times, each scan drawing a fresh batch at every grid
point. Local minima of the sampled loss and negative-to-positive sign changes
of the sampled directional derivative are tallied per grid cell.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from golsi import gols
from golsi.model import NumericError, evaluate, init_params
from golsi.probe import LineProbe, scan
from golsi.sampler import BatchSampler, Mode, SamplerMode
from golsi.train import Problem


def detect_minima(values: Sequence[float]) -> List[int]:
    """Interior indices ``i`` with ``F[i-1] > F[i] < F[i+1]``."""
    f = np.asarray(values, dtype=np.float64)
    if f.size < 3:
        raise ValueError("need at least 3 points to detect minima")
    mid = f[1:-1]
    return (np.flatnonzero((f[:-2] > mid) & (mid < f[2:])) + 1).tolist()


def detect_snngpp(derivs: Sequence[float]) -> List[int]:
    """Indices ``i`` with ``F'[i-1] <= 0 < F'[i]``."""
    g = np.asarray(derivs, dtype=np.float64)
    if g.size < 2:
        raise ValueError("need at least 2 points to detect sign changes")
    return (np.flatnonzero((g[:-1] <= 0) & (g[1:] > 0)) + 1).tolist()


@dataclass(frozen=True)
class ScanSpec:
    grid_points: int = 100
    spacing: float = 0.002
    start: float = 0.0
    repeats: int = 100
    batch_sizes: Tuple[int, ...] = (10, 25, 50, 75, 100, 150)
    warmup_iters: int = 0
    init_seed: int = 1
    seed: int = 0
    window: int = 5

    def __post_init__(self):
        if self.grid_points < 3:
            raise ValueError("grid_points must be >= 3 for minimum detection")
        if not self.spacing > 0:
            raise ValueError("spacing must be positive")
        if self.start < 0:
            raise ValueError("start must be non-negative")
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")

    @property
    def grid(self) -> np.ndarray:
        return self.start + self.spacing * np.arange(self.grid_points)


@dataclass
class LocalizationHistogram:
    batch_size: int
    alphas: np.ndarray
    minima_count: np.ndarray
    snngpp_count: np.ndarray
    repeats: int
    skipped: int = 0
    minima_cells: List[int] = field(default_factory=list, repr=False)
    snngpp_cells: List[int] = field(default_factory=list, repr=False)

    @property
    def completed(self) -> int:
        return self.repeats - self.skipped

    @property
    def minima_std(self) -> float:
        return float(np.std(self.minima_cells)) if self.minima_cells else math.nan

    @property
    def snngpp_std(self) -> float:
        return float(np.std(self.snngpp_cells)) if self.snngpp_cells else math.nan

    def fraction_near(self, cell: int, window: int) -> float:
        if not self.snngpp_cells:
            return math.nan
        cells = np.asarray(self.snngpp_cells)
        return float(np.mean(np.abs(cells - cell) <= window))


@dataclass
class StudyResult:
    spec: ScanSpec
    optimum_cell: Optional[int]
    full_minima: List[int]
    histograms: List[LocalizationHistogram]

    def summary_rows(self) -> List[dict]:
        rows = []
        for h in self.histograms:
            done = max(h.completed, 1)
            ratio = h.snngpp_std / h.minima_std if h.minima_std > 0 else math.nan
            rows.append(dict(
                batch_size=h.batch_size,
                repeats=h.repeats,
                skipped=h.skipped,
                minima_mean=len(h.minima_cells) / done,
                snngpp_mean=len(h.snngpp_cells) / done,
                minima_std=h.minima_std,
                snngpp_std=h.snngpp_std,
                std_ratio=ratio,
                optimum_cell=self.optimum_cell,
                frac_near_optimum=(h.fraction_near(self.optimum_cell, self.spec.window)
                                   if self.optimum_cell is not None else math.nan),
            ))
        return rows


def reference_point(problem: Problem, spec: ScanSpec):
    """Seeded start point, optionally advanced by a few full-batch LS-SGD steps."""
    arch, data = problem.arch, problem.train
    if spec.warmup_iters <= 0:
        return init_params(arch, spec.init_seed)
    # Replay a full-batch run, then take its iterate after ``warmup_iters`` steps.
    x = init_params(arch, spec.init_seed)
    sampler = BatchSampler(data.M, SamplerMode(Mode.FULL), 0)
    alpha = gols.GolsConfig().alpha_min
    for _ in range(spec.warmup_iters):
        g = evaluate(arch, x, data, sampler.draw()).gradient
        probe = LineProbe(arch, data, x, -g, sampler)
        out = gols.search(probe, alpha, reuse_f0=-float(g @ g))
        x = probe.point(out.alpha_accepted)
        alpha = out.alpha_accepted
    return x


def steepest_descent_direction(problem: Problem, x) -> np.ndarray:
    data = problem.train
    return -evaluate(problem.arch, x, data, np.arange(data.M)).gradient


def _repeat_seed(spec: ScanSpec, batch_size: int, r: int) -> int:
    return int(np.random.SeedSequence([spec.seed, batch_size, r]).generate_state(1, np.uint64)[0])


def localization_study(problem: Problem, spec: ScanSpec = ScanSpec()) -> StudyResult:
    arch, data = problem.arch, problem.train
    x = reference_point(problem, spec)
    d = steepest_descent_direction(problem, x)
    grid = spec.grid

    full = scan(LineProbe(arch, data, x, d, BatchSampler(data.M, SamplerMode(Mode.FULL))), grid)
    full_snn = detect_snngpp([p.Fprime for p in full])
    full_min = detect_minima([p.F for p in full])
    optimum = full_snn[0] if len(full_snn) == 1 else None

    hists = []
    for bs in spec.batch_sizes:
        mode = SamplerMode(Mode.FULL) if bs >= data.M else SamplerMode(Mode.DYNAMIC, bs)
        h = LocalizationHistogram(bs, grid.copy(), np.zeros(grid.size, np.int64),
                                  np.zeros(grid.size, np.int64), spec.repeats)
        for r in range(spec.repeats):
            sampler = BatchSampler(data.M, mode, _repeat_seed(spec, bs, r))
            try:
                pts = scan(LineProbe(arch, data, x, d, sampler), grid)
            except NumericError:
                h.skipped += 1
                continue
            mins = detect_minima([p.F for p in pts])
            snn = detect_snngpp([p.Fprime for p in pts])
            np.add.at(h.minima_count, mins, 1)
            np.add.at(h.snngpp_count, snn, 1)
            h.minima_cells.extend(mins)
            h.snngpp_cells.extend(snn)
        hists.append(h)
    return StudyResult(spec, optimum, full_min, hists)


def snngpp_ball(h: LocalizationHistogram, coverage: float = 1.0) -> Tuple[float, float]:
    """Step interval holding the central ``coverage`` share of SNN-GPP detections."""
    if not h.snngpp_cells:
        raise ValueError("no SNN-GPP detections")
    cells = np.asarray(h.snngpp_cells)
    lo_q = (1.0 - coverage) / 2.0
    lo, hi = np.quantile(cells, [lo_q, 1.0 - lo_q], method="nearest")
    # a detection at cell i means the sign change lies in (alpha[i-1], alpha[i]]
    return float(h.alphas[max(lo - 1, 0)]), float(h.alphas[hi])


def write_histograms(path, result: StudyResult) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["batch_size", "cell_index", "alpha", "minima_count", "snngpp_count"])
        for h in result.histograms:
            for i, a in enumerate(h.alphas):
                w.writerow([h.batch_size, i, repr(float(a)), int(h.minima_count[i]),
                            int(h.snngpp_count[i])])


SUMMARY_COLUMNS = [
    "batch_size", "repeats", "skipped", "minima_mean", "snngpp_mean", "minima_std",
    "snngpp_std", "std_ratio", "optimum_cell", "frac_near_optimum",
]


def write_summary(path, result: StudyResult) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_COLUMNS)
        for row in result.summary_rows():
            w.writerow(["" if v is None else (repr(v) if isinstance(v, float) else v)
                        for v in (row[c] for c in SUMMARY_COLUMNS)])
