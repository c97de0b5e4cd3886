"""Training loops: steepest descent with GOLS-I step sizes, and fixed-step SGD.

Cost is counted in function evaluations (one loss + gradient on one batch).
Metrics (full training loss, train/test classification error) are computed
outside the budget.

With ``reuse_prev_gradient`` on, the gradient from the last evaluation of a
line search (taken at the accepted point, i.e. the next iterate) defines the
next steepest-descent direction and its directional derivative at zero, so an
iteration whose initial guess is accepted costs a single evaluation. Under
static sampling the batch changes between iterations, so the direction is
always recomputed on the freshly pinned batch.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from golsi import gols
from golsi.data import Dataset
from golsi.model import (
    Architecture,
    NumericError,
    classification_error,
    evaluate,
    init_params,
    loss_value,
)
from golsi.probe import LineProbe
from golsi.sampler import BatchSampler, Mode, SamplerMode

DIVERGENCE_LOSS = 1e12
DIVERGED = "Diverged"
FIXED = "Fixed"

CSV_COLUMNS = [
    "run_id", "n", "cum_fe", "loss", "train_err", "test_err",
    "alpha", "evals", "term", "batch_loss",
]


@dataclass(frozen=True)
class Problem:
    arch: Architecture
    train: Dataset
    test: Dataset
    name: str = "problem"


@dataclass(frozen=True)
class RunConfig:
    sampler: SamplerMode = SamplerMode(Mode.DYNAMIC, 100)
    optimizer: str = "gols-i"
    gols: gols.GolsConfig = gols.GolsConfig()
    fixed_alpha: float = 1.0
    max_func_evals: int = 3000
    metric_cadence: int = 1
    init_seed: int = 0
    sampler_seed: int = 1
    error_subsample: Optional[int] = None
    run_id: str = "run0"

    def __post_init__(self):
        if self.optimizer not in ("gols-i", "fixed"):
            raise ValueError(f"optimizer must be 'gols-i' or 'fixed', got {self.optimizer!r}")
        if self.max_func_evals <= 0:
            raise ValueError("max_func_evals must be positive")
        if self.metric_cadence < 1:
            raise ValueError("metric_cadence must be >= 1")
        if self.fixed_alpha < 0:
            raise ValueError("fixed_alpha must be non-negative")


@dataclass
class TrainRecord:
    run_id: str
    n: int
    cum_fe: int
    loss: float
    train_err: float
    test_err: float
    alpha: float
    evals: int
    term: str
    batch_loss: float

    def row(self) -> list:
        return [_fmt(getattr(self, c)) for c in CSV_COLUMNS]


def _fmt(v) -> str:
    if isinstance(v, float):
        return "" if math.isnan(v) else repr(v)
    return str(v)


class _Metrics:
    """Computes full-train loss and error rates every ``cadence`` evaluations."""

    def __init__(self, problem: Problem, cfg: RunConfig):
        self.problem = problem
        self.cadence = cfg.metric_cadence
        self.next_at = 0
        rng = np.random.default_rng([cfg.init_seed, 7])
        k = cfg.error_subsample
        self.train_idx = self._pick(rng, problem.train.M, k)
        self.test_idx = self._pick(rng, problem.test.M, k)

    @staticmethod
    def _pick(rng, M, k):
        if k is None or k >= M:
            return None
        return np.sort(rng.choice(M, size=k, replace=False))

    def __call__(self, x, cum_fe, force=False):
        if not force and cum_fe < self.next_at:
            return math.nan, math.nan, math.nan
        self.next_at = (cum_fe // self.cadence + 1) * self.cadence
        p = self.problem
        try:
            loss = loss_value(p.arch, x, p.train)
            tr = classification_error(p.arch, x, p.train, self.train_idx)
            te = classification_error(p.arch, x, p.test, self.test_idx) if p.test.M else math.nan
        except NumericError:
            return math.nan, math.nan, math.nan
        return loss, tr, te


def _diverged(loss: float) -> bool:
    return not math.isfinite(loss) or loss > DIVERGENCE_LOSS


def run_lssgd(cfg: RunConfig, problem: Problem) -> List[TrainRecord]:
    """Steepest descent with GOLS-I; stops once ``max_func_evals`` is reached."""
    arch, data = problem.arch, problem.train
    x = init_params(arch, cfg.init_seed)
    sampler = BatchSampler(data.M, cfg.sampler, cfg.sampler_seed)
    metrics = _Metrics(problem, cfg)
    reuse = cfg.gols.reuse_prev_gradient
    static = cfg.sampler.kind is Mode.STATIC
    alpha = cfg.gols.alpha_min
    saved = None
    cum = 0
    n = 0
    records: List[TrainRecord] = []
    while cum < cfg.max_func_evals:
        it_evals = 0
        try:
            if static and n > 0:
                sampler.refresh(n)
            if saved is None or static or not reuse:
                g = evaluate(arch, x, data, sampler.draw()).gradient
                it_evals += 1
            else:
                g = saved
            d = -g
            reuse_f0 = -float(g @ g) if reuse else None
            probe = LineProbe(arch, data, x, d, sampler)
            out = gols.search(probe, alpha, cfg.gols, reuse_f0)
        except (NumericError, gols.LineSearchError):
            cum += it_evals
            records.append(TrainRecord(cfg.run_id, n, cum, math.nan, math.nan, math.nan,
                                       math.nan, it_evals, DIVERGED, math.nan))
            break
        it_evals += out.evals
        cum += it_evals
        x = probe.point(out.alpha_accepted)
        saved = probe.last.gradient
        alpha = out.alpha_accepted
        batch_loss = probe.last.loss
        if _diverged(batch_loss):
            records.append(TrainRecord(cfg.run_id, n, cum, math.nan, math.nan, math.nan,
                                       alpha, it_evals, DIVERGED, batch_loss))
            break
        final = cum >= cfg.max_func_evals
        loss, tr, te = metrics(x, cum, force=final or n == 0)
        records.append(TrainRecord(cfg.run_id, n, cum, loss, tr, te, alpha, it_evals,
                                   out.termination.value, batch_loss))
        n += 1
    return records


def run_fixed(cfg: RunConfig, problem: Problem) -> List[TrainRecord]:
    """Plain SGD ``x <- x - alpha * g``; one evaluation per iteration."""
    arch, data = problem.arch, problem.train
    x = init_params(arch, cfg.init_seed)
    sampler = BatchSampler(data.M, cfg.sampler, cfg.sampler_seed)
    metrics = _Metrics(problem, cfg)
    static = cfg.sampler.kind is Mode.STATIC
    alpha = float(cfg.fixed_alpha)
    cum = 0
    n = 0
    records: List[TrainRecord] = []
    while cum < cfg.max_func_evals:
        if static and n > 0:
            sampler.refresh(n)
        try:
            res = evaluate(arch, x, data, sampler.draw())
            cum += 1
            x = x - alpha * res.gradient
            if not np.all(np.isfinite(x)):
                raise NumericError("non-finite parameters")
            final = cum >= cfg.max_func_evals
            loss, tr, te = metrics(x, cum, force=final or n == 0)
        except NumericError:
            records.append(TrainRecord(cfg.run_id, n, cum, math.nan, math.nan, math.nan,
                                       alpha, 1, DIVERGED, math.nan))
            break
        if _diverged(res.loss) or (not math.isnan(loss) and _diverged(loss)):
            records.append(TrainRecord(cfg.run_id, n, cum, loss, tr, te, alpha, 1,
                                       DIVERGED, res.loss))
            break
        records.append(TrainRecord(cfg.run_id, n, cum, loss, tr, te, alpha, 1, FIXED, res.loss))
        n += 1
    return records


def run(cfg: RunConfig, problem: Problem) -> List[TrainRecord]:
    return run_lssgd(cfg, problem) if cfg.optimizer == "gols-i" else run_fixed(cfg, problem)


def write_records(path, records: List[TrainRecord]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in records:
            w.writerow(r.row())


def read_records(path) -> List[TrainRecord]:
    def num(s, cast=float):
        return cast(s) if s != "" else math.nan

    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(TrainRecord(
                row["run_id"], int(row["n"]), int(row["cum_fe"]), num(row["loss"]),
                num(row["train_err"]), num(row["test_err"]), num(row["alpha"]),
                int(row["evals"]), row["term"], num(row["batch_loss"]),
            ))
    return out


@dataclass
class EvalStats:
    iterations: int
    min_fe: int
    max_fe: int
    mean_fe: float
    first_fe: int
    max_fe_after_first: int
    final_loss: float
    final_train_err: float
    final_test_err: float
    diverged: bool = field(default=False)


def eval_stats(records: List[TrainRecord]) -> EvalStats:
    """Function evaluations per iteration (min/max/mean) and final metrics."""
    if not records:
        raise ValueError("no records")
    fe = [r.evals for r in records]
    last_metric = next((r for r in reversed(records) if not math.isnan(r.loss)), records[-1])
    return EvalStats(
        iterations=len(fe),
        min_fe=min(fe),
        max_fe=max(fe),
        mean_fe=sum(fe) / len(fe),
        first_fe=fe[0],
        max_fe_after_first=max(fe[1:]) if len(fe) > 1 else fe[0],
        final_loss=last_metric.loss,
        final_train_err=last_metric.train_err,
        final_test_err=last_metric.test_err,
        diverged=records[-1].term == DIVERGED,
    )
