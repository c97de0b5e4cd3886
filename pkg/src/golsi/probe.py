"""One-dimensional views of the loss along a search direction.

A probe evaluation at step ``alpha`` draws one batch from its sampler and
returns the batch loss and directional derivative at ``origin + alpha * direction``,
both from that same batch. Every call counts as one function evaluation.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np

from golsi.data import Dataset
from golsi.model import Architecture, EvalResult, evaluate
from golsi.sampler import BatchSampler


class LineProbe:
    def __init__(
        self,
        arch: Architecture,
        data: Dataset,
        origin: np.ndarray,
        direction: np.ndarray,
        sampler: BatchSampler,
    ):
        origin = np.asarray(origin, dtype=np.float64)
        direction = np.asarray(direction, dtype=np.float64)
        if direction.shape != origin.shape or origin.shape != (arch.n_params,):
            raise ValueError("origin and direction must both have length p")
        self.arch = arch
        self.data = data
        self.origin = origin
        self.direction = direction
        self.sampler = sampler
        self.eval_counter = 0
        self.last: Optional[EvalResult] = None

    @property
    def direction_norm(self) -> float:
        return float(np.linalg.norm(self.direction))

    def point(self, alpha: float) -> np.ndarray:
        return self.origin + alpha * self.direction

    def eval_at(self, alpha: float):
        if not (math.isfinite(alpha) and alpha >= 0):
            raise ValueError(f"alpha must be finite and non-negative, got {alpha}")
        batch = self.sampler.draw()
        res = evaluate(self.arch, self.point(alpha), self.data, batch)
        self.eval_counter += 1
        self.last = res
        return res.loss, float(self.direction @ res.gradient)


class CallableProbe:
    """Probe over a plain function of ``alpha``; used for synthetic line searches."""

    def __init__(
        self,
        fprime: Callable[[float], float],
        direction_norm: float = 1.0,
        f: Optional[Callable[[float], float]] = None,
    ):
        self.fprime = fprime
        self.f = f
        self.direction_norm = float(direction_norm)
        self.eval_counter = 0
        self.history: List[float] = []

    def eval_at(self, alpha: float):
        if not (math.isfinite(alpha) and alpha >= 0):
            raise ValueError(f"alpha must be finite and non-negative, got {alpha}")
        self.eval_counter += 1
        self.history.append(alpha)
        value = self.f(alpha) if self.f is not None else float("nan")
        return value, float(self.fprime(alpha))


@dataclass(frozen=True)
class ScanPoint:
    alpha: float
    F: float
    Fprime: float
    batch_seq: int


def scan(probe, alpha_grid) -> List[ScanPoint]:
    grid = [float(a) for a in alpha_grid]
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise ValueError("alpha grid must be sorted ascending")
    out = []
    for a in grid:
        F, Fp = probe.eval_at(a)
        out.append(ScanPoint(a, F, Fp, probe.eval_counter))
    return out


def write_scan_csv(path, points: List[ScanPoint]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["alpha", "F", "Fprime", "batch_seq"])
        for p in points:
            w.writerow([repr(p.alpha), repr(p.F), repr(p.Fprime), p.batch_seq])
