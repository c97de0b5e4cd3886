"""Mini-batch index sampling: full batch, static and dynamic sub-sampling.

Static: one batch pinned per outer iteration, redrawn by :meth:`BatchSampler.refresh`.
Dynamic: a fresh batch for every draw. Both sample uniformly with replacement.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


class Mode(str, enum.Enum):
    FULL = "full"
    STATIC = "static"
    DYNAMIC = "dynamic"


class ModeError(RuntimeError):
    pass


@dataclass(frozen=True)
class SamplerMode:
    kind: Mode = Mode.DYNAMIC
    batch_size: int = 10

    def __post_init__(self):
        object.__setattr__(self, "kind", Mode(self.kind))


class BatchSampler:
    """Owns a seeded PCG64 stream; a run is reproducible from ``seed`` alone."""

    def __init__(self, M: int, mode: SamplerMode, seed: int = 0):
        if M < 1:
            raise ValueError("dataset must be non-empty")
        if mode.kind is not Mode.FULL and not 1 <= mode.batch_size <= M:
            raise ValueError(f"batch_size must lie in [1, {M}], got {mode.batch_size}")
        self.M = M
        self.mode = mode
        self.rng = np.random.Generator(np.random.PCG64(seed))
        self._full = np.arange(M)
        self.current_static_batch = None
        if mode.kind is Mode.STATIC:
            self.current_static_batch = self._sample()

    @property
    def batch_size(self) -> int:
        return self.M if self.mode.kind is Mode.FULL else self.mode.batch_size

    def _sample(self) -> np.ndarray:
        return self.rng.integers(0, self.M, size=self.mode.batch_size)

    def draw(self) -> np.ndarray:
        if self.mode.kind is Mode.FULL:
            return self._full
        if self.mode.kind is Mode.STATIC:
            return self.current_static_batch
        return self._sample()

    def refresh(self, iteration: int = 0) -> None:
        if self.mode.kind is not Mode.STATIC:
            raise ModeError(f"refresh is only defined for static sampling, not {self.mode.kind.value}")
        self.current_static_batch = self._sample()
