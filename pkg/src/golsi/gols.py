"""GOLS-I: inexact gradient-only line search.

The search looks only at the sign of the directional derivative. Starting from
a guess it grows the step by ``eta`` while the derivative is negative and
shrinks it while positive, stopping at the first sign change or at a step
bound. A guess whose derivative is positive but already reduced in magnitude
below ``c2 * |F'(0)|`` is accepted as is.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from typing import Optional


class Termination(str, enum.Enum):
    IMMEDIATE_ACCEPT = "ImmediateAccept"
    SIGN_CHANGE_UP = "SignChangeUp"
    SIGN_CHANGE_DOWN = "SignChangeDown"
    MAX_ALPHA_CLAMP = "MaxAlphaClamp"
    MIN_ALPHA_CLAMP = "MinAlphaClamp"


class LineSearchError(ArithmeticError):
    def __init__(self, message: str, alpha: float):
        super().__init__(message)
        self.alpha = alpha


@dataclass(frozen=True)
class GolsConfig:
    eta: float = 2.0
    c2: float = 0.9
    alpha_min: float = 1e-8
    alpha_max_cap: float = 1e7
    reuse_prev_gradient: bool = True

    def __post_init__(self):
        if not self.eta > 1:
            raise ValueError(f"eta must exceed 1, got {self.eta}")
        if not self.c2 > 0:
            raise ValueError(f"c2 must be positive, got {self.c2}")
        if not 0 < self.alpha_min < self.alpha_max_cap:
            raise ValueError("need 0 < alpha_min < alpha_max_cap")


@dataclass(frozen=True)
class GolsOutcome:
    alpha_accepted: float
    evals: int
    termination: Termination
    fprime_at_zero: float
    fprime_at_accept: float
    alpha_max: float


def alpha_max_for(direction_norm: float, cfg: GolsConfig = GolsConfig()) -> float:
    """Largest admissible step: ``min(1 / ||d||, alpha_max_cap)``."""
    if direction_norm == 0:
        return cfg.alpha_max_cap
    return min(1.0 / direction_norm, cfg.alpha_max_cap)


def _fprime(probe, alpha):
    _, fp = probe.eval_at(alpha)
    if not math.isfinite(fp):
        raise LineSearchError(f"non-finite directional derivative at alpha={alpha!r}", alpha)
    return fp


def search(probe, alpha_guess: float, cfg: GolsConfig = GolsConfig(),
           reuse_f0: Optional[float] = None) -> GolsOutcome:
    """Run one line search on ``probe``.

    ``reuse_f0`` is a directional derivative at the origin that is already
    known (e.g. the previous iteration's final gradient projected on the new
    direction); when given it costs no evaluation.
    """
    if not alpha_guess > 0:
        raise ValueError(f"alpha_guess must be positive, got {alpha_guess}")
    norm = probe.direction_norm
    a_min = cfg.alpha_min
    a_max = alpha_max_for(norm, cfg)
    eta = cfg.eta
    evals = 0

    if reuse_f0 is None:
        f0 = _fprime(probe, 0.0)
        evals += 1
    else:
        f0 = float(reuse_f0)

    alpha = min(max(alpha_guess, a_min), a_max)
    fa = _fprime(probe, alpha)
    evals += 1
    tol_dd = abs(cfg.c2 * f0)

    if norm == 0:
        warnings.warn("zero search direction; returning alpha_min", RuntimeWarning)
        return GolsOutcome(a_min, evals, Termination.MIN_ALPHA_CLAMP, f0, fa, a_max)

    # Immediate accept overrides the direction choice. A derivative of exactly
    # zero at the guess falls through to the default branch (shrink).
    grow = fa < 0
    if 0 < fa < tol_dd:
        return GolsOutcome(alpha, evals, Termination.IMMEDIATE_ACCEPT, f0, fa, a_max)

    if grow:
        while True:
            if alpha * eta > a_max:
                term = Termination.MAX_ALPHA_CLAMP
                break
            alpha *= eta
            fa = _fprime(probe, alpha)
            evals += 1
            if fa >= 0:
                term = Termination.SIGN_CHANGE_UP
                break
    else:
        while True:
            if alpha / eta < a_min:
                term = Termination.MIN_ALPHA_CLAMP
                break
            alpha /= eta
            fa = _fprime(probe, alpha)
            evals += 1
            if fa < 0:
                term = Termination.SIGN_CHANGE_DOWN
                break
    return GolsOutcome(alpha, evals, term, f0, fa, a_max)
