"""Reference computations for checking the implementation.

These deliberately avoid the backprop and line-search code paths: finite
differences only call the forward loss, and the sign-change search is a plain
grid walk.
"""

from __future__ import annotations

from typing import Callable, Iterable, Optional

import numpy as np

from golsi.data import Dataset
from golsi.model import Architecture, evaluate, loss_value

MAX_EXHAUSTIVE = 1000


def fd_gradient(loss_fn: Callable[[np.ndarray], float], x, h: float = 1e-6,
                coords: Optional[Iterable[int]] = None) -> np.ndarray:
    """Central differences ``(L(x + h e_j) - L(x - h e_j)) / 2h``.

    ``coords`` restricts the work to a subset of coordinates; the others are
    left at zero.
    """
    if not h > 0:
        raise ValueError(f"step h must be positive, got {h}")
    x = np.array(x, dtype=np.float64)
    g = np.zeros_like(x)
    idx = range(x.size) if coords is None else coords
    for j in idx:
        orig = x[j]
        x[j] = orig + h
        up = loss_fn(x)
        x[j] = orig - h
        down = loss_fn(x)
        x[j] = orig
        g[j] = (up - down) / (2.0 * h)
    return g


def fd_model_gradient(a: Architecture, x, d: Dataset, batch, h: float = 1e-6,
                      coords=None) -> np.ndarray:
    batch = np.asarray(batch, dtype=np.int64)
    return fd_gradient(lambda z: loss_value(a, z, d, batch), x, h, coords)


def relative_error(approx, exact) -> float:
    """Max of ``|approx - exact| / max(1, |exact|)`` over components."""
    approx = np.asarray(approx)
    exact = np.asarray(exact)
    return float(np.max(np.abs(approx - exact) / np.maximum(1.0, np.abs(exact))))


def brute_sign_change(fprime: Callable[[float], float], lo: float, hi: float,
                      steps: int) -> Optional[float]:
    """First grid point ``a`` on ``linspace(lo, hi, steps)`` with ``F'(prev) < 0 <= F'(a)``."""
    if not lo < hi:
        raise ValueError("need lo < hi")
    if steps < 2:
        raise ValueError("need at least 2 steps")
    prev = None
    for a in np.linspace(lo, hi, steps):
        v = fprime(float(a))
        if prev is not None and prev < 0 <= v:
            return float(a)
        prev = v
    return None


def doubling_evals(fprime: Callable[[float], float], start: float, eta: float,
                   alpha_max: float) -> tuple:
    """Count growth steps ``start * eta**k`` until ``F' >= 0`` or the bound.

    Returns ``(k, alpha)`` for the first ``k >= 1`` that stops the growth.
    """
    k = 0
    alpha = start
    while alpha * eta <= alpha_max:
        k += 1
        alpha = start * eta**k
        if fprime(alpha) >= 0:
            break
    return k, alpha


class ExhaustiveTooLarge(ValueError):
    pass


def exhaustive_expectation(a: Architecture, x, d: Dataset):
    """Average loss and gradient over all M singleton batches."""
    if d.M > MAX_EXHAUSTIVE:
        raise ExhaustiveTooLarge(f"M={d.M} exceeds the enumeration limit {MAX_EXHAUSTIVE}")
    loss = 0.0
    grad = np.zeros(a.n_params)
    for i in range(d.M):
        r = evaluate(a, x, d, [i])
        loss += r.loss
        grad += r.gradient
    return loss / d.M, grad / d.M
