"""Named scalar observables with analytic gradients."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class Observable:
    """Scalar observable J with its gradient; both vectorized over rows of states."""

    name: str
    fn: Callable[[np.ndarray], np.ndarray]
    grad: Callable[[np.ndarray], np.ndarray]


def _cos4x2(x):
    return np.cos(4.0 * np.asarray(x)[..., 1])


def _cos4x2_grad(x):
    x = np.asarray(x)
    out = np.zeros_like(x, dtype=float)
    out[..., 1] = -4.0 * np.sin(4.0 * x[..., 1])
    return out


OBSERVABLES: dict[str, Observable] = {
    "cos4x2": Observable("cos4x2", _cos4x2, _cos4x2_grad),
}
