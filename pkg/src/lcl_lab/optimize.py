"""One-dimensional bracketed minimisation."""

from __future__ import annotations

import math
from typing import Callable, NamedTuple

import numpy as np

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class Minimum(NamedTuple):
    x: float
    fx: float
    at_boundary: bool
    evaluations: int


def golden_section(fn: Callable[[float], float], lo: float, hi: float, *,
                   width: float = 1e-8, max_iter: int = 500) -> tuple[float, float, int]:
    """Golden-section search for a minimum of ``fn`` on [lo, hi].

    Stops when the bracket is narrower than ``width``; returns
    ``(x, fn(x), evaluations)`` for the best point seen.
    """
    a, b = float(lo), float(hi)
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = fn(c), fn(d)
    best = min((fc, c), (fd, d))
    n = 2
    while b - a > width and n < max_iter:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = fn(c)
            best = min(best, (fc, c))
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = fn(d)
            best = min(best, (fd, d))
        n += 1
    return best[1], best[0], n


def grid_then_golden(fn: Callable[[float], float], lo: float, hi: float, *,
                     n_grid: int = 200, width: float = 1e-8) -> Minimum:
    """Seed with an ``n_grid``-point grid, then refine between the best point's neighbours.

    ``at_boundary`` is set when the grid minimum sits on an end point, which
    means the objective was not seen to turn around inside [lo, hi].
    """
    xs = np.linspace(lo, hi, n_grid)
    fs = np.array([fn(float(x)) for x in xs])
    if not np.any(np.isfinite(fs)):
        return Minimum(float(xs[0]), float(fs[0]), True, n_grid)
    i = int(np.nanargmin(np.where(np.isnan(fs), np.inf, fs)))
    at_boundary = i in (0, n_grid - 1)
    a, b = float(xs[max(i - 1, 0)]), float(xs[min(i + 1, n_grid - 1)])
    x, fx, n = golden_section(fn, a, b, width=width)
    if fs[i] < fx:
        x, fx = float(xs[i]), float(fs[i])
    return Minimum(x, fx, at_boundary, n_grid + n)
