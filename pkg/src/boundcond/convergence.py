"""Analytical width models for equal and homogeneous-asymmetric cutsets, and decay fits."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class DecayFit:
    k: float
    residual: float
    points: int


def worst_case_width(n: int, t: float, k_time: float = 1.0) -> float:
    """Width after time ``t`` when all 2**n instances weigh the same."""
    if n < 1 or t < 0 or k_time <= 0:
        raise ValueError("need n >= 1, t >= 0, k_time > 0")
    solved = t / k_time
    if solved > 2**n:
        raise ValueError(f"{solved} solves exceed the {2**n} instances")
    return 1.0 - solved * 2.0**-n


def binomial_width(n: int, p: float, m: int) -> float:
    """Width once the m+1 heaviest weight classes of a homogeneous cutset are solved.

    Class j holds C(n, j) instances of weight p**(n-j) * (1-p)**j.
    """
    if n < 1 or not 0.0 <= p <= 1.0 or not 0 <= m <= n:
        raise ValueError("need n >= 1, p in [0, 1], 0 <= m <= n")
    if m == n:
        return 0.0
    solved = math.fsum(math.comb(n, j) * p ** (n - j) * (1 - p) ** j for j in range(m + 1))
    return min(1.0, max(0.0, 1.0 - solved))


def class_boundaries(n: int) -> list[int]:
    """Cumulative instance counts at the end of each weight class."""
    return list(np.cumsum([math.comb(n, j) for j in range(n + 1)]).tolist())


def fit_decay(trace: Iterable[tuple[float, float]]) -> DecayFit:
    """Least-squares k for width ~ exp(-k (t + 1)), fitted in log space through the origin."""
    pts = [(float(t), float(w)) for t, w in trace]
    if len(pts) < 2:
        raise ValueError("need at least two points")
    kept = [(t, w) for t, w in pts if w > 0]
    if len(kept) < len(pts):
        log.info("excluded %d non-positive widths from the decay fit", len(pts) - len(kept))
    if not kept:
        raise ValueError("no positive widths to fit")
    x = np.array([t + 1.0 for t, _ in kept])
    y = np.log([w for _, w in kept])
    k = float(-(x @ y) / (x @ x))
    residual = float(np.sqrt(np.mean((y + k * x) ** 2)))
    return DecayFit(k, residual, len(kept))


def homogeneous_network(n: int, p: float):
    """n independent binary roots, each the common cause of its own diamond.

    Root ``Ck`` is true with probability ``p``; every other table is uniform,
    so evidence on a diamond's sink leaves the instance weights untouched and
    the cutset {C0..} is marginally independent and homogeneous.
    """
    from .network import BeliefNetwork, ConditionalTable, Variable

    tf = ("t", "f")
    half = [0.5, 0.5]
    variables, tables = [], []
    for k in range(n):
        c, x, y, z = (f"{s}{k:02d}" for s in "CXYZ")
        variables += [Variable(v, tf) for v in (c, x, y, z)]
        tables += [
            ConditionalTable(c, (), [[p, 1 - p]]),
            ConditionalTable(x, (c,), [half, half]),
            ConditionalTable(y, (c,), [half, half]),
            ConditionalTable(z, (x, y), [half] * 4),
        ]
    return BeliefNetwork(tuple(variables), tuple(tables))
