"""Probability-vector primitives: validation, norms, weighted means, and
lattice enumeration on the simplex.

A Forecast is an immutable point of the m-dimensional probability simplex.
Invalid input is always an error; nothing is renormalized silently, because
a silent fix here would mask genuine failures in downstream dominance checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    LengthMismatch,
    NegativeEntry,
    NonPositiveWeight,
    SumOutOfTolerance,
    TooFewStates,
)

# Absolute tolerance on the simplex sum constraint. Downstream formulas
# tolerate this much drift without renormalization.
SUM_TOL = 1e-9


@dataclass(frozen=True)
class Forecast:
    """A probability vector over m >= 2 mutually exclusive outcome states.

    Entries are 64-bit floats, each >= 0, summing to 1 within SUM_TOL.
    Immutable and hashable; safe to share between threads.
    """

    probs: tuple[float, ...]

    def __post_init__(self):
        if len(self.probs) < 2:
            raise TooFewStates(f"need at least 2 states, got {len(self.probs)}")
        for p in self.probs:
            if p < 0.0:
                raise NegativeEntry(f"negative entry {p!r}")
        total = math.fsum(self.probs)
        if abs(total - 1.0) > SUM_TOL:
            raise SumOutOfTolerance(total, SUM_TOL)

    @property
    def m(self) -> int:
        return len(self.probs)

    def __getitem__(self, j: int) -> float:
        return self.probs[j]

    def __len__(self) -> int:
        return len(self.probs)

    def __iter__(self):
        return iter(self.probs)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.probs, dtype=np.float64)


def validate_forecast(raw: Sequence[float], tol: float = SUM_TOL) -> Forecast:
    """Validate a raw sequence as a probability vector.

    Raises NegativeEntry, SumOutOfTolerance (reporting the actual sum), or
    TooFewStates. Entries are never renormalized.
    """
    vals = tuple(float(x) for x in raw)
    if len(vals) < 2:
        raise TooFewStates(f"need at least 2 states, got {len(vals)}")
    for p in vals:
        if p < 0.0:
            raise NegativeEntry(f"negative entry {p!r}")
    total = math.fsum(vals)
    if abs(total - 1.0) > tol:
        raise SumOutOfTolerance(total, tol)
    return Forecast(vals)


def two_norm(f: Forecast) -> float:
    """Euclidean norm of the vector; lies in [1/sqrt(m), 1]."""
    return math.sqrt(math.fsum(p * p for p in f.probs))


def weighted_mean(
    forecasts: Sequence[Forecast], weights: Sequence[float]
) -> Forecast:
    """Convex combination of forecasts with positive weights.

    The result is itself a valid Forecast (convexity closure).
    """
    if len(forecasts) != len(weights):
        raise LengthMismatch(
            f"{len(forecasts)} forecasts vs {len(weights)} weights"
        )
    if not forecasts:
        raise LengthMismatch("empty forecast sequence")
    for w in weights:
        if w <= 0.0:
            raise NonPositiveWeight(f"weight {w!r} must be > 0")
    m = forecasts[0].m
    for f in forecasts:
        if f.m != m:
            raise LengthMismatch("forecasts have mixed lengths")
    w_arr = np.asarray(weights, dtype=np.float64)
    p_arr = np.asarray([f.probs for f in forecasts], dtype=np.float64)
    mean = (w_arr[:, None] * p_arr).sum(axis=0) / w_arr.sum()
    # Clip float dust so convex combinations of valid points stay valid.
    mean = np.clip(mean, 0.0, None)
    return Forecast(tuple(float(x) for x in mean))


def _compositions(total: int, parts: int) -> Iterable[tuple[int, ...]]:
    """All tuples of `parts` non-negative ints summing to `total`, lexicographic."""
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in _compositions(total - head, parts - 1):
            yield (head,) + rest


def simplex_grid(m: int, resolution: int) -> list[Forecast]:
    """All lattice forecasts with entries k_j/resolution summing to 1.

    Count equals C(resolution + m - 1, m - 1). Order is deterministic
    (lexicographic in the integer compositions).
    """
    if m < 2:
        raise TooFewStates(f"need at least 2 states, got {m}")
    if resolution < 1:
        raise ValueError(f"resolution must be >= 1, got {resolution}")
    out = []
    for comp in _compositions(resolution, m):
        out.append(Forecast(tuple(k / resolution for k in comp)))
    return out


def grid_array(m: int, resolution: int) -> np.ndarray:
    """The same lattice as simplex_grid, as an (N, m) float array.

    Rows appear in the same order as simplex_grid. Used by vectorized
    grid sweeps where Forecast objects would be overhead.
    """
    if m < 2:
        raise TooFewStates(f"need at least 2 states, got {m}")
    if resolution < 1:
        raise ValueError(f"resolution must be >= 1, got {resolution}")
    comps = np.asarray(list(_compositions(resolution, m)), dtype=np.float64)
    return comps / resolution
