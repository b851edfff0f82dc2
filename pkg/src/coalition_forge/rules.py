"""Scoring rules: the four named strictly proper families, binary rules
built from a convex generator, an improper linear control rule, and
empirical strict-properness checking.

Outcome indices are 0-based throughout the Python API; serialization
layers convert to 1-based for files and messages.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    GeneratorMismatch,
    LogOfZero,
    NonMonotoneGenerator,
    OutOfDomain,
    TooFewStates,
    UnboundedRule,
    UnsupportedRule,
    ValidationError,
)
from .simplex import Forecast, grid_array


class RuleKind(str, Enum):
    QUADRATIC = "quadratic"
    LOGARITHMIC = "logarithmic"
    GENERALIZED_LOG = "generalized_logarithmic"
    SPHERICAL = "spherical"
    CUSTOM_BINARY = "custom_binary"
    # Improper control rule: expected score is linear in the report, so it
    # is maximized at a vertex rather than at the truth. Used to prove the
    # properness checker can fail.
    LINEAR = "linear"


@dataclass(frozen=True)
class ConvexGenerator:
    """A strictly convex, continuously differentiable scalar function G
    with derivative g_prime, defined on an open interval inside (0, 1).

    Binary rules are built from it: the score pair
    (G(r) + (1-r)G'(r), G(r) - rG'(r)) is strictly proper exactly when
    G is strictly convex.
    """

    g: Callable[[float], float]
    g_prime: Callable[[float], float]
    domain: tuple[float, float] = (0.0, 1.0)
    label: str = "custom"

    def __post_init__(self):
        lo, hi = self.domain
        if not (0.0 <= lo < hi <= 1.0):
            raise ValidationError(f"domain {self.domain!r} must be an interval within [0, 1]")

    def spot_check(self, points: int = 33, h: float = 1e-5) -> None:
        """Sample the interior: g_prime must be strictly increasing, and a
        central difference of g must match g_prime within 1e-6 relative.

        Raises NonMonotoneGenerator or GeneratorMismatch.
        """
        lo, hi = self.domain
        inner_lo, inner_hi = lo + 2 * h, hi - 2 * h
        xs = [inner_lo + (inner_hi - inner_lo) * i / (points - 1) for i in range(points)]
        derivs = [self.g_prime(x) for x in xs]
        for a, b in zip(derivs, derivs[1:]):
            if not b > a:
                raise NonMonotoneGenerator(
                    f"{self.label}: derivative not strictly increasing ({a!r} -> {b!r})"
                )
        for x, d in zip(xs, derivs):
            fd = (self.g(x + h) - self.g(x - h)) / (2 * h)
            if abs(fd - d) > 1e-6 * max(1.0, abs(d)):
                raise GeneratorMismatch(
                    f"{self.label}: finite difference {fd!r} vs derivative {d!r} at {x!r}"
                )


def logit_generator() -> ConvexGenerator:
    """Negative-entropy generator; its derivative is the log-odds function.

    The binary rule it induces is the logarithmic score.
    """
    return ConvexGenerator(
        g=lambda r: r * math.log(r) + (1.0 - r) * math.log(1.0 - r),
        g_prime=lambda r: math.log(r / (1.0 - r)),
        domain=(0.0, 1.0),
        label="negative-entropy",
    )


def binary_quadratic_generator() -> ConvexGenerator:
    """Generator 2r^2 - 2r + 1; induces exactly the binary quadratic score."""
    return ConvexGenerator(
        g=lambda r: 2.0 * r * r - 2.0 * r + 1.0,
        g_prime=lambda r: 4.0 * r - 2.0,
        domain=(0.0, 1.0),
        label="binary-quadratic",
    )


@dataclass(frozen=True)
class ScoringRule:
    """A scoring rule family member.

    affine_offsets holds one additive constant per state (None means all
    zero); b is a positive scale. floor applies to the generalized
    logarithmic family only; generator to custom binary rules only.
    Positive affine transforms preserve strict properness.
    """

    kind: RuleKind
    affine_offsets: tuple[float, ...] | None = None
    b: float = 1.0
    floor: float = 0.0
    generator: ConvexGenerator | None = None

    def __post_init__(self):
        if self.b <= 0.0:
            raise ValidationError(f"scale b must be > 0, got {self.b!r}")
        if self.floor < 0.0:
            raise ValidationError(f"floor must be >= 0, got {self.floor!r}")
        if self.floor != 0.0 and self.kind is not RuleKind.GENERALIZED_LOG:
            raise ValidationError("floor applies only to the generalized logarithmic rule")
        if (self.generator is not None) != (self.kind is RuleKind.CUSTOM_BINARY):
            raise ValidationError("generator is required for custom binary rules and invalid elsewhere")

    def offsets_for(self, m: int) -> np.ndarray:
        if self.affine_offsets is None:
            return np.zeros(m)
        if len(self.affine_offsets) != m:
            raise DimensionMismatch(
                f"{len(self.affine_offsets)} affine offsets for {m} states"
            )
        return np.asarray(self.affine_offsets, dtype=np.float64)


def quadratic_rule(a: Sequence[float] | None = None, b: float = 1.0) -> ScoringRule:
    return ScoringRule(RuleKind.QUADRATIC, _tuple_or_none(a), b)


def logarithmic_rule(a: Sequence[float] | None = None, b: float = 1.0) -> ScoringRule:
    return ScoringRule(RuleKind.LOGARITHMIC, _tuple_or_none(a), b)


def generalized_log_rule(
    floor: float, a: Sequence[float] | None = None, b: float = 1.0
) -> ScoringRule:
    return ScoringRule(RuleKind.GENERALIZED_LOG, _tuple_or_none(a), b, floor)


def spherical_rule(a: Sequence[float] | None = None, b: float = 1.0) -> ScoringRule:
    return ScoringRule(RuleKind.SPHERICAL, _tuple_or_none(a), b)


def linear_rule(a: Sequence[float] | None = None, b: float = 1.0) -> ScoringRule:
    return ScoringRule(RuleKind.LINEAR, _tuple_or_none(a), b)


def custom_binary_rule(
    generator: ConvexGenerator, a: Sequence[float] | None = None, b: float = 1.0
) -> ScoringRule:
    return ScoringRule(RuleKind.CUSTOM_BINARY, _tuple_or_none(a), b, generator=generator)


def _tuple_or_none(a: Sequence[float] | None) -> tuple[float, ...] | None:
    return None if a is None else tuple(float(x) for x in a)


def savage_binary_score(gen: ConvexGenerator, r: float, outcome: int) -> float:
    """Score of a binary report (r, 1-r) built from a convex generator.

    outcome 0 pays G(r) + (1-r)G'(r); outcome 1 pays G(r) - rG'(r).
    r must lie strictly inside the generator's domain.
    """
    lo, hi = gen.domain
    if not (lo < r < hi):
        raise OutOfDomain(f"report probability {r!r} outside open domain ({lo!r}, {hi!r})")
    if outcome == 0:
        return gen.g(r) + (1.0 - r) * gen.g_prime(r)
    if outcome == 1:
        return gen.g(r) - r * gen.g_prime(r)
    raise DimensionMismatch(f"outcome index {outcome} for a binary rule")


def score(rule: ScoringRule, report: Forecast, outcome: int) -> float:
    """Score of a single report at a single realized outcome (0-based)."""
    m = report.m
    if not (0 <= outcome < m):
        raise DimensionMismatch(f"outcome index {outcome} out of range for m={m}")
    a = rule.offsets_for(m)
    r = report.probs
    b = rule.b
    kind = rule.kind
    if kind is RuleKind.QUADRATIC:
        return float(a[outcome] + b * (2.0 * r[outcome] - math.fsum(x * x for x in r)))
    if kind is RuleKind.LOGARITHMIC or (
        kind is RuleKind.GENERALIZED_LOG and rule.floor == 0.0
    ):
        if r[outcome] <= 0.0:
            raise LogOfZero(
                f"state {outcome + 1} has probability {r[outcome]!r}; "
                "the logarithmic score is undefined there"
            )
        return float(a[outcome] + b * math.log(r[outcome]))
    if kind is RuleKind.GENERALIZED_LOG:
        l = rule.floor
        tail = math.fsum(math.log(x + l) for x in r)
        return float(a[outcome] + b * math.log(r[outcome] + l) + b * l * tail)
    if kind is RuleKind.SPHERICAL:
        norm = math.sqrt(math.fsum(x * x for x in r))
        return float(a[outcome] + b * r[outcome] / norm)
    if kind is RuleKind.CUSTOM_BINARY:
        if m != 2:
            raise DimensionMismatch("custom binary rules support exactly 2 states")
        return float(a[outcome] + b * savage_binary_score(rule.generator, r[0], outcome))
    if kind is RuleKind.LINEAR:
        return float(a[outcome] + b * r[outcome])
    raise UnsupportedRule(f"unknown rule kind {kind!r}")


def score_table(rule: ScoringRule, reports: np.ndarray) -> np.ndarray:
    """Scores for a batch of reports at every outcome.

    reports is (n, m); the result is (n, m) with entry (i, j) the score of
    row i when state j occurs. Where a logarithmic score is undefined
    (zero probability on the observed state) the entry is -inf rather than
    an error; callers that need strictness mask or use score() instead.
    """
    R = np.asarray(reports, dtype=np.float64)
    if R.ndim != 2:
        raise DimensionMismatch(f"expected a 2-d report batch, got shape {R.shape}")
    n, m = R.shape
    a = rule.offsets_for(m)
    b = rule.b
    kind = rule.kind
    if kind is RuleKind.QUADRATIC:
        return a[None, :] + b * (2.0 * R - (R * R).sum(axis=1, keepdims=True))
    if kind is RuleKind.LOGARITHMIC or (
        kind is RuleKind.GENERALIZED_LOG and rule.floor == 0.0
    ):
        with np.errstate(divide="ignore"):
            return a[None, :] + b * np.log(R)
    if kind is RuleKind.GENERALIZED_LOG:
        l = rule.floor
        shifted = np.log(R + l)
        return a[None, :] + b * shifted + b * l * shifted.sum(axis=1, keepdims=True)
    if kind is RuleKind.SPHERICAL:
        norms = np.sqrt((R * R).sum(axis=1, keepdims=True))
        return a[None, :] + b * R / norms
    if kind is RuleKind.LINEAR:
        return a[None, :] + b * R
    if kind is RuleKind.CUSTOM_BINARY:
        if m != 2:
            raise DimensionMismatch("custom binary rules support exactly 2 states")
        out = np.empty((n, m))
        for i in range(n):
            for j in range(m):
                try:
                    out[i, j] = savage_binary_score(rule.generator, R[i, 0], j)
                except OutOfDomain:
                    out[i, j] = -np.inf
        return a[None, :] + b * out
    raise UnsupportedRule(f"unknown rule kind {kind!r}")


def expected_score(rule: ScoringRule, report: Forecast, belief: Forecast) -> float:
    """Expectation of the report's score under the belief distribution."""
    if report.m != belief.m:
        raise DimensionMismatch(f"report m={report.m} vs belief m={belief.m}")
    return math.fsum(
        belief[j] * score(rule, report, j) for j in range(report.m)
    )


@dataclass(frozen=True)
class PropernessReport:
    """Outcome of a grid properness check.

    passed means every checked competitor had strictly lower expected score
    than truthful reporting; max_margin is the largest competitor-minus-truth
    gap observed (negative when passing); nearest_competitor attains it.
    Grid points where the score is undefined are skipped and counted.
    """

    passed: bool
    max_margin: float
    nearest_competitor: Forecast | None
    checked: int
    skipped: int


def check_strict_properness(
    rule: ScoringRule, belief: Forecast, resolution: int
) -> PropernessReport:
    """Compare truthful reporting against every lattice report.

    A strictly proper rule must give the truth a strictly higher expected
    score than any other report on the grid. Boundary reports that a rule
    cannot score (zeros under a pure logarithmic rule, generator domain
    edges) are skipped and counted, not failed.
    """
    if resolution < 2:
        raise ValidationError(f"resolution must be >= 2, got {resolution}")
    m = belief.m
    p = belief.as_array()
    grid = grid_array(m, resolution)
    table = score_table(rule, grid)
    # Zero-belief states contribute nothing to the expectation even where
    # the score there is -inf, so neutralize those columns first.
    zero_cols = p == 0.0
    if zero_cols.any():
        table = table.copy()
        table[:, zero_cols] = 0.0
    with np.errstate(invalid="ignore"):
        expectations = table @ p
    truth_table = score_table(rule, p[None, :])
    if zero_cols.any():
        truth_table[:, zero_cols] = 0.0
    truth_value = float(truth_table[0] @ p)
    if not math.isfinite(truth_value):
        raise ValidationError(
            "expected score at the truthful report is not finite; "
            "the belief lies outside the rule's domain"
        )
    self_rows = np.abs(grid - p[None, :]).max(axis=1) <= 1e-12
    bad_rows = ~np.isfinite(expectations)
    competitor = ~self_rows & ~bad_rows
    skipped = int(bad_rows.sum())
    checked = int(competitor.sum())
    if checked == 0:
        return PropernessReport(True, -math.inf, None, 0, skipped)
    margins = expectations[competitor] - truth_value
    best = int(np.argmax(margins))
    max_margin = float(margins[best])
    nearest = Forecast(tuple(float(x) for x in grid[competitor][best]))
    return PropernessReport(max_margin < 0.0, max_margin, nearest, checked, skipped)


def normalize_to_unit_interval(rule: ScoringRule, m: int) -> ScoringRule:
    """Rescale a bounded rule so its score range over all reports and
    outcomes is exactly [0, 1].

    The transform is positive affine, so strict properness is preserved.
    Defined for the quadratic, spherical, and floored generalized
    logarithmic families, whose exact extremes sit at simplex vertices.
    """
    if m < 2:
        raise TooFewStates(f"need at least 2 states, got {m}")
    kind = rule.kind
    if kind is RuleKind.LOGARITHMIC or (
        kind is RuleKind.GENERALIZED_LOG and rule.floor == 0.0
    ):
        raise UnboundedRule("the logarithmic score has no lower bound")
    if kind is RuleKind.QUADRATIC:
        # 2r_j - |r|^2 spans [-1, 1]: -1 reporting a different vertex,
        # +1 reporting the observed one.
        fmin, fmax = -1.0, 1.0
    elif kind is RuleKind.SPHERICAL:
        fmin, fmax = 0.0, 1.0
    elif kind is RuleKind.GENERALIZED_LOG:
        l = rule.floor
        # Concavity puts the minimum at a vertex off the observed state and
        # the maximum at the observed state's own vertex.
        tail = l * (math.log(1.0 + l) + (m - 1) * math.log(l))
        fmin = math.log(l) + tail
        fmax = math.log(1.0 + l) + tail
    else:
        raise UnsupportedRule(f"no bounded normalization for rule kind {kind.value!r}")
    a = rule.offsets_for(m)
    lo = float(a.min() + rule.b * fmin)
    hi = float(a.max() + rule.b * fmax)
    span = hi - lo
    new_a = tuple(float((x - lo) / span) for x in a)
    return ScoringRule(kind, new_a, rule.b / span, rule.floor)
