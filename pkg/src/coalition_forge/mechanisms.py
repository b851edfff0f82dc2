"""Payment mechanisms over submitted reports: plain wagered scores, the
self-financed competitive scheme, and sequential market scoring.

The competitive scheme pays each player their wagered score minus their
wager share of the total wagered score, so payments sum to zero in every
state. With equal wagers this is the classic competitive scoring rule;
with a rule normalized into [0, 1] no player can lose more than their
wager. Market scoring pays each player the score improvement over the
report that preceded theirs.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .arbitrage import Coalition, Player
from .errors import (
    CoalitionIsEveryoneWarning,
    DimensionMismatch,
    MissingPrior,
    MissingReport,
    OrderingViolationWarning,
    SinglePlayer,
    UnsupportedMechanism,
    ValidationError,
)
from .rules import ScoringRule, normalize_to_unit_interval, score
from .simplex import Forecast


class MechanismKind(str, Enum):
    TRADITIONAL = "traditional"
    COMPETITIVE = "competitive"
    MARKET = "market"


@dataclass(frozen=True)
class MechanismSpec:
    """A mechanism kind bound to a scoring rule.

    market_prior is the opening report the first market participant is
    paid against; None defers to a uniform prior at payment time.
    """

    kind: MechanismKind
    rule: ScoringRule
    market_prior: Forecast | None = None

    def __post_init__(self):
        if self.market_prior is not None and self.kind is not MechanismKind.MARKET:
            raise ValidationError("market_prior applies only to market scoring")


def kilgour_gerchak(rule: ScoringRule) -> MechanismSpec:
    """Competitive preset intended for equal-wager pools."""
    return MechanismSpec(MechanismKind.COMPETITIVE, rule)


def lambert(rule: ScoringRule, m: int) -> MechanismSpec:
    """Competitive preset with the rule rescaled into [0, 1], so each
    player's loss is strictly bounded by their wager."""
    return MechanismSpec(MechanismKind.COMPETITIVE, normalize_to_unit_interval(rule, m))


@dataclass(frozen=True)
class PaymentTable:
    """Per-player payments for every outcome state; rows are players,
    columns are states."""

    payments: tuple[tuple[float, ...], ...]

    @property
    def n(self) -> int:
        return len(self.payments)

    @property
    def m(self) -> int:
        return len(self.payments[0]) if self.payments else 0

    def column(self, outcome: int) -> tuple[float, ...]:
        return tuple(row[outcome] for row in self.payments)

    def column_sum(self, outcome: int) -> float:
        return math.fsum(row[outcome] for row in self.payments)


def _require_reports(players: Sequence[Player]) -> list[Forecast]:
    reports = []
    for i, p in enumerate(players):
        if p.report is None:
            raise MissingReport(i)
        reports.append(p.report)
    m = reports[0].m
    for r in reports:
        if r.m != m:
            raise DimensionMismatch("player reports have mixed lengths")
    return reports


def traditional_payments(
    rule: ScoringRule, players: Sequence[Player], outcome: int
) -> tuple[float, ...]:
    """Each player receives their wagered score; nobody else's report
    matters."""
    reports = _require_reports(players)
    return tuple(
        p.wager * score(rule, r, outcome) for p, r in zip(players, reports)
    )


def competitive_payments(
    rule: ScoringRule, players: Sequence[Player], outcome: int
) -> tuple[float, ...]:
    """Wagered score minus the player's wager share of the pool total.

    Payments sum to zero in every state, so the pool finances itself.
    """
    if len(players) < 2:
        raise SinglePlayer("competitive payments need at least 2 players")
    reports = _require_reports(players)
    wagered = [
        p.wager * score(rule, r, outcome) for p, r in zip(players, reports)
    ]
    w_n = math.fsum(p.wager for p in players)
    total = math.fsum(wagered)
    return tuple(s - (p.wager / w_n) * total for p, s in zip(players, wagered))


def market_scoring_payments(
    rule: ScoringRule,
    reports: Sequence[Forecast],
    prior: Forecast | None,
    outcome: int,
) -> tuple[float, ...]:
    """Sequential payments: each report is scored against its predecessor.

    The total paid out telescopes to the last report's score minus the
    prior's.
    """
    if prior is None:
        raise MissingPrior("market scoring needs an opening report")
    if not reports:
        return ()
    chain = [prior, *reports]
    for r in chain:
        if r.m != prior.m:
            raise DimensionMismatch("reports and prior have mixed lengths")
    scores = [score(rule, r, outcome) for r in chain]
    return tuple(scores[k + 1] - scores[k] for k in range(len(reports)))


def uniform_prior(m: int) -> Forecast:
    return Forecast(tuple(1.0 / m for _ in range(m)))


def payment_table(spec: MechanismSpec, players: Sequence[Player]) -> PaymentTable:
    """Full n-by-m payment table under a mechanism.

    Market scoring treats the player sequence as the reporting order and
    ignores wagers; a missing prior defaults to uniform.
    """
    if not players:
        raise ValidationError("no players")
    if spec.kind is MechanismKind.MARKET:
        reports = _require_reports(players)
        prior = spec.market_prior or uniform_prior(reports[0].m)
        m = prior.m
        cols = [market_scoring_payments(spec.rule, reports, prior, j) for j in range(m)]
    else:
        reports = _require_reports(players)
        m = reports[0].m
        pay = (
            traditional_payments
            if spec.kind is MechanismKind.TRADITIONAL
            else competitive_payments
        )
        cols = [pay(spec.rule, players, j) for j in range(m)]
    rows = tuple(
        tuple(cols[j][i] for j in range(m)) for i in range(len(players))
    )
    return PaymentTable(rows)


def _broadcast_coordinated(
    coordinated: Forecast | Sequence[Forecast], coalition: Coalition
) -> list[Forecast]:
    if isinstance(coordinated, Forecast):
        return [coordinated] * len(coalition.members)
    coordinated = list(coordinated)
    if len(coordinated) != len(coalition.members):
        raise DimensionMismatch(
            f"{len(coordinated)} coordinated reports for "
            f"{len(coalition.members)} members"
        )
    return coordinated


def _with_reports(
    players: Sequence[Player], coalition: Coalition, member_reports: list[Forecast]
) -> list[Player]:
    """Players with members reporting as instructed and outsiders keeping
    their submitted report (their belief if they never submitted one)."""
    by_member = dict(zip(coalition.members, member_reports))
    out = []
    for i, p in enumerate(players):
        if i in by_member:
            out.append(Player(p.belief, p.wager, by_member[i]))
        else:
            out.append(Player(p.belief, p.wager, p.report or p.belief))
    return out


def coalition_surplus_competitive(
    rule: ScoringRule,
    players: Sequence[Player],
    coalition: Coalition,
    coordinated: Forecast | Sequence[Forecast],
    outcome: int,
) -> float:
    """Coalition gain at one outcome under the self-financed scheme:
    coordinated-play coalition total minus truthful-play coalition total,
    outsider reports held fixed.

    A coalition holding the whole pool gains exactly zero; that case is
    flagged with a warning rather than an error.
    """
    coalition.validate(len(players))
    member_reports = _broadcast_coordinated(coordinated, coalition)
    if len(coalition.members) == len(players):
        warnings.warn(
            "coalition holds the entire pool; competitive surplus is "
            "identically zero",
            CoalitionIsEveryoneWarning,
            stacklevel=2,
        )
    truthful = [players[i].belief for i in coalition.members]
    col_coord = competitive_payments(
        rule, _with_reports(players, coalition, member_reports), outcome
    )
    col_truth = competitive_payments(
        rule, _with_reports(players, coalition, truthful), outcome
    )
    return math.fsum(
        col_coord[i] - col_truth[i] for i in coalition.members
    )


def ordering_satisfies_alternation(
    ordering: Sequence[int], coalition: Coalition
) -> bool:
    """True when no coalition member reports immediately after another
    member; the opening prior counts as an outsider."""
    members = set(coalition.members)
    prev_is_member = False
    for idx in ordering:
        if idx in members and prev_is_member:
            return False
        prev_is_member = idx in members
    return True


def coalition_surplus_market(
    rule: ScoringRule,
    players: Sequence[Player],
    ordering: Sequence[int],
    coalition: Coalition,
    coordinated: Forecast | Sequence[Forecast],
    outcome: int,
    prior: Forecast | None = None,
) -> float:
    """Coalition gain at one outcome under sequential market scoring.

    Equals the sum of members' score improvements over their own beliefs
    whenever each member reports right after a non-member, since the
    predecessor terms then cancel between the two scenarios. If members
    report back-to-back the value is still computed from the two payment
    sequences, but the dominance guarantee is withdrawn and a warning is
    emitted.
    """
    coalition.validate(len(players))
    ordering = list(ordering)
    if sorted(ordering) != list(range(len(players))):
        raise ValidationError(
            "ordering must be a permutation of all player indices"
        )
    member_reports = _broadcast_coordinated(coordinated, coalition)
    if not ordering_satisfies_alternation(ordering, coalition):
        warnings.warn(
            "a coalition member reports directly after another member; "
            "the guaranteed-gain argument does not apply",
            OrderingViolationWarning,
            stacklevel=2,
        )
    coord_players = _with_reports(players, coalition, member_reports)
    truth_players = _with_reports(
        players, coalition, [players[i].belief for i in coalition.members]
    )
    m = players[0].belief.m
    prior = prior or uniform_prior(m)
    seq_coord = [coord_players[i].report for i in ordering]
    seq_truth = [truth_players[i].report for i in ordering]
    col_coord = market_scoring_payments(rule, seq_coord, prior, outcome)
    col_truth = market_scoring_payments(rule, seq_truth, prior, outcome)
    members = set(coalition.members)
    return math.fsum(
        c - t
        for idx, c, t in zip(ordering, col_coord, col_truth)
        if idx in members
    )


def intermediary_profit_by_outcome(
    spec: MechanismSpec,
    players: Sequence[Player],
    coalition: Coalition,
    q: Forecast,
) -> tuple[float, ...]:
    """Per-outcome profit of an intermediary who submits q for every
    member and reimburses each member their truthful payment."""
    m = q.m
    if spec.kind is MechanismKind.TRADITIONAL:
        return tuple(
            math.fsum(
                players[i].wager
                * (score(spec.rule, q, j) - score(spec.rule, players[i].belief, j))
                for i in coalition.members
            )
            for j in range(m)
        )
    if spec.kind is MechanismKind.COMPETITIVE:
        return tuple(
            coalition_surplus_competitive(spec.rule, players, coalition, q, j)
            for j in range(m)
        )
    raise UnsupportedMechanism(
        "intermediary runs support traditional and competitive mechanisms; "
        "sequential markets go through a market session"
    )
