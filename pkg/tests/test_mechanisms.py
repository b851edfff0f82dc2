"""Tests for traditional, self-financed competitive, and sequential
market payment schemes, plus coalition surpluses under each."""

from __future__ import annotations

import math

import numpy as np
import pytest

from coalition_forge import (
    Coalition,
    CoalitionIsEveryoneWarning,
    DimensionMismatch,
    Forecast,
    MechanismKind,
    MechanismSpec,
    MissingPrior,
    MissingReport,
    OrderingViolationWarning,
    Player,
    SinglePlayer,
    UnsupportedMechanism,
    ValidationError,
    coalition_surplus_competitive,
    coalition_surplus_market,
    competitive_payments,
    intermediary_profit_by_outcome,
    kilgour_gerchak,
    lambert,
    logarithmic_rule,
    market_scoring_payments,
    ordering_satisfies_alternation,
    payment_table,
    quadratic_rule,
    score,
    spherical_rule,
    traditional_payments,
    uniform_prior,
)

from conftest import disagreeing_players, random_forecast


def _reporting(*pairs, wagers=None):
    """Players from (belief, report) pairs."""
    wagers = wagers or [1.0] * len(pairs)
    return [
        Player(Forecast(b), w, Forecast(r)) for (b, r), w in zip(pairs, wagers)
    ]


def test_traditional_single_player_value():
    players = _reporting(((0.5, 0.5), (0.5, 0.5)), wagers=[2.0])
    assert traditional_payments(quadratic_rule(), players, 0) == (
        pytest.approx(1.0),
    )


def test_traditional_ignores_other_reports():
    base = _reporting(((0.5, 0.5), (0.7, 0.3)), ((0.5, 0.5), (0.2, 0.8)))
    changed = _reporting(((0.5, 0.5), (0.7, 0.3)), ((0.5, 0.5), (0.9, 0.1)))
    rule = quadratic_rule()
    assert traditional_payments(rule, base, 0)[0] == (
        traditional_payments(rule, changed, 0)[0]
    )


def test_missing_report_names_the_player():
    players = [
        Player(Forecast((0.5, 0.5)), 1.0, Forecast((0.5, 0.5))),
        Player(Forecast((0.4, 0.6)), 1.0),
    ]
    with pytest.raises(MissingReport) as err:
        traditional_payments(quadratic_rule(), players, 0)
    assert "player 2" in str(err.value)


def test_competitive_hand_example():
    players = _reporting(((0.5, 0.5), (0.5, 0.5)), ((1.0, 0.0), (1.0, 0.0)))
    payments = competitive_payments(quadratic_rule(), players, 0)
    np.testing.assert_allclose(payments, [-0.25, 0.25], atol=1e-15)


def test_competitive_identical_reports_pay_nothing():
    players = _reporting(
        ((0.2, 0.8), (0.6, 0.4)),
        ((0.9, 0.1), (0.6, 0.4)),
        ((0.5, 0.5), (0.6, 0.4)),
        wagers=[1.0, 2.5, 0.5],
    )
    for j in (0, 1):
        np.testing.assert_allclose(
            competitive_payments(quadratic_rule(), players, j), 0.0, atol=1e-12
        )


def test_competitive_requires_two_players():
    players = _reporting(((0.5, 0.5), (0.5, 0.5)))
    with pytest.raises(SinglePlayer):
        competitive_payments(quadratic_rule(), players, 0)


def test_competitive_columns_sum_to_zero():
    rng = np.random.default_rng(2101)
    rule = quadratic_rule()
    for _ in range(100):
        n = int(rng.integers(2, 7))
        m = int(rng.integers(2, 5))
        players = [
            Player(
                random_forecast(rng, m),
                float(rng.uniform(0.5, 3.0)),
                random_forecast(rng, m),
            )
            for _ in range(n)
        ]
        table = payment_table(MechanismSpec(MechanismKind.COMPETITIVE, rule), players)
        for j in range(m):
            assert abs(table.column_sum(j)) <= 1e-9


def test_lambert_preset_bounds_losses_by_wagers():
    rng = np.random.default_rng(2202)
    for _ in range(100):
        n = int(rng.integers(2, 6))
        m = int(rng.integers(2, 4))
        spec = lambert(quadratic_rule(), m)
        players = [
            Player(
                random_forecast(rng, m),
                float(rng.uniform(0.5, 3.0)),
                random_forecast(rng, m),
            )
            for _ in range(n)
        ]
        table = payment_table(spec, players)
        for i, p in enumerate(players):
            for j in range(m):
                assert table.payments[i][j] > -p.wager


def test_kilgour_gerchak_preset_keeps_rule():
    rule = quadratic_rule()
    spec = kilgour_gerchak(rule)
    assert spec.kind is MechanismKind.COMPETITIVE
    assert spec.rule is rule


def test_competitive_expected_payment_maximized_at_truth():
    # Holding the other reports fixed, a player's expected competitive
    # payment under their belief peaks at truthful reporting.
    rule = quadratic_rule()
    belief = Forecast((0.35, 0.65))
    others = _reporting(((0.5, 0.5), (0.7, 0.3)), ((0.5, 0.5), (0.4, 0.6)))

    def expected_payment(report):
        players = [Player(belief, 1.0, report), *others]
        return math.fsum(
            belief[j] * competitive_payments(rule, players, j)[0]
            for j in range(2)
        )

    truth_value = expected_payment(belief)
    for k in range(26):
        r = Forecast((k / 25.0, 1.0 - k / 25.0))
        if max(abs(r[0] - belief[0]), abs(r[1] - belief[1])) <= 1e-12:
            continue
        assert expected_payment(r) < truth_value


def test_market_all_following_prior_pays_nothing():
    prior = Forecast((0.5, 0.5))
    reports = [prior, prior, prior]
    for j in (0, 1):
        payments = market_scoring_payments(quadratic_rule(), reports, prior, j)
        np.testing.assert_allclose(payments, 0.0, atol=1e-15)


def test_market_frozen_example():
    prior = Forecast((0.5, 0.5))
    reports = [Forecast((0.8, 0.2)), Forecast((0.8, 0.2))]
    payments = market_scoring_payments(quadratic_rule(), reports, prior, 0)
    np.testing.assert_allclose(payments, [0.42, 0.0], atol=1e-12)


def test_market_payments_telescope():
    rng = np.random.default_rng(2303)
    rule = logarithmic_rule()
    for _ in range(50):
        m = int(rng.integers(2, 4))
        prior = uniform_prior(m)
        reports = [random_forecast(rng, m) for _ in range(int(rng.integers(1, 6)))]
        for j in range(m):
            payments = market_scoring_payments(rule, reports, prior, j)
            total = math.fsum(payments)
            expected = score(rule, reports[-1], j) - score(rule, prior, j)
            assert total == pytest.approx(expected, abs=1e-12)


def test_market_requires_prior():
    with pytest.raises(MissingPrior):
        market_scoring_payments(quadratic_rule(), [Forecast((0.5, 0.5))], None, 0)


def test_market_rejects_mixed_lengths():
    with pytest.raises(DimensionMismatch):
        market_scoring_payments(
            quadratic_rule(),
            [Forecast((0.2, 0.3, 0.5))],
            Forecast((0.5, 0.5)),
            0,
        )


def test_payment_table_market_defaults_to_uniform_prior():
    spec = MechanismSpec(MechanismKind.MARKET, quadratic_rule())
    players = _reporting(((0.5, 0.5), (0.8, 0.2)), ((0.5, 0.5), (0.8, 0.2)))
    table = payment_table(spec, players)
    direct = market_scoring_payments(
        quadratic_rule(), [p.report for p in players], uniform_prior(2), 0
    )
    assert table.column(0) == direct
    assert table.n == 2 and table.m == 2


def test_payment_table_matches_per_outcome_functions():
    players = _reporting(
        ((0.2, 0.8), (0.3, 0.7)), ((0.9, 0.1), (0.8, 0.2)), wagers=[1.0, 2.0]
    )
    rule = spherical_rule()
    trad = payment_table(MechanismSpec(MechanismKind.TRADITIONAL, rule), players)
    comp = payment_table(MechanismSpec(MechanismKind.COMPETITIVE, rule), players)
    for j in (0, 1):
        assert trad.column(j) == traditional_payments(rule, players, j)
        assert comp.column(j) == competitive_payments(rule, players, j)


def test_mechanism_spec_prior_validation():
    with pytest.raises(ValidationError):
        MechanismSpec(
            MechanismKind.TRADITIONAL, quadratic_rule(), uniform_prior(2)
        )


def test_payment_table_rejects_empty_pool():
    with pytest.raises(ValidationError):
        payment_table(MechanismSpec(MechanismKind.TRADITIONAL, quadratic_rule()), [])


def test_competitive_surplus_frozen_example():
    # Two disagreeing members and one outsider, equal wagers: the
    # coalition captures 1 - 2/3 of the plain wagered-score surplus.
    players = [
        Player(Forecast((0.2, 0.8)), 1.0),
        Player(Forecast((0.8, 0.2)), 1.0),
        Player(Forecast((0.5, 0.5)), 1.0),
    ]
    coalition = Coalition((0, 1))
    q = Forecast((0.5, 0.5))
    for j in (0, 1):
        surplus = coalition_surplus_competitive(
            quadratic_rule(), players, coalition, q, j
        )
        assert surplus == pytest.approx(0.12, rel=1e-9)


@pytest.mark.parametrize(
    "rule", [quadratic_rule(), spherical_rule()], ids=["quadratic", "spherical"]
)
def test_competitive_surplus_scaling_identity(rule):
    # Competitive coalition surplus equals (1 - coalition wager share)
    # times the plain wagered-score surplus, for any coordinated report.
    rng = np.random.default_rng(2404)
    for _ in range(100):
        n = int(rng.integers(3, 7))
        m = int(rng.integers(2, 4))
        players = [
            Player(random_forecast(rng, m), float(rng.uniform(0.5, 2.0)))
            for _ in range(n)
        ]
        c = int(rng.integers(2, n))
        members = tuple(
            int(i) for i in rng.choice(n, size=c, replace=False)
        )
        coalition = Coalition(members)
        q = random_forecast(rng, m)
        w_c = coalition.wager_total(players)
        w_n = math.fsum(p.wager for p in players)
        for j in range(m):
            direct = coalition_surplus_competitive(rule, players, coalition, q, j)
            plain = math.fsum(
                players[i].wager
                * (score(rule, q, j) - score(rule, players[i].belief, j))
                for i in members
            )
            expected = (1.0 - w_c / w_n) * plain
            assert abs(direct - expected) <= 1e-9 * max(1.0, abs(expected))


def test_competitive_surplus_ignores_outsider_reports():
    rng = np.random.default_rng(2505)
    rule = quadratic_rule()
    players = [
        Player(random_forecast(rng, 2), float(rng.uniform(0.5, 2.0)))
        for _ in range(4)
    ]
    coalition = Coalition((0, 2))
    q = Forecast((0.5, 0.5))
    with_truthful_outsiders = players
    with_odd_outsiders = [
        p
        if i in coalition.members
        else Player(p.belief, p.wager, random_forecast(rng, 2))
        for i, p in enumerate(players)
    ]
    for j in (0, 1):
        a = coalition_surplus_competitive(
            rule, with_truthful_outsiders, coalition, q, j
        )
        b = coalition_surplus_competitive(rule, with_odd_outsiders, coalition, q, j)
        assert a == pytest.approx(b, abs=1e-12)


def test_coalition_of_everyone_warns_and_gains_nothing():
    players = [
        Player(Forecast((0.2, 0.8)), 1.0),
        Player(Forecast((0.8, 0.2)), 1.0),
    ]
    with pytest.warns(CoalitionIsEveryoneWarning):
        surplus = coalition_surplus_competitive(
            quadratic_rule(), players, Coalition((0, 1)), Forecast((0.5, 0.5)), 0
        )
    assert surplus == pytest.approx(0.0, abs=1e-12)


def test_alternation_predicate():
    coalition = Coalition((1, 3))
    assert ordering_satisfies_alternation((0, 1, 2, 3), coalition)
    assert not ordering_satisfies_alternation((0, 1, 3, 2), coalition)
    # The opening prior counts as an outsider, so leading with a member
    # is fine.
    assert ordering_satisfies_alternation((1, 0, 3, 2), coalition)
    assert not ordering_satisfies_alternation((1, 3, 0, 2), coalition)


def test_market_surplus_alternating_sum_identity():
    # With members separated by outsiders, predecessor terms cancel and
    # the surplus is each member's score improvement over their belief.
    rule = quadratic_rule()
    players = [
        Player(Forecast((0.5, 0.5)), 1.0, Forecast((0.45, 0.55))),
        Player(Forecast((0.2, 0.8)), 1.0),
        Player(Forecast((0.6, 0.4)), 1.0, Forecast((0.6, 0.4))),
        Player(Forecast((0.8, 0.2)), 1.0),
    ]
    coalition = Coalition((1, 3))
    ordering = (0, 1, 2, 3)
    q = Forecast((0.5, 0.5))
    for j in (0, 1):
        surplus = coalition_surplus_market(
            rule, players, ordering, coalition, q, j
        )
        expected = math.fsum(
            score(rule, q, j) - score(rule, players[i].belief, j)
            for i in coalition.members
        )
        assert surplus == pytest.approx(expected, abs=1e-12)
        assert surplus == pytest.approx(0.36, rel=1e-9)


def test_market_surplus_truthful_members_gain_nothing():
    rule = quadratic_rule()
    players = [
        Player(Forecast((0.5, 0.5)), 1.0),
        Player(Forecast((0.2, 0.8)), 1.0),
        Player(Forecast((0.6, 0.4)), 1.0),
        Player(Forecast((0.8, 0.2)), 1.0),
    ]
    coalition = Coalition((1, 3))
    truthful = [players[i].belief for i in coalition.members]
    surplus = coalition_surplus_market(
        rule, players, (0, 1, 2, 3), coalition, truthful, 0
    )
    assert surplus == pytest.approx(0.0, abs=1e-15)


def test_market_surplus_warns_on_adjacent_members():
    rule = quadratic_rule()
    players = [
        Player(Forecast((0.5, 0.5)), 1.0),
        Player(Forecast((0.2, 0.8)), 1.0),
        Player(Forecast((0.6, 0.4)), 1.0),
        Player(Forecast((0.8, 0.2)), 1.0),
    ]
    with pytest.warns(OrderingViolationWarning):
        coalition_surplus_market(
            rule, players, (0, 1, 3, 2), Coalition((1, 3)), Forecast((0.5, 0.5)), 0
        )


def test_market_surplus_validates_ordering():
    players = [
        Player(Forecast((0.5, 0.5)), 1.0),
        Player(Forecast((0.2, 0.8)), 1.0),
    ]
    with pytest.raises(ValidationError):
        coalition_surplus_market(
            quadratic_rule(), players, (0, 0), Coalition((0, 1)), Forecast((0.5, 0.5)), 0
        )


def test_coordinated_reports_as_list():
    players = [
        Player(Forecast((0.2, 0.8)), 1.0),
        Player(Forecast((0.8, 0.2)), 1.0),
        Player(Forecast((0.5, 0.5)), 1.0),
    ]
    coalition = Coalition((0, 1))
    per_member = [Forecast((0.5, 0.5)), Forecast((0.5, 0.5))]
    surplus = coalition_surplus_competitive(
        quadratic_rule(), players, coalition, per_member, 0
    )
    assert surplus == pytest.approx(0.12, rel=1e-9)
    with pytest.raises(DimensionMismatch):
        coalition_surplus_competitive(
            quadratic_rule(), players, coalition, [Forecast((0.5, 0.5))], 0
        )


def test_intermediary_profit_traditional_and_competitive():
    players = [
        Player(Forecast((0.2, 0.8)), 1.0),
        Player(Forecast((0.8, 0.2)), 1.0),
        Player(Forecast((0.5, 0.5)), 1.0),
        Player(Forecast((0.6, 0.4)), 1.0),
    ]
    coalition = Coalition((0, 1))
    q = Forecast((0.5, 0.5))
    trad = intermediary_profit_by_outcome(
        MechanismSpec(MechanismKind.TRADITIONAL, quadratic_rule()),
        players,
        coalition,
        q,
    )
    np.testing.assert_allclose(trad, [0.36, 0.36], rtol=1e-9)
    comp = intermediary_profit_by_outcome(
        MechanismSpec(MechanismKind.COMPETITIVE, quadratic_rule()),
        players,
        coalition,
        q,
    )
    np.testing.assert_allclose(comp, [0.18, 0.18], rtol=1e-9)


def test_intermediary_profit_rejects_market():
    spec = MechanismSpec(MechanismKind.MARKET, quadratic_rule())
    players = [
        Player(Forecast((0.2, 0.8)), 1.0),
        Player(Forecast((0.8, 0.2)), 1.0),
    ]
    with pytest.raises(UnsupportedMechanism):
        intermediary_profit_by_outcome(
            spec, players, Coalition((0, 1)), Forecast((0.5, 0.5))
        )


def test_competitive_surplus_positive_at_equalizer_random():
    rng = np.random.default_rng(2606)
    rule = quadratic_rule()
    from coalition_forge import arbitrage_report

    for _ in range(25):
        n = int(rng.integers(3, 7))
        players = disagreeing_players(rng, n, 2)
        c = int(rng.integers(2, n))
        coalition = Coalition(tuple(range(c)))
        member_beliefs = np.asarray(
            [players[i].belief.probs for i in coalition.members]
        )
        if float(
            (member_beliefs.max(axis=0) - member_beliefs.min(axis=0)).max()
        ) <= 1e-3:
            continue
        q = arbitrage_report(rule, players, coalition).q
        for j in (0, 1):
            assert (
                coalition_surplus_competitive(rule, players, coalition, q, j)
                > 0.0
            )
