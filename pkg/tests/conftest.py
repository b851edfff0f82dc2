"""Shared test helpers: seeded random instance builders and the
acceptance-summary hook."""

from __future__ import annotations

import numpy as np

from coalition_forge import Coalition, Forecast, Player

# Populated by tests/test_acceptance.py; printed after the run so each
# acceptance criterion shows one pass/fail line.
ACCEPTANCE_RESULTS: list[tuple[int, str, bool]] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, label, passed in sorted(ACCEPTANCE_RESULTS):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"CRITERION {number} ({label}): {status}")


def random_forecast(rng: np.random.Generator, m: int) -> Forecast:
    return Forecast(tuple(float(x) for x in rng.dirichlet(np.ones(m))))


def random_players(
    rng: np.random.Generator,
    count: int,
    m: int,
    equal_wagers: bool = False,
) -> list[Player]:
    players = []
    for _ in range(count):
        wager = 1.0 if equal_wagers else float(rng.uniform(0.5, 2.0))
        players.append(Player(random_forecast(rng, m), wager))
    return players


def disagreeing_players(
    rng: np.random.Generator, count: int, m: int, equal_wagers: bool = False
) -> list[Player]:
    # Dirichlet draws agree with probability zero, but guard anyway so a
    # pathological draw cannot make a dominance test vacuous.
    while True:
        players = random_players(rng, count, m, equal_wagers)
        beliefs = np.asarray([p.belief.probs for p in players])
        if float((beliefs.max(axis=0) - beliefs.min(axis=0)).max()) > 1e-3:
            return players


def full_coalition(players: list[Player]) -> Coalition:
    return Coalition(tuple(range(len(players))))
