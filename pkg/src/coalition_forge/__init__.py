"""Strictly proper scoring rules, coalition arbitrage constructions, and
wagering-mechanism simulations.

The library answers three questions about forecasting markets scored by
proper rules: what identical report lets a coalition of disagreeing
players beat truthful play in every outcome, how large that guaranteed
surplus is under plain, self-financed, and sequential mechanisms, and
what coalition size maximizes it.
"""

from .arbitrage import (
    AGREEMENT_TOL,
    ArbitrageResult,
    Coalition,
    DominanceVerdict,
    Player,
    SphericalAux,
    Verdict,
    arbitrage_report,
    binary_equalizer,
    closed_form_surplus,
    grid_search_equalizer,
    spherical_aux,
    surplus_by_outcome,
    verify_dominance_oracle,
)
from .errors import (
    CoalitionForgeError,
    CoalitionIsEveryoneWarning,
    DegenerateBelief,
    DimensionMismatch,
    FractionOutOfRange,
    GeneratorMismatch,
    InvalidCoalition,
    LengthMismatch,
    LogOfZero,
    MissingPrior,
    MissingReport,
    NegativeEntry,
    NoArbitrageWarning,
    NoConvergence,
    NonMonotoneGenerator,
    NonPositiveWager,
    NonPositiveWeight,
    NumericalError,
    OrderingViolationWarning,
    OutOfDomain,
    ScenarioError,
    SinglePlayer,
    SumOutOfTolerance,
    TooFewStates,
    UnboundedRule,
    UnsupportedMechanism,
    UnsupportedRule,
    ValidationError,
)
from .mechanisms import (
    MechanismKind,
    MechanismSpec,
    PaymentTable,
    coalition_surplus_competitive,
    coalition_surplus_market,
    competitive_payments,
    intermediary_profit_by_outcome,
    kilgour_gerchak,
    lambert,
    market_scoring_payments,
    ordering_satisfies_alternation,
    payment_table,
    traditional_payments,
    uniform_prior,
)
from .rules import (
    ConvexGenerator,
    PropernessReport,
    RuleKind,
    ScoringRule,
    binary_quadratic_generator,
    check_strict_properness,
    custom_binary_rule,
    expected_score,
    generalized_log_rule,
    linear_rule,
    logarithmic_rule,
    logit_generator,
    normalize_to_unit_interval,
    quadratic_rule,
    savage_binary_score,
    score,
    score_table,
    spherical_rule,
)
from .scenario import (
    Scenario,
    canonical_json,
    load_scenario,
    parse_scenario,
    scenario_digest,
    scenario_to_dict,
)
from .simplex import (
    Forecast,
    grid_array,
    simplex_grid,
    two_norm,
    validate_forecast,
    weighted_mean,
)
from .simulate import (
    BeliefSampler,
    BetaBinary,
    DirichletM,
    FiniteMixture,
    IntermediaryRun,
    MarketSessionResult,
    SweepResult,
    SweepRow,
    expected_surplus_sweep,
    intermediary_run,
    market_session,
    sample_population,
    substream,
)

__version__ = "1.0.0"

__all__ = [
    "AGREEMENT_TOL",
    "ArbitrageResult",
    "BeliefSampler",
    "BetaBinary",
    "Coalition",
    "CoalitionForgeError",
    "CoalitionIsEveryoneWarning",
    "ConvexGenerator",
    "DegenerateBelief",
    "DimensionMismatch",
    "DirichletM",
    "DominanceVerdict",
    "FiniteMixture",
    "Forecast",
    "FractionOutOfRange",
    "GeneratorMismatch",
    "IntermediaryRun",
    "InvalidCoalition",
    "LengthMismatch",
    "LogOfZero",
    "MarketSessionResult",
    "MechanismKind",
    "MechanismSpec",
    "MissingPrior",
    "MissingReport",
    "NegativeEntry",
    "NoArbitrageWarning",
    "NoConvergence",
    "NonMonotoneGenerator",
    "NonPositiveWager",
    "NonPositiveWeight",
    "NumericalError",
    "OrderingViolationWarning",
    "OutOfDomain",
    "PaymentTable",
    "Player",
    "PropernessReport",
    "RuleKind",
    "Scenario",
    "ScenarioError",
    "ScoringRule",
    "SinglePlayer",
    "SphericalAux",
    "SumOutOfTolerance",
    "SweepResult",
    "SweepRow",
    "TooFewStates",
    "UnboundedRule",
    "UnsupportedMechanism",
    "UnsupportedRule",
    "ValidationError",
    "Verdict",
    "arbitrage_report",
    "binary_equalizer",
    "binary_quadratic_generator",
    "canonical_json",
    "check_strict_properness",
    "closed_form_surplus",
    "coalition_surplus_competitive",
    "coalition_surplus_market",
    "competitive_payments",
    "custom_binary_rule",
    "expected_score",
    "expected_surplus_sweep",
    "generalized_log_rule",
    "grid_array",
    "grid_search_equalizer",
    "intermediary_profit_by_outcome",
    "intermediary_run",
    "kilgour_gerchak",
    "lambert",
    "linear_rule",
    "load_scenario",
    "logarithmic_rule",
    "logit_generator",
    "market_scoring_payments",
    "market_session",
    "normalize_to_unit_interval",
    "ordering_satisfies_alternation",
    "parse_scenario",
    "payment_table",
    "quadratic_rule",
    "sample_population",
    "savage_binary_score",
    "scenario_digest",
    "scenario_to_dict",
    "score",
    "score_table",
    "simplex_grid",
    "spherical_aux",
    "spherical_rule",
    "substream",
    "surplus_by_outcome",
    "traditional_payments",
    "two_norm",
    "uniform_prior",
    "validate_forecast",
    "verify_dominance_oracle",
    "weighted_mean",
]
