"""Exact-arithmetic game-theoretic analysis of two-party cryptographic protocols."""

__version__ = "0.1.0"

from .model import (  # noqa: E402
    Constraint,
    ConstraintViolation,
    EventAtom,
    InfeasibleOutcome,
    ModelError,
    Param,
    Party,
    PayoffModel,
    PayoffRule,
    UnboundParameterError,
    check_constraints,
    enumerate_outcomes,
    eval_expr,
    expense,
    format_expr,
    income,
    listed_outcomes,
    outcome,
    payoff,
    payoff_expr,
    payoff_spectrum,
    ref,
)
from .sampling import SamplerConfig, SamplingError, sample_params  # noqa: E402
from .games import (  # noqa: E402
    GameError,
    OutcomeDistribution,
    StrategicGame,
    classify,
    dominance,
    equilibria,
    expected_payoff,
    is_nash,
    make_game,
)
from .audit import (  # noqa: E402
    ChainClaim,
    FairnessClaim,
    FairnessImplication,
    NashClaim,
    audit_chain,
    audit_equilibrium_claim,
    audit_fairness,
    corrected_chain_search,
)
from .catalog import ProtocolEntry, UnknownProtocol, get_protocol, list_protocols  # noqa: E402
from .gamespec import ParseError, export, load, parse  # noqa: E402
