"""One-shot two-party games over a payoff model, with chance in the outcome map."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Sequence

from .model import (
    ModelError,
    ParamSet,
    PayoffModel,
    enumerate_outcomes,
    expenses,
    incomes,
    payoff,
    require_constraints,
)

Profile = tuple[str, str]
VARIANT_KINDS = ("rational", "naive", "custom")
DOMINANCE = ("s-strictly-dominates", "s-weakly-dominates", "none")


class GameError(ModelError):
    pass


@dataclass(frozen=True)
class ActionSet:
    party: str
    actions: tuple[str, ...]
    honest: str

    def __post_init__(self):
        object.__setattr__(self, "actions", tuple(self.actions))
        if not self.actions:
            raise GameError(f"party {self.party} has no actions")
        if len(set(self.actions)) != len(self.actions):
            raise GameError(f"duplicate action names for party {self.party}")
        if self.honest not in self.actions:
            raise GameError(f"honest action {self.honest!r} is not an action of {self.party}")


@dataclass(frozen=True)
class OutcomeDistribution:
    branches: tuple[tuple[frozenset, Fraction], ...]

    def __post_init__(self):
        branches = tuple((frozenset(q), Fraction(p)) for q, p in self.branches)
        object.__setattr__(self, "branches", branches)
        if not branches:
            raise GameError("outcome distribution has no branches")
        if any(p <= 0 for _, p in branches):
            raise GameError("branch probabilities must be strictly positive")
        total = sum(p for _, p in branches)
        if total != 1:
            raise GameError(f"branch probabilities sum to {total}, not 1")

    @classmethod
    def certain(cls, q) -> "OutcomeDistribution":
        return cls(((frozenset(q), Fraction(1)),))

    def __iter__(self):
        return iter(self.branches)

    def __len__(self):
        return len(self.branches)


@dataclass(frozen=True)
class StrategicGame:
    name: str
    kind: str
    model: PayoffModel
    action_sets: tuple[ActionSet, ActionSet]
    outcome_map: Mapping[Profile, OutcomeDistribution] = field(hash=False)

    def __post_init__(self):
        object.__setattr__(self, "action_sets", tuple(self.action_sets))
        object.__setattr__(self, "outcome_map", dict(self.outcome_map))
        if self.kind not in VARIANT_KINDS:
            raise GameError(f"game kind must be one of {VARIANT_KINDS}")
        if tuple(s.party for s in self.action_sets) != self.model.party_ids:
            raise GameError("action sets must follow the model's party order")
        for profile in self.profiles():
            if profile not in self.outcome_map:
                raise GameError(f"game {self.name}: no outcome for profile ({profile[0]}, {profile[1]})")
        extra = set(self.outcome_map) - set(self.profiles())
        if extra:
            raise GameError(f"game {self.name}: outcome map has unknown profiles {sorted(extra)}")
        for profile, dist in self.outcome_map.items():
            for q, _ in dist:
                if not self.model.is_feasible(q):
                    raise GameError(f"game {self.name}: profile {profile} leads to infeasible outcome {sorted(q)}")

    @property
    def honest_profile(self) -> Profile:
        return (self.action_sets[0].honest, self.action_sets[1].honest)

    def actions(self, party: str) -> tuple[str, ...]:
        return self.action_set(party).actions

    def action_set(self, party: str) -> ActionSet:
        for s in self.action_sets:
            if s.party == party:
                return s
        raise GameError(f"unknown party {party!r}")

    def index(self, party: str) -> int:
        return self.model.party_ids.index(party)

    def profiles(self) -> list[Profile]:
        a, b = self.action_sets
        return [(x, y) for x in a.actions for y in b.actions]

    def outcome(self, profile: Profile) -> OutcomeDistribution:
        profile = tuple(profile)
        for s, action in zip(self.action_sets, profile):
            if action not in s.actions:
                raise GameError(f"unknown action {action!r} for party {s.party}")
        return self.outcome_map[profile]

    def with_deviation(self, profile: Profile, party: str, action: str) -> Profile:
        p = list(profile)
        p[self.index(party)] = action
        return tuple(p)


@dataclass(frozen=True)
class NashVerdict:
    holds: bool
    party: Optional[str] = None
    deviation: Optional[str] = None
    before: Optional[Fraction] = None
    after: Optional[Fraction] = None

    def __bool__(self):
        return self.holds


@dataclass(frozen=True)
class Classification:
    zero_sum: bool
    non_positive_sum: bool
    positive_sum_witness: Optional[frozenset]
    positive_sum_value: Optional[Fraction]
    closed: bool
    closed_violation: Optional[tuple[frozenset, str]]


def expected_payoff(game: StrategicGame, profile: Profile, party: str, params: ParamSet,
                    check: bool = True) -> Fraction:
    if check:
        require_constraints(params, game.model.constraints)
    dist = game.outcome(profile)
    return sum((p * payoff(game.model, party, q, params, check=False) for q, p in dist), Fraction(0))


def is_nash(game: StrategicGame, profile: Profile, params: ParamSet) -> NashVerdict:
    """Weak Nash test: no unilateral deviation strictly helps the deviator.

    The witness is the largest improvement; ties go to the first party, then
    to the earliest action in declaration order.
    """
    require_constraints(params, game.model.constraints)
    profile = tuple(profile)
    game.outcome(profile)
    best = None
    for party in game.model.party_ids:
        current = expected_payoff(game, profile, party, params, check=False)
        own = profile[game.index(party)]
        for action in game.actions(party):
            if action == own:
                continue
            value = expected_payoff(game, game.with_deviation(profile, party, action), party, params, check=False)
            gain = value - current
            if gain > 0 and (best is None or gain > best[0]):
                best = (gain, party, action, current, value)
    if best is None:
        return NashVerdict(True)
    _, party, action, before, after = best
    return NashVerdict(False, party, action, before, after)


def equilibria(game: StrategicGame, params: ParamSet) -> list[Profile]:
    """All pure Nash profiles, found by comparing every cell with its neighbours."""
    require_constraints(params, game.model.constraints)
    ids = game.model.party_ids
    table = {prof: tuple(expected_payoff(game, prof, p, params, check=False) for p in ids)
             for prof in game.profiles()}
    found = []
    for prof in game.profiles():
        stable = True
        for i, party in enumerate(ids):
            for action in game.actions(party):
                alt = game.with_deviation(prof, party, action)
                if table[alt][i] > table[prof][i]:
                    stable = False
        if stable:
            found.append(prof)
    return found


def dominance(game: StrategicGame, party: str, s: str, t: str, params: ParamSet) -> str:
    if s == t:
        raise GameError("dominance needs two distinct actions")
    for a in (s, t):
        if a not in game.actions(party):
            raise GameError(f"unknown action {a!r} for party {party}")
    require_constraints(params, game.model.constraints)
    other = game.model.other(party)
    idx = game.index(party)
    diffs = []
    for opp in game.actions(other):
        base = ["", ""]
        base[1 - idx] = opp
        ps, pt = list(base), list(base)
        ps[idx], pt[idx] = s, t
        diffs.append(expected_payoff(game, tuple(ps), party, params, check=False)
                     - expected_payoff(game, tuple(pt), party, params, check=False))
    if all(d > 0 for d in diffs):
        return "s-strictly-dominates"
    if all(d >= 0 for d in diffs) and any(d > 0 for d in diffs):
        return "s-weakly-dominates"
    return "none"


def classify(game_or_model, params: ParamSet) -> Classification:
    model = game_or_model.model if isinstance(game_or_model, StrategicGame) else game_or_model
    require_constraints(params, model.constraints)
    ids = model.party_ids
    zero = True
    witness, witness_sum = None, None
    violation = None
    for q in enumerate_outcomes(model):
        total = sum(payoff(model, p, q, params, check=False) for p in ids)
        if total != 0:
            zero = False
        if total > 0 and (witness_sum is None or total > witness_sum):
            witness, witness_sum = q, total
        if violation is None:
            for p in ids:
                if incomes(model, p, q, params) > 0 and not expenses(model, model.other(p), q, params) > 0:
                    violation = (q, p)
                    break
    return Classification(
        zero_sum=zero,
        non_positive_sum=witness is None,
        positive_sum_witness=witness,
        positive_sum_value=witness_sum,
        closed=violation is None,
        closed_violation=violation,
    )


def make_game(name: str, kind: str, model: PayoffModel, actions: Sequence[tuple[str, Sequence[str], str]],
              outcome_map: Mapping[Profile, object]) -> StrategicGame:
    """Build a game; plain outcome sets in ``outcome_map`` become certain outcomes."""
    sets = tuple(ActionSet(party, tuple(acts), honest) for party, acts, honest in actions)
    dists = {}
    for prof, value in outcome_map.items():
        if isinstance(value, OutcomeDistribution):
            dists[prof] = value
        elif isinstance(value, (set, frozenset)):
            dists[prof] = OutcomeDistribution.certain(value)
        else:
            dists[prof] = OutcomeDistribution(tuple(value))
    return StrategicGame(name, kind, model, sets, dists)
