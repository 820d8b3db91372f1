"""Sampling audits of payoff chains, fairness implications and equilibrium claims.

A refutation is always an exact counterexample that satisfies the model
constraints.  "holds" only means no sample contradicted the claim.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Optional, Sequence

from .games import StrategicGame, is_nash
from .model import (
    Expr,
    ModelError,
    ParamSet,
    PayoffModel,
    eval_expr,
    referenced_params,
    require_constraints,
    triggered,
)
from .sampling import DEFAULT_SAMPLER, SamplerConfig, sample_params

HOLDS = "holds-on-all-samples"
REFUTED = "refuted"
SEPARATORS = ("<", "<=", "=", "|")
DEFAULT_SAMPLES = 1000


@dataclass(frozen=True)
class ChainClaim:
    party: str
    entries: tuple[Expr, ...]
    separators: tuple[str, ...]
    expect: bool = True
    # separator indices expected to fail; only meaningful when expect is False
    refuted_steps: Optional[tuple[int, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        object.__setattr__(self, "separators", tuple(self.separators))
        if self.refuted_steps is not None:
            object.__setattr__(self, "refuted_steps", tuple(sorted(self.refuted_steps)))
        if len(self.entries) < 2:
            raise ModelError("a chain needs at least two entries")
        if len(self.separators) != len(self.entries) - 1:
            raise ModelError("a chain needs exactly one separator between consecutive entries")
        bad = [s for s in self.separators if s not in SEPARATORS]
        if bad:
            raise ModelError(f"unknown chain separators {bad}")
        if self.refuted_steps is not None:
            if self.expect:
                raise ModelError("refuted steps only make sense for a chain expected to fail")
            for i in self.refuted_steps:
                if not 0 <= i < len(self.separators) or self.separators[i] == "|":
                    raise ModelError(f"step {i} is not an ordered step of the chain")

    kind = "chain"


@dataclass(frozen=True)
class FairnessImplication:
    """If the opponent's income includes one amount, the honest party's includes another."""
    honest: str
    antecedent: tuple[str, Expr]
    consequent: tuple[str, Expr]


@dataclass(frozen=True)
class FairnessClaim:
    game: str
    implication: FairnessImplication
    expect: bool = True

    kind = "fairness"


@dataclass(frozen=True)
class NashClaim:
    game: str
    profile: tuple[str, str]
    expect: bool = True

    kind = "nash"

    def __post_init__(self):
        object.__setattr__(self, "profile", tuple(self.profile))


@dataclass
class AuditReport:
    claim_id: str
    kind: str
    samples: int
    verdict: str
    counterexample: Optional[dict] = None
    steps: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return self.verdict == HOLDS


@lru_cache(maxsize=64)
def _cached_samples(constraints, decls, seed, n, config) -> tuple:
    return tuple(sample_params(constraints, decls, seed, n, config))


def _samples(model: PayoffModel, seed: int, n: int, config: SamplerConfig) -> list[dict]:
    # every claim of a protocol audits the same seeded sets; copies keep the cache clean
    return [dict(p) for p in _cached_samples(model.constraints, model.params, seed, n, config)]


def _relation_holds(rel: str, a: Fraction, b: Fraction) -> bool:
    if rel == "<":
        return a < b
    if rel == "<=":
        return a <= b
    return a == b


def _check_chain_refs(exprs: Sequence[Expr], model: PayoffModel):
    names = set(model.param_names)
    for e in exprs:
        missing = referenced_params(e) - names
        if missing:
            raise ModelError(f"chain entry {e} references undeclared parameters {sorted(missing)}")


def audit_chain(claim: ChainClaim, model: PayoffModel, seed: int, n_samples: int = DEFAULT_SAMPLES,
                config: SamplerConfig = DEFAULT_SAMPLER, claim_id: str = "chain") -> AuditReport:
    """Check every ordered adjacent pair of the chain on each sample.

    Unordered-group separators (``|``) claim nothing and are skipped.  All
    ordered steps are checked on all samples so the report lists each step's
    verdict; the headline counterexample is the earliest violation found.
    """
    _check_chain_refs(claim.entries, model)
    samples = _samples(model, seed, n_samples, config)
    ordered = [i for i, s in enumerate(claim.separators) if s != "|"]
    first: dict[int, tuple] = {}
    for k, params in enumerate(samples):
        values = [eval_expr(e, params) for e in claim.entries]
        for i in ordered:
            if i in first:
                continue
            rel = claim.separators[i]
            if not _relation_holds(rel, values[i], values[i + 1]):
                first[i] = (k, params, values[i], values[i + 1])
    steps = []
    for i, rel in enumerate(claim.separators):
        step = {
            "index": i,
            "left": str(claim.entries[i]),
            "relation": rel,
            "right": str(claim.entries[i + 1]),
        }
        if rel == "|":
            step["verdict"] = "unordered"
        elif i in first:
            k, params, lv, rv = first[i]
            step["verdict"] = REFUTED
            step["counterexample"] = {"sample": k, "params": dict(params), "left": lv, "right": rv}
        else:
            step["verdict"] = HOLDS
        steps.append(step)
    report = AuditReport(claim_id, "chain", n_samples, HOLDS if not first else REFUTED, steps=steps)
    if first:
        i = min(first, key=lambda j: (first[j][0], j))
        k, params, lv, rv = first[i]
        report.counterexample = {
            "sample": k,
            "params": dict(params),
            "step": i,
            "relation": claim.separators[i],
            "left_expr": str(claim.entries[i]),
            "right_expr": str(claim.entries[i + 1]),
            "left": lv,
            "right": rv,
        }
    return report


@dataclass
class OrderReport:
    """Pairwise order of a list of expressions across all samples."""
    values: list[Expr]
    samples: int
    matrix: list[list[str]]
    witnesses: dict
    order: Optional[list[int]] = None
    order_separators: Optional[list[str]] = None

    def relation(self, i: int, j: int) -> str:
        return self.matrix[i][j]

    def chain_text(self) -> Optional[str]:
        if self.order is None:
            return None
        parts = [str(self.values[self.order[0]])]
        for sep, idx in zip(self.order_separators, self.order[1:]):
            parts += [sep, str(self.values[idx])]
        return " ".join(parts)


def corrected_chain_search(values: Sequence[Expr], model: PayoffModel, seed: int,
                           n_samples: int = DEFAULT_SAMPLES,
                           config: SamplerConfig = DEFAULT_SAMPLER) -> OrderReport:
    """Classify each pair as always <, always >, always = or varies.

    When no pair varies the relation is a total preorder and ``order`` lists
    the value indices ascending, with ``<``/``=`` separators between them.
    """
    values = list(values)
    if len(values) < 2:
        raise ModelError("need at least two expressions")
    _check_chain_refs(values, model)
    samples = _samples(model, seed, n_samples, config)
    n = len(values)
    seen = {(i, j): set() for i in range(n) for j in range(n)}
    witness: dict = {}
    for params in samples:
        vals = [eval_expr(e, params) for e in values]
        for i in range(n):
            for j in range(n):
                a, b = vals[i], vals[j]
                rel = "<" if a < b else (">" if a > b else "=")
                if rel not in seen[i, j]:
                    seen[i, j].add(rel)
                    witness.setdefault((i, j), {})[rel] = dict(params)
    matrix = []
    varies = {}
    for i in range(n):
        row = []
        for j in range(n):
            rels = seen[i, j]
            if len(rels) == 1:
                row.append(next(iter(rels)))
            else:
                row.append("varies")
                if i < j:
                    varies[f"{i},{j}"] = witness[i, j]
        matrix.append(row)
    report = OrderReport(values, n_samples, matrix, varies)
    if not varies:
        first = [eval_expr(e, samples[0]) for e in values]
        order = sorted(range(n), key=lambda i: (first[i], i))
        report.order = order
        report.order_separators = ["=" if matrix[a][b] == "=" else "<" for a, b in zip(order, order[1:])]
    return report


def income_includes(amounts: Sequence[Fraction], target: Fraction) -> bool:
    """True when some non-empty selection of the triggered amounts sums to ``target``."""
    for r in range(1, len(amounts) + 1):
        for combo in combinations(amounts, r):
            if sum(combo) == target:
                return True
    return False


def _income_amounts(model: PayoffModel, party: str, q, params: ParamSet) -> list[Fraction]:
    return [eval_expr(r.amount, params) for r in triggered(model, party, q, "income")]


def audit_fairness(game: StrategicGame, impl: FairnessImplication, seed: int,
                   n_samples: int = DEFAULT_SAMPLES, config: SamplerConfig = DEFAULT_SAMPLER,
                   claim_id: str = "fairness") -> AuditReport:
    """Pin ``impl.honest`` to its honest action and try every opponent action.

    In each branch of each resulting outcome distribution: if the antecedent
    party's triggered incomes include the antecedent amount, the consequent
    party's incomes must include the consequent amount in that same branch.
    """
    model = game.model
    ids = model.party_ids
    for party in (impl.honest, impl.antecedent[0], impl.consequent[0]):
        if party not in ids:
            raise ModelError(f"fairness implication names unknown party {party!r}")
    opponent = model.other(impl.honest)
    honest_action = game.action_set(impl.honest).honest
    samples = _samples(model, seed, n_samples, config)
    a_party, a_amount = impl.antecedent
    c_party, c_amount = impl.consequent
    triggered_count = 0
    for action in game.actions(opponent):
        profile = game.with_deviation(game.honest_profile, opponent, action)
        profile = game.with_deviation(profile, impl.honest, honest_action)
        for b, (q, prob) in enumerate(game.outcome(profile)):
            for k, params in enumerate(samples):
                if not income_includes(_income_amounts(model, a_party, q, params), eval_expr(a_amount, params)):
                    continue
                triggered_count += 1
                if income_includes(_income_amounts(model, c_party, q, params), eval_expr(c_amount, params)):
                    continue
                return AuditReport(claim_id, "fairness", n_samples, REFUTED, counterexample={
                    "sample": k,
                    "params": dict(params),
                    "profile": list(profile),
                    "branch": b,
                    "outcome": sorted(q),
                    "probability": prob,
                })
    report = AuditReport(claim_id, "fairness", n_samples, HOLDS)
    if triggered_count == 0:
        report.notes.append("antecedent never triggered; holds vacuously")
    return report


def audit_equilibrium_claim(game: StrategicGame, profile, expect_nash: bool, seed: int,
                            n_samples: int = DEFAULT_SAMPLES, config: SamplerConfig = DEFAULT_SAMPLER,
                            claim_id: str = "nash") -> AuditReport:
    """Holds when ``is_nash`` agrees with ``expect_nash`` on every sample."""
    profile = tuple(profile)
    game.outcome(profile)
    samples = _samples(game.model, seed, n_samples, config)
    for k, params in enumerate(samples):
        verdict = is_nash(game, profile, params)
        if verdict.holds == expect_nash:
            continue
        cex = {"sample": k, "params": dict(params), "profile": list(profile), "is_nash": verdict.holds}
        if not verdict.holds:
            cex["witness"] = {
                "party": verdict.party,
                "deviation": verdict.deviation,
                "before": verdict.before,
                "after": verdict.after,
            }
        return AuditReport(claim_id, "nash", n_samples, REFUTED, counterexample=cex)
    return AuditReport(claim_id, "nash", n_samples, HOLDS)


def audit_preferences(entry, params: ParamSet) -> list[dict]:
    """Compare each party's declared property ranking with its measured quantities.

    Rankings run from least to most valued.  Where every ranked property has
    a measuring expression the ranking is checked strictly; otherwise the
    ranking is echoed as report-only.
    """
    require_constraints(params, entry.model.constraints)
    rows = []
    for party, ranking in entry.preferences:
        measures = dict(entry.measures_for(party))
        row = {"party": party, "ranking": list(ranking)}
        if ranking and all(p in measures for p in ranking):
            values = [eval_expr(measures[p], params) for p in ranking]
            row["mode"] = "checked"
            row["values"] = values
            row["consistent"] = all(a < b for a, b in zip(values, values[1:]))
        else:
            row["mode"] = "report-only"
            row["consistent"] = None
        rows.append(row)
    return rows


def claim_matches(claim, report: AuditReport) -> bool:
    """Does the audit verdict agree with what the claim expects?

    Nash audits fold the expectation in already, so they match when they hold.
    Chains expected to fail may pin the exact set of failing steps.
    """
    if isinstance(claim, NashClaim):
        return report.holds
    if claim.expect:
        return report.holds
    if report.holds:
        return False
    if isinstance(claim, ChainClaim) and claim.refuted_steps is not None:
        failed = tuple(s["index"] for s in report.steps if s["verdict"] == REFUTED)
        return failed == claim.refuted_steps
    return True


def claim_ids(claims: Sequence) -> list[str]:
    """Stable identifiers derived from claim content and position."""
    ids = []
    counts: dict[str, int] = {}
    for c in claims:
        if isinstance(c, ChainClaim):
            base = f"chain-{c.party}"
        elif isinstance(c, FairnessClaim):
            base = f"fairness-{c.game}-{c.implication.honest}"
        else:
            base = f"nash-{c.game}"
        counts[base] = counts.get(base, 0) + 1
        ids.append(base if counts[base] == 1 else f"{base}-{counts[base]}")
    return ids


def run_claim(entry, claim, claim_id: str, seed: int, n_samples: int,
              config: SamplerConfig = DEFAULT_SAMPLER) -> AuditReport:
    if isinstance(claim, ChainClaim):
        return audit_chain(claim, entry.model, seed, n_samples, config, claim_id)
    game = entry.game(claim.game)
    if isinstance(claim, FairnessClaim):
        return audit_fairness(game, claim.implication, seed, n_samples, config, claim_id)
    return audit_equilibrium_claim(game, claim.profile, claim.expect, seed, n_samples, config, claim_id)
