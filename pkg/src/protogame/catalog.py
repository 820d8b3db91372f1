"""The six two-party protocols as payoff models, games and checkable claims.

Each protocol has a ``rational`` game whose outcome map encodes the
protocol's guarantees (fraud against an honest party yields nothing) and,
where useful, a guarantee-free ``naive`` game that serves as a negative
control.  Deviation names such as ``withhold`` or ``probe`` are modelling
choices, not protocol messages.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .audit import ChainClaim, FairnessClaim, FairnessImplication, NashClaim, claim_ids
from .games import OutcomeDistribution, StrategicGame, make_game
from .model import (
    EventAtom,
    Expr,
    Lit,
    Param,
    Party,
    PayoffModel,
    chain_constraints,
    expense,
    income,
    lt,
    outcome,
    power_set,
    ref,
)

PROPERTIES = ("correctness", "privacy", "fairness", "exclusiveness", "voyeurism")


class UnknownProtocol(LookupError):
    pass


@dataclass(frozen=True)
class ProtocolEntry:
    name: str
    model: PayoffModel
    games: tuple[StrategicGame, ...]
    claims: tuple = ()
    # (party, properties from least to most valued)
    preferences: tuple[tuple[str, tuple[str, ...]], ...] = ()
    # (party, property, quantity measuring how much the party values it)
    measures: tuple[tuple[str, str, Expr], ...] = ()
    description: str = field(default="", compare=False)
    aliases: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        for attr in ("games", "claims", "preferences", "measures", "aliases"):
            object.__setattr__(self, attr, tuple(getattr(self, attr)))
        object.__setattr__(self, "preferences", tuple((p, tuple(r)) for p, r in self.preferences))
        names = [g.name for g in self.games]
        if len(set(names)) != len(names):
            raise ValueError(f"{self.name}: duplicate game names")
        for c in self.claims:
            if hasattr(c, "game") and c.game not in names:
                raise ValueError(f"{self.name}: claim refers to unknown game {c.game!r}")

    @property
    def variants(self) -> tuple[str, ...]:
        return tuple(g.name for g in self.games)

    def game(self, name: str) -> StrategicGame:
        for g in self.games:
            if g.name == name:
                return g
        raise KeyError(f"{self.name} has no game {name!r}; games: {', '.join(self.variants)}")

    def measures_for(self, party: str) -> list[tuple[str, Expr]]:
        return [(prop, e) for p, prop, e in self.measures if p == party]

    def named_claims(self) -> list[tuple[str, object]]:
        return list(zip(claim_ids(self.claims), self.claims))


def _parties():
    return (Party("A", "Alice"), Party("B", "Bob"))


def _chain(party, *items, expect=True, refuted_steps=None) -> ChainClaim:
    entries = list(items[0::2])
    seps = list(items[1::2])
    return ChainClaim(party, entries, seps, expect, refuted_steps)


ZERO = Lit(0)


# --- fair exchange -------------------------------------------------------

def fair_exchange() -> ProtocolEntry:
    u = {f"{i}{j}": ref(f"u_{i}{j}") for i in "AB" for j in "AB"}
    params = [Param("u_AA", "own_secret"), Param("u_AB", "other_secret"),
              Param("u_BA", "other_secret"), Param("u_BB", "own_secret")]
    constraints = (chain_constraints(0, u["AA"], u["AB"]) + chain_constraints(0, u["BB"], u["BA"]))
    atoms = [
        EventAtom("recv_A_MB", "A receives B's secret", "A"),
        EventAtom("recv_B_MA", "B receives A's secret", "B"),
    ]
    rules = [
        income("A", u["AB"], "recv_A_MB"),
        expense("B", u["BB"], "recv_A_MB"),
        income("B", u["BA"], "recv_B_MA"),
        expense("A", u["AA"], "recv_B_MA"),
    ]
    both = outcome("recv_A_MB", "recv_B_MA")
    outcomes = [outcome(), outcome("recv_A_MB"), outcome("recv_B_MA"), both]
    model = PayoffModel("fair_exchange", _parties(), params, constraints, atoms, rules, outcomes)
    acts = [("A", ("follow", "withhold"), "follow"), ("B", ("follow", "withhold"), "follow")]
    rational = make_game("rational", "rational", model, acts, {
        ("follow", "follow"): both,
        ("follow", "withhold"): outcome(),
        ("withhold", "follow"): outcome(),
        ("withhold", "withhold"): outcome(),
    })
    # a sent secret arrives whatever the other side does
    naive = make_game("naive", "naive", model, acts, {
        ("follow", "follow"): both,
        ("follow", "withhold"): outcome("recv_B_MA"),
        ("withhold", "follow"): outcome("recv_A_MB"),
        ("withhold", "withhold"): outcome(),
    })
    claims = []
    for i, j in (("A", "B"), ("B", "A")):
        own, oth = u[i + i], u[i + j]
        claims.append(_chain(i, -own, "<", ZERO, "<", oth - own, "<", oth))
    for variant, expect in (("rational", True), ("naive", False)):
        for i, j in (("A", "B"), ("B", "A")):
            impl = FairnessImplication(i, (j, u[j + i]), (i, u[i + j]))
            claims.append(FairnessClaim(variant, impl, expect))
    claims.append(NashClaim("rational", ("follow", "follow"), True))
    claims.append(NashClaim("naive", ("follow", "follow"), False))
    return ProtocolEntry(
        "fair_exchange", model, (rational, naive), claims,
        preferences=[("A", ("privacy", "correctness")), ("B", ("privacy", "correctness"))],
        measures=[("A", "privacy", u["AA"]), ("A", "correctness", u["AB"]),
                  ("B", "privacy", u["BB"]), ("B", "correctness", u["BA"])],
        description="exchange of secrets M_A and M_B; neither side gets the other's secret alone",
        aliases=("contract_signing", "certified_mail"),
    )


# --- secure two-party computation ----------------------------------------

def s2pc() -> ProtocolEntry:
    k = ref("k")
    u = {f"{i}{j}": ref(f"u_{i}{j}") for i in "AB" for j in "AB"}
    g = {"A": ref("u_Ag"), "B": ref("u_Bg")}
    params = [Param("u_Ag", "joint_output"), Param("u_Bg", "joint_output"), Param("k", "amplification"),
              Param("u_AA", "own_secret"), Param("u_AB", "other_secret"),
              Param("u_BA", "other_secret"), Param("u_BB", "own_secret")]
    constraints = [lt(1, k)]
    for i, j in (("A", "B"), ("B", "A")):
        constraints += chain_constraints(0, g[i], u[i + j], k * g[i], u[i + i])
    atoms = [
        EventAtom("recv_A_MB", "A receives B's secret input", "A"),
        EventAtom("recv_A_g", "A receives the joint output g", "A"),
        EventAtom("recv_B_MA", "B receives A's secret input", "B"),
        EventAtom("recv_B_g", "B receives the joint output g", "B"),
    ]
    rules = []
    for i, j in (("A", "B"), ("B", "A")):
        rules += [
            income(i, u[i + j], f"recv_{i}_M{j}"),
            income(i, k * g[i], f"recv_{i}_g"),
            expense(i, u[i + i], f"recv_{j}_M{i}"),
            expense(i, g[i], f"recv_{j}_g"),
        ]
    model = PayoffModel("s2pc", _parties(), params, constraints, atoms, rules,
                        power_set(a.name for a in atoms))
    moves = ("follow", "abort", "substitute", "grab")
    acts = [("A", moves, "follow"), ("B", moves, "follow")]
    both_g = outcome("recv_A_g", "recv_B_g")

    def rational_map(a, b):
        if a == b == "follow":
            return both_g
        if "follow" in (a, b):
            # a grab against an honest party completes without leaking the secret
            return both_g if "grab" in (a, b) else outcome()
        return outcome()

    def naive_map(a, b):
        if a == b == "follow":
            return both_g
        if "follow" not in (a, b):
            return outcome()
        cheat, dev = ("A", a) if b == "follow" else ("B", b)
        victim = "B" if cheat == "A" else "A"
        if dev == "grab":
            return outcome(f"recv_{cheat}_M{victim}", "recv_A_g", "recv_B_g")
        # abort after learning g; a substituted input changes nothing else
        return outcome(f"recv_{cheat}_g")

    profiles = [(a, b) for a in moves for b in moves]
    rational = make_game("rational", "rational", model, acts, {p: rational_map(*p) for p in profiles})
    naive = make_game("naive", "naive", model, acts, {p: naive_map(*p) for p in profiles})

    claims = []
    for i, j in (("A", "B"), ("B", "A")):
        ug, uij, uii = g[i], u[i + j], u[i + i]
        claims.append(_chain(
            i,
            -ug - uii, "<", -uii, "<", uij - uii - ug, "<", (k - 1) * ug - uii, "<", k * ug - uii, "<",
            -ug, "|", uij - uii, "|", (k - 1) * ug + uij - uii, "<", ZERO, "|",
            k * ug + uij - uii, "<", uij - ug, "<", uij, "|", (k - 1) * ug, "<", k * ug, "<",
            (k - 1) * ug + uij, "<", k * ug + uij,
            expect=False, refuted_steps=(4, 7, 9),
        ))
    for variant, expect in (("rational", True), ("naive", False)):
        for i, j in (("A", "B"), ("B", "A")):
            claims.append(FairnessClaim(variant, FairnessImplication(
                i, (j, k * g[j]), (i, k * g[i])), expect))
            claims.append(FairnessClaim(variant, FairnessImplication(
                i, (j, u[j + i] + k * g[j]), (i, u[i + j] + k * g[i])), expect))
    claims.append(NashClaim("rational", ("follow", "follow"), True))
    claims.append(NashClaim("naive", ("follow", "follow"), False))
    ranking = ("exclusiveness", "voyeurism", "correctness", "privacy")
    measures = []
    for i, j in (("A", "B"), ("B", "A")):
        measures += [(i, "exclusiveness", g[i]), (i, "voyeurism", u[i + j]),
                     (i, "correctness", k * g[i]), (i, "privacy", u[i + i])]
    return ProtocolEntry(
        "s2pc", model, (rational, naive), claims,
        preferences=[("A", ranking), ("B", ranking)],
        measures=measures,
        description="symmetric secure two-party computation of a joint output g",
    )


# --- coin flipping -------------------------------------------------------

def coin_flipping() -> ProtocolEntry:
    k = ref("k")
    u = {"A": ref("u_A"), "B": ref("u_B")}
    params = [Param("u_A", "joint_output"), Param("u_B", "joint_output"), Param("k", "amplification")]
    constraints = [lt(0, u["A"]), lt(0, u["B"]), lt(1, k)]
    atoms = [
        EventAtom("sel_A", "the sequence M is selected by A", "A"),
        EventAtom("sel_B", "the sequence M is selected by B", "B"),
        EventAtom("recv_A_M", "A receives M", "A"),
        EventAtom("recv_B_M", "B receives M", "B"),
    ]
    rules = []
    for i, j in (("A", "B"), ("B", "A")):
        rules += [
            income(i, u[i], f"sel_{i}"),
            income(i, k * u[i], f"recv_{i}_M"),
            expense(i, k * u[i], f"sel_{j}"),
            expense(i, u[i], f"recv_{j}_M"),
        ]
    joint = outcome("sel_A", "sel_B", "recv_A_M", "recv_B_M")
    outcomes = [outcome(), outcome("sel_B"), outcome("recv_B_M"), joint, outcome("sel_A"), outcome("recv_A_M")]
    # the empty outcome is where thwarted bias attempts end; it is not one of the five published cases
    model = PayoffModel("coin_flipping", _parties(), params, constraints, atoms, rules, outcomes,
                        [(outcome(), "unlisted")])
    acts = [("A", ("follow", "bias"), "follow"), ("B", ("follow", "bias"), "follow")]
    rational = make_game("rational", "rational", model, acts, {
        ("follow", "follow"): joint,
        ("follow", "bias"): outcome(),
        ("bias", "follow"): outcome(),
        ("bias", "bias"): outcome(),
    })
    # the biaser learns M first and the honest side never gets it
    naive = make_game("naive", "naive", model, acts, {
        ("follow", "follow"): joint,
        ("follow", "bias"): outcome("recv_B_M"),
        ("bias", "follow"): outcome("recv_A_M"),
        ("bias", "bias"): outcome(),
    })
    claims = []
    for i in "AB":
        claims.append(_chain(i, -(k * u[i]), "<", -u[i], "<", ZERO, "<", u[i], "<", k * u[i]))
    for variant, expect in (("rational", True), ("naive", False)):
        for i, j in (("A", "B"), ("B", "A")):
            claims.append(FairnessClaim(variant, FairnessImplication(i, (j, k * u[j]), (i, k * u[i])), expect))
    claims.append(NashClaim("rational", ("follow", "follow"), True))
    claims.append(NashClaim("naive", ("follow", "follow"), False))
    return ProtocolEntry(
        "coin_flipping", model, (rational, naive), claims,
        description="joint generation of a common random sequence M",
    )


# --- oblivious transfer --------------------------------------------------

def oblivious_transfer() -> ProtocolEntry:
    k = ref("k")
    ua, ub = ref("u_A"), ref("u_B")
    params = [Param("u_A", "own_secret"), Param("u_B", "other_secret"), Param("k", "amplification")]
    constraints = [lt(0, ua), lt(0, ub), lt(1, k)]
    atoms = [
        EventAtom("recv_B_M", "B receives A's secret M", "B"),
        EventAtom("A_knows", "A knows whether B received M", "A"),
    ]
    rules = [
        expense("A", ua, "recv_B_M"),
        income("B", ub, "recv_B_M"),
        income("A", k * ua, "A_knows"),
        expense("B", (k + 1) * ub, "A_knows"),
    ]
    outcomes = [outcome(), outcome("recv_B_M"), outcome("A_knows"), outcome("recv_B_M", "A_knows")]
    model = PayoffModel("oblivious_transfer", _parties(), params, constraints, atoms, rules, outcomes)
    half = Fraction(1, 2)
    coin = OutcomeDistribution(((outcome("recv_B_M"), half), (outcome(), half)))
    nothing = OutcomeDistribution.certain(outcome())

    def table(a_moves, probe_works):
        out = {}
        for a in a_moves:
            for b in ("follow", "abort"):
                if a == "abort" or b == "abort":
                    out[a, b] = nothing
                elif a == "probe" and probe_works:
                    out[a, b] = OutcomeDistribution((
                        (outcome("recv_B_M", "A_knows"), half), (outcome("A_knows"), half)))
                else:
                    out[a, b] = coin
        return out

    b_acts = ("B", ("follow", "abort"), "follow")
    rational = make_game("rational", "rational", model,
                         [("A", ("follow", "probe"), "follow"), b_acts], table(("follow", "probe"), False))
    naive = make_game("naive", "naive", model,
                      [("A", ("follow", "probe"), "follow"), b_acts], table(("follow", "probe"), True))
    with_abort = make_game("with_abort", "custom", model,
                           [("A", ("follow", "probe", "abort"), "follow"), b_acts],
                           table(("follow", "probe", "abort"), False))
    claims = [
        # as published; k > 1 makes (k - 1) * u_A positive, so this must fail
        _chain("A", -ua, "<", (k - 1) * ua, "<", ZERO, "<", k * ua, expect=False),
        _chain("B", (-k - 1) * ub, "<", -k * ub, "<", ZERO, "<", ub),
        FairnessClaim("rational", FairnessImplication("B", ("A", k * ua), ("B", ub)), True),
        FairnessClaim("naive", FairnessImplication("B", ("A", k * ua), ("B", ub)), False),
        NashClaim("rational", ("follow", "follow"), True),
        NashClaim("naive", ("follow", "follow"), False),
        NashClaim("with_abort", ("follow", "follow"), False),
    ]
    return ProtocolEntry(
        "oblivious_transfer", model, (rational, naive, with_abort), claims,
        preferences=[("A", ("exclusiveness", "voyeurism")), ("B", ("correctness", "privacy"))],
        description="A transfers M, B receives it with probability 1/2, A cannot tell which",
    )


# --- bit commitment and zero knowledge -----------------------------------

def _fraud_pair(name, atom_b, desc_b, atom_a, desc_a, moves_a, moves_b, tags, description, prefs):
    k = ref("k")
    ua, ub = ref("u_A"), ref("u_B")
    params = [Param("u_A", "own_secret"), Param("u_B", "other_secret"), Param("k", "amplification")]
    constraints = [lt(0, ua), lt(0, ub), lt(1, k)]
    atoms = [EventAtom(atom_b, desc_b, "B"), EventAtom(atom_a, desc_a, "A")]
    rules = [
        expense("A", k * ua, atom_b),
        income("B", ub, atom_b),
        income("A", ua, atom_a),
        expense("B", k * ub, atom_a),
    ]
    outcomes = [outcome(), outcome(atom_b), outcome(atom_a), outcome(atom_a, atom_b)]
    model = PayoffModel(name, _parties(), params, constraints, atoms, rules, outcomes, tags)
    acts = [("A", ("follow", moves_a), "follow"), ("B", ("follow", moves_b), "follow")]
    rational = make_game("rational", "rational", model, acts, {
        ("follow", "follow"): outcome(),
        ("follow", moves_b): outcome(),
        (moves_a, "follow"): outcome(),
        (moves_a, moves_b): outcome(),
    })
    naive = make_game("naive", "naive", model, acts, {
        ("follow", "follow"): outcome(),
        ("follow", moves_b): outcome(atom_b),
        (moves_a, "follow"): outcome(atom_a),
        (moves_a, moves_b): outcome(atom_a, atom_b),
    })
    claims = [
        NashClaim("rational", ("follow", "follow"), True),
        NashClaim("naive", ("follow", "follow"), False),
    ]
    return ProtocolEntry(name, model, (rational, naive), claims, preferences=prefs, description=description)


def bit_commitment() -> ProtocolEntry:
    return _fraud_pair(
        "bit_commitment",
        "recv_B_M_early", "B learns the committed value before the opening stage",
        "A_modifies", "A modifies the committed value",
        "modify", "open_early", (),
        "A commits to a value B may read only at opening and A may not change",
        [("A", ("exclusiveness", "privacy")), ("B", ("voyeurism", "correctness"))],
    )


def zero_knowledge() -> ProtocolEntry:
    return _fraud_pair(
        "zero_knowledge",
        "recv_B_M", "B obtains A's secret",
        "A_no_knowledge", "A does not actually know the secret",
        "fake", "extract", ((outcome("recv_B_M", "A_no_knowledge"), "unlisted"),),
        "A convinces B she knows a secret without revealing it",
        [("A", ("exclusiveness", "privacy")), ("B", ("voyeurism", "correctness"))],
    )


# --- lookup --------------------------------------------------------------

_BUILDERS = {
    "fair_exchange": fair_exchange,
    "s2pc": s2pc,
    "coin_flipping": coin_flipping,
    "oblivious_transfer": oblivious_transfer,
    "bit_commitment": bit_commitment,
    "zero_knowledge": zero_knowledge,
}
ALIASES = {"contract_signing": "fair_exchange", "certified_mail": "fair_exchange"}
_CACHE: dict[str, ProtocolEntry] = {}


def list_protocols() -> tuple[list[str], dict[str, str]]:
    return list(_BUILDERS), dict(ALIASES)


def get_protocol(name: str) -> ProtocolEntry:
    key = ALIASES.get(name, name)
    if key not in _BUILDERS:
        valid = ", ".join(list(_BUILDERS) + list(ALIASES))
        raise UnknownProtocol(f"unknown protocol {name!r}; valid names: {valid}")
    if key not in _CACHE:
        _CACHE[key] = _BUILDERS[key]()
    return _CACHE[key]


def resolve_name(name: str) -> Optional[str]:
    key = ALIASES.get(name, name)
    return key if key in _BUILDERS else None
