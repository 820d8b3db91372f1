from collections import Counter
from fractions import Fraction as F

import pytest

from protogame.audit import ChainClaim, claim_matches, run_claim
from protogame.catalog import ALIASES, UnknownProtocol, get_protocol, list_protocols, resolve_name
from protogame.model import enumerate_outcomes, eval_expr, listed_outcomes, payoff
from protogame.sampling import sample_params

PROTOCOLS = list_protocols()[0]


def test_names_and_aliases():
    names, aliases = list_protocols()
    assert names == ["fair_exchange", "s2pc", "coin_flipping", "oblivious_transfer",
                     "bit_commitment", "zero_knowledge"]
    assert aliases == ALIASES
    assert get_protocol("contract_signing") is get_protocol("fair_exchange")
    assert resolve_name("certified_mail") == "fair_exchange"
    assert resolve_name("nope") is None


def test_unknown_protocol_lists_valid_names():
    with pytest.raises(UnknownProtocol, match="valid names: fair_exchange"):
        get_protocol("contract")


@pytest.mark.parametrize("name, total, listed", [
    ("fair_exchange", 4, 4),
    ("s2pc", 16, 16),
    ("coin_flipping", 6, 5),
    ("oblivious_transfer", 4, 4),
    ("bit_commitment", 4, 4),
    ("zero_knowledge", 4, 3),
])
def test_outcome_counts(name, total, listed):
    m = get_protocol(name).model
    assert len(enumerate_outcomes(m)) == total
    assert len(listed_outcomes(m)) == listed


@pytest.mark.parametrize("name", PROTOCOLS)
def test_every_entry_has_an_honest_rational_game(name):
    e = get_protocol(name)
    g = e.game("rational")
    assert g.kind == "rational"
    assert g.honest_profile == ("follow", "follow")


# chains whose entries are exactly the party's payoff values over the listed outcomes
SPECTRUM_CHAINS = [("fair_exchange", "A"), ("fair_exchange", "B"), ("s2pc", "A"), ("s2pc", "B"),
                   ("coin_flipping", "A"), ("coin_flipping", "B"),
                   ("oblivious_transfer", "A"), ("oblivious_transfer", "B")]


@pytest.mark.parametrize("name, party", SPECTRUM_CHAINS)
def test_chain_entries_are_the_payoff_values(name, party):
    e = get_protocol(name)
    chain = next(c for c in e.claims if isinstance(c, ChainClaim) and c.party == party)
    for params in sample_params(e.model.constraints, e.model.params, 5, 50):
        chain_values = Counter(eval_expr(x, params) for x in chain.entries)
        payoffs = Counter(payoff(e.model, party, q, params) for q in listed_outcomes(e.model))
        assert chain_values == payoffs


@pytest.mark.parametrize("name", PROTOCOLS)
def test_every_claim_matches_its_expectation(name):
    e = get_protocol(name)
    for cid, claim in e.named_claims():
        report = run_claim(e, claim, cid, seed=11, n_samples=150)
        assert claim_matches(claim, report), cid


def test_s2pc_ranking_is_consistent_with_measures():
    from protogame.audit import audit_preferences

    e = get_protocol("s2pc")
    for params in sample_params(e.model.constraints, e.model.params, 0, 50):
        rows = audit_preferences(e, params)
        assert all(r["mode"] == "checked" and r["consistent"] for r in rows)


def test_fair_exchange_ranking_is_consistent_with_measures():
    from protogame.audit import audit_preferences

    e = get_protocol("fair_exchange")
    rows = audit_preferences(e, {"u_AA": F(1), "u_AB": F(2), "u_BB": F(1), "u_BA": F(3)})
    assert [r["consistent"] for r in rows] == [True, True]


def test_claims_must_name_known_games():
    import dataclasses
    from protogame.audit import NashClaim

    e = get_protocol("bit_commitment")
    with pytest.raises(ValueError, match="unknown game"):
        dataclasses.replace(e, claims=[NashClaim("with_abort", ("follow", "follow"))])
