#!/usr/bin/env python3
"""
Fair exchange as a game: payoffs, equilibria and what breaks without guarantees.
"""
from fractions import Fraction

from protogame import equilibria, get_protocol, is_nash, payoff_spectrum
from protogame.audit import FairnessImplication, audit_fairness
from protogame.model import format_expr, payoff_expr, ref

fe = get_protocol("fair_exchange")
model = fe.model

# each party values the other's secret above its own
params = {"u_AA": Fraction(1), "u_AB": Fraction(3), "u_BB": Fraction(2), "u_BA": Fraction(5, 2)}

for party in model.party_ids:
    print(f"payoffs of {party}, lowest first")
    for q, value in payoff_spectrum(model, party, params):
        atoms = ", ".join(sorted(q)) or "nothing delivered"
        print(f"  {atoms:30s} {format_expr(payoff_expr(model, party, q)):16s} = {value}")

rational, naive = fe.game("rational"), fe.game("naive")
print()
print("rational equilibria:", equilibria(rational, params))
print("naive equilibria:   ", equilibria(naive, params))

# without the guarantee, each side gains its own secret's worth by holding back
v = is_nash(naive, naive.honest_profile, params)
print(f"naive: {v.party} deviates to {v.deviation}, payoff {v.before} -> {v.after}")

# A honest: if B ends up with A's secret, A must end up with B's
impl = FairnessImplication("A", ("B", ref("u_BA")), ("A", ref("u_AB")))
for game in (rational, naive):
    r = audit_fairness(game, impl, seed=42, n_samples=200)
    print(f"fairness on {game.name}: {r.verdict}", r.counterexample["profile"] if r.counterexample else "")
