#!/usr/bin/env python3
"""
Auditing the sixteen-value payoff chain of secure two-party computation.

The chain orders every payoff party A can see.  Some steps follow from the
parameter constraints; others do not, and sampling finds exact counterexamples.
"""
from protogame import get_protocol
from protogame.audit import ChainClaim, audit_chain, corrected_chain_search

s2pc = get_protocol("s2pc")
claim = next(c for c in s2pc.claims if isinstance(c, ChainClaim) and c.party == "A")

report = audit_chain(claim, s2pc.model, seed=42, n_samples=1000)
print("overall:", report.verdict)
for step in report.steps:
    mark = {"holds-on-all-samples": "ok", "refuted": "NO", "unordered": "--"}[step["verdict"]]
    print(f"  [{mark}] {step['left']}  {step['relation']}  {step['right']}")
    if step["verdict"] == "refuted":
        cex = step["counterexample"]
        shown = ", ".join(f"{k}={v}" for k, v in cex["params"].items())
        print(f"         at {shown}: {cex['left']} vs {cex['right']}")

order = corrected_chain_search(claim.entries, s2pc.model, seed=42, n_samples=1000)
print()
print("pairs whose order depends on the parameters:")
for key in order.witnesses:
    i, j = map(int, key.split(","))
    print(f"  {claim.entries[i]}  vs  {claim.entries[j]}")
