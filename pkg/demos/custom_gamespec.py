#!/usr/bin/env python3
"""
Writing a protocol in the gamespec format and verifying its claims.

The toy below is an escrow: B pays, A delivers, and an arbiter makes sure a
delivery that never happens is refunded.
"""
from protogame.gamespec import ParseError, export, load
from protogame.report import render_markdown, verify

SPEC = '''
protocol "escrow"

party A "Seller"
party B "Buyer"

param price other
param value other
param cost other
constraint 0 < cost
constraint cost < price
constraint price < value

event paid "A receives the payment" by A
event shipped "B receives the goods" by B

income A price when paid
expense B price when paid
income B value when shipped
expense A cost when shipped

outcome {}
outcome {paid, shipped}
outcome {shipped}

game rational rational
  action A: ship | keep honest ship
  action B: pay | skip honest pay
  map (ship, pay) -> {paid, shipped} @ 1
  map (ship, skip) -> {} @ 1
  map (keep, pay) -> {} @ 1
  map (keep, skip) -> {} @ 1

claim chain A : -cost < 0 < price - cost expected
claim nash rational (ship, pay) expected
'''

entry = load(SPEC)
report = verify(entry, seed=42, samples=500)
print(render_markdown(report))

print("canonical form:")
print(export(entry))

try:
    load(SPEC.replace("income A price", "income A prize"))
except ParseError as err:
    print("a typo is caught with its position:", err)
