"""Seeded, exact sampling of parameter sets that satisfy a constraint system.

Parameters are assigned one at a time.  Once every other parameter of a
constraint is fixed and the constraint is linear in the remaining one, it
becomes an interval bound; a value is drawn inside the intersected interval.
Systems this cannot handle fall back to rejection sampling.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .model import Constraint, Param, check_constraints, degree_in, eval_expr


class SamplingError(RuntimeError):
    """No satisfying parameter set was found within the draw budget."""


@dataclass(frozen=True)
class SamplerConfig:
    denominator_cap: int = 10_000
    # half-open intervals extend by at most span_factor * max(1, |bound|)
    span_factor: int = 2
    # range for parameters with no usable bound, and for rejection draws
    magnitude: int = 10
    constructive_attempts: int = 50
    rejection_budget: int = 100_000

    def as_dict(self) -> dict:
        return {
            "denominator_cap": self.denominator_cap,
            "span_factor": self.span_factor,
            "magnitude": self.magnitude,
            "constructive_attempts": self.constructive_attempts,
            "rejection_budget": self.rejection_budget,
        }


DEFAULT_SAMPLER = SamplerConfig()


@dataclass
class _Bounds:
    lo: Optional[Fraction] = None
    lo_strict: bool = False
    hi: Optional[Fraction] = None
    hi_strict: bool = False
    fixed: Optional[Fraction] = None
    empty: bool = False

    def lower(self, value, strict):
        if self.lo is None or value > self.lo or (value == self.lo and strict):
            self.lo, self.lo_strict = value, strict

    def upper(self, value, strict):
        if self.hi is None or value < self.hi or (value == self.hi and strict):
            self.hi, self.hi_strict = value, strict

    def pin(self, value):
        if self.fixed is not None and self.fixed != value:
            self.empty = True
        self.fixed = value


def _linear_bound(c: Constraint, name: str, known: dict, bounds: _Bounds) -> None:
    """Fold a constraint that is linear in ``name`` into its bounds."""
    diff_at = {}
    for x in (0, 1):
        env = dict(known)
        env[name] = Fraction(x)
        diff_at[x] = eval_expr(c.right, env) - eval_expr(c.left, env)
    # right - left = slope * x + offset must be > 0 (<), >= 0 (<=), == 0 (=)
    offset = diff_at[0]
    slope = diff_at[1] - offset
    strict = c.relation == "<"
    if slope == 0:
        ok = offset > 0 if strict else (offset >= 0 if c.relation == "<=" else offset == 0)
        if not ok:
            bounds.empty = True
        return
    root = -offset / slope
    if c.relation == "=":
        bounds.pin(root)
    elif slope > 0:
        bounds.lower(root, strict)
    else:
        bounds.upper(root, strict)


def _order(decls: Sequence[Param], constraints: Sequence[Constraint]) -> list[str]:
    """Greedy order: next is the parameter closing the most constraints."""
    remaining = [p.name for p in decls]
    chosen: set[str] = set()
    order = []
    scopes = [c.params() for c in constraints]
    while remaining:
        def closed(name):
            return sum(1 for s in scopes if name in s and s <= chosen | {name})
        best = max(remaining, key=lambda n: (closed(n), -remaining.index(n)))
        order.append(best)
        chosen.add(best)
        remaining.remove(best)
    return order


def _draw_between(rng: random.Random, lo: Fraction, hi: Fraction, cap: int) -> Fraction:
    t = Fraction(rng.randint(1, cap - 1), cap)
    target = lo + (hi - lo) * t
    rounded = target.limit_denominator(cap)
    if lo < rounded < hi:
        return rounded
    if lo < target < hi:
        return target
    return (lo + hi) / 2


def _draw(rng: random.Random, b: _Bounds, cfg: SamplerConfig) -> Optional[Fraction]:
    if b.empty:
        return None
    if b.fixed is not None:
        v = b.fixed
        if b.lo is not None and (v < b.lo or (v == b.lo and b.lo_strict)):
            return None
        if b.hi is not None and (v > b.hi or (v == b.hi and b.hi_strict)):
            return None
        return v
    cap = cfg.denominator_cap
    lo, hi = b.lo, b.hi
    if lo is not None and hi is not None:
        if lo > hi or (lo == hi and (b.lo_strict or b.hi_strict)):
            return None
        if lo == hi:
            return lo
        return _draw_between(rng, lo, hi, cap)
    if lo is not None:
        span = cfg.span_factor * max(Fraction(1), abs(lo))
        return _draw_between(rng, lo, lo + span, cap)
    if hi is not None:
        span = cfg.span_factor * max(Fraction(1), abs(hi))
        return _draw_between(rng, hi - span, hi, cap)
    m = Fraction(cfg.magnitude)
    return _draw_between(rng, -m, m, cap)


def _constructive(rng, order, constraints, cfg) -> Optional[dict]:
    known: dict = {}
    for name in order:
        bounds = _Bounds()
        for c in constraints:
            scope = c.params()
            if name not in scope or not scope <= set(known) | {name}:
                continue
            if degree_in(c.left, name) > 1 or degree_in(c.right, name) > 1:
                continue
            _linear_bound(c, name, known, bounds)
        value = _draw(rng, bounds, cfg)
        if value is None:
            return None
        known[name] = value
    if check_constraints(known, constraints) is None:
        return known
    return None


def _rejection(rng, names, constraints, cfg) -> Optional[dict]:
    cap = cfg.denominator_cap
    top = cfg.magnitude * cap
    for _ in range(cfg.rejection_budget):
        candidate = {n: Fraction(rng.randint(-top, top), cap) for n in names}
        if check_constraints(candidate, constraints) is None:
            return candidate
    return None


def sample_one(constraints: Sequence[Constraint], decls: Sequence[Param], seed: int,
               config: SamplerConfig = DEFAULT_SAMPLER) -> dict:
    rng = random.Random(seed)
    constraints = list(constraints)
    order = _order(decls, constraints)
    for _ in range(config.constructive_attempts):
        found = _constructive(rng, order, constraints, config)
        if found is not None:
            return {p.name: found[p.name] for p in decls}
    found = _rejection(rng, [p.name for p in decls], constraints, config)
    if found is None:
        raise SamplingError(
            f"unsatisfied after budget: no parameter set satisfies "
            f"{', '.join(map(str, constraints))} within {config.rejection_budget} draws")
    return found


def sample_params(constraints: Iterable[Constraint], decls: Iterable[Param], seed: int, n: int,
                  config: SamplerConfig = DEFAULT_SAMPLER) -> list[dict]:
    """``n`` parameter sets satisfying every constraint exactly.

    Sample ``i`` is drawn from its own generator seeded with ``seed + i``, so
    the result depends only on the arguments and any slice can be computed
    independently of the others.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    constraints = tuple(constraints)
    decls = tuple(decls)
    return [sample_one(constraints, decls, seed + i, config) for i in range(n)]
