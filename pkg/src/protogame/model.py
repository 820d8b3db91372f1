"""Exact payoff models built from event atoms and additive income/expense rules.

Every number in this package is a :class:`fractions.Fraction`.  A payoff model
declares two parties, named parameters with constraints, event atoms, and
rules that charge or pay a party a parameter-dependent amount whenever an
atom holds.  A terminal outcome is the set of atoms that are true.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Optional, Union

Rational = Fraction
ParamSet = Mapping[str, Fraction]
Outcome = frozenset

PARAM_ROLES = ("own_secret", "other_secret", "joint_output", "amplification", "other")
RELATIONS = ("<", "<=", "=")


class ModelError(ValueError):
    """A payoff model or one of its inputs is malformed."""


class UnboundParameterError(ModelError, KeyError):
    def __init__(self, name: str):
        super().__init__(name)
        self.name = name

    def __str__(self):
        return f"unbound parameter {self.name!r}"


class ConstraintViolation(ModelError):
    def __init__(self, constraint: "Constraint"):
        super().__init__(f"constraint violated: {constraint}")
        self.constraint = constraint


class InfeasibleOutcome(ModelError):
    pass


def as_rational(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise TypeError("floats are not accepted; pass an int, Fraction or 'p/q' string")
    return Fraction(value)


# --- expressions ---------------------------------------------------------

class Expr:
    """Base of the immutable expression tree.

    Arithmetic operators build trees, so ``k * u`` with ``k, u = ref('k'),
    ref('u')`` yields ``Mul(Ref('k'), Ref('u'))``.  Comparison operators are
    deliberately left alone; use :func:`lt`, :func:`le` and :func:`eq`.
    """

    __slots__ = ()

    def __add__(self, other):
        return Add(self, expr(other))

    def __radd__(self, other):
        return Add(expr(other), self)

    def __sub__(self, other):
        return Sub(self, expr(other))

    def __rsub__(self, other):
        return Sub(expr(other), self)

    def __mul__(self, other):
        return Mul(self, expr(other))

    def __rmul__(self, other):
        return Mul(expr(other), self)

    def __neg__(self):
        if isinstance(self, Lit):
            return Lit(-self.value)
        return Neg(self)

    def __str__(self):
        return format_expr(self)


@dataclass(frozen=True, eq=True)
class Lit(Expr):
    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", as_rational(self.value))


@dataclass(frozen=True, eq=True)
class Ref(Expr):
    name: str


@dataclass(frozen=True, eq=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True, eq=True)
class Add(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, eq=True)
class Sub(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, eq=True)
class Mul(Expr):
    left: Expr
    right: Expr


def expr(value) -> Expr:
    """Coerce ints, Fractions and ``'p/q'`` strings to literals."""
    if isinstance(value, Expr):
        return value
    return Lit(as_rational(value))


def ref(name: str) -> Ref:
    return Ref(name)


def eval_expr(e: Expr, params: ParamSet) -> Fraction:
    if isinstance(e, Lit):
        return e.value
    if isinstance(e, Ref):
        try:
            return params[e.name]
        except KeyError:
            raise UnboundParameterError(e.name) from None
    if isinstance(e, Neg):
        return -eval_expr(e.arg, params)
    if isinstance(e, Add):
        return eval_expr(e.left, params) + eval_expr(e.right, params)
    if isinstance(e, Sub):
        return eval_expr(e.left, params) - eval_expr(e.right, params)
    if isinstance(e, Mul):
        return eval_expr(e.left, params) * eval_expr(e.right, params)
    raise TypeError(f"not an expression: {e!r}")


def referenced_params(e: Expr) -> set[str]:
    if isinstance(e, Lit):
        return set()
    if isinstance(e, Ref):
        return {e.name}
    if isinstance(e, Neg):
        return referenced_params(e.arg)
    return referenced_params(e.left) | referenced_params(e.right)


def degree_in(e: Expr, name: str) -> int:
    """Polynomial degree of ``e`` in the parameter ``name``."""
    if isinstance(e, Lit):
        return 0
    if isinstance(e, Ref):
        return int(e.name == name)
    if isinstance(e, Neg):
        return degree_in(e.arg, name)
    if isinstance(e, Mul):
        return degree_in(e.left, name) + degree_in(e.right, name)
    return max(degree_in(e.left, name), degree_in(e.right, name))


def format_rational(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


# binding strength: sums 1, products 2, prefix minus 3, atoms 4
def _prec(e: Expr) -> int:
    if isinstance(e, (Add, Sub)):
        return 1
    if isinstance(e, Mul):
        return 2
    if isinstance(e, Neg):
        return 3
    if isinstance(e, Lit) and e.value < 0:
        return 3
    return 4


def _wrap(e: Expr, min_prec: int) -> str:
    text = format_expr(e)
    return f"({text})" if _prec(e) < min_prec else text


def format_expr(e: Expr) -> str:
    """Canonical text that parses back to the identical tree."""
    if isinstance(e, Lit):
        return format_rational(e.value)
    if isinstance(e, Ref):
        return e.name
    if isinstance(e, Neg):
        # "-3" would re-read as a negative literal, "-a * b" as (-a) * b
        if isinstance(e.arg, Lit) or _prec(e.arg) < 3:
            return f"-({format_expr(e.arg)})"
        return f"-{format_expr(e.arg)}"
    if isinstance(e, Add):
        return f"{_wrap(e.left, 1)} + {_wrap(e.right, 2)}"
    if isinstance(e, Sub):
        return f"{_wrap(e.left, 1)} - {_wrap(e.right, 2)}"
    if isinstance(e, Mul):
        return f"{_wrap(e.left, 2)} * {_wrap(e.right, 3)}"
    raise TypeError(f"not an expression: {e!r}")


# --- constraints ---------------------------------------------------------

@dataclass(frozen=True)
class Constraint:
    left: Expr
    relation: str
    right: Expr

    def __post_init__(self):
        if self.relation not in RELATIONS:
            raise ModelError(f"relation must be one of {RELATIONS}, got {self.relation!r}")

    def holds(self, params: ParamSet) -> bool:
        lhs = eval_expr(self.left, params)
        rhs = eval_expr(self.right, params)
        if self.relation == "<":
            return lhs < rhs
        if self.relation == "<=":
            return lhs <= rhs
        return lhs == rhs

    def params(self) -> set[str]:
        return referenced_params(self.left) | referenced_params(self.right)

    def __str__(self):
        return f"{self.left} {self.relation} {self.right}"


def lt(a, b) -> Constraint:
    return Constraint(expr(a), "<", expr(b))


def le(a, b) -> Constraint:
    return Constraint(expr(a), "<=", expr(b))


def eq(a, b) -> Constraint:
    return Constraint(expr(a), "=", expr(b))


def chain_constraints(*terms) -> list[Constraint]:
    """``chain_constraints(a, b, c)`` is ``a < b`` and ``b < c``."""
    return [lt(a, b) for a, b in zip(terms, terms[1:])]


def check_constraints(params: ParamSet, constraints: Iterable[Constraint]) -> Optional[Constraint]:
    """Return the first violated constraint, or ``None`` when all hold."""
    for c in constraints:
        if not c.holds(params):
            return c
    return None


def require_constraints(params: ParamSet, constraints: Iterable[Constraint]) -> None:
    violated = check_constraints(params, constraints)
    if violated is not None:
        raise ConstraintViolation(violated)


# --- model ---------------------------------------------------------------

@dataclass(frozen=True)
class Party:
    id: str
    name: str = ""

    @property
    def display(self) -> str:
        return self.name or self.id


@dataclass(frozen=True)
class Param:
    name: str
    role: str = "other"

    def __post_init__(self):
        if self.role not in PARAM_ROLES:
            raise ModelError(f"unknown parameter role {self.role!r}")


@dataclass(frozen=True)
class EventAtom:
    name: str
    description: str = ""
    subject: Optional[str] = None


@dataclass(frozen=True)
class PayoffRule:
    party: str
    kind: str  # "income" or "expense"
    trigger: str
    amount: Expr

    def __post_init__(self):
        if self.kind not in ("income", "expense"):
            raise ModelError(f"rule kind must be income or expense, got {self.kind!r}")


def income(party: str, amount, trigger: str) -> PayoffRule:
    return PayoffRule(party, "income", trigger, expr(amount))


def expense(party: str, amount, trigger: str) -> PayoffRule:
    return PayoffRule(party, "expense", trigger, expr(amount))


def outcome(*atoms: str) -> frozenset:
    return frozenset(atoms)


@dataclass(frozen=True)
class PayoffModel:
    name: str
    parties: tuple[Party, Party]
    params: tuple[Param, ...]
    constraints: tuple[Constraint, ...]
    atoms: tuple[EventAtom, ...]
    rules: tuple[PayoffRule, ...]
    outcomes: tuple[frozenset, ...]
    # outcome -> tag, e.g. "unlisted" for outcomes outside the published value lists
    outcome_tags: tuple[tuple[frozenset, str], ...] = field(default=())

    def __post_init__(self):
        for attr in ("parties", "params", "constraints", "atoms", "rules", "outcomes", "outcome_tags"):
            object.__setattr__(self, attr, tuple(getattr(self, attr)))
        object.__setattr__(self, "outcomes", tuple(frozenset(q) for q in self.outcomes))
        object.__setattr__(self, "outcome_tags", tuple((frozenset(q), t) for q, t in self.outcome_tags))
        self._validate()
        # order-insensitive equality: store outcomes in canonical order
        object.__setattr__(self, "outcomes", tuple(sorted(self.outcomes, key=lambda q: canonical_key(self, q))))
        object.__setattr__(self, "outcome_tags", tuple(sorted(self.outcome_tags, key=lambda qt: canonical_key(self, qt[0]))))

    def _validate(self):
        if len(self.parties) != 2:
            raise ModelError("a payoff model has exactly two parties")
        if self.parties[0].id == self.parties[1].id:
            raise ModelError("party ids must be distinct")
        _unique([p.name for p in self.params], "parameter")
        _unique([a.name for a in self.atoms], "event")
        pids = self.party_ids
        names = self.param_names
        atoms = set(self.atom_names)
        for a in self.atoms:
            if a.subject is not None and a.subject not in pids:
                raise ModelError(f"event {a.name!r} names unknown party {a.subject!r}")
        for c in self.constraints:
            _check_refs(c.params(), names, f"constraint {c}")
        for r in self.rules:
            if r.party not in pids:
                raise ModelError(f"rule names unknown party {r.party!r}")
            if r.trigger not in atoms:
                raise ModelError(f"rule trigger {r.trigger!r} is not a declared event")
            _check_refs(referenced_params(r.amount), names, f"rule amount {r.amount}")
        if not self.outcomes:
            raise ModelError("outcome list is empty")
        if len(set(self.outcomes)) != len(self.outcomes):
            raise ModelError("outcome list has duplicates")
        if frozenset() not in self.outcomes:
            raise ModelError("the empty outcome must be feasible")
        for q in self.outcomes:
            unknown = q - atoms
            if unknown:
                raise ModelError(f"outcome mentions undeclared events {sorted(unknown)}")
        for q, _ in self.outcome_tags:
            if q not in self.outcomes:
                raise ModelError(f"tagged outcome {sorted(q)} is not feasible")

    @property
    def party_ids(self) -> tuple[str, str]:
        return (self.parties[0].id, self.parties[1].id)

    @property
    def param_names(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.params)

    @property
    def atom_names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.atoms)

    def other(self, party: str) -> str:
        a, b = self.party_ids
        if party == a:
            return b
        if party == b:
            return a
        raise ModelError(f"unknown party {party!r}")

    def tag(self, q: frozenset) -> Optional[str]:
        return dict(self.outcome_tags).get(frozenset(q))

    def is_feasible(self, q) -> bool:
        return frozenset(q) in set(self.outcomes)

    def rules_for(self, party: str, kind: Optional[str] = None) -> list[PayoffRule]:
        return [r for r in self.rules if r.party == party and (kind is None or r.kind == kind)]

    def exhaustive(self) -> "PayoffModel":
        """Copy of the model whose outcome universe is every subset of atoms."""
        return PayoffModel(self.name, self.parties, self.params, self.constraints,
                           self.atoms, self.rules, power_set(self.atom_names), self.outcome_tags)


def power_set(names: Iterable[str]) -> list[frozenset]:
    names = list(names)
    return [frozenset(c) for n in range(len(names) + 1) for c in combinations(names, n)]


def _unique(names, what):
    seen = set()
    for n in names:
        if n in seen:
            raise ModelError(f"duplicate {what} name {n!r}")
        seen.add(n)


def _check_refs(used, declared, where):
    missing = sorted(set(used) - set(declared))
    if missing:
        raise ModelError(f"{where} references undeclared parameters {missing}")


def canonical_key(model: PayoffModel, q: frozenset) -> tuple[bool, ...]:
    """Bitvector over atom names in sorted order; False sorts before True."""
    return tuple(name in q for name in sorted(model.atom_names))


def enumerate_outcomes(model: PayoffModel) -> list[frozenset]:
    """Every feasible outcome, in canonical bitvector order."""
    return sorted(model.outcomes, key=lambda q: canonical_key(model, q))


def listed_outcomes(model: PayoffModel) -> list[frozenset]:
    """Feasible outcomes minus those tagged ``unlisted``."""
    tags = dict(model.outcome_tags)
    return [q for q in enumerate_outcomes(model) if tags.get(q) != "unlisted"]


def triggered(model: PayoffModel, party: str, q, kind: str) -> list[PayoffRule]:
    q = frozenset(q)
    return [r for r in model.rules_for(party, kind) if r.trigger in q]


def incomes(model: PayoffModel, party: str, q, params: ParamSet) -> Fraction:
    return sum((eval_expr(r.amount, params) for r in triggered(model, party, q, "income")), Fraction(0))


def expenses(model: PayoffModel, party: str, q, params: ParamSet) -> Fraction:
    return sum((eval_expr(r.amount, params) for r in triggered(model, party, q, "expense")), Fraction(0))


def payoff(model: PayoffModel, party: str, q, params: ParamSet, check: bool = True) -> Fraction:
    """Incomes minus expenses of ``party`` at terminal outcome ``q``."""
    q = frozenset(q)
    if party not in model.party_ids:
        raise ModelError(f"unknown party {party!r}")
    if check:
        if not model.is_feasible(q):
            raise InfeasibleOutcome(f"outcome {sorted(q)} is not feasible in {model.name}")
        require_constraints(params, model.constraints)
    return incomes(model, party, q, params) - expenses(model, party, q, params)


def payoff_expr(model: PayoffModel, party: str, q) -> Expr:
    """Symbolic payoff at ``q``, summing rules in declaration order."""
    total: Optional[Expr] = None
    for r in model.rules_for(party):
        if r.trigger not in q:
            continue
        if total is None:
            total = r.amount if r.kind == "income" else -r.amount
        elif r.kind == "income":
            total = Add(total, r.amount)
        else:
            total = Sub(total, r.amount)
    return Lit(0) if total is None else total


def payoff_spectrum(model: PayoffModel, party: str, params: ParamSet,
                    outcomes: Optional[Iterable[frozenset]] = None) -> list[tuple[frozenset, Fraction]]:
    """Payoff of every canonical outcome, sorted ascending (stable on ties)."""
    require_constraints(params, model.constraints)
    qs = enumerate_outcomes(model)
    if outcomes is not None:
        wanted = {frozenset(q) for q in outcomes}
        qs = [q for q in qs if q in wanted]
    rows = [(q, payoff(model, party, q, params, check=False)) for q in qs]
    return sorted(rows, key=lambda row: row[1])


def parse_rational(text: Union[str, int, Fraction]) -> Fraction:
    """Read ``'p/q'`` or an integer; decimals are rejected to stay exact."""
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    s = text.strip()
    if "." in s or "e" in s.lower():
        raise ValueError(f"decimal literals are not accepted: {text!r}")
    return Fraction(s)
