"""The ``.gamespec`` text format: parser, checker, elaborator and canonical exporter.

A document is line oriented.  Each statement starts with a keyword and ends
at the newline; ``#`` starts a comment.  Example::

    protocol "toy"
    party A
    party B
    param u
    constraint 0 < u
    event e "something happened" by A
    income A u when e
    outcome {}
    outcome {e}

Games, claims and preference rankings follow the same pattern; see
:func:`export` for the canonical layout of every statement kind.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

from .audit import SEPARATORS, ChainClaim, FairnessClaim, FairnessImplication, NashClaim
from .catalog import PROPERTIES, ProtocolEntry
from .games import VARIANT_KINDS, GameError, OutcomeDistribution, StrategicGame, ActionSet
from .model import (
    PARAM_ROLES,
    Constraint,
    EventAtom,
    Expr,
    Lit,
    ModelError,
    Neg,
    Param,
    Party,
    PayoffModel,
    PayoffRule,
    Add,
    Sub,
    Mul,
    Ref,
    format_expr,
    format_rational,
)

Pos = tuple[int, int]


class ParseError(Exception):
    def __init__(self, line: int, column: int, message: str, token: str = ""):
        super().__init__(message)
        self.line = line
        self.column = column
        self.message = message
        self.token = token

    def __str__(self):
        where = f" near {self.token!r}" if self.token else ""
        return f"{self.line}:{self.column}: {self.message}{where}"


# --- lexer ---------------------------------------------------------------

@dataclass(frozen=True)
class Token:
    kind: str  # IDENT INT STRING SYM NEWLINE EOF
    text: str
    line: int
    col: int

    @property
    def pos(self) -> Pos:
        return (self.line, self.col)


_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
  | (?P<newline>\n)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<int>[0-9]+)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<sym>->|<=|>=|[<>=(){},:|@+\-*/])
""", re.VERBOSE)


def tokenize(text: str) -> list[Token]:
    tokens = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            ch = text[pos]
            if ch == '"':
                raise ParseError(line, col, "unterminated string literal", ch)
            raise ParseError(line, col, f"unexpected character {ch!r}", ch)
        kind = m.lastgroup
        value = m.group()
        if kind == "newline":
            tokens.append(Token("NEWLINE", "\n", line, col))
            line += 1
            line_start = m.end()
        elif kind == "ident":
            tokens.append(Token("IDENT", value, line, col))
        elif kind == "int":
            tokens.append(Token("INT", value, line, col))
        elif kind == "string":
            tokens.append(Token("STRING", value, line, col))
        elif kind == "sym":
            tokens.append(Token("SYM", value, line, col))
        pos = m.end()
    col = pos - line_start + 1
    tokens.append(Token("NEWLINE", "\n", line, col))
    tokens.append(Token("EOF", "", line, col))
    return tokens


def _unquote(s: str) -> str:
    return re.sub(r"\\(.)", r"\1", s[1:-1])


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


# --- document ------------------------------------------------------------

@dataclass
class Node:
    pos: Pos


@dataclass
class PartyDecl(Node):
    id: str
    name: str = ""
    id_pos: Optional[Pos] = None


@dataclass
class ParamDecl(Node):
    name: str
    role: str = "other"
    role_pos: Optional[Pos] = None
    name_pos: Optional[Pos] = None


@dataclass
class ExprNode:
    """An expression plus where each parameter reference appeared."""
    expr: Expr
    refs: list[tuple[str, Pos]]
    pos: Pos


@dataclass
class ConstraintDecl(Node):
    left: ExprNode
    relation: str
    right: ExprNode


@dataclass
class EventDecl(Node):
    name: str
    description: str
    subject: Optional[str] = None
    subject_pos: Optional[Pos] = None
    name_pos: Optional[Pos] = None


@dataclass
class RuleDecl(Node):
    kind: str
    party: str
    party_pos: Pos
    amount: ExprNode
    trigger: str
    trigger_pos: Pos


@dataclass
class AtomSet(Node):
    atoms: list[tuple[str, Pos]]

    def names(self) -> frozenset:
        return frozenset(a for a, _ in self.atoms)


@dataclass
class OutcomeDecl(Node):
    atoms: AtomSet
    tag: Optional[str] = None


@dataclass
class ActionDecl(Node):
    party: str
    party_pos: Pos
    actions: list[tuple[str, Pos]]
    honest: Optional[str] = None
    honest_pos: Optional[Pos] = None


@dataclass
class Branch(Node):
    atoms: AtomSet
    probability: Fraction


@dataclass
class MapDecl(Node):
    profile: tuple[str, str]
    profile_pos: tuple[Pos, Pos]
    branches: list[Branch]


@dataclass
class GameDecl(Node):
    name: str
    kind: str
    actions: list[ActionDecl] = field(default_factory=list)
    maps: list[MapDecl] = field(default_factory=list)


@dataclass
class ChainDecl(Node):
    party: str
    party_pos: Pos
    entries: list[ExprNode]
    separators: list[str]
    expect: bool = True
    refuted_steps: Optional[list[int]] = None


@dataclass
class FairnessDecl(Node):
    game: str
    game_pos: Pos
    honest: str
    honest_pos: Pos
    antecedent: tuple[str, Pos, ExprNode]
    consequent: tuple[str, Pos, ExprNode]
    expect: bool = True


@dataclass
class NashDecl(Node):
    game: str
    game_pos: Pos
    profile: tuple[str, str]
    profile_pos: tuple[Pos, Pos]
    expect: bool = True


@dataclass
class PreferDecl(Node):
    party: str
    party_pos: Pos
    ranking: list[tuple[str, Pos]]


@dataclass
class MeasureDecl(Node):
    party: str
    party_pos: Pos
    prop: str
    prop_pos: Pos
    amount: ExprNode


@dataclass
class SpecDocument:
    protocol: str
    pos: Pos
    parties: list[PartyDecl] = field(default_factory=list)
    params: list[ParamDecl] = field(default_factory=list)
    constraints: list[ConstraintDecl] = field(default_factory=list)
    events: list[EventDecl] = field(default_factory=list)
    rules: list[RuleDecl] = field(default_factory=list)
    outcomes: list[OutcomeDecl] = field(default_factory=list)
    games: list[GameDecl] = field(default_factory=list)
    claims: list[Union[ChainDecl, FairnessDecl, NashDecl]] = field(default_factory=list)
    prefers: list[PreferDecl] = field(default_factory=list)
    measures: list[MeasureDecl] = field(default_factory=list)


# --- parser --------------------------------------------------------------

_RELATIONS = {"<": ("<", False), "<=": ("<=", False), "=": ("=", False), ">": ("<", True), ">=": ("<=", True)}


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.toks = tokens
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, message: str, tok: Optional[Token] = None):
        tok = tok or self.tok
        shown = "end of line" if tok.kind == "NEWLINE" else ("end of input" if tok.kind == "EOF" else tok.text)
        raise ParseError(tok.line, tok.col, message, shown)

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def at(self, kind: str, text: Optional[str] = None) -> bool:
        t = self.tok
        return t.kind == kind and (text is None or t.text == text)

    def at_sym(self, text: str) -> bool:
        return self.at("SYM", text)

    def at_word(self, text: str) -> bool:
        return self.at("IDENT", text)

    def expect_sym(self, text: str) -> Token:
        if not self.at_sym(text):
            self.error(f"expected {text!r}")
        return self.advance()

    def expect_word(self, text: str) -> Token:
        if not self.at_word(text):
            self.error(f"expected keyword {text!r}")
        return self.advance()

    def ident(self, what: str = "identifier") -> Token:
        if not self.at("IDENT"):
            self.error(f"expected {what}")
        return self.advance()

    def string(self, what: str = "string literal") -> Token:
        if not self.at("STRING"):
            self.error(f"expected {what}")
        return self.advance()

    def end_of_statement(self):
        if not self.at("NEWLINE"):
            self.error("expected end of line")
        self.advance()

    def skip_blank(self):
        while self.at("NEWLINE"):
            self.advance()

    # expressions

    def rational(self) -> Fraction:
        num = self.advance()
        value = Fraction(int(num.text))
        if self.at_sym("/"):
            self.advance()
            if not self.at("INT"):
                self.error("expected a positive integer denominator")
            den = self.advance()
            if int(den.text) == 0:
                raise ParseError(den.line, den.col, "denominator must be positive", den.text)
            value = Fraction(int(num.text), int(den.text))
        return value

    def expr(self) -> ExprNode:
        start = self.tok.pos
        refs: list = []
        e = self._sum(refs)
        return ExprNode(e, refs, start)

    def _sum(self, refs) -> Expr:
        left = self._term(refs)
        while self.at_sym("+") or self.at_sym("-"):
            op = self.advance().text
            right = self._term(refs)
            left = Add(left, right) if op == "+" else Sub(left, right)
        return left

    def _term(self, refs) -> Expr:
        left = self._factor(refs)
        while self.at_sym("*"):
            self.advance()
            left = Mul(left, self._factor(refs))
        return left

    def _factor(self, refs) -> Expr:
        t = self.tok
        if t.kind == "INT":
            return Lit(self.rational())
        if t.kind == "IDENT":
            self.advance()
            refs.append((t.text, t.pos))
            return Ref(t.text)
        if self.at_sym("("):
            self.advance()
            inner = self._sum(refs)
            self.expect_sym(")")
            return inner
        if self.at_sym("-"):
            self.advance()
            if self.at("INT"):
                return Lit(-self.rational())
            return Neg(self._factor(refs))
        self.error("expected an expression")

    def atom_set(self) -> AtomSet:
        open_tok = self.expect_sym("{")
        atoms = []
        if not self.at_sym("}"):
            t = self.ident("event name")
            atoms.append((t.text, t.pos))
            while self.at_sym(","):
                self.advance()
                t = self.ident("event name")
                atoms.append((t.text, t.pos))
        self.expect_sym("}")
        return AtomSet(open_tok.pos, atoms)

    def verdict_word(self) -> bool:
        if self.at_word("expected"):
            self.advance()
            return True
        if self.at_word("rejected"):
            self.advance()
            return False
        self.error("expected 'expected' or 'rejected'")

    # statements

    def document(self) -> SpecDocument:
        self.skip_blank()
        head = self.expect_word("protocol")
        name = self.string("protocol name")
        self.end_of_statement()
        doc = SpecDocument(_unquote(name.text), head.pos)
        game: Optional[GameDecl] = None
        while True:
            self.skip_blank()
            if self.at("EOF"):
                break
            t = self.tok
            if t.kind != "IDENT":
                self.error("expected a statement keyword")
            kw = t.text
            if kw in ("action", "map"):
                if game is None:
                    self.error(f"'{kw}' must follow a game declaration")
                if kw == "action":
                    game.actions.append(self.action_stmt())
                else:
                    game.maps.append(self.map_stmt())
                continue
            game = None
            if kw == "party":
                self.advance()
                pid = self.ident("party name")
                display = _unquote(self.advance().text) if self.at("STRING") else ""
                doc.parties.append(PartyDecl(t.pos, pid.text, display, pid.pos))
            elif kw == "param":
                self.advance()
                name_tok = self.ident("parameter name")
                decl = ParamDecl(t.pos, name_tok.text, name_pos=name_tok.pos)
                if self.at("IDENT"):
                    role = self.advance()
                    decl.role, decl.role_pos = role.text, role.pos
                doc.params.append(decl)
            elif kw == "constraint":
                self.advance()
                left = self.expr()
                rel_tok = self.tok
                if rel_tok.kind != "SYM" or rel_tok.text not in _RELATIONS:
                    self.error("expected a relation (<, <=, =, >, >=)")
                self.advance()
                right = self.expr()
                rel, swap = _RELATIONS[rel_tok.text]
                if swap:
                    left, right = right, left
                doc.constraints.append(ConstraintDecl(t.pos, left, rel, right))
            elif kw == "event":
                self.advance()
                name_tok = self.ident("event name")
                desc = self.string("event description")
                decl = EventDecl(t.pos, name_tok.text, _unquote(desc.text), name_pos=name_tok.pos)
                if self.at_word("by"):
                    self.advance()
                    who = self.ident("party name")
                    decl.subject, decl.subject_pos = who.text, who.pos
                doc.events.append(decl)
            elif kw in ("income", "expense"):
                self.advance()
                who = self.ident("party name")
                amount = self.expr()
                self.expect_word("when")
                trig = self.ident("event name")
                doc.rules.append(RuleDecl(t.pos, kw, who.text, who.pos, amount, trig.text, trig.pos))
            elif kw == "outcome":
                self.advance()
                atoms = self.atom_set()
                tag = self.advance().text if self.at("IDENT") else None
                doc.outcomes.append(OutcomeDecl(t.pos, atoms, tag))
            elif kw == "game":
                self.advance()
                name_tok = self.ident("game name")
                kind_tok = self.ident("game kind")
                if kind_tok.text not in VARIANT_KINDS:
                    self.error(f"game kind must be one of {', '.join(VARIANT_KINDS)}", kind_tok)
                game = GameDecl(t.pos, name_tok.text, kind_tok.text)
                doc.games.append(game)
            elif kw == "claim":
                doc.claims.append(self.claim_stmt())
                continue
            elif kw == "prefer":
                self.advance()
                who = self.ident("party name")
                self.expect_sym(":")
                first = self.ident("property name")
                ranking = [(first.text, first.pos)]
                while self.at_sym("<"):
                    self.advance()
                    p = self.ident("property name")
                    ranking.append((p.text, p.pos))
                doc.prefers.append(PreferDecl(t.pos, who.text, who.pos, ranking))
            elif kw == "measure":
                self.advance()
                who = self.ident("party name")
                prop = self.ident("property name")
                amount = self.expr()
                doc.measures.append(MeasureDecl(t.pos, who.text, who.pos, prop.text, prop.pos, amount))
            else:
                self.error(f"unknown statement {kw!r}")
            self.end_of_statement()
        return doc

    def action_stmt(self) -> ActionDecl:
        t = self.advance()
        who = self.ident("party name")
        self.expect_sym(":")
        first = self.ident("action name")
        actions = [(first.text, first.pos)]
        while self.at_sym("|"):
            self.advance()
            a = self.ident("action name")
            actions.append((a.text, a.pos))
        decl = ActionDecl(t.pos, who.text, who.pos, actions)
        if self.at_word("honest"):
            self.advance()
            h = self.ident("honest action name")
            decl.honest, decl.honest_pos = h.text, h.pos
        self.end_of_statement()
        return decl

    def map_stmt(self) -> MapDecl:
        t = self.advance()
        self.expect_sym("(")
        a = self.ident("action name")
        self.expect_sym(",")
        b = self.ident("action name")
        self.expect_sym(")")
        self.expect_sym("->")
        branches = [self.branch()]
        while self.at_sym(","):
            self.advance()
            branches.append(self.branch())
        self.end_of_statement()
        return MapDecl(t.pos, (a.text, b.text), (a.pos, b.pos), branches)

    def branch(self) -> Branch:
        atoms = self.atom_set()
        self.expect_sym("@")
        if not self.at("INT"):
            self.error("expected a probability")
        return Branch(atoms.pos, atoms, self.rational())

    def claim_stmt(self):
        t = self.advance()
        kind = self.ident("claim kind")
        if kind.text == "chain":
            who = self.ident("party name")
            self.expect_sym(":")
            entries = [self.expr()]
            seps = []
            while self.tok.kind == "SYM" and self.tok.text in SEPARATORS:
                seps.append(self.advance().text)
                entries.append(self.expr())
            if not seps:
                self.error("a chain needs at least two entries")
            decl = ChainDecl(t.pos, who.text, who.pos, entries, seps)
            if self.at("IDENT"):
                decl.expect = self.verdict_word()
                if not decl.expect and self.at_word("steps"):
                    self.advance()
                    steps = [self._int()]
                    while self.at_sym(","):
                        self.advance()
                        steps.append(self._int())
                    decl.refuted_steps = steps
        elif kind.text == "fairness":
            game = self.ident("game name")
            self.expect_word("honest")
            honest = self.ident("party name")
            self.expect_sym(":")
            a_party = self.ident("party name")
            a_amount = self.expr()
            self.expect_sym("->")
            c_party = self.ident("party name")
            c_amount = self.expr()
            expect = self.verdict_word()
            decl = FairnessDecl(t.pos, game.text, game.pos, honest.text, honest.pos,
                                (a_party.text, a_party.pos, a_amount),
                                (c_party.text, c_party.pos, c_amount), expect)
        elif kind.text == "nash":
            game = self.ident("game name")
            self.expect_sym("(")
            a = self.ident("action name")
            self.expect_sym(",")
            b = self.ident("action name")
            self.expect_sym(")")
            expect = self.verdict_word()
            decl = NashDecl(t.pos, game.text, game.pos, (a.text, b.text), (a.pos, b.pos), expect)
        else:
            self.error("claim kind must be chain, fairness or nash", kind)
        self.end_of_statement()
        return decl

    def _int(self) -> int:
        if not self.at("INT"):
            self.error("expected an integer")
        return int(self.advance().text)


def parse(text: str, validate: bool = True) -> SpecDocument:
    """Parse a gamespec document; the first error raises :class:`ParseError`.

    With ``validate`` the name-resolution and probability checks run as well,
    so a returned document refers only to declared entities.
    """
    doc = _Parser(tokenize(text)).document()
    if validate:
        check(doc)
    return doc


def parse_expr(text: str) -> Expr:
    """Read a single expression; ``parse_expr(format_expr(e)) == e`` for every tree."""
    p = _Parser(tokenize(text))
    node = p.expr()
    p.skip_blank()
    if not p.at("EOF"):
        p.error("unexpected text after expression")
    return node.expr


# --- semantic checks -----------------------------------------------------

def _fail(pos: Pos, message: str, token: str = ""):
    raise ParseError(pos[0], pos[1], message, token)


def _check_expr(node: ExprNode, params: set, where: str):
    for name, pos in node.refs:
        if name not in params:
            _fail(pos, f"undeclared parameter in {where}", name)


def check(doc: SpecDocument) -> None:
    """Name resolution, duplicates and probability sums, with positions."""
    seen: dict = {}

    def unique(kind, name, pos):
        if (kind, name) in seen:
            _fail(pos, f"duplicate {kind} name", name)
        seen[kind, name] = pos

    for p in doc.parties:
        unique("party", p.id, p.id_pos or p.pos)
    if len(doc.parties) > 2:
        _fail(doc.parties[2].pos, "exactly two parties are allowed", doc.parties[2].id)
    parties = {p.id for p in doc.parties}

    def party(name, pos):
        if name not in parties:
            _fail(pos, "undeclared party", name)

    for p in doc.params:
        unique("parameter", p.name, p.name_pos or p.pos)
        if p.role not in PARAM_ROLES:
            _fail(p.role_pos or p.pos, f"unknown parameter role (use one of {', '.join(PARAM_ROLES)})", p.role)
    params = {p.name for p in doc.params}
    for c in doc.constraints:
        _check_expr(c.left, params, "constraint")
        _check_expr(c.right, params, "constraint")
    for e in doc.events:
        unique("event", e.name, e.name_pos or e.pos)
        if e.subject is not None:
            party(e.subject, e.subject_pos)
    events = {e.name for e in doc.events}

    def atoms(aset: AtomSet):
        names = set()
        for name, pos in aset.atoms:
            if name not in events:
                _fail(pos, "undeclared event", name)
            if name in names:
                _fail(pos, "event listed twice", name)
            names.add(name)

    for r in doc.rules:
        party(r.party, r.party_pos)
        _check_expr(r.amount, params, "rule amount")
        if r.trigger not in events:
            _fail(r.trigger_pos, "undeclared event", r.trigger)
    outcome_sets = set()
    for o in doc.outcomes:
        atoms(o.atoms)
        if o.atoms.names() in outcome_sets:
            _fail(o.pos, "duplicate outcome", "outcome")
        outcome_sets.add(o.atoms.names())
    games = {}
    for g in doc.games:
        unique("game", g.name, g.pos)
        games[g.name] = g
        declared: dict = {}
        for a in g.actions:
            party(a.party, a.party_pos)
            if a.party in declared:
                _fail(a.pos, f"actions of party {a.party} declared twice in game {g.name}", "action")
            names = set()
            for name, pos in a.actions:
                if name in names:
                    _fail(pos, "duplicate action name", name)
                names.add(name)
            if a.honest is not None and a.honest not in names:
                _fail(a.honest_pos, "honest action is not one of the party's actions", a.honest)
            declared[a.party] = names
        order = [p.id for p in doc.parties]
        seen_profiles = set()
        for m in g.maps:
            for idx, (action, pos) in enumerate(zip(m.profile, m.profile_pos)):
                if idx < len(order) and order[idx] in declared and action not in declared[order[idx]]:
                    _fail(pos, f"unknown action for party {order[idx]}", action)
            if m.profile in seen_profiles:
                _fail(m.pos, "duplicate map entry for this profile", "map")
            seen_profiles.add(m.profile)
            total = Fraction(0)
            for b in m.branches:
                atoms(b.atoms)
                if b.atoms.names() not in outcome_sets:
                    _fail(b.pos, "branch outcome is not a declared outcome", "{")
                if b.probability <= 0:
                    _fail(b.pos, "branch probability must be positive", format_rational(b.probability))
                total += b.probability
            if total != 1:
                _fail(m.pos, f"branch probabilities sum to {format_rational(total)}, not 1", "map")

    def game_ref(name, pos) -> GameDecl:
        if name not in games:
            _fail(pos, "undeclared game", name)
        return games[name]

    for c in doc.claims:
        if isinstance(c, ChainDecl):
            party(c.party, c.party_pos)
            for e in c.entries:
                _check_expr(e, params, "chain")
            if c.refuted_steps is not None:
                for s in c.refuted_steps:
                    if not 0 <= s < len(c.separators) or c.separators[s] == "|":
                        _fail(c.pos, f"step {s} is not an ordered step of the chain", str(s))
        elif isinstance(c, FairnessDecl):
            game_ref(c.game, c.game_pos)
            party(c.honest, c.honest_pos)
            for who, pos, amount in (c.antecedent, c.consequent):
                party(who, pos)
                _check_expr(amount, params, "fairness claim")
        else:
            g = game_ref(c.game, c.game_pos)
            acts = {a.party: {n for n, _ in a.actions} for a in g.actions}
            for who, action, pos in zip([p.id for p in doc.parties], c.profile, c.profile_pos):
                if who in acts and action not in acts[who]:
                    _fail(pos, f"unknown action for party {who}", action)
    ranked = set()
    for p in doc.prefers:
        party(p.party, p.party_pos)
        if p.party in ranked:
            _fail(p.pos, "ranking for this party declared twice", p.party)
        ranked.add(p.party)
        for prop, pos in p.ranking:
            if prop not in PROPERTIES:
                _fail(pos, f"unknown property (use one of {', '.join(PROPERTIES)})", prop)
    for m in doc.measures:
        party(m.party, m.party_pos)
        if m.prop not in PROPERTIES:
            _fail(m.prop_pos, f"unknown property (use one of {', '.join(PROPERTIES)})", m.prop)
        _check_expr(m.amount, params, "measure")


# --- elaboration ---------------------------------------------------------

def elaborate(doc: SpecDocument) -> ProtocolEntry:
    """Turn a checked document into an engine-ready :class:`ProtocolEntry`."""
    check(doc)
    if len(doc.parties) != 2:
        _fail(doc.pos, "a protocol declares exactly two parties", "protocol")
    if not doc.outcomes:
        _fail(doc.pos, "no outcomes declared", "protocol")
    if not any(not o.atoms.names() for o in doc.outcomes):
        _fail(doc.outcomes[0].pos, "the empty outcome {} must be declared", "outcome")
    order = [p.id for p in doc.parties]
    try:
        model = PayoffModel(
            doc.protocol,
            tuple(Party(p.id, p.name) for p in doc.parties),
            tuple(Param(p.name, p.role) for p in doc.params),
            tuple(Constraint(c.left.expr, c.relation, c.right.expr) for c in doc.constraints),
            tuple(EventAtom(e.name, e.description, e.subject) for e in doc.events),
            tuple(PayoffRule(r.party, r.kind, r.trigger, r.amount.expr) for r in doc.rules),
            tuple(o.atoms.names() for o in doc.outcomes),
            tuple((o.atoms.names(), o.tag) for o in doc.outcomes if o.tag),
        )
    except ModelError as exc:
        _fail(doc.pos, str(exc), "protocol")
    games = []
    for g in doc.games:
        by_party = {a.party: a for a in g.actions}
        for pid in order:
            if pid not in by_party:
                _fail(g.pos, f"game {g.name} declares no actions for party {pid}", g.name)
            a = by_party[pid]
            if a.honest is None:
                _fail(a.pos, f"party {pid} has no honest action in game {g.name}", "action")
        sets = tuple(ActionSet(pid, tuple(n for n, _ in by_party[pid].actions), by_party[pid].honest)
                     for pid in order)
        maps = {m.profile: m for m in g.maps}
        for x in sets[0].actions:
            for y in sets[1].actions:
                if (x, y) not in maps:
                    _fail(g.pos, f"game {g.name} has no map entry for profile ({x}, {y})", g.name)
        try:
            dists = {p: OutcomeDistribution(tuple((b.atoms.names(), b.probability) for b in m.branches))
                     for p, m in maps.items()}
            games.append(StrategicGame(g.name, g.kind, model, sets, dists))
        except GameError as exc:
            _fail(g.pos, str(exc), g.name)
    claims = []
    for c in doc.claims:
        if isinstance(c, ChainDecl):
            claims.append(ChainClaim(c.party, [e.expr for e in c.entries], c.separators, c.expect,
                                     tuple(c.refuted_steps) if c.refuted_steps is not None else None))
        elif isinstance(c, FairnessDecl):
            impl = FairnessImplication(c.honest, (c.antecedent[0], c.antecedent[2].expr),
                                       (c.consequent[0], c.consequent[2].expr))
            claims.append(FairnessClaim(c.game, impl, c.expect))
        else:
            claims.append(NashClaim(c.game, c.profile, c.expect))
    return ProtocolEntry(
        doc.protocol, model, tuple(games), tuple(claims),
        preferences=tuple((p.party, tuple(n for n, _ in p.ranking)) for p in doc.prefers),
        measures=tuple((m.party, m.prop, m.amount.expr) for m in doc.measures),
    )


def load(text: str) -> ProtocolEntry:
    return elaborate(parse(text))


# --- export --------------------------------------------------------------

def _atoms(model: PayoffModel, q) -> str:
    return "{" + ", ".join(a for a in model.atom_names if a in q) + "}"


def _verdict(expect: bool) -> str:
    return "expected" if expect else "rejected"


def export(item: Union[ProtocolEntry, SpecDocument]) -> str:
    """Canonical text: fixed section order, one declaration per line, ``\\n`` endings."""
    entry = elaborate(item) if isinstance(item, SpecDocument) else item
    m = entry.model
    out = [f"protocol {_quote(entry.name if entry.name else m.name)}", ""]
    for p in m.parties:
        out.append(f"party {p.id}" + (f" {_quote(p.name)}" if p.name else ""))
    out.append("")
    for p in m.params:
        out.append(f"param {p.name}" + (f" {p.role}" if p.role != "other" else ""))
    if m.constraints:
        out.append("")
        for c in m.constraints:
            out.append(f"constraint {format_expr(c.left)} {c.relation} {format_expr(c.right)}")
    out.append("")
    for a in m.atoms:
        out.append(f"event {a.name} {_quote(a.description)}" + (f" by {a.subject}" if a.subject else ""))
    if m.rules:
        out.append("")
        for r in m.rules:
            out.append(f"{r.kind} {r.party} {format_expr(r.amount)} when {r.trigger}")
    out.append("")
    for q in m.outcomes:
        tag = m.tag(q)
        out.append(f"outcome {_atoms(m, q)}" + (f" {tag}" if tag else ""))
    for g in entry.games:
        out += ["", f"game {g.name} {g.kind}"]
        for s in g.action_sets:
            out.append(f"  action {s.party}: {' | '.join(s.actions)} honest {s.honest}")
        for prof in g.profiles():
            branches = ", ".join(f"{_atoms(m, q)} @ {format_rational(p)}" for q, p in g.outcome_map[prof])
            out.append(f"  map ({prof[0]}, {prof[1]}) -> {branches}")
    if entry.claims:
        out.append("")
        for c in entry.claims:
            out.append(_claim_line(c))
    if entry.preferences or entry.measures:
        out.append("")
        for party, ranking in entry.preferences:
            out.append(f"prefer {party} : {' < '.join(ranking)}")
        for party, prop, e in entry.measures:
            out.append(f"measure {party} {prop} {format_expr(e)}")
    return "\n".join(out) + "\n"


def _claim_line(c) -> str:
    if isinstance(c, ChainClaim):
        parts = [format_expr(c.entries[0])]
        for sep, e in zip(c.separators, c.entries[1:]):
            parts += [sep, format_expr(e)]
        line = f"claim chain {c.party} : {' '.join(parts)} {_verdict(c.expect)}"
        if c.refuted_steps is not None:
            line += " steps " + ", ".join(map(str, c.refuted_steps))
        return line
    if isinstance(c, FairnessClaim):
        i = c.implication
        return (f"claim fairness {c.game} honest {i.honest} : {i.antecedent[0]} {format_expr(i.antecedent[1])}"
                f" -> {i.consequent[0]} {format_expr(i.consequent[1])} {_verdict(c.expect)}")
    return f"claim nash {c.game} ({c.profile[0]}, {c.profile[1]}) {_verdict(c.expect)}"
