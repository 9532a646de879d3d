"""Quantifier-free constraint formulas over finite-domain observables.

Atoms are boolean observables or comparisons between integer terms; enum
values may only be compared with ``==`` / ``!=`` against observables of the
same enum.  Connective precedence, tightest first::

    !   >   == != < <= > >=   >   &&   >   ||   >   ->

``->`` associates to the right, ``&&`` / ``||`` / ``+`` / ``-`` to the left.
Integer arithmetic inside formulas is unbounded; observable domains only
restrict the values a state may carry, not the literals a formula may use.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace

from . import _lex
from .errors import FormulaError, ModelError

# ---------------------------------------------------------------------------
# observable declarations


@dataclass(frozen=True)
class BoolDomain:
    """Two-valued domain {false, true}."""


@dataclass(frozen=True)
class IntRange:
    """Bounded integer interval [lo..hi]."""

    lo: int
    hi: int

    def __post_init__(self):
        if self.lo > self.hi:
            raise ModelError(f"empty integer range [{self.lo}..{self.hi}]")


@dataclass(frozen=True)
class EnumDomain:
    """Finite set of named values."""

    values: tuple[str, ...]

    def __post_init__(self):
        if not self.values:
            raise ModelError("enum domain with no values")
        if len(set(self.values)) != len(self.values):
            raise ModelError("duplicate enum value")


def domain_values(domain):
    """All values of a domain, in a fixed order."""
    if isinstance(domain, BoolDomain):
        return (False, True)
    if isinstance(domain, IntRange):
        return tuple(range(domain.lo, domain.hi + 1))
    return domain.values


def domain_contains(domain, value):
    # bool is a subclass of int, so the checks are type-strict on purpose
    if isinstance(domain, BoolDomain):
        return type(value) is bool
    if isinstance(domain, IntRange):
        return type(value) is int and domain.lo <= value <= domain.hi
    return type(value) is str and value in domain.values


def domain_text(domain):
    if isinstance(domain, BoolDomain):
        return "bool"
    if isinstance(domain, IntRange):
        return f"int[{domain.lo}..{domain.hi}]"
    return "enum {" + ", ".join(domain.values) + "}"


@dataclass(frozen=True)
class ObservableDecl:
    name: str
    domain: BoolDomain | IntRange | EnumDomain


class Observables:
    """Ordered observable declarations sharing one flat namespace.

    Observable names and enum value names must not collide: a bare
    identifier in a formula resolves either to an observable or to an
    enum value, never ambiguously.
    """

    def __init__(self, decls):
        self.decls = tuple(decls)
        self._domains = {}
        self._enum_owner = {}
        for d in self.decls:
            if d.name in self._domains or d.name in self._enum_owner:
                raise ModelError(f"duplicate name {d.name!r} in observable declarations")
            self._domains[d.name] = d.domain
            if isinstance(d.domain, EnumDomain):
                for v in d.domain.values:
                    if v in self._domains or v in self._enum_owner:
                        raise ModelError(f"duplicate name {v!r} in observable declarations")
                    self._enum_owner[v] = d.name

    def names(self):
        return tuple(d.name for d in self.decls)

    def domain(self, name):
        try:
            return self._domains[name]
        except KeyError:
            raise ModelError(f"undeclared observable {name!r}") from None

    def domain_or_none(self, name):
        return self._domains.get(name)

    def enum_owner(self, value):
        """Name of the enum observable declaring ``value``, or None."""
        return self._enum_owner.get(value)

    def __eq__(self, other):
        return isinstance(other, Observables) and self._domains == other._domains

    def __repr__(self):
        return f"Observables({list(self.decls)!r})"


def check_valuation(observables, valuation):
    """Raise ModelError unless ``valuation`` binds exactly the declared names to in-domain values."""
    names = set(observables.names())
    got = set(valuation)
    if got != names:
        missing = sorted(names - got)
        extra = sorted(got - names)
        parts = []
        if missing:
            parts.append("missing " + ", ".join(missing))
        if extra:
            parts.append("undeclared " + ", ".join(extra))
        raise ModelError("bad valuation: " + "; ".join(parts))
    for name in observables.names():
        dom = observables.domain(name)
        if not domain_contains(dom, valuation[name]):
            raise ModelError(
                f"value {valuation[name]!r} of {name!r} outside domain {domain_text(dom)}"
            )


# ---------------------------------------------------------------------------
# abstract syntax


def _pos():
    return field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class IntLit:
    value: int
    pos: tuple | None = _pos()


@dataclass(frozen=True)
class Name:
    """Observable reference; a bare boolean atom or an integer/enum term."""

    name: str
    pos: tuple | None = _pos()


@dataclass(frozen=True)
class EnumLit:
    """Enum value literal, produced by :func:`typecheck` for undeclared identifiers."""

    value: str
    pos: tuple | None = _pos()


@dataclass(frozen=True)
class Arith:
    op: str  # '+' or '-'
    left: object
    right: object
    pos: tuple | None = _pos()


@dataclass(frozen=True)
class BoolLit:
    value: bool
    pos: tuple | None = _pos()


@dataclass(frozen=True)
class Compare:
    op: str  # '==' '!=' '<' '<=' '>' '>='
    left: object
    right: object
    pos: tuple | None = _pos()


@dataclass(frozen=True)
class Not:
    arg: object
    pos: tuple | None = _pos()


@dataclass(frozen=True)
class And:
    left: object
    right: object
    pos: tuple | None = _pos()


@dataclass(frozen=True)
class Or:
    left: object
    right: object
    pos: tuple | None = _pos()


@dataclass(frozen=True)
class Implies:
    left: object
    right: object
    pos: tuple | None = _pos()


# ---------------------------------------------------------------------------
# parsing

_RULES = [
    ("arrow", re.compile(r"->")),
    ("ne", re.compile(r"!=")),
    ("le", re.compile(r"<=")),
    ("ge", re.compile(r">=")),
    ("eq", re.compile(r"==")),
    ("and", re.compile(r"&&")),
    ("or", re.compile(r"\|\|")),
    ("not", re.compile(r"!")),
    ("lt", re.compile(r"<")),
    ("gt", re.compile(r">")),
    ("plus", re.compile(r"\+")),
    ("minus", re.compile(r"-")),
    ("lpar", re.compile(r"\(")),
    ("rpar", re.compile(r"\)")),
    ("int", re.compile(r"[0-9]+")),
    ("ident", re.compile(r"[A-Za-z_][A-Za-z0-9_]*")),
]

_CMP = {"eq": "==", "ne": "!=", "lt": "<", "le": "<=", "gt": ">", "ge": ">="}


def _lex_error(line, col, msg):
    return FormulaError(msg, line, col)


def tokenize(text):
    return _lex.tokenize(text, _RULES, _lex_error)


class _Parser:
    def __init__(self, tokens, i=0):
        self.tokens = tokens
        self.i = i

    def peek(self):
        return self.tokens[self.i]

    def take(self, kind=None, what=None):
        t = self.tokens[self.i]
        if kind is not None and t.kind != kind:
            raise self.fail(what or f"expected {kind}")
        self.i += 1
        return t

    def fail(self, msg):
        t = self.tokens[self.i]
        found = "end of input" if t.kind == _lex.EOF else repr(t.text)
        return FormulaError(f"{msg}, found {found}", t.line, t.col)


def parse_raw(text):
    """Parse formula syntax without resolving names (no declarations needed)."""
    p = _Parser(tokenize(text))
    f = _implies(p)
    if p.peek().kind != _lex.EOF:
        raise p.fail("unexpected trailing input")
    return f


def parse_embedded(tokens, i):
    """Parse a formula from a foreign token stream; returns (formula, next index).

    Used by front-ends that embed formula syntax (the token rules must be a
    superset of the formula rules).
    """
    p = _Parser(tokens, i)
    f = _implies(p)
    return f, p.i


def parse_formula(text, observables):
    """Parse and typecheck a formula against ``observables``."""
    return typecheck(parse_raw(text), observables)


def _implies(p):
    left = _or(p)
    if p.peek().kind == "arrow":
        t = p.take()
        right = _implies(p)  # right associative
        return Implies(left, right, pos=(t.line, t.col))
    return left


def _or(p):
    left = _and(p)
    while p.peek().kind == "or":
        t = p.take()
        left = Or(left, _and(p), pos=(t.line, t.col))
    return left


def _and(p):
    left = _not(p)
    while p.peek().kind == "and":
        t = p.take()
        left = And(left, _not(p), pos=(t.line, t.col))
    return left


def _not(p):
    if p.peek().kind == "not":
        t = p.take()
        return Not(_not(p), pos=(t.line, t.col))
    return _atom(p)


def _atom(p):
    t = p.peek()
    if t.kind == "ident" and t.text in ("true", "false"):
        p.take()
        return BoolLit(t.text == "true", pos=(t.line, t.col))
    if t.kind in ("int", "minus", "ident"):
        term = _term(p)
        if p.peek().kind in _CMP:
            return _finish_compare(p, term)
        if isinstance(term, Name):
            return term  # bare boolean atom
        raise p.fail("expected a comparison operator after an arithmetic term")
    if t.kind == "lpar":
        # '(' may open a parenthesised term (followed by a comparison) or a
        # sub-formula; try the term reading first and back off on failure.
        save = p.i
        term = None
        try:
            term = _term(p)
        except FormulaError:
            pass
        if term is not None and p.peek().kind in _CMP:
            return _finish_compare(p, term)
        p.i = save
        p.take("lpar")
        f = _implies(p)
        p.take("rpar", "expected ')'")
        return f
    raise p.fail("expected a formula")


def _finish_compare(p, left):
    op = p.take()
    right = _term(p)
    return Compare(_CMP[op.kind], left, right, pos=(op.line, op.col))


def _term(p):
    left = _term_primary(p)
    while p.peek().kind in ("plus", "minus"):
        t = p.take()
        op = "+" if t.kind == "plus" else "-"
        left = Arith(op, left, _term_primary(p), pos=(t.line, t.col))
    return left


def _term_primary(p):
    t = p.peek()
    if t.kind == "int":
        p.take()
        return IntLit(int(t.text), pos=(t.line, t.col))
    if t.kind == "minus":
        p.take()
        lit = p.take("int", "expected an integer after '-'")
        return IntLit(-int(lit.text), pos=(t.line, t.col))
    if t.kind == "ident":
        if t.text in ("true", "false"):
            raise p.fail(f"{t.text!r} is not an arithmetic term")
        p.take()
        return Name(t.text, pos=(t.line, t.col))
    if t.kind == "lpar":
        p.take()
        inner = _term(p)
        p.take("rpar", "expected ')'")
        return inner
    raise p.fail("expected an integer, an observable or '('")


# ---------------------------------------------------------------------------
# type checking

_INT, _BOOL = "int", "bool"


def typecheck(phi, observables):
    """Validate ``phi`` against the declarations.

    Returns the formula with undeclared identifiers that name enum values
    rewritten to :class:`EnumLit`.  Idempotent on already-checked formulas.
    Raises :class:`FormulaError` on undeclared names and type mismatches.
    """
    return _check_formula(phi, observables)


def _check_formula(phi, obs):
    if isinstance(phi, BoolLit):
        return phi
    if isinstance(phi, Name):
        dom = obs.domain_or_none(phi.name)
        if dom is None:
            if obs.enum_owner(phi.name) is not None:
                raise FormulaError(
                    f"enum value {phi.name!r} cannot stand alone as a boolean atom",
                    *(phi.pos or (None, None)),
                )
            raise FormulaError(f"undeclared observable {phi.name!r}", *(phi.pos or (None, None)))
        if not isinstance(dom, BoolDomain):
            raise FormulaError(
                f"observable {phi.name!r} is not boolean", *(phi.pos or (None, None))
            )
        return phi
    if isinstance(phi, Not):
        return replace(phi, arg=_check_formula(phi.arg, obs))
    if isinstance(phi, (And, Or, Implies)):
        return replace(
            phi, left=_check_formula(phi.left, obs), right=_check_formula(phi.right, obs)
        )
    if isinstance(phi, Compare):
        left, lt = _check_term(phi.left, obs)
        right, rt = _check_term(phi.right, obs)
        if phi.op in ("<", "<=", ">", ">="):
            if lt != _INT or rt != _INT:
                raise FormulaError(
                    f"ordered comparison {phi.op!r} needs integer operands",
                    *(phi.pos or (None, None)),
                )
        else:
            if lt != rt:
                raise FormulaError(
                    f"operands of {phi.op!r} have mismatched types", *(phi.pos or (None, None))
                )
        return replace(phi, left=left, right=right)
    raise FormulaError(f"not a formula node: {phi!r}")


def _check_term(t, obs):
    """Returns (resolved term, type) with type in 'int', 'bool' or ('enum', name)."""
    if isinstance(t, IntLit):
        return t, _INT
    if isinstance(t, Arith):
        left, lt = _check_term(t.left, obs)
        right, rt = _check_term(t.right, obs)
        if lt != _INT or rt != _INT:
            raise FormulaError("arithmetic on a non-integer operand", *(t.pos or (None, None)))
        return replace(t, left=left, right=right), _INT
    if isinstance(t, EnumLit):
        owner = obs.enum_owner(t.value)
        if owner is None:
            raise FormulaError(f"unknown enum value {t.value!r}", *(t.pos or (None, None)))
        return t, ("enum", owner)
    if isinstance(t, Name):
        dom = obs.domain_or_none(t.name)
        if dom is None:
            owner = obs.enum_owner(t.name)
            if owner is not None:
                return EnumLit(t.name, pos=t.pos), ("enum", owner)
            raise FormulaError(f"undeclared observable {t.name!r}", *(t.pos or (None, None)))
        if isinstance(dom, IntRange):
            return t, _INT
        if isinstance(dom, BoolDomain):
            return t, _BOOL
        return t, ("enum", t.name)
    raise FormulaError(f"not a term node: {t!r}")


# ---------------------------------------------------------------------------
# evaluation

def evaluate(phi, valuation):
    """Truth value of ``phi`` under ``valuation`` (a name -> value mapping).

    The formula must have been typechecked against the declarations the
    valuation comes from; enum literals then evaluate to themselves.
    """
    if isinstance(phi, BoolLit):
        return phi.value
    if isinstance(phi, Name):
        v = _lookup(phi, valuation, phi.name)
        if type(v) is not bool:
            raise FormulaError(f"observable {phi.name!r} is not boolean here")
        return v
    if isinstance(phi, Not):
        return not evaluate(phi.arg, valuation)
    if isinstance(phi, And):
        return evaluate(phi.left, valuation) and evaluate(phi.right, valuation)
    if isinstance(phi, Or):
        return evaluate(phi.left, valuation) or evaluate(phi.right, valuation)
    if isinstance(phi, Implies):
        return (not evaluate(phi.left, valuation)) or evaluate(phi.right, valuation)
    if isinstance(phi, Compare):
        lv = _eval_term(phi.left, valuation)
        rv = _eval_term(phi.right, valuation)
        op = phi.op
        if op in ("<", "<=", ">", ">="):
            if type(lv) is not int or type(rv) is not int:
                raise FormulaError(f"ordered comparison {op!r} on non-integer values")
            if op == "<":
                return lv < rv
            if op == "<=":
                return lv <= rv
            if op == ">":
                return lv > rv
            return lv >= rv
        if op == "==":
            return lv == rv
        return lv != rv
    raise FormulaError(f"not a formula node: {phi!r}")


def _eval_term(t, valuation):
    if isinstance(t, IntLit):
        return t.value
    if isinstance(t, EnumLit):
        return t.value
    if isinstance(t, Name):
        return _lookup(t, valuation, t.name)
    if isinstance(t, Arith):
        lv = _eval_term(t.left, valuation)
        rv = _eval_term(t.right, valuation)
        if type(lv) is not int or type(rv) is not int:
            raise FormulaError("arithmetic on non-integer values")
        return lv + rv if t.op == "+" else lv - rv
    raise FormulaError(f"not a term node: {t!r}")


def _lookup(node, valuation, name):
    try:
        return valuation[name]
    except KeyError:
        raise FormulaError(f"observable {name!r} is unbound in this valuation") from None


def free_vars(phi):
    """Names of all observables referenced by ``phi``."""
    out = set()
    _collect_vars(phi, out)
    return frozenset(out)


def _collect_vars(node, out):
    if isinstance(node, Name):
        out.add(node.name)
    elif isinstance(node, (Not,)):
        _collect_vars(node.arg, out)
    elif isinstance(node, (And, Or, Implies, Compare, Arith)):
        _collect_vars(node.left, out)
        _collect_vars(node.right, out)
    # literals carry no variables


def sat_set(phi, states, observation):
    """States whose observation satisfies ``phi``.

    ``observation`` maps each state to its valuation.
    """
    return {q for q in states if evaluate(phi, observation[q])}


# ---------------------------------------------------------------------------
# printing

_LVL_IMPLIES, _LVL_OR, _LVL_AND, _LVL_NOT, _LVL_ATOM = 1, 2, 3, 4, 5


def _level(phi):
    if isinstance(phi, Implies):
        return _LVL_IMPLIES
    if isinstance(phi, Or):
        return _LVL_OR
    if isinstance(phi, And):
        return _LVL_AND
    if isinstance(phi, Not):
        return _LVL_NOT
    return _LVL_ATOM


def unparse(phi):
    """Render ``phi`` as parseable text; parsing it back gives an equal AST."""
    if isinstance(phi, BoolLit):
        return "true" if phi.value else "false"
    if isinstance(phi, Name):
        return phi.name
    if isinstance(phi, Compare):
        return f"{_unparse_term(phi.left)} {phi.op} {_unparse_term(phi.right)}"
    if isinstance(phi, Not):
        inner = unparse(phi.arg)
        if _level(phi.arg) < _LVL_NOT:
            inner = f"({inner})"
        return "!" + inner
    if isinstance(phi, And):
        return _binary(phi, "&&", _LVL_AND, right_assoc=False)
    if isinstance(phi, Or):
        return _binary(phi, "||", _LVL_OR, right_assoc=False)
    if isinstance(phi, Implies):
        return _binary(phi, "->", _LVL_IMPLIES, right_assoc=True)
    raise FormulaError(f"not a formula node: {phi!r}")


def _binary(phi, op, level, right_assoc):
    left = unparse(phi.left)
    right = unparse(phi.right)
    ll, rl = _level(phi.left), _level(phi.right)
    if ll < level or (right_assoc and ll == level):
        left = f"({left})"
    if rl < level or (not right_assoc and rl == level):
        right = f"({right})"
    return f"{left} {op} {right}"


def _unparse_term(t):
    if isinstance(t, IntLit):
        return str(t.value)
    if isinstance(t, Name):
        return t.name
    if isinstance(t, EnumLit):
        return t.value
    if isinstance(t, Arith):
        left = _unparse_term(t.left)
        right = _unparse_term(t.right)
        if isinstance(t.right, Arith):
            right = f"({right})"  # keep right-nested arithmetic re-parseable
        return f"{left} {t.op} {right}"
    raise FormulaError(f"not a term node: {t!r}")


def _node_str(self):
    return unparse(self)


def _term_str(self):
    return _unparse_term(self)


for _cls in (BoolLit, Name, Compare, Not, And, Or, Implies):
    _cls.__str__ = _node_str
for _cls in (IntLit, EnumLit, Arith):
    _cls.__str__ = _term_str
del _cls
