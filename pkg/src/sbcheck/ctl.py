"""CTL over the flat semantics.

Atoms: ``adapting`` (the state has an outgoing adaptation transition),
``steady`` (no pending adaptation and no outgoing adaptation transition),
``in(r)`` (the active structure state is r) and ``@(phi)`` (the current
behaviour state's observation satisfies the constraint formula phi).
Stuck states satisfy neither ``adapting`` nor ``steady``.

Operators: ``! && || ->``, ``AX EX AF EF AG EG``, ``A[f U g]``, ``E[f U g]``.
Unary operators bind like ``!``; ``->`` is right associative and weakest.

Path quantification is over the totalized graph: states without successors
get a self-loop for evaluation only.

Adaptability characterisations checked at the initial state:

* weak:   ``EG (adapting -> EF steady)``
* strong: ``AG (adapting -> AF steady)``
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field

from . import _lex
from . import formula as F
from .errors import CtlError, FormulaError
from .flat import ADAPTING, STEADY, AdaptLabel


def _pos():
    return field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class CtlBool:
    value: bool
    pos: tuple | None = _pos()


@dataclass(frozen=True)
class Atom:
    name: str  # 'adapting' or 'steady'
    pos: tuple | None = _pos()


@dataclass(frozen=True)
class InState:
    r: str
    pos: tuple | None = _pos()


@dataclass(frozen=True)
class ObsHolds:
    """@(phi): the observation of the current behaviour state satisfies phi."""

    phi: object
    pos: tuple | None = _pos()


@dataclass(frozen=True)
class CtlNot:
    arg: object
    pos: tuple | None = _pos()


@dataclass(frozen=True)
class CtlAnd:
    left: object
    right: object
    pos: tuple | None = _pos()


@dataclass(frozen=True)
class CtlOr:
    left: object
    right: object
    pos: tuple | None = _pos()


@dataclass(frozen=True)
class CtlImplies:
    left: object
    right: object
    pos: tuple | None = _pos()


@dataclass(frozen=True)
class Modal:
    op: str  # AX EX AF EF AG EG
    arg: object
    pos: tuple | None = _pos()


@dataclass(frozen=True)
class Until:
    quant: str  # 'A' or 'E'
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
    ("lbracket", re.compile(r"\[")),
    ("rbracket", re.compile(r"\]")),
    ("at", re.compile(r"@")),
    ("int", re.compile(r"[0-9]+")),
    ("ident", re.compile(r"[A-Za-z_][A-Za-z0-9_]*")),
]

_MODALS = ("AX", "EX", "AF", "EF", "AG", "EG")


def _lex_error(line, col, msg):
    return CtlError(msg, line, col)


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.i = 0

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
        return CtlError(f"{msg}, found {found}", t.line, t.col)


def parse_ctl(text):
    p = _Parser(_lex.tokenize(text, _RULES, _lex_error))
    f = _implies(p)
    if p.peek().kind != _lex.EOF:
        raise p.fail("unexpected trailing input")
    return f


def _implies(p):
    left = _or(p)
    if p.peek().kind == "arrow":
        t = p.take()
        return CtlImplies(left, _implies(p), pos=(t.line, t.col))
    return left


def _or(p):
    left = _and(p)
    while p.peek().kind == "or":
        t = p.take()
        left = CtlOr(left, _and(p), pos=(t.line, t.col))
    return left


def _and(p):
    left = _unary(p)
    while p.peek().kind == "and":
        t = p.take()
        left = CtlAnd(left, _unary(p), pos=(t.line, t.col))
    return left


def _unary(p):
    t = p.peek()
    if t.kind == "not":
        p.take()
        return CtlNot(_unary(p), pos=(t.line, t.col))
    if t.kind == "ident" and t.text in _MODALS:
        p.take()
        return Modal(t.text, _unary(p), pos=(t.line, t.col))
    return _primary(p)


def _primary(p):
    t = p.peek()
    if t.kind == "ident":
        if t.text == "true" or t.text == "false":
            p.take()
            return CtlBool(t.text == "true", pos=(t.line, t.col))
        if t.text in ("adapting", "steady"):
            p.take()
            return Atom(t.text, pos=(t.line, t.col))
        if t.text == "in":
            p.take()
            p.take("lpar", "expected '(' after in")
            name = p.take("ident", "expected a structure state name")
            p.take("rpar", "expected ')'")
            return InState(name.text, pos=(t.line, t.col))
        if t.text in ("A", "E"):
            p.take()
            p.take("lbracket", f"expected '[' after {t.text}")
            left = _implies(p)
            u = p.take("ident", "expected 'U'")
            if u.text != "U":
                raise CtlError(f"expected 'U', found {u.text!r}", u.line, u.col)
            right = _implies(p)
            p.take("rbracket", "expected ']'")
            return Until(t.text, left, right, pos=(t.line, t.col))
        raise p.fail("unknown atom")
    if t.kind == "at":
        p.take()
        p.take("lpar", "expected '(' after @")
        try:
            phi, nxt = F.parse_embedded(p.tokens, p.i)
        except FormulaError as e:
            raise CtlError(f"in @(...): {e.message}", e.line, e.col) from None
        p.i = nxt
        p.take("rpar", "expected ')' closing @(...)")
        return ObsHolds(phi, pos=(t.line, t.col))
    if t.kind == "lpar":
        p.take()
        f = _implies(p)
        p.take("rpar", "expected ')'")
        return f
    raise p.fail("expected a CTL formula")


# ---------------------------------------------------------------------------
# printing

_LVL_IMPLIES, _LVL_OR, _LVL_AND, _LVL_UNARY, _LVL_ATOM = 1, 2, 3, 4, 5


def _level(f):
    if isinstance(f, CtlImplies):
        return _LVL_IMPLIES
    if isinstance(f, CtlOr):
        return _LVL_OR
    if isinstance(f, CtlAnd):
        return _LVL_AND
    if isinstance(f, (CtlNot, Modal)):
        return _LVL_UNARY
    return _LVL_ATOM


def unparse_ctl(f):
    """Render back to parseable text; parsing gives an equal AST."""
    if isinstance(f, CtlBool):
        return "true" if f.value else "false"
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, InState):
        return f"in({f.r})"
    if isinstance(f, ObsHolds):
        return f"@({F.unparse(f.phi)})"
    if isinstance(f, CtlNot):
        inner = unparse_ctl(f.arg)
        return "!" + (inner if _level(f.arg) >= _LVL_UNARY else f"({inner})")
    if isinstance(f, Modal):
        inner = unparse_ctl(f.arg)
        if _level(f.arg) >= _LVL_UNARY:
            return f"{f.op} {inner}"
        return f"{f.op}({inner})"
    if isinstance(f, CtlAnd):
        return _binary(f, "&&", _LVL_AND, right_assoc=False)
    if isinstance(f, CtlOr):
        return _binary(f, "||", _LVL_OR, right_assoc=False)
    if isinstance(f, CtlImplies):
        return _binary(f, "->", _LVL_IMPLIES, right_assoc=True)
    if isinstance(f, Until):
        return f"{f.quant}[{unparse_ctl(f.left)} U {unparse_ctl(f.right)}]"
    raise CtlError(f"not a CTL node: {f!r}")


def _binary(f, op, level, right_assoc):
    left = unparse_ctl(f.left)
    right = unparse_ctl(f.right)
    ll, rl = _level(f.left), _level(f.right)
    if ll < level or (right_assoc and ll == level):
        left = f"({left})"
    if rl < level or (not right_assoc and rl == level):
        right = f"({right})"
    return f"{left} {op} {right}"


def _node_str(self):
    return unparse_ctl(self)


for _cls in (CtlBool, Atom, InState, ObsHolds, CtlNot, CtlAnd, CtlOr, CtlImplies, Modal, Until):
    _cls.__str__ = _node_str
del _cls


# ---------------------------------------------------------------------------
# checking

@dataclass(frozen=True)
class CheckResult:
    satisfying: frozenset  # state ids
    holds_at_init: bool
    witness: tuple | None  # a finite state-id path when one is informative


class _Graph:
    """Totalized successor/predecessor view of a FlatLTS."""

    def __init__(self, flat):
        self.flat = flat
        self.n = len(flat.states)
        self.succ = [flat.successor_ids(i) or (i,) for i in range(self.n)]
        pred = [[] for _ in range(self.n)]
        for i, targets in enumerate(self.succ):
            for j in targets:
                pred[j].append(i)
        self.pred = [tuple(v) for v in pred]
        self.full = frozenset(range(self.n))


def _atom_set(flat, name):
    if name == "adapting":
        return frozenset(i for i in range(len(flat.states)) if flat.classes[i] == ADAPTING)
    return frozenset(i for i in range(len(flat.states)) if flat.classes[i] == STEADY)


def _obs_set(flat, phi):
    if flat.system is None:
        raise CtlError("@(...) atoms need the source model; this flat system has none attached")
    try:
        checked = F.typecheck(phi, flat.system.observables)
    except FormulaError as e:
        raise CtlError(f"in @(...): {e.message}", e.line, e.col) from None
    region = flat.system.region(checked)
    return frozenset(i for i, s in enumerate(flat.states) if s.q in region)


def _in_set(flat, r, pos):
    if flat.system is not None:
        known = flat.system.structure.states
    else:
        known = sorted({s.r for s in flat.states})
    if r not in known:
        raise CtlError(f"unknown structure state {r!r} in in(...)", *(pos or (None, None)))
    return frozenset(i for i, s in enumerate(flat.states) if s.r == r)


def _pre_exists(g, S):
    out = set()
    for j in S:
        out.update(g.pred[j])
    return frozenset(out)


def _eu(g, A, B):
    """Least fixpoint for E[A U B] via backward reachability."""
    result = set(B)
    work = deque(B)
    while work:
        j = work.popleft()
        for i in g.pred[j]:
            if i not in result and i in A:
                result.add(i)
                work.append(i)
    return frozenset(result)


def _eg(g, S):
    """Greatest fixpoint for EG S: repeatedly drop states with no successor in the set."""
    current = set(S)
    changed = True
    while changed:
        changed = False
        for i in list(current):
            if not any(j in current for j in g.succ[i]):
                current.discard(i)
                changed = True
    return frozenset(current)


def _sat(g, f):
    flat = g.flat
    if isinstance(f, CtlBool):
        return g.full if f.value else frozenset()
    if isinstance(f, Atom):
        return _atom_set(flat, f.name)
    if isinstance(f, InState):
        return _in_set(flat, f.r, f.pos)
    if isinstance(f, ObsHolds):
        return _obs_set(flat, f.phi)
    if isinstance(f, CtlNot):
        return g.full - _sat(g, f.arg)
    if isinstance(f, CtlAnd):
        return _sat(g, f.left) & _sat(g, f.right)
    if isinstance(f, CtlOr):
        return _sat(g, f.left) | _sat(g, f.right)
    if isinstance(f, CtlImplies):
        return (g.full - _sat(g, f.left)) | _sat(g, f.right)
    if isinstance(f, Modal):
        S = _sat(g, f.arg)
        if f.op == "EX":
            return _pre_exists(g, S)
        if f.op == "AX":
            return g.full - _pre_exists(g, g.full - S)
        if f.op == "EF":
            return _eu(g, g.full, S)
        if f.op == "AG":
            return g.full - _eu(g, g.full, g.full - S)
        if f.op == "EG":
            return _eg(g, S)
        # AF via the EG duality
        return g.full - _eg(g, g.full - S)
    if isinstance(f, Until):
        A, B = _sat(g, f.left), _sat(g, f.right)
        if f.quant == "E":
            return _eu(g, A, B)
        # A[A U B] = !(E[!B U (!A && !B)] || EG !B)
        nA, nB = g.full - A, g.full - B
        return g.full - (_eu(g, nB, nA & nB) | _eg(g, nB))
    raise CtlError(f"not a CTL node: {f!r}")


def _shortest_path(flat, start, targets):
    """BFS over the real transitions; returns a state-id path or None."""
    if start in targets:
        return (start,)
    parent = {start: None}
    work = deque([start])
    while work:
        i = work.popleft()
        for j in flat.successor_ids(i):
            if j not in parent:
                parent[j] = i
                if j in targets:
                    path = [j]
                    k = i
                    while k is not None:
                        path.append(k)
                        k = parent[k]
                    path.reverse()
                    return tuple(path)
                work.append(j)
    return None


def check_ctl(flat, f):
    """Label the totalized flat system bottom-up and report the result.

    A witness path is attached for a satisfied ``EF phi`` (shortest run to
    a phi-state) and a counterexample path for a failed ``AG phi``
    (shortest run to a violating state).
    """
    g = _Graph(flat)
    sat = _sat(g, f)
    holds = flat.init_index in sat
    witness = None
    if isinstance(f, Modal) and f.op == "AG" and not holds:
        bad = g.full - _sat(g, f.arg)
        witness = _shortest_path(flat, flat.init_index, bad)
    elif isinstance(f, Modal) and f.op == "EF" and holds:
        witness = _shortest_path(flat, flat.init_index, _sat(g, f.arg))
    return CheckResult(satisfying=sat, holds_at_init=holds, witness=witness)


def weak_formula():
    """EG (adapting -> EF steady)"""
    return Modal("EG", CtlImplies(Atom("adapting"), Modal("EF", Atom("steady"))))


def strong_formula():
    """AG (adapting -> AF steady)"""
    return Modal("AG", CtlImplies(Atom("adapting"), Modal("AF", Atom("steady"))))


def weak_adaptable_ctl(flat):
    return check_ctl(flat, weak_formula()).holds_at_init


def strong_adaptable_ctl(flat):
    return check_ctl(flat, strong_formula()).holds_at_init


def strong_counterexample(flat):
    """For a failed strong check: a run to an adapting state that can avoid
    steady states forever, extended until the avoiding loop closes.

    Returns a state-id path whose last entry repeats an earlier one, or
    None when the strong property holds.
    """
    g = _Graph(flat)
    never_steady = _eg(g, g.full - _sat(g, Atom("steady")))
    bad = _sat(g, Atom("adapting")) & never_steady
    reachable_bad = _shortest_path(flat, flat.init_index, bad)
    if reachable_bad is None:
        return None
    path = list(reachable_bad)
    cur = path[-1]
    seen_at = {cur: len(path) - 1}
    while True:
        nxt = None
        for j in g.succ[cur]:
            if j in never_steady:
                nxt = j
                break
        path.append(nxt)
        if nxt in seen_at:
            return tuple(path)
        seen_at[nxt] = len(path) - 1
        cur = nxt


def ctl_oracle(flat, f):
    """Naive reference evaluator: every operator from its own fixpoint.

    Shares no traversal code with :func:`check_ctl` (no dualities, no
    predecessor index); used for differential testing.
    """
    n = len(flat.states)
    succ = [list(flat.successor_ids(i)) or [i] for i in range(n)]
    full = frozenset(range(n))
    adapt_src = set()
    for t in flat.transitions:
        if isinstance(t.label, AdaptLabel):
            adapt_src.add(flat.index_of(t.source))

    def pre_e(S):
        return frozenset(i for i in range(n) if any(j in S for j in succ[i]))

    def pre_a(S):
        return frozenset(i for i in range(n) if all(j in S for j in succ[i]))

    def lfp(step):
        Z = frozenset()
        while True:
            nz = step(Z)
            if nz == Z:
                return Z
            Z = nz

    def gfp(step):
        Z = full
        while True:
            nz = step(Z)
            if nz == Z:
                return Z
            Z = nz

    def rec(node):
        if isinstance(node, CtlBool):
            return full if node.value else frozenset()
        if isinstance(node, Atom):
            if node.name == "adapting":
                return frozenset(adapt_src)
            return frozenset(
                i for i in range(n)
                if flat.states[i].pending is None and i not in adapt_src
            )
        if isinstance(node, InState):
            if flat.system is not None and node.r not in flat.system.structure.states:
                raise CtlError(f"unknown structure state {node.r!r} in in(...)")
            return frozenset(i for i in range(n) if flat.states[i].r == node.r)
        if isinstance(node, ObsHolds):
            if flat.system is None:
                raise CtlError("@(...) atoms need the source model")
            checked = F.typecheck(node.phi, flat.system.observables)
            return frozenset(
                i for i in range(n)
                if F.evaluate(checked, flat.system.observe(flat.states[i].q))
            )
        if isinstance(node, CtlNot):
            return full - rec(node.arg)
        if isinstance(node, CtlAnd):
            return rec(node.left) & rec(node.right)
        if isinstance(node, CtlOr):
            return rec(node.left) | rec(node.right)
        if isinstance(node, CtlImplies):
            return (full - rec(node.left)) | rec(node.right)
        if isinstance(node, Modal):
            S = rec(node.arg)
            if node.op == "EX":
                return pre_e(S)
            if node.op == "AX":
                return pre_a(S)
            if node.op == "EF":
                return lfp(lambda Z: S | pre_e(Z))
            if node.op == "AF":
                return lfp(lambda Z: S | pre_a(Z))
            if node.op == "EG":
                return gfp(lambda Z: S & pre_e(Z))
            return gfp(lambda Z: S & pre_a(Z))  # AG
        if isinstance(node, Until):
            A, B = rec(node.left), rec(node.right)
            if node.quant == "E":
                return lfp(lambda Z: B | (A & pre_e(Z)))
            return lfp(lambda Z: B | (A & pre_a(Z)))
        raise CtlError(f"not a CTL node: {node!r}")

    return rec(f)
