"""Reading and writing the ``.sbs`` model format.

Layout (``//`` comments and whitespace are free-form)::

    system "name"

    observables {
      p: int[0..1];
      eat: bool;
      mode: enum {hunting, resting};
    }

    behaviour {
      state q0 {p = 0, eat = true, mode = hunting} init;
      state q1 {p = 1, eat = false, mode = resting};
      q0 -> q1;
    }

    structure {
      state r0: "p == 0 && eat" init;
      state r1: "p == 1";
      r0 -["!eat"]-> r1;
    }

State declarations come before transitions inside each block.  Quoted
strings hold constraint formula syntax.  ``save`` emits a canonical form:
observables in declaration order, states sorted by id, transitions sorted,
formulas reprinted with canonical spacing; ``save(load(text))`` is a fixed
point and ``load(save(sys))`` equals ``sys``.
"""

from __future__ import annotations

import pathlib
import re

from . import _lex
from . import formula as F
from .errors import FormulaError, ModelError, ModelFileError
from .model import BehaviourMachine, ObservationMap, SBSystem, StructureMachine

_RULES = [
    ("string", re.compile(r'"(?:[^"\\\n]|\\.)*"')),
    ("dotdot", re.compile(r"\.\.")),
    ("arrowl", re.compile(r"-\[")),
    ("arrowr", re.compile(r"\]->")),
    ("arrow", re.compile(r"->")),
    ("lbrace", re.compile(r"\{")),
    ("rbrace", re.compile(r"\}")),
    ("lbracket", re.compile(r"\[")),
    ("rbracket", re.compile(r"\]")),
    ("colon", re.compile(r":")),
    ("semi", re.compile(r";")),
    ("comma", re.compile(r",")),
    ("assign", re.compile(r"=")),
    ("minus", re.compile(r"-")),
    ("int", re.compile(r"[0-9]+")),
    ("ident", re.compile(r"[A-Za-z_][A-Za-z0-9_]*")),
]


def _lex_error(line, col, msg):
    return ModelFileError(msg, line, col)


def _unquote(text):
    body = text[1:-1]
    return body.replace('\\"', '"').replace("\\\\", "\\")


class _P:
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

    def keyword(self, word):
        t = self.tokens[self.i]
        if t.kind != "ident" or t.text != word:
            raise self.fail(f"expected {word!r}")
        self.i += 1
        return t

    def at_keyword(self, word):
        t = self.tokens[self.i]
        return t.kind == "ident" and t.text == word

    def fail(self, msg):
        t = self.tokens[self.i]
        found = "end of input" if t.kind == _lex.EOF else repr(t.text)
        return ModelFileError(f"{msg}, found {found}", t.line, t.col)


def _string_formula(tok, observables, what):
    """Parse and typecheck a quoted formula; positions map back to the file."""
    try:
        return F.typecheck(F.parse_raw(_unquote(tok.text)), observables)
    except FormulaError as e:
        col = tok.col + e.col if e.col is not None else tok.col
        raise ModelFileError(f"in {what}: {e.message}", tok.line, col) from None


def _int_value(p):
    neg = False
    if p.peek().kind == "minus":
        p.take()
        neg = True
    t = p.take("int", "expected an integer")
    v = int(t.text)
    return -v if neg else v


def _parse_domain(p):
    t = p.peek()
    if p.at_keyword("bool"):
        p.take()
        return F.BoolDomain()
    if p.at_keyword("int"):
        p.take()
        p.take("lbracket", "expected '[' after int")
        lo = _int_value(p)
        p.take("dotdot", "expected '..' between the range bounds")
        hi = _int_value(p)
        p.take("rbracket", "expected ']' closing the range")
        try:
            return F.IntRange(lo, hi)
        except ModelError as e:
            raise ModelFileError(str(e), t.line, t.col) from None
    if p.at_keyword("enum"):
        p.take()
        p.take("lbrace", "expected '{' opening the enum values")
        values = [p.take("ident", "expected an enum value name").text]
        while p.peek().kind == "comma":
            p.take()
            values.append(p.take("ident", "expected an enum value name").text)
        p.take("rbrace", "expected '}' closing the enum values")
        try:
            return F.EnumDomain(tuple(values))
        except ModelError as e:
            raise ModelFileError(str(e), t.line, t.col) from None
    raise p.fail("expected a domain: bool, int[lo..hi] or enum {...}")


def _parse_observables(p):
    p.keyword("observables")
    p.take("lbrace", "expected '{' opening the observables block")
    decls = []
    namespace = {}
    while p.peek().kind == "ident":
        name_tok = p.take("ident")
        if name_tok.text in namespace:
            raise ModelFileError(
                f"duplicate name {name_tok.text!r} in observable declarations",
                name_tok.line,
                name_tok.col,
            )
        p.take("colon", "expected ':' after the observable name")
        dom = _parse_domain(p)
        if isinstance(dom, F.EnumDomain):
            for v in dom.values:
                if v in namespace or v == name_tok.text:
                    raise ModelFileError(
                        f"duplicate name {v!r} in observable declarations",
                        name_tok.line,
                        name_tok.col,
                    )
                namespace[v] = name_tok
        p.take("semi", "expected ';' after the declaration")
        namespace[name_tok.text] = name_tok
        decls.append(F.ObservableDecl(name_tok.text, dom))
    p.take("rbrace", "expected '}' closing the observables block")
    return F.Observables(decls)


def _lit_text(v):
    if type(v) is bool:
        return "true" if v else "false"
    if type(v) is int:
        return str(v)
    return v


def _parse_value(p, observables, name):
    t = p.peek()
    if t.kind in ("minus", "int"):
        v = _int_value(p)
    elif t.kind == "ident" and t.text in ("true", "false"):
        p.take()
        v = t.text == "true"
    elif t.kind == "ident":
        p.take()
        v = t.text
    else:
        raise p.fail("expected a value")
    dom = observables.domain(name)
    if not F.domain_contains(dom, v):
        raise ModelFileError(
            f"value {_lit_text(v)} of {name!r} outside domain {F.domain_text(dom)}",
            t.line,
            t.col,
        )
    return v


def _at_state_decl(p):
    return p.at_keyword("state") and p.tokens[p.i + 1].kind == "ident"


def _parse_behaviour(p, observables):
    head = p.keyword("behaviour")
    p.take("lbrace", "expected '{' opening the behaviour block")
    table = {}
    init = None
    while _at_state_decl(p):
        p.take()
        id_tok = p.take("ident")
        if id_tok.text in table:
            raise ModelFileError(
                f"duplicate behaviour state {id_tok.text!r}", id_tok.line, id_tok.col
            )
        p.take("lbrace", "expected '{' opening the valuation")
        val = {}
        if p.peek().kind != "rbrace":
            while True:
                n_tok = p.take("ident", "expected an observable name")
                if observables.domain_or_none(n_tok.text) is None:
                    raise ModelFileError(
                        f"undeclared observable {n_tok.text!r}", n_tok.line, n_tok.col
                    )
                if n_tok.text in val:
                    raise ModelFileError(
                        f"observable {n_tok.text!r} assigned twice", n_tok.line, n_tok.col
                    )
                p.take("assign", "expected '=' after the observable name")
                val[n_tok.text] = _parse_value(p, observables, n_tok.text)
                if p.peek().kind == "comma":
                    p.take()
                    continue
                break
        p.take("rbrace", "expected '}' closing the valuation")
        missing = [n for n in observables.names() if n not in val]
        if missing:
            raise ModelFileError(
                f"state {id_tok.text!r} leaves {missing[0]!r} unassigned",
                id_tok.line,
                id_tok.col,
            )
        if p.at_keyword("init"):
            p.take()
            if init is not None:
                raise ModelFileError(
                    "behaviour declares a second initial state", id_tok.line, id_tok.col
                )
            init = id_tok.text
        p.take("semi", "expected ';' after the state declaration")
        table[id_tok.text] = val
    transitions = set()
    while p.peek().kind == "ident":
        src = p.take("ident")
        if src.text not in table:
            raise ModelFileError(
                f"transition uses undeclared behaviour state {src.text!r}",
                src.line,
                src.col,
            )
        p.take("arrow", "expected '->'")
        dst = p.take("ident", "expected the target state")
        if dst.text not in table:
            raise ModelFileError(
                f"transition uses undeclared behaviour state {dst.text!r}",
                dst.line,
                dst.col,
            )
        p.take("semi", "expected ';' after the transition")
        transitions.add((src.text, dst.text))
    p.take("rbrace", "expected '}' closing the behaviour block")
    if not table:
        raise ModelFileError("behaviour declares no states", head.line, head.col)
    if init is None:
        raise ModelFileError("behaviour declares no initial state", head.line, head.col)
    machine = BehaviourMachine(tuple(table), init, frozenset(transitions))
    return machine, ObservationMap(table)


def _parse_structure(p, observables):
    head = p.keyword("structure")
    p.take("lbrace", "expected '{' opening the structure block")
    labels = {}
    init = None
    while _at_state_decl(p):
        p.take()
        id_tok = p.take("ident")
        if id_tok.text in labels:
            raise ModelFileError(
                f"duplicate structure state {id_tok.text!r}", id_tok.line, id_tok.col
            )
        p.take("colon", "expected ':' before the constraint string")
        s_tok = p.take("string", "expected the constraint as a quoted string")
        labels[id_tok.text] = _string_formula(
            s_tok, observables, f"constraint of {id_tok.text}"
        )
        if p.at_keyword("init"):
            p.take()
            if init is not None:
                raise ModelFileError(
                    "structure declares a second initial state", id_tok.line, id_tok.col
                )
            init = id_tok.text
        p.take("semi", "expected ';' after the state declaration")
    transitions = set()
    while p.peek().kind == "ident":
        src = p.take("ident")
        if src.text not in labels:
            raise ModelFileError(
                f"transition uses undeclared structure state {src.text!r}",
                src.line,
                src.col,
            )
        p.take("arrowl", "expected '-[' opening the invariant")
        s_tok = p.take("string", "expected the invariant as a quoted string")
        inv = _string_formula(s_tok, observables, f"invariant on {src.text}")
        p.take("arrowr", "expected ']->' after the invariant")
        dst = p.take("ident", "expected the target state")
        if dst.text not in labels:
            raise ModelFileError(
                f"transition uses undeclared structure state {dst.text!r}",
                dst.line,
                dst.col,
            )
        p.take("semi", "expected ';' after the transition")
        transitions.add((src.text, inv, dst.text))
    p.take("rbrace", "expected '}' closing the structure block")
    if not labels:
        raise ModelFileError("structure declares no states", head.line, head.col)
    if init is None:
        raise ModelFileError("structure declares no initial state", head.line, head.col)
    return StructureMachine(tuple(labels), init, labels, frozenset(transitions))


def loads(text):
    """Parse model text into an :class:`SBSystem`.

    Raises :class:`ModelFileError` with a line:col position on any syntax
    or semantic problem in the text.
    """
    p = _P(_lex.tokenize(text, _RULES, _lex_error))
    p.keyword("system")
    name_tok = p.take("string", "expected the system name as a quoted string")
    observables = _parse_observables(p)
    behaviour, observation = _parse_behaviour(p, observables)
    structure = _parse_structure(p, observables)
    if p.peek().kind != _lex.EOF:
        raise p.fail("unexpected trailing input")
    try:
        return SBSystem(
            name=_unquote(name_tok.text),
            observables=observables,
            behaviour=behaviour,
            structure=structure,
            observation=observation,
        )
    except ModelError as e:
        raise ModelFileError(str(e)) from None


def load(path):
    """Read and parse a model file."""
    try:
        text = pathlib.Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ModelFileError(f"cannot read {path}: {e.strerror or e}") from None
    return loads(text)


def _quote(text):
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def save(sys):
    """Render a system in the canonical text form."""
    out = [f"system {_quote(sys.name)}", ""]
    out.append("observables {")
    for d in sys.observables.decls:
        out.append(f"  {d.name}: {F.domain_text(d.domain)};")
    out.append("}")
    out.append("")
    out.append("behaviour {")
    for q in sys.behaviour.states:
        v = sys.observation.table[q]
        body = ", ".join(f"{n} = {_lit_text(v[n])}" for n in sys.observables.names())
        suffix = " init" if q == sys.behaviour.init else ""
        out.append(f"  state {q} {{{body}}}{suffix};")
    for src, dst in sorted(sys.behaviour.transitions):
        out.append(f"  {src} -> {dst};")
    out.append("}")
    out.append("")
    out.append("structure {")
    for r in sys.structure.states:
        suffix = " init" if r == sys.structure.init else ""
        out.append(f"  state {r}: {_quote(F.unparse(sys.structure.label(r)))}{suffix};")
    for src, inv, dst in sorted(
        sys.structure.transitions, key=lambda t: (t[0], F.unparse(t[1]), t[2])
    ):
        out.append(f"  {src} -[{_quote(F.unparse(inv))}]-> {dst};")
    out.append("}")
    return "\n".join(out) + "\n"


def bundled_model_path(name):
    """Filesystem path of a model shipped with the package (.sbs implied)."""
    base = pathlib.Path(__file__).resolve().parent / "models"
    path = base / f"{name}.sbs"
    if not path.is_file():
        known = ", ".join(sorted(q.stem for q in base.glob("*.sbs")))
        raise ModelError(f"no bundled model {name!r} (have: {known})")
    return path


def bundled_model(name):
    """Parsed bundled model."""
    return load(bundled_model_path(name))
