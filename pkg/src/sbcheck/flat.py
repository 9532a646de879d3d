"""Flat semantics: one transition system combining behaviour and structure.

A flat state is (q, r, pending) where pending is empty or a single
(invariant, target) pair recording an adaptation in progress.  Exactly one
rule family applies to any state:

* steady moves follow behaviour transitions whose endpoint satisfies the
  active constraint;
* when no behaviour successor satisfies the active constraint, adaptation
  starts along each enabled guarded structure transition;
* during adaptation the behaviour may only move through states satisfying
  the pending invariant;
* adaptation ends exactly when the current behaviour state satisfies the
  target constraint, by switching the active structure state.

States where adaptation can neither continue nor end are kept and
classified stuck.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass

from . import formula as F
from .errors import ModelError
from .model import require_well_formed

STEADY = "steady"
ADAPTING = "adapting"
STUCK = "stuck"


@dataclass(frozen=True)
class FlatState:
    q: str
    r: str
    pending: tuple | None  # None, or (invariant Formula, target structure state)

    def __str__(self):
        if self.pending is None:
            return f"({self.q},{self.r})"
        inv, target = self.pending
        return f"({self.q},{self.r},[{F.unparse(inv)} => {target}])"


@dataclass(frozen=True)
class SteadyLabel:
    r: str


@dataclass(frozen=True)
class AdaptLabel:
    r: str
    invariant: object
    target: str


@dataclass(frozen=True)
class FlatTransition:
    source: FlatState
    target: FlatState
    label: SteadyLabel | AdaptLabel


def _transition_key(t):
    if isinstance(t.label, AdaptLabel):
        inv_text, target = F.unparse(t.label.invariant), t.label.target
    else:
        inv_text, target = "", ""
    return (t.target.q, t.target.r, inv_text, target)


def successors(sys, state):
    """Outgoing flat transitions of ``state``, in a fixed deterministic order."""
    out = []
    if state.pending is None:
        region = sys.constraint_region(state.r)
        succs = sys.behaviour.successors(state.q)
        steady = [q2 for q2 in succs if q2 in region]
        if steady:
            label = SteadyLabel(state.r)
            out = [FlatTransition(state, FlatState(q2, state.r, None), label) for q2 in steady]
        else:
            # no steady move possible: adaptation may start
            for inv, target in sys.structure.out_transitions(state.r):
                inv_region = sys.region(inv)
                label = AdaptLabel(state.r, inv, target)
                for q2 in succs:
                    if q2 in inv_region:
                        out.append(
                            FlatTransition(state, FlatState(q2, state.r, (inv, target)), label)
                        )
    else:
        inv, target = state.pending
        label = AdaptLabel(state.r, inv, target)
        if state.q in sys.constraint_region(target):
            # adaptation ends here; the behaviour does not move
            out.append(FlatTransition(state, FlatState(state.q, target, None), label))
        else:
            inv_region = sys.region(inv)
            for q2 in sys.behaviour.successors(state.q):
                if q2 in inv_region:
                    out.append(FlatTransition(state, FlatState(q2, state.r, state.pending), label))
    out.sort(key=_transition_key)
    return out


def classify(sys, state):
    """One of 'adapting', 'steady', 'stuck' (stuck: pending set, no way out)."""
    trans = successors(sys, state)
    if any(isinstance(t.label, AdaptLabel) for t in trans):
        return ADAPTING
    if state.pending is None:
        return STEADY
    return STUCK


class FlatLTS:
    """Reachable fragment of the flat semantics with stable state numbering.

    Equality compares states, the initial index and transitions; the
    backing system reference (used only to evaluate observation atoms) is
    ignored, so a JSON round trip restores an equal value.
    """

    def __init__(self, states, init_index, transitions, classes, system=None):
        self.states = tuple(states)
        self.init_index = init_index
        self.transitions = tuple(transitions)
        self.classes = tuple(classes)
        self.system = system
        self._index = {s: i for i, s in enumerate(self.states)}
        out = [[] for _ in self.states]
        for t in self.transitions:
            out[self._index[t.source]].append(t)
        self._out = [tuple(v) for v in out]

    def __len__(self):
        return len(self.states)

    def __eq__(self, other):
        return (
            isinstance(other, FlatLTS)
            and self.states == other.states
            and self.init_index == other.init_index
            and self.transitions == other.transitions
        )

    def index_of(self, state):
        try:
            return self._index[state]
        except KeyError:
            raise ModelError(f"state {state} is not part of this flat system") from None

    def out_transitions(self, i):
        return self._out[i]

    def successor_ids(self, i):
        return tuple(self._index[t.target] for t in self._out[i])


def flatten(sys):
    """Explore the flat semantics from the initial state (model must be well formed)."""
    require_well_formed(sys)
    init = FlatState(sys.behaviour.init, sys.structure.init, None)
    number = {init: 0}
    states = [init]
    transitions = []
    out_kind = {0: False}
    queue = deque([init])
    while queue:
        s = queue.popleft()
        trans = successors(sys, s)
        out_kind[number[s]] = any(isinstance(t.label, AdaptLabel) for t in trans)
        for t in trans:
            if t.target not in number:
                number[t.target] = len(states)
                states.append(t.target)
                queue.append(t.target)
            transitions.append(t)
    classes = []
    for i, s in enumerate(states):
        if out_kind[i]:
            classes.append(ADAPTING)
        elif s.pending is None:
            classes.append(STEADY)
        else:
            classes.append(STUCK)
    return FlatLTS(states, 0, transitions, classes, system=sys)


# ---------------------------------------------------------------------------
# exports

def export_json(flat):
    """Serialize to the stable JSON interchange form (byte-identical across runs)."""
    states = []
    for i, s in enumerate(flat.states):
        pending = None
        if s.pending is not None:
            pending = {"inv": F.unparse(s.pending[0]), "target": s.pending[1]}
        states.append({"id": i, "q": s.q, "r": s.r, "pending": pending, "class": flat.classes[i]})
    transitions = []
    for t in flat.transitions:
        adapt = isinstance(t.label, AdaptLabel)
        transitions.append(
            {
                "from": flat.index_of(t.source),
                "to": flat.index_of(t.target),
                "kind": "adapt" if adapt else "steady",
                "r": t.label.r,
                "inv": F.unparse(t.label.invariant) if adapt else None,
                "target": t.label.target if adapt else None,
            }
        )
    doc = {"states": states, "init": flat.init_index, "transitions": transitions}
    return json.dumps(doc, indent=2) + "\n"


def import_json(text, system=None):
    """Rebuild a FlatLTS from :func:`export_json` output.

    With ``system`` given, pending invariants and transition guards are
    typechecked against its observables, restoring full equality with the
    original; without it they stay syntactic.
    """
    try:
        doc = json.loads(text)
    except ValueError as e:
        raise ModelError(f"invalid flat JSON: {e}") from None

    def parse_inv(text_):
        phi = F.parse_raw(text_)
        if system is not None:
            phi = F.typecheck(phi, system.observables)
        return phi

    try:
        states = []
        for row in doc["states"]:
            pending = None
            if row["pending"] is not None:
                pending = (parse_inv(row["pending"]["inv"]), row["pending"]["target"])
            states.append(FlatState(row["q"], row["r"], pending))
        if [row["id"] for row in doc["states"]] != list(range(len(states))):
            raise ModelError("invalid flat JSON: state ids must be 0..n-1 in order")
        transitions = []
        for row in doc["transitions"]:
            src, dst = states[row["from"]], states[row["to"]]
            if row["kind"] == "steady":
                label = SteadyLabel(row["r"])
            else:
                label = AdaptLabel(row["r"], parse_inv(row["inv"]), row["target"])
            transitions.append(FlatTransition(src, dst, label))
        init = doc["init"]
        declared = [row["class"] for row in doc["states"]]
    except (KeyError, IndexError, TypeError) as e:
        raise ModelError(f"invalid flat JSON: {e!r}") from None

    adapt_out = set()
    for t in transitions:
        if isinstance(t.label, AdaptLabel):
            adapt_out.add(t.source)
    classes = []
    for s in states:
        if s in adapt_out:
            classes.append(ADAPTING)
        elif s.pending is None:
            classes.append(STEADY)
        else:
            classes.append(STUCK)
    if classes != declared:
        raise ModelError("invalid flat JSON: 'class' tags disagree with the transition structure")
    if not (isinstance(init, int) and 0 <= init < len(states)):
        raise ModelError("invalid flat JSON: bad init index")
    return FlatLTS(states, init, transitions, classes, system=system)


def _dot_escape(s):
    return s.replace("\\", "\\\\").replace('"', '\\"')


def export_dot(flat):
    """Graphviz rendering: adaptation-phase nodes shaded, stuck nodes double-bordered."""
    lines = [
        "digraph flat {",
        "  rankdir=LR;",
        '  node [shape=box, fontname="Helvetica"];',
        "  __init [shape=point];",
    ]
    for i, s in enumerate(flat.states):
        if s.pending is None:
            label = f"{s.q},{s.r}"
        else:
            label = f"{s.q},{s.r},({F.unparse(s.pending[0])},{s.pending[1]})"
        attrs = [f'label="{_dot_escape(label)}"']
        if s.pending is not None:
            attrs.append("style=filled")
            attrs.append('fillcolor="#f4cccc"')
        if flat.classes[i] == STUCK:
            attrs.append("peripheries=2")
        lines.append(f'  n{i} [{", ".join(attrs)}];')
    lines.append(f"  __init -> n{flat.init_index};")
    for t in flat.transitions:
        if isinstance(t.label, AdaptLabel):
            text = f"{t.label.r},{F.unparse(t.label.invariant)},{t.label.target}"
        else:
            text = t.label.r
        lines.append(
            f'  n{flat.index_of(t.source)} -> n{flat.index_of(t.target)} '
            f'[label="{_dot_escape(text)}"];'
        )
    lines.append("}")
    return "\n".join(lines) + "\n"
