"""Weak and strong adaptability as greatest-fixpoint relations on (q, r) pairs.

Starting from every pair whose behaviour state satisfies the structure
state's constraint, pairs are removed until stable.  A pair survives when
each move the flat semantics can actually take from (q, r, no-pending) is
covered:

* every steady successor must itself form a surviving pair with r;
* when no steady move exists, adaptation branches are examined.  The weak
  relation asks, for each behaviour successor some adaptation branch can
  reach, that at least one branch admits a finite run ending in a
  surviving pair with the branch target.  The strong relation asks that
  every enabled adaptation branch terminates on all runs, with every
  endpoint a surviving pair.

Behaviour successors the flat semantics cannot move to (they violate the
active constraint while a steady move exists, or satisfy no enabled
invariant) impose no requirement.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import ModelError
from .model import require_well_formed

WEAK = "weak"
STRONG = "strong"


@dataclass(frozen=True)
class AdaptRelation:
    kind: str  # 'weak' or 'strong'
    pairs: frozenset  # of (q, r)

    def holds_for(self, q, r):
        return (q, r) in self.pairs


@dataclass(frozen=True)
class EquivPartition:
    kind: str
    blocks: tuple  # of frozensets of behaviour states


def candidate_pairs(sys):
    """The refinement start: every (q, r) with q satisfying the constraint of r."""
    return frozenset(
        (q, r) for r in sys.structure.states for q in sys.constraint_region(r)
    )


def _phase_options(sys, r, q2):
    """Adaptation branches from r whose invariant admits q2 as first step."""
    return [
        (inv, target)
        for inv, target in sys.structure.out_transitions(r)
        if q2 in sys.region(inv)
    ]


def _some_run_good(sys, start, inv, target, pairs):
    """Is there a finite run from ``start`` through invariant-satisfying states
    that reaches one satisfying the target constraint, landing in ``pairs``?"""
    goal = sys.constraint_region(target)
    inv_region = sys.region(inv)
    seen = {start}
    stack = [start]
    while stack:
        x = stack.pop()
        if x in goal:
            if (x, target) in pairs:
                return True
            continue  # adaptation ends here no matter what; a bad endpoint
        for y in sys.behaviour.successors(x):
            if y in inv_region and y not in seen:
                seen.add(y)
                stack.append(y)
    return False


def _all_runs_good(sys, start, inv, target, pairs):
    """Do all maximal runs from ``start`` terminate at good endpoints?

    Fails on a reachable cycle (an infinite run), on a state with no move
    left that does not satisfy the target constraint (stuck), and on any
    endpoint whose pair with the target is outside ``pairs``.
    """
    goal = sys.constraint_region(target)
    inv_region = sys.region(inv)
    succ = sys.behaviour.successors
    VISITING, OK = 1, 2
    mark = {}

    def visit(x):
        if x in goal:
            return (x, target) in pairs
        st = mark.get(x)
        if st == VISITING:
            return False  # cycle inside the adaptation phase
        if st == OK:
            return True
        mark[x] = VISITING
        moves = [y for y in succ(x) if y in inv_region]
        if not moves:
            return False  # stuck: cannot continue, cannot end
        for y in moves:
            if not visit(y):
                return False
        mark[x] = OK
        return True

    return visit(start)


def _pair_condition(sys, q, r, pairs, strong):
    region = sys.constraint_region(r)
    succs = sys.behaviour.successors(q)
    steady = [q2 for q2 in succs if q2 in region]
    if steady:
        # adaptation cannot start while a steady move exists; successors
        # outside the constraint are never entered from here
        return all((q2, r) in pairs for q2 in steady)
    if not succs:
        return True  # behaviour deadlock: nothing is required
    if strong:
        for q2 in succs:
            for inv, target in _phase_options(sys, r, q2):
                if not _all_runs_good(sys, q2, inv, target, pairs):
                    return False
        return True
    for q2 in succs:
        options = _phase_options(sys, r, q2)
        if not options:
            continue  # the flat semantics never moves to q2 from here
        if not any(_some_run_good(sys, q2, inv, target, pairs) for inv, target in options):
            return False
    return True


def refine_once(sys, pairs, kind):
    """One refinement sweep: drop every pair whose condition fails under ``pairs``."""
    if kind not in (WEAK, STRONG):
        raise ModelError(f"unknown adaptability kind {kind!r}")
    strong = kind == STRONG
    return frozenset(p for p in pairs if _pair_condition(sys, p[0], p[1], pairs, strong))


def _relation(sys, kind):
    require_well_formed(sys)
    pairs = candidate_pairs(sys)
    while True:
        refined = refine_once(sys, pairs, kind)
        if refined == pairs:
            return AdaptRelation(kind, pairs)
        pairs = refined


def weak_relation(sys):
    """Greatest relation for the existential (some adaptation run) reading."""
    return _relation(sys, WEAK)


def strong_relation(sys):
    """Greatest relation for the universal (all adaptation runs) reading."""
    return _relation(sys, STRONG)


def is_weak_adaptable(sys):
    rel = weak_relation(sys)
    return rel.holds_for(sys.behaviour.init, sys.structure.init)


def is_strong_adaptable(sys):
    rel = strong_relation(sys)
    return rel.holds_for(sys.behaviour.init, sys.structure.init)


def equiv_partition(sys, kind):
    """Group behaviour states with identical rows of the chosen relation.

    Two states land in one block exactly when they are adaptable to the
    same set of structure states.
    """
    rel = _relation(sys, kind)
    rows = {}
    for q in sys.behaviour.states:
        row = frozenset(r for (q2, r) in rel.pairs if q2 == q)
        rows.setdefault(row, []).append(q)
    blocks = sorted((frozenset(qs) for qs in rows.values()), key=lambda b: min(b))
    return EquivPartition(kind, tuple(blocks))


def relation_to_json(rel):
    pairs = [[q, r] for q, r in sorted(rel.pairs)]
    return json.dumps({"kind": rel.kind, "pairs": pairs}, indent=2) + "\n"
