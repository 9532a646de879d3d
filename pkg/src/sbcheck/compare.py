"""Cross-checking the relational and the CTL decision methods.

Both methods answer the same question about a pair (q, r): the relational
method asks whether the pair survives the greatest-fixpoint refinement,
the CTL method checks the corresponding formula on the flat system grown
from (q, r, no-pending).  The two characterisations are expected to
coincide but are computed by unrelated code paths, so any divergence is
worth surfacing rather than hiding; see ``pair_disagreements``.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

from .adapt import WEAK, candidate_pairs, strong_relation, weak_relation
from .ctl import check_ctl, strong_formula, weak_formula
from .flat import flatten


@dataclass(frozen=True)
class MethodVerdicts:
    """Top-level adaptability verdicts for one property by both methods."""

    kind: str  # 'weak' or 'strong'
    relational: bool
    ctl: bool

    @property
    def agree(self):
        return self.relational == self.ctl


def rerooted(sys, q, r):
    """The same system re-anchored to start at behaviour state ``q`` and
    structure state ``r``.  The pair must satisfy q ⊨ L(r), otherwise the
    result fails well-formedness."""
    return dataclasses.replace(
        sys,
        behaviour=dataclasses.replace(sys.behaviour, init=q),
        structure=dataclasses.replace(sys.structure, init=r),
    )


def _relation_and_formula(sys, kind):
    if kind == WEAK:
        return weak_relation(sys), weak_formula()
    return strong_relation(sys), strong_formula()


def compare_methods(sys, kind, flat=None):
    """Verdicts of both methods on the system's initial pair."""
    rel, phi = _relation_and_formula(sys, kind)
    if flat is None:
        flat = flatten(sys)
    return MethodVerdicts(
        kind=kind,
        relational=rel.holds_for(sys.behaviour.init, sys.structure.init),
        ctl=check_ctl(flat, phi).holds_at_init,
    )


def pair_disagreements(sys, kind):
    """Candidate pairs on which the methods answer differently.

    Every pair (q, r) with q satisfying the constraint of r is tried:
    relational membership against the CTL formula on the system re-rooted
    at that pair.  Returns a sorted tuple of ((q, r), relational, ctl)
    entries; empty when the methods agree on every candidate.
    """
    rel, phi = _relation_and_formula(sys, kind)
    out = []
    for q, r in sorted(candidate_pairs(sys)):
        ctl_holds = check_ctl(flatten(rerooted(sys, q, r)), phi).holds_at_init
        rel_holds = rel.holds_for(q, r)
        if rel_holds != ctl_holds:
            out.append(((q, r), rel_holds, ctl_holds))
    return tuple(out)


def find_discrepancy(sys, kind):
    """Smallest disagreeing candidate pair with both verdicts, or None."""
    diffs = pair_disagreements(sys, kind)
    return diffs[0] if diffs else None
