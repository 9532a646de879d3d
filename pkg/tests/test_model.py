"""System assembly, constraint regions and well-formedness checks."""

import dataclasses

import pytest

import oracles
import sbcheck.formula as F
import sbcheck.model as M
from sbcheck.errors import ModelError


# ---------------------------------------------------------------------------
# construction validation


def tiny_parts():
    obs = F.Observables([F.ObservableDecl("x", F.BoolDomain())])
    beh = M.BehaviourMachine(("a", "b"), "a", frozenset({("a", "b")}))
    st = M.StructureMachine(
        ("r",), "r", {"r": F.parse_formula("x", obs)}, frozenset()
    )
    om = M.ObservationMap({"a": {"x": True}, "b": {"x": False}})
    return obs, beh, st, om


def test_assembly():
    obs, beh, st, om = tiny_parts()
    sys = M.SBSystem("tiny", obs, beh, st, om)
    assert sys.observe("a") == {"x": True}
    assert M.check_well_formed(sys).ok


def test_behaviour_machine_validation():
    with pytest.raises(ModelError):
        M.BehaviourMachine(("a", "a"), "a", frozenset())
    with pytest.raises(ModelError):
        M.BehaviourMachine(("a",), "b", frozenset())
    with pytest.raises(ModelError):
        M.BehaviourMachine(("a",), "a", frozenset({("a", "c")}))


def test_behaviour_successors_sorted_and_total():
    beh = M.BehaviourMachine(
        ("a", "b", "c"), "a", frozenset({("a", "c"), ("a", "b"), ("b", "a")})
    )
    assert beh.successors("a") == ("b", "c")
    assert beh.successors("c") == ()
    with pytest.raises(ModelError):
        beh.successors("zzz")


def test_structure_machine_validation():
    obs = F.Observables([F.ObservableDecl("x", F.BoolDomain())])
    phi = F.parse_formula("x", obs)
    with pytest.raises(ModelError):
        M.StructureMachine(("r", "r"), "r", {"r": phi}, frozenset())
    with pytest.raises(ModelError):
        M.StructureMachine(("r",), "s", {"r": phi}, frozenset())
    with pytest.raises(ModelError):  # missing label
        M.StructureMachine(("r", "s"), "r", {"r": phi}, frozenset())
    with pytest.raises(ModelError):  # label for undeclared state
        M.StructureMachine(("r",), "r", {"r": phi, "s": phi}, frozenset())
    with pytest.raises(ModelError):  # dangling transition endpoint
        M.StructureMachine(("r",), "r", {"r": phi}, frozenset({("r", phi, "s")}))


def test_structure_out_transitions_ordered_by_invariant_text():
    obs = F.Observables([F.ObservableDecl("x", F.BoolDomain())])
    a = F.parse_formula("!x", obs)
    b = F.parse_formula("x", obs)
    st = M.StructureMachine(
        ("r", "s"),
        "r",
        {"r": b, "s": a},
        frozenset({("r", b, "s"), ("r", a, "s")}),
    )
    assert st.out_transitions("r") == ((a, "s"), (b, "s"))
    assert st.out_transitions("s") == ()


def test_system_rejects_missing_or_extra_observations():
    obs, beh, st, om = tiny_parts()
    with pytest.raises(ModelError):
        M.SBSystem("t", obs, beh, st, M.ObservationMap({"a": {"x": True}}))
    with pytest.raises(ModelError):
        M.SBSystem(
            "t",
            obs,
            beh,
            st,
            M.ObservationMap(
                {"a": {"x": True}, "b": {"x": False}, "zz": {"x": False}}
            ),
        )


def test_system_rejects_bad_valuations():
    obs, beh, st, om = tiny_parts()
    with pytest.raises(Exception):
        M.SBSystem("t", obs, beh, st, M.ObservationMap({"a": {"x": 1}, "b": {"x": False}}))
    with pytest.raises(Exception):
        M.SBSystem("t", obs, beh, st, M.ObservationMap({"a": {}, "b": {"x": False}}))


def test_system_typechecks_structure_formulas():
    obs, beh, st, om = tiny_parts()
    bad = M.StructureMachine(("r",), "r", {"r": F.Name("nosuch")}, frozenset())
    with pytest.raises(Exception):
        M.SBSystem("t", obs, beh, bad, om)


def test_construction_is_idempotent_under_replace():
    sys = oracles.predator_system("predator_s0")
    again = dataclasses.replace(sys)
    assert again.structure.labels == sys.structure.labels
    assert again.structure.transitions == sys.structure.transitions


# ---------------------------------------------------------------------------
# regions


def test_constraint_regions_of_bundled_models():
    sys = oracles.predator_system("predator_s0")
    assert sys.constraint_region("r0") == frozenset(
        {"q000t", "q001t", "q010f", "q011f", "q011t"}
    )
    assert sys.constraint_region("r1") == frozenset(
        {"q100t", "q101f", "q110t", "q111f"}
    )
    assert sys.constraint_region("r2") == frozenset({"moved"})


def test_regions_partition_is_not_total():
    # hungry-with-no-prey states satisfy no constraint at all
    sys = oracles.predator_system("predator_s0")
    covered = set()
    for r in sys.structure.states:
        covered |= sys.constraint_region(r)
    uncovered = set(sys.behaviour.states) - covered
    assert uncovered == {"q000f", "q001f", "q100f", "q110f"}


def test_region_matches_satisfies_pointwise():
    sys = oracles.predator_system("predator_s1")
    for r in sys.structure.states:
        phi = sys.structure.label(r)
        for q in sys.behaviour.states:
            assert (q in sys.constraint_region(r)) == sys.satisfies(q, phi)


def test_region_is_cached():
    sys = oracles.predator_system("predator_s0")
    phi = sys.structure.label("r0")
    assert sys.region(phi) is sys.region(phi)


def test_satisfies_unknown_state():
    sys = oracles.predator_system("predator_s0")
    with pytest.raises(ModelError):
        sys.satisfies("nosuch", sys.structure.label("r0"))


# ---------------------------------------------------------------------------
# well-formedness


def test_bundled_models_are_well_formed():
    for which in ("predator_s0", "predator_s1"):
        report = M.check_well_formed(oracles.predator_system(which))
        assert report.ok
        assert report.violations == ()


def test_unsatisfiable_label_is_reported():
    obs, beh, st, om = tiny_parts()
    contradiction = F.parse_formula("x && !x", obs)
    st2 = M.StructureMachine(
        ("r", "s"),
        "r",
        {"r": st.labels["r"], "s": contradiction},
        frozenset(),
    )
    sys = M.SBSystem("t", obs, beh, st2, om)
    report = M.check_well_formed(sys)
    assert not report.ok
    kinds = [(v.kind, v.subject) for v in report.violations]
    assert kinds == [("unsatisfiable-label", "s")]
    with pytest.raises(ModelError):
        M.require_well_formed(sys)


def test_initial_violation_is_reported():
    obs, beh, st, om = tiny_parts()
    st2 = M.StructureMachine(
        ("r",), "r", {"r": F.parse_formula("!x", obs)}, frozenset()
    )
    sys = M.SBSystem("t", obs, beh, st2, om)
    report = M.check_well_formed(sys)
    assert not report.ok
    assert [v.kind for v in report.violations] == ["initial-violation"]
    assert report.violations[0].subject == "r"


def test_both_violation_kinds_together():
    obs = F.Observables([F.ObservableDecl("x", F.BoolDomain())])
    beh = M.BehaviourMachine(("a",), "a", frozenset())
    st = M.StructureMachine(
        ("r",), "r", {"r": F.parse_formula("x && !x", obs)}, frozenset()
    )
    sys = M.SBSystem("t", obs, beh, st, M.ObservationMap({"a": {"x": True}}))
    report = M.check_well_formed(sys)
    kinds = sorted(v.kind for v in report.violations)
    assert kinds == ["initial-violation", "unsatisfiable-label"]


def test_violation_messages_name_the_constraint():
    obs, beh, st, om = tiny_parts()
    st2 = M.StructureMachine(
        ("r",), "r", {"r": F.parse_formula("x && !x", obs)}, frozenset()
    )
    sys = M.SBSystem("t", obs, beh, st2, om)
    report = M.check_well_formed(sys)
    assert "x && !x" in report.violations[0].message
