"""Grounding and model expansion: examples, oracle completeness, minimize."""

import random

import pytest

from gen import base_structure, random_ltc_theory, small_vocabulary
from oracles import brute_force_models, state_key
from ltc.ground import UnboundedSort, ground
from ltc.solver import ALL, Unsat, minimize, model_expand
from ltc.structure import FuncTable, PartialStructure, PredTable
from ltc.syntax import (
    And, Apply, Atom, ElemTerm, Eq, Forall, Implies, Not, Or, Sort,
    SymbolDecl, TIME_SORT, Theory, Variable, Vocabulary,
)
from ltc.truth import FALSE, TRUE
from ltc.validate import validate_vocabulary
from ltc.wellfounded import satisfies


def _pq_setting():
    voc = validate_vocabulary(Vocabulary("V", (TIME_SORT,), (
        SymbolDecl("P", ()), SymbolDecl("Q", ()))))
    struct = PartialStructure(voc, {})
    p = Atom(voc.symbol("P"), ())
    q = Atom(voc.symbol("Q"), ())
    return voc, struct, p, q


# ---------------------------------------------------------------------------
# ground

def test_ground_move_uniqueness_counts():
    agent, d = Sort("Agent"), Sort("Dir")
    voc = validate_vocabulary(Vocabulary("V", (TIME_SORT, agent, d), (
        SymbolDecl("Move", (agent, d)),)))
    a = Variable("a", agent)
    d1, d2 = Variable("d", d), Variable("d2", d)
    move = voc.symbol("Move")
    f = Forall(a, Forall(d1, Forall(d2, Implies(
        And(Atom(move, (a, d1)), Atom(move, (a, d2))), Eq(d1, d2)))))
    struct = PartialStructure(voc, {"Agent": ("a1",), "Dir": ("e", "w")})
    gt = ground(Theory("T", voc, (f,), ()), struct)
    # only the two d != d2 instantiations survive simplification
    assert len(gt.constraints) == 2


def test_ground_decided_sentence_vanishes():
    voc, struct, p, q = _pq_setting()
    decided = PartialStructure(voc, {}, {"P": PredTable({(): TRUE}, FALSE)},)
    gt = ground(Theory("T", voc, (p,), ()), decided)
    assert gt.constraints == [] and not gt.unsat


def test_ground_transition_defined_atoms(pacman_derivation):
    # on a 2x1 corridor the transition definition determines exactly the
    # next-state fluents
    d = pacman_derivation
    struct = PartialStructure(d.derived.bistate, {
        "Agent": ("pac",), "Square": ("s1", "s2"), "Dir": ("e",)},
        {"Next": PredTable({("s1", "e", "s2"): TRUE}, FALSE)},
        {"StartPos": FuncTable({("pac",): "s1"}), "pacman": FuncTable({(): "pac"})})
    gt = ground(d.transition, struct)
    defined_syms = {key[1] for gd in gt.definitions for key in gd.defined_keys}
    assert defined_syms == {"Pell_n", "Pos_n"}


def test_ground_unbounded_sort():
    voc = validate_vocabulary(Vocabulary("V", (TIME_SORT, Sort("A")), (
        SymbolDecl("P", (Sort("A"),)),)))
    x = Variable("x", Sort("A"))
    f = Forall(x, Atom(voc.symbol("P"), (x,)))
    with pytest.raises(UnboundedSort):
        ground(Theory("T", voc, (f,), ()), PartialStructure(voc, {}))


# ---------------------------------------------------------------------------
# model_expand

def test_disjunction_three_models():
    voc, struct, p, q = _pq_setting()
    models = model_expand(Theory("T", voc, (Or(p, q),), ()), struct, ALL)
    assert len(models) == 3
    keys = [state_key(m) for m in models]
    assert len(set(keys)) == 3


def test_unsatisfiable_returns_empty():
    voc, struct, p, q = _pq_setting()
    models = model_expand(Theory("T", voc, (p, Not(p)), ()), struct, ALL)
    assert models == []


def test_nbmodels_limits_and_orders():
    voc, struct, p, q = _pq_setting()
    theory = Theory("T", voc, (), ())
    all_models = model_expand(theory, struct, ALL)
    assert len(all_models) == 4
    first = model_expand(theory, struct, 1)
    assert state_key(first[0]) == state_key(all_models[0])
    two = model_expand(theory, struct, 2)
    assert [state_key(m) for m in two] == [state_key(m) for m in all_models[:2]]
    # enumeration is lexicographic in the atom table with false < true
    assert all_models[0].pred_value("P", ()) is FALSE
    assert all_models[0].pred_value("Q", ()) is FALSE
    assert all_models[-1].pred_value("P", ()) is TRUE
    assert all_models[-1].pred_value("Q", ()) is TRUE


def test_initial_states_match_brute_force(pacman_derivation, grid2x2):
    from ltc.structure import project_state
    d = pacman_derivation
    j0 = project_state(grid2x2, d.derived, 0)
    got = model_expand(d.initial, j0, ALL)
    expected = brute_force_models(d.initial, j0)
    assert {state_key(m) for m in got} == {state_key(m) for m in expected}
    assert all(m.func_value("Pos", ("pac",)) == "nw" for m in got)
    assert all(set(m.pred_table("Pell").true_tuples()) ==
               {("nw",), ("ne",), ("sw",), ("se",)} for m in got)


@pytest.mark.parametrize("seed", range(12))
def test_soundness_and_completeness_random(seed):
    rng = random.Random(30_000 + seed)
    voc = small_vocabulary(rng)
    theory = random_ltc_theory(rng, voc)
    struct = base_structure(rng, voc, n_obj=2, time_points=2)
    from oracles import open_cells
    if len(open_cells(struct)) > 20:
        pytest.skip("instance too large for the brute-force oracle")
    got = model_expand(theory, struct, ALL)
    for m in got:
        assert satisfies(m, theory)
        assert struct.leq_precision(m)
    expected = brute_force_models(theory, struct)
    assert {state_key(m) for m in got} == {state_key(m) for m in expected}


def test_stop_flag_cancels():
    voc, struct, p, q = _pq_setting()
    calls = []

    def stop():
        calls.append(1)
        return len(calls) > 2

    models = model_expand(Theory("T", voc, (), ()), struct, ALL, stop_flag=stop)
    assert len(models) < 4


# ---------------------------------------------------------------------------
# minimize

def _int_voc():
    n = Sort("N")
    voc = validate_vocabulary(Vocabulary("V", (TIME_SORT, n), (
        SymbolDecl("c", (), n), SymbolDecl("P", ()))))
    struct = PartialStructure(voc, {"N": (0, 1, 2, 3)})
    return voc, struct


def test_minimize_constant_cost():
    n = Sort("N")
    voc = validate_vocabulary(Vocabulary("V", (TIME_SORT, n), (
        SymbolDecl("c", (), n), SymbolDecl("P", ()))))
    struct = PartialStructure(voc, {"N": (7,)}, {}, {"c": FuncTable({(): 7})})
    p = Atom(voc.symbol("P"), ())
    cost = Apply(voc.symbol("c"), ())
    optimum, witnesses = minimize(Theory("T", voc, (Or(p, Not(p)),), ()), struct, cost)
    assert optimum == 7 and witnesses


def test_minimize_picks_least_value():
    voc, struct = _int_voc()
    c = Apply(voc.symbol("c"), ())
    p = Atom(voc.symbol("P"), ())
    # c = 0 is excluded; the least admissible value is 1
    theory = Theory("T", voc, (Not(Eq(c, ElemTerm(0, Sort("N")))),), ())
    optimum, witnesses = minimize(theory, struct, c, nbmodels=ALL)
    assert optimum == 1
    assert all(m.func_value("c", ()) == 1 for m in witnesses)
    # brute force agreement
    values = [m.func_value("c", ()) for m in model_expand(theory, struct, ALL)]
    assert optimum == min(values)


def test_minimize_unsat():
    voc, struct = _int_voc()
    p = Atom(voc.symbol("P"), ())
    c = Apply(voc.symbol("c"), ())
    with pytest.raises(Unsat):
        minimize(Theory("T", voc, (p, Not(p)), ()), struct, c)


def test_defined_symbols_never_add_models(pacman_derivation, play_derivation, corridor3):
    # defined symbols are functionally determined: expanding the initial
    # theory never branches on Pell/Pos; models differ only in the open
    # atoms (Move choices, and GameOver when left undefined)
    from ltc.structure import project_state
    d = pacman_derivation
    j0 = project_state(corridor3, d.derived, 0)
    models = model_expand(d.initial, j0, ALL)
    move_sets = {tuple(m.pred_table("Move").true_tuples()) for m in models}
    assert move_sets == {(), (("pac", "East"),), (("pac", "West"),)}
    assert len(models) == 6  # 3 move choices x 2 open GameOver values
    # with GameOver defined, only the exogenous choice remains open
    d2 = play_derivation
    models2 = model_expand(d2.initial, project_state(corridor3, d2.derived, 0), ALL)
    assert len(models2) == 3
    assert all(m.pred_value("GameOver", ()) is FALSE for m in models2)


def test_ground_atoms_cover_unconstrained_symbols():
    # a predicate never mentioned by the theory still varies over models
    voc = validate_vocabulary(Vocabulary("V", (TIME_SORT,), (
        SymbolDecl("P", ()), SymbolDecl("Q", ()))))
    struct = PartialStructure(voc, {})
    p = Atom(voc.symbol("P"), ())
    models = model_expand(Theory("T", voc, (p,), ()), struct, ALL)
    assert len(models) == 2  # Q free
