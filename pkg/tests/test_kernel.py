"""Vocabulary validation, sentence classification, and the LTC theory check."""

import pytest

from ltc.syntax import (
    Atom, Category, Definition, Exists, Forall, Implies, InitTerm, Not,
    Rule, Sort, SuccTerm, SymbolDecl, Theory, TIME_SORT, Variable, Vocabulary,
    alpha_equal,
)
from ltc.validate import (
    LtcValidationFailure, SentenceKind, check_ltc_theory, classify,
    validate_vocabulary,
)

OBJ = Sort("Obj")


def make_voc(*symbols):
    return validate_vocabulary(Vocabulary("V", (TIME_SORT, OBJ), tuple(symbols)))


# ---------------------------------------------------------------------------
# validate_vocabulary

def test_pacman_vocabulary_categories(pacman):
    voc = pacman.vocabularies["P"]
    cats = {s.name: s.category for s in voc.symbols}
    for name in ("Move", "Pell", "GameOver", "Pos"):
        assert cats[name] is Category.DYNAMIC
    for name in ("Next", "StartPos", "pacman"):
        assert cats[name] is Category.STATIC


def test_only_static_symbols_is_valid():
    voc = make_voc(SymbolDecl("P", (OBJ,)), SymbolDecl("c", (), OBJ))
    assert all(s.category is Category.STATIC for s in voc.symbols)


def test_multiple_time_args_rejected():
    with pytest.raises(LtcValidationFailure) as exc:
        make_voc(SymbolDecl("R", (TIME_SORT, TIME_SORT)))
    assert any(e.code == "MultipleTimeArgs" for e in exc.value.errors)


def test_time_valued_output_rejected():
    with pytest.raises(LtcValidationFailure) as exc:
        make_voc(SymbolDecl("f", (OBJ,), TIME_SORT))
    assert any(e.code == "TimeValuedOutput" for e in exc.value.errors)


def test_missing_time_sort_rejected():
    with pytest.raises(LtcValidationFailure) as exc:
        validate_vocabulary(Vocabulary("V", (OBJ,), ()))
    assert any(e.code == "NoTimeSort" for e in exc.value.errors)


def test_time_argument_normalized_last():
    voc = make_voc(SymbolDecl("R", (TIME_SORT, OBJ)))
    sym = voc.symbol("R")
    assert sym.arg_sorts == (OBJ, TIME_SORT)
    assert sym.time_pos == 0


# ---------------------------------------------------------------------------
# classify

@pytest.fixture(scope="module")
def cvoc():
    return make_voc(
        SymbolDecl("P", (OBJ, TIME_SORT)),
        SymbolDecl("Q", (TIME_SORT,)),
        SymbolDecl("S", (OBJ,)),
    )


def _vars(cvoc):
    return Variable("x", OBJ), Variable("t", TIME_SORT)


def test_classify_static(cvoc):
    x, _ = _vars(cvoc)
    f = Forall(x, Atom(cvoc.symbol("S"), (x,)))
    assert classify(f).kind is SentenceKind.STATIC


def test_classify_initial(cvoc):
    x, _ = _vars(cvoc)
    f = Forall(x, Atom(cvoc.symbol("P"), (x, InitTerm())))
    assert classify(f).kind is SentenceKind.INITIAL


def test_classify_single_state_move_uniqueness(pacman):
    th = pacman.theories["T"]
    assert classify(th.sentences[0]).kind is SentenceKind.SINGLE_STATE


def test_classify_pacman_rules(pacman):
    kinds = [classify(r).kind for d in pacman.theories["T"].definitions for r in d.rules]
    assert kinds.count(SentenceKind.INITIAL) == 2
    assert kinds.count(SentenceKind.BISTATE) == 3


def test_classify_bistate(cvoc):
    x, t = _vars(cvoc)
    f = Forall(t, Forall(x, Implies(Atom(cvoc.symbol("P"), (x, t)),
                                    Atom(cvoc.symbol("P"), (x, SuccTerm(t))))))
    assert classify(f).kind is SentenceKind.BISTATE


def test_classify_nested_succ_is_other(cvoc):
    _, t = _vars(cvoc)
    f = Forall(t, Atom(cvoc.symbol("Q"), (SuccTerm(SuccTerm(t)),)))
    cls = classify(f)
    assert cls.kind is SentenceKind.OTHER
    assert "Succ(Succ(t))" in cls.reason


def test_classify_two_time_vars_is_other(cvoc):
    _, t = _vars(cvoc)
    t2 = Variable("t2", TIME_SORT)
    f = Forall(t, Forall(t2, Implies(Atom(cvoc.symbol("Q"), (t,)),
                                     Atom(cvoc.symbol("Q"), (t2,)))))
    assert classify(f).kind is SentenceKind.OTHER


def test_classify_existential_time_is_other(cvoc):
    _, t = _vars(cvoc)
    f = Exists(t, Atom(cvoc.symbol("Q"), (t,)))
    cls = classify(f)
    assert cls.kind is SentenceKind.OTHER
    assert "universally" in cls.reason


def test_classify_init_mixed_with_time_var_is_other(cvoc):
    _, t = _vars(cvoc)
    f = Forall(t, Implies(Atom(cvoc.symbol("Q"), (InitTerm(),)),
                          Atom(cvoc.symbol("Q"), (t,))))
    assert classify(f).kind is SentenceKind.OTHER


def test_classify_stable_under_renaming(cvoc):
    x, t = _vars(cvoc)
    f = Forall(t, Forall(x, Atom(cvoc.symbol("P"), (x, t))))
    y, u = Variable("y", OBJ), Variable("u", TIME_SORT)
    g = Forall(u, Forall(y, Atom(cvoc.symbol("P"), (y, u))))
    assert alpha_equal(f, g)
    assert classify(f).kind is classify(g).kind


# ---------------------------------------------------------------------------
# check_ltc_theory

def test_pacman_theory_accepted(pacman):
    ltc = check_ltc_theory(pacman.theories["T"])
    assert len(ltc.sentence_classes) == 1
    assert sum(len(g) for g in ltc.rule_classes) == 5


def test_future_reference_rejected(cvoc):
    _, t = _vars(cvoc)
    q = cvoc.symbol("Q")
    rule = Rule((t,), Atom(q, (t,)), Atom(q, (SuccTerm(t),)))
    theory = Theory("T", cvoc, (), (Definition((rule,)),))
    with pytest.raises(LtcValidationFailure) as exc:
        check_ltc_theory(theory)
    assert any(e.code == "FutureReference" for e in exc.value.errors)


def test_same_level_negative_dependency_accepted(cvoc):
    # head at Succ(t) may read Succ(t) negatively: only future references
    # (body strictly later than the head) are rejected
    _, t = _vars(cvoc)
    q = cvoc.symbol("Q")
    p = cvoc.symbol("P")
    x = Variable("x", OBJ)
    rule = Rule((x, t), Atom(p, (x, SuccTerm(t))), Not(Atom(q, (SuccTerm(t),))))
    theory = Theory("T", cvoc, (), (Definition((rule,)),))
    ltc = check_ltc_theory(theory)
    assert ltc.rule_classes[0][0].kind is SentenceKind.BISTATE


def test_stratification_by_dependency_levels(cvoc):
    # manual dependency graph: edges head->body annotated with time offsets;
    # the only illegal edge shape is head level < body level
    _, t = _vars(cvoc)
    q = cvoc.symbol("Q")
    p = cvoc.symbol("P")
    x = Variable("x", OBJ)
    legal = [
        Rule((x, t), Atom(p, (x, SuccTerm(t))), Atom(q, (t,))),          # 1 <- 0
        Rule((x, t), Atom(p, (x, SuccTerm(t))), Atom(q, (SuccTerm(t),))),  # 1 <- 1
        Rule((t,), Atom(q, (t,)), Not(Atom(q, (t,)))),                   # 0 <- 0
    ]
    for rule in legal:
        check_ltc_theory(Theory("T", cvoc, (), (Definition((rule,)),)))
    illegal = Rule((x, t), Atom(p, (x, t)), Atom(q, (SuccTerm(t),)))     # 0 <- 1
    with pytest.raises(LtcValidationFailure):
        check_ltc_theory(Theory("T", cvoc, (), (Definition((illegal,)),)))


def test_non_ltc_sentence_rejected(cvoc):
    _, t = _vars(cvoc)
    f = Exists(t, Atom(cvoc.symbol("Q"), (t,)))
    with pytest.raises(LtcValidationFailure) as exc:
        check_ltc_theory(Theory("T", cvoc, (f,), ()))
    assert any(e.code == "NonLtcSentence" for e in exc.value.errors)


def test_inertia_pattern_accepted():
    from ltc.syntax import FluentDecl
    from ltc.transform import expand_fluent_macro, fluent_symbols
    decl = FluentDecl("Carry", (OBJ,))
    syms = fluent_symbols(decl, TIME_SORT)
    voc = validate_vocabulary(Vocabulary("V", (TIME_SORT, OBJ), tuple(syms), (decl,)))
    _, theory = expand_fluent_macro(voc, Theory("T", voc, (), ()))
    ltc = check_ltc_theory(theory)
    kinds = [c.kind for c in ltc.rule_classes[0]]
    assert kinds == [SentenceKind.INITIAL, SentenceKind.BISTATE, SentenceKind.BISTATE]
