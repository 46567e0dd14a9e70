"""Vocabulary validation and LTC sentence classification.

A linear-time vocabulary has the Time sort, the Init constant and Succ
function, and every other symbol carries at most one Time argument.  An LTC
theory contains only static, initial, universal single-state, and universal
bistate sentences/rules, and its rules never define an atom in terms of a
strictly later time point.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .syntax import (
    Apply, Atom, Category, Eq, Exists, Forall, Formula, InitTerm,
    Rule, SuccTerm, SymbolDecl, Term, Theory, Variable, Vocabulary,
    formula_terms, subformulas,
)


@dataclass(frozen=True)
class ValidationError:
    code: str
    message: str

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


class LtcValidationFailure(Exception):
    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(str(e) for e in self.errors))


def validate_vocabulary(voc: Vocabulary) -> Vocabulary:
    """Return the vocabulary with symbol categories computed, or raise.

    Checks: a Time sort exists, no symbol has two Time arguments, and only
    Init/Succ produce Time values.  Dynamic symbols are normalized so the
    Time argument is stored last (``time_pos`` remembers the source position).
    """
    errors: list[ValidationError] = []
    time_sort = voc.time_sort
    if time_sort is None:
        errors.append(ValidationError("NoTimeSort", f"vocabulary {voc.name!r} declares no Time sort"))
        raise LtcValidationFailure(errors)

    symbols: list[SymbolDecl] = []
    for sym in voc.symbols:
        time_positions = [i for i, s in enumerate(sym.arg_sorts) if s.is_time]
        if sym.name in ("Init", "Succ"):
            symbols.append(_replace_category(sym, Category.LTC))
            continue
        if len(time_positions) > 1:
            errors.append(ValidationError("MultipleTimeArgs", f"symbol {sym.name} has {len(time_positions)} Time arguments"))
            continue
        if sym.out_sort is not None and sym.out_sort.is_time:
            errors.append(ValidationError("TimeValuedOutput", f"symbol {sym.name} outputs the Time sort"))
            continue
        if time_positions:
            pos = time_positions[0]
            args = sym.arg_sorts
            if pos != len(args) - 1:
                args = args[:pos] + args[pos + 1:] + (args[pos],)
            symbols.append(SymbolDecl(sym.name, args, sym.out_sort, Category.DYNAMIC,
                                      sym.exogenous, pos, sym.origin_fluent))
        else:
            symbols.append(_replace_category(sym, Category.STATIC))
    if errors:
        raise LtcValidationFailure(errors)
    return Vocabulary(voc.name, voc.sorts, tuple(symbols), voc.fluents)


def _replace_category(sym: SymbolDecl, cat: Category) -> SymbolDecl:
    return SymbolDecl(sym.name, sym.arg_sorts, sym.out_sort, cat, sym.exogenous,
                      sym.time_pos, sym.origin_fluent)


# ---------------------------------------------------------------------------
# Sentence classification

class SentenceKind(enum.Enum):
    STATIC = "static"
    INITIAL = "initial"
    SINGLE_STATE = "universal single-state"
    BISTATE = "universal bistate"
    OTHER = "other"


@dataclass(frozen=True)
class SentenceClass:
    kind: SentenceKind
    time_var: str | None = None
    reason: str | None = None


def _time_terms(f) -> list[Term]:
    """Every Time-sorted term occurrence in a formula or rule."""
    if isinstance(f, Rule):
        return _time_terms(f.head) + _time_terms(f.body)
    out = []
    for t in formula_terms(f):
        if isinstance(t, Variable) and t.sort.is_time:
            out.append(t)
        elif isinstance(t, (InitTerm, SuccTerm)):
            out.append(t)
    return out


def _leading_universals(f: Formula) -> tuple[list[Variable], Formula]:
    vars_: list[Variable] = []
    while isinstance(f, Forall):
        vars_.append(f.var)
        f = f.body
    return vars_, f


def _quantified_names(f: Formula) -> set[str]:
    names = set()
    for g in subformulas(f):
        if isinstance(g, (Forall, Exists)):
            names.add(g.var.name)
    return names


def _time_positions_ok(f) -> str | None:
    """Check Time terms occur only as the Time argument of dynamic symbols.

    Returns a reason string on violation.  Keeps time elimination total: a
    bare Time term in an equality or a static position has no projection.
    """
    def check_formula(g: Formula) -> str | None:
        if isinstance(g, Atom):
            for i, a in enumerate(g.args):
                expected_time = g.pred.is_dynamic and i == len(g.args) - 1
                r = check_term(a, top_time_ok=expected_time)
                if r:
                    return r
            return None
        if isinstance(g, Eq):
            if g.left.sort_of().is_time or g.right.sort_of().is_time:
                return "equality between Time-sorted terms"
            return check_term(g.left, False) or check_term(g.right, False)
        return None

    def check_term(t: Term, top_time_ok: bool) -> str | None:
        if isinstance(t, (InitTerm, SuccTerm)) or (isinstance(t, Variable) and t.sort.is_time):
            return None if top_time_ok else f"Time term {t} outside a dynamic symbol's Time argument"
        if isinstance(t, Apply):
            for i, a in enumerate(t.args):
                expected_time = t.func.is_dynamic and i == len(t.args) - 1
                r = check_term(a, expected_time)
                if r:
                    return r
        return None

    targets = (f.head, f.body) if isinstance(f, Rule) else (f,)
    for target in targets:
        for g in subformulas(target):
            r = check_formula(g)
            if r:
                return r
    return None


def classify(f) -> SentenceClass:
    """Classify a sentence or rule: static / initial / universal single-state /
    universal bistate / other (with a reason).  Total on well-typed input."""
    terms = _time_terms(f)
    if not terms:
        return SentenceClass(SentenceKind.STATIC)

    pos_reason = _time_positions_ok(f)
    if pos_reason:
        return SentenceClass(SentenceKind.OTHER, reason=pos_reason)

    has_init = any(isinstance(t, InitTerm) for t in terms)
    non_init = [t for t in terms if not isinstance(t, InitTerm)]
    if has_init and not non_init:
        return SentenceClass(SentenceKind.INITIAL)
    if has_init:
        return SentenceClass(SentenceKind.OTHER, reason="mixes Init with other Time terms")

    time_vars = {t.name for t in terms if isinstance(t, Variable)}
    if len(time_vars) > 1:
        return SentenceClass(SentenceKind.OTHER, reason=f"more than one Time variable: {', '.join(sorted(time_vars))}")
    if not time_vars:
        return SentenceClass(SentenceKind.OTHER, reason="Time terms without a Time variable")
    tvar = next(iter(time_vars))

    bistate = False
    for t in terms:
        if isinstance(t, Variable):
            continue
        assert isinstance(t, SuccTerm)
        if isinstance(t.arg, Variable) and t.arg.name == tvar:
            bistate = True
        else:
            return SentenceClass(SentenceKind.OTHER, reason=f"term {t} is neither {tvar} nor Succ({tvar})")

    # universality: the Time variable is bound in the leading universal prefix
    if isinstance(f, Rule):
        if tvar not in {v.name for v in f.vars}:
            return SentenceClass(SentenceKind.OTHER, reason=f"Time variable {tvar} not quantified by the rule")
        if tvar in _quantified_names(f.body) or tvar in _quantified_names(f.head):
            return SentenceClass(SentenceKind.OTHER, reason=f"Time variable {tvar} re-quantified in the rule")
    else:
        prefix, body = _leading_universals(f)
        if tvar not in {v.name for v in prefix}:
            return SentenceClass(SentenceKind.OTHER, reason=f"Time variable {tvar} not universally quantified at the top level")
        if tvar in _quantified_names(body):
            return SentenceClass(SentenceKind.OTHER, reason=f"Time variable {tvar} re-quantified in the body")

    kind = SentenceKind.BISTATE if bistate else SentenceKind.SINGLE_STATE
    return SentenceClass(kind, time_var=tvar)


# ---------------------------------------------------------------------------
# LTC theory check

@dataclass(frozen=True)
class LtcTheory:
    """A checked theory: every sentence/rule carries its classification."""

    theory: Theory
    sentence_classes: tuple[SentenceClass, ...]
    rule_classes: tuple[tuple[SentenceClass, ...], ...]

    @property
    def vocabulary(self) -> Vocabulary:
        return self.theory.vocabulary


def _head_level(rule: Rule) -> int:
    """0 for heads at Init or t, 1 for heads at Succ(t); static heads get 0."""
    head = rule.head
    time_args = []
    if isinstance(head, Atom) and head.pred.is_dynamic:
        time_args = [head.args[-1]]
    elif isinstance(head, Eq) and isinstance(head.left, Apply) and head.left.func.is_dynamic:
        time_args = [head.left.args[-1]]
    if not time_args:
        return 0
    return 1 if isinstance(time_args[0], SuccTerm) else 0


def _body_levels(rule: Rule) -> list[tuple[Term, int]]:
    """(time term, level) for every dynamic atom/application in the body."""
    out = []
    for t in formula_terms(rule.body):
        if isinstance(t, Apply) and t.func.is_dynamic:
            out.append((t.args[-1], 1 if isinstance(t.args[-1], SuccTerm) else 0))
    for g in subformulas(rule.body):
        if isinstance(g, Atom) and g.pred.is_dynamic:
            out.append((g.args[-1], 1 if isinstance(g.args[-1], SuccTerm) else 0))
    return out


def check_ltc_theory(theory: Theory) -> LtcTheory:
    """Accept iff every sentence/rule falls in the four LTC classes and no
    rule references a strictly later time point than its head."""
    errors: list[ValidationError] = []
    sentence_classes = []
    for s in theory.sentences:
        cls = classify(s)
        sentence_classes.append(cls)
        if cls.kind is SentenceKind.OTHER:
            errors.append(ValidationError("NonLtcSentence", f"{s}: {cls.reason}"))

    rule_classes = []
    for d in theory.definitions:
        per_def = []
        for r in d.rules:
            cls = classify(r)
            per_def.append(cls)
            if cls.kind is SentenceKind.OTHER:
                errors.append(ValidationError("NonLtcSentence", f"{r}: {cls.reason}"))
                continue
            # stratification over Time: body levels never exceed the head level
            if cls.kind is SentenceKind.INITIAL:
                continue  # Init-only terms everywhere by classification
            if cls.kind is SentenceKind.STATIC:
                continue  # no dynamic atoms possible
            head_level = _head_level(r)
            for time_term, level in _body_levels(r):
                if level > head_level:
                    errors.append(ValidationError(
                        "FutureReference",
                        f"{r}: head at level {head_level} depends on body atom at Succ-level {level}"))
                    break
        rule_classes.append(tuple(per_def))

    if errors:
        raise LtcValidationFailure(errors)
    return LtcTheory(theory, tuple(sentence_classes), tuple(rule_classes))
