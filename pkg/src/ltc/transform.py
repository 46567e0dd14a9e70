"""Vocabulary and theory derivations.

From a linear-time vocabulary we derive the static vocabulary (static symbols
only), the single-state vocabulary (plus a projected symbol per dynamic
symbol, same name, Time argument dropped) and the bistate vocabulary (plus a
next-state symbol per dynamic symbol, suffixed ``_n``).  Time elimination
rewrites a universal single-state/bistate sentence or rule over those
vocabularies, and the initial/transition theories split an LTC theory into a
theory about state 0 and a theory about adjacent state pairs.
"""

from __future__ import annotations

from dataclasses import dataclass

from .syntax import (
    Apply, Atom, Category, Definition, Eq, Formula, Forall, InitTerm, Rule,
    Sort, SuccTerm, SymbolDecl, Term, Theory, Variable, Vocabulary,
    all_var_names, fresh_name, map_terms, replace_init, subst,
)
from .validate import LtcTheory, SentenceKind, classify

NEXT_SUFFIX = "_n"


class NameCollision(Exception):
    pass


class NotUniversal(Exception):
    pass


@dataclass(frozen=True)
class DerivedVocabularies:
    source: Vocabulary
    static: Vocabulary        # static symbols only
    single_state: Vocabulary  # + projected symbols
    bistate: Vocabulary       # + next-state symbols
    next_names: dict[str, str]  # dynamic symbol -> next-state symbol name


def _project_symbol(sym: SymbolDecl, name: str) -> SymbolDecl:
    # projected symbols are ordinary symbols: the fluent shorthand only
    # exists at the linear-time level, so origin_fluent is not carried over
    return SymbolDecl(name, sym.state_args, sym.out_sort, Category.STATIC,
                      sym.exogenous, None, None)


def derive_vocabularies(voc: Vocabulary) -> DerivedVocabularies:
    """Build the static, single-state, and bistate vocabularies."""
    sorts = tuple(s for s in voc.sorts if not s.is_time)
    statics = tuple(s for s in voc.symbols
                    if s.category is Category.STATIC)
    dynamics = tuple(s for s in voc.symbols if s.category is Category.DYNAMIC)

    taken = {s.name for s in voc.symbols}
    next_names: dict[str, str] = {}
    for d in dynamics:
        nname = d.name + NEXT_SUFFIX
        if nname in taken:
            raise NameCollision(f"next-state name {nname!r} collides with a declared symbol")
        next_names[d.name] = nname

    projected = tuple(_project_symbol(d, d.name) for d in dynamics)
    next_syms = tuple(_project_symbol(d, next_names[d.name]) for d in dynamics)

    static_voc = Vocabulary(voc.name + "_s", sorts, statics)
    ss_voc = Vocabulary(voc.name + "_ss", sorts, statics + projected)
    bs_voc = Vocabulary(voc.name + "_bs", sorts, statics + projected + next_syms)
    return DerivedVocabularies(voc, static_voc, ss_voc, bs_voc, next_names)


# ---------------------------------------------------------------------------
# Time elimination

def _eliminate_term(t: Term, derived: DerivedVocabularies, tvar: str) -> Term:
    if isinstance(t, Apply):
        args = tuple(_eliminate_term(a, derived, tvar) for a in t.args)
        if t.func.is_dynamic:
            time_arg = args[-1]
            target = _target_symbol(t.func, time_arg, derived, tvar)
            return Apply(target, args[:-1])
        return Apply(t.func, args)
    return t


def _target_symbol(sym: SymbolDecl, time_arg: Term, derived: DerivedVocabularies, tvar: str) -> SymbolDecl:
    if isinstance(time_arg, Variable) and time_arg.name == tvar:
        return derived.single_state.symbol(sym.name)
    if isinstance(time_arg, SuccTerm) and isinstance(time_arg.arg, Variable) and time_arg.arg.name == tvar:
        return derived.bistate.symbol(derived.next_names[sym.name])
    raise NotUniversal(f"Time argument {time_arg} is neither {tvar} nor Succ({tvar})")


def _eliminate_formula(f: Formula, derived: DerivedVocabularies, tvar: str) -> Formula:
    if isinstance(f, Atom):
        args = tuple(_eliminate_term(a, derived, tvar) for a in f.args)
        if f.pred.is_dynamic:
            target = _target_symbol(f.pred, args[-1], derived, tvar)
            return Atom(target, args[:-1])
        return Atom(f.pred, args)
    return map_terms(f, lambda t: _eliminate_term(t, derived, tvar)) if isinstance(f, Eq) else _walk(f, derived, tvar)


def _walk(f: Formula, derived: DerivedVocabularies, tvar: str) -> Formula:
    from .syntax import And, Or, Implies, Iff, Not, Forall, Exists
    if isinstance(f, Not):
        return Not(_eliminate_formula(f.body, derived, tvar))
    if isinstance(f, (And, Or, Implies, Iff)):
        return type(f)(_eliminate_formula(f.left, derived, tvar),
                       _eliminate_formula(f.right, derived, tvar))
    if isinstance(f, (Forall, Exists)):
        return type(f)(f.var, _eliminate_formula(f.body, derived, tvar))
    return f


def time_eliminate(x, derived: DerivedVocabularies):
    """Drop the universal Time quantifier and project dynamic symbols.

    Occurrences at t map to the projected symbol, occurrences at Succ(t) to
    the next-state symbol; the Time argument is removed.  Raises NotUniversal
    when the input is not a universal single-state/bistate sentence or rule.
    """
    cls = classify(x)
    if cls.kind not in (SentenceKind.SINGLE_STATE, SentenceKind.BISTATE):
        raise NotUniversal(f"cannot time-eliminate a {cls.kind.value} input")
    tvar = cls.time_var
    if isinstance(x, Rule):
        vars_ = tuple(v for v in x.vars if v.name != tvar)
        head = _eliminate_formula(x.head, derived, tvar)
        body = _eliminate_formula(x.body, derived, tvar)
        return Rule(vars_, head, body)
    # strip the Time variable from the leading universal prefix
    prefix = []
    body = x
    while isinstance(body, Forall):
        prefix.append(body.var)
        body = body.body
    body = _eliminate_formula(body, derived, tvar)
    for v in reversed(prefix):
        if v.name != tvar:
            body = Forall(v, body)
    return body


def shift_to_next(x, tvar: str):
    """Substitute Succ(t) for t, turning a single-state input into its
    next-state reading.  The Time variable stays quantified; only its
    occurrences move under Succ."""
    from .syntax import TIME_SORT
    succ = SuccTerm(Variable(tvar, TIME_SORT))
    mapping = {tvar: succ}
    if isinstance(x, Rule):
        return Rule(x.vars, subst(x.head, mapping), subst(x.body, mapping))
    prefix = []
    body = x
    while isinstance(body, Forall):
        prefix.append(body.var)
        body = body.body
    body = subst(body, mapping)
    for v in reversed(prefix):
        body = Forall(v, body)
    return body


def init_to_universal(x, taken: set[str]):
    """Rewrite an initial sentence/rule into the universal form used to
    project it onto state 0: replace Init by a fresh Time variable and
    quantify it."""
    from .syntax import TIME_SORT
    tname = fresh_name("t", taken)
    tvar = Variable(tname, TIME_SORT)
    if isinstance(x, Rule):
        head = map_terms(x.head, lambda t: replace_init(t, tvar))
        body = map_terms_deep(x.body, tvar)
        return Rule(x.vars + (tvar,), head, body)
    return Forall(tvar, map_terms_deep(x, tvar))


def map_terms_deep(f: Formula, tvar: Variable) -> Formula:
    from .syntax import And, Or, Implies, Iff, Not, Forall, Exists
    if isinstance(f, (Atom, Eq)):
        return map_terms(f, lambda t: replace_init(t, tvar))
    if isinstance(f, Not):
        return Not(map_terms_deep(f.body, tvar))
    if isinstance(f, (And, Or, Implies, Iff)):
        return type(f)(map_terms_deep(f.left, tvar), map_terms_deep(f.right, tvar))
    if isinstance(f, (Forall, Exists)):
        return type(f)(f.var, map_terms_deep(f.body, tvar))
    return f


# ---------------------------------------------------------------------------
# Initial and transition theories

def _classified_items(ltc: LtcTheory):
    """Yield (kind, item, is_rule) for sentences then definition rules, in
    source order with definitions merged."""
    for s, cls in zip(ltc.theory.sentences, ltc.sentence_classes):
        yield cls, s, False
    for d, classes in zip(ltc.theory.definitions, ltc.rule_classes):
        for r, cls in zip(d.rules, classes):
            yield cls, r, True


def _taken_names(ltc: LtcTheory) -> set[str]:
    names: set[str] = set()
    for _, item, is_rule in _classified_items(ltc):
        if is_rule:
            names |= {v.name for v in item.vars}
            names |= all_var_names(item.body)
        else:
            names |= all_var_names(item)
    return names


def derive_initial_theory(ltc: LtcTheory) -> Theory:
    """Static items copied, initial items projected onto state 0, universal
    single-state items time-eliminated; bistate items contribute nothing."""
    derived = derive_vocabularies(ltc.vocabulary)
    taken = _taken_names(ltc)
    sentences: list[Formula] = []
    rules: list[Rule] = []
    for cls, item, is_rule in _classified_items(ltc):
        if cls.kind is SentenceKind.STATIC:
            (rules if is_rule else sentences).append(item)
        elif cls.kind is SentenceKind.INITIAL:
            out = time_eliminate(init_to_universal(item, taken), derived)
            (rules if is_rule else sentences).append(out)
        elif cls.kind is SentenceKind.SINGLE_STATE:
            out = time_eliminate(item, derived)
            (rules if is_rule else sentences).append(out)
    definitions = (Definition(tuple(rules)),) if rules else ()
    return Theory(ltc.theory.name + "_0", derived.single_state, tuple(sentences), definitions)


def derive_transition_theory(ltc: LtcTheory) -> Theory:
    """Static items copied, single-state items contributed at both the
    current and next state, bistate items time-eliminated; initial items
    contribute nothing."""
    derived = derive_vocabularies(ltc.vocabulary)
    sentences: list[Formula] = []
    rules: list[Rule] = []
    for cls, item, is_rule in _classified_items(ltc):
        if cls.kind is SentenceKind.STATIC:
            (rules if is_rule else sentences).append(item)
        elif cls.kind is SentenceKind.SINGLE_STATE:
            out_now = time_eliminate(item, derived)
            out_next = time_eliminate(shift_to_next(item, cls.time_var), derived)
            (rules if is_rule else sentences).extend([out_now, out_next])
        elif cls.kind is SentenceKind.BISTATE:
            out = time_eliminate(item, derived)
            (rules if is_rule else sentences).append(out)
    definitions = (Definition(tuple(rules)),) if rules else ()
    return Theory(ltc.theory.name + "_t", derived.bistate, tuple(sentences), definitions)


# ---------------------------------------------------------------------------
# Fluent / inertia macro

def fluent_symbols(decl, time_sort: Sort) -> tuple[SymbolDecl, SymbolDecl, SymbolDecl, SymbolDecl]:
    """The dynamic fluent itself plus its cause/initially symbols."""
    args = decl.arg_sorts
    p = SymbolDecl(decl.name, args + (time_sort,), None, Category.DYNAMIC,
                   False, len(args), origin_fluent=decl.name)
    c = SymbolDecl("C_" + decl.name, args + (time_sort,), None, Category.DYNAMIC,
                   False, len(args), origin_fluent=decl.name)
    cn = SymbolDecl("Cn_" + decl.name, args + (time_sort,), None, Category.DYNAMIC,
                    False, len(args), origin_fluent=decl.name)
    i = SymbolDecl("I_" + decl.name, args, None, Category.STATIC,
                   False, None, origin_fluent=decl.name)
    return p, c, cn, i


def fluent_rules(voc: Vocabulary, decl) -> tuple[Rule, Rule, Rule]:
    """The three inertia rules: initially true via I_P, caused true via C_P,
    and persistence unless caused false via Cn_P."""
    from .syntax import TIME_SORT, And, Not
    p = voc.symbol(decl.name)
    c = voc.symbol("C_" + decl.name)
    cn = voc.symbol("Cn_" + decl.name)
    i = voc.symbol("I_" + decl.name)
    xs = tuple(Variable(f"x{j}" if len(decl.arg_sorts) > 1 else "x", s)
               for j, s in enumerate(decl.arg_sorts))
    t = Variable("t", TIME_SORT)
    r_init = Rule(xs, Atom(p, xs + (InitTerm(),)), Atom(i, xs))
    r_cause = Rule(xs + (t,), Atom(p, xs + (SuccTerm(t),)), Atom(c, xs + (t,)))
    r_inertia = Rule(xs + (t,), Atom(p, xs + (SuccTerm(t),)),
                     And(Atom(p, xs + (t,)), Not(Atom(cn, xs + (t,)))))
    return r_init, r_cause, r_inertia


def expand_fluent_macro(voc: Vocabulary, theory: Theory) -> tuple[Vocabulary, Theory]:
    """Add the fluent symbols (when not already present) and append the three
    inertia rules per fluent declaration to the theory's definition."""
    from .syntax import TIME_SORT
    out_voc = voc
    for decl in voc.fluents:
        for sym in fluent_symbols(decl, TIME_SORT):
            if out_voc.has_symbol(sym.name):
                existing = out_voc.symbol(sym.name)
                if existing.arg_sorts != sym.arg_sorts or existing.out_sort != sym.out_sort:
                    raise NameCollision(f"fluent-generated symbol {sym.name!r} collides with a declared symbol")
            else:
                out_voc = out_voc.with_symbols((sym,))
    new_rules: list[Rule] = []
    for decl in voc.fluents:
        new_rules.extend(fluent_rules(out_voc, decl))
    if not new_rules:
        return out_voc, theory
    merged = theory.merged_definition()
    rules = (merged.rules if merged else ()) + tuple(new_rules)
    return out_voc, Theory(theory.name, out_voc, theory.sentences, (Definition(rules),))
