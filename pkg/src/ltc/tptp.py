"""Domain-independent induction obligations as TPTP FOF problems.

For a universal single-state property two problems are emitted: the base
case (initial theory entails the projected property) and the induction step
(transition theory plus the property entails its next-state form).  A
universal bistate property needs only the step.

Sorts are relativized to guard predicates; definitions are approximated by
their completion, which is flagged in a header comment because completion is
weaker than the well-founded reading on non-stratified definitions.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .syntax import (
    And, Apply, Atom, ElemTerm, Eq, Exists, FalseLit, Forall, Formula, Iff,
    Implies, Not, Or, Rule, Term, Theory, TrueLit, Variable, Vocabulary,
    fresh_name,
)
from .transform import shift_to_next, time_eliminate
from .validate import SentenceKind, classify


class TptpError(Exception):
    pass


@dataclass(frozen=True)
class TptpObligations:
    problems: dict              # name ("base"/"step") -> FOF text
    used_completion: bool       # definitions were approximated


def _sanitize(name: str, upper: bool) -> str:
    s = re.sub(r"[^A-Za-z0-9_]", "_", name)
    if not s or not s[0].isalpha():
        s = ("X" if upper else "x") + s
    return (s[0].upper() if upper else s[0].lower()) + s[1:]


class _Namer:
    def __init__(self):
        self.map: dict[str, str] = {}
        self.taken: set[str] = set()

    def symbol(self, name: str) -> str:
        if name not in self.map:
            base = _sanitize(name, upper=False)
            out = base
            i = 2
            while out in self.taken:
                out = f"{base}{i}"
                i += 1
            self.map[name] = out
            self.taken.add(out)
        return self.map[name]

    def sort_guard(self, name: str) -> str:
        return self.symbol("sort_" + name)


def _var(name: str) -> str:
    return _sanitize(name, upper=True)


def _term(t: Term, namer: _Namer) -> str:
    if isinstance(t, Variable):
        return _var(t.name)
    if isinstance(t, Apply):
        f = namer.symbol(t.func.name)
        if not t.args:
            return f
        return f"{f}({', '.join(_term(a, namer) for a in t.args)})"
    if isinstance(t, ElemTerm):
        return namer.symbol(str(t.value))
    raise TptpError(f"cannot export term {t} (Time machinery should be eliminated)")


def _formula(f: Formula, namer: _Namer) -> str:
    if isinstance(f, TrueLit):
        return "$true"
    if isinstance(f, FalseLit):
        return "$false"
    if isinstance(f, Atom):
        p = namer.symbol(f.pred.name)
        if not f.args:
            return p
        return f"{p}({', '.join(_term(a, namer) for a in f.args)})"
    if isinstance(f, Eq):
        return f"({_term(f.left, namer)} = {_term(f.right, namer)})"
    if isinstance(f, Not):
        return f"~({_formula(f.body, namer)})"
    if isinstance(f, And):
        return f"({_formula(f.left, namer)} & {_formula(f.right, namer)})"
    if isinstance(f, Or):
        return f"({_formula(f.left, namer)} | {_formula(f.right, namer)})"
    if isinstance(f, Implies):
        return f"({_formula(f.left, namer)} => {_formula(f.right, namer)})"
    if isinstance(f, Iff):
        return f"({_formula(f.left, namer)} <=> {_formula(f.right, namer)})"
    if isinstance(f, Forall):
        guard = namer.sort_guard(f.var.sort.name)
        return f"(! [{_var(f.var.name)}] : ({guard}({_var(f.var.name)}) => {_formula(f.body, namer)}))"
    if isinstance(f, Exists):
        guard = namer.sort_guard(f.var.sort.name)
        return f"(? [{_var(f.var.name)}] : ({guard}({_var(f.var.name)}) & {_formula(f.body, namer)}))"
    raise TptpError(f"cannot export formula {f!r}")


def _rule_completion(rules: list[Rule], namer: _Namer) -> list[str]:
    """Clark completion per defined symbol (an approximation of the
    well-founded reading)."""
    by_symbol: dict[str, list[Rule]] = {}
    order = []
    for r in rules:
        name = r.head_symbol.name
        if name not in by_symbol:
            by_symbol[name] = []
            order.append(name)
        by_symbol[name].append(r)
    out = []
    for name in order:
        group = by_symbol[name]
        sym = group[0].head_symbol
        taken = set()
        for r in group:
            taken |= {v.name for v in r.vars}
        ys = [Variable(fresh_name(f"y{i}", taken), s) for i, s in enumerate(sym.arg_sorts)]
        if sym.is_function:
            z = Variable(fresh_name("z", taken), sym.out_sort)
        disjuncts = []
        for r in group:
            if isinstance(r.head, Atom):
                head_args = r.head.args
                eqs: Formula = TrueLit()
                for y, arg in zip(ys, head_args):
                    eq = Eq(y, arg)
                    eqs = eq if isinstance(eqs, TrueLit) else And(eqs, eq)
            else:
                head_args = r.head.left.args
                eqs = TrueLit()
                for y, arg in zip(ys, head_args):
                    eq = Eq(y, arg)
                    eqs = eq if isinstance(eqs, TrueLit) else And(eqs, eq)
                out_eq = Eq(z, r.head.right)
                eqs = out_eq if isinstance(eqs, TrueLit) else And(eqs, out_eq)
            body = eqs if isinstance(r.body, TrueLit) else (
                And(eqs, r.body) if not isinstance(eqs, TrueLit) else r.body)
            for v in reversed(r.vars):
                body = Exists(v, body)
            disjuncts.append(body)
        rhs = disjuncts[0]
        for dj in disjuncts[1:]:
            rhs = Or(rhs, dj)
        if sym.is_function:
            lhs: Formula = Eq(Apply(sym, tuple(ys)), z)
            completion: Formula = Iff(lhs, rhs)
            for v in reversed(ys + [z]):
                completion = Forall(v, completion)
        else:
            lhs = Atom(sym, tuple(ys))
            completion = Iff(lhs, rhs)
            for v in reversed(ys):
                completion = Forall(v, completion)
        out.append(_formula(completion, namer))
    return out


def _theory_axioms(theory: Theory, namer: _Namer):
    axioms = []
    used_completion = False
    for i, s in enumerate(theory.sentences):
        axioms.append((f"sentence_{i + 1}", _formula(s, namer)))
    rules = []
    for d in theory.definitions:
        rules.extend(d.rules)
    if rules:
        used_completion = True
        for i, comp in enumerate(_rule_completion(rules, namer)):
            axioms.append((f"definition_completion_{i + 1}", comp))
    return axioms, used_completion


def _sort_axioms(voc: Vocabulary, namer: _Namer):
    axioms = []
    for sort in voc.sorts:
        guard = namer.sort_guard(sort.name)
        axioms.append((f"sort_{_sanitize(sort.name, False)}_nonempty",
                       f"(? [X] : {guard}(X))"))
    for sym in voc.symbols:
        if sym.is_function:
            fname = namer.symbol(sym.name)
            if not sym.arg_sorts:
                axioms.append((f"typing_{fname}",
                               f"{namer.sort_guard(sym.out_sort.name)}({fname})"))
            else:
                vs = [f"X{i}" for i in range(len(sym.arg_sorts))]
                guards = " & ".join(f"{namer.sort_guard(s.name)}({v})"
                                    for v, s in zip(vs, sym.arg_sorts))
                app = f"{fname}({', '.join(vs)})"
                axioms.append((f"typing_{fname}",
                               f"(! [{', '.join(vs)}] : (({guards}) => {namer.sort_guard(sym.out_sort.name)}({app})))"))
    return axioms


def export_induction_obligations(t, prop: Formula) -> TptpObligations:
    """Emit the base/step FOF problems for proving ``prop`` by induction."""
    from .inference import Derivation, derive as _derive
    d = t if isinstance(t, Derivation) else _derive(t)
    cls = classify(prop)
    problems: dict[str, str] = {}
    if cls.kind is SentenceKind.SINGLE_STATE:
        now = time_eliminate(prop, d.derived)
        nxt = time_eliminate(shift_to_next(prop, cls.time_var), d.derived)
        base_text, comp_base = _build(
            "Base case: the initial theory entails the property at state 0",
            d.initial, d.derived.single_state, now, extra=())
        step_text, comp_step = _build(
            "Induction step: transition theory plus the property entail its next-state form",
            d.transition, d.derived.bistate, nxt, extra=(now,))
        problems["base"] = base_text
        problems["step"] = step_text
        return TptpObligations(problems, comp_base or comp_step)
    if cls.kind is SentenceKind.BISTATE:
        now = time_eliminate(prop, d.derived)
        text, comp = _build(
            "Bistate property: the transition theory entails it",
            d.transition, d.derived.bistate, now, extra=())
        problems["step"] = text
        return TptpObligations(problems, comp)
    raise TptpError(f"property is {cls.kind.value}; need universal single-state or bistate")


def _build(title: str, theory: Theory, voc: Vocabulary,
                     conjecture: Formula, extra) -> tuple[str, bool]:
    namer = _Namer()
    axioms, used_completion = _theory_axioms(theory, namer)
    for i, f in enumerate(extra):
        axioms.append((f"hypothesis_{i + 1}", _formula(f, namer)))
    conj = _formula(conjecture, namer)
    lines = [f"% {title}"]
    if used_completion:
        lines.append("% NOTE: inductive definitions are approximated by their completion;")
        lines.append("% this is sound for proving but weaker than the well-founded reading.")
    for name, body in _sort_axioms(voc, namer):
        lines.append(f"fof({name}, axiom, {body}).")
    for name, body in axioms:
        lines.append(f"fof({name}, axiom, {body}).")
    lines.append(f"fof(goal, conjecture, {conj}).")
    return "\n".join(lines) + "\n", used_completion
