"""Three-valued formula evaluation over partial structures.

Conjunction/disjunction and the quantifiers take min/max over the truth
order, negation the involution; implication and equivalence desugar at the
value level.  An atom over an undefined function application is unknown,
never an error (keeps evaluation monotone in the precision order).

Bounded-Time convention: when the structure bounds Time to 0..n, a
quantified Time variable ranges only over points from which every Succ
application inside the scope stays in range (single-state sentences range
over 0..n, bistate over 0..n-1).
"""

from __future__ import annotations

from .syntax import (
    And, Apply, Atom, ElemTerm, Eq, Exists, FalseLit, Forall, Formula, Iff,
    Implies, InitTerm, Not, Or, SuccTerm, Term, TrueLit, Variable,
    formula_terms,
)
from .structure import PartialStructure
from .truth import FALSE, TRUE, UNKNOWN, TruthValue, from_bool, tv_and, tv_or


def succ_depth(f: Formula, var_name: str) -> int:
    """Maximum Succ-nesting applied to a variable anywhere in the formula."""
    best = 0
    for t in formula_terms(f):
        d = 0
        while isinstance(t, SuccTerm):
            d += 1
            t = t.arg
        if d > best and isinstance(t, Variable) and t.name == var_name:
            best = d
    return best


def time_range(struct: PartialStructure, depth: int) -> tuple:
    dom = struct.domain("Time")
    if depth == 0:
        return dom
    return dom[: max(0, len(dom) - depth)]


def eval_term(t: Term, struct: PartialStructure, env: dict):
    """Evaluate to a domain element, or None when undefined."""
    if isinstance(t, Variable):
        return env[t.name]
    if isinstance(t, ElemTerm):
        return t.value
    if isinstance(t, InitTerm):
        return 0
    if isinstance(t, SuccTerm):
        v = eval_term(t.arg, struct, env)
        if v is None:
            return None
        nxt = v + 1
        if struct.has_domain("Time") and nxt not in struct.domains["Time"]:
            return None
        return nxt
    if isinstance(t, Apply):
        args = []
        for a in t.args:
            v = eval_term(a, struct, env)
            if v is None:
                return None
            args.append(v)
        return struct.func_value(t.func.name, tuple(args))
    raise TypeError(f"unknown term {t!r}")


def kleene_eval(f: Formula, struct: PartialStructure, env: dict | None = None) -> TruthValue:
    env = env or {}
    return _eval(f, struct, env)


def _eval(f: Formula, struct: PartialStructure, env: dict) -> TruthValue:
    if isinstance(f, TrueLit):
        return TRUE
    if isinstance(f, FalseLit):
        return FALSE
    if isinstance(f, Atom):
        args = []
        for a in f.args:
            v = eval_term(a, struct, env)
            if v is None:
                return UNKNOWN
            args.append(v)
        return struct.pred_value(f.pred.name, tuple(args))
    if isinstance(f, Eq):
        left = eval_term(f.left, struct, env)
        if left is None:
            return UNKNOWN
        right = eval_term(f.right, struct, env)
        if right is None:
            return UNKNOWN
        return from_bool(left == right)
    if isinstance(f, Not):
        return _eval(f.body, struct, env).inverse()
    if isinstance(f, And):
        left = _eval(f.left, struct, env)
        if left is FALSE:
            return FALSE
        return tv_and(left, _eval(f.right, struct, env))
    if isinstance(f, Or):
        left = _eval(f.left, struct, env)
        if left is TRUE:
            return TRUE
        return tv_or(left, _eval(f.right, struct, env))
    if isinstance(f, Implies):
        left = _eval(f.left, struct, env)
        if left is FALSE:
            return TRUE
        return tv_or(left.inverse(), _eval(f.right, struct, env))
    if isinstance(f, Iff):
        left = _eval(f.left, struct, env)
        right = _eval(f.right, struct, env)
        return tv_or(tv_and(left, right), tv_and(left.inverse(), right.inverse()))
    if isinstance(f, (Forall, Exists)):
        if f.var.sort.is_time:
            dom = time_range(struct, succ_depth(f.body, f.var.name))
        else:
            dom = struct.domain(f.var.sort)
        out = TRUE if isinstance(f, Forall) else FALSE
        prev = env.get(f.var.name, _MISSING)
        for d in dom:
            env[f.var.name] = d
            v = _eval(f.body, struct, env)
            if isinstance(f, Forall):
                if v is FALSE:
                    out = FALSE
                    break
                out = tv_and(out, v)
            else:
                if v is TRUE:
                    out = TRUE
                    break
                out = tv_or(out, v)
        if prev is _MISSING:
            env.pop(f.var.name, None)
        else:
            env[f.var.name] = prev
        return out
    raise TypeError(f"unknown formula {f!r}")


_MISSING = object()
