"""Independent oracles the tests check the engine against.

Nothing here uses the solver's search; satisfaction comes from classical
recursive evaluation or exhaustive enumeration, and the well-founded oracle
uses reduct-based stable-model checking rather than the alternating
fixpoint.
"""

from __future__ import annotations

import itertools

from ltc.ground import FALSE_G, TRUE_G
from ltc.kleene import succ_depth
from ltc.structure import FuncTable, PartialStructure, PredTable
from ltc.syntax import (
    And, Apply, Atom, Category, ElemTerm, Eq, Exists, FalseLit, Forall,
    Iff, Implies, InitTerm, Not, Or, SuccTerm, TrueLit, Variable,
)
from ltc.truth import FALSE, TRUE, UNKNOWN
from ltc.wellfounded import satisfies, well_founded_model


# ---------------------------------------------------------------------------
# Classical two-valued evaluation (no TruthValue machinery)

def classical_eval(f, struct: PartialStructure, env=None) -> bool:
    """Standard recursive FO satisfaction on a two-valued structure."""
    env = env or {}

    def term(t):
        if isinstance(t, Variable):
            return env[t.name]
        if isinstance(t, ElemTerm):
            return t.value
        if isinstance(t, InitTerm):
            return 0
        if isinstance(t, SuccTerm):
            return term(t.arg) + 1
        if isinstance(t, Apply):
            args = tuple(term(a) for a in t.args)
            v = struct.func_value(t.func.name, args)
            if v is None:
                raise ValueError(f"{t.func.name}{args} undefined in a two-valued structure")
            return v
        raise TypeError(t)

    if isinstance(f, TrueLit):
        return True
    if isinstance(f, FalseLit):
        return False
    if isinstance(f, Atom):
        args = tuple(term(a) for a in f.args)
        v = struct.pred_value(f.pred.name, args)
        if v is UNKNOWN:
            raise ValueError(f"{f.pred.name}{args} unknown in a two-valued structure")
        return v is TRUE
    if isinstance(f, Eq):
        return term(f.left) == term(f.right)
    if isinstance(f, Not):
        return not classical_eval(f.body, struct, env)
    if isinstance(f, And):
        return classical_eval(f.left, struct, env) and classical_eval(f.right, struct, env)
    if isinstance(f, Or):
        return classical_eval(f.left, struct, env) or classical_eval(f.right, struct, env)
    if isinstance(f, Implies):
        return (not classical_eval(f.left, struct, env)) or classical_eval(f.right, struct, env)
    if isinstance(f, Iff):
        return classical_eval(f.left, struct, env) == classical_eval(f.right, struct, env)
    if isinstance(f, (Forall, Exists)):
        dom = struct.domain(f.var.sort)
        if f.var.sort.is_time:
            depth = succ_depth(f.body, f.var.name)
            dom = dom[: max(0, len(dom) - depth)] if depth else dom
        results = []
        for d in dom:
            env2 = dict(env)
            env2[f.var.name] = d
            results.append(classical_eval(f.body, struct, env2))
        return all(results) if isinstance(f, Forall) else any(results)
    raise TypeError(f)


# ---------------------------------------------------------------------------
# Exhaustive enumeration of two-valued expansions

def open_cells(struct: PartialStructure):
    """(kind, symbol, cell) for every undecided table entry."""
    cells = []
    for sym in struct.vocabulary.symbols:
        if sym.category is Category.LTC:
            continue
        if sym.is_predicate:
            table = struct.pred_table(sym.name)
            for tup in struct.grid(sym.arg_sorts):
                if table.value(tup) is UNKNOWN:
                    cells.append(("p", sym, tup))
        else:
            table = struct.func_table(sym.name)
            for tup in struct.grid(sym.arg_sorts):
                if table.value(tup) is None:
                    cells.append(("f", sym, tup))
    return cells


def all_expansions(struct: PartialStructure, limit: int | None = None):
    """Every two-valued structure refining ``struct`` (generator)."""
    cells = open_cells(struct)
    choice_lists = []
    for kind, sym, tup in cells:
        if kind == "p":
            choice_lists.append([FALSE, TRUE])
        else:
            choice_lists.append(list(struct.domain(sym.out_sort)))
    count = 1
    for c in choice_lists:
        count *= len(c)
    if limit is not None and count > limit:
        raise ValueError(f"expansion space {count} exceeds limit {limit}")
    for combo in itertools.product(*choice_lists):
        preds = {k: PredTable(dict(v.entries), v.default) for k, v in struct.preds.items()}
        funcs = {k: FuncTable(dict(v.entries)) for k, v in struct.funcs.items()}
        for (kind, sym, tup), value in zip(cells, combo):
            if kind == "p":
                table = preds.setdefault(sym.name, PredTable({}, struct.pred_table(sym.name).default))
                table.entries[tup] = value
            else:
                table = funcs.setdefault(sym.name, FuncTable({}))
                table.entries[tup] = value
        yield PartialStructure(struct.vocabulary, dict(struct.domains), preds, funcs)


def brute_force_models(theory, struct: PartialStructure, limit: int = 1 << 22):
    """All two-valued expansions of ``struct`` satisfying ``theory``."""
    return [m for m in all_expansions(struct, limit) if satisfies(m, theory)]


def structures_equal(a: PartialStructure, b: PartialStructure) -> bool:
    """Pointwise three-valued equality; symbols over unbounded sorts (Time
    not interpreted) compare by the union of their listed entries."""
    if a.domains != b.domains:
        return False
    for sym in a.vocabulary.symbols:
        if sym.category is Category.LTC:
            continue
        bounded = all(s.name in a.domains for s in sym.arg_sorts)
        if sym.is_predicate:
            if bounded:
                cells = a.grid(sym.arg_sorts)
            else:
                cells = set(a.pred_table(sym.name).entries) | set(b.pred_table(sym.name).entries)
            for tup in cells:
                if a.pred_value(sym.name, tup) is not b.pred_value(sym.name, tup):
                    return False
        else:
            if bounded:
                cells = a.grid(sym.arg_sorts)
            else:
                cells = set(a.func_table(sym.name).entries) | set(b.func_table(sym.name).entries)
            for tup in cells:
                if a.func_value(sym.name, tup) != b.func_value(sym.name, tup):
                    return False
    return True


def state_key(s: PartialStructure) -> tuple:
    """Hashable canonical key of a two-valued structure."""
    parts = []
    for sym in sorted(s.vocabulary.symbols, key=lambda x: x.name):
        if sym.category is Category.LTC:
            continue
        if sym.is_predicate:
            parts.append((sym.name, tuple(sorted(
                (tup for tup in s.grid(sym.arg_sorts) if s.pred_value(sym.name, tup) is TRUE),
                key=lambda t: tuple(map(str, t))))))
        else:
            parts.append((sym.name, tuple(sorted(
                ((tup, s.func_value(sym.name, tup)) for tup in s.grid(sym.arg_sorts)),
                key=lambda kv: tuple(map(str, kv[0]))))))
    return tuple(parts)


# ---------------------------------------------------------------------------
# Reduct-based stable-model oracle for ground definitions

def _nnf(g):
    def go(x, neg):
        tag = x[0]
        if tag == "1":
            return FALSE_G if neg else TRUE_G
        if tag == "0":
            return TRUE_G if neg else FALSE_G
        if tag == "u":
            raise ValueError("oracle needs fully decided opens")
        if tag in ("p", "f"):
            return ("nlit", x) if neg else ("lit", x)
        if tag == "not":
            return go(x[1], not neg)
        if tag in ("and", "or"):
            subs = tuple(go(y, neg) for y in x[1])
            conj = (tag == "and") != neg
            return ("conj" if conj else "disj", subs)
        raise TypeError(x)
    return go(g, False)


def _eval_reduct(n, grown: set, candidate: set, defined: set, open_val) -> bool:
    """Positive defined literals read the growing set, negative ones the
    candidate (the Gelfond-Lifschitz reduct, generalized to NNF bodies)."""
    tag = n[0]
    if n == TRUE_G:
        return True
    if n == FALSE_G:
        return False
    if tag == "lit":
        key = n[1]
        if key in defined:
            return key in grown
        return open_val(key) is TRUE
    if tag == "nlit":
        key = n[1]
        if key in defined:
            return key not in candidate
        return open_val(key) is FALSE
    if tag == "conj":
        return all(_eval_reduct(y, grown, candidate, defined, open_val) for y in n[1])
    if tag == "disj":
        return any(_eval_reduct(y, grown, candidate, defined, open_val) for y in n[1])
    raise TypeError(n)


def stable_models(gdef, open_val):
    """All stable two-valued defined-atom sets (reduct fixpoint check)."""
    defined = sorted(gdef.defined_keys)
    rules = [(h, _nnf(b)) for h, b in gdef.rules]
    out = []
    for bits in itertools.product([False, True], repeat=len(defined)):
        candidate = {k for k, b in zip(defined, bits) if b}
        grown: set = set()
        changed = True
        while changed:
            changed = False
            for head, body in rules:
                if head not in grown and _eval_reduct(body, grown, candidate, set(defined), open_val):
                    grown.add(head)
                    changed = True
        if grown == candidate:
            out.append(candidate)
    return out


def wf_matches_unique_stable(gdef, open_val) -> bool:
    """For definitions with a unique total stable model, the well-founded
    model must be two-valued and equal it."""
    stables = stable_models(gdef, open_val)
    wf = well_founded_model(gdef, open_val)
    wf_true = {k for k, v in wf.items() if v is TRUE}
    wf_unknown = {k for k, v in wf.items() if v is UNKNOWN}
    if len(stables) == 1 and not wf_unknown:
        return wf_true == stables[0]
    # general soundness: wf-true atoms lie in every stable model,
    # wf-false atoms in none
    wf_false = {k for k, v in wf.items() if v is FALSE}
    for m in stables:
        if not wf_true <= m:
            return False
        if wf_false & m:
            return False
    return True


# ---------------------------------------------------------------------------
# Explicit transition graph (breadth-first planning oracle)

def brute_force_successors(derivation, state, limit: int = 1 << 20):
    """{S' | (S, S') satisfies the transition theory} by enumerating every
    candidate next state."""
    from ltc.structure import pair_states
    derived = derivation.derived
    static_names = {s.name for s in derived.static.symbols}
    template = PartialStructure(
        derived.single_state, dict(state.domains),
        {k: v for k, v in state.preds.items() if k in static_names},
        {k: v for k, v in state.funcs.items() if k in static_names})
    out = []
    for cand in all_expansions(template, limit):
        if satisfies(pair_states(state, cand, derived), derivation.transition):
            out.append(cand)
    return out


def bfs_plan_length(derivation, j, goal_state_check, max_depth: int = 12):
    """Shortest number of transitions from some initial state to a state
    satisfying ``goal_state_check`` (None when unreachable within bounds).

    Successors come from brute-force enumeration, not the solver."""
    from ltc.structure import project_state
    derived = derivation.derived
    j0 = project_state(j, derived, 0)
    inits = brute_force_models(derivation.initial, j0)
    frontier = inits
    seen = {state_key(s) for s in inits}
    for s in inits:
        if goal_state_check(s):
            return 0
    depth = 0
    while frontier and depth < max_depth:
        depth += 1
        nxt = []
        for s in frontier:
            for s2 in brute_force_successors(derivation, s):
                key = state_key(s2)
                if key in seen:
                    continue
                seen.add(key)
                if goal_state_check(s2):
                    return depth
                nxt.append(s2)
        frontier = nxt
    return None
