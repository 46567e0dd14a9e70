"""Grounding: instantiate theories over finite structures.

Ground formulas are nested tuples over ground-atom keys:

    ("1",) / ("0",) / ("u",)          constants (the "u" leaf marks values
                                      unknowable in this structure, e.g. a
                                      Succ application out of range)
    ("p", name, args)                 a predicate atom
    ("f", name, args, value)          a function graph atom
    ("not", g) / ("and", gs) / ("or", gs)

Two modes: in "solve" mode atoms undecided by the structure stay symbolic so
a solver can branch on them; in "eval" mode they collapse to the "u" leaf so
the result reflects exactly the given partial structure.  Atoms of symbols
defined by the definition under instantiation always stay symbolic.

Nested function applications are flattened through their graphs: an atom
P(f(x)) grounds to a disjunction over the possible values of f(x), each
guarded by the corresponding graph atom.

Bounded-Time convention: quantified (and rule) Time variables range only
over points from which every Succ application stays in range.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .kleene import succ_depth
from .structure import PartialStructure
from .syntax import (
    And, Apply, Atom, Category, Definition, ElemTerm, Eq, Exists, FalseLit,
    Forall, Formula, Iff, Implies, InitTerm, Not, Or, Rule, SuccTerm, Term,
    Theory, TrueLit, Variable,
)
from .truth import FALSE, TRUE, UNKNOWN, TruthValue, from_bool

TRUE_G = ("1",)
FALSE_G = ("0",)
U_G = ("u",)


class GroundingError(Exception):
    pass


class UnboundedSort(GroundingError):
    def __init__(self, sort_name: str):
        self.sort_name = sort_name
        super().__init__(f"sort {sort_name!r} has no finite domain here")


def g_not(x):
    if x == TRUE_G:
        return FALSE_G
    if x == FALSE_G:
        return TRUE_G
    if x == U_G:
        return U_G
    if x[0] == "not":
        return x[1]
    return ("not", x)


def g_and(items) -> tuple:
    flat = []
    for x in items:
        if x == FALSE_G:
            return FALSE_G
        if x == TRUE_G:
            continue
        if x[0] == "and":
            flat.extend(x[1])
        else:
            flat.append(x)
    if not flat:
        return TRUE_G
    if len(flat) == 1:
        return flat[0]
    return ("and", tuple(flat))


def g_or(items) -> tuple:
    flat = []
    for x in items:
        if x == TRUE_G:
            return TRUE_G
        if x == FALSE_G:
            continue
        if x[0] == "or":
            flat.extend(x[1])
        else:
            flat.append(x)
    if not flat:
        return FALSE_G
    if len(flat) == 1:
        return flat[0]
    return ("or", tuple(flat))


def geval(g, valuation) -> TruthValue:
    """Three-valued evaluation of a ground formula.

    ``valuation`` maps atom keys to a TruthValue (UNKNOWN for unassigned).
    """
    tag = g[0]
    if tag == "1":
        return TRUE
    if tag == "0":
        return FALSE
    if tag == "u":
        return UNKNOWN
    if tag == "p" or tag == "f":
        return valuation(g)
    if tag == "not":
        return geval(g[1], valuation).inverse()
    if tag == "and":
        out = TRUE
        for x in g[1]:
            v = geval(x, valuation)
            if v is FALSE:
                return FALSE
            if v is UNKNOWN:
                out = UNKNOWN
        return out
    if tag == "or":
        out = FALSE
        for x in g[1]:
            v = geval(x, valuation)
            if v is TRUE:
                return TRUE
            if v is UNKNOWN:
                out = UNKNOWN
        return out
    raise TypeError(f"bad ground formula {g!r}")


def atoms_of(g, into: set):
    tag = g[0]
    if tag in ("p", "f"):
        into.add(g)
    elif tag == "not":
        atoms_of(g[1], into)
    elif tag in ("and", "or"):
        for x in g[1]:
            atoms_of(x, into)
    return into


# ---------------------------------------------------------------------------

class Grounder:
    """Shared instantiation machinery; one instance per (structure, mode)."""

    def __init__(self, struct: PartialStructure, mode: str, defined: frozenset[str]):
        assert mode in ("solve", "eval")
        self.struct = struct
        self.mode = mode
        self.defined = defined
        self.produced_unknown = False

    # -- domains -----------------------------------------------------------

    def domain(self, sort) -> tuple:
        name = sort if isinstance(sort, str) else sort.name
        if not self.struct.has_domain(name):
            raise UnboundedSort(name)
        return self.struct.domains[name]

    def var_range(self, var: Variable, scope) -> tuple:
        dom = self.domain(var.sort)
        if var.sort.is_time:
            depth = max(succ_depth(s, var.name) for s in scope)
            if depth:
                dom = dom[: max(0, len(dom) - depth)]
        return dom

    # -- terms -------------------------------------------------------------

    def term_alts(self, t: Term, env: dict) -> list:
        """Alternatives [(guard, value)]; value None marks an undefined term."""
        if isinstance(t, Variable):
            return [(TRUE_G, env[t.name])]
        if isinstance(t, ElemTerm):
            return [(TRUE_G, t.value)]
        if isinstance(t, InitTerm):
            return [(TRUE_G, 0)]
        if isinstance(t, SuccTerm):
            out = []
            time_dom = self.domain("Time")
            for guard, v in self.term_alts(t.arg, env):
                if v is None:
                    out.append((guard, None))
                elif v + 1 in time_dom:
                    out.append((guard, v + 1))
                else:
                    out.append((guard, None))
            return out
        if isinstance(t, Apply):
            return self._apply_alts(t, env)
        raise TypeError(f"unknown term {t!r}")

    def _apply_alts(self, t: Apply, env: dict) -> list:
        combos = [(TRUE_G, ())]
        for a in t.args:
            nxt = []
            for guard, vals in combos:
                for g2, v in self.term_alts(a, env):
                    nxt.append((g_and((guard, g2)), vals + (v,)))
            combos = nxt
        out = []
        fname = t.func.name
        for guard, args in combos:
            if any(v is None for v in args):
                out.append((guard, None))
                continue
            if fname in self.defined:
                for v in self.domain(t.func.out_sort):
                    out.append((g_and((guard, ("f", fname, args, v))), v))
                continue
            known = self.struct.func_value(fname, args)
            if known is not None:
                out.append((guard, known))
            elif self.mode == "solve":
                for v in self.domain(t.func.out_sort):
                    out.append((g_and((guard, ("f", fname, args, v))), v))
            else:
                self.produced_unknown = True
                out.append((g_and((guard, U_G)), None))
        return out

    # -- formulas ----------------------------------------------------------

    def atom(self, f: Atom, env: dict) -> tuple:
        combos = [(TRUE_G, ())]
        for a in f.args:
            nxt = []
            for guard, vals in combos:
                for g2, v in self.term_alts(a, env):
                    nxt.append((g_and((guard, g2)), vals + (v,)))
            combos = nxt
        parts = []
        name = f.pred.name
        for guard, args in combos:
            if any(v is None for v in args):
                parts.append(g_and((guard, U_G)))
                continue
            if name in self.defined:
                parts.append(g_and((guard, ("p", name, args))))
                continue
            known = self.struct.pred_value(name, args)
            if known is TRUE:
                parts.append(guard)
            elif known is FALSE:
                parts.append(g_and((guard, FALSE_G)))
            elif self.mode == "solve":
                parts.append(g_and((guard, ("p", name, args))))
            else:
                self.produced_unknown = True
                parts.append(g_and((guard, U_G)))
        return g_or(parts)

    def eq(self, f: Eq, env: dict) -> tuple:
        parts = []
        for gl, vl in self.term_alts(f.left, env):
            for gr, vr in self.term_alts(f.right, env):
                if vl is None or vr is None:
                    parts.append(g_and((gl, gr, U_G)))
                else:
                    parts.append(g_and((gl, gr, TRUE_G if vl == vr else FALSE_G)))
        return g_or(parts)

    def formula(self, f: Formula, env: dict) -> tuple:
        if isinstance(f, TrueLit):
            return TRUE_G
        if isinstance(f, FalseLit):
            return FALSE_G
        if isinstance(f, Atom):
            return self.atom(f, env)
        if isinstance(f, Eq):
            return self.eq(f, env)
        if isinstance(f, Not):
            return g_not(self.formula(f.body, env))
        if isinstance(f, And):
            return g_and((self.formula(f.left, env), self.formula(f.right, env)))
        if isinstance(f, Or):
            return g_or((self.formula(f.left, env), self.formula(f.right, env)))
        if isinstance(f, Implies):
            return g_or((g_not(self.formula(f.left, env)), self.formula(f.right, env)))
        if isinstance(f, Iff):
            left = self.formula(f.left, env)
            right = self.formula(f.right, env)
            return g_or((g_and((left, right)), g_and((g_not(left), g_not(right)))))
        if isinstance(f, (Forall, Exists)):
            parts = []
            prev = env.get(f.var.name)
            had = f.var.name in env
            for d in self.var_range(f.var, (f.body,)):
                env[f.var.name] = d
                parts.append(self.formula(f.body, env))
            if had:
                env[f.var.name] = prev
            else:
                env.pop(f.var.name, None)
            return g_and(parts) if isinstance(f, Forall) else g_or(parts)
        raise TypeError(f"unknown formula {f!r}")


# ---------------------------------------------------------------------------
# Definitions

@dataclass
class GroundDefinition:
    rules: list            # [(head_key, body ground formula)]
    defined_names: frozenset[str]
    defined_keys: set      # every ground atom key the definition speaks about
    exact: bool            # bodies free of "u" leaves (opens fully decided)


def _head_instances(grounder: Grounder, rule: Rule, env: dict):
    """Yield (head_key, extra_guard) pairs; guards join the rule body."""
    head = rule.head
    if isinstance(head, Atom):
        combos = [(TRUE_G, ())]
        for a in head.args:
            nxt = []
            for guard, vals in combos:
                for g2, v in grounder.term_alts(a, env):
                    nxt.append((g_and((guard, g2)), vals + (v,)))
            combos = nxt
        for guard, args in combos:
            if any(v is None for v in args):
                continue
            yield ("p", head.pred.name, args), guard
    elif isinstance(head, Eq) and isinstance(head.left, Apply):
        fname = head.left.func.name
        combos = [(TRUE_G, ())]
        for a in head.left.args:
            nxt = []
            for guard, vals in combos:
                for g2, v in grounder.term_alts(a, env):
                    nxt.append((g_and((guard, g2)), vals + (v,)))
            combos = nxt
        for guard, args in combos:
            if any(v is None for v in args):
                continue
            for g2, v in grounder.term_alts(head.right, env):
                if v is None:
                    continue
                yield ("f", fname, args, v), g_and((guard, g2))
    else:
        raise GroundingError(f"malformed rule head {head}")


def instantiate_definition(defn: Definition, struct: PartialStructure, mode: str,
                           extra_defined: frozenset[str] = frozenset()) -> GroundDefinition:
    defined = frozenset(s.name for s in defn.defined_symbols) | extra_defined
    grounder = Grounder(struct, mode, defined)
    rules = []
    for rule in defn.rules:
        scope = (rule.head, rule.body)
        ranges = []
        for v in rule.vars:
            ranges.append(grounder.var_range(v, scope))
        for combo in itertools.product(*ranges):
            env = {v.name: d for v, d in zip(rule.vars, combo)}
            body = grounder.formula(rule.body, env)
            for head_key, guard in _head_instances(grounder, rule, env):
                b = g_and((guard, body))
                if b != FALSE_G:
                    rules.append((head_key, b))
    defined_keys = _defined_grid_keys(defn, struct)
    for head_key, _ in rules:
        defined_keys.add(head_key)
    return GroundDefinition(rules, frozenset(s.name for s in defn.defined_symbols),
                            defined_keys, not grounder.produced_unknown)


def _defined_grid_keys(defn: Definition, struct: PartialStructure) -> set:
    """Every ground atom a definition determines, including never-derivable ones."""
    keys = set()
    for sym in defn.defined_symbols:
        if sym.is_predicate:
            for tup in struct.grid(sym.arg_sorts):
                keys.add(("p", sym.name, tup))
        else:
            out_dom = struct.domain(sym.out_sort)
            for tup in struct.grid(sym.arg_sorts):
                for v in out_dom:
                    keys.add(("f", sym.name, tup, v))
    return keys


def order_definitions(definitions) -> list:
    """Topologically order ground definitions so dependencies come first."""
    n = len(definitions)
    defined_by = {}
    for i, gd in enumerate(definitions):
        for name in gd.defined_names:
            defined_by[name] = i
    deps = [set() for _ in range(n)]
    for i, gd in enumerate(definitions):
        leaves = set()
        for _, body in gd.rules:
            atoms_of(body, leaves)
        for key in leaves:
            name = key[1]
            j = defined_by.get(name)
            if j is not None and j != i:
                deps[i].add(j)
    order, seen, visiting = [], set(), set()

    def visit(i):
        if i in seen:
            return
        if i in visiting:
            raise GroundingError("cyclic dependency between separate definitions")
        visiting.add(i)
        for j in sorted(deps[i]):
            visit(j)
        visiting.discard(i)
        seen.add(i)
        order.append(i)

    for i in range(n):
        visit(i)
    return [definitions[i] for i in order]


# ---------------------------------------------------------------------------
# Whole theories (solve mode)

@dataclass
class GroundTheory:
    theory: Theory
    struct: PartialStructure
    constraints: list                 # ground formulas that must be true
    definitions: list                 # GroundDefinition, dependency-ordered
    open_atoms: list                  # branchable atom keys, canonical order
    func_cells: list                  # (fname, args, [graph keys]) needing exactly-one
    commitments: list                 # (defined atom key, required TruthValue)
    unsat: bool = False

    @property
    def defined_keys(self) -> set:
        out = set()
        for gd in self.definitions:
            out |= gd.defined_keys
        return out


def ground(theory: Theory, struct: PartialStructure) -> GroundTheory:
    """Instantiate a theory for model expansion over ``struct``."""
    voc = theory.vocabulary
    defined_names = set()
    for d in theory.definitions:
        for sym in d.defined_symbols:
            defined_names.add(sym.name)
    defined_names = frozenset(defined_names)

    grounder = Grounder(struct, "solve", defined_names)
    constraints = []
    unsat = False
    for s in theory.sentences:
        g = grounder.formula(s, {})
        if g == FALSE_G:
            unsat = True
        # a grounded universal is a conjunction; keep its parts separate so
        # propagation and unsat reporting work per instantiation
        parts = g[1] if g[0] == "and" else (g,)
        for part in parts:
            if part != TRUE_G:
                constraints.append(part)

    ground_defs = [instantiate_definition(d, struct, "solve") for d in theory.definitions]
    ground_defs = order_definitions(ground_defs)
    all_defined_keys = set()
    for gd in ground_defs:
        all_defined_keys |= gd.defined_keys

    open_atoms = []
    func_cells = []
    commitments = []
    for sym in voc.symbols:
        if sym.category is Category.LTC:
            continue
        if sym.is_predicate:
            table = struct.pred_table(sym.name)
            for tup in struct.grid(sym.arg_sorts):
                key = ("p", sym.name, tup)
                v = table.value(tup)
                if sym.name in defined_names:
                    if v is not UNKNOWN:
                        commitments.append((key, v))
                elif v is UNKNOWN:
                    open_atoms.append(key)
        else:
            table = struct.func_table(sym.name)
            out_dom = struct.domain(sym.out_sort)
            for tup in struct.grid(sym.arg_sorts):
                v = table.value(tup)
                if sym.name in defined_names:
                    if v is not None:
                        for out in out_dom:
                            commitments.append((("f", sym.name, tup, out), from_bool(out == v)))
                elif v is None:
                    keys = [("f", sym.name, tup, out) for out in out_dom]
                    open_atoms.extend(keys)
                    func_cells.append((sym.name, tup, keys))
    return GroundTheory(theory, struct, constraints, ground_defs, open_atoms,
                        func_cells, commitments, unsat)
