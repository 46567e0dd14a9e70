"""Model expansion: enumerate two-valued expansions of a partial structure
satisfying a theory, plus branch-and-bound minimization of a ground term.

Backtracking search over the open ground atoms in interned order (so the
enumeration is deterministic), with unit propagation on clause-shaped ground
constraints.  Symbols defined by a definition are never branched on: once the
open atoms a definition depends on are decided, its well-founded model fixes
the defined atoms, and a three-valued outcome prunes the branch.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .ground import FALSE_G, GroundTheory, TRUE_G, atoms_of, geval, ground
from .structure import FuncTable, PartialStructure, PredTable
from .syntax import Category, Theory
from .truth import FALSE, TRUE, UNKNOWN
from .wellfounded import well_founded_model

ALL = None  # nbmodels sentinel


class SolverError(Exception):
    pass


class Unsat(SolverError):
    pass


def _exactly_one(keys) -> tuple:
    at_least = ("or", tuple(keys)) if len(keys) > 1 else keys[0]
    pairs = [("not", ("and", (a, b))) for a, b in itertools.combinations(keys, 2)]
    return ("and", tuple([at_least] + pairs)) if pairs else at_least


def _to_clauses(g, budget: int = 256):
    """CNF clauses [(key, polarity)], or None when not clause-convertible."""
    def nnf(x, neg):
        tag = x[0]
        if tag == "1":
            return FALSE_G if neg else TRUE_G
        if tag == "0":
            return TRUE_G if neg else FALSE_G
        if tag == "u":
            return None
        if tag in ("p", "f"):
            return ("lit", x, not neg)
        if tag == "not":
            return nnf(x[1], not neg)
        if tag in ("and", "or"):
            subs = []
            for y in x[1]:
                s = nnf(y, neg)
                if s is None:
                    return None
                subs.append(s)
            conj = (tag == "and") != neg
            return ("conj" if conj else "disj", tuple(subs))
        return None

    n = nnf(g, False)
    if n is None:
        return None

    def clauses(x):
        # x in {TRUE_G, FALSE_G, lit, conj, disj}
        if x == TRUE_G:
            return []
        if x == FALSE_G:
            return [[]]
        if x[0] == "lit":
            return [[(x[1], x[2])]]
        if x[0] == "conj":
            out = []
            for y in x[1]:
                cs = clauses(y)
                if cs is None:
                    return None
                out.extend(cs)
                if len(out) > budget:
                    return None
            return out
        # disjunction: distribute
        out = [[]]
        for y in x[1]:
            cs = clauses(y)
            if cs is None:
                return None
            out = [a + b for a in out for b in cs]
            if len(out) > budget:
                return None
        return out

    return clauses(n)


@dataclass
class _DefTask:
    gdef: object
    dep_opens: set       # open atom keys the bodies read
    dep_defined: set     # other definitions' atom keys the bodies read
    func_cells: dict     # (name, args) -> [graph keys]; defined functions only


class _Search:
    def __init__(self, gt: GroundTheory, nbmodels, stop_flag):
        self.gt = gt
        self.nbmodels = nbmodels
        self.stop = stop_flag or (lambda: False)
        self.assign: dict = {}
        self.models: list[PartialStructure] = []
        self.commit_by_key = dict(gt.commitments)

        self.constraints = list(gt.constraints)
        for _, _, keys in gt.func_cells:
            self.constraints.append(_exactly_one(keys))

        self.clauses = []
        self.opaque = []
        for c in self.constraints:
            cl = _to_clauses(c)
            if cl is None:
                self.opaque.append(c)
            else:
                self.clauses.extend(cl)
        # the completion of each definition holds in every accepted model
        # (models equal the well-founded model, a supported one), so its
        # clause-convertible parts are safe propagation-only redundancy;
        # they let conflicts involving defined atoms fire before the
        # well-founded computation runs
        for gdef in gt.definitions:
            by_head: dict = {}
            for head, body in gdef.rules:
                by_head.setdefault(head, []).append(body)
            derivable = set(by_head)
            for head, bodies in by_head.items():
                for body in bodies:
                    cl = _to_clauses(("or", (("not", body), head)))
                    if cl is not None:
                        self.clauses.extend(cl)
                only_if = ("or", (("not", head),) + tuple(bodies))
                cl = _to_clauses(only_if, budget=64)
                if cl is not None:
                    self.clauses.extend(cl)
            for key in gdef.defined_keys:
                if key not in derivable:
                    self.clauses.append([(key, False)])  # no rule: always false

        open_set = set(gt.open_atoms)
        self.tasks: list[_DefTask] = []
        relevant: set = set()
        for clause in self.clauses:
            relevant.update(key for key, _ in clause)
        for c in self.opaque:
            atoms_of(c, relevant)
        for gdef in gt.definitions:
            leaves: set = set()
            for _, body in gdef.rules:
                atoms_of(body, leaves)
            dep_opens = {k for k in leaves if k in open_set}
            dep_defined = {k for k in leaves if k not in open_set and k not in gdef.defined_keys}
            relevant |= dep_opens
            cells: dict = {}
            for key in gdef.defined_keys:
                if key[0] == "f":
                    cells.setdefault((key[1], key[2]), []).append(key)
            self.tasks.append(_DefTask(gdef, dep_opens, dep_defined, cells))
        # branch constrained atoms first so conflicts fire before the search
        # descends into atoms nothing constrains; the output is re-sorted to
        # the atom-table order afterwards
        self.branch_order = ([k for k in gt.open_atoms if k in relevant]
                             + [k for k in gt.open_atoms if k not in relevant])

    # -- propagation --------------------------------------------------------

    def value(self, key):
        return self.assign.get(key, UNKNOWN)

    def propagate(self, trail) -> bool:
        """Unit propagation; returns False on conflict."""
        changed = True
        while changed:
            changed = False
            for clause in self.clauses:
                n_unassigned = 0
                unit = None
                satisfied = False
                for key, pol in clause:
                    v = self.assign.get(key)
                    if v is None:
                        n_unassigned += 1
                        unit = (key, pol)
                    elif (v is TRUE) == pol:
                        satisfied = True
                        break
                if satisfied:
                    continue
                if n_unassigned == 0:
                    return False
                if n_unassigned == 1:
                    key, pol = unit
                    self.assign[key] = TRUE if pol else FALSE
                    trail.append(key)
                    changed = True
        for c in self.opaque:
            if geval(c, self.value) is FALSE:
                return False
        return True

    def run_definitions(self, trail, done: list) -> bool:
        """Evaluate every definition whose dependencies are decided."""
        progressed = True
        while progressed:
            progressed = False
            for i, task in enumerate(self.tasks):
                if done[i]:
                    continue
                if any(k not in self.assign for k in task.dep_opens):
                    continue
                if any(k not in self.assign for k in task.dep_defined):
                    continue
                wf = well_founded_model(task.gdef, self.value)
                if any(v is UNKNOWN for v in wf.values()):
                    return False
                for cell_keys in task.func_cells.values():
                    if sum(1 for k in cell_keys if wf[k] is TRUE) != 1:
                        return False
                for key, v in wf.items():
                    want = self.commit_by_key.get(key)
                    if want is not None and want is not v:
                        return False
                    prev = self.assign.get(key)
                    if prev is not None and prev is not v:
                        return False
                    if prev is None:
                        self.assign[key] = v
                        trail.append(key)
                done[i] = True
                progressed = True
                if not self.propagate(trail):
                    return False
        return True

    # -- search -------------------------------------------------------------

    def solve(self):
        trail: list = []
        if not self.propagate(trail):
            return self.models
        self._search(0, [False] * len(self.tasks))
        self.models.sort(key=lambda mv: mv[1])
        return [m for m, _ in self.models]

    def _full(self) -> bool:
        return self.nbmodels is not None and len(self.models) >= self.nbmodels

    def _search(self, idx: int, done: list):
        if self._full() or self.stop():
            return
        opens = self.branch_order
        while idx < len(opens) and opens[idx] in self.assign:
            idx += 1
        if idx >= len(opens):
            trail: list = []
            ok = self.run_definitions(trail, list(done))
            if ok and self._accept():
                vector = tuple(self.assign[k] is TRUE for k in self.gt.open_atoms)
                self.models.append((self._decode(), vector))
            for key in trail:
                del self.assign[key]
            return
        key = opens[idx]
        for value in (FALSE, TRUE):
            if self._full() or self.stop():
                return
            trail = [key]
            self.assign[key] = value
            done2 = list(done)
            if self.propagate(trail) and self.run_definitions(trail, done2):
                self._search(idx + 1, done2)
            for k in trail:
                del self.assign[k]

    def _accept(self) -> bool:
        for c in self.constraints:
            if geval(c, self.value) is not TRUE:
                return False
        for key, want in self.gt.commitments:
            v = self.assign.get(key)
            if v is not None and v is not want:
                return False
        return True

    def _decode(self) -> PartialStructure:
        struct = self.gt.struct
        voc = self.gt.theory.vocabulary
        preds: dict = {}
        funcs: dict = {}
        for sym in voc.symbols:
            if sym.category is Category.LTC:
                continue
            if sym.is_predicate:
                entries = {}
                table = struct.pred_table(sym.name)
                for tup in struct.grid(sym.arg_sorts):
                    v = table.value(tup)
                    if v is UNKNOWN:
                        v = self.assign[("p", sym.name, tup)]
                    if v is TRUE:
                        entries[tup] = TRUE
                preds[sym.name] = PredTable(entries, FALSE)
            else:
                entries = {}
                table = struct.func_table(sym.name)
                out_dom = struct.domain(sym.out_sort)
                for tup in struct.grid(sym.arg_sorts):
                    v = table.value(tup)
                    if v is None:
                        for out in out_dom:
                            if self.assign.get(("f", sym.name, tup, out)) is TRUE:
                                v = out
                                break
                    if v is None:
                        raise SolverError(f"no value decided for {sym.name}{tup}")
                    entries[tup] = v
                funcs[sym.name] = FuncTable(entries)
        return PartialStructure(voc, dict(struct.domains), preds, funcs)


def model_expand(theory: Theory, struct: PartialStructure, nbmodels=ALL,
                 stop_flag=None) -> list[PartialStructure]:
    """Up to ``nbmodels`` two-valued models of ``theory`` expanding ``struct``
    (all of them when ``nbmodels`` is None).

    With ``nbmodels=None`` the result is exactly the model set in
    lexicographic atom-table order (false before true); with a cap the
    returned subset is deterministic and sorted the same way."""
    gt = ground(theory, struct)
    if gt.unsat:
        return []
    if nbmodels is not None and nbmodels < 1:
        raise SolverError("nbmodels must be >= 1, or None for all")
    return _Search(gt, nbmodels, stop_flag).solve()


# ---------------------------------------------------------------------------
# Minimization

def _int_domain(struct: PartialStructure, sort) -> list:
    dom = struct.domain(sort)
    if not all(isinstance(v, int) for v in dom):
        raise SolverError(f"cost sort {sort.name!r} is not integer-valued")
    return list(dom)


def minimize(theory: Theory, struct: PartialStructure, cost_term, nbmodels=1,
             stop_flag=None):
    """Minimum of ``cost_term`` over all models, with witnesses attaining it.

    Branch and bound: repeatedly ask for one model under a strengthening
    ``cost < best`` constraint, expressed as a disjunction of equalities over
    the cost sort's smaller elements.
    """
    from .kleene import eval_term
    from .syntax import ElemTerm, Eq, Or as OrF, FalseLit

    sort = cost_term.sort_of()
    dom = _int_domain(struct, sort)

    def bound_sentence(strict_upper: int):
        smaller = [v for v in dom if v < strict_upper]
        if not smaller:
            return FalseLit()
        f = Eq(cost_term, ElemTerm(smaller[0], sort))
        for v in smaller[1:]:
            f = OrF(f, Eq(cost_term, ElemTerm(v, sort)))
        return f

    def with_extra(extra):
        return Theory(theory.name, theory.vocabulary,
                      theory.sentences + tuple(extra), theory.definitions)

    best = None
    while True:
        if stop_flag and stop_flag():
            break
        t = theory if best is None else with_extra([bound_sentence(best)])
        found = model_expand(t, struct, 1, stop_flag)
        if not found:
            break
        value = eval_term(cost_term, found[0], {})
        if value is None:
            raise SolverError(f"cost term {cost_term} undefined in a model")
        best = value
    if best is None:
        raise Unsat("theory has no models expanding the structure")
    witnesses = model_expand(with_extra([_eq_sentence(cost_term, best, sort)]),
                             struct, nbmodels, stop_flag)
    return best, witnesses


def _eq_sentence(cost_term, value, sort):
    from .syntax import ElemTerm, Eq
    return Eq(cost_term, ElemTerm(value, sort))
