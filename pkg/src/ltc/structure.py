"""Finite (partial) structures, chains, and the state projections.

A partial structure interprets every sort by a finite element list and every
symbol by a three-valued table.  Predicate tables carry an explicit default
(FALSE for fully listed tables, UNKNOWN for open ones); function tables are
partial maps whose missing cells read as unknown.  A two-valued structure is
a partial structure with no unknowns and total functions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .syntax import Category, Sort, TIME, Vocabulary
from .truth import FALSE, TRUE, UNKNOWN, TruthValue, precision_le


class StructureError(Exception):
    pass


class StaticMismatch(StructureError):
    pass


@dataclass(frozen=True)
class PredTable:
    entries: dict
    default: TruthValue = FALSE

    def value(self, tup: tuple) -> TruthValue:
        return self.entries.get(tup, self.default)

    def true_tuples(self):
        return sorted((t for t, v in self.entries.items() if v is TRUE), key=_tuple_key)


@dataclass(frozen=True)
class FuncTable:
    entries: dict  # args tuple -> element; missing cells are unknown

    def value(self, tup: tuple):
        return self.entries.get(tup)


def tuple_sort_key(t: tuple):
    return tuple((0, x, "") if isinstance(x, int) else (1, 0, str(x)) for x in t)


_tuple_key = tuple_sort_key


EMPTY_PRED_UNKNOWN = PredTable({}, UNKNOWN)


@dataclass(frozen=True)
class PartialStructure:
    vocabulary: Vocabulary
    domains: dict  # sort name -> tuple of elements; Time present only when bounded
    preds: dict = field(default_factory=dict)   # name -> PredTable
    funcs: dict = field(default_factory=dict)   # name -> FuncTable

    def domain(self, sort: Sort | str) -> tuple:
        name = sort if isinstance(sort, str) else sort.name
        if name not in self.domains:
            raise StructureError(f"sort {name!r} has no interpreted domain")
        return self.domains[name]

    def has_domain(self, name: str) -> bool:
        return name in self.domains

    @property
    def time_bound(self) -> int | None:
        """Number of interpreted time points, or None when Time is unbounded."""
        if TIME in self.domains:
            return len(self.domains[TIME])
        return None

    def pred_table(self, name: str) -> PredTable:
        return self.preds.get(name, EMPTY_PRED_UNKNOWN)

    def func_table(self, name: str) -> FuncTable:
        return self.funcs.get(name, FuncTable({}))

    def pred_value(self, name: str, tup: tuple) -> TruthValue:
        return self.pred_table(name).value(tup)

    def func_value(self, name: str, tup: tuple):
        return self.func_table(name).value(tup)

    # -- completeness ------------------------------------------------------

    def grid(self, sorts: tuple[Sort, ...]):
        return itertools.product(*(self.domain(s) for s in sorts))

    def is_two_valued(self) -> bool:
        for sym in self.vocabulary.symbols:
            if sym.category is Category.LTC:
                continue
            if sym.is_predicate:
                table = self.pred_table(sym.name)
                if table.default is UNKNOWN:
                    for tup in self.grid(sym.arg_sorts):
                        if table.value(tup) is UNKNOWN:
                            return False
                elif any(v is UNKNOWN for v in table.entries.values()):
                    return False
            else:
                table = self.func_table(sym.name)
                for tup in self.grid(sym.arg_sorts):
                    if table.value(tup) is None:
                        return False
        return True

    def leq_precision(self, other: "PartialStructure") -> bool:
        """Pointwise precision comparison; requires equal domains."""
        if self.domains != other.domains:
            return False
        for sym in self.vocabulary.symbols:
            if sym.category is Category.LTC:
                continue
            if sym.is_predicate:
                mine, theirs = self.pred_table(sym.name), other.pred_table(sym.name)
                for tup in self.grid(sym.arg_sorts):
                    if not precision_le(mine.value(tup), theirs.value(tup)):
                        return False
            else:
                mine, theirs = self.func_table(sym.name), other.func_table(sym.name)
                for tup in self.grid(sym.arg_sorts):
                    v = mine.value(tup)
                    if v is not None and theirs.value(tup) != v:
                        return False
        return True

    def restrict(self, voc: Vocabulary) -> "PartialStructure":
        """Reduct to a sub-vocabulary (shared symbol and sort names)."""
        doms = {s.name: self.domains[s.name] for s in voc.sorts if s.name in self.domains}
        preds = {s.name: self.preds[s.name] for s in voc.symbols if s.name in self.preds and s.is_predicate}
        funcs = {s.name: self.funcs[s.name] for s in voc.symbols if s.name in self.funcs and s.is_function}
        return PartialStructure(voc, doms, preds, funcs)

    def equal_on(self, other: "PartialStructure", symbols) -> bool:
        for sym in symbols:
            if sym.is_predicate:
                a, b = self.pred_table(sym.name), other.pred_table(sym.name)
                for tup in self.grid(sym.arg_sorts):
                    if a.value(tup) is not b.value(tup):
                        return False
            else:
                a, b = self.func_table(sym.name), other.func_table(sym.name)
                for tup in self.grid(sym.arg_sorts):
                    if a.value(tup) != b.value(tup):
                        return False
        return True


def normalize_two_valued(struct: PartialStructure) -> PartialStructure:
    """Canonical form of a two-valued structure: predicate tables keep only
    their true tuples over a FALSE default.  Makes structural equality
    meaningful for enumerated models."""
    preds = {}
    for sym in struct.vocabulary.symbols:
        if sym.category is Category.LTC or not sym.is_predicate:
            continue
        table = struct.pred_table(sym.name)
        entries = {}
        for tup in struct.grid(sym.arg_sorts):
            v = table.value(tup)
            if v is UNKNOWN:
                raise StructureError(f"{sym.name}{tup} is unknown; not a two-valued structure")
            if v is TRUE:
                entries[tup] = TRUE
        preds[sym.name] = PredTable(entries, FALSE)
    funcs = {}
    for sym in struct.vocabulary.symbols:
        if sym.category is Category.LTC or not sym.is_function:
            continue
        table = struct.func_table(sym.name)
        entries = {}
        for tup in struct.grid(sym.arg_sorts):
            v = table.value(tup)
            if v is None:
                raise StructureError(f"{sym.name}{tup} is undefined; not a two-valued structure")
            entries[tup] = v
        funcs[sym.name] = FuncTable(entries)
    return PartialStructure(struct.vocabulary, dict(struct.domains), preds, funcs)


# ---------------------------------------------------------------------------
# Projections

def k_projection_pred(table: PredTable, k) -> PredTable:
    entries = {tup[:-1]: v for tup, v in table.entries.items() if tup[-1] == k}
    return PredTable(entries, table.default)


def k_projection_func(table: FuncTable, k) -> FuncTable:
    return FuncTable({tup[:-1]: v for tup, v in table.entries.items() if tup[-1] == k})


def _projected_domains(struct: PartialStructure, voc: Vocabulary) -> dict:
    return {s.name: struct.domains[s.name] for s in voc.sorts}


def project_state(struct: PartialStructure, derived, k) -> PartialStructure:
    """Single-state projection onto time point k."""
    voc = derived.single_state
    preds, funcs = {}, {}
    for sym in derived.source.symbols:
        if sym.category is Category.LTC:
            continue
        if sym.category is Category.STATIC:
            if sym.is_predicate and sym.name in struct.preds:
                preds[sym.name] = struct.preds[sym.name]
            elif sym.is_function and sym.name in struct.funcs:
                funcs[sym.name] = struct.funcs[sym.name]
        else:
            if sym.is_predicate:
                preds[sym.name] = k_projection_pred(struct.pred_table(sym.name), k)
            else:
                funcs[sym.name] = k_projection_func(struct.func_table(sym.name), k)
    return PartialStructure(voc, _projected_domains(struct, voc), preds, funcs)


def project_bistate(struct: PartialStructure, derived, k) -> PartialStructure:
    """Bistate projection: the state at k plus next-state symbols read at k+1."""
    base = project_state(struct, derived, k)
    voc = derived.bistate
    preds, funcs = dict(base.preds), dict(base.funcs)
    for sym in derived.source.symbols:
        if sym.category is not Category.DYNAMIC:
            continue
        nname = derived.next_names[sym.name]
        if sym.is_predicate:
            preds[nname] = k_projection_pred(struct.pred_table(sym.name), k + 1)
        else:
            funcs[nname] = k_projection_func(struct.func_table(sym.name), k + 1)
    return PartialStructure(voc, _projected_domains(struct, voc), preds, funcs)


def pair_states(s: PartialStructure, s2: PartialStructure, derived) -> PartialStructure:
    """Combine two single-state structures into a bistate structure."""
    statics = [sym for sym in derived.static.symbols]
    if s.domains != s2.domains or not s.equal_on(s2, statics):
        raise StaticMismatch("paired states disagree on static symbols")
    voc = derived.bistate
    preds, funcs = dict(s.preds), dict(s.funcs)
    for sym in derived.source.symbols:
        if sym.category is not Category.DYNAMIC:
            continue
        nname = derived.next_names[sym.name]
        if sym.is_predicate:
            preds[nname] = s2.pred_table(sym.name)
        else:
            funcs[nname] = s2.func_table(sym.name)
    return PartialStructure(voc, dict(s.domains), preds, funcs)


def unpair_next_state(bistate: PartialStructure, derived) -> PartialStructure:
    """Extract the next state of a bistate structure as a single-state structure."""
    voc = derived.single_state
    preds, funcs = {}, {}
    for sym in derived.source.symbols:
        if sym.category is Category.STATIC:
            if sym.is_predicate and sym.name in bistate.preds:
                preds[sym.name] = bistate.preds[sym.name]
            elif sym.is_function and sym.name in bistate.funcs:
                funcs[sym.name] = bistate.funcs[sym.name]
        elif sym.category is Category.DYNAMIC:
            nname = derived.next_names[sym.name]
            if sym.is_predicate:
                preds[sym.name] = bistate.pred_table(nname)
            else:
                funcs[sym.name] = bistate.func_table(nname)
    doms = {s.name: bistate.domains[s.name] for s in voc.sorts}
    return PartialStructure(voc, doms, preds, funcs)


# ---------------------------------------------------------------------------
# Chains

@dataclass(frozen=True)
class Chain:
    """A shared static interpretation plus k+1 single-state structures."""

    derived: object  # DerivedVocabularies
    states: tuple[PartialStructure, ...]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        statics = self.derived.static.symbols
        for s in self.states[1:]:
            if not self.states[0].equal_on(s, statics):
                raise StaticMismatch("chain states disagree on static symbols")

    @property
    def length(self) -> int:
        """k for a k-chain (number of transitions, states minus one)."""
        return len(self.states) - 1

    @property
    def last(self) -> PartialStructure:
        return self.states[-1]

    def extend(self, state: PartialStructure, **meta) -> "Chain":
        return Chain(self.derived, self.states + (state,), {**self.metadata, **meta})

    def truncate(self, k: int) -> "Chain":
        return Chain(self.derived, self.states[: k + 1], dict(self.metadata))


def chain_to_partial(chain: Chain, time_points: int | None = None) -> PartialStructure:
    """Render a chain as a partial structure over the source vocabulary:
    two-valued up to the last state, unknown beyond."""
    derived = chain.derived
    voc = derived.source
    k = chain.length
    bound = time_points if time_points is not None else k + 1
    if bound < k + 1:
        raise StructureError("time bound smaller than the chain")
    doms = dict(chain.states[0].domains)
    doms[TIME] = tuple(range(bound))
    preds, funcs = {}, {}
    for sym in voc.symbols:
        if sym.category is Category.STATIC:
            if sym.is_predicate and sym.name in chain.states[0].preds:
                preds[sym.name] = chain.states[0].preds[sym.name]
            elif sym.is_function and sym.name in chain.states[0].funcs:
                funcs[sym.name] = chain.states[0].funcs[sym.name]
        elif sym.category is Category.DYNAMIC:
            if sym.is_predicate:
                entries = {}
                for j, state in enumerate(chain.states):
                    table = state.pred_table(sym.name)
                    for tup in state.grid(sym.state_args):
                        v = table.value(tup)
                        if v is UNKNOWN:
                            raise StructureError(f"chain state {j} not two-valued on {sym.name}")
                        entries[tup + (j,)] = v
                preds[sym.name] = PredTable(entries, UNKNOWN)
            else:
                entries = {}
                for j, state in enumerate(chain.states):
                    table = state.func_table(sym.name)
                    for tup in state.grid(sym.state_args):
                        v = table.value(tup)
                        if v is None:
                            raise StructureError(f"chain state {j} not total on {sym.name}")
                        entries[tup + (j,)] = v
                funcs[sym.name] = FuncTable(entries)
    return PartialStructure(voc, doms, preds, funcs)


def structure_to_chain(struct: PartialStructure, derived) -> Chain:
    """Split a bounded-Time structure into its sequence of state projections."""
    bound = struct.time_bound
    if bound is None:
        raise StructureError("structure does not bound Time")
    states = tuple(project_state(struct, derived, k) for k in range(bound))
    return Chain(derived, states)


# ---------------------------------------------------------------------------
# JSON state schema (owned here; used by the service and CLI --json)

def state_to_json(struct: PartialStructure) -> dict:
    sorts = {name: list(elems) for name, elems in struct.domains.items()}
    preds = {}
    funcs = {}
    for sym in struct.vocabulary.symbols:
        if sym.category is Category.LTC:
            continue
        if sym.is_predicate:
            table = struct.pred_table(sym.name)
            preds[sym.name] = [list(t) for t in table.true_tuples()]
        else:
            table = struct.func_table(sym.name)
            funcs[sym.name] = [[list(t), v] for t, v in sorted(table.entries.items(), key=lambda kv: _tuple_key(kv[0]))]
    return {"sorts": sorts, "predicates": preds, "functions": funcs}


def state_from_json(payload: dict, voc: Vocabulary) -> PartialStructure:
    doms = {name: tuple(elems) for name, elems in payload.get("sorts", {}).items()}
    preds = {}
    for name, tuples in payload.get("predicates", {}).items():
        preds[name] = PredTable({tuple(t): TRUE for t in tuples}, FALSE)
    funcs = {}
    for name, entries in payload.get("functions", {}).items():
        funcs[name] = FuncTable({tuple(args): v for args, v in entries})
    return PartialStructure(voc, doms, preds, funcs)


def chain_to_json(chain: Chain) -> dict:
    return {
        "states": [state_to_json(s) for s in chain.states],
        "metadata": dict(chain.metadata),
    }
