"""Abstract syntax for linear-time vocabularies, terms, formulas, rules and theories.

All values here are immutable after construction and safe to share across
threads.  The reserved sort ``Time`` together with the constant ``Init`` and
the unary successor function ``Succ`` form the temporal backbone; every other
symbol is either static (no Time argument) or dynamic (exactly one, stored
last in normal form).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

TIME = "Time"

Elem = object  # domain elements are str or int; tables treat them opaquely


class SortKind(enum.Enum):
    TIME = "time"
    ENUM = "enum"
    INT_RANGE = "int_range"


@dataclass(frozen=True)
class Sort:
    name: str
    kind: SortKind = SortKind.ENUM

    @property
    def is_time(self) -> bool:
        return self.kind is SortKind.TIME

    def __str__(self) -> str:
        return self.name


TIME_SORT = Sort(TIME, SortKind.TIME)


class Category(enum.Enum):
    LTC = "ltc"          # Time, Init, Succ
    STATIC = "static"
    DYNAMIC = "dynamic"


@dataclass(frozen=True)
class SymbolDecl:
    """A predicate (out_sort None) or function symbol.

    ``time_pos`` records where the Time argument appeared in the source
    declaration; internally dynamic symbols always store it last.
    ``origin_fluent`` marks symbols introduced by a ``fluent`` declaration so
    the printer can suppress them.
    """

    name: str
    arg_sorts: tuple[Sort, ...]
    out_sort: Sort | None = None
    category: Category = Category.STATIC
    exogenous: bool = False
    time_pos: int | None = None
    origin_fluent: str | None = None

    @property
    def is_predicate(self) -> bool:
        return self.out_sort is None

    @property
    def is_function(self) -> bool:
        return self.out_sort is not None

    @property
    def is_dynamic(self) -> bool:
        return self.category is Category.DYNAMIC

    @property
    def state_args(self) -> tuple[Sort, ...]:
        """Argument sorts without the trailing Time argument."""
        if self.is_dynamic:
            return self.arg_sorts[:-1]
        return self.arg_sorts

    def __str__(self) -> str:
        args = ", ".join(s.name for s in self.arg_sorts)
        sig = f"{self.name}({args})" if self.arg_sorts else self.name
        return f"{sig} : {self.out_sort.name}" if self.out_sort else sig


@dataclass(frozen=True)
class FluentDecl:
    """Unexpanded surface declaration ``fluent P(S, ...)``."""

    name: str
    arg_sorts: tuple[Sort, ...]


class VocabularyError(Exception):
    pass


@dataclass(frozen=True)
class Vocabulary:
    name: str
    sorts: tuple[Sort, ...]
    symbols: tuple[SymbolDecl, ...]
    fluents: tuple[FluentDecl, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "_sort_by_name", {s.name: s for s in self.sorts})
        object.__setattr__(self, "_sym_by_name", {s.name: s for s in self.symbols})
        if len(self._sym_by_name) != len(self.symbols):
            seen = set()
            for s in self.symbols:
                if s.name in seen:
                    raise VocabularyError(f"duplicate symbol {s.name!r} in vocabulary {self.name!r}")
                seen.add(s.name)

    def sort(self, name: str) -> Sort:
        return self._sort_by_name[name]

    def has_sort(self, name: str) -> bool:
        return name in self._sort_by_name

    def symbol(self, name: str) -> SymbolDecl:
        return self._sym_by_name[name]

    def has_symbol(self, name: str) -> bool:
        return name in self._sym_by_name

    @property
    def time_sort(self) -> Sort | None:
        for s in self.sorts:
            if s.is_time:
                return s
        return None

    @property
    def dynamic_symbols(self) -> tuple[SymbolDecl, ...]:
        return tuple(s for s in self.symbols if s.category is Category.DYNAMIC)

    @property
    def static_symbols(self) -> tuple[SymbolDecl, ...]:
        return tuple(s for s in self.symbols if s.category is Category.STATIC)

    def with_symbols(self, extra: tuple[SymbolDecl, ...], name: str | None = None) -> "Vocabulary":
        return replace(self, name=name or self.name, symbols=self.symbols + extra)


# ---------------------------------------------------------------------------
# Terms

@dataclass(frozen=True)
class Term:
    def sort_of(self) -> Sort:
        raise NotImplementedError


@dataclass(frozen=True)
class Variable(Term):
    name: str
    sort: Sort

    def sort_of(self) -> Sort:
        return self.sort

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Apply(Term):
    func: SymbolDecl
    args: tuple[Term, ...]

    def sort_of(self) -> Sort:
        return self.func.out_sort

    def __str__(self) -> str:
        if not self.args:
            return self.func.name
        return f"{self.func.name}({', '.join(map(str, self.args))})"


@dataclass(frozen=True)
class InitTerm(Term):
    def sort_of(self) -> Sort:
        return TIME_SORT

    def __str__(self) -> str:
        return "Init"


@dataclass(frozen=True)
class SuccTerm(Term):
    arg: Term

    def sort_of(self) -> Sort:
        return TIME_SORT

    def __str__(self) -> str:
        return f"Succ({self.arg})"


@dataclass(frozen=True)
class ElemTerm(Term):
    """A literal domain element; produced by grounding and encodings, not by the parser."""

    value: object
    sort: Sort

    def sort_of(self) -> Sort:
        return self.sort

    def __str__(self) -> str:
        return str(self.value)


# ---------------------------------------------------------------------------
# Formulas

@dataclass(frozen=True)
class Formula:
    pass


@dataclass(frozen=True)
class TrueLit(Formula):
    def __str__(self) -> str:
        return "true"


@dataclass(frozen=True)
class FalseLit(Formula):
    def __str__(self) -> str:
        return "false"


@dataclass(frozen=True)
class Atom(Formula):
    pred: SymbolDecl
    args: tuple[Term, ...]

    def __str__(self) -> str:
        if not self.args:
            return self.pred.name
        return f"{self.pred.name}({', '.join(map(str, self.args))})"


@dataclass(frozen=True)
class Eq(Formula):
    left: Term
    right: Term

    def __str__(self) -> str:
        return f"{self.left} = {self.right}"


@dataclass(frozen=True)
class Not(Formula):
    body: Formula

    def __str__(self) -> str:
        return f"~({self.body})"


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula

    def __str__(self) -> str:
        return f"({self.left} & {self.right})"


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula

    def __str__(self) -> str:
        return f"({self.left} | {self.right})"


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula

    def __str__(self) -> str:
        return f"({self.left} => {self.right})"


@dataclass(frozen=True)
class Iff(Formula):
    left: Formula
    right: Formula

    def __str__(self) -> str:
        return f"({self.left} <=> {self.right})"


@dataclass(frozen=True)
class Forall(Formula):
    var: Variable
    body: Formula

    def __str__(self) -> str:
        return f"!{self.var}: {self.body}"


@dataclass(frozen=True)
class Exists(Formula):
    var: Variable
    body: Formula

    def __str__(self) -> str:
        return f"?{self.var}: {self.body}"


# ---------------------------------------------------------------------------
# Rules, definitions, theories

@dataclass(frozen=True)
class Rule:
    """``!vars: head <- body`` under well-founded semantics.

    head is an Atom, or an Eq whose left side applies a function symbol
    (read through its graph).
    """

    vars: tuple[Variable, ...]
    head: Formula  # Atom | Eq
    body: Formula = field(default_factory=TrueLit)

    @property
    def head_symbol(self) -> SymbolDecl:
        if isinstance(self.head, Atom):
            return self.head.pred
        if isinstance(self.head, Eq) and isinstance(self.head.left, Apply):
            return self.head.left.func
        raise ValueError(f"malformed rule head: {self.head}")

    def __str__(self) -> str:
        prefix = f"!{', '.join(v.name for v in self.vars)}: " if self.vars else ""
        if isinstance(self.body, TrueLit):
            return f"{prefix}{self.head}."
        return f"{prefix}{self.head} <- {self.body}."


@dataclass(frozen=True)
class Definition:
    rules: tuple[Rule, ...]

    @property
    def defined_symbols(self) -> tuple[SymbolDecl, ...]:
        seen: dict[str, SymbolDecl] = {}
        for r in self.rules:
            sym = r.head_symbol
            seen.setdefault(sym.name, sym)
        return tuple(seen.values())


@dataclass(frozen=True)
class Theory:
    name: str
    vocabulary: Vocabulary
    sentences: tuple[Formula, ...] = ()
    definitions: tuple[Definition, ...] = ()

    def merged_definition(self) -> Definition | None:
        """All rules joined into one definition; None when there are none."""
        rules: tuple[Rule, ...] = ()
        for d in self.definitions:
            rules += d.rules
        return Definition(rules) if rules else None


# ---------------------------------------------------------------------------
# Traversal helpers

def subterms(t: Term):
    yield t
    if isinstance(t, Apply):
        for a in t.args:
            yield from subterms(a)
    elif isinstance(t, SuccTerm):
        yield from subterms(t.arg)


def formula_terms(f: Formula):
    """All term occurrences in a formula, including nested subterms."""
    if isinstance(f, Atom):
        for a in f.args:
            yield from subterms(a)
    elif isinstance(f, Eq):
        yield from subterms(f.left)
        yield from subterms(f.right)
    elif isinstance(f, Not):
        yield from formula_terms(f.body)
    elif isinstance(f, (And, Or, Implies, Iff)):
        yield from formula_terms(f.left)
        yield from formula_terms(f.right)
    elif isinstance(f, (Forall, Exists)):
        yield from formula_terms(f.body)


def subformulas(f: Formula):
    yield f
    if isinstance(f, Not):
        yield from subformulas(f.body)
    elif isinstance(f, (And, Or, Implies, Iff)):
        yield from subformulas(f.left)
        yield from subformulas(f.right)
    elif isinstance(f, (Forall, Exists)):
        yield from subformulas(f.body)


def free_vars(f: Formula, bound: frozenset[str] = frozenset()) -> set[Variable]:
    if isinstance(f, (Atom, Eq)):
        out = set()
        for t in formula_terms(f):
            if isinstance(t, Variable) and t.name not in bound:
                out.add(t)
        return out
    if isinstance(f, Not):
        return free_vars(f.body, bound)
    if isinstance(f, (And, Or, Implies, Iff)):
        return free_vars(f.left, bound) | free_vars(f.right, bound)
    if isinstance(f, (Forall, Exists)):
        return free_vars(f.body, bound | {f.var.name})
    return set()


def map_terms(f: Formula, fn) -> Formula:
    """Rebuild a formula applying ``fn`` to every top-level term occurrence."""
    if isinstance(f, Atom):
        return Atom(f.pred, tuple(fn(a) for a in f.args))
    if isinstance(f, Eq):
        return Eq(fn(f.left), fn(f.right))
    if isinstance(f, Not):
        return Not(map_terms(f.body, fn))
    if isinstance(f, And):
        return And(map_terms(f.left, fn), map_terms(f.right, fn))
    if isinstance(f, Or):
        return Or(map_terms(f.left, fn), map_terms(f.right, fn))
    if isinstance(f, Implies):
        return Implies(map_terms(f.left, fn), map_terms(f.right, fn))
    if isinstance(f, Iff):
        return Iff(map_terms(f.left, fn), map_terms(f.right, fn))
    if isinstance(f, Forall):
        return Forall(f.var, map_terms(f.body, fn))
    if isinstance(f, Exists):
        return Exists(f.var, map_terms(f.body, fn))
    return f


def subst_term(t: Term, mapping: dict[str, Term]) -> Term:
    """Substitute variables by name.  Callers guarantee no capture occurs."""
    if isinstance(t, Variable):
        return mapping.get(t.name, t)
    if isinstance(t, Apply):
        return Apply(t.func, tuple(subst_term(a, mapping) for a in t.args))
    if isinstance(t, SuccTerm):
        return SuccTerm(subst_term(t.arg, mapping))
    return t


def subst(f: Formula, mapping: dict[str, Term]) -> Formula:
    if isinstance(f, (Forall, Exists)):
        inner = {k: v for k, v in mapping.items() if k != f.var.name}
        body = subst(f.body, inner) if inner else f.body
        return type(f)(f.var, body)
    return map_terms(f, lambda t: subst_term(t, mapping))


def replace_init(t: Term, by: Term) -> Term:
    if isinstance(t, InitTerm):
        return by
    if isinstance(t, Apply):
        return Apply(t.func, tuple(replace_init(a, by) for a in t.args))
    if isinstance(t, SuccTerm):
        return SuccTerm(replace_init(t.arg, by))
    return t


def all_var_names(f: Formula) -> set[str]:
    names = set()
    for g in subformulas(f):
        if isinstance(g, (Forall, Exists)):
            names.add(g.var.name)
        if isinstance(g, (Atom, Eq)):
            for t in formula_terms(g):
                if isinstance(t, Variable):
                    names.add(t.name)
    return names


def fresh_name(base: str, taken: set[str]) -> str:
    if base not in taken:
        return base
    i = 0
    while f"{base}{i}" in taken:
        i += 1
    return f"{base}{i}"


def alpha_equal(a, b) -> bool:
    """Structural equality up to renaming of bound variables."""
    return _alpha(a, b, {}, {})


def _alpha(a, b, ma, mb) -> bool:
    if type(a) is not type(b):
        return False
    if isinstance(a, Variable):
        return ma.get(a.name, a.name) == mb.get(b.name, b.name) and a.sort == b.sort
    if isinstance(a, Apply):
        return a.func.name == b.func.name and len(a.args) == len(b.args) and all(
            _alpha(x, y, ma, mb) for x, y in zip(a.args, b.args))
    if isinstance(a, SuccTerm):
        return _alpha(a.arg, b.arg, ma, mb)
    if isinstance(a, (InitTerm, TrueLit, FalseLit)):
        return True
    if isinstance(a, ElemTerm):
        return a.value == b.value and a.sort == b.sort
    if isinstance(a, Atom):
        return a.pred.name == b.pred.name and len(a.args) == len(b.args) and all(
            _alpha(x, y, ma, mb) for x, y in zip(a.args, b.args))
    if isinstance(a, Eq):
        return _alpha(a.left, b.left, ma, mb) and _alpha(a.right, b.right, ma, mb)
    if isinstance(a, Not):
        return _alpha(a.body, b.body, ma, mb)
    if isinstance(a, (And, Or, Implies, Iff)):
        return _alpha(a.left, b.left, ma, mb) and _alpha(a.right, b.right, ma, mb)
    if isinstance(a, (Forall, Exists)):
        tag = f"#{len(ma)}"
        ma2 = dict(ma); ma2[a.var.name] = tag
        mb2 = dict(mb); mb2[b.var.name] = tag
        return a.var.sort == b.var.sort and _alpha(a.body, b.body, ma2, mb2)
    if isinstance(a, Rule):
        if len(a.vars) != len(b.vars):
            return False
        ma2, mb2 = dict(ma), dict(mb)
        for i, (x, y) in enumerate(zip(a.vars, b.vars)):
            if x.sort != y.sort:
                return False
            tag = f"#r{len(ma)}_{i}"
            ma2[x.name] = tag
            mb2[y.name] = tag
        return _alpha(a.head, b.head, ma2, mb2) and _alpha(a.body, b.body, ma2, mb2)
    if isinstance(a, Definition):
        return len(a.rules) == len(b.rules) and all(
            _alpha(x, y, {}, {}) for x, y in zip(a.rules, b.rules))
    if isinstance(a, Theory):
        return (len(a.sentences) == len(b.sentences)
                and len(a.definitions) == len(b.definitions)
                and all(_alpha(x, y, {}, {}) for x, y in zip(a.sentences, b.sentences))
                and all(_alpha(x, y, {}, {}) for x, y in zip(a.definitions, b.definitions)))
    raise TypeError(f"alpha_equal: unsupported node {type(a).__name__}")
