"""Pretty-printer: the inverse of the parser.

Output re-parses to a structurally equal value.  Symbols print in
declaration order; dynamic symbols restore the source position of their Time
argument; ``~(a = b)`` prints as ``a ~= b``; fluent-generated symbols are
folded back into their ``fluent`` declaration.
"""

from __future__ import annotations

from .structure import Chain, PartialStructure, tuple_sort_key
from .syntax import (
    And, Apply, Atom, Category, Definition, ElemTerm, Eq, Exists, FalseLit,
    Forall, Formula, Iff, Implies, InitTerm, Not, Or, Rule, SuccTerm,
    SymbolDecl, Term, Theory, TrueLit, Variable, Vocabulary,
)
from .truth import FALSE, UNKNOWN

_PREC_IFF = 1
_PREC_IMPLIES = 2
_PREC_OR = 3
_PREC_AND = 4
_PREC_NOT = 5
_PREC_ATOM = 6


def print_term(t: Term) -> str:
    if isinstance(t, Variable):
        return t.name
    if isinstance(t, InitTerm):
        return "Init"
    if isinstance(t, SuccTerm):
        return f"Succ({print_term(t.arg)})"
    if isinstance(t, ElemTerm):
        return str(t.value)
    if isinstance(t, Apply):
        args = _source_order(t.func, [print_term(a) for a in t.args])
        if not args:
            return t.func.name
        return f"{t.func.name}({', '.join(args)})"
    raise TypeError(f"cannot print term {t!r}")


def _source_order(decl: SymbolDecl, items: list) -> list:
    """Restore the declared position of the Time argument."""
    if decl.is_dynamic and decl.time_pos is not None and decl.time_pos != len(items) - 1:
        items = list(items)
        time_item = items.pop()
        items.insert(decl.time_pos, time_item)
    return items


def print_formula(f: Formula, prec: int = 0) -> str:
    if isinstance(f, TrueLit):
        return "true"
    if isinstance(f, FalseLit):
        return "false"
    if isinstance(f, Atom):
        if not f.args:
            return f.pred.name
        args = _source_order(f.pred, [print_term(a) for a in f.args])
        return f"{f.pred.name}({', '.join(args)})"
    if isinstance(f, Eq):
        return f"{print_term(f.left)} = {print_term(f.right)}"
    if isinstance(f, Not):
        if isinstance(f.body, Eq):
            return f"{print_term(f.body.left)} ~= {print_term(f.body.right)}"
        return "~" + print_formula(f.body, _PREC_NOT + 1)
    if isinstance(f, (And, Or, Implies, Iff)):
        my, left_p, right_p, op = {
            Iff: (_PREC_IFF, _PREC_IFF, _PREC_IFF + 1, "<=>"),
            Implies: (_PREC_IMPLIES, _PREC_IMPLIES + 1, _PREC_IMPLIES, "=>"),
            Or: (_PREC_OR, _PREC_OR, _PREC_OR + 1, "|"),
            And: (_PREC_AND, _PREC_AND, _PREC_AND + 1, "&"),
        }[type(f)]
        s = f"{print_formula(f.left, left_p)} {op} {print_formula(f.right, right_p)}"
        return f"({s})" if my < prec else s
    if isinstance(f, (Forall, Exists)):
        marker = "!" if isinstance(f, Forall) else "?"
        names = [f.var.name]
        body = f.body
        while isinstance(body, type(f)):
            names.append(body.var.name)
            body = body.body
        s = f"{marker}{', '.join(names)}: {print_formula(body, 0)}"
        return f"({s})" if prec > 0 else s
    raise TypeError(f"cannot print formula {f!r}")


def print_rule(r: Rule) -> str:
    head = print_formula(r.head)
    prefix = f"!{', '.join(v.name for v in r.vars)}: " if r.vars else ""
    if isinstance(r.body, TrueLit):
        return f"{prefix}{head}."
    return f"{prefix}{head} <- {print_formula(r.body)}."


def print_vocabulary(voc: Vocabulary) -> str:
    lines = [f"vocabulary {voc.name} {{"]
    for s in voc.sorts:
        lines.append(f"  type {s.name}")
    fluent_members: dict[str, list[str]] = {}
    for decl in voc.fluents:
        fluent_members[decl.name] = [decl.name, "C_" + decl.name, "Cn_" + decl.name, "I_" + decl.name]
    skip: set[str] = set()
    declared_fluents = {d.name: d for d in voc.fluents}
    for sym in voc.symbols:
        if sym.name in skip:
            continue
        if sym.origin_fluent is not None and sym.origin_fluent in declared_fluents:
            if sym.name == sym.origin_fluent:
                decl = declared_fluents[sym.name]
                args = ", ".join(s.name for s in decl.arg_sorts)
                lines.append(f"  fluent {sym.name}({args})")
                skip.update(fluent_members.get(sym.name, []))
            continue
        lines.append("  " + _print_symbol_decl(sym))
    lines.append("}")
    return "\n".join(lines)


def _print_symbol_decl(sym: SymbolDecl) -> str:
    if not sym.arg_sorts and sym.is_function:
        return f"{sym.name} : {sym.out_sort.name}"
    args = _source_order(sym, [s.name for s in sym.arg_sorts])
    s = f"{sym.name}({', '.join(args)})"
    if sym.is_function:
        s += f" : {sym.out_sort.name}"
    if sym.exogenous:
        s += " exogenous"
    return s


def print_theory(theory: Theory) -> str:
    lines = [f"theory {theory.name} : {theory.vocabulary.name} {{"]
    for d in theory.definitions:
        lines.append("  {")
        for r in d.rules:
            lines.append("    " + print_rule(r))
        lines.append("  }")
    for s in theory.sentences:
        lines.append("  " + print_formula(s) + ".")
    lines.append("}")
    return "\n".join(lines)


def _print_elem(v) -> str:
    return str(v)


def print_structure(struct: PartialStructure, name: str = "S") -> str:
    voc = struct.vocabulary
    lines = [f"structure {name} : {voc.name} {{"]
    for s in voc.sorts:
        if s.name not in struct.domains:
            continue
        dom = struct.domains[s.name]
        if dom and all(isinstance(v, int) for v in dom) and list(dom) == list(range(dom[0], dom[-1] + 1)):
            lines.append(f"  {s.name} = {{ {dom[0]}..{dom[-1]} }}")
        else:
            lines.append(f"  {s.name} = {{ {'; '.join(_print_elem(v) for v in dom)} }}")
    for sym in voc.symbols:
        if sym.category is Category.LTC:
            continue
        if sym.is_predicate:
            if sym.name not in struct.preds:
                continue
            table = struct.preds[sym.name]
            if table.default is FALSE:
                if any(v is UNKNOWN for v in table.entries.values()):
                    raise ValueError(f"table for {sym.name} mixes a false default with unknowns")
                lines.append(f"  {sym.name} = {_format_tuples(sym, table.true_tuples())}")
            else:
                ct = table.true_tuples()
                cf = sorted((t for t, v in table.entries.items() if v is FALSE),
                            key=tuple_sort_key)
                if ct or not cf:
                    lines.append(f"  {sym.name}<ct> = {_format_tuples(sym, ct)}")
                if cf:
                    lines.append(f"  {sym.name}<cf> = {_format_tuples(sym, cf)}")
        else:
            if sym.name not in struct.funcs:
                continue
            table = struct.funcs[sym.name]
            if not sym.arg_sorts and () in table.entries:
                lines.append(f"  {sym.name} = {_print_elem(table.entries[()])}")
                continue
            entries = sorted(table.entries.items(), key=lambda kv: tuple_sort_key(kv[0]))
            cells = "; ".join(
                f"({', '.join(_print_elem(v) for v in _source_order(sym, list(args)))}) -> {_print_elem(val)}"
                for args, val in entries)
            lines.append(f"  {sym.name} = {{ {cells} }}" if cells else f"  {sym.name} = {{ }}")
    lines.append("}")
    return "\n".join(lines)


def _format_tuples(sym: SymbolDecl, tuples) -> str:
    if not tuples:
        return "{ }"
    parts = []
    for t in tuples:
        items = _source_order(sym, [str(v) for v in t])
        if len(items) == 1:
            parts.append(items[0])
        else:
            parts.append(f"({', '.join(items)})")
    return "{ " + "; ".join(parts) + " }"


def print_program(blocks) -> str:
    """Print a sequence of parsed blocks (or a SourceProgram)."""
    from .parser import StructureBlock, TheoryBlock, VocabularyBlock
    if hasattr(blocks, "blocks"):
        blocks = blocks.blocks
    parts = []
    for b in blocks:
        if isinstance(b, VocabularyBlock):
            parts.append(print_vocabulary(b.vocabulary))
        elif isinstance(b, TheoryBlock):
            parts.append(print_theory(b.theory))
        elif isinstance(b, StructureBlock):
            parts.append(print_structure(b.structure, b.name))
        else:
            raise TypeError(f"cannot print block {type(b).__name__}")
    return "\n\n".join(parts) + "\n"


def pretty(x, name: str = "S") -> str:
    """Print any kernel value in the concrete syntax."""
    if isinstance(x, Vocabulary):
        return print_vocabulary(x)
    if isinstance(x, Theory):
        return print_theory(x)
    if isinstance(x, PartialStructure):
        return print_structure(x, name)
    if isinstance(x, Rule):
        return print_rule(x)
    if isinstance(x, Definition):
        return "{ " + " ".join(print_rule(r) for r in x.rules) + " }"
    if isinstance(x, Formula):
        return print_formula(x)
    if isinstance(x, Term):
        return print_term(x)
    if isinstance(x, Chain):
        return "\n\n".join(print_structure(s, f"state{k}") for k, s in enumerate(x.states))
    raise TypeError(f"cannot print {type(x).__name__}")
