"""Parser for ``.ltc`` source programs.

A program is a sequence of vocabulary, theory, and structure blocks::

    vocabulary V {
      type Time
      type Square
      Pell(Square, Time)
      Pos(Agent, Time) : Square
      Move(Agent, Dir, Time) exogenous
      pacman : Agent
      fluent Carry(Agent)
    }
    theory T : V {
      { !s: Pell(s, Init).  !s, t: Pell(s, Succ(t)) <- Pell(s, t). }
      !a, t, d, d2: Move(a, d, t) & Move(a, d2, t) => d = d2.
    }
    structure S : V {
      Square = { s1; s2 }
      Next = { (s1, East, s2) }
      StartPos = { (pacman) -> s1 }
      Time = { 0..3 }
    }

Connectives: ``! ? & | ~ => <=> = ~=``; ``<-`` in rules; ``.`` terminates
sentences and rules; ``//`` starts a line comment.  ``Time``, ``Init``,
``Succ``, ``true`` and ``false`` are reserved.  Quantified variables carry no
sort annotations; sorts are inferred from symbol argument positions and
equalities, so every quantified variable must occur in its scope.
Three-valued structure tables use ``p<ct>`` / ``p<cf>`` (certainly-true /
certainly-false); anything unlisted is unknown.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .structure import FuncTable, PartialStructure, PredTable
from .syntax import (
    And, Apply, Atom, Eq, Exists, FalseLit, FluentDecl, Forall, Formula, Iff,
    Implies, InitTerm, Not, Or, Rule, Sort, SuccTerm, SymbolDecl,
    Definition, Term, Theory, TIME, TIME_SORT, TrueLit, Variable, Vocabulary,
)
from .transform import fluent_symbols
from .truth import FALSE, TRUE, UNKNOWN
from .validate import validate_vocabulary

KEYWORDS = {"vocabulary", "theory", "structure", "type", "fluent", "exogenous",
            "true", "false", "Init", "Succ"}

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<comment>//[^\n]*)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<int>\d+)
  | (?P<op><=>|=>|<-|~=|->|\.\.|[{}():;,.=~!?&|<>])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str  # ident | int | op | eof
    text: str
    line: int
    col: int


@dataclass(frozen=True)
class Diagnostic:
    line: int
    col: int
    message: str

    def __str__(self) -> str:
        return f"{self.line}:{self.col}: {self.message}"


class ParseFailure(Exception):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))


@dataclass
class VocabularyBlock:
    vocabulary: Vocabulary
    line: int


@dataclass
class TheoryBlock:
    theory: Theory
    line: int


@dataclass
class StructureBlock:
    structure: PartialStructure
    name: str
    line: int


@dataclass
class SourceProgram:
    blocks: list

    @property
    def vocabularies(self) -> dict:
        return {b.vocabulary.name: b.vocabulary for b in self.blocks if isinstance(b, VocabularyBlock)}

    @property
    def theories(self) -> dict:
        return {b.theory.name: b.theory for b in self.blocks if isinstance(b, TheoryBlock)}

    @property
    def structures(self) -> dict:
        return {b.name: b.structure for b in self.blocks if isinstance(b, StructureBlock)}


def tokenize(text: str):
    tokens: list[Token] = []
    diags: list[Diagnostic] = []
    line, col, pos = 1, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            diags.append(Diagnostic(line, col, f"unexpected character {text[pos]!r}"))
            pos += 1
            col += 1
            continue
        kind = m.lastgroup
        raw = m.group()
        if kind not in ("ws", "comment"):
            tokens.append(Token("op" if kind == "op" else kind, raw, line, col))
        newlines = raw.count("\n")
        if newlines:
            line += newlines
            col = len(raw) - raw.rfind("\n")
        else:
            col += len(raw)
        pos = m.end()
    tokens.append(Token("eof", "", line, col))
    return tokens, diags


# ---------------------------------------------------------------------------
# Sort inference scaffolding

class _Slot:
    """A quantified variable awaiting sort inference (union-find node)."""

    def __init__(self, name: str, line: int, col: int):
        self.name = name
        self.line = line
        self.col = col
        self.parent: "_Slot" = self
        self.sort: Sort | None = None

    def find(self) -> "_Slot":
        node = self
        while node.parent is not node:
            node = node.parent
        self.parent = node
        return node


def _unify(a: _Slot, b: _Slot, diags):
    ra, rb = a.find(), b.find()
    if ra is rb:
        return
    if ra.sort and rb.sort and ra.sort != rb.sort:
        diags.append(Diagnostic(a.line, a.col,
                     f"variable sorts conflict: {a.name} is {ra.sort.name}, {b.name} is {rb.sort.name}"))
        return
    rb.parent = ra
    if rb.sort and not ra.sort:
        ra.sort = rb.sort


def _assign(slot: _Slot, sort: Sort, diags):
    root = slot.find()
    if root.sort is None:
        root.sort = sort
    elif root.sort != sort:
        diags.append(Diagnostic(slot.line, slot.col,
                     f"variable {slot.name} used both as {root.sort.name} and {sort.name}"))


# raw term/formula trees (pre sort inference); slots stand in for variables
@dataclass
class _RawApply:
    decl: SymbolDecl
    args: list
@dataclass
class _RawVar:
    slot: _Slot
@dataclass
class _RawInit:
    pass
@dataclass
class _RawSucc:
    arg: object
@dataclass
class _RawAtom:
    decl: SymbolDecl
    args: list
@dataclass
class _RawEq:
    left: object
    right: object
    negated: bool = False
@dataclass
class _RawNot:
    body: object
@dataclass
class _RawBin:
    op: str
    left: object
    right: object
@dataclass
class _RawQuant:
    kind: str
    slots: list
    body: object
@dataclass
class _RawLit:
    value: bool


class Parser:
    def __init__(self, text: str, vocabularies=()):
        self.tokens, self.diags = tokenize(text)
        self.pos = 0
        self.vocs: dict[str, Vocabulary] = {v.name: v for v in vocabularies}
        self.blocks: list = []

    # -- token helpers -------------------------------------------------------

    @property
    def cur(self) -> Token:
        return self.tokens[self.pos]

    def at(self, text: str) -> bool:
        return self.cur.text == text and self.cur.kind in ("op", "ident")

    def at_kind(self, kind: str) -> bool:
        return self.cur.kind == kind

    def advance(self) -> Token:
        tok = self.cur
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def expect(self, text: str) -> Token:
        if self.at(text):
            return self.advance()
        raise self.error(f"expected {text!r}, found {self.cur.text!r}" if self.cur.kind != "eof"
                         else f"expected {text!r}, found end of input")

    def expect_ident(self, what: str) -> Token:
        if self.cur.kind == "ident" and self.cur.text not in KEYWORDS:
            return self.advance()
        raise self.error(f"expected {what}, found {self.cur.text!r}")

    def error(self, message: str, tok: Token | None = None) -> ParseFailure:
        tok = tok or self.cur
        self.diags.append(Diagnostic(tok.line, tok.col, message))
        return ParseFailure(self.diags)

    def soft_error(self, message: str, tok: Token | None = None):
        tok = tok or self.cur
        self.diags.append(Diagnostic(tok.line, tok.col, message))

    def skip_block(self):
        """Recover after an error: skip to the end of the current brace block."""
        depth = 0
        while self.cur.kind != "eof":
            if self.at("{"):
                depth += 1
            elif self.at("}"):
                if depth <= 1:
                    self.advance()
                    return
                depth -= 1
            self.advance()

    # -- program -------------------------------------------------------------

    def parse_program(self) -> SourceProgram:
        while self.cur.kind != "eof":
            try:
                if self.at("vocabulary"):
                    self.parse_vocabulary()
                elif self.at("theory"):
                    self.parse_theory()
                elif self.at("structure"):
                    self.parse_structure()
                else:
                    raise self.error(f"expected a block keyword, found {self.cur.text!r}")
            except ParseFailure:
                self.skip_to_next_block()
        if self.diags:
            raise ParseFailure(self.diags)
        return SourceProgram(self.blocks)

    def skip_to_next_block(self):
        while self.cur.kind != "eof" and not (self.cur.kind == "ident" and
                                              self.cur.text in ("vocabulary", "theory", "structure")):
            self.advance()

    def lookup_voc(self, tok: Token) -> Vocabulary:
        if tok.text not in self.vocs:
            raise self.error(f"unknown vocabulary {tok.text!r}", tok)
        return self.vocs[tok.text]

    # -- vocabulary block ----------------------------------------------------

    def parse_vocabulary(self):
        start = self.expect("vocabulary")
        name = self.expect_ident("a vocabulary name")
        self.expect("{")
        sorts: list[Sort] = []
        symbols: list[SymbolDecl] = []
        fluents: list[FluentDecl] = []
        sort_by_name: dict[str, Sort] = {}

        def get_sort(tok: Token) -> Sort:
            if tok.kind != "ident":
                raise self.error("expected a type name", tok)
            if tok.text == TIME:
                return TIME_SORT
            if tok.text not in sort_by_name:
                raise self.error(f"unknown type {tok.text!r}", tok)
            return sort_by_name[tok.text]

        while not self.at("}"):
            if self.cur.kind == "eof":
                raise self.error("unterminated vocabulary block")
            if self.at("type"):
                self.advance()
                tok = self.advance()
                if tok.kind != "ident":
                    raise self.error("expected a type name", tok)
                sort = TIME_SORT if tok.text == TIME else Sort(tok.text)
                if tok.text in sort_by_name or (tok.text == TIME and any(s.is_time for s in sorts)):
                    self.soft_error(f"duplicate type {tok.text!r}", tok)
                sort_by_name[tok.text] = sort
                sorts.append(sort)
            elif self.at("fluent"):
                self.advance()
                tok = self.expect_ident("a fluent name")
                args = self.parse_sort_args(get_sort)
                decl = FluentDecl(tok.text, tuple(args))
                fluents.append(decl)
                if not any(s.is_time for s in sorts):
                    raise self.error("fluent declared before the Time type", tok)
                for sym in fluent_symbols(decl, TIME_SORT):
                    symbols.append(sym)
            else:
                tok = self.expect_ident("a symbol declaration")
                if self.at("("):
                    args = self.parse_sort_args(get_sort)
                    out = None
                    if self.at(":"):
                        self.advance()
                        out = get_sort(self.advance())
                    exo = False
                    if self.at("exogenous"):
                        self.advance()
                        exo = True
                    symbols.append(SymbolDecl(tok.text, tuple(args), out, exogenous=exo))
                elif self.at(":"):
                    self.advance()
                    out = get_sort(self.advance())
                    symbols.append(SymbolDecl(tok.text, (), out))
                else:
                    raise self.error(f"expected '(' or ':' after symbol {tok.text!r}")
        self.expect("}")
        raw = Vocabulary(name.text, tuple(sorts), tuple(symbols), tuple(fluents))
        try:
            if any(s.is_time for s in sorts):
                voc = validate_vocabulary(raw)
            else:
                # a timeless vocabulary (e.g. a printed derived vocabulary):
                # every symbol is static
                from .validate import _replace_category
                from .syntax import Category
                voc = Vocabulary(raw.name, raw.sorts,
                                 tuple(_replace_category(s, Category.STATIC) for s in raw.symbols),
                                 raw.fluents)
        except Exception as exc:
            raise self.error(f"invalid vocabulary {name.text!r}: {exc}", name)
        if name.text in self.vocs:
            self.soft_error(f"duplicate vocabulary {name.text!r}", name)
        self.vocs[name.text] = voc
        self.blocks.append(VocabularyBlock(voc, start.line))

    def parse_sort_args(self, get_sort) -> list[Sort]:
        self.expect("(")
        args: list[Sort] = []
        if not self.at(")"):
            while True:
                args.append(get_sort(self.advance()))
                if self.at(","):
                    self.advance()
                else:
                    break
        self.expect(")")
        return args

    # -- theory block ----------------------------------------------------------

    def parse_theory(self):
        start = self.expect("theory")
        name = self.expect_ident("a theory name")
        self.expect(":")
        voc = self.lookup_voc(self.expect_ident("a vocabulary name"))
        self.expect("{")
        sentences: list[Formula] = []
        definitions: list[Definition] = []
        while not self.at("}"):
            if self.cur.kind == "eof":
                raise self.error("unterminated theory block")
            if self.at("{"):
                definitions.append(self.parse_definition(voc))
            else:
                sentences.append(self.parse_sentence(voc))
        self.expect("}")
        if name.text in (b.theory.name for b in self.blocks if isinstance(b, TheoryBlock)):
            self.soft_error(f"duplicate theory {name.text!r}", name)
        theory = Theory(name.text, voc, tuple(sentences), tuple(definitions))
        self.blocks.append(TheoryBlock(theory, start.line))

    def parse_definition(self, voc: Vocabulary) -> Definition:
        self.expect("{")
        rules: list[Rule] = []
        while not self.at("}"):
            if self.cur.kind == "eof":
                raise self.error("unterminated definition")
            rules.append(self.parse_rule(voc))
        self.expect("}")
        return Definition(tuple(rules))

    def parse_rule(self, voc: Vocabulary) -> Rule:
        tok = self.cur
        slots: list[_Slot] = []
        scope: dict[str, _Slot] = {}
        if self.at("!"):
            self.advance()
            slots = self.parse_var_slots()
            scope = {s.name: s for s in slots}
            self.expect(":")
        head_raw = self.parse_primary(voc, scope)
        if not isinstance(head_raw, (_RawAtom, _RawEq)):
            raise self.error("rule head must be an atom or a function equality", tok)
        if isinstance(head_raw, _RawEq) and head_raw.negated:
            raise self.error("rule head cannot be an inequality", tok)
        body_raw = _RawLit(True)
        if self.at("<-"):
            self.advance()
            body_raw = self.parse_formula(voc, scope)
        self.expect(".")
        head = self.resolve_rule_part(head_raw, tok, is_head=True)
        body = self.resolve_rule_part(body_raw, tok, is_head=False)
        vars_ = tuple(self.slot_to_var(s, tok) for s in slots)
        rule = Rule(vars_, head, body)
        self.check_no_free(vars_, head, body, tok)
        return rule

    def check_no_free(self, vars_, head, body, tok):
        from .syntax import free_vars
        bound = frozenset(v.name for v in vars_)
        free = {v.name for v in free_vars(head, bound)} | {v.name for v in free_vars(body, bound)}
        if free:
            self.soft_error(f"unquantified variables: {', '.join(sorted(free))}", tok)
            raise ParseFailure(self.diags)

    def parse_sentence(self, voc: Vocabulary) -> Formula:
        tok = self.cur
        raw = self.parse_formula(voc, {})
        self.expect(".")
        f = self.resolve_formula(raw, tok)
        from .syntax import free_vars
        free = {v.name for v in free_vars(f)}
        if free:
            self.soft_error(f"unquantified variables: {', '.join(sorted(free))}", tok)
            raise ParseFailure(self.diags)
        return f

    # -- formulas --------------------------------------------------------------

    def parse_var_slots(self) -> list[_Slot]:
        slots = [
        ]
        while True:
            tok = self.expect_ident("a variable name")
            slots.append(_Slot(tok.text, tok.line, tok.col))
            if self.at(","):
                self.advance()
            else:
                break
        return slots

    def parse_formula(self, voc, scope) -> object:
        return self.parse_iff(voc, scope)

    def parse_quantified(self, voc, scope) -> object:
        kind = self.advance().text  # ! or ?
        slots = self.parse_var_slots()
        self.expect(":")
        inner = dict(scope)
        inner.update({s.name: s for s in slots})
        body = self.parse_formula(voc, inner)
        return _RawQuant(kind, slots, body)

    def parse_iff(self, voc, scope) -> object:
        left = self.parse_implies(voc, scope)
        while self.at("<=>"):
            self.advance()
            right = self.parse_implies(voc, scope)
            left = _RawBin("<=>", left, right)
        return left

    def parse_implies(self, voc, scope) -> object:
        left = self.parse_or(voc, scope)
        if self.at("=>"):
            self.advance()
            right = self.parse_implies(voc, scope)
            return _RawBin("=>", left, right)
        return left

    def parse_or(self, voc, scope) -> object:
        left = self.parse_and(voc, scope)
        while self.at("|"):
            self.advance()
            left = _RawBin("|", left, self.parse_and(voc, scope))
        return left

    def parse_and(self, voc, scope) -> object:
        left = self.parse_unary(voc, scope)
        while self.at("&"):
            self.advance()
            left = _RawBin("&", left, self.parse_unary(voc, scope))
        return left

    def parse_unary(self, voc, scope) -> object:
        if self.at("~"):
            self.advance()
            return _RawNot(self.parse_unary(voc, scope))
        if self.at("!") or self.at("?"):
            return self.parse_quantified(voc, scope)
        return self.parse_primary(voc, scope)

    def parse_primary(self, voc, scope) -> object:
        if self.at("("):
            self.advance()
            f = self.parse_formula(voc, scope)
            self.expect(")")
            return f
        if self.at("true"):
            self.advance()
            return _RawLit(True)
        if self.at("false"):
            self.advance()
            return _RawLit(False)
        tok = self.cur
        left = self.parse_term(voc, scope)
        if self.at("=") or self.at("~="):
            negated = self.advance().text == "~="
            right = self.parse_term(voc, scope)
            return _RawEq(left, right, negated)
        if isinstance(left, _RawAtom):
            return left
        if isinstance(left, _RawApply):
            raise self.error(f"function {left.decl.name!r} used as a formula", tok)
        raise self.error("expected an atom or equality", tok)

    def parse_term(self, voc, scope) -> object:
        tok = self.cur
        if self.at("Init"):
            self.advance()
            return _RawInit()
        if self.at("Succ"):
            self.advance()
            self.expect("(")
            arg = self.parse_term(voc, scope)
            self.expect(")")
            return _RawSucc(arg)
        name = self.expect_ident("a term")
        if self.at("("):
            self.expect("(")
            args = []
            if not self.at(")"):
                while True:
                    args.append(self.parse_term(voc, scope))
                    if self.at(","):
                        self.advance()
                    else:
                        break
            self.expect(")")
            if not voc.has_symbol(name.text):
                raise self.error(f"unknown symbol {name.text!r}", name)
            decl = voc.symbol(name.text)
            if len(args) != len(decl.arg_sorts):
                raise self.error(f"{name.text} expects {len(decl.arg_sorts)} arguments, got {len(args)}", name)
            args = self.normalize_time_order(decl, args)
            if decl.is_predicate:
                return _RawAtom(decl, args)
            return _RawApply(decl, args)
        if name.text in scope:
            return _RawVar(scope[name.text])
        if voc.has_symbol(name.text):
            decl = voc.symbol(name.text)
            if decl.arg_sorts:
                raise self.error(f"{name.text} expects {len(decl.arg_sorts)} arguments", name)
            return _RawAtom(decl, []) if decl.is_predicate else _RawApply(decl, [])
        raise self.error(f"unknown symbol or variable {name.text!r}", name)

    def normalize_time_order(self, decl: SymbolDecl, args: list) -> list:
        """Source order follows the declaration; internally Time goes last."""
        if decl.is_dynamic and decl.time_pos is not None and decl.time_pos != len(args) - 1:
            args = args[: decl.time_pos] + args[decl.time_pos + 1:] + [args[decl.time_pos]]
        return args

    # -- sort inference / resolution -------------------------------------------

    def infer_term(self, raw, expected: Sort | None, diags, tok):
        if isinstance(raw, _RawVar):
            if expected is not None:
                _assign(raw.slot, expected, diags)
            return raw.slot.find().sort
        if isinstance(raw, _RawInit) or isinstance(raw, _RawSucc):
            if isinstance(raw, _RawSucc):
                self.infer_term(raw.arg, TIME_SORT, diags, tok)
            if expected is not None and not expected.is_time:
                diags.append(Diagnostic(tok.line, tok.col, f"Time term where {expected.name} expected"))
            return TIME_SORT
        if isinstance(raw, _RawApply):
            for a, s in zip(raw.args, raw.decl.arg_sorts):
                self.infer_term(a, s, diags, tok)
            if expected is not None and raw.decl.out_sort != expected:
                diags.append(Diagnostic(tok.line, tok.col,
                             f"{raw.decl.name} has sort {raw.decl.out_sort.name}, expected {expected.name}"))
            return raw.decl.out_sort
        raise ParseFailure(diags + [Diagnostic(tok.line, tok.col, "atom used as a term")])

    def infer_formula(self, raw, diags, tok):
        if isinstance(raw, _RawAtom):
            for a, s in zip(raw.args, raw.decl.arg_sorts):
                self.infer_term(a, s, diags, tok)
        elif isinstance(raw, _RawEq):
            ls = self.infer_term(raw.left, None, diags, tok)
            rs = self.infer_term(raw.right, None, diags, tok)
            if ls is not None and rs is None:
                self.infer_term(raw.right, ls, diags, tok)
            elif rs is not None and ls is None:
                self.infer_term(raw.left, rs, diags, tok)
            elif ls is not None and rs is not None and ls != rs:
                diags.append(Diagnostic(tok.line, tok.col,
                             f"equality between different sorts {ls.name} and {rs.name}"))
            elif ls is None and rs is None:
                if isinstance(raw.left, _RawVar) and isinstance(raw.right, _RawVar):
                    _unify(raw.left.slot, raw.right.slot, diags)
        elif isinstance(raw, _RawNot):
            self.infer_formula(raw.body, diags, tok)
        elif isinstance(raw, _RawBin):
            self.infer_formula(raw.left, diags, tok)
            self.infer_formula(raw.right, diags, tok)
        elif isinstance(raw, _RawQuant):
            self.infer_formula(raw.body, diags, tok)
        elif isinstance(raw, _RawLit):
            pass
        else:
            raise ParseFailure(diags + [Diagnostic(tok.line, tok.col, "term used as a formula")])

    def slot_to_var(self, slot: _Slot, tok) -> Variable:
        sort = slot.find().sort
        if sort is None:
            self.soft_error(f"cannot infer the sort of variable {slot.name!r}", tok)
            raise ParseFailure(self.diags)
        return Variable(slot.name, sort)

    def resolve_term(self, raw, tok) -> Term:
        if isinstance(raw, _RawVar):
            return self.slot_to_var(raw.slot, tok)
        if isinstance(raw, _RawInit):
            return InitTerm()
        if isinstance(raw, _RawSucc):
            return SuccTerm(self.resolve_term(raw.arg, tok))
        if isinstance(raw, _RawApply):
            return Apply(raw.decl, tuple(self.resolve_term(a, tok) for a in raw.args))
        raise ParseFailure(self.diags + [Diagnostic(tok.line, tok.col, "atom used as a term")])

    def resolve_formula_node(self, raw, tok) -> Formula:
        if isinstance(raw, _RawLit):
            return TrueLit() if raw.value else FalseLit()
        if isinstance(raw, _RawAtom):
            return Atom(raw.decl, tuple(self.resolve_term(a, tok) for a in raw.args))
        if isinstance(raw, _RawEq):
            eq = Eq(self.resolve_term(raw.left, tok), self.resolve_term(raw.right, tok))
            return Not(eq) if raw.negated else eq
        if isinstance(raw, _RawNot):
            return Not(self.resolve_formula_node(raw.body, tok))
        if isinstance(raw, _RawBin):
            left = self.resolve_formula_node(raw.left, tok)
            right = self.resolve_formula_node(raw.right, tok)
            return {"&": And, "|": Or, "=>": Implies, "<=>": Iff}[raw.op](left, right)
        if isinstance(raw, _RawQuant):
            body = self.resolve_formula_node(raw.body, tok)
            ctor = Forall if raw.kind == "!" else Exists
            for slot in reversed(raw.slots):
                body = ctor(self.slot_to_var(slot, tok), body)
            return body
        raise ParseFailure(self.diags + [Diagnostic(tok.line, tok.col, "term used as a formula")])

    def resolve_formula(self, raw, tok) -> Formula:
        diags: list[Diagnostic] = []
        self.infer_formula(raw, diags, tok)
        if diags:
            self.diags.extend(diags)
            raise ParseFailure(self.diags)
        return self.resolve_formula_node(raw, tok)

    def resolve_rule_part(self, raw, tok, is_head: bool) -> Formula:
        diags: list[Diagnostic] = []
        self.infer_formula(raw, diags, tok)
        if diags:
            self.diags.extend(diags)
            raise ParseFailure(self.diags)
        f = self.resolve_formula_node(raw, tok)
        if is_head:
            if isinstance(f, Atom):
                return f
            if isinstance(f, Eq) and isinstance(f.left, Apply):
                return f
            if isinstance(f, Eq) and isinstance(f.right, Apply) and not isinstance(f.left, Apply):
                return Eq(f.right, f.left)
            raise self.error("rule head must be an atom or a function equality", tok)
        return f

    # -- structure block -------------------------------------------------------

    def parse_structure(self):
        start = self.expect("structure")
        name = self.expect_ident("a structure name")
        self.expect(":")
        voc = self.lookup_voc(self.expect_ident("a vocabulary name"))
        self.expect("{")
        items = []
        while not self.at("}"):
            if self.cur.kind == "eof":
                raise self.error("unterminated structure block")
            items.append(self.parse_structure_item())
        self.expect("}")
        if name.text in (b.name for b in self.blocks if isinstance(b, StructureBlock)):
            self.soft_error(f"duplicate structure {name.text!r}", name)
        struct = self.build_structure(voc, items, name)
        self.blocks.append(StructureBlock(struct, name.text, start.line))

    def parse_structure_item(self):
        tok = self.expect_ident("a sort or symbol name")
        marker = None
        if self.at("<"):
            self.advance()
            m = self.advance()
            if m.text not in ("ct", "cf"):
                raise self.error("expected ct or cf", m)
            marker = m.text
            self.expect(">")
        self.expect("=")
        if self.at("{"):
            rhs = self.parse_set_rhs()
        else:
            rhs = ("value", self.parse_elem())
        return (tok, marker, rhs)

    def parse_elem(self):
        tok = self.advance()
        if tok.kind == "int":
            return int(tok.text)
        if tok.kind == "ident":
            return tok.text
        raise self.error("expected a domain element", tok)

    def parse_set_rhs(self):
        self.expect("{")
        if self.at("}"):
            self.advance()
            return ("set", [])
        # int range?
        if self.cur.kind == "int" and self.tokens[self.pos + 1].text == "..":
            lo = int(self.advance().text)
            self.expect("..")
            hi_tok = self.advance()
            if hi_tok.kind != "int":
                raise self.error("expected an integer", hi_tok)
            self.expect("}")
            return ("range", lo, int(hi_tok.text))
        entries = []
        kind = None
        while True:
            if self.at("("):
                self.advance()
                tup = []
                if not self.at(")"):
                    while True:
                        tup.append(self.parse_elem())
                        if self.at(","):
                            self.advance()
                        else:
                            break
                self.expect(")")
                if self.at("->"):
                    self.advance()
                    val = self.parse_elem()
                    if kind == "set":
                        raise self.error("cannot mix tuples and maplets in one table")
                    kind = "map"
                    entries.append((tuple(tup), val))
                else:
                    if kind == "map":
                        raise self.error("cannot mix tuples and maplets in one table")
                    kind = "set"
                    entries.append(tuple(tup))
            else:
                if kind == "map":
                    raise self.error("cannot mix tuples and maplets in one table")
                kind = "set"
                entries.append((self.parse_elem(),))
            if self.at(";"):
                self.advance()
                if self.at("}"):
                    break
            else:
                break
        self.expect("}")
        return (kind or "set", entries)

    def build_structure(self, voc: Vocabulary, items, name_tok) -> PartialStructure:
        domains: dict = {}
        # first pass: sorts
        for tok, marker, rhs in items:
            if voc.has_sort(tok.text) or tok.text == TIME:
                if marker:
                    raise self.error("sorts cannot carry ct/cf markers", tok)
                if rhs[0] == "range":
                    if tok.text == TIME and rhs[1] != 0:
                        raise self.error("the Time domain must start at 0", tok)
                    domains[tok.text] = tuple(range(rhs[1], rhs[2] + 1))
                elif rhs[0] == "set":
                    elems = []
                    for e in rhs[1]:
                        if len(e) != 1:
                            raise self.error(f"domain elements of {tok.text} must be single values", tok)
                        elems.append(e[0])
                    if tok.text == TIME:
                        raise self.error("the Time domain must be a 0..n range", tok)
                    domains[tok.text] = tuple(elems)
                else:
                    raise self.error(f"bad domain for sort {tok.text}", tok)
        preds: dict = {}
        funcs: dict = {}
        ct_cf: dict = {}
        for tok, marker, rhs in items:
            if voc.has_sort(tok.text) or tok.text == TIME:
                continue
            if not voc.has_symbol(tok.text):
                raise self.error(f"unknown symbol {tok.text!r}", tok)
            decl = voc.symbol(tok.text)
            if decl.is_function:
                if marker:
                    raise self.error("function tables cannot carry ct/cf markers", tok)
                entries = {}
                if rhs[0] == "value":
                    if decl.arg_sorts:
                        raise self.error(f"{decl.name} is not a constant", tok)
                    entries[()] = rhs[1]
                elif rhs[0] == "map":
                    for args, val in rhs[1]:
                        src_args = self.denormalize_check(decl, args, tok)
                        entries[src_args] = val
                elif rhs[0] == "set" and not rhs[1]:
                    pass
                else:
                    raise self.error(f"function {decl.name} needs maplets '(args) -> value'", tok)
                self.check_func_entries(decl, entries, domains, tok)
                funcs[tok.text] = FuncTable(entries)
            else:
                if rhs[0] == "value":
                    raise self.error(f"predicate {decl.name} needs a tuple set", tok)
                if rhs[0] == "map":
                    raise self.error(f"predicate {decl.name} cannot have maplets", tok)
                tuples = [self.denormalize_check(decl, t, tok) for t in rhs[1]]
                self.check_pred_entries(decl, tuples, domains, tok)
                if marker:
                    ct_cf.setdefault(tok.text, {"ct": [], "cf": []})[marker].extend(tuples)
                else:
                    if tok.text in preds:
                        self.soft_error(f"duplicate table for {tok.text}", tok)
                    preds[tok.text] = PredTable({t: TRUE for t in tuples}, FALSE)
        for name, parts in ct_cf.items():
            if name in preds:
                raise self.error(f"{name} has both a two-valued and a ct/cf table", name_tok)
            entries = {t: TRUE for t in parts["ct"]}
            for t in parts["cf"]:
                if entries.get(t) is TRUE:
                    raise self.error(f"tuple {t} of {name} is both ct and cf", name_tok)
                entries[t] = FALSE
            preds[name] = PredTable(entries, UNKNOWN)
        return PartialStructure(voc, domains, preds, funcs)

    def denormalize_check(self, decl: SymbolDecl, tup: tuple, tok) -> tuple:
        """Reorder a source-order tuple to internal order (Time last)."""
        if len(tup) != len(decl.arg_sorts):
            raise self.error(f"{decl.name} expects {len(decl.arg_sorts)}-tuples, got {len(tup)}", tok)
        if decl.is_dynamic and decl.time_pos is not None and decl.time_pos != len(tup) - 1:
            lst = list(tup)
            time_val = lst.pop(decl.time_pos)
            lst.append(time_val)
            return tuple(lst)
        return tuple(tup)

    def check_pred_entries(self, decl, tuples, domains, tok):
        for tup in tuples:
            self.check_args(decl, tup, domains, tok)

    def check_func_entries(self, decl, entries, domains, tok):
        for args, val in entries.items():
            self.check_args(decl, args, domains, tok)
            self.check_elem(decl.out_sort, val, domains, tok, decl.name)

    def check_args(self, decl, tup, domains, tok):
        for v, s in zip(tup, decl.arg_sorts):
            self.check_elem(s, v, domains, tok, decl.name)

    def check_elem(self, sort: Sort, v, domains, tok, where: str):
        if sort.is_time:
            if not isinstance(v, int) or v < 0:
                raise self.error(f"{where}: time points must be naturals, got {v!r}", tok)
            if TIME in domains and v not in domains[TIME]:
                raise self.error(f"{where}: time point {v} outside the bounded Time domain", tok)
            return
        if sort.name in domains:
            if v not in domains[sort.name]:
                raise self.error(f"{where}: {v!r} is not in the domain of {sort.name}", tok)


def parse(text: str, vocabularies=()) -> SourceProgram:
    """Parse a source program; raises ParseFailure carrying diagnostics."""
    try:
        return Parser(text, vocabularies).parse_program()
    except ParseFailure:
        raise
    except RecursionError:
        raise ParseFailure([Diagnostic(1, 1, "input nested too deeply")])


def try_parse(text: str, vocabularies=()):
    """(program, diagnostics); program is None when parsing failed."""
    try:
        return parse(text, vocabularies), []
    except ParseFailure as exc:
        return None, exc.diagnostics
