"""Concrete syntax for vocabularies and formulas, with a round-tripping printer.

Surface grammar (ASCII only)::

    vocab   : "vocab" "l=" NUM "m=" NUM "d=" NUM ["+"] ["<="]
    formula : implies
    implies : or ("->" implies)?
    or      : and ("|" and)*
    and     : unary ("&" unary)*
    unary   : "!" unary | "forall" NAME "." implies | atom
    atom    : term ("=" | "<=") term | "(" formula ")"
    term    : primary ("+" primary)*
    primary : NUM | "a"IDX | "c"IDX | "s"IDX | "b"IDX "(" term ")"
            | NAME | "(" term ")"

``!`` binds tighter than ``&``, which binds tighter than ``|``, which binds
tighter than the right-associative ``->``; a quantifier body extends as far
right as possible.  Documents are one ``vocab`` header followed by any
number of ``assert <formula>`` lines; ``#`` starts a comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .core import (
    AddressConst,
    AddressVar,
    And,
    Balance,
    Eq,
    Formula,
    ForallAddress,
    Implies,
    Leq,
    NatConst,
    Not,
    Numeral,
    Or,
    Plus,
    SumConst,
    Term,
    Vocabulary,
    term_sort,
    ADDRESS,
    NAT,
)


@dataclass(frozen=True)
class SourceSpan:
    start: int
    end: int
    line: int
    column: int

    def __post_init__(self) -> None:
        if self.start > self.end:
            raise ValueError("span start after end")


class ParseError(Exception):
    def __init__(self, message: str, span: SourceSpan):
        super().__init__(f"{message} (line {span.line}, column {span.column})")
        self.message = message
        self.span = span


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>[0-9]+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<op><=|->|[()=!&|+.])
    """,
    re.VERBOSE,
)

_SYMBOL_RE = re.compile(r"([abcs])([0-9]+)$")


@dataclass(frozen=True)
class _Token:
    kind: str  # 'num' | 'name' | 'op' | 'eof'
    text: str
    span: SourceSpan


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    pos = 0
    line = 1
    col = 1
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            span = SourceSpan(pos, pos + 1, line, col)
            raise ParseError(f"unexpected character {text[pos]!r}", span)
        kind = m.lastgroup
        lexeme = m.group()
        if kind != "ws":
            span = SourceSpan(pos, m.end(), line, col)
            tokens.append(_Token(kind, lexeme, span))  # type: ignore[arg-type]
        newlines = lexeme.count("\n")
        if newlines:
            line += newlines
            col = len(lexeme) - lexeme.rfind("\n")
        else:
            col += len(lexeme)
        pos = m.end()
    tokens.append(_Token("eof", "", SourceSpan(n, n, line, col)))
    return tokens


class _Parser:
    def __init__(self, vocab: Optional[Vocabulary], text: str):
        self.vocab = vocab
        self.tokens = _tokenize(text)
        self.i = 0

    # -- token plumbing -------------------------------------------------

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def next(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text: str) -> _Token:
        tok = self.peek()
        if tok.text != text:
            raise ParseError(f"expected {text!r}", tok.span)
        return self.next()

    def fail(self, message: str) -> ParseError:
        return ParseError(message, self.peek().span)

    # -- formulas --------------------------------------------------------

    def formula(self) -> Formula:
        left = self.or_formula()
        if self.peek().text == "->":
            self.next()
            return Implies(left, self.formula())
        return left

    def or_formula(self) -> Formula:
        left = self.and_formula()
        while self.peek().text == "|":
            self.next()
            left = Or(left, self.and_formula())
        return left

    def and_formula(self) -> Formula:
        left = self.unary()
        while self.peek().text == "&":
            self.next()
            left = And(left, self.unary())
        return left

    def unary(self) -> Formula:
        tok = self.peek()
        if tok.text == "!":
            self.next()
            return Not(self.unary())
        if tok.kind == "name" and tok.text == "forall":
            self.next()
            var = self.next()
            if var.kind != "name" or var.text == "forall":
                raise ParseError("expected a variable name after 'forall'", var.span)
            if _SYMBOL_RE.match(var.text):
                raise ParseError(
                    f"{var.text!r} is a reserved symbol name and cannot be bound", var.span
                )
            self.expect(".")
            return ForallAddress(var.text, self.formula())
        return self.atom()

    def atom(self) -> Formula:
        if self.peek().text == "(":
            # '(' is ambiguous between a parenthesized formula and a
            # parenthesized term; try the formula reading first.
            mark = self.i
            self.next()
            try:
                inner = self.formula()
                self.expect(")")
                return inner
            except ParseError:
                self.i = mark
        return self.comparison()

    def comparison(self) -> Formula:
        left_tok = self.peek()
        left = self.term()
        op = self.peek()
        if op.text == "=":
            self.next()
            right_tok = self.peek()
            right = self.term()
            if term_sort(left) != term_sort(right):
                raise ParseError("= compares terms of different sorts", right_tok.span)
            return Eq(left, right)
        if op.text == "<=":
            if self.vocab is not None and not self.vocab.has_leq:
                raise ParseError("<= unavailable in this vocabulary", op.span)
            self.next()
            right_tok = self.peek()
            right = self.term()
            if term_sort(left) != NAT:
                raise ParseError("<= needs a Nat left operand", left_tok.span)
            if term_sort(right) != NAT:
                raise ParseError("<= needs a Nat right operand", right_tok.span)
            return Leq(left, right)
        raise ParseError("expected '=' or '<='", op.span)

    # -- terms -----------------------------------------------------------

    def term(self) -> Term:
        left_tok = self.peek()
        left = self.primary()
        while self.peek().text == "+":
            op = self.peek()
            if self.vocab is not None and not self.vocab.has_plus:
                raise ParseError("+ unavailable in this vocabulary", op.span)
            if term_sort(left) != NAT:
                raise ParseError("+ needs Nat operands", left_tok.span)
            self.next()
            right_tok = self.peek()
            right = self.primary()
            if term_sort(right) != NAT:
                raise ParseError("+ needs Nat operands", right_tok.span)
            left = Plus(left, right)
        return left

    def primary(self) -> Term:
        tok = self.peek()
        if tok.text == "(":
            self.next()
            inner = self.term()
            self.expect(")")
            return inner
        if tok.kind == "num":
            self.next()
            return Numeral(int(tok.text))
        if tok.kind == "name":
            m = _SYMBOL_RE.match(tok.text)
            if m:
                letter, idx_text = m.groups()
                index = int(idx_text)
                self.next()
                if letter == "b":
                    self._check_index(index, "m", "balance function", tok)
                    self.expect("(")
                    arg_tok = self.peek()
                    arg = self.term()
                    if term_sort(arg) != ADDRESS:
                        raise ParseError("balance needs an Address argument", arg_tok.span)
                    self.expect(")")
                    return Balance(index, arg)
                if letter == "a":
                    self._check_index(index, "l", "address constant", tok)
                    return AddressConst(index)
                if letter == "c":
                    self._check_index(index, "d", "nat constant", tok)
                    return NatConst(index)
                self._check_index(index, "m", "sum constant", tok)
                return SumConst(index)
            if tok.text == "forall":
                raise ParseError("'forall' cannot start a term", tok.span)
            self.next()
            return AddressVar(tok.text)
        raise self.fail("expected a term")

    def _check_index(self, index: int, field: str, what: str, tok: _Token) -> None:
        if self.vocab is None:
            return
        bound = getattr(self.vocab, field)
        if not 1 <= index <= bound:
            raise ParseError(f"{what} index {index} out of range [1,{bound}]", tok.span)


def parse_vocabulary(text: str) -> Vocabulary:
    """Parse a header of the form ``vocab l=<n> m=<n> d=<n> [+] [<=]``."""
    p = _Parser(None, text)
    tok = p.next()
    if tok.text != "vocab":
        raise ParseError("expected 'vocab'", tok.span)
    counts = {}
    for field in ("l", "m", "d"):
        name = p.next()
        if name.text != field:
            raise ParseError(f"expected '{field}='", name.span)
        p.expect("=")
        num = p.next()
        if num.kind != "num":
            raise ParseError(f"expected a non-negative count for {field}", num.span)
        counts[field] = int(num.text)
    has_plus = False
    has_leq = False
    while p.peek().kind != "eof":
        tok = p.next()
        if tok.text == "+" and not has_plus:
            has_plus = True
        elif tok.text == "<=" and not has_leq:
            has_leq = True
        else:
            raise ParseError("expected '+', '<=', or end of header", tok.span)
    return Vocabulary(counts["l"], counts["m"], counts["d"], has_plus, has_leq)


def parse_formula(vocab: Vocabulary, text: str) -> Formula:
    p = _Parser(vocab, text)
    phi = p.formula()
    tok = p.peek()
    if tok.kind != "eof":
        raise ParseError(f"unexpected trailing input {tok.text!r}", tok.span)
    return phi


def parse_term(vocab: Vocabulary, text: str) -> Term:
    p = _Parser(vocab, text)
    t = p.term()
    tok = p.peek()
    if tok.kind != "eof":
        raise ParseError(f"unexpected trailing input {tok.text!r}", tok.span)
    return t


def parse_document(text: str) -> tuple[Vocabulary, list[Formula]]:
    """Parse a vocab header plus ``assert`` lines; ``#`` comments allowed."""
    vocab: Optional[Vocabulary] = None
    formulas: list[Formula] = []
    offset = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            if line.startswith("vocab"):
                if vocab is not None:
                    span = SourceSpan(offset, offset + len(raw), lineno, 1)
                    raise ParseError("duplicate vocab header", span)
                vocab = parse_vocabulary(line)
            elif line.startswith("assert"):
                if vocab is None:
                    span = SourceSpan(offset, offset + len(raw), lineno, 1)
                    raise ParseError("assert before vocab header", span)
                formulas.append(parse_formula(vocab, line[len("assert"):]))
            else:
                span = SourceSpan(offset, offset + len(raw), lineno, 1)
                raise ParseError("expected 'vocab', 'assert', or a comment", span)
        offset += len(raw) + 1
    if vocab is None:
        raise ParseError("missing vocab header", SourceSpan(0, 0, 1, 1))
    return vocab, formulas


# ---------------------------------------------------------------------------
# Printing

_PREC_IMPLIES = 1
_PREC_OR = 2
_PREC_AND = 3
_PREC_NOT = 4
_PREC_ATOM = 5


def print_formula(phi: Formula, fancy_eq: bool = False) -> str:
    """Render a formula so that parsing the output rebuilds the same AST.

    ``fancy_eq`` swaps ``=`` for the prettier but non-parseable U+2248 sign;
    leave it off for anything that must round-trip.
    """
    eq_sign = "≈" if fancy_eq else "="
    return _print(phi, 0, eq_sign)


def _print(phi: Formula, context: int, eq_sign: str) -> str:
    if isinstance(phi, Eq):
        return f"{print_term(phi.left)} {eq_sign} {print_term(phi.right)}"
    if isinstance(phi, Leq):
        return f"{print_term(phi.left)} <= {print_term(phi.right)}"
    if isinstance(phi, Not):
        return f"!({_print(phi.body, 0, eq_sign)})"
    if isinstance(phi, And):
        text = f"{_print(phi.left, _PREC_AND, eq_sign)} & {_print(phi.right, _PREC_AND + 1, eq_sign)}"
        return f"({text})" if context > _PREC_AND else text
    if isinstance(phi, Or):
        text = f"{_print(phi.left, _PREC_OR, eq_sign)} | {_print(phi.right, _PREC_OR + 1, eq_sign)}"
        return f"({text})" if context > _PREC_OR else text
    if isinstance(phi, Implies):
        text = (
            f"{_print(phi.left, _PREC_IMPLIES + 1, eq_sign)} -> "
            f"{_print(phi.right, _PREC_IMPLIES, eq_sign)}"
        )
        return f"({text})" if context > _PREC_IMPLIES else text
    if isinstance(phi, ForallAddress):
        # The body swallows everything to its right, so a quantifier is
        # parenthesized whenever it is an operand of anything at all.
        text = f"forall {phi.var}. {_print(phi.body, 0, eq_sign)}"
        return f"({text})" if context > 0 else text
    raise TypeError(f"not a formula: {phi!r}")


def print_term(t: Term) -> str:
    if isinstance(t, Numeral):
        return str(t.value)
    if isinstance(t, AddressConst):
        return f"a{t.index}"
    if isinstance(t, NatConst):
        return f"c{t.index}"
    if isinstance(t, SumConst):
        return f"s{t.index}"
    if isinstance(t, AddressVar):
        return t.name
    if isinstance(t, Balance):
        return f"b{t.index}({print_term(t.address)})"
    if isinstance(t, Plus):
        # + is parsed left-associatively, so a right-nested Plus needs
        # parentheses to survive the round trip.
        left = print_term(t.left)
        right = print_term(t.right)
        if isinstance(t.right, Plus):
            right = f"({right})"
        return f"{left} + {right}"
    raise TypeError(f"not a term: {t!r}")


def print_vocabulary(v: Vocabulary) -> str:
    parts = [f"vocab l={v.l} m={v.m} d={v.d}"]
    if v.has_plus:
        parts.append("+")
    if v.has_leq:
        parts.append("<=")
    return " ".join(parts)


def print_document(v: Vocabulary, formulas) -> str:
    lines = [print_vocabulary(v)]
    lines.extend(f"assert {print_formula(f)}" for f in formulas)
    return "\n".join(lines) + "\n"
