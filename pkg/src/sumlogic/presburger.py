"""Quantifier-free linear formulas over named natural-number constants.

This is the target language of the reduction pipeline and the input
language of the arithmetic oracle: boolean combinations of atoms
``linexpr (=|<=) linexpr`` where each side is an integer-coefficient
combination of named constants plus an offset.  All constants range over
the naturals.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Mapping


@dataclass(frozen=True)
class LinExpr:
    """``sum(coeff * name) + offset`` with sorted, zero-free coefficients."""

    coeffs: tuple[tuple[str, int], ...] = ()
    offset: int = 0

    @staticmethod
    def const(name: str) -> "LinExpr":
        return LinExpr(((name, 1),), 0)

    @staticmethod
    def num(value: int) -> "LinExpr":
        return LinExpr((), value)

    @staticmethod
    def of(terms: Mapping[str, int], offset: int = 0) -> "LinExpr":
        coeffs = tuple(sorted((n, c) for n, c in terms.items() if c != 0))
        return LinExpr(coeffs, offset)

    def __add__(self, other: "LinExpr") -> "LinExpr":
        acc = dict(self.coeffs)
        for name, c in other.coeffs:
            acc[name] = acc.get(name, 0) + c
        return LinExpr.of(acc, self.offset + other.offset)

    def __sub__(self, other: "LinExpr") -> "LinExpr":
        return self + other.scale(-1)

    def scale(self, k: int) -> "LinExpr":
        return LinExpr(tuple((n, c * k) for n, c in self.coeffs), self.offset * k)

    def shift(self, k: int) -> "LinExpr":
        return LinExpr(self.coeffs, self.offset + k)

    def names(self) -> frozenset[str]:
        return frozenset(n for n, _ in self.coeffs)

    def value(self, model: Mapping[str, int]) -> int:
        return self.offset + sum(c * model[n] for n, c in self.coeffs)

    def render(self) -> str:
        parts = []
        for name, c in self.coeffs:
            if c == 1:
                parts.append(name)
            elif c == -1:
                parts.append(f"-{name}")
            else:
                parts.append(f"{c}*{name}")
        if self.offset or not parts:
            parts.append(str(self.offset))
        out = parts[0]
        for p in parts[1:]:
            out += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
        return out


class PresFormula:
    __slots__ = ()


@dataclass(frozen=True)
class PTrue(PresFormula):
    pass


@dataclass(frozen=True)
class PFalse(PresFormula):
    pass


@dataclass(frozen=True)
class PAtom(PresFormula):
    op: str  # '=' or '<='
    left: LinExpr
    right: LinExpr

    def __post_init__(self) -> None:
        if self.op not in ("=", "<="):
            raise ValueError(f"bad atom operator {self.op!r}")


@dataclass(frozen=True)
class PNot(PresFormula):
    body: PresFormula


@dataclass(frozen=True)
class PAnd(PresFormula):
    parts: tuple[PresFormula, ...]


@dataclass(frozen=True)
class POr(PresFormula):
    parts: tuple[PresFormula, ...]


@dataclass(frozen=True)
class PImplies(PresFormula):
    left: PresFormula
    right: PresFormula


TRUE = PTrue()
FALSE = PFalse()


def pand(parts) -> PresFormula:
    """Conjunction with the usual constant folding; empty -> true."""
    flat: list[PresFormula] = []
    for p in parts:
        if isinstance(p, PTrue):
            continue
        if isinstance(p, PFalse):
            return FALSE
        if isinstance(p, PAnd):
            flat.extend(p.parts)
        else:
            flat.append(p)
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    return PAnd(tuple(flat))


def por(parts) -> PresFormula:
    """Disjunction with constant folding; empty -> false."""
    flat: list[PresFormula] = []
    for p in parts:
        if isinstance(p, PFalse):
            continue
        if isinstance(p, PTrue):
            return TRUE
        if isinstance(p, POr):
            flat.extend(p.parts)
        else:
            flat.append(p)
    if not flat:
        return FALSE
    if len(flat) == 1:
        return flat[0]
    return POr(tuple(flat))


def pimplies(left: PresFormula, right: PresFormula) -> PresFormula:
    if isinstance(left, PFalse) or isinstance(right, PTrue):
        return TRUE
    if isinstance(left, PTrue):
        return right
    return PImplies(left, right)


def pnot(body: PresFormula) -> PresFormula:
    if isinstance(body, PTrue):
        return FALSE
    if isinstance(body, PFalse):
        return TRUE
    if isinstance(body, PNot):
        return body.body
    return PNot(body)


def eq(left: LinExpr, right: LinExpr) -> PresFormula:
    if not left.coeffs and not right.coeffs:
        return TRUE if left.offset == right.offset else FALSE
    return PAtom("=", left, right)


def leq(left: LinExpr, right: LinExpr) -> PresFormula:
    if not left.coeffs and not right.coeffs:
        return TRUE if left.offset <= right.offset else FALSE
    return PAtom("<=", left, right)


def atoms(phi: PresFormula) -> Iterator[PAtom]:
    if isinstance(phi, PAtom):
        yield phi
    elif isinstance(phi, PNot):
        yield from atoms(phi.body)
    elif isinstance(phi, (PAnd, POr)):
        for p in phi.parts:
            yield from atoms(p)
    elif isinstance(phi, PImplies):
        yield from atoms(phi.left)
        yield from atoms(phi.right)


def constants(phi: PresFormula) -> frozenset[str]:
    names: set[str] = set()
    for a in atoms(phi):
        names |= a.left.names() | a.right.names()
    return frozenset(names)


def evaluate(phi: PresFormula, model: Mapping[str, int]) -> bool:
    """Truth value under a total assignment; raises KeyError if partial."""
    if isinstance(phi, PTrue):
        return True
    if isinstance(phi, PFalse):
        return False
    if isinstance(phi, PAtom):
        lv, rv = phi.left.value(model), phi.right.value(model)
        return lv == rv if phi.op == "=" else lv <= rv
    if isinstance(phi, PNot):
        return not evaluate(phi.body, model)
    if isinstance(phi, PAnd):
        return all(evaluate(p, model) for p in phi.parts)
    if isinstance(phi, POr):
        return any(evaluate(p, model) for p in phi.parts)
    if isinstance(phi, PImplies):
        return (not evaluate(phi.left, model)) or evaluate(phi.right, model)
    raise TypeError(f"not a Presburger formula: {phi!r}")


def render(phi: PresFormula) -> str:
    return _render(phi, 0)


def _render(phi: PresFormula, ctx: int) -> str:
    if isinstance(phi, PTrue):
        return "true"
    if isinstance(phi, PFalse):
        return "false"
    if isinstance(phi, PAtom):
        return f"{phi.left.render()} {phi.op} {phi.right.render()}"
    if isinstance(phi, PNot):
        return f"!({_render(phi.body, 0)})"
    if isinstance(phi, PAnd):
        text = " & ".join(_render(p, 2) for p in phi.parts)
        return f"({text})" if ctx > 1 else text
    if isinstance(phi, POr):
        text = " | ".join(_render(p, 1) for p in phi.parts)
        return f"({text})" if ctx > 0 else text
    if isinstance(phi, PImplies):
        return f"({_render(phi.left, 2)} -> {_render(phi.right, 0)})"
    raise TypeError(f"not a Presburger formula: {phi!r}")


_SMT_NAME_SAFE = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_-")


def _smt_symbol(name: str) -> str:
    if name and all(ch in _SMT_NAME_SAFE for ch in name) and not name[0].isdigit():
        return name
    return f"|{name}|"


def _smt_expr(e: LinExpr) -> str:
    parts = [str(e.offset)] if e.offset else []
    for name, c in e.coeffs:
        sym = _smt_symbol(name)
        parts.append(sym if c == 1 else f"(* {c} {sym})")
    if not parts:
        return "0"
    if len(parts) == 1:
        return parts[0]
    return f"(+ {' '.join(parts)})"


def _smt_formula(phi: PresFormula) -> str:
    if isinstance(phi, PTrue):
        return "true"
    if isinstance(phi, PFalse):
        return "false"
    if isinstance(phi, PAtom):
        return f"({phi.op} {_smt_expr(phi.left)} {_smt_expr(phi.right)})"
    if isinstance(phi, PNot):
        return f"(not {_smt_formula(phi.body)})"
    if isinstance(phi, PAnd):
        return f"(and {' '.join(_smt_formula(p) for p in phi.parts)})"
    if isinstance(phi, POr):
        return f"(or {' '.join(_smt_formula(p) for p in phi.parts)})"
    if isinstance(phi, PImplies):
        return f"(=> {_smt_formula(phi.left)} {_smt_formula(phi.right)})"
    raise TypeError(f"not a Presburger formula: {phi!r}")


def to_qf_lia_script(phi: PresFormula) -> str:
    """Render as an SMT-LIB QF_LIA problem with non-negative constants."""
    lines = ["(set-logic QF_LIA)"]
    for name in sorted(constants(phi)):
        sym = _smt_symbol(name)
        lines.append(f"(declare-fun {sym} () Int)")
        lines.append(f"(assert (<= 0 {sym}))")
    lines.append(f"(assert {_smt_formula(phi)})")
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"
