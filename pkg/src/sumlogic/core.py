"""Sorted terms, universal formulas, and finite structures for sum logic.

Sum logic is first-order logic over two sorts (Address, Nat) with a fixed
symbol budget: ``l`` Address constants ``a1..al``, ``m`` unary balance
functions ``b1..bm`` from Address to Nat, ``d`` Nat constants ``c1..cd``,
one sum constant ``s1..sm`` per balance function, numerals, and optionally
``+`` and ``<=`` on Nat.  Only universal quantification over Address is
available; there is deliberately no existential constructor.

A finite structure interprets all of that; it is a *model* of a sentence
when the sentence evaluates to true **and** every sum constant equals the
actual total of its balance function over the whole (finite, possibly
empty) address domain.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Mapping, Optional


class EvaluationError(Exception):
    """Unbound variable or out-of-range symbol index during evaluation."""


@dataclass(frozen=True)
class Vocabulary:
    """Symbol counts and operator availability.

    ``l``/``m``/``d`` are the numbers of Address constants, balance
    functions (each paired with a sum constant), and Nat constants.
    Numerals larger than 1 are always allowed, even without ``+``.
    """

    l: int
    m: int
    d: int
    has_plus: bool = False
    has_leq: bool = False

    def __post_init__(self) -> None:
        if self.l < 0 or self.m < 0 or self.d < 0:
            raise ValueError("symbol counts must be non-negative")


class Term:
    __slots__ = ()


@dataclass(frozen=True)
class AddressConst(Term):
    index: int  # 1-based


@dataclass(frozen=True)
class AddressVar(Term):
    name: str


@dataclass(frozen=True)
class Numeral(Term):
    value: int


@dataclass(frozen=True)
class NatConst(Term):
    index: int  # 1-based


@dataclass(frozen=True)
class SumConst(Term):
    index: int  # 1-based, tied to balance function of the same index


@dataclass(frozen=True)
class Balance(Term):
    index: int
    address: Term


@dataclass(frozen=True)
class Plus(Term):
    left: Term
    right: Term


class Formula:
    __slots__ = ()


@dataclass(frozen=True)
class Eq(Formula):
    left: Term
    right: Term


@dataclass(frozen=True)
class Leq(Formula):
    left: Term
    right: Term


@dataclass(frozen=True)
class Not(Formula):
    body: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class ForallAddress(Formula):
    var: str
    body: Formula


def conj(formulas) -> Formula:
    """Left-fold a non-empty iterable of formulas into nested And."""
    it = iter(formulas)
    try:
        acc = next(it)
    except StopIteration:
        raise ValueError("conj needs at least one formula") from None
    for f in it:
        acc = And(acc, f)
    return acc


ADDRESS = "address"
NAT = "nat"


def term_sort(t: Term) -> str:
    if isinstance(t, (AddressConst, AddressVar)):
        return ADDRESS
    return NAT


def subterms(t: Term) -> Iterator[Term]:
    yield t
    if isinstance(t, Balance):
        yield from subterms(t.address)
    elif isinstance(t, Plus):
        yield from subterms(t.left)
        yield from subterms(t.right)


def subformulas(phi: Formula) -> Iterator[Formula]:
    yield phi
    if isinstance(phi, Not):
        yield from subformulas(phi.body)
    elif isinstance(phi, (And, Or, Implies)):
        yield from subformulas(phi.left)
        yield from subformulas(phi.right)
    elif isinstance(phi, ForallAddress):
        yield from subformulas(phi.body)


def atom_terms(phi: Formula) -> Iterator[Term]:
    for sub in subformulas(phi):
        if isinstance(sub, (Eq, Leq)):
            yield from subterms(sub.left)
            yield from subterms(sub.right)


def free_address_vars(phi: Formula) -> frozenset[str]:
    if isinstance(phi, (Eq, Leq)):
        out = set()
        for t in atom_terms(phi):
            if isinstance(t, AddressVar):
                out.add(t.name)
        return frozenset(out)
    if isinstance(phi, Not):
        return free_address_vars(phi.body)
    if isinstance(phi, (And, Or, Implies)):
        return free_address_vars(phi.left) | free_address_vars(phi.right)
    if isinstance(phi, ForallAddress):
        return free_address_vars(phi.body) - {phi.var}
    raise TypeError(f"not a formula: {phi!r}")


def is_closed(phi: Formula) -> bool:
    return not free_address_vars(phi)


def formula_length(phi: Formula) -> int:
    """AST size with unary-weighted numerals: ``Numeral(n)`` costs n + 1.

    The weighting keeps every numeral occurring in a formula strictly below
    the formula's length, which the bounded-model arguments rely on.
    """
    if isinstance(phi, (Eq, Leq)):
        return 1 + _term_length(phi.left) + _term_length(phi.right)
    if isinstance(phi, Not):
        return 1 + formula_length(phi.body)
    if isinstance(phi, (And, Or, Implies)):
        return 1 + formula_length(phi.left) + formula_length(phi.right)
    if isinstance(phi, ForallAddress):
        return 1 + formula_length(phi.body)
    raise TypeError(f"not a formula: {phi!r}")


def _term_length(t: Term) -> int:
    if isinstance(t, Numeral):
        return t.value + 1
    if isinstance(t, Balance):
        return 1 + _term_length(t.address)
    if isinstance(t, Plus):
        return 1 + _term_length(t.left) + _term_length(t.right)
    return 1


@dataclass(frozen=True)
class SLStructure:
    """Finite interpretation: address domain, constant maps, balance tables.

    ``balance`` is total on ``[1, m] x domain``; ``sums`` holds the
    *interpreted* sum constants, which may or may not satisfy the sum
    property (see :func:`check_sum_property`).  Instances are treated as
    immutable; all maps are copied on construction.
    """

    domain: frozenset[int]
    addr_const: Mapping[int, int]
    balance: Mapping[tuple[int, int], int]
    nat_const: Mapping[int, int]
    sums: Mapping[int, int]

    def __post_init__(self) -> None:
        object.__setattr__(self, "domain", frozenset(self.domain))
        object.__setattr__(self, "addr_const", dict(self.addr_const))
        object.__setattr__(self, "balance", dict(self.balance))
        object.__setattr__(self, "nat_const", dict(self.nat_const))
        object.__setattr__(self, "sums", dict(self.sums))
        for i, a in self.addr_const.items():
            if a not in self.domain:
                raise ValueError(f"a{i} interpreted outside the domain")

    @property
    def n_balance_functions(self) -> int:
        return len(self.sums)


def structure_from_balances(
    domain, addr_const, balance, nat_const, m: Optional[int] = None
) -> SLStructure:
    """Build a structure whose sums are derived, so the sum property holds.

    ``m`` (the number of balance functions) must be given explicitly when
    the domain is empty, since the table carries no index information then.
    """
    domain = frozenset(domain)
    balance = dict(balance)
    indices = range(1, m + 1) if m is not None else sorted({j for (j, _) in balance})
    sums = {j: sum(balance[(j, a)] for a in domain) for j in indices}
    return SLStructure(domain, dict(addr_const), balance, dict(nat_const), sums)


Assignment = Mapping[str, int]


def eval_term(s: SLStructure, sigma: Assignment, t: Term) -> int:
    if isinstance(t, Numeral):
        return t.value
    if isinstance(t, NatConst):
        try:
            return s.nat_const[t.index]
        except KeyError:
            raise EvaluationError(f"c{t.index} not interpreted") from None
    if isinstance(t, SumConst):
        try:
            return s.sums[t.index]
        except KeyError:
            raise EvaluationError(f"s{t.index} not interpreted") from None
    if isinstance(t, AddressConst):
        try:
            return s.addr_const[t.index]
        except KeyError:
            raise EvaluationError(f"a{t.index} not interpreted") from None
    if isinstance(t, AddressVar):
        try:
            return sigma[t.name]
        except KeyError:
            raise EvaluationError(f"unbound address variable {t.name!r}") from None
    if isinstance(t, Balance):
        addr = eval_term(s, sigma, t.address)
        try:
            return s.balance[(t.index, addr)]
        except KeyError:
            raise EvaluationError(f"b{t.index} has no entry for address {addr}") from None
    if isinstance(t, Plus):
        return eval_term(s, sigma, t.left) + eval_term(s, sigma, t.right)
    raise TypeError(f"not a term: {t!r}")


def eval_formula(s: SLStructure, sigma: Assignment, phi: Formula) -> bool:
    """Tarskian truth over the finite domain; empty-domain universals hold.

    Nested universals whose body is an implication get their antecedent
    conjuncts checked as soon as all their variables are bound, skipping
    the remaining loop levels for tuples that already falsify a conjunct.
    This changes nothing semantically (the implication is vacuously true
    on every extension of such a tuple) but makes wide quantifier blocks,
    e.g. eight-variable transition rules, evaluable in practice.
    """
    env = dict(sigma) if sigma else {}
    return _eval(s, env, phi)


def _eval(s: SLStructure, env: dict[str, int], phi: Formula) -> bool:
    if isinstance(phi, Eq):
        return eval_term(s, env, phi.left) == eval_term(s, env, phi.right)
    if isinstance(phi, Leq):
        return eval_term(s, env, phi.left) <= eval_term(s, env, phi.right)
    if isinstance(phi, Not):
        return not _eval(s, env, phi.body)
    if isinstance(phi, And):
        return _eval(s, env, phi.left) and _eval(s, env, phi.right)
    if isinstance(phi, Or):
        return _eval(s, env, phi.left) or _eval(s, env, phi.right)
    if isinstance(phi, Implies):
        return (not _eval(s, env, phi.left)) or _eval(s, env, phi.right)
    if isinstance(phi, ForallAddress):
        return _eval_forall(s, env, phi)
    raise TypeError(f"not a formula: {phi!r}")


def flatten_and(phi: Formula) -> list[Formula]:
    if isinstance(phi, And):
        return flatten_and(phi.left) + flatten_and(phi.right)
    return [phi]


def _peel_quantifiers(phi: Formula) -> tuple[list[str], Formula]:
    # Stop on a repeated name: re-binding makes the positional free-variable
    # bookkeeping below ambiguous, so the shadowed prefix is peeled alone.
    names: list[str] = []
    body: Formula = phi
    while isinstance(body, ForallAddress) and body.var not in names:
        names.append(body.var)
        body = body.body
    return names, body


def _eval_forall(s: SLStructure, env: dict[str, int], phi: ForallAddress) -> bool:
    names, body = _peel_quantifiers(phi)

    if isinstance(body, And):
        for part in flatten_and(body):
            rebuilt: Formula = part
            for name in reversed(names):
                rebuilt = ForallAddress(name, rebuilt)
            if not _eval(s, env, rebuilt):
                return False
        return True

    if isinstance(body, Implies):
        guards = flatten_and(body.left)
        consequent: Optional[Formula] = body.right
    else:
        guards = []
        consequent = body

    depth_of = {name: i + 1 for i, name in enumerate(names)}
    guards_at: list[list[Formula]] = [[] for _ in range(len(names) + 1)]
    for g in guards:
        depth = max((depth_of.get(v, 0) for v in free_address_vars(g)), default=0)
        guards_at[depth].append(g)

    for g in guards_at[0]:
        if not _eval(s, env, g):
            return True  # antecedent refuted independently of the tuple

    domain = sorted(s.domain)
    saved = {name: env.get(name) for name in names}

    def loop(i: int) -> bool:
        if i == len(names):
            return consequent is None or _eval(s, env, consequent)
        name = names[i]
        for alpha in domain:
            env[name] = alpha
            ok = True
            for g in guards_at[i + 1]:
                if not _eval(s, env, g):
                    ok = False
                    break
            if ok and not loop(i + 1):
                return False
        return True

    try:
        return loop(0)
    finally:
        for name, old in saved.items():
            if old is None:
                env.pop(name, None)
            else:
                env[name] = old


def check_sum_property(s: SLStructure) -> bool:
    """True iff every sum constant equals the total of its balance column."""
    for j in s.sums:
        if s.sums[j] != sum(s.balance.get((j, a), 0) for a in s.domain):
            return False
    return True


def is_sl_model(s: SLStructure, phi: Formula) -> bool:
    """Satisfaction plus the sum property; requires a closed formula."""
    if not is_closed(phi):
        raise EvaluationError(f"formula has free variables {sorted(free_address_vars(phi))}")
    return check_sum_property(s) and eval_formula(s, {}, phi)


def is_distinct(s: SLStructure) -> bool:
    """All Address constants name pairwise different domain elements."""
    values = list(s.addr_const.values())
    return len(set(values)) == len(values)


def well_formed(v: Vocabulary, phi: Formula) -> list[str]:
    """Collect sorting/index/availability violations; empty list means ok."""
    violations: list[str] = []

    def check_term(t: Term) -> None:
        if isinstance(t, AddressConst) and not 1 <= t.index <= v.l:
            violations.append(f"address constant index {t.index} out of range [1,{v.l}]")
        elif isinstance(t, NatConst) and not 1 <= t.index <= v.d:
            violations.append(f"nat constant index {t.index} out of range [1,{v.d}]")
        elif isinstance(t, SumConst) and not 1 <= t.index <= v.m:
            violations.append(f"sum constant index {t.index} out of range [1,{v.m}]")
        elif isinstance(t, Balance):
            if not 1 <= t.index <= v.m:
                violations.append(f"balance index {t.index} out of range [1,{v.m}]")
            if term_sort(t.address) != ADDRESS:
                violations.append("balance applied to a non-Address term")
            check_term(t.address)
        elif isinstance(t, Plus):
            if not v.has_plus:
                violations.append("+ unavailable in this vocabulary")
            for side in (t.left, t.right):
                if term_sort(side) != NAT:
                    violations.append("+ applied to a non-Nat term")
                check_term(side)
        elif isinstance(t, Numeral) and t.value < 0:
            violations.append(f"negative numeral {t.value}")

    bound: list[str] = []

    def check(f: Formula) -> None:
        if isinstance(f, Eq):
            if term_sort(f.left) != term_sort(f.right):
                violations.append("= compares terms of different sorts")
            check_term(f.left)
            check_term(f.right)
            _check_vars(f)
        elif isinstance(f, Leq):
            if not v.has_leq:
                violations.append("<= unavailable in this vocabulary")
            if term_sort(f.left) != NAT or term_sort(f.right) != NAT:
                violations.append("<= applied to a non-Nat term")
            check_term(f.left)
            check_term(f.right)
            _check_vars(f)
        elif isinstance(f, Not):
            check(f.body)
        elif isinstance(f, (And, Or, Implies)):
            check(f.left)
            check(f.right)
        elif isinstance(f, ForallAddress):
            bound.append(f.var)
            check(f.body)
            bound.pop()
        else:
            violations.append(f"unknown formula node {type(f).__name__}")

    def _check_vars(atom: Formula) -> None:
        for t in atom_terms(atom):
            if isinstance(t, AddressVar) and t.name not in bound:
                violations.append(f"free address variable {t.name!r}")

    check(phi)
    return violations
