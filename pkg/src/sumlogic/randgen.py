"""Seeded random generation of well-formed formulas and structures.

Used by the test suite and the corpus scripts; everything is driven by an
explicit ``random.Random`` so runs are reproducible.
"""

from __future__ import annotations

import random
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
    SLStructure,
    SumConst,
    Term,
    Vocabulary,
    formula_length,
    structure_from_balances,
)

_VAR_NAMES = ("x", "y", "z", "u", "v", "w")


def random_address_term(rng: random.Random, v: Vocabulary, bound: list[str]) -> Term:
    options = []
    if v.l > 0:
        options.append("const")
    if bound:
        options.append("var")
    if not options:
        raise ValueError("no address-sorted term available (l=0, no bound variable)")
    if rng.choice(options) == "const":
        return AddressConst(rng.randint(1, v.l))
    return AddressVar(rng.choice(bound))


def random_nat_term(
    rng: random.Random, v: Vocabulary, bound: list[str], depth: int, max_numeral: int = 4
) -> Term:
    options = ["numeral", "sum"]
    if v.d > 0:
        options.append("const")
    if v.l > 0 or bound:
        options.extend(["balance", "balance"])
    if v.has_plus and depth > 0:
        options.append("plus")
    pick = rng.choice(options)
    if pick == "numeral":
        return Numeral(rng.randint(0, max_numeral))
    if pick == "const":
        return NatConst(rng.randint(1, v.d))
    if pick == "sum":
        return SumConst(rng.randint(1, v.m))
    if pick == "balance":
        return Balance(rng.randint(1, v.m), random_address_term(rng, v, bound))
    return Plus(
        random_nat_term(rng, v, bound, depth - 1, max_numeral),
        random_nat_term(rng, v, bound, depth - 1, max_numeral),
    )


def random_formula(
    rng: random.Random,
    v: Vocabulary,
    depth: int = 3,
    bound: Optional[list[str]] = None,
    max_numeral: int = 4,
) -> Formula:
    """A closed, well-formed formula over ``v`` (universal fragment only)."""
    bound = list(bound or [])
    if depth <= 0:
        return _random_atom(rng, v, bound, max_numeral)
    # conjunction-heavy mix so that a corpus has a decent unsatisfiable share
    roll = rng.random()
    if roll < 0.26:
        return _random_atom(rng, v, bound, max_numeral)
    if roll < 0.40:
        return Not(random_formula(rng, v, depth - 1, bound, max_numeral))
    if roll < 0.72:
        return And(
            random_formula(rng, v, depth - 1, bound, max_numeral),
            random_formula(rng, v, depth - 1, bound, max_numeral),
        )
    if roll < 0.79:
        return Or(
            random_formula(rng, v, depth - 1, bound, max_numeral),
            random_formula(rng, v, depth - 1, bound, max_numeral),
        )
    if roll < 0.85:
        return Implies(
            random_formula(rng, v, depth - 1, bound, max_numeral),
            random_formula(rng, v, depth - 1, bound, max_numeral),
        )
    fresh = next(n for n in _VAR_NAMES if n not in bound) if len(bound) < len(_VAR_NAMES) else None
    if fresh is None:
        return _random_atom(rng, v, bound, max_numeral)
    return ForallAddress(fresh, random_formula(rng, v, depth - 1, bound + [fresh], max_numeral))


def _random_atom(rng: random.Random, v: Vocabulary, bound: list[str], max_numeral: int) -> Formula:
    can_address = v.l > 0 or bound
    if can_address and rng.random() < 0.25:
        return Eq(random_address_term(rng, v, bound), random_address_term(rng, v, bound))
    left = random_nat_term(rng, v, bound, 1, max_numeral)
    right = random_nat_term(rng, v, bound, 1, max_numeral)
    if v.has_leq and rng.random() < 0.4:
        return Leq(left, right)
    return Eq(left, right)


def random_fragment_formula(
    rng: random.Random,
    max_l: int = 3,
    max_d: int = 2,
    max_length: int = 12,
) -> tuple[Vocabulary, Formula]:
    """A formula in the single-balance, plus/leq-free fragment.

    Lengths are capped by rejection sampling; d is biased towards 0 because
    nat constants blow up the brute-force oracle's search space.
    """
    l = rng.randint(0, max_l)
    d = rng.choice([0] * 4 + list(range(1, max_d + 1)))
    v = Vocabulary(l, 1, d, has_plus=False, has_leq=False)
    while True:
        phi = random_formula(rng, v, depth=rng.randint(1, 3), max_numeral=3)
        if formula_length(phi) <= max_length:
            return v, phi


def random_structure(
    rng: random.Random,
    v: Vocabulary,
    max_domain: int = 6,
    max_value: int = 8,
    distinct: bool = False,
    satisfy_sum_property: bool = True,
) -> SLStructure:
    """A random finite interpretation of ``v``; sums derived by default."""
    low = v.l if distinct else min(v.l, 1)
    size = rng.randint(low, max(low, max_domain))
    domain = list(range(1, size + 1))
    if distinct:
        chosen = rng.sample(domain, v.l)
    else:
        chosen = [rng.choice(domain) for _ in range(v.l)] if domain else []
    addr_const = {i + 1: chosen[i] for i in range(v.l)}
    balance = {
        (j, a): rng.randint(0, max_value) for j in range(1, v.m + 1) for a in domain
    }
    nat_const = {k: rng.randint(0, max_value) for k in range(1, v.d + 1)}
    if satisfy_sum_property:
        return structure_from_balances(domain, addr_const, balance, nat_const, m=v.m)
    sums = {j: rng.randint(0, max_value * max(1, size)) for j in range(1, v.m + 1)}
    return SLStructure(frozenset(domain), addr_const, balance, nat_const, sums)
