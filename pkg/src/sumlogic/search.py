"""Bounded brute-force model search over finite structures.

The search enumerates interpretations cell by cell (address constants,
then Nat constants, then balance table entries in address-major order),
pruning any branch whose partially-filled structure already refutes a
top-level conjunct under a three-valued interval evaluation.  Sum
constants are always derived from the balance table, never enumerated,
so every candidate satisfies the sum property by construction.

Enumeration is deterministic: domain sizes ascending, candidate values
ascending, and branches that are pruned would not have contained models,
so the first structure returned is the lexicographically smallest model
within bounds.  ``None`` means the bounded space is exhausted; it is not
an unsatisfiability verdict.  Domain sizes are searched in ascending
order sequentially, which matches the smallest-domain-wins merge rule a
parallel by-size split would use.
"""

from __future__ import annotations

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
    SLStructure,
    SumConst,
    Term,
    Vocabulary,
    flatten_and,
    free_address_vars,
    structure_from_balances,
    well_formed,
)


@dataclass(frozen=True)
class SearchBounds:
    max_addresses: int
    max_value: int

    def __post_init__(self) -> None:
        if self.max_addresses < 0 or self.max_value < 0:
            raise ValueError("bounds must be non-negative")


def default_max_value(phi: Formula, v: Vocabulary, max_addresses: int) -> int:
    """Heuristic value cap: largest numeral + d + max_addresses + 1.

    Equality-only formulas distinguish values only up to their numerals and
    mutual equalities; the extra slack covers the sum coupling.  This is an
    engineering default, not a proven bound.
    """
    from .core import atom_terms, subformulas

    max_numeral = 0
    for sub in subformulas(phi):
        if isinstance(sub, (Eq, Leq)):
            for t in atom_terms(sub):
                if isinstance(t, Numeral):
                    max_numeral = max(max_numeral, t.value)
    return max_numeral + v.d + max_addresses + 1


def default_bounds(phi: Formula, v: Vocabulary, max_addresses: int) -> SearchBounds:
    return SearchBounds(max_addresses, default_max_value(phi, v, max_addresses))


def find_model(
    phi: Formula, v: Vocabulary, bounds: SearchBounds
) -> Optional[SLStructure]:
    """Smallest in-bounds structure satisfying ``phi`` plus the sum property."""
    return _search(phi, v, bounds, distinct=False)


def find_distinct_model(
    phi: Formula, v: Vocabulary, bounds: SearchBounds
) -> Optional[SLStructure]:
    """As :func:`find_model` but Address constants must be pairwise distinct."""
    return _search(phi, v, bounds, distinct=True)


# ---------------------------------------------------------------------------
# three-valued evaluation over a partially assigned structure

_UNKNOWN = None


class _PartialWorld:
    __slots__ = ("z", "cap", "v", "addr", "nat", "bal")

    def __init__(self, z: int, cap: int, v: Vocabulary):
        self.z = z
        self.cap = cap
        self.v = v
        self.addr: list[Optional[int]] = [None] * (v.l + 1)
        self.nat: list[Optional[int]] = [None] * (v.d + 1)
        self.bal: dict[tuple[int, int], Optional[int]] = {
            (j, a): None for j in range(1, v.m + 1) for a in range(1, z + 1)
        }

    def sum_interval(self, j: int) -> tuple[int, int]:
        low = 0
        missing = 0
        for a in range(1, self.z + 1):
            val = self.bal[(j, a)]
            if val is None:
                missing += 1
            else:
                low += val
        return low, low + missing * self.cap


def _addr_value(world: _PartialWorld, env: dict[str, int], t: Term):
    """Concrete address, or ('const', i) for an unassigned constant."""
    if isinstance(t, AddressVar):
        return env[t.name]
    if isinstance(t, AddressConst):
        val = world.addr[t.index]
        return ("const", t.index) if val is None else val
    raise TypeError(f"not an address term: {t!r}")


def _interval(world: _PartialWorld, env: dict[str, int], t: Term) -> tuple[int, int]:
    if isinstance(t, Numeral):
        return t.value, t.value
    if isinstance(t, NatConst):
        val = world.nat[t.index]
        return (0, world.cap) if val is None else (val, val)
    if isinstance(t, SumConst):
        return world.sum_interval(t.index)
    if isinstance(t, Balance):
        addr = _addr_value(world, env, t.address)
        if isinstance(addr, tuple):
            return 0, world.cap
        val = world.bal[(t.index, addr)]
        return (0, world.cap) if val is None else (val, val)
    if isinstance(t, Plus):
        l1, h1 = _interval(world, env, t.left)
        l2, h2 = _interval(world, env, t.right)
        return l1 + l2, h1 + h2
    raise TypeError(f"not a Nat term: {t!r}")


def _tv_eval(world: _PartialWorld, env: dict[str, int], phi: Formula) -> Optional[bool]:
    if isinstance(phi, Eq):
        if isinstance(phi.left, (AddressConst, AddressVar)):
            lhs = _addr_value(world, env, phi.left)
            rhs = _addr_value(world, env, phi.right)
            if isinstance(lhs, tuple) or isinstance(rhs, tuple):
                return True if lhs == rhs else _UNKNOWN
            return lhs == rhs
        l1, h1 = _interval(world, env, phi.left)
        l2, h2 = _interval(world, env, phi.right)
        if h1 < l2 or h2 < l1:
            return False
        if l1 == h1 == l2 == h2:
            return True
        return _UNKNOWN
    if isinstance(phi, Leq):
        l1, h1 = _interval(world, env, phi.left)
        l2, h2 = _interval(world, env, phi.right)
        if h1 <= l2:
            return True
        if l1 > h2:
            return False
        return _UNKNOWN
    if isinstance(phi, Not):
        val = _tv_eval(world, env, phi.body)
        return _UNKNOWN if val is _UNKNOWN else not val
    if isinstance(phi, And):
        return _tv_and(
            _tv_eval(world, env, phi.left), lambda: _tv_eval(world, env, phi.right)
        )
    if isinstance(phi, Or):
        left = _tv_eval(world, env, phi.left)
        if left is True:
            return True
        right = _tv_eval(world, env, phi.right)
        if right is True:
            return True
        if left is False and right is False:
            return False
        return _UNKNOWN
    if isinstance(phi, Implies):
        left = _tv_eval(world, env, phi.left)
        if left is False:
            return True
        right = _tv_eval(world, env, phi.right)
        if right is True:
            return True
        if left is True and right is False:
            return False
        return _UNKNOWN
    if isinstance(phi, ForallAddress):
        return _tv_forall(world, env, phi)
    raise TypeError(f"not a formula: {phi!r}")


def _tv_and(left, right_thunk):
    if left is False:
        return False
    right = right_thunk()
    if right is False:
        return False
    if left is True and right is True:
        return True
    return _UNKNOWN


def _peel(phi: ForallAddress) -> tuple[list[str], Formula]:
    names: list[str] = []
    body: Formula = phi
    while isinstance(body, ForallAddress) and body.var not in names:
        names.append(body.var)
        body = body.body
    return names, body


def _tv_forall(
    world: _PartialWorld, env: dict[str, int], phi: ForallAddress
) -> Optional[bool]:
    names, body = _peel(phi)

    if isinstance(body, And):
        result: Optional[bool] = True
        for part in flatten_and(body):
            rebuilt: Formula = part
            for name in reversed(names):
                rebuilt = ForallAddress(name, rebuilt)
            val = _tv_eval(world, env, rebuilt)
            if val is False:
                return False
            if val is _UNKNOWN:
                result = _UNKNOWN
        return result

    # Antecedent conjuncts act as guards: once one is definitely false for
    # a partial tuple, no extension of that tuple can falsify the body.
    guards = flatten_and(body.left) if isinstance(body, Implies) else []
    depth_of = {name: i + 1 for i, name in enumerate(names)}
    guards_at: list[list[Formula]] = [[] for _ in range(len(names) + 1)]
    for g in guards:
        depth = max((depth_of.get(nm, 0) for nm in free_address_vars(g)), default=0)
        guards_at[depth].append(g)

    for g in guards_at[0]:
        if _tv_eval(world, env, g) is False:
            return True

    saw_unknown = False
    saved = {name: env.get(name) for name in names}

    def loop(i: int) -> bool:
        nonlocal saw_unknown
        if i == len(names):
            val = _tv_eval(world, env, body)
            if val is False:
                return False
            if val is _UNKNOWN:
                saw_unknown = True
            return True
        name = names[i]
        for alpha in range(1, world.z + 1):
            env[name] = alpha
            skip = False
            for g in guards_at[i + 1]:
                if _tv_eval(world, env, g) is False:
                    skip = True
                    break
            if not skip and not loop(i + 1):
                return False
        return True

    try:
        if not loop(0):
            return False
        return _UNKNOWN if saw_unknown else True
    finally:
        for name, old in saved.items():
            if old is None:
                env.pop(name, None)
            else:
                env[name] = old


# ---------------------------------------------------------------------------
# the cell-by-cell enumeration


def _search(
    phi: Formula, v: Vocabulary, bounds: SearchBounds, distinct: bool
) -> Optional[SLStructure]:
    issues = well_formed(v, phi)
    if issues:
        raise ValueError("formula not well-formed: " + "; ".join(issues))
    if free_address_vars(phi):
        raise ValueError("formula must be closed")

    conjuncts = flatten_and(phi)
    for z in range(0, bounds.max_addresses + 1):
        if v.l > 0 and z == 0:
            continue  # Address constants need a non-empty domain
        if distinct and z < v.l:
            continue
        found = _search_at_size(conjuncts, v, z, bounds.max_value, distinct)
        if found is not None:
            return found
    return None


def _search_at_size(
    conjuncts: list[Formula], v: Vocabulary, z: int, cap: int, distinct: bool
) -> Optional[SLStructure]:
    world = _PartialWorld(z, cap, v)

    cells: list[tuple[str, int, int]] = []
    cells.extend(("a", i, 0) for i in range(1, v.l + 1))
    cells.extend(("c", k, 0) for k in range(1, v.d + 1))
    for a in range(1, z + 1):
        cells.extend(("b", j, a) for j in range(1, v.m + 1))

    def store(cell, value) -> None:
        kind, x, y = cell
        if kind == "a":
            world.addr[x] = value
        elif kind == "c":
            world.nat[x] = value
        else:
            world.bal[(x, y)] = value

    def candidates(cell):
        kind, x, _ = cell
        if kind != "a":
            return range(0, cap + 1)
        if not distinct:
            return range(1, z + 1)
        used = {val for val in world.addr[1:] if val is not None}
        return [val for val in range(1, z + 1) if val not in used]

    def complete() -> SLStructure:
        # every conjunct is already definitely true; minimal fill preserves
        # lexicographic-first order
        for cell in cells:
            kind, x, y = cell
            current = (
                world.addr[x]
                if kind == "a"
                else world.nat[x] if kind == "c" else world.bal[(x, y)]
            )
            if current is None:
                store(cell, next(iter(candidates(cell))))
        return _to_structure(world, v, z)

    def dfs(index: int, pending: list[Formula]) -> Optional[SLStructure]:
        # truth values are monotone in the assignment, so conjuncts proven
        # true earlier never need re-evaluation
        remaining: list[Formula] = []
        for c in pending:
            val = _tv_eval(world, {}, c)
            if val is False:
                return None
            if val is _UNKNOWN:
                remaining.append(c)
        if not remaining:
            return complete()
        if index == len(cells):
            return None  # unreachable: a full assignment evaluates two-valued
        cell = cells[index]
        for value in candidates(cell):
            store(cell, value)
            found = dfs(index + 1, remaining)
            if found is not None:
                return found
        store(cell, None)
        return None

    return dfs(0, list(conjuncts))


def _to_structure(world: _PartialWorld, v: Vocabulary, z: int) -> SLStructure:
    domain = range(1, z + 1)
    addr_const = {i: world.addr[i] for i in range(1, v.l + 1)}
    balance = {(j, a): world.bal[(j, a)] for j in range(1, v.m + 1) for a in domain}
    nat_const = {k: world.nat[k] for k in range(1, v.d + 1)}
    return structure_from_balances(domain, addr_const, balance, nat_const, m=v.m)
