"""Complete satisfiability oracle for quantifier-free linear arithmetic
over the naturals.

Architecture: a boolean search assigns polarities to atoms, simplifying
the formula after each choice; every consistent polarity leaf yields a
conjunction of linear equalities/inequalities whose integer feasibility
is decided by substitution-based preprocessing followed by branch and
bound on an exact (Fraction-based) simplex relaxation.

Completeness certificate: every variable is non-negative, and each leaf
system is additionally capped by a small-solution bound computed from its
coefficient magnitudes (a Hadamard-style estimate of the largest
subdeterminant of the constraint matrix, times the number of unknowns).
If a leaf system has any natural solution it has one inside the box, so
exhausting the box-bounded branch-and-bound tree is a sound "no".

Resource limits count simplex calls; exceeding the budget reports
INCOMPLETE, which is never conflated with UNSAT.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional

from .presburger import (
    FALSE,
    LinExpr,
    PAnd,
    PAtom,
    PFalse,
    PImplies,
    PNot,
    POr,
    PresFormula,
    PTrue,
    TRUE,
    constants,
    evaluate,
    pand,
    pimplies,
    pnot,
    por,
)

SAT = "sat"
UNSAT = "unsat"
INCOMPLETE = "incomplete"

DEFAULT_NODE_BUDGET = 200_000


@dataclass
class LiaResult:
    status: str
    model: Optional[dict[str, int]] = None
    nodes: int = 0

    @property
    def is_sat(self) -> bool:
        return self.status == SAT


class _Budget:
    __slots__ = ("left", "spent")

    def __init__(self, limit: int):
        self.left = limit
        self.spent = 0

    def tick(self) -> bool:
        if self.left <= 0:
            return False
        self.left -= 1
        self.spent += 1
        return True


class _OutOfBudget(Exception):
    pass


def check_model(phi: PresFormula, model: Mapping[str, int]) -> bool:
    """Evaluate ``phi`` under ``model``; the model must cover every constant."""
    missing = constants(phi) - set(model)
    if missing:
        raise KeyError(f"model missing constants: {sorted(missing)}")
    return evaluate(phi, model)


def solve(phi: PresFormula, node_budget: int = DEFAULT_NODE_BUDGET) -> LiaResult:
    """Decide satisfiability over the naturals; SAT ships a checked model."""
    budget = _Budget(node_budget)
    names = sorted(constants(phi))
    try:
        model = _search(phi, {}, budget)
    except _OutOfBudget:
        return LiaResult(INCOMPLETE, None, budget.spent)
    if model is None:
        return LiaResult(UNSAT, None, budget.spent)
    full = {n: model.get(n, 0) for n in names}
    assert check_model(phi, full), "solver produced a bad model"
    return LiaResult(SAT, full, budget.spent)


# ---------------------------------------------------------------------------
# boolean search


def _simplify(phi: PresFormula, assign: dict[PAtom, bool]) -> PresFormula:
    if isinstance(phi, (PTrue, PFalse)):
        return phi
    if isinstance(phi, PAtom):
        if phi in assign:
            return TRUE if assign[phi] else FALSE
        return phi
    if isinstance(phi, PNot):
        return pnot(_simplify(phi.body, assign))
    if isinstance(phi, PAnd):
        return pand(_simplify(p, assign) for p in phi.parts)
    if isinstance(phi, POr):
        return por(_simplify(p, assign) for p in phi.parts)
    if isinstance(phi, PImplies):
        return pimplies(_simplify(phi.left, assign), _simplify(phi.right, assign))
    raise TypeError(f"not a Presburger formula: {phi!r}")


def _first_atom(phi: PresFormula) -> Optional[PAtom]:
    if isinstance(phi, PAtom):
        return phi
    if isinstance(phi, PNot):
        return _first_atom(phi.body)
    if isinstance(phi, (PAnd, POr)):
        for p in phi.parts:
            found = _first_atom(p)
            if found is not None:
                return found
        return None
    if isinstance(phi, PImplies):
        return _first_atom(phi.left) or _first_atom(phi.right)
    return None


def _search(
    phi: PresFormula, assign: dict[PAtom, bool], budget: _Budget
) -> Optional[dict[str, int]]:
    residual = _simplify(phi, assign)
    if isinstance(residual, PFalse):
        return None
    if isinstance(residual, PTrue):
        return _feasible(assign, budget)
    atom = _first_atom(residual)
    assert atom is not None
    for polarity in (True, False):
        assign[atom] = polarity
        model = _search(residual, assign, budget)
        del assign[atom]
        if model is not None:
            return model
    return None


# ---------------------------------------------------------------------------
# leaf systems: conjunctions of literals

# A constraint is a LinExpr e, read as e = 0 (eqs) or e <= 0 (ineqs).


def _feasible(assign: Mapping[PAtom, bool], budget: _Budget) -> Optional[dict[str, int]]:
    eqs: list[LinExpr] = []
    ineqs: list[LinExpr] = []
    diseqs: list[LinExpr] = []
    for atom, value in assign.items():
        e = atom.left - atom.right
        if atom.op == "=":
            (eqs if value else diseqs).append(e)
        elif value:
            ineqs.append(e)
        else:
            # not (l <= r)  <=>  r + 1 <= l  over the integers
            ineqs.append(e.scale(-1).shift(1))
    return _feasible_split(eqs, ineqs, diseqs, budget)


def _feasible_split(
    eqs: list[LinExpr], ineqs: list[LinExpr], diseqs: list[LinExpr], budget: _Budget
) -> Optional[dict[str, int]]:
    if not diseqs:
        return _solve_system(eqs, ineqs, budget)
    head, rest = diseqs[0], diseqs[1:]
    if not head.names():
        return None if head.offset == 0 else _feasible_split(eqs, ineqs, rest, budget)
    for strict in (head.shift(1), head.scale(-1).shift(1)):  # e <= -1 or e >= 1
        model = _feasible_split(eqs, ineqs + [strict], rest, budget)
        if model is not None:
            return model
    return None


def _solve_system(
    eqs: list[LinExpr], ineqs: list[LinExpr], budget: _Budget
) -> Optional[dict[str, int]]:
    sys_ = _System.build(eqs, ineqs)
    if sys_ is None:
        return None
    return sys_.solve(budget)


@dataclass
class _System:
    """A propagated residual system plus reconstruction bookkeeping."""

    eqs: list[LinExpr] = field(default_factory=list)
    ineqs: list[LinExpr] = field(default_factory=list)
    lower: dict[str, int] = field(default_factory=dict)
    upper: dict[str, int] = field(default_factory=dict)
    fixed: dict[str, int] = field(default_factory=dict)
    defs: list[tuple[str, LinExpr]] = field(default_factory=list)

    @staticmethod
    def build(eqs: list[LinExpr], ineqs: list[LinExpr]) -> Optional["_System"]:
        sys_ = _System(list(eqs), list(ineqs))
        return sys_ if sys_._propagate() else None

    # -- propagation ------------------------------------------------------

    def _propagate(self) -> bool:
        """Substitute/tighten until fixpoint; False means plainly infeasible.

        Every action mutates the constraint lists, so the loop restarts the
        scan after each one rather than iterating stale rows.
        """
        while True:
            normalized_eqs = []
            for e in self.eqs:
                if not e.coeffs:
                    if e.offset != 0:
                        return False
                    continue
                g = math.gcd(*(abs(c) for _, c in e.coeffs))
                if g > 1:
                    if e.offset % g != 0:
                        return False  # divisibility refutation
                    e = LinExpr(tuple((n, c // g) for n, c in e.coeffs), e.offset // g)
                normalized_eqs.append(e)
            self.eqs = normalized_eqs

            normalized_ineqs = []
            for e in self.ineqs:
                if not e.coeffs:
                    if e.offset > 0:
                        return False
                    continue
                g = math.gcd(*(abs(c) for _, c in e.coeffs))
                if g > 1:
                    # sum(g*a*x) + k <= 0  <=>  sum(a*x) + ceil(k/g) <= 0
                    e = LinExpr(
                        tuple((n, c // g) for n, c in e.coeffs), -((-e.offset) // g)
                    )
                normalized_ineqs.append(e)
            self.ineqs = normalized_ineqs

            single_eq = next((e for e in self.eqs if len(e.coeffs) == 1), None)
            if single_eq is not None:
                self.eqs.remove(single_eq)
                name, c = single_eq.coeffs[0]
                if single_eq.offset % c != 0:
                    return False
                if not self._fix(name, -single_eq.offset // c):
                    return False
                continue

            single_ineq = next((e for e in self.ineqs if len(e.coeffs) == 1), None)
            if single_ineq is not None:
                self.ineqs.remove(single_ineq)
                name, c = single_ineq.coeffs[0]
                if c > 0:  # c*x + k <= 0  =>  x <= floor(-k/c)
                    bound = -single_ineq.offset // c
                    if name not in self.upper or bound < self.upper[name]:
                        self.upper[name] = bound
                else:  # x >= ceil(-k/c)
                    bound = math.ceil(Fraction(-single_ineq.offset, c))
                    if bound > self.lower.get(name, 0):
                        self.lower[name] = bound
                continue

            pinched = None
            for name in set(self.lower) | set(self.upper):
                lo = self.lower.get(name, 0)
                hi = self.upper.get(name)
                if hi is not None and hi < lo:
                    return False
                if hi is not None and hi == lo:
                    pinched = (name, lo)
                    break
            if pinched is not None:
                if not self._fix(*pinched):
                    return False
                continue

            eliminable = None
            for e in self.eqs:
                pick = next((nc for nc in e.coeffs if nc[1] in (1, -1)), None)
                if pick is not None:
                    eliminable = (e, pick)
                    break
            if eliminable is not None:
                e, (name, c) = eliminable
                self.eqs.remove(e)
                rest = LinExpr(tuple(nc for nc in e.coeffs if nc[0] != name), e.offset)
                self._substitute(name, rest.scale(-c))  # x = -(rest)/c, c = +-1
                continue

            return True

    def _fix(self, name: str, value: int) -> bool:
        if value < self.lower.get(name, 0):
            return False
        if name in self.upper and value > self.upper[name]:
            return False
        self.lower.pop(name, None)
        self.upper.pop(name, None)
        self.fixed[name] = value
        self._substitute(name, LinExpr.num(value), record=False)
        return True

    def _substitute(self, name: str, definition: LinExpr, record: bool = True) -> None:
        if record:
            self.defs.append((name, definition))
            # domain constraints of the eliminated variable transfer to its
            # definition: lower <= def and def <= upper
            lo = self.lower.pop(name, 0)
            self.ineqs.append(LinExpr.num(lo) - definition)
            if name in self.upper:
                self.ineqs.append(definition - LinExpr.num(self.upper.pop(name)))

        def subst(e: LinExpr) -> LinExpr:
            coeff = dict(e.coeffs).get(name)
            if coeff is None:
                return e
            remaining = LinExpr(tuple(nc for nc in e.coeffs if nc[0] != name), e.offset)
            return remaining + definition.scale(coeff)

        self.eqs = [subst(e) for e in self.eqs]
        self.ineqs = [subst(e) for e in self.ineqs]

    # -- search -----------------------------------------------------------

    def variables(self) -> list[str]:
        names: set[str] = set()
        for e in self.eqs + self.ineqs:
            names |= e.names()
        names |= set(self.lower) | set(self.upper)
        return sorted(names)

    def solve(self, budget: _Budget) -> Optional[dict[str, int]]:
        names = self.variables()
        base: Optional[dict[str, int]]
        if not names:
            base = {}
        else:
            cap = _small_solution_bound(self.eqs, self.ineqs, len(names))
            lo = {n: self.lower.get(n, 0) for n in names}
            hi = {n: min(self.upper[n], cap) if n in self.upper else cap for n in names}
            if any(lo[n] > hi[n] for n in names):
                return None
            base = _branch_and_bound(self.eqs, self.ineqs, names, lo, hi, budget)
        if base is None:
            return None
        return self._reconstruct(base)

    def _reconstruct(self, base: dict[str, int]) -> dict[str, int]:
        model = dict(self.fixed)
        model.update(base)
        for name, definition in reversed(self.defs):
            # variables absent from every residual constraint default to 0
            for dep in definition.names():
                model.setdefault(dep, 0)
            model[name] = definition.value(model)
        return model


def _small_solution_bound(eqs: list[LinExpr], ineqs: list[LinExpr], n_vars: int) -> int:
    """Box size within which some natural solution must exist, if any does.

    Hadamard bound on subdeterminants of the row matrix (slacks contribute
    a single unit per inequality row), scaled by the number of unknowns.
    Deliberately generous; it only guards termination, pruning does the work.
    """
    product = 1
    for e in eqs + ineqs:
        norm_sq = sum(c * c for _, c in e.coeffs) + e.offset * e.offset + 1
        product *= math.isqrt(norm_sq) + 1
    return max(8, (n_vars + len(ineqs) + 1) * product)


# ---------------------------------------------------------------------------
# exact rational feasibility (Phase-I simplex, Bland's rule)


def _lp_feasible(
    eqs: list[LinExpr],
    ineqs: list[LinExpr],
    names: list[str],
    lo: Mapping[str, int],
    hi: Mapping[str, int],
) -> Optional[dict[str, Fraction]]:
    """A rational point satisfying all constraints and bounds, or None."""
    index = {n: i for i, n in enumerate(names)}
    n = len(names)

    rows: list[tuple[list[Fraction], Fraction, bool]] = []  # (coeffs, rhs, is_eq)

    def shifted_row(e: LinExpr) -> tuple[list[Fraction], Fraction]:
        # substitute x = y + lo[x] so every unknown starts at 0
        coeffs = [Fraction(0)] * n
        rhs = Fraction(-e.offset)
        for name, c in e.coeffs:
            coeffs[index[name]] += c
            rhs -= c * lo[name]
        return coeffs, rhs

    for e in eqs:
        coeffs, rhs = shifted_row(e)
        rows.append((coeffs, rhs, True))
    for e in ineqs:
        coeffs, rhs = shifted_row(e)
        rows.append((coeffs, rhs, False))
    for name in names:
        coeffs = [Fraction(0)] * n
        coeffs[index[name]] = Fraction(1)
        rows.append((coeffs, Fraction(hi[name] - lo[name]), False))

    m = len(rows)
    slack_count = sum(1 for _, _, is_eq in rows if not is_eq)
    width = n + slack_count  # artificials appended after structurals+slacks

    tableau: list[list[Fraction]] = []
    basis: list[int] = []
    art_cols: list[int] = []
    slack_at = 0
    for coeffs, rhs, is_eq in rows:
        row = list(coeffs) + [Fraction(0)] * slack_count
        if not is_eq:
            row[n + slack_at] = Fraction(1)
            slack_col = n + slack_at
            slack_at += 1
        else:
            slack_col = -1
        if rhs < 0:
            row = [-v for v in row]
            rhs = -rhs
            slack_col = -1  # negated slack is no longer a basis candidate
        tableau.append(row + [rhs])
        basis.append(slack_col)

    for i in range(m):
        if basis[i] < 0:
            col = width + len(art_cols)
            art_cols.append(col)
            basis[i] = col
    total = width + len(art_cols)
    for i in range(m):
        row = tableau[i]
        rhs = row.pop()
        row.extend(Fraction(0) for _ in range(total - len(row)))
        if basis[i] >= width:
            row[basis[i]] = Fraction(1)
        row.append(rhs)
        tableau[i] = row

    if not art_cols:
        # all rows had ready-made slack basis: origin y=0 is feasible only
        # if every rhs >= 0, which holds by construction here
        point = {name: Fraction(lo[name]) for name in names}
        return point

    # objective: minimize the sum of artificial variables, written with the
    # basic artificial columns eliminated (their reduced costs must be 0)
    obj = [Fraction(0)] * (total + 1)
    for i in range(m):
        if basis[i] >= width:
            for k in range(total + 1):
                obj[k] += tableau[i][k]
    for col in art_cols:
        obj[col] = Fraction(0)

    def pivot(row_i: int, col_j: int) -> None:
        piv = tableau[row_i][col_j]
        tableau[row_i] = [v / piv for v in tableau[row_i]]
        for r in range(m):
            if r != row_i and tableau[r][col_j] != 0:
                factor = tableau[r][col_j]
                tableau[r] = [v - factor * p for v, p in zip(tableau[r], tableau[row_i])]
        if obj[col_j] != 0:
            factor = obj[col_j]
            for k in range(total + 1):
                obj[k] -= factor * tableau[row_i][k]
        basis[row_i] = col_j

    while True:
        # artificials (columns >= width) are never allowed back in
        enter = next((j for j in range(width) if obj[j] > 0), None)
        if enter is None:
            break
        best: Optional[tuple[Fraction, int]] = None
        for i in range(m):
            a = tableau[i][enter]
            if a > 0:
                ratio = tableau[i][total] / a
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:
            return None  # unbounded phase-I objective cannot happen; guard anyway
        pivot(best[1], enter)

    if obj[total] != 0:
        return None  # artificials stuck positive: infeasible

    values = [Fraction(0)] * total
    for i in range(m):
        if basis[i] < total:
            values[basis[i]] = tableau[i][total]
    return {name: values[index[name]] + lo[name] for name in names}


def _branch_and_bound(
    eqs: list[LinExpr],
    ineqs: list[LinExpr],
    names: list[str],
    lo: dict[str, int],
    hi: dict[str, int],
    budget: _Budget,
) -> Optional[dict[str, int]]:
    # explicit stack: box widths come from the small-solution bound, so the
    # branching chain can be far deeper than the interpreter stack
    stack: list[tuple[dict[str, int], dict[str, int]]] = [(lo, hi)]
    while stack:
        lo, hi = stack.pop()
        if not budget.tick():
            raise _OutOfBudget
        point = _lp_feasible(eqs, ineqs, names, lo, hi)
        if point is None:
            continue
        fractional = next((name for name in names if point[name].denominator != 1), None)
        if fractional is None:
            return {name: int(point[name]) for name in names}
        value = point[fractional]
        floor_v = value.numerator // value.denominator
        # push the >= branch first so the <= branch is explored first
        if floor_v + 1 <= hi[fractional]:
            stack.append(({**lo, fractional: floor_v + 1}, hi))
        if lo[fractional] <= floor_v:
            stack.append((lo, {**hi, fractional: floor_v}))
    return None
