"""Satisfiability for the single-balance fragment via linear arithmetic.

Pipeline: enumerate set partitions of the Address constants, merge each
partition's equated constants (after which constants can be read as
pairwise distinct), bound the domain size by ``kappa``, translate to a
quantifier-free linear formula (sums expanded over the slots, universals
unrolled, address comparisons folded to true/false), conjoin the side
conditions that dead slots carry zero balances, and ask the arithmetic
oracle.  The input formula is satisfiable iff some partition's query is.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from . import lia
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
    free_address_vars,
    is_distinct,
    term_sort,
    well_formed,
    ADDRESS,
)
from .presburger import (
    FALSE,
    LinExpr,
    PresFormula,
    TRUE,
    eq as peq,
    pand,
    pimplies,
    pnot,
    por,
)


class FragmentError(Exception):
    """The vocabulary is outside the decidable single-balance fragment."""


class OracleError(Exception):
    """The arithmetic oracle gave up (resource limit) or misbehaved."""


# ---------------------------------------------------------------------------
# partitions


@dataclass(frozen=True)
class Partition:
    """Disjoint non-empty blocks covering {1..l}, ordered by least element."""

    blocks: tuple[frozenset[int], ...]

    def __post_init__(self) -> None:
        seen: set[int] = set()
        for b in self.blocks:
            if not b:
                raise ValueError("empty block")
            if b & seen:
                raise ValueError("overlapping blocks")
            seen |= b
        if seen and seen != set(range(1, max(seen) + 1)):
            raise ValueError("blocks must cover 1..l")
        order = sorted(range(len(self.blocks)), key=lambda i: min(self.blocks[i]))
        object.__setattr__(self, "blocks", tuple(self.blocks[i] for i in order))

    def __len__(self) -> int:
        return len(self.blocks)

    def map(self, i: int) -> int:
        """1-based index of the block holding constant ``i``."""
        for k, b in enumerate(self.blocks, start=1):
            if i in b:
                return k
        raise KeyError(i)

    def render(self) -> str:
        inner = " | ".join(
            " ".join(f"a{i}" for i in sorted(b)) for b in self.blocks
        )
        return "{" + inner + "}"


def enumerate_partitions(l: int) -> list[Partition]:
    """All set partitions of {1..l} in restricted-growth-string order."""
    if l == 0:
        return [Partition(())]
    out: list[Partition] = []
    rgs = [0] * l

    def extend(i: int, peak: int) -> None:
        if i == l:
            n_blocks = peak + 1
            blocks = [set() for _ in range(n_blocks)]
            for pos, label in enumerate(rgs, start=1):
                blocks[label].add(pos)
            out.append(Partition(tuple(frozenset(b) for b in blocks)))
            return
        for label in range(peak + 2):
            rgs[i] = label
            extend(i + 1, max(peak, label))

    extend(1, 0)  # rgs[0] is pinned to 0
    return out


def apply_partition(phi: Formula, p: Partition) -> Formula:
    """Merge equated Address constants: every a_i becomes a_{P(i)}."""

    def on_term(t: Term) -> Term:
        if isinstance(t, AddressConst):
            return AddressConst(p.map(t.index))
        if isinstance(t, Balance):
            return Balance(t.index, on_term(t.address))
        if isinstance(t, Plus):
            return Plus(on_term(t.left), on_term(t.right))
        return t

    def on_formula(f: Formula) -> Formula:
        if isinstance(f, Eq):
            return Eq(on_term(f.left), on_term(f.right))
        if isinstance(f, Leq):
            return Leq(on_term(f.left), on_term(f.right))
        if isinstance(f, Not):
            return Not(on_formula(f.body))
        if isinstance(f, And):
            return And(on_formula(f.left), on_formula(f.right))
        if isinstance(f, Or):
            return Or(on_formula(f.left), on_formula(f.right))
        if isinstance(f, Implies):
            return Implies(on_formula(f.left), on_formula(f.right))
        if isinstance(f, ForallAddress):
            return ForallAddress(f.var, on_formula(f.body))
        raise TypeError(f"not a formula: {f!r}")

    return on_formula(phi)


def partitioned_vocabulary(v: Vocabulary, p: Partition) -> Vocabulary:
    return Vocabulary(len(p), v.m, v.d, v.has_plus, v.has_leq)


# ---------------------------------------------------------------------------
# the domain-size bound


def kappa(l: int, length: int) -> int:
    """Domain-size bound ``l + length + 1`` for the single-balance fragment."""
    return l + length + 1


def check_fragment(v: Vocabulary) -> None:
    if v.m != 1 or v.has_plus or v.has_leq:
        raise FragmentError(
            "decision procedure covers only vocabularies with one balance "
            f"function and neither + nor <= (got m={v.m}, +={v.has_plus}, "
            f"<=={v.has_leq}); no domain bound is known outside that fragment"
        )


# ---------------------------------------------------------------------------
# the corresponding linear vocabulary


@dataclass(frozen=True)
class PresVocabulary:
    """Slot constants for a bounded-domain reading of a sum-logic vocabulary.

    ``a1..aK`` are activity indicators (zero means the slot is unused),
    ``b{i}_{j}`` the balance of slot i under function j, ``c1..cd`` copies
    of the Nat constants.
    """

    kappa_tilde: int
    m: int
    d: int

    def __post_init__(self) -> None:
        if self.kappa_tilde < 0:
            raise ValueError("negative bound")

    def indicator(self, i: int) -> LinExpr:
        return LinExpr.const(f"a{i}")

    def balance(self, i: int, j: int) -> LinExpr:
        return LinExpr.const(f"b{i}_{j}")

    def nat(self, k: int) -> LinExpr:
        return LinExpr.const(f"c{k}")

    def sum_expansion(self, j: int) -> LinExpr:
        out = LinExpr.num(0)
        for i in range(1, self.kappa_tilde + 1):
            out = out + self.balance(i, j)
        return out


def build_eta(pv: PresVocabulary, l: int) -> PresFormula:
    """Side conditions: dead slots have zero balances, constant slots are
    live, and live slots form a prefix."""
    if l > pv.kappa_tilde:
        raise ValueError("bound smaller than the number of Address constants")
    zero = LinExpr.num(0)
    eta1 = pand(
        pimplies(
            peq(pv.indicator(i), zero),
            pand(peq(pv.balance(i, j), zero) for j in range(1, pv.m + 1)),
        )
        for i in range(1, pv.kappa_tilde + 1)
    )
    eta2 = pand(
        pnot(peq(pv.indicator(i), zero)) for i in range(1, l + 1)
    )
    eta3 = pand(
        pimplies(
            peq(pv.indicator(i), zero),
            pand(
                peq(pv.indicator(i2), zero)
                for i2 in range(i, pv.kappa_tilde + 1)
            ),
        )
        for i in range(1, pv.kappa_tilde + 1)
    )
    return pand([eta1, eta2, eta3])


# ---------------------------------------------------------------------------
# the formula translation


def to_negation_and_core(phi: Formula) -> Formula:
    """Rewrite Or/Implies into the not/and/forall core the translation covers."""
    if isinstance(phi, (Eq, Leq)):
        return phi
    if isinstance(phi, Not):
        return Not(to_negation_and_core(phi.body))
    if isinstance(phi, And):
        return And(to_negation_and_core(phi.left), to_negation_and_core(phi.right))
    if isinstance(phi, Or):
        return Not(
            And(
                Not(to_negation_and_core(phi.left)),
                Not(to_negation_and_core(phi.right)),
            )
        )
    if isinstance(phi, Implies):
        return Not(
            And(
                to_negation_and_core(phi.left),
                Not(to_negation_and_core(phi.right)),
            )
        )
    if isinstance(phi, ForallAddress):
        return ForallAddress(phi.var, to_negation_and_core(phi.body))
    raise TypeError(f"not a formula: {phi!r}")


def build_tau(phi: Formula, pv: PresVocabulary) -> PresFormula:
    """Translate a closed formula, read with pairwise-distinct constants.

    Sums become the explicit slot total, each universal becomes a
    conjunction of per-slot clauses guarded by the slot indicator, address
    comparisons fold to true/false, and balance applications land on the
    slot's balance constant.
    """
    if free_address_vars(phi):
        raise ValueError("formula must be closed")
    return _tau(to_negation_and_core(phi), pv, {})


def _slot(t: Term, env: dict[str, int]) -> int:
    if isinstance(t, AddressConst):
        return t.index  # constant i lives in slot i under the distinct reading
    if isinstance(t, AddressVar):
        return env[t.name]
    raise TypeError(f"not an address term: {t!r}")


def _tau_term(t: Term, pv: PresVocabulary, env: dict[str, int]) -> LinExpr:
    if isinstance(t, Numeral):
        return LinExpr.num(t.value)
    if isinstance(t, NatConst):
        return pv.nat(t.index)
    if isinstance(t, SumConst):
        return pv.sum_expansion(t.index)
    if isinstance(t, Balance):
        return pv.balance(_slot(t.address, env), t.index)
    if isinstance(t, Plus):
        return _tau_term(t.left, pv, env) + _tau_term(t.right, pv, env)
    raise TypeError(f"not a Nat term: {t!r}")


def _tau(phi: Formula, pv: PresVocabulary, env: dict[str, int]) -> PresFormula:
    if isinstance(phi, Eq):
        if term_sort(phi.left) == ADDRESS:
            return TRUE if _slot(phi.left, env) == _slot(phi.right, env) else FALSE
        return peq(_tau_term(phi.left, pv, env), _tau_term(phi.right, pv, env))
    if isinstance(phi, Leq):
        from .presburger import leq as pleq

        return pleq(_tau_term(phi.left, pv, env), _tau_term(phi.right, pv, env))
    if isinstance(phi, Not):
        return pnot(_tau(phi.body, pv, env))
    if isinstance(phi, And):
        return pand([_tau(phi.left, pv, env), _tau(phi.right, pv, env)])
    if isinstance(phi, ForallAddress):
        clauses = []
        for i in range(1, pv.kappa_tilde + 1):
            clauses.append(
                por(
                    [
                        peq(pv.indicator(i), LinExpr.num(0)),
                        _tau(phi.body, pv, {**env, phi.var: i}),
                    ]
                )
            )
        return pand(clauses)
    raise TypeError(f"unexpected connective after normalization: {phi!r}")


# ---------------------------------------------------------------------------
# congruence: moving between structures and slot models


def pres_model_from_structure(
    s: SLStructure, pv: PresVocabulary, l: int
) -> dict[str, int]:
    """Slot model congruent to a distinct structure with |domain| <= bound.

    Slot i holds the i-th domain element under the enumeration that lists
    the constant-named addresses first (in constant order), then the rest.
    """
    if not is_distinct(s):
        raise ValueError("structure must interpret constants distinctly")
    if len(s.domain) > pv.kappa_tilde:
        raise ValueError("domain exceeds the slot bound")
    named = [s.addr_const[i] for i in sorted(s.addr_const)]
    if sorted(s.addr_const) != list(range(1, l + 1)):
        raise ValueError("constants must be exactly a1..al")
    rest = sorted(s.domain - set(named))
    order = named + rest
    model: dict[str, int] = {}
    for i in range(1, pv.kappa_tilde + 1):
        model[f"a{i}"] = 1 if i <= len(order) else 0
        for j in range(1, pv.m + 1):
            if i <= len(order):
                model[f"b{i}_{j}"] = s.balance[(j, order[i - 1])]
            else:
                model[f"b{i}_{j}"] = 0
    for k in range(1, pv.d + 1):
        model[f"c{k}"] = s.nat_const[k]
    return model


def structure_from_pres_model(
    model: dict[str, int], pv: PresVocabulary, l: int
) -> SLStructure:
    """Distinct structure read off a slot model satisfying the side conditions."""
    z = 0
    for i in range(1, pv.kappa_tilde + 1):
        if model.get(f"a{i}", 0) > 0:
            z = i
    domain = frozenset(range(1, z + 1))
    addr_const = {i: i for i in range(1, l + 1)}
    balance = {
        (j, a): model.get(f"b{a}_{j}", 0)
        for j in range(1, pv.m + 1)
        for a in domain
    }
    nat_const = {k: model.get(f"c{k}", 0) for k in range(1, pv.d + 1)}
    sums = {
        j: sum(balance[(j, a)] for a in domain) for j in range(1, pv.m + 1)
    }
    return SLStructure(domain, addr_const, balance, nat_const, sums)


# ---------------------------------------------------------------------------
# the decision procedure

Oracle = Callable[[PresFormula], lia.LiaResult]


@dataclass
class PartitionVerdict:
    partition: Partition
    kappa_tilde: int
    status: str
    oracle_nodes: int = 0


@dataclass
class DecideOutcome:
    status: str  # lia.SAT or lia.UNSAT
    witness_partition: Optional[Partition] = None
    pres_model: Optional[dict[str, int]] = None
    structure: Optional[SLStructure] = None
    per_partition: list[PartitionVerdict] = field(default_factory=list)

    @property
    def is_sat(self) -> bool:
        return self.status == lia.SAT


def decide(
    phi: Formula,
    v: Vocabulary,
    oracle: Optional[Oracle] = None,
    stop_at_first_sat: bool = True,
) -> DecideOutcome:
    """SAT/UNSAT for a closed formula in the single-balance fragment.

    One oracle query per partition of the Address constants; satisfiable
    iff some query is.  On SAT the outcome carries the witnessing
    partition, the oracle model, and a reconstructed structure over the
    *original* vocabulary (constant i is sent to the slot of its block).
    """
    check_fragment(v)
    issues = well_formed(v, phi)
    if issues:
        raise ValueError("formula not well-formed: " + "; ".join(issues))
    if free_address_vars(phi):
        raise ValueError("formula must be closed")
    ask = oracle if oracle is not None else lia.solve

    outcome = DecideOutcome(status=lia.UNSAT)
    for p in enumerate_partitions(v.l):
        phi_p = apply_partition(phi, p)
        l_prime = len(p)
        bound = max(kappa(l_prime, formula_length(phi_p)), l_prime)
        pv = PresVocabulary(bound, v.m, v.d)
        query = pand([build_tau(phi_p, pv), build_eta(pv, l_prime)])
        result = ask(query)
        if result.status == lia.INCOMPLETE:
            raise OracleError(
                f"oracle gave up on partition {p.render()} (bound {bound})"
            )
        outcome.per_partition.append(
            PartitionVerdict(p, bound, result.status, result.nodes)
        )
        if result.status == lia.SAT and outcome.status != lia.SAT:
            outcome.status = lia.SAT
            outcome.witness_partition = p
            outcome.pres_model = result.model
            reduced = structure_from_pres_model(result.model, pv, l_prime)
            outcome.structure = SLStructure(
                reduced.domain,
                {i: p.map(i) for i in range(1, v.l + 1)},
                reduced.balance,
                reduced.nat_const,
                reduced.sums,
            )
            if stop_at_first_sat:
                break
    return outcome


def shrink_witness(s: SLStructure, phi: Formula) -> SLStructure:
    """Greedily drop unnamed addresses while the structure stays a model.

    Mirrors the small-model argument: removing an address and deducting its
    balances from the sums preserves the sum property, and often yields a
    far smaller witness than the translation bound.
    """
    from .core import is_sl_model

    current = s
    changed = True
    while changed:
        changed = False
        named = set(current.addr_const.values())
        for alpha in sorted(current.domain - named):
            domain = current.domain - {alpha}
            balance = {
                (j, a): val for (j, a), val in current.balance.items() if a != alpha
            }
            sums = {
                j: current.sums[j] - current.balance.get((j, alpha), 0)
                for j in current.sums
            }
            candidate = SLStructure(
                domain, current.addr_const, balance, current.nat_const, sums
            )
            if all(x >= 0 for x in sums.values()) and is_sl_model(candidate, phi):
                current = candidate
                changed = True
                break
    return current
