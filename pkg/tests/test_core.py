import random

import pytest

from sumlogic.core import (
    AddressConst,
    AddressVar,
    And,
    Balance,
    Eq,
    EvaluationError,
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
    Vocabulary,
    check_sum_property,
    eval_formula,
    eval_term,
    formula_length,
    free_address_vars,
    is_distinct,
    is_sl_model,
    structure_from_balances,
    well_formed,
)
from sumlogic.randgen import random_formula, random_structure


def make_structure(domain, addr_const=(), balance=(), nat_const=(), sums=()):
    return SLStructure(
        frozenset(domain), dict(addr_const), dict(balance), dict(nat_const), dict(sums)
    )


# ---------------------------------------------------------------------------
# term evaluation


def test_eval_sum_constant_lookup():
    s = make_structure([], sums={1: 5})
    assert eval_term(s, {}, SumConst(1)) == 5


def test_eval_plus_of_numerals():
    s = make_structure([])
    assert eval_term(s, {}, Plus(Numeral(2), Numeral(3))) == 5


def test_eval_balance_at_named_address():
    s = make_structure([7], addr_const={1: 7}, balance={(1, 7): 7}, sums={1: 7})
    assert eval_term(s, {}, Balance(1, AddressConst(1))) == 7


def test_eval_unbound_variable_raises():
    s = make_structure([1], balance={(1, 1): 0}, sums={1: 0})
    with pytest.raises(EvaluationError):
        eval_term(s, {}, Balance(1, AddressVar("x")))


def test_eval_missing_symbol_raises():
    s = make_structure([], sums={1: 0})
    with pytest.raises(EvaluationError):
        eval_term(s, {}, NatConst(1))


# ---------------------------------------------------------------------------
# formula evaluation


def test_universal_over_empty_domain_is_true():
    s = make_structure([], sums={1: 0})
    phi = ForallAddress("x", Eq(Balance(1, AddressVar("x")), Numeral(9)))
    assert eval_formula(s, {}, phi) is True


def test_universal_single_element():
    s = make_structure([4], balance={(1, 4): 1}, sums={1: 1})
    phi = ForallAddress("x", Eq(Balance(1, AddressVar("x")), Numeral(1)))
    assert eval_formula(s, {}, phi) is True


def test_distinct_constants_compare_unequal():
    s = make_structure([1, 2], addr_const={1: 1, 2: 2}, sums={})
    assert eval_formula(s, {}, Eq(AddressConst(1), AddressConst(2))) is False


@pytest.mark.parametrize("size", [0, 1, 2, 3])
def test_empty_and_small_domain_universals_exhaustively(size):
    # forall x. b1(x) = b1(x) holds on every domain; forall x. b1(x) = 1
    # holds exactly when every balance is 1 (vacuously on the empty domain).
    domain = list(range(1, size + 1))
    tautology = ForallAddress("x", Eq(Balance(1, AddressVar("x")), Balance(1, AddressVar("x"))))
    ones = ForallAddress("x", Eq(Balance(1, AddressVar("x")), Numeral(1)))
    for bits in range(2**size):
        balance = {(1, a): (bits >> (a - 1)) & 1 for a in domain}
        s = structure_from_balances(domain, {}, balance, {})
        assert eval_formula(s, {}, tautology) is True
        expected = all(balance[(1, a)] == 1 for a in domain)
        assert eval_formula(s, {}, ones) is expected


# ---------------------------------------------------------------------------
# sum property and models


def test_sum_property_holds():
    s = make_structure([1, 2], balance={(1, 1): 2, (1, 2): 3}, sums={1: 5})
    assert check_sum_property(s) is True


def test_sum_property_fails():
    s = make_structure([1, 2], balance={(1, 1): 2, (1, 2): 3}, sums={1: 6})
    assert check_sum_property(s) is False


def test_sum_property_empty_domain():
    assert check_sum_property(make_structure([], sums={1: 0})) is True


def test_is_sl_model_requires_both_parts():
    phi = Eq(SumConst(1), Numeral(1))
    good = make_structure([1], balance={(1, 1): 1}, sums={1: 1})
    bad = make_structure([1], balance={(1, 1): 1}, sums={1: 2})
    assert is_sl_model(good, phi) is True
    assert is_sl_model(bad, phi) is False  # sum property broken


def test_sum_dominates_each_balance():
    # s1 = 0 & b1(a1) = 1 has no model: candidates all fail.
    phi = And(Eq(SumConst(1), Numeral(0)), Eq(Balance(1, AddressConst(1)), Numeral(1)))
    for size in range(1, 4):
        domain = list(range(1, size + 1))
        for bits in range(3**size):
            balance = {}
            x = bits
            for a in domain:
                balance[(1, a)] = x % 3
                x //= 3
            for const in domain:
                s = structure_from_balances(domain, {1: const}, balance, {})
                assert is_sl_model(s, phi) is False


def test_is_sl_model_rejects_open_formula():
    s = make_structure([1], balance={(1, 1): 0}, sums={1: 0})
    with pytest.raises(EvaluationError):
        is_sl_model(s, Eq(Balance(1, AddressVar("x")), Numeral(0)))


def test_model_of_conjunction_splits():
    rng = random.Random(7)
    v = Vocabulary(2, 1, 1)
    for _ in range(60):
        phi = random_formula(rng, v, depth=2)
        psi = random_formula(rng, v, depth=2)
        s = random_structure(rng, v, max_domain=3, max_value=3)
        lhs = is_sl_model(s, And(phi, psi))
        rhs = is_sl_model(s, phi) and eval_formula(s, {}, psi)
        assert lhs == rhs


# ---------------------------------------------------------------------------
# distinctness


def test_distinct_false_when_constants_collide():
    s = make_structure([1], addr_const={1: 1, 2: 1})
    assert is_distinct(s) is False


def test_distinct_true():
    s = make_structure([1, 2], addr_const={1: 1, 2: 2})
    assert is_distinct(s) is True


def test_distinct_vacuous_without_constants():
    assert is_distinct(make_structure([])) is True


# ---------------------------------------------------------------------------
# formula length


def test_length_sum_equals_zero():
    assert formula_length(Eq(SumConst(1), Numeral(0))) == 3


def test_length_numeral_weight():
    assert formula_length(Eq(Numeral(4), Numeral(4))) == 11


def test_length_quantified_atom():
    phi = ForallAddress("x", Eq(Balance(1, AddressVar("x")), Numeral(1)))
    assert formula_length(phi) == 6


def test_every_numeral_below_length():
    rng = random.Random(21)
    v = Vocabulary(2, 2, 1, has_plus=True, has_leq=True)
    from sumlogic.core import Numeral as Num, atom_terms, subformulas

    for _ in range(200):
        phi = random_formula(rng, v, depth=3)
        n = formula_length(phi)
        for sub in subformulas(phi):
            if isinstance(sub, (Eq, Leq)):
                for t in atom_terms(sub):
                    if isinstance(t, Num):
                        assert t.value < n


# ---------------------------------------------------------------------------
# well-formedness


def test_leq_unavailable_flagged():
    v = Vocabulary(1, 1, 0)
    issues = well_formed(v, Leq(SumConst(1), Numeral(3)))
    assert any("<= unavailable" in msg for msg in issues)


def test_balance_index_out_of_range():
    v = Vocabulary(1, 1, 0)
    issues = well_formed(v, Eq(Balance(3, AddressConst(1)), Numeral(0)))
    assert any("balance index" in msg for msg in issues)


def test_mint_postcondition_is_well_formed():
    # b2(a1) = b1(a1) + c1, frame for other addresses, and s2 = s1 + c1,
    # over two balance functions with + available.
    v = Vocabulary(1, 2, 1, has_plus=True)
    a1 = AddressConst(1)
    x = AddressVar("x")
    phi = And(
        And(
            Eq(Balance(2, a1), Plus(Balance(1, a1), NatConst(1))),
            ForallAddress("x", Implies(Not(Eq(x, a1)), Eq(Balance(2, x), Balance(1, x)))),
        ),
        Eq(SumConst(2), Plus(SumConst(1), NatConst(1))),
    )
    assert well_formed(v, phi) == []


def test_free_variable_reported():
    v = Vocabulary(1, 1, 0)
    issues = well_formed(v, Eq(Balance(1, AddressVar("x")), Numeral(0)))
    assert any("free address variable" in msg for msg in issues)


def test_sort_clash_reported():
    v = Vocabulary(1, 1, 0)
    issues = well_formed(v, Eq(AddressConst(1), Numeral(0)))
    assert any("different sorts" in msg for msg in issues)


# ---------------------------------------------------------------------------
# evaluator optimization must not change semantics


def naive_eval(s, env, phi):
    if isinstance(phi, Eq):
        return eval_term(s, env, phi.left) == eval_term(s, env, phi.right)
    if isinstance(phi, Leq):
        return eval_term(s, env, phi.left) <= eval_term(s, env, phi.right)
    if isinstance(phi, Not):
        return not naive_eval(s, env, phi.body)
    if isinstance(phi, And):
        return naive_eval(s, env, phi.left) and naive_eval(s, env, phi.right)
    if isinstance(phi, Or):
        return naive_eval(s, env, phi.left) or naive_eval(s, env, phi.right)
    if isinstance(phi, Implies):
        return (not naive_eval(s, env, phi.left)) or naive_eval(s, env, phi.right)
    if isinstance(phi, ForallAddress):
        return all(
            naive_eval(s, {**env, phi.var: alpha}, phi.body) for alpha in sorted(s.domain)
        )
    raise TypeError(phi)


def test_fast_evaluator_agrees_with_naive_reference():
    rng = random.Random(99)
    v = Vocabulary(2, 2, 1, has_plus=True, has_leq=True)
    for _ in range(300):
        phi = random_formula(rng, v, depth=3)
        s = random_structure(rng, v, max_domain=3, max_value=3)
        assert eval_formula(s, {}, phi) == naive_eval(s, {}, phi), phi


def test_fast_evaluator_on_guarded_quantifier_nest():
    # forall x y. (b1(y) = b1(x) + 1 & b2(x) = 0) -> b2(y) = 5
    v = Vocabulary(0, 2, 0, has_plus=True)
    x, y = AddressVar("x"), AddressVar("y")
    phi = ForallAddress(
        "x",
        ForallAddress(
            "y",
            Implies(
                And(Eq(Balance(1, y), Plus(Balance(1, x), Numeral(1))), Eq(Balance(2, x), Numeral(0))),
                Eq(Balance(2, y), Numeral(5)),
            ),
        ),
    )
    rng = random.Random(3)
    for _ in range(150):
        s = random_structure(rng, v, max_domain=4, max_value=3)
        assert eval_formula(s, {}, phi) == naive_eval(s, {}, phi)


def test_shadowed_quantifier_variable():
    v = Vocabulary(0, 1, 0)
    inner = ForallAddress("x", Eq(Balance(1, AddressVar("x")), Numeral(1)))
    phi = ForallAddress("x", inner)
    s = structure_from_balances([1, 2], {}, {(1, 1): 1, (1, 2): 1}, {})
    assert eval_formula(s, {}, phi) == naive_eval(s, {}, phi) is True
    assert free_address_vars(phi) == frozenset()
