import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from sumlogic.lia import INCOMPLETE, SAT, UNSAT, check_model, solve
from sumlogic.presburger import (
    LinExpr,
    PAtom,
    PNot,
    constants,
    eq,
    evaluate,
    leq,
    pand,
    pimplies,
    pnot,
    por,
    render,
    to_qf_lia_script,
)


def c(name):
    return LinExpr.const(name)


def n(value):
    return LinExpr.num(value)


# ---------------------------------------------------------------------------
# basic verdicts


def test_partition_of_five():
    phi = pand([eq(c("b1") + c("b2"), n(5)), eq(c("b1"), n(2))])
    res = solve(phi)
    assert res.status == SAT
    assert res.model == {"b1": 2, "b2": 3}


def test_plain_contradiction():
    phi = pand([eq(c("x"), n(0)), eq(c("x"), n(1))])
    assert solve(phi).status == UNSAT


def test_eta_tau_shape_example():
    # (a1 = 0 -> b1 = 0) & (a1 = 0 -> a1 = 0) & (b1 = 0), satisfiable with a1 = 0
    phi = pand(
        [
            pimplies(eq(c("a1"), n(0)), eq(c("b1_1"), n(0))),
            pimplies(eq(c("a1"), n(0)), eq(c("a1"), n(0))),
            eq(c("b1_1"), n(0)),
        ]
    )
    res = solve(phi)
    assert res.status == SAT
    assert res.model["b1_1"] == 0


def test_naturals_domain_no_negative_solutions():
    # x + 3 = 1 has an integer solution but no natural one
    phi = eq(c("x") + n(3), n(1))
    assert solve(phi).status == UNSAT


def test_disequality_split():
    phi = pand([pnot(eq(c("x"), n(0))), leq(c("x"), n(1))])
    res = solve(phi)
    assert res.status == SAT
    assert res.model == {"x": 1}


def test_strict_bound_via_negated_leq():
    phi = pand([pnot(leq(c("x"), n(4))), leq(c("x"), n(5))])
    res = solve(phi)
    assert res.status == SAT
    assert res.model == {"x": 5}


def test_coupled_equalities_need_branching():
    # 2x = 2y + 1 is unsatisfiable over the integers (parity)
    phi = eq(c("x").scale(2), c("y").scale(2) + n(1))
    assert solve(phi).status == UNSAT


def test_pure_boolean_structure():
    a = eq(c("x"), n(1))
    phi = pand([por([a, pnot(a)])])
    assert solve(phi).status == SAT


def test_trivial_true_and_false():
    assert solve(pand([])).status == SAT
    assert solve(por([])).status == UNSAT


def test_resource_limit_reports_incomplete():
    # 2x + 3y = 6z + 1 survives propagation (no unit coefficient, gcd 1),
    # so it needs the relaxation; a zero budget must report INCOMPLETE,
    # never UNSAT
    phi = eq(c("x").scale(2) + c("y").scale(3), c("z").scale(6) + n(1))
    res = solve(phi, node_budget=0)
    assert res.status == INCOMPLETE


def test_parity_refuted_by_normalization_without_lp():
    phi = eq(c("x").scale(2), c("y").scale(2) + n(1))
    res = solve(phi)
    assert res.status == UNSAT
    assert res.nodes == 0


# ---------------------------------------------------------------------------
# check_model


def test_check_model_direct():
    assert check_model(eq(c("b"), n(3)), {"b": 3}) is True
    assert check_model(leq(c("b"), n(2)), {"b": 3}) is False


def test_check_model_missing_constant():
    with pytest.raises(KeyError):
        check_model(eq(c("b"), n(3)), {})


def test_every_sat_result_replays():
    rng = random.Random(5)
    for _ in range(120):
        phi = _random_formula(rng, n_vars=3, max_coeff=3, max_const=5)
        res = solve(phi)
        if res.status == SAT:
            assert check_model(phi, res.model) is True


# ---------------------------------------------------------------------------
# completeness against exhaustive enumeration


def _random_expr(rng, names, max_coeff, max_const):
    terms = {}
    for name in names:
        if rng.random() < 0.6:
            terms[name] = rng.randint(-max_coeff, max_coeff)
    return LinExpr.of(terms, rng.randint(0, max_const))


def _random_formula(rng, n_vars, max_coeff, max_const, depth=2):
    names = [f"v{i}" for i in range(n_vars)]
    if depth == 0 or rng.random() < 0.4:
        left = _random_expr(rng, names, max_coeff, max_const)
        right = _random_expr(rng, names, max_coeff, max_const)
        atom = eq(left, right) if rng.random() < 0.5 else leq(left, right)
        return pnot(atom) if rng.random() < 0.3 else atom
    roll = rng.random()
    sub = lambda: _random_formula(rng, n_vars, max_coeff, max_const, depth - 1)
    if roll < 0.4:
        return pand([sub(), sub()])
    if roll < 0.8:
        return por([sub(), sub()])
    return pimplies(sub(), sub())


def _enumerate_sat(phi, bound):
    names = sorted(constants(phi))
    for values in itertools.product(range(bound + 1), repeat=len(names)):
        if evaluate(phi, dict(zip(names, values))):
            return True
    return False


def test_agrees_with_enumeration_small_bound():
    # constants/coefficients/offsets <= 8, <= 6 constants: solve must agree
    # with exhaustive enumeration over 0..64
    rng = random.Random(42)
    for i in range(150):
        n_vars = rng.randint(1, 3)  # enumeration is the bottleneck
        phi = _random_formula(rng, n_vars=n_vars, max_coeff=2, max_const=8)
        res = solve(phi)
        assert res.status in (SAT, UNSAT)
        expected = _enumerate_sat(phi, 64)
        got = res.status == SAT
        assert got == expected, f"case {i}: {render(phi)}"


@settings(max_examples=60, deadline=None)
@given(
    st.lists(
        st.tuples(
            st.integers(min_value=-3, max_value=3),
            st.integers(min_value=-3, max_value=3),
            st.integers(min_value=-6, max_value=6),
            st.booleans(),
        ),
        min_size=1,
        max_size=4,
    )
)
def test_conjunctions_agree_with_enumeration(rows):
    parts = []
    for (a, b, k, is_eq) in rows:
        left = LinExpr.of({"x": a, "y": b}, k)
        parts.append(eq(left, n(0)) if is_eq else leq(left, n(0)))
    phi = pand(parts)
    res = solve(phi)
    expected = _enumerate_sat(phi, 40)
    if res.status == SAT:
        assert check_model(phi, res.model)
    # enumeration bound 40 is safe for coefficients this small
    assert (res.status == SAT) == expected


# ---------------------------------------------------------------------------
# QF_LIA emission


def test_qf_lia_script_shape():
    phi = pand([eq(c("b1_1") + c("b2_1"), c("c1")), leq(n(1), c("a1"))])
    script = to_qf_lia_script(phi)
    assert script.startswith("(set-logic QF_LIA)")
    assert script.count("(check-sat)") == 1
    assert "(declare-fun b1_1 () Int)" in script
    assert "(assert (<= 0 b1_1))" in script


def test_qf_lia_quotes_awkward_names():
    script = to_qf_lia_script(eq(c("c1'"), n(0)))
    assert "|c1'|" in script


def test_render_readable():
    text = render(pand([eq(c("b1_1") + c("b2_1"), c("c1")), pnot(eq(c("a1"), n(0)))]))
    assert "b1_1 + b2_1 = c1" in text
    assert "!(a1 = 0)" in text
