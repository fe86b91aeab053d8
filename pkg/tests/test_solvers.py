import random
from fractions import Fraction

import pytest

from gdkkt.circuits import ArithBuilder
from gdkkt.rational import Box, unit_box, vec
from gdkkt.solvers import (
    BudgetExceeded,
    DimensionNotOne,
    StartOutsideDomain,
    projected_gd,
    solve_1d_gclo,
    solve_kkt_unary,
    unary_budget,
)
from gdkkt.tfnp import GcloInstance, GdInstance, KktInstance, check_gclo, check_kkt


def _linear(coeffs, const=0):
    bld = ArithBuilder(len(coeffs))
    acc = bld.const(const)
    for i, c in enumerate(coeffs):
        acc = bld.add(acc, bld.mulc(c, bld.inp(i)))
    return bld.build([acc])


def _const_vec(n, values):
    bld = ArithBuilder(n)
    return bld.build([bld.const(v) for v in values])


def test_projected_gd_zero_gradient_stops_immediately():
    inst = GdInstance("fixpoint", Fraction(1, 10), 1, unit_box(2),
                      _linear([0, 0], 3), _const_vec(2, [0, 0]), 1)
    run = projected_gd(inst, vec([Fraction(1, 3), Fraction(1, 4)]), 10)
    assert run.stopped and run.iterations == 0
    assert run.point == (Fraction(1, 3), Fraction(1, 4))


def test_projected_gd_one_step_to_boundary():
    inst = GdInstance("fixpoint", Fraction(1, 10), 1, unit_box(1),
                      _linear([1]), _const_vec(1, [1]), 1)
    run = projected_gd(inst, vec([Fraction(7, 10)]), 10)
    assert run.stopped
    assert run.point == (0,)
    assert run.iterations == 1


def test_projected_gd_budget():
    # tiny steps with a tiny eps keep running until the budget
    inst = GdInstance("fixpoint", Fraction(1, 10**9), Fraction(1, 100),
                      unit_box(1), _linear([1]), _const_vec(1, [1]), 1)
    run = projected_gd(inst, vec([1]), 5)
    assert not run.stopped
    assert run.status == "budget"
    assert len(run.trajectory_tail) >= 2


def test_projected_gd_round_denom():
    inst = GdInstance("fixpoint", Fraction(1, 50), Fraction(1, 3),
                      unit_box(1), _linear([1]), _const_vec(1, [1]), 1)
    run = projected_gd(inst, vec([Fraction(2, 3)]), 50, round_denom=64)
    for p in run.trajectory_tail:
        assert p[0].denominator <= 64


def test_projected_gd_start_guard():
    inst = GdInstance("fixpoint", Fraction(1, 10), 1, unit_box(1),
                      _linear([1]), _const_vec(1, [1]), 1)
    with pytest.raises(StartOutsideDomain):
        projected_gd(inst, vec([2]), 5)


def _gclo_1d(a, b, eps=Fraction(1, 20), L=2, lo=0, hi=1):
    # g(x) = a x + b, p = identity
    bld = ArithBuilder(1)
    g = bld.build([bld.add(bld.mulc(a, bld.inp(0)), bld.const(b))])
    p = _linear([1])
    return GcloInstance(eps, Box([lo], [hi]), p, g, L)


def test_solve_1d_gclo_constant_map():
    inst = _gclo_1d(0, Fraction(1, 2))
    res = solve_1d_gclo(inst)
    assert "point" in res
    (x,) = res["point"]
    assert abs(x - Fraction(1, 2)) <= inst.eps / inst.L + inst.eps / inst.L**2
    assert check_gclo(inst, res["point"])


def test_solve_1d_gclo_identity():
    inst = _gclo_1d(1, 0)
    res = solve_1d_gclo(inst)
    assert "point" in res and check_gclo(inst, res["point"])


def test_solve_1d_gclo_contractions():
    rng = random.Random(11)
    for _ in range(10):
        a = Fraction(rng.randint(-7, 7), 10)
        b = Fraction(rng.randint(0, 10), 10)
        inst = _gclo_1d(a, b, eps=Fraction(1, 50), L=2)
        res = solve_1d_gclo(inst)
        assert "point" in res
        assert check_gclo(inst, res["point"])


def test_solve_1d_gclo_dimension_guard():
    inst = GcloInstance(Fraction(1, 10), unit_box(2), _linear([1, 1]),
                        _const_vec(2, [0, 0]), 1)
    with pytest.raises(DimensionNotOne):
        solve_1d_gclo(inst)


def test_unary_budget_example():
    # n = 2, L = 4, eps = 1: ceil(16 sqrt(2) * 16) with the integer
    # square-root ceiling sqrt(2) -> 2 gives 512 + 1
    assert unary_budget(2, 4, 1) == 16 * 2 * 16 + 1


def test_solve_kkt_unary_linear():
    # linear slope (1, 1): descent pins the origin corner
    inst = KktInstance(Fraction(1, 2), unit_box(2), _linear([1, 1]),
                       _const_vec(2, [1, 1]), 2)
    res = solve_kkt_unary(inst)
    assert res.ok
    assert check_kkt(inst, res.point)
    assert res.point == (0, 0)


def test_solve_kkt_unary_quadratic():
    # f(x) = (x - 1/4)^2 on [0,1]: gradient 2x - 1/2, minimiser x = 1/4
    bld = ArithBuilder(1)
    x = bld.inp(0)
    d = bld.sub(x, bld.const(Fraction(1, 4)))
    f = bld.build([bld.mul(d, d)])
    grad = _linear([2], Fraction(-1, 2))
    inst = KktInstance(Fraction(1, 4), unit_box(1), f, grad, 2)
    res = solve_kkt_unary(inst)
    assert res.ok
    assert check_kkt(inst, res.point)
    assert abs(res.point[0] - Fraction(1, 4)) < Fraction(1, 4)


def test_unary_budget_scales_with_parameters():
    # the cap grows with L^2 / eps^2; for honest Lipschitz instances the
    # descent argument guarantees termination within it, so the
    # BudgetExceeded guard only fires on promise-violating inputs
    assert unary_budget(1, 10, Fraction(1, 10)) == 16 * 10000 + 1
    assert unary_budget(4, 1, 1) == 33
    assert issubclass(BudgetExceeded, RuntimeError)


def test_local_search_descent_audit():
    """On violation-free instances f drops by more than eps each step."""
    bld = ArithBuilder(1)
    x = bld.inp(0)
    d = bld.sub(x, bld.const(Fraction(1, 8)))
    f = bld.build([bld.mul(d, d)])
    grad = _linear([2], Fraction(-1, 4))
    inst = GdInstance("local_search", Fraction(1, 1000), Fraction(1, 2),
                      unit_box(1), f, grad, 2)
    from gdkkt.circuits import eval_arith
    from gdkkt.tfnp import check_gd, gd_step

    x = vec([1])
    for _ in range(60):
        if check_gd(inst, x):
            break
        nxt = gd_step(inst, x)
        assert eval_arith(inst.f, nxt)[0] < eval_arith(inst.f, x)[0] - inst.eps
        x = nxt
    assert check_gd(inst, x)
