import os
from fractions import Fraction

import pytest

from gdkkt.circuits import ArithBuilder, BoolBuilder, eval_bool, table_to_bool
from gdkkt.rational import Box, unit_box, vec
from gdkkt.tfnp import (
    EolInstance,
    GcloInstance,
    GdInstance,
    GuardExceeded,
    InstanceInvariantError,
    IterInstance,
    KktInstance,
    OutOfRange,
    PointOutsideDomain,
    Polytope,
    UnsupportedNormForPolytope,
    brute_force_eol,
    brute_force_iter,
    check_eol,
    check_gclo,
    check_gd,
    check_iter,
    check_kkt,
    check_lipschitz,
    check_taylor,
    eol_from_edges,
    iter_from_map,
    load_bundle,
    preprocess_eol,
    preprocess_iter,
    save_bundle,
)


def _const_grad(n, values):
    bld = ArithBuilder(n)
    outs = [bld.const(v) for v in values]
    return bld.build(outs)


def _linear_f(coeffs, const=0):
    bld = ArithBuilder(len(coeffs))
    acc = bld.const(const)
    for i, c in enumerate(coeffs):
        acc = bld.add(acc, bld.mulc(c, bld.inp(i)))
    return bld.build([acc])


# ---------------------------------------------------------------------------

def test_check_eol_fig_instance(desk_eol_raw):
    assert check_eol(desk_eol_raw, 3)
    assert not check_eol(desk_eol_raw, 1)
    assert not check_eol(desk_eol_raw, 5)
    assert sorted(v for v in range(1, 9) if check_eol(desk_eol_raw, v)) == [3, 7, 8]
    assert brute_force_eol(desk_eol_raw) == 3
    with pytest.raises(OutOfRange):
        check_eol(desk_eol_raw, 9)


def test_check_iter_fig_instance(desk_iter_raw):
    assert check_iter(desk_iter_raw, 3)
    assert not check_iter(desk_iter_raw, 2)
    assert sorted(u for u in range(1, 9) if check_iter(desk_iter_raw, u)) == [3, 7]


def test_iter_first_disjunct():
    # any u with C(u) < u is a solution before preprocessing
    inst = IterInstance(3, table_to_bool([2, 0, 2, 3, 4, 5, 6, 7], 3, 3))
    assert check_iter(inst, 2)  # C(2) = 1 < 2


def test_instance_invariants():
    with pytest.raises(InstanceInvariantError):
        # S(1) = 1 violates P(1) = 1 != S(1)
        EolInstance(
            2,
            table_to_bool([0, 1, 2, 3], 2, 2),
            table_to_bool([0, 1, 2, 3], 2, 2),
        )
    with pytest.raises(InstanceInvariantError):
        IterInstance(2, table_to_bool([0, 1, 2, 3], 2, 2))


def test_preprocess_eol_rules():
    # S(2) = 5 but P(5) = 7: the wrapped successor self-maps vertex 2
    s_tab = [3, 4, 2, 5, 4, 5, 6, 7]
    p_tab = [0, 1, 2, 0, 6, 5, 6, 7]  # P(4) = 1, P(5) = 7
    inst = EolInstance(3, table_to_bool(s_tab, 3, 3), table_to_bool(p_tab, 3, 3))
    pre = preprocess_eol(inst)
    assert inst.eval_s(2) == 5
    assert pre.eval_s(2) == 2
    assert pre.eval_s(1) == 4  # consistent edge survives (P(4) = 1)
    # symmetric rule for P: P(5) = 7 but S(7) = 7
    assert pre.eval_p(5) == 5


def test_preprocess_eol_consistency_exhaustive(desk_eol):
    for v in range(1, 9):
        s = desk_eol.eval_s(v)
        if s != v:
            assert desk_eol.eval_p(s) == v
        p = desk_eol.eval_p(v)
        if p != v:
            assert desk_eol.eval_s(p) == v


def test_preprocess_never_creates_solutions():
    import itertools
    import random

    rng = random.Random(3)
    for _ in range(20):
        n = 3
        size = 1 << n
        s_tab = [rng.randrange(size) for _ in range(size)]
        p_tab = [rng.randrange(size) for _ in range(size)]
        s_tab[0] = rng.randrange(1, size)
        p_tab[s_tab[0]] = 0  # keep the trivial source's edge consistent
        p_tab[0] = 0
        inst = EolInstance(n, table_to_bool(s_tab, n, n), table_to_bool(p_tab, n, n))
        pre = preprocess_eol(inst)
        for v in range(1, size + 1):
            if check_eol(pre, v):
                assert check_eol(inst, v)


def test_preprocess_rejects_trivially_solved():
    # P(S(1)) != 1 means vertex 1 already solves the instance; the
    # embedding cannot proceed after its edge is stripped
    s_tab = [1, 1, 2, 3, 4, 5, 6, 7]
    p_tab = [0, 0, 2, 3, 4, 5, 6, 7]  # P(2) = 1 missing: P(2) = 1? no: P(2)=1 set below
    p_tab[1] = 2  # P(2) = 3 != 1
    inst = EolInstance(3, table_to_bool(s_tab, 3, 3), table_to_bool(p_tab, 3, 3))
    assert check_eol(inst, 1)
    with pytest.raises(InstanceInvariantError):
        preprocess_eol(inst)


def test_preprocess_iter_rules(desk_iter_raw):
    inst = IterInstance(3, table_to_bool([4, 2, 1, 4, 4, 5, 7, 7], 3, 3))
    pre = preprocess_iter(inst)
    assert inst.eval_c(3) == 2
    assert pre.eval_c(3) == 3
    assert pre.eval_c(1) == 5
    for u in range(1, 9):
        assert pre.eval_c(u) >= u
    assert brute_force_iter(pre) >= 1
    # solution set of the example instance is unchanged by preprocessing
    pre2 = preprocess_iter(desk_iter_raw)
    assert sorted(u for u in range(1, 9) if check_iter(pre2, u)) == [3, 7]


def test_brute_force_guard():
    inst = eol_from_edges(3, [(1, 2)])
    inst.n = 21  # simulate an oversized instance
    with pytest.raises(GuardExceeded):
        brute_force_eol(inst)


# ---------------------------------------------------------------------------

def test_check_kkt_box_examples():
    box = unit_box(2)
    f = _linear_f([1, 1])
    inst = KktInstance(Fraction(1, 100), box, f, _const_grad(2, [Fraction(1, 200), Fraction(-3, 1000)]), 1)
    assert check_kkt(inst, vec([Fraction(1, 2), Fraction(1, 2)]))
    inst2 = KktInstance(Fraction(1, 100), box, f, _const_grad(2, [Fraction(1, 2), 0]), 1)
    assert check_kkt(inst2, vec([0, Fraction(1, 2)]))
    inst3 = KktInstance(Fraction(1, 100), box, f, _const_grad(2, [Fraction(1, 50), 0]), 1)
    assert not check_kkt(inst3, vec([Fraction(1, 2), Fraction(1, 2)]))
    with pytest.raises(PointOutsideDomain):
        check_kkt(inst3, vec([2, 0]))


def test_check_kkt_l2_implies_linf():
    box = unit_box(2)
    f = _linear_f([1, 1])
    import random

    rng = random.Random(5)
    for _ in range(40):
        g = [Fraction(rng.randint(-30, 30), 1000) for _ in range(2)]
        x = vec([Fraction(rng.randint(0, 8), 8) for _ in range(2)])
        inst = KktInstance(Fraction(1, 100), box, f, _const_grad(2, g), 1)
        if check_kkt(inst, x, "l2"):
            assert check_kkt(inst, x, "linf")


def test_check_kkt_polytope_linf():
    # simplex x + y <= 1, x >= 0, y >= 0
    poly = Polytope([[1, 1], [-1, 0], [0, -1]], [1, 0, 0])
    f = _linear_f([1, 1])
    # at the active face x + y = 1, gradient -(1,1) is exactly A^T mu
    inst = KktInstance(Fraction(1, 100), poly, f, _const_grad(2, [-1, -1]), 2)
    assert check_kkt(inst, vec([Fraction(1, 2), Fraction(1, 2)]), "linf")
    inst2 = KktInstance(Fraction(1, 100), poly, f, _const_grad(2, [-1, 1]), 2)
    assert not check_kkt(inst2, vec([Fraction(1, 2), Fraction(1, 2)]), "linf")
    # interior point needs a small gradient
    inst3 = KktInstance(Fraction(1, 100), poly, f, _const_grad(2, [0, 0]), 2)
    assert check_kkt(inst3, vec([Fraction(1, 4), Fraction(1, 4)]), "linf")
    with pytest.raises(UnsupportedNormForPolytope):
        check_kkt(inst3, vec([Fraction(1, 4), Fraction(1, 4)]), "l2")


def test_check_gd_modes():
    box = unit_box(1)
    f = _linear_f([1])
    grad = _const_grad(1, [1])
    fp = GdInstance("fixpoint", Fraction(1, 10), 1, box, f, grad, 1)
    assert check_gd(fp, vec([0]))  # projection pins the iterate at 0
    assert not check_gd(fp, vec([Fraction(7, 10)]))
    ls = GdInstance("local_search", Fraction(1, 10), 1, box, _linear_f([0], 5), _const_grad(1, [0]), 1)
    assert check_gd(ls, vec([Fraction(1, 2)]))


def test_check_taylor():
    f = _linear_f([2, 3])
    grad = _const_grad(2, [2, 3])
    x, y = vec([0, 0]), vec([Fraction(1, 2), Fraction(1, 2)])
    assert not check_taylor(f, grad, 1, x, y).is_violation
    zero_grad = _const_grad(2, [0, 0])
    v = check_taylor(f, zero_grad, 1, x, y)
    assert v.kind == "ViolationTaylor"
    assert v.witness == (tuple(x), tuple(y))


def test_check_lipschitz():
    const = _linear_f([0], 7)
    assert not check_lipschitz(const, 1, vec([0]), vec([1])).is_violation
    ident = _linear_f([1])
    assert not check_lipschitz(ident, 1, vec([0]), vec([1])).is_violation
    triple = _linear_f([3])
    v = check_lipschitz(triple, 2, vec([0]), vec([1]))
    assert v.kind == "ViolationLipschitzF"


def test_check_gclo():
    box = unit_box(1)
    ident = _linear_f([1])
    inst = GcloInstance(Fraction(1, 2), box, ident, ident, 1)
    assert check_gclo(inst, vec([Fraction(1, 3)]))
    const_p = _linear_f([0], 1)
    inst2 = GcloInstance(Fraction(1, 2), box, const_p, _linear_f([1], -5), 1)
    assert check_gclo(inst2, vec([Fraction(1, 3)]))
    dec = _linear_f([1], -1)  # g(x) = x - 1
    inst3 = GcloInstance(Fraction(1, 2), box, ident, dec, 1)
    assert not check_gclo(inst3, vec([1]))


# ---------------------------------------------------------------------------

def test_bundle_roundtrip(tmp_path, desk_eol_raw, desk_iter_raw):
    p1 = tmp_path / "eol"
    save_bundle(str(p1), desk_eol_raw)
    loaded, meta = load_bundle(str(p1))
    assert meta["kind"] == "eol"
    assert loaded.eval_s(1) == desk_eol_raw.eval_s(1)
    # write -> read -> write is byte-identical
    p2 = tmp_path / "eol2"
    save_bundle(str(p2), loaded)
    for name in os.listdir(p1):
        with open(p1 / name, "rb") as fh1, open(p2 / name, "rb") as fh2:
            assert fh1.read() == fh2.read()


def test_bundle_roundtrip_continuous(tmp_path):
    box = Box([0, 0], [1, 1])
    inst = GdInstance(
        "fixpoint",
        Fraction(1, 10),
        Fraction(1, 2),
        box,
        _linear_f([1, 2], Fraction(1, 3)),
        _const_grad(2, [1, 2]),
        Fraction(5, 2),
    )
    p = tmp_path / "gd"
    save_bundle(str(p), inst)
    loaded, meta = load_bundle(str(p))
    assert loaded.mode == "fixpoint"
    assert loaded.eps == inst.eps and loaded.eta == inst.eta and loaded.L == inst.L
    assert loaded.domain == box
    from gdkkt.circuits import eval_arith

    x = vec([Fraction(1, 7), Fraction(2, 7)])
    assert eval_arith(loaded.f, x) == eval_arith(inst.f, x)
