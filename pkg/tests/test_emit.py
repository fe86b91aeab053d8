import random
from fractions import Fraction

from gdkkt.bicubic import eval_direct
from gdkkt.circuits import (
    audit_value_sizes,
    eval_arith,
    is_well_behaved,
    max_true_mul_depth,
    value_size_bound,
)
from gdkkt.emit import decode_solution, emit_circuits, emit_instance, rescale
from gdkkt.grid import GridModel, GridSpec
from gdkkt.tfnp import (
    eol_from_edges,
    iter_from_map,
    preprocess_eol,
    preprocess_iter,
)


def test_emitted_equals_direct_exhaustive_tiny(tiny_model):
    """Exhaustive cell-corner agreement plus interior rationals at n=m=1."""
    gs = tiny_model.gs
    fc, gc = emit_circuits(gs, tiny_model.eol, tiny_model.it)
    assert is_well_behaved(fc) and is_well_behaved(gc)
    assert max_true_mul_depth(fc) <= 4
    N = gs.N
    third = Fraction(1, 3)
    for X in range(0, N, 2):
        for Y in range(0, N, 2):
            p = (Fraction(X) + third, Fraction(Y) + third)
            fd, gd = eval_direct(tiny_model, p)
            assert eval_arith(fc, p)[0] == fd
            assert tuple(eval_arith(gc, p)) == tuple(gd)


def test_emitted_equals_direct_more_types():
    """A case-B heavy instance, checked on a coarse exhaustive lattice."""
    eol = preprocess_eol(eol_from_edges(2, [(1, 4), (4, 2), (2, 3)]))
    it = preprocess_iter(iter_from_map(1, {1: 2}))
    gs = GridSpec(2, 1)
    model = GridModel(gs, eol, it)
    assert model.type_of(2, 2) == "LB"
    assert model.type_of(4, 4) == "LA"
    fc, gc = emit_circuits(gs, eol, it)
    N = gs.N
    q = Fraction(3, 7)
    for X in range(0, N, 3):
        for Y in range(0, N, 3):
            p = (Fraction(X) + q, Fraction(Y) + q)
            fd, gd = eval_direct(model, p)
            assert eval_arith(fc, p)[0] == fd
            assert tuple(eval_arith(gc, p)) == tuple(gd)


def test_emitted_equals_direct_desk(desk_model, desk_kkt):
    rng = random.Random(9)
    N = desk_model.gs.N
    pts = [
        (Fraction(rng.randint(0, N * 16), 16), Fraction(rng.randint(0, N * 16), 16))
        for _ in range(60)
    ]
    pts += [(Fraction(0), Fraction(0)), (Fraction(N), Fraction(N))]
    S = desk_model.gs.big_side
    pts += [
        (Fraction(5 * S + 66) + Fraction(1, 3), Fraction(5 * S + 67) + Fraction(2, 5))
    ]  # inside the LA labyrinth
    for p in pts:
        fd, gd = eval_direct(desk_model, p)
        assert eval_arith(desk_kkt.f, p)[0] == fd
        assert tuple(eval_arith(desk_kkt.grad_f, p)) == tuple(gd)


def test_emit_instance_parameters(desk_kkt):
    assert desk_kkt.eps == Fraction(1, 100)
    assert desk_kkt.L == Fraction(2**18 * 1024)  # 2^28
    assert desk_kkt.domain.hi == (1024, 1024)


def test_value_size_audit(desk_kkt):
    x = (Fraction(517, 3), Fraction(293, 7))
    assert audit_value_sizes(desk_kkt.f, x) <= value_size_bound(desk_kkt.f, x)
    assert audit_value_sizes(desk_kkt.grad_f, x) <= value_size_bound(
        desk_kkt.grad_f, x
    )


def test_rescale(desk_kkt):
    unit = rescale(desk_kkt)
    N = 1024
    assert unit.L == desk_kkt.L * N == Fraction(2) ** 38
    assert unit.eps == desk_kkt.eps
    assert unit.domain.hi == (1, 1)
    rng = random.Random(4)
    for _ in range(5):
        p = (Fraction(rng.randint(0, 64), 64), Fraction(rng.randint(0, 64), 64))
        scaled = tuple(N * v for v in p)
        assert eval_arith(unit.f, p)[0] * N == eval_arith(desk_kkt.f, scaled)[0]
        assert tuple(eval_arith(unit.grad_f, p)) == tuple(
            eval_arith(desk_kkt.grad_f, scaled)
        )
    assert is_well_behaved(unit.f) and is_well_behaved(unit.grad_f)


def test_rescale_alpha(desk_kkt):
    alpha = Fraction(1) / (desk_kkt.L * 1024)
    unit = rescale(desk_kkt, alpha=alpha)
    assert unit.L == 1
    assert unit.eps == Fraction(1, 100) * alpha
    p = (Fraction(1, 3), Fraction(1, 5))
    plain = rescale(desk_kkt)
    assert eval_arith(unit.f, p)[0] == alpha * eval_arith(plain.f, p)[0]


def test_decode_solution(desk_model):
    S = 128
    assert decode_solution(desk_model, (Fraction(2 * S + 64), Fraction(2 * S + 64))).kind == "eol"
    assert decode_solution(desk_model, (Fraction(2 * S + 64), Fraction(2 * S + 64))).value == 3
    # rescaled coordinates are detected and scaled back up
    r = decode_solution(
        desk_model, (Fraction(2 * S + 64, 1024), Fraction(2 * S + 64, 1024))
    )
    assert (r.kind, r.value) == ("eol", 3)
    assert decode_solution(desk_model, (Fraction(10), Fraction(1000))).kind == "none"


def test_decode_iter_solution(desk_model):
    S, c = 128, 64
    bx = by = 5 * S
    p = (Fraction(bx + c - 7), Fraction(by + c + 11))  # in M(3,3) of the LA square
    r = decode_solution(desk_model, p)
    assert (r.kind, r.value) == ("iter", 3)
