import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gdkkt.circuits import (
    ArithBuilder,
    ArithCircuit,
    BoolBuilder,
    MalformedCircuit,
    TableSizeMismatch,
    arith_to_text,
    audit_value_sizes,
    bool_to_arith,
    bool_to_text,
    circuit_from_text,
    circuit_size,
    eval_arith,
    eval_bool,
    is_well_behaved,
    linear_lipschitz_bound,
    max_true_mul_depth,
    prune,
    table_to_bool,
    value_size_bound,
    vec_size,
)


def test_eval_examples():
    c = ArithCircuit(2, [("INPUT", 0), ("INPUT", 1), ("CMP", 0, 1)], [2])
    assert eval_arith(c, (2, 1)) == (1,)
    assert eval_arith(c, (1, 2)) == (0,)
    assert eval_arith(c, (1, 1)) == (0,)  # strict comparison

    c2 = ArithCircuit(
        0,
        [("CONST", Fraction(1, 3)), ("CONST", Fraction(1, 6)), ("ADD", 0, 1)],
        [2],
    )
    assert eval_arith(c2, ()) == (Fraction(1, 2),)

    bld = ArithBuilder(1)
    out = bld.mulc(3, bld.max_(bld.inp(0), bld.const(0)))
    c3 = bld.build([out])
    assert eval_arith(c3, (-2,)) == (0,)
    assert eval_arith(c3, (2,)) == (6,)


def test_validate_rejects_forward_reference():
    c = ArithCircuit(1, [("ADD", 0, 1), ("INPUT", 0)], [0])
    with pytest.raises(MalformedCircuit):
        c.validate()


def test_circuit_size_monotonicity():
    bld = ArithBuilder(1)
    x = bld.inp(0)
    c1 = bld.build([x])
    size1 = circuit_size(c1)
    assert size1 == 8 * len(arith_to_text(c1).encode())
    y = bld.add(x, x)
    c2 = bld.build([y])
    assert circuit_size(c2) > size1
    # a constant with many more bits costs at least those bits
    bld2 = ArithBuilder(0)
    c3 = bld2.build([bld2.const(1)])
    bld3 = ArithBuilder(0)
    c4 = bld3.build([bld3.const((1 << 64) + 1)])
    assert circuit_size(c4) >= circuit_size(c3) + 16 * 8 - 8


def test_well_behaved():
    bld = ArithBuilder(1)
    x = bld.inp(0)
    c = bld.build([bld.add(x, x)])
    assert max_true_mul_depth(c) == 0
    assert is_well_behaved(c)

    # repeated squaring: k chained true multiplications
    bld = ArithBuilder(1)
    t = bld.inp(0)
    for _ in range(40):
        t = bld.mul(t, t)
    c = bld.build([t])
    assert max_true_mul_depth(c) == 40
    assert not is_well_behaved(c)

    # multiplication by constants never counts
    bld = ArithBuilder(1)
    t = bld.inp(0)
    for _ in range(40):
        t = bld.mulc(3, t)
    assert is_well_behaved(bld.build([t]))

    # a constant-only product is not a true multiplication
    bld = ArithBuilder(1)
    p = bld.mul(bld.const(2), bld.const(3))
    assert max_true_mul_depth(bld.build([bld.add(bld.inp(0), p)])) == 0


def test_well_behaved_boundary():
    # exactly floor(log2(size)) chained true muls stays well-behaved
    bld = ArithBuilder(1)
    t = bld.inp(0)
    for _ in range(3):
        t = bld.mul(t, t)
    c = bld.build([t])
    import math

    assert max_true_mul_depth(c) == 3 <= math.floor(math.log2(circuit_size(c)))
    assert is_well_behaved(c)


def _random_well_behaved(rng, n_inputs=2, n_gates=40):
    bld = ArithBuilder(n_inputs)
    nodes = [bld.inp(i) for i in range(n_inputs)]
    nodes.append(bld.const(Fraction(rng.randint(-9, 9), rng.randint(1, 9))))
    muls = 0
    for _ in range(n_gates):
        op = rng.choice(["ADD", "SUB", "MAX", "MIN", "MULC", "MUL", "CMP"])
        a = rng.choice(nodes)
        b = rng.choice(nodes)
        if op == "ADD":
            nodes.append(bld.add(a, b))
        elif op == "SUB":
            nodes.append(bld.sub(a, b))
        elif op == "MAX":
            nodes.append(bld.max_(a, b))
        elif op == "MIN":
            nodes.append(bld.min_(a, b))
        elif op == "CMP":
            nodes.append(bld.cmp(a, b))
        elif op == "MULC":
            nodes.append(bld.mulc(Fraction(rng.randint(-4, 4) or 1, rng.randint(1, 4)), a))
        elif muls < 3:
            nodes.append(bld.mul(a, b))
            muls += 1
    return bld.build([nodes[-1], nodes[-2]])


def test_audit_value_sizes_bound():
    rng = random.Random(7)
    for _ in range(25):
        c = _random_well_behaved(rng)
        assert is_well_behaved(c)
        x = tuple(Fraction(rng.randint(-99, 99), rng.randint(1, 99)) for _ in range(2))
        assert audit_value_sizes(c, x) <= value_size_bound(c, x)


def test_audit_examples():
    bld = ArithBuilder(0)
    c = bld.build([bld.const(Fraction(255, 7))])
    assert audit_value_sizes(c, ()) == 8 + 3
    bld = ArithBuilder(2)
    c = bld.build([bld.mul(bld.inp(0), bld.inp(1))])
    x = (Fraction(3), Fraction(5))
    assert audit_value_sizes(c, x) <= vec_size(x) + 2


def test_linear_lipschitz_bound():
    bld = ArithBuilder(1)
    assert linear_lipschitz_bound(bld.build([bld.inp(0)])) == 1
    bld = ArithBuilder(1)
    assert linear_lipschitz_bound(bld.build([bld.mulc(5, bld.inp(0))])) == 5
    bld = ArithBuilder(1)
    x = bld.inp(0)
    assert linear_lipschitz_bound(bld.build([bld.add(x, x)])) == 2
    # never exceeds 2^(size^2), and the bound is a true Lipschitz constant
    bld = ArithBuilder(2)
    x, y = bld.inp(0), bld.inp(1)
    c = bld.build([bld.max_(bld.sub(x, y), bld.mulc(Fraction(-3, 2), y))])
    L = linear_lipschitz_bound(c)
    assert L <= 2 ** (circuit_size(c) ** 2)
    rng = random.Random(1)
    for _ in range(50):
        p = (Fraction(rng.randint(-8, 8)), Fraction(rng.randint(-8, 8)))
        q = (Fraction(rng.randint(-8, 8)), Fraction(rng.randint(-8, 8)))
        dv = abs(eval_arith(c, p)[0] - eval_arith(c, q)[0])
        dx = max(abs(a - b) for a, b in zip(p, q))
        assert dv <= L * dx


def test_linear_lipschitz_rejects_mul():
    bld = ArithBuilder(1)
    c = bld.build([bld.mul(bld.inp(0), bld.inp(0))])
    with pytest.raises(MalformedCircuit):
        linear_lipschitz_bound(c)


def test_bool_gates_and_simulation():
    bld = BoolBuilder(2)
    a, b = bld.inp(0), bld.inp(1)
    c = bld.build([bld.not_(a), bld.and_(a, b), bld.or_(a, b)])
    assert eval_bool(c, (1, 0)) == (0, 0, 1)
    assert eval_bool(c, (1, 1)) == (0, 1, 1)
    arith = bool_to_arith(c)
    assert arith.is_linear()
    for bits in [(0, 0), (0, 1), (1, 0), (1, 1)]:
        assert eval_arith(arith, bits) == tuple(
            Fraction(v) for v in eval_bool(c, bits)
        )


def test_bool_to_arith_step3_formulas():
    # not 1 = 0; or(1,1) = min(1, 2) = 1; and(1,0) = max(0, 0) = 0
    bld = BoolBuilder(2)
    a, b = bld.inp(0), bld.inp(1)
    c = bld.build([bld.not_(a), bld.or_(a, b), bld.and_(a, b)])
    arith = bool_to_arith(c)
    assert eval_arith(arith, (1, 1)) == (0, 1, 1)
    assert eval_arith(arith, (1, 0)) == (0, 1, 0)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.randoms(use_true_random=False))
def test_table_roundtrip(in_bits, out_bits, rng):
    table = [rng.randrange(1 << out_bits) for _ in range(1 << in_bits)]
    c = table_to_bool(table, in_bits, out_bits)
    for a in range(1 << in_bits):
        bits = tuple((a >> i) & 1 for i in range(in_bits))
        got = eval_bool(c, bits)
        assert sum(v << i for i, v in enumerate(got)) == table[a]


def test_table_examples():
    ident = table_to_bool([0, 1, 2, 3], 2, 2)
    assert eval_bool(ident, (1, 0)) == (1, 0)
    const = table_to_bool([5, 5, 5, 5], 2, 3)
    assert eval_bool(const, (0, 1)) == (1, 0, 1)
    # successor table of the example instance: S(1) = 4
    s_tab = [3, 7, 2, 5, 4, 1, 2, 6]  # 0-based images of vertices 1..8
    c = table_to_bool(s_tab, 3, 3)
    assert sum(v << i for i, v in enumerate(eval_bool(c, (0, 0, 0)))) == 3
    with pytest.raises(TableSizeMismatch):
        table_to_bool([0, 1, 2], 2, 2)


def test_text_roundtrip():
    bld = ArithBuilder(2)
    x, y = bld.inp(0), bld.inp(1)
    c = bld.build([bld.mulc(Fraction(-1, 2), bld.add(x, bld.const(Fraction(3, 2)))), bld.cmp(x, y)])
    text = arith_to_text(c)
    c2 = circuit_from_text(text)
    assert arith_to_text(c2) == text
    assert eval_arith(c2, (1, 2)) == eval_arith(c, (1, 2))

    bb = BoolBuilder(2)
    bc = bb.build([bb.xor_(bb.inp(0), bb.inp(1))])
    btext = bool_to_text(bc)
    bc2 = circuit_from_text(btext)
    assert bool_to_text(bc2) == btext
    assert eval_bool(bc2, (1, 0)) == eval_bool(bc, (1, 0))


def test_prune():
    bld = ArithBuilder(1)
    x = bld.inp(0)
    used = bld.add(x, bld.const(1))
    _unused = bld.mul(x, x)
    c = bld.build([used, _unused])
    small = prune(c, [used])
    assert len(small.gates) < len(c.gates)
    assert eval_arith(small, (5,)) == (6,)
    assert max_true_mul_depth(small) == 0
