"""Approximation of well-behaved circuits by linear circuits.

The construction follows the sampling route: partition [0,1]^n into N^n
subcubes, tabulate the quantized function at the subcube centres, and
build a linear circuit that (1) forms 2n+1 equi-angle samples, (2)
extracts their subcube addresses bit by bit with the clamped-ramp
gadget, (3) simulates the table circuit with linear gates and (4) takes
the median of the sample values through a sorting network.  Good samples
always decode correctly, bad samples are outvoted by the median.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .circuits import (
    ArithBuilder,
    ArithCircuit,
    LinearCircuit,
    eval_arith,
    is_well_behaved,
    table_to_bool,
)
from .rational import Box, project_box
from .tfnp import GdInstance


class IllBehavedInput(ValueError):
    pass


class EvenCount(ValueError):
    pass


class NoWitness(RuntimeError):
    pass


class InfeasibleAtDeskScale(RuntimeError):
    """The exact-table route needs more than the desk-scale grid budget."""


GRID_BUDGET = 1 << 20


@dataclass(frozen=True)
class SampleParams:
    n: int
    N: int  # power of two, at least 4 L / eps

    def __post_init__(self):
        if self.N & (self.N - 1):
            raise ValueError("N must be a power of two")

    @property
    def k(self) -> int:
        return self.N.bit_length() - 1

    @property
    def sample_count(self) -> int:
        return 2 * self.n + 1

    @property
    def spacing(self) -> Fraction:
        return Fraction(1, 4 * self.n * self.N)

    @property
    def bad_threshold(self) -> Fraction:
        return Fraction(1, 8 * self.n * self.N)


def subcube_index(x, N: int) -> int:
    """I_N(x): 1-based subinterval index, ties to the smaller index."""
    x = Fraction(x)
    if x <= 0:
        return 1
    if x >= 1:
        return N
    q = x * N
    floor = q.numerator // q.denominator
    if q == floor:  # exactly on a boundary
        return max(1, floor)
    return floor + 1


def subcube_centre(p: Sequence[int], N: int) -> tuple:
    return tuple(Fraction(2 * pi - 1, 2 * N) for pi in p)


def sample_set(x, params: SampleParams):
    """(T, S): the 2n+1 equi-angle samples and the reachable subcube set."""
    n, N = params.n, params.N
    x = tuple(Fraction(v) for v in x)
    T = [
        tuple(xi + Fraction(ell, 4 * n * N) for xi in x)
        for ell in range(2 * n + 1)
    ]
    half = Fraction(1, 2 * N)
    alphas = {Fraction(0), half}
    for xi in x:
        # first boundary strictly above x_i, must lie in (0, 1) boundaries
        b = (xi * N).numerator // (xi * N).denominator + 1
        alpha = Fraction(b, N) - xi
        if alpha <= half and 1 <= b <= N - 1:
            alphas.add(alpha)
    S = set()
    for alpha in sorted(alphas):
        S.add(tuple(subcube_index(xi + alpha, N) for xi in x))
    return T, S


def phi_gadget(params: SampleParams) -> LinearCircuit:
    """phi(t) = min(1, max(0, 8 n N t)) as a one-input fragment."""
    bld = ArithBuilder(1)
    t = bld.inp(0)
    ramp = bld.mulc(8 * params.n * params.N, t)
    out = bld.min_(bld.const(1), bld.max_(bld.const(0), ramp))
    return bld.build([out])


def _extract_bits(bld: ArithBuilder, y, params: SampleParams, k: int) -> list:
    """k bits of y, most significant first; exact off the boundary set."""
    slope = 8 * params.n * params.N

    def phi(t):
        ramp = bld.mulc(slope, t)
        return bld.min_(bld.const(1), bld.max_(bld.const(0), ramp))

    bits = []
    t = y
    for j in range(1, k + 1):
        b = phi(bld.sub(t, bld.const(Fraction(1, 1 << j))))
        bits.append(b)
        t = bld.sub(t, bld.mulc(Fraction(1, 1 << j), b))
    return bits


def bit_extract_fragment(params: SampleParams, k: int) -> LinearCircuit:
    bld = ArithBuilder(1)
    bits = _extract_bits(bld, bld.inp(0), params, k)
    return bld.build(bits)


# ---------------------------------------------------------------------------
# sorting network

def sorting_network(size: int) -> list:
    """Batcher odd-even mergesort comparator list for any size."""

    def sort(idx):
        if len(idx) <= 1:
            return
        if len(idx) == 2:
            yield (idx[0], idx[1])
            return
        mid = len(idx) // 2
        yield from sort(idx[:mid])
        yield from sort(idx[mid:])
        yield from merge(idx)

    def merge(idx):
        if len(idx) == 2:
            yield (idx[0], idx[1])
            return
        if len(idx) < 2:
            return
        yield from merge(idx[0::2])
        yield from merge(idx[1::2])
        for a, b in zip(idx[1::2], idx[2::2]):
            yield (a, b)

    pot = 1 << (size - 1).bit_length()
    # pad virtually at the end; comparators touching pads are dropped
    pairs = []
    for a, b in sort(list(range(pot))):
        if a < size and b < size:
            pairs.append((a, b))
    return pairs


def _median_nodes(bld: ArithBuilder, wires: list) -> int:
    count = len(wires)
    if count % 2 == 0:
        raise EvenCount("median needs an odd number of inputs")
    wires = list(wires)
    for a, b in sorting_network(count):
        lo = bld.min_(wires[a], wires[b])
        hi = bld.max_(wires[a], wires[b])
        wires[a], wires[b] = lo, hi
    return wires[count // 2]


def median_network(count: int) -> LinearCircuit:
    """count-input fragment returning the median via a sorting network."""
    bld = ArithBuilder(count)
    out = _median_nodes(bld, [bld.inp(i) for i in range(count)])
    return bld.build([out])


def sort_network_circuit(count: int) -> LinearCircuit:
    """count-input fragment returning all inputs in sorted order."""
    bld = ArithBuilder(count)
    wires = [bld.inp(i) for i in range(count)]
    for a, b in sorting_network(count):
        lo = bld.min_(wires[a], wires[b])
        hi = bld.max_(wires[a], wires[b])
        wires[a], wires[b] = lo, hi
    return bld.build(wires)


# ---------------------------------------------------------------------------
# the main construction

@dataclass
class LinearApproximation:
    circuit: LinearCircuit
    params: SampleParams
    eps: Fraction
    M: Fraction
    tables: list  # per output: quantized grid values C(p) - 1
    m_bits: int

    def grid_value(self, out: int, p) -> Fraction:
        """V(p) = (C(p) - 1) eps/16 - M for an output's table."""
        idx = 0
        for i, pi in enumerate(p):
            idx += (pi - 1) << (self.params.k * i)
        return Fraction(self.tables[out][idx]) * self.eps / 16 - self.M


def _pick_N(L, eps) -> int:
    need = Fraction(4) * Fraction(L) / Fraction(eps)
    N = 4
    while N < need:
        N *= 2
    return N


def approximate_circuit(
    f,
    L,
    eps,
    M_bound=None,
    n: Optional[int] = None,
    d: Optional[int] = None,
    evaluator: Optional[Callable] = None,
) -> LinearApproximation:
    """Linear circuit F with max |f - F| <= eps on [0,1]^n for L-Lipschitz f.

    ``f`` may be an ArithCircuit (evaluated exactly at the grid centres)
    or any callable returning exact rationals via ``evaluator``.  The
    grid has N^n centres with N the least power of two above 4L/eps;
    desk-scale exactness bounds N^n by 2^20.
    """
    if isinstance(f, ArithCircuit):
        if not is_well_behaved(f):
            raise IllBehavedInput("input circuit must be well-behaved")
        n = f.num_inputs
        d = f.num_outputs
        evaluator = lambda p: eval_arith(f, p)  # noqa: E731
    if n is None or d is None or evaluator is None:
        raise ValueError("need n, d and an evaluator for non-circuit inputs")
    eps = Fraction(eps)
    N = _pick_N(L, eps)
    params = SampleParams(n, N)
    if N**n > GRID_BUDGET:
        raise InfeasibleAtDeskScale(
            f"table would need {N}^{n} exact evaluations"
        )
    k = params.k

    values = []  # values[idx][out]
    for idx in range(N**n):
        p = [(idx >> (k * i)) % N + 1 for i in range(n)]
        values.append(evaluator(subcube_centre(p, N)))
    M = max(abs(v) for row in values for v in row)
    if M_bound is not None:
        if Fraction(M_bound) < M:
            raise ValueError("supplied M bound is below the true grid maximum")
        M = Fraction(M_bound)
    top = 0
    tables = []
    for out in range(d):
        tab = []
        for row in values:
            c = (row[out] + M) * 16 / eps
            tab.append(c.numerator // c.denominator)  # floor; C(p) = this + 1
        tables.append(tab)
        top = max(top, max(tab))
    m_bits = max(1, top.bit_length())
    bool_tables = [table_to_bool(tab, k * n, m_bits) for tab in tables]

    bld = ArithBuilder(n)
    xs = [bld.inp(i) for i in range(n)]
    sample_vals = [[] for _ in range(d)]
    for ell in range(params.sample_count):
        off = Fraction(ell, 4 * n * N)
        addr = []
        for i in range(n):
            y = bld.add(xs[i], bld.const(off)) if off else xs[i]
            msb_first = _extract_bits(bld, y, params, k)
            addr.extend(reversed(msb_first))  # little-endian per coordinate
        for out in range(d):
            obits = bld.inline_bool(bool_tables[out], addr)
            acc = bld.const(0)
            for j, b in enumerate(obits):
                acc = bld.add(acc, bld.mulc(1 << j, b))
            sample_vals[out].append(acc)
    outs = []
    for out in range(d):
        med = _median_nodes(bld, sample_vals[out])
        final = bld.sub(bld.mulc(eps / 16, med), bld.const(M))
        outs.append(final)
    circ = bld.build(outs)
    assert circ.is_linear()
    return LinearApproximation(circ, params, eps, M, tables, m_bits)


def violation_witness(f, x, approx: LinearApproximation, L, out: int = 0):
    """A Lipschitz-violation witness near x once |f(x) - F(x)| > eps.

    Picks the centre of the reachable subcube where f differs most from
    its value at x and verifies the guaranteed inequality exactly.
    """
    L = Fraction(L)
    eps = approx.eps
    fx = eval_arith(f, x)[out]
    _, S = sample_set(x, approx.params)
    best = None
    for p in S:
        ph = subcube_centre(p, approx.params.N)
        fp = eval_arith(f, ph)[out]
        gap = abs(fx - fp)
        if best is None or gap > best[0]:
            best = (gap, ph, fp)
    gap, y, fy = best
    dist = max(abs(a - b) for a, b in zip(x, y))
    if not gap > L * dist + eps / 2:
        raise NoWitness("the approximation-error precondition did not hold")
    return y


# ---------------------------------------------------------------------------
# scaled-integer programs for fast exact evaluation of linear circuits

OP_INPUT, OP_CONST, OP_ADD, OP_SUB, OP_MULC, OP_MAX, OP_MIN = range(7)


def compile_linear_program(circ: LinearCircuit, scale_bits: int):
    """Lower a linear circuit with dyadic constants to a scaled-int program.

    Every wire carries value * 2**scale_bits as an int64; multiplications
    by a dyadic constant s / 2**t become (v * s) >> t with an exactness
    check, so evaluation stays exact end to end.
    """
    import numpy as np

    if not circ.is_linear():
        raise ValueError("program compilation requires a linear circuit")
    ng = len(circ.gates)
    ops = np.zeros(ng, dtype=np.uint8)
    a = np.zeros(ng, dtype=np.int32)
    b = np.zeros(ng, dtype=np.int32)
    cnum = np.zeros(ng, dtype=np.int64)
    cshift = np.zeros(ng, dtype=np.int8)
    for idx, g in enumerate(circ.gates):
        op = g[0]
        if op == "INPUT":
            ops[idx] = OP_INPUT
            a[idx] = g[1]
        elif op == "CONST":
            q = Fraction(g[1]) * (1 << scale_bits)
            if q.denominator != 1:
                raise ValueError("constant is not exact at this scale")
            ops[idx] = OP_CONST
            cnum[idx] = q.numerator
        elif op == "MULC":
            q = Fraction(g[1])
            den = q.denominator
            if den & (den - 1):
                raise ValueError("MULC constant must be dyadic")
            ops[idx] = OP_MULC
            a[idx] = g[2]
            cnum[idx] = q.numerator
            cshift[idx] = den.bit_length() - 1
        else:
            ops[idx] = {"ADD": OP_ADD, "SUB": OP_SUB, "MAX": OP_MAX, "MIN": OP_MIN}[op]
            a[idx] = g[1]
            b[idx] = g[2]
    outs = np.asarray(circ.outputs, dtype=np.int32)
    return {
        "ops": ops,
        "a": a,
        "b": b,
        "cnum": cnum,
        "cshift": cshift,
        "outs": outs,
        "scale_bits": scale_bits,
        "num_inputs": circ.num_inputs,
    }


def scale_points(points, scale_bits: int):
    """Exactly scale rational points to int64 rows."""
    import numpy as np

    rows = []
    for p in points:
        row = []
        for v in p:
            q = Fraction(v) * (1 << scale_bits)
            if q.denominator != 1:
                raise ValueError(f"point coordinate {v} not exact at scale")
            row.append(q.numerator)
        rows.append(row)
    return np.asarray(rows, dtype=np.int64)


# ---------------------------------------------------------------------------
# finite differences and GD-FD

def fd_gradient(f, x, h) -> tuple:
    """Exact central differences (f(x + h e_i) - f(x - h e_i)) / 2h."""
    h = Fraction(h)
    if h <= 0:
        raise ValueError("spacing must be positive")
    x = tuple(Fraction(v) for v in x)
    if isinstance(f, ArithCircuit):
        ev = lambda p: eval_arith(f, p)[0]  # noqa: E731
    else:
        ev = f
    grad = []
    for i in range(len(x)):
        up = tuple(v + h if j == i else v for j, v in enumerate(x))
        dn = tuple(v - h if j == i else v for j, v in enumerate(x))
        grad.append((ev(up) - ev(dn)) / (2 * h))
    return tuple(grad)


@dataclass
class GdFdInstance:
    eps: Fraction
    eta: Fraction
    h: Fraction
    F: LinearCircuit  # single circuit; the domain is [0,1]^n

    def __post_init__(self):
        self.eps = Fraction(self.eps)
        self.eta = Fraction(self.eta)
        self.h = Fraction(self.h)


def check_gd_fd(inst: GdFdInstance, x, evaluator=None) -> bool:
    """Stopping criterion F(Pi(x - eta grad~_h F(x))) >= F(x) - eps."""
    n = inst.F.num_inputs
    box = Box([0] * n, [1] * n)
    ev = evaluator if evaluator is not None else (
        lambda p: eval_arith(inst.F, p)[0]
    )
    grad = fd_gradient(ev, x, inst.h)
    nxt = project_box(
        tuple(xi - inst.eta * gi for xi, gi in zip(x, grad)), box
    )
    return ev(nxt) >= ev(tuple(x)) - inst.eps


def run_gd_fd(inst: GdFdInstance, start, max_iters: int, evaluator=None):
    """Finite-difference projected descent until the criterion triggers."""
    n = inst.F.num_inputs
    box = Box([0] * n, [1] * n)
    ev = evaluator if evaluator is not None else (
        lambda p: eval_arith(inst.F, p)[0]
    )
    x = tuple(Fraction(v) for v in start)
    for k in range(max_iters):
        grad = fd_gradient(ev, x, inst.h)
        nxt = project_box(
            tuple(xi - inst.eta * gi for xi, gi in zip(x, grad)), box
        )
        if ev(nxt) >= ev(x) - inst.eps:
            return ("stopped", x, k)
        x = nxt
    return ("budget", x, max_iters)


def gd_fd_params(eps, eta, L) -> tuple:
    """(eps', h, delta) for the finite-difference reduction."""
    eps, eta, L = Fraction(eps), Fraction(eta), Fraction(L)
    h = min(Fraction(1), eps / (8 * eta * L * L))
    delta = min(eps / 4, L * h * h / 2)
    return eps / 4, h, delta


def gd_fd_instance(inst: GdInstance) -> GdFdInstance:
    """GD-FD instance from a local-search instance on [0,1]^2.

    eps' = eps/4, h = min(1, eps / (8 eta L^2)), and F approximates f to
    delta = min(eps/4, L h^2 / 2) on [-1, 2]^2 (via the affine bijection
    with [0,1]^2, which scales the Lipschitz constant by 3).
    """
    if inst.mode != "local_search":
        raise ValueError("expected a local-search instance")
    box: Box = inst.domain
    n = box.dim
    eps, eta, L = inst.eps, inst.eta, inst.L
    _, h, delta = gd_fd_params(eps, eta, L)

    def extended(p):
        # f on [-1, 2]^n through the bijection t -> 3t - 1
        q = tuple(3 * t - 1 for t in p)
        return (eval_arith(inst.f, q)[0],)

    approx = approximate_circuit(
        None, 3 * L, delta, n=n, d=1, evaluator=extended
    )
    # wrap: F(x) = F_unit((x + 1) / 3)
    bld = ArithBuilder(n)
    args = [
        bld.mulc(Fraction(1, 3), bld.add(bld.inp(i), bld.const(1)))
        for i in range(n)
    ]
    (out,) = bld.inline(approx.circuit, args)
    F = bld.build([out])
    return GdFdInstance(eps / 4, eta, h, F)
