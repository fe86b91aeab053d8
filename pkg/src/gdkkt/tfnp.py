"""Problem instances, solution checkers and brute-force oracles.

Covers End-of-Line, Iter, KKT, GD-LocalSearch, GD-Fixpoint and GCLO.
Vertex labels are 1-based; a label v is encoded as the little-endian bit
pattern of v - 1.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from . import lp
from .circuits import (
    ArithCircuit,
    BoolBuilder,
    BoolCircuit,
    arith_to_text,
    bool_to_text,
    circuit_from_text,
    eval_arith,
    eval_bool,
    is_well_behaved,
)
from .rational import (
    Box,
    Rational,
    format_rational,
    norm,
    parse_rational,
    project_box,
    vsub,
    vec,
)


class OutOfRange(ValueError):
    pass


class GuardExceeded(RuntimeError):
    pass


class PointOutsideDomain(ValueError):
    pass


class UnsupportedNormForPolytope(ValueError):
    pass


class InstanceInvariantError(ValueError):
    pass


def vertex_to_bits(v: int, n: int) -> tuple:
    if not 1 <= v <= 1 << n:
        raise OutOfRange(f"vertex {v} outside [1, 2^{n}]")
    return tuple((v - 1) >> i & 1 for i in range(n))


def bits_to_vertex(bits: Sequence[int]) -> int:
    return 1 + sum(b << i for i, b in enumerate(bits))


# ---------------------------------------------------------------------------
# discrete instances

@dataclass
class EolInstance:
    n: int
    S: BoolCircuit
    P: BoolCircuit

    def __post_init__(self):
        if self.S.num_inputs != self.n or self.S.num_outputs != self.n:
            raise InstanceInvariantError("S must map n bits to n bits")
        if self.P.num_inputs != self.n or self.P.num_outputs != self.n:
            raise InstanceInvariantError("P must map n bits to n bits")
        if self.eval_p(1) != 1 or self.eval_s(1) == 1:
            raise InstanceInvariantError("need P(1) = 1 != S(1)")

    def eval_s(self, v: int) -> int:
        return bits_to_vertex(eval_bool(self.S, vertex_to_bits(v, self.n)))

    def eval_p(self, v: int) -> int:
        return bits_to_vertex(eval_bool(self.P, vertex_to_bits(v, self.n)))


@dataclass
class IterInstance:
    m: int
    C: BoolCircuit

    def __post_init__(self):
        if self.C.num_inputs != self.m or self.C.num_outputs != self.m:
            raise InstanceInvariantError("C must map m bits to m bits")
        if self.eval_c(1) <= 1:
            raise InstanceInvariantError("need C(1) > 1")

    def eval_c(self, u: int) -> int:
        return bits_to_vertex(eval_bool(self.C, vertex_to_bits(u, self.m)))


def _ult(bld: BoolBuilder, a: Sequence[int], b: Sequence[int]) -> int:
    """a < b for little-endian unsigned bit vectors of equal width."""
    lt = bld.FALSE
    for ai, bi in zip(a, b):
        diff = bld.xor_(ai, bi)
        lt = bld.mux(diff, bld.and_(bld.not_(ai), bi), lt)
    return lt


def _neq(bld: BoolBuilder, a: Sequence[int], b: Sequence[int]) -> int:
    return bld.or_all([bld.xor_(x, y) for x, y in zip(a, b)])


def preprocess_eol(inst: EolInstance) -> EolInstance:
    """Force S and P to agree on all edges.

    S'(v) outputs v instead of S(v) whenever S(v) != v and P(S(v)) != v,
    and symmetrically for P.  No new solutions are introduced.
    """
    n = inst.n

    def wrap(first: BoolCircuit, second: BoolCircuit) -> BoolCircuit:
        bld = BoolBuilder(n)
        v = [bld.inp(i) for i in range(n)]
        s = bld.inline(first, v)
        ps = bld.inline(second, s)
        bad = bld.and_(_neq(bld, s, v), _neq(bld, ps, v))
        out = [bld.mux(bad, vi, si) for vi, si in zip(v, s)]
        return bld.build(out)

    s2 = wrap(inst.S, inst.P)
    p2 = wrap(inst.P, inst.S)
    try:
        return EolInstance(n, s2, p2)
    except InstanceInvariantError:
        # the wrap can only break S(1) != 1 when P(S(1)) != 1 originally,
        # i.e. when vertex 1 already solves the given instance
        raise InstanceInvariantError(
            "vertex 1 solves the instance outright; the embedding needs a "
            "consistent outgoing edge at the trivial source"
        )


def preprocess_iter(inst: IterInstance) -> IterInstance:
    """Force C(u) >= u by outputting u whenever C(u) < u."""
    m = inst.m
    bld = BoolBuilder(m)
    u = [bld.inp(i) for i in range(m)]
    c = bld.inline(inst.C, u)
    lt = _ult(bld, c, u)
    out = [bld.mux(lt, ui, ci) for ui, ci in zip(u, c)]
    return IterInstance(m, bld.build(out))


def check_eol(inst: EolInstance, v: int) -> bool:
    """v solves End-of-Line iff P(S(v)) != v, or S(P(v)) != v and v != 1."""
    if not 1 <= v <= 1 << inst.n:
        raise OutOfRange(f"vertex {v} outside range")
    if inst.eval_p(inst.eval_s(v)) != v:
        return True
    return v != 1 and inst.eval_s(inst.eval_p(v)) != v


def check_iter(inst: IterInstance, u: int) -> bool:
    if not 1 <= u <= 1 << inst.m:
        raise OutOfRange(f"node {u} outside range")
    c = inst.eval_c(u)
    if c < u:
        return True
    return c > u and inst.eval_c(c) == c


_BRUTE_GUARD = 20


def brute_force_eol(inst: EolInstance) -> int:
    if inst.n > _BRUTE_GUARD:
        raise GuardExceeded("instance too large for exhaustive scan")
    for v in range(1, (1 << inst.n) + 1):
        if check_eol(inst, v):
            return v
    raise AssertionError("End-of-Line instance without solution")


def brute_force_iter(inst: IterInstance) -> int:
    if inst.m > _BRUTE_GUARD:
        raise GuardExceeded("instance too large for exhaustive scan")
    for u in range(1, (1 << inst.m) + 1):
        if check_iter(inst, u):
            return u
    raise AssertionError("Iter instance without solution")


def eol_from_edges(n: int, edges: Sequence[tuple]) -> EolInstance:
    """Build table-backed S, P circuits from an explicit edge list.

    Unlisted vertices are self-mapped.  The in/out-degree-1 discipline is
    enforced here.
    """
    from .circuits import table_to_bool

    size = 1 << n
    s_tab = list(range(size))
    p_tab = list(range(size))
    for u, v in edges:
        if not (1 <= u <= size and 1 <= v <= size):
            raise OutOfRange(f"edge ({u},{v}) outside [1, {size}]")
        if s_tab[u - 1] != u - 1 or p_tab[v - 1] != v - 1:
            raise InstanceInvariantError(f"edge ({u},{v}) violates degree-1")
        s_tab[u - 1] = v - 1
        p_tab[v - 1] = u - 1
    return EolInstance(n, table_to_bool(s_tab, n, n), table_to_bool(p_tab, n, n))


def iter_from_map(m: int, mapping: dict) -> IterInstance:
    """Build a table-backed C circuit; unlisted nodes are fixed points."""
    from .circuits import table_to_bool

    size = 1 << m
    tab = list(range(size))
    for u, cu in mapping.items():
        if not (1 <= u <= size and 1 <= cu <= size):
            raise OutOfRange(f"entry {u}:{cu} outside [1, {size}]")
        tab[u - 1] = cu - 1
    return IterInstance(m, table_to_bool(tab, m, m))


# ---------------------------------------------------------------------------
# continuous instances

@dataclass
class Polytope:
    """D = {x : Ax <= b}; used only in metadata and the l_inf KKT check."""

    A: list
    b: list

    def __post_init__(self):
        self.A = [vec(row) for row in self.A]
        self.b = [Fraction(v) for v in self.b]

    def __contains__(self, x) -> bool:
        return all(
            sum(a * xi for a, xi in zip(row, x)) <= bi
            for row, bi in zip(self.A, self.b)
        )


@dataclass
class KktInstance:
    eps: Rational
    domain: object  # Box or Polytope
    f: ArithCircuit
    grad_f: ArithCircuit
    L: Rational

    def __post_init__(self):
        self.eps = Fraction(self.eps)
        self.L = Fraction(self.L)


@dataclass
class GdInstance:
    mode: str  # "local_search" or "fixpoint"
    eps: Rational
    eta: Rational
    domain: object
    f: ArithCircuit
    grad_f: ArithCircuit
    L: Rational

    def __post_init__(self):
        if self.mode not in ("local_search", "fixpoint"):
            raise ValueError(f"unknown mode {self.mode!r}")
        self.eps = Fraction(self.eps)
        self.eta = Fraction(self.eta)
        self.L = Fraction(self.L)
        if self.eta <= 0:
            raise ValueError("step size must be positive")


@dataclass
class GcloInstance:
    eps: Rational
    domain: object
    p: ArithCircuit
    g: ArithCircuit
    L: Rational

    def __post_init__(self):
        self.eps = Fraction(self.eps)
        self.L = Fraction(self.L)


@dataclass
class Verdict:
    kind: str  # Solution | NotASolution | ViolationLipschitzF |
    #            ViolationLipschitzGrad | ViolationTaylor
    witness: tuple = field(default_factory=tuple)

    def __bool__(self) -> bool:
        return self.kind == "Solution"

    @property
    def is_violation(self) -> bool:
        return self.kind.startswith("Violation")


SOLUTION = Verdict("Solution")
NOT_A_SOLUTION = Verdict("NotASolution")


def _require_inside(domain, x) -> None:
    if x not in domain:
        raise PointOutsideDomain(f"{x} is outside the domain")


def _box_residuals(box: Box, x, grad) -> list:
    """Per-coordinate KKT residuals on a box.

    At a free coordinate the residual is grad_i; at an active lower bound
    only the negative part remains, at an upper bound only the positive.
    """
    res = []
    for lo, xi, hi, gi in zip(box.lo, x, box.hi, grad):
        at_lo = xi == lo
        at_hi = xi == hi
        if at_lo and at_hi:
            res.append(Fraction(0))
        elif at_lo:
            res.append(max(-gi, Fraction(0)))
        elif at_hi:
            res.append(max(gi, Fraction(0)))
        else:
            res.append(abs(gi))
    return res


def check_kkt(inst: KktInstance, x, norm_kind: str = "linf") -> Verdict:
    """Is ``x`` an eps-KKT point?  Exact; boxes componentwise, polytopes by LP."""
    _require_inside(inst.domain, x)
    grad = eval_arith(inst.grad_f, x)
    eps = inst.eps
    if isinstance(inst.domain, Box):
        res = _box_residuals(inst.domain, x, grad)
        if norm_kind == "linf":
            ok = max(res) <= eps
        elif norm_kind == "l2":
            ok = sum((r * r for r in res), Fraction(0)) <= eps * eps
        else:
            raise ValueError(f"unknown norm {norm_kind!r}")
        return SOLUTION if ok else NOT_A_SOLUTION
    if norm_kind != "linf":
        raise UnsupportedNormForPolytope(
            "only the l_inf certificate is implemented on general polytopes"
        )
    poly: Polytope = inst.domain
    active = [
        row
        for row, bi in zip(poly.A, poly.b)
        if sum(a * xi for a, xi in zip(row, x)) == bi
    ]
    k = len(active)
    ncols = len(x)
    # exists nu >= 0 with -eps <= grad + A_active^T nu <= eps
    M = []
    d = []
    for j in range(ncols):
        M.append([active[i][j] for i in range(k)])
        d.append(eps - grad[j])
    for j in range(ncols):
        M.append([-active[i][j] for i in range(k)])
        d.append(eps + grad[j])
    return SOLUTION if lp.feasible_nonneg(M, d) else NOT_A_SOLUTION


def gd_step(inst: GdInstance, x) -> tuple:
    grad = eval_arith(inst.grad_f, x)
    moved = tuple(xi - inst.eta * gi for xi, gi in zip(x, grad))
    return project_box(moved, inst.domain)


def check_gd(inst: GdInstance, x) -> Verdict:
    """Evaluate the stopping criterion of the instance's mode at ``x``."""
    _require_inside(inst.domain, x)
    nxt = gd_step(inst, x)
    if inst.mode == "local_search":
        fx = eval_arith(inst.f, x)[0]
        fn = eval_arith(inst.f, nxt)[0]
        return SOLUTION if fn >= fx - inst.eps else NOT_A_SOLUTION
    dist_sq = norm(vsub(x, nxt), "l2sq")
    return SOLUTION if dist_sq <= inst.eps * inst.eps else NOT_A_SOLUTION


def check_taylor(f: ArithCircuit, grad_f: ArithCircuit, L, x, y) -> Verdict:
    """ViolationTaylor iff |f(y)-f(x)-<grad f(x), y-x>| > (L/2)|y-x|^2."""
    L = Fraction(L)
    fx = eval_arith(f, x)[0]
    fy = eval_arith(f, y)[0]
    grad = eval_arith(grad_f, x)
    inner = sum((g * (yi - xi) for g, yi, xi in zip(grad, y, x)), Fraction(0))
    lhs = abs(fy - fx - inner)
    rhs = L / 2 * norm(vsub(y, x), "l2sq")
    if lhs > rhs:
        return Verdict("ViolationTaylor", (tuple(x), tuple(y)))
    return NOT_A_SOLUTION


def check_lipschitz(
    h: ArithCircuit, L, x, y, norm_kind: str = "l2", kind: str = "ViolationLipschitzF"
) -> Verdict:
    """Violation iff |h(x)-h(y)| > L |x-y| (squared forms keep it exact)."""
    L = Fraction(L)
    hx = eval_arith(h, x)
    hy = eval_arith(h, y)
    diff = vsub(hx, hy)
    step = vsub(tuple(x), tuple(y))
    if norm_kind == "l2":
        exceeded = norm(diff, "l2sq") > L * L * norm(step, "l2sq")
    elif norm_kind == "linf":
        exceeded = norm(diff, "linf") > L * norm(step, "linf")
    else:
        raise ValueError(f"unknown norm {norm_kind!r}")
    if exceeded:
        return Verdict(kind, (tuple(x), tuple(y)))
    return NOT_A_SOLUTION


def check_gclo(inst: GcloInstance, x) -> Verdict:
    """Solution iff p(Pi_D(g(x))) >= p(x) - eps."""
    _require_inside(inst.domain, x)
    gx = eval_arith(inst.g, x)
    target = project_box(gx, inst.domain)
    px = eval_arith(inst.p, x)[0]
    pt = eval_arith(inst.p, target)[0]
    return SOLUTION if pt >= px - inst.eps else NOT_A_SOLUTION


# ---------------------------------------------------------------------------
# instance bundles on disk

def save_bundle(path: str, inst, extra: Optional[dict] = None) -> None:
    """Write an instance directory: meta.json plus circuit files."""
    os.makedirs(path, exist_ok=True)
    meta: dict = {}
    files: dict = {}
    if isinstance(inst, EolInstance):
        meta = {"kind": "eol", "n": inst.n}
        files = {"S.bc": bool_to_text(inst.S), "P.bc": bool_to_text(inst.P)}
    elif isinstance(inst, IterInstance):
        meta = {"kind": "iter", "m": inst.m}
        files = {"C.bc": bool_to_text(inst.C)}
    elif isinstance(inst, KktInstance):
        meta = {
            "kind": "kkt",
            "eps": format_rational(inst.eps),
            "L": format_rational(inst.L),
            "domain": _domain_meta(inst.domain),
        }
        files = {"f.ac": arith_to_text(inst.f), "grad.ac": arith_to_text(inst.grad_f)}
    elif isinstance(inst, GdInstance):
        meta = {
            "kind": "gd",
            "mode": inst.mode,
            "eps": format_rational(inst.eps),
            "eta": format_rational(inst.eta),
            "L": format_rational(inst.L),
            "domain": _domain_meta(inst.domain),
        }
        files = {"f.ac": arith_to_text(inst.f), "grad.ac": arith_to_text(inst.grad_f)}
    elif isinstance(inst, GcloInstance):
        meta = {
            "kind": "gclo",
            "eps": format_rational(inst.eps),
            "L": format_rational(inst.L),
            "domain": _domain_meta(inst.domain),
        }
        files = {"p.ac": arith_to_text(inst.p), "g.ac": arith_to_text(inst.g)}
    else:
        from .reductions import BrouwerInstance

        if isinstance(inst, BrouwerInstance):
            meta = {
                "kind": "brouwer",
                "eps": format_rational(inst.eps),
                "L": format_rational(inst.L),
                "domain": _domain_meta(inst.domain),
            }
            files = {"g.ac": arith_to_text(inst.g)}
        else:
            raise TypeError(f"cannot bundle {type(inst)!r}")
    if extra:
        meta.update(extra)
    with open(os.path.join(path, "meta.json"), "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    for name, text in files.items():
        with open(os.path.join(path, name), "w", newline="\n") as fh:
            fh.write(text)


def _domain_meta(domain) -> dict:
    if isinstance(domain, Box):
        return {
            "lo": [format_rational(v) for v in domain.lo],
            "hi": [format_rational(v) for v in domain.hi],
        }
    raise TypeError("only box domains are serialized in bundles")


def _domain_from_meta(meta: dict) -> Box:
    return Box(
        [parse_rational(v) for v in meta["lo"]],
        [parse_rational(v) for v in meta["hi"]],
    )


def load_bundle(path: str):
    with open(os.path.join(path, "meta.json")) as fh:
        meta = json.load(fh)
    kind = meta["kind"]

    def circ(name):
        with open(os.path.join(path, name)) as fh:
            return circuit_from_text(fh.read())

    if kind == "eol":
        return EolInstance(meta["n"], circ("S.bc"), circ("P.bc")), meta
    if kind == "iter":
        return IterInstance(meta["m"], circ("C.bc")), meta
    if kind == "kkt":
        return (
            KktInstance(
                parse_rational(meta["eps"]),
                _domain_from_meta(meta["domain"]),
                circ("f.ac"),
                circ("grad.ac"),
                parse_rational(meta["L"]),
            ),
            meta,
        )
    if kind == "gd":
        return (
            GdInstance(
                meta["mode"],
                parse_rational(meta["eps"]),
                parse_rational(meta["eta"]),
                _domain_from_meta(meta["domain"]),
                circ("f.ac"),
                circ("grad.ac"),
                parse_rational(meta["L"]),
            ),
            meta,
        )
    if kind == "gclo":
        return (
            GcloInstance(
                parse_rational(meta["eps"]),
                _domain_from_meta(meta["domain"]),
                circ("p.ac"),
                circ("g.ac"),
                parse_rational(meta["L"]),
            ),
            meta,
        )
    if kind == "brouwer":
        from .reductions import BrouwerInstance

        return (
            BrouwerInstance(
                parse_rational(meta["eps"]),
                _domain_from_meta(meta["domain"]),
                circ("g.ac"),
                parse_rational(meta["L"]),
            ),
            meta,
        )
    raise ValueError(f"unknown bundle kind {kind!r}")


def require_well_behaved(*circs: ArithCircuit) -> None:
    for c in circs:
        if not is_well_behaved(c):
            raise InstanceInvariantError("circuit is not well-behaved")
