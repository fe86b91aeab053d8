"""Instance-to-instance reductions with exact parameters and back-maps.

Each reduction returns (instance, back_map).  A back map is a small
object that translates a solution of the constructed instance into a
solution of the source instance, surfacing exactly the violation pairs
the correctness arguments inspect.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .circuits import ArithBuilder, ArithCircuit, eval_arith
from .rational import Box, norm, project_box, unit_box, vsub
from .tfnp import (
    EolInstance,
    GcloInstance,
    GdInstance,
    IterInstance,
    KktInstance,
    NOT_A_SOLUTION,
    Verdict,
    check_lipschitz,
    check_taylor,
)


@dataclass
class BackMapResult:
    point: tuple
    violation: Verdict = NOT_A_SOLUTION

    @property
    def ok(self) -> bool:
        return not self.violation.is_violation


class DomainNotUnitSquare(ValueError):
    pass


# ---------------------------------------------------------------------------

@dataclass
class _IdentityBackMap:
    """x itself solves the source; optionally checks a designated pair."""

    source: object
    check: object = None

    def apply(self, x) -> BackMapResult:
        if self.check is not None:
            v = self.check(x)
            if v.is_violation:
                return BackMapResult(tuple(x), v)
        return BackMapResult(tuple(x))


def gdls_to_gdfp(inst: GdInstance):
    """eps' = eps / L; a fixpoint is a local-search stop unless f breaks L."""
    if inst.mode != "local_search":
        raise ValueError("expected a local-search instance")
    if inst.L <= 0:
        raise ValueError("needs L > 0")
    out = GdInstance(
        "fixpoint", inst.eps / inst.L, inst.eta, inst.domain, inst.f, inst.grad_f, inst.L
    )

    def check(x):
        from .tfnp import gd_step

        y = gd_step(inst, x)
        return check_lipschitz(inst.f, inst.L, x, y, "l2", "ViolationLipschitzF")

    return out, _IdentityBackMap(inst, check)


def gdfp_to_kkt(inst: GdInstance):
    """eps' = eps / eta; every eps'-KKT point is an eps-approximate fixpoint."""
    if inst.mode != "fixpoint":
        raise ValueError("expected a fixpoint instance")
    out = KktInstance(inst.eps / inst.eta, inst.domain, inst.f, inst.grad_f, inst.L)
    return out, _IdentityBackMap(inst)


@dataclass
class _KktBackMap:
    """The projected-step target y, not x, is the KKT point."""

    source: KktInstance
    eta: Fraction

    def apply(self, x) -> BackMapResult:
        grad = eval_arith(self.source.grad_f, x)
        moved = tuple(xi - self.eta * gi for xi, gi in zip(x, grad))
        y = project_box(moved, self.source.domain)
        v = check_taylor(self.source.f, self.source.grad_f, self.source.L, x, y)
        if v.is_violation:
            return BackMapResult(y, v)
        v = check_lipschitz(
            self.source.grad_f, self.source.L, x, y, "l2", "ViolationLipschitzGrad"
        )
        if v.is_violation:
            return BackMapResult(y, v)
        return BackMapResult(y)


def kkt_to_gdls(inst: KktInstance):
    """eps' = eps^2 / (8 L), eta = 1 / L."""
    if inst.L <= 0:
        raise ValueError("needs L > 0")
    eps2 = inst.eps * inst.eps / (8 * inst.L)
    eta = Fraction(1) / inst.L
    out = GdInstance(
        "local_search", eps2, eta, inst.domain, inst.f, inst.grad_f, inst.L
    )
    return out, _KktBackMap(inst, eta)


def _wrap_gd_map(grad_f: ArithCircuit, eta: Fraction) -> ArithCircuit:
    """Circuit for g(x) = x - eta * grad_f(x) using only SUB and MULC."""
    n = grad_f.num_inputs
    bld = ArithBuilder(n)
    xs = [bld.inp(i) for i in range(n)]
    gs = bld.inline(grad_f, xs)
    outs = [bld.sub(x, bld.mulc(eta, g)) for x, g in zip(xs, gs)]
    return bld.build(outs)


def gdls_to_gclo(inst: GdInstance):
    """p = f, g = x - eta grad f, L' = max(eta L + 1, L)."""
    if inst.mode != "local_search":
        raise ValueError("expected a local-search instance")
    g = _wrap_gd_map(inst.grad_f, inst.eta)
    L2 = max(inst.eta * inst.L + 1, inst.L)
    out = GcloInstance(inst.eps, inst.domain, inst.f, g, L2)
    return out, _IdentityBackMap(inst)


def gclo_clamp_2d(inst: GcloInstance):
    """g' = clamp(g) onto [0,1]^2; Lipschitz constant is unchanged."""
    box = inst.domain
    if not isinstance(box, Box) or box.dim != 2 or box != unit_box(2):
        raise DomainNotUnitSquare("the CLO form requires the unit square")
    n = inst.g.num_inputs
    bld = ArithBuilder(n)
    xs = [bld.inp(i) for i in range(n)]
    outs = bld.inline(inst.g, xs)
    one = bld.const(1)
    zero = bld.const(0)
    outs = [bld.min_(one, bld.max_(zero, o)) for o in outs]
    out = GcloInstance(inst.eps, inst.domain, inst.p, bld.build(outs), inst.L)
    return out, _IdentityBackMap(inst)


def clo_normalize_codomain(inst: GcloInstance):
    """Squash p into [0,1]: p' = min(1, max(0, 1/2 + (p - p(z_c)) / 2nL))."""
    box: Box = inst.domain
    n = box.dim
    z_c = tuple(Fraction(1, 2) for _ in range(n))
    p_center = eval_arith(inst.p, z_c)[0]
    scale = Fraction(1) / (2 * n * inst.L)
    bld = ArithBuilder(n)
    xs = [bld.inp(i) for i in range(n)]
    (p_out,) = bld.inline(inst.p, xs)
    shifted = bld.add(
        bld.const(Fraction(1, 2)),
        bld.mulc(scale, bld.sub(p_out, bld.const(p_center))),
    )
    clamped = bld.min_(bld.const(1), bld.max_(bld.const(0), shifted))
    p2 = bld.build([clamped])
    out = GcloInstance(
        inst.eps * scale, inst.domain, p2, inst.g,
        max(inst.L, Fraction(1, 2 * n)),
    )
    return out, _IdentityBackMap(inst)


def clo_pad_dimension(inst: GcloInstance, k2: int):
    """Lift a k1-dimensional CLO instance to k2 > k1 dimensions."""
    box: Box = inst.domain
    k1 = box.dim
    if k2 <= k1:
        raise ValueError("target dimension must exceed the source dimension")
    bld_p = ArithBuilder(k2)
    xs = [bld_p.inp(i) for i in range(k1)]
    p2 = bld_p.build(bld_p.inline(inst.p, xs))
    bld_g = ArithBuilder(k2)
    xs = [bld_g.inp(i) for i in range(k1)]
    outs = bld_g.inline(inst.g, xs)
    zero = bld_g.const(0)
    outs = outs + [zero] * (k2 - k1)
    g2 = bld_g.build(outs)
    out = GcloInstance(inst.eps, unit_box(k2), p2, g2, inst.L)

    @dataclass
    class _Truncate:
        source: GcloInstance

        def apply(self, x) -> BackMapResult:
            return BackMapResult(tuple(x[:k1]))

    return out, _Truncate(inst)


@dataclass
class BrouwerInstance:
    """Approximate fixed point of x -> Pi_D(g(x))."""

    eps: Fraction
    domain: object
    g: ArithCircuit
    L: Fraction

    def __post_init__(self):
        self.eps = Fraction(self.eps)
        self.L = Fraction(self.L)


def check_brouwer(inst: BrouwerInstance, x) -> Verdict:
    gx = eval_arith(inst.g, x)
    target = project_box(gx, inst.domain)
    dist_sq = norm(vsub(tuple(x), target), "l2sq")
    from .tfnp import SOLUTION

    return SOLUTION if dist_sq <= inst.eps * inst.eps else NOT_A_SOLUTION


def gclo_to_brouwer(inst: GcloInstance):
    """eps' = eps / L; a fixed point is a local optimum unless p breaks L."""
    if inst.L <= 0:
        raise ValueError("needs L > 0")
    out = BrouwerInstance(inst.eps / inst.L, inst.domain, inst.g, inst.L)

    def check(x):
        gx = eval_arith(inst.g, x)
        target = project_box(gx, inst.domain)
        return check_lipschitz(inst.p, inst.L, x, target, "l2", "ViolationLipschitzF")

    return out, _IdentityBackMap(inst, check)


# ---------------------------------------------------------------------------

@dataclass
class EitherInstance:
    eol: EolInstance
    it: IterInstance


def either_combine(a: EolInstance, b: IterInstance) -> EitherInstance:
    return EitherInstance(a, b)


def check_either(inst: EitherInstance, solution) -> bool:
    """Accepts ("eol", v) or ("iter", u)."""
    kind, value = solution
    from .tfnp import check_eol, check_iter

    if kind == "eol":
        return check_eol(inst.eol, value)
    if kind == "iter":
        return check_iter(inst.it, value)
    return False
