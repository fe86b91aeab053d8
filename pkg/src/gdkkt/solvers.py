"""Solvers: projected gradient descent, 1-d GCLO, unary-parameter KKT."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .circuits import eval_arith
from .rational import Box, project_box
from .tfnp import (
    GcloInstance,
    GdInstance,
    KktInstance,
    PointOutsideDomain,
    Verdict,
    check_gclo,
    check_gd,
)


class StartOutsideDomain(PointOutsideDomain):
    pass


class DimensionNotOne(ValueError):
    pass


class BudgetExceeded(RuntimeError):
    pass


@dataclass
class GdRun:
    status: str  # "stopped" | "budget"
    point: tuple
    iterations: int
    trajectory_tail: list

    @property
    def stopped(self) -> bool:
        return self.status == "stopped"


def projected_gd(
    inst: GdInstance,
    start,
    max_iters: int,
    round_denom: int = 0,
    tail: int = 8,
) -> GdRun:
    """Iterate x <- Pi_D(x - eta grad f(x)) exactly until the stop criterion.

    The optional denominator rounding keeps iterate bit-sizes bounded; it
    perturbs the next start point and is off by default.
    """
    x = tuple(Fraction(v) for v in start)
    if x not in inst.domain:
        raise StartOutsideDomain(f"start {x} outside the domain")
    trail = [x]
    for k in range(max_iters):
        if check_gd(inst, x):
            return GdRun("stopped", x, k, trail[-tail:])
        grad = eval_arith(inst.grad_f, x)
        moved = tuple(xi - inst.eta * gi for xi, gi in zip(x, grad))
        x = project_box(moved, inst.domain)
        if round_denom:
            x = tuple(v.limit_denominator(round_denom) for v in x)
            x = project_box(x, inst.domain)
        trail.append(x)
        if len(trail) > tail:
            trail.pop(0)
    return GdRun("budget", x, max_iters, trail[-tail:])


def solve_1d_gclo(inst: GcloInstance):
    """Grid bisection for one-dimensional GCLO.

    Returns {"point": x} with a checked solution, or
    {"violation": (x1, x2)} when two adjacent grid points witness that g
    breaks its Lipschitz bound.
    """
    box: Box = inst.domain
    if not isinstance(box, Box) or box.dim != 1:
        raise DimensionNotOne("solver requires a one-dimensional box domain")
    t1, t2 = box.lo[0], box.hi[0]
    L = max(inst.L, Fraction(1))
    spacing_target = inst.eps / (L * L)
    K = max(1, math.ceil((t2 - t1) / spacing_target)) if t2 > t1 else 1
    step = (t2 - t1) / K if t2 > t1 else Fraction(0)

    def clamped_g(x):
        gx = eval_arith(inst.g, (x,))
        return project_box(gx, box)[0]

    def h(i: int) -> Fraction:
        x = t1 + step * i
        return clamped_g(x) - x

    lo, hi = 0, K
    h_lo = h(lo)
    h_hi = h(hi)
    if h_lo < 0:
        hi = lo  # the left endpoint already maps (weakly) leftward
    elif h_hi > 0:
        lo = hi
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if h(mid) >= 0:
            lo = mid
        else:
            hi = mid
    thresh = inst.eps / L
    for i in (lo, hi):
        x = t1 + step * i
        if abs(clamped_g(x) - x) <= thresh:
            assert check_gclo(inst, (x,))
            return {"point": (x,)}
    x1 = t1 + step * lo
    x2 = t1 + step * hi
    return {"violation": ((x1,), (x2,))}


def solve_kkt_unary(inst: KktInstance):
    """Projected gradient descent with the step budget of the unary bound.

    Uses eps' = eps^2 / 8L and eta = 1/L from the KKT-to-local-search
    reduction; polynomial only when eps and L are unary-scale.
    """
    from .reductions import kkt_to_gdls

    box: Box = inst.domain
    n = box.dim
    gdls, back = kkt_to_gdls(inst)
    sqrt_n_ceil = math.isqrt(n - 1) + 1 if n > 1 else 1
    budget_frac = 16 * sqrt_n_ceil * inst.L * inst.L / (inst.eps * inst.eps)
    budget = int(budget_frac) + 1
    run = projected_gd(gdls, tuple(box.lo), budget + 1)
    if not run.stopped:
        raise BudgetExceeded(
            "descent budget exhausted; parameters are not unary-scale"
        )
    result = back.apply(run.point)
    return result


def unary_budget(n: int, L, eps) -> int:
    """The 16 sqrt(n) L^2 / eps^2 iteration cap, rounded up."""
    sqrt_n_ceil = math.isqrt(n - 1) + 1 if n > 1 else 1
    return int(16 * sqrt_n_ceil * Fraction(L) ** 2 / Fraction(eps) ** 2) + 1
