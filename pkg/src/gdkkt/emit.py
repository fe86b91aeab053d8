"""Emission of self-contained arithmetic circuits for f and grad f.

The circuits take a point of [0, N]^2 and
  1. extract the bits of the containing cell with comparison gates,
  2. re-derive colour and arrow at the four cell corners, embedding the
     Boolean S, P, C circuits through the linear AND/OR/NOT simulation,
  3. assemble the sixteen bicubic corner scalars and the coefficient
     matrix, and
  4. evaluate the patch polynomial (resp. its gradient).

Everything up to step 4 uses only linear gates and comparisons; step 4
uses a constant number of true multiplications, so the circuits are
well-behaved.  The corner logic below mirrors ``grid.layout_point`` case
for case; the test suite checks exhaustive agreement at small sizes and
random rational points at desk scale.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .circuits import ArithBuilder, ArithCircuit, prune
from .grid import GridModel, GridSpec
from .rational import Box
from .tfnp import EolInstance, IterInstance, KktInstance


class _Logic:
    """Boolean helpers over 0/1-valued arithmetic nodes."""

    def __init__(self, bld: ArithBuilder):
        self.bld = bld
        self.one = bld.const(1)
        self.zero = bld.const(0)
        self.TRUE = self.one
        self.FALSE = self.zero

    def not_(self, a):
        if a == self.TRUE:
            return self.FALSE
        if a == self.FALSE:
            return self.TRUE
        return self.bld.sub(self.one, a)

    def and_(self, *xs):
        acc = self.TRUE
        for x in xs:
            if x == self.FALSE or acc == self.FALSE:
                return self.FALSE
            if x == self.TRUE:
                continue
            if acc == self.TRUE:
                acc = x
            else:
                s = self.bld.add(acc, x)
                acc = self.bld.max_(self.zero, self.bld.sub(s, self.one))
        return acc

    def or_(self, *xs):
        acc = self.FALSE
        for x in xs:
            if x == self.TRUE or acc == self.TRUE:
                return self.TRUE
            if x == self.FALSE:
                continue
            if acc == self.FALSE:
                acc = x
            else:
                acc = self.bld.min_(self.one, self.bld.add(acc, x))
        return acc

    def xor_(self, a, b):
        return self.or_(self.and_(a, self.not_(b)), self.and_(self.not_(a), b))

    def mux(self, s, t, f):
        if t == f:
            return t
        return self.or_(self.and_(s, t), self.and_(self.not_(s), f))

    # integer comparisons on exact integer-valued nodes
    def gt(self, a, b):
        return self.bld.cmp(a, b)

    def lt(self, a, b):
        return self.bld.cmp(b, a)

    def ge(self, a, b):
        return self.not_(self.bld.cmp(b, a))

    def le(self, a, b):
        return self.not_(self.bld.cmp(a, b))

    def eq(self, a, b):
        if a == b:
            return self.TRUE
        return self.and_(self.le(a, b), self.ge(a, b))

    def int_of(self, bits):
        acc = self.zero
        for j, b in enumerate(bits):
            acc = self.bld.add(acc, self.bld.mulc(1 << j, b))
        return acc

    def add_const_bits(self, bits, K: int):
        """Bits of (value + K) mod 2**w by constant ripple carry."""
        w = len(bits)
        K &= (1 << w) - 1
        out = []
        carry = self.FALSE
        for j in range(w):
            kj = (K >> j) & 1
            b = bits[j]
            if kj == 0:
                out.append(self.xor_(b, carry))
                carry = self.and_(b, carry)
            else:
                out.append(self.not_(self.xor_(b, carry)))
                carry = self.or_(b, carry)
        return out

    def sub_from_const_bits(self, bits, K: int):
        """Bits of (K - value) mod 2**w."""
        inv = [self.not_(b) for b in bits]
        return self.add_const_bits(inv, K + 1)

    def inc_bits(self, bits):
        """Bits of value + 1, plus the final carry bit."""
        out = []
        carry = self.TRUE
        for b in bits:
            out.append(self.xor_(b, carry))
            carry = self.and_(b, carry)
        return out, carry

    def dec_bits(self, bits):
        out = []
        borrow = self.TRUE
        for b in bits:
            out.append(self.xor_(b, borrow))
            borrow = self.and_(self.not_(b), borrow)
        return out


@dataclass
class _Corner:
    """Per-corner colour/arrow one-hots and absolute coordinate data."""

    x_bits: list  # k+1 bits of the corner x coordinate
    y_bits: list
    x_int: object
    y_int: object
    color: dict  # color id -> bit node
    arrow: dict  # arrow id -> bit node


# colour ids used locally (match grid.py)
_RED, _ORANGE, _BLACK, _GREEN, _BLUE = range(5)
_LEFT, _RIGHT, _UP, _DOWN = range(4)
_SWAP = {_RED: _BLUE, _BLUE: _RED, _GREEN: _ORANGE, _ORANGE: _GREEN, _BLACK: _BLACK}


class _Emitter:
    def __init__(self, gs: GridSpec, eol: EolInstance, it: IterInstance):
        self.gs = gs
        self.eol = eol
        self.it = it
        self.bld = ArithBuilder(2)
        self.lg = _Logic(self.bld)
        self.k = gs.n + gs.m + 4
        self.S = gs.big_side
        self.c = self.S // 2

    # -- step 1: cell bits -------------------------------------------------
    def extract_cell_bits(self, x_node):
        """Bits of the cell index clamp(floor-ish(x), 0, N-1)."""
        bld, lg = self.bld, self.lg
        bits = [None] * self.k
        t = x_node
        for j in reversed(range(self.k)):
            b = bld.cmp(t, bld.const(1 << j))
            bits[j] = b
            t = bld.sub(t, bld.mulc(1 << j, b))
        return bits

    def corner_versions(self, bits):
        """(bits + carry) pairs for offsets 0 and 1."""
        zero_c = self.lg.FALSE
        inc, carry = self.lg.inc_bits(bits)
        return (bits, zero_c), (inc, carry)

    # -- step 2: per-corner colour and arrow --------------------------------
    def corner_data(self, xv, yv) -> _Corner:
        lg, bld = self.lg, self.bld
        n, m = self.gs.n, self.gs.m
        S, c = self.S, self.c
        x_bits, x_carry = xv
        y_bits, y_carry = yv
        # local coords and big-square index (the carry means coord == N)
        low_x = x_bits[: m + 4]
        low_y = y_bits[: m + 4]
        li = bld.add(lg.int_of(low_x), bld.mulc(S, x_carry))
        lj = bld.add(lg.int_of(low_y), bld.mulc(S, y_carry))
        v1_bits = [lg.or_(b, x_carry) for b in x_bits[m + 4 : m + 4 + n]]
        v2_bits = [lg.or_(b, y_carry) for b in y_bits[m + 4 : m + 4 + n]]
        v1 = lg.int_of(v1_bits)  # 0-based vertex index
        v2 = lg.int_of(v2_bits)
        s1 = lg.int_of(bld.inline_bool(self.eol.S, v1_bits))
        p1 = lg.int_of(bld.inline_bool(self.eol.P, v1_bits))
        s2 = lg.int_of(bld.inline_bool(self.eol.S, v2_bits))

        types = self.classify(v1, v2, s1, p1, s2)
        li_bits = low_x + [x_carry]
        lj_bits = low_y + [y_carry]
        color, arrow = self.corner_layout(types, li, lj, li_bits, lj_bits)

        x_int = bld.add(lg.int_of(x_bits[: self.k]), bld.mulc(1 << self.k, x_carry))
        y_int = bld.add(lg.int_of(y_bits[: self.k]), bld.mulc(1 << self.k, y_carry))
        return _Corner(x_bits, y_bits, x_int, y_int, color, arrow)

    def classify(self, v1, v2, s1, p1, s2) -> dict:
        lg = self.lg
        zero = self.bld.const(0)
        v1_is0 = lg.eq(v1, zero)
        v2_is0 = lg.eq(v2, zero)
        tS = lg.and_(v1_is0, v2_is0)
        tE2 = lg.and_(v1_is0, lg.not_(v2_is0))
        diag = lg.and_(lg.eq(v1, v2), lg.not_(v1_is0))
        out = lg.not_(lg.eq(s1, v1))
        inc = lg.not_(lg.eq(p1, v1))
        sgt = lg.gt(s1, v1)
        plt = lg.lt(p1, v1)
        tE1d = lg.and_(diag, lg.not_(out), lg.not_(inc))
        tG5 = lg.and_(diag, out, lg.not_(inc), sgt)
        tO5 = lg.and_(diag, out, lg.not_(inc), lg.not_(sgt))
        tG6 = lg.and_(diag, inc, lg.not_(out), plt)
        tO6 = lg.and_(diag, inc, lg.not_(out), lg.not_(plt))
        tG4 = lg.and_(diag, out, inc, plt, sgt)
        tO4 = lg.and_(diag, out, inc, lg.not_(plt), lg.not_(sgt))
        tLA = lg.and_(diag, out, inc, plt, lg.not_(sgt))
        tLB = lg.and_(diag, out, inc, lg.not_(plt), sgt)
        offd = lg.and_(lg.not_(v1_is0), lg.not_(lg.eq(v1, v2)))
        gh = lg.and_(lg.gt(s2, v2), lg.lt(v2, v1), lg.le(v1, s2))
        gv = lg.and_(lg.lt(p1, v1), lg.le(p1, v2), lg.lt(v2, v1))
        oh = lg.and_(lg.lt(s2, v2), lg.le(s2, v1), lg.lt(v1, v2))
        ov = lg.and_(lg.gt(p1, v1), lg.lt(v1, v2), lg.le(v2, p1))
        same = lg.and_(lg.eq(v2, p1), lg.eq(v1, s2))
        tG3 = lg.and_(offd, gh, gv, same)
        tG7 = lg.and_(offd, gh, gv, lg.not_(same))
        tO3 = lg.and_(offd, oh, ov, same)
        tO7 = lg.and_(offd, oh, ov, lg.not_(same))
        tG1 = lg.and_(offd, gh, lg.not_(gv))
        tG2 = lg.and_(offd, gv, lg.not_(gh))
        tO1 = lg.and_(offd, oh, lg.not_(ov))
        tO2 = lg.and_(offd, ov, lg.not_(oh))
        tE1o = lg.and_(offd, lg.not_(gh), lg.not_(gv), lg.not_(oh), lg.not_(ov))
        return {
            "S": tS,
            "E1": lg.or_(tE1d, tE1o),
            "E2": tE2,
            "G1": tG1,
            "G2": tG2,
            "G3": tG3,
            "G4": tG4,
            "G5": tG5,
            "G6": tG6,
            "G7": tG7,
            "O1": tO1,
            "O2": tO2,
            "O3": tO3,
            "O4": tO4,
            "O5": tO5,
            "O6": tO6,
            "O7": tO7,
            "LA": tLA,
            "LB": tLB,
        }

    # -- gadget layouts (mirror grid.layout_point) --------------------------
    def _cmps(self, v, consts):
        """eq/le/ge comparisons of an integer node against constants."""
        lg, bld = self.lg, self.bld
        return {K: lg.eq(v, bld.const(K)) for K in consts}

    def lay_S(self, li, lj):
        lg, c = self.lg, self.c
        on_exit = lg.or_(lg.eq(lj, self.bld.const(c - 1)), lg.eq(lj, self.bld.const(c)))
        on_leg = lg.and_(
            lg.le(li, self.bld.const(1)), lg.le(lj, self.bld.const(c - 2))
        )
        i0 = lg.eq(li, self.bld.const(0))
        down = lg.and_(i0, lg.not_(on_exit), lg.not_(on_leg))
        return [
            (on_exit, _GREEN, _RIGHT),
            (lg.and_(on_leg, lg.not_(on_exit)), _GREEN, _UP),
            (down, _BLACK, _DOWN),
        ]

    def lay_E2(self, li, lj):
        lg = self.lg
        return [(lg.eq(li, self.bld.const(0)), _BLACK, _DOWN)]

    def lay_G1(self, li, lj):
        lg, c = self.lg, self.c
        green = lg.or_(lg.eq(lj, self.bld.const(c - 1)), lg.eq(lj, self.bld.const(c)))
        return [(green, _GREEN, _RIGHT)]

    def lay_G2(self, li, lj):
        lg, c = self.lg, self.c
        green = lg.or_(lg.eq(li, self.bld.const(c)), lg.eq(li, self.bld.const(c + 1)))
        guard = lg.eq(li, self.bld.const(c - 1))
        return [(green, _GREEN, _UP), (guard, _BLACK, _DOWN)]

    def lay_G3(self, li, lj):
        lg, bld, c = self.lg, self.bld, self.c
        i_c = lg.eq(li, bld.const(c))
        i_c1 = lg.eq(li, bld.const(c + 1))
        on_cols = lg.or_(i_c, i_c1)
        j_hi = lg.ge(lj, bld.const(c + 1))
        j_rows = lg.or_(lg.eq(lj, bld.const(c - 1)), lg.eq(lj, bld.const(c)))
        leg_up = lg.and_(on_cols, j_hi)
        elbow_r = lg.and_(i_c, j_rows)
        elbow_u = lg.and_(i_c1, j_rows)
        in_leg = lg.and_(j_rows, lg.le(li, bld.const(c - 1)))
        guard = lg.and_(lg.eq(li, bld.const(c - 1)), j_hi)
        return [
            (leg_up, _GREEN, _UP),
            (elbow_r, _GREEN, _RIGHT),
            (elbow_u, _GREEN, _UP),
            (in_leg, _GREEN, _RIGHT),
            (guard, _BLACK, _DOWN),
        ]

    def lay_G4(self, li, lj):
        lg, bld, c = self.lg, self.bld, self.c
        on_cols = lg.or_(lg.eq(li, bld.const(c)), lg.eq(li, bld.const(c + 1)))
        j_rows = lg.or_(lg.eq(lj, bld.const(c - 1)), lg.eq(lj, bld.const(c)))
        leg = lg.and_(on_cols, lg.le(lj, bld.const(c - 2)))
        out = lg.and_(j_rows, lg.ge(li, bld.const(c)))
        guard = lg.and_(lg.eq(li, bld.const(c - 1)), lg.le(lj, bld.const(c)))
        return [(leg, _GREEN, _UP), (out, _GREEN, _RIGHT), (guard, _BLACK, _DOWN)]

    def lay_G5(self, li, lj):
        lg, bld, c = self.lg, self.bld, self.c
        j_rows = lg.or_(lg.eq(lj, bld.const(c - 1)), lg.eq(lj, bld.const(c)))
        green = lg.and_(j_rows, lg.ge(li, bld.const(c - 1)))
        return [(green, _GREEN, _RIGHT)]

    def lay_G6(self, li, lj):
        lg, bld, c = self.lg, self.bld, self.c
        on_cols = lg.or_(lg.eq(li, bld.const(c)), lg.eq(li, bld.const(c + 1)))
        leg = lg.and_(on_cols, lg.le(lj, bld.const(c)))
        guard = lg.and_(
            lg.eq(li, bld.const(c - 1)), lg.le(lj, bld.const(c))
        )
        return [(leg, _GREEN, _UP), (guard, _BLACK, _DOWN)]

    def lay_G7(self, li, lj):
        lg, bld, c = self.lg, self.bld, self.c
        i_c = lg.eq(li, bld.const(c))
        i_c1 = lg.eq(li, bld.const(c + 1))
        on_cols = lg.or_(i_c, i_c1)
        j_ge4 = lg.ge(lj, bld.const(c + 4))
        exit_up = lg.and_(on_cols, j_ge4)
        exit_guard = lg.and_(lg.eq(li, bld.const(c - 1)), j_ge4)
        j_mid = lg.or_(lg.eq(lj, bld.const(c + 2)), lg.eq(lj, bld.const(c + 3)))
        elbow3_r = lg.and_(j_mid, i_c)
        elbow3_u = lg.and_(j_mid, i_c1)
        mid_r = lg.and_(
            j_mid, lg.ge(li, bld.const(c - 4)), lg.le(li, bld.const(c - 1))
        )
        mid_guard = lg.and_(j_mid, lg.eq(li, bld.const(c - 5)))
        j_link = lg.eq(lj, bld.const(c + 1))
        link_up = lg.and_(
            j_link,
            lg.or_(lg.eq(li, bld.const(c - 4)), lg.eq(li, bld.const(c - 3))),
        )
        link_guard = lg.and_(j_link, lg.eq(li, bld.const(c - 5)))
        corner_guard = lg.and_(
            lg.eq(lj, bld.const(c + 4)), lg.eq(li, bld.const(c - 5))
        )
        j_rows = lg.or_(lg.eq(lj, bld.const(c - 1)), lg.eq(lj, bld.const(c)))
        in_left = lg.and_(j_rows, lg.le(li, bld.const(c - 5)))
        elbow1_r = lg.and_(j_rows, lg.eq(li, bld.const(c - 4)))
        elbow1_u = lg.and_(j_rows, lg.eq(li, bld.const(c - 3)))
        row_guard = lg.and_(j_rows, lg.eq(li, bld.const(c - 1)))
        out_r = lg.and_(j_rows, lg.ge(li, bld.const(c)))
        j_lo = lg.le(lj, bld.const(c - 2))
        leg_up = lg.and_(on_cols, j_lo)
        leg_guard = lg.and_(lg.eq(li, bld.const(c - 1)), j_lo)
        return [
            (exit_up, _GREEN, _UP),
            (exit_guard, _BLACK, _DOWN),
            (elbow3_r, _GREEN, _RIGHT),
            (elbow3_u, _GREEN, _UP),
            (mid_r, _GREEN, _RIGHT),
            (mid_guard, _BLACK, _DOWN),
            (link_up, _GREEN, _UP),
            (link_guard, _BLACK, _DOWN),
            (corner_guard, _BLACK, _DOWN),
            (in_left, _GREEN, _RIGHT),
            (elbow1_r, _GREEN, _RIGHT),
            (elbow1_u, _GREEN, _UP),
            (row_guard, _BLACK, _DOWN),
            (out_r, _GREEN, _RIGHT),
            (leg_up, _GREEN, _UP),
            (leg_guard, _BLACK, _DOWN),
        ]

    def medium_machinery(self, li, lj, li_bits, lj_bits):
        """Labyrinth data for one orientation: returns medium-kind bits and
        local-offset comparison bits for the corner."""
        lg, bld = self.lg, self.bld
        m = self.gs.m
        c = self.c
        lab = 4 * (1 << m)
        w = m + 4
        in_lab = lg.and_(
            lg.ge(lj, bld.const(c + 2)),
            lg.le(lj, bld.const(c + 2 + lab)),
            lg.ge(li, bld.const(c + 2 - lab)),
            lg.le(li, bld.const(c + 2)),
        )
        # t = c + 1 - li  (valid for li <= c+1; li == c+2 is the right edge)
        t_bits = lg.sub_from_const_bits(li_bits[:w], c + 1)
        edge_r = lg.eq(li, bld.const(c + 2))
        a0_bits = [lg.and_(b, lg.not_(edge_r)) for b in t_bits[2 : 2 + m]]
        t0, t1 = t_bits[0], t_bits[1]
        ne = lg.not_(edge_r)
        lx_eq = {
            4: edge_r,
            3: lg.and_(ne, lg.not_(t0), lg.not_(t1)),
            2: lg.and_(ne, t0, lg.not_(t1)),
            1: lg.and_(ne, lg.not_(t0), t1),
            0: lg.and_(ne, t0, t1),
        }
        # roff = lj - (c + 2); the top edge has roff == lab
        r_bits = lg.add_const_bits(lj_bits[:w], -(c + 2))
        edge_t = lg.eq(lj, bld.const(c + 2 + lab))
        b0_bits = [lg.or_(b, edge_t) for b in r_bits[2 : 2 + m]]
        r0, r1 = r_bits[0], r_bits[1]
        nt = lg.not_(edge_t)
        ly_eq0 = lg.and_(nt, lg.not_(r0), lg.not_(r1))
        ly_in13 = lg.and_(nt, lg.or_(r0, r1))
        ly_le2 = lg.and_(nt, lg.not_(lg.and_(r0, r1)))
        # C evaluations on the 0-based encodings
        one = bld.const(1)
        a_int = bld.add(lg.int_of(a0_bits), one)
        b_int = bld.add(lg.int_of(b0_bits), one)
        ca_bits = bld.inline_bool(self.it.C, a0_bits)
        ca_int = bld.add(lg.int_of(ca_bits), one)
        cca_int = bld.add(lg.int_of(bld.inline_bool(self.it.C, ca_bits)), one)
        cb_bits = bld.inline_bool(self.it.C, b0_bits)
        cb_int = bld.add(lg.int_of(cb_bits), one)
        ccb_int = bld.add(lg.int_of(bld.inline_bool(self.it.C, cb_bits)), one)
        am1_bits = lg.dec_bits(a0_bits)
        cam1_int = bld.add(lg.int_of(bld.inline_bool(self.it.C, am1_bits)), one)
        am1_int = bld.add(lg.int_of(am1_bits), one)

        active_a = lg.gt(ca_int, a_int)
        a_eq_b = lg.eq(a_int, b_int)
        a_gt_b = lg.gt(a_int, b_int)
        b_gt_a = lg.gt(b_int, a_int)
        path = lg.and_(
            lg.gt(cb_int, b_int), lg.gt(ccb_int, cb_int), lg.le(a_int, cb_int)
        )
        first = lg.or_(
            lg.eq(a_int, bld.add(b_int, one)), lg.not_(lg.gt(cam1_int, am1_int))
        )
        k4 = lg.and_(a_eq_b, active_a, lg.gt(cca_int, ca_int))
        k2 = lg.and_(a_eq_b, active_a, lg.not_(lg.gt(cca_int, ca_int)))
        k5 = lg.and_(a_gt_b, active_a, path, first)
        k1 = lg.and_(a_gt_b, active_a, lg.not_(lg.and_(path, first)))
        k6 = lg.and_(
            a_gt_b, lg.not_(active_a), path, lg.not_(first)
        )
        k3 = lg.and_(a_gt_b, lg.not_(active_a), path, first)
        kinds = {1: k1, 2: k2, 3: k3, 4: k4, 5: k5, 6: k6}
        e = {key: lg.and_(v, in_lab) for key, v in kinds.items()}
        chan_or = lx_eq[1]
        chan_bl = lg.or_(lx_eq[2], lx_eq[3])
        lx_le3 = lg.not_(lx_eq[4])
        orange = lg.or_(
            lg.and_(e[1], chan_or),
            lg.and_(e[2], chan_or, ly_le2),
            lg.and_(e[4], chan_or, ly_eq0),
            lg.and_(e[5], chan_or),
        )
        blue_u = lg.or_(
            lg.and_(e[1], chan_bl),
            lg.and_(e[2], chan_bl, ly_le2),
            lg.and_(e[4], chan_bl, ly_eq0),
            lg.and_(e[5], chan_bl),
        )
        blue_l = lg.or_(
            lg.and_(e[3], ly_in13),
            lg.and_(e[4], ly_in13, lx_le3),
            lg.and_(e[5], lx_eq[4], ly_in13),
            lg.and_(e[6], ly_in13, lx_le3),
        )
        return orange, blue_u, blue_l

    def lay_LA(self, li, lj, li_bits, lj_bits):
        lg, bld, c = self.lg, self.bld, self.c
        orange_u, blue_u, blue_l = self.medium_machinery(li, lj, li_bits, lj_bits)
        j_c1 = lg.eq(lj, bld.const(c + 1))
        j_c = lg.eq(lj, bld.const(c))
        j_cm1 = lg.eq(lj, bld.const(c - 1))
        j_low = lg.le(lj, bld.const(c - 2))
        i_cm1 = lg.eq(li, bld.const(c - 1))
        i_c = lg.eq(li, bld.const(c))
        i_c1 = lg.eq(li, bld.const(c + 1))
        out = [
            (orange_u, _ORANGE, _UP),
            (blue_u, _BLUE, _UP),
            (blue_l, _BLUE, _LEFT),
            # stub row j == c+1
            (lg.and_(j_c1, lg.le(li, bld.const(c - 2))), _ORANGE, _RIGHT),
            (lg.and_(j_c1, i_cm1), _ORANGE, _UP),
            (lg.and_(j_c1, lg.or_(i_c, i_c1)), _BLUE, _UP),
            # row j == c
            (lg.and_(j_c, lg.le(li, bld.const(c - 1))), _ORANGE, _RIGHT),
            (lg.and_(j_c, i_c), _GREEN, _RIGHT),
            (lg.and_(j_c, i_c1), _GREEN, _UP),
            # row j == c-1
            (lg.and_(j_cm1, i_cm1), _BLACK, _DOWN),
            (lg.and_(j_cm1, i_c), _GREEN, _RIGHT),
            (lg.and_(j_cm1, i_c1), _GREEN, _UP),
            # incoming green path
            (lg.and_(j_low, lg.or_(i_c, i_c1)), _GREEN, _UP),
            (lg.and_(j_low, i_cm1), _BLACK, _DOWN),
        ]
        return out

    def corner_layout(self, types, li, lj, li_bits, lj_bits):
        """Combine all gadget layouts into colour/arrow one-hots."""
        lg, bld = self.lg, self.bld
        S = self.S
        w = self.gs.m + 4
        # reflected coordinates for the orange gadgets and case-B labyrinth
        rli = bld.sub(bld.const(S), li)
        rlj = bld.sub(bld.const(S), lj)
        rli_bits = lg.sub_from_const_bits(li_bits[:w], S) + [lg.FALSE]
        rlj_bits = lg.sub_from_const_bits(lj_bits[:w], S) + [lg.FALSE]

        green_like = {
            "S": self.lay_S(li, lj),
            "E2": self.lay_E2(li, lj),
            "G1": self.lay_G1(li, lj),
            "G2": self.lay_G2(li, lj),
            "G3": self.lay_G3(li, lj),
            "G4": self.lay_G4(li, lj),
            "G5": self.lay_G5(li, lj),
            "G6": self.lay_G6(li, lj),
            "G7": self.lay_G7(li, lj),
            "LA": self.lay_LA(li, lj, li_bits, lj_bits),
        }
        orange_like = {
            "O1": self.lay_G1(rli, rlj),
            "O2": self.lay_G2(rli, rlj),
            "O3": self.lay_G3(rli, rlj),
            "O4": self.lay_G4(rli, rlj),
            "O5": self.lay_G5(rli, rlj),
            "O6": self.lay_G6(rli, rlj),
            "O7": self.lay_G7(rli, rlj),
            "LB": self.lay_LA(rli, rlj, rli_bits, rlj_bits),
        }
        color_acc = {cid: [] for cid in (_RED, _ORANGE, _GREEN, _BLUE)}
        arrow_acc = {aid: [] for aid in (_RIGHT, _UP, _DOWN)}
        for tname, entries in green_like.items():
            tbit = types[tname]
            for cond, color, arrow in entries:
                hit = lg.and_(tbit, cond)
                if color != _BLACK:
                    color_acc[color].append(hit)
                if arrow != _LEFT:
                    arrow_acc[arrow].append(hit)
        for tname, entries in orange_like.items():
            tbit = types[tname]
            for cond, color, arrow in entries:
                hit = lg.and_(tbit, cond)
                swapped = _SWAP[color]
                if swapped != _BLACK:
                    color_acc[swapped].append(hit)
                if arrow != _LEFT:
                    arrow_acc[arrow].append(hit)
        color = {cid: lg.or_(*bits) if bits else lg.FALSE for cid, bits in color_acc.items()}
        color[_BLACK] = lg.not_(
            lg.or_(color[_RED], color[_ORANGE], color[_GREEN], color[_BLUE])
        )
        arrow = {aid: lg.or_(*bits) if bits else lg.FALSE for aid, bits in arrow_acc.items()}
        arrow[_LEFT] = lg.not_(lg.or_(arrow[_RIGHT], arrow[_UP], arrow[_DOWN]))
        return color, arrow

    # -- step 3: corner scalars ---------------------------------------------
    def corner_value(self, corner: _Corner):
        """f at the corner from its colour one-hot and absolute coords."""
        lg, bld = self.lg, self.bld
        N = self.gs.N
        # x coefficient is -1 exactly for orange and green, y coefficient is
        # +1 exactly for black; expand bit-products through AND gadgets.
        neg_x = lg.or_(corner.color[_ORANGE], corner.color[_GREEN])
        pos_y = corner.color[_BLACK]
        ax = self._masked_int(neg_x, corner.x_bits)  # [neg_x] * x
        by = self._masked_int(lg.not_(pos_y), corner.y_bits)  # [not black] * y
        val = bld.sub(corner.x_int, bld.mulc(2, ax))  # +-x
        val = bld.add(val, bld.sub(corner.y_int, bld.mulc(2, by)))  # +-y
        consts = {
            _RED: 4 * N + 20,
            _ORANGE: 4 * N + 10,
            _BLACK: 0,
            _GREEN: -10,
            _BLUE: -2 * N - 20,
        }
        for cid, K in consts.items():
            if K:
                val = bld.add(val, bld.mulc(K, corner.color[cid]))
        return val

    def _masked_int(self, mask, bits):
        lg, bld = self.lg, self.bld
        acc = bld.const(0)
        for j, b in enumerate(bits):
            acc = bld.add(acc, bld.mulc(1 << j, lg.and_(mask, b)))
        return acc

    def corner_grad(self, corner: _Corner):
        bld = self.bld
        h = Fraction(1, 2)
        fx = bld.sub(
            bld.mulc(h, corner.arrow[_LEFT]), bld.mulc(h, corner.arrow[_RIGHT])
        )
        fy = bld.sub(
            bld.mulc(h, corner.arrow[_DOWN]), bld.mulc(h, corner.arrow[_UP])
        )
        return fx, fy

    # -- step 4: the patch polynomial ----------------------------------------
    def build(self):
        from .bicubic import _ML, _MR

        bld, lg = self.bld, self.lg
        x_in = bld.inp(0)
        y_in = bld.inp(1)
        xbits = self.extract_cell_bits(x_in)
        ybits = self.extract_cell_bits(y_in)
        xv0, xv1 = self.corner_versions(xbits)
        yv0, yv1 = self.corner_versions(ybits)
        corners = {
            (0, 0): self.corner_data(xv0, yv0),
            (1, 0): self.corner_data(xv1, yv0),
            (0, 1): self.corner_data(xv0, yv1),
            (1, 1): self.corner_data(xv1, yv1),
        }
        fval = {}
        fxval = {}
        fyval = {}
        for pos, corner in corners.items():
            fval[pos] = self.corner_value(corner)
            fxval[pos], fyval[pos] = self.corner_grad(corner)
        zero = bld.const(0)
        F = (
            (fval[(0, 0)], fval[(0, 1)], fyval[(0, 0)], fyval[(0, 1)]),
            (fval[(1, 0)], fval[(1, 1)], fyval[(1, 0)], fyval[(1, 1)]),
            (fxval[(0, 0)], fxval[(0, 1)], zero, zero),
            (fxval[(1, 0)], fxval[(1, 1)], zero, zero),
        )

        def mat_mul_const_left(M, X):
            out = []
            for r in range(4):
                row = []
                for cc in range(4):
                    acc = None
                    for kk in range(4):
                        if M[r][kk] == 0:
                            continue
                        term = bld.mulc(M[r][kk], X[kk][cc])
                        acc = term if acc is None else bld.add(acc, term)
                    row.append(acc if acc is not None else zero)
                out.append(row)
            return out

        def mat_mul_const_right(X, M):
            out = []
            for r in range(4):
                row = []
                for cc in range(4):
                    acc = None
                    for kk in range(4):
                        if M[kk][cc] == 0:
                            continue
                        term = bld.mulc(M[kk][cc], X[r][kk])
                        acc = term if acc is None else bld.add(acc, term)
                    row.append(acc if acc is not None else zero)
                out.append(row)
            return out

        A = mat_mul_const_right(mat_mul_const_left(_ML, F), _MR)

        X0 = corners[(0, 0)].x_int
        Y0 = corners[(0, 0)].y_int
        u = bld.sub(x_in, X0)
        w = bld.sub(y_in, Y0)
        u2 = bld.mul(u, u)
        u3 = bld.mul(u2, u)
        w2 = bld.mul(w, w)
        w3 = bld.mul(w2, w)
        upow = (None, u, u2, u3)
        wpow = (None, w, w2, w3)

        def term(node, i, j):
            t = node
            if i >= 1:
                t = bld.mul(t, upow[i])
            if j >= 1:
                t = bld.mul(t, wpow[j])
            return t

        f = None
        for i in range(4):
            for j in range(4):
                t = term(A[i][j], i, j)
                f = t if f is None else bld.add(f, t)
        fx = None
        for i in range(1, 4):
            for j in range(4):
                t = term(bld.mulc(i, A[i][j]), i - 1, j)
                fx = t if fx is None else bld.add(fx, t)
        fy = None
        for i in range(4):
            for j in range(1, 4):
                t = term(bld.mulc(j, A[i][j]), i, j - 1)
                fy = t if fy is None else bld.add(fy, t)
        return f, fx, fy


def emit_circuits(gs: GridSpec, eol: EolInstance, it: IterInstance):
    """Build the f and grad-f circuits for the compiled instance."""
    em = _Emitter(gs, eol, it)
    f, fx, fy = em.build()
    whole = em.bld.build([f, fx, fy])
    f_circ = prune(whole, [f])
    grad_circ = prune(whole, [fx, fy])
    return f_circ, grad_circ


def emit_instance(eol: EolInstance, it: IterInstance) -> KktInstance:
    """The hardness instance on [0, N]^2 with eps = 1/100 and L = 2^18 N."""
    gs = GridSpec(eol.n, it.m)
    f_circ, grad_circ = emit_circuits(gs, eol, it)
    N = gs.N
    return KktInstance(
        eps=Fraction(1, 100),
        domain=Box([0, 0], [N, N]),
        f=f_circ,
        grad_f=grad_circ,
        L=Fraction((1 << 18) * N),
    )


def rescale(inst: KktInstance, alpha=None) -> KktInstance:
    """Unit-square instance: f'(z) = f(N z)/N, grad f'(z) = grad f(N z).

    The Lipschitz bound becomes N * L.  With ``alpha`` the optional value
    scaling (eps, f, L) -> (alpha eps, alpha f, alpha L) is applied on top.
    """
    box: Box = inst.domain
    if box.lo != (0, 0) or box.hi[0] != box.hi[1]:
        raise ValueError("expected a [0, N]^2 domain")
    N = box.hi[0]
    alpha = Fraction(alpha) if alpha is not None else None

    def wrap(circ: ArithCircuit, value_scale) -> ArithCircuit:
        bld = ArithBuilder(2)
        args = [bld.mulc(N, bld.inp(0)), bld.mulc(N, bld.inp(1))]
        outs = bld.inline(circ, args)
        if value_scale is not None and value_scale != 1:
            outs = [bld.mulc(value_scale, o) for o in outs]
        return bld.build(outs)

    f_scale = Fraction(1) / Fraction(N)
    grad_scale = None
    if alpha is not None:
        f_scale = f_scale * alpha
        grad_scale = alpha
    return KktInstance(
        eps=inst.eps * (alpha if alpha is not None else 1),
        domain=Box([0, 0], [1, 1]),
        f=wrap(inst.f, f_scale),
        grad_f=wrap(inst.grad_f, grad_scale),
        L=inst.L * N * (alpha if alpha is not None else 1),
    )


# ---------------------------------------------------------------------------
# decoding points back to discrete solutions

@dataclass
class Decoded:
    kind: str  # "eol" | "iter" | "none"
    value: int = 0


def decode_solution(model: GridModel, p, scale_hint=None) -> Decoded:
    """Map a point of [0, N]^2 (or of the rescaled [0, 1]^2) to a solution.

    Points in a source/sink big square decode to the End-of-Line vertex,
    points in a solution medium square decode to the Iter node.
    """
    from .grid import decode_cell

    N = model.gs.N
    x, y = Fraction(p[0]), Fraction(p[1])
    scaled = scale_hint if scale_hint is not None else (
        max(abs(x), abs(y)) <= 1 and N > 1
    )
    if scaled:
        x *= N
        y *= N
    X = min(max(int(x.__floor__()), 0), N - 1)
    Y = min(max(int(y.__floor__()), 0), N - 1)
    kind, value = decode_cell(model, X, Y)
    return Decoded(kind, value)
