"""Arithmetic, Boolean and linear circuit DAGs with exact evaluation.

Gates are tuples stored in topological order; operands refer to earlier
gate indices.  Arithmetic gates: INPUT i | CONST q | ADD a b | SUB a b |
MUL a b | MULC q a | MAX a b | MIN a b | CMP a b, where CMP outputs 1 if
the first operand is strictly greater than the second, else 0.  Boolean
gates: INPUT i | AND a b | OR a b | NOT a.

``size`` of a circuit is the bit length of its canonical text
serialization (constants included), which makes the well-behavedness
predicate deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .rational import Rational, format_rational, parse_rational

ARITH_OPS = {"INPUT", "CONST", "ADD", "SUB", "MUL", "MULC", "MAX", "MIN", "CMP"}
LINEAR_OPS = {"INPUT", "CONST", "ADD", "SUB", "MULC", "MAX", "MIN"}
BOOL_OPS = {"INPUT", "AND", "OR", "NOT"}

_BINARY = {"ADD", "SUB", "MUL", "MAX", "MIN", "CMP"}


class MalformedCircuit(ValueError):
    pass


@dataclass
class ArithCircuit:
    num_inputs: int
    gates: list = field(default_factory=list)
    outputs: list = field(default_factory=list)

    def validate(self) -> None:
        for idx, g in enumerate(self.gates):
            op = g[0]
            if op == "INPUT":
                if not 0 <= g[1] < self.num_inputs:
                    raise MalformedCircuit(f"gate {idx}: input index out of range")
            elif op == "CONST":
                pass
            elif op == "MULC":
                if not 0 <= g[2] < idx:
                    raise MalformedCircuit(f"gate {idx}: bad operand")
            elif op in _BINARY:
                if not (0 <= g[1] < idx and 0 <= g[2] < idx):
                    raise MalformedCircuit(f"gate {idx}: bad operand")
            else:
                raise MalformedCircuit(f"gate {idx}: unknown op {op!r}")
        if not self.outputs:
            raise MalformedCircuit("circuit has no outputs")
        for o in self.outputs:
            if not 0 <= o < len(self.gates):
                raise MalformedCircuit("output refers to missing gate")

    @property
    def num_outputs(self) -> int:
        return len(self.outputs)

    def is_linear(self) -> bool:
        return all(g[0] in LINEAR_OPS for g in self.gates)


# LinearCircuit is an ArithCircuit whose gates stay inside LINEAR_OPS.
LinearCircuit = ArithCircuit


@dataclass
class BoolCircuit:
    num_inputs: int
    gates: list = field(default_factory=list)
    outputs: list = field(default_factory=list)

    def validate(self) -> None:
        for idx, g in enumerate(self.gates):
            op = g[0]
            if op == "INPUT":
                if not 0 <= g[1] < self.num_inputs:
                    raise MalformedCircuit(f"gate {idx}: input index out of range")
            elif op == "NOT":
                if not 0 <= g[1] < idx:
                    raise MalformedCircuit(f"gate {idx}: bad operand")
            elif op in ("AND", "OR"):
                if not (0 <= g[1] < idx and 0 <= g[2] < idx):
                    raise MalformedCircuit(f"gate {idx}: bad operand")
            else:
                raise MalformedCircuit(f"gate {idx}: unknown op {op!r}")
        if not self.outputs:
            raise MalformedCircuit("circuit has no outputs")
        for o in self.outputs:
            if not 0 <= o < len(self.gates):
                raise MalformedCircuit("output refers to missing gate")

    @property
    def num_outputs(self) -> int:
        return len(self.outputs)


def eval_arith(c: ArithCircuit, x: Sequence) -> tuple:
    """Exact gate-by-gate evaluation; returns the output tuple."""
    vals = eval_arith_all(c, x)
    return tuple(vals[o] for o in c.outputs)


def eval_arith_all(c: ArithCircuit, x: Sequence) -> list:
    if len(x) != c.num_inputs:
        raise MalformedCircuit(
            f"expected {c.num_inputs} inputs, got {len(x)}"
        )
    xs = [Fraction(v) for v in x]
    vals: list = []
    app = vals.append
    for g in c.gates:
        op = g[0]
        if op == "ADD":
            app(vals[g[1]] + vals[g[2]])
        elif op == "SUB":
            app(vals[g[1]] - vals[g[2]])
        elif op == "MULC":
            app(g[1] * vals[g[2]])
        elif op == "MUL":
            app(vals[g[1]] * vals[g[2]])
        elif op == "MAX":
            a, b = vals[g[1]], vals[g[2]]
            app(a if a >= b else b)
        elif op == "MIN":
            a, b = vals[g[1]], vals[g[2]]
            app(a if a <= b else b)
        elif op == "CMP":
            app(Fraction(1) if vals[g[1]] > vals[g[2]] else Fraction(0))
        elif op == "INPUT":
            app(xs[g[1]])
        elif op == "CONST":
            app(g[1])
        else:  # pragma: no cover - validate() rejects this
            raise MalformedCircuit(f"unknown op {op!r}")
    return vals


def eval_bool(c: BoolCircuit, bits: Sequence[int]) -> tuple:
    if len(bits) != c.num_inputs:
        raise MalformedCircuit(
            f"expected {c.num_inputs} input bits, got {len(bits)}"
        )
    vals: list = []
    app = vals.append
    for g in c.gates:
        op = g[0]
        if op == "AND":
            app(vals[g[1]] & vals[g[2]])
        elif op == "OR":
            app(vals[g[1]] | vals[g[2]])
        elif op == "NOT":
            app(1 - vals[g[1]])
        elif op == "INPUT":
            app(1 if bits[g[1]] else 0)
        else:  # pragma: no cover
            raise MalformedCircuit(f"unknown op {op!r}")
    return tuple(vals[o] for o in c.outputs)


# ---------------------------------------------------------------------------
# canonical text format and size accounting

def arith_to_text(c: ArithCircuit) -> str:
    lines = [f"arith {c.num_inputs} {len(c.gates)} {len(c.outputs)}"]
    for i, g in enumerate(c.gates):
        op = g[0]
        if op == "INPUT":
            lines.append(f"g{i} = INPUT {g[1]}")
        elif op == "CONST":
            lines.append(f"g{i} = CONST {format_rational(g[1])}")
        elif op == "MULC":
            lines.append(f"g{i} = MULC {format_rational(g[1])} g{g[2]}")
        else:
            lines.append(f"g{i} = {op} g{g[1]} g{g[2]}")
    for o in c.outputs:
        lines.append(f"out g{o}")
    return "\n".join(lines) + "\n"


def bool_to_text(c: BoolCircuit) -> str:
    lines = [f"bool {c.num_inputs} {len(c.gates)} {len(c.outputs)}"]
    for i, g in enumerate(c.gates):
        op = g[0]
        if op == "INPUT":
            lines.append(f"g{i} = INPUT {g[1]}")
        elif op == "NOT":
            lines.append(f"g{i} = NOT g{g[1]}")
        else:
            lines.append(f"g{i} = {op} g{g[1]} g{g[2]}")
    for o in c.outputs:
        lines.append(f"out g{o}")
    return "\n".join(lines) + "\n"


def circuit_from_text(text: str):
    """Parse either circuit flavour from the canonical text format."""
    lines = [ln for ln in text.strip().split("\n") if ln.strip()]
    header = lines[0].split()
    kind, num_inputs = header[0], int(header[1])
    gates: list = []
    outputs: list = []

    def ref(tok: str) -> int:
        if not tok.startswith("g"):
            raise MalformedCircuit(f"bad gate reference {tok!r}")
        return int(tok[1:])

    for ln in lines[1:]:
        toks = ln.split()
        if toks[0] == "out":
            outputs.append(ref(toks[1]))
            continue
        if toks[1] != "=" or ref(toks[0]) != len(gates):
            raise MalformedCircuit(f"bad gate line {ln!r}")
        op = toks[2]
        if op == "INPUT":
            gates.append(("INPUT", int(toks[3])))
        elif op == "CONST":
            gates.append(("CONST", parse_rational(toks[3])))
        elif op == "MULC":
            gates.append(("MULC", parse_rational(toks[3]), ref(toks[4])))
        elif op == "NOT":
            gates.append(("NOT", ref(toks[3])))
        else:
            gates.append((op, ref(toks[3]), ref(toks[4])))
    if kind == "arith":
        c = ArithCircuit(num_inputs, gates, outputs)
    elif kind == "bool":
        c = BoolCircuit(num_inputs, gates, outputs)
    else:
        raise MalformedCircuit(f"unknown circuit kind {kind!r}")
    c.validate()
    return c


def circuit_size(c) -> int:
    """Bits needed to describe the circuit: 8 * length of the canonical text."""
    text = arith_to_text(c) if isinstance(c, ArithCircuit) else bool_to_text(c)
    return 8 * len(text.encode("utf-8"))


def rational_size(q) -> int:
    """Bits of the irreducible fraction: numerator plus denominator bits."""
    q = Fraction(q)
    return max(1, abs(q.numerator).bit_length()) + q.denominator.bit_length()


def vec_size(x: Iterable) -> int:
    return sum(rational_size(q) for q in x)


# ---------------------------------------------------------------------------
# well-behavedness

def _true_mul_depths(c: ArithCircuit) -> list:
    """Longest chain of true multiplications ending at each gate.

    A true multiplication has two non-constant operands; a gate counts as
    constant when no INPUT gate reaches it.
    """
    is_const = []
    depth = []
    for g in c.gates:
        op = g[0]
        if op == "INPUT":
            is_const.append(False)
            depth.append(0)
        elif op == "CONST":
            is_const.append(True)
            depth.append(0)
        elif op == "MULC":
            is_const.append(is_const[g[2]])
            depth.append(depth[g[2]])
        else:
            a, b = g[1], g[2]
            const = is_const[a] and is_const[b]
            d = max(depth[a], depth[b])
            if op == "MUL" and not is_const[a] and not is_const[b]:
                d += 1
            is_const.append(const)
            depth.append(d)
    return depth


def max_true_mul_depth(c: ArithCircuit) -> int:
    depth = _true_mul_depths(c)
    return max(depth[o] for o in c.outputs)


def is_well_behaved(c: ArithCircuit) -> bool:
    """At most log2(size) chained true multiplications on any output path."""
    return max_true_mul_depth(c) <= math.floor(math.log2(circuit_size(c)))


def audit_value_sizes(c: ArithCircuit, x: Sequence) -> int:
    """Max bit size of any intermediate value while evaluating ``c`` at ``x``."""
    vals = eval_arith_all(c, x)
    return max(rational_size(v) for v in vals)


def value_size_bound(c: ArithCircuit, x: Sequence) -> int:
    """The 6 * size(c)^3 * size(x) bound for well-behaved circuits."""
    return 6 * circuit_size(c) ** 3 * vec_size(x)


def linear_lipschitz_bound(c: LinearCircuit) -> Rational:
    """Per-gate recursive l_inf Lipschitz bound for a linear circuit.

    ADD/SUB add the operand bounds, MAX/MIN take the max, MULC scales by
    |constant|.  Always at most 2**(size**2).
    """
    if not c.is_linear():
        raise MalformedCircuit("circuit is not linear")
    bound: list = []
    for g in c.gates:
        op = g[0]
        if op == "INPUT":
            bound.append(Fraction(1))
        elif op == "CONST":
            bound.append(Fraction(0))
        elif op in ("ADD", "SUB"):
            bound.append(bound[g[1]] + bound[g[2]])
        elif op in ("MAX", "MIN"):
            bound.append(max(bound[g[1]], bound[g[2]]))
        elif op == "MULC":
            bound.append(abs(g[1]) * bound[g[2]])
    return max(bound[o] for o in c.outputs)


def prune(c: ArithCircuit, outputs: Sequence[int]) -> ArithCircuit:
    """Restrict a circuit to the gates reachable from ``outputs``."""
    needed = set()
    stack = list(outputs)
    while stack:
        g = stack.pop()
        if g in needed:
            continue
        needed.add(g)
        gate = c.gates[g]
        op = gate[0]
        if op == "MULC":
            stack.append(gate[2])
        elif op in _BINARY:
            stack.append(gate[1])
            stack.append(gate[2])
    order = sorted(needed)
    remap = {old: new for new, old in enumerate(order)}
    gates = []
    for old in order:
        gate = c.gates[old]
        op = gate[0]
        if op in ("INPUT", "CONST"):
            gates.append(gate)
        elif op == "MULC":
            gates.append(("MULC", gate[1], remap[gate[2]]))
        else:
            gates.append((op, remap[gate[1]], remap[gate[2]]))
    out = ArithCircuit(c.num_inputs, gates, [remap[o] for o in outputs])
    out.validate()
    return out


# ---------------------------------------------------------------------------
# builders

class ArithBuilder:
    """Hash-consing builder for arithmetic circuits."""

    def __init__(self, num_inputs: int):
        self.num_inputs = num_inputs
        self.gates: list = []
        self._memo: dict = {}

    def _push(self, gate: tuple) -> int:
        key = gate
        idx = self._memo.get(key)
        if idx is None:
            idx = len(self.gates)
            self.gates.append(gate)
            self._memo[key] = idx
        return idx

    def inp(self, i: int) -> int:
        return self._push(("INPUT", i))

    def const(self, q) -> int:
        return self._push(("CONST", Fraction(q)))

    def add(self, a: int, b: int) -> int:
        return self._push(("ADD", a, b))

    def sub(self, a: int, b: int) -> int:
        return self._push(("SUB", a, b))

    def mul(self, a: int, b: int) -> int:
        return self._push(("MUL", a, b))

    def mulc(self, q, a: int) -> int:
        q = Fraction(q)
        if q == 1:
            return a
        return self._push(("MULC", q, a))

    def max_(self, a: int, b: int) -> int:
        return self._push(("MAX", a, b))

    def min_(self, a: int, b: int) -> int:
        return self._push(("MIN", a, b))

    def cmp(self, a: int, b: int) -> int:
        return self._push(("CMP", a, b))

    def inline(self, sub: ArithCircuit, args: Sequence[int]) -> list:
        """Splice another arithmetic circuit in, rewiring inputs to ``args``."""
        if len(args) != sub.num_inputs:
            raise MalformedCircuit("inline arity mismatch")
        mapping: list = []
        for g in sub.gates:
            op = g[0]
            if op == "INPUT":
                mapping.append(args[g[1]])
            elif op == "CONST":
                mapping.append(self.const(g[1]))
            elif op == "MULC":
                mapping.append(self.mulc(g[1], mapping[g[2]]))
            else:
                mapping.append(self._push((op, mapping[g[1]], mapping[g[2]])))
        return [mapping[o] for o in sub.outputs]

    def inline_bool(self, sub: "BoolCircuit", args: Sequence[int]) -> list:
        """Simulate a Boolean circuit on 0/1-valued nodes with linear gates."""
        if len(args) != sub.num_inputs:
            raise MalformedCircuit("inline arity mismatch")
        one = self.const(1)
        zero = self.const(0)
        mapping: list = []
        for g in sub.gates:
            op = g[0]
            if op == "INPUT":
                mapping.append(args[g[1]])
            elif op == "NOT":
                mapping.append(self.sub(one, mapping[g[1]]))
            elif op == "OR":
                mapping.append(
                    self.min_(one, self.add(mapping[g[1]], mapping[g[2]]))
                )
            else:  # AND
                s = self.add(mapping[g[1]], mapping[g[2]])
                mapping.append(self.max_(zero, self.sub(s, one)))
        return [mapping[o] for o in sub.outputs]

    def build(self, outputs: Sequence[int]) -> ArithCircuit:
        c = ArithCircuit(self.num_inputs, list(self.gates), list(outputs))
        c.validate()
        return c


class BoolBuilder:
    """Hash-consing builder for Boolean circuits with constant folding.

    Constants are encoded structurally (FALSE = AND(x0, NOT x0) would waste
    gates, so we track them virtually and materialize only if they reach an
    output).
    """

    TRUE = -1
    FALSE = -2

    def __init__(self, num_inputs: int):
        self.num_inputs = num_inputs
        self.gates: list = []
        self._memo: dict = {}

    def _push(self, gate: tuple) -> int:
        idx = self._memo.get(gate)
        if idx is None:
            idx = len(self.gates)
            self.gates.append(gate)
            self._memo[gate] = idx
        return idx

    def inp(self, i: int) -> int:
        return self._push(("INPUT", i))

    def not_(self, a: int) -> int:
        if a == self.TRUE:
            return self.FALSE
        if a == self.FALSE:
            return self.TRUE
        g = self.gates[a]
        if g[0] == "NOT":
            return g[1]
        return self._push(("NOT", a))

    def and_(self, a: int, b: int) -> int:
        if a == self.FALSE or b == self.FALSE:
            return self.FALSE
        if a == self.TRUE:
            return b
        if b == self.TRUE:
            return a
        if a == b:
            return a
        if a > b:
            a, b = b, a
        return self._push(("AND", a, b))

    def or_(self, a: int, b: int) -> int:
        if a == self.TRUE or b == self.TRUE:
            return self.TRUE
        if a == self.FALSE:
            return b
        if b == self.FALSE:
            return a
        if a == b:
            return a
        if a > b:
            a, b = b, a
        return self._push(("OR", a, b))

    def xor_(self, a: int, b: int) -> int:
        return self.or_(self.and_(a, self.not_(b)), self.and_(self.not_(a), b))

    def mux(self, sel: int, if_true: int, if_false: int) -> int:
        if if_true == if_false:
            return if_true
        return self.or_(self.and_(sel, if_true), self.and_(self.not_(sel), if_false))

    def and_all(self, bits: Sequence[int]) -> int:
        acc = self.TRUE
        for b in bits:
            acc = self.and_(acc, b)
        return acc

    def or_all(self, bits: Sequence[int]) -> int:
        acc = self.FALSE
        for b in bits:
            acc = self.or_(acc, b)
        return acc

    def materialize(self, node: int) -> int:
        """Turn virtual TRUE/FALSE into real gates (for outputs only)."""
        if node == self.TRUE:
            x = self.inp(0) if self.num_inputs else self._push(("INPUT", 0))
            return self.or_(x, self.not_(x))
        if node == self.FALSE:
            x = self.inp(0)
            return self.and_(x, self.not_(x))
        return node

    def inline(self, sub: BoolCircuit, args: Sequence[int]) -> list:
        """Splice another circuit in, rewiring its inputs to ``args``."""
        if len(args) != sub.num_inputs:
            raise MalformedCircuit("inline arity mismatch")
        mapping: list = []
        for g in sub.gates:
            op = g[0]
            if op == "INPUT":
                mapping.append(args[g[1]])
            elif op == "NOT":
                mapping.append(self.not_(mapping[g[1]]))
            elif op == "AND":
                mapping.append(self.and_(mapping[g[1]], mapping[g[2]]))
            else:
                mapping.append(self.or_(mapping[g[1]], mapping[g[2]]))
        return [mapping[o] for o in sub.outputs]

    def build(self, outputs: Sequence[int]) -> BoolCircuit:
        outs = [self.materialize(o) for o in outputs]
        c = BoolCircuit(self.num_inputs, list(self.gates), outs)
        c.validate()
        return c


# ---------------------------------------------------------------------------
# boolean <-> arithmetic bridges

class TableSizeMismatch(ValueError):
    pass


def table_to_bool(table: Sequence[int], in_bits: int, out_bits: int) -> BoolCircuit:
    """Multiplexer-tree circuit computing an explicit table.

    ``table[a]`` is the output word for input address ``a``; bit order is
    little-endian on both sides.
    """
    if len(table) != 1 << in_bits:
        raise TableSizeMismatch(f"table length must be 2**{in_bits}")
    for entry in table:
        if not 0 <= entry < 1 << out_bits:
            raise TableSizeMismatch("table entry out of range")
    bld = BoolBuilder(in_bits)
    addr = [bld.inp(i) for i in range(in_bits)]
    outs = []
    for bit in range(out_bits):
        leaves = [(entry >> bit) & 1 for entry in table]

        def reduce(lo: int, hi: int, level: int) -> int:
            if hi - lo == 1:
                return bld.TRUE if leaves[lo] else bld.FALSE
            mid = (lo + hi) // 2
            lo_node = reduce(lo, mid, level - 1)
            hi_node = reduce(mid, hi, level - 1)
            return bld.mux(addr[level - 1], hi_node, lo_node)

        outs.append(reduce(0, len(leaves), in_bits) if in_bits else
                    (bld.TRUE if leaves[0] else bld.FALSE))
    return bld.build(outs)


def bool_to_arith(b: BoolCircuit) -> ArithCircuit:
    """Simulate a Boolean circuit with linear arithmetic gates.

    NOT b = 1 - b;  OR = min(1, a + b);  AND = max(0, a + b - 1).  On
    0/1-valued inputs the simulation is exact.
    """
    bld = ArithBuilder(b.num_inputs)
    one = bld.const(1)
    zero = bld.const(0)
    mapping: list = []
    for g in b.gates:
        op = g[0]
        if op == "INPUT":
            mapping.append(bld.inp(g[1]))
        elif op == "NOT":
            mapping.append(bld.sub(one, mapping[g[1]]))
        elif op == "OR":
            mapping.append(bld.min_(one, bld.add(mapping[g[1]], mapping[g[2]])))
        else:  # AND
            s = bld.add(mapping[g[1]], mapping[g[2]])
            mapping.append(bld.max_(zero, bld.sub(s, one)))
    return bld.build([mapping[o] for o in b.outputs])
