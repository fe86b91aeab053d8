"""Benchmark: compiled extension kernels vs the pure-Python/numpy fallback.

Run with:  python3 benchmarks/bench_kernels.py [--n 3 --m 3]

Covers the three hot paths: grid classification, the exact sampled cell
scan, and the per-cell Newton sweep, plus the scaled-integer linear
circuit evaluator used by the approximation audits.
"""

import argparse
import time
from fractions import Fraction

import gdkkt._core as core
from gdkkt._core import build_tables, python_impl
from gdkkt.grid import GridModel, GridSpec
from gdkkt.tfnp import (
    eol_from_edges,
    iter_from_map,
    preprocess_eol,
    preprocess_iter,
)

EDGES = [(1, 4), (2, 8), (4, 6), (6, 2), (7, 3)]
ITER = {1: 3, 3: 6, 4: 5, 5: 7, 7: 8}


def timed(label, fn, *args, **kwargs):
    t0 = time.perf_counter()
    out = fn(*args, **kwargs)
    dt = time.perf_counter() - t0
    print(f"  {label:<26} {dt:8.2f}s")
    return out, dt


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=3)
    ap.add_argument("--m", type=int, default=3)
    args = ap.parse_args()

    if args.n == 3:
        eol = preprocess_eol(eol_from_edges(args.n, EDGES))
        it = preprocess_iter(iter_from_map(args.m, ITER))
    else:
        eol = preprocess_eol(eol_from_edges(args.n, [(1, 2)]))
        it = preprocess_iter(iter_from_map(args.m, {1: 2}))
    model = GridModel(GridSpec(args.n, args.m), eol, it)
    tables = build_tables(model)
    N = model.gs.N
    print(f"instance: n={args.n} m={args.m} N={N} "
          f"({(N + 1) ** 2} grid points, {N ** 2} cells)")

    impls = [("compiled" if core.IMPL == "cython" else core.IMPL, core)]
    py = python_impl()
    if core.IMPL != "python":
        impls.append(("python", py))

    results = {}
    for name, impl in impls:
        print(f"[{name}]")
        _, t1 = timed(
            "classify full grid",
            lambda: [
                impl.classify_window(tables, model, 0, y, N + 1, 1)
                for y in range(N + 1)
            ],
        )
        _, t2 = timed(
            "sampled cell scan", impl.scan_cells, tables, model, (1, 100)
        )
        _, t3 = timed(
            "newton cell sweep", impl.newton_cells, tables, model, (1, 100)
        )
        results[name] = (t1, t2, t3)

    # the scaled linear-circuit evaluator on an approximation circuit
    from gdkkt.circuits import ArithBuilder
    from gdkkt.linapprox import approximate_circuit, compile_linear_program, scale_points

    bld = ArithBuilder(2)
    mean = bld.build([bld.mulc(Fraction(1, 2), bld.add(bld.inp(0), bld.inp(1)))])
    approx = approximate_circuit(mean, 1, Fraction(1, 16))
    prog = compile_linear_program(approx.circuit, 40)
    pts = scale_points(
        [(Fraction(i, 128), Fraction(j, 128)) for i in range(129) for j in range(129)],
        40,
    )
    print(f"linear evaluator ({len(approx.circuit.gates)} gates, {len(pts)} points)")
    for name, impl in impls:
        print(f"[{name}]")
        timed("eval linear program", impl.eval_linear_program, prog, pts)

    if len(results) == 2:
        c = results[impls[0][0]]
        p = results["python"]
        print("speedups (python / compiled):")
        for label, i in (("classify", 0), ("scan", 1), ("newton", 2)):
            print(f"  {label:<10} {p[i] / max(c[i], 1e-9):6.1f}x")


if __name__ == "__main__":
    main()
