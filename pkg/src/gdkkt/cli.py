"""Command-line entry point.

Exit codes: 0 success/solution, 1 usage or format error, 2 budget or
incomplete, 3 verification counterexample found.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import random
import sys
from fractions import Fraction

from .circuits import arith_to_text, circuit_from_text
from .emit import decode_solution, emit_instance, rescale
from .grid import GridModel, GridSpec
from .rational import format_rational, parse_rational
from .tfnp import (
    EolInstance,
    GdInstance,
    GcloInstance,
    IterInstance,
    KktInstance,
    brute_force_eol,
    brute_force_iter,
    eol_from_edges,
    iter_from_map,
    load_bundle,
    preprocess_eol,
    preprocess_iter,
    save_bundle,
)


def _parse_point(text: str):
    return tuple(parse_rational(t) for t in text.split(","))


def _load_model(instance_dir: str) -> GridModel:
    meta_path = os.path.join(instance_dir, "layout-meta.json")
    with open(meta_path) as fh:
        meta = json.load(fh)
    eol, _ = load_bundle(os.path.join(instance_dir, "eol"))
    it, _ = load_bundle(os.path.join(instance_dir, "iter"))
    model = GridModel(
        GridSpec(meta["n"], meta["m"]), preprocess_eol(eol), preprocess_iter(it)
    )
    return model


def cmd_gen(args) -> int:
    if args.problem == "eol":
        edges = []
        with open(args.edges) as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                u, v = line.split("->")
                edges.append((int(u), int(v)))
        top = max([max(u, v) for u, v in edges], default=2)
        n = args.n or max(1, math.ceil(math.log2(top)))
        inst = eol_from_edges(n, edges)
        save_bundle(args.out, inst)
        print(f"wrote End-of-Line instance with n={n} to {args.out}")
    else:
        mapping = {}
        with open(args.map) as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                u, cu = line.split(":")
                mapping[int(u)] = int(cu)
        top = max([max(u, cu) for u, cu in mapping.items()], default=2)
        m = args.m or max(1, math.ceil(math.log2(top)))
        inst = iter_from_map(m, mapping)
        save_bundle(args.out, inst)
        print(f"wrote Iter instance with m={m} to {args.out}")
    return 0


def cmd_build_kkt(args) -> int:
    eol, _ = load_bundle(args.eol)
    it, _ = load_bundle(args.iter)
    eolp = preprocess_eol(eol)
    itp = preprocess_iter(it)
    inst = emit_instance(eolp, itp)
    if args.rescale:
        inst = rescale(inst, alpha=parse_rational(args.alpha) if args.alpha else None)
    save_bundle(args.out, inst)
    gs = GridSpec(eol.n, it.m)
    model = GridModel(gs, eolp, itp)
    top = 1 << gs.n
    types = [
        [model.type_of(v1, v2) for v1 in range(1, top + 1)]
        for v2 in range(1, top + 1)
    ]
    with open(os.path.join(args.out, "layout-meta.json"), "w") as fh:
        json.dump(
            {
                "n": gs.n,
                "m": gs.m,
                "N": gs.N,
                "rescaled": bool(args.rescale),
                "big_square_types": types,
            },
            fh,
            indent=2,
        )
        fh.write("\n")
    save_bundle(os.path.join(args.out, "eol"), eol)
    save_bundle(os.path.join(args.out, "iter"), it)
    print(
        f"wrote KKT instance (N={gs.N}, eps={format_rational(inst.eps)}, "
        f"L={format_rational(inst.L)}) to {args.out}"
    )
    return 0


def _refuse_ill_behaved(inst, args) -> bool:
    from .circuits import is_well_behaved

    circs = []
    for attr in ("f", "grad_f", "p", "g"):
        c = getattr(inst, attr, None)
        if c is not None:
            circs.append(c)
    if getattr(args, "allow_ill_behaved", False):
        return False
    for c in circs:
        if not is_well_behaved(c):
            print(
                "error: circuit is not well-behaved; evaluation may blow up "
                "(pass --allow-ill-behaved to proceed)",
                file=sys.stderr,
            )
            return True
    return False


def cmd_eval(args) -> int:
    inst, meta = load_bundle(args.instance)
    if _refuse_ill_behaved(inst, args):
        return 1
    p = _parse_point(args.point)
    if isinstance(inst, KktInstance) or isinstance(inst, GdInstance):
        from .circuits import eval_arith

        f = eval_arith(inst.f, p)[0]
        print("f =", format_rational(f))
        if args.grad:
            g = eval_arith(inst.grad_f, p)
            print("grad =", ", ".join(format_rational(v) for v in g))
    elif isinstance(inst, GcloInstance):
        from .circuits import eval_arith

        print("p =", format_rational(eval_arith(inst.p, p)[0]))
        print("g =", ", ".join(format_rational(v) for v in eval_arith(inst.g, p)))
    else:
        print("eval expects a continuous instance bundle", file=sys.stderr)
        return 1
    return 0


def cmd_gd(args) -> int:
    from .solvers import projected_gd

    inst, _ = load_bundle(args.instance)
    if not isinstance(inst, GdInstance):
        print("gd expects a gradient-descent bundle", file=sys.stderr)
        return 1
    if _refuse_ill_behaved(inst, args):
        return 1
    box = inst.domain
    if args.random is not None:
        rng = random.Random(args.random)
        start = tuple(
            lo + (hi - lo) * Fraction(rng.randint(0, 1 << 20), 1 << 20)
            for lo, hi in zip(box.lo, box.hi)
        )
        print("start:", ", ".join(format_rational(v) for v in start))
    else:
        start = _parse_point(args.start)
    run = projected_gd(inst, start, args.max_iters, round_denom=args.round_denom)
    for p in run.trajectory_tail:
        print("  ", ", ".join(format_rational(v) for v in p))
    print(f"{run.status} after {run.iterations} iterations at "
          + ", ".join(format_rational(v) for v in run.point))
    return 0 if run.stopped else 2


def cmd_check(args) -> int:
    from .tfnp import check_gclo, check_gd, check_kkt

    inst, _ = load_bundle(args.instance)
    p = _parse_point(args.point)
    if isinstance(inst, KktInstance):
        verdict = check_kkt(inst, p, args.norm)
    elif isinstance(inst, GdInstance):
        verdict = check_gd(inst, p)
    elif isinstance(inst, GcloInstance):
        verdict = check_gclo(inst, p)
    else:
        print("check expects a continuous instance bundle", file=sys.stderr)
        return 1
    print(verdict.kind)
    return 0 if verdict else 2


def cmd_decode(args) -> int:
    model = _load_model(args.instance)
    with open(os.path.join(args.instance, "layout-meta.json")) as fh:
        meta = json.load(fh)
    p = _parse_point(args.point)
    result = decode_solution(model, p, scale_hint=meta.get("rescaled"))
    if result.kind == "eol":
        print(f"EolSolution({result.value})")
        return 0
    if result.kind == "iter":
        print(f"IterSolution({result.value})")
        return 0
    print("NotInSolutionRegion")
    return 2


def cmd_reduce(args) -> int:
    from . import reductions

    inst, _ = load_bundle(args.instance)
    key = (args.src, args.dst)
    table = {
        ("gdls", "gdfp"): reductions.gdls_to_gdfp,
        ("gdfp", "kkt"): reductions.gdfp_to_kkt,
        ("kkt", "gdls"): reductions.kkt_to_gdls,
        ("gdls", "gclo"): reductions.gdls_to_gclo,
        ("gclo", "clo"): reductions.gclo_clamp_2d,
        ("gclo", "clo-codomain"): reductions.clo_normalize_codomain,
        ("gclo", "brouwer"): reductions.gclo_to_brouwer,
    }
    if key not in table:
        print(f"unsupported reduction {args.src} -> {args.dst}", file=sys.stderr)
        return 1
    out, _back = table[key](inst)
    save_bundle(args.out, out)
    print(f"wrote reduced instance to {args.out}")
    return 0


def cmd_approx_linear(args) -> int:
    from .linapprox import approximate_circuit

    with open(args.circuit) as fh:
        circ = circuit_from_text(fh.read())
    approx = approximate_circuit(
        circ,
        parse_rational(args.L),
        parse_rational(args.eps),
        M_bound=parse_rational(args.M) if args.M else None,
    )
    with open(args.out, "w", newline="\n") as fh:
        fh.write(arith_to_text(approx.circuit))
    print(
        f"wrote linear circuit with {len(approx.circuit.gates)} gates "
        f"(N={approx.params.N}) to {args.out}"
    )
    return 0


def cmd_verify_squares(args) -> int:
    from .verifier import (
        corner_check,
        emit_smtlib,
        enumerate_archetypes,
        falsify_sample,
        read_solver_results,
        write_manifest,
    )

    model = _load_model(args.instance)
    eps = parse_rational(args.eps)
    records = enumerate_archetypes(model)
    interior = sum(1 for r in records.values() if not r.archetype.boundary)
    boundary = len(records) - interior
    print(f"{interior} interior and {boundary} boundary archetypes")
    print("domain corners clean:", corner_check(model, eps))
    code = 0
    if args.export_smt:
        for rec in records.values():
            emit_smtlib(rec.archetype, eps, args.export_smt)
        write_manifest(records, args.export_smt)
        print(f"wrote SMT-LIB2 scripts to {args.export_smt}")
        if args.results:
            verdicts = read_solver_results(args.results)
            for key, rec in records.items():
                v = verdicts.get(key)
                if v == "sat" and not rec.solution_region_only:
                    print(f"solver counterexample for {key}")
                    code = 3
    if args.falsify:
        report = {}
        for key, rec in sorted(records.items()):
            hit = falsify_sample(
                rec.archetype, eps, args.density, args.trials, args.seed
            )
            report[key] = {
                "expected": "sat-allowed" if rec.solution_region_only else "unsat",
                "hit": None
                if hit is None
                else {
                    "condition": hit["condition"],
                    "x": format_rational(hit["x"]),
                    "y": format_rational(hit["y"]),
                },
            }
            if hit is not None and not rec.solution_region_only:
                print(f"falsifier counterexample for {key}")
                code = 3
        out = args.report or os.path.join(args.instance, "falsify-report.json")
        with open(out, "w") as fh:
            json.dump(report, fh, indent=2)
            fh.write("\n")
        print(f"wrote falsifier report to {out}")
    return code


def cmd_render(args) -> int:
    from .render import render_svg

    model = _load_model(args.instance)
    window = tuple(int(t) for t in args.window.split(","))
    render_svg(model, window, args.out)
    print(f"wrote {args.out}")
    return 0


def cmd_selftest(args) -> int:
    from .bicubic import eval_direct
    from .circuits import eval_arith

    eol = preprocess_eol(eol_from_edges(1, [(1, 2)]))
    it = preprocess_iter(iter_from_map(1, {1: 2}))
    assert brute_force_eol(eol) == 2
    assert brute_force_iter(it) == 1
    inst = emit_instance(eol, it)
    model = GridModel(GridSpec(1, 1), eol, it)
    rng = random.Random(0)
    for _ in range(25):
        p = (Fraction(rng.randint(0, 64 * 4), 4), Fraction(rng.randint(0, 64 * 4), 4))
        fd, gd = eval_direct(model, p)
        assert eval_arith(inst.f, p)[0] == fd
        assert tuple(eval_arith(inst.grad_f, p)) == tuple(gd)
    unit = rescale(inst)
    p = (Fraction(1, 3), Fraction(2, 3))
    scaled = tuple(64 * v for v in p)
    assert eval_arith(unit.f, p)[0] * 64 == eval_arith(inst.f, scaled)[0]
    print("selftest ok")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gdkkt")
    sub = ap.add_subparsers(dest="cmd", required=True)

    g = sub.add_parser("gen", help="generate discrete instances")
    g.add_argument("problem", choices=["eol", "iter"])
    g.add_argument("--edges", help="edge list file with lines 'u -> v'")
    g.add_argument("--map", help="map file with lines 'u : C(u)'")
    g.add_argument("--n", type=int, default=0)
    g.add_argument("--m", type=int, default=0)
    g.add_argument("-o", "--out", required=True)
    g.set_defaults(fn=cmd_gen)

    b = sub.add_parser("build-kkt", help="compile instances to a KKT bundle")
    b.add_argument("--eol", required=True)
    b.add_argument("--iter", required=True)
    b.add_argument("--rescale", action="store_true")
    b.add_argument("--alpha", default=None)
    b.add_argument("-o", "--out", required=True)
    b.set_defaults(fn=cmd_build_kkt)

    e = sub.add_parser("eval", help="evaluate a bundle at a point")
    e.add_argument("--instance", required=True)
    e.add_argument("--point", required=True)
    e.add_argument("--grad", action="store_true")
    e.add_argument("--allow-ill-behaved", action="store_true")
    e.set_defaults(fn=cmd_eval)

    d = sub.add_parser("gd", help="projected gradient descent")
    d.add_argument("--instance", required=True)
    d.add_argument("--start")
    d.add_argument("--random", type=int, default=None)
    d.add_argument("--max-iters", type=int, required=True)
    d.add_argument("--round-denom", type=int, default=0)
    d.add_argument("--allow-ill-behaved", action="store_true")
    d.set_defaults(fn=cmd_gd)

    c = sub.add_parser("check", help="check a point against a bundle")
    c.add_argument("--instance", required=True)
    c.add_argument("--point", required=True)
    c.add_argument("--norm", choices=["linf", "l2"], default="linf")
    c.set_defaults(fn=cmd_check)

    dec = sub.add_parser("decode", help="decode a point to a discrete solution")
    dec.add_argument("--instance", required=True)
    dec.add_argument("--point", required=True)
    dec.set_defaults(fn=cmd_decode)

    r = sub.add_parser("reduce", help="instance-to-instance reductions")
    r.add_argument("--from", dest="src", required=True)
    r.add_argument("--to", dest="dst", required=True)
    r.add_argument("--instance", required=True)
    r.add_argument("-o", "--out", required=True)
    r.set_defaults(fn=cmd_reduce)

    al = sub.add_parser("approx-linear", help="linear-circuit approximation")
    al.add_argument("--circuit", required=True)
    al.add_argument("--L", required=True)
    al.add_argument("--eps", required=True)
    al.add_argument("--M", default=None)
    al.add_argument("-o", "--out", required=True)
    al.set_defaults(fn=cmd_approx_linear)

    v = sub.add_parser("verify-squares", help="archetype verification")
    v.add_argument("--instance", required=True)
    v.add_argument("--eps", default="1/100")
    v.add_argument("--export-smt", default=None)
    v.add_argument("--results", default=None)
    v.add_argument("--falsify", action="store_true")
    v.add_argument("--density", type=int, default=64)
    v.add_argument("--trials", type=int, default=32)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--report", default=None)
    v.set_defaults(fn=cmd_verify_squares)

    rn = sub.add_parser("render", help="render a grid window to SVG")
    rn.add_argument("--instance", required=True)
    rn.add_argument("--window", required=True, help="x0,y0,x1,y1")
    rn.add_argument("-o", "--out", required=True)
    rn.set_defaults(fn=cmd_render)

    st = sub.add_parser("selftest", help="run the embedded smoke checks")
    st.set_defaults(fn=cmd_selftest)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code else 0
    try:
        return args.fn(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
