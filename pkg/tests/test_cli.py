import json
import os

import pytest

from gdkkt.cli import main


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    edges = d / "edges.txt"
    edges.write_text("1 -> 2\n")
    cmap = d / "iter.txt"
    cmap.write_text("1 : 2\n")
    assert main(["gen", "eol", "--edges", str(edges), "-o", str(d / "eol")]) == 0
    assert main(["gen", "iter", "--map", str(cmap), "-o", str(d / "iter")]) == 0
    assert (
        main(
            [
                "build-kkt",
                "--eol",
                str(d / "eol"),
                "--iter",
                str(d / "iter"),
                "-o",
                str(d / "kkt"),
            ]
        )
        == 0
    )
    return d


def test_gen_bundles(workdir):
    meta = json.loads((workdir / "eol" / "meta.json").read_text())
    assert meta == {"kind": "eol", "n": 1}
    assert (workdir / "eol" / "S.bc").exists()


def test_build_kkt_bundle(workdir):
    meta = json.loads((workdir / "kkt" / "meta.json").read_text())
    assert meta["kind"] == "kkt"
    assert meta["eps"] == "1/100"
    layout = json.loads((workdir / "kkt" / "layout-meta.json").read_text())
    assert layout["N"] == 64
    assert layout["big_square_types"][0][0] == "S"


def test_eval_and_check(workdir, capsys):
    assert main(["eval", "--instance", str(workdir / "kkt"), "--point", "10,10", "--grad"]) == 0
    out = capsys.readouterr().out
    assert "f = 20" in out
    assert main(["check", "--instance", str(workdir / "kkt"), "--point", "10,10"]) == 2
    capsys.readouterr()


def test_decode(workdir, capsys):
    # the sink vertex 2 occupies B(2,2) = [32, 64]^2
    assert main(["decode", "--instance", str(workdir / "kkt"), "--point", "48,48"]) == 0
    assert "EolSolution(2)" in capsys.readouterr().out
    assert main(["decode", "--instance", str(workdir / "kkt"), "--point", "10,40"]) == 2
    capsys.readouterr()


def test_reduce_chain(workdir, capsys):
    d = workdir
    assert (
        main(
            ["reduce", "--from", "kkt", "--to", "gdls",
             "--instance", str(d / "kkt"), "-o", str(d / "gdls")]
        )
        == 0
    )
    assert (
        main(
            ["reduce", "--from", "gdls", "--to", "gdfp",
             "--instance", str(d / "gdls"), "-o", str(d / "gdfp")]
        )
        == 0
    )
    meta = json.loads((d / "gdfp" / "meta.json").read_text())
    assert meta["mode"] == "fixpoint"
    capsys.readouterr()


def test_gd_budget_exit(workdir, capsys):
    code = main(
        ["gd", "--instance", str(workdir / "gdfp"), "--random", "7",
         "--max-iters", "5"]
    )
    assert code in (0, 2)
    capsys.readouterr()


def test_approx_linear(workdir, tmp_path, capsys):
    circ = tmp_path / "f.ac"
    circ.write_text(
        "arith 2 4 1\ng0 = INPUT 0\ng1 = INPUT 1\ng2 = ADD g0 g1\n"
        "g3 = MULC 1/2 g2\nout g3\n"
    )
    out = tmp_path / "F.lc"
    assert (
        main(
            ["approx-linear", "--circuit", str(circ), "--L", "1",
             "--eps", "1/4", "-o", str(out)]
        )
        == 0
    )
    text = out.read_text()
    assert text.startswith("arith")
    assert " MUL " not in text and " CMP " not in text
    capsys.readouterr()


def test_verify_squares(workdir, tmp_path, capsys):
    smt = tmp_path / "smt"
    code = main(
        ["verify-squares", "--instance", str(workdir / "kkt"),
         "--export-smt", str(smt), "--falsify",
         "--density", "16", "--trials", "6",
         "--report", str(tmp_path / "report.json")]
    )
    assert code == 0  # no counterexamples outside solution regions
    assert (tmp_path / "report.json").exists()
    manifest = json.loads((smt / "manifest.json").read_text())
    assert manifest["interior_archetypes"] > 0
    assert any(name.endswith(".smt2") for name in os.listdir(smt))
    capsys.readouterr()


def test_render(workdir, tmp_path, capsys):
    out = tmp_path / "grid.svg"
    assert (
        main(
            ["render", "--instance", str(workdir / "kkt"),
             "--window", "24,24,40,40", "-o", str(out)]
        )
        == 0
    )
    assert out.read_text().startswith("<svg")
    capsys.readouterr()


def test_selftest(capsys):
    assert main(["selftest"]) == 0
    capsys.readouterr()


def test_usage_error(capsys):
    assert main(["gen"]) == 1
    capsys.readouterr()
