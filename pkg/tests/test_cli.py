"""End-to-end tests of the command-line interface (in-process)."""

import json
import os
from fractions import Fraction

import pytest

from adiagap import cli
from adiagap.graphs import load_graph, save_graph
from adiagap.reductions import (
    appendix_ec_instance,
    ec3_to_1in3sat,
    ec_to_mis,
    load_cnf,
    load_ising,
    mis_to_ising,
    save_cnf,
    save_ec,
)
from adiagap.spectra import EigensolverError


@pytest.fixture(scope="module")
def ec_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("instances") / "cover.json"
    save_ec(appendix_ec_instance(), path)
    return path


@pytest.fixture(scope="module")
def graph_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("instances") / "graph.json"
    save_graph(ec_to_mis(appendix_ec_instance()), path)
    return path


@pytest.fixture(scope="module")
def cnf_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("instances") / "clauses.cnf"
    save_cnf(ec3_to_1in3sat(appendix_ec_instance()), path)
    return path


def _config(out):
    with open(out / "config.json") as f:
        return json.load(f)


def test_version(capsys):
    with pytest.raises(SystemExit) as info:
        cli.main(["--version"])
    assert info.value.code == 0
    assert capsys.readouterr().out.startswith("adiagap ")


def test_ck_gen(tmp_path, capsys):
    out = tmp_path / "ck"
    rc = cli.main(
        ["ck-gen", "-r", "2", "-g", "2", "--wb", "9/5", "-o", str(out)]
    )
    assert rc == 0
    graph = load_graph(out / "graph.json")
    assert graph.n == 8
    assert graph.weights[0] == 1 and graph.weights[-1] == Fraction(9, 5)
    cfg = _config(out)
    assert cfg["tool"] == "adiagap"
    assert cfg["command"] == "ck-gen"
    assert cfg["params"]["w_B"] == "9/5"
    assert cfg["inputs"] == {}
    assert "8 vertices" in capsys.readouterr().out


def test_reduce_ec(tmp_path, ec_file):
    out = tmp_path / "red"
    rc = cli.main(["reduce", "ec", str(ec_file), "-o", str(out)])
    assert rc == 0
    graph = load_graph(out / "graph.json")
    model = load_ising(out / "ising.json")
    assert model == mis_to_ising(graph, Fraction(4))
    cfg = _config(out)
    digest = cfg["inputs"][str(ec_file)]
    assert len(digest) == 64 and int(digest, 16) >= 0


def test_reduce_scaled(tmp_path, ec_file):
    out = tmp_path / "red2"
    assert cli.main(["reduce", "ec", str(ec_file), "-k", "2", "-o", str(out)]) == 0
    model = load_ising(out / "ising.json")
    graph = ec_to_mis(appendix_ec_instance())
    plain = mis_to_ising(graph, Fraction(4))
    assert model.J == plain.J
    assert model.h[0] - plain.h[0] == graph.weights[0]  # h gains c_i(1 - 1/k)


def test_reduce_ec3sat(tmp_path, ec_file):
    out = tmp_path / "sat"
    assert cli.main(["reduce", "ec3sat", str(ec_file), "-o", str(out)]) == 0
    cnf = load_cnf(out / "clauses.cnf")
    assert len(cnf.clauses) == 5
    assert all(lit > 0 for clause in cnf.clauses for lit in clause)


def test_reduce_3sat(tmp_path, cnf_file):
    out = tmp_path / "mis3"
    assert cli.main(["reduce", "3sat", str(cnf_file), "-o", str(out)]) == 0
    graph = load_graph(out / "graph.json")
    assert graph.n == 15  # one vertex per literal occurrence
    assert all(w == 1 for w in graph.weights)


def test_sweep_gap_only(tmp_path, ec_file, capsys):
    out = tmp_path / "sweep"
    rc = cli.main(
        [
            "sweep",
            str(ec_file),
            "--grid",
            "41",
            "--q",
            "2",
            "--gap-only",
            "-o",
            str(out),
        ]
    )
    assert rc == 0
    lines = (out / "sweep.csv").read_text().splitlines()
    assert lines[0] == "s,E0,E1,gap,mat,mat_alt,norm"
    assert len(lines) == 42
    assert lines[1].split(",")[-1] == "nan"  # no norm data on the lean path
    with open(out / "art.json") as f:
        art = json.load(f)
    assert list(art) == ["k", "s_star", "g_min", "mat_at_s_star"]
    assert 0 < art["s_star"] < 1
    assert art["g_min"] > 0
    assert "s*=" in capsys.readouterr().out


def test_sweep_full_json(tmp_path, graph_file):
    out = tmp_path / "sweepj"
    rc = cli.main(
        ["sweep", str(graph_file), "--grid", "21", "--format", "json", "-o", str(out)]
    )
    assert rc == 0
    with open(out / "sweep.json") as f:
        rows = json.load(f)
    assert list(rows) == ["s", "E0", "E1", "gap", "mat", "mat_alt", "norm"]
    assert len(rows["s"]) == 21
    assert all(v is not None for v in rows["norm"])
    assert rows["E0"][0] == pytest.approx(-7.0)
    with open(out / "art.json") as f:
        art = json.load(f)
    assert art["k"] == "1"
    assert art["art1"] >= art["art2"] > 0
    assert art["g_min"] <= art["g_at_s_prime"]
    cfg = _config(out)
    assert cfg["params"]["grid"] == 21
    assert cfg["params"]["gap_only"] is False


def test_sweep_deterministic(tmp_path, ec_file):
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert (
            cli.main(["sweep", str(ec_file), "--grid", "31", "-o", str(out)]) == 0
        )
        outs.append((out / "sweep.csv").read_bytes())
    assert outs[0] == outs[1]


def test_precision_env(tmp_path, ec_file, monkeypatch):
    out = tmp_path / "p4"
    monkeypatch.setenv("ADIAGAP_PRECISION", "4")
    assert (
        cli.main(
            ["sweep", str(ec_file), "--grid", "11", "--q", "2", "--gap-only", "-o", str(out)]
        )
        == 0
    )
    for token in (out / "sweep.csv").read_text().splitlines()[1].split(","):
        digits = sum(c.isdigit() for c in token)
        assert digits <= 5  # 4 significant digits plus a possible exponent
    monkeypatch.setenv("ADIAGAP_PRECISION", "abc")
    assert cli.main(["sweep", str(ec_file), "-o", str(tmp_path / "x")]) == 2
    monkeypatch.setenv("ADIAGAP_PRECISION", "0")
    assert cli.main(["sweep", str(ec_file), "-o", str(tmp_path / "y")]) == 2


def test_desev_cmd(tmp_path, ec_file):
    out = tmp_path / "trace"
    rc = cli.main(
        ["desev", str(ec_file), "--grid", "5", "--levels", "4", "-o", str(out)]
    )
    assert rc == 0
    lines = (out / "desev.csv").read_text().splitlines()
    assert lines[0] == "s,5,4,3,2,other"
    assert len(lines) == 6
    with open(out / "metadata.json") as f:
        meta = json.load(f)
    assert meta["levels"][0] == {"label": "5", "count": 1, "representative": "157"}
    assert meta["eigenstate"] == 0
    assert _config(out)["params"]["levels"] == 4


def test_art_table(tmp_path, ec_file):
    out = tmp_path / "table"
    rc = cli.main(
        [
            "art-table",
            str(ec_file),
            "--k-list",
            "1,2",
            "--grid",
            "21",
            "-o",
            str(out),
        ]
    )
    assert rc == 0
    lines = (out / "art_table.csv").read_text().splitlines()
    assert lines[0].startswith("k,s_star,g_min,")
    assert len(lines) == 3
    assert lines[1].split(",")[0] == "1"
    assert lines[2].split(",")[0] == "2"

    outj = tmp_path / "tablej"
    rc = cli.main(
        [
            "art-table",
            str(ec_file),
            "--k-list",
            "1",
            "--grid",
            "21",
            "--format",
            "json",
            "-o",
            str(outj),
        ]
    )
    assert rc == 0
    with open(outj / "art_table.json") as f:
        rows = json.load(f)
    assert len(rows) == 1 and rows[0]["k"] == "1"


def test_verify_ec(ec_file, capsys):
    assert cli.main(["verify", str(ec_file)]) == 0
    outp = capsys.readouterr().out
    assert "FAIL" not in outp
    assert "checks passed" in outp
    assert "exact cover" in outp


def test_verify_graph(graph_file, capsys):
    assert cli.main(["verify", str(graph_file)]) == 0
    assert "FAIL" not in capsys.readouterr().out


def test_numerical_error_exit(tmp_path, ec_file, monkeypatch, capsys):
    def boom(*args, **kwargs):
        raise EigensolverError("synthetic failure", s=0.5)

    monkeypatch.setattr(cli, "gap_sweep", boom)
    rc = cli.main(["sweep", str(ec_file), "-o", str(tmp_path / "z")])
    assert rc == 3
    assert "synthetic failure" in capsys.readouterr().err


def test_usage_errors(tmp_path, ec_file, capsys):
    assert cli.main(["sweep", str(tmp_path / "missing.json"), "-o", str(tmp_path)]) == 2
    assert "not found" in capsys.readouterr().err

    assert cli.main(["sweep", str(ec_file), "--grid", "1", "-o", str(tmp_path)]) == 2

    stray = tmp_path / "odd.json"
    stray.write_text('{"foo": 1}')
    assert cli.main(["sweep", str(stray), "-o", str(tmp_path)]) == 2
    assert "neither" in capsys.readouterr().err

    assert cli.main(["sweep", str(ec_file), "--j", "1", "-o", str(tmp_path)]) == 2
    assert "exceed" in capsys.readouterr().err

    assert cli.main(["ck-gen", "-r", "1", "-g", "2", "--wb", "1", "-o", str(tmp_path)]) == 2


def test_threads_flag(tmp_path, ec_file, monkeypatch):
    monkeypatch.delenv("OMP_NUM_THREADS", raising=False)
    assert cli.main(["--threads", "0", "verify", str(ec_file)]) == 2
    out = tmp_path / "t"
    assert (
        cli.main(
            [
                "--threads",
                "2",
                "sweep",
                str(ec_file),
                "--grid",
                "11",
                "--q",
                "2",
                "--gap-only",
                "-o",
                str(out),
            ]
        )
        == 0
    )
    assert os_environ_get("OMP_NUM_THREADS") == "2"


def os_environ_get(name):
    import os

    return os.environ.get(name)
