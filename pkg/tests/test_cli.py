import io
import json
import random
import subprocess
import sys
from fractions import Fraction as F

import pytest

from zhufusion import cli
from zhufusion import intertwine as it
from zhufusion import logtransform as lt
from zhufusion import virasoro as vir
from zhufusion.selftest import SOLVER_TUPLES, _random_block_family, _random_jordan_data, solved


def call(argv, capsys, stdin=None, monkeypatch=None):
    if stdin is not None:
        monkeypatch.setattr(sys, "stdin", io.StringIO(stdin))
    code = cli.main(argv)
    return code, json.loads(capsys.readouterr().out)


def test_decimal_strings_are_exact(capsys):
    code, out = call(["zhu", "reduce", "--c", "0.5", "--element", "omega"], capsys)
    assert code == 0 and out["poly"] == [[1, "1"]]


def test_reduce_omega(capsys):
    code, out = call(["zhu", "reduce", "--c", "1/2", "--element", "omega"], capsys)
    assert code == 0 and out["poly"] == [[1, "1"]]


def test_reduce_verma_element(capsys):
    code, out = call(["zhu", "reduce", "--module", "verma", "--c", "1", "--h", "1/3",
                      "--element", "[[[1], \"1\"]]"], capsys)
    # L(-1) v_h -> t1 - t2 - h
    assert code == 0 and out == {"poly2": [[0, 0, "-1/3"], [0, 1, "-1"], [1, 0, "1"]]}


def test_product_reports_normal_form(capsys):
    code, out = call(["zhu", "product", "--c", "3", "--a", "omega", "--b", "omega"], capsys)
    assert code == 0 and "element" in out and "normal_form" in out


@pytest.mark.parametrize("job,key,value", [
    ({"cmd": "zhu reduce", "c": "1/2", "element": "omega"}, "poly", [[1, "1"]]),
    ({"cmd": "fusion hom-dim", "dim2": 1, "dim3": 1}, "dimension", 1),
    ({"cmd": "fusion hom-dim", "dim2": 2, "dim3": 3, "h2": "1/2", "h3": "-1"}, "dimension", 6),
    ({"cmd": "intertwine solve", "c": "1", "h1": "1/2", "h2": "1/3", "h3": "1/5", "depth": 2,
      "pin_ophi_zero": True}, "dimension", 0),
])
def test_run_jobs_from_stdin(job, key, value, capsys, monkeypatch):
    code, out = call(["run"], capsys, json.dumps(job), monkeypatch)
    assert code == 0 and out[key] == value


def test_solve_reports_stabilization(capsys):
    code, out = call(["intertwine", "solve", "--c", "1", "--h1", "1/2", "--h2", "1/3",
                      "--h3", "1/5", "--depth", "2"], capsys)
    assert code == 0
    assert (out["dimension"], out["previous_dimension"], out["stabilized"]) == (1, 1, True)


@pytest.mark.parametrize("job,code,err", [
    ({"cmd": "zhu reduce", "c": "1/0", "element": "omega"}, 2, "BAD_RATIONAL"),
    ({"cmd": "zhu reduce", "c": 0.5, "element": "omega"}, 2, "BAD_RATIONAL"),
    ({"cmd": "zhu reduce", "c": "half", "element": "omega"}, 2, "BAD_RATIONAL"),
    ({"cmd": "nope"}, 2, "UNKNOWN_COMMAND"),
    ({"cmd": "intertwine solve", "c": "1", "h1": "0", "h2": "0"}, 2, "MISSING_PARAMETER"),
    ({"cmd": "intertwine solve", "c": "1", "h1": "0", "h2": "0", "h3": "0", "depth": -1}, 2, "BAD_PARAMETER"),
])
def test_input_errors(job, code, err, capsys, monkeypatch):
    got, out = call(["run"], capsys, json.dumps(job), monkeypatch)
    assert got == code and out["error"]["code"] == err


def test_bad_json_job(capsys, monkeypatch):
    got, out = call(["run"], capsys, "{not json", monkeypatch)
    assert got == 2 and out["error"]["code"] == "BAD_JSON"


def test_output_is_deterministic(tmp_path):
    job = tmp_path / "job.json"
    job.write_text(json.dumps({"cmd": "fusion hom-dim", "dim2": 2, "dim3": 2}))
    runs = [subprocess.run([sys.executable, "-m", "zhufusion.cli", "run", "--job", str(job)],
                           capture_output=True, check=True).stdout for _ in range(2)]
    assert runs[0] == runs[1] and runs[0].endswith(b"\n")


def test_out_file(tmp_path, capsys):
    target = tmp_path / "report.json"
    assert cli.main(["--out", str(target), "fusion", "hom-dim", "--dim2", "1", "--dim3", "2"]) == 0
    assert capsys.readouterr().out == ""
    assert json.loads(target.read_text())["dimension"] == 2


def test_check_solver_family(tmp_path, capsys):
    sol, _ = solved(SOLVER_TUPLES[0], 2)
    path = tmp_path / "phi.json"
    path.write_text(json.dumps(sol.basis[0].to_json()))
    code, out = call(["intertwine", "check", "--family", "@" + str(path)], capsys)
    assert code == 0 and out["failed"] == 0 and out["instances"] > 0


def test_check_perturbed_family(capsys):
    sol, _ = solved(SOLVER_TUPLES[0], 2)
    phi = sol.basis[0]
    bumped = dict(phi.entries)
    bumped[((1,), (1,), ())] = bumped.get(((1,), (1,), ()), 0) + 1
    bad = it.TruncatedModeFamily(phi.kind, phi.depth, bumped)
    code, out = call(["intertwine", "check", "--family", json.dumps(bad.to_json())], capsys)
    assert code == 3 and out["error"]["code"] == "INVARIANT_FAILED" and out["report"]["failed"] > 0


def test_check_non_interior_instance(capsys):
    sol, _ = solved(SOLVER_TUPLES[0], 2)
    inst = it.Instance((2,), (1, 1), (), -5, 0, 0)
    code, out = call(["intertwine", "check", "--family", json.dumps(sol.basis[0].to_json()),
                      "--instances", json.dumps([inst.to_json()])], capsys)
    assert code == 4 and out["error"]["code"] == "NOT_INTERIOR"


def test_log_roundtrip(capsys):
    rng = random.Random(8)
    dims = [(1, 2), (2, 1), (1, 2)]
    gs = [_random_jordan_data(rng, F(k, 3), d) for k, d in zip((1, -2, 4), dims)]
    fam = _random_block_family(rng, *dims)
    spec = {"modules": [g.to_json() for g in gs], "family": fam.to_json()}
    code, out = call(["log", "roundtrip", "--spec", json.dumps(spec)], capsys)
    assert code == 0
    assert out["checks"] == {"roundtrip": "pass", "log_degree_bound": "pass", "x_ddx": "pass"}
    assert out["log_degree"] == lt.from_z_graded(fam, *gs).log_degree


def test_log_roundtrip_rejects_two_modules(capsys):
    g = _random_jordan_data(random.Random(1), F(0), (1,))
    spec = {"modules": [g.to_json()] * 2, "family": lt.BlockFamily((1,), (1,), (1,)).to_json()}
    code, out = call(["log", "roundtrip", "--spec", json.dumps(spec)], capsys)
    assert code == 2 and out["error"]["code"] == "BAD_SPEC"


def test_element_json_round_trip():
    M = vir.verma(F(1, 2), F(1, 16))
    u = vir.ModuleElement(M, {(3,): F(2, 3), (2, 1): F(-1), (): F(5)})
    assert cli.parse_element(u.to_json(), M) == u
    assert cli.parse_element(json.dumps(u.to_json()), M) == u
    assert cli.parse_element([[[3], "2/3"], [[2, 1], -1], [[], 5]], M) == u
