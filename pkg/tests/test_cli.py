import json

import pytest
from click.testing import CliRunner

from cli import cli
from descent import Cocycle, default_pair, non_integral_vanishes, twist
from laurent import AlgebraDesc, LaurentElem, LaurentMatrix
from rings import RingParams


@pytest.fixture
def runner():
    return CliRunner()


def run_compute(runner, tmp_path, sub, in_path, *extra):
    out = tmp_path / f"{sub}.json"
    result = runner.invoke(cli, ["compute", sub, "--in", str(in_path), "--out", str(out), *extra])
    assert result.exit_code == 0, result.output
    return json.loads(out.read_text())


def run_descent(runner, tmp_path, in_path, *extra):
    out = tmp_path / "descended.json"
    result = runner.invoke(cli, ["descent", "run", "--in", str(in_path), "--out", str(out), *extra])
    assert result.exit_code == 0, result.output
    return json.loads(out.read_text())


class TestVerify:
    def test_small_run(self, runner, tmp_path):
        report = tmp_path / "report.json"
        result = runner.invoke(cli, ["verify", "rings", "--trials", "2", "--N", "3", "--json-out", str(report)])
        assert result.exit_code == 0, result.output
        assert "rings: 2 trials, 0 failures" in result.output
        data = json.loads(report.read_text())
        assert data["ok"] is True
        assert data["params"]["N"] == 3

    def test_composite_prime(self, runner):
        result = runner.invoke(cli, ["verify", "qconn", "--p", "4"])
        assert result.exit_code == 2

    def test_zero_trials(self, runner):
        result = runner.invoke(cli, ["verify", "rings", "--trials", "0"])
        assert result.exit_code == 2

    def test_unknown_suite(self, runner):
        result = runner.invoke(cli, ["verify", "topology"])
        assert result.exit_code == 2


class TestCompute:
    def test_leta(self, runner, tmp_path, fixture_path):
        out = run_compute(runner, tmp_path, "leta", fixture_path("complex_multiplication_by_two.json"))
        assert out["bockstein"]["agrees"] is True
        assert out["cohomology"]["degrees"][2] == {"free": 1, "torsion": []}

    def test_cohomology(self, runner, tmp_path, fixture_path):
        with open(fixture_path("complex_multiplication_by_two.json")) as fh:
            inner = json.load(fh)["complex"]
        src = tmp_path / "complex.json"
        src.write_text(json.dumps(inner))
        out = run_compute(runner, tmp_path, "cohomology", src)
        assert out["degrees"][1] == {"free": 0, "torsion": [2]}

    def test_koszul(self, runner, tmp_path, fixture_path):
        out = run_compute(runner, tmp_path, "koszul", fixture_path("koszul_scalar.json"))
        assert out["complex"]["ranks"] == [2, 4, 2]
        assert [g["torsion"] for g in out["cohomology"]["degrees"]] == [[], [2, 2], [2, 2]]

    def test_derham(self, runner, tmp_path, fixture_path):
        out = run_compute(runner, tmp_path, "derham", fixture_path("trivial_qconn_d2.json"), "--window", "1")
        assert out["module_ranks"] == [1, 2, 1]
        assert out["window"] == 1

    def test_descend_identity(self, runner, tmp_path, fixture_path):
        out = run_compute(runner, tmp_path, "descend", fixture_path("cocycle_identity.json"))
        assert out["m"] is None
        assert out["precision_ideal"] is None

    def test_malformed_json(self, runner, tmp_path):
        src = tmp_path / "broken.json"
        src.write_text("{\"ranks\": [1, ")
        result = runner.invoke(cli, ["compute", "cohomology", "--in", str(src)])
        assert result.exit_code == 2
        assert "SchemaError" in result.output

    def test_wrong_shape(self, runner, fixture_path):
        result = runner.invoke(cli, ["compute", "cohomology", "--in", fixture_path("complex_multiplication_by_two.json")])
        assert result.exit_code == 2


class TestTransports:
    def test_simpson_push(self, runner, tmp_path, fixture_path):
        out = tmp_path / "pushed.json"
        result = runner.invoke(cli, ["simpson", "push", "--in", fixture_path("higgs_frobenius_rank1.json"),
                                     "--out", str(out)])
        assert result.exit_code == 0, result.output
        assert json.loads(out.read_text())["kind"] == "qconn"

    def test_descent_run(self, runner, tmp_path, fixture_path):
        out = tmp_path / "descended.json"
        result = runner.invoke(cli, ["descent", "run", "--in", fixture_path("cocycle_identity.json"),
                                     "--out", str(out), "--max-steps", "3"])
        assert result.exit_code == 0, result.output
        assert json.loads(out.read_text())["m"] is None


@pytest.fixture
def root_term_cocycle():
    P = RingParams(3, 3, 1, 4)
    desc = AlgebraDesc(P, 1, 0, 1)
    c0, c1 = default_pair(P)
    eye = LaurentMatrix.identity(desc, 1)
    X0 = eye + LaurentMatrix.scalar(desc, 1, LaurentElem.monomial(desc, (1,), c0))
    return twist(Cocycle(desc, [eye], c0, c1), X0)


class TestDescentRun:
    def test_root_term_descends(self, runner, tmp_path, root_term_cocycle):
        src = tmp_path / "cocycle.json"
        src.write_text(json.dumps(root_term_cocycle.to_json()))
        out = run_descent(runner, tmp_path, src)
        assert out["m"] is None
        assert out["precision_ideal"] is None
        X = LaurentMatrix.from_json(root_term_cocycle.desc, out["X"])
        assert X != LaurentMatrix.identity(root_term_cocycle.desc, 1)
        descended = Cocycle.from_json(out["descended"])
        assert non_integral_vanishes(descended)
        assert twist(root_term_cocycle, X).A == descended.A

    def test_named_pair(self, runner, tmp_path, fixture_path):
        out = run_descent(runner, tmp_path, fixture_path("cocycle_identity.json"), "--c0", "xi1", "--c1", "mu")
        assert out["m"] is None

    def test_swapped_pair_is_rejected(self, runner, fixture_path):
        result = runner.invoke(cli, ["descent", "run", "--in", fixture_path("cocycle_identity.json"),
                                     "--c0", "mu", "--c1", "xi1"])
        assert result.exit_code == 1
        assert "PreconditionViolation" in result.output

