import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from pastentropy.cli import run
from pastentropy.distributions import Exponential, PowerFunction, Uniform
from pastentropy.estimation import Sample
from pastentropy.measures import MeasureCurve, measure_curve


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def ok(*argv):
    code, out, err = call(*argv)
    assert code == 0, err
    return json.loads(out)


class TestExamples:
    def test_eval(self):
        res = ok("eval", "--dist", "uniform:b=1", "--measure", "past_direct", "--t", "0.5")
        assert res["value"] == pytest.approx(math.log(0.5), abs=1e-12)
        assert res["quadrature"]["abs_tol"] == 1e-10

    def test_eval_at_zero(self):
        code, out, err = call("eval", "--dist", "uniform:b=1", "--measure", "past_direct", "--t", "0")
        assert code == 2 and out == "" and err

    def test_compare(self):
        res = ok("compare", "--dist-x", "exp:rate=1", "--dist-y", "exp:rate=1", "--t0", "1")
        assert res["result"]["verdict"] == "consistent"


class TestEval:
    @pytest.mark.parametrize("measure, value", [
        ("shannon", 0.0),
        ("residual", math.log(0.5)),
        ("past_pit", math.log(0.5)),
        ("past_condexp", math.log(0.5)),
        ("reversed_hazard", 2.0),
    ])
    def test_measures(self, measure, value):
        argv = ["eval", "--dist", "uniform:b=1", "--measure", measure]
        if measure != "shannon":
            argv += ["--t", "0.5"]
        assert ok(*argv)["value"] == pytest.approx(value, abs=1e-9)

    def test_missing_t(self):
        assert call("eval", "--dist", "uniform:b=1", "--measure", "residual")[0] == 2

    def test_tolerance_flags_are_echoed(self):
        res = ok("eval", "--dist", "exp:rate=1", "--measure", "past_direct", "--t", "1",
                 "--quad-abs-tol", "1e-8", "--quad-rel-tol", "1e-8")
        assert res["quadrature"]["abs_tol"] == 1e-8 and res["quadrature"]["rel_tol"] == 1e-8

    def test_accuracy_failure_exits_3(self):
        code, out, err = call("eval", "--dist", "weibull:shape=0.6,scale=1", "--measure", "past_direct",
                              "--t", "2", "--quad-abs-tol", "1e-15", "--quad-rel-tol", "1e-15",
                              "--quad-max-depth", "1")
        assert code == 3 and "numerical" in err


class TestUsage:
    @pytest.mark.parametrize("argv", [
        [],
        ["frobnicate"],
        ["eval", "--dist", "gamma:k=1", "--measure", "shannon"],
        ["eval", "--dist", "uniform:b=1", "--measure", "hazard", "--t", "0.5"],
        ["eval", "--dist", "uniform:b=1", "--measure", "shannon", "--bogus", "1"],
        ["eval", "--dis", "uniform:b=1", "--measure", "shannon"],
        ["eval", "--dist", "uniform:b=1", "--measure", "past_direct", "--t", "abc"],
        ["probe", "--family-x", "power", "--family-y", "power", "--param-grid", "c=1:2",
         "--t0-grid", "0.5:1:2", "--out", "x.csv"],
    ])
    def test_invalid_input_exits_2(self, argv):
        code, out, err = call(*argv)
        assert code == 2 and out == "" and err

    def test_help(self):
        code, out, _ = call("--help")
        assert code == 0 and "reconstruct" in out

    def test_module_entry_point(self):
        proc = subprocess.run([sys.executable, "-m", "pastentropy", "eval", "--dist", "uniform:b=2",
                               "--measure", "shannon"], capture_output=True, text=True)
        assert proc.returncode == 0
        assert json.loads(proc.stdout)["value"] == pytest.approx(math.log(2), abs=1e-12)


class TestCurveAndReconstruct:
    def test_round_trip(self, tmp_path):
        curve_path, rec_path = tmp_path / "c.csv", tmp_path / "r.csv"
        res = ok("curve", "--dist", "power:c=2,b=1", "--measure", "past_direct", "--t-min", "0.1",
                 "--t-max", "0.99", "--points", "200", "--out", str(curve_path))
        assert res["points"] == 200
        curve = MeasureCurve.from_csv(curve_path)
        np.testing.assert_allclose(curve.values, np.log(curve.grid) - math.log(2) + 0.5, atol=1e-9)

        res = ok("reconstruct", "--in", str(curve_path), "--anchor-t", "0.99", "--anchor-F", str(0.99 ** 2),
                 "--out", str(rec_path))
        assert res["max_selfcheck_residual"] <= 1e-3
        rows = np.loadtxt(rec_path, delimiter=",", skiprows=1)
        assert np.max(np.abs(rows[:, 2] - rows[:, 0] ** 2)) <= 1e-3

    def test_forced_branch(self, tmp_path):
        d = PowerFunction(0.5, 1.0)
        path, rec = tmp_path / "c.csv", tmp_path / "r.csv"
        measure_curve(d, "past_direct", 0.1, 0.99, 200).to_csv(path)
        res = ok("reconstruct", "--in", str(path), "--anchor-t", "0.99", "--anchor-F", str(d.cdf(0.99)),
                 "--out", str(rec), "--branch", "ascending")
        assert res["branch"] == "ascending"
        rows = np.loadtxt(rec, delimiter=",", skiprows=1)
        assert np.max(np.abs(rows[:, 2] - np.sqrt(rows[:, 0]))) <= 1e-3

    def test_no_root_exits_3(self, tmp_path):
        path = tmp_path / "c.csv"
        # slope far above exp(-hbar) everywhere
        MeasureCurve("past_direct", np.linspace(0.1, 1.0, 20), 5.0 * np.linspace(0.1, 1.0, 20)).to_csv(path)
        code, _, err = call("reconstruct", "--in", str(path), "--anchor-t", "1.0", "--anchor-F", "0.5",
                            "--out", str(tmp_path / "r.csv"))
        assert code == 3 and "t=" in err

    def test_missing_input_exits_2(self, tmp_path):
        code, _, _ = call("reconstruct", "--in", str(tmp_path / "nope.csv"), "--anchor-t", "1",
                          "--anchor-F", "0.5", "--out", str(tmp_path / "r.csv"))
        assert code == 2

    def test_bad_curve_range_exits_2(self, tmp_path):
        code, _, _ = call("curve", "--dist", "uniform:b=1", "--measure", "past_direct", "--t-min", "0.1",
                          "--t-max", "1.5", "--points", "5", "--out", str(tmp_path / "c.csv"))
        assert code == 2


class TestCompareAndProbe:
    def test_compare_twins(self):
        res = ok("compare", "--dist-x", "power:c=0.5,b=1",
                 "--dist-y", "power:c=2.460776817283753,b=0.5756196988711474", "--t0", "0.5")
        assert res["result"]["verdict"] == "counterexample_candidate"
        assert res["result"]["conclusion_distance"] > 0.01

    def test_compare_different_laws(self):
        res = ok("compare", "--dist-x", "exp:rate=1", "--dist-y", "exp:rate=2", "--t0", "1")
        assert res["result"]["verdict"] == "premises_fail"

    def test_probe(self, tmp_path):
        path = tmp_path / "p.csv"
        res = ok("probe", "--family-x", "power", "--family-y", "power", "--param-grid", "c=0.5:2:2,b=1:1:1",
                 "--t0-grid", "0.5:1:2", "--shape-grid", "0.3:3:8", "--out", str(path))
        assert res["cells"] == 4 and res["candidates"] >= 1
        assert res["top"]["dist_x"] in {"power:c=0.5,b=1.0", "power:c=2.0,b=1.0"}
        lines = path.read_text().splitlines()
        assert lines[0] == "dist_x,dist_y,t0,cdf_gap,entropy_gap,mismatch,conclusion_distance,verdict"
        assert len(lines) == res["candidates"] + 1

    def test_probe_unknown_family(self, tmp_path):
        code, _, _ = call("probe", "--family-x", "gamma", "--family-y", "power", "--param-grid", "c=1:2:2",
                          "--t0-grid", "0.5:1:2", "--out", str(tmp_path / "p.csv"))
        assert code == 2


class TestEstimate:
    def test_synth(self):
        res = ok("estimate", "--synth", "uniform:b=1", "--n", "100000", "--seed", "42", "--t", "0.5")
        assert abs(res["value"] - math.log(0.5)) <= 0.05
        assert res["window"] == math.isqrt(res["k"])

    def test_from_file(self, tmp_path):
        path = tmp_path / "s.csv"
        Sample(Exponential(1.0).sample(500, seed=3)).to_csv(path)
        res = ok("estimate", "--in", str(path), "--t", "1", "--window", "5")
        assert res["window"] == 5 and math.isfinite(res["value"])

    @pytest.mark.parametrize("argv", [
        ["estimate", "--t", "0.5"],
        ["estimate", "--synth", "uniform:b=1", "--n", "100", "--t", "0.5"],
        ["estimate", "--synth", "uniform:b=1", "--n", "100", "--seed", "1", "--t", "0.001"],
        ["estimate", "--in", "s.csv", "--synth", "uniform:b=1", "--n", "100", "--seed", "1", "--t", "0.5"],
    ])
    def test_bad_requests(self, argv):
        assert call(*argv)[0] == 2


class TestDistAndInvert:
    def test_functions(self):
        assert ok("dist", "--dist", "uniform:b=2", "--fn", "pdf", "--x", "1")["value"] == 0.5
        assert ok("dist", "--dist", "power:c=2,b=1", "--fn", "cdf", "--x", "0.5")["value"] == 0.25
        assert ok("dist", "--dist", "uniform:b=1", "--fn", "survival", "--x", "0.25")["value"] == 0.75
        assert ok("dist", "--dist", "uniform:b=2", "--fn", "quantile", "--x", "0.5")["value"] == 1.0

    def test_sample(self):
        res = ok("dist", "--dist", "uniform:b=1", "--fn", "sample", "--n", "3", "--seed", "7")
        assert res["values"] == Uniform(1.0).sample(3, seed=7).tolist()
        assert call("dist", "--dist", "uniform:b=1", "--fn", "sample", "--n", "0", "--seed", "7")[0] == 2

    def test_invert(self):
        res = ok("invert", "--hbar", str(math.log(0.5)), "--hprime", "2")
        assert res["regime"] == "tangent"
        assert res["roots"][0] == pytest.approx(2.0, rel=1e-6)
        assert ok("invert", "--hbar", "0", "--hprime", "5")["regime"] == "no_root"


def test_determinism():
    argv = ["estimate", "--synth", "exp:rate=2", "--n", "2000", "--seed", "9", "--t", "0.4"]
    assert call(*argv)[1] == call(*argv)[1]
