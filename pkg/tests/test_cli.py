import json
import subprocess
import sys

import pytest

from enrich.cli import main
from enrich.evaluation import LabelledTestSet, read_combinations_csv
from enrich.loop import RunRecord
from enrich.shaper import ShaperConfig

ZEROS = ",".join(["0"] * 8)


def small_spec(tmp_path, **eval_overrides):
    (tmp_path / "shaper.json").write_text(ShaperConfig().to_json())
    spec = {"config": "shaper.json",
            "run": {"seed": 5, "initial_suite": 20, "suite_size": 5, "iterations": 2},
            "evaluation": {"testset_seed": 9, "seed": 1, "testset_size": 40,
                           "epsilons": [0.05, 0.4], "runs": 2, "combo_samples": 3,
                           **eval_overrides},
            "output_dir": "out"}
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(spec))
    return path


def test_simulate_idle(capsys):
    assert main(["simulate", "--input", ZEROS]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["score"] == 8.0 and out["acceptable"]


def test_simulate_seed_stable(capsys):
    main(["simulate", "--input", ZEROS, "--seed", "7"])
    a = capsys.readouterr().out
    main(["simulate", "--input", ZEROS, "--seed", "7"])
    assert capsys.readouterr().out == a


@pytest.mark.parametrize("vec", ["0,0,x", "0,0,0", ",".join(["500"] * 8)])
def test_simulate_bad_vector(vec):
    assert main(["simulate", "--input", vec]) == 2


def test_missing_config_is_runtime_error(tmp_path):
    assert main(["simulate", "--config", str(tmp_path / "nope.json"), "--input", ZEROS]) == 1


def test_enrich_writes_and_refuses(tmp_path):
    spec = small_spec(tmp_path)
    assert main(["enrich", "--spec", str(spec), "--runs", "2"]) == 0
    out = tmp_path / "out"
    assert sorted(p.name for p in out.iterdir()) == \
        ["run_5.json", "run_6.json", "tests_5.csv", "tests_6.csv"]
    assert len((out / "tests_5.csv").read_text().splitlines()) == 1 + 30
    assert RunRecord.load(out / "run_6.json").seed == 6
    assert main(["enrich", "--spec", str(spec)]) == 1
    assert main(["enrich", "--spec", str(spec), "--force"]) == 0


def test_baseline_default_budget(tmp_path):
    assert main(["baseline", "--seed", "0", "--out", str(tmp_path)]) == 0
    assert len((tmp_path / "tests_0.csv").read_text().splitlines()) == 301


def test_spec_requires_seeds(tmp_path):
    path = tmp_path / "spec.json"
    path.write_text(json.dumps({"run": {}, "evaluation": {"seed": 1, "testset_seed": 2}}))
    assert main(["enrich", "--spec", str(path), "--out", str(tmp_path)]) == 2


def test_label(tmp_path, capsys):
    assert main(["label", "--input", ZEROS]) == 0
    assert json.loads(capsys.readouterr().out)["label"] == "robust"
    out = tmp_path / "ts.csv"
    assert main(["label", "--size", "12", "--seed", "3", "--out", str(out)]) == 0
    assert len(LabelledTestSet.read_csv(out)) == 12


def test_evaluate(tmp_path):
    spec = small_spec(tmp_path)
    main(["enrich", "--spec", str(spec), "--runs", "2"])
    main(["baseline", "--spec", str(spec), "--runs", "2", "--out", str(tmp_path / "b")])
    runs = [str(p) for p in sorted((tmp_path / "out").glob("run_*.json"))]
    runs += [str(p) for p in sorted((tmp_path / "b").glob("run_*.json"))]
    assert main(["evaluate", *runs, "--spec", str(spec)]) == 0
    out = tmp_path / "out"
    assert (out / "testset_9_40.csv").exists()
    rows = read_combinations_csv(out / "combinations.csv")
    assert {r["method"] for r in rows} == {"enrich", "baseline"}
    assert {r["epsilon"] for r in rows} == {0.05, 0.4}
    assert {r["n_runs"] for r in rows} == {1, 2}
    assert (out / "summary.csv").exists()


def test_evaluate_errors(tmp_path):
    spec = small_spec(tmp_path)
    assert main(["evaluate", "--spec", str(spec)]) == 1
    assert main(["evaluate", str(tmp_path / "missing.json"), "--spec", str(spec)]) == 1
    assert main(["evaluate", "x.json", "--spec", str(spec), "--epsilon", ""]) == 2
    assert main(["evaluate", "x.json", "--spec", str(spec), "--epsilon", "1.5"]) == 2


def test_compare(tmp_path, capsys):
    a = tmp_path / "a.txt"
    b = tmp_path / "b.csv"
    a.write_text("1\n2\n3\n4\n5\n")
    b.write_text("score\n1\n2\n3\n4\n5\n")
    assert main(["compare", str(a), str(b), "--mae"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["mae"] == 0 and out["p_value"] >= 0.99
    assert set(out) >= {"p_value", "mae", "mean_a", "sd_a", "mean_b", "sd_b"}
    short = tmp_path / "s.txt"
    short.write_text("1\n2\n3\n")
    assert main(["compare", str(a), str(short), "--mae"]) == 2
    bad = tmp_path / "bad.txt"
    bad.write_text("1\nfoo\n")
    assert main(["compare", str(a), str(bad)]) == 2


def test_usage_errors():
    with pytest.raises(SystemExit) as exc:
        main(["nonsense"])
    assert exc.value.code == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "enrich", "simulate", "--input", ZEROS],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["score"] == 8.0
