import json

import pytest
from click.testing import CliRunner

from arsim import __version__
from arsim.cli import main

SEED = "0x" + "ab" * 32


def run(*args, env=None):
    return CliRunner().invoke(main, [str(a) for a in args], env=env)


def doc_of(result):
    return json.loads(result.stdout)


def test_version():
    r = run("--version")
    assert r.exit_code == 0 and __version__ in r.stdout


def test_sample_is_deterministic_in_seed():
    a = doc_of(run("sample", "--n", 2, "--lambda", 12, "--seed", SEED))
    b = doc_of(run("sample", "--n", 2, "--lambda", 12, "--seed", SEED))
    assert a.pop("wall_time_s") >= 0 and b.pop("wall_time_s") >= 0
    assert a == b
    assert a["tool"] == "arsim" and a["command"] == "sample" and a["seed"] == "ab" * 32
    state = a["result"]
    assert set(state) >= {"branch", "candidate_index", "failed"}


def test_sample_writes_file(tmp_path):
    out = tmp_path / "s.json"
    r = run("sample", "--n", 1, "--lambda", 12, "--seed", SEED, "--out", out)
    assert r.exit_code == 0
    assert json.loads(out.read_text())["params"]["n"] == 1


@pytest.mark.parametrize("args", [
    ("sample", "--n", 1, "--lambda", 4),
    ("sample", "--n", 0, "--lambda", 12),
    ("sample", "--n", 1, "--lambda", 12, "--seed", "zz"),
    ("verify", "--lemma", "nope", "--n", 1, "--lambda", 12),
    ("verify", "--lemma", "coord_bounded", "--n", 1, "--lambda", 12, "--param", "novalue"),
    ("e2e", "--n", 4, "--lambda", 12, "--t", 4, "--runs", 100000, "--seed", SEED),
    ("pmf", "--m", 0, "--B", 4),
])
def test_usage_errors_exit_2(args):
    assert run(*args).exit_code == 2


def test_verify_pass_exits_0():
    r = run("verify", "--lemma", "coord_bounded", "--n", 1, "--lambda", 12, "--trials", 20000,
            "--seed", SEED)
    assert r.exit_code == 0
    report = doc_of(r)["report"]
    assert report["lemma_id"] == "coord_bounded" and report["verdict"] == "pass"


def test_verify_violation_exits_1():
    r = run("verify", "--lemma", "not_in_layer", "--n", 2, "--lambda", 4, "--trials", 200000,
            "--seed", SEED)
    assert r.exit_code == 1 and doc_of(r)["report"]["verdict"] == "fail"


def test_verify_informational_exits_0():
    r = run("verify", "--lemma", "layer", "--n", 1, "--lambda", 4, "--trials", 20000,
            "--seed", SEED)
    assert r.exit_code == 0


def test_verify_distance_and_hybrid_step():
    r = run("verify", "--lemma", "trace_diameter", "--n", 2, "--t", 3, "--param", "eps=0.01",
            "--seed", SEED)
    assert r.exit_code == 0 and doc_of(r)["report"]["verdict"] == "pass"
    r = run("verify", "--lemma", "P5P6", "--n", 1, "--lambda", 12, "--seed", SEED)
    assert r.exit_code == 0 and doc_of(r)["report"]["method"] == "identity"


def test_verify_threads_do_not_change_result():
    args = ("verify", "--lemma", "gaussian_long", "--n", 2, "--lambda", 8, "--trials", 150000,
            "--seed", SEED)
    one = doc_of(run(*args, "--threads", 1))["report"]
    two = doc_of(run(*args, "--threads", 2))["report"]
    assert one["estimate"] == two["estimate"] and one["stderr"] == two["stderr"]


def test_env_var_sets_option():
    env = {"ARSIM_VERIFY_TRIALS": "12345"}
    r = run("verify", "--lemma", "coord_bounded", "--n", 1, "--lambda", 12, "--seed", SEED, env=env)
    assert doc_of(r)["report"]["trials"] == 12345


def test_verify_all_writes_csv(tmp_path):
    out = tmp_path / "all.csv"
    r = run("verify", "--lemma", "all", "--trials", 20000, "--seed", SEED, "--out", out)
    assert r.exit_code in (0, 1)
    lines = out.read_text().splitlines()
    assert lines[0].startswith("# tool=arsim") and "seed=" + "ab" * 32 in lines[0]
    assert lines[1].startswith("id,")
    assert len(lines) > 40


def test_e2e_small_run():
    r = run("e2e", "--n", 1, "--lambda", 12, "--t", 1, "--runs", 100000, "--seed", SEED)
    assert r.exit_code == 0
    report = doc_of(r)["report"]
    assert report["estimate"] <= report["bound"]


def test_design_reports_key():
    r = run("design", "--n", 1, "--lambda", 8, "--t", 2, "--seed", SEED)
    assert r.exit_code == 0
    doc = doc_of(r)
    assert doc["key"]["independence"] >= 2 * 8


def test_pmf_csv_and_json():
    r = run("pmf", "--m", 2, "--B", 1)
    assert r.exit_code == 0
    lines = r.stdout.splitlines()
    assert lines[0].startswith("# tool=arsim") and lines[1] == "value,probability"
    assert len(lines) == 2 + 9
    total = sum(float(line.split(",")[1]) for line in lines[2:])
    assert total == pytest.approx(1.0, abs=1e-12)
    doc = json.loads(run("pmf", "--m", 2, "--B", 1, "--format", "json").stdout)
    assert doc["total"] == pytest.approx(1.0, abs=1e-12) and len(doc["table"]) == 9
