import json
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

import hedscore
from hedscore import ProbabilityStream, io
from hedscore.cli import EXIT_INVARIANT, EXIT_OK, EXIT_USAGE, main
from hedscore.detectors import delay_stream

CANONICAL_SEED = 22

# simulate output digests for the canonical config; the slds stream depends on
# the floating-point evaluation order of the active backend
GOLDEN_COMMON = {
    "ewma.csv": "1c760b059b46c7170d06f56ea9cd14ef1b5637d5261765a07ef03de312a4a76d",
    "ewma.csv.meta.json": "09d7eb5d4f497cc14168f46d6d207f0e2071b31716a7bf798c18ed6d20d0a45f",
    "observations.csv": "3f9bce4255498d92f22bf37c7c8bee32849f1c40abfc5c248392ee40d1047057",
    "slds.csv.meta.json": "b64d252c35e533cfd54ad025dd3e14cbce8b633170c10627d9bc32c2d233b650",
    "truth.json": "689d43c578bf03d4f1bce8dae8acc54b3aeade4c864709272a647971d62e750f",
}
GOLDEN_SLDS = {
    "numba": "cef9f2a2310fcb113a71d43a70b6ae1fb614c42f1d980687939565716f4ee2ff",
    "numpy": "3f4b0ea92961b03ce6685d40792eb8dccedfd698ac14ba920614b6f320ecaa17",
}


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, (json.loads(out) if code == EXIT_OK else None), err


def write(tmp_path, name, probs, t_start, label=""):
    return io.write_stream(tmp_path / name, ProbabilityStream(probs, t_start), label=label)


@pytest.fixture
def step_file(tmp_path):
    return write(tmp_path, "step.csv", [0] * 5 + [1] * 6, 5, "step")


@pytest.fixture
def canonical(tmp_path, capsys):
    cfg = tmp_path / "canonical.json"
    cfg.write_text(json.dumps({"seed": CANONICAL_SEED}))
    code, report, _ = run(capsys, "simulate", cfg, "--out-dir", tmp_path / "scn")
    assert code == EXIT_OK
    return tmp_path / "scn", report


# -- stream files -------------------------------------------------------------

@settings(max_examples=50, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(st.lists(st.floats(0.0, 1.0), min_size=3, max_size=60), st.data())
def test_stream_round_trip(tmp_path, probs, data):
    t_start = data.draw(st.integers(1, len(probs) - 2))
    s = ProbabilityStream(probs, t_start)
    path = io.write_stream(tmp_path / "rt.csv", s, label="x", lambda_h=0.14)
    back, meta = io.read_stream(path)
    assert back == s
    assert meta == {"t_start": t_start, "label": "x", "lambda": 0.14}


def test_missing_onset_is_usage_error(tmp_path, capsys):
    (tmp_path / "a.csv").write_text("t,p\n0,0.1\n1,0.2\n2,0.3\n")
    code, _, err = run(capsys, "score", tmp_path / "a.csv", "--lambda", 0.1)
    assert code == EXIT_USAGE and "t_start" in err
    code, report, _ = run(capsys, "score", tmp_path / "a.csv", "--lambda", 0.1, "--t-start", 1)
    assert code == EXIT_OK and report["results"]["t_start"] == 1


@pytest.mark.parametrize(
    "body, code",
    [
        ("t,p\n0,0.1\n1,0.2\n2,0.3\n3,1.2\n", EXIT_INVARIANT),
        ("t,p\n0,0.1\n1,0.2\n3,0.3\n", EXIT_INVARIANT),
        ("time,prob\n0,0.1\n1,0.2\n2,0.3\n", EXIT_USAGE),
        ("t,p\n0,0.1\n1,abc\n2,0.3\n", EXIT_USAGE),
        ("t,p\nt=3,p=1.2\n", EXIT_USAGE),
        ("t,p\n0,0.1,9\n", EXIT_USAGE),
        ("", EXIT_USAGE),
    ],
)
def test_malformed_files(tmp_path, capsys, body, code):
    path = tmp_path / "bad.csv"
    path.write_text(body)
    io.meta_path(path).write_text('{"t_start": 1}')
    got, _, err = run(capsys, "score", path, "--lambda", 0.5)
    assert got == code
    if body.endswith("3,1.2\n"):
        assert "ProbabilityRangeError" in err and "[0, 1]" in err


# -- score --------------------------------------------------------------------

def test_score_step_fixture(capsys, step_file):
    code, report, _ = run(capsys, "score", step_file, "--lambda", 0.5)
    assert code == EXIT_OK
    r = report["results"]
    assert abs(r["score"] - 0.482994) < 5e-6
    assert r["exact_piecewise"] == pytest.approx(0.367166, abs=1e-6)
    assert r["upper_bound_discrete"] == pytest.approx(r["score"], abs=1e-15)
    assert report["command"] == "score" and report["tool_version"] == hedscore.__version__
    assert report["inputs"]["stream"] == io.file_digest(step_file)


def test_score_budget(capsys, step_file):
    code, report, _ = run(capsys, "score", step_file, "--budget", 4.95)
    assert round(report["parameters"]["lambda"], 2) == 0.14
    assert report["results"]["half_life"] == pytest.approx(4.95, abs=1e-12)


@pytest.mark.parametrize("args", [[], ["--lambda", "0.1", "--budget", "3"], ["--lambda", "x"]])
def test_score_decay_flags(capsys, step_file, args):
    code, _, _ = run(capsys, "score", step_file, *args)
    assert code == EXIT_USAGE


def test_score_invalid_decay(capsys, step_file):
    code, _, err = run(capsys, "score", step_file, "--lambda", -1)
    assert code == EXIT_INVARIANT and "InvalidDecay" in err


def test_score_extras(tmp_path, capsys, step_file):
    out = tmp_path / "terms.csv"
    code, report, _ = run(capsys, "score", step_file, "--lambda", 0.5, "--phases", 2, "--smooth", 50, "--out-csv", out)
    r = report["results"]
    assert r["phases"]["boundaries"] == [5, 8, 10]
    assert sum(r["phases"]["contributions"]) == pytest.approx(r["score"], abs=1e-12)
    assert 0 <= r["smooth_score"] - r["score"] < 0.01
    lines = out.read_text().splitlines()
    assert lines[0] == "t,lift,discount" and len(lines) == 7


def test_score_bad_phases(capsys, step_file):
    assert run(capsys, "score", step_file, "--lambda", 0.5, "--phases", 9)[0] == EXIT_INVARIANT


# -- compare ------------------------------------------------------------------

def test_compare_identical(capsys, step_file):
    code, report, _ = run(capsys, "compare", step_file, step_file, "--lambda", 0.5, "--seed", 1, "--B", 200)
    r = report["results"]
    assert r["p_value"] == 1.0 and r["observed_diff"] == 0.0
    assert r["ci_method"] == "percentile" and report["seed"] == 1


def test_compare_requires_seed(capsys, step_file):
    code, _, err = run(capsys, "compare", step_file, step_file, "--lambda", 0.5)
    assert code == EXIT_USAGE and "--seed" in err


def test_compare_mismatched(tmp_path, capsys, step_file):
    other = write(tmp_path, "o.csv", [0] * 4 + [1] * 7, 4)
    code, _, err = run(capsys, "compare", step_file, other, "--lambda", 0.5, "--seed", 1)
    assert code == EXIT_INVARIANT and "MismatchedWindows" in err


def test_compare_canonical(capsys, canonical):
    d, _ = canonical
    code, report, _ = run(capsys, "compare", d / "slds.csv", d / "ewma.csv", "--lambda", 0.14, "--seed", CANONICAL_SEED)
    r = report["results"]
    assert r["p_value"] < 0.01 and r["block_len"] == 5 and r["num_resamples"] == 2000


def test_compare_parallel_identical(capsys, canonical):
    d, _ = canonical
    reports = []
    for w in (1, 4):
        _, rep, _ = run(capsys, "compare", d / "slds.csv", d / "ewma.csv", "--lambda", 0.14,
                        "--seed", 5, "--B", 400, "--workers", w)
        reports.append(io.dumps_report(io.strip_timestamp(rep)))
    assert reports[0] == reports[1]


# -- frontier -----------------------------------------------------------------

def test_frontier_single_csv(tmp_path, capsys, rng):
    p = rng.uniform(0.01, 0.99, 41)
    f = write(tmp_path, "r.csv", p, 15)
    out = tmp_path / "f.csv"
    code, report, _ = run(capsys, "frontier", f, "--lambda", 0.14, "--out-csv", out)
    assert len(out.read_text().splitlines()) - 1 == np.unique(p).size + 2
    assert "abc" not in report["results"]


def test_frontier_self_zero(capsys, step_file):
    code, report, _ = run(capsys, "frontier", step_file, step_file, "--lambda", 0.5)
    assert report["results"]["abc"] == 0.0 and report["results"]["dominated"] == "neither"


def test_frontier_early_vs_delayed(tmp_path, capsys, rng):
    s = ProbabilityStream(np.concatenate([rng.uniform(0, 0.3, 40), np.linspace(0.35, 1.0, 61)]), 40)
    a = io.write_stream(tmp_path / "early.csv", s, "early")
    b = io.write_stream(tmp_path / "late.csv", delay_stream(s, 10), "late")
    svg = tmp_path / "f.svg"
    code, report, _ = run(capsys, "frontier", a, b, "--lambda", 0.14, "--out-svg", svg)
    assert report["results"]["dominated"] == "A" and report["results"]["abc"] > 0
    first = svg.read_bytes()
    assert first.startswith(b"<?xml") and b"<svg" in first
    run(capsys, "frontier", a, b, "--lambda", 0.14, "--out-svg", svg)
    assert svg.read_bytes() == first


# -- simulate -----------------------------------------------------------------

def test_simulate_golden(canonical):
    d, report = canonical
    expected = {**GOLDEN_COMMON, "slds.csv": GOLDEN_SLDS[hedscore.BACKEND]}
    assert report["results"]["files"] == expected
    assert report["results"]["onset"] == 50 and report["seed"] == CANONICAL_SEED


def test_simulate_golden_other_backend(tmp_path):
    other = "numpy" if hedscore.BACKEND == "numba" else "numba"
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"seed": CANONICAL_SEED}))
    env = dict(os.environ, HEDSCORE_DISABLE_NUMBA="1" if other == "numpy" else "0")
    proc = subprocess.run(
        [sys.executable, "-m", "hedscore.cli", "simulate", str(cfg), "--out-dir", str(tmp_path / "o")],
        env=env, capture_output=True, text=True, check=True,
    )
    assert json.loads(proc.stdout)["results"]["files"] == {**GOLDEN_COMMON, "slds.csv": GOLDEN_SLDS[other]}


@pytest.mark.parametrize(
    "config, needle",
    [
        ({"onset": 200, "horizon": 200}, "onset"),
        ({"detectors": ["slds", "rf"]}, "valid names"),
        ({"sed": 3}, "$.sed"),
        ({"horizon": "200"}, "$.horizon"),
        ({"hurst": True}, "$.hurst"),
        ({"detectors": "slds"}, "$.detectors"),
        ([1, 2], "$"),
    ],
)
def test_simulate_schema_errors(tmp_path, capsys, config, needle):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps(config))
    code, _, err = run(capsys, "simulate", cfg, "--out-dir", tmp_path / "o")
    assert code == EXIT_USAGE and needle in err


def test_simulate_bad_json(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text("{seed: 1")
    assert run(capsys, "simulate", cfg, "--out-dir", tmp_path)[0] == EXIT_USAGE


# -- table --------------------------------------------------------------------

def test_table(capsys):
    code, report, _ = run(capsys, "table", "--quiet")
    assert code == EXIT_OK and report["results"]["verified"]
    rows = {r["domain"]: r for r in report["results"]["rows"]}
    assert len(rows) == 5
    for domain, lam, tau in [
        ("Network Security & IDS", 0.14, 4.95),
        ("Epidemiological Surveillance", 0.02, 34.66),
        ("Ultra-High Latency Sensitivity", 0.50, 1.39),
    ]:
        assert rows[domain]["lambda"] == lam and round(rows[domain]["half_life"], 2) == tau


def test_report_repeatable(capsys, step_file):
    a = run(capsys, "score", step_file, "--lambda", 0.3)[1]
    b = run(capsys, "score", step_file, "--lambda", 0.3)[1]
    assert io.strip_timestamp(a) == io.strip_timestamp(b)
    assert set(a) == {"command", "inputs", "parameters", "results", "tool_version", "seed", "timestamp"}


def test_console_script_installed():
    proc = subprocess.run(["hedscore", "table", "--quiet"], capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["results"]["verified"]
