import json

import pytest

from coopt.cli import run


TWO_VAR = {
    "variables": [{"name": "a", "values": [0, 1]},
                  {"name": "b", "values": ["lo", "hi"]}],
    "unary": [[0.0, 1.0], [0.0, 2.0]],
    "pairwise": [{"i": 0, "j": 1, "table": [[0.0, 6.0], [5.0, 0.0]]}],
}

HARMONIC = {
    "particles": [{"name": "p", "mass": 1.0,
                   "potential": {"type": "harmonic"}}],
}


@pytest.fixture
def disc(tmp_path):
    p = tmp_path / "disc.json"
    p.write_text(json.dumps(TWO_VAR))
    return str(p)


@pytest.fixture
def cont(tmp_path):
    p = tmp_path / "cont.json"
    p.write_text(json.dumps(HARMONIC))
    return str(p)


def read_result(out):
    return json.loads((out / "result.json").read_text())


def header_of(path):
    return path.read_text().splitlines()[0]


# --- solve-discrete ---------------------------------------------------------------

def test_solve_discrete_writes_certified_report(disc, tmp_path, capsys):
    out = tmp_path / "out_d"
    assert run(["solve-discrete", disc, "--out", str(out)]) == 0
    doc = read_result(out)
    assert doc["kind"] == "solve-discrete"
    assert doc["converged"] is True
    assert doc["certificate"]["certified"] is True
    assert doc["assignment"] == [0, 0]
    assert doc["assignment_labels"] == [0, "lo"]
    assert doc["certificate"]["upper_bound"] == pytest.approx(0.0, abs=1e-12)
    assert header_of(out / "trace.csv") == "iter,lower_bound,upper_bound,delta"
    assert (out / "bounds.png").stat().st_size > 0
    assert "result.json" in capsys.readouterr().out


def test_solve_discrete_nonconvergence_still_writes_artifacts(disc, tmp_path):
    out = tmp_path / "out_d1"
    code = run(["solve-discrete", disc, "--max-iters", "1", "--out", str(out)])
    assert code == 1
    doc = read_result(out)
    assert doc["converged"] is False
    assert doc["iterations"] == 1
    assert (out / "trace.csv").exists()
    assert (out / "bounds.png").exists()


def test_solve_discrete_result_is_deterministic(disc, tmp_path):
    outs = []
    for name in ("run1", "run2"):
        out = tmp_path / name
        assert run(["solve-discrete", disc, "--variant", "offset",
                    "--alpha", "0.4", "--lambda", "0.8",
                    "--out", str(out)]) == 0
        text = (out / "result.json").read_text()
        outs.append([l for l in text.splitlines() if "wall_time_s" not in l])
    assert outs[0] == outs[1]


# --- solve-soft -------------------------------------------------------------------

def test_solve_soft_writes_tables_and_decision(disc, tmp_path):
    out = tmp_path / "out_s"
    assert run(["solve-soft", disc, "--mode", "maxprod", "--hbar", "0.1",
                "--out", str(out)]) == 0
    doc = read_result(out)
    assert doc["kind"] == "solve-soft"
    assert doc["decision"] == [0, 0]
    assert doc["decision_labels"] == [0, "lo"]
    assert len(doc["psi_tables"]) == 2
    assert header_of(out / "psi.csv") == "variable,label,psi"
    assert header_of(out / "trace.csv") == "iter,delta"
    assert (out / "psi.png").stat().st_size > 0


def test_solve_soft_nonconvergence_exits_one(disc, tmp_path):
    out = tmp_path / "out_s1"
    assert run(["solve-soft", disc, "--max-iters", "1",
                "--out", str(out)]) == 1
    assert read_result(out)["converged"] is False


# --- solve-ground ------------------------------------------------------------------

def test_solve_ground_negative_grid_min_parses(cont, tmp_path):
    out = tmp_path / "out_g"
    code = run(["solve-ground", cont, "--grid", "-6:6:61",
                "--out", str(out)])
    assert code == 0
    doc = read_result(out)
    assert doc["kind"] == "solve-ground"
    assert doc["grid"] == {"x_min": -6.0, "x_max": 6.0, "n": 61, "h": 0.2}
    assert doc["config"]["dt"] is not None and doc["config"]["dt"] > 0
    assert doc["energies"][0] == pytest.approx(0.5, abs=0.05)
    assert len(doc["fields"][0]) == 61
    assert header_of(out / "wavefunction.csv") == "particle,x,psi"
    assert (out / "wavefunction.png").stat().st_size > 0


def test_solve_ground_rejects_unstable_dt(cont, tmp_path, capsys):
    out = tmp_path / "out_g2"
    code = run(["solve-ground", cont, "--grid", "-6:6:61",
                "--dt", "10.0", "--out", str(out)])
    assert code == 2
    assert "error:" in capsys.readouterr().err
    assert not (out / "result.json").exists()


def test_solve_ground_thread_cap_is_bit_for_bit(cont, tmp_path, monkeypatch):
    rows = []
    for threads, name in (("1", "serial"), ("3", "threaded")):
        monkeypatch.setenv("COOPT_THREADS", threads)
        out = tmp_path / name
        assert run(["solve-ground", cont, "--grid", "-6:6:61",
                    "--out", str(out)]) == 0
        rows.append((out / "wavefunction.csv").read_bytes())
    assert rows[0] == rows[1]


# --- oracle ------------------------------------------------------------------------

def test_oracle_enumerate_and_compare_with_solver(disc, tmp_path, capsys):
    out_solve = tmp_path / "solve"
    out_oracle = tmp_path / "oracle"
    out_cmp = tmp_path / "cmp"
    assert run(["solve-discrete", disc, "--out", str(out_solve)]) == 0
    assert run(["oracle", "enumerate", disc, "--out", str(out_oracle)]) == 0
    doc = read_result(out_oracle)
    assert doc["kind"] == "oracle-enumerate"
    assert doc["optimal_assignment"] == [0, 0]
    assert doc["optimal_energy"] == 0.0
    assert doc["visited"] == 4
    capsys.readouterr()
    assert run(["compare", str(out_solve / "result.json"),
                str(out_oracle / "result.json"), "--out", str(out_cmp)]) == 0
    printed = capsys.readouterr().out
    assert "assignment_match: True" in printed
    assert "energy_delta: 0.0" in printed
    cmp_doc = json.loads((out_cmp / "compare.json").read_text())
    assert cmp_doc["assignment_match"] is True
    assert cmp_doc["energy_delta"] == 0.0


def test_oracle_eig_and_compare_with_ground(cont, tmp_path):
    out_g = tmp_path / "ground"
    out_e = tmp_path / "eig"
    out_cmp = tmp_path / "cmp"
    assert run(["solve-ground", cont, "--grid", "-6:6:61", "--tol", "1e-8",
                "--out", str(out_g)]) == 0
    assert run(["oracle", "eig", "--grid", "-6:6:61",
                "--potential", "harmonic", "--out", str(out_e)]) == 0
    doc = read_result(out_e)
    assert doc["kind"] == "oracle-eig"
    assert doc["eigenvalue"] == pytest.approx(0.5, abs=0.05)
    assert len(doc["eigenvector"]) == 61
    assert (out_e / "wavefunction.png").stat().st_size > 0
    assert run(["compare", str(out_g / "result.json"),
                str(out_e / "result.json"), "--out", str(out_cmp)]) == 0
    cmp_doc = json.loads((out_cmp / "compare.json").read_text())
    assert cmp_doc["field_overlaps"][0] == pytest.approx(1.0, abs=1e-6)
    assert abs(cmp_doc["energy_deltas"][0]) <= 1e-6


def test_oracle_eig_accepts_parameter_overrides(tmp_path):
    out = tmp_path / "eig_w2"
    assert run(["oracle", "eig", "--grid", "-5:5:81",
                "--potential", "harmonic", "--param", "omega=2.0",
                "--out", str(out)]) == 0
    # ground energy scales linearly with omega
    assert read_result(out)["eigenvalue"] == pytest.approx(1.0, abs=0.05)


# --- failure modes ------------------------------------------------------------------

def test_missing_problem_file_exits_two(tmp_path, capsys):
    code = run(["solve-discrete", str(tmp_path / "nope.json"),
                "--out", str(tmp_path / "o")])
    assert code == 2
    assert "not found" in capsys.readouterr().err


def test_invalid_json_reports_location(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text('{"variables": [,]}')
    assert run(["solve-discrete", str(p), "--out", str(tmp_path / "o")]) == 2
    assert "bad.json:1:16" in capsys.readouterr().err


def test_wrong_problem_kind_exits_two(cont, tmp_path, capsys):
    assert run(["solve-discrete", cont, "--out", str(tmp_path / "o")]) == 2
    assert "continuous problem" in capsys.readouterr().err


def test_usage_errors_exit_two(disc, capsys):
    assert run(["no-such-command"]) == 2
    assert run(["solve-discrete", disc, "--variant", "bogus"]) == 2
    assert run(["solve-ground", disc, "--grid", "1:2"]) == 2
    assert run(["oracle", "eig", "--grid", "-5:5:81", "--param", "omega"]) == 2
    capsys.readouterr()


def test_compare_rejects_unrelated_documents(tmp_path, capsys):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    a.write_text('{"kind": "solve-discrete"}')
    b.write_text('{"nokind": 1}')
    assert run(["compare", str(a), str(b), "--out", str(tmp_path / "o")]) == 2
    assert "error:" in capsys.readouterr().err
