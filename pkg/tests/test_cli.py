import json
import subprocess
import sys

import pytest

from conftest import FOUR_VAR_DIMACS
from gradsat.cdcl import assumptions_as_units
from gradsat.cli import main
from gradsat.cnf import parse_dimacs, parse_solution, verify_model

UNSAT_PAIR = "p cnf 1 2\n1 0\n-1 0\n"


@pytest.fixture
def four_var_file(tmp_path):
    p = tmp_path / "four_var.cnf"
    p.write_text(FOUR_VAR_DIMACS)
    return p


def test_solve_sat(four_var_file, capsys):
    assert main(["solve", str(four_var_file), "--candidates", "8", "--workers", "2"]) == 10
    out = capsys.readouterr().out
    assert out.startswith("s SATISFIABLE")
    status, model = parse_solution(out, 4)
    assert verify_model(parse_dimacs(FOUR_VAR_DIMACS), model)


def test_solve_unseeded_only(four_var_file, capsys):
    assert main(["solve", str(four_var_file), "--unseeded-only"]) == 10


def test_solve_unsat(tmp_path, capsys):
    p = tmp_path / "u.cnf"
    p.write_text(UNSAT_PAIR)
    assert main(["solve", str(p), "--workers", "2", "--max-iters", "30",
                 "--executor", "thread"]) == 20
    assert capsys.readouterr().out.strip() == "s UNSATISFIABLE"


def test_gradient_only_cannot_prove_unsat(tmp_path, capsys):
    p = tmp_path / "u.cnf"
    p.write_text(UNSAT_PAIR)
    assert main(["solve", str(p), "--gradient-only", "--max-iters", "30"]) == 0
    assert "s UNKNOWN" in capsys.readouterr().out


def test_exclusive_modes(four_var_file):
    with pytest.raises(SystemExit):
        main(["solve", str(four_var_file), "--gradient-only", "--unseeded-only"])


def test_outputs_written(four_var_file, tmp_path, capsys):
    trace, stats = tmp_path / "t.csv", tmp_path / "s.json"
    parts, matrix = tmp_path / "p.json", tmp_path / "m.mtx"
    main(["solve", str(four_var_file), "--candidates", "4", "--workers", "2",
          "--trace", str(trace), "--json-stats", str(stats),
          "--dump-partials", str(parts), "--dump-matrix", str(matrix)])
    assert trace.read_text().startswith("iteration,lr,loss,best_fraction")
    obj = json.loads(stats.read_text())
    assert obj["schema"] == 1 and obj["status"] == "SAT"
    assert len(json.loads(parts.read_text())) == 4
    assert matrix.read_text().startswith("%%MatrixMarket matrix coordinate pattern")


def test_bad_file(tmp_path, capsys):
    p = tmp_path / "bad.cnf"
    p.write_text("p cnf 2 1\n1 5 0\n")
    assert main(["solve", str(p)]) == 1
    assert "gradsat:" in capsys.readouterr().err
    assert main(["solve", str(tmp_path / "missing.cnf")]) == 1


def test_invalid_counts(four_var_file):
    assert main(["solve", str(four_var_file), "--workers", "0"]) == 2


def test_generate_and_bench(tmp_path, capsys):
    inst = tmp_path / "inst"
    assert main(["generate", str(inst), "--count", "2", "--vars", "30", "--planted"]) == 0
    assert len(list(inst.glob("*.cnf"))) == 2
    out = tmp_path / "bench"
    assert main(["bench", str(inst), "--timeout", "20", "--workers", "2", "--candidates", "8",
                 "--executor", "thread", "--max-iters", "30", "--out", str(out)]) == 0
    assert (out / "report.json").exists() and (out / "curves.csv").exists()
    assert "PAR2" in capsys.readouterr().out
    assert main(["bench", str(tmp_path / "nothing")]) == 1


def test_external_solver_adapter(tmp_path):
    """Seeds can be handed to any DIMACS solver as unit clauses; here the CLI itself."""
    f = parse_dimacs(FOUR_VAR_DIMACS)
    for assume, code in (([(1, True)], 10), ([(1, False), (2, False)], 20)):
        p = tmp_path / "seeded.cnf"
        p.write_text(assumptions_as_units(f, assume).to_dimacs())
        proc = subprocess.run([sys.executable, "-m", "gradsat", "solve", str(p),
                               "--unseeded-only"], capture_output=True, text=True)
        assert proc.returncode == code
        if code == 10:
            _, model = parse_solution(proc.stdout, 4)
            assert model[1] and verify_model(f, model)
