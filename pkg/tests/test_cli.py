import json
import math
import subprocess
import sys

import pytest
from hypothesis import given, strategies as st

from bethe_surface import cli
from bethe_surface.acceptance import CriterionResult
from bethe_surface.errors import ValidationError

TWO_POLE = json.dumps({"zeros": [[0.5, 0.28867513459481287], [0.5, -0.28867513459481287], {"inf": True}],
                       "poles": [[0, 0], [1, 0]], "orders": [1, 1]})


def run(capsys, *argv):
    code = cli.run(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None), out


@pytest.mark.parametrize("text,value", [
    ("i", 1j), ("-i", -1j), ("1+2i", 1 + 2j), ("3.5", 3.5), ("2j", 2j), ("-0.5 - 1.5i", -0.5 - 1.5j),
])
def test_parse_complex_strings(text, value):
    assert cli.parse_complex(text) == value


def test_parse_complex_pairs_and_infinity():
    assert cli.parse_complex([1, -2]) == 1 - 2j
    assert math.isinf(cli.parse_complex({"inf": True}).real)
    with pytest.raises(ValidationError):
        cli.parse_complex("abc")


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_dumps_round_trips_floats_exactly(x):
    assert json.loads(cli.dumps(x)) == x


def test_dumps_sorts_keys_and_encodes_complex():
    text = cli.dumps(cli.to_plain({"b": 1j, "a": [complex("inf"), -0.0]}))
    assert text == '{"a":[{"inf":true},0.0],"b":[0.0,1.0]}'


def test_check_reports_sb_solution(capsys):
    code, out, _ = run(capsys, "check", "--config", TWO_POLE)
    assert code == 0 and out["ok"] and out["results"]["satisfies_sb"]
    assert out["diagnostics"]["subcommand"] == "check"


def test_output_is_deterministic(capsys):
    first = run(capsys, "tau-yy", "--config", TWO_POLE)[2]
    second = run(capsys, "tau-yy", "--config", TWO_POLE)[2]
    assert first == second


def test_config_from_file(tmp_path, capsys):
    p = tmp_path / "cfg.json"
    p.write_text(TWO_POLE)
    code, out, _ = run(capsys, "accessory", "--config", str(p))
    assert code == 0 and abs(out["results"]["H"][0][0] - 4) < 1e-9


def test_solve_genus_zero(capsys):
    code, out, _ = run(capsys, "solve", "--poles", "[[0,0],[1,0]]", "--orders", "[1,1]",
                       "--fixed-zeros", '[{"inf":true}]', "--n-seeds", "16")
    assert code == 0 and len(out["results"]["solutions"]) == 1


def test_theta_with_characteristic(capsys):
    code, out, _ = run(capsys, "theta", "--omega", '[["i"]]', "--z", "[0]", "--char",
                       '{"beta1":[0.5],"beta2":[0.5]}')
    assert code == 0 and out["results"]["parity"] == 1 and abs(out["results"]["value"][0]) < 1e-13


def test_potential_from_map(capsys):
    code, out, _ = run(capsys, "potential", "--map", '{"numerator":[0,0,0,1]}', "--x", "[1]")
    assert code == 0 and abs(out["results"]["u"][0][0] - 2) < 1e-9


def test_periods_of_a_curve(capsys):
    code, out, _ = run(capsys, "periods", "--curve", "[-1,0,0,0,0,0,1]")
    assert code == 0 and len(out["results"]["Omega"]) == 2


def test_monodromy_of_flagship_map(capsys):
    code, out, _ = run(capsys, "monodromy", "--map", '{"numerator":[1],"denominator":[-1,0,0,1]}')
    assert code == 0 and out["results"]["trivial"]


def test_validation_error_exit_code(capsys):
    code, out, _ = run(capsys, "check", "--config", '{"zeros":[[1,0]],"poles":[[0,0]],"orders":[1]}')
    assert code == cli.EXIT_VALIDATION and out["error"]["type"] == "InconsistentProfile"


def test_numerical_failure_exit_code(capsys):
    code, out, _ = run(capsys, "solve", "--poles", "[[0,0]]", "--orders", "[1]", "--n-seeds", "4")
    assert code == cli.EXIT_NUMERICAL and not out["ok"]


@pytest.mark.parametrize("argv", [["bogus"], ["theta", "--omega", "[[1]]"], ["check", "--tol", "-1"]])
def test_usage_errors(capsys, argv):
    assert cli.run(argv) == cli.EXIT_USAGE


def test_verify_suite_quick_subset(capsys):
    code, out, _ = run(capsys, "verify-suite", "--level", "quick", "--only", "1,5")
    assert code == 0 and [c["number"] for c in out["results"]["criteria"]] == [1, 5]


def test_verify_suite_fails_on_gating_failure(capsys, monkeypatch):
    import bethe_surface.acceptance as acc
    fake = [CriterionResult(1, "x", False, {}, 0.0, True), CriterionResult(10, "y", False, {}, 0.0, False)]
    monkeypatch.setattr(acc, "run_all", lambda level, only: fake)
    code, out, _ = run(capsys, "verify-suite")
    assert code == cli.EXIT_FAILED and not out["ok"]


def test_stretch_failure_alone_does_not_fail(capsys, monkeypatch):
    import bethe_surface.acceptance as acc
    fake = [CriterionResult(10, "y", False, {}, 0.0, False)]
    monkeypatch.setattr(acc, "run_all", lambda level, only: fake)
    assert run(capsys, "verify-suite")[0] == 0


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "bethe_surface", "theta", "--omega", '[["i"]]', "--z", "[0]"],
                         capture_output=True, text=True, timeout=120)
    assert res.returncode == 0 and json.loads(res.stdout)["ok"]
