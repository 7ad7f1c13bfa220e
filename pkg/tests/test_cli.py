"""Tests for the command-line interface and JSON reports."""

import json

import pytest

from fqft.cli import main
from fqft.deformation import FormalTheory, theory_to_json


def run_cli(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, json.loads(out)


def test_verify_cutting_exact(capsys):
    code, report = run_cli(capsys, ["verify-cutting", "--lmax", "2"])
    assert code == 0
    assert report["schema_version"] == 1
    assert report["passed"] is True
    assert report["results"]["exact_zero"] is True
    assert report["wall_time_s"] is None


def test_verify_cutting_float(capsys):
    code, report = run_cli(
        capsys, ["verify-cutting", "--lmax", "3", "--arithmetic", "float64"]
    )
    assert code == 0
    assert report["results"]["max_residual"] < 1e-12


def test_ope_report(capsys):
    code, report = run_cli(capsys, ["ope", "--lmax", "4"])
    assert code == 0
    rows = report["results"]["rows"]
    singular = [r for r in rows if r["exponents"][0] < 0 and r["coefficient"] != "0"]
    assert len(singular) == 1
    assert singular[0]["exponents"] == [-2, 0]
    assert report["results"]["marginal_constants"]["K"]["jjbar,jjbar"] == "1"


def test_beta_free_boson(capsys):
    code, report = run_cli(capsys, ["beta", "--lmax", "3"])
    assert code == 0
    assert report["results"]["zero"] is True


def test_beta_formal_backend(capsys, tmp_path):
    th = FormalTheory(
        [("1", 0, 0), ("e", 1, 1)],
        [("e", "e", "e", (), (), 1)],
    )
    path = tmp_path / "theory.json"
    path.write_text(theory_to_json(th))
    code, report = run_cli(
        capsys, ["beta", "--backend", "formal", "--theory", str(path)]
    )
    assert code == 0
    assert report["results"]["zero"] is False
    assert report["results"]["beta"]["e"]["gc[e]*gc[e]"] == "1/2"


def test_qm_report(capsys):
    code, report = run_cli(capsys, ["qm", "--dim", "4", "--seed", "7"])
    assert code == 0
    assert all(d < 1e-10 for d in report["results"]["oracle_diffs"])
    assert report["results"]["cutting_residual"] < 1e-12


def test_all_aggregates(capsys):
    code, report = run_cli(capsys, ["all", "--lmax", "2", "--timing"])
    assert code == 0
    assert set(report["results"]) == {"verify-cutting", "ope", "beta", "qm"}
    assert all(v["passed"] for v in report["results"].values())
    assert report["wall_time_s"] > 0


def test_report_determinism(capsys):
    main(["ope", "--lmax", "3"])
    first = capsys.readouterr().out
    main(["ope", "--lmax", "3"])
    second = capsys.readouterr().out
    assert first == second


def test_out_flag(tmp_path, capsys):
    path = tmp_path / "report.json"
    code = main(["verify-cutting", "--lmax", "2", "--out", str(path)])
    assert code == 0
    assert capsys.readouterr().out == ""
    report = json.loads(path.read_text())
    assert report["command"] == "verify-cutting"


def test_tolerance_override(capsys):
    # absurdly tight cutting tolerance in float mode fails the check -> exit 1
    code = main(
        [
            "verify-cutting",
            "--lmax",
            "3",
            "--arithmetic",
            "float64",
            "--tolerance",
            "cutting=1e-300",
        ]
    )
    capsys.readouterr()
    assert code == 1


def test_bad_flags_exit_2():
    with pytest.raises(SystemExit) as err:
        main(["frobnicate"])
    assert err.value.code == 2
    with pytest.raises(SystemExit) as err:
        main(["ope", "--tolerance", "nonsense"])
    assert err.value.code == 2
    with pytest.raises(SystemExit) as err:
        main(["ope", "--tolerance", "cutting=-1"])
    assert err.value.code == 2
    with pytest.raises(SystemExit) as err:
        main(["ope", "--lmax", "-1"])
    assert err.value.code == 2
