import json
import shutil
from pathlib import Path

import pytest

import radcoef
from radcoef.cli import (EXIT_CODES, EXIT_USAGE, EXIT_VERIFY_FAILED, JobConfig, main,
                         parse_job_text, run_batch)
from radcoef.frontend.expr import Declarations, parse_equation

from conftest import GENUS_ONE, HYPERBOLA, QUINTIC, SQRT_PAIR

FIXTURES = Path(radcoef.__file__).parent / "fixtures"

REPORT_KEYS = {"version", "status", "tower", "parametrization", "inverse", "transformed",
               "back_substitution", "tracing", "oracle", "normalization_unit", "timings"}


def _json(capsys, argv):
    code = main(argv + ["--json", "-"])
    return code, json.loads(capsys.readouterr().out)


@pytest.mark.parametrize("eq,code", [(SQRT_PAIR, 0), (GENUS_ONE, 10), (QUINTIC, 11)])
def test_exit_codes(capsys, eq, code):
    got, report = _json(capsys, ["transform", "--eq", eq, "--no-oracle"])
    assert got == code == EXIT_CODES[report["status"]]


def test_parse_error_is_usage_error(capsys):
    assert main(["transform", "--eq", "y'' +"]) == EXIT_USAGE
    assert "error" in capsys.readouterr().err


def test_report_keys_and_oracle(capsys):
    code, report = _json(capsys, ["transform", "--eq", SQRT_PAIR])
    assert code == 0 and set(report) == REPORT_KEYS
    assert report["timings"] is None
    assert all(r["passed"] for r in report["oracle"].values())
    assert report["back_substitution"] == ["sqrt(x) + sqrt(x + 1)"]


def test_json_output_is_deterministic(capsys):
    argv = ["transform", "--eq", HYPERBOLA, "--params", "a,b,c", "--seed", "3"]
    assert _json(capsys, argv) == _json(capsys, argv)
    main(argv + ["--json", "-"])
    first = capsys.readouterr().out
    main(argv + ["--json", "-"])
    assert capsys.readouterr().out == first


def test_transformed_text_reparses(capsys):
    _, report = _json(capsys, ["transform", "--eq", HYPERBOLA, "--params", "a,b,c",
                               "--no-oracle"])
    tr = report["transformed"]
    decl = Declarations(tuple(tr["variables"]), tuple(tr["unknowns"]), ("a", "b", "c"))
    for eq in tr["equations"]:
        parse_equation(eq["text"], decl)


def test_human_summary(capsys):
    assert main(["transform", "--eq", SQRT_PAIR, "--no-oracle"]) == 0
    out = capsys.readouterr().out
    assert "status: Transformed" in out and "back-substitution: z = " in out


def test_verify_pass_and_fail(capsys):
    ok = main(["verify", "--file", str(FIXTURES / "cone_eikonal.eq"), "--expect",
               "diff(U,z1)^2*(z1^2+1)^2 + 4*z2^2*diff(U,z2)^2 - 4*z2", "--json", "-"])
    report = json.loads(capsys.readouterr().out)
    assert ok == 0 and report["verify"]["passed"]
    bad = main(["verify", "--file", str(FIXTURES / "cone_eikonal.eq"), "--expect",
                "diff(U,z1)^2 - 4*z2", "--json", "-"])
    assert bad == EXIT_VERIFY_FAILED
    capsys.readouterr()


def test_verify_identity_substitution(capsys):
    assert main(["verify", "--eq", "y'' + x*y", "--subst", "x=z"]) == 0


def test_job_header_parsing():
    cfg = parse_job_text("#vars: x1, x2\n#unknowns: u\n# a comment\ndiff(u,x1) - x2\n")
    assert (tuple(cfg.variables), tuple(cfg.unknowns)) == (("x1", "x2"), ("u",))
    assert cfg.equations == ["diff(u,x1) - x2"]


def test_batch_over_fixtures(tmp_path):
    for p in FIXTURES.glob("*.eq"):
        shutil.copy(p, tmp_path)
    for p in (FIXTURES / "extra").glob("*.eq"):
        shutil.copy(p, tmp_path)
    out = tmp_path / "out"
    code, rows = run_batch(tmp_path, out, JobConfig([], oracle=False))
    assert code == 0
    statuses = sorted(r["status"] for r in rows)
    assert statuses == ["NoAnswer", "ProvenImpossible"] + ["Transformed"] * 5
    assert len(list(out.glob("*.json"))) == 7


def test_batch_empty_directory(tmp_path, capsys):
    assert main(["batch", str(tmp_path)]) == 0
    assert "0 job(s)" in capsys.readouterr().out
