"""Config parsing, the field-expression grammar, and end-to-end CLI runs."""

import json
import math
import subprocess
import sys
import textwrap
from fractions import Fraction

import numpy as np
import pytest

from qma.cli import (
    RunConfig,
    main,
    parse_config,
    parse_field_expr,
    render_config,
)
from qma.errors import ConfigError
from qma.fields import InvShift, normsq, quadform
from qma.hamilton import QMatrix, Quaternion

PI2 = math.pi**2


# ---------------------------------------------------------------------------
# config parsing and rendering


def test_parse_config_minimal():
    cfg = parse_config("[run]\ncommand = verify\n")
    assert cfg == RunConfig(command="verify")
    assert cfg.n == 1 and cfg.seed == 0 and cfg.jobs is None
    assert cfg.output_dir == "." and cfg.output_format == "both"


def test_parse_config_full_round_trip():
    text = textwrap.dedent("""\
        # full configuration
        [run]
        command = jensen
        n = 2
        seed = 42
        jobs = 4

        [fields]
        phi = normsq()
        v = x0^2 + 3/2

        [quadrature]
        sphere_pow = 8
        t_nodes = 24

        [params]
        r = 1.0
        radii = 0.5, 1.0
        center = 0, 0, 0, 0, 0, 0, 0, 0

        [tolerances]
        jensen = 0.001

        [output]
        dir = out
        format = csv
        """)
    cfg = parse_config(text)
    assert cfg.command == "jensen" and cfg.n == 2 and cfg.jobs == 4
    assert cfg.fields == {"phi": "normsq()", "v": "x0^2 + 3/2"}
    assert cfg.quadrature == {"sphere_pow": 8, "t_nodes": 24}
    assert cfg.params["radii"] == [0.5, 1.0]
    assert len(cfg.params["center"]) == 8
    assert cfg.tolerances == {"jensen": 0.001}
    assert cfg.output_format == "csv"
    # canonical text reproduces the same configuration exactly
    assert parse_config(render_config(cfg)) == cfg
    assert render_config(parse_config(render_config(cfg))) == render_config(cfg)


@pytest.mark.parametrize("text,match", [
    ("command = verify\n", "line 1: key outside any section"),
    ("[nope]\ncommand = verify\n", "line 1: unknown section"),
    ("[run\ncommand = verify\n", "line 1: malformed section header"),
    ("[run]\n[run]\ncommand = verify\n", "line 2: duplicate section"),
    ("[run]\ncommand = verify\nwhat = 3\n", "line 3: unknown key 'what'"),
    ("[run]\ncommand = verify\ncommand = ma\n", "line 3: duplicate key"),
    ("[run]\ncommand = verify\nn\n", "line 3: expected 'key = value'"),
    ("[run]\ncommand = verify\nn =\n", "line 3: empty value"),
    ("[run]\ncommand = verify\nn = two\n", "line 3: expected an integer"),
    ("[run]\ncommand = verify\n[params]\nr = abc\n", "line 4: expected a number"),
    ("[run]\ncommand = verify\n[params]\nradii = 1,,2\n", "line 4"),
    ("[run]\nn = 1\n", "missing required key 'command'"),
    ("[run]\ncommand = destroy\n", "unknown command 'destroy'"),
    ("[run]\ncommand = verify\nseed = -1\n", "unsigned 64-bit"),
    ("[run]\ncommand = verify\njobs = 0\n", "jobs must be a positive integer"),
    ("[run]\ncommand = verify\n[output]\nformat = yaml\n", "csv, json or both"),
    ("[run]\ncommand = verify\n[fields]\nnormsq = x0\n", "reserved"),
    ("[run]\ncommand = verify\n[fields]\nx3 = x0\n", "reserved"),
])
def test_parse_config_errors(text, match):
    with pytest.raises(ConfigError, match=match):
        parse_config(text)


# ---------------------------------------------------------------------------
# field expressions


def test_expr_polynomial_terms_are_exact():
    u = parse_field_expr("x0^2 - 1/4*x1 + 3", 1)
    assert u.terms == {
        (2, 0, 0, 0): Fraction(1),
        (0, 1, 0, 0): Fraction(-1, 4),
        (0, 0, 0, 0): Fraction(3),
    }


def test_expr_precedence_and_grouping():
    assert parse_field_expr("1 + 2 * 3", 1).terms == {(0, 0, 0, 0): Fraction(7)}
    assert parse_field_expr("(1 + 2) * 3", 1).terms == {(0, 0, 0, 0): Fraction(9)}
    u = parse_field_expr("2*x0^2", 1)
    assert u.terms == {(2, 0, 0, 0): Fraction(2)}
    v = parse_field_expr("(x0 + x1)^2", 1)
    assert v.terms == {(2, 0, 0, 0): Fraction(1), (1, 1, 0, 0): Fraction(2),
                       (0, 2, 0, 0): Fraction(1)}
    w = parse_field_expr("-x0 - -x1", 1)
    assert w.terms == {(1, 0, 0, 0): Fraction(-1), (0, 1, 0, 0): Fraction(1)}


def test_expr_decimal_literals_are_floats():
    u = parse_field_expr("0.5*x0", 1)
    assert u.terms == {(1, 0, 0, 0): 0.5}
    assert type(u.terms[(1, 0, 0, 0)]) is float


@pytest.mark.parametrize("n", [1, 2])
def test_expr_builtin_normsq(n):
    u = parse_field_expr("normsq()", n)
    assert u.terms == normsq(n).terms


def test_expr_builtin_invshift():
    u = parse_field_expr("invshift(0.5)", 1)
    assert isinstance(u, InvShift)
    x = np.array([1.0, 0.0, 0.0, 0.0])
    assert u.value(x) == pytest.approx(-1.0 / 1.5, rel=1e-15)


def test_expr_builtin_quadform():
    u = parse_field_expr("quadform([2, (0,1,0,0); (0,-1,0,0), 3])", 2)
    a = QMatrix([[Quaternion(2), Quaternion(0, 1, 0, 0)],
                 [Quaternion(0, -1, 0, 0), Quaternion(3)]])
    assert u.terms == quadform(a).terms
    v = parse_field_expr("quadform([3/2])", 1)
    assert v.terms == quadform(QMatrix([[Quaternion(Fraction(3, 2))]])).terms


def test_expr_composite_field_evaluates():
    u = parse_field_expr("normsq() + invshift(1.0)", 1)
    x = np.array([1.0, 1.0, 0.0, 0.0])
    assert u.value(x) == pytest.approx(2.0 - 1.0 / 3.0, rel=1e-14)


@pytest.mark.parametrize("src,match", [
    ("", "unexpected end of expression"),
    ("x0 +", "unexpected end"),
    ("x0 / 2", "only allowed inside rational literals"),
    ("x4", "out of range"),
    ("x0^17", "exponent too large"),
    ("x0^-1", "expected an integer"),
    ("blob(1)", "unknown name"),
    ("(x0 + x1", "expected '\\)'"),
    ("x0 x1", "unexpected trailing text"),
    ("1/0", "zero denominator"),
    ("quadform([1, 0; 2])", "ragged matrix rows"),
    ("quadform([(0,1,0,0)])", "column"),
    ("invshift(1)?", "trailing"),
])
def test_expr_errors_carry_column(src, match):
    with pytest.raises(ConfigError, match=match):
        parse_field_expr(src, 1)


def test_expr_variable_range_scales_with_n():
    u = parse_field_expr("x7", 2)
    assert u.terms == {(0, 0, 0, 0, 0, 0, 0, 1): Fraction(1)}
    with pytest.raises(ConfigError, match="out of range"):
        parse_field_expr("x8", 2)


# ---------------------------------------------------------------------------
# end-to-end command runs


def _write(tmp_path, name, body):
    p = tmp_path / name
    p.write_text(textwrap.dedent(body))
    return p


def _run(cmd, cfg_path, out_dir, *extra):
    return main([cmd, "--config", str(cfg_path), "--out", str(out_dir), *extra])


def test_cmd_verify(tmp_path, capsys):
    cfg = _write(tmp_path, "verify.ini", """\
        [run]
        command = verify
        n = 1
        seed = 7
        """)
    code = _run("verify", cfg, tmp_path / "out")
    lines = capsys.readouterr().out.splitlines()
    assert code == 0
    assert lines[-1] == "status: ok"

    csv_text = (tmp_path / "out" / "verify.csv").read_text()
    rows = csv_text.splitlines()
    assert rows[0] == "check,n,value,bound,status"
    assert len(rows) == 13  # header + 12 checks
    assert all(r.endswith(",pass") for r in rows[1:])

    report = json.loads((tmp_path / "out" / "verify.json").read_text())
    assert report["schema_version"] == 1
    assert report["passed"] is True
    assert report["seed"] == 7
    assert report["summary"] == {"checks": 12}
    names = [row["check"] for row in report["rows"]]
    assert "embedding-multiplicative-quaternion" in names
    assert "moore-matching-equivalence" in names


def test_cmd_ma(tmp_path):
    cfg = _write(tmp_path, "ma.ini", """\
        [run]
        command = ma
        n = 1

        [fields]
        u = normsq()
        """)
    assert _run("ma", cfg, tmp_path / "out") == 0
    report = json.loads((tmp_path / "out" / "ma.json").read_text())
    (row,) = report["rows"]
    assert row["field"] == "u"
    assert row["min_density"] == pytest.approx(8.0, rel=1e-12)
    assert row["max_density"] == pytest.approx(8.0, rel=1e-12)
    assert report["summary"]["psh"] == {"u": True}


def test_cmd_fundamental(tmp_path):
    cfg = _write(tmp_path, "fund.ini", """\
        [run]
        command = fundamental
        n = 1

        [params]
        r = 1.0
        eps = 0.1, 0.01
        """)
    assert _run("fundamental", cfg, tmp_path / "out") == 0
    report = json.loads((tmp_path / "out" / "fundamental.json").read_text())
    assert report["summary"]["limit"] == pytest.approx(4 * PI2, rel=1e-14)
    for row in report["rows"]:
        assert row["status"] == "pass"
        assert row["rel_err"] <= 1e-6
        assert row["mass_quadrature"] < report["summary"]["limit"]


def test_cmd_lelong(tmp_path):
    cfg = _write(tmp_path, "lelong.ini", """\
        [run]
        command = lelong
        n = 1

        [fields]
        u = normsq()

        [params]
        radii = 0.25, 0.5, 1.0
        """)
    assert _run("lelong", cfg, tmp_path / "out") == 0
    report = json.loads((tmp_path / "out" / "lelong.json").read_text())
    assert [row["radius"] for row in report["rows"]] == [0.25, 0.5, 1.0]
    assert all(row["status"] == "pass" for row in report["rows"])
    assert report["summary"]["monotone_violations"] == []
    assert math.isfinite(report["summary"]["nu"])


def test_cmd_jensen(tmp_path):
    cfg = _write(tmp_path, "jensen.ini", """\
        [run]
        command = jensen
        n = 1

        [fields]
        phi = normsq()
        v = normsq()

        [params]
        r = 1.0

        [quadrature]
        t_nodes = 24
        """)
    assert _run("jensen", cfg, tmp_path / "out") == 0
    report = json.loads((tmp_path / "out" / "jensen.json").read_text())
    by_name = {row["quantity"]: row for row in report["rows"]}
    assert by_name["lhs"]["value"] == pytest.approx(4 * PI2 / 3, rel=1e-8)
    assert by_name["residual_spatial"]["status"] == "pass"
    assert by_name["residual_layered"]["status"] == "pass"
    assert set(report["summary"]["errors"]) == {
        "boundary", "interior", "spatial", "layered"}


def test_cmd_boundary(tmp_path):
    cfg = _write(tmp_path, "boundary.ini", """\
        [run]
        command = boundary
        n = 1

        [fields]
        phi = normsq()

        [params]
        r = 1.0
        """)
    assert _run("boundary", cfg, tmp_path / "out") == 0
    report = json.loads((tmp_path / "out" / "boundary.json").read_text())
    by_name = {row["quantity"]: row for row in report["rows"]}
    assert by_name["boundary_mass"]["value"] == pytest.approx(4 * PI2, rel=1e-9)
    assert by_name["mass_residual"]["status"] == "pass"
    assert by_name["density_negativity"]["value"] == 0.0


def test_cmd_cln(tmp_path):
    cfg = _write(tmp_path, "cln.ini", """\
        [run]
        command = cln
        n = 1

        [fields]
        u = normsq()

        [params]
        trials = 2

        [quadrature]
        sup_samples = 1024
        """)
    assert _run("cln", cfg, tmp_path / "out") == 0
    report = json.loads((tmp_path / "out" / "cln.json").read_text())
    assert len(report["rows"]) == 3  # configured + 2 trials
    assert report["rows"][0]["case"] == "configured"
    assert report["rows"][0]["ratio"] == pytest.approx(PI2 / 4, rel=1e-8)
    assert all(math.isfinite(row["ratio"]) for row in report["rows"])
    assert all(row["status"] == "pass" for row in report["rows"])


# ---------------------------------------------------------------------------
# exit codes


def test_exit_2_on_tolerance_failure(tmp_path, capsys):
    cfg = _write(tmp_path, "tight.ini", """\
        [run]
        command = fundamental
        n = 1

        [params]
        eps = 0.01

        [tolerances]
        mass = 0.0
        """)
    code = _run("fundamental", cfg, tmp_path / "out")
    assert code == 2
    out = capsys.readouterr().out
    assert out.splitlines()[-1] == "status: tolerance failure"
    # outputs are still written on tolerance failure
    report = json.loads((tmp_path / "out" / "fundamental.json").read_text())
    assert report["passed"] is False


def test_exit_1_on_config_error(tmp_path, capsys):
    cfg = _write(tmp_path, "bad.ini", """\
        [run]
        command = verify
        bogus = 1
        """)
    assert _run("verify", cfg, tmp_path / "out") == 1
    err = capsys.readouterr().err
    assert err.startswith("qma: error:")
    assert "line 3" in err
    assert not (tmp_path / "out").exists()


def test_exit_1_on_missing_config(tmp_path, capsys):
    assert _run("verify", tmp_path / "nope.ini", tmp_path / "out") == 1
    assert "cannot read config" in capsys.readouterr().err


def test_exit_1_on_command_mismatch(tmp_path, capsys):
    cfg = _write(tmp_path, "v.ini", "[run]\ncommand = verify\n")
    assert _run("ma", cfg, tmp_path / "out") == 1
    assert "config is for 'verify'" in capsys.readouterr().err


def test_exit_1_on_field_dimension_mismatch(tmp_path, capsys):
    cfg = _write(tmp_path, "mismatch.ini", """\
        [run]
        command = ma
        n = 1

        [fields]
        u = quadform([1, 0; 0, 1])
        """)
    assert _run("ma", cfg, tmp_path / "out") == 1
    assert "lives on H^2" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# determinism and run options


def test_identical_configs_are_byte_identical(tmp_path):
    body = """\
        [run]
        command = ma
        n = 1
        seed = 11

        [fields]
        u = normsq()
        v = x0^2 + x1^2
        """
    cfg_a = _write(tmp_path, "a.ini", body)
    cfg_b = _write(tmp_path, "b.ini", body)
    assert _run("ma", cfg_a, tmp_path / "out_a") == 0
    assert _run("ma", cfg_b, tmp_path / "out_b") == 0
    for name in ("ma.csv", "ma.json"):
        a = (tmp_path / "out_a" / name).read_bytes()
        b = (tmp_path / "out_b" / name).read_bytes()
        assert a == b


def test_verify_runs_are_byte_identical(tmp_path):
    cfg = _write(tmp_path, "v.ini", "[run]\ncommand = verify\nn = 1\nseed = 3\n")
    assert _run("verify", cfg, tmp_path / "one") == 0
    assert _run("verify", cfg, tmp_path / "two") == 0
    assert ((tmp_path / "one" / "verify.csv").read_bytes()
            == (tmp_path / "two" / "verify.csv").read_bytes())
    assert ((tmp_path / "one" / "verify.json").read_bytes()
            == (tmp_path / "two" / "verify.json").read_bytes())


def test_seed_override_flag(tmp_path):
    cfg = _write(tmp_path, "ma.ini", """\
        [run]
        command = ma
        n = 1
        seed = 0

        [fields]
        u = x0^2
        """)
    assert _run("ma", cfg, tmp_path / "out", "--seed", "123") == 0
    report = json.loads((tmp_path / "out" / "ma.json").read_text())
    assert report["seed"] == 123


def test_jobs_precedence_and_invariance(tmp_path, monkeypatch):
    cfg = _write(tmp_path, "ma.ini", """\
        [run]
        command = ma
        n = 1

        [fields]
        u = normsq()
        """)
    monkeypatch.setenv("QMA_JOBS", "3")
    assert _run("ma", cfg, tmp_path / "env") == 0
    report = json.loads((tmp_path / "env" / "ma.json").read_text())
    assert report["jobs"] == 3
    # the flag wins over the environment
    assert _run("ma", cfg, tmp_path / "flag", "--jobs", "5") == 0
    report = json.loads((tmp_path / "flag" / "ma.json").read_text())
    assert report["jobs"] == 5
    # worker count never changes the numbers
    assert ((tmp_path / "env" / "ma.csv").read_bytes()
            == (tmp_path / "flag" / "ma.csv").read_bytes())


def test_invalid_jobs_env(tmp_path, monkeypatch, capsys):
    cfg = _write(tmp_path, "v.ini", "[run]\ncommand = verify\n")
    monkeypatch.setenv("QMA_JOBS", "lots")
    assert _run("verify", cfg, tmp_path / "out") == 1
    assert "QMA_JOBS" in capsys.readouterr().err


def test_module_entry_point(tmp_path):
    cfg = _write(tmp_path, "b.ini", """\
        [run]
        command = boundary
        n = 1

        [fields]
        phi = normsq()

        [params]
        r = 0.25

        [output]
        format = json
        """)
    proc = subprocess.run(
        [sys.executable, "-m", "qma.cli", "boundary",
         "--config", str(cfg), "--out", str(tmp_path / "out")],
        capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert proc.stdout.strip().endswith("status: ok")
    assert (tmp_path / "out" / "boundary.json").exists()
    assert not (tmp_path / "out" / "boundary.csv").exists()
