"""Config-driven command line front end.

Usage::

    qma <command> --config <path> [--out <dir>] [--seed <u64>] [--jobs <k>]

Commands
--------
verify       algebraic identity suite (embedding, duality, closedness, ...)
ma           density/positivity report for the configured potentials
fundamental  regularized fundamental-solution masses vs. closed forms
lelong       normalized-mass radius profile and density at a point
jensen       boundary/interior balance for an exhaustion and a potential
boundary     boundary-measure mass identity and density floor
cln          mass-over-sup-norm ratios on nested balls

Each run reads one config file, evaluates every tolerance it declares, and
writes ``<command>.csv`` / ``<command>.json`` into the output directory
(atomically; identical configs produce byte-identical files).  Exit status:
0 when every evaluated tolerance holds, 2 when at least one fails, 1 on a
config or runtime error.

Config format
-------------
An INI-like text format with ``#`` comments and six known sections::

    [run]          command, n, seed, jobs
    [fields]       <name> = <field expression>
    [quadrature]   sphere_pow, radial_nodes, t_nodes, delta, peak_scale,
                   sup_samples
    [params]       r, r1, r2, level, radii, eps, center, inner_radius,
                   outer_radius, trials
    [tolerances]   identity, moore, mass, jensen, jensen_layered, boundary,
                   positivity, monotonicity, cln
    [output]       dir, format (csv | json | both)

Unknown sections or keys are rejected with the offending line number.
``parse_config`` and ``render_config`` are exact inverses on valid configs.

Field expressions
-----------------
A small exact grammar over the coordinates ``x0 .. x{4n-1}``::

    expr    :=  term (('+' | '-') term)*
    term    :=  factor ('*' factor)*
    factor  :=  unary ('^' INT)?
    unary   :=  '-' unary | atom
    atom    :=  NUMBER | RATIONAL | VAR | CALL | '(' expr ')'
    CALL    :=  normsq() | invshift(NUMBER) | quadform(MATRIX)
    MATRIX  :=  '[' row (';' row)* ']'         rows of scalar or
    entry   :=  RATIONAL | '(' a, b, c, d ')'  4-component entries

Integer and rational literals (``3``, ``3/2``) stay exact; decimal literals
are floats.  ``quadform`` entries must form a matrix equal to its conjugate
transpose.  ``/`` is only valid inside rational literals.
"""

import argparse
import dataclasses
import itertools
import json
import math
import os
import re
import sys
import tempfile
from fractions import Fraction
from pathlib import Path

import numpy as np

from .calculus import closedness_residual, delta_matrix, laplace, nabla, z_field
from .currents import RegularizedCurrent, cln_ratio, lelong_number
from .errors import ConfigError, QmaError
from .exterior import beta, positivity_test, random_strongly_positive, top_coefficient
from .fields import (Polynomial, ScalarField, field_product, field_scale,
                     field_sum, invshift, normsq, quadform)
from .hamilton import (QMatrix, Quaternion, jmatrix, moore_det,
                       random_hyperhermitian, random_qmatrix, random_quaternion,
                       tau)
from .monge_ampere import (fundamental_mass_exact, fundamental_mass_limit_coefficient,
                           ma_density, mixed_ma, moore_equivalence_residual, psh_test)
from .potential import boundary_mass_residual, boundary_measure_density, lelong_jensen
from .quadrature import StarShapedRule, radial_ball_integral

SCHEMA_VERSION = 1

COMMANDS = ("verify", "ma", "fundamental", "lelong", "jensen", "boundary", "cln")

# typed key tables; every config key must appear here (or be a field name)
_RUN_KEYS = {"command": "str", "n": "int", "seed": "int", "jobs": "int"}
_QUAD_KEYS = {"sphere_pow": "int", "radial_nodes": "int", "t_nodes": "int",
              "delta": "float", "peak_scale": "float", "sup_samples": "int"}
_PARAM_KEYS = {"r": "float", "r1": "float", "r2": "float", "level": "float",
               "radii": "floats", "eps": "floats", "center": "floats",
               "inner_radius": "float", "outer_radius": "float", "trials": "int"}
_TOL_KEYS = {"identity": "float", "moore": "float", "mass": "float",
             "jensen": "float", "jensen_layered": "float", "boundary": "float",
             "positivity": "float", "monotonicity": "float", "cln": "float"}
_OUT_KEYS = {"dir": "str", "format": "str"}

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_INT_RE = re.compile(r"[+-]?\d+\Z")
_RESERVED_FIELD_NAMES = {"normsq", "invshift", "quadform"}
_VAR_NAME_RE = re.compile(r"x\d+\Z")


@dataclasses.dataclass
class RunConfig:
    """Parsed run configuration; dictionaries hold only typed values."""

    command: str
    n: int = 1
    seed: int = 0
    jobs: int = None
    fields: dict = dataclasses.field(default_factory=dict)
    quadrature: dict = dataclasses.field(default_factory=dict)
    params: dict = dataclasses.field(default_factory=dict)
    tolerances: dict = dataclasses.field(default_factory=dict)
    output_dir: str = "."
    output_format: str = "both"


# ---------------------------------------------------------------------------
# config parsing / rendering


def _convert(kind, text, where):
    if kind == "str":
        return text
    if kind == "int":
        if not _INT_RE.match(text):
            raise ConfigError(f"{where}: expected an integer, got {text!r}")
        return int(text)
    if kind == "float":
        try:
            v = float(Fraction(text)) if "/" in text else float(text)
        except (ValueError, ZeroDivisionError):
            raise ConfigError(f"{where}: expected a number, got {text!r}")
        if not math.isfinite(v):
            raise ConfigError(f"{where}: value must be finite")
        return v
    if kind == "floats":
        parts = [p.strip() for p in text.split(",")]
        if not all(parts):
            raise ConfigError(f"{where}: expected a comma-separated list of numbers")
        return [_convert("float", p, where) for p in parts]
    raise AssertionError(kind)


def parse_config(text):
    """Parse config text into a RunConfig; raise ConfigError with the line."""
    raw = {name: {} for name in ("run", "fields", "quadrature", "params",
                                 "tolerances", "output")}
    current = None
    seen_sections = set()
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("["):
            m = re.match(r"\[([a-z_]+)\]\Z", line)
            if not m:
                raise ConfigError(f"line {lineno}: malformed section header {line!r}")
            name = m.group(1)
            if name not in raw:
                raise ConfigError(f"line {lineno}: unknown section [{name}]")
            if name in seen_sections:
                raise ConfigError(f"line {lineno}: duplicate section [{name}]")
            seen_sections.add(name)
            current = name
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        if current is None:
            raise ConfigError(f"line {lineno}: key outside any section")
        key, value = (part.strip() for part in line.split("=", 1))
        if not _IDENT_RE.match(key):
            raise ConfigError(f"line {lineno}: invalid key {key!r}")
        if key in raw[current]:
            raise ConfigError(f"line {lineno}: duplicate key {key!r} in [{current}]")
        if not value:
            raise ConfigError(f"line {lineno}: empty value for {key!r}")
        raw[current][key] = (lineno, value)

    for section, table in (("run", _RUN_KEYS), ("quadrature", _QUAD_KEYS),
                           ("params", _PARAM_KEYS), ("tolerances", _TOL_KEYS),
                           ("output", _OUT_KEYS)):
        for key, (lineno, _) in raw[section].items():
            if key not in table:
                raise ConfigError(f"line {lineno}: unknown key {key!r} in [{section}]")
    for key, (lineno, _) in raw["fields"].items():
        if key in _RESERVED_FIELD_NAMES or _VAR_NAME_RE.match(key):
            raise ConfigError(f"line {lineno}: field name {key!r} is reserved")

    def typed(section, table):
        return {k: _convert(table[k], v, f"line {ln}")
                for k, (ln, v) in raw[section].items()}

    run = typed("run", _RUN_KEYS)
    if "command" not in run:
        raise ConfigError("missing required key 'command' in [run]")
    if run["command"] not in COMMANDS:
        raise ConfigError(f"unknown command {run['command']!r} "
                          f"(expected one of: {', '.join(COMMANDS)})")
    out = typed("output", _OUT_KEYS)
    fmt = out.get("format", "both")
    if fmt not in ("csv", "json", "both"):
        raise ConfigError(f"output format must be csv, json or both, got {fmt!r}")
    seed = run.get("seed", 0)
    if not 0 <= seed < 2 ** 64:
        raise ConfigError("seed must fit in an unsigned 64-bit integer")
    jobs = run.get("jobs")
    if jobs is not None and jobs < 1:
        raise ConfigError("jobs must be a positive integer")

    return RunConfig(
        command=run["command"],
        n=run.get("n", 1),
        seed=seed,
        jobs=jobs,
        fields={k: v for k, (_, v) in raw["fields"].items()},
        quadrature=typed("quadrature", _QUAD_KEYS),
        params=typed("params", _PARAM_KEYS),
        tolerances=typed("tolerances", _TOL_KEYS),
        output_dir=out.get("dir", "."),
        output_format=fmt,
    )


def _render_value(v):
    if isinstance(v, bool):
        raise AssertionError("no boolean config values")
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, list):
        return ", ".join(_render_value(x) for x in v)
    return str(v)


def render_config(cfg):
    """Canonical text for a RunConfig; parse_config(render_config(c)) == c."""
    lines = ["[run]", f"command = {cfg.command}", f"n = {cfg.n}",
             f"seed = {cfg.seed}"]
    if cfg.jobs is not None:
        lines.append(f"jobs = {cfg.jobs}")
    if cfg.fields:
        lines += ["", "[fields]"]
        lines += [f"{k} = {v}" for k, v in cfg.fields.items()]
    for section, data in (("quadrature", cfg.quadrature), ("params", cfg.params),
                          ("tolerances", cfg.tolerances)):
        if data:
            lines += ["", f"[{section}]"]
            lines += [f"{k} = {_render_value(data[k])}" for k in sorted(data)]
    lines += ["", "[output]", f"dir = {cfg.output_dir}",
              f"format = {cfg.output_format}"]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# field expressions

_NUM_RE = re.compile(r"\d+(?:\.\d+)?(?:[eE][+-]?\d+)?")
_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


class _ExprParser:
    """Recursive-descent parser producing exact ScalarFields."""

    def __init__(self, src, n):
        self.src = src
        self.n = n
        self.pos = 0

    def fail(self, msg):
        raise ConfigError(f"column {self.pos + 1}: {msg}")

    def _ws(self):
        while self.pos < len(self.src) and self.src[self.pos] in " \t":
            self.pos += 1

    def peek(self):
        self._ws()
        return self.src[self.pos] if self.pos < len(self.src) else ""

    def expect(self, ch):
        if self.peek() != ch:
            self.fail(f"expected {ch!r}")
        self.pos += 1

    # ------------------------------------------------------------ values
    @staticmethod
    def _neg(v):
        return field_scale(v, -1) if isinstance(v, ScalarField) else -v

    def _add(self, a, b, sign):
        if not isinstance(a, ScalarField) and not isinstance(b, ScalarField):
            return a + sign * b
        return field_sum(a, self._neg(b) if sign < 0 else b)

    @staticmethod
    def _mul(a, b):
        if not isinstance(a, ScalarField) and not isinstance(b, ScalarField):
            return a * b
        return field_product(a, b)

    def _pow(self, v, k):
        if not isinstance(v, ScalarField):
            return v ** k
        if isinstance(v, Polynomial):
            return v ** k
        if k == 0:
            return Fraction(1)
        out = v
        for _ in range(k - 1):
            out = field_product(out, v)
        return out

    # ------------------------------------------------------------ grammar
    def parse(self):
        v = self.expr()
        if self.peek():
            self.fail(f"unexpected trailing text {self.src[self.pos:]!r}")
        if not isinstance(v, ScalarField):
            v = Polynomial.constant(self.n, v)
        return v

    def expr(self):
        v = self.term()
        while self.peek() in ("+", "-"):
            sign = 1 if self.peek() == "+" else -1
            self.pos += 1
            v = self._add(v, self.term(), sign)
        return v

    def term(self):
        v = self.factor()
        while True:
            c = self.peek()
            if c == "*":
                self.pos += 1
                v = self._mul(v, self.factor())
            elif c == "/":
                self.fail("'/' is only allowed inside rational literals like 3/2")
            else:
                return v

    def factor(self):
        v = self.unary()
        if self.peek() == "^":
            self.pos += 1
            k = self.integer()
            if k < 0:
                self.fail("exponent must be nonnegative")
            if k > 16:
                self.fail("exponent too large (max 16)")
            v = self._pow(v, k)
        return v

    def unary(self):
        if self.peek() == "-":
            self.pos += 1
            return self._neg(self.unary())
        return self.atom()

    def atom(self):
        c = self.peek()
        if c == "(":
            self.pos += 1
            v = self.expr()
            self.expect(")")
            return v
        if c.isdigit():
            return self.number()
        m = _NAME_RE.match(self.src, self.pos)
        if not m:
            self.fail(f"unexpected character {c!r}" if c else "unexpected end of expression")
        name = m.group(0)
        self.pos = m.end()
        if _VAR_NAME_RE.match(name):
            k = int(name[1:])
            if k >= 4 * self.n:
                self.fail(f"variable {name} out of range "
                          f"(n = {self.n} has coordinates x0 .. x{4 * self.n - 1})")
            return Polynomial.coordinate(self.n, k)
        if name == "normsq":
            self.expect("(")
            self.expect(")")
            return normsq(self.n)
        if name == "invshift":
            self.expect("(")
            eps = float(self.number())
            self.expect(")")
            if eps < 0:
                self.fail("invshift needs a nonnegative smoothing parameter")
            return invshift(self.n, eps)
        if name == "quadform":
            self.expect("(")
            rows = self.matrix()
            self.expect(")")
            try:
                return quadform(QMatrix(rows))
            except (ValueError, QmaError) as exc:
                self.fail(str(exc))
        self.fail(f"unknown name {name!r}")

    def number(self):
        self._ws()
        m = _NUM_RE.match(self.src, self.pos)
        if not m:
            self.fail("expected a number")
        text = m.group(0)
        self.pos = m.end()
        if "." in text or "e" in text or "E" in text:
            return float(text)
        num = int(text)
        # rational literal: integer '/' integer
        save = self.pos
        if self.peek() == "/":
            self.pos += 1
            self._ws()
            m2 = _NUM_RE.match(self.src, self.pos)
            if not m2 or not m2.group(0).isdigit():
                self.pos = save
                self.fail("expected an integer denominator")
            den = int(m2.group(0))
            if den == 0:
                self.fail("zero denominator")
            self.pos = m2.end()
            return Fraction(num, den)
        return Fraction(num)

    def integer(self):
        self._ws()
        m = _NUM_RE.match(self.src, self.pos)
        if not m or not m.group(0).isdigit():
            self.fail("expected an integer")
        self.pos = m.end()
        return int(m.group(0))

    def signed_number(self):
        if self.peek() == "-":
            self.pos += 1
            return -self.number()
        return self.number()

    def matrix(self):
        self.expect("[")
        rows = [self.matrix_row()]
        while self.peek() == ";":
            self.pos += 1
            rows.append(self.matrix_row())
        self.expect("]")
        if any(len(r) != len(rows[0]) for r in rows):
            self.fail("ragged matrix rows")
        return rows

    def matrix_row(self):
        entries = [self.matrix_entry()]
        while self.peek() == ",":
            self.pos += 1
            entries.append(self.matrix_entry())
        return entries

    def matrix_entry(self):
        if self.peek() == "(":
            self.pos += 1
            comps = [self.signed_number()]
            for _ in range(3):
                self.expect(",")
                comps.append(self.signed_number())
            self.expect(")")
            return Quaternion(*comps)
        return self.signed_number()


def parse_field_expr(src, n):
    """Parse a field expression over H^n; raise ConfigError on bad input."""
    return _ExprParser(src, n).parse()


# ---------------------------------------------------------------------------
# report assembly and deterministic writers

_COLUMNS = {
    "verify": ("check", "n", "value", "bound", "status"),
    "ma": ("field", "points", "min_density", "max_density", "moore_residual",
           "bound", "status"),
    "fundamental": ("eps", "r", "mass_quadrature", "mass_exact", "mass_limit",
                    "rel_err", "bound", "status"),
    "lelong": ("radius", "normalized_mass", "error", "status"),
    "jensen": ("quantity", "value", "bound", "status"),
    "boundary": ("quantity", "value", "bound", "status"),
    "cln": ("case", "ratio", "bound", "status"),
}


def _fmt_cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(float(v))  # plain repr even for numpy scalars
    return str(v)


def _render_csv(command, rows):
    cols = _COLUMNS[command]
    lines = [",".join(cols)]
    lines += [",".join(_fmt_cell(row.get(c)) for c in cols) for row in rows]
    return "\n".join(lines) + "\n"


def _render_json(report):
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def _atomic_write(path, text):
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def write_outputs(cfg, report, out_dir):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    if cfg.output_format in ("csv", "both"):
        p = out_dir / f"{cfg.command}.csv"
        _atomic_write(p, _render_csv(cfg.command, report["rows"]))
        written.append(p)
    if cfg.output_format in ("json", "both"):
        p = out_dir / f"{cfg.command}.json"
        _atomic_write(p, _render_json(report))
        written.append(p)
    return written


# ---------------------------------------------------------------------------
# shared command helpers


def _require_n(cfg, lo, hi):
    if not lo <= cfg.n <= hi:
        raise ConfigError(f"command {cfg.command!r} needs {lo} <= n <= {hi}, "
                          f"got n = {cfg.n}")
    return cfg.n


def _parsed_fields(cfg, names=None):
    """Parse the configured field expressions (all of them, or a named list)."""
    names = sorted(cfg.fields) if names is None else list(names)
    out = {}
    for name in names:
        if name not in cfg.fields:
            raise ConfigError(f"command {cfg.command!r} needs a field {name!r} "
                              "in [fields]")
        try:
            field = parse_field_expr(cfg.fields[name], cfg.n)
        except ConfigError as exc:
            raise ConfigError(f"field {name!r}: {exc}")
        out[name] = field
    return out


def _param(cfg, key, default=None, required=False):
    if key in cfg.params:
        return cfg.params[key]
    if required:
        raise ConfigError(f"command {cfg.command!r} needs {key!r} in [params]")
    return default


def _ball_points(n, r, count, seed):
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((count, 4 * n))
    dirs = g / np.linalg.norm(g, axis=1, keepdims=True)
    radii = r * rng.random((count, 1)) ** (1.0 / (4 * n))
    return dirs * radii


def _psd_quadratic(a, n):
    """Shift a hyperhermitian quadratic form until it is plurisubharmonic."""
    u = quadform(a)
    m = 0.5 * (u.m_real + u.m_real.T)
    lam = float(np.linalg.eigvalsh(m).min())
    shift = max(0.0, -lam) + 0.5
    return field_sum(u, field_scale(normsq(n), shift))


# ---------------------------------------------------------------------------
# commands


def _cmd_verify(cfg):
    n = _require_n(cfg, 1, 3)
    rng = np.random.default_rng(cfg.seed)
    tol_id = cfg.tolerances.get("identity", 1e-10)
    tol_moore = cfg.tolerances.get("moore", 1e-9)
    tol_pos = cfg.tolerances.get("positivity", 1e-9)
    rows = []

    def check(name, value, bound):
        value = float(value)
        rows.append({"check": name, "n": n, "value": value, "bound": float(bound),
                     "status": "pass" if value <= bound else "fail"})

    dev = 0.0
    for _ in range(200):
        p, q = random_quaternion(rng), random_quaternion(rng)
        dev = max(dev, float(np.abs(tau(p * q) - tau(p) @ tau(q)).max()))
    check("embedding-multiplicative-quaternion", dev, tol_id)

    dev = 0.0
    for _ in range(20):
        a, b = random_qmatrix(rng, n), random_qmatrix(rng, n)
        dev = max(dev, float(np.abs((a @ b).tau() - a.tau() @ b.tau()).max()))
    check("embedding-multiplicative-matrix", dev, tol_id)

    jmat = jmatrix(n)
    dev = 0.0
    for _ in range(20):
        ta = random_qmatrix(rng, n).tau()
        dev = max(dev, float(np.abs(np.conj(ta) - jmat @ ta @ jmat.T).max()))
    check("embedding-j-conjugation", dev, tol_id)

    dev = 0.0
    for _ in range(10):
        a = random_hyperhermitian(rng, n, exact=True)
        md = float(moore_det(a))
        det_tau = complex(np.linalg.det(a.tau()))
        dev = max(dev, abs(det_tau - md * md) / max(1.0, md * md))
    check("moore-tau-determinant", dev, tol_moore)

    c = complex(top_coefficient(beta(n).wedge_power(n)))
    check("volume-form-normalization", abs(c - math.factorial(n)), tol_id)

    pts = rng.standard_normal((8, 4 * n))
    dev = 0.0
    for j, al in itertools.product(range(2 * n), (0, 1)):
        for k, be in itertools.product(range(2 * n), (0, 1)):
            target = 2 if (j, al) == (k, be) else 0
            g = nabla(z_field(n, k, be), j, al) - target
            if not g.is_exact_zero():
                dev = max(dev, float(np.abs(g.values(pts)).max()))
    check("coordinate-derivative-duality", dev, tol_id)

    dev = 0.0
    for j, al in itertools.product(range(2 * n), (0, 1)):
        g = nabla(normsq(n), j, al) - z_field(n, j, al).conj() * 2
        if not g.is_exact_zero():
            dev = max(dev, float(np.abs(g.values(pts)).max()))
    check("normsq-gradient-identity", dev, tol_id)

    dev = 0.0
    for x in rng.standard_normal((5, 4 * n)):
        dev = max(dev, float(np.abs(delta_matrix(normsq(n), x) - 4.0 * jmat).max()))
    check("normsq-curvature-constant", dev, tol_id)

    terms = {}
    for _ in range(12):
        deg = int(rng.integers(1, 4))
        exp = [0] * 4 * n
        for _ in range(deg):
            exp[int(rng.integers(0, 4 * n))] += 1
        coeff = Fraction(int(rng.integers(-9, 10)), int(rng.integers(1, 7)))
        if coeff:
            terms[tuple(exp)] = terms.get(tuple(exp), 0) + coeff
    cubic = Polynomial(n, terms)
    check("laplacian-form-closed", closedness_residual(laplace(cubic)), tol_id)

    shift = QMatrix.identity(n) * 4
    quad = quadform(random_hyperhermitian(rng, n, exact=True) + shift)
    ball = _ball_points(n, 1.0, 16, cfg.seed + 1)
    check("moore-matching-equivalence", moore_equivalence_residual(quad, ball),
          tol_moore)

    pure = ma_density(quad, ball)
    mixed = mixed_ma([quad] * n, ball)
    scale = max(1.0, float(np.abs(pure).max()))
    check("mixed-density-consistency",
          float(np.abs(mixed - pure).max()) / scale, tol_moore)

    worst = 0.0
    for k in range(1, n + 1):
        elem = random_strongly_positive(rng, n, k)
        res = positivity_test(elem, samples=64, seed=cfg.seed + k)
        bad = max(0.0, -res.min_kappa) if math.isfinite(res.min_kappa) else 1.0
        if not res:
            bad = max(bad, 1.0)
        worst = max(worst, bad)
    check("strong-positivity-sampled", worst, tol_pos)

    summary = {"checks": len(rows)}
    return rows, summary


def _cmd_ma(cfg):
    n = _require_n(cfg, 1, 2)
    if not cfg.fields:
        raise ConfigError("command 'ma' needs at least one entry in [fields]")
    fields = _parsed_fields(cfg)
    for name, u in fields.items():
        if u.n != n:
            raise ConfigError(f"field {name!r} lives on H^{u.n}, run has n = {n}")
    r = _param(cfg, "r", 1.0)
    tol_moore = cfg.tolerances.get("moore", 1e-9)
    pts = _ball_points(n, r, 32, cfg.seed)

    rows = []
    psh_flags = {}
    for name in sorted(fields):
        u = fields[name]
        dens = ma_density(u, pts)
        residual = moore_equivalence_residual(u, pts)
        psh_flags[name] = bool(psh_test(u, pts))
        rows.append({
            "field": name, "points": len(pts),
            "min_density": float(dens.min()), "max_density": float(dens.max()),
            "moore_residual": float(residual), "bound": tol_moore,
            "status": "pass" if residual <= tol_moore else "fail",
        })
    if n >= 2 and len(fields) == n:
        # the polarized density needs exactly n potentials
        mix = mixed_ma([fields[k] for k in sorted(fields)], pts)
        rows.append({
            "field": "mixed", "points": len(pts),
            "min_density": float(mix.min()), "max_density": float(mix.max()),
            "moore_residual": None, "bound": None, "status": "info",
        })
    return rows, {"radius": r, "psh": psh_flags}


def _cmd_fundamental(cfg):
    n = _require_n(cfg, 1, 2)
    r = _param(cfg, "r", 1.0)
    eps_list = _param(cfg, "eps", [1e-1, 1e-2, 1e-3])
    tol_mass = cfg.tolerances.get("mass", 1e-6)
    nodes = max(32, cfg.quadrature.get("radial_nodes", 32))
    limit = float(fundamental_mass_limit_coefficient(n)) * math.pi ** (2 * n)
    coeff = (8.0 ** n) * math.factorial(n)

    rows = []
    for eps in eps_list:
        if eps <= 0:
            raise ConfigError("fundamental needs strictly positive eps values")
        dens = lambda rho: coeff * eps / (rho ** 2 + eps) ** (2 * n + 1)
        mass_quad = radial_ball_integral(n, dens, r, peak_scale=eps, nodes=nodes)
        mass_exact = float(fundamental_mass_exact(n, eps, r)) * math.pi ** (2 * n)
        rel = abs(mass_quad - mass_exact) / abs(mass_exact)
        rows.append({
            "eps": float(eps), "r": float(r),
            "mass_quadrature": mass_quad, "mass_exact": mass_exact,
            "mass_limit": limit, "rel_err": rel, "bound": tol_mass,
            "status": "pass" if rel <= tol_mass else "fail",
        })
    return rows, {"limit": limit}


def _cmd_lelong(cfg):
    n = _require_n(cfg, 1, 2)
    fields = _parsed_fields(cfg, ["u"])
    u = fields["u"]
    if u.n != n:
        raise ConfigError(f"field 'u' lives on H^{u.n}, run has n = {n}")
    center = _param(cfg, "center", [0.0] * 4 * n)
    if len(center) != 4 * n:
        raise ConfigError(f"center needs {4 * n} components")
    radii = _param(cfg, "radii")
    slack = cfg.tolerances.get("monotonicity", 3.0)
    quad_opts = {"sphere_pow": cfg.quadrature.get("sphere_pow", 8),
                 "radial_nodes": cfg.quadrature.get("radial_nodes", 16),
                 "seed": cfg.seed}

    current = RegularizedCurrent.from_laplace(u)
    profile, nu = lelong_number(current, np.asarray(center), radii, **quad_opts)
    bad = set(profile.monotone_violations(slack=slack))
    rows = []
    for k in range(len(profile.radii)):
        rows.append({
            "radius": float(profile.radii[k]),
            "normalized_mass": float(profile.values[k]),
            "error": float(profile.errors[k]),
            "status": "fail" if k in bad else "pass",
        })
    summary = {"nu": nu, "center": list(map(float, center)),
               "monotone_violations": sorted(bad)}
    return rows, summary


def _cmd_jensen(cfg):
    n = _require_n(cfg, 1, 2)
    fields = _parsed_fields(cfg, ["phi", "v"])
    phi, v = fields["phi"], fields["v"]
    for name, f in fields.items():
        if f.n != n:
            raise ConfigError(f"field {name!r} lives on H^{f.n}, run has n = {n}")
    r = _param(cfg, "r", required=True)
    tol = cfg.tolerances.get("jensen", 1e-3)
    tol_layered = cfg.tolerances.get("jensen_layered", 1e-2)
    report = lelong_jensen(
        phi, v, r,
        t_nodes=cfg.quadrature.get("t_nodes", 48),
        sphere_pow=cfg.quadrature.get("sphere_pow", 9),
        radial_nodes=cfg.quadrature.get("radial_nodes", 12),
        seed=cfg.seed)
    if not report.finite():
        raise QmaError("Jensen evaluation produced non-finite terms")
    scale = max(abs(report.boundary_term), abs(report.interior_term), 1.0)

    def info(name, value):
        return {"quantity": name, "value": float(value), "bound": None,
                "status": "info"}

    def residual(name, value, bound):
        return {"quantity": name, "value": float(value), "bound": float(bound),
                "status": "pass" if value <= bound else "fail"}

    rows = [
        info("boundary_term", report.boundary_term),
        info("interior_term", report.interior_term),
        info("lhs", report.lhs),
        info("rhs_spatial", report.rhs_spatial),
        info("rhs_layered", report.rhs_layered),
        residual("residual_spatial", report.residual_spatial, tol * scale),
        residual("residual_layered", report.residual_layered, tol_layered * scale),
    ]
    summary = {"r": r, "scale": scale,
               "errors": {k: float(v) for k, v in sorted(report.errors.items())}}
    return rows, summary


def _cmd_boundary(cfg):
    n = _require_n(cfg, 1, 2)
    fields = _parsed_fields(cfg, ["phi"])
    phi = fields["phi"]
    if phi.n != n:
        raise ConfigError(f"field 'phi' lives on H^{phi.n}, run has n = {n}")
    r = _param(cfg, "r", required=True)
    tol = cfg.tolerances.get("boundary", 1e-3)
    tol_pos = cfg.tolerances.get("positivity", 1e-9)

    residual, mu1, interior = boundary_mass_residual(
        phi, r,
        sphere_pow=cfg.quadrature.get("sphere_pow", 9),
        radial_nodes=cfg.quadrature.get("radial_nodes", 12),
        seed=cfg.seed)
    scale = max(abs(mu1), 1.0)

    # density floor on a sampled slice of the level set
    rule = StarShapedRule(phi, r, sphere_pow=5, seed=cfg.seed)
    dens = boundary_measure_density(phi, rule.points)
    negativity = max(0.0, -float(dens.min()))

    rows = [
        {"quantity": "boundary_mass", "value": float(mu1), "bound": None,
         "status": "info"},
        {"quantity": "interior_mass", "value": float(interior), "bound": None,
         "status": "info"},
        {"quantity": "mass_residual", "value": float(residual),
         "bound": tol * scale,
         "status": "pass" if residual <= tol * scale else "fail"},
        {"quantity": "density_negativity", "value": negativity, "bound": tol_pos,
         "status": "pass" if negativity <= tol_pos else "fail"},
    ]
    summary = {"r": r, "sample_points": len(rule.points)}
    return rows, summary


def _cmd_cln(cfg):
    n = _require_n(cfg, 1, 2)
    if not cfg.fields:
        raise ConfigError("command 'cln' needs at least one entry in [fields]")
    fields = _parsed_fields(cfg)
    for name, u in fields.items():
        if u.n != n:
            raise ConfigError(f"field {name!r} lives on H^{u.n}, run has n = {n}")
    inner = _param(cfg, "inner_radius", 0.5)
    outer = _param(cfg, "outer_radius", 1.0)
    if inner > outer:
        raise ConfigError("inner_radius must not exceed outer_radius")
    bound = cfg.tolerances.get("cln", 1e12)
    trials = _param(cfg, "trials", 0)
    quad_opts = {"sphere_pow": cfg.quadrature.get("sphere_pow", 8),
                 "radial_nodes": cfg.quadrature.get("radial_nodes", 16),
                 "sup_samples": cfg.quadrature.get("sup_samples", 4096)}

    def one_ratio(potentials, seed):
        ratio = cln_ratio(potentials, inner, outer, seed=seed, **quad_opts)
        ok = math.isfinite(ratio) and abs(ratio) <= bound
        return ratio, "pass" if ok else "fail"

    ratio, status = one_ratio([fields[k] for k in sorted(fields)], cfg.seed)
    rows = [{"case": "configured", "ratio": float(ratio), "bound": bound,
             "status": status}]

    rng = np.random.default_rng(cfg.seed)
    for t in range(trials):
        a = random_hyperhermitian(rng, n)
        u = _psd_quadratic(a, n)
        ratio, status = one_ratio([u] * min(n, 2), cfg.seed + t + 1)
        rows.append({"case": f"trial_{t:02d}", "ratio": float(ratio),
                     "bound": bound, "status": status})
    return rows, {"inner_radius": inner, "outer_radius": outer}


_DISPATCH = {
    "verify": _cmd_verify,
    "ma": _cmd_ma,
    "fundamental": _cmd_fundamental,
    "lelong": _cmd_lelong,
    "jensen": _cmd_jensen,
    "boundary": _cmd_boundary,
    "cln": _cmd_cln,
}


def run_command(cfg):
    """Evaluate a parsed config; returns the full report dictionary."""
    rows, summary = _DISPATCH[cfg.command](cfg)
    statuses = [row["status"] for row in rows]
    evaluated = [s for s in statuses if s != "info"]
    if not evaluated:
        raise QmaError("no tolerance was evaluated; refusing to report success")
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": cfg.command,
        "n": cfg.n,
        "seed": cfg.seed,
        "jobs": cfg.jobs,
        "passed": all(s == "pass" for s in evaluated),
        "summary": summary,
        "rows": rows,
    }
    return report


# ---------------------------------------------------------------------------
# entry point


def _build_arg_parser():
    ap = argparse.ArgumentParser(
        prog="qma",
        description="deterministic check runs for quaternionic potential theory")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True, help="path to the run config")
    ap.add_argument("--out", help="output directory (default: [output] dir)")
    ap.add_argument("--seed", type=int, help="override the configured seed")
    ap.add_argument("--jobs", type=int,
                    help="worker cap (or env QMA_JOBS); results do not depend on it")
    return ap


def main(argv=None):
    ap = _build_arg_parser()
    args = ap.parse_args(argv)
    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        print(f"qma: error: cannot read config: {exc}", file=sys.stderr)
        return 1
    try:
        cfg = parse_config(text)
        if cfg.command != args.command:
            raise ConfigError(f"config is for {cfg.command!r}, "
                              f"invoked as {args.command!r}")
        if args.seed is not None:
            if not 0 <= args.seed < 2 ** 64:
                raise ConfigError("seed must fit in an unsigned 64-bit integer")
            cfg.seed = args.seed
        jobs = args.jobs
        if jobs is None and os.environ.get("QMA_JOBS"):
            try:
                jobs = int(os.environ["QMA_JOBS"])
            except ValueError:
                raise ConfigError("QMA_JOBS must be an integer")
        if jobs is not None:
            if jobs < 1:
                raise ConfigError("jobs must be a positive integer")
            cfg.jobs = jobs
        report = run_command(cfg)
        out_dir = args.out if args.out is not None else cfg.output_dir
        written = write_outputs(cfg, report, out_dir)
    except Exception as exc:  # config or runtime failure -> exit 1
        print(f"qma: error: {exc}", file=sys.stderr)
        return 1
    for path in written:
        print(path)
    print("status:", "ok" if report["passed"] else "tolerance failure")
    return 0 if report["passed"] else 2


if __name__ == "__main__":
    sys.exit(main())
