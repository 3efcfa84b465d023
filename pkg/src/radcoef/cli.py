"""Command-line interface: ``radcoef transform | verify | batch``."""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .frontend.expr import Declarations, ParseError, UnknownSymbol, parse_equation
from .frontend.extract import NotPolynomial, UnsupportedRadicand, extract_tower
from .frontend.printing import format_jet_monomial, format_ratfunc
from .frontend.radicals import DegenerateTower
from .oracle import DEFAULT_PRECISION, numeric_chain_check, numeric_tower_check
from .tower import field_degree
from .transformer import (IMPOSSIBLE, NO_ANSWER, TRANSFORMED, format_equation, normalize,
                          radical_texts, run_pipeline)

SCHEMA_VERSION = "1"
EXIT_CODES = {TRANSFORMED: 0, IMPOSSIBLE: 10, NO_ANSWER: 11}
EXIT_USAGE = 2
EXIT_VERIFY_FAILED = 1
BATCH_WORKERS = 4

HEADER_KEYS = {"vars", "unknowns", "params", "subst", "seed", "precision-bits"}


class UsageError(ValueError):
    pass


@dataclass
class JobConfig:
    equations: list
    variables: tuple = ("x",)
    unknowns: tuple = ("y",)
    params: tuple = ()
    substitution: str | None = None
    precision_bits: int = DEFAULT_PRECISION
    seed: int = 0
    oracle: bool = True
    timings: bool = False
    json_out: str | None = None
    source: str | None = None

    def declarations(self):
        try:
            return Declarations(self.variables, self.unknowns, self.params)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc


def _names(text):
    if text is None:
        return None
    return tuple(n for n in text.replace(",", " ").split() if n)


def parse_job_text(text, source=None):
    """Job file: ``#key: value`` header lines, then one equation per line."""
    header = {}
    equations = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            key, sep, value = body.partition(":")
            key = key.strip().lower()
            if sep and key in HEADER_KEYS:
                header[key] = value.strip()
            continue
        equations.append(line)
    if not equations:
        raise UsageError(f"{source or 'job'}: no equation found")
    cfg = JobConfig(equations, source=source)
    if "vars" in header:
        cfg.variables = _names(header["vars"])
    if "unknowns" in header:
        cfg.unknowns = _names(header["unknowns"])
    if "params" in header:
        cfg.params = _names(header["params"])
    if header.get("subst"):
        cfg.substitution = header["subst"]
    try:
        if "seed" in header:
            cfg.seed = int(header["seed"])
        if "precision-bits" in header:
            cfg.precision_bits = int(header["precision-bits"])
    except ValueError as exc:
        raise UsageError(f"{source or 'job'}: bad header value: {exc}") from exc
    return cfg


def load_job(path):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    return parse_job_text(text, source=str(path))


# ---------------------------------------------------------------------------
# reports


def _tower_doc(tower):
    names = list(tower.registry.names)
    steps = [{"name": s.name, "index": s.index, "radicand": format_ratfunc(s.radicand, names)}
             for s in tower.steps]
    expanded = radical_texts(tower)
    for doc, s in zip(steps, tower.steps):
        doc["expression"] = expanded[s.symbol]
    try:
        degree = field_degree(tower)
    except DegenerateTower:
        degree = None
    return {"steps": steps, "field_degree": degree}


def _parametrization_doc(result):
    q = result.parametrization
    names = list(result.registry.names)
    doc = {
        "status": result.param_status,
        "source": "supplied" if result.supplied else "automatic",
        "witness": result.witness,
        "notes": list(result.notes),
    }
    if q is None:
        doc.update(fresh=None, x=None, d=None)
        return doc
    doc["fresh"] = [names[z] for z in q.z]
    doc["x"] = [format_ratfunc(c, names) for c in q.x]
    doc["d"] = [None if c is None else format_ratfunc(c, names) for c in q.d]
    return doc


def _equation_doc(g, result):
    names = list(result.registry.names)
    out = result.out_decl
    terms = [{"jets": format_jet_monomial(mono, out.unknowns, out.variables) or "1",
              "coefficient": format_ratfunc(c, names)} for mono, c in g.sorted_terms()]
    return {"text": format_equation(g, result.registry, out), "terms": terms}


def build_report(result, oracle_doc=None, timings=None):
    names = list(result.registry.names)
    return {
        "version": SCHEMA_VERSION,
        "status": result.status,
        "tower": _tower_doc(result.tower),
        "parametrization": _parametrization_doc(result),
        "inverse": None if result.inverse is None else
        [format_ratfunc(h, names) for h in result.inverse],
        "transformed": {
            "variables": list(result.out_decl.variables),
            "unknowns": list(result.out_decl.unknowns),
            "equations": [_equation_doc(g, result) for g in result.transformed],
            "rational": result.rational,
            "warnings": list(result.warnings),
        },
        "back_substitution": result.back_substitution,
        "tracing": None if result.tracing is None else result.tracing.as_dict(),
        "oracle": oracle_doc,
        "normalization_unit": [format_ratfunc(u, names) for u in result.units],
        "timings": timings,
    }


def dumps(report):
    return json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def write_atomic(path, text):
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# jobs


def _pipeline(cfg):
    decl = cfg.declarations()
    try:
        return run_pipeline(cfg.equations, decl, cfg.substitution, seed=cfg.seed)
    except (ParseError, UnknownSymbol, NotPolynomial, UnsupportedRadicand) as exc:
        raise UsageError(f"cannot read equation: {exc}") from exc
    except ValueError as exc:
        # substitution syntax and arity problems
        raise UsageError(str(exc)) from exc


def _chain(result, cfg):
    raw = [n.raw for n in result.normalizations]
    return numeric_chain_check(result.equations, raw, result.tower, result.parametrization,
                               precision=cfg.precision_bits, seed=cfg.seed)


def run_transform(cfg: JobConfig):
    """Returns ``(exit_code, report, pipeline result)``."""
    t0 = time.perf_counter()
    result = _pipeline(cfg)
    t1 = time.perf_counter()
    oracle_doc = None
    if cfg.oracle and result.status == TRANSFORMED:
        oracle_doc = {"chain": _chain(result, cfg).as_dict()}
    t2 = time.perf_counter()
    timings = {"pipeline_s": round(t1 - t0, 4), "oracle_s": round(t2 - t1, 4)} \
        if cfg.timings else None
    return EXIT_CODES[result.status], build_report(result, oracle_doc, timings), result


def canonical_equations(texts, decl):
    """Normalized canonical text of rational equations given in the output names."""
    exprs = [parse_equation(t, decl) for t in texts]
    _, polys, registry = extract_tower(exprs, decl)
    if not isinstance(polys, list):
        polys = [polys]
    out = []
    for p in polys:
        g = normalize(p).normalized
        out.append(format_equation(g, registry, decl))
    return out


def run_verify(cfg: JobConfig, expected=None):
    """Check a supplied substitution; optionally compare against claimed output."""
    if not cfg.substitution:
        raise UsageError("verify needs --subst")
    result = _pipeline(cfg)
    checks = {}
    verdict = result.verdict
    checks["parametrization"] = bool(verdict) if verdict is not None else False
    checks["rational"] = bool(result.rational)
    oracle_doc = None
    q = result.parametrization
    if checks["parametrization"]:
        tower_rep = numeric_tower_check(result.tower, q, precision=cfg.precision_bits,
                                        seed=cfg.seed)
        oracle_doc = {"tower": tower_rep.as_dict()}
        checks["tower_numeric"] = tower_rep.passed
    if checks["parametrization"] and result.normalizations:
        chain = _chain(result, cfg)
        oracle_doc["chain"] = chain.as_dict()
        checks["chain_numeric"] = chain.passed
    else:
        checks["chain_numeric"] = False
    if expected:
        try:
            want = canonical_equations(expected, result.out_decl)
        except (ParseError, UnknownSymbol, NotPolynomial, UnsupportedRadicand) as exc:
            raise UsageError(f"cannot read expected equation: {exc}") from exc
        checks["expected_output"] = sorted(want) == sorted(result.transformed_text())
    ok = all(checks.values())
    report = build_report(result, oracle_doc)
    report["verify"] = {"passed": ok, "checks": checks,
                        "failures": [] if verdict is None else list(verdict.failures)}
    return (0 if ok else EXIT_VERIFY_FAILED), report, result


def run_batch(directory, out_dir=None, base_cfg=None, workers=BATCH_WORKERS):
    """Run every ``*.eq`` job in a directory; returns ``(exit_code, rows)``."""
    directory = Path(directory)
    if not directory.is_dir():
        raise UsageError(f"{directory} is not a directory")
    files = sorted(directory.glob("*.eq"))
    if out_dir is not None:
        Path(out_dir).mkdir(parents=True, exist_ok=True)

    def job(path):
        try:
            cfg = load_job(path)
            if base_cfg is not None:
                cfg.seed = base_cfg.seed
                cfg.oracle = base_cfg.oracle
                cfg.precision_bits = base_cfg.precision_bits
            code, report, _ = run_transform(cfg)
            if out_dir is not None:
                write_atomic(Path(out_dir) / f"{path.stem}.json", dumps(report))
            return {"file": path.name, "status": report["status"], "exit": code, "error": None}
        except Exception as exc:  # one bad job must not sink the batch
            return {"file": path.name, "status": "Error", "exit": EXIT_USAGE,
                    "error": f"{type(exc).__name__}: {exc}"}

    if not files:
        return 0, []
    with ThreadPoolExecutor(max_workers=max(1, min(workers, len(files)))) as pool:
        rows = list(pool.map(job, files))
    failed = any(r["error"] for r in rows)
    return (1 if failed else 0), rows


# ---------------------------------------------------------------------------
# argument parsing


def _add_job_args(p):
    p.add_argument("--vars", default="x", help="independent variables, comma separated")
    p.add_argument("--unknowns", default="y", help="unknown functions, comma separated")
    p.add_argument("--params", default="", help="symbolic parameters, comma separated")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--eq", action="append", help="equation text (repeat for systems)")
    src.add_argument("--file", help="job file with #key: value header lines")
    p.add_argument("--subst", help='substitution, e.g. "x=z^2-1; d1=z"')
    p.add_argument("--precision-bits", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--json", dest="json_out", help="write the JSON report here ('-' = stdout)")
    p.add_argument("--no-oracle", action="store_true", help="skip the numeric chain check")
    p.add_argument("--timings", action="store_true", help="record wall-clock timings")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="radcoef",
        description="Rational changes of variables that remove radical coefficients "
                    "from algebraic ODEs and PDEs.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    t = sub.add_parser("transform", help="search for a rationalizing change of variables")
    _add_job_args(t)
    v = sub.add_parser("verify", help="check a supplied substitution")
    _add_job_args(v)
    v.add_argument("--expect", action="append",
                   help="claimed transformed equation in the output names (repeatable)")
    b = sub.add_parser("batch", help="run every *.eq job file in a directory")
    b.add_argument("directory")
    b.add_argument("--out", help="directory for per-job JSON reports")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--precision-bits", type=int, default=DEFAULT_PRECISION)
    b.add_argument("--no-oracle", action="store_true")
    b.add_argument("--workers", type=int, default=BATCH_WORKERS)
    return parser


def config_from_args(args):
    if args.file:
        cfg = load_job(args.file)
        # command-line declarations override the header only when given explicitly
        defaults = {"vars": "x", "unknowns": "y", "params": ""}
        if args.vars != defaults["vars"]:
            cfg.variables = _names(args.vars)
        if args.unknowns != defaults["unknowns"]:
            cfg.unknowns = _names(args.unknowns)
        if args.params != defaults["params"]:
            cfg.params = _names(args.params)
    elif args.eq:
        cfg = JobConfig(list(args.eq), _names(args.vars), _names(args.unknowns),
                        _names(args.params))
    else:
        raise UsageError("one of --eq or --file is required")
    if args.subst:
        cfg.substitution = args.subst
    if args.seed is not None:
        cfg.seed = args.seed
    if args.precision_bits is not None:
        if args.precision_bits < 32:
            raise UsageError("--precision-bits must be at least 32")
        cfg.precision_bits = args.precision_bits
    cfg.oracle = not args.no_oracle
    cfg.timings = args.timings
    cfg.json_out = args.json_out
    return cfg


def _summary(report, base_names, out):
    print(f"status: {report['status']}", file=out)
    for s in report["tower"]["steps"]:
        print(f"radical {s['name']} = {s['expression']}", file=out)
    par = report["parametrization"]
    if par.get("x"):
        names = list(base_names) + [s["name"] for s in report["tower"]["steps"]]
        values = par["x"] + [c if c is not None else "?" for c in par["d"]]
        comps = ", ".join(f"{n} = {c}" for n, c in zip(names, values))
        print(f"substitution: {comps}", file=out)
    for eq in report["transformed"]["equations"]:
        print(f"transformed: {eq['text']} = 0", file=out)
    if report["back_substitution"]:
        fresh = par.get("fresh") or []
        for name, text in zip(fresh, report["back_substitution"]):
            print(f"back-substitution: {name} = {text}", file=out)
    if report["tracing"]:
        tr = report["tracing"]
        cert = "certified" if tr["certified"] else "not certified"
        print(f"tracing index: {tr['tracing_index']} ({cert})", file=out)
    if report["oracle"]:
        for name, rep in sorted(report["oracle"].items()):
            verdict = "pass" if rep["passed"] else "FAIL"
            print(f"oracle {name}: {verdict} (max residual {rep['max_relative_residual']:.3g})",
                  file=out)
    for w in report["transformed"]["warnings"]:
        print(f"warning: {w}", file=out)


def _emit(report, cfg, result):
    if cfg.json_out == "-":
        sys.stdout.write(dumps(report))
        return
    if cfg.json_out:
        write_atomic(cfg.json_out, dumps(report))
    _summary(report, result.decl.variables, sys.stdout)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "batch":
            base = JobConfig([], seed=args.seed, precision_bits=args.precision_bits,
                             oracle=not args.no_oracle)
            code, rows = run_batch(args.directory, args.out, base, args.workers)
            for r in rows:
                line = f"{r['file']}\t{r['status']}"
                if r["error"]:
                    line += f"\t{r['error']}"
                print(line)
            print(f"{len(rows)} job(s)")
            return code
        cfg = config_from_args(args)
        if args.command == "transform":
            code, report, result = run_transform(cfg)
        else:
            code, report, result = run_verify(cfg, args.expect)
            print(f"verify: {'pass' if report['verify']['passed'] else 'FAIL'}",
                  file=sys.stderr)
        _emit(report, cfg, result)
        return code
    except UsageError as exc:
        print(f"radcoef: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
