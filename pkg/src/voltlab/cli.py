"""Scenario runner.

A scenario is a JSON document ``{"name", "kind", "params"}``. ``params``
may hold ``seed``, ``N`` and ``checks``: either a list of check names or a
mapping from check name to keyword arguments (see :mod:`voltlab.checks`).

Exit codes: 0 when every assertion passes, 2 for a bad config (nothing is
written), 3 when some assertion fails.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import inspect
import json
import math
import os
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__, checks
from ._kernels import BACKEND
from .checks import Assertion
from .fnspace import Grid
from .operators import eval_expr, parse_operator

EXIT_OK, EXIT_CONFIG, EXIT_ASSERT = 0, 2, 3
KINDS = tuple(checks.REGISTRY)
OUT_ENV = "VOLTLAB_OUT"


class ConfigError(ValueError):
    pass


@dataclass
class Scenario:
    name: str
    kind: str
    checks: dict  # check name -> kwargs
    seed: int | None = None
    grid: int | None = None


@dataclass
class ScenarioResult:
    name: str
    kind: str
    assertions: list = field(default_factory=list)
    metrics: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.assertions) and all(a.passed for a in self.assertions)

    def to_json(self) -> dict:
        return {"scenario": self.name, "kind": self.kind, "passed": self.passed,
                "assertions": [a.to_json() for a in self.assertions],
                "metrics": _clean(self.metrics)}


def _clean(obj):
    """JSON-safe copy: numpy scalars unwrapped, non-finite floats as strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else repr(float(obj))
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


# ---------------------------------------------------------------------------
# config
# ---------------------------------------------------------------------------


def _accepts(fn, name: str) -> bool:
    return name in inspect.signature(fn).parameters


def parse_config(doc, kind: str | None = None) -> Scenario:
    """Validate a scenario document; raises :class:`ConfigError`."""
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(doc) - {"name", "kind", "params", "description"}
    if unknown:
        raise ConfigError(f"unknown top-level keys: {sorted(unknown)}")
    name = doc.get("name")
    if not isinstance(name, str) or not name:
        raise ConfigError("'name' must be a non-empty string")
    k = doc.get("kind")
    if k not in KINDS:
        raise ConfigError(f"'kind' must be one of {KINDS}, got {k!r}")
    if kind is not None and k != kind:
        raise ConfigError(f"config is of kind {k!r} but subcommand is {kind!r}")
    params = doc.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError("'params' must be an object")
    extra = set(params) - {"checks", "seed", "N"}
    if extra:
        raise ConfigError(f"unknown params: {sorted(extra)}")
    raw = params.get("checks", checks.DEFAULTS[k])
    if isinstance(raw, list):
        raw = {c: {} for c in raw}
    if not isinstance(raw, dict) or not raw:
        raise ConfigError("'checks' must be a non-empty list or object")
    table = checks.REGISTRY[k]
    for cname, kw in raw.items():
        if cname not in table:
            raise ConfigError(f"unknown check {cname!r} for kind {k!r}; have {sorted(table)}")
        if not isinstance(kw, dict):
            raise ConfigError(f"arguments of {cname!r} must be an object")
        try:
            inspect.signature(table[cname]).bind(**kw)
        except TypeError as exc:
            raise ConfigError(f"{cname}: {exc}") from None
        if "operator" in kw:
            _validate_operator(kw["operator"])
        for key in ("x", "alpha"):
            if key in kw:
                _validate_expr(kw[key])
        for f in kw.get("functionals", ()):
            _validate_expr(f)
    seed = params.get("seed")
    N = params.get("N")
    for label, v in (("seed", seed), ("N", N)):
        if v is not None and (not isinstance(v, int) or isinstance(v, bool) or v < 0):
            raise ConfigError(f"{label} must be a non-negative integer")
    return Scenario(name, k, raw, seed, N)


def _validate_operator(spec) -> None:
    if not isinstance(spec, str):
        raise ConfigError("operator spec must be a string")
    try:
        parse_operator(spec, Grid(8))
    except (ValueError, KeyError, SyntaxError) as exc:
        raise ConfigError(f"bad operator spec {spec!r}: {exc}") from None


def _validate_expr(expr) -> None:
    try:
        eval_expr(str(expr), np.linspace(0, 1, 4, endpoint=False))
    except (ValueError, KeyError, SyntaxError, TypeError) as exc:
        raise ConfigError(f"bad expression {expr!r}: {exc}") from None


def load_config(path, kind: str | None = None) -> Scenario:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    return parse_config(doc, kind)


def scenario_library() -> dict:
    """Shipped scenarios, name -> path."""
    root = resources.files("voltlab") / "scenarios"
    return {p.name[:-5]: Path(str(p)) for p in root.iterdir() if p.name.endswith(".json")}


# ---------------------------------------------------------------------------
# running
# ---------------------------------------------------------------------------


def run_scenario(sc: Scenario, out: Path | None = None, seed: int | None = None,
                 grid: int | None = None) -> ScenarioResult:
    """Run every check of ``sc``; failures inside a check become failed assertions."""
    seed = seed if seed is not None else sc.seed
    grid = grid if grid is not None else sc.grid
    res = ScenarioResult(sc.name, sc.kind)
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    for cname, kw in sc.checks.items():
        fn = checks.REGISTRY[sc.kind][cname]
        kw = dict(kw)
        if seed is not None and _accepts(fn, "seed"):
            kw["seed"] = seed
        if grid is not None:
            if _accepts(fn, "N"):
                kw["N"] = grid
            elif _accepts(fn, "Ns"):
                kw["Ns"] = [grid]
        try:
            cr = fn(out=out, **kw)
        except Exception as exc:  # a crashing check is a failed assertion, not a crash
            res.assertions.append(Assertion(f"{cname} ran", "", math.nan, "no exception",
                                            False))
            res.metrics[cname] = {"error": f"{type(exc).__name__}: {exc}"}
            continue
        for a in cr.assertions:
            a.name = f"{cname}: {a.name}"
        res.assertions += cr.assertions
        res.metrics[cname] = cr.metrics
    return res


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def emit_report(results) -> tuple[str, dict]:
    """Markdown table and JSON summary for a list of results.

    A result with no assertions gets a flagged ``no assertions`` row and
    counts as failed. The aggregate verdict is the AND over results.
    """
    if not results:
        raise ValueError("need at least one scenario result")
    lines = ["| scenario | assertion | anchor | measured | tolerance | verdict |",
             "|---|---|---|---|---|---|"]
    for r in results:
        if not r.assertions:
            lines.append(f"| {r.name} | no assertions | | | | FLAGGED |")
        for a in r.assertions:
            lines.append(f"| {r.name} | {a.name} | {a.anchor} | {_fmt(a.measured)} | "
                         f"{a.tolerance} | {'pass' if a.passed else 'FAIL'} |")
    verdict = all(r.passed for r in results)
    md = "\n".join(["# voltlab report", "", *lines, "",
                    f"Aggregate verdict: {'PASS' if verdict else 'FAIL'}", ""])
    summary = {"passed": verdict, "scenarios": [r.to_json() for r in results]}
    return md, summary


def _dump(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"


def write_outputs(res: ScenarioResult, out: Path, seed, grid) -> None:
    md, _ = emit_report([res])
    (out / "summary.json").write_text(_dump(res.to_json()))
    (out / "report.md").write_text(md)
    meta = {"timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
            "version": __version__, "backend": BACKEND, "seed": seed, "grid": grid}
    (out / "run_meta.json").write_text(_dump(meta))


def _result_from_json(d: dict) -> ScenarioResult:
    r = ScenarioResult(d["scenario"], d["kind"], metrics=d.get("metrics", {}))
    r.assertions = [Assertion(a["name"], a["anchor"], a["measured"], a["tolerance"], a["passed"])
                    for a in d["assertions"]]
    return r


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="voltlab", description=__doc__.split("\n")[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=Path, help=f"output directory (env {OUT_ENV} overrides the default)")
    common.add_argument("--quiet", action="store_true", help="print nothing on success")
    for k in KINDS:
        p = sub.add_parser(k, parents=[common], help=f"run a {k} scenario")
        p.add_argument("--config", help="scenario JSON path, or the name of a shipped scenario")
        p.add_argument("--seed", type=int, help="override the scenario seed (u64)")
        p.add_argument("--grid", type=int, help="override the grid size N")
    p = sub.add_parser("report", parents=[common], help="merge summary.json files into one report")
    p.add_argument("runs", nargs="*", type=Path, help="run directories (default: below --out)")
    p = sub.add_parser("list", help="list shipped scenarios")
    return ap


def _out_dir(args, name: str) -> Path:
    if args.out is not None:
        return args.out
    return Path(os.environ.get(OUT_ENV, "runs")) / name


def _resolve_config(arg: str, kind: str) -> Scenario:
    lib = scenario_library()
    if not Path(arg).exists() and arg in lib:
        arg = lib[arg]
    return load_config(arg, kind)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    say = (lambda *a: None) if getattr(args, "quiet", False) else print
    if args.command == "list":
        for name, path in sorted(scenario_library().items()):
            kind = json.loads(path.read_text())["kind"]
            print(f"{name:32s} {kind}")
        return EXIT_OK
    if args.command == "report":
        return _report(args, say)
    try:
        if args.config is None:
            sc = parse_config({"name": args.command, "kind": args.command}, args.command)
        else:
            sc = _resolve_config(args.config, args.command)
        if args.seed is not None and not 0 <= args.seed < 2 ** 64:
            raise ConfigError("--seed must be a u64")
        if args.grid is not None and args.grid < 1:
            raise ConfigError("--grid must be positive")
    except ConfigError as exc:
        print(f"voltlab: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = _out_dir(args, sc.name)
    res = run_scenario(sc, out, args.seed, args.grid)
    write_outputs(res, out, args.seed if args.seed is not None else sc.seed,
                  args.grid if args.grid is not None else sc.grid)
    for a in res.assertions:
        if not a.passed or not args.quiet:
            print(f"[{'pass' if a.passed else 'FAIL'}] {a.name}: {_fmt(a.measured)} ({a.tolerance})")
    say(f"{sc.name}: {'PASS' if res.passed else 'FAIL'} -> {out}")
    return EXIT_OK if res.passed else EXIT_ASSERT


def _report(args, say) -> int:
    runs = list(args.runs)
    base = args.out if args.out is not None else Path(os.environ.get(OUT_ENV, "runs"))
    if not runs:
        runs = sorted(p.parent for p in base.rglob("summary.json"))
    results = []
    for r in runs:
        f = r / "summary.json" if r.is_dir() else r
        try:
            results.append(_result_from_json(json.loads(f.read_text())))
        except (OSError, KeyError, json.JSONDecodeError) as exc:
            print(f"voltlab: cannot read {f}: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    if not results:
        print("voltlab: no summary.json found", file=sys.stderr)
        return EXIT_CONFIG
    md, summary = emit_report(results)
    base.mkdir(parents=True, exist_ok=True)
    (base / "report.md").write_text(md)
    (base / "report.json").write_text(_dump(summary))
    say(md)
    return EXIT_OK if summary["passed"] else EXIT_ASSERT


if __name__ == "__main__":
    sys.exit(main())
