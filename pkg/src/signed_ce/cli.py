"""Command-line runner: stages, level tables, residuals, flows, octahedron data.

Every subcommand accepts the shared options.  A config file holds
``key = value`` lines (``#`` starts a comment) with keys ``stages``,
``tol``, ``suite``, ``out``, ``format``, ``seed`` and ``search_cap``;
command-line flags override it.

Exit status: 0 when every check passes, 1 when a check fails, 2 on usage
or configuration errors.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import asdict, dataclass, fields
from fractions import Fraction
from pathlib import Path

from . import __version__
from .acceptance import CHECKS, SEARCH_CAP, run_checks, stages
from .ce_residual import GraphField, bump_suite, polynomial_suite, residual_rows
from .errors import ResourceLimitExceeded, SignedCEError
from .flow1d import branch_characteristic, characteristic_csv, constant_characteristic
from .octa3d import OctField, edge_fluxes, flux_table_csv, slice_tv_csv, space_suite, wireframe_csv
from .pwl import area_formula_check, max_monotone_run, polyline_csv, stage_function, sup_preimage_count
from .rational import format_q
from .stagegen import build

SUITES = tuple(CHECKS)
FORMATS = ("json", "csv")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    stages: int = 12
    tol: float = 1e-10
    suite: tuple[str, ...] = SUITES
    out: str | None = None
    format: str = "json"
    seed: int = 0
    search_cap: int = SEARCH_CAP

    def __post_init__(self):
        if self.stages < 0:
            raise UsageError("stages must be >= 0")
        if not self.tol > 0:
            raise UsageError("tol must be > 0")
        if self.format not in FORMATS:
            raise UsageError(f"format must be one of {FORMATS}")
        bad = [s for s in self.suite if s not in SUITES]
        if bad:
            raise UsageError(f"unknown suite(s) {bad}; choose from {SUITES}")


def _parse_suite(text) -> tuple[str, ...]:
    if isinstance(text, (list, tuple)):
        items = [p for t in text for p in str(t).split(",")]
    else:
        items = str(text).split(",")
    items = [i.strip() for i in items if i.strip()]
    if not items or items == ["all"]:
        return SUITES
    return tuple(items)


_CASTS = {"stages": int, "tol": float, "suite": _parse_suite, "out": str, "format": str, "seed": int, "search_cap": int}


def read_config(path: str) -> dict:
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key = value")
        key, value = (p.strip() for p in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _CASTS:
            raise UsageError(f"{path}:{n}: unknown key {key!r}")
        try:
            out[key] = _CASTS[key](value)
        except ValueError as exc:
            raise UsageError(f"{path}:{n}: bad value for {key}: {value!r}") from exc
    return out


def make_config(args: argparse.Namespace) -> RunConfig:
    values = read_config(args.config) if args.config else {}
    for f in fields(RunConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            values[f.name] = _CASTS[f.name](v) if f.name == "suite" else v
    return RunConfig(**values)


# -- output helpers ---------------------------------------------------------------


def _rows_csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: json.dumps(v) if isinstance(v, (dict, list)) else v for k, v in r.items()})
    return buf.getvalue()


def _emit(cfg: RunConfig, name: str, text: str, out=sys.stdout) -> None:
    if cfg.out:
        path = Path(cfg.out)
        path.mkdir(parents=True, exist_ok=True)
        (path / name).write_text(text)
    else:
        out.write(text if text.endswith("\n") else text + "\n")


def _emit_table(cfg: RunConfig, stem: str, rows: list[dict], out=sys.stdout) -> None:
    if cfg.format == "csv":
        _emit(cfg, f"{stem}.csv", _rows_csv(rows), out)
    else:
        _emit(cfg, f"{stem}.json", json.dumps(rows, indent=2), out)


# -- subcommands --------------------------------------------------------------------


def run(cfg: RunConfig, out=sys.stdout) -> int:
    """Run the selected suites and write the report; returns the exit status."""
    results = run_checks(cfg.suite, k_max=cfg.stages, tol=cfg.tol, seed=cfg.seed, search_cap=cfg.search_cap)
    rows = [r.as_dict() for r in results]
    _emit_table(cfg, "report", rows, out)
    for r in results:
        print(r.line(), file=sys.stderr)
    return 0 if all(r.passed for r in results) else 1


def emit_graph(K: int, cfg: RunConfig | None = None, out=sys.stdout) -> str:
    cfg = cfg or RunConfig(stages=K)
    if K > cfg.stages:
        raise UsageError(f"K={K} exceeds stages={cfg.stages}")
    text = polyline_csv(stage_function(build(K)))
    _emit(cfg, f"graph_K{K}.csv", text, out)
    return text


def cmd_construct(cfg: RunConfig, out) -> int:
    s = build(cfg.stages)
    doc = s.to_dict()
    doc["boundary_set"] = [format_q(e) for e in s.boundary_set]
    doc["invariant_violations"] = s.invariant_violations()
    _emit(cfg, f"stage_K{cfg.stages}.json", json.dumps(doc, indent=2), out)
    return 0 if not doc["invariant_violations"] else 1


def cmd_levels(cfg: RunConfig, out) -> int:
    rows = []
    for s in stages(cfg.stages):
        f = stage_function(s)
        count, (lo, hi) = sup_preimage_count(f)
        run_len, (a, b) = max_monotone_run(f)
        rows.append(
            {
                "stage": s.k,
                "sup_preimage_count": count,
                "witness_gap": [format_q(lo), format_q(hi)],
                "max_monotone_run": format_q(run_len),
                "run": [format_q(a), format_q(b)],
                "area": format_q(area_formula_check(f)),
            }
        )
    _emit_table(cfg, "levels", rows, out)
    return 0


def cmd_residual(cfg: RunConfig, out) -> int:
    rows = []
    ok = True
    for s in stages(cfg.stages):
        gf = GraphField(stage_function(s))
        for row in residual_rows(s.k, gf, polynomial_suite() + bump_suite(), cfg.tol):
            if row.mode == "exact":
                ok &= row.residual == row.defect and row.full_residual == 0
            else:
                ok &= abs(row.residual - row.defect) <= 1e-8 and abs(row.full_residual) <= 1e-8
            rows.append(row.as_dict())
    _emit_table(cfg, "residuals", rows, out)
    return 0 if ok else 1


def cmd_flow(cfg: RunConfig, out) -> int:
    # the branching demo lives on the first stage
    f = stage_function(build(1))
    a = constant_characteristic(Fraction(1, 8))
    b = branch_characteristic(f, Fraction(1, 8), Fraction(1, 3))
    _emit(cfg, "characteristic_constant.csv", characteristic_csv(a), out)
    _emit(cfg, "characteristic_branch.csv", characteristic_csv(b), out)
    return run(RunConfig(**{**asdict(cfg), "suite": ("flow",)}), out)


def cmd_octa(cfg: RunConfig, out) -> int:
    of = OctField(build(min(cfg.stages, 6)))
    _, phi = space_suite()[0]
    _emit(cfg, "flux_table.csv", flux_table_csv(edge_fluxes(of, phi)), out)
    _emit(cfg, "slice_tv.csv", slice_tv_csv(), out)
    _emit(cfg, "wireframe.csv", wireframe_csv(), out)
    return 0


def cmd_graph(cfg: RunConfig, out) -> int:
    emit_graph(cfg.stages, cfg, out)
    return 0


COMMANDS = {
    "construct": cmd_construct,
    "levels": cmd_levels,
    "residual": cmd_residual,
    "flow": cmd_flow,
    "octa": cmd_octa,
    "report": lambda cfg, out: run(cfg, out),
    "graph": cmd_graph,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--stages", "-K", type=int, help="maximal stage K_max (default 12)")
    common.add_argument("--tol", type=float, help="quadrature tolerance (default 1e-10)")
    common.add_argument("--suite", action="append", help=f"suite(s) to run: {', '.join(SUITES)} or all; repeatable or comma separated")
    common.add_argument("--out", help="output directory (default: stdout)")
    common.add_argument("--format", choices=FORMATS, help="report format (default json)")
    common.add_argument("--seed", type=int, help="random seed for sample points (default 0)")
    common.add_argument("--search-cap", dest="search_cap", type=int, help="last stage of the preimage-count search")
    common.add_argument("--config", help="key = value config file; flags override it")
    p = argparse.ArgumentParser(prog="signed-ce", description="Finite-stage checks for a signed continuity-equation counterexample.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    helps = {
        "construct": "build stage K and print its exact description",
        "levels": "preimage counts, monotone runs and mass per stage",
        "residual": "weak-form residual rows for every stage up to K",
        "flow": "characteristics and the flow checks",
        "octa": "octahedron flux tables, slice TV curve and wireframe",
        "report": "run the acceptance suites and write a pass/fail report",
        "graph": "polyline of the graph of f_K",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return p


def main(argv=None, out=sys.stdout) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        cfg = make_config(args)
        return COMMANDS[args.command](cfg, out)
    except (UsageError, ResourceLimitExceeded) as exc:
        print(f"signed-ce: {exc}", file=sys.stderr)
        return 2
    except SignedCEError as exc:
        print(f"signed-ce: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
