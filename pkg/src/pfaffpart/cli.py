"""Command line entry point: ``pfaffpart <subcommand> --input FILE``.

Every subcommand reads a JSON document, validates it against the shipped
schema, runs, and writes a report envelope. Exit codes: 0 success,
1 certified failure (a checked bound is violated), 2 input error,
3 budget exhausted (partial output is still written).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
import warnings
from fractions import Fraction
from importlib import resources

import jsonschema
import numpy as np

from . import __version__
from .bounds import BOUND_NAMES, BoundQuery, InvalidBoundQuery, evaluate_bound, encode_number, khovanskii_bound
from .chains import chain_from_json
from .interval import set_precision
from .lab import (
    ExperimentError, IncidenceInstance, JointsInstance, count_incidences, find_joints, gen_incidence,
    gen_joints, run_experiment,
)
from .partition import DEFAULT_SEED, Partition, build_partition, pfaffian_partition
from .pfaffian import ParametricCurve, PfaffianFunction
from .poly import MultiPoly
from .topology import SolveConfig, components_along_curve, isolate_roots_1d, solve_system_2d

SUBCOMMANDS = ("bounds", "roots", "components", "solve2d", "partition", "pfaffian-partition", "incidence", "joints")
SCHEMA_VERSION = 1

EXIT_OK, EXIT_CERTIFIED_FAILURE, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2, 3


class InputError(ValueError):
    """The input document is malformed or inconsistent."""


def load_schema(name: str) -> dict:
    text = resources.files("pfaffpart").joinpath("schemas", f"{name}.v{SCHEMA_VERSION}.json").read_text()
    return json.loads(text)


def _validate(doc, schema_name: str) -> None:
    try:
        jsonschema.validate(doc, load_schema(schema_name))
    except jsonschema.ValidationError as e:
        path = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise InputError(f"schema violation at {path}: {e.message}") from None


# -- subcommand runners: each returns (result dict, exit code) --------------------------------

def _solve_config(doc: dict, args) -> SolveConfig:
    kw = dict(doc.get("config", {}))
    if args.budget is not None:
        kw["budget"] = args.budget
    return SolveConfig(**kw)


def run_bounds(doc: dict, args):
    items = doc["queries"] if "queries" in doc else [doc]
    out = []
    for item in items:
        name = item["bound"]
        if name not in BOUND_NAMES:
            raise InputError(f"unknown bound {name!r}")
        q = BoundQuery.from_json(item.get("query", {}))
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            value, exps = evaluate_bound(name, q)
        out.append({
            "bound": name,
            "query": q.to_json(),
            "value": encode_number(value),
            "value_float": repr(float(value)),
            "exponents": {k: str(v) for k, v in sorted(exps.items())},
            "warnings": [str(w.message) for w in caught],
        })
    return {"results": out}, EXIT_OK


def run_roots(doc: dict, args):
    f = PfaffianFunction.from_json(doc["function"])
    res = isolate_roots_1d(f, _domain(doc["domain"]), _solve_config(doc, args))
    out = res.to_json()
    fmt = f.format()
    bound = khovanskii_bound(BoundQuery(n=1, r=fmt.r, alpha=fmt.alpha, xi=fmt.xi, betas=(max(int(fmt.beta), 0),)))
    out["khovanskii_bound"] = encode_number(bound)
    code = EXIT_OK
    if res.count > bound:
        code = EXIT_CERTIFIED_FAILURE
    elif not res.complete:
        code = EXIT_BUDGET
    return out, code


def _domain(pair):
    def dec(v):
        if v in ("inf", "-inf"):
            return float(v)
        return Fraction(v)
    a, b = (dec(v) for v in pair)
    return a, b


def run_components(doc: dict, args):
    P = MultiPoly.from_json(doc["P"])
    gamma = ParametricCurve.from_json(doc["curve"])
    res = components_along_curve(P, gamma, _solve_config(doc, args))
    out = res.to_json()
    return out, EXIT_OK if res.roots.complete else EXIT_BUDGET


def run_solve2d(doc: dict, args):
    f1 = PfaffianFunction.from_json(doc["f1"])
    f2 = PfaffianFunction.from_json(doc["f2"])
    box = [tuple(Fraction(v) for v in side) for side in doc["box"]]
    res = solve_system_2d(f1, f2, box, _solve_config(doc, args))
    return res.to_json(), EXIT_OK if res.complete else EXIT_BUDGET


def _collections(doc: dict):
    return [[tuple(Fraction(v) for v in p) for p in coll] for coll in doc["collections"]]


def _partition_outcome(part, args):
    out = part.to_json()
    violated = any(row["max_load"] > Fraction(row["ceiling"]) for row in out["table"])
    levels = part.lifted.levels if hasattr(part, "lifted") else part.levels
    unmet = not all(lv.met for lv in levels)
    out["ham_sandwich_met"] = not unmet
    if violated:
        return out, EXIT_CERTIFIED_FAILURE
    return out, EXIT_BUDGET if unmet else EXIT_OK


def run_partition(doc: dict, args):
    part = build_partition(_collections(doc), int(doc["D"]), tol=float(doc.get("tol", 0.05)),
                           budget=args.budget or int(doc.get("budget", 2000)), seed=args.seed, n=doc.get("n"))
    return _partition_outcome(part, args)


def run_pfaffian_partition(doc: dict, args):
    chain = chain_from_json(doc["chain"])
    part = pfaffian_partition(_collections(doc), chain, int(doc["D"]), tol=float(doc.get("tol", 0.05)),
                              budget=args.budget or int(doc.get("budget", 2000)), seed=args.seed)
    return _partition_outcome(part, args)


def run_incidence(doc: dict, args):
    if "experiment" in doc:
        return _experiment(doc["experiment"], args)
    if "instance" in doc:
        inst = IncidenceInstance.from_json(doc["instance"])
    else:
        inst = gen_incidence(doc["generator"], doc.get("params", {}), args.seed)
    count, graph = count_incidences(inst, _solve_config(doc, args))
    return {"count": count, "graph": graph.to_json(), "instance_meta": inst.meta,
            "planted_recovered": None if inst.ground_truth is None
            else set(map(tuple, inst.ground_truth)) <= set(graph.edges)}, EXIT_OK


def run_joints(doc: dict, args):
    if "experiment" in doc:
        return _experiment(doc["experiment"], args)
    if "instance" in doc:
        inst = JointsInstance.from_json(doc["instance"])
    else:
        inst = gen_joints(doc["generator"], doc.get("params", {}), args.seed)
    res = find_joints(inst, float(doc.get("tol_span", 1e-9)), _solve_config(doc, args))
    out = res.to_json()
    out["instance_meta"] = inst.meta
    return out, EXIT_OK


def _experiment(cfg: dict, args):
    cfg = dict(cfg)
    cfg.setdefault("seeds", [args.seed])
    try:
        rep = run_experiment(cfg, threads=args.threads)
    except ExperimentError as e:
        raise InputError(str(e)) from None
    out = rep.payload()
    out["_csv"] = rep.to_csv()
    return out, EXIT_OK


RUNNERS = {
    "bounds": run_bounds,
    "roots": run_roots,
    "components": run_components,
    "solve2d": run_solve2d,
    "partition": run_partition,
    "pfaffian-partition": run_pfaffian_partition,
    "incidence": run_incidence,
    "joints": run_joints,
}


# -- SVG rendering -----------------------------------------------------------------------------

def render_svg(part: Partition, collections, size: int = 512) -> str:
    """Points coloured by collection and factor zero curves from a sign grid.

    Grid cells whose corner signs differ are drawn; cells without a corner sign
    change are refined on a 4 x 4 subgrid to catch curve pieces that enter and
    leave a cell between corners.
    """
    pts = np.array([[float(v) for v in p] for coll in collections for p in coll]).reshape(-1, 2)
    if len(pts):
        lo, hi = pts.min(axis=0), pts.max(axis=0)
    else:
        lo, hi = np.array([-1.0, -1.0]), np.array([1.0, 1.0])
    pad = 0.05 * np.maximum(hi - lo, 1e-9)
    lo, hi = lo - pad, hi + pad
    xs = np.linspace(lo[0], hi[0], size + 1)
    ys = np.linspace(lo[1], hi[1], size + 1)
    X, Y = np.meshgrid(xs, ys, indexing="xy")
    cell = (hi - lo) / size
    parts = []
    palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
    for li, f in enumerate(part.factors):
        from .interval import CompiledPoly

        cp = CompiledPoly(f)
        S = np.sign(cp(X, Y))
        change = (S[:-1, :-1] != S[1:, :-1]) | (S[:-1, :-1] != S[:-1, 1:]) | (S[:-1, :-1] != S[1:, 1:])
        quiet = ~change
        sub = np.linspace(0, 1, 5)
        for a in sub[1:-1]:
            for b in sub[1:-1]:
                Sab = np.sign(cp(X[:-1, :-1] + a * cell[0], Y[:-1, :-1] + b * cell[1]))
                change |= quiet & (Sab != S[:-1, :-1])
        color = palette[li % len(palette)]
        for j, i in zip(*np.nonzero(change)):
            px, py = i, size - 1 - j
            parts.append(f'<rect x="{px}" y="{py}" width="1" height="1" fill="{color}"/>')
    for ci, coll in enumerate(collections):
        color = palette[(ci + 3) % len(palette)]
        for p in coll:
            px = (float(p[0]) - lo[0]) / (hi[0] - lo[0]) * size
            py = size - (float(p[1]) - lo[1]) / (hi[1] - lo[1]) * size
            parts.append(f'<circle cx="{px:.2f}" cy="{py:.2f}" r="1.5" fill="{color}"/>')
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
            f'viewBox="0 0 {size} {size}"><rect width="{size}" height="{size}" fill="white"/>'
            + "".join(parts) + "</svg>\n")


# -- dispatch -------------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pfaffpart", description="Pfaffian partitioning toolkit.")
    ap.add_argument("--version", action="version", version=f"pfaffpart {__version__}")
    sub = ap.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--input", "-i", required=True, help="input JSON file ('-' for stdin)")
        p.add_argument("--output", "-o", default="-", help="output file ('-' for stdout)")
        p.add_argument("--seed", type=lambda s: int(s, 0), default=DEFAULT_SEED, help="64-bit seed (default 0xC0FFEE)")
        p.add_argument("--precision", type=int, default=None, help="bits for high-precision fallbacks")
        p.add_argument("--format", choices=("json", "csv", "svg"), default="json")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--budget", type=int, default=None, help="node budget for searches")
    return ap


def _read_input(path: str) -> dict:
    try:
        text = sys.stdin.read() if path == "-" else open(path, encoding="utf-8").read()
    except OSError as e:
        raise InputError(f"cannot read input: {e}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise InputError(f"JSON parse error at line {e.lineno} column {e.colno}: {e.msg}") from None


def _emit(text: str, path: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def dispatch(args) -> int:
    if args.seed < 0 or args.seed >= 2**64:
        print("error: seed must be a 64-bit unsigned integer", file=sys.stderr)
        return EXIT_INPUT
    if args.precision is not None:
        try:
            set_precision(args.precision)
        except ValueError as e:
            print(f"error: {e}", file=sys.stderr)
            return EXIT_INPUT
    if args.format == "svg" and args.subcommand != "partition":
        print("error: svg output is only available for 2-D partitions", file=sys.stderr)
        return EXIT_INPUT
    t0 = time.perf_counter()
    try:
        doc = _read_input(args.input)
        _validate(doc, args.subcommand)
        result, code = RUNNERS[args.subcommand](doc, args)
    except (InputError, InvalidBoundQuery, ValueError, KeyError, TypeError, ZeroDivisionError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    csv_text = result.pop("_csv", None)
    if args.format == "svg":
        if result["schedule"]["n"] != 2:
            print("error: svg output needs points in the plane", file=sys.stderr)
            return EXIT_INPUT
        part = build_partition(_collections(doc), int(doc["D"]), tol=float(doc.get("tol", 0.05)),
                               budget=args.budget or int(doc.get("budget", 2000)), seed=args.seed, n=doc.get("n"))
        _emit(render_svg(part, _collections(doc)), args.output)
        return code
    if args.format == "csv":
        if csv_text is None:
            print("error: csv output is only available for experiment ladders", file=sys.stderr)
            return EXIT_INPUT
        _emit(csv_text, args.output)
        return code
    report = {
        "schema": f"pfaffpart.{args.subcommand}.v{SCHEMA_VERSION}",
        "version": __version__,
        "subcommand": args.subcommand,
        "seed": args.seed,
        "precision": args.precision,
        "exit_code": code,
        "result": result,
        "wall_time": time.perf_counter() - t0,
    }
    jsonschema.validate(report, load_schema("report"))
    _emit(json.dumps(report, indent=2, sort_keys=True) + "\n", args.output)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return dispatch(args)


if __name__ == "__main__":
    sys.exit(main())
