"""Size-ladder experiments comparing measured counts with the incidence and joints bounds."""

from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .. import __version__
from ..bounds import BoundQuery, encode_number, joints_bound, kst_bound, st_bound
from .incidence import count_incidences, gen_incidence
from .joints import find_joints, gen_joints

INCIDENCE_GENERATORS = ("line_grid", "circles", "exp_curves", "planted")
JOINTS_GENERATORS = ("axis_grid", "coordinate_axes", "coplanar", "exp_planar")
INCIDENCE_BOUNDS = ("st_plane", "kst")
JOINTS_BOUNDS = ("joints",)

CSV_COLUMNS = ("generator", "n", "r", "s", "t", "size", "points", "curves", "measured",
               "bound_at_C1", "ratio", "fitted_exponent")


class ExperimentError(ValueError):
    """Experiment configuration is inconsistent."""


@dataclass
class ExperimentReport:
    config: dict
    rows: list
    fitted_exponent: float | None
    fitted_constant: float | None
    residuals: list
    uncertain: int
    wall_time: float = 0.0
    version: str = __version__
    extra: dict = field(default_factory=dict)

    def payload(self) -> dict:
        """Everything except the wall time, for reproducibility comparisons."""
        return {
            "config": self.config,
            "rows": self.rows,
            "fitted_exponent": _f(self.fitted_exponent),
            "fitted_constant": _f(self.fitted_constant),
            "residuals": [_f(r) for r in self.residuals],
            "uncertain": self.uncertain,
            "version": self.version,
            **self.extra,
        }

    def to_json(self) -> dict:
        return {**self.payload(), "wall_time": self.wall_time}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        for row in self.rows:
            w.writerow({k: row[k] for k in CSV_COLUMNS})
        return buf.getvalue()


def _f(x):
    return None if x is None else repr(float(x))


def fit_power_law(xs, ys):
    """Slope, constant and residuals of log y = a log x + log c over positive pairs."""
    pairs = [(float(x), float(y)) for x, y in zip(xs, ys) if x > 0 and y > 0]
    if len(pairs) < 2:
        return None, None, []
    lx = np.log([p[0] for p in pairs])
    ly = np.log([p[1] for p in pairs])
    a, c = np.polyfit(lx, ly, 1)
    res = ly - (a * lx + c)
    return float(a), float(math.exp(c)), [float(r) for r in res]


def _bound_value(name: str, cfg: dict, cards: tuple):
    s, t, r = int(cfg.get("s", 2)), int(cfg.get("t", 2)), int(cfg.get("r", 0))
    eps = Fraction(str(cfg.get("eps", 0)))
    if name == "st_plane":
        return st_bound(BoundQuery(n=2, r=r, s=s, t=t, eps=eps, cardinalities=cards, C1=1, C2=1), plane=True)
    if name == "kst":
        return kst_bound(BoundQuery(s=s, t=t, cardinalities=cards, C=1))
    if name == "joints":
        if min(cards) == 0:
            return Fraction(0)
        return joints_bound(BoundQuery(n=len(cards), r=r, eps=eps, cardinalities=cards, C=1))
    raise ExperimentError(f"unknown bound {name!r}")


def _run_item(cfg: dict, size, seed: int) -> dict:
    kind = cfg["generator"]
    params = dict(cfg.get("params", {}))
    params[cfg.get("param", "k")] = size
    if kind in INCIDENCE_GENERATORS:
        inst = gen_incidence(kind, params, seed)
        measured, graph = count_incidences(inst)
        cards = (len(inst.points), len(inst.curves))
        n, uncertain, x = 2, len(graph.uncertain), cards[0]
        points, curves = cards
    else:
        inst = gen_joints(kind, params, seed)
        res = find_joints(inst, float(cfg.get("tol_span", 1e-9)))
        measured, uncertain = res.count, len(res.uncertain)
        cards = tuple(len(f) for f in inst.families)
        n, x = inst.n, sum(cards)
        points, curves = measured, sum(cards)
    bound = _bound_value(cfg["bound"], cfg, cards)
    ratio = (measured / float(bound)) if float(bound) > 0 else (0.0 if measured == 0 else math.inf)
    return {
        "generator": kind,
        "n": n,
        "r": int(cfg.get("r", 0)),
        "s": int(cfg.get("s", 2)),
        "t": int(cfg.get("t", 2)),
        "size": str(size),
        "seed": seed,
        "points": points,
        "curves": curves,
        "x": x,
        "measured": measured,
        "bound_at_C1": encode_number(bound),
        "ratio": repr(float(ratio)),
        "uncertain": uncertain,
    }


def run_experiment(cfg: dict, threads: int = 1) -> ExperimentReport:
    """Run a size ladder.

    Config keys: ``generator``, ``bound``, ``ladder`` (values of ``param``,
    default ``k``), optional ``params``, ``seeds``, ``s``, ``t``, ``r``,
    ``eps``, ``tol_span``. The exponent is fitted against |P| for incidence
    ladders and against the total number of curves for joints ladders.
    """
    kind, bound = cfg.get("generator"), cfg.get("bound")
    if kind in INCIDENCE_GENERATORS:
        if bound not in INCIDENCE_BOUNDS:
            raise ExperimentError(f"bound {bound!r} does not apply to incidence generator {kind!r}")
    elif kind in JOINTS_GENERATORS:
        if bound not in JOINTS_BOUNDS:
            raise ExperimentError(f"bound {bound!r} does not apply to joints generator {kind!r}")
    else:
        raise ExperimentError(f"unknown generator {kind!r}")
    seeds = [int(s) for s in cfg.get("seeds", [0xC0FFEE])]
    grid = [(size, seed) for seed in seeds for size in cfg.get("ladder", [])]
    t0 = time.perf_counter()
    if threads > 1 and len(grid) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(lambda it: _run_item(cfg, *it), grid))
    else:
        rows = [_run_item(cfg, *it) for it in grid]
    exponent, constant, residuals = fit_power_law([r["x"] for r in rows], [r["measured"] for r in rows])
    for r in rows:
        r["fitted_exponent"] = _f(exponent)
    return ExperimentReport(
        config=dict(cfg),
        rows=rows,
        fitted_exponent=exponent,
        fitted_constant=constant,
        residuals=residuals,
        uncertain=sum(r["uncertain"] for r in rows),
        wall_time=time.perf_counter() - t0,
    )
