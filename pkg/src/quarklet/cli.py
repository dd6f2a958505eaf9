"""Command line interface: ``quarklet <command> [options]``.

Exit codes: 0 success, 2 invalid parameters, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import corpus
from ._filtergen import format_table
from .multiscale import DEFAULT_DEPTH, cdf_filters, discrete_biorthogonality_residual
from .normest import (
    DifferenceNormConfig,
    difference_norm_partials,
    equivalence_experiment,
    lr_norm,
    morrey_norm,
    paramset_label,
)
from .regions import classify, morrey_admissible
from .seqspace import SpaceParams, calderon_split, seqnorm, seqnorm_morrey
from .transform import CoefficientSet, PiecewiseFunction, analyze, roundtrip_error, synthesize

log = logging.getLogger("quarklet")

EXIT_OK, EXIT_PARAMS, EXIT_IO = 0, 2, 3


@dataclass
class ExperimentConfig:
    m: int = 3
    mtilde: int = 3
    params: list = field(default_factory=lambda: [{"s": 0.7, "r": 2, "q": 2}])
    window: list = field(default_factory=lambda: [-6.0, 6.0])
    grid_level: int = 14
    J: int | None = None
    corpus: list = field(default_factory=lambda: list(corpus.EQUIVALENCE_FAMILY))
    dilations: list = field(default_factory=lambda: [0, 1, 2, 3])
    depth: int = DEFAULT_DEPTH
    i_max: int | None = None
    drift_levels: int = 2
    budget: float = 10.0
    seed: int = 0
    out: str = "out"
    calderon: dict = field(default_factory=lambda: {
        "endpoints": [[[1.0, 2.0, 2.0], [2.0, 4.0, 3.0]]],
        "theta": 0.5,
        "n_sets": 20,
        "n_coeffs": 30,
        "levels": [-1, 5],
        "pmax": 2,
    })

    @classmethod
    def load(cls, path: str | None) -> "ExperimentConfig":
        if path is None:
            return cls()
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
        return cls(**data)

    @property
    def level_J(self) -> int:
        return self.grid_level - 4 if self.J is None else self.J

    def space_params(self) -> list[SpaceParams]:
        return [SpaceParams(float(p["s"]), float(p["r"]), float(p["q"]), int(p.get("m", self.m)),
                            None if p.get("u") is None else float(p["u"])) for p in self.params]

    def grid_function(self, spec: str) -> PiecewiseFunction:
        fp = cdf_filters(self.m, self.mtilde)
        return PiecewiseFunction.from_callable(corpus.resolve(spec, fp), tuple(self.window), self.grid_level)


def _parse_params(text: str) -> dict:
    """``s,r,q[,u]`` -> dict."""
    parts = [float(x) for x in text.split(",")]
    if len(parts) not in (3, 4):
        raise argparse.ArgumentTypeError("expected s,r,q or s,r,q,u")
    d = dict(zip(("s", "r", "q", "u"), parts))
    return d


def _apply_overrides(cfg: ExperimentConfig, ns: argparse.Namespace) -> ExperimentConfig:
    for name in ("m", "mtilde", "grid_level", "J", "depth", "i_max", "seed", "out", "budget"):
        val = getattr(ns, name, None)
        if val is not None:
            setattr(cfg, name, val)
    if getattr(ns, "window", None):
        cfg.window = list(ns.window)
    if getattr(ns, "params", None):
        cfg.params = ns.params
    if getattr(ns, "corpus", None):
        cfg.corpus = ns.corpus
    return cfg


def _out_dir(cfg: ExperimentConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, data) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=2, sort_keys=True, allow_nan=True)
        fh.write("\n")


def _load_function(spec: str, cfg: ExperimentConfig) -> PiecewiseFunction:
    """Builtin corpus spec, or a CSV file with columns ``x,value`` interpolated onto the grid."""
    path = Path(spec)
    if path.suffix == ".csv" or path.exists():
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        order = np.argsort(data[:, 0])
        x, y = data[order, 0], data[order, 1]
        return PiecewiseFunction.from_callable(lambda t: np.interp(t, x, y, left=0.0, right=0.0),
                                               tuple(cfg.window), cfg.grid_level)
    return cfg.grid_function(spec)


def _norms_for(c: CoefficientSet, plist: list[SpaceParams]) -> list[dict]:
    out = []
    for p in plist:
        verdict = (morrey_admissible(p.s, p.u, p.r, p.q, p.m) if p.u is not None
                   else classify(p.s, p.r, p.q, p.m))
        if not verdict.admissible:
            log.warning("parameters %s are not admissible (%s)", paramset_label(p), verdict.case)
        value = seqnorm_morrey(p, c) if p.u is not None else seqnorm(p, c)
        out.append({"paramset": paramset_label(p), "seqnorm": value,
                    "admissible": verdict.admissible, "region": verdict.region})
    return out


# -- commands ----------------------------------------------------------------------


def cmd_filters(ns, cfg: ExperimentConfig) -> int:
    fp = cdf_filters(ns.m_pos, ns.mtilde_pos)
    text = format_table([(fp.m, fp.mtilde)])
    text += f"# discrete biorthogonality residual: {discrete_biorthogonality_residual(fp):.3e}\n"
    if ns.out:
        out = _out_dir(cfg)
        (out / f"cdf_{fp.m}_{fp.mtilde}.txt").write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return EXIT_OK


def cmd_decompose(ns, cfg: ExperimentConfig) -> int:
    fp = cdf_filters(cfg.m, cfg.mtilde)
    f = _load_function(ns.function, cfg)
    c = analyze(f, fp, cfg.level_J, cfg.depth).nonzero()
    out = _out_dir(cfg)
    c.to_csv(out / "coefficients.csv")
    summary = {
        "function": ns.function,
        "m": cfg.m, "mtilde": cfg.mtilde, "J": cfg.level_J, "grid_level": cfg.grid_level,
        "window": list(cfg.window), "depth": cfg.depth,
        "n_coefficients": len(c),
        "roundtrip_error": roundtrip_error(f, fp, cfg.level_J, cfg.depth),
        "norms": _norms_for(c, cfg.space_params()),
    }
    _write_json(out / "decompose_summary.json", summary)
    print(json.dumps(summary, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_synthesize(ns, cfg: ExperimentConfig) -> int:
    fp = cdf_filters(cfg.m, cfg.mtilde)
    c = CoefficientSet.from_csv(ns.coefficients)
    grid = PiecewiseFunction.zeros(tuple(cfg.window), cfg.grid_level)
    g = synthesize(c, fp, grid)
    out = _out_dir(cfg)
    with open(out / "synthesis.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "value"])
        for x, v in zip(g.nodes, g.values):
            w.writerow([f"{x:.17g}", f"{v:.17g}"])
    print(f"wrote {len(g.values)} samples to {out / 'synthesis.csv'}")
    return EXIT_OK


def cmd_norm(ns, cfg: ExperimentConfig) -> int:
    f = _load_function(ns.function, cfg)
    results = []
    for p in cfg.space_params():
        entry = {"paramset": paramset_label(p), "lr": lr_norm(f, p.r)}
        if p.u is not None:
            entry["morrey"] = morrey_norm(f, p.u, p.r)
        dcfg = DifferenceNormConfig.default(p, f.level, **({} if cfg.i_max is None else {"i_max": cfg.i_max}))
        res = difference_norm_partials(f, p, dcfg)
        entry.update(difference_norm=res.value, tail_estimate=res.tail_estimate,
                     N=dcfg.N, w=dcfg.w, i_max=dcfg.i_max)
        results.append(entry)
    out = _out_dir(cfg)
    _write_json(out / "norm_summary.json", {"function": ns.function, "results": results})
    print(json.dumps(results, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_equiv(ns, cfg: ExperimentConfig) -> int:
    fp = cdf_filters(cfg.m, cfg.mtilde)
    names = [f"{spec}@{t}" if t else spec for spec in cfg.corpus for t in cfg.dilations]
    functions = {name: cfg.grid_function(name) for name in names}
    rows, summaries, inadmissible = [], [], []
    for p in cfg.space_params():
        morrey = p.u is not None and p.u > p.r
        verdict = (morrey_admissible(p.s, p.u, p.r, p.q, p.m) if morrey
                   else classify(p.s, p.r, p.q, p.m))
        if not verdict.admissible:
            inadmissible.append({"paramset": paramset_label(p), **verdict.to_dict()})
            continue
        dcfg = None if morrey else DifferenceNormConfig.default(
            p, cfg.grid_level, **({} if cfg.i_max is None else {"i_max": cfg.i_max}))
        rep = equivalence_experiment(functions, p, fp, cfg.level_J, dcfg, cfg.budget,
                                     cfg.drift_levels, cfg.depth)
        rows.append(rep)
        summaries.append({"paramset": paramset_label(p), **rep.summary()})
    if not rows:
        log.error("no admissible parameter set in the grid")
        return EXIT_PARAMS
    out = _out_dir(cfg)
    with open(out / "equiv.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["function", "paramset", "seqnorm", "diffnorm", "ratio"])
        for rep in rows:
            for r in rep.rows:
                w.writerow([r.function, r.paramset, f"{r.seqnorm:.17g}",
                            "" if r.diffnorm is None else f"{r.diffnorm:.17g}",
                            "" if r.ratio is None else f"{r.ratio:.17g}"])
    summary = {"m": cfg.m, "mtilde": cfg.mtilde, "J": cfg.level_J, "grid_level": cfg.grid_level,
               "window": list(cfg.window), "paramsets": summaries, "inadmissible": inadmissible}
    _write_json(out / "equiv_summary.json", summary)
    print(json.dumps(summary, indent=2, sort_keys=True))
    return EXIT_OK


def run_calderon_suite(cfg: ExperimentConfig) -> dict:
    cal = cfg.calderon
    rng = np.random.default_rng(cfg.seed)
    theta = float(cal.get("theta", 0.5))
    report = []
    for e0, e1 in cal["endpoints"]:
        if e0[0] <= 0 or e1[0] <= 0:
            raise ValueError("endpoint smoothness must be positive")
        resid, ca, cb = [], [], []
        for _ in range(int(cal.get("n_sets", 20))):
            c = corpus.random_coefficient_set(rng, int(cal.get("n_coeffs", 30)),
                                              tuple(cal.get("levels", (-1, 5))), pmax=int(cal.get("pmax", 0)))
            split = calderon_split(c, e0, e1, theta, cfg.m)
            a, b = split.constants()
            resid.append(split.residual)
            ca.append(a)
            cb.append(b)
        report.append({"endpoint0": list(e0), "endpoint1": list(e1), "theta": theta,
                       "max_residual": max(resid), "C_alpha_max": max(ca), "C_beta_max": max(cb),
                       "C_alpha_min": min(ca), "C_beta_min": min(cb)})
    return {"seed": cfg.seed, "m": cfg.m, "suites": report}


def cmd_calderon(ns, cfg: ExperimentConfig) -> int:
    summary = run_calderon_suite(cfg)
    out = _out_dir(cfg)
    _write_json(out / "calderon_summary.json", summary)
    print(json.dumps(summary, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_regions(ns, cfg: ExperimentConfig) -> int:
    if ns.u is not None:
        verdict = morrey_admissible(ns.s, ns.u, ns.r, ns.q, ns.m_pos)
    else:
        verdict = classify(ns.s, ns.r, ns.q, ns.m_pos)
    print(json.dumps(verdict.to_dict(), indent=2))
    return EXIT_OK


# -- entry point -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON experiment configuration")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="output directory")
    common.add_argument("--m", type=int)
    common.add_argument("--mtilde", type=int)
    common.add_argument("--grid-level", dest="grid_level", type=int)
    common.add_argument("--J", type=int)
    common.add_argument("--depth", type=int)
    common.add_argument("--i-max", dest="i_max", type=int)
    common.add_argument("--budget", type=float)
    common.add_argument("--window", type=float, nargs=2, metavar=("A", "B"))
    common.add_argument("--params", type=_parse_params, action="append", metavar="S,R,Q[,U]")
    common.add_argument("--corpus", nargs="+")

    parser = argparse.ArgumentParser(prog="quarklet", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("filters", parents=[common], help="print a CDF filter table")
    p.add_argument("m_pos", metavar="m", type=int)
    p.add_argument("mtilde_pos", metavar="mtilde", type=int)
    p.set_defaults(func=cmd_filters)

    p = sub.add_parser("decompose", parents=[common], help="analyze a function into coefficients")
    p.add_argument("function", help="builtin spec (e.g. bump, bspline:3@1) or CSV with x,value")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("synthesize", parents=[common], help="evaluate a coefficient CSV on a grid")
    p.add_argument("coefficients")
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("norm", parents=[common], help="function-side norms")
    p.add_argument("function")
    p.set_defaults(func=cmd_norm)

    p = sub.add_parser("equiv", parents=[common], help="coefficient vs difference norm experiment")
    p.set_defaults(func=cmd_equiv)

    p = sub.add_parser("calderon", parents=[common], help="randomized Calderon splitting suite")
    p.set_defaults(func=cmd_calderon)

    p = sub.add_parser("regions", parents=[common], help="classify a parameter tuple")
    p.add_argument("s")
    p.add_argument("r")
    p.add_argument("q")
    p.add_argument("m_pos", metavar="m", type=int)
    p.add_argument("--u", default=None)
    p.set_defaults(func=cmd_regions)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        cfg = _apply_overrides(ExperimentConfig.load(ns.config), ns)
        return ns.func(ns, cfg)
    except OSError as exc:
        log.error("%s", exc)
        return EXIT_IO
    except (ValueError, TypeError, ArithmeticError) as exc:
        log.error("%s", exc)
        return EXIT_PARAMS


if __name__ == "__main__":
    sys.exit(main())
