"""Command-line driver.

    geomruzsa axioms    --fixture symmetric:3
    geomruzsa ruzsa     --fixture cyclic:6 --A 0,1 --B 0,3 --C 0,2
    geomruzsa converge  --space euclid:2 --e 0,0 --a 1,0 --b 0,1 --eps 0.5,0.25,0.125
    geomruzsa inject    --space euclid:2 --eps 0.5 --mu 0.05 --sizes 5,5,5 --seed 1
    geomruzsa threshold --space heis1 --mu 0.1 --sizes 20,20,20 --seed 42 --eps-grid geometric:0.5,8

Exit status: 0 when the run completed (negative findings included), 1 when a
check that must hold for every group fixture failed, 2 on usage errors.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import delta_core as dc
from . import dilations as dl
from . import metric_ruzsa as mr
from .groups import GroupError, group_delta, parse_fixture, random_permutation, relabeled_delta

SCHEMA_VERSION = 1

CSV_COLUMNS = {
    "axioms": ["check", "ok", "counterexample"],
    "ruzsa": ["trial", "lhs", "rhs", "holds", "injective"],
    "converge": ["pair", "eps", "gap"],
    "inject": ["eps", "hypothesis_ok", "injective", "domain_size", "source_size"],
    "threshold": ["eps", "hypothesis_ok", "injective"],
}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    subcommand: str
    fixture: Optional[str] = None
    space: Optional[str] = None
    sets: dict = field(default_factory=dict)
    random_trials: Optional[int] = None
    max_size: Optional[int] = None
    relabel_seed: Optional[int] = None
    mode: str = "auto"
    count: int = dc.DEFAULT_SAMPLE_COUNT
    points: dict = field(default_factory=dict)
    random_pairs: Optional[int] = None
    eps_grid: list = field(default_factory=list)
    mu: Optional[float] = None
    tolerance: Optional[float] = None
    sizes: Optional[list] = None
    radius: float = 1.0
    sampler: str = "conditioned"
    seed: int = 0
    format: str = "json"
    output: Optional[str] = None
    timing: bool = False


# -- parsing helpers -----------------------------------------------------------

def _read_literal(text: str) -> list[str]:
    """A literal, or ``@path`` naming a file with one literal per line."""
    if text.startswith("@"):
        try:
            with open(text[1:]) as fh:
                return [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]
        except OSError as err:
            raise UsageError(f"cannot read {text[1:]}: {err}") from None
    return [text]


def parse_index_set(text: str) -> list[int]:
    items = []
    for line in _read_literal(text):
        try:
            items += [int(tok) for tok in line.split(",") if tok.strip()]
        except ValueError:
            raise UsageError(f"bad element list {line!r}") from None
    if not items:
        raise UsageError("empty set specification")
    return sorted(set(items))


def parse_point(text: str, dim: int) -> list[float]:
    try:
        p = [float(tok) for tok in text.split(",")]
    except ValueError:
        raise UsageError(f"bad point {text!r}") from None
    if len(p) != dim or not np.isfinite(p).all():
        raise UsageError(f"point {text!r} needs {dim} finite coordinates")
    return p


def parse_point_set(text: str, dim: int) -> list[list[float]]:
    pts = []
    for line in _read_literal(text):
        pts += [parse_point(tok, dim) for tok in line.split(";") if tok.strip()]
    if not pts:
        raise UsageError("empty point set specification")
    return pts


def parse_eps_grid(text: str) -> list[float]:
    """``0.5,0.25`` or ``geometric:r,n`` meaning r, r^2, ..., r^n."""
    try:
        if text.startswith("geometric:"):
            r, n = text[len("geometric:"):].split(",")
            r, n = float(r), int(n)
            if not 0 < r < 1 or n < 0:
                raise ValueError
            grid = [r ** k for k in range(1, n + 1)]
        else:
            grid = [float(tok) for tok in text.split(",") if tok.strip()]
        return mr.check_grid(grid)
    except ValueError as err:
        raise UsageError(f"invalid eps grid {text!r}: {err}") from None


def _ints(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",")]
    except ValueError:
        raise UsageError(f"bad integer list {text!r}") from None


# -- subcommands -----------------------------------------------------------------

def _structure(cfg: RunConfig):
    G = parse_fixture(cfg.fixture)
    if cfg.relabel_seed is None:
        return G, group_delta(G)
    return G, relabeled_delta(G, random_permutation(G.order, cfg.relabel_seed))


def _mode(cfg: RunConfig):
    if cfg.mode == "sampled":
        return dc.Sampled(cfg.count, cfg.seed)
    return cfg.mode


def cmd_axioms(cfg: RunConfig) -> tuple[dict, bool]:
    G, S = _structure(cfg)
    checks = []
    guaranteed_ok = True
    for name, fn in (("axiom1", dc.check_axiom1), ("axiom2", dc.check_axiom2)):
        rep = fn(S, _mode(cfg))
        checks.append({"check": name, "ok": rep.ok, "counterexample": rep.counterexample,
                       "checked": rep.checked, "mode": rep.mode})
        if cfg.relabel_seed is None:
            guaranteed_ok &= rep.ok
    if S.has_weak:
        rep = dc.check_weak_axioms(S, _mode(cfg))
        for key, ok in (("weak1", rep.ok1), ("weak2", rep.ok2)):
            checks.append({"check": key, "ok": ok,
                           "counterexample": rep.counterexamples.get(key),
                           "checked": rep.checked, "mode": rep.mode})
        guaranteed_ok &= rep.ok
    results = {"structure": S.name, "order": G.order, "checks": checks,
               "ok": all(c["ok"] for c in checks)}
    return results, guaranteed_ok


def _random_subset(rng: np.random.Generator, n: int, max_size: int) -> list[int]:
    k = int(rng.integers(1, min(n, max_size) + 1))
    return sorted(int(v) for v in rng.choice(n, size=k, replace=False))


def cmd_ruzsa(cfg: RunConfig) -> tuple[dict, bool]:
    G, S = _structure(cfg)
    if cfg.random_trials is not None:
        rng = np.random.default_rng(cfg.seed)
        max_size = cfg.max_size or G.order
        triples = [tuple(_random_subset(rng, G.order, max_size) for _ in range(3))
                   for _ in range(cfg.random_trials)]
    else:
        if set(cfg.sets) != {"A", "B", "C"}:
            raise UsageError("give --A, --B and --C, or --random-trials")
        triples = [(cfg.sets["A"], cfg.sets["B"], cfg.sets["C"])]
    for A, B, C in triples:
        for s in (A, B, C):
            if any(not 0 <= x < G.order for x in s):
                raise UsageError(f"element out of range for {G.name}: {s}")
    trials = []
    for k, (A, B, C) in enumerate(triples):
        r = dc.ruzsa_inequality(S, A, B, C)
        trials.append({"trial": k, "A": A, "B": B, "C": C, "lhs": r.lhs, "rhs": r.rhs,
                       "holds": r.holds, "injective": r.witness.is_injective,
                       "collision": r.witness.collision})
    holds = sum(t["holds"] for t in trials)
    injective = sum(t["injective"] for t in trials)
    results = {"structure": S.name, "trials": trials,
               "aggregate": {"trials": len(trials), "holds": holds, "injective": injective}}
    return results, holds == injective == len(trials)


def cmd_converge(cfg: RunConfig) -> tuple[dict, bool]:
    S = dl.parse_space(cfg.space)
    e = cfg.points.get("e", S.base_point.tolist())
    if cfg.random_pairs is not None:
        rng = np.random.default_rng(cfg.seed)
        pairs = [(S.sample_ball(rng, 1, cfg.radius, e)[0], S.sample_ball(rng, 1, cfg.radius, e)[0])
                 for _ in range(cfg.random_pairs)]
    else:
        if "a" not in cfg.points or "b" not in cfg.points:
            raise UsageError("give --a and --b, or --random-pairs")
        pairs = [(cfg.points["a"], cfg.points["b"])]
    out = []
    for k, (a, b) in enumerate(pairs):
        table = dl.convergence_table(S, e, a, b, cfg.eps_grid)
        out.append({"pair": k, "a": np.asarray(a).tolist(), "b": np.asarray(b).tolist(),
                    "rows": [{"eps": x, "gap": g} for x, g in table.rows],
                    "slope": table.slope})
    return {"space": S.name, "e": list(e), "pairs": out}, True


def _point_sets(cfg: RunConfig, S: dl.DilationSpace, grid: list[float]):
    if cfg.sizes is None:
        if set(cfg.sets) != {"A", "B", "C"}:
            raise UsageError("give --A, --B and --C point sets, or --sizes")
        return [np.array(cfg.sets[k], dtype=float) for k in "ABC"]
    if len(cfg.sizes) != 3 or min(cfg.sizes) < 1:
        raise UsageError("--sizes needs three positive counts")
    e = cfg.points.get("e")
    if cfg.sampler == "conditioned":
        conf = mr.sample_ruzsa_configuration(S, cfg.mu, cfg.sizes, cfg.seed, grid,
                                             cfg.radius, e)
        return [conf.A.points, conf.B.points, conf.C.points]
    return [mr.sample_separated_set(S, cfg.radius, cfg.mu, n, cfg.seed + k, e).points
            for k, n in enumerate(cfg.sizes)]


def _failure_dict(err: Exception) -> dict:
    out = {"type": type(err).__name__, "message": str(err)}
    if isinstance(err, mr.SeparationHypothesisError):
        out.update(set=err.which, pair=list(err.pair), distance=err.distance)
    return out


def cmd_inject(cfg: RunConfig) -> tuple[dict, bool]:
    S = dl.parse_space(cfg.space)
    e = cfg.points.get("e", S.base_point.tolist())
    rows = []
    try:
        A, B, C = _point_sets(cfg, S, cfg.eps_grid)
    except mr.PartialSetError as err:
        return {"space": S.name, "sampler_failure": str(err), "rows": rows}, True
    for eps in cfg.eps_grid:
        try:
            w = mr.metric_injection(S, e, eps, A, B, C, cfg.mu, cfg.tolerance)
        except (mr.SeparationHypothesisError, mr.AmbiguousClusteringError) as err:
            rows.append({"eps": eps, "hypothesis_ok": False, "injective": False,
                         "domain_size": None, "source_size": None,
                         "failure": _failure_dict(err)})
            continue
        res = mr.reconstruction_residuals(S, e, w)
        rows.append({"eps": eps, "hypothesis_ok": True, "injective": w.is_injective,
                     "domain_size": w.domain_size, "source_size": w.source_size,
                     "collision": w.collision,
                     "max_limit_reconstruction": float(res["limit"].max())})
    sets = {k: P.tolist() for k, P in zip("ABC", (A, B, C))}
    return {"space": S.name, "e": list(e), "mu": cfg.mu, "sets": sets, "rows": rows}, True


def cmd_threshold(cfg: RunConfig) -> tuple[dict, bool]:
    S = dl.parse_space(cfg.space)
    e = cfg.points.get("e", S.base_point.tolist())
    try:
        A, B, C = _point_sets(cfg, S, cfg.eps_grid)
    except mr.PartialSetError as err:
        return {"space": S.name, "sampler_failure": str(err), "rows": []}, True
    rep = mr.estimate_threshold(S, e, A, B, C, cfg.mu, cfg.eps_grid, cfg.tolerance)
    rows = [{"eps": x, "hypothesis_ok": h, "injective": i,
             "failure": rep.failures.get(k)}
            for k, (x, h, i) in enumerate(rep.rows)]
    return {"space": S.name, "e": list(e), "mu": cfg.mu, "rows": rows,
            "empirical_threshold": rep.empirical_threshold,
            "sizes": [len(A), len(B), len(C)]}, True


COMMANDS = {
    "axioms": cmd_axioms,
    "ruzsa": cmd_ruzsa,
    "converge": cmd_converge,
    "inject": cmd_inject,
    "threshold": cmd_threshold,
}


# -- output ------------------------------------------------------------------------

def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


def make_report(cfg: RunConfig, results: dict, seconds: Optional[float]) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "config": _jsonable(asdict(cfg)),
        "results": _jsonable(results),
        "timing": {"wall_seconds": seconds} if seconds is not None else None,
    }


def dumps_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def _fmt(v) -> str:
    if isinstance(v, float):
        return format(v, ".17g")
    if v is None:
        return ""
    if isinstance(v, (list, tuple)):
        return " ".join(_fmt(x) for x in v)
    return str(v)


def csv_rows(subcommand: str, results: dict) -> list[list]:
    if subcommand == "axioms":
        return [[c["check"], c["ok"], c["counterexample"]] for c in results["checks"]]
    if subcommand == "ruzsa":
        return [[t["trial"], t["lhs"], t["rhs"], t["holds"], t["injective"]]
                for t in results["trials"]]
    if subcommand == "converge":
        return [[p["pair"], r["eps"], r["gap"]] for p in results["pairs"] for r in p["rows"]]
    if subcommand == "inject":
        return [[r[c] for c in CSV_COLUMNS["inject"]] for r in results["rows"]]
    return [[r["eps"], r["hypothesis_ok"], r["injective"]] for r in results["rows"]]


def dumps_csv(subcommand: str, results: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS[subcommand])
    for row in csv_rows(subcommand, results):
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


# -- argument handling ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="geomruzsa", description=__doc__.split("\n\n")[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=["json", "csv"], default="json")
    common.add_argument("--output", "-o", help="output file (default: stdout)")
    common.add_argument("--timing", action="store_true",
                        help="add wall-clock timing (makes output run-dependent)")
    sub = p.add_subparsers(dest="subcommand", required=True)

    group_args = argparse.ArgumentParser(add_help=False)
    group_args.add_argument("--fixture", required=True, help="e.g. cyclic:6, symmetric:3")
    group_args.add_argument("--relabel-seed", type=int,
                            help="use the relabeled structure with a seeded random permutation")

    ax = sub.add_parser("axioms", parents=[common, group_args], help="check axioms 1, 2 and weak forms")
    ax.add_argument("--mode", choices=["auto", "exhaustive", "sampled"], default="auto")
    ax.add_argument("--count", type=int, default=dc.DEFAULT_SAMPLE_COUNT)

    rz = sub.add_parser("ruzsa", parents=[common, group_args], help="Ruzsa inequality and its injection")
    for name in "ABC":
        rz.add_argument(f"--{name}", help="comma-separated element indices, or @file")
    rz.add_argument("--random-trials", type=int)
    rz.add_argument("--max-size", type=int)

    space_args = argparse.ArgumentParser(add_help=False)
    space_args.add_argument("--space", required=True, help="euclid:n or heis1")
    space_args.add_argument("--e", help="base point (default: origin / identity)")
    space_args.add_argument("--radius", type=float, default=1.0)

    cv = sub.add_parser("converge", parents=[common, space_args], help="approximate difference convergence")
    cv.add_argument("--a")
    cv.add_argument("--b")
    cv.add_argument("--random-pairs", type=int)
    cv.add_argument("--eps", required=True, help="descending list or geometric:r,n")

    metric_args = argparse.ArgumentParser(add_help=False)
    metric_args.add_argument("--mu", type=float, required=True)
    metric_args.add_argument("--tolerance", type=float)
    metric_args.add_argument("--sizes", help="|A|,|B|,|C| for seeded sampling")
    metric_args.add_argument("--sampler", choices=["conditioned", "plain"], default="conditioned")
    for name in "ABC":
        metric_args.add_argument(f"--{name}", help="points 'x,y;x,y;...', or @file")

    ij = sub.add_parser("inject", parents=[common, space_args, metric_args], help="metric Ruzsa injection")
    ij.add_argument("--eps", required=True, help="eps list or geometric:r,n")
    th = sub.add_parser("threshold", parents=[common, space_args, metric_args],
                        help="empirical injectivity threshold over an eps grid")
    th.add_argument("--eps-grid", required=True)
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(subcommand=ns.subcommand, seed=ns.seed, format=ns.format,
                    output=ns.output, timing=ns.timing)
    if ns.subcommand in ("axioms", "ruzsa"):
        cfg.fixture = ns.fixture
        cfg.relabel_seed = ns.relabel_seed
    if ns.subcommand == "axioms":
        cfg.mode, cfg.count = ns.mode, ns.count
        if cfg.count < 1:
            raise UsageError("--count must be positive")
    if ns.subcommand == "ruzsa":
        cfg.sets = {k: parse_index_set(getattr(ns, k)) for k in "ABC" if getattr(ns, k) is not None}
        cfg.random_trials, cfg.max_size = ns.random_trials, ns.max_size
        if cfg.random_trials is not None and cfg.random_trials < 1:
            raise UsageError("--random-trials must be positive")
        if cfg.max_size is not None and cfg.max_size < 1:
            raise UsageError("--max-size must be positive")
    if ns.subcommand in ("converge", "inject", "threshold"):
        S = dl.parse_space(ns.space)
        cfg.space, cfg.radius = S.name, ns.radius
        if not cfg.radius > 0:
            raise UsageError("--radius must be positive")
        if ns.e is not None:
            cfg.points["e"] = parse_point(ns.e, S.dim)
    if ns.subcommand == "converge":
        for k in ("a", "b"):
            if getattr(ns, k) is not None:
                cfg.points[k] = parse_point(getattr(ns, k), S.dim)
        cfg.random_pairs = ns.random_pairs
        cfg.eps_grid = parse_eps_grid(ns.eps)
        if not cfg.eps_grid:
            raise UsageError("eps grid is empty")
    if ns.subcommand in ("inject", "threshold"):
        if not ns.mu > 0:
            raise UsageError("--mu must be positive")
        cfg.mu, cfg.tolerance, cfg.sampler = ns.mu, ns.tolerance, ns.sampler
        if cfg.tolerance is not None and not 0 < cfg.tolerance <= cfg.mu / 4:
            raise UsageError("--tolerance must lie in (0, mu/4]")
        cfg.sizes = _ints(ns.sizes) if ns.sizes else None
        cfg.sets = {k: parse_point_set(getattr(ns, k), S.dim)
                    for k in "ABC" if getattr(ns, k) is not None}
        cfg.eps_grid = parse_eps_grid(ns.eps if ns.subcommand == "inject" else ns.eps_grid)
        if ns.subcommand == "inject" and not cfg.eps_grid:
            raise UsageError("eps is empty")
    return cfg


def run(cfg: RunConfig) -> tuple[dict, int]:
    start = time.perf_counter()
    results, guaranteed_ok = COMMANDS[cfg.subcommand](cfg)
    seconds = time.perf_counter() - start if cfg.timing else None
    return make_report(cfg, results, seconds), 0 if guaranteed_ok else 1


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = config_from_args(ns)
        report, code = run(cfg)
    except (UsageError, GroupError, dl.DomainError, dc.EmptySetError, ValueError) as err:
        print(f"geomruzsa: error: {err}", file=sys.stderr)
        return 2
    text = dumps_json(report) if cfg.format == "json" else dumps_csv(cfg.subcommand, report["results"])
    if cfg.output:
        with open(cfg.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
