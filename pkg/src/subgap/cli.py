"""Command-line driver: ``subgap solve|gap|harden|check|bench``."""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Optional

from . import __version__
from .errors import ConstructionError, InfeasibleError, NotInvariantError, SizeError

EXIT_FAIL, EXIT_PARSE, EXIT_INFEASIBLE, EXIT_SIZE = 1, 2, 3, 4


@dataclass
class RunReport:
    command: str
    config: dict
    results: dict
    seeds: dict
    wall_time: float = 0.0
    version: str = __version__

    def to_json(self) -> dict:
        return asdict(self)


class ParseError(Exception):
    pass


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc


def _evaluator(text: str) -> tuple:
    if text == "exact":
        return ("exact", None)
    kind, _, count = text.partition(":")
    if kind in ("sample", "sampled") and count.isdigit() and int(count) > 0:
        return ("sampled", int(count))
    raise argparse.ArgumentTypeError("evaluator must be 'exact' or 'sample:COUNT'")


def _default_seed() -> int:
    raw = os.environ.get("SUBGAP_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        return 0


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc


def _jsonable(obj):
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, (set, frozenset)):
        return sorted(obj)
    if hasattr(obj, "item"):
        return obj.item()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


# -- subcommands -------------------------------------------------------------------

def cmd_solve(args) -> tuple:
    from .brute import BRUTE_CAP, brute_opt
    from .localsearch import SearchConfig, local_search_bases, local_search_independence
    from .matroid import free_matroid, matroid_from_json
    from .setfn import build_family

    try:
        f = build_family(_load_json(args.instance))
        cdata = _load_json(args.constraint) if args.constraint else {"kind": "free", "n": f.n}
        m = matroid_from_json(cdata) if cdata.get("kind") != "free" else free_matroid(int(cdata.get("n", f.n)))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, (SizeError,)):
            raise
        raise ParseError(f"malformed instance: {exc}") from exc
    mode = "bases" if (args.bases or cdata.get("mode") == "bases") else "independence"
    kind, samples = args.evaluator
    cfg = SearchConfig(t=args.t, evaluator=kind, samples=samples, seed=args.seed,
                       slack=args.slack, max_steps=args.max_steps)
    run = local_search_bases if mode == "bases" else local_search_independence
    sol = run(f, m, cfg)
    results = {"mode": mode, **sol.to_json()}
    if f.n <= BRUTE_CAP:
        opt = brute_opt(f, mode, m)
        results["opt_brute"] = opt.best_value
        results["opt_set"] = sorted(opt.best_set)
        if opt.best_value > 0:
            results["ratio"] = sol.value / opt.best_value
            results["rounded_ratio"] = sol.rounded_value / opt.best_value
        guarantee = (float(cfg.t - cfg.t ** 2 / 2) if mode == "independence"
                     else float((1 - cfg.t) / 2))
        results["guarantee_factor"] = guarantee
    if args.trace:
        results["trace"] = sol.trace
    config = {"instance": args.instance, "constraint": args.constraint, "t": str(args.t),
              "evaluator": kind, "samples": samples, "mode": mode}
    return config, results


def cmd_gap(args) -> tuple:
    from .symmetry import bundled, check_strong_symmetry, instance_from_json, symmetry_gap

    if args.name:
        inst = bundled(args.name)
    elif args.instance:
        try:
            inst = instance_from_json(_load_json(args.instance))
        except (KeyError, TypeError) as exc:
            raise ParseError(f"malformed instance: {exc}") from exc
    else:
        raise ParseError("gap needs a bundled instance name or --instance FILE")
    w = check_strong_symmetry(inst)
    if w is not None:
        raise NotInvariantError(f"instance {inst.name!r} is not strongly symmetric", witness=w)
    res = symmetry_gap(inst, grid=args.grid)
    return {"instance": inst.name}, res.to_json()


def cmd_harden(args) -> tuple:
    from .hardness import SmoothedPair, distinguish_experiment, gap_report, refine
    from .symmetry import bundled, check_strong_symmetry, symmetry_gap

    inst = bundled(args.name)
    w = check_strong_symmetry(inst)
    if w is not None:
        raise NotInvariantError(f"instance {inst.name!r} is not strongly symmetric "
                                "(refinement would leak the hidden permutations)", witness=w)
    pair = SmoothedPair(inst, args.eps)
    gap = symmetry_gap(inst)
    results = {"constants": pair.constants(), "symmetry_gap": gap.gamma,
               "opt": gap.opt, "opt_bar": gap.opt_bar}
    if args.n * inst.n <= 20:
        rep = gap_report(refine(pair, args.n, seed=args.seed))
        results["gap_report"] = rep.to_json()
    if args.trials > 0:
        exp = distinguish_experiment(pair, args.strategy, args.budget, args.trials, args.n,
                                     args.seed, jobs=args.jobs, gap=(gap.opt, gap.opt_bar))
        results["experiment"] = exp.to_json(with_trials=args.trial_log)
    config = {"instance": inst.name, "eps": args.eps, "n": args.n, "trials": args.trials,
              "budget": args.budget, "strategy": args.strategy}
    return config, results


def cmd_check(args) -> tuple:
    from .checks import run_suite

    res = run_suite(args.suite, args.seed)
    return {"suite": args.suite}, {"properties": [r.to_json() for r in res],
                                   "lines": [r.line() for r in res],
                                   "ok": all(r.ok for r in res)}


def cmd_bench(args) -> tuple:
    import numpy as np

    from .extension import multilinear_exact, multilinear_sample
    from .localsearch import SearchConfig, local_search_independence
    from .matroid import uniform_matroid
    from .setfn import random_submodular

    rng = np.random.default_rng(args.seed)
    out = {}
    for n in (8, 12, 16):
        f = random_submodular(n, rng)
        f.table()
        x = rng.random(n)
        t0 = time.perf_counter()
        multilinear_exact(f, x)
        out[f"multilinear_exact_n{n}_s"] = time.perf_counter() - t0
        t0 = time.perf_counter()
        multilinear_sample(f, x, 10_000, args.seed)
        out[f"multilinear_sample_10k_n{n}_s"] = time.perf_counter() - t0
    f = random_submodular(10, rng)
    t0 = time.perf_counter()
    local_search_independence(f, uniform_matroid(10, 4), SearchConfig(t=Fraction(3, 8), seed=args.seed))
    out["local_search_n10_s"] = time.perf_counter() - t0
    return {}, out


COMMANDS = {"solve": cmd_solve, "gap": cmd_gap, "harden": cmd_harden, "check": cmd_check,
            "bench": cmd_bench}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=_default_seed(),
                        help="random seed (default: $SUBGAP_SEED or 0)")
    common.add_argument("--jobs", type=int, default=1, help="worker threads for independent trials")
    common.add_argument("--format", choices=("json", "text"), default="text")

    p = argparse.ArgumentParser(prog="subgap", description=__doc__)
    p.add_argument("--version", action="version", version=f"subgap {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", parents=[common], help="fractional local search + rounding")
    s.add_argument("instance", help="set function JSON file")
    s.add_argument("constraint", nargs="?", help="matroid JSON file (default: free matroid)")
    s.add_argument("--t", type=_rational, default=Fraction(1, 2), help="box bound r/q")
    s.add_argument("--bases", action="store_true", help="optimize over bases")
    s.add_argument("--evaluator", type=_evaluator, default=("exact", None))
    s.add_argument("--slack", type=float, default=None, help="per-step improvement threshold")
    s.add_argument("--max-steps", type=int, default=None)
    s.add_argument("--trace", action="store_true", help="include the step log")

    g = sub.add_parser("gap", parents=[common], help="symmetry gap of an instance")
    g.add_argument("name", nargs="?", help="k2cut | cardinality:K | dircut-bases:K | cyclic-pairs")
    g.add_argument("--instance", help="JSON file with function, feasibility and group")
    g.add_argument("--grid", type=int, default=65)

    h = sub.add_parser("harden", parents=[common], help="smoothed pair, refinement and experiment")
    h.add_argument("name")
    h.add_argument("--eps", type=float, default=0.01)
    h.add_argument("--n", type=int, default=5, help="refinement size")
    h.add_argument("--trials", type=int, default=0)
    h.add_argument("--budget", type=int, default=1000, help="queries per trial")
    h.add_argument("--strategy", default="random",
                   choices=("random", "greedy", "local-search", "symmetric"))
    h.add_argument("--trial-log", action="store_true")

    c = sub.add_parser("check", parents=[common], help="run a property suite")
    c.add_argument("suite", choices=("extensions", "pipage", "localsearch", "hardness", "all"))

    sub.add_parser("bench", parents=[common], help="time core operations")
    return p


def _print_text(report: RunReport, stream) -> None:
    print(f"subgap {report.command} (seed {report.seeds.get('seed')}, "
          f"{report.wall_time:.3f}s)", file=stream)
    res = report.results
    if "lines" in res:
        for line in res["lines"]:
            print(f"  {line}", file=stream)
        return
    for key, val in res.items():
        if isinstance(val, dict):
            print(f"  {key}:", file=stream)
            for k2, v2 in val.items():
                if k2 != "trial_log":
                    print(f"    {k2}: {v2}", file=stream)
        elif key != "trace":
            print(f"  {key}: {val}", file=stream)


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    try:
        config, results = COMMANDS[args.command](args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (InfeasibleError, NotInvariantError) as exc:
        payload = {"error": str(exc)}
        if getattr(exc, "nu", None) is not None:
            payload["nu"] = _jsonable(exc.nu)
        if getattr(exc, "witness", None) is not None:
            payload["witness"] = exc.witness.to_dict()
        print(json.dumps(payload, default=_jsonable), file=sys.stderr)
        return EXIT_INFEASIBLE
    except SizeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SIZE
    except ConstructionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    report = RunReport(args.command, config, results, {"seed": args.seed},
                       time.perf_counter() - start)
    if args.format == "json":
        print(json.dumps(report.to_json(), default=_jsonable))
        _print_text(report, sys.stderr)
    else:
        _print_text(report, sys.stdout)
    if args.command == "check" and not results["ok"]:
        return EXIT_FAIL
    return 0


if __name__ == "__main__":
    sys.exit(main())
