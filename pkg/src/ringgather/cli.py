"""Command-line front end: ``ringgather {simulate,check,lemmas,enumerate,stats}``.

Exit status is 0 on success, 1 when a violation (or a failed run) was found
and 2 on usage errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import random
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .checker import PROPERTY_NAMES, Verdict, enumerate_initials, explore_many
from .executor import GATHERED, SchedulerContractError, run, write_trace
from .lemmas import gathering_constant, lemma_suite
from .ring_core import Configuration, ConfigurationError, random_configuration, validate_instance
from .schedulers import GENERATOR, SCHEDULERS, Starve, make_scheduler

log = logging.getLogger("ringgather")

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2
FAULT_SCHEDULERS = ("starve",)


class UsageError(Exception):
    pass


# -- argument helpers ----------------------------------------------------------------

def parse_initial(text: str, n: int | None, k: int | None) -> list[Configuration]:
    """Turn an ``--initial`` value into configurations.

    Accepts a node list (``0,1,4``; ``3*2`` puts two robots on node 3), the
    text form ``n=..;occ=..``, ``enumerate`` or ``random:<seed>``.
    """
    text = text.strip()
    if text.startswith("n="):
        try:
            config = Configuration.parse(text)
        except ConfigurationError as exc:
            raise UsageError(str(exc)) from None
        if n is not None and n != config.n:
            raise UsageError(f"--n {n} disagrees with the initial configuration")
        configs = [config]
    elif text == "enumerate" or text.startswith("random:"):
        if n is None or k is None:
            raise UsageError(f"--initial {text} needs --n and --k")
        _validate(n, k)
        if text == "enumerate":
            return enumerate_initials(n, k)
        try:
            seed = int(text.split(":", 1)[1])
        except ValueError:
            raise UsageError(f"bad random seed in {text!r}") from None
        return [random_configuration(n, k, random.Random(seed))]
    else:
        if n is None:
            raise UsageError("a node list needs --n")
        nodes = []
        try:
            for item in text.split(","):
                node, _, count = item.partition("*")
                node_i = int(node)
                if not 0 <= node_i < n:
                    raise UsageError(f"node {node_i} outside the ring 0..{n - 1}")
                nodes += [node_i] * (int(count) if count else 1)
        except ValueError:
            raise UsageError(f"cannot parse --initial {text!r}") from None
        configs = [Configuration.from_nodes(n, nodes)]
    for config in configs:
        if k is not None and config.k != k:
            raise UsageError(f"initial configuration has {config.k} robots, --k says {k}")
        _validate(config.n, config.k)
    return configs


def _validate(n: int, k: int) -> None:
    try:
        validate_instance(n, k)
    except ConfigurationError as exc:
        raise UsageError(str(exc)) from None


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _write_report(path: str | None, payload: dict, text: str) -> None:
    print(text)
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")


# -- simulate ----------------------------------------------------------------------

@dataclass
class RunRecord:
    initial: str
    n: int
    k: int
    scheduler: str
    seed: int
    fairness: int | None
    outcome: str
    rounds: int
    steps: int
    violation: str | None
    stale_csp_entry: bool


def _make(name: str, seed: int, bound: int | None):
    if name == "starve":
        return Starve(0, bound)
    return make_scheduler(name, seed, bound)


def simulate_one(config: Configuration, scheduler: str, seed: int, fairness: int | None,
                 round_limit: int | None, keep_trace: bool = False):
    sched = _make(scheduler, seed, fairness)
    try:
        result = run(config, sched, max_rounds=round_limit, seed=seed, keep_trace=keep_trace)
    except SchedulerContractError as exc:
        rec = RunRecord(str(config), config.n, config.k, scheduler, seed, sched.fairness_bound,
                        "violation", 0, 0, f"unfair scheduler: {exc}", False)
        return rec, None
    rec = RunRecord(str(config), config.n, config.k, scheduler, seed, sched.fairness_bound,
                    result.outcome, result.rounds, result.steps, result.violation,
                    result.stale_csp_entry)
    return rec, result


def cmd_simulate(args) -> int:
    configs = parse_initial(args.initial or "random:0", args.n, args.k)
    records = []
    trace_fh = open(args.trace, "w", encoding="utf-8") if args.trace else None
    try:
        for config in configs:
            rec, result = simulate_one(config, args.scheduler, args.seed, args.fairness,
                                       args.round_limit, keep_trace=trace_fh is not None)
            if trace_fh and result is not None:
                write_trace(result.trace, trace_fh)
            records.append(rec)
    finally:
        if trace_fh:
            trace_fh.close()
    lines = []
    for r in records:
        line = f"{r.initial}  {r.outcome}  rounds={r.rounds} steps={r.steps}"
        if r.violation:
            line += f"  [{r.violation}]"
        lines.append(line)
    failed = [r for r in records if r.outcome != GATHERED]
    lines.append(f"{len(records) - len(failed)}/{len(records)} gathered")
    payload = {"generator": GENERATOR, "runs": [asdict(r) for r in records],
               "ok": not failed}
    _write_report(args.report, payload, "\n".join(lines))
    return EXIT_VIOLATION if failed else EXIT_OK


# -- check -------------------------------------------------------------------------

def _instances(args) -> list[tuple[int, int]]:
    if args.instances:
        pairs = []
        for item in args.instances.split(","):
            try:
                n, k = (int(x) for x in item.split(":"))
            except ValueError:
                raise UsageError(f"bad instance {item!r}; expected n:k") from None
            pairs.append((n, k))
    elif args.n is not None and args.k is not None:
        pairs = [(args.n, args.k)]
    else:
        raise UsageError("check needs --n and --k, or --instances")
    for n, k in pairs:
        _validate(n, k)
    return pairs


def cmd_check(args) -> int:
    verdict = Verdict()
    per_instance = {}
    if args.initial:
        if args.n is None:
            raise UsageError("--initial needs --n")
        groups = [(args.n, parse_initial(args.initial, args.n, args.k))]
    else:
        groups = [(n, enumerate_initials(n, k)) for n, k in _instances(args)]
    for n, initials in groups:
        t0 = time.perf_counter()
        v = explore_many(initials, bound=args.fairness, round_limit=args.round_limit,
                         max_states=args.max_states)
        per_instance[f"n={n},k={initials[0].k}"] = {
            "initials": len(initials), "states": v.states_explored,
            "max_rounds": v.max_rounds_observed, "violations": len(v.violations),
            "seconds": round(time.perf_counter() - t0, 2)}
        verdict = verdict.merge(v)
    payload = verdict.to_json()
    payload["fairness"] = args.fairness if args.fairness is not None else "weak"
    payload["instances"] = per_instance
    payload["property_names"] = PROPERTY_NAMES
    text = verdict.text()
    for name, info in per_instance.items():
        text += (f"\n{name}: {info['initials']} initials, {info['states']} states, "
                 f"max rounds {info['max_rounds']}")
    _write_report(args.report, payload, text)
    return EXIT_OK if verdict.ok else EXIT_VIOLATION


# -- lemmas ------------------------------------------------------------------------

def cmd_lemmas(args) -> int:
    k_max = args.k if args.k is not None else 9
    verdict, results = lemma_suite(k_max, args.n)
    c = gathering_constant(results)
    lines = [f"{'class':<14}{'k':>3}{'n':>4}  {'target':<14}{'rounds':>7}{'gather':>7}  ok"]
    for r in results:
        gather = "-" if r.gathering_rounds is None else r.gathering_rounds
        lines.append(f"{r.source:<14}{r.k:>3}{r.n:>4}  {r.target:<14}{r.transition_rounds:>7}"
                     f"{gather:>7}  {'yes' if r.ok else 'NO'}")
    lines.append(verdict.text())
    lines.append(f"gathering constant c = max rounds / k^2 = {c:.3f}")
    payload = verdict.to_json()
    payload["gathering_constant"] = c
    payload["transitions"] = [
        {"source": r.source, "target": r.target, "k": r.k, "n": r.n, "towered": r.towered,
         "transition_rounds": r.transition_rounds, "gathering_rounds": r.gathering_rounds,
         "states": r.states, "ok": r.ok}
        for r in results]
    _write_report(args.report, payload, "\n".join(lines))
    return EXIT_OK if verdict.ok else EXIT_VIOLATION


# -- enumerate ---------------------------------------------------------------------

def cmd_enumerate(args) -> int:
    if args.n is None or args.k is None:
        raise UsageError("enumerate needs --n and --k")
    _validate(args.n, args.k)
    configs = enumerate_initials(args.n, args.k)
    text = "\n".join(str(c) for c in configs) + f"\n{len(configs)} configurations"
    _write_report(args.report, {"n": args.n, "k": args.k, "count": len(configs),
                                "configurations": [str(c) for c in configs]}, text)
    return EXIT_OK


# -- stats -------------------------------------------------------------------------

def _stats_job(job):
    n, k, seed, scheduler, fairness, round_limit = job
    config = random_configuration(n, k, random.Random(seed))
    rec, _ = simulate_one(config, scheduler, seed, fairness, round_limit)
    return rec


def fit_exponent(ns, mean_rounds) -> float:
    """Slope of log(mean rounds) against log(n) by least squares."""
    slope, _ = np.polyfit(np.log(ns), np.log(mean_rounds), 1)
    return float(slope)


def cmd_stats(args) -> int:
    ns, ks = args.n_list, args.k_list
    for k in ks:
        for n in ns:
            _validate(n, k)
    jobs = [(n, k, args.seed + s, args.scheduler, args.fairness, args.round_limit)
            for k in ks for n in ns for s in range(args.seeds)]
    if args.workers > 1:
        with ProcessPoolExecutor(args.workers) as pool:
            records = list(pool.map(_stats_job, jobs, chunksize=4))
    else:
        records = [_stats_job(j) for j in jobs]

    summary = []
    for k in ks:
        for n in ns:
            rounds = [r.rounds for r in records if r.n == n and r.k == k]
            gathered = sum(r.outcome == GATHERED for r in records if r.n == n and r.k == k)
            summary.append({"n": n, "k": k, "runs": len(rounds), "gathered": gathered,
                            "mean_rounds": float(np.mean(rounds)), "max_rounds": max(rounds),
                            "limit": 10 * n * n})
    exponents = {}
    for k in ks:
        rows = [s for s in summary if s["k"] == k]
        exponents[k] = fit_exponent([s["n"] for s in rows], [s["mean_rounds"] for s in rows]) \
            if len(rows) >= 2 else None

    with open(args.data, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "k", "seed", "scheduler", "fairness", "outcome", "rounds", "steps"])
        for r in records:
            writer.writerow([r.n, r.k, r.seed, r.scheduler, r.fairness, r.outcome, r.rounds, r.steps])

    lines = [f"{'n':>5}{'k':>4}{'runs':>6}{'gathered':>10}{'mean':>10}{'max':>7}{'10n^2':>8}"]
    for s in summary:
        lines.append(f"{s['n']:>5}{s['k']:>4}{s['runs']:>6}{s['gathered']:>10}"
                     f"{s['mean_rounds']:>10.2f}{s['max_rounds']:>7}{s['limit']:>8}")
    for k, e in exponents.items():
        if e is not None:
            lines.append(f"fitted exponent (k={k}): {e:.3f}")
    lines.append(f"data written to {args.data}")
    ok = all(s["gathered"] == s["runs"] for s in summary)
    payload = {"scheduler": args.scheduler, "generator": GENERATOR, "summary": summary,
               "exponents": {str(k): e for k, e in exponents.items()}, "ok": ok}
    if len(ks) == 1:
        payload["exponent"] = exponents[ks[0]]
    _write_report(args.report, payload, "\n".join(lines))
    return EXIT_OK if ok else EXIT_VIOLATION


# -- parser ------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ringgather", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, n_type=int):
        p.add_argument("--n", type=n_type, help="ring size")
        p.add_argument("--k", type=int, help="number of robots")
        p.add_argument("--round-limit", type=int, help="default 10 n^2")
        p.add_argument("--report", help="write the JSON report here")

    p = sub.add_parser("simulate", help="run one scheduler on one or more initial configurations")
    common(p)
    p.add_argument("--initial", help="node list (3*2 = tower of 2 on node 3), 'enumerate' or 'random:SEED'")
    p.add_argument("--scheduler", default="random_fair",
                   choices=sorted(SCHEDULERS) + list(FAULT_SCHEDULERS))
    p.add_argument("--fairness", type=int, help="F: every robot completes a cycle within F steps")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trace", help="write a JSON-lines trace here")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("check", help="exhaustively explore every scheduling")
    common(p)
    p.add_argument("--instances", help="comma list of n:k pairs")
    p.add_argument("--initial", help="restrict to these initial configurations")
    p.add_argument("--fairness", type=int,
                   help="explore only F-bounded schedules (default: every weakly fair one)")
    p.add_argument("--max-states", type=int, default=5_000_000)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("lemmas", help="second-phase transition suite (--k is the largest k)")
    common(p)
    p.set_defaults(func=cmd_lemmas)

    p = sub.add_parser("enumerate", help="list initial configurations up to rotation and reflection")
    common(p)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("stats", help="batch random runs and fit the round growth")
    p.add_argument("--n", dest="n_list", type=_int_list, default=[12, 24, 48],
                   help="comma list of ring sizes")
    p.add_argument("--k", dest="k_list", type=_int_list, default=[5],
                   help="comma list of robot counts")
    p.add_argument("--round-limit", type=int)
    p.add_argument("--report")
    p.add_argument("--scheduler", default="random_fair", choices=sorted(SCHEDULERS))
    p.add_argument("--fairness", type=int)
    p.add_argument("--seed", type=int, default=0, help="first seed")
    p.add_argument("--seeds", type=int, default=50, help="runs per ring size")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--data", default="ringgather_stats.csv", help="plot-ready CSV output")
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"ringgather: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
