"""Command-line entry point: ``boa <command> ...``.

Exit codes: 0 success, 1 validation or assertion failure, 2 I/O or parse error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

from . import harness
from .cost import NYC_BBOX, GeoBoundingBox
from .genbench import (REAL_VELOCITY, PickupParseError, SyntheticConfig, dump_json, gen_synthetic,
                       ingest_pickups_csv, load_instance, save_instance)
from .model import Matching
from .offline import budget_ssp_optimal
from .online import (FixedThreshold, RandomExp, RunTrace, Unbounded, extract_ot_threshold,
                     greedy_rt_runs, run_online)

log = logging.getLogger("boa")

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2


def _num(x: float):
    # JSON has no infinity; an uncapped threshold is written as null
    return None if x is None or math.isinf(x) else x


def _matching_json(m: Matching) -> dict:
    return {"size": m.size, "total_cost": m.total_cost,
            "pairs": [[p.worker_id, p.task_id, p.cost] for p in m.pairs]}


def _trace_json(t: RunTrace) -> dict:
    d = _matching_json(t.matching)
    d.update(tau=_num(t.tau), kappa=t.kappa, unspent=t.unspent,
             decisions=[[x.worker_id, x.task_id, x.reason] for x in t.decisions])
    return d


def parse_window(text: str) -> tuple[float, float]:
    try:
        h0, h1 = (float(p) for p in text.split("-"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"window must look like 0-12, got {text!r}")
    if not 0 <= h0 < h1 <= 24:
        raise argparse.ArgumentTypeError(f"window hours out of order or range: {text!r}")
    return h0, h1


def parse_bbox(text: str) -> GeoBoundingBox:
    try:
        return GeoBoundingBox.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def cmd_gen(args) -> int:
    with open(args.config) as fh:
        cfg = SyntheticConfig.from_dict(json.load(fh))
    if args.seed is not None:
        cfg = SyntheticConfig.from_dict({**cfg.to_dict(), "seed": args.seed})
    save_instance(gen_synthetic(cfg), args.out, provenance={"generator": "synthetic", **cfg.to_dict()})
    return EXIT_OK


def cmd_run(args) -> int:
    inst = load_instance(args.instance)
    stream = harness.arrival_stream(inst, args.order)
    inst = inst.with_workers(stream.workers)
    out = {"algorithm": args.algo, "order": args.order, "seed": args.seed}

    if args.algo in ("opt-alg1", "opt-exact"):
        m = (harness.algorithm1_optimal if args.algo == "opt-alg1" else budget_ssp_optimal)(inst)
        harness.check_valid(m, inst, args.algo)
        out.update(_matching_json(m))
    elif args.algo == "greedy-rt-exp":
        runs = greedy_rt_runs(stream, inst.batch, inst.metric, inst.c_max)
        for r in runs:
            harness.check_valid(r.matching, inst, f"kappa={r.kappa}")
        out["expectation"] = sum(r.size for r in runs) / len(runs)
        out["runs"] = [_trace_json(r) for r in runs]
    else:
        if args.algo == "greedy":
            policy = Unbounded()
        elif args.algo == "greedy-rt":
            policy = RandomExp(inst.c_max, args.seed)
        else:
            tau = args.tau
            if tau is None:
                if args.ot_history is None:
                    log.error("greedy-ot needs --ot-history or --tau")
                    return EXIT_IO
                hist = load_instance(args.ot_history)
                h_stream = harness.arrival_stream(hist, args.order)
                tau = extract_ot_threshold(budget_ssp_optimal(hist.with_workers(h_stream.workers)))
            policy = FixedThreshold(tau)
        trace = run_online(stream, inst.batch, inst.metric, policy)
        harness.check_valid(trace.matching, inst, args.algo)
        out.update(_trace_json(trace))
    dump_json(out, args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    with open(args.spec) as fh:
        spec = harness.SweepSpec.from_dict(json.load(fh))
    rows = harness.run_sweep(spec, jobs=args.jobs, progress=log.info)
    harness.write_results_csv(rows, args.out, timing=args.timing)
    dump_json(spec.to_dict(), Path(str(args.out) + ".spec.json"))
    return EXIT_OK


def cmd_oracle_check(args) -> int:
    ok = True
    result: dict = {}
    if args.toy:
        from .toy import GREEDY_PAIRS, OPT_PAIRS, OT_PAIRS, RT_SIZES, replay
        r = replay()
        toy_ok = (r["opt_exact"][:2] == (4, 9.0) and set(map(tuple, r["opt_exact"][2])) == OPT_PAIRS
                  and r["greedy"][:2] == (2, 10.0) and set(map(tuple, r["greedy"][2])) == GREEDY_PAIRS
                  and r["rt_sizes"] == RT_SIZES
                  and r["ot"][:2] == (4, 10.0) and set(map(tuple, r["ot"][2])) == OT_PAIRS)
        result["toy"] = {"ok": toy_ok, "rt_expectation": r["rt_expectation"],
                         "opt_size": r["opt_exact"][0], "opt_cost": r["opt_exact"][1]}
        ok &= toy_ok
    report = harness.oracle_check(args.trials, args.max_size, args.seed)
    result["random"] = report.summary()
    ok &= report.ok
    print(json.dumps(result, indent=1, sort_keys=True))
    if args.out:
        dump_json({**result, "offenders": report.offenders}, args.out)
    elif report.offenders:
        dump_json(report.offenders, "oracle-offenders.json")
        log.error("offending instances written to oracle-offenders.json")
    return EXIT_OK if ok else EXIT_INVALID


def cmd_ingest(args) -> int:
    workers = ingest_pickups_csv(args.csv, args.bbox, args.window, args.velocity, lenient=args.lenient)
    dump_json({"bbox": [args.bbox.lat_min, args.bbox.lon_min, args.bbox.lat_max, args.bbox.lon_max],
               "window": list(args.window), "velocity": args.velocity,
               "workers": [[w.id, w.loc.x, w.loc.y, w.arrival, w.velocity] for w in workers]},
              args.out)
    return EXIT_OK


def cmd_real(args) -> int:
    row = harness.run_real(args.pickups, args.history, args.bbox, args.seed, args.budget,
                           n_tasks=args.tasks, window=args.window, lifetime=args.lifetime)
    harness.write_real_csv(row, args.out, timing=args.timing)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="boa", description="Budget-aware online task assignment experiments.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a synthetic instance")
    g.add_argument("--config", required=True, help="SyntheticConfig JSON")
    g.add_argument("--seed", type=int)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)

    r = sub.add_parser("run", help="run one algorithm on an instance")
    r.add_argument("--instance", required=True)
    r.add_argument("--algo", required=True, choices=harness.ALGORITHMS)
    r.add_argument("--order", default="random", choices=harness.ARRIVAL_MODELS)
    r.add_argument("--seed", type=int, default=0, help="Greedy-RT draw")
    r.add_argument("--ot-history", help="historical instance for the Greedy-OT threshold")
    r.add_argument("--tau", type=float, help="explicit Greedy-OT threshold")
    r.add_argument("--out", required=True)
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="parameter sweep to CSV")
    s.add_argument("--spec", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--timing", action="store_true", help="include wall-clock columns")
    s.set_defaults(func=cmd_sweep)

    o = sub.add_parser("oracle-check", help="cross-check solvers and bounds on small instances")
    o.add_argument("--trials", type=int, default=500)
    o.add_argument("--max-size", type=int, default=6)
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--toy", action="store_true", help="also replay the six-by-six example")
    o.add_argument("--out", help="write the report and offenders here")
    o.set_defaults(func=cmd_oracle_check)

    i = sub.add_parser("ingest", help="pickup CSV to worker JSON")
    i.add_argument("--csv", required=True)
    i.add_argument("--bbox", type=parse_bbox, default=NYC_BBOX)
    i.add_argument("--window", type=parse_window, default=(0.0, 12.0))
    i.add_argument("--velocity", type=float, default=REAL_VELOCITY, help="km per minute")
    i.add_argument("--lenient", action="store_true", help="skip malformed rows")
    i.add_argument("--out", required=True)
    i.set_defaults(func=cmd_ingest)

    e = sub.add_parser("real", help="pickup-trace table row")
    e.add_argument("--pickups", required=True)
    e.add_argument("--history", required=True)
    e.add_argument("--budget", type=float, default=300.0)
    e.add_argument("--tasks", type=int, default=6000)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--bbox", type=parse_bbox, default=NYC_BBOX)
    e.add_argument("--window", type=parse_window, default=(0.0, 12.0))
    e.add_argument("--lifetime", type=float, default=180.0)
    e.add_argument("--timing", action="store_true")
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_real)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except harness.ValidationFailure as exc:
        log.error("validation failed: %s", exc)
        return EXIT_INVALID
    except (OSError, PickupParseError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
