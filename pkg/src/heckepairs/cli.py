"""Command line front end.

``heckepairs run CONFIG --out DIR`` executes a config file.  Every other
subcommand builds a one-task config (catalog names in flag values are pulled
in with ``use``) and runs it, printing the report or writing it to ``--out``.

Exit codes: 0 all tasks completed (verdicts may be negative), 1 execution
error, 2 config error.

Seeds: task ``i`` of a run with seed ``S`` uses
``numpy.random.SeedSequence(S).spawn(n)[i].generate_state(1)[0]``, in
sequential and parallel mode alike.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import platform
import random
import shlex
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .catalog import CATALOG
from .config import _Err, parse_config
from .errors import BudgetExceeded, ConfigError, ConsistencyError, DomainError
from .tasks import TASKS, jsonable

SEED_ENV = "HECKE_SEED"


def task_seeds(seed, n):
    return [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(n)]


def _find_verdict(obj):
    if isinstance(obj, dict):
        if "verdict" in obj and isinstance(obj["verdict"], str):
            return obj["verdict"]
        for v in obj.values():
            found = _find_verdict(v)
            if found:
                return found
    return ""


def run_task(cfg, i, seed, budget):
    """Run task ``i``; returns the report dict (errors are reported in-band)."""
    spec = cfg.tasks[i]
    task = TASKS[spec.kind]
    report = {"task": spec.kind, "index": i, "line": spec.line, "params": spec.raw,
              "certifies": task.certifies,
              "provenance": {"config_seed": cfg.seed, "task_seed": seed, "budget": budget}}
    rng = random.Random(seed)
    try:
        report["result"] = jsonable(task.run(spec.params, rng, budget))
        report["status"] = "ok"
    except (DomainError, ConsistencyError, BudgetExceeded, _Err, ValueError, KeyError, AssertionError) as exc:
        report["status"] = "error"
        report["error"] = f"{type(exc).__name__}: {exc}"
    return report


def _worker(args):
    text, i, seed, budget, cfg_seed = args
    cfg = parse_config(text)
    cfg.seed = cfg_seed
    return run_task(cfg, i, seed, budget)


def dumps(obj):
    return json.dumps(obj, sort_keys=True, indent=2, default=str) + "\n"


def run(cfg, output_dir=None, budget=None, parallel=0, stream=None):
    """Execute every task; write reports, summary and metadata; return the exit code."""
    budget = min(cfg.budget, budget) if budget else cfg.budget
    seeds = task_seeds(cfg.seed, len(cfg.tasks))
    started = time.time()
    if parallel and parallel > 1 and len(cfg.tasks) > 1:
        jobs = [(cfg.text, i, s, budget, cfg.seed) for i, s in enumerate(seeds)]
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            reports = list(pool.map(_worker, jobs))
    else:
        reports = [run_task(cfg, i, s, budget) for i, s in enumerate(seeds)]
    elapsed = time.time() - started
    rows = [{"index": r["index"], "task": r["task"], "line": r["line"], "status": r["status"],
             "verdict": _find_verdict(r.get("result", {})), "file": f"{r['index']:02d}-{r['task']}.json"}
            for r in reports]
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=["index", "task", "line", "status", "verdict", "file"], lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    meta = {"version": __version__, "python": platform.python_version(), "started": started,
            "elapsed_seconds": elapsed, "tasks": len(reports), "parallel": parallel or 0}
    try:
        if output_dir is not None:
            os.makedirs(output_dir, exist_ok=True)
            for r, row in zip(reports, rows):
                with open(os.path.join(output_dir, row["file"]), "w") as fh:
                    fh.write(dumps(r))
            with open(os.path.join(output_dir, "summary.csv"), "w") as fh:
                fh.write(buf.getvalue())
            with open(os.path.join(output_dir, "metadata.json"), "w") as fh:
                fh.write(dumps(meta))
        elif stream is not None:
            for r in reports:
                stream.write(dumps(r))
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1, reports
    code = 1 if any(r["status"] != "ok" for r in reports) else 0
    for r in reports:
        if r["status"] != "ok":
            print(f"task {r['index']} ({r['task']}, line {r['line']}): {r['error']}", file=sys.stderr)
    return code, reports


# ---------------------------------------------------------------------------
# argument handling
# ---------------------------------------------------------------------------
def _catalog_uses(values):
    uses = []
    for v in values:
        head = v.split(".", 1)[0]
        if head in CATALOG and head not in uses:
            uses.append(head)
    return uses


def _context_defaults(kind, args):
    """``--context X`` fills H and K (``X.H``, ``X.K``); ``--extension X`` fills ``H``."""
    ctx = getattr(args, "context", None)
    if ctx:
        for role in ("H", "K"):
            if getattr(args, role, None) is None:
                setattr(args, role, f"{ctx}.{role}")
    if kind == "extension-check" and args.extension and args.H is None:
        if f"{args.extension}.H" in CATALOG.get(args.extension, ""):
            args.H = f"{args.extension}.H"


def build_task_config(kind, args):
    task = TASKS[kind]
    _context_defaults(kind, args)
    params = {}
    for key, _, _ in task.schema:
        v = getattr(args, key, None)
        if v is not None:
            params[key] = str(v)
    uses = _catalog_uses(list(params.values()) + list(args.use or []))
    lines = [f"set seed = {args.seed}"]
    if args.budget:
        lines.append(f"set budget = {args.budget}")
    lines += [f"use {u}" for u in uses]
    text = ""
    if args.config:
        with open(args.config) as fh:
            text = fh.read()
    call = " ".join(f"{k}={shlex.quote(v)}" for k, v in params.items())
    return "\n".join(lines) + "\n" + text + f"\ntask {kind} {call}\n"


def _parser():
    p = argparse.ArgumentParser(prog="heckepairs", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--budget", type=int, default=None, help="global cap on enumeration budgets")
    common.add_argument("--seed", type=int, default=None, help=f"seed (default ${SEED_ENV} or 0)")
    common.add_argument("--parallel", type=int, default=0, help="worker processes for independent tasks")
    common.add_argument("--out", default=None, help="output file (subcommands) or directory (run)")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", parents=[common], help="run a config file")
    r.add_argument("config")
    for kind, task in TASKS.items():
        s = sub.add_parser(kind, parents=[common], help=task.certifies)
        s.add_argument("--config", default=None, help="extra declarations")
        s.add_argument("--use", action="append", help="catalog entry to include")
        if any(k in ("H", "K") for k, _, _ in task.schema):
            s.add_argument("--context", default=None, help="catalog context providing H and K")
        for key, kind_, _ in task.schema:
            s.add_argument(f"--{key}", dest=key, default=None)
    return p


def main(argv=None):
    args = _parser().parse_args(argv)
    if args.seed is None:
        env = os.environ.get(SEED_ENV)
        try:
            args.seed = int(env) if env else None
        except ValueError:
            print(f"error: {SEED_ENV}={env!r} is not an integer", file=sys.stderr)
            return 2
    try:
        if args.command == "run":
            with open(args.config) as fh:
                text = fh.read()
            cfg = parse_config(text)
            if args.seed is not None:
                cfg.seed = args.seed
                cfg.text = f"set seed = {args.seed}\n" + text
            code, _ = run(cfg, args.out, args.budget, args.parallel, stream=sys.stdout)
            return code
        if args.seed is None:
            args.seed = 0
        cfg = parse_config(build_task_config(args.command, args))
    except ConfigError as exc:
        for e in exc.errors:
            print(f"config error: {e}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    code, reports = run(cfg, None, args.budget)
    # only the requested task is reported; extra config tasks still ran
    report = reports[-1]
    try:
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(dumps(report))
        else:
            sys.stdout.write(dumps(report))
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return code


if __name__ == "__main__":
    sys.exit(main())
