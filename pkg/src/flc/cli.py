"""Command line: ``flc run``, ``flc bench`` and ``flc check``.

Values go to stdout, one per line.  Stats and diagnostics go to stderr.
Exit status: 0 ok, 1 diagnostics (including parse, validation and limit
errors), 2 usage errors.
"""

from __future__ import annotations

import argparse
import json
import statistics
import sys
import time
from dataclasses import dataclass, field
from typing import Optional

from . import make_engine
from .corpus import CORPUS_NAMES, UnknownCorpusEntry, load_corpus, with_prelude
from .engine import Limits, SearchOrder
from .lang import ParseError, ValidationError, parse_program, validate
from .rules import CompiledProgram, UnknownGoal

ENGINE_NAMES = ("mpt", "pt", "bt")


class UsageError(Exception):
    pass


class LoadError(Exception):
    pass


@dataclass
class RunConfig:
    source: str  # a file path or a corpus name
    goal: str = "main"
    engine: str = "mpt"
    order: str = "dfs"
    limits: Limits = field(default_factory=Limits)
    stats_format: str = "none"
    timing: bool = False
    from_corpus: bool = False
    prelude: bool = False

    def __post_init__(self):
        if self.engine not in ENGINE_NAMES:
            raise UsageError(f"unknown engine '{self.engine}'")
        if self.engine == "bt" and self.order != "dfs":
            raise UsageError("engine bt supports only --order dfs")


def stats_json(stats, exhausted: Optional[str] = None) -> str:
    d = stats.as_dict()
    d["limitExceeded"] = exhausted
    return json.dumps(d)


def stats_text(stats, exhausted: Optional[str] = None) -> str:
    d = stats.as_dict()
    per = d.pop("perFun")
    lines = [f"{k}: {v}" for k, v in d.items()]
    lines += [f"perFun.{k}: {v}" for k, v in per.items()]
    if exhausted:
        lines.append(f"limitExceeded: {exhausted}")
    return "\n".join(lines)


def load_program(source: str, from_corpus: bool = False, prelude: bool = False):
    """Parse and compile a corpus entry or an IR file."""
    try:
        if from_corpus:
            prog = load_corpus(source)
        else:
            with open(source, "rb") as fh:
                prog = parse_program(fh.read())
            if prelude:
                prog = with_prelude(prog)
        return CompiledProgram(prog)
    except UnknownCorpusEntry:
        raise LoadError(f"unknown corpus entry '{source}' "
                        f"(known: {', '.join(CORPUS_NAMES)})") from None
    except OSError as e:
        raise LoadError(f"cannot read {source}: {e.strerror}") from None
    except ParseError as e:
        raise LoadError(f"{source}:{e}") from None
    except ValidationError as e:
        raise LoadError("\n".join(f"{source}: {d}" for d in e.diagnostics)) from None


def run(cfg: RunConfig, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        prog = load_program(cfg.source, cfg.from_corpus, cfg.prelude)
        engine = make_engine(cfg.engine, prog, SearchOrder(cfg.order), cfg.limits)
        t0 = time.perf_counter()
        result = engine.run(cfg.goal)
        elapsed = time.perf_counter() - t0
    except LoadError as e:
        print(e, file=err)
        return 1
    except UnknownGoal:
        print(f"unknown goal '{cfg.goal}'", file=err)
        return 1
    for v in result.values:
        out.write(v + "\n")
    out.flush()
    for d in result.diagnostics:
        print(f"diagnostic: {d}", file=err)
    if result.exhausted:
        print(f"LimitExceeded: {result.exhausted}", file=err)
    if cfg.stats_format == "json":
        print(stats_json(result.stats, result.exhausted), file=err)
    elif cfg.stats_format == "text":
        print(stats_text(result.stats, result.exhausted), file=err)
    if cfg.timing:
        print(f"time: {elapsed * 1000:.3f} ms", file=err)
    return 1 if result.diagnostics or result.exhausted else 0


# -- bench --------------------------------------------------------------------


def read_suite(path: str) -> list:
    """Suite lines are ``<corpus name or .flc path> <goal>``; ``#`` starts a comment."""
    entries = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise UsageError(f"{path}:{lineno}: expected '<program> <goal>'")
            entries.append((parts[0], parts[1]))
    return entries


def bench_one(source, goal, engine, order="dfs", reps=3, limits=None) -> dict:
    row = {"program": source, "goal": goal, "engine": engine, "order": order}
    try:
        prog = load_program(source, from_corpus=not source.endswith(".flc"),
                            prelude=source.endswith(".flc"))
        times, snapshot = [], None
        for _ in range(reps):
            eng = make_engine(engine, prog, SearchOrder(order), limits)
            t0 = time.perf_counter()
            res = eng.run(goal)
            times.append((time.perf_counter() - t0) * 1000)
            snap = (len(res.values), res.stats.as_dict(), res.exhausted)
            if snapshot is not None and snap != snapshot:
                raise RuntimeError("counters differ between repetitions")
            snapshot = snap
        row.update(values=snapshot[0], stats=snapshot[1],
                   limitExceeded=snapshot[2], ms=statistics.median(times),
                   error=None)
    except Exception as e:  # recorded, not fatal
        row.update(values=None, stats=None, limitExceeded=None, ms=None,
                   error=f"{type(e).__name__}: {e}")
    return row


def bench(suite: list, engines, reps=3, orders=("dfs",), limits=None) -> dict:
    if reps < 1:
        raise UsageError("--reps must be at least 1")
    rows = []
    for source, goal in suite:
        for engine in engines:
            for order in orders:
                if engine == "bt" and order != "dfs":
                    continue
                rows.append(bench_one(source, goal, engine, order, reps, limits))
    return {"repetitions": reps, "runs": rows}


def render_table(report: dict) -> str:
    cols = ("program", "goal", "engine", "order", "values", "rewrite",
            "pullTab", "select", "tasks", "ms")
    lines = [cols]
    for r in report["runs"]:
        s = r["stats"] or {}
        ms = "ERR" if r["error"] else f"{r['ms']:.1f}"
        lines.append((r["program"], r["goal"], r["engine"], r["order"],
                      str(r["values"]), str(s.get("rewriteSteps", "-")),
                      str(s.get("pullTabSteps", "-")),
                      str(s.get("selectionSteps", "-")),
                      str(s.get("tasksCreated", "-")), ms))
    widths = [max(len(str(row[i])) for row in lines) for i in range(len(cols))]
    return "\n".join("  ".join(str(c).ljust(w) for c, w in zip(row, widths)).rstrip()
                     for row in lines)


# -- check --------------------------------------------------------------------


def check(path: str, prelude: bool = False, err=None) -> int:
    err = err or sys.stderr
    try:
        with open(path, "rb") as fh:
            prog = parse_program(fh.read())
    except OSError as e:
        print(f"cannot read {path}: {e.strerror}", file=err)
        return 1
    except ParseError as e:
        print(f"{path}:{e}", file=err)
        return 1
    if prelude:
        prog = with_prelude(prog)
    diags = validate(prog)
    for d in diags:
        print(f"{path}: {d}", file=err)
    return 1 if diags else 0


# -- argument parsing ---------------------------------------------------------


def _positive(text):
    v = int(text)
    if v <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="flc", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="evaluate a goal and print its values")
    r.add_argument("file", nargs="?")
    r.add_argument("--corpus")
    r.add_argument("--prelude", action="store_true",
                   help="merge the bundled prelude into FILE")
    r.add_argument("--goal", default="main")
    r.add_argument("--engine", choices=ENGINE_NAMES, default="mpt")
    r.add_argument("--order", choices=("dfs", "bfs"), default="dfs")
    r.add_argument("--max-steps", type=_positive)
    r.add_argument("--max-values", type=_positive)
    r.add_argument("--max-tasks", type=_positive)
    r.add_argument("--stats", choices=("none", "text", "json"), default="none")
    r.add_argument("--time", action="store_true")

    b = sub.add_parser("bench", help="run a benchmark suite")
    b.add_argument("--suite", required=True)
    b.add_argument("--engines", default="mpt,pt,bt")
    b.add_argument("--orders", default="dfs")
    b.add_argument("--reps", type=_positive, default=3)
    b.add_argument("--max-steps", type=_positive)
    b.add_argument("--format", choices=("json", "table"), default="json")

    c = sub.add_parser("check", help="parse and validate a program")
    c.add_argument("file")
    c.add_argument("--prelude", action="store_true")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2
    try:
        if args.command == "run":
            if (args.file is None) == (args.corpus is None):
                raise UsageError("give exactly one of FILE or --corpus NAME")
            cfg = RunConfig(
                source=args.corpus or args.file, goal=args.goal,
                engine=args.engine, order=args.order,
                limits=Limits(args.max_steps, args.max_values, args.max_tasks),
                stats_format=args.stats, timing=args.time,
                from_corpus=args.corpus is not None, prelude=args.prelude)
            return run(cfg)
        if args.command == "bench":
            engines = [e for e in args.engines.split(",") if e]
            orders = [o for o in args.orders.split(",") if o]
            bad = [e for e in engines if e not in ENGINE_NAMES] + \
                [o for o in orders if o not in ("dfs", "bfs")]
            if bad:
                raise UsageError(f"unknown engine/order: {', '.join(bad)}")
            try:
                suite = read_suite(args.suite)
            except OSError as e:
                print(f"cannot read {args.suite}: {e.strerror}", file=sys.stderr)
                return 1
            report = bench(suite, engines, args.reps, orders,
                           Limits(max_steps=args.max_steps))
            if args.format == "json":
                print(json.dumps(report, indent=2))
            else:
                print(render_table(report))
            return 0
        return check(args.file, args.prelude)
    except UsageError as e:
        print(f"flc: usage error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
