"""Reproduce the engine comparison tables.

    python3 scripts/run_tables.py              # all tables, plain text
    python3 scripts/run_tables.py --json out.json

engines: counters and median time for every engine on the benchmark suite.
sharing: applications of the shared ``expensive`` function (sortShared).
orders:  memoized pull-tabbing under depth-first vs breadth-first order.
fan:     per-branch steps on fan(n, d) against the predicted d and n-1 / n*d.
"""

import argparse
import json
import os
import sys

from flc import make_engine
from flc.cli import bench, read_suite, render_table
from flc.corpus import fan_program, load_corpus, with_prelude

HERE = os.path.dirname(os.path.abspath(__file__))


def engines_table(reps):
    return bench(read_suite(os.path.join(HERE, "benchmarks.suite")),
                 ["mpt", "pt", "bt"], reps)


def sharing_table(reps):
    return bench([("sortShared", "main"), ("sortShared", "sort1")],
                 ["mpt", "pt", "bt"], reps)


def orders_table(reps):
    return bench([("select", "main20"), ("addNum", "main"), ("permsort", "main")],
                 ["mpt"], reps, orders=("dfs", "bfs"))


def fan_table():
    rows = []
    for n in (2, 4, 8, 16):
        for d in (2, 4, 8):
            p = with_prelude(fan_program(n, d))
            mpt = make_engine("mpt", p).run("main")
            pt = make_engine("pt", p).run("main")
            rows.append({
                "n": n, "d": d,
                "mptPullTab": [b["pullTabSteps"] for b in mpt.branches],
                "mptSelect": [b["selectionSteps"] for b in mpt.branches],
                "ptPullTab": [b["pullTabSteps"] for b in pt.branches],
                "predicted": {"mptPullTab": d, "mptSelect": n - 1, "ptPullTab": n * d},
            })
    return rows


def render_fan(rows):
    lines = ["n   d   mpt pullTab  mpt select  pt pullTab  predicted (d, n-1, n*d)"]
    for r in rows:
        p = r["predicted"]
        lines.append(f"{r['n']:<3} {r['d']:<3} {str(r['mptPullTab']):<12} "
                     f"{str(r['mptSelect']):<11} {str(r['ptPullTab']):<11} "
                     f"({p['mptPullTab']}, {p['mptSelect']}, {p['ptPullTab']})")
    return "\n".join(lines)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--reps", type=int, default=3)
    ap.add_argument("--json", help="also write all tables to this file")
    args = ap.parse_args(argv)

    load_corpus("select")  # fail early if the corpus is not installed
    report = {"engines": engines_table(args.reps), "sharing": sharing_table(args.reps),
              "orders": orders_table(args.reps), "fan": fan_table()}
    for key in ("engines", "sharing", "orders"):
        print(f"== {key}")
        print(render_table(report[key]))
        print()
    t2 = {r["engine"]: (r["stats"] or {}).get("perFun", {}).get("expensive")
          for r in report["sharing"]["runs"] if r["goal"] == "main"}
    print(f"expensive applications on sortShared/main: {t2}\n")
    print("== fan")
    print(render_fan(report["fan"]))
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(report, fh, indent=2)
    return 0


if __name__ == "__main__":
    sys.exit(main())
