"""Bundled benchmark programs.

Each entry is a ``.flc`` file in ``corpus/``; the shared prelude is merged in
front of it on load.  ``fan_program`` builds the parametric sharing benchmark
(one choice demanded at ``n`` sites, each below ``d`` demanding calls).
"""

from __future__ import annotations

from importlib import resources

from .lang import Program, parse_program

CORPUS_NAMES = ("nrev", "takPeano", "addNum", "select", "permsort",
                "sortShared", "xorSelf", "appendixA", "wideShare", "loopOr",
                "coin")


class UnknownCorpusEntry(KeyError):
    pass


def _read(name: str) -> str:
    return resources.files(__package__).joinpath("corpus", f"{name}.flc").read_text()


def prelude() -> Program:
    return parse_program(_read("prelude"))


def load_corpus(name: str) -> Program:
    if name not in CORPUS_NAMES:
        raise UnknownCorpusEntry(name)
    return with_prelude(parse_program(_read(name)))


def with_prelude(program: Program) -> Program:
    return prelude().merge(program)


def fan_source(n: int, d: int) -> str:
    """IR text for fan(n, d).

    ``main = let x = 0 ? 1 in site1 x 0`` where site k evaluates
    ``g^(d-1) x`` through a case (the d-th demanding call) and passes the
    running sum on.  Values are ``n*(d-1)`` and ``n*d``.
    """
    if n < 1 or d < 1:
        raise ValueError("fan needs n >= 1 and d >= 1")
    lines = ["(fun g 1 (prim add (var 0) (int 1)))"]
    for k in range(1, n + 1):
        inner = "(var 0)"
        for _ in range(d - 1):
            inner = f"(app g {inner})"
        nxt = f"site{k + 1}" if k < n else "done"
        lines.append(
            f"(fun site{k} 2 (let ((2 {inner})) (case (var 2) "
            f"(default (app {nxt} (var 0) (prim add (var 1) (var 2)))))))")
    lines.append("(fun done 2 (var 1))")
    lines.append("(goal main (let ((0 (or (int 0) (int 1)))) (app site1 (var 0) (int 0))))")
    return "\n".join(lines) + "\n"


def fan_program(n: int, d: int) -> Program:
    return parse_program(fan_source(n, d))
