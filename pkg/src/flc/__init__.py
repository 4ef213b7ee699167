"""Functional logic evaluation by graph rewriting.

Three engines share one graph store: memoized pull-tabbing (``mpt``), plain
pull-tabbing (``pt``) and trail-based backtracking (``bt``).
"""

from .backtrack import BacktrackEngine, eval_all_bt
from .corpus import CORPUS_NAMES, UnknownCorpusEntry, fan_program, load_corpus
from .engine import (CannotNarrow, Engine, EvalResult, LimitExceeded, Limits,
                     PullTabEngine, SearchOrder, StuckNode, eval_all,
                     eval_all_pt)
from .graph import Stats, print_value
from .lang import ParseError, Program, ValidationError, parse_program, validate
from .rules import CompiledProgram, UnknownGoal

ENGINES = {"mpt": Engine, "pt": PullTabEngine, "bt": BacktrackEngine}


def make_engine(name: str, program, order=SearchOrder.DFS, limits=None, **kw):
    """Build an engine by short name; ``bt`` only supports depth-first order."""
    if name == "bt":
        if SearchOrder(order) is not SearchOrder.DFS:
            raise ValueError("bt supports only dfs order")
        return BacktrackEngine(program, limits, **kw)
    return ENGINES[name](program, SearchOrder(order), limits, **kw)


__all__ = [
    "BacktrackEngine", "CORPUS_NAMES", "CannotNarrow", "StuckNode", "CompiledProgram", "ENGINES", "Engine",
    "EvalResult", "LimitExceeded", "Limits", "ParseError", "Program",
    "PullTabEngine", "SearchOrder", "Stats", "UnknownCorpusEntry",
    "UnknownGoal", "ValidationError", "eval_all", "eval_all_bt", "eval_all_pt",
    "fan_program", "load_corpus", "make_engine", "parse_program",
    "print_value", "validate",
]
