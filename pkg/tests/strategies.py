"""Hypothesis strategies: small, well-typed, terminating programs.

Types are Int and Bool.  Function ``f<i>`` may only call ``f<j>`` with
``j < i`` and lets are non-recursive, so every program terminates.  Free
variables are Bool and only ever scrutinized by a case.
"""

from hypothesis import strategies as st

from flc import BacktrackEngine, Limits
from flc.lang import (Case, CtorApp, DataDecl, Free, FunApp, FunDef, IntLit,
                      Let, Or, PrimApp, Program, Var)

DATA = (DataDecl("Bool", (("True", 0), ("False", 0))),
        DataDecl("Pair", (("Pair", 2),)))
TYPES = ("Int", "Bool")


@st.composite
def expr(draw, ty, env, funs, depth):
    """``env``: list of (index, type); ``funs``: list of (name, param types, result type)."""
    nxt = max([i for i, _ in env], default=-1) + 1
    vars_ = [i for i, t in env if t == ty]
    leaf = depth <= 0 or draw(st.integers(0, 3)) == 0
    if leaf:
        if vars_ and draw(st.booleans()):
            return Var(draw(st.sampled_from(vars_)))
        if ty == "Int":
            return IntLit(draw(st.integers(0, 3)))
        return CtorApp(draw(st.sampled_from(["True", "False"])), ())
    sub = lambda t, e=env: expr(t, e, funs, depth - 1)  # noqa: E731
    callable_ = [f for f in funs if f[2] == ty]
    kinds = ["or", "or", "let", "share", "share", "case", "prim"]
    if callable_:
        kinds += ["call", "call"]
    if ty == "Bool":
        kinds.append("free")
    kind = draw(st.sampled_from(kinds))
    if kind == "or":
        return Or(draw(sub(ty)), draw(sub(ty)))
    if kind == "let":
        bty = draw(st.sampled_from(TYPES))
        b = draw(sub(bty))
        return Let(((nxt, b),), draw(expr(ty, env + [(nxt, bty)], funs, depth - 1)))
    if kind == "share":
        # a let-bound value demanded twice, the pattern that needs memoization
        env2 = env + [(nxt, ty)]
        inner = draw(expr(ty, env2, funs, depth - 1))
        if ty == "Int":
            body = PrimApp(draw(st.sampled_from(["add", "mul"])), (Var(nxt), inner))
        else:
            body = Case(Var(nxt), (("True", (), inner),
                                   ("False", (), draw(expr(ty, env2, funs, depth - 1)))), (), None)
        bound = Or(draw(sub(ty)), draw(sub(ty))) if draw(st.booleans()) else draw(sub(ty))
        return Let(((nxt, bound),), body)
    if kind == "prim":
        if ty == "Int":
            return PrimApp(draw(st.sampled_from(["add", "sub", "mul"])),
                           (draw(sub("Int")), draw(sub("Int"))))
        return PrimApp(draw(st.sampled_from(["eqInt", "leqInt"])),
                       (draw(sub("Int")), draw(sub("Int"))))
    if kind == "call":
        name, ptys, _ = draw(st.sampled_from(callable_))
        return FunApp(name, tuple(draw(sub(t)) for t in ptys))
    if kind == "free":
        # free x in case x of ... ; x is not visible in the branches
        return Free((nxt,), draw(bool_case(Var(nxt), ty, env, funs, depth)))
    if draw(st.booleans()):
        return draw(bool_case(draw(sub("Bool")), ty, env, funs, depth))
    ints = tuple((k, draw(sub(ty))) for k in sorted(draw(st.sets(st.integers(0, 3), max_size=2))))
    default = draw(st.one_of(st.none(), sub(ty)))
    return Case(draw(sub("Int")), (), ints, default)


@st.composite
def bool_case(draw, scrut, ty, env, funs, depth):
    heads = draw(st.sampled_from([("True", "False"), ("False", "True"), ("True",), ("False",)]))
    branches = tuple((h, (), draw(expr(ty, env, funs, depth - 1))) for h in heads)
    return Case(scrut, branches, (), None)


SEARCH_BUDGET = 20_000


def _small_search(p):
    return BacktrackEngine(p, Limits(max_steps=SEARCH_BUDGET)).run("main").exhausted is None


def programs(max_funs=3, depth=3):
    return any_programs(max_funs, depth).filter(_small_search)


@st.composite
def any_programs(draw, max_funs=3, depth=3):
    funs, defs = [], []
    for i in range(draw(st.integers(0, max_funs))):
        ptys = tuple(draw(st.lists(st.sampled_from(TYPES), max_size=2)))
        rty = draw(st.sampled_from(TYPES))
        env = list(enumerate(ptys))
        if ptys and draw(st.booleans()) and ptys[0] == "Bool":
            # top-level case on a parameter: compiled as a case rule
            body = draw(bool_case(Var(0), rty, env, funs, depth))
        else:
            body = draw(expr(rty, env, funs, depth))
        defs.append(FunDef(f"f{i}", len(ptys), body))
        funs.append((f"f{i}", ptys, rty))
    shape = draw(st.sampled_from(["Int", "Bool", "Pair"]))
    if shape == "Pair":
        goal = CtorApp("Pair", (draw(expr("Int", [], funs, depth)),
                                draw(expr("Bool", [], funs, depth))))
    else:
        goal = draw(expr(shape, [], funs, depth))
    return Program(DATA, tuple(defs), (("main", goal),))
