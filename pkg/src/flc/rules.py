"""Lower a Program into rewrite rules the graph engines execute.

Every ``case`` that does not scrutinize a parameter at the top of a
function body is lifted into an auxiliary function whose last parameter is
the scrutinee.  Afterwards each function either demands exactly one
parameter (a case rule), demands all of them (a primitive), or demands
nothing (a plain right-hand side).  Auxiliary functions are named
``owner#k``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from .lang import (PRIMS, Case, CtorApp, Free, FunApp, IntLit, Let, Or,
                   PrimApp, Program, ValidationError, Var, validate)


class UnknownGoal(KeyError):
    pass


@dataclass(eq=False)
class Function:
    name: str
    params: tuple  # slot numbers, in argument order
    kind: str  # "case" | "expr" | "prim"
    demand: tuple = ()  # argument positions evaluated before the rule fires
    rhs: object = None
    branches: dict = field(default_factory=dict)  # ctor -> (slots, rhs)
    int_branches: dict = field(default_factory=dict)
    default: object = None
    data_type: Optional[str] = None

    @property
    def arity(self):
        return len(self.params)

    def __repr__(self):
        return f"<Function {self.name}/{self.arity}>"


def free_vars(e) -> set:
    if isinstance(e, Var):
        return {e.index}
    if isinstance(e, IntLit):
        return set()
    if isinstance(e, (CtorApp, FunApp, PrimApp)):
        return set().union(*(free_vars(a) for a in e.args)) if e.args else set()
    if isinstance(e, Or):
        return free_vars(e.left) | free_vars(e.right)
    if isinstance(e, Let):
        bound = {i for i, _ in e.bindings}
        inner = free_vars(e.body).union(*(free_vars(b) for _, b in e.bindings))
        return inner - bound
    if isinstance(e, Free):
        return free_vars(e.body) - set(e.indices)
    if isinstance(e, Case):
        out = free_vars(e.scrutinee) | _alt_free_vars(e)
        return out
    raise TypeError(e)


def _alt_free_vars(e: Case) -> set:
    out = set()
    for _, bound, body in e.branches:
        out |= free_vars(body) - set(bound)
    for _, body in e.int_branches:
        out |= free_vars(body)
    if e.default is not None:
        out |= free_vars(e.default)
    return out


def _max_slot(e) -> int:
    if isinstance(e, Var):
        return e.index
    if isinstance(e, IntLit):
        return -1
    if isinstance(e, (CtorApp, FunApp, PrimApp)):
        return max((_max_slot(a) for a in e.args), default=-1)
    if isinstance(e, Or):
        return max(_max_slot(e.left), _max_slot(e.right))
    if isinstance(e, Let):
        return max([_max_slot(e.body)] + [max(i, _max_slot(b)) for i, b in e.bindings])
    if isinstance(e, Free):
        return max([_max_slot(e.body)] + list(e.indices))
    if isinstance(e, Case):
        m = _max_slot(e.scrutinee)
        for _, bound, body in e.branches:
            m = max([m, _max_slot(body)] + list(bound))
        for _, body in e.int_branches:
            m = max(m, _max_slot(body))
        if e.default is not None:
            m = max(m, _max_slot(e.default))
        return m
    raise TypeError(e)


class CompiledProgram:
    """Function table plus constructor metadata for one validated Program."""

    def __init__(self, program: Program):
        diags = validate(program)
        if diags:
            raise ValidationError(diags)
        self.program = program
        self.ctors = program.ctor_table()
        self.types = {d.name: d.constructors for d in program.data}
        self.funs: dict = {}
        for name, arity in PRIMS.items():
            self.funs[name] = Function(name, tuple(range(arity)), "prim",
                                       demand=tuple(range(arity)))
        self._aux = {}
        for f in program.funs:
            self._compile(f.name, tuple(range(f.arity)), f.body)
        self._goals = {}
        self._param_types = self._infer_param_types()
        self._free_types = {}

    # -- lowering -----------------------------------------------------------

    def _compile(self, name, params, body):
        fn = Function(name, params, "expr")
        self.funs[name] = fn  # registered first so recursion resolves
        if isinstance(body, Case) and isinstance(body.scrutinee, Var) \
                and body.scrutinee.index in params:
            fn.kind = "case"
            fn.demand = (params.index(body.scrutinee.index),)
            for c, bound, rhs in body.branches:
                fn.branches[c] = (bound, self._lift(rhs, name))
            for n, rhs in body.int_branches:
                fn.int_branches[n] = self._lift(rhs, name)
            if body.default is not None:
                fn.default = self._lift(body.default, name)
            if body.branches:
                fn.data_type = self.ctors[body.branches[0][0]][0]
        else:
            fn.rhs = self._lift(body, name)
        return fn

    def _lift(self, e, owner):
        if isinstance(e, (Var, IntLit)):
            return e
        if isinstance(e, CtorApp):
            return CtorApp(e.name, tuple(self._lift(a, owner) for a in e.args))
        if isinstance(e, FunApp):
            return FunApp(e.name, tuple(self._lift(a, owner) for a in e.args))
        if isinstance(e, PrimApp):
            return PrimApp(e.name, tuple(self._lift(a, owner) for a in e.args))
        if isinstance(e, Or):
            return Or(self._lift(e.left, owner), self._lift(e.right, owner))
        if isinstance(e, Let):
            return Let(tuple((i, self._lift(b, owner)) for i, b in e.bindings),
                       self._lift(e.body, owner))
        if isinstance(e, Free):
            return Free(e.indices, self._lift(e.body, owner))
        if isinstance(e, Case):
            base = owner.split("#")[0]
            k = self._aux.get(base, 0) + 1
            self._aux[base] = k
            aux = f"{base}#{k}"
            fvs = _alt_free_vars(e)
            if isinstance(e.scrutinee, Var):
                # scrutinize the variable's own slot so its evaluation is shared
                params = tuple(sorted(fvs | {e.scrutinee.index}))
                self._compile(aux, params, e)
                return FunApp(aux, tuple(Var(v) for v in params))
            fvs = tuple(sorted(fvs))
            scrut = max([_max_slot(e)] + list(fvs)) + 1
            self._compile(aux, fvs + (scrut,),
                          Case(Var(scrut), e.branches, e.int_branches, e.default))
            args = tuple(Var(v) for v in fvs) + (self._lift(e.scrutinee, owner),)
            return FunApp(aux, args)
        raise TypeError(e)

    # -- free variable types ------------------------------------------------
    #
    # A free variable is narrowed over the constructors of the type its
    # consumers scrutinize.  Types are inferred from use sites only: a
    # variable passed straight to a parameter that some case inspects.

    def _bodies(self, fn):
        if fn.rhs is not None:
            yield (), fn.rhs
        for bound, rhs in fn.branches.values():
            yield bound, rhs
        for rhs in fn.int_branches.values():
            yield (), rhs
        if fn.default is not None:
            yield (), fn.default

    def _infer_param_types(self):
        types = {name: [None] * fn.arity for name, fn in self.funs.items()}
        for name, fn in self.funs.items():
            if fn.kind == "case" and fn.data_type:
                types[name][fn.demand[0]] = fn.data_type
        changed = True
        while changed:
            changed = False
            for name, fn in self.funs.items():
                row = types[name]
                for i, slot in enumerate(fn.params):
                    if row[i] is not None:
                        continue
                    for bound, body in self._bodies(fn):
                        if slot in bound:
                            continue
                        ty = self._use_type(body, slot, types)
                        if ty:
                            row[i] = ty
                            changed = True
                            break
        return types

    def _use_type(self, e, v, types):
        todo = [e]
        while todo:
            e = todo.pop()
            if isinstance(e, (FunApp, PrimApp, CtorApp)):
                if isinstance(e, FunApp):
                    row = types.get(e.name, ())
                    for j, a in enumerate(e.args):
                        if a == Var(v) and j < len(row) and row[j]:
                            return row[j]
                todo.extend(reversed(e.args))
            elif isinstance(e, Or):
                todo += [e.right, e.left]
            elif isinstance(e, Let):
                if all(i != v for i, _ in e.bindings):
                    todo.append(e.body)
                    todo.extend(b for _, b in reversed(e.bindings))
            elif isinstance(e, Free):
                if v not in e.indices:
                    todo.append(e.body)
        return None

    def free_type(self, e: Free, index: int) -> Optional[str]:
        key = (id(e), index)
        if key not in self._free_types:
            self._free_types[key] = (e, self._use_type(e.body, index, self._param_types))
        return self._free_types[key][1]

    # -- goals --------------------------------------------------------------

    def goal(self, name: str):
        """Case-free goal expression.  ``baseN`` applies 1-ary ``base`` to N."""
        if name not in self._goals:
            body = self.program.goal(name)
            if body is None:
                body = self._parametric_goal(name)
            self._goals[name] = self._lift(body, f"goal:{name}")
        return self._goals[name]

    def _parametric_goal(self, name):
        # longest 1-ary function name followed by a decimal argument
        m = re.fullmatch(r"(.*?)(\d+)", name)
        if m:
            for cut in range(len(name) - 1, len(m.group(1)) - 1, -1):
                f = self.program.fun(name[:cut])
                if f is not None and f.arity == 1:
                    return FunApp(f.name, (IntLit(int(name[cut:])),))
        raise UnknownGoal(name)

    def goal_names(self):
        return [g for g, _ in self.program.goals]

    def constructors_of(self, type_name: str):
        return self.types[type_name]
