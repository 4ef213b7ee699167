"""Core intermediate language: syntax tree, S-expression reader/printer, validator.

Programs are first-order.  Variables are integer slots: a function's
parameters occupy slots ``0..arity-1`` and ``let``, ``free`` and case
patterns bind further slots explicitly.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional, Union

PRIMS = {"add": 2, "sub": 2, "mul": 2, "eqInt": 2, "leqInt": 2}


class ParseError(Exception):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


# ----------------------------------------------------------------------------
# Syntax tree


@dataclass(frozen=True)
class Var:
    index: int


@dataclass(frozen=True)
class IntLit:
    value: int


@dataclass(frozen=True)
class CtorApp:
    name: str
    args: tuple = ()


@dataclass(frozen=True)
class FunApp:
    name: str
    args: tuple = ()


@dataclass(frozen=True)
class Or:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Let:
    bindings: tuple  # ((index, Expr), ...)
    body: "Expr"


@dataclass(frozen=True)
class Free:
    indices: tuple
    body: "Expr"


@dataclass(frozen=True)
class Case:
    scrutinee: "Expr"
    branches: tuple = ()  # ((ctor, (index, ...), Expr), ...)
    int_branches: tuple = ()  # ((int, Expr), ...)
    default: Optional["Expr"] = None


@dataclass(frozen=True)
class PrimApp:
    name: str
    args: tuple = ()


Expr = Union[Var, IntLit, CtorApp, FunApp, Or, Let, Free, Case, PrimApp]


@dataclass(frozen=True)
class DataDecl:
    name: str
    constructors: tuple  # ((ctor, arity), ...)


@dataclass(frozen=True)
class FunDef:
    name: str
    arity: int
    body: Expr


@dataclass(frozen=True)
class Program:
    data: tuple = ()
    funs: tuple = ()
    goals: tuple = ()  # ((name, Expr), ...)

    def fun(self, name: str) -> Optional[FunDef]:
        for f in self.funs:
            if f.name == name:
                return f
        return None

    def goal(self, name: str) -> Optional[Expr]:
        for g, body in self.goals:
            if g == name:
                return body
        return None

    def ctor_table(self) -> dict:
        """Map constructor name -> (type name, arity)."""
        table = {}
        for d in self.data:
            for c, n in d.constructors:
                table.setdefault(c, (d.name, n))
        return table

    def merge(self, other: "Program") -> "Program":
        return Program(self.data + other.data, self.funs + other.funs,
                       self.goals + other.goals)


# ----------------------------------------------------------------------------
# Reader

_TOKEN = re.compile(r"\s+|;[^\n]*|\(|\)|[^\s();]+")
_INT = re.compile(r"-?[0-9]+\Z")


@dataclass
class _Atom:
    text: str
    line: int
    col: int


@dataclass
class _List:
    items: list = field(default_factory=list)
    line: int = 0
    col: int = 0


def _read_sexprs(text: str) -> list:
    stack = [_List()]
    line, line_start = 1, 0
    for m in _TOKEN.finditer(text):
        tok = m.group()
        col = m.start() - line_start + 1
        if tok == "(":
            stack.append(_List([], line, col))
        elif tok == ")":
            if len(stack) == 1:
                raise ParseError("unbalanced ')'", line, col)
            done = stack.pop()
            stack[-1].items.append(done)
        elif tok[0].isspace() or tok[0] == ";":
            pass
        else:
            stack[-1].items.append(_Atom(tok, line, col))
        nl = tok.count("\n")
        if nl:
            line += nl
            line_start = m.start() + tok.rindex("\n") + 1
    if len(stack) > 1:
        top = stack[-1]
        raise ParseError("unclosed '('", top.line, top.col)
    return stack[0].items


def _where(node) -> tuple:
    return node.line, node.col


def _fail(node, message: str):
    raise ParseError(message, *_where(node))


def _ident(node, what: str) -> str:
    if not isinstance(node, _Atom) or _INT.match(node.text):
        _fail(node, f"expected {what}")
    return node.text


def _int(node, what: str) -> int:
    if not isinstance(node, _Atom) or not _INT.match(node.text):
        _fail(node, f"expected {what}")
    return int(node.text)


def _nat(node, what: str) -> int:
    n = _int(node, what)
    if n < 0:
        _fail(node, f"{what} must be non-negative")
    return n


def _head(node) -> str:
    if not isinstance(node, _List) or not node.items:
        _fail(node, "expected a parenthesized form")
    return _ident(node.items[0], "form keyword")


def _expr(node) -> Expr:
    kw = _head(node)
    items = node.items[1:]

    def arity(n):
        if len(items) != n:
            _fail(node, f"'{kw}' expects {n} operand(s), got {len(items)}")

    if kw == "var":
        arity(1)
        return Var(_nat(items[0], "variable index"))
    if kw == "int":
        arity(1)
        return IntLit(_int(items[0], "integer literal"))
    if kw in ("ctor", "app", "prim"):
        if not items:
            _fail(node, f"'{kw}' expects a name")
        name = _ident(items[0], "name")
        args = tuple(_expr(a) for a in items[1:])
        return {"ctor": CtorApp, "app": FunApp, "prim": PrimApp}[kw](name, args)
    if kw == "or":
        arity(2)
        return Or(_expr(items[0]), _expr(items[1]))
    if kw == "let":
        arity(2)
        if not isinstance(items[0], _List):
            _fail(items[0], "expected binding list")
        binds = []
        for b in items[0].items:
            if not isinstance(b, _List) or len(b.items) != 2:
                _fail(b, "expected (index body) binding")
            binds.append((_nat(b.items[0], "binding index"), _expr(b.items[1])))
        return Let(tuple(binds), _expr(items[1]))
    if kw == "free":
        arity(2)
        if not isinstance(items[0], _List):
            _fail(items[0], "expected index list")
        idx = tuple(_nat(i, "variable index") for i in items[0].items)
        return Free(idx, _expr(items[1]))
    if kw == "case":
        if not items:
            _fail(node, "'case' expects a scrutinee")
        scrut = _expr(items[0])
        branches, ints, default = [], [], None
        for b in items[1:]:
            bk = _head(b)
            if bk == "branch":
                if len(b.items) != 3 or not isinstance(b.items[1], _List) or not b.items[1].items:
                    _fail(b, "expected (branch (Ctor i...) body)")
                pat = b.items[1].items
                ctor = _ident(pat[0], "constructor name")
                bound = tuple(_nat(i, "pattern index") for i in pat[1:])
                branches.append((ctor, bound, _expr(b.items[2])))
            elif bk == "intbranch":
                if len(b.items) != 3:
                    _fail(b, "expected (intbranch n body)")
                ints.append((_int(b.items[1], "integer"), _expr(b.items[2])))
            elif bk == "default":
                if len(b.items) != 2:
                    _fail(b, "expected (default body)")
                if default is not None:
                    _fail(b, "duplicate default branch")
                default = _expr(b.items[1])
            else:
                _fail(b, f"unknown case alternative '{bk}'")
        return Case(scrut, tuple(branches), tuple(ints), default)
    _fail(node, f"unknown expression form '{kw}'")


def parse_program(text) -> Program:
    """Parse the textual IR.  Raises ParseError (with line/column) on bad input."""
    if isinstance(text, (bytes, bytearray)):
        try:
            text = bytes(text).decode("utf-8")
        except UnicodeDecodeError as e:
            raise ParseError(f"invalid UTF-8 at byte {e.start}", 1, 1) from None
    try:
        forms = _read_sexprs(text)
        data, funs, goals = [], [], []
        for form in forms:
            kw = _head(form)
            items = form.items[1:]
            if kw == "data":
                if not items:
                    _fail(form, "'data' expects a type name")
                name = _ident(items[0], "type name")
                ctors = []
                for c in items[1:]:
                    if not isinstance(c, _List) or len(c.items) != 2:
                        _fail(c, "expected (Ctor arity)")
                    ctors.append((_ident(c.items[0], "constructor name"),
                                  _nat(c.items[1], "arity")))
                data.append(DataDecl(name, tuple(ctors)))
            elif kw == "fun":
                if len(items) != 3:
                    _fail(form, "expected (fun name arity body)")
                funs.append(FunDef(_ident(items[0], "function name"),
                                   _nat(items[1], "arity"), _expr(items[2])))
            elif kw == "goal":
                if len(items) != 2:
                    _fail(form, "expected (goal name body)")
                goals.append((_ident(items[0], "goal name"), _expr(items[1])))
            else:
                _fail(form, f"unknown declaration '{kw}'")
    except RecursionError:
        raise ParseError("expression nested too deeply", 1, 1) from None
    return Program(tuple(data), tuple(funs), tuple(goals))


# ----------------------------------------------------------------------------
# Printer


def print_expr(e: Expr) -> str:
    if isinstance(e, Var):
        return f"(var {e.index})"
    if isinstance(e, IntLit):
        return f"(int {e.value})"
    if isinstance(e, (CtorApp, FunApp, PrimApp)):
        kw = {CtorApp: "ctor", FunApp: "app", PrimApp: "prim"}[type(e)]
        return "(" + " ".join([kw, e.name] + [print_expr(a) for a in e.args]) + ")"
    if isinstance(e, Or):
        return f"(or {print_expr(e.left)} {print_expr(e.right)})"
    if isinstance(e, Let):
        binds = " ".join(f"({i} {print_expr(b)})" for i, b in e.bindings)
        return f"(let ({binds}) {print_expr(e.body)})"
    if isinstance(e, Free):
        return f"(free ({' '.join(map(str, e.indices))}) {print_expr(e.body)})"
    if isinstance(e, Case):
        parts = ["case", print_expr(e.scrutinee)]
        for c, bound, body in e.branches:
            pat = " ".join([c] + [str(i) for i in bound])
            parts.append(f"(branch ({pat}) {print_expr(body)})")
        for n, body in e.int_branches:
            parts.append(f"(intbranch {n} {print_expr(body)})")
        if e.default is not None:
            parts.append(f"(default {print_expr(e.default)})")
        return "(" + " ".join(parts) + ")"
    raise TypeError(f"not an expression: {e!r}")


def print_program(p: Program) -> str:
    lines = []
    for d in p.data:
        ctors = " ".join(f"({c} {n})" for c, n in d.constructors)
        lines.append(f"(data {d.name} {ctors})" if ctors else f"(data {d.name})")
    for f in p.funs:
        lines.append(f"(fun {f.name} {f.arity} {print_expr(f.body)})")
    for g, body in p.goals:
        lines.append(f"(goal {g} {print_expr(body)})")
    return "\n".join(lines) + ("\n" if lines else "")


# ----------------------------------------------------------------------------
# Validation


@dataclass(frozen=True)
class Diagnostic:
    location: str
    message: str

    def __str__(self):
        return f"{self.location}: {self.message}"


class ValidationError(Exception):
    def __init__(self, diagnostics):
        super().__init__("; ".join(map(str, diagnostics)))
        self.diagnostics = list(diagnostics)


def validate(p: Program) -> list:
    """Return one Diagnostic per violated program invariant ([] if well-formed)."""
    diags = []

    def report(loc, msg):
        diags.append(Diagnostic(loc, msg))

    ctors = {}
    types = set()
    for d in p.data:
        if d.name in types:
            report(f"data {d.name}", f"duplicate data type {d.name}")
        types.add(d.name)
        for c, n in d.constructors:
            if n < 0:
                report(f"data {d.name}", f"negative arity for {c}")
            if c in ctors:
                report(f"data {d.name}", f"duplicate constructor {c}")
            else:
                ctors[c] = (d.name, n)

    funs = {}
    for f in p.funs:
        if f.name in funs:
            report(f"fun {f.name}", f"duplicate function name {f.name}")
        else:
            funs[f.name] = f.arity
    seen_goals = set()
    for g, _ in p.goals:
        if g in seen_goals:
            report(f"goal {g}", f"duplicate goal name {g}")
        seen_goals.add(g)

    def distinct(loc, idx, what):
        if len(set(idx)) != len(idx):
            report(loc, f"duplicate index in {what}")

    def check(e, scope, loc):
        if isinstance(e, Var):
            if e.index not in scope:
                report(loc, f"unbound variable index {e.index}")
        elif isinstance(e, IntLit):
            pass
        elif isinstance(e, CtorApp):
            if e.name not in ctors:
                report(loc, f"unknown constructor {e.name}")
            elif ctors[e.name][1] != len(e.args):
                report(loc, f"arity mismatch: {e.name} expects {ctors[e.name][1]} argument(s), got {len(e.args)}")
            for a in e.args:
                check(a, scope, loc)
        elif isinstance(e, FunApp):
            if e.name not in funs:
                report(loc, f"unknown function {e.name}")
            elif funs[e.name] != len(e.args):
                report(loc, f"arity mismatch: {e.name} expects {funs[e.name]} argument(s), got {len(e.args)}")
            for a in e.args:
                check(a, scope, loc)
        elif isinstance(e, PrimApp):
            if e.name not in PRIMS:
                report(loc, f"unknown primitive {e.name}")
            elif PRIMS[e.name] != len(e.args):
                report(loc, f"arity mismatch: {e.name} expects {PRIMS[e.name]} argument(s), got {len(e.args)}")
            for a in e.args:
                check(a, scope, loc)
        elif isinstance(e, Or):
            check(e.left, scope, loc)
            check(e.right, scope, loc)
        elif isinstance(e, Let):
            idx = [i for i, _ in e.bindings]
            distinct(loc, idx, "let bindings")
            inner = scope | set(idx)
            for _, b in e.bindings:
                check(b, inner, loc)
            _check_var_cycles(e, report, loc)
            check(e.body, inner, loc)
        elif isinstance(e, Free):
            distinct(loc, list(e.indices), "free variables")
            check(e.body, scope | set(e.indices), loc)
        elif isinstance(e, Case):
            check(e.scrutinee, scope, loc)
            owners = set()
            heads = set()
            for c, bound, body in e.branches:
                if c in heads:
                    report(loc, f"duplicate case branch {c}")
                heads.add(c)
                if c not in ctors:
                    report(loc, f"unknown constructor {c}")
                else:
                    owners.add(ctors[c][0])
                    if ctors[c][1] != len(bound):
                        report(loc, f"arity mismatch in pattern {c}")
                distinct(loc, list(bound), f"pattern {c}")
                check(body, scope | set(bound), loc)
            if len(owners) > 1:
                report(loc, "case branches mix constructors of " + ", ".join(sorted(owners)))
            ints = set()
            for n, body in e.int_branches:
                if n in ints:
                    report(loc, f"duplicate int branch {n}")
                ints.add(n)
                check(body, scope, loc)
            if e.branches and e.int_branches:
                report(loc, "case mixes constructor and integer branches")
            if e.default is not None:
                check(e.default, scope, loc)
        else:
            report(loc, f"not an expression: {type(e).__name__}")

    for f in p.funs:
        check(f.body, set(range(f.arity)), f"fun {f.name}")
    for g, body in p.goals:
        check(body, set(), f"goal {g}")
    return diags


def _check_var_cycles(e: Let, report, loc):
    alias = {i: b.index for i, b in e.bindings if isinstance(b, Var)}
    cycles = set()
    for start in alias:
        path = [start]
        cur = alias[start]
        while cur in alias and cur not in path:
            path.append(cur)
            cur = alias[cur]
        if cur in path:
            cycles.add(frozenset(path[path.index(cur):]))
    for cyc in sorted(cycles, key=min):
        report(loc, f"direct variable cycle through let index {min(cyc)}")
