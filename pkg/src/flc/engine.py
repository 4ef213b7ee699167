"""Memoized pull-tabbing evaluator and the pure pull-tabbing variant.

Head normal forms are computed per task.  A task that meets a choice it
has not decided pulls it towards its root (pull-tab); a task that has
decided it takes the branch directly and records the task-specific result
in the task result map of the demanding node.  Owner task ids decide
between in-place updates and memoized copies.
"""

from __future__ import annotations

import enum
import sys
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from .graph import (CHOICE, CTOR, FAIL, FREE, FUN, INT, L, R,
                    OwnerOrderViolation, Stats, Store, Task,
                    fingerprint_extend)
from .lang import CtorApp, Free, FunApp, IntLit, Let, Or, PrimApp, Var
from .rules import CompiledProgram, Function

RECURSION_LIMIT = 20000

_IND = Function("$ind", (0,), "expr", rhs=Var(0))


class SearchOrder(enum.Enum):
    DFS = "dfs"
    BFS = "bfs"


@dataclass
class Limits:
    max_steps: Optional[int] = None
    max_values: Optional[int] = None
    max_tasks: Optional[int] = None

    def __post_init__(self):
        for name in ("max_steps", "max_values", "max_tasks"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ValueError(f"{name} must be positive")


class LimitExceeded(Exception):
    def __init__(self, limit: str):
        super().__init__(limit)
        self.limit = limit


class StuckNode(Exception):
    pass


class CannotNarrow(StuckNode):
    """A free variable reached a primitive or an integer case."""


class _Preempted(Exception):
    pass


@dataclass
class EvalResult:
    values: list
    stats: Stats
    exhausted: Optional[str] = None  # name of the limit that stopped the run
    diagnostics: list = field(default_factory=list)
    # per emitted value: steps summed over the emitting task and its ancestors
    branches: list = field(default_factory=list)


_PRIM_OPS = {
    "add": lambda a, b: a + b,
    "sub": lambda a, b: a - b,
    "mul": lambda a, b: a * b,
    "eqInt": lambda a, b: a == b,
    "leqInt": lambda a, b: a <= b,
}

REWRITE, PULLTAB, SELECT = 0, 1, 2


class Engine:
    """Memoized pull-tabbing over a task queue (DFS: stack, BFS: FIFO)."""

    memo = True
    name = "mpt"

    def __init__(self, program, order=SearchOrder.DFS, limits=None,
                 debug=False, quantum=1000, share_decisions=False):
        self.prog = program if isinstance(program, CompiledProgram) \
            else CompiledProgram(program)
        self.order = SearchOrder(order)
        self.limits = limits or Limits()
        self.debug = debug
        self.share_decisions = share_decisions
        self.stats = Stats()
        self.store = Store(self.stats, debug=debug)
        # BFS tasks are time-sliced so a diverging branch cannot starve others
        self.quantum = quantum if self.order is SearchOrder.BFS else None
        self.cur: Optional[Task] = None
        self._slice_end = float("inf")
        self.values, self.branches, self.diagnostics = [], [], []
        self.queue: deque = deque()

    # -- counters -----------------------------------------------------------

    def _count(self, kind):
        st = self.stats
        if kind == REWRITE:
            st.rewriteSteps += 1
        elif kind == PULLTAB:
            st.pullTabSteps += 1
        else:
            st.selectionSteps += 1
        self.cur.own[kind] += 1
        limit = self.limits.max_steps
        if limit is not None and st.steps() > limit:
            raise LimitExceeded("maxSteps")

    def _count_rewrite(self, fn):
        if fn is not _IND:
            pf = self.stats.perFun
            pf[fn.name] = pf.get(fn.name, 0) + 1
        self._count(REWRITE)

    # -- graph construction -------------------------------------------------

    def update(self, target, tag, sym=None, ival=0, cid=0, args=(),
               free_type=None):
        self.store.update_in_place(target, tag, sym, ival, cid, args, free_type)

    def _payload(self, e, env, owner):
        if isinstance(e, IntLit):
            return INT, None, e.value, 0, ()
        if isinstance(e, CtorApp):
            return CTOR, e.name, 0, 0, [self.build(a, env, owner) for a in e.args]
        if isinstance(e, (FunApp, PrimApp)):
            return (FUN, self.prog.funs[e.name], 0, 0,
                    [self.build(a, env, owner) for a in e.args])
        if isinstance(e, Or):
            return (CHOICE, None, 0, next(self.store._cids),
                    [self.build(e.left, env, owner), self.build(e.right, env, owner)])
        raise TypeError(e)

    def _peel(self, e, env, owner):
        while isinstance(e, (Let, Free)):
            if isinstance(e, Let):
                env = self._bind_let(e.bindings, env, owner)
            else:
                env = dict(env)
                for i in e.indices:
                    env[i] = self.store.alloc(FREE, owner=owner,
                                              free_type=self.prog.free_type(e, i))
            e = e.body
        return e, env

    def _bind_let(self, bindings, env, owner):
        env = dict(env)
        holes, aliases = [], {}
        for i, e in bindings:
            if isinstance(e, Var):
                aliases[i] = e.index
                env.pop(i, None)
            else:
                node = self.store.alloc(FAIL, owner=owner)
                env[i] = node
                holes.append((node, e))
        while aliases:
            for i, j in list(aliases.items()):
                if j not in aliases:
                    env[i] = env[j]
                    del aliases[i]
        for node, e in holes:
            e, inner = self._peel(e, env, owner)
            if isinstance(e, Var):
                tag, sym, ival, cid, args = FUN, _IND, 0, 0, [inner[e.index]]
            else:
                tag, sym, ival, cid, args = self._payload(e, inner, owner)
            node.tag, node.sym, node.ival, node.cid, node.args = tag, sym, ival, cid, list(args)
        return env

    def build(self, e, env, owner):
        e, env = self._peel(e, env, owner)
        if isinstance(e, Var):
            return env[e.index]
        tag, sym, ival, cid, args = self._payload(e, env, owner)
        return self.store.alloc(tag, sym, ival, cid, args, owner)

    def copy_with(self, n, pos, arg, owner):
        args = list(n.args)
        args[pos] = arg
        return self.store.alloc(n.tag, n.sym, n.ival, n.cid, args, owner)

    # -- head normal form ---------------------------------------------------

    def decision(self, t, cid):
        return t.fingerprint.get(cid)

    def hnf(self, t, n):
        """Evaluate ``n`` for task ``t`` until it is CTOR/INT/FAIL/CHOICE/FREE."""
        store = self.store
        while True:
            tag = n.tag
            if tag is FUN:
                if n.tr and self.memo:
                    hit = store.tr_lookup(n, t)
                    if hit is not None:
                        n = hit
                        continue
                n = self.step(t, n)
            elif tag is FREE and n.tr and self.memo:
                hit = store.tr_lookup(n, t)
                if hit is None:
                    return n
                n = hit
            else:
                return n

    def step(self, t, n):
        if self.stats.steps() >= self._slice_end:
            raise _Preempted()
        if self.debug and self.memo and n.owner not in t.ancestry:
            raise OwnerOrderViolation(f"task {t.id} reached {n!r}")
        fn = n.sym
        for p in fn.demand:
            a = n.args[p]
            r = self.hnf(t, a)
            if r.tag is FREE:
                if fn.kind != "case" or fn.data_type is None:
                    raise CannotNarrow(f"{fn.name} demands an unbound free variable")
                r = self.narrow(t, r, fn.data_type)
            if r.tag is CHOICE:
                return self.on_choice(t, n, p, r)
            if r is not a:
                n = self.commit_arg(t, n, p, r)
        return self.apply_rule(t, n)

    def on_choice(self, t, n, p, c):
        sel = self.decision(t, c.cid)
        if sel is None:
            return self.pull_tab(t, n, p, c)
        return self.select_choice(t, n, p, c, sel)

    def pull_tab(self, t, n, p, c):
        """``f (a ?c b)  ->  (f a) ?c (f b)`` with copies owned by the future tasks."""
        left_id, right_id = self.store.plan_split(t, c.cid)
        n1 = self.copy_with(n, p, c.args[L], left_id)
        n2 = self.copy_with(n, p, c.args[R], right_id)
        if self.memo and t.id != n.owner:
            if t.id < n.owner:
                raise OwnerOrderViolation(f"task {t.id} below owner of {n!r}")
            res = self.store.alloc_choice(n1, n2, owner=t.id, cid=c.cid)
            self.store.tr_set(n, t.id, res)
        else:
            self.update(n, CHOICE, cid=c.cid, args=(n1, n2))
            res = n
        if self.debug and res.cid != c.cid:
            raise AssertionError("pull-tab changed the choice id")
        self._count(PULLTAB)
        return res

    def select_choice(self, t, n, p, c, sel):
        branch = c.args[sel]
        if self.share_decisions:
            # every descendant of the deciding task agrees on this selection
            key = max(t.deciders.get(c.cid, t.id), n.owner, branch.owner)
        else:
            key = t.id
        if self.memo and key > n.owner:
            res = n.tr.get(key) if n.tr else None
            if res is None:
                res = self.copy_with(n, p, branch, key)
                self.store.tr_set(n, key, res)
        elif not self.memo or key == n.owner:
            args = list(n.args)
            args[p] = branch
            self.update(n, n.tag, n.sym, args=args)
            res = n
        else:
            raise OwnerOrderViolation(f"task {t.id} below owner of {n!r}")
        self._count(SELECT)
        return res

    def commit_arg(self, t, n, p, r):
        if self.memo and r.owner > n.owner:
            res = self.copy_with(n, p, r, r.owner)
            self.store.tr_set(n, r.owner, res)
            return res
        args = list(n.args)
        args[p] = r
        self.update(n, FUN, n.sym, args=args)
        return n

    def commit_result(self, t, n, h):
        if h.tag is FREE:
            return h  # no indirection node; the rule is simply re-applied
        if self.memo and h.owner > n.owner:
            self.store.tr_set(n, h.owner, h)
            return h
        self.update(n, h.tag, h.sym, h.ival, h.cid, h.args, h.free_type)
        return n

    def apply_rule(self, t, n):
        fn = n.sym
        if fn.kind == "prim":
            a, b = n.args
            if a.tag is FAIL or b.tag is FAIL:
                self.update(n, FAIL)
            elif a.tag is not INT or b.tag is not INT:
                raise StuckNode(f"{fn.name} applied to non-integers")
            else:
                v = _PRIM_OPS[fn.name](a.ival, b.ival)
                if isinstance(v, bool):
                    self.update(n, CTOR, "True" if v else "False")
                else:
                    self.update(n, INT, ival=v)
            self._count_rewrite(fn)
            return n
        env = dict(zip(fn.params, n.args))
        if fn.kind == "case":
            s = n.args[fn.demand[0]]
            rhs = None
            if s.tag is CTOR:
                br = fn.branches.get(s.sym)
                if br is not None:
                    bound, rhs = br
                    env.update(zip(bound, s.args))
                else:
                    rhs = fn.default
            elif s.tag is INT:
                rhs = fn.int_branches.get(s.ival, fn.default)
            if rhs is None:
                self.update(n, FAIL)
                self._count_rewrite(fn)
                return n
        else:
            rhs = fn.rhs
        e, env = self._peel(rhs, env, n.owner)
        if isinstance(e, Var):
            target = env[e.index]
            self.pin(n, target)
            h = self.hnf(t, target)
            self._count_rewrite(fn)
            return self.commit_result(t, n, h)
        tag, sym, ival, cid, args = self._payload(e, env, n.owner)
        self.update(n, tag, sym, ival, cid, args)
        self._count_rewrite(fn)
        return n

    def pin(self, n, target):
        """Hook run before ``n`` waits on a variable result; see backtrack."""

    def narrow(self, t, f, type_name):
        """Replace a demanded free variable by a generator over its constructors."""
        private = self.memo and t.id != f.owner
        gen = self._generator(type_name, t.id if private else f.owner)
        if private:
            self.store.tr_set(f, t.id, gen)
            return gen
        self.update(f, gen.tag, gen.sym, gen.ival, gen.cid, gen.args)
        return f

    def _generator(self, type_name, owner):
        """``C1 x.. ? (C2 y.. ? ...)`` over the constructors, fresh free args."""
        alloc = self.store.alloc
        gen = None
        for name, arity in reversed(self.prog.constructors_of(type_name)):
            node = alloc(CTOR, name, args=[alloc(FREE, owner=owner) for _ in range(arity)],
                         owner=owner)
            gen = node if gen is None else self.store.alloc_choice(node, gen, owner)
        return gen

    # -- normal forms and tasks ---------------------------------------------

    def run(self, goal: str) -> EvalResult:
        expr = self.prog.goal(goal)
        old_limit = sys.getrecursionlimit()
        sys.setrecursionlimit(max(old_limit, RECURSION_LIMIT))
        exhausted = None
        try:
            root = Task(1, self.build(expr, {}, 1))
            self.cur = root
            self.queue.append(root)
            self._drive()
        except LimitExceeded as e:
            exhausted = e.limit
        finally:
            sys.setrecursionlimit(old_limit)
        return EvalResult(self.values, self.stats, exhausted,
                          self.diagnostics, self.branches)

    def _drive(self):
        queue = self.queue
        while queue:
            t = queue.popleft()
            self.cur = t
            self._slice_end = self.stats.steps() + self.quantum \
                if self.quantum else float("inf")
            try:
                self.normalize(t)
            except _Preempted:
                queue.append(t)
            except (StuckNode, RecursionError) as e:
                self.diagnostics.append(f"task {t.id}: {type(e).__name__}: {e}")

    def emit(self, t, text):
        self.values.append(text)
        self.branches.append({
            "rewriteSteps": t.base[0] + t.own[0],
            "pullTabSteps": t.base[1] + t.own[1],
            "selectionSteps": t.base[2] + t.own[2],
        })
        self.stats.valuesEmitted += 1
        limit = self.limits.max_values
        if limit is not None and len(self.values) >= limit:
            raise LimitExceeded("maxValues")

    def normalize(self, t):
        """Drive task ``t`` to a value, a split, or failure.

        ``t.stack`` holds ``[ctor node, printed args so far, override]``
        frames; the override replaces the current argument after a selection.
        """
        stack = t.stack
        while True:
            if not stack:
                r = self._nf_hnf(t, t.root)
                if r.tag is CHOICE:
                    sel = self.decision(t, r.cid)
                    if sel is None:
                        if self.split(t, r):
                            return
                        continue
                    t.root = r.args[sel]
                    self._count(SELECT)
                    continue
            else:
                frame = stack[-1]
                node, acc, override = frame
                if len(acc) == len(node.args):
                    stack.pop()
                    text = "(" + " ".join([node.sym] + acc) + ")"
                    if not stack:
                        self.emit(t, text)
                        return
                    stack[-1][1].append(text)
                    stack[-1][2] = None
                    continue
                r = self._nf_hnf(t, override or node.args[len(acc)])
                if r.tag is CHOICE:
                    if self.nf_choice(t, r):
                        return
                    continue
            if r.tag is FAIL:
                self.fail(t)
                return
            if r.tag is FREE:
                raise StuckNode("unbound free variable in result")
            if r.tag is CTOR and r.args:
                stack.append([r, [], None])
                continue
            text = str(r.ival) if r.tag is INT else r.sym
            if not stack:
                self.emit(t, text)
                return
            stack[-1][1].append(text)
            stack[-1][2] = None

    def _nf_hnf(self, t, n):
        r = self.hnf(t, n)
        if r.tag is FREE and r.free_type:
            r = self.hnf(t, self.narrow(t, r, r.free_type))
        return r

    def fail(self, t):
        pass

    def nf_choice(self, t, c):
        """Choice met below a constructor.  Returns True if the task is done."""
        sel = self.decision(t, c.cid)
        if sel is not None:
            t.stack[-1][2] = c.args[sel]
            self._count(SELECT)
            return False
        root, left, right = self.pull_path(t, c)
        self.split(t, root, (left, right))
        return True

    def pull_path(self, t, c):
        """Pull-tab ``c`` through every constructor frame up to the root."""
        left_id, right_id = self.store.plan_split(t, c.cid)
        left, right = c.args
        lstack, rstack = [], []
        for node, acc, _ in reversed(t.stack):
            pos = len(acc)
            left = self.copy_with(node, pos, left, left_id)
            right = self.copy_with(node, pos, right, right_id)
            lstack.append([left, list(acc), None])
            rstack.append([right, list(acc), None])
            self._count(PULLTAB)
        lstack.reverse()
        rstack.reverse()
        root = self.store.alloc_choice(left, right, owner=t.id, cid=c.cid)
        return root, lstack, rstack

    def split(self, t, c, stacks=None):
        left_id, right_id = self.store.plan_split(t, c.cid)
        stats = self.stats
        limit = self.limits.max_tasks
        if limit is not None and stats.tasksCreated + 2 > limit:
            raise LimitExceeded("maxTasks")
        base = (t.base[0] + t.own[0], t.base[1] + t.own[1], t.base[2] + t.own[2])
        children = []
        for tid, sel in ((left_id, L), (right_id, R)):
            children.append(Task(
                tid, c.args[sel],
                fingerprint=fingerprint_extend(t.fingerprint, c.cid, sel),
                deciders={**t.deciders, c.cid: tid},
                parent=t.id,
                lineage=(tid,) + t.lineage,
                stack=stacks[sel] if stacks else [[n, list(a), o] for n, a, o in t.stack],
                base=base,
            ))
        stats.tasksCreated += 2
        if self.order is SearchOrder.DFS:
            self.queue.appendleft(children[1])
            self.queue.appendleft(children[0])
        else:
            self.queue.extend(children)
        return True


class PullTabEngine(Engine):
    """Pure pull-tabbing: no task result maps, fingerprints checked only at the root.

    Updating in place everywhere is sound here because a choice is never
    resolved inside the graph; only task roots commit to an alternative.
    """

    memo = False
    name = "pt"

    def on_choice(self, t, n, p, c):
        return self.pull_tab(t, n, p, c)

    def nf_choice(self, t, c):
        root, left, right = self.pull_path(t, c)
        sel = self.decision(t, c.cid)
        if sel is None:
            self.split(t, root, (left, right))
            return True
        t.root = root.args[sel]
        t.stack[:] = (left, right)[sel]
        self._count(SELECT)
        return False


def eval_all(program, goal, order=SearchOrder.DFS, limits=None, **kw) -> EvalResult:
    return Engine(program, order, limits, **kw).run(goal)


def eval_all_pt(program, goal, order=SearchOrder.DFS, limits=None, **kw) -> EvalResult:
    return PullTabEngine(program, order, limits, **kw).run(goal)
