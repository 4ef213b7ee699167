"""Depth-first backtracking with a trail, the Prolog-style baseline.

One implicit task evaluates the goal.  A demanded choice is committed to its
left alternative and a choice point remembers the right one; every
destructive update of a node older than the newest choice point is trailed
so unwinding restores it.  Decisions live in a trailed choice-id map, which
keeps shared occurrences of one choice consistent (call-time choice).
"""

from __future__ import annotations

from dataclasses import dataclass

from .engine import _IND, Engine, LimitExceeded, SearchOrder, StuckNode
from .graph import CHOICE, FUN, L, R


@dataclass
class TrailEntry:
    target: object  # Node, or None for a decision entry
    saved: tuple  # former payload + stamp, or (cid,)


@dataclass
class ChoicePoint:
    cid: int
    trail_mark: int
    pending: int
    root: object
    stack: list
    serial: int


def _snapshot(stack):
    return [[n, list(acc), o] for n, acc, o in stack]


class BacktrackEngine(Engine):
    memo = False
    name = "bt"

    def __init__(self, program, limits=None, debug=False):
        super().__init__(program, SearchOrder.DFS, limits, debug=debug)
        self.trail: list = []
        self.cps: list = []
        self.decisions: dict = {}
        self._serial = 0
        self._generators: dict = {}  # FREE node -> its narrowing generator

    def decision(self, t, cid):
        return self.decisions.get(cid)

    # -- trailing -----------------------------------------------------------

    def update(self, target, tag, sym=None, ival=0, cid=0, args=(),
               free_type=None):
        self.trail_update(target)
        super().update(target, tag, sym, ival, cid, args, free_type)

    def trail_update(self, target):
        """Save ``target`` before it is overwritten, unless it is newer than
        the newest choice point (then unwinding makes it unreachable anyway)."""
        if not self.cps:
            return
        serial = self.cps[-1].serial
        if target.stamp >= serial:
            return
        self.trail.append(TrailEntry(target, (target.payload(), target.stamp)))
        target.stamp = serial
        self.stats.trailEntries += 1

    def _decide(self, cid, sel):
        self.trail.append(TrailEntry(None, (cid,)))
        self.decisions[cid] = sel

    def unwind(self, mark):
        trail = self.trail
        while len(trail) > mark:
            e = trail.pop()
            if e.target is None:
                del self.decisions[e.saved[0]]
            else:
                (tag, sym, ival, cid, args, free_type), stamp = e.saved
                n = e.target
                n.tag, n.sym, n.ival, n.cid, n.args = tag, sym, ival, cid, args
                n.free_type, n.stamp = free_type, stamp

    # -- choices ------------------------------------------------------------

    def push_choice_point(self, t, c):
        self._serial += 1
        self.cps.append(ChoicePoint(c.cid, len(self.trail), R, t.root,
                                    _snapshot(t.stack), self._serial))
        self.store.stamp = self._serial
        self.stats.choicePoints += 1
        self._decide(c.cid, L)

    def on_choice(self, t, n, p, c):
        sel = self.decisions.get(c.cid)
        if sel is None:
            self.push_choice_point(t, c)
            sel = L
        return self.select_choice(t, n, p, c, sel)

    def nf_choice(self, t, c):
        sel = self.decisions.get(c.cid)
        if sel is None:
            self.push_choice_point(t, c)
            sel = L
        t.stack[-1][2] = c.args[sel]
        self._count(2)
        return False

    def pin(self, n, target):
        # A choice point may be pushed while ``target`` is evaluated.  Resuming
        # from it re-applies whatever rule is still on ``n``, which would
        # rebuild ``target`` with fresh choices and free variables; an
        # indirection makes the resumed computation reach the same node.
        if target.tag is FUN:
            self.update(n, FUN, _IND, args=(target,))

    def narrow(self, t, f, type_name):
        """Bind ``f`` in place (trailed) to the constructor the decisions pick.

        The generator is built once per free node, so re-narrowing after an
        unwind meets the same choice ids and takes the pending alternative.
        """
        gen = self._generators.get(f)
        if gen is None:
            gen = self._generators[f] = self._generator(type_name, f.owner)
        node = gen
        while node.tag is CHOICE:
            sel = self.decisions.get(node.cid)
            if sel is None:
                self.push_choice_point(t, node)
                sel = L
            self._count(2)
            node = node.args[sel]
        self.update(f, node.tag, node.sym, args=node.args)
        return f

    def split(self, t, c, stacks=None):
        # only reached for an undecided choice at the root
        self.push_choice_point(t, c)
        t.root = c.args[L]
        self._count(2)
        return False

    def backtrack(self, t) -> bool:
        if not self.cps:
            return False
        cp = self.cps.pop()
        self.unwind(cp.trail_mark)
        t.root = cp.root
        t.stack[:] = cp.stack
        self._decide(cp.cid, cp.pending)
        return True

    # -- driver -------------------------------------------------------------

    def _drive(self):
        t = self.queue.popleft()
        self.cur = t
        while True:
            try:
                self.normalize(t)
            except (StuckNode, RecursionError) as e:
                self.diagnostics.append(f"{type(e).__name__}: {e}")
            if not self.backtrack(t):
                self.unwind(0)
                return


def eval_all_bt(program, goal, limits=None, **kw):
    return BacktrackEngine(program, limits, **kw).run(goal)


__all__ = ["BacktrackEngine", "eval_all_bt", "LimitExceeded", "TrailEntry",
           "ChoicePoint"]
