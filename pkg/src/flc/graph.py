"""Mutable expression graph shared by all evaluation engines."""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field, fields
from typing import Callable, Optional


class Tag(enum.IntEnum):
    FUN = 0
    CTOR = 1
    INT = 2
    CHOICE = 3
    FREE = 4
    FAIL = 5


FUN, CTOR, INT, CHOICE, FREE, FAIL = Tag
FINAL_TAGS = (CTOR, INT, FAIL)

L, R = 0, 1  # branch selections, also the CHOICE argument positions


class DuplicateTrKey(RuntimeError):
    pass


class ConflictingSelection(RuntimeError):
    pass


class OwnerOrderViolation(RuntimeError):
    pass


class NotNormalForm(ValueError):
    pass


class Node:
    """A graph cell.

    ``sym`` is a Function for FUN nodes and a constructor name for CTOR
    nodes.  ``tr`` is the task result map (task id -> node), allocated lazily.
    ``stamp`` is only used by the backtracking engine's conditional trailing.
    """

    __slots__ = ("tag", "sym", "ival", "cid", "args", "owner", "tr",
                 "free_type", "stamp")

    def __init__(self, tag, sym=None, ival=0, cid=0, args=(), owner=1,
                 free_type=None):
        self.tag = tag
        self.sym = sym
        self.ival = ival
        self.cid = cid
        self.args = list(args)
        self.owner = owner
        self.tr = None
        self.free_type = free_type
        self.stamp = 0

    def payload(self):
        return (self.tag, self.sym, self.ival, self.cid, list(self.args),
                self.free_type)

    def __repr__(self):
        if self.tag is INT:
            body = str(self.ival)
        elif self.tag is CHOICE:
            body = f"?{self.cid}"
        elif self.tag in (FUN, CTOR):
            body = getattr(self.sym, "name", self.sym)
        else:
            body = self.tag.name
        return f"<{body} ot={self.owner} #{id(self) & 0xffff:x}>"


@dataclass
class Stats:
    rewriteSteps: int = 0
    pullTabSteps: int = 0
    selectionSteps: int = 0
    memoHits: int = 0
    memoMisses: int = 0
    inPlaceUpdates: int = 0
    trEntries: int = 0
    tasksCreated: int = 0
    nodesAllocated: int = 0
    trailEntries: int = 0
    choicePoints: int = 0
    valuesEmitted: int = 0
    perFun: dict = field(default_factory=dict)

    def steps(self) -> int:
        return self.rewriteSteps + self.pullTabSteps + self.selectionSteps

    def as_dict(self) -> dict:
        out = {f.name: getattr(self, f.name) for f in fields(self)}
        out["perFun"] = dict(sorted(self.perFun.items()))
        return out


# ----------------------------------------------------------------------------
# Fingerprints are plain dicts: choice id -> L/R.  Never mutated after a task
# owns one.


def fingerprint_decide(fp: dict, cid: int) -> Optional[int]:
    return fp.get(cid)


def fingerprint_extend(fp: dict, cid: int, sel: int) -> dict:
    if cid in fp:
        raise ConflictingSelection(f"choice {cid} already selected {fp[cid]}")
    out = dict(fp)
    out[cid] = sel
    return out


@dataclass(eq=False)
class Task:
    id: int
    root: Node
    fingerprint: dict = field(default_factory=dict)
    deciders: dict = field(default_factory=dict)  # cid -> task that decided it
    parent: Optional[int] = None
    lineage: tuple = ()  # own id first, then ancestors, decreasing
    ancestry: frozenset = frozenset()
    planned: dict = field(default_factory=dict)  # cid -> (left id, right id)
    stack: list = field(default_factory=list)  # normalization state
    base: tuple = (0, 0, 0)  # rewrite/pull-tab/selection steps of ancestors
    own: list = field(default_factory=lambda: [0, 0, 0])

    def __post_init__(self):
        if not self.lineage:
            self.lineage = (self.id,)
        self.ancestry = frozenset(self.lineage)


class Store:
    """Allocation and update primitives plus the global id counters."""

    def __init__(self, stats: Optional[Stats] = None, debug: bool = False):
        self.stats = stats if stats is not None else Stats()
        self.debug = debug
        self._cids = itertools.count(1)
        self._tids = itertools.count(2)  # task 1 is the main task
        self.stamp = 0  # stamped on new nodes; see backtrack trailing

    def alloc(self, tag, sym=None, ival=0, cid=0, args=(), owner=1,
              free_type=None) -> Node:
        self.stats.nodesAllocated += 1
        node = Node(tag, sym, ival, cid, args, owner, free_type)
        node.stamp = self.stamp
        return node

    def alloc_choice(self, left: Node, right: Node, owner: int,
                     cid: Optional[int] = None) -> Node:
        if cid is None:
            cid = next(self._cids)
        return self.alloc(CHOICE, cid=cid, args=(left, right), owner=owner)

    def fresh_task_id(self) -> int:
        return next(self._tids)

    def update_in_place(self, target: Node, tag, sym=None, ival=0, cid=0,
                        args=(), free_type=None):
        self.stats.inPlaceUpdates += 1
        target.tag = tag
        target.sym = sym
        target.ival = ival
        target.cid = cid
        target.args = list(args)
        target.free_type = free_type
        if tag in FINAL_TAGS:
            target.tr = None

    def copy_into(self, target: Node, source: Node):
        self.update_in_place(target, source.tag, source.sym, source.ival,
                             source.cid, source.args, source.free_type)

    def tr_set(self, n: Node, key: int, result: Node):
        if n.tr is None:
            n.tr = {}
        old = n.tr.get(key)
        if old is not None and old is not result:
            raise DuplicateTrKey(f"task {key} already has a result for {n!r}")
        if self.debug and key <= n.owner:
            raise OwnerOrderViolation(
                f"tr key {key} not younger than owner {n.owner} of {n!r}")
        n.tr[key] = result
        self.stats.trEntries += 1

    def tr_lookup(self, n: Node, task: Task) -> Optional[Node]:
        """Result memoized for ``task`` or its nearest ancestor, if any."""
        tr = n.tr
        if not tr:
            self.stats.memoMisses += 1
            return None
        hit = tr.get(task.id)
        if hit is None:
            if len(tr) < len(task.lineage):
                best = -1
                for k in tr:
                    if k > best and k in task.ancestry:
                        best = k
                if best >= 0:
                    hit = tr[best]
            else:
                for k in task.lineage:
                    if k in tr:
                        hit = tr[k]
                        break
        if hit is None:
            self.stats.memoMisses += 1
        else:
            self.stats.memoHits += 1
        return hit

    def plan_split(self, task: Task, cid: int) -> tuple:
        pair = task.planned.get(cid)
        if pair is None:
            pair = (self.fresh_task_id(), self.fresh_task_id())
            task.planned[cid] = pair
        return pair


def tr_lookup_with_ancestry(n: Node, task_id: int,
                            parent_of: Callable[[int], Optional[int]],
                            stats: Optional[Stats] = None) -> Optional[Node]:
    """Follow the ancestor chain of ``task_id`` to the first memoized result."""
    k = task_id
    while k is not None:
        if n.tr and k in n.tr:
            if stats:
                stats.memoHits += 1
            return n.tr[k]
        k = parent_of(k)
    if stats:
        stats.memoMisses += 1
    return None


def print_value(node: Node, resolve: Optional[Callable[[Node], Node]] = None) -> str:
    """Canonical text of a normal-form term: ``(Name a1 .. ak)``, ints in decimal."""
    out = []
    todo = [node]
    while todo:
        item = todo.pop()
        if isinstance(item, str):
            out.append(item)
            continue
        n = resolve(item) if resolve else item
        if n.tag is INT:
            out.append(str(n.ival))
        elif n.tag is CTOR:
            if not n.args:
                out.append(n.sym)
            else:
                out.append("(" + n.sym)
                todo.append(")")
                for a in reversed(n.args):
                    todo.append(a)
                    todo.append(" ")
        else:
            raise NotNormalForm(f"{n.tag.name} node in value")
    return "".join(out)
