from collections import Counter

import pytest

from flc import (BacktrackEngine, CORPUS_NAMES, Limits, eval_all, eval_all_bt,
                 load_corpus)
from flc.graph import CTOR, FREE, FUN, INT
from helpers import prog, run


def test_coin():
    r = run("(goal main (app coin))", "bt")
    assert r.values == ["0", "1"]
    assert r.stats.tasksCreated == 0 and r.stats.trEntries == 0
    assert r.stats.choicePoints == 1


def test_appendix_a():
    r = eval_all_bt(load_corpus("appendixA"), "main")
    assert Counter(r.values) == Counter({"False": 3, "True": 1})


def test_sort_shared_redoes_expensive():
    p = load_corpus("sortShared")
    bt, mpt = eval_all_bt(p, "main"), eval_all(p, "main")
    assert bt.values == mpt.values
    assert mpt.stats.perFun["expensive"] == 1
    assert bt.stats.perFun["expensive"] >= 2 * mpt.stats.perFun["expensive"]


@pytest.mark.parametrize("name", [n for n in CORPUS_NAMES if n != "loopOr"])
def test_value_order_matches_mpt_dfs(name):
    p = load_corpus(name)
    for goal, _ in p.goals:
        assert eval_all_bt(p, goal).values == eval_all(p, goal).values


def test_free_binds_true_first():
    r = run("(goal main (free (0) (case (var 0) (branch (False) (int 0)) (branch (True) (int 1)))))",
            "bt")
    assert r.values == ["1", "0"]


def test_loop_or_exhausts():
    r = run(load_corpus("loopOr"), "bt", limits=Limits(max_steps=10000))
    assert r.values == [] and r.exhausted == "maxSteps"


def test_bfs_rejected():
    from flc import make_engine
    with pytest.raises(ValueError):
        make_engine("bt", load_corpus("coin"), "bfs")


# -- trail mechanics ------------------------------------------------------------


@pytest.fixture
def eng():
    e = BacktrackEngine(prog("(goal main (app coin))"))
    e.cur = type("T", (), {"own": [0, 0, 0]})()
    return e


def _choice(eng):
    a, b = eng.store.alloc(INT, ival=0), eng.store.alloc(INT, ival=1)
    return eng.store.alloc_choice(a, b, owner=1)


def test_no_trail_before_choice_point(eng):
    n = eng.store.alloc(FUN, "f")
    eng.update(n, INT, ival=3)
    assert eng.trail == [] and eng.stats.trailEntries == 0


def test_unwind_restores(eng):
    n = eng.store.alloc(FUN, "f", args=[eng.store.alloc(INT)])
    before = n.payload()
    t = type("T", (), {"root": n, "stack": []})()
    eng.push_choice_point(t, _choice(eng))
    mark = eng.cps[-1].trail_mark
    eng.update(n, INT, ival=3)
    eng.update(n, CTOR, "True")  # second update after the same mark: not trailed again
    assert eng.stats.trailEntries == 1
    eng.unwind(mark)
    assert n.payload() == before


def test_two_marks_restore_in_reverse(eng):
    n = eng.store.alloc(FUN, "f")
    t = type("T", (), {"root": n, "stack": []})()
    eng.push_choice_point(t, _choice(eng))
    m1 = eng.cps[-1].trail_mark
    eng.update(n, INT, ival=1)
    eng.push_choice_point(t, _choice(eng))
    m2 = eng.cps[-1].trail_mark
    eng.update(n, INT, ival=2)
    eng.unwind(m2)
    assert (n.tag, n.ival) == (INT, 1)
    eng.unwind(m1)
    assert n.tag is FUN


def test_nodes_newer_than_choice_point_not_trailed(eng):
    t = type("T", (), {"root": None, "stack": []})()
    eng.push_choice_point(t, _choice(eng))
    n = eng.store.alloc(FUN, "f")
    eng.update(n, INT, ival=1)
    assert eng.stats.trailEntries == 0


def test_free_binding_restored_after_unwind():
    seen = []

    class Spy(BacktrackEngine):
        def narrow(self, t, f, type_name):
            seen.append((f, f.tag))
            return super().narrow(t, f, type_name)

    eng = Spy(prog("(goal main (free (0) (case (var 0) (branch (True) (int 1)) (branch (False) (int 2)))))"))
    assert eng.run("main").values == ["1", "2"]
    # the same node is narrowed again after unwinding, and is FREE again by then
    assert len(seen) == 2 and seen[0][0] is seen[1][0]
    assert [tag for _, tag in seen] == [FREE, FREE]


def test_full_unwind_restores_graph():
    eng = BacktrackEngine(load_corpus("appendixA"))
    eng.run("main")
    assert eng.cps == [] and eng.decisions == {}


# a choice point pushed while a let-bound result is still being evaluated;
# resuming must reach the same choice or free variable, not a rebuilt one
NESTED = [
    ("(goal main (free (0) (case (var 0) (branch (False) (let ((1 (free (2) "
     "(case (var 2) (branch (False) (ctor False)))))) (var 1))))))", ["False"]),
    ("(goal main (case (or (ctor False) (ctor True)) (branch (True) (ctor True)) "
     "(branch (False) (let ((1 (case (or (ctor True) (ctor False)) "
     "(branch (True) (ctor False)) (branch (False) (ctor True))))) (var 1)))))",
     ["False", "True", "True"]),
]


@pytest.mark.parametrize("src,want", NESTED)
def test_choice_point_under_pending_result(src, want):
    r = run(src, "bt", limits=Limits(max_steps=10_000))
    assert r.exhausted is None
    assert r.values == want
