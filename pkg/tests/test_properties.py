"""Randomized invariant checks over small generated programs."""

from collections import Counter

from hypothesis import HealthCheck, given, settings

from flc.lang import validate
from instrumented import checked_engine
from oracle import oracle_values
from strategies import programs

SETTINGS = settings(max_examples=120, deadline=None,
                    suppress_health_check=list(HealthCheck))


@SETTINGS
@given(programs())
def test_generated_programs_validate(p):
    assert validate(p) == []


@SETTINGS
@given(programs())
def test_engines_agree_with_oracle(p):
    expected = Counter(oracle_values(p, "main"))
    for engine, order in [("mpt", "dfs"), ("mpt", "bfs"), ("pt", "dfs"), ("bt", "dfs")]:
        r = checked_engine(engine, p, order).run("main")
        assert not r.diagnostics
        assert Counter(r.values) == expected, (engine, order)


@SETTINGS
@given(programs())
def test_dfs_bfs_same_steps(p):
    a = checked_engine("mpt", p, "dfs").run("main")
    b = checked_engine("mpt", p, "bfs").run("main")
    assert Counter(a.values) == Counter(b.values)
    assert a.stats.steps() == b.stats.steps()


@SETTINGS
@given(programs())
def test_preemption_does_not_change_results(p):
    a = checked_engine("mpt", p, "bfs").run("main")
    b = checked_engine("mpt", p, "bfs", quantum=2).run("main")
    assert Counter(a.values) == Counter(b.values)
    assert a.stats.steps() == b.stats.steps()


@SETTINGS
@given(programs())
def test_shared_decisions_variant_is_sound(p):
    expected = Counter(oracle_values(p, "main"))
    for order in ("dfs", "bfs"):
        r = checked_engine("mpt", p, order, share_decisions=True).run("main")
        assert Counter(r.values) == expected


@SETTINGS
@given(programs())
def test_pt_never_memoizes_and_bt_never_splits(p):
    pt = checked_engine("pt", p).run("main")
    bt = checked_engine("bt", p).run("main")
    assert pt.stats.trEntries == 0 and pt.stats.memoHits == 0
    assert bt.stats.tasksCreated == 0 and bt.stats.trEntries == 0
