from flc import make_engine
from flc.corpus import with_prelude
from flc.lang import parse_program


def prog(src: str):
    return with_prelude(parse_program(src))


def run(src_or_prog, engine="mpt", order="dfs", goal="main", **kw):
    p = prog(src_or_prog) if isinstance(src_or_prog, str) else src_or_prog
    return make_engine(engine, p, order, **kw).run(goal)


ALL = [("mpt", "dfs"), ("mpt", "bfs"), ("pt", "dfs"), ("pt", "bfs"), ("bt", "dfs")]
