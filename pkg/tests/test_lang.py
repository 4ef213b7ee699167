import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from flc.corpus import CORPUS_NAMES, load_corpus, prelude
from flc.lang import (Case, CtorApp, FunApp, IntLit, Let, Or, ParseError,
                      Program, Var, parse_program, print_program, validate)
from strategies import programs


def test_parse_coin():
    p = parse_program("(fun coin 0 (or (int 0) (int 1)))")
    assert len(p.funs) == 1
    f = p.funs[0]
    assert (f.name, f.arity) == ("coin", 0)
    assert f.body == Or(IntLit(0), IntLit(1))


def test_parse_empty():
    assert parse_program("") == Program((), (), ())
    assert parse_program("  ; only a comment\n") == Program((), (), ())


def test_unbound_variable_rejected():
    diags = validate(parse_program("(fun f 1 (var 2))"))
    assert len(diags) == 1
    assert "unbound variable index 2" in str(diags[0])


def test_parse_error_has_position():
    with pytest.raises(ParseError) as e:
        parse_program("(fun f 0\n  (int x))")
    assert e.value.line == 2
    assert e.value.col > 0


@pytest.mark.parametrize("text", ["(", ")", "(fun)", "(fun f -1 (int 0))",
                                  "(data)", "(goal g)", "(case)", "(bogus)",
                                  "(fun f 0 (let (1) (int 0)))", "x"])
def test_malformed_inputs(text):
    with pytest.raises(ParseError):
        parse_program(text)


def test_prelude_validates():
    assert validate(prelude()) == []


@pytest.mark.parametrize("name", CORPUS_NAMES)
def test_corpus_validates(name):
    assert validate(load_corpus(name)) == []


def test_duplicate_function():
    p = parse_program("(fun f 0 (int 1)) (fun f 0 (int 2))")
    diags = validate(p)
    assert len(diags) == 1 and "f" in str(diags[0])


def test_ctor_arity_mismatch():
    p = parse_program("(data B (T 0)) (fun f 0 (ctor T (int 1)))")
    diags = validate(p)
    assert len(diags) == 1 and "arity mismatch" in str(diags[0])


def test_mixed_case_types_and_duplicate_heads():
    src = ("(data A (X 0)) (data B (Y 0))"
           "(fun f 1 (case (var 0) (branch (X) (int 0)) (branch (Y) (int 1))))"
           "(fun g 1 (case (var 0) (branch (X) (int 0)) (branch (X) (int 1))))")
    assert len(validate(parse_program(src))) == 2


def test_direct_variable_cycle():
    p = parse_program("(goal g (let ((0 (var 1)) (1 (var 0))) (var 0)))")
    diags = validate(p)
    assert len(diags) == 1 and "cycle" in str(diags[0])
    # recursion through a function application is fine
    ok = parse_program("(data L (N 0) (C 2)) (goal g (let ((0 (ctor C (int 1) (var 0)))) (var 0)))")
    assert validate(ok) == []


def test_case_structure():
    p = parse_program("(fun f 1 (case (var 0) (intbranch 0 (int 1)) (default (int 2))))")
    body = p.funs[0].body
    assert isinstance(body, Case)
    assert body.int_branches == ((0, IntLit(1)),)
    assert body.default == IntLit(2)


def test_load_corpus_shapes():
    xs = load_corpus("xorSelf").goal("main")
    assert isinstance(xs, Let)
    (idx, bound), = xs.bindings
    assert bound == Or(CtorApp("True", ()), CtorApp("False", ()))
    assert xs.body == FunApp("xor", (Var(idx), Var(idx)))
    a = load_corpus("appendixA").goal("main")
    assert [b for _, b in a.bindings][0] == Or(CtorApp("False", ()), CtorApp("True", ()))


def test_unknown_corpus_entry():
    from flc.corpus import UnknownCorpusEntry
    with pytest.raises(UnknownCorpusEntry):
        load_corpus("nope")


@settings(max_examples=150, deadline=None, suppress_health_check=list(HealthCheck))
@given(programs())
def test_round_trip(p):
    assert parse_program(print_program(p)) == p


@pytest.mark.parametrize("name", CORPUS_NAMES)
def test_round_trip_corpus(name):
    p = load_corpus(name)
    assert parse_program(print_program(p)) == p


_tokens = st.sampled_from(["(", ")", " ", "fun", "data", "goal", "case", "var",
                           "int", "app", "ctor", "or", "let", "free", "branch",
                           "0", "1", "-3", "x", ";", "\n", "prim", "add"])


@settings(max_examples=300, deadline=None)
@given(st.one_of(st.binary(max_size=60),
                 st.lists(_tokens, max_size=40).map(" ".join)))
def test_never_panics(data):
    try:
        p = parse_program(data)
    except ParseError:
        return
    assert isinstance(validate(p), list)


def test_deep_nesting_is_a_parse_error_not_a_crash():
    text = "(goal g " + "(or (int 0) " * 5000 + "(int 1)" + ")" * 5001
    try:
        p = parse_program(text)
    except ParseError:
        return
    assert isinstance(validate(p), list)
