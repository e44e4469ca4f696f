import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from spanner.core import ContractViolation, Mapping
from spanner.regex import oracle_eval, parse_regex, synchronized_for
from spanner.va import (
    Builder,
    VsetAutomaton,
    check_functional,
    check_sequential,
    compile_regex,
    extended_configs,
    is_empty_language,
    is_semi_functional,
    mappings_to_va,
    op_close,
    op_open,
    oracle_eval_va,
    project,
    sym,
    to_semi_functional,
    trim,
    va_synchronized_for,
)

import helpers

SAMPLE = "(.* x{.*} .*)|(. .*)"


def by_tag(A, tag):
    return next(q for q in A.states if A.tag(q) == tag)


def test_thompson_chain():
    A = trim(compile_regex(parse_regex("x{a}")))
    assert A.num_states == 4
    labels = [lab for _, lab, _ in A.transitions]
    assert set(labels) == {op_open("x"), sym("a"), op_close("x")}
    assert oracle_eval_va(A, "a") == {Mapping({"x": (1, 2)})}


def test_compiled_matches_drawn_automaton():
    A = compile_regex(parse_regex(SAMPLE, "ab"))
    B = helpers.sample_va()
    for d in helpers.docs_upto(4):
        assert oracle_eval_va(A, d) == oracle_eval_va(B, d)


def test_empty_set_compiles_to_empty_language():
    A = compile_regex(parse_regex(r"\0", "a"))
    assert is_empty_language(A)
    assert oracle_eval_va(A, "a") == frozenset()


def test_sample_classes():
    A = helpers.sample_va()
    assert check_sequential(A) and not check_functional(A)
    assert check_functional(helpers.sample_va_functional())
    assert len(oracle_eval_va(A, "a")) == 4


def test_lone_open_loop_is_vacuously_sequential():
    b = Builder()
    q = b.state()
    b.add(q, op_open("x"), q)
    A = b.build(q, [])
    assert check_sequential(A)
    assert trim(A).num_states == 1


def test_extended_configs_sample():
    A = helpers.sample_va()
    t = extended_configs(A, {"x"})
    assert t.label(by_tag(t.automaton, "q2"), "x") == "d"
    assert t.label(by_tag(t.automaton, "q1"), "x") == "o"
    assert t.label(t.automaton.initial, "x") == "u"


def test_semi_functional_split():
    A = helpers.sample_va()
    assert not is_semi_functional(A, {"x"})
    assert is_semi_functional(A, set())
    S = to_semi_functional(A, {"x"})
    assert is_semi_functional(S, {"x"})
    tags = {S.tag(q) for q in S.states}
    assert {"q2^u", "q2^c"} <= tags
    t = extended_configs(S, {"x"})
    assert t.label(by_tag(S, "q2^u"), "x") == "u"
    assert t.label(by_tag(S, "q2^c"), "x") == "c"
    assert S.num_states == 4
    for d in helpers.docs_upto(4):
        assert oracle_eval_va(S, d) == oracle_eval_va(A, d)


def test_semi_functional_fixpoint():
    A = trim(helpers.sample_va_functional())
    assert to_semi_functional(A, {"x"}).num_states == A.num_states
    assert to_semi_functional(A, set()).num_states == A.num_states


def test_project_examples():
    A = compile_regex(parse_regex("x{a}y{b}"))
    assert oracle_eval_va(project(A, {"x"}), "ab") == {Mapping({"x": (1, 2)})}
    assert oracle_eval_va(project(A, set()), "ab") == {Mapping()}
    assert oracle_eval_va(project(A, set()), "ba") == frozenset()


def test_trim_drops_unreachable():
    b = Builder()
    q0, q1, dead = b.state(), b.state(), b.state()
    b.add(q0, sym("a"), q1)
    b.add(dead, sym("a"), q1)
    A = b.build(q0, [q1])
    T = trim(A)
    assert T.num_states == 2
    assert oracle_eval_va(T, "a") == oracle_eval_va(A, "a")
    assert trim(T) is T


def test_synchronized_va():
    A = helpers.optional_x_va()
    assert va_synchronized_for(A, {"y"})
    assert not va_synchronized_for(A, {"x"})
    alpha = parse_regex(r"(a|b)* y{.*} x{a}", "ab")
    assert synchronized_for(alpha, {"x", "y"})
    assert va_synchronized_for(compile_regex(alpha), {"x", "y"})
    assert va_synchronized_for(compile_regex(parse_regex("a*")), set())


def test_mappings_to_va():
    M = {Mapping({"x": (1, 2)})}
    A = mappings_to_va(M, "a", {"x"})
    assert trim(A).num_states == 5
    assert oracle_eval_va(A, "a") == M
    assert is_empty_language(mappings_to_va(set(), "ab", {"x"}))
    M = {Mapping(), Mapping({"x": (2, 2)})}
    assert oracle_eval_va(mappings_to_va(M, "ab", {"x"}), "ab") == M
    with pytest.raises(ContractViolation):
        mappings_to_va({Mapping({"y": (1, 1)})}, "a", {"x"})


def test_oracle_va_trivia():
    A = compile_regex(parse_regex("(a|b)*"))
    assert oracle_eval_va(A, "ab") == {Mapping()}
    assert oracle_eval_va(VsetAutomaton((0,), 0, frozenset(), ()), "") == frozenset()


def test_json_round_trip():
    A = compile_regex(parse_regex("x{a} b*"))
    B = VsetAutomaton.loads(A.dumps())
    assert B.to_json() == A.to_json()
    bad = A.to_json()
    bad["transitions"][0]["label"] = {"type": "bogus"}
    with pytest.raises(ContractViolation):
        VsetAutomaton.from_json(bad)
    with pytest.raises(ContractViolation):
        VsetAutomaton.from_json(json.loads('{"states": [0]}'))


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**6))
def test_compile_round_trip(seed):
    alpha = helpers.random_sequential(random.Random(seed), "xy")
    A = compile_regex(alpha)
    for d in helpers.docs_upto(3):
        assert oracle_eval_va(A, d) == oracle_eval(alpha, d)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.sets(st.sampled_from("xyz")))
def test_semi_functional_bound(seed, X):
    alpha = helpers.random_sequential(random.Random(seed), "xyz")
    A = trim(compile_regex(alpha))
    S = to_semi_functional(A, X)
    assert is_semi_functional(S, X)
    assert S.num_states <= 2 ** len(X) * A.num_states
    for d in helpers.docs_upto(2):
        assert oracle_eval_va(S, d) == oracle_eval_va(A, d)


def test_mirrored_epsilon_binding_is_not_synchronized():
    gamma = parse_regex(r"(a x{\e} a)|(b x{\e} b)", "ab")
    assert oracle_eval(gamma, "aa") == oracle_eval(gamma, "bb") == {Mapping({"x": (2, 2)})}
    assert oracle_eval(gamma, "ab") == frozenset()
    assert not synchronized_for(gamma, {"x"})
    assert not va_synchronized_for(compile_regex(gamma), {"x"})
