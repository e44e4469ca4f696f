import random
import sys
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from spanner.core import Mapping, PlanError, Span
from spanner.enumerate import enumerate as stream
from spanner.ratree import (
    BlackBoxError,
    BlackBoxSpec,
    Difference,
    Join,
    Project,
    QueryEngine,
    RaTreeError,
    eval_query,
    load_instantiation,
    parse_ra_tree,
    placeholders,
    reference_eval,
    run_blackbox,
    tree_to_json,
    validate_plan,
)
from spanner.regex import oracle_eval, parse_regex, to_text
from spanner.va import compile_regex

import helpers
from test_acceptance import STUDENT_NR, STUDENT_SM, STUDENT_SP, STUDENTS_DOC, STUDENTS_TREE

STUB = Path(__file__).parent / "data" / "replay_stub.py"


def emitter(*lines: str) -> list[str]:
    return [sys.executable, "-c", "\n".join(f"print({line!r})" for line in lines) or "pass"]


def test_students_tree_shape():
    t = parse_ra_tree(STUDENTS_TREE)
    assert isinstance(t, Project) and isinstance(t.child, Difference)
    assert isinstance(t.child.left, Join)
    assert placeholders(t) == ["sm", "sp", "nr"]
    assert parse_ra_tree(tree_to_json(t)) == t


@pytest.mark.parametrize(
    "obj, pointer",
    [
        ({"op": "join", "left": {"leaf": "a"}}, ""),
        ({"op": "union", "left": {"leaf": "a"}, "right": {"op": "nope"}}, "/right/op"),
        ({"op": "project", "vars": "x", "child": {"leaf": "a"}}, "/vars"),
        ({"leaf": ""}, "/leaf"),
    ],
)
def test_parse_errors(obj, pointer):
    with pytest.raises(RaTreeError) as e:
        parse_ra_tree(obj)
    assert e.value.pointer == pointer


def test_duplicate_placeholder():
    with pytest.raises(RaTreeError, match="duplicate"):
        parse_ra_tree({"op": "join", "left": {"leaf": "a"}, "right": {"leaf": "a"}})


def test_instantiation_errors():
    with pytest.raises(RaTreeError) as e:
        load_instantiation({"a": {"regex": "x{a", "alphabet": "a"}})
    assert e.value.pointer == "/a/regex"
    with pytest.raises(RaTreeError):
        load_instantiation({"a": {"regex": "a", "va": {}}})
    with pytest.raises(RaTreeError) as e:
        load_instantiation({"a": {"blackbox": {"cmd": ["true"], "vars": ["x"], "degree": 2}}})
    assert e.value.pointer == "/a/blackbox"
    t = parse_ra_tree({"leaf": "b"})
    with pytest.raises(RaTreeError):
        validate_plan(t, load_instantiation({"a": {"regex": "a"}}))


def test_va_leaf_from_file(tmp_path):
    A = compile_regex(parse_regex("x{a}b", "ab"))
    (tmp_path / "leaf.json").write_text(A.dumps())
    inst = load_instantiation({"a": {"va": "leaf.json"}}, tmp_path)
    assert list(eval_query(parse_ra_tree({"leaf": "a"}), inst, "ab")) == [Mapping({"x": (1, 2)})]


def test_plan_examples():
    tree = parse_ra_tree(STUDENTS_TREE)
    inst = load_instantiation({"sm": {"regex": STUDENT_SM}, "sp": {"regex": STUDENT_SP}, "nr": {"regex": STUDENT_NR}})
    sigma = sorted(set(STUDENTS_DOC))
    r = validate_plan(tree, inst, k=1, alphabet=sigma)
    assert r.tractable
    assert [n.shared for n in r.nodes] == [1, 1]
    assert r.strategy("/child/left") == "join_disjunctive"
    assert r.variables == {"stdnt"}

    three = {"regex": "x{a} y{a} z{a}", "alphabet": "a"}
    t = parse_ra_tree({"op": "join", "left": {"leaf": "l"}, "right": {"leaf": "r"}})
    r = validate_plan(t, load_instantiation({"l": three, "r": three}), k=2)
    assert not r.tractable
    assert r.to_json()["nodes"][0] == {
        "node": "/", "op": "join", "shared": 3, "strategy": "join_disjunctive", "verdict": "intractable",
    }


def test_blackbox_declared_vars_count():
    t = parse_ra_tree({"op": "difference", "left": {"leaf": "l"}, "right": {"leaf": "b"}})
    inst = load_instantiation({
        "l": {"regex": "x{a} y{a}", "alphabet": "a"},
        "b": {"blackbox": {"cmd": emitter(), "vars": ["x", "y"], "degree": 2}},
    })
    assert [n.shared for n in validate_plan(t, inst).nodes] == [2]
    assert validate_plan(t, inst).strategy("") == "difference_adhoc"
    assert not validate_plan(t, inst, k=1).tractable


def test_refused_plan():
    t = parse_ra_tree({"op": "join", "left": {"leaf": "l"}, "right": {"leaf": "r"}})
    leaf = {"regex": "x{a} y{a}", "alphabet": "a"}
    with pytest.raises(PlanError) as e:
        list(eval_query(t, load_instantiation({"l": leaf, "r": leaf}), "aa", k=1))
    assert not e.value.report.tractable


def test_run_blackbox():
    spec = BlackBoxSpec(tuple(emitter('{"x":[1,2]}')), frozenset({"x"}), 1)
    assert run_blackbox(spec, "a") == {Mapping({"x": (1, 2)})}
    spec = BlackBoxSpec(tuple(emitter('{"x":[1,2],"y":[1,1]}')), frozenset({"x", "y"}), 1)
    with pytest.raises(BlackBoxError, match="degree"):
        run_blackbox(spec, "a", "p")
    assert run_blackbox(BlackBoxSpec(tuple(emitter()), frozenset(), 0), "a") == frozenset()


@pytest.mark.parametrize(
    "lines, message",
    [
        (['{"z":[1,1]}'], "undeclared"),
        (["not json"], "line 1"),
        (['{"x":[1,9]}'], "exceeds"),
    ],
)
def test_blackbox_violations(lines, message):
    spec = BlackBoxSpec(tuple(emitter(*lines)), frozenset({"x"}), 1)
    with pytest.raises(BlackBoxError, match=message) as e:
        run_blackbox(spec, "a", "leaf7")
    assert e.value.placeholder == "leaf7"


def test_blackbox_exit_code():
    spec = BlackBoxSpec((sys.executable, "-c", "raise SystemExit(3)"), frozenset(), 0)
    with pytest.raises(BlackBoxError, match="exit code 3"):
        run_blackbox(spec, "a")


def test_single_leaf_equals_enumeration():
    inst = load_instantiation({"a": {"regex": "x{a*} b y{.*}", "alphabet": "ab"}})
    d = "aabab"
    got = list(eval_query(parse_ra_tree({"leaf": "a"}), inst, d))
    assert got == list(stream(compile_regex(parse_regex("x{a*} b y{.*}", "ab")), d))


def test_difference_with_empty_right():
    t = parse_ra_tree({"op": "difference", "left": {"leaf": "l"}, "right": {"leaf": "r"}})
    inst = load_instantiation({"l": {"regex": "x{.*}", "alphabet": "ab"}, "r": {"regex": r"\0", "alphabet": "ab"}})
    assert set(eval_query(t, inst, "ab")) == oracle_eval(parse_regex("x{.*}", "ab"), "ab")


def test_students_query():
    tree = parse_ra_tree(STUDENTS_TREE)
    inst = load_instantiation({"sm": {"regex": STUDENT_SM}, "sp": {"regex": STUDENT_SP}, "nr": {"regex": STUDENT_NR}})
    engine = QueryEngine(tree, inst)
    assert list(engine.evaluate(STUDENTS_DOC)) == [Mapping({"stdnt": Span(12, 14)})]
    # second document reuses the cached join
    assert list(engine.evaluate("aa@b#b;")) == [Mapping({"stdnt": Span(1, 3)})]


def test_replay_stub_is_interchangeable():
    t = parse_ra_tree({"op": "difference", "left": {"leaf": "l"}, "right": {"leaf": "r"}})
    left = {"regex": "x{.*} y{b}", "alphabet": "ab"}
    regex_right = {"regex": "a* x{a} .*", "alphabet": "ab"}
    bb_right = {"blackbox": {"cmd": [sys.executable, str(STUB), "a* x{a} .*"], "vars": ["x"], "degree": 1}}
    for d in ("ab", "aab", "bab"):
        a = list(eval_query(t, load_instantiation({"l": left, "r": regex_right}), d))
        b = list(eval_query(t, load_instantiation({"l": left, "r": bb_right}), d))
        assert a == b


def random_tree(rng: random.Random, names):
    if len(names) == 1:
        t = {"leaf": names[0]}
    else:
        cut = rng.randint(1, len(names) - 1)
        op = rng.choice(["union", "join", "difference"])
        t = {"op": op, "left": random_tree(rng, names[:cut]), "right": random_tree(rng, names[cut:])}
    if rng.random() < 0.25:
        t = {"op": "project", "vars": sorted(rng.sample("xy", rng.randint(0, 2))), "child": t}
    return t


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_random_queries_match_reference(seed):
    rng = random.Random(seed)
    names = [f"p{i}" for i in range(rng.randint(1, 3))]
    tree = parse_ra_tree(random_tree(rng, names))
    leaves = {p: helpers.random_sequential(rng, rng.sample("xy", rng.randint(0, 2)), budget=7) for p in names}
    inst = load_instantiation({p: {"regex": to_text(a), "alphabet": "ab"} for p, a in leaves.items()})
    for d in helpers.docs_upto(3):
        want = reference_eval(tree, {p: oracle_eval(a, d) for p, a in leaves.items()})
        got = list(eval_query(tree, inst, d))
        assert len(got) == len(set(got))
        assert set(got) == want


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.integers(0, 3))
def test_planner_monotone(seed, k):
    rng = random.Random(seed)
    names = ["p0", "p1", "p2"]
    tree = parse_ra_tree(random_tree(rng, names))
    inst = load_instantiation(
        {p: {"regex": to_text(helpers.random_sequential(rng, "xyz", budget=9)), "alphabet": "ab"} for p in names}
    )
    if validate_plan(tree, inst, k).tractable:
        assert validate_plan(tree, inst, k + 1).tractable
