import pytest
from hypothesis import given, strategies as st

from spanner.core import (
    EMPTY_MAPPING,
    ContractViolation,
    Mapping,
    Span,
    SpanRangeError,
    all_spans,
    join_sets,
    mapping_union,
    mappings_compatible,
    minus_sets,
    project_set,
    restrict,
    span_substring,
)

DOC = "Rodion Raskolnikov rr@example.org\n"


def test_span_substring():
    assert span_substring(DOC, Span(1, 7)) == "Rodion"
    assert span_substring("abc", Span(2, 2)) == ""
    assert span_substring("abc", Span(1, 4)) == "abc"


@pytest.mark.parametrize("s", [(0, 1), (3, 2), (1, 5)])
def test_span_out_of_range(s):
    with pytest.raises(SpanRangeError):
        span_substring("abc", Span(*s))


def test_all_spans_count():
    # (n+1)(n+2)/2 spans including the n+1 empty ones
    for n in range(6):
        assert len(all_spans("a" * n)) == (n + 1) * (n + 2) // 2
    assert all_spans("") == [Span(1, 1)]


def test_compatible_examples():
    x12 = Mapping({"x": (1, 2)})
    assert mappings_compatible(x12, EMPTY_MAPPING)
    assert mappings_compatible(x12, Mapping({"x": (1, 2), "y": (2, 2)}))
    assert not mappings_compatible(Mapping({"x": (1, 1)}), Mapping({"x": (2, 2)}))


def test_union_examples():
    x12 = Mapping({"x": (1, 2)})
    assert mapping_union(x12, Mapping({"y": (2, 3)})) == Mapping({"x": (1, 2), "y": (2, 3)})
    assert mapping_union(x12, EMPTY_MAPPING) == x12
    both = Mapping({"x": (1, 2), "y": (1, 1)})
    assert mapping_union(x12, both) == both
    with pytest.raises(ContractViolation):
        mapping_union(x12, Mapping({"x": (1, 1)}))


def test_restrict_examples():
    m = Mapping({"x": (1, 2), "y": (2, 3)})
    assert restrict(m, {"x"}) == Mapping({"x": (1, 2)})
    assert restrict(Mapping({"x": (1, 2)}), set()) == EMPTY_MAPPING
    assert restrict(Mapping({"x": (1, 2)}), {"z"}) == EMPTY_MAPPING


def test_mapping_text_and_json():
    m = Mapping({"y": (2, 2), "x": (1, 2)})
    assert str(m) == "{x=[1,2), y=[2,2)}"
    assert m.to_json_line() == '{"x":[1,2],"y":[2,2]}'
    assert Mapping.from_json(m.to_json()) == m
    with pytest.raises(ContractViolation):
        Mapping.from_json({"x": [1, True]})
    with pytest.raises(ContractViolation):
        Mapping([("x", (1, 2)), ("x", (1, 3))])


def test_set_operators():
    s1 = {Mapping({"x": (1, 2)}), Mapping({"x": (2, 3)})}
    s2 = {Mapping({"x": (1, 2), "y": (1, 1)})}
    assert join_sets(s1, s2) == frozenset(s2)
    assert minus_sets(s1, s2) == {Mapping({"x": (2, 3)})}
    # the empty mapping on the right removes everything
    assert minus_sets(s1, {EMPTY_MAPPING}) == frozenset()
    assert project_set(s2, {"y"}) == {Mapping({"y": (1, 1)})}


spans = st.tuples(st.integers(1, 4), st.integers(0, 3)).map(lambda t: Span(t[0], t[0] + t[1]))
mappings = st.dictionaries(st.sampled_from("xyz"), spans, max_size=3).map(Mapping)


@given(mappings, mappings)
def test_compatible_symmetric_reflexive(a, b):
    assert mappings_compatible(a, a)
    assert mappings_compatible(a, b) == mappings_compatible(b, a)


@given(mappings, mappings)
def test_union_of_compatible(a, b):
    if mappings_compatible(a, b):
        u = mapping_union(a, b)
        assert u.domain == a.domain | b.domain
        assert restrict(u, a.domain) == a
        assert restrict(u, b.domain) == b


@given(mappings)
def test_hash_and_order_stable(m):
    again = Mapping(dict(reversed(m.items())))
    assert again == m and hash(again) == hash(m)
    assert str(again) == str(m)
