import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from spanner.algebra import join_fpt
from spanner.core import ContractViolation, Mapping, Span
from spanner.difference import difference_adhoc
from spanner.enumerate import evaluate, nonempty
from spanner.reductions import (
    CnfError,
    CnfFormula,
    block_codes,
    decode_diff_assignment,
    disjunct_occurrences,
    gen_diff_3sat,
    gen_diff_bounded_occ,
    gen_diff_weighted,
    gen_join_3sat,
    literal_var,
    pad_to_3,
    parse_dimacs,
    sat_bruteforce,
    weighted_span,
    weighted_var,
)
from spanner.regex import classify, disjuncts, is_disjunction_free, oracle_eval
from spanner.va import compile_regex

import helpers

PHI = CnfFormula.of(3, [(1, 2, 3), (-1, 2, -3)])
CONTRADICTION = pad_to_3(CnfFormula.of(1, [(1,), (-1,)]))


def diff_nonempty(g1, g2, d, kmax):
    return nonempty(difference_adhoc(compile_regex(g1), compile_regex(g2), d, kmax=kmax), d)


def test_bruteforce():
    assert sat_bruteforce(PHI)
    assert not sat_bruteforce(CONTRADICTION)
    assert not sat_bruteforce(CnfFormula.of(2, [(1, 2, 2)]), weight=0)
    assert sat_bruteforce(CnfFormula.of(2, [(1, 2, 2)]), weight=1)
    with pytest.raises(ContractViolation):
        sat_bruteforce(CnfFormula.of(21, [(1,)]))


def test_dimacs_round_trip():
    text = "c comment\np cnf 3 2\n1 2 3 0\n-1 2 -3 0\n"
    assert parse_dimacs(text) == PHI
    assert parse_dimacs(PHI.to_dimacs()) == PHI
    with pytest.raises(CnfError):
        parse_dimacs("p cnf 2 1\n1 3 0\n")
    with pytest.raises(CnfError):
        parse_dimacs("1 2 0\n")
    with pytest.raises(CnfError):
        parse_dimacs("p cnf 2 2\n1 2 0\n")


def test_join_clause_gadgets():
    g1, g2, d = gen_join_3sat(PHI)
    assert d == "a"
    domains = {m.domain for m in oracle_eval(g2, d)}
    first = [literal_var(1, 1, True), literal_var(2, 1, True), literal_var(3, 1, True)]
    second = [literal_var(1, 2, False), literal_var(2, 2, True), literal_var(3, 2, False)]
    assert domains == {frozenset(p) for p in itertools.product(first, second)}
    assert classify(g1).sequential and not classify(g1).functional
    assert classify(g2).sequential


def test_join_examples():
    g1, g2, d = gen_join_3sat(PHI)
    J = join_fpt(compile_regex(g1), compile_regex(g2))
    assert nonempty(J, d)
    g1, g2, d = gen_join_3sat(CONTRADICTION)
    assert not nonempty(join_fpt(compile_regex(g1), compile_regex(g2)), d)


def test_diff_clause_gadgets():
    g1, g2, d = gen_diff_3sat(PHI)
    assert d == "aaa"
    c1, c2 = disjuncts(g2)
    assert oracle_eval(c1, d) == {Mapping({"x1": (1, 1), "x2": (2, 2), "x3": (3, 3)})}
    assert oracle_eval(c2, d) == {Mapping({"x1": (1, 2), "x2": (2, 2), "x3": (3, 4)})}


def test_diff_examples():
    g1, g2, d = gen_diff_3sat(PHI)
    got = evaluate(difference_adhoc(compile_regex(g1), compile_regex(g2), d), d)
    assert Mapping({"x1": Span(1, 2), "x2": Span(2, 3), "x3": Span(3, 3)}) in got
    for m in got:
        assert PHI.satisfied_by(decode_diff_assignment(m, 3))
    assert not diff_nonempty(*gen_diff_3sat(CONTRADICTION), 1)


def test_tautologies_are_skipped():
    phi = CnfFormula.of(2, [(1, -1, 2)])
    g1, g2, d = gen_diff_3sat(phi)
    assert len(disjuncts(g2)) == 1 and diff_nonempty(g1, g2, d, 2)


def test_generators_require_3cnf():
    with pytest.raises(CnfError):
        gen_join_3sat(CnfFormula.of(2, [(1, 2)]))
    with pytest.raises(CnfError):
        gen_diff_weighted(PHI, 4)


def test_bounded_structure():
    phi = CnfFormula.of(3, [(1, 2), (-1, 3), (-2, -3, 1)])
    g1, g2, d = gen_diff_bounded_occ(phi)
    assert d == "bab" * 3
    assert classify(g1).functional and is_disjunction_free(g1)
    assert all(is_disjunction_free(g) and classify(g).functional for g in disjuncts(g2))
    assert max(disjunct_occurrences(g2).values()) <= 3
    assert diff_nonempty(g1, g2, d, 3) == sat_bruteforce(phi)
    with pytest.raises(CnfError):
        gen_diff_bounded_occ(CnfFormula.of(1, [(1, 1)] * 4))


def test_block_codes():
    for n in range(1, 9):
        codes = block_codes(n)
        assert len(set(codes)) == n
        assert len({len(c) for c in codes}) == 1
        assert all(c.startswith("ab") for c in codes)
    doc = "".join(block_codes(3))
    assert doc[weighted_span(2, 3).start - 1 : weighted_span(2, 3).end - 1] == block_codes(3)[1]


def test_weighted_examples():
    g1, g2, d = gen_diff_weighted(PHI, 1)
    assert g1.vars == g2.vars == {weighted_var(1)}
    got = evaluate(difference_adhoc(compile_regex(g1), compile_regex(g2), d, kmax=1), d)
    # setting any single variable true satisfies both clauses
    assert got == {Mapping({weighted_var(1): weighted_span(j, 3)}) for j in (1, 2, 3)}
    phi = CnfFormula.of(3, [(2, 2, 2), (-1, -1, -3)])
    g1, g2, d = gen_diff_weighted(phi, 1)
    got = evaluate(difference_adhoc(compile_regex(g1), compile_regex(g2), d, kmax=1), d)
    assert got == {Mapping({weighted_var(1): weighted_span(2, 3)})}
    phi = CnfFormula.of(2, [(1, 1, 1), (2, 2, 2)])
    assert not diff_nonempty(*gen_diff_weighted(phi, 1), 1)
    assert diff_nonempty(*gen_diff_weighted(phi, 2), 2)


def test_join_size_pinned():
    # regression pin on generator sizes; all grow like n*m
    sizes = []
    for n, m in [(3, 2), (4, 4), (6, 5)]:
        phi = CnfFormula.of(n, [[(i % n) + 1, -(((i + 1) % n) + 1), ((i + 2) % n) + 1] for i in range(m)])
        g1, g2, _ = gen_join_3sat(phi)
        sizes.append((g1.size(), g2.size()))
        assert g1.size() + g2.size() <= 10 * n * m
    assert sizes == [(37, 19), (97, 37), (181, 46)]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_random_cnf_agreement(seed):
    rng = random.Random(seed)
    phi = helpers.random_cnf(rng, n_max=3, m_max=3)
    sat = sat_bruteforce(phi)
    g1, g2, d = gen_join_3sat(phi)
    assert nonempty(join_fpt(compile_regex(g1), compile_regex(g2)), d) == sat
    assert diff_nonempty(*gen_diff_3sat(phi), phi.n) == sat
    p = rng.randint(0, phi.n)
    assert diff_nonempty(*gen_diff_weighted(phi, p), p) == sat_bruteforce(phi, p)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_random_bounded_structure(seed):
    psi = helpers.random_bounded_cnf(random.Random(seed))
    g1, g2, d = gen_diff_bounded_occ(psi)
    assert max(disjunct_occurrences(g2).values(), default=0) <= 3
    assert classify(g1).functional
    assert diff_nonempty(g1, g2, d, psi.n) == sat_bruteforce(psi)
