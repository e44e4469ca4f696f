"""Seeded random instances shared by the test modules."""

from __future__ import annotations

import itertools
import random

from spanner.regex import Bind, Concatenation, Disjunction, Epsilon, Regex, Star, Symbol, alt
from spanner.reductions import CnfFormula

# filled by the acceptance suite, printed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def docs_upto(n: int, alphabet: str = "ab") -> list[str]:
    return ["".join(p) for k in range(n + 1) for p in itertools.product(alphabet, repeat=k)]


_LEAVES = (Symbol("a"), Symbol("b"), Epsilon())


def random_sequential(rng: random.Random, variables, budget: int = 12, sync_for=()) -> Regex:
    """A sequential formula with at most ``budget`` AST nodes.

    Disjunctions never mention a variable of ``sync_for``, so the result is
    synchronized for those variables.
    """
    vs = sorted(variables)
    sync = frozenset(sync_for)

    def go(pool: list[str], b: int, allow_vars: bool = True) -> Regex:
        if b <= 1 or rng.random() < 0.2:
            return rng.choice(_LEAVES)
        r = rng.random()
        if r < 0.4 and pool and allow_vars:
            x = rng.choice(pool)
            return Bind(x, go([v for v in pool if v != x], b - 1))
        if r < 0.6 and b >= 3:
            left = rng.randint(1, b - 2)
            p = pool[:]
            rng.shuffle(p)
            h = rng.randint(0, len(p))
            return Concatenation(go(sorted(p[:h]), left), go(sorted(p[h:]), b - 1 - left))
        if r < 0.85 and b >= 3:
            left = rng.randint(1, b - 2)
            sub = [v for v in pool if v not in sync]
            return Disjunction(go(sub, left), go(sub, b - 1 - left))
        if b >= 2:
            return Star(go([], b - 1, allow_vars=False))
        return rng.choice(_LEAVES)

    return go(vs, budget)


def any_star() -> Regex:
    return Star(alt(Symbol("a"), Symbol("b")))


def random_cnf(rng: random.Random, n_max: int = 4, m_max: int = 4, unit_rate: float = 0.3) -> CnfFormula:
    """Random 3CNF; some clauses are unit clauses padded by repetition so
    that unsatisfiable instances are common."""
    n = rng.randint(1, n_max)
    clauses = []
    for _ in range(rng.randint(1, m_max)):
        c = [rng.choice((1, -1)) * rng.randint(1, n) for _ in range(3)]
        if rng.random() < unit_rate:
            c = [c[0]] * 3
        clauses.append(c)
    return CnfFormula.of(n, clauses)


def random_bounded_cnf(rng: random.Random, n_max: int = 4, m_max: int = 4) -> CnfFormula:
    """2-3 literal clauses, every variable in at most three clauses."""
    while True:
        n = rng.randint(1, n_max)
        occ = [0] * (n + 1)
        clauses = []
        for _ in range(rng.randint(1, m_max)):
            free = [v for v in range(1, n + 1) if occ[v] < 3]
            if not free:
                break
            c = [rng.choice((1, -1)) * rng.choice(free) for _ in range(rng.choice((2, 3)))]
            if rng.random() < 0.4:
                # a unit clause written with a repeated literal
                c = [c[0], c[0]]
            for v in {abs(l) for l in c}:
                occ[v] += 1
            clauses.append(c)
        if clauses:
            return CnfFormula.of(n, clauses)


def sample_va():
    """Three states: a sigma loop on q0, x bound between q1 and q2, and a
    direct sigma edge q0 -> q2 that skips x.  ``skip=False`` drops that edge."""
    return _sample_va(True)


def sample_va_functional():
    return _sample_va(False)


def _sample_va(skip: bool):
    from spanner.va import Builder, op_close, op_open, sym

    b = Builder()
    q0, q1, q2 = b.state("q0"), b.state("q1"), b.state("q2")
    for c in "ab":
        b.add(q0, sym(c), q0)
        b.add(q1, sym(c), q1)
        b.add(q2, sym(c), q2)
        if skip:
            b.add(q0, sym(c), q2)
    b.add(q0, op_open("x"), q1)
    b.add(q1, op_close("x"), q2)
    return b.build(q0, [q2])


def optional_x_va():
    """x is optional (an epsilon bypass), y is always bound; every
    operation has a single target state."""
    from spanner.va import EPS, Builder, op_close, op_open, sym

    b = Builder()
    q0, qx, q1, q2, q3 = (b.state(t) for t in ("q0", "qx", "q1", "q2", "q3"))
    b.add(q0, op_open("x"), qx)
    b.add(qx, op_close("x"), q1)
    b.add(q0, EPS, q1)
    b.add(q1, op_open("y"), q2)
    b.add(q2, op_close("y"), q3)
    for c in "ab":
        b.add(qx, sym(c), qx)
        b.add(q2, sym(c), q2)
    return b.build(q0, [q3])


def chain_va():
    """|-x |-y  sigma*  -|y -|x as a five-state chain."""
    from spanner.va import Builder, op_close, op_open, sym

    b = Builder()
    q = [b.state(f"q{i}") for i in range(5)]
    b.add(q[0], op_open("x"), q[1])
    b.add(q[1], op_open("y"), q[2])
    for c in "ab":
        b.add(q[2], sym(c), q[2])
    b.add(q[2], op_close("y"), q[3])
    b.add(q[3], op_close("x"), q[4])
    return b.build(q[0], [q[4]])
