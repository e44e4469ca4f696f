"""Static compilation of union, natural join and the disjunctive-functional normal form."""

from __future__ import annotations

from collections import deque
from collections.abc import Iterable
from dataclasses import dataclass
from functools import cached_property

from .core import ContractViolation
from .regex import Bind, Concatenation, Disjunction, EmptySet, Epsilon, Regex, Star, Symbol, is_sequential
from .va import (
    CLOSE,
    EPS,
    OPEN,
    SYMBOL,
    Builder,
    Label,
    VsetAutomaton,
    check_functional,
    extended_configs,
    is_empty_language,
    require_sequential,
    to_semi_functional,
    trim,
    union_all,
)

_RANK = {"u": 0, "o": 1, "c": 2}

# per shared variable: nobody used it yet, only the left side, only the
# right side, or both sides bind it to the same span
_FREE, _LEFT, _RIGHT, _SYNC = 0, 1, 2, 3


def union_va(A1: VsetAutomaton, A2: VsetAutomaton) -> VsetAutomaton:
    require_sequential(A1, "union_va")
    require_sequential(A2, "union_va")
    return union_all([A1, A2], ["L:", "R:"])


def join_semi_functional(A1: VsetAutomaton, A2: VsetAutomaton) -> VsetAutomaton:
    """Product automaton for A1 ⋈ A2 when both are semi-functional on the shared variables.

    Between two symbols the left operand moves first and the right one
    second (the phase bit), so every pair of compatible runs has exactly one
    product run.  For a shared variable bound by both sides the left side
    performs the operation and the right side follows at the same position
    with a silent move; a shared variable may also be bound by one side only,
    in which case the other side is barred from touching it.
    """
    require_sequential(A1, "join_semi_functional")
    require_sequential(A2, "join_semi_functional")
    X = tuple(sorted(A1.vars & A2.vars))
    t1, t2 = extended_configs(A1, X), extended_configs(A2, X)
    for t, name in ((t1, "left"), (t2, "right")):
        if any(lab == "d" for row in t.labels.values() for lab in row.values()):
            raise ContractViolation(f"{name} operand is not semi-functional for the shared variables")
    T1, T2 = t1.automaton, t2.automaton
    xi = {x: i for i, x in enumerate(X)}
    L1, L2 = t1.labels, t2.labels

    def balanced(q1, q2, modes):
        return all(m != _SYNC or L1[q1][x] == L2[q2][x] for x, m in zip(X, modes))

    b = Builder()
    ids: dict[tuple, int] = {}
    queue: deque[tuple] = deque()

    def node(key):
        q = ids.get(key)
        if q is None:
            q1, q2, ph, modes = key
            q = ids[key] = b.state(f"({T1.tag(q1)},{T2.tag(q2)}){'LR'[ph]}{''.join(map(str, modes))}")
            queue.append(key)
        return q

    start = node((T1.initial, T2.initial, 0, (_FREE,) * len(X)))
    acc = []
    while queue:
        key = queue.popleft()
        q1, q2, ph, modes = key
        src = ids[key]
        if q1 in T1.accepting and q2 in T2.accepting and balanced(q1, q2, modes):
            acc.append(src)
        # left moves
        if ph == 0:
            for lab, r1 in T1.out[q1]:
                if lab.kind == SYMBOL:
                    continue
                if lab.kind in (OPEN, CLOSE) and lab.value in xi:
                    i = xi[lab.value]
                    m = modes[i]
                    if m == _RIGHT:
                        continue
                    choices = (_LEFT, _SYNC) if m == _FREE else (m,)
                    for m2 in choices:
                        mm = modes[:i] + (m2,) + modes[i + 1 :]
                        b.add(src, lab, node((r1, q2, 0, mm)))
                else:
                    b.add(src, lab, node((r1, q2, 0, modes)))
        # right moves
        for lab, r2 in T2.out[q2]:
            if lab.kind == SYMBOL:
                continue
            if lab.kind in (OPEN, CLOSE) and lab.value in xi:
                x = lab.value
                i = xi[x]
                m = modes[i]
                if m == _LEFT:
                    continue
                if m == _SYNC:
                    # follow the left side, which already acted at this position
                    if _RANK[L1[q1][x]] <= _RANK[L2[q2][x]]:
                        continue
                    b.add(src, EPS, node((q1, r2, 1, modes)))
                    continue
                mm = modes[:i] + (_RIGHT,) + modes[i + 1 :]
                b.add(src, lab, node((q1, r2, 1, mm)))
            else:
                b.add(src, lab, node((q1, r2, 1, modes)))
        # joint symbol moves, only once both sides agree on every synced variable
        if balanced(q1, q2, modes):
            sym2: dict[str, list[int]] = {}
            for lab, r2 in T2.out[q2]:
                if lab.kind == SYMBOL:
                    sym2.setdefault(lab.value, []).append(r2)
            for lab, r1 in T1.out[q1]:
                if lab.kind == SYMBOL:
                    for r2 in sym2.get(lab.value, ()):
                        b.add(src, lab, node((r1, r2, 0, modes)))
    return trim(b.build(start, acc))


def join_fpt(A1: VsetAutomaton, A2: VsetAutomaton) -> VsetAutomaton:
    """Join of arbitrary sequential VAs; exponential only in the shared-variable count."""
    require_sequential(A1, "join_fpt")
    require_sequential(A2, "join_fpt")
    X = A1.vars & A2.vars
    return join_semi_functional(to_semi_functional(A1, X), to_semi_functional(A2, X))


# ---------------------------------------------------------------- disjunctive functional


def regex_to_disjunctive_functional(alpha: Regex) -> list[Regex]:
    """Functional formulas whose disjunction is equivalent to the sequential ``alpha``."""
    if not is_sequential(alpha):
        raise ContractViolation("regex_to_disjunctive_functional requires a sequential formula")

    def go(node: Regex) -> list[Regex]:
        if isinstance(node, EmptySet):
            return []
        if isinstance(node, (Epsilon, Symbol)):
            return [node]
        if isinstance(node, Disjunction):
            if not node.left.vars and not node.right.vars:
                return [node]
            return list(dict.fromkeys(go(node.left) + go(node.right)))
        if isinstance(node, Concatenation):
            rights = go(node.right)
            return list(dict.fromkeys(Concatenation(l, r) for l in go(node.left) for r in rights))
        if isinstance(node, Star):
            # a sequential formula binds nothing under a star
            return [node]
        if isinstance(node, Bind):
            return [Bind(node.var, b) for b in go(node.inner)]
        raise TypeError(f"unknown node {node!r}")

    return go(alpha)


@dataclass(frozen=True, eq=False)
class DisjunctiveFunctionalVa:
    components: tuple[VsetAutomaton, ...]

    def __post_init__(self):
        for k, C in enumerate(self.components):
            if not check_functional(C):
                raise ContractViolation(f"component {k} is not functional")

    @cached_property
    def combined(self) -> VsetAutomaton:
        return union_all(list(self.components))

    @cached_property
    def domains(self) -> tuple[frozenset[str], ...]:
        return tuple(C.vars for C in self.components)

    def __len__(self) -> int:
        return len(self.components)


def _status_product(A: VsetAutomaton):
    """Reachable (state, status-vector) graph over all variables of A."""
    xs = tuple(sorted(A.vars))
    xi = {x: i for i, x in enumerate(xs)}
    start = (A.initial, (0,) * len(xs))
    seen = {start}
    edges: dict[tuple, list[tuple[Label, tuple]]] = {}
    queue = deque([start])
    while queue:
        key = queue.popleft()
        q, st = key
        out = edges[key] = []
        for lab, r in A.out[q]:
            st2 = st
            if lab.kind in (OPEN, CLOSE):
                i = xi[lab.value]
                need = 0 if lab.kind == OPEN else 1
                if st[i] != need:
                    continue
                st2 = st[:i] + (need + 1,) + st[i + 1 :]
            nxt = (r, st2)
            out.append((lab, nxt))
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return xs, start, edges


def va_to_disjunctive_functional(A: VsetAutomaton) -> DisjunctiveFunctionalVa:
    """One functional component per set of variables some accepting run binds exactly."""
    require_sequential(A, "va_to_disjunctive_functional")
    T = trim(A)
    xs, start, edges = _status_product(T)
    rev: dict[tuple, list[tuple[tuple, Label]]] = {}
    for src, out in edges.items():
        for lab, dst in out:
            rev.setdefault(dst, []).append((src, lab))
    finals: dict[frozenset[str], list[tuple]] = {}
    for key in edges:
        q, st = key
        if q in T.accepting and 1 not in st:
            dom = frozenset(x for x, s in zip(xs, st) if s == 2)
            finals.setdefault(dom, []).append(key)
    comps = []
    for dom in sorted(finals, key=lambda s: (len(s), sorted(s))):
        cone = set(finals[dom])
        stack = list(cone)
        while stack:
            k = stack.pop()
            for p, _ in rev.get(k, ()):
                if p not in cone:
                    cone.add(p)
                    stack.append(p)
        if start not in cone:
            continue
        b = Builder()
        ids = {}
        for key in sorted(cone, key=lambda k: (k[0], k[1])):
            ids[key] = b.state(f"{T.tag(key[0])}/{''.join('woc'[s] for s in key[1])}")
        for key in cone:
            for lab, dst in edges[key]:
                if dst in cone:
                    b.add(ids[key], lab, ids[dst])
        comps.append(trim(b.build(ids[start], [ids[k] for k in finals[dom]])))
    return DisjunctiveFunctionalVa(tuple(comps))


def join_disjunctive(D1: DisjunctiveFunctionalVa, D2: DisjunctiveFunctionalVa) -> DisjunctiveFunctionalVa:
    """Pairwise functional joins of the components; empty products are dropped."""
    out = []
    for C1 in D1.components:
        for C2 in D2.components:
            J = join_semi_functional(C1, C2)
            if not is_empty_language(J):
                out.append(J)
    return DisjunctiveFunctionalVa(tuple(out))


def disjunctive_from_regex(alpha: Regex) -> DisjunctiveFunctionalVa:
    """Compile each functional disjunct of ``alpha`` separately."""
    from .va import compile_regex

    comps = [trim(compile_regex(g)) for g in regex_to_disjunctive_functional(alpha)]
    return DisjunctiveFunctionalVa(tuple(C for C in comps if not is_empty_language(C)))


def shared_variables(A1: VsetAutomaton, A2: VsetAutomaton) -> frozenset[str]:
    return A1.vars & A2.vars


def join_all(automata: Iterable[VsetAutomaton]) -> VsetAutomaton:
    it = iter(automata)
    acc = next(it)
    for A in it:
        acc = join_fpt(acc, A)
    return acc
