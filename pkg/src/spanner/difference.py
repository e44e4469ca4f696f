"""Difference (MINUS) of spanners on a fixed document.

Two pipelines, both ad hoc (the output automaton is only correct on the
document it was built for):

* ``difference_adhoc`` for a bounded number of shared variables, joining a
  marked copy of the left operand with an automaton listing every signed
  assignment that no right mapping is compatible with;
* ``difference_synchronized`` for right operands that are synchronized on
  the shared variables, via the match structure of the right operand, its
  determinization and a product that falls into a trap copy of the left
  operand once the right side can no longer follow.
"""

from __future__ import annotations

import itertools
from collections import deque
from collections.abc import Iterable
from dataclasses import dataclass, field
from functools import cached_property

from . import enumerate as _enum
from .algebra import join_fpt
from .core import (
    ContractViolation,
    Document,
    Mapping,
    PlanError,
    Span,
    mappings_compatible,
    restrict,
)
from .regex import RESERVED_PREFIX
from .va import (
    CLOSE,
    EPS,
    EPSILON,
    OPEN,
    SYMBOL,
    Builder,
    VsetAutomaton,
    check_functional,
    embed,
    empty_va,
    extended_configs,
    is_semi_functional,
    mappings_to_va,
    op_close,
    op_open,
    project,
    require_sequential,
    to_semi_functional,
    trim,
    union_all,
    va_synchronized_for,
)


def dummy_name(x: str) -> str:
    return f"{RESERVED_PREFIX}{x}"


def _check_fresh(*automata: VsetAutomaton) -> None:
    for A in automata:
        for x in A.vars:
            if x.startswith(RESERVED_PREFIX):
                raise ContractViolation(f"variable {x!r} uses the reserved prefix {RESERVED_PREFIX!r}")


# ---------------------------------------------------------------- marked extensions


@dataclass(frozen=True)
class MarkedExtension:
    """A mapping over V plus one dummy per x in V: [1,1) if x is bound, else [n+1,n+1)."""

    base: Mapping
    variables: frozenset[str]
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ContractViolation("marked extensions need a nonempty document")
        if not self.base.domain <= self.variables:
            raise ContractViolation(f"{self.base} binds variables outside {sorted(self.variables)}")

    @cached_property
    def mapping(self) -> Mapping:
        out = dict(self.base.items())
        for x in self.variables:
            out[dummy_name(x)] = Span(1, 1) if x in self.base else Span(self.n + 1, self.n + 1)
        return Mapping(out)

    @staticmethod
    def unmark(m: Mapping, variables: Iterable[str]) -> Mapping:
        return restrict(m, variables)


# ---------------------------------------------------------------- ad-hoc pipeline


def _trivial_document_case(A1: VsetAutomaton, A2: VsetAutomaton, d: Document) -> VsetAutomaton:
    # on the empty document all spans coincide, so any two mappings are compatible
    return empty_va() if _enum.nonempty(A2, d) else A1


def _marked_left(A1: VsetAutomaton, V: tuple[str, ...]) -> VsetAutomaton:
    """One copy of A1 per X ⊆ V, marking X at the start and V∖X at the end."""
    table = extended_configs(A1, V)
    T = table.automaton
    b = Builder()
    q0 = b.state("init")
    qf = b.state("final")
    for r in range(len(V) + 1):
        for X in itertools.combinations(V, r):
            Xs = set(X)
            m = embed(b, T, "{" + ",".join(X) + "}:")
            cur = q0
            for x in X:
                mid = b.state()
                b.add(cur, op_open(dummy_name(x)), mid)
                cur = b.state()
                b.add(mid, op_close(dummy_name(x)), cur)
            b.add(cur, EPS, m[T.initial])
            rest = [x for x in V if x not in Xs]
            for q in T.accepting:
                closed = {x for x in V if table.labels[q][x] == "c"}
                if closed != Xs:
                    continue
                cur = m[q]
                for x in rest:
                    mid = b.state()
                    b.add(cur, op_open(dummy_name(x)), mid)
                    nxt = b.state()
                    b.add(mid, op_close(dummy_name(x)), nxt)
                    cur = nxt
                b.add(cur, EPS, qf)
    return trim(b.build(q0, [qf]))


def complement_assignments(
    S: Iterable[Mapping], V: tuple[str, ...], candidates: dict[str, list[Span]]
) -> list[Mapping]:
    """Every assignment over a subset of V (drawn from ``candidates``) that is
    incompatible with all of S, in lexicographic order."""
    S = list(S)
    out = []
    for r in range(len(V) + 1):
        for X in itertools.combinations(V, r):
            for spans in itertools.product(*(candidates[x] for x in X)):
                nu = Mapping(dict(zip(X, spans)))
                if not any(mappings_compatible(nu, mu) for mu in S):
                    out.append(nu)
    return out


def difference_adhoc(A1: VsetAutomaton, A2: VsetAutomaton, d: Document, kmax: int = 3) -> VsetAutomaton:
    """VA whose result on ``d`` is ⟦A1 ∖ A2⟧(d), for at most ``kmax`` shared variables."""
    require_sequential(A1, "difference_adhoc")
    require_sequential(A2, "difference_adhoc")
    _check_fresh(A1, A2)
    if not d:
        return _trivial_document_case(A1, A2, d)
    A2p = trim(project(A2, A1.vars))
    V = tuple(sorted(A2p.vars))
    if len(V) > kmax:
        raise PlanError(
            f"difference shares {len(V)} variables, bound is {kmax}", count=len(V), bound=kmax
        )
    A1s = to_semi_functional(A1, V)
    A = _marked_left(A1s, V)
    S = set(_enum.enumerate(A2p, d))
    candidates = {}
    for x in V:
        spans = {m[x] for m in _enum.enumerate(trim(project(A1s, [x])), d) if x in m}
        candidates[x] = sorted(spans)
    n = len(d)
    Mbar = complement_assignments(S, V, candidates)
    marked = [MarkedExtension(nu, frozenset(V), n).mapping for nu in Mbar]
    B = mappings_to_va(marked, d, set(V) | {dummy_name(x) for x in V})
    return trim(project(join_fpt(A, B), A1.vars))


# ---------------------------------------------------------------- match structures

Letter = tuple[str, ...]


def _var_closure(A: VsetAutomaton) -> dict[int, frozenset[int]]:
    """States reachable through epsilon and variable operations only."""
    out = {}
    for q in A.states:
        seen = {q}
        stack = [q]
        while stack:
            p = stack.pop()
            for lab, r in A.out[p]:
                if lab.kind != SYMBOL and r not in seen:
                    seen.add(r)
                    stack.append(r)
        out[q] = frozenset(seen)
    return out


def _configs(A: VsetAutomaton, xs: tuple[str, ...]) -> dict[int, Letter]:
    table = extended_configs(A, xs)
    return {q: tuple("w" if lab == "u" else lab for lab in table.vector(q)) for q in table.automaton.states}


@dataclass
class MatchGraph:
    """Nodes (i, q): after reading i symbols the automaton can sit in q,
    right before reading symbol i+1 (or accepting when i = len(doc))."""

    automaton: VsetAutomaton
    doc: Document
    variables: tuple[str, ...]
    levels: list[frozenset[int]]
    edges: dict[tuple[int, int], frozenset[int]]
    config: dict[int, Letter]

    @property
    def source_edges(self) -> frozenset[int]:
        return self.levels[0] if self.levels else frozenset()

    @property
    def is_empty(self) -> bool:
        return not self.levels or not self.levels[0]

    def node_count(self) -> int:
        return sum(len(L) for L in self.levels)


def match_graph(A: VsetAutomaton, d: Document) -> MatchGraph:
    if not check_functional(A):
        raise ContractViolation("match_graph requires a functional VA")
    T = trim(A)
    xs = tuple(sorted(T.vars))
    cfg = _configs(T, xs)
    ve = _var_closure(T)
    n = len(d)
    fwd: list[set[int]] = [set(ve[T.initial])]
    raw: dict[tuple[int, int], set[int]] = {}
    for i in range(n):
        nxt: set[int] = set()
        for p in fwd[i]:
            tgt: set[int] = set()
            for lab, r in T.out[p]:
                if lab.kind == SYMBOL and lab.value == d[i]:
                    tgt |= ve[r]
            if tgt:
                raw[(i, p)] = tgt
                nxt |= tgt
        fwd.append(nxt)
    # backward trimming
    alive: list[set[int]] = [set() for _ in range(n + 1)]
    alive[n] = {q for q in fwd[n] if q in T.accepting}
    for i in range(n - 1, -1, -1):
        alive[i] = {p for p in fwd[i] if raw.get((i, p), set()) & alive[i + 1]}
    edges = {}
    for i in range(n):
        for p in alive[i]:
            edges[(i, p)] = frozenset(raw[(i, p)] & alive[i + 1])
    levels = [frozenset(a) for a in alive]
    if not levels[0]:
        levels = [frozenset() for _ in range(n + 1)]
        edges = {}
    return MatchGraph(T, d, xs, levels, edges, cfg)


SOURCE = ("source",)


@dataclass
class MatchStructure:
    """NFA over configuration letters; words have length len(doc) + 1."""

    graph: MatchGraph
    initial: tuple = SOURCE
    transitions: dict[tuple, list[tuple[Letter, tuple]]] = field(default_factory=dict)
    finals: frozenset = frozenset()

    def accepts(self, word: Iterable[Letter]) -> bool:
        cur = {self.initial}
        for c in word:
            cur = {t for s in cur for lab, t in self.transitions.get(s, ()) if lab == c}
            if not cur:
                return False
        return bool(cur & self.finals)

    def words(self, limit: int | None = None) -> list[tuple[Letter, ...]]:
        out: set[tuple[Letter, ...]] = set()
        stack = [(self.initial, ())]
        while stack:
            s, w = stack.pop()
            if s in self.finals:
                out.add(w)
                if limit is not None and len(out) >= limit:
                    break
            for lab, t in self.transitions.get(s, ()):
                stack.append((t, w + (lab,)))
        return sorted(out)

    @property
    def alphabet(self) -> frozenset[Letter]:
        return frozenset(lab for out in self.transitions.values() for lab, _ in out)


def match_structure(G: MatchGraph) -> MatchStructure:
    trans: dict[tuple, list[tuple[Letter, tuple]]] = {}
    cfg = G.config
    n = len(G.doc)
    if G.is_empty:
        return MatchStructure(G, SOURCE, {}, frozenset())
    trans[SOURCE] = [(cfg[q], (0, q)) for q in sorted(G.levels[0])]
    for (i, p), tgt in sorted(G.edges.items()):
        trans[(i, p)] = [(cfg[q], (i + 1, q)) for q in sorted(tgt)]
    finals = frozenset((n, q) for q in G.levels[n])
    return MatchStructure(G, SOURCE, trans, finals)


INIT = ("init",)


@dataclass
class DetMatchStructure:
    """DFA over configuration letters; non-initial states are (i, s, letter)
    standing for the triple (i, s, Q) with Q stored in ``sets``."""

    variables: tuple[str, ...]
    doc_length: int
    sets: dict[tuple, frozenset[int]]
    delta: dict[tuple, dict[Letter, tuple]]
    finals: frozenset

    initial: tuple = INIT

    def step(self, z: tuple, c: Letter) -> tuple | None:
        return self.delta.get(z, {}).get(c)

    def accepts(self, word: Iterable[Letter]) -> bool:
        z: tuple | None = self.initial
        for c in word:
            z = self.step(z, c)
            if z is None:
                return False
        return z in self.finals

    def config(self, z: tuple) -> Letter:
        if z == INIT:
            return ("w",) * len(self.variables)
        return z[2]

    @property
    def num_states(self) -> int:
        return len(self.sets) + 1

    @property
    def num_transitions(self) -> int:
        return sum(len(v) for v in self.delta.values())

    def size_bound(self) -> tuple[int, int]:
        """Exact counting bounds behind the O(l²k) states / O(l²k²) transitions claim."""
        ell = self.doc_length
        letters = 2 * len(self.variables) + 1
        pairs = (ell + 1) * (ell + 2) // 2
        return pairs * letters + 1, pairs * letters * letters + letters


def _rank(c: Letter) -> int:
    return sum({"w": 0, "o": 1, "c": 2}[s] for s in c)


def determinize_match_structure(M: MatchStructure) -> DetMatchStructure:
    G = M.graph
    n = len(G.doc)
    cfg = G.config
    sets: dict[tuple, frozenset[int]] = {}
    delta: dict[tuple, dict[Letter, tuple]] = {}

    def enter(key: tuple, Q: frozenset[int]) -> bool:
        old = sets.get(key)
        if old is None:
            sets[key] = Q
            return True
        if old != Q:
            raise ContractViolation(
                f"first-entry sets disagree at {key[:2]}; the automaton is not synchronized"
            )
        return False

    queue: deque[tuple] = deque()
    if not G.is_empty:
        groups: dict[Letter, set[int]] = {}
        for q in G.levels[0]:
            groups.setdefault(cfg[q], set()).add(q)
        delta[INIT] = {}
        for c in sorted(groups, key=lambda c: (_rank(c), c)):
            key = (0, 0, c)
            if enter(key, frozenset(groups[c])):
                queue.append(key)
            delta[INIT][c] = key
    while queue:
        key = queue.popleft()
        i, s, c = key
        if i == n:
            continue
        groups = {}
        for p in sets[key]:
            for q in G.edges.get((i, p), ()):
                groups.setdefault(cfg[q], set()).add(q)
        out = delta.setdefault(key, {})
        for c2 in sorted(groups, key=lambda c: (_rank(c), c)):
            if _rank(c2) < _rank(c):
                raise ContractViolation("configuration order violated; input is not functional")
            nkey = (i + 1, s, c) if c2 == c else (i + 1, i + 1, c2)
            if enter(nkey, frozenset(groups[c2])):
                queue.append(nkey)
            out[c2] = nkey
    finals = frozenset(k for k in sets if k[0] == n)
    D = DetMatchStructure(G.variables, n, sets, delta, finals)
    sb, tb = D.size_bound()
    if D.num_states > sb or D.num_transitions > tb:
        raise ContractViolation(f"determinized match structure exceeds its size bound ({D.num_states} > {sb})")
    return D


# ---------------------------------------------------------------- synchronized pipeline


@dataclass(frozen=True)
class SkipComponent:
    skipped: frozenset[str]
    automaton: VsetAutomaton


def skip_decompose(A1: VsetAutomaton, X: Iterable[str]) -> list[SkipComponent]:
    """Split A1 by the set of variables of X its accepting runs leave unbound."""
    xs = tuple(sorted(X))
    require_sequential(A1, "skip_decompose")
    table = extended_configs(A1, xs)
    T = table.automaton
    if any(table.labels[q][x] == "d" for q in T.states for x in xs):
        raise ContractViolation("skip_decompose requires a VA semi-functional for X")
    groups: dict[frozenset[str], list[int]] = {}
    for q in T.accepting:
        S = frozenset(x for x in xs if table.labels[q][x] == "u")
        groups.setdefault(S, []).append(q)
    out = []
    for S in sorted(groups, key=lambda s: (len(s), sorted(s))):
        sub = VsetAutomaton(T.states, T.initial, frozenset(groups[S]), T.transitions, T.provenance)
        out.append(SkipComponent(S, trim(sub)))
    return out


_TRAP = ("trap",)


def _trap_product(A1j: VsetAutomaton, xs: tuple[str, ...], D2: DetMatchStructure) -> VsetAutomaton:
    """Runs of A1j whose configuration word on xs is rejected by D2."""
    letter = _configs(A1j, xs)
    T = A1j
    b = Builder()
    ids: dict[tuple, int] = {}
    queue: deque[tuple] = deque()

    def node(key):
        q = ids.get(key)
        if q is None:
            z = key[1]
            ztag = "trap" if z == _TRAP else ("init" if z == INIT else f"{z[0]},{z[1]},{''.join(z[2])}")
            q = ids[key] = b.state(f"({T.tag(key[0])},{ztag})")
            queue.append(key)
        return q

    start = node((T.initial, INIT))
    sink = b.state("accept")
    acc = [sink]
    while queue:
        key = queue.popleft()
        q1, z = key
        src = ids[key]
        if z == _TRAP:
            if q1 in T.accepting:
                acc.append(src)
            for lab, r in T.out[q1]:
                b.add(src, lab, node((r, _TRAP)))
            continue
        zc = None
        if any(lab.kind == SYMBOL for lab, _ in T.out[q1]) or q1 in T.accepting:
            zc = D2.step(z, letter[q1])
        for lab, r in T.out[q1]:
            if lab.kind == SYMBOL:
                b.add(src, lab, node((r, _TRAP if zc is None else zc)))
            else:
                b.add(src, lab, node((r, z)))
        if q1 in T.accepting and (zc is None or zc not in D2.finals):
            b.add(src, EPS, sink)
    return trim(b.build(start, acc))


def difference_synchronized(A1: VsetAutomaton, A2: VsetAutomaton, d: Document) -> VsetAutomaton:
    """VA whose result on ``d`` is ⟦A1 ∖ A2⟧(d); A1 semi-functional and A2
    synchronized for the shared variables."""
    require_sequential(A1, "difference_synchronized")
    require_sequential(A2, "difference_synchronized")
    X = tuple(sorted(A1.vars & A2.vars))
    if not is_semi_functional(A1, X):
        raise ContractViolation("left operand is not semi-functional for the shared variables")
    if not va_synchronized_for(A2, X):
        raise ContractViolation("right operand is not synchronized for the shared variables")
    if not d:
        return _trivial_document_case(A1, A2, d)
    A2p = trim(project(A2, X))
    X2 = tuple(sorted(A2p.vars))
    if not check_functional(A2p):
        raise ContractViolation("normalized right operand is not functional")
    parts = []
    for comp in skip_decompose(trim(A1), X2):
        xs = tuple(x for x in X2 if x not in comp.skipped)
        A2j = trim(project(A2p, xs))
        D2 = determinize_match_structure(match_structure(match_graph(A2j, d)))
        parts.append(_trap_product(comp.automaton, xs, D2))
    if not parts:
        return empty_va()
    return union_all(parts, [f"S{k}:" for k in range(len(parts))])


def synchronized_applicable(A1: VsetAutomaton, A2: VsetAutomaton) -> bool:
    """Whether difference_synchronized accepts (A1, A2) as given."""
    X = A1.vars & A2.vars
    try:
        return is_semi_functional(A1, X) and va_synchronized_for(A2, X)
    except ContractViolation:
        return False
