"""Vset-automata: representation, analyses, constructions and a brute-force oracle."""

from __future__ import annotations

import json
from collections import deque
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

from .core import ContractViolation, Document, Mapping, Span, SpanRangeError
from .regex import Bind, Concatenation, Disjunction, EmptySet, Epsilon, Regex, Star, Symbol

SYMBOL, EPSILON, OPEN, CLOSE = "symbol", "epsilon", "open", "close"


class Label(NamedTuple):
    kind: str
    value: str | None = None

    def __str__(self) -> str:
        if self.kind == SYMBOL:
            return repr(self.value)
        if self.kind == EPSILON:
            return "eps"
        return ("|-" if self.kind == OPEN else "-|") + str(self.value)


EPS = Label(EPSILON)


def sym(c: str) -> Label:
    return Label(SYMBOL, c)


def op_open(x: str) -> Label:
    return Label(OPEN, x)


def op_close(x: str) -> Label:
    return Label(CLOSE, x)


Transition = tuple[int, Label, int]


@dataclass(frozen=True, eq=False)
class VsetAutomaton:
    states: tuple[int, ...]
    initial: int
    accepting: frozenset[int]
    transitions: tuple[Transition, ...]
    provenance: dict[int, str] | None = field(default=None, repr=False)

    def __post_init__(self):
        qs = set(self.states)
        if len(qs) != len(self.states):
            raise ContractViolation("duplicate state ids")
        if self.initial not in qs:
            raise ContractViolation("initial state not in Q")
        if not self.accepting <= qs:
            raise ContractViolation("accepting states not in Q")
        for p, lab, q in self.transitions:
            if p not in qs or q not in qs:
                raise ContractViolation(f"transition endpoint outside Q: {(p, lab, q)}")
            if lab.kind not in (SYMBOL, EPSILON, OPEN, CLOSE):
                raise ContractViolation(f"unknown label kind {lab.kind!r}")

    @cached_property
    def vars(self) -> frozenset[str]:
        return frozenset(lab.value for _, lab, _ in self.transitions if lab.kind in (OPEN, CLOSE))

    @cached_property
    def alphabet(self) -> frozenset[str]:
        return frozenset(lab.value for _, lab, _ in self.transitions if lab.kind == SYMBOL)

    @cached_property
    def out(self) -> dict[int, list[tuple[Label, int]]]:
        adj: dict[int, list[tuple[Label, int]]] = {q: [] for q in self.states}
        for p, lab, q in self.transitions:
            adj[p].append((lab, q))
        return adj

    @cached_property
    def inc(self) -> dict[int, list[tuple[Label, int]]]:
        adj: dict[int, list[tuple[Label, int]]] = {q: [] for q in self.states}
        for p, lab, q in self.transitions:
            adj[q].append((lab, p))
        return adj

    @property
    def num_states(self) -> int:
        return len(self.states)

    @property
    def num_transitions(self) -> int:
        return len(self.transitions)

    def tag(self, q: int) -> str:
        if self.provenance and q in self.provenance:
            return self.provenance[q]
        return str(q)

    def __repr__(self) -> str:
        return (
            f"VsetAutomaton(|Q|={self.num_states}, |delta|={self.num_transitions}, "
            f"vars={sorted(self.vars)})"
        )

    # ------------------------------------------------------------ JSON

    def to_json(self) -> dict:
        trans = []
        for p, lab, q in self.transitions:
            label = {"type": lab.kind}
            if lab.kind != EPSILON:
                label["value"] = lab.value
            trans.append({"from": p, "label": label, "to": q})
        return {
            "states": list(self.states),
            "initial": self.initial,
            "accepting": sorted(self.accepting),
            "transitions": trans,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), separators=(",", ":"))

    @classmethod
    def from_json(cls, obj: dict) -> "VsetAutomaton":
        try:
            states = tuple(int(q) for q in obj["states"])
            initial = int(obj["initial"])
            accepting = frozenset(int(q) for q in obj["accepting"])
            trans = []
            for i, t in enumerate(obj["transitions"]):
                lab = t["label"]
                kind = lab["type"]
                if kind not in (SYMBOL, EPSILON, OPEN, CLOSE):
                    raise ContractViolation(f"/transitions/{i}/label/type: unknown {kind!r}")
                value = None if kind == EPSILON else lab["value"]
                if kind != EPSILON and (not isinstance(value, str) or not value):
                    raise ContractViolation(f"/transitions/{i}/label/value: missing")
                if kind == SYMBOL and len(value) != 1:
                    raise ContractViolation(f"/transitions/{i}/label/value: not one symbol")
                trans.append((int(t["from"]), Label(kind, value), int(t["to"])))
        except (KeyError, TypeError) as e:
            raise ContractViolation(f"malformed VA JSON: {e}") from None
        return cls(states, initial, accepting, tuple(trans))

    @classmethod
    def loads(cls, text: str) -> "VsetAutomaton":
        return cls.from_json(json.loads(text))


class Builder:
    """Incremental constructor producing contiguous state ids."""

    def __init__(self):
        self.count = 0
        self.trans: dict[Transition, None] = {}
        self.prov: dict[int, str] = {}

    def state(self, tag: str | None = None) -> int:
        q = self.count
        self.count += 1
        if tag is not None:
            self.prov[q] = tag
        return q

    def add(self, p: int, lab: Label, q: int) -> None:
        self.trans[(p, lab, q)] = None

    def build(self, initial: int, accepting: Iterable[int]) -> VsetAutomaton:
        return VsetAutomaton(
            tuple(range(self.count)),
            initial,
            frozenset(accepting),
            tuple(self.trans),
            self.prov or None,
        )


def empty_va() -> VsetAutomaton:
    return VsetAutomaton((0,), 0, frozenset(), ())


def renumber(A: VsetAutomaton) -> VsetAutomaton:
    """Copy with states 0..N-1 in BFS order from the initial state."""
    order = [A.initial]
    seen = {A.initial}
    i = 0
    while i < len(order):
        for _, q in A.out[order[i]]:
            if q not in seen:
                seen.add(q)
                order.append(q)
        i += 1
    order += [q for q in A.states if q not in seen]
    idx = {q: k for k, q in enumerate(order)}
    prov = {idx[q]: A.tag(q) for q in order} if A.provenance else None
    return VsetAutomaton(
        tuple(range(len(order))),
        0,
        frozenset(idx[q] for q in A.accepting),
        tuple((idx[p], lab, idx[q]) for p, lab, q in A.transitions),
        prov,
    )


def embed(b: Builder, A: VsetAutomaton, tag: str = "") -> dict[int, int]:
    """Copy A into builder b; returns the state map."""
    m = {q: b.state(f"{tag}{A.tag(q)}") for q in A.states}
    for p, lab, q in A.transitions:
        b.add(m[p], lab, m[q])
    return m


def union_all(automata: Sequence[VsetAutomaton], tags: Sequence[str] | None = None) -> VsetAutomaton:
    """Fresh initial state with epsilon edges to each operand."""
    b = Builder()
    q0 = b.state("init")
    acc = []
    for k, A in enumerate(automata):
        t = tags[k] if tags else f"{k}:"
        m = embed(b, A, t)
        b.add(q0, EPS, m[A.initial])
        acc.extend(m[q] for q in A.accepting)
    return b.build(q0, acc)


# ---------------------------------------------------------------- basics


def reachable(A: VsetAutomaton) -> set[int]:
    seen = {A.initial}
    stack = [A.initial]
    while stack:
        p = stack.pop()
        for _, q in A.out[p]:
            if q not in seen:
                seen.add(q)
                stack.append(q)
    return seen


def coreachable(A: VsetAutomaton) -> set[int]:
    seen = set(A.accepting)
    stack = list(seen)
    while stack:
        q = stack.pop()
        for _, p in A.inc[q]:
            if p not in seen:
                seen.add(p)
                stack.append(p)
    return seen


def trim(A: VsetAutomaton) -> VsetAutomaton:
    keep = reachable(A) & coreachable(A)
    if A.initial not in keep:
        prov = {A.initial: A.tag(A.initial)} if A.provenance else None
        return VsetAutomaton((A.initial,), A.initial, frozenset(), (), prov)
    if len(keep) == len(A.states):
        return A
    states = tuple(q for q in A.states if q in keep)
    trans = tuple(t for t in A.transitions if t[0] in keep and t[2] in keep)
    prov = {q: A.tag(q) for q in states} if A.provenance else None
    return VsetAutomaton(states, A.initial, A.accepting & keep, trans, prov)


def is_empty_language(A: VsetAutomaton) -> bool:
    return not (reachable(A) & A.accepting)


def project(A: VsetAutomaton, Y: Iterable[str]) -> VsetAutomaton:
    keep = frozenset(Y)
    trans = tuple(
        (p, EPS if lab.kind in (OPEN, CLOSE) and lab.value not in keep else lab, q)
        for p, lab, q in A.transitions
    )
    trans = tuple(dict.fromkeys(trans))
    return VsetAutomaton(A.states, A.initial, A.accepting, trans, A.provenance)


def remove_variables(A: VsetAutomaton, drop: Iterable[str]) -> VsetAutomaton:
    """Delete every transition operating on a variable in ``drop``."""
    ds = frozenset(drop)
    trans = tuple(
        t for t in A.transitions if not (t[1].kind in (OPEN, CLOSE) and t[1].value in ds)
    )
    return VsetAutomaton(A.states, A.initial, A.accepting, trans, A.provenance)


# ---------------------------------------------------------------- status analyses

# per-variable run status: waiting/unseen, open, closed, violated
_W, _O, _C, _BAD = 0, 1, 2, 3


def _step(status: int, lab: Label) -> int:
    if status == _BAD:
        return _BAD
    if lab.kind == OPEN:
        return _O if status == _W else _BAD
    if lab.kind == CLOSE:
        return _C if status == _O else _BAD
    return status


def _status_reach(A: VsetAutomaton, x: str, drop_invalid: bool) -> dict[int, set[int]]:
    """Forward reachable per-state status sets for variable x."""
    seen: dict[int, set[int]] = {q: set() for q in A.states}
    seen[A.initial].add(_W)
    stack = [(A.initial, _W)]
    while stack:
        p, s = stack.pop()
        for lab, q in A.out[p]:
            t = _step(s, lab) if lab.value == x and lab.kind in (OPEN, CLOSE) else s
            if drop_invalid and t == _BAD:
                continue
            if t not in seen[q]:
                seen[q].add(t)
                stack.append((q, t))
    return seen


def check_sequential(A: VsetAutomaton) -> bool:
    for x in A.vars:
        st = _status_reach(A, x, drop_invalid=False)
        for q in A.accepting:
            if st[q] & {_O, _BAD}:
                return False
    return True


def check_functional(A: VsetAutomaton) -> bool:
    if not check_sequential(A):
        return False
    for x in A.vars:
        st = _status_reach(A, x, drop_invalid=False)
        for q in A.accepting:
            if _W in st[q]:
                return False
    return True


def require_sequential(A: VsetAutomaton, what: str = "operation") -> None:
    if not check_sequential(A):
        raise ContractViolation(f"{what} requires a sequential VA")


U, O, C, D, W = "u", "o", "c", "d", "w"
_LABEL_OF = {
    frozenset({_W}): U,
    frozenset({_O}): O,
    frozenset({_C}): C,
    frozenset({_W, _C}): D,
}


@dataclass(frozen=True)
class ConfigTable:
    """Extended configuration labels on the trimmed automaton."""

    automaton: VsetAutomaton
    variables: tuple[str, ...]
    labels: dict[int, dict[str, str]]

    def label(self, q: int, x: str) -> str:
        return self.labels[q][x]

    def vector(self, q: int, xs: Sequence[str] | None = None) -> tuple[str, ...]:
        row = self.labels[q]
        return tuple(row[x] for x in (self.variables if xs is None else xs))


def _config_labels(T: VsetAutomaton, xs: Iterable[str]) -> dict[int, dict[str, str]]:
    labels: dict[int, dict[str, str]] = {q: {} for q in T.states}
    for x in xs:
        st = _status_reach(T, x, drop_invalid=True)
        for q in T.states:
            key = frozenset(st[q])
            lab = _LABEL_OF.get(key)
            if lab is None:
                if not key:  # only the lone initial state of an empty trim
                    lab = U
                else:
                    raise ContractViolation(
                        f"state {T.tag(q)} mixes statuses for {x}; input is not sequential"
                    )
            labels[q][x] = lab
    return labels


def extended_configs(A: VsetAutomaton, X: Iterable[str] | None = None) -> ConfigTable:
    require_sequential(A, "extended_configs")
    xs = tuple(sorted(A.vars if X is None else X))
    T = trim(A)
    return ConfigTable(T, xs, _config_labels(T, xs))


def is_semi_functional(A: VsetAutomaton, X: Iterable[str]) -> bool:
    table = extended_configs(A, X)
    return all(lab != D for row in table.labels.values() for lab in row.values())


def to_semi_functional(A: VsetAutomaton, X: Iterable[str]) -> VsetAutomaton:
    """Split every state labelled d, one variable at a time."""
    require_sequential(A, "to_semi_functional")
    cur = trim(A)
    for x in sorted(X):
        labels = {q: row[x] for q, row in _config_labels(cur, [x]).items()}
        if D not in labels.values():
            continue
        b = Builder()
        copies: dict[int, dict[str, int]] = {}
        for q in cur.states:
            if labels[q] == D:
                copies[q] = {U: b.state(f"{cur.tag(q)}^u"), C: b.state(f"{cur.tag(q)}^c")}
            else:
                copies[q] = {labels[q]: b.state(cur.tag(q))}
        code = {U: _W, O: _O, C: _C}
        back = {_W: U, _O: O, _C: C}
        for p, lab, q in cur.transitions:
            for s, p2 in copies[p].items():
                t = _step(code[s], lab) if lab.value == x and lab.kind in (OPEN, CLOSE) else code[s]
                if t == _BAD:
                    continue
                q2 = copies[q].get(back[t])
                if q2 is not None:
                    b.add(p2, lab, q2)
        q0 = copies[cur.initial].get(U) if labels[cur.initial] == D else copies[cur.initial][labels[cur.initial]]
        acc = [q2 for q in cur.accepting for q2 in copies[q].values()]
        cur = trim(b.build(q0, acc))
    return cur


def va_synchronized_for(A: VsetAutomaton, X: Iterable[str]) -> bool:
    require_sequential(A, "va_synchronized_for")
    xs = sorted(X)
    for x in xs:
        for kind in (OPEN, CLOSE):
            targets = {q for _, lab, q in A.transitions if lab.kind == kind and lab.value == x}
            if len(targets) > 1:
                return False
    table = extended_configs(A, [x for x in xs if x in A.vars])
    T = table.automaton
    for x in table.variables:
        if any(table.labels[q][x] == D for q in T.states):
            return False
        if len({table.labels[q][x] for q in T.accepting}) > 1:
            return False
    return True


# ---------------------------------------------------------------- Thompson


def compile_regex(alpha: Regex) -> VsetAutomaton:
    """Thompson construction; Bind(x, g) becomes |-x . g . -|x."""
    b = Builder()

    def go(node: Regex) -> tuple[int, int]:
        if isinstance(node, Symbol):
            s, e = b.state(), b.state()
            b.add(s, sym(node.char), e)
            return s, e
        if isinstance(node, Epsilon):
            s, e = b.state(), b.state()
            b.add(s, EPS, e)
            return s, e
        if isinstance(node, EmptySet):
            return b.state(), b.state()
        if isinstance(node, Bind):
            s = b.state()
            i, j = go(node.inner)
            e = b.state()
            b.add(s, op_open(node.var), i)
            b.add(j, op_close(node.var), e)
            return s, e
        if isinstance(node, Concatenation):
            s1, e1 = go(node.left)
            s2, e2 = go(node.right)
            b.add(e1, EPS, s2)
            return s1, e2
        if isinstance(node, Disjunction):
            s = b.state()
            s1, e1 = go(node.left)
            s2, e2 = go(node.right)
            e = b.state()
            b.add(s, EPS, s1)
            b.add(s, EPS, s2)
            b.add(e1, EPS, e)
            b.add(e2, EPS, e)
            return s, e
        if isinstance(node, Star):
            s = b.state()
            i, j = go(node.inner)
            e = b.state()
            b.add(s, EPS, i)
            b.add(s, EPS, e)
            b.add(j, EPS, i)
            b.add(j, EPS, e)
            return s, e
        raise TypeError(node)

    s, e = go(alpha)
    return b.build(s, [e])


# ---------------------------------------------------------------- ad-hoc paths


def _ops_at(m: Mapping) -> dict[int, list[Label]]:
    ops: dict[int, list[Label]] = {}
    for x, sp in m.items():
        ops.setdefault(sp.start, []).append(op_open(x))
        ops.setdefault(sp.end, []).append(op_close(x))
    for pos in ops:
        ops[pos].sort(key=lambda lab: (lab.value, lab.kind != OPEN))
    return ops


def mappings_to_va(M: Iterable[Mapping], d: Document, V: Iterable[str]) -> VsetAutomaton:
    """One straight-line path per mapping; correct on ``d`` only."""
    vs = frozenset(V)
    n = len(d)
    b = Builder()
    q0 = b.state("init")
    acc = []
    for k, m in enumerate(sorted(set(M))):
        if not m.domain <= vs:
            raise ContractViolation(f"mapping {m} binds variables outside {sorted(vs)}")
        for _, sp in m.items():
            Span(*sp).check(d)
        ops = _ops_at(m)
        cur = b.state(f"p{k}.0")
        b.add(q0, EPS, cur)
        for pos in range(1, n + 2):
            for lab in ops.get(pos, ()):
                nxt = b.state(f"p{k}")
                b.add(cur, lab, nxt)
                cur = nxt
            if pos <= n:
                nxt = b.state(f"p{k}")
                b.add(cur, sym(d[pos - 1]), nxt)
                cur = nxt
        acc.append(cur)
    return b.build(q0, acc)


# ---------------------------------------------------------------- oracle


def oracle_eval_va(A: VsetAutomaton, d: Document) -> frozenset[Mapping]:
    """All mappings of valid accepting runs, by exhaustive search.

    Works on arbitrary automata; search nodes carry the partial mapping so
    epsilon cycles terminate.
    """
    n = len(d)
    xs = sorted(A.vars)
    idx = {x: i for i, x in enumerate(xs)}
    start = (A.initial, 1, (0,) * len(xs), (0,) * len(xs))
    seen = {start}
    stack = [start]
    out: set[Mapping] = set()
    while stack:
        q, pos, opened, closed = stack.pop()
        if pos == n + 1 and q in A.accepting and all(
            (o == 0) == (c == 0) for o, c in zip(opened, closed)
        ):
            out.add(
                Mapping(
                    {x: Span(opened[i], closed[i]) for i, x in enumerate(xs) if closed[i]}
                )
            )
        for lab, r in A.out[q]:
            k = lab.kind
            if k == SYMBOL:
                if pos > n or d[pos - 1] != lab.value:
                    continue
                nxt = (r, pos + 1, opened, closed)
            elif k == EPSILON:
                nxt = (r, pos, opened, closed)
            elif k == OPEN:
                i = idx[lab.value]
                if opened[i]:
                    continue
                nxt = (r, pos, opened[:i] + (pos,) + opened[i + 1 :], closed)
            else:
                i = idx[lab.value]
                if not opened[i] or closed[i]:
                    continue
                nxt = (r, pos, opened, closed[:i] + (pos,) + closed[i + 1 :])
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return frozenset(out)


def ops_at_position(m: Mapping) -> dict[int, list[Label]]:
    return _ops_at(m)


__all__ = [
    "VsetAutomaton",
    "Label",
    "Builder",
    "ConfigTable",
    "EPS",
    "sym",
    "op_open",
    "op_close",
    "compile_regex",
    "check_sequential",
    "check_functional",
    "extended_configs",
    "is_semi_functional",
    "to_semi_functional",
    "project",
    "trim",
    "va_synchronized_for",
    "mappings_to_va",
    "oracle_eval_va",
    "union_all",
    "empty_va",
    "renumber",
    "SpanRangeError",
]
