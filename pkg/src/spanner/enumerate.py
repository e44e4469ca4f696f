"""Duplicate-free streaming enumeration of vset-automaton results.

The search walks canonical event sequences position by position and keeps a
candidate set of operations only when the product of the automaton with the
per-variable status certifies an accepting completion.  The hot loop lives in
a compiled kernel when available (``spanner._kernel``) and falls back to the
pure-Python ``spanner._kernel_py``.
"""

from __future__ import annotations

import builtins
import os
from collections.abc import Iterator

from . import _kernel_py
from .core import ContractViolation, Document, Mapping, Span
from .va import EPSILON, OPEN, SYMBOL, VsetAutomaton, check_sequential, trim

try:
    if os.environ.get("SPANNER_PURE") == "1":
        raise ImportError("pure backend forced")
    from . import _kernel as _compiled
except ImportError:
    _compiled = None

BACKEND = "compiled" if _compiled is not None else "python"

# the compiled kernel packs masks into 64-bit integers and keeps one flag
# byte per product node and level
_MAX_COMPILED_VARS = 31
_MAX_COMPILED_CELLS = 1 << 27


def available_backends() -> list[str]:
    return (["compiled"] if _compiled is not None else []) + ["python"]


class Prepared:
    """Automaton and document lowered to the kernel's integer arrays."""

    def __init__(self, A: VsetAutomaton, d: Document):
        T = trim(A)
        states = list(T.states)
        idx = {q: i for i, q in builtins.enumerate(states)}
        self.variables = tuple(sorted(T.vars))
        vidx = {x: i for i, x in builtins.enumerate(self.variables)}
        symbols = sorted(T.alphabet)
        sidx = {c: i for i, c in builtins.enumerate(symbols)}
        n = len(states)
        eps: list[list[int]] = [[] for _ in range(n)]
        ops: list[list[tuple[int, int, int]]] = [[] for _ in range(n)]
        syms: list[dict[int, list[int]]] = [{} for _ in range(n)]
        for p, lab, q in T.transitions:
            i, j = idx[p], idx[q]
            if lab.kind == EPSILON:
                eps[i].append(j)
            elif lab.kind == SYMBOL:
                syms[i].setdefault(sidx[lab.value], []).append(j)
            else:
                ops[i].append((vidx[lab.value], 0 if lab.kind == OPEN else 1, j))
        self.args = (
            n,
            idx[T.initial],
            [q in T.accepting for q in states],
            eps,
            ops,
            syms,
            [sidx.get(c, -1) for c in d],
            len(self.variables),
        )

    def kernel(self, backend: str | None = None):
        nv = len(self.variables)
        want = backend or BACKEND
        if want == "compiled":
            cells = (3**nv) * max(self.args[0], 1) * (len(self.args[6]) + 1)
            fits = nv <= _MAX_COMPILED_VARS and cells <= _MAX_COMPILED_CELLS
            if _compiled is not None and fits:
                return _compiled.Enumerator(*self.args)
            if backend == "compiled" and _compiled is None:
                raise ContractViolation("compiled kernel not built")
        return _kernel_py.Enumerator(*self.args)


class MappingStream:
    """Pull-based iterator over ⟦A⟧(d); ``work`` counts product-node visits."""

    def __init__(self, A: VsetAutomaton, d: Document, backend: str | None = None):
        if not check_sequential(A):
            raise ContractViolation("enumerate requires a sequential VA")
        self.prepared = Prepared(A, d)
        self._k = self.prepared.kernel(backend)
        self._names = self.prepared.variables

    @property
    def work(self) -> int:
        return self._k.work

    @property
    def backend(self) -> str:
        return "python" if isinstance(self._k, _kernel_py.Enumerator) else "compiled"

    def __iter__(self) -> Iterator[Mapping]:
        return self

    def __next__(self) -> Mapping:
        spans = self._k.next_spans()
        if spans is None:
            raise StopIteration
        names = self._names
        return Mapping._raw(
            tuple((names[i], Span(*s)) for i, s in builtins.enumerate(spans) if s is not None)
        )


def enumerate(A: VsetAutomaton, d: Document, *, backend: str | None = None) -> MappingStream:
    """Stream every mapping of ⟦A⟧(d) exactly once in canonical order."""
    return MappingStream(A, d, backend)


def evaluate(A: VsetAutomaton, d: Document, *, backend: str | None = None) -> frozenset[Mapping]:
    return frozenset(enumerate(A, d, backend=backend))


def nonempty(A: VsetAutomaton, d: Document, *, backend: str | None = None) -> bool:
    if not check_sequential(A):
        raise ContractViolation("nonempty requires a sequential VA")
    return bool(Prepared(A, d).kernel(backend).nonempty())


def measure(A: VsetAutomaton, d: Document, *, backend: str | None = None, limit: int | None = None):
    """(count, max work between outputs, work before first output, order ok)."""
    if not check_sequential(A):
        raise ContractViolation("measure requires a sequential VA")
    return tuple(Prepared(A, d).kernel(backend).measure(limit))
