"""Documents, spans, mappings and the compatibility algebra.

Spans are 1-based and end-exclusive: ``Span(i, j)`` denotes the symbols
``d[i-1:j-1]`` of a Python string ``d``.  Documents are plain ``str`` values;
their length is the number of code points.
"""

from __future__ import annotations

import json
from collections.abc import Iterable, Iterator
from typing import NamedTuple, Union

Document = str


class SpannerError(Exception):
    """Base class for every error raised by the package."""

    def to_json(self) -> dict:
        return {"error": type(self).__name__, "message": str(self)}


class ContractViolation(SpannerError, ValueError):
    """An operation was called on an input that violates its precondition."""


class SpanRangeError(SpannerError, IndexError):
    """A span does not fit the document it is used with."""


class PlanError(SpannerError):
    """A join or difference shares more variables than the allowed bound."""

    def __init__(self, message: str, count: int | None = None, bound: int | None = None, node: str | None = None):
        super().__init__(message)
        self.count = count
        self.bound = bound
        self.node = node

    def to_json(self) -> dict:
        out = super().to_json()
        for k in ("count", "bound", "node"):
            v = getattr(self, k)
            if v is not None:
                out[k] = v
        return out


class Span(NamedTuple):
    start: int
    end: int

    def check(self, d: Document | None = None) -> "Span":
        if not (1 <= self.start <= self.end):
            raise SpanRangeError(f"invalid span [{self.start},{self.end})")
        if d is not None and self.end > len(d) + 1:
            raise SpanRangeError(
                f"span [{self.start},{self.end}) exceeds document of length {len(d)}"
            )
        return self

    def __str__(self) -> str:
        return f"[{self.start},{self.end})"


def all_spans(d: Document) -> list[Span]:
    n = len(d)
    return [Span(i, j) for i in range(1, n + 2) for j in range(i, n + 2)]


def span_substring(d: Document, s: Span) -> str:
    Span(*s).check(d)
    return d[s[0] - 1 : s[1] - 1]


SpanLike = Union[Span, tuple[int, int], list]


class Mapping:
    """Immutable partial function from variable names to spans."""

    __slots__ = ("_items", "_hash")

    def __init__(self, bindings: dict | Iterable | None = None):
        if bindings is None:
            items = ()
        else:
            pairs = bindings.items() if isinstance(bindings, dict) else bindings
            seen: dict[str, Span] = {}
            for var, span in pairs:
                if not isinstance(var, str) or not var:
                    raise ContractViolation(f"invalid variable name {var!r}")
                sp = span if isinstance(span, Span) else Span(int(span[0]), int(span[1]))
                if var in seen and seen[var] != sp:
                    raise ContractViolation(f"variable {var} bound twice")
                seen[var] = sp
            items = tuple(sorted(seen.items()))
        self._items: tuple[tuple[str, Span], ...] = items
        self._hash = hash(items)

    @classmethod
    def _raw(cls, items: tuple) -> "Mapping":
        # items must already be sorted with unique keys
        m = cls.__new__(cls)
        m._items = items
        m._hash = hash(items)
        return m

    def items(self) -> tuple[tuple[str, Span], ...]:
        return self._items

    @property
    def domain(self) -> frozenset[str]:
        return frozenset(v for v, _ in self._items)

    def get(self, var: str, default=None):
        for v, s in self._items:
            if v == var:
                return s
        return default

    def __getitem__(self, var: str) -> Span:
        s = self.get(var)
        if s is None:
            raise KeyError(var)
        return s

    def __contains__(self, var: object) -> bool:
        return any(v == var for v, _ in self._items)

    def __iter__(self) -> Iterator[str]:
        return (v for v, _ in self._items)

    def __len__(self) -> int:
        return len(self._items)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Mapping):
            return NotImplemented
        return self._hash == other._hash and self._items == other._items

    def __lt__(self, other: "Mapping") -> bool:
        return self._items < other._items

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"Mapping({str(self)})"

    def __str__(self) -> str:
        return "{" + ", ".join(f"{v}={s}" for v, s in self._items) + "}"

    def to_json(self) -> dict[str, list[int]]:
        return {v: [s.start, s.end] for v, s in self._items}

    def to_json_line(self) -> str:
        return json.dumps(self.to_json(), separators=(",", ":"), sort_keys=True)

    @classmethod
    def from_json(cls, obj: dict) -> "Mapping":
        if not isinstance(obj, dict):
            raise ContractViolation("mapping JSON must be an object")
        out = {}
        for var, val in obj.items():
            if (
                not isinstance(val, list)
                or len(val) != 2
                or not all(isinstance(x, int) and not isinstance(x, bool) for x in val)
            ):
                raise ContractViolation(f"bad span for {var}: {val!r}")
            out[var] = Span(val[0], val[1]).check()
        return cls(out)


EMPTY_MAPPING = Mapping()

MappingSet = frozenset


def mappings_compatible(m1: Mapping, m2: Mapping) -> bool:
    if len(m2) < len(m1):
        m1, m2 = m2, m1
    for v, s in m1.items():
        t = m2.get(v)
        if t is not None and t != s:
            return False
    return True


def mapping_union(m1: Mapping, m2: Mapping) -> Mapping:
    if not mappings_compatible(m1, m2):
        raise ContractViolation(f"incompatible mappings {m1} and {m2}")
    merged = dict(m1.items())
    merged.update(m2.items())
    return Mapping._raw(tuple(sorted(merged.items())))


def restrict(m: Mapping, variables: Iterable[str]) -> Mapping:
    keep = set(variables)
    return Mapping._raw(tuple(it for it in m.items() if it[0] in keep))


def join_sets(s1: Iterable[Mapping], s2: Iterable[Mapping]) -> frozenset[Mapping]:
    """Natural join of two mapping sets (reference semantics)."""
    s2 = list(s2)
    return frozenset(
        mapping_union(a, b) for a in s1 for b in s2 if mappings_compatible(a, b)
    )


def minus_sets(s1: Iterable[Mapping], s2: Iterable[Mapping]) -> frozenset[Mapping]:
    """Difference: left mappings with no compatible right mapping."""
    s2 = list(s2)
    return frozenset(a for a in s1 if not any(mappings_compatible(a, b) for b in s2))


def project_set(s: Iterable[Mapping], variables: Iterable[str]) -> frozenset[Mapping]:
    keep = frozenset(variables)
    return frozenset(restrict(m, keep) for m in s)
