"""Regex formulas: AST, concrete syntax, class checks and reference semantics."""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass
from functools import cached_property

from .core import ContractViolation, Document, Mapping, Span, SpannerError

RESERVED_PREFIX = "__dummy_"
_META = set("|*(){}\\.")


class RegexSyntaxError(SpannerError, ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at offset {position}")
        self.position = position

    def to_json(self) -> dict:
        d = super().to_json()
        d["position"] = self.position
        return d


class Regex:
    """Base class of regex-formula nodes."""

    @cached_property
    def vars(self) -> frozenset[str]:
        out: set[str] = set()
        stack = [self]
        while stack:
            node = stack.pop()
            if isinstance(node, Bind):
                out.add(node.var)
            stack.extend(node.children())
        return frozenset(out)

    def children(self) -> tuple["Regex", ...]:
        return ()

    def size(self) -> int:
        return 1 + sum(c.size() for c in self.children())

    def __str__(self) -> str:
        return to_text(self)


@dataclass(frozen=True, eq=True)
class EmptySet(Regex):
    pass


@dataclass(frozen=True, eq=True)
class Epsilon(Regex):
    pass


@dataclass(frozen=True, eq=True)
class Symbol(Regex):
    char: str


@dataclass(frozen=True, eq=True)
class Disjunction(Regex):
    left: Regex
    right: Regex

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True, eq=True)
class Concatenation(Regex):
    left: Regex
    right: Regex

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True, eq=True)
class Star(Regex):
    inner: Regex

    def children(self):
        return (self.inner,)


@dataclass(frozen=True, eq=True)
class Bind(Regex):
    var: str
    inner: Regex

    def children(self):
        return (self.inner,)


def _balanced(parts, node_type):
    if len(parts) == 1:
        return parts[0]
    mid = len(parts) // 2
    return node_type(_balanced(parts[:mid], node_type), _balanced(parts[mid:], node_type))


def alt(*parts: Regex) -> Regex:
    """Balanced disjunction; the empty disjunction is the empty set."""
    if not parts:
        return EmptySet()
    return _balanced(parts, Disjunction)


def cat(*parts: Regex) -> Regex:
    """Balanced concatenation; the empty concatenation is epsilon."""
    if not parts:
        return Epsilon()
    return _balanced(parts, Concatenation)


def word(s: str) -> Regex:
    return cat(*(Symbol(c) for c in s))


def disjuncts(alpha: Regex) -> list[Regex]:
    """Flatten the top-level disjunction tree, left to right."""
    out, stack = [], [alpha]
    while stack:
        node = stack.pop()
        if isinstance(node, Disjunction):
            stack.append(node.right)
            stack.append(node.left)
        else:
            out.append(node)
    return out


def symbols_of(alpha: Regex) -> set[str]:
    out, stack = set(), [alpha]
    while stack:
        node = stack.pop()
        if isinstance(node, Symbol):
            out.add(node.char)
        stack.extend(node.children())
    return out


# ---------------------------------------------------------------- syntax


class _Dot(Regex):
    pass


_DOT = _Dot()


def _is_ident_start(c: str) -> bool:
    return c == "_" or ("A" <= c <= "Z") or ("a" <= c <= "z")


def _is_ident_char(c: str) -> bool:
    return _is_ident_start(c) or ("0" <= c <= "9")


class _Parser:
    def __init__(self, text: str, literal_whitespace: bool):
        self.text = text
        self.pos = 0
        self.lit_ws = literal_whitespace
        self.symbols: list[tuple[str, int]] = []

    def skip(self):
        if not self.lit_ws:
            t = self.text
            while self.pos < len(t) and t[self.pos].isspace():
                self.pos += 1

    def peek(self) -> str | None:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else None

    def expect(self, ch: str):
        if self.peek() != ch:
            found = "end of input" if self.peek() is None else repr(self.peek())
            raise RegexSyntaxError(f"expected {ch!r}, found {found}", self.pos)
        self.pos += 1

    def parse(self) -> Regex:
        node = self.alt()
        if self.peek() is not None:
            raise RegexSyntaxError(f"unexpected {self.peek()!r}", self.pos)
        return node

    def alt(self) -> Regex:
        parts = [self.cat()]
        while self.peek() == "|":
            self.pos += 1
            parts.append(self.cat())
        return alt(*parts)

    def cat(self) -> Regex:
        parts = []
        while True:
            c = self.peek()
            if c is None or c in "|)}":
                break
            parts.append(self.rep())
        if not parts:
            raise RegexSyntaxError("empty expression", self.pos)
        return cat(*parts)

    def rep(self) -> Regex:
        node = self.atom()
        while self.peek() == "*":
            self.pos += 1
            node = Star(node)
        return node

    def atom(self) -> Regex:
        t = self.text
        c = self.peek()
        start = self.pos
        if c == "(":
            self.pos += 1
            node = self.alt()
            self.expect(")")
            return node
        if c == ".":
            self.pos += 1
            return _DOT
        if c == "\\":
            if self.pos + 1 >= len(t):
                raise RegexSyntaxError("dangling escape", self.pos + 1)
            e = t[self.pos + 1]
            self.pos += 2
            if e == "e":
                return Epsilon()
            if e == "0":
                return EmptySet()
            ch = {"n": "\n", "t": "\t", "r": "\r"}.get(e, e)
            self.symbols.append((ch, start))
            return Symbol(ch)
        if c in ("*", "{", "}", ")", "|"):
            raise RegexSyntaxError(f"unexpected {c!r}", self.pos)
        if _is_ident_start(c):
            end = self.pos + 1
            while end < len(t) and _is_ident_char(t[end]):
                end += 1
            name = t[self.pos : end]
            save = self.pos
            self.pos = end
            if self.peek() == "{":
                if name.startswith(RESERVED_PREFIX):
                    raise RegexSyntaxError(f"reserved variable name {name!r}", save)
                self.pos += 1
                inner = self.alt()
                self.expect("}")
                return Bind(name, inner)
            self.pos = save
        self.pos += 1
        self.symbols.append((c, start))
        return Symbol(c)


def _substitute_dot(node: Regex, dot: Regex) -> Regex:
    if node is _DOT:
        return dot
    if isinstance(node, Disjunction):
        return Disjunction(_substitute_dot(node.left, dot), _substitute_dot(node.right, dot))
    if isinstance(node, Concatenation):
        return Concatenation(_substitute_dot(node.left, dot), _substitute_dot(node.right, dot))
    if isinstance(node, Star):
        return Star(_substitute_dot(node.inner, dot))
    if isinstance(node, Bind):
        return Bind(node.var, _substitute_dot(node.inner, dot))
    return node


def _has_dot(node: Regex) -> bool:
    return node is _DOT or any(_has_dot(c) for c in node.children())


def parse_regex(
    text: str,
    alphabet: Iterable[str] | None = None,
    *,
    literal_whitespace: bool = False,
) -> Regex:
    """Parse the concrete pattern syntax.

    Whitespace separates tokens unless ``literal_whitespace`` is set; use
    ``\\ `` for a literal space.  With ``alphabet=None`` the alphabet is the
    set of literal symbols of the pattern.
    """
    p = _Parser(text, literal_whitespace)
    ast = p.parse()
    if alphabet is None:
        sigma = sorted({s for s, _ in p.symbols})
    else:
        sigma = sorted(set(alphabet))
        allowed = set(sigma)
        for s, pos in p.symbols:
            if s not in allowed:
                raise RegexSyntaxError(f"symbol {s!r} outside the alphabet", pos)
    if _has_dot(ast):
        ast = _substitute_dot(ast, alt(*(Symbol(s) for s in sigma)))
    return ast


def pattern_symbols(text: str, *, literal_whitespace: bool = False) -> set[str]:
    p = _Parser(text, literal_whitespace)
    p.parse()
    return {s for s, _ in p.symbols}


def _escape(c: str) -> str:
    if c == "\n":
        return "\\n"
    if c == "\t":
        return "\\t"
    if c == "\r":
        return "\\r"
    if c in _META or c.isspace():
        return "\\" + c
    return c


def to_text(alpha: Regex) -> str:
    """Render in the concrete syntax; ``parse_regex(to_text(a)) == a`` up to
    re-association of concatenation and disjunction."""

    def go(node: Regex, ctx: int) -> str:
        # ctx: 0 = alternation, 1 = concatenation operand, 2 = star operand
        if isinstance(node, EmptySet):
            return "\\0"
        if isinstance(node, Epsilon):
            return "\\e"
        if isinstance(node, Symbol):
            return _escape(node.char)
        if isinstance(node, Bind):
            return f"{node.var}{{{go(node.inner, 0)}}}"
        if isinstance(node, Star):
            return go(node.inner, 2) + "*"
        if isinstance(node, Concatenation):
            s = go(node.left, 1) + " " + go(node.right, 1)
            return f"({s})" if ctx >= 2 else s
        if isinstance(node, Disjunction):
            s = go(node.left, 0) + "|" + go(node.right, 0)
            return f"({s})" if ctx >= 1 else s
        raise TypeError(node)

    return go(alpha, 0)


# ---------------------------------------------------------------- classes


@dataclass(frozen=True)
class ClassReport:
    functional: bool
    sequential: bool
    disjunctive_functional: bool
    disjunction_free: bool

    def to_json(self) -> dict:
        return {
            "functional": self.functional,
            "sequential": self.sequential,
            "disjunctive_functional": self.disjunctive_functional,
            "disjunction_free": self.disjunction_free,
        }


def is_functional(alpha: Regex) -> bool:
    memo: dict[int, bool] = {}

    def f(node: Regex) -> bool:
        key = id(node)
        if key in memo:
            return memo[key]
        if isinstance(node, (EmptySet, Epsilon, Symbol)):
            r = True
        elif isinstance(node, Disjunction):
            r = f(node.left) and f(node.right) and node.left.vars == node.right.vars
        elif isinstance(node, Concatenation):
            r = f(node.left) and f(node.right) and not (node.left.vars & node.right.vars)
        elif isinstance(node, Star):
            r = f(node.inner) and not node.inner.vars
        elif isinstance(node, Bind):
            r = f(node.inner) and node.var not in node.inner.vars
        else:
            raise TypeError(node)
        memo[key] = r
        return r

    return f(alpha)


def is_sequential(alpha: Regex) -> bool:
    stack = [alpha]
    while stack:
        node = stack.pop()
        if isinstance(node, Concatenation) and node.left.vars & node.right.vars:
            return False
        if isinstance(node, Star) and node.inner.vars:
            return False
        if isinstance(node, Bind) and node.var in node.inner.vars:
            return False
        stack.extend(node.children())
    return True


def is_disjunction_free(alpha: Regex) -> bool:
    stack = [alpha]
    while stack:
        node = stack.pop()
        if isinstance(node, Disjunction):
            return False
        stack.extend(node.children())
    return True


def classify(alpha: Regex) -> ClassReport:
    func = is_functional(alpha)
    seq = is_sequential(alpha)
    dfunc = func or all(is_functional(g) for g in disjuncts(alpha))
    return ClassReport(
        functional=func,
        sequential=seq,
        disjunctive_functional=dfunc,
        disjunction_free=is_disjunction_free(alpha),
    )


def synchronized_for(alpha: Regex, X: Iterable[str]) -> bool:
    if not is_sequential(alpha):
        raise ContractViolation("synchronized_for requires a sequential formula")
    xs = frozenset(X)
    stack = [alpha]
    while stack:
        node = stack.pop()
        if isinstance(node, Disjunction) and (node.left.vars | node.right.vars) & xs:
            return False
        stack.extend(node.children())
    return True


# ---------------------------------------------------------------- semantics


def _merge(a: Mapping, b: Mapping) -> Mapping | None:
    """Union of two mappings with disjoint domains, else None."""
    if not a.items():
        return b
    if not b.items():
        return a
    da = {v for v, _ in a.items()}
    if any(v in da for v, _ in b.items()):
        return None
    return Mapping._raw(tuple(sorted(a.items() + b.items())))


def oracle_eval(alpha: Regex, d: Document) -> frozenset[Mapping]:
    """Reference semantics by structural recursion over spans.

    Exponential in the worst case; intended for small inputs only.
    """
    n = len(d)
    memo: dict[tuple[int, int, int], frozenset[Mapping]] = {}
    empty = frozenset({Mapping()})
    none: frozenset[Mapping] = frozenset()

    def star_column(node: Star, j: int) -> None:
        # fills memo for every i <= j, processing i descending
        for i in range(j, 0, -1):
            acc: set[Mapping] = set(empty) if i == j else set()
            for k in range(i + 1, j + 1):
                rest = memo[(id(node), k, j)]
                if not rest:
                    continue
                for m1 in ev(node.inner, i, k):
                    for m2 in rest:
                        m = _merge(m1, m2)
                        if m is not None:
                            acc.add(m)
            loop = ev(node.inner, i, i)
            if loop:
                changed = True
                while changed:
                    changed = False
                    for m1 in loop:
                        for m2 in list(acc):
                            m = _merge(m1, m2)
                            if m is not None and m not in acc:
                                acc.add(m)
                                changed = True
            memo[(id(node), i, j)] = frozenset(acc)

    def ev(node: Regex, i: int, j: int) -> frozenset[Mapping]:
        key = (id(node), i, j)
        hit = memo.get(key)
        if hit is not None:
            return hit
        if isinstance(node, EmptySet):
            r = none
        elif isinstance(node, Epsilon):
            r = empty if i == j else none
        elif isinstance(node, Symbol):
            r = empty if j == i + 1 and d[i - 1] == node.char else none
        elif isinstance(node, Disjunction):
            r = ev(node.left, i, j) | ev(node.right, i, j)
        elif isinstance(node, Concatenation):
            acc: set[Mapping] = set()
            for k in range(i, j + 1):
                left = ev(node.left, i, k)
                if not left:
                    continue
                right = ev(node.right, k, j)
                for m1 in left:
                    for m2 in right:
                        m = _merge(m1, m2)
                        if m is not None:
                            acc.add(m)
            r = frozenset(acc)
        elif isinstance(node, Star):
            star_column(node, j)
            return memo[key]
        elif isinstance(node, Bind):
            inner = ev(node.inner, i, j)
            b = Mapping({node.var: Span(i, j)})
            r = frozenset(
                m2 for m2 in (_merge(m, b) for m in inner if node.var not in m) if m2 is not None
            )
        else:
            raise TypeError(node)
        memo[key] = r
        return r

    return ev(alpha, 1, n + 1)
