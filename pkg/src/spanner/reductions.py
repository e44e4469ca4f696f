"""Instance generators for the hardness reductions, plus a brute-force SAT oracle.

The generators are used as stress tests: on small CNF formulas the
nonemptiness of the produced spanner instance must agree with brute-force
satisfiability.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from .core import ContractViolation, SpannerError
from .regex import Bind, Epsilon, Regex, Star, Symbol, alt, cat, word

Literal = int
A, B = Symbol("a"), Symbol("b")
EPS = Epsilon()


class CnfError(SpannerError, ValueError):
    pass


@dataclass(frozen=True)
class CnfFormula:
    n: int
    clauses: tuple[tuple[Literal, ...], ...]

    def __post_init__(self):
        if self.n < 0:
            raise CnfError("negative variable count")
        for k, c in enumerate(self.clauses):
            if not c:
                raise CnfError(f"clause {k + 1} is empty")
            for lit in c:
                if not isinstance(lit, int) or lit == 0 or abs(lit) > self.n:
                    raise CnfError(f"clause {k + 1}: literal {lit!r} out of range 1..{self.n}")

    @classmethod
    def of(cls, n: int, clauses) -> "CnfFormula":
        return cls(n, tuple(tuple(c) for c in clauses))

    @property
    def m(self) -> int:
        return len(self.clauses)

    def satisfied_by(self, tau) -> bool:
        """``tau[i-1]`` is the truth value of variable i."""
        return all(any(tau[abs(l) - 1] == (l > 0) for l in c) for c in self.clauses)

    def is_3cnf(self) -> bool:
        return all(len(c) == 3 for c in self.clauses)

    def to_dimacs(self) -> str:
        lines = [f"p cnf {self.n} {self.m}"]
        lines += [" ".join(map(str, c)) + " 0" for c in self.clauses]
        return "\n".join(lines) + "\n"


def parse_dimacs(text: str) -> CnfFormula:
    n = None
    declared = None
    clauses: list[tuple[int, ...]] = []
    cur: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise CnfError(f"line {lineno}: bad problem line {line!r}")
            try:
                n, declared = int(parts[2]), int(parts[3])
            except ValueError:
                raise CnfError(f"line {lineno}: bad problem line {line!r}") from None
            continue
        if n is None:
            raise CnfError(f"line {lineno}: clause before problem line")
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise CnfError(f"line {lineno}: bad literal {tok!r}") from None
            if lit == 0:
                clauses.append(tuple(cur))
                cur = []
            else:
                cur.append(lit)
    if n is None:
        raise CnfError("missing problem line")
    if cur:
        clauses.append(tuple(cur))
    if declared is not None and declared != len(clauses):
        raise CnfError(f"problem line declares {declared} clauses, found {len(clauses)}")
    return CnfFormula(n, tuple(clauses))


def pad_to_3(phi: CnfFormula) -> CnfFormula:
    """Repeat literals so every clause has exactly three."""
    return CnfFormula(phi.n, tuple(tuple((c * 3)[:3]) for c in phi.clauses))


def sat_bruteforce(phi: CnfFormula, weight: int | None = None) -> bool:
    if phi.n > 20:
        raise ContractViolation(f"brute force is capped at 20 variables, got {phi.n}")
    if weight is not None:
        if weight < 0 or weight > phi.n:
            return False
        for ones in itertools.combinations(range(phi.n), weight):
            tau = [False] * phi.n
            for i in ones:
                tau[i] = True
            if phi.satisfied_by(tau):
                return True
        return False
    return any(phi.satisfied_by(t) for t in itertools.product((False, True), repeat=phi.n))


def _require_3cnf(phi: CnfFormula) -> None:
    if not phi.is_3cnf():
        raise CnfError("expected a 3CNF formula (pad shorter clauses with pad_to_3)")


def _clause_literals(c) -> dict[int, bool] | None:
    """Variable -> sign for a clause, or None for a tautology."""
    out: dict[int, bool] = {}
    for lit in c:
        v, pos = abs(lit), lit > 0
        if out.get(v, pos) != pos:
            return None
        out[v] = pos
    return out


def literal_var(i: int, j: int, value: bool) -> str:
    """Name of the variable that records clause j's view of x_i being ``value``."""
    return f"x{i}_{j}_{'t' if value else 'f'}"


# ---------------------------------------------------------------- join, d = a


def gen_join_3sat(phi: CnfFormula) -> tuple[Regex, Regex, str]:
    _require_3cnf(phi)
    m = phi.m

    def block(i, value):
        return cat(*(Bind(literal_var(i, j, value), EPS) for j in range(1, m + 1)))

    g1 = cat(*(alt(block(i, True), block(i, False)) for i in range(1, phi.n + 1)), A)
    deltas = []
    for j, c in enumerate(phi.clauses, 1):
        lits = list(dict.fromkeys(c))
        deltas.append(alt(*(Bind(literal_var(abs(l), j, l > 0), EPS) for l in lits)))
    g2 = cat(A, *deltas)
    return g1, g2, "a"


# ---------------------------------------------------------------- difference, d = a^n


def var_name(i: int) -> str:
    return f"x{i}"


def _beta(i: int) -> Regex:
    # x_i = [i,i> encodes false, [i,i+1> encodes true
    return alt(cat(Bind(var_name(i), EPS), A), Bind(var_name(i), A))


def _delta(i: int, positive: bool) -> Regex:
    # the falsifying value of the literal
    return cat(Bind(var_name(i), EPS), A) if positive else Bind(var_name(i), A)


def gen_diff_3sat(phi: CnfFormula) -> tuple[Regex, Regex, str]:
    _require_3cnf(phi)
    n = phi.n
    g1 = cat(*(_beta(i) for i in range(1, n + 1)))
    parts = []
    for c in phi.clauses:
        lits = _clause_literals(c)
        if lits is None:
            continue
        parts.append(cat(*(_delta(i, lits[i]) if i in lits else _beta(i) for i in range(1, n + 1))))
    return g1, alt(*parts), "a" * n


def decode_diff_assignment(mu, n: int) -> list[bool]:
    """Truth assignment encoded by a mapping of the difference instances."""
    return [mu[var_name(i)].end > mu[var_name(i)].start for i in range(1, n + 1)]


# ---------------------------------------------------------------- bounded occurrences


def gen_diff_bounded_occ(phi: CnfFormula) -> tuple[Regex, Regex, str]:
    """Variant over d = (bab)^n where every variable occurs in at most three disjuncts."""
    n = phi.n
    occ = [0] * (n + 1)
    for k, c in enumerate(phi.clauses, 1):
        if not 1 <= len(c) <= 3:
            raise CnfError(f"clause {k} has {len(c)} literals, expected 2 or 3")
        for v in {abs(l) for l in c}:
            occ[v] += 1
    bad = [v for v in range(1, n + 1) if occ[v] > 3]
    if bad:
        raise CnfError(f"variable x{bad[0]} occurs in {occ[bad[0]]} clauses, at most 3 allowed")
    bab = word("bab")
    astar = Star(A)
    g1 = cat(*(cat(B, Bind(var_name(i), astar), astar, B) for i in range(1, n + 1)))

    def delta(i, positive):
        if positive:
            return cat(B, Bind(var_name(i), EPS), A, B)
        return cat(B, Bind(var_name(i), A), B)

    parts = []
    for c in phi.clauses:
        lits = _clause_literals(c)
        if lits is None:
            continue
        parts.append(cat(*(delta(i, lits[i]) if i in lits else bab for i in range(1, n + 1))))
    return g1, alt(*parts), "bab" * n


def disjunct_occurrences(alpha: Regex) -> dict[str, int]:
    """For each variable, the number of top-level disjuncts mentioning it."""
    from .regex import disjuncts

    out: dict[str, int] = {}
    for g in disjuncts(alpha):
        for x in g.vars:
            out[x] = out.get(x, 0) + 1
    return out


# ---------------------------------------------------------------- weighted, k shared variables


def block_codes(n: int) -> list[str]:
    """n distinct fixed-length codes over {a, b}; all start with ``ab``."""
    width = math.ceil(math.log2(n)) if n > 1 else 0
    codes = []
    for i in range(n):
        bits = format(i, "b").zfill(width) if width else ""
        codes.append("ab" + bits.replace("0", "a").replace("1", "b"))
    return codes


def weighted_var(u: int) -> str:
    return f"y{u}"


def gen_diff_weighted(phi: CnfFormula, p: int) -> tuple[Regex, Regex, str]:
    """Instance whose difference is nonempty iff phi has a model with exactly p true variables.

    ``y_u`` marks the block of the u-th true variable.  Each clause
    contributes the weight-p assignments falsifying it: no positive variable
    of the clause is chosen and all negative ones are.
    """
    _require_3cnf(phi)
    n = phi.n
    if not 0 <= p <= n:
        raise CnfError(f"weight {p} outside 0..{n}")
    codes = block_codes(n)
    blocks = [word(s) for s in codes]
    any_block = alt(*blocks)
    filler = Star(any_block)

    def chain(choice):
        # choice[u]: regex bound to y_{u+1}
        parts = [filler]
        for u, r in enumerate(choice, 1):
            parts += [Bind(weighted_var(u), r), filler]
        return cat(*parts)

    a1 = chain([any_block] * p)
    parts = []
    for c in phi.clauses:
        lits = _clause_literals(c)
        if lits is None:
            continue
        pos = {i for i, s in lits.items() if s}
        neg = sorted(i for i, s in lits.items() if not s)
        if len(neg) > p:
            continue
        rest = alt(*(blocks[j - 1] for j in range(1, n + 1) if j not in pos))
        for us in itertools.combinations(range(p), len(neg)):
            choice = [rest] * p
            for u, j in zip(us, neg):
                choice[u] = blocks[j - 1]
            parts.append(chain(choice))
    return a1, alt(*parts), "".join(codes)


def weighted_span(j: int, n: int):
    """Span of the j-th block in the document of :func:`gen_diff_weighted`."""
    from .core import Span

    w = len(block_codes(n)[0])
    return Span((j - 1) * w + 1, j * w + 1)
