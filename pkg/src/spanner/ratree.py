"""Relational-algebra trees over spanners: parsing, planning and evaluation.

An RA tree has placeholder leaves; an instantiation binds every placeholder
to a regex formula, a VA file, or an external black-box program.  The planner
counts the variables shared by the two subtrees of every join and difference
and refuses the query when a count exceeds the bound ``k``.
"""

from __future__ import annotations

import json
import subprocess
from collections.abc import Iterator
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import enumerate as _enum
from .algebra import (
    DisjunctiveFunctionalVa,
    disjunctive_from_regex,
    join_disjunctive,
    join_fpt,
    union_va,
)
from .core import ContractViolation, Document, Mapping, PlanError, SpannerError, Span
from .difference import difference_adhoc, difference_synchronized
from .regex import Regex, classify, parse_regex, pattern_symbols, synchronized_for
from .va import (
    VsetAutomaton,
    check_functional,
    check_sequential,
    compile_regex,
    mappings_to_va,
    project,
    to_semi_functional,
    trim,
    va_synchronized_for,
)

DEFAULT_K = 3
BLACKBOX_WORKERS = 4


class RaTreeError(SpannerError, ValueError):
    def __init__(self, message: str, pointer: str = ""):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer

    def to_json(self) -> dict:
        return {**super().to_json(), "pointer": self.pointer or "/"}


class BlackBoxError(SpannerError):
    def __init__(self, message: str, placeholder: str | None = None):
        super().__init__(f"black box {placeholder!r}: {message}" if placeholder else message)
        self.placeholder = placeholder

    def to_json(self) -> dict:
        out = super().to_json()
        if self.placeholder is not None:
            out["placeholder"] = self.placeholder
        return out


# ---------------------------------------------------------------- trees


@dataclass(frozen=True)
class Leaf:
    id: str
    pointer: str = field(default="", compare=False)


@dataclass(frozen=True)
class Union:
    left: "RaTree"
    right: "RaTree"
    pointer: str = field(default="", compare=False)


@dataclass(frozen=True)
class Join:
    left: "RaTree"
    right: "RaTree"
    pointer: str = field(default="", compare=False)


@dataclass(frozen=True)
class Difference:
    left: "RaTree"
    right: "RaTree"
    pointer: str = field(default="", compare=False)


@dataclass(frozen=True)
class Project:
    vars: frozenset[str]
    child: "RaTree"
    pointer: str = field(default="", compare=False)


RaTree = Leaf | Union | Join | Difference | Project
_BINARY = {"union": Union, "join": Join, "difference": Difference}


def placeholders(t: RaTree) -> list[str]:
    if isinstance(t, Leaf):
        return [t.id]
    if isinstance(t, Project):
        return placeholders(t.child)
    return placeholders(t.left) + placeholders(t.right)


def op_name(t: RaTree) -> str:
    return "leaf" if isinstance(t, Leaf) else type(t).__name__.lower()


def parse_ra_tree(obj) -> RaTree:
    """Build a tree from its JSON form (a string or already-decoded object)."""
    if isinstance(obj, (str, bytes)):
        try:
            obj = json.loads(obj)
        except json.JSONDecodeError as e:
            raise RaTreeError(f"invalid JSON: {e}") from None

    def go(node, ptr: str) -> RaTree:
        if not isinstance(node, dict):
            raise RaTreeError("expected an object", ptr)
        if "leaf" in node:
            extra = set(node) - {"leaf"}
            if extra:
                raise RaTreeError(f"unexpected keys {sorted(extra)} in a leaf", ptr)
            if not isinstance(node["leaf"], str) or not node["leaf"]:
                raise RaTreeError("placeholder id must be a nonempty string", ptr + "/leaf")
            return Leaf(node["leaf"], ptr)
        op = node.get("op")
        if op == "project":
            if set(node) != {"op", "vars", "child"}:
                raise RaTreeError("project takes exactly 'vars' and one 'child'", ptr)
            vs = node["vars"]
            if not isinstance(vs, list) or not all(isinstance(v, str) and v for v in vs):
                raise RaTreeError("vars must be a list of variable names", ptr + "/vars")
            return Project(frozenset(vs), go(node["child"], ptr + "/child"), ptr)
        if op in _BINARY:
            if set(node) != {"op", "left", "right"}:
                raise RaTreeError(f"{op} takes exactly 'left' and 'right'", ptr)
            return _BINARY[op](go(node["left"], ptr + "/left"), go(node["right"], ptr + "/right"), ptr)
        raise RaTreeError(f"unknown operator {op!r}", ptr + "/op")

    tree = go(obj, "")
    seen: set[str] = set()
    for pid in placeholders(tree):
        if pid in seen:
            raise RaTreeError(f"duplicate placeholder {pid!r}")
        seen.add(pid)
    return tree


def tree_to_json(t: RaTree) -> dict:
    if isinstance(t, Leaf):
        return {"leaf": t.id}
    if isinstance(t, Project):
        return {"op": "project", "vars": sorted(t.vars), "child": tree_to_json(t.child)}
    return {"op": op_name(t), "left": tree_to_json(t.left), "right": tree_to_json(t.right)}


# ---------------------------------------------------------------- instantiations


@dataclass(frozen=True)
class BlackBoxSpec:
    cmd: tuple[str, ...]
    vars: frozenset[str]
    degree: int
    timeout: float = 30.0

    def __post_init__(self):
        if not self.cmd:
            raise ContractViolation("black box needs a command")
        if self.degree < 0 or self.degree > len(self.vars):
            raise ContractViolation(f"degree {self.degree} exceeds the {len(self.vars)} declared variables")


@dataclass(frozen=True)
class RegexSource:
    text: str
    alphabet: frozenset[str] | None = None
    literal_whitespace: bool = False

    def symbols(self) -> set[str]:
        return pattern_symbols(self.text, literal_whitespace=self.literal_whitespace)

    def parse(self, alphabet=None) -> Regex:
        sigma = self.alphabet if self.alphabet is not None else alphabet
        return parse_regex(self.text, sigma, literal_whitespace=self.literal_whitespace)


@dataclass(frozen=True)
class VaSource:
    automaton: VsetAutomaton
    path: str | None = None


Source = RegexSource | VaSource | BlackBoxSpec


@dataclass(frozen=True)
class Instantiation:
    leaves: dict[str, Source]

    def __getitem__(self, pid: str) -> Source:
        return self.leaves[pid]

    def check_total(self, tree: RaTree) -> None:
        missing = [p for p in placeholders(tree) if p not in self.leaves]
        if missing:
            raise RaTreeError(f"placeholder {missing[0]!r} has no instantiation", "/" + missing[0])

    def symbols(self) -> set[str]:
        out: set[str] = set()
        for src in self.leaves.values():
            if isinstance(src, RegexSource):
                out |= src.symbols()
            elif isinstance(src, VaSource):
                out |= src.automaton.alphabet
        return out


def load_instantiation(
    obj, base_dir: str | Path | None = None, *, literal_whitespace: bool = False
) -> Instantiation:
    """Decode an instantiation; VA paths are relative to ``base_dir``."""
    if isinstance(obj, (str, bytes)):
        try:
            obj = json.loads(obj)
        except json.JSONDecodeError as e:
            raise RaTreeError(f"invalid JSON: {e}") from None
    if not isinstance(obj, dict):
        raise RaTreeError("instantiation must be an object")
    base = Path(base_dir) if base_dir is not None else Path.cwd()
    leaves: dict[str, Source] = {}
    for pid, spec in obj.items():
        ptr = "/" + pid.replace("~", "~0").replace("/", "~1")
        if not isinstance(spec, dict) or len(set(spec) & {"regex", "va", "blackbox"}) != 1:
            raise RaTreeError("expected exactly one of 'regex', 'va', 'blackbox'", ptr)
        if "regex" in spec:
            text = spec["regex"]
            if not isinstance(text, str):
                raise RaTreeError("regex must be a string", ptr + "/regex")
            sigma = spec.get("alphabet")
            if sigma is not None and not isinstance(sigma, str):
                raise RaTreeError("alphabet must be a string of symbols", ptr + "/alphabet")
            src = RegexSource(text, frozenset(sigma) if sigma else None, literal_whitespace)
            try:
                src.parse()
            except SpannerError as e:
                raise RaTreeError(str(e), ptr + "/regex") from None
            leaves[pid] = src
        elif "va" in spec:
            v = spec["va"]
            try:
                if isinstance(v, str):
                    path = base / v
                    A = VsetAutomaton.loads(path.read_text(encoding="utf-8"))
                    leaves[pid] = VaSource(A, str(path))
                else:
                    leaves[pid] = VaSource(VsetAutomaton.from_json(v))
            except (OSError, ValueError) as e:
                raise RaTreeError(f"cannot load VA: {e}", ptr + "/va") from None
        else:
            bb = spec["blackbox"]
            if not isinstance(bb, dict):
                raise RaTreeError("blackbox must be an object", ptr + "/blackbox")
            cmd, vs, deg = bb.get("cmd"), bb.get("vars"), bb.get("degree")
            if not isinstance(cmd, list) or not cmd or not all(isinstance(c, str) for c in cmd):
                raise RaTreeError("cmd must be a nonempty list of strings", ptr + "/blackbox/cmd")
            if not isinstance(vs, list) or not all(isinstance(x, str) and x for x in vs):
                raise RaTreeError("vars must be a list of names", ptr + "/blackbox/vars")
            if not isinstance(deg, int) or isinstance(deg, bool):
                raise RaTreeError("degree bound is required", ptr + "/blackbox/degree")
            timeout = bb.get("timeout", 30.0)
            try:
                leaves[pid] = BlackBoxSpec(tuple(cmd), frozenset(vs), deg, float(timeout))
            except ContractViolation as e:
                raise RaTreeError(str(e), ptr + "/blackbox") from None
    return Instantiation(leaves)


# ---------------------------------------------------------------- black boxes


def run_blackbox(spec: BlackBoxSpec, d: Document, placeholder: str | None = None) -> frozenset[Mapping]:
    try:
        proc = subprocess.run(
            list(spec.cmd),
            input=d.encode("utf-8"),
            capture_output=True,
            timeout=spec.timeout,
        )
    except subprocess.TimeoutExpired:
        raise BlackBoxError(f"timed out after {spec.timeout}s", placeholder) from None
    except OSError as e:
        raise BlackBoxError(f"cannot run {spec.cmd[0]!r}: {e}", placeholder) from None
    if proc.returncode != 0:
        tail = proc.stderr.decode("utf-8", "replace").strip()[-200:]
        raise BlackBoxError(f"exit code {proc.returncode}: {tail}", placeholder)
    out = set()
    for lineno, raw in enumerate(proc.stdout.decode("utf-8", "replace").splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        try:
            m = Mapping.from_json(json.loads(line))
            for _, sp in m.items():
                Span(*sp).check(d)
        except (json.JSONDecodeError, SpannerError, ValueError, IndexError) as e:
            raise BlackBoxError(f"line {lineno}: {e}", placeholder) from None
        extra = m.domain - spec.vars
        if extra:
            raise BlackBoxError(f"line {lineno}: undeclared variable {sorted(extra)[0]!r}", placeholder)
        if len(m) > spec.degree:
            raise BlackBoxError(f"line {lineno}: binds {len(m)} variables, degree is {spec.degree}", placeholder)
        out.add(m)
    return frozenset(out)


# ---------------------------------------------------------------- planning

_STATIC_DF = "df"


@dataclass(frozen=True)
class NodePlan:
    pointer: str
    op: str
    shared: int
    strategy: str
    tractable: bool

    def to_json(self) -> dict:
        return {
            "node": self.pointer or "/",
            "op": self.op,
            "shared": self.shared,
            "strategy": self.strategy,
            "verdict": "tractable" if self.tractable else "intractable",
        }


@dataclass(frozen=True)
class PlanReport:
    k: int
    nodes: tuple[NodePlan, ...]
    variables: frozenset[str]

    @property
    def tractable(self) -> bool:
        return all(n.tractable for n in self.nodes)

    def strategy(self, pointer: str) -> str:
        for n in self.nodes:
            if n.pointer == pointer:
                return n.strategy
        raise KeyError(pointer)

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "verdict": "tractable" if self.tractable else "intractable",
            "variables": sorted(self.variables),
            "nodes": [n.to_json() for n in self.nodes],
        }


def _leaf_info(src: Source, alphabet) -> tuple[frozenset[str], bool, object]:
    """(variables, certified disjunctive-functional, static object for class checks)."""
    if isinstance(src, RegexSource):
        alpha = src.parse(alphabet)
        return alpha.vars, classify(alpha).disjunctive_functional, alpha
    if isinstance(src, VaSource):
        A = src.automaton
        return A.vars, check_sequential(A) and check_functional(A), A
    return src.vars, False, None


def _right_synchronized(obj, X) -> bool:
    if isinstance(obj, VsetAutomaton):
        return check_sequential(obj) and va_synchronized_for(obj, X)
    if isinstance(obj, Regex):
        return synchronized_for(obj, X) and va_synchronized_for(compile_regex(obj), X)
    return False


def validate_plan(tree: RaTree, inst: Instantiation, k: int = DEFAULT_K, alphabet=None) -> PlanReport:
    if k < 0:
        raise ContractViolation("k must be nonnegative")
    inst.check_total(tree)
    nodes: list[NodePlan] = []

    def go(t: RaTree) -> tuple[frozenset[str], bool, object]:
        if isinstance(t, Leaf):
            return _leaf_info(inst[t.id], alphabet)
        if isinstance(t, Project):
            vs, df, _ = go(t.child)
            return vs & t.vars, df, None
        lv, ldf, lobj = go(t.left)
        rv, rdf, robj = go(t.right)
        shared = len(lv & rv)
        ok = shared <= k
        if isinstance(t, Union):
            nodes.append(NodePlan(t.pointer, "union", shared, "union_va", True))
            return lv | rv, ldf and rdf, None
        if isinstance(t, Join):
            strat = "join_disjunctive" if ldf and rdf else "join_fpt"
            nodes.append(NodePlan(t.pointer, "join", shared, strat, ok))
            return lv | rv, strat == "join_disjunctive", None
        strat = "difference_synchronized" if _right_synchronized(robj, lv & rv) else "difference_adhoc"
        nodes.append(NodePlan(t.pointer, "difference", shared, strat, ok))
        return lv, False, None

    vs, _, _ = go(tree)
    return PlanReport(k, tuple(nodes), vs)


# ---------------------------------------------------------------- evaluation


def _static(t: RaTree, inst: Instantiation) -> bool:
    if isinstance(t, Leaf):
        return not isinstance(inst[t.id], BlackBoxSpec)
    if isinstance(t, Difference):
        return False
    if isinstance(t, Project):
        return _static(t.child, inst)
    return _static(t.left, inst) and _static(t.right, inst)


def _blackboxes(t: RaTree, inst: Instantiation) -> list[str]:
    return [p for p in placeholders(t) if isinstance(inst[p], BlackBoxSpec)]


class QueryEngine:
    """Evaluates one (tree, instantiation) pair over many documents.

    Subtrees without difference nodes or black boxes compile once per
    alphabet and are reused across documents; everything else is rebuilt
    for each document.
    """

    def __init__(self, tree: RaTree, inst: Instantiation, k: int = DEFAULT_K, alphabet=None):
        self.tree = tree
        self.inst = inst
        self.k = k
        self.alphabet = frozenset(alphabet) if alphabet is not None else None
        self._cache: dict[tuple, object] = {}

    def alphabet_for(self, d: Document) -> frozenset[str]:
        if self.alphabet is not None:
            return self.alphabet
        return frozenset(self.inst.symbols() | set(d))

    def plan(self, d: Document | None = None) -> PlanReport:
        sigma = self.alphabet_for(d or "")
        return validate_plan(self.tree, self.inst, self.k, sigma)

    def compile(self, d: Document) -> VsetAutomaton:
        """An automaton whose result on ``d`` is the query result (ad hoc in general)."""
        sigma = self.alphabet_for(d)
        report = validate_plan(self.tree, self.inst, self.k, sigma)
        if not report.tractable:
            worst = max((n for n in report.nodes if not n.tractable), key=lambda n: n.shared)
            err = PlanError(
                f"{worst.op} node {worst.pointer or '/'} shares {worst.shared} variables, bound is {self.k}",
                count=worst.shared,
                bound=self.k,
                node=worst.pointer or "/",
            )
            err.report = report
            raise err
        boxes = self._run_blackboxes(d)
        out = self._build(self.tree, d, sigma, report, boxes)
        return _as_va(out)

    def evaluate(self, d: Document) -> Iterator[Mapping]:
        return _enum.enumerate(self.compile(d), d)

    def _run_blackboxes(self, d: Document) -> dict[str, frozenset[Mapping]]:
        ids = _blackboxes(self.tree, self.inst)
        if not ids:
            return {}
        with ThreadPoolExecutor(max_workers=min(BLACKBOX_WORKERS, len(ids))) as pool:
            futs = {p: pool.submit(run_blackbox, self.inst[p], d, p) for p in ids}
            return {p: f.result() for p, f in futs.items()}

    def _build(self, t: RaTree, d, sigma, report, boxes):
        static = _static(t, self.inst)
        key = (t.pointer, sigma)
        if static and key in self._cache:
            return self._cache[key]
        out = self._build_node(t, d, sigma, report, boxes)
        if static:
            self._cache[key] = out
        return out

    def _build_node(self, t: RaTree, d, sigma, report, boxes):
        if isinstance(t, Leaf):
            src = self.inst[t.id]
            if isinstance(src, RegexSource):
                alpha = src.parse(sigma)
                if classify(alpha).disjunctive_functional:
                    return disjunctive_from_regex(alpha)
                return trim(compile_regex(alpha))
            if isinstance(src, VaSource):
                A = src.automaton
                if not check_sequential(A):
                    raise ContractViolation(f"VA for placeholder {t.id!r} is not sequential")
                if check_functional(A):
                    return DisjunctiveFunctionalVa((trim(A),))
                return A
            return mappings_to_va(boxes[t.id], d, src.vars)
        if isinstance(t, Project):
            C = self._build(t.child, d, sigma, report, boxes)
            if isinstance(C, DisjunctiveFunctionalVa):
                # projecting a functional automaton keeps it functional
                return DisjunctiveFunctionalVa(tuple(trim(project(c, t.vars)) for c in C.components))
            return trim(project(C, t.vars))
        L = self._build(t.left, d, sigma, report, boxes)
        R = self._build(t.right, d, sigma, report, boxes)
        strat = report.strategy(t.pointer)
        if strat == "union_va":
            if isinstance(L, DisjunctiveFunctionalVa) and isinstance(R, DisjunctiveFunctionalVa):
                return DisjunctiveFunctionalVa(L.components + R.components)
            return union_va(_as_va(L), _as_va(R))
        if strat == "join_disjunctive":
            return join_disjunctive(_as_df(L), _as_df(R))
        if strat == "join_fpt":
            return join_fpt(_as_va(L), _as_va(R))
        A1, A2 = _as_va(L), _as_va(R)
        if strat == "difference_synchronized":
            X = A1.vars & A2.vars
            return difference_synchronized(to_semi_functional(A1, X), A2, d)
        return difference_adhoc(A1, A2, d, kmax=self.k)


def _as_va(obj) -> VsetAutomaton:
    return obj.combined if isinstance(obj, DisjunctiveFunctionalVa) else obj


def _as_df(obj) -> DisjunctiveFunctionalVa:
    if isinstance(obj, DisjunctiveFunctionalVa):
        return obj
    raise ContractViolation("operand is not in disjunctive-functional form")


def eval_query(tree: RaTree, inst: Instantiation, d: Document, k: int = DEFAULT_K, alphabet=None) -> Iterator[Mapping]:
    return QueryEngine(tree, inst, k, alphabet).evaluate(d)


def reference_eval(tree: RaTree, leaf_results: dict[str, frozenset[Mapping]]) -> frozenset[Mapping]:
    """Compose precomputed leaf results with the set operators."""
    from .core import join_sets, minus_sets, project_set

    def go(t):
        if isinstance(t, Leaf):
            return leaf_results[t.id]
        if isinstance(t, Project):
            return project_set(go(t.child), t.vars)
        l, r = go(t.left), go(t.right)
        if isinstance(t, Union):
            return l | r
        if isinstance(t, Join):
            return join_sets(l, r)
        return minus_sets(l, r)

    return go(tree)
