"""``spanner`` command-line front end.

Exit codes: 0 on success, 1 on domain errors (a JSON object is written to
standard error), 2 on usage errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import random
import sys
from dataclasses import dataclass
from pathlib import Path

from . import reductions as red
from .core import Mapping, SpannerError
from .enumerate import enumerate as enumerate_va
from .ratree import (
    BlackBoxSpec,
    Difference,
    Instantiation,
    Join,
    Leaf,
    QueryEngine,
    RegexSource,
    Union,
    VaSource,
    load_instantiation,
    parse_ra_tree,
    validate_plan,
)
from .regex import classify, parse_regex, pattern_symbols, synchronized_for, to_text
from .va import (
    VsetAutomaton,
    check_functional,
    check_sequential,
    compile_regex,
    is_semi_functional,
    oracle_eval_va,
    va_synchronized_for,
)
from .regex import oracle_eval


class UsageError(Exception):
    pass


@dataclass
class CliConfig:
    alphabet: frozenset[str] | None = None
    k: int = 3
    fmt: str = "json"
    timeout: float | None = None
    seed: int = 0
    literal_whitespace: bool = False

    def __post_init__(self):
        if self.k < 0:
            raise UsageError("-k must be nonnegative")
        if self.alphabet is not None and not self.alphabet:
            raise UsageError("--alphabet must not be empty")

    @classmethod
    def from_args(cls, ns: argparse.Namespace) -> "CliConfig":
        sigma = getattr(ns, "alphabet", None)
        return cls(
            alphabet=frozenset(sigma) if sigma is not None else None,
            k=getattr(ns, "k", 3),
            fmt=getattr(ns, "format", "json"),
            timeout=getattr(ns, "timeout", None),
            seed=getattr(ns, "seed", 0),
            literal_whitespace=getattr(ns, "literal_whitespace", False),
        )


# ---------------------------------------------------------------- helpers


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None


def _document(ns) -> str:
    if ns.doc_text is not None and ns.doc is not None:
        raise UsageError("give either --doc-text or --doc, not both")
    if ns.doc_text is not None:
        return ns.doc_text
    if ns.doc is not None:
        return _read(ns.doc)
    raise UsageError("a document is required (--doc-text or --doc)")


def _alphabet(cfg: CliConfig, *texts: str, doc: str = "") -> list[str]:
    if cfg.alphabet is not None:
        return sorted(cfg.alphabet)
    out = set(doc)
    for t in texts:
        out |= pattern_symbols(t, literal_whitespace=cfg.literal_whitespace)
    return sorted(out)


def _parse(text: str, cfg: CliConfig, doc: str = ""):
    return parse_regex(text, _alphabet(cfg, text, doc=doc), literal_whitespace=cfg.literal_whitespace)


def _load_va(path: str) -> VsetAutomaton:
    try:
        return VsetAutomaton.loads(_read(path))
    except json.JSONDecodeError as e:
        raise UsageError(f"{path}: invalid JSON: {e}") from None


def _emit(m: Mapping, cfg: CliConfig, out) -> None:
    out.write((m.to_json_line() if cfg.fmt == "json" else str(m)) + "\n")
    out.flush()


def _with_timeout(inst: Instantiation, cfg: CliConfig) -> Instantiation:
    if cfg.timeout is None:
        return inst
    return Instantiation(
        {
            p: dataclasses.replace(s, timeout=cfg.timeout) if isinstance(s, BlackBoxSpec) else s
            for p, s in inst.leaves.items()
        }
    )


# ---------------------------------------------------------------- commands


def cmd_classify(ns, cfg: CliConfig, out) -> int:
    sync = [x for x in (ns.sync_for or "").split(",") if x]
    if ns.va:
        A = _load_va(ns.va)
        seq = check_sequential(A)
        report = {"sequential": seq, "functional": seq and check_functional(A)}
        if sync and seq:
            report["semi_functional"] = is_semi_functional(A, sync)
            report["synchronized"] = va_synchronized_for(A, sync)
    else:
        if ns.pattern is None:
            raise UsageError("classify needs a pattern or --va")
        alpha = _parse(ns.pattern, cfg)
        report = classify(alpha).to_json()
        report["variables"] = sorted(alpha.vars)
        if sync and report["sequential"]:
            report["synchronized"] = synchronized_for(alpha, sync)
    out.write(json.dumps(report, sort_keys=True) + "\n")
    return 0


def cmd_compile(ns, cfg: CliConfig, out) -> int:
    A = compile_regex(_parse(ns.pattern, cfg))
    text = A.dumps() + "\n"
    if ns.output:
        Path(ns.output).write_text(text, encoding="utf-8")
    else:
        out.write(text)
    return 0


def _query_from_args(ns, cfg: CliConfig):
    """(tree, instantiation) for the eval sources given on the command line."""
    lw = cfg.literal_whitespace
    if ns.tree or ns.inst:
        if not (ns.tree and ns.inst):
            raise UsageError("--tree and --inst go together")
        tree = parse_ra_tree(_read(ns.tree))
        inst = load_instantiation(_read(ns.inst), Path(ns.inst).parent, literal_whitespace=lw)
        return tree, _with_timeout(inst, cfg)
    if ns.left_file or ns.right_file:
        if not (ns.left_file and ns.right_file and ns.op):
            raise UsageError("--left-file, --right-file and --op go together")
        node = {"join": Join, "union": Union, "difference": Difference}[ns.op]
        leaves = {}
        for pid, path in (("left", ns.left_file), ("right", ns.right_file)):
            if path.endswith(".json"):
                leaves[pid] = VaSource(_load_va(path), path)
            else:
                leaves[pid] = RegexSource(_read(path).strip("\n"), None, lw)
        return node(Leaf("left", "/left"), Leaf("right", "/right")), Instantiation(leaves)
    raise UsageError("eval needs --regex, --va, --tree/--inst or --left-file/--right-file")


def cmd_eval(ns, cfg: CliConfig, out) -> int:
    d = _document(ns)
    if ns.regex is not None:
        stream = enumerate_va(compile_regex(_parse(ns.regex, cfg, d)), d)
    elif ns.va:
        stream = enumerate_va(_load_va(ns.va), d)
    else:
        tree, inst = _query_from_args(ns, cfg)
        stream = QueryEngine(tree, inst, cfg.k, cfg.alphabet).evaluate(d)
    for m in stream:
        _emit(m, cfg, out)
    return 0


def cmd_oracle(ns, cfg: CliConfig, out) -> int:
    d = _document(ns)
    if ns.va:
        result = oracle_eval_va(_load_va(ns.va), d)
    elif ns.pattern is not None:
        result = oracle_eval(_parse(ns.pattern, cfg, d), d)
    else:
        raise UsageError("oracle needs a pattern or --va")
    for m in sorted(result):
        _emit(m, cfg, out)
    return 0


def cmd_plan(ns, cfg: CliConfig, out, err) -> int:
    tree = parse_ra_tree(_read(ns.tree))
    inst = load_instantiation(_read(ns.inst), Path(ns.inst).parent, literal_whitespace=cfg.literal_whitespace)
    sigma = cfg.alphabet if cfg.alphabet is not None else inst.symbols()
    report = validate_plan(tree, inst, cfg.k, sigma)
    out.write(json.dumps(report.to_json(), sort_keys=True) + "\n")
    if not report.tractable:
        bad = [n.to_json() for n in report.nodes if not n.tractable]
        err.write(json.dumps({"error": "PlanError", "message": "plan exceeds the shared-variable bound", "nodes": bad}) + "\n")
        return 1
    return 0


def _random_cnf(rng: random.Random, n: int, m: int) -> red.CnfFormula:
    return red.CnfFormula.of(n, [[rng.choice((1, -1)) * rng.randint(1, n) for _ in range(3)] for _ in range(m)])


def cmd_gen(ns, cfg: CliConfig, out) -> int:
    if ns.cnf:
        phi = red.parse_dimacs(_read(ns.cnf))
    elif ns.random:
        try:
            n, m = (int(v) for v in ns.random.split(","))
        except ValueError:
            raise UsageError("--random expects N,M") from None
        phi = _random_cnf(random.Random(cfg.seed), n, m)
    else:
        raise UsageError("gen needs --cnf or --random N,M")
    if ns.kind == "join-3sat":
        g1, g2, d = red.gen_join_3sat(phi)
    elif ns.kind == "diff-3sat":
        g1, g2, d = red.gen_diff_3sat(phi)
    elif ns.kind == "diff-bounded":
        g1, g2, d = red.gen_diff_bounded_occ(phi)
    else:
        if ns.p is None:
            raise UsageError("diff-weighted needs -p")
        g1, g2, d = red.gen_diff_weighted(phi, ns.p)
    outdir = Path(ns.out_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    files = {
        "left": outdir / f"{ns.prefix}.left.rgx",
        "right": outdir / f"{ns.prefix}.right.rgx",
        "doc": outdir / f"{ns.prefix}.doc",
    }
    files["left"].write_text(to_text(g1) + "\n", encoding="utf-8")
    files["right"].write_text(to_text(g2) + "\n", encoding="utf-8")
    files["doc"].write_text(d, encoding="utf-8")
    op = "join" if ns.kind == "join-3sat" else "difference"
    # eval needs -k at least this large
    shared = len(g1.vars & g2.vars)
    out.write(json.dumps({"op": op, "shared": shared, **{k: str(v) for k, v in files.items()}}, sort_keys=True) + "\n")
    return 0


# ---------------------------------------------------------------- parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _common(p: argparse.ArgumentParser, doc: bool = False) -> None:
    p.add_argument("--alphabet", help="symbols of the alphabet (default: document plus pattern literals)")
    p.add_argument("--literal-whitespace", action="store_true", help="treat whitespace in patterns as symbols")
    if doc:
        p.add_argument("--doc-text", help="the document, inline")
        p.add_argument("--doc", help="file holding the document (UTF-8)")
        p.add_argument("--format", choices=("json", "text"), default="json")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="spanner", description="Regex formulas, vset-automata and spanner algebra.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("classify", help="report the classes of a pattern or VA")
    p.add_argument("pattern", nargs="?")
    p.add_argument("--va")
    p.add_argument("--sync-for", help="comma-separated variables for the synchronized check")
    _common(p)

    p = sub.add_parser("compile", help="compile a pattern to VA JSON")
    p.add_argument("pattern")
    p.add_argument("-o", "--output")
    _common(p)

    p = sub.add_parser("eval", help="stream the mappings of a query over a document")
    p.add_argument("--regex")
    p.add_argument("--va")
    p.add_argument("--tree")
    p.add_argument("--inst")
    p.add_argument("--left-file")
    p.add_argument("--right-file")
    p.add_argument("--op", choices=("join", "union", "difference"))
    p.add_argument("-k", type=int, default=3, help="shared-variable bound")
    p.add_argument("--timeout", type=float, help="black-box timeout in seconds")
    _common(p, doc=True)

    p = sub.add_parser("oracle", help="reference semantics of a pattern or VA")
    p.add_argument("pattern", nargs="?")
    p.add_argument("--va")
    _common(p, doc=True)

    p = sub.add_parser("plan", help="check a query plan against the shared-variable bound")
    p.add_argument("--tree", required=True)
    p.add_argument("--inst", required=True)
    p.add_argument("-k", type=int, default=3)
    _common(p)

    p = sub.add_parser("gen", help="write a hardness-reduction instance")
    p.add_argument("kind", choices=("join-3sat", "diff-3sat", "diff-bounded", "diff-weighted"))
    p.add_argument("--cnf", help="DIMACS CNF file")
    p.add_argument("--random", metavar="N,M", help="random 3CNF with N variables and M clauses")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-p", type=int, help="weight for diff-weighted")
    p.add_argument("--out-dir", default=".")
    p.add_argument("--prefix", default="instance")
    return ap


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        ns = build_parser().parse_args(argv)
        cfg = CliConfig.from_args(ns)
        if ns.command == "classify":
            return cmd_classify(ns, cfg, out)
        if ns.command == "compile":
            return cmd_compile(ns, cfg, out)
        if ns.command == "eval":
            return cmd_eval(ns, cfg, out)
        if ns.command == "oracle":
            return cmd_oracle(ns, cfg, out)
        if ns.command == "plan":
            return cmd_plan(ns, cfg, out, err)
        return cmd_gen(ns, cfg, out)
    except UsageError as e:
        err.write(f"usage error: {e}\n")
        return 2
    except SpannerError as e:
        err.write(json.dumps(e.to_json(), sort_keys=True) + "\n")
        return 1
    except BrokenPipeError:
        return 0
    except SystemExit as e:  # --help
        return int(e.code or 0)


if __name__ == "__main__":
    sys.exit(main())
