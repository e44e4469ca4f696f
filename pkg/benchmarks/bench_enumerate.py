"""Compiled versus pure-Python enumeration kernel.

Runs the two-variable family ``.* x{.*} .* y{.*} .*`` over a^l and reports
wall time, mappings per second and the maximum work between outputs.

    python benchmarks/bench_enumerate.py --lengths 20,40,60 --limit 200000
"""

from __future__ import annotations

import argparse
import json
import time

from spanner.enumerate import available_backends, enumerate as stream
from spanner.regex import parse_regex
from spanner.va import compile_regex

PATTERN = ".* x{.*} .* y{.*} .*"


def run_one(A, d: str, backend: str, limit: int | None) -> dict:
    s = stream(A, d, backend=backend)
    start = time.perf_counter()
    first = None
    count = 0
    for _ in s:
        count += 1
        if first is None:
            first = time.perf_counter() - start
        if limit is not None and count >= limit:
            break
    elapsed = time.perf_counter() - start
    return {
        "backend": backend,
        "length": len(d),
        "mappings": count,
        "seconds": round(elapsed, 4),
        "first_output": round(first or 0.0, 6),
        "per_second": round(count / elapsed) if elapsed else None,
        "work": s.work,
    }


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--lengths", default="10,20,40,60,80")
    ap.add_argument("--limit", type=int, default=100_000, help="stop after this many mappings")
    ap.add_argument("--json", action="store_true", help="one JSON object per run")
    ns = ap.parse_args(argv)

    A = compile_regex(parse_regex(PATTERN, "a"))
    backends = available_backends()
    if "compiled" not in backends:
        print("compiled kernel not built; run `python setup.py build_ext --inplace` first")
    rows = []
    for ell in (int(v) for v in ns.lengths.split(",")):
        for b in backends:
            rows.append(run_one(A, "a" * ell, b, ns.limit))
    if ns.json:
        for r in rows:
            print(json.dumps(r))
        return
    print(f"{'l':>4} {'backend':>9} {'mappings':>9} {'seconds':>9} {'first(s)':>9} {'per sec':>10}")
    for r in rows:
        print(
            f"{r['length']:>4} {r['backend']:>9} {r['mappings']:>9} {r['seconds']:>9.3f} "
            f"{r['first_output']:>9.5f} {r['per_second'] or 0:>10}"
        )
    by = {(r["length"], r["backend"]): r for r in rows}
    if "compiled" in backends:
        for ell in sorted({r["length"] for r in rows}):
            c, p = by[(ell, "compiled")], by[(ell, "python")]
            if c["seconds"]:
                print(f"l={ell}: compiled is {p['seconds'] / c['seconds']:.1f}x faster")


if __name__ == "__main__":
    main()
