"""Pure-Python flashlight-search kernel.

Product nodes are (state, status) with the status of every variable packed
as a base-3 integer (0 waiting, 1 open, 2 closed) and encoded as
``status * nstates + state``.  Level i holds the nodes reachable after reading
i symbols.  The compiled kernel in ``_kernel.pyx`` mirrors this file line for
line; keep the two in sync.
"""

from __future__ import annotations


class Enumerator:
    def __init__(self, nstates, initial, accepting, eps, ops, syms, doc, nvars):
        # eps[q]: list of targets; ops[q]: list of (var, kind, target) with
        # kind 0=open, 1=close; syms[q]: dict symbol index -> list of targets
        self.N = nstates
        self.q0 = initial
        self.acc = accepting
        self.eps = eps
        self.ops = ops
        self.syms = syms
        self.doc = doc
        self.v = nvars
        self.p3 = [3**i for i in range(nvars)]
        self.work = 0
        self._ready = False

    # -------------------------------------------------------------- helpers

    def _succ(self, key):
        N = self.N
        q = key % N
        st = key // N
        out = [st * N + r for r in self.eps[q]]
        p3 = self.p3
        for x, kind, r in self.ops[q]:
            t = (st // p3[x]) % 3
            if t == kind:
                out.append((st + p3[x]) * N + r)
        return out

    def _has_open(self, st):
        for _ in range(self.v):
            if st % 3 == 1:
                return True
            st //= 3
        return False

    def _closure(self, seeds):
        seen = set(seeds)
        stack = list(seen)
        while stack:
            k = stack.pop()
            self.work += 1
            for s in self._succ(k):
                if s not in seen:
                    seen.add(s)
                    stack.append(s)
        return seen

    def _symbol_step(self, keys, c):
        N = self.N
        out = set()
        if c < 0:
            return out
        for k in keys:
            q = k % N
            base = k - q
            for r in self.syms[q].get(c, ()):
                out.add(base + r)
        return out

    def prepare(self):
        if self._ready:
            return
        n = len(self.doc)
        N = self.N
        levels = [self._closure([self.q0])]
        for i in range(n):
            levels.append(self._closure(self._symbol_step(levels[i], self.doc[i])))
        exits = [None] * (n + 1)
        viable = [None] * (n + 1)
        for i in range(n, -1, -1):
            G = levels[i]
            if i == n:
                X = {k for k in G if self.acc[k % N] and not self._has_open(k // N)}
            else:
                nxt = viable[i + 1]
                c = self.doc[i]
                X = set()
                for k in G:
                    q = k % N
                    base = k - q
                    for r in self.syms[q].get(c, ()) if c >= 0 else ():
                        if base + r in nxt:
                            X.add(k)
                            break
            rev = {}
            for k in G:
                for s in self._succ(k):
                    rev.setdefault(s, []).append(k)
            V = set(X)
            stack = list(X)
            while stack:
                k = stack.pop()
                self.work += 1
                for p in rev.get(k, ()):
                    if p not in V:
                        V.add(p)
                        stack.append(p)
            exits[i] = X
            viable[i] = V
        self.exits = exits
        self.viable = viable
        self._ready = True

    def nonempty(self):
        n = len(self.doc)
        N = self.N
        cur = self._closure([self.q0])
        for i in range(n):
            if not cur:
                return False
            cur = self._closure(self._symbol_step(cur, self.doc[i]))
        return any(self.acc[k % N] and not self._has_open(k // N) for k in cur)

    def _candidates(self, level, frontier, st):
        """Sorted list of (mask, new status, exit states) for one gap."""
        N = self.N
        V = self.viable[level]
        X = self.exits[level]
        seeds = [st * N + q for q in frontier]
        seen = set(seeds)
        stack = list(seeds)
        groups = {}
        while stack:
            k = stack.pop()
            self.work += 1
            if k in X:
                groups.setdefault(k // N, []).append(k % N)
            for s in self._succ(k):
                if s not in seen and s in V:
                    seen.add(s)
                    stack.append(s)
        cands = []
        p3 = self.p3
        for st2, qs in groups.items():
            mask = 0
            for x in range(self.v):
                a = (st // p3[x]) % 3
                b = (st2 // p3[x]) % 3
                if a == 0 and b >= 1:
                    mask |= 1 << (2 * x)
                if a <= 1 and b == 2:
                    mask |= 1 << (2 * x + 1)
            cands.append((mask, st2, qs))
        cands.sort()
        return cands

    def _advance(self, level, qs, st2):
        N = self.N
        nxt = self.viable[level + 1]
        c = self.doc[level]
        out = []
        seen = set()
        base = st2 * N
        for q in qs:
            for r in self.syms[q].get(c, ()):
                if r not in seen and base + r in nxt:
                    seen.add(r)
                    out.append(r)
        return out

    # -------------------------------------------------------------- search

    def events(self):
        """Yield (status, opened, closed) for each result, in canonical order.

        ``opened``/``closed`` are shared buffers of 1-based positions; an
        entry is meaningful only for variables whose trit in ``status`` says
        the variable was opened (>= 1) or closed (2).
        """
        self.prepare()
        n = len(self.doc)
        v = self.v
        self.order_ok = True
        if self.q0 not in self.viable[0]:
            return
        opened = [0] * v
        closed = [0] * v
        # frame: [level, candidates, index]
        stack = [[0, self._candidates(0, [self.q0], 0), 0]]
        while stack:
            fr = stack[-1]
            level, cands, idx = fr
            if idx == len(cands):
                stack.pop()
                continue
            fr[2] = idx + 1
            mask, st2, qs = cands[idx]
            if idx and mask <= cands[idx - 1][0]:
                self.order_ok = False
            if mask:
                pos = level + 1
                for x in range(v):
                    if mask >> (2 * x) & 1:
                        opened[x] = pos
                    if mask >> (2 * x + 1) & 1:
                        closed[x] = pos
            if level == n:
                yield st2, opened, closed
            else:
                front = self._advance(level, qs, st2)
                stack.append([level + 1, self._candidates(level + 1, front, st2), 0])

    def measure(self, limit=None):
        """Run the search without building mappings.

        Returns (count, max work between outputs, work before the first
        output, canonical order strictly increasing).
        """
        count = 0
        last = 0
        maxgap = 0
        first = 0
        self.work = 0
        for _ in self.events():
            gap = self.work - last
            last = self.work
            if count == 0:
                first = gap
            if gap > maxgap:
                maxgap = gap
            count += 1
            if limit is not None and count >= limit:
                break
        if self.work - last > maxgap:
            maxgap = self.work - last
        return count, maxgap, first, self.order_ok

    def next_spans(self):
        """Next result as a tuple of (open, close) or None per variable;
        returns None when exhausted."""
        gen = self.__dict__.get("_gen")
        if gen is None:
            gen = self._gen = self.events()
        try:
            st, opened, closed = next(gen)
        except StopIteration:
            return None
        out = []
        for x in range(self.v):
            if st % 3 == 2:
                out.append((opened[x], closed[x]))
            else:
                out.append(None)
            st //= 3
        return tuple(out)
