# distutils: language = c++
"""Compiled flashlight-search kernel; same algorithm as ``_kernel_py``.

Product nodes are dense integers ``status * N + state`` so every per-level
set is a byte array and every scratch "seen" set is a stamp array.  The
caller only selects this kernel when (n+1) * 3^v * N fits the size cap.
"""

from libcpp.vector cimport vector
from libcpp.algorithm cimport sort as cpp_sort
from libcpp.utility cimport pair

ctypedef long long i64
ctypedef unsigned long long u64


cdef class Enumerator:
    cdef int N, q0, v, n
    cdef i64 M
    cdef vector[int] eps_ptr, eps_dst, reps_ptr, reps_src
    cdef vector[int] op_ptr, op_var, op_kind, op_dst
    cdef vector[int] rop_ptr, rop_var, rop_kind, rop_src
    cdef vector[int] sym_ptr, sym_c, sym_dst
    cdef vector[int] acc
    cdef vector[int] doc
    cdef vector[i64] p3
    cdef public i64 work
    cdef public bint order_ok
    cdef bint ready
    # (n+1) * M flags: 1 = in level, 2 = viable, 4 = exit
    cdef vector[char] flags
    cdef vector[int] stamp
    cdef int cur_stamp
    cdef vector[int] qstamp
    cdef int cur_qstamp
    # search state, one slot per level
    cdef vector[vector[u64]] cmask
    cdef vector[vector[i64]] cst
    cdef vector[vector[int]] cqptr, cqs
    cdef vector[int] cidx
    cdef int depth
    cdef vector[int] opened, closed
    cdef i64 cur_st
    cdef bint started
    cdef vector[i64] s_stack, s_succ, s_hits
    cdef vector[pair[u64, i64]] s_order

    def __init__(self, nstates, initial, accepting, eps, ops, syms, doc, nvars):
        cdef int q, r, x, kind, flag
        cdef i64 p
        self.N = nstates
        self.q0 = initial
        self.v = nvars
        self.n = len(doc)
        self.work = 0
        self.ready = False
        self.started = False
        self.order_ok = True
        p = 1
        for x in range(nvars):
            self.p3.push_back(p)
            p *= 3
        self.M = p * nstates
        self.eps_ptr.push_back(0)
        self.op_ptr.push_back(0)
        self.sym_ptr.push_back(0)
        rev_eps = [[] for _ in range(nstates)]
        rev_ops = [[] for _ in range(nstates)]
        for q in range(nstates):
            # typed local: Cython binds a dangling const-ref temporary when a
            # conditional expression is passed to push_back directly
            flag = 1 if accepting[q] else 0
            self.acc.push_back(flag)
            for r in eps[q]:
                self.eps_dst.push_back(r)
                rev_eps[r].append(q)
            self.eps_ptr.push_back(self.eps_dst.size())
            for x, kind, r in ops[q]:
                self.op_var.push_back(x)
                self.op_kind.push_back(kind)
                self.op_dst.push_back(r)
                rev_ops[r].append((x, kind, q))
            self.op_ptr.push_back(self.op_dst.size())
            for c, targets in sorted(syms[q].items()):
                for r in targets:
                    self.sym_c.push_back(c)
                    self.sym_dst.push_back(r)
            self.sym_ptr.push_back(self.sym_dst.size())
        self.reps_ptr.push_back(0)
        self.rop_ptr.push_back(0)
        for q in range(nstates):
            for r in rev_eps[q]:
                self.reps_src.push_back(r)
            self.reps_ptr.push_back(self.reps_src.size())
            for x, kind, r in rev_ops[q]:
                self.rop_var.push_back(x)
                self.rop_kind.push_back(kind)
                self.rop_src.push_back(r)
            self.rop_ptr.push_back(self.rop_src.size())
        for c in doc:
            self.doc.push_back(c)
        self.opened.resize(nvars)
        self.closed.resize(nvars)

    # ------------------------------------------------------------ helpers

    cdef inline void _succ(self, i64 key, vector[i64]& out):
        cdef int q = <int>(key % self.N)
        cdef i64 st = key // self.N
        cdef int e, x
        out.clear()
        for e in range(self.eps_ptr[q], self.eps_ptr[q + 1]):
            out.push_back(st * self.N + self.eps_dst[e])
        for e in range(self.op_ptr[q], self.op_ptr[q + 1]):
            x = self.op_var[e]
            if (st // self.p3[x]) % 3 == self.op_kind[e]:
                out.push_back((st + self.p3[x]) * self.N + self.op_dst[e])

    cdef inline void _pred(self, i64 key, vector[i64]& out):
        cdef int q = <int>(key % self.N)
        cdef i64 st = key // self.N
        cdef int e, x
        out.clear()
        for e in range(self.reps_ptr[q], self.reps_ptr[q + 1]):
            out.push_back(st * self.N + self.reps_src[e])
        for e in range(self.rop_ptr[q], self.rop_ptr[q + 1]):
            x = self.rop_var[e]
            if (st // self.p3[x]) % 3 == self.rop_kind[e] + 1:
                out.push_back((st - self.p3[x]) * self.N + self.rop_src[e])

    cdef inline bint _has_open(self, i64 st):
        cdef int i
        for i in range(self.v):
            if st % 3 == 1:
                return True
            st //= 3
        return False

    cdef inline int _next_stamp(self):
        if self.cur_stamp == 2147483647:
            self.stamp.assign(self.M, 0)
            self.cur_stamp = 0
        self.cur_stamp += 1
        return self.cur_stamp

    cdef void _closure(self, vector[i64]& items, char* mark):
        # items: seeds already marked; grows to the full closure
        cdef vector[i64] stack = items
        cdef vector[i64] succ
        cdef i64 k, s
        while stack.size():
            k = stack.back()
            stack.pop_back()
            self.work += 1
            self._succ(k, succ)
            for s in succ:
                if not (mark[s] & 1):
                    mark[s] |= 1
                    items.push_back(s)
                    stack.push_back(s)

    def prepare(self):
        if self.ready:
            return
        cdef int n = self.n, i, q, e, c
        cdef i64 M = self.M
        cdef vector[vector[i64]] levels
        cdef vector[i64] succ, stack
        cdef i64 k, base, s
        cdef char* cur
        cdef char* nxt
        self.flags.assign((n + 1) * M, 0)
        self.stamp.assign(M, 0)
        self.qstamp.assign(self.N, 0)
        levels.resize(n + 1)
        cur = &self.flags[0]
        cur[self.q0] |= 1
        levels[0].push_back(self.q0)
        self._closure(levels[0], cur)
        for i in range(n):
            cur = &self.flags[i * M]
            nxt = &self.flags[(i + 1) * M]
            c = self.doc[i]
            if c >= 0:
                for k in levels[i]:
                    q = <int>(k % self.N)
                    base = k - q
                    for e in range(self.sym_ptr[q], self.sym_ptr[q + 1]):
                        if self.sym_c[e] == c:
                            s = base + self.sym_dst[e]
                            if not (nxt[s] & 1):
                                nxt[s] |= 1
                                levels[i + 1].push_back(s)
            self._closure(levels[i + 1], nxt)
        for i in range(n, -1, -1):
            cur = &self.flags[i * M]
            stack.clear()
            for k in levels[i]:
                if i == n:
                    if self.acc[k % self.N] and not self._has_open(k // self.N):
                        cur[k] |= 4
                else:
                    c = self.doc[i]
                    if c < 0:
                        continue
                    nxt = &self.flags[(i + 1) * M]
                    q = <int>(k % self.N)
                    base = k - q
                    for e in range(self.sym_ptr[q], self.sym_ptr[q + 1]):
                        if self.sym_c[e] == c and (nxt[base + self.sym_dst[e]] & 2):
                            cur[k] |= 4
                            break
                if cur[k] & 4:
                    cur[k] |= 2
                    stack.push_back(k)
            while stack.size():
                k = stack.back()
                stack.pop_back()
                self.work += 1
                self._pred(k, succ)
                for s in succ:
                    if (cur[s] & 1) and not (cur[s] & 2):
                        cur[s] |= 2
                        stack.push_back(s)
        self.ready = True

    def nonempty(self):
        self.prepare()
        return bool(self.flags[self.q0] & 2)

    cdef void _candidates(self, int level, vector[int]& front, i64 st):
        cdef char* F = &self.flags[level * self.M]
        cdef int* seen = &self.stamp[0]
        cdef int tag = self._next_stamp()
        cdef vector[i64]* stack = &self.s_stack
        cdef vector[i64]* succ = &self.s_succ
        cdef vector[i64]* hits = &self.s_hits
        cdef vector[pair[u64, i64]]* order = &self.s_order
        cdef i64 k, s, st2, prev
        cdef int x, a, b, j, q
        cdef u64 mask
        hits.clear()
        order.clear()
        for q in front:
            k = st * self.N + q
            if seen[k] != tag:
                seen[k] = tag
                stack.push_back(k)
        while stack.size():
            k = stack.back()
            stack.pop_back()
            self.work += 1
            if F[k] & 4:
                hits.push_back(k)
            self._succ(k, succ[0])
            for s in succ[0]:
                if seen[s] != tag and (F[s] & 2):
                    seen[s] = tag
                    stack.push_back(s)
        # the mask determines st2 given st, so sorting by (mask, key)
        # groups exit states of one candidate contiguously
        for k in hits[0]:
            st2 = k // self.N
            mask = 0
            for x in range(self.v):
                a = <int>((st // self.p3[x]) % 3)
                b = <int>((st2 // self.p3[x]) % 3)
                if a == 0 and b >= 1:
                    mask |= (<u64>1) << (2 * x)
                if a <= 1 and b == 2:
                    mask |= (<u64>1) << (2 * x + 1)
            order.push_back(pair[u64, i64](mask, k))
        cpp_sort(order.begin(), order.end())
        self.cmask[level].clear()
        self.cst[level].clear()
        self.cqptr[level].clear()
        self.cqs[level].clear()
        prev = -1
        for j in range(<int>order.size()):
            st2 = order[0][j].second // self.N
            if st2 != prev:
                self.cqptr[level].push_back(self.cqs[level].size())
                self.cmask[level].push_back(order[0][j].first)
                self.cst[level].push_back(st2)
                prev = st2
            self.cqs[level].push_back(<int>(order[0][j].second % self.N))
        self.cqptr[level].push_back(self.cqs[level].size())
        self.cidx[level] = 0

    cdef void _advance(self, int level, int cand, vector[int]& out):
        cdef char* nxt = &self.flags[(level + 1) * self.M]
        cdef int* seen = &self.qstamp[0]
        cdef int c = self.doc[level]
        cdef i64 base = self.cst[level][cand] * self.N
        cdef int j, q, e, r
        if self.cur_qstamp == 2147483647:
            self.qstamp.assign(self.N, 0)
            self.cur_qstamp = 0
        self.cur_qstamp += 1
        seen = &self.qstamp[0]
        out.clear()
        for j in range(self.cqptr[level][cand], self.cqptr[level][cand + 1]):
            q = self.cqs[level][j]
            for e in range(self.sym_ptr[q], self.sym_ptr[q + 1]):
                if self.sym_c[e] == c:
                    r = self.sym_dst[e]
                    if seen[r] != self.cur_qstamp and (nxt[base + r] & 2):
                        seen[r] = self.cur_qstamp
                        out.push_back(r)

    cdef void _start(self):
        cdef vector[int] front
        self.prepare()
        self.started = True
        self.cmask.resize(self.n + 1)
        self.cst.resize(self.n + 1)
        self.cqptr.resize(self.n + 1)
        self.cqs.resize(self.n + 1)
        self.cidx.resize(self.n + 1)
        if not (self.flags[self.q0] & 2):
            self.depth = -1
            return
        front.push_back(self.q0)
        self._candidates(0, front, 0)
        self.depth = 0

    cdef bint _next(self):
        cdef int level, k, x, pos
        cdef u64 mask
        cdef vector[int] front
        if not self.started:
            self._start()
        while self.depth >= 0:
            level = self.depth
            k = self.cidx[level]
            if k == <int>self.cmask[level].size():
                self.depth -= 1
                continue
            self.cidx[level] = k + 1
            mask = self.cmask[level][k]
            if k > 0 and mask <= self.cmask[level][k - 1]:
                self.order_ok = False
            if mask:
                pos = level + 1
                for x in range(self.v):
                    if (mask >> (2 * x)) & 1:
                        self.opened[x] = pos
                    if (mask >> (2 * x + 1)) & 1:
                        self.closed[x] = pos
            if level == self.n:
                self.cur_st = self.cst[level][k]
                return True
            self._advance(level, k, front)
            self._candidates(level + 1, front, self.cst[level][k])
            self.depth = level + 1
        return False

    def events(self):
        """Iterate (status, opened, closed) like the Python kernel."""
        while self._next():
            yield self.cur_st, list(self.opened), list(self.closed)

    def next_spans(self):
        """Next result as a tuple of (open, close) or None per variable;
        returns None when exhausted."""
        cdef int x
        cdef i64 st
        if not self._next():
            return None
        st = self.cur_st
        out = []
        for x in range(self.v):
            if (st // self.p3[x]) % 3 == 2:
                out.append((self.opened[x], self.closed[x]))
            else:
                out.append(None)
        return tuple(out)

    def measure(self, limit=None):
        cdef i64 count = 0, last = 0, maxgap = 0, first = 0, gap
        cdef i64 lim = -1 if limit is None else limit
        self.work = 0
        while self._next():
            gap = self.work - last
            last = self.work
            if count == 0:
                first = gap
            if gap > maxgap:
                maxgap = gap
            count += 1
            if lim >= 0 and count >= lim:
                break
        if self.work - last > maxgap:
            maxgap = self.work - last
        return count, maxgap, first, self.order_ok
