# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels.  Same signatures and results as ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free
from libc.string cimport memset
from libc.stdint cimport uint64_t, int64_t

from . import _pykernels

cnp.import_array()

BACKEND = "cython"


def force_layers(const int[::1] succ_ptr, const int[::1] succ_idx,
                 const int[::1] pred_ptr, const int[::1] pred_idx,
                 const unsigned char[::1] exist, const unsigned char[::1] target,
                 const unsigned char[::1] restriction):
    cdef Py_ssize_t n = restriction.shape[0]
    out = np.full(n, -1, dtype=np.int32)
    cdef int[::1] layer = out
    cdef int* count = <int*> malloc((n + 1) * sizeof(int))
    cdef int* cur = <int*> malloc((n + 1) * sizeof(int))
    cdef int* nxt = <int*> malloc((n + 1) * sizeof(int))
    cdef int* tmp
    cdef Py_ssize_t ncur = 0, nnext = 0, i, s, t, p, k
    cdef int c, rnd = 0
    try:
        memset(count, 0, (n + 1) * sizeof(int))
        for s in range(n):
            if not restriction[s]:
                continue
            if target[s]:
                layer[s] = 0
                cur[ncur] = s
                ncur += 1
                continue
            c = 0
            for k in range(succ_ptr[s], succ_ptr[s + 1]):
                if restriction[succ_idx[k]]:
                    c += 1
            count[s] = c
        # universal states with no successor left inside are vacuously forced
        for s in range(n):
            if restriction[s] and not target[s] and count[s] == 0 and not exist[s]:
                layer[s] = 1
                nxt[nnext] = s
                nnext += 1
        while ncur > 0 or nnext > 0:
            for i in range(ncur):
                t = cur[i]
                for k in range(pred_ptr[t], pred_ptr[t + 1]):
                    p = pred_idx[k]
                    if not restriction[p] or layer[p] != -1:
                        continue
                    if exist[p]:
                        layer[p] = rnd + 1
                        nxt[nnext] = p
                        nnext += 1
                    else:
                        count[p] -= 1
                        if count[p] == 0:
                            layer[p] = rnd + 1
                            nxt[nnext] = p
                            nnext += 1
            tmp = cur
            cur = nxt
            nxt = tmp
            ncur = nnext
            nnext = 0
            rnd += 1
    finally:
        free(count)
        free(cur)
        free(nxt)
    return out


cdef void _bscc(int n, const int* sp, const int* si, const int* colors,
                int* flags, int* work) noexcept nogil:
    # work holds 8 blocks of n+1 ints: index, low, onstack, comp, stack,
    # call stack, call positions, component flags
    cdef int* index = work
    cdef int* low = work + (n + 1)
    cdef int* onst = work + 2 * (n + 1)
    cdef int* comp = work + 3 * (n + 1)
    cdef int* stack = work + 4 * (n + 1)
    cdef int* cstack = work + 5 * (n + 1)
    cdef int* cpos = work + 6 * (n + 1)
    cdef int counter = 0, sp_top = 0, cs_top = 0, ncomp = 0
    cdef int root, v, w, u, k, kk, cid, top, f, bottom, reach, c, start
    cdef int* compflag = work + 7 * (n + 1)
    for v in range(n):
        index[v] = -1
        onst[v] = 0
        comp[v] = -1
    for root in range(n):
        if index[root] != -1:
            continue
        index[root] = counter
        low[root] = counter
        counter += 1
        stack[sp_top] = root
        sp_top += 1
        onst[root] = 1
        cstack[cs_top] = root
        cpos[cs_top] = sp[root]
        cs_top += 1
        while cs_top > 0:
            v = cstack[cs_top - 1]
            k = cpos[cs_top - 1]
            if k < sp[v + 1]:
                cpos[cs_top - 1] = k + 1
                w = si[k]
                if index[w] == -1:
                    index[w] = counter
                    low[w] = counter
                    counter += 1
                    stack[sp_top] = w
                    sp_top += 1
                    onst[w] = 1
                    cstack[cs_top] = w
                    cpos[cs_top] = sp[w]
                    cs_top += 1
                elif onst[w] and index[w] < low[v]:
                    low[v] = index[w]
                continue
            cs_top -= 1
            if cs_top > 0:
                u = cstack[cs_top - 1]
                if low[v] < low[u]:
                    low[u] = low[v]
            if low[v] != index[v]:
                continue
            cid = ncomp
            ncomp += 1
            start = sp_top
            while True:
                sp_top -= 1
                w = stack[sp_top]
                onst[w] = 0
                comp[w] = cid
                if w == v:
                    break
            bottom = 1
            reach = 0
            top = -1
            for kk in range(sp_top, start):
                w = stack[kk]
                if colors[w] > top:
                    top = colors[w]
                for k in range(sp[w], sp[w + 1]):
                    c = comp[si[k]]
                    if c != cid:
                        bottom = 0
                        reach |= compflag[c]
            if bottom:
                f = 1 << (top & 1)
            else:
                f = reach
            compflag[cid] = f
            for kk in range(sp_top, start):
                flags[stack[kk]] = f


def bscc_flags(const int[::1] succ_ptr, const int[::1] succ_idx, const int[::1] colors):
    cdef int n = colors.shape[0]
    out = np.zeros(n, dtype=np.uint8)
    cdef unsigned char[::1] o = out
    cdef int* flags = <int*> malloc((n + 1) * sizeof(int))
    cdef int* work = <int*> malloc(8 * (n + 1) * sizeof(int))
    cdef int s
    try:
        _bscc(n, &succ_ptr[0], &succ_idx[0] if succ_idx.shape[0] else NULL,
              &colors[0] if n else NULL, flags, work)
        for s in range(n):
            o[s] = flags[s]
    finally:
        free(flags)
        free(work)
    return out


def classify_profiles(succ_ptr, succ_idx, owner, colors):
    if colors.shape[0] > 64:
        return _pykernels.classify_profiles(succ_ptr, succ_idx, owner, colors)
    return _classify(succ_ptr, succ_idx, owner, colors)


cdef object _classify(const int[::1] succ_ptr, const int[::1] succ_idx,
                      const unsigned char[::1] owner, const int[::1] colors):
    cdef int n = colors.shape[0]
    cdef int s, k, p, nc0 = 0, nc1 = 0
    cdef int64_t a, b, cnt0 = 1, cnt1 = 1, v
    cdef uint64_t full = (<uint64_t> 0xFFFFFFFFFFFFFFFF) >> (64 - n) if n else 0
    cdef uint64_t as0_best = 0, pos0_best = 0, as0_acc, pos0_acc
    cdef uint64_t m_as0, m_pos0, m_as1, m_pos1, bit
    cdef int f
    ch0 = [q for q in range(n) if owner[q] == 0]
    ch1 = [q for q in range(n) if owner[q] == 1]
    nc0 = len(ch0)
    nc1 = len(ch1)
    for s in ch0:
        cnt0 *= succ_ptr[s + 1] - succ_ptr[s]
    for s in ch1:
        cnt1 *= succ_ptr[s + 1] - succ_ptr[s]
    cdef int* c0 = <int*> malloc((nc0 + 1) * sizeof(int))
    cdef int* c1 = <int*> malloc((nc1 + 1) * sizeof(int))
    cdef int* bp = <int*> malloc((n + 1) * sizeof(int))
    cdef int* idx = <int*> malloc((succ_idx.shape[0] + 1) * sizeof(int))
    cdef int* col = <int*> malloc((n + 1) * sizeof(int))
    cdef int* flags = <int*> malloc((n + 1) * sizeof(int))
    cdef int* work = <int*> malloc(8 * (n + 1) * sizeof(int))
    cdef uint64_t* as1_acc = <uint64_t*> malloc((cnt1 + 1) * sizeof(uint64_t))
    cdef uint64_t* pos1_acc = <uint64_t*> malloc((cnt1 + 1) * sizeof(uint64_t))
    cdef uint64_t as1_best = 0, pos1_best = 0
    try:
        if as1_acc == NULL or pos1_acc == NULL:
            raise MemoryError()
        for k in range(nc0):
            c0[k] = ch0[k]
        for k in range(nc1):
            c1[k] = ch1[k]
        bp[0] = 0
        for s in range(n):
            col[s] = colors[s]
            if owner[s] == 2:
                bp[s + 1] = bp[s] + succ_ptr[s + 1] - succ_ptr[s]
                for k in range(succ_ptr[s + 1] - succ_ptr[s]):
                    idx[bp[s] + k] = succ_idx[succ_ptr[s] + k]
            else:
                bp[s + 1] = bp[s] + 1
        for b in range(cnt1):
            as1_acc[b] = full
            pos1_acc[b] = full
        with nogil:
            for a in range(cnt0):
                v = a
                for k in range(nc0):
                    s = c0[k]
                    p = succ_ptr[s + 1] - succ_ptr[s]
                    idx[bp[s]] = succ_idx[succ_ptr[s] + v % p]
                    v = v // p
                as0_acc = full
                pos0_acc = full
                for b in range(cnt1):
                    v = b
                    for k in range(nc1):
                        s = c1[k]
                        p = succ_ptr[s + 1] - succ_ptr[s]
                        idx[bp[s]] = succ_idx[succ_ptr[s] + v % p]
                        v = v // p
                    _bscc(n, bp, idx, col, flags, work)
                    m_as0 = 0
                    m_pos0 = 0
                    m_as1 = 0
                    m_pos1 = 0
                    for s in range(n):
                        f = flags[s]
                        bit = (<uint64_t> 1) << s
                        if f == 1:
                            m_as0 |= bit
                        elif f == 2:
                            m_as1 |= bit
                        if f & 1:
                            m_pos0 |= bit
                        if f & 2:
                            m_pos1 |= bit
                    as0_acc &= m_as0
                    pos0_acc &= m_pos0
                    as1_acc[b] &= m_as1
                    pos1_acc[b] &= m_pos1
                as0_best |= as0_acc
                pos0_best |= pos0_acc
            for b in range(cnt1):
                as1_best |= as1_acc[b]
                pos1_best |= pos1_acc[b]
    finally:
        free(c0)
        free(c1)
        free(bp)
        free(idx)
        free(col)
        free(flags)
        free(work)
        free(as1_acc)
        free(pos1_acc)
    out = []
    for m in (as0_best, pos0_best, as1_best, pos1_best):
        out.append(np.asarray([(m >> s) & 1 for s in range(n)], dtype=np.uint8))
    return tuple(out)


def embedding_count(str y, str x):
    cdef Py_ssize_t m = len(x), ny = len(y), i, j
    cdef unsigned long long* row
    if m > ny:
        return 0
    if ny > 62:
        # counts may exceed 64 bits
        return _pykernels.embedding_count(y, x)
    row = <unsigned long long*> malloc((m + 1) * sizeof(unsigned long long))
    try:
        row[0] = 1
        for j in range(1, m + 1):
            row[j] = 0
        for i in range(ny):
            for j in range(m, 0, -1):
                if x[j - 1] == y[i]:
                    row[j] += row[j - 1]
        return row[m]
    finally:
        free(row)


def simulate_plays(const int[::1] succ_ptr, const int[::1] succ_idx,
                   const double[::1] cumprob, const unsigned char[::1] owner,
                   const int[::1] choice, const int[::1] colors,
                   const double[:, ::1] uniforms, int start,
                   const unsigned char[::1] target, const unsigned char[::1] region,
                   const unsigned char[::1] attractor, bint stop_at_target, int ncolors):
    cdef Py_ssize_t trials = uniforms.shape[0], horizon = uniforms.shape[1]
    hit_a = np.full(trials, -1, dtype=np.int64)
    exit_a = np.full(trials, -1, dtype=np.int64)
    steps_a = np.zeros(trials, dtype=np.int64)
    visits_a = np.zeros(trials, dtype=np.int64)
    counts_a = np.zeros((trials, ncolors), dtype=np.int64)
    cdef int64_t[::1] hit = hit_a
    cdef int64_t[::1] ex = exit_a
    cdef int64_t[::1] steps = steps_a
    cdef int64_t[::1] visits = visits_a
    cdef int64_t[:, ::1] counts = counts_a
    cdef int* path = <int*> malloc((horizon + 1) * sizeof(int))
    cdef Py_ssize_t t, i, length, lo, hi, k, d
    cdef int s, h, e
    cdef int64_t vis
    cdef double u
    try:
        with nogil:
            for t in range(trials):
                s = start
                path[0] = s
                length = 1
                h = -1
                e = 0 if not region[s] else -1
                if target[s]:
                    h = 0
                if not (stop_at_target and h == 0):
                    for i in range(horizon):
                        lo = succ_ptr[s]
                        hi = succ_ptr[s + 1]
                        u = uniforms[t, i]
                        if owner[s] == 2:
                            k = lo
                            while k < hi - 1 and u >= cumprob[k]:
                                k += 1
                            s = succ_idx[k]
                        elif choice[s] >= 0:
                            s = choice[s]
                        else:
                            d = <Py_ssize_t> (u * (hi - lo))
                            if d > hi - lo - 1:
                                d = hi - lo - 1
                            s = succ_idx[lo + d]
                        path[length] = s
                        length += 1
                        if e < 0 and not region[s]:
                            e = i + 1
                        if h < 0 and target[s]:
                            h = i + 1
                            if stop_at_target:
                                break
                hit[t] = h
                ex[t] = e
                steps[t] = length - 1
                vis = 0
                for k in range(length):
                    vis += attractor[path[k]]
                visits[t] = vis
                for k in range(length // 2, length):
                    counts[t, colors[path[k]]] += 1
    finally:
        free(path)
    return hit_a, exit_a, steps_a, visits_a, counts_a
