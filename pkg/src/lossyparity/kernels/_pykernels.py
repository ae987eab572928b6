"""Pure-Python reference kernels.

Every function here has a twin with the same signature and results in
``_ckernels.pyx``.  Graphs arrive in CSR form (``ptr``/``idx`` int32
arrays); sets arrive as uint8 flag arrays of length ``n``.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def force_layers(succ_ptr, succ_idx, pred_ptr, pred_idx, exist, target, restriction):
    """Layer index of every state in the positive-probability force set, -1 outside.

    ``exist[s]`` is 1 where one successor suffices (forcing player and random
    states) and 0 where all successors inside ``restriction`` must already be
    in the set (the opponent).  Layer ``i`` holds the states first added in
    round ``i`` of the naive recomputation.
    """
    sp = succ_ptr.tolist()
    si = succ_idx.tolist()
    pp = pred_ptr.tolist()
    pi = pred_idx.tolist()
    ex = exist.tolist()
    tg = target.tolist()
    rs = restriction.tolist()
    n = len(rs)
    layer = [-1] * n
    count = [0] * n
    frontier = []
    seeded = []
    for s in range(n):
        if not rs[s]:
            continue
        if tg[s]:
            layer[s] = 0
            frontier.append(s)
            continue
        c = 0
        for k in range(sp[s], sp[s + 1]):
            if rs[si[k]]:
                c += 1
        count[s] = c
        if c == 0 and not ex[s]:
            seeded.append(s)
    rnd = 0
    while frontier or seeded:
        nxt = []
        if rnd == 0:
            for s in seeded:
                layer[s] = 1
                nxt.append(s)
            seeded = []
        for t in frontier:
            for k in range(pp[t], pp[t + 1]):
                p = pi[k]
                if not rs[p] or layer[p] != -1:
                    continue
                if ex[p]:
                    layer[p] = rnd + 1
                    nxt.append(p)
                else:
                    count[p] -= 1
                    if count[p] == 0:
                        layer[p] = rnd + 1
                        nxt.append(p)
        frontier = nxt
        rnd += 1
    return np.asarray(layer, dtype=np.int32)


def _bscc_flags(n, sp, si, colors):
    # Iterative Tarjan.  SCCs pop in reverse topological order, so every
    # successor component is already labelled when a component closes.
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    comp = [-1] * n
    comp_flag = []
    stack = []
    counter = 0
    flags = [0] * n
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, sp[root])]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, k = work[-1]
            if k < sp[v + 1]:
                work[-1] = (v, k + 1)
                w = si[k]
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, sp[w]))
                elif on_stack[w] and index[w] < low[v]:
                    low[v] = index[w]
                continue
            work.pop()
            if work:
                u = work[-1][0]
                if low[v] < low[u]:
                    low[u] = low[v]
            if low[v] != index[v]:
                continue
            cid = len(comp_flag)
            members = []
            while True:
                w = stack.pop()
                on_stack[w] = False
                comp[w] = cid
                members.append(w)
                if w == v:
                    break
            bottom = True
            reach = 0
            top = -1
            for w in members:
                if colors[w] > top:
                    top = colors[w]
                for kk in range(sp[w], sp[w + 1]):
                    c = comp[si[kk]]
                    if c != cid:
                        bottom = False
                        reach |= comp_flag[c]
            f = (1 << (top & 1)) if bottom else reach
            comp_flag.append(f)
            for w in members:
                flags[w] = f
    return flags


def bscc_flags(succ_ptr, succ_idx, colors):
    """Per state: bit 0 set iff an even-max BSCC is reachable, bit 1 iff an odd one is."""
    sp = succ_ptr.tolist()
    si = succ_idx.tolist()
    col = colors.tolist()
    return np.asarray(_bscc_flags(len(col), sp, si, col), dtype=np.uint8)


def classify_profiles(succ_ptr, succ_idx, owner, colors):
    """Qualitative parity classification by enumerating memoryless profiles.

    ``owner`` codes: 0 / 1 players, 2 random.  Returns uint8 arrays
    ``(as0, pos0, as1, pos1)``: player ``p`` wins almost surely (resp. with
    positive probability) from ``s`` iff some memoryless strategy of ``p``
    achieves it against every memoryless strategy of the opponent.
    """
    sp = succ_ptr.tolist()
    si = succ_idx.tolist()
    own = owner.tolist()
    col = colors.tolist()
    n = len(col)
    choosers = [[s for s in range(n) if own[s] == p] for p in (0, 1)]
    radix = [[sp[s + 1] - sp[s] for s in choosers[p]] for p in (0, 1)]
    count = [1, 1]
    for p in (0, 1):
        for r in radix[p]:
            count[p] *= r
    full = (1 << n) - 1
    # best0[as|pos] = OR over sigma0 of AND over sigma1; opp1 arrays are
    # AND over sigma0 accumulated per sigma1.
    as0_best = pos0_best = 0
    as1_acc = [full] * count[1]
    pos1_acc = [full] * count[1]
    base_ptr = [0] * (n + 1)
    for s in range(n):
        base_ptr[s + 1] = base_ptr[s] + (1 if own[s] != 2 else sp[s + 1] - sp[s])
    idx = [0] * base_ptr[n]
    for s in range(n):
        if own[s] == 2:
            idx[base_ptr[s]:base_ptr[s + 1]] = si[sp[s]:sp[s + 1]]
    digits = [[0] * len(choosers[0]), [0] * len(choosers[1])]
    for a in range(count[0]):
        _decode(a, radix[0], digits[0])
        for k, s in enumerate(choosers[0]):
            idx[base_ptr[s]] = si[sp[s] + digits[0][k]]
        as0_acc = pos0_acc = full
        for b in range(count[1]):
            _decode(b, radix[1], digits[1])
            for k, s in enumerate(choosers[1]):
                idx[base_ptr[s]] = si[sp[s] + digits[1][k]]
            fl = _bscc_flags(n, base_ptr, idx, col)
            m_as0 = m_pos0 = m_as1 = m_pos1 = 0
            for s in range(n):
                f = fl[s]
                bit = 1 << s
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
    as1_best = pos1_best = 0
    for b in range(count[1]):
        as1_best |= as1_acc[b]
        pos1_best |= pos1_acc[b]
    out = []
    for m in (as0_best, pos0_best, as1_best, pos1_best):
        out.append(np.asarray([(m >> s) & 1 for s in range(n)], dtype=np.uint8))
    return tuple(out)


def _decode(value, radix, digits):
    for k, r in enumerate(radix):
        digits[k] = value % r
        value //= r


def embedding_count(y: str, x: str) -> int:
    """Number of position subsets of ``y`` whose deletion leaves ``x``."""
    m = len(x)
    if m > len(y):
        return 0
    row = [1] + [0] * m
    for ch in y:
        for j in range(m, 0, -1):
            if x[j - 1] == ch:
                row[j] += row[j - 1]
    return row[m]


def simulate_plays(succ_ptr, succ_idx, cumprob, owner, choice, colors, uniforms,
                   start, target, region, attractor, stop_at_target, ncolors):
    """Run ``uniforms.shape[0]`` plays of length ``uniforms.shape[1]``.

    Each step consumes exactly one uniform: random states invert the
    cumulative row, states with ``choice[s] >= 0`` follow it, and other
    player states pick a successor uniformly.  Returns per-trial arrays
    ``(hit_step, exit_step, steps, attractor_visits, color_counts)`` where
    color counts cover the trailing half of the executed steps.
    """
    sp = succ_ptr.tolist()
    si = succ_idx.tolist()
    cp = cumprob.tolist()
    own = owner.tolist()
    ch = choice.tolist()
    col = colors.tolist()
    tg = target.tolist()
    rg = region.tolist()
    at = attractor.tolist()
    trials, horizon = uniforms.shape
    hit = np.full(trials, -1, dtype=np.int64)
    exit_ = np.full(trials, -1, dtype=np.int64)
    steps = np.zeros(trials, dtype=np.int64)
    visits = np.zeros(trials, dtype=np.int64)
    counts = np.zeros((trials, ncolors), dtype=np.int64)
    for t in range(trials):
        u = uniforms[t].tolist()
        s = start
        path = [s]
        h = -1
        e = -1 if rg[s] else 0
        if tg[s]:
            h = 0
        if not (stop_at_target and h == 0):
            for i in range(horizon):
                lo, hi = sp[s], sp[s + 1]
                if own[s] == 2:
                    k = lo
                    while k < hi - 1 and u[i] >= cp[k]:
                        k += 1
                    s = si[k]
                elif ch[s] >= 0:
                    s = ch[s]
                else:
                    s = si[lo + min(int(u[i] * (hi - lo)), hi - lo - 1)]
                path.append(s)
                if e < 0 and not rg[s]:
                    e = i + 1
                if h < 0 and tg[s]:
                    h = i + 1
                    if stop_at_target:
                        break
        hit[t] = h
        exit_[t] = e
        steps[t] = len(path) - 1
        visits[t] = sum(at[v] for v in path)
        for v in path[len(path) // 2:]:
            counts[t, col[v]] += 1
    return hit, exit_, steps, visits, counts
