"""Compiled inner loops: clique-tree counting, degeneracy peeling, growth.

Everything here works on flat numpy arrays. Random draws go through an
explicit ``numpy.random.Generator`` so that the compiled growth loop and the
pure-Python step functions consume the same stream in the same order.
"""
import math

import numpy as np
from numba import njit

MODEL_LPAM = 0
MODEL_FOREST_FIRE = 1
MODEL_BA = 2

STATUS_OK = 0
STATUS_CLIQUE_CAP = 1
STATUS_TALLY_OVERFLOW = 2


# --------------------------------------------------------------------------
# bitsets


@njit(cache=True, inline="always")
def _popcount(x):
    x = x - ((x >> np.uint64(1)) & np.uint64(0x5555555555555555))
    x = (x & np.uint64(0x3333333333333333)) + ((x >> np.uint64(2)) & np.uint64(0x3333333333333333))
    x = (x + (x >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    return int((x * np.uint64(0x0101010101010101)) >> np.uint64(56))


@njit(cache=True, inline="always")
def _lowest_bit(row, W):
    for w in range(W):
        x = row[w]
        if x != 0:
            b = 0
            while (x >> np.uint64(b)) & np.uint64(1) == 0:
                b += 1
            return w * 64 + b
    return -1


@njit(cache=True)
def sct_leaves(nbits, s, h0, max_h, leaves, limit=0.0):
    """Walk the pivoting clique tree of a local graph, tallying leaves.

    ``nbits[i]`` is the neighbour bitset of local vertex ``i``. The walk
    starts with all ``s`` vertices as candidates and ``h0`` vertices already
    held. Each leaf with ``h`` held and ``q`` pivot vertices increments
    ``leaves[h, q]``; it stands for ``C(q, k - h)`` cliques of size ``k``.

    Returns ``(sum over leaves of 2**q, overflow)``; overflow means a leaf
    fell outside ``leaves``. A positive ``limit`` stops the walk early once
    that sum exceeds it (the tally is then partial).
    """
    W = nbits.shape[1]
    depth_max = s + 2
    P = np.zeros((depth_max, W), dtype=np.uint64)
    T = np.zeros((depth_max, W), dtype=np.uint64)
    R = np.zeros((depth_max, W), dtype=np.uint64)
    H = np.zeros(depth_max, dtype=np.int64)
    Q = np.zeros(depth_max, dtype=np.int64)
    stage = np.zeros(depth_max, dtype=np.int64)
    dim_h = leaves.shape[0]
    dim_q = leaves.shape[1]
    for i in range(s):
        P[0, i // 64] |= np.uint64(1) << np.uint64(i % 64)
    H[0] = h0
    stage[0] = -1
    depth = 0
    total = 0.0
    overflow = False
    while depth >= 0:
        if stage[depth] == -1:
            empty = True
            for w in range(W):
                if P[depth, w] != 0:
                    empty = False
                    break
            if empty:
                h = H[depth]
                q = Q[depth]
                if h < dim_h and q < dim_q:
                    leaves[h, q] += 1
                else:
                    overflow = True
                total += 2.0 ** q
                if limit > 0.0 and total > limit:
                    break
                depth -= 1
                continue
            # pivot: candidate with most candidate neighbours, lowest index on ties
            best = -1
            best_cnt = -1
            for w in range(W):
                x = P[depth, w]
                while x != 0:
                    low = x & (~x + np.uint64(1))
                    b = _popcount(low - np.uint64(1))
                    u = w * 64 + b
                    cnt = 0
                    for w2 in range(W):
                        cnt += _popcount(P[depth, w2] & nbits[u, w2])
                    if cnt > best_cnt:
                        best_cnt = cnt
                        best = u
                    x ^= low
            for w in range(W):
                T[depth, w] = P[depth, w] & ~nbits[best, w]
                R[depth, w] = P[depth, w]
                P[depth + 1, w] = P[depth, w] & nbits[best, w]
            T[depth, best // 64] &= ~(np.uint64(1) << np.uint64(best % 64))
            stage[depth] = 0
            H[depth + 1] = H[depth]
            Q[depth + 1] = Q[depth] + 1
            stage[depth + 1] = -1
            depth += 1
        else:
            v = _lowest_bit(T[depth], W)
            if v < 0:
                depth -= 1
                continue
            vbit = np.uint64(1) << np.uint64(v % 64)
            T[depth, v // 64] &= ~vbit
            if H[depth] + 1 <= max_h:
                for w in range(W):
                    P[depth + 1, w] = R[depth, w] & nbits[v, w]
                H[depth + 1] = H[depth] + 1
                Q[depth + 1] = Q[depth]
                stage[depth + 1] = -1
                R[depth, v // 64] &= ~vbit
                depth += 1
            else:
                R[depth, v // 64] &= ~vbit
    return total, overflow


# --------------------------------------------------------------------------
# whole-graph counting


@njit(cache=True)
def degeneracy_order(indptr, indices):
    """Batagelj-Zaversnik bucket peeling. Returns ``(order, degeneracy)``.

    When a vertex is taken its residual degree is at most its core number,
    so every later-ordered neighbourhood has size <= degeneracy.
    """
    n = indptr.shape[0] - 1
    deg = np.empty(n, dtype=np.int64)
    maxd = 0
    for u in range(n):
        deg[u] = indptr[u + 1] - indptr[u]
        if deg[u] > maxd:
            maxd = deg[u]
    bin_start = np.zeros(maxd + 1, dtype=np.int64)
    for u in range(n):
        bin_start[deg[u]] += 1
    acc = 0
    for d in range(maxd + 1):
        c = bin_start[d]
        bin_start[d] = acc
        acc += c
    vert = np.empty(n, dtype=np.int64)
    pos = np.empty(n, dtype=np.int64)
    for u in range(n):
        pos[u] = bin_start[deg[u]]
        vert[pos[u]] = u
        bin_start[deg[u]] += 1
    for d in range(maxd, 0, -1):
        bin_start[d] = bin_start[d - 1]
    if maxd >= 0 and n > 0:
        bin_start[0] = 0
    degeneracy = 0
    for i in range(n):
        v = vert[i]
        if deg[v] > degeneracy:
            degeneracy = deg[v]
        for j in range(indptr[v], indptr[v + 1]):
            u = indices[j]
            if deg[u] > deg[v]:
                du = deg[u]
                pu = pos[u]
                pw = bin_start[du]
                w = vert[pw]
                if u != w:
                    pos[u] = pw
                    vert[pu] = w
                    pos[w] = pu
                    vert[pw] = u
                bin_start[du] += 1
                deg[u] -= 1
    return vert, degeneracy


@njit(cache=True)
def orient(indptr, indices, order):
    """Keep only edges pointing later in ``order``; rows stay id-sorted."""
    n = indptr.shape[0] - 1
    rank = np.empty(n, dtype=np.int64)
    for i in range(n):
        rank[order[i]] = i
    out_ptr = np.zeros(n + 1, dtype=np.int64)
    for u in range(n):
        c = 0
        for j in range(indptr[u], indptr[u + 1]):
            if rank[indices[j]] > rank[u]:
                c += 1
        out_ptr[u + 1] = out_ptr[u] + c
    out_idx = np.empty(out_ptr[n], dtype=np.int64)
    for u in range(n):
        c = out_ptr[u]
        for j in range(indptr[u], indptr[u + 1]):
            if rank[indices[j]] > rank[u]:
                out_idx[c] = indices[j]
                c += 1
    return out_ptr, out_idx


@njit(cache=True)
def root_leaves(out_ptr, out_idx, roots, max_h, dim):
    """Clique-tree leaves for every root, holding the root itself.

    Root ``v`` explores its later-ordered neighbourhood, so each clique is
    reached exactly once, from its earliest member.
    """
    n = out_ptr.shape[0] - 1
    leaves = np.zeros((dim, dim), dtype=np.int64)
    pos = np.full(n, -1, dtype=np.int64)
    for v in roots:
        s = out_ptr[v + 1] - out_ptr[v]
        W = max(1, (s + 63) // 64)
        nbits = np.zeros((max(s, 1), W), dtype=np.uint64)
        for i in range(s):
            pos[out_idx[out_ptr[v] + i]] = i
        for i in range(s):
            u = out_idx[out_ptr[v] + i]
            for j in range(out_ptr[u], out_ptr[u + 1]):
                t = pos[out_idx[j]]
                if t >= 0:
                    nbits[i, t // 64] |= np.uint64(1) << np.uint64(t % 64)
                    nbits[t, i // 64] |= np.uint64(1) << np.uint64(i % 64)
        sct_leaves(nbits, s, 1, max_h, leaves)
        for i in range(s):
            pos[out_idx[out_ptr[v] + i]] = -1
    return leaves


# --------------------------------------------------------------------------
# LPAM neighbour probabilities


@njit(cache=True)
def redistribute(p, r, degrees):
    """Degree-scaled link probabilities, capped at ``p + (1 - p) r``.

    Values above the cap are clipped and their pooled excess is spread
    evenly over the values strictly below it, until nothing exceeds the cap.
    """
    k = degrees.shape[0]
    out = np.empty(k, dtype=np.float64)
    tau = p + (1.0 - p) * r
    if p <= 0.0:
        out[:] = 0.0
        return out
    if tau <= p:
        # r = 0 or p = 1: the only fixed point is uniform p
        out[:] = p
        return out
    total = 0.0
    for i in range(k):
        total += degrees[i]
    mean = total / k
    for i in range(k):
        out[i] = p * degrees[i] / mean
    for _ in range(k + 1):
        excess = 0.0
        for i in range(k):
            if out[i] > tau:
                excess += out[i] - tau
                out[i] = tau
        if excess <= 0.0:
            break
        n_below = 0
        for i in range(k):
            if out[i] < tau:
                n_below += 1
        if n_below == 0:
            break
        share = excess / n_below
        for i in range(k):
            if out[i] < tau:
                out[i] += share
    return out


@njit(cache=True)
def geometric_count(prob, limit, rng):
    """Draw from P(x) = (1 - prob) prob**x, truncated at ``limit``."""
    if limit <= 0 or prob <= 0.0:
        return 0
    if prob >= 1.0:
        return limit
    u = 1.0 - rng.random()
    x = math.floor(math.log(u) / math.log(prob))
    if x >= limit:
        return limit
    return int(x)


# --------------------------------------------------------------------------
# growth


@njit(cache=True)
def _reserve(pool, pool_end, start, deg, cap, n, x, extra):
    """Make room for ``extra`` more neighbours of ``x``, relocating its list."""
    if deg[x] + extra <= cap[x]:
        return pool, pool_end
    newcap = max(4, 2 * cap[x], deg[x] + extra)
    if pool_end + newcap > pool.shape[0]:
        # compact live lists into a fresh, larger pool
        live = 0
        for y in range(n):
            live += cap[y]
        size = max(2 * (live + newcap), pool.shape[0])
        fresh = np.empty(size, dtype=pool.dtype)
        end = 0
        for y in range(n):
            fresh[end:end + deg[y]] = pool[start[y]:start[y] + deg[y]]
            start[y] = end
            end += cap[y]
        pool = fresh
        pool_end = end
    pool[pool_end:pool_end + deg[x]] = pool[start[x]:start[x] + deg[x]]
    start[x] = pool_end
    cap[x] = newcap
    pool_end += newcap
    return pool, pool_end


@njit(cache=True)
def _fenwick_add(fen, i, delta):
    i += 1
    size = fen.shape[0] - 1
    while i <= size:
        fen[i] += delta
        i += i & (-i)


@njit(cache=True)
def _fenwick_find(fen, x):
    """First index whose prefix sum exceeds ``x``."""
    size = fen.shape[0] - 1
    step = 1
    while step * 2 <= size:
        step *= 2
    pos = 0
    rem = x
    while step > 0:
        nxt = pos + step
        if nxt <= size and fen[nxt] <= rem:
            pos = nxt
            rem -= fen[nxt]
        step //= 2
    return pos


@njit(cache=True)
def _step_lpam(p, r, rng, n, pool, start, deg, scratch):
    t = rng.integers(0, n)
    k = deg[t]
    scratch[0] = t
    na = 1
    if k > 0:
        nb = pool[start[t]:start[t] + k]
        degs = np.empty(k, dtype=np.float64)
        for i in range(k):
            degs[i] = deg[nb[i]]
        probs = redistribute(p, r, degs)
        for i in range(k):
            if rng.random() < probs[i]:
                scratch[na] = nb[i]
                na += 1
    return t, na


@njit(cache=True)
def _step_forest_fire(pf, pb, rng, n, pool, start, deg, mark, stamp, scratch, cand):
    w = rng.integers(0, n)
    mark[w] = stamp
    scratch[0] = w
    na = 1
    head = 0
    back = pf * pb
    while head < na:
        x = scratch[head]
        head += 1
        lo = start[x]
        hi = start[x] + deg[x]
        for side in range(2):
            nc = 0
            for j in range(lo, hi):
                y = pool[j]
                if mark[y] != stamp and ((side == 0 and y < x) or (side == 1 and y > x)):
                    cand[nc] = y
                    nc += 1
            take = geometric_count(pf if side == 0 else back, nc, rng)
            for i in range(take):
                j = rng.integers(i, nc)
                tmp = cand[i]
                cand[i] = cand[j]
                cand[j] = tmp
                mark[cand[i]] = stamp
                scratch[na] = cand[i]
                na += 1
    return w, na


@njit(cache=True)
def _step_ba(m, rng, n, fen, total_degree, scratch):
    m_eff = min(m, n)
    na = 0
    while na < m_eff:
        if total_degree == 0:
            x = rng.integers(0, n)
        else:
            x = _fenwick_find(fen, rng.random() * total_degree)
        dup = False
        for i in range(na):
            if scratch[i] == x:
                dup = True
                break
        if not dup:
            scratch[na] = x
            na += 1
    return scratch[0], na


@njit(cache=True)
def advance(model, a, b, rng, n, n_stop,
            pool, pool_end, start, deg, cap, fen, mark, edge_count,
            record, ev_target, ev_off, ev_nodes,
            track, max_h, leaves, clique_total, clique_cap):
    """Grow from ``n`` nodes to ``n_stop`` nodes.

    Returns ``(n, pool, pool_end, edge_count, ev_nodes, clique_total, status)``.
    When ``track`` is set, cliques closed by each arrival are tallied into
    ``leaves`` (the new node is held; its attached set is the candidate set).
    """
    scratch = np.empty(n_stop + 1, dtype=np.int64)
    cand = np.empty(n_stop + 1, dtype=np.int64)
    posmap = np.full(n_stop, -1, dtype=np.int64)
    status = STATUS_OK
    while n < n_stop:
        v = n
        if model == MODEL_LPAM:
            t, na = _step_lpam(a, b, rng, n, pool, start, deg, scratch)
        elif model == MODEL_FOREST_FIRE:
            t, na = _step_forest_fire(a, b, rng, n, pool, start, deg, mark, v, scratch, cand)
        else:
            t, na = _step_ba(int(a), rng, n, fen, 2 * edge_count, scratch)
        attached = np.sort(scratch[:na])
        if track:
            W = max(1, (na + 63) // 64)
            nbits = np.zeros((max(na, 1), W), dtype=np.uint64)
            for i in range(na):
                posmap[attached[i]] = i
            for i in range(na):
                u = attached[i]
                for j in range(start[u], start[u] + deg[u]):
                    y = pool[j]
                    if y > u:
                        tpos = posmap[y]
                        if tpos >= 0:
                            nbits[i, tpos // 64] |= np.uint64(1) << np.uint64(tpos % 64)
                            nbits[tpos, i // 64] |= np.uint64(1) << np.uint64(i % 64)
            for i in range(na):
                posmap[attached[i]] = -1
            limit = max(clique_cap - clique_total, 0.5) if clique_cap > 0.0 else 0.0
            added, overflow = sct_leaves(nbits, na, 1, max_h, leaves, limit)
            clique_total += added
            if overflow:
                status = STATUS_TALLY_OVERFLOW
        start[v] = pool_end
        cap[v] = 0
        deg[v] = 0
        n += 1
        pool, pool_end = _reserve(pool, pool_end, start, deg, cap, n, v, na)
        for i in range(na):
            u = attached[i]
            pool, pool_end = _reserve(pool, pool_end, start, deg, cap, n, u, 1)
            pool[start[u] + deg[u]] = v
            deg[u] += 1
            pool[start[v] + deg[v]] = u
            deg[v] += 1
            if model == MODEL_BA:
                _fenwick_add(fen, u, 1)
                _fenwick_add(fen, v, 1)
        edge_count += na
        if record:
            ev_target[v] = t
            off = ev_off[v]
            if off + na > ev_nodes.shape[0]:
                grown = np.empty(max(2 * ev_nodes.shape[0], off + na), dtype=ev_nodes.dtype)
                grown[:off] = ev_nodes[:off]
                ev_nodes = grown
            ev_nodes[off:off + na] = attached
            ev_off[v + 1] = off + na
        if status != STATUS_OK:
            break
        if clique_cap > 0.0 and clique_total > clique_cap:
            status = STATUS_CLIQUE_CAP
            break
    return n, pool, pool_end, edge_count, ev_nodes, clique_total, status
