# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel core.

Mirrors _pure.py exactly: same loops, same tie-breaks, same splitmix64
stream, so results are bit-identical across backends.
"""

from libc.stdlib cimport calloc, free, malloc

ctypedef unsigned long long u64

cdef double _INV_2_53 = 1.0 / 9007199254740992.0


cdef inline u64 _next_u64(u64* state) nogil:
    state[0] = state[0] + <u64>0x9E3779B97F4A7C15
    cdef u64 z = state[0]
    z = (z ^ (z >> 30)) * <u64>0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * <u64>0x94D049BB133111EB
    return z ^ (z >> 31)


cdef inline double _next_double(u64* state) nogil:
    return <double>(_next_u64(state) >> 11) * _INV_2_53


def splitmix64_stream(seed, count):
    cdef u64 state = <u64>(seed & 0xFFFFFFFFFFFFFFFF)
    out = []
    cdef int i
    for i in range(count):
        out.append(_next_u64(&state))
    return out


def held_karp_path(cost, int n, int s, int t):
    """Minimum-cost Hamiltonian s-t path by subset DP (see _pure twin)."""
    cdef int i, j, k = 0, v
    cdef double *c = <double*>malloc(n * n * sizeof(double))
    cdef int *interior = <int*>malloc(n * sizeof(int))
    if c == NULL or interior == NULL:
        raise MemoryError()
    for i in range(n):
        for j in range(n):
            c[i * n + j] = cost[i][j]
    for v in range(n):
        if v != s and v != t:
            interior[k] = v
            k += 1
    if k == 0:
        out = (c[s * n + t], [s, t], 1)
        free(c)
        free(interior)
        return out

    cdef long size = 1L << k
    cdef double *dp = <double*>malloc(size * k * sizeof(double))
    cdef int *par = <int*>malloc(size * k * sizeof(int))
    if dp == NULL or par == NULL:
        free(c)
        free(interior)
        raise MemoryError()
    cdef double inf = float("inf")
    cdef long mask, base, prev, pbase, idx
    cdef long states = 0
    cdef double best, cand
    cdef int arg
    for idx in range(size * k):
        dp[idx] = inf
        par[idx] = -1
    for j in range(k):
        dp[(1L << j) * k + j] = c[s * n + interior[j]]
        states += 1
    for mask in range(1, size):
        if mask & (mask - 1) == 0:
            continue
        base = mask * k
        for j in range(k):
            if not (mask >> j) & 1:
                continue
            prev = mask ^ (1L << j)
            pbase = prev * k
            best = inf
            arg = -1
            for i in range(k):
                if (prev >> i) & 1:
                    cand = dp[pbase + i] + c[interior[i] * n + interior[j]]
                    if cand < best:
                        best = cand
                        arg = i
            dp[base + j] = best
            par[base + j] = arg
            states += 1
    cdef long full = size - 1
    best = inf
    arg = -1
    for j in range(k):
        cand = dp[full * k + j] + c[interior[j] * n + t]
        if cand < best:
            best = cand
            arg = j
    path = [t]
    mask = full
    j = arg
    cdef int nj
    while j >= 0:
        path.append(interior[j])
        nj = par[mask * k + j]
        mask ^= 1L << j
        j = nj
    path.append(s)
    path.reverse()
    free(c)
    free(interior)
    free(dp)
    free(par)
    return best, path, states


cdef struct PartState:
    double total
    double best
    int q
    long *parts
    int *labels
    int *best_labels
    double *within


cdef void _part_rec(PartState* st, int i, int nparts, double inside) nogil:
    cdef int p
    cdef long old, bit
    cdef double excess
    if i == st.q:
        if nparts >= 2:
            excess = (st.total - inside) - (nparts - 1)
            if excess < st.best:
                st.best = excess
                for p in range(st.q):
                    st.best_labels[p] = st.labels[p]
        return
    bit = 1L << i
    for p in range(nparts):
        old = st.parts[p]
        st.parts[p] = old | bit
        st.labels[i] = p
        _part_rec(st, i + 1, nparts, inside - st.within[old] + st.within[st.parts[p]])
        st.parts[p] = old
    st.parts[nparts] = bit
    st.labels[i] = nparts
    _part_rec(st, i + 1, nparts + 1, inside + st.within[bit])


def partition_min_excess(within, int q):
    """Minimum partition excess (see _pure twin)."""
    cdef long size = 1L << q
    cdef PartState st
    cdef long m
    st.q = q
    st.best = float("inf")
    st.within = <double*>malloc(size * sizeof(double))
    st.parts = <long*>malloc((q + 1) * sizeof(long))
    st.labels = <int*>malloc(q * sizeof(int))
    st.best_labels = <int*>malloc(q * sizeof(int))
    if st.within == NULL or st.parts == NULL or st.labels == NULL or st.best_labels == NULL:
        raise MemoryError()
    for m in range(size):
        st.within[m] = within[m]
    st.total = st.within[size - 1]
    cdef int i
    for i in range(q):
        st.best_labels[i] = 0
    _part_rec(&st, 0, 0, 0.0)
    labels = [st.best_labels[i] for i in range(q)]
    best = st.best
    free(st.within)
    free(st.parts)
    free(st.labels)
    free(st.best_labels)
    return best, labels


cdef int _find_path(unsigned char* in_tree, int n, int p, int q,
                    int* parent_arc, int* parent_vertex, int* queue,
                    int* path, int* path_len) nogil:
    """Unique undirected tree path p..q; fills ``path`` with arc ids in walk
    order and returns 0, or -1 if q is unreachable."""
    cdef int i, u, v, head, tail, a
    for i in range(n):
        parent_vertex[i] = -1
        parent_arc[i] = -1
    parent_vertex[p] = p
    queue[0] = p
    head = 0
    tail = 1
    while head < tail:
        u = queue[head]
        head += 1
        if u == q:
            break
        for v in range(n):
            if parent_vertex[v] != -1 or v == u:
                continue
            a = -1
            if in_tree[u * n + v]:
                a = u * n + v
            elif in_tree[v * n + u]:
                a = v * n + u
            if a >= 0:
                parent_vertex[v] = u
                parent_arc[v] = a
                queue[tail] = v
                tail += 1
    if parent_vertex[q] == -1:
        return -1
    path_len[0] = 0
    v = q
    while v != p:
        path[path_len[0]] = parent_arc[v]
        path_len[0] += 1
        v = parent_vertex[v]
    # reverse into walk order p -> q
    cdef int lo = 0, hi = path_len[0] - 1, tmp
    while lo < hi:
        tmp = path[lo]
        path[lo] = path[hi]
        path[hi] = tmp
        lo += 1
        hi -= 1
    return 0


cdef void _mark_component(unsigned char* in_tree, int n, int root, int skip,
                          unsigned char* side, int* queue) nogil:
    cdef int i, u, v, head, tail, a
    for i in range(n):
        side[i] = 0
    side[root] = 1
    queue[0] = root
    head = 0
    tail = 1
    while head < tail:
        u = queue[head]
        head += 1
        for v in range(n):
            if side[v] or v == u:
                continue
            a = -1
            if in_tree[u * n + v] and u * n + v != skip:
                a = u * n + v
            elif in_tree[v * n + u] and v * n + u != skip:
                a = v * n + u
            if a >= 0:
                side[v] = 1
                queue[tail] = v
                tail += 1


def swap_round(int n, arcs_flat, offsets, weights, seed):
    """Fold a convex combination of arc trees into one random tree
    (see _pure twin for the full contract)."""
    cdef u64 state = <u64>(seed & 0xFFFFFFFFFFFFFFFF)
    cdef int nn = n * n
    cdef int nterms = len(offsets) - 1
    cdef unsigned char* in_acc = <unsigned char*>calloc(nn, 1)
    cdef unsigned char* in_oth = <unsigned char*>calloc(nn, 1)
    cdef unsigned char* side = <unsigned char*>malloc(n)
    cdef int* parent_arc = <int*>malloc(n * sizeof(int))
    cdef int* parent_vertex = <int*>malloc(n * sizeof(int))
    cdef int* queue = <int*>malloc(n * sizeof(int))
    cdef int* path = <int*>malloc(n * sizeof(int))
    if (in_acc == NULL or in_oth == NULL or side == NULL or parent_arc == NULL
            or parent_vertex == NULL or queue == NULL or path == NULL):
        raise MemoryError()
    cdef int idx, a, e, p, q, j, cur, nxt, x, y, i, path_len
    cdef double w_acc, w_oth, coin
    try:
        for idx in range(offsets[0], offsets[1]):
            in_acc[<int>arcs_flat[idx]] = 1
        w_acc = weights[0]
        for term in range(1, nterms):
            for a in range(nn):
                in_oth[a] = 0
            for idx in range(offsets[term], offsets[term + 1]):
                in_oth[<int>arcs_flat[idx]] = 1
            w_oth = weights[term]
            while True:
                e = -1
                for a in range(nn):
                    if in_acc[a] and not in_oth[a]:
                        e = a
                        break
                if e < 0:
                    break
                p = e // n
                q = e % n
                if _find_path(in_oth, n, p, q, parent_arc, parent_vertex,
                              queue, path, &path_len) != 0:
                    raise RuntimeError("term is not a spanning tree")
                _mark_component(in_acc, n, p, e, side, queue)
                j = -1
                cur = p
                for i in range(path_len):
                    a = path[i]
                    x = a // n
                    y = a % n
                    nxt = y if x == cur else x
                    if side[cur] != side[nxt]:
                        j = a
                        break
                    cur = nxt
                if j < 0:
                    raise RuntimeError("no exchange partner found")
                coin = _next_double(&state)
                if coin < w_acc / (w_acc + w_oth):
                    in_oth[j] = 0
                    in_oth[e] = 1
                else:
                    in_acc[e] = 0
                    in_acc[j] = 1
            w_acc += w_oth
        result = [a for a in range(nn) if in_acc[a]]
    finally:
        free(in_acc)
        free(in_oth)
        free(side)
        free(parent_arc)
        free(parent_vertex)
        free(queue)
        free(path)
    return result
