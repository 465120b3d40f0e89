"""Hot loops shared by both backends.

Everything here is written against flat numpy arrays and scalars only, so the
same source compiles under numba and runs unchanged as plain Python (see
``backend``).  Randomness is always consumed from a pre-generated uint64
buffer; kernels return their buffer position so callers can refill and resume,
which keeps runs bit-identical across backends.

Return status codes: 0 = reached the requested step, 1 = random buffer
exhausted (refill and call again), 2 = adjacency capacity overflow (restart
the run with larger capacity).
"""

import numpy as np

from .backend import kernel

STATUS_OK = 0
STATUS_NEED_RAND = 1
STATUS_CAPACITY = 2

MODE_K11S = 0
MODE_TRIANGLE_ONLY = 1
MODE_TRIANGLE_FREE = 2

R_CAP = 64  # codegree histogram cap; one overflow bucket above

_U1 = np.uint64(1)
_U6 = np.uint64(6)
_U63 = np.uint64(63)
_M1 = np.uint64(0x5555555555555555)
_M2 = np.uint64(0x3333333333333333)
_M4 = np.uint64(0x0F0F0F0F0F0F0F0F)
_U8 = np.uint64(8)
_U16 = np.uint64(16)
_U32 = np.uint64(32)
_L7F = np.uint64(0x7F)


# ---------------------------------------------------------------------------
# Sorted padded adjacency primitives


@kernel
def _sorted_insert(adj, deg, a, b):
    d = deg[a]
    lo = 0
    hi = d
    while lo < hi:
        mid = (lo + hi) >> 1
        if adj[a, mid] < b:
            lo = mid + 1
        else:
            hi = mid
    j = d
    while j > lo:
        adj[a, j] = adj[a, j - 1]
        j -= 1
    adj[a, lo] = b
    deg[a] = d + 1


@kernel
def _sorted_remove(adj, deg, a, b):
    d = deg[a]
    lo = 0
    hi = d
    while lo < hi:
        mid = (lo + hi) >> 1
        if adj[a, mid] < b:
            lo = mid + 1
        else:
            hi = mid
    j = lo
    while j < d - 1:
        adj[a, j] = adj[a, j + 1]
        j += 1
    deg[a] = d - 1


@kernel
def _common_into(adj, deg, u, v, out):
    i = 0
    j = 0
    k = 0
    du = deg[u]
    dv = deg[v]
    while i < du and j < dv:
        a = adj[u, i]
        b = adj[v, j]
        if a < b:
            i += 1
        elif b < a:
            j += 1
        else:
            out[k] = a
            k += 1
            i += 1
            j += 1
    return k


@kernel
def _codeg_sorted(adj, deg, u, v):
    i = 0
    j = 0
    k = 0
    du = deg[u]
    dv = deg[v]
    while i < du and j < dv:
        a = adj[u, i]
        b = adj[v, j]
        if a < b:
            i += 1
        elif b < a:
            j += 1
        else:
            k += 1
            i += 1
            j += 1
    return k


# ---------------------------------------------------------------------------
# Insertion processes (K_{1,1,s} packing, triangle-only packing, triangle-free)
#
# counters: int64[6] = edges_u, edges_m (rejected for triangle-free), packing,
#           wasted, abandoned, max codegree seen.
# hist: int64[R_CAP + 2] = events by codegree (0 bucket = no-triangle draws,
#       last bucket = overflow past R_CAP).


@kernel
def _insertion_steps(
    mode,
    n,
    adj_u,
    deg_u,
    adj_m,
    deg_m,
    drawn,
    rand,
    rand_pos,
    scripted,
    use_scripted,
    counters,
    hist,
    i_start,
    i_stop,
):
    nn = np.uint64(n)
    cap_u = adj_u.shape[1]
    cap_m = adj_m.shape[1]
    wit = np.empty(n, np.int32)
    i = i_start
    while i < i_stop:
        if rand_pos + 3 > rand.shape[0]:
            return i, rand_pos, STATUS_NEED_RAND
        if use_scripted == 1:
            key = scripted[i]
            u = int(key // n)
            v = int(key % n)
            drawn[key] = 1
        else:
            u = 0
            v = 0
            while True:
                if rand_pos + 3 > rand.shape[0]:
                    return i, rand_pos, STATUS_NEED_RAND
                u = np.int64(rand[rand_pos] % nn)
                v = np.int64(rand[rand_pos + 1] % nn)
                rand_pos += 2
                if u == v:
                    continue
                if u > v:
                    t = u
                    u = v
                    v = t
                key = u * n + v
                if drawn[key] == 0:
                    drawn[key] = 1
                    break
        r = _common_into(adj_u, deg_u, u, v, wit)
        if r > counters[5]:
            counters[5] = r
        if mode == MODE_TRIANGLE_FREE:
            if r == 0:
                if deg_u[u] + 1 > cap_u or deg_u[v] + 1 > cap_u:
                    return i, rand_pos, STATUS_CAPACITY
                _sorted_insert(adj_u, deg_u, u, v)
                _sorted_insert(adj_u, deg_u, v, u)
                counters[0] += 1
            else:
                counters[1] += 1
            hist[r if r <= R_CAP else R_CAP + 1] += 1
            i += 1
            continue
        if r == 0:
            if deg_u[u] + 1 > cap_u or deg_u[v] + 1 > cap_u:
                return i, rand_pos, STATUS_CAPACITY
            _sorted_insert(adj_u, deg_u, u, v)
            _sorted_insert(adj_u, deg_u, v, u)
            counters[0] += 1
            hist[0] += 1
            i += 1
            continue
        if mode == MODE_TRIANGLE_ONLY:
            w = wit[np.int64(rand[rand_pos] % np.uint64(r))]
            rand_pos += 1
            wit[0] = w
            moved = 1
        else:
            moved = r
        if deg_m[u] + moved + 1 > cap_m or deg_m[v] + moved + 1 > cap_m:
            return i, rand_pos, STATUS_CAPACITY
        for k in range(moved):
            if deg_m[wit[k]] + 2 > cap_m:
                return i, rand_pos, STATUS_CAPACITY
        for k in range(moved):
            w = wit[k]
            _sorted_remove(adj_u, deg_u, u, w)
            _sorted_remove(adj_u, deg_u, w, u)
            _sorted_remove(adj_u, deg_u, v, w)
            _sorted_remove(adj_u, deg_u, w, v)
            _sorted_insert(adj_m, deg_m, u, w)
            _sorted_insert(adj_m, deg_m, w, u)
            _sorted_insert(adj_m, deg_m, v, w)
            _sorted_insert(adj_m, deg_m, w, v)
        _sorted_insert(adj_m, deg_m, u, v)
        _sorted_insert(adj_m, deg_m, v, u)
        counters[0] -= 2 * moved
        counters[1] += 2 * moved + 1
        counters[2] += 1
        if mode == MODE_K11S:
            counters[3] += 2 * (r - 1)
        hist[r if r <= R_CAP else R_CAP + 1] += 1
        i += 1
    return i, rand_pos, STATUS_OK


# ---------------------------------------------------------------------------
# Bitset helpers (rows of uint64 words per vertex)


@kernel
def _popcount(x):
    x = x - ((x >> _U1) & _M1)
    x = (x & _M2) + ((x >> np.uint64(2)) & _M2)
    x = (x + (x >> np.uint64(4))) & _M4
    x = x + (x >> _U8)
    x = x + (x >> _U16)
    x = x + (x >> _U32)
    return np.int64(x & _L7F)


@kernel
def _bit_get(bits, u, v):
    return (bits[u, v >> 6] >> np.uint64(v & 63)) & _U1 != 0


@kernel
def _bit_set(bits, u, v):
    bits[u, v >> 6] |= _U1 << np.uint64(v & 63)


@kernel
def _bit_clear(bits, u, v):
    bits[u, v >> 6] &= ~(_U1 << np.uint64(v & 63))


@kernel
def _bits_have_common(bits, u, v):
    for w in range(bits.shape[1]):
        if (bits[u, w] & bits[v, w]) != 0:
            return True
    return False


@kernel
def _bits_codeg(bits, u, v):
    total = 0
    for w in range(bits.shape[1]):
        x = bits[u, w] & bits[v, w]
        if x != 0:
            total += _popcount(x)
    return total


# ---------------------------------------------------------------------------
# Reverse triangle-free process: delete a uniformly random edge that lies in a
# triangle, until none does.  The active set (edges in >= 1 triangle) is kept
# as a swap-delete list; deleting uv only changes the status of edges uw, vw
# for common neighbors w, so those are the only rechecks needed.


@kernel
def _init_active_edges(n, bits, act_list, act_pos):
    na = 0
    edges = 0
    for u in range(n):
        for v in range(u + 1, n):
            if _bit_get(bits, u, v):
                edges += 1
                if _bits_have_common(bits, u, v):
                    key = u * n + v
                    act_list[na] = key
                    act_pos[key] = na
                    na += 1
    return na, edges


@kernel
def _reverse_tf_steps(n, bits, act_list, act_pos, state, rand, rand_pos, max_removals):
    # state: int64[3] = num_active, edges, removals
    na = state[0]
    edges = state[1]
    removals = state[2]
    while na > 0 and removals < max_removals:
        if rand_pos + 1 > rand.shape[0]:
            state[0] = na
            state[1] = edges
            state[2] = removals
            return rand_pos, STATUS_NEED_RAND
        key = act_list[np.int64(rand[rand_pos] % np.uint64(na))]
        rand_pos += 1
        u = int(key // n)
        v = int(key % n)
        _bit_clear(bits, u, v)
        _bit_clear(bits, v, u)
        edges -= 1
        removals += 1
        p = act_pos[key]
        last = act_list[na - 1]
        act_list[p] = last
        act_pos[last] = p
        na -= 1
        act_pos[key] = -1
        for wd in range(bits.shape[1]):
            x = bits[u, wd] & bits[v, wd]
            while x != 0:
                b = x & (~x + _U1)
                w = (wd << 6) + _popcount(b - _U1)
                x ^= b
                for e in range(2):
                    a = u if e == 0 else v
                    lo = a if a < w else w
                    hi = w if a < w else a
                    kk = lo * n + hi
                    if _bits_have_common(bits, a, w):
                        if act_pos[kk] < 0:
                            act_list[na] = kk
                            act_pos[kk] = na
                            na += 1
                    else:
                        if act_pos[kk] >= 0:
                            p2 = act_pos[kk]
                            last2 = act_list[na - 1]
                            act_list[p2] = last2
                            act_pos[last2] = p2
                            na -= 1
                            act_pos[kk] = -1
    state[0] = na
    state[1] = edges
    state[2] = removals
    return rand_pos, STATUS_OK


# ---------------------------------------------------------------------------
# Random triangle removal: remove the 3 edges of a uniformly random triangle
# until triangle-free.  The triangle list is never indexed by edge; liveness
# is simply "all 3 edges still present", selection is rejection sampling over
# the list, and the list is compacted whenever less than half of it is alive.


@kernel
def _count_triangles_padded(n, adj, deg):
    total = 0
    for u in range(n):
        du = deg[u]
        for iu in range(du):
            v = adj[u, iu]
            if v <= u:
                continue
            i = 0
            j = 0
            dv = deg[v]
            while i < du and j < dv:
                a = adj[u, i]
                b = adj[v, j]
                if a < b:
                    i += 1
                elif b < a:
                    j += 1
                else:
                    if a > v:
                        total += 1
                    i += 1
                    j += 1
    return total


@kernel
def _fill_triangles_padded(n, adj, deg, tri):
    k = 0
    for u in range(n):
        du = deg[u]
        for iu in range(du):
            v = adj[u, iu]
            if v <= u:
                continue
            i = 0
            j = 0
            dv = deg[v]
            while i < du and j < dv:
                a = adj[u, i]
                b = adj[v, j]
                if a < b:
                    i += 1
                elif b < a:
                    j += 1
                else:
                    if a > v:
                        tri[k, 0] = u
                        tri[k, 1] = v
                        tri[k, 2] = a
                        k += 1
                    i += 1
                    j += 1
    return k


@kernel
def _triangle_alive(bits, a, b, c):
    return _bit_get(bits, a, b) and _bit_get(bits, b, c) and _bit_get(bits, a, c)


@kernel
def _triangle_removal_steps(n, bits, tri, state, rand, rand_pos, max_removals):
    # state: int64[4] = live, tri_len, edges, removals
    live = state[0]
    tri_len = state[1]
    edges = state[2]
    removals = state[3]
    while live > 0 and removals < max_removals:
        if rand_pos + 8 > rand.shape[0]:
            state[0] = live
            state[1] = tri_len
            state[2] = edges
            state[3] = removals
            return rand_pos, STATUS_NEED_RAND
        idx = np.int64(rand[rand_pos] % np.uint64(tri_len))
        rand_pos += 1
        a = tri[idx, 0]
        b = tri[idx, 1]
        c = tri[idx, 2]
        if not _triangle_alive(bits, a, b, c):
            continue
        destroyed = (
            _bits_codeg(bits, a, b) + _bits_codeg(bits, b, c) + _bits_codeg(bits, a, c) - 2
        )
        _bit_clear(bits, a, b)
        _bit_clear(bits, b, a)
        _bit_clear(bits, b, c)
        _bit_clear(bits, c, b)
        _bit_clear(bits, a, c)
        _bit_clear(bits, c, a)
        edges -= 3
        removals += 1
        live -= destroyed
        if live * 2 < tri_len:
            k = 0
            for t in range(tri_len):
                if _triangle_alive(bits, tri[t, 0], tri[t, 1], tri[t, 2]):
                    tri[k, 0] = tri[t, 0]
                    tri[k, 1] = tri[t, 1]
                    tri[k, 2] = tri[t, 2]
                    k += 1
            tri_len = k
    state[0] = live
    state[1] = tri_len
    state[2] = edges
    state[3] = removals
    return rand_pos, STATUS_OK


# ---------------------------------------------------------------------------
# Concentration counters.  Histogram layout: index r for 0 <= r <= r_max,
# index r_max+1 collects everything above.


@kernel
def _c_histogram(n, adj_u, deg_u, v, r_max, out):
    for k in range(r_max + 2):
        out[k] = 0
    for u in range(n):
        if u == v:
            continue
        r = _codeg_sorted(adj_u, deg_u, u, v)
        out[r if r <= r_max else r_max + 1] += 1


@kernel
def _p_histogram(n, adj_u, deg_u, u, v, r_max, out):
    # walk the symmetric difference of the two neighbor rows; for w adjacent
    # to exactly one endpoint, bucket by codegree with the other endpoint
    for k in range(r_max + 2):
        out[k] = 0
    i = 0
    j = 0
    du = deg_u[u]
    dv = deg_u[v]
    while i < du or j < dv:
        if j >= dv or (i < du and adj_u[u, i] < adj_u[v, j]):
            w = adj_u[u, i]
            i += 1
            if w == v:
                continue
            r = _codeg_sorted(adj_u, deg_u, w, v)
        elif i >= du or adj_u[v, j] < adj_u[u, i]:
            w = adj_u[v, j]
            j += 1
            if w == u:
                continue
            r = _codeg_sorted(adj_u, deg_u, w, u)
        else:
            i += 1
            j += 1
            continue
        out[r if r <= r_max else r_max + 1] += 1


@kernel
def _q_histogram(n, adj_u, deg_u, u, v, r_max, s_max, out):
    # out has shape (r_max + 2, s_max + 2)
    for a in range(r_max + 2):
        for b in range(s_max + 2):
            out[a, b] = 0
    for w in range(n):
        if w == u or w == v:
            continue
        r = _codeg_sorted(adj_u, deg_u, w, u)
        s = _codeg_sorted(adj_u, deg_u, w, v)
        out[r if r <= r_max else r_max + 1, s if s <= s_max else s_max + 1] += 1


@kernel
def _codegree_pairs_above(n, adj, deg, thresh, pairs, cap):
    """Max codegree over all pairs; also collects pairs with codegree >=
    thresh into ``pairs`` (up to cap rows).  Returns (max_codeg, count)."""
    best = 0
    cnt = 0
    for u in range(n):
        for v in range(u + 1, n):
            r = _codeg_sorted(adj, deg, u, v)
            if r > best:
                best = r
            if r >= thresh and cnt < cap:
                pairs[cnt, 0] = u
                pairs[cnt, 1] = v
                cnt += 1
    return best, cnt


@kernel
def _k37_scan(n, adj, deg, pairs, npairs, side_size):
    """Search for a K_{3,side_size}: a third vertex sharing side_size common
    neighbors with a listed high-codegree pair.  Also reports the largest
    number of vertices w with >= 2 common neighbors alongside a pair.
    Returns (found_flag, max_w_with_2plus)."""
    wbuf = np.empty(n, np.int32)
    found = 0
    k32_max = 0
    for p in range(npairs):
        a = pairs[p, 0]
        b = pairs[p, 1]
        nw = _common_into(adj, deg, a, b, wbuf)
        w2 = 0
        for c in range(n):
            if c == a or c == b:
                continue
            i = 0
            j = 0
            dc = deg[c]
            hits = 0
            while i < dc and j < nw:
                x = adj[c, i]
                y = wbuf[j]
                if x < y:
                    i += 1
                elif y < x:
                    j += 1
                else:
                    hits += 1
                    i += 1
                    j += 1
            if hits >= 2:
                w2 += 1
            if hits >= side_size:
                found = 1
        if w2 > k32_max:
            k32_max = w2
    return found, k32_max


@kernel
def _induced_edge_count(adj, deg, members):
    # members sorted ascending
    cnt = 0
    for k in range(members.shape[0]):
        u = members[k]
        i = 0
        j = k + 1
        du = deg[u]
        while i < du and j < members.shape[0]:
            a = adj[u, i]
            b = members[j]
            if a < b:
                i += 1
            elif b < a:
                j += 1
            else:
                cnt += 1
                i += 1
                j += 1
    return cnt
