"""Shared test utilities: brute-force oracles and a pure reference simulator.

The reference simulator replays the insertion processes on the plain
EdgeStateGraph structure, consuming the exact same PCG64 word stream as the
compiled kernels, so full traces can be compared bit for bit.  The brute
force oracles recompute everything from first principles (triple scans,
subset enumeration) and are deliberately independent of the library's data
structures.
"""

from itertools import combinations

import numpy as np

from tripack.graph import EdgeStateGraph


# ---------------------------------------------------------------------------
# Brute-force graph oracles


def brute_codegree(g: EdgeStateGraph, u: int, v: int) -> list[int]:
    out = []
    for w in range(g.n):
        if w in (u, v):
            continue
        if w in g.adj_u[u] and w in g.adj_u[v]:
            out.append(w)
    return out


def brute_triangles(edges: set[tuple[int, int]], n: int) -> list[tuple[int, int, int]]:
    have = {(min(a, b), max(a, b)) for a, b in edges}
    tris = []
    for u, v, w in combinations(range(n), 3):
        if (u, v) in have and (u, w) in have and (v, w) in have:
            tris.append((u, v, w))
    return tris


def graph_edges(g: EdgeStateGraph, state: str | None = None) -> set[tuple[int, int]]:
    return {(u, v) for u, v, s in g.edges() if state is None or s == state}


def brute_nu(triangles: list[tuple[int, int, int]]) -> int:
    """Exhaustive max edge-disjoint subset (2^t scan)."""
    tri_edges = []
    for u, v, w in triangles:
        tri_edges.append({(u, v), (u, w), (v, w)})
    best = 0
    t = len(triangles)
    for mask in range(1 << t):
        used: set = set()
        ok = True
        size = 0
        for k in range(t):
            if mask >> k & 1:
                if used & tri_edges[k]:
                    ok = False
                    break
                used |= tri_edges[k]
                size += 1
        if ok and size > best:
            best = size
    return best


def brute_tau(triangles: list[tuple[int, int, int]]) -> int:
    """Smallest edge set meeting every triangle, by size-ordered enumeration
    over edges that occur in triangles."""
    if not triangles:
        return 0
    tri_edges = []
    cand = set()
    for u, v, w in triangles:
        es = {(u, v), (u, w), (v, w)}
        tri_edges.append(es)
        cand |= es
    cand = sorted(cand)
    for k in range(len(triangles) + 1):
        for combo in combinations(cand, k):
            cs = set(combo)
            if all(es & cs for es in tri_edges):
                return k
    raise AssertionError("unreachable")


# ---------------------------------------------------------------------------
# Reference insertion-process simulator (same word stream as the kernels)


def reference_insertion_run(kind: str, n: int, m: int, seed: int, sample: int = 0):
    """Replay k11s / triangle_only / triangle_free on EdgeStateGraph.

    Returns (counters dict, graph).  Only valid while a single random chunk
    suffices (true for the sizes used in tests); asserts otherwise.
    """
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(sample,))
    gen = np.random.Generator(np.random.PCG64(ss))
    buf = gen.integers(0, 2**64, size=min(3 * max(m, 1) + 4096, 1 << 24), dtype=np.uint64)
    pos = 0
    g = EdgeStateGraph(n)
    drawn = set()
    stats = {"edges_u": 0, "edges_m": 0, "packing": 0, "wasted": 0, "rejected": 0}
    hist = np.zeros(66, dtype=np.int64)
    for _ in range(m):
        while True:
            assert pos + 3 <= len(buf), "reference run exceeded one random chunk"
            u = int(buf[pos] % np.uint64(n))
            v = int(buf[pos + 1] % np.uint64(n))
            pos += 2
            if u == v:
                continue
            if u > v:
                u, v = v, u
            key = u * n + v
            if key not in drawn:
                drawn.add(key)
                break
        wits = g.common_unmatched_neighbors(u, v)
        r = len(wits)
        if kind == "triangle_free":
            if r == 0:
                g.insert_edge(u, v)
                stats["edges_u"] += 1
            else:
                stats["rejected"] += 1
            hist[min(r, 65)] += 1
            continue
        if r == 0:
            g.insert_edge(u, v)
            stats["edges_u"] += 1
            hist[0] += 1
            continue
        if kind == "triangle_only":
            wits = [wits[int(buf[pos] % np.uint64(r))]]
            pos += 1
        g.apply_k11s_match(u, v, wits)
        stats["edges_u"] -= 2 * len(wits)
        stats["edges_m"] += 2 * len(wits) + 1
        stats["packing"] += 1
        if kind == "k11s":
            stats["wasted"] += 2 * (r - 1)
        hist[min(r, 65)] += 1
    return stats, hist, g
