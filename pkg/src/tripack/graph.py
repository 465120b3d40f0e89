"""Edge-state graphs and reproducible edge streams.

An :class:`EdgeStateGraph` partitions its present edges into an *unmatched*
class U and a *matched* class M.  The packing processes only ever query
codegrees inside U and move whole K_{1,1,s} stars from U into M, so the two
classes get separate sorted adjacency lists.  This pure-Python structure is
the reference implementation used for small instances, the exact oracle, and
file IO; the large-scale process loops run on flat-array twins of it (see
``_kernels``).
"""

from __future__ import annotations

from bisect import bisect_left, insort

import numpy as np

UNMATCHED = "U"
MATCHED = "M"


def _check_pair(n: int, u: int, v: int) -> tuple[int, int]:
    if u == v:
        raise ValueError(f"self-loop ({u},{v}) not allowed")
    if not (0 <= u < n and 0 <= v < n):
        raise ValueError(f"vertex pair ({u},{v}) out of range for n={n}")
    return (u, v) if u < v else (v, u)


def _merge_count(a: list[int], b: list[int]) -> int:
    i = j = k = 0
    while i < len(a) and j < len(b):
        if a[i] < b[j]:
            i += 1
        elif b[j] < a[i]:
            j += 1
        else:
            k += 1
            i += 1
            j += 1
    return k


def _merge_common(a: list[int], b: list[int]) -> list[int]:
    i = j = 0
    out: list[int] = []
    while i < len(a) and j < len(b):
        if a[i] < b[j]:
            i += 1
        elif b[j] < a[i]:
            j += 1
        else:
            out.append(a[i])
            i += 1
            j += 1
    return out


class EdgeStateGraph:
    """Graph on n vertices whose edges carry an unmatched/matched state."""

    __slots__ = ("n", "adj_u", "adj_m", "edge_count_u", "edge_count_m")

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("graph needs at least one vertex")
        self.n = n
        self.adj_u: list[list[int]] = [[] for _ in range(n)]
        self.adj_m: list[list[int]] = [[] for _ in range(n)]
        self.edge_count_u = 0
        self.edge_count_m = 0

    # -- basic queries ------------------------------------------------------

    def edge_state(self, u: int, v: int) -> str | None:
        u, v = _check_pair(self.n, u, v)
        row = self.adj_u[u]
        i = bisect_left(row, v)
        if i < len(row) and row[i] == v:
            return UNMATCHED
        row = self.adj_m[u]
        i = bisect_left(row, v)
        if i < len(row) and row[i] == v:
            return MATCHED
        return None

    def degree_u(self, v: int) -> int:
        return len(self.adj_u[v])

    def degree_m(self, v: int) -> int:
        return len(self.adj_m[v])

    def edges(self):
        """All (u, v, state) with u < v."""
        for u in range(self.n):
            for v in self.adj_u[u]:
                if u < v:
                    yield u, v, UNMATCHED
            for v in self.adj_m[u]:
                if u < v:
                    yield u, v, MATCHED

    # -- mutation -----------------------------------------------------------

    def insert_edge(self, u: int, v: int, state: str = UNMATCHED) -> None:
        u, v = _check_pair(self.n, u, v)
        if self.edge_state(u, v) is not None:
            raise ValueError(f"edge ({u},{v}) already present")
        if state == UNMATCHED:
            insort(self.adj_u[u], v)
            insort(self.adj_u[v], u)
            self.edge_count_u += 1
        elif state == MATCHED:
            insort(self.adj_m[u], v)
            insort(self.adj_m[v], u)
            self.edge_count_m += 1
        else:
            raise ValueError(f"unknown edge state {state!r}")

    def _move_to_matched(self, u: int, v: int) -> None:
        for a, b in ((u, v), (v, u)):
            row = self.adj_u[a]
            i = bisect_left(row, b)
            del row[i]
            insort(self.adj_m[a], b)
        self.edge_count_u -= 1
        self.edge_count_m += 1

    # -- codegree machinery --------------------------------------------------

    def codeg_unmatched(self, u: int, v: int) -> int:
        u, v = _check_pair(self.n, u, v)
        return _merge_count(self.adj_u[u], self.adj_u[v])

    def common_unmatched_neighbors(self, u: int, v: int) -> list[int]:
        u, v = _check_pair(self.n, u, v)
        return _merge_common(self.adj_u[u], self.adj_u[v])

    def apply_k11s_match(self, u: int, v: int, witnesses: list[int]) -> int:
        """Insert edge uv and match the K_{1,1,s} star on the witnesses.

        With s = len(witnesses) >= 1 the edges uw, vw move from U to M and uv
        enters M directly; returns 2s+1.  With s = 0 the edge uv merely joins
        U and 0 is returned.
        """
        u, v = _check_pair(self.n, u, v)
        if self.edge_state(u, v) is not None:
            raise ValueError(f"edge ({u},{v}) already present")
        if len(set(witnesses)) != len(witnesses):
            raise ValueError("witnesses must be distinct")
        for w in witnesses:
            if w == u or w == v:
                raise ValueError(f"witness {w} coincides with an endpoint")
            if self.edge_state(u, w) != UNMATCHED or self.edge_state(v, w) != UNMATCHED:
                raise ValueError(f"witness {w} is not unmatched-adjacent to both endpoints")
        if not witnesses:
            self.insert_edge(u, v, UNMATCHED)
            return 0
        for w in witnesses:
            self._move_to_matched(u, w)
            self._move_to_matched(v, w)
        self.insert_edge(u, v, MATCHED)
        return 2 * len(witnesses) + 1

    # -- triangles ------------------------------------------------------------

    def _combined_adj(self, restrict: str | None) -> list[list[int]]:
        if restrict == UNMATCHED:
            return self.adj_u
        if restrict == MATCHED:
            return self.adj_m
        out = []
        for u in range(self.n):
            merged = sorted(self.adj_u[u] + self.adj_m[u])
            out.append(merged)
        return out

    def enumerate_triangles(self, edges: str | None = None) -> list[tuple[int, int, int]]:
        """Vertex triples u < v < w of all triangles (optionally restricted to
        one edge class via edges='U' or 'M')."""
        adj = self._combined_adj(edges)
        tris = []
        for u in range(self.n):
            nbrs = [v for v in adj[u] if v > u]
            for v in nbrs:
                for w in _merge_common(nbrs, adj[v]):
                    if w > v:
                        tris.append((u, v, w))
        return tris

    def count_triangles(self, edges: str | None = None) -> int:
        adj = self._combined_adj(edges)
        total = 0
        for u in range(self.n):
            nbrs = [v for v in adj[u] if v > u]
            for v in nbrs:
                total += sum(1 for w in _merge_common(nbrs, adj[v]) if w > v)
        return total

    # -- array bridge ----------------------------------------------------------

    def to_arrays(self, cap: int | None = None):
        """Padded int32 adjacency copies (adj_u, deg_u, adj_m, deg_m)."""
        if cap is None:
            cap = max(
                [1]
                + [len(r) for r in self.adj_u]
                + [len(r) for r in self.adj_m]
            )
        adj_u = np.zeros((self.n, cap), dtype=np.int32)
        adj_m = np.zeros((self.n, cap), dtype=np.int32)
        deg_u = np.zeros(self.n, dtype=np.int32)
        deg_m = np.zeros(self.n, dtype=np.int32)
        for u in range(self.n):
            deg_u[u] = len(self.adj_u[u])
            adj_u[u, : deg_u[u]] = self.adj_u[u]
            deg_m[u] = len(self.adj_m[u])
            adj_m[u, : deg_m[u]] = self.adj_m[u]
        return adj_u, deg_u, adj_m, deg_m

    @classmethod
    def from_arrays(cls, adj_u, deg_u, adj_m, deg_m) -> "EdgeStateGraph":
        n = len(deg_u)
        g = cls(n)
        for u in range(n):
            g.adj_u[u] = [int(x) for x in adj_u[u, : deg_u[u]]]
            g.adj_m[u] = [int(x) for x in adj_m[u, : deg_m[u]]]
        g.edge_count_u = int(deg_u.sum()) // 2
        g.edge_count_m = int(deg_m.sum()) // 2
        return g


def new_graph(n: int) -> EdgeStateGraph:
    return EdgeStateGraph(n)


def complete_graph(n: int) -> EdgeStateGraph:
    g = EdgeStateGraph(n)
    for u in range(n):
        g.adj_u[u] = [v for v in range(n) if v != u]
    g.edge_count_u = n * (n - 1) // 2
    return g


class EdgeStream:
    """Uniform without-replacement stream of vertex pairs.

    Same seed, same sequence.  Pairs are proposed by rejection against the
    drawn set; once more than half of all pairs have been drawn the remaining
    pairs are shuffled explicitly so exhaustive streams stay O(1) per draw.
    """

    def __init__(self, n: int, seed: int):
        if n < 1:
            raise ValueError("stream needs at least one vertex")
        self.n = n
        self.seed = seed
        self.total_pairs = n * (n - 1) // 2
        self.drawn: set[int] = set()
        self._rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
        self._tail: list[int] | None = None

    def __iter__(self):
        return self

    def draws_done(self) -> int:
        return len(self.drawn)

    def _build_tail(self) -> None:
        remaining = np.array(
            [u * self.n + v
             for u in range(self.n)
             for v in range(u + 1, self.n)
             if u * self.n + v not in self.drawn],
            dtype=np.int64,
        )
        self._tail = list(self._rng.permutation(remaining))

    def __next__(self) -> tuple[int, int]:
        if len(self.drawn) >= self.total_pairs:
            raise StopIteration
        if self._tail is None and len(self.drawn) * 2 > self.total_pairs:
            self._build_tail()
        if self._tail is not None:
            key = int(self._tail.pop())
        else:
            while True:
                u = int(self._rng.integers(self.n))
                v = int(self._rng.integers(self.n))
                if u == v:
                    continue
                if u > v:
                    u, v = v, u
                key = u * self.n + v
                if key not in self.drawn:
                    break
        self.drawn.add(key)
        return key // self.n, key % self.n


def stream_next(stream: EdgeStream) -> tuple[int, int]:
    return next(stream)


def gnm_graph(n: int, m: int, seed: int) -> EdgeStateGraph:
    """Uniform graph with exactly m distinct edges, all unmatched."""
    if m > n * (n - 1) // 2:
        raise ValueError(f"m={m} exceeds the {n * (n - 1) // 2} possible pairs")
    g = EdgeStateGraph(n)
    stream = EdgeStream(n, seed)
    for _ in range(m):
        u, v = next(stream)
        g.insert_edge(u, v, UNMATCHED)
    return g


# -- edge-list text format ----------------------------------------------------
# One edge per line: "u v" plus an optional state token "U" or "M" (default U).
# Lines starting with '#' are ignored.


def load_edge_list(path, n: int | None = None) -> EdgeStateGraph:
    edges = []
    max_id = -1
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) not in (2, 3):
                raise ValueError(f"{path}:{lineno}: expected 'u v [U|M]', got {line!r}")
            u, v = int(parts[0]), int(parts[1])
            state = parts[2].upper() if len(parts) == 3 else UNMATCHED
            if state not in (UNMATCHED, MATCHED):
                raise ValueError(f"{path}:{lineno}: unknown state token {parts[2]!r}")
            edges.append((u, v, state))
            max_id = max(max_id, u, v)
    if n is None:
        n = max_id + 1 if max_id >= 0 else 1
    g = EdgeStateGraph(n)
    for u, v, state in edges:
        g.insert_edge(u, v, state)
    return g


def save_edge_list(g: EdgeStateGraph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for u, v, state in sorted(g.edges()):
            fh.write(f"{u} {v} {state}\n")
