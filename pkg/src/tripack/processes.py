"""The five stochastic processes, with checkpointed traces.

Insertion processes (started from the empty graph, edges revealed uniformly
without replacement):

* ``k11s``            -- a revealed edge whose endpoints have unmatched
  codegree s >= 1 moves the whole K_{1,1,s} star into the matched graph;
  codegree 0 edges join the unmatched graph, which therefore stays
  triangle-free.
* ``triangle_only``   -- same revelation, but only one triangle (uniform
  random witness) is matched per event, so nothing is wasted.
* ``triangle_free``   -- a revealed edge is accepted only if it closes no
  triangle among accepted edges; rejected edges are counted (they form a
  triangle cover of the revealed graph).

Removal processes (started from a supplied graph):

* ``reverse_triangle_free``   -- repeatedly delete a uniformly random edge
  lying in a triangle, until none does.
* ``random_triangle_removal`` -- repeatedly delete the three edges of a
  uniformly random triangle, until none remains.

Each run consumes randomness from a single PCG64 stream derived from
``SeedSequence(entropy=seed, spawn_key=(sample,))``; batch runs split streams
by sample index, so results are reproducible regardless of scheduling, chunk
sizes, or backend.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from . import ode
from .graph import EdgeStateGraph

R_CAP = K.R_CAP
HIST_LEN = R_CAP + 2

KIND_K11S = "k11s"
KIND_TRIANGLE_ONLY = "triangle_only"
KIND_TRIANGLE_FREE = "triangle_free"
KIND_REVERSE_TF = "reverse_triangle_free"
KIND_RTR = "random_triangle_removal"
PROCESS_KINDS = (KIND_K11S, KIND_TRIANGLE_ONLY, KIND_TRIANGLE_FREE, KIND_REVERSE_TF, KIND_RTR)

_MODE_OF = {
    KIND_K11S: K.MODE_K11S,
    KIND_TRIANGLE_ONLY: K.MODE_TRIANGLE_ONLY,
    KIND_TRIANGLE_FREE: K.MODE_TRIANGLE_FREE,
}

MAX_N_INSERTION = 20000  # drawn-pair table is n^2 bytes


@dataclass
class Checkpoint:
    i: int
    t: float
    edges_u: int
    edges_m: int
    packing: int
    wasted: int
    xr_hist: np.ndarray  # length HIST_LEN; [0]=codegree-0 draws, [r]=events, [-1]=overflow

    def x_overflow(self) -> int:
        return int(self.xr_hist[9:].sum())


@dataclass
class SimState:
    """Array view of the evolving graph (valid snapshot while the run is
    paused at a checkpoint; copied only on request)."""

    n: int
    adj_u: np.ndarray
    deg_u: np.ndarray
    adj_m: np.ndarray
    deg_m: np.ndarray

    def to_graph(self) -> EdgeStateGraph:
        return EdgeStateGraph.from_arrays(self.adj_u, self.deg_u, self.adj_m, self.deg_m)


@dataclass
class ProcessTrace:
    kind: str
    n: int
    c: float
    seed: int
    sample: int = 0
    rounds: int = 1
    checkpoints: list[Checkpoint] = field(default_factory=list)
    abandoned: int = 0
    max_codegree: int = 0

    @property
    def final(self) -> Checkpoint:
        return self.checkpoints[-1]

    def scale(self) -> float:
        return float(self.n) ** 1.5

    def write_csv(self, path) -> None:
        cols = "i,t,edges_u,edges_m,packing,wasted," + ",".join(f"x{r}" for r in range(1, 9)) + ",x_overflow"
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(cols + "\n")
            for cp in self.checkpoints:
                xs = [int(cp.xr_hist[r]) for r in range(1, 9)]
                fh.write(
                    f"{cp.i},{cp.t!r},{cp.edges_u},{cp.edges_m},{cp.packing},{cp.wasted},"
                    + ",".join(str(x) for x in xs)
                    + f",{cp.x_overflow()}\n"
                )

    def summary(self) -> dict:
        f = self.final
        s = self.scale()
        return {
            "kind": self.kind,
            "n": self.n,
            "c": self.c,
            "seed": self.seed,
            "sample": self.sample,
            "rounds": self.rounds,
            "abandoned": self.abandoned,
            "max_codegree": self.max_codegree,
            "final": {
                "i": f.i,
                "t": f.t,
                "edges_u": f.edges_u,
                "edges_m": f.edges_m,
                "packing": f.packing,
                "wasted": f.wasted,
                "xr_hist": [int(x) for x in f.xr_hist],
            },
            "scaled": {
                "edges_u": f.edges_u / s,
                "edges_m": f.edges_m / s,
                "packing": f.packing / s,
                "wasted": f.wasted / s,
            },
        }


class _RandFeed:
    """Chunked uint64 stream from one PCG64 generator (refill keeps the
    stream continuous, so chunk size never affects results)."""

    def __init__(self, seed: int, sample: int, chunk: int):
        ss = np.random.SeedSequence(entropy=seed, spawn_key=(sample,))
        self.gen = np.random.Generator(np.random.PCG64(ss))
        self.chunk = max(chunk, 1 << 12)
        self.buf = self.gen.integers(0, 2**64, size=self.chunk, dtype=np.uint64)
        self.pos = 0

    def refill(self) -> None:
        self.buf = self.gen.integers(0, 2**64, size=self.chunk, dtype=np.uint64)
        self.pos = 0


def _checkpoint_steps(total: int, count: int, boundaries: tuple[int, ...] = ()) -> list[int]:
    count = max(1, count)
    steps = {round(total * k / count) for k in range(1, count + 1)}
    steps.update(boundaries)
    steps.add(total)
    steps.discard(0)
    return sorted(steps)


def _resolve_m(n: int, c: float | None, m: int | None) -> int:
    if (c is None) == (m is None):
        raise ValueError("specify exactly one of c or m")
    if m is None:
        m = int(c * n**1.5)
    if m < 1:
        raise ValueError("at least one edge must be drawn")
    return m


def _run_insertion(
    kind: str,
    n: int,
    m: int,
    seed: int,
    sample: int,
    checkpoint_count: int,
    rounds: int = 1,
    edges=None,
    keep_state: bool = False,
    on_checkpoint=None,
):
    if n < 3:
        raise ValueError("insertion processes need n >= 3")
    if n > MAX_N_INSERTION:
        raise ValueError(f"n={n} exceeds the supported {MAX_N_INSERTION} (drawn-pair table is n^2 bytes)")
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    npairs = n * (n - 1) // 2
    mode = _MODE_OF[kind]

    scripted = np.zeros(1, dtype=np.int64)
    use_scripted = 0
    if edges is not None:
        if rounds != 1:
            raise ValueError("scripted edge sequences run a single round")
        if not edges:
            raise ValueError("scripted edge sequence is empty")
        keys = []
        seen = set()
        for u, v in edges:
            if u == v or not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"bad scripted edge ({u},{v})")
            a, b = (u, v) if u < v else (v, u)
            key = a * n + b
            if key in seen:
                raise ValueError(f"scripted edge ({u},{v}) repeats")
            seen.add(key)
            keys.append(key)
        scripted = np.array(keys, dtype=np.int64)
        use_scripted = 1
        m = len(keys)
    total = m * rounds
    if total > npairs:
        raise ValueError(f"{total} draws exceed the {npairs} available pairs")

    feed = _RandFeed(seed, sample, chunk=min(3 * max(total, 1) + 4096, 1 << 24))
    if edges is None and total > npairs // 2:
        # near-exhaustive streams: draw the whole order up front instead of
        # rejection sampling against a mostly-full table
        all_keys = np.array([u * n + v for u in range(n) for v in range(u + 1, n)], dtype=np.int64)
        scripted = feed.gen.permutation(all_keys)[:total]
        use_scripted = 1

    c_eff = total / n**1.5
    cap_u = min(n - 1, int(3.0 * (1.0 + c_eff) * math.sqrt(n)) + 64)
    cap_m = 1 if mode == K.MODE_TRIANGLE_FREE else min(n - 1, int(3.0 * (2.0 * c_eff + 1.0) * math.sqrt(n)) + 64)

    boundaries = tuple(j * m for j in range(1, rounds)) if rounds > 1 else ()
    targets = _checkpoint_steps(total, checkpoint_count, boundaries)
    round_ends = set(boundaries)

    while True:  # capacity retry loop; reruns deterministically from scratch
        adj_u = np.zeros((n, cap_u), dtype=np.int32)
        deg_u = np.zeros(n, dtype=np.int32)
        adj_m = np.zeros((n, cap_m), dtype=np.int32)
        deg_m = np.zeros(n, dtype=np.int32)
        drawn = np.zeros(n * n, dtype=np.uint8)
        counters = np.zeros(8, dtype=np.int64)
        hist = np.zeros(HIST_LEN, dtype=np.int64)
        feed = _RandFeed(seed, sample, chunk=feed.chunk)
        state = SimState(n, adj_u, deg_u, adj_m, deg_m)
        trace = ProcessTrace(kind, n, total / n**1.5, seed, sample, rounds)
        i = 0
        overflow = False
        for target in targets:
            while i < target:
                i, feed.pos, status = K._insertion_steps(
                    mode, n, adj_u, deg_u, adj_m, deg_m, drawn,
                    feed.buf, feed.pos, scripted, use_scripted,
                    counters, hist, i, target,
                )
                if status == K.STATUS_NEED_RAND:
                    feed.refill()
                elif status == K.STATUS_CAPACITY:
                    overflow = True
                    break
            if overflow:
                break
            trace.checkpoints.append(
                Checkpoint(i, i / n**1.5, int(counters[0]), int(counters[1]),
                           int(counters[2]), int(counters[3]), hist.copy())
            )
            if on_checkpoint is not None:
                on_checkpoint(i, state)
            if i in round_ends:
                # sprinkling: abandon this round's unmatched edges
                counters[4] += counters[0]
                counters[0] = 0
                deg_u[:] = 0
        if overflow:
            cap_u = min(n - 1, cap_u * 2)
            cap_m = min(n - 1, max(2, cap_m * 2))
            continue
        trace.abandoned = int(counters[4])
        trace.max_codegree = int(counters[5])
        break

    if keep_state:
        return trace, state
    return trace


def run_packing(
    n: int,
    c: float | None = None,
    m: int | None = None,
    seed: int = 0,
    sample: int = 0,
    checkpoint_count: int = 100,
    edges=None,
    keep_state: bool = False,
    on_checkpoint=None,
):
    """Online K_{1,1,s} packing over floor(c*n^{3/2}) revealed edges."""
    m = len(edges) if edges is not None else _resolve_m(n, c, m)
    return _run_insertion(KIND_K11S, n, m, seed, sample, checkpoint_count,
                          edges=edges, keep_state=keep_state, on_checkpoint=on_checkpoint)


def run_packing_sprinkled(
    n: int,
    c: float | None = None,
    m: int | None = None,
    seed: int = 0,
    sample: int = 0,
    rounds: int = 1,
    checkpoint_count: int = 100,
    keep_state: bool = False,
):
    """Consecutive packing rounds on one without-replacement stream; the
    unmatched graph is reset (abandoned) between rounds, matched stars from
    different rounds are automatically edge-disjoint."""
    m = _resolve_m(n, c, m)
    return _run_insertion(KIND_K11S, n, m, seed, sample, checkpoint_count,
                          rounds=rounds, keep_state=keep_state)


def run_triangle_only(
    n: int,
    c: float | None = None,
    m: int | None = None,
    seed: int = 0,
    sample: int = 0,
    checkpoint_count: int = 100,
    edges=None,
    keep_state: bool = False,
    on_checkpoint=None,
):
    """Packing variant that keeps a single uniform triangle per event."""
    m = len(edges) if edges is not None else _resolve_m(n, c, m)
    return _run_insertion(KIND_TRIANGLE_ONLY, n, m, seed, sample, checkpoint_count,
                          edges=edges, keep_state=keep_state, on_checkpoint=on_checkpoint)


def run_triangle_free(
    n: int,
    c: float | None = None,
    m: int | None = None,
    seed: int = 0,
    sample: int = 0,
    checkpoint_count: int = 100,
    edges=None,
    keep_state: bool = False,
    on_checkpoint=None,
):
    """Triangle-free process; edges_u counts accepted edges, edges_m rejected."""
    m = len(edges) if edges is not None else _resolve_m(n, c, m)
    return _run_insertion(KIND_TRIANGLE_FREE, n, m, seed, sample, checkpoint_count,
                          edges=edges, keep_state=keep_state, on_checkpoint=on_checkpoint)


# ---------------------------------------------------------------------------
# Removal processes


def _graph_to_bits(g: EdgeStateGraph) -> tuple[np.ndarray, int]:
    n = g.n
    words = (n + 63) // 64
    bits = np.zeros((n, words), dtype=np.uint64)
    count = 0
    for u, v, _state in g.edges():
        bits[u, v >> 6] |= np.uint64(1) << np.uint64(v & 63)
        bits[v, u >> 6] |= np.uint64(1) << np.uint64(u & 63)
        count += 1
    return bits, count


def _bits_to_graph(bits: np.ndarray, n: int) -> EdgeStateGraph:
    g = EdgeStateGraph(n)
    for u in range(n):
        for v in range(u + 1, n):
            if (int(bits[u, v >> 6]) >> (v & 63)) & 1:
                g.insert_edge(u, v)
    return g


def run_reverse_triangle_free(
    start: EdgeStateGraph,
    seed: int = 0,
    sample: int = 0,
    checkpoint_count: int = 100,
    keep_state: bool = False,
):
    """Delete uniformly random in-triangle edges until triangle-free."""
    n = start.n
    if n > 3000:
        raise ValueError("reverse triangle-free supports n <= 3000 (position table is n^2 ints)")
    bits, e0 = _graph_to_bits(start)
    act_list = np.empty(max(1, n * (n - 1) // 2), dtype=np.int64)
    act_pos = np.full(n * n, -1, dtype=np.int64)
    na, edges0 = K._init_active_edges(n, bits, act_list, act_pos)
    state = np.array([na, edges0, 0], dtype=np.int64)
    feed = _RandFeed(seed, sample, chunk=min(2 * e0 + 4096, 1 << 22))
    spacing = max(1, e0 // max(1, checkpoint_count))
    trace = ProcessTrace(KIND_REVERSE_TF, n, e0 / n**1.5, seed, sample)
    while True:
        target = int(state[2]) + spacing
        while True:
            feed.pos, status = K._reverse_tf_steps(n, bits, act_list, act_pos, state, feed.buf, feed.pos, target)
            if status != K.STATUS_NEED_RAND:
                break
            feed.refill()
        removals = int(state[2])
        trace.checkpoints.append(
            Checkpoint(removals, removals / n**1.5, int(state[1]), 0, 0, 0,
                       np.zeros(HIST_LEN, dtype=np.int64))
        )
        if state[0] == 0:
            break
    if keep_state:
        return trace, _bits_to_graph(bits, n)
    return trace


def run_random_triangle_removal(
    start: EdgeStateGraph,
    seed: int = 0,
    sample: int = 0,
    checkpoint_count: int = 100,
    keep_state: bool = False,
):
    """Remove the edges of uniformly random triangles until none remain.

    Practical limits: at most 5e6 starting edges and ~3.5e8 triangles (12
    bytes each); complete starts are capped at n = 1200.
    """
    n = start.n
    edge_total = start.edge_count_u + start.edge_count_m
    if edge_total > 5_000_000:
        raise ValueError("random triangle removal supports at most 5e6 edges")
    if edge_total == n * (n - 1) // 2 and n > 1200:
        raise ValueError("complete starts are capped at n = 1200")
    adj, deg = _combined_padded(start)
    tcount = int(K._count_triangles_padded(n, adj, deg))
    if tcount > 350_000_000:
        raise ValueError(f"{tcount} triangles exceed the in-memory list budget")
    tri = np.empty((max(1, tcount), 3), dtype=np.int32)
    K._fill_triangles_padded(n, adj, deg, tri)
    bits, e0 = _graph_to_bits(start)
    state = np.array([tcount, tcount, e0, 0], dtype=np.int64)
    feed = _RandFeed(seed, sample, chunk=min(max(4 * (tcount // 3 + 1), 1 << 14), 1 << 22))
    max_removals_guess = tcount // 3 + 1
    spacing = max(1, max_removals_guess // max(1, checkpoint_count))
    trace = ProcessTrace(KIND_RTR, n, e0 / n**1.5, seed, sample)
    while True:
        target = int(state[3]) + spacing
        while True:
            feed.pos, status = K._triangle_removal_steps(n, bits, tri, state, feed.buf, feed.pos, target)
            if status != K.STATUS_NEED_RAND:
                break
            feed.refill()
        removals = int(state[3])
        trace.checkpoints.append(
            Checkpoint(removals, removals / n**1.5, int(state[2]), 0, removals, 0,
                       np.zeros(HIST_LEN, dtype=np.int64))
        )
        if state[0] == 0:
            break
    if keep_state:
        return trace, _bits_to_graph(bits, n)
    return trace


def _combined_padded(g: EdgeStateGraph):
    n = g.n
    cap = max(1, max(len(g.adj_u[u]) + len(g.adj_m[u]) for u in range(n)))
    adj = np.zeros((n, cap), dtype=np.int32)
    deg = np.zeros(n, dtype=np.int32)
    for u in range(n):
        row = sorted(g.adj_u[u] + g.adj_m[u])
        deg[u] = len(row)
        adj[u, : len(row)] = row
    return adj, deg


# ---------------------------------------------------------------------------
# Batches and theory comparisons


def run_many(
    kind: str,
    n: int | None = None,
    c: float | None = None,
    m: int | None = None,
    samples: int = 10,
    seed: int = 0,
    checkpoint_count: int = 100,
    rounds: int = 1,
    start: EdgeStateGraph | None = None,
    jobs: int | None = None,
) -> list[ProcessTrace]:
    """Run `samples` independent copies (stream split by sample index)."""
    if kind not in PROCESS_KINDS:
        raise ValueError(f"unknown process kind {kind!r}")

    def one(k: int) -> ProcessTrace:
        if kind == KIND_K11S and rounds > 1:
            return run_packing_sprinkled(n, c=c, m=m, seed=seed, sample=k, rounds=rounds,
                                         checkpoint_count=checkpoint_count)
        if kind == KIND_K11S:
            return run_packing(n, c=c, m=m, seed=seed, sample=k, checkpoint_count=checkpoint_count)
        if kind == KIND_TRIANGLE_ONLY:
            return run_triangle_only(n, c=c, m=m, seed=seed, sample=k, checkpoint_count=checkpoint_count)
        if kind == KIND_TRIANGLE_FREE:
            return run_triangle_free(n, c=c, m=m, seed=seed, sample=k, checkpoint_count=checkpoint_count)
        if start is None:
            raise ValueError(f"{kind} needs a start graph")
        if kind == KIND_REVERSE_TF:
            return run_reverse_triangle_free(start, seed=seed, sample=k, checkpoint_count=checkpoint_count)
        return run_random_triangle_removal(start, seed=seed, sample=k, checkpoint_count=checkpoint_count)

    if jobs is None or jobs <= 1 or samples <= 1:
        return [one(k) for k in range(samples)]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(one, range(samples)))


_FINAL_FIELDS = {
    KIND_K11S: {"packing": "packing", "unmatched": "edges_u", "matched": "edges_m", "wasted": "wasted"},
    KIND_TRIANGLE_ONLY: {"packing": "packing", "unmatched": "edges_u", "matched": "edges_m"},
    KIND_TRIANGLE_FREE: {"accepted": "edges_u", "rejected": "edges_m"},
    KIND_REVERSE_TF: {"final_edges": "edges_u", "removals": "i"},
    KIND_RTR: {"final_edges": "edges_u", "removals": "packing"},
}


def predictions(kind: str, c: float) -> dict[str, float]:
    """Deterministic final-value predictions (scaled by n^{3/2})."""
    if kind == KIND_K11S:
        return {"packing": ode.l_nu(c), "unmatched": ode.default_table(ode.CURVE_Z).eval(c) / 2.0}
    if kind == KIND_TRIANGLE_ONLY:
        return {"packing": ode.l_nu_star(c), "unmatched": ode.default_table(ode.CURVE_Y).eval(c) / 2.0}
    if kind == KIND_TRIANGLE_FREE:
        return {"accepted": ode.default_table(ode.CURVE_THAT).eval(c)}
    if kind == KIND_REVERSE_TF:
        return {"final_edges": math.sqrt(math.pi) / 4.0}
    return {}


def aggregate(traces: list[ProcessTrace], include_theory: bool = True) -> dict:
    """Mean/stddev of scaled final statistics across a batch, with the
    deterministic predictions alongside where defined."""
    kind = traces[0].kind
    n = traces[0].n
    scale = float(n) ** 1.5
    stats = {}
    for name, attr in _FINAL_FIELDS[kind].items():
        vals = np.array([getattr(tr.final, attr) for tr in traces], dtype=np.float64) / scale
        stats[name] = {"mean": float(vals.mean()), "std": float(vals.std()), "values": vals.tolist()}
    out = {
        "kind": kind,
        "n": n,
        "c": traces[0].c,
        "samples": len(traces),
        "seed": traces[0].seed,
        "scaled_final": stats,
    }
    if include_theory:
        theory = predictions(kind, traces[0].c)
        if kind == KIND_REVERSE_TF and round(traces[0].c * scale) != n * (n - 1) // 2:
            theory = {}  # the closed-form final-edge constant is for complete starts
        out["theory"] = theory
    return out
