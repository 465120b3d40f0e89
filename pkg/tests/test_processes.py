import math

import pytest

from helpers import brute_triangles, graph_edges, reference_insertion_run
from tripack import processes as P
from tripack.graph import EdgeStateGraph, complete_graph, gnm_graph


def _trace_tuple(tr):
    return [
        (cp.i, cp.edges_u, cp.edges_m, cp.packing, cp.wasted, tuple(cp.xr_hist))
        for cp in tr.checkpoints
    ]


def test_scripted_hand_trace():
    # six fixed draws on five vertices: the third closes a triangle, the
    # sixth lands while its endpoints share no unmatched neighbor
    edges = [(0, 1), (0, 2), (1, 2), (3, 4), (0, 3), (1, 3)]
    tr, state = P.run_packing(5, edges=edges, seed=0, keep_state=True)
    f = tr.final
    assert (f.i, f.edges_u, f.edges_m, f.packing, f.wasted) == (6, 3, 3, 1, 0)
    g = state.to_graph()
    assert g.enumerate_triangles("U") == []
    assert g.enumerate_triangles("M") == [(0, 1, 2)]


def test_k3_always_packs():
    for seed in range(5):
        tr = P.run_packing(3, m=3, seed=seed)
        f = tr.final
        assert (f.packing, f.edges_u, f.edges_m) == (1, 0, 3)


def test_scripted_duplicate_rejected():
    with pytest.raises(ValueError):
        P.run_packing(5, edges=[(0, 1), (1, 0)], seed=0)
    with pytest.raises(ValueError):
        P.run_packing(5, edges=[(2, 2)], seed=0)


def test_preconditions():
    with pytest.raises(ValueError):
        P.run_packing(2, m=1, seed=0)
    with pytest.raises(ValueError):
        P.run_packing(5, m=0, seed=0)
    with pytest.raises(ValueError):
        P.run_packing(5, edges=[], seed=0)
    with pytest.raises(ValueError):
        P.run_packing(5, m=11, seed=0)  # more than C(5,2)
    with pytest.raises(ValueError):
        P.run_packing(5, seed=0)  # neither c nor m
    with pytest.raises(ValueError):
        P.run_packing(5, c=0.5, m=3, seed=0)


@pytest.mark.parametrize("kind,runner", [
    ("k11s", P.run_packing),
    ("triangle_only", P.run_triangle_only),
    ("triangle_free", P.run_triangle_free),
])
def test_kernel_matches_reference_twin(kind, runner):
    # pure EdgeStateGraph replay consuming the identical random words
    for n, c, seed in ((30, 0.9, 1), (60, 0.7, 2), (45, 1.2, 3)):
        m = int(c * n**1.5)
        tr, state = runner(n, m=m, seed=seed, keep_state=True)
        stats, hist, g = reference_insertion_run(kind, n, m, seed)
        f = tr.final
        assert f.edges_u == stats["edges_u"]
        if kind == "triangle_free":
            assert f.edges_m == stats["rejected"]
        else:
            assert f.edges_m == stats["edges_m"]
            assert f.packing == stats["packing"]
            assert f.wasted == stats["wasted"]
        assert list(f.xr_hist) == list(hist)
        got = state.to_graph()
        assert graph_edges(got, "U") == graph_edges(g, "U")
        assert graph_edges(got, "M") == graph_edges(g, "M")


def test_determinism_bit_identical():
    a = P.run_packing(150, c=0.9, seed=42, checkpoint_count=25)
    b = P.run_packing(150, c=0.9, seed=42, checkpoint_count=25)
    assert _trace_tuple(a) == _trace_tuple(b)
    c_ = P.run_packing(150, c=0.9, seed=43, checkpoint_count=25)
    assert _trace_tuple(a) != _trace_tuple(c_)


def test_checkpoint_identities_and_monotonicity():
    tr = P.run_packing(200, c=1.0, seed=7, checkpoint_count=40)
    prev_pack = prev_m = -1
    for cp in tr.checkpoints:
        from_hist = sum((2 * r + 1) * int(cp.xr_hist[r]) for r in range(1, P.R_CAP + 2))
        assert cp.edges_m == from_hist
        assert cp.edges_m - cp.wasted == 3 * cp.packing
        assert cp.edges_u + cp.edges_m == cp.i
        assert cp.packing >= prev_pack and cp.edges_m >= prev_m
        prev_pack, prev_m = cp.packing, cp.edges_m
    assert tr.final.i == int(1.0 * 200**1.5)


def test_unmatched_stays_triangle_free_every_checkpoint():
    seen = []

    def cb(i, state):
        g = state.to_graph()
        assert g.enumerate_triangles("U") == []
        seen.append(i)

    P.run_packing(120, c=1.0, seed=5, checkpoint_count=30, on_checkpoint=cb)
    assert len(seen) >= 30
    P.run_triangle_only(120, c=1.0, seed=5, checkpoint_count=10, on_checkpoint=cb)


def test_triangle_only_never_wastes():
    tr, state = P.run_triangle_only(100, c=1.1, seed=9, keep_state=True)
    f = tr.final
    assert f.wasted == 0
    assert f.edges_m == 3 * f.packing
    assert state.to_graph().count_triangles("U") == 0


def test_triangle_free_small_example():
    tr = P.run_triangle_free(3, edges=[(0, 1), (0, 2), (1, 2)], seed=0)
    f = tr.final
    assert f.edges_u == 2 and f.edges_m == 1  # third proposal rejected


def test_triangle_free_accepted_graph():
    tr, state = P.run_triangle_free(150, c=1.0, seed=3, keep_state=True)
    g = state.to_graph()
    assert g.count_triangles("U") == 0
    assert tr.final.edges_u + tr.final.edges_m == tr.final.i
    assert tr.final.edges_u == g.edge_count_u


def test_sprinkled_single_round_degenerates():
    a = P.run_packing(80, c=0.5, seed=11)
    b = P.run_packing_sprinkled(80, c=0.5, seed=11, rounds=1)
    assert _trace_tuple(a) == _trace_tuple(b)


def test_sprinkled_rounds():
    n, c, rounds = 200, 0.5, 2
    tr, state = P.run_packing_sprinkled(n, c=c, seed=13, rounds=rounds, keep_state=True)
    m = int(c * n**1.5)
    assert tr.final.i == rounds * m
    assert tr.rounds == rounds
    # conservation: drawn edges split into U, M, and abandoned earlier rounds
    assert tr.final.edges_u + tr.final.edges_m + tr.abandoned == tr.final.i
    g = state.to_graph()
    # matched stars across rounds stay edge-disjoint: every matched edge is
    # accounted once, and the count reconstructs from the event histogram
    assert g.edge_count_m == tr.final.edges_m
    assert tr.final.edges_m == sum((2 * r + 1) * int(tr.final.xr_hist[r]) for r in range(1, P.R_CAP + 2))
    assert g.enumerate_triangles("U") == []
    # per-round packing recorded at the round boundary is nondecreasing
    boundary = [cp for cp in tr.checkpoints if cp.i == m]
    assert boundary and boundary[0].packing <= tr.final.packing


def test_sprinkled_three_round_conservation():
    tr = P.run_packing_sprinkled(100, c=0.3, seed=2, rounds=3)
    assert tr.final.i == 3 * int(0.3 * 100**1.5)
    assert tr.final.edges_u + tr.final.edges_m + tr.abandoned == tr.final.i


def test_reverse_tf_trivial_cases():
    path = EdgeStateGraph(4)
    path.insert_edge(0, 1)
    path.insert_edge(1, 2)
    tr = P.run_reverse_triangle_free(path, seed=0)
    assert tr.final.i == 0 and tr.final.edges_u == 2

    tr, g = P.run_reverse_triangle_free(complete_graph(3), seed=0, keep_state=True)
    assert tr.final.i == 1 and tr.final.edges_u == 2
    assert g.count_triangles() == 0


def test_reverse_tf_terminates_triangle_free():
    tr, g = P.run_reverse_triangle_free(complete_graph(20), seed=4, keep_state=True)
    assert g.count_triangles() == 0
    assert tr.final.edges_u == 190 - tr.final.i
    b = P.run_reverse_triangle_free(complete_graph(20), seed=4)
    assert _trace_tuple(tr) == _trace_tuple(b)


def test_rtr_small_cases():
    tr, g = P.run_random_triangle_removal(complete_graph(3), seed=0, keep_state=True)
    assert tr.final.packing == 1 and tr.final.edges_u == 0

    tr, g = P.run_random_triangle_removal(complete_graph(4), seed=1, keep_state=True)
    # any removed triangle leaves a 3-edge star, which is triangle-free
    assert tr.final.packing == 1 and tr.final.edges_u == 3
    assert g.count_triangles() == 0


def test_rtr_random_graph():
    start = gnm_graph(60, 220, seed=6)
    tr, g = P.run_random_triangle_removal(start, seed=6, keep_state=True)
    assert g.count_triangles() == 0
    assert tr.final.edges_u == 220 - 3 * tr.final.packing
    assert brute_triangles(graph_edges(g), 60) == []


def test_rtr_caps():
    with pytest.raises(ValueError):
        P.run_random_triangle_removal(complete_graph(1300), seed=0)


def test_max_codegree_recorded():
    tr = P.run_packing(300, c=1.0, seed=1)
    top = max(r for r in range(P.R_CAP + 2) if tr.final.xr_hist[r] > 0)
    assert tr.max_codegree >= top


def test_trace_csv(tmp_path):
    tr = P.run_packing(50, c=0.8, seed=1, checkpoint_count=10)
    path = tmp_path / "trace.csv"
    tr.write_csv(path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "i,t,edges_u,edges_m,packing,wasted,x1,x2,x3,x4,x5,x6,x7,x8,x_overflow"
    assert len(lines) == len(tr.checkpoints) + 1
    last = lines[-1].split(",")
    assert int(last[0]) == tr.final.i
    assert int(last[2]) == tr.final.edges_u


def test_run_many_and_aggregate():
    traces = P.run_many("k11s", n=60, c=0.8, samples=4, seed=5)
    assert [tr.sample for tr in traces] == [0, 1, 2, 3]
    again = P.run_many("k11s", n=60, c=0.8, samples=4, seed=5, jobs=2)
    assert [_trace_tuple(a) for a in traces] == [_trace_tuple(b) for b in again]
    agg = P.aggregate(traces)
    assert agg["samples"] == 4
    assert set(agg["scaled_final"]) == {"packing", "unmatched", "matched", "wasted"}
    vals = agg["scaled_final"]["packing"]["values"]
    assert len(vals) == 4
    assert agg["theory"]["packing"] == pytest.approx(0.19, abs=0.05)


def test_run_many_removal_theory_tagging():
    traces = P.run_many("reverse_triangle_free", samples=2, seed=1, start=complete_graph(12))
    agg = P.aggregate(traces)
    assert agg["theory"] == {"final_edges": pytest.approx(math.sqrt(math.pi) / 4)}
    traces = P.run_many("reverse_triangle_free", samples=2, seed=1, start=gnm_graph(12, 40, seed=2))
    assert P.aggregate(traces)["theory"] == {}


def test_exhaustive_draw_mode():
    # m beyond half the pairs switches to the shuffled-permutation stream
    n = 12
    total = n * (n - 1) // 2
    tr, state = P.run_packing(n, m=total, seed=3, keep_state=True)
    g = state.to_graph()
    assert g.edge_count_u + g.edge_count_m == total
    assert tr.final.edges_u + tr.final.edges_m == total
    assert g.enumerate_triangles("U") == []


def test_max_codegree_stays_logarithmic():
    # the running max codegree is reported, not enforced; at this scale it
    # sits well under 3*ln(n)/ln(ln(n))
    n = 1000
    tr = P.run_packing(n, c=0.5, seed=3, checkpoint_count=4)
    bound = 3 * math.log(n) / math.log(math.log(n))
    assert 1 <= tr.max_codegree <= bound


def test_unmatched_triangle_free_final_large():
    # full scans are quadratic, so large runs are checked at the final state
    from tripack import _kernels as K

    tr, state = P.run_packing(3000, c=1.0, seed=12, keep_state=True)
    assert K._count_triangles_padded(3000, state.adj_u, state.deg_u) == 0
    tr2, st2 = P.run_triangle_free(3000, c=1.0, seed=13, keep_state=True)
    assert K._count_triangles_padded(3000, st2.adj_u, st2.deg_u) == 0


def test_reverse_tf_single_removal_uniform():
    # on K_3 exactly one edge is removed, so its identity is visible in the
    # final state; the pick should spread evenly over the 3 edges
    counts = {}
    runs = 600
    for seed in range(runs):
        tr, g = P.run_reverse_triangle_free(complete_graph(3), seed=seed, keep_state=True)
        assert tr.final.i == 1
        gone = {(0, 1), (0, 2), (1, 2)} - graph_edges(g)
        assert len(gone) == 1
        key = gone.pop()
        counts[key] = counts.get(key, 0) + 1
    assert len(counts) == 3
    lo, hi = min(counts.values()), max(counts.values())
    assert runs / 3 * 0.75 < lo and hi < runs / 3 * 1.25, counts
