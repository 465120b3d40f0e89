import pytest

from helpers import brute_codegree, brute_triangles, graph_edges
from tripack import graph as G


def test_new_graph():
    g = G.new_graph(3)
    assert g.edge_count_u == 0 and g.edge_count_m == 0
    assert all(g.degree_u(v) == 0 for v in range(3))
    assert G.new_graph(1).n == 1
    with pytest.raises(ValueError):
        G.new_graph(0)


def test_insert_and_state():
    g = G.new_graph(4)
    g.insert_edge(2, 0)
    assert g.edge_state(0, 2) == "U" and g.edge_state(2, 0) == "U"
    g.insert_edge(1, 2, "M")
    assert g.edge_state(1, 2) == "M"
    assert g.edge_state(0, 3) is None
    assert g.edge_count_u == 1 and g.edge_count_m == 1
    with pytest.raises(ValueError):
        g.insert_edge(0, 2)
    with pytest.raises(ValueError):
        g.insert_edge(1, 1)
    with pytest.raises(ValueError):
        g.insert_edge(0, 7)
    with pytest.raises(ValueError):
        g.insert_edge(0, 3, "X")


def test_stream_single_pair():
    s = G.EdgeStream(2, seed=0)
    assert next(s) == (0, 1)
    with pytest.raises(StopIteration):
        next(s)


def test_stream_exhausts_k3():
    s = G.EdgeStream(3, seed=5)
    drawn = {next(s) for _ in range(3)}
    assert drawn == {(0, 1), (0, 2), (1, 2)}
    with pytest.raises(StopIteration):
        next(s)


def test_stream_full_permutation_n100():
    s = G.EdgeStream(100, seed=42)
    drawn = [next(s) for _ in range(4950)]
    assert len(set(drawn)) == 4950
    assert set(drawn) == {(u, v) for u in range(100) for v in range(u + 1, 100)}


def test_stream_deterministic():
    s1 = G.EdgeStream(30, seed=9)
    a = [next(s1) for _ in range(100)]
    s2 = G.EdgeStream(30, seed=9)
    b = [G.stream_next(s2) for _ in range(100)]
    assert a == b
    assert s2.draws_done() == 100


def test_codegree_path():
    g = G.new_graph(3)
    g.insert_edge(0, 1)
    g.insert_edge(1, 2)
    assert g.codeg_unmatched(0, 2) == 1
    assert g.common_unmatched_neighbors(0, 2) == [1]
    assert g.codeg_unmatched(0, 1) == 0
    with pytest.raises(ValueError):
        g.codeg_unmatched(1, 1)


def test_codegree_empty():
    g = G.new_graph(5)
    assert g.codeg_unmatched(0, 4) == 0


def test_codegree_against_scan():
    g = G.gnm_graph(50, 200, seed=11)
    for u in range(0, 50, 3):
        for v in range(u + 1, 50, 7):
            wits = brute_codegree(g, u, v)
            assert g.codeg_unmatched(u, v) == len(wits)
            assert g.codeg_unmatched(v, u) == len(wits)
            assert g.common_unmatched_neighbors(u, v) == sorted(wits)


def test_k11s_match_triangle():
    g = G.new_graph(4)
    g.insert_edge(0, 2)
    g.insert_edge(1, 2)
    moved = g.apply_k11s_match(0, 1, [2])
    assert moved == 3
    assert g.edge_count_u == 0 and g.edge_count_m == 3
    assert g.edge_state(0, 1) == "M" and g.edge_state(0, 2) == "M"


def test_k11s_match_empty_witnesses():
    g = G.new_graph(3)
    assert g.apply_k11s_match(0, 1, []) == 0
    assert g.edge_state(0, 1) == "U"
    assert g.edge_count_u == 1 and g.edge_count_m == 0


def test_k11s_match_star_of_three():
    # s = 3 moves 7 edges, 4 of them beyond the one extracted triangle
    g = G.new_graph(6)
    for w in (2, 3, 4):
        g.insert_edge(0, w)
        g.insert_edge(1, w)
    before_u = g.edge_count_u
    moved = g.apply_k11s_match(0, 1, [2, 3, 4])
    assert moved == 7
    assert before_u - g.edge_count_u == 6  # 2s unmatched edges left U
    assert g.edge_count_m == 7
    assert 2 * (3 - 1) == 4  # wasted edges beyond one triangle


def test_k11s_match_rejects_bad_witness():
    g = G.new_graph(4)
    g.insert_edge(0, 2)
    with pytest.raises(ValueError):
        g.apply_k11s_match(0, 1, [2])  # 2 not adjacent to 1
    with pytest.raises(ValueError):
        g.apply_k11s_match(0, 1, [3, 3])
    g.insert_edge(1, 2)
    g.apply_k11s_match(0, 1, [2])
    with pytest.raises(ValueError):
        g.apply_k11s_match(0, 1, [])  # already present


def test_triangle_counts_complete():
    assert G.complete_graph(4).count_triangles() == 4
    assert G.complete_graph(5).count_triangles() == 10
    assert len(G.complete_graph(5).enumerate_triangles()) == 10


def test_triangle_enumeration_against_scan():
    g = G.gnm_graph(30, 60, seed=4)
    expected = brute_triangles(graph_edges(g), 30)
    assert g.enumerate_triangles() == expected
    assert g.count_triangles() == len(expected)


def test_triangle_enumeration_respects_state():
    g = G.new_graph(4)
    g.insert_edge(0, 1)
    g.insert_edge(0, 2)
    g.insert_edge(1, 2, "M")
    assert g.enumerate_triangles() == [(0, 1, 2)]
    assert g.enumerate_triangles("U") == []
    assert g.enumerate_triangles("M") == []


def test_gnm_graph():
    g = G.gnm_graph(20, 50, seed=3)
    assert g.edge_count_u == 50
    assert len(graph_edges(g)) == 50
    with pytest.raises(ValueError):
        G.gnm_graph(5, 11, seed=0)


def test_edge_list_roundtrip(tmp_path):
    g = G.new_graph(6)
    g.insert_edge(0, 1)
    g.insert_edge(2, 3, "M")
    g.insert_edge(4, 5)
    path = tmp_path / "g.txt"
    G.save_edge_list(g, path)
    h = G.load_edge_list(path)
    assert graph_edges(h, "U") == {(0, 1), (4, 5)}
    assert graph_edges(h, "M") == {(2, 3)}


def test_edge_list_parsing(tmp_path):
    path = tmp_path / "in.txt"
    path.write_text("# comment\n0 1\n1 2 M\n\n")
    g = G.load_edge_list(path)
    assert g.edge_state(0, 1) == "U" and g.edge_state(1, 2) == "M"
    path.write_text("0 1 Q\n")
    with pytest.raises(ValueError):
        G.load_edge_list(path)
    path.write_text("0\n")
    with pytest.raises(ValueError):
        G.load_edge_list(path)


def test_to_from_arrays_roundtrip():
    g = G.gnm_graph(25, 60, seed=8)
    g.apply_k11s_match(*_first_match(g))
    arrays = g.to_arrays()
    h = G.EdgeStateGraph.from_arrays(*arrays)
    assert graph_edges(h, "U") == graph_edges(g, "U")
    assert graph_edges(h, "M") == graph_edges(g, "M")
    assert h.edge_count_u == g.edge_count_u and h.edge_count_m == g.edge_count_m


def _first_match(g):
    for u in range(g.n):
        for v in range(u + 1, g.n):
            if g.edge_state(u, v) is None:
                wits = g.common_unmatched_neighbors(u, v)
                if wits:
                    return u, v, wits
    raise AssertionError("no matchable pair in fixture graph")
