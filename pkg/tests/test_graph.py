import itertools

import numpy as np
import pytest

from riskcent.graph import (
    Graph,
    GraphError,
    binarize,
    generate_complete,
    generate_er,
    generate_er_m,
    generate_star,
    largest_component,
    load_edge_list,
    load_json,
    load_memberships,
    project_bipartite,
    relabel,
    save_json,
    triangle_counts,
    walk_counts,
)


def enumerate_walks(adj, kmax):
    """Oracle: count walks by explicit enumeration over node sequences."""
    n = adj.shape[0]
    total = np.zeros((kmax + 1, n), dtype=object)
    closed = np.zeros((kmax + 1, n), dtype=object)
    total[0] = 1
    closed[0] = 1
    for k in range(1, kmax + 1):
        for start in range(n):
            t = 0
            c = 0
            for seq in itertools.product(range(n), repeat=k):
                path = (start,) + seq
                ok = all(adj[path[s], path[s + 1]] for s in range(k))
                if ok:
                    t += 1
                    if path[-1] == start:
                        c += 1
            total[k, start] = t
            closed[k, start] = c
    return total, closed


# -- construction and validation ------------------------------------------


def test_path_graph_basics():
    g = Graph(3, [(0, 1), (1, 2)])
    assert g.n == 3 and g.m == 2
    assert list(g.degrees()) == [1, 2, 1]
    assert not g.is_weighted
    assert g.is_connected()
    a = g.adjacency()
    assert np.array_equal(a, np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], float))
    assert np.array_equal(a, a.T)


def test_rejects_self_loop():
    with pytest.raises(GraphError, match="self-loop"):
        Graph(3, [(0, 0)])


def test_rejects_duplicate_edges():
    with pytest.raises(GraphError, match="duplicate edge"):
        Graph(3, [(0, 1, 0.5), (1, 0, 0.7)])
    with pytest.raises(GraphError, match="duplicate edge"):
        Graph(3, [(0, 1), (0, 1)])


def test_rejects_bad_weights_and_range():
    with pytest.raises(GraphError, match="weight"):
        Graph(2, [(0, 1, 0.0)])
    with pytest.raises(GraphError, match="weight"):
        Graph(2, [(0, 1, -2.0)])
    with pytest.raises(GraphError, match="out of range"):
        Graph(2, [(0, 2)])


def test_known_graph_adjacency():
    # 7-node graph with 14 edges, adjacency written out by hand
    edges = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 4), (2, 3), (2, 4),
             (3, 5), (4, 5), (4, 6), (5, 6), (0, 6), (1, 6), (3, 6)]
    g = Graph(7, edges)
    expected = np.array([
        [0, 1, 1, 1, 0, 0, 1],
        [1, 0, 1, 0, 1, 0, 1],
        [1, 1, 0, 1, 1, 0, 0],
        [1, 0, 1, 0, 0, 1, 1],
        [0, 1, 1, 0, 0, 1, 1],
        [0, 0, 0, 1, 1, 0, 1],
        [1, 1, 0, 1, 1, 1, 0],
    ], dtype=float)
    assert g.m == 14
    assert np.array_equal(g.adjacency(), expected)
    assert np.array_equal(g.sparse_adjacency().toarray(), expected)
    assert list(g.degrees()) == [4, 4, 4, 4, 4, 3, 5]


def test_strengths_weighted():
    g = Graph(3, [(0, 1, 2.0), (1, 2, 0.5)])
    assert g.is_weighted
    assert np.allclose(g.strengths(), [2.0, 2.5, 0.5])
    assert np.allclose(g.degrees(), [1, 2, 1])


def test_degree_sum_is_twice_edges():
    rng = np.random.default_rng(7)
    for k in range(20):
        g = generate_er(30, 0.2, seed=int(rng.integers(1 << 30)))
        assert g.degrees().sum() == 2 * g.m
        assert g.adjacency().sum() == 2 * g.m


# -- loaders ---------------------------------------------------------------


def test_load_edge_list_path_graph(tmp_path):
    p = tmp_path / "p3.txt"
    p.write_text("0 1\n1 2\n")
    g = load_edge_list(p)
    assert g.n == 3 and list(g.degrees()) == [1, 2, 1]
    assert g.labels == ["0", "1", "2"]


def test_load_edge_list_string_labels_first_appearance(tmp_path):
    p = tmp_path / "g.txt"
    p.write_text("# comment\nbeta alpha\nalpha gamma\n")
    g = load_edge_list(p)
    assert g.labels == ["beta", "alpha", "gamma"]
    assert list(g.degrees()) == [1, 2, 1]


def test_load_edge_list_weighted_and_commas(tmp_path):
    p = tmp_path / "w.txt"
    p.write_text("a,b,0.5\nb,c\n")
    g = load_edge_list(p, weighted=True)
    assert g.is_weighted
    assert np.allclose(g.strengths(), [0.5, 1.5, 1.0])


def test_load_edge_list_duplicate_reports_line(tmp_path):
    p = tmp_path / "dup.txt"
    p.write_text("0 1 0.5\n0 1 0.7\n")
    with pytest.raises(GraphError, match=r"dup.txt:2: duplicate edge"):
        load_edge_list(p, weighted=True)


def test_load_edge_list_malformed_line_number(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("0 1\n0 1 2 3\n")
    with pytest.raises(GraphError, match=r"bad.txt:2: malformed"):
        load_edge_list(p)


def test_load_edge_list_self_loop_line(tmp_path):
    p = tmp_path / "loop.txt"
    p.write_text("0 1\nx x\n")
    with pytest.raises(GraphError, match=r"loop.txt:2: self-loop"):
        load_edge_list(p)


def test_load_memberships(tmp_path):
    p = tmp_path / "mem.csv"
    p.write_text("company,director\nAcme,smith\nBolt,smith\nAcme,jones\n")
    pairs = load_memberships(p)
    assert pairs == [("Acme", "smith"), ("Bolt", "smith"), ("Acme", "jones")]


def test_json_round_trip(tmp_path):
    g = Graph(4, [(0, 1, 2.0), (1, 2), (2, 3, 0.25)], labels=list("abcd"))
    path = tmp_path / "g.json"
    save_json(g, path)
    h = load_json(path)
    assert h == g


# -- generators ------------------------------------------------------------


def test_generate_er_deterministic():
    a = generate_er(40, 0.2, seed=123)
    b = generate_er(40, 0.2, seed=123)
    assert a == b
    c = generate_er(40, 0.2, seed=124)
    assert c != a


def test_generate_er_density_monte_carlo():
    # mean density over many samples approaches p; 400 samples of n=50
    # give a standard error around 0.002
    p = 0.3
    dens = [generate_er(50, p, seed=s).density() for s in range(400)]
    assert abs(np.mean(dens) - p) < 0.005


def test_generate_er_connected_flag():
    for s in range(10):
        g = generate_er(30, 0.12, seed=s, require_connected=True)
        assert g.is_connected()


def test_generate_er_retry_cap():
    with pytest.raises(GraphError, match="attempts"):
        generate_er(40, 0.01, seed=0, require_connected=True, max_retries=5)


def test_generate_er_m_exact_count():
    for m in (0, 1, 37, 190):
        g = generate_er_m(20, m, seed=m)
        assert g.m == m
    a = generate_er_m(20, 50, seed=9)
    assert a == generate_er_m(20, 50, seed=9)
    assert a != generate_er_m(20, 50, seed=10)


def test_generate_er_m_connected_and_bounds():
    for s in range(10):
        g = generate_er_m(30, 45, seed=s, require_connected=True)
        assert g.is_connected() and g.m == 45
    with pytest.raises(GraphError, match="edge count"):
        generate_er_m(10, 46, seed=0)
    with pytest.raises(GraphError, match="attempts"):
        generate_er_m(30, 5, seed=0, require_connected=True, max_retries=5)


def test_generate_complete_and_star():
    k5 = generate_complete(5)
    assert k5.m == 10 and list(k5.degrees()) == [4] * 5
    s5 = generate_star(5)
    assert s5.m == 4
    assert list(s5.degrees()) == [4, 1, 1, 1, 1]


# -- projection, components, relabeling ------------------------------------


def test_project_bipartite_counts_shared_directors():
    memberships = [
        ("A", "d1"), ("B", "d1"), ("C", "d1"),
        ("A", "d2"), ("B", "d2"),
        ("C", "d3"), ("D", "d9"),
    ]
    g = project_bipartite(memberships)
    # oracle: weights by set intersection of director sets
    directors = {}
    for c, d in memberships:
        directors.setdefault(c, set()).add(d)
    names = g.labels
    a = g.adjacency()
    for i, ci in enumerate(names):
        for j, cj in enumerate(names):
            if i != j:
                assert a[i, j] == len(directors[ci] & directors[cj])
    assert g.n == 4  # D kept as isolated node
    assert g.degrees()[names.index("D")] == 0
    b = project_bipartite(memberships, binary=True)
    assert binarize(g) == b


def test_largest_component_and_labels():
    g = Graph(6, [(0, 1), (1, 2), (3, 4)], labels=list("abcdef"))
    lc = largest_component(g)
    assert lc.n == 3 and lc.labels == ["a", "b", "c"]
    assert lc.is_connected()


def test_relabel_permutes_adjacency():
    g = Graph(4, [(0, 1, 2.0), (1, 2), (2, 3)], labels=list("abcd"))
    perm = [2, 0, 3, 1]
    h = relabel(g, perm)
    a, b = g.adjacency(), h.adjacency()
    for i in range(4):
        for j in range(4):
            assert b[perm[i], perm[j]] == a[i, j]
    assert h.labels[perm[0]] == "a"


# -- walk counts -----------------------------------------------------------


def test_walk_counts_against_enumeration():
    edges = [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2), (4, 2), (4, 5)]
    g = Graph(6, edges)
    total_oracle, closed_oracle = enumerate_walks(g.adjacency().astype(int), 5)
    wc = walk_counts(g, 5)
    for k in range(6):
        assert wc[k].exact
        assert list(wc[k].per_node_total) == list(total_oracle[k])
        assert list(wc[k].per_node_closed) == list(closed_oracle[k])


def test_walk_counts_identities():
    g = generate_er(25, 0.2, seed=5)
    wc = walk_counts(g, 4)
    assert np.array_equal(wc[1].per_node_total, g.degrees())
    assert np.array_equal(wc[2].per_node_closed, g.degrees())
    a = g.adjacency()
    # recurrence: totals advance by one multiplication with A
    for k in range(1, 5):
        assert np.allclose(a @ wc[k - 1].per_node_total.astype(float),
                           wc[k].per_node_total.astype(float))


def test_triangle_counts_match_closed_threes():
    g = generate_er(20, 0.3, seed=11)
    t = triangle_counts(g)
    closed3 = walk_counts(g, 3)[3].per_node_closed
    assert np.array_equal(2 * t, closed3)
    k3 = generate_complete(3)
    assert list(triangle_counts(k3)) == [1, 1, 1]


def test_walk_counts_overflow_switches_to_float():
    g = generate_complete(20)  # totals grow like 19^k, past int64 near k=46
    wc = walk_counts(g, 60)
    assert wc[5].exact
    flipped = [w.order for w in wc if not w.exact]
    assert flipped, "expected overflow fallback to trigger"
    k0 = flipped[0]
    # before the switch the counts obey the exact closed form (n-1)^k
    assert wc[10].per_node_total[0] == 19**10
    # after the switch values continue as floats near the true magnitude
    assert wc[k0].per_node_total.dtype == np.float64
    assert np.isfinite(wc[60].per_node_total).all()
    rel = wc[60].per_node_total[0] / float(19**60)
    assert abs(rel - 1) < 1e-9


def test_walk_counts_weighted_not_exact():
    g = Graph(3, [(0, 1, 0.5), (1, 2, 2.0)])
    wc = walk_counts(g, 3)
    assert not wc[1].exact
    assert np.allclose(wc[2].per_node_closed, [0.25, 4.25, 4.0])
