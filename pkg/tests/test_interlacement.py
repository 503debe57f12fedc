import numpy as np
import pytest

from riskcent.centrality import (
    circulability,
    risk_centrality,
    transmissibility,
)
from riskcent.graph import Graph, generate_complete, generate_er, generate_star, walk_counts
from riskcent.interlacement import (
    InterlacementError,
    detect,
    difference_derivatives,
    events_to_csv,
    finiteness_check,
    heuristic_linear,
    heuristic_poly,
    shifted_expansion,
)
from riskcent.spectral import decompose


def clique_plus_hub():
    """K_5 (nodes 0-4) bridged to a 6-leaf star hub (node 5, leaves 6-11).

    The hub out-degrees every clique node (7 vs 4) but the Perron mass sits
    on the clique, so pair (5, 1) must swap order at some finite zeta.
    """
    edges = [(a, b) for a in range(5) for b in range(a + 1, 5)]
    edges += [(5, leaf) for leaf in range(6, 12)]
    edges += [(0, 5)]
    return Graph(12, edges)


def double_crossing():
    """Weighted 8-node graph whose pair (1, 4) crosses twice on C.

    Frozen from a seeded search; the two circulability crossings sit near
    zeta = 0.1232 and zeta = 2.3425.
    """
    edges = [
        (0, 6, 0.50382340306527451),
        (1, 2, 1.1187884425285808),
        (1, 4, 0.81008673344357263),
        (2, 3, 1.1418478305572213),
        (2, 5, 1.4390154663315418),
        (2, 6, 0.49179588065923108),
        (3, 5, 1.1083257304062109),
        (3, 6, 0.67043152945363704),
        (4, 5, 0.28331411459675515),
        (4, 6, 0.84291133250521111),
        (4, 7, 0.63628525983667206),
        (6, 7, 1.3031829291195867),
    ]
    return Graph(8, edges)


WIDE_GRID = np.linspace(0.002, 4.0, 2500)


# -- detect ---------------------------------------------------------------------


def test_symmetric_pair_has_no_events():
    g = Graph(3, [(0, 1), (1, 2)])  # nodes 0 and 2 are automorphic
    for m in "RCT":
        res = detect(g, 0, 2, measure=m, zeta_grid=WIDE_GRID)
        assert res.events == [] and res.tangencies == []
    star = generate_star(6)
    res = detect(star, 1, 2, measure="C", zeta_grid=WIDE_GRID)
    assert res.events == []


def test_clique_hub_crossing_each_measure():
    g = clique_plus_hub()
    dec = decompose(g)
    funcs = {"R": risk_centrality, "C": circulability, "T": transmissibility}
    for m in "RCT":
        res = detect(g, 5, 1, measure=m, zeta_grid=WIDE_GRID, dec=dec)
        assert len(res.events) == 1
        ev = res.events[0]
        # hub leads at small zeta, clique node wins in the end
        assert ev.sign_before == 1 and ev.sign_after == -1
        lo, hi = ev.bracket
        assert hi - lo <= 1e-8
        assert lo <= ev.zeta_star <= hi
        # root contract: the measures actually tie at zeta_star
        vals = funcs[m](g, ev.zeta_star, dec=dec)
        assert abs(vals[5] - vals[1]) < 1e-6 * max(vals.max(), 1.0)


def test_double_crossing_pair():
    g = double_crossing()
    res = detect(g, 1, 4, measure="C", zeta_grid=WIDE_GRID)
    assert len(res.events) == 2
    first, second = res.events
    assert first.zeta_star == pytest.approx(0.123204, abs=1e-4)
    assert second.zeta_star == pytest.approx(2.342520, abs=1e-4)
    assert (first.sign_before, first.sign_after) == (1, -1)
    assert (second.sign_before, second.sign_after) == (-1, 1)


def test_detect_rejects_bad_input():
    g = generate_complete(4)
    with pytest.raises(ValueError, match="distinct"):
        detect(g, 1, 1)
    with pytest.raises(ValueError, match="positive"):
        detect(g, 0, 1, zeta_grid=[0.0, 0.5])
    with pytest.raises(ValueError, match="increasing"):
        detect(g, 0, 1, zeta_grid=[0.5, 0.2])
    with pytest.raises(ValueError, match="measure"):
        detect(g, 0, 1, measure="Q", zeta_grid=[0.1, 0.2])


def test_opposite_limit_orderings_give_odd_event_count():
    # degree order vs eigenvector order disagreeing forces at least one
    # crossing, and any count beyond the certified zeta_bar must be odd
    for seed in (3, 11, 29):
        g = generate_er(20, 0.2, seed=seed, require_connected=True)
        dec = decompose(g)
        k = g.degrees().astype(float)
        psi = dec.eigenvectors[:, 0]
        checked = 0
        for i in range(g.n):
            for j in range(i + 1, g.n):
                if (k[i] - k[j]) * (psi[i] - psi[j]) >= 0:
                    continue
                if abs(k[i] - k[j]) < 1:
                    continue
                rep = finiteness_check(g, i, j, measure="C", dec=dec)
                assert rep.decidable
                grid = np.linspace(1e-3, rep.zeta_bar + 0.5, 3000)
                res = detect(g, i, j, measure="C", zeta_grid=grid, dec=dec)
                assert len(res.events) % 2 == 1
                checked += 1
        assert checked > 0


def test_walk_dominance_means_no_events():
    # star hub vs leaf: closed-walk counts dominate at every order, and no
    # crossing shows up through the certified horizon
    g = generate_star(8)
    wc = walk_counts(g, 60)
    closed = np.array([w.per_node_closed.astype(float) for w in wc])
    assert (closed[:, 0] >= closed[:, 1]).all()
    rep = finiteness_check(g, 0, 1, measure="C")
    grid = np.linspace(1e-3, rep.zeta_bar + 5.0, 3000)
    res = detect(g, 0, 1, measure="C", zeta_grid=grid)
    assert res.events == []


# -- linear heuristic -------------------------------------------------------------


def test_linear_heuristic_closed_forms():
    g = clique_plus_hub()
    # C: walk differences 3 and -12 -> 3*3/12 = 0.75
    assert heuristic_linear(g, 5, 1, "C") == pytest.approx(0.75)
    # R: strength diff 3, second-order totals 11 vs 17 -> 2*3/6 = 1.0
    assert heuristic_linear(g, 5, 1, "R") == pytest.approx(1.0)
    # T: open-walk diffs 3 and -9 -> 2*3/9 = 2/3
    assert heuristic_linear(g, 5, 1, "T") == pytest.approx(2.0 / 3.0)


def test_linear_heuristic_matches_walk_formula():
    g = double_crossing()
    wc = walk_counts(g, 3)
    w2 = wc[2].per_node_closed
    w3 = wc[3].per_node_closed
    for i in range(g.n):
        for j in range(g.n):
            if i == j:
                continue
            got = heuristic_linear(g, i, j, "C", walks=wc)
            a, b = w2[i] - w2[j], w3[i] - w3[j]
            if a == 0 or b == 0 or np.sign(a) == np.sign(b):
                assert got is None
            else:
                assert got == pytest.approx(3 * a / (w3[j] - w3[i]))
                assert got > 0


def test_linear_heuristic_absent_cases():
    g = clique_plus_hub()
    # clique nodes 1 and 2 are degree-tied: no leading-order signal
    assert heuristic_linear(g, 1, 2, "C") is None
    # both leading differences positive for clique node vs leaf
    assert heuristic_linear(g, 1, 6, "C") is None


def test_linear_heuristic_sign_is_symmetric():
    g = clique_plus_hub()
    assert heuristic_linear(g, 1, 5, "C") == pytest.approx(
        heuristic_linear(g, 5, 1, "C"))


# -- polynomial heuristic -----------------------------------------------------------


def test_poly_first_order_has_single_root():
    g = clique_plus_hub()
    hp = heuristic_poly(g, 5, 1, "C", k=3)
    assert hp.k0 == 3
    assert hp.roots.size == 1
    assert hp.descartes_bound == 1
    # at k = k0 the truncation is the linear heuristic
    assert hp.roots[0] == pytest.approx(heuristic_linear(g, 5, 1, "C"))


def test_poly_roots_sharpen_with_order():
    g = clique_plus_hub()
    dec = decompose(g)
    true = detect(g, 5, 1, "C", zeta_grid=WIDE_GRID, dec=dec).events[0].zeta_star
    errs = []
    for k in (3, 6, 9, 12):
        hp = heuristic_poly(g, 5, 1, "C", k=k)
        assert hp.roots.size >= 1
        assert hp.roots.size <= hp.descartes_bound
        assert (hp.residuals <= 1e-10).all()
        errs.append(abs(hp.roots[0] - true))
    assert errs[-1] < errs[0]
    assert errs[-1] < 5e-3


def test_poly_rejects_complete_graph():
    g = generate_complete(5)
    with pytest.raises(InterlacementError, match="never change sign"):
        heuristic_poly(g, 0, 3, "C", k=6)


def test_poly_rejects_below_k0():
    g = clique_plus_hub()
    with pytest.raises(InterlacementError, match="k0=3"):
        heuristic_poly(g, 5, 1, "C", k=2)


def test_poly_double_crossing_bound():
    # the truncated series for the double-crossing pair keeps both roots
    g = double_crossing()
    hp = heuristic_poly(g, 1, 4, "C", k=14)
    assert hp.roots.size <= hp.descartes_bound
    assert hp.roots.size >= 1
    assert hp.roots[0] == pytest.approx(0.123204, abs=2e-3)


# -- shifted expansion ----------------------------------------------------------------


def test_derivatives_match_finite_differences():
    g = double_crossing()
    dec = decompose(g)
    z0 = 0.8
    der = difference_derivatives(g, 1, 4, "C", z0, 2, dec=dec)

    def f(z):
        c = circulability(g, z, dec=dec)
        return c[1] - c[4]

    h = 1e-5
    fd1 = (f(z0 + h) - f(z0 - h)) / (2 * h)
    fd2 = (f(z0 + h) - 2 * f(z0) + f(z0 - h)) / h**2
    assert der[0] == pytest.approx(f(z0), rel=1e-12)
    assert der[1] == pytest.approx(fd1, rel=1e-6)
    assert der[2] == pytest.approx(fd2, rel=1e-4)


def test_shifted_expansion_finds_second_crossing():
    g = double_crossing()
    dec = decompose(g)
    events = detect(g, 1, 4, "C", zeta_grid=WIDE_GRID, dec=dec).events
    ev = shifted_expansion(g, 1, 4, "C", events[0].zeta_star, k=8, dec=dec)
    assert ev is not None
    assert ev.method == "shifted-expansion"
    assert ev.zeta_star == pytest.approx(events[1].zeta_star, abs=1e-6)


def test_shifted_expansion_stops_after_last_crossing():
    g = double_crossing()
    dec = decompose(g)
    events = detect(g, 1, 4, "C", zeta_grid=WIDE_GRID, dec=dec).events
    assert shifted_expansion(g, 1, 4, "C", events[1].zeta_star, k=8,
                             dec=dec) is None


# -- finiteness --------------------------------------------------------------------


def test_finiteness_bounds_all_crossings():
    g = double_crossing()
    dec = decompose(g)
    rep = finiteness_check(g, 1, 4, "C", dec=dec)
    assert rep.decidable
    events = detect(g, 1, 4, "C", zeta_grid=WIDE_GRID, dec=dec).events
    assert all(e.zeta_star < rep.zeta_bar for e in events)
    beyond = np.linspace(rep.zeta_bar, rep.zeta_bar + 20.0, 2000)
    assert detect(g, 1, 4, "C", zeta_grid=beyond, dec=dec).events == []


def test_finiteness_boundary_is_tight():
    g = clique_plus_hub()
    dec = decompose(g)
    rep = finiteness_check(g, 5, 1, "C", dec=dec)
    lam = dec.eigenvalues
    u = dec.eigenvectors
    coef = u[5] ** 2 - u[1] ** 2
    tail = lambda z: np.exp(z * (lam[1:] - lam[0])) @ np.abs(coef[1:])
    lead = abs(coef[0])
    assert tail(rep.zeta_bar * (1 + 1e-6)) < lead
    assert tail(rep.zeta_bar * (1 - 1e-6)) > lead


def test_finiteness_undecidable_for_tied_perron_entries():
    star = generate_star(6)
    rep = finiteness_check(star, 1, 2, measure="C")
    assert not rep.decidable
    assert rep.zeta_bar is None
    assert "1e-12" in rep.message


# -- export -------------------------------------------------------------------------


def test_events_csv(tmp_path):
    g = double_crossing()
    events = detect(g, 1, 4, "C", zeta_grid=WIDE_GRID).events
    path = tmp_path / "events.csv"
    events_to_csv(events, path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "i,j,measure,method,zeta_star,bracket_lo,bracket_hi"
    assert len(lines) == 3
    cells = lines[1].split(",")
    assert cells[:4] == ["1", "4", "C", "detect"]
    assert float(cells[5]) <= float(cells[4]) <= float(cells[6])
