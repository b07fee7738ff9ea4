import random
from fractions import Fraction

import pytest

from gridtw.decomposition import (
    SizeGuardError,
    TreeDecomposition,
    balanced_separation,
    bramble_order,
    crosses_bramble,
    decide_width_at_most,
    decomposition_from_order,
    exact_treewidth,
    find_cycle,
    heuristic_decomposition,
    validate_bramble,
    validate_decomposition,
)
from gridtw.graphs import Graph
from gridtw.grid import build_qn, triangulated_grid

from oracles import treewidth_by_permutations, treewidth_by_subset_dp


def path_graph(k):
    return Graph(vertices=range(k), edges=[(i, i + 1) for i in range(k - 1)])


def complete_graph(k):
    return Graph(
        vertices=range(k),
        edges=[(i, j) for i in range(k) for j in range(i + 1, k)],
    )


def random_graph(rng, size, p):
    g = Graph(vertices=range(size))
    for i in range(size):
        for j in range(i + 1, size):
            if rng.random() < p:
                g.add_edge(i, j)
    return g


# Decomposition validation.


def test_validate_single_bag():
    g = complete_graph(4)
    td = TreeDecomposition({0: frozenset(range(4))}, [])
    assert validate_decomposition(g, td)
    assert td.width == 3


def test_validate_sliding_path_bags():
    g = path_graph(5)
    bags = {i: frozenset([i, i + 1]) for i in range(4)}
    td = TreeDecomposition(bags, [(i, i + 1) for i in range(3)])
    assert validate_decomposition(g, td)
    assert td.width == 1


def test_validate_missing_edge_cover():
    g = complete_graph(3)
    bags = {0: frozenset([0, 1]), 1: frozenset([1, 2])}
    td = TreeDecomposition(bags, [(0, 1)])
    assert not validate_decomposition(g, td)  # edge (0,2) uncovered


def test_validate_disconnected_occurrence():
    g = path_graph(3)
    bags = {
        0: frozenset([0, 1]),
        1: frozenset([1, 2]),
        2: frozenset([0, 2]),
    }
    td = TreeDecomposition(bags, [(0, 1), (1, 2)])
    assert not validate_decomposition(g, td)  # vertex 0 occurs at nodes 0, 2


def test_line_format_roundtrip():
    bags = {0: frozenset([0, 1]), 1: frozenset([1, 2]), 2: frozenset()}
    td = TreeDecomposition(bags, [(0, 1), (1, 2)])
    again = TreeDecomposition.from_lines(td.to_lines())
    assert again.width == td.width
    assert sorted(map(sorted, again.bags.values())) == sorted(
        map(sorted, bags.values())
    )


# Exact treewidth.


def test_exact_treewidth_known_values():
    tree = Graph(
        vertices=range(7),
        edges=[(0, 1), (0, 2), (1, 3), (1, 4), (2, 5), (2, 6)],
    )
    w, td = exact_treewidth(tree)
    assert w == 1 and validate_decomposition(tree, td)
    w, td = exact_treewidth(complete_graph(4))
    assert w == 3 and validate_decomposition(complete_graph(4), td)
    w, td = exact_treewidth(Graph())
    assert w == -1


@pytest.mark.parametrize("m,expected", [(2, 2), (3, 3), (4, 4)])
def test_exact_treewidth_triangulated_grids(m, expected):
    # Expected values frozen from the subset-DP oracle (and permutations
    # for m <= 3).
    g = triangulated_grid(m)
    w, td = exact_treewidth(g)
    assert validate_decomposition(g, td)
    assert w == expected
    assert treewidth_by_subset_dp(g) == expected
    if m <= 3:
        assert treewidth_by_permutations(g) == expected


def test_exact_treewidth_q2_vs_oracles():
    g = build_qn(2)
    w, td = exact_treewidth(g)
    assert validate_decomposition(g, td)
    assert w == treewidth_by_subset_dp(g) == treewidth_by_permutations(g) == 4


def test_exact_treewidth_random_vs_dp():
    rng = random.Random(7)
    for _ in range(30):
        g = random_graph(rng, rng.randrange(2, 9), rng.uniform(0.2, 0.7))
        w, td = exact_treewidth(g)
        assert validate_decomposition(g, td)
        assert w == treewidth_by_subset_dp(g)


def test_size_guard():
    g = path_graph(10)
    with pytest.raises(SizeGuardError):
        exact_treewidth(g, guard=5)


def test_decomposition_from_order_disconnected():
    g = Graph(vertices=range(4), edges=[(0, 1), (2, 3)])
    td = decomposition_from_order(g, [0, 1, 2, 3])
    assert validate_decomposition(g, td)


# Width decision / refutation.


def test_decide_width_structural():
    tri = complete_graph(3)
    ok, cert = decide_width_at_most(tri, 1)
    assert not ok and cert[0] == "cycle"
    cyc = cert[1]
    for a, b in zip(cyc, cyc[1:] + cyc[:1]):
        assert tri.has_edge(a, b)
    tree = Graph(vertices=range(5), edges=[(0, 1), (1, 2), (1, 3), (3, 4)])
    ok, td = decide_width_at_most(tree, 1)
    assert ok and validate_decomposition(tree, td) and td.width <= 1
    ok, td = decide_width_at_most(Graph(vertices=range(3)), 0)
    assert ok and td.width <= 0


def test_decide_width_search_matches_exact():
    rng = random.Random(11)
    for _ in range(20):
        g = random_graph(rng, rng.randrange(3, 8), 0.5)
        w, _ = exact_treewidth(g)
        for k in range(max(2, w - 1), w + 2):
            ok, cert = decide_width_at_most(g, k)
            assert ok == (w <= k)
            if ok:
                assert cert.width <= k and validate_decomposition(g, cert)


def test_find_cycle_none_on_forest():
    tree = Graph(vertices=range(5), edges=[(0, 1), (1, 2), (1, 3), (3, 4)])
    assert find_cycle(tree) is None


# Balanced separation.


def star_decomposition():
    # Star on center c with six leaves; one bag per leaf, bags in a path.
    g = Graph(vertices=["c"] + [f"l{i}" for i in range(1, 7)])
    for i in range(1, 7):
        g.add_edge("c", f"l{i}")
    bags = {i: frozenset(["c", f"l{i + 1}"]) for i in range(6)}
    td = TreeDecomposition(bags, [(i, i + 1) for i in range(5)])
    return g, td


def test_balanced_separation_star_frozen():
    g, td = star_decomposition()
    lam = {v: Fraction(1) for v in g.vertices()}
    sep = balanced_separation(g, td, lam)
    total = Fraction(7)
    mass = sum((lam[v] for v in sep.K - sep.L), Fraction(0))
    assert Fraction(total, 3) <= mass <= Fraction(2) * total / 3
    assert len(sep.cut) <= 2
    assert "c" in sep.cut
    # Frozen hand run: the walk leaves node 0 (far mass 5 > 14/3), stops at
    # node 1, and the grouping takes its far side of mass 4.
    assert mass == 4
    assert sep.cut == {"c", "l2"}


def test_balanced_separation_star_tree_frozen():
    # Same star graph, star-shaped decomposition tree: every far side is a
    # single leaf, so the grouping collects three of them.
    g = Graph(vertices=["c"] + [f"l{i}" for i in range(1, 7)])
    for i in range(1, 7):
        g.add_edge("c", f"l{i}")
    bags = {i: frozenset(["c", f"l{i + 1}"]) for i in range(6)}
    td = TreeDecomposition(bags, [(0, i) for i in range(1, 6)])
    lam = {v: Fraction(1) for v in g.vertices()}
    sep = balanced_separation(g, td, lam)
    assert sep.cut == {"c", "l1"}
    assert sep.K - sep.L == {"l2", "l3", "l4"}


def test_balanced_separation_path_example():
    g = path_graph(12)
    bags = {i: frozenset([i, i + 1]) for i in range(11)}
    td = TreeDecomposition(bags, [(i, i + 1) for i in range(10)])
    lam = {v: Fraction(1) for v in g.vertices()}
    sep = balanced_separation(g, td, lam)
    mass = sum((lam[v] for v in sep.K - sep.L), Fraction(0))
    assert len(sep.cut) <= 2
    assert 4 <= mass <= 8


def test_balanced_separation_rejects_bad_inputs():
    g, td = star_decomposition()
    lam = {v: Fraction(2) for v in g.vertices()}
    with pytest.raises(ValueError):
        balanced_separation(g, td, lam)
    lam = {v: Fraction(0) for v in g.vertices()}
    with pytest.raises(ValueError):
        balanced_separation(g, td, lam)


def test_balanced_separation_random_properties():
    from gridtw.harness import suite_balanced_separation

    result = suite_balanced_separation(samples=800, seed=5)
    assert result["violations"] == 0
    assert result["instances"] == 800


def test_heuristic_decomposition_validates():
    rng = random.Random(13)
    for _ in range(20):
        g = random_graph(rng, rng.randrange(2, 12), 0.4)
        td = heuristic_decomposition(g)
        assert validate_decomposition(g, td)


# Brambles.


def test_bramble_clique_singletons():
    g = complete_graph(4)
    sets = [frozenset([i]) for i in range(4)]
    assert validate_bramble(g, sets)
    assert bramble_order(sets) == 4


def test_bramble_disconnected_rejected():
    g = Graph(vertices=range(4), edges=[(0, 1), (2, 3)])
    assert not validate_bramble(g, [frozenset([0, 1]), frozenset([2, 3])])


def test_bramble_single_set_order():
    assert bramble_order([frozenset([5])]) == 1


@pytest.mark.parametrize("t", [2, 3])
def test_crosses_bramble_order(t):
    g, sets = crosses_bramble(t)
    assert validate_bramble(g, sets)
    assert bramble_order(sets) == t
    w, _ = exact_treewidth(g)
    assert w >= t - 1


def test_bramble_order_forces_treewidth():
    # Order k bramble forces treewidth >= k - 1, checked jointly.
    for t in (2, 3):
        g, sets = crosses_bramble(t, triangulated=False)
        assert validate_bramble(g, sets)
        order = bramble_order(sets)
        w, _ = exact_treewidth(g)
        assert w >= order - 1
