from itertools import combinations

import networkx as nx
import pytest

from flagkneser.core import ParameterError
from flagkneser.graph import bits_to_list, subgraph_adjacency
from flagkneser.solver import (
    Budget,
    CoverBound,
    alpha_exact,
    brute_force_alpha,
    clique_cover_count,
    complement_rows,
    enumerate_maximum,
    is_independent,
    is_maximal_independent,
    local_alpha_table,
    member_key,
    omega_exact,
)
from flagkneser.symmetry import orbit_cover


def random_rows(rng, k, p):
    rows = [0] * k
    for u, v in combinations(range(k), 2):
        if rng.random() < p:
            rows[u] |= 1 << v
            rows[v] |= 1 << u
    return rows


def subset_alpha(rows):
    """Largest independent subset by scanning subsets from the top size down."""
    k = len(rows)
    for size in range(k, 0, -1):
        for combo in combinations(range(k), size):
            m = sum(1 << v for v in combo)
            if all(not rows[v] & m for v in combo):
                return size
    return 0


def test_brute_force_oracle_against_subset_scan(rng):
    for _ in range(40):
        rows = random_rows(rng, rng.randrange(1, 11), rng.random())
        assert brute_force_alpha(rows) == subset_alpha(rows)


def test_solver_matches_oracle_on_induced_subgraphs(rng, graphs):
    sources = [graphs(5, (1, 3)), graphs(6, (1, 4)), graphs(7, (2, 4)), graphs(6, (1, 2, 4))]
    for trial in range(200):
        g = sources[trial % len(sources)]
        k = rng.randrange(1, 25)
        picked = rng.sample(range(g.order), k)
        mask = sum(1 << v for v in picked)
        rows = subgraph_adjacency(g, mask)
        res = alpha_exact(rows)
        assert res.exact and res.alpha == brute_force_alpha(rows)
        assert is_independent(res.witness, rows) and res.witness.bit_count() == res.alpha


def test_random_graphs_against_networkx(rng):
    for _ in range(30):
        k = rng.randrange(2, 20)
        rows = random_rows(rng, k, rng.uniform(0.1, 0.7))
        G = nx.Graph()
        G.add_nodes_from(range(k))
        G.add_edges_from((u, v) for u in range(k) for v in bits_to_list(rows[u]) if u < v)
        omega_nx = max(len(c) for c in nx.find_cliques(G))
        assert omega_exact(rows) == omega_nx
        assert alpha_exact(rows).alpha == max(len(c) for c in nx.find_cliques(nx.complement(G)))


def test_bounds_are_valid(rng, graphs):
    g = graphs(6, (1, 4))
    cover = CoverBound(g.adjacency, orbit_cover(g))
    for _ in range(50):
        cand = rng.getrandbits(g.order)
        rows = subgraph_adjacency(g, cand)
        if len(rows) > 24:
            continue
        truth = brute_force_alpha(rows)
        assert clique_cover_count(g.adjacency, cand) >= truth
        assert cover(0, cand) >= truth


def test_local_alpha_table_matches_oracle(rng):
    rows = random_rows(rng, 8, 0.4)
    tab = local_alpha_table(rows, list(range(8)))
    for m in range(256):
        assert tab[m] == brute_force_alpha(subgraph_adjacency_rows(rows, m))


def subgraph_adjacency_rows(rows, mask):
    members = bits_to_list(mask)
    pos = {v: i for i, v in enumerate(members)}
    return [sum(1 << pos[w] for w in bits_to_list(rows[v] & mask)) for v in members]


def test_cover_rejects_non_uniform():
    rows = [0b10, 0b01, 0]
    with pytest.raises(ParameterError):
        CoverBound(rows, [(0, 1)])


@pytest.mark.parametrize("n,T,alpha", [(5, (1, 3), 12), (6, (1, 4), 22), (4, (1, 2), 6), (2, (1,), 1)])
def test_alpha_known(n, T, alpha, graphs):
    g = graphs(n, T)
    res = alpha_exact(g)
    assert res.exact and res.alpha == alpha
    assert is_maximal_independent(res.witness, g)
    assert alpha <= g.order // 2


def test_alpha_is_half_iff_bipartite(graphs):
    from flagkneser.graph import is_bipartite
    from flagkneser.core import all_types

    for n in range(2, 6):
        for T in all_types(n):
            g = graphs(n, T)
            assert (alpha_exact(g).alpha * 2 == g.order) == is_bipartite(g)[0]


def test_witness_is_deterministic(graphs):
    g = graphs(6, (1, 4))
    assert alpha_exact(g).witness == alpha_exact(g).witness
    assert alpha_exact(g, cover=None).alpha == 22


def test_lower_hint_and_hint_witness(graphs):
    g = graphs(5, (1, 3))
    res = alpha_exact(g, lower_hint=12)
    assert res.alpha == 12 and res.witness.bit_count() == 12
    again = alpha_exact(g, hint_witness=res.witness)
    assert again.alpha == 12 and again.witness == res.witness
    with pytest.raises(ParameterError):
        alpha_exact(g, lower_hint=13)


def test_budget_gives_interval(graphs):
    g = graphs(7, (2, 4))
    res = alpha_exact(g, budget=Budget(max_nodes=50))
    assert not res.exact and res.status == "bound only"
    lo, hi = res.interval
    assert lo <= 90 <= hi


def test_enumeration_count_and_order(graphs):
    g = graphs(5, (1, 3))
    sets = list(enumerate_maximum(g, 12))
    assert len(sets) == 45 and len(set(sets)) == 45
    assert sets == sorted(sets, key=member_key)
    for s in sets:
        assert s.bit_count() == 12 and is_independent(s, g)


def test_enumeration_matches_networkx(graphs):
    g = graphs(4, (1, 2))
    G = nx.complement(nx.Graph(list(g.edges())))
    ref = {sum(1 << v for v in c) for c in nx.find_cliques(G) if len(c) == 6}
    assert set(enumerate_maximum(g, 6)) == ref


def test_parallel_matches_sequential(graphs):
    g = graphs(6, (1, 4))
    seq = alpha_exact(g)
    par = alpha_exact(g, workers=2)
    assert par.alpha == seq.alpha == 22
    assert list(enumerate_maximum(g, 22, workers=2)) == list(enumerate_maximum(g, 22))


def test_complement_rows_involution(rng):
    rows = random_rows(rng, 9, 0.5)
    assert complement_rows(complement_rows(rows)) == rows


def test_maximality_requires_independence():
    with pytest.raises(ParameterError):
        is_maximal_independent(0b11, [0b10, 0b01])


def disjoint_union(parts):
    rows, offset = [], 0
    for part in parts:
        rows.extend(r << offset for r in part)
        offset += len(part)
    return rows


def test_disconnected_graphs_match_oracle(rng):
    # exercises component splitting and the degree-one rule
    for _ in range(40):
        parts = [random_rows(rng, rng.randrange(1, 8), rng.uniform(0.1, 0.8))
                 for _ in range(rng.randrange(2, 5))]
        rows = disjoint_union(parts)
        expected = sum(brute_force_alpha(p) for p in parts)
        for hint in (None, max(1, expected - 1)):
            res = alpha_exact(rows, lower_hint=hint)
            assert res.alpha == expected
            assert is_independent(res.witness, rows) and res.witness.bit_count() == expected


def test_paths_and_trees(rng):
    for k in range(1, 30):
        path = [0] * k
        for v in range(k - 1):
            path[v] |= 1 << v + 1
            path[v + 1] |= 1 << v
        assert alpha_exact(path).alpha == (k + 1) // 2
    for _ in range(20):
        k = rng.randrange(2, 18)
        tree = [0] * k
        for v in range(1, k):
            u = rng.randrange(v)
            tree[u] |= 1 << v
            tree[v] |= 1 << u
        assert alpha_exact(tree).alpha == brute_force_alpha(tree)


def test_many_components_are_fast(graphs):
    g = graphs(6, (1, 3, 4))
    res = alpha_exact(g)
    assert res.alpha == 90 and res.nodes_explored < 5000
