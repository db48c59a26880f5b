import random

import networkx as nx
import pytest
from networkx.algorithms.isomorphism import GraphMatcher, categorical_node_match

from flagkneser.core import ParameterError, all_types, dual_type
from flagkneser.families import FamilySpec, build_family
from flagkneser.solver import alpha_exact, enumerate_maximum, member_key
from flagkneser.symmetry import (
    FULL,
    SymmetryGroupSpec,
    act,
    are_equivalent,
    canonical_image,
    classify,
    colored_canonical_form,
    count_classes,
    orbit_rows,
    shortest_odd_cycle,
    vertex_permutation,
)


def coloured_nx(g, members):
    G = nx.Graph()
    for v in range(g.order):
        G.add_node(v, m=bool(members >> v & 1))
    G.add_edges_from(g.edges())
    return G


def test_vertex_permutations_are_automorphisms(rng, graphs):
    for n, T in [(5, (1, 3)), (6, (1, 2, 4)), (6, (2, 4))]:
        g = graphs(n, T)
        for _ in range(5):
            perm = list(range(1, n + 1))
            rng.shuffle(perm)
            img = vertex_permutation(g, perm)
            assert sorted(img) == list(range(g.order))
            for u, v in g.edges():
                assert g.adjacent(img[u], img[v])
    g = graphs(6, (2, 4))
    img = vertex_permutation(g, list(range(1, 7)), dual=True)
    for u, v in g.edges():
        assert g.adjacent(img[u], img[v])


def test_orbit_sizes_divide_group_order(graphs):
    g = graphs(5, (1, 3))
    spec = SymmetryGroupSpec.for_graph(g)
    for s in list(enumerate_maximum(g, 12))[:10]:
        assert spec.order % len(orbit_rows(s, g, spec)) == 0


def test_classify_5_1_3(graphs):
    g = graphs(5, (1, 3))
    sets = list(enumerate_maximum(g, 12))
    report = classify(sets, g)
    assert report.class_count == 3
    assert sorted(c.orbit_size for c in report.classes) == [5, 20, 20]
    assert sum(c.orbit_size for c in report.classes) == len(sets)
    assert classify(list(reversed(sets)), g).representatives == report.representatives
    fams = [FamilySpec(5, 1, 3, 0), FamilySpec(5, 1, 3, 1), FamilySpec(5, 1, 3, 2, barred=True)]
    owners = set()
    for spec in fams:
        fam = build_family(spec, g)
        owners.add(next(k for k, c in enumerate(report.classes)
                        if are_equivalent(fam, c.representative, g)))
    assert owners == {0, 1, 2}


def test_canonical_image_is_orbit_invariant(rng, graphs):
    g = graphs(6, (1, 4))
    s = alpha_exact(g).witness
    perm = list(range(1, 7))
    rng.shuffle(perm)
    t = act(perm, s, g)
    assert canonical_image(s, g) == canonical_image(t, g)
    assert are_equivalent(s, t, g)


def test_equivalence_rejects_different_sizes(graphs):
    g = graphs(5, (1, 3))
    assert not are_equivalent(0b1, 0b11, g)


def test_duality_requires_self_dual_type(graphs):
    g = graphs(6, (1, 4))
    with pytest.raises(ParameterError):
        SymmetryGroupSpec(6, include_duality=True).check(g)


def test_class_counts_invariant_under_duality(graphs):
    for n in range(2, 7):
        for T in all_types(n):
            D = dual_type(T, n)
            if D <= T:
                continue
            g, h = graphs(n, T), graphs(n, D)
            if g.order > 60:
                continue
            ag, ah = alpha_exact(g).alpha, alpha_exact(h).alpha
            assert ag == ah
            cg = classify(enumerate_maximum(g, ag), g).class_count
            ch = classify(enumerate_maximum(h, ah), h).class_count
            assert cg == ch, (n, T)


def test_full_mode_agrees_with_vf2(graphs):
    rng = random.Random(7)
    for n, T, alpha in [(5, (1, 3), 12), (4, (1, 2), 6), (6, (1, 4), 22)]:
        g = graphs(n, T)
        sets = list(enumerate_maximum(g, alpha))
        for _ in range(12):
            s1, s2 = rng.choice(sets), rng.choice(sets)
            ours = colored_canonical_form(g, s1) == colored_canonical_form(g, s2)
            ref = GraphMatcher(coloured_nx(g, s1), coloured_nx(g, s2),
                               node_match=categorical_node_match("m", None)).is_isomorphic()
            assert ours == ref


def test_full_mode_on_large_automorphism_group(graphs):
    # a perfect matching has a huge automorphism group; pruning keeps this fast
    g = graphs(5, (2, 3))
    rng = random.Random(3)
    s = rng.getrandbits(g.order)
    perm = [3, 1, 5, 2, 4]
    assert colored_canonical_form(g, s) == colored_canonical_form(g, act(perm, s, g))


def test_full_and_generator_modes_agree(graphs):
    for n, T, alpha in [(5, (1, 3), 12), (6, (1, 4), 22)]:
        g = graphs(n, T)
        sets = list(enumerate_maximum(g, alpha))
        gen = classify(sets, g)
        full = classify(sets, g, SymmetryGroupSpec(n, False, FULL))
        assert gen.class_count == full.class_count == 3
        assert sorted(c.members_seen for c in gen.classes) == sorted(
            c.members_seen for c in full.classes)


def test_shortest_odd_cycle(graphs):
    g = graphs(7, (2, 4))
    cyc = shortest_odd_cycle(g.adjacency, 0, 11)
    assert cyc is not None and len(cyc) == 7
    for u, v in zip(cyc, cyc[1:] + cyc[:1]):
        assert g.adjacent(u, v)
    assert shortest_odd_cycle(graphs(6, (2, 4)).adjacency, 0, 11) is None


def test_representatives_sorted(graphs):
    g = graphs(6, (1, 4))
    report = classify(enumerate_maximum(g, 22), g)
    keys = [member_key(r) for r in report.representatives]
    assert keys == sorted(keys)


def test_orbit_count_matches_listing(graphs):
    for n in range(2, 7):
        for T in all_types(n):
            g = graphs(n, T)
            if g.order > 60:
                continue
            alpha = alpha_exact(g).alpha
            sets = list(enumerate_maximum(g, alpha))
            if len(sets) > 5000:
                continue
            counted = count_classes(g)
            assert counted.sets == len(sets)
            assert counted.classes == classify(sets, g).class_count, (n, T)


def test_orbit_count_under_duality(graphs):
    for n in range(2, 7):
        for T in all_types(n):
            D = dual_type(T, n)
            if D <= T:
                continue
            a, b = count_classes(graphs(n, T)), count_classes(graphs(n, D))
            assert (a.classes, a.sets) == (b.classes, b.sets), (n, T)


def test_orbit_count_rejects_full_mode(graphs):
    with pytest.raises(ParameterError):
        count_classes(graphs(5, (1, 3)), SymmetryGroupSpec(5, False, FULL))
