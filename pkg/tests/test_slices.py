import pytest

from flagkneser.core import ParameterError
from flagkneser.families import FamilySpec, build_family
from flagkneser.graph import build_graph
from flagkneser.slices import slice_classes, slice_embedding
from flagkneser.solver import alpha_exact, enumerate_maximum, is_independent
from flagkneser.symmetry import are_equivalent, classify


def test_embedding_is_induced_copy(graphs):
    g, small = graphs(7, (1, 5)), graphs(6, (1, 4))
    emb = slice_embedding(g, small)
    assert len(set(emb)) == small.order
    for u, v in small.edges():
        assert g.adjacent(emb[u], emb[v])
    top = 1 << 6
    for v in emb:
        A, B = g.vertices[v]
        assert B & top and not A & top


def test_slices_agree_with_direct_route():
    # alpha(6,{1,4}) = 22 sits at deficit 6, so only the top level can be sliced
    for n, a, b in [(7, 1, 5)]:
        g = build_graph(n, (a, b))
        via = slice_classes(n, a, b)
        assert via.route[-1].startswith(f"slices n={n}")
        alpha = alpha_exact(g).alpha
        direct = classify(enumerate_maximum(g, alpha), g)
        assert via.alpha == alpha
        assert via.class_count == direct.class_count == 3
        assert sorted(via.class_sizes) == sorted(c.orbit_size for c in direct.classes)
        for rep in via.representatives:
            assert is_independent(rep, g) and rep.bit_count() == alpha


def test_slices_reach_families():
    res = slice_classes(8, 1, 6)
    assert res.alpha == 58 and res.class_count == 3
    g = build_graph(8, (1, 6))
    for spec in [FamilySpec(8, 1, 6, 3), FamilySpec(8, 1, 6, 4), FamilySpec(8, 1, 6, 5, barred=True)]:
        fam = build_family(spec, g)
        assert fam.bit_count() == 58
        assert any(are_equivalent(fam, r, g) for r in res.representatives)
    assert sum(res.class_sizes) < 8 * 7 * 6 * 5 * 4 * 3 * 2


def test_slices_refuse_when_deficit_too_large():
    with pytest.raises(ParameterError):
        slice_classes(7, 2, 4)
    with pytest.raises(ParameterError):
        slice_classes(6, 1, 4, direct_cap=30)


def test_bad_triple():
    with pytest.raises(ParameterError):
        slice_classes(5, 3, 2)
