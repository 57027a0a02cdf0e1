from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cliquepack.constructions import (
    FIELD_TABLES,
    SUPPORTED_ORDERS,
    UnsupportedOrderError,
    affine_plane,
    example_hypergraph,
    perfect_matching_hypergraph,
    random_nearly_disjoint,
)
from cliquepack.core import DomainError, SetFamily, is_matching, is_packing, survivor_count
from cliquepack.rng import substream


@pytest.mark.parametrize("q", SUPPORTED_ORDERS)
def test_field_axioms(q):
    add, mul = FIELD_TABLES[q]
    elems = range(q)
    assert all(add[0, a] == a and mul[1, a] == a for a in elems)
    # every nonzero element has a multiplicative inverse
    assert all(any(mul[a, b] == 1 for b in elems) for a in range(1, q))
    for a, b, c in [(a, b, c) for a in elems for b in elems for c in elems][:: max(1, q // 2)]:
        assert mul[a, add[b, c]] == add[mul[a, b], mul[a, c]]
        assert mul[a, mul[b, c]] == mul[mul[a, b], c]


@pytest.mark.parametrize("l", SUPPORTED_ORDERS)
def test_affine_plane_axioms(l):
    plane = affine_plane(l)
    assert plane.points == l * l
    assert len(plane.lines) == l * l + l
    assert len(plane.classes) == l + 1 and all(len(c) == l for c in plane.classes)
    cover = {}
    for line in plane.lines:
        assert line.card == l
        for pair in combinations(list(line), 2):
            cover[pair] = cover.get(pair, 0) + 1
    assert len(cover) == l * l * (l * l - 1) // 2
    assert set(cover.values()) == {1}
    for c in range(l + 1):
        lines = plane.class_lines(c)
        assert is_matching(SetFamily(l * l, tuple(lines)))
        assert sum(x.card for x in lines) == l * l
    assert is_packing(SetFamily(l * l, plane.lines))


def test_affine_plane_order_two():
    plane = affine_plane(2)
    classes = {frozenset(frozenset(plane.lines[i]) for i in cls) for cls in plane.classes}
    expected = {
        frozenset({frozenset({0, 1}), frozenset({2, 3})}),
        frozenset({frozenset({0, 2}), frozenset({1, 3})}),
        frozenset({frozenset({0, 3}), frozenset({1, 2})}),
    }
    assert classes == expected


@pytest.mark.parametrize("l", [1, 6, 10, 11])
def test_affine_plane_unsupported(l):
    with pytest.raises(UnsupportedOrderError):
        affine_plane(l)


class TestExample:
    def test_two_copies_of_order_two(self):
        ex = example_hypergraph(2, 3, 2)
        assert (ex.n, ex.t) == (8, 12)
        assert is_packing(ex.H.family)

    def test_two_classes_meet_once(self):
        ex = example_hypergraph(3, 2, 1)
        assert (ex.n, ex.t) == (9, 6)
        first, second = ex.H.family.blocks[:3], ex.H.family.blocks[3:]
        assert all(a.meet(b) == 1 for a in first for b in second)

    def test_single_class_is_perfect_matching(self):
        ex = example_hypergraph(2, 1, 4)
        assert ex.n == 16 and len(ex.H) == 8 and is_matching(ex.H.family)

    def test_copies_are_block_offset(self):
        ex = example_hypergraph(3, 4, 3)
        per_copy = 4 * 3
        for c in range(3):
            for b in ex.H.family.blocks[c * per_copy:(c + 1) * per_copy]:
                assert all(c * 9 <= v < (c + 1) * 9 for v in b)

    def test_s_too_large(self):
        with pytest.raises(DomainError):
            example_hypergraph(3, 5, 1)

    @pytest.mark.parametrize("l", SUPPORTED_ORDERS)
    def test_every_vertex_has_degree_s(self, l):
        for s in (1, l + 1):
            ex = example_hypergraph(l, s, 2)
            assert set(ex.H.degrees) == {s}
            assert ex.t == s * ex.n // l

    @settings(max_examples=60, deadline=None)
    @given(st.sampled_from([(2, 3, 3), (3, 2, 4), (3, 4, 2), (4, 3, 3), (5, 2, 2)]), st.integers(0, 2**32))
    def test_survivors_of_random_matchings(self, inst, seed):
        ex = example_hypergraph(*inst)
        H = ex.H
        rng = substream(seed)
        chosen = []
        for e in rng.permutation(len(H)).tolist():
            if all(H[e].isdisjoint(c) for c in chosen):
                chosen.append(H[e])
                assert survivor_count(H, chosen) >= ex.n / ex.l - len(chosen)


def test_perfect_matching():
    assert len(perfect_matching_hypergraph(6, 2)) == 3
    H = perfect_matching_hypergraph(9, 3)
    assert len(H) == 3 and is_matching(H.family)
    with pytest.raises(DomainError):
        perfect_matching_hypergraph(7, 2)


class TestRandomNearlyDisjoint:
    @settings(max_examples=40, deadline=None)
    @given(st.integers(6, 60), st.integers(2, 5), st.integers(1, 80), st.integers(0, 2**40))
    def test_output_is_packing(self, n, l, t, seed):
        if l > n:
            return
        H = random_nearly_disjoint(n, l, t, seed)
        assert len(H) <= t
        assert H.l == l
        assert is_packing(H.family)

    def test_deterministic(self):
        a = random_nearly_disjoint(100, 3, 50, 17)
        b = random_nearly_disjoint(100, 3, 50, 17)
        assert a == b
        assert a != random_nearly_disjoint(100, 3, 50, 18)

    def test_steiner_bound_n9(self):
        # 36 pairs / 3 pairs per triple: no packing of triples on 9 points exceeds 12
        for seed in range(20):
            H = random_nearly_disjoint(9, 3, 13, seed)
            assert len(H) <= 12

    def test_reaches_target_when_sparse(self):
        assert len(random_nearly_disjoint(200, 3, 40, 1)) == 40
