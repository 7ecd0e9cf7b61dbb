import json
import math

import numpy as np
import pytest

from holofit.indexsets import (
    ZERO_INDEX,
    IndexSet,
    MultiIndex,
    hyperbolic_cross,
    hyperbolic_cross_max_order,
    hyperbolic_cross_size,
    intrinsic_weights,
    is_anchored,
    is_lower,
    max_order,
    monotone_majorant,
    random_lower_set,
    unit_index,
    weighted_cardinality,
)

from _baselines import (
    brute_force_hyperbolic_cross,
    brute_force_is_anchored,
    brute_force_is_lower,
)


def mi(*dense):
    return MultiIndex.from_dense(dense)


class TestMultiIndex:
    def test_zero_storage(self):
        nu = MultiIndex(((1, 0), (3, 2)))
        assert nu.entries == ((3, 2),)
        assert nu.order == 2
        assert nu.support == (3,)

    def test_order_exact(self):
        nu = mi(4, 0, 3)
        assert nu.order == 7
        assert nu.max_dim == 3

    def test_componentwise_le(self):
        assert mi(1, 0) <= mi(1, 1)
        assert not (mi(2, 0) <= mi(1, 1))

    def test_duplicate_dims_rejected(self):
        with pytest.raises(ValueError):
            MultiIndex(((1, 1), (1, 2)))

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            MultiIndex(((1, -1),))


class TestLowerAnchored:
    def test_singleton_zero_is_lower(self):
        assert is_lower(IndexSet((ZERO_INDEX,)))

    def test_full_box_is_lower(self):
        S = IndexSet((mi(0, 0), mi(1, 0), mi(0, 1), mi(1, 1)))
        assert is_lower(S)

    def test_missing_face_not_lower(self):
        # (1,0) <= (1,1) is absent
        S = IndexSet((mi(0, 0), mi(1, 1)))
        assert not is_lower(S)
        assert not brute_force_is_lower([nu.entries for nu in S])

    def test_anchored_examples(self):
        assert is_anchored(IndexSet((ZERO_INDEX, unit_index(1))))
        assert not is_anchored(IndexSet((ZERO_INDEX, unit_index(2))))
        S = IndexSet((ZERO_INDEX, unit_index(1), unit_index(2), mi(1, 1)))
        assert is_anchored(S)
        assert brute_force_is_anchored([nu.entries for nu in S])

    def test_against_brute_force_random(self):
        rng = np.random.default_rng(7)
        for trial in range(25):
            S = random_lower_set(int(rng.integers(1, 14)), dim=3, rng=rng)
            assert is_lower(S)
            members = list(S)
            assert brute_force_is_lower([nu.entries for nu in members])
            # knock out a random non-zero member: should break lowerness
            nonzero = [nu for nu in members if nu.order > 0]
            if not nonzero:
                continue
            victim = nonzero[int(rng.integers(len(nonzero)))]
            rest = [nu for nu in members if nu != victim]
            broken = IndexSet(tuple(rest), dim=3)
            assert is_lower(broken) == brute_force_is_lower(
                [nu.entries for nu in broken]
            )


class TestHyperbolicCross:
    def test_n1_is_zero_singleton(self):
        S = hyperbolic_cross(1)
        assert list(S) == [ZERO_INDEX]

    def test_n4_composition(self):
        S = hyperbolic_cross(4)
        assert len(S) == 13
        by_order = {}
        for nu in S:
            by_order.setdefault(nu.order, []).append(nu)
        assert len(by_order[0]) == 1
        assert len(by_order[1]) == 3
        # degree-2 singles, degree-3 singles, and the (1,1) pairs
        assert sum(1 for nu in by_order[2] if len(nu.entries) == 1) == 3
        assert sum(1 for nu in by_order[2] if len(nu.entries) == 2) == 3
        assert len(by_order[3]) == 3

    @pytest.mark.parametrize("n", range(1, 11))
    def test_matches_brute_force(self, n):
        S = hyperbolic_cross(n)
        brute = brute_force_hyperbolic_cross(n)
        assert {nu.entries for nu in S} == brute
        assert hyperbolic_cross_size(n) == len(brute)

    @pytest.mark.parametrize("n", [1, 2, 3, 4, 6, 8, 12, 16])
    def test_lower_and_anchored(self, n):
        S = hyperbolic_cross(n)
        assert is_lower(S)
        assert is_anchored(S)

    @pytest.mark.parametrize("n", [1, 2, 4, 8, 16, 24, 32, 48, 64])
    def test_size_bound(self, n):
        bound = math.e * n ** (2 + math.log2(n))
        assert hyperbolic_cross_size(n) <= bound

    @pytest.mark.parametrize("n", [1, 2, 4, 8, 16, 24, 32, 48, 64])
    def test_max_order_bound(self, n):
        assert hyperbolic_cross_max_order(n) <= n

    @pytest.mark.parametrize("n", [1, 2, 3, 5, 8, 13, 16])
    def test_max_order_formula_vs_enumeration(self, n):
        assert max_order(hyperbolic_cross(n)) == hyperbolic_cross_max_order(n)

    def test_counts_match_enumeration_midrange(self):
        for n in (12, 16):
            assert hyperbolic_cross_size(n) == len(hyperbolic_cross(n))

    def test_anchored_sets_contained_in_cross(self):
        # containment needs anchoring: {0, e_5} is lower with two members
        # yet lies outside the cross of parameter 2
        rng = np.random.default_rng(3)
        for _ in range(20):
            s = int(rng.integers(1, 13))
            S = random_lower_set(s, dim=s, rng=rng, anchored=True)
            cross = hyperbolic_cross(max(len(S), 1))
            for nu in S:
                assert nu in cross

    def test_plain_lower_set_can_escape_cross(self):
        from holofit.indexsets import unit_index

        S = IndexSet((ZERO_INDEX, unit_index(5)))
        assert is_lower(S)
        assert unit_index(5) not in hyperbolic_cross(2)


class TestWeights:
    def test_zero_index_weight(self):
        u = intrinsic_weights(IndexSet((ZERO_INDEX,)))
        assert u.values[0] == 1.0
        assert u.squared == (1,)

    def test_formula_values(self):
        S = IndexSet((mi(1, 2), mi(3)), ordering="given")
        u = intrinsic_weights(S)
        vals = {nu: u.values[i] for i, nu in enumerate(S)}
        assert vals[mi(1, 2)] == pytest.approx(math.sqrt(15), abs=1e-14)
        assert vals[mi(3)] == pytest.approx(math.sqrt(7), abs=1e-14)

    @pytest.mark.parametrize("s", range(1, 21))
    def test_axis_set_cardinality_is_s_squared(self, s):
        S = IndexSet(tuple(MultiIndex(((1, j),)) if j else ZERO_INDEX for j in range(s)))
        got = weighted_cardinality(S, intrinsic_weights(S))
        assert got == s * s
        assert isinstance(got, int)

    def test_hci4_cardinality_exact(self):
        S = hyperbolic_cross(4)
        # independent exact integer sum
        expected = 0
        for nu in S:
            term = 1
            for _, v in nu.entries:
                term *= 2 * v + 1
            expected += term
        assert weighted_cardinality(S, intrinsic_weights(S)) == expected

    def test_alignment_checked(self):
        S = hyperbolic_cross(3)
        u = intrinsic_weights(hyperbolic_cross(2))
        with pytest.raises(ValueError):
            weighted_cardinality(S, u)


class TestMaxOrder:
    def test_zero_set(self):
        assert max_order(IndexSet((ZERO_INDEX,))) == 0

    def test_hci4(self):
        assert max_order(hyperbolic_cross(4)) == 3

    def test_empty_raises(self):
        with pytest.raises(ValueError):
            max_order(IndexSet(()))

    def test_lower_set_order_at_most_size(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            S = random_lower_set(int(rng.integers(1, 12)), dim=4, rng=rng)
            assert max_order(S) <= len(S)


class TestMonotoneMajorant:
    def test_already_monotone(self):
        maj, _ = monotone_majorant([1.0, 0.5, 0.25], p=1.0)
        assert np.allclose(maj, [1.0, 0.5, 0.25])

    def test_supremum_forcing(self):
        maj, _ = monotone_majorant([0.0, 1.0, 0.5], p=1.0)
        assert np.allclose(maj, [1.0, 1.0, 0.5])

    def test_l1_norm(self):
        _, norm = monotone_majorant([0.5, 1.0, 0.0], p=1.0)
        assert norm == pytest.approx(2.0, abs=1e-14)

    def test_p_domain(self):
        with pytest.raises(ValueError):
            monotone_majorant([1.0], p=1.5)


class TestIndexSetContainer:
    def test_deterministic_order(self):
        a = IndexSet((mi(1, 1), ZERO_INDEX, mi(2), mi(0, 1)))
        b = IndexSet((mi(2), mi(0, 1), mi(1, 1), ZERO_INDEX))
        assert list(a) == list(b)
        orders = [nu.order for nu in a]
        assert orders == sorted(orders)

    def test_duplicates_rejected(self):
        with pytest.raises(ValueError):
            IndexSet((ZERO_INDEX, MultiIndex(())))

    def test_json_round_trip(self):
        S = hyperbolic_cross(5)
        text = S.to_json()
        back = IndexSet.from_json(text, dim=S.dim)
        assert list(back) == list(S)
        # serialization preserves enumeration order
        data = json.loads(text)
        assert len(data) == len(S)
        assert data[0] == {}

    def test_position_lookup(self):
        S = hyperbolic_cross(4)
        for i, nu in enumerate(S):
            assert S.position(nu) == i
