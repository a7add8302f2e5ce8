import itertools

import numpy as np
import pytest

from hinm import (
    BudgetError,
    GroupingError,
    GyroPermutation,
    HiNMConfig,
    InvariantViolation,
    MaskPair,
    NegativeScore,
    ShapeMismatch,
    apply_masks,
    decode,
    encode,
    load_saliency,
    magnitude_saliency,
    nm_prune,
    no_perm_prune,
    validate_config,
    vector_prune,
)
from hinm.io import write_hnmw
from hinm.pruning import (
    allocate_vector_budget,
    restore_row_order,
    survivors_per_tile,
)

from conftest import ocp_construction


def default_sigma(vector_mask, m):
    return GyroPermutation(np.arange(m), tuple(survivors_per_tile(vector_mask)))


class TestMagnitudeSaliency:
    def test_absolute_value(self):
        sal = magnitude_saliency(np.array([[-2.0, 3.0]]))
        assert np.array_equal(sal.scores, [[2.0, 3.0]])

    def test_all_zero(self):
        sal = magnitude_saliency(np.zeros((3, 3)))
        assert not sal.scores.any()

    def test_matches_scalar_loop(self, rng):
        W = rng.normal(size=(8, 8))
        sal = magnitude_saliency(W)
        for i in range(8):
            for j in range(8):
                assert sal.scores[i, j] == abs(W[i, j])


class TestLoadSaliency:
    def test_matching_shape(self, tmp_path, rng):
        path = tmp_path / "s.hnmw"
        scores = np.abs(rng.normal(size=(8, 8)))
        write_hnmw(path, scores)
        sal = load_saliency(path, (8, 8))
        assert sal.shape == (8, 8)

    def test_shape_mismatch(self, tmp_path, rng):
        path = tmp_path / "s.hnmw"
        write_hnmw(path, np.abs(rng.normal(size=(4, 4))))
        with pytest.raises(ShapeMismatch):
            load_saliency(path, (8, 8))

    def test_negative_score(self, tmp_path):
        path = tmp_path / "s.hnmw"
        write_hnmw(path, np.array([[1.0, -1.0]]))
        with pytest.raises(NegativeScore):
            load_saliency(path, (1, 2))


class TestVectorPrune:
    def test_construction_concentrates_budget(self):
        # The global budget keeps both strong vectors of the strong tile
        # and drops the weak tile entirely.
        scores, cfg = ocp_construction()
        sigma_o = np.array([0, 2, 1, 3])
        vm = vector_prune(scores, cfg, sigma_o)
        assert vm[0].tolist() == [True, True]
        assert vm[1].tolist() == [False, False]

    def test_uniform_keeps_lowest_indexed_half_per_tile(self):
        # Gain ties fall back to a round-robin over tiles, so a uniform
        # matrix keeps the uniform per-tile budget, lowest columns first.
        S = np.ones((4, 8))
        cfg = HiNMConfig(vector_size=2, nm_keep=1, nm_group=2, vector_sparsity=0.5)
        vm = vector_prune(S, cfg, np.arange(4))
        expected = [True] * 4 + [False] * 4
        assert vm[0].tolist() == expected
        assert vm[1].tolist() == expected

    def test_zero_sparsity_keeps_all(self):
        S = np.ones((4, 4))
        cfg = HiNMConfig(vector_size=2, nm_keep=1, nm_group=2, vector_sparsity=0.0)
        vm = vector_prune(S, cfg, np.arange(4))
        assert vm.all()

    def test_against_sort_oracle(self, rng):
        # With a single tile the global budget reduces to plain top-k by
        # vector score; check against an independent sort.
        S = np.abs(rng.normal(size=(4, 16)))
        cfg = HiNMConfig(vector_size=4, nm_keep=1, nm_group=2, vector_sparsity=0.5)
        vm = vector_prune(S, cfg, np.arange(4))
        col_scores = S.sum(axis=0)
        expected = set(np.argsort(-col_scores, kind="stable")[:8].tolist())
        assert set(np.flatnonzero(vm[0]).tolist()) == expected

    def test_budget_error(self):
        with pytest.raises(BudgetError):
            allocate_vector_budget(np.ones((2, 4)), total_keep=3, group=2)


class TestNMPrune:
    def _single_row(self, values, cfg, order=None):
        S = np.asarray(values, dtype=np.float64)[None, :]
        vm = np.ones((1, S.shape[1]), dtype=bool)
        if order is None:
            order = np.arange(S.shape[1])
        sigma = GyroPermutation(np.array([0]), (np.asarray(order),))
        return nm_prune(S, vm, cfg, sigma)[0]

    def test_top2_obvious(self):
        cfg = HiNMConfig(vector_size=1, nm_keep=2, nm_group=4, vector_sparsity=0.0)
        mask = self._single_row([1.0, 2.0, 3.0, 4.0], cfg)
        assert mask.tolist() == [False, False, True, True]

    def test_tie_break_lowest_position(self):
        cfg = HiNMConfig(vector_size=1, nm_keep=2, nm_group=4, vector_sparsity=0.0)
        mask = self._single_row([5.0, 5.0, 5.0, 5.0], cfg)
        assert mask.tolist() == [True, True, False, False]

    def test_grouping_from_sigma_i(self):
        # groups {0,3,4,5} and {1,2,6,7} keep {9,6} and {8,7}: 30 total,
        # the maximum over all 35 balanced groupings.
        cfg = HiNMConfig(vector_size=1, nm_keep=2, nm_group=4, vector_sparsity=0.0)
        row = [9.0, 8.0, 7.0, 6.0, 1.0, 1.0, 1.0, 1.0]
        order = [0, 3, 4, 5, 1, 2, 6, 7]
        mask = self._single_row(row, cfg, order)
        kept = np.flatnonzero(mask).tolist()
        assert kept == [0, 1, 2, 3]
        assert sum(row[i] for i in kept) == 30.0

    def test_grouping_error(self):
        cfg = HiNMConfig(vector_size=1, nm_keep=2, nm_group=4, vector_sparsity=0.0)
        S = np.ones((1, 6))
        vm = np.ones((1, 6), dtype=bool)
        sigma = GyroPermutation(np.array([0]), (np.arange(6),))
        with pytest.raises(GroupingError):
            nm_prune(S, vm, cfg, sigma)

    def test_per_group_optimality_by_enumeration(self, rng):
        # Every group keeps its maximum-saliency N-subset.
        cfg = HiNMConfig(vector_size=2, nm_keep=2, nm_group=4, vector_sparsity=0.0)
        S = np.abs(rng.normal(size=(2, 8)))
        vm = np.ones((1, 8), dtype=bool)
        sigma = GyroPermutation(np.array([0, 1]), (np.arange(8),))
        em = nm_prune(S, vm, cfg, sigma)
        for r in range(2):
            for g in range(2):
                cols = np.arange(g * 4, (g + 1) * 4)
                kept = em[r, cols]
                best = max(
                    sum(S[r, cols[list(sub)]])
                    for sub in itertools.combinations(range(4), 2)
                )
                assert S[r, cols[kept]].sum() == pytest.approx(best)


class TestApplyMasks:
    def test_identity_and_zero(self, rng):
        W = rng.normal(size=(4, 4))
        all_true = MaskPair(np.ones((2, 4), bool), np.ones((4, 4), bool))
        all_false = MaskPair(np.zeros((2, 4), bool), np.zeros((4, 4), bool))
        assert np.array_equal(apply_masks(W, all_true), W)
        assert not apply_masks(W, all_false).any()

    def test_matches_elementwise_loop(self, rng):
        W = rng.normal(size=(8, 8))
        _, masks, _ = no_perm_prune(
            W, HiNMConfig(vector_size=4, nm_keep=2, nm_group=4, vector_sparsity=0.5)
        )
        out = apply_masks(W, masks)
        for i in range(8):
            for j in range(8):
                assert out[i, j] == (W[i, j] if masks.element_mask[i, j] else 0.0)

    def test_shape_mismatch(self):
        masks = MaskPair(np.ones((1, 4), bool), np.ones((2, 4), bool))
        with pytest.raises(ShapeMismatch):
            apply_masks(np.ones((4, 4)), masks)


class TestEncodeDecode:
    def test_figure_style_instance(self, rng):
        # 50% vector + 2:4 on an 8x8: two kept values per row-group,
        # positions inside [0, 4).
        W = rng.normal(size=(8, 8))
        cfg = HiNMConfig(vector_size=4, nm_keep=2, nm_group=4, vector_sparsity=0.5)
        sigma, masks, _ = no_perm_prune(W, cfg)
        enc = encode(W, masks, sigma, cfg)
        for tile in enc.tiles:
            assert tile.vector_index.size == 4
            assert tile.nm_index.shape == (4, 2)
            assert tile.kept_values.shape == (4, 2)
            assert tile.nm_index.min() >= 0 and tile.nm_index.max() < 4
            # positions strictly increasing inside each group
            assert np.all(tile.nm_index[:, 0] < tile.nm_index[:, 1])

    def test_all_true_masks(self, rng):
        # s_v = 0 and N = M keeps everything: the vector index lists every
        # column and the kept values are the full rows.
        W = rng.normal(size=(4, 4))
        cfg = HiNMConfig(vector_size=2, nm_keep=4, nm_group=4, vector_sparsity=0.0)
        masks = MaskPair(np.ones((2, 4), bool), np.ones((4, 4), bool))
        sigma = GyroPermutation(np.arange(4), (np.arange(4), np.arange(4)))
        enc = encode(W, masks, sigma, cfg)
        assert enc.tiles[0].vector_index.tolist() == [0, 1, 2, 3]
        assert np.array_equal(enc.tiles[0].kept_values, W[:2])
        assert np.array_equal(decode(enc, (4, 4)), W)

    def test_roundtrip_random_instances(self, rng):
        cfg = HiNMConfig(vector_size=4, nm_keep=2, nm_group=4, vector_sparsity=0.5, seed=3)
        for _ in range(20):
            W = rng.normal(size=(8, 16))
            from hinm import gyro_permute

            sigma, masks, _ = gyro_permute(W, cfg)
            enc = encode(W, masks, sigma, cfg)
            dec = decode(enc, (8, 16))
            masked = apply_masks(W, masks)
            assert np.array_equal(dec, masked[sigma.sigma_o])
            assert np.array_equal(restore_row_order(dec, sigma.sigma_o), masked)

    def test_malformed_masks_rejected(self, rng):
        W = rng.normal(size=(4, 4))
        cfg = HiNMConfig(vector_size=2, nm_keep=1, nm_group=2, vector_sparsity=0.5)
        sigma, masks, _ = no_perm_prune(W, cfg)
        bad_em = masks.element_mask.copy()
        bad_em[0] = True  # keeps elements inside pruned vectors
        with pytest.raises(InvariantViolation):
            encode(W, MaskPair(masks.vector_mask, bad_em), sigma, cfg)


class TestZeroFractionProperty:
    @pytest.mark.parametrize("seed", range(6))
    def test_zero_fraction_matches_composed(self, seed):
        from fractions import Fraction

        from hinm import composed_sparsity, gyro_permute

        rng = np.random.default_rng(seed)
        V = int(rng.choice([2, 4, 8]))
        m = V * int(rng.integers(1, 4))
        n = 8 * int(rng.integers(1, 4))
        cfg = HiNMConfig(vector_size=V, nm_keep=2, nm_group=4, vector_sparsity=0.5, seed=seed)
        W = rng.normal(size=(m, n))
        _, masks, _ = gyro_permute(W, cfg)
        masked = apply_masks(W, masks)
        zeros = Fraction(int((masked == 0).sum()), masked.size)
        assert zeros == composed_sparsity(0.5, 2, 4)
