import itertools
from fractions import Fraction

import numpy as np
import pytest

from hinm import (
    DenseMatrix,
    DimensionError,
    HiNMConfig,
    InvariantViolation,
    SaliencyMatrix,
    composed_sparsity,
    count_permutation_space,
    default_sample_schedule,
    validate_config,
)


class TestValidateConfig:
    def test_valid_16x16(self):
        cfg = HiNMConfig(vector_size=4, nm_keep=2, nm_group=4, vector_sparsity=0.5)
        vcfg = validate_config(cfg, (16, 16))
        assert vcfg.num_tiles == 4  # = output partitions = tile count
        assert vcfg.tile_keep == 8
        assert vcfg.total_keep == 32

    def test_rows_not_divisible(self):
        cfg = HiNMConfig(vector_size=4, nm_keep=2, nm_group=4, vector_sparsity=0.5)
        with pytest.raises(DimensionError):
            validate_config(cfg, (10, 16))

    def test_n_equal_m_rejected(self):
        cfg = HiNMConfig(vector_size=4, nm_keep=4, nm_group=4, vector_sparsity=0.5)
        with pytest.raises(ValueError):
            validate_config(cfg, (16, 16))

    def test_vector_only_mode_allowed(self):
        # M = 1 turns the N:M level off; needed for vector-only pruning.
        cfg = HiNMConfig(vector_size=2, nm_keep=1, nm_group=1, vector_sparsity=0.5)
        vcfg = validate_config(cfg, (4, 2))
        assert vcfg.tile_keep == 1

    def test_budget_not_multiple_of_group(self):
        # n*(1-s_v) = 6, not a multiple of 4
        cfg = HiNMConfig(vector_size=4, nm_keep=2, nm_group=4, vector_sparsity=0.25)
        with pytest.raises(DimensionError):
            validate_config(cfg, (8, 8))

    def test_sparsity_out_of_range(self):
        cfg = HiNMConfig(vector_size=4, nm_keep=2, nm_group=4, vector_sparsity=1.0)
        with pytest.raises(ValueError):
            validate_config(cfg, (16, 16))

    def test_tile_rows_must_equal_vector_size(self):
        cfg = HiNMConfig(
            vector_size=4, nm_keep=2, nm_group=4, vector_sparsity=0.5, tile_rows=8
        )
        with pytest.raises(DimensionError):
            validate_config(cfg, (16, 16))

    def test_schedule_entries_bounded(self):
        cfg = HiNMConfig(
            vector_size=4,
            nm_keep=2,
            nm_group=4,
            vector_sparsity=0.5,
            ocp_sample_schedule=(5,),
        )
        with pytest.raises(ValueError):
            validate_config(cfg, (16, 16))

    def test_default_schedule_materialized(self):
        cfg = HiNMConfig(vector_size=8, nm_keep=2, nm_group=4, vector_sparsity=0.5)
        vcfg = validate_config(cfg, (16, 16))
        assert vcfg.schedule == default_sample_schedule(8, cfg.ocp_max_iters)
        assert all(1 <= k <= 8 for k in vcfg.schedule)


class TestComposedSparsity:
    def test_paper_headline_value(self):
        assert composed_sparsity(0.5, 2, 4) == Fraction(3, 4)
        assert float(composed_sparsity(0.5, 2, 4)) == 0.75

    def test_nothing_pruned(self):
        assert composed_sparsity(0.0, 4, 4) == 0

    def test_derived_value(self):
        # cross-checked below by counting zeros in a masked 20x20 matrix
        assert composed_sparsity(0.6, 2, 4) == Fraction(4, 5)

    def test_zero_count_cross_check(self):
        from hinm import GyroPermutation, MaskPair, apply_masks, nm_prune, vector_prune
        from hinm.pruning import survivors_per_tile

        rng = np.random.default_rng(5)
        S = np.abs(rng.normal(size=(20, 20)))
        cfg = HiNMConfig(vector_size=4, nm_keep=2, nm_group=4, vector_sparsity=0.6)
        sigma_o = np.arange(20)
        vm = vector_prune(S, cfg, sigma_o)
        sigma = GyroPermutation(sigma_o, tuple(survivors_per_tile(vm)))
        em = nm_prune(S, vm, cfg, sigma)
        masked = apply_masks(S, MaskPair(vm, em))
        assert Fraction(int((masked == 0).sum()), masked.size) == Fraction(4, 5)

    def test_monotone_in_sparsity_and_keep(self):
        grid_s = [0.0, 0.1, 0.25, 0.5, 0.75, 0.9]
        for M in (2, 4, 8):
            for N in range(1, M + 1):
                values = [composed_sparsity(s, N, M) for s in grid_s]
                assert all(a <= b for a, b in zip(values, values[1:]))
            for s in grid_s:
                by_keep = [composed_sparsity(s, N, M) for N in range(1, M + 1)]
                assert all(a >= b for a, b in zip(by_keep, by_keep[1:]))

    def test_invalid_inputs(self):
        with pytest.raises(ValueError):
            composed_sparsity(-0.1, 2, 4)
        with pytest.raises(ValueError):
            composed_sparsity(0.5, 5, 4)


class TestPermutationSpace:
    def test_16x16_exact(self):
        assert count_permutation_space(16, 16, 4, 4) == 27_617_652_562_500

    def test_single_partition(self):
        assert count_permutation_space(4, 4, 4, 4) == 1

    def test_8x4(self):
        # 8!/(24^2 * 2!) = 35, times T=2, times 1
        assert count_permutation_space(8, 4, 4, 4) == 70

    def test_one_when_all_partitions_single(self):
        # P_o = P_i = T = 1 whenever m = V and n = M
        for V, M in itertools.product((1, 2, 4, 8), repeat=2):
            assert count_permutation_space(V, M, V, M) == 1

    def test_divisibility_errors(self):
        with pytest.raises(DimensionError):
            count_permutation_space(10, 16, 4, 4)
        with pytest.raises(DimensionError):
            count_permutation_space(16, 10, 4, 4)


class TestMatrixTypes:
    def test_dense_rejects_nan(self):
        with pytest.raises(InvariantViolation):
            DenseMatrix(np.array([[1.0, np.nan]]))

    def test_dense_rejects_inf(self):
        with pytest.raises(InvariantViolation):
            DenseMatrix(np.array([[np.inf, 1.0]]))

    def test_saliency_rejects_negative(self):
        with pytest.raises(InvariantViolation):
            SaliencyMatrix(np.array([[1.0, -0.5]]))

    def test_shapes(self):
        d = DenseMatrix(np.zeros((3, 5)))
        assert (d.rows, d.cols) == (3, 5)
