"""Shared data model, configuration validation, and closed-form arithmetic.

The sparsity pattern is hierarchical: V x 1 column vectors spanning V
consecutive output channels are pruned first, then each row of the
surviving vectors is pruned N:M.  A tile is the band of V output channels
that shares one vector index; tiles are the unit inside which the order of
surviving column vectors is free.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import DimensionError, InvariantViolation, ShapeMismatch

# Rational reconstruction bound for float sparsity fractions: 0.6 is read
# as 3/5, not as its binary expansion, so budgets stay exact.
_FRACTION_DENOMINATOR_LIMIT = 10**6

TIE_BREAK_POLICIES = ("lowest_index",)


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    return Fraction(float(value)).limit_denominator(_FRACTION_DENOMINATOR_LIMIT)


@dataclass(frozen=True)
class DenseMatrix:
    """An m x n weight or activation matrix, row-major.

    Rows are output channels, columns are input channels.  Values must be
    finite; NaN or Inf is rejected at construction time.
    """

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise DimensionError(f"expected a 2-D matrix, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise InvariantViolation("matrix contains NaN or Inf values")
        object.__setattr__(self, "values", v)

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


@dataclass(frozen=True)
class SaliencyMatrix:
    """Per-element importance scores, same shape as the matrix they score."""

    scores: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.scores, dtype=np.float64)
        if s.ndim != 2 or s.shape[0] < 1 or s.shape[1] < 1:
            raise DimensionError(f"expected a 2-D matrix, got shape {s.shape}")
        if not np.all(np.isfinite(s)):
            raise InvariantViolation("saliency contains NaN or Inf values")
        if np.any(s < 0):
            raise InvariantViolation("saliency scores must be non-negative")
        object.__setattr__(self, "scores", s)

    @property
    def shape(self) -> tuple[int, int]:
        return self.scores.shape


@dataclass(frozen=True)
class HiNMConfig:
    """Pruning and permutation parameters.

    ``vector_size`` is V, ``nm_keep``/``nm_group`` are N and M, and
    ``vector_sparsity`` is the fraction of column vectors dropped in the
    first pruning level.  ``tile_rows`` always equals V (a tile is the band
    of output channels that is exactly one column vector tall); it is kept
    as a field so serialized configs are explicit about it.
    """

    vector_size: int
    nm_keep: int
    nm_group: int
    vector_sparsity: float
    tile_rows: int | None = None
    ocp_sample_schedule: tuple[int, ...] | None = None
    ocp_max_iters: int = 20
    icp_max_iters: int = 50
    seed: int = 0
    tie_break: str = "lowest_index"

    def __post_init__(self):
        if self.ocp_sample_schedule is not None:
            object.__setattr__(
                self, "ocp_sample_schedule", tuple(int(k) for k in self.ocp_sample_schedule)
            )


def default_sample_schedule(vector_size: int, iters: int) -> tuple[int, ...]:
    """Per-iteration sample counts for output channel permutation.

    Starts at half the partition capacity and decays by 0.8 per iteration,
    mirroring a learning-rate style schedule; never below one sample.
    """
    return tuple(
        max(1, round(vector_size / 2 * 0.8**i)) for i in range(iters)
    )


@dataclass(frozen=True)
class ValidatedConfig:
    """An ``HiNMConfig`` checked against a concrete matrix shape.

    Carries the derived counts: ``num_tiles`` (= output partitions, m / V),
    ``tile_keep`` (the uniform per-tile reference budget k_v = n * (1 - s_v))
    and ``total_keep`` (the global number of surviving vectors).
    """

    config: HiNMConfig
    rows: int
    cols: int
    num_tiles: int
    tile_keep: int
    total_keep: int
    schedule: tuple[int, ...]

    @property
    def vector_size(self) -> int:
        return self.config.vector_size

    @property
    def nm_keep(self) -> int:
        return self.config.nm_keep

    @property
    def nm_group(self) -> int:
        return self.config.nm_group

    @property
    def seed(self) -> int:
        return self.config.seed

    @property
    def icp_max_iters(self) -> int:
        return self.config.icp_max_iters


def validate_config(cfg: HiNMConfig, shape: tuple[int, int]) -> ValidatedConfig:
    """Check all configuration invariants against a matrix shape.

    Raises ``ValueError`` for parameter errors (N >= M, sparsity out of
    range, bad schedule entries) and ``DimensionError`` when the shape
    cannot be partitioned (m not divisible by V, or the keep budget
    n * (1 - s_v) is not a whole multiple of M).
    """
    m, n = int(shape[0]), int(shape[1])
    V, N, M = cfg.vector_size, cfg.nm_keep, cfg.nm_group
    if V < 1:
        raise ValueError(f"vector_size must be >= 1, got {V}")
    if N < 1 or M < 1:
        raise ValueError(f"nm_keep and nm_group must be >= 1, got {N}:{M}")
    if N > M:
        raise ValueError(f"nm_keep must not exceed nm_group, got {N}:{M}")
    if N == M and M > 1:
        # N == M is only meaningful in the degenerate vector-only mode M = 1;
        # a real N:M level must drop something.
        raise ValueError(f"nm_keep must be < nm_group, got {N}:{M}")
    s_v = _as_fraction(cfg.vector_sparsity)
    if not (0 <= s_v < 1):
        raise ValueError(f"vector_sparsity must lie in [0, 1), got {cfg.vector_sparsity}")
    if cfg.tie_break not in TIE_BREAK_POLICIES:
        raise ValueError(f"unknown tie_break policy {cfg.tie_break!r}")
    if cfg.ocp_max_iters < 0 or cfg.icp_max_iters < 0:
        raise ValueError("iteration budgets must be non-negative")

    tile_rows = V if cfg.tile_rows is None else cfg.tile_rows
    if tile_rows != V:
        raise DimensionError(
            f"tile_rows is fixed to the vector size; got {tile_rows} with V={V}"
        )
    if m % V != 0:
        raise DimensionError(f"rows ({m}) not divisible by vector_size ({V})")
    if m < 1 or n < 1:
        raise DimensionError(f"degenerate shape {(m, n)}")

    keep = (1 - s_v) * n
    if keep.denominator != 1:
        raise DimensionError(
            f"keep budget n*(1-s_v) = {keep} is not a whole number of vectors"
        )
    tile_keep = int(keep)
    if tile_keep % M != 0:
        raise DimensionError(
            f"keep budget {tile_keep} per tile is not a multiple of nm_group ({M})"
        )

    num_tiles = m // V
    schedule = cfg.ocp_sample_schedule
    if schedule is None:
        schedule = default_sample_schedule(V, cfg.ocp_max_iters)
    for k in schedule:
        if not (1 <= k <= V):
            raise ValueError(f"sample schedule entry {k} outside [1, {V}]")

    resolved = replace(cfg, tile_rows=tile_rows, ocp_sample_schedule=tuple(schedule))
    return ValidatedConfig(
        config=resolved,
        rows=m,
        cols=n,
        num_tiles=num_tiles,
        tile_keep=tile_keep,
        total_keep=num_tiles * tile_keep,
        schedule=tuple(schedule),
    )


def composed_sparsity(vector_sparsity, nm_keep: int, nm_group: int) -> Fraction:
    """Exact fraction of zeroed elements after both pruning levels.

    1 - (1 - s_v) * N / M, evaluated in rational arithmetic so that e.g.
    (0.5, 2, 4) is exactly 3/4.
    """
    if not (1 <= nm_keep <= nm_group):
        raise ValueError(f"need 1 <= N <= M, got {nm_keep}:{nm_group}")
    s_v = _as_fraction(vector_sparsity)
    if not (0 <= s_v < 1):
        raise ValueError(f"vector_sparsity must lie in [0, 1), got {vector_sparsity}")
    return 1 - (1 - s_v) * Fraction(nm_keep, nm_group)


def count_permutation_space(m: int, n: int, V: int, M: int) -> int:
    """Exact number of distinct joint channel/vector permutations.

    m! / (V!^P_o * P_o!)  *  T  *  n! / (M!^P_i * P_i!)
    with P_o = m / V output partitions, P_i = n / M input partitions and
    T = m / V tiles.  Evaluated with arbitrary-precision integers.
    """
    if m < 1 or n < 1 or V < 1 or M < 1:
        raise DimensionError("all counts must be positive")
    if m % V != 0:
        raise DimensionError(f"rows ({m}) not divisible by vector size ({V})")
    if n % M != 0:
        raise DimensionError(f"cols ({n}) not divisible by group size ({M})")
    p_o = m // V
    p_i = n // M
    tiles = m // V
    out_term = math.factorial(m) // (math.factorial(V) ** p_o * math.factorial(p_o))
    in_term = math.factorial(n) // (math.factorial(M) ** p_i * math.factorial(p_i))
    return out_term * tiles * in_term


@dataclass(frozen=True)
class MaskPair:
    """Vector-level and element-level keep masks.

    ``vector_mask`` has one row per tile (tiles are defined by the output
    channel order), one column per input channel.  ``element_mask`` is in
    original matrix coordinates.  Element survival implies vector survival.
    """

    vector_mask: np.ndarray
    element_mask: np.ndarray

    def __post_init__(self):
        vm = np.asarray(self.vector_mask, dtype=bool)
        em = np.asarray(self.element_mask, dtype=bool)
        if vm.ndim != 2 or em.ndim != 2:
            raise InvariantViolation("masks must be 2-D")
        if em.shape[1] != vm.shape[1] or em.shape[0] % vm.shape[0] != 0:
            raise InvariantViolation(
                f"mask shapes disagree: vector {vm.shape} vs element {em.shape}"
            )
        object.__setattr__(self, "vector_mask", vm)
        object.__setattr__(self, "element_mask", em)

    @property
    def shape(self) -> tuple[int, int]:
        return self.element_mask.shape


@dataclass(frozen=True)
class GyroPermutation:
    """Joint output-channel order and per-tile surviving-vector orders.

    ``sigma_o[p]`` is the original output channel placed at position p;
    tile t covers positions [t*V, (t+1)*V).  ``sigma_i[t]`` lists tile t's
    surviving column ids in their gather order.
    """

    sigma_o: np.ndarray
    sigma_i: tuple[np.ndarray, ...]

    def __post_init__(self):
        so = np.asarray(self.sigma_o, dtype=np.int64)
        object.__setattr__(self, "sigma_o", so)
        object.__setattr__(
            self, "sigma_i", tuple(np.asarray(s, dtype=np.int64) for s in self.sigma_i)
        )

    def validate(self, shape: tuple[int, int]) -> None:
        m, n = shape
        if sorted(self.sigma_o.tolist()) != list(range(m)):
            raise InvariantViolation("sigma_o is not a permutation of the output channels")
        for t, order in enumerate(self.sigma_i):
            ids = order.tolist()
            if len(set(ids)) != len(ids):
                raise InvariantViolation(f"sigma_i[{t}] repeats a column id")
            if ids and (min(ids) < 0 or max(ids) >= n):
                raise InvariantViolation(f"sigma_i[{t}] contains out-of-range column ids")


def identity_permutation(vcfg: ValidatedConfig, survivors: Sequence[np.ndarray]) -> GyroPermutation:
    """Identity output order with survivors kept in ascending column order."""
    return GyroPermutation(
        sigma_o=np.arange(vcfg.rows, dtype=np.int64),
        sigma_i=tuple(np.sort(np.asarray(s, dtype=np.int64)) for s in survivors),
    )


def as_values(matrix) -> np.ndarray:
    """Accept a DenseMatrix, SaliencyMatrix, or ndarray and return float values."""
    if isinstance(matrix, DenseMatrix):
        return matrix.values
    if isinstance(matrix, SaliencyMatrix):
        return matrix.scores
    return np.asarray(matrix, dtype=np.float64)


def check_same_shape(a, b) -> None:
    av, bv = as_values(a), as_values(b)
    if av.shape != bv.shape:
        raise ShapeMismatch(f"shapes differ: {av.shape} vs {bv.shape}")
