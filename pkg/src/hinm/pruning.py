"""Mask generation and the compressed encoding.

Pruning order: column-wise vector pruning first, then N:M pruning on the
rows of the surviving vectors.  The vector keep budget is global (the
whole matrix keeps ``total_keep`` vectors) and is distributed over tiles
in whole N:M groups by an exact greedy allocator, so the composed
sparsity fraction is hit exactly on every instance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import io as hio
from .errors import (
    BudgetError,
    GroupingError,
    InvariantViolation,
    NegativeScore,
    ShapeMismatch,
)
from .model import (
    DenseMatrix,
    GyroPermutation,
    HiNMConfig,
    MaskPair,
    SaliencyMatrix,
    ValidatedConfig,
    as_values,
    check_same_shape,
    validate_config,
)


def magnitude_saliency(weights) -> SaliencyMatrix:
    """L1 magnitude importance: score(i, j) = |w(i, j)|."""
    return SaliencyMatrix(np.abs(as_values(weights)))


def load_saliency(path, expected_shape: tuple[int, int]) -> SaliencyMatrix:
    """Load externally computed scores (e.g. second-order estimates).

    The file must match the weight shape and contain no negative scores.
    """
    scores = hio.read_hnmw(path)
    if tuple(scores.shape) != tuple(expected_shape):
        raise ShapeMismatch(
            f"saliency shape {scores.shape} does not match weights {tuple(expected_shape)}"
        )
    if np.any(scores < 0):
        raise NegativeScore(f"{path}: saliency contains negative scores")
    return SaliencyMatrix(scores)


def _ensure_validated(cfg, shape) -> ValidatedConfig:
    if isinstance(cfg, ValidatedConfig):
        return cfg
    return validate_config(cfg, shape)


def tile_rows(sigma_o: np.ndarray, vector_size: int) -> np.ndarray:
    """Original row ids per tile, shape (T, V); tile t holds positions t*V..t*V+V."""
    return np.asarray(sigma_o, dtype=np.int64).reshape(-1, vector_size)


def tile_column_scores(scores: np.ndarray, row_groups) -> np.ndarray:
    """Vector score of each (tile, column): the sum over the tile's rows.

    ``row_groups`` may be ragged (used for partially sampled partitions);
    empty groups contribute zero.
    """
    n = scores.shape[1]
    out = np.zeros((len(row_groups), n))
    for t, rows in enumerate(row_groups):
        rows = np.asarray(rows, dtype=np.int64)
        if rows.size:
            out[t] = scores[rows].sum(axis=0)
    return out


def _tile_order_and_gains(col_scores: np.ndarray, group: int):
    """Per tile: descending column order (ties to the lowest column id) and
    the score gained by each additional group of M kept columns."""
    num_tiles, n = col_scores.shape
    orders = np.empty((num_tiles, n), dtype=np.int64)
    max_groups = n // group
    gains = np.empty((num_tiles, max_groups))
    cols = np.arange(n)
    for t in range(num_tiles):
        order = np.lexsort((cols, -col_scores[t]))
        orders[t] = order
        sorted_scores = col_scores[t][order][: max_groups * group]
        gains[t] = sorted_scores.reshape(max_groups, group).sum(axis=1)
    return orders, gains


def allocate_vector_budget(col_scores: np.ndarray, total_keep: int, group: int):
    """Distribute the global vector budget over tiles in whole N:M groups.

    The per-group gains of a tile are non-increasing, so taking the best
    remaining group greedily is exactly optimal.  Gain ties are resolved
    toward the tile with the smaller current allocation and then the lower
    tile index, which reduces to a round-robin (uniform budget) whenever
    all scores are equal.

    Returns (kept columns per tile, column order per tile).
    """
    if total_keep % group != 0:
        raise BudgetError(f"total keep budget {total_keep} not a multiple of {group}")
    orders, gains = _tile_order_and_gains(col_scores, group)
    num_tiles, max_groups = gains.shape
    counts = np.zeros(num_tiles, dtype=np.int64)
    for _ in range(total_keep // group):
        best_key = None
        best_tile = -1
        for t in range(num_tiles):
            c = counts[t]
            if c >= max_groups:
                continue
            key = (-gains[t, c], c, t)
            if best_key is None or key < best_key:
                best_key = key
                best_tile = t
        if best_tile < 0:
            raise BudgetError("keep budget exceeds the available column groups")
        counts[best_tile] += 1
    return counts * group, orders


def vector_stage_retained(scores: np.ndarray, row_groups, total_keep: int, group: int) -> float:
    """Saliency kept by vector pruning alone, for tiles made of ``row_groups``.

    Equals the greedy allocation total: the sum of the total_keep/M largest
    per-group gains over all tiles (per-tile gain sequences are concave).
    """
    col_scores = tile_column_scores(scores, row_groups)
    _, gains = _tile_order_and_gains(col_scores, group)
    flat = gains.ravel()
    k = total_keep // group
    if k <= 0:
        return 0.0
    if k >= flat.size:
        return float(flat.sum())
    part = np.partition(flat, flat.size - k)
    return float(part[flat.size - k :].sum())


def vector_prune(saliency, cfg, sigma_o) -> np.ndarray:
    """Column-wise vector pruning under the output channel order ``sigma_o``.

    Returns the (T, n) boolean vector mask.  Within a tile, kept columns
    are the highest-scoring ones, ties broken toward the lowest column id.
    """
    scores = as_values(saliency)
    vcfg = _ensure_validated(cfg, scores.shape)
    rows = tile_rows(sigma_o, vcfg.vector_size)
    col_scores = tile_column_scores(scores, rows)
    counts, orders = allocate_vector_budget(col_scores, vcfg.total_keep, vcfg.nm_group)
    mask = np.zeros((vcfg.num_tiles, vcfg.cols), dtype=bool)
    for t in range(vcfg.num_tiles):
        mask[t, orders[t][: counts[t]]] = True
    return mask


def survivors_per_tile(vector_mask: np.ndarray) -> list[np.ndarray]:
    """Surviving column ids per tile in ascending order."""
    return [np.flatnonzero(vector_mask[t]) for t in range(vector_mask.shape[0])]


def _group_keep_positions(group_scores: np.ndarray, keep: int) -> np.ndarray:
    """Within-group positions of the keep highest scores, ties to the left.

    ``group_scores`` has shape (..., M); the result has shape (..., keep)
    with positions in ascending order.
    """
    order = np.argsort(-group_scores, axis=-1, kind="stable")
    return np.sort(order[..., :keep], axis=-1)


def nm_prune(saliency, vector_mask: np.ndarray, cfg, sigma: GyroPermutation) -> np.ndarray:
    """Row-wise N:M pruning of the surviving vectors.

    Tile survivors are taken in sigma.sigma_i[t] order and chunked into
    groups of M; each row keeps its N highest-saliency elements per group.
    Returns the (m, n) element mask in original coordinates.
    """
    scores = as_values(saliency)
    vcfg = _ensure_validated(cfg, scores.shape)
    V, N, M = vcfg.vector_size, vcfg.nm_keep, vcfg.nm_group
    rows = tile_rows(sigma.sigma_o, V)
    element_mask = np.zeros(scores.shape, dtype=bool)
    for t in range(vcfg.num_tiles):
        order = np.asarray(sigma.sigma_i[t], dtype=np.int64)
        expected = set(np.flatnonzero(vector_mask[t]).tolist())
        if set(order.tolist()) != expected:
            raise InvariantViolation(
                f"sigma_i[{t}] does not match the tile's surviving vectors"
            )
        if order.size % M != 0:
            raise GroupingError(
                f"tile {t} has {order.size} survivors, not a multiple of {M}"
            )
        if order.size == 0:
            continue
        groups = order.reshape(-1, M)
        tile_scores = scores[rows[t]][:, groups]  # (V, G, M)
        keep_pos = _group_keep_positions(tile_scores, N)  # (V, G, N)
        kept_cols = groups[np.arange(groups.shape[0])[:, None], keep_pos]  # (V, G, N)
        row_ids = np.broadcast_to(rows[t][:, None, None], kept_cols.shape)
        element_mask[row_ids.ravel(), kept_cols.ravel()] = True
    return element_mask


def apply_masks(weights, masks: MaskPair) -> np.ndarray:
    """Hadamard application of the element mask: zero everywhere pruned."""
    values = as_values(weights)
    if values.shape != masks.element_mask.shape:
        raise ShapeMismatch(
            f"weights {values.shape} vs mask {masks.element_mask.shape}"
        )
    return values * masks.element_mask


def validate_masks(masks: MaskPair, cfg, sigma: GyroPermutation) -> ValidatedConfig:
    """Check every structural invariant of a mask pair; raise otherwise."""
    vcfg = _ensure_validated(cfg, masks.element_mask.shape)
    V, N, M = vcfg.vector_size, vcfg.nm_keep, vcfg.nm_group
    vm, em = masks.vector_mask, masks.element_mask
    if vm.shape != (vcfg.num_tiles, vcfg.cols):
        raise InvariantViolation(f"vector mask shape {vm.shape} unexpected")
    sigma.validate((vcfg.rows, vcfg.cols))
    if int(vm.sum()) != vcfg.total_keep:
        raise InvariantViolation(
            f"{int(vm.sum())} surviving vectors, budget is {vcfg.total_keep}"
        )
    rows = tile_rows(sigma.sigma_o, V)
    for t in range(vcfg.num_tiles):
        survivors = np.flatnonzero(vm[t])
        if survivors.size % M != 0:
            raise InvariantViolation(f"tile {t} survivor count not a multiple of {M}")
        if set(sigma.sigma_i[t].tolist()) != set(survivors.tolist()):
            raise InvariantViolation(f"sigma_i[{t}] disagrees with the vector mask")
        dead = em[rows[t]][:, ~vm[t]]
        if dead.any():
            raise InvariantViolation(f"tile {t} keeps elements inside pruned vectors")
        if survivors.size == 0:
            continue
        groups = sigma.sigma_i[t].reshape(-1, M)
        per_group = em[rows[t]][:, groups].sum(axis=-1)  # (V, G)
        if not np.all(per_group == N):
            raise InvariantViolation(f"tile {t} has a group keeping != {N} elements")
    return vcfg


# ---------------------------------------------------------------------------
# Compressed encoding


@dataclass(frozen=True)
class TileEncoding:
    """One tile of the compressed format.

    vector_index: surviving original column ids in gather order (k of them)
    nm_index:     (V, k*N/M) within-group positions of the kept elements,
                  groups left to right, positions ascending inside a group
    kept_values:  (V, k*N/M) the kept weight values, packed densely
    """

    vector_index: np.ndarray
    nm_index: np.ndarray
    kept_values: np.ndarray


@dataclass(frozen=True)
class HiNMEncoding:
    shape: tuple[int, int]
    config: HiNMConfig
    sigma_o: np.ndarray
    tiles: list[TileEncoding]


def encode(weights, masks: MaskPair, sigma: GyroPermutation, cfg) -> HiNMEncoding:
    """Compress masked weights into vector-index / NM-index form."""
    values = as_values(weights)
    if values.shape != masks.element_mask.shape:
        raise ShapeMismatch(f"weights {values.shape} vs mask {masks.element_mask.shape}")
    vcfg = validate_masks(masks, cfg, sigma)
    V, N, M = vcfg.vector_size, vcfg.nm_keep, vcfg.nm_group
    rows = tile_rows(sigma.sigma_o, V)
    tiles = []
    for t in range(vcfg.num_tiles):
        order = sigma.sigma_i[t]
        if order.size == 0:
            tiles.append(
                TileEncoding(
                    vector_index=np.empty(0, dtype=np.int64),
                    nm_index=np.empty((V, 0), dtype=np.int64),
                    kept_values=np.empty((V, 0)),
                )
            )
            continue
        groups = order.reshape(-1, M)
        tile_mask = masks.element_mask[rows[t]][:, groups]  # (V, G, M)
        # Positions are recovered from the mask itself so the encoding is a
        # faithful image of the mask, not of any particular selection rule.
        pos = np.argsort(~tile_mask, axis=-1, kind="stable")[..., :N]
        pos = np.sort(pos, axis=-1)  # (V, G, N)
        cols = groups[np.arange(groups.shape[0])[:, None], pos]  # (V, G, N)
        vals = values[rows[t][:, None, None], cols]
        tiles.append(
            TileEncoding(
                vector_index=order.copy(),
                nm_index=pos.reshape(V, -1),
                kept_values=vals.reshape(V, -1),
            )
        )
    return HiNMEncoding(
        shape=(vcfg.rows, vcfg.cols),
        config=vcfg.config,
        sigma_o=sigma.sigma_o.copy(),
        tiles=tiles,
    )


def decode(enc: HiNMEncoding, shape: tuple[int, int]) -> np.ndarray:
    """Expand an encoding to a dense matrix with rows in sigma_o order.

    Row p of the result is original output channel ``sigma_o[p]``; columns
    are restored to their original ids.
    """
    m, n = shape
    cfg = enc.config
    V, N, M = cfg.vector_size, cfg.nm_keep, cfg.nm_group
    if enc.shape != (m, n):
        raise ShapeMismatch(f"encoding is for shape {enc.shape}, requested {(m, n)}")
    out = np.zeros((m, n))
    for t, tile in enumerate(enc.tiles):
        if tile.vector_index.size == 0:
            continue
        if tile.vector_index.size % M != 0:
            raise InvariantViolation(f"tile {t} vector index not a multiple of {M}")
        groups = tile.vector_index.reshape(-1, M)
        num_groups = groups.shape[0]
        pos = tile.nm_index.reshape(V, num_groups, N)
        if pos.size and (pos.min() < 0 or pos.max() >= M):
            raise InvariantViolation(f"tile {t} nm_index positions outside [0, {M})")
        cols = groups[np.arange(num_groups)[:, None], pos]  # (V, G, N)
        vals = tile.kept_values.reshape(V, num_groups, N)
        dest_rows = np.arange(t * V, (t + 1) * V)
        out[dest_rows[:, None, None], cols] = vals
    return out


def restore_row_order(permuted: np.ndarray, sigma_o: np.ndarray) -> np.ndarray:
    """Undo a sigma_o row gather: row p goes back to original channel sigma_o[p]."""
    out = np.empty_like(permuted)
    out[np.asarray(sigma_o, dtype=np.int64)] = permuted
    return out


def masked_dense_from_encoding(enc: HiNMEncoding) -> np.ndarray:
    """Decoded matrix with rows restored to original channel order."""
    return restore_row_order(decode(enc, enc.shape), enc.sigma_o)
