"""Reference simulator for the tiled sparse matmul data movement.

A tile's surviving input rows are gathered into a buffer by the tile's
vector index (the global-to-shared-memory step); each group of M buffer
rows is then consumed through the per-row NM index (the shared-memory to
compute step).  Tiles are independent, so vector order inside a tile only
changes summation order, and chains of layers can be pre-permuted offline
so no reindexing happens between layers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeMismatch
from .model import GyroPermutation, MaskPair, as_values, validate_config
from .pruning import (
    HiNMEncoding,
    TileEncoding,
    encode,
    restore_row_order,
)


@dataclass(frozen=True)
class TileBuffer:
    """Gathered input rows for one tile, ordered by its vector index."""

    rows: np.ndarray

    @property
    def count(self) -> int:
        return self.rows.shape[0]


@dataclass(frozen=True)
class LayerChain:
    """Encodings in execution order, each pre-permuted on its input axis
    to consume the previous layer's output channel order directly."""

    layers: tuple[HiNMEncoding, ...]

    @property
    def final_sigma_o(self) -> np.ndarray:
        return self.layers[-1].sigma_o


def dense_matmul(weights, inputs) -> np.ndarray:
    """Standard product with a fixed summation order.

    Accumulates over the inner dimension in ascending column-index order,
    so results are bit-reproducible and match a naive triple loop exactly.
    """
    W = as_values(weights)
    X = as_values(inputs)
    if W.shape[1] != X.shape[0]:
        raise ShapeMismatch(f"inner dimensions disagree: {W.shape} x {X.shape}")
    out = np.zeros((W.shape[0], X.shape[1]))
    for j in range(W.shape[1]):
        out += np.outer(W[:, j], X[j])
    return out


def gather_tile_buffer(tile: TileEncoding, inputs: np.ndarray) -> TileBuffer:
    index = tile.vector_index
    if index.size and (index.min() < 0 or index.max() >= inputs.shape[0]):
        raise IndexError(
            f"vector index {int(index.max())} out of range for {inputs.shape[0]} input rows"
        )
    return TileBuffer(rows=inputs[index])


def hinm_spmm(enc: HiNMEncoding, inputs) -> np.ndarray:
    """Multiply an encoded sparse matrix with a dense input matrix.

    Output rows come out in sigma_o order: row p of the result belongs to
    original output channel ``enc.sigma_o[p]``.
    """
    X = as_values(inputs)
    m, n = enc.shape
    if X.shape[0] != n:
        raise ShapeMismatch(f"input has {X.shape[0]} rows, encoding expects {n}")
    cfg = enc.config
    V, N, M = cfg.vector_size, cfg.nm_keep, cfg.nm_group
    out = np.zeros((m, X.shape[1]))
    for t, tile in enumerate(enc.tiles):
        if tile.vector_index.size == 0:
            continue
        buf = gather_tile_buffer(tile, X)
        num_groups = tile.vector_index.size // M
        pos = tile.nm_index.reshape(V, num_groups, N)
        # Buffer row consumed by (group g, slot s) is g*M + position.
        gather = (np.arange(num_groups)[None, :, None] * M + pos).reshape(V, -1)
        vals = tile.kept_values  # (V, G*N)
        for r in range(V):
            out[t * V + r] = vals[r] @ buf.rows[gather[r]]
    return out


def hinm_spmm_original_order(enc: HiNMEncoding, inputs) -> np.ndarray:
    """Same product with output rows restored to original channel order."""
    return restore_row_order(hinm_spmm(enc, inputs), enc.sigma_o)


def relative_error(result: np.ndarray, reference: np.ndarray) -> float:
    """Max absolute difference normalized by the reference magnitude."""
    scale = max(float(np.abs(reference).max(initial=0.0)), 1e-30)
    return float(np.abs(result - reference).max(initial=0.0)) / scale


def kept_triples(enc: HiNMEncoding) -> set[tuple[int, int, float]]:
    """The set of (original row, original column, value) kept by an encoding."""
    cfg = enc.config
    V, N, M = cfg.vector_size, cfg.nm_keep, cfg.nm_group
    triples = set()
    for t, tile in enumerate(enc.tiles):
        if tile.vector_index.size == 0:
            continue
        num_groups = tile.vector_index.size // M
        groups = tile.vector_index.reshape(num_groups, M)
        pos = tile.nm_index.reshape(V, num_groups, N)
        vals = tile.kept_values.reshape(V, num_groups, N)
        for r in range(V):
            orig_row = int(enc.sigma_o[t * V + r])
            for g in range(num_groups):
                for s in range(N):
                    col = int(groups[g, pos[r, g, s]])
                    triples.add((orig_row, col, float(vals[r, g, s])))
    return triples


def shuffle_encoding(enc: HiNMEncoding, rng) -> HiNMEncoding:
    """Randomly reorder each tile's vector index, preserving the kept set.

    Vector order is free at group granularity: whole groups of M may move
    and vectors may move within their group.  The NM index and the packed
    values are rewritten to match, so exactly the same elements stay.
    """
    cfg = enc.config
    V, N, M = cfg.vector_size, cfg.nm_keep, cfg.nm_group
    tiles = []
    for tile in enc.tiles:
        k = tile.vector_index.size
        if k == 0:
            tiles.append(tile)
            continue
        num_groups = k // M
        group_order = rng.permutation(num_groups)
        within = [rng.permutation(M) for _ in range(num_groups)]

        old_groups = tile.vector_index.reshape(num_groups, M)
        new_index = np.empty(k, dtype=np.int64)
        for new_g, old_g in enumerate(group_order):
            # within[new_g][q] is the old slot landing at new slot q.
            new_index[new_g * M : (new_g + 1) * M] = old_groups[old_g][within[new_g]]

        old_pos = tile.nm_index.reshape(V, num_groups, N)
        old_vals = tile.kept_values.reshape(V, num_groups, N)
        new_pos = np.empty_like(old_pos)
        new_vals = np.empty_like(old_vals)
        for new_g, old_g in enumerate(group_order):
            inverse = np.argsort(within[new_g])  # old slot -> new slot
            moved = inverse[old_pos[:, old_g, :]]  # (V, N) new positions
            order = np.argsort(moved, axis=1)
            new_pos[:, new_g, :] = np.take_along_axis(moved, order, axis=1)
            new_vals[:, new_g, :] = np.take_along_axis(old_vals[:, old_g, :], order, axis=1)
        tiles.append(
            TileEncoding(
                vector_index=new_index,
                nm_index=new_pos.reshape(V, -1),
                kept_values=new_vals.reshape(V, -1),
            )
        )
    return HiNMEncoding(shape=enc.shape, config=enc.config, sigma_o=enc.sigma_o, tiles=tiles)


def tile_shuffle_check(enc: HiNMEncoding, inputs, rng, trials: int = 50, tolerance: float = 1e-5) -> dict:
    """Verify that within-tile vector order does not change the product.

    Each trial reshuffles every tile, asserts the kept (row, column, value)
    set is identical, and measures the output difference (only summation
    order may change).  Returns a report dict.
    """
    X = as_values(inputs)
    base = hinm_spmm(enc, X)
    base_triples = kept_triples(enc)
    errors = []
    kept_equal = True
    for _ in range(trials):
        shuffled = shuffle_encoding(enc, rng)
        kept_equal = kept_equal and (kept_triples(shuffled) == base_triples)
        errors.append(relative_error(hinm_spmm(shuffled, X), base))
    max_err = max(errors) if errors else 0.0
    return {
        "trials": trials,
        "kept_sets_equal": bool(kept_equal),
        "max_relative_error": max_err,
        "errors": errors,
        "tolerance": tolerance,
        "passed": bool(kept_equal and max_err <= tolerance),
    }


def build_layer_chain(weight_matrices, cfgs, saliencies=None) -> LayerChain:
    """Prune and encode a stack of layers with offline pre-permutation.

    Layer l's columns are reordered by layer l-1's output channel order
    before pruning, so at run time each layer consumes its predecessor's
    output rows directly.
    """
    from .permutation import gyro_permute

    if not isinstance(cfgs, (list, tuple)):
        cfgs = [cfgs] * len(weight_matrices)
    if saliencies is None:
        saliencies = [None] * len(weight_matrices)
    layers = []
    prev_sigma = None
    for W, cfg, sal in zip(weight_matrices, cfgs, saliencies):
        Wv = as_values(W)
        Sv = None if sal is None else as_values(sal)
        if prev_sigma is not None:
            if Wv.shape[1] != prev_sigma.size:
                raise ShapeMismatch(
                    f"layer expects {Wv.shape[1]} inputs, previous layer emits {prev_sigma.size}"
                )
            Wv = Wv[:, prev_sigma]
            Sv = None if Sv is None else Sv[:, prev_sigma]
        sigma, masks, _ = gyro_permute(Wv, cfg, saliency=Sv)
        layers.append(encode(Wv, masks, sigma, cfg))
        prev_sigma = sigma.sigma_o
    return LayerChain(layers=tuple(layers))


def compose_layers(chain: LayerChain, inputs) -> np.ndarray:
    """Run a chain end to end; the result rows are in the final layer's
    sigma_o order (apply the inverse to compare against an unpermuted
    pipeline)."""
    out = as_values(inputs)
    for enc in chain.layers:
        out = hinm_spmm(enc, out)
    return out
