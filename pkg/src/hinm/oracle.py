"""Exhaustive brute-force searchers over the grouping spaces.

Ground truth for the permutation heuristics at tiny scale.  Retention
depends only on group membership, never on ordering, so enumeration runs
over unordered balanced groupings; the count m! / (V!^P * P!) is guarded.
"""

from __future__ import annotations

import math
from itertools import combinations

import numpy as np

from .errors import SizeGuard
from .model import as_values, validate_config
from .pruning import vector_stage_retained

GROUPING_LIMIT = 10**6


def balanced_grouping_count(items: int, group_size: int) -> int:
    """Number of ways to split ``items`` into unordered groups of equal size."""
    if items % group_size != 0:
        raise ValueError(f"{items} items cannot form groups of {group_size}")
    num_groups = items // group_size
    return math.factorial(items) // (
        math.factorial(group_size) ** num_groups * math.factorial(num_groups)
    )


def check_grouping_guard(items: int, group_size: int, limit: int = GROUPING_LIMIT) -> int:
    count = balanced_grouping_count(items, group_size)
    if count > limit:
        raise SizeGuard(
            f"{count} balanced groupings exceed the enumeration bound of {limit}"
        )
    return count


def iter_balanced_groupings(ids, group_size: int):
    """Yield every unordered partition of ``ids`` into equal groups.

    Canonical form: each group is anchored at the smallest id not yet
    placed, so no partition appears twice.
    """
    ids = list(ids)
    if not ids:
        yield []
        return
    anchor, rest = ids[0], ids[1:]
    for tail in combinations(rest, group_size - 1):
        group = [anchor, *tail]
        remaining = [x for x in rest if x not in set(tail)]
        for sub in iter_balanced_groupings(remaining, group_size):
            yield [group, *sub]


def exhaustive_ocp(saliency, cfg, limit: int = GROUPING_LIMIT):
    """Best vector-pruning retention over all balanced channel groupings.

    Returns (optimal retained saliency, witnessing grouping).
    """
    scores = as_values(saliency)
    vcfg = validate_config(cfg, scores.shape) if not hasattr(cfg, "total_keep") else cfg
    check_grouping_guard(vcfg.rows, vcfg.vector_size, limit)
    best = -np.inf
    witness = None
    for grouping in iter_balanced_groupings(range(vcfg.rows), vcfg.vector_size):
        retained = vector_stage_retained(
            scores,
            [np.asarray(g, dtype=np.int64) for g in grouping],
            vcfg.total_keep,
            vcfg.nm_group,
        )
        if retained > best:
            best = retained
            witness = grouping
    return float(best), witness


def exhaustive_icp(tile_scores, survivors, cfg, limit: int = GROUPING_LIMIT):
    """Best per-tile N:M retention over all balanced vector groupings.

    ``tile_scores`` holds the tile's saliency rows; ``survivors`` the
    column ids to regroup.  Returns (optimal retained, witnessing grouping
    of column ids).
    """
    scores = np.asarray(tile_scores, dtype=np.float64)
    survivors = np.asarray(survivors, dtype=np.int64)
    N, M = cfg.nm_keep, cfg.nm_group
    if survivors.size % M != 0:
        raise ValueError(f"{survivors.size} survivors, not a multiple of {M}")
    check_grouping_guard(survivors.size, M, limit)
    vals = scores[:, survivors]
    best = -np.inf
    witness = None
    for grouping in iter_balanced_groupings(range(survivors.size), M):
        retained = 0.0
        for group in grouping:
            retained += float(np.sort(vals[:, group], axis=1)[:, -N:].sum())
        if retained > best:
            best = retained
            witness = [survivors[list(g)].tolist() for g in grouping]
    return float(best), witness


def oracle_gap(matrix, cfg, saliency=None, limit: int = GROUPING_LIMIT) -> dict:
    """Compare the permutation search against the exhaustive optimum.

    All three retention figures measure the vector-pruning stage, the
    objective the output channel search optimizes, so
    oracle >= permuted >= unpermuted holds on every instance.  The gap is
    (oracle - permuted) / (oracle - unpermuted), 0 when the oracle cannot
    beat the unpermuted arrangement.
    """
    from .permutation import gyro_permute

    values = as_values(matrix)
    scores = np.abs(values) if saliency is None else as_values(saliency)
    vcfg = validate_config(cfg, scores.shape)
    check_grouping_guard(vcfg.rows, vcfg.vector_size, limit)

    oracle_value, witness = exhaustive_ocp(scores, vcfg, limit)
    _, _, report = gyro_permute(values, cfg, saliency=saliency)
    no_perm = report.no_perm_vector_retained
    permuted = report.vector_retained
    if oracle_value > no_perm:
        gap = (oracle_value - permuted) / (oracle_value - no_perm)
    else:
        gap = 0.0
    return {
        "shape": list(report.shape),
        "no_perm": float(no_perm),
        "gyro": float(permuted),
        "oracle": float(oracle_value),
        "gap": float(gap),
        "oracle_grouping": witness,
        "element_retained": float(report.retained_saliency),
        "element_no_perm": float(report.no_perm_retained),
    }
