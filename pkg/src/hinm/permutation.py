"""Iterative channel permutation: sampling, clustering, assignment.

Output channel permutation (OCP) regroups output channels into tiles so
that vector pruning discards less saliency; tile-wise input channel
permutation (ICP) regroups each tile's surviving column vectors so that
N:M pruning discards less.  Both run the same three-phase iteration:
draw an equal number of members from every partition, cluster the samples
(bypassed for ICP, where one vector is drawn per group), then put the
clusters back with a minimum-cost Hungarian assignment.  An iteration
whose result would retain less saliency than the current arrangement is
rejected, so the per-iteration retention log never decreases.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import partial

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import CapacityError, CountError, GroupingError, ShapeMismatch
from .model import (
    GyroPermutation,
    HiNMConfig,
    MaskPair,
    ValidatedConfig,
    as_values,
    validate_config,
)
from .pruning import (
    _tile_order_and_gains,
    apply_masks,
    nm_prune,
    survivors_per_tile,
    tile_column_scores,
    vector_prune,
    vector_stage_retained,
)

OCP_STRATEGIES = ("sampled", "kmeans_all", "identity")
ICP_STRATEGIES = ("hungarian", "swap", "identity")
ABLATION_VARIANTS = ("full", "v1_no_sampling_kmeans_all", "v2_channel_swap_icp")


@dataclass(frozen=True)
class Partition:
    """Fixed-capacity group of output channels or of column vector ids."""

    axis: str  # "output" or "input"
    members: np.ndarray
    capacity: int

    def __post_init__(self):
        object.__setattr__(self, "members", np.asarray(self.members, dtype=np.int64))


@dataclass
class ScheduleState:
    """Progress of the OCP iteration loop."""

    iteration: int = 0
    samples_per_partition: int = 1
    best_retained: float = 0.0


def retained_saliency(saliency, masks: MaskPair) -> float:
    """Sum of saliency over the kept elements."""
    scores = as_values(saliency)
    if scores.shape != masks.element_mask.shape:
        raise ShapeMismatch(f"saliency {scores.shape} vs mask {masks.element_mask.shape}")
    return float(scores[masks.element_mask].sum())


def sample_channels(partitions, k: int, rng) -> tuple[list[Partition], list[np.ndarray]]:
    """Remove k members uniformly at random from every partition.

    Returns the remainder partitions and the samples grouped by source
    partition (both id-sorted for a canonical representation).
    """
    remainders, samples = [], []
    for part in partitions:
        members = np.asarray(part.members, dtype=np.int64)
        if k > members.size:
            raise CapacityError(
                f"cannot sample {k} from a partition of {members.size} members"
            )
        picked = rng.choice(members.size, size=k, replace=False)
        mask = np.zeros(members.size, dtype=bool)
        mask[picked] = True
        samples.append(np.sort(members[mask]))
        remainders.append(replace(part, members=np.sort(members[~mask])))
    return remainders, samples


# ---------------------------------------------------------------------------
# Balanced k-means


def _kmeans_pp_init(points: np.ndarray, k: int, rng) -> np.ndarray:
    chosen = [int(rng.integers(points.shape[0]))]
    d2 = ((points - points[chosen[0]]) ** 2).sum(axis=1)
    while len(chosen) < k:
        total = d2.sum()
        if total > 0:
            nxt = int(rng.choice(points.shape[0], p=d2 / total))
        else:
            # All remaining points coincide with a centroid; any unused
            # point keeps the centroid count right.
            unused = [i for i in range(points.shape[0]) if i not in chosen]
            nxt = int(unused[int(rng.integers(len(unused)))])
        chosen.append(nxt)
        d2 = np.minimum(d2, ((points - points[nxt]) ** 2).sum(axis=1))
    return points[chosen].astype(np.float64).copy()


def _balanced_assign(points: np.ndarray, centroids: np.ndarray, cap: int) -> np.ndarray:
    """Capacity-limited nearest-centroid assignment.

    Points are placed in order of preference margin (gap between their
    best and second-best centroid), strongest preference first, each into
    its nearest centroid that still has room.
    """
    d2 = ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=-1)
    pref = np.argsort(d2, axis=1, kind="stable")
    sorted_d = np.take_along_axis(d2, pref, axis=1)
    if centroids.shape[0] > 1:
        margin = sorted_d[:, 1] - sorted_d[:, 0]
    else:
        margin = np.zeros(points.shape[0])
    order = np.argsort(-margin, kind="stable")
    counts = np.zeros(centroids.shape[0], dtype=np.int64)
    assign = np.full(points.shape[0], -1, dtype=np.int64)
    for p in order:
        for c in pref[p]:
            if counts[c] < cap:
                assign[p] = c
                counts[c] += 1
                break
    return assign


def _kmeans_objective(points: np.ndarray, assign: np.ndarray, k: int) -> float:
    obj = 0.0
    for c in range(k):
        members = points[assign == c]
        centroid = members.mean(axis=0)
        obj += float(((members - centroid) ** 2).sum())
    return obj


def balanced_kmeans(
    features,
    num_clusters: int,
    cluster_size: int,
    rng,
    n_init: int = 10,
    max_rounds: int = 100,
) -> list[np.ndarray]:
    """Cluster into equal-size groups, minimizing within-cluster spread.

    Runs seeded k-means++ restarts with capacity-limited Lloyd rounds and
    keeps the assignment with the smallest total squared distance to the
    cluster means.  Returns index arrays (ascending inside each cluster).
    """
    points = np.asarray(features, dtype=np.float64)
    if points.ndim == 1:
        points = points[:, None]
    if points.shape[0] != num_clusters * cluster_size:
        raise CountError(
            f"{points.shape[0]} samples cannot fill {num_clusters} clusters of {cluster_size}"
        )
    if num_clusters == 1:
        return [np.arange(points.shape[0], dtype=np.int64)]

    best_assign = None
    best_obj = np.inf
    for _ in range(max(1, n_init)):
        centroids = _kmeans_pp_init(points, num_clusters, rng)
        assign = None
        for _ in range(max_rounds):
            new_assign = _balanced_assign(points, centroids, cluster_size)
            if assign is not None and np.array_equal(new_assign, assign):
                break
            assign = new_assign
            for c in range(num_clusters):
                centroids[c] = points[assign == c].mean(axis=0)
        obj = _kmeans_objective(points, assign, num_clusters)
        if obj < best_obj:
            best_obj = obj
            best_assign = assign
    return [np.flatnonzero(best_assign == c) for c in range(num_clusters)]


# ---------------------------------------------------------------------------
# Assignment


def hungarian(costs) -> np.ndarray:
    """Minimum-cost perfect matching on a square cost matrix.

    Returns ``assignment`` with ``assignment[i]`` the candidate given to
    partition i.  Among cost-optimal matchings the lexicographically
    smallest assignment vector is returned, fixed row by row.
    """
    C = np.asarray(costs, dtype=np.float64)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise ValueError(f"cost matrix must be square, got {C.shape}")
    if C.size and not np.all(np.isfinite(C)):
        raise ValueError("cost matrix contains non-finite entries")
    n = C.shape[0]
    if n == 0:
        return np.empty(0, dtype=np.int64)
    rows, cols = linear_sum_assignment(C)
    opt = float(C[rows, cols].sum())
    tol = 1e-9 * max(1.0, float(np.abs(C).sum()))

    assignment = np.empty(n, dtype=np.int64)
    remaining = list(range(n))
    prefix = 0.0
    for i in range(n):
        for j in remaining:  # ascending: remaining stays sorted
            rest = [c for c in remaining if c != j]
            if i + 1 < n:
                sub = C[np.ix_(range(i + 1, n), rest)]
                r, s = linear_sum_assignment(sub)
                completion = float(sub[r, s].sum())
            else:
                completion = 0.0
            if prefix + C[i, j] + completion <= opt + tol:
                assignment[i] = j
                prefix += float(C[i, j])
                remaining.remove(j)
                break
    return assignment


def _local_vector_cost(union_cols: np.ndarray, keep: int, group: int) -> float:
    """Saliency pruned when one isolated tile keeps its top ``keep`` columns."""
    col = union_cols.sum(axis=0)
    order = np.lexsort((np.arange(col.size), -col))
    return float(col.sum() - col[order[:keep]].sum())


def assignment_cost(remainder, candidate, cfg, axis: str) -> float:
    """Saliency pruned if ``candidate`` completes the partition remainder.

    axis "output": blocks are saliency rows; the union forms one tile and
    pays its column-wise vector pruning loss.  axis "input": blocks are
    per-row values of column vectors; the union forms one group of M and
    pays the per-row N-of-M selection loss.  The identity reassignment is
    always available, costing exactly the partition's pre-sampling loss.
    """
    rem = np.atleast_2d(np.asarray(remainder, dtype=np.float64))
    cand = np.atleast_2d(np.asarray(candidate, dtype=np.float64))
    if axis == "input":
        union = np.concatenate([rem, cand], axis=1)
        if union.shape[1] != cfg.nm_group:
            raise CapacityError(
                f"input union has {union.shape[1]} vectors, capacity is {cfg.nm_group}"
            )
        kept = np.sort(union, axis=1)[:, -cfg.nm_keep :].sum()
        return float(union.sum() - kept)
    if axis == "output":
        union = np.concatenate([rem, cand], axis=0)
        if union.shape[0] != cfg.vector_size:
            raise CapacityError(
                f"output union has {union.shape[0]} channels, capacity is {cfg.vector_size}"
            )
        vcfg = cfg if isinstance(cfg, ValidatedConfig) else None
        keep = (
            vcfg.tile_keep
            if vcfg is not None
            else validate_config(cfg, union.shape).tile_keep
        )
        return _local_vector_cost(union, keep, cfg.nm_group)
    raise ValueError(f"unknown axis {axis!r}")


# ---------------------------------------------------------------------------
# Output channel permutation


def _partitions_from_sigma(sigma_o: np.ndarray, V: int) -> list[Partition]:
    return [
        Partition(axis="output", members=np.sort(chunk), capacity=V)
        for chunk in np.asarray(sigma_o, dtype=np.int64).reshape(-1, V)
    ]


def _sigma_from_partitions(partitions) -> np.ndarray:
    return np.concatenate([np.sort(p.members) for p in partitions])


def _ocp_cost_matrix(scores, remainders, clusters, vcfg: ValidatedConfig) -> np.ndarray:
    """Global-configuration assignment costs for the output axis.

    C[i][j] is the saliency pruned by the whole target pattern when
    cluster j completes partition i while every other partition stands at
    its remainder; channels in the clusters left unassigned count as
    pruned.  Unlike a per-tile cost this sees the benefit of concentrating
    saliency into few tiles, which is what the global vector budget
    rewards.
    """
    M = vcfg.nm_group
    k_groups = vcfg.total_keep // M
    total_all = float(scores.sum())
    rem_rows = [p.members for p in remainders]
    rem_scores = tile_column_scores(scores, rem_rows)
    _, rem_gains = _tile_order_and_gains(rem_scores, M)
    cluster_scores = tile_column_scores(scores, clusters)
    num = len(remainders)
    C = np.empty((num, num))
    for i in range(num):
        others = np.delete(rem_gains, i, axis=0).ravel()
        for j in range(num):
            union_cols = rem_scores[i] + cluster_scores[j]
            _, union_gains = _tile_order_and_gains(union_cols[None, :], M)
            flat = np.concatenate([others, union_gains.ravel()])
            if k_groups >= flat.size:
                retained = float(flat.sum())
            elif k_groups <= 0:
                retained = 0.0
            else:
                retained = float(np.partition(flat, flat.size - k_groups)[flat.size - k_groups :].sum())
            C[i, j] = total_all - retained
    return C


def ocp_iterate(saliency, sigma_o, cfg, state: ScheduleState, rng):
    """One sampling / clustering / assignment round on the output channels.

    Applies the Hungarian matching only if the hypothetical vector-pruning
    retention does not drop below the pre-iteration value; otherwise the
    order is left unchanged (the identity arrangement is always feasible,
    but the clusters on offer may all be worse than it).
    """
    scores = as_values(saliency)
    vcfg = cfg if isinstance(cfg, ValidatedConfig) else validate_config(cfg, scores.shape)
    V, M = vcfg.vector_size, vcfg.nm_group
    partitions = _partitions_from_sigma(sigma_o, V)
    k = state.samples_per_partition

    current = vector_stage_retained(
        scores, [p.members for p in partitions], vcfg.total_keep, M
    )
    remainders, samples = sample_channels(partitions, k, rng)
    pool = np.concatenate(samples)
    if len(partitions) == 1:
        clusters = [np.sort(pool)]
    else:
        groups = balanced_kmeans(scores[pool], len(partitions), k, rng)
        clusters = [np.sort(pool[g]) for g in groups]
    costs = _ocp_cost_matrix(scores, remainders, clusters, vcfg)
    assign = hungarian(costs)
    candidate = [
        replace(p, members=np.sort(np.concatenate([p.members, clusters[assign[i]]])))
        for i, p in enumerate(remainders)
    ]
    proposed = vector_stage_retained(
        scores, [p.members for p in candidate], vcfg.total_keep, M
    )
    if proposed >= current:
        partitions = candidate
        current = proposed
    new_state = ScheduleState(
        iteration=state.iteration + 1,
        samples_per_partition=k,
        best_retained=max(state.best_retained, current),
    )
    return _sigma_from_partitions(partitions), new_state


# ---------------------------------------------------------------------------
# Tile-wise input channel permutation


def _icp_retained(tile_vals: np.ndarray, groups, keep: int) -> float:
    total = 0.0
    for g in groups:
        total += float(np.sort(tile_vals[:, g], axis=1)[:, -keep:].sum())
    return total


def icp_tile(tile_scores, survivors, cfg, rng):
    """Regroup one tile's surviving vectors to maximize N:M retention.

    Partitions are the current groups of M vectors; one vector is drawn
    per partition (clustering is unnecessary at that sample count) and the
    Hungarian matching is applied while it strictly improves retention.
    Stops at the first non-improving iteration or at the iteration budget.
    Returns the surviving column ids in their new order plus the retention
    log.
    """
    scores = np.asarray(tile_scores, dtype=np.float64)
    survivors = np.asarray(survivors, dtype=np.int64)
    N, M = cfg.nm_keep, cfg.nm_group
    if survivors.size % M != 0:
        raise GroupingError(f"{survivors.size} survivors, not a multiple of {M}")
    vals = scores[:, survivors]
    num_groups = survivors.size // M
    groups = [list(range(g * M, (g + 1) * M)) for g in range(num_groups)]
    current = _icp_retained(vals, groups, N)
    log = [current]
    if num_groups <= 1:
        return survivors.copy(), log

    for _ in range(cfg.icp_max_iters):
        rem, samp = [], []
        for g in groups:
            pick = int(rng.integers(len(g)))
            samp.append(g[pick])
            rem.append([x for q, x in enumerate(g) if q != pick])
        costs = np.empty((num_groups, num_groups))
        for i in range(num_groups):
            base = vals[:, rem[i]]
            base_total = float(base.sum())
            for j in range(num_groups):
                union = np.concatenate([base, vals[:, [samp[j]]]], axis=1)
                kept = float(np.sort(union, axis=1)[:, -N:].sum())
                costs[i, j] = base_total + float(vals[:, samp[j]].sum()) - kept
        assign = hungarian(costs)
        candidate = [sorted(rem[i] + [samp[assign[i]]]) for i in range(num_groups)]
        proposed = _icp_retained(vals, candidate, N)
        if proposed > current:
            groups = candidate
            current = proposed
            log.append(current)
        else:
            log.append(current)
            break
    order = np.concatenate([np.asarray(g, dtype=np.int64) for g in groups])
    return survivors[order], log


def _icp_swap(tile_scores, survivors, cfg):
    """Greedy pairwise vector swapping across groups (ablation variant).

    Sweeps all cross-group vector pairs, applying any strictly improving
    swap, until a sweep changes nothing or the pass budget runs out.
    """
    scores = np.asarray(tile_scores, dtype=np.float64)
    survivors = np.asarray(survivors, dtype=np.int64)
    N, M = cfg.nm_keep, cfg.nm_group
    if survivors.size % M != 0:
        raise GroupingError(f"{survivors.size} survivors, not a multiple of {M}")
    vals = scores[:, survivors]
    num_groups = survivors.size // M
    groups = [list(range(g * M, (g + 1) * M)) for g in range(num_groups)]
    current = _icp_retained(vals, groups, N)
    log = [current]
    if num_groups <= 1:
        return survivors.copy(), log
    for _ in range(max(1, cfg.icp_max_iters)):
        improved = False
        for g1 in range(num_groups):
            for g2 in range(g1 + 1, num_groups):
                for a in range(M):
                    for b in range(M):
                        pair_now = _icp_retained(vals, [groups[g1], groups[g2]], N)
                        cand1 = groups[g1].copy()
                        cand2 = groups[g2].copy()
                        cand1[a], cand2[b] = cand2[b], cand1[a]
                        pair_new = _icp_retained(vals, [cand1, cand2], N)
                        if pair_new > pair_now:
                            groups[g1] = sorted(cand1)
                            groups[g2] = sorted(cand2)
                            current += pair_new - pair_now
                            improved = True
        log.append(_icp_retained(vals, groups, N))
        if not improved:
            break
    order = np.concatenate([np.asarray(g, dtype=np.int64) for g in groups])
    return survivors[order], log


# ---------------------------------------------------------------------------
# Full pipeline


@dataclass
class PruneReport:
    """Everything a pruning run decided, plus its retention accounting."""

    shape: tuple[int, int]
    config: HiNMConfig
    total_saliency: float
    retained_saliency: float
    vector_retained: float
    no_perm_retained: float
    no_perm_vector_retained: float
    vector_zeros: int
    total_zeros: int
    per_tile_survivors: list[list[int]]
    ocp_log: list[float]
    icp_logs: list[list[float]]
    fallback_used: bool = False

    def to_dict(self) -> dict:
        from .io import config_to_dict

        return {
            "shape": list(self.shape),
            "config": config_to_dict(self.config),
            "total_saliency": self.total_saliency,
            "retained_saliency": self.retained_saliency,
            "vector_retained": self.vector_retained,
            "no_perm_retained": self.no_perm_retained,
            "no_perm_vector_retained": self.no_perm_vector_retained,
            "vector_zeros": self.vector_zeros,
            "total_zeros": self.total_zeros,
            "per_tile_survivors": self.per_tile_survivors,
            "ocp_log": self.ocp_log,
            "icp_logs": self.icp_logs,
            "fallback_used": self.fallback_used,
        }


def _run_mask_pipeline(scores, vcfg, sigma_o, tile_rngs, icp_strategy):
    V = vcfg.vector_size
    vector_mask = vector_prune(scores, vcfg, sigma_o)
    survivors = survivors_per_tile(vector_mask)
    rows = np.asarray(sigma_o, dtype=np.int64).reshape(-1, V)
    orders, logs = [], []
    for t in range(vcfg.num_tiles):
        ids = survivors[t]
        groups = ids.size // vcfg.nm_group if ids.size else 0
        if icp_strategy == "identity" or vcfg.icp_max_iters == 0 or groups <= 1:
            base = _icp_retained(
                scores[rows[t]][:, ids],
                [list(range(g * vcfg.nm_group, (g + 1) * vcfg.nm_group)) for g in range(groups)],
                vcfg.nm_keep,
            ) if ids.size else 0.0
            orders.append(ids.copy())
            logs.append([base])
        elif icp_strategy == "swap":
            order, log = _icp_swap(scores[rows[t]], ids, vcfg)
            orders.append(order)
            logs.append(log)
        else:
            order, log = icp_tile(scores[rows[t]], ids, vcfg, tile_rngs[t])
            orders.append(order)
            logs.append(log)
    sigma = GyroPermutation(sigma_o=np.asarray(sigma_o, dtype=np.int64), sigma_i=tuple(orders))
    element_mask = nm_prune(scores, vector_mask, vcfg, sigma)
    return sigma, MaskPair(vector_mask=vector_mask, element_mask=element_mask), logs


def gyro_permute(
    matrix,
    cfg,
    saliency=None,
    ocp_strategy: str = "sampled",
    icp_strategy: str = "hungarian",
):
    """Run the full permutation-aware pruning pipeline.

    Order of operations: output channel permutation to convergence or
    budget, column-wise vector pruning under the resulting order, per-tile
    input channel permutation, then N:M pruning.  Returns the permutation,
    the mask pair, and a report with the per-iteration retention logs.

    If the permuted result would retain less element-level saliency than
    the unpermuted pipeline, the unpermuted result is returned instead and
    flagged in the report, so permutation never loses to no permutation.
    """
    if ocp_strategy not in OCP_STRATEGIES:
        raise ValueError(f"unknown OCP strategy {ocp_strategy!r}")
    if icp_strategy not in ICP_STRATEGIES:
        raise ValueError(f"unknown ICP strategy {icp_strategy!r}")
    values = as_values(matrix)
    scores = np.abs(values) if saliency is None else as_values(saliency)
    if scores.shape != values.shape:
        raise ShapeMismatch(f"saliency {scores.shape} vs matrix {values.shape}")
    vcfg = cfg if isinstance(cfg, ValidatedConfig) else validate_config(cfg, scores.shape)
    base_cfg = vcfg.config
    num_tiles, V, M = vcfg.num_tiles, vcfg.vector_size, vcfg.nm_group

    streams = np.random.SeedSequence(base_cfg.seed).spawn(1 + num_tiles)
    ocp_rng = np.random.default_rng(streams[0])
    tile_rngs = [np.random.default_rng(s) for s in streams[1:]]

    identity = np.arange(vcfg.rows, dtype=np.int64)
    id_groups = [p.members for p in _partitions_from_sigma(identity, V)]
    identity_vec = vector_stage_retained(scores, id_groups, vcfg.total_keep, M)

    sigma_o = identity
    ocp_log = [identity_vec]
    if ocp_strategy == "sampled" and base_cfg.ocp_max_iters > 0:
        state = ScheduleState(best_retained=identity_vec)
        for it in range(base_cfg.ocp_max_iters):
            k = vcfg.schedule[it] if it < len(vcfg.schedule) else vcfg.schedule[-1]
            state.samples_per_partition = k
            sigma_o, state = ocp_iterate(scores, sigma_o, vcfg, state, ocp_rng)
            ocp_log.append(state.best_retained)
    elif ocp_strategy == "kmeans_all" and num_tiles > 1:
        groups = balanced_kmeans(scores, num_tiles, V, ocp_rng)
        sigma_o = np.concatenate([np.sort(g) for g in groups])
        ocp_log.append(
            vector_stage_retained(
                scores, [np.sort(g) for g in groups], vcfg.total_keep, M
            )
        )

    sigma, masks, icp_logs = _run_mask_pipeline(scores, vcfg, sigma_o, tile_rngs, icp_strategy)
    element_retained = retained_saliency(scores, masks)
    vec_retained = vector_stage_retained(
        scores, [p.members for p in _partitions_from_sigma(sigma_o, V)], vcfg.total_keep, M
    )

    id_sigma, id_masks, id_logs = _run_mask_pipeline(scores, vcfg, identity, tile_rngs, "identity")
    no_perm_retained = retained_saliency(scores, id_masks)

    # ocp_log documents the search and stays monotone even when the final
    # result falls back to the identity arrangement.
    fallback = element_retained < no_perm_retained
    if fallback:
        sigma, masks, icp_logs = id_sigma, id_masks, id_logs
        element_retained = no_perm_retained
        vec_retained = identity_vec

    vector_zeros = int(
        (vcfg.num_tiles * vcfg.cols - int(masks.vector_mask.sum())) * V
    )
    total_zeros = int(masks.element_mask.size - int(masks.element_mask.sum()))
    report = PruneReport(
        shape=(vcfg.rows, vcfg.cols),
        config=base_cfg,
        total_saliency=float(scores.sum()),
        retained_saliency=element_retained,
        vector_retained=vec_retained,
        no_perm_retained=no_perm_retained,
        no_perm_vector_retained=identity_vec,
        vector_zeros=vector_zeros,
        total_zeros=total_zeros,
        per_tile_survivors=[s.tolist() for s in map(np.sort, sigma.sigma_i)],
        ocp_log=[float(x) for x in ocp_log],
        icp_logs=[[float(x) for x in log] for log in icp_logs],
        fallback_used=bool(fallback),
    )
    return sigma, masks, report


def no_perm_prune(matrix, cfg, saliency=None):
    """Identity-permutation pruning: the pipeline with both searches off."""
    return gyro_permute(matrix, cfg, saliency=saliency, ocp_strategy="identity", icp_strategy="identity")


def ablation_mode(cfg, variant: str):
    """Pipeline factory for the permutation ablation variants.

    ``v1_no_sampling_kmeans_all`` replaces the scheduled sampling with a
    one-shot balanced k-means over all output channels;
    ``v2_channel_swap_icp`` replaces the Hungarian tile reassignment with
    greedy pairwise vector swapping; ``full`` is the unmodified pipeline.
    """
    if variant == "full":
        return partial(gyro_permute, cfg=cfg)
    if variant == "v1_no_sampling_kmeans_all":
        return partial(gyro_permute, cfg=cfg, ocp_strategy="kmeans_all")
    if variant == "v2_channel_swap_icp":
        return partial(gyro_permute, cfg=cfg, icp_strategy="swap")
    raise ValueError(f"unknown ablation variant {variant!r}")
