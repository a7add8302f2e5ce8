"""Hierarchical N:M sparsity: pruning, channel permutation, encoding, and
a reference sparse-matmul simulator."""

from .errors import (
    BudgetError,
    CapacityError,
    CountError,
    DimensionError,
    FormatError,
    GroupingError,
    HiNMError,
    InvariantViolation,
    NegativeScore,
    ShapeMismatch,
    SizeGuard,
)
from .model import (
    DenseMatrix,
    GyroPermutation,
    HiNMConfig,
    MaskPair,
    SaliencyMatrix,
    ValidatedConfig,
    composed_sparsity,
    count_permutation_space,
    default_sample_schedule,
    validate_config,
)
from .oracle import exhaustive_icp, exhaustive_ocp, oracle_gap
from .permutation import (
    Partition,
    PruneReport,
    ScheduleState,
    ablation_mode,
    assignment_cost,
    balanced_kmeans,
    gyro_permute,
    hungarian,
    icp_tile,
    no_perm_prune,
    ocp_iterate,
    retained_saliency,
    sample_channels,
)
from .pruning import (
    HiNMEncoding,
    TileEncoding,
    apply_masks,
    decode,
    encode,
    load_saliency,
    magnitude_saliency,
    nm_prune,
    vector_prune,
)
from .spmm import (
    LayerChain,
    TileBuffer,
    build_layer_chain,
    compose_layers,
    dense_matmul,
    hinm_spmm,
    tile_shuffle_check,
)

__version__ = "0.1.0"

__all__ = [
    "BudgetError",
    "CapacityError",
    "CountError",
    "DenseMatrix",
    "DimensionError",
    "FormatError",
    "GroupingError",
    "GyroPermutation",
    "HiNMConfig",
    "HiNMEncoding",
    "HiNMError",
    "InvariantViolation",
    "LayerChain",
    "MaskPair",
    "NegativeScore",
    "Partition",
    "PruneReport",
    "SaliencyMatrix",
    "ScheduleState",
    "ShapeMismatch",
    "SizeGuard",
    "TileBuffer",
    "TileEncoding",
    "ValidatedConfig",
    "ablation_mode",
    "apply_masks",
    "assignment_cost",
    "balanced_kmeans",
    "build_layer_chain",
    "compose_layers",
    "composed_sparsity",
    "count_permutation_space",
    "decode",
    "default_sample_schedule",
    "dense_matmul",
    "encode",
    "exhaustive_icp",
    "exhaustive_ocp",
    "gyro_permute",
    "hinm_spmm",
    "hungarian",
    "icp_tile",
    "load_saliency",
    "magnitude_saliency",
    "nm_prune",
    "no_perm_prune",
    "ocp_iterate",
    "oracle_gap",
    "retained_saliency",
    "sample_channels",
    "tile_shuffle_check",
    "validate_config",
    "vector_prune",
]
