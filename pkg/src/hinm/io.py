"""File formats: HNMW binary matrices, config JSON, encoding JSON, reports.

HNMW layout: magic ``HNMW``, u32 little-endian version (=1), u32 rows,
u32 cols, then rows*cols IEEE-754 binary32 values, little-endian,
row-major.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .errors import FormatError, InvariantViolation
from .model import HiNMConfig, as_values

_MAGIC = b"HNMW"
_VERSION = 1
_HEADER = struct.Struct("<4sIII")


def write_hnmw(path, matrix) -> None:
    values = as_values(matrix)
    if values.ndim != 2:
        raise FormatError(f"HNMW stores 2-D matrices, got shape {values.shape}")
    rows, cols = values.shape
    payload = np.ascontiguousarray(values, dtype="<f4").tobytes()
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, _VERSION, rows, cols))
        fh.write(payload)


def read_hnmw(path) -> np.ndarray:
    """Read an HNMW file into a float64 array; values stay exactly binary32."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise FormatError(f"{path}: truncated header")
    magic, version, rows, cols = _HEADER.unpack_from(raw)
    if magic != _MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != _VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    expected = _HEADER.size + 4 * rows * cols
    if len(raw) != expected:
        raise FormatError(f"{path}: expected {expected} bytes, found {len(raw)}")
    data = np.frombuffer(raw, dtype="<f4", offset=_HEADER.size)
    return data.reshape(rows, cols).astype(np.float64)


# ---------------------------------------------------------------------------
# Config JSON

_CONFIG_KEYS = {
    "vector_size",
    "nm_keep",
    "nm_group",
    "vector_sparsity",
    "tile_rows",
    "ocp_sample_schedule",
    "ocp_max_iters",
    "icp_max_iters",
    "seed",
    "tie_break",
}


def config_from_dict(data: dict) -> HiNMConfig:
    unknown = set(data) - _CONFIG_KEYS
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    for required in ("vector_size", "nm_keep", "nm_group", "vector_sparsity"):
        if required not in data:
            raise ValueError(f"config is missing required key {required!r}")
    kwargs = dict(data)
    if kwargs.get("ocp_sample_schedule") is not None:
        kwargs["ocp_sample_schedule"] = tuple(kwargs["ocp_sample_schedule"])
    return HiNMConfig(**kwargs)


def load_config(path) -> HiNMConfig:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError(f"{path}: config JSON must be an object")
    return config_from_dict(data)


def config_to_dict(cfg: HiNMConfig) -> dict:
    return {
        "vector_size": cfg.vector_size,
        "nm_keep": cfg.nm_keep,
        "nm_group": cfg.nm_group,
        "vector_sparsity": cfg.vector_sparsity,
        "tile_rows": cfg.tile_rows,
        "ocp_sample_schedule": list(cfg.ocp_sample_schedule)
        if cfg.ocp_sample_schedule is not None
        else None,
        "ocp_max_iters": cfg.ocp_max_iters,
        "icp_max_iters": cfg.icp_max_iters,
        "seed": cfg.seed,
        "tie_break": cfg.tie_break,
    }


# ---------------------------------------------------------------------------
# Deterministic JSON reports

def _round_floats(obj, sig: int):
    if isinstance(obj, float):
        return float(f"{obj:.{sig}g}")
    if isinstance(obj, dict):
        return {k: _round_floats(v, sig) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v, sig) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(f"{float(obj):.{sig}g}")
    if isinstance(obj, np.ndarray):
        return _round_floats(obj.tolist(), sig)
    return obj


def dump_json(obj, path, sig: int = 9) -> None:
    """Write JSON with floats at 9 significant digits and sorted keys.

    Re-running a deterministic pipeline therefore reproduces the file
    byte for byte.
    """
    canonical = _round_floats(obj, sig)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(canonical, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_json(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


# ---------------------------------------------------------------------------
# Encoding JSON (defined here to keep every on-disk schema in one module;
# the dataclasses live in hinm.pruning)

def encoding_to_dict(enc) -> dict:
    return {
        "rows": enc.shape[0],
        "cols": enc.shape[1],
        "config": config_to_dict(enc.config),
        "sigma_o": enc.sigma_o.tolist(),
        "tiles": [
            {
                "vector_index": tile.vector_index.tolist(),
                "nm_index": tile.nm_index.tolist(),
                "kept_values": tile.kept_values.tolist(),
            }
            for tile in enc.tiles
        ],
    }


def save_encoding(enc, path) -> None:
    # Kept values are binary32 payloads on every other surface (HNMW); the
    # JSON uses repr floats, which round-trips float64 exactly.
    canonical = encoding_to_dict(enc)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(canonical, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_encoding(path):
    from .pruning import HiNMEncoding, TileEncoding

    data = load_json(path)
    try:
        cfg = config_from_dict(data["config"])
        tiles = [
            TileEncoding(
                vector_index=np.asarray(t["vector_index"], dtype=np.int64),
                nm_index=np.asarray(t["nm_index"], dtype=np.int64),
                kept_values=np.asarray(t["kept_values"], dtype=np.float64),
            )
            for t in data["tiles"]
        ]
        enc = HiNMEncoding(
            shape=(int(data["rows"]), int(data["cols"])),
            config=cfg,
            sigma_o=np.asarray(data["sigma_o"], dtype=np.int64),
            tiles=tiles,
        )
    except KeyError as exc:
        raise InvariantViolation(f"{path}: encoding JSON missing key {exc}") from exc
    return enc


def permutation_to_dict(sigma) -> dict:
    return {
        "sigma_o": sigma.sigma_o.tolist(),
        "sigma_i": [order.tolist() for order in sigma.sigma_i],
    }


def load_permutation(path):
    from .model import GyroPermutation

    data = load_json(path)
    return GyroPermutation(
        sigma_o=np.asarray(data["sigma_o"], dtype=np.int64),
        sigma_i=tuple(np.asarray(o, dtype=np.int64) for o in data["sigma_i"]),
    )


def load_chain_manifest(path) -> list[str]:
    data = load_json(path)
    if not isinstance(data, dict) or "layers" not in data:
        raise ValueError(f"{path}: chain manifest must be an object with a 'layers' list")
    base = Path(path).parent
    return [str((base / layer).resolve()) for layer in data["layers"]]
