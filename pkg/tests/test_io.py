import json

import numpy as np
import pytest

from hinm import FormatError, HiNMConfig, InvariantViolation, DenseMatrix
from hinm.io import (
    config_from_dict,
    config_to_dict,
    dump_json,
    load_config,
    read_hnmw,
    write_hnmw,
)


def test_hnmw_roundtrip(tmp_path, rng):
    path = tmp_path / "m.hnmw"
    values = rng.normal(size=(7, 11)).astype(np.float32).astype(np.float64)
    write_hnmw(path, values)
    back = read_hnmw(path)
    assert back.shape == (7, 11)
    assert np.array_equal(back, values)


def test_hnmw_bad_magic(tmp_path):
    path = tmp_path / "bad.hnmw"
    path.write_bytes(b"NOPE" + b"\x00" * 16)
    with pytest.raises(FormatError):
        read_hnmw(path)


def test_hnmw_truncated(tmp_path, rng):
    path = tmp_path / "t.hnmw"
    write_hnmw(path, rng.normal(size=(4, 4)))
    path.write_bytes(path.read_bytes()[:-5])
    with pytest.raises(FormatError):
        read_hnmw(path)


def test_nonfinite_rejected_at_load(tmp_path):
    path = tmp_path / "nan.hnmw"
    bad = np.array([[1.0, np.nan], [0.0, 2.0]])
    write_hnmw(path, bad)
    with pytest.raises(InvariantViolation):
        DenseMatrix(read_hnmw(path))


def test_config_roundtrip(tmp_path):
    cfg = HiNMConfig(
        vector_size=4,
        nm_keep=2,
        nm_group=4,
        vector_sparsity=0.5,
        ocp_sample_schedule=(2, 1, 1),
        seed=7,
    )
    path = tmp_path / "cfg.json"
    with open(path, "w") as fh:
        json.dump(config_to_dict(cfg), fh)
    assert load_config(path) == cfg


def test_config_unknown_key():
    with pytest.raises(ValueError):
        config_from_dict({"vector_size": 4, "nm_keep": 2, "nm_group": 4,
                          "vector_sparsity": 0.5, "bogus": 1})


def test_config_missing_key():
    with pytest.raises(ValueError):
        config_from_dict({"vector_size": 4})


def test_dump_json_deterministic(tmp_path):
    report = {"b": 1 / 3, "a": [0.1 + 0.2, 7], "nested": {"x": np.float64(2.5)}}
    p1, p2 = tmp_path / "r1.json", tmp_path / "r2.json"
    dump_json(report, p1)
    dump_json(report, p2)
    assert p1.read_bytes() == p2.read_bytes()
    loaded = json.loads(p1.read_text())
    assert loaded["b"] == float(f"{1/3:.9g}")
