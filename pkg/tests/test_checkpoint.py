import numpy as np
import pytest

from zeroshot_qg.checkpoint import load_checkpoint, save_checkpoint
from zeroshot_qg.errors import (
    CheckpointError,
    CheckpointIntegrityError,
    CheckpointVersionError,
)


def sample_arrays():
    rng = np.random.default_rng(0)
    return {
        "emb.table": rng.normal(size=(5, 3)),
        "dec.bias": rng.normal(size=7),
        "scalar": np.array(3.5),
    }


def test_round_trip_bitwise(tmp_path):
    path = tmp_path / "model.ckpt"
    arrays = sample_arrays()
    meta = {"config": {"dim": 3, "lr": 0.001}, "vocab": ["<pad>", "a", "b"]}
    save_checkpoint(path, "qg-model", arrays, meta)
    kind, loaded, loaded_meta = load_checkpoint(path)
    assert kind == "qg-model"
    assert loaded_meta == meta
    assert set(loaded) == set(arrays)
    for name in arrays:
        assert loaded[name].tobytes() == np.ascontiguousarray(arrays[name]).tobytes()
        assert loaded[name].shape == np.asarray(arrays[name]).shape


def test_save_is_deterministic(tmp_path):
    arrays = sample_arrays()
    save_checkpoint(tmp_path / "a.ckpt", "k", arrays, {"x": 1})
    save_checkpoint(tmp_path / "b.ckpt", "k", arrays, {"x": 1})
    assert (tmp_path / "a.ckpt").read_bytes() == (tmp_path / "b.ckpt").read_bytes()


def test_corrupted_byte_detected(tmp_path):
    path = tmp_path / "model.ckpt"
    save_checkpoint(path, "k", sample_arrays())
    raw = bytearray(path.read_bytes())
    raw[len(raw) // 2] ^= 0xFF
    path.write_bytes(bytes(raw))
    with pytest.raises(CheckpointIntegrityError):
        load_checkpoint(path)


def test_truncated_file_detected(tmp_path):
    path = tmp_path / "model.ckpt"
    save_checkpoint(path, "k", sample_arrays())
    raw = path.read_bytes()
    path.write_bytes(raw[: len(raw) - 5])
    with pytest.raises(CheckpointIntegrityError):
        load_checkpoint(path)


def test_version_mismatch_is_explicit(tmp_path):
    path = tmp_path / "model.ckpt"
    save_checkpoint(path, "k", sample_arrays())
    raw = bytearray(path.read_bytes())
    raw[4] = 99  # bump the little-endian version field
    # keep checksum consistent so the version error is what fires
    import hashlib
    body = bytes(raw[:-32])
    path.write_bytes(body + hashlib.sha256(body).digest())
    with pytest.raises(CheckpointVersionError):
        load_checkpoint(path)


def test_not_a_checkpoint(tmp_path):
    path = tmp_path / "junk.ckpt"
    path.write_bytes(b"JUNK" + b"\x00" * 64)
    with pytest.raises(CheckpointError):
        load_checkpoint(path)


def test_little_endian_layout_is_fixed(tmp_path):
    # one known value, byte-exact: 1.0 as little-endian f8
    path = tmp_path / "one.ckpt"
    save_checkpoint(path, "k", {"x": np.array([1.0])})
    raw = path.read_bytes()
    assert bytes.fromhex("000000000000f03f") in raw
