"""Versioned binary checkpoint container.

Layout: magic, format version (u32 LE), header length (u64 LE), a JSON
header ({kind, meta, array index}), the arrays as raw little-endian
float64 C-order bytes in header order, and a trailing SHA-256 over
everything before it. Save/load round-trips are byte-exact; any flipped
byte fails the checksum.
"""

import hashlib
import json
import struct
from pathlib import Path

import numpy as np

from .errors import CheckpointError, CheckpointIntegrityError, CheckpointVersionError

MAGIC = b"ZQGC"
FORMAT_VERSION = 1
_DIGEST_SIZE = 32


def save_checkpoint(path, kind, arrays, meta=None):
    """Write named float64 arrays plus JSON-serializable metadata."""
    items = []
    for name in sorted(arrays):
        # asarray, not ascontiguousarray: the latter promotes 0-d to 1-d
        arr = np.asarray(arrays[name], dtype=np.float64)
        items.append((name, arr))
    header = {
        "kind": kind,
        "meta": meta if meta is not None else {},
        "arrays": [{"name": name, "shape": list(arr.shape)} for name, arr in items],
    }
    header_bytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")

    digest = hashlib.sha256()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        for chunk in (MAGIC, struct.pack("<I", FORMAT_VERSION),
                      struct.pack("<Q", len(header_bytes)), header_bytes):
            fh.write(chunk)
            digest.update(chunk)
        for _, arr in items:
            data = arr.astype("<f8", copy=False).tobytes(order="C")
            fh.write(data)
            digest.update(data)
        fh.write(digest.digest())
    return path


def load_checkpoint(path):
    """Read a checkpoint; returns (kind, arrays, meta).

    Raises CheckpointVersionError on unknown format versions and
    CheckpointIntegrityError on truncation or checksum mismatch.
    """
    raw = Path(path).read_bytes()
    if len(raw) < len(MAGIC) + 12 + _DIGEST_SIZE:
        raise CheckpointIntegrityError(f"{path}: file too short to be a checkpoint")
    if raw[:4] != MAGIC:
        raise CheckpointError(f"{path}: not a checkpoint file (bad magic)")
    version = struct.unpack("<I", raw[4:8])[0]
    if version != FORMAT_VERSION:
        raise CheckpointVersionError(
            f"{path}: format version {version} unsupported (expected {FORMAT_VERSION})")

    body, stored_digest = raw[:-_DIGEST_SIZE], raw[-_DIGEST_SIZE:]
    if hashlib.sha256(body).digest() != stored_digest:
        raise CheckpointIntegrityError(f"{path}: checksum mismatch (corrupt or truncated)")

    header_len = struct.unpack("<Q", raw[8:16])[0]
    header_end = 16 + header_len
    if header_end > len(body):
        raise CheckpointIntegrityError(f"{path}: header length exceeds file size")
    try:
        header = json.loads(body[16:header_end].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointIntegrityError(f"{path}: unreadable header ({exc})") from exc

    arrays = {}
    offset = header_end
    for entry in header["arrays"]:
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        nbytes = count * 8
        if offset + nbytes > len(body):
            raise CheckpointIntegrityError(f"{path}: array payload truncated")
        arrays[entry["name"]] = np.frombuffer(
            body, dtype="<f8", count=count, offset=offset).reshape(shape).copy()
        offset += nbytes
    if offset != len(body):
        raise CheckpointIntegrityError(f"{path}: trailing bytes after arrays")
    return header["kind"], arrays, header["meta"]
