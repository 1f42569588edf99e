"""STWT weight files: the one serialization format shared by every module.

Layout (all integers little-endian): magic ``STWT``, version u16, tensor
count u32, then per tensor: name length u16, UTF-8 name, rank u8, dims as
u32 each, raw float32 little-endian values.  Round trips are bit-exact.
"""

from __future__ import annotations

import struct

import numpy as np

MAGIC = b"STWT"
VERSION = 1


class WeightFormatError(ValueError):
    """Malformed STWT payload; message carries the failing byte offset."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


def save_weights(path, tensors):
    """Write an ordered name->array mapping; values are stored as float32."""
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<HI", VERSION, len(tensors)))
        for name, arr in tensors.items():
            arr = np.asarray(arr, dtype="<f4")  # ascontiguousarray would 1-d-ify scalars
            encoded = name.encode("utf-8")
            fh.write(struct.pack("<H", len(encoded)))
            fh.write(encoded)
            fh.write(struct.pack("<B", arr.ndim))
            fh.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
            fh.write(arr.tobytes())


def load_weights(path):
    """Read an STWT file back into an ordered name->float32 array mapping."""
    with open(path, "rb") as fh:
        blob = fh.read()
    offset = 0

    def take(count, what):
        nonlocal offset
        if offset + count > len(blob):
            raise WeightFormatError(f"truncated while reading {what}", offset)
        chunk = blob[offset : offset + count]
        offset += count
        return chunk

    if take(4, "magic") != MAGIC:
        raise WeightFormatError("bad magic, not an STWT file", 0)
    version, count = struct.unpack("<HI", take(6, "header"))
    if version != VERSION:
        raise WeightFormatError(f"unsupported version {version}", 4)

    tensors = {}
    for _ in range(count):
        (name_len,) = struct.unpack("<H", take(2, "name length"))
        name = take(name_len, "name").decode("utf-8")
        (rank,) = struct.unpack("<B", take(1, "rank"))
        dims = struct.unpack(f"<{rank}I", take(4 * rank, "dims"))
        size = int(np.prod(dims)) if rank else 1
        raw = take(4 * size, f"values of {name!r}")
        tensors[name] = np.frombuffer(raw, dtype="<f4").reshape(dims).copy()
    if offset != len(blob):
        raise WeightFormatError("trailing bytes after final tensor", offset)
    return tensors
