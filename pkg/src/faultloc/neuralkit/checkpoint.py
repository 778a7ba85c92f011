"""Binary model checkpoints.

Layout (all integers and floats little-endian)::

    b"SGWM1"
    u32  record count
    record*:
        u16  tag length, tag (ASCII)
        u8   ndim, u64[ndim] shape
        f64[prod(shape)] row-major payload

Tags: ``net:<name>`` opens a network (payload = its layer count),
``layer:<Kind>`` starts a layer (payload = shape arguments), ``param`` is one
trainable tensor of the preceding layer, ``extra:<name>`` is a free array
(e.g. ensemble vote weights).
"""

from __future__ import annotations

import struct

import numpy as np

from .layers import layer_from_record
from .net import Net

MAGIC = b"SGWM1"


def _write_record(fh, tag: str, array) -> None:
    array = np.ascontiguousarray(np.asarray(array, dtype="<f8"))
    raw_tag = tag.encode("ascii")
    fh.write(struct.pack("<H", len(raw_tag)))
    fh.write(raw_tag)
    fh.write(struct.pack("<B", array.ndim))
    fh.write(struct.pack(f"<{array.ndim}Q", *array.shape))
    fh.write(array.tobytes(order="C"))


def _read_exact(fh, n: int) -> bytes:
    data = fh.read(n)
    if len(data) != n:
        raise ValueError("truncated checkpoint")
    return data


def _read_record(fh):
    (tag_len,) = struct.unpack("<H", _read_exact(fh, 2))
    tag = _read_exact(fh, tag_len).decode("ascii")
    (ndim,) = struct.unpack("<B", _read_exact(fh, 1))
    shape = struct.unpack(f"<{ndim}Q", _read_exact(fh, 8 * ndim))
    count = int(np.prod(shape)) if ndim else 1
    payload = np.frombuffer(_read_exact(fh, 8 * count), dtype="<f8").reshape(shape)
    return tag, payload.astype(np.float64)


def _net_records(name: str, net: Net):
    yield f"net:{name}", np.array([len(net.layers)], dtype=np.float64)
    for layer in net.layers:
        yield f"layer:{layer.kind}", np.array(layer.hyper(), dtype=np.float64)
        for p in layer.params:
            yield "param", p


def save(path, nets: dict, extras: dict | None = None) -> None:
    """Write named networks and extra arrays to ``path``."""
    records = []
    for name, net in nets.items():
        records.extend(_net_records(name, net))
    for name, arr in (extras or {}).items():
        records.append((f"extra:{name}", np.asarray(arr, dtype=np.float64)))
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(records)))
        for tag, arr in records:
            _write_record(fh, tag, arr)


def load(path):
    """Return ``(nets, extras)`` dictionaries in file order."""
    with open(path, "rb") as fh:
        if fh.read(len(MAGIC)) != MAGIC:
            raise ValueError(f"{path}: not a checkpoint (bad magic)")
        (count,) = struct.unpack("<I", _read_exact(fh, 4))
        records = [_read_record(fh) for _ in range(count)]
        if fh.read(1):
            raise ValueError(f"{path}: trailing bytes after last record")

    nets, extras = {}, {}
    i = 0
    while i < len(records):
        tag, payload = records[i]
        i += 1
        if tag.startswith("extra:"):
            extras[tag[len("extra:"):]] = payload
            continue
        if not tag.startswith("net:"):
            raise ValueError(f"unexpected record {tag!r}")
        layers = []
        for _ in range(int(payload[0])):
            ltag, hyper = records[i]
            i += 1
            if not ltag.startswith("layer:"):
                raise ValueError(f"expected layer record, got {ltag!r}")
            kind = ltag[len("layer:"):]
            n_params = {"Dense": 2, "Conv1D": 2}.get(kind, 0)
            tensors = [records[i + j][1] for j in range(n_params)]
            if any(records[i + j][0] != "param" for j in range(n_params)):
                raise ValueError(f"missing parameters for {kind} layer")
            i += n_params
            layers.append(layer_from_record(kind, hyper, tensors))
        nets[tag[len("net:"):]] = Net(layers)
    return nets, extras
