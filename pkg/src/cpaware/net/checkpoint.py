"""Binary model checkpoints, bit-exact across save/load.

Layout (all integers little-endian):

    magic "CPA1" | version u8 | config_len u32 | config JSON (utf-8)
    | extras_len u32 | extras JSON | n_tensors u32 | tensor records

    tensor record: name_len u16 | name utf-8 | dtype u8 | ndim u8
                   | dims u32 * ndim | raw little-endian data

The tensor set covers trainable parameters (``param/``), optimizer
moments (``adam_m/``, ``adam_v/``) and batch-norm running statistics
(``state/``); the optimizer step counter travels in the extras JSON.
Reloading therefore resumes training exactly where it stopped.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .model import MultitaskNet, NetworkConfig
from .optim import Adam

MAGIC = b"CPA1"
VERSION = 1

_DTYPES = {0: "<f8", 1: "<f4", 2: "<i8"}
_DTYPE_CODES = {np.dtype("float64"): 0, np.dtype("float32"): 1, np.dtype("int64"): 2}


def _pack_tensor(name: str, array: np.ndarray) -> bytes:
    code = _DTYPE_CODES[np.dtype(array.dtype)]
    encoded = name.encode("utf-8")
    header = struct.pack("<H", len(encoded)) + encoded
    header += struct.pack("<BB", code, array.ndim)
    header += struct.pack(f"<{array.ndim}I", *array.shape)
    return header + np.ascontiguousarray(array).astype(_DTYPES[code]).tobytes()


def _read_tensor(buf: memoryview, pos: int) -> tuple[str, np.ndarray, int]:
    (name_len,) = struct.unpack_from("<H", buf, pos)
    pos += 2
    name = bytes(buf[pos: pos + name_len]).decode("utf-8")
    pos += name_len
    code, ndim = struct.unpack_from("<BB", buf, pos)
    pos += 2
    shape = struct.unpack_from(f"<{ndim}I", buf, pos)
    pos += 4 * ndim
    dtype = np.dtype(_DTYPES[code])
    count = int(np.prod(shape)) if ndim else 1
    data = np.frombuffer(buf, dtype=dtype, count=count, offset=pos).reshape(shape)
    pos += count * dtype.itemsize
    return name, data.copy(), pos


def write_checkpoint(path, config: dict, tensors: dict[str, np.ndarray],
                     extras: dict) -> None:
    config_bytes = json.dumps(config, sort_keys=True).encode("utf-8")
    extras_bytes = json.dumps(extras, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<B", VERSION))
        fh.write(struct.pack("<I", len(config_bytes)))
        fh.write(config_bytes)
        fh.write(struct.pack("<I", len(extras_bytes)))
        fh.write(extras_bytes)
        fh.write(struct.pack("<I", len(tensors)))
        for name, array in tensors.items():
            fh.write(_pack_tensor(name, array))


def read_checkpoint(path) -> tuple[dict, dict[str, np.ndarray], dict]:
    raw = Path(path).read_bytes()
    if raw[:4] != MAGIC:
        raise ValueError(f"{path}: not a checkpoint file (bad magic)")
    version = raw[4]
    if version != VERSION:
        raise ValueError(f"{path}: unsupported checkpoint version {version}")
    buf = memoryview(raw)
    pos = 5
    (config_len,) = struct.unpack_from("<I", buf, pos)
    pos += 4
    config = json.loads(bytes(buf[pos: pos + config_len]))
    pos += config_len
    (extras_len,) = struct.unpack_from("<I", buf, pos)
    pos += 4
    extras = json.loads(bytes(buf[pos: pos + extras_len]))
    pos += extras_len
    (n_tensors,) = struct.unpack_from("<I", buf, pos)
    pos += 4
    tensors = {}
    for _ in range(n_tensors):
        name, array, pos = _read_tensor(buf, pos)
        tensors[name] = array
    return config, tensors, extras


def save_model(path, model: MultitaskNet, optimizer: Adam | None = None,
               extras: dict | None = None) -> None:
    tensors = {f"param/{k}": v for k, v in model.named_params().items()}
    tensors.update({f"state/{k}": v for k, v in model.named_state().items()})
    meta = dict(extras or {})
    if optimizer is not None:
        tensors.update({f"adam_m/{k}": v for k, v in optimizer.m.items()})
        tensors.update({f"adam_v/{k}": v for k, v in optimizer.v.items()})
        meta["adam_step"] = optimizer.step_count
        meta["adam_lr"] = optimizer.lr
    write_checkpoint(path, model.config.to_dict(), tensors, meta)


def load_model(path) -> tuple[MultitaskNet, Adam | None, dict]:
    config_dict, tensors, extras = read_checkpoint(path)
    config = NetworkConfig.from_dict(config_dict)
    model = MultitaskNet(config)
    for name, value in tensors.items():
        group, key = name.split("/", 1)
        if group == "param":
            model.set_param(key, value)
        elif group == "state":
            model.set_state(key, value)
    optimizer = None
    if "adam_step" in extras:
        optimizer = Adam.for_params(model.named_params(),
                                    lr=extras.get("adam_lr", config.learning_rate))
        optimizer.step_count = int(extras["adam_step"])
        for name, value in tensors.items():
            group, key = name.split("/", 1)
            if group == "adam_m":
                optimizer.m[key] = value
            elif group == "adam_v":
                optimizer.v[key] = value
    return model, optimizer, extras
