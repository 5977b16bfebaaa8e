"""Labeled dataset construction and its binary container format.

Layout (all integers little-endian):

    magic "CPAD" | version u8 | config_len u32 | config JSON (utf-8)
    | record * n
    | footer: n_records u32 | record_offset u64 * n | footer_start u64
      | magic "CPAX"

    record: record_len u32 | meta_len u32 | meta JSON | ndim u8
            | dims u32 * ndim | float32 little-endian tensor data

Record metadata carries the intent index, both capability labels
(raw BER and floored log10 BER), the per-sample generation seed, the
drawn scenario parameters and the per-channel normalization ranges of
the stored feature tensor.

Builds are deterministic: sample ``i`` derives its seed from
(master_seed, i) alone, so the build order (or any parallel schedule)
cannot change the file contents, and two builds from the same config and
seed are byte-identical.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..features import feature_tensor
from ..threats import ThreatKind, generate_sample
from .config import ExperimentConfig

MAGIC = b"CPAD"
FOOT_MAGIC = b"CPAX"
VERSION = 1

_SCENARIO_STREAM = 5  # disjoint from the generator streams in threats


def derive_seed(master_seed: int, index: int) -> int:
    """Stable per-sample seed from the master seed and sample index."""
    words = np.random.SeedSequence((int(master_seed), int(index))).generate_state(2)
    return int(words[0]) << 32 | int(words[1])


@dataclass
class Record:
    meta: dict
    tensor: np.ndarray  # normalized float32 (frames, bins, 3)


def build_records(config: ExperimentConfig, per_kind: int, master_seed: int,
                  progress=None) -> list[Record]:
    """Generate per_kind samples for each intent, in intent order."""
    records = []
    index = 0
    for kind in ThreatKind:
        for _ in range(per_kind):
            seed = derive_seed(master_seed, index)
            scenario = config.space.draw(
                kind, config.frame, np.random.default_rng([seed, _SCENARIO_STREAM])
            )
            sample = generate_sample(scenario, seed)
            feats = feature_tensor(sample.received, config.frame, config.feature)
            meta = {
                **sample.metadata,
                "index": index,
                "intent_index": kind.value,
                "log_ber": sample.log_ber,
                "raw_ber": sample.raw_ber,
                "channel_min": [float(v) for v in feats.channel_min],
                "channel_max": [float(v) for v in feats.channel_max],
            }
            records.append(Record(meta=meta, tensor=feats.data.astype("<f4")))
            if progress is not None:
                progress(index)
            index += 1
    return records


def _pack_record(record: Record) -> bytes:
    meta_bytes = json.dumps(record.meta, sort_keys=True).encode("utf-8")
    tensor = np.ascontiguousarray(record.tensor, dtype="<f4")
    body = struct.pack("<I", len(meta_bytes)) + meta_bytes
    body += struct.pack("<B", tensor.ndim)
    body += struct.pack(f"<{tensor.ndim}I", *tensor.shape)
    body += tensor.tobytes()
    return struct.pack("<I", len(body)) + body


def write_dataset(path, config: ExperimentConfig, records: list[Record]) -> None:
    config_bytes = config.to_json().encode("utf-8")
    offsets = []
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<B", VERSION))
        fh.write(struct.pack("<I", len(config_bytes)))
        fh.write(config_bytes)
        for record in records:
            offsets.append(fh.tell())
            fh.write(_pack_record(record))
        footer_start = fh.tell()
        fh.write(struct.pack("<I", len(records)))
        fh.write(struct.pack(f"<{len(records)}Q", *offsets))
        fh.write(struct.pack("<Q", footer_start))
        fh.write(FOOT_MAGIC)


def build_dataset(path, config: ExperimentConfig, per_kind: int | None = None,
                  master_seed: int | None = None, progress=None) -> int:
    """Generate and persist a dataset; returns the record count."""
    per_kind = config.train_per_kind if per_kind is None else per_kind
    master_seed = config.master_seed if master_seed is None else master_seed
    records = build_records(config, per_kind, master_seed, progress)
    write_dataset(path, config, records)
    return len(records)


class Dataset:
    """Random-access reader over the binary container."""

    def __init__(self, path):
        self.path = Path(path)
        raw = self.path.read_bytes()
        if raw[:4] != MAGIC:
            raise ValueError(f"{path}: not a dataset file (bad magic)")
        if raw[-4:] != FOOT_MAGIC:
            raise ValueError(f"{path}: truncated dataset (bad footer magic)")
        version = raw[4]
        if version != VERSION:
            raise ValueError(f"{path}: unsupported dataset version {version}")
        (config_len,) = struct.unpack_from("<I", raw, 5)
        self.config_dict = json.loads(raw[9: 9 + config_len])
        (footer_start,) = struct.unpack_from("<Q", raw, len(raw) - 12)
        (n_records,) = struct.unpack_from("<I", raw, footer_start)
        self.offsets = struct.unpack_from(f"<{n_records}Q", raw, footer_start + 4)
        self._raw = raw

    @property
    def config(self) -> ExperimentConfig:
        return ExperimentConfig.from_dict(self.config_dict)

    def __len__(self) -> int:
        return len(self.offsets)

    def __getitem__(self, index: int) -> Record:
        offset = self.offsets[index]
        (record_len,) = struct.unpack_from("<I", self._raw, offset)
        pos = offset + 4
        (meta_len,) = struct.unpack_from("<I", self._raw, pos)
        pos += 4
        meta = json.loads(self._raw[pos: pos + meta_len])
        pos += meta_len
        ndim = self._raw[pos]
        pos += 1
        shape = struct.unpack_from(f"<{ndim}I", self._raw, pos)
        pos += 4 * ndim
        count = int(np.prod(shape))
        tensor = np.frombuffer(self._raw, dtype="<f4", count=count,
                               offset=pos).reshape(shape)
        return Record(meta=meta, tensor=tensor.copy())

    def load_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, list[dict]]:
        """All tensors (float64), intent indices, log-BER labels, metadata."""
        tensors, intents, log_bers, metas = [], [], [], []
        for i in range(len(self)):
            record = self[i]
            tensors.append(record.tensor.astype(np.float64))
            intents.append(record.meta["intent_index"])
            log_bers.append(record.meta["log_ber"])
            metas.append(record.meta)
        return (np.stack(tensors), np.array(intents, dtype=np.int64),
                np.array(log_bers, dtype=np.float64), metas)
