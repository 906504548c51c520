"""Versioned binary checkpoints with an embedded schema header.

Layout:  magic (6 bytes) | header length (uint32 LE) | header JSON (UTF-8)
         | concatenated float64 little-endian array blobs.

The header carries the format version, the algorithm, layer widths,
normalization statistics, and the name/shape of every array blob, so a
checkpoint is self-describing.
"""

import json
import struct

import numpy as np

from ..errors import ConfigError
from .nets import Mlp
from .policies import ObsNormalizer, PPOPolicy, TD3Policy

MAGIC = b"FFCK\x01\n"
FORMAT_VERSION = 1


def save_checkpoint(path, algorithm, arrays, meta):
    """Write named float arrays plus metadata as one self-describing blob."""
    names = list(arrays)
    header = {
        "format_version": FORMAT_VERSION,
        "algorithm": algorithm,
        "arrays": [{"name": k, "shape": list(np.shape(arrays[k]))} for k in names],
        "meta": meta,
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        for k in names:
            fh.write(np.ascontiguousarray(arrays[k], dtype="<f8").tobytes())


def load_checkpoint(path):
    """Read a checkpoint back into (algorithm, meta, arrays)."""
    with open(path, "rb") as fh:
        magic = fh.read(len(MAGIC))
        if magic != MAGIC:
            raise ConfigError(f"{path}: not a checkpoint file (bad magic)")
        (hlen,) = struct.unpack("<I", fh.read(4))
        header = json.loads(fh.read(hlen).decode("utf-8"))
        if header.get("format_version") != FORMAT_VERSION:
            raise ConfigError(
                f"{path}: unsupported checkpoint version {header.get('format_version')}"
            )
        arrays = {}
        for spec in header["arrays"]:
            shape = tuple(spec["shape"])
            count = int(np.prod(shape)) if shape else 1
            data = np.frombuffer(fh.read(8 * count), dtype="<f8").reshape(shape)
            arrays[spec["name"]] = data.copy()
    return header["algorithm"], header["meta"], arrays


def save_policy(path, policy, algorithm, extra_meta=None):
    meta = {"normalizer": policy.normalizer.to_dict()}
    if extra_meta:
        meta.update(extra_meta)
    if algorithm == "td3":
        meta["actor_widths"] = list(policy.actor.widths)
        arrays = {"actor": policy.actor.params}
    elif algorithm == "ppo":
        meta["mean_widths"] = list(policy.mean_mlp.widths)
        meta["value_widths"] = list(policy.value_mlp.widths)
        arrays = {
            "mean": policy.mean_mlp.params,
            "log_std": policy.log_std,
            "value": policy.value_mlp.params,
        }
    else:
        raise ConfigError(f"unknown algorithm '{algorithm}'")
    save_checkpoint(path, algorithm, arrays, meta)


def load_policy(path):
    """Rebuild the greedy policy stored in a checkpoint."""
    algorithm, meta, arrays = load_checkpoint(path)
    normalizer = ObsNormalizer.from_dict(meta["normalizer"])
    if algorithm == "td3":
        actor = Mlp(meta["actor_widths"], params=arrays["actor"])
        return TD3Policy(actor, normalizer)
    if algorithm == "ppo":
        mean = Mlp(meta["mean_widths"], params=arrays["mean"])
        value = Mlp(meta["value_widths"], params=arrays["value"])
        return PPOPolicy(mean, arrays["log_std"], value, normalizer)
    raise ConfigError(f"{path}: unknown algorithm '{algorithm}'")
