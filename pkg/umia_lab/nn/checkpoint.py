"""Binary checkpoints: magic, little-endian header length, JSON header, raw ``<f8`` arrays."""

from __future__ import annotations

import json
import logging
from pathlib import Path
import struct

import numpy as np

from umia_lab.core.errors import DataError
from umia_lab.models import ModelParams


logger = logging.getLogger(__name__)

MAGIC = b"UMIACKPT"
FORMAT_VERSION = 1


def params_to_bytes(params: ModelParams) -> bytes:
    header = json.dumps(
        {
            "version": FORMAT_VERSION,
            "layer_sizes": list(params.layer_sizes),
            "activation": params.activation.value,
            "dropout_rates": list(params.dropout_rates),
            "dtype": "<f8",
        },
        sort_keys=True,
    ).encode("utf-8")
    chunks = [MAGIC, struct.pack("<I", len(header)), header]
    for weight, bias in zip(params.weights, params.biases):
        chunks.append(weight.astype("<f8").tobytes(order="C"))
        chunks.append(bias.astype("<f8").tobytes(order="C"))
    return b"".join(chunks)


def params_from_bytes(payload: bytes) -> ModelParams:
    if payload[: len(MAGIC)] != MAGIC:
        raise DataError("not a umia_lab checkpoint (bad magic)")
    offset = len(MAGIC)
    (header_len,) = struct.unpack_from("<I", payload, offset)
    offset += 4
    header = json.loads(payload[offset : offset + header_len].decode("utf-8"))
    offset += header_len
    if header.get("version") != FORMAT_VERSION:
        raise DataError(f"unsupported checkpoint version {header.get('version')}")
    sizes = [int(s) for s in header["layer_sizes"]]
    if (len(payload) - offset) % 8:
        raise DataError(f"checkpoint body of {len(payload) - offset} bytes is not a whole number of float64 values")
    body = np.frombuffer(payload, dtype="<f8", offset=offset)
    expected = sum(a * b + b for a, b in zip(sizes[:-1], sizes[1:]))
    if body.size != expected:
        raise DataError(f"checkpoint body has {body.size} values, header implies {expected}")
    weights, biases = [], []
    cursor = 0
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        count = fan_in * fan_out
        weights.append(body[cursor : cursor + count].reshape(fan_out, fan_in))
        cursor += count
        biases.append(body[cursor : cursor + fan_out])
        cursor += fan_out
    return ModelParams(
        layer_sizes=tuple(sizes),
        weights=tuple(weights),
        biases=tuple(biases),
        activation=header["activation"],
        dropout_rates=tuple(header["dropout_rates"]),
    )


def save_checkpoint(params: ModelParams, path: Path | str) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_bytes(params_to_bytes(params))
    logger.debug("Checkpoint guardado en %s", target)
    return target


def load_checkpoint(path: Path | str) -> ModelParams:
    return params_from_bytes(Path(path).read_bytes())
