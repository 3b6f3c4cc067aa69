"""Self-describing binary container for trained models.

Layout (all little-endian):

    magic "ASCA" | u32 version | u32 kind_len | kind utf8
    u32 meta_len | meta JSON utf8
    u32 n_tensors | (u32 name_len, name, u32 ndim, u32*ndim dims, f64 data)*

Weights travel as raw float64, so a round trip is bit-exact.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from ..errors import FormatError
from .common import ScalerParams
from .nets import CnnModel, LstmModel, MlpModel, _BatchNorm, _LstmLayer
from .svm import PairClassifier, SvmModel

MAGIC = b"ASCA"
VERSION = 1


def _pack_tensors(tensors: dict[str, np.ndarray]) -> bytes:
    out = [struct.pack("<I", len(tensors))]
    for name, arr in tensors.items():
        arr = np.ascontiguousarray(arr, dtype="<f8")
        enc = name.encode()
        out.append(struct.pack("<I", len(enc)))
        out.append(enc)
        out.append(struct.pack("<I", arr.ndim))
        out.append(struct.pack(f"<{arr.ndim}I", *arr.shape))
        out.append(arr.tobytes())
    return b"".join(out)


class _Reader:
    def __init__(self, data: bytes, path):
        self.data = data
        self.pos = 0
        self.path = path

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise FormatError(f"{self.path}: truncated model container")
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]


def _unpack_tensors(r: _Reader) -> dict[str, np.ndarray]:
    tensors = {}
    for _ in range(r.u32()):
        name = r.take(r.u32()).decode()
        ndim = r.u32()
        shape = struct.unpack(f"<{ndim}I", r.take(4 * ndim))
        count = int(np.prod(shape)) if ndim else 1
        tensors[name] = np.frombuffer(r.take(8 * count), dtype="<f8").reshape(shape).copy()
    return tensors


def _scaler_tensors(model) -> dict[str, np.ndarray]:
    if model.scaler is None:
        return {}
    return {"scaler_min": model.scaler.mins, "scaler_max": model.scaler.maxs}


def _scaler_from(tensors) -> ScalerParams | None:
    if "scaler_min" not in tensors:
        return None
    return ScalerParams(mins=tensors["scaler_min"], maxs=tensors["scaler_max"])


def save_model(model, path) -> None:
    """Serialize any trained classifier kind to the container format."""
    meta = {"labels": list(model.label_names)}
    tensors = _scaler_tensors(model)
    if model.kind == "svm":
        meta.update(
            gamma=model.gamma,
            C=model.C,
            n_features=model.n_features,
            pairs=[[p.lo, p.hi] for p in model.pairs],
            warnings=list(model.convergence_warnings),
        )
        for i, p in enumerate(model.pairs):
            tensors[f"pair_{i}_sv"] = p.sv
            tensors[f"pair_{i}_coef"] = p.coef
        tensors["pair_biases"] = np.array([p.bias for p in model.pairs])
    elif model.kind == "dnn":
        meta.update(dropout_rate=model.dropout_rate)
        for name, arr in zip(("W1", "b1", "W2", "b2", "W3", "b3"), model.weights):
            tensors[name] = arr
    elif model.kind == "rnn":
        meta.update(dropout_rate=model.dropout_rate, seq_len=model.seq_len)
        names = ("l1_Wx", "l1_Wh", "l1_b", "l2_Wx", "l2_Wh", "l2_b", "W_out", "b_out")
        for name, arr in zip(names, model.params):
            tensors[name] = arr
    elif model.kind == "cnn":
        meta.update(input_len=model.input_len)
        tensors.update(
            conv1_W=model.conv1_W, conv1_b=model.conv1_b,
            bn1_gamma=model.bn1.gamma, bn1_beta=model.bn1.beta,
            bn1_mean=model.bn1.running_mean, bn1_var=model.bn1.running_var,
            conv2_W=model.conv2_W, conv2_b=model.conv2_b,
            bn2_gamma=model.bn2.gamma, bn2_beta=model.bn2.beta,
            bn2_mean=model.bn2.running_mean, bn2_var=model.bn2.running_var,
            W_out=model.W_out, b_out=model.b_out,
        )
    else:
        raise FormatError(f"cannot serialize unknown model kind {model.kind!r}")

    kind = model.kind.encode()
    meta_json = json.dumps(meta, sort_keys=True).encode()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", VERSION))
        fh.write(struct.pack("<I", len(kind)))
        fh.write(kind)
        fh.write(struct.pack("<I", len(meta_json)))
        fh.write(meta_json)
        fh.write(_pack_tensors(tensors))


def load_model(path, expected_kind: str | None = None):
    """Rebuild a model from its container; FormatError on any mismatch."""
    with open(path, "rb") as fh:
        r = _Reader(fh.read(), path)
    if r.take(4) != MAGIC:
        raise FormatError(f"{path}: bad magic, not a model container")
    version = r.u32()
    if version != VERSION:
        raise FormatError(f"{path}: unsupported container version {version}")
    kind = r.take(r.u32()).decode()
    if expected_kind is not None and kind != expected_kind:
        raise FormatError(
            f"{path}: container holds a {kind!r} model, caller expected {expected_kind!r}"
        )
    try:
        meta = json.loads(r.take(r.u32()).decode())
    except ValueError as exc:
        raise FormatError(f"{path}: unreadable metadata") from exc
    tensors = _unpack_tensors(r)
    labels = meta["labels"]
    scaler = _scaler_from(tensors)

    if kind == "svm":
        pairs = [
            PairClassifier(
                lo=lo,
                hi=hi,
                sv=tensors[f"pair_{i}_sv"],
                coef=tensors[f"pair_{i}_coef"],
                bias=float(tensors["pair_biases"][i]),
            )
            for i, (lo, hi) in enumerate(meta["pairs"])
        ]
        return SvmModel(
            label_names=labels,
            gamma=meta["gamma"],
            C=meta["C"],
            pairs=pairs,
            n_features=meta["n_features"],
            scaler=scaler,
            convergence_warnings=list(meta.get("warnings", [])),
        )
    if kind == "dnn":
        weights = [tensors[n] for n in ("W1", "b1", "W2", "b2", "W3", "b3")]
        return MlpModel(weights, labels, dropout_rate=meta["dropout_rate"], scaler=scaler)
    if kind == "rnn":
        return LstmModel(
            _LstmLayer(tensors["l1_Wx"], tensors["l1_Wh"], tensors["l1_b"]),
            _LstmLayer(tensors["l2_Wx"], tensors["l2_Wh"], tensors["l2_b"]),
            tensors["W_out"],
            tensors["b_out"],
            labels,
            seq_len=meta["seq_len"],
            dropout_rate=meta["dropout_rate"],
            scaler=scaler,
        )
    if kind == "cnn":
        return CnnModel(
            tensors["conv1_W"], tensors["conv1_b"],
            _BatchNorm(tensors["bn1_gamma"], tensors["bn1_beta"],
                       tensors["bn1_mean"], tensors["bn1_var"]),
            tensors["conv2_W"], tensors["conv2_b"],
            _BatchNorm(tensors["bn2_gamma"], tensors["bn2_beta"],
                       tensors["bn2_mean"], tensors["bn2_var"]),
            tensors["W_out"], tensors["b_out"],
            labels, input_len=meta["input_len"], scaler=scaler,
        )
    raise FormatError(f"{path}: unknown model kind {kind!r}")
