"""Minimal trainable-model substrate: parameter stores, deterministic SGD,
finite-difference gradient checking, and model serialization.

Every scorer in the toolkit is built from embedding lookups, affine maps,
tanh nonlinearities and softmax/logistic losses, with hand-written
backpropagation.  Models expose two things: a ``params`` ParamStore and a
``loss_and_grads(example) -> (loss, grads)`` method; that is all training
and gradient checking need.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import CorruptFile, NonFiniteLoss, VersionMismatch

INIT_SCALE = 0.1
MAGIC = b"SSHALA"
FORMAT_VERSION = 1


class ParamStore:
    """Named dense float64 arrays with fixed shapes and a version tag."""

    def __init__(self):
        self._arrays: dict[str, np.ndarray] = {}
        self.version = 0

    def declare(self, name: str, shape: tuple[int, ...], rng: np.random.Generator | None = None) -> np.ndarray:
        if name in self._arrays:
            raise ValueError(f"parameter {name!r} already declared")
        if rng is None:
            arr = np.zeros(shape, dtype=np.float64)
        else:
            arr = rng.uniform(-INIT_SCALE, INIT_SCALE, size=shape)
        self._arrays[name] = arr
        return arr

    def __getitem__(self, name: str) -> np.ndarray:
        return self._arrays[name]

    def __setitem__(self, name: str, value: np.ndarray) -> None:
        old = self._arrays[name]
        value = np.asarray(value, dtype=np.float64)
        if value.shape != old.shape:
            raise ValueError(f"shape of {name!r} is fixed at {old.shape}, got {value.shape}")
        self._arrays[name] = value

    def __contains__(self, name: str) -> bool:
        return name in self._arrays

    def names(self) -> list[str]:
        return list(self._arrays)

    def items(self):
        return self._arrays.items()

    def copy(self) -> "ParamStore":
        out = ParamStore()
        for name, arr in self._arrays.items():
            out._arrays[name] = arr.copy()
        out.version = self.version
        return out

    def assert_finite(self) -> None:
        for name, arr in self._arrays.items():
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"parameter {name!r} contains non-finite values")

    def allclose(self, other: "ParamStore", atol: float = 0.0) -> bool:
        if self.names() != other.names():
            return False
        return all(np.allclose(self[n], other[n], rtol=0.0, atol=atol) for n in self.names())


@dataclass
class TrainConfig:
    learning_rate: float
    epochs: int
    l2: float = 0.0
    seed: int = 0
    batch_size: int = 1
    loss_weights: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 0 or self.batch_size < 1 or self.l2 < 0:
            raise ValueError("bad training configuration")
        if self.loss_weights:
            if any(w < 0 for w in self.loss_weights.values()):
                raise ValueError("loss weights must be non-negative")
            if sum(self.loss_weights.values()) <= 0:
                raise ValueError("loss weights must sum to a positive value")

    def weight(self, task: str, default: float = 1.0) -> float:
        return self.loss_weights.get(task, default)


def init_grads(store: ParamStore) -> dict[str, np.ndarray]:
    return {name: np.zeros_like(arr) for name, arr in store.items()}


def sgd_train(model, dataset, config: TrainConfig):
    """Deterministic mini-batch SGD.  Returns (new model, per-epoch loss trace)."""
    trained = model.clone()
    trace: list[float] = []
    if config.epochs == 0:
        return trained, trace
    if not dataset:
        raise ValueError("dataset is empty")
    store: ParamStore = trained.params
    rng = np.random.default_rng(config.seed)
    lr, l2 = config.learning_rate, config.l2
    for epoch in range(config.epochs):
        order = rng.permutation(len(dataset))
        losses: list[float] = []
        for start in range(0, len(order), config.batch_size):
            batch = order[start: start + config.batch_size]
            acc: dict[str, np.ndarray] | None = None
            for i in batch:
                loss, grads = trained.loss_and_grads(dataset[int(i)])
                losses.append(loss)
                if acc is None:
                    acc = grads
                else:
                    for name, g in grads.items():
                        acc[name] += g
            scale = lr / len(batch)
            if l2 > 0.0:
                decay = 1.0 - lr * l2
                for name in store.names():
                    store[name] *= decay
            for name, g in acc.items():
                store[name] -= scale * g
        epoch_loss = float(np.mean(losses))
        if not np.isfinite(epoch_loss):
            raise NonFiniteLoss(epoch)
        trace.append(epoch_loss)
    store.version += 1
    return trained, trace


def grad_check(model, example, epsilon: float = 1e-5, param_names: list[str] | None = None) -> float:
    """Max relative error between analytic and central-difference gradients.

    Relative error uses denominator max(|analytic|, |numeric|, 1e-3) and is
    defined as 0 when both sides are exactly 0.
    """
    _, grads = model.loss_and_grads(example)
    store: ParamStore = model.params
    max_err = 0.0
    for name in (param_names if param_names is not None else store.names()):
        arr = store[name]
        g = grads.get(name)
        if g is None:
            g = np.zeros_like(arr)
        flat = arr.reshape(-1)
        gflat = np.asarray(g).reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + epsilon
            f_plus = model.loss_and_grads(example)[0]
            flat[i] = orig - epsilon
            f_minus = model.loss_and_grads(example)[0]
            flat[i] = orig
            numeric = (f_plus - f_minus) / (2.0 * epsilon)
            analytic = gflat[i]
            denom = max(abs(analytic), abs(numeric))
            if denom == 0.0:
                continue
            err = abs(analytic - numeric) / max(denom, 1e-3)
            if err > max_err:
                max_err = err
    return max_err


# ----------------------------------------------------------- serialization

def save_params(store: ParamStore, path, module_id: str, meta: dict | None = None) -> None:
    store.assert_finite()
    names = store.names()
    header = {
        "names": names,
        "shapes": {n: list(store[n].shape) for n in names},
        "store_version": store.version,
        "meta": meta or {},
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    mid = module_id.encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", FORMAT_VERSION))
        fh.write(struct.pack("<H", len(mid)))
        fh.write(mid)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        for n in names:
            fh.write(np.ascontiguousarray(store[n], dtype="<f8").tobytes())


def load_params(path, expected_module: str | None = None) -> tuple[ParamStore, str, dict]:
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[: len(MAGIC)] != MAGIC:
        raise CorruptFile(f"{path}: bad magic bytes")
    off = len(MAGIC)
    try:
        (version,) = struct.unpack_from("<I", raw, off)
        off += 4
        if version != FORMAT_VERSION:
            raise VersionMismatch(version, FORMAT_VERSION)
        (mlen,) = struct.unpack_from("<H", raw, off)
        off += 2
        module_id = raw[off: off + mlen].decode("utf-8")
        off += mlen
        (blen,) = struct.unpack_from("<I", raw, off)
        off += 4
        header = json.loads(raw[off: off + blen].decode("utf-8"))
        off += blen
        store = ParamStore()
        for name in header["names"]:
            shape = tuple(header["shapes"][name])
            count = int(np.prod(shape)) if shape else 1
            nbytes = count * 8
            chunk = raw[off: off + nbytes]
            if len(chunk) != nbytes:
                raise CorruptFile(f"{path}: truncated array {name!r}")
            store._arrays[name] = np.frombuffer(chunk, dtype="<f8").reshape(shape).astype(np.float64)
            off += nbytes
        store.version = int(header.get("store_version", 0))
    except VersionMismatch:
        raise
    except CorruptFile:
        raise
    except Exception as exc:
        raise CorruptFile(f"{path}: {exc}") from exc
    if expected_module is not None and module_id != expected_module:
        raise CorruptFile(f"{path}: module id {module_id!r}, expected {expected_module!r}")
    return store, module_id, header.get("meta", {})


# ---------------------------------------------------------------- numerics

def softmax(x: np.ndarray, axis: int = -1) -> np.ndarray:
    shifted = x - np.max(x, axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / np.sum(e, axis=axis, keepdims=True)


def log_softmax(x: np.ndarray, axis: int = -1) -> np.ndarray:
    shifted = x - np.max(x, axis=axis, keepdims=True)
    return shifted - np.log(np.sum(np.exp(shifted), axis=axis, keepdims=True))


def sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(np.asarray(x, dtype=np.float64))
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def log_sigmoid(x: np.ndarray) -> np.ndarray:
    return -np.logaddexp(0.0, -x)


# ------------------------------------------------------------------ vocab

class Vocab:
    """Frozen token -> index map with reserved entries at the front."""

    PAD = "<pad>"
    OOV = "<oov>"

    def __init__(self, tokens, extra_reserved: tuple[str, ...] = ()):
        self.reserved = (self.PAD, self.OOV) + extra_reserved
        self._index: dict[str, int] = {}
        for tok in self.reserved:
            self._index[tok] = len(self._index)
        for tok in sorted(set(map(str, tokens)) - set(self.reserved)):
            self._index[tok] = len(self._index)
        self._tokens = list(self._index)

    @classmethod
    def from_tokens(cls, tokens: list[str], reserved_count: int = 2) -> "Vocab":
        """Rebuild a vocab from its serialized token list, order preserved."""
        obj = cls.__new__(cls)
        obj.reserved = tuple(tokens[:reserved_count])
        obj._index = {t: i for i, t in enumerate(tokens)}
        obj._tokens = list(tokens)
        return obj

    def __len__(self) -> int:
        return len(self._index)

    def id(self, token: str) -> int:
        return self._index.get(str(token), 1)

    def ids(self, tokens) -> list[int]:
        return [self.id(t) for t in tokens]

    def token(self, idx: int) -> str:
        return self._tokens[idx]

    def tokens(self) -> list[str]:
        return list(self._tokens)


class WindowEncoder:
    """Per-token encoder: concatenated embedding window -> affine -> tanh."""

    def __init__(self, store: ParamStore, prefix: str, vocab_size: int, dim: int,
                 radius: int, hidden: int, rng: np.random.Generator | None):
        self.prefix = prefix
        self.radius = radius
        self.dim = dim
        self.hidden = hidden
        self.e_name = f"{prefix}.emb"
        self.w_name = f"{prefix}.W"
        self.b_name = f"{prefix}.b"
        store.declare(self.e_name, (vocab_size, dim), rng)
        store.declare(self.w_name, ((2 * radius + 1) * dim, hidden), rng)
        store.declare(self.b_name, (hidden,), rng)
        self.store = store

    @classmethod
    def attach(cls, store: ParamStore, prefix: str, radius: int) -> "WindowEncoder":
        """Rebind an encoder view onto arrays already present in a store."""
        obj = cls.__new__(cls)
        obj.prefix = prefix
        obj.radius = radius
        obj.e_name, obj.w_name, obj.b_name = f"{prefix}.emb", f"{prefix}.W", f"{prefix}.b"
        obj.dim = store[obj.e_name].shape[1]
        obj.hidden = store[obj.b_name].shape[0]
        obj.store = store
        return obj

    def window_ids(self, idxs: list[int]) -> np.ndarray:
        n = len(idxs)
        r = self.radius
        padded = [0] * r + list(idxs) + [0] * r
        return np.array([padded[i: i + 2 * r + 1] for i in range(n)], dtype=np.intp)

    def forward(self, idxs: list[int]):
        emb = self.store[self.e_name]
        win = self.window_ids(idxs)
        x = emb[win].reshape(len(idxs), -1)
        h = np.tanh(x @ self.store[self.w_name] + self.store[self.b_name])
        return h, (win, x, h)

    def backward(self, cache, dh: np.ndarray, grads: dict[str, np.ndarray]) -> None:
        win, x, h = cache
        dpre = dh * (1.0 - h * h)
        grads[self.w_name] += x.T @ dpre
        grads[self.b_name] += dpre.sum(axis=0)
        dx = (dpre @ self.store[self.w_name].T).reshape(win.shape[0], win.shape[1], self.dim)
        np.add.at(grads[self.e_name], win, dx)
