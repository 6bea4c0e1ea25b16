"""
numeric.py  —  Reverse-mode differentiation over dense float64 numpy arrays.

Only the operations the completion, dialog-act and SRL models need are here:
affine maps, elementwise activations, softmax, a fused LSTM cell, additive
attention, the two training losses, SGD/Adam, a finite-difference gradient
check and the binary checkpoint container.
"""

from __future__ import annotations

import json
import logging
import struct
import threading
import zlib
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

logger = logging.getLogger(__name__)

DTYPE = np.float64
GRAD_CLIP_NORM = 5.0
TINY = 1e-300

CHECKPOINT_MAGIC = b"ELHYBCKP"
CHECKPOINT_VERSION = 1


class ShapeError(ValueError):
    pass


# ---------- Tensors ----------
class Tensor:
    """Dense row-major float64 array plus an optional gradient buffer."""

    __slots__ = ("data", "grad", "name", "requires_grad")

    def __init__(self, data, name: str = "", requires_grad: bool = False):
        self.data = np.asarray(data, dtype=DTYPE)
        self.grad = None
        self.name = name
        self.requires_grad = requires_grad

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(self.data.shape)

    @property
    def values(self) -> np.ndarray:
        return self.data.reshape(-1)

    def item(self) -> float:
        return float(self.data.reshape(-1)[0])

    def __len__(self) -> int:
        return self.data.shape[0]

    def __repr__(self) -> str:
        label = f" {self.name!r}" if self.name else ""
        return f"Tensor{label}(dims={self.dims})"


class Parameter(Tensor):
    __slots__ = ()

    def __init__(self, value, name: str):
        super().__init__(value, name=name, requires_grad=True)
        self.grad = np.zeros_like(self.data)

    def zero_grad(self) -> None:
        self.grad.fill(0.0)


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


# ---------- Tape ----------
@dataclass
class _Record:
    inputs: tuple[Tensor, ...]
    outputs: tuple[Tensor, ...]
    backward: Callable


class _TapeStack(threading.local):
    def __init__(self):
        self.stack: list[Tape] = []


_ACTIVE = _TapeStack()


class Tape:
    """
    Ordered record of the differentiable operations executed while the tape is
    active (``with Tape() as tape:``). Outside an active tape ops do not record,
    which is how inference runs.
    """

    def __init__(self):
        self.records: list[_Record] = []

    def __enter__(self) -> "Tape":
        _ACTIVE.stack.append(self)
        return self

    def __exit__(self, *exc) -> None:
        _ACTIVE.stack.pop()

    def __len__(self) -> int:
        return len(self.records)

    def backward(self, loss: Tensor) -> None:
        backward(loss, self)


def current_tape() -> Tape | None:
    return _ACTIVE.stack[-1] if _ACTIVE.stack else None


def _emit(datas, inputs: Sequence[Tensor], backward_fn) -> tuple[Tensor, ...]:
    outs = tuple(Tensor(d) for d in datas)
    tape = current_tape()
    if tape is not None and any(t.requires_grad for t in inputs):
        for o in outs:
            o.requires_grad = True
        tape.records.append(_Record(tuple(inputs), outs, backward_fn))
    return outs


def _op(data, inputs: Sequence[Tensor], backward_fn) -> Tensor:
    return _emit((data,), inputs, lambda g: backward_fn(g[0]))[0]


def backward(loss: Tensor, tape: Tape) -> None:
    """Accumulate d(loss)/d(param) into every Parameter reachable from loss."""
    if loss.data.size != 1:
        raise ShapeError(f"backward needs a scalar loss, got dims {loss.dims}")
    if not loss.requires_grad:
        return
    if isinstance(loss, Parameter):
        loss.grad += 1.0
        return
    loss.grad = np.ones_like(loss.data)
    for rec in reversed(tape.records):
        if all(o.grad is None for o in rec.outputs):
            continue
        grads = tuple(np.zeros_like(o.data) if o.grad is None else o.grad for o in rec.outputs)
        for inp, g in zip(rec.inputs, rec.backward(grads)):
            if g is None or not inp.requires_grad:
                continue
            if inp.grad is None:
                inp.grad = np.array(g, dtype=DTYPE, copy=True)
            else:
                inp.grad += g


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, n in enumerate(shape):
        if n == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


# ---------- Elementwise ----------
def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    return _op(a.data + b.data, (a, b),
               lambda g: (_unbroadcast(g, a.data.shape), _unbroadcast(g, b.data.shape)))


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    return _op(a.data - b.data, (a, b),
               lambda g: (_unbroadcast(g, a.data.shape), -_unbroadcast(g, b.data.shape)))


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    return _op(a.data * b.data, (a, b),
               lambda g: (_unbroadcast(g * b.data, a.data.shape),
                          _unbroadcast(g * a.data, b.data.shape)))


def scale(a, c: float) -> Tensor:
    a = as_tensor(a)
    return _op(a.data * c, (a,), lambda g: (g * c,))


def maximum(a, b) -> Tensor:
    """Elementwise max; ties route the gradient to ``a``."""
    a, b = as_tensor(a), as_tensor(b)
    if a.dims != b.dims:
        raise ShapeError(f"maximum: dims {a.dims} and {b.dims} differ")
    take_a = a.data >= b.data
    return _op(np.where(take_a, a.data, b.data), (a, b),
               lambda g: (np.where(take_a, g, 0.0), np.where(take_a, 0.0, g)))


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def sigmoid(x) -> Tensor:
    x = as_tensor(x)
    s = _sigmoid(np.atleast_1d(x.data)).reshape(x.data.shape)
    return _op(s, (x,), lambda g: (g * s * (1.0 - s),))


def tanh(x) -> Tensor:
    x = as_tensor(x)
    t = np.tanh(x.data)
    return _op(t, (x,), lambda g: (g * (1.0 - t * t),))


def log(x) -> Tensor:
    x = as_tensor(x)
    safe = np.maximum(x.data, TINY)
    return _op(np.log(safe), (x,), lambda g: (g / safe,))


def softmax(x, axis: int = -1) -> Tensor:
    x = as_tensor(x)
    if x.data.ndim == 0 or not -x.data.ndim <= axis < x.data.ndim:
        raise ShapeError(f"softmax: axis {axis} invalid for dims {x.dims}")
    z = x.data - x.data.max(axis=axis, keepdims=True)
    e = np.exp(z)
    s = e / e.sum(axis=axis, keepdims=True)
    return _op(s, (x,), lambda g: (s * (g - (g * s).sum(axis=axis, keepdims=True)),))


# ---------- Linear algebra & structure ----------
def matmul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    A, B = a.data, b.data
    if A.shape[-1] != B.shape[0]:
        raise ShapeError(f"matmul: dims {a.dims} and {b.dims} do not conform")

    def back(g):
        if A.ndim == 1 and B.ndim == 1:
            return g * B, g * A
        if A.ndim == 1:
            return B @ g, np.outer(A, g)
        if B.ndim == 1:
            return np.outer(g, B), A.T @ g
        return g @ B.T, A.T @ g

    return _op(A @ B, (a, b), back)


def affine(x, W: Tensor, b: Tensor) -> Tensor:
    """y = xW + b."""
    x = as_tensor(x)
    if W.data.ndim != 2 or x.data.shape[-1] != W.data.shape[0]:
        raise ShapeError(f"affine: input dims {x.dims} do not conform to weight dims {W.dims}")
    if b.dims != (W.data.shape[1],):
        raise ShapeError(f"affine: bias dims {b.dims} do not match weight dims {W.dims}")
    return add(matmul(x, W), b)


def concat(tensors: Sequence, axis: int = -1) -> Tensor:
    ts = [as_tensor(t) for t in tensors]
    sizes = [t.data.shape[axis] for t in ts]
    cuts = np.cumsum(sizes)[:-1]
    return _op(np.concatenate([t.data for t in ts], axis=axis), ts,
               lambda g: tuple(np.split(g, cuts, axis=axis)))


def stack(tensors: Sequence) -> Tensor:
    ts = [as_tensor(t) for t in tensors]
    return _op(np.stack([t.data for t in ts]), ts, lambda g: tuple(g[i] for i in range(len(ts))))


def index(x, key) -> Tensor:
    """Basic numpy indexing (ints and slices)."""
    x = as_tensor(x)

    def back(g):
        full = np.zeros_like(x.data)
        full[key] += g
        return (full,)

    return _op(np.array(x.data[key], copy=True), (x,), back)


def embed(table: Tensor, ids: Sequence[int]) -> Tensor:
    ids = np.asarray(ids, dtype=np.int64)

    def back(g):
        full = np.zeros_like(table.data)
        np.add.at(full, ids, g)
        return (full,)

    return _op(table.data[ids], (table,), back)


def total(x) -> Tensor:
    x = as_tensor(x)
    return _op(np.asarray(x.data.sum()), (x,), lambda g: (np.full_like(x.data, float(g)),))


def dropout(x: Tensor, rate: float, rng: np.random.Generator | None) -> Tensor:
    if rng is None or rate <= 0.0:
        return x
    mask = (rng.random(x.data.shape) >= rate) / (1.0 - rate)
    return mul(x, Tensor(mask))


# ---------- Recurrent cell & attention ----------
@dataclass
class LSTMParams:
    W_x: Parameter
    W_h: Parameter
    b: Parameter

    @property
    def hidden(self) -> int:
        return self.W_h.data.shape[0]

    def parameters(self) -> list[Parameter]:
        return [self.W_x, self.W_h, self.b]


def lstm_cell(x_t, h_prev, c_prev, params: LSTMParams) -> tuple[Tensor, Tensor]:
    """One LSTM step, gates ordered (input, forget, candidate, output)."""
    x_t, h_prev, c_prev = as_tensor(x_t), as_tensor(h_prev), as_tensor(c_prev)
    H = params.hidden
    if x_t.dims != (params.W_x.data.shape[0],):
        raise ShapeError(f"lstm_cell: input dims {x_t.dims} vs weight dims {params.W_x.dims}")
    if h_prev.dims != (H,) or c_prev.dims != (H,):
        raise ShapeError(f"lstm_cell: state dims {h_prev.dims}/{c_prev.dims} vs hidden ({H},)")
    Wx, Wh, b = params.W_x.data, params.W_h.data, params.b.data
    x, h, c = x_t.data, h_prev.data, c_prev.data

    z = x @ Wx + h @ Wh + b
    i = _sigmoid(z[:H])
    f = _sigmoid(z[H:2 * H])
    gc = np.tanh(z[2 * H:3 * H])
    o = _sigmoid(z[3 * H:])
    c_t = f * c + i * gc
    tc = np.tanh(c_t)
    h_t = o * tc

    def back(grads):
        dh, dc = grads
        dc = dc + dh * o * (1.0 - tc * tc)
        dz = np.concatenate([
            dc * gc * i * (1.0 - i),
            dc * c * f * (1.0 - f),
            dc * i * (1.0 - gc * gc),
            dh * tc * o * (1.0 - o),
        ])
        return Wx @ dz, Wh @ dz, dc * f, np.outer(x, dz), np.outer(h, dz), dz

    return _emit((h_t, c_t), (x_t, h_prev, c_prev, params.W_x, params.W_h, params.b), back)


@dataclass
class AttentionParams:
    W_s: Parameter
    W_h: Parameter
    v: Parameter

    def parameters(self) -> list[Parameter]:
        return [self.W_s, self.W_h, self.v]


def attend(scores, keys) -> tuple[Tensor, Tensor]:
    """Normalize scores over source positions and pool the keys."""
    keys = as_tensor(keys)
    if keys.data.ndim != 2 or keys.data.shape[0] == 0:
        raise ShapeError(f"attention needs a nonempty source, got key dims {keys.dims}")
    weights = softmax(scores)
    return matmul(weights, keys), weights


def attention_scores(query, keys, params: AttentionParams, key_proj: Tensor | None = None) -> Tensor:
    """score_i = v . tanh(W_s s_t + W_h k_i); ``key_proj`` caches keys @ W_h."""
    keys = as_tensor(keys)
    if keys.data.ndim != 2 or keys.data.shape[0] == 0:
        raise ShapeError(f"attention needs a nonempty source, got key dims {keys.dims}")
    if key_proj is None:
        key_proj = matmul(keys, params.W_h)
    return matmul(tanh(add(key_proj, matmul(query, params.W_s))), params.v)


def additive_attention(query, keys, params: AttentionParams,
                       key_proj: Tensor | None = None) -> tuple[Tensor, Tensor]:
    return attend(attention_scores(query, keys, params, key_proj), keys)


# ---------- Losses ----------
def nll(P: Tensor, target: int) -> Tensor:
    """-log P[target] for a distribution P."""
    p = max(float(P.data[target]), TINY)

    def back(g):
        full = np.zeros_like(P.data)
        full[target] = -float(g) / p
        return (full,)

    return _op(np.asarray(-np.log(p)), (P,), back)


def bce_with_logits(z: Tensor, y) -> Tensor:
    """Summed binary cross-entropy of sigmoid(z) against 0/1 targets."""
    y = np.asarray(y, dtype=DTYPE)
    if y.shape != z.data.shape:
        raise ShapeError(f"bce: logits dims {z.dims} vs target dims {y.shape}")
    zd = z.data
    loss = np.maximum(zd, 0.0) - zd * y + np.log1p(np.exp(-np.abs(zd)))
    return _op(np.asarray(loss.sum()), (z,), lambda g: (float(g) * (_sigmoid(zd) - y),))


# ---------- Initialization & seeded streams ----------
def rng_stream(seed: int, name: str, *keys: int) -> np.random.Generator:
    """Named deterministic sub-stream of a single integer seed; ``keys`` split it further (e.g. per epoch)."""
    return np.random.default_rng([int(seed), zlib.crc32(name.encode("utf-8")), *(int(k) for k in keys)])


def xavier_uniform(rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    fan_in = shape[0]
    fan_out = shape[1] if len(shape) > 1 else shape[0]
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=shape)


class ParameterStore:
    """Ordered name -> Parameter registry owned by a model."""

    def __init__(self, rng: np.random.Generator | None = None, prefix: str = ""):
        self.rng = rng
        self.prefix = prefix
        self._params: dict[str, Parameter] = {}

    def add(self, name: str, shape: tuple[int, ...], init: str = "xavier") -> Parameter:
        full = f"{self.prefix}{name}"
        if full in self._params:
            raise KeyError(f"duplicate parameter {full!r}")
        if init == "zeros" or self.rng is None:
            value = np.zeros(shape, dtype=DTYPE)
        elif init == "xavier":
            value = xavier_uniform(self.rng, shape)
        else:
            raise ValueError(f"unknown init {init!r}")
        p = Parameter(value, full)
        self._params[full] = p
        return p

    def lstm(self, name: str, in_dim: int, hidden: int) -> LSTMParams:
        return LSTMParams(self.add(f"{name}.W_x", (in_dim, 4 * hidden)),
                          self.add(f"{name}.W_h", (hidden, 4 * hidden)),
                          self.add(f"{name}.b", (4 * hidden,), init="zeros"))

    def attention(self, name: str, query_dim: int, key_dim: int, size: int) -> AttentionParams:
        return AttentionParams(self.add(f"{name}.W_s", (query_dim, size)),
                               self.add(f"{name}.W_h", (key_dim, size)),
                               self.add(f"{name}.v", (size,), init="xavier"))

    def extend(self, other: "ParameterStore") -> None:
        for name, p in other.items():
            if name in self._params:
                raise KeyError(f"duplicate parameter {name!r}")
            self._params[name] = p

    def parameters(self) -> list[Parameter]:
        return list(self._params.values())

    def items(self):
        return self._params.items()

    def __getitem__(self, name: str) -> Parameter:
        return self._params[name]

    def __len__(self) -> int:
        return len(self._params)

    def zero_grad(self) -> None:
        for p in self._params.values():
            p.zero_grad()

    def state_dict(self) -> dict[str, np.ndarray]:
        return {name: p.data.copy() for name, p in self._params.items()}

    def load_state_dict(self, state: dict[str, np.ndarray]) -> None:
        missing = set(self._params) - set(state)
        if missing:
            raise KeyError(f"checkpoint lacks parameters: {sorted(missing)}")
        for name, p in self._params.items():
            value = np.asarray(state[name], dtype=DTYPE)
            if value.shape != p.data.shape:
                raise ShapeError(f"{name}: checkpoint dims {value.shape} vs model dims {p.dims}")
            p.data[...] = value


# ---------- Optimizers ----------
def clip_grad_norm(params: Iterable[Parameter], max_norm: float = GRAD_CLIP_NORM) -> float:
    params = list(params)
    norm = float(np.sqrt(sum(float((p.grad * p.grad).sum()) for p in params)))
    if max_norm > 0 and norm > max_norm:
        factor = max_norm / (norm + 1e-12)
        for p in params:
            p.grad *= factor
    return norm


def sgd_step(params: Iterable[Parameter], lr: float) -> None:
    for p in params:
        p.data -= lr * p.grad


@dataclass
class AdamState:
    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]
    t: int = 0

    @classmethod
    def empty(cls) -> "AdamState":
        return cls({}, {}, 0)


def adam_step(params: Iterable[Parameter], lr: float, state: AdamState,
              beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8) -> None:
    state.t += 1
    c1 = 1.0 - beta1 ** state.t
    c2 = 1.0 - beta2 ** state.t
    for p in params:
        m = state.m.setdefault(p.name, np.zeros_like(p.data))
        v = state.v.setdefault(p.name, np.zeros_like(p.data))
        m *= beta1
        m += (1.0 - beta1) * p.grad
        v *= beta2
        v += (1.0 - beta2) * p.grad * p.grad
        p.data -= lr * (m / c1) / (np.sqrt(v / c2) + eps)


class Optimizer:
    """SGD or Adam over a fixed parameter list, with global-norm clipping."""

    def __init__(self, params: Sequence[Parameter], kind: str = "adam", lr: float = 1e-3,
                 clip: float = GRAD_CLIP_NORM, beta1: float = 0.9, beta2: float = 0.999,
                 eps: float = 1e-8):
        if kind not in ("sgd", "adam"):
            raise ValueError(f"unknown optimizer {kind!r}")
        self.params = list(params)
        self.kind, self.lr, self.clip = kind, lr, clip
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.state = AdamState.empty()

    def zero_grad(self) -> None:
        for p in self.params:
            p.zero_grad()

    def step(self, loss_scale: float = 1.0) -> float:
        if loss_scale != 1.0:
            for p in self.params:
                p.grad *= loss_scale
        norm = clip_grad_norm(self.params, self.clip)
        if self.kind == "sgd":
            sgd_step(self.params, self.lr)
        else:
            adam_step(self.params, self.lr, self.state, self.beta1, self.beta2, self.eps)
        return norm

    def state_dict(self) -> dict[str, np.ndarray]:
        out = {f"optim.m/{k}": v.copy() for k, v in self.state.m.items()}
        out.update({f"optim.v/{k}": v.copy() for k, v in self.state.v.items()})
        out["optim.t"] = np.asarray([float(self.state.t)])
        return out

    def load_state_dict(self, state: dict[str, np.ndarray]) -> None:
        self.state = AdamState(
            {k[len("optim.m/"):]: v.copy() for k, v in state.items() if k.startswith("optim.m/")},
            {k[len("optim.v/"):]: v.copy() for k, v in state.items() if k.startswith("optim.v/")},
            int(state["optim.t"][0]) if "optim.t" in state else 0,
        )


# ---------- Gradient check ----------
def gradient_check(loss_fn: Callable[[], Tensor], params: Sequence[Parameter],
                   epsilon: float = 1e-5, floor: float = 1e-6) -> float:
    """
    Max over all parameter entries of |g_a - g_fd| / max(|g_a|, |g_fd|, floor),
    with g_fd from central differences. ``loss_fn`` must be deterministic.
    """
    for p in params:
        p.zero_grad()
    with Tape() as tape:
        loss = loss_fn()
    tape.backward(loss)
    analytic = [p.grad.copy() for p in params]

    worst = 0.0
    for p, ga in zip(params, analytic):
        flat = p.data.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + epsilon
            plus = loss_fn().item()
            flat[i] = orig - epsilon
            minus = loss_fn().item()
            flat[i] = orig
            fd = (plus - minus) / (2.0 * epsilon)
            a = float(ga.reshape(-1)[i])
            err = abs(a - fd) / max(abs(a), abs(fd), floor)
            worst = max(worst, err)
    return worst


# ---------- Checkpoint container ----------
def save_checkpoint(path: str | Path, tensors: dict[str, np.ndarray], metadata: dict | None = None) -> None:
    """
    Layout (little-endian): magic, u32 version, u32 metadata length, metadata JSON,
    u32 entry count, then per entry u32 name length, name, u32 ndim, u32 dims...,
    row-major f64 payload.
    """
    meta = json.dumps(metadata or {}, sort_keys=True, separators=(",", ":")).encode("utf-8")
    parts = [CHECKPOINT_MAGIC, struct.pack("<II", CHECKPOINT_VERSION, len(meta)), meta,
             struct.pack("<I", len(tensors))]
    for name in sorted(tensors):
        arr = np.ascontiguousarray(tensors[name], dtype="<f8")
        raw = name.encode("utf-8")
        parts.append(struct.pack("<I", len(raw)))
        parts.append(raw)
        parts.append(struct.pack(f"<I{arr.ndim}I", arr.ndim, *arr.shape))
        parts.append(arr.tobytes(order="C"))
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_bytes(b"".join(parts))
    logger.info("wrote checkpoint %s (%d tensors)", path, len(tensors))


def load_checkpoint(path: str | Path) -> tuple[dict[str, np.ndarray], dict]:
    blob = Path(path).read_bytes()
    if blob[:8] != CHECKPOINT_MAGIC:
        raise ValueError(f"{path}: not an elhyb checkpoint")
    pos = 8
    version, meta_len = struct.unpack_from("<II", blob, pos)
    pos += 8
    if version != CHECKPOINT_VERSION:
        raise ValueError(f"{path}: unsupported checkpoint version {version}")
    metadata = json.loads(blob[pos:pos + meta_len].decode("utf-8"))
    pos += meta_len
    (count,) = struct.unpack_from("<I", blob, pos)
    pos += 4
    tensors: dict[str, np.ndarray] = {}
    for _ in range(count):
        (name_len,) = struct.unpack_from("<I", blob, pos)
        pos += 4
        name = blob[pos:pos + name_len].decode("utf-8")
        pos += name_len
        (ndim,) = struct.unpack_from("<I", blob, pos)
        pos += 4
        dims = struct.unpack_from(f"<{ndim}I", blob, pos)
        pos += 4 * ndim
        n = int(np.prod(dims)) if ndim else 1
        tensors[name] = np.frombuffer(blob, dtype="<f8", count=n, offset=pos).reshape(dims).astype(DTYPE)
        pos += 8 * n
    return tensors, metadata


@dataclass(frozen=True)
class OptimizerConfig:
    kind: str = "adam"
    lr: float = 1e-3
    batch_size: int = 16
    epochs: int = 10
    clip: float = GRAD_CLIP_NORM

    def __post_init__(self):
        if self.kind not in ("sgd", "adam"):
            raise ValueError(f"unknown optimizer {self.kind!r}")
        if self.lr <= 0 or self.batch_size < 1 or self.epochs < 0:
            raise ValueError("lr and batch_size must be positive, epochs non-negative")

    def build(self, params: Sequence[Parameter]) -> Optimizer:
        return Optimizer(params, kind=self.kind, lr=self.lr, clip=self.clip)
