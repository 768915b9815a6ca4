"""From-scratch stacked LSTM forecaster.

Implements the gate equations directly on numpy float64 arrays: input,
forget, and output gates plus a tanh candidate over the concatenation
[h_prev, x_t], a configurable LSTM/dropout/dense stack, exact
backpropagation through time, ADAM with bias correction, and lossless
JSON checkpoints. No autodiff framework is involved; gradients are
derived analytically and verified against finite differences in the tests.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "LstmLayerParams",
    "DenseParams",
    "LstmState",
    "NetworkConfig",
    "AdamState",
    "TrainSettings",
    "TrainReport",
    "TrainingDiverged",
    "init_params",
    "lstm_cell_forward",
    "network_forward",
    "forward_batch",
    "mse_loss",
    "backward",
    "adam_step",
    "train",
    "predict",
    "iter_param_arrays",
    "zeros_like_params",
    "save_checkpoint",
    "load_checkpoint",
    "Checkpoint",
]

DEFAULT_STACK = ("lstm", "dropout", "lstm", "lstm", "dropout", "dense")

_LSTM_FIELDS = ("W_i", "W_c", "W_f", "W_o", "b_i", "b_c", "b_f", "b_o")


class TrainingDiverged(RuntimeError):
    """Training loss became non-finite."""


def _sigmoid(x: np.ndarray) -> np.ndarray:
    # Split by sign so exp never overflows.
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    expx = np.exp(x[~pos])
    out[~pos] = expx / (1.0 + expx)
    return out


@dataclass(eq=False)
class LstmLayerParams:
    """Gate weight matrices over [h_prev, x_t] plus per-gate bias vectors.

    Each W has shape (hidden, hidden + input); the first ``hidden`` columns
    act on the previous hidden state and the rest on the current input.
    """

    W_i: np.ndarray
    W_c: np.ndarray
    W_f: np.ndarray
    W_o: np.ndarray
    b_i: np.ndarray
    b_c: np.ndarray
    b_f: np.ndarray
    b_o: np.ndarray

    def __post_init__(self) -> None:
        for name in _LSTM_FIELDS:
            setattr(self, name, np.asarray(getattr(self, name), dtype=np.float64))
        h, width = self.W_i.shape
        if width <= h:
            raise ValueError("weight width must exceed hidden size (needs input columns)")
        for name in ("W_c", "W_f", "W_o"):
            if getattr(self, name).shape != (h, width):
                raise ValueError(f"{name} shape differs from W_i")
        for name in ("b_i", "b_c", "b_f", "b_o"):
            if getattr(self, name).shape != (h,):
                raise ValueError(f"{name} must have length {h}")

    def validate_finite(self) -> "LstmLayerParams":
        # Gradient containers reuse this class and may legitimately hold
        # non-finite values mid-divergence; model parameters must not.
        if not all(np.all(np.isfinite(getattr(self, n))) for n in _LSTM_FIELDS):
            raise ValueError("parameters must be finite")
        return self

    @property
    def hidden_size(self) -> int:
        return self.W_i.shape[0]

    @property
    def input_size(self) -> int:
        return self.W_i.shape[1] - self.W_i.shape[0]

    def fused(self) -> tuple[np.ndarray, np.ndarray]:
        """Stack the four gate weights/biases (order i, c, f, o) for one matmul."""
        W = np.concatenate([self.W_i, self.W_c, self.W_f, self.W_o], axis=0)
        b = np.concatenate([self.b_i, self.b_c, self.b_f, self.b_o])
        return W, b


@dataclass(eq=False)
class DenseParams:
    """Output head mapping the final hidden vector to the prediction."""

    W: np.ndarray
    b: np.ndarray

    def __post_init__(self) -> None:
        self.W = np.asarray(self.W, dtype=np.float64)
        self.b = np.asarray(self.b, dtype=np.float64)
        if self.W.ndim != 2 or self.b.shape != (self.W.shape[0],):
            raise ValueError("dense W must be (out, in) with matching bias")


@dataclass(frozen=True, eq=False)
class LstmState:
    """Hidden and cell vectors plus the per-step gate caches for backprop."""

    h: np.ndarray
    c: np.ndarray
    i: np.ndarray | None = None
    f: np.ndarray | None = None
    o: np.ndarray | None = None
    c_hat: np.ndarray | None = None

    @classmethod
    def initial(cls, hidden: int) -> "LstmState":
        return cls(np.zeros(hidden), np.zeros(hidden))


@dataclass(frozen=True)
class NetworkConfig:
    """Layer stack descriptor plus widths and the dropout rate.

    The default stack is LSTM, dropout, LSTM, LSTM, dropout, dense with one
    hidden size per LSTM layer. Input width is 1 price channel plus 4 news
    source channels; output width is the single predicted value.
    """

    stack: tuple[str, ...] = DEFAULT_STACK
    hidden_sizes: tuple[int, ...] = (32, 32, 32)
    dropout_rate: float = 0.2
    input_width: int = 5
    output_width: int = 1

    def __post_init__(self) -> None:
        if not self.stack or self.stack[-1] != "dense":
            raise ValueError("stack must end with a dense layer")
        if self.stack.count("dense") != 1:
            raise ValueError("stack must contain exactly one dense layer")
        if self.stack[0] != "lstm":
            raise ValueError("stack must start with an LSTM layer")
        unknown = set(self.stack) - {"lstm", "dropout", "dense"}
        if unknown:
            raise ValueError(f"unknown layer kinds: {sorted(unknown)}")
        if self.stack.count("lstm") != len(self.hidden_sizes):
            raise ValueError("need one hidden size per LSTM layer")
        if any(h < 1 for h in self.hidden_sizes):
            raise ValueError("hidden sizes must be positive")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout rate must lie in [0, 1)")
        if self.input_width < 1 or self.output_width < 1:
            raise ValueError("widths must be positive")

    def to_dict(self) -> dict:
        return {
            "stack": list(self.stack),
            "hidden_sizes": list(self.hidden_sizes),
            "dropout_rate": self.dropout_rate,
            "input_width": self.input_width,
            "output_width": self.output_width,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "NetworkConfig":
        return cls(
            stack=tuple(data["stack"]),
            hidden_sizes=tuple(data["hidden_sizes"]),
            dropout_rate=float(data["dropout_rate"]),
            input_width=int(data["input_width"]),
            output_width=int(data["output_width"]),
        )


def init_params(config: NetworkConfig, rng: np.random.Generator) -> list:
    """Seeded initialization: uniform(-k, k) with k = 1/sqrt(fan_in).

    Biases start at zero except the forget gate's, which starts at +1 so the
    cell initially carries memory forward. Draw order is fixed, so a given
    generator state always yields identical parameters.
    """
    params: list = []
    width = config.input_width
    lstm_idx = 0
    for kind in config.stack:
        if kind == "lstm":
            hidden = config.hidden_sizes[lstm_idx]
            lstm_idx += 1
            fan_in = hidden + width
            k = 1.0 / math.sqrt(fan_in)
            weights = [rng.uniform(-k, k, size=(hidden, fan_in)) for _ in range(4)]
            params.append(
                LstmLayerParams(
                    *weights,
                    b_i=np.zeros(hidden),
                    b_c=np.zeros(hidden),
                    b_f=np.ones(hidden),
                    b_o=np.zeros(hidden),
                )
            )
            width = hidden
        elif kind == "dropout":
            params.append(None)
        else:
            k = 1.0 / math.sqrt(width)
            params.append(
                DenseParams(
                    W=rng.uniform(-k, k, size=(config.output_width, width)),
                    b=np.zeros(config.output_width),
                )
            )
    return params


def lstm_cell_forward(
    params: LstmLayerParams, x_t: np.ndarray, state: LstmState
) -> tuple[LstmState, np.ndarray]:
    """One LSTM step on a single input vector.

    Computes i, candidate, f, new cell (f*c_prev + i*candidate), o, and
    h = o * tanh(c), caching the gate activations in the returned state.
    Raises on shape mismatch or non-finite results (exploding values).
    """
    x = np.asarray(x_t, dtype=np.float64)
    if x.shape != (params.input_size,):
        raise ValueError(f"expected input of shape ({params.input_size},), got {x.shape}")
    if state.h.shape != (params.hidden_size,):
        raise ValueError("state does not match the layer's hidden size")
    z = np.concatenate([state.h, x])
    i_t = _sigmoid(params.W_i @ z + params.b_i)
    c_hat = np.tanh(params.W_c @ z + params.b_c)
    f_t = _sigmoid(params.W_f @ z + params.b_f)
    c_t = f_t * state.c + i_t * c_hat
    o_t = _sigmoid(params.W_o @ z + params.b_o)
    h_t = o_t * np.tanh(c_t)
    if not (np.all(np.isfinite(c_t)) and np.all(np.isfinite(h_t))):
        raise ArithmeticError("non-finite LSTM state (exploding values)")
    assert np.all((i_t >= 0) & (i_t <= 1)) and np.all((f_t >= 0) & (f_t <= 1))
    assert np.all((o_t >= 0) & (o_t <= 1)) and np.all(np.abs(c_hat) <= 1)
    new_state = LstmState(h=h_t, c=c_t, i=i_t, f=f_t, o=o_t, c_hat=c_hat)
    return new_state, h_t


def _lstm_forward_sequence(params: LstmLayerParams, X: np.ndarray) -> tuple[np.ndarray, dict]:
    """Run a layer over a (batch, time, input) block, caching per-step values."""
    B, T, _ = X.shape
    H = params.hidden_size
    Wz, bz = params.fused()
    h = np.zeros((B, H))
    c = np.zeros((B, H))
    cache = {"z": [], "i": [], "f": [], "o": [], "c_hat": [], "c_prev": [], "tanh_c": []}
    hs = np.empty((B, T, H))
    for t in range(T):
        z = np.concatenate([h, X[:, t, :]], axis=1)
        a = z @ Wz.T + bz
        a_i, a_c, a_f, a_o = np.split(a, 4, axis=1)
        i_t = _sigmoid(a_i)
        c_hat = np.tanh(a_c)
        f_t = _sigmoid(a_f)
        c_new = f_t * c + i_t * c_hat
        o_t = _sigmoid(a_o)
        tanh_c = np.tanh(c_new)
        h = o_t * tanh_c
        if not np.all(np.isfinite(h)):
            raise ArithmeticError("non-finite LSTM state (exploding values)")
        assert np.all((i_t >= 0) & (i_t <= 1)) and np.all((f_t >= 0) & (f_t <= 1))
        assert np.all((o_t >= 0) & (o_t <= 1)) and np.all(np.abs(c_hat) <= 1)
        cache["z"].append(z)
        cache["i"].append(i_t)
        cache["f"].append(f_t)
        cache["o"].append(o_t)
        cache["c_hat"].append(c_hat)
        cache["c_prev"].append(c)
        cache["tanh_c"].append(tanh_c)
        c = c_new
        hs[:, t, :] = h
    return hs, cache


def _lstm_backward_sequence(
    params: LstmLayerParams, cache: dict, d_hs: np.ndarray
) -> tuple[np.ndarray, LstmLayerParams]:
    """Exact BPTT through one layer given gradients on every step's output."""
    B, T, H = d_hs.shape
    Wz, _ = params.fused()
    width = Wz.shape[1]
    dWz = np.zeros((4 * H, width))
    dbz = np.zeros(4 * H)
    dX = np.empty((B, T, width - H))
    dh_next = np.zeros((B, H))
    dc_next = np.zeros((B, H))
    for t in range(T - 1, -1, -1):
        i_t = cache["i"][t]
        f_t = cache["f"][t]
        o_t = cache["o"][t]
        c_hat = cache["c_hat"][t]
        c_prev = cache["c_prev"][t]
        tanh_c = cache["tanh_c"][t]
        z = cache["z"][t]
        dh = d_hs[:, t, :] + dh_next
        do = dh * tanh_c
        dc = dc_next + dh * o_t * (1.0 - tanh_c * tanh_c)
        di = dc * c_hat
        dch = dc * i_t
        df = dc * c_prev
        dc_next = dc * f_t
        da = np.concatenate(
            [
                di * i_t * (1.0 - i_t),
                dch * (1.0 - c_hat * c_hat),
                df * f_t * (1.0 - f_t),
                do * o_t * (1.0 - o_t),
            ],
            axis=1,
        )
        dWz += da.T @ z
        dbz += da.sum(axis=0)
        dz = da @ Wz
        dh_next = dz[:, :H]
        dX[:, t, :] = dz[:, H:]
    dW_i, dW_c, dW_f, dW_o = np.split(dWz, 4, axis=0)
    db_i, db_c, db_f, db_o = np.split(dbz, 4)
    grads = LstmLayerParams(dW_i, dW_c, dW_f, dW_o, db_i, db_c, db_f, db_o)
    return dX, grads


def _sequence_flags(stack: tuple[str, ...]) -> list[bool]:
    """Whether each LSTM layer must emit the full sequence (a later LSTM needs it)."""
    flags = []
    lstm_positions = [k for k, kind in enumerate(stack) if kind == "lstm"]
    for pos in lstm_positions:
        flags.append(any(stack[j] == "lstm" for j in range(pos + 1, len(stack))))
    return flags


def forward_batch(
    config: NetworkConfig,
    params: list,
    inputs: np.ndarray,
    mode: str = "eval",
    rng: np.random.Generator | None = None,
) -> tuple[np.ndarray, dict]:
    """Run the stack over a (batch, time, input_width) block.

    In train mode, dropout layers sample inverted-dropout masks from ``rng``
    (skipped entirely at rate 0, so rate-0 train and eval agree bitwise).
    Eval mode is deterministic. Returns per-window predictions and the
    caches that :func:`backward` consumes.
    """
    X = np.asarray(inputs, dtype=np.float64)
    if X.ndim != 3 or X.shape[2] != config.input_width:
        raise ValueError(f"inputs must be (batch, time, {config.input_width})")
    if mode not in ("train", "eval"):
        raise ValueError("mode must be 'train' or 'eval'")
    sample_masks = mode == "train" and config.dropout_rate > 0.0
    if sample_masks and rng is None:
        raise ValueError("train-mode dropout needs a seeded generator")
    if len(params) != len(config.stack):
        raise ValueError("parameter list does not match the layer stack")
    seq_flags = iter(_sequence_flags(config.stack))
    data = X
    layer_caches: list = []
    for kind, layer in zip(config.stack, params):
        if kind == "lstm":
            return_sequence = next(seq_flags)
            hs, cache = _lstm_forward_sequence(layer, data)
            cache["return_sequence"] = return_sequence
            cache["T"] = data.shape[1]
            layer_caches.append(cache)
            data = hs if return_sequence else hs[:, -1, :]
        elif kind == "dropout":
            if sample_masks:
                keep = 1.0 - config.dropout_rate
                mask = (rng.random(data.shape) < keep) / keep
                data = data * mask
                layer_caches.append(mask)
            else:
                layer_caches.append(None)
        else:
            layer_caches.append(data)  # dense input
            data = data @ layer.W.T + layer.b
    preds = data[:, 0] if config.output_width == 1 else data
    caches = {"inputs": X, "layers": layer_caches, "preds": preds}
    return preds, caches


def network_forward(
    config: NetworkConfig,
    params: list,
    window: np.ndarray,
    mode: str = "eval",
    rng: np.random.Generator | None = None,
) -> float:
    """Prediction for a single (time, input_width) window."""
    w = np.asarray(window, dtype=np.float64)
    if w.ndim != 2:
        raise ValueError("window must be a (time, input_width) matrix")
    preds, _ = forward_batch(config, params, w[None, :, :], mode=mode, rng=rng)
    return float(preds[0])


def mse_loss(predictions, targets) -> float:
    """Mean of squared differences."""
    p = np.asarray(predictions, dtype=np.float64)
    t = np.asarray(targets, dtype=np.float64)
    if p.shape != t.shape:
        raise ValueError(f"length mismatch: {p.shape} vs {t.shape}")
    if p.size == 0:
        raise ValueError("cannot take the MSE of empty sequences")
    d = p - t
    return float(np.mean(d * d))


def backward(config: NetworkConfig, params: list, caches: dict, targets) -> tuple[float, list]:
    """Loss value and exact gradients of the mean squared error.

    ``caches`` must come from a :func:`forward_batch` call on the same
    parameters; dropout masks recorded there are reused so the gradient
    matches that exact forward pass.
    """
    if not caches or "layers" not in caches:
        raise ValueError("forward caches missing; run forward_batch first")
    if config.output_width != 1:
        raise ValueError("backward supports the single-output head only")
    preds = caches["preds"]
    y = np.asarray(targets, dtype=np.float64)
    loss = mse_loss(preds, y)
    B = len(preds)
    d_data = ((2.0 / B) * (preds - y))[:, None]  # (B, out)
    grads: list = [None] * len(config.stack)
    for idx in range(len(config.stack) - 1, -1, -1):
        kind = config.stack[idx]
        layer_cache = caches["layers"][idx]
        if kind == "dense":
            dense_in = layer_cache
            layer = params[idx]
            grads[idx] = DenseParams(W=d_data.T @ dense_in, b=d_data.sum(axis=0))
            d_data = d_data @ layer.W
        elif kind == "dropout":
            if layer_cache is not None:
                d_data = d_data * layer_cache
        else:
            if layer_cache["return_sequence"]:
                d_hs = d_data
            else:
                d_hs = np.zeros((d_data.shape[0], layer_cache["T"], d_data.shape[1]))
                d_hs[:, -1, :] = d_data
            d_data, grads[idx] = _lstm_backward_sequence(params[idx], layer_cache, d_hs)
    return loss, grads


def iter_param_arrays(params: list):
    """Yield (layer_index, field_name, array) over every trainable tensor."""
    for idx, layer in enumerate(params):
        if layer is None:
            continue
        if isinstance(layer, LstmLayerParams):
            for name in _LSTM_FIELDS:
                yield idx, name, getattr(layer, name)
        else:
            yield idx, "W", layer.W
            yield idx, "b", layer.b


def zeros_like_params(params: list) -> list:
    out: list = []
    for layer in params:
        if layer is None:
            out.append(None)
        elif isinstance(layer, LstmLayerParams):
            out.append(
                LstmLayerParams(*[np.zeros_like(getattr(layer, n)) for n in _LSTM_FIELDS])
            )
        else:
            out.append(DenseParams(np.zeros_like(layer.W), np.zeros_like(layer.b)))
    return out


@dataclass
class AdamState:
    """First/second moment accumulators plus the step counter and settings."""

    m: list
    v: list
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    learning_rate: float = 1e-3

    def __post_init__(self) -> None:
        if not (0.0 <= self.beta1 < 1.0 and 0.0 <= self.beta2 < 1.0):
            raise ValueError("betas must lie in [0, 1)")
        if self.t < 0:
            raise ValueError("step counter must be non-negative")

    @classmethod
    def for_params(
        cls,
        params: list,
        learning_rate: float = 1e-3,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ) -> "AdamState":
        return cls(
            m=zeros_like_params(params),
            v=zeros_like_params(params),
            beta1=beta1,
            beta2=beta2,
            eps=eps,
            learning_rate=learning_rate,
        )


def adam_step(state: AdamState, params: list, grads: list) -> tuple[list, AdamState]:
    """Bias-corrected ADAM update, in place on ``params`` and ``state``."""
    for idx, name, g in iter_param_arrays(grads):
        if not np.all(np.isfinite(g)):
            raise ValueError(f"non-finite gradient in layer {idx} field {name}")
    state.t += 1
    bc1 = 1.0 - state.beta1**state.t
    bc2 = 1.0 - state.beta2**state.t
    for (idx, name, theta), (_, _, g), (_, _, m), (_, _, v) in zip(
        iter_param_arrays(params),
        iter_param_arrays(grads),
        iter_param_arrays(state.m),
        iter_param_arrays(state.v),
    ):
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)
        m_hat = m / bc1
        v_hat = v / bc2
        theta -= state.learning_rate * m_hat / (np.sqrt(v_hat) + state.eps)
    return params, state


@dataclass(frozen=True)
class TrainSettings:
    """Epoch count, learning rate, seed, batching, and optional early stop."""

    epochs: int = 200
    learning_rate: float = 1e-3
    seed: int = 0
    batch_size: int | None = None
    early_stop_patience: int | None = None

    def __post_init__(self) -> None:
        if self.epochs < 0:
            raise ValueError("epochs must be non-negative")
        if self.batch_size is not None and self.batch_size < 1:
            raise ValueError("batch size must be positive")


@dataclass(frozen=True)
class TrainReport:
    """Per-epoch training losses, the final parameters, and the seed used."""

    losses: tuple[float, ...]
    params: list
    seed: int


def train(config: NetworkConfig, dataset, settings: TrainSettings) -> TrainReport:
    """Train on a windowed dataset with seeded init and full-batch ADAM.

    One generator seeded by ``settings.seed`` drives initialization, batch
    shuffling, and dropout masks, so identical settings reproduce the exact
    same report. The recorded loss per epoch is the training MSE under the
    parameters at that epoch's start. Divergence (non-finite loss) aborts.
    """
    windows = dataset.train if hasattr(dataset, "train") else tuple(dataset)
    if not windows:
        raise ValueError("training dataset is empty")
    X = np.stack([w.input for w in windows]).astype(np.float64)
    y = np.array([w.target for w in windows], dtype=np.float64)
    rng = np.random.default_rng(settings.seed)
    params = init_params(config, rng)
    adam = AdamState.for_params(params, learning_rate=settings.learning_rate)
    B = len(windows)
    full_batch = settings.batch_size is None or settings.batch_size >= B
    losses: list[float] = []
    best = math.inf
    stale = 0
    for epoch in range(settings.epochs):
        if full_batch:
            order = np.arange(B)
        else:
            order = rng.permutation(B)
        epoch_sq_sum = 0.0
        for start in range(0, B, B if full_batch else settings.batch_size):
            batch = order[start : start + (B if full_batch else settings.batch_size)]
            preds, caches = forward_batch(config, params, X[batch], mode="train", rng=rng)
            if not math.isfinite(mse_loss(preds, y[batch])):
                raise TrainingDiverged(
                    f"loss became non-finite at epoch {epoch} (batch start {start})"
                )
            loss, grads = backward(config, params, caches, y[batch])
            epoch_sq_sum += loss * len(batch)
            adam_step(adam, params, grads)
        losses.append(epoch_sq_sum / B)
        if settings.early_stop_patience is not None:
            if losses[-1] < best - 1e-12:
                best = losses[-1]
                stale = 0
            else:
                stale += 1
                if stale >= settings.early_stop_patience:
                    break
    return TrainReport(tuple(losses), params, settings.seed)


def predict(config: NetworkConfig, params: list, windows) -> np.ndarray:
    """Eval-mode prediction per window, in normalized units.

    Accepts a sequence of Window objects or a pre-stacked (batch, time,
    input_width) array. Windows are independent: permuting them permutes
    the outputs identically.
    """
    if isinstance(windows, np.ndarray):
        X = windows
    else:
        seq = list(windows)
        if not seq:
            return np.empty(0)
        X = np.stack([getattr(w, "input", w) for w in seq]).astype(np.float64)
    preds, _ = forward_batch(config, params, X, mode="eval")
    return preds


def _encode_array(a: np.ndarray) -> dict:
    return {"shape": list(a.shape), "data": a.ravel(order="C").tolist()}


def _decode_array(blob: dict) -> np.ndarray:
    return np.array(blob["data"], dtype=np.float64).reshape(blob["shape"])


def _encode_params(params: list) -> list:
    out = []
    for layer in params:
        if layer is None:
            out.append({"kind": "dropout"})
        elif isinstance(layer, LstmLayerParams):
            blob = {"kind": "lstm"}
            for name in _LSTM_FIELDS:
                blob[name] = _encode_array(getattr(layer, name))
            out.append(blob)
        else:
            out.append({"kind": "dense", "W": _encode_array(layer.W), "b": _encode_array(layer.b)})
    return out


def _decode_params(blobs: list) -> list:
    out: list = []
    for blob in blobs:
        if blob["kind"] == "dropout":
            out.append(None)
        elif blob["kind"] == "lstm":
            out.append(
                LstmLayerParams(*[_decode_array(blob[n]) for n in _LSTM_FIELDS]).validate_finite()
            )
        else:
            out.append(DenseParams(_decode_array(blob["W"]), _decode_array(blob["b"])))
    return out


@dataclass(frozen=True)
class Checkpoint:
    config: NetworkConfig
    params: list
    optimizer: AdamState | None
    seed: int | None


def save_checkpoint(
    path: str | Path,
    config: NetworkConfig,
    params: list,
    optimizer: AdamState | None = None,
    seed: int | None = None,
) -> None:
    """Write a versioned JSON checkpoint; float64 values round-trip exactly."""
    blob = {
        "format_version": 1,
        "config": config.to_dict(),
        "layers": _encode_params(params),
        "optimizer": None
        if optimizer is None
        else {
            "t": optimizer.t,
            "beta1": optimizer.beta1,
            "beta2": optimizer.beta2,
            "eps": optimizer.eps,
            "learning_rate": optimizer.learning_rate,
            "m": _encode_params(optimizer.m),
            "v": _encode_params(optimizer.v),
        },
        "seed": seed,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(blob, fh, sort_keys=True)
        fh.write("\n")


def load_checkpoint(path: str | Path) -> Checkpoint:
    with open(path, encoding="utf-8") as fh:
        blob = json.load(fh)
    if blob.get("format_version") != 1:
        raise ValueError(f"{path}: unsupported checkpoint version {blob.get('format_version')!r}")
    config = NetworkConfig.from_dict(blob["config"])
    params = _decode_params(blob["layers"])
    optimizer = None
    if blob["optimizer"] is not None:
        opt = blob["optimizer"]
        optimizer = AdamState(
            m=_decode_params(opt["m"]),
            v=_decode_params(opt["v"]),
            t=int(opt["t"]),
            beta1=float(opt["beta1"]),
            beta2=float(opt["beta2"]),
            eps=float(opt["eps"]),
            learning_rate=float(opt["learning_rate"]),
        )
    return Checkpoint(config, params, optimizer, blob.get("seed"))
