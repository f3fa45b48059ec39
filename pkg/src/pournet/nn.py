"""Recurrent cells, dense and dropout layers, the stacked sequence model,
and parameter packing.

Conventions fixed across the package:

  * gate kernels act on the concatenation [h_prev, x_t], state columns first;
  * LSTM gate order inside stacked arrays is (input, forget, output, candidate);
  * GRU gate order is (update z, reset r), with the candidate kernel separate;
  * recurrent layers return the full hidden sequence; at masked steps the
    state passes through unchanged and the emitted output is zero;
  * all arrays are float64.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

ACTIVATION_KINDS = ("linear", "relu", "tanh", "sigmoid", "hard_sigmoid")
RECURRENT_ACTIVATIONS = ("hard_sigmoid", "sigmoid")
LAYER_KINDS = ("lstm", "gru", "dense", "dropout")


def activation(kind: str, x):
    """Apply a named activation elementwise."""
    x = np.asarray(x, dtype=np.float64)
    if kind == "linear":
        return x.copy()
    if kind == "relu":
        return np.maximum(x, 0.0)
    if kind == "tanh":
        return np.tanh(x)
    if kind == "sigmoid":
        return expit(x)
    if kind == "hard_sigmoid":
        # Piecewise-linear sigmoid: clamp(0.2 x + 0.5, 0, 1).
        return np.clip(0.2 * x + 0.5, 0.0, 1.0)
    raise ValueError(f"unknown activation kind {kind!r}")


def activation_grad(kind: str, preact, out=None):
    """Elementwise derivative, evaluated from the preactivation.

    `out` may pass the already-computed activation to avoid recomputing it.
    """
    a = np.asarray(preact, dtype=np.float64)
    if kind == "linear":
        return np.ones_like(a)
    if kind == "relu":
        return (a > 0.0).astype(np.float64)
    if kind == "tanh":
        y = np.tanh(a) if out is None else out
        return 1.0 - y * y
    if kind == "sigmoid":
        y = expit(a) if out is None else out
        return y * (1.0 - y)
    if kind == "hard_sigmoid":
        return 0.2 * (np.abs(a) < 2.5)
    raise ValueError(f"unknown activation kind {kind!r}")


# ---------------------------------------------------------------------------
# Model description


@dataclass
class LayerSpec:
    """One layer of the stack.

    kind: lstm | gru | dense | dropout. units is the output width (ignored
    for dropout). activation squashes the candidate/cell output for
    recurrent layers and the affine output for dense layers.
    """

    kind: str
    units: int = 0
    activation: str = "tanh"
    recurrent_activation: str = "hard_sigmoid"
    rate: float = 0.0


@dataclass
class ModelSpec:
    """Ordered layer stack plus the input feature width."""

    input_dim: int
    layers: list

    def validate(self) -> None:
        if self.input_dim < 1:
            raise ValueError(f"input_dim must be >= 1 (got {self.input_dim!r})")
        if not self.layers:
            raise ValueError("model needs at least one layer")
        for i, layer in enumerate(self.layers):
            if layer.kind not in LAYER_KINDS:
                raise ValueError(f"layer {i}: unknown kind {layer.kind!r}")
            if layer.kind == "dropout":
                if not (0.0 <= layer.rate < 1.0):
                    raise ValueError(f"layer {i}: dropout rate must lie in [0, 1)")
                continue
            if layer.units < 1:
                raise ValueError(f"layer {i}: units must be >= 1")
            if layer.activation not in ACTIVATION_KINDS:
                raise ValueError(f"layer {i}: unknown activation {layer.activation!r}")
            if layer.kind in ("lstm", "gru") and layer.recurrent_activation not in RECURRENT_ACTIVATIONS:
                raise ValueError(f"layer {i}: unknown recurrent activation {layer.recurrent_activation!r}")

    def widths(self) -> list:
        """Input width of every layer, plus the final output width at the end."""
        self.validate()
        widths = [self.input_dim]
        for layer in self.layers:
            widths.append(widths[-1] if layer.kind == "dropout" else layer.units)
        return widths

    def output_dim(self) -> int:
        return self.widths()[-1]

    def to_dict(self) -> dict:
        return {
            "input_dim": self.input_dim,
            "layers": [
                {
                    "kind": l.kind,
                    "units": l.units,
                    "activation": l.activation,
                    "recurrent_activation": l.recurrent_activation,
                    "rate": l.rate,
                }
                for l in self.layers
            ],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ModelSpec":
        spec = cls(
            input_dim=int(doc["input_dim"]),
            layers=[LayerSpec(**entry) for entry in doc["layers"]],
        )
        spec.validate()
        return spec


def reference_model(cell: str = "lstm", output_activation: str = "relu") -> ModelSpec:
    """The bundled estimator preset.

    Four 16-unit recurrent layers, a 1-wide dense bottleneck, one more
    16-unit recurrent layer, dropout 0.2, and a 1-wide dense head. `cell`
    swaps the recurrent cell kind; `output_activation` sets both dense
    layers' activation. Recurrent layers always use tanh with hard-sigmoid
    gates and return full sequences.
    """
    if cell not in ("lstm", "gru"):
        raise ValueError(f"cell must be lstm or gru (got {cell!r})")
    if output_activation not in ("linear", "relu"):
        raise ValueError(f"output_activation must be linear or relu (got {output_activation!r})")
    rnn = lambda: LayerSpec(cell, units=16, activation="tanh", recurrent_activation="hard_sigmoid")
    head = lambda: LayerSpec("dense", units=1, activation=output_activation)
    return ModelSpec(
        input_dim=9,
        layers=[rnn(), rnn(), rnn(), rnn(), head(), rnn(), LayerSpec("dropout", rate=0.2), head()],
    )


def layer_param_counts(spec: ModelSpec) -> list:
    """Trainable parameter count of each layer, in stack order."""
    widths = spec.widths()
    counts = []
    for d, layer in zip(widths, spec.layers):
        u = layer.units
        if layer.kind == "lstm":
            counts.append(4 * ((d + u) * u + u))
        elif layer.kind == "gru":
            counts.append(3 * ((d + u) * u + u))
        elif layer.kind == "dense":
            counts.append((d + 1) * u)
        else:
            counts.append(0)
    return counts


def count_params(spec: ModelSpec) -> int:
    return int(sum(layer_param_counts(spec)))


# ---------------------------------------------------------------------------
# Parameters


@dataclass(eq=False)
class LstmParams:
    """Gate kernels [units, input_dim + units] over [h_prev, x_t] and biases [units]."""

    W_i: np.ndarray
    W_f: np.ndarray
    W_o: np.ndarray
    W_c: np.ndarray
    b_i: np.ndarray
    b_f: np.ndarray
    b_o: np.ndarray
    b_c: np.ndarray

    FIELDS = ("W_i", "W_f", "W_o", "W_c", "b_i", "b_f", "b_o", "b_c")

    @property
    def units(self) -> int:
        return int(self.b_i.shape[0])


@dataclass(eq=False)
class GruParams:
    """Update/reset/candidate kernels [units, input_dim + units] and biases [units].

    W_h multiplies [r * h_prev, x_t]."""

    W_z: np.ndarray
    W_r: np.ndarray
    W_h: np.ndarray
    b_z: np.ndarray
    b_r: np.ndarray
    b_h: np.ndarray

    FIELDS = ("W_z", "W_r", "W_h", "b_z", "b_r", "b_h")

    @property
    def units(self) -> int:
        return int(self.b_z.shape[0])


@dataclass(eq=False)
class DenseParams:
    """Affine map: W [units, input_dim], b [units], applied per timestep."""

    W: np.ndarray
    b: np.ndarray

    FIELDS = ("W", "b")

    @property
    def units(self) -> int:
        return int(self.b.shape[0])


def _param_arrays(layer_params):
    return [getattr(layer_params, name) for name in layer_params.FIELDS]


@dataclass(eq=False)
class ModelParams:
    """Per-layer parameter objects aligned with a ModelSpec (None for dropout)."""

    spec: ModelSpec
    layers: list

    def flatten(self) -> np.ndarray:
        """All parameters as one float64 vector: layers in order, each layer's
        fields in declaration order, arrays raveled row-major."""
        chunks = []
        for p in self.layers:
            if p is not None:
                chunks.extend(a.ravel() for a in _param_arrays(p))
        if not chunks:
            return np.zeros(0, dtype=np.float64)
        return np.concatenate(chunks)

    @classmethod
    def from_flat(cls, spec: ModelSpec, flat: np.ndarray) -> "ModelParams":
        flat = np.asarray(flat, dtype=np.float64)
        if flat.size != count_params(spec):
            raise ValueError(f"expected {count_params(spec)} parameters, got {flat.size}")
        widths = spec.widths()
        layers = []
        pos = 0

        def grab(shape):
            nonlocal pos
            size = int(np.prod(shape))
            block = flat[pos : pos + size].reshape(shape).copy()
            pos += size
            return block

        for d, layer in zip(widths, spec.layers):
            u = layer.units
            if layer.kind == "lstm":
                ws = [grab((u, d + u)) for _ in range(4)]
                bs = [grab((u,)) for _ in range(4)]
                layers.append(LstmParams(*ws, *bs))
            elif layer.kind == "gru":
                ws = [grab((u, d + u)) for _ in range(3)]
                bs = [grab((u,)) for _ in range(3)]
                layers.append(GruParams(*ws, *bs))
            elif layer.kind == "dense":
                layers.append(DenseParams(grab((u, d)), grab((u,))))
            else:
                layers.append(None)
        return cls(spec, layers)

    @property
    def num_params(self) -> int:
        return count_params(self.spec)


def _orthogonal(rng: np.random.Generator, n: int) -> np.ndarray:
    m = rng.standard_normal((n, n))
    q, r = np.linalg.qr(m)
    return q * np.sign(np.diag(r))


def _glorot(rng: np.random.Generator, rows: int, cols: int, fan_in: int, fan_out: int) -> np.ndarray:
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(rows, cols))


def _gate_kernel(rng, u, d):
    """[u, u + d] kernel: orthogonal on the recurrent columns, Glorot on the input columns."""
    w = np.empty((u, u + d), dtype=np.float64)
    w[:, :u] = _orthogonal(rng, u)
    w[:, u:] = _glorot(rng, u, d, fan_in=d, fan_out=u)
    return w


def build_model(spec: ModelSpec, init_seed: int = 0) -> ModelParams:
    """Initialize parameters: Glorot-uniform input kernels, orthogonal
    recurrent kernels, zero biases except the LSTM forget gate bias at 1.0."""
    spec.validate()
    rng = np.random.default_rng(init_seed)
    widths = spec.widths()
    layers = []
    for d, layer in zip(widths, spec.layers):
        u = layer.units
        if layer.kind == "lstm":
            ws = [_gate_kernel(rng, u, d) for _ in range(4)]
            bs = [np.zeros(u), np.ones(u), np.zeros(u), np.zeros(u)]
            layers.append(LstmParams(*ws, *bs))
        elif layer.kind == "gru":
            ws = [_gate_kernel(rng, u, d) for _ in range(3)]
            bs = [np.zeros(u) for _ in range(3)]
            layers.append(GruParams(*ws, *bs))
        elif layer.kind == "dense":
            layers.append(DenseParams(_glorot(rng, u, d, fan_in=d, fan_out=u), np.zeros(u)))
        else:
            layers.append(None)
    return ModelParams(spec, layers)


# ---------------------------------------------------------------------------
# Single-step cell ops


def lstm_cell_step(params: LstmParams, x_t, h_prev, c_prev,
                   recurrent_activation: str = "hard_sigmoid", cell_activation: str = "tanh"):
    """One LSTM step on vectors.

    z = [h_prev, x_t]; i, f, o = gate(W z + b); c~ = act(W_c z + b_c);
    c_t = f * c_prev + i * c~; h_t = o * act(c_t).
    """
    x_t = np.asarray(x_t, dtype=np.float64)
    h_prev = np.asarray(h_prev, dtype=np.float64)
    c_prev = np.asarray(c_prev, dtype=np.float64)
    z = np.concatenate([h_prev, x_t])
    i = activation(recurrent_activation, params.W_i @ z + params.b_i)
    f = activation(recurrent_activation, params.W_f @ z + params.b_f)
    o = activation(recurrent_activation, params.W_o @ z + params.b_o)
    cand = activation(cell_activation, params.W_c @ z + params.b_c)
    c_t = f * c_prev + i * cand
    h_t = o * activation(cell_activation, c_t)
    return h_t, c_t


def gru_cell_step(params: GruParams, x_t, h_prev,
                  recurrent_activation: str = "sigmoid", cell_activation: str = "tanh"):
    """One GRU step on vectors.

    z = gate(W_z [h, x] + b_z); r = gate(W_r [h, x] + b_r);
    h~ = act(W_h [r * h, x] + b_h); h_t = (1 - z) * h + z * h~.
    """
    x_t = np.asarray(x_t, dtype=np.float64)
    h_prev = np.asarray(h_prev, dtype=np.float64)
    zx = np.concatenate([h_prev, x_t])
    z = activation(recurrent_activation, params.W_z @ zx + params.b_z)
    r = activation(recurrent_activation, params.W_r @ zx + params.b_r)
    rx = np.concatenate([r * h_prev, x_t])
    cand = activation(cell_activation, params.W_h @ rx + params.b_h)
    return (1.0 - z) * h_prev + z * cand


def recurrent_layer_forward(params, seq, mask=None, recurrent_activation=None, cell_activation="tanh"):
    """Run one cell over a single [T, d] sequence; returns [T, units].

    Masked steps (mask[t] == 0) leave the state untouched and emit zeros.
    The default gate squashing is hard-sigmoid for LSTM and sigmoid for GRU,
    matching the single-step ops.
    """
    seq = np.asarray(seq, dtype=np.float64)
    if seq.ndim != 2:
        raise ValueError("seq must be [T, d]")
    t_len = seq.shape[0]
    mask = np.ones(t_len) if mask is None else np.asarray(mask, dtype=np.float64)
    if mask.shape != (t_len,):
        raise ValueError("mask must be one value per timestep")
    if isinstance(params, LstmParams):
        kind = "lstm"
        rec_act = "hard_sigmoid" if recurrent_activation is None else recurrent_activation
    elif isinstance(params, GruParams):
        kind = "gru"
        rec_act = "sigmoid" if recurrent_activation is None else recurrent_activation
    else:
        raise TypeError(f"unsupported cell parameters: {type(params).__name__}")
    layer = LayerSpec(kind, units=params.units, activation=cell_activation, recurrent_activation=rec_act)
    forward = _lstm_layer_forward if kind == "lstm" else _gru_layer_forward
    out, _ = forward(layer, params, seq[None, :, :], mask[None, :], want_cache=False)
    return out[0]


def dense_forward(W, b, x, activation_kind: str = "linear"):
    """y = act(x W^T + b), applied to the trailing axis."""
    x = np.asarray(x, dtype=np.float64)
    return activation(activation_kind, x @ np.asarray(W).T + np.asarray(b))


def dropout_forward(x, rate: float, mode: str, rng: np.random.Generator | None = None):
    """Inverted dropout. Returns (y, kept_mask).

    Train mode keeps each element with probability 1 - rate and scales by
    1 / (1 - rate); eval mode is the exact identity with an all-ones mask.
    """
    if mode not in ("train", "eval"):
        raise ValueError(f"mode must be train or eval (got {mode!r})")
    if not (0.0 <= rate < 1.0):
        raise ValueError(f"rate must lie in [0, 1) (got {rate!r})")
    x = np.asarray(x, dtype=np.float64)
    if mode == "eval":
        return x.copy(), np.ones_like(x, dtype=bool)
    if rng is None:
        raise ValueError("train-mode dropout needs an RNG")
    kept = rng.random(x.shape) >= rate
    return x * kept / (1.0 - rate), kept


# ---------------------------------------------------------------------------
# Batched layer forwards with caches (the training path)

_LSTM_GATES = 4  # i, f, o, candidate
_GRU_GATES = 2  # z, r


def _stack_lstm(params: LstmParams):
    w = np.concatenate([params.W_i, params.W_f, params.W_o, params.W_c], axis=0)
    b = np.concatenate([params.b_i, params.b_f, params.b_o, params.b_c])
    return w, b


def _lstm_layer_forward(layer: LayerSpec, params: LstmParams, x, mask, want_cache: bool):
    n, t_len, _ = x.shape
    u = params.units
    w, b = _stack_lstm(params)
    wh, wx = w[:, :u], w[:, u:]
    xa = x @ wx.T + b  # [n, T, 4u]
    h = np.zeros((n, u))
    c = np.zeros((n, u))
    out = np.zeros((n, t_len, u))
    cache = None
    if want_cache:
        cache = {
            "x": x,
            "mask": mask,
            "A": np.empty((n, t_len, 4 * u)),
            "G": np.empty((n, t_len, 4 * u)),
            "Hp": np.empty((n, t_len, u)),
            "Cp": np.empty((n, t_len, u)),
            "Cn": np.empty((n, t_len, u)),
            "TC": np.empty((n, t_len, u)),
        }
    for step in range(t_len):
        a = xa[:, step] + h @ wh.T
        gates = np.empty_like(a)
        gates[:, : 3 * u] = activation(layer.recurrent_activation, a[:, : 3 * u])
        gates[:, 3 * u :] = activation(layer.activation, a[:, 3 * u :])
        i_g = gates[:, :u]
        f_g = gates[:, u : 2 * u]
        o_g = gates[:, 2 * u : 3 * u]
        cand = gates[:, 3 * u :]
        c_new = f_g * c + i_g * cand
        tc = activation(layer.activation, c_new)
        h_new = o_g * tc
        m = mask[:, step, None]
        if want_cache:
            cache["Hp"][:, step] = h
            cache["Cp"][:, step] = c
            cache["A"][:, step] = a
            cache["G"][:, step] = gates
            cache["Cn"][:, step] = c_new
            cache["TC"][:, step] = tc
        out[:, step] = m * h_new
        h = m * h_new + (1.0 - m) * h
        c = m * c_new + (1.0 - m) * c
    return out, cache


def _lstm_layer_backward(layer: LayerSpec, params: LstmParams, cache, dout):
    x, mask = cache["x"], cache["mask"]
    n, t_len, d = x.shape
    u = params.units
    w, _ = _stack_lstm(params)
    wh, wx = w[:, :u], w[:, u:]
    d_a = np.zeros((n, t_len, 4 * u))
    dh = np.zeros((n, u))
    dc = np.zeros((n, u))
    for step in reversed(range(t_len)):
        m = mask[:, step, None]
        gates = cache["G"][:, step]
        i_g = gates[:, :u]
        f_g = gates[:, u : 2 * u]
        o_g = gates[:, 2 * u : 3 * u]
        cand = gates[:, 3 * u :]
        tc = cache["TC"][:, step]
        dh_new = m * (dh + dout[:, step])
        dc_new = m * dc + dh_new * o_g * activation_grad(layer.activation, cache["Cn"][:, step], tc)
        d_gates = np.empty((n, 4 * u))
        d_gates[:, :u] = dc_new * cand  # input gate
        d_gates[:, u : 2 * u] = dc_new * cache["Cp"][:, step]  # forget gate
        d_gates[:, 2 * u : 3 * u] = dh_new * tc  # output gate
        d_gates[:, 3 * u :] = dc_new * i_g  # candidate
        a = cache["A"][:, step]
        d_a[:, step, : 3 * u] = d_gates[:, : 3 * u] * activation_grad(
            layer.recurrent_activation, a[:, : 3 * u], gates[:, : 3 * u]
        )
        d_a[:, step, 3 * u :] = d_gates[:, 3 * u :] * activation_grad(
            layer.activation, a[:, 3 * u :], cand
        )
        dh = (1.0 - m) * dh + d_a[:, step] @ wh
        dc = (1.0 - m) * dc + dc_new * f_g
    flat_a = d_a.reshape(n * t_len, 4 * u)
    d_wh = flat_a.T @ cache["Hp"].reshape(n * t_len, u)
    d_wx = flat_a.T @ x.reshape(n * t_len, d)
    d_w = np.concatenate([d_wh, d_wx], axis=1)
    d_b = flat_a.sum(axis=0)
    dx = d_a @ wx
    grads = [d_w[:u], d_w[u : 2 * u], d_w[2 * u : 3 * u], d_w[3 * u :],
             d_b[:u], d_b[u : 2 * u], d_b[2 * u : 3 * u], d_b[3 * u :]]
    return dx, grads


def _stack_gru_gates(params: GruParams):
    w = np.concatenate([params.W_z, params.W_r], axis=0)
    b = np.concatenate([params.b_z, params.b_r])
    return w, b


def _gru_layer_forward(layer: LayerSpec, params: GruParams, x, mask, want_cache: bool):
    n, t_len, _ = x.shape
    u = params.units
    w_zr, b_zr = _stack_gru_gates(params)
    wh_zr, wx_zr = w_zr[:, :u], w_zr[:, u:]
    wh_c, wx_c = params.W_h[:, :u], params.W_h[:, u:]
    xa_zr = x @ wx_zr.T + b_zr  # [n, T, 2u]
    xa_c = x @ wx_c.T + params.b_h  # [n, T, u]
    h = np.zeros((n, u))
    out = np.zeros((n, t_len, u))
    cache = None
    if want_cache:
        cache = {
            "x": x,
            "mask": mask,
            "Azr": np.empty((n, t_len, 2 * u)),
            "Gzr": np.empty((n, t_len, 2 * u)),
            "Ac": np.empty((n, t_len, u)),
            "Cand": np.empty((n, t_len, u)),
            "Hp": np.empty((n, t_len, u)),
            "RH": np.empty((n, t_len, u)),
        }
    for step in range(t_len):
        a_zr = xa_zr[:, step] + h @ wh_zr.T
        zr = activation(layer.recurrent_activation, a_zr)
        z_g = zr[:, :u]
        r_g = zr[:, u:]
        rh = r_g * h
        a_c = xa_c[:, step] + rh @ wh_c.T
        cand = activation(layer.activation, a_c)
        h_new = (1.0 - z_g) * h + z_g * cand
        m = mask[:, step, None]
        if want_cache:
            cache["Hp"][:, step] = h
            cache["Azr"][:, step] = a_zr
            cache["Gzr"][:, step] = zr
            cache["Ac"][:, step] = a_c
            cache["Cand"][:, step] = cand
            cache["RH"][:, step] = rh
        out[:, step] = m * h_new
        h = m * h_new + (1.0 - m) * h
    return out, cache


def _gru_layer_backward(layer: LayerSpec, params: GruParams, cache, dout):
    x, mask = cache["x"], cache["mask"]
    n, t_len, d = x.shape
    u = params.units
    w_zr, _ = _stack_gru_gates(params)
    wh_zr, wx_zr = w_zr[:, :u], w_zr[:, u:]
    wh_c, wx_c = params.W_h[:, :u], params.W_h[:, u:]
    d_a_zr = np.zeros((n, t_len, 2 * u))
    d_a_c = np.zeros((n, t_len, u))
    dh = np.zeros((n, u))
    for step in reversed(range(t_len)):
        m = mask[:, step, None]
        h_prev = cache["Hp"][:, step]
        zr = cache["Gzr"][:, step]
        z_g = zr[:, :u]
        r_g = zr[:, u:]
        cand = cache["Cand"][:, step]
        dh_new = m * (dh + dout[:, step])
        dz = dh_new * (cand - h_prev)
        dcand = dh_new * z_g
        dh_prev = dh_new * (1.0 - z_g)
        da_c = dcand * activation_grad(layer.activation, cache["Ac"][:, step], cand)
        d_rh = da_c @ wh_c
        dr = d_rh * h_prev
        dh_prev = dh_prev + d_rh * r_g
        d_gate = np.concatenate([dz, dr], axis=1)
        da_zr = d_gate * activation_grad(layer.recurrent_activation, cache["Azr"][:, step], zr)
        d_a_zr[:, step] = da_zr
        d_a_c[:, step] = da_c
        dh = (1.0 - m) * dh + dh_prev + da_zr @ wh_zr
    flat_zr = d_a_zr.reshape(n * t_len, 2 * u)
    flat_c = d_a_c.reshape(n * t_len, u)
    hp_flat = cache["Hp"].reshape(n * t_len, u)
    x_flat = x.reshape(n * t_len, d)
    d_w_zr = np.concatenate([flat_zr.T @ hp_flat, flat_zr.T @ x_flat], axis=1)
    d_w_c = np.concatenate([flat_c.T @ cache["RH"].reshape(n * t_len, u), flat_c.T @ x_flat], axis=1)
    d_b_zr = flat_zr.sum(axis=0)
    d_b_c = flat_c.sum(axis=0)
    dx = d_a_zr @ wx_zr + d_a_c @ wx_c
    grads = [d_w_zr[:u], d_w_zr[u:], d_w_c, d_b_zr[:u], d_b_zr[u:], d_b_c]
    return dx, grads


def _dense_layer_forward(layer: LayerSpec, params: DenseParams, x, mask, want_cache: bool):
    a = x @ params.W.T + params.b
    y = activation(layer.activation, a)
    cache = {"x": x, "A": a, "Y": y} if want_cache else None
    return y, cache


def _dense_layer_backward(layer: LayerSpec, params: DenseParams, cache, dout):
    x, a = cache["x"], cache["A"]
    da = dout * activation_grad(layer.activation, a, cache["Y"])
    n, t_len, u = da.shape
    d = x.shape[2]
    flat = da.reshape(n * t_len, u)
    d_w = flat.T @ x.reshape(n * t_len, d)
    d_b = flat.sum(axis=0)
    dx = da @ params.W
    return dx, [d_w, d_b]


def forward(params: ModelParams, features, mask, mode: str = "eval",
            rng: np.random.Generator | None = None, dropout_masks: list | None = None):
    """Run the whole stack; returns (predictions, caches).

    features: [n, T, input_dim], mask: [n, T]. In train mode each dropout
    layer samples a kept mask from `rng` unless `dropout_masks` supplies one
    per dropout layer (used to freeze dropout for gradient checking).
    """
    if mode not in ("train", "eval"):
        raise ValueError(f"mode must be train or eval (got {mode!r})")
    spec = params.spec
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 3 or features.shape[2] != spec.input_dim:
        raise ValueError(
            f"features must be [n, T, {spec.input_dim}], got {features.shape}"
        )
    mask = np.asarray(mask, dtype=np.float64)
    x = features
    caches = []
    drop_index = 0
    for layer, p in zip(spec.layers, params.layers):
        if layer.kind == "lstm":
            x, cache = _lstm_layer_forward(layer, p, x, mask, want_cache=True)
        elif layer.kind == "gru":
            x, cache = _gru_layer_forward(layer, p, x, mask, want_cache=True)
        elif layer.kind == "dense":
            x, cache = _dense_layer_forward(layer, p, x, mask, want_cache=True)
        else:
            if mode == "train" and layer.rate > 0.0:
                if dropout_masks is not None:
                    kept = dropout_masks[drop_index]
                elif rng is not None:
                    kept = rng.random(x.shape) >= layer.rate
                else:
                    raise ValueError("train-mode dropout needs an RNG or explicit masks")
                scale = kept / (1.0 - layer.rate)
                x = x * scale
                cache = {"scale": scale}
            else:
                cache = {"scale": None}
            drop_index += 1
        caches.append(cache)
    return x, caches


def backward_through_layers(params: ModelParams, caches, dpred):
    """Walk the stack in reverse; returns the flat gradient vector
    (same packing as ModelParams.flatten)."""
    spec = params.spec
    grads_per_layer = [None] * len(spec.layers)
    dx = dpred
    for idx in range(len(spec.layers) - 1, -1, -1):
        layer = spec.layers[idx]
        p = params.layers[idx]
        cache = caches[idx]
        if layer.kind == "lstm":
            dx, grads = _lstm_layer_backward(layer, p, cache, dx)
        elif layer.kind == "gru":
            dx, grads = _gru_layer_backward(layer, p, cache, dx)
        elif layer.kind == "dense":
            dx, grads = _dense_layer_backward(layer, p, cache, dx)
        else:
            if cache["scale"] is not None:
                dx = dx * cache["scale"]
            grads = []
        grads_per_layer[idx] = grads
    chunks = []
    for grads in grads_per_layer:
        chunks.extend(g.ravel() for g in grads)
    if not chunks:
        return np.zeros(0, dtype=np.float64)
    return np.concatenate(chunks)


def model_forward(params: ModelParams, batch, mode: str = "eval",
                  rng: np.random.Generator | None = None) -> np.ndarray:
    """Predictions [n, max_len, output_dim] for a PaddedBatch.

    Values at masked steps are defined but meant to be excluded by the mask
    in any loss.
    """
    preds, _ = forward(params, batch.features, batch.mask, mode=mode, rng=rng)
    return preds
