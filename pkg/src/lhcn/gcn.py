"""Two-layer graph convolution network with hand-written gradients and Adam.

Forward pass, with ``A`` the normalized line-graph adjacency and ``act``
a leaky ReLU::

    Z1     = act(A @ X @ theta1)          # m x k1
    H      = act(A @ Z1 @ theta2)         # m x k   (the exported embedding)
    logits = H @ w_out                    # m x |L| (identity when head=False)
    probs  = softmax(logits, axis=1)

Loss is the cross-entropy summed (or averaged) over labelled line nodes.
"""

from __future__ import annotations

import json
import logging
import time
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from lhcn.errors import NumericError, ValidationError
from lhcn.linegraph import LineGraph, normalize_adjacency

log = logging.getLogger(__name__)

LOG_FLOOR = 1e-12
CHECKPOINT_FORMAT = "lhcn-checkpoint"
CHECKPOINT_VERSION = 1
PARAM_NAMES = ("theta1", "theta2", "w_out")


@dataclass
class TrainConfig:
    hidden1: int = 32
    hidden2: int = 16
    epochs: int = 200
    lr: float = 0.01
    lr_halving_period: int = 100
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    leaky_slope: float = 0.01
    init_seed: int = 0
    head: bool = True
    loss: str = "sum"
    dropout: float = 0.0
    weight_decay: float = 0.0
    dtype: str = "float64"

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.hidden1 < 1 or self.hidden2 < 1:
            raise ValidationError("hidden sizes must be >= 1")
        if self.epochs < 1:
            raise ValidationError(f"epochs must be >= 1, got {self.epochs}")
        if not self.lr > 0:
            raise ValidationError(f"lr must be > 0, got {self.lr}")
        if self.lr_halving_period < 1:
            raise ValidationError("lr_halving_period must be >= 1")
        if not self.leaky_slope > 0:
            raise ValidationError("leaky_slope must be > 0")
        if self.loss not in ("sum", "mean"):
            raise ValidationError(f"loss must be 'sum' or 'mean', got {self.loss!r}")
        if not 0.0 <= self.dropout < 1.0:
            raise ValidationError("dropout must lie in [0, 1)")
        if self.weight_decay < 0:
            raise ValidationError("weight_decay must be >= 0")
        if self.dtype not in ("float64", "float32"):
            raise ValidationError(f"dtype must be float64 or float32, got {self.dtype!r}")
        if not 0 <= int(self.init_seed) < 2**64:
            raise ValidationError("init_seed must be a 64-bit unsigned integer")

    @classmethod
    def from_dict(cls, d):
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in names})


@dataclass
class GcnModel:
    theta1: np.ndarray
    theta2: np.ndarray
    w_out: np.ndarray | None
    leaky_slope: float = 0.01

    def params(self) -> dict:
        out = {"theta1": self.theta1, "theta2": self.theta2}
        if self.w_out is not None:
            out["w_out"] = self.w_out
        return out

    @property
    def n_classes(self) -> int:
        return (self.w_out if self.w_out is not None else self.theta2).shape[1]


@dataclass
class AdamState:
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)


@dataclass
class ForwardCache:
    ax: np.ndarray
    p1: np.ndarray
    z1: np.ndarray
    az: np.ndarray
    p2: np.ndarray
    h: np.ndarray
    logits: np.ndarray
    probs: np.ndarray
    mask_x: np.ndarray | None = None
    mask_z: np.ndarray | None = None


@dataclass
class RunReport:
    losses: list = field(default_factory=list)
    lrs: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    train_accuracy: float | None = None
    test_accuracy: float | None = None

    def history_csv(self) -> str:
        rows = ["epoch,loss,lr"]
        rows += [f"{e},{loss!r},{lr!r}" for e, (loss, lr) in enumerate(zip(self.losses, self.lrs))]
        return "\n".join(rows) + "\n"


def glorot(rng, fan_in, fan_out):
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=(fan_in, fan_out))


def init_params(cfg: TrainConfig, d: int, n_classes: int) -> GcnModel:
    """Glorot-uniform weights drawn from PCG64 seeded with ``cfg.init_seed``."""
    if not cfg.head and cfg.hidden2 != n_classes:
        raise ValidationError(
            f"without a classifier head hidden2 must equal the class count "
            f"({cfg.hidden2} != {n_classes})"
        )
    rng = np.random.Generator(np.random.PCG64(int(cfg.init_seed)))
    dtype = np.dtype(cfg.dtype)
    theta1 = glorot(rng, d, cfg.hidden1).astype(dtype)
    theta2 = glorot(rng, cfg.hidden1, cfg.hidden2).astype(dtype)
    w_out = glorot(rng, cfg.hidden2, n_classes).astype(dtype) if cfg.head else None
    return GcnModel(theta1, theta2, w_out, cfg.leaky_slope)


def leaky_relu(x, slope):
    return np.where(x > 0, x, slope * x)


def leaky_relu_grad(x, slope):
    # derivative at exactly 0 is taken as the slope
    return np.where(x > 0, 1.0, slope).astype(x.dtype)


def softmax(logits):
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def _check(stage, arr):
    if not np.all(np.isfinite(arr)):
        raise NumericError(f"non-finite values in {stage}")


def forward(model: GcnModel, anorm, x, ax=None, mask_x=None, mask_z=None) -> ForwardCache:
    """Run both convolutions and the classifier.

    ``ax`` may carry a precomputed ``anorm @ x`` (valid only without input
    dropout). ``mask_x``/``mask_z`` are inverted-dropout masks for the input
    and hidden layer.
    """
    slope = model.leaky_slope
    if mask_x is not None:
        ax = anorm @ (x * mask_x)
    elif ax is None:
        ax = anorm @ x
    p1 = ax @ model.theta1
    _check("first convolution", p1)
    z1 = leaky_relu(p1, slope)
    z_in = z1 * mask_z if mask_z is not None else z1
    az = anorm @ z_in
    p2 = az @ model.theta2
    _check("second convolution", p2)
    h = leaky_relu(p2, slope)
    logits = h @ model.w_out if model.w_out is not None else h
    _check("logits", logits)
    probs = softmax(logits)
    return ForwardCache(ax, p1, z1, az, p2, h, logits, probs, mask_x, mask_z)


def masked_cross_entropy(probs, line_labels, mode: str = "sum") -> float:
    """Negative log-likelihood of the true class over rows with a label (>= 0)."""
    rows = np.flatnonzero(line_labels >= 0)
    if len(rows) == 0:
        return 0.0
    picked = probs[rows, line_labels[rows]]
    if np.any(picked < LOG_FLOOR):
        log.warning("%d true-class probabilities below %g; clamped", int(np.sum(picked < LOG_FLOOR)), LOG_FLOOR)
        picked = np.maximum(picked, LOG_FLOOR)
    loss = -float(np.sum(np.log(picked)))
    return loss / len(rows) if mode == "mean" else loss


def backward(model: GcnModel, anorm, x, cache: ForwardCache, line_labels, mode: str = "sum") -> dict:
    """Exact gradients of :func:`masked_cross_entropy` w.r.t. every parameter."""
    slope = model.leaky_slope
    rows = np.flatnonzero(line_labels >= 0)
    g_logits = np.zeros_like(cache.probs)
    g_logits[rows] = cache.probs[rows]
    g_logits[rows, line_labels[rows]] -= 1.0
    if mode == "mean" and len(rows):
        g_logits /= len(rows)

    grads = {}
    if model.w_out is not None:
        grads["w_out"] = cache.h.T @ g_logits
        g_h = g_logits @ model.w_out.T
    else:
        g_h = g_logits
    g_p2 = g_h * leaky_relu_grad(cache.p2, slope)
    grads["theta2"] = cache.az.T @ g_p2
    # anorm is symmetric, so its transpose is itself
    g_z1 = anorm @ (g_p2 @ model.theta2.T)
    if cache.mask_z is not None:
        g_z1 = g_z1 * cache.mask_z
    g_p1 = g_z1 * leaky_relu_grad(cache.p1, slope)
    grads["theta1"] = cache.ax.T @ g_p1
    return {k: grads[k] for k in PARAM_NAMES if k in grads}


def adam_step(model: GcnModel, grads: dict, state: AdamState, lr: float):
    """One bias-corrected Adam update, in place; returns ``(model, state)``."""
    state.t += 1
    bc1 = 1.0 - state.beta1**state.t
    bc2 = 1.0 - state.beta2**state.t
    for name, theta in model.params().items():
        g = grads[name]
        if name not in state.m:
            state.m[name] = np.zeros_like(theta)
            state.v[name] = np.zeros_like(theta)
        m, v = state.m[name], state.v[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)
        theta -= lr * (m / bc1) / (np.sqrt(v / bc2) + state.eps)
    return model, state


def lr_at(epoch: int, cfg: TrainConfig) -> float:
    """Base rate halved once every ``lr_halving_period`` epochs (0-based)."""
    return cfg.lr / 2 ** (epoch // cfg.lr_halving_period)


def _dropout_mask(rng, shape, rate, dtype):
    keep = rng.random(shape) >= rate
    return keep.astype(dtype) / (1.0 - rate)


def train(lg: LineGraph, cfg: TrainConfig, n_classes: int, anorm=None):
    """Full-batch training on the labelled line nodes; returns ``(model, report)``."""
    if lg.labels is None or lg.n_labelled() == 0:
        raise ValidationError("line graph has no labelled nodes; nothing to train on")
    dtype = np.dtype(cfg.dtype)
    t0 = time.perf_counter()
    if anorm is None:
        anorm = normalize_adjacency(lg.adjacency)
    anorm = anorm.astype(dtype)
    x = np.asarray(lg.features, dtype=dtype)
    labels = lg.labels

    model = init_params(cfg, x.shape[1], n_classes)
    state = AdamState(cfg.beta1, cfg.beta2, cfg.eps)
    report = RunReport()
    drop_rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(cfg.init_seed), 1])))
    ax = None if cfg.dropout > 0 else anorm @ x

    for epoch in range(cfg.epochs):
        lr = lr_at(epoch, cfg)
        mask_x = mask_z = None
        if cfg.dropout > 0:
            mask_x = _dropout_mask(drop_rng, x.shape, cfg.dropout, dtype)
            mask_z = _dropout_mask(drop_rng, (x.shape[0], cfg.hidden1), cfg.dropout, dtype)
        cache = forward(model, anorm, x, ax, mask_x, mask_z)
        loss = masked_cross_entropy(cache.probs, labels, cfg.loss)
        grads = backward(model, anorm, x, cache, labels, cfg.loss)
        if cfg.weight_decay:
            for name, theta in model.params().items():
                loss += 0.5 * cfg.weight_decay * float(np.sum(theta * theta))
                grads[name] = grads[name] + cfg.weight_decay * theta
        if not np.isfinite(loss):
            raise NumericError(f"non-finite loss at epoch {epoch}")
        report.losses.append(loss)
        report.lrs.append(lr)
        adam_step(model, grads, state, lr)

    report.timings["train"] = time.perf_counter() - t0
    return model, report


def infer(model: GcnModel, anorm, x) -> ForwardCache:
    """Forward pass without dropout at the model's precision."""
    dtype = model.theta1.dtype
    return forward(model, anorm.astype(dtype), np.asarray(x, dtype=dtype))


def save_checkpoint(model: GcnModel, cfg: TrainConfig, path) -> None:
    """Write a JSON checkpoint.

    Layout: ``{"format", "version", "config", "leaky_slope", "params"}``
    where each entry of ``params`` is ``{"shape": [rows, cols], "data": [...]}``
    with the entries in row-major order, written as float64 round-trip reprs.
    """
    payload = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "config": asdict(cfg),
        "leaky_slope": model.leaky_slope,
        "params": {
            name: {"shape": list(arr.shape), "data": np.asarray(arr, dtype=np.float64).ravel().tolist()}
            for name, arr in model.params().items()
        },
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)
        fh.write("\n")


def load_checkpoint(path):
    """Inverse of :func:`save_checkpoint`; returns ``(model, cfg)``."""
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("format") != CHECKPOINT_FORMAT:
        raise ValidationError(f"{path}: not an lhcn checkpoint")
    if payload.get("version") != CHECKPOINT_VERSION:
        raise ValidationError(f"{path}: unsupported checkpoint version {payload.get('version')}")
    cfg = TrainConfig.from_dict(payload["config"])
    dtype = np.dtype(cfg.dtype)
    arrays = {
        name: np.array(p["data"], dtype=np.float64).reshape(p["shape"]).astype(dtype)
        for name, p in payload["params"].items()
    }
    model = GcnModel(arrays["theta1"], arrays["theta2"], arrays.get("w_out"), payload["leaky_slope"])
    return model, cfg
