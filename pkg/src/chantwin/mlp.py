"""Learned coordinate->gain twin: a fully-connected ReLU regressor trained with
seeded minibatch SGD/Adam, implemented directly on numpy arrays."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin

from .validation import as_xy, check_link_coords, fmt_float

CHECKPOINT_MAGIC = "mlp v1"
DEFAULT_HIDDEN_LAYERS = 7
DEFAULT_HIDDEN_WIDTH = 128


@dataclass(frozen=True)
class InputNorm:
    """Per-coordinate affine map onto [-1, 1]: (x - center) / half."""

    center: tuple
    half: tuple

    def apply(self, X: np.ndarray) -> np.ndarray:
        return (X - np.asarray(self.center)) / np.asarray(self.half)

    @classmethod
    def from_bounds(cls, lows, highs) -> "InputNorm":
        lows = np.asarray(lows, dtype=float)
        highs = np.asarray(highs, dtype=float)
        half = (highs - lows) / 2.0
        half = np.where(half > 0, half, 1.0)  # degenerate axis: pass through
        return cls(tuple((lows + highs) / 2.0), tuple(half))

    @classmethod
    def identity(cls, dim: int) -> "InputNorm":
        return cls((0.0,) * dim, (1.0,) * dim)


@dataclass(frozen=True)
class TargetNorm:
    """z-score constants for the gain targets; std is floored to keep it positive."""

    mean_db: float
    std_db: float

    def __post_init__(self):
        if not self.std_db > 0:
            raise ValueError(f"target std must be > 0, got {self.std_db}")

    def apply(self, y: np.ndarray) -> np.ndarray:
        return (y - self.mean_db) / self.std_db

    def invert(self, yn: np.ndarray) -> np.ndarray:
        return yn * self.std_db + self.mean_db

    @classmethod
    def from_targets(cls, y: np.ndarray) -> "TargetNorm":
        std = float(np.std(y))
        return cls(float(np.mean(y)), std if std > 1e-12 else 1.0)


class MlpNet:
    """Raw ReLU network over normalized units; parameters live in one flat vector."""

    def __init__(self, layer_dims: list[int], theta: np.ndarray | None = None):
        if len(layer_dims) < 2 or any(d < 1 for d in layer_dims):
            raise ValueError(f"bad layer dims {layer_dims}")
        self.layer_dims = list(int(d) for d in layer_dims)
        self._slices = []
        offset = 0
        for fi, fo in zip(self.layer_dims[:-1], self.layer_dims[1:]):
            self._slices.append((offset, fi, fo))
            offset += fi * fo + fo
        self.n_params = offset
        if theta is None:
            theta = np.zeros(self.n_params)
        theta = np.asarray(theta, dtype=float).ravel()
        if theta.shape[0] != self.n_params:
            raise ValueError(f"theta has {theta.shape[0]} entries, expected {self.n_params}")
        self.theta = theta

    @classmethod
    def he_uniform(cls, layer_dims: list[int], seed: int) -> "MlpNet":
        """He-uniform weights (limit sqrt(6/fan_in)), zero biases, seeded."""
        net = cls(layer_dims)
        rng = np.random.default_rng(seed)
        for i in range(net.n_layers):
            w, _ = net.layer(i)
            limit = math.sqrt(6.0 / w.shape[0])
            w[...] = rng.uniform(-limit, limit, size=w.shape)
        return net

    @property
    def n_layers(self) -> int:
        return len(self._slices)

    def layer(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        """Views (weight matrix (fan_in, fan_out), bias vector) into the flat theta."""
        offset, fi, fo = self._slices[i]
        w = self.theta[offset:offset + fi * fo].reshape(fi, fo)
        b = self.theta[offset + fi * fo:offset + fi * fo + fo]
        return w, b

    def copy(self) -> "MlpNet":
        return MlpNet(self.layer_dims, self.theta.copy())

    def forward(self, Xn: np.ndarray) -> np.ndarray:
        """Normalized-unit outputs, shape (n,)."""
        if not np.all(np.isfinite(self.theta)):
            raise FloatingPointError("network parameters are non-finite")
        a = Xn
        last = self.n_layers - 1
        for i in range(self.n_layers):
            w, b = self.layer(i)
            a = a @ w + b
            if i != last:
                a = np.maximum(a, 0.0)
        return a[:, 0]

    def loss_and_grad(self, Xn: np.ndarray, yn: np.ndarray) -> tuple[float, np.ndarray]:
        """Mean squared error over the batch and its gradient as a flat vector."""
        n = Xn.shape[0]
        acts = [Xn]
        a = Xn
        last = self.n_layers - 1
        for i in range(self.n_layers):
            w, b = self.layer(i)
            a = a @ w + b
            if i != last:
                a = np.maximum(a, 0.0)
            acts.append(a)
        out = acts[-1][:, 0]
        err = out - yn
        loss = float(np.mean(err ** 2))
        grad = np.zeros_like(self.theta)
        gnet = MlpNet(self.layer_dims, grad)  # layer views into the gradient vector
        delta = (2.0 / n) * err[:, None]
        for i in range(last, -1, -1):
            gw, gb = gnet.layer(i)
            gw[...] = acts[i].T @ delta
            gb[...] = delta.sum(axis=0)
            if i > 0:
                w, _ = self.layer(i)
                delta = (delta @ w.T) * (acts[i] > 0.0)
        return loss, grad


class SgdOptimizer:
    def __init__(self, lr: float):
        self.lr = lr

    def step(self, theta: np.ndarray, grad: np.ndarray) -> None:
        theta -= self.lr * grad


class AdamOptimizer:
    def __init__(self, lr: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m = None
        self.v = None
        self.t = 0

    def step(self, theta: np.ndarray, grad: np.ndarray) -> None:
        if self.m is None:
            self.m = np.zeros_like(theta)
            self.v = np.zeros_like(theta)
        self.t += 1
        self.m = self.beta1 * self.m + (1 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1 - self.beta2) * grad ** 2
        mhat = self.m / (1 - self.beta1 ** self.t)
        vhat = self.v / (1 - self.beta2 ** self.t)
        theta -= self.lr * mhat / (np.sqrt(vhat) + self.eps)


def make_optimizer(name: str, lr: float):
    if name == "sgd":
        return SgdOptimizer(lr)
    if name == "adam":
        return AdamOptimizer(lr)
    raise ValueError(f"unknown optimizer {name!r}, expected 'sgd' or 'adam'")


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 1e-3
    batch_size: int = 256
    epochs: int = 200
    seed: int = 0
    optimizer: str = "adam"

    def __post_init__(self):
        if not self.lr > 0:
            raise ValueError(f"lr must be > 0, got {self.lr}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        make_optimizer(self.optimizer, 1.0)  # reject unknown names early


def canonical_order(X: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sort rows lexicographically so batching depends only on the seeded shuffle,
    never on the order the caller happened to supply the samples in."""
    key = np.lexsort((y, X[:, 3], X[:, 2], X[:, 1], X[:, 0]))
    return X[key], y[key]


def run_epochs(net: MlpNet, Xn: np.ndarray, yn: np.ndarray, cfg: TrainConfig,
               rng: np.random.Generator, optimizer=None) -> float:
    """Run cfg.epochs of seeded minibatch optimization in place; returns the final
    epoch's sample-weighted mean batch MSE (normalized units)."""
    if optimizer is None:
        optimizer = make_optimizer(cfg.optimizer, cfg.lr)
    n = Xn.shape[0]
    epoch_mse = math.nan
    for _ in range(cfg.epochs):
        perm = rng.permutation(n)
        sq_sum = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = perm[start:start + cfg.batch_size]
            mse, grad = net.loss_and_grad(Xn[idx], yn[idx])
            if not math.isfinite(mse):
                raise FloatingPointError(f"training diverged: batch MSE = {mse}")
            optimizer.step(net.theta, grad)
            sq_sum += mse * idx.shape[0]
        epoch_mse = sq_sum / n
    return epoch_mse


class MlpGainRegressor(BaseEstimator, RegressorMixin):
    """Gain twin estimator: 4-D transceiver coordinates in, channel gain (dB) out.

    Depth is fixed at seven hidden layers; width, optimizer, and schedule are
    configurable. ``input_bounds`` gives the (lows, highs) of the four coordinates
    (normally the RoI corners); when omitted, training-data bounds are used.
    Normalization constants always come from the training targets.
    """

    def __init__(self, hidden_width: int = DEFAULT_HIDDEN_WIDTH, lr: float = 1e-3,
                 batch_size: int = 256, epochs: int = 200, optimizer: str = "adam",
                 seed: int = 0, input_bounds=None):
        self.hidden_width = hidden_width
        self.lr = lr
        self.batch_size = batch_size
        self.epochs = epochs
        self.optimizer = optimizer
        self.seed = seed
        self.input_bounds = input_bounds

    def _layer_dims(self) -> list[int]:
        return [4] + [self.hidden_width] * DEFAULT_HIDDEN_LAYERS + [1]

    def _init_norms(self, X: np.ndarray, y: np.ndarray) -> None:
        if self.input_bounds is not None:
            lows, highs = self.input_bounds
        else:
            lows, highs = X.min(axis=0), X.max(axis=0)
        self.input_norm_ = InputNorm.from_bounds(lows, highs)
        self.target_norm_ = TargetNorm.from_targets(y)

    def fit(self, X, y, X_val=None, y_val=None):
        cfg = TrainConfig(lr=self.lr, batch_size=self.batch_size, epochs=self.epochs,
                          seed=self.seed, optimizer=self.optimizer)
        X = check_link_coords(X)
        y = np.asarray(y, dtype=float).ravel()
        X, y = canonical_order(X, y)
        self._init_norms(X, y)
        Xn = self.input_norm_.apply(X)
        yn = self.target_norm_.apply(y)
        self.net_ = MlpNet.he_uniform(self._layer_dims(), cfg.seed)
        optimizer = make_optimizer(cfg.optimizer, cfg.lr)
        rng = np.random.default_rng(cfg.seed)
        std2 = self.target_norm_.std_db ** 2
        one = TrainConfig(lr=cfg.lr, batch_size=cfg.batch_size, epochs=1,
                          seed=cfg.seed, optimizer=cfg.optimizer)
        self.history_ = []
        for epoch in range(cfg.epochs):
            train_mse = run_epochs(self.net_, Xn, yn, one, rng, optimizer)
            record = {"epoch": epoch, "train_mse_db2": train_mse * std2}
            if X_val is not None:
                pred = self.predict(X_val)
                record["val_mse_db2"] = float(np.mean((pred - np.asarray(y_val)) ** 2))
            self.history_.append(record)
        return self

    def predict(self, X) -> np.ndarray:
        if not hasattr(self, "net_"):
            raise RuntimeError("MlpGainRegressor must be fitted (or loaded) before predict")
        X = check_link_coords(X)
        return self.target_norm_.invert(self.net_.forward(self.input_norm_.apply(X)))

    def gain(self, tx, rx) -> float:
        txx, txy = as_xy(tx)
        rxx, rxy = as_xy(rx)
        return float(self.predict(np.array([[txx, txy, rxx, rxy]]))[0])


def gradient_check(net: MlpNet, Xn: np.ndarray, yn: np.ndarray,
                   step: float = 1e-5) -> float:
    """Max relative disagreement between the analytic gradient and central finite
    differences of the batch MSE; denominator floored at 1e-8."""
    _, analytic = net.loss_and_grad(Xn, yn)
    worst = 0.0
    for i in range(net.n_params):
        orig = net.theta[i]
        net.theta[i] = orig + step
        lp, _ = net.loss_and_grad(Xn, yn)
        net.theta[i] = orig - step
        lm, _ = net.loss_and_grad(Xn, yn)
        net.theta[i] = orig
        numeric = (lp - lm) / (2 * step)
        denom = max(abs(analytic[i]), abs(numeric), 1e-8)
        worst = max(worst, abs(analytic[i] - numeric) / denom)
    return worst


def save_checkpoint(model: MlpGainRegressor, path) -> None:
    """Text checkpoint: magic, layer dims, per-layer weights (row-major) and biases,
    then the normalization constants. Decimal text round-trips exactly."""
    net = model.net_
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(CHECKPOINT_MAGIC + "\n")
        fh.write(" ".join(str(d) for d in net.layer_dims) + "\n")
        for i in range(net.n_layers):
            w, b = net.layer(i)
            for row in w:
                fh.write(" ".join(fmt_float(v) for v in row) + "\n")
            fh.write(" ".join(fmt_float(v) for v in b) + "\n")
        fh.write("input_center " + " ".join(fmt_float(v) for v in model.input_norm_.center) + "\n")
        fh.write("input_half " + " ".join(fmt_float(v) for v in model.input_norm_.half) + "\n")
        fh.write(f"target_norm {fmt_float(model.target_norm_.mean_db)} "
                 f"{fmt_float(model.target_norm_.std_db)}\n")


def load_checkpoint(path) -> MlpGainRegressor:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines or lines[0] != CHECKPOINT_MAGIC:
        raise ValueError(f"not a checkpoint file (missing {CHECKPOINT_MAGIC!r} header)")
    try:
        dims = [int(tok) for tok in lines[1].split()]
        net = MlpNet(dims)
        cursor = 2
        for i in range(net.n_layers):
            w, b = net.layer(i)
            for r in range(w.shape[0]):
                w[r, :] = [float(tok) for tok in lines[cursor].split()]
                cursor += 1
            b[:] = [float(tok) for tok in lines[cursor].split()]
            cursor += 1
        fields = {}
        for ln in lines[cursor:]:
            if not ln:
                continue
            toks = ln.split()
            fields[toks[0]] = [float(t) for t in toks[1:]]
        input_norm = InputNorm(tuple(fields["input_center"]), tuple(fields["input_half"]))
        target_norm = TargetNorm(fields["target_norm"][0], fields["target_norm"][1])
    except (IndexError, KeyError, ValueError) as exc:
        raise ValueError(f"malformed checkpoint: {exc}") from exc
    n_hidden = len(dims) - 2
    model = MlpGainRegressor(hidden_width=dims[1] if n_hidden else 1)
    model.net_ = net
    model.input_norm_ = input_norm
    model.target_norm_ = target_norm
    return model
