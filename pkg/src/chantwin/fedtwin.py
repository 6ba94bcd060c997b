"""Federated twin training: client sharding, local optimization, federated averaging."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .mlp import (InputNorm, MlpGainRegressor, MlpNet, TargetNorm, TrainConfig,
                  canonical_order, make_optimizer, run_epochs)
from .sampling import Dataset


@dataclass
class ClientShard:
    client_id: int
    samples: Dataset

    @property
    def n(self) -> int:
        return len(self.samples)


@dataclass(frozen=True)
class FlConfig:
    n_clients: int = 3
    rounds: int = 100
    local_epochs: int = 1
    batch_size: int = 256
    lr: float = 1e-3
    seed: int = 0
    participation: float = 1.0
    optimizer: str = "adam"
    hidden_width: int = 128

    def __post_init__(self):
        if self.n_clients < 1:
            raise ValueError(f"n_clients must be >= 1, got {self.n_clients}")
        if self.rounds < 1:
            raise ValueError(f"rounds must be >= 1, got {self.rounds}")
        if self.local_epochs < 1:
            raise ValueError(f"local_epochs must be >= 1, got {self.local_epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if not self.lr > 0:
            raise ValueError(f"lr must be > 0, got {self.lr}")
        if not 0 < self.participation <= 1:
            raise ValueError(f"participation must be in (0, 1], got {self.participation}")
        make_optimizer(self.optimizer, 1.0)


def partition(ds: Dataset, n_clients: int, seed: int) -> list[ClientShard]:
    """Seeded balanced random partition; shard sizes differ by at most one."""
    n = len(ds)
    if n < n_clients:
        raise ValueError(f"dataset of {n} samples cannot cover {n_clients} clients")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    base, extra = divmod(n, n_clients)
    shards = []
    start = 0
    for cid in range(n_clients):
        size = base + (1 if cid < extra else 0)
        idx = perm[start:start + size]
        shards.append(ClientShard(cid, ds.subset(idx, ds.split_tag)))
        start += size
    return shards


def aggregate(global_model: MlpNet, locals_: list[tuple[MlpNet, int]]) -> MlpNet:
    """Federated averaging: parameter-wise mean weighted by sample counts.

    Contributions are summed in a canonical order (count, then parameter digest)
    so the result is bit-identical under any permutation of the client list.
    """
    if not locals_:
        raise ValueError("no local models to aggregate")
    for net, n in locals_:
        if net.layer_dims != global_model.layer_dims:
            raise ValueError(f"shape mismatch: client dims {net.layer_dims} "
                             f"vs global {global_model.layer_dims}")
        if n < 1:
            raise ValueError("client sample count must be >= 1")

    def digest(net: MlpNet) -> str:
        return hashlib.sha256(net.theta.tobytes()).hexdigest()

    ordered = sorted(locals_, key=lambda item: (item[1], digest(item[0])))
    total = sum(n for _, n in ordered)
    theta = np.zeros_like(global_model.theta)
    for net, n in ordered:
        theta += (n / total) * net.theta
    return MlpNet(global_model.layer_dims, theta)


def run_fl(ds_train: Dataset, ds_val: Dataset, cfg: FlConfig,
           input_bounds=None) -> tuple[MlpGainRegressor, list[dict]]:
    """Broadcast / local-train / aggregate rounds; returns the global twin and
    per-round validation metrics (``val_mse_db2``).

    Normalization constants are computed once from the full training set and
    broadcast, so parameter averaging stays meaningful across clients.
    """
    X, y = canonical_order(ds_train.coords, ds_train.gains)
    if input_bounds is not None:
        lows, highs = input_bounds
    else:
        lows, highs = X.min(axis=0), X.max(axis=0)
    input_norm = InputNorm.from_bounds(lows, highs)
    target_norm = TargetNorm.from_targets(y)

    shards = partition(ds_train, cfg.n_clients, cfg.seed)
    client_data = []
    for shard in shards:
        sx, sy = canonical_order(shard.samples.coords, shard.samples.gains)
        client_data.append((input_norm.apply(sx), target_norm.apply(sy), shard.n))

    layer_dims = [4] + [cfg.hidden_width] * 7 + [1]
    global_net = MlpNet.he_uniform(layer_dims, cfg.seed)
    local_cfg = TrainConfig(lr=cfg.lr, batch_size=cfg.batch_size,
                            epochs=cfg.local_epochs, seed=cfg.seed,
                            optimizer=cfg.optimizer)

    model = MlpGainRegressor(hidden_width=cfg.hidden_width, lr=cfg.lr,
                             batch_size=cfg.batch_size, optimizer=cfg.optimizer,
                             seed=cfg.seed)
    model.input_norm_ = input_norm
    model.target_norm_ = target_norm

    part_rng = np.random.default_rng([cfg.seed, 0x5eed])
    history = []
    for rnd in range(cfg.rounds):
        if cfg.participation < 1.0:
            k = max(1, int(round(cfg.participation * cfg.n_clients)))
            active = sorted(part_rng.choice(cfg.n_clients, size=k, replace=False))
        else:
            active = range(cfg.n_clients)
        locals_ = []
        for cid in active:
            xn, yn, n = client_data[cid]
            if n == 0:
                raise ValueError(f"client {cid} has an empty shard")
            local = MlpNet(layer_dims, global_net.theta.copy())
            rng = np.random.default_rng([cfg.seed, rnd, cid])
            run_epochs(local, xn, yn, local_cfg, rng)
            locals_.append((local, n))
        global_net = aggregate(global_net, locals_)
        model.net_ = global_net
        val_pred = model.predict(ds_val.coords)
        history.append({
            "round": rnd,
            "val_mse_db2": float(np.mean((val_pred - ds_val.gains) ** 2)),
        })
    model.net_ = global_net
    return model, history
