import numpy as np
import pytest

from chantwin.fedtwin import FlConfig, aggregate, partition, run_fl
from chantwin.mlp import MlpGainRegressor, MlpNet
from chantwin.sampling import Dataset


def toy_dataset(n, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.uniform(0, 100, (n, 4))
    y = -(40 + 30 * np.log10(np.maximum(np.hypot(X[:, 2] - X[:, 0],
                                                 X[:, 3] - X[:, 1]), 1.0)))
    return Dataset(X, y, seed=seed)


class TestPartition:
    def test_three_client_sizes(self):
        shards = partition(toy_dataset(10_000), 3, seed=1)
        assert sorted(s.n for s in shards) == [3333, 3333, 3334]

    def test_five_client_sizes(self):
        shards = partition(toy_dataset(10_000), 5, seed=1)
        assert [s.n for s in shards] == [2000] * 5

    def test_single_client_gets_everything(self):
        ds = toy_dataset(100)
        shards = partition(ds, 1, seed=2)
        assert len(shards) == 1
        assert {tuple(r) for r in shards[0].samples.coords} == \
               {tuple(r) for r in ds.coords}

    def test_disjoint_and_covering(self):
        ds = toy_dataset(101)
        shards = partition(ds, 4, seed=3)
        rows = [tuple(r) for s in shards for r in s.samples.coords]
        assert len(rows) == 101
        assert set(rows) == {tuple(r) for r in ds.coords}

    def test_too_few_samples_rejected(self):
        with pytest.raises(ValueError):
            partition(toy_dataset(3), 4, seed=0)


def nets_with_values(dims, values):
    out = []
    for v, n in values:
        net = MlpNet(dims)
        net.theta[:] = v
        out.append((net, n))
    return out


class TestAggregate:
    dims = [4, 3, 1]

    def test_equal_counts_mean(self):
        template = MlpNet(self.dims)
        locals_ = nets_with_values(self.dims, [(1.0, 10), (3.0, 10)])
        agg = aggregate(template, locals_)
        assert np.all(agg.theta == 2.0)

    def test_weighted_mean(self):
        template = MlpNet(self.dims)
        locals_ = nets_with_values(self.dims, [(0.0, 1), (4.0, 3)])
        agg = aggregate(template, locals_)
        assert np.allclose(agg.theta, 3.0, atol=1e-15)

    def test_single_client_identity(self):
        template = MlpNet(self.dims)
        net = MlpNet(self.dims)
        net.theta[:] = np.random.default_rng(0).uniform(-1, 1, net.n_params)
        agg = aggregate(template, [(net, 7)])
        assert np.array_equal(agg.theta, net.theta)

    def test_permutation_invariance_exact(self):
        rng = np.random.default_rng(1)
        template = MlpNet(self.dims)
        locals_ = []
        for i in range(5):
            net = MlpNet(self.dims)
            net.theta[:] = rng.uniform(-1, 1, net.n_params)
            locals_.append((net, int(rng.integers(1, 100))))
        a = aggregate(template, locals_)
        b = aggregate(template, list(reversed(locals_)))
        c = aggregate(template, [locals_[i] for i in rng.permutation(5)])
        assert np.array_equal(a.theta, b.theta)
        assert np.array_equal(a.theta, c.theta)

    def test_weighted_mean_bounds(self):
        rng = np.random.default_rng(2)
        template = MlpNet(self.dims)
        locals_ = []
        for i in range(4):
            net = MlpNet(self.dims)
            net.theta[:] = rng.uniform(-1, 1, net.n_params)
            locals_.append((net, int(rng.integers(1, 50))))
        agg = aggregate(template, locals_)
        stack = np.vstack([net.theta for net, _ in locals_])
        assert np.all(agg.theta >= stack.min(axis=0) - 1e-15)
        assert np.all(agg.theta <= stack.max(axis=0) + 1e-15)

    def test_shape_mismatch_rejected(self):
        template = MlpNet(self.dims)
        other = MlpNet([4, 5, 1])
        with pytest.raises(ValueError, match="shape mismatch"):
            aggregate(template, [(other, 3)])


class TestRunFl:
    def test_fedavg_equals_centralized_full_batch_sgd(self):
        # Full participation, equal shards, one full-batch step per round, plain
        # gradient descent: each FL round must reproduce one centralized step.
        ds = toy_dataset(64, seed=5)
        val = toy_dataset(16, seed=6)
        bounds = ([0.0] * 4, [100.0] * 4)
        rounds = 5
        cfg = FlConfig(n_clients=4, rounds=rounds, local_epochs=1, batch_size=64,
                       lr=0.01, seed=11, optimizer="sgd", hidden_width=8)
        fl_model, _ = run_fl(ds, val, cfg, input_bounds=bounds)

        central = MlpGainRegressor(hidden_width=8, lr=0.01, batch_size=64,
                                   epochs=rounds, optimizer="sgd", seed=11,
                                   input_bounds=bounds)
        central.fit(ds.coords, ds.gains)
        diff = np.max(np.abs(fl_model.net_.theta - central.net_.theta))
        assert diff < 1e-9

    def test_deterministic_per_seed(self):
        ds = toy_dataset(60, seed=7)
        val = toy_dataset(12, seed=8)
        cfg = FlConfig(n_clients=3, rounds=2, batch_size=16, hidden_width=8, seed=4)
        a, ha = run_fl(ds, val, cfg)
        b, hb = run_fl(ds, val, cfg)
        assert np.array_equal(a.net_.theta, b.net_.theta)
        assert ha == hb

    def test_history_schema(self):
        ds = toy_dataset(30, seed=9)
        val = toy_dataset(10, seed=10)
        cfg = FlConfig(n_clients=2, rounds=3, batch_size=8, hidden_width=8, seed=1)
        _, history = run_fl(ds, val, cfg)
        assert [h["round"] for h in history] == [0, 1, 2]
        assert all(np.isfinite(h["val_mse_db2"]) for h in history)

    def test_zero_rounds_rejected(self):
        with pytest.raises(ValueError):
            FlConfig(rounds=0)

    def test_bad_participation_rejected(self):
        with pytest.raises(ValueError):
            FlConfig(participation=0.0)
        with pytest.raises(ValueError):
            FlConfig(participation=1.5)
