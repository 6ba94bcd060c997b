"""Acceptance suite: one test per release criterion, each printing a PASS line.

The heavyweight fixtures (default scenario, trained twins) are module-scoped so
the whole suite stays inside its stated runtime budgets. Run with ``-s`` to see
the per-criterion lines as they complete.
"""

import time

import numpy as np
import pytest

import chantwin as ct
from chantwin.assoc import associate_by_distance, associate_by_gain
from chantwin.cli import dispatch
from chantwin.env import Environment, Obstacle, Position
from chantwin.interp import IdwInterpolator, KrigingInterpolator
from chantwin.mlp import MlpNet, gradient_check

ROI = 200.0
BOUNDS = ([0.0, 0.0, 0.0, 0.0], [ROI, ROI, ROI, ROI])


def report(name: str, ok: bool, detail: str = "") -> None:
    line = f"ACCEPTANCE {name}: {'PASS' if ok else 'FAIL'}"
    if detail:
        line += f" ({detail})"
    print(line, flush=True)
    assert ok, line


@pytest.fixture(scope="module")
def scenario():
    """Default scenario: 200x200 RoI, 12 obstacles, 10,000 training samples."""
    env = ct.generate_environment(7, 12, 20, ROI, ROI)
    params = ct.PropagationParams()
    ds = ct.build_dataset(env, params, 12_500, seed=11)
    train, val, test = ct.split_dataset(ds, (0.8, 0.1, 0.1), seed=12)
    assert len(train) == 10_000
    return env, params, train, val, test


@pytest.fixture(scope="module")
def centralized_twin(scenario):
    _, _, train, val, _ = scenario
    model = ct.MlpGainRegressor(seed=21, input_bounds=BOUNDS)
    model.fit(train.coords, train.gains, X_val=val.coords, y_val=val.gains)
    return model


@pytest.fixture(scope="module")
def federated_twin(scenario):
    _, _, train, val, _ = scenario
    cfg = ct.FlConfig(n_clients=5, rounds=100, seed=31)
    model, history = ct.run_fl(train, val, cfg, input_bounds=BOUNDS)
    return model, history


def test_interpolation_exactness():
    t0 = time.time()
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(5, 40))
        pts = rng.uniform(0, 100, (n, 2))
        vals = rng.uniform(-130, -50, n)
        idw = IdwInterpolator().fit(pts, vals)
        kr = KrigingInterpolator().fit(pts, vals)  # fitted variogram has zero nugget
        worst = max(worst,
                    float(np.max(np.abs(idw.predict(pts) - vals))),
                    float(np.max(np.abs(kr.predict(pts) - vals))))
    elapsed = time.time() - t0
    report("interpolation-exactness", worst < 1e-6 and elapsed < 5.0,
           f"worst dev {worst:.2e} dB, {elapsed:.2f}s over 100 scatters")


def test_kriging_unbiasedness():
    rng = np.random.default_rng(1)
    pts = rng.uniform(0, ROI, (30, 2))
    vals = rng.uniform(-130, -50, 30)
    kr = KrigingInterpolator().fit(pts, vals)
    centers = np.column_stack([g.ravel() for g in np.meshgrid(
        (np.arange(100) + 0.5) * 2.0, (np.arange(100) + 0.5) * 2.0)])
    w = kr.weights(centers)
    assert w.shape == (10_000, 30)
    worst = float(np.max(np.abs(w.sum(axis=1) - 1.0)))
    report("kriging-unbiasedness", worst < 1e-9,
           f"max |sum(weights)-1| = {worst:.2e} over 100x100 cells")


def test_pl_fit_recovery():
    t0 = time.time()
    d = np.array([1.0, 2.0, 5.0, 10.0, 30.0, 100.0, 180.0])
    X = np.column_stack([np.zeros_like(d), np.zeros_like(d), d, np.zeros_like(d)])
    y = -(40.0 + 30.0 * np.log10(d))
    m = ct.LogDistancePathLoss().fit(X, y)
    err = max(abs(m.a_db_ - 40.0), abs(m.b_db_per_decade_ - 30.0))
    elapsed = time.time() - t0
    report("pl-fit-recovery", err < 1e-6 and elapsed < 1.0,
           f"max param error {err:.2e}, {elapsed:.3f}s")


def test_gradient_correctness():
    t0 = time.time()
    worst = 0.0
    for seed in range(20):
        rng = np.random.default_rng(seed)
        net = MlpNet([4, 6, 6, 6, 6, 6, 6, 6, 1])
        assert net.n_params <= 1000
        net.theta[:] = rng.uniform(-0.8, 0.8, net.n_params)
        X = rng.uniform(-1, 1, (16, 4))
        y = rng.uniform(-1, 1, 16)
        worst = max(worst, gradient_check(net, X, y))
    elapsed = time.time() - t0
    report("gradient-correctness", worst < 1e-4 and elapsed < 10.0,
           f"max rel err {worst:.2e} over 20 models, {elapsed:.1f}s")


def test_fedavg_centralized_identity():
    t0 = time.time()
    rng = np.random.default_rng(5)
    X = rng.uniform(0, 100, (64, 4))
    y = -(40 + 30 * np.log10(np.maximum(np.hypot(X[:, 2] - X[:, 0],
                                                 X[:, 3] - X[:, 1]), 1.0)))
    ds = ct.Dataset(X, y, seed=5)
    val = ct.Dataset(X[:10], y[:10], seed=5)
    bounds = ([0.0] * 4, [100.0] * 4)
    rounds = 5
    cfg = ct.FlConfig(n_clients=4, rounds=rounds, local_epochs=1, batch_size=64,
                      lr=0.01, seed=11, optimizer="sgd", hidden_width=8)
    fl_model, _ = ct.run_fl(ds, val, cfg, input_bounds=bounds)
    central = ct.MlpGainRegressor(hidden_width=8, lr=0.01, batch_size=64,
                                  epochs=rounds, optimizer="sgd", seed=11,
                                  input_bounds=bounds)
    central.fit(X, y)
    diff = float(np.max(np.abs(fl_model.net_.theta - central.net_.theta)))
    elapsed = time.time() - t0
    report("fedavg-centralized-identity", diff < 1e-9 and elapsed < 10.0,
           f"max param diff {diff:.2e} after {rounds} rounds, {elapsed:.1f}s")


def test_twin_beats_pl_baseline(scenario, centralized_twin, federated_twin):
    t0 = time.time()
    _, _, train, _, test = scenario
    pl = ct.LogDistancePathLoss().fit(train.coords, train.gains)
    pl_median = float(np.median(np.abs(pl.predict(test.coords) - test.gains)))
    fl_model, _ = federated_twin
    medians = {}
    for tag, model in (("centralized", centralized_twin), ("federated", fl_model)):
        medians[tag] = float(np.median(np.abs(model.predict(test.coords) - test.gains)))
    margin = min(pl_median - m for m in medians.values())
    elapsed = time.time() - t0
    report("twin-beats-pl-baseline",
           all(m < pl_median for m in medians.values()) and margin >= 3.0,
           f"PL median {pl_median:.2f} dB vs centralized {medians['centralized']:.2f} / "
           f"federated {medians['federated']:.2f}; margin {margin:.2f} dB, "
           f"+{elapsed:.0f}s over shared fixtures")


def test_more_clients_lower_mse(scenario):
    t0 = time.time()
    _, _, train, val, _ = scenario
    wins = 0
    outcomes = []
    for seed in range(5):
        final = {}
        for k in (3, 5):
            cfg = ct.FlConfig(n_clients=k, rounds=100, seed=100 + seed)
            _, history = ct.run_fl(train, val, cfg, input_bounds=BOUNDS)
            final[k] = history[-1]["val_mse_db2"]
        wins += final[5] <= final[3]
        outcomes.append(f"seed{seed}: 3c={final[3]:.1f} 5c={final[5]:.1f}")
    elapsed = time.time() - t0
    report("more-clients-lower-mse", wins >= 3 and elapsed < 1800.0,
           f"5-client wins {wins}/5 [{'; '.join(outcomes)}], {elapsed:.0f}s")


def test_association_avoids_blocked_ap():
    t0 = time.time()
    ue = (30.0, 10.0)
    wall = Obstacle(25.0, 14.0, 35.0, 16.0, wall_loss_db=60.0)
    env = Environment(60.0, 40.0, [wall],
                      [Position(30.0, 20.0), Position(10.0, 10.0)], 0)
    params = ct.PropagationParams(shadowing_sigma_db=0.0)
    oracle = ct.ChannelOracle(env, params)

    ds = ct.build_dataset(env, params, 4000, seed=5, spacing=4.0)
    twin = ct.MlpGainRegressor(hidden_width=32, epochs=40, lr=3e-3, batch_size=128,
                               seed=6, input_bounds=([0.0, 0.0, 0.0, 0.0],
                                                     [60.0, 40.0, 60.0, 40.0]))
    twin.fit(ds.coords, ds.gains)

    nearest = associate_by_distance(env, ue, k=1).indices[0]
    oracle_pick = associate_by_gain(env, oracle, ue, k=1).indices
    twin_pick = associate_by_gain(env, twin, ue, k=1).indices
    elapsed = time.time() - t0
    ok = (nearest == 0 and 0 not in oracle_pick and 0 not in twin_pick
          and oracle_pick == [1] and twin_pick == [1] and elapsed < 60.0)
    report("association-avoids-blocked-ap", ok,
           f"nearest={nearest} oracle={oracle_pick} twin={twin_pick}, {elapsed:.1f}s")


def test_argmax_invariance():
    rng = np.random.default_rng(2)
    transforms = [lambda s: 3.0 * s + 11.0,
                  lambda s: np.tanh(s / 150.0),
                  lambda s: s ** 3]

    class Warped:
        def __init__(self, inner, fn):
            self.inner = inner
            self.fn = fn

        def predict(self, X):
            return self.fn(self.inner.predict(X))

    failures = 0
    for seed in range(100):
        env = ct.generate_environment(seed, 3, 8, 100, 100)
        oracle = ct.ChannelOracle(env, ct.PropagationParams(shadowing_sigma_db=0.0))
        ue = tuple(rng.uniform(0, 100, 2))
        base = associate_by_gain(env, oracle, ue, k=5)
        fn = transforms[seed % len(transforms)]
        warped = associate_by_gain(env, Warped(oracle, fn), ue, k=5)
        failures += set(base.indices) != set(warped.indices)
    report("argmax-invariance", failures == 0,
           f"{failures} mismatches over 100 scenes")


def test_cli_determinism_byte_identical(tmp_path):
    out = tmp_path / "run"

    def p(name: str) -> str:
        return str(out / name)

    def pipeline():
        # outputs resolve against --out-dir; inputs are given absolute, so both
        # passes run byte-for-byte identical argv
        cmds = [
            ["gen-env", "--seed", "7", "--obstacles", "4", "--aps", "6",
             "--roi", "80x80", "--out", "env.json"],
            ["gen-data", "--env", p("env.json"), "--spacing", "8", "--n", "300",
             "--seed", "3", "--split", "0.8,0.1,0.1", "--out", "data.csv"],
            ["fit-pl", "--data", p("data-train.csv"), "--out", "pl.txt"],
            ["train", "--data", p("data-train.csv"), "--val", p("data-val.csv"),
             "--env", p("env.json"), "--width", "8", "--epochs", "2", "--seed", "1",
             "--out", "model.ckpt", "--metrics", "train.csv"],
            ["map", "--env", p("env.json"), "--model", "oracle", "--tx", "40,40",
             "--res", "8", "--out", "oracle-map.csv"],
            ["map", "--env", p("env.json"), "--model", p("model.ckpt"),
             "--tx", "40,40", "--res", "8", "--si-seeds", "30",
             "--method", "kriging", "--seed", "5", "--out", "twin-map.csv"],
            ["associate", "--env", p("env.json"), "--model", p("pl.txt"),
             "--ue", "40,40", "--k", "3", "--out", "assoc.csv"],
            ["eval", "--model", p("model.ckpt"), "--data", p("data-test.csv"),
             "--out", "errors.csv", "--box", "box.csv"],
        ]
        for cmd in cmds:
            assert dispatch(cmd + ["--out-dir", str(out), "--strict"]) == 0

    pipeline()
    files = sorted(p for p in out.iterdir() if p.is_file())
    assert len(files) >= 12
    first = {p.name: p.read_bytes() for p in files}
    pipeline()
    second = {p.name: p.read_bytes() for p in files}
    differing = [name for name in first if first[name] != second[name]]
    report("cli-determinism", not differing,
           f"{len(first)} files byte-compared, differing: {differing or 'none'}")
