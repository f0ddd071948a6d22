"""Autoencoder experiments: sparsity sweep, theorem checks and timing."""

from __future__ import annotations

import csv
import logging
import statistics
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import analysis
from .data import Dataset, load_mnist_idx, synthesize_dataset
from .errors import InvalidInputError
from .nn import Linear, Network, ReLU, SgdConfig, Sigmoid, mse_loss, predict, train_epoch
from .regularizers import BridgeoutLinear, Dropout, RegConfig, Sparseout
from .tensor import make_rng

log = logging.getLogger(__name__)

REGULARIZERS = ("none", "dropout", "sparseout", "bridgeout")
HIDDEN_LAYER = 1  # index of the ReLU whose outputs are measured


@dataclass
class RunConfig:
    regularizer: str = "sparseout"
    p: float = 0.5
    q: float = 2.0
    hidden_size: int = 256
    epochs: int = 20
    learning_rate: float = 0.5
    batch_size: int = 32
    seed: int = 0
    output: str = "sigmoid"
    output_path: str | None = None

    def __post_init__(self):
        if self.regularizer not in REGULARIZERS:
            raise InvalidInputError(f"unknown regularizer {self.regularizer!r}")
        if self.output not in ("sigmoid", "linear"):
            raise InvalidInputError(f"output activation must be 'sigmoid' or 'linear', got {self.output!r}")
        if self.hidden_size < 2:
            raise InvalidInputError("hidden_size must be at least 2")
        RegConfig(self.p, self.q)
        self.sgd

    @property
    def sgd(self) -> SgdConfig:
        return SgdConfig(self.learning_rate, self.batch_size, self.epochs)

    @property
    def label(self) -> str:
        if self.regularizer == "sparseout":
            return f"sparseout_q{self.q:g}"
        return self.regularizer


@dataclass
class ExperimentRecord:
    run_label: str
    epoch: int
    loss: float
    hoyer: float
    seconds: float = field(default=0.0, compare=False)


def _seeds(seed: int):
    init_seq, train_seq = np.random.SeedSequence(seed).spawn(2)
    return np.random.Generator(np.random.PCG64(init_seq)), np.random.Generator(np.random.PCG64(train_seq))


def build_autoencoder(d: int, cfg: RunConfig, init_rng) -> Network:
    """d -> hidden ReLU -> [regularizer] -> d autoencoder.

    Parameters are drawn from ``init_rng`` in the same order for every
    regularizer so runs sharing a seed share their initialisation.
    """
    encoder = Linear(d, cfg.hidden_size, init_rng)
    reg = RegConfig(cfg.p, cfg.q)
    layers = [encoder, ReLU()]
    if cfg.regularizer == "bridgeout":
        layers.append(BridgeoutLinear(cfg.hidden_size, d, reg, init_rng))
    else:
        if cfg.regularizer == "dropout":
            layers.append(Dropout(cfg.p))
        elif cfg.regularizer == "sparseout":
            layers.append(Sparseout(reg))
        layers.append(Linear(cfg.hidden_size, d, init_rng))
    if cfg.output == "sigmoid":
        layers.append(Sigmoid())
    return Network(layers)


def load_dataset(spec: str, n: int = 2000, d: int = 784, seed: int = 0) -> Dataset:
    """``spec`` is either ``"synthetic"`` or a path to an IDX image file."""
    if spec == "synthetic":
        return synthesize_dataset(n, d, seed)
    ds = load_mnist_idx(spec)
    if n and n < ds.n:
        ds.images = ds.images[:n]
    return ds


def train_run(cfg: RunConfig, dataset: Dataset) -> list[ExperimentRecord]:
    """Train one autoencoder and record held-out loss and Hoyer sparsity per epoch."""
    train, test = dataset.split()
    init_rng, train_rng = _seeds(cfg.seed)
    net = build_autoencoder(dataset.d, cfg, init_rng)
    sgd = cfg.sgd
    records = []
    for epoch in range(1, cfg.epochs + 1):
        t0 = time.perf_counter()
        train_epoch(net, train, train, sgd, train_rng)
        elapsed = time.perf_counter() - t0
        loss, _ = mse_loss(predict(net, test), test)
        h = analysis.network_hoyer(net, test, HIDDEN_LAYER)
        records.append(ExperimentRecord(cfg.label, epoch, loss, h, elapsed))
        log.info("%s epoch %d loss %.6f hoyer %.6f", cfg.label, epoch, loss, h)
    return records


def sparsity_sweep(base: RunConfig, q_list: Sequence[float], dataset: Dataset) -> list[ExperimentRecord]:
    """Dropout run followed by one Sparseout run per ``q``, all with ``base.seed``."""
    records = train_run(replace(base, regularizer="dropout"), dataset)
    for q in q_list:
        records += train_run(replace(base, regularizer="sparseout", q=q), dataset)
    return records


def write_csv(path, header: Sequence[str], rows) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _fmt(v):
    if isinstance(v, float):
        return repr(v)  # shortest round-trip decimal
    return v


def write_records(path, records: Sequence[ExperimentRecord]) -> None:
    write_csv(path, ("run_label", "epoch", "loss", "hoyer"),
              ((r.run_label, r.epoch, r.loss, r.hoyer) for r in records))


def final_hoyer(records: Sequence[ExperimentRecord]) -> dict[str, float]:
    last = {}
    for r in records:
        last[r.run_label] = r.hoyer
    return last


# ---------------------------------------------------------------------------
# theorem checks

@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}" + (f"  {self.detail}" if self.detail else "")


def _random_glm(rng, n=4, d=3, low=0.1, high=2.0):
    mag = rng.uniform(low, high, size=(n + 1, d))
    sgn = np.where(rng.random((n + 1, d)) < 0.5, -1.0, 1.0)
    vals = mag * sgn
    return analysis.GlmSpec(vals[:n], vals[n])


def variance_grid(seed: int = 0, qs=(1.5, 2.0, 2.5), ps=(0.3, 0.5, 0.8), n_draws: int = 100_000,
                  n_seeds: int = 3, rel_tol: float = 0.02,
                  variance_fn: Callable = None) -> list[CheckResult]:
    """Monte-Carlo vs closed-form variance on random GLMs.

    Each grid point passes when a majority of ``n_seeds`` independent seeds
    agree on every row to ``rel_tol``.
    """
    variance_fn = variance_fn or analysis.analytic_variance
    results = []
    for q in qs:
        for p in ps:
            cfg = RegConfig(p, q)
            wins, worst = 0, 0.0
            for k in range(n_seeds):
                rng = make_rng(np.random.SeedSequence([seed, k]).generate_state(1)[0])
                glm = _random_glm(rng)
                ok = True
                for i in range(glm.X.shape[0]):
                    exact = variance_fn(glm, i, cfg)
                    emp = analysis.empirical_variance(glm, i, cfg, n_draws, rng)
                    err = abs(emp - exact) / exact if exact else abs(emp)
                    worst = max(worst, err)
                    ok &= err < rel_tol
                wins += ok
            results.append(CheckResult(
                f"variance q={q:g} p={p:g}", wins * 2 > n_seeds,
                f"seeds passing {wins}/{n_seeds}, worst rel err {worst:.4f}"))
    return results


def ridge_specialisation(seed: int = 0, variance_fn: Callable = None) -> list[CheckResult]:
    """At q=2 the variance is the Dropout ridge form and the penalty matches it."""
    variance_fn = variance_fn or analysis.analytic_variance
    rng = make_rng(seed)
    glm = _random_glm(rng)
    out = []
    for p in (0.3, 0.5, 0.8):
        cfg = RegConfig(p, 2.0)
        ridge = [(1 - p) / p * float(np.sum(glm.X[i] ** 2 * glm.beta.ravel() ** 2))
                 for i in range(glm.X.shape[0])]
        got = [variance_fn(glm, i, cfg) for i in range(glm.X.shape[0])]
        ok = np.allclose(got, ridge, rtol=1e-12, atol=0)
        pen = analysis.quadratic_penalty(glm, cfg)
        ok_pen = np.isclose(pen, 0.5 * sum(ridge), rtol=1e-12, atol=0)
        out.append(CheckResult(f"ridge form at q=2 p={p:g}", bool(ok and ok_pen)))
    return out


def dropout_equivalence(seed: int = 0, shape=(64, 128), ps=(0.3, 0.5, 0.8)) -> list[CheckResult]:
    """Sparseout(q=2) against Dropout on non-negative input with a shared seed."""
    out = []
    for p in ps:
        a = np.maximum(make_rng(seed).standard_normal(shape), 0.0)  # ReLU-like, with exact zeros
        up = make_rng(seed + 1).standard_normal(shape)
        so = Sparseout(RegConfig(p, 2.0))
        do = Dropout(p)
        f_so = so.forward(a, True, make_rng(seed + 2))
        f_do = do.forward(a, True, make_rng(seed + 2))
        b_so = so.backward(up)
        b_do = do.backward(up)
        fwd = f_so.tobytes() == f_do.tobytes()
        bwd = b_so.tobytes() == b_do.tobytes()
        out.append(CheckResult(f"dropout == sparseout(q=2) p={p:g}", fwd and bwd,
                               f"forward {'bitwise' if fwd else 'differs'}, backward {'bitwise' if bwd else 'differs'}"))
    return out


def verify_theorems(seed: int = 0, variance_fn: Callable = None, n_draws: int = 100_000) -> list[CheckResult]:
    results = variance_grid(seed, n_draws=n_draws, variance_fn=variance_fn)
    results += ridge_specialisation(seed, variance_fn=variance_fn)
    results += dropout_equivalence(seed)
    return results


# ---------------------------------------------------------------------------
# timing

def time_epochs(cfg: RunConfig, data: np.ndarray, repeats: int) -> float:
    """Median wall-clock seconds of ``repeats`` training epochs."""
    init_rng, train_rng = _seeds(cfg.seed)
    net = build_autoencoder(data.shape[1], cfg, init_rng)
    sgd = cfg.sgd
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        train_epoch(net, data, data, sgd, train_rng)
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def timing_bench(hidden_sizes: Sequence[int], batch_size: int = 128, repeats: int = 3,
                 n: int = 256, d: int = 784, seed: int = 0, p: float = 0.5, q: float = 1.5,
                 regularizers: Sequence[str] = REGULARIZERS) -> list[tuple[int, str, float]]:
    if repeats < 3:
        raise InvalidInputError(f"repeats must be at least 3, got {repeats}")
    data = synthesize_dataset(n, d, seed).images
    rows = []
    for h in hidden_sizes:
        for reg in regularizers:
            cfg = RunConfig(regularizer=reg, p=p, q=q, hidden_size=h, batch_size=batch_size,
                            learning_rate=0.01, epochs=repeats, seed=seed)
            med = time_epochs(cfg, data, repeats)
            log.info("hidden %d %s median %.4fs", h, reg, med)
            rows.append((h, reg, med))
    return rows
