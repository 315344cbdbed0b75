"""Delayed-recall experiments with linear reservoirs.

A reservoir is driven by i.i.d. standard-normal input, a linear readout is
fitted by least squares to reproduce the input ``tau`` steps back, and the
test-set accuracy ``gamma = max(1 - NRMSE, 0)`` is recorded. Memory curves
scan ``tau``, spectral-radius sweeps scan ``rho``, and rank scans record the
controllability rank against the reservoir size.

Seeding is keyed by ``(master_seed, realization)``: realization ``i`` gets
the same reservoir draw, input weights and signal whatever the topology,
``rho`` or ``tau``, and whatever the number of worker processes.
"""

from __future__ import annotations

import enum
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .controllability import analyze, controllability_matrix
from .exceptions import DivergenceError, ValidationError
from .linalg_core import as_matrix, as_vector, least_squares
from .topology import (
    Reservoir,
    ReservoirSpec,
    RescaleMode,
    TopologyKind,
    build_reservoir,
)

__all__ = [
    "ExperimentConfig",
    "TrainedReadout",
    "MemoryCurve",
    "Table",
    "NormalizationMode",
    "derive_seeds",
    "make_reservoir",
    "input_signal",
    "run_reservoir",
    "delay_targets",
    "train_readout",
    "predict",
    "nrmse",
    "accuracy",
    "recall_accuracy",
    "memory_curve",
    "memory_curves",
    "sr_sweep",
    "rank_scan",
]

STATE_LIMIT = 1e100


@dataclass(frozen=True)
class ExperimentConfig:
    """Setup of a delayed-recall experiment.

    Rows ``[washout + tau, t0)`` train the readout and rows ``[t0, T)`` test
    it. ``workers`` only affects speed, never the results.
    """

    T: int = 1500
    t0: int = 1000
    taus: tuple = tuple(range(0, 201, 5))
    rhos: tuple = (0.5, 0.9, 0.99)
    n: int = 100
    realizations: int = 10
    master_seed: int = 0
    washout: int = 100
    ridge: float = 0.0
    rescale_mode: RescaleMode = RescaleMode.AS_DISTRIBUTED
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "taus", tuple(int(t) for t in self.taus))
        object.__setattr__(self, "rhos", tuple(float(r) for r in self.rhos))
        object.__setattr__(self, "rescale_mode", RescaleMode.parse(self.rescale_mode))
        problems = self.violations()
        if problems:
            raise ValidationError("invalid experiment config:\n  - " + "\n  - ".join(problems))

    def violations(self) -> list[str]:
        out = []
        if not self.taus:
            out.append("taus must not be empty")
        elif min(self.taus) < 0:
            out.append("taus must be nonnegative")
        if not self.rhos:
            out.append("rhos must not be empty")
        elif min(self.rhos) <= 0:
            out.append("rhos must be positive")
        if self.n < 2:
            out.append(f"n must be >= 2 (got {self.n})")
        if self.realizations < 1:
            out.append(f"realizations must be >= 1 (got {self.realizations})")
        if self.washout < 0:
            out.append(f"washout must be >= 0 (got {self.washout})")
        if self.ridge < 0:
            out.append(f"ridge must be >= 0 (got {self.ridge})")
        if self.workers < 1:
            out.append(f"workers must be >= 1 (got {self.workers})")
        if not 0 <= self.master_seed < 2**64:
            out.append("master_seed must be a 64-bit unsigned integer")
        max_tau = max(self.taus) if self.taus else 0
        if not self.washout + max_tau < self.t0:
            out.append(f"need washout + max(taus) < t0 (got {self.washout} + {max_tau} >= {self.t0})")
        if not self.t0 < self.T:
            out.append(f"need t0 < T (got t0={self.t0}, T={self.T})")
        if self.T - self.t0 < 2:
            out.append("the test slice needs at least 2 samples")
        return out

    def to_dict(self) -> dict:
        d = asdict(self)
        d["taus"] = list(self.taus)
        d["rhos"] = list(self.rhos)
        d["rescale_mode"] = self.rescale_mode.value
        return d


@dataclass(frozen=True, eq=False)
class TrainedReadout:
    r: np.ndarray = field(repr=False)
    train_nrmse: float


@dataclass(frozen=True)
class MemoryCurve:
    """Mean and spread of test accuracy per delay for one topology and ``rho``.

    ``gammas`` holds the raw values with shape ``(realizations, len(taus))``.
    """

    topology: TopologyKind
    n: int
    rho: float
    taus: tuple
    gammas: np.ndarray = field(repr=False, compare=False)

    @property
    def mean(self) -> np.ndarray:
        return self.gammas.mean(axis=0)

    @property
    def std(self) -> np.ndarray:
        return self.gammas.std(axis=0)

    @property
    def points(self) -> list[tuple[int, float, float]]:
        return list(zip(self.taus, self.mean.tolist(), self.std.tolist()))

    def at(self, tau: int) -> float:
        return float(self.mean[self.taus.index(tau)])


@dataclass
class Table:
    """Rows of an experiment result with a fixed column order."""

    columns: tuple
    rows: list = field(default_factory=list)

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [row[i] for row in self.rows]

    def where(self, **match) -> "Table":
        idx = {self.columns.index(k): v for k, v in match.items()}
        rows = [r for r in self.rows if all(r[i] == v for i, v in idx.items())]
        return Table(self.columns, rows)


class NormalizationMode(str, enum.Enum):
    """What ``rho`` pins down for the random topology in a rank scan."""

    SPECTRAL_RADIUS = "spectral-radius"
    MAX_SINGULAR_VALUE = "max-singular-value"

    @classmethod
    def parse(cls, value) -> "NormalizationMode":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "-")
        key = {"sr": "spectral-radius", "spectralradius": "spectral-radius",
               "msv": "max-singular-value", "maxsingularvalue": "max-singular-value"}.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise ValidationError(f"unknown normalization {value!r}") from None


def derive_seeds(master_seed: int, realization: int) -> tuple[int, int, int]:
    """``(reservoir_seed, input_seed, signal_seed)`` for one realization.

    Drawn from ``SeedSequence(master_seed, spawn_key=(realization,))``, so
    each stream depends only on the pair and not on evaluation order.
    """
    ss = np.random.SeedSequence(master_seed, spawn_key=(realization,))
    a, b, c = (int(x) for x in ss.generate_state(3, dtype=np.uint64))
    return a, b, c


def make_reservoir(kind, n: int, rho: float, master_seed: int, realization: int,
                   rescale_mode=RescaleMode.AS_DISTRIBUTED) -> Reservoir:
    seed, input_seed, _ = derive_seeds(master_seed, realization)
    return build_reservoir(ReservoirSpec(kind, n, rho, seed, input_seed, rescale_mode))


def input_signal(T: int, master_seed: int, realization: int) -> np.ndarray:
    """i.i.d. standard-normal drive signal of length ``T``."""
    _, _, signal_seed = derive_seeds(master_seed, realization)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(signal_seed)))
    return rng.standard_normal(T)


def run_reservoir(R: Reservoir, u) -> np.ndarray:
    """State trajectory of ``x_k = W x_{k-1} + w u_k`` from a zero state.

    Row ``k`` of the result is the state after consuming ``u[k]``.

    Raises
    ------
    DivergenceError
        If the state norm exceeds ``1e100``.
    """
    u = as_vector(u)
    W, w = R.W, R.w
    X = np.empty((u.size, R.n))
    x = np.zeros(R.n)
    for k, uk in enumerate(u):
        x = W @ x + w * uk
        X[k] = x
        if not np.isfinite(x).all() or np.linalg.norm(x) > STATE_LIMIT:
            raise DivergenceError(f"reservoir state blew up at step {k}; rho >= 1?")
    return X


def delay_targets(u, tau: int) -> np.ndarray:
    """Targets ``y_k = u_{k - tau}``; entries with ``k < tau`` are NaN."""
    u = as_vector(u)
    y = np.full(u.size, np.nan)
    y[tau:] = u[:u.size - tau]
    return y


def nrmse(y, yhat) -> float:
    """``sqrt(sum (y - yhat)^2 / sum (y - mean(y))^2)``.

    >>> nrmse([1.0, -1.0], [-1.0, 1.0])
    2.0
    """
    y = as_vector(y)
    yhat = as_vector(yhat)
    if y.size != yhat.size:
        raise ValidationError(f"length mismatch: {y.size} vs {yhat.size}")
    if y.size < 2:
        raise ValidationError("nrmse needs at least 2 samples")
    denom = np.sum((y - y.mean()) ** 2)
    if denom == 0:
        raise ValidationError("target is constant; NRMSE is undefined")
    return float(np.sqrt(np.sum((y - yhat) ** 2) / denom))


def accuracy(nrmse_value: float) -> float:
    """``max(1 - NRMSE, 0)``."""
    if nrmse_value < 0:
        raise ValidationError(f"NRMSE cannot be negative, got {nrmse_value}")
    return max(1.0 - float(nrmse_value), 0.0)


def train_readout(states, targets, config: ExperimentConfig, tau: int) -> TrainedReadout:
    """Least-squares readout fitted on rows ``[washout + tau, t0)``."""
    X = as_matrix(states)
    y = np.asarray(targets, dtype=np.float64)
    if X.shape[0] < config.t0:
        raise ValidationError(f"need at least t0={config.t0} state rows, got {X.shape[0]}")
    rows = slice(config.washout + tau, config.t0)
    Xtr, ytr = X[rows], y[rows]
    if not np.isfinite(ytr).all():
        raise ValidationError("training targets contain undefined entries")
    if not np.any(Xtr):
        raise ValidationError("training states are all zero; nothing to regress on")
    r = least_squares(Xtr, ytr, config.ridge)
    return TrainedReadout(r, nrmse(ytr, Xtr @ r))


def predict(readout: TrainedReadout, states) -> np.ndarray:
    return as_matrix(states) @ readout.r


def recall_accuracy(states, u, tau: int, config: ExperimentConfig) -> float:
    """Test-set accuracy of a readout trained to output ``u_{k - tau}``."""
    y = delay_targets(u, tau)
    readout = train_readout(states, y, config, tau)
    test = slice(config.t0, config.T)
    return accuracy(nrmse(y[test], predict(readout, states[test])))


def _realization_gammas(cell) -> np.ndarray:
    kind, rho, realization, config = cell
    R = make_reservoir(kind, config.n, rho, config.master_seed, realization, config.rescale_mode)
    u = input_signal(config.T, config.master_seed, realization)
    X = run_reservoir(R, u)
    return np.array([recall_accuracy(X, u, tau, config) for tau in config.taus])


def _map(fn, cells: Sequence, workers: int) -> list:
    if workers <= 1 or len(cells) <= 1:
        return [fn(c) for c in cells]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, cells))


def memory_curves(kinds: Iterable, rhos: Iterable[float],
                  config: ExperimentConfig) -> list[MemoryCurve]:
    """Memory curves for every ``(kind, rho)`` pair, in that nesting order."""
    pairs = [(TopologyKind.parse(k), float(rho)) for k in kinds for rho in rhos]
    cells = [(k, rho, i, config) for k, rho in pairs for i in range(config.realizations)]
    results = _map(_realization_gammas, cells, config.workers)
    curves = []
    for j, (kind, rho) in enumerate(pairs):
        block = results[j * config.realizations:(j + 1) * config.realizations]
        curves.append(MemoryCurve(kind, config.n, rho, config.taus, np.vstack(block)))
    return curves


def memory_curve(kind, rho: float, config: ExperimentConfig) -> MemoryCurve:
    """Accuracy against delay for one topology, averaged over realizations."""
    return memory_curves([kind], [rho], config)[0]


SWEEP_COLUMNS = ("topology", "n", "rho", "tau", "mean_gamma", "std_gamma")


def sr_sweep(kind, taus: Sequence[int], rhos: Sequence[float],
             config: ExperimentConfig) -> Table:
    """Accuracy on the full ``rho x tau`` grid.

    Returns a :class:`Table` with columns ``topology, n, rho, tau,
    mean_gamma, std_gamma``; the raw per-realization values are available
    through :func:`memory_curves` with the same arguments.
    """
    config = replace(config, taus=tuple(taus), rhos=tuple(rhos))
    table = Table(SWEEP_COLUMNS)
    for curve in memory_curves([kind], config.rhos, config):
        for tau, m, s in curve.points:
            table.rows.append((curve.topology.value, curve.n, curve.rho, tau, m, s))
    return table


RANK_COLUMNS = ("topology", "n", "rho", "fixed", "mean_rank", "std_rank")


def _rank_cell(cell) -> int:
    kind, n, rho, mode, realization, master_seed = cell
    R = make_reservoir(kind, n, rho, master_seed, realization, mode)
    return analyze(controllability_matrix(R)).rank


def rank_scan(kinds: Iterable, ns: Sequence[int], rho: float,
              fixed=NormalizationMode.SPECTRAL_RADIUS,
              config: ExperimentConfig | None = None) -> tuple[Table, Table]:
    """Controllability rank against reservoir size.

    ``fixed`` chooses whether ``rho`` sets the spectral radius or the
    largest singular value of the random topology; for the other
    topologies the two coincide (or, for the delay line, ``rho`` is the
    connection weight) and ``config.rescale_mode`` applies.

    Returns ``(raw, aggregated)`` tables; ``raw`` has one row per
    realization with columns ``topology, n, rho, fixed, realization, rank``.
    """
    config = config or ExperimentConfig()
    fixed = NormalizationMode.parse(fixed)
    ns = [int(n) for n in ns]
    if ns != sorted(ns):
        raise ValidationError("ns must be ascending")
    kinds = [TopologyKind.parse(k) for k in kinds]
    cells, keys = [], []
    for kind in kinds:
        mode = config.rescale_mode
        if kind is TopologyKind.RANDOM and fixed is NormalizationMode.MAX_SINGULAR_VALUE:
            mode = RescaleMode.EXACT_MAX_SINGULAR_VALUE
        for n in ns:
            keys.append((kind, n))
            cells.extend((kind, n, rho, mode, i, config.master_seed)
                         for i in range(config.realizations))
    ranks = _map(_rank_cell, cells, config.workers)
    raw = Table(("topology", "n", "rho", "fixed", "realization", "rank"))
    agg = Table(RANK_COLUMNS)
    m = config.realizations
    for j, (kind, n) in enumerate(keys):
        block = np.array(ranks[j * m:(j + 1) * m], dtype=float)
        for i, rk in enumerate(block):
            raw.rows.append((kind.value, n, rho, fixed.value, i, int(rk)))
        agg.rows.append((kind.value, n, rho, fixed.value, float(block.mean()), float(block.std())))
    return raw, agg
