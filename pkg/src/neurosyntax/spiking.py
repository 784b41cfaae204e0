"""Phase-modulated inhomogeneous Poisson populations."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import ThinnessError
from .signals import wrap_phase

__all__ = [
    "SpikingPopulation", "SpikeTrain", "PopulationTrace",
    "modulated_rate", "sample_spikes", "population_rate", "estimate_rate",
    "make_rng", "write_spikes_csv", "read_spikes_csv", "write_population_csv",
]

THINNESS_LIMIT = 0.1


def make_rng(seed) -> np.random.Generator:
    """Counter-based generator; the stream depends only on ``seed``."""
    return np.random.Generator(np.random.Philox(seed))


@dataclass(frozen=True)
class SpikingPopulation:
    weights: tuple[float, ...]
    alpha: float = 0.5
    preferred_phase: float = 0.0
    noise_sd: float = 0.0

    def __post_init__(self):
        w = tuple(float(v) for v in self.weights)
        if not w:
            raise ValueError("population needs at least one neuron")
        if any(not 0.0 <= v <= 1.0 for v in w):
            raise ValueError("weights must lie in [0, 1]")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if self.noise_sd < 0:
            raise ValueError("noise_sd must be >= 0")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "preferred_phase", wrap_phase(self.preferred_phase))

    @property
    def size(self) -> int:
        return len(self.weights)


@dataclass(frozen=True)
class SpikeTrain:
    events: np.ndarray
    duration: float

    def __post_init__(self):
        ev = np.array(self.events, dtype=float).reshape(-1)
        if ev.size and (ev[0] < 0 or ev[-1] >= self.duration or np.any(np.diff(ev) <= 0)):
            raise ValueError("events must be strictly increasing within [0, duration)")
        ev.flags.writeable = False
        object.__setattr__(self, "events", ev)

    def __len__(self) -> int:
        return self.events.size


@dataclass(frozen=True)
class PopulationTrace:
    sample_rate: float
    rates: np.ndarray
    aggregate: np.ndarray

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.aggregate.size) / self.sample_rate


def modulated_rate(pop: SpikingPopulation, i: int, phi_c, base_scale: float):
    """Firing rate (Hz) of neuron ``i`` while the category phase is ``phi_c``."""
    if not 0 <= i < pop.size:
        raise IndexError(f"neuron {i} out of range for population of {pop.size}")
    return base_scale * pop.weights[i] * (1.0 + pop.alpha * np.cos(phi_c - pop.preferred_phase))


def sample_spikes(rate_fn: Callable, duration: float, dt: float, rng_seed,
                  noise_sd: float = 0.0) -> SpikeTrain:
    """Bernoulli-per-bin approximation of an inhomogeneous Poisson process.

    ``rate_fn`` is called once with the array of bin start times and must
    return rates in Hz (a scalar is broadcast). With ``noise_sd > 0`` each
    bin's rate gets Gaussian jitter, clamped at zero.
    """
    if dt <= 0 or duration < 0:
        raise ValueError("need dt > 0 and duration >= 0")
    n = int(np.floor(duration / dt + 1e-9))
    t = np.arange(n) * dt
    rate = np.broadcast_to(np.asarray(rate_fn(t), dtype=float), t.shape).copy()
    if n and np.max(rate) * dt >= THINNESS_LIMIT:
        raise ThinnessError(
            f"dt * max_rate = {np.max(rate) * dt:.3g} >= {THINNESS_LIMIT}; use a smaller dt")
    rng = make_rng(rng_seed)
    if noise_sd > 0:
        rate += noise_sd * rng.standard_normal(n)
    np.maximum(rate, 0.0, out=rate)
    hit = rng.random(n) < np.minimum(rate * dt, 1.0)
    offsets = rng.random(n)
    events = t[hit] + offsets[hit] * dt
    return SpikeTrain(events[events < duration], duration)


def population_rate(pop: SpikingPopulation, phi_c_series, base_scale: float,
                    sample_rate: float = 1.0) -> PopulationTrace:
    phi = np.asarray(phi_c_series, dtype=float)
    if phi.size == 0:
        raise ValueError("phase series is empty")
    rates = np.vstack([modulated_rate(pop, i, phi, base_scale) for i in range(pop.size)])
    return PopulationTrace(sample_rate, rates, rates.sum(axis=0))


def estimate_rate(train: SpikeTrain, window: float, step: float | None = None) -> np.ndarray:
    """Sliding-window spike count divided by ``window``.

    Windows ``[c - window/2, c + window/2)`` are placed every ``step``
    (default ``window / 4``) and kept only while fully inside the train.
    """
    if window <= 0:
        raise ValueError("window must be > 0")
    step = window / 4 if step is None else step
    n = int(np.floor((train.duration - window) / step + 1e-9)) + 1
    if n <= 0:
        return np.zeros(0)
    lo = np.arange(n) * step
    counts = np.searchsorted(train.events, lo + window) - np.searchsorted(train.events, lo)
    return counts / window


# --------------------------------------------------------------------------
# CSV


def write_spikes_csv(path, trains: Sequence[SpikeTrain]) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["neuron_id", "time"])
        for k, tr in enumerate(trains):
            for t in tr.events:
                wr.writerow([k, f"{t:.15g}"])


def read_spikes_csv(path, n_neurons: int, duration: float) -> list[SpikeTrain]:
    events: list[list[float]] = [[] for _ in range(n_neurons)]
    with open(path, newline="") as fh:
        rd = csv.reader(fh)
        if next(rd, None) != ["neuron_id", "time"]:
            raise ValueError(f"{path}: expected header neuron_id,time")
        for row in rd:
            if row:
                events[int(row[0])].append(float(row[1]))
    return [SpikeTrain(np.array(e), duration) for e in events]


def write_population_csv(path, trace: PopulationTrace) -> None:
    n = trace.rates.shape[0]
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["t"] + [f"rate_{i}" for i in range(n)] + ["aggregate"])
        for k, t in enumerate(trace.times):
            wr.writerow([f"{t:.15g}"] + [f"{v:.15g}" for v in trace.rates[:, k]]
                        + [f"{trace.aggregate[k]:.15g}"])
