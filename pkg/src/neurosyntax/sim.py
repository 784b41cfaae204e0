"""Coupled four-block state evolved by fixed-step RK4 with discrete events.

Blocks, top to bottom:

``r``  compressed lexical vector; relaxes toward ``W @ X`` for the current input.
``o``  population rates; relax toward the phase-modulated rates at the phase
       of the first oscillator.
``s``  composition frontier; changes only at scheduled events (push a
       compressed item, or compose two frontier entries into their parent).
``e``  Kuramoto phases.

With no input presented yet the ``r`` and ``o`` blocks are frozen.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionError, ScheduleError, StepSizeError
from .lexicon import Projection, RecurrentReducer, compose_embedding, compress
from .signals import KuramotoNetwork, check_kuramoto_dt, kuramoto_field, order_parameter, rk4_step, wrap_phase
from .spiking import SpikingPopulation
from .syntax import LexicalItem

__all__ = ["ScheduleEvent", "RoseState", "RoseDerivative", "RoseDynamics",
           "rose_field", "run", "write_trajectory_csv", "run_report"]


@dataclass(frozen=True)
class ScheduleEvent:
    """Present ``item`` and/or merge two frontier refs at ``time``.

    A merge result is pushed under ``ref`` (default ``"(a b)"``).
    """

    time: float
    item: LexicalItem | None = None
    merge: tuple[str, str] | None = None
    ref: str | None = None

    def __post_init__(self):
        if self.item is None and self.merge is None:
            raise ScheduleError("event needs an item, a merge instruction, or both")


@dataclass(frozen=True)
class RoseState:
    r: np.ndarray
    o: np.ndarray
    e: np.ndarray
    frontier: tuple = ()

    def __post_init__(self):
        r = np.array(self.r, dtype=float).reshape(-1)
        o = np.array(self.o, dtype=float).reshape(-1)
        e = wrap_phase(np.array(self.e, dtype=float).reshape(-1))
        if np.any(o < 0):
            raise ValueError("rates must be non-negative")
        frontier = tuple((str(ref), tuple(float(v) for v in vec)) for ref, vec in self.frontier)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "o", o)
        object.__setattr__(self, "e", np.atleast_1d(e))
        object.__setattr__(self, "frontier", frontier)

    @classmethod
    def zeros(cls, m: int, n_neurons: int, phases) -> "RoseState":
        return cls(np.zeros(m), np.zeros(n_neurons), phases)

    def continuous(self) -> np.ndarray:
        return np.concatenate((self.r, self.o, self.e))

    def with_continuous(self, y: np.ndarray) -> "RoseState":
        m, n = self.r.size, self.o.size
        return RoseState(y[:m], np.maximum(y[m:m + n], 0.0), y[m + n:], self.frontier)

    def with_frontier(self, frontier) -> "RoseState":
        return RoseState(self.r, self.o, self.e, frontier)


@dataclass(frozen=True)
class RoseDerivative:
    r: np.ndarray
    o: np.ndarray
    e: np.ndarray

    def vector(self) -> np.ndarray:
        return np.concatenate((self.r, self.o, self.e))


@dataclass(frozen=True)
class RoseDynamics:
    projection: Projection
    reducer: RecurrentReducer
    population: SpikingPopulation
    kuramoto: KuramotoNetwork
    schedule: tuple[ScheduleEvent, ...] = ()
    tau_r: float = 0.05
    tau_o: float = 0.05
    base_scale: float = 50.0

    def __post_init__(self):
        sched = tuple(self.schedule)
        times = [ev.time for ev in sched]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ScheduleError("schedule times must be strictly increasing")
        m, n = self.projection.shape
        if self.reducer.m != m:
            raise DimensionError(f"reducer works in {self.reducer.m} dims, projection in {m}")
        for ev in sched:
            if ev.item is not None and len(ev.item.embedding) != n:
                raise DimensionError(f"item {ev.item.id!r} embedding is not length {n}")
        if self.tau_r <= 0 or self.tau_o <= 0:
            raise ValueError("time constants must be > 0")
        object.__setattr__(self, "schedule", sched)

    def current_input(self, t: float) -> np.ndarray | None:
        x = None
        for ev in self.schedule:
            if ev.time > t:
                break
            if ev.item is not None:
                x = np.asarray(ev.item.embedding)
        return x


def _field(y: np.ndarray, x, dyn: RoseDynamics, m: int, n: int) -> np.ndarray:
    r, o, e = y[:m], y[m:m + n], y[m + n:]
    if x is None:
        dr, do = np.zeros(m), np.zeros(n)
    else:
        dr = (compress(dyn.projection, x) - r) / dyn.tau_r
        pop = dyn.population
        gain = 1.0 + pop.alpha * np.cos(e[0] - pop.preferred_phase) if e.size else 1.0
        target = dyn.base_scale * np.asarray(pop.weights) * gain
        do = (target - o) / dyn.tau_o
    de = kuramoto_field(e, dyn.kuramoto.natural_frequencies, dyn.kuramoto.coupling)
    return np.concatenate((dr, do, de))


def _check_dims(state: RoseState, dyn: RoseDynamics):
    if (state.r.size != dyn.projection.shape[0] or state.o.size != dyn.population.size
            or state.e.size != dyn.kuramoto.phases.size):
        raise DimensionError("state dimensions do not match the dynamics")


def rose_field(state: RoseState, t: float, dyn: RoseDynamics) -> RoseDerivative:
    """Derivative of the continuous blocks; the frontier has none between events."""
    _check_dims(state, dyn)
    m, n = state.r.size, state.o.size
    d = _field(state.continuous(), dyn.current_input(t), dyn, m, n)
    return RoseDerivative(d[:m], d[m:m + n], d[m + n:])


def _apply_event(state: RoseState, ev: ScheduleEvent, dyn: RoseDynamics, log: list) -> RoseState:
    frontier = list(state.frontier)
    if ev.item is not None:
        vec = compress(dyn.projection, ev.item.embedding)
        frontier.append((ev.item.id, tuple(vec)))
        log.append({"time": ev.time, "kind": "present", "ref": ev.item.id})
    if ev.merge is not None:
        a, b = ev.merge
        refs = [ref for ref, _ in frontier]
        if a == b or a not in refs or b not in refs:
            raise ScheduleError(f"cannot merge {a!r} and {b!r} at t={ev.time}: not both on the frontier")
        va = frontier.pop(refs.index(a))[1]
        refs = [ref for ref, _ in frontier]
        vb = frontier.pop(refs.index(b))[1]
        ref = ev.ref or f"({a} {b})"
        frontier.append((ref, tuple(compose_embedding(va, vb, dyn.reducer))))
        log.append({"time": ev.time, "kind": "merge", "ref": ref, "children": [a, b]})
    return state.with_frontier(frontier)


def run(dyn: RoseDynamics, initial: RoseState, duration: float, dt: float,
        log: list | None = None) -> list[tuple[float, RoseState]]:
    """Integrate from 0 to ``duration``; returns ``(t, state)`` on the ``dt`` grid.

    Events fire exactly at their times (a step is split when one falls
    inside it); recorded states are post-event. Pass a list as ``log`` to
    collect the applied events.
    """
    if not dt > 0:
        raise StepSizeError(f"dt must be > 0, got {dt}")
    check_kuramoto_dt(dyn.kuramoto.natural_frequencies, dt)
    if dt > 0.5 * min(dyn.tau_r, dyn.tau_o):
        raise StepSizeError(f"dt={dt} exceeds half the shortest time constant")
    if duration < 0:
        raise ScheduleError("duration must be >= 0")
    if any(ev.time < 0 or ev.time > duration + 1e-12 for ev in dyn.schedule):
        raise ScheduleError("schedule extends outside [0, duration]")
    _check_dims(initial, dyn)
    log = [] if log is None else log

    m, n = initial.r.size, initial.o.size
    eps = 1e-9 * max(dt, 1.0)
    events = list(dyn.schedule)
    pending = 0

    def fire(state, t):
        nonlocal pending
        while pending < len(events) and events[pending].time <= t + eps:
            state = _apply_event(state, events[pending], dyn, log)
            pending += 1
        return state

    t = 0.0
    state = fire(initial, t)
    traj = [(0.0, state)]
    n_steps = int(np.ceil(duration / dt - 1e-9))
    for k in range(1, n_steps + 1):
        t_grid = min(k * dt, duration)
        while t < t_grid - eps:
            t_stop = t_grid
            if pending < len(events) and events[pending].time < t_grid - eps:
                t_stop = events[pending].time
            x = dyn.current_input(t + eps)
            y = rk4_step(lambda yy: _field(yy, x, dyn, m, n), state.continuous(), t_stop - t)
            state = state.with_continuous(y)
            t = t_stop
            state = fire(state, t)
        t = t_grid
        traj.append((t, state))
    return traj


# --------------------------------------------------------------------------
# export


def write_trajectory_csv(path, traj: Sequence[tuple[float, RoseState]]) -> None:
    s0 = traj[0][1]
    header = (["t"] + [f"r_{i}" for i in range(s0.r.size)] + [f"o_{i}" for i in range(s0.o.size)]
              + [f"e_{i}" for i in range(s0.e.size)] + ["frontier_size"])
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(header)
        for t, s in traj:
            wr.writerow([f"{t:.15g}"] + [f"{v:.15g}" for v in s.continuous()] + [len(s.frontier)])


def run_report(dyn: RoseDynamics, traj, log, params: dict | None = None) -> dict:
    t_end, final = traj[-1]
    return {
        "parameters": dict(params or {}, tau_r=dyn.tau_r, tau_o=dyn.tau_o,
                           base_scale=dyn.base_scale, n_steps=len(traj) - 1),
        "events": log,
        "summary": {
            "t_end": t_end,
            "frontier": [ref for ref, _ in final.frontier],
            "frontier_size": len(final.frontier),
            "final_order_parameter": order_parameter(final.e) if final.e.size else None,
            "final_r": final.r.tolist(),
            "final_o": final.o.tolist(),
        },
    }
