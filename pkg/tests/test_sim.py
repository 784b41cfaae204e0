import math

import numpy as np
import pytest

from neurosyntax.errors import DimensionError, ScheduleError, StepSizeError
from neurosyntax.lexicon import Projection, RecurrentReducer, compose_embedding, compress
from neurosyntax.signals import TWO_PI, KuramotoNetwork, kuramoto_field, order_parameter
from neurosyntax.sim import (RoseDynamics, RoseState, ScheduleEvent, rose_field, run,
                             run_report, write_trajectory_csv)
from neurosyntax.spiking import SpikingPopulation
from neurosyntax.syntax import LexicalItem

RNG = np.random.default_rng(21)
W = Projection(RNG.standard_normal((2, 4)) / 2)
RED = RecurrentReducer(RNG.standard_normal((2, 2)) / 2, RNG.standard_normal((2, 4)) / 2, np.zeros(2))
ITEMS = [LexicalItem(f"x{k}", "N", tuple(RNG.standard_normal(4)), 0.5) for k in range(4)]
POP = SpikingPopulation((0.2, 0.3, 0.5), 0.5, 1.0)


def dynamics(schedule=(), K=1.0, omega=TWO_PI * 6, n_osc=3, **kw):
    kn = KuramotoNetwork.all_to_all(np.full(n_osc, omega), K, np.zeros(n_osc))
    return RoseDynamics(W, RED, POP, kn, tuple(schedule), **kw)


def start(n_osc=3, phases=None):
    return RoseState.zeros(2, 3, np.linspace(0, 2, n_osc) if phases is None else phases)


def test_no_input_no_coupling_is_fixed_point():
    dyn = dynamics(K=0.0, omega=0.0)
    s = RoseState([0.3, -0.2], [1.0, 2.0, 3.0], [0.1, 1.0, 4.0])
    d = rose_field(s, 0.5, dyn)
    assert not np.any(d.vector())
    traj = run(dyn, s, 0.5, 1e-2)
    assert np.array_equal(traj[-1][1].continuous(), s.continuous())


def test_e_block_is_kuramoto_field():
    dyn = dynamics()
    s = start(phases=[0.4, 0.4, 0.4])
    assert np.array_equal(rose_field(s, 0.0, dyn).e,
                          kuramoto_field(s.e, dyn.kuramoto.natural_frequencies, dyn.kuramoto.coupling))


def test_r_block_relaxes_exponentially():
    tau = 0.05
    dyn = dynamics([ScheduleEvent(0.0, ITEMS[0])], tau_r=tau)
    target = compress(W, ITEMS[0].embedding)
    traj = run(dyn, start(), 5 * tau, 1e-3)
    for t, s in traj[1:]:
        closed = target * (1 - math.exp(-t / tau))
        assert np.allclose(s.r, closed, rtol=1e-6, atol=1e-9)
    assert np.allclose(traj[-1][1].r, target, rtol=0.01)


def test_o_block_tracks_modulated_target():
    dyn = dynamics([ScheduleEvent(0.0, ITEMS[1])], K=0.0, omega=0.0, tau_o=0.02)
    s0 = RoseState.zeros(2, 3, [1.0, 1.0, 1.0])
    s = run(dyn, s0, 0.5, 1e-3)[-1][1]
    expected = 50.0 * np.array(POP.weights) * (1 + 0.5 * math.cos(1.0 - 1.0))
    assert np.allclose(s.o, expected, rtol=1e-6)


def test_duration_zero():
    traj = run(dynamics(), start(), 0.0, 1e-3)
    assert len(traj) == 1 and traj[0][0] == 0.0


def _merge_schedule(n_leaves):
    ev = [ScheduleEvent(0.01 * (k + 1), ITEMS[k]) for k in range(n_leaves)]
    t = 0.01 * (n_leaves + 1)
    refs = [it.id for it in ITEMS[:n_leaves]]
    k = 0
    while len(refs) > 1:
        a, b = refs.pop(0), refs.pop(0)
        name = f"m{k}"
        ev.append(ScheduleEvent(t, None, (a, b), name))
        refs.append(name)
        t += 0.01
        k += 1
    return ev


@pytest.mark.parametrize("n_leaves", [3, 4])
def test_frontier_collapses_to_one(n_leaves):
    sched = _merge_schedule(n_leaves)
    log = []
    traj = run(dynamics(sched), start(), 0.2, 1e-3, log)
    final = traj[-1][1]
    n_merges = sum(1 for e in sched if e.merge)
    assert len(final.frontier) == n_leaves - n_merges == 1
    assert [e["kind"] for e in log].count("merge") == n_merges


def test_frontier_composition_values():
    sched = [ScheduleEvent(0.01, ITEMS[0]), ScheduleEvent(0.02, ITEMS[1]),
             ScheduleEvent(0.03, None, ("x0", "x1"), "xy")]
    final = run(dynamics(sched), start(), 0.05, 1e-3)[-1][1]
    (ref, vec), = final.frontier
    expected = compose_embedding(compress(W, ITEMS[0].embedding), compress(W, ITEMS[1].embedding), RED)
    assert ref == "xy" and np.allclose(vec, expected, atol=1e-15)


def test_frontier_size_tracks_events_along_trajectory():
    sched = _merge_schedule(4)
    traj = run(dynamics(sched), start(), 0.1, 1e-3)
    for t, s in traj:
        presented = sum(1 for e in sched if e.item is not None and e.time <= t + 1e-12)
        merged = sum(1 for e in sched if e.merge is not None and e.time <= t + 1e-12)
        assert len(s.frontier) == presented - merged


def test_step_halving_converges():
    sched = _merge_schedule(3)
    finals = []
    for dt in (2e-3, 1e-3):
        finals.append(run(dynamics(sched), start(), 0.3, dt)[-1][1].continuous())
    assert np.max(np.abs(finals[0] - finals[1])) < 1e-6


def test_phases_wrapped_and_order_parameter_bounded():
    traj = run(dynamics(_merge_schedule(3)), start(phases=[0.0, 3.0, 6.0]), 0.5, 1e-3)
    for _, s in traj:
        assert np.all((s.e >= 0) & (s.e < TWO_PI))
        assert 0.0 <= order_parameter(s.e) <= 1.0 + 1e-12
        assert np.all(s.o >= 0)


def test_runs_are_bit_reproducible():
    a = run(dynamics(_merge_schedule(4)), start(), 0.2, 1e-3)
    b = run(dynamics(_merge_schedule(4)), start(), 0.2, 1e-3)
    assert all(np.array_equal(x[1].continuous(), y[1].continuous()) and x[1].frontier == y[1].frontier
               for x, y in zip(a, b))


def test_errors():
    with pytest.raises(StepSizeError):
        run(dynamics(), start(), 1.0, 0.0)
    with pytest.raises(StepSizeError):
        run(dynamics(omega=500.0), start(), 1.0, 1e-3)
    with pytest.raises(StepSizeError):
        run(dynamics(tau_r=1e-3), start(), 1.0, 1e-3)
    with pytest.raises(ScheduleError):
        run(dynamics([ScheduleEvent(2.0, ITEMS[0])]), start(), 1.0, 1e-3)
    with pytest.raises(ScheduleError):
        run(dynamics([ScheduleEvent(0.1, None, ("x0", "x1"))]), start(), 1.0, 1e-3)
    with pytest.raises(ScheduleError):
        dynamics([ScheduleEvent(0.2, ITEMS[0]), ScheduleEvent(0.1, ITEMS[1])])
    with pytest.raises(DimensionError):
        rose_field(RoseState.zeros(3, 3, [0.0] * 3), 0.0, dynamics())


def test_exports(tmp_path):
    log = []
    dyn = dynamics(_merge_schedule(3))
    traj = run(dyn, start(), 0.1, 1e-3, log)
    write_trajectory_csv(tmp_path / "traj.csv", traj)
    lines = (tmp_path / "traj.csv").read_text().splitlines()
    assert lines[0] == "t,r_0,r_1,o_0,o_1,o_2,e_0,e_1,e_2,frontier_size"
    assert len(lines) == len(traj) + 1
    rep = run_report(dyn, traj, log, {"dt": 1e-3})
    assert rep["summary"]["frontier_size"] == 1
    assert rep["parameters"]["n_steps"] == 100
    assert len(rep["events"]) == 5
