import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import solve_ivp, trapezoid

from neurosyntax.errors import (EmptyInputError, NyquistError, StepSizeError,
                                UnknownCategoryError)
from neurosyntax.signals import (TWO_PI, HighFreqComponent, KuramotoNetwork, PacConfig,
                                 PhaseCode, SignalTrace, TravelingWave, circular_distance,
                                 eval_phase_code, eval_wave, kuramoto_field, kuramoto_step,
                                 nested_phase, order_parameter, pac_amplitude, read_trace_csv,
                                 synth_modulated, synth_unmodulated, wave_phase, wrap_phase,
                                 write_trace_csv)

phases = st.floats(-20, 20, allow_nan=False)


def test_eval_wave_examples():
    w = TravelingWave(1.0, 3.0)
    assert eval_wave(w, 0.0) == 1.0
    assert abs(eval_wave(w, 1 / 12)) < 1e-12
    w2 = TravelingWave(2.0, 2.0, 1.0, 0.3)
    assert eval_wave(w2, 0.1, 0.5) == pytest.approx(2 * math.cos(0.4 * math.pi - 0.5 + 0.3), abs=1e-14)


def test_wave_phase_examples():
    w = TravelingWave(1.0, 2.0, 0.8)
    assert wave_phase(w, 0.0) == 0.0
    assert circular_distance(wave_phase(w, 0.37), wave_phase(w, 0.37 + 1 / 2.0)) < 1e-9
    xs = np.linspace(0, 1, 5)
    ph = np.unwrap(wave_phase(w, 0.1, xs))
    assert np.allclose(np.diff(ph), -0.8 * 0.25)


def test_wave_validation():
    with pytest.raises(ValueError):
        TravelingWave(-1.0)
    with pytest.raises(ValueError):
        TravelingWave(1.0, 0.0)
    assert TravelingWave(phase_offset=TWO_PI + 0.5).phase_offset == pytest.approx(0.5)


def test_pac_amplitude_examples():
    c = HighFreqComponent(2.0, 1.5, 60.0)
    p = PacConfig(1.0)
    assert pac_amplitude(c, 1.0, p) == pytest.approx(3.5)
    assert pac_amplitude(c, 1.0 + math.pi, p) == pytest.approx(0.5)
    grid = np.linspace(0, TWO_PI, 4097)
    assert trapezoid(pac_amplitude(c, grid, p), grid) / TWO_PI == pytest.approx(2.0, abs=1e-9)


def test_component_requires_nonnegative_envelope():
    with pytest.raises(ValueError):
        HighFreqComponent(1.0, 1.5, 60.0)


def test_synth_modulated_matches_pointwise_oracle():
    c = HighFreqComponent(1.2, 0.7, 37.0, 0.4)
    w = TravelingWave(1.0, 3.0, 0.5, 0.2)
    p = PacConfig(2.0)
    tr = synth_modulated([c], w, p, 500.0, 1.0, x=0.3)
    for k in range(0, len(tr), 7):
        t = k / 500.0
        phi = (TWO_PI * 3.0 * t - 0.5 * 0.3 + 0.2) % TWO_PI
        ref = (1.2 + 0.7 * math.cos(phi - 2.0)) * math.cos(TWO_PI * 37.0 * t + 0.4)
        assert tr.samples[k] == pytest.approx(ref, rel=1e-12, abs=1e-12)


def test_synth_modulated_special_cases():
    bank = [HighFreqComponent(1.0, 0.0, 40.0), HighFreqComponent(0.5, 0.0, 70.0, 1.0)]
    w, p = TravelingWave(), PacConfig()
    mod = synth_modulated(bank, w, p, 1000.0, 2.0)
    assert np.allclose(mod.samples, synth_unmodulated(bank, 1000.0, 2.0).samples, atol=1e-12)
    empty = synth_modulated([], w, p, 1000.0, 1.0)
    assert not np.any(empty.samples)


def test_synth_nyquist_and_band_checks():
    with pytest.raises(NyquistError):
        synth_modulated([HighFreqComponent(1, 0.5, 60.0)], TravelingWave(), PacConfig(), 100.0, 1.0)
    with pytest.raises(ValueError):
        synth_modulated([HighFreqComponent(1, 0.5, 1.0)], TravelingWave(), PacConfig(), 100.0, 1.0)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 3), st.floats(0, 1), st.floats(10, 90)), max_size=4),
       st.floats(0, 6.28))
def test_synth_bounded_by_envelope_sum(rows, pref):
    bank = [HighFreqComponent(a0, a0 * frac, f) for a0, frac, f in rows]
    tr = synth_modulated(bank, TravelingWave(), PacConfig(pref), 200.0, 0.5)
    bound = sum(c.base_amplitude + c.modulation_depth for c in bank)
    assert np.all(np.abs(tr.samples) <= bound + 1e-12)


@settings(max_examples=100)
@given(phases, phases)
def test_pac_periodic_with_peak_at_preference(phi, pref):
    c = HighFreqComponent(1.0, 0.6, 50.0)
    p = PacConfig(wrap_phase(pref))
    assert pac_amplitude(c, phi, p) == pytest.approx(pac_amplitude(c, phi + TWO_PI, p), abs=1e-12)
    assert pac_amplitude(c, phi, p) <= pac_amplitude(c, p.preferred_phase, p) + 1e-15


def test_phase_code_examples():
    pc = PhaseCode()
    assert eval_phase_code(pc, "N", 0.0) == pytest.approx(1.0)
    assert eval_phase_code(pc, "A", 0.0) == pytest.approx(-1.0)
    with pytest.raises(UnknownCategoryError):
        eval_phase_code(pc, "Q", 0.0)


def test_phase_code_separation_enforced():
    with pytest.raises(ValueError):
        PhaseCode(mapping={"N": 0.0, "V": 0.1})


def test_phase_code_time_shift_by_cross_correlation():
    pc = PhaseCode(frequency=6.0)
    fs = 2000.0
    t = np.arange(int(fs)) / fs
    a = eval_phase_code(pc, "N", t)
    b = eval_phase_code(pc, "V", t)
    delta = pc.phase("V") - pc.phase("N")
    lags = np.arange(0, int(fs / 6.0))
    corr = [np.dot(a[lag:], b[:len(b) - lag]) / (len(b) - lag) for lag in lags]
    best = lags[int(np.argmax(corr))] / fs
    assert best == pytest.approx(delta / (TWO_PI * 6.0), abs=1.0 / fs)


def test_kuramoto_uncoupled_drift():
    omegas = np.array([1.0, -3.0, 7.5])
    net = KuramotoNetwork.all_to_all(omegas, 0.0, [0.1, 2.0, 5.0])
    start = net.phases.copy()
    dt = 1e-3
    for _ in range(1000):
        net = kuramoto_step(net, dt)
    expected = wrap_phase(start + omegas * 1.0)
    assert np.max(circular_distance(net.phases, expected)) < 1e-9


def test_kuramoto_two_oscillator_lock_against_reference():
    net = KuramotoNetwork.all_to_all([TWO_PI * 6] * 2, 1.0, [0.0, 1.0])
    for _ in range(5000):
        net = kuramoto_step(net, 1e-3)
    d = circular_distance(net.phases[0], net.phases[1])
    ref = solve_ivp(lambda t, y: -2.0 * np.sin(y), (0, 5), [1.0], rtol=1e-12, atol=1e-14).y[0, -1]
    assert d < 0.01
    assert d == pytest.approx(abs(ref), abs=1e-8)
    # closed form: tan(d/2) = tan(d0/2) exp(-2 K t)
    assert d == pytest.approx(2 * math.atan(math.tan(0.5) * math.exp(-10.0)), abs=1e-8)


def test_kuramoto_symmetric_fixed_point():
    net = KuramotoNetwork.all_to_all([5.0] * 3, 2.0, [1.0] * 3)
    for _ in range(100):
        net = kuramoto_step(net, 1e-3)
    assert np.ptp(net.phases) == 0.0


def test_kuramoto_gap_non_increasing():
    net = KuramotoNetwork.all_to_all([3.0, 3.0], 0.7, [0.0, 2.5])
    prev = circular_distance(*net.phases)
    for _ in range(2000):
        net = kuramoto_step(net, 1e-3)
        d = circular_distance(*net.phases)
        assert d <= prev + 1e-15
        prev = d


def test_kuramoto_guards():
    with pytest.raises(StepSizeError):
        kuramoto_step(KuramotoNetwork.all_to_all([200.0], 0.0, [0.0]), 1e-3)
    with pytest.raises(StepSizeError):
        kuramoto_step(KuramotoNetwork.all_to_all([1.0], 0.0, [0.0]), 0.0)
    with pytest.raises(ValueError):
        KuramotoNetwork([1.0, 1.0], np.ones((2, 2)), [0.0, 0.0])


def test_kuramoto_field_definition():
    ph = np.array([0.1, 0.9, 2.0])
    om = np.array([1.0, 2.0, 3.0])
    K = np.array([[0, 0.5, 0.2], [0.1, 0, 0.3], [0.4, 0.6, 0]])
    brute = [om[i] + sum(K[i, j] * math.sin(ph[j] - ph[i]) for j in range(3)) for i in range(3)]
    assert np.allclose(kuramoto_field(ph, om, K), brute, atol=1e-14)


def test_order_parameter_examples():
    assert order_parameter([0.3] * 5) == pytest.approx(1.0)
    assert order_parameter([0, math.pi / 2, math.pi, 3 * math.pi / 2]) < 1e-12
    assert order_parameter([0, math.pi, 0]) == pytest.approx(1 / 3)
    with pytest.raises(EmptyInputError):
        order_parameter([])


@settings(max_examples=100)
@given(st.lists(phases, min_size=1, max_size=10), phases)
def test_order_parameter_shift_invariant(ph, shift):
    r = order_parameter(ph)
    assert 0.0 <= r <= 1.0 + 1e-12
    assert order_parameter(np.asarray(ph) + shift) == pytest.approx(r, abs=1e-9)


def test_nested_phase_examples():
    assert nested_phase(0.4, 0.3, 0) == pytest.approx(0.4)
    assert nested_phase(0.4, math.pi / 2, 4) == pytest.approx(0.4)
    assert nested_phase(0.3, 1.0, 7) == pytest.approx(math.fmod(7.3, TWO_PI))


@settings(max_examples=100)
@given(phases, phases, st.integers(0, 50), st.integers(0, 50))
def test_nested_phase_composes(phi, delta, a, b):
    lhs = nested_phase(phi, delta, a + b)
    rhs = nested_phase(nested_phase(phi, delta, a), delta, b)
    assert circular_distance(lhs, rhs) < 1e-9


def test_signal_trace_validation():
    with pytest.raises(ValueError):
        SignalTrace(0.0, [1.0])
    with pytest.raises(ValueError):
        SignalTrace(10.0, [])
    with pytest.raises(ValueError):
        SignalTrace(10.0, [np.nan])


def test_trace_csv_round_trip(tmp_path):
    tr = synth_modulated([HighFreqComponent(1.0, 0.5, 40.0)], TravelingWave(), PacConfig(),
                         250.0, 0.5)
    path = tmp_path / "t.csv"
    write_trace_csv(path, tr)
    assert path.read_text().splitlines()[0] == "t,value"
    (back,) = read_trace_csv(path)
    assert back.sample_rate == 250.0
    assert np.allclose(back.samples, tr.samples, rtol=1e-14, atol=1e-15)


def test_trace_csv_spatial_sweep(tmp_path):
    w = TravelingWave(1.0, 2.0, 1.5)
    bank = [HighFreqComponent(1.0, 0.5, 40.0)]
    traces = [synth_modulated(bank, w, PacConfig(), 200.0, 0.5, x=x) for x in (0.0, 0.5)]
    path = tmp_path / "sweep.csv"
    write_trace_csv(path, traces)
    assert path.read_text().splitlines()[0] == "t,x,value"
    back = read_trace_csv(path)
    assert [b.x for b in back] == [0.0, 0.5]
    assert np.allclose(back[1].samples, traces[1].samples, atol=1e-14)
