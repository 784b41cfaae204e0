"""Deterministic oscillatory synthesis.

Traveling waves, the phase-amplitude coupling (PAC) law, category phase
codes, Kuramoto phase dynamics and nested-phase recursion. All phases are
wrapped to ``[0, 2*pi)``.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import EmptyInputError, NyquistError, StepSizeError, UnknownCategoryError

__all__ = [
    "TWO_PI", "wrap_phase", "circular_distance",
    "TravelingWave", "HighFreqComponent", "PacConfig", "PhaseCode",
    "KuramotoNetwork", "SignalTrace",
    "eval_wave", "wave_phase", "pac_amplitude", "synth_unmodulated",
    "synth_modulated", "synth_wave", "eval_phase_code", "kuramoto_field",
    "kuramoto_step", "order_parameter", "nested_phase", "rk4_step",
    "write_trace_csv", "read_trace_csv",
    "DELTA_HZ", "THETA_HZ", "GAMMA_HZ",
]

TWO_PI = 2.0 * np.pi

# conventional band centres used for defaults and demos
DELTA_HZ = 2.0
THETA_HZ = 6.0
GAMMA_HZ = 60.0


def wrap_phase(phi):
    """Wrap to ``[0, 2*pi)``; scalar in, float out."""
    out = np.mod(phi, TWO_PI)
    # np.mod can round tiny negatives up to exactly 2*pi
    out = np.where(out >= TWO_PI, 0.0, out)
    return float(out) if np.ndim(out) == 0 else out


def circular_distance(a, b):
    d = np.abs(np.mod(np.asarray(a) - np.asarray(b), TWO_PI))
    d = np.minimum(d, TWO_PI - d)
    return float(d) if np.ndim(d) == 0 else d


@dataclass(frozen=True)
class TravelingWave:
    amplitude: float = 1.0
    frequency: float = DELTA_HZ
    wavenumber: float = 0.0
    phase_offset: float = 0.0

    def __post_init__(self):
        if self.amplitude < 0:
            raise ValueError("wave amplitude must be >= 0")
        if self.frequency <= 0:
            raise ValueError("wave frequency must be > 0")
        object.__setattr__(self, "phase_offset", wrap_phase(self.phase_offset))


@dataclass(frozen=True)
class HighFreqComponent:
    base_amplitude: float
    modulation_depth: float
    frequency: float
    phase: float = 0.0

    def __post_init__(self):
        if self.base_amplitude < 0 or self.modulation_depth < 0:
            raise ValueError("amplitudes must be >= 0")
        if self.modulation_depth > self.base_amplitude:
            raise ValueError("modulation depth may not exceed base amplitude")
        if self.frequency <= 0:
            raise ValueError("component frequency must be > 0")


@dataclass(frozen=True)
class PacConfig:
    preferred_phase: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "preferred_phase", wrap_phase(self.preferred_phase))


@dataclass(frozen=True)
class PhaseCode:
    """Maps each syntactic category to a carrier phase offset."""

    amplitude: float = 1.0
    frequency: float = THETA_HZ
    mapping: Mapping[str, float] = field(default_factory=lambda: {
        "N": 0.0, "V": np.pi / 2, "A": np.pi, "P": 3 * np.pi / 2})

    def __post_init__(self):
        if self.amplitude < 0 or self.frequency <= 0:
            raise ValueError("phase code needs amplitude >= 0 and frequency > 0")
        if not self.mapping:
            raise ValueError("phase code mapping is empty")
        mapping = {str(k): wrap_phase(float(v)) for k, v in self.mapping.items()}
        min_sep = TWO_PI / (4 * len(mapping))
        phases = list(mapping.values())
        for i in range(len(phases)):
            for j in range(i + 1, len(phases)):
                if circular_distance(phases[i], phases[j]) < min_sep - 1e-12:
                    raise ValueError("category phases are closer than 2*pi/(4*|categories|)")
        object.__setattr__(self, "mapping", dict(sorted(mapping.items())))

    @property
    def categories(self) -> list[str]:
        return list(self.mapping)

    def phase(self, category: str) -> float:
        try:
            return self.mapping[category]
        except KeyError:
            raise UnknownCategoryError(category) from None


@dataclass(frozen=True)
class SignalTrace:
    """Uniformly sampled real signal; ``t0`` is the time of sample 0."""

    sample_rate: float
    samples: np.ndarray
    x: float = 0.0
    t0: float = 0.0

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be > 0")
        s = np.array(self.samples, dtype=float)
        if s.ndim != 1 or s.size == 0 or not np.all(np.isfinite(s)):
            raise ValueError("samples must be a finite, non-empty 1-D sequence")
        s.flags.writeable = False
        object.__setattr__(self, "samples", s)

    @property
    def times(self) -> np.ndarray:
        return self.t0 + np.arange(self.samples.size) / self.sample_rate

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate

    def __len__(self) -> int:
        return self.samples.size

    def segment(self, start: float, stop: float) -> "SignalTrace":
        """Samples with ``start <= t < stop`` (times measured like ``times``)."""
        i0 = int(round((start - self.t0) * self.sample_rate))
        i1 = int(round((stop - self.t0) * self.sample_rate))
        i0, i1 = max(i0, 0), min(i1, self.samples.size)
        return SignalTrace(self.sample_rate, self.samples[i0:i1], self.x,
                           self.t0 + i0 / self.sample_rate)

    def with_samples(self, samples) -> "SignalTrace":
        return SignalTrace(self.sample_rate, samples, self.x, self.t0)


# --------------------------------------------------------------------------
# closed-form signals


def eval_wave(w: TravelingWave, t, x=0.0):
    """``A_L cos(2 pi f_L t - k x + phi_L)``; broadcasts over arrays."""
    return w.amplitude * np.cos(TWO_PI * w.frequency * t - w.wavenumber * x + w.phase_offset)


def wave_phase(w: TravelingWave, t, x=0.0):
    return wrap_phase(TWO_PI * w.frequency * t - w.wavenumber * x + w.phase_offset)


def pac_amplitude(c: HighFreqComponent, phi, p: PacConfig):
    """Instantaneous amplitude of ``c`` when the slow wave sits at phase ``phi``."""
    return c.base_amplitude + c.modulation_depth * np.cos(phi - p.preferred_phase)


def _check_sampling(bank: Sequence[HighFreqComponent], sample_rate: float, duration: float):
    if duration * sample_rate < 2:
        raise ValueError("duration * sample_rate must be >= 2")
    if bank and sample_rate <= 2 * max(c.frequency for c in bank):
        raise NyquistError(
            f"sample rate {sample_rate} Hz <= twice the top component "
            f"({max(c.frequency for c in bank)} Hz)")


def _sample_times(sample_rate: float, duration: float, t0: float) -> np.ndarray:
    n = int(round(duration * sample_rate))
    return t0 + np.arange(n) / sample_rate


def synth_unmodulated(bank: Sequence[HighFreqComponent], sample_rate: float, duration: float,
                      x: float = 0.0, t0: float = 0.0) -> SignalTrace:
    """Sum of high-frequency components at their base amplitudes."""
    _check_sampling(bank, sample_rate, duration)
    t = _sample_times(sample_rate, duration, t0)
    out = np.zeros_like(t)
    for c in bank:
        out += c.base_amplitude * np.cos(TWO_PI * c.frequency * t + c.phase)
    return SignalTrace(sample_rate, out, x, t0)


def synth_modulated(bank: Sequence[HighFreqComponent], w: TravelingWave, p: PacConfig,
                    sample_rate: float, duration: float, x: float = 0.0,
                    t0: float = 0.0) -> SignalTrace:
    """High-frequency bank whose amplitudes follow the traveling-wave phase.

    Every component must sit above the wave frequency. ``t0`` offsets the
    sample clock so consecutive segments join continuously.
    """
    _check_sampling(bank, sample_rate, duration)
    for c in bank:
        if c.frequency <= w.frequency:
            raise ValueError(
                f"component at {c.frequency} Hz is not above the wave ({w.frequency} Hz)")
    t = _sample_times(sample_rate, duration, t0)
    phi = wave_phase(w, t, x)
    out = np.zeros_like(t)
    for c in bank:
        out += pac_amplitude(c, phi, p) * np.cos(TWO_PI * c.frequency * t + c.phase)
    return SignalTrace(sample_rate, out, x, t0)


def synth_wave(w: TravelingWave, sample_rate: float, duration: float, x: float = 0.0,
               t0: float = 0.0) -> SignalTrace:
    t = _sample_times(sample_rate, duration, t0)
    return SignalTrace(sample_rate, eval_wave(w, t, x), x, t0)


def eval_phase_code(pc: PhaseCode, category: str, t):
    """``A_s cos(2 pi f_s t + phi_C)`` for the given category."""
    return pc.amplitude * np.cos(TWO_PI * pc.frequency * t + pc.phase(category))


def nested_phase(phi_matrix: float, delta_phi: float, n: int) -> float:
    if n < 0:
        raise ValueError("nesting count must be >= 0")
    return wrap_phase(phi_matrix + n * delta_phi)


# --------------------------------------------------------------------------
# Kuramoto


@dataclass(frozen=True)
class KuramotoNetwork:
    natural_frequencies: np.ndarray
    coupling: np.ndarray
    phases: np.ndarray

    def __post_init__(self):
        w = np.array(self.natural_frequencies, dtype=float)
        k = np.array(self.coupling, dtype=float)
        ph = wrap_phase(np.array(self.phases, dtype=float))
        n = w.size
        if w.ndim != 1 or np.ndim(ph) != 1 or np.size(ph) != n:
            raise ValueError("frequencies and phases must be 1-D of equal length")
        if k.shape != (n, n):
            raise ValueError("coupling must be a square matrix matching the oscillator count")
        if np.any(np.diag(k) != 0):
            raise ValueError("coupling matrix must have a zero diagonal")
        for a in (w, k, ph):
            a.flags.writeable = False
        object.__setattr__(self, "natural_frequencies", w)
        object.__setattr__(self, "coupling", k)
        object.__setattr__(self, "phases", ph)

    @classmethod
    def all_to_all(cls, omegas, k: float, phases) -> "KuramotoNetwork":
        n = len(omegas)
        return cls(omegas, k * (np.ones((n, n)) - np.eye(n)), phases)

    def with_phases(self, phases) -> "KuramotoNetwork":
        return KuramotoNetwork(self.natural_frequencies, self.coupling, phases)


def kuramoto_field(phases, omegas, coupling) -> np.ndarray:
    """``omega_i + sum_j K_ij sin(phi_j - phi_i)``."""
    phases = np.asarray(phases, dtype=float)
    diff = phases[None, :] - phases[:, None]
    return np.asarray(omegas) + np.sum(np.asarray(coupling) * np.sin(diff), axis=1)


def rk4_step(f, y, dt):
    k1 = f(y)
    k2 = f(y + 0.5 * dt * k1)
    k3 = f(y + 0.5 * dt * k2)
    k4 = f(y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def check_kuramoto_dt(omegas, dt: float):
    if not dt > 0:
        raise StepSizeError(f"dt must be > 0, got {dt}")
    top = float(np.max(np.abs(omegas))) if np.size(omegas) else 0.0
    if dt * top >= 0.1:
        raise StepSizeError(f"dt * max|omega| = {dt * top:.3g} violates the 0.1 stability guard")


def kuramoto_step(net: KuramotoNetwork, dt: float) -> KuramotoNetwork:
    """Advance every phase by one RK4 step."""
    check_kuramoto_dt(net.natural_frequencies, dt)
    f = lambda ph: kuramoto_field(ph, net.natural_frequencies, net.coupling)  # noqa: E731
    return net.with_phases(rk4_step(f, np.asarray(net.phases), dt))


def order_parameter(phases) -> float:
    phases = np.asarray(phases, dtype=float)
    if phases.size == 0:
        raise EmptyInputError("order parameter of an empty phase set")
    return float(min(1.0, abs(np.mean(np.exp(1j * phases)))))


# --------------------------------------------------------------------------
# CSV


def write_trace_csv(path, traces) -> None:
    """Write ``t,value`` (one trace) or ``t,x,value`` (several positions)."""
    if isinstance(traces, SignalTrace):
        traces = [traces]
    spatial = len(traces) > 1
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["t", "x", "value"] if spatial else ["t", "value"])
        for tr in traces:
            for t, v in zip(tr.times, tr.samples):
                row = [f"{t:.15g}", f"{tr.x:.15g}", f"{v:.15g}"] if spatial else [f"{t:.15g}", f"{v:.15g}"]
                wr.writerow(row)


def read_trace_csv(path) -> list[SignalTrace]:
    """Inverse of :func:`write_trace_csv`; one trace per distinct ``x``."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if header not in (["t", "value"], ["t", "x", "value"]):
        raise ValueError(f"{path}: unexpected header {header}")
    try:
        data = np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=float)
    except ValueError as exc:
        raise ValueError(f"{path}: non-numeric field ({exc})") from None
    if data.size == 0 or data.shape[1] != len(header):
        raise ValueError(f"{path}: no rows or ragged rows")
    groups = [(0.0, data)] if len(header) == 2 else [
        (x, data[data[:, 1] == x]) for x in dict.fromkeys(data[:, 1])]
    out = []
    for x, block in groups:
        t = block[:, 0]
        if t.size < 2:
            raise ValueError(f"{path}: need at least two samples per trace")
        dt = np.diff(t)
        if np.any(dt <= 0) or not np.allclose(dt, dt[0], rtol=1e-6):
            raise ValueError(f"{path}: samples are not uniformly spaced")
        rate = float(f"{1.0 / float(np.mean(dt)):.9g}")
        out.append(SignalTrace(rate, block[:, -1], float(x), float(t[0])))
    return out
