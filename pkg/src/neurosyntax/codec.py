"""Encode labeled trees into multiband signals and spike trains, and back.

Each node of the tree gets one fixed-length time slot, in bottom-up
(post-order) sequence. Within its slot a node contributes

* to the low-frequency trace: the category phase code, shifted by
  ``depth * delta_phi``, on top of the traveling wave;
* to the high-frequency trace: a PAC-modulated bank whose amplitudes are
  derived from the mean embedding of the node's leaves;
* to the spike trains: the phase-modulated rates of a population with one
  neuron per leaf of the whole tree.

Decoding reads the slot grid and depths from the schedule and recovers the
category of every slot from the low-frequency trace by template
correlation, leaf identities from the high-frequency trace, and rebuilds the
tree bottom-up with a stack.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import signal as sps

from .errors import (AmbiguousDecodeError, DecodeError, InsufficientDataError, NyquistError,
                     TooShortError, UnknownLeafError, UnlabeledTreeError)
from .lexicon import Lexicon, normalize_weights
from .signals import (TWO_PI, HighFreqComponent, PacConfig, PhaseCode, SignalTrace,
                      TravelingWave, eval_wave, nested_phase, read_trace_csv, synth_modulated,
                      wrap_phase, write_trace_csv)
from .spiking import (SpikeTrain, SpikingPopulation, make_rng, modulated_rate,
                      read_spikes_csv, sample_spikes, write_spikes_csv)
from .syntax import (Leaf, Node, SyntacticObject, depth, is_labeled, leaves, linearize,
                     postorder)

__all__ = [
    "EncodingConfig", "ScheduleEntry", "EncodedBundle",
    "node_bank", "encode_tree", "estimate_phase", "demodulate", "phase_amplitude_profile",
    "modulation_index", "preferred_phase", "decode_category", "decode_leaf", "decode_tree",
    "category_phase_series", "estimate_weights", "add_noise",
    "save_bundle", "load_bundle",
]

MI_BINS = 18


@dataclass(frozen=True)
class EncodingConfig:
    phase_code: PhaseCode = field(default_factory=PhaseCode)
    wave: TravelingWave = field(default_factory=TravelingWave)
    pac: PacConfig = field(default_factory=PacConfig)
    delta_phi: float = TWO_PI / 16
    base_scale: float = 50.0
    alpha: float = 0.5
    sample_rate: float = 1000.0
    duration_per_node: float = 1.0
    rng_seed: int = 0
    position: float = 0.0
    hf_base: float = 40.0
    hf_spacing: float = 10.0
    mod_depth: float = 0.5
    spike_dt: float = 1e-3
    noise_sd: float = 0.0
    snr_db: float | None = None

    def __post_init__(self):
        top = max(self.phase_code.frequency, self.wave.frequency)
        if self.sample_rate <= 2 * top:
            raise NyquistError(f"sample rate {self.sample_rate} Hz too low for {top} Hz")
        if self.duration_per_node < 4.0 / self.phase_code.frequency - 1e-12:
            raise ValueError("duration_per_node must hold at least 4 carrier cycles")
        if not 0.0 <= self.mod_depth <= 1.0:
            raise ValueError("mod_depth must lie in [0, 1]")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if self.base_scale < 0 or self.spike_dt <= 0 or self.noise_sd < 0:
            raise ValueError("base_scale, spike_dt and noise_sd must be non-negative (spike_dt > 0)")
        if self.hf_base <= self.wave.frequency:
            raise ValueError("hf_base must lie above the traveling-wave frequency")

    def component_frequencies(self, n: int) -> np.ndarray:
        return self.hf_base + self.hf_spacing * np.arange(n)

    def to_json_obj(self) -> dict:
        return {
            "phase_code": {"amplitude": self.phase_code.amplitude,
                           "frequency": self.phase_code.frequency,
                           "mapping": dict(self.phase_code.mapping)},
            "wave": {"amplitude": self.wave.amplitude, "frequency": self.wave.frequency,
                     "wavenumber": self.wave.wavenumber,
                     "phase_offset": self.wave.phase_offset},
            "pac": {"preferred_phase": self.pac.preferred_phase},
            "delta_phi": self.delta_phi, "base_scale": self.base_scale, "alpha": self.alpha,
            "sample_rate": self.sample_rate, "duration_per_node": self.duration_per_node,
            "rng_seed": self.rng_seed, "position": self.position, "hf_base": self.hf_base,
            "hf_spacing": self.hf_spacing, "mod_depth": self.mod_depth,
            "spike_dt": self.spike_dt, "noise_sd": self.noise_sd, "snr_db": self.snr_db,
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "EncodingConfig":
        obj = dict(obj)
        kw = {}
        if "phase_code" in obj:
            kw["phase_code"] = PhaseCode(**obj.pop("phase_code"))
        if "wave" in obj:
            kw["wave"] = TravelingWave(**obj.pop("wave"))
        if "pac" in obj:
            kw["pac"] = PacConfig(**obj.pop("pac"))
        unknown = set(obj) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown encoding fields: {sorted(unknown)}")
        kw.update(obj)
        return cls(**kw)


@dataclass(frozen=True)
class ScheduleEntry:
    node_id: str
    start: float
    category: str
    depth: int


@dataclass(frozen=True)
class EncodedBundle:
    lf_trace: SignalTrace
    hf_trace: SignalTrace
    spike_trains: tuple[SpikeTrain, ...]
    schedule: tuple[ScheduleEntry, ...]
    neuron_ids: tuple[str, ...] = ()

    def __post_init__(self):
        end = self.lf_trace.t0 + self.lf_trace.duration
        prev = -np.inf
        for e in self.schedule:
            if e.start <= prev or e.start < self.lf_trace.t0 - 1e-9 or e.start >= end:
                raise ValueError("schedule entries must be ordered and inside the trace")
            prev = e.start

    @property
    def duration(self) -> float:
        return self.lf_trace.duration


# --------------------------------------------------------------------------
# encoding


def node_bank(embedding, cfg: EncodingConfig) -> list[HighFreqComponent]:
    """High-frequency bank for an embedding: one component per dimension."""
    e = np.asarray(embedding, dtype=float)
    base = 1.0 + 0.5 * np.tanh(e)
    freqs = cfg.component_frequencies(e.size)
    return [HighFreqComponent(float(a), float(cfg.mod_depth * a), float(f)) for a, f in zip(base, freqs)]


def _node_embedding(so: SyntacticObject, lex: Lexicon) -> np.ndarray:
    return np.mean([lex[it.id].embedding for it in leaves(so)], axis=0)


def add_noise(samples: np.ndarray, snr_db: float, rng: np.random.Generator) -> np.ndarray:
    """Add white Gaussian noise at ``snr_db`` relative to the signal power."""
    power = float(np.mean(samples ** 2))
    sd = np.sqrt(power / 10 ** (snr_db / 10.0))
    return samples + sd * rng.standard_normal(samples.size)


def _slot_phases(bundle_schedule: Sequence[ScheduleEntry], cfg: EncodingConfig,
                 phase_code: PhaseCode | None = None) -> np.ndarray:
    pc = phase_code or cfg.phase_code
    return np.array([nested_phase(pc.phase(e.category), cfg.delta_phi, e.depth)
                     for e in bundle_schedule])


def category_phase_series(schedule: Sequence[ScheduleEntry], cfg: EncodingConfig, t) -> np.ndarray:
    """Instantaneous phase of the category carrier at times ``t``."""
    slot_phi = _slot_phases(schedule, cfg)
    t = np.asarray(t, dtype=float)
    k = np.clip((t / cfg.duration_per_node).astype(int), 0, len(schedule) - 1)
    return wrap_phase(TWO_PI * cfg.phase_code.frequency * t + slot_phi[k])


def encode_tree(so: SyntacticObject, lex: Lexicon, cfg: EncodingConfig) -> EncodedBundle:
    if not is_labeled(so):
        raise UnlabeledTreeError("encode_tree needs a fully labeled tree")
    for it in leaves(so):
        if it.id not in lex:
            raise UnknownLeafError(it.id)
    top = float(cfg.component_frequencies(lex.n)[-1]) if lex.n else 0.0
    if cfg.sample_rate <= 2 * top:
        raise NyquistError(f"sample rate {cfg.sample_rate} Hz too low for the {top} Hz component")

    nodes = postorder(so)
    D, fs = cfg.duration_per_node, cfg.sample_rate
    n_per = int(round(D * fs))
    schedule, lf_parts, hf_parts = [], [], []
    internal = 0
    for k, node in enumerate(nodes):
        start = k * D
        d = depth(node)
        if isinstance(node, Leaf):
            node_id, cat = node.item.id, node.item.category
        else:
            node_id, cat = f"node:{internal}", node.label
            internal += 1
        schedule.append(ScheduleEntry(node_id, start, cat, d))
        phi = nested_phase(cfg.phase_code.phase(cat), cfg.delta_phi, d)
        t = start + np.arange(n_per) / fs
        lf_parts.append(cfg.phase_code.amplitude * np.cos(TWO_PI * cfg.phase_code.frequency * t + phi)
                        + eval_wave(cfg.wave, t, cfg.position))
        bank = node_bank(_node_embedding(node, lex), cfg)
        hf_parts.append(synth_modulated(bank, cfg.wave, cfg.pac, fs, D, cfg.position, start).samples)

    lf, hf = np.concatenate(lf_parts), np.concatenate(hf_parts)
    if cfg.snr_db is not None:
        rng = make_rng([cfg.rng_seed, 1])
        lf, hf = add_noise(lf, cfg.snr_db, rng), add_noise(hf, cfg.snr_db, rng)

    neuron_ids = tuple(it.id for it in linearize(so))
    pop = SpikingPopulation(tuple(normalize_weights(lex, neuron_ids)), cfg.alpha,
                            cfg.pac.preferred_phase, cfg.noise_sd)
    total = len(nodes) * D
    trains = []
    for i in range(pop.size):
        rate_fn = lambda tt, i=i: modulated_rate(  # noqa: E731
            pop, i, category_phase_series(schedule, cfg, tt), cfg.base_scale)
        trains.append(sample_spikes(rate_fn, total, cfg.spike_dt, [cfg.rng_seed, 2, i], pop.noise_sd))

    return EncodedBundle(SignalTrace(fs, lf, cfg.position), SignalTrace(fs, hf, cfg.position),
                         tuple(trains), tuple(schedule), neuron_ids)


# --------------------------------------------------------------------------
# demodulation and coupling metrics


def _boxcar(z: np.ndarray, width: int) -> np.ndarray:
    """Centred moving average; edges hold the nearest full-window value."""
    if width <= 1 or z.size < width:
        return z.copy()
    c = np.concatenate(([0], np.cumsum(z)))
    valid = (c[width:] - c[:-width]) / width
    lead = (width - 1) // 2
    return np.concatenate((np.full(lead, valid[0]), valid,
                           np.full(z.size - valid.size - lead, valid[-1])))


def demodulate(trace: SignalTrace, f: float, cutoff: float | None = None) -> np.ndarray:
    """Complex baseband of ``trace`` at ``f``.

    The result ``z`` satisfies ``trace ~ Re(2 z exp(i 2 pi f t))`` near ``f``,
    so ``2|z|`` is the envelope and ``angle(z)`` the phase offset. Without a
    ``cutoff`` the baseband is smoothed by a one-period moving average, which
    cancels every component offset from ``f`` by a multiple of ``f``
    (including the ``2f`` image); with one, by a zero-phase Butterworth
    low-pass.
    """
    if (trace.samples.size + 1) / trace.sample_rate * f < 4:
        raise TooShortError(f"trace spans {trace.duration * f:.2f} cycles of {f} Hz; need 4")
    z = trace.samples * np.exp(-1j * TWO_PI * f * trace.times)
    if cutoff is None:
        width = int(round(trace.sample_rate / f))
        return _boxcar(z.real, width) + 1j * _boxcar(z.imag, width)
    sos = sps.butter(4, cutoff, fs=trace.sample_rate, output="sos")
    return sps.sosfiltfilt(sos, z.real) + 1j * sps.sosfiltfilt(sos, z.imag)


def estimate_phase(trace: SignalTrace, f: float, cutoff: float | None = None) -> np.ndarray:
    """Instantaneous phase of the ``f`` Hz component, wrapped to [0, 2 pi)."""
    z = demodulate(trace, f, cutoff)
    return wrap_phase(np.angle(z) + TWO_PI * f * trace.times)


def phase_amplitude_profile(trace: SignalTrace, f_low: float, f_high: float,
                            n_bins: int = MI_BINS, envelope_cutoff: float | None = None,
                            phase_trace: SignalTrace | None = None) -> np.ndarray:
    """Mean ``f_high`` envelope in ``n_bins`` equal bins of the ``f_low`` phase.

    The phase comes from ``phase_trace`` when given (same clock as
    ``trace``), else from ``trace`` itself. One slow cycle is trimmed from
    each end to drop filter edge effects.
    """
    if trace.duration * f_low < 10:
        raise TooShortError(f"trace spans {trace.duration * f_low:.2f} cycles of {f_low} Hz; need 10")
    source = trace if phase_trace is None else phase_trace
    if len(source) != len(trace):
        raise ValueError("phase and amplitude traces differ in length")
    phase = estimate_phase(source, f_low)
    cutoff = 2.0 * f_low if envelope_cutoff is None else envelope_cutoff
    amp = 2.0 * np.abs(demodulate(trace, f_high, cutoff))
    trim = int(round(trace.sample_rate / f_low))
    phase, amp = phase[trim:-trim], amp[trim:-trim]
    idx = np.minimum((phase / TWO_PI * n_bins).astype(int), n_bins - 1)
    sums = np.bincount(idx, weights=amp, minlength=n_bins)
    counts = np.bincount(idx, minlength=n_bins)
    if np.any(counts == 0):
        raise TooShortError("some phase bins are empty")
    return sums / counts


def modulation_index(trace: SignalTrace, f_low: float, f_high: float, n_bins: int = MI_BINS,
                     envelope_cutoff: float | None = None,
                     phase_trace: SignalTrace | None = None) -> float:
    """KL divergence of the phase-binned envelope from uniform, over ``log(n_bins)``."""
    prof = phase_amplitude_profile(trace, f_low, f_high, n_bins, envelope_cutoff, phase_trace)
    p = prof / prof.sum()
    p = p[p > 0]
    return float((np.log(n_bins) + np.sum(p * np.log(p))) / np.log(n_bins))


def preferred_phase(trace: SignalTrace, f_low: float, f_high: float, n_bins: int = MI_BINS,
                    envelope_cutoff: float | None = None,
                    phase_trace: SignalTrace | None = None) -> float:
    """Slow-wave phase at which the fast envelope peaks.

    Taken from the first circular harmonic of the binned profile, which
    resolves the peak far below the bin width.
    """
    prof = phase_amplitude_profile(trace, f_low, f_high, n_bins, envelope_cutoff, phase_trace)
    centres = (np.arange(n_bins) + 0.5) * TWO_PI / n_bins
    return wrap_phase(float(np.angle(np.sum(prof * np.exp(1j * centres)))))


# --------------------------------------------------------------------------
# decoding


def decode_category(segment: SignalTrace, pc: PhaseCode, depth_offset: float = 0.0) -> str:
    """Category whose shifted carrier template best correlates with ``segment``."""
    if (segment.samples.size + 1) / segment.sample_rate * pc.frequency < 4:
        raise TooShortError("segment holds fewer than 4 carrier cycles")
    t = segment.times
    s = segment.samples
    s_norm = np.linalg.norm(s)
    if s_norm == 0:
        raise AmbiguousDecodeError("segment is identically zero")
    scores = {}
    for cat, phi in pc.mapping.items():
        tmpl = np.cos(TWO_PI * pc.frequency * t + phi + depth_offset)
        scores[cat] = float(s @ tmpl) / (s_norm * np.linalg.norm(tmpl))
    ranked = sorted(scores.items(), key=lambda kv: kv[1], reverse=True)
    if len(ranked) > 1 and ranked[0][1] - ranked[1][1] < 1e-6:
        raise AmbiguousDecodeError(f"categories {ranked[0][0]!r} and {ranked[1][0]!r} tie")
    return ranked[0][0]


def decode_leaf(segment: SignalTrace, candidates: Sequence, cfg: EncodingConfig):
    """Candidate item whose synthesized bank leaves the smallest residual."""
    if not candidates:
        raise DecodeError("no lexical candidates for this slot")
    residuals = []
    for it in candidates:
        tmpl = synth_modulated(node_bank(it.embedding, cfg), cfg.wave, cfg.pac, segment.sample_rate,
                               segment.duration, segment.x, segment.t0).samples
        residuals.append(float(np.sum((segment.samples - tmpl) ** 2)))
    order = np.argsort(residuals, kind="stable")
    if len(order) > 1 and residuals[order[1]] - residuals[order[0]] < 1e-9:
        raise AmbiguousDecodeError(
            f"items {candidates[order[0]].id!r} and {candidates[order[1]].id!r} are indistinguishable")
    return candidates[order[0]]


def decode_tree(bundle: EncodedBundle, lex: Lexicon, cfg: EncodingConfig) -> SyntacticObject:
    D = cfg.duration_per_node
    stack: list[SyntacticObject] = []
    for entry in bundle.schedule:
        lf = bundle.lf_trace.segment(entry.start, entry.start + D)
        cat = decode_category(lf, cfg.phase_code, entry.depth * cfg.delta_phi)
        if entry.depth == 0:
            hf = bundle.hf_trace.segment(entry.start, entry.start + D)
            stack.append(Leaf(decode_leaf(hf, lex.by_category(cat), cfg)))
            continue
        if len(stack) < 2:
            raise DecodeError(f"slot {entry.node_id!r} closes a node with fewer than two open children")
        b, a = stack.pop(), stack.pop()
        if a == b:
            raise DecodeError("decoded children are identical")
        node = Node.of(a, b, cat)
        if depth(node) != entry.depth:
            raise DecodeError(
                f"slot {entry.node_id!r}: rebuilt depth {depth(node)} != scheduled {entry.depth}")
        stack.append(node)
    if len(stack) != 1:
        raise DecodeError(f"schedule leaves {len(stack)} open constituents")
    return stack[0]


def estimate_weights(trains: Sequence[SpikeTrain], phi_c_series, cfg: EncodingConfig) -> np.ndarray:
    """Per-neuron rate estimates, normalized to a probability vector.

    Counts are divided by the mean modulation factor implied by
    ``phi_c_series`` (phases sampled uniformly over the recording).
    """
    if not trains:
        raise InsufficientDataError("no spike trains")
    duration = trains[0].duration
    if duration < 30.0 - 1e-9 or cfg.base_scale < 100.0:
        raise InsufficientDataError(
            f"need >= 30 s at >= 100 Hz base scale (got {duration:g} s, {cfg.base_scale:g} Hz)")
    phi = np.asarray(phi_c_series, dtype=float)
    gain = float(np.mean(1.0 + cfg.alpha * np.cos(phi - cfg.pac.preferred_phase))) if phi.size else 1.0
    rates = np.array([len(tr) for tr in trains], dtype=float) / (duration * gain * cfg.base_scale)
    if rates.sum() == 0:
        raise InsufficientDataError("no spikes recorded")
    return rates / rates.sum()


# --------------------------------------------------------------------------
# persistence


def save_bundle(bundle: EncodedBundle, cfg: EncodingConfig, directory) -> Path:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    write_trace_csv(d / "lf.csv", bundle.lf_trace)
    write_trace_csv(d / "hf.csv", bundle.hf_trace)
    write_spikes_csv(d / "spikes.csv", bundle.spike_trains)
    sched = {
        "duration": bundle.duration,
        "duration_per_node": cfg.duration_per_node,
        "neurons": list(bundle.neuron_ids),
        "entries": [{"node_id": e.node_id, "start": e.start, "category": e.category,
                     "depth": e.depth} for e in bundle.schedule],
    }
    for name, obj in (("schedule.json", sched), ("config.json", cfg.to_json_obj())):
        with open(d / name, "w") as fh:
            json.dump(obj, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return d


def load_bundle(directory) -> tuple[EncodedBundle, EncodingConfig]:
    d = Path(directory)
    with open(d / "config.json") as fh:
        cfg = EncodingConfig.from_json_obj(json.load(fh))
    with open(d / "schedule.json") as fh:
        sched = json.load(fh)
    entries = tuple(ScheduleEntry(e["node_id"], float(e["start"]), e["category"], int(e["depth"]))
                    for e in sched["entries"])
    lf, = read_trace_csv(d / "lf.csv")
    hf, = read_trace_csv(d / "hf.csv")
    trains = read_spikes_csv(d / "spikes.csv", len(sched["neurons"]), float(sched["duration"]))
    return EncodedBundle(lf, hf, tuple(trains), entries, tuple(sched["neurons"])), cfg
