"""Run configuration (TOML) and the derivation-script language.

A derivation script is line oriented::

    # comments and blank lines are ignored
    select the          # put lexicon item "the" into the workspace
    select dog
    merge the dog as DP # merge two workspace members; "as" names the result

Unnamed merge results are referred to as ``m1``, ``m2``, ... in order.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .codec import EncodingConfig
from .errors import MergeError, NeurosyntaxError
from .lexicon import Lexicon, Projection, RecurrentReducer, normalize_weights
from .signals import TWO_PI, KuramotoNetwork
from .sim import RoseDynamics, RoseState, ScheduleEvent
from .spiking import SpikingPopulation, make_rng
from .syntax import (DEFAULT_PRECEDENCE, Derivation, Leaf, Node, SyntacticObject, Workspace,
                     derive, label_tree, merge)

__all__ = ["ConfigError", "SimConfig", "RunConfig", "ScriptResult", "run_script",
           "load_run_config", "build_dynamics", "OUTPUT_ENV"]

OUTPUT_ENV = "NEUROSYNTAX_OUTPUT_DIR"


class ConfigError(NeurosyntaxError):
    pass


# --------------------------------------------------------------------------
# derivation scripts


@dataclass
class ScriptResult:
    tree: SyntacticObject
    derivation: Derivation
    log: list[str]
    # ("select", id) or ("merge", ref_a, ref_b, result_ref), in script order
    actions: list[tuple]


def run_script(text: str, lex: Lexicon, precedence=DEFAULT_PRECEDENCE) -> ScriptResult:
    """Execute a derivation script and label the resulting tree.

    Raises :class:`ConfigError` for syntax problems, :class:`MergeError` for
    illegal merges and :class:`UnlabelableError` from labeling.
    """
    refs: dict[str, SyntacticObject] = {}
    selected: list[Leaf] = []
    pairs, log, actions = [], [], []
    ws = Workspace()
    n_merges = 0
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "select" and len(parts) == 2:
            item_id = parts[1]
            if item_id not in lex:
                raise ConfigError(f"line {lineno}: unknown lexical item {item_id!r}")
            if item_id in refs:
                raise ConfigError(f"line {lineno}: {item_id!r} already selected")
            leaf = Leaf(lex[item_id])
            refs[item_id] = leaf
            selected.append(leaf)
            ws = Workspace(ws.objects | {leaf})
            log.append(f"select {item_id}")
            actions.append(("select", item_id))
        elif parts[0] == "merge" and len(parts) in (3, 5) and (len(parts) == 3 or parts[3] == "as"):
            a, b = parts[1], parts[2]
            for r in (a, b):
                if r not in refs:
                    raise MergeError(f"line {lineno}: unknown reference {r!r}")
            n_merges += 1
            name = parts[4] if len(parts) == 5 else f"m{n_merges}"
            if name in refs:
                raise ConfigError(f"line {lineno}: reference {name!r} already in use")
            p, q = refs[a], refs[b]
            ws = merge(ws, p, q)
            pairs.append((p, q))
            refs[name] = Node.of(p, q)
            log.append(f"merge {a} {b} -> {name}")
            actions.append(("merge", a, b, name))
        else:
            raise ConfigError(f"line {lineno}: cannot parse {raw.strip()!r}")
    if not actions:
        raise ConfigError("empty derivation")
    if len(ws) != 1:
        raise ConfigError(f"derivation ends with {len(ws)} workspace objects, expected 1")
    initial = Workspace.of(*selected)
    derivation = derive(initial, pairs)
    (root,) = tuple(ws.objects)
    return ScriptResult(label_tree(root, precedence), derivation, log, actions)


# --------------------------------------------------------------------------
# run configuration


@dataclass(frozen=True)
class SimConfig:
    duration: float = 2.0
    dt: float = 1e-3
    tau_r: float = 0.05
    tau_o: float = 0.05
    base_scale: float = 50.0
    alpha: float = 0.5
    preferred_phase: float = 0.0
    compressed_dim: int = 2
    n_oscillators: int = 4
    frequency_hz: float = 6.0
    coupling: float = 1.0
    event_start: float = 0.1
    event_interval: float = 0.1

    def __post_init__(self):
        if self.duration < 0 or self.tau_r <= 0 or self.tau_o <= 0:
            raise ConfigError("sim: duration must be >= 0 and time constants > 0")
        if self.compressed_dim < 1 or self.n_oscillators < 1:
            raise ConfigError("sim: compressed_dim and n_oscillators must be >= 1")
        if self.event_start < 0 or self.event_interval <= 0:
            raise ConfigError("sim: event_start must be >= 0 and event_interval > 0")
        if not 0 <= self.alpha <= 1:
            raise ConfigError("sim: alpha must lie in [0, 1]")


@dataclass(frozen=True)
class RunConfig:
    lexicon_path: Path
    derivation_path: Path
    encoding: EncodingConfig
    decoding: EncodingConfig
    sim: SimConfig = field(default_factory=SimConfig)
    output_dir: Path | None = None
    seed: int = 0
    precedence: tuple[str, ...] = DEFAULT_PRECEDENCE

    def lexicon(self) -> Lexicon:
        return Lexicon.load(self.lexicon_path)

    def script(self) -> str:
        return self.derivation_path.read_text()

    def resolve_output(self, override=None) -> Path:
        if override is not None:
            return Path(override)
        if self.output_dir is not None:
            return self.output_dir
        return Path(os.environ.get(OUTPUT_ENV, "neurosyntax-out"))


def _encoding_from_table(table: dict, seed: int, base: EncodingConfig | None = None) -> EncodingConfig:
    obj = base.to_json_obj() if base is not None else EncodingConfig(rng_seed=seed).to_json_obj()
    table = dict(table)
    for key in ("phase_code", "wave", "pac"):
        if key in table:
            obj[key] = dict(obj[key], **table.pop(key))
    obj.update(table)
    return EncodingConfig.from_json_obj(obj)


def load_run_config(path) -> RunConfig:
    """Parse and validate a TOML run configuration.

    Relative paths are resolved against the config file's directory. Any
    problem is reported as :class:`ConfigError`.
    """
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            raw: dict[str, Any] = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file {path} not found") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    base = path.parent
    known = {"seed", "lexicon", "derivation", "output_dir", "precedence", "encoding",
             "decoding", "sim"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    try:
        seed = int(raw.get("seed", 0))
        paths = {}
        for key in ("lexicon", "derivation"):
            if key not in raw:
                raise ConfigError(f"missing required key {key!r}")
            p = (base / raw[key]).resolve()
            if not p.is_file():
                raise ConfigError(f"{key} file {p} does not exist")
            paths[key] = p
        encoding = _encoding_from_table(raw.get("encoding", {}), seed)
        decoding = _encoding_from_table(raw.get("decoding", {}), seed, encoding)
        sim = SimConfig(**raw.get("sim", {}))
        out = raw.get("output_dir")
        return RunConfig(paths["lexicon"], paths["derivation"], encoding, decoding, sim,
                         (base / out) if out is not None else None, seed,
                         tuple(raw.get("precedence", DEFAULT_PRECEDENCE)))
    except ConfigError:
        raise
    except (TypeError, ValueError, KeyError, NeurosyntaxError) as exc:
        raise ConfigError(f"{path}: {type(exc).__name__}: {exc}") from None


def build_dynamics(cfg: RunConfig, lex: Lexicon, script: ScriptResult) -> tuple[RoseDynamics, RoseState]:
    """Dynamics and initial state for a scripted derivation.

    Script actions become schedule events ``event_interval`` apart; the
    projection, reducer and initial phases are drawn from the run seed.
    """
    sc = cfg.sim
    rng = make_rng([cfg.seed, 3])
    n, m = lex.n, sc.compressed_dim
    if m >= n:
        raise ConfigError(f"compressed_dim {m} must be below the embedding dimension {n}")
    proj = Projection(rng.standard_normal((m, n)) / np.sqrt(n))
    reducer = RecurrentReducer(rng.standard_normal((m, m)) / np.sqrt(m),
                               rng.standard_normal((m, n)) / np.sqrt(n), np.zeros(m))
    selected = [a[1] for a in script.actions if a[0] == "select"]
    pop = SpikingPopulation(tuple(normalize_weights(lex, selected)), sc.alpha, sc.preferred_phase)
    phases = rng.uniform(0, TWO_PI, sc.n_oscillators)
    omega = np.full(sc.n_oscillators, TWO_PI * sc.frequency_hz)
    kn = KuramotoNetwork.all_to_all(omega, sc.coupling, phases)
    events = []
    for k, act in enumerate(script.actions):
        t = round(sc.event_start + k * sc.event_interval, 12)
        if act[0] == "select":
            events.append(ScheduleEvent(t, lex[act[1]]))
        else:
            events.append(ScheduleEvent(t, None, (act[1], act[2]), act[3]))
    dyn = RoseDynamics(proj, reducer, pop, kn, tuple(events), sc.tau_r, sc.tau_o, sc.base_scale)
    return dyn, RoseState.zeros(m, pop.size, phases)
