"""Command-line front end.

Exit codes: 0 ok, 2 config/input error, 3 decode failure, 4 integration
failure. Failures print exactly one line to stderr, starting with
``error: <ExceptionName>:``.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .codec import (EncodingConfig, category_phase_series, decode_tree, encode_tree,
                    estimate_weights, load_bundle, modulation_index, phase_amplitude_profile,
                    preferred_phase, save_bundle)
from .config import OUTPUT_ENV, ConfigError, build_dynamics, load_run_config, run_script
from .errors import (DecodeError, InsufficientDataError, MergeError, NeurosyntaxError,
                     ScheduleError, StepSizeError, TooShortError, UnlabelableError)
from .lexicon import Lexicon, normalize_weights
from .signals import SignalTrace, order_parameter, read_trace_csv
from .sim import run, run_report, write_trajectory_csv
from .syntax import canonical_json, depth, node_count, postorder, to_json_obj
from .synthetic import demo_lexicon

EXIT_OK, EXIT_INPUT, EXIT_DECODE, EXIT_INTEGRATION = 0, 2, 3, 4

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["exact_match", "per_node_category_accuracy", "weight_errors", "mi",
                 "n_nodes", "depth", "snr_db", "decode_error"],
    "properties": {
        "exact_match": {"type": "boolean"},
        "per_node_category_accuracy": {"type": ["number", "null"], "minimum": 0, "maximum": 1},
        "weight_errors": {"type": ["array", "null"], "items": {"type": "number", "minimum": 0}},
        "weight_note": {"type": "string"},
        "mi": {"type": "object", "additionalProperties": {"type": ["number", "null"]}},
        "n_nodes": {"type": "integer", "minimum": 1},
        "depth": {"type": "integer", "minimum": 0},
        "snr_db": {"type": ["number", "null"]},
        "decode_error": {"type": ["string", "null"]},
        "tree": {"type": "object"},
        "decoded_tree": {"type": ["object", "null"]},
    },
    "additionalProperties": False,
}


class CliError(Exception):
    def __init__(self, code: int, exc: BaseException):
        super().__init__(str(exc))
        self.code = code
        self.exc = exc


def _write_json(path: Path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _input_error(exc):
    return CliError(EXIT_INPUT, exc)


# --------------------------------------------------------------------------
# commands


def cmd_derive(args) -> int:
    try:
        lex = Lexicon.load(args.lexicon)
        text = Path(args.script).read_text()
        result = run_script(text, lex, tuple(args.precedence.split(",")))
    except (OSError, ValueError, KeyError, ConfigError, MergeError, UnlabelableError) as exc:
        raise _input_error(exc)
    for line in result.log:
        print(line, file=sys.stderr)
    out = canonical_json(result.tree) + "\n"
    if args.out:
        _write_text(Path(args.out), out)
    sys.stdout.write(out)
    return EXIT_OK


def _load(args):
    try:
        cfg = load_run_config(args.config)
        lex = cfg.lexicon()
        script = run_script(cfg.script(), lex, cfg.precedence)
    except (OSError, ValueError, KeyError, ConfigError, MergeError, UnlabelableError) as exc:
        raise _input_error(exc)
    return cfg, lex, script


def cmd_encode(args) -> int:
    cfg, lex, script = _load(args)
    out = cfg.resolve_output(args.out) / "bundle"
    try:
        bundle = encode_tree(script.tree, lex, cfg.encoding)
    except NeurosyntaxError as exc:
        raise _input_error(exc)
    save_bundle(bundle, cfg.encoding, out)
    _write_json(out / "tree.json", to_json_obj(script.tree))
    print(str(out))
    return EXIT_OK


def cmd_decode(args) -> int:
    try:
        bundle, cfg = load_bundle(args.bundle)
        lex = Lexicon.load(args.lexicon)
        if args.config:
            cfg = load_run_config(args.config).decoding
    except (OSError, ValueError, KeyError, ConfigError) as exc:
        raise _input_error(exc)
    try:
        tree = decode_tree(bundle, lex, cfg)
    except NeurosyntaxError as exc:
        raise CliError(EXIT_DECODE, exc)
    out = canonical_json(tree) + "\n"
    if args.out:
        _write_text(Path(args.out), out)
    sys.stdout.write(out)
    return EXIT_OK


def _mi_values(bundle, cfg: EncodingConfig, n_components: int) -> dict:
    """MI of each high-frequency component against the traveling-wave phase."""
    out = {}
    for f in cfg.component_frequencies(n_components):
        try:
            mi = modulation_index(bundle.hf_trace, cfg.wave.frequency, float(f),
                                  phase_trace=bundle.lf_trace)
        except TooShortError:
            mi = None
        out[f"{cfg.wave.frequency:g}Hz_{f:g}Hz"] = mi
    return out


def roundtrip_report(cfg, lex, script) -> dict:
    tree = script.tree
    bundle = encode_tree(tree, lex, cfg.encoding)
    dec_cfg = cfg.decoding
    report = {
        "n_nodes": node_count(tree), "depth": depth(tree), "snr_db": cfg.encoding.snr_db,
        "tree": to_json_obj(tree), "mi": _mi_values(bundle, cfg.encoding, lex.n),
        "decode_error": None, "decoded_tree": None,
    }
    try:
        decoded = decode_tree(bundle, lex, dec_cfg)
        report["decoded_tree"] = to_json_obj(decoded)
        report["exact_match"] = decoded == tree
        decoded_nodes = postorder(decoded)
        truth = [e.category for e in bundle.schedule]
        got = [n.label for n in decoded_nodes]
        report["per_node_category_accuracy"] = float(np.mean([a == b for a, b in zip(truth, got)]))
    except DecodeError as exc:
        report["exact_match"] = False
        report["decode_error"] = f"{type(exc).__name__}: {exc}"
        report["per_node_category_accuracy"] = None
    try:
        t = np.arange(int(round(bundle.duration / dec_cfg.spike_dt))) * dec_cfg.spike_dt
        phi = category_phase_series(bundle.schedule, dec_cfg, t)
        est = estimate_weights(bundle.spike_trains, phi, dec_cfg)
        true_w = normalize_weights(lex, bundle.neuron_ids)
        report["weight_errors"] = [float(abs(e - w) / w) if w > 0 else float(e)
                                   for e, w in zip(est, true_w)]
    except InsufficientDataError as exc:
        report["weight_errors"] = None
        report["weight_note"] = str(exc)
    return report


def cmd_roundtrip(args) -> int:
    cfg, lex, script = _load(args)
    out = cfg.resolve_output(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        report = roundtrip_report(cfg, lex, script)
    except (ValueError, NeurosyntaxError) as exc:
        raise _input_error(exc)
    _write_json(out / "report.json", report)
    print(json.dumps({"exact_match": report["exact_match"],
                      "per_node_category_accuracy": report["per_node_category_accuracy"]},
                     sort_keys=True))
    if report["decode_error"] is not None:
        raise CliError(EXIT_DECODE, DecodeError(report["decode_error"]))
    if cfg.encoding.snr_db is None and not report["exact_match"]:
        raise CliError(EXIT_DECODE, DecodeError("noiseless round trip did not reproduce the tree"))
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg, lex, script = _load(args)
    out = cfg.resolve_output(args.out)
    try:
        dyn, initial = build_dynamics(cfg, lex, script)
    except (ValueError, NeurosyntaxError) as exc:
        raise _input_error(exc)
    log: list = []
    try:
        traj = run(dyn, initial, cfg.sim.duration, cfg.sim.dt, log)
    except (StepSizeError, ScheduleError) as exc:
        raise CliError(EXIT_INTEGRATION, exc)
    out.mkdir(parents=True, exist_ok=True)
    write_trajectory_csv(out / "trajectory.csv", traj)
    params = {"seed": cfg.seed, "duration": cfg.sim.duration, "dt": cfg.sim.dt,
              "n_oscillators": cfg.sim.n_oscillators, "coupling": cfg.sim.coupling,
              "frequency_hz": cfg.sim.frequency_hz}
    _write_json(out / "run_report.json", run_report(dyn, traj, log, params))
    print(str(out / "trajectory.csv"))
    return EXIT_OK


# --------------------------------------------------------------------------
# analyze


def _read_csv_table(path: Path):
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if len(rows) < 2:
        raise ValueError(f"{path}: no data rows")
    header = [h.strip() for h in rows[0]]
    try:
        data = np.array([[float(v) for v in r] for r in rows[1:]], dtype=float)
    except ValueError as exc:
        raise ValueError(f"{path}: non-numeric field ({exc})") from None
    if data.ndim != 2 or data.shape[1] != len(header):
        raise ValueError(f"{path}: ragged rows")
    return header, data


def _svg(fig, path: Path):
    fig.savefig(path, format="svg", metadata={"Date": None})


def _analyze_trace(tr: SignalTrace, name: str, args, out: Path) -> dict:
    m = {"n_samples": len(tr), "sample_rate": tr.sample_rate, "x": tr.x,
         "rms": float(np.sqrt(np.mean(tr.samples ** 2)))}
    phase_tr = None
    if args.phase_from:
        (phase_tr,) = read_trace_csv(args.phase_from)[:1]
    try:
        kw = {"phase_trace": phase_tr}
        m["modulation_index"] = modulation_index(tr, args.f_low, args.f_high, **kw)
        m["preferred_phase"] = preferred_phase(tr, args.f_low, args.f_high, **kw)
        profile = phase_amplitude_profile(tr, args.f_low, args.f_high, **kw)
    except TooShortError as exc:
        m["modulation_index"] = None
        m["note"] = str(exc)
        profile = None
    if args.plot:
        import matplotlib.pyplot as plt
        fig, ax = plt.subplots(figsize=(7, 2.5))
        n = min(len(tr), int(round(2 * tr.sample_rate)))
        ax.plot(tr.times[:n], tr.samples[:n], lw=0.6)
        ax.set_xlabel("t (s)")
        ax.set_ylabel("value")
        _svg(fig, out / f"{name}_trace.svg")
        plt.close(fig)
        if profile is not None:
            fig, ax = plt.subplots(figsize=(4, 3))
            edges = np.linspace(0, 2 * np.pi, profile.size + 1)
            ax.bar(edges[:-1], profile, width=np.diff(edges), align="edge")
            ax.set_xlabel(f"{args.f_low:g} Hz phase (rad)")
            ax.set_ylabel(f"mean {args.f_high:g} Hz amplitude")
            _svg(fig, out / f"{name}_pac.svg")
            plt.close(fig)
    return m


def _analyze_file(path: Path, args, out: Path) -> dict:
    header, data = _read_csv_table(path)
    name = path.stem
    if header in (["t", "value"], ["t", "x", "value"]):
        traces = read_trace_csv(path)
        if len(traces) == 1:
            return {"kind": "trace", **_analyze_trace(traces[0], name, args, out)}
        return {"kind": "spatial_traces",
                "traces": [_analyze_trace(tr, f"{name}_x{k}", args, out) for k, tr in enumerate(traces)]}
    if header == ["neuron_id", "time"]:
        ids, counts = np.unique(data[:, 0].astype(int), return_counts=True)
        return {"kind": "spikes", "counts": {str(i): int(c) for i, c in zip(ids, counts)}}
    phase_cols = [k for k, h in enumerate(header) if h.startswith(("e_", "phase_"))]
    if header[0] == "t" and phase_cols:
        r = np.array([order_parameter(row[phase_cols]) for row in data])
        if args.plot:
            import matplotlib.pyplot as plt
            fig, ax = plt.subplots(figsize=(6, 2.5))
            ax.plot(data[:, 0], r, lw=0.8)
            ax.set_ylim(0, 1.05)
            ax.set_xlabel("t (s)")
            ax.set_ylabel("order parameter")
            _svg(fig, out / f"{name}_order.svg")
            plt.close(fig)
        return {"kind": "phases", "n_oscillators": len(phase_cols),
                "final_order_parameter": float(r[-1]), "mean_order_parameter": float(r.mean())}
    raise ValueError(f"{path}: unrecognized header {','.join(header)}")


def cmd_analyze(args) -> int:
    out = Path(args.out) if args.out else None
    if out is None:
        out = Path(os.environ.get(OUTPUT_ENV, "neurosyntax-out"))
    out.mkdir(parents=True, exist_ok=True)
    if args.plot:
        import matplotlib
        matplotlib.use("Agg")
        matplotlib.rcParams["svg.hashsalt"] = "neurosyntax"
    metrics = {}
    try:
        for f in args.files:
            p = Path(f)
            metrics[p.name] = _analyze_file(p, args, out)
    except (OSError, ValueError) as exc:
        raise _input_error(exc)
    _write_json(out / "metrics.json", metrics)
    print(json.dumps(metrics, sort_keys=True))
    return EXIT_OK


# --------------------------------------------------------------------------
# demo

DEMO_SCRIPT = """\
# the old dog saw a cat
select old
select dog
merge old dog as NP
select the
merge the NP as DP
select cat
select a
merge a cat as DP2
select saw
merge saw DP2 as VP
merge DP VP as S
"""

DEMO_CONFIG = """\
seed = 7
lexicon = "lexicon.json"
derivation = "derivation.txt"

[encoding]
duration_per_node = 1.0
sample_rate = 1000.0

# five categories, evenly spaced around the circle
[encoding.phase_code]
mapping = { N = 0.0, V = 1.2566370614359172, A = 2.5132741228718345, P = 3.7699111843077517, D = 5.026548245743669 }

[sim]
duration = 2.0
dt = 0.001
"""


def cmd_demo(args) -> int:
    out = Path(args.out) if args.out else Path("neurosyntax-demo")
    out.mkdir(parents=True, exist_ok=True)
    demo_lexicon().save(out / "lexicon.json")
    (out / "derivation.txt").write_text(DEMO_SCRIPT)
    (out / "config.toml").write_text(DEMO_CONFIG)
    ns = argparse.Namespace(config=str(out / "config.toml"), out=str(out / "run"))
    for fn in (cmd_encode, cmd_roundtrip, cmd_simulate):
        fn(ns)
    bundle = out / "run" / "bundle"
    analyze = argparse.Namespace(files=[str(bundle / "hf.csv"), str(out / "run" / "trajectory.csv")],
                                 f_low=2.0, f_high=40.0, plot=True, out=str(out / "run" / "analysis"),
                                 phase_from=str(bundle / "lf.csv"))
    cmd_analyze(analyze)
    return EXIT_OK


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="neurosyntax", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("derive", help="run a derivation script and print the tree JSON")
    p.add_argument("script")
    p.add_argument("--lexicon", required=True)
    p.add_argument("--precedence", default="N,V,A,P")
    p.add_argument("--out")
    p.set_defaults(func=cmd_derive)

    for name, fn, text in (("encode", cmd_encode, "encode the configured tree into a bundle"),
                           ("roundtrip", cmd_roundtrip, "encode, decode and report"),
                           ("simulate", cmd_simulate, "integrate the coupled dynamics")):
        p = sub.add_parser(name, help=text)
        p.add_argument("config")
        p.add_argument("--out")
        p.set_defaults(func=fn)

    p = sub.add_parser("decode", help="decode a bundle directory back into a tree")
    p.add_argument("bundle")
    p.add_argument("--lexicon", required=True)
    p.add_argument("--config", help="run config whose [decoding] table overrides the bundle's")
    p.add_argument("--out")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("analyze", help="coupling and synchrony metrics for CSV files")
    p.add_argument("files", nargs="+")
    p.add_argument("--f-low", type=float, default=2.0)
    p.add_argument("--f-high", type=float, default=60.0)
    p.add_argument("--phase-from", help="take the slow phase from this t,value trace")
    p.add_argument("--plot", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("demo", help="write a sample lexicon/config and run the whole pipeline")
    p.add_argument("--out")
    p.set_defaults(func=cmd_demo)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as err:
        msg = " ".join(str(err.exc).split())
        print(f"error: {type(err.exc).__name__}: {msg}", file=sys.stderr)
        return err.code


if __name__ == "__main__":
    sys.exit(main())
