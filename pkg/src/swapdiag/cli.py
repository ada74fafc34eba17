"""Command line front end.

Subcommands:

* curves      analytic witness-vs-strength tables for the channel families
* simulate    run the coincidence experiment emulation, write records and
              a summary with probabilities, witness estimate, and rates
* diagnose    classify the disturbance from simulated or loaded records
* calibrate   simulate the interference-dip visibility calibration

A JSON config file (``--config``) may supply any value; explicit flags
override it. Outputs are deterministic for a fixed config and seed:
JSON is emitted with sorted keys and floats rounded to 12 significant
digits, CSV always uses a '.' decimal point.

Exit codes: 0 success, 2 invalid configuration, 3 I/O or numerical
failure, 4 diagnosis fell outside the modeled families.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass

import numpy as np

from . import sampler
from .channels import (KINDS, make_amplitude_damping, make_depolarizing,
                       make_identity, make_phase_damping)
from .diagnose import classify
from .sampler import (CONFIG_LABELS, exact_config_rates, from_jsonl_rows,
                      hom_calibrate, simulate_experiment, to_jsonl_rows)
from .swapnet import BsmModel, run_swap
from .witness import CALIBRATED, CONDITIONED, analytic_curve

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3  # I/O trouble or a non-finite numerical result
EXIT_UNMODELED = 4

CURVE_KINDS = ("depolarizing", "phase_damping", "amplitude_damping")


@dataclass
class RunConfig:
    """Merged command configuration (config file plus flag overrides)."""

    command: str
    channel_kind: str = "identity"
    strength: float = 0.0
    visibility: float = 1.0
    shots: int = 100
    sequences: int = 60
    seed: int = 0
    mode: str = CONDITIONED
    kind: str = "all"
    points: int = 11
    overlap: float | None = None
    hom_shots: int = 100000
    cal_visibility: float | None = None
    records_in: str | None = None
    records_out: str | None = None
    out: str | None = None
    fmt: str = "json"


def make_channel(kind: str, strength: float):
    factories = {"identity": lambda _: make_identity(),
                 "depolarizing": make_depolarizing,
                 "phase_damping": make_phase_damping,
                 "amplitude_damping": make_amplitude_damping}
    if kind not in factories:
        raise ValueError(f"unknown channel kind {kind!r}; choose from {KINDS}")
    return factories[kind](strength)


def _sig12(x: float) -> float:
    return float(f"{x:.12g}") + 0.0  # + 0.0 drops IEEE negative zero


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _sig12(float(obj)) if np.isfinite(obj) else None
    return obj


def _write_text(text: str, path: str | None):
    if path is None or path == "-":
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _write_json(payload: dict, path: str | None):
    payload = dict(payload)
    payload["schema_version"] = SCHEMA_VERSION
    _write_text(json.dumps(_jsonable(payload), sort_keys=True, indent=2), path)


def _probability_payload(pset):
    return {"p_hh": pset.p_hh, "p_hv": pset.p_hv, "p_vv": pset.p_vv,
            "p_pp": pset.p_pp, "p_h": pset.p_h,
            "normalization": pset.normalization, "source": pset.source,
            "flags": list(pset.flags)}


def cmd_curves(cfg: RunConfig) -> int:
    kinds = CURVE_KINDS if cfg.kind == "all" else (cfg.kind,)
    for kind in kinds:
        if kind not in CURVE_KINDS:
            raise ValueError(f"no analytic curve for {kind!r}")
    if cfg.points < 2:
        raise ValueError("need at least two grid points")
    grid = np.linspace(0.0, 1.0, cfg.points)
    rows = []
    for kind in kinds:
        values = analytic_curve(kind, grid)
        if not np.isfinite(values).all():
            raise FloatingPointError("analytic curve returned non-finite values")
        rows.extend({"kind": kind, "strength": float(d), "witness": float(w)}
                    for d, w in zip(grid, values))
    if cfg.fmt == "csv":
        lines = [f"# schema_version: {SCHEMA_VERSION}", "kind,strength,witness"]
        lines += [f"{r['kind']},{_sig12(r['strength'])},{_sig12(r['witness'])}"
                  for r in rows]
        _write_text("\n".join(lines) + "\n", cfg.out)
    else:
        _write_json({"curves": rows}, cfg.out)
    return EXIT_OK


def _calibration_for(cfg: RunConfig):
    """Dip calibration used by estimators; defaults to the true visibility."""
    if cfg.cal_visibility is not None:
        if not 0.0 < cfg.cal_visibility <= 1.0:
            raise ValueError("calibration visibility must lie in (0, 1]")
        return sampler.HomCalibration(visibility=cfg.cal_visibility,
                                      raw_dip_counts=(0, 0), shots=0, seed=cfg.seed)
    overlap = cfg.visibility if cfg.overlap is None else cfg.overlap
    return hom_calibrate(overlap, shots=cfg.hom_shots, seed=cfg.seed)


def cmd_simulate(cfg: RunConfig) -> int:
    channel = make_channel(cfg.channel_kind, cfg.strength)
    bsm = BsmModel(cfg.visibility)
    data = simulate_experiment(channel, bsm, shots=cfg.shots,
                               sequences=cfg.sequences, seed=cfg.seed)
    cal = _calibration_for(cfg)
    result = sampler.estimate_witness(data, cal, mode=cfg.mode)
    if not np.isfinite(result.value):
        raise FloatingPointError("witness estimate is not finite")

    counts = {rec.label: rec.sequence_counts.sum() for rec in data.coincidences}
    total = cfg.shots * cfg.sequences
    outcome = run_swap(channel, bsm)
    expected = exact_config_rates(channel, bsm)
    summary = {
        "channel": {"kind": cfg.channel_kind, "strength": cfg.strength},
        "bsm": {"visibility": cfg.visibility},
        "run": {"shots": cfg.shots, "sequences": cfg.sequences, "seed": cfg.seed},
        "calibration": {"visibility": cal.visibility,
                        "dip_counts": list(cal.raw_dip_counts), "shots": cal.shots},
        "probabilities": _probability_payload(result.probabilities),
        "witness": {"value": result.value, "uncertainty": result.uncertainty,
                    "method": result.method},
        "rates": {
            "observed": {lbl: counts[lbl] / total for lbl in CONFIG_LABELS},
            "expected": {lbl: expected[i] for i, lbl in enumerate(CONFIG_LABELS)},
            "singlet_rate": outcome.singlet_rate,
            "genuine_rate": outcome.genuine_rate,
            "p_h_observed": result.probabilities.p_h,
        },
    }
    if cfg.records_out:
        lines = [json.dumps(_jsonable(row), sort_keys=True)
                 for row in to_jsonl_rows(data)]
        _write_text("\n".join(lines) + "\n", cfg.records_out)
    _write_json(summary, cfg.out)
    return EXIT_OK


def cmd_diagnose(cfg: RunConfig) -> int:
    if cfg.records_in:
        with open(cfg.records_in, "r", encoding="utf-8") as fh:
            rows = [json.loads(line) for line in fh if line.strip()]
        data = from_jsonl_rows(rows)
    else:
        channel = make_channel(cfg.channel_kind, cfg.strength)
        data = simulate_experiment(channel, BsmModel(cfg.visibility),
                                   shots=cfg.shots, sequences=cfg.sequences,
                                   seed=cfg.seed)
    cal = _calibration_for(cfg)
    pset, sigmas = sampler.estimate_probabilities(data, cal, mode=cfg.mode)
    diagnosis = classify(pset, sigmas)
    if not np.isfinite(diagnosis.confidence):
        raise FloatingPointError("diagnosis confidence is not finite")
    payload = {
        "mode": cfg.mode,
        "kind": diagnosis.kind,
        "strength": diagnosis.strength,
        "confidence": diagnosis.confidence,
        "residuals": diagnosis.residuals,
        "probabilities": _probability_payload(pset),
        "sigma": {k: v for k, v in sigmas.items() if k != "witness"},
    }
    _write_json(payload, cfg.out)
    return EXIT_UNMODELED if diagnosis.kind == "unmodeled" else EXIT_OK


def cmd_calibrate(cfg: RunConfig) -> int:
    overlap = cfg.visibility if cfg.overlap is None else cfg.overlap
    cal = hom_calibrate(overlap, shots=cfg.hom_shots, seed=cfg.seed)
    _write_json({"visibility": cal.visibility,
                 "dip_counts": list(cal.raw_dip_counts),
                 "shots": cal.shots, "seed": cal.seed}, cfg.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swapdiag",
        description="entanglement-swapping simulator and error-channel diagnostics")
    parser.add_argument("--config", help="JSON config file; flags override it")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="output path ('-' or omitted for stdout)")
        p.add_argument("--format", dest="fmt", choices=("csv", "json"))

    p = sub.add_parser("curves", help="analytic witness curves")
    p.add_argument("--kind", choices=CURVE_KINDS + ("all",))
    p.add_argument("--points", type=int)
    common(p)

    helps = {"simulate": "emulate the coincidence experiment",
             "diagnose": "classify the disturbance from records"}
    for name in ("simulate", "diagnose"):
        p = sub.add_parser(name, help=helps[name])
        p.add_argument("--channel", dest="channel_kind", choices=KINDS)
        p.add_argument("--strength", type=float)
        p.add_argument("--visibility", type=float)
        p.add_argument("--shots", type=int)
        p.add_argument("--sequences", type=int)
        p.add_argument("--mode", choices=(CONDITIONED, CALIBRATED))
        p.add_argument("--overlap", type=float, help="dip calibration overlap")
        p.add_argument("--hom-shots", dest="hom_shots", type=int)
        p.add_argument("--cal-visibility", dest="cal_visibility", type=float,
                       help="use this visibility directly instead of a dip run")
        common(p)
    sub.choices["simulate"].add_argument("--records", dest="records_out",
                                         help="also write JSONL records here")
    sub.choices["diagnose"].add_argument("--records-in", dest="records_in",
                                         help="classify these JSONL records")

    p = sub.add_parser("calibrate", help="interference-dip visibility estimate")
    p.add_argument("--overlap", type=float)
    p.add_argument("--hom-shots", dest="hom_shots", type=int)
    common(p)
    return parser


_CONFIG_SECTIONS = {
    "channel_kind": ("channel", "kind"), "strength": ("channel", "strength"),
    "visibility": ("bsm", "visibility"),
    "shots": ("run", "shots"), "sequences": ("run", "sequences"),
    "seed": ("run", "seed"),
    "mode": ("diagnose", "mode"), "cal_visibility": ("diagnose", "cal_visibility"),
    "records_in": ("diagnose", "records_in"),
    "overlap": ("hom", "overlap"), "hom_shots": ("hom", "shots"),
    "kind": ("curves", "kind"), "points": ("curves", "points"),
    "out": ("output", "out"), "fmt": ("output", "format"),
    "records_out": ("output", "records"),
}


def merge_config(args: argparse.Namespace) -> RunConfig:
    """File values fill in anything not set on the command line."""
    file_cfg = {}
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            file_cfg = json.load(fh)
        if not isinstance(file_cfg, dict):
            raise ValueError("config file must contain a JSON object")
    cfg = RunConfig(command=args.command)
    for name, (section, key) in _CONFIG_SECTIONS.items():
        flag = getattr(args, name, None)
        if flag is not None:
            setattr(cfg, name, flag)
        elif isinstance(file_cfg.get(section), dict) and key in file_cfg[section]:
            setattr(cfg, name, file_cfg[section][key])
    for field_name in ("strength", "visibility"):
        value = getattr(cfg, field_name)
        if not 0.0 <= float(value) <= 1.0:
            raise ValueError(f"{field_name} must lie in [0, 1]")
    if cfg.shots <= 0 or cfg.sequences <= 0:
        raise ValueError("shots and sequences must be positive")
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = merge_config(args)
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    handlers = {"curves": cmd_curves, "simulate": cmd_simulate,
                "diagnose": cmd_diagnose, "calibrate": cmd_calibrate}
    try:
        return handlers[cfg.command](cfg)
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    raise SystemExit(main())
