"""Command-line pipeline: gen, estimate, lagscan.

Every command takes a JSON config (--config), materializes all defaults,
runs, and writes its outputs plus a run.json provenance record into the
output directory. The provenance embeds the fully resolved config, so
feeding a run.json back through --config reproduces the outputs byte for
byte. Worker count (--threads) never affects results, only speed, and is
therefore not part of provenance.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from ._kernels import set_threads
from .combinations import MeasureKind, build_measure, spec_to_json
from .embedding import delay_embed, apply_lags, find_optimal_lag, lag_mi_profile
from .ensemble import TrialEnsemble, load_binary, load_csv, store_binary, MAGIC
from .errors import ConfigError, EntcombError
from .estimators import EstimatorParams
from .significance import SurrogateConfig, permutation_test
from .synthgen import CoupledARConfig, generate_coupled_ar
from .timeresolved import (
    EstimateSeries,
    TemporalParams,
    average_estimate,
    ensemble_estimate,
    naive_pointwise,
)

LAG_MODES = ("none", "auto", "fixed")
METHODS = ("ensemble", "average", "naive")


def _section(config: dict, name: str, defaults: dict, required: tuple = ()) -> dict:
    """Materialize one config section against its defaults."""
    raw = config.get(name, {})
    if not isinstance(raw, dict):
        raise ConfigError(f"section {name!r} must be an object")
    unknown = set(raw) - set(defaults) - set(required)
    if unknown:
        raise ConfigError(f"unknown keys in section {name!r}: {sorted(unknown)}")
    missing = [key for key in required if key not in raw]
    if missing:
        raise ConfigError(f"section {name!r} missing required keys: {missing}")
    out = dict(defaults)
    out.update(raw)
    return out


def _reject_unknown(config: dict, allowed: set[str], where: str) -> None:
    unknown = set(config) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    with open(path) as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    # accept a previous run.json directly
    if "command" in doc and "config" in doc:
        doc = doc["config"]
    return doc


def _load_input(config: dict) -> tuple[TrialEnsemble, dict]:
    """Resolve the data source: explicit file or inline generator."""
    has_input = "input" in config
    has_gen = "generator" in config
    if has_input == has_gen:
        raise ConfigError("config needs exactly one of 'input' or 'generator'")
    if has_input:
        path = Path(config["input"])
        with open(path, "rb") as fh:
            head = fh.read(4)
        ensemble = load_binary(path) if head == MAGIC else load_csv(path)
        return ensemble, {"input": str(path)}
    gen_cfg = _section(config, "generator", _generator_defaults())
    ensemble = generate_coupled_ar(CoupledARConfig(**gen_cfg))
    return ensemble, {"generator": gen_cfg}


def _generator_defaults() -> dict:
    return dataclasses.asdict(CoupledARConfig())


def _write_json(path: Path, doc: dict) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _provenance(command: str, config: dict, resolved: dict, outputs: dict) -> dict:
    return {
        "tool": "entcomb",
        "version": __version__,
        "command": command,
        "config": config,
        "resolved": resolved,
        "outputs": outputs,
    }


def cmd_gen(config: dict, out_dir: Path, seed: int | None) -> int:
    _reject_unknown(config, {"generator"}, "gen config")
    gen_cfg = _section(config, "generator", _generator_defaults())
    if seed is not None:
        gen_cfg["seed"] = seed
    ensemble = generate_coupled_ar(CoupledARConfig(**gen_cfg))
    out_dir.mkdir(parents=True, exist_ok=True)
    data_path = out_dir / "ensemble.bin"
    store_binary(ensemble, data_path)
    reloaded = load_binary(data_path)
    if not np.array_equal(reloaded.samples, ensemble.samples):
        raise EntcombError("post-write validation failed for ensemble.bin")
    resolved = {
        "n_trials": ensemble.n_trials,
        "n_times": ensemble.n_times,
        "channels": list(ensemble.channel_names),
    }
    _write_json(
        out_dir / "run.json",
        _provenance("gen", {"generator": gen_cfg}, resolved, {"ensemble": "ensemble.bin"}),
    )
    print(f"wrote {data_path} ({ensemble.n_trials} trials x "
          f"{ensemble.n_times} times x {ensemble.n_channels} channels)")
    return 0


def _resolve_lags(config_lags: dict, measure: MeasureKind,
                  ensemble: TrialEnsemble) -> dict[str, int]:
    mode = config_lags["mode"]
    if mode not in LAG_MODES:
        raise ConfigError(f"lags.mode must be one of {LAG_MODES}, got {mode!r}")
    if mode == "none":
        return {}
    lags: dict[str, int] = {}
    src = ensemble.channel_names[ensemble.channel_index(measure.source)]
    if mode == "fixed":
        if config_lags["source"] is None:
            raise ConfigError("lags.mode='fixed' requires lags.source")
        lags[src] = int(config_lags["source"])
        if measure.conditioner is not None:
            if config_lags["conditioner"] is None:
                raise ConfigError(
                    "fixed lags for a conditioned measure require lags.conditioner"
                )
            cond = ensemble.channel_names[ensemble.channel_index(measure.conditioner)]
            lags[cond] = int(config_lags["conditioner"])
        return lags
    max_lag = int(config_lags["max_lag"])
    # large scan k suppresses MI-profile sampling noise; directed measures
    # align to the sample their future block predicts
    scan = EstimatorParams(k=int(config_lags["scan_k"]))
    horizon = 1 if measure.directed else 0
    lags[src] = find_optimal_lag(ensemble, measure.source, measure.target,
                                 max_lag, scan, horizon)
    if measure.conditioner is not None:
        cond = ensemble.channel_names[ensemble.channel_index(measure.conditioner)]
        lags[cond] = find_optimal_lag(ensemble, measure.conditioner,
                                      measure.target, max_lag, scan, horizon)
    return lags


def cmd_estimate(config: dict, out_dir: Path, seed: int | None) -> int:
    _reject_unknown(
        config,
        {"input", "generator", "measure", "lags", "estimator", "temporal",
         "method", "significance"},
        "estimate config",
    )
    measure_cfg = _section(
        config, "measure",
        {"kind": None, "target": None, "source": None, "conditioner": None,
         "dim_target": 1, "dim_source": 1, "dim_conditioner": 1, "delay": 1},
        required=("kind", "target", "source"),
    )
    lags_cfg = _section(
        config, "lags",
        {"mode": "none", "max_lag": 30, "source": None, "conditioner": None,
         "scan_k": 256},
    )
    est_cfg = _section(
        config, "estimator", {"k": 4, "jitter": 0.0, "jitter_seed": 0}
    )
    temporal_cfg = _section(
        config, "temporal",
        {"half_width": 25, "smoothing": 20, "candidate_count": "per-window"},
    )
    sig_cfg = _section(
        config, "significance",
        {"enabled": False, "n_surrogates": 100, "alpha": 0.05, "seed": 0,
         "shuffle_role": "source"},
    )
    method = config.get("method", "ensemble")
    if method not in METHODS:
        raise ConfigError(f"method must be one of {METHODS}, got {method!r}")

    if seed is not None:
        sig_cfg["seed"] = seed
        if "generator" in config:
            config = dict(config)
            config["generator"] = dict(config.get("generator") or {})
            config["generator"]["seed"] = seed
    ensemble, source_doc = _load_input(config)

    kw = {k: v for k, v in measure_cfg.items() if not (k == "conditioner" and v is None)}
    measure = MeasureKind(**kw)
    est = EstimatorParams(**est_cfg)
    temporal = TemporalParams(estimator=est, **temporal_cfg)

    lags = _resolve_lags(lags_cfg, measure, ensemble)
    aligned = apply_lags(ensemble, lags) if lags else ensemble
    spec, plan = build_measure(measure, aligned)
    embedded = delay_embed(aligned, plan)

    if sig_cfg["enabled"]:
        if method == "naive":
            raise ConfigError("significance testing supports ensemble or average")
        surrogate = SurrogateConfig(
            n_surrogates=sig_cfg["n_surrogates"], alpha=sig_cfg["alpha"],
            seed=sig_cfg["seed"], shuffle_role=sig_cfg["shuffle_role"],
        )
        series = permutation_test(embedded, spec, temporal, surrogate, method)
    elif method == "ensemble":
        series = ensemble_estimate(embedded, spec, temporal)
    elif method == "average":
        series = average_estimate(embedded, spec, temporal)
    else:
        series = naive_pointwise(embedded, spec, temporal)

    out_dir.mkdir(parents=True, exist_ok=True)
    out_path = out_dir / "estimate.csv"
    series.to_csv(out_path)
    reloaded = EstimateSeries.from_csv(out_path)
    if not (np.array_equal(reloaded.values, series.values)
            and np.array_equal(reloaded.times, series.times)):
        raise EntcombError("post-write validation failed for estimate.csv")

    materialized = {
        **source_doc,
        "measure": measure_cfg,
        "lags": lags_cfg,
        "estimator": est_cfg,
        "temporal": temporal_cfg,
        "method": method,
        "significance": sig_cfg,
    }
    resolved = {
        "applied_lags": lags,
        "combination": spec_to_json(spec),
        "n_trials": embedded.n_trials,
        "n_times": len(series),
        "time_start": int(series.times[0]),
    }
    _write_json(out_dir / "run.json",
                _provenance("estimate", materialized, resolved,
                            {"estimate": "estimate.csv"}))
    print(f"wrote {out_path} ({len(series)} instants, method={method})")
    return 0


def cmd_lagscan(config: dict, out_dir: Path, seed: int | None) -> int:
    _reject_unknown(
        config,
        {"input", "generator", "source", "destination", "max_lag", "horizon",
         "estimator"},
        "lagscan config",
    )
    for key in ("source", "destination"):
        if key not in config:
            raise ConfigError(f"lagscan config requires {key!r}")
    if seed is not None and "generator" in config:
        config = dict(config)
        config["generator"] = dict(config.get("generator") or {})
        config["generator"]["seed"] = seed
    ensemble, source_doc = _load_input(config)
    est = EstimatorParams(**_section(config, "estimator",
                                     {"k": 4, "jitter": 0.0, "jitter_seed": 0}))
    max_lag = int(config.get("max_lag", 30))
    horizon = int(config.get("horizon", 0))
    profile = lag_mi_profile(ensemble, config["source"], config["destination"],
                             max_lag, est, horizon)
    best = int(np.argmax(profile))

    out_dir.mkdir(parents=True, exist_ok=True)
    out_path = out_dir / "lagscan.csv"
    with open(out_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["lag", "mi", "best"])
        for lag, mi in enumerate(profile):
            writer.writerow([lag, format(mi, ".17g"), int(lag == best)])

    materialized = {
        **source_doc,
        "source": config["source"],
        "destination": config["destination"],
        "max_lag": max_lag,
        "horizon": horizon,
        "estimator": dataclasses.asdict(est),
    }
    _write_json(out_dir / "run.json",
                _provenance("lagscan", materialized,
                            {"best_lag": best, "best_mi": float(profile[best])},
                            {"lagscan": "lagscan.csv"}))
    print(f"wrote {out_path} (best lag {best}, MI {profile[best]:.4f} nats)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entcomb",
        description="Time-resolved information-flow estimation from trial ensembles",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("gen", "generate the coupled-AR benchmark ensemble"),
        ("estimate", "run the estimation pipeline on an ensemble"),
        ("lagscan", "scan pooled MI over candidate source lags"),
    ):
        cmd = sub.add_parser(name, help=text)
        cmd.add_argument("--config", help="JSON config path")
        cmd.add_argument("--seed", type=int, help="override the config seed")
        cmd.add_argument("--threads", type=int, help="cap worker threads")
        cmd.add_argument("--out", default=".", help="output directory")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.threads is not None:
            set_threads(args.threads)
        config = _load_config(args.config)
        out_dir = Path(args.out)
        if args.command == "gen":
            return cmd_gen(config, out_dir, args.seed)
        if args.command == "estimate":
            return cmd_estimate(config, out_dir, args.seed)
        return cmd_lagscan(config, out_dir, args.seed)
    except (EntcombError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
