"""Command-line entry point: ``onionqrc <subcommand> [options]``.

Every subcommand accepts ``--seed``, ``--out-dir`` and ``--config``; the
config file is a JSON object whose keys are option names (dashes or
underscores) and act as defaults that explicit flags override. For
``train`` a config containing ``kind`` is read as a full experiment config.
Failures print one JSON line ``{"error": ..., "message": ...}`` on stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from . import __version__
from .data import load_csv, save_csv, synth_generate
from .harness import (MODEL_KINDS, ExperimentConfig, TrainedModel, benchmark,
                      benchmark_config, evaluate, train_model)
from .spectrum import (DEFAULT_ANGLE_SEED, DEFAULT_DEPTH, SpectrumConfig,
                       nested_measurement_sets, sweep_measurements, sweep_prefactor)


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        _emit_error("UsageError", message)
        sys.exit(2)


def _emit_error(kind: str, message: str) -> None:
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _names(text: str) -> list[str]:
    return [v.strip() for v in text.split(",") if v.strip()]


def _load_zones(path):
    if path is None:
        return None
    d = json.loads(Path(path).read_text())
    return d["zones"] if isinstance(d, dict) else d


def _dataset(args, seed):
    if getattr(args, "data", None):
        return load_csv(args.data)
    return synth_generate(seed, _load_zones(getattr(args, "zones", None)))


def _out(args, name: str) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out / name


# --------------------------------------------------------------------------
# subcommands


def cmd_synth(args) -> None:
    ds = synth_generate(args.seed, _load_zones(args.zones))
    path = _out(args, args.output)
    save_csv(ds, path)
    print(path)


def cmd_spectrum(args) -> None:
    seed = DEFAULT_ANGLE_SEED if args.seed is None else args.seed
    base = SpectrumConfig(n_qubits=args.qubits, depth=args.depth, seed=seed,
                          prefactor=args.prefactor, measured=tuple(range(args.measured)))
    if args.measured_sweep:
        result = sweep_measurements(base, nested_measurement_sets(_ints(args.measured_sweep)))
    else:
        result = sweep_prefactor(base, _floats(args.prefactors))
    csv_path = _out(args, args.output)
    result.write(csv_path)
    for value, mean in zip(result.values, result.summary):
        print(f"{result.parameter}={value}\tmean|lambda|={mean:.6f}")


def _experiment_config(args) -> ExperimentConfig:
    if args.experiment is not None:
        cfg = dict(args.experiment)
        if args.seed is not None:
            cfg["data_seed"] = args.seed
        return ExperimentConfig.from_dict(cfg)
    seed = 0 if args.seed is None else args.seed
    return benchmark_config(args.model, args.qubits, crc_size=args.crc_size,
                            esn_seed=args.esn_seed, onion_esn=args.onion_esn,
                            data_seed=seed, warmup_days=args.warmup, alpha=args.alpha)


def cmd_train(args) -> None:
    cfg = _experiment_config(args)
    model = train_model(cfg, _dataset(args, cfg.data_seed))
    path = _out(args, args.output)
    model.save(path)
    print(path)


def cmd_evaluate(args) -> None:
    model = TrainedModel.load(args.model)
    seed = model.config.data_seed if args.seed is None else args.seed
    result = evaluate(model, _dataset(args, seed))
    result.config["data"] = args.data if args.data else {"synth_seed": seed}
    result.write(_out(args, args.output))
    result.write_predictions(_out(args, Path(args.output).stem + "_predictions.csv"))
    print(f"pooled_r2={result.pooled_r2:.6f}")


def cmd_benchmark(args) -> None:
    seeds = _ints(args.seeds) if args.seeds else [0 if args.seed is None else args.seed]
    zones = _load_zones(args.zones)
    rows = benchmark(_names(args.models), _ints(args.qubits), seeds,
                     lambda s: synth_generate(s, zones),
                     crc_size=args.crc_size, esn_seed=args.esn_seed,
                     onion_esn=args.onion_esn, warmup_days=args.warmup, alpha=args.alpha)
    path = _out(args, args.output)
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    for r in rows:
        print(f"{r['model']}\t{r['qubits']}\t{r['mean_pooled_r2']:.4f}")


# --------------------------------------------------------------------------
# parser


def _common(p) -> None:
    p.add_argument("--seed", type=int, default=None, help="random seed")
    p.add_argument("--out-dir", default=".", help="directory for emitted files")
    p.add_argument("--config", default=None, help="JSON file of option defaults")


def _model_options(p) -> None:
    p.add_argument("--model", default="oqrc3",
                   help="simple, crc, oqrcK or ocqrcK (K layers)")
    p.add_argument("--qubits", type=int, default=6)
    p.add_argument("--crc-size", choices=("linear", "exponential"), default="linear",
                   help="classical reservoir size = qubits or 2**qubits")
    p.add_argument("--onion-esn", action="store_true",
                   help="use a block-diagonal annulus reservoir for the classical part")
    p.add_argument("--esn-seed", type=int, default=0)
    p.add_argument("--warmup", type=int, default=3, help="observed days after day 0")
    p.add_argument("--alpha", type=float, default=1e-6, help="ridge regularization")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="onionqrc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", help="write a synthetic corrosion dataset CSV")
    _common(p)
    p.add_argument("--zones", default=None, help="JSON file of zone parameters")
    p.add_argument("--output", default="synth.csv")
    p.set_defaults(func=cmd_synth, seed=0)

    p = sub.add_parser("spectrum", help="eigenvalue sweeps of one reservoir step")
    _common(p)
    p.add_argument("--qubits", type=int, default=4)
    p.add_argument("--depth", type=int, default=DEFAULT_DEPTH)
    p.add_argument("--measured", type=int, default=1,
                   help="number of measured qubits (0..k-1) for the prefactor sweep")
    p.add_argument("--prefactors", default="0.25,0.5,1,2,4")
    p.add_argument("--prefactor", type=float, default=1.0,
                   help="fixed prefactor for the measurement sweep")
    p.add_argument("--measured-sweep", default=None,
                   help="comma list of measured-qubit counts; switches to a measurement sweep")
    p.add_argument("--output", default="spectrum.csv")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("train", help="fit per-zone readouts and write a model JSON")
    _common(p)
    _model_options(p)
    p.add_argument("--data", default=None, help="dataset CSV (default: synthetic)")
    p.add_argument("--zones", default=None)
    p.add_argument("--output", default="model.json")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="closed-loop forecasts for the test samples")
    _common(p)
    p.add_argument("--model", required=True, help="model JSON from 'train'")
    p.add_argument("--data", default=None, help="dataset CSV (default: synthetic)")
    p.add_argument("--zones", default=None)
    p.add_argument("--output", default="result.json")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("benchmark", help="R² table over models x qubit counts")
    _common(p)
    p.add_argument("--models", default="simple,crc,oqrc1,oqrc3,ocqrc3")
    p.add_argument("--qubits", default="4,6,8")
    p.add_argument("--seeds", default="0,1,2,3,4")
    p.add_argument("--crc-size", choices=("linear", "exponential"), default="linear")
    p.add_argument("--onion-esn", action="store_true")
    p.add_argument("--esn-seed", type=int, default=0)
    p.add_argument("--warmup", type=int, default=3)
    p.add_argument("--alpha", type=float, default=1e-6)
    p.add_argument("--zones", default=None)
    p.add_argument("--output", default="benchmark.csv")
    p.set_defaults(func=cmd_benchmark)
    return parser


def _apply_config(parser, argv):
    """Re-parse with the ``--config`` file's keys installed as defaults."""
    args = parser.parse_args(argv)
    args.experiment = None
    if args.config is None:
        return args
    try:
        cfg = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read config {args.config}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise CliError("config file must hold a JSON object")
    if args.command == "train" and "kind" in cfg:
        args.experiment = cfg
        return args
    sub = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest for a in sub._actions}
    defaults = {}
    for key, value in cfg.items():
        dest = key.replace("-", "_")
        if dest not in known:
            raise CliError(f"unknown config key {key!r} for {args.command}")
        defaults[dest] = value
    sub.set_defaults(**defaults)
    args = parser.parse_args(argv)
    args.experiment = None
    return args


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, sys.argv[1:] if argv is None else argv)
        args.func(args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except Exception as exc:  # noqa: BLE001 - top-level reporting
        _emit_error(type(exc).__name__, str(exc).replace("\n", " "))
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
