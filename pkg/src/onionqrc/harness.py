"""Experiment orchestration: models, the forecasting protocol and benchmarks.

Protocol: every sample starts at exposure day 0; the model sees the true
pitting on day 0 and the first ``warmup_days`` observed days after it, then
forecasts the remaining days closed-loop from humidity and temperature
alone. With 14-day samples and a 3-day warm-up that is 10 forecast days.
One reservoir is shared by all zones; each zone gets its own ridge readout
fitted on its training samples.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .creservoir import EchoStateNetwork, EsnConfig, default_onion_blocks, esn_driver
from .data import CorrosionDataset, apply_normalization, fit_normalization
from .qreservoir import (DEFAULT_A, DEFAULT_B_LADDERS, OnionQrcConfig, closed_loop,
                         quantum_driver)
from .readout import DEFAULT_ALPHA, RidgeModel, r2_score, ridge_fit

SCHEMA_VERSION = 1
MODEL_KINDS = ("simple", "crc", "oqrc", "ocqrc")
DEFAULT_WARMUP_DAYS = 3


class HarnessError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    kind: str
    qrc: dict | None = None  # OnionQrcConfig.to_dict()
    esn: dict | None = None  # EsnConfig.to_dict()
    warmup_days: int = DEFAULT_WARMUP_DAYS
    alpha: float = DEFAULT_ALPHA
    data_seed: int = 0

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise HarnessError(f"unknown model kind {self.kind!r}; choose from {MODEL_KINDS}")
        if self.warmup_days < 1:
            raise HarnessError("warmup_days must be >= 1")
        if not self.alpha > 0:
            raise HarnessError("ridge alpha must be positive")
        if self.kind in ("oqrc", "ocqrc") and self.qrc is None:
            raise HarnessError(f"{self.kind} needs a qrc section")
        if self.kind in ("crc", "ocqrc") and self.esn is None:
            raise HarnessError(f"{self.kind} needs an esn section")
        # round-trip through the owning modules to validate
        self.qrc_config()
        self.esn_config()

    def qrc_config(self) -> OnionQrcConfig | None:
        return OnionQrcConfig.from_dict(self.qrc) if self.qrc is not None else None

    def esn_config(self) -> EsnConfig | None:
        return EsnConfig.from_dict(self.esn) if self.esn is not None else None

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        return cls(**d)


def make_config(kind: str, n_qubits: int = 6, n_layers: int | None = None, *,
                b_values=None, a: float = DEFAULT_A, esn_size: int | None = None,
                esn_seed: int = 0, onion_esn: bool = False, **kw) -> ExperimentConfig:
    """Convenience constructor with the package defaults filled in.

    ``n_layers`` defaults to 3 for oqrc/ocqrc; ``esn_size`` defaults to
    ``n_qubits`` (use ``2**n_qubits`` for the exponential convention).
    """
    qrc = esn = None
    if kind in ("oqrc", "ocqrc"):
        if b_values is None:
            layers = 3 if n_layers is None else n_layers
            cfg = OnionQrcConfig.default(n_qubits, layers, a=a)
        else:
            cfg = OnionQrcConfig.ladder(n_qubits, b_values, a=a)
        qrc = cfg.to_dict()
    if kind in ("crc", "ocqrc"):
        size = n_qubits if esn_size is None else esn_size
        blocks = default_onion_blocks(size) if onion_esn and size > 0 else ()
        esn = EsnConfig(size=size, seed=esn_seed, blocks=blocks).to_dict()
    return ExperimentConfig(kind, qrc=qrc, esn=esn, **kw)


# --------------------------------------------------------------------------
# feature drivers


def feature_driver(config: ExperimentConfig):
    """Fresh stateful ``step(x, h, t) -> features`` for one sample.

    Layouts: crc ``[1, P, h, t, state]``; oqrc ``[quantum blocks, 1]``;
    ocqrc ``[quantum blocks, esn state, 1]``.
    """
    qcfg, ecfg = config.qrc_config(), config.esn_config()
    if config.kind == "crc":
        return esn_driver(EchoStateNetwork.from_config(ecfg))
    if config.kind == "oqrc":
        return quantum_driver(qcfg)
    if config.kind == "ocqrc":
        qstep = quantum_driver(qcfg) if qcfg.layers else None
        estep = esn_driver(EchoStateNetwork.from_config(ecfg), with_inputs=False)

        def step(x, h, t):
            q = qstep(x, h, t)[:-1] if qstep is not None else np.empty(0)
            return np.concatenate([q, estep(x, h, t), [1.0]])

        return step
    raise HarnessError(f"model kind {config.kind!r} has no reservoir")


def n_features(config: ExperimentConfig) -> int:
    qcfg, ecfg = config.qrc_config(), config.esn_config()
    if config.kind == "crc":
        return 4 + ecfg.size
    if config.kind == "oqrc":
        return qcfg.n_features
    if config.kind == "ocqrc":
        return qcfg.n_features + ecfg.size
    return 0


def teacher_forced(config: ExperimentConfig, sample):
    step = feature_driver(config)
    p = sample.pitting
    if p.size < 2:
        raise HarnessError(f"sample {sample.sample} has fewer than 2 days")
    rows = [step(p[d], sample.humidity[d], sample.temperature[d]) for d in range(p.size - 1)]
    return np.array(rows), p[1:].copy()


# --------------------------------------------------------------------------
# trained models


@dataclass
class TrainedModel:
    config: ExperimentConfig
    normalization: dict
    readouts: dict = field(default_factory=dict)  # zone -> RidgeModel
    mean_curves: dict = field(default_factory=dict)  # zone -> ndarray, simple model only

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "config": self.config.to_dict(),
            "normalization": {str(z): v for z, v in self.normalization.items()},
            "readouts": {str(z): m.to_dict() for z, m in self.readouts.items()},
            "mean_curves": {str(z): c.tolist() for z, c in self.mean_curves.items()},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrainedModel":
        if d.get("schema_version") != SCHEMA_VERSION:
            raise HarnessError(
                f"unsupported model schema version {d.get('schema_version')!r}"
            )
        return cls(
            ExperimentConfig.from_dict(d["config"]),
            {int(z): v for z, v in d["normalization"].items()},
            {int(z): RidgeModel.from_dict(m) for z, m in d["readouts"].items()},
            {int(z): np.asarray(c, dtype=float) for z, c in d["mean_curves"].items()},
        )

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1) + "\n")

    @classmethod
    def load(cls, path) -> "TrainedModel":
        return cls.from_dict(json.loads(Path(path).read_text()))


def train_model(config: ExperimentConfig, dataset: CorrosionDataset) -> TrainedModel:
    """Fit one readout per zone on teacher-forced rows of its training samples."""
    if dataset.normalized:
        raise HarnessError("train_model expects raw data; normalization is fit here")
    params = fit_normalization(dataset)
    data = apply_normalization(dataset, params)
    model = TrainedModel(config, params)
    for z in data.zones:
        train = data.train(z)
        if config.kind == "simple":
            lengths = {s.n_days for s in train}
            if len(lengths) != 1:
                raise HarnessError(f"zone {z}: training samples differ in length")
            model.mean_curves[z] = np.mean([s.pitting for s in train], axis=0)
            continue
        xs, ys = zip(*(teacher_forced(config, s) for s in train))
        model.readouts[z] = ridge_fit(np.vstack(xs), np.concatenate(ys), config.alpha)
    return model


# --------------------------------------------------------------------------
# evaluation


@dataclass
class ExperimentResult:
    config: dict
    per_zone: list  # [{zone, r2, samples: [{sample, predicted, true}]}]
    pooled_r2: float
    runtime_seconds: float = 0.0

    @property
    def mean_zone_r2(self) -> float:
        return float(np.mean([z["r2"] for z in self.per_zone]))

    def pooled_points(self):
        true, pred = [], []
        for z in self.per_zone:
            for s in z["samples"]:
                true.extend(s["true"])
                pred.extend(s["predicted"])
        return np.array(true), np.array(pred)

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "per_zone": [
                {**z, "r2": _finite_or_none(z["r2"]), "r2_status": _status(z["r2"])}
                for z in self.per_zone
            ],
            "pooled_r2": _finite_or_none(self.pooled_r2),
            "pooled_r2_status": _status(self.pooled_r2),
            "mean_zone_r2": _finite_or_none(self.mean_zone_r2),
            "runtime_seconds": self.runtime_seconds,
        }

    def write(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1) + "\n")

    def write_predictions(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("zone,sample,day,true,predicted\n")
            for z in self.per_zone:
                for s in z["samples"]:
                    first = s["first_day"]
                    for k, (t, p) in enumerate(zip(s["true"], s["predicted"])):
                        fh.write(f"{z['zone']},{s['sample']},{first + k},{t!r},{p!r}\n")


def _finite_or_none(v):
    return float(v) if math.isfinite(v) else None


def _status(v) -> str:
    return "ok" if math.isfinite(v) else "undefined"


def _score(per_zone: list, config: dict, started: float) -> ExperimentResult:
    # sort so that pooled R² does not depend on zone processing order
    per_zone = sorted(per_zone, key=lambda z: z["zone"])
    for z in per_zone:
        t = np.concatenate([s["true"] for s in z["samples"]])
        p = np.concatenate([s["predicted"] for s in z["samples"]])
        z["r2"] = r2_score(t, p)
    result = ExperimentResult(config, per_zone, 0.0)
    true, pred = result.pooled_points()
    result.pooled_r2 = r2_score(true, pred)
    result.runtime_seconds = time.perf_counter() - started
    return result


def _sample_entry(sample, first: int, predicted) -> dict:
    return {
        "sample": sample.sample,
        "first_day": first,
        "predicted": [float(v) for v in predicted],
        "true": [float(v) for v in sample.pitting[first:]],
    }


def evaluate(model: TrainedModel, dataset: CorrosionDataset) -> ExperimentResult:
    """Closed-loop forecasts for every test sample, scored per zone and pooled."""
    started = time.perf_counter()
    cfg = model.config
    data = dataset if dataset.normalized else apply_normalization(dataset, model.normalization)
    n_obs = cfg.warmup_days + 1
    per_zone = []
    for z in data.zones:
        samples = []
        for s in data.test(z):
            if s.n_days <= n_obs:
                raise HarnessError(
                    f"zone {z} sample {s.sample}: {s.n_days} days leave no forecast horizon"
                )
            if cfg.kind == "simple":
                curve = model.mean_curves.get(z)
                if curve is None or curve.size != s.n_days:
                    raise HarnessError(f"zone {z}: mean curve does not cover the horizon")
                pred = curve[n_obs:]
            else:
                if z not in model.readouts:
                    raise HarnessError(f"model has no readout for zone {z}")
                pred = closed_loop(feature_driver(cfg), model.readouts[z],
                                   s.pitting[:n_obs], s.humidity, s.temperature)
            samples.append(_sample_entry(s, n_obs, pred))
        per_zone.append({"zone": z, "samples": samples})
    return _score(per_zone, model_echo(model), started)


def model_echo(model: TrainedModel) -> dict:
    return {
        **model.config.to_dict(),
        "normalization": {str(z): v for z, v in model.normalization.items()},
    }


def simple_baseline(dataset: CorrosionDataset, warmup_days: int = DEFAULT_WARMUP_DAYS):
    """Forecast each test sample with its zone's mean training curve."""
    config = ExperimentConfig("simple", warmup_days=warmup_days)
    return evaluate(train_model(config, dataset), dataset)


def run_experiment(config: ExperimentConfig, dataset: CorrosionDataset) -> ExperimentResult:
    started = time.perf_counter()
    result = evaluate(train_model(config, dataset), dataset)
    result.runtime_seconds = time.perf_counter() - started
    return result


def hybrid_ocqrc(config: ExperimentConfig, dataset: CorrosionDataset) -> ExperimentResult:
    """Onion quantum plus classical reservoir sharing one readout per zone."""
    if config.kind != "ocqrc":
        raise HarnessError(f"hybrid run needs kind 'ocqrc', got {config.kind!r}")
    return run_experiment(config, dataset)


# --------------------------------------------------------------------------
# benchmark


def parse_model_name(name: str):
    """``simple``, ``crc``, ``oqrcK``, ``ocqrcK`` (K layers, default 3)."""
    name = name.strip().lower()
    for kind in ("ocqrc", "oqrc"):
        if name.startswith(kind):
            rest = name[len(kind):]
            return kind, int(rest) if rest else 3
    if name in ("simple", "crc"):
        return name, 0
    raise HarnessError(f"unknown model name {name!r}")


def benchmark_config(name: str, n_qubits: int, *, crc_size: str = "linear",
                     esn_seed: int = 0, onion_esn: bool = False, **kw) -> ExperimentConfig:
    kind, layers = parse_model_name(name)
    if crc_size not in ("linear", "exponential"):
        raise HarnessError(f"crc size convention must be linear or exponential, got {crc_size!r}")
    esn_size = n_qubits if crc_size == "linear" else 2**n_qubits
    return make_config(kind, n_qubits, layers or None, esn_size=esn_size,
                       esn_seed=esn_seed, onion_esn=onion_esn, **kw)


def benchmark(models, qubits, data_seeds, dataset_factory, **config_kw) -> list[dict]:
    """Mean/std pooled R² for every (model, qubit count) over ``data_seeds``.

    ``dataset_factory(seed)`` returns the raw dataset for one seed. Rows come
    back in (model, qubits) order regardless of evaluation order.
    """
    datasets = {seed: dataset_factory(seed) for seed in data_seeds}
    rows = []
    for name in models:
        for nq in qubits:
            pooled, zone_means = [], []
            for seed in data_seeds:
                cfg = benchmark_config(name, nq, data_seed=seed, **config_kw)
                res = run_experiment(cfg, datasets[seed])
                pooled.append(res.pooled_r2)
                zone_means.append(res.mean_zone_r2)
            cfg = benchmark_config(name, nq, **config_kw)
            rows.append({
                "model": name,
                "qubits": nq,
                "n_features": n_features(cfg),
                "seeds": len(data_seeds),
                "mean_pooled_r2": float(np.mean(pooled)),
                "std_pooled_r2": float(np.std(pooled)),
                "mean_zone_r2": float(np.mean(zone_means)),
            })
    return rows
