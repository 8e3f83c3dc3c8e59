"""Corrosion datasets: CSV I/O, exogenous normalization and a synthetic generator.

A dataset is a set of samples, each a day-indexed series of pitting
fraction, tarnishing (parsed, unused), humidity and temperature, grouped by
climate zone. Each zone is split into training and test samples; humidity
and temperature are min-max normalized per zone on the training samples.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np

CSV_COLUMNS = ("zone", "sample", "day", "pitting", "tarnishing", "humidity", "temperature")
SAMPLES_PER_ZONE = 12
TEST_PER_ZONE = 2
N_DAYS = 14
P0_RANGE = (0.005, 0.02)


class DataError(ValueError):
    pass


@dataclass
class CorrosionSample:
    zone: int
    sample: int
    pitting: np.ndarray
    humidity: np.ndarray
    temperature: np.ndarray
    tarnishing: np.ndarray | None = None

    @property
    def n_days(self) -> int:
        return self.pitting.size


@dataclass
class CorrosionDataset:
    samples: list
    test_ids: dict  # zone -> sorted sample ids held out
    normalization: dict | None = None  # zone -> {"humidity": [lo, hi], "temperature": [lo, hi]}
    out_of_range: list = field(default_factory=list)

    def __post_init__(self):
        self.samples = sorted(self.samples, key=lambda s: (s.zone, s.sample))
        for z in self.zones:
            ids = {s.sample for s in self.samples if s.zone == z}
            test = set(self.test_ids.get(z, ()))
            if not test <= ids:
                raise DataError(f"zone {z}: test ids {sorted(test - ids)} not in dataset")
            if test == ids:
                raise DataError(f"zone {z}: no training samples left")

    @property
    def zones(self) -> list:
        return sorted({s.zone for s in self.samples})

    @property
    def normalized(self) -> bool:
        return self.normalization is not None

    def zone_samples(self, zone) -> list:
        return [s for s in self.samples if s.zone == zone]

    def train(self, zone) -> list:
        test = set(self.test_ids[zone])
        return [s for s in self.zone_samples(zone) if s.sample not in test]

    def test(self, zone) -> list:
        test = set(self.test_ids[zone])
        return [s for s in self.zone_samples(zone) if s.sample in test]


def default_split(samples, n_test: int = TEST_PER_ZONE) -> dict:
    """Hold out the ``n_test`` highest sample ids of every zone."""
    by_zone: dict = {}
    for s in samples:
        by_zone.setdefault(s.zone, []).append(s.sample)
    return {z: sorted(ids)[-n_test:] if n_test else [] for z, ids in sorted(by_zone.items())}


# --------------------------------------------------------------------------
# CSV


def _parse_float(text: str, column: str, line: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise DataError(f"line {line}: column {column!r} is not a number: {text!r}") from None
    if not np.isfinite(value):
        raise DataError(f"line {line}: column {column!r} is not finite")
    return value


def load_csv(path, samples_per_zone: int | None = SAMPLES_PER_ZONE,
             n_test: int = TEST_PER_ZONE) -> CorrosionDataset:
    """Read a dataset; line numbers in errors count the header as line 1.

    Values are taken as raw (unnormalized) measurements.
    """
    rows: dict = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in CSV_COLUMNS if c not in (reader.fieldnames or [])]
        if missing:
            raise DataError(f"{path}: missing column(s) {', '.join(missing)}")
        for line, rec in enumerate(reader, start=2):
            try:
                zone, sample, day = int(rec["zone"]), int(rec["sample"]), int(rec["day"])
            except (TypeError, ValueError):
                raise DataError(f"line {line}: zone, sample and day must be integers") from None
            series = rows.setdefault((zone, sample), [])
            if day != len(series):
                raise DataError(
                    f"line {line}: zone {zone} sample {sample} expected day {len(series)}, got {day}"
                )
            pit = _parse_float(rec["pitting"], "pitting", line)
            if not 0.0 <= pit <= 1.0:
                raise DataError(f"line {line}: pitting {pit} outside [0, 1]")
            tarn = rec["tarnishing"].strip() if rec["tarnishing"] is not None else ""
            series.append((
                pit,
                _parse_float(tarn, "tarnishing", line) if tarn else np.nan,
                _parse_float(rec["humidity"], "humidity", line),
                _parse_float(rec["temperature"], "temperature", line),
            ))
    if not rows:
        raise DataError(f"{path}: no data rows")
    samples = []
    for (zone, sample), series in rows.items():
        arr = np.array(series, dtype=float)
        samples.append(CorrosionSample(zone, sample, arr[:, 0], arr[:, 2], arr[:, 3], arr[:, 1]))
    if samples_per_zone is not None:
        for zone in sorted({s.zone for s in samples}):
            count = sum(s.zone == zone for s in samples)
            if count != samples_per_zone:
                raise DataError(f"zone {zone} has {count} samples, expected {samples_per_zone}")
    return CorrosionDataset(samples, default_split(samples, n_test))


def _fmt(v) -> str:
    return "" if v is None or not np.isfinite(v) else repr(float(v))


def save_csv(dataset: CorrosionDataset, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for s in dataset.samples:
            for d in range(s.n_days):
                tarn = s.tarnishing[d] if s.tarnishing is not None else None
                w.writerow([s.zone, s.sample, d, _fmt(s.pitting[d]), _fmt(tarn),
                            _fmt(s.humidity[d]), _fmt(s.temperature[d])])


# --------------------------------------------------------------------------
# normalization


def fit_normalization(dataset: CorrosionDataset) -> dict:
    params = {}
    for z in dataset.zones:
        train = dataset.train(z)
        entry = {}
        for channel in ("humidity", "temperature"):
            values = np.concatenate([getattr(s, channel) for s in train])
            lo, hi = float(values.min()), float(values.max())
            if not hi > lo:
                raise DataError(f"zone {z}: {channel} is constant on the training samples")
            entry[channel] = [lo, hi]
        params[z] = entry
    return params


def apply_normalization(dataset: CorrosionDataset, params: dict) -> CorrosionDataset:
    """Map humidity/temperature through stored per-zone ``[lo, hi]`` ranges.

    No clipping; test values outside the training range are listed in
    ``out_of_range`` as ``(zone, sample, channel)``.
    """
    if dataset.normalized:
        raise DataError("dataset is already normalized")
    samples, flagged = [], []
    for s in dataset.samples:
        if s.zone not in params:
            raise DataError(f"no normalization parameters for zone {s.zone}")
        scaled = {}
        for channel in ("humidity", "temperature"):
            lo, hi = params[s.zone][channel]
            v = (getattr(s, channel) - lo) / (hi - lo)
            if np.any(v < 0) or np.any(v > 1):
                flagged.append((s.zone, s.sample, channel))
            scaled[channel] = v
        samples.append(replace(s, **scaled))
    return CorrosionDataset(samples, dataset.test_ids, params, flagged)


def normalize(dataset: CorrosionDataset) -> CorrosionDataset:
    """Per-zone min-max scaling of humidity and temperature, fit on training samples."""
    return apply_normalization(dataset, fit_normalization(dataset))


# --------------------------------------------------------------------------
# synthetic generator


@dataclass(frozen=True)
class ZoneParams:
    zone: int
    growth_rate: float
    saturation: float
    p0: float = 0.01
    humidity_mean: float = 80.0
    humidity_amplitude: float = 10.0
    humidity_period: float = 5.0
    temperature_mean: float = 30.0
    temperature_amplitude: float = 5.0
    temperature_period: float = 5.0
    noise_scale: float = 0.1

    def validate(self) -> None:
        if not 0 < self.saturation <= 1:
            raise DataError(f"zone {self.zone}: saturation {self.saturation} not in (0, 1]")
        if self.growth_rate < 0:
            raise DataError(f"zone {self.zone}: negative growth rate {self.growth_rate}")
        if not P0_RANGE[0] <= self.p0 <= P0_RANGE[1]:
            raise DataError(f"zone {self.zone}: p0 {self.p0} outside {list(P0_RANGE)}")
        if self.noise_scale < 0:
            raise DataError(f"zone {self.zone}: negative noise scale")
        if self.humidity_period <= 0 or self.temperature_period <= 0:
            raise DataError(f"zone {self.zone}: cycle periods must be positive")


def default_zone_config() -> dict:
    text = resources.files("onionqrc").joinpath("zones_default.json").read_text()
    return json.loads(text)


def default_zone_params() -> list:
    return [ZoneParams(**z) for z in default_zone_config()["zones"]]


def logistic_pitting(p0: float, rate: float, saturation: float, driver) -> np.ndarray:
    """Daily explicit steps of ``dP/dday = rate * H(day) * P * (1 - P/K)``.

    ``driver[d]`` is the humidity drive ``H`` on day ``d``; returns one value
    per driver day, starting from ``p0``.
    """
    p = np.empty(len(driver))
    p[0] = p0
    for d in range(1, len(driver)):
        prev = p[d - 1]
        p[d] = prev + rate * driver[d - 1] * prev * (1.0 - prev / saturation)
    return np.clip(p, 0.0, 1.0)


def synth_generate(seed: int = 0, zones=None, n_samples: int = SAMPLES_PER_ZONE,
                   n_days: int = N_DAYS, n_test: int = TEST_PER_ZONE) -> CorrosionDataset:
    """Synthetic climate-zone corrosion data (raw, unnormalized).

    Every sample of a zone shares the zone's humidity/temperature cycles and
    growth law. Per-sample variation, all scaled by the zone's
    ``noise_scale`` (sigma): log-normal factors on the initial pitting and the
    growth rate, a random cycle phase, and daily Gaussian jitter on the
    environmental channels. ``noise_scale = 0`` makes a zone's samples identical.
    """
    zones = default_zone_params() if zones is None else [
        z if isinstance(z, ZoneParams) else ZoneParams(**z) for z in zones
    ]
    if not zones:
        raise DataError("need at least one zone")
    root = np.random.SeedSequence(seed)
    days = np.arange(n_days, dtype=float)
    samples = []
    for zp, zone_seq in zip(zones, root.spawn(len(zones))):
        zp.validate()
        sigma = zp.noise_scale
        for k, seq in enumerate(zone_seq.spawn(n_samples)):
            rng = np.random.default_rng(seq)
            z = rng.standard_normal(5)
            jitter = rng.standard_normal((2, n_days))
            p0 = float(np.clip(zp.p0 * np.exp(sigma * z[0]), *P0_RANGE))
            rate = zp.growth_rate * np.exp(sigma * z[1])
            phase = sigma * z[2]
            hum = (zp.humidity_mean
                   + zp.humidity_amplitude * np.sin(2 * np.pi * days / zp.humidity_period + phase)
                   + sigma * zp.humidity_amplitude * jitter[0])
            hum = np.clip(hum, 0.0, 100.0)
            temp = (zp.temperature_mean
                    + zp.temperature_amplitude
                    * np.sin(2 * np.pi * days / zp.temperature_period + phase)
                    + sigma * zp.temperature_amplitude * jitter[1])
            pit = logistic_pitting(p0, rate, zp.saturation, hum / 100.0)
            tarn = np.clip(pit * (1.5 + 0.2 * z[3] * sigma), 0.0, 1.0)
            samples.append(CorrosionSample(zp.zone, k, pit, hum, temp, tarn))
    return CorrosionDataset(samples, default_split(samples, n_test))
