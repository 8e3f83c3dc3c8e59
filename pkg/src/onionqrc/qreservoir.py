"""Feedback quantum reservoir and its onion composition.

Each time step runs a fresh circuit on ``|0...0>``:

* qubit 0 gets ``Ry(a*x + c_h*h + c_t*t)``, the other qubits ``Ry(b*y_i)``;
* a full CNOT layer;
* ``n_blocks`` blocks of [``Ry(b*y_i)`` on every qubit, CNOT layer,
  ``Ry(b*y_i)`` on every qubit].

``x`` is the pitting value, ``h``/``t`` the normalized humidity and
temperature, and ``y_i = arccos(<Z_i>)`` the memory carried over from the
previous step. Pitting is stored as an area fraction but enters the
circuit as a percentage (``x = pitting_scale * fraction``), the unit the
tuned ``a = -0.31`` refers to. An onion reservoir runs several such layers side by side with
different ``b`` (each keeps its own memory) and concatenates their ``<Z_i>``
and ``<Z_i Z_j>`` readings.
"""

from __future__ import annotations

import csv
from dataclasses import asdict, dataclass, field

import numpy as np

from .quantum import apply_1q, entangling_layer, ry_gate, z_features, zero_state

DEFAULT_A = -0.31
DEFAULT_B = 0.1
DEFAULT_EXOGENOUS_PREFACTOR = -0.30
DEFAULT_N_BLOCKS = 2
DEFAULT_PITTING_SCALE = 100.0  # fraction -> percent
MAX_QUBITS = 10  # statevector simulation only
DEFAULT_B_LADDERS = {
    1: (0.1,),
    3: (0.05, 0.1, 0.2),
    5: (0.025, 0.05, 0.1, 0.2, 0.4),
}


class ReservoirError(ValueError):
    pass


@dataclass(frozen=True)
class QrcLayerConfig:
    n_qubits: int
    a: float = DEFAULT_A
    b: float = DEFAULT_B
    c_h: float = DEFAULT_EXOGENOUS_PREFACTOR
    c_t: float = DEFAULT_EXOGENOUS_PREFACTOR
    n_blocks: int = DEFAULT_N_BLOCKS

    def __post_init__(self):
        if self.n_qubits < 2:
            raise ReservoirError(f"a reservoir layer needs >= 2 qubits, got {self.n_qubits}")
        if self.n_qubits > MAX_QUBITS:
            raise ReservoirError(f"at most {MAX_QUBITS} qubits are supported, got {self.n_qubits}")
        if not all(np.isfinite([self.a, self.b, self.c_h, self.c_t])):
            raise ReservoirError("layer prefactors must be finite")
        if self.n_blocks < 0:
            raise ReservoirError("n_blocks must be non-negative")

    @property
    def n_features(self) -> int:
        n = self.n_qubits
        return n + n * (n - 1) // 2


@dataclass(frozen=True)
class OnionQrcConfig:
    layers: tuple
    pitting_scale: float = DEFAULT_PITTING_SCALE

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        if not np.isfinite(self.pitting_scale):
            raise ReservoirError("pitting_scale must be finite")

    @classmethod
    def ladder(cls, n_qubits: int, b_values, a: float = DEFAULT_A,
               pitting_scale: float = DEFAULT_PITTING_SCALE, **kw) -> "OnionQrcConfig":
        layers = tuple(QrcLayerConfig(n_qubits, a=a, b=float(b), **kw) for b in b_values)
        return cls(layers, pitting_scale)

    @classmethod
    def default(cls, n_qubits: int, n_layers: int = 3, **kw) -> "OnionQrcConfig":
        """Geometric ``b`` ladder around the tuned ``b = 0.1``."""
        if n_layers in DEFAULT_B_LADDERS:
            bs = DEFAULT_B_LADDERS[n_layers]
        else:
            bs = tuple(DEFAULT_B * 2.0 ** (k - (n_layers - 1) / 2) for k in range(n_layers))
        return cls.ladder(n_qubits, bs, **kw)

    @property
    def n_features(self) -> int:
        """Length of a feature vector, including the trailing constant."""
        return sum(layer.n_features for layer in self.layers) + 1

    def initial_states(self) -> list[np.ndarray]:
        return [np.zeros(layer.n_qubits) for layer in self.layers]

    def to_dict(self) -> dict:
        return {
            "layers": [asdict(layer) for layer in self.layers],
            "pitting_scale": self.pitting_scale,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "OnionQrcConfig":
        return cls(
            tuple(QrcLayerConfig(**layer) for layer in d["layers"]),
            float(d.get("pitting_scale", DEFAULT_PITTING_SCALE)),
        )


def _check_finite(**values) -> None:
    for name, v in values.items():
        if not np.isfinite(v):
            raise ReservoirError(f"{name} must be finite, got {v}")


def qrc_step(config: QrcLayerConfig, y, x: float, h: float, t: float):
    """One circuit execution; returns ``(features, next_y)``.

    ``features`` holds ``<Z_i>`` for every qubit followed by ``<Z_i Z_j>`` for
    ``i < j``; ``next_y`` is ``arccos`` of the clamped ``<Z_i>``.
    """
    _check_finite(x=x, h=h, t=t)
    n = config.n_qubits
    y = np.asarray(y, dtype=float)
    if y.shape != (n,):
        raise ReservoirError(f"feedback state must have {n} angles, got shape {y.shape}")

    psi = zero_state(n)
    psi = apply_1q(psi, ry_gate(config.a * x + config.c_h * h + config.c_t * t), 0)
    for q in range(1, n):
        psi = apply_1q(psi, ry_gate(config.b * y[q]), q)
    psi = entangling_layer(psi)
    feedback = [ry_gate(config.b * yq) for yq in y]
    for _ in range(config.n_blocks):
        for q in range(n):
            psi = apply_1q(psi, feedback[q], q)
        psi = entangling_layer(psi)
        for q in range(n):
            psi = apply_1q(psi, feedback[q], q)

    features = z_features(psi)
    next_y = np.arccos(np.clip(features[:n], -1.0, 1.0))
    return features, next_y


def onion_step(config: OnionQrcConfig, states, x: float, h: float, t: float):
    """Run every layer on the same ``(x, h, t)``; returns ``(features, next_states)``.

    ``x`` is in circuit units (already multiplied by ``pitting_scale``).
    """
    if not config.layers:
        raise ReservoirError("onion reservoir has no layers")
    if len(states) != len(config.layers):
        raise ReservoirError(
            f"{len(config.layers)} layers but {len(states)} feedback states"
        )
    blocks, next_states = [], []
    for layer, y in zip(config.layers, states):
        f, y_next = qrc_step(layer, y, x, h, t)
        blocks.append(f)
        next_states.append(y_next)
    blocks.append(np.ones(1))
    return np.concatenate(blocks), next_states


def _series(pitting, humidity, temperature):
    p = np.asarray(pitting, dtype=float)
    h = np.asarray(humidity, dtype=float)
    t = np.asarray(temperature, dtype=float)
    if not (p.shape == h.shape == t.shape) or p.ndim != 1:
        raise ReservoirError("pitting, humidity and temperature must be 1-D and equal length")
    return p, h, t


def run_teacher_forced(config: OnionQrcConfig, pitting, humidity, temperature):
    """Feature rows driven by the true pitting series.

    Row ``d`` is produced from ``pitting[d]`` and is paired with target
    ``pitting[d + 1]`` (targets stay fractions). Returns ``(features, targets)``.
    """
    p, h, t = _series(pitting, humidity, temperature)
    if p.size < 2:
        raise ReservoirError(f"series needs at least 2 days, got {p.size}")
    step = quantum_driver(config)
    rows = [step(p[d], h[d], t[d]) for d in range(p.size - 1)]
    return np.array(rows), p[1:].copy()


def run_closed_loop(config: OnionQrcConfig, readout, observed, humidity,
                    temperature) -> np.ndarray:
    """Forecast pitting after warming the onion reservoir up on ``observed``."""
    return closed_loop(quantum_driver(config), readout, observed, humidity, temperature)


def closed_loop(step, readout, observed, humidity, temperature) -> np.ndarray:
    """Autonomous forecast after a warm-up on ``observed`` pitting values.

    ``step(x, h, t) -> features`` is a stateful reservoir driver (see
    :func:`quantum_driver`); ``readout.predict`` maps features to the next
    pitting value. Days ``0 .. len(observed)-1`` feed the true
    pitting; afterwards the clamped readout output is fed back. Returns the
    predictions for days ``len(observed) .. len(humidity)-1``.
    """
    observed = np.asarray(observed, dtype=float)
    h = np.asarray(humidity, dtype=float)
    t = np.asarray(temperature, dtype=float)
    if h.shape != t.shape:
        raise ReservoirError("humidity and temperature lengths differ")
    n_obs, horizon = observed.size, h.size
    if n_obs < 1:
        raise ReservoirError("warm-up needs at least one observed day")
    if horizon <= n_obs:
        raise ReservoirError(
            f"horizon of {horizon} days leaves nothing to predict after {n_obs} observed days"
        )
    preds = []
    x = observed[0]
    for d in range(horizon - 1):
        f = step(x, h[d], t[d])
        nxt = float(np.clip(readout.predict(f), 0.0, 1.0))
        if d + 1 < n_obs:
            x = observed[d + 1]
        else:
            preds.append(nxt)
            x = nxt
    return np.array(preds)


def quantum_driver(config: OnionQrcConfig):
    """Stateful ``step(x, h, t) -> features`` over fresh feedback states.

    ``x`` is a pitting fraction; it is scaled to circuit units here.
    """
    states = config.initial_states()

    def step(x, h, t):
        nonlocal states
        f, states = onion_step(config, states, config.pitting_scale * x, h, t)
        return f

    return step


def write_features_csv(path, features, targets=None) -> None:
    """One row per day, one column per feature (and the target, if given)."""
    features = np.asarray(features)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        header = [f"f{k}" for k in range(features.shape[1])]
        if targets is not None:
            header.append("target")
        w.writerow(header)
        for k, row in enumerate(features):
            vals = [repr(float(v)) for v in row]
            if targets is not None:
                vals.append(repr(float(targets[k])))
            w.writerow(vals)
