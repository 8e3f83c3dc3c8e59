"""Spectra of one reservoir time-step viewed as a linear map on density matrices.

The step is a hardware-efficient-ansatz unitary followed by a projective Z
measurement of some qubits. Its superoperator acts on row-major ``vec(rho)``,
so ``rho -> U rho U^H`` is ``U ⊗ conj(U)``. Unitary steps keep every
eigenvalue on the unit circle; measurements pull eigenvalues inward, and so
does a larger rotation prefactor. The sweeps here quantify both effects.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .linalg import eig_general, sort_eigenvalues
from .quantum import KrausChannel, hea_step_unitary, z_measurement_channel

MAX_SPECTRUM_QUBITS = 6
DEFAULT_ANGLE_SEED = 0
DEFAULT_DEPTH = 2


class SpectrumError(ValueError):
    pass


@dataclass(frozen=True)
class Superoperator:
    n_qubits: int
    matrix: np.ndarray

    def __matmul__(self, other: "Superoperator") -> "Superoperator":
        return Superoperator(self.n_qubits, self.matrix @ other.matrix)

    def eigenvalues(self) -> np.ndarray:
        return eig_general(self.matrix)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        d = rho.shape[0]
        return (self.matrix @ rho.reshape(d * d)).reshape(d, d)


def _qubits_for_dim(dim: int) -> int:
    return int(round(math.log2(dim)))


def superop_of_unitary(u: np.ndarray, tol: float = 1e-10) -> Superoperator:
    u = np.asarray(u, dtype=complex)
    dev = float(np.linalg.norm(u.conj().T @ u - np.eye(u.shape[0])))
    if dev > tol:
        raise SpectrumError(f"matrix is not unitary: ||U^H U - I|| = {dev:.3e}")
    return Superoperator(_qubits_for_dim(u.shape[0]), np.kron(u, u.conj()))


def superop_of_channel(channel: KrausChannel, tol: float = 1e-8) -> Superoperator:
    err = channel.completeness_error()
    if err > tol:
        raise SpectrumError(f"Kraus completeness violated by {err:.3e}")
    matrix = sum(np.kron(k, k.conj()) for k in channel.operators)
    return Superoperator(_qubits_for_dim(channel.dim), matrix)


def default_angles(n_qubits: int, depth: int = DEFAULT_DEPTH,
                   seed: int = DEFAULT_ANGLE_SEED) -> np.ndarray:
    """Fixed base rotation angles, uniform on [-pi, pi]."""
    rng = np.random.default_rng(seed)
    return rng.uniform(-np.pi, np.pi, size=n_qubits * depth)


def step_superoperator(n_qubits: int, angles, prefactor: float, depth: int,
                       measured: Iterable[int] = ()) -> Superoperator:
    if not 2 <= n_qubits <= MAX_SPECTRUM_QUBITS:
        raise SpectrumError(
            f"spectrum analysis supports 2..{MAX_SPECTRUM_QUBITS} qubits, got {n_qubits}"
        )
    u = hea_step_unitary(n_qubits, angles, prefactor, depth)
    step = superop_of_unitary(u)
    measured = sorted(set(measured))
    if measured:
        step = superop_of_channel(z_measurement_channel(n_qubits, measured)) @ step
    return step


def step_spectrum(n_qubits: int, angles, prefactor: float, depth: int,
                  measured: Iterable[int] = ()) -> np.ndarray:
    """Eigenvalues of one step (unitary then measurement), sorted by modulus."""
    return step_superoperator(n_qubits, angles, prefactor, depth, measured).eigenvalues()


def mean_nontrivial_modulus(eigenvalues) -> float:
    """Mean ``|lambda|`` after dropping the one eigenvalue closest to 1.

    Every trace-preserving step keeps ``lambda = 1`` (the identity direction),
    so it carries no information about how fast memory decays.
    """
    ev = np.asarray(eigenvalues, dtype=complex)
    if ev.size < 2:
        raise SpectrumError("need at least two eigenvalues")
    keep = np.ones(ev.size, dtype=bool)
    keep[np.argmin(np.abs(ev - 1.0))] = False
    return float(np.abs(ev[keep]).mean())


@dataclass
class SpectrumConfig:
    n_qubits: int = 4
    depth: int = DEFAULT_DEPTH
    seed: int = DEFAULT_ANGLE_SEED
    prefactor: float = 1.0
    measured: tuple = (0,)
    angles: list | None = None

    def resolved_angles(self) -> np.ndarray:
        if self.angles is not None:
            return np.asarray(self.angles, dtype=float)
        return default_angles(self.n_qubits, self.depth, self.seed)


@dataclass
class SpectrumSweepResult:
    parameter: str
    values: list
    spectra: list
    n_qubits: int
    depth: int
    seed: int
    angles: list
    summary: list = field(default_factory=list)

    def metadata(self) -> dict:
        return {
            "parameter": self.parameter,
            "values": [_jsonable(v) for v in self.values],
            "n_qubits": self.n_qubits,
            "depth": self.depth,
            "seed": self.seed,
            "angles": [float(a) for a in self.angles],
            "mean_nontrivial_modulus": self.summary,
        }

    def write(self, csv_path, json_path=None) -> None:
        """CSV rows ``(parameter_value, re_lambda, im_lambda)`` plus a JSON sidecar."""
        csv_path = Path(csv_path)
        json_path = Path(json_path) if json_path else csv_path.with_suffix(".json")
        with open(csv_path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["parameter_value", "re_lambda", "im_lambda"])
            for value, spec in zip(self.values, self.spectra):
                label = _label(value)
                for lam in spec:
                    w.writerow([label, repr(float(lam.real)), repr(float(lam.imag))])
        json_path.write_text(json.dumps(self.metadata(), indent=2) + "\n")


def _label(value) -> str:
    if isinstance(value, (tuple, list)):
        return "-".join(str(q) for q in value) if value else "none"
    return repr(float(value))


def _jsonable(value):
    if isinstance(value, (tuple, list)):
        return [int(q) for q in value]
    return float(value)


def sweep_prefactor(base: SpectrumConfig, prefactors: Sequence[float]) -> SpectrumSweepResult:
    if len(prefactors) == 0:
        raise SpectrumError("prefactor list is empty")
    angles = base.resolved_angles()
    spectra = [
        step_spectrum(base.n_qubits, angles, float(p), base.depth, base.measured)
        for p in prefactors
    ]
    return SpectrumSweepResult(
        parameter="prefactor",
        values=[float(p) for p in prefactors],
        spectra=spectra,
        n_qubits=base.n_qubits,
        depth=base.depth,
        seed=base.seed,
        angles=list(angles),
        summary=[mean_nontrivial_modulus(s) for s in spectra],
    )


def sweep_measurements(base: SpectrumConfig,
                       measured_sets: Sequence[Iterable[int]]) -> SpectrumSweepResult:
    if len(measured_sets) == 0:
        raise SpectrumError("measurement-set list is empty")
    angles = base.resolved_angles()
    sets = [tuple(sorted(set(m))) for m in measured_sets]
    spectra = [
        step_spectrum(base.n_qubits, angles, base.prefactor, base.depth, m) for m in sets
    ]
    return SpectrumSweepResult(
        parameter="measured",
        values=sets,
        spectra=spectra,
        n_qubits=base.n_qubits,
        depth=base.depth,
        seed=base.seed,
        angles=list(angles),
        summary=[mean_nontrivial_modulus(s) for s in spectra],
    )


def nested_measurement_sets(n_measured: Iterable[int]) -> list[tuple]:
    """Prefix sets ``{0, ..., k-1}`` for each requested count ``k``."""
    return [tuple(range(k)) for k in n_measured]
