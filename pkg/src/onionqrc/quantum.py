"""Small-register quantum simulation.

Statevectors are 1-D complex arrays of length ``2**n`` (a trailing batch
axis is allowed, which is how circuit unitaries are assembled column by
column). Qubit 0 is the most significant bit of the basis index, i.e. the
top wire of a circuit diagram. Density matrices are ``2**n x 2**n`` arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


class QuantumError(ValueError):
    pass


def n_qubits_of(state: np.ndarray) -> int:
    dim = state.shape[0]
    n = int(round(math.log2(dim))) if dim > 0 else -1
    if n < 1 or 2**n != dim:
        raise QuantumError(f"state dimension {dim} is not a power of two")
    return n


def zero_state(n_qubits: int) -> np.ndarray:
    if n_qubits < 1:
        raise QuantumError(f"need at least one qubit, got {n_qubits}")
    psi = np.zeros(2**n_qubits, dtype=complex)
    psi[0] = 1.0
    return psi


def basis_state(bits: str) -> np.ndarray:
    """Computational basis state from a bit string, qubit 0 first."""
    psi = np.zeros(2 ** len(bits), dtype=complex)
    psi[int(bits, 2)] = 1.0
    return psi


def ry_gate(theta: float) -> np.ndarray:
    if not np.isfinite(theta):
        raise QuantumError(f"rotation angle must be finite, got {theta}")
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def _check_index(q: int, n: int) -> None:
    if not 0 <= q < n:
        raise QuantumError(f"qubit index {q} out of range for {n} qubits")


def _as_tensor(state: np.ndarray, n: int) -> np.ndarray:
    return state.reshape((2,) * n + state.shape[1:])


def apply_1q(state: np.ndarray, gate: np.ndarray, qubit: int) -> np.ndarray:
    """Apply a 2x2 gate to one qubit and return the new state."""
    n = n_qubits_of(state)
    _check_index(qubit, n)
    gate = np.asarray(gate)
    if gate.shape != (2, 2):
        raise QuantumError(f"single-qubit gate must be 2x2, got {gate.shape}")
    psi = _as_tensor(state, n)
    out = np.tensordot(gate, psi, axes=([1], [qubit]))
    out = np.moveaxis(out, 0, qubit)
    return out.reshape(state.shape)


def apply_cnot(state: np.ndarray, control: int, target: int) -> np.ndarray:
    n = n_qubits_of(state)
    _check_index(control, n)
    _check_index(target, n)
    if control == target:
        raise QuantumError(f"control and target must differ, both are {control}")
    psi = _as_tensor(state, n).copy()
    sel = [slice(None)] * psi.ndim
    sel[control] = 1
    sub = psi[tuple(sel)]
    # the control axis is gone from ``sub``
    axis = target - 1 if target > control else target
    psi[tuple(sel)] = np.flip(sub, axis=axis)
    return psi.reshape(state.shape)


def entangling_layer(state: np.ndarray) -> np.ndarray:
    """CNOT(i, j) for every pair i < j, in lexicographic order.

    This is the "full" entanglement pattern of Qiskit's two-local circuits.
    """
    n = n_qubits_of(state)
    if n < 2:
        raise QuantumError("entangling layer needs at least 2 qubits")
    for i in range(n):
        for j in range(i + 1, n):
            state = apply_cnot(state, i, j)
    return state


def _probabilities(state: np.ndarray, n: int) -> np.ndarray:
    return _as_tensor(np.abs(state) ** 2, n)


def expectation_z(state: np.ndarray, i: int) -> float:
    n = n_qubits_of(state)
    _check_index(i, n)
    p = np.moveaxis(_probabilities(state, n), i, 0)
    return float(p[0].sum() - p[1].sum())


def expectation_zz(state: np.ndarray, i: int, j: int) -> float:
    n = n_qubits_of(state)
    _check_index(i, n)
    _check_index(j, n)
    if i == j:
        raise QuantumError("ZZ correlator needs two distinct qubits")
    p = np.moveaxis(_probabilities(state, n), (i, j), (0, 1))
    return float(p[0, 0].sum() + p[1, 1].sum() - p[0, 1].sum() - p[1, 0].sum())


def z_features(state: np.ndarray) -> np.ndarray:
    """``[<Z_i> for all i] + [<Z_i Z_j> for i < j]`` computed in one pass."""
    n = n_qubits_of(state)
    p = _probabilities(state, n).reshape(2**n)
    # signs[k, q] = +1 if qubit q of basis index k is 0
    bits = (np.arange(2**n)[:, None] >> (n - 1 - np.arange(n))[None, :]) & 1
    signs = 1.0 - 2.0 * bits
    z = p @ signs
    iu, ju = np.triu_indices(n, k=1)
    zz = p @ (signs[:, iu] * signs[:, ju])
    return np.concatenate([z, zz])


def circuit_unitary(n_qubits: int, circuit) -> np.ndarray:
    """Matrix of ``circuit`` (a state -> state callable) on ``n_qubits``."""
    return circuit(np.eye(2**n_qubits, dtype=complex))


def entangling_unitary(n_qubits: int) -> np.ndarray:
    return circuit_unitary(n_qubits, entangling_layer)


# --------------------------------------------------------------------------
# density matrices and channels


@dataclass(frozen=True)
class KrausChannel:
    operators: tuple

    def __post_init__(self):
        ops = tuple(np.asarray(k, dtype=complex) for k in self.operators)
        if not ops:
            raise QuantumError("a channel needs at least one Kraus operator")
        shape = ops[0].shape
        if len(shape) != 2 or shape[0] != shape[1] or any(k.shape != shape for k in ops):
            raise QuantumError("Kraus operators must be square and share one shape")
        object.__setattr__(self, "operators", ops)

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]

    def completeness_error(self) -> float:
        total = sum(k.conj().T @ k for k in self.operators)
        return float(np.abs(total - np.eye(self.dim)).max())


def identity_channel(n_qubits: int) -> KrausChannel:
    return KrausChannel((np.eye(2**n_qubits, dtype=complex),))


def unitary_channel(u: np.ndarray) -> KrausChannel:
    return KrausChannel((u,))


def z_measurement_channel(n_qubits: int, measured: Iterable[int]) -> KrausChannel:
    """Non-selective projective Z measurement of the ``measured`` qubits.

    One diagonal projector per outcome string of the measured qubits, in
    binary order of the outcomes (qubit order as given, sorted ascending).
    """
    measured = sorted(set(measured))
    if not measured:
        raise QuantumError("measurement channel needs at least one measured qubit")
    for q in measured:
        _check_index(q, n_qubits)
    dim = 2**n_qubits
    bits = (np.arange(dim)[:, None] >> (n_qubits - 1 - np.arange(n_qubits))[None, :]) & 1
    outcome_of = bits[:, measured] @ (1 << np.arange(len(measured))[::-1])
    ops = []
    for outcome in range(2 ** len(measured)):
        ops.append(np.diag((outcome_of == outcome).astype(complex)))
    return KrausChannel(tuple(ops))


def maximally_mixed(n_qubits: int) -> np.ndarray:
    return np.eye(2**n_qubits, dtype=complex) / 2**n_qubits


def apply_channel(rho: np.ndarray, channel: KrausChannel) -> np.ndarray:
    rho = np.asarray(rho)
    if rho.shape != (channel.dim, channel.dim):
        raise QuantumError(
            f"density matrix shape {rho.shape} does not match channel dimension {channel.dim}"
        )
    return sum(k @ rho @ k.conj().T for k in channel.operators)


# --------------------------------------------------------------------------
# hardware-efficient ansatz


def hea_step_unitary(n_qubits: int, angles: Sequence[float], prefactor: float,
                     depth: int) -> np.ndarray:
    """Unitary of ``depth`` repetitions of [Ry(prefactor*angle) per qubit, CNOT layer].

    ``angles`` is layer-major: ``angles[d * n_qubits + q]`` drives qubit ``q``
    in repetition ``d``.
    """
    if n_qubits < 2:
        raise QuantumError("hardware-efficient ansatz needs at least 2 qubits")
    angles = np.asarray(angles, dtype=float)
    if angles.shape != (n_qubits * depth,):
        raise QuantumError(
            f"expected {n_qubits * depth} angles for {n_qubits} qubits x depth {depth}, "
            f"got {angles.size}"
        )
    if not np.isfinite(prefactor):
        raise QuantumError(f"prefactor must be finite, got {prefactor}")

    def circuit(state):
        for d in range(depth):
            for q in range(n_qubits):
                state = apply_1q(state, ry_gate(prefactor * angles[d * n_qubits + q]), q)
            state = entangling_layer(state)
        return state

    return circuit_unitary(n_qubits, circuit)
