"""Classical echo state networks: plain, annulus-spectrum and onion.

Reservoir update::

    X_{t+1} = tanh(W_in [1, P_t, h_t, t_t]^T + W X_t)

The onion variant makes ``W`` block diagonal, each block's eigenvalues
confined to its own ring ``eps0 <= |lambda| <= eps1``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.linalg

from .linalg import spectral_radius
from .qreservoir import closed_loop

DEFAULT_SPECTRAL_RADIUS = 0.9
DEFAULT_INPUT_SCALE = 0.5
N_ESN_INPUTS = 4  # bias, pitting, humidity, temperature


class EsnError(ValueError):
    pass


@dataclass(frozen=True)
class AnnulusBlockConfig:
    size: int
    eps0: float
    eps1: float

    def __post_init__(self):
        if self.size < 1:
            raise EsnError(f"block size must be >= 1, got {self.size}")
        if not 0 <= self.eps0 <= self.eps1:
            raise EsnError(f"need 0 <= eps0 <= eps1, got [{self.eps0}, {self.eps1}]")
        if self.eps1 >= 1:
            raise EsnError(f"eps1 = {self.eps1} >= 1 breaks the echo state property")


@dataclass(frozen=True)
class EsnConfig:
    """Classical reservoir settings.

    With ``blocks`` set the recurrent matrix is an onion of annulus blocks and
    ``size``/``spectral_radius_target`` are ignored for its construction.
    """

    size: int
    spectral_radius_target: float = DEFAULT_SPECTRAL_RADIUS
    input_scale: float = DEFAULT_INPUT_SCALE
    seed: int = 0
    blocks: tuple = ()

    def __post_init__(self):
        blocks = tuple(
            b if isinstance(b, AnnulusBlockConfig) else AnnulusBlockConfig(**b)
            for b in self.blocks
        )
        object.__setattr__(self, "blocks", blocks)
        if blocks and self.size != sum(b.size for b in blocks):
            raise EsnError("size must equal the sum of block sizes")
        if self.size < 0:
            raise EsnError(f"reservoir size must be >= 0, got {self.size}")
        if not 0 < self.spectral_radius_target < 1:
            raise EsnError(
                f"spectral radius target must lie in (0, 1), got {self.spectral_radius_target}"
            )

    def to_dict(self) -> dict:
        d = asdict(self)
        d["blocks"] = [asdict(b) for b in self.blocks]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "EsnConfig":
        return cls(**d)


def generate_esn_matrix(config: EsnConfig) -> np.ndarray:
    """Seeded Gaussian matrix rescaled to the target spectral radius."""
    if config.size < 1:
        raise EsnError("cannot draw a reservoir matrix of size 0")
    for attempt in range(3):
        rng = np.random.default_rng([config.seed, attempt])
        w = rng.standard_normal((config.size, config.size))
        rho = spectral_radius(w)
        if rho > 1e-12:
            return w * (config.spectral_radius_target / rho)
    raise EsnError("reservoir draw was degenerate (zero spectral radius) 3 times")


def random_orthogonal(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed orthogonal matrix (QR with sign-fixed R diagonal)."""
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return q * signs


def generate_annulus_matrix(config: AnnulusBlockConfig, seed) -> np.ndarray:
    """Real matrix whose eigenvalue moduli all lie in ``[eps0, eps1]``.

    Built from 2x2 rotation-scaling blocks (plus one real eigenvalue for odd
    sizes) and conjugated by a random orthogonal matrix, which keeps the
    spectrum exactly while mixing the coordinates.
    """
    rng = np.random.default_rng(seed)
    n = config.size
    canon = np.zeros((n, n))
    for k in range(n // 2):
        r = rng.uniform(config.eps0, config.eps1)
        phi = rng.uniform(0.0, 2 * np.pi)
        c, s = r * np.cos(phi), r * np.sin(phi)
        canon[2 * k:2 * k + 2, 2 * k:2 * k + 2] = [[c, -s], [s, c]]
    if n % 2:
        r = rng.uniform(config.eps0, config.eps1)
        canon[-1, -1] = r if rng.random() < 0.5 else -r
    q = random_orthogonal(n, rng)
    return q @ canon @ q.T


def onion_esn_matrix(blocks, seed) -> np.ndarray:
    """Block-diagonal assembly of annulus blocks, one child seed per block."""
    blocks = list(blocks)
    if not blocks:
        raise EsnError("onion reservoir needs at least one block")
    seqs = np.random.SeedSequence(seed).spawn(len(blocks))
    return scipy.linalg.block_diag(
        *[generate_annulus_matrix(b, s) for b, s in zip(blocks, seqs)]
    )


def default_onion_blocks(size: int, rings=((0.1, 0.4), (0.4, 0.7), (0.7, 0.95))):
    """Split ``size`` units as evenly as possible across the given rings."""
    k = len(rings)
    sizes = [size // k + (1 if i < size % k else 0) for i in range(k)]
    return tuple(
        AnnulusBlockConfig(s, lo, hi) for s, (lo, hi) in zip(sizes, rings) if s > 0
    )


@dataclass
class EchoStateNetwork:
    w_in: np.ndarray
    w: np.ndarray
    config: EsnConfig | None = None

    @classmethod
    def from_config(cls, config: EsnConfig) -> "EchoStateNetwork":
        if config.size == 0:
            return cls(np.zeros((0, N_ESN_INPUTS)), np.zeros((0, 0)), config)
        if config.blocks:
            w = onion_esn_matrix(config.blocks, config.seed)
        else:
            w = generate_esn_matrix(config)
        rng = np.random.default_rng([config.seed, 1_000_003])
        w_in = rng.uniform(-config.input_scale, config.input_scale, (config.size, N_ESN_INPUTS))
        return cls(w_in, w, config)

    @property
    def size(self) -> int:
        return self.w.shape[0]

    def initial_state(self) -> np.ndarray:
        return np.zeros(self.size)

    def step(self, state, p, h, t) -> np.ndarray:
        return esn_step(self.w_in, self.w, state, p, h, t)


def esn_step(w_in, w, state, p: float, h: float, t: float) -> np.ndarray:
    w_in = np.asarray(w_in, dtype=float)
    w = np.asarray(w, dtype=float)
    state = np.asarray(state, dtype=float)
    n = state.shape[0]
    if w_in.shape != (n, N_ESN_INPUTS) or w.shape != (n, n):
        raise EsnError(
            f"shape mismatch: W_in {w_in.shape}, W {w.shape}, state ({n},)"
        )
    return np.tanh(w_in @ np.array([1.0, p, h, t]) + w @ state)


def esn_driver(esn: EchoStateNetwork, with_inputs: bool = True):
    """Stateful ``step(x, h, t) -> features`` for an echo state network.

    Features are ``[1, P, h, t, X_{t+1}]``; with ``with_inputs=False`` only the
    reservoir state is returned (used inside the hybrid model).
    """
    state = esn.initial_state()

    def step(x, h, t):
        nonlocal state
        state = esn.step(state, x, h, t)
        if with_inputs:
            return np.concatenate([[1.0, x, h, t], state])
        return state.copy()

    return step


def run_esn_teacher_forced(esn: EchoStateNetwork, pitting, humidity, temperature):
    """Rows ``[1, P_d, h_d, t_d, X_{d+1}]`` with target ``P_{d+1}``."""
    p = np.asarray(pitting, dtype=float)
    if p.size < 2:
        raise EsnError(f"series needs at least 2 days, got {p.size}")
    step = esn_driver(esn)
    rows = [step(p[d], humidity[d], temperature[d]) for d in range(p.size - 1)]
    return np.array(rows), p[1:].copy()


def run_esn_closed_loop(esn: EchoStateNetwork, readout, observed, humidity, temperature):
    return closed_loop(esn_driver(esn), readout, observed, humidity, temperature)
