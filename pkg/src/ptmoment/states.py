"""Generators for the state families used in the experiments."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ScaleError, ValidationError
from .linalg import BipartiteState, partial_transpose_matrix

MAX_ISING_QUBITS = 12
PRNG_NAME = f"numpy.random.Philox (numpy {np.__version__})"


# --- random states ---------------------------------------------------------------


def sample_seed(root_seed: int, index: int) -> np.random.SeedSequence:
    """Seed for sample `index` of a survey; independent of scheduling."""
    return np.random.SeedSequence(int(root_seed), spawn_key=(int(index),))


def _generator(seed) -> np.random.Generator:
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.Philox(seed))
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))


def ginibre(dim: int, seed) -> np.ndarray:
    """dim x dim matrix of independent standard complex Gaussians."""
    z = _generator(seed).standard_normal((2, dim, dim))
    return (z[0] + 1j * z[1]) / math.sqrt(2.0)


def hs_matrix(dim: int, seed) -> np.ndarray:
    g = ginibre(dim, seed)
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def sample_hs(d_a: int, d_b: int, seed) -> BipartiteState:
    """Hilbert-Schmidt random state rho = G G^dagger / Tr(G G^dagger)."""
    if d_a < 2 or d_b < 2:
        raise ValidationError(f"dimensions must be >= 2, got {d_a}x{d_b}")
    return BipartiteState(d_a, d_b, hs_matrix(d_a * d_b, seed))


def hs_batch(dim: int, root_seed: int, start: int, count: int) -> np.ndarray:
    """Stack of HS density matrices for sample indices start..start+count-1."""
    z = np.empty((count, 2, dim, dim))
    for i in range(count):
        z[i] = _generator(sample_seed(root_seed, start + i)).standard_normal((2, dim, dim))
    g = (z[:, 0] + 1j * z[:, 1]) / math.sqrt(2.0)
    rho = g @ np.conj(np.swapaxes(g, -1, -2))
    tr = np.trace(rho, axis1=-2, axis2=-1).real
    return rho / tr[:, None, None]


# --- simple fixtures -----------------------------------------------------------------


def bell_state() -> BipartiteState:
    """|Phi+><Phi+| with |Phi+> = (|00> + |11>)/sqrt(2)."""
    psi = np.zeros(4)
    psi[0] = psi[3] = 1.0 / math.sqrt(2.0)
    return BipartiteState(2, 2, np.outer(psi, psi))


def maximally_mixed(d_a: int, d_b: int) -> BipartiteState:
    d = d_a * d_b
    return BipartiteState(d_a, d_b, np.eye(d) / d)


def product_state(weights: Sequence[float], dim_a: int | None = None, dim_b: int | None = None) -> BipartiteState:
    """Diagonal separable state sum_ab x_ab |a><a| (x) |b><b|.

    Any nonnegative unit-sum vector is realized this way, and since the state
    is invariant under partial transposition its PT spectrum is `weights`.
    """
    x = np.asarray(weights, dtype=float).ravel()
    if np.any(x < -1e-12):
        raise ValidationError("weights must be nonnegative")
    if abs(x.sum() - 1.0) > 1e-9:
        raise ValidationError(f"weights must sum to 1, got {x.sum()!r}")
    if dim_a is None and dim_b is None:
        dim_a, dim_b = len(x), 1
    elif dim_b is None:
        dim_b = len(x) // dim_a
    elif dim_a is None:
        dim_a = len(x) // dim_b
    if dim_a * dim_b != len(x):
        raise ValidationError(f"{len(x)} weights do not fit a {dim_a}x{dim_b} system")
    return BipartiteState(dim_a, dim_b, np.diag(np.maximum(x, 0.0)))


def swap_operator(d: int) -> np.ndarray:
    V = np.zeros((d * d, d * d))
    for a in range(d):
        for b in range(d):
            V[b + d * a, a + d * b] = 1.0
    return V


def werner(d1: int) -> BipartiteState:
    """Antisymmetric Werner state (1 - V)/(d1 (d1 - 1))."""
    if d1 < 2:
        raise ValidationError(f"Werner state needs d1 >= 2, got {d1}")
    m = (np.eye(d1 * d1) - swap_operator(d1)) / (d1 * (d1 - 1))
    return BipartiteState(d1, d1, m)


# --- counterexample with p_3 >= p_2^2 but lambda_min + lambda_max < 0 ----------------


@dataclass(frozen=True)
class CounterexampleParams:
    base_dim: int = 3
    noise_weight: float | None = None  # lambda; default lambda_max / 2
    noise_blocks: int | None = None  # N; default smallest N meeting the quadratic


def _noise_blocks(lam: float, p2: float, p3: float) -> int:
    """Smallest N >= 1 with 2 lam^4 N^2 + (9 lam^3 - 10 p2 lam^2 + 3 p3 lam) N + (p3 - p2^2) >= 0."""
    a = 2.0 * lam**4
    b = 9.0 * lam**3 - 10.0 * p2 * lam**2 + 3.0 * p3 * lam
    c = p3 - p2 * p2
    disc = b * b - 4.0 * a * c
    root = (-b + math.sqrt(max(disc, 0.0))) / (2.0 * a)
    n = max(1, math.ceil(root - 1e-9))
    while a * n * n + b * n + c < 0:
        n += 1
    while n > 1 and a * (n - 1) ** 2 + b * (n - 1) + c >= 0:
        n -= 1
    return n


@dataclass(frozen=True)
class Counterexample:
    state: BipartiteState
    noise_weight: float
    noise_blocks: int
    base_p2: float
    base_p3: float


def build_counterexample(params: CounterexampleParams = CounterexampleParams()) -> Counterexample:
    """NPT state that passes p_3 >= p_2^2 yet has lambda_min + lambda_max < 0 under T_A.

    A Werner state on d1 x d1 is mixed with N product states of weight 2*lam
    and N of weight lam. The noise sits on diagonal product states |a b>
    outside the d1 x d1 block of a D x D system, which the partial transpose
    leaves untouched, so the PT spectrum is the base spectrum plus the noise
    weights. Appending a separate A2 B2 factor of size 2N + 1 would give the
    same spectrum at dimension d1^2 (2N + 1)^2, which is far too large.
    """
    d1 = params.base_dim
    if d1 < 3:
        raise ValidationError(f"base dimension must be >= 3, got {d1}")
    base = werner(d1)
    pt = np.linalg.eigvalsh(partial_transpose_matrix(base.matrix, d1, d1))
    lam_max = float(pt[-1])
    lam = lam_max / 2.0 if params.noise_weight is None else float(params.noise_weight)
    if not 0.0 < lam <= lam_max / 2.0 + 1e-15:
        raise ValidationError(f"noise weight must lie in (0, {lam_max / 2!r}], got {lam!r}")
    p2, p3 = float(np.sum(pt**2)), float(np.sum(pt**3))
    N = _noise_blocks(lam, p2, p3) if params.noise_blocks is None else int(params.noise_blocks)
    if N < 1:
        raise ValidationError("noise_blocks must be >= 1")
    D = max(d1, math.ceil(math.sqrt(d1 * d1 + 2 * N)))
    while D * D < d1 * d1 + 2 * N:
        D += 1
    X = np.zeros((D * D, D * D), dtype=complex)
    idx = np.array([b + D * a for a in range(d1) for b in range(d1)])
    X[np.ix_(idx, idx)] = base.matrix
    free = [b + D * a for a in range(D) for b in range(D) if a >= d1 or b >= d1]
    weights = [2.0 * lam] * N + [lam] * N
    for k, w in zip(free, weights):
        X[k, k] = w
    X /= np.trace(X).real
    return Counterexample(BipartiteState(D, D, X), lam, N, p2, p3)


# --- transverse-field Ising chain ------------------------------------------------------


@dataclass(frozen=True)
class IsingParams:
    """Periodic chain H = -J (sum Z_i Z_{i+1} + g sum X_i); sites are 1-based."""

    n_qubits: int
    coupling: float = 1.0
    field_ratio: float = 2.5
    inverse_temperature: float = 1.0
    cut: tuple[int, ...] = field(default=())

    def __post_init__(self):
        if self.n_qubits < 2:
            raise ValidationError(f"need at least 2 qubits, got {self.n_qubits}")
        if self.inverse_temperature < 0:
            raise ValidationError("inverse temperature must be nonnegative")
        cut = tuple(self.cut) if self.cut else tuple(range(1, self.n_qubits // 2 + 1))
        cut = tuple(sorted(set(int(c) for c in cut)))
        if not cut or len(cut) >= self.n_qubits or cut[0] < 1 or cut[-1] > self.n_qubits:
            raise ValidationError(f"cut {cut} must be a nonempty proper subset of 1..{self.n_qubits}")
        object.__setattr__(self, "cut", cut)


def ising_hamiltonian(n_qubits: int, coupling: float = 1.0, field_ratio: float = 2.5) -> np.ndarray:
    """Dense 2^N x 2^N Hamiltonian; site 1 is the most significant bit."""
    if n_qubits > MAX_ISING_QUBITS:
        raise ScaleError(f"dense Ising model limited to {MAX_ISING_QUBITS} qubits, got {n_qubits}")
    dim = 1 << n_qubits
    states = np.arange(dim)
    bits = (states[:, None] >> (n_qubits - 1 - np.arange(n_qubits))[None, :]) & 1
    z = 1 - 2 * bits
    zz = np.sum(z * np.roll(z, -1, axis=1), axis=1)  # periodic; N = 2 counts the bond twice
    H = np.diag(-coupling * zz.astype(float))
    for i in range(n_qubits):
        flip = states ^ (1 << (n_qubits - 1 - i))
        H[flip, states] += -coupling * field_ratio
    return H


def _reorder(rho: np.ndarray, n_qubits: int, cut: tuple[int, ...]) -> np.ndarray:
    a_sites = [c - 1 for c in cut]
    b_sites = [s for s in range(n_qubits) if s not in a_sites]
    perm = a_sites + b_sites
    t = rho.reshape((2,) * (2 * n_qubits))
    t = t.transpose(perm + [p + n_qubits for p in perm])
    return t.reshape(rho.shape)


class IsingSpectrum:
    """Diagonalize once, then produce Gibbs states at many temperatures."""

    def __init__(self, n_qubits: int, coupling: float = 1.0, field_ratio: float = 2.5):
        self.n_qubits = n_qubits
        self.energies, self.vectors = np.linalg.eigh(ising_hamiltonian(n_qubits, coupling, field_ratio))

    def gibbs(self, beta: float, cut: tuple[int, ...]) -> BipartiteState:
        w = np.exp(-beta * (self.energies - self.energies[0]))
        w /= w.sum()
        rho = (self.vectors * w) @ self.vectors.T
        rho = _reorder(rho, self.n_qubits, cut)
        dim_a = 1 << len(cut)
        return BipartiteState(dim_a, (1 << self.n_qubits) // dim_a, rho)


def ising_gibbs(params: IsingParams) -> BipartiteState:
    if params.n_qubits > MAX_ISING_QUBITS:
        raise ScaleError(f"dense Ising model limited to {MAX_ISING_QUBITS} qubits, got {params.n_qubits}")
    chain = IsingSpectrum(params.n_qubits, params.coupling, params.field_ratio)
    return chain.gibbs(params.inverse_temperature, params.cut)
