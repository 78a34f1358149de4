"""Brute-force N-qubit quantum Fisher information and bound verification.

Everything here works on dense ``2^N x 2^N`` density matrices (``N <= 8``)
and is meant as an independent check on :mod:`ceqfi.cebound`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .cebound import GaugeHamiltonian, _as_vector, ce_bound_general
from .channels import KrausChannel
from .errors import DimensionMismatch, NotCovariant
from .linalg import MAX_DIM, PAULIS, check_hermitian, psd_sqrt
from .sweep import CI_RESOLUTION, SweepGrid, disk_directions, sweep_directions

MAX_QUBITS = 8
EIG_CUTOFF = 1e-12
STATE_TOL = 1e-12
COMMUTE_TOL = 1e-10
BOUND_SLACK = 1e-6


def _kron_all(ops: Sequence[np.ndarray]) -> np.ndarray:
    out = np.eye(1, dtype=complex)
    for op in ops:
        out = np.kron(out, op)
    return out


def local_operator(op: np.ndarray, site: int, N: int) -> np.ndarray:
    """``op`` acting on qubit ``site`` (0 is the most significant) of ``N`` qubits."""
    eye = np.eye(2, dtype=complex)
    return _kron_all([op if i == site else eye for i in range(N)])


def collective_pauli(a: int, N: int) -> np.ndarray:
    """``sum_i sigma_a^(i)`` for ``a`` in 1..3."""
    return sum(local_operator(PAULIS[a], i, N) for i in range(N))


def collective_operator(n, N: int) -> np.ndarray:
    """``sum_i (n . sigma)^(i)``."""
    n = _as_vector(n)
    return sum(n[a] * collective_pauli(a + 1, N) for a in range(3))


@dataclass(frozen=True, eq=False)
class NQubitState:
    """Density matrix of ``N`` qubits, validated on construction."""

    rho: np.ndarray

    def __post_init__(self):
        rho = np.array(self.rho, dtype=complex)
        dim = rho.shape[0] if rho.ndim == 2 else 0
        if rho.ndim != 2 or rho.shape[1] != dim or dim < 2 or dim & (dim - 1):
            raise DimensionMismatch(f"density matrix must be 2^N x 2^N, got {rho.shape}")
        if dim > MAX_DIM:
            raise ValueError(f"{int(math.log2(dim))} qubits exceed the oracle limit of {MAX_QUBITS}")
        check_hermitian(rho)
        rho = (rho + rho.conj().T) / 2
        tr = float(np.trace(rho).real)
        if abs(tr - 1) > STATE_TOL:
            raise ValueError(f"trace {tr!r} is not 1")
        if np.linalg.eigvalsh(rho)[0] < -STATE_TOL:
            raise ValueError("density matrix is not positive semidefinite")
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)

    @classmethod
    def pure(cls, psi) -> "NQubitState":
        psi = np.asarray(psi, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()))

    @property
    def dim(self) -> int:
        return self.rho.shape[0]

    @property
    def N(self) -> int:
        return self.dim.bit_length() - 1

    @cached_property
    def spectrum(self) -> tuple[np.ndarray, np.ndarray]:
        return np.linalg.eigh(self.rho)

    def derivative(self, generator: np.ndarray) -> np.ndarray:
        """``-i [H, rho]``."""
        return -1j * (generator @ self.rho - self.rho @ generator)

    def partial_trace(self, keep: Sequence[int]) -> "NQubitState":
        keep = sorted(keep)
        N = self.N
        t = self.rho.reshape((2,) * (2 * N))
        drop = [i for i in range(N) if i not in keep]
        for k, i in enumerate(sorted(drop, reverse=True)):
            n_now = N - k
            t = np.trace(t, axis1=i, axis2=i + n_now)
        d = 2 ** len(keep)
        return NQubitState(t.reshape(d, d))


def ghz(N: int) -> NQubitState:
    psi = np.zeros(2**N, dtype=complex)
    psi[0] = psi[-1] = 1 / math.sqrt(2)
    return NQubitState.pure(psi)


def plus(N: int) -> NQubitState:
    return NQubitState.pure(np.full(2**N, 2 ** (-N / 2), dtype=complex))


def haar_pure(N: int, rng: np.random.Generator) -> NQubitState:
    psi = rng.normal(size=2**N) + 1j * rng.normal(size=2**N)
    return NQubitState.pure(psi)


def random_mixed(N: int, rng: np.random.Generator, ancillas: int | None = None) -> NQubitState:
    """Reduced state of a Haar-random pure state on ``N + ancillas`` qubits (full rank when ``ancillas >= N``)."""
    M = N if ancillas is None else ancillas
    return haar_pure(N + M, rng).partial_trace(range(N))


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (g + g.conj().T) / 2


def _generator(s: NQubitState, generator) -> np.ndarray:
    g = np.asarray(generator)
    if g.ndim == 1:
        return collective_operator(g, s.N)
    g = check_hermitian(g)
    if g.shape != s.rho.shape:
        raise DimensionMismatch(f"generator has shape {g.shape}, state needs {s.rho.shape}")
    return g


def _weights(lam: np.ndarray) -> np.ndarray:
    """``2 (l_i - l_j)^2 / (l_i + l_j)``, zero where the denominator is below the cutoff."""
    lam = np.clip(lam, 0.0, None)
    s = lam[:, None] + lam[None, :]
    d = lam[:, None] - lam[None, :]
    w = np.zeros_like(s)
    mask = s >= EIG_CUTOFF
    w[mask] = 2 * d[mask] ** 2 / s[mask]
    return w


def qfi(s: NQubitState, generator) -> float:
    """QFI of ``rho`` for the unitary family ``exp(-i phi H)``.

    ``generator`` is either a direction (3-vector, meaning the collective
    ``sum_i n . sigma^(i)``) or a Hermitian matrix of the state's dimension.

    Raises:
        DimensionMismatch: if the generator does not fit the state.
    """
    H = _generator(s, generator)
    lam, v = s.spectrum
    Hb = v.conj().T @ H @ v
    return float(np.sum(_weights(lam) * np.abs(Hb) ** 2))


def collective_qfi_matrix(s: NQubitState) -> np.ndarray:
    """Real symmetric ``G`` with ``qfi(s, n) = n^T G n`` for collective generators."""
    lam, v = s.spectrum
    w = _weights(lam)
    blocks = [v.conj().T @ collective_pauli(a, s.N) @ v for a in (1, 2, 3)]
    G = np.empty((3, 3))
    for a in range(3):
        for b in range(a, 3):
            G[a, b] = G[b, a] = float(np.sum(w * (blocks[a] * blocks[b].conj()).real))
    return G


def variance(s: NQubitState, generator) -> float:
    H = _generator(s, generator)
    m1 = np.trace(s.rho @ H).real
    m2 = np.trace(s.rho @ H @ H).real
    return float(m2 - m1 * m1)


def apply_local_channel(s: NQubitState, c: KrausChannel) -> NQubitState:
    """Apply the single-qubit channel ``c`` independently to every qubit."""
    N = s.N
    k = c.physical_ops
    t = s.rho.reshape((2,) * (2 * N))
    letters = "abcdefghijklmnop"
    for i in range(N):
        rows, cols = list(letters[:N]), list(letters[N : 2 * N])
        src = "".join(rows + cols)
        rows_new = rows.copy()
        cols_new = cols.copy()
        rows_new[i], cols_new[i] = "X", "Y"
        dst = "".join(rows_new + cols_new)
        t = np.einsum(f"KX{rows[i]},{src},KY{cols[i]}->{dst}", k, t, k.conj(), optimize=True)
    out = t.reshape(s.dim, s.dim)
    return NQubitState((out + out.conj().T) / 2)


def uhlmann_fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Root fidelity ``tr sqrt(sqrt(rho) sigma sqrt(rho))``."""
    r = psd_sqrt(np.asarray(rho, dtype=complex))
    m = r @ np.asarray(sigma, dtype=complex) @ r
    w = np.linalg.eigvalsh((m + m.conj().T) / 2)
    return float(np.sum(np.sqrt(np.clip(w, 0.0, None))))


def fidelity_susceptibility_qfi(s: NQubitState, generator, phi: float = 1e-4) -> float:
    """``8 (1 - F(rho, rho_phi)) / phi^2`` with the root fidelity; approximates the QFI."""
    H = _generator(s, generator)
    w, v = np.linalg.eigh(H)
    u = (v * np.exp(-1j * phi * w)) @ v.conj().T
    rotated = u @ s.rho @ u.conj().T
    return 8 * (1 - uhlmann_fidelity(s.rho, rotated)) / phi**2


def effective_size(s: NQubitState, resolution: int = CI_RESOLUTION) -> float:
    """``max_n qfi(s, n) / (4N)`` over the stereographic direction grid."""
    G = collective_qfi_matrix(s)
    dirs = np.array(disk_directions(resolution))
    vals = np.einsum("pa,ab,pb->p", dirs, G, dirs)
    return float(vals.max() / (4 * s.N))


def max_effective_size(s: NQubitState) -> float:
    """Exact maximum over all directions, ``lambda_max(G) / (4N)``."""
    return float(np.linalg.eigvalsh(collective_qfi_matrix(s))[-1] / (4 * s.N))


@dataclass(frozen=True)
class DirectionCheck:
    """Oracle QFI versus the bound at one direction.

    ``margin = bound + slack - qfi``; a negative margin is a violation.
    """

    n: tuple[float, float, float]
    feasible: bool
    qfi: float
    bound: float
    slack: float = BOUND_SLACK

    @property
    def margin(self) -> float:
        return self.bound + self.slack - self.qfi


@dataclass(frozen=True)
class VerifyReport:
    N: int
    checks: tuple[DirectionCheck, ...]

    @property
    def worst(self) -> DirectionCheck:
        return min(self.checks, key=lambda c: c.margin)

    @property
    def worst_margin(self) -> float:
        return self.worst.margin

    @property
    def violations(self) -> int:
        return sum(c.margin < 0 for c in self.checks)

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def to_dict(self) -> dict:
        w = self.worst
        return {
            "N": self.N,
            "directions": len(self.checks),
            "feasible_directions": sum(c.feasible for c in self.checks),
            "worst_margin": w.margin,
            "worst_direction": list(w.n),
            "worst_qfi": w.qfi,
            "worst_bound": w.bound,
            "violations": self.violations,
            "passed": self.passed,
        }


def verify_ce_bound(
    s: NQubitState,
    c: KrausChannel,
    resolution: int = 21,
    *,
    grid: SweepGrid | None = None,
) -> VerifyReport:
    """Check the channel-extension bound against the oracle QFI of the noisy state.

    Feasible directions use ``4 N alpha_min(n)``; infeasible ones the general
    bound with ``h = 0``. ``grid`` may carry a precomputed sweep of ``c``.
    """
    N = s.N
    if N > MAX_QUBITS:
        raise ValueError(f"oracle supports at most {MAX_QUBITS} qubits")
    if grid is None:
        grid = sweep_directions(c, resolution, refine=False)
    G = collective_qfi_matrix(apply_local_channel(s, c))
    zero = GaugeHamiltonian.zeros(c.rank)
    checks = []
    for p in grid.points:
        n = np.array(p.n)
        f = float(n @ G @ n)
        if p.feasible:
            bound = 4 * N * p.alpha_min
        else:
            bound = ce_bound_general(c, zero, n, N)
        checks.append(DirectionCheck(p.n, p.feasible, f, bound))
    return VerifyReport(N, tuple(checks))


# covariant instruments


@dataclass(frozen=True, eq=False)
class Instrument:
    """Collection of CP maps on ``n_qubits`` qubits.

    ``outcomes[k]`` holds the Kraus operators of ``E_k``; ``discard[k]`` lists
    qubits traced out after that outcome.
    """

    outcomes: tuple[tuple[np.ndarray, ...], ...]
    n_qubits: int
    discard: tuple[tuple[int, ...], ...] = field(default=())

    def __post_init__(self):
        outs = tuple(tuple(np.asarray(k, dtype=complex) for k in ks) for ks in self.outcomes)
        dim = 2**self.n_qubits
        for ks in outs:
            for k in ks:
                if k.shape != (dim, dim):
                    raise DimensionMismatch(f"Kraus operator of shape {k.shape}, expected ({dim}, {dim})")
        total = sum(k.conj().T @ k for ks in outs for k in ks)
        dev = float(np.linalg.norm(total - np.eye(dim), 2))
        if dev > 1e-10:
            raise ValueError(f"instrument is not trace preserving (deviation {dev:.3e})")
        discard = self.discard or tuple(() for _ in outs)
        if len(discard) != len(outs):
            raise ValueError("discard list must match the number of outcomes")
        object.__setattr__(self, "outcomes", outs)
        object.__setattr__(self, "discard", tuple(tuple(d) for d in discard))

    def probabilities(self, s: NQubitState) -> np.ndarray:
        return np.array([sum(np.trace(k @ s.rho @ k.conj().T).real for k in ks) for ks in self.outcomes])


def identity_instrument(n_qubits: int) -> Instrument:
    return Instrument(((np.eye(2**n_qubits),),), n_qubits)


def random_covariant_instrument(
    n_qubits: int,
    rng: np.random.Generator,
    axis=(0.0, 0.0, 1.0),
    outcomes: int = 3,
    kraus_per_outcome: int = 2,
    discard: Sequence[Sequence[int]] | None = None,
) -> Instrument:
    """Random instrument whose Kraus operators commute with the collective ``A_tot``.

    Random Gaussian operators are projected onto the eigenspaces of ``A_tot``
    and jointly normalised by ``S^(-1/2)`` with ``S = sum K^dag K``; both steps
    preserve the block structure.
    """
    A = collective_operator(axis, n_qubits)
    w, v = np.linalg.eigh(A)
    labels = np.round(w).astype(int)
    projectors = [v[:, labels == m] @ v[:, labels == m].conj().T for m in np.unique(labels)]
    dim = 2**n_qubits
    raw = []
    for _ in range(outcomes * kraus_per_outcome):
        g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        raw.append(sum(P @ g @ P for P in projectors))
    S = sum(k.conj().T @ k for k in raw)
    sw, sv = np.linalg.eigh(S)
    inv_root = (sv / np.sqrt(sw)) @ sv.conj().T
    ops = [k @ inv_root for k in raw]
    grouped = tuple(tuple(ops[i * kraus_per_outcome : (i + 1) * kraus_per_outcome]) for i in range(outcomes))
    return Instrument(grouped, n_qubits, tuple(tuple(d) for d in discard) if discard else ())


def instrument_qfi_monotonicity(s: NQubitState, inst: Instrument, axis=(0.0, 0.0, 1.0)) -> tuple[float, float, bool]:
    """Average QFI after a covariant instrument versus the QFI before it.

    The observable after outcome ``k`` is ``A_tot`` restricted to the qubits
    that survive the partial trace.

    Returns:
        ``(mean_F, F0, mean_F <= F0 + 1e-8)``.

    Raises:
        NotCovariant: if a Kraus operator does not commute with ``A_tot``.
    """
    if s.N != inst.n_qubits:
        raise DimensionMismatch(f"instrument acts on {inst.n_qubits} qubits, state has {s.N}")
    n = _as_vector(axis)
    A = collective_operator(n, s.N)
    for ks in inst.outcomes:
        for k in ks:
            comm = float(np.linalg.norm(k @ A - A @ k, 2))
            if comm > COMMUTE_TOL:
                raise NotCovariant(f"Kraus operator fails to commute with A_tot (norm {comm:.3e})")
    F0 = qfi(s, A)
    mean = 0.0
    for ks, drop in zip(inst.outcomes, inst.discard):
        out = sum(k @ s.rho @ k.conj().T for k in ks)
        p = float(np.trace(out).real)
        if p < EIG_CUTOFF:
            continue
        post = NQubitState(_normalised(out / p))
        keep = [i for i in range(s.N) if i not in drop]
        if not keep:
            continue
        if drop:
            post = post.partial_trace(keep)
        mean += p * qfi(post, n)
    return mean, F0, bool(mean <= F0 + 1e-8)


def _normalised(m: np.ndarray) -> np.ndarray:
    m = (m + m.conj().T) / 2
    return m / np.trace(m).real

