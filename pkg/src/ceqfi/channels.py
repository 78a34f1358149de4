"""Single-qubit Kraus channels: construction, validation, canonical form."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.optimize import least_squares

from .errors import DegenerateChannel, InvalidProbabilities, OutOfRange, ValidationError, WrongRank
from .linalg import PAULIS, pauli_coefficients

TP_TOL = 1e-12
RANK_TOL = 1e-10
ORTHO_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """Ordered Kraus operators ``k_0 .. k_r`` of a qubit channel.

    ``ops`` are expressed in the channel's working frame. ``frame`` is the
    output unitary ``F`` with ``ops = F @ physical_ops``; it is the identity
    unless :func:`canonicalize` had to rotate the output to make ``k_0``
    Hermitian. The physical action on states is always ``physical_ops``.
    """

    ops: np.ndarray
    family: str = "general"
    params: tuple = ()
    canonical: bool = False
    frame: np.ndarray = field(default_factory=lambda: np.eye(2, dtype=complex))

    def __post_init__(self):
        ops = np.array(self.ops, dtype=complex)
        if ops.ndim == 2:
            ops = ops[None]
        if ops.ndim != 3 or ops.shape[1:] != (2, 2) or len(ops) == 0:
            raise ValueError(f"Kraus operators must have shape (r+1, 2, 2), got {ops.shape}")
        ops.setflags(write=False)
        object.__setattr__(self, "ops", ops)
        frame = np.array(self.frame, dtype=complex)
        frame.setflags(write=False)
        object.__setattr__(self, "frame", frame)

    @property
    def rank(self) -> int:
        """Number of Kraus operators (``r + 1``)."""
        return len(self.ops)

    @property
    def weights(self) -> np.ndarray:
        """``d_i = tr(k_i^dag k_i)``."""
        return np.einsum("kij,kij->k", self.ops.conj(), self.ops).real

    @property
    def physical_ops(self) -> np.ndarray:
        return self.frame.conj().T @ self.ops

    def gram(self) -> np.ndarray:
        """Hilbert-Schmidt Gram matrix ``G_ij = tr(k_i^dag k_j)``."""
        return np.einsum("iab,jab->ij", self.ops.conj(), self.ops)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        k = self.physical_ops
        return np.einsum("kij,jl,kml->im", k, rho, k.conj())

    def __repr__(self):
        tag = f"{self.family}{self.params}" if self.params else self.family
        return f"KrausChannel({tag}, rank={self.rank}, canonical={self.canonical})"


@dataclass(frozen=True)
class ChannelReport:
    deviation: float
    rank: int
    orthogonal: bool
    canonical: bool

    @property
    def trace_preserving(self) -> bool:
        return self.deviation <= TP_TOL


@dataclass(frozen=True)
class Rank1Params:
    """Parameters of a two-Kraus channel in the frame ``k_1 = l1 X + i l2 Y``.

    ``rotation`` maps lab-frame Bloch vectors into that frame (rows are the
    new axes). ``pauli_case`` is ``"i"`` or ``"ii"`` when the channel is a
    rank-one Pauli channel, ``None`` otherwise.
    """

    lambda1: complex
    lambda2: float
    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    pauli_case: str | None = None

    @property
    def A(self) -> float:
        return 1.0 - abs(self.lambda1) ** 2 - self.lambda2**2

    @property
    def B(self) -> float:
        return 2.0 * self.lambda1.real * self.lambda2

    @property
    def interior(self) -> bool:
        """True when both diagonal entries of ``k_0`` are strictly positive."""
        return self.A + self.B > 0 and self.A - self.B > 0


def _check_probs(p: Sequence[float]) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or not 2 <= len(p) <= 4:
        raise InvalidProbabilities(f"expected 2 to 4 probabilities, got {p.tolist()}")
    if np.any(p < 0) or not np.all(np.isfinite(p)):
        raise InvalidProbabilities(f"probabilities must be non-negative, got {p.tolist()}")
    if abs(p.sum() - 1.0) > TP_TOL:
        raise InvalidProbabilities(f"probabilities sum to {p.sum():.15g}, not 1")
    if p[0] <= 0:
        raise InvalidProbabilities("p0 must be positive")
    return p


def make_pauli_channel(p: Sequence[float]) -> KrausChannel:
    """Pauli channel ``rho -> sum_i p_i sigma_i rho sigma_i``.

    Zero-probability terms are dropped, so the rank equals the number of
    non-zero ``p_i``. Short lists are padded with zeros.
    """
    p = _check_probs(p)
    p = np.pad(p, (0, 4 - len(p)))
    keep = np.flatnonzero(p > 0)
    ops = np.sqrt(p[keep])[:, None, None] * PAULIS[keep]
    return KrausChannel(ops, family="pauli", params=tuple(float(x) for x in p), canonical=True)


def make_depolarizing(p: float) -> KrausChannel:
    if not 0 <= p <= 1:
        raise OutOfRange(f"depolarizing parameter must lie in [0, 1], got {p}")
    return make_pauli_channel([1 - p, p / 3, p / 3, p / 3])


def make_amplitude_damping(p: float) -> KrausChannel:
    """Amplitude damping with decay probability ``0 < p < 1``.

    ``p = 0`` is the identity channel and must be built with
    :func:`make_pauli_channel`; ``p = 1`` leaves ``k_0`` singular.
    """
    if not 0 < p < 1:
        raise OutOfRange(f"amplitude damping requires 0 < p < 1, got {p}")
    k0 = np.diag([1.0, np.sqrt(1 - p)]).astype(complex)
    k1 = np.array([[0, np.sqrt(p)], [0, 0]], dtype=complex)
    return KrausChannel(np.stack([k0, k1]), family="amplitude_damping", params=(float(p),), canonical=True)


def random_channel(rank: int, rng: np.random.Generator) -> KrausChannel:
    """Channel with ``rank`` Kraus operators drawn from a Haar-random isometry."""
    x = rng.normal(size=(2 * rank, 2)) + 1j * rng.normal(size=(2 * rank, 2))
    q, _ = np.linalg.qr(x)
    return KrausChannel(q.reshape(rank, 2, 2))


def trace_deviation(ops: np.ndarray) -> float:
    s = np.einsum("kji,kjl->il", np.conj(ops), ops)
    return float(np.linalg.norm(s - np.eye(2), 2))


def detect_rank(ops: np.ndarray) -> int:
    g = np.einsum("iab,jab->ij", np.conj(ops), ops)
    s = np.linalg.svd(g, compute_uv=False)
    return int(np.sum(s > RANK_TOL * max(1.0, s[0])))


def _is_orthogonal(c: KrausChannel) -> bool:
    g = c.gram()
    off = g - np.diag(np.diag(g))
    return bool(np.max(np.abs(off), initial=0.0) <= ORTHO_TOL)


def _is_psd_hermitian(m: np.ndarray, tol: float = 1e-12) -> bool:
    if np.max(np.abs(m - m.conj().T)) > tol:
        return False
    return bool(np.linalg.eigvalsh((m + m.conj().T) / 2)[0] >= -tol)


def _is_canonical(c: KrausChannel) -> bool:
    if not (_is_orthogonal(c) and _is_psd_hermitian(c.ops[0], 1e-10)):
        return False
    if c.rank == 2 and abs(np.trace(c.ops[1])) > 1e-10:
        return False
    return True


def validate_channel(c: KrausChannel) -> ChannelReport:
    """Diagnose trace preservation, rank and Hilbert-Schmidt orthogonality."""
    return ChannelReport(
        deviation=trace_deviation(c.ops),
        rank=detect_rank(c.ops),
        orthogonal=_is_orthogonal(c),
        canonical=_is_canonical(c),
    )


def _phase_fix(u: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude entry of each column real and positive."""
    idx = np.argmax(np.abs(u), axis=0)
    ph = u[idx, np.arange(u.shape[1])]
    return u * (np.abs(ph) / ph)


def _hermitize(ops: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Left-multiply by ``F = W V^dag`` from ``k_0 = V S W^dag`` so ``k_0`` is PSD."""
    if _is_psd_hermitian(ops[0]):
        return ops, np.eye(2, dtype=complex)
    v, _, wh = np.linalg.svd(ops[0])
    f = wh.conj().T @ v.conj().T
    ops = f @ ops
    ops[0] = (ops[0] + ops[0].conj().T) / 2
    return ops, f


def _mix_pair(k0, k1, theta, phi):
    a, b = np.cos(theta), np.exp(1j * phi) * np.sin(theta)
    return a * k0 + b * k1, -np.conj(b) * k0 + a * k1


def _eliminate_identity_component(ops: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Mix a Kraus pair and re-hermitize ``k_0`` until ``tr k_1 = 0``.

    Returns the new operators and the output unitary that was applied.
    """
    k0, k1 = ops

    def mixed(x):
        m0, m1 = _mix_pair(k0, k1, *x)
        pair, f = _hermitize(np.stack([m0, m1]))
        return pair, f

    def resid(x):
        pair, _ = mixed(x)
        t = np.trace(pair[1])
        return [t.real, t.imag]

    best = None
    for theta0 in (0.0, 0.4, -0.4, 0.8, -0.8, 1.2):
        for phi0 in (0.0, 1.5, 3.0, -1.5):
            sol = least_squares(resid, [theta0, phi0], xtol=1e-15, ftol=1e-15, gtol=1e-15)
            if best is None or sol.cost < best.cost:
                best = sol
            if best.cost < 1e-28:
                break
        if best.cost < 1e-28:
            break
    if np.sqrt(2 * best.cost) > 1e-11:
        raise DegenerateChannel("could not remove the identity component of the noise operator")
    pair, f = mixed(best.x)
    # the residual trace is round-off; strip it so k_1 is exactly traceless
    pair[1] = pair[1] - np.trace(pair[1]) / 2 * np.eye(2)
    return pair, f


def canonicalize(c: KrausChannel) -> KrausChannel:
    """Bring a channel to canonical Kraus form.

    The steps are: Hilbert-Schmidt orthogonalisation of the Kraus set via the
    Gram matrix (a unitary on the Kraus index), a global output unitary that
    makes ``k_0`` positive semidefinite, and for two-Kraus channels a further
    Kraus mixing that removes the identity component from ``k_1``. Output
    unitaries are accumulated in ``frame``, so :meth:`KrausChannel.apply` is
    unchanged.

    Raises:
        DegenerateChannel: if the Kraus operators are linearly dependent.
    """
    ops = np.array(c.ops)
    frame = np.array(c.frame)
    g = c.gram()
    w, u = np.linalg.eigh(g)
    if w[0] <= RANK_TOL * max(1.0, w[-1]):
        raise DegenerateChannel(
            f"Kraus Gram matrix is singular (smallest eigenvalue {w[0]:.3e}); "
            f"channel has rank {detect_rank(ops)}, not {c.rank}"
        )
    if not _is_orthogonal(c):
        u = _phase_fix(u[:, ::-1])
        ops = np.einsum("ia,ijk->ajk", u, ops)
    ops, f = _hermitize(ops)
    frame = f @ frame
    if len(ops) == 2 and abs(np.trace(ops[1])) > 1e-12:
        ops, f = _eliminate_identity_component(ops)
        frame = f @ frame
    return replace(c, ops=ops, frame=frame, canonical=True)


def rank1_params(c: KrausChannel) -> Rank1Params:
    """Parameters ``lambda1``, ``lambda2``, ``A``, ``B`` of a two-Kraus channel.

    The noise operator ``k_1 = nu . sigma`` (complex ``nu``) is rotated so the
    real part of ``nu`` lies on the first axis and the perpendicular part of
    the imaginary part on the second. If the real part vanishes its
    direction is free; it is then chosen perpendicular to the imaginary part.

    Raises:
        WrongRank: if the channel does not have exactly two Kraus operators.
    """
    if c.rank != 2:
        raise WrongRank(f"rank1_params needs two Kraus operators, channel has {c.rank}")
    if not c.canonical:
        c = canonicalize(c)
    coeffs = pauli_coefficients(c.ops[1])
    if abs(coeffs[0]) > 1e-9:
        raise WrongRank("noise operator still has an identity component; channel is not canonical")
    nu = coeffs[1:]
    re, im = nu.real, nu.imag
    tol = 1e-12
    if np.linalg.norm(re) > tol:
        e1 = re / np.linalg.norm(re)
        perp = im - (im @ e1) * e1
    elif np.linalg.norm(im) > tol:
        perp = im
        e1 = _any_perpendicular(im)
    else:
        raise WrongRank("noise operator vanishes")
    if np.linalg.norm(perp) > tol:
        e2 = perp / np.linalg.norm(perp)
    else:
        e2 = _any_perpendicular(e1)
    e3 = np.cross(e1, e2)
    rot = np.vstack([e1, e2, e3])
    lam1 = complex(np.linalg.norm(re), im @ e1)
    lam2 = float(np.linalg.norm(perp))
    case = None
    if abs(lam1.real) <= 1e-12:
        case = "i"
    elif lam2 <= 1e-12:
        case = "ii"
    return Rank1Params(lam1, lam2, rot, case)


def _any_perpendicular(v: np.ndarray) -> np.ndarray:
    v = v / np.linalg.norm(v)
    trial = np.eye(3)[np.argmin(np.abs(v))]
    w = trial - (trial @ v) * v
    return w / np.linalg.norm(w)


def channel_from_kraus(ops, *, tol: float = 1e-10) -> KrausChannel:
    """Build a general channel from raw Kraus matrices and canonicalize it.

    Raises:
        ValidationError: if ``||sum k^dag k - 1||`` exceeds ``tol``.
    """
    c = KrausChannel(np.asarray(ops, dtype=complex))
    dev = trace_deviation(c.ops)
    if dev > tol:
        raise ValidationError(f"Kraus operators are not trace preserving: ||sum k^dag k - 1|| = {dev:.3e}")
    return canonicalize(c)


def choi_matrix(c: KrausChannel) -> np.ndarray:
    k = c.physical_ops
    vecs = k.reshape(len(k), 4)
    return np.einsum("ka,kb->ab", vecs, vecs.conj())


def same_action(c1: KrausChannel, c2: KrausChannel, tol: float = 1e-10) -> bool:
    return bool(np.max(np.abs(choi_matrix(c1) - choi_matrix(c2))) <= tol)


BASIS_STATES = np.array(
    [
        [[1, 0], [0, 0]],
        [[0, 0], [0, 1]],
        [[0.5, 0.5], [0.5, 0.5]],
        [[0.5, -0.5j], [0.5j, 0.5]],
    ],
    dtype=complex,
)
