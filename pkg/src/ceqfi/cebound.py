"""Channel-extension bound: alpha/beta, beta = 0 feasibility and min ||alpha||.

For a canonical channel ``k`` and a collective direction ``n`` the single-probe
quantities are

    alpha = k^dag (h + H)^2 k,    beta = -k^dag (h + H) k,    H = n . sigma,

with ``h`` the Hermitian gauge Hamiltonian acting on the Kraus index. When
``beta = 0`` is attainable the QFI of ``N`` noisy probes is at most
``4 N min ||alpha||`` and the minimum is the effective-size bound.

The minimisation over the affine set ``{h : beta(h) = 0}`` is solved through
its Lagrangian dual over the Bloch ball: for a density matrix ``rho`` the
inner problem ``min_h tr(rho alpha(h))`` is an unconstrained least-squares
problem, and the dual function is concave in the three Bloch coordinates.
Every primal iterate is a valid upper bound and every dual iterate a lower
bound on ``min ||alpha||``, so the reported gap certifies the result.

Newton steps on the dual converge quickly when the optimal Bloch vector is
interior. When it sits on the sphere the inner problem can be singular
there, and the solver falls back to Newton continuation on a log-sum-exp
smoothing of ``lambda_max(alpha)``, whose softmax state supplies the
certificate.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .channels import KrausChannel, Rank1Params, canonicalize
from .errors import DimensionMismatch, OutOfDomain, SolverStall
from .linalg import PAULIS, op_norm, pauli_coefficients, sigma_n

RANK_TOL = 1e-10
GAP_TOL = 1e-9
MAX_ITER = 200


@dataclass(frozen=True)
class Direction:
    """Unit vector ``n`` defining the local observable ``H = n . sigma``."""

    n: tuple[float, float, float]

    def __post_init__(self):
        v = np.asarray(self.n, dtype=float)
        if v.shape != (3,):
            raise ValueError(f"direction needs three components, got {v.shape}")
        if abs(np.linalg.norm(v) - 1.0) > 1e-12:
            raise ValueError(f"direction must be a unit vector, |n| = {np.linalg.norm(v)!r}")
        object.__setattr__(self, "n", tuple(float(x) for x in v))

    @classmethod
    def of(cls, v) -> "Direction":
        """Normalise an arbitrary non-zero 3-vector."""
        if isinstance(v, Direction):
            return v
        v = np.asarray(v, dtype=float)
        norm = np.linalg.norm(v)
        if v.shape != (3,) or norm == 0 or not np.isfinite(norm):
            raise ValueError(f"cannot build a direction from {v!r}")
        return cls(tuple(v / norm))

    @property
    def vector(self) -> np.ndarray:
        return np.array(self.n)

    @property
    def H(self) -> np.ndarray:
        return sigma_n(self.n)

    def u(self, phi: float) -> np.ndarray:
        """Generated evolution ``exp(-i phi H)``."""
        return math.cos(phi) * np.eye(2) - 1j * math.sin(phi) * self.H


def _as_vector(n) -> np.ndarray:
    return Direction.of(n).vector


@dataclass(frozen=True, eq=False)
class GaugeHamiltonian:
    """Hermitian ``(r+1) x (r+1)`` matrix mixing the Kraus operators."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim == 0:
            m = m.reshape(1, 1)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionMismatch(f"gauge Hamiltonian must be square, got {m.shape}")
        if np.max(np.abs(m - m.conj().T)) > 1e-12 * max(1.0, np.max(np.abs(m))):
            raise ValueError("gauge Hamiltonian must be Hermitian")
        m = (m + m.conj().T) / 2
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def zeros(cls, dim: int) -> "GaugeHamiltonian":
        return cls(np.zeros((dim, dim)))

    @classmethod
    def from_params(cls, x) -> "GaugeHamiltonian":
        x = np.asarray(x, dtype=float)
        d = math.isqrt(len(x))
        if d * d != len(x):
            raise DimensionMismatch(f"{len(x)} real parameters do not describe a square matrix")
        return cls(np.einsum("p,pij->ij", x, hermitian_basis(d)))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def params(self) -> np.ndarray:
        """Real parameters: diagonal, then Re/Im of the upper triangle row by row."""
        d = self.dim
        out = list(self.matrix.diagonal().real)
        for i in range(d):
            for j in range(i + 1, d):
                out += [self.matrix[i, j].real, self.matrix[i, j].imag]
        return np.array(out)

    @property
    def h00(self) -> float:
        return float(self.matrix[0, 0].real)

    @property
    def hvec(self) -> np.ndarray:
        return self.matrix[1:, 0]

    @property
    def block(self) -> np.ndarray:
        return self.matrix[1:, 1:]


def hermitian_basis(d: int) -> np.ndarray:
    """Basis of ``d x d`` Hermitian matrices matching :attr:`GaugeHamiltonian.params`."""
    basis = []
    for i in range(d):
        e = np.zeros((d, d), dtype=complex)
        e[i, i] = 1
        basis.append(e)
    for i in range(d):
        for j in range(i + 1, d):
            re = np.zeros((d, d), dtype=complex)
            re[i, j] = re[j, i] = 1
            im = np.zeros((d, d), dtype=complex)
            im[i, j], im[j, i] = 1j, -1j
            basis += [re, im]
    return np.array(basis)


def _gauge_matrix(h, dim: int) -> np.ndarray:
    if isinstance(h, GaugeHamiltonian):
        m = h.matrix
    else:
        m = GaugeHamiltonian(h).matrix
    if m.shape != (dim, dim):
        raise DimensionMismatch(f"gauge Hamiltonian has shape {m.shape}, channel needs ({dim}, {dim})")
    return m


def compute_alpha_beta(c: KrausChannel, h, n) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(alpha, beta)`` for gauge ``h`` and direction ``n``.

    The gauge acts on the Kraus index of ``c.ops``. Output-frame rotations
    recorded by canonicalisation cancel in both quantities, so ``n`` is the
    lab-frame direction.

    Raises:
        DimensionMismatch: if ``h`` does not match the number of Kraus operators.
    """
    k = c.physical_ops
    hm = _gauge_matrix(h, len(k))
    H = sigma_n(_as_vector(n))
    m = np.einsum("ij,jab->iab", hm, k) + H @ k
    alpha = np.einsum("iba,ibc->ac", m.conj(), m)
    beta = -np.einsum("iba,ibc->ac", m.conj(), k)
    return (alpha + alpha.conj().T) / 2, (beta + beta.conj().T) / 2


def ce_bound_general(c: KrausChannel, h, n, N: int) -> float:
    """``4 (N ||alpha|| + N (N-1) ||beta||^2)``, valid for any gauge ``h``."""
    if N < 1:
        raise ValueError("N must be at least 1")
    alpha, beta = compute_alpha_beta(c, h, n)
    return 4.0 * (N * op_norm(alpha) + N * (N - 1) * op_norm(beta) ** 2)


@dataclass(frozen=True, eq=False)
class BetaSystem:
    """Real linear system ``S x = c`` whose solutions give ``beta(h(x)) = 0``.

    Rows are the Pauli components of beta, columns the real gauge parameters.
    """

    S: np.ndarray
    c: np.ndarray
    rank_S: int
    rank_augmented: int
    x0: np.ndarray | None
    null_basis: np.ndarray

    @property
    def consistent(self) -> bool:
        return self.rank_S == self.rank_augmented

    def solution(self, z=None) -> GaugeHamiltonian:
        if not self.consistent:
            raise ValueError("inconsistent system has no solution")
        x = self.x0 if z is None else self.x0 + self.null_basis @ np.asarray(z, dtype=float)
        return GaugeHamiltonian.from_params(x)


def _numerical_rank(m: np.ndarray, tol: float = RANK_TOL) -> int:
    s = np.linalg.svd(m, compute_uv=False)
    if len(s) == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > tol * s[0]))


class GaugeModel:
    """Per-channel precomputation shared by every direction.

    With ``y = [x, n]`` (gauge parameters then direction), the stacked
    derivative ``(h + H) k`` is linear in ``y`` and each Pauli coefficient of
    alpha is a real quadratic form ``a_mu = y^T T_mu y``. Beta is linear:
    ``pauli(beta) = -(S x + C n)``.
    """

    def __init__(self, channel: KrausChannel):
        if not channel.canonical:
            channel = canonicalize(channel)
        self.channel = channel
        k = channel.physical_ops
        self.dim = d = len(k)
        self.basis = hermitian_basis(d)
        self.nh = len(self.basis)
        dh = np.einsum("pij,jab->piab", self.basis, k)
        dn = np.einsum("lab,ibc->liac", PAULIS[1:], k)
        blocks = np.concatenate([dh, dn])
        self.S = pauli_coefficients(np.einsum("piba,ibc->pac", dh.conj(), k)).real.T
        self.C = pauli_coefficients(np.einsum("iba,lbc,icd->lad", k.conj(), PAULIS[1:], k)).real.T
        gram = np.einsum("qiba,ribc,mca->mqr", blocks.conj(), blocks, PAULIS) / 2
        self.T = gram.real
        self.T = (self.T + self.T.transpose(0, 2, 1)) / 2

        u, s, vt = np.linalg.svd(self.S)
        self.rank = int(np.sum(s > RANK_TOL * s[0])) if s.size and s[0] > 0 else 0
        r = self.rank
        self._range = u[:, :r]
        self.pinv = (vt[:r].T / s[:r]) @ u[:, :r].T
        self.null = vt[r:].T
        # y = J n + E z on the feasible affine set
        self.J = np.vstack([-self.pinv @ self.C, np.eye(3)])
        self.E = np.vstack([self.null, np.zeros((3, self.null.shape[1]))])
        self.Q = np.einsum("ya,myw,wb->mab", self.E, self.T, self.E)
        self.L = np.einsum("ya,myw,wb->mab", self.E, self.T, self.J)
        self.R = np.einsum("ya,myw,wb->mab", self.J, self.T, self.J)

    @property
    def m(self) -> int:
        """Number of free parameters left after imposing beta = 0."""
        return self.null.shape[1]

    @cached_property
    def feasible_subspace(self) -> np.ndarray:
        """Orthonormal basis (columns) of directions for which beta = 0 is attainable."""
        resid = self.C - self._range @ (self._range.T @ self.C)
        u, s, vt = np.linalg.svd(resid)
        scale = max(1.0, np.linalg.norm(self.C, 2))
        k = int(np.sum(s > RANK_TOL * scale))
        return vt[k:].T

    def beta_system(self, n) -> BetaSystem:
        n = _as_vector(n)
        c = -self.C @ n
        rank_aug = _numerical_rank(np.column_stack([self.S, c]))
        x0 = self.pinv @ c if rank_aug == self.rank else None
        return BetaSystem(self.S.copy(), c, self.rank, rank_aug, x0, self.null.copy())

    def is_feasible(self, n) -> bool:
        n = _as_vector(n)
        c = -self.C @ n
        return _numerical_rank(np.column_stack([self.S, c])) == self.rank

    def quadratic(self, n) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(Q, q, s)`` with ``a_mu(z) = z Q_mu z + 2 q_mu z + s_mu``."""
        n = _as_vector(n)
        return self.Q, self.L @ n, np.einsum("a,mab,b->m", n, self.R, n)

    def gauge(self, n, z) -> GaugeHamiltonian:
        x = -self.pinv @ self.C @ _as_vector(n) + self.null @ z
        return GaugeHamiltonian.from_params(x)


@dataclass(frozen=True, eq=False)
class BoundResult:
    """Outcome of minimising ``||alpha||`` over gauges with ``beta = 0``.

    ``alpha_min`` is attained by ``h`` (an upper bound in all cases);
    ``dual_bound`` is a certified lower bound on the true minimum.
    """

    feasible: bool
    direction: tuple[float, float, float]
    alpha_min: float | None = None
    h: GaugeHamiltonian | None = None
    dual_bound: float | None = None
    converged: bool = True
    iterations: int = 0

    @property
    def n_eff_bound(self) -> float | None:
        return self.alpha_min

    @property
    def gap(self) -> float | None:
        if self.alpha_min is None or self.dual_bound is None:
            return None
        return self.alpha_min - self.dual_bound

    def qfi_bound(self, N: int) -> float | None:
        """Linear QFI bound ``4 N ||alpha||_min`` for ``N`` probes."""
        return None if self.alpha_min is None else 4.0 * N * self.alpha_min

    def to_dict(self, N: int | None = None) -> dict:
        out = {
            "feasible": self.feasible,
            "direction": list(self.direction),
            "alpha_min": self.alpha_min,
            "n_eff_bound": self.n_eff_bound,
            "dual_bound": self.dual_bound,
            "converged": self.converged,
            "iterations": self.iterations,
        }
        if self.h is not None:
            out["h"] = [[[v.real, v.imag] for v in row] for row in self.h.matrix]
        if N is not None and self.feasible:
            out["N"] = N
            out["qfi_bound"] = self.qfi_bound(N)
        return out


def _alpha_coeffs(Q, q, s, z):
    return np.einsum("a,mab,b->m", z, Q, z) + 2 * q @ z + s


def _primal_value(a) -> float:
    return float(a[0] + np.linalg.norm(a[1:]))


class _Inner:
    """Dual function pieces at a Bloch vector ``r``.

    ``g = min_z tr(rho_r alpha(z))`` with minimiser ``z``; ``a`` are the Pauli
    coefficients of alpha at ``z`` (so ``a[1:]`` is the dual gradient) and
    ``hess`` the dual Hessian, meaningful only where the inner problem is
    strictly convex.
    """

    __slots__ = ("z", "g", "a", "hess", "smooth")

    def __init__(self, Q, q, s, r):
        Qr = Q[0] + np.einsum("i,iab->ab", r, Q[1:])
        qr = q[0] + r @ q[1:]
        sr = s[0] + r @ s[1:]
        try:
            cho = np.linalg.cholesky(Qr)
            self.smooth = True

            def solve(b):
                return np.linalg.solve(cho.conj().T, np.linalg.solve(cho, b))

        except np.linalg.LinAlgError:
            pinv = np.linalg.pinv(Qr, rcond=1e-12, hermitian=True)
            self.smooth = False

            def solve(b):
                return pinv @ b

        z = -solve(qr)
        self.z = z
        self.g = float(sr + qr @ z)
        self.a = _alpha_coeffs(Q, q, s, z)
        w = np.einsum("iab,b->ia", Q[1:], z) + q[1:]
        self.hess = -2.0 * w @ solve(w.T)

    @property
    def primal(self) -> float:
        return _primal_value(self.a)


def _ball_step(r: np.ndarray, grad: np.ndarray, hess: np.ndarray) -> np.ndarray:
    """Maximiser of the local quadratic model of the dual over the unit ball."""
    A = -(hess + hess.T) / 2
    b = A @ r + grad
    w, v = np.linalg.eigh(A)
    w = np.clip(w, 0.0, None)
    bt = v.T @ b
    scale = max(1.0, w[-1])

    def y_of(lam):
        return v @ (bt / (w + lam))

    if w[0] > 1e-14 * scale:
        y = y_of(0.0)
        if np.linalg.norm(y) <= 1.0:
            return y
    tiny = 1e-14 * scale
    if np.linalg.norm(y_of(tiny)) <= 1.0:
        return y_of(tiny)
    lo, hi = tiny, max(1.0, 2 * np.linalg.norm(b))
    while np.linalg.norm(y_of(hi)) > 1.0:
        hi *= 2
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if np.linalg.norm(y_of(mid)) > 1.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * hi:
            break
    y = y_of(hi)
    return y / max(1.0, np.linalg.norm(y))


class _Tracker:
    """Best primal point and best dual value seen so far."""

    def __init__(self, tol):
        self.tol = tol
        self.z = None
        self.f = math.inf
        self.g = -math.inf

    def primal(self, z, f):
        if f < self.f:
            self.z, self.f = z, f

    def dual(self, g):
        self.g = max(self.g, g)

    @property
    def done(self) -> bool:
        return self.f - self.g <= self.tol * max(1.0, abs(self.f))


def _dual_phase(Q, q, s, best: _Tracker, max_iter: int, r0=None) -> int:
    r = np.zeros(3) if r0 is None else np.asarray(r0, dtype=float)
    cur = _Inner(Q, q, s, r)
    best.primal(cur.z, cur.primal)
    best.dual(cur.g)
    it = 0
    for it in range(1, max_iter + 1):
        if best.done:
            break
        y = _ball_step(r, cur.a[1:], cur.hess)
        d = y - r
        pred = cur.a[1:] @ d + 0.5 * d @ cur.hess @ d
        if pred <= 1e-15 * max(1.0, abs(cur.g)):
            break
        t = 1.0
        while True:
            trial = _Inner(Q, q, s, r + t * d)
            if trial.g >= cur.g + 1e-4 * t * pred or t < 1e-6:
                break
            t *= 0.5
        best.primal(trial.z, trial.primal)
        best.dual(trial.g)
        if trial.g < cur.g + 1e-4 * t * pred:
            break
        r, cur = r + t * d, trial
    return it


def _smoothed(Q, q, s, z, mu):
    """Value, gradient, Hessian of ``a0 + mu log(2 cosh(|a| / mu))`` and the softmax Bloch vector."""
    a = _alpha_coeffs(Q, q, s, z)
    rho = float(np.linalg.norm(a[1:]))
    x = rho / mu
    tau = math.tanh(x)
    u = a[1:] / rho if rho > 0 else np.zeros(3)
    v = tau * u
    logc = x + math.log1p(math.exp(-2 * x))
    val = float(a[0] + mu * logc)
    ga = 2 * (np.einsum("mab,b->ma", Q, z) + q)
    grad = ga[0] + v @ ga[1:]
    ratio = tau / rho if x > 1e-8 else 1.0 / mu
    dv = ratio * (np.eye(3) - np.outer(u, u)) + (1 - tau * tau) / mu * np.outer(u, u)
    hess = 2 * (Q[0] + np.einsum("i,iab->ab", v, Q[1:])) + ga[1:].T @ dv @ ga[1:]
    return val, grad, hess, v, a


def _smoothing_phase(Q, q, s, best: _Tracker, max_iter: int) -> int:
    """Newton continuation on the log-sum-exp smoothing of ``lambda_max(alpha(z))``.

    The smoothed objective is convex, overestimates ``lambda_max`` by at most
    ``mu log 2``, and its softmax Bloch vector lies strictly inside the ball,
    where the dual value is a cheap certified lower bound.
    """
    z = best.z.copy()
    scale = max(1.0, abs(best.f))
    mu = max(best.f - best.g, 1e-6 * scale)
    it = 0
    while it < max_iter and not best.done:
        for _ in range(50):
            it += 1
            val, grad, hess, v, a = _smoothed(Q, q, s, z, mu)
            best.primal(z, _primal_value(a))
            best.dual(_Inner(Q, q, s, v).g)
            if best.done or it >= max_iter:
                break
            try:
                step = -np.linalg.solve(hess, grad)
            except np.linalg.LinAlgError:
                step = -np.linalg.lstsq(hess, grad, rcond=None)[0]
            dec = -(grad @ step)
            if not dec > 1e-3 * mu:
                break
            t = 1.0
            while t > 1e-10:
                trial = z + t * step
                if _smoothed(Q, q, s, trial, mu)[0] <= val - 1e-4 * t * dec:
                    break
                t *= 0.5
            else:
                break
            z = trial
        if not best.done:
            # the softmax vector approximates an interior dual optimum; polish it there
            it += _dual_phase(Q, q, s, best, 10, r0=v)
        if mu <= 1e-13 * scale:
            break
        mu *= 0.1
    return it


def _solve(Q, q, s, tol=GAP_TOL, max_iter=MAX_ITER):
    """Minimise ``lambda_max(alpha(z))``; returns ``(z, primal, dual, converged, iterations)``."""
    if Q.shape[1] == 0:
        f = float(s[0] + np.linalg.norm(s[1:]))
        return np.zeros(0), f, f, True, 0
    best = _Tracker(tol)
    it = _dual_phase(Q, q, s, best, max_iter)
    if not best.done:
        it += _smoothing_phase(Q, q, s, best, max_iter)
    return best.z, best.f, best.g, best.done, it


def minimize_alpha_norm(c: KrausChannel | GaugeModel, n, *, tol: float = GAP_TOL, max_iter: int = MAX_ITER) -> BoundResult:
    """Minimise ``||alpha(h)||`` over gauges with ``beta(h) = 0``.

    Returns an infeasible result (``alpha_min`` unset) when no gauge cancels
    beta for this direction. A :class:`SolverStall` warning is emitted if
    the duality gap does not close within ``max_iter`` iterations; the
    returned value is still an upper bound.
    """
    model = c if isinstance(c, GaugeModel) else GaugeModel(c)
    n = _as_vector(n)
    direction = tuple(float(v) for v in n)
    if not model.is_feasible(n):
        return BoundResult(feasible=False, direction=direction)
    Q, q, s = model.quadratic(n)
    z, f, g, ok, it = _solve(Q, q, s, tol=tol, max_iter=max_iter)
    if not ok:
        warnings.warn(
            f"gap {f - g:.3e} after {it} iterations at n={direction}; bound is valid but may be loose",
            SolverStall,
            stacklevel=2,
        )
    return BoundResult(
        feasible=True,
        direction=direction,
        alpha_min=f,
        h=model.gauge(n, z),
        dual_bound=g,
        converged=ok,
        iterations=it,
    )


def beta_system(c: KrausChannel, n) -> BetaSystem:
    """Rouche-Capelli analysis of ``beta = 0`` for direction ``n``."""
    return GaugeModel(c).beta_system(n)


def span_dimension(c: KrausChannel) -> int:
    """Dimension of ``span_h { k^dag h k }`` inside the 2x2 Hermitian matrices."""
    return GaugeModel(c).rank


def rank1_beta_sets(params: Rank1Params, n) -> tuple[tuple[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]:
    """Split ``beta = 0`` for a two-Kraus channel into its two 2x2 systems.

    ``n`` is given in the lab frame and rotated into the frame of
    ``params``. Returns ``((S1, c1), (S2, c2))``: the first system fixes the
    diagonal gauge entries ``h00, h11``, the second ``Re h01, Im h01``.
    """
    nx, ny, nz = params.rotation @ _as_vector(n)
    l1, l2 = params.lambda1, params.lambda2
    A, B = params.A, params.B
    sp, sm = math.sqrt(max(A + B, 0.0)), math.sqrt(max(A - B, 0.0))
    root = math.sqrt(max(A * A - B * B, 0.0))
    S1 = np.array([[A, 1 - A], [B, -B]])
    c1 = np.array([-2 * nz * B, nz * (1 - 2 * A)])
    S2 = np.array(
        [
            [l1.real * (sp + sm) + l2 * (sp - sm), -l1.imag * (sp + sm)],
            [l1.imag * (sp - sm), l1.real * (sp - sm) + l2 * (sp + sm)],
        ]
    )
    c2 = -np.array(
        [
            nx * (abs(l1) ** 2 - l2**2 + root) + 2 * ny * l1.imag * l2,
            ny * (abs(l1) ** 2 - l2**2 - root) - 2 * nx * l1.imag * l2,
        ]
    )
    return (S1, c1), (S2, c2)


def rank1_feasible(params: Rank1Params, n) -> bool:
    """Both 2x2 systems consistent (rank of coefficient = rank of augmented)."""
    ok = True
    for S, c in rank1_beta_sets(params, n):
        ok &= _numerical_rank(S) == _numerical_rank(np.column_stack([S, c]))
    return ok


# closed forms


def amplitude_damping_gauge(p: float, n) -> GaugeHamiltonian:
    """The unique gauge with ``beta = 0`` for amplitude damping."""
    n1, n2, n3 = _as_vector(n)
    off = math.sqrt(1 / p - 1)
    return GaugeHamiltonian(
        np.array([[-n3, (-n1 + 1j * n2) * off], [(-n1 - 1j * n2) * off, (2 / p - 3) * n3]])
    )


def amplitude_damping_alpha_coeffs(p: float, n) -> np.ndarray:
    n1, n2, n3 = _as_vector(n)
    a0 = (1 / p - 2 * p) * n3**2 + 1 / p + 2 * p - 2
    a1 = -2 * math.sqrt(1 - p) / p * n1 * n3
    a2 = -2 * math.sqrt(1 - p) / p * n2 * n3
    a3 = (2 * p - 2 / p) * n3**2 - 2 * p + 2
    return np.array([a0, a1, a2, a3])


def amplitude_damping_optimal_n3(p: float) -> float:
    """|n3| of the optimal direction for amplitude damping."""
    if p <= 1 / math.sqrt(2):
        return 1.0
    return (1 - p) * math.sqrt(1 + p) / math.sqrt(p * (p * p + p - 1))


def smallp_direction_coeffs(p1: float, p2: float, p3: float) -> np.ndarray:
    """Coefficients ``w_i`` of the small-noise bound ``sum_i w_i n_i^2`` for a Pauli channel.

    Valid for full-rank channels and for rank-2 ones (exactly one ``p_i = 0``).
    """
    p = np.array([p1, p2, p3], dtype=float)
    out = np.empty(3)
    for i in range(3):
        j, k = [x for x in range(3) if x != i]
        out[i] = (p[j] + p[k]) / (4 * p[j] * p[k] + 4 * p[i] * (p[j] + p[k]))
    return out


ANALYTIC_FAMILIES = ("amplitude_damping", "depolarizing", "pauli_full_smallp", "pauli_rank2_smallp")


def analytic_bound(family: str, params, n=None) -> float:
    """Closed-form effective-size bounds.

    Without ``n`` the bound is maximised over directions; with ``n`` it is
    evaluated for that direction. The small-noise Pauli families use a fixed
    gauge ansatz and warn when any noise probability exceeds 0.01.

    Raises:
        OutOfDomain: if the parameters are outside the family's domain.
    """
    params = np.atleast_1d(np.asarray(params, dtype=float))
    if family == "amplitude_damping":
        (p,) = params
        if not 0 < p < 1:
            raise OutOfDomain(f"amplitude damping needs 0 < p < 1, got {p}")
        if n is not None:
            a = amplitude_damping_alpha_coeffs(p, n)
            return float(abs(a[0]) + np.linalg.norm(a[1:]))
        if p <= 1 / math.sqrt(2):
            return 4 / p - 4
        return 3 / p - 1 / p**2 + (2 - 3 * p) / (p**2 + p - 1)
    if family == "depolarizing":
        (p,) = params
        if not 0 < p <= 0.75:
            raise OutOfDomain(f"depolarizing needs 0 < p <= 3/4, got {p}")
        return 1 / (2 * p) + 1 / (9 - 8 * p) - 1
    if family == "pauli_full_smallp":
        if len(params) != 3 or np.any(params <= 0):
            raise OutOfDomain(f"full-rank small-noise bound needs three positive p_i, got {params.tolist()}")
        _warn_large(params)
        if n is not None:
            return float(smallp_direction_coeffs(*params) @ _as_vector(n) ** 2)
        pa, pb, pc = sorted(params, reverse=True)
        return (pa + pb) / (4 * pa * pb + 4 * pc * (pa + pb))
    if family == "pauli_rank2_smallp":
        if len(params) == 3:
            if np.sum(params == 0) != 1 or np.any(params < 0):
                raise OutOfDomain(f"rank-2 bound needs exactly one vanishing p_i, got {params.tolist()}")
            nonzero = params[params > 0]
        elif len(params) == 2 and np.all(params > 0):
            nonzero = params
        else:
            raise OutOfDomain(f"rank-2 bound needs two positive p_i, got {params.tolist()}")
        _warn_large(nonzero)
        if n is not None:
            full = params if len(params) == 3 else np.array([params[0], params[1], 0.0])
            return float(smallp_direction_coeffs(*full) @ _as_vector(n) ** 2)
        return float((1 / nonzero[0] + 1 / nonzero[1]) / 4)
    raise OutOfDomain(f"unknown family {family!r}; expected one of {ANALYTIC_FAMILIES}")


def _warn_large(p):
    if np.any(np.asarray(p) > 0.01):
        warnings.warn("small-noise formula used with p_i > 0.01; expect O(1) deviations", stacklevel=3)
