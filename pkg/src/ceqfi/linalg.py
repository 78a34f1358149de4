"""Small dense Hermitian linear algebra.

2x2 matrices are handled in closed form through their Pauli coefficients;
larger Hermitian matrices (up to 256x256, the oracle ceiling) go through
LAPACK's ``eigh``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import NonHermitian

SIGMA_0 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = np.stack([SIGMA_0, SIGMA_X, SIGMA_Y, SIGMA_Z])

HERMITIAN_TOL = 1e-9
MAX_DIM = 256


class Spectrum(NamedTuple):
    """Eigenvalues (descending) and matching orthonormal eigenvectors as columns."""

    values: np.ndarray
    vectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.values) @ self.vectors.conj().T


@dataclass(frozen=True)
class PauliVec:
    """Coefficients of ``m = a0*I + a1*X + a2*Y + a3*Z``.

    Coefficients are complex in general and real exactly when ``m`` is
    Hermitian.
    """

    a0: complex
    a1: complex
    a2: complex
    a3: complex

    @property
    def coeffs(self) -> np.ndarray:
        return np.array([self.a0, self.a1, self.a2, self.a3])

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.a1, self.a2, self.a3])

    @property
    def C(self) -> float:
        """Length of the traceless part, ``sqrt(|a1|^2 + |a2|^2 + |a3|^2)``."""
        return float(np.linalg.norm(self.vector))

    @property
    def c(self) -> np.ndarray:
        """Unit vector along the traceless part (zero if that part vanishes)."""
        C = self.C
        if C == 0.0:
            return np.zeros(3)
        return np.real_if_close(self.vector / C)

    def is_real(self, tol: float = 1e-12) -> bool:
        return bool(np.all(np.abs(np.imag(self.coeffs)) <= tol))

    def matrix(self) -> np.ndarray:
        return pauli_reconstruct(self.coeffs)


def is_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and bool(np.max(np.abs(m - m.conj().T), initial=0.0) <= tol)


def check_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NonHermitian(f"expected a square matrix, got shape {m.shape}")
    dev = float(np.max(np.abs(m - m.conj().T), initial=0.0))
    if dev > tol:
        raise NonHermitian(f"matrix deviates from Hermitian by {dev:.3e} (tolerance {tol:.1e})")
    return m


def dagger(m: np.ndarray) -> np.ndarray:
    return np.swapaxes(np.conj(m), -1, -2)


def pauli_decompose(m: np.ndarray) -> PauliVec:
    """Return ``a_i = tr(m sigma_i) / 2`` for a 2x2 complex matrix."""
    m = np.asarray(m, dtype=complex)
    if m.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {m.shape}")
    a = np.einsum("kij,ji->k", PAULIS, m) / 2
    a = [complex(v) for v in a]
    if all(abs(v.imag) == 0.0 for v in a):
        a = [v.real for v in a]
    return PauliVec(*a)


def pauli_coefficients(m: np.ndarray) -> np.ndarray:
    """Vectorised Pauli coefficients, shape ``(..., 4)``, of a stack of 2x2 matrices."""
    return np.einsum("kij,...ji->...k", PAULIS, np.asarray(m, dtype=complex)) / 2


def pauli_reconstruct(coeffs) -> np.ndarray:
    return np.einsum("k,kij->ij", np.asarray(coeffs, dtype=complex), PAULIS)


def sigma_n(n) -> np.ndarray:
    """``n . sigma`` for a real 3-vector ``n``."""
    n = np.asarray(n, dtype=float)
    return np.einsum("k,kij->ij", n, PAULIS[1:])


def _herm_eig_2x2(m: np.ndarray) -> Spectrum:
    a = pauli_coefficients(m).real
    a0, v = a[0], a[1:]
    C = float(np.linalg.norm(v))
    if C <= 1e-15 * max(1.0, abs(a0)):
        return Spectrum(np.array([a0, a0]), np.eye(2, dtype=complex))
    c1, c2, c3 = v / C
    # two algebraically equal eigenvector forms; pick the one away from its singular pole
    if c3 >= 0:
        up = np.array([1 + c3, c1 + 1j * c2])
    else:
        up = np.array([c1 - 1j * c2, 1 - c3])
    up = up / np.linalg.norm(up)
    down = np.array([-np.conj(up[1]), np.conj(up[0])])
    return Spectrum(np.array([a0 + C, a0 - C]), np.column_stack([up, down]))


def herm_eig(m: np.ndarray, tol: float = HERMITIAN_TOL) -> Spectrum:
    """Spectral decomposition of a Hermitian matrix, eigenvalues descending.

    Raises:
        NonHermitian: if ``m`` is not Hermitian within ``tol``.
    """
    m = check_hermitian(m, tol)
    if m.shape[0] > MAX_DIM:
        raise ValueError(f"dimension {m.shape[0]} exceeds supported maximum {MAX_DIM}")
    m = (m + m.conj().T) / 2
    if m.shape == (2, 2):
        return _herm_eig_2x2(m)
    w, v = np.linalg.eigh(m)
    return Spectrum(w[::-1].copy(), v[:, ::-1].copy())


def op_norm(m: np.ndarray) -> float:
    """Operator norm of a Hermitian 2x2 matrix, ``|a0| + C``."""
    m = check_hermitian(m)
    if m.shape != (2, 2):
        raise ValueError("op_norm is the closed-form 2x2 path; use herm_eig for larger matrices")
    a = pauli_coefficients(m).real
    return float(abs(a[0]) + np.linalg.norm(a[1:]))


def psd_sqrt(m: np.ndarray) -> np.ndarray:
    """Square root of a positive semidefinite Hermitian matrix; negative round-off is clipped."""
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T
