import numpy as np
import pytest

from ceqfi.linalg import sigma_n


def sdp_alpha_min(channel, n):
    """Reference min ||alpha|| from a generic conic solver (Schur-complement form)."""
    cp = pytest.importorskip("cvxpy")
    k = channel.physical_ops
    d = len(k)
    H = sigma_n(n)
    h = cp.Variable((d, d), hermitian=True)
    t = cp.Variable()
    M = [sum(h[i, j] * k[j] for j in range(d)) + H @ k[i] for i in range(d)]
    stacked = cp.vstack(M)
    beta = sum(cp.conj(M[i]).T @ k[i] for i in range(d))
    block = cp.bmat([[t * np.eye(2), stacked.H], [stacked, t * np.eye(2 * d)]])
    problem = cp.Problem(cp.Minimize(t), [block >> 0, beta == 0])
    problem.solve(solver=cp.CLARABEL)
    return float(t.value) ** 2


def unit(v):
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
