import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ceqfi.channels import make_amplitude_damping, make_depolarizing, make_pauli_channel, random_channel
from ceqfi.errors import DimensionMismatch, NotCovariant
from ceqfi.linalg import PAULIS
from ceqfi.oracle import (
    Instrument,
    NQubitState,
    apply_local_channel,
    collective_operator,
    collective_qfi_matrix,
    effective_size,
    fidelity_susceptibility_qfi,
    ghz,
    haar_pure,
    identity_instrument,
    instrument_qfi_monotonicity,
    max_effective_size,
    plus,
    qfi,
    random_covariant_instrument,
    random_hermitian,
    random_mixed,
    uhlmann_fidelity,
    variance,
    verify_ce_bound,
)
from ceqfi.sweep import sweep_directions

from conftest import unit

IDENTITY = make_pauli_channel([1, 0, 0, 0])


def explicit_local(rho, ops, N):
    """Reference: expand the product channel over all Kraus strings."""
    out = np.zeros_like(rho)
    for idx in np.ndindex(*(len(ops),) * N):
        K = np.eye(1)
        for i in idx:
            K = np.kron(K, ops[i])
        out += K @ rho @ K.conj().T
    return out


def expm_herm(H, t):
    w, v = np.linalg.eigh(H)
    return (v * np.exp(-1j * t * w)) @ v.conj().T


class TestState:
    def test_validation(self):
        with pytest.raises(DimensionMismatch):
            NQubitState(np.eye(3) / 3)
        with pytest.raises(ValueError):
            NQubitState(np.eye(2))
        with pytest.raises(ValueError):
            NQubitState(np.diag([1.5, -0.5]))
        with pytest.raises(ValueError):
            ghz(9)

    def test_partial_trace(self, rng):
        s = haar_pure(3, rng)
        r = s.partial_trace([0, 2])
        psi = np.linalg.eigh(s.rho)[1][:, -1].reshape(2, 2, 2)
        ref = np.einsum("abc,dbf->acdf", psi, psi.conj()).reshape(4, 4)
        assert np.allclose(r.rho, ref, atol=1e-12)

    def test_derivative(self):
        s = ghz(2)
        H = collective_operator((0, 0, 1), 2)
        assert np.allclose(s.derivative(H), -1j * (H @ s.rho - s.rho @ H))


class TestQFI:
    def test_ghz(self):
        assert qfi(ghz(3), (0, 0, 1)) == pytest.approx(36)

    def test_product_plus(self):
        assert qfi(plus(3), (0, 0, 1)) == pytest.approx(12)

    def test_depolarized_ghz_fidelity_cross_check(self):
        s = apply_local_channel(ghz(2), make_depolarizing(0.1))
        f = qfi(s, (0, 0, 1))
        assert fidelity_susceptibility_qfi(s, (0, 0, 1), 1e-4) == pytest.approx(f, rel=1e-4)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            qfi(ghz(2), np.eye(8))

    def test_pure_state_variance(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            N = int(rng.integers(1, 5))
            s = haar_pure(N, rng)
            H = random_hermitian(2**N, rng) if rng.random() < 0.5 else unit(rng.normal(size=3))
            assert abs(qfi(s, H) - 4 * variance(s, H)) <= 1e-9 * max(1.0, qfi(s, H))

    def test_unitary_covariance(self, rng):
        for _ in range(30):
            s = random_mixed(3, rng, ancillas=int(rng.integers(1, 4)))
            H = random_hermitian(8, rng)
            U = expm_herm(random_hermitian(8, rng), 1.0)
            moved = NQubitState(U @ s.rho @ U.conj().T)
            assert qfi(moved, U @ H @ U.conj().T) == pytest.approx(qfi(s, H), rel=1e-9, abs=1e-9)

    def test_fidelity_cross_check_full_rank(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            s = random_mixed(3, rng)
            assert np.linalg.eigvalsh(s.rho)[0] > 1e-6
            H = random_hermitian(8, rng)
            assert fidelity_susceptibility_qfi(s, H) == pytest.approx(qfi(s, H), rel=1e-3)

    def test_root_fidelity_of_pure_states(self, rng):
        a, b = haar_pure(2, rng), haar_pure(2, rng)
        psi = np.linalg.eigh(a.rho)[1][:, -1]
        phi = np.linalg.eigh(b.rho)[1][:, -1]
        assert uhlmann_fidelity(a.rho, b.rho) == pytest.approx(abs(np.vdot(psi, phi)), abs=1e-7)

    def test_collective_matrix(self, rng):
        s = random_mixed(3, rng)
        G = collective_qfi_matrix(s)
        for _ in range(10):
            n = unit(rng.normal(size=3))
            assert n @ G @ n == pytest.approx(qfi(s, n), rel=1e-12)

    def test_heisenberg_ceiling(self, rng):
        for N in (1, 2, 3, 4):
            for _ in range(5):
                assert qfi(random_mixed(N, rng), unit(rng.normal(size=3))) <= 4 * N * N + 1e-9


class TestLocalChannel:
    def test_identity(self, rng):
        s = random_mixed(3, rng)
        assert np.allclose(apply_local_channel(s, IDENTITY).rho, s.rho)

    def test_dephasing_half(self):
        s = NQubitState.pure([1, 1])
        out = apply_local_channel(s, make_pauli_channel([0.5, 0, 0, 0.5]))
        assert np.allclose(out.rho, np.eye(2) / 2)

    def test_full_depolarizing(self, rng):
        for _ in range(5):
            out = apply_local_channel(haar_pure(1, rng), make_depolarizing(0.75))
            assert np.allclose(out.rho, np.eye(2) / 2, atol=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 2**32 - 1))
    def test_matches_kraus_expansion(self, N, rank, seed):
        rng = np.random.default_rng(seed)
        c = random_channel(rank, rng)
        s = random_mixed(N, rng)
        out = apply_local_channel(s, c)
        assert np.allclose(out.rho, explicit_local(s.rho, c.physical_ops, N), atol=1e-12)
        assert abs(np.trace(out.rho).real - 1) <= 1e-10
        assert np.linalg.eigvalsh(out.rho)[0] >= -1e-10

    def test_single_qubit_matches_channel_apply(self, rng):
        c = random_channel(3, rng)
        s = haar_pure(1, rng)
        assert np.allclose(apply_local_channel(s, c).rho, c.apply(s.rho))


class TestEffectiveSize:
    @pytest.mark.parametrize("N", [1, 2, 3, 4])
    def test_ghz(self, N):
        assert effective_size(ghz(N), 21) == pytest.approx(N)

    @pytest.mark.parametrize("N", [1, 3])
    def test_plus(self, N):
        assert effective_size(plus(N), 21) == pytest.approx(1)

    def test_depolarized_ghz_below_bound(self):
        c = make_depolarizing(0.1)
        noisy = apply_local_channel(ghz(3), c)
        value = effective_size(noisy, 21)
        assert 0 < value <= 3
        assert value <= max_effective_size(noisy) + 1e-12
        grid = sweep_directions(c, 21)
        assert value <= grid.refined.alpha_min


class TestVerify:
    def test_depolarizing_ghz3(self):
        report = verify_ce_bound(ghz(3), make_depolarizing(0.2), 11)
        assert report.passed and report.worst_margin > 0
        assert report.to_dict()["violations"] == 0

    def test_identity_channel_uses_general_bound(self, rng):
        report = verify_ce_bound(random_mixed(3, rng), IDENTITY, 11)
        assert not any(c.feasible for c in report.checks)
        assert all(c.bound == pytest.approx(36) for c in report.checks)
        assert report.passed

    def test_amplitude_damping_ghz4(self):
        report = verify_ce_bound(ghz(4), make_amplitude_damping(0.3), 11)
        assert report.passed and report.worst_margin > 0

    def test_infeasible_directions_checked(self):
        report = verify_ce_bound(ghz(3), make_pauli_channel([0.7, 0, 0, 0.3]), 11)
        assert any(not c.feasible for c in report.checks) and any(c.feasible for c in report.checks)
        assert report.passed

    def test_random_channels_and_states(self, rng):
        for _ in range(6):
            c = random_channel(int(rng.integers(2, 5)), rng)
            N = int(rng.integers(2, 5))
            report = verify_ce_bound(random_mixed(N, rng, ancillas=1), c, 7)
            assert report.passed


class TestInstruments:
    def test_identity(self, rng):
        s = random_mixed(3, rng)
        mean, f0, ok = instrument_qfi_monotonicity(s, identity_instrument(3))
        assert ok and mean == pytest.approx(f0, rel=1e-12)

    def test_global_rotation(self, rng):
        s = random_mixed(3, rng)
        A = collective_operator((0, 0, 1), 3)
        inst = Instrument(((expm_herm(A, 0.37),),), 3)
        mean, f0, ok = instrument_qfi_monotonicity(s, inst)
        assert ok and mean == pytest.approx(f0, rel=1e-10)

    def test_random_covariant(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            inst = random_covariant_instrument(3, rng)
            mean, f0, ok = instrument_qfi_monotonicity(random_mixed(3, rng), inst)
            assert ok and mean <= f0 + 1e-8

    def test_other_axis(self, rng):
        axis = unit((1, 1, 0))
        inst = random_covariant_instrument(3, rng, axis=axis)
        assert instrument_qfi_monotonicity(random_mixed(3, rng), inst, axis)[2]

    def test_with_partial_trace(self, rng):
        for _ in range(10):
            inst = random_covariant_instrument(3, rng, discard=[(), (2,), (0, 1)])
            assert instrument_qfi_monotonicity(random_mixed(3, rng), inst)[2]

    def test_not_covariant(self, rng):
        X = np.kron(PAULIS[1], np.eye(4))
        inst = Instrument(((X,),), 3)
        with pytest.raises(NotCovariant):
            instrument_qfi_monotonicity(random_mixed(3, rng), inst)

    def test_zero_probability_outcome_skipped(self):
        P0 = np.diag([1.0, 0, 0, 0])
        P1 = np.eye(4) - P0
        inst = Instrument(((P0,), (P1,)), 2)
        s = NQubitState(np.diag([0, 0.5, 0.5, 0]).astype(complex))
        assert inst.probabilities(s)[0] == 0
        mean, f0, ok = instrument_qfi_monotonicity(s, inst)
        assert ok and math.isfinite(mean)

    def test_not_trace_preserving(self):
        with pytest.raises(ValueError):
            Instrument(((0.5 * np.eye(2),),), 1)
