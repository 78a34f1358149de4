import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ceqfi.channels import (
    BASIS_STATES,
    KrausChannel,
    Rank1Params,
    canonicalize,
    channel_from_kraus,
    detect_rank,
    make_amplitude_damping,
    make_depolarizing,
    make_pauli_channel,
    random_channel,
    rank1_params,
    same_action,
    validate_channel,
)
from ceqfi.errors import DegenerateChannel, InvalidProbabilities, OutOfRange, ValidationError, WrongRank
from ceqfi.linalg import PAULIS, SIGMA_X, SIGMA_Y, SIGMA_Z


def outputs(c):
    return np.array([c.apply(rho) for rho in BASIS_STATES])


def explicit_outputs(ops):
    return np.array([sum(k @ rho @ k.conj().T for k in ops) for rho in BASIS_STATES])


def kraus_unitary_mix(c, u):
    return KrausChannel(np.einsum("ij,jab->iab", u, c.ops))


def haar_unitary(d, rng):
    q, r = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


class TestPauli:
    def test_identity(self):
        c = make_pauli_channel([1, 0, 0, 0])
        assert c.rank == 1
        assert np.allclose(c.ops[0], np.eye(2))

    def test_depolarizing_style(self):
        c = make_pauli_channel([0.7, 0.1, 0.1, 0.1])
        assert c.rank == 4
        assert np.allclose(c.ops[0], math.sqrt(0.7) * np.eye(2))
        assert c.family == "pauli"

    def test_dephasing(self):
        c = make_pauli_channel([0.7, 0, 0, 0.3])
        assert c.rank == 2
        assert np.allclose(c.ops, [math.sqrt(0.7) * np.eye(2), math.sqrt(0.3) * SIGMA_Z])

    def test_short_list_padded(self):
        assert make_pauli_channel([0.9, 0.1]).rank == 2

    @pytest.mark.parametrize("p", [[0.5, -0.1, 0.3, 0.3], [0.5, 0.2, 0.2, 0.2], [0, 0.5, 0.5, 0], [1.0], [0.2] * 5])
    def test_invalid(self, p):
        with pytest.raises(InvalidProbabilities):
            make_pauli_channel(p)

    def test_normalisation_tolerance(self):
        make_pauli_channel([0.7, 0.1, 0.1, 0.1 + 5e-13])
        with pytest.raises(InvalidProbabilities):
            make_pauli_channel([0.7, 0.1, 0.1, 0.1 + 1e-11])

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.floats(0, 1), min_size=4, max_size=4).filter(lambda x: x[0] > 1e-3 and sum(x) > 0))
    def test_always_canonical(self, w):
        p = np.array(w) / sum(w)
        c = make_pauli_channel(p)
        report = validate_channel(c)
        assert report.canonical and report.orthogonal
        assert report.deviation < 1e-12
        assert c.rank == np.count_nonzero(p)


class TestAmplitudeDamping:
    def test_kraus_form(self):
        c = make_amplitude_damping(0.5)
        assert np.allclose(c.ops[0], np.diag([1, 0.7071068]), atol=1e-7)
        assert np.allclose(c.ops[1], [[0, math.sqrt(0.5)], [0, 0]])

    def test_near_one_is_trace_preserving(self):
        assert validate_channel(make_amplitude_damping(0.99)).deviation < 1e-12

    @pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5])
    def test_out_of_range(self, p):
        with pytest.raises(OutOfRange):
            make_amplitude_damping(p)


class TestValidate:
    def test_depolarizing(self):
        r = validate_channel(make_depolarizing(0.1))
        assert r.deviation < 1e-14 and r.rank == 4

    def test_identity_list(self):
        r = validate_channel(KrausChannel(np.eye(2)))
        assert r.deviation == 0 and r.rank == 1

    def test_not_trace_preserving(self):
        r = validate_channel(KrausChannel(0.9 * np.eye(2)))
        assert r.deviation == pytest.approx(0.19)
        assert not r.trace_preserving

    def test_rank_counts_independent_operators(self):
        ops = np.stack([np.eye(2), np.eye(2)]) / math.sqrt(2)
        assert detect_rank(ops) == 1


class TestCanonicalize:
    def test_amplitude_damping_unchanged(self):
        c = make_amplitude_damping(0.3)
        d = canonicalize(c)
        assert np.allclose(d.ops, c.ops, atol=1e-12)

    def test_dephasing_unchanged(self):
        c = make_pauli_channel([0.7, 0, 0, 0.3])
        assert np.allclose(canonicalize(c).ops, c.ops, atol=1e-12)

    def test_mixed_dephasing_recovered(self, rng):
        c = make_pauli_channel([0.7, 0, 0, 0.3])
        mixed = kraus_unitary_mix(c, haar_unitary(2, rng))
        d = canonicalize(mixed)
        gram = d.gram()
        assert abs(gram[0, 1]) < 1e-10
        assert np.allclose(d.ops[0], d.ops[0].conj().T, atol=1e-10)
        assert abs(np.trace(d.ops[1])) < 1e-10
        assert np.max(np.abs(outputs(d) - explicit_outputs(c.ops))) < 1e-10
        assert sorted(d.weights) == pytest.approx([0.3 * 2, 0.7 * 2])

    def test_degenerate_rank_rejected(self):
        ops = np.stack([np.eye(2), np.eye(2), np.zeros((2, 2))]) / math.sqrt(2)
        with pytest.raises(DegenerateChannel):
            canonicalize(KrausChannel(ops))

    def test_invariants_on_random_channels(self):
        rng = np.random.default_rng(7)
        for _ in range(1000):
            c = random_channel(int(rng.integers(1, 5)), rng)
            d = canonicalize(c)
            assert np.max(np.abs(outputs(d) - explicit_outputs(c.ops))) <= 1e-10
            report = validate_channel(d)
            assert report.canonical and report.deviation < 1e-12
            w = d.weights
            assert np.allclose(d.gram(), np.diag(w), atol=1e-10)
            k0 = d.ops[0]
            assert np.allclose(k0, k0.conj().T, atol=1e-10) and np.trace(k0).real > 0
            if d.rank == 2:
                assert abs(np.trace(d.ops[1])) < 1e-10

    @settings(max_examples=60, deadline=None)
    @given(st.integers(1, 4), st.integers(0, 2**32 - 1))
    def test_idempotent(self, rank, seed):
        c = canonicalize(random_channel(rank, np.random.default_rng(seed)))
        again = canonicalize(c)
        assert np.max(np.abs(again.ops - c.ops)) <= 1e-12
        assert np.max(np.abs(again.frame - c.frame)) <= 1e-12

    def test_channel_from_kraus_validates(self):
        with pytest.raises(ValidationError, match="1.900e-01"):
            channel_from_kraus([0.9 * np.eye(2)])

    def test_same_action_detects_difference(self):
        assert not same_action(make_depolarizing(0.1), make_depolarizing(0.2))


class TestRank1Params:
    def test_bit_flip(self):
        r = rank1_params(make_pauli_channel([0.7, 0.3, 0, 0]))
        assert r.lambda1 == pytest.approx(math.sqrt(0.3))
        assert r.lambda2 == pytest.approx(0, abs=1e-12)
        assert r.A == pytest.approx(0.7) and r.B == pytest.approx(0, abs=1e-12)
        assert r.interior

    def test_imaginary_flip_is_pauli_case(self):
        k0 = math.sqrt(0.7) * np.eye(2)
        c = canonicalize(KrausChannel(np.stack([k0, 1j * math.sqrt(0.3) * SIGMA_X])))
        r = rank1_params(c)
        assert r.pauli_case == "i"
        assert abs(r.lambda1) ** 2 + r.lambda2**2 == pytest.approx(0.3)

    def test_lowering_operator_values(self):
        k1 = 0.5 * SIGMA_X + 0.5j * SIGMA_Y
        k0 = np.diag([1.0, 0.0]).astype(complex)
        r = rank1_params(canonicalize(KrausChannel(np.stack([k0, k1]))))
        assert r.lambda1 == pytest.approx(0.5) and r.lambda2 == pytest.approx(0.5)
        assert r.A == pytest.approx(0.5) and r.B == pytest.approx(0.5)
        # A - B = 0: boundary of the positivity region
        assert not r.interior

    def test_direct_construction(self):
        r = Rank1Params(0.5 + 0j, 0.5, np.eye(3))
        assert (r.A, r.B) == pytest.approx((0.5, 0.5))

    def test_reconstructs_noise_operator(self, rng):
        for _ in range(50):
            c = canonicalize(random_channel(2, rng))
            r = rank1_params(c)
            assert r.interior
            # k1 in the rotated frame is lambda1 sigma_1 + i lambda2 sigma_2
            a = np.einsum("kij,ji->k", PAULIS, c.ops[1])[1:] / 2
            rotated = r.rotation @ a
            assert rotated == pytest.approx([r.lambda1, 1j * r.lambda2, 0], abs=1e-9)

    def test_wrong_rank(self):
        with pytest.raises(WrongRank):
            rank1_params(make_depolarizing(0.1))
