from __future__ import annotations

import numpy as np
import pytest

from clusterbench.gates import CZ, ISWAP_MINUS, SWAP, r_z
from clusterbench.statevec import (
    MINUS_X,
    ONE,
    PAULI_X,
    PLUS_X,
    PLUS_Y,
    ZERO,
    BlochOrientation,
    ImpossibleBranchError,
    QubitIndexError,
    StateVector,
    apply_1q,
    apply_2q,
    apply_matrix,
    apply_matrix_batched,
    measure_x,
    overlap,
    product_state,
    project_x,
    reduced_qubit_state,
    single_qubit_state,
)


def random_state(n, rng):
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return StateVector(n, v / np.linalg.norm(v))


def random_unitary(dim, rng):
    q, r = np.linalg.qr(rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


class TestProductState:
    def test_basis(self):
        assert np.allclose(product_state([ZERO, ZERO]).amplitudes, [1, 0, 0, 0])

    def test_plus_plus(self):
        assert np.allclose(product_state([PLUS_X, PLUS_X]).amplitudes, 0.5)

    def test_plus_y(self):
        assert np.allclose(product_state([PLUS_Y]).amplitudes, [2**-0.5, 1j * 2**-0.5])

    def test_order_is_msb_first(self):
        assert np.allclose(product_state([ONE, ZERO]).amplitudes, [0, 0, 1, 0])

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            product_state([])

    def test_unnormalized_rejected(self):
        with pytest.raises(ValueError):
            product_state([np.array([1.0, 1.0])])


class TestApply:
    def test_x_on_qubit_one(self):
        s = apply_1q(product_state([ZERO, ZERO]), 1, PAULI_X)
        assert np.allclose(s.amplitudes, [0, 0, 1, 0])

    def test_identity_leaves_state(self):
        rng = np.random.default_rng(0)
        s = random_state(3, rng)
        before = s.amplitudes.copy()
        apply_1q(s, 2, np.eye(2))
        assert np.array_equal(s.amplitudes, before)

    def test_rz_pi_flips_plus(self):
        s = apply_1q(product_state([PLUS_X]), 1, r_z(np.pi))
        assert abs(abs(np.vdot(MINUS_X, s.amplitudes)) - 1) < 1e-12

    def test_cz_on_plus_plus(self):
        s = apply_2q(product_state([PLUS_X, PLUS_X]), 1, 2, CZ)
        assert np.allclose(s.amplitudes, np.array([1, 1, 1, -1]) / 2)

    def test_iswap_moves_excitation(self):
        s = apply_2q(product_state([ZERO, ONE]), 1, 2, ISWAP_MINUS)
        assert np.allclose(s.amplitudes, [0, 0, -1j, 0])

    @pytest.mark.parametrize("q", [0, 4, -1])
    def test_out_of_range(self, q):
        with pytest.raises(QubitIndexError):
            apply_1q(product_state([ZERO] * 3), q, PAULI_X)

    def test_collision(self):
        with pytest.raises(QubitIndexError):
            apply_2q(product_state([ZERO] * 3), 2, 2, CZ)

    def test_non_unitary(self):
        with pytest.raises(ValueError):
            apply_1q(product_state([ZERO]), 1, np.array([[1, 1], [0, 1]]))
        with pytest.raises(ValueError):
            apply_2q(product_state([ZERO, ZERO]), 1, 2, 2 * np.eye(4))

    def test_norm_preserved(self):
        rng = np.random.default_rng(1)
        s = random_state(5, rng)
        for _ in range(40):
            i, j = rng.choice(np.arange(1, 6), size=2, replace=False)
            apply_2q(s, int(i), int(j), random_unitary(4, rng))
            apply_1q(s, int(rng.integers(1, 6)), random_unitary(2, rng))
        assert abs(s.norm() - 1) < 1e-12

    def test_disjoint_pairs_commute(self):
        rng = np.random.default_rng(2)
        base = random_state(4, rng)
        u, v = random_unitary(4, rng), random_unitary(4, rng)
        a = apply_2q(apply_2q(base.copy(), 1, 2, u), 3, 4, v)
        b = apply_2q(apply_2q(base.copy(), 3, 4, v), 1, 2, u)
        assert np.max(np.abs(a.amplitudes - b.amplitudes)) < 1e-12

    def test_swap_conjugation(self):
        rng = np.random.default_rng(3)
        base = random_state(3, rng)
        u = random_unitary(4, rng)
        a = apply_2q(base.copy(), 1, 3, u)
        b = apply_2q(base.copy(), 3, 1, SWAP @ u @ SWAP)
        assert np.max(np.abs(a.amplitudes - b.amplitudes)) < 1e-12

    def test_batched_kernel_matches_loop(self):
        rng = np.random.default_rng(4)
        t = rng.normal(size=(5, 2, 2, 2)) + 0j
        us = np.array([random_unitary(4, rng) for _ in range(5)])
        out = apply_matrix_batched(t, us, (3, 1))
        for s in range(5):
            assert np.allclose(out[s], apply_matrix(t[s], us[s], (2, 0)))


class TestMeasure:
    def test_eigenstate(self):
        s, p, _ = measure_x(product_state([PLUS_X]), 1, rng=np.random.default_rng(0))
        assert (s, p) == (0, pytest.approx(1.0))

    @pytest.mark.parametrize("outcome", [0, 1])
    def test_z_state_is_even(self, outcome):
        _, p, post = measure_x(product_state([ZERO]), 1, forced_outcome=outcome)
        assert p == pytest.approx(0.5)
        assert abs(post.norm() - 1) < 1e-12

    def test_cluster_first_qubit(self):
        # three-qubit cluster from an explicit amplitude formula
        amps = np.array([(-1) ** (a * b + b * c) for a in (0, 1) for b in (0, 1) for c in (0, 1)]) / np.sqrt(8)
        for outcome in (0, 1):
            p, _ = project_x(StateVector(3, amps), 1, outcome)
            assert p == pytest.approx(0.5, abs=1e-12)

    def test_probabilities_sum(self):
        rng = np.random.default_rng(5)
        s = random_state(4, rng)
        for q in range(1, 5):
            assert project_x(s, q, 0)[0] + project_x(s, q, 1)[0] == pytest.approx(1.0, abs=1e-12)

    def test_post_state_is_x_eigenstate(self):
        s = random_state(2, np.random.default_rng(6))
        measure_x(s, 2, forced_outcome=1)
        _, bloch = reduced_qubit_state(s, 2)
        assert np.allclose(bloch, [-1, 0, 0], atol=1e-12)

    def test_impossible_branch(self):
        with pytest.raises(ImpossibleBranchError):
            measure_x(product_state([PLUS_X]), 1, forced_outcome=1)

    def test_seeded_sampling_replays(self):
        s = random_state(3, np.random.default_rng(7))
        a = measure_x(s.copy(), 2, rng=np.random.default_rng(9))[0]
        b = measure_x(s.copy(), 2, rng=np.random.default_rng(9))[0]
        assert a == b


class TestTomography:
    def test_product_qubit(self):
        _, bloch = reduced_qubit_state(product_state([ZERO, PLUS_X]), 2)
        assert np.allclose(bloch, [1, 0, 0])

    def test_bell_is_mixed(self):
        bell = StateVector(2, np.array([1, 0, 0, 1]) / np.sqrt(2))
        for q in (1, 2):
            assert np.allclose(reduced_qubit_state(bell, q)[1], 0)

    @pytest.mark.parametrize("theta0,phi0", [(0.3, 0.4), (1.2, 4.0), (np.pi, 0.0), (2.5, 6.0)])
    def test_input_orientation(self, theta0, phi0):
        s = product_state([single_qubit_state(theta0, phi0), ZERO])
        _, bloch = reduced_qubit_state(s, 1)
        expected = [np.sin(theta0) * np.cos(phi0), np.sin(theta0) * np.sin(phi0), np.cos(theta0)]
        assert np.allclose(bloch, expected, atol=1e-12)
        assert abs(np.linalg.norm(bloch) - 1) < 1e-10


class TestOverlapAndOrientation:
    def test_self_overlap(self):
        s = random_state(3, np.random.default_rng(8))
        assert overlap(s, s) == pytest.approx(1.0)

    def test_orthogonal(self):
        assert overlap(product_state([ZERO]), product_state([ONE])) == 0

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            overlap(product_state([ZERO]), product_state([ZERO, ZERO]))

    def test_orientation_ranges(self):
        with pytest.raises(ValueError):
            BlochOrientation(4.0, 0.0)
        assert BlochOrientation(1.0, -0.5).phi0 == pytest.approx(2 * np.pi - 0.5)

    def test_vector_round_trip(self):
        r = BlochOrientation(1.1, 2.2)
        back = BlochOrientation.from_vector(r.vector)
        assert np.allclose(back.vector, r.vector)

    def test_size_cap(self):
        with pytest.raises(ValueError):
            StateVector(25, np.zeros(1))
