from __future__ import annotations

import numpy as np
import pytest

from clusterbench import teleport
from clusterbench.analytics import f_zz_n3
from clusterbench.builder import ChainSpec, Explicit, GaussianPerBond, Uniform, build_chain
from clusterbench.statevec import (
    MINUS_Y_AXIS,
    PAULI_X,
    PAULI_Z,
    PLUS_X,
    PLUS_Y_AXIS,
    BlochOrientation,
    StateVector,
)
from clusterbench.teleport import (
    ByproductVariant,
    TeleportChannel,
    byproduct,
    channel_class,
    enumerate_branches,
    refresh_teleport,
    sample_run,
    teleport_fidelity,
)

KINDS = ("cp", "zz", "xy")


class TestByproduct:
    def test_trivial(self):
        assert np.allclose(byproduct([0, 0, 0, 0]), np.eye(2))

    def test_three_qubit_cases(self):
        assert np.allclose(byproduct([1, 0]), PAULI_Z)
        assert np.allclose(byproduct([0, 1]), PAULI_X)
        assert np.allclose(byproduct([1, 1]), PAULI_X @ PAULI_Z)

    def test_swapped(self):
        assert np.allclose(byproduct([1, 0], ByproductVariant.XZ_SWAPPED), PAULI_X)
        assert np.allclose(byproduct([0, 1], ByproductVariant.XZ_SWAPPED), PAULI_Z)

    def test_parities(self):
        # a from s_2, s_4; b from s_1, s_3
        assert np.allclose(byproduct([1, 1, 1, 0]), PAULI_X)
        assert np.allclose(byproduct([1, 0, 0, 0]), PAULI_Z)
        assert np.allclose(byproduct([0, 1, 0, 1]), np.eye(2))

    def test_order_irrelevant_for_fidelity(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            a = rng.normal(size=2) + 1j * rng.normal(size=2)
            b = rng.normal(size=2) + 1j * rng.normal(size=2)
            a, b = a / np.linalg.norm(a), b / np.linalg.norm(b)
            xz = abs(np.vdot(a, PAULI_X @ PAULI_Z @ b)) ** 2
            zx = abs(np.vdot(a, PAULI_Z @ PAULI_X @ b)) ** 2
            assert xz == pytest.approx(zx, abs=1e-14)

    def test_even_n_rejected(self):
        with pytest.raises(ValueError):
            byproduct([0, 1, 1])


class TestBranches:
    def test_ideal_cluster(self):
        amps = np.array([(-1) ** (a * b + b * c) for a in (0, 1) for b in (0, 1) for c in (0, 1)]) / np.sqrt(8)
        branches = enumerate_branches(StateVector(3, amps))
        assert len(branches) == 4
        assert all(b.probability == pytest.approx(0.25, abs=1e-12) for b in branches)

    def test_unentangled_output(self):
        state, _ = build_chain(ChainSpec("cp", 3, Uniform(1.0)), BlochOrientation(0.0, 0.0))
        for b in enumerate_branches(state):
            if b.output is not None:
                assert abs(abs(np.vdot(PLUS_X, b.output)) - 1) < 1e-12

    def test_impossible_branches_excluded(self):
        # CP with eps=1 leaves qubit 2 in |+x>, so s_2 = 1 never happens
        rep = teleport_fidelity(ChainSpec("cp", 3, Uniform(1.0)), BlochOrientation(0.0, 0.0))
        assert len(rep.records) == 2
        assert rep.excluded_mass < 1e-15
        assert rep.weighted_fidelity == pytest.approx(0.5, abs=1e-12)

    @pytest.mark.parametrize("kind", KINDS)
    def test_probabilities_sum(self, kind):
        state, _ = build_chain(ChainSpec(kind, 5, GaussianPerBond(0.3, 11)), BlochOrientation(1.0, 2.0))
        assert sum(b.probability for b in enumerate_branches(state)) == pytest.approx(1.0, abs=1e-10)


class TestFidelity:
    @pytest.mark.parametrize("kind", KINDS)
    @pytest.mark.parametrize("n", [3, 5, 7])
    def test_identity_gate(self, kind, n):
        rep = teleport_fidelity(ChainSpec(kind, n), BlochOrientation(0.77, 4.1))
        assert rep.weighted_fidelity == pytest.approx(1.0, abs=1e-10)
        assert rep.branch_spread < 1e-10
        assert rep.channel == "quantum"

    @pytest.mark.parametrize("kind", ["zz", "xy"])
    def test_half_error_in_xz_plane(self, kind):
        for theta0, phi0 in [(0.3, 0.0), (2.0, np.pi), (np.pi / 2, 0.0)]:
            rep = teleport_fidelity(ChainSpec(kind, 3, Uniform(0.5)), BlochOrientation(theta0, phi0))
            assert rep.weighted_fidelity == pytest.approx(0.75, abs=1e-12)

    def test_cp_full_error_z(self):
        rep = teleport_fidelity(ChainSpec("cp", 3, Uniform(1.0)), BlochOrientation(0.0, 0.0))
        assert rep.weighted_fidelity == pytest.approx(0.5, abs=1e-12)
        assert rep.channel == "classical"

    def test_frozen_values(self):
        # closed-form values evaluated in 30-digit arithmetic
        r = BlochOrientation(0.7, 1.3)
        assert teleport_fidelity(ChainSpec("cp", 3, Uniform(0.35)), r).weighted_fidelity == pytest.approx(0.820878789727784, abs=1e-12)
        assert teleport_fidelity(ChainSpec("zz", 3, Uniform(0.35)), r).weighted_fidelity == pytest.approx(0.916094674956208, abs=1e-12)
        assert teleport_fidelity(ChainSpec("xy", 3, Uniform(0.35)), r).weighted_fidelity == pytest.approx(0.916094674956208, abs=1e-12)

    @pytest.mark.parametrize("kind", ["zz", "xy"])
    @pytest.mark.parametrize("eps", [0.1, 0.5, 1 / np.pi])
    def test_perfect_transmission(self, kind, eps):
        for axis in (PLUS_Y_AXIS, MINUS_Y_AXIS):
            assert teleport_fidelity(ChainSpec(kind, 7, Uniform(eps)), axis).weighted_fidelity == pytest.approx(1, abs=1e-10)

    def test_no_perfect_transmission_for_cp(self):
        rng = np.random.default_rng(12)
        for eps in (0.2, 0.45, 0.8):
            channel = TeleportChannel.from_spec(ChainSpec("cp", 3, Uniform(eps)))
            u, v = rng.random((2, 1000))
            theta0, phi0 = np.arccos(1 - 2 * u), 2 * np.pi * v
            states = np.stack([np.cos(theta0 / 2), np.exp(1j * phi0) * np.sin(theta0 / 2)], axis=1)
            assert channel.fidelity(states).max() < 1 - 1e-8

    @pytest.mark.parametrize("eps", [0.0, 0.3, 0.7])
    def test_cp_branches_against_direct_oracle(self, eps):
        # direct Kronecker construction with explicit X-basis projectors
        r = BlochOrientation(1.0, 0.5)
        plus = np.array([1, 1]) / np.sqrt(2)
        minus = np.array([1, -1]) / np.sqrt(2)
        cp = np.diag([1, 1, 1, np.exp(-1j * np.pi * (1 + eps))])
        psi = np.kron(np.kron(r.state(), plus), plus)
        psi = np.kron(np.eye(2), cp) @ (np.kron(cp, np.eye(2)) @ psi)
        oracle = {}
        for s1, p1 in ((0, plus), (1, minus)):
            for s2, p2 in ((0, plus), (1, minus)):
                out = np.kron(np.kron(p1, p2).conj(), np.eye(2)) @ psi
                prob = np.vdot(out, out).real
                corrected = np.linalg.matrix_power(PAULI_X, s2) @ np.linalg.matrix_power(PAULI_Z, s1) @ out
                oracle[(s1, s2)] = (prob, abs(np.vdot(r.state(), corrected)) ** 2 / prob)
        rep = teleport_fidelity(ChainSpec("cp", 3, Uniform(eps)), r)
        for rec, p, f in zip(rep.records, rep.probabilities, rep.branch_fidelities):
            assert p == pytest.approx(oracle[tuple(rec)][0], abs=1e-12)
            assert f == pytest.approx(oracle[tuple(rec)][1], abs=1e-12)
        if eps > 0:
            # branch fidelities differ; only their weighted mean follows the closed form
            assert rep.branch_spread > 0.1

    def test_branch_spread_recorded(self):
        # branches differ under uniform error; only the weighted value follows the closed form
        rep = teleport_fidelity(ChainSpec("zz", 3, Uniform(0.3)), BlochOrientation(1.0, 0.5))
        assert rep.branch_spread > 1e-3
        assert rep.weighted_fidelity == pytest.approx(f_zz_n3(1.0, 0.5, 0.3), abs=1e-12)
        assert np.dot(rep.probabilities, rep.branch_fidelities) == pytest.approx(rep.weighted_fidelity)

    def test_report_dict(self):
        rep = teleport_fidelity(ChainSpec("cp", 5, GaussianPerBond(0.1, 3)), BlochOrientation(1.0, 0.2))
        d = rep.to_dict(verbose=True)
        assert d["error_model"] == {"type": "gaussian", "sigma": 0.1, "seed": 3}
        assert len(d["bond_errors"]) == 4 and len(d["branches"]) == 16
        assert "branches" not in rep.to_dict()

    @pytest.mark.parametrize("f,label", [(0.9, "quantum"), (0.6, "indeterminate"), (2 / 3, "indeterminate"), (0.5, "classical")])
    def test_channel_class(self, f, label):
        assert channel_class(f) == label


class TestSampling:
    def test_ideal_runs(self):
        spec = ChainSpec("xy", 5)
        for seed in range(10):
            assert sample_run(spec, BlochOrientation(1.0, 1.0), seed)[1] == pytest.approx(1, abs=1e-10)

    def test_replay(self):
        spec = ChainSpec("zz", 7, Uniform(0.3))
        r = BlochOrientation(1.2, 0.1)
        assert sample_run(spec, r, 42) == sample_run(spec, r, 42)

    @pytest.mark.slow
    def test_mean_converges(self):
        spec = ChainSpec("cp", 3, Uniform(0.6))
        r = BlochOrientation(1.1, 0.6)
        exact = teleport_fidelity(spec, r)
        vals = np.array([sample_run(spec, r, seed)[1] for seed in range(10000)])
        # per-branch fidelities are bounded in [0, 1]; use the branch variance for the error bar
        var = np.dot(exact.probabilities, (exact.branch_fidelities - exact.weighted_fidelity) ** 2)
        assert abs(vals.mean() - exact.weighted_fidelity) <= 3 * np.sqrt(var / vals.size) + 1e-12


class TestRefresh:
    def test_five_qubits_window_three(self):
        rep = refresh_teleport(ChainSpec("cp", 5), BlochOrientation(0.5, 0.5), 3)
        assert rep.weighted_fidelity == pytest.approx(1, abs=1e-12)

    def test_zz_nine(self):
        spec = ChainSpec("zz", 9, Uniform(0.3))
        r = BlochOrientation(1.0, 2.0)
        assert abs(refresh_teleport(spec, r, 3).weighted_fidelity - teleport_fidelity(spec, r).weighted_fidelity) < 1e-10

    def test_cp_gaussian_window_five(self):
        spec = ChainSpec("cp", 7, GaussianPerBond(0.1, 77))
        r = BlochOrientation(2.0, 0.3)
        assert abs(refresh_teleport(spec, r, 5).weighted_fidelity - teleport_fidelity(spec, r).weighted_fidelity) < 1e-10

    @pytest.mark.parametrize("window", [3, 4, 6, 20])
    def test_xy_branchwise(self, window):
        spec = ChainSpec("xy", 7, Explicit([0.1, -0.2, 0.3, 0.05, -0.15, 0.2]))
        r = BlochOrientation(0.6, 5.0)
        full = teleport_fidelity(spec, r)
        win = refresh_teleport(spec, r, window)
        a = dict(zip(full.records, full.branch_fidelities))
        b = dict(zip(win.records, win.branch_fidelities))
        assert a.keys() == b.keys()
        assert max(abs(a[k] - b[k]) for k in a) < 1e-10

    def test_window_too_small(self):
        with pytest.raises(ValueError):
            refresh_teleport(ChainSpec("cp", 5), BlochOrientation(0, 0), 2)


class TestChannel:
    @pytest.mark.parametrize("kind", KINDS)
    def test_matches_enumeration(self, kind):
        spec = ChainSpec(kind, 5, GaussianPerBond(0.25, 8))
        channel = TeleportChannel.from_spec(spec)
        for theta0, phi0 in [(0.1, 0.2), (1.7, 3.3), (2.9, 5.5)]:
            r = BlochOrientation(theta0, phi0)
            assert channel.fidelity(r.state()) == pytest.approx(teleport_fidelity(spec, r).weighted_fidelity, abs=1e-12)

    def test_quadratic_form(self):
        channel = TeleportChannel.from_spec(ChainSpec("cp", 5, Uniform(0.3)))
        c, g, q = channel.quadratic_form()
        for theta0, phi0 in [(0.4, 0.0), (1.5, 2.0), (3.0, 4.0)]:
            r = BlochOrientation(theta0, phi0)
            v = r.vector
            assert c + g @ v + v @ q @ v == pytest.approx(channel.fidelity(r.state()), abs=1e-12)

    def test_probabilities(self):
        spec = ChainSpec("zz", 5, Uniform(0.2))
        r = BlochOrientation(1.0, 1.0)
        channel = TeleportChannel.from_spec(spec)
        probs = channel.probabilities(r.state())
        rep = teleport_fidelity(spec, r)
        index = {tuple(rec): i for i, rec in enumerate(teleport._records(5).tolist())}
        for rec, p in zip(rep.records, rep.probabilities):
            assert probs[index[rec]] == pytest.approx(p, abs=1e-12)

    def test_xz_plane_constant(self):
        channel = TeleportChannel.from_spec(ChainSpec("zz", 7, Uniform(0.3)))
        vals = [channel.fidelity(BlochOrientation(t, p).state()) for t in np.linspace(0, np.pi, 9) for p in (0.0, np.pi)]
        assert np.ptp(vals) < 1e-12
