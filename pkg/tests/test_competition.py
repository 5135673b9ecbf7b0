import numpy as np
import pytest

from models.competition import BlochPoint, Regime
from models.dynamics import RngStream
from services.competition import (
    coupled_rhs,
    induced_phase,
    ion_trap_delay,
    linewidth_from_frequency,
    motion_invariant,
    polar_rhs,
    simulate_competition,
    stationary_residual,
    stationary_state,
)
from services.exceptions import DomainError


class TestCoupledRhs:
    def test_conserves_norm(self, rng):
        for _ in range(20):
            amplitudes = rng.normal(size=2) + 1j * rng.normal(size=2)
            c00, c11 = amplitudes / np.linalg.norm(amplitudes)
            d00, d11 = coupled_rhs(c00, c11, rng.uniform(-3, 3), rng.uniform(0.1, 3))
            assert abs((np.conj(c00) * d00 + np.conj(c11) * d11).real) < 1e-14

    def test_undefined_at_zero_amplitude(self):
        with pytest.raises(DomainError):
            coupled_rhs(1.0, 0.0, 1.0)


class TestPolarRhs:
    def test_equator(self):
        assert polar_rhs(BlochPoint(theta=np.pi / 2, phi=0.0), 0.5) == pytest.approx((-0.5, 0.0), abs=1e-15)

    def test_invariant_requires_open_half_plane(self):
        with pytest.raises(DomainError):
            motion_invariant(BlochPoint(theta=1.0, phi=2.0), 0.5)


class TestStationaryState:
    @pytest.mark.parametrize("eta", [-0.9, -0.3, 0.0, 0.5, 0.99])
    @pytest.mark.parametrize("branch", [1, -1])
    def test_is_stationary_ray(self, eta, branch):
        assert stationary_residual(stationary_state(eta, branch), eta) < 1e-12

    def test_equator_is_not_stationary(self):
        assert stationary_residual(BlochPoint(theta=np.pi / 2, phi=0.0).to_state(), 0.5) > 0.1

    def test_no_stationary_state_past_coupling(self):
        with pytest.raises(DomainError):
            stationary_state(1.5)


class TestInducedPhase:
    def test_real_ratio(self):
        assert induced_phase(0.5, 1.0) == pytest.approx(np.pi / 6)

    def test_odd_in_eta(self):
        gamma = (1 + 1j) * 3.5e-6
        assert induced_phase(-2e-8, gamma) == pytest.approx(-induced_phase(2e-8, gamma))


class TestIonTrap:
    def test_ordinary_frequency(self):
        delay = ion_trap_delay(linewidth_from_frequency(20e6, "ordinary"))
        assert delay == pytest.approx(1 / (2 * np.pi * 20e6), rel=1e-9)
        assert delay == pytest.approx(7.96e-9, rel=1e-3)

    def test_angular_frequency(self):
        assert ion_trap_delay(linewidth_from_frequency(20e6, "angular")) == pytest.approx(5e-8, rel=1e-9)

    def test_unknown_convention(self):
        with pytest.raises(ValueError):
            linewidth_from_frequency(20e6, "cyclic")


class TestSimulateCompetition:
    def test_invariant_is_conserved(self):
        result = simulate_competition(np.pi / 2, 0.0, 0.5, 5.0, dt=1e-4)
        assert result.invariant_drift is not None
        assert result.invariant_drift < 1e-8

    def test_weak_collapse_stays_bound(self):
        result = simulate_competition(np.pi / 2, 0.0, 0.5, 100.0, dt=1e-2)
        assert result.regime == Regime.BOUND
        assert result.t_factorize is None
        assert np.all(np.sin(result.theta) > 0.5)

    def test_strong_collapse_factorizes(self):
        result = simulate_competition(np.pi / 2, 0.0, 5.0, 10.0, dt=1e-3)
        assert result.regime == Regime.FACTORIZED
        assert result.theta_monotone
        assert 0.0 < result.t_factorize < 1.0
        assert result.phi_final == np.pi / 2

    def test_negative_eta_runs_to_other_pole(self):
        result = simulate_competition(np.pi / 2, 0.0, -5.0, 10.0, dt=1e-3)
        assert result.regime == Regime.FACTORIZED
        assert result.theta[-1] > np.pi / 2
        assert result.phi_final == -np.pi / 2

    @pytest.mark.slow
    @pytest.mark.parametrize("eta, regime", [(0.999, Regime.BOUND), (1.001, Regime.FACTORIZED)])
    def test_regime_flips_at_the_coupling(self, eta, regime):
        result = simulate_competition(np.pi / 2, 0.0, eta, 1000.0, dt=1e-2)
        assert result.regime == regime
        if regime == Regime.FACTORIZED:
            assert result.t_factorize < 1000.0
            assert result.phi_final == np.pi / 2

    def test_noise_needs_stream(self):
        with pytest.raises(ValueError):
            simulate_competition(np.pi / 2, 0.0, 2.0, 10.0, noise=True)

    def test_noise_counts_plays(self):
        result = simulate_competition(
            np.pi / 2, 0.0, 2.0, 20.0, dt=1e-3, noise=True, rng=RngStream(master_seed=1, stream_index=0)
        )
        assert result.plays >= 1
        assert result.invariant_drift is None
