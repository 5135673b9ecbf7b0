import numpy as np
import pytest
from pydantic import ValidationError

from models.competition import BlochPoint, SpinSpinCoupling
from models.dynamics import MeasurementOperator, PlayRecord, RngStream
from models.experiment import ExperimentConfig, ExperimentName, OutputFormat
from models.highdim import DiagonalOccupation, SubspaceFilter
from models.state import BipartiteState
from services.collapse_dynamics import rhs_modified
from services.competition import coupled_rhs


class TestBipartiteState:
    def test_rejects_unnormalized(self):
        with pytest.raises(ValidationError):
            BipartiteState(entries=np.eye(2))

    def test_rejects_non_square(self):
        with pytest.raises(ValidationError):
            BipartiteState(entries=np.ones((2, 3)) / np.sqrt(6))

    def test_from_matrix_normalizes(self):
        state = BipartiteState.from_matrix(np.eye(2))
        assert state.norm() == pytest.approx(1.0)
        assert state.dim == 2

    def test_entries_are_read_only(self):
        state = BipartiteState.from_alpha(0.5)
        with pytest.raises(ValueError):
            state.entries[0, 0] = 1.0

    def test_pairs(self):
        state = BipartiteState.from_matrix([[1.0, 1j], [0.0, 0.5]])
        restored = BipartiteState.from_pairs(state.to_pairs())
        np.testing.assert_array_equal(restored.entries, state.entries)


class TestMeasurementOperator:
    def test_rejects_non_hermitian(self):
        with pytest.raises(ValidationError):
            MeasurementOperator(lambda1=[[0, 1], [0, 0]], lambda2=np.zeros((2, 2)), eta=1.0)

    def test_rejects_trace(self):
        with pytest.raises(ValidationError):
            MeasurementOperator(lambda1=np.eye(2), lambda2=np.zeros((2, 2)), eta=1.0)

    def test_with_sign(self):
        m = MeasurementOperator.canonical(2.0).with_sign(-1)
        assert m.eta == -2.0
        np.testing.assert_allclose(m.lambda1, np.diag([-1.0, 1.0]))

    def test_rotation_keeps_trace(self, rng):
        from services.state_algebra import random_unitary

        a = random_unitary(rng)
        m = MeasurementOperator.canonical(1.0).rotated(a, np.eye(2))
        assert np.trace(m.lambda1) == pytest.approx(0.0, abs=1e-14)


class TestPlayRecord:
    def test_rejects_zero_sign(self):
        with pytest.raises(ValidationError):
            PlayRecord(sign=0, stake=0.25, tau_start=0, tau_end=0.25, t_start=0, t_end=1, won=True)

    def test_rejects_stake_above_half(self):
        with pytest.raises(ValidationError):
            PlayRecord(sign=1, stake=0.75, tau_start=0, tau_end=0.25, t_start=0, t_end=1, won=True)


class TestRngStream:
    def test_same_key_same_draws(self):
        a, b = RngStream(master_seed=7, stream_index=3), RngStream(master_seed=7, stream_index=3)
        assert [a.draw_sign() for _ in range(64)] == [b.draw_sign() for _ in range(64)]

    def test_streams_are_independent(self):
        a, b = RngStream(master_seed=7, stream_index=0), RngStream(master_seed=7, stream_index=1)
        assert [a.draw_sign() for _ in range(64)] != [b.draw_sign() for _ in range(64)]


class TestSpinSpinCoupling:
    def test_tensor_matches_coupled_equations(self):
        point = BlochPoint(theta=1.1, phi=0.4)
        c00, c11 = point.amplitudes()
        r = SpinSpinCoupling(gamma=1.5).tensor()
        derivative = rhs_modified(point.to_state(), MeasurementOperator.canonical(0.8), r=r)
        expected = coupled_rhs(c00, c11, 0.8, 1.5)
        np.testing.assert_allclose(np.diag(derivative), expected, atol=1e-14)
        assert derivative[0, 1] == 0 and derivative[1, 0] == 0


class TestBlochPoint:
    def test_wraps_phase(self):
        assert BlochPoint(theta=1.0, phi=1.5 * np.pi).phi == pytest.approx(-0.5 * np.pi)

    def test_rejects_pole(self):
        with pytest.raises(ValidationError):
            BlochPoint(theta=0.0, phi=0.0)

    def test_amplitudes(self):
        point = BlochPoint.from_amplitudes(np.sqrt(0.25), np.sqrt(0.75) * np.exp(0.3j))
        assert point.theta == pytest.approx(2 * np.pi / 3)
        assert point.phi == pytest.approx(0.3)


class TestSubspaceFilter:
    def test_rejects_empty_split(self):
        with pytest.raises(ValidationError):
            SubspaceFilter(n=4, m=4, eta=1.0)

    def test_matrix_is_traceless(self):
        assert np.trace(SubspaceFilter(n=5, m=2, eta=1.3).matrix()) == pytest.approx(0.0, abs=1e-15)

    def test_two_levels_match_canonical_operator(self):
        f = SubspaceFilter(n=2, m=1, eta=0.7)
        np.testing.assert_allclose(f.matrix(), MeasurementOperator.canonical(0.7).lambda1)
        np.testing.assert_allclose(f.generator(), f.matrix())


class TestDiagonalOccupation:
    def test_rejects_bad_sum(self):
        with pytest.raises(ValidationError):
            DiagonalOccupation(y=[0.5, 0.6])

    def test_uniform(self):
        assert DiagonalOccupation.uniform(4).n == 4


class TestExperimentConfig:
    def test_parses_complex_gamma(self):
        config = ExperimentConfig(experiment="kaon", gamma="1+2i")
        assert config.gamma == complex(1, 2)

    def test_parses_eta_list(self):
        config = ExperimentConfig(experiment="competition", etas="0.5, 1.5,5")
        assert config.etas == [0.5, 1.5, 5.0]

    def test_default_formats(self):
        assert ExperimentConfig(experiment="kaon").format == OutputFormat.JSON
        assert ExperimentConfig(experiment="born").format == OutputFormat.CSV

    @pytest.mark.parametrize(
        "values",
        [
            {"experiment": "born", "alpha": 1.0},
            {"experiment": "born", "eta": 0.0},
            {"experiment": "competition", "gamma": "1i"},
            {"experiment": "competition", "theta0": 0.0},
            {"experiment": "highdim", "n": 4, "m": 4},
            {"experiment": "highdim", "n": 4, "m": 6},
            {"experiment": "highdim", "m": 0},
            {"experiment": "born", "trajectories": 0},
            {"experiment": "born", "seed": -1},
            {"experiment": "born", "dt": 0.0},
            {"experiment": "unknown"},
        ],
    )
    def test_rejects_invalid(self, values):
        with pytest.raises(ValidationError):
            ExperimentConfig(**values)

    def test_echo_is_json_safe(self):
        config = ExperimentConfig(experiment=ExperimentName.COMPETITION, gamma=2.0, threads=4)
        echo = config.echo()
        assert echo["experiment"] == "competition"
        assert echo["gamma"] == [2.0, 0.0]
        assert "threads" not in echo
