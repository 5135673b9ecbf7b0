import json

import numpy as np
import pytest

from models.experiment import ExperimentConfig, ExperimentName, ExperimentResult
from routers import born
from routers.base import ExperimentRouter
from services.exceptions import ConfigError, ConvergenceError
from services.experiment_service import ExperimentService


class TestExperimentRouter:
    def test_registers_handlers(self):
        router = ExperimentRouter(tags=["test"])

        @router.experiment(ExperimentName.KAON)
        def handler(config):
            return ExperimentResult()

        assert router.routes == {ExperimentName.KAON: handler}

    def test_rejects_duplicate(self):
        router = ExperimentRouter()
        router.experiment(ExperimentName.KAON)(lambda config: ExperimentResult())
        with pytest.raises(ValueError):
            router.experiment(ExperimentName.KAON)(lambda config: ExperimentResult())


class TestExperimentService:
    def test_rejects_duplicate_router(self, service):
        with pytest.raises(ValueError):
            service.include_router(born.router)

    def test_missing_handler(self, output_service):
        with pytest.raises(ConfigError):
            ExperimentService("test", output_service).execute(ExperimentConfig(experiment="kaon"))

    def test_propagates_numerical_errors(self, output_service):
        router = ExperimentRouter()

        @router.experiment(ExperimentName.PROPS)
        def failing(config):
            raise ConvergenceError("no convergence")

        service = ExperimentService("test", output_service)
        service.include_router(router)
        with pytest.raises(ConvergenceError):
            service.run(ExperimentConfig(experiment="props"))

    def test_run_writes_manifest(self, service, tmp_path):
        manifest, data_path = service.run(ExperimentConfig(experiment="kaon"))
        assert data_path == tmp_path / "kaon.json"
        assert manifest.status == "ok"
        assert manifest.data_file == "kaon.json"
        stored = json.loads((tmp_path / "kaon.manifest.json").read_text())
        assert stored["version"] == "test"
        assert stored["summary"]["passed"] is True


class TestBorn:
    def test_ensemble(self, service):
        config = ExperimentConfig(experiment="born", alpha=0.25, trajectories=400, seed=3, threads=1)
        result = service.execute(config)
        assert result.columns == ["index", "outcome", "plays", "collapse_time"]
        assert [row[0] for row in result.rows] == list(range(400))
        assert set(result.summary) >= {"z_score", "binomial_sigma", "outcome_frequencies"}
        assert result.passed == (abs(result.summary["z_score"]) <= 3)

    def test_output_does_not_depend_on_threads(self, service, tmp_path):
        paths = []
        for threads in (1, 2):
            out = tmp_path / f"born-{threads}.csv"
            config = ExperimentConfig(experiment="born", alpha=0.3, trajectories=200, seed=11, threads=threads, out_path=out)
            service.run(config)
            paths.append(out)
        first, second = (path.read_text().splitlines()[1:] for path in paths)
        assert first == second


class TestCollapseTime:
    @pytest.mark.parametrize("eta", [1.0, 2.0])
    def test_bell_state_mean(self, service, eta):
        config = ExperimentConfig(experiment="collapse-time", alpha=0.5, eta=eta, trajectories=200, threads=1)
        result = service.execute(config)
        assert result.summary["mean_collapse_time"] == pytest.approx(np.pi / (2 * eta))
        assert result.summary["deterministic_time_plus"] == pytest.approx(np.pi / (2 * eta))
        assert result.summary["in_bracket"]
        assert result.passed


class TestCompetition:
    def test_sweep(self, service):
        config = ExperimentConfig(experiment="competition", etas="0.5,5", tmax=10.0, dt=1e-3)
        result = service.execute(config)
        assert [row[3] for row in result.rows] == ["bound", "factorized"]
        assert result.rows[1][5] == pytest.approx(np.pi / 2, abs=1e-3)
        assert result.summary["ion_trap_delay_ordinary_s"] == pytest.approx(7.96e-9, rel=1e-3)
        assert result.passed


class TestKaon:
    def test_record(self, service):
        result = service.execute(ExperimentConfig(experiment="kaon"))
        assert result.record["ratio"] == pytest.approx(1.178, abs=2e-3)
        assert result.summary["elasticity_tau"] == pytest.approx(-1.0, abs=1e-3)
        assert result.passed

    def test_overrides_change_the_ratio(self, service):
        base = service.execute(ExperimentConfig(experiment="kaon")).summary["ratio"]
        doubled = service.execute(ExperimentConfig(experiment="kaon", gamma="7e-6+7e-6i"))
        assert doubled.summary["gamma"] == [7e-6, 7e-6]
        assert doubled.summary["ratio"] == pytest.approx(base / 2, rel=1e-4)
        assert not doubled.passed
        slower = service.execute(ExperimentConfig(experiment="kaon", tau_kl=2 * 5.17e-8))
        assert slower.summary["ratio"] == pytest.approx(base / 2, rel=1e-4)

    def test_invalid_branching(self, service):
        with pytest.raises(ConfigError):
            service.execute(ExperimentConfig(experiment="kaon", branching=1.5))


class TestHighdim:
    def test_single_filter(self, service):
        config = ExperimentConfig(experiment="highdim", n=4, m=2, trajectories=20, threads=1)
        result = service.execute(config)
        assert len(result.rows) == 1
        n, m, quadrature, hypergeometric, diff = result.rows[0]
        assert (n, m) == (4, 2)
        assert quadrature == pytest.approx(np.pi / 2, abs=1e-8)
        assert diff < 1e-8
        assert result.summary["bisection_deterministic"]["8"] == pytest.approx(3 * np.pi / 2, abs=1e-8)
        assert "large_n_ratio" not in result.summary
        assert result.passed


class TestProps:
    def test_all_properties_hold(self, service):
        result = service.execute(ExperimentConfig(experiment="props", trajectories=25, seed=1))
        assert result.columns == ["property", "samples", "max_deviation", "tolerance", "passed"]
        assert result.summary["failed"] == []
        assert result.passed
