import logging

from models.dynamics import EnsembleStatistics, MeasurementOperator
from models.experiment import ExperimentConfig, ExperimentName, ExperimentResult
from models.state import BipartiteState
from routers.base import ExperimentRouter
from services.collapse_dynamics import born_ensemble
from services.state_algebra import EPS_FACT
from services.statistics import binomial_sigma

logger = logging.getLogger(__name__)

router = ExperimentRouter(tags=["collapse"])

COLUMNS = ["index", "outcome", "plays", "collapse_time"]


def run_ensemble(config: ExperimentConfig) -> EnsembleStatistics:
    state = BipartiteState.from_alpha(config.alpha)
    return born_ensemble(
        state,
        MeasurementOperator.canonical(config.eta),
        count=config.trajectories,
        seed=config.seed,
        dt=config.dt,
        threads=config.threads,
        eps_fact=config.tolerance("eps_fact", EPS_FACT),
    )


def ensemble_rows(stats: EnsembleStatistics):
    return [[r.index, r.outcome, r.plays, r.collapse_time] for r in stats.records]


@router.experiment(ExperimentName.BORN)
def born(config: ExperimentConfig) -> ExperimentResult:
    """
    Frecuencia de colapso hacia y0 = 1 frente a la fortuna inicial alpha
    """
    stats = run_ensemble(config)
    frequency = stats.outcome_frequencies["0"]
    sigma = binomial_sigma(config.alpha, stats.count)
    z_score = (frequency - config.alpha) / sigma
    passed = abs(z_score) <= config.tolerance("born_sigma", 3.0)
    logger.info(f"Born check: P(y0 -> 1) = {frequency:.5f} vs alpha = {config.alpha} ({z_score:+.2f} sigma)")
    return ExperimentResult(
        columns=COLUMNS,
        rows=ensemble_rows(stats),
        summary={
            "alpha": config.alpha,
            "trajectories": stats.count,
            "outcome_frequencies": stats.outcome_frequencies,
            "binomial_sigma": sigma,
            "z_score": z_score,
            "mean_play_count": stats.mean_play_count,
            "mean_collapse_time": stats.mean_collapse_time,
            "passed": passed,
        },
        passed=passed,
    )
