import logging

from models.dynamics import RngStream
from models.experiment import ExperimentConfig, ExperimentName, ExperimentResult
from models.competition import Regime
from routers.base import ExperimentRouter
from services.competition import ion_trap_delay, linewidth_from_frequency, simulate_competition
from services.state_algebra import EPS_FACT

logger = logging.getLogger(__name__)

router = ExperimentRouter(tags=["competition"])

COLUMNS = ["eta", "theta0", "phi0", "regime", "t_factorize", "phi_final", "invariant_drift"]
ION_TRAP_LINEWIDTH_HZ = 20e6


@router.experiment(ExperimentName.COMPETITION)
def competition(config: ExperimentConfig) -> ExperimentResult:
    """
    Barrido en eta del flujo polar con acoplamiento espín-espín
    """
    gamma = config.gamma.real
    noise = config.noise
    rows, regimes = [], {}
    passed = True
    for index, eta in enumerate(config.etas or [config.eta]):
        result = simulate_competition(
            config.theta0,
            config.phi0,
            eta,
            config.tmax,
            dt=config.dt,
            gamma=gamma,
            noise=noise,
            rng=RngStream(master_seed=config.seed, stream_index=index) if noise else None,
            eps_fact=config.tolerance("eps_fact", EPS_FACT),
        )
        rows.append(result.row())
        regimes[repr(eta)] = result.regime.value
        if abs(eta) > gamma and not noise:
            passed = passed and result.theta_monotone and result.regime != Regime.BOUND
    logger.info(f"Competition regimes: {regimes}")
    return ExperimentResult(
        columns=COLUMNS,
        rows=rows,
        summary={
            "gamma": gamma,
            "noise": noise,
            "regimes": regimes,
            "ion_trap_delay_ordinary_s": ion_trap_delay(linewidth_from_frequency(ION_TRAP_LINEWIDTH_HZ, "ordinary")),
            "ion_trap_delay_angular_s": ion_trap_delay(linewidth_from_frequency(ION_TRAP_LINEWIDTH_HZ, "angular")),
            "passed": passed,
        },
        passed=passed,
    )
