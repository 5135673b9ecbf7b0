from pydantic import ValidationError

from models.experiment import ExperimentConfig, ExperimentName, ExperimentResult
from models.kaon import KaonParams
from routers.base import ExperimentRouter
from services.exceptions import ConfigError
from services.kaon import kaon_pipeline, sensitivity

router = ExperimentRouter(tags=["kaon"])


@router.experiment(ExperimentName.KAON)
def kaon(config: ExperimentConfig) -> ExperimentResult:
    """
    Fase CP inducida para el kaón neutro y comparación con el experimento
    """
    overrides = {
        "gamma": config.gamma,
        "tau_kl": config.tau_kl,
        "branching_semileptonic": config.branching,
    }
    try:
        params = KaonParams(**{key: value for key, value in overrides.items() if value is not None})
    except ValidationError as e:
        raise ConfigError(f"invalid kaon parameters: {e}")
    plus, minus = kaon_pipeline(params)
    report = sensitivity(params)
    return ExperimentResult(
        record=plus.record(),
        summary={
            "gamma": [params.gamma.real, params.gamma.imag],
            "tau_kl": params.tau_kl,
            "branching_semileptonic": params.branching_semileptonic,
            "ratio": plus.ratio,
            "within_claim": plus.within_claim,
            "delta_abs_minus_eta": minus.delta_theory_abs,
            "elasticity_branching": report.elasticity_branching,
            "elasticity_tau": report.elasticity_tau,
            "passed": plus.within_claim,
        },
        passed=plus.within_claim,
    )
