from models.dynamics import RngStream
from models.experiment import ExperimentConfig, ExperimentName, ExperimentResult
from routers.base import ExperimentRouter
from services.properties import run_checks

router = ExperimentRouter(tags=["properties"])

COLUMNS = ["property", "samples", "max_deviation", "tolerance", "passed"]


@router.experiment(ExperimentName.PROPS)
def props(config: ExperimentConfig) -> ExperimentResult:
    """
    Verificación aleatoria de las propiedades algebraicas y dinámicas
    """
    rng = RngStream(master_seed=config.seed, stream_index=0).generator
    rows = run_checks(rng, config.trajectories, config.tolerances)
    failed = [row[0] for row in rows if not row[4]]
    return ExperimentResult(
        columns=COLUMNS,
        rows=rows,
        summary={"checks": len(rows), "failed": failed, "passed": not failed},
        passed=not failed,
    )
