import logging

import numpy as np

from models.experiment import ExperimentConfig, ExperimentName, ExperimentResult
from models.highdim import BisectionMode, SubspaceFilter
from routers.base import ExperimentRouter
from services.exceptions import ConfigError
from services.highdim import (
    bisection_collapse,
    bisection_ensemble,
    large_n_ratio,
    termination_time_hyp,
    termination_time_quad,
)

logger = logging.getLogger(__name__)

router = ExperimentRouter(tags=["highdim"])

COLUMNS = ["n", "m", "eta_t0_quadrature", "eta_t0_hypergeometric", "abs_diff"]
DEFAULT_NS = [2, 4, 8, 16]
LARGE_NS = [64, 256, 1024]
BISECTION_NS = [2, 4, 8, 16]


def _splits(n: int, m):
    if m is not None:
        return [m] if m < n else []
    return sorted({1, n // 2})


@router.experiment(ExperimentName.HIGHDIM)
def highdim(config: ExperimentConfig) -> ExperimentResult:
    """
    Tiempos de terminación por cuadratura e hipergeométrica, y reducción por bisección
    """
    eta = abs(config.eta)
    tolerance = config.tolerance("highdim", 1e-6)
    rows = []
    for n in [config.n] if config.n else DEFAULT_NS:
        for m in _splits(n, config.m):
            f = SubspaceFilter(n=n, m=m, eta=eta)
            quadrature = eta * termination_time_quad(f)
            hypergeometric = eta * termination_time_hyp(f)
            rows.append([n, m, quadrature, hypergeometric, abs(quadrature - hypergeometric)])
    if not rows:
        raise ConfigError(f"m = {config.m} is not smaller than any n in {DEFAULT_NS}")
    max_diff = max(row[4] for row in rows)

    deterministic = {}
    for n in BISECTION_NS:
        total = bisection_collapse(n, eta, mode=BisectionMode.DETERMINISTIC).total_time
        deterministic[str(n)] = total
    bisection_ok = all(
        abs(total - np.log2(int(n)) * np.pi / (2.0 * eta)) <= tolerance for n, total in deterministic.items()
    )
    noisy = bisection_ensemble(8, eta, config.trajectories, config.seed, config.threads)
    noisy_ok = 3 * np.pi / (2.0 * eta) * (1.0 - 1e-12) <= noisy.mean <= 3 * np.pi / eta

    summary = {
        "max_abs_diff": max_diff,
        "bisection_deterministic": deterministic,
        "bisection_noisy_n8_mean": noisy.mean,
        "bisection_noisy_n8_bracket": [3 * np.pi / (2.0 * eta), 3 * np.pi / eta],
    }
    if not config.n:
        summary["large_n_ratio"] = {str(r.n): r.ratio for r in large_n_ratio(LARGE_NS)}
    passed = max_diff <= tolerance and bisection_ok and noisy_ok
    summary["passed"] = passed
    logger.info(f"Highdim: max |quadrature - hypergeometric| = {max_diff:.3e}")
    return ExperimentResult(columns=COLUMNS, rows=rows, summary=summary, passed=passed)
