"""
Collapse under subspace filters in n dimensions: the linear-in-tau flow of the
diagonal occupations, its clock by quadrature or hypergeometric closed form, and
the log2(n) bisection of a maximally entangled state.
"""
import logging
import warnings
from functools import partial
from typing import Iterable, List, Optional

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from models.dynamics import RngStream
from models.experiment import SummaryStatistics
from models.highdim import (
    BisectionMode,
    BisectionResult,
    DiagonalOccupation,
    LargeNRatio,
    StageRecord,
    SubspaceFilter,
)
from services.collapse_dynamics import collapse_fortune
from services.exceptions import ConvergenceError, DomainError
from services.parallel import parallel_map
from services.service_provider import get_quadrature_cache
from services.state_algebra import EPS_FACT
from services.statistics import summarize

logger = logging.getLogger(__name__)

QUAD_RELATIVE_TOLERANCE = 1e-12
QUAD_ACCEPT_TOLERANCE = 1e-8
SERIES_TOLERANCE = 1e-12
SERIES_MAX_TERMS = 2_000_000
EULER_THRESHOLD = 0.9
TIE_TOLERANCE = 1e-14


def lambda_matrix(f: SubspaceFilter) -> np.ndarray:
    return f.matrix()


def termination_tau(y0: DiagonalOccupation, f: SubspaceFilter) -> float:
    """(1 - m/n) min_{j >= m} alpha_j"""
    _check_dimension(y0, f)
    smallest = float(np.min(y0.y[f.m:]))
    if smallest <= 0.0:
        raise DomainError("occupation is already factorized along the filter")
    return (1.0 - f.m / f.n) * smallest


def highdim_flow_tau(y0: DiagonalOccupation, f: SubspaceFilter, tau: float) -> DiagonalOccupation:
    """y_j = alpha_j + n tau/m for j < m, alpha_j - n tau/(n - m) otherwise."""
    tau_end = termination_tau(y0, f)
    if tau < 0.0 or tau > tau_end * (1.0 + 1e-15):
        raise DomainError(f"tau must lie in [0, {tau_end:.12g}]")
    shift = np.where(np.arange(f.n) < f.m, f.n * tau / f.m, -f.n * tau / (f.n - f.m))
    return DiagonalOccupation(y=np.clip(y0.y + shift, 0.0, 1.0))


def time_of_tau(y0: DiagonalOccupation, f: SubspaceFilter, tau: float) -> float:
    """
    Time at which the filter flow reaches tau: eta t = 2 int_0^tau prod_j y_j^(-1/n) dtau'.

    The k smallest (tied) occupations of the shrinking block vanish linearly at the end
    point; the substitution u = (tau_end - tau')^(1 - k/n) cancels that power exactly.

    Raises:
        ConvergenceError: if the quadrature error estimate exceeds 1e-8 relative.
    """
    if f.eta == 0:
        raise ValueError("eta must be non-zero")
    tau_end = termination_tau(y0, f)
    if tau < 0.0 or tau > tau_end * (1.0 + 1e-15):
        raise DomainError(f"tau must lie in [0, {tau_end:.12g}]")
    if tau == 0.0:
        return 0.0

    n, m = f.n, f.m
    shrinking = y0.y[m:]
    gap = shrinking - shrinking.min()
    tied = gap <= TIE_TOLERANCE
    p = np.count_nonzero(tied) / n
    exponent = 1.0 / (1.0 - p)
    growing = y0.y[:m]
    rest = gap[~tied]
    ratio = n / (n - m)

    def integrand(u):
        # w = tau_end - tau'
        w = u ** exponent
        s = tau_end - w
        log_terms = np.sum(np.log(growing + n * s / m)) + np.sum(np.log(rest + ratio * w))
        return np.exp(-(log_terms + p * n * np.log(ratio)) / n) * exponent

    lower = (tau_end - min(tau, tau_end)) ** (1.0 - p)
    upper = tau_end ** (1.0 - p)
    with warnings.catch_warnings():
        warnings.simplefilter("error", IntegrationWarning)
        try:
            value, error = quad(integrand, lower, upper, epsabs=0.0, epsrel=QUAD_RELATIVE_TOLERANCE, limit=500)
        except IntegrationWarning as exc:
            logger.warning(f"Quadrature warning for n={n}, m={m}: {exc}")
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", IntegrationWarning)
                value, error = quad(integrand, lower, upper, epsabs=0.0, epsrel=QUAD_RELATIVE_TOLERANCE, limit=500)
    if error > QUAD_ACCEPT_TOLERANCE * abs(value):
        raise ConvergenceError(f"quadrature error {error:.3e} for n={n}, m={m}")
    return 2.0 * value / abs(f.eta)


def hyp2f1_series(a: float, b: float, c: float, z: float, tol: float = SERIES_TOLERANCE) -> float:
    """
    Gauss hypergeometric F(a, b; c; z) for 0 <= z < 1 by direct summation.

    Above z = 0.9 the series of Euler's transform (1 - z)^(c-a-b) F(c-a, c-b; c; z)
    is summed instead, which converges faster when c - a - b < 0.

    Raises:
        ConvergenceError: if the tail is still above tol after SERIES_MAX_TERMS terms.
    """
    if not 0.0 <= z < 1.0:
        raise ValueError(f"series needs 0 <= z < 1, got {z}")
    prefactor = 1.0
    if z > EULER_THRESHOLD:
        prefactor = (1.0 - z) ** (c - a - b)
        a, b = c - a, c - b

    total, term = 1.0, 1.0
    for k in range(SERIES_MAX_TERMS):
        term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z
        total += term
        # geometric bound on the remaining tail
        if abs(term) * z / (1.0 - z) <= tol * abs(total):
            return prefactor * total
    raise ConvergenceError(f"hypergeometric series did not converge (a={a}, b={b}, c={c}, z={z})")


def termination_time_hyp(f: SubspaceFilter) -> float:
    """
    Termination time from the uniform occupation:
    eta t0 = 2 (1 - m/n) F(1, 1; 1 + m/n; 1 - m/n).
    """
    if f.eta == 0:
        raise ValueError("eta must be non-zero")
    x = f.m / f.n
    return 2.0 * (1.0 - x) * hyp2f1_series(1.0, 1.0, 1.0 + x, 1.0 - x) / abs(f.eta)


def termination_time_quad(f: SubspaceFilter, y0: Optional[DiagonalOccupation] = None) -> float:
    y0 = y0 or DiagonalOccupation.uniform(f.n)
    return time_of_tau(y0, f, termination_tau(y0, f))


def large_n_ratio(ns: Iterable[int], m: int = 1) -> List[LargeNRatio]:
    """eta t0 / n for filters (n, m) from the uniform state."""
    ratios = []
    for n in ns:
        f = SubspaceFilter(n=n, m=m, eta=1.0)
        hyp = termination_time_hyp(f)
        quadrature = termination_time_quad(f)
        ratios.append(LargeNRatio(n=n, eta_t0_hypergeometric=hyp, eta_t0_quadrature=quadrature, ratio=hyp / n))
        logger.info(f"n={n}, m={m}: eta t0 = {hyp:.12g}, eta t0 / n = {hyp / n:.6g}")
    return ratios


def _check_dimension(y0: DiagonalOccupation, f: SubspaceFilter) -> None:
    if y0.n != f.n:
        raise ValueError(f"occupation has {y0.n} entries, filter has n = {f.n}")


def _stage_time(dimension: int, eta: float) -> float:
    cache = get_quadrature_cache()
    return cache.get_or_compute(
        ("stage", dimension, eta),
        lambda: termination_time_quad(SubspaceFilter(n=dimension, m=dimension // 2, eta=eta)),
    )


def bisection_collapse(
    n: int,
    eta: float,
    rng: Optional[RngStream] = None,
    mode: BisectionMode = BisectionMode.DETERMINISTIC,
    eps_fact: float = EPS_FACT,
) -> BisectionResult:
    """
    Reduce a maximally entangled n x n state (n = 2^k) by k successive halving filters.

    Deterministic stages take the flow time of the m = n'/2 filter on the current
    dimension n'. Noisy stages play the two-fortune game on the fortunes of the
    two halves.
    """
    if n < 2 or n & (n - 1):
        raise ValueError(f"n must be a power of two >= 2, got {n}")
    mode = BisectionMode(mode)
    if mode == BisectionMode.NOISY and rng is None:
        raise ValueError("noisy bisection needs a random stream")

    stages: List[StageRecord] = []
    dimension, total = n, 0.0
    while dimension > 1:
        if mode == BisectionMode.DETERMINISTIC:
            time, plays, outcome = _stage_time(dimension, eta), 0, 0
        else:
            outcome, plays, time = collapse_fortune(0.5, eta, rng, eps_fact)
        stages.append(StageRecord(
            stage=len(stages),
            dimension=dimension,
            surviving_dimension=dimension // 2,
            time=time,
            plays=plays,
            outcome=outcome,
        ))
        total += time
        dimension //= 2
        logger.debug(f"Bisection stage {len(stages)}: dimension {dimension}, t = {total:.6g}")

    return BisectionResult(
        n=n, eta=eta, mode=mode, total_time=total, stages=stages,
        seed=rng.master_seed if rng is not None else None,
    )


def _noisy_total(index: int, n: int, eta: float, seed: int) -> float:
    stream = RngStream(master_seed=seed, stream_index=index)
    return bisection_collapse(n, eta, stream, BisectionMode.NOISY).total_time


def bisection_ensemble(n: int, eta: float, count: int, seed: int, threads: int = 1) -> SummaryStatistics:
    """Statistics of the noisy total reduction time over `count` seeded runs."""
    if count < 1:
        raise ValueError("count must be at least 1")
    worker = partial(_noisy_total, n=n, eta=eta, seed=seed)
    return summarize(parallel_map(worker, range(count), threads))
