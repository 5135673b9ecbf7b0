"""
Randomized property sweeps over the algebra and the dynamics. Each check returns
the largest deviation found over its samples.
"""
import logging
from typing import Callable, Dict, List, NamedTuple

import numpy as np

from models.competition import BlochPoint
from models.dynamics import HamiltonianPair, MeasurementOperator
from models.highdim import DiagonalOccupation, SubspaceFilter
from models.state import BipartiteState
from services import collapse_dynamics, competition, highdim
from services.state_algebra import (
    TIME_REVERSAL_PHASE_SIGN,
    apply_local,
    det_magnitude,
    hat,
    random_state,
    random_unitary,
    time_reversal,
)

logger = logging.getLogger(__name__)

MIN_DET = 1e-3


class PropertyCheck(NamedTuple):
    name: str
    check: Callable[[np.random.Generator, int], float]
    tolerance: float
    # upper bound on the sample count for expensive checks
    max_samples: int = 1_000_000


def _deviation(a, b) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def _random_matrix(rng: np.random.Generator, n: int = 2) -> np.ndarray:
    return random_state(rng, n, MIN_DET).entries


def _random_hermitian(rng: np.random.Generator, n: int = 2) -> np.ndarray:
    x = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return 0.5 * (x + x.conj().T)


def hat_duality(rng, samples):
    return max(_deviation(hat(hat(c)), c) for c in (_random_matrix(rng) for _ in range(samples)))


def hat_homogeneity(rng, samples):
    worst = 0.0
    for k in range(samples):
        c = _random_matrix(rng, 2 + k % 3)
        scale = complex(rng.normal(), rng.normal())
        worst = max(worst, _deviation(hat(scale * c), scale * hat(c)))
    return worst


def hat_automorphism(rng, samples):
    worst = 0.0
    for _ in range(samples):
        c1, c2 = _random_matrix(rng), _random_matrix(rng)
        worst = max(worst, _deviation(hat(c1 @ c2), hat(c1) @ hat(c2)))
    return worst


def hat_covariance(rng, samples):
    worst = 0.0
    for _ in range(samples):
        c = _random_matrix(rng)
        a, b = random_unitary(rng), random_unitary(rng)
        worst = max(worst, _deviation(hat(apply_local(a, c, b)), a @ hat(c) @ b))
    return worst


def time_reversal_identity(rng, samples):
    worst = 0.0
    for _ in range(samples):
        c = _random_matrix(rng)
        phase = np.exp(1j * TIME_REVERSAL_PHASE_SIGN * np.angle(np.linalg.det(c)))
        worst = max(worst, _deviation(hat(c), phase * time_reversal(c)))
    return worst


def det_bound(rng, samples):
    return max(max(0.0, det_magnitude(random_state(rng)) - 0.5) for _ in range(samples))


def rhs_norm_conservation(rng, samples):
    worst = 0.0
    for _ in range(samples):
        c = _random_matrix(rng)
        lambda1, lambda2 = _random_hermitian(rng), _random_hermitian(rng)
        lambda2 -= np.trace(lambda1 + lambda2).real / 2.0 * np.eye(2)
        m = MeasurementOperator(lambda1=lambda1, lambda2=lambda2, eta=1.0)
        h = HamiltonianPair(h1=_random_hermitian(rng), h2=_random_hermitian(rng))
        rhs = collapse_dynamics.rhs_modified(c, m, h)
        worst = max(worst, abs(np.trace(c.conj().T @ rhs + rhs.conj().T @ c)))
    return worst


def transfer_covariance(rng, samples):
    worst = 0.0
    m = MeasurementOperator.canonical(1.0)
    for _ in range(samples):
        c = _random_matrix(rng)
        a, b = random_unitary(rng), random_unitary(rng)
        z = collapse_dynamics.transfer_operator(c, m, 0.1)
        z_rotated = collapse_dynamics.transfer_operator(a @ c @ b, m.rotated(a, b), 0.1)
        worst = max(worst, _deviation(z_rotated, a @ z @ a.conj().T))
    return worst


def interaction_picture_norm(rng, samples):
    worst = 0.0
    for _ in range(samples):
        state = random_state(rng)
        h = HamiltonianPair(h1=_random_hermitian(rng), h2=_random_hermitian(rng))
        worst = max(worst, abs(collapse_dynamics.to_interaction_picture(state, h, 1.0).norm() - 1.0))
    return worst


def stationary_residual(rng, samples):
    return max(
        competition.stationary_residual(competition.stationary_state(eta), eta)
        for eta in (-0.9, -0.5, 0.0, 0.5, 0.9)
    )


def coupled_norm_derivative(rng, samples):
    worst = 0.0
    for _ in range(samples):
        amplitudes = rng.normal(size=2) + 1j * rng.normal(size=2)
        c00, c11 = amplitudes / np.linalg.norm(amplitudes)
        d00, d11 = competition.coupled_rhs(c00, c11, rng.uniform(-3, 3), rng.uniform(0.1, 3))
        worst = max(worst, abs((np.conj(c00) * d00 + np.conj(c11) * d11).real))
    return worst


def polar_chain_rule(rng, samples):
    """polar_rhs against coupled_rhs pushed through theta = 2 atan(|c11|/|c00|), phi = arg c11 - arg c00."""
    worst = 0.0
    for _ in range(samples):
        point = BlochPoint(theta=rng.uniform(0.1, np.pi - 0.1), phi=rng.uniform(-np.pi, np.pi))
        eta = rng.uniform(-3, 3)
        c00, c11 = point.amplitudes()
        d00, d11 = competition.coupled_rhs(c00, c11, eta)
        a, b = abs(c00), abs(c11)
        da = (np.conj(c00) * d00).real / a
        db = (np.conj(c11) * d11).real / b
        theta_dot = 2.0 * (a * db - b * da) / (a * a + b * b)
        phi_dot = (d11 / c11).imag - (d00 / c00).imag
        worst = max(worst, _deviation(competition.polar_rhs(point, eta), (theta_dot, phi_dot)))
    return worst


def highdim_reduction(rng, samples):
    worst = 0.0
    for _ in range(samples):
        alpha, eta = rng.uniform(0.05, 0.95), rng.uniform(0.5, 2.0)
        occupation = DiagonalOccupation(y=[alpha, 1.0 - alpha])
        f = SubspaceFilter(n=2, m=1, eta=eta)
        t = highdim.time_of_tau(occupation, f, highdim.termination_tau(occupation, f))
        worst = max(worst, abs(t - collapse_dynamics.termination_time(alpha, eta)))
    return worst


CHECKS: List[PropertyCheck] = [
    PropertyCheck("hat_duality", hat_duality, 1e-10),
    PropertyCheck("hat_homogeneity", hat_homogeneity, 1e-10),
    PropertyCheck("hat_automorphism", hat_automorphism, 1e-10),
    PropertyCheck("hat_covariance", hat_covariance, 1e-10),
    PropertyCheck("time_reversal_identity", time_reversal_identity, 1e-10),
    PropertyCheck("det_bound", det_bound, 1e-12),
    PropertyCheck("rhs_norm_conservation", rhs_norm_conservation, 1e-12),
    PropertyCheck("transfer_covariance", transfer_covariance, 1e-10),
    PropertyCheck("interaction_picture_norm", interaction_picture_norm, 1e-12),
    PropertyCheck("stationary_residual", stationary_residual, 1e-12, max_samples=5),
    PropertyCheck("coupled_norm_derivative", coupled_norm_derivative, 1e-14),
    PropertyCheck("polar_chain_rule", polar_chain_rule, 1e-10),
    PropertyCheck("highdim_reduction", highdim_reduction, 1e-10, max_samples=50),
]


def run_checks(rng: np.random.Generator, samples: int, tolerances: Dict[str, float] = None) -> List[List]:
    """Rows (property, samples, max_deviation, tolerance, passed) in a fixed order."""
    tolerances = tolerances or {}
    rows = []
    for check in CHECKS:
        count = min(samples, check.max_samples)
        tolerance = tolerances.get(check.name, check.tolerance)
        deviation = check.check(rng, count)
        passed = deviation < tolerance
        if not passed:
            logger.warning(f"Property {check.name} failed: deviation {deviation:.3e} > {tolerance:.1e}")
        rows.append([check.name, count, deviation, tolerance, passed])
    return rows
