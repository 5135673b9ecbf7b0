import logging
from typing import Tuple

import numpy as np

from models.kaon import KaonComparison, KaonParams, KaonSensitivity
from services.competition import induced_phase

logger = logging.getLogger(__name__)

CLAIM_RANGE = (0.95, 1.25)
FINITE_DIFFERENCE_STEP = 1e-4


def kaon_eta(p: KaonParams) -> float:
    """
    Collapse strength in eV: the collapse time t0 = tau_KL / branching is pi / eta
    (hbar = 1), so eta = pi hbar / t0. The sign is free; this returns the positive root.
    """
    t0 = p.tau_kl / p.branching_semileptonic
    return float(np.pi * p.hbar / t0)


def kaon_delta(eta: float, gamma: complex) -> complex:
    """Induced CP phase arcsin(eta / gamma); -eta gives the negated phase."""
    return induced_phase(eta, gamma)


def compare_experiment(delta_theory: complex, p: KaonParams, eta: float = float("nan")) -> KaonComparison:
    """Compare magnitudes with delta_exp = 2 i epsilon_exp."""
    delta_exp = 2j * p.epsilon_exp
    ratio = abs(delta_theory) / abs(delta_exp)
    return KaonComparison(
        eta_ev=eta,
        delta_theory=delta_theory,
        delta_exp=delta_exp,
        delta_theory_abs=abs(delta_theory),
        delta_exp_abs=abs(delta_exp),
        ratio=ratio,
        within_claim=CLAIM_RANGE[0] <= ratio <= CLAIM_RANGE[1],
    )


def kaon_pipeline(p: KaonParams) -> Tuple[KaonComparison, KaonComparison]:
    """eta -> delta -> comparison, for +eta and -eta."""
    eta = kaon_eta(p)
    comparisons = tuple(compare_experiment(kaon_delta(sign * eta, p.gamma), p, sign * eta) for sign in (1, -1))
    logger.info(f"Kaon: eta = {eta:.6g} eV, |delta| = {comparisons[0].delta_theory_abs:.6g}, ratio = {comparisons[0].ratio:.4f}")
    return comparisons


def _abs_delta(p: KaonParams) -> float:
    return abs(kaon_delta(kaon_eta(p), p.gamma))


def sensitivity(p: KaonParams, step: float = FINITE_DIFFERENCE_STEP) -> KaonSensitivity:
    """
    Central finite differences of |delta| with respect to the branching ratio and
    the K_L lifetime, also given as elasticities d ln|delta| / d ln x.
    """
    base = _abs_delta(p)

    def derivative(field: str) -> float:
        value = getattr(p, field)
        h = step * value
        up = _abs_delta(p.copy(update={field: value + h}))
        down = _abs_delta(p.copy(update={field: value - h}))
        return (up - down) / (2.0 * h)

    d_branching = derivative("branching_semileptonic")
    d_tau = derivative("tau_kl")
    return KaonSensitivity(
        d_delta_d_branching=d_branching,
        d_delta_d_tau=d_tau,
        elasticity_branching=d_branching * p.branching_semileptonic / base,
        elasticity_tau=d_tau * p.tau_kl / base,
    )
