"""
Competition between the collapse term and a spin-spin exchange coupling in the
diagonal cell c00|00> + c11|11>.
"""
import logging
from typing import List, Optional, Tuple

import numpy as np
from scipy import constants

from models.competition import BlochPoint, CompetitionResult, Regime
from models.dynamics import RngStream
from models.state import BipartiteState
from services.exceptions import DomainError
from services.integrator import integrate
from services.state_algebra import EPS_FACT, MatrixLike, as_matrix, inner

logger = logging.getLogger(__name__)

HBAR_EV_S = constants.physical_constants["reduced Planck constant in eV s"][0]
PLANCK_EV_S = constants.physical_constants["Planck constant in eV/Hz"][0]

# below this sin(theta) the polar flow is continued in s = ln tan(theta/2)
POLE_SWITCH = 1e-2
THETA_FLOOR = 1e-16
PHASE_MARGIN = 1e-6
MONOTONE_THRESHOLD = 1e-6
DEFAULT_DT = 1e-3
LOG_STEP = 1e-2


def coupled_rhs(c00: complex, c11: complex, eta: float, gamma: complex = 1.0) -> Tuple[complex, complex]:
    """
    Time derivatives of (c00, c11) under the collapse term plus the exchange coupling.

    Raises:
        DomainError: if either amplitude vanishes.
    """
    if c00 == 0 or c11 == 0:
        raise DomainError("coupled flow undefined at zero amplitude")
    magnitude = abs(c00 * c11)
    d00 = 0.5 * eta * magnitude / np.conj(c00) + 0.5j * gamma * c11
    d11 = -0.5 * eta * magnitude / np.conj(c11) + 0.5j * gamma * c00
    return complex(d00), complex(d11)


def polar_rhs(p: BlochPoint, eta: float, gamma: float = 1.0) -> Tuple[float, float]:
    """(dtheta/dt, dphi/dt) = (-eta + gamma sin phi, gamma cos phi cot theta)."""
    return _polar(p.theta, p.phi, eta, gamma)


def _polar(theta: float, phi: float, eta: float, gamma: float) -> Tuple[float, float]:
    sin_theta = np.sin(theta)
    if sin_theta <= 0.0:
        raise DomainError(f"polar flow undefined at the pole theta = {theta}")
    return -eta + gamma * np.sin(phi), gamma * np.cos(phi) * np.cos(theta) / sin_theta


def motion_invariant(p: BlochPoint, eta: float) -> float:
    """sin(theta) cos(phi) tan(pi/4 + phi/2)^eta, constant along the polar flow."""
    return _invariant(p.theta, p.phi, eta)


def _invariant(theta, phi, eta):
    if np.any(np.abs(phi) >= np.pi / 2):
        raise DomainError("motion invariant needs |phi| < pi/2")
    return np.sin(theta) * np.cos(phi) * np.tan(np.pi / 4 + phi / 2) ** eta


def stationary_state(eta: float, branch: int = 1) -> BipartiteState:
    """
    (|00> + e^{i phi}|11>)/sqrt(2) with sin(phi) = eta (units gamma = 1).

    branch = +1 gives phi = arcsin(eta), branch = -1 the second fixed point pi - arcsin(eta).
    The state is stationary up to a global phase rotating at (1/2) cos(phi).
    """
    if abs(eta) > 1.0:
        raise DomainError(f"no stationary state for |eta| = {abs(eta)} > 1")
    phase = np.arcsin(eta) if branch > 0 else np.pi - np.arcsin(eta)
    return BipartiteState.diagonal([1.0, np.exp(1j * phase)])


def stationary_residual(s: MatrixLike, eta: float, gamma: float = 1.0) -> float:
    """Norm of the right-hand side transverse to the state (zero on stationary rays)."""
    c = as_matrix(s)
    d00, d11 = coupled_rhs(c[0, 0], c[1, 1], eta, gamma)
    rhs = np.diag([d00, d11])
    transverse = rhs - inner(c, rhs) * c
    return float(np.linalg.norm(transverse))


def induced_phase(eta: complex, gamma: complex) -> complex:
    """arcsin(eta / gamma) on the principal branch."""
    return complex(np.arcsin(complex(eta) / complex(gamma)))


def ion_trap_delay(linewidth: float) -> float:
    """Delay hbar / linewidth in seconds for a linewidth in eV."""
    if linewidth <= 0:
        raise ValueError("linewidth must be positive")
    return HBAR_EV_S / linewidth


def linewidth_from_frequency(frequency_hz: float, convention: str = "ordinary") -> float:
    """
    Energy width in eV of a line quoted in Hz.

    "ordinary" reads the number as f (E = h f); "angular" as omega (E = hbar omega).
    """
    if frequency_hz <= 0:
        raise ValueError("frequency must be positive")
    if convention == "ordinary":
        return PLANCK_EV_S * frequency_hz
    if convention == "angular":
        return HBAR_EV_S * frequency_hz
    raise ValueError(f"unknown frequency convention: {convention}")


def _log_pole_flow(
    theta: float, phi: float, t: float, eta: float, gamma: float, eps_fact: float
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    """
    Continue the flow to theta = THETA_FLOOR (or pi - THETA_FLOOR) in the variable
    s = ln tan(theta/2), where sin(theta) = 1/cosh(s) and cos(theta) = -tanh(s).

    Returns:
        times, theta, phi samples and the time at which sin(theta)/2 drops below eps_fact.
    """
    direction = 1.0 if -eta + gamma * np.sin(phi) > 0 else -1.0
    u_start = direction * np.log(np.tan(theta / 2.0))
    u_end = np.arccosh(1.0 / np.sin(THETA_FLOOR))
    u_fact = np.arccosh(1.0 / (2.0 * eps_fact))

    def rhs(u, y):
        s = direction * u
        sin_theta, cos_theta = 1.0 / np.cosh(s), -np.tanh(s)
        theta_dot = -eta + gamma * np.sin(y[0])
        return np.array([
            direction * gamma * np.cos(y[0]) * cos_theta / theta_dot,
            sin_theta / abs(theta_dot),
        ])

    result = integrate(rhs, np.array([phi, t]), LOG_STEP, u_end, t0=u_start)
    s_values = direction * result.times
    thetas = 2.0 * np.arctan(np.exp(s_values))
    t_factorize = float(np.interp(u_fact, result.times, result.states[:, 1]))
    return result.states[:, 1], thetas, result.states[:, 0], t_factorize


def simulate_competition(
    theta0: float,
    phi0: float,
    eta: float,
    tmax: float,
    dt: Optional[float] = None,
    gamma: float = 1.0,
    noise: bool = False,
    rng: Optional[RngStream] = None,
    eps_fact: float = EPS_FACT,
) -> CompetitionResult:
    """
    Integrate the polar flow from (theta0, phi0) and classify the regime.

    With `noise` the sign of eta is redrawn every time the smaller of the fortunes
    cos^2(theta/2), sin^2(theta/2) doubles.

    Returns:
        CompetitionResult with the sampled (t, theta, phi) path, regime, factorization
        time and final phase (when factorized) and the relative drift of the motion invariant.
    """
    start = BlochPoint(theta=theta0, phi=phi0)
    if noise and rng is None:
        raise ValueError("noise needs a random stream")
    dt = dt or DEFAULT_DT

    times: List[np.ndarray] = [np.array([0.0])]
    thetas: List[np.ndarray] = [np.array([theta0])]
    phis: List[np.ndarray] = [np.array([phi0])]
    t, y = 0.0, np.array([theta0, phi0])
    eta_now, plays = eta, 0
    at_pole = np.sin(theta0) <= POLE_SWITCH

    while not at_pole and t < tmax:
        events = [lambda _, state: np.sin(state[0]) - POLE_SWITCH]
        if noise:
            eta_now = rng.draw_sign() * abs(eta)
            plays += 1
            fortune = min(np.cos(y[0] / 2) ** 2, np.sin(y[0] / 2) ** 2)
            if 2.0 * fortune < 1.0:
                events.append(
                    lambda _, state, target=2.0 * fortune: target
                    - min(np.cos(state[0] / 2) ** 2, np.sin(state[0] / 2) ** 2)
                )
        result = integrate(
            lambda _, state, e=eta_now: np.array(_polar(state[0], state[1], e, gamma)),
            y, dt, tmax, t0=t, events=events,
        )
        times.append(result.times[1:])
        thetas.append(result.states[1:, 0])
        phis.append(result.states[1:, 1])
        t, y = result.t_end, result.y_end
        if result.event in (0, -1):
            at_pole = True
        elif result.event is None or not noise:
            break

    phase_one = np.concatenate(phis)
    phase_one_theta = np.concatenate(thetas)
    t_factorize, phi_final = None, None
    if at_pole and abs(eta_now) > gamma and t < tmax:
        pole_times, pole_theta, pole_phi, t_fact = _log_pole_flow(y[0], y[1], t, eta_now, gamma, eps_fact)
        times.append(pole_times[1:])
        thetas.append(pole_theta[1:])
        phis.append(pole_phi[1:])
        if t_fact <= tmax:
            # cot(theta) diverges at the pole, so phi settles on sign(eta) pi/2
            t_factorize, phi_final = t_fact, float(np.sign(eta_now) * np.pi / 2.0)
            logger.debug(f"Competition eta={eta}: factorized at t = {t_fact:.6g}, phi -> {phi_final:.6g}")

    all_theta = np.concatenate(thetas)
    steps = np.diff(all_theta)
    monotone = bool(np.all(steps < 0) or np.all(steps > 0)) if steps.size else False

    if t_factorize is not None:
        regime = Regime.FACTORIZED
    elif monotone and abs(all_theta[-1] - theta0) > MONOTONE_THRESHOLD:
        regime = Regime.DRIFTING
    else:
        regime = Regime.BOUND

    return CompetitionResult(
        eta=eta,
        gamma=gamma,
        theta0=theta0,
        phi0=start.phi,
        regime=regime,
        t_factorize=t_factorize,
        phi_final=phi_final,
        invariant_drift=None if noise else _invariant_drift(phase_one_theta, phase_one, eta),
        theta_monotone=monotone,
        plays=plays,
        times=np.concatenate(times),
        theta=all_theta,
        phi=np.concatenate(phis),
    )


def _invariant_drift(theta: np.ndarray, phi: np.ndarray, eta: float) -> Optional[float]:
    """Largest relative change of the invariant over samples with |phi| < pi/2 - margin."""
    inside = np.abs(phi) < np.pi / 2 - PHASE_MARGIN
    if not inside[0]:
        return None
    values = _invariant(theta[inside], phi[inside], eta)
    return float(np.max(np.abs(values - values[0])) / abs(values[0]))
