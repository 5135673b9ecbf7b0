import logging
from functools import partial
from typing import Callable, List, Optional, Tuple, Union

import numpy as np
from scipy.linalg import expm

from models.dynamics import (
    BoundaryCurvature,
    CollapseSummary,
    EnsembleStatistics,
    HamiltonianPair,
    MeasurementOperator,
    PlayRecord,
    RngStream,
    Trajectory,
)
from models.state import BipartiteState
from services.exceptions import ConvergenceError, DomainError
from services.integrator import EventFn, integrate
from services.parallel import parallel_map
from services.state_algebra import EPS_FACT, MatrixLike, as_matrix, hat
from services.statistics import ensemble_statistics

logger = logging.getLogger(__name__)

DEFAULT_DT_SCALE = 1e-3
NORM_DRIFT_TOLERANCE = 1e-8
ROW_OVERLAP_TOLERANCE = 1e-12
# absorbs the rounding of 1 - y for fortunes close to one
ROUNDOFF = 1e-15
# a doubled stake this close to 1 ends the game
SNAP = 1e-12
# a losing row below this weight is dropped when the RK4 path stops at the boundary
RESIDUAL_FORTUNE = 1e-6
MAX_PLAYS = 10_000

Coupling = Union[np.ndarray, Callable[[np.ndarray], np.ndarray]]


def default_dt(m: MeasurementOperator) -> float:
    return DEFAULT_DT_SCALE / abs(m.eta) if m.eta != 0 else DEFAULT_DT_SCALE


def apply_coupling(r: Coupling, c: np.ndarray) -> np.ndarray:
    """R(C)_ij = sum_kl R[i, j, k, l] C_kl, or a callable acting on C."""
    if callable(r):
        return r(c)
    return np.einsum("ijkl,kl->ij", r, c)


def rhs_modified(
    s: MatrixLike,
    m: MeasurementOperator,
    h: Optional[HamiltonianPair] = None,
    r: Optional[Coupling] = None,
    eps_fact: float = EPS_FACT,
) -> np.ndarray:
    """
    dC/dt = Lambda_1 hat(C) + hat(C) Lambda_2 - i H_1 C - i C H_2 + R(C).

    Raises:
        DomainError: if the nonlinear term is active and C is factorized.
    """
    c = as_matrix(s)
    derivative = np.zeros_like(c)
    if np.any(m.lambda1) or np.any(m.lambda2):
        c_hat = hat(c, eps_fact)
        derivative += m.lambda1 @ c_hat + c_hat @ m.lambda2
    if h is not None:
        derivative -= 1j * (h.h1 @ c + c @ h.h2)
    if r is not None:
        derivative += apply_coupling(r, c)
    return derivative


def to_interaction_picture(s: MatrixLike, h: HamiltonianPair, t: float) -> BipartiteState:
    c = as_matrix(s)
    rotated = expm(-1j * h.h1 * t) @ c @ expm(-1j * h.h2 * t)
    return BipartiteState.from_matrix(rotated, normalize=False)


def _measurement_basis(m: MeasurementOperator) -> np.ndarray:
    """Eigenvectors of Lambda_1 / sign(eta), the (+) eigenvector first."""
    lam = m.lambda1 * (-1.0 if m.eta < 0 else 1.0)
    n = lam.shape[0]
    off_diagonal = lam - np.diag(np.diag(lam))
    if not np.any(np.abs(off_diagonal) > 1e-12) and np.all(np.diff(np.diag(lam).real) <= 0):
        return np.eye(n, dtype=complex)
    _, vectors = np.linalg.eigh(lam)
    return vectors[:, ::-1]


def _row_weights(c: np.ndarray, basis: np.ndarray) -> np.ndarray:
    rows = basis.conj().T @ c
    return np.sum(np.abs(rows) ** 2, axis=1)


def _rows_orthogonal(c: np.ndarray, basis: np.ndarray) -> bool:
    rows = basis.conj().T @ c
    gram = rows @ rows.conj().T
    return bool(np.max(np.abs(gram - np.diag(np.diag(gram)))) <= ROW_OVERLAP_TOLERANCE)


def fortunes(s: MatrixLike, m: MeasurementOperator) -> Tuple[float, float]:
    """
    Probabilities of the two Lambda_1 eigenspaces for particle 1.

    For a diagonal C this is (|C00|^2, |C11|^2).
    """
    c = as_matrix(s)
    if c.shape != (2, 2):
        raise ValueError("fortunes are defined for two-level measurements only")
    weights = _row_weights(c, _measurement_basis(m))
    return float(weights[0]), float(weights[1])


def cell_decomposition(s: MatrixLike) -> Tuple[np.ndarray, np.ndarray]:
    """Split C into its diagonal and anti-diagonal cells (unnormalized)."""
    c = as_matrix(s)
    if c.shape != (2, 2):
        raise ValueError("cell decomposition is defined for 2x2 states only")
    diagonal = np.diag(np.diag(c))
    return diagonal, c - diagonal


def _signed_det_guard(c0: np.ndarray) -> Callable[[np.ndarray], float]:
    # det C keeps its phase along the collapse flow, so its projection changes sign at the boundary
    phase = np.exp(-1j * np.angle(np.linalg.det(c0)))
    return lambda c: float((np.linalg.det(c) * phase).real)


def _settle(c: np.ndarray, basis: np.ndarray) -> Tuple[np.ndarray, Optional[int]]:
    """Drop rows that have (numerically) lost and report the surviving index."""
    rows = basis.conj().T @ c
    weights = np.sum(np.abs(rows) ** 2, axis=1)
    lost = weights <= RESIDUAL_FORTUNE
    rows[lost] = 0.0
    settled = basis @ rows
    settled = settled / np.sqrt(np.vdot(settled, settled).real)
    survivors = np.flatnonzero(~lost)
    outcome = int(survivors[0]) if len(survivors) == 1 else None
    return settled, outcome


def flow_deterministic(
    s0: MatrixLike,
    m: MeasurementOperator,
    sign: int = 1,
    dt: Optional[float] = None,
    stop: Optional[EventFn] = None,
    t_max: Optional[float] = None,
    t_start: float = 0.0,
    eps_fact: float = EPS_FACT,
) -> Trajectory:
    """
    RK4 integration of dC/dt = Lambda_1 hat(C) with eta replaced by sign*|eta|.

    Args:
        stop: optional event g(t, C), positive at the start; the flow stops where it
            reaches zero.
        t_max: integration horizon (defaults to 2*pi/|eta| past t_start).

    Returns:
        Trajectory; outcome and termination_time are set when the state factorized.

    Raises:
        DomainError: if s0 is already factorized.
        StepTooLargeError: if the norm drifts by more than 1e-8 over one step.
    """
    if m.eta == 0:
        raise ValueError("the collapse flow needs eta != 0")
    c0 = as_matrix(s0)
    n = c0.shape[0]
    if abs(np.linalg.det(c0)) ** (2.0 / n) <= eps_fact:
        raise DomainError("initial state is already factorized")

    signed = m.with_sign(sign)
    dt = dt or default_dt(m)
    if t_max is None:
        t_max = t_start + 2.0 * np.pi / abs(m.eta)

    result = integrate(
        lambda t, c: rhs_modified(c, signed, eps_fact=eps_fact),
        c0,
        dt,
        t_max,
        t0=t_start,
        events=[stop] if stop is not None else (),
        domain=_signed_det_guard(c0),
        norm_drift_tol=NORM_DRIFT_TOLERANCE,
    )

    states = result.states
    outcome, termination = None, None
    if result.event == -1:
        states = states.copy()
        states[-1], outcome = _settle(result.y_end, _measurement_basis(m))
        termination = result.t_end
        logger.debug(f"Flow factorized at t = {termination:.12g}, outcome {outcome}")
    return Trajectory(times=result.times, states=states, outcome=outcome, termination_time=termination)


def termination_time(alpha: float, eta: float, sign: int = 1) -> float:
    """
    Time for the deterministic flow from sqrt(alpha)|00> + sqrt(1-alpha)|11> to factorize.

    sign = +1 collapses to y0 = 1, sign = -1 to y0 = 0.
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha = {alpha} is already factorized")
    if eta <= 0:
        raise ValueError("eta must be positive")
    return (np.pi / 2.0 + sign * np.arcsin(1.0 - 2.0 * alpha)) / eta


def analytic_y(alpha: float, eta: float, t, sign: int = 1):
    """
    Closed-form fortunes (y0, y1) of the deterministic flow at time(s) t.

    Raises:
        DomainError: if t lies past the termination time.
    """
    t0 = termination_time(alpha, eta, sign)
    times = np.asarray(t, dtype=float)
    if np.any(times < 0.0) or np.any(times > t0 + 1e-12):
        raise DomainError(f"t must lie in [0, {t0:.12g}]")
    u = np.arcsin(1.0 - 2.0 * alpha) - sign * eta * np.minimum(times, t0)
    y0 = 0.5 * (1.0 - np.sin(u))
    if np.ndim(y0) == 0:
        return float(y0), float(1.0 - y0)
    return y0, 1.0 - y0


def _play_duration(y_start: float, y_end: float, eta: float) -> float:
    # arcsin(1 - 2y) = pi/2 - 2 arcsin(sqrt(y))
    start, end = np.sqrt(np.clip([y_start, y_end], 0.0, 1.0))
    return 2.0 * abs(np.arcsin(start) - np.arcsin(end)) / abs(eta)


def _arrived(y0: float, eps_fact: float) -> bool:
    return min(y0, 1.0 - y0) <= eps_fact + ROUNDOFF


def _play_target(y0: float, sign: int) -> Tuple[float, float, bool]:
    """End fortune y0 of a play, the stake, and whether the smaller player wins."""
    smaller = 0 if y0 <= 1.0 - y0 else 1
    stake = min(y0, 1.0 - y0)
    # a positive sign pushes y0 up
    won = (sign > 0) == (smaller == 0)
    smaller_end = 2.0 * stake if won else 0.0
    if smaller_end >= 1.0 - SNAP:
        smaller_end = 1.0
    y0_end = smaller_end if smaller == 0 else 1.0 - smaller_end
    return y0_end, stake, won


def _exact_segment(
    c: np.ndarray, basis: np.ndarray, y0_end: float, sign: int, eta: float, dt: float, t_start: float
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Closed-form flow for states whose rows are orthogonal in the measurement basis:
    each row is rescaled by a real factor and y0 follows a sine in t.
    """
    rows = basis.conj().T @ c
    weights = np.sum(np.abs(rows) ** 2, axis=1)
    duration = _play_duration(weights[0], y0_end, eta)
    steps = max(1, int(np.ceil(duration / dt)))
    local = np.linspace(0.0, duration, steps + 1)

    u = np.arcsin(1.0 - 2.0 * weights[0]) - sign * abs(eta) * local
    y0 = 0.5 * (1.0 - np.sin(u))
    y0[0], y0[-1] = weights[0], y0_end
    scales = np.sqrt(np.clip(np.stack([y0 / weights[0], (1.0 - y0) / weights[1]], axis=1), 0.0, None))
    states = np.einsum("ab,kbc->kac", basis, scales[:, :, None] * rows[None, :, :])
    return t_start + local, states


def play(
    s: MatrixLike,
    m: MeasurementOperator,
    rng: RngStream,
    dt: Optional[float] = None,
    t_start: float = 0.0,
    tau_start: float = 0.0,
    eps_fact: float = EPS_FACT,
) -> Tuple[Trajectory, PlayRecord]:
    """
    One double-or-nothing play: a random sign of eta is held until the smaller
    fortune doubles or reaches zero.

    Returns:
        The trajectory segment (outcome set if the game ended) and the play record.

    Raises:
        DomainError: if the starting state is already factorized.
    """
    c = as_matrix(s)
    basis = _measurement_basis(m)
    weights = _row_weights(c, basis)
    if _arrived(weights[0], eps_fact) or abs(np.linalg.det(c)) <= eps_fact:
        raise DomainError("cannot play from a factorized state")

    dt = dt or default_dt(m)
    sign = rng.draw_sign()
    y0_end, stake, won = _play_target(weights[0], sign)
    outcome, termination = None, None

    if _rows_orthogonal(c, basis):
        times, states = _exact_segment(c, basis, y0_end, sign, m.eta, dt, t_start)
        if _arrived(y0_end, eps_fact):
            states[-1], outcome = _settle(states[-1], basis)
            termination = float(times[-1])
    else:
        stop = None
        smaller = 0 if weights[0] <= weights[1] else 1
        if won and 2.0 * stake < 1.0 - SNAP:
            target = 2.0 * stake
            stop = lambda t, y: target - _row_weights(y, basis)[smaller]
        segment = flow_deterministic(c, m, sign=sign, dt=dt, stop=stop, t_start=t_start, eps_fact=eps_fact)
        times, states = segment.times, segment.states
        outcome, termination = segment.outcome, segment.termination_time
        if termination is None and (stop is None or stop(times[-1], states[-1]) > 1e-6):
            raise ConvergenceError(f"play starting at t = {t_start:.6g} reached neither boundary")
        y0_end = float(_row_weights(states[-1], basis)[0])

    record = PlayRecord(
        sign=sign,
        stake=stake,
        tau_start=tau_start,
        tau_end=tau_start + abs(y0_end - weights[0]),
        t_start=t_start,
        t_end=float(times[-1]),
        won=won,
    )
    logger.debug(f"Play sign {sign:+d} stake {stake:.6g}: y0 -> {y0_end:.6g} at t = {record.t_end:.6g}")
    segment = Trajectory(
        times=times, states=states, plays=[record], outcome=outcome, termination_time=termination
    )
    return segment, record


def collapse(
    s0: MatrixLike,
    m: MeasurementOperator,
    rng: RngStream,
    dt: Optional[float] = None,
    eps_fact: float = EPS_FACT,
) -> Trajectory:
    """
    Repeat plays until the state factorizes.

    Over an ensemble the probability of ending on the y0 side equals the initial y0.
    """
    c = as_matrix(s0)
    basis = _measurement_basis(m)
    weights = _row_weights(c, basis)
    if _arrived(weights[0], eps_fact):
        settled, outcome = _settle(c, basis)
        if outcome is None:
            outcome = int(np.argmax(weights))
        return Trajectory(
            times=np.array([0.0]), states=settled[None], outcome=outcome, termination_time=0.0
        )

    times: List[np.ndarray] = []
    states: List[np.ndarray] = []
    plays: List[PlayRecord] = []
    t, tau, state = 0.0, 0.0, c
    for _ in range(MAX_PLAYS):
        segment, record = play(state, m, rng, dt=dt, t_start=t, tau_start=tau, eps_fact=eps_fact)
        skip = 1 if times else 0
        times.append(segment.times[skip:])
        states.append(segment.states[skip:])
        plays.append(record)
        t, tau, state = record.t_end, record.tau_end, segment.final_state
        if segment.termination_time is not None:
            return Trajectory(
                times=np.concatenate(times),
                states=np.concatenate(states),
                plays=plays,
                outcome=segment.outcome,
                termination_time=segment.termination_time,
            )
    raise ConvergenceError(f"no factorization after {MAX_PLAYS} plays")


def collapse_fortune(y0: float, eta: float, rng: RngStream, eps_fact: float = EPS_FACT) -> Tuple[int, int, float]:
    """
    Scalar version of `collapse` for row-orthogonal states: only the fortune is tracked.

    Draws the same signs as `collapse` for the same stream.

    Returns:
        (outcome, play count, collapse time)
    """
    t, plays = 0.0, 0
    while not _arrived(y0, eps_fact):
        if plays >= MAX_PLAYS:
            raise ConvergenceError(f"no factorization after {MAX_PLAYS} plays")
        y0_end, _, _ = _play_target(y0, rng.draw_sign())
        t += _play_duration(y0, y0_end, eta)
        y0 = y0_end
        plays += 1
    return (0 if y0 > 0.5 else 1), plays, t


def collapse_summary(
    index: int,
    state: BipartiteState,
    m: MeasurementOperator,
    seed: int,
    dt: Optional[float] = None,
    eps_fact: float = EPS_FACT,
) -> CollapseSummary:
    """Collapse trajectory `index` of an ensemble on its own random stream."""
    stream = RngStream(master_seed=seed, stream_index=index)
    c = as_matrix(state)
    basis = _measurement_basis(m)
    if _rows_orthogonal(c, basis):
        outcome, plays, elapsed = collapse_fortune(float(_row_weights(c, basis)[0]), m.eta, stream, eps_fact)
        return CollapseSummary(index=index, outcome=outcome, plays=plays, collapse_time=elapsed)

    trajectory = collapse(c, m, stream, dt=dt, eps_fact=eps_fact)
    return CollapseSummary(
        index=index,
        outcome=trajectory.outcome,
        plays=len(trajectory.plays),
        collapse_time=trajectory.termination_time,
    )


def born_ensemble(
    s0: MatrixLike,
    m: MeasurementOperator,
    count: int,
    seed: int,
    dt: Optional[float] = None,
    threads: int = 1,
    eps_fact: float = EPS_FACT,
    keep_records: bool = True,
) -> EnsembleStatistics:
    """
    Run `count` independent collapses, trajectory i on RngStream(seed, i).

    The result depends on the seed only, not on `threads` or execution order.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    state = s0 if isinstance(s0, BipartiteState) else BipartiteState.from_matrix(s0)
    logger.info(f"Running {count} collapse trajectories (seed {seed}, threads {threads})")
    worker = partial(collapse_summary, state=state, m=m, seed=seed, dt=dt, eps_fact=eps_fact)
    records = parallel_map(worker, range(count), threads)
    return ensemble_statistics(records, keep_records=keep_records)


def transfer_V(s: MatrixLike, eps_fact: float = EPS_FACT) -> np.ndarray:
    """V(C) = |det C| (C C^dag)^-1, hermitian positive definite."""
    c = as_matrix(s)
    det = abs(np.linalg.det(c))
    if det ** (2.0 / c.shape[0]) <= eps_fact:
        raise DomainError(f"V undefined on factorized state: |det C| = {det:.3e}")
    v = det * np.linalg.inv(c @ c.conj().T)
    return 0.5 * (v + v.conj().T)


def transfer_operator(s: MatrixLike, m: MeasurementOperator, dt: float, eps_fact: float = EPS_FACT) -> np.ndarray:
    """Z = I + Lambda_1 V(C) dt, the one-step multiplicative operator C_{j+1} = Z C_j."""
    c = as_matrix(s)
    return np.eye(c.shape[0]) + dt * (m.lambda1 @ transfer_V(c, eps_fact))


def transfer_step(
    s: MatrixLike, m: MeasurementOperator, dt: float, normalize: bool = True, eps_fact: float = EPS_FACT
):
    c = as_matrix(s)
    stepped = transfer_operator(c, m, dt, eps_fact) @ c
    if not normalize:
        return stepped
    return BipartiteState.from_matrix(stepped)


def transfer_evolve(
    s0: MatrixLike, m: MeasurementOperator, dt: float, steps: int, eps_fact: float = EPS_FACT
) -> Trajectory:
    """Apply Z repeatedly from the left, stopping early at the cell boundary."""
    c = as_matrix(s0)
    times, states = [0.0], [c]
    for k in range(1, steps + 1):
        try:
            c = transfer_step(c, m, dt, eps_fact=eps_fact).entries
        except DomainError:
            logger.debug(f"Transfer evolution reached the boundary after {k - 1} steps")
            break
        times.append(k * dt)
        states.append(c)
    return Trajectory(times=np.array(times), states=np.array(states))


def boundary_curvature(trajectory: Trajectory, window: int = 40) -> BoundaryCurvature:
    """
    Left-limit second derivatives of the winning fortune and of its amplitude
    at termination, from a quadratic fit over the last `window` samples.
    """
    if trajectory.termination_time is None or trajectory.outcome is None:
        raise ValueError("trajectory did not terminate on a basis state")
    if len(trajectory.times) < window:
        raise ValueError(f"need at least {window} samples, got {len(trajectory.times)}")
    times = trajectory.times[-window:] - trajectory.termination_time
    rows = trajectory.states[-window:, trajectory.outcome, :]
    fortune = np.sum(np.abs(rows) ** 2, axis=1)
    amplitude = np.sqrt(fortune)
    return BoundaryCurvature(
        fortune=2.0 * float(np.polyfit(times, fortune, 2)[0]),
        amplitude=2.0 * float(np.polyfit(times, amplitude, 2)[0]),
        termination_time=trajectory.termination_time,
    )


def gamblers_ruin_walk(alpha: float, step: float, rng: np.random.Generator) -> Tuple[int, int]:
    """
    Fixed-increment fortune walk: y0 moves by +-step until it reaches 0 or 1.

    The expected number of moves is alpha (1 - alpha) / step^2, so shrinking the
    increment makes collapse arbitrarily slow.

    Returns:
        (outcome, moves) with outcome 0 when y0 reached 1.
    """
    total = int(round(1.0 / step))
    position = int(round(alpha * total))
    if not 0 < position < total:
        raise DomainError("walk starts on an absorbing boundary")
    moves = 0
    while 0 < position < total:
        position += 1 if rng.random() < 0.5 else -1
        moves += 1
    return (0 if position == total else 1), moves
