"""
Fixed-step classical Runge-Kutta integration with terminal events.

Events follow the scipy `solve_ivp` convention: a callable g(t, y) whose value
starts positive; the event fires when g becomes non-positive. The optional
domain guard is evaluated at every stage, so a step whose stages leave the
domain is treated like an event and shortened by bisection.
"""
import logging
from typing import Callable, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel

from services.exceptions import DomainError, StepTooLargeError

logger = logging.getLogger(__name__)

Rhs = Callable[[float, np.ndarray], np.ndarray]
EventFn = Callable[[float, np.ndarray], float]

MAX_BISECTIONS = 200


class IntegrationResult(BaseModel):
    times: np.ndarray
    states: np.ndarray
    # index into the events sequence, -1 for the domain guard, None if t_max was reached
    event: Optional[int] = None
    t_end: float
    y_end: np.ndarray

    class Config:
        arbitrary_types_allowed = True


class _OutsideDomain(Exception):
    pass


def rk4_step(rhs: Rhs, t: float, y: np.ndarray, h: float) -> np.ndarray:
    k1 = rhs(t, y)
    k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = rhs(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _guarded(rhs: Rhs, domain: Optional[Callable[[np.ndarray], float]]) -> Rhs:
    def wrapped(t: float, y: np.ndarray) -> np.ndarray:
        if domain is not None and domain(y) <= 0.0:
            raise _OutsideDomain()
        try:
            return rhs(t, y)
        except DomainError:
            raise _OutsideDomain()
    return wrapped


def _fired(events: Sequence[EventFn], t: float, y: np.ndarray) -> Optional[int]:
    for index, event in enumerate(events):
        if event(t, y) <= 0.0:
            return index
    return None


def integrate(
    rhs: Rhs,
    y0: np.ndarray,
    dt: float,
    t_max: float,
    t0: float = 0.0,
    events: Sequence[EventFn] = (),
    domain: Optional[Callable[[np.ndarray], float]] = None,
    event_tol: Optional[float] = None,
    norm_drift_tol: Optional[float] = None,
    sample_every: int = 1,
) -> IntegrationResult:
    """
    Integrate y' = rhs(t, y) from t0 with fixed step dt until t_max or a terminal event.

    Args:
        events: terminal event functions (positive at the start).
        domain: guard g(y); the trajectory must keep g(y) > 0 at every stage.
        event_tol: time tolerance of the event bisection (defaults to min(dt^2, 1e-10)).
        norm_drift_tol: raise StepTooLargeError when |‖y_new‖^2 - ‖y‖^2| exceeds it.
        sample_every: keep every k-th accepted step in the output.

    Returns:
        IntegrationResult with the sampled path and the terminal state.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    tol = event_tol if event_tol is not None else min(dt * dt, 1e-10)
    guarded = _guarded(rhs, domain)

    for index, event in enumerate(events):
        if event(t0, y0) <= 0.0:
            raise ValueError(f"event {index} is not positive at the initial state")

    t, y = t0, np.array(y0)
    times: List[float] = [t]
    states: List[np.ndarray] = [y]
    step = 0

    while t < t_max:
        h = min(dt, t_max - t)
        fired: Optional[int] = None
        try:
            y_new = rk4_step(guarded, t, y, h)
            if domain is not None and domain(y_new) <= 0.0:
                fired = -1
            else:
                fired = _fired(events, t + h, y_new)
        except _OutsideDomain:
            fired = -1

        if fired is not None:
            h_event, y_event, fired = _locate(guarded, t, y, h, events, domain, tol, fired)
            t, y = t + h_event, y_event
            times.append(t)
            states.append(y)
            logger.debug(f"Event {fired} located at t = {t:.12g}")
            return IntegrationResult(
                times=np.array(times), states=np.array(states), event=fired, t_end=t, y_end=y
            )

        if norm_drift_tol is not None:
            drift = abs(np.vdot(y_new, y_new).real - np.vdot(y, y).real)
            if drift > norm_drift_tol:
                raise StepTooLargeError(f"norm drift {drift:.3e} over one step at t = {t:.6g}")

        t, y = t + h, y_new
        step += 1
        if step % sample_every == 0 or t >= t_max:
            times.append(t)
            states.append(y)

    return IntegrationResult(
        times=np.array(times), states=np.array(states), event=None, t_end=t, y_end=y
    )


def _locate(rhs, t, y, h, events, domain, tol, fired):
    """Bisect the step length: lo stays before the event, hi after it."""
    lo, hi = 0.0, h
    y_lo = y
    for _ in range(MAX_BISECTIONS):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        try:
            y_mid = rk4_step(rhs, t, y, mid)
            if domain is not None and domain(y_mid) <= 0.0:
                which = -1
            else:
                which = _fired(events, t + mid, y_mid)
        except _OutsideDomain:
            which = -1
        if which is None:
            lo, y_lo = mid, y_mid
        else:
            hi, fired = mid, which
    return lo, y_lo, fired
