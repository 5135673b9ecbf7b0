from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, PrivateAttr, root_validator, validator

from models.state import BipartiteState

HERMITIAN_TOLERANCE = 1e-12


def _hermitian(value) -> np.ndarray:
    matrix = np.array(value, dtype=complex)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError(f"operator must be square, got shape {matrix.shape}")
    if np.max(np.abs(matrix - matrix.conj().T)) > HERMITIAN_TOLERANCE:
        raise ValueError("operator is not hermitian")
    matrix.flags.writeable = False
    return matrix


class MeasurementOperator(BaseModel):
    """
    Pair (Lambda_1, Lambda_2) inducing the nonlinear term; eta is the strength
    (energy units, hbar = 1 internally).
    """
    lambda1: np.ndarray
    lambda2: np.ndarray
    eta: float

    class Config:
        arbitrary_types_allowed = True
        allow_mutation = False

    _check_hermitian = validator("lambda1", "lambda2", pre=True, allow_reuse=True)(_hermitian)

    @root_validator(skip_on_failure=True)
    def check_trace(cls, values):
        lambda1, lambda2 = values["lambda1"], values["lambda2"]
        if lambda1.shape != lambda2.shape:
            raise ValueError("lambda1 and lambda2 must have the same shape")
        trace = np.trace(lambda1) + np.trace(lambda2)
        if abs(trace) > HERMITIAN_TOLERANCE:
            raise ValueError(f"Tr(lambda1) + Tr(lambda2) must vanish, got {trace}")
        return values

    @classmethod
    def canonical(cls, eta: float) -> "MeasurementOperator":
        """Single-sided spin-1/2 form: lambda1 = (eta/2) diag(1, -1), lambda2 = 0."""
        return cls(
            lambda1=(eta / 2.0) * np.diag([1.0, -1.0]),
            lambda2=np.zeros((2, 2)),
            eta=eta,
        )

    @property
    def dim(self) -> int:
        return self.lambda1.shape[0]

    def with_sign(self, sign: int) -> "MeasurementOperator":
        """Same operator with the sign of eta fixed to `sign`."""
        factor = sign * (1.0 if self.eta >= 0 else -1.0)
        return MeasurementOperator(
            lambda1=factor * self.lambda1,
            lambda2=factor * self.lambda2,
            eta=sign * abs(self.eta),
        )

    def rotated(self, a: np.ndarray, b: np.ndarray) -> "MeasurementOperator":
        """Lambda_1 -> A Lambda_1 A^dag, Lambda_2 -> B^dag Lambda_2 B."""
        return MeasurementOperator(
            lambda1=a @ self.lambda1 @ a.conj().T,
            lambda2=b.conj().T @ self.lambda2 @ b,
            eta=self.eta,
        )


class HamiltonianPair(BaseModel):
    h1: np.ndarray
    h2: np.ndarray

    class Config:
        arbitrary_types_allowed = True
        allow_mutation = False

    _check_hermitian = validator("h1", "h2", pre=True, allow_reuse=True)(_hermitian)

    @classmethod
    def zero(cls, n: int = 2) -> "HamiltonianPair":
        return cls(h1=np.zeros((n, n)), h2=np.zeros((n, n)))


class PlayRecord(BaseModel):
    """One double-or-nothing play: sign of eta held until the stake is doubled or lost."""
    sign: int
    stake: float
    tau_start: float
    tau_end: float
    t_start: float
    t_end: float
    won: bool

    @validator("sign")
    def check_sign(cls, value):
        if value not in (-1, 1):
            raise ValueError("sign must be +1 or -1")
        return value

    @validator("stake")
    def check_stake(cls, value):
        if not 0.0 < value <= 0.5 + 1e-12:
            raise ValueError(f"stake must lie in (0, 1/2], got {value}")
        return value

    @validator("tau_end")
    def check_tau(cls, value, values):
        if "tau_start" in values and value <= values["tau_start"]:
            raise ValueError("tau_end must exceed tau_start")
        return value


class Trajectory(BaseModel):
    times: np.ndarray
    states: np.ndarray
    plays: List[PlayRecord] = []
    outcome: Optional[int] = None
    termination_time: Optional[float] = None

    class Config:
        arbitrary_types_allowed = True

    @property
    def samples(self) -> List[Tuple[float, BipartiteState]]:
        return [
            (float(t), BipartiteState.from_matrix(c))
            for t, c in zip(self.times, self.states)
        ]

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    def norms(self) -> np.ndarray:
        return np.einsum("kij,kij->k", self.states.conj(), self.states).real


class RngStream(BaseModel):
    """
    Counter-based random stream keyed by (master_seed, stream_index).

    Identical keys give identical draw sequences, whatever the execution order.
    """
    master_seed: int
    stream_index: int
    _generator: Optional[np.random.Generator] = PrivateAttr(default=None)

    @property
    def generator(self) -> np.random.Generator:
        if self._generator is None:
            seed_sequence = np.random.SeedSequence(
                entropy=self.master_seed, spawn_key=(self.stream_index,)
            )
            self._generator = np.random.Generator(np.random.Philox(seed_sequence))
        return self._generator

    def draw_sign(self) -> int:
        return 1 if self.generator.integers(0, 2) == 1 else -1


class CollapseSummary(BaseModel):
    """Lightweight per-trajectory record used by ensembles."""
    index: int
    outcome: Optional[int]
    plays: int
    collapse_time: float


class EnsembleStatistics(BaseModel):
    count: int
    outcome_frequencies: Dict[str, float]
    mean_collapse_time: float
    collapse_time_percentiles: Dict[str, float]
    mean_play_count: float
    play_count_stddev: float
    records: List[CollapseSummary] = []


class BoundaryCurvature(BaseModel):
    """Left-limit second derivatives at the termination point."""
    fortune: float
    amplitude: float
    termination_time: float
