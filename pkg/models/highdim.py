from enum import Enum
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, root_validator, validator

SUM_TOLERANCE = 1e-12


class SubspaceFilter(BaseModel):
    """Filter splitting an n-dimensional space into an m-dimensional (+) part and its complement."""
    n: int
    m: int
    eta: float

    class Config:
        allow_mutation = False

    @root_validator(skip_on_failure=True)
    def check_split(cls, values):
        n, m = values["n"], values["m"]
        if n < 2:
            raise ValueError("n must be at least 2")
        if not 1 <= m <= n - 1:
            raise ValueError(f"m must lie in [1, {n - 1}], got {m}")
        return values

    def matrix(self) -> np.ndarray:
        """(eta/2) (P_plus/m - P_minus/(n - m)), traceless."""
        diagonal = [1.0 / self.m] * self.m + [-1.0 / (self.n - self.m)] * (self.n - self.m)
        return 0.5 * self.eta * np.diag(diagonal)

    def generator(self) -> np.ndarray:
        """Operator whose flow runs on the clock eta t = 2 int prod_j y_j^(-1/n) dtau."""
        return 0.5 * self.n * self.matrix()


class DiagonalOccupation(BaseModel):
    y: np.ndarray

    class Config:
        arbitrary_types_allowed = True
        allow_mutation = False

    @validator("y", pre=True)
    def check_probabilities(cls, value):
        y = np.array(value, dtype=float)
        if y.ndim != 1 or y.size < 2:
            raise ValueError("occupation must be a vector of length >= 2")
        if np.any(y < 0.0) or np.any(y > 1.0):
            raise ValueError("occupations must lie in [0, 1]")
        if abs(y.sum() - 1.0) > SUM_TOLERANCE:
            raise ValueError(f"occupations must sum to 1, got {y.sum()!r}")
        y.flags.writeable = False
        return y

    @classmethod
    def uniform(cls, n: int) -> "DiagonalOccupation":
        return cls(y=np.full(n, 1.0 / n))

    @property
    def n(self) -> int:
        return self.y.size


class BisectionMode(str, Enum):
    DETERMINISTIC = "deterministic"
    NOISY = "noisy"


class StageRecord(BaseModel):
    stage: int
    dimension: int
    surviving_dimension: int
    time: float
    plays: int
    # 0 when the (+) half survives
    outcome: int


class BisectionResult(BaseModel):
    n: int
    eta: float
    mode: BisectionMode
    total_time: float
    stages: List[StageRecord]
    seed: Optional[int] = None


class LargeNRatio(BaseModel):
    n: int
    eta_t0_hypergeometric: float
    eta_t0_quadrature: float
    ratio: float
