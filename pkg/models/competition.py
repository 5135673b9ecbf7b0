from enum import Enum
from typing import Optional

import numpy as np
from pydantic import BaseModel, validator

from models.state import BipartiteState


class SpinSpinCoupling(BaseModel):
    """Exchange coupling gamma between |00> and |11> (energy units)."""
    gamma: complex

    class Config:
        arbitrary_types_allowed = True
        allow_mutation = False

    @validator("gamma", pre=True)
    def to_complex(cls, value):
        return complex(value)

    def tensor(self) -> np.ndarray:
        """Rank-4 R with (R C)_ij = sum_kl R[i, j, k, l] C_kl; only R0011 and R1100 are set."""
        r = np.zeros((2, 2, 2, 2), dtype=complex)
        r[0, 0, 1, 1] = 0.5j * self.gamma
        r[1, 1, 0, 0] = 0.5j * self.gamma
        return r


class BlochPoint(BaseModel):
    """Diagonal state cos(theta/2)|00> + sin(theta/2) e^{i phi}|11>."""
    theta: float
    phi: float

    @validator("theta")
    def check_theta(cls, value):
        if not 0.0 < value < np.pi:
            raise ValueError(f"theta must lie in (0, pi), got {value}")
        return value

    @validator("phi")
    def wrap_phi(cls, value):
        return float((value + np.pi) % (2.0 * np.pi) - np.pi)

    @classmethod
    def from_amplitudes(cls, c00: complex, c11: complex) -> "BlochPoint":
        theta = 2.0 * np.arctan2(abs(c11), abs(c00))
        phi = np.angle(c11) - np.angle(c00)
        return cls(theta=theta, phi=phi)

    def amplitudes(self):
        return np.cos(self.theta / 2.0), np.sin(self.theta / 2.0) * np.exp(1j * self.phi)

    def to_state(self) -> BipartiteState:
        return BipartiteState.diagonal(self.amplitudes())


class Regime(str, Enum):
    FACTORIZED = "factorized"
    # theta moves monotonically but the boundary is not reached within tmax
    DRIFTING = "drifting"
    BOUND = "bound"


class CompetitionResult(BaseModel):
    eta: float
    gamma: float
    theta0: float
    phi0: float
    regime: Regime
    t_factorize: Optional[float] = None
    phi_final: Optional[float] = None
    invariant_drift: Optional[float] = None
    theta_monotone: bool
    plays: int = 0
    times: np.ndarray
    theta: np.ndarray
    phi: np.ndarray

    class Config:
        arbitrary_types_allowed = True

    def row(self):
        return [
            self.eta,
            self.theta0,
            self.phi0,
            self.regime.value,
            self.t_factorize,
            self.phi_final,
            self.invariant_drift,
        ]
