from typing import Any, Dict

from pydantic import BaseModel, root_validator, validator
from scipy import constants

HBAR_EV_S = constants.physical_constants["reduced Planck constant in eV s"][0]


class KaonParams(BaseModel):
    """Neutral-kaon inputs; energies in eV, times in seconds."""
    gamma: complex = (1 + 1j) * 3.5e-6
    tau_kl: float = 5.17e-8
    branching_semileptonic: float = 0.66
    hbar: float = HBAR_EV_S
    epsilon_exp: complex = (1 + 1j) * 1.6e-3

    class Config:
        arbitrary_types_allowed = True
        allow_mutation = False

    @validator("gamma", "epsilon_exp", pre=True)
    def to_complex(cls, value):
        return complex(value)

    @root_validator(skip_on_failure=True)
    def check_ranges(cls, values):
        for name in ("gamma", "epsilon_exp"):
            if abs(values[name]) == 0:
                raise ValueError(f"{name} must be non-zero")
        if values["tau_kl"] <= 0 or values["hbar"] <= 0:
            raise ValueError("tau_kl and hbar must be positive")
        if not 0.0 < values["branching_semileptonic"] <= 1.0:
            raise ValueError("branching ratio must lie in (0, 1]")
        return values


class KaonComparison(BaseModel):
    eta_ev: float
    delta_theory: complex
    delta_exp: complex
    delta_theory_abs: float
    delta_exp_abs: float
    ratio: float
    # ratio inside [0.95, 1.25]
    within_claim: bool

    class Config:
        arbitrary_types_allowed = True

    def record(self) -> Dict[str, Any]:
        return {
            "eta_eV": self.eta_ev,
            "delta_theory_re": self.delta_theory.real,
            "delta_theory_im": self.delta_theory.imag,
            "delta_theory_abs": self.delta_theory_abs,
            "delta_exp_abs": self.delta_exp_abs,
            "ratio": self.ratio,
        }


class KaonSensitivity(BaseModel):
    d_delta_d_branching: float
    d_delta_d_tau: float
    elasticity_branching: float
    elasticity_tau: float
