import os
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, root_validator, validator


class ExperimentName(str, Enum):
    BORN = "born"
    COLLAPSE_TIME = "collapse-time"
    COMPETITION = "competition"
    KAON = "kaon"
    HIGHDIM = "highdim"
    PROPS = "props"


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"


def _split_list(value):
    if isinstance(value, str):
        return [item.strip() for item in value.split(",") if item.strip()]
    return value


class ExperimentConfig(BaseModel):
    """
    Everything an experiment run needs. Fields not used by an experiment are ignored.
    """
    experiment: ExperimentName
    alpha: float = 0.5
    eta: float = 1.0
    # list of eta values swept by the competition experiment (defaults to [eta])
    etas: Optional[List[float]] = None
    # defaults to 1 for competition and to the kaon model value for kaon
    gamma: Optional[complex] = None
    n: Optional[int] = None
    m: Optional[int] = None
    trajectories: int = 1000
    seed: int = 0
    dt: Optional[float] = None
    theta0: float = np.pi / 2
    phi0: float = 0.0
    tmax: float = 100.0
    # kaon only: K_L lifetime in seconds and semileptonic branching ratio
    tau_kl: Optional[float] = None
    branching: Optional[float] = None
    # competition only: redraw the sign of eta at every play boundary
    noise: bool = False
    tolerances: Dict[str, float] = {}
    out_path: Optional[Path] = None
    # defaults to json for kaon, csv otherwise
    format: Optional[OutputFormat] = None
    threads: int = os.cpu_count() or 1

    class Config:
        arbitrary_types_allowed = True
        allow_mutation = False

    @validator("gamma", pre=True)
    def parse_gamma(cls, value):
        if value is None:
            return value
        if isinstance(value, str):
            return complex(value.replace(" ", "").replace("i", "j"))
        return complex(value)

    @validator("etas", pre=True)
    def parse_etas(cls, value):
        return _split_list(value)

    @validator("trajectories")
    def check_trajectories(cls, value):
        if value < 1:
            raise ValueError("trajectories must be at least 1")
        return value

    @validator("dt")
    def check_dt(cls, value):
        if value is not None and value <= 0:
            raise ValueError("dt must be positive")
        return value

    @validator("threads")
    def check_threads(cls, value):
        if value < 1:
            raise ValueError("threads must be at least 1")
        return value

    @validator("seed")
    def check_seed(cls, value):
        if not 0 <= value < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        return value

    @root_validator(skip_on_failure=True)
    def check_experiment_fields(cls, values):
        experiment = values["experiment"]
        if values.get("format") is None:
            values["format"] = OutputFormat.JSON if experiment == ExperimentName.KAON else OutputFormat.CSV
        if experiment in (ExperimentName.BORN, ExperimentName.COLLAPSE_TIME):
            if not 0.0 < values["alpha"] < 1.0:
                raise ValueError("alpha must lie in (0, 1)")
            if values["eta"] == 0:
                raise ValueError("eta must be non-zero")
        if experiment != ExperimentName.KAON and values.get("gamma") is None:
            values["gamma"] = complex(1.0)
        if experiment == ExperimentName.COMPETITION:
            if values["gamma"].imag != 0 or values["gamma"].real <= 0:
                raise ValueError("competition needs a real positive gamma")
            if not 0.0 < values["theta0"] < np.pi:
                raise ValueError("theta0 must lie in (0, pi)")
            if values["tmax"] <= 0:
                raise ValueError("tmax must be positive")
        if experiment == ExperimentName.HIGHDIM:
            n, m = values.get("n"), values.get("m")
            if n is not None and n < 2:
                raise ValueError("n must be at least 2")
            if m is not None and m < 1:
                raise ValueError("m must be at least 1")
            if m is not None and n is not None and m >= n:
                raise ValueError(f"m = {m} must be smaller than n = {n}")
        return values

    def tolerance(self, name: str, default: float) -> float:
        return self.tolerances.get(name.lower(), default)

    def echo(self) -> Dict[str, Any]:
        """JSON-safe copy of the configuration."""
        data = self.dict()
        data["experiment"] = self.experiment.value
        data["format"] = self.format.value
        data["gamma"] = [self.gamma.real, self.gamma.imag] if self.gamma is not None else None
        data["out_path"] = str(self.out_path) if self.out_path else None
        # output must not depend on the thread count
        data.pop("threads")
        return data


class SummaryStatistics(BaseModel):
    count: int
    mean: float
    stddev: float
    p5: float
    p50: float
    p95: float


class ExperimentResult(BaseModel):
    """What a router hands back: tabular rows (csv) or a record (json), plus the summary."""
    columns: List[str] = []
    rows: List[List[Any]] = []
    record: Optional[Dict[str, Any]] = None
    summary: Dict[str, Any] = {}
    passed: bool = True


class RunManifest(BaseModel):
    config: Dict[str, Any]
    version: str
    wall_clock_seconds: float
    summary: Dict[str, Any]
    data_file: Optional[str] = None
    status: str = "ok"
