from enum import Enum
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, validator

NORM_TOLERANCE = 1e-12


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=complex)
    array.flags.writeable = False
    return array


class BipartiteState(BaseModel):
    """
    Two-particle state stored as its n x n coefficient matrix C.

    Particle-1 operators act from the left, particle-2 operators from the right.
    """
    entries: np.ndarray

    class Config:
        arbitrary_types_allowed = True
        allow_mutation = False

    @validator("entries", pre=True)
    def check_entries(cls, value):
        matrix = np.asarray(value, dtype=complex)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] < 1:
            raise ValueError(f"coefficient matrix must be square, got shape {matrix.shape}")
        if not np.all(np.isfinite(matrix)):
            raise ValueError("coefficient matrix has non-finite entries")
        norm = float(np.vdot(matrix, matrix).real)
        if abs(norm - 1.0) > NORM_TOLERANCE:
            raise ValueError(f"state is not normalized: Tr(C^dag C) = {norm!r}")
        return _frozen(matrix)

    @classmethod
    def from_matrix(cls, matrix, normalize: bool = True) -> "BipartiteState":
        matrix = np.asarray(matrix, dtype=complex)
        if normalize:
            norm = np.sqrt(np.vdot(matrix, matrix).real)
            if norm == 0.0:
                raise ValueError("cannot normalize the zero matrix")
            matrix = matrix / norm
        return cls(entries=matrix)

    @classmethod
    def diagonal(cls, amplitudes) -> "BipartiteState":
        return cls.from_matrix(np.diag(np.asarray(amplitudes, dtype=complex)))

    @classmethod
    def from_alpha(cls, alpha: float) -> "BipartiteState":
        """sqrt(alpha)|00> + sqrt(1 - alpha)|11>"""
        return cls.diagonal([np.sqrt(alpha), np.sqrt(1.0 - alpha)])

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def norm(self) -> float:
        return float(np.vdot(self.entries, self.entries).real)

    def to_pairs(self) -> List[List[List[float]]]:
        """Row-major [re, im] pairs, the JSON form of the coefficient matrix."""
        return [[[float(z.real), float(z.imag)] for z in row] for row in self.entries]

    @classmethod
    def from_pairs(cls, pairs) -> "BipartiteState":
        array = np.asarray(pairs, dtype=float)
        return cls(entries=array[..., 0] + 1j * array[..., 1])


class SchmidtForm(BaseModel):
    left: np.ndarray
    singulars: np.ndarray
    right: np.ndarray

    class Config:
        arbitrary_types_allowed = True
        allow_mutation = False

    def reconstruct(self) -> np.ndarray:
        return self.left @ np.diag(self.singulars) @ self.right

    def rank(self, tolerance: float = 1e-12) -> int:
        return int(np.count_nonzero(self.singulars > tolerance))


class EntanglementTag(str, Enum):
    FACTORIZED = "Factorized"
    PARTIALLY_ENTANGLED = "PartiallyEntangled"
    MAXIMALLY_ENTANGLED = "MaximallyEntangled"


class EntanglementClass(BaseModel):
    # None for n > 2, where only the determinant magnitude is reported
    tag: Optional[EntanglementTag] = None
    det_magnitude: float
