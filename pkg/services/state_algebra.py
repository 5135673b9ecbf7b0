import logging
from typing import Union

import numpy as np
from scipy.stats import unitary_group

from models.state import BipartiteState, EntanglementClass, EntanglementTag, SchmidtForm
from services.exceptions import DomainError, InvalidOperatorError

logger = logging.getLogger(__name__)

MatrixLike = Union[BipartiteState, np.ndarray]

# Tolerance on |det C|^(2/n) below which a state counts as factorized
EPS_FACT = 1e-9
UNITARY_TOLERANCE = 1e-12

# Phase convention of hat(C) = exp(i * sign * arg det C) * T(C) with
# EPSILON = [[0, -1], [1, 0]]; fixed by the adjugate algebra and checked in tests.
TIME_REVERSAL_PHASE_SIGN = +1
EPSILON = np.array([[0.0, -1.0], [1.0, 0.0]], dtype=complex)


def as_matrix(s: MatrixLike) -> np.ndarray:
    if isinstance(s, BipartiteState):
        return s.entries
    return np.asarray(s, dtype=complex)


def det_magnitude(s: MatrixLike) -> float:
    return float(abs(np.linalg.det(as_matrix(s))))


def inner(a: MatrixLike, b: MatrixLike) -> complex:
    """
    Scalar product <a|b> = Tr(a^dag b) of two coefficient matrices.
    """
    ma, mb = as_matrix(a), as_matrix(b)
    if ma.shape != mb.shape:
        raise ValueError(f"dimension mismatch: {ma.shape} vs {mb.shape}")
    return complex(np.vdot(ma, mb))


def _inverse_dagger(matrix: np.ndarray, det: complex) -> np.ndarray:
    """(C^dag)^-1, closed form for 2x2 and LU with partial pivoting otherwise."""
    if matrix.shape == (2, 2):
        adjugate = np.array([[matrix[1, 1], -matrix[0, 1]],
                             [-matrix[1, 0], matrix[0, 0]]])
        return adjugate.conj().T / np.conj(det)
    return np.linalg.inv(matrix.conj().T)


def hat_power(s: MatrixLike, nu: float, eps_fact: float = EPS_FACT) -> np.ndarray:
    """
    General map |det C|^nu (C^dag)^-1. Only nu = 2/n gives a homogeneous map.
    """
    matrix = as_matrix(s)
    n = matrix.shape[0]
    det = complex(np.linalg.det(matrix))
    if abs(det) ** (2.0 / n) <= eps_fact:
        raise DomainError(f"map undefined on factorized state: |det C| = {abs(det):.3e}")
    return abs(det) ** nu * _inverse_dagger(matrix, det)


def hat(s: MatrixLike, eps_fact: float = EPS_FACT) -> np.ndarray:
    """
    The collapse map C -> |det C|^(2/n) (C^dag)^-1.

    The result is not renormalized; norm conservation is a property of the
    dynamics, not of the map.

    Raises:
        DomainError: if |det C|^(2/n) <= eps_fact (cell boundary).
    """
    matrix = as_matrix(s)
    return hat_power(matrix, 2.0 / matrix.shape[0], eps_fact)


def time_reversal(s: MatrixLike) -> np.ndarray:
    """T(C) = epsilon C* epsilon^T for two spin-1/2 particles."""
    matrix = as_matrix(s)
    if matrix.shape != (2, 2):
        raise ValueError("time reversal is defined for 2x2 states only")
    return EPSILON @ matrix.conj() @ EPSILON.T


def schmidt(s: MatrixLike) -> SchmidtForm:
    """
    Schmidt normal form C = U diag(gamma) V with gamma in descending order.
    """
    matrix = as_matrix(s)
    left, singulars, right = np.linalg.svd(matrix)
    # stable sort keeps the input order on ties
    order = np.argsort(-singulars, kind="stable")
    return SchmidtForm(
        left=left[:, order],
        singulars=singulars[order],
        right=right[order, :],
    )


def classify(s: MatrixLike, eps_fact: float = EPS_FACT) -> EntanglementClass:
    matrix = as_matrix(s)
    magnitude = det_magnitude(matrix)
    if matrix.shape != (2, 2):
        return EntanglementClass(tag=None, det_magnitude=magnitude)

    if magnitude < eps_fact:
        tag = EntanglementTag.FACTORIZED
    elif abs(magnitude - 0.5) < eps_fact:
        tag = EntanglementTag.MAXIMALLY_ENTANGLED
    else:
        tag = EntanglementTag.PARTIALLY_ENTANGLED
    return EntanglementClass(tag=tag, det_magnitude=magnitude)


def is_maximally_entangled(s: MatrixLike, tolerance: float = 1e-9) -> bool:
    """Extremal set |C00| = |C11|, |C01| = |C10|, |C00|^2 + |C01|^2 = 1/2."""
    a = np.abs(as_matrix(s))
    return bool(
        abs(a[0, 0] - a[1, 1]) < tolerance
        and abs(a[0, 1] - a[1, 0]) < tolerance
        and abs(a[0, 0] ** 2 + a[0, 1] ** 2 - 0.5) < tolerance
    )


def check_unitary(u: np.ndarray, tolerance: float = UNITARY_TOLERANCE) -> None:
    u = np.asarray(u, dtype=complex)
    deviation = np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])))
    if deviation > tolerance:
        raise InvalidOperatorError(f"operator is not unitary (deviation {deviation:.3e})")


def apply_local(a: np.ndarray, s: MatrixLike, b: np.ndarray) -> BipartiteState:
    """
    Local unitary action C -> A C B (A on particle-1, B on particle-2).
    """
    check_unitary(a)
    check_unitary(b)
    return BipartiteState.from_matrix(np.asarray(a) @ as_matrix(s) @ np.asarray(b))


def random_state(rng: np.random.Generator, n: int = 2, min_det: float = 0.0) -> BipartiteState:
    """Complex Gaussian coefficients, normalized; redrawn until |det| >= min_det."""
    while True:
        matrix = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        matrix /= np.linalg.norm(matrix)
        if abs(np.linalg.det(matrix)) >= min_det:
            return BipartiteState(entries=matrix)


def random_unitary(rng: np.random.Generator, n: int = 2) -> np.ndarray:
    return unitary_group.rvs(n, random_state=rng)
