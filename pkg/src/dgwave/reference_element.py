"""
Reference element

Degree-k Lagrange basis on [-1, 1] with equispaced nodes, and every
cell-local matrix and constant the DG scheme needs:

    M_jl = 1/2 int phi_j phi_l        R_jl = int phi_j phi_l'
    A = phi(-1) phi(-1)^T   B = phi(-1) phi(1)^T
    C = phi(1) phi(-1)^T    D = phi(1) phi(1)^T

Update matrices are stored as E = M^-1 (R + A), F = -M^-1 B for the u-sweep
and E_phi = M^-1 (R - D), F_phi = M^-1 C for the phi-sweep, so one DG step reads

    U <- U - dt/h (E U_i + F U_{i-1}) + dt Phi
    Phi <- Phi + dt/h (E_phi Phi_i + F_phi Phi_{i+1}) + dt |U|^p
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Any, Dict, Tuple

import numpy as np
from numpy.polynomial import Polynomial
from numpy.polynomial.legendre import leggauss

from .errors import InvalidDegreeError, InvalidExponentError, InvalidMeshError

logger = logging.getLogger(__name__)

MAX_DEGREE = 7

# Closed Newton-Cotes weights on [-1, 1] (midpoint rule for k = 0): numerators, denominator.
_NEWTON_COTES = {
    0: ((2,), 1),
    1: ((1, 1), 1),
    2: ((1, 4, 1), 3),
    3: ((1, 3, 3, 1), 4),
    4: ((7, 32, 12, 32, 7), 45),
    5: ((19, 75, 50, 50, 75, 19), 144),
    6: ((41, 216, 27, 272, 27, 216, 41), 420),
    7: ((751, 3577, 1323, 2989, 2989, 1323, 3577, 751), 8640),
}


def newton_cotes_alpha(k: int) -> Tuple[Fraction, ...]:
    """Exact weights alpha_j = int phi_j over [-1, 1] for degree k."""
    _check_degree(k)
    numerators, denominator = _NEWTON_COTES[k]
    return tuple(Fraction(n, denominator) for n in numerators)


def equispaced_nodes(k: int) -> np.ndarray:
    """Interpolation nodes: cell midpoint for k = 0, endpoints included otherwise."""
    if k == 0:
        return np.zeros(1)
    return np.linspace(-1.0, 1.0, k + 1)


@dataclass(frozen=True, eq=False)
class CellMatrices:
    """Matrices of one physical cell of width h."""

    h: float
    M: np.ndarray
    R: np.ndarray
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray


@dataclass(frozen=True, eq=False)
class ReferenceElement:
    """
    Lagrange element of degree k on [-1, 1].

    Immutable after construction; arrays are read-only so one instance can be
    shared by any number of runs.
    """

    k: int
    nodes: np.ndarray
    basis: Tuple[Polynomial, ...]
    M: np.ndarray
    M_inv: np.ndarray
    R: np.ndarray
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    E: np.ndarray
    F: np.ndarray
    E_phi: np.ndarray
    F_phi: np.ndarray
    alpha: np.ndarray
    rho_min: float
    rho_max: float

    @property
    def size(self) -> int:
        return self.k + 1

    def to_dict(self) -> Dict[str, Any]:
        """Row-major JSON-ready view of every field except the basis polynomials."""
        out: Dict[str, Any] = {"k": self.k}
        for name in ("nodes", "M", "M_inv", "R", "A", "B", "C", "D", "E", "F", "alpha"):
            out[name] = getattr(self, name).tolist()
        out["rho_min"] = self.rho_min
        out["rho_max"] = self.rho_max
        return out


def basis_values(elem: ReferenceElement, xi: np.ndarray) -> np.ndarray:
    """phi_j(xi) as a (len(xi), k+1) matrix."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    return np.stack([phi(xi) for phi in elem.basis], axis=-1)


def basis_derivatives(elem: ReferenceElement, xi: np.ndarray) -> np.ndarray:
    """phi_j'(xi) as a (len(xi), k+1) matrix."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    return np.stack([phi.deriv()(xi) for phi in elem.basis], axis=-1)


def expansion_values(elem: ReferenceElement, coeffs: np.ndarray, xi: np.ndarray) -> np.ndarray:
    """Evaluate sum_j c_j phi_j at reference points xi for every row of coeffs."""
    return np.asarray(coeffs, dtype=float) @ basis_values(elem, xi).T


def build_reference_element(k: int) -> ReferenceElement:
    """
    Construct the degree-k reference element.

    Args:
        k: polynomial degree, 0 <= k <= 7

    Returns:
        Fully populated ReferenceElement

    Raises:
        InvalidDegreeError: k outside 0..7
    """
    _check_degree(k)
    return _build(int(k))


@lru_cache(maxsize=None)
def _build(k: int) -> ReferenceElement:
    nodes = equispaced_nodes(k)
    basis = _lagrange_basis(nodes)

    n_quad = math.ceil((2 * k + 1) / 2) + 2
    xq, wq = leggauss(n_quad)
    V = np.stack([phi(xq) for phi in basis], axis=-1)
    Vd = np.stack([phi.deriv()(xq) for phi in basis], axis=-1)

    M = 0.5 * V.T @ (wq[:, None] * V)
    R = V.T @ (wq[:, None] * Vd)
    left = np.array([phi(-1.0) for phi in basis])
    right = np.array([phi(1.0) for phi in basis])
    A = np.outer(left, left)
    B = np.outer(left, right)
    C = np.outer(right, left)
    D = np.outer(right, right)

    M_inv = np.linalg.inv(M)
    logger.debug(f"Reference element k={k}: cond(M)={np.linalg.cond(M):.3e}")

    E = M_inv @ (R + A)
    F = -M_inv @ B
    E_phi = M_inv @ (R - D)
    F_phi = M_inv @ C

    positive = np.clip(E, 0.0, None) + np.clip(F, 0.0, None)
    rho_rows = positive.sum(axis=1)

    alpha = np.array([_integrate(phi) for phi in basis])

    arrays = dict(
        nodes=nodes, M=M, M_inv=M_inv, R=R, A=A, B=B, C=C, D=D,
        E=E, F=F, E_phi=E_phi, F_phi=F_phi, alpha=alpha,
    )
    for arr in arrays.values():
        arr.setflags(write=False)

    return ReferenceElement(
        k=k,
        basis=basis,
        rho_min=float(rho_rows.min()),
        rho_max=float(rho_rows.max()),
        **arrays,
    )


def mass_matrix_scaling(elem: ReferenceElement, h: float) -> CellMatrices:
    """Physical cell matrices: M^i = h M, the rest are independent of h."""
    if not h > 0:
        raise InvalidMeshError("cell width must be positive", h=h)
    return CellMatrices(
        h=h,
        M=h * elem.M,
        R=elem.R.copy(),
        A=elem.A.copy(),
        B=elem.B.copy(),
        C=elem.C.copy(),
        D=elem.D.copy(),
    )


def compute_lambda(elem: ReferenceElement, p: float) -> float:
    """lambda = ((k+1)/2 * max_j alpha_j)^(1-p); the mean-value power constant."""
    if not p > 1:
        raise InvalidExponentError(p)
    base = (elem.k + 1) / 2.0 * float(np.max(elem.alpha))
    return float(base ** (1.0 - p))


def _check_degree(k: int) -> None:
    if isinstance(k, bool) or not isinstance(k, (int, np.integer)) or not 0 <= k <= MAX_DEGREE:
        raise InvalidDegreeError(k)  # type: ignore[arg-type]


def _lagrange_basis(nodes: np.ndarray) -> Tuple[Polynomial, ...]:
    basis = []
    for j, xj in enumerate(nodes):
        others = np.delete(nodes, j)
        if others.size == 0:
            basis.append(Polynomial([1.0]))
            continue
        basis.append(Polynomial.fromroots(others) / float(np.prod(xj - others)))
    return tuple(basis)


def _integrate(phi: Polynomial) -> float:
    antiderivative = phi.integ()
    return float(antiderivative(1.0) - antiderivative(-1.0))
