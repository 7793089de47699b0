"""
DG solver

Mesh, discrete fields and the fully discrete upwind DG scheme for the split
system u_t + u_x = phi, phi_t - phi_x = |u|^p with the adaptive step
dt = h^(1+sigma) min(1, |u_h|_inf^-(1+nu)).

Cell coupling is periodic (the ghost value left of the first cell is the last
cell, the ghost value right of the last cell is the first cell) unless the
problem carries inflow traces, in which case the ghost cells are filled from them.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss

from .contracts import TimeStepPolicy
from .errors import InvalidExponentError, InvalidMeshError, PeriodicityError, ValidationError
from .reference_element import (
    ReferenceElement,
    basis_derivatives,
    basis_values,
    compute_lambda,
)
from .scheme import BaseScheme

logger = logging.getLogger(__name__)

SpaceFunction = Callable[[np.ndarray], np.ndarray]
SpaceTimeFunction = Callable[[np.ndarray, float], np.ndarray]
# (mesh, elem, t) -> (U ghost left of a, Phi ghost right of b), each of shape (k+1,)
InflowTraces = Callable[["Mesh", ReferenceElement, float], Tuple[np.ndarray, np.ndarray]]

_PERIODIC_RTOL = 1e-9


@dataclass(frozen=True)
class Mesh:
    """Uniform mesh of `cells` cells on [a, b]."""

    a: float
    b: float
    cells: int

    def __post_init__(self) -> None:
        if not self.b > self.a:
            raise InvalidMeshError("b must exceed a", a=self.a, b=self.b)
        if isinstance(self.cells, bool) or int(self.cells) != self.cells or self.cells < 2:
            raise InvalidMeshError("need at least 2 cells", cells=self.cells)
        object.__setattr__(self, "cells", int(self.cells))

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def h(self) -> float:
        return (self.b - self.a) / self.cells

    @property
    def interfaces(self) -> np.ndarray:
        """x_{i-1/2}, i = 0..I, strictly increasing, first a and last b."""
        return np.linspace(self.a, self.b, self.cells + 1)

    @property
    def midpoints(self) -> np.ndarray:
        x = self.interfaces
        return 0.5 * (x[:-1] + x[1:])

    def refined(self, factor: int) -> "Mesh":
        return Mesh(self.a, self.b, self.cells * factor)


@dataclass(frozen=True, eq=False)
class ProblemConfig:
    """
    Exponent, domain and initial data of the Cauchy problem.

    ``du0`` is the exact derivative of ``u0``; phi0 = u1 + u0' is never
    obtained by numerical differentiation.
    """

    p: float
    u0: SpaceFunction
    u1: SpaceFunction
    du0: SpaceFunction
    a: float = 0.0
    b: float = 1.0
    inflow: Optional[InflowTraces] = field(default=None)

    def __post_init__(self) -> None:
        if not self.p > 1:
            raise InvalidExponentError(self.p)
        if not self.b > self.a:
            raise InvalidMeshError("b must exceed a", a=self.a, b=self.b)
        if self.inflow is None:
            ends = np.array([self.a, self.b])
            for name, fn in (("u0", self.u0), ("phi0", self.phi0)):
                left, right = evaluate(fn, ends)
                scale = max(1.0, abs(left), abs(right))
                if abs(left - right) > _PERIODIC_RTOL * scale:
                    raise PeriodicityError(name, float(left), float(right))

    def phi0(self, x: np.ndarray) -> np.ndarray:
        return evaluate(self.u1, x) + evaluate(self.du0, x)

    @property
    def periodic(self) -> bool:
        return self.inflow is None


@dataclass(frozen=True, eq=False)
class FieldState:
    """Coefficients of u_h and phi_h, one row per cell, at time t after n steps."""

    U: np.ndarray
    Phi: np.ndarray
    t: float = 0.0
    n: int = 0

    def __post_init__(self) -> None:
        if self.U.shape != self.Phi.shape or self.U.ndim != 2:
            raise ValidationError(
                f"U and Phi must be equal 2-D arrays, got {self.U.shape} and {self.Phi.shape}"
            )

    @property
    def finite(self) -> bool:
        return bool(np.isfinite(self.U).all() and np.isfinite(self.Phi).all())


def evaluate(f: Callable[[np.ndarray], np.ndarray], x: np.ndarray) -> np.ndarray:
    """Evaluate f on x and broadcast scalars to the shape of x."""
    x = np.asarray(x, dtype=float)
    return np.broadcast_to(np.asarray(f(x), dtype=float), x.shape).copy()


def cell_nodes(mesh: Mesh, elem: ReferenceElement) -> np.ndarray:
    """Physical node coordinates gamma^i(nodes), shape (I, k+1)."""
    left = mesh.interfaces[:-1]
    return left[:, None] + (elem.nodes[None, :] + 1.0) * (0.5 * mesh.h)


def interpolate(f: SpaceFunction, mesh: Mesh, elem: ReferenceElement) -> np.ndarray:
    """Nodal interpolant I_h f as an (I, k+1) coefficient array."""
    return evaluate(f, cell_nodes(mesh, elem))


def initial_state(config: ProblemConfig, mesh: Mesh, elem: ReferenceElement) -> FieldState:
    _check_domain(config, mesh)
    return FieldState(
        U=interpolate(config.u0, mesh, elem),
        Phi=interpolate(config.phi0, mesh, elem),
    )


def sup_norm(state: FieldState) -> Tuple[float, float]:
    """(max |U|, max |Phi|) over all cells and nodes."""
    return float(np.max(np.abs(state.U))), float(np.max(np.abs(state.Phi)))


def is_positive(state: FieldState, mu: float = 0.0) -> bool:
    """Every coefficient of U and Phi strictly above mu."""
    return bool(np.min(state.U) > mu and np.min(state.Phi) > mu)


def adaptive_dt(state: FieldState, policy: TimeStepPolicy, h: float, p: float) -> float:
    sup_u, _ = sup_norm(state)
    return policy.time_step(sup_u, h, p)


def dg_step(
    state: FieldState,
    elem: ReferenceElement,
    mesh: Mesh,
    config: ProblemConfig,
    dt: float,
) -> FieldState:
    """
    One step of the fully discrete scheme.

    The u-sweep runs first over every cell; the phi-sweep then uses the
    updated U in its source term.

    Args:
        state: current coefficients
        elem: reference element matching the coefficient width
        mesh: uniform mesh
        config: exponent and boundary coupling
        dt: step size

    Returns:
        Next state; non-finite entries are left for the caller to detect
    """
    if not dt > 0:
        raise ValidationError(f"time step must be positive, got: {dt}", details={"dt": dt})
    ratio = dt / mesh.h
    U, Phi = state.U, state.Phi

    if config.inflow is None:
        U_left = np.roll(U, 1, axis=0)
        Phi_right = np.roll(Phi, -1, axis=0)
    else:
        u_ghost, phi_ghost = config.inflow(mesh, elem, state.t)
        U_left = np.vstack([np.asarray(u_ghost, dtype=float)[None, :], U[:-1]])
        Phi_right = np.vstack([Phi[1:], np.asarray(phi_ghost, dtype=float)[None, :]])

    with np.errstate(over="ignore", invalid="ignore"):
        U_next = U - ratio * (U @ elem.E.T + U_left @ elem.F.T) + dt * Phi
        Phi_next = (
            Phi
            + ratio * (Phi @ elem.E_phi.T + Phi_right @ elem.F_phi.T)
            + dt * np.abs(U_next) ** config.p
        )
    return replace(state, U=U_next, Phi=Phi_next, t=state.t + dt, n=state.n + 1)


def assemble_update_operators(
    elem: ReferenceElement, cells: int, ratio: float
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Global block matrices (M_n, N_n) of one periodic step with dt/h = ratio.

    U^{n+1} = M_n U^n + dt Phi^n and Phi^{n+1} = N_n Phi^n + dt |U^{n+1}|^p on the
    flattened (cell-major) coefficient vectors. M_n is block lower bidiagonal with
    a corner block coupling the first cell to the last; N_n is block upper
    bidiagonal with the mirror corner.
    """
    eye = np.eye(elem.size)
    cells_eye = np.eye(cells)
    previous = np.roll(cells_eye, 1, axis=0)
    following = np.roll(cells_eye, -1, axis=0)
    M_n = np.kron(cells_eye, eye - ratio * elem.E) + np.kron(previous, -ratio * elem.F)
    N_n = np.kron(cells_eye, eye + ratio * elem.E_phi) + np.kron(following, ratio * elem.F_phi)
    return M_n, N_n


def infinity_norm(matrix: np.ndarray) -> float:
    """Max row sum of absolute values."""
    return float(np.abs(matrix).sum(axis=1).max())


def consistency_residuals(
    u: SpaceTimeFunction,
    phi: SpaceTimeFunction,
    mesh: Mesh,
    elem: ReferenceElement,
    t: float,
    dt: float,
    p: float,
) -> Tuple[float, float]:
    """
    Residuals of the scheme with a smooth exact solution inserted.

    Interface traces come from the exact functions themselves (upwind side
    for u, downwind side for phi), so a discontinuous u leaves its jump in
    the residual. Magnitudes are l1 sums over cells and test functions.

    Returns:
        (|r^n|, |s^n|)
    """
    if not dt > 0:
        raise ValidationError(f"time step must be positive, got: {dt}", details={"dt": dt})
    xq, wq = leggauss(elem.k + 8)
    V = basis_values(elem, xq)
    Vd = basis_derivatives(elem, xq)
    half_h = 0.5 * mesh.h
    x_left = mesh.interfaces[:-1]
    x_right = mesh.interfaces[1:]
    x = x_left[:, None] + (xq[None, :] + 1.0) * half_h
    left_vals = basis_values(elem, np.array([-1.0]))[0]
    right_vals = basis_values(elem, np.array([1.0]))[0]

    def transport(f: SpaceTimeFunction, sign: float) -> np.ndarray:
        # time difference quotient, integrated-by-parts flux term and traces
        f_now = f(x, t)
        rate = (f(x, t + dt) - f_now) / dt
        out = half_h * (rate * wq) @ V
        out -= sign * (f_now * wq) @ Vd
        out += sign * (
            f(x_right, t)[:, None] * right_vals[None, :]
            - f(x_left, t)[:, None] * left_vals[None, :]
        )
        return out

    r = transport(u, 1.0) - half_h * (phi(x, t) * wq) @ V

    nodal_source = np.abs(u(cell_nodes(mesh, elem), t + dt)) ** p
    s = transport(phi, -1.0) - mesh.h * nodal_source @ elem.M.T

    return float(np.abs(r).sum()), float(np.abs(s).sum())


class DGScheme(BaseScheme):
    """DG discretization of one problem on one mesh, for the shared run loop."""

    name = "dg"

    def __init__(self, config: ProblemConfig, mesh: Mesh, elem: ReferenceElement) -> None:
        _check_domain(config, mesh)
        self.config = config
        self.mesh = mesh
        self.elem = elem
        self.h = mesh.h
        self.p = config.p
        self._weights = (0.5 * mesh.h / mesh.length) * np.asarray(elem.alpha)
        self._positions = cell_nodes(mesh, elem).ravel()

    def initial_state(self) -> FieldState:
        return initial_state(self.config, self.mesh, self.elem)

    def step(self, state: FieldState, dt: float) -> FieldState:
        return dg_step(state, self.elem, self.mesh, self.config, dt)

    def sup_norms(self, state: FieldState) -> Tuple[float, float]:
        return sup_norm(state)

    def mean_values(self, state: FieldState) -> Tuple[float, float]:
        return float((state.U @ self._weights).sum()), float((state.Phi @ self._weights).sum())

    def node_positions(self) -> np.ndarray:
        return self._positions

    def nodal_u(self, state: FieldState) -> np.ndarray:
        return state.U.ravel()

    def lam(self) -> float:
        return compute_lambda(self.elem, self.p)

    def describe(self) -> str:
        return f"dg(k={self.elem.k}, cells={self.mesh.cells}, p={self.p:g})"


def _check_domain(config: ProblemConfig, mesh: Mesh) -> None:
    if not (np.isclose(config.a, mesh.a) and np.isclose(config.b, mesh.b)):
        raise InvalidMeshError(
            "mesh domain does not match the problem domain",
            mesh=(mesh.a, mesh.b),
            problem=(config.a, config.b),
        )
