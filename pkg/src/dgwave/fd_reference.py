"""
Finite-difference comparator

First-order upwind differences for the split system on a periodic grid
co-located with the DG cell midpoints:

    u_j <- u_j - dt/h (u_j - u_{j-1}) + dt phi_j
    phi_j <- phi_j + dt/h (phi_{j+1} - phi_j) + dt |u_j|^p     (updated u)
"""

import logging
from dataclasses import dataclass, replace
from typing import Any, Tuple

import numpy as np

from .blowup_analysis import DEFAULT_MAX_STEPS, DEFAULT_THRESHOLD, RunHistory, drive
from .contracts import BlowUpResult, TimeStepPolicy
from .dg_solver import Mesh, ProblemConfig, evaluate
from .errors import CFLViolationError, InvalidMeshError, ValidationError
from .scheme import BaseScheme

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class FDState:
    """Nodal values of u and phi on the FD grid at time t after n steps."""

    u: np.ndarray
    phi: np.ndarray
    t: float = 0.0
    n: int = 0

    def __post_init__(self) -> None:
        if self.u.shape != self.phi.shape or self.u.ndim != 1:
            raise ValidationError(
                f"u and phi must be equal 1-D arrays, got {self.u.shape} and {self.phi.shape}"
            )


def fd_grid(mesh: Mesh) -> np.ndarray:
    """Grid points: the cell midpoints of the mesh."""
    return mesh.midpoints


def fd_initial_state(config: ProblemConfig, mesh: Mesh) -> FDState:
    if not config.periodic:
        raise ValidationError("the finite-difference comparator supports periodic problems only")
    x = fd_grid(mesh)
    return FDState(u=evaluate(config.u0, x), phi=config.phi0(x))


def fd_step(state: FDState, h_fd: float, dt: float, p: float) -> FDState:
    """
    One upwind Euler step with periodic indices.

    Raises:
        ValidationError: dt <= 0
        CFLViolationError: dt > h_fd
    """
    if not dt > 0:
        raise ValidationError(f"time step must be positive, got: {dt}", details={"dt": dt})
    if dt > h_fd:
        raise CFLViolationError(dt, h_fd)
    ratio = dt / h_fd
    u, phi = state.u, state.phi
    with np.errstate(over="ignore", invalid="ignore"):
        u_next = u - ratio * (u - np.roll(u, 1)) + dt * phi
        phi_next = phi + ratio * (np.roll(phi, -1) - phi) + dt * np.abs(u_next) ** p
    return replace(state, u=u_next, phi=phi_next, t=state.t + dt, n=state.n + 1)


class FDScheme(BaseScheme):
    """Upwind FD discretization of one periodic problem on one grid."""

    name = "fd"

    def __init__(self, config: ProblemConfig, mesh: Mesh) -> None:
        if not (np.isclose(config.a, mesh.a) and np.isclose(config.b, mesh.b)):
            raise InvalidMeshError(
                "grid domain does not match the problem domain",
                mesh=(mesh.a, mesh.b),
                problem=(config.a, config.b),
            )
        if not config.periodic:
            raise ValidationError("the finite-difference comparator supports periodic problems only")
        self.config = config
        self.mesh = mesh
        self.h = mesh.h
        self.p = config.p
        self._scale = mesh.h / mesh.length

    def initial_state(self) -> FDState:
        return fd_initial_state(self.config, self.mesh)

    def step(self, state: FDState, dt: float) -> FDState:
        return fd_step(state, self.h, dt, self.p)

    def sup_norms(self, state: FDState) -> Tuple[float, float]:
        return float(np.max(np.abs(state.u))), float(np.max(np.abs(state.phi)))

    def mean_values(self, state: FDState) -> Tuple[float, float]:
        return self._scale * float(state.u.sum()), self._scale * float(state.phi.sum())

    def node_positions(self) -> np.ndarray:
        return fd_grid(self.mesh)

    def nodal_u(self, state: FDState) -> np.ndarray:
        return state.u

    def describe(self) -> str:
        return f"fd(points={self.mesh.cells}, p={self.p:g})"


def fd_run_until_blowup(
    config: ProblemConfig,
    mesh: Mesh,
    policy: TimeStepPolicy,
    threshold: float = DEFAULT_THRESHOLD,
    max_steps: int = DEFAULT_MAX_STEPS,
    **options: Any,
) -> Tuple[BlowUpResult, RunHistory]:
    """
    Drive the FD scheme towards blow-up.

    Pass ``h_policy`` to feed a coarser mesh width to the step rule, so a finer
    FD grid follows the step sequence of a DG run.
    """
    return drive(
        FDScheme(config, mesh),
        policy,
        threshold=threshold,
        max_steps=max_steps,
        **options,
    )
