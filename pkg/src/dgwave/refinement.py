"""
Mesh refinement search.

Halve h until a short run keeps every coefficient strictly positive and
stays inside twice its initial amplitude |u_h|_inf + |phi_h|_inf.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, Optional

from tenacity import (
    RetryCallState,
    Retrying,
    retry_if_exception_type,
    stop_after_attempt,
    wait_none,
)

from .blowup_analysis import DEFAULT_THRESHOLD, RunHistory, drive
from .contracts import RunStatus, TimeStepPolicy
from .dg_solver import DGScheme, FieldState, Mesh, ProblemConfig, is_positive, sup_norm
from .errors import PropertyNotMetError, RefinementExhaustedError
from .reference_element import ReferenceElement

logger = logging.getLogger(__name__)


def _log_attempt(retry_state: RetryCallState) -> None:
    exc = retry_state.outcome.exception() if retry_state.outcome else None
    logger.warning(f"Refinement attempt {retry_state.attempt_number} rejected: {exc}")


class RefinementPolicy:
    """
    How far the search may refine.

    Defaults:
    - Max attempts: 5 (32 -> 512 cells when halving from 32)
    - Refinement factor: 2
    """

    def __init__(self, max_attempts: int = 5, factor: int = 2) -> None:
        self.max_attempts = max_attempts
        self.factor = factor

    @classmethod
    def default(cls) -> "RefinementPolicy":
        return cls(max_attempts=5, factor=2)

    @classmethod
    def single(cls) -> "RefinementPolicy":
        """Check one mesh, never refine."""
        return cls(max_attempts=1)

    def to_tenacity_kwargs(self) -> Dict[str, Any]:
        """Convert to tenacity Retrying kwargs."""
        return {
            "stop": stop_after_attempt(self.max_attempts),
            "wait": wait_none(),
            "retry": retry_if_exception_type(PropertyNotMetError),
            "before_sleep": _log_attempt,
            "reraise": True,
        }


@dataclass(frozen=True)
class AdmissibleMesh:
    """The first mesh that passed, with what the run observed on it."""

    mesh: Mesh
    attempts: int
    min_coefficient: float
    max_amplitude: float
    bound: float


class _Extremes:
    def __init__(self, mu: float) -> None:
        self.mu = mu
        self.positive = True
        self.min_coefficient = float("inf")
        self.max_amplitude = 0.0

    def __call__(self, state: FieldState, history: RunHistory) -> None:
        sup_u, sup_phi = sup_norm(state)
        self.max_amplitude = max(self.max_amplitude, sup_u + sup_phi)
        self.positive = self.positive and is_positive(state, self.mu)
        low = min(float(state.U.min()), float(state.Phi.min()))
        self.min_coefficient = min(self.min_coefficient, low)


def find_admissible_mesh(
    config: ProblemConfig,
    elem: ReferenceElement,
    policy: TimeStepPolicy,
    start_cells: int = 32,
    steps: int = 200,
    mu: float = 0.0,
    refinement: Optional[RefinementPolicy] = None,
) -> AdmissibleMesh:
    """
    Refine until `steps` steps stay positive (every coefficient > mu) and bounded by 2 Lambda.

    Raises:
        RefinementExhaustedError: no mesh within the policy's attempts passed
    """
    refinement = refinement or RefinementPolicy.default()
    cells = start_cells
    attempts = 0

    def attempt() -> AdmissibleMesh:
        nonlocal cells, attempts
        attempts += 1
        mesh = Mesh(config.a, config.b, cells)
        scheme = DGScheme(config, mesh, elem)
        extremes = _Extremes(mu)
        result, _ = drive(
            scheme,
            policy,
            threshold=DEFAULT_THRESHOLD,
            max_steps=steps,
            observers=[extremes],
            budget_status=RunStatus.COMPLETED,
        )
        bound = 2.0 * sum(sup_norm(scheme.initial_state()))
        if result.steps == steps and extremes.positive and extremes.max_amplitude <= bound:
            logger.info(f"Mesh with {cells} cells passed after {attempts} attempts")
            return AdmissibleMesh(mesh, attempts, extremes.min_coefficient, extremes.max_amplitude, bound)
        rejected = cells
        cells *= refinement.factor
        raise PropertyNotMetError(
            f"{rejected} cells: min coefficient {extremes.min_coefficient:.6g}, "
            f"max amplitude {extremes.max_amplitude:.6g} against bound {bound:.6g}",
            details={"cells": rejected},
        )

    try:
        return Retrying(**refinement.to_tenacity_kwargs())(attempt)
    except PropertyNotMetError as exc:
        raise RefinementExhaustedError(attempts, exc.details["cells"]) from exc

