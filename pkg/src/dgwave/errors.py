"""
dgwave Errors

Typed exceptions for error handling.
"""

from typing import Any, Dict, Optional


class DGWaveError(Exception):
    """Base exception for all dgwave errors."""

    def __init__(
        self,
        message: str,
        code: Optional[str] = None,
        details: Optional[Dict[str, Any]] = None,
    ) -> None:
        super().__init__(message)
        self.message = message
        self.code = code or "UNKNOWN_ERROR"
        self.details = details or {}


class ValidationError(DGWaveError):
    """Input validation failed."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None) -> None:
        super().__init__(message, code="VALIDATION_ERROR", details=details)


class InvalidDegreeError(ValidationError):
    """Polynomial degree outside the supported range."""

    def __init__(self, k: int) -> None:
        super().__init__(
            f"polynomial degree must lie in 0..7, got: {k}",
            details={"k": k, "min": 0, "max": 7},
        )


class InvalidMeshError(ValidationError):
    """Mesh parameters are inconsistent."""

    def __init__(self, reason: str, **details: Any) -> None:
        super().__init__(f"Invalid mesh: {reason}", details=details)


class InvalidExponentError(ValidationError):
    """Nonlinearity exponent must exceed one."""

    def __init__(self, p: float) -> None:
        super().__init__(f"exponent p must be > 1, got: {p}", details={"p": p})


class CFLViolationError(ValidationError):
    """Upwind Euler step exceeds the CFL limit dt <= h."""

    def __init__(self, dt: float, h: float) -> None:
        super().__init__(
            f"CFL condition violated: dt={dt!r} > h={h!r}",
            details={"dt": dt, "h": h},
        )


class PeriodicityError(ValidationError):
    """Initial data do not match at the two ends of a periodic domain."""

    def __init__(self, field: str, left: float, right: float) -> None:
        super().__init__(
            f"{field} is not periodic: value {left!r} at a, {right!r} at b",
            details={"field": field, "left": left, "right": right},
        )


class ExactSolutionDomainError(ValidationError):
    """Closed-form solution evaluated at or beyond its blow-up front."""

    def __init__(self, case_id: int, t: float) -> None:
        super().__init__(
            f"exact solution of case {case_id} is undefined at t={t!r} (blow-up front reached)",
            details={"case": case_id, "t": t},
        )


class ZeroNormError(ValidationError):
    """Relative error requested against a reference of zero norm."""

    def __init__(self, norm: str) -> None:
        super().__init__(f"reference {norm} norm is zero", details={"norm": norm})


class InconsistentInputError(DGWaveError):
    """Inputs violate a relation that holds for every valid run."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None) -> None:
        super().__init__(message, code="INCONSISTENT_INPUT", details=details)


class DivergentIntegralError(DGWaveError):
    """Improper integral of 1/G does not converge."""

    def __init__(self, p: float) -> None:
        super().__init__(
            f"integral of 1/G diverges for p={p!r}; requires p > 1",
            code="DIVERGENT_INTEGRAL",
            details={"p": p},
        )


class RefinementExhaustedError(DGWaveError):
    """Mesh halving ran out of attempts without satisfying the target property."""

    def __init__(self, attempts: int, last_cells: int, details: Optional[Dict[str, Any]] = None) -> None:
        super().__init__(
            f"Refinement exhausted after {attempts} attempts (last mesh: {last_cells} cells)",
            code="REFINEMENT_EXHAUSTED",
            details={**(details or {}), "attempts": attempts, "cells": last_cells},
        )


class PropertyNotMetError(DGWaveError):
    """A refinement attempt produced a run that misses the target property."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None) -> None:
        super().__init__(message, code="PROPERTY_NOT_MET", details=details)
