"""
dgwave Contracts

Pydantic v2 records exchanged between the solver, the blow-up analysis,
the benchmark harness and the command line.
"""

import sys
from enum import Enum
from typing import List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator


class RunStatus(str, Enum):
    """How a run ended."""

    BLOWN_UP = "blown_up"
    MAX_STEPS = "max_steps"
    COMPLETED = "completed"


class TimeStepPolicy(BaseModel):
    """Adaptive step rule dt = h^(1+sigma) * min(1, |u|_inf^-(1+nu)).

    ``nu`` left unset resolves to ``p - 1`` for the exponent of the run.
    """

    sigma: float = Field(0.5, gt=0, description="Mesh exponent; 0.5 gives dt ~ h^(3/2)")
    nu: Optional[float] = Field(None, gt=0, description="Amplitude exponent; None means p - 1")
    dt_cap: Optional[float] = Field(None, gt=0, description="Absolute ceiling on dt")

    model_config = {"frozen": True}

    def resolved_nu(self, p: float) -> float:
        return self.nu if self.nu is not None else p - 1.0

    def time_step(self, sup_u: float, h: float, p: float) -> float:
        """
        Step size for the current sup-norm.

        Args:
            sup_u: max absolute nodal value of u_h
            h: cell width
            p: nonlinearity exponent (only used when nu is unset)

        Returns:
            Strictly positive step size
        """
        dt = h ** (1.0 + self.sigma)
        if sup_u > 1.0:
            dt = dt / sup_u ** (1.0 + self.resolved_nu(p))
        if self.dt_cap is not None:
            dt = min(dt, self.dt_cap)
        return max(dt, sys.float_info.min)


class BlowUpResult(BaseModel):
    """Outcome of a run driven towards the blow-up threshold."""

    scheme: Literal["dg", "fd"]
    h: float = Field(..., gt=0)
    k: Optional[int] = None
    T_h: float = Field(..., description="Sum of executed time steps")
    steps: int = Field(..., ge=0)
    threshold: float = Field(..., gt=0)
    alpha_h: float
    beta_h: Optional[float] = None
    dt0: Optional[float] = None
    gamma_h: Optional[float] = None
    lam: float = Field(..., gt=0)
    status: RunStatus
    overflow: bool = False
    final_sup_u: float

    @model_validator(mode="after")
    def check_threshold_reached(self) -> "BlowUpResult":
        if self.status == RunStatus.BLOWN_UP and not self.final_sup_u >= self.threshold:
            if not (self.overflow and np.isnan(self.final_sup_u)):
                raise ValueError(
                    f"blown_up status requires final sup-norm >= threshold, got {self.final_sup_u}"
                )
        return self


class InequalityViolation(BaseModel):
    """One failed check of the discrete blow-up relations."""

    step: int
    check: Literal["identity", "phi_increment", "monotonicity", "squared_slope"]
    lhs: float
    rhs: float


class InequalityReport(BaseModel):
    """Result of checking a run history against the discrete blow-up relations."""

    checked_steps: int
    violations: List[InequalityViolation] = Field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def first_violation(self) -> Optional[InequalityViolation]:
        if not self.violations:
            return None
        return min(self.violations, key=lambda v: v.step)


class XiCurve(BaseModel):
    """First crossing time of level R at every nodal location."""

    R: float = Field(..., gt=0)
    x: List[float]
    values: List[Optional[float]]

    @model_validator(mode="after")
    def check_lengths(self) -> "XiCurve":
        if len(self.x) != len(self.values):
            raise ValueError(f"x has {len(self.x)} entries but values has {len(self.values)}")
        return self

    def fit_line(self) -> Tuple[float, float]:
        """Least-squares (slope, intercept) through the nodes that crossed R."""
        pairs = [(x, v) for x, v in zip(self.x, self.values) if v is not None]
        if len(pairs) < 2:
            raise ValueError(f"need at least two crossings to fit a line, got {len(pairs)}")
        xs, vs = np.array(pairs).T
        slope, intercept = np.polyfit(xs, vs, 1)
        return float(slope), float(intercept)


class ErrorRow(BaseModel):
    """Relative errors at one recorded time."""

    time: float
    rel_l2: float
    rel_linf: float
    reference_l2: Optional[float] = Field(None, description="Published value, when one exists")


class SnapshotRow(BaseModel):
    """Norms of the numerical solution at a recorded time."""

    time: float
    sup_u: float
    K_u: float


class ConvergenceRow(BaseModel):
    """DG and FD blow-up times at one mesh width."""

    h: float
    k: int
    sigma: float
    nu: float
    T_h_dg: float
    steps_dg: int
    status_dg: RunStatus
    T_h_fd: float
    steps_fd: int
    status_fd: RunStatus
    fd_refine: int = Field(1, ge=1, description="FD points per DG cell")

    @property
    def ok(self) -> bool:
        return self.status_dg == RunStatus.BLOWN_UP and self.status_fd == RunStatus.BLOWN_UP


class SweepEntry(BaseModel):
    """Deviation of one (sigma, nu) pair from the reference blow-up times."""

    sigma: float
    nu: float
    max_deviation: Optional[float] = None
    complete: bool
    screened_out: bool = False
    failures: List[str] = Field(default_factory=list, description="Broken table conditions")
    rows: List[ConvergenceRow] = Field(default_factory=list)


class SweepResult(BaseModel):
    """All swept pairs plus the best complete one; pairs meeting every table condition win first."""

    entries: List[SweepEntry]

    @property
    def best(self) -> Optional[SweepEntry]:
        complete = [e for e in self.entries if e.complete and e.max_deviation is not None]
        if not complete:
            return None
        return min(complete, key=lambda e: (bool(e.failures), e.max_deviation))  # type: ignore[arg-type, return-value]


class BenchmarkReport(BaseModel):
    """Everything one benchmark case produced."""

    case_id: int = Field(..., ge=1, le=4)
    p: float
    k: int
    cells: int
    errors: List[ErrorRow] = Field(default_factory=list)
    snapshots: List[SnapshotRow] = Field(default_factory=list)
    blowup: Optional[BlowUpResult] = None
    inequalities: Optional[InequalityReport] = None
    fd_errors: List[ErrorRow] = Field(default_factory=list)


class PropertyResult(BaseModel):
    """One line of the validation suite."""

    name: str = Field(..., min_length=1)
    passed: bool
    detail: str = ""

    @field_validator("detail")
    @classmethod
    def single_line(cls, v: str) -> str:
        if "\n" in v:
            raise ValueError("detail must fit on one line")
        return v

    def render(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail}"
