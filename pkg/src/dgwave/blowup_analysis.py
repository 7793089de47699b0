"""
Blow-up analysis

Discrete mean value K_h, the quantities alpha_h, beta_h, gamma_h and G(z) of
the blow-up argument, the generic run loop that detects numerical blow-up,
per-step monitoring of the discrete blow-up relations, xi_R curves and the
blow-up time and stability mesh bounds.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import quad

from .contracts import (
    BlowUpResult,
    InequalityReport,
    InequalityViolation,
    RunStatus,
    TimeStepPolicy,
    XiCurve,
)
from .dg_solver import DGScheme, Mesh, ProblemConfig
from .errors import (
    DivergentIntegralError,
    InconsistentInputError,
    InvalidExponentError,
    ValidationError,
)
from .reference_element import ReferenceElement
from .scheme import Scheme

logger = logging.getLogger(__name__)

DEFAULT_THRESHOLD = 1e9
DEFAULT_MAX_STEPS = 2_000_000

HISTORY_FIELDS = ("n", "t", "dt", "sup_u", "sup_phi", "K_u", "K_phi")

# Rounding allowance, in units of machine epsilon, for quantities formed from K_h differences.
_ROUNDING_ULPS = 256.0


# ---------------------------------------------------------------------------
# Mean value functional
# ---------------------------------------------------------------------------


def k_h(U: np.ndarray, mesh: Mesh, elem: ReferenceElement) -> float:
    """K_h = 1/(b-a) sum_i (h/2) sum_j alpha_j u_j^i; exact for members of V_h^k."""
    return float((0.5 * mesh.h / mesh.length) * (np.asarray(U) @ elem.alpha).sum())


def weighted_l1_norm(U: np.ndarray, mesh: Mesh, elem: ReferenceElement) -> float:
    """1/(b-a) sum_i (h/2) sum_j alpha_j |u_j^i|; coincides with K_h for positive states."""
    return k_h(np.abs(U), mesh, elem)


def gamma_h(alpha_h: float, beta_h: float, dt0: float, lam: float, p: float) -> float:
    """gamma_h = ((beta_h - alpha_h)/dt0)^2 - lam/(p+1) alpha_h^(p+1)."""
    if not dt0 > 0:
        raise ValidationError(f"first time step must be positive, got: {dt0}", details={"dt0": dt0})
    # overflowed runs give -inf rather than raising
    with np.errstate(over="ignore", invalid="ignore"):
        slope = (np.float64(beta_h) - alpha_h) / dt0
        return float(slope**2 - lam / (p + 1.0) * np.float64(alpha_h) ** (p + 1.0))


def G(z: float, lam: float, p: float, gamma: float) -> float:
    """sqrt(lam/(p+1) z^(p+1) + gamma_h)."""
    radicand = lam / (p + 1.0) * z ** (p + 1.0) + gamma
    if radicand < 0:
        raise InconsistentInputError(
            f"negative radicand in G at z={z!r}: {radicand!r}",
            details={"z": z, "lam": lam, "p": p, "gamma_h": gamma},
        )
    return math.sqrt(radicand)


def _integral_to_infinity(integrand: Callable[[float], float], start: float) -> float:
    # z = start + s/(1-s) maps [0, 1) onto [start, inf)
    def mapped(s: float) -> float:
        one_minus = 1.0 - s
        return integrand(start + s / one_minus) / (one_minus * one_minus)

    value, _ = quad(mapped, 0.0, 1.0, epsrel=1e-8, limit=200)
    return float(value)


def blowup_integral(alpha_h: float, lam: float, p: float, gamma: float) -> float:
    """int_{alpha_h}^inf dz / G(z)."""
    if not p > 1:
        raise DivergentIntegralError(p)
    return _integral_to_infinity(lambda z: 1.0 / G(z, lam, p, gamma), alpha_h)


def blowup_time_upper_bound(
    alpha_h: float, lam: float, p: float, gamma: float, h: float, C: float
) -> float:
    """
    Upper bound 2 (int_{alpha_h}^inf dz/G(z) + C h) on the numerical blow-up time.

    Args:
        alpha_h: K_h of the initial u
        lam: mean-value power constant of the element
        p: exponent, > 1
        gamma: gamma_h of the run
        h: mesh width
        C: user-supplied constant (see fit_bound_constant)

    Raises:
        DivergentIntegralError: p <= 1
        InconsistentInputError: G has a negative radicand on [alpha_h, inf)
    """
    return 2.0 * (blowup_integral(alpha_h, lam, p, gamma) + C * h)


def fit_bound_constant(
    T_h: float, h: float, alpha_h: float, lam: float, p: float, gamma: float
) -> float:
    """Smallest C >= 0 for which the blow-up time bound holds at this resolution."""
    integral = blowup_integral(alpha_h, lam, p, gamma)
    return max(0.0, (0.5 * T_h - integral) / h)


def mean_value_ode_blowup_time(alpha: float, beta: float, p: float) -> float:
    """
    Blow-up time of K'' = K^p, K(0) = alpha >= 0, K'(0) = beta > 0.

    Uses the first integral K'^2 = beta^2 + 2/(p+1) (K^(p+1) - alpha^(p+1)).
    """
    if not p > 1:
        raise DivergentIntegralError(p)
    if not beta > 0 or alpha < 0:
        raise ValidationError(
            "mean-value blow-up time needs alpha >= 0 and beta > 0",
            details={"alpha": alpha, "beta": beta},
        )
    offset = beta**2 - 2.0 / (p + 1.0) * alpha ** (p + 1.0)
    return _integral_to_infinity(
        lambda z: 1.0 / math.sqrt(offset + 2.0 / (p + 1.0) * z ** (p + 1.0)), alpha
    )


def stability_mesh_bound(N: int, Lam: float, sigma: float, rho: float, p: float) -> float:
    """
    Mesh width below which N steps keep |u_h|_inf + |phi_h|_inf <= 2 Lam.

    Diagnostic: the minimum of the three sufficient conditions of the stability
    argument, evaluated as written.
    """
    if not p > 1:
        raise InvalidExponentError(p)
    for name, value in (("N", N), ("Lam", Lam), ("sigma", sigma), ("rho", rho)):
        if not value > 0:
            raise ValidationError(f"{name} must be positive, got: {value}", details={name: value})
    growth = 1.0 + (2.0 * Lam) ** (p - 1.0)
    first = ((1.5 ** (1.0 / N) - 1.0) / (2.0 * rho)) ** (1.0 / sigma)
    second = Lam / (12.0 * N * Lam * growth) ** (1.0 / (1.0 + sigma))
    third = Lam / (
        4.0 * (3.0 * Lam) ** p * (1.0 + Lam ** (p * sigma) / (6.0**p * growth**p))
    ) ** (1.0 / (1.0 + sigma))
    return float(min(first, second, third))


def estimate_blowup_steps(
    policy: TimeStepPolicy, h: float, p: float, sup_u0: float, threshold: float
) -> float:
    """
    Step count for |u| to climb from sup_u0 to the threshold on the blow-up profile.

    Along u' = sqrt(2/(p+1)) u^((p+1)/2) one step multiplies u by
    1 + c kappa u^((p-3)/2 - nu) with c = h^(1+sigma); summing the steps gives
    the integral of u^(q-1) / (c kappa) with q = nu - (p-3)/2. A screen, not a
    bound: the approach phase before the profile sets in is ignored.
    """
    if not p > 1:
        raise InvalidExponentError(p)
    if not h > 0 or not threshold > 0:
        raise ValidationError(
            "h and threshold must be positive", details={"h": h, "threshold": threshold}
        )
    start = max(sup_u0, 1.0)
    if start >= threshold:
        return 0.0
    rate = h ** (1.0 + policy.sigma) * math.sqrt(2.0 / (p + 1.0))
    q = policy.resolved_nu(p) - 0.5 * (p - 3.0)
    if abs(q) < 1e-12:
        return math.log(threshold / start) / rate
    return (threshold**q - start**q) / (q * rate)


# ---------------------------------------------------------------------------
# Run loop
# ---------------------------------------------------------------------------


@dataclass
class RunHistory:
    """Per-step records of a run; index 0 holds the initial state.

    A lean history keeps the initial record and the latest one only.
    """

    scheme: str
    columns: Dict[str, List[float]] = field(
        default_factory=lambda: {name: [] for name in HISTORY_FIELDS}
    )
    lean: bool = False

    def append(
        self, n: int, t: float, dt: float, sup_u: float, sup_phi: float, K_u: float, K_phi: float
    ) -> None:
        if self.lean and len(self) > 1:
            for name, value in zip(HISTORY_FIELDS, (n, t, dt, sup_u, sup_phi, K_u, K_phi)):
                self.columns[name][-1] = value
            return
        for name, value in zip(HISTORY_FIELDS, (n, t, dt, sup_u, sup_phi, K_u, K_phi)):
            self.columns[name].append(value)

    def __len__(self) -> int:
        return len(self.columns["n"])

    @property
    def steps(self) -> int:
        return int(self.columns["n"][-1]) if len(self) else 0

    def row(self, index: int) -> Tuple[float, ...]:
        return tuple(self.columns[name][index] for name in HISTORY_FIELDS)

    def rows(self) -> Iterator[Tuple[float, ...]]:
        """Executed steps only (n >= 1)."""
        for index in range(1, len(self)):
            yield self.row(index)

    def arrays(self) -> Dict[str, np.ndarray]:
        return {name: np.asarray(values, dtype=float) for name, values in self.columns.items()}

    def first_at_or_after(self, t: float) -> Optional[int]:
        times = np.asarray(self.columns["t"])
        hits = np.nonzero(times >= t)[0]
        return int(hits[0]) if hits.size else None


# observer(state, history) runs after the initial state and after every step
Observer = Callable[[Any, RunHistory], None]


def drive(
    scheme: Scheme[Any],
    policy: TimeStepPolicy,
    *,
    threshold: float = DEFAULT_THRESHOLD,
    max_steps: int = DEFAULT_MAX_STEPS,
    t_end: Optional[float] = None,
    sample_times: Sequence[float] = (),
    until: Optional[Callable[[], bool]] = None,
    observers: Sequence[Observer] = (),
    budget_status: RunStatus = RunStatus.MAX_STEPS,
    h_policy: Optional[float] = None,
    lean_history: bool = False,
) -> Tuple[BlowUpResult, RunHistory]:
    """
    Step a scheme until blow-up, overflow, a stopping time or the step budget.

    Args:
        scheme: DG or FD scheme
        policy: adaptive step rule
        threshold: sup-norm of u that counts as blow-up
        max_steps: step budget
        t_end: optional end time; reaching it ends the run as completed
        sample_times: times the run lands on exactly (the step before is shortened)
        until: optional predicate ending the run as completed
        observers: callables notified after every accepted state
        budget_status: status reported when the step budget runs out
        h_policy: mesh width fed to the step rule (defaults to the scheme's own)
        lean_history: keep only the initial and the latest record

    Returns:
        (BlowUpResult, RunHistory)
    """
    if not threshold > 0:
        raise ValidationError(f"threshold must be positive, got: {threshold}")
    state = scheme.initial_state()
    sup_u, sup_phi = scheme.sup_norms(state)
    if not sup_u < threshold:
        raise ValidationError(
            f"threshold {threshold!r} does not exceed the initial sup-norm {sup_u!r}",
            details={"threshold": threshold, "sup_u": sup_u},
        )
    K_u, K_phi = scheme.mean_values(state)
    history = RunHistory(scheme.name, lean=lean_history)
    history.append(0, state.t, 0.0, sup_u, sup_phi, K_u, K_phi)
    for observer in observers:
        observer(state, history)

    h_rule = scheme.h if h_policy is None else h_policy
    stops = sorted({float(s) for s in sample_times if s > 0})
    if t_end is not None:
        stops = sorted(set(stops) | {float(t_end)})

    alpha_h = K_u
    beta_h: Optional[float] = None
    dt0: Optional[float] = None
    overflow = False
    logger.info(
        f"Run start: {scheme.describe()}, sigma={policy.sigma}, nu={policy.resolved_nu(scheme.p)}, "
        f"threshold={threshold:g}"
    )

    while True:
        if sup_u >= threshold:
            status = RunStatus.BLOWN_UP
            break
        if t_end is not None and state.t >= t_end:
            status = RunStatus.COMPLETED
            break
        if until is not None and until():
            status = RunStatus.COMPLETED
            break
        if state.n >= max_steps:
            status = budget_status
            break

        dt = policy.time_step(sup_u, h_rule, scheme.p)
        while stops and stops[0] <= state.t:
            stops.pop(0)
        landing: Optional[float] = None
        if stops and state.t + dt >= stops[0]:
            landing = stops.pop(0)
            dt = landing - state.t

        state = scheme.step(state, dt)
        if landing is not None:
            state = replace(state, t=landing)
        sup_u, sup_phi = scheme.sup_norms(state)
        K_u, K_phi = scheme.mean_values(state)
        history.append(state.n, state.t, dt, sup_u, sup_phi, K_u, K_phi)
        if state.n == 1:
            beta_h, dt0 = K_u, dt
        for observer in observers:
            observer(state, history)

        if not (math.isfinite(sup_u) and math.isfinite(sup_phi)):
            overflow = True
            status = RunStatus.BLOWN_UP
            logger.warning(f"Run overflow at step {state.n}, t={state.t:.17g}")
            break

    if status == RunStatus.MAX_STEPS:
        logger.warning(f"Step budget of {max_steps} exhausted at t={state.t:.17g}, |u|={sup_u:.6g}")

    lam = scheme.lam()
    gamma = None
    if beta_h is not None and dt0 is not None and math.isfinite(beta_h):
        gamma = gamma_h(alpha_h, beta_h, dt0, lam, scheme.p)

    result = BlowUpResult(
        scheme=scheme.name,  # type: ignore[arg-type]
        h=scheme.h,
        k=getattr(getattr(scheme, "elem", None), "k", None),
        T_h=state.t,
        steps=state.n,
        threshold=threshold,
        alpha_h=alpha_h,
        beta_h=beta_h,
        dt0=dt0,
        gamma_h=gamma,
        lam=lam,
        status=status,
        overflow=overflow,
        final_sup_u=math.inf if overflow else sup_u,
    )
    logger.info(
        f"Run end: {scheme.describe()}, status={status.value}, T_h={state.t:.17g}, steps={state.n}"
    )
    return result, history


def run_until_blowup(
    config: ProblemConfig,
    mesh: Mesh,
    elem: ReferenceElement,
    policy: TimeStepPolicy,
    threshold: float = DEFAULT_THRESHOLD,
    max_steps: int = DEFAULT_MAX_STEPS,
    **options: Any,
) -> Tuple[BlowUpResult, RunHistory]:
    """Drive the DG scheme towards blow-up; see drive() for the options."""
    return drive(
        DGScheme(config, mesh, elem),
        policy,
        threshold=threshold,
        max_steps=max_steps,
        **options,
    )


# ---------------------------------------------------------------------------
# Discrete blow-up relations
# ---------------------------------------------------------------------------


def check_blowup_inequalities(
    history: RunHistory, lam: float, p: float, rtol: float = 1e-10
) -> InequalityReport:
    """
    Check every executed step against the discrete blow-up relations.

    (i)   (K(u^{n+1}) - K(u^n)) / dt^n = K(phi^n)
    (ii)  K(phi^{n+1}) - K(phi^n) >= lam dt^n K(u^{n+1})^p
    (iii) K(u^{n+1}) > K(u^n)
    (iv)  ((K(u^{n+1}) - K(u^n)) / dt^n)^2 >= lam/(p+1) K(u^n)^(p+1) + gamma_h

    Comparisons allow rtol plus the rounding carried by differences of K_h values.
    Violations are reported against step n + 1; the final overflowed record, if
    any, is skipped.
    """
    arr = history.arrays()
    K_u, K_phi, dt = arr["K_u"], arr["K_phi"], arr["dt"]
    finite = np.isfinite(K_u) & np.isfinite(K_phi) & np.isfinite(arr["sup_u"])
    last = len(K_u) if finite.all() else int(np.argmin(finite))
    K_u, K_phi, dt = K_u[:last], K_phi[:last], dt[:last]
    steps = max(len(K_u) - 1, 0)
    if steps == 0:
        return InequalityReport(checked_steps=0)

    eps = np.finfo(float).eps * _ROUNDING_ULPS
    u0, u1 = K_u[:-1], K_u[1:]
    f0, f1 = K_phi[:-1], K_phi[1:]
    d = dt[1:]
    slope = (u1 - u0) / d
    slack_u = eps * (np.abs(u0) + np.abs(u1)) / d
    slack_phi = eps * (np.abs(f0) + np.abs(f1))

    c = lam / (p + 1.0)
    gamma = slope[0] ** 2 - c * u0[0] ** (p + 1.0)
    gamma_slack = eps * (slope[0] ** 2 + c * abs(u0[0]) ** (p + 1.0)) + 2 * abs(slope[0]) * slack_u[0]

    violations: List[InequalityViolation] = []

    def flag(check: str, mask: np.ndarray, lhs: np.ndarray, rhs: np.ndarray) -> None:
        for index in np.nonzero(mask)[0]:
            violations.append(
                InequalityViolation(
                    step=int(index) + 1,
                    check=check,  # type: ignore[arg-type]
                    lhs=float(lhs[index]),
                    rhs=float(rhs[index]),
                )
            )

    flag("identity", np.abs(slope - f0) > rtol * np.abs(f0) + slack_u, slope, f0)

    increment = f1 - f0
    needed = lam * d * np.abs(u1) ** p
    flag("phi_increment", increment < needed - rtol * np.abs(needed) - slack_phi, increment, needed)

    flag("monotonicity", u1 <= u0, u1, u0)

    squared = slope**2
    bound = c * np.abs(u0) ** (p + 1.0) + gamma
    tolerance = rtol * np.maximum(np.abs(squared), np.abs(bound)) + 2 * np.abs(slope) * slack_u
    tolerance = tolerance + slack_u**2 + gamma_slack
    flag("squared_slope", squared < bound - tolerance, squared, bound)

    violations.sort(key=lambda v: v.step)
    report = InequalityReport(checked_steps=steps, violations=violations)
    if not report.ok:
        first = report.first_violation
        logger.warning(f"Blow-up relations violated: {len(violations)} failures, first {first}")
    return report


# ---------------------------------------------------------------------------
# xi_R curves
# ---------------------------------------------------------------------------


def xi_curve(
    times: np.ndarray, nodal_values: np.ndarray, x: np.ndarray, R: float
) -> XiCurve:
    """
    First recorded time at which |u_h| >= R at every nodal location.

    Args:
        times: (T,) recorded times
        nodal_values: (T, nodes) values of u_h at those times
        x: (nodes,) nodal coordinates
        R: level

    Returns:
        XiCurve with None where the level is never reached
    """
    times = np.asarray(times, dtype=float)
    crossed = np.abs(np.asarray(nodal_values, dtype=float)) >= R
    first = np.argmax(crossed, axis=0)
    reached = crossed.any(axis=0)
    values = [float(times[i]) if ok else None for i, ok in zip(first, reached)]
    return XiCurve(R=R, x=[float(v) for v in np.asarray(x)], values=values)


class XiRecorder:
    """
    Observer recording first crossing times for several levels during a run.

    Nodal histories are never stored; each level keeps one time per node.
    """

    def __init__(self, scheme: Scheme[Any], levels: Sequence[float]) -> None:
        if not levels:
            raise ValidationError("at least one level is required")
        self.scheme = scheme
        self.levels = sorted(float(R) for R in levels)
        self.x = np.asarray(scheme.node_positions(), dtype=float)
        self._first = {R: np.full(self.x.shape, np.nan) for R in self.levels}

    def __call__(self, state: Any, history: RunHistory) -> None:
        values = np.abs(self.scheme.nodal_u(state))
        for R, first in self._first.items():
            newly = np.isnan(first) & (values >= R)
            if newly.any():
                first[newly] = state.t

    @property
    def complete(self) -> bool:
        """Every node has crossed the highest level."""
        return not np.isnan(self._first[self.levels[-1]]).any()

    def curves(self) -> List[XiCurve]:
        out = []
        for R in self.levels:
            first = self._first[R]
            values = [None if np.isnan(v) else float(v) for v in first]
            out.append(XiCurve(R=R, x=self.x.tolist(), values=values))
        return out
