"""
Benchmarks

The four reference problems with their initial data and closed-form
solutions, the relative error norms, and the studies built on them:

    case 1  u(t) = mu (T - t)^(2/(1-p)), constant in space
    case 2  u(x, t) = mu (T - t + d x)^(2/(1-p)), a tilted blow-up front
    case 3  u0 = 5 (sin 4 pi x + 2), u1 = 5 (sin 4 pi x - 4 pi cos 4 pi x + 2)
    case 4  u0 = 5 (sin 4 pi x + 2), u1 = 20 pi + 5, compared against FD
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss

from .blowup_analysis import (
    DEFAULT_THRESHOLD,
    RunHistory,
    XiRecorder,
    check_blowup_inequalities,
    drive,
    estimate_blowup_steps,
)
from .contracts import (
    BenchmarkReport,
    ConvergenceRow,
    ErrorRow,
    SnapshotRow,
    SweepEntry,
    SweepResult,
    TimeStepPolicy,
    XiCurve,
)
from .dg_solver import DGScheme, FieldState, Mesh, ProblemConfig
from .errors import ExactSolutionDomainError, InvalidExponentError, ValidationError, ZeroNormError
from .fd_reference import FDScheme, FDState, fd_grid
from .reference_element import ReferenceElement, build_reference_element, expansion_values

logger = logging.getLogger(__name__)

BENCHMARK_MAX_STEPS = 5_000_000

# Relative L2 distance between DG and the 16x finer FD grid, per exponent and time.
FD_ERROR_REFERENCE: Dict[int, Dict[float, float]] = {
    2: {0.03: 2.16e-3, 0.10: 9.15e-4, 0.15: 5.97e-4, 0.25: 1.11e-3},
    3: {0.03: 2.58e-4, 0.09: 1.25e-3, 0.105: 4.05e-3, 0.110: 9.98e-3},
}

# Case 4, p = 3, threshold 1e9: exponent e of h = 2^-e -> (DG k=1, FD) blow-up times.
BLOWUP_TIME_REFERENCE: Dict[int, Tuple[float, float]] = {
    5: (0.11671, 0.11675),
    6: (0.11527, 0.11538),
    7: (0.11455, 0.11463),
    8: (0.11419, 0.11423),
    9: (0.11401, 0.11403),
}

# FD points per DG cell in every DG-versus-FD comparison.
FD_REFINE = 16

# Step rule of the blow-up time study. nu lies outside the swept values: with nu >= 0.5
# the climb to 1e9 at h = 2^-9 takes more than 1e7 steps.
BLOWUP_TIME_POLICY = TimeStepPolicy(sigma=0.5, nu=0.1)

# Largest |T_dg - T_fd| at one h, and the range of the finest blow-up times.
BLOWUP_TIME_AGREEMENT = 2e-3
BLOWUP_TIME_WINDOW = (0.113, 0.115)

_DEFAULT_T = {1: 0.1, 2: 0.5}
_FOUR_PI = 4.0 * math.pi


@dataclass(frozen=True)
class BenchmarkCase:
    """
    One reference problem.

    ``mu_scale`` multiplies the closed-form amplitude; anything but 1.0 breaks
    the exact solution on purpose.
    """

    case_id: int
    p: float
    T: Optional[float] = None
    d: float = 0.01
    a: float = 0.0
    b: float = 1.0
    mu_scale: float = 1.0

    def __post_init__(self) -> None:
        if self.case_id not in (1, 2, 3, 4):
            raise ValidationError(f"case must lie in 1..4, got: {self.case_id}")
        if not self.p > 1:
            raise InvalidExponentError(self.p)
        if self.case_id in (1, 2) and not (self.T is not None and self.T > 0):
            raise ValidationError(f"case {self.case_id} needs a positive blow-up time T")
        if self.case_id == 2 and not 0 < self.d < 1:
            raise ValidationError(f"slope d must lie in (0, 1), got: {self.d}")

    @property
    def has_exact(self) -> bool:
        return self.case_id in (1, 2)

    @property
    def exponent(self) -> float:
        return 2.0 / (1.0 - self.p)

    @property
    def slope(self) -> float:
        return self.d if self.case_id == 2 else 0.0

    @property
    def mu(self) -> float:
        q = self.p - 1.0
        if self.case_id == 1:
            base = 2.0 * (self.p + 1.0) / q**2
        elif self.case_id == 2:
            base = 2.0 * (1.0 - self.d**2) * (self.p + 1.0) / q**2
        else:
            raise ValidationError(f"case {self.case_id} has no closed-form solution")
        return self.mu_scale * base ** (1.0 / q)

    def _front(self, x: np.ndarray, t: float) -> np.ndarray:
        gap = self.T - t + self.slope * np.asarray(x, dtype=float)  # type: ignore[operator]
        if np.any(gap <= 0):
            raise ExactSolutionDomainError(self.case_id, t)
        return gap

    def exact(self, x: np.ndarray, t: float) -> np.ndarray:
        """Closed-form u(x, t)."""
        if not self.has_exact:
            raise ValidationError(f"case {self.case_id} has no closed-form solution")
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(self.mu * self._front(x, t) ** self.exponent, x.shape).copy()

    def exact_phi(self, x: np.ndarray, t: float) -> np.ndarray:
        """Closed-form phi = u_t + u_x."""
        if not self.has_exact:
            raise ValidationError(f"case {self.case_id} has no closed-form solution")
        x = np.asarray(x, dtype=float)
        q = self.exponent
        rate = (self.slope - 1.0) * q * self.mu * self._front(x, t) ** (q - 1.0)
        return np.broadcast_to(rate, x.shape).copy()

    def u0(self, x: np.ndarray) -> np.ndarray:
        if self.has_exact:
            return self.exact(x, 0.0)
        return 5.0 * (np.sin(_FOUR_PI * x) + 2.0)

    def du0(self, x: np.ndarray) -> np.ndarray:
        if self.has_exact:
            q = self.exponent
            return self.slope * q * self.mu * self._front(x, 0.0) ** (q - 1.0)
        return 5.0 * _FOUR_PI * np.cos(_FOUR_PI * x)

    def u1(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.has_exact:
            q = self.exponent
            return -q * self.mu * self._front(x, 0.0) ** (q - 1.0)
        if self.case_id == 3:
            s = _FOUR_PI * x
            return 5.0 * (np.sin(s) - _FOUR_PI * np.cos(s) + 2.0)
        return np.full(x.shape, 20.0 * math.pi + 5.0)

    def inflow(self, mesh: Mesh, elem: ReferenceElement, t: float) -> Tuple[np.ndarray, np.ndarray]:
        """Exact u in the ghost cell left of a and exact phi in the ghost cell right of b."""
        offsets = (elem.nodes + 1.0) * (0.5 * mesh.h)
        return self.exact(mesh.a - mesh.h + offsets, t), self.exact_phi(mesh.b + offsets, t)

    def problem(self) -> ProblemConfig:
        return ProblemConfig(
            p=self.p,
            u0=self.u0,
            u1=self.u1,
            du0=self.du0,
            a=self.a,
            b=self.b,
            inflow=self.inflow if self.case_id == 2 else None,
        )

    def recorded_times(self) -> List[float]:
        """Quartiles of T for the closed-form cases; case 1 adds 0.9 T."""
        if not self.has_exact:
            raise ValidationError(f"case {self.case_id} has no prescribed blow-up time")
        T = float(self.T)  # type: ignore[arg-type]
        times = [0.0, 0.25 * T, 0.5 * T, 0.75 * T]
        if self.case_id == 1:
            times.append(0.9 * T)
        return times

    def desk_policy(self) -> TimeStepPolicy:
        """
        Default step rule of the case; keeps dt/h in the stable range of the upwind Euler pair.

        nu = 0.1 is not one of the swept values {0.5, p - 1, p}, which need far more
        steps to reach the threshold. A best pair reported by policy_sweep never
        refers to this default.
        """
        if self.case_id == 2 and self.p >= 3:
            return TimeStepPolicy(sigma=0.5, nu=0.1)
        return TimeStepPolicy(sigma=0.1, nu=0.1)


def make_case(
    case_id: int,
    p: float = 2.0,
    T: Optional[float] = None,
    d: float = 0.01,
    a: float = 0.0,
    b: float = 1.0,
) -> BenchmarkCase:
    if T is None:
        T = _DEFAULT_T.get(case_id)
    return BenchmarkCase(case_id=case_id, p=p, T=T, d=d, a=a, b=b)


def exact_solution(case: BenchmarkCase, x: np.ndarray, t: float) -> np.ndarray:
    """
    Closed-form solution of cases 1 and 2.

    Raises:
        ExactSolutionDomainError: t at or past the blow-up front somewhere in x
    """
    return case.exact(x, t)


def residual_check_exact(case: BenchmarkCase, delta: float = 1e-3) -> float:
    """
    Largest relative PDE residual of the closed form on [a, b] x [0, T/4].

    Second derivatives use fourth-order central differences with spacing delta;
    each residual is scaled by max(1, |u_tt|, |u_xx|, |u|^p).
    """
    if not case.has_exact:
        raise ValidationError(f"case {case.case_id} has no closed-form solution")
    x = np.linspace(case.a, case.b, 11)
    worst = 0.0
    for t in np.linspace(0.0, 0.25 * float(case.T), 6):  # type: ignore[arg-type]
        u = case.exact(x, t)
        u_tt = _second_difference(lambda s: case.exact(x, s), float(t), delta)
        u_xx = _second_difference(lambda y: case.exact(y, t), x, delta)
        source = np.abs(u) ** case.p
        scale = np.maximum.reduce([np.ones_like(u), np.abs(u_tt), np.abs(u_xx), source])
        worst = max(worst, float(np.max(np.abs(u_tt - u_xx - source) / scale)))
    return worst


def _second_difference(f: Callable[[Any], np.ndarray], at: Any, delta: float) -> np.ndarray:
    return (
        -f(at + 2 * delta) + 16 * f(at + delta) - 30 * f(at) + 16 * f(at - delta) - f(at - 2 * delta)
    ) / (12.0 * delta**2)


def error_norms(
    U: np.ndarray,
    mesh: Mesh,
    elem: ReferenceElement,
    reference: Callable[[np.ndarray], np.ndarray],
) -> Tuple[float, float]:
    """
    Relative L2 and L-infinity distance between u_h and a reference function.

    L2 uses per-cell Gauss quadrature; L-infinity samples the nodes plus eight
    interior points per cell.

    Raises:
        ZeroNormError: the reference vanishes in the norm concerned
    """
    xq, wq = leggauss(elem.k + 4)
    left = mesh.interfaces[:-1, None]
    x = left + (xq[None, :] + 1.0) * (0.5 * mesh.h)
    ref = reference(x)
    diff = expansion_values(elem, U, xq) - ref
    ref_l2 = math.sqrt(float((0.5 * mesh.h) * (ref**2 @ wq).sum()))
    if ref_l2 == 0.0:
        raise ZeroNormError("L2")
    err_l2 = math.sqrt(float((0.5 * mesh.h) * (diff**2 @ wq).sum()))

    xi = np.concatenate([elem.nodes, np.linspace(-1.0, 1.0, 10)[1:-1]])
    xs = left + (xi[None, :] + 1.0) * (0.5 * mesh.h)
    ref_s = reference(xs)
    ref_inf = float(np.max(np.abs(ref_s)))
    if ref_inf == 0.0:
        raise ZeroNormError("Linf")
    err_inf = float(np.max(np.abs(expansion_values(elem, U, xi) - ref_s)))
    return err_l2 / ref_l2, err_inf / ref_inf


class _Snapshots:
    """Observer keeping the states that land on requested times."""

    def __init__(self, times: Sequence[float]) -> None:
        self.times = {float(t) for t in times}
        self.states: Dict[float, Any] = {}

    def __call__(self, state: Any, history: RunHistory) -> None:
        if state.t in self.times:
            self.states[state.t] = state


def _fd_reference_function(state: FDState, mesh: Mesh) -> Callable[[np.ndarray], np.ndarray]:
    x = fd_grid(mesh)

    def reference(points: np.ndarray) -> np.ndarray:
        return np.interp(points, x, state.u, period=mesh.length)

    return reference


def run_benchmark(
    case: BenchmarkCase,
    mesh: Mesh,
    elem: ReferenceElement,
    policy: Optional[TimeStepPolicy] = None,
    threshold: float = DEFAULT_THRESHOLD,
    max_steps: int = BENCHMARK_MAX_STEPS,
) -> BenchmarkReport:
    """
    Run one case and collect its report.

    Cases 1-2 record errors against the closed form at the recorded times;
    cases 3-4 run to the threshold, check the blow-up relations and sample
    (sup_u, K_u) at quartiles of T_h. Case 4 adds the DG-versus-FD error rows.
    """
    policy = policy or case.desk_policy()
    scheme = DGScheme(case.problem(), mesh, elem)
    report = BenchmarkReport(case_id=case.case_id, p=case.p, k=elem.k, cells=mesh.cells)
    logger.info(f"Benchmark case {case.case_id}: {scheme.describe()}")

    if case.has_exact:
        times = case.recorded_times()
        snaps = _Snapshots(times)
        result, _ = drive(
            scheme,
            policy,
            threshold=threshold,
            max_steps=max_steps,
            t_end=times[-1],
            sample_times=times,
            observers=[snaps],
        )
        for t in times:
            state: Optional[FieldState] = snaps.states.get(t)
            if state is None:
                continue
            rel_l2, rel_inf = error_norms(state.U, mesh, elem, lambda x, t=t: case.exact(x, t))
            report.errors.append(ErrorRow(time=t, rel_l2=rel_l2, rel_linf=rel_inf))
        report.blowup = result
        return report

    result, history = drive(scheme, policy, threshold=threshold, max_steps=max_steps)
    report.blowup = result
    report.inequalities = check_blowup_inequalities(history, result.lam, case.p)
    columns = history.columns
    for fraction in (0.0, 0.25, 0.5, 0.75):
        index = history.first_at_or_after(fraction * result.T_h)
        if index is not None:
            report.snapshots.append(
                SnapshotRow(
                    time=columns["t"][index],
                    sup_u=columns["sup_u"][index],
                    K_u=columns["K_u"][index],
                )
            )
    if case.case_id == 4:
        report.fd_errors = fd_error_study(case.p, cells=mesh.cells, k=elem.k, max_steps=max_steps)
    return report


def fd_error_study(
    p: float,
    cells: int = 128,
    refine: int = FD_REFINE,
    times: Optional[Sequence[float]] = None,
    k: int = 1,
    policy: Optional[TimeStepPolicy] = None,
    max_steps: int = BENCHMARK_MAX_STEPS,
) -> List[ErrorRow]:
    """
    Relative distance between DG and an FD run on a `refine` times finer grid.

    Both runs use the DG mesh width in the step rule and land on the recorded
    times; FD values are interpolated periodically onto the DG evaluation points.
    """
    reference = FD_ERROR_REFERENCE.get(int(p), {})
    if times is None:
        if not reference:
            raise ValidationError(f"no recorded times for p={p}; pass times explicitly")
        times = sorted(reference)
    times = sorted(float(t) for t in times)
    case = make_case(4, p=p)
    policy = policy or case.desk_policy()
    config = case.problem()
    mesh = Mesh(case.a, case.b, cells)
    fine = mesh.refined(refine)
    elem = build_reference_element(k)

    dg_snaps, fd_snaps = _Snapshots(times), _Snapshots(times)
    common = dict(
        threshold=DEFAULT_THRESHOLD,
        max_steps=max_steps,
        t_end=times[-1],
        sample_times=times,
        h_policy=mesh.h,
    )
    drive(DGScheme(config, mesh, elem), policy, observers=[dg_snaps], **common)  # type: ignore[arg-type]
    drive(FDScheme(config, fine), policy, observers=[fd_snaps], **common)  # type: ignore[arg-type]

    rows = []
    for t in times:
        dg_state, fd_state = dg_snaps.states.get(t), fd_snaps.states.get(t)
        if dg_state is None or fd_state is None:
            logger.warning(f"FD comparison time {t} not reached by both runs")
            continue
        rel_l2, rel_inf = error_norms(dg_state.U, mesh, elem, _fd_reference_function(fd_state, fine))
        rows.append(ErrorRow(time=t, rel_l2=rel_l2, rel_linf=rel_inf, reference_l2=reference.get(t)))
    return rows


def _convergence_row(
    p: float,
    exponent: int,
    k: int,
    sigma: float,
    nu: float,
    threshold: float,
    max_steps: int,
    fd_refine: int,
) -> ConvergenceRow:
    case = make_case(4, p=p)
    config = case.problem()
    mesh = Mesh(case.a, case.b, 2**exponent)
    policy = TimeStepPolicy(sigma=sigma, nu=nu)
    options = dict(threshold=threshold, max_steps=max_steps, h_policy=mesh.h, lean_history=True)
    dg, _ = drive(DGScheme(config, mesh, build_reference_element(k)), policy, **options)  # type: ignore[arg-type]
    fd, _ = drive(FDScheme(config, mesh.refined(fd_refine)), policy, **options)  # type: ignore[arg-type]
    return ConvergenceRow(
        h=mesh.h,
        k=k,
        sigma=sigma,
        nu=nu,
        T_h_dg=dg.T_h,
        steps_dg=dg.steps,
        status_dg=dg.status,
        T_h_fd=fd.T_h,
        steps_fd=fd.steps,
        status_fd=fd.status,
        fd_refine=fd_refine,
    )


def convergence_study(
    p: float = 3.0,
    exponents: Sequence[int] = (5, 6, 7, 8, 9),
    k: int = 1,
    policy: Optional[TimeStepPolicy] = None,
    threshold: float = DEFAULT_THRESHOLD,
    workers: int = 1,
    max_steps: int = BENCHMARK_MAX_STEPS,
    fd_refine: int = FD_REFINE,
) -> List[ConvergenceRow]:
    """
    DG and FD blow-up times of case 4 at h = 2^-e for every exponent e.

    The FD grid is `fd_refine` times finer than the DG mesh; both runs feed the
    DG width h to the step rule. Rows come back ordered by decreasing h whatever
    the completion order.
    """
    if not exponents:
        raise ValidationError("at least one mesh exponent is required")
    if fd_refine < 1:
        raise ValidationError(f"fd_refine must be at least 1, got: {fd_refine}")
    policy = policy or BLOWUP_TIME_POLICY
    nu = policy.resolved_nu(p)
    args = [
        (p, e, k, policy.sigma, nu, threshold, max_steps, fd_refine) for e in sorted(set(exponents))
    ]
    if workers > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_convergence_row, *zip(*args)))
    else:
        rows = [_convergence_row(*a) for a in args]
    return sorted(rows, key=lambda r: -r.h)


def decreasing(values: Sequence[float]) -> bool:
    return all(b < a for a, b in zip(values, values[1:]))


def reference_window(
    p: float, exponents: Sequence[int], threshold: float
) -> Optional[Tuple[float, float]]:
    """BLOWUP_TIME_WINDOW when the table reaches h = 2^-9 under the reference settings."""
    if p == 3.0 and threshold == DEFAULT_THRESHOLD and max(exponents, default=0) >= 9:
        return BLOWUP_TIME_WINDOW
    return None


def blowup_time_table_failures(
    rows: Sequence[ConvergenceRow],
    agreement: float = BLOWUP_TIME_AGREEMENT,
    window: Optional[Tuple[float, float]] = None,
) -> List[str]:
    """
    Conditions a blow-up time table must meet, one message per broken condition.

    Every run blew up, both columns strictly decrease as h shrinks, DG and FD
    agree within `agreement` at each h, and with `window` given both finest
    times lie inside it.
    """
    failures = [
        f"h={r.h:.17g}: dg {r.status_dg.value}, fd {r.status_fd.value}" for r in rows if not r.ok
    ]
    if failures:
        return failures
    ordered = sorted(rows, key=lambda r: -r.h)
    if not decreasing([r.T_h_dg for r in ordered]):
        failures.append("DG blow-up times do not decrease with h")
    if not decreasing([r.T_h_fd for r in ordered]):
        failures.append("FD blow-up times do not decrease with h")
    for r in ordered:
        gap = abs(r.T_h_dg - r.T_h_fd)
        if gap > agreement:
            failures.append(f"h={r.h:.17g}: |T_dg - T_fd| = {gap:.3e} exceeds {agreement:g}")
    if window is not None and ordered:
        low, high = window
        finest = ordered[-1]
        for name, value in (("dg", finest.T_h_dg), ("fd", finest.T_h_fd)):
            if not low <= value <= high:
                failures.append(f"h={finest.h:.17g}: {name} T_h {value:.17g} outside [{low}, {high}]")
    return failures


def policy_sweep(
    sigmas: Sequence[float] = (0.1, 0.5, 1.0),
    nus: Optional[Sequence[float]] = None,
    p: float = 3.0,
    exponents: Sequence[int] = tuple(BLOWUP_TIME_REFERENCE),
    k: int = 1,
    threshold: float = DEFAULT_THRESHOLD,
    workers: int = 1,
    max_steps: int = BENCHMARK_MAX_STEPS,
    screen: bool = True,
) -> SweepResult:
    """
    Largest deviation from the reference blow-up times for every (sigma, nu) pair.

    With `screen`, a pair whose estimated step count on the finest mesh exceeds
    `max_steps` is not run. Skipped pairs and pairs with a row that did not blow
    up are reported incomplete and never win.
    """
    if nus is None:
        nus = (0.5, p - 1.0, p)
    case = make_case(4, p=p)
    sup_u0 = float(np.max(np.abs(case.u0(np.linspace(case.a, case.b, 1025)))))
    finest = 2.0 ** -max(exponents)
    window = reference_window(p, exponents, threshold)
    entries = []
    for sigma in sigmas:
        for nu in nus:
            policy = TimeStepPolicy(sigma=sigma, nu=nu)
            if screen:
                estimate = estimate_blowup_steps(policy, finest, p, sup_u0, threshold)
                if estimate > max_steps:
                    logger.warning(
                        f"Sweep pair sigma={sigma}, nu={nu} skipped: about {estimate:.3g} steps "
                        f"at h={finest:g}, budget {max_steps}"
                    )
                    entries.append(SweepEntry(sigma=sigma, nu=nu, complete=False, screened_out=True))
                    continue
            rows = convergence_study(p, exponents, k, policy, threshold, workers, max_steps)
            complete = all(r.ok for r in rows)
            deviation = None
            failures: List[str] = []
            if complete:
                deviations = []
                for r in rows:
                    ref = BLOWUP_TIME_REFERENCE.get(round(-math.log2(r.h)))
                    if ref is not None:
                        deviations += [abs(r.T_h_dg - ref[0]), abs(r.T_h_fd - ref[1])]
                deviation = max(deviations) if deviations else None
                failures = blowup_time_table_failures(rows, window=window)
            else:
                logger.warning(f"Sweep pair sigma={sigma}, nu={nu} has runs that did not blow up")
            entries.append(
                SweepEntry(
                    sigma=sigma,
                    nu=nu,
                    max_deviation=deviation,
                    complete=complete,
                    failures=failures,
                    rows=rows,
                )
            )
    return SweepResult(entries=entries)


def xi_closed_form(case: BenchmarkCase, R: float, x: np.ndarray) -> np.ndarray:
    """xi_R(x) = T - (mu/R)^((p-1)/2) + d x for the closed-form cases."""
    if not case.has_exact:
        raise ValidationError(f"case {case.case_id} has no closed-form solution")
    return float(case.T) - (case.mu / R) ** (0.5 * (case.p - 1.0)) + case.slope * np.asarray(x)  # type: ignore[arg-type]


def xi_study(
    case: Optional[BenchmarkCase] = None,
    levels: Sequence[float] = (300.0, 600.0, 1200.0),
    cells: int = 128,
    k: int = 1,
    policy: Optional[TimeStepPolicy] = None,
    max_steps: int = BENCHMARK_MAX_STEPS,
) -> List[XiCurve]:
    """Run until every node has crossed every level and return one curve per level."""
    case = case or make_case(2, p=2.0)
    policy = policy or case.desk_policy()
    mesh = Mesh(case.a, case.b, cells)
    scheme = DGScheme(case.problem(), mesh, build_reference_element(k))
    recorder = XiRecorder(scheme, levels)
    initial = float(np.max(np.abs(scheme.initial_state().U)))
    if not min(levels) > initial:
        raise ValidationError(
            f"levels must exceed the initial amplitude {initial:.6g}", details={"levels": list(levels)}
        )
    result, _ = drive(
        scheme,
        policy,
        threshold=DEFAULT_THRESHOLD,
        max_steps=max_steps,
        until=lambda: recorder.complete,
        observers=[recorder],
    )
    if not recorder.complete:
        logger.warning(f"xi study ended ({result.status.value}) before every node crossed R={max(levels)}")
    return recorder.curves()


def markdown_summary(report: BenchmarkReport) -> str:
    """Human-readable Markdown view of a benchmark report."""
    lines = [
        f"# Case {report.case_id} (p={report.p:g}, k={report.k}, cells={report.cells})",
        "",
    ]
    if report.errors:
        lines += ["| time | rel L2 | rel Linf |", "|---|---|---|"]
        lines += [f"| {r.time:.6g} | {r.rel_l2:.3e} | {r.rel_linf:.3e} |" for r in report.errors]
        lines.append("")
    if report.blowup is not None:
        b = report.blowup
        lines.append(f"Status: {b.status.value}, T_h = {b.T_h:.6g}, steps = {b.steps}")
        if b.gamma_h is not None:
            lines.append(f"alpha_h = {b.alpha_h:.6g}, beta_h = {b.beta_h:.6g}, gamma_h = {b.gamma_h:.6g}")
        lines.append("")
    if report.inequalities is not None:
        inequalities = report.inequalities
        verdict = "all hold" if inequalities.ok else f"{len(inequalities.violations)} violations"
        lines.append(f"Blow-up relations over {inequalities.checked_steps} steps: {verdict}")
        lines.append("")
    if report.snapshots:
        lines += ["| time | sup u | K_h(u) |", "|---|---|---|"]
        lines += [f"| {s.time:.6g} | {s.sup_u:.6g} | {s.K_u:.6g} |" for s in report.snapshots]
        lines.append("")
    if report.fd_errors:
        lines += ["| time | rel L2 | rel Linf | reference L2 |", "|---|---|---|---|"]
        for r in report.fd_errors:
            ref = "-" if r.reference_l2 is None else f"{r.reference_l2:.3e}"
            lines.append(f"| {r.time:.6g} | {r.rel_l2:.3e} | {r.rel_linf:.3e} | {ref} |")
        lines.append("")
    return "\n".join(lines)
