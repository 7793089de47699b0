"""
Property suite

Deterministic checks of the structural properties the scheme relies on.
Every check returns one PropertyResult; the suite is reproducible for a
given seed byte-for-byte.
"""

import logging
from fractions import Fraction
from typing import Callable, Dict, List, Mapping, Optional, Sequence

import numpy as np

from .benchmarks import make_case, residual_check_exact
from .contracts import PropertyResult
from .dg_solver import (
    FieldState,
    Mesh,
    ProblemConfig,
    assemble_update_operators,
    dg_step,
    infinity_norm,
)
from .errors import DGWaveError
from .fd_reference import FDState, fd_step
from .reference_element import (
    MAX_DEGREE,
    build_reference_element,
    compute_lambda,
    newton_cotes_alpha,
)
from .refinement import find_admissible_mesh

logger = logging.getLogger(__name__)

AlphaTable = Mapping[int, Sequence[Fraction]]


def check_matrix_identities(tol: float = 1e-12) -> PropertyResult:
    """Row sums of R + A - B and E + F vanish, M M^-1 = I, for every degree."""
    worst = 0.0
    for k in range(MAX_DEGREE + 1):
        elem = build_reference_element(k)
        worst = max(
            worst,
            float(np.abs((elem.R + elem.A - elem.B).sum(axis=1)).max()),
            float(np.abs((elem.E + elem.F).sum(axis=1)).max()),
            float(np.abs(elem.M @ elem.M_inv - np.eye(elem.size)).max()),
        )
    return PropertyResult(
        name="matrix_identities", passed=worst <= tol, detail=f"max residual {worst:.3e}"
    )


def check_alpha_table(table: Optional[AlphaTable] = None, tol: float = 1e-12) -> PropertyResult:
    """Basis integrals against the Newton-Cotes weights (or a supplied table)."""
    failed = []
    for k in range(MAX_DEGREE + 1):
        expected = table[k] if table is not None else newton_cotes_alpha(k)
        alpha = build_reference_element(k).alpha
        reference = np.array([float(v) for v in expected])
        if reference.shape != alpha.shape or np.abs(alpha - reference).max() > tol:
            failed.append(k)
    detail = "all degrees match" if not failed else f"mismatch at k={','.join(map(str, failed))}"
    return PropertyResult(name="alpha_table", passed=not failed, detail=detail)


def check_operator_norm_bound(rng: np.random.Generator, trials: int = 100) -> PropertyResult:
    """|M_n|_inf = |N_n|_inf <= 1 + 2 rho_max dt/h for random ratios."""
    failures = 0
    for _ in range(trials):
        cells = int(rng.choice([4, 8]))
        k = int(rng.integers(0, 3))
        ratio = float(rng.uniform(1e-6, 1.0))
        elem = build_reference_element(k)
        M_n, N_n = assemble_update_operators(elem, cells, ratio)
        norm_m, norm_n = infinity_norm(M_n), infinity_norm(N_n)
        if abs(norm_m - norm_n) > 1e-12 or norm_m > 1.0 + 2.0 * elem.rho_max * ratio + 1e-12:
            failures += 1
    return PropertyResult(
        name="operator_norm_bound",
        passed=failures == 0,
        detail=f"{trials - failures}/{trials} trials within bound",
    )


def check_mean_value_power(rng: np.random.Generator, trials: int = 1000) -> PropertyResult:
    """K_h(I_h |u|^p) >= lambda K_h(u)^p on random nonnegative states."""
    mesh = Mesh(0.0, 1.0, 8)
    violations = 0
    for _ in range(trials):
        k = int(rng.integers(0, 4))
        p = float(rng.choice([2.0, 3.0]))
        elem = build_reference_element(k)
        U = rng.uniform(0.0, 10.0, size=(mesh.cells, elem.size))
        weights = 0.5 * mesh.h / mesh.length * elem.alpha
        mean = float((U @ weights).sum())
        mean_power = float((U**p @ weights).sum())
        if mean_power < compute_lambda(elem, p) * mean**p * (1.0 - 1e-12):
            violations += 1
    return PropertyResult(
        name="mean_value_power", passed=violations == 0, detail=f"{violations} violations in {trials} states"
    )


def check_positivity_boundedness(degrees: Sequence[int] = (0, 1)) -> PropertyResult:
    """Case 3 data, 200 steps: halving h from 1/32 reaches an admissible mesh for every degree."""
    case = make_case(3, p=2.0)
    found_at = []
    for k in degrees:
        try:
            found = find_admissible_mesh(case.problem(), build_reference_element(k), case.desk_policy())
        except DGWaveError as exc:
            return PropertyResult(name="positivity_boundedness", passed=False, detail=f"k={k}: {exc.message}")
        found_at.append((k, found.mesh.cells))
    return PropertyResult(
        name="positivity_boundedness",
        passed=all(cells <= 512 for _, cells in found_at),
        detail=", ".join(f"k={k} admissible at {cells} cells" for k, cells in found_at),
    )


def check_dg_p0_matches_fd(rng: np.random.Generator, steps: int = 100) -> PropertyResult:
    """DG with k = 0 and the FD scheme produce the same iterates from the same data."""
    cells, p = 16, 2.0
    mesh = Mesh(0.0, 1.0, cells)
    elem = build_reference_element(0)
    u = rng.uniform(0.5, 1.5, size=cells)
    phi = rng.uniform(0.5, 1.5, size=cells)
    dg = FieldState(U=u[:, None].copy(), Phi=phi[:, None].copy())
    fd = FDState(u=u.copy(), phi=phi.copy())
    config = ProblemConfig(p=p, u0=lambda x: 1.0, u1=lambda x: 0.0, du0=lambda x: 0.0)
    worst = 0.0
    for _ in range(steps):
        dt = float(rng.uniform(0.1, 0.5)) * mesh.h**1.5
        dg = dg_step(dg, elem, mesh, config, dt)
        fd = fd_step(fd, mesh.h, dt, p)
        scale = max(1.0, float(np.abs(fd.u).max()), float(np.abs(fd.phi).max()))
        worst = max(
            worst,
            float(np.abs(dg.U[:, 0] - fd.u).max()) / scale,
            float(np.abs(dg.Phi[:, 0] - fd.phi).max()) / scale,
        )
    return PropertyResult(
        name="dg_p0_matches_fd", passed=worst <= 1e-12, detail=f"max relative difference {worst:.3e}"
    )


def check_exact_residuals() -> PropertyResult:
    """The closed-form solutions satisfy the PDE to finite-difference accuracy."""
    worst = 0.0
    for case in (make_case(1, p=2.0), make_case(1, p=3.0), make_case(2, p=2.0)):
        worst = max(worst, residual_check_exact(case))
    return PropertyResult(
        name="exact_solution_residuals", passed=worst <= 1e-6, detail=f"max relative residual {worst:.3e}"
    )


def run_property_suite(seed: int = 0, alpha_table: Optional[AlphaTable] = None) -> List[PropertyResult]:
    """
    Run every property check in a fixed order.

    Args:
        seed: seed of the random trials
        alpha_table: replacement reference weights (to exercise the failing path)

    Returns:
        One PropertyResult per property
    """
    rng = np.random.default_rng(seed)
    checks: Dict[str, Callable[[], PropertyResult]] = {
        "matrix_identities": check_matrix_identities,
        "alpha_table": lambda: check_alpha_table(alpha_table),
        "operator_norm_bound": lambda: check_operator_norm_bound(rng),
        "mean_value_power": lambda: check_mean_value_power(rng),
        "dg_p0_matches_fd": lambda: check_dg_p0_matches_fd(rng),
        "exact_solution_residuals": check_exact_residuals,
        "positivity_boundedness": check_positivity_boundedness,
    }
    results = []
    for check in checks.values():
        result = check()
        logger.info(result.render())
        results.append(result)
    return results
