"""
Command-line front end.

Subcommands: run, convergence, benchmark, xi-curve, validate, dump-matrices.
Settings come from model defaults, then an optional TOML file (--config),
then command-line flags, each overriding the one before.

Exit codes: 0 success, 1 failed run or check, 2 bad input.
"""

import argparse
import importlib
import logging
import math
import sys

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Callable, Dict, List, Literal, Optional, Sequence, Tuple

from pydantic import BaseModel, Field, field_validator, model_validator
from pydantic import ValidationError as PydanticValidationError

from .benchmarks import (
    BLOWUP_TIME_POLICY,
    BenchmarkCase,
    blowup_time_table_failures,
    convergence_study,
    make_case,
    markdown_summary,
    policy_sweep,
    reference_window,
    run_benchmark,
    xi_closed_form,
    xi_study,
)
from .blowup_analysis import DEFAULT_MAX_STEPS, DEFAULT_THRESHOLD, drive
from .contracts import ConvergenceRow, RunStatus, TimeStepPolicy
from .dg_solver import DGScheme, Mesh, ProblemConfig
from .errors import DGWaveError, ValidationError
from .fd_reference import FDScheme
from .reference_element import MAX_DEGREE, build_reference_element
from .serialization import HistoryCsvWriter, to_canonical_json, write_rows_csv
from .validation import run_property_suite

logger = logging.getLogger(__name__)

DEFAULT_OUTPUTS = {
    "run": "history.csv",
    "convergence": "convergence.csv",
    "benchmark": "benchmark.csv",
    "xi-curve": "xi_curve.csv",
}

CONVERGENCE_COLUMNS = tuple(ConvergenceRow.model_fields)


def _split_list(value: Any) -> Any:
    if isinstance(value, str):
        return [item.strip() for item in value.split(",") if item.strip()]
    return value


class RunSpec(BaseModel):
    """Validated settings of one command invocation."""

    scheme: Literal["dg", "fd"] = "dg"
    k: int = 1
    cells: int = Field(128, ge=2)
    a: float = 0.0
    b: float = 1.0
    p: float = Field(2.0, gt=1)
    sigma: Optional[float] = Field(None, gt=0)
    nu: Optional[float] = Field(None, gt=0)
    threshold: float = Field(DEFAULT_THRESHOLD, gt=0)
    max_steps: Optional[int] = Field(None, ge=1)
    case: Optional[int] = Field(None, ge=1, le=4)
    data: Optional[str] = Field(None, description="module:factory returning a ProblemConfig")
    T: Optional[float] = Field(None, gt=0)
    d: float = Field(0.01, gt=0, lt=1)
    output: Optional[str] = None
    seed: int = 0
    exponents: List[int] = Field(default_factory=lambda: [5, 6, 7, 8, 9])
    levels: List[float] = Field(default_factory=lambda: [300.0, 600.0, 1200.0])
    workers: int = Field(1, ge=1)

    model_config = {"extra": "forbid"}

    @field_validator("k")
    @classmethod
    def validate_degree(cls, v: int) -> int:
        if not 0 <= v <= MAX_DEGREE:
            raise ValueError(f"polynomial degree must lie in 0..{MAX_DEGREE}, got: {v}")
        return v

    @field_validator("exponents", "levels", mode="before")
    @classmethod
    def split_lists(cls, v: Any) -> Any:
        return _split_list(v)

    @field_validator("exponents")
    @classmethod
    def validate_exponents(cls, v: List[int]) -> List[int]:
        if not v or any(e < 1 for e in v):
            raise ValueError(f"mesh exponents must be positive integers, got: {v}")
        return v

    @field_validator("levels")
    @classmethod
    def validate_levels(cls, v: List[float]) -> List[float]:
        if not v or any(not r > 0 for r in v):
            raise ValueError(f"levels must be positive, got: {v}")
        return v

    @model_validator(mode="after")
    def check_domain(self) -> "RunSpec":
        if not self.b > self.a:
            raise ValueError(f"b must exceed a, got a={self.a}, b={self.b}")
        if self.case is not None and self.data is not None:
            raise ValueError("give either case or data, not both")
        return self

    @property
    def budget(self) -> int:
        return self.max_steps if self.max_steps is not None else DEFAULT_MAX_STEPS

    @property
    def budget_status(self) -> RunStatus:
        # an explicit budget is a requested stopping point
        return RunStatus.COMPLETED if self.max_steps is not None else RunStatus.MAX_STEPS

    def benchmark_case(self, default: int = 3) -> BenchmarkCase:
        return make_case(self.case or default, p=self.p, T=self.T, d=self.d, a=self.a, b=self.b)

    def policy(self, default: Optional[TimeStepPolicy] = None) -> TimeStepPolicy:
        base = default or TimeStepPolicy()
        return TimeStepPolicy(
            sigma=self.sigma if self.sigma is not None else base.sigma,
            nu=self.nu if self.nu is not None else base.nu,
        )


SPEC_KEYS = tuple(RunSpec.model_fields)


def load_config(path: str) -> Dict[str, Any]:
    """Flat TOML table of RunSpec keys; a [run] table overrides top-level keys."""
    with open(path, "rb") as handle:
        data = tomllib.load(handle)
    values = {k: v for k, v in data.items() if not isinstance(v, dict)}
    run = data.get("run", {})
    if not isinstance(run, dict):
        raise ValidationError(f"[run] in {path} must be a table")
    values.update(run)
    unknown = [k for k, v in data.items() if isinstance(v, dict) and k != "run"]
    if unknown:
        raise ValidationError(f"unknown table(s) in {path}: {', '.join(unknown)}")
    return values


def load_problem(reference: str, p: float) -> ProblemConfig:
    """Import `module:factory` and call it with p."""
    module_name, _, attr = reference.partition(":")
    if not module_name or not attr:
        raise ValidationError(f"data must look like 'module:factory', got: {reference}")
    try:
        factory = getattr(importlib.import_module(module_name), attr)
    except (ImportError, AttributeError) as exc:
        raise ValidationError(f"cannot load data factory {reference}: {exc}") from exc
    config = factory(p)
    if not isinstance(config, ProblemConfig):
        raise ValidationError(f"data factory {reference} did not return a ProblemConfig")
    return config


def _problem_and_policy(spec: RunSpec) -> Tuple[ProblemConfig, TimeStepPolicy]:
    if spec.data is not None:
        return load_problem(spec.data, spec.p), spec.policy()
    case = spec.benchmark_case()
    return case.problem(), spec.policy(case.desk_policy())


def cmd_run(spec: RunSpec, args: argparse.Namespace) -> int:
    """One run towards blow-up: history CSV plus a JSON summary on stdout."""
    config, policy = _problem_and_policy(spec)
    mesh = Mesh(config.a, config.b, spec.cells)
    if spec.scheme == "dg":
        scheme: Any = DGScheme(config, mesh, build_reference_element(spec.k))
    else:
        scheme = FDScheme(config, mesh)

    path = spec.output or DEFAULT_OUTPUTS["run"]
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = HistoryCsvWriter(handle, scheme=spec.scheme)
        result, _ = drive(
            scheme,
            policy,
            threshold=spec.threshold,
            max_steps=spec.budget,
            observers=[writer],
            budget_status=spec.budget_status,
        )
    summary = to_canonical_json(result)
    print(summary)
    if getattr(args, "summary", None):
        Path(args.summary).write_text(summary + "\n", encoding="utf-8")
    return 1 if result.status == RunStatus.MAX_STEPS else 0


def cmd_convergence(spec: RunSpec, args: argparse.Namespace) -> int:
    """Blow-up times of case 4 over h = 2^-e; the table conditions must hold."""
    policy = spec.policy(BLOWUP_TIME_POLICY)
    path = spec.output or DEFAULT_OUTPUTS["convergence"]
    window = reference_window(spec.p, spec.exponents, spec.threshold)
    if getattr(args, "sweep", False):
        sweep = policy_sweep(
            p=spec.p,
            exponents=spec.exponents,
            k=spec.k,
            threshold=spec.threshold,
            workers=spec.workers,
            max_steps=spec.budget,
        )
        write_rows_csv(
            path,
            ["sigma", "nu", "complete", "screened_out", "max_deviation", "failures"],
            (
                [e.sigma, e.nu, e.complete, e.screened_out, e.max_deviation, "; ".join(e.failures)]
                for e in sweep.entries
            ),
        )
        best = sweep.best
        picked = None
        if best is not None:
            picked = {
                "sigma": best.sigma,
                "nu": best.nu,
                "max_deviation": best.max_deviation,
                "failures": best.failures,
            }
        print(to_canonical_json({"best": picked}))
        return 0 if best is not None else 1

    rows = convergence_study(
        spec.p, spec.exponents, spec.k, policy, spec.threshold, spec.workers, spec.budget
    )
    write_rows_csv(
        path,
        list(CONVERGENCE_COLUMNS),
        ([getattr(r, name) for name in CONVERGENCE_COLUMNS] for r in rows),
    )
    failures = blowup_time_table_failures(rows, window=window)
    for failure in failures:
        print(f"FAIL {failure}", file=sys.stderr)
    return 1 if failures else 0


def cmd_benchmark(spec: RunSpec, args: argparse.Namespace) -> int:
    """One benchmark case: error table CSV, optional Markdown, JSON report on stdout."""
    if spec.case is None:
        raise ValidationError("benchmark needs --case")
    case = spec.benchmark_case()
    mesh = Mesh(case.a, case.b, spec.cells)
    report = run_benchmark(
        case,
        mesh,
        build_reference_element(spec.k),
        spec.policy(case.desk_policy()),
        threshold=spec.threshold,
        max_steps=spec.budget,
    )
    rows = report.errors or report.fd_errors
    write_rows_csv(
        spec.output or DEFAULT_OUTPUTS["benchmark"],
        ["time", "rel_l2", "rel_linf"],
        ([r.time, r.rel_l2, r.rel_linf] for r in rows),
    )
    if getattr(args, "markdown", None):
        Path(args.markdown).write_text(markdown_summary(report), encoding="utf-8")
    print(to_canonical_json(report))
    failed = report.blowup is not None and report.blowup.status == RunStatus.MAX_STEPS
    if report.inequalities is not None and not report.inequalities.ok:
        failed = True
    return 1 if failed else 0


def cmd_xi_curve(spec: RunSpec, args: argparse.Namespace) -> int:
    """xi_R curves of a closed-form case: CSV rows (x, xi_R, R) and fitted lines on stdout."""
    case = spec.benchmark_case(default=2)
    curves = xi_study(
        case,
        spec.levels,
        spec.cells,
        spec.k,
        spec.policy(case.desk_policy()),
        spec.budget,
    )
    rows = []
    fits = []
    for curve in curves:
        rows += [[x, v, curve.R] for x, v in zip(curve.x, curve.values)]
        try:
            slope, intercept = curve.fit_line()
        except ValueError:
            slope = intercept = math.nan
        entry: Dict[str, Any] = {"R": curve.R, "slope": slope, "intercept": intercept}
        if case.has_exact:
            entry["closed_form_intercept"] = float(xi_closed_form(case, curve.R, [0.0])[0])
        fits.append(entry)
    write_rows_csv(spec.output or DEFAULT_OUTPUTS["xi-curve"], ["x", "xi_R", "R"], rows)
    print(to_canonical_json(fits))
    return 0 if all(v is not None for c in curves for v in c.values) else 1


def cmd_validate(spec: RunSpec, args: argparse.Namespace) -> int:
    """Property suite: one line per property, nonzero exit on any failure."""
    results = run_property_suite(spec.seed)
    for result in results:
        print(result.render())
    directory = getattr(args, "dump_matrices", None)
    if directory:
        Path(directory).mkdir(parents=True, exist_ok=True)
        for k in range(MAX_DEGREE + 1):
            text = to_canonical_json(build_reference_element(k).to_dict())
            (Path(directory) / f"k{k}.json").write_text(text + "\n", encoding="utf-8")
    return 0 if all(r.passed for r in results) else 1


def cmd_dump_matrices(spec: RunSpec, args: argparse.Namespace) -> int:
    print(to_canonical_json(build_reference_element(spec.k).to_dict()))
    return 0


COMMANDS: Dict[str, Callable[[RunSpec, argparse.Namespace], int]] = {
    "run": cmd_run,
    "convergence": cmd_convergence,
    "benchmark": cmd_benchmark,
    "xi-curve": cmd_xi_curve,
    "validate": cmd_validate,
    "dump-matrices": cmd_dump_matrices,
}


def _spec_flags() -> argparse.ArgumentParser:
    flags = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    flags.add_argument("--scheme", choices=["dg", "fd"])
    flags.add_argument("--k", type=int)
    flags.add_argument("--cells", type=int)
    flags.add_argument("--a", type=float)
    flags.add_argument("--b", type=float)
    flags.add_argument("--p", type=float)
    flags.add_argument("--sigma", type=float)
    flags.add_argument("--nu", type=float)
    flags.add_argument("--threshold", type=float)
    flags.add_argument("--max-steps", type=int)
    flags.add_argument("--case", type=int)
    flags.add_argument("--data", help="module:factory returning a ProblemConfig")
    flags.add_argument("--T", type=float)
    flags.add_argument("--d", type=float)
    flags.add_argument("--output", "-o")
    flags.add_argument("--seed", type=int)
    flags.add_argument("--exponents", help="comma-separated e for h = 2^-e")
    flags.add_argument("--levels", help="comma-separated levels R")
    flags.add_argument("--workers", type=int)
    return flags


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dgwave", description=__doc__.splitlines()[1])
    parser.add_argument("--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    parser.add_argument("--config", help="TOML file of run settings")
    sub = parser.add_subparsers(dest="command", required=True)
    flags = _spec_flags()

    sub.add_parser("run", parents=[flags], help="run one problem towards blow-up").add_argument(
        "--summary", help="also write the JSON summary here"
    )
    sub.add_parser("convergence", parents=[flags], help="blow-up time against h").add_argument(
        "--sweep", action="store_true", help="sweep (sigma, nu) against the reference times"
    )
    sub.add_parser("benchmark", parents=[flags], help="run one benchmark case").add_argument(
        "--markdown", help="write a Markdown summary here"
    )
    sub.add_parser("xi-curve", parents=[flags], help="first crossing curves xi_R")
    sub.add_parser("validate", parents=[flags], help="property suite").add_argument(
        "--dump-matrices", help="also write every reference element as JSON into this directory"
    )
    sub.add_parser("dump-matrices", parents=[flags], help="print one reference element as JSON")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    logging.basicConfig(
        level=args.log_level,
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    try:
        values = load_config(args.config) if args.config else {}
        values.update({key: getattr(args, key) for key in SPEC_KEYS if hasattr(args, key)})
        spec = RunSpec(**values)
        logger.debug(f"Command {args.command}: {spec.model_dump()}")
        return COMMANDS[args.command](spec, args)
    except PydanticValidationError as exc:
        for error in exc.errors():
            loc = ".".join(str(part) for part in error["loc"]) or "spec"
            print(f"{loc}: {error['msg']}", file=sys.stderr)
        return 2
    except ValidationError as exc:
        print(f"{exc.code}: {exc.message}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DGWaveError as exc:
        print(f"{exc.code}: {exc.message}", file=sys.stderr)
        return 1
