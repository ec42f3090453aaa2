"""
Command-line surface: eval, check, mesh and csv.

Parsed arguments become command messages; a handler table keyed by
`CommandType` runs them and returns the process exit status. Logs go to
stderr so JSON on stdout stays clean.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from enum import IntEnum
from typing import Callable, Sequence

import numpy as np
from pydantic import BaseModel

from app.adapters import export_io
from app.adapters.expr_parser import parse, parse_file
from app.config import VERIFICATION_SETTINGS
from app.domain import skgeom, verify
from app.domain.base import Message, command_generator
from app.domain.commands import (
    CheckSuite,
    CommandType,
    EvalPoint,
    ExportCsv,
    ExportMesh,
    ExpressionCommand,
    OutputFormat,
    WindowCommand,
)
from app.domain.exceptions import (
    AllPointsDegenerate,
    ArityError,
    DomainError,
    ExportIOError,
    ExpressionError,
    GeometryError,
    HypersphereError,
    UsageError,
    WrongArgumentsForCommand,
)
from app.domain.expr import Expr
from app.domain.mesh import build_mesh
from app.domain.verify import ChartWindow, Strategy, Tolerances

logger = logging.getLogger(__name__)


class ExitCode(IntEnum):
    OK = 0
    USAGE = 1
    FAILED = 2
    DEGENERATE = 3
    DOMAIN = 4
    NUMERIC = 5
    IO = 6


def exit_code_for(error: Exception) -> ExitCode:
    match error:
        case UsageError() | WrongArgumentsForCommand() | ExpressionError() | ArityError() | ValueError():
            return ExitCode.USAGE
        case AllPointsDegenerate():
            return ExitCode.DEGENERATE
        case DomainError():
            return ExitCode.DOMAIN
        case GeometryError():
            return ExitCode.NUMERIC
        case ExportIOError():
            return ExitCode.IO
    return ExitCode.FAILED


class CliArgumentParser(argparse.ArgumentParser):
    def error(self, message: str):  # type: ignore[override]
        raise UsageError(f"{self.prog}: {message}")


def _pair(c: complex) -> list[float]:
    return [float(c.real), float(c.imag)]


class PointSummary(BaseModel):
    expr_text: str
    z: list[list[float]]
    w: list[list[float]]
    value: list[float]
    imm: list[float]
    nondegenerate: bool
    min_sv: float
    sig_imtau: tuple[int, int]
    det_gxy: float | None = None
    signature: tuple[int, int] | None = None
    lemma_residuals: list[float] | None = None
    metric: dict[str, list] | None = None

    @classmethod
    def from_point(cls, e: Expr, p: skgeom.PointData, *, metric: bool = False) -> PointSummary:
        gate = skgeom.nondegeneracy(p.tau)
        summary = cls(
            expr_text=str(e),
            z=[_pair(c) for c in p.z],
            w=[_pair(c) for c in p.w],
            value=_pair(p.value),
            imm=[float(c) for c in p.imm],
            nondegenerate=gate.ok,
            min_sv=gate.min_sv,
            sig_imtau=gate.sig_imtau,
        )
        if gate.ok:
            bundle = skgeom.metric_bundle(p)
            summary.det_gxy = skgeom.volume_check(p).det_gxy
            summary.signature = bundle.sig
            summary.lemma_residuals = list(skgeom.lemma_residuals(p).as_tuple())
            if metric:
                summary.metric = bundle.dict()
        return summary

    def text(self) -> str:
        rows = [(name, value) for name, value in self.model_dump().items() if value is not None]
        width = max(len(name) for name, _ in rows)
        return "".join(f"{name.ljust(width)}  {value}\n" for name, value in rows)


# Parser
def _add_expression_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("-n", "--arity", dest="n", type=int, required=True, help="number of complex variables")
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("-F", "--expr", dest="expression", help="holomorphic expression in z1..zn")
    source.add_argument("--expr-file", dest="expression_file", help="UTF-8 file holding the expression")


def _add_window_arguments(parser: argparse.ArgumentParser, *, grid: int, sampling: bool) -> None:
    parser.add_argument(
        "--window",
        dest="bounds",
        type=float,
        nargs="+",
        required=True,
        metavar="BOUND",
        help="re_lo re_hi im_lo im_hi for each variable",
    )
    parser.add_argument(
        "--grid", type=int, nargs="+", default=[grid], help="samples per axis: one count or one per axis"
    )
    if sampling:
        parser.add_argument("--strategy", choices=[s.value for s in Strategy], default=Strategy.GRID.value)
        parser.add_argument("--samples", type=int, default=121, help="quasi-random sample count")
        parser.add_argument("--seed", type=int, default=VERIFICATION_SETTINGS.QUASI_RANDOM_SEED)


def build_parser() -> CliArgumentParser:
    parser = CliArgumentParser(
        prog="hypersphere", description="Parabolic affine hyperspheres from holomorphic functions"
    )
    parser.add_argument(
        "--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"], help="stderr log level"
    )
    subcommands = parser.add_subparsers(dest="subcommand", required=True)
    formats = [f.value for f in OutputFormat]

    eval_ = subcommands.add_parser("eval", help="inspect phi_F at one point")
    _add_expression_arguments(eval_)
    eval_.add_argument("--at", type=float, nargs="+", required=True, metavar="COORD", help="re im for each variable")
    eval_.add_argument("--metric", action="store_true", help="include the metric bundle")
    eval_.add_argument("--format", dest="output_format", choices=formats, default=OutputFormat.JSON.value)

    check = subcommands.add_parser("check", help="certify the identities over a chart window")
    _add_expression_arguments(check)
    _add_window_arguments(check, grid=11, sampling=True)
    check.add_argument("--tol", type=float, help="tolerance of the algebraic identities")
    check.add_argument("--oracle-tol", type=float, help="tolerance of the finite-difference oracles")
    check.add_argument("--step", type=float, help="finite-difference step h")
    check.add_argument("--oracle-points", type=int, help="size of the oracle subsample")
    check.add_argument(
        "--oracle", dest="jet_oracle", action="store_true", help="also compare jets with finite differences"
    )
    check.add_argument("--threads", type=int, default=os.cpu_count(), help="worker threads")
    check.add_argument("--output", help="write the report here instead of stdout")
    check.add_argument("--format", dest="output_format", choices=formats, default=OutputFormat.JSON.value)

    mesh = subcommands.add_parser("mesh", help="write the surface of a one-variable F as OBJ")
    _add_expression_arguments(mesh)
    _add_window_arguments(mesh, grid=64, sampling=False)
    mesh.add_argument("--output", required=True)

    csv = subcommands.add_parser("csv", help="write the point cloud of phi_F as CSV")
    _add_expression_arguments(csv)
    _add_window_arguments(csv, grid=11, sampling=True)
    csv.add_argument("--output", required=True)
    return parser


_SUBCOMMANDS = {
    "eval": CommandType.EVAL_POINT,
    "check": CommandType.CHECK_SUITE,
    "mesh": CommandType.EXPORT_MESH,
    "csv": CommandType.EXPORT_CSV,
}


def command_from_args(args: argparse.Namespace) -> Message:
    payload = {k: v for k, v in vars(args).items() if k not in ("subcommand", "log_level")}
    for key in ("at", "bounds", "grid"):
        if key in payload:
            payload[key] = tuple(payload[key])
    if "output_format" in payload:
        payload["output_format"] = OutputFormat(payload["output_format"])
    return command_generator(_SUBCOMMANDS[args.subcommand].value, **payload)


# Handlers
def load_expression(cmd: ExpressionCommand) -> Expr:
    if cmd.expression is not None:
        return parse(cmd.expression, cmd.n)
    assert cmd.expression_file is not None
    try:
        return parse_file(cmd.expression_file, cmd.n)
    except OSError as e:
        logger.error("could not read %s: %s", cmd.expression_file, e)
        raise ExportIOError(f"could not read {cmd.expression_file}: {e.strerror or e}") from e


def window_for(cmd: WindowCommand) -> ChartWindow:
    return ChartWindow(
        n=cmd.n,
        lo=cmd.lo,
        hi=cmd.hi,
        grid=cmd.grid,
        strategy=getattr(cmd, "strategy", Strategy.GRID),
        samples=getattr(cmd, "samples", 121),
        seed=getattr(cmd, "seed", VERIFICATION_SETTINGS.QUASI_RANDOM_SEED),
    )


def handle_eval(cmd: EvalPoint) -> ExitCode:
    e = load_expression(cmd)
    p = skgeom.eval_point(e, np.array(cmd.z))
    summary = PointSummary.from_point(e, p, metric=cmd.metric)
    match cmd.output_format:
        case OutputFormat.JSON:
            sys.stdout.write(summary.model_dump_json(indent=2) + "\n")
        case OutputFormat.TEXT:
            sys.stdout.write(summary.text())
    if not summary.nondegenerate:
        print(
            f"degenerate point: Im d^2F is singular at z={tuple(p.z)} (min singular value {summary.min_sv:.3e})",
            file=sys.stderr,
        )
        return ExitCode.FAILED
    return ExitCode.OK


def _report_text(report: verify.VerificationReport) -> str:
    width = max(len(name) for name in report.checks)
    lines = [
        f"expression  {report.expr_text}",
        f"points      {report.n_points} ({report.n_degenerate} degenerate)",
        f"oracles     {report.settings['oracle_points']} ({report.n_near_locus} near the locus, "
        f"{len(report.oracle_unresolved)} unresolved)",
    ]
    for name, check in report.checks.items():
        verdict = "ok" if check.passed else "FAIL"
        lines.append(
            f"{name.ljust(width)}  max {check.max_residual:.3e}  tol {check.tolerance:.1e}  "
            f"n {check.n_evaluated}  {verdict}"
        )
    lines.append(f"pass        {str(report.passed).lower()}")
    return "".join(line + "\n" for line in lines)


def handle_check(cmd: CheckSuite) -> ExitCode:
    e = load_expression(cmd)
    tolerances = Tolerances(
        algebraic=VERIFICATION_SETTINGS.ALGEBRAIC_TOLERANCE if cmd.tol is None else cmd.tol,
        oracle=VERIFICATION_SETTINGS.ORACLE_TOLERANCE if cmd.oracle_tol is None else cmd.oracle_tol,
    )
    report = verify.run_suite(
        e,
        window_for(cmd),
        tolerances,
        cmd.step,
        oracle_points=cmd.oracle_points,
        jet_oracle=cmd.jet_oracle,
        threads=cmd.threads,
    )
    match cmd.output_format:
        case OutputFormat.JSON:
            export_io.write_report(report, cmd.output)
        case OutputFormat.TEXT:
            if cmd.output is not None:
                export_io.write_report(report, cmd.output)
            sys.stdout.write(_report_text(report))
    return ExitCode.OK if report.passed else ExitCode.FAILED


def handle_mesh(cmd: ExportMesh) -> ExitCode:
    e = load_expression(cmd)
    if cmd.n != 1:
        raise ArityError(f"meshes need one complex variable, got {cmd.n}")
    m = build_mesh(e, window_for(cmd))
    export_io.write_obj(m, cmd.output)
    return ExitCode.OK


def handle_csv(cmd: ExportCsv) -> ExitCode:
    e = load_expression(cmd)
    window = window_for(cmd)
    points = skgeom.eval_points(e, verify.sample(window))
    skipped = export_io.write_csv(points, cmd.output, n=cmd.n)
    if skipped == len(points):
        logger.warning("every sample is degenerate; %s holds only the header", cmd.output)
    return ExitCode.OK


handlers: dict[CommandType, Callable[..., ExitCode]] = {
    CommandType.EVAL_POINT: handle_eval,
    CommandType.CHECK_SUITE: handle_check,
    CommandType.EXPORT_MESH: handle_mesh,
    CommandType.EXPORT_CSV: handle_csv,
}


def configure_logging(level: str) -> None:
    logging.basicConfig(stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    logging.getLogger().setLevel(level)


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        configure_logging(args.log_level)
        command = command_from_args(args)
        return handlers[CommandType(command.signature)](command)
    except (HypersphereError, ValueError) as e:
        code = exit_code_for(e)
        print(f"error: {e}", file=sys.stderr)
        return code
