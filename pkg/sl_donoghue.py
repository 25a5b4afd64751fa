import argparse
import json
import logging
import math
import os
import sys
from typing import Literal

import numpy as np
from dotenv import load_dotenv
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from deficiency import deficiency_basis, weyl_solution
from donoghue import prepare, scan
from endpoints import classify, endpoint_frame
from krein import extension_coupling
from models.bessel import (
    BesselParams,
    bessel_donoghue_alpha,
    bessel_donoghue_friedrichs,
    bessel_problem,
    bessel_weyl_m,
)
from models.regular import regular_problem
from models.tabulated import tabulated_problem
from problem import OneEndpoint, SLProblem
from report import scan_columns, to_frame, update_report, write_table
from utils.errors import (
    BadRunConfig,
    ConfigError,
    InadmissibleExtension,
    NumericalError,
    ValidationFailure,
)
from validation import random_z, require_passed, run_suite

logger = logging.getLogger("sl_donoghue")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_VALIDATION = 4


class ProblemConfig(BaseModel):
    family: Literal["regular", "bessel", "tabulated"] = "regular"
    a: float = 0.0
    b: float | None = None
    p: float = 1.0
    q: float = 0.0
    r: float = 1.0
    delta: float = 0.0
    nu: float = 0.0
    gamma: float = 0.0
    table: str | None = None

    @field_validator("b", mode="before")
    @classmethod
    def parse_infinity(cls, value):
        if isinstance(value, str) and value.strip().lower() in ("inf", "infinity"):
            return math.inf
        return value

    @property
    def right_end(self) -> float:
        if self.b is not None:
            return self.b
        return math.inf if self.family == "bessel" else math.pi

    @model_validator(mode="after")
    def check_family(self):
        if self.family == "tabulated" and not self.table:
            raise ValueError("tabulated problems need a table path")
        return self

    def build(self) -> SLProblem:
        if self.family == "bessel":
            return bessel_problem(BesselParams(self.delta, self.nu, self.gamma, self.right_end))
        if self.family == "tabulated":
            return tabulated_problem(self.table)
        return regular_problem(self.a, self.right_end, self.p, self.q, self.r)


class ExtensionConfig(BaseModel):
    kind: Literal["one_endpoint", "separated", "coupled", "krein_von_neumann"] = "separated"
    alpha: float = 0.0
    beta: float = 0.0
    phi: float = 0.0
    R: list[list[float]] | None = None

    def to_spec(self) -> dict:
        if self.kind == "one_endpoint":
            return {"kind": self.kind, "alpha": self.alpha}
        if self.kind == "separated":
            return {"kind": self.kind, "alpha": self.alpha, "beta": self.beta}
        if self.kind == "coupled":
            if self.R is None:
                raise BadRunConfig("Coupled extensions need the 2x2 matrix R.")
            return {"kind": self.kind, "phi": self.phi, "R": self.R}
        return {"kind": self.kind}


class RandomGrid(BaseModel):
    count: int = Field(100, ge=1)
    im_min: float = Field(1e-3, gt=0)
    im_max: float = Field(10.0, gt=0)
    re_max: float = Field(5.0, ge=0)


class ZGridConfig(BaseModel):
    points: list[tuple[float, float]] | None = None
    rectangle: dict[Literal["re", "im"], tuple[float, float, int]] | None = None
    random: RandomGrid | None = None

    @model_validator(mode="after")
    def check_single_source(self):
        given = [x is not None for x in (self.points, self.rectangle, self.random)]
        if sum(given) > 1:
            raise ValueError("give exactly one of points, rectangle or random")
        return self

    def values(self, seed: int) -> list[complex]:
        if self.random is not None:
            grid = self.random
            return random_z(seed, grid.count, grid.im_min, grid.im_max, grid.re_max)
        if self.rectangle is not None:
            re = np.linspace(*self.rectangle["re"][:2], int(self.rectangle["re"][2]))
            im = np.linspace(*self.rectangle["im"][:2], int(self.rectangle["im"][2]))
            zs = [complex(x, y) for y in im for x in re]
        else:
            zs = [complex(x, y) for x, y in (self.points or [(0.0, 2.0)])]
        for z in zs:
            if abs(z.imag) < 1e-6:
                raise BadRunConfig(f"z = {z} is real; the grid must avoid the real axis.")
        return zs


class Tolerances(BaseModel):
    rtol: float = Field(1e-11, gt=0)
    epsilon: float = Field(1e-8, gt=0)


class OutputConfig(BaseModel):
    format: Literal["json", "csv"] = "csv"


class RunConfig(BaseModel):
    problem: ProblemConfig = Field(default_factory=ProblemConfig)
    extension: ExtensionConfig = Field(default_factory=ExtensionConfig)
    z_grid: ZGridConfig = Field(default_factory=ZGridConfig)
    tolerances: Tolerances = Field(default_factory=Tolerances)
    output: OutputConfig = Field(default_factory=OutputConfig)
    seed: int = 0


def load_config(args) -> RunConfig:
    if args.config:
        with open(args.config, "r") as f:
            config = RunConfig.model_validate(json.load(f))
    else:
        config = RunConfig()
    if args.rtol is not None:
        config.tolerances.rtol = args.rtol
    if args.format is not None:
        config.output.format = args.format
    if args.seed is not None:
        config.seed = args.seed
    return config


def thread_count() -> int:
    value = os.getenv("SLDONOGHUE_THREADS", "1")
    try:
        threads = int(value)
    except ValueError:
        raise BadRunConfig(f"SLDONOGHUE_THREADS = {value!r} is not an integer.")
    if threads < 1:
        raise BadRunConfig(f"SLDONOGHUE_THREADS = {threads} must be at least 1.")
    return threads


def _context(problem: SLProblem, config: RunConfig):
    try:
        tolerances = config.tolerances
        return prepare(problem, config.extension.to_spec(), rtol=tolerances.rtol, epsilon=tolerances.epsilon)
    except InadmissibleExtension as e:
        raise BadRunConfig(e.message)


def _say(args, text: str):
    """Summaries go to stderr when the table itself is printed."""
    print(text, file=sys.stdout if args.out else sys.stderr)


def _complex_columns(row: dict, name: str, value: complex):
    row[f"{name}_re"] = value.real
    row[f"{name}_im"] = value.imag


# ---------------------------------------------------------------------------
# subcommands


def cmd_classify(config: RunConfig, args) -> int:
    problem = config.problem.build()
    classification = classify(problem)
    n = classification.deficiency_index
    summary = f"a: {classification.at_a.value}, b: {classification.at_b.value}, n± = {n}"
    if n == 0:
        summary += ", T_min self-adjoint"
    _say(args, summary)
    described = problem.describe()
    row = {"x_a": described.pop("a"), "x_b": described.pop("b"), **described, **classification.to_dict()}
    write_table(to_frame([row]), args.out, config.output.format)
    return EXIT_OK


def cmd_donoghue(config: RunConfig, args) -> int:
    problem = config.problem.build()
    zs = config.z_grid.values(config.seed)
    context = _context(problem, config)
    rows = scan(problem, context.spec, zs, threads=thread_count(), context=context)
    dim = 1 if isinstance(context.spec, OneEndpoint) else 2
    write_table(to_frame([r.row() for r in rows], scan_columns(dim)), args.out, config.output.format)
    failed = [r for r in rows if r.error]
    if failed:
        _say(args, f"{len(failed)} of {len(rows)} rows failed.")
        return EXIT_NUMERICAL
    _say(args, f"Worst Herglotz margin: {min(r.herglotz_margin for r in rows):.3e}")
    return EXIT_OK


def cmd_krein(config: RunConfig, args) -> int:
    problem = config.problem.build()
    context = _context(problem, config)
    rtol, epsilon = config.tolerances.rtol, config.tolerances.epsilon
    rows = []
    for z in config.z_grid.values(config.seed):
        if isinstance(context.spec, OneEndpoint):
            weyl = weyl_solution(problem, z, context.classification, rtol=rtol, epsilon=epsilon)
            coupling = extension_coupling(problem, context.spec, z, weyl=weyl)
        else:
            basis = deficiency_basis(problem, z, context.classification, rtol=rtol, epsilon=epsilon)
            coupling = extension_coupling(problem, context.spec, z, basis=basis)
        row = {"z_re": z.real, "z_im": z.imag, "kind": coupling.kind}
        if coupling.kind == "matrix":
            for (j, k), value in np.ndenumerate(coupling.value):
                _complex_columns(row, f"K{j + 1}{k + 1}", value)
        else:
            _complex_columns(row, "k", complex(coupling.value))
        _complex_columns(row, "det", complex(coupling.determinant))
        rows.append(row)
    write_table(to_frame(rows), args.out, config.output.format)
    return EXIT_OK


def cmd_weyl(config: RunConfig, args) -> int:
    problem = config.problem.build()
    classification = classify(problem)
    rtol, epsilon = config.tolerances.rtol, config.tolerances.epsilon
    rows = []
    for z in config.z_grid.values(config.seed):
        frame = endpoint_frame(problem, z, "a", rtol=rtol, epsilon=epsilon)
        psi = weyl_solution(problem, z, classification, frame=frame, rtol=rtol)
        value, _ = psi.boundary_data()
        row = {"z_re": z.real, "z_im": z.imag}
        _complex_columns(row, "m0", psi.m0)
        row["anchor"] = psi.anchor
        row["psi_norm_residual"] = abs(value - 1.0)
        rows.append(row)
    write_table(to_frame(rows), args.out, config.output.format)
    return EXIT_OK


def cmd_validate(config: RunConfig, args) -> int:
    problem = config.problem.build()
    spec = config.extension.to_spec()
    try:
        tolerances = config.tolerances
        results = run_suite(problem, spec, seed=config.seed, rtol=tolerances.rtol, epsilon=tolerances.epsilon)
    except InadmissibleExtension as e:
        raise BadRunConfig(e.message)
    rows = [r.row() for r in results]
    write_table(to_frame(rows), args.out, config.output.format)
    if args.ledger:
        label = json.dumps(problem.describe(), sort_keys=True)
        spec_label = json.dumps(spec, sort_keys=True)
        update_report([{"problem": label, "spec": spec_label, **row} for row in rows], args.ledger)
    passed = sum(r.passed for r in results)
    _say(args, f"Passed {passed} from {len(results)} checks")
    require_passed(results)
    return EXIT_OK


def cmd_bessel_ref(config: RunConfig, args) -> int:
    if config.problem.family != "bessel":
        raise BadRunConfig("bessel-ref needs a bessel problem block.")
    prm = config.problem
    params = BesselParams(prm.delta, prm.nu, prm.gamma, prm.right_end)
    alpha = config.extension.alpha if config.extension.kind == "one_endpoint" else 0.0
    rows = []
    for z in config.z_grid.values(config.seed):
        row = {"z_re": z.real, "z_im": z.imag}
        _complex_columns(row, "m0", bessel_weyl_m(params, z))
        _complex_columns(row, "M_friedrichs", bessel_donoghue_friedrichs(params, z))
        if alpha != 0.0:
            _complex_columns(row, "M_alpha", bessel_donoghue_alpha(params, alpha, z))
        rows.append(row)
    write_table(to_frame(rows), args.out, config.output.format)
    return EXIT_OK


COMMANDS = {
    "classify": cmd_classify,
    "donoghue": cmd_donoghue,
    "krein": cmd_krein,
    "weyl": cmd_weyl,
    "validate": cmd_validate,
    "bessel-ref": cmd_bessel_ref,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Donoghue m-functions of Sturm-Liouville operators with limit-circle endpoints."
    )
    parser.add_argument("command", choices=sorted(COMMANDS), help="Subcommand to run.")
    parser.add_argument("--config", type=str, default=None, help="Path to a JSON run configuration.")
    parser.add_argument("--out", type=str, default=None, help="Output file. Prints to stdout by default.")
    parser.add_argument(
        "--format",
        type=str,
        choices=["json", "csv"],
        default=None,
        help='Output format, "csv" or "json". Overrides the configuration.',
    )
    parser.add_argument("--seed", type=int, default=None, help="Seed for random z-grids and test functions.")
    parser.add_argument("--rtol", type=float, default=None, help="Relative tolerance of the ODE solves.")
    parser.add_argument(
        "--ledger",
        type=str,
        default=None,
        help="validate only: CSV ledger to upsert the check rows into.",
    )
    parser.add_argument("--verbose", action="store_true", help="Log numerical progress at DEBUG level.")
    return parser


def main(argv=None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(asctime)s %(name)s %(levelname)s: %(message)s",
    )
    try:
        config = load_config(args)
        return COMMANDS[args.command](config, args)
    except ValidationError as e:
        print(f"Invalid configuration: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as e:
        print(f"{type(e).__name__}: {e.message}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as e:
        print(f"{type(e).__name__}: {e.message}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValidationFailure as e:
        print(f"{type(e).__name__}: {e.message}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
