"""CLI entry point: simulate, synthesize, sweep and validate."""
from __future__ import annotations

import argparse
import enum
import logging
import sys

from numpy.polynomial import Polynomial

from vssea.core.numkit import SynthesisError
from vssea.core.serialization import format_float
from vssea.core.synthesis import synthesize
from vssea.core.validation import ValidationError
from vssea.io.configfile import ConfigError, load_config
from vssea.io.csvfile import save_sweep, save_trace, write_sweep, write_trace
from vssea.sim.metrics import METRIC_FIELDS, Metrics, compute_metrics
from vssea.sim.scenario import FaultHooks, SimulationDivergence, run_scenario
from vssea.sim.sweep import SweepSpec, run_sweep
from vssea.suite import CHECKS, run_suite

logger = logging.getLogger("vssea")


class ExitStatus(enum.IntEnum):
    OK = 0
    CONFIG_ERROR = 1
    SYNTHESIS_FAILURE = 2
    SIMULATION_DIVERGENCE = 3
    CHECKS_FAILED = 4


FAULTS = ("pi2-inertia", "compensation-sign")


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

def overrides_from(args: argparse.Namespace) -> list[str]:
    """--set pairs, with --seed appended so it wins over a configured seed."""
    overrides = list(args.set or [])
    if args.seed is not None:
        overrides.append(f"sim.seed={args.seed}")
    return overrides


def read_config_text(path: str | None) -> str:
    if path is None:
        return ""
    try:
        with open(path, "r", encoding="utf-8") as f:
            return f.read()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from None


def format_polynomial(p: Polynomial) -> str:
    terms = []
    for power in range(p.degree(), -1, -1):
        c = p.coef[power]
        if power == 0:
            terms.append(format_float(c))
        elif power == 1:
            terms.append(f"{format_float(c)} s")
        elif c == 1.0:
            terms.append(f"s^{power}")
        else:
            terms.append(f"{format_float(c)} s^{power}")
    return " + ".join(terms)


def print_metrics(m: Metrics, out=sys.stdout) -> None:
    values = m.to_dict()
    for name in METRIC_FIELDS:
        value = values[name]
        shown = "unsettled" if value is None else format_float(value)
        print(f"{name + ':':<22}{shown}", file=out)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_simulate(args: argparse.Namespace) -> ExitStatus:
    """Run one scenario; CSV to --out (or stdout), metrics summary."""
    config = load_config(args.config, overrides_from(args))
    summary = sys.stdout if args.out else sys.stderr
    try:
        trace = run_scenario(config)
    except SimulationDivergence as e:
        if args.out:
            save_trace(args.out, e.trace, e.step)
        else:
            write_trace(sys.stdout, e.trace, e.step)
        print(f"simulation diverged at step {e.step}: {e.diagnostic}", file=sys.stderr)
        return ExitStatus.SIMULATION_DIVERGENCE

    if args.out:
        save_trace(args.out, trace)
    else:
        write_trace(sys.stdout, trace)
    print(f"{'config:':<22}{config.digest}", file=summary)
    print(f"{'controller:':<22}{config.controller.kind}", file=summary)
    print(f"{'rows:':<22}{len(trace)}", file=summary)
    print_metrics(compute_metrics(trace), summary)
    return ExitStatus.OK


def cmd_synthesize(args: argparse.Namespace) -> ExitStatus:
    """Print ranks, gains with provenance, observer gains and certificates."""
    config = load_config(args.config, overrides_from(args))
    report = synthesize(config.plant, config.controller, config.observer)
    yes_no = {True: "yes", False: "no"}
    print(f"config:                  {config.digest}")
    print(f"controller:              {config.controller.kind}")
    print(f"controllability rank:    {report.chain_rank}")
    print(f"plant rank:              {report.plant_rank}")
    gain = report.gain
    if gain is not None:
        print(f"gain method:             {gain.method}")
        if gain.method == "lqr":
            print(f"care iterations:         {gain.care_iterations}")
            print(f"care residual:           {gain.care_residual:.3e}")
        print(f"closed-loop polynomial:  {format_polynomial(gain.polynomial)}")
        print(f"K:                       {', '.join(format_float(k) for k in gain.gains.K)}")
        cert = gain.certificate
        print(f"lyapunov residual:       {cert.residual:.3e}")
        print(f"P eigenvalues:           min {cert.eig_min:.6g}, max {cert.eig_max:.6g}")
        print(f"P positive definite:     {yes_no[cert.positive_definite]}")
        print("closed loop hurwitz:     yes")
    if report.smc_hurwitz is not None:
        print(f"sliding manifold hurwitz: {yes_no[report.smc_hurwitz]}")
    g0, g1, g2 = report.observer_gains
    print(f"observer gains:          g0={format_float(g0)}, g1={format_float(g1)}, g2={format_float(g2)}")
    print(f"observer hurwitz:        {yes_no[report.observer_hurwitz and report.observer_matrix_hurwitz]}")
    return ExitStatus.OK


def cmd_sweep(args: argparse.Namespace) -> ExitStatus:
    """One row of metrics per swept value; failures land in the error column."""
    spec = SweepSpec.parse(args.vary)
    text = read_config_text(args.config)
    overrides = overrides_from(args)
    # fail fast on a broken base config before fanning out
    load_config(args.config, overrides)
    rows = run_sweep(text, overrides, spec, jobs=args.jobs)
    if args.out:
        save_sweep(args.out, spec.key, rows)
    else:
        write_sweep(sys.stdout, spec.key, rows)
    failed = sum(1 for r in rows if r.error)
    print(f"{len(rows)} rows, {failed} failed", file=sys.stderr)
    return ExitStatus.OK


def cmd_validate(args: argparse.Namespace) -> ExitStatus:
    """Run the invariant suite and print a pass/fail table."""
    hooks = FaultHooks()
    if args.inject == "pi2-inertia":
        config = load_config(args.config, overrides_from(args))
        hooks = FaultHooks(pi2_inertia=config.plant.j_e)
    elif args.inject == "compensation-sign":
        hooks = FaultHooks(compensation_sign=-1.0)
    report = run_suite(hooks, args.check or None)
    width = max(len(r.name) for r in report.results)
    for r in report.results:
        print(f"{r.name:<{width}}  {'PASS' if r.passed else 'FAIL'}  {r.detail}")
    passed = sum(1 for r in report.results if r.passed)
    print(f"{passed}/{len(report.results)} checks passed")
    return ExitStatus.OK if report.passed else ExitStatus.CHECKS_FAILED


# ---------------------------------------------------------------------------
# Argument parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vssea",
        description="VSSEA controller synthesis and closed-loop simulation",
    )
    # Shared scenario options
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, metavar="PATH",
                        help="Scenario file (defaults apply when omitted)")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="Override a config key, e.g. observer.bandwidth=20 (repeatable)")
    common.add_argument("--seed", type=int, default=None, metavar="N",
                        help="Seed for measurement noise (observer.noise_std)")
    common.add_argument("--log-level", default="WARNING",
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"])

    subparsers = parser.add_subparsers(dest="command", required=True)

    sim_p = subparsers.add_parser("simulate", parents=[common], help="Run one scenario")
    sim_p.add_argument("--out", default=None, metavar="PATH", help="Trace CSV (default: stdout)")

    subparsers.add_parser("synthesize", parents=[common],
                          help="Synthesize gains and print certificates")

    sw_p = subparsers.add_parser("sweep", parents=[common], help="Sweep one config key")
    sw_p.add_argument("--vary", required=True, metavar="KEY=V1,V2,...",
                      help="Key and values; separate with ';' when values contain commas")
    sw_p.add_argument("--out", default=None, metavar="PATH", help="Summary CSV (default: stdout)")
    sw_p.add_argument("--jobs", type=int, default=1, metavar="N",
                      help="Worker processes (default: 1)")

    va_p = subparsers.add_parser("validate", parents=[common], help="Run the invariant suite")
    va_p.add_argument("--check", action="append", choices=list(CHECKS), default=[],
                      help="Run only this check (repeatable)")
    va_p.add_argument("--inject", choices=FAULTS, default=None,
                      help="Inject a model fault the suite should detect")

    return parser


COMMANDS = {
    "simulate": cmd_simulate,
    "synthesize": cmd_synthesize,
    "sweep": cmd_sweep,
    "validate": cmd_validate,
}


def run(argv: list[str] | None = None) -> ExitStatus:
    """Parse, dispatch and map failures to exit statuses."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
        force=True,
    )
    try:
        return COMMANDS[args.command](args)
    except ValidationError as e:
        print(f"config error: {e}", file=sys.stderr)
        return ExitStatus.CONFIG_ERROR
    except SynthesisError as e:
        print(f"synthesis failed: {e}", file=sys.stderr)
        return ExitStatus.SYNTHESIS_FAILURE
    except SimulationDivergence as e:
        print(f"simulation diverged: {e}", file=sys.stderr)
        return ExitStatus.SIMULATION_DIVERGENCE


def main() -> None:
    sys.exit(int(run()))


if __name__ == "__main__":
    main()
