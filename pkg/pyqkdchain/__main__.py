"""Command-line front end of pyqkdchain.

Usage: pyqkdchain <subcommand> [options], see pyqkdchain --help
"""

import argparse
import json
import logging
import logging.config
import os
import sys
from contextlib import contextmanager
from typing import Optional, Sequence

import yaml
from dotenv import load_dotenv

from .bell import BellWord
from .build import PRESET_HONEST, PRESET_Q, ChainFamily, create_chain_spec
from .config import ConfigError, dump_chain_config
from .keyrate import DEFAULT_EC_FACTOR, DEFAULT_EPSILON, DEFAULT_M_FRACTION
from .montecarlo import TrialConfig, simulate_e91, verify_concentration
from .noise import ChainSpec, balanced_split, create_uniform_chain
from .rng import default_seed
from .sweep import (
    VARIABLES,
    SweepSpec,
    asymptotic_rate_table,
    bounds_table,
    finite_rate_table,
    noise_table,
    write_csv,
)
from .verify import MUTATIONS, run_verification

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_VERIFY_FAILED = 2
MC_EPSILON = 0.01
DEFAULT_RANGES = {
    "q": (0.0, 0.1, 21),
    "qx": (0.0, 0.2, 41),
    "N": (1e4, 1e12, 17),
}


def enable_logging(logconf: Optional[str] = None) -> None:
    """configures logging from a yaml dictConfig file, given explicitly
    or through env QKDCHAIN_LOGCONF"""
    logconf = logconf or os.getenv("QKDCHAIN_LOGCONF")
    if not logconf:
        return
    try:
        with open(logconf, "r") as yml_logconf:
            logging.config.dictConfig(
                yaml.load(yml_logconf, Loader=yaml.SafeLoader)
            )
        log.info(f"Logging enabled according to config in {logconf}")
    except Exception as e:
        print(f"error while trying to load {logconf=}: {e}", file=sys.stderr)


@contextmanager
def output_stream(path: Optional[str]):
    if path is None:
        yield sys.stdout
        return
    with open(path, "w", newline="", encoding="utf-8") as out:
        yield out


def _write_json(doc: dict, path: Optional[str]) -> None:
    with output_stream(path) as out:
        json.dump(doc, out, indent=2, sort_keys=True)
        out.write("\n")


def _epsilon(args, default: float = DEFAULT_EPSILON) -> float:
    return default if args.epsilon is None else args.epsilon


def _warn_uniform_links(args) -> None:
    if args.config is not None and args.q is not None:
        log.warning(
            f"{args.q=} rebuilds identical links: the links, honest split "
            f"and p* override of {args.config} are not used"
        )


def _single_chain(args) -> ChainSpec:
    """chain from --config (or the preset), adapted by --q and --honest"""
    spec = create_chain_spec(args.config)
    _warn_uniform_links(args)
    if args.q is not None:
        spec = create_uniform_chain(spec.repeaters, args.q, spec.honest_links)
    if args.honest is not None:
        spec = spec.with_honest(*balanced_split(args.honest))
    return spec


def _family(args) -> ChainFamily:
    spec = create_chain_spec(args.config)
    _warn_uniform_links(args)
    if args.q is not None:
        return ChainFamily(repeaters=spec.repeaters, q=args.q)
    return ChainFamily.from_spec(spec, q=PRESET_Q)


def _sweep(args, variable: str) -> SweepSpec:
    fixed = dict(
        N=int(args.N),
        m_fraction=args.m_fraction,
        epsilon=_epsilon(args),
        ec_factor=args.ec_factor,
        strict_leak=args.strict_leak,
        honest=tuple(args.honest),
    )
    if args.values:
        values = [int(v) if variable == "N" else v for v in args.values]
        return SweepSpec(variable, tuple(values), **fixed)
    start, stop, steps = DEFAULT_RANGES[variable]
    start = start if args.start is None else args.start
    stop = stop if args.stop is None else args.stop
    steps = steps if args.steps is None else args.steps
    return SweepSpec.from_range(variable, start, stop, steps, **fixed)


def cmd_noise(args) -> int:
    sweep = _sweep(args, "q")
    header, rows = noise_table(
        _family(args), sweep.values, sweep.honest, args.workers
    )
    with output_stream(args.out) as out:
        write_csv(header, rows, out)
    return EXIT_OK


def cmd_rate_finite(args) -> int:
    sweep = _sweep(args, args.variable)
    header, rows = finite_rate_table(sweep, _family(args), args.workers)
    with output_stream(args.out) as out:
        write_csv(header, rows, out)
    return EXIT_OK


def cmd_rate_asymptotic(args) -> int:
    sweep = _sweep(args, args.variable)
    header, rows = asymptotic_rate_table(sweep, _family(args), args.workers)
    with output_stream(args.out) as out:
        write_csv(header, rows, out)
    return EXIT_OK


def cmd_bounds(args) -> int:
    values = args.values or [10**k for k in range(4, 13)]
    header, rows = bounds_table(
        [int(v) for v in values], args.m_fraction, _epsilon(args)
    )
    with output_stream(args.out) as out:
        write_csv(header, rows, out)
    return EXIT_OK


def _trial_config(args, epsilon: float, trials: int = 1) -> TrialConfig:
    rounds = int(args.N)
    return TrialConfig(
        spec=_single_chain(args),
        rounds=rounds,
        sample_size=max(1, int(round(args.m_fraction * rounds))),
        seed=default_seed() if args.seed is None else args.seed,
        trials=trials,
        epsilon=epsilon,
        ec_factor=args.ec_factor,
        strict_leak=args.strict_leak,
    )


def cmd_simulate(args) -> int:
    cfg = _trial_config(args, _epsilon(args))
    report = simulate_e91(cfg)
    _write_json(
        dict(chain=dump_chain_config(cfg.spec), report=report.to_dict()),
        args.out,
    )
    return EXIT_OK


def cmd_mc_verify(args) -> int:
    epsilon = _epsilon(args, MC_EPSILON)
    cfg = _trial_config(args, epsilon, args.trials)
    injected = None
    if args.inject == "alternating":
        # worst case for the phase-weight sampling: weight exactly 1/2
        n = cfg.rounds
        injected = BellWord([0] * n, [i % 2 for i in range(n)])
    summary = verify_concentration(cfg, epsilon, injected, args.workers)
    _write_json(
        dict(chain=dump_chain_config(cfg.spec), summary=summary.to_dict()),
        args.out,
    )
    return EXIT_OK if summary.passed else EXIT_VERIFY_FAILED


def cmd_verify(args) -> int:
    report = run_verification(args.seed, args.mutate, args.trials)
    _write_json(report.to_dict(), args.out)
    if not report.passed:
        failed = [c.name for c in report.checks if not c.passed]
        print(f"verification failed: {failed}", file=sys.stderr)
        return EXIT_VERIFY_FAILED
    return EXIT_OK


class ArgumentParser(argparse.ArgumentParser):
    """usage errors exit with the validation error code"""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _common_parser() -> argparse.ArgumentParser:
    common = ArgumentParser(add_help=False)
    common.add_argument(
        "--config",
        metavar="PATH",
        help="JSON chain config (default: 5 repeaters, q = 3%%)",
    )
    common.add_argument(
        "--out", metavar="PATH", help="output file (default: stdout)"
    )
    common.add_argument(
        "--seed",
        type=int,
        default=None,
        help="root seed (default: env QKDCHAIN_SEED or built-in)",
    )
    common.add_argument(
        "--epsilon",
        type=float,
        default=None,
        help=f"security parameter (default: {DEFAULT_EPSILON}, "
        f"{MC_EPSILON} for mc-verify)",
    )
    common.add_argument(
        "--m-fraction",
        type=float,
        default=DEFAULT_M_FRACTION,
        help="test rounds as a fraction of N (default: %(default)s)",
    )
    common.add_argument(
        "--ec-factor",
        type=float,
        default=DEFAULT_EC_FACTOR,
        help="error-correction inefficiency (default: %(default)s)",
    )
    common.add_argument(
        "--strict-leak",
        action="store_true",
        help="charge error correction per total round, not per key round",
    )
    common.add_argument(
        "--logconf", metavar="PATH", help="yaml logging config"
    )
    return common


def _add_sweep_args(parser, with_n: bool = True) -> None:
    parser.add_argument("--start", type=float, help="first sweep value")
    parser.add_argument("--stop", type=float, help="last sweep value")
    parser.add_argument("--steps", type=int, help="number of sweep values")
    parser.add_argument(
        "--values", type=float, nargs="+", help="explicit sweep values"
    )
    parser.add_argument(
        "--honest",
        type=int,
        nargs="+",
        default=list(PRESET_HONEST),
        help="honest repeater counts (default: %(default)s)",
    )
    parser.add_argument(
        "--q", type=float, help="identical link noise for all links"
    )
    if with_n:
        parser.add_argument(
            "--N",
            type=float,
            default=1e8,
            help="rounds, when not swept (default: %(default)s)",
        )
    parser.add_argument("--workers", type=int, default=1)


def _add_chain_args(parser, rounds: float) -> None:
    parser.add_argument(
        "--q", type=float, help="identical link noise for all links"
    )
    parser.add_argument(
        "--honest", type=int, help="honest repeaters, balanced split"
    )
    parser.add_argument(
        "--N",
        type=float,
        default=rounds,
        help="number of rounds (default: %(default)s)",
    )


def get_arg_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = ArgumentParser(
        prog="pyqkdchain",
        description="Key rates of QKD over partially corrupted repeater "
        "chains",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    noise = sub.add_parser(
        "noise", parents=[common], help="qx and p* over link noise q"
    )
    _add_sweep_args(noise)
    noise.set_defaults(func=cmd_noise)

    finite = sub.add_parser(
        "rate-finite", parents=[common], help="finite-key rates"
    )
    finite.add_argument("--variable", choices=VARIABLES, default="N")
    _add_sweep_args(finite)
    finite.set_defaults(func=cmd_rate_finite)

    asym = sub.add_parser(
        "rate-asymptotic", parents=[common], help="asymptotic rates"
    )
    asym.add_argument("--variable", choices=("q", "qx"), default="qx")
    _add_sweep_args(asym)
    asym.set_defaults(func=cmd_rate_asymptotic)

    bounds = sub.add_parser(
        "bounds", parents=[common], help="tolerances and epsilon ledger"
    )
    bounds.add_argument("--values", type=float, nargs="+", help="N values")
    bounds.set_defaults(func=cmd_bounds)

    simulate = sub.add_parser(
        "simulate", parents=[common], help="simulate one E91 run"
    )
    _add_chain_args(simulate, 1e6)
    simulate.set_defaults(func=cmd_simulate)

    mc = sub.add_parser(
        "mc-verify", parents=[common], help="Monte-Carlo concentration check"
    )
    _add_chain_args(mc, 1e4)
    mc.add_argument("--trials", type=int, default=10_000)
    mc.add_argument(
        "--inject", choices=("none", "alternating"), default="none"
    )
    mc.add_argument("--workers", type=int, default=1)
    mc.set_defaults(func=cmd_mc_verify)

    verify = sub.add_parser(
        "verify", parents=[common], help="run the self-verification suite"
    )
    verify.add_argument("--mutate", choices=MUTATIONS, default=None)
    verify.add_argument(
        "--trials",
        type=int,
        default=2000,
        help="Monte-Carlo trials per concentration check",
    )
    verify.set_defaults(func=cmd_verify)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    load_dotenv()
    args = get_arg_parser().parse_args(argv)
    enable_logging(args.logconf)
    log.debug(f"running {args.command=} with {args=}")
    try:
        return args.func(args)
    except ConfigError as ce:
        print(f"invalid config: {ce}", file=sys.stderr)
        return EXIT_INVALID
    except ValueError as ve:
        print(f"invalid input: {ve}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
