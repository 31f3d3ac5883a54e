"""Command-line front end for Perron expansions.

Usage:
    perron families
    perron parse-phi --phi "(x(n)-1)*x(n)"
    perron expand --family luroth --side alt --x 2/5 --depth 4
    perron reconstruct --family pierce --side alt --digits 2,3
    perron cylinder --family luroth --side alt --base 3,2 --children 6
    perron compare --family luroth --side alt --a 3,2 --b 3,3
    perron transport --family luroth --x 2/5 --depth 6
    perron measure-cover --family luroth --v 2,3 --depth 10
    perron membership --family pierce --x 2/3
    perron digit-law --family luroth --side alt --position 1 --samples 100000
    perron stats --experiment renyi --family pierce --side alt --n 40 --samples 200

Every option can also come from ``--config file.json`` (keys mirror the long
option names); options on the command line win. ``--seed`` defaults to 0 and
is echoed in every result.

Exit codes: 0 ok, 2 invalid input, 3 outside the domain, 4 precision
exhausted, 64 usage error.
"""

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import pandas as pd

sys.path.insert(0, str(Path(__file__).parent))

import config
from analysis import (
    DigitFrequencyExperiment, ExperimentRunner, RenyiProfileExperiment,
    digit_frequency, renyi_profile,
)
from cylinders import (
    adjacent_boundary, child_ratio, children, compare_digitwise, cyl_bounds,
    first_divergence,
)
from exceptions import ConfigException, PerronException, UsageError, ValidationError
from expansion import (
    DigitSeq, Side, extract_p, extract_pminus, partial_sum_p, partial_sum_pminus,
    reconstruct_enclosure, validate_digits,
)
from logger import setup_logger
from phi import PhiProgram, family_catalog, load_program, parse_phi_spec
from reports import dump_json, frame_to_csv, write_output
from transport import (
    cover_measure_restricted, faithful_interval_cover, is_membership, mc_digit_law,
    transport_cylinder, transport_point,
)
from utils import format_rational, parse_digit_set, parse_int_list, parse_rational

logger = setup_logger(__name__)

DEFAULTS: Dict[str, Any] = {
    'side': 'alt',
    'depth': 8,
    'seed': config.DEFAULT_SEED,
    'format': 'json',
    'bits': config.DEFAULT_BITS,
    'samples': 10_000,
    'position': 1,
    'positions': '1-8',
    'max_digit': config.LAW_MAX_DIGIT,
    'sampling': 'transport',
    'threads': 1,
    'n': 40,
    'experiment': 'renyi',
}

# Renyi rows reach depth 40
COMMAND_DEFAULTS: Dict[str, Dict[str, Any]] = {
    'stats': {'bits': 4096, 'samples': 200},
}


class CommandParser(argparse.ArgumentParser):
    """ArgumentParser that raises UsageError instead of exiting with 2."""

    def error(self, message):
        raise UsageError(message, self.format_usage())


# ============================================================================
# RUN CONFIGURATION
# ============================================================================
@dataclass
class RunConfig:
    command: str
    options: Dict[str, Any]

    def get(self, name: str, default: Any = None) -> Any:
        value = self.options.get(name)
        return default if value is None else value

    def require(self, name: str) -> Any:
        value = self.options.get(name)
        if value is None:
            raise UsageError(f"{self.command}: --{name.replace('_', '-')} is required")
        return value

    def integer(self, name: str, required: bool = False) -> Optional[int]:
        value = self.require(name) if required else self.options.get(name)
        if value is None:
            return None
        if isinstance(value, bool):
            raise ConfigException(f"--{name.replace('_', '-')} must be an integer")
        try:
            return int(value)
        except (TypeError, ValueError):
            raise ConfigException(f"--{name.replace('_', '-')} must be an integer, got {value!r}")

    @property
    def seed(self) -> int:
        seed = self.integer('seed')
        if seed < 0:
            raise ValidationError(f"seed must be non-negative, got {seed}")
        return seed

    @property
    def side(self) -> Side:
        return Side.parse(self.get('side'))

    def program(self) -> PhiProgram:
        family, phi = self.options.get('family'), self.options.get('phi')
        if family is None and phi is None:
            raise UsageError(f"{self.command}: give --family or --phi")
        return load_program(family, phi, self.integer('phi0'))


def load_config_file(path: str) -> Dict[str, Any]:
    try:
        with open(path, 'r') as f:
            data = json.load(f)
    except OSError as e:
        raise ConfigException(f"cannot read config file {path}: {e}")
    except json.JSONDecodeError as e:
        raise ConfigException(f"config file {path} is not valid JSON: {e}")
    if not isinstance(data, dict):
        raise ConfigException(f"config file {path} must hold a JSON object")
    return {str(key).replace('-', '_'): value for key, value in data.items()}


def build_run_config(args: argparse.Namespace) -> RunConfig:
    options = {key: value for key, value in vars(args).items() if key not in ('command', 'config')}
    if args.config:
        for key, value in load_config_file(args.config).items():
            if key == 'command':
                continue
            if key not in options:
                raise ConfigException(f"config key {key!r} is not an option of {args.command}")
            if options[key] is None:
                options[key] = value
    defaults = {**DEFAULTS, **COMMAND_DEFAULTS.get(args.command, {})}
    for key, default in defaults.items():
        if key in options and options[key] is None:
            options[key] = default
    return RunConfig(args.command, options)


# ============================================================================
# SUBCOMMANDS
# ============================================================================
def _digits(cfg: RunConfig, name: str) -> List[int]:
    value = cfg.require(name)
    if isinstance(value, str) and not value.strip():
        return []
    return parse_int_list(value)


def cmd_families(cfg: RunConfig) -> dict:
    return {'families': family_catalog()}


def cmd_parse_phi(cfg: RunConfig) -> dict:
    phi0 = cfg.integer('phi0')
    program = parse_phi_spec(cfg.require('phi'), 1 if phi0 is None else phi0)
    return {
        'canonical': program.source_text,
        'phi0': program.phi0,
        'matching_families': [f.value for f in program.matching_families()],
        'constant': program.constant_value(),
        'last_digit_only': program.depends_on_last_digit_only(),
    }


def cmd_expand(cfg: RunConfig) -> dict:
    program = cfg.program()
    x = parse_rational(cfg.require('x'))
    depth = cfg.integer('depth')
    if cfg.side is Side.ALTERNATING:
        outcome = extract_pminus(x, program, depth)
        result = outcome.to_dict()
        seq = outcome.seq
    else:
        seq = extract_p(x, program, depth)
        result = seq.to_dict()
        result.update({'status': 'ongoing', 'boundary': None})
    result['x'] = format_rational(x)
    result['enclosure'] = reconstruct_enclosure(program, seq).to_dict()
    return result


def cmd_reconstruct(cfg: RunConfig) -> dict:
    program = cfg.program()
    side = cfg.side
    report = validate_digits(program, _digits(cfg, 'digits'), side)
    if not report.valid:
        raise ValidationError(report.reason)
    seq = DigitSeq.build(program, report.digits, side)
    partial = partial_sum_pminus(program, seq) if side is Side.ALTERNATING else partial_sum_p(program, seq)
    return {
        'side': side.value,
        'digits': list(seq.digits),
        'r_chain': list(report.r_chain),
        'partial_sum': format_rational(partial),
        'enclosure': reconstruct_enclosure(program, seq).to_dict(),
    }


def cmd_cylinder(cfg: RunConfig) -> dict:
    program = cfg.program()
    side = cfg.side
    base = _digits(cfg, 'base')
    result = cyl_bounds(program, base, side).to_dict()
    if side is Side.ALTERNATING and base:
        result['adjacent_boundary'] = format_rational(adjacent_boundary(program, base))
    child = cfg.integer('child')
    if child is not None:
        result['child_ratio'] = format_rational(child_ratio(program, base, child))
    max_child = cfg.integer('children')
    if max_child is not None:
        result['children'] = [box.to_dict() for box in children(program, base, side, max_child)]
    return result


def cmd_compare(cfg: RunConfig) -> dict:
    program = cfg.program()
    a = DigitSeq.build(program, _digits(cfg, 'a'), cfg.side)
    b = DigitSeq.build(program, _digits(cfg, 'b'), cfg.side)
    return {
        'side': cfg.side.value,
        'a': list(a.digits),
        'b': list(b.digits),
        'ordering': compare_digitwise(a, b).value,
        'divergence': first_divergence(a, b),
    }


def cmd_transport(cfg: RunConfig) -> dict:
    program = cfg.program()
    if cfg.get('base') is not None:
        positive, alternating = transport_cylinder(program, _digits(cfg, 'base'))
        return {'positive': positive.to_dict(), 'alternating': alternating.to_dict()}
    x = parse_rational(cfg.require('x'))
    return transport_point(program, x, cfg.integer('depth')).to_dict()


def cmd_measure_cover(cfg: RunConfig) -> dict:
    program = cfg.program()
    if cfg.get('lo') is not None or cfg.get('hi') is not None:
        lo = parse_rational(cfg.require('lo'))
        hi = parse_rational(cfg.require('hi'))
        return faithful_interval_cover(program, cfg.side, lo, hi, cfg.integer('depth')).to_dict()
    restriction = parse_digit_set(cfg.require('v'))
    return cover_measure_restricted(program, cfg.side, restriction, cfg.integer('depth'),
                                    cfg.get('method')).to_dict()


def cmd_membership(cfg: RunConfig) -> dict:
    program = cfg.program()
    x = parse_rational(cfg.require('x'))
    return is_membership(program, x, cfg.integer('probe_depth')).to_dict()


def cmd_digit_law(cfg: RunConfig):
    report = mc_digit_law(
        cfg.program(), cfg.side, cfg.integer('position'), cfg.integer('samples'),
        cfg.integer('bits'), cfg.seed, cfg.get('sampling'), cfg.integer('max_digit'),
        cfg.integer('threads'),
    )
    if cfg.get('format') == 'csv':
        frame = pd.DataFrame(report.table(), columns=['digit', 'empirical', 'exact', 'deviation'])
        return frame_to_csv(frame)
    return report.to_dict()


def cmd_stats(cfg: RunConfig):
    program = cfg.program()
    experiment = cfg.get('experiment')
    common = dict(samples=cfg.integer('samples'), seed=cfg.seed, mode=cfg.get('sampling'),
                  threads=cfg.integer('threads'))
    positions = parse_digit_set(cfg.get('positions'))

    if experiment == 'renyi':
        report = renyi_profile(program, cfg.side, cfg.integer('n'), bits=cfg.integer('bits'), **common)
        if cfg.get('format') == 'csv':
            return frame_to_csv(report.frame[['sample', 'seed_offset', 'n', 'p_n', 'log_p_n', 'score']])
        return report.to_dict()
    if experiment == 'frequency':
        report = digit_frequency(program, cfg.side, positions, bits=cfg.integer('bits'),
                                 max_digit=cfg.integer('max_digit'), **common)
        if cfg.get('format') == 'csv':
            return frame_to_csv(report.table())
        return report.to_dict()
    if experiment == 'all':
        if cfg.get('format') == 'csv':
            raise UsageError("stats --experiment all writes JSON only")
        runner = ExperimentRunner()
        runner.add_experiment(RenyiProfileExperiment(
            program, cfg.side, cfg.integer('n'), bits=cfg.integer('bits'), **common))
        runner.add_experiment(DigitFrequencyExperiment(
            program, cfg.side, positions, bits=cfg.integer('bits'),
            max_digit=cfg.integer('max_digit'), **common))
        results = runner.run_all()
        return {name: (value.to_dict() if not isinstance(value, Exception) else {'error': str(value)})
                for name, value in results.items()}
    raise UsageError(f"unknown experiment {experiment!r}; use renyi, frequency or all")


COMMANDS: Dict[str, Callable[[RunConfig], Any]] = {
    'families': cmd_families,
    'parse-phi': cmd_parse_phi,
    'expand': cmd_expand,
    'reconstruct': cmd_reconstruct,
    'cylinder': cmd_cylinder,
    'compare': cmd_compare,
    'transport': cmd_transport,
    'measure-cover': cmd_measure_cover,
    'membership': cmd_membership,
    'digit-law': cmd_digit_law,
    'stats': cmd_stats,
}

CSV_COMMANDS = ('digit-law', 'stats')


# ============================================================================
# PARSER
# ============================================================================
def build_parser() -> CommandParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='JSON file whose keys mirror the long options')
    common.add_argument('--seed', type=int, help='Run seed, echoed in the output (default 0)')
    common.add_argument('--format', choices=['json', 'csv'], help='Output format (default json)')
    common.add_argument('--out', help='Write the result to this file instead of stdout')

    program = argparse.ArgumentParser(add_help=False)
    program.add_argument('--family', help='Built-in family name (see `families`)')
    program.add_argument('--phi', help='phi_n rule in the expression language')
    program.add_argument('--phi0', type=int, help='phi_0 for --phi rules (default 1)')
    program.add_argument('--side', help="'alt' (default) or 'pos'")

    sampling = argparse.ArgumentParser(add_help=False)
    sampling.add_argument('--samples', type=int, help='Number of draws')
    sampling.add_argument('--bits', type=int, help='Random bits per draw')
    sampling.add_argument('--sampling', choices=['transport', 'direct'],
                          help='How alternating rows are drawn (default transport)')
    sampling.add_argument('--max-digit', type=int, help='Largest tabulated digit')
    sampling.add_argument('--threads', type=int, help='Worker processes (default 1)')

    parser = CommandParser(prog='perron', description=__doc__.splitlines()[0])
    subparsers = parser.add_subparsers(dest='command', required=True, parser_class=CommandParser)

    subparsers.add_parser('families', parents=[common], help='List built-in families')

    sub = subparsers.add_parser('parse-phi', parents=[common], help='Parse and pretty-print a phi rule')
    sub.add_argument('--phi')
    sub.add_argument('--phi0', type=int)

    sub = subparsers.add_parser('expand', parents=[common, program], help='Extract digits of a rational')
    sub.add_argument('--x', help="Rational 'num/den'")
    sub.add_argument('--depth', type=int)

    sub = subparsers.add_parser('reconstruct', parents=[common, program], help='Enclosure of a digit prefix')
    sub.add_argument('--digits', help='Comma-separated digits')

    sub = subparsers.add_parser('cylinder', parents=[common, program], help='Cylinder bounds and children')
    sub.add_argument('--base', help='Comma-separated digits (empty for rank 0)')
    sub.add_argument('--child', type=int, help='Report the child ratio of this index')
    sub.add_argument('--children', type=int, help='List children up to this index')

    sub = subparsers.add_parser('compare', parents=[common, program], help='Order two cylinders by digits')
    sub.add_argument('--a')
    sub.add_argument('--b')

    sub = subparsers.add_parser('transport', parents=[common, program], help='Enclose F_P(x) or map a cylinder')
    sub.add_argument('--x')
    sub.add_argument('--depth', type=int)
    sub.add_argument('--base')

    sub = subparsers.add_parser('measure-cover', parents=[common, program],
                                help='Measure of digit-restricted covers, or a faithful interval cover')
    sub.add_argument('--v', help="Allowed digits, e.g. '2,3' or '2-5'")
    sub.add_argument('--depth', type=int)
    sub.add_argument('--method', choices=['markov', 'enumeration'])
    sub.add_argument('--lo')
    sub.add_argument('--hi')

    sub = subparsers.add_parser('membership', parents=[common, program],
                                help='Probe whether x is a cylinder endpoint')
    sub.add_argument('--x')
    sub.add_argument('--probe-depth', type=int)

    sub = subparsers.add_parser('digit-law', parents=[common, program, sampling],
                                help='Monte-Carlo digit law against the exact law')
    sub.add_argument('--position', type=int)

    sub = subparsers.add_parser('stats', parents=[common, program, sampling],
                                help='Renyi profile and digit-frequency experiments')
    sub.add_argument('--experiment', choices=['renyi', 'frequency', 'all'])
    sub.add_argument('--n', type=int, help='Depth of the Renyi profile')
    sub.add_argument('--positions', help="Positions, e.g. '1-8'")

    return parser


def run(argv: Optional[List[str]] = None) -> int:
    """Parse ``argv``, run one subcommand and write its result. Returns the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = build_run_config(args)
        if cfg.get('format') == 'csv' and cfg.command not in CSV_COMMANDS:
            raise UsageError(f"{cfg.command} writes JSON only")
        logger.info(f"Running {cfg.command} (seed={cfg.seed})")
        result = COMMANDS[cfg.command](cfg)
        if isinstance(result, str):
            text = result
        else:
            program = None
            if cfg.command not in ('families', 'parse-phi'):
                program = cfg.program().to_dict()
            text = dump_json({'command': cfg.command, 'program': program,
                              'seed': cfg.seed, 'result': result})
        write_output(text, cfg.get('out'))
        return 0
    except SystemExit as e:
        # --help
        return e.code if isinstance(e.code, int) else 0
    except UsageError as e:
        if e.usage:
            print(e.usage, end='', file=sys.stderr)
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except PerronException as e:
        logger.error(f"Application error: {e}")
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except Exception as e:
        logger.exception(f"Unexpected error: {e}")
        print(f"error: {e}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
