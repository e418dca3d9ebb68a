"""Command line front end for fitting, querying, and sampling tent densities.

Subcommands: ``fit``, ``density``, ``loglik``, ``sample``, ``partition``,
``oracle-fit``. Data goes to the output stream, error text to the
diagnostic stream, and failures map to distinct exit codes: 1 for parse
problems, 2 for degenerate geometry, 3 for an exhausted restart budget,
4 for unsupported dimension, 5 for other numerical failures, 64 for
usage errors. All randomness flows from one --seed through named
sub-streams so fit, sample, and partition are independently reproducible.
"""

import argparse
import dataclasses
import json
import math
import sys

import numpy as np

from .errors import (
    DegenerateChord,
    DegenerateGeometry,
    ParseError,
    TentMLEError,
    UnsupportedDimension,
)
from .fit import FitConfig, fit_with_restarts, normalize, oracle_fit, sgd_fit
from .model_io import model_to_document, read_model
from .partition import log_partition_sliced
from .sampling import (
    default_chain_steps,
    line_tent_1d,
    round_to_isotropic,
    sample_chain,
    sample_line_tent,
)
from .tent import PointSet, tent_eval

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_DEGENERATE = 2
EXIT_BUDGET = 3
EXIT_DIMENSION = 4
EXIT_NUMERIC = 5
EXIT_USAGE = 64

# Sub-stream indices hanging off the user seed, one per random surface.
_STREAMS = {"fit": 0, "sample": 1, "partition": 2}


def _stream_rng(seed, name: str) -> np.random.Generator:
    if seed is None:
        return np.random.default_rng()
    return np.random.default_rng(
        np.random.SeedSequence(seed, spawn_key=(_STREAMS[name],))
    )


class _Parser(argparse.ArgumentParser):
    """Argument parser whose usage failures exit with code 64."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _unsigned(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be a non-negative integer")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0.0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def _epsilon_value(text: str) -> float:
    value = float(text)
    if not 0.0 < value <= 0.1:
        raise argparse.ArgumentTypeError("must lie in (0, 0.1]")
    return value


def _round_target(text: str) -> float:
    value = float(text)
    if not value > 1.0:
        raise argparse.ArgumentTypeError("must exceed 1")
    return value


def load_points_csv(path: str) -> np.ndarray:
    """Read an n-by-d numeric CSV, auto-detecting one optional header row.

    Raises :class:`ParseError` naming the 1-based row and column of the
    first offending cell; blank rows and ragged rows are offenses too.
    """
    try:
        with open(path, "r", encoding="utf-8") as handle:
            lines = handle.read().splitlines()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc

    rows = []
    expected = None
    start = 0
    if lines:
        cells = lines[0].split(",")
        try:
            [float(cell) for cell in cells]
        except ValueError:
            expected = len(cells)
            start = 1
    for index in range(start, len(lines)):
        row_number = index + 1
        line = lines[index]
        if line.strip() == "":
            if index == len(lines) - 1:
                continue
            raise ParseError(
                f"empty row {row_number}", row=row_number, column=1
            )
        cells = line.split(",")
        if expected is None:
            expected = len(cells)
        if len(cells) != expected:
            raise ParseError(
                f"row {row_number} has {len(cells)} columns, expected {expected}",
                row=row_number,
                column=min(len(cells), expected) + 1,
            )
        values = []
        for position, cell in enumerate(cells, start=1):
            try:
                values.append(float(cell))
            except ValueError:
                raise ParseError(
                    f"non-numeric value {cell.strip()!r} at "
                    f"row {row_number} column {position}",
                    row=row_number,
                    column=position,
                ) from None
        rows.append(values)
    if not rows:
        raise ParseError(f"no data rows in {path}")
    return np.array(rows, dtype=float)


def _parse_point(text: str, dim: int) -> np.ndarray:
    cells = text.split(",")
    if len(cells) != dim:
        raise ParseError(f"--at needs {dim} comma-separated coordinates")
    try:
        return np.array([float(cell) for cell in cells])
    except ValueError as exc:
        raise ParseError(f"non-numeric coordinate in --at: {exc}") from exc


def _emit(text: str, output) -> None:
    if output is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(output, "w", encoding="utf-8") as handle:
            handle.write(text)
            if not text.endswith("\n"):
                handle.write("\n")


def _write_trace(path: str, trace) -> None:
    lines = ["iter\teta\tgrad_norm\theight_sum"]
    for step, eta, grad_norm, height_sum in trace:
        lines.append(f"{step}\t{eta!r}\t{grad_norm!r}\t{height_sum!r}")
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("\n".join(lines))
        handle.write("\n")


def _trace_path(args) -> str | None:
    if args.trace is not None:
        return args.trace
    if args.output is None:
        return None
    base = args.output
    if base.endswith(".json"):
        base = base[: -len(".json")]
    return base + ".trace.tsv"


def cmd_fit(args) -> int:
    points = PointSet.from_rows(load_points_csv(args.data))
    config = FitConfig(
        iterations=args.iterations,
        step_constant=args.step_constant,
        seed=args.seed,
        chain_steps=args.chain_steps,
        round_target_C=args.round_target,
        restart=args.restarts is not None,
        radius_clip=args.radius_clip,
        epsilon=args.epsilon,
        strict_tv=args.strict_tv,
        wall_cap=args.wall_cap,
    )
    rng = _stream_rng(args.seed, "fit")
    if args.restarts is not None:
        report = fit_with_restarts(rng, points, config, target_gap=args.restarts)
    else:
        report = sgd_fit(rng, points, config)
    model = normalize(report.model)
    document = model_to_document(
        model, seed=args.seed, config=dataclasses.asdict(config)
    )
    _emit(json.dumps(document, indent=2), args.output)
    trace_path = _trace_path(args)
    if trace_path is not None:
        _write_trace(trace_path, report.trace)
    return EXIT_BUDGET if report.budget_exhausted else EXIT_OK


def cmd_oracle_fit(args) -> int:
    points = PointSet.from_rows(load_points_csv(args.data))
    model = oracle_fit(points)
    document = model_to_document(model, seed=args.seed, config=None)
    _emit(json.dumps(document, indent=2), args.output)
    return EXIT_OK


def cmd_density(args) -> int:
    model = read_model(args.model)
    x = _parse_point(args.at, model.point_set.dim)
    height = tent_eval(model.point_set, model.heights, x)
    value = 0.0 if height == -math.inf else math.exp(height - model.log_partition)
    if args.format == "json":
        _emit(json.dumps({"density": value}), args.output)
    else:
        _emit(repr(value), args.output)
    return EXIT_OK


def cmd_loglik(args) -> int:
    model = read_model(args.model)
    rows = load_points_csv(args.data)
    if rows.shape[1] != model.point_set.dim:
        raise ParseError(
            f"data has {rows.shape[1]} columns, "
            f"model expects {model.point_set.dim}"
        )
    total = 0.0
    for row in rows:
        height = tent_eval(model.point_set, model.heights, row)
        if height == -math.inf:
            total = -math.inf
            break
        total += height - model.log_partition
    if args.format == "json":
        _emit(json.dumps({"log_likelihood": total}), args.output)
    else:
        _emit(repr(total), args.output)
    return EXIT_OK


def cmd_sample(args) -> int:
    model = read_model(args.model)
    ps = model.point_set
    rng = _stream_rng(args.seed, "sample")
    if ps.dim == 1:
        draws = np.asarray(
            sample_line_tent(rng, line_tent_1d(ps, model.heights), size=args.count)
        ).reshape(-1, 1)
    else:
        amap = round_to_isotropic(rng, ps, model.heights, 2.0)
        draws = sample_chain(
            rng,
            ps,
            model.heights,
            amap,
            count=args.count,
            burn_in=default_chain_steps(ps.count, ps.dim),
            thin=ps.dim,
        )
    if args.format == "json":
        _emit(
            json.dumps({"samples": [[float(v) for v in row] for row in draws]}),
            args.output,
        )
    else:
        lines = [",".join(repr(float(v)) for v in row) for row in draws]
        _emit("\n".join(lines), args.output)
    return EXIT_OK


def cmd_partition(args) -> int:
    model = read_model(args.model)
    rng = _stream_rng(args.seed, "partition")
    estimate = log_partition_sliced(
        rng, model.point_set, model.heights, args.epsilon
    )
    if args.format == "json":
        _emit(
            json.dumps(
                {
                    "log_partition": estimate.log_partition,
                    "additive_error": estimate.additive_error,
                    "slice_count": estimate.slice_count,
                    "truncation_depth": estimate.truncation_depth,
                }
            ),
            args.output,
        )
    else:
        _emit(
            f"{estimate.log_partition!r} ± {estimate.additive_error!r}",
            args.output,
        )
    return EXIT_OK


def _add_common_flags(parser) -> None:
    parser.add_argument("--seed", type=_unsigned, default=None, help="rng seed")
    parser.add_argument("--output", default=None, help="write data here instead of stdout")
    parser.add_argument(
        "--format", choices=("json", "csv"), default="csv", help="output encoding"
    )


def _build_parser() -> _Parser:
    parser = _Parser(prog="tentmle", description=__doc__.splitlines()[0])
    commands = parser.add_subparsers(dest="command", required=True)

    fit = commands.add_parser("fit", help="fit a tent density to CSV points")
    fit.add_argument("data", help="CSV of points, one row per point")
    _add_common_flags(fit)
    fit.add_argument("--trace", default=None, help="trace TSV path")
    fit.add_argument("--iterations", type=_positive_int, default=1000)
    fit.add_argument("--step-constant", type=_positive_float, default=1.0)
    fit.add_argument("--chain-steps", type=_positive_int, default=None)
    fit.add_argument("--round-target", type=_round_target, default=2.0)
    fit.add_argument("--epsilon", type=_epsilon_value, default=0.1)
    fit.add_argument("--radius-clip", type=_positive_float, default=None)
    fit.add_argument(
        "--restarts",
        type=_positive_float,
        default=None,
        metavar="GAP",
        help="restart with doubled budgets until this expected gap is certified",
    )
    fit.add_argument("--strict-tv", action="store_true")
    fit.add_argument(
        "--wall-cap",
        type=_positive_float,
        default=None,
        metavar="SECONDS",
        help="give up restarting after this much wall time",
    )
    fit.set_defaults(func=cmd_fit)

    oracle = commands.add_parser(
        "oracle-fit", help="exact small-instance fit by quadrature"
    )
    oracle.add_argument("data", help="CSV of points, one row per point")
    _add_common_flags(oracle)
    oracle.set_defaults(func=cmd_oracle_fit)

    density = commands.add_parser("density", help="density value at a point")
    density.add_argument("model", help="model JSON path")
    density.add_argument("--at", required=True, help="comma-separated coordinates")
    _add_common_flags(density)
    density.set_defaults(func=cmd_density)

    loglik = commands.add_parser("loglik", help="log likelihood of CSV points")
    loglik.add_argument("model", help="model JSON path")
    loglik.add_argument("data", help="CSV of points, one row per point")
    _add_common_flags(loglik)
    loglik.set_defaults(func=cmd_loglik)

    sample = commands.add_parser("sample", help="draw points from a model")
    sample.add_argument("model", help="model JSON path")
    sample.add_argument("--count", type=_positive_int, default=1)
    _add_common_flags(sample)
    sample.set_defaults(func=cmd_sample)

    partition = commands.add_parser(
        "partition", help="estimate the log normalizing constant"
    )
    partition.add_argument("model", help="model JSON path")
    partition.add_argument("--epsilon", type=_epsilon_value, default=0.1)
    _add_common_flags(partition)
    partition.set_defaults(func=cmd_partition)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"tentmle: error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (DegenerateGeometry, DegenerateChord) as exc:
        print(f"tentmle: degenerate geometry: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except UnsupportedDimension as exc:
        print(f"tentmle: unsupported dimension: {exc}", file=sys.stderr)
        return EXIT_DIMENSION
    except TentMLEError as exc:
        print(f"tentmle: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
