# cli.py - command-line front end
"""
relaycap command line.

    python cli.py eval   --scheme zf --n 4 --m 2 --rho1-db 10 --rhoi-db 0 --method analytic
    python cli.py sweep  --scheme mrc,zf,mmse --n 4 --m 2 --rho1-db 0:30:5 --method mc,analytic
    python cli.py figure 6 --samples 10000
    python cli.py selftest

Exit codes: 0 success, 2 invalid configuration, 3 numeric failure.
Values on the command line are in dB; everything below this module works
with linear ratios.
"""
import argparse
import csv
import io
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from pydantic import ValidationError

import analytic
import mc
from config import settings
from errors import ConfigurationError, RelayCapacityError
from models import CSV_COLUMNS, METHOD_CHOICES, CapacityRow, Method, Scheme, SweepPoint, SweepSpec
from specfun import identity_checks
from utils import atomic_write_text, format_number, linear_to_db, parse_db_list, parse_db_range

logger = logging.getLogger(__name__)

# Built-in defaults; a --config file overrides them and flags override both
DEFAULTS: Dict[str, object] = {
    "scheme": "mrc",
    "n": 4,
    "m": None,
    "rho1_db": "10",
    "rho2_db": None,
    "rhoi_db": None,
    "method": "mc",
    "samples": settings.MC_SAMPLES,
    "seed": settings.MC_SEED,
    "threads": settings.MC_THREADS,
    "output": None,
}

_INTEGER_KEYS = {"n", "m", "samples", "seed", "threads"}


# ============================================
# Config files
# ============================================

def read_config_file(path: Path) -> Dict[str, object]:
    """Parse a `key = value` file; blank lines and # comments are skipped"""
    values: Dict[str, object] = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config file {path}: {exc}")

    for number, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{path}:{number}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in DEFAULTS:
            raise ConfigurationError(f"{path}:{number}: unknown key {key!r}")
        try:
            values[key] = int(value) if key in _INTEGER_KEYS else value
        except ValueError:
            raise ConfigurationError(f"{path}:{number}: {key} must be an integer")
    return values


def resolve_options(args: argparse.Namespace) -> Dict[str, object]:
    """Merge built-in defaults, the config file and explicit flags"""
    file_values = read_config_file(args.config) if getattr(args, "config", None) else {}
    options = {}
    for key, default in DEFAULTS.items():
        flag = getattr(args, key, None)
        options[key] = flag if flag is not None else file_values.get(key, default)
    return options


# ============================================
# Option parsing
# ============================================

def _split(text: str) -> List[str]:
    return [item.strip() for item in str(text).split(",") if item.strip()]


def _schemes(text: str) -> List[Scheme]:
    try:
        return [Scheme(item) for item in _split(text)]
    except ValueError:
        raise ConfigurationError(f"unknown scheme in {text!r}; choose from {', '.join(s.value for s in Scheme)}")


def _methods(text: str) -> List[str]:
    methods = _split(text)
    unknown = [item for item in methods if item not in METHOD_CHOICES]
    if unknown or not methods:
        raise ConfigurationError(f"unknown method in {text!r}; choose from {', '.join(METHOD_CHOICES)}")
    return methods


def _interference(options: Dict[str, object]) -> Tuple[int, List[float]]:
    """
    Interferer count and INRs in dB. A single INR with --m K is replicated
    K times; without --m the count is the list length; with --m and no list
    every interferer sits at 0 dB.
    """
    m = options["m"]
    text = options["rhoi_db"]
    values = parse_db_list(text) if text not in (None, "") else []

    if m is None:
        return len(values), values
    m = int(m)
    if not values:
        return m, [0.0] * m
    if len(values) == 1:
        return m, values * m
    if len(values) != m:
        raise ConfigurationError(f"--m {m} does not match {len(values)} INR values")
    return m, values


def build_sweep(options: Dict[str, object]) -> SweepSpec:
    m, rhoi_db = _interference(options)
    rho2 = options["rho2_db"]
    return SweepSpec.from_range(
        str(options["rho1_db"]),
        schemes=_schemes(options["scheme"]),
        n=int(options["n"]),
        m=m,
        rho2_db=None if rho2 in (None, "") else float(rho2),
        rhoi_db=rhoi_db,
        methods=_methods(options["method"]),
        samples=int(options["samples"]),
        seed=int(options["seed"]),
        threads=int(options["threads"]),
        output=options["output"],
    )


# ============================================
# Row evaluation
# ============================================

def evaluate_point(point: SweepPoint, samples: int, seed: int, threads: int = 1) -> List[CapacityRow]:
    """All CSV rows for one operating point and method choice"""
    config = point.config()
    if point.method == "mc":
        estimate = mc.estimate_capacity(point.scheme, config, samples=samples, seed=seed, threads=threads)
        return [CapacityRow(
            point=point,
            method=estimate.method,
            capacity_bits=estimate.value,
            stderr=estimate.stderr,
            samples=estimate.samples,
            seed=estimate.seed,
        )]

    return [
        CapacityRow(point=point, method=result.method, capacity_bits=result.value, stderr=result.error)
        for result in analytic.evaluate(point.scheme, point.method, config)
    ]


def evaluate_points(points: Sequence[SweepPoint], samples: int, seed: int, threads: int) -> List[CapacityRow]:
    """Evaluate in parallel over points; rows come back in point order"""
    if threads <= 1 or len(points) <= 1:
        batches = [evaluate_point(point, samples, seed, threads) for point in points]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            batches = list(pool.map(lambda point: evaluate_point(point, samples, seed), points))
    return [row for batch in batches for row in batch]


def render_csv(rows: Sequence[CapacityRow]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow(row.cells())
    return buffer.getvalue()


def emit(rows: Sequence[CapacityRow], output: Optional[str]) -> None:
    text = render_csv(rows)
    if output:
        path = atomic_write_text(Path(output), text)
        logger.info(f"Wrote {len(rows)} rows to {path}")
    else:
        sys.stdout.write(text)


# ============================================
# Figure presets
# ============================================

_SNR_SWEEP = parse_db_range("0:30:5")


def _points(schemes, methods, n, m, rhoi_db, rho1_values, rho2_db=None) -> List[SweepPoint]:
    return [
        SweepPoint(
            scheme=scheme,
            method=method,
            n=n,
            m=m,
            rho1_db=rho1_db,
            rho2_db=rho1_db if rho2_db is None else rho2_db,
            rhoi_db=tuple(rhoi_db),
        )
        for scheme in schemes
        for method in methods(scheme)
        for rho1_db in rho1_values
    ]


def _curve_methods(scheme: Scheme) -> List[str]:
    """MC plus the exact curve, or MC plus both bounds"""
    if scheme in (Scheme.ZF, Scheme.IDEAL):
        return ["mc", "analytic"]
    return ["mc", "upper", "lower"]


def _mc_only(scheme: Scheme) -> List[str]:
    return ["mc"]


def _largen_only(scheme: Scheme) -> List[str]:
    return ["largen"]


def _figure_2() -> List[SweepPoint]:
    points = []
    for n, m in ((2, 1), (4, 1), (4, 2)):
        points += _points([Scheme.MRC], _curve_methods, n, m, [0.0] * m, _SNR_SWEEP)
    return points


def _figure_3() -> List[SweepPoint]:
    points = []
    for n, m in ((2, 1), (4, 2), (6, 4), (4, 1)):
        points += _points([Scheme.ZF], _curve_methods, n, m, [0.0] * m, _SNR_SWEEP)
    return points


def _figure_4() -> List[SweepPoint]:
    points = []
    for n, m in ((2, 1), (4, 1), (4, 2)):
        points += _points([Scheme.MMSE], _curve_methods, n, m, [0.0] * m, _SNR_SWEEP)
    return points


def unequal_split(total: float, weights: Sequence[float]) -> List[float]:
    """Per-interferer INRs in dB splitting a fixed linear total INR by the given weights"""
    scale = sum(weights)
    return [round(linear_to_db(total * w / scale), 10) for w in weights]


def _figure_5() -> List[SweepPoint]:
    equal = [0.0] * 3
    unequal = unequal_split(3.0, (8.0, 1.0, 1.0))
    points = []
    for n in (3, 4):
        points += _points([Scheme.MMSE], _curve_methods, n, 3, equal, _SNR_SWEEP)
        points += _points([Scheme.MMSE], _mc_only, n, 3, unequal, _SNR_SWEEP)
    return points


def _figure_6() -> List[SweepPoint]:
    points = []
    for rhoi_db in (0.0, 10.0):
        points += _points([Scheme.MRC, Scheme.ZF, Scheme.MMSE], _curve_methods, 4, 2, [rhoi_db] * 2, _SNR_SWEEP)
    return points


def _figure_7() -> List[SweepPoint]:
    points = []
    for scheme in (Scheme.MRC, Scheme.ZF, Scheme.MMSE):
        for n in range(6, 31, 2):
            points += _points([scheme], _mc_only, n, 5, [0.0] * 5, [10.0])
    for n in range(6, 31, 2):
        points += _points([Scheme.IDEAL], _largen_only, n, 5, [0.0] * 5, [10.0])
    return points


def _figure_8() -> List[SweepPoint]:
    rho1_values = parse_db_range("0:40:5")
    return _points([Scheme.MRC, Scheme.ZF, Scheme.MMSE], _mc_only, 4, 2, [0.0] * 2, rho1_values, rho2_db=10.0)


FIGURES: Dict[int, Tuple[str, Callable[[], List[SweepPoint]], str]] = {
    2: ("MRC/MRT capacity and bounds", _figure_2, "rho1"),
    3: ("ZF/MRT exact capacity", _figure_3, "rho1"),
    4: ("MMSE/MRT capacity and bounds", _figure_4, "rho1"),
    5: ("MMSE/MRT with equal and unequal interferer powers", _figure_5, "rho1"),
    6: ("Scheme comparison at two interference levels", _figure_6, "rho1"),
    7: ("Large-N regime", _figure_7, "n"),
    8: ("Ceiling effect with fixed rho2 = 10 dB", _figure_8, "rho1"),
}


def _curve_key(row: CapacityRow, axis: str) -> tuple:
    point = row.point
    key = (point.scheme.value, row.method.value, point.m, point.rho2_db, point.rhoi_db)
    return key if axis == "n" else key + (point.n,)


def plot_script(figure: int, rows: Sequence[CapacityRow], csv_name: str, extra: Sequence[str] = ()) -> str:
    """gnuplot commands drawing one curve per contiguous row block"""
    title, _, axis = FIGURES[figure]
    x_column, x_label = (3, "N") if axis == "n" else (5, "rho1 (dB)")

    curves = []
    start = 0
    for index in range(1, len(rows) + 1):
        if index == len(rows) or _curve_key(rows[index], axis) != _curve_key(rows[start], axis):
            row = rows[start]
            label = f"{row.point.scheme.value} {row.method.value} N={row.point.n} M={row.point.m}"
            if row.point.rhoi_db:
                label += f" rhoI={';'.join(format_number(v) for v in row.point.rhoi_db)} dB"
            if axis == "n":
                label = f"{row.point.scheme.value} {row.method.value} M={row.point.m}"
            style = "points" if row.method == Method.MC else "lines"
            curves.append(
                f"'{csv_name}' skip 1 every ::{start}::{index - 1} using {x_column}:8 with {style} title \"{label}\""
            )
            start = index

    lines = [
        f"# Figure {figure}: {title}",
        'set datafile separator ","',
        f'set xlabel "{x_label}"',
        'set ylabel "Ergodic capacity (bits/s/Hz)"',
        "set key left top",
        "set grid",
    ]
    lines += list(extra)
    lines.append("plot " + ", \\\n     ".join(curves))
    return "\n".join(lines) + "\n"


# ============================================
# Commands
# ============================================

def cmd_eval(args: argparse.Namespace) -> int:
    options = resolve_options(args)
    if len(parse_db_range(str(options["rho1_db"]))) != 1:
        raise ConfigurationError("eval takes a single --rho1-db value; use sweep for ranges")
    spec = build_sweep(options)
    rows = evaluate_points(spec.points(), spec.samples, spec.seed, spec.threads)
    emit(rows, options["output"])
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    spec = build_sweep(resolve_options(args))
    points = spec.points()
    logger.info(f"Sweep: {len(points)} points, {spec.samples} samples, seed {spec.seed}")
    rows = evaluate_points(points, spec.samples, spec.seed, spec.threads)
    emit(rows, str(spec.output) if spec.output else None)
    return 0


def cmd_figure(args: argparse.Namespace) -> int:
    if args.figure not in FIGURES:
        raise ConfigurationError(f"figure must be one of {sorted(FIGURES)}, got {args.figure}")
    options = resolve_options(args)
    title, build, _ = FIGURES[args.figure]
    samples, seed, threads = int(options["samples"]), int(options["seed"]), int(options["threads"])
    if samples < settings.MC_MIN_SAMPLES:
        raise ConfigurationError(f"at least {settings.MC_MIN_SAMPLES} samples are required, got {samples}")

    points = build()
    logger.info(f"Figure {args.figure} ({title}): {len(points)} points, {samples} samples")
    rows = evaluate_points(points, samples, seed, threads)

    output = Path(options["output"]) if options["output"] else settings.results_dir / f"figure{args.figure}.csv"
    extra = []
    if args.figure == 8:
        ceiling = analytic.ceiling_capacity(points[0].config())
        extra.append(f"ceiling = {format_number(ceiling)}")
        extra.append('set arrow from graph 0, first ceiling to graph 1, first ceiling nohead dashtype 2')

    csv_path = atomic_write_text(output, render_csv(rows))
    script_path = atomic_write_text(output.with_suffix(".gp"), plot_script(args.figure, rows, csv_path.name, extra))
    sys.stdout.write(f"{csv_path}\n{script_path}\n")
    return 0


def cmd_selftest(args: argparse.Namespace) -> int:
    records = identity_checks() + analytic.calibrate_bivariate(full=not args.quick)
    for record in records:
        status = "PASS" if record.passed else "FAIL"
        sys.stdout.write(f"{status} {record.name}: rel. error {record.rel_error:.2e} (tol {record.tolerance:.0e})\n")
    failed = sum(not record.passed for record in records)
    sys.stdout.write(f"{len(records) - failed}/{len(records)} checks passed\n")
    return 0 if failed == 0 else 3


# ============================================
# Parser
# ============================================

def _add_point_flags(parser: argparse.ArgumentParser, rho1_help: str) -> None:
    parser.add_argument("--scheme", help="comma list of mrc, zf, mmse, ideal")
    parser.add_argument("--n", type=int, help="relay antennas")
    parser.add_argument("--m", type=int, help="interferers")
    parser.add_argument("--rho1-db", dest="rho1_db", help=rho1_help)
    parser.add_argument("--rho2-db", dest="rho2_db", help="second-hop SNR in dB (default: equal to rho1)")
    parser.add_argument("--rhoi-db", dest="rhoi_db", help="comma list of interferer INRs in dB")
    parser.add_argument("--method", help=f"comma list of {', '.join(METHOD_CHOICES)}")


def _add_run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--samples", type=int, help="Monte Carlo samples")
    parser.add_argument("--seed", type=int, help="random seed")
    parser.add_argument("--threads", type=int, help="worker threads")
    parser.add_argument("--output", help="CSV output path")
    parser.add_argument("--config", help="key = value file; flags override it")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="relaycap", description="Ergodic capacity of a multi-antenna AF relay with co-channel interference")
    parser.add_argument("--log-level", default=settings.LOG_LEVEL, help="logging level (default: %(default)s)")
    commands = parser.add_subparsers(dest="command", required=True)

    eval_parser = commands.add_parser("eval", help="evaluate one operating point")
    _add_point_flags(eval_parser, "first-hop SNR in dB")
    _add_run_flags(eval_parser)
    eval_parser.set_defaults(handler=cmd_eval)

    sweep_parser = commands.add_parser("sweep", help="sweep the first-hop SNR")
    _add_point_flags(sweep_parser, "first-hop SNR sweep start:stop:step in dB")
    _add_run_flags(sweep_parser)
    sweep_parser.set_defaults(handler=cmd_sweep)

    figure_parser = commands.add_parser("figure", help="reproduce a figure setup (CSV plus gnuplot script)")
    figure_parser.add_argument("figure", type=int, help=f"figure id ({min(FIGURES)}..{max(FIGURES)})")
    _add_run_flags(figure_parser)
    figure_parser.set_defaults(handler=cmd_figure)

    selftest_parser = commands.add_parser("selftest", help="run the identity and calibration suites")
    selftest_parser.add_argument("--quick", action="store_true", help="one calibration case per kind")
    selftest_parser.set_defaults(handler=cmd_selftest)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.WARNING), stream=sys.stderr)

    try:
        return args.handler(args)
    except ValidationError as exc:
        logger.error(f"Invalid configuration: {exc}")
        sys.stderr.write(f"error: invalid configuration: {exc}\n")
        return ConfigurationError.exit_code
    except RelayCapacityError as exc:
        logger.error(f"{type(exc).__name__}: {exc}")
        sys.stderr.write(f"error: {exc}\n")
        return exc.exit_code
    except ValueError as exc:
        logger.error(f"Invalid value: {exc}")
        sys.stderr.write(f"error: {exc}\n")
        return ConfigurationError.exit_code


if __name__ == "__main__":
    sys.exit(main())
