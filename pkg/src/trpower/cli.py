"""Command line front end: curve CSVs, the antenna-count sweep and moment checks.

Exit codes: 0 success, 1 usage error, 2 failed verification (``--strict``),
3 numeric or resource failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .analytic import (
    GammaParams,
    Relation,
    Tail,
    dtr_rx_variance_printed,
    gamma_ccdf,
    gamma_cdf,
    reference_params,
    table1_moments,
)
from .channel import ChannelDims
from .errors import InsufficientSamplesError, NumericalError, SampleBudgetError
from .montecarlo import (
    EmpiricalDistribution,
    SimConfig,
    default_m_values,
    empirical_tail_quantile,
    ks_distance,
    run_ensemble,
    scaling_sweep,
)
from .powers import Measure, to_decibel
from .precoder import NormalizationKind

EXIT_OK, EXIT_USAGE, EXIT_VERIFY, EXIT_NUMERIC = 0, 1, 2, 3

# CCDF for transmit powers, CDF for received power
CURVE_TAILS = {Measure.ANT: Tail.UPPER, Measure.BS: Tail.UPPER, Measure.RX: Tail.LOWER}

# 1% critical value of the asymptotic Kolmogorov distribution
KS_CRITICAL_1PCT = 1.6276

N_STD_ERRORS = 5.0
EXACT_TOL = 1e-12


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def fmt(value: float) -> str:
    """Fixed 10 significant digits, locale independent."""
    return format(float(value), ".10g")


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


# -- argument types ---------------------------------------------------------------

def positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def seed_int(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be a non-negative 64-bit integer")
    return value


def probability(text: str) -> float:
    value = float(text)
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"probability must be in (0, 1), got {text}")
    return value


def kind_list(text: str) -> tuple:
    try:
        kinds = tuple(NormalizationKind.parse(t) for t in text.split(",") if t.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    if not kinds:
        raise argparse.ArgumentTypeError("no normalization kinds given")
    return kinds


def int_list(text: str) -> list:
    return [positive_int(t) for t in text.split(",") if t.strip()]


# -- simulate -----------------------------------------------------------------------

def curve_rows(dist: EmpiricalDistribution, levels: np.ndarray, tail: Tail):
    """(x_db, probability) pairs ordered by increasing x."""
    points = [(to_decibel(empirical_tail_quantile(dist, p, tail)), p) for p in levels]
    if tail is Tail.UPPER:
        points.sort(key=lambda r: (r[0], -r[1]))
    else:
        points.sort()
    return points


def reference_rows(params: GammaParams, x_db: np.ndarray, tail: Tail):
    x = 10.0 ** (x_db / 10.0)
    prob = gamma_ccdf(params, x) if tail is Tail.UPPER else gamma_cdf(params, x)
    keep = (prob > 0.0) & (prob <= 1.0)
    return list(zip(x_db[keep], prob[keep]))


def cmd_simulate(args) -> int:
    dims = ChannelDims(args.antennas, args.taps)
    cfg = SimConfig(dims, args.realizations, args.seed, args.kinds)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    levels = np.geomspace(1.0, args.min_probability, args.points)

    samples = run_ensemble(cfg, workers=args.workers)
    stem = f"m{dims.M}_n{dims.N}"
    written = []
    abscissae = {measure: [] for measure in Measure}
    for kind in cfg.kinds:
        for measure, tail in CURVE_TAILS.items():
            rows = curve_rows(EmpiricalDistribution(samples[kind][measure]), levels, tail)
            abscissae[measure].extend(r[0] for r in rows)
            path = out_dir / f"p_{measure.value}_{stem}_{kind.value}.csv"
            write_csv(path, ["x_db", "probability"], [(fmt(x), fmt(p)) for x, p in rows])
            written.append(path)

    references = [
        (Measure.ANT, "gamma", GammaParams.unit_mean(dims.N)),
        (Measure.BS, "gamma", GammaParams.unit_mean(dims.M * dims.N)),
        (Measure.RX, "gamma", GammaParams.unit_mean(dims.M * dims.N)),
        (Measure.RX, "gamma_sq", GammaParams.unit_mean(dims.M * dims.N, squared=True)),
    ]
    for measure, label, params in references:
        x_db = np.unique(np.asarray(abscissae[measure]))
        rows = reference_rows(params, x_db, CURVE_TAILS[measure])
        path = out_dir / f"p_{measure.value}_{stem}_{label}.csv"
        write_csv(path, ["x_db", "probability"], [(fmt(x), fmt(p)) for x, p in rows])
        written.append(path)

    for path in written:
        print(path)
    return EXIT_OK


# -- sweep --------------------------------------------------------------------------

def cmd_sweep(args) -> int:
    base = SimConfig(ChannelDims(1, args.taps), args.realizations, args.seed, args.kinds)
    rows = scaling_sweep(base, args.m_list, args.probability, workers=args.workers)
    header = ["m", "kind", "measure", "quantile_db"]
    body = [(r.m, r.kind.value, r.measure.value, fmt(r.quantile_db)) for r in rows]
    if args.out:
        write_csv(args.out, header, body)
        print(args.out)
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(body)
        sys.stdout.write(buf.getvalue())
    return EXIT_OK


# -- verify ---------------------------------------------------------------------------

@dataclass
class CheckRow:
    kind: str
    measure: str
    statistic: str
    relation: str
    expected: float
    observed: float
    std_error: float
    status: str

    @property
    def failed(self) -> bool:
        return self.status == "FAIL"


def sample_moments(x: np.ndarray):
    """Mean, variance and their large-sample standard errors."""
    n = x.size
    mean = float(x.mean())
    centered = x - mean
    m2 = float(np.mean(centered**2))
    m4 = float(np.mean(centered**4))
    var = m2 * n / (n - 1) if n > 1 else 0.0
    se_mean = math.sqrt(var / n)
    se_var = math.sqrt(max(m4 - m2 * m2, 0.0) / n)
    return mean, var, se_mean, se_var


def judge(moment, observed: float, se: float) -> str:
    if moment.deterministic:
        return "PASS" if abs(observed - moment.value) <= EXACT_TOL else "FAIL"
    slack = N_STD_ERRORS * se
    if moment.relation is Relation.EQ:
        ok = abs(observed - moment.value) <= slack
    elif moment.relation is Relation.LE:
        ok = observed <= moment.value + slack
    else:
        ok = observed >= moment.value - slack
    return "PASS" if ok else "FAIL"


def verification_rows(samples, dims: ChannelDims) -> list:
    rows = []
    for kind in samples.config.kinds:
        for measure in Measure:
            x = samples[kind][measure]
            spec = table1_moments(kind, measure, dims.M, dims.N)
            mean, var, se_mean, se_var = sample_moments(x)
            for stat, moment, obs, se in (
                ("mean", spec.mean, mean, se_mean),
                ("variance", spec.variance, var, se_var),
            ):
                rows.append(CheckRow(kind.value, measure.value, stat, moment.relation.value,
                                     moment.value, obs, se, judge(moment, obs, se)))
            if kind is NormalizationKind.DTR and measure is Measure.RX:
                printed = dtr_rx_variance_printed(dims.M, dims.N)
                consistent = abs(var - printed) <= N_STD_ERRORS * se_var
                rows.append(CheckRow(kind.value, measure.value, "variance_printed_form", "==",
                                     printed, var, se_var,
                                     "consistent" if consistent else "rejected"))
            params = reference_params(kind, measure, dims)
            if params is not None:
                dist = EmpiricalDistribution(x)
                d = ks_distance(dist, lambda s: gamma_cdf(params, s))
                crit = KS_CRITICAL_1PCT / math.sqrt(dist.count)
                rows.append(CheckRow(kind.value, measure.value, "ks_distance", "<=",
                                     crit, d, 0.0, "PASS" if d <= crit else "FAIL"))
    return rows


def cmd_verify(args) -> int:
    dims = ChannelDims(args.antennas, args.taps)
    cfg = SimConfig(dims, args.realizations, args.seed)
    samples = run_ensemble(cfg, workers=args.workers)
    rows = verification_rows(samples, dims)

    header = ["kind", "measure", "statistic", "relation", "expected", "observed",
              "std_error", "status"]
    body = [(r.kind, r.measure, r.statistic, r.relation, fmt(r.expected),
             fmt(r.observed), fmt(r.std_error), r.status) for r in rows]
    print(f"M={dims.M} N={dims.N} R={cfg.realizations} seed={cfg.seed}")
    print(f"{'kind':<5}{'measure':<8}{'statistic':<23}{'rel':<4}"
          f"{'expected':>14}{'observed':>14}{'std_err':>12}  status")
    for r in rows:
        print(f"{r.kind:<5}{r.measure:<8}{r.statistic:<23}{r.relation:<4}"
              f"{r.expected:>14.6g}{r.observed:>14.6g}{r.std_error:>12.3g}  {r.status}")
    if args.out:
        write_csv(args.out, header, body)
    failed = [r for r in rows if r.failed]
    print(f"{len(failed)} failed of {sum(r.status in ('PASS', 'FAIL') for r in rows)} checks")
    if failed and args.strict:
        return EXIT_VERIFY
    return EXIT_OK


# -- entry point ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="trpower", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, antennas=True):
        if antennas:
            p.add_argument("--antennas", "-M", type=positive_int, required=True)
        p.add_argument("--taps", "-N", type=positive_int, required=True)
        p.add_argument("--realizations", "-R", type=positive_int, default=1_000_000)
        p.add_argument("--seed", type=seed_int, default=0)
        p.add_argument("--workers", type=positive_int, default=1,
                       help="threads for the ensemble loop; output does not depend on it")

    p = sub.add_parser("simulate", help="empirical CCDF/CDF curves as CSV")
    common(p)
    p.add_argument("--kinds", type=kind_list, default=kind_list("tr,dtr,pi"))
    p.add_argument("--out-dir", default=".")
    p.add_argument("--points", type=positive_int, default=512)
    p.add_argument("--min-probability", type=probability, default=1e-4,
                   help="smallest tail probability on each curve")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="tail power levels versus antenna count")
    common(p, antennas=False)
    p.add_argument("--kinds", type=kind_list, default=kind_list("tr,dtr,pi"))
    p.add_argument("--m-list", type=int_list, default=default_m_values(128))
    p.add_argument("--probability", type=probability, default=1e-4)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="compare sample moments with the closed forms")
    common(p)
    p.add_argument("--strict", action="store_true",
                   help="exit with status 2 if any check fails")
    p.add_argument("--out", default=None, help="also write the report as CSV")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (InsufficientSamplesError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalError, SampleBudgetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
