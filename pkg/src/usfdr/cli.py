"""Command-line interface: ``run``, ``analyze`` and ``reproduce``.

Exit status is 0 on success, 1 for invalid input or configuration and 2 for
failures while running.
"""
import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np

from .config import CLI_METHODS, DEFAULT_ALPHAS, ConfigError, parse_config
from .procedures import (
    bh_procedure,
    p_values_from_t,
    screened_procedure,
    split_screen_and_stats,
    us_procedure,
)
from .report import ResultRow, ResultsTable, emit_csv, emit_plot
from .simulation import ModelSpec, run_experiment
from .stats import TwoSampleDataset, baseline_screens, test_statistics

log = logging.getLogger("usfdr")

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2

_EQ = [(f"model{i}", "equal") for i in range(1, 5)]
_UNEQ = [(f"model{i}", "unequal") for i in range(1, 5)]
FIGURES = {
    1: ("power", _EQ, ("bh", "us")),
    2: ("power", _UNEQ, ("bh", "us")),
    3: ("e_fdr_over_alpha", _EQ, ("bh", "us")),
    4: ("e_fdr_over_alpha", _UNEQ, ("bh", "us")),
    5: ("e_fdr_over_alpha", [("model4", "equal")],
        ("ss-screen", "ms-screen", "ss-screen-fixed", "ms-screen-fixed")),
    6: ("power", [("model5", "equal")], ("us", "bh", "split-ss", "split-ms")),
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _add_model_flags(p):
    p.add_argument("--config", type=Path, help="flat key = value config file")
    p.add_argument("--model", help="model1..model5, theta-beta or null")
    p.add_argument("--regime", choices=("equal", "unequal"))
    p.add_argument("--m", type=int, help="number of features (default 2000)")
    p.add_argument("--n1", type=int)
    p.add_argument("--n2", type=int)
    p.add_argument("--noise", choices=("gaussian", "t"))
    p.add_argument("--noise-df", type=float)
    p.add_argument("--theta", type=float)
    p.add_argument("--beta", type=float)


def build_parser():
    parser = _Parser(prog="usfdr", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run a Monte Carlo experiment")
    _add_model_flags(run)
    run.add_argument("--methods", help=f"comma list from {','.join(CLI_METHODS)}")
    run.add_argument("--alpha", help="comma list of target FDR levels (default i/20)")
    run.add_argument("--n-reps", type=int)
    run.add_argument("--n-grid", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--fixed-lambda", action="store_const", const=True,
                     help="screen baselines use lambda = sqrt(2 log m)")
    run.add_argument("--n-screen", type=int)
    run.add_argument("--output-dir")
    run.add_argument("--workers", type=int, help="worker processes (env USFDR_WORKERS)")
    run.add_argument("--no-plot", action="store_true")

    an = sub.add_parser("analyze", help="apply a procedure to a dataset CSV")
    an.add_argument("input", type=Path, help="CSV with a 'group' column (1/2) and features")
    an.add_argument("--method", default="us", choices=CLI_METHODS)
    an.add_argument("--alpha", type=float, default=0.1)
    an.add_argument("--regime", choices=("equal", "unequal"), default="equal")
    an.add_argument("--n-grid", type=int, default=10)
    an.add_argument("--fixed-lambda", action="store_true")
    an.add_argument("--n-screen", type=int)
    an.add_argument("--output", type=Path, help="per-feature CSV (default stdout)")

    rep = sub.add_parser("reproduce", help="canned experiments for the figures")
    rep.add_argument("--figure", default="all", help="1-6, comma list, or 'all'")
    rep.add_argument("--n-reps", type=int, default=500)
    rep.add_argument("--n-grid", type=int, default=10)
    rep.add_argument("--seed", type=int, default=0)
    rep.add_argument("--output-dir", default="results")
    rep.add_argument("--workers", type=int)
    return parser


def _flags(args, names):
    return {name.replace("_", "-"): getattr(args, name) for name in names}


def cmd_run(args):
    flags = _flags(args, ["model", "regime", "m", "n1", "n2", "noise", "noise_df", "theta",
                          "beta", "methods", "alpha", "n_reps", "n_grid", "seed",
                          "fixed_lambda", "n_screen", "output_dir", "workers"])
    cfg = parse_config(flags, args.config)
    summaries = run_experiment(
        cfg.model, cfg.engine_methods, cfg.alphas, cfg.n_reps, cfg.master_seed,
        n_grid=cfg.n_grid, n_screen=cfg.n_screen, workers=cfg.workers)
    table = ResultsTable.from_summaries(summaries)
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    path = emit_csv(table, cfg.output_dir / "results.csv")
    print(path)
    if not args.no_plot:
        print(emit_plot(table, "power", cfg.output_dir / "power.svg"))
        print(emit_plot(table, "e_fdr_over_alpha", cfg.output_dir / "fdr_ratio.svg"))
    return EXIT_OK


def read_dataset(path):
    """Two-sample dataset from a CSV with a ``group`` column and feature columns."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        if "group" not in header:
            raise ValueError(f"{path}: missing 'group' column")
        gi = header.index("group")
        names = [h for i, h in enumerate(header) if i != gi]
        if not names:
            raise ValueError(f"{path}: no feature columns")
        groups, rows = [], []
        for lineno, row in enumerate(reader, 2):
            if not row:
                continue
            if len(row) != len(header):
                raise ValueError(f"{path}:{lineno}: expected {len(header)} fields")
            try:
                g = int(float(row[gi]))
                values = [float(v) for i, v in enumerate(row) if i != gi]
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-numeric value") from None
            if g not in (1, 2):
                raise ValueError(f"{path}:{lineno}: group must be 1 or 2")
            groups.append(g)
            rows.append(values)
    x = np.asarray(rows, dtype=np.float64)
    g = np.asarray(groups)
    return TwoSampleDataset(x[g == 1], x[g == 2]), names


def cmd_analyze(args):
    if not 0 < args.alpha <= 1:
        raise ConfigError("alpha", "must lie in (0, 1]")
    data, names = read_dataset(args.input)
    stats = test_statistics(data, args.regime)
    p = p_values_from_t(stats)
    family = np.full(data.m, "", dtype=object)
    screen = stats.s
    summary = {"method": args.method, "alpha": args.alpha, "m": data.m}
    if args.method == "bh":
        res = bh_procedure(p, args.alpha)
        summary["threshold_p"] = res.threshold_p
    else:
        if args.method == "us":
            res = us_procedure(stats, args.alpha, args.n_grid)
        elif args.method in ("ss-screen", "ms-screen"):
            ss, ms = baseline_screens(data)
            rule = "fixed" if args.fixed_lambda else "grid"
            screen = ss if args.method == "ss-screen" else ms
            res = screened_procedure(screen, stats, args.alpha, rule, args.n_grid)
        else:
            n_screen = args.n_screen or min(data.n1, data.n2) // 2
            screen, stats = split_screen_and_stats(data, args.method[-2:], n_screen, args.regime)
            p = p_values_from_t(stats)
            res = screened_procedure(screen, stats, args.alpha, "grid", args.n_grid)
        family = np.where(res.split.family1, "1", "2").astype(object)
        summary.update(lambda_hat=res.lambda_hat, t1_hat=res.t1_hat, t2_hat=res.t2_hat)
    rejected = np.zeros(data.m, dtype=bool)
    rejected[res.rejected] = True
    summary["n_rejected"] = int(rejected.sum())

    out = open(args.output, "w", newline="", encoding="utf-8") if args.output else sys.stdout
    try:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["feature", "t", "screen", "p", "family", "rejected"])
        for i, name in enumerate(names):
            writer.writerow([name, f"{stats.t[i]:.10g}", f"{screen[i]:.10g}",
                             f"{p[i]:.10g}", family[i], int(rejected[i])])
    finally:
        if args.output:
            out.close()
    print(" ".join(f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={v}"
                   for k, v in summary.items()), file=sys.stderr)
    return EXIT_OK


def _parse_figures(text):
    if text == "all":
        return sorted(FIGURES)
    try:
        figs = sorted({int(f) for f in text.split(",")})
    except ValueError:
        raise ConfigError("figure", f"expected 1-6, a comma list or 'all', got {text!r}") from None
    bad = [f for f in figs if f not in FIGURES]
    if bad:
        raise ConfigError("figure", f"no figure {bad[0]}; choose from 1-6")
    return figs


def _fig5_rows(table):
    # split the fixed-lambda variants into their own panel
    out = ResultsTable()
    for r in table:
        fixed = r.method.endswith("-fixed")
        model = f"{r.model} lambda={'sqrt(2log m)' if fixed else 'hat'}"
        method = r.method.removesuffix("-fixed")
        out.add(ResultRow(model, method, r.alpha, r.e_fdr, r.e_power, r.n_reps,
                          r.mean_lambda_hat, r.mean_rejections))
    return out


def cmd_reproduce(args):
    figures = _parse_figures(args.figure)
    if args.n_reps < 1:
        raise ConfigError("n-reps", "must be >= 1")
    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cache = {}
    for fig in figures:
        y_axis, models, methods = FIGURES[fig]
        table = ResultsTable()
        for kind, regime in models:
            key = (kind, regime, methods)
            if key not in cache:
                log.info("figure %d: %s/%s %s", fig, kind, regime, ",".join(methods))
                cache[key] = run_experiment(
                    ModelSpec(kind, regime=regime), methods, DEFAULT_ALPHAS, args.n_reps,
                    args.seed, n_grid=args.n_grid, workers=args.workers)
            table.extend(ResultsTable.from_summaries(cache[key]))
        if fig == 5:
            table = _fig5_rows(table)
        print(emit_csv(table, out_dir / f"figure{fig}.csv"))
        print(emit_plot(table, y_axis, out_dir / f"figure{fig}.svg"))
    return EXIT_OK


COMMANDS = {"run": cmd_run, "analyze": cmd_analyze, "reproduce": cmd_reproduce}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ValueError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
