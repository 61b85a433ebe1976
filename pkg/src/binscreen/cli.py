"""Command-line entry point.

Subcommands: gen, screen, fit, asymptotics, table1, table2, figure1.
Exit codes: 0 success, 1 user error (flags, files, data), 2 internal
invariant violation.  All randomness flows from the --seed flag of the
invoked subcommand; BINSCREEN_THREADS caps the screening worker count.

Every artifact-writing command emits a RunManifest: embedded under the
"manifest" key for JSON reports, as a .manifest.json sidecar for CSV
datasets.  Study commands (table1, table2, figure1) write a CSV table, a
JSON sidecar with per-replicate detail, and a rendered PNG side by side.
"""

from __future__ import annotations

import argparse
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .asymptotics import population_curve, population_limits
from .datagen import (
    CovarianceSpec,
    Dataset,
    TrueModel,
    gen_response,
    sample_correlated_binomial,
    sample_mvn,
    substream,
)
from .dataio import (
    RunManifest,
    figure1_rows,
    read_csv,
    table1_rows,
    table2_rows,
    write_csv_rows,
    write_dataset_csv,
    write_json,
)
from .errors import InvariantError, SolverError
from .experiments import ExperimentConfig, run_figure1, run_table1, run_table2
from .glm import fit as glm_fit
from .glm import misclassification_rate
from .links import LinkFamily
from .plotting import plot_figure1, plot_table1, plot_table2
from .screening import METHODS, screen

__all__ = ["main", "parse_and_dispatch", "build_parser"]


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad usage; the contract wants 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _seed(value: str) -> int:
    seed = int(value)
    if not 0 <= seed < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in uint64")
    return seed


def build_parser() -> _Parser:
    parser = _Parser(prog="binscreen", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"binscreen {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    gen = sub.add_parser("gen", help="generate a synthetic dataset as CSV")
    gen.add_argument("--out", required=True, help="output CSV path")
    gen.add_argument("--n", type=int, required=True, help="sample size")
    gen.add_argument("--p", type=int, help="number of predictors (required with sparse --gamma)")
    gen.add_argument("--cov", choices=("ar1", "cs", "binom"), default="ar1")
    gen.add_argument("--rho", type=float, default=0.5)
    gen.add_argument("--link", choices=("probit", "logit"), default="probit")
    gen.add_argument(
        "--gamma",
        required=True,
        help="true slopes: comma list '1,1,-2,0,0' or sparse '1:1,2:1,15:-1.5' with --p",
    )
    gen.add_argument("--gamma0", type=float, default=0.0)
    gen.add_argument("--seed", type=_seed, default=0)
    gen.set_defaults(handler=_cmd_gen)

    scr = sub.add_parser("screen", help="rank predictors by a screening statistic")
    scr.add_argument("--method", choices=METHODS, required=True)
    scr.add_argument("--input", required=True, help="input CSV path")
    scr.add_argument("--response", default="y", help="response column name (default: y)")
    scr.add_argument("--d", type=int, help="override the floor(n/log n) selection size")
    scr.add_argument("--standardize", action="store_true", help="center/scale columns first")
    scr.add_argument("--out", help="report JSON path (default: stdout)")
    scr.set_defaults(handler=_cmd_screen)

    fit = sub.add_parser("fit", help="fit a GLM on all or selected predictors")
    fit.add_argument("--input", required=True, help="input CSV path")
    fit.add_argument("--response", default="y")
    fit.add_argument("--link", choices=("logit", "probit"), default="logit")
    fit.add_argument("--select", help="screening report JSON; restrict to its selected set")
    fit.add_argument(
        "--holdout",
        type=float,
        default=0.0,
        help="hold out this fraction for testing (default 0: in-sample rate only)",
    )
    fit.add_argument("--seed", type=_seed, default=0, help="seed for the holdout split")
    fit.add_argument("--out", help="report JSON path (default: stdout)")
    fit.set_defaults(handler=_cmd_fit)

    asy = sub.add_parser("asymptotics", help="population limits for a model spec")
    asy.add_argument("--model", required=True, help="model JSON: gamma0, gamma, link, cov")
    asy.add_argument("--working", choices=("probit", "logit"), help="working link (default: true link)")
    asy.add_argument("--subset", help="working predictor subset '1,2,10' (default: all)")
    asy.add_argument("--curve", action="store_true", help="also emit per-predictor limits as CSV")
    asy.add_argument("--out", help="report JSON path (default: stdout)")
    asy.set_defaults(handler=_cmd_asymptotics)

    for name, handler in (
        ("table1", _cmd_table1),
        ("table2", _cmd_table2),
        ("figure1", _cmd_figure1),
    ):
        study = sub.add_parser(name, help=f"run the {name} study (CSV + JSON + PNG)")
        study.add_argument("--seed", type=_seed, default=0)
        study.add_argument("--rho", type=float, default=0.5)
        study.add_argument(
            "--paper-scale",
            action="store_true",
            help="100 replicates instead of the desk-scale 50",
        )
        study.add_argument("--out-dir", default=".", help="directory for the artifacts")
        study.set_defaults(handler=handler)

    return parser


# ---------------------------------------------------------------------------
# subcommand handlers
# ---------------------------------------------------------------------------


def _parse_gamma(text: str, p: int | None) -> np.ndarray:
    if ":" in text:
        if p is None:
            raise ValueError("--p is required when --gamma uses index:value pairs")
        gamma = np.zeros(p)
        for part in text.split(","):
            idx, sep, val = part.partition(":")
            if not sep:
                raise ValueError(f"bad --gamma entry {part!r}: expected index:value")
            j = int(idx)
            if not 1 <= j <= p:
                raise ValueError(f"--gamma index {j} outside 1..{p}")
            gamma[j - 1] = float(val)
        return gamma
    gamma = np.array([float(v) for v in text.split(",")])
    if p is not None and gamma.size != p:
        raise ValueError(f"--gamma has {gamma.size} entries but --p is {p}")
    return gamma


def _cmd_gen(args) -> int:
    gamma = _parse_gamma(args.gamma, args.p)
    link = LinkFamily.from_name(args.link)
    cov = CovarianceSpec.cs(args.rho) if args.cov == "cs" else CovarianceSpec.ar1(args.rho)
    model = TrueModel(args.gamma0, gamma, link, cov)
    start = time.perf_counter()
    if args.cov == "binom":
        X = sample_correlated_binomial(model.p, args.n, 0, rng=substream(args.seed, 0)).X.astype(float)
    else:
        X = sample_mvn(cov, model.p, args.n, 0, rng=substream(args.seed, 0))
    y = gen_response(X, model, 0, rng=substream(args.seed, 1))
    elapsed = time.perf_counter() - start
    data = Dataset(X=X, y=y)
    out = Path(args.out)
    write_dataset_csv(out, data)
    config = {
        "out": str(out),
        "n": args.n,
        "p": model.p,
        "cov": args.cov,
        "rho": args.rho,
        "link": args.link,
        "gamma": [float(g) for g in gamma],
        "gamma0": args.gamma0,
    }
    manifest = RunManifest.create("gen", config, args.seed, elapsed)
    write_json(out.with_name(out.name + ".manifest.json"), manifest.to_dict())
    print(f"wrote {out} ({args.n} rows, {model.p} predictors)")
    return 0


def _emit_report(payload: dict, out: str | None) -> None:
    if out:
        write_json(out, payload)
        print(f"wrote {out}")
    else:
        import json

        print(json.dumps(payload, indent=2))


def _cmd_screen(args) -> int:
    data = read_csv(args.input, response=args.response)
    report = screen(data, args.method, d=args.d, standardize=args.standardize)
    config = {
        "method": args.method,
        "input": str(args.input),
        "response": args.response,
        "d": report.d,
        "standardize": args.standardize,
    }
    manifest = RunManifest.create("screen", config, 0, report.timing)
    payload = {"manifest": manifest.to_dict(), "response": args.response, **report.to_dict()}
    _emit_report(payload, args.out)
    return 0


def _selected_from_report(path: str, data: Dataset) -> list[int]:
    import json

    obj = json.loads(Path(path).read_text())
    if "selected" not in obj:
        raise ValueError(f"{path}: not a screening report (no 'selected' field)")
    selected = [int(j) for j in obj["selected"]]
    if any(not 1 <= j <= data.p for j in selected):
        raise ValueError(f"{path}: selected indices do not fit a {data.p}-column dataset")
    return selected


def _cmd_fit(args) -> int:
    data = read_csv(args.input, response=args.response)
    link = LinkFamily.from_name(args.link)
    if args.select:
        selected = _selected_from_report(args.select, data)
        cols = [j - 1 for j in selected]
        X = data.X[:, cols]
        names = tuple(data.names[j] for j in cols)
    else:
        selected = list(range(1, data.p + 1))
        X, names = data.X, data.names
    if not 0.0 <= args.holdout < 1.0:
        raise ValueError("--holdout must lie in [0, 1)")

    y = data.y
    holdout_rate = None
    if args.holdout > 0.0:
        n_test = int(round(args.holdout * data.n))
        if n_test == 0 or data.n - n_test < 2:
            raise ValueError(f"--holdout {args.holdout} leaves no usable split at n={data.n}")
        perm = substream(args.seed, 9).permutation(data.n)
        test, train = perm[:n_test], perm[n_test:]
        start = time.perf_counter()
        result = glm_fit(X[train], y[train], link, names=names)
        elapsed = time.perf_counter() - start
        insample = _rate_dict(misclassification_rate(result, X[train], y[train]), len(train))
        holdout_rate = _rate_dict(misclassification_rate(result, X[test], y[test]), len(test))
    else:
        start = time.perf_counter()
        result = glm_fit(X, y, link, names=names)
        elapsed = time.perf_counter() - start
        insample = _rate_dict(misclassification_rate(result, X, y), data.n)

    config = {
        "input": str(args.input),
        "response": args.response,
        "link": args.link,
        "select": str(args.select) if args.select else None,
        "holdout": args.holdout,
    }
    manifest = RunManifest.create("fit", config, args.seed, elapsed)
    payload = {
        "manifest": manifest.to_dict(),
        "link": args.link,
        "predictors": list(names),
        "selected": selected,
        "coefficients": {
            "intercept": float(result.coefficients[0]),
            **{name: float(b) for name, b in zip(names, result.coefficients[1:])},
        },
        "converged": result.converged,
        "separation_detected": result.separation_detected,
        "log_likelihood": result.log_likelihood,
        "iterations": result.iterations,
        "misclassification": insample,
    }
    if holdout_rate is not None:
        payload["holdout_misclassification"] = holdout_rate
    _emit_report(payload, args.out)
    return 0


def _rate_dict(rate: Fraction, n: int) -> dict:
    errors = int(rate * n)  # exact: the Fraction was built as errors/n
    return {
        "errors": errors,
        "n": n,
        "ratio": f"{errors}/{n}",
        "rate": float(rate),
    }


def _model_from_file(path: str) -> TrueModel:
    import json

    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: invalid JSON ({exc})") from None
    for key in ("gamma", "link", "cov"):
        if key not in obj:
            raise ValueError(f"{path}: model spec missing {key!r}")
    cov_obj = obj["cov"]
    kind = cov_obj.get("kind")
    if kind in ("ar1", "cs"):
        if "rho" not in cov_obj:
            raise ValueError(f"{path}: cov kind {kind!r} needs rho")
        cov = CovarianceSpec(kind, rho=float(cov_obj["rho"]))
    elif kind == "dense":
        cov = CovarianceSpec.dense(cov_obj.get("matrix"))
    else:
        raise ValueError(f"{path}: unknown cov kind {kind!r}")
    return TrueModel(
        float(obj.get("gamma0", 0.0)),
        np.asarray(obj["gamma"], dtype=float),
        LinkFamily.from_name(obj["link"]),
        cov,
    )


def _cmd_asymptotics(args) -> int:
    model = _model_from_file(args.model)
    working = LinkFamily.from_name(args.working) if args.working else model.link
    if args.subset:
        subset = tuple(int(j) for j in args.subset.split(","))
    else:
        subset = tuple(range(1, model.p + 1))
    start = time.perf_counter()
    limits = population_limits(model, working, subset)
    curve = population_curve(model, working) if args.curve else None
    elapsed = time.perf_counter() - start

    config = {
        "model": str(args.model),
        "working": working.name,
        "subset": list(subset),
        "curve": bool(args.curve),
    }
    manifest = RunManifest.create("asymptotics", config, 0, elapsed)
    payload = {
        "manifest": manifest.to_dict(),
        "true_link": model.link.name,
        "working_link": working.name,
        "subset": list(limits.subset),
        "c1": limits.c1,
        "c2": limits.c2,
        "beta0_ml": limits.beta0_ml,
        "beta_ls": [float(b) for b in limits.beta_ls],
        "beta_ml": [float(b) for b in limits.beta_ml],
    }
    _emit_report(payload, args.out)
    if curve is not None:
        base = Path(args.out) if args.out else Path("asymptotics.json")
        csv_path = base.with_suffix(".csv")
        write_csv_rows(
            csv_path,
            ["index", "beta_ls", "beta_ml"],
            [
                [j + 1, repr(float(curve.beta_ls[j])), repr(float(curve.beta_ml[j]))]
                for j in range(model.p)
            ],
        )
        print(f"wrote {csv_path}")
    return 0


def _study_config(args, name: str) -> ExperimentConfig:
    return ExperimentConfig(
        scenario=name,
        replicates=100 if args.paper_scale else 50,
        seed=args.seed,
        rho=args.rho,
    )


def _cmd_table1(args) -> int:
    cfg = _study_config(args, "table1")
    result = run_table1(cfg)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    header, rows = table1_rows(result)
    write_csv_rows(out / "table1.csv", header, rows)
    config = {"replicates": cfg.replicates, "n": result.n, "rho": cfg.rho}
    manifest = RunManifest.create("table1", config, cfg.seed, result.elapsed)
    write_json(
        out / "table1.json",
        {
            "manifest": manifest.to_dict(),
            "n": result.n,
            "gamma": [float(g) for g in result.gamma],
            "cells": [
                {
                    "cov": cell.cov,
                    "link": cell.link,
                    "c1": cell.c1,
                    "mean": [float(v) for v in cell.mean],
                    "bias": [float(v) for v in cell.bias],
                    "se": [float(v) for v in cell.se],
                    "estimates": [[float(v) for v in row] for row in cell.estimates],
                }
                for cell in result.cells
            ],
        },
    )
    plot_table1(result, out / "table1.png")
    print(f"wrote {out / 'table1.csv'}, .json, .png ({result.elapsed:.1f}s)")
    return 0


def _cmd_table2(args) -> int:
    cfg = _study_config(args, "table2")
    result = run_table2(cfg)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    header, rows = table2_rows(result)
    write_csv_rows(out / "table2.csv", header, rows)
    config = {
        "replicates": cfg.replicates,
        "p": result.p,
        "rho": cfg.rho,
        "n_values": sorted(result.d_values),
    }
    manifest = RunManifest.create("table2", config, cfg.seed, result.elapsed)
    write_json(
        out / "table2.json",
        {
            "manifest": manifest.to_dict(),
            "p": result.p,
            "d": {str(n): d for n, d in sorted(result.d_values.items())},
            "rates": [
                {"method": m, "scenario": s, "n": n, "rate": r}
                for (m, s, n), r in sorted(result.rates.items())
            ],
            "replicates": result.detail,
        },
    )
    plot_table2(result, out / "table2.png")
    print(f"wrote {out / 'table2.csv'}, .json, .png ({result.elapsed:.1f}s)")
    return 0


def _cmd_figure1(args) -> int:
    cfg = _study_config(args, "figure1")
    result = run_figure1(cfg)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    header, rows = figure1_rows(result)
    write_csv_rows(out / "figure1.csv", header, rows)
    config = {"replicates": cfg.replicates, "n": result.n, "p": result.p, "rho": cfg.rho}
    manifest = RunManifest.create("figure1", config, cfg.seed, result.elapsed)
    write_json(
        out / "figure1.json",
        {
            "manifest": manifest.to_dict(),
            "n": result.n,
            "p": result.p,
            "active": list(result.active),
            "panels": [
                {
                    "cov": panel.cov,
                    "beta_ls": [float(v) for v in panel.curve.beta_ls],
                    "beta_ml": [float(v) for v in panel.curve.beta_ml],
                    "less_mean": [float(v) for v in panel.less_mean],
                    "less_se": [float(v) for v in panel.less_se],
                    "ml_mean": [float(v) for v in panel.ml_mean],
                    "ml_se": [float(v) for v in panel.ml_se],
                }
                for panel in result.panels
            ],
        },
    )
    plot_figure1(result, out / "figure1.png")
    print(f"wrote {out / 'figure1.csv'}, .json, .png ({result.elapsed:.1f}s)")
    return 0


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------


def parse_and_dispatch(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except InvariantError as exc:
        print(f"binscreen: invariant violation: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError, SolverError) as exc:
        print(f"binscreen: error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(parse_and_dispatch())


if __name__ == "__main__":
    main()
