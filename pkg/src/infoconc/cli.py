"""Command-line experiment runner.

Each subcommand binds a model, the Monte Carlo engine, and the matching
closed-form bounds into one reproducible experiment:

    tail              deviation tails against both tail bounds
    mgf               exponential moments against the dimensional bound
    variance          deviation variance against the derived cap
    entropy_power     coverage of the entropy-power band
    quantile_density  concavity of f(F^-1(t)) for a one-dimensional density
    lyapunov          moment-curve convexity in the chosen normalization
    order_p           variance caps of an order-p density by quadrature
    aep               per-coordinate information of a stationary process
    list-bounds       the bound catalog

Outputs: a CSV of per-grid-point results (--out-csv) and a JSON summary
(--out-json).  Identical configurations produce byte-identical files; the
only time-dependent content lives under the JSON "meta" key.  Exit status
0 means no bound was violated, 2 means some verdict is VIOLATED, and 1 is
a usage or runtime error.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from datetime import datetime, timezone

import numpy as np

from . import bounds
from .aep import GaussAR1, IIDProcess, run_trajectories
from .distributions import (
    ParameterError,
    RngStream,
    density_from_spec,
    model_from_spec,
)
from .infotools import (
    deviation_mean,
    deviation_variance,
    empirical_mgf,
    empirical_tail,
    entropy_power_band,
    sample_information,
)
from .lyapunov import (
    _midpoint_defects,
    check_convexity_direction,
    moment_curve,
    order_p_variance_check,
)
from .numerics import DomainError, NumericsError
from .serialize import dump_json, write_csv

__all__ = ["main", "entrypoint", "parse_grid"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as exit code 1, not 2."""

    def error(self, message):
        raise UsageError(message)


def parse_grid(text: str) -> list:
    """Parse ``start:stop:step`` (inclusive), a comma list, or one number."""
    text = text.strip()
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) != 3:
                raise ValueError("expected start:stop:step")
            start, stop, step = (float(p) for p in parts)
            if step <= 0.0:
                raise ValueError("step must be positive")
            if stop < start:
                raise ValueError("stop must not precede start")
            count = int(math.floor((stop - start) / step + 1e-9))
            return [start + i * step for i in range(count + 1)]
        if "," in text:
            vals = [float(p) for p in text.split(",") if p.strip() != ""]
            if not vals:
                raise ValueError("empty list")
            return vals
        return [float(text)]
    except ValueError as exc:
        raise UsageError(f"bad grid {text!r}: {exc}") from None


def parse_int_grid(text: str) -> list:
    vals = parse_grid(text)
    out = []
    for v in vals:
        if abs(v - round(v)) > 1e-9:
            raise UsageError(f"grid {text!r} must contain integers")
        out.append(int(round(v)))
    return out


_SIMPLE_FAMILIES = ("exponential", "gaussian1d", "laplace", "half_normal")


def _density_spec_from_args(args) -> dict:
    """One-dimensional density spec from --model/--model-file and flags."""
    if getattr(args, "model_file", None):
        with open(args.model_file) as fh:
            return json.load(fh)
    name = getattr(args, "model", None)
    if not name:
        raise UsageError("--model or --model-file is required")
    name = name.strip()
    if name.startswith("{"):
        return json.loads(name)
    if name == "gamma":
        if args.p is None:
            raise UsageError("--model gamma requires --p")
        return {"family": "gamma", "params": {"p": args.p}}
    if name == "uniform":
        return {"family": "uniform", "params": {"a": 0.0, "b": 1.0}}
    if name == "gaussian":
        name = "gaussian1d"
    if name in _SIMPLE_FAMILIES:
        return {"family": name, "params": {}}
    raise UsageError(f"unknown model name {name!r}")


def _model_spec_from_args(args) -> dict:
    """Multivariate model spec; bare names become dim-fold products."""
    if getattr(args, "model_file", None):
        with open(args.model_file) as fh:
            return json.load(fh)
    name = getattr(args, "model", None)
    if not name:
        raise UsageError("--model or --model-file is required")
    name = name.strip()
    if name.startswith("{"):
        return json.loads(name)
    dim = getattr(args, "dim", 1) or 1
    if name == "gaussian":
        return {"family": "gaussian", "params": {"dim": dim}}
    base = _density_spec_from_args(args)
    if dim == 1:
        return base
    return {"family": "product", "params": {"component": base, "copies": dim}}


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("INFOCONC_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"INFOCONC_SEED must be an integer, got {env!r}")
    return 0


def _verdict_counts(verdicts) -> dict:
    counts = {bounds.HOLDS: 0, bounds.INCONCLUSIVE: 0, bounds.VIOLATED: 0}
    for v in verdicts:
        counts[v] += 1
    return counts


def _exit_code(counts: dict) -> int:
    return 2 if counts[bounds.VIOLATED] > 0 else 0


def _emit(args, experiment: str, config: dict, results, bound_names,
          counts: dict, started: float | None = None) -> None:
    if getattr(args, "out_csv", None):
        header, rows = results
        write_csv(args.out_csv, header, rows)
    if getattr(args, "out_json", None):
        header, rows = results
        payload = {
            "experiment": experiment,
            "config": config,
            "results": [dict(zip(header, row)) for row in rows],
            "bounds": [e.as_dict() for e in bounds.catalog()
                       if e.name in bound_names],
            "verdict_counts": counts,
            "meta": {
                "runtime_seconds": (time.monotonic() - started)
                if started is not None else None,
                "timestamp": datetime.now(timezone.utc).isoformat(),
            },
        }
        dump_json(args.out_json, payload)
    print(f"{experiment}: " + " ".join(
        f"{k}={v}" for k, v in counts.items()))


def _batch_config(spec: dict, args, seed: int, extra: dict | None = None) -> dict:
    cfg = {
        "model": spec,
        "samples": args.samples,
        "seed": seed,
        "stream_id": args.stream,
        "confidence": args.confidence,
    }
    if extra:
        cfg.update(extra)
    return cfg


def _run_tail(args) -> int:
    spec = _model_spec_from_args(args)
    model = model_from_spec(spec)
    seed = _resolve_seed(args)
    started = time.monotonic()
    batch = sample_information(model, args.samples,
                               RngStream(seed, stream_id=args.stream),
                               workers=args.workers)
    ts = parse_grid(args.t_grid)
    rows = empirical_tail(batch, ts, scaling=args.scaling,
                          confidence=args.confidence)
    header = ["t", "threshold_nats", "exceedances", "value", "std_error",
              "ci_low", "ci_high", "exp_bound", "exp_vacuous", "exp_verdict",
              "gauss_bound", "gauss_in_window", "gauss_verdict"]
    out = []
    verdicts = []
    for row in rows:
        exp_b = bounds.exp_tail_bound(row.t)
        exp_v = bounds.compare(row.estimate, exp_b, "upper", trivial=1.0)
        gauss = bounds.gaussian_tail_bound(row.t, batch.dim)
        gauss_v = bounds.compare(row.estimate, gauss.value, "upper", trivial=1.0)
        verdicts.extend([exp_v.verdict, gauss_v.verdict])
        e = row.estimate
        out.append((row.t, row.threshold_nats, row.exceedances, e.value,
                    e.std_error, e.ci_low, e.ci_high, exp_b, exp_v.vacuous,
                    exp_v.verdict, gauss.value, gauss.in_window,
                    gauss_v.verdict))
    counts = _verdict_counts(verdicts)
    config = _batch_config(spec, args, seed,
                           {"t_grid": ts, "scaling": args.scaling})
    _emit(args, "tail", config, (header, out),
          {"information_tail_exp", "information_tail_gaussian"},
          counts, started=started)
    return _exit_code(counts)


def _run_mgf(args) -> int:
    spec = _model_spec_from_args(args)
    model = model_from_spec(spec)
    seed = _resolve_seed(args)
    started = time.monotonic()
    batch = sample_information(model, args.samples,
                               RngStream(seed, stream_id=args.stream),
                               workers=args.workers)
    alphas = parse_grid(args.alpha_grid)
    rows = empirical_mgf(batch, alphas, form=args.form,
                         confidence=args.confidence)
    header = ["alpha", "value", "std_error", "ci_low", "ci_high", "bound",
              "in_window", "verdict"]
    out = []
    verdicts = []
    for row in rows:
        b = bounds.mgf_bound_nd(row.alpha, batch.dim)
        v = bounds.compare(row.estimate, b.value, "upper")
        verdicts.append(v.verdict)
        e = row.estimate
        out.append((row.alpha, e.value, e.std_error, e.ci_low, e.ci_high,
                    b.value, b.in_window, v.verdict))
    counts = _verdict_counts(verdicts)
    config = _batch_config(spec, args, seed,
                           {"alpha_grid": alphas, "form": args.form})
    _emit(args, "mgf", config, (header, out), {"information_mgf_nd"},
          counts, started=started)
    return _exit_code(counts)


def _run_variance(args) -> int:
    spec = _model_spec_from_args(args)
    model = model_from_spec(spec)
    seed = _resolve_seed(args)
    started = time.monotonic()
    batch = sample_information(model, args.samples,
                               RngStream(seed, stream_id=args.stream),
                               workers=args.workers)
    mean = deviation_mean(batch, args.confidence)
    var = deviation_variance(batch, args.confidence)
    cap = bounds.variance_cap_nd(batch.dim)
    verdict = bounds.compare(var, cap, "upper")
    header = ["n", "m", "mean", "mean_ci_low", "mean_ci_high", "variance",
              "var_std_error", "var_ci_low", "var_ci_high", "cap",
              "variance_per_coordinate", "verdict"]
    out = [(batch.dim, batch.m, mean.value, mean.ci_low, mean.ci_high,
            var.value, var.std_error, var.ci_low, var.ci_high, cap,
            var.value / batch.dim, verdict.verdict)]
    counts = _verdict_counts([verdict.verdict])
    _emit(args, "variance", _batch_config(spec, args, seed),
          (header, out), {"information_variance_nd"}, counts, started=started)
    return _exit_code(counts)


def _run_entropy_power(args) -> int:
    spec = _model_spec_from_args(args)
    model = model_from_spec(spec)
    seed = _resolve_seed(args)
    started = time.monotonic()
    batch = sample_information(model, args.samples,
                               RngStream(seed, stream_id=args.stream),
                               workers=args.workers)
    svals = parse_grid(args.s_grid)
    header = ["s", "value", "std_error", "ci_low", "ci_high", "floor_bound",
              "in_window", "vacuous", "verdict"]
    out = []
    verdicts = []
    for s in svals:
        res = entropy_power_band(batch, s, confidence=args.confidence)
        verdicts.append(res.verdict.verdict)
        e = res.estimate
        out.append((s, e.value, e.std_error, e.ci_low, e.ci_high, res.bound,
                    res.in_window, res.verdict.vacuous, res.verdict.verdict))
    counts = _verdict_counts(verdicts)
    config = _batch_config(spec, args, seed, {"s_grid": svals})
    _emit(args, "entropy_power", config, (header, out),
          {"entropy_power_band"}, counts, started=started)
    return _exit_code(counts)


def _run_quantile_density(args) -> int:
    spec = _density_spec_from_args(args)
    density = density_from_spec(spec)
    started = time.monotonic()
    ts = np.asarray(parse_grid(args.t_grid), dtype=float)
    from .distributions import quantile_density as qd
    vals = np.array([qd(density, float(t)) for t in ts])
    defects = -_midpoint_defects(ts, vals)
    tol = 1e-9
    header = ["t", "value", "concavity_defect", "verdict"]
    out = [(float(ts[0]), float(vals[0]), "", "")]
    verdicts = []
    for i, d in enumerate(defects):
        verdict = bounds.HOLDS if d >= -tol else bounds.VIOLATED
        verdicts.append(verdict)
        out.append((float(ts[i + 1]), float(vals[i + 1]), float(d), verdict))
    out.append((float(ts[-1]), float(vals[-1]), "", ""))
    counts = _verdict_counts(verdicts)
    config = {"density": spec, "t_grid": [float(t) for t in ts], "tol": tol}
    _emit(args, "quantile_density", config, (header, out), set(), counts,
          started=started)
    print(f"worst defect {float(np.min(defects)):.3e} at "
          f"t={float(ts[int(np.argmin(defects)) + 1]):g}")
    return _exit_code(counts)


def _run_lyapunov(args) -> int:
    spec = _density_spec_from_args(args)
    density = density_from_spec(spec)
    started = time.monotonic()
    grid = parse_grid(args.p_grid)
    curve = moment_curve(density, args.kind, grid)
    direction = "convex" if args.kind == "raw" else "concave"
    report = check_convexity_direction(curve, direction, tol=1e-7)
    defects = _midpoint_defects(curve.grid, curve.log_values)
    if direction == "concave":
        defects = -defects
    header = ["p", "log_value", "quad_error", "defect", "verdict"]
    out = [(float(curve.grid[0]), float(curve.log_values[0]),
            float(curve.quad_errors[0]), "", "")]
    verdicts = []
    for i, d in enumerate(defects):
        verdict = bounds.HOLDS if d >= -report.tol else bounds.VIOLATED
        verdicts.append(verdict)
        out.append((float(curve.grid[i + 1]), float(curve.log_values[i + 1]),
                    float(curve.quad_errors[i + 1]), float(d), verdict))
    out.append((float(curve.grid[-1]), float(curve.log_values[-1]),
                float(curve.quad_errors[-1]), "", ""))
    counts = _verdict_counts(verdicts)
    config = {"density": spec, "kind": args.kind, "p_grid": grid,
              "direction": direction}
    _emit(args, "lyapunov", config, (header, out), set(), counts,
          started=started)
    print(f"worst {direction} defect {report.worst_defect:.3e} at "
          f"p={report.worst_at:g}")
    return _exit_code(counts)


def _run_order_p(args) -> int:
    spec = _density_spec_from_args(args)
    density = density_from_spec(spec)
    started = time.monotonic()
    report = order_p_variance_check(density)
    header = ["cap_name", "cap_value", "observed", "margin", "verdict"]
    cap_values = {
        "ratio": report.caps.ratio_cap,
        "cp": report.caps.cp_cap,
        "trigamma": report.caps.trigamma,
        "log_simple": report.caps.log_cap,
    }
    observed = {
        "ratio": report.ratio,
        "cp": report.ratio,
        "trigamma": report.var_log,
        "log_simple": report.var_log,
    }
    out = []
    verdicts = []
    for name, margin in report.margins.items():
        if margin is None:
            continue
        verdict = bounds.HOLDS if margin >= -report.tol else bounds.VIOLATED
        verdicts.append(verdict)
        out.append((name, cap_values[name], observed[name], margin, verdict))
    counts = _verdict_counts(verdicts)
    config = {"density": spec, "p": report.p, "tol": report.tol}
    _emit(args, "order_p", config, (header, out),
          {"order_p_var_ratio", "order_p_var_cp", "order_p_var_log_trigamma",
           "order_p_var_log_simple"}, counts, started=started)
    print(f"var_log={report.var_log:.12g} trigamma_cap={report.caps.trigamma:.12g} "
          f"margin={report.margins['trigamma']:.3e}")
    return _exit_code(counts)


def _process_from_args(args):
    name = (getattr(args, "model", None) or "").strip()
    if name.startswith("{"):
        spec = json.loads(name)
    elif getattr(args, "model_file", None):
        with open(args.model_file) as fh:
            spec = json.load(fh)
    else:
        spec = None
    if spec is not None and "process" in spec:
        if spec["process"] == "gauss_ar1":
            params = spec.get("params", {})
            return GaussAR1(params.get("rho", 0.0), params.get("sd", 1.0))
        if spec["process"] == "iid":
            return IIDProcess(density_from_spec(spec["base"]))
        raise UsageError(f"unknown process {spec['process']!r}")
    if name == "gauss_ar1":
        return GaussAR1(args.rho, args.sd)
    if spec is not None:
        return IIDProcess(density_from_spec(spec))
    return IIDProcess(density_from_spec(_density_spec_from_args(args)))


def _run_aep(args) -> int:
    process = _process_from_args(args)
    seed = _resolve_seed(args)
    started = time.monotonic()
    n_grid = parse_int_grid(args.n_grid)
    report = run_trajectories(process, n_grid, args.samples,
                              RngStream(seed, stream_id=args.stream),
                              workers=args.workers)
    svals = parse_grid(args.s_grid)
    rows = report.exceedance_table(svals, confidence=args.confidence)
    header = ["n", "s", "exceedances", "value", "std_error", "ci_low",
              "ci_high", "bound", "in_window", "vacuous", "verdict"]
    out = []
    verdicts = []
    for row in rows:
        e = row.estimate
        verdicts.append(row.verdict.verdict)
        out.append((row.n, row.s, row.exceedances, e.value, e.std_error,
                    e.ci_low, e.ci_high, row.bound, row.in_window,
                    row.verdict.vacuous, row.verdict.verdict))
    counts = _verdict_counts(verdicts)
    medians = report.sup_deviation_medians()
    config = {
        "process": process.spec,
        "trials": args.samples,
        "seed": seed,
        "stream_id": args.stream,
        "n_grid": n_grid,
        "s_grid": svals,
        "confidence": args.confidence,
        "entropy_rate": report.entropy_rate,
        "sup_deviation_medians": [float(x) for x in medians],
    }
    _emit(args, "aep", config, (header, out), {"per_coordinate_tail"},
          counts, started=started)
    print("sup-deviation medians: "
          + " ".join(f"n>={n}:{m:.4g}" for n, m in zip(n_grid, medians)))
    return _exit_code(counts)


def _run_list_bounds(args) -> int:
    entries = bounds.catalog()
    widths = [max(len(e.name) for e in entries),
              max(len(e.formula) for e in entries)]
    for e in entries:
        print(f"{e.name:<{widths[0]}}  {e.formula:<{widths[1]}}  [{e.validity}]")
        print(f"{'':<{widths[0]}}  {e.statement}")
    if getattr(args, "out_json", None):
        dump_json(args.out_json, [e.as_dict() for e in entries])
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="infoconc",
                     description="information concentration experiments")
    sub = parser.add_subparsers(
        dest="experiment",
        metavar="experiment",
        help="one of: tail, mgf, variance, entropy_power, quantile_density, "
             "lyapunov, order_p, aep, list-bounds")

    model_flags = _Parser(add_help=False)
    model_flags.add_argument("--model", help="family name or JSON model spec")
    model_flags.add_argument("--model-file", help="path to a JSON model spec")
    model_flags.add_argument("--dim", type=int, default=1,
                             help="product copies for bare family names")
    model_flags.add_argument("--p", type=float, default=None,
                             help="gamma family parameter")

    mc_flags = _Parser(add_help=False)
    mc_flags.add_argument("--samples", type=int, default=100000)
    mc_flags.add_argument("--seed", type=int, default=None,
                          help="defaults to INFOCONC_SEED, then 0")
    mc_flags.add_argument("--stream", type=int, default=0)
    mc_flags.add_argument("--workers", type=int, default=1)
    mc_flags.add_argument("--confidence", type=float, default=0.999)

    out_flags = _Parser(add_help=False)
    out_flags.add_argument("--out-csv")
    out_flags.add_argument("--out-json")

    p = sub.add_parser("tail", parents=[model_flags, mc_flags, out_flags])
    p.add_argument("--t-grid", default="0:8:0.5")
    p.add_argument("--scaling", choices=["sqrt_n", "per_coordinate"],
                   default="sqrt_n")
    p.set_defaults(func=_run_tail)

    p = sub.add_parser("mgf", parents=[model_flags, mc_flags, out_flags])
    p.add_argument("--alpha-grid", default="0:1:0.25")
    p.add_argument("--form", choices=["two_sided_abs", "one_sided"],
                   default="two_sided_abs")
    p.set_defaults(func=_run_mgf)

    p = sub.add_parser("variance", parents=[model_flags, mc_flags, out_flags])
    p.set_defaults(func=_run_variance)

    p = sub.add_parser("entropy_power",
                       parents=[model_flags, mc_flags, out_flags])
    p.add_argument("--s-grid", default="1")
    p.set_defaults(func=_run_entropy_power)

    p = sub.add_parser("quantile_density",
                       parents=[model_flags, out_flags])
    p.add_argument("--t-grid", default="0.05:0.95:0.05")
    p.set_defaults(func=_run_quantile_density)

    p = sub.add_parser("lyapunov", parents=[model_flags, out_flags])
    p.add_argument("--kind", choices=["raw", "normalized", "hat"],
                   default="normalized")
    p.add_argument("--p-grid", default="0.5:40:0.5")
    p.set_defaults(func=_run_lyapunov)

    p = sub.add_parser("order_p", parents=[model_flags, out_flags])
    p.set_defaults(func=_run_order_p)

    p = sub.add_parser("aep", parents=[model_flags, mc_flags, out_flags])
    p.add_argument("--rho", type=float, default=0.5)
    p.add_argument("--sd", type=float, default=1.0)
    p.add_argument("--n-grid", default="16,64,256,1024")
    p.add_argument("--s-grid", default="0.5")
    p.set_defaults(func=_run_aep)

    p = sub.add_parser("list-bounds", parents=[out_flags])
    p.set_defaults(func=_run_list_bounds)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "experiment", None) is None:
            parser.print_usage(sys.stderr)
            print("error: an experiment subcommand is required",
                  file=sys.stderr)
            return 1
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ParameterError, DomainError, NumericsError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
