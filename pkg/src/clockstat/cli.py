"""Command-line surface: parameter sweeps and experiment recipes.

Subcommands (theta, cumulants, sweep, trajectories, wtd, crosscheck) emit
plot-ready CSV/JSON; --plot additionally renders a matplotlib figure next
to the delimited output.  Every CSV starts with a provenance comment line
"# clockstat <version> <command line>", reals carry 12 significant digits,
and all outputs are deterministic given the full flag set including the
seed.  Exit status: 0 success, 1 runtime or numerical failure, 2 usage
error.  Range flags use inclusive linear grids "min:max:steps"; values
starting with a minus sign need the equals form, e.g. --s-range=-0.3:0.3:61
(the bare form is also rewritten when unambiguous).  A JSON --config file
may pre-set any flag; explicit flags override it.  CLOCKSTAT_THREADS caps
trajectory parallelism.
"""

from __future__ import annotations

import argparse
import json
import re
import shlex
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__, ldp, lindblad, qjmc, wtd
from .errors import ClockstatError, InconsistencyError, ValidationError

_RANGE_FLAGS = ("--s-range", "--omega-range", "--gamma-range")
_RANGE_RE = re.compile(r"^-?[0-9.eE+-]+:[^:]+:[^:]+$")


def _parse_range(text: str) -> np.ndarray:
    parts = str(text).split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"range must be min:max:steps, got {text!r}")
    try:
        lo, hi, steps = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad range {text!r}: {exc}")
    if steps < 1:
        raise argparse.ArgumentTypeError(f"range needs steps >= 1, got {steps}")
    if hi < lo:
        raise argparse.ArgumentTypeError(f"range needs min <= max, got {text!r}")
    return np.linspace(lo, hi, steps)


def _join_negative_ranges(argv: list[str]) -> list[str]:
    # argparse mistakes "-0.3:0.3:61" for an option; fold it into --flag=value
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok in _RANGE_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-") \
                and _RANGE_RE.match(argv[i + 1]):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


@dataclass
class ExperimentConfig:
    """One fully resolved experiment recipe."""

    mode: str
    omega: float = 3.0
    gamma: float = 7.5
    eta: float = 1.0
    s_range: np.ndarray | None = None
    omega_range: np.ndarray | None = None
    gamma_range: np.ndarray | None = None
    t: float = 1000.0
    t_max: float = 1000.0
    n_traj: int = 20
    n_samples: int = 100000
    seed: int = 42
    grid_points: int = 200
    t_points: int = 601
    threshold: float = 0.014
    output: str = ""
    format: str = "csv"
    plot: bool = False


_DEFAULTS = ExperimentConfig(mode="")


def _resolve_config(args: argparse.Namespace, parser: argparse.ArgumentParser) -> ExperimentConfig:
    doc = {}
    if getattr(args, "config", None):
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            parser.error(f"cannot read config file: {exc}")
        if not isinstance(doc, dict):
            parser.error("config file must hold a JSON object")

    def pick(name, default):
        cli_value = getattr(args, name, None)
        if cli_value is not None:
            return cli_value
        if name in doc:
            value = doc[name]
            if name.endswith("_range") and value is not None:
                try:
                    return _parse_range(value)
                except argparse.ArgumentTypeError as exc:
                    parser.error(str(exc))
            return value
        return default

    cfg = ExperimentConfig(
        mode=args.mode,
        omega=float(pick("omega", _DEFAULTS.omega)),
        gamma=float(pick("gamma", _DEFAULTS.gamma)),
        eta=float(pick("eta", _DEFAULTS.eta)),
        s_range=pick("s_range", None),
        omega_range=pick("omega_range", None),
        gamma_range=pick("gamma_range", None),
        t=float(pick("t", _DEFAULTS.t)),
        t_max=float(pick("t_max", 6.0 if args.mode == "wtd" else _DEFAULTS.t_max)),
        n_traj=int(pick("n_traj", _DEFAULTS.n_traj)),
        n_samples=int(pick("n_samples", _DEFAULTS.n_samples)),
        seed=int(pick("seed", _DEFAULTS.seed)),
        grid_points=int(pick("grid_points", _DEFAULTS.grid_points)),
        t_points=int(pick("t_points", _DEFAULTS.t_points)),
        threshold=float(pick("threshold", _DEFAULTS.threshold)),
        output=str(pick("output", "") or args.mode),
        format=str(pick("format", _DEFAULTS.format)),
        plot=bool(pick("plot", False)),
    )
    if cfg.format not in ("csv", "json"):
        parser.error(f"--format must be csv or json, got {cfg.format!r}")
    return cfg


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def _round12(value):
    if isinstance(value, float):
        return float(f"{value:.12g}")
    if isinstance(value, dict):
        return {k: _round12(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_round12(v) for v in value]
    return value


def _write_csv(path: str, provenance: str, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(provenance + "\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_json(path: str, doc: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_round12(doc), fh, indent=2)
        fh.write("\n")


def _model(cfg: ExperimentConfig) -> lindblad.LindbladModel:
    return lindblad.build_two_level_model(
        lindblad.TwoLevelParams(omega=cfg.omega, gamma=cfg.gamma, eta=cfg.eta)
    )


def _model_label(cfg: ExperimentConfig) -> str:
    return f"tla:omega={_fmt(cfg.omega)},gamma={_fmt(cfg.gamma)},eta={_fmt(cfg.eta)}"


def _cmd_theta(cfg: ExperimentConfig, provenance: str) -> int:
    if cfg.s_range is None:
        raise ValidationError("theta mode needs --s-range")
    if cfg.eta != 1.0:
        raise ValidationError("the closed-form comparison is defined for eta = 1")
    model = _model(cfg)
    rows = []
    for s in cfg.s_range:
        th_spec = ldp.theta(model, float(s))
        th_cf = ldp.theta_closed_form_tla(cfg.omega, cfg.gamma, float(s))
        rows.append((float(s), th_spec, th_cf, abs(th_spec - th_cf)))
    path = cfg.output + ".csv"
    _write_csv(path, provenance, ["s", "theta_spectral", "theta_closed_form", "abs_diff"], rows)
    if cfg.plot:
        from . import report
        report.save_theta_figure(cfg.output + ".png", np.array(rows, dtype=float),
                                 cfg.omega, cfg.gamma)
    return 0


def _cmd_cumulants(cfg: ExperimentConfig, provenance: str) -> int:
    model = _model(cfg)
    c = ldp.counting_cumulants(model)
    dt = ldp.delta_tau(model, cfg.t)
    n_mean, n_std = ldp.n_statistics(model, cfg.t)
    doc = {
        "provenance": provenance,
        "omega": cfg.omega, "gamma": cfg.gamma, "eta": cfg.eta, "t": cfg.t,
        "theta_at_zero": c.theta_at_zero, "rate": c.rate,
        "variance_rate": c.variance_rate, "fano": c.fano, "fd_step": c.fd_step,
        "delta_tau": dt, "n_mean": n_mean, "n_std": n_std,
    }
    if cfg.format == "json":
        _write_json(cfg.output + ".json", doc)
    else:
        keys = [k for k in doc if k != "provenance"]
        _write_csv(cfg.output + ".csv", provenance, keys, [tuple(doc[k] for k in keys)])
    return 0


def _cmd_sweep(cfg: ExperimentConfig, provenance: str) -> int:
    if cfg.omega_range is None or cfg.gamma_range is None:
        raise ValidationError("sweep mode needs --omega-range and --gamma-range")
    rows, minima = ldp.sweep_delta_tau(cfg.omega_range, cfg.gamma_range, cfg.t, cfg.eta)
    csv_rows = [(r["omega"], r["gamma"], r["rate"], r["theta2"], r["delta_tau"], r["error"])
                for r in rows]
    _write_csv(cfg.output + ".csv", provenance,
               ["omega", "gamma", "rate", "theta2", "delta_tau", "error"], csv_rows)
    _write_json(cfg.output + "_minima.json",
                {"provenance": provenance, "t": cfg.t, "eta": cfg.eta, "minima": minima})
    if cfg.plot:
        from . import report
        report.save_sweep_figure(cfg.output + ".png", cfg.omega_range, cfg.gamma_range,
                                 rows, minima)
    return 0


def _cmd_trajectories(cfg: ExperimentConfig, provenance: str) -> int:
    model = _model(cfg)
    label = _model_label(cfg)
    rate = ldp.counting_cumulants(model).rate
    trajectories = qjmc.trajectory_ensemble(model, cfg.n_traj, cfg.t_max, cfg.seed)
    grid = np.linspace(0.0, cfg.t_max, cfg.grid_points)

    click_rows = [(traj.traj_index, t) for traj in trajectories for t in traj.click_times]
    _write_csv(cfg.output + "_clicks.csv", provenance, ["traj_index", "click_time"], click_rows)

    tau_rows = []
    tau_matrix = np.empty((cfg.n_traj, grid.size))
    for traj in trajectories:
        series = qjmc.clock_readout(traj, rate, grid)
        tau_matrix[traj.traj_index] = series.tau
        tau_rows.extend((t, traj.traj_index, tau) for t, tau in zip(grid, series.tau))
    _write_csv(cfg.output + "_tau.csv", provenance, ["t", "traj_index", "tau"], tau_rows)

    stats = qjmc.ensemble_statistics_from(trajectories, grid, rate)
    stat_rows = list(zip(stats.grid, stats.mean_tau, stats.std_tau, stats.mean_n, stats.std_n))
    _write_csv(cfg.output + "_stats.csv", provenance,
               ["t", "mean_tau", "std_tau", "mean_n", "std_n"], stat_rows)
    if cfg.plot:
        from . import report
        report.save_trajectories_figure(cfg.output + ".png", grid, tau_matrix, label)
    return 0


def _cmd_wtd(cfg: ExperimentConfig, provenance: str) -> int:
    if cfg.gamma_range is None:
        raise ValidationError("wtd mode needs --gamma-range")
    ts = np.linspace(0.0, cfg.t_max, cfg.t_points)
    rows = []
    peak_docs = []
    w_grid = np.empty((cfg.gamma_range.size, ts.size))
    for i, gamma in enumerate(cfg.gamma_range):
        w = wtd.wtd_pdf(cfg.omega, float(gamma), ts)
        w_grid[i] = w
        rows.extend((float(gamma), float(t), float(wv)) for t, wv in zip(ts, w))
        peaks = wtd.find_peaks(cfg.omega, float(gamma), cfg.threshold)
        peak_docs.append({
            "omega": cfg.omega, "gamma": float(gamma), "threshold": cfg.threshold,
            "peaks": [{"t": t, "w": w} for t, w in peaks],
        })
    _write_csv(cfg.output + ".csv", provenance, ["gamma", "t", "w"], rows)
    _write_json(cfg.output + "_peaks.json", {"provenance": provenance, "census": peak_docs})
    if cfg.plot:
        from . import report
        report.save_wtd_figure(cfg.output + ".png", cfg.gamma_range, ts, w_grid,
                               cfg.threshold, cfg.omega)
    return 0


def _cmd_crosscheck(cfg: ExperimentConfig, provenance: str) -> int:
    if cfg.eta != 1.0:
        raise ValidationError("the renewal cross-check is defined for eta = 1")
    model = _model(cfg)
    profile = wtd.build_profile(cfg.omega, cfg.gamma)
    status = 0
    try:
        report_obj = wtd.renewal_crosscheck(model, profile, cfg.n_samples, cfg.seed)
    except InconsistencyError as exc:
        report_obj = getattr(exc, "report", None)
        print(f"crosscheck failed: {exc}", file=sys.stderr)
        status = 1
    doc = {"provenance": provenance, "omega": cfg.omega, "gamma": cfg.gamma,
           "seed": cfg.seed}
    if report_obj is not None:
        doc.update(report_obj.as_dict())
        if cfg.plot:
            from . import report
            report.save_crosscheck_figure(cfg.output + ".png", report_obj, profile)
    _write_json(cfg.output + ".json", doc)
    return status


_COMMANDS = {
    "theta": _cmd_theta,
    "cumulants": _cmd_cumulants,
    "sweep": _cmd_sweep,
    "trajectories": _cmd_trajectories,
    "wtd": _cmd_wtd,
    "crosscheck": _cmd_crosscheck,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="clockstat",
        description="Counting statistics, clock error, and waiting-time analysis "
                    "of a coherently driven two-level emitter under photodetection.",
    )
    parser.add_argument("--version", action="version", version=f"clockstat {__version__}")
    sub = parser.add_subparsers(dest="mode", required=True)

    def common(p, *, ranges=(), needs_model=True):
        p.add_argument("--config", help="JSON file pre-setting any flag; explicit flags win")
        p.add_argument("-o", "--output", help="output path prefix (default: mode name)")
        p.add_argument("--plot", action="store_true", default=None,
                       help="also render a PNG figure next to the data files")
        if needs_model:
            p.add_argument("--omega", type=float, help="drive amplitude (default 3)")
            p.add_argument("--gamma", type=float, help="decay rate (default 7.5)")
            p.add_argument("--eta", type=float, help="detection efficiency in (0,1] (default 1)")
        for flag, text in ranges:
            p.add_argument(flag, type=_parse_range, metavar="MIN:MAX:STEPS", help=text)

    p = sub.add_parser("theta", help="scaled CGF: spectral vs closed form over an s grid")
    common(p, ranges=[("--s-range", "tilt grid (use --s-range=-0.3:0.3:61 for negative start)")])
    p.set_defaults(s_range=None)

    p = sub.add_parser("cumulants", help="rate, variance rate, Fano factor, clock error")
    common(p)
    p.add_argument("--t", type=float, help="clock running time (default 1000)")
    p.add_argument("--format", choices=("csv", "json"), help="output format (default csv)")

    p = sub.add_parser("sweep", help="delta-tau over an (omega, gamma) grid plus minima")
    common(p, ranges=[("--omega-range", "drive grid"), ("--gamma-range", "decay grid")])
    p.add_argument("--t", type=float, help="clock running time (default 1000)")

    p = sub.add_parser("trajectories", help="quantum-jump runs, clock readouts, ensemble stats")
    common(p)
    p.add_argument("--n-traj", type=int, help="number of trajectories (default 20)")
    p.add_argument("--t-max", type=float, help="trajectory length (default 1000)")
    p.add_argument("--seed", type=int, help="base RNG seed (default 42)")
    p.add_argument("--grid-points", type=int, help="clock readout grid size (default 200)")

    p = sub.add_parser("wtd", help="waiting-time density over a gamma grid plus peak census")
    common(p, ranges=[("--gamma-range", "decay grid")])
    p.add_argument("--t-max", type=float, default=None, help="time-axis extent (default 6)")
    p.add_argument("--t-points", type=int, help="time-axis samples (default 601)")
    p.add_argument("--threshold", type=float, help="peak census density threshold (default 0.014)")

    p = sub.add_parser("crosscheck", help="KS test of simulated intervals against the analytic WTD")
    common(p)
    p.add_argument("--n-samples", type=int, help="number of inter-click intervals (default 100000)")
    p.add_argument("--seed", type=int, help="base RNG seed (default 42)")
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    args = parser.parse_args(_join_negative_ranges(argv))
    cfg = _resolve_config(args, parser)
    provenance = f"# clockstat {__version__} {shlex.join(['clockstat'] + argv)}"
    try:
        return _COMMANDS[cfg.mode](cfg, provenance)
    except ClockstatError as exc:
        print(f"clockstat {cfg.mode}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"clockstat {cfg.mode}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
