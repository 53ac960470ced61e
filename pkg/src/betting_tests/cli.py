"""Command-line interface.

Every subcommand takes its parameters from flags and/or a JSON file given
with ``--config``; flags override the file, the file overrides the
defaults. Config files carry ``"schema_version": 1`` and unknown keys are
rejected. Outputs are CSV files (17 significant digits, '.' decimal
separator) or SVG plots, each written to a temporary file and renamed into
place so that a failing command never leaves a partial file behind.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import bounds as bd
from .core import BettingTestError, ConfigurationError, GeometryBounds, StreamSpec, atomic_write_text
from .experiments import (
    DEFAULT_BETAS,
    centered_null_stream,
    default_strategies,
    forecaster_stream,
    monte_carlo_tau,
    one_axis_stream,
    spiral_stream,
)
from .martingales import PROCESS_NAMES, check_alpha, format_float

SCHEMA_VERSION = 1

TRIALS_COLUMNS = ["experiment", "strategy", "replicate", "seed", "tau_truncated", "rejected", "final_logw"]
SUMMARY_COLUMNS = ["strategy", "mean_tau", "stderr_tau", "reject_rate"]
SWEEP_COLUMNS = ["param", "value", "strategy", "mean_tau", "stderr_tau", "reject_rate"]
TRAJECTORY_COLUMNS = ["step", "logw"]
BOUNDS_COLUMNS = ["n", "u_n"]
BOUNDS_SUMMARY_COLUMNS = ["family", "alpha", "threshold", "aleph", "expected_tau_bound", "horizon"]
CALIBRATION_COLUMNS = ["strategy", "reject_rate", "ville_limit", "within_limit"]
LOWER_BOUND_COLUMNS = ["kind", "m", "alpha", "lower_bound"]


class CliError(BettingTestError):
    """A user-facing failure; the message is printed and the exit code is 1."""


# --------------------------------------------------------------------------
# Output helpers
# --------------------------------------------------------------------------

def _cell(value) -> str:
    if isinstance(value, bool) or isinstance(value, np.bool_):
        return "1" if value else "0"
    if isinstance(value, (float, np.floating)):
        return format_float(value)
    return str(value)


def write_csv(path, columns, rows) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    atomic_write_text(path, buf.getvalue())


def read_csv(path, required) -> list:
    """Read a CSV with a header; every row must have the header's width and
    the ``required`` columns. Errors name the offending line."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise CliError(f"{path}: cannot read ({exc.strerror})") from None
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise CliError(f"{path}:1: empty file") from None
    missing = [c for c in required if c not in header]
    if missing:
        raise CliError(f"{path}:1: missing column(s) {', '.join(missing)}")
    rows = []
    for record in reader:
        line = reader.line_num
        if not record:
            continue
        if len(record) != len(header):
            raise CliError(f"{path}:{line}: expected {len(header)} fields, found {len(record)}")
        rows.append((line, dict(zip(header, record))))
    if not rows:
        raise CliError(f"{path}: no data rows")
    return rows


def parse_number(path, line, column, text, kind=float):
    try:
        value = kind(text)
    except ValueError:
        raise CliError(f"{path}:{line}: column {column}: cannot parse {text!r}") from None
    if kind is float and not math.isfinite(value):
        raise CliError(f"{path}:{line}: column {column}: non-finite value {text!r}")
    return value


# --------------------------------------------------------------------------
# Configuration
# --------------------------------------------------------------------------

def _float_list(text):
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    return [float(v) for v in str(text).split(",") if v.strip()]


def _str_list(text):
    if isinstance(text, (list, tuple)):
        return [str(v) for v in text]
    return [v.strip() for v in str(text).split(",") if v.strip()]


def _bool(value):
    if isinstance(value, bool):
        return value
    if str(value).lower() in ("1", "true", "yes"):
        return True
    if str(value).lower() in ("0", "false", "no"):
        return False
    raise ValueError(f"not a boolean: {value!r}")


# field name -> (converter, default, help)
COMMON = {
    "alpha": (float, 0.05, "test level"),
    "T": (int, 1000, "horizon (number of observations)"),
    "replicates": (int, 500, "Monte Carlo replicates"),
    "seed": (int, 0, "base seed; replicate r uses seed + r"),
    "out": (str, ".", "output directory"),
    "strategies": (_str_list, None, "comma-separated strategy names"),
    "eps": (float, None, "EWA vertex scale (default 1/(2B))"),
    "trajectories": (_bool, False, "also write the log-wealth path of replicate 0 per strategy"),
}

FIELDS = {
    "run-experiment": {
        **COMMON,
        "experiment": (str, "one-axis", "one-axis, spiral, forecaster, centered-null, adversarial"),
        "m": (float, 0.4, "signal strength"),
        "a": (float, 0.0, "mean decay exponent"),
        "b": (float, 0.0, "noise decay exponent (one-axis)"),
        "d": (int, 5, "dimension (one-axis, centered-null)"),
        "M": (int, 50, "spiral period"),
        "theta": (float, 0.7, "forecaster moving-average coefficient"),
        "betas": (_float_list, list(DEFAULT_BETAS), "baseline mixing weights (forecaster)"),
        "kind": (str, "capital-const", "adversarial stream kind"),
        "B": (float, 1.0, "norm bound (adversarial)"),
        "D": (float, 2.0, "diameter bound (adversarial)"),
        "sweep_param": (str, None, "parameter to sweep (m, a, b, d, M, theta)"),
        "sweep_values": (_float_list, None, "comma-separated sweep values"),
    },
    "compare-forecasters": {
        **COMMON,
        "theta": (float, 0.7, "forecaster moving-average coefficient"),
        "betas": (_float_list, list(DEFAULT_BETAS), "baseline mixing weights"),
    },
    "calibrate-null": {
        **COMMON,
        "d": (int, 5, "dimension of the one-axis null stream"),
    },
    "adversarial": {
        **{k: v for k, v in COMMON.items() if k not in ("replicates", "seed", "trajectories")},
        "T": (int, 10000, "horizon"),
        "kind": (str, "capital-const", "hoeffding-limit, hoeffding-const, capital-limit, capital-const"),
        "m": (float, 0.1, "stream magnitude"),
        "B": (float, 1.0, "norm bound"),
        "D": (float, 2.0, "diameter bound"),
    },
    "bounds": {
        "family": (str, "hoeffding-two-sided", "u_n family"),
        "alpha": (float, 0.05, "test level"),
        "horizon": (int, 10000, "largest n considered by aleph"),
        "out": (str, ".", "output directory"),
        "preset": (str, None, "'one-axis' derives m_n, v_n from the one-axis stream"),
        "m": (float, 0.4, "m in m_n = m n^-m_exponent"),
        "m_exponent": (float, 0.0, "decay exponent of m_n"),
        "v": (float, None, "v in v_n = v n^-v_exponent"),
        "v_exponent": (float, 0.0, "decay exponent of v_n"),
        "a": (float, 0.0, "one-axis preset: mean decay"),
        "b": (float, 0.0, "one-axis preset: noise decay"),
        "strategy": (str, None, "strategy whose regret envelope is r_n"),
        "r": (float, None, "constant r_n (overrides the strategy default)"),
        "eps": (float, None, "fixed bet scale (capital-fixed-eps)"),
        "rho": (float, 0.0, "caller-supplied tail sums"),
        "d": (int, 1, "dimension"),
        "B": (float, 1.0, "norm bound"),
        "D": (float, 2.0, "diameter bound"),
    },
    "plot": {
        "kind": (str, "sweep", "'sweep' (mean tau vs parameter) or 'trajectory'"),
        "inputs": (_str_list, None, "input CSV file(s)"),
        "output": (str, None, "output SVG path"),
        "alpha": (float, 0.05, "level whose threshold log(1/alpha) is drawn"),
        "title": (str, "", "plot title"),
    },
}


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigurationError(f"config: cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config: {path}:{exc.lineno}: invalid JSON ({exc.msg})") from None
    if not isinstance(data, dict):
        raise ConfigurationError("config: top level must be an object")
    version = data.pop("schema_version", None)
    if version != SCHEMA_VERSION:
        raise ConfigurationError(f"config: schema_version must be {SCHEMA_VERSION}, got {version!r}")
    data.pop("command", None)
    return data


def resolve(command: str, flags: dict, config: dict) -> dict:
    fields = FIELDS[command]
    unknown = sorted(set(config) - set(fields))
    if unknown:
        raise ConfigurationError(f"config: unknown field(s) for {command}: {', '.join(unknown)}")
    merged = {k: spec[1] for k, spec in fields.items()}
    merged.update(config)
    merged.update(flags)
    out = {}
    for key, (convert, default, _) in fields.items():
        value = merged[key]
        if value is None:
            out[key] = None
            continue
        try:
            out[key] = convert(value)
        except (TypeError, ValueError):
            raise ConfigurationError(f"{key}: invalid value {value!r}") from None
    return out


def _check_common(cfg) -> None:
    if "alpha" in cfg:
        try:
            check_alpha(cfg["alpha"])
        except ConfigurationError as exc:
            raise ConfigurationError(f"alpha: {exc}") from None
    for key in ("T", "replicates", "horizon"):
        if key in cfg and cfg[key] is not None and cfg[key] < 1:
            raise ConfigurationError(f"{key}: must be at least 1, got {cfg[key]}")
    if cfg.get("seed") is not None and cfg["seed"] < 0:
        raise ConfigurationError(f"seed: must be nonnegative, got {cfg['seed']}")


# --------------------------------------------------------------------------
# Monte Carlo commands
# --------------------------------------------------------------------------

def _stream_for(cfg, overrides=None) -> StreamSpec:
    p = dict(cfg)
    p.update(overrides or {})
    exp = p["experiment"]
    try:
        if exp == "one-axis":
            return one_axis_stream(p["m"], p["a"], p["b"], int(p["d"]), seed=p["seed"], T=p["T"])
        if exp == "spiral":
            return spiral_stream(p["m"], p["a"], int(p["M"]), seed=p["seed"], T=p["T"])
        if exp == "forecaster":
            return forecaster_stream(p["theta"], seed=p["seed"], T=p["T"])
        if exp == "centered-null":
            return centered_null_stream(0.5, int(p["d"]), seed=p["seed"], T=p["T"])
        if exp == "adversarial":
            if p["m"] > p["B"]:
                raise ConfigurationError(f"m = {p['m']} exceeds the norm bound B = {p['B']}")
            try:
                kind = bd.AdversarialKind(p["kind"])
            except ValueError:
                raise ConfigurationError(f"kind: unknown adversarial stream {p['kind']!r}") from None
            return bd.adversarial_stream(kind, p["m"], p["T"], p["B"], p["D"])
    except ConfigurationError as exc:
        raise ConfigurationError(f"{exp}: {exc}") from None
    raise ConfigurationError(f"experiment: unknown experiment {exp!r}")


def _run(spec, cfg, label):
    strategies = cfg["strategies"] or default_strategies(spec, cfg.get("betas", DEFAULT_BETAS))
    for name in strategies:
        if name not in PROCESS_NAMES and not name.startswith("henzi"):
            raise ConfigurationError(f"strategies: unknown strategy {name!r}")
    # deterministic streams: every replicate would be identical
    replicates = 1 if spec.family == "adversarial" else cfg["replicates"]
    result = monte_carlo_tau(spec, strategies, cfg["alpha"], replicates, cfg["seed"],
                             betas=tuple(cfg.get("betas") or DEFAULT_BETAS), eps=cfg["eps"],
                             keep_paths=cfg["trajectories"])
    rows = [(label, t.strategy, t.replicate, t.seed, t.tau_truncated, t.rejected, t.final_logw)
            for t in result.trials]
    return result, rows


def _summary_rows(result):
    return [(s.strategy, s.mean_tau, s.stderr_tau, s.reject_rate) for s in result.summaries()]


def _write_trajectories(out, result, suffix=""):
    for name, paths in result.log_wealth.items():
        path = out / f"trajectory_{name}{suffix}.csv"
        write_csv(path, TRAJECTORY_COLUMNS, [(i + 1, v) for i, v in enumerate(paths[:, 0])])


def cmd_run_experiment(cfg) -> None:
    out = Path(cfg["out"])
    if cfg["sweep_param"] is None:
        spec = _stream_for(cfg)
        result, rows = _run(spec, cfg, spec.family)
        write_csv(out / "trials.csv", TRIALS_COLUMNS, rows)
        write_csv(out / "summary.csv", SUMMARY_COLUMNS, _summary_rows(result))
        if cfg["trajectories"]:
            _write_trajectories(out, result)
        return
    param = cfg["sweep_param"]
    if param not in ("m", "a", "b", "d", "M", "theta"):
        raise ConfigurationError(f"sweep_param: cannot sweep {param!r}")
    if not cfg["sweep_values"]:
        raise ConfigurationError("sweep_values: required with sweep_param")
    all_rows, sweep_rows = [], []
    for value in cfg["sweep_values"]:
        spec = _stream_for(cfg, {param: value})
        result, rows = _run(spec, cfg, f"{spec.family}[{param}={format_float(value)}]")
        all_rows += rows
        sweep_rows += [(param, value, s.strategy, s.mean_tau, s.stderr_tau, s.reject_rate)
                       for s in result.summaries()]
        if cfg["trajectories"]:
            _write_trajectories(out, result, f"_{param}{format_float(value)}")
    write_csv(out / "trials.csv", TRIALS_COLUMNS, all_rows)
    write_csv(out / "sweep.csv", SWEEP_COLUMNS, sweep_rows)


def cmd_compare_forecasters(cfg) -> None:
    out = Path(cfg["out"])
    spec = forecaster_stream(cfg["theta"], seed=cfg["seed"], T=cfg["T"])
    for beta in cfg["betas"]:
        if not 0 <= beta <= 1:
            raise ConfigurationError(f"betas: {beta} is outside [0, 1]")
    result, rows = _run(spec, cfg, spec.family)
    write_csv(out / "trials.csv", TRIALS_COLUMNS, rows)
    write_csv(out / "summary.csv", SUMMARY_COLUMNS, _summary_rows(result))
    if cfg["trajectories"]:
        _write_trajectories(out, result)


def ville_limit(alpha: float, replicates: int) -> float:
    """``alpha`` plus two binomial standard errors."""
    return alpha + 2.0 * math.sqrt(alpha * (1 - alpha) / replicates)


def cmd_calibrate_null(cfg) -> None:
    out = Path(cfg["out"])
    spec = one_axis_stream(0.0, 0.0, 0.0, cfg["d"], seed=cfg["seed"], T=cfg["T"])
    result, rows = _run(spec, cfg, "one-axis-null")
    write_csv(out / "trials.csv", TRIALS_COLUMNS, rows)
    write_csv(out / "summary.csv", SUMMARY_COLUMNS, _summary_rows(result))
    limit = ville_limit(cfg["alpha"], cfg["replicates"])
    write_csv(out / "calibration.csv", CALIBRATION_COLUMNS,
              [(s.strategy, s.reject_rate, limit, s.reject_rate <= limit) for s in result.summaries()])
    if cfg["trajectories"]:
        _write_trajectories(out, result)


def cmd_adversarial(cfg) -> None:
    out = Path(cfg["out"])
    try:
        kind = bd.AdversarialKind(cfg["kind"])
    except ValueError:
        raise ConfigurationError(f"kind: unknown adversarial stream {cfg['kind']!r}") from None
    try:
        geometry = GeometryBounds(1, cfg["B"], cfg["D"])
    except ConfigurationError as exc:
        raise ConfigurationError(f"B/D: {exc}") from None
    if not 0 < cfg["m"] <= cfg["B"]:
        raise ConfigurationError(f"m: must lie in (0, B], got {cfg['m']}")
    spec = bd.adversarial_stream(kind, cfg["m"], cfg["T"], B=cfg["B"], D=cfg["D"])
    hoeffding = kind.value.startswith("hoeffding")
    default = ["hoeffding_ftl"] if hoeffding else ["capital_ewa", "capital_ons", "capital_2steps"]
    run_cfg = dict(cfg, strategies=cfg["strategies"] or default, replicates=1, seed=0,
                   trajectories=False)
    result, rows = _run(spec, run_cfg, f"adversarial-{kind.value}")
    write_csv(out / "trials.csv", TRIALS_COLUMNS, rows)
    write_csv(out / "summary.csv", SUMMARY_COLUMNS, _summary_rows(result))
    if kind.value.endswith("const"):
        lb = bd.lower_bound_tau("hoeffding" if hoeffding else "capital", cfg["m"], geometry, cfg["alpha"])
        write_csv(out / "lower_bound.csv", LOWER_BOUND_COLUMNS, [(kind.value, cfg["m"], cfg["alpha"], lb)])


# --------------------------------------------------------------------------
# Bounds
# --------------------------------------------------------------------------

def build_bound_spec(cfg) -> bd.PowerBoundSpec:
    try:
        family = bd.BoundFamily(cfg["family"])
    except ValueError:
        names = ", ".join(f.value for f in bd.BoundFamily)
        raise ConfigurationError(f"family: unknown family {cfg['family']!r}; expected one of {names}") from None
    try:
        geometry = GeometryBounds(cfg["d"], cfg["B"], cfg["D"])
    except ConfigurationError as exc:
        raise ConfigurationError(f"B/D/d: {exc}") from None

    if cfg["preset"] == "one-axis":
        geometry = GeometryBounds(cfg["d"], 0.7, 0.9)
        m0, a, b = cfg["m"], cfg["a"], cfg["b"]
        t = np.arange(1, cfg["horizon"] + 1, dtype=float)
        m_tab = m0 * np.cumsum(t ** (-a)) / t
        v_tab = np.cumsum(m0**2 * t ** (-2 * a) + t ** (-2 * b) / 25.0) / t
        m_seq = lambda n: m_tab[np.asarray(n, dtype=int) - 1]  # noqa: E731
        v_seq = lambda n: v_tab[np.asarray(n, dtype=int) - 1]  # noqa: E731
    elif cfg["preset"] is None:
        m_seq = bd.power_sequence(cfg["m"], cfg["m_exponent"])
        v_seq = None if cfg["v"] is None else bd.power_sequence(cfg["v"], cfg["v_exponent"])
    else:
        raise ConfigurationError(f"preset: unknown preset {cfg['preset']!r}")

    if cfg["r"] is not None:
        r_seq = cfg["r"]
    else:
        strategy = cfg["strategy"] or {
            bd.BoundFamily.HOEFFDING_TWO_SIDED: "ftl",
            bd.BoundFamily.HOEFFDING_ONE_SIDED: "ftl",
            bd.BoundFamily.CAPITAL_FIXED_EPS: "ewa",
            bd.BoundFamily.TWO_STEP: "capital_2steps",
        }.get(family, "ons")
        try:
            r_seq = bd.default_regret(strategy, cfg["d"])
        except ConfigurationError as exc:
            raise ConfigurationError(f"strategy: {exc}") from None
    s_seq = bd.oga_regret
    eps = cfg["eps"]
    if family is bd.BoundFamily.CAPITAL_FIXED_EPS and eps is None:
        eps = 1.0 / (2.0 * geometry.B)
    if family is bd.BoundFamily.TWO_STEP:
        # the two-step bound is stated for observations scaled by 1/B
        base_m, base_v = m_seq, v_seq
        m_seq = lambda n: base_m(n) / geometry.B  # noqa: E731
        v_seq = None if base_v is None else (lambda n: base_v(n) / geometry.B**2)  # noqa: E731
    try:
        return bd.PowerBoundSpec(family, geometry, m=m_seq, v=v_seq, r=r_seq, s=s_seq, eps=eps)
    except ConfigurationError as exc:
        raise ConfigurationError(f"family: {exc}") from None


def cmd_bounds(cfg) -> None:
    out = Path(cfg["out"])
    spec = build_bound_spec(cfg)
    n = np.arange(1, cfg["horizon"] + 1)
    u = bd.u_values(spec, n)
    threshold = math.log(1.0 / cfg["alpha"])
    aleph = bd.aleph(u, threshold, cfg["horizon"])
    tau = bd.expected_tau_bound(spec, cfg["rho"], cfg["alpha"], cfg["horizon"])
    write_csv(out / "bounds.csv", BOUNDS_COLUMNS, zip(n, (float(x) for x in u)))
    write_csv(out / "bounds_summary.csv", BOUNDS_SUMMARY_COLUMNS,
              [(spec.family.value, cfg["alpha"], threshold, str(aleph),
                str(tau) if isinstance(tau, bd.BeyondHorizon) else float(tau), cfg["horizon"])])


# --------------------------------------------------------------------------
# Plots
# --------------------------------------------------------------------------

def _figure():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "betting-tests"
    matplotlib.rcParams["svg.fonttype"] = "path"
    return plt


def _save_svg(plt, fig, path) -> None:
    buf = io.StringIO()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    atomic_write_text(path, buf.getvalue())


def plot_sweep(inputs, output, title="") -> None:
    series = {}
    param = None
    for path in inputs:
        for line, row in read_csv(path, SWEEP_COLUMNS):
            param = row["param"]
            value = parse_number(path, line, "value", row["value"])
            tau = parse_number(path, line, "mean_tau", row["mean_tau"])
            err = parse_number(path, line, "stderr_tau", row["stderr_tau"])
            series.setdefault(row["strategy"], []).append((value, tau, err))
    plt = _figure()
    fig, ax = plt.subplots(figsize=(6, 4))
    for name in sorted(series):
        pts = sorted(series[name])
        x, y, e = (np.array(c) for c in zip(*pts))
        ax.errorbar(x, y, yerr=e, marker="o", capsize=3, label=name)
    ax.set_xlabel(param)
    ax.set_ylabel("mean truncated rejection time")
    ax.set_title(title)
    ax.legend()
    _save_svg(plt, fig, output)


def plot_trajectories(inputs, output, alpha: float, title="") -> None:
    alpha = check_alpha(alpha)
    curves = []
    for path in inputs:
        rows = read_csv(path, TRAJECTORY_COLUMNS)
        steps = [parse_number(path, line, "step", row["step"], int) for line, row in rows]
        values = [parse_number(path, line, "logw", row["logw"]) for line, row in rows]
        curves.append((Path(path).stem, steps, values))
    plt = _figure()
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, steps, values in curves:
        ax.plot(steps, values, label=label)
    threshold = math.log(1.0 / alpha)
    ax.axhline(threshold, linestyle="--", color="black", label=f"log(1/alpha) = {threshold:.4g}")
    ax.set_xlabel("t")
    ax.set_ylabel("log-wealth")
    ax.set_title(title)
    ax.legend()
    _save_svg(plt, fig, output)


def cmd_plot(cfg) -> None:
    if not cfg["inputs"]:
        raise ConfigurationError("inputs: at least one CSV file is required")
    if not cfg["output"]:
        raise ConfigurationError("output: an SVG path is required")
    if cfg["kind"] == "sweep":
        plot_sweep(cfg["inputs"], cfg["output"], cfg["title"])
    elif cfg["kind"] == "trajectory":
        plot_trajectories(cfg["inputs"], cfg["output"], cfg["alpha"], cfg["title"])
    else:
        raise ConfigurationError(f"kind: unknown plot kind {cfg['kind']!r}")


# --------------------------------------------------------------------------
# Entry point
# --------------------------------------------------------------------------

COMMANDS = {
    "run-experiment": (cmd_run_experiment, "Monte Carlo rejection times on a synthetic stream"),
    "bounds": (cmd_bounds, "u_n table, aleph and the expected rejection time bound"),
    "adversarial": (cmd_adversarial, "run processes on a deterministic adversarial stream"),
    "compare-forecasters": (cmd_compare_forecasters, "Brier-score comparison of two forecasters"),
    "calibrate-null": (cmd_calibrate_null, "rejection rates on a centred null stream"),
    "plot": (cmd_plot, "render CSV output as SVG"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="betting-tests", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text, argument_default=argparse.SUPPRESS)
        p.add_argument("--config", help="JSON config file (flags override it)")
        for key, (_, default, help_field) in FIELDS[name].items():
            flag = "--" + key.replace("_", "-")
            if key == "trajectories":
                p.add_argument(flag, action="store_const", const=True, help=help_field)
            else:
                p.add_argument(flag, dest=key, help=f"{help_field} (default: {default})")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = vars(parser.parse_args(argv))
    command = args.pop("command")
    config_path = args.pop("config", None)
    try:
        config = load_config(config_path) if config_path else {}
        cfg = resolve(command, args, config)
        _check_common(cfg)
        COMMANDS[command][0](cfg)
    except (BettingTestError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2 if isinstance(exc, ConfigurationError) else 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
