"""Command-line front end.

Subcommands: sensitivity, validate, histogram, response-curve,
variance-profile.  A JSON config file supplies defaults and individual
flags override it; the resolved config is embedded in every artifact so a
later run can reproduce it byte-for-byte.  Floats are serialized with 17
significant digits everywhere.

Exit codes: 0 success (for validate: all points passed), 2 config error,
3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

import numpy as np

from .config import RunConfig, load_config_file
from .dynamics import MAPS, generate_trajectory, srb_histogram
from .errors import ConfigError, DegenerateTangentError, InvalidStateError
from .response import direct_ruelle_estimate, s3_sensitivity
from .validation import central_difference, fd_tolerance, response_curve

TWO_PI = 2.0 * np.pi


def fmt(x) -> str:
    """17-significant-digit rendering used for all serialized floats."""
    return f"{float(x):.17g}"


def to_json(obj, indent: int = 0) -> str:
    """Deterministic JSON with 17-significant-digit floats."""
    pad = " " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{pad}  {json.dumps(str(k))}: {to_json(v, indent + 2)}'
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + f"\n{pad}}}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [f"{pad}  {to_json(v, indent + 2)}" for v in obj]
        return "[\n" + ",\n".join(items) + f"\n{pad}]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt(obj)
    return json.dumps(obj)


def _write_artifact(path: Optional[str], payload: dict) -> None:
    text = to_json(payload) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _config_comment(config: RunConfig) -> str:
    return "config: " + json.dumps(config.to_dict(), sort_keys=True)


def _parse_param(value: str, map_name: str) -> int:
    names = getattr(MAPS.get(map_name, object), "param_names", ())
    if value in names:
        return names.index(value)
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"--param must be an integer index or one of {list(names)}")


def _parse_floats(text: str) -> tuple:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise ConfigError(f"expected a comma-separated list of numbers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spacesplit",
        description="Linear response of chaotic maps via space-split sensitivity.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("sensitivity", "one sensitivity estimate, written as JSON"),
        ("validate", "compare the estimate against the finite-difference oracle"),
        ("histogram", "empirical-measure histogram CSV"),
        ("response-curve", "ensemble average of J over a parameter grid (CSV)"),
        ("variance-profile", "per-lag variance of the ensemble-tangent baseline (CSV)"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON config file (or artifact embedding one)")
        p.add_argument("--map", help="map name (default baker)")
        p.add_argument("--s", help="comma-separated parameter vector, e.g. 0.1,0,0,0")
        p.add_argument("--param", help="active parameter: index or name (s1..s4)")
        p.add_argument("--observable", help="observable name (default cos4x2)")
        p.add_argument("--N", type=int, help="trajectory length for averaging")
        p.add_argument("--K", type=int, help="number of lag terms")
        p.add_argument("--runup", type=int, help="burn-in steps")
        p.add_argument("--seed", type=int, help="master seed")
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--diagnostics", action="store_true", default=None,
                       help="carry the curvature/density-gradient diagnostics")
        p.add_argument("--uncentered", action="store_true", default=None,
                       help="disable mean-centering of J in the lag correlations")
        p.add_argument("--oracle-delta", type=float, help="FD step in the parameter")
        p.add_argument("--oracle-orbits", type=int, help="oracle orbit count")
        p.add_argument("--oracle-orbit-length", type=int, help="oracle steps per orbit")
        p.add_argument("--oracle-runup", type=int, help="oracle burn-in steps")
        p.add_argument("--grid", help="comma-separated sweep values for the active parameter")
        p.add_argument("--ensemble", type=int, help="ensemble size for the baseline")
        p.add_argument("--bins", type=int, help="histogram bins per axis")
        p.add_argument("--workers", type=int, help="parallel workers for sweeps")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    data = load_config_file(args.config).to_dict() if args.config else {}
    overrides = {
        "map": args.map,
        "observable": args.observable,
        "N": args.N,
        "K": args.K,
        "runup": args.runup,
        "seed": args.seed,
        "oracle_delta": args.oracle_delta,
        "oracle_orbits": args.oracle_orbits,
        "oracle_orbit_length": args.oracle_orbit_length,
        "oracle_runup": args.oracle_runup,
        "ensemble": args.ensemble,
        "bins": args.bins,
        "workers": args.workers,
    }
    for key, value in overrides.items():
        if value is not None:
            data[key] = value
    if args.s is not None:
        data["s"] = _parse_floats(args.s)
    if args.grid is not None:
        data["grid"] = _parse_floats(args.grid)
    if args.param is not None:
        data["param_index"] = _parse_param(args.param, data.get("map", "baker"))
    if args.diagnostics is not None:
        data["diagnostics"] = True
    if args.uncentered is not None:
        data["centered"] = False
    config = RunConfig.from_dict(data).validate()
    if np.any(np.abs(config.s_array) > 0.5):
        print("warning: |s_i| > 0.5 leaves the regime where hyperbolicity "
              "was checked", file=sys.stderr)
    return config


def cmd_sensitivity(config: RunConfig, out: Optional[str]) -> int:
    model = config.build_model()
    J = config.build_observable()
    result = s3_sensitivity(model, config.s_array, config.param_index, J, config)
    payload = result.to_dict()
    payload["config"] = config.to_dict()
    _write_artifact(out, payload)
    print(f"stable={fmt(result.stable)} +- {fmt(result.stderr_stable)}")
    print(f"unstable={fmt(result.unstable)} +- {fmt(result.stderr_unstable)}")
    print(f"total={fmt(result.total)}")
    return 0


def _validate_point(task):
    config_dict, grid_value, fd_seed_key = task
    config = RunConfig.from_dict(config_dict)
    model = config.build_model()
    J = config.build_observable()
    s_point = config.s_array
    s_point[config.param_index] = grid_value
    result = s3_sensitivity(model, s_point, config.param_index, J, config)
    fd_seed = np.random.SeedSequence(entropy=config.seed, spawn_key=(fd_seed_key,))
    fd, se_fd = central_difference(
        model, s_point, config.param_index, config.oracle_delta, J,
        n_orbits=config.oracle_orbits, orbit_length=config.oracle_orbit_length,
        runup=config.oracle_runup, seed=fd_seed)
    se_s3 = result.stderr_stable + result.stderr_unstable
    tol = fd_tolerance(result.stderr_stable + result.stderr_unstable, se_fd, fd)
    return {
        "s": [float(v) for v in s_point],
        "s3_total": result.total,
        "fd": fd,
        "tol": tol,
        "pass": bool(abs(result.total - fd) <= tol),
        "stable": result.stable,
        "unstable": result.unstable,
        "stderr_s3": se_s3,
        "stderr_fd": se_fd,
    }


def cmd_validate(config: RunConfig, out: Optional[str]) -> int:
    grid = config.grid if config.grid is not None else (config.s[config.param_index],)
    tasks = [(config.to_dict(), float(g), i) for i, g in enumerate(grid)]
    if config.workers > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            points = list(pool.map(_validate_point, tasks))
    else:
        points = [_validate_point(t) for t in tasks]
    all_pass = all(p["pass"] for p in points)
    payload = {"points": points, "all_pass": all_pass, "config": config.to_dict()}
    _write_artifact(out, payload)
    for p in points:
        status = "PASS" if p["pass"] else "FAIL"
        print(f"s_k={fmt(p['s'][config.param_index])} s3={fmt(p['s3_total'])} "
              f"fd={fmt(p['fd'])} tol={fmt(p['tol'])} {status}")
    return 0 if all_pass else 1


def cmd_histogram(config: RunConfig, out: Optional[str]) -> int:
    model = config.build_model()
    traj = generate_trajectory(model, config.s_array, config.seed,
                               config.runup, config.N)
    hist = srb_histogram(traj, config.bins, config.bins)
    lines = [f"# {_config_comment(config)}", "x1,x2,p"]
    width = TWO_PI / config.bins
    for i in range(config.bins):
        for j in range(config.bins):
            cx = (i + 0.5) * width
            cy = (j + 0.5) * width
            lines.append(f"{fmt(cx)},{fmt(cy)},{fmt(hist[i, j])}")
    text = "\n".join(lines) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    print(f"histogram: {config.bins}x{config.bins} bins over {config.N} steps,"
          f" max p={fmt(hist.max())}")
    return 0


def cmd_response_curve(config: RunConfig, out: Optional[str]) -> int:
    if config.grid is None:
        raise ConfigError("response-curve requires a grid (--grid)")
    model = config.build_model()
    J = config.build_observable()
    curve = response_curve(
        model, config.param_index, config.grid, J,
        n_orbits=config.oracle_orbits, orbit_length=config.oracle_orbit_length,
        runup=config.oracle_runup, seed=config.seed, base_s=config.s_array,
        workers=config.workers)
    if out:
        curve.to_csv(out, header_comment=_config_comment(config))
    for sv, m, se in zip(curve.grid, curve.means, curve.stderrs):
        print(f"s_k={fmt(sv)} mean={fmt(m)} stderr={fmt(se)}")
    return 0


def cmd_variance_profile(config: RunConfig, out: Optional[str]) -> int:
    model = config.build_model()
    J = config.build_observable()
    result = direct_ruelle_estimate(
        model, config.s_array, config.param_index, J, config.K,
        config.ensemble, config.seed, runup=config.oracle_runup)
    lines = [f"# {_config_comment(config)}", "k,term_mean,term_variance"]
    for k in range(result.K):
        lines.append(f"{k},{fmt(result.per_k_means[k])},{fmt(result.per_k_variances[k])}")
    text = "\n".join(lines) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    print(f"direct estimate={fmt(result.value)} over K={result.K} terms, "
          f"E={result.ensemble_size}")
    return 0


COMMANDS = {
    "sensitivity": cmd_sensitivity,
    "validate": cmd_validate,
    "histogram": cmd_histogram,
    "response-curve": cmd_response_curve,
    "variance-profile": cmd_variance_profile,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = resolve_config(args)
        return COMMANDS[args.command](config, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (InvalidStateError, DegenerateTangentError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
