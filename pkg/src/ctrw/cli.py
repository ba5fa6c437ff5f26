"""Command-line front end.

Every command reads one flat ``key = value`` configuration assembled from,
in increasing priority, ``--config FILE``, ``--set KEY=VALUE`` and the
dedicated flags.  Unknown keys are rejected.  Output is CSV with ``#``
header comments recording the configuration and the library version.

Exit status: 0 success, 1 a validation check failed (``mc-validate``),
2 bad configuration, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from contextlib import contextmanager

import numpy as np

from . import __version__
from .errors import ConfigError, DomainError, NumericalError
from .exit_times import ExitProblem, met_correction, solve_after_jump_met
from .figures import FIGURES
from .models import MODEL_KEYS, models_from_config, parse_config
from .propagator import (
    Numerics,
    accumulated_distribution,
    after_jump_propagator,
    conditioned_propagator,
    general_propagator,
    stationary_propagator,
)
from .renewal import ExcessLifeLaw, RenewalFunction

__all__ = ["main", "run", "build_config", "KEYS"]


def _floats(text):
    return [float(v) for v in str(text).split(",") if v.strip()]


def _opt_float(text):
    return None if str(text).strip().lower() in ("", "none", "auto") else float(text)


# key -> (parser, default)
KEYS = {
    "waiting.kind": (str, "exponential"),
    "waiting.lambda": (float, 1.0),
    "waiting.nu_num": (int, 1),
    "waiting.nu_den": (int, 1),
    "jump.gamma": (float, 1.0),
    "jump.kappa": (float, 0.0),
    "numerics.n_nodes": (int, 364),
    "numerics.omega_max": (_opt_float, None),
    "numerics.tail_threshold": (float, 1e-4),
    "t_min": (float, 0.1),
    "t_max": (float, 10.0),
    "n_t": (int, 100),
    "r": (float, 0.0),
    "r_list": (_floats, [0.0, 1.0, 2.0]),
    "tau": (float, 1.0),
    "tau_min": (float, 0.0),
    "tau_max": (float, 5.0),
    "n_tau": (int, 51),
    "x_min": (_opt_float, None),
    "x_max": (_opt_float, None),
    "n_x": (int, 1024),
    "variant": (str, "general"),
    "a": (float, 0.0),
    "b": (float, 4.0),
    "exit.n_nodes": (int, 64),
    "mc.n_paths": (int, 100_000),
    "mc.seed": (int, 42),
    "which": (str, "fig2"),
    "output": (str, "-"),
}
assert set(MODEL_KEYS) <= set(KEYS)

# flag dest -> key
FLAGS = {
    "kind": "waiting.kind",
    "lam": "waiting.lambda",
    "nu_num": "waiting.nu_num",
    "nu_den": "waiting.nu_den",
    "gamma": "jump.gamma",
    "kappa": "jump.kappa",
    "n_nodes": "numerics.n_nodes",
    "omega_max": "numerics.omega_max",
    "r": "r",
    "tau": "tau",
    "a": "a",
    "b": "b",
    "variant": "variant",
    "n_paths": "mc.n_paths",
    "seed": "mc.seed",
    "which": "which",
    "output": "output",
}

VARIANTS = ("after_jump", "general", "conditioned")


def build_config(file_text=None, sets=(), flags=None) -> dict:
    """Merge file, ``--set`` and flag values and parse every value."""
    raw = parse_config(file_text) if file_text else {}
    for item in sets:
        if "=" not in item:
            raise ConfigError(item, "expected KEY=VALUE")
        key, value = (p.strip() for p in item.split("=", 1))
        raw[key] = value
    for key, value in (flags or {}).items():
        if value is not None:
            raw[key] = value
    for key in raw:
        if key not in KEYS:
            raise ConfigError(key, "unknown configuration key")
    cfg = {}
    for key, (cast, default) in KEYS.items():
        if key in raw:
            try:
                cfg[key] = cast(raw[key])
            except (TypeError, ValueError):
                raise ConfigError(key, f"cannot parse {raw[key]!r}") from None
        else:
            cfg[key] = default
    return cfg


def _numerics(cfg):
    return Numerics(
        n_nodes=cfg["numerics.n_nodes"],
        omega_max=cfg["numerics.omega_max"],
        tail_threshold=cfg["numerics.tail_threshold"],
    )


def _x_grid(cfg, proc):
    g = proc.jump.gamma
    lo = cfg["x_min"] if cfg["x_min"] is not None else -12.0 / g
    hi = cfg["x_max"] if cfg["x_max"] is not None else 12.0 / g
    n = cfg["n_x"]
    if not (hi > lo and n >= 2):
        raise ConfigError("x_min", "need x_min < x_max and n_x >= 2")
    return np.linspace(lo, hi, n)


def _positive(cfg, *keys):
    for k in keys:
        if not cfg[k] > 0:
            raise ConfigError(k, f"must be positive, got {cfg[k]}")


# -- CSV --------------------------------------------------------------------


def _fmt(v):
    if isinstance(v, str):
        return v
    return "%.17g" % v


def write_csv(stream, columns, rows, cfg, extra=()):
    """Write ``#`` header comments, a column row and the data rows."""
    head = [f"# ctrw {__version__}"]
    head += [f"# {k} = {_fmt_cfg(v)}" for k, v in sorted(cfg.items())]
    head += [f"# {line}" for line in extra]
    stream.write("\n".join(head) + "\n")
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(columns)
    writer.writerows([_fmt(v) for v in row] for row in rows)


def _fmt_cfg(v):
    if isinstance(v, list):
        return ",".join(_fmt_cfg(x) for x in v)
    if isinstance(v, float):
        return "%.17g" % v
    return str(v)


@contextmanager
def _open_out(path):
    if path in ("-", ""):
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            yield fh


# -- commands ---------------------------------------------------------------


def cmd_renewal(cfg):
    proc = models_from_config(cfg)
    _positive(cfg, "t_min", "t_max")
    rf = RenewalFunction(proc.waiting)
    ts = np.linspace(cfg["t_min"], cfg["t_max"], cfg["n_t"])
    rows = [(t, rf(t), rf.density(t)) for t in ts]
    with _open_out(cfg["output"]) as fh:
        write_csv(fh, ["t", "m", "m_prime"], rows, cfg)
    return 0


def cmd_excess_life(cfg):
    proc = models_from_config(cfg)
    taus = np.linspace(cfg["tau_min"], cfg["tau_max"], cfg["n_tau"])
    if np.any(taus < 0):
        raise ConfigError("tau_min", "must be >= 0")
    rows = []
    for r in cfg["r_list"]:
        if r < 0:
            raise ConfigError("r_list", f"lags must be >= 0, got {r}")
        law = ExcessLifeLaw(proc.waiting, r)
        mean = law.mean()
        phi, Phi = np.atleast_1d(law.pdf(taus)), np.atleast_1d(law.cdf(taus))
        rows += [(r, t, p, P, mean) for t, p, P in zip(taus, phi, Phi)]
    with _open_out(cfg["output"]) as fh:
        write_csv(fh, ["r", "tau", "phi", "Phi", "mean"], rows, cfg)
    return 0


def _write_propagator(cfg, res):
    F = accumulated_distribution(res, res.x_grid, clip=True)
    rows = list(zip(res.x_grid, res.clipped_density(), F))
    diag = {k: v for k, v in res.diagnostics.items() if k != "jump_count_weights"}
    extra = [f"delta_weight = {res.delta_weight:.17g}", f"mass = {res.mass():.17g}"]
    extra += [f"diagnostic.{k} = {v}" for k, v in sorted(diag.items())]
    with _open_out(cfg["output"]) as fh:
        write_csv(fh, ["x", "density", "F"], rows, cfg, extra)


def cmd_propagator(cfg):
    proc = models_from_config(cfg)
    _positive(cfg, "tau")
    x = _x_grid(cfg, proc)
    num = _numerics(cfg)
    variant = cfg["variant"]
    if variant not in VARIANTS:
        raise ConfigError("variant", f"expected one of {VARIANTS}, got {variant!r}")
    if cfg["r"] < 0:
        raise ConfigError("r", "must be >= 0")
    if variant == "after_jump":
        res = after_jump_propagator(proc, cfg["tau"], x_grid=x, numerics=num)
    elif variant == "general":
        res = general_propagator(proc, cfg["r"], cfg["tau"], x_grid=x, numerics=num)
    else:
        res = conditioned_propagator(proc, cfg["r"], cfg["tau"], x_grid=x, numerics=num)
    _write_propagator(cfg, res)
    return 0


def cmd_stationary(cfg):
    proc = models_from_config(cfg)
    _positive(cfg, "tau")
    res = stationary_propagator(proc, cfg["tau"], x_grid=_x_grid(cfg, proc), numerics=_numerics(cfg))
    _write_propagator(cfg, res)
    return 0


def cmd_met(cfg):
    proc = models_from_config(cfg)
    if not cfg["a"] < cfg["b"]:
        raise ConfigError("a", f"need a < b, got [{cfg['a']}, {cfg['b']}]")
    if cfg["r"] < 0:
        raise ConfigError("r", "must be >= 0")
    if cfg["exit.n_nodes"] < 16:
        raise ConfigError("exit.n_nodes", "must be >= 16")
    sol = solve_after_jump_met(ExitProblem(proc, cfg["a"], cfg["b"], cfg["exit.n_nodes"]))
    corr = met_correction(proc.waiting, cfg["r"])
    x = np.linspace(cfg["a"], cfg["b"], cfg["n_x"])
    T = sol(x)
    rows = [(xi, Ti, corr, Ti + corr) for xi, Ti in zip(x, T)]
    with _open_out(cfg["output"]) as fh:
        write_csv(fh, ["x", "T_after_jump", "correction", "T_total"], rows, cfg)
    return 0


def cmd_mc_validate(cfg):
    from .validation import run_battery

    if cfg["mc.n_paths"] < 2:
        raise ConfigError("mc.n_paths", "must be >= 2")
    checks = run_battery(cfg["mc.seed"], cfg["mc.n_paths"])
    rows = [(c.statistic, c.analytic, c.mc, c.se, c.verdict) for c in checks]
    n_fail = sum(not c.passed for c in checks)
    with _open_out(cfg["output"]) as fh:
        write_csv(fh, ["statistic", "analytic", "mc", "se", "verdict"], rows, cfg,
                  [f"checks = {len(checks)}", f"failed = {n_fail}"])
    return 1 if n_fail else 0


def cmd_figure(cfg):
    which = cfg["which"]
    if which not in FIGURES:
        raise ConfigError("which", f"expected one of {sorted(FIGURES)}, got {which!r}")
    data = FIGURES[which]()
    out_dir = "." if cfg["output"] in ("-", "") else cfg["output"]
    os.makedirs(out_dir, exist_ok=True)
    extra = [f"figure = {which}"]
    extra += [f"param.{k} = {_fmt_cfg(v)}" for k, v in data.params.items()]
    extra += [f"delta_weight[{lab}] = {w:.17g}" for lab, w in zip(data.labels, data.delta_weights)]
    for kind, values in (("density", data.density), ("F", data.F)):
        path = os.path.join(out_dir, f"{which}_{kind}.csv")
        cols = ["x"] + [f"{kind}[{lab}]" for lab in data.labels]
        rows = [(xi, *col) for xi, col in zip(data.x, values.T)]
        with _open_out(path) as fh:
            write_csv(fh, cols, rows, cfg, extra)
        print(path)
    return 0


COMMANDS = {
    "renewal": cmd_renewal,
    "excess-life": cmd_excess_life,
    "propagator": cmd_propagator,
    "stationary": cmd_stationary,
    "met": cmd_met,
    "mc-validate": cmd_mc_validate,
    "figure": cmd_figure,
}


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value configuration file")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override one key")
    common.add_argument("-o", "--output", help="output CSV path ('-' for stdout); a directory for 'figure'")
    model = common.add_argument_group("model")
    model.add_argument("--kind", help="exponential | erlang | gamma")
    model.add_argument("--lambda", dest="lam", help="waiting-time rate")
    model.add_argument("--nu-num", help="shape numerator")
    model.add_argument("--nu-den", help="shape denominator")
    model.add_argument("--gamma", help="inverse jump length")
    model.add_argument("--kappa", help="jump bias in [-1/2, 1/2]")
    model.add_argument("--n-nodes", help="Bromwich nodes")
    model.add_argument("--omega-max", help="Fourier truncation frequency")

    p = argparse.ArgumentParser(prog="ctrw", description="CTRW renewal, propagator and exit-time calculator")
    p.add_argument("--version", action="version", version=f"ctrw {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("renewal", parents=[common], help="m(t) and m'(t)")
    sub.add_parser("excess-life", parents=[common], help="excess-life law on a (r, tau) lattice")
    sp = sub.add_parser("propagator", parents=[common], help="propagator density and distribution")
    sp.add_argument("--r")
    sp.add_argument("--tau")
    sp.add_argument("--variant", help="after_jump | general | conditioned")
    sp = sub.add_parser("stationary", parents=[common], help="stationary-observer propagator")
    sp.add_argument("--tau")
    sp = sub.add_parser("met", parents=[common], help="mean exit time off [a, b]")
    sp.add_argument("--a")
    sp.add_argument("--b")
    sp.add_argument("--r")
    sp = sub.add_parser("mc-validate", parents=[common], help="Monte Carlo cross-validation battery")
    sp.add_argument("--seed")
    sp.add_argument("--n-paths")
    sp = sub.add_parser("figure", parents=[common], help="figure data")
    sp.add_argument("--which", choices=sorted(FIGURES))
    return p


def run(argv=None) -> int:
    parser = _parser()
    args = parser.parse_args(argv)
    flags = {key: getattr(args, dest, None) for dest, key in FLAGS.items()}
    try:
        text = None
        if args.config:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
        cfg = build_config(text, args.set, flags)
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"ctrw: configuration error: {exc}", file=sys.stderr)
        return 2
    except (DomainError, OSError) as exc:
        print(f"ctrw: invalid input: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"ctrw: numerical failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return 3


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
