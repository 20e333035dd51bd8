"""Command-line front end.

Each subcommand writes its primary output (CSV or JSON) to ``--out`` or,
without ``--out``, to standard output.  A JSON run manifest follows on
standard output when ``--out`` is a file, and goes to standard error
otherwise so that piped CSV stays clean.

Exit codes: 0 success, 2 usage or configuration error, 3 numeric failure.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time

import numpy as np

from . import __version__, covering, ldpsim, ratefn, smallball
from .errors import ConfigError, NumericError, UnsupportedError
from .func_core import Curve, get_metric, read_curves_csv
from .kernels import get_kernel, validate_kernel

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(f"{self.prog}: {message}")


def _kernel_arg(args):
    if args.kernel == "affine":
        if args.a is None or args.b is None:
            raise ConfigError("--kernel affine needs --a and --b")
        return get_kernel({"kind": "affine", "a": args.a, "b": args.b})
    if args.kernel.lstrip().startswith("{"):
        return get_kernel(json.loads(args.kernel))
    return get_kernel(args.kernel)


def _smallball_arg(args):
    if args.smallball == "exponential_type":
        return smallball.exponential_type(args.p, args.ell)
    return smallball.fractal(args.gamma, args.c, args.ell)


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"expected comma-separated numbers, got {text!r}") from None


def _add_kernel_flags(p):
    p.add_argument("--kernel", default="linear_decay", help="linear_decay, exp_decay, affine or a JSON object")
    p.add_argument("--a", type=float)
    p.add_argument("--b", type=float)


def _add_smallball_flags(p):
    p.add_argument("--smallball", default="fractal", choices=["fractal", "exponential_type"])
    p.add_argument("--gamma", type=float, default=1.0, help="fractal exponent")
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--p", type=float, default=1.0, help="exponential_type exponent")
    p.add_argument("--ell", type=float, default=1.0)


def build_parser():
    parser = _Parser(prog="funcldp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("validate-kernel", help="check a kernel against the support/sign conditions")
    _add_kernel_flags(p)
    p.add_argument("--probes", type=int, default=1024)
    p.add_argument("--out")

    p = sub.add_parser("rate", help="tabulate I(s) by direct quadrature and by parts")
    _add_kernel_flags(p)
    _add_smallball_flags(p)
    p.add_argument("--s-min", type=float, default=1e-3)
    p.add_argument("--s-max", type=float, default=50.0)
    p.add_argument("--points", type=int, default=21, help="rows including s = 0")
    p.add_argument("--out")

    p = sub.add_parser("gamma", help="Gamma rate functional as a JSON report")
    _add_kernel_flags(p)
    _add_smallball_flags(p)
    p.add_argument("--side", choices=ratefn.SIDES, default="abs")
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--t-min", type=float)
    p.add_argument("--t-max", type=float)
    p.add_argument("--samples", action="store_true", help="include the (t, ell I) table")
    p.add_argument("--out")

    p = sub.add_parser("cover", help="greedy xi-net of a curve family CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--xi", type=float, required=True)
    p.add_argument("--xi-grid", help="comma-separated decreasing radii for the alpha fit")
    p.add_argument("--metric", default="l2")
    p.add_argument("--strategy", default="farthest", choices=["farthest", "max_coverage"])
    p.add_argument("--out")

    p = sub.add_parser("simulate", help="Monte Carlo tail table (CSV)")
    p.add_argument("--config", required=True)
    p.add_argument("--mode", choices=["pointwise", "uniform"], default="pointwise")
    p.add_argument("--centers", help="covering JSON from 'cover' (uniform mode)")
    p.add_argument("--seed", type=int)
    p.add_argument("--replicates", type=int)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out")

    p = sub.add_parser("mgf", help="scaled log-MGF check (JSON)")
    p.add_argument("--config", required=True)
    p.add_argument("--t", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--h", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--replicates", type=int)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out")
    return parser


def _cmd_validate_kernel(args):
    rep = validate_kernel(_kernel_arg(args), args.probes)
    return json.dumps(rep.to_dict(), indent=2) + "\n", {}


def _cmd_rate(args):
    k, m = _kernel_arg(args), _smallball_arg(args)
    if args.points < 2 or not 0 < args.s_min < args.s_max:
        raise ConfigError("rate: need --points >= 2 and 0 < --s-min < --s-max")
    s = np.concatenate([[0.0], np.logspace(np.log10(args.s_min), np.log10(args.s_max), args.points - 1)])
    s[1], s[-1] = args.s_min, args.s_max
    quad = ratefn.rate_I(s, 1.0, k, m)
    ibp = ratefn.rate_I_ibp(s, k, m) if m.is_power_law else np.full_like(s, np.nan)
    lines = ["s,I_quadrature,I_ibp,abs_diff"]
    for si, a, b in zip(s, quad, ibp):
        lines.append(f"{float(si)!r},{float(a)!r},{float(b)!r},{float(abs(a - b))!r}")
    return "\n".join(lines) + "\n", {}


def _cmd_gamma(args):
    k, m = _kernel_arg(args), _smallball_arg(args)
    t_range = None
    if args.t_min is not None or args.t_max is not None:
        lo, hi = ratefn.default_t_range(args.lam)
        t_range = (args.t_min if args.t_min is not None else lo, args.t_max if args.t_max is not None else hi)
    rep = ratefn.gamma(args.side, args.lam, args.ell, k, m, t_range)
    return json.dumps(rep.to_dict(include_samples=args.samples), indent=2) + "\n", {}


def _cmd_cover(args):
    grid, _, values = read_curves_csv(args.input)
    points = [Curve(grid, row) for row in values]
    xi_grid = _floats(args.xi_grid) if args.xi_grid else None
    rep = covering.covering_report(points, args.xi, xi_grid, get_metric(args.metric), args.strategy)
    return json.dumps(rep.to_dict(), indent=2) + "\n", {}


def _load_cfg(args):
    try:
        cfg = ldpsim.load_config(args.config)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {args.config}") from None
    over = {}
    if args.seed is not None:
        over["master_seed"] = args.seed
    if args.replicates is not None:
        over["replicates"] = args.replicates
    if args.threads < 1:
        raise ConfigError("--threads must be at least 1")
    return cfg.with_overrides(**over) if over else cfg


def _centers_for(cfg, args):
    if args.centers:
        with open(args.centers) as fh:
            blob = json.load(fh)
        grid = np.asarray(blob["grid"], dtype=float)
        pts = [Curve(grid, c) for c in blob["centers"]]
        return covering.CoveringReport(pts, list(range(len(pts))), float(blob["radius"]), len(pts))
    u = cfg.uniform
    family = covering.segment_family(cfg.design.center, cfg.design.unit_direction if
                                     cfg.design.direction_law == "fixed_direction" else np.ones(len(cfg.design.grid)),
                                     float(u.get("radius", 0.1)), int(u.get("count", 21)), cfg.metric)
    return covering.greedy_net(family, float(u.get("xi", 0.05)), cfg.metric)


def _cmd_simulate(args):
    cfg = _load_cfg(args)
    if args.mode == "uniform":
        table = ldpsim.simulate_uniform(cfg, _centers_for(cfg, args), args.threads)
    else:
        table = ldpsim.simulate_pointwise(cfg, args.threads)
    return table.to_csv(), {"config_hash": cfg.config_hash(), "master_seed": cfg.master_seed}


def _cmd_mgf(args):
    cfg = _load_cfg(args)
    t = args.t if args.t is not None else cfg.mgf.get("t")
    if t is None:
        raise ConfigError("mgf: give --t or mgf.t in the config")
    rep = ldpsim.mgf_check(cfg, float(t), args.n, args.h, args.threads)
    return json.dumps(rep.to_dict(), indent=2) + "\n", {"config_hash": cfg.config_hash(),
                                                         "master_seed": cfg.master_seed}


COMMANDS = {
    "validate-kernel": _cmd_validate_kernel,
    "rate": _cmd_rate,
    "gamma": _cmd_gamma,
    "cover": _cmd_cover,
    "simulate": _cmd_simulate,
    "mgf": _cmd_mgf,
}


def run(argv, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    start = time.perf_counter()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_usage(stderr)
            return EXIT_CONFIG
        text, meta = COMMANDS[args.command](args)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except (ConfigError, UnsupportedError, json.JSONDecodeError, OSError) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_CONFIG
    except NumericError as exc:
        print(f"numeric error: {exc} {json.dumps(exc.diagnostics)}", file=stderr)
        return EXIT_NUMERIC

    outputs = []
    if args.out:
        with open(args.out, "w", newline="\n") as fh:
            fh.write(text)
        outputs.append(args.out)
    else:
        stdout.write(text)
    manifest = {
        "subcommand": args.command,
        "config_hash": meta.get("config_hash") or hashlib.sha256(
            json.dumps(vars(args), sort_keys=True, default=str).encode()).hexdigest(),
        "master_seed": meta.get("master_seed"),
        "version": __version__,
        "outputs": outputs,
        "duration_s": round(time.perf_counter() - start, 6),
    }
    print(json.dumps(manifest), file=stdout if args.out else stderr)
    return EXIT_OK


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
