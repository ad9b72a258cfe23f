"""Command-line interface: ``ccscen <command> ...``.

Exit codes: 0 success, 1 usage error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import enum
import json
import sys

import numpy as np

from . import __version__
from .bench import ExperimentConfig, emit, render, run_experiment
from .divergence import ToleranceRule, select_delta
from .errors import CCScenError, StageTwoUnnecessary
from .generating import GENERATOR_NAMES, P0_CHOICES, d_data, default_generator, np_worst_power
from .models import ExponentialFamily, GaussianFamily, calibrate, load_csv, mle
from .sizes import SizeRequest, fast_sizes, n_exact


class Command(enum.Enum):
    SIZES = "sizes"
    TRANSLATE = "translate"
    CALIBRATE = "calibrate"
    DDATA = "ddata"
    NP_EXAMPLE = "np-example"
    RUN = "run"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _out(args, human: str, payload: dict):
    if args.format == "json":
        print(json.dumps(payload, sort_keys=True))
    else:
        print(human)


def _fast_or_none(delta, beta, dim):
    try:
        return fast_sizes(delta, beta, dim)
    except StageTwoUnnecessary as exc:
        return exc.n1, 0


def cmd_sizes(args):
    if args.fast:
        n1, n2 = _fast_or_none(args.eps, args.beta, args.dim)
        _out(args, f"n1 {n1}\nn2 {n2}\ntotal {n1 + n2}", {"n1": n1, "n2": n2, "total": n1 + n2})
    else:
        N = n_exact(SizeRequest(args.eps, args.beta, args.dim))
        _out(args, str(N), {"N_exact": N})


def cmd_translate(args):
    fam = GaussianFamily.identity(args.dim)
    lam = calibrate(fam, np.zeros(args.dim), args.n, args.alpha).radius
    delta = select_delta(args.eps, lam, args.rule)
    _out(args, f"lambda {lam:.6g}\ndelta_epsilon {delta:.4e}",
         {"lambda": lam, "delta_epsilon": delta, "rule": ToleranceRule.parse(args.rule).value})


def cmd_calibrate(args):
    data = load_csv(args.data)
    fam = ExponentialFamily(data.shape[1]) if args.family == "exponential" \
        else GaussianFamily(args.variance * np.eye(data.shape[1]))
    theta = mle(fam, data)
    uset = calibrate(fam, theta, data.shape[0], args.alpha)
    human = "theta_hat " + " ".join(f"{v:.6g}" for v in theta) + f"\nn {data.shape[0]}\nradius {uset.radius:.6g}"
    _out(args, human, {"theta_hat": theta.tolist(), "n": int(data.shape[0]), "radius": uset.radius})


def cmd_ddata(args):
    center = np.zeros(args.dim)
    fam = GaussianFamily.identity(args.dim)
    uset = calibrate(fam, center, args.n, args.alpha, form=args.set_form)
    gen = default_generator(args.generator, center, args.n, args.alpha, args.dim)
    dd = d_data(gen, uset)
    delta = select_delta(args.eps, dd, args.rule)
    n_so = n_exact(SizeRequest(delta, args.beta, args.dim))
    n1, n2 = _fast_or_none(delta, args.beta, args.dim)
    human = f"d_data {dd:.5g}\ndelta_epsilon {delta:.4e}\nN_so {n_so}\nN_fast {n1 + n2}"
    _out(args, human, {"variant": args.generator, "d_data": dd, "delta_epsilon": delta,
                       "N_so": n_so, "N_fast": n1 + n2, "n1": n1, "n2": n2})


def cmd_np_example(args):
    power = np_worst_power(args.p0, args.theta_max, args.delta)
    _out(args, f"{power:.4f}", {"variant": args.p0, "power": power, "delta": args.delta})


def cmd_run(args):
    exp = ExperimentConfig.from_json(args.config)
    workers = args.workers if args.workers is not None else int(exp.raw.get("workers", 1))
    table = run_experiment(exp, args.trials, args.seed, workers=workers)
    if args.out:
        emit(table, args.out, args.format if args.format in ("csv", "json") else "csv")
    sys.stdout.write(render(table, "json" if args.format == "json" else "csv"))


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ccscen", description="Data-driven scenario sizes and experiments.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, fn, help_):
        sp = sub.add_parser(Command(name).value, help=help_)
        sp.set_defaults(fn=fn)
        return sp

    def fmt(sp, choices=("text", "json")):
        sp.add_argument("--format", choices=choices, default=choices[0])

    rules = [r.value for r in ToleranceRule]

    sp = add("sizes", cmd_sizes, "scenario sample sizes")
    sp.add_argument("--eps", type=float, required=True)
    sp.add_argument("--beta", type=float, required=True)
    sp.add_argument("--dim", type=int, required=True)
    sp.add_argument("--fast", action="store_true", help="two-stage FAST sizes")
    fmt(sp)

    sp = add("translate", cmd_translate, "set radius and translated tolerance")
    sp.add_argument("--eps", type=float, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--dim", type=int, required=True)
    sp.add_argument("--rule", choices=rules, default="closed-form")
    fmt(sp)

    sp = add("calibrate", cmd_calibrate, "MLE and set radius from a CSV file")
    sp.add_argument("--data", required=True)
    sp.add_argument("--alpha", type=float, default=0.05)
    sp.add_argument("--family", choices=("gaussian", "exponential"), default="gaussian")
    sp.add_argument("--variance", type=float, default=1.0, help="known isotropic variance")
    fmt(sp)

    sp = add("ddata", cmd_ddata, "worst-case divergence of a generator and the implied sizes")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--alpha", type=float, default=0.05)
    sp.add_argument("--dim", type=int, required=True)
    sp.add_argument("--generator", choices=GENERATOR_NAMES, default="pointmass")
    sp.add_argument("--eps", type=float, default=0.05)
    sp.add_argument("--beta", type=float, default=0.01)
    sp.add_argument("--rule", choices=rules, default="closed-form")
    sp.add_argument("--set-form", choices=("fisher", "divergence"), default="fisher")
    fmt(sp)

    sp = add("np-example", cmd_np_example, "worst-case Neyman-Pearson power")
    sp.add_argument("--p0", choices=P0_CHOICES, default="stdnormal")
    sp.add_argument("--delta", type=float, default=0.05)
    sp.add_argument("--theta-max", type=float, default=1.0)
    fmt(sp)

    sp = add("run", cmd_run, "run an experiment from a JSON config")
    sp.add_argument("--config", required=True)
    sp.add_argument("--trials", type=int)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out")
    sp.add_argument("--workers", type=int)
    fmt(sp, ("csv", "json"))
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    try:
        args.fn(args)
    except (CCScenError, ValueError, OSError) as exc:
        print(f"ccscen {args.command}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
