"""Command-line entry point: ``moore-rs <command> [options]``.

Every CSV starts with ``# key=value`` comment lines holding the effective
configuration, so a run can be repeated from its output alone.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time

import numpy as np

from .diagnostics import (AcceptanceCurvePoint, acceptance_sweep, lmhs_bw_experiment,
                          mse_protocol, splitmix64)
from .envelope import Partition, Scheme
from .errors import InvalidSpec, MooreError, ParseError
from .interval import format_box, parse_box
from .sampler import TrioSampler
from .targets import FormulaSpec, build_target, named_spec, true_mean_oracle

_COMMANDS = ("sample", "sweep", "compare", "mse", "lmhs", "partition-dump")


class UsageError(Exception):
    pass


def _int_list(text):
    try:
        return [int(float(v)) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text):
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _common(p: argparse.ArgumentParser):
    g = p.add_argument_group("target")
    g.add_argument("--target", help="built-in target name (g1, g2, g5, g5p, g5pp, g5hat, levy, "
                                    "needle, rosenbrock, witch, demo)")
    g.add_argument("--formula", help="target shape as a formula in x1..xN")
    g.add_argument("--domain", help="domain box, e.g. '[-5,5]x[0,1]' or '[-10,10]^3'")
    g.add_argument("--param", action="append", default=None, metavar="KEY=VALUE",
                   help="target parameter override, repeatable (e.g. T=40, sigma2=0.01)")
    p.add_argument("--config", help="JSON file of option values; command-line flags override it")
    p.add_argument("--scheme", default="integral", choices=[s.value for s in Scheme])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-", help="output CSV path ('-' for stdout)")
    p.add_argument("--workers", type=int, default=1, help="worker processes (mse only)")
    p.add_argument("--timing", action="store_true",
                   help="record cpu_seconds; off by default so reruns are byte-identical")


def _sizing(p):
    p.add_argument("--size", type=int, default=None, help="partition size (number of boxes)")
    p.add_argument("--refine-budget", type=int, default=None,
                   help="number of bisections (size = budget + 1); alternative to --size")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="moore-rs",
                                     description="Rejection sampling with interval envelopes.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="draw MRS samples with IS weights and IMHS marks")
    _common(p)
    _sizing(p)
    p.add_argument("--n", type=int, default=1000, help="number of MRS-accepted samples")
    p.add_argument("--max-trials", type=int, default=None)
    p.add_argument("--all-proposals", action="store_true",
                   help="write every proposal, not only the MRS-accepted ones")

    for name, text in (("sweep", "acceptance against partition size for one scheme"),
                       ("compare", "acceptance curves of all three schemes")):
        p = sub.add_parser(name, help=text)
        _common(p)
        p.add_argument("--sizes", type=_int_list, default=[1, 10, 100, 1000])
        p.add_argument("--max-accepts", type=int, default=10_000)
        p.add_argument("--max-trials", type=int, default=100_000)

    p = sub.add_parser("mse", help="MSE of MRS, IS and IMHS mean estimates")
    _common(p)
    p.add_argument("--sizes", type=_int_list, default=[100, 1000])
    p.add_argument("--n-mrs", type=int, default=100, help="MRS acceptances per replicate")
    p.add_argument("--reps", type=int, default=500)
    p.add_argument("--true-mean", type=_float_list, default=None,
                   help="known mean; defaults to the analytic or quadrature value")

    p = sub.add_parser("lmhs", help="local Metropolis chains with the B/W burn-in rule")
    _common(p)
    p.add_argument("--cube-side", type=float, default=6.0)
    p.add_argument("--chains", type=int, default=4)
    p.add_argument("--replicates", type=int, default=1)
    p.add_argument("--check-every", type=int, default=50)
    p.add_argument("--threshold", type=float, default=0.05)
    p.add_argument("--max-burn-in", type=int, default=50_000)

    p = sub.add_parser("partition-dump", help="write the partition boxes and enclosures")
    _common(p)
    _sizing(p)
    return parser


# ---------------------------------------------------------------------------
# helpers

def _parse_value(text):
    try:
        return json.loads(text)
    except ValueError:
        return text


def _spec(args):
    spec = _resolve_spec(args)
    args.effective_domain = format_box(spec.domain)
    return spec


def _resolve_spec(args):
    params = {}
    for item in args.param or []:
        if "=" not in item:
            raise UsageError(f"--param expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        params[k.strip()] = _parse_value(v.strip())
    if args.formula and args.target:
        raise UsageError("give either --target or --formula, not both")
    if args.formula:
        if not args.domain:
            raise UsageError("--formula needs --domain")
        if params:
            raise UsageError("--param applies to built-in targets only")
        return FormulaSpec(args.formula, _domain(args.domain))
    if not args.target:
        raise UsageError("one of --target or --formula is required")
    domain = _domain(args.domain) if args.domain else None
    return named_spec(args.target, domain=domain, **params)


def _domain(text):
    try:
        return parse_box(text)
    except ValueError as exc:
        raise UsageError(f"bad --domain {text!r}: {exc}") from None


def _size(args, default=1000):
    if args.size is not None and args.refine_budget is not None:
        raise UsageError("give either --size or --refine-budget, not both")
    if args.refine_budget is not None:
        size = args.refine_budget + 1
    else:
        size = default if args.size is None else args.size
    if size < 1:
        raise UsageError("partition size must be at least 1")
    return size


def _num(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


class _Output:
    """CSV writer that prefixes the effective configuration as comment lines."""

    def __init__(self, args):
        self.path = args.out
        self.fh = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
        for k, v in sorted(vars(args).items()):
            if k in ("func", "config_values"):
                continue
            self.fh.write(f"# {k}={json.dumps(v)}\n")
        self.writer = csv.writer(self.fh, lineterminator="\n")

    def row(self, values):
        self.writer.writerow([v if isinstance(v, str) else _num(v) for v in values])

    def close(self):
        if self.fh is not sys.stdout:
            self.fh.close()
        else:
            self.fh.flush()


def _log(msg):
    print(msg, file=sys.stderr)


def _cpu(args, seconds):
    return seconds if args.timing else "NA"


# ---------------------------------------------------------------------------
# commands

def cmd_sample(args) -> int:
    spec = _spec(args)
    target = build_target(spec)
    t0 = time.perf_counter()
    part = Partition(target, spec.domain, args.scheme).refine_to(_size(args))
    batch = TrioSampler(target, part, args.seed).draw_until(args.n, args.max_trials)
    out = _Output(args)
    n = spec.domain.n
    out.row([f"x{k + 1}" for k in range(n)] + ["weight", "mrs", "imhs"])
    rows = range(len(batch)) if args.all_proposals else np.flatnonzero(batch.mrs)
    for i in rows:
        out.row([*batch.points[i], batch.weight[i], batch.mrs[i], batch.imhs[i]])
    out.close()
    _log(f"partition size {len(part)}, guaranteed acceptance >= {part.acceptance_bounds().lo:.6g}")
    _log(f"accepted {batch.n_accepted} of {len(batch)} proposals "
         f"(acceptance {batch.acceptance:.6g}) in {time.perf_counter() - t0:.3f} s")
    if batch.envelope_violations:
        _log(f"warning: {batch.envelope_violations} points exceeded the envelope")
        return 1
    return 0


def _sweep_rows(out, args, spec, target, scheme, prefix=()):
    pts = acceptance_sweep(target, spec.domain, scheme, args.sizes, args.max_accepts,
                           args.max_trials, args.seed)
    for c in pts:
        out.row([*prefix, c.partition_size, c.guaranteed_lower_bound, c.empirical_acceptance,
                 c.n_trials, c.n_accepted, _cpu(args, c.cpu_seconds)])
    return pts


def cmd_sweep(args) -> int:
    spec = _spec(args)
    target = build_target(spec)
    out = _Output(args)
    out.row(AcceptanceCurvePoint.header())
    pts = _sweep_rows(out, args, spec, target, args.scheme)
    out.close()
    _log(f"final acceptance {pts[-1].empirical_acceptance:.6g} at size {pts[-1].partition_size}")
    return 0


def cmd_compare(args) -> int:
    spec = _spec(args)
    target = build_target(spec)
    out = _Output(args)
    out.row(["scheme"] + AcceptanceCurvePoint.header())
    for scheme in Scheme:
        pts = _sweep_rows(out, args, spec, target, scheme, (scheme.value,))
        _log(f"{scheme.value}: acceptance {pts[-1].empirical_acceptance:.6g} "
             f"at size {pts[-1].partition_size}")
    out.close()
    return 0


def _true_mean(args, spec):
    if args.true_mean is not None:
        if len(args.true_mean) != spec.dimension:
            raise UsageError(f"--true-mean needs {spec.dimension} values")
        return args.true_mean
    if hasattr(spec, "analytic_mean"):
        return spec.analytic_mean()
    return true_mean_oracle(spec)


def cmd_mse(args) -> int:
    spec = _spec(args)
    target = build_target(spec)
    mu = _true_mean(args, spec)
    part = Partition(target, spec.domain, args.scheme)
    out = _Output(args)
    out.row(["partition_size", "guaranteed_lower_bound", "empirical_acceptance", "mse_mrs",
             "mse_is", "mse_imhs", "se_mrs", "se_is", "se_imhs", "cpu_seconds"])
    for k, size in enumerate(args.sizes):
        t0 = time.process_time()
        part.refine_to(size)
        r = mse_protocol(target, part, mu, args.n_mrs, args.reps, splitmix64(args.seed, k),
                         args.workers)
        se = r.standard_errors()
        out.row([len(part), part.acceptance_bounds().lo, r.acceptance, r.mse_mrs, r.mse_is,
                 r.mse_imhs, se["mrs"], se["is"], se["imhs"], _cpu(args, time.process_time() - t0)])
        _log(f"size {len(part)}: acceptance {r.acceptance:.4g}, MSE mrs {r.mse_mrs:.4g} "
             f"is {r.mse_is:.4g} imhs {r.mse_imhs:.4g}")
    out.close()
    return 0


def cmd_lmhs(args) -> int:
    spec = _spec(args)
    target = build_target(spec)
    n = spec.domain.n
    out = _Output(args)
    out.row(["replicate", "chain", "burn_in", "run_length", "acceptance_rate"]
            + [f"mean_x{k + 1}" for k in range(n)])
    for rep in range(args.replicates):
        r = lmhs_bw_experiment(target, spec.domain, args.cube_side, splitmix64(args.seed, rep),
                               args.chains, check_every=args.check_every,
                               threshold=args.threshold, max_burn_in=args.max_burn_in)
        burn = "NA" if r.burn_in is None else r.burn_in
        for c, m in enumerate(r.post_means):
            out.row([rep, c, burn, r.run_length, r.acceptance_rate, *m])
        _log(f"replicate {rep}: burn-in {burn}, chain means of x1 "
             + " ".join(f"{v:.3f}" for v in r.post_means[:, 0]))
    out.close()
    return 0


def cmd_partition_dump(args) -> int:
    spec = _spec(args)
    target = build_target(spec)
    part = Partition(target, spec.domain, args.scheme).refine_to(_size(args, default=100))
    out = _Output(args)
    out.row(part.header())
    for r in part.rows():
        out.row(r)
    out.close()
    _log(f"{len(part)} boxes, guaranteed acceptance >= {part.acceptance_bounds().lo:.6g}")
    return 0


_HANDLERS = {"sample": cmd_sample, "sweep": cmd_sweep, "compare": cmd_compare, "mse": cmd_mse,
             "lmhs": cmd_lmhs, "partition-dump": cmd_partition_dump}


def _load_config(parser, argv):
    """Apply --config JSON values as subcommand defaults so flags still win."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    with open(known.config) as fh:
        values = json.load(fh)
    if not isinstance(values, dict):
        raise UsageError("config file must hold a JSON object")
    command = next((a for a in argv if a in _COMMANDS), None)
    sub = parser._subparsers._group_actions[0].choices[command]
    dests = {a.dest for a in sub._actions}
    norm = {k.replace("-", "_"): v for k, v in values.items()}
    unknown = set(norm) - dests
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    if isinstance(norm.get("sizes"), str):
        norm["sizes"] = _int_list(norm["sizes"])
    if isinstance(norm.get("param"), dict):
        norm["param"] = [f"{k}={json.dumps(v)}" for k, v in norm["param"].items()]
    sub.set_defaults(**norm)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _load_config(parser, argv)
        args = parser.parse_args(argv)
        return _HANDLERS[args.command](args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (UsageError, ParseError, InvalidSpec, OSError, json.JSONDecodeError) as exc:
        print(f"moore-rs: error: {exc}", file=sys.stderr)
        return 2
    except (MooreError, ArithmeticError, ValueError) as exc:
        print(f"moore-rs: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
