"""Command-line front end.

Subcommands::

    nqobc generate --kind {flat,csc,surface,product,random} ... --out T.json
    nqobc check T.json [--restarts 100] [--tol-violation 1e-8] --out cert.json
    nqobc haar T.json [--samples 200000] [--weights W.json] --out report.json [--csv checks.csv]
    nqobc suite {theorem31,flatness-n3,lemma43} --out report.json [--csv summary.csv]

Exit codes: 0 success (for ``check``: no violation found), 1 input error,
2 a verification check failed, 3 ``check`` found a violation.

The seed comes from ``--seed``, else the ``NQOBC_SEED`` environment
variable, else 0. Every output file records the seed and configuration.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import experiments, haar, tensor
from .certify import CertifyConfig, certify_nqobc

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_FAILED = 2
EXIT_VIOLATION = 3

log = logging.getLogger("nqobc")


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _seed(args):
    if args.seed is not None:
        return args.seed
    env = os.environ.get("NQOBC_SEED")
    if env:
        try:
            return int(env, 0)
        except ValueError:
            raise InputError(f"NQOBC_SEED is not an integer: {env!r}") from None
    return 0


def _threads(args):
    return args.threads or os.cpu_count() or 1


def _emit(text, out):
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _dump(obj):
    return json.dumps(obj, indent=2) + "\n"


def _parse_factor(token):
    kind, _, rest = token.strip().partition(":")
    parts = rest.split(":") if rest else []
    try:
        if kind == "s" and len(parts) == 1:
            return tensor.surface(float(parts[0]))
        if kind == "f" and len(parts) == 1:
            return tensor.flat(int(parts[0]))
        if kind == "c" and len(parts) == 2:
            return tensor.constant_hsc(int(parts[0]), float(parts[1]))
    except ValueError as exc:
        raise InputError(f"bad factor {token!r}: {exc}") from None
    raise InputError(f"bad factor {token!r}; use s:<h>, f:<n> or c:<n>:<c>")


def cmd_generate(args):
    kind = args.kind
    if kind in ("flat", "csc", "random") and args.n is None:
        raise InputError(f"--kind {kind} needs --n")
    try:
        if kind == "flat":
            T = tensor.flat(args.n)
        elif kind == "csc":
            T = tensor.constant_hsc(args.n, args.c)
        elif kind == "surface":
            T = tensor.surface(args.h)
        elif kind == "product":
            if not args.factors:
                raise InputError("--kind product needs --factors")
            T = tensor.product(*[_parse_factor(tok) for tok in args.factors.split(",")])
        else:
            T = tensor.random_kahler(args.n, _seed(args), args.scale)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    data = tensor.to_dict(T)
    params = {"flat": ["n"], "csc": ["n", "c"], "surface": ["h"], "product": ["factors"], "random": ["n", "scale"]}[kind]
    data["generator"] = {"kind": kind, **{k: getattr(args, k) for k in params}, "seed": _seed(args)}
    _emit(json.dumps(data) + "\n", args.out)
    log.info("wrote n=%d tensor, scalar curvature %.17g", T.n, tensor.scalar(T))
    return EXIT_OK


def _load(path):
    try:
        return tensor.load_tensor(path)
    except (OSError, ValueError) as exc:
        raise InputError(f"{path}: {exc}") from None


def cmd_check(args):
    T = _load(args.tensor)
    try:
        cfg = CertifyConfig(restarts=args.restarts, max_iters=args.max_iters,
                            violation_tolerance=args.tol_violation, seed=_seed(args),
                            method=args.method, threads=_threads(args))
        cert = certify_nqobc(T, cfg)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    out = cert.to_dict()
    out["tensor"] = str(args.tensor)
    _emit(_dump(out), args.out)
    log.info("%s after %d restarts, min eigenvalue %.6g", cert.status, cert.restarts, cert.min_lambda)
    return EXIT_VIOLATION if cert.violation else EXIT_OK


def cmd_haar(args):
    T = _load(args.tensor)
    seed = _seed(args)
    threads = _threads(args)
    try:
        A = haar.bisectional_samples(T, args.samples, seed, threads)
        reports = [
            haar.verify_claim(T, seed=seed, samples=A),
            haar.verify_scalar_identity(T, seed=seed, samples=A),
        ]
        if args.weights:
            a = np.asarray(json.loads(Path(args.weights).read_text()), dtype=np.float64)
            reports.append(haar.verify_weighted_identity(T, a, seed=seed, samples=A))
    except (OSError, ValueError) as exc:
        raise InputError(str(exc)) from None
    passed = all(r.passed for r in reports)
    out = {
        "tensor": str(args.tensor),
        "seed": seed,
        "samples": args.samples,
        "passed": passed,
        "K": reports[0].values["K"].to_dict(),
        "reports": [r.to_dict() for r in reports],
    }
    _emit(_dump(out), args.out)
    if args.csv:
        rows = [r.to_csv().splitlines() for r in reports]
        Path(args.csv).write_text("\n".join([rows[0][0]] + [line for r in rows for line in r[1:]]) + "\n")
    log.info("K = %.6g +- %.2g, %s", out["K"]["mean"], out["K"]["stderr"], "pass" if passed else "FAIL")
    return EXIT_OK if passed else EXIT_FAILED


def cmd_suite(args):
    if args.name not in experiments.SUITES:
        raise InputError(f"unknown suite {args.name!r}; choose from {', '.join(experiments.SUITES)}")
    kwargs = {}
    if args.restarts is not None:
        kwargs["restarts"] = args.restarts
    rep = experiments.run_suite(args.name, _seed(args), **kwargs)
    _emit(_dump(rep.to_dict()), args.out)
    if args.csv:
        Path(args.csv).write_text(rep.to_csv())
    log.info("suite %s: %s in %.1fs", rep.suite, "pass" if rep.passed else "FAIL", rep.elapsed_s)
    return EXIT_OK if rep.passed else EXIT_FAILED


def build_parser():
    p = _Parser(prog="nqobc", description="Kähler curvature tensors: NQOBC certification and Haar-average checks.",
                epilog="exit codes: 0 ok or no violation found, 1 input error, 2 a check failed, 3 violation found")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--seed", type=lambda s: int(s, 0), default=None, help="64-bit seed (default $NQOBC_SEED or 0)")
        sp.add_argument("--out", default=None, help="output file (default stdout)")

    g = sub.add_parser("generate", help="write a model or random tensor file")
    g.add_argument("--kind", required=True, choices=["flat", "csc", "surface", "product", "random"])
    g.add_argument("--n", type=int)
    g.add_argument("--c", type=float, default=1.0, help="holomorphic sectional curvature for csc")
    g.add_argument("--h", type=float, default=0.0, help="component of a surface factor")
    g.add_argument("--factors", help="comma list of s:<h>, f:<n>, c:<n>:<c>")
    g.add_argument("--scale", type=float, default=1.0)
    common(g)
    g.set_defaults(func=cmd_generate)

    c = sub.add_parser("check", help="search for a frame violating NQOBC")
    c.add_argument("tensor")
    c.add_argument("--restarts", type=int, default=100)
    c.add_argument("--max-iters", type=int, default=200)
    c.add_argument("--tol-violation", type=float, default=1e-8)
    c.add_argument("--method", choices=["descent", "random"], default="descent")
    c.add_argument("--threads", type=int, default=None)
    common(c)
    c.set_defaults(func=cmd_check)

    h = sub.add_parser("haar", help="Monte Carlo check of the Haar-average identities")
    h.add_argument("tensor")
    h.add_argument("--samples", type=int, default=haar.DEFAULT_SAMPLES)
    h.add_argument("--weights", help="JSON n x n weight matrix for the weighted identity")
    h.add_argument("--threads", type=int, default=None)
    h.add_argument("--csv", help="CSV export of every pairwise check")
    common(h)
    h.set_defaults(func=cmd_haar)

    s = sub.add_parser("suite", help="run a seeded experiment suite")
    s.add_argument("name", help=", ".join(experiments.SUITES))
    s.add_argument("--restarts", type=int, default=None)
    s.add_argument("--csv", help="summary CSV (case, expected, observed, pass)")
    common(s)
    s.set_defaults(func=cmd_suite)
    return p


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # usage errors and --help, reported as a return code like everything else
        return exc.code if isinstance(exc.code, int) else EXIT_INPUT
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except InputError as exc:
        print(f"nqobc: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
