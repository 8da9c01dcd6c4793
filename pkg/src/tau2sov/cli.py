"""Command-line front end.

``tau2sov verify <suite>`` runs a verification suite and writes a JSON
report; ``tau2sov spectrum`` lists the transfer-matrix eigenvalues found by
exact diagonalization with their determinant-condition residuals;
``tau2sov config`` writes a generated configuration file.

Exit codes: 0 all checks pass, 1 at least one check fails, 2 invalid
arguments, 3 the parameters violate a genericity condition (named in the
message).
"""

from __future__ import annotations

import argparse
import sys
import time
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .numerics import DimensionError, ToleranceProfile
from .report import build_report, load_config, report_to_json, save_config, summarize
from .representation import ConfigError, GenericityError, ParameterError, random_generic_config
from .sov_basis import ModeError
from .suites import DEFAULT_MODE, MODES, SUITES, RunSpec, UsageError, run, screen_config, validate_spec

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_GENERICITY = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    """``argparse`` parser whose errors raise instead of exiting (mapped to exit code 2)."""

    def error(self, message):
        raise UsageError(message)


def _chain_args(p: argparse.ArgumentParser, with_mode: bool = True) -> None:
    p.add_argument("--p", type=int, default=3, help="odd order of the root of unity (default 3)")
    p.add_argument("--pprime", type=int, default=2, help="even p' in q = exp(-i pi p'/p) (default 2)")
    p.add_argument("--N", type=int, default=2, help="number of sites (default 2)")
    p.add_argument("--seed", type=int, default=1, help="random seed (default 1)")
    if with_mode:
        p.add_argument("--mode", choices=MODES, default=None,
                       help="parameter constraints (default: per suite)")
    p.add_argument("--config", default=None, help="configuration file (overrides --p/--pprime/--N)")
    p.add_argument("--allow-large", action="store_true", help="allow p^N above 243")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tau2sov", description="Numerical certification of the cyclic open tau2 chain.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("suite", choices=SUITES + ("all",))
    _chain_args(v)
    v.add_argument("--out", default=None, help="report path (default: report-<suite>.json)")
    d = ToleranceProfile()
    v.add_argument("--rtol-identity", type=float, default=d.rtol_identity)
    v.add_argument("--rtol-spectral", type=float, default=d.rtol_spectral)
    v.add_argument("--rtol-functional", type=float, default=d.rtol_functional)
    v.add_argument("--quiet", action="store_true", help="print only the summary line")

    s = sub.add_parser("spectrum", help="list transfer-matrix eigenvalues with their SoV certificates")
    _chain_args(s, with_mode=False)
    s.add_argument("--mode", choices=("sov", "sov_double"), default=None, help="default sov")

    c = sub.add_parser("config", help="write a generated configuration file")
    _chain_args(c)
    c.add_argument("--out", required=True)
    return parser


def _spec_from_args(args, suite: str) -> RunSpec:
    cfg = load_config(args.config) if args.config else None
    tol = ToleranceProfile(
        rtol_identity=getattr(args, "rtol_identity", ToleranceProfile().rtol_identity),
        rtol_spectral=getattr(args, "rtol_spectral", ToleranceProfile().rtol_spectral),
        rtol_functional=getattr(args, "rtol_functional", ToleranceProfile().rtol_functional),
    )
    return RunSpec(suite=suite, p=args.p, p_prime=args.pprime, N=args.N, seed=args.seed,
                   mode=args.mode, tol=tol, allow_large=args.allow_large, config=cfg)


def _meta(spec: RunSpec, suite: str) -> dict:
    return {"p": spec.p, "p_prime": spec.p_prime, "N": spec.N, "seed": spec.seed,
            "mode": spec.mode or (DEFAULT_MODE[suite] if suite in DEFAULT_MODE else "per-suite"),
            "version": __version__, "suite": suite,
            "tolerances": {"rtol_identity": spec.tol.rtol_identity,
                           "rtol_spectral": spec.tol.rtol_spectral,
                           "rtol_functional": spec.tol.rtol_functional}}


def cmd_verify(args, out=sys.stdout) -> int:
    spec = _spec_from_args(args, args.suite)
    t0 = time.perf_counter()
    spec, records = run(spec)
    report = build_report(records, _meta(spec, args.suite))
    report["meta"]["wall_time_ms"] = int(round(1000 * (time.perf_counter() - t0)))
    path = args.out or f"report-{args.suite}.json"
    with open(path, "w") as fh:
        fh.write(report_to_json(report))
    if not args.quiet:
        print(summarize(records), file=out)
    s = report["summary"]
    print(f"{args.suite}: {s['pass']} passed, {s['fail']} failed -> {path}", file=out)
    return EXIT_OK if s["fail"] == 0 else EXIT_FAIL


def cmd_spectrum(args, out=sys.stdout) -> int:
    from .spectrum import SpectralSetup, ed_spectrum
    spec = validate_spec(_spec_from_args(args, "spectrum"))
    if spec.config is not None:
        cfg = spec.config
    else:
        cfg, _ = random_generic_config(spec.p, spec.p_prime, spec.N, spec.seed, mode=spec.mode or "sov")
    screen_config(cfg)
    setup = SpectralSetup(cfg)
    rep = ed_spectrum(cfg, setup)
    print(f"p={cfg.root.p} p'={cfg.root.p_prime} N={cfg.N} seed={spec.seed} mode={cfg.mode}: "
          f"{rep.count} eigenvalues ({'simple' if rep.simple else 'DEGENERATE'} spectrum)", file=out)
    print("  k  tau(zeta_a^(0)), a = 1..N" + " " * 30 + "normalized |det D_tau(zeta_a^(0))|", file=out)
    ok = rep.simple and rep.count == cfg.dim
    for k, (tau, res) in enumerate(zip(rep.eigenvalues, rep.residuals)):
        vals = "  ".join(f"{v.real:+.6e}{v.imag:+.6e}j" for v in tau.values)
        dets = "  ".join(f"{d:.2e}" for d in res["det"])
        ok = ok and bool(np.all(res["det"] <= spec.tol.rtol_functional))
        print(f"{k:3d}  {vals}    {dets}", file=out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_config(args, out=sys.stdout) -> int:
    spec = validate_spec(_spec_from_args(args, "bulk"))
    cfg, _ = random_generic_config(spec.p, spec.p_prime, spec.N, spec.seed, mode=spec.mode or "general")
    save_config(cfg, args.out)
    print(f"wrote {args.out}", file=out)
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out or sys.stdout
    err = sys.stderr
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise UsageError("a command is required: verify, spectrum or config")
        handler = {"verify": cmd_verify, "spectrum": cmd_spectrum, "config": cmd_config}[args.command]
        return handler(args, out)
    except GenericityError as exc:
        print(f"tau2sov: genericity condition '{exc.condition}' violated: {exc}", file=err)
        return EXIT_GENERICITY
    except (UsageError, ConfigError, ParameterError, ModeError, DimensionError, OSError) as exc:
        print(f"tau2sov: error: {exc}", file=err)
        return EXIT_USAGE


if __name__ == "__main__":   # pragma: no cover
    sys.exit(main())
