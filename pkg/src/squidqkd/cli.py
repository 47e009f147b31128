"""Command-line entry point ``squidqkd``.

Exit codes: 0 success, 1 runtime error, 2 configuration error, 3 validation
failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import protocol
from .analytic import Parity
from .config import ExperimentConfig, default_config, load_config
from .errors import ConfigError, SquidQKDError
from .figures import FIGURE_IDS, SWEEP_VARIANTS, contour_data, figure_tables, provenance, sweep_eta
from .keyrate import distill

EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG, EXIT_VALIDATION = 0, 1, 2, 3


def _config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else default_config()
    return cfg.with_overrides(seed=args.seed, out=args.out,
                              full_numeric=getattr(args, "full_numeric", False))


def _emit(tables, cfg: ExperimentConfig) -> None:
    prov = provenance(cfg.digest, cfg.seed)
    for t in tables:
        path = t.write(cfg.out, prov)
        print(f"  wrote {path} ({len(t.rows)} rows)")


def cmd_figures(args) -> int:
    cfg = _config(args)
    ids = [args.id] if args.id else list(FIGURE_IDS)
    for fig_id in ids:
        print(f"{fig_id}:")
        _emit(figure_tables(fig_id), cfg)
    return EXIT_OK


def cmd_contour(args) -> int:
    cfg = _config(args)
    parities = [Parity(args.parity)] if args.parity else list(Parity)
    for parity in parities:
        print(f"contour ({parity.value}):")
        _emit(contour_data(args.lo, args.hi, args.n, parity), cfg)
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _config(args)
    etas = np.linspace(args.eta_min, 1.0, args.points)
    variants = [args.variant] if args.variant else list(SWEEP_VARIANTS)
    print(f"{'variant':<16}{'zero crossing (eta)':>22}")
    for variant in variants:
        table, cross = sweep_eta(etas, variant=variant, V_A=cfg.source.V_A)
        table.write(cfg.out, provenance(cfg.digest, cfg.seed))
        print(f"{variant:<16}{'none' if cross is None else f'{cross:.6f}':>22}")
    return EXIT_OK


def cmd_run_protocol(args) -> int:
    cfg = _config(args).with_overrides(n_trials=args.n_trials)
    spec = cfg.protocol_spec()
    records = protocol.run_protocol(spec, workers=cfg.workers)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    prov = provenance(cfg.digest, cfg.seed)
    protocol.write_trials_csv(records, out / "trials.csv", prov)
    pairs = protocol.sift(records, absolute=cfg.scheme.absolute)
    eve = protocol.eve_pairs(records)
    rng = np.random.default_rng([cfg.seed, 2 ** 32])
    eta = None if cfg.scheme.absolute else cfg.channel.eta
    report, key = distill(pairs, rng, eta=eta, n_slices=cfg.reconcile.n_slices,
                          postselect=cfg.reconcile.postselect, passes=cfg.reconcile.passes,
                          eve_pairs=eve)
    (out / "report.json").write_text(report.to_json(indent=2) + "\n")
    print(f"rounds          {report.n_rounds}")
    print(f"C_AB            {report.c_ab:.4f} +/- {report.c_ab_stderr:.4f}")
    print(f"chi             {report.chi:.4f}")
    print(f"I(A:B)          {report.i_ab:.4f} bits")
    print(f"I(A:E) bound    {report.i_ae:.4f} bits")
    print(f"delta I         {report.delta_i:.4f} bits")
    print(f"secure          {report.secure}")
    print(f"reconciled bits {report.reconciled_key_bits}")
    print(f"leaked bits     {report.leaked_bits}")
    print(f"key bits        {report.key_bits}")
    return EXIT_OK


def cmd_validate(args) -> int:
    from .validation import run_all
    seed = args.seed if args.seed is not None else 0
    checks = run_all(seed, quick=args.quick)
    for c in checks:
        print(c.line())
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_VALIDATION


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="experiment config file (INI)")
    common.add_argument("--seed", type=int, help="override run.seed")
    common.add_argument("--out", help="output directory")

    p = argparse.ArgumentParser(prog="squidqkd", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("figures", parents=[common], help="write figure data as CSV")
    f.add_argument("--id", choices=FIGURE_IDS, help="single figure (default: all)")
    f.set_defaults(func=cmd_figures)

    r = sub.add_parser("run-protocol", parents=[common], help="Monte-Carlo run and key distillation")
    r.add_argument("--full-numeric", action="store_true", help="disable the coherent-label fast path")
    r.add_argument("--n-trials", type=int, help="override source.n_trials")
    r.set_defaults(func=cmd_run_protocol)

    s = sub.add_parser("sweep-eta", parents=[common], help="secure rate versus transmittance")
    s.add_argument("--variant", choices=SWEEP_VARIANTS)
    s.add_argument("--eta-min", type=float, default=0.01)
    s.add_argument("--points", type=int, default=100)
    s.set_defaults(func=cmd_sweep)

    c = sub.add_parser("contour", parents=[common], help="cat-state squeezing maps and contours")
    c.add_argument("--parity", choices=[x.value for x in Parity])
    c.add_argument("--lo", type=float, default=-2.0)
    c.add_argument("--hi", type=float, default=2.0)
    c.add_argument("--n", type=int, default=201)
    c.set_defaults(func=cmd_contour)

    v = sub.add_parser("validate", parents=[common], help="run the analytic-vs-numeric oracle suite")
    v.add_argument("--quick", action="store_true", help="smaller sample sizes")
    v.set_defaults(func=cmd_validate)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SquidQKDError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
