"""Command-line entry point: ``ttd-precoder <command> [options]``.

Exit codes: 0 success, 1 invalid configuration, 2 verification failure.
"""

from __future__ import annotations

import argparse
import contextlib
import logging
import sys

from . import harness
from .closed_form import max_nt_bound, max_nt_criterion, min_tmax_criterion
from .harness import ConfigError

EXIT_OK, EXIT_CONFIG, EXIT_VERIFY = 0, 1, 2


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", help="key = value scenario file (defaults: 300 GHz, 30 GHz, K=129, "
                                           "N_t=256, M=16, psi=0.8, t_max=340 ps)")
    common.add_argument("--out", help="output CSV path (default: stdout)")
    common.add_argument("--seed", type=int, help="RNG seed; overrides the scenario file")
    common.add_argument("--workers", type=int, default=1, help="worker processes for sweeps")
    common.add_argument("--per-subcarrier", action="store_true", help="emit one row per subcarrier")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="ttd-precoder", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gain-pattern", parents=[common], help="carrier-matched beam gain per subcarrier")
    p.add_argument("--nt-list", type=_int_list, default=[16, 128, 1024])

    p = sub.add_parser("sweep-nt", parents=[common], help="average gain versus antenna count")
    p.add_argument("--nt-list", type=_int_list, default=list(harness.FIG3_NT))
    p.add_argument("--designers", default="theorem1,baseline")

    p = sub.add_parser("sweep-tmax", parents=[common], help="average gain versus delay bound")
    p.add_argument("--tmax-list", type=_float_list, default=list(map(float, harness.FIG4_TMAX_PS)),
                   help="delay bounds in ps")
    p.add_argument("--designers", default="theorem1,baseline")

    p = sub.add_parser("design", parents=[common], help="emit PS values and delays as CSV")
    p.add_argument("--designer", choices=["theorem1", "baseline"], default="theorem1")

    p = sub.add_parser("verify", parents=[common], help="closed form versus numerical oracle and properties")
    p.add_argument("--count", type=int, default=100, help="random scenarios in the batch")
    p.add_argument("--inject-fault", action="store_true",
                   help="perturb one delay of every closed-form design (negative control)")

    sub.add_parser("criteria", parents=[common], help="antenna-count and delay-bound selection rules")
    return parser


@contextlib.contextmanager
def _output(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _designers(text: str) -> tuple:
    return tuple(d.strip() for d in text.split(",") if d.strip())


def _run(args) -> int:
    sc, seed = harness.load_scenario(args.scenario)
    if args.seed is not None:
        seed = args.seed
    if args.workers < 1:
        raise ConfigError("--workers must be >= 1")

    if args.command == "gain-pattern":
        records = harness.run_fig1(sc.grid, sc.psi_c[0], args.nt_list)
        with _output(args.out) as out:
            harness.write_records(records, out, per_subcarrier=True)
        return EXIT_OK

    if args.command in ("sweep-nt", "sweep-tmax"):
        if args.command == "sweep-nt":
            spec = harness.SweepSpec(sc, "nt", tuple(args.nt_list), _designers(args.designers))
        else:
            spec = harness.SweepSpec(sc, "tmax_ps", tuple(args.tmax_list), _designers(args.designers))
        records = harness.run_sweep(spec, args.workers)
        with _output(args.out) as out:
            harness.write_records(records, out, per_subcarrier=args.per_subcarrier)
        return EXIT_OK

    if args.command == "design":
        design = harness.make_design(args.designer, sc)
        with _output(args.out) as out:
            harness.write_design(design, args.designer, out)
        return EXIT_OK

    if args.command == "verify":
        scenarios = [sc] + harness.random_batch(seed, args.count)
        fault = harness.perturb_one_delay if args.inject_fault else None
        outcome = harness.run_verify(scenarios, seed=seed, fault=fault)
        with _output(args.out) as out:
            for c in outcome.checks:
                status = "SKIP" if c.skipped else ("PASS" if c.passed else "FAIL")
                if args.verbose or not c.passed or c.skipped:
                    print(f"{status} {c.name} {c.detail}".rstrip(), file=out)
            if outcome.notes:
                print(f"note: {len(outcome.notes)} scenario(s) outside the principal phase branch", file=out)
            n_fail = sum(not (c.passed or c.skipped) for c in outcome.checks)
            print(f"{len(outcome.checks)} checks, {n_fail} failed", file=out)
        return EXIT_OK if outcome.ok else EXIT_VERIFY

    if args.command == "criteria":
        g, fc = sc.geom, sc.grid.fc
        psi_max = max(abs(p) for p in sc.psi_c)
        nt_max = max_nt_criterion(g.m_ttd, fc, sc.t_max, psi_max)
        with _output(args.out) as out:
            print(f"tmax_min_ps = {min_tmax_criterion(g.n_t, g.m_ttd, fc, psi_max) * 1e12:.12g}", file=out)
            print(f"nt_max = {nt_max}", file=out)
            print(f"nt_bound = {max_nt_bound(g.m_ttd, fc, sc.t_max, psi_max):.12g}", file=out)
        return EXIT_OK

    raise ConfigError(f"unknown command {args.command}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _run(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
