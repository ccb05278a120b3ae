"""Command-line entry point: ``hyperconc {run,sweep,devices,verify}``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from . import verify
from .devices import DetectorModel, format_row, truth_tables
from .fock import StateParams
from .protocol import PPCVariant, ProtocolConfig, Variant, run_exact, run_shots

log = logging.getLogger("hyperconc")

CSV_HEADER = ("alpha2", "delta2", "p_exact", "p_formula")


def fmt(x: float) -> str:
    return format(x, ".12g")


@dataclass(frozen=True)
class SweepSpec:
    n: int = 2
    step: float = 0.05
    detector: DetectorModel = DetectorModel.PNR
    variant: Variant = Variant.TWO_COPIES
    ppc: PPCVariant = PPCVariant.PLAIN

    def grid(self) -> list[float]:
        if not self.step > 0:
            raise ValueError("sweep step must be positive")
        pts = []
        k = 1
        while k * self.step < 1 - 1e-9:
            pts.append(round(k * self.step, 12))
            k += 1
        if not pts:
            raise ValueError("empty sweep grid")
        return pts


def _sweep_point(args) -> tuple[float, float, float, float]:
    spec, a2, d2 = args
    params = StateParams.from_weights(a2, d2)
    config = ProtocolConfig(spec.n, params, spec.detector, spec.ppc, spec.variant)
    return a2, d2, run_exact(config).success_probability, params.success_formula()


def sweep(spec: SweepSpec, workers: int = 1) -> list[tuple[float, float, float, float]]:
    """Exact and closed-form success probability over the (|alpha|^2, |delta|^2) grid."""
    grid = spec.grid()
    jobs = [(spec, a2, d2) for a2 in grid for d2 in grid]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            return list(pool.map(_sweep_point, jobs, chunksize=8))
    return [_sweep_point(job) for job in jobs]


def sweep_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for row in rows:
        w.writerow([fmt(x) for x in row])
    return buf.getvalue()


def _params(args, parser) -> StateParams:
    try:
        if args.amplitudes:
            parts = [complex(p.replace(" ", "")) for p in args.amplitudes.split(",")]
            if len(parts) != 4:
                raise ValueError("--amplitudes needs alpha,beta,delta,eta")
            return StateParams(*parts)
        return StateParams.from_weights(args.alpha2, args.delta2)
    except ValueError as exc:
        parser.error(str(exc))


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_run(args, parser) -> int:
    try:
        config = ProtocolConfig(
            n=args.n,
            params=_params(args, parser),
            detector=args.detector,
            ppc=args.ppc,
            variant=args.variant,
            shots=args.shots,
            seed=args.seed,
            spc_extra_splitters=args.spc_extra_bs,
        )
    except ValueError as exc:
        parser.error(str(exc))
    if config.shots is not None:
        result = run_shots(config)
        report = result.to_dict(include_states=args.states)
    else:
        result = run_exact(config)
        report = result.to_dict(include_states=args.states)
    report["success_probability"] = report["summary"]["success_probability"]

    if args.format == "json":
        text = json.dumps(report, indent=2) + "\n"
    else:
        s = report["summary"]
        lines = [f"{k}: {fmt(v) if isinstance(v, float) else v}" for k, v in s.items()]
        if "shots" in report:
            sh = report["shots"]
            lines += [
                f"shots: {sh['shots']} (seed {sh['seed']})",
                f"empirical_success_rate: {fmt(sh['empirical_success_rate'])}",
                f"binomial_sigma: {sh['binomial_sigma']:.6g}",
            ]
        text = "\n".join(lines) + "\n"
    _emit(text, args.out)
    return 0


def cmd_sweep(args, parser) -> int:
    if args.workers < 1:
        parser.error("--workers must be at least 1")
    try:
        spec = SweepSpec(args.n, args.step, DetectorModel(args.detector), Variant(args.variant), PPCVariant(args.ppc))
        rows = sweep(spec, workers=args.workers)
    except ValueError as exc:
        parser.error(str(exc))
    if args.format == "json":
        text = json.dumps([dict(zip(CSV_HEADER, r)) for r in rows], indent=2) + "\n"
    else:
        text = sweep_csv(rows)
    _emit(text, args.out)
    return 0


def cmd_devices(args, parser) -> int:
    rows = truth_tables()
    if args.format == "json":
        text = json.dumps(rows, indent=2) + "\n"
    else:
        text = "\n".join(format_row(r) for r in rows) + "\n"
    _emit(text, args.out)
    return 0


def cmd_verify(args, parser) -> int:
    if args.trials < 1:
        parser.error("--trials must be at least 1")
    report = verify.run(args.trials, args.seed)
    if args.format == "json":
        text = json.dumps(report.to_dict(), indent=2) + "\n"
    else:
        text = (
            f"trials: {report.trials} (seed {report.seed})\n"
            f"max amplitude deviation: {report.max_amplitude_deviation:.3e}\n"
            f"max completeness deviation: {report.max_completeness_deviation:.3e}\n"
        )
    _emit(text, args.out)
    return 0 if report.max_amplitude_deviation <= 1e-10 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hyperconc", description="Linear-optics hyperconcentration simulator."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, formats, default):
        p.add_argument("--format", choices=formats, default=default)
        p.add_argument("--out", metavar="FILE", help="write output to FILE instead of stdout")

    def protocol_flags(p):
        p.add_argument("--n", type=int, default=2, help="number of parties (>= 2)")
        p.add_argument("--detector", choices=[m.value for m in DetectorModel], default="pnr")
        p.add_argument("--variant", choices=[v.value for v in Variant], default="two-copies")
        p.add_argument("--ppc", choices=[v.value for v in PPCVariant], default="plain")

    run = sub.add_parser("run", help="run the protocol for one parameter set")
    protocol_flags(run)
    run.add_argument("--alpha2", type=float, default=0.5, help="|alpha|^2")
    run.add_argument("--delta2", type=float, default=0.5, help="|delta|^2")
    run.add_argument(
        "--amplitudes",
        metavar="A,B,D,E",
        help="complex amplitudes alpha,beta,delta,eta (overrides --alpha2/--delta2)",
    )
    run.add_argument("--shots", type=int, help="sample this many runs instead of only exact")
    run.add_argument("--seed", type=int)
    run.add_argument("--spc-extra-bs", action="store_true", help="SPC with extra splitters")
    run.add_argument(
        "--no-states", dest="states", action="store_false", help="omit collapsed states from JSON"
    )
    common(run, ["json", "text"], "json")
    run.set_defaults(func=cmd_run)

    sw = sub.add_parser("sweep", help="success probability over the parameter grid")
    protocol_flags(sw)
    sw.add_argument("--step", type=float, default=0.05)
    sw.add_argument(
        "--workers", type=int, default=min(4, os.cpu_count() or 1), help="processes for grid points"
    )
    common(sw, ["csv", "json"], "csv")
    sw.set_defaults(func=cmd_sweep)

    dv = sub.add_parser("devices", help="print device truth tables")
    common(dv, ["text", "json"], "text")
    dv.set_defaults(func=cmd_devices)

    vf = sub.add_parser("verify", help="compare circuit expansion with the permanent oracle")
    vf.add_argument("--trials", type=int, default=100)
    vf.add_argument("--seed", type=int, default=0)
    common(vf, ["text", "json"], "text")
    vf.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("HYPERCONC_LOG", "WARNING").upper())
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args, parser)


if __name__ == "__main__":
    sys.exit(main())
