"""Command-line entry point: ``vqe-forge {pes,bench,scaling,exact,dump-hamiltonian}``.

Exit codes: 0 success, 1 one or more sweep points failed, 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import platform
import sys
import warnings
from dataclasses import asdict
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .chem import BondLengthOutOfRange, build_h2_hamiltonian
from .pauli import exact_ground_energy, to_text
from .sweep import (
    MemoryGuardExceeded,
    SweepConfig,
    SweepReport,
    amdahl_speedup,
    effective_workers,
    efficiency,
    measured_speedup,
    run_scaling_study,
    run_sweep,
)
from .vqe import AdamConfig

log = logging.getLogger("vqe_forge")

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_USAGE = 2

PES_COLUMNS = ("bond_angstrom", "energy_hartree", "theta_star", "iterations", "wall_seconds")
BENCH_COLUMNS = ("workers", "total_seconds", "speedup_vs_w1", "efficiency", "amdahl_speedup")
SCALING_COLUMNS = ("n_qubits", "state_bytes", "runtime_seconds", "final_energy")
DEFAULT_QUBITS = (4, 8, 12, 14, 16, 18, 20)


class UsageError(Exception):
    pass


def fmt(x: float) -> str:
    """12 significant digits; the CSV contract for energies and angles."""
    return format(x, ".12g")


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _host() -> str:
    return f"{platform.node()} {platform.platform()} python {platform.python_version()} cpus={os.cpu_count()}"


def make_manifest(command: str, config: dict, started: str) -> dict:
    return {
        "command": command,
        "config": config,
        "version": __version__,
        "host": _host(),
        "started": started,
        "finished": _now(),
        # nothing in the chemistry pipeline is random; recorded for completeness
        "seeds": {"sweep": 0, "used": False},
    }


def _write_json(path: Path, manifest: dict, data) -> None:
    path.write_text(json.dumps({"manifest": manifest, "data": data}, indent=2, allow_nan=True) + "\n",
                    encoding="utf-8")


def _write_csv(path: Path, columns, rows) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    writer.writerows(rows)
    path.write_text(buf.getvalue(), encoding="utf-8")


def pes_rows(report: SweepReport) -> list[list[str]]:
    rows = []
    for p in report.points:
        theta = ";".join(fmt(t) for t in p.theta_star)
        rows.append([fmt(p.d), fmt(p.energy), theta, str(p.iterations), format(p.point_wall_time, ".6f")])
    return rows


def read_pes_csv(path) -> list[dict]:
    """Parse a ``pes.csv`` back into typed rows."""
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            out.append({
                "bond_angstrom": float(row["bond_angstrom"]),
                "energy_hartree": float(row["energy_hartree"]),
                "theta_star": tuple(float(t) for t in row["theta_star"].split(";") if t),
                "iterations": int(row["iterations"]),
                "wall_seconds": float(row["wall_seconds"]),
            })
    return out


def report_data(report: SweepReport) -> dict:
    return {
        "points": [asdict(p) for p in report.points],
        "total_wall_time": report.total_wall_time,
        "workers": report.workers,
        "per_worker_times": report.per_worker_times,
    }


def _sweep_config(args) -> SweepConfig:
    iterations = args.iterations
    if iterations is None:
        iterations = 300 if getattr(args, "paper_hpc", False) else 200
    adam = AdamConfig(learning_rate=args.lr, max_iterations=iterations, gradient_tolerance=args.tol)
    return SweepConfig(d_min=args.dmin, d_max=args.dmax, n_points=args.points,
                       iterations=iterations, workers=args.workers, adam=adam)


def _resolved(args, **extra) -> dict:
    config = {k: v for k, v in vars(args).items() if k not in ("func",)}
    config.update(extra)
    return config


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_pes(args) -> int:
    started = _now()
    config = _sweep_config(args)
    report = run_sweep(config)
    out = _out_dir(args)
    manifest = make_manifest("pes", _resolved(args, iterations=config.iterations,
                                             effective_workers=report.workers), started)
    _write_csv(out / "pes.csv", PES_COLUMNS, pes_rows(report))
    (out / "pes.manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    _write_json(out / "pes.json", manifest, report_data(report))

    failures = report.failures
    if len(failures) < len(report.points):
        eq = report.equilibrium()
        print(f"equilibrium (grid argmin): d = {eq.d:.4f} A, E_min = {eq.energy:.6f} Ha; "
              f"{len(report.points)} points, {report.total_wall_time:.2f} s on {report.workers} worker(s)")
    if failures:
        for p in failures:
            print(f"point d={p.d:.6f} failed: {p.error}", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


def _int_list(text: str) -> list[int]:
    try:
        values = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def cmd_bench(args) -> int:
    started = _now()
    workers_list = list(dict.fromkeys(args.worker_list))
    if any(w < 1 for w in workers_list):
        raise UsageError("worker counts must be >= 1")
    if 1 not in workers_list:
        workers_list.insert(0, 1)
    runs = {}
    failed = False
    for w in workers_list:
        args.workers = w
        report = run_sweep(_sweep_config(args))
        failed |= bool(report.failures)
        runs[w] = report
        log.info("bench workers=%d (effective %d): %.3fs", w, report.workers, report.total_wall_time)
    base = runs[1].total_wall_time
    rows, data = [], []
    previous = None
    for w in workers_list:
        t = runs[w].total_wall_time
        s = measured_speedup(base, t)
        e = efficiency(s, runs[w].workers)
        a = amdahl_speedup(args.serial_fraction, runs[w].workers)
        if previous is not None and s < previous:
            warnings.warn(f"speedup dropped at {w} workers ({s:.2f} < {previous:.2f})", stacklevel=1)
        previous = s
        rows.append([str(w), format(t, ".6f"), format(s, ".6f"), format(e, ".6f"), format(a, ".6f")])
        data.append({"workers": w, "effective_workers": runs[w].workers, "total_seconds": t,
                     "speedup_vs_w1": s, "efficiency": e, "amdahl_speedup": a,
                     "per_worker_times": runs[w].per_worker_times})
    out = _out_dir(args)
    manifest = make_manifest("bench", _resolved(args, worker_list=workers_list), started)
    _write_csv(out / "bench.csv", BENCH_COLUMNS, rows)
    _write_json(out / "bench.json", manifest, data)
    for row in rows:
        print(" ".join(f"{c}={v}" for c, v in zip(BENCH_COLUMNS, row)))
    return EXIT_PARTIAL if failed else EXIT_OK


def cmd_scaling(args) -> int:
    started = _now()
    try:
        records = run_scaling_study(
            args.qubits, layers=args.layers, iterations=args.iterations,
            coupling=args.coupling, field=args.field, z_sum=args.z_sum,
            learning_rate=args.lr, seed=args.seed, force=args.force,
            dry_run=args.dry_run,
        )
    except MemoryGuardExceeded as exc:
        raise UsageError(str(exc)) from None
    rows = [[str(r.n_qubits), str(r.memory_estimate), format(r.runtime, ".6f"), fmt(r.final_energy)]
            for r in records]
    out = _out_dir(args)
    manifest = make_manifest("scaling", _resolved(args), started)
    manifest["seeds"] = {"initial_theta": args.seed, "used": True}
    _write_csv(out / "scaling.csv", SCALING_COLUMNS, rows)
    (out / "scaling.manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    _write_json(out / "scaling.json", manifest, [asdict(r) for r in records])
    for row in rows:
        print(" ".join(f"{c}={v}" for c, v in zip(SCALING_COLUMNS, row)))
    return EXIT_OK


def cmd_exact(args) -> int:
    try:
        h = build_h2_hamiltonian(args.bond)
    except BondLengthOutOfRange as exc:
        raise UsageError(str(exc)) from None
    print(f"{exact_ground_energy(h):.6f}")
    return EXIT_OK


def cmd_dump_hamiltonian(args) -> int:
    try:
        h = build_h2_hamiltonian(args.bond)
    except BondLengthOutOfRange as exc:
        raise UsageError(str(exc)) from None
    sys.stdout.write(to_text(h))
    return EXIT_OK


def _add_sweep_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--points", type=int, default=100, help="number of bond lengths")
    p.add_argument("--iterations", type=int, default=None,
                   help="Adam iterations per bond length (default 200, 300 with --paper-hpc)")
    p.add_argument("--dmin", type=float, default=0.1, help="shortest bond length, angstrom")
    p.add_argument("--dmax", type=float, default=3.0, help="longest bond length, angstrom")
    p.add_argument("--lr", type=float, default=0.01, help="Adam learning rate")
    p.add_argument("--tol", type=float, default=None, help="early-stop gradient tolerance (off by default)")
    p.add_argument("--paper-hpc", action="store_true", help="300-iteration benchmark preset")
    p.add_argument("--out-dir", default=".", help="directory for output files")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vqe-forge", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--dump-hamiltonian", type=float, metavar="D", default=None,
                        help="print the qubit Hamiltonian at bond length D (angstrom) and exit")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("pes", help="potential energy surface sweep")
    _add_sweep_flags(p)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_pes)

    p = sub.add_parser("bench", help="strong-scaling benchmark over worker counts")
    _add_sweep_flags(p)
    p.add_argument("--worker-list", type=_int_list, default=[1, 2, 4, 8, 16])
    p.add_argument("--serial-fraction", type=float, default=0.05)
    p.set_defaults(func=cmd_bench, workers=1)

    p = sub.add_parser("scaling", help="qubit-count runtime study on a synthetic Hamiltonian")
    p.add_argument("--qubits", type=_int_list, default=list(DEFAULT_QUBITS))
    p.add_argument("--layers", type=int, default=2)
    p.add_argument("--iterations", type=int, default=10)
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--coupling", type=float, default=1.0, help="ZZ coupling J")
    p.add_argument("--field", type=float, default=1.0, help="transverse field h")
    p.add_argument("--z-sum", action="store_true", help="use sum_i Z_i instead of the Ising chain")
    p.add_argument("--seed", type=int, default=7, help="seed for the initial-angle perturbation")
    p.add_argument("--force", action="store_true", help="allow more than 26 qubits")
    p.add_argument("--dry-run", action="store_true",
                   help="only tabulate state-vector sizes, do not simulate")
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_scaling)

    p = sub.add_parser("exact", help="exact ground energy by dense diagonalization")
    p.add_argument("--bond", type=float, required=True, help="bond length, angstrom")
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("dump-hamiltonian", help="print the qubit Hamiltonian")
    p.add_argument("bond", type=float, help="bond length, angstrom")
    p.set_defaults(func=cmd_dump_hamiltonian)
    return parser


def _validate(args) -> None:
    for name in ("points", "workers", "layers"):
        value = getattr(args, name, None)
        if value is not None and value < 1:
            raise UsageError(f"--{name} must be >= 1")
    iterations = getattr(args, "iterations", None)
    if iterations is not None and iterations < 1:
        raise UsageError("--iterations must be >= 1")
    lr = getattr(args, "lr", None)
    if lr is not None and not lr > 0:
        raise UsageError("--lr must be positive")
    sf = getattr(args, "serial_fraction", None)
    if sf is not None and not 0 <= sf <= 1:
        raise UsageError("--serial-fraction must lie in [0, 1]")
    if getattr(args, "func", None) in (cmd_pes, cmd_bench):
        if args.points > 1 and not args.dmin < args.dmax:
            raise UsageError("--dmin must be below --dmax")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.dump_hamiltonian is not None:
            args.bond = args.dump_hamiltonian
            return cmd_dump_hamiltonian(args)
        if args.command is None:
            parser.print_usage(sys.stderr)
            return EXIT_USAGE
        _validate(args)
        return args.func(args)
    except (UsageError, ValueError) as exc:
        print(f"vqe-forge: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
