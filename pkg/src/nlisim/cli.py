"""Command-line front end: parameter sweeps, minima scans, and fits.

Subcommands: `pattern` (interference fringes), `uncertainty`
(dark-fringe sensitivity sweep),
`minima`/`scaling` (optimal interaction strengths and the 1/N fit),
`distribution` (internal photon statistics), and `fisher` (classical
Fisher information comparison).  Results are written as CSV or JSON
tables; spectral decompositions are cached on disk between runs.

Exit codes: 0 success, 2 usage error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, asdict

import numpy as np

from . import __version__
from .fock import SpectralStore
from .metrology import (
    DEFAULT_DELTA,
    DEFAULT_FISHER_STEP,
    default_tau_range,
    fisher_sweep,
    fit_heisenberg,
    scan_minima,
    uncertainty_sweep,
)
from .engine import interference_pattern, run_amplifier_a
from .pumps import DEFAULT_TRUNCATION, PumpSpec
from .tables import ResultTable, write_table, to_csv, to_json

ENV_CACHE_DIR = "NLISIM_CACHE_DIR"

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3


class UsageError(Exception):
    pass


class NumericalError(Exception):
    def __init__(self, message, partial_table=None):
        super().__init__(message)
        self.partial_table = partial_table


@dataclass
class GridSpec:
    start: float
    stop: float
    count: int

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count)


@dataclass
class RunConfig:
    command: str
    pump_kind: str
    n_mean: list[float]
    tau: float | None
    tau_grid: GridSpec | None
    phi: float | None
    phi_grid: GridSpec | None
    delta: float
    truncation_threshold: float
    fisher_step: float
    fisher_phi: float | None
    objective: str
    output_path: str | None
    format: str
    workers: int
    cache_dir: str | None
    no_cache: bool

    def pump(self, n: float) -> PumpSpec:
        return PumpSpec(self.pump_kind, n)

    def metadata(self) -> dict:
        meta = asdict(self)
        meta["engine_version"] = __version__
        return meta


def parse_grid(text: str) -> GridSpec:
    """Grid descriptor start:stop:count with inclusive endpoints."""
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"grid descriptor must be start:stop:count, got {text!r}")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError(f"malformed grid descriptor {text!r}") from None
    if not start < stop:
        raise UsageError(f"grid start must be below stop in {text!r}")
    if count < 2:
        raise UsageError(f"grid count must be at least 2 in {text!r}")
    return GridSpec(start, stop, count)


def parse_n_values(text: str) -> list[float]:
    if ":" in text:
        grid = parse_grid(text)
        return [float(v) for v in grid.values()]
    try:
        return [float(v) for v in text.split(",") if v.strip() != ""]
    except ValueError:
        raise UsageError(f"malformed photon-number list {text!r}") from None


# fixed chunk size: the work decomposition (and hence the batched array
# shapes seen by the evaluators) must not depend on the worker count, so
# that any --workers value produces byte-identical rows
_CHUNK = 16


def _chunks(n_items: int):
    return [(a, min(a + _CHUNK, n_items)) for a in range(0, n_items, _CHUNK)]


def _parallel_grid(values: np.ndarray, workers: int, evaluate):
    """Evaluate fixed-size chunks of a grid concurrently; assemble by index."""
    pieces = _chunks(len(values))
    if len(pieces) == 1 or workers <= 1:
        return [evaluate(values[a:b]) for a, b in pieces]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda ab: evaluate(values[ab[0]:ab[1]]), pieces))


def cmd_pattern(cfg: RunConfig, store: SpectralStore) -> ResultTable:
    if cfg.phi_grid is None:
        raise UsageError("pattern requires --phi-grid")
    if cfg.tau is None:
        raise UsageError("pattern requires --tau")
    n = cfg.n_mean[0]
    pump = cfg.pump(n)
    phis = cfg.phi_grid.values()

    def evaluate(chunk):
        return interference_pattern(pump, cfg.tau, chunk, threshold=cfg.truncation_threshold, store=store)

    rows = []
    for part in _parallel_grid(phis, cfg.workers, evaluate):
        for res in part:
            rows.append(
                {
                    "n_mean": n,
                    "tau": cfg.tau,
                    "phi": res.phi,
                    "n_out_mean": res.n_out_mean,
                    "n_out_var": res.n_out_var,
                }
            )
    return ResultTable(columns=["n_mean", "tau", "phi", "n_out_mean", "n_out_var"], rows=rows)


def cmd_uncertainty(cfg: RunConfig, store: SpectralStore) -> ResultTable:
    if cfg.tau_grid is None:
        raise UsageError("uncertainty requires --tau-grid")
    n = cfg.n_mean[0]
    pump = cfg.pump(n)
    taus = cfg.tau_grid.values()
    high_gain_edge = n ** -0.5 if n > 0 else math.inf

    def evaluate(chunk):
        return uncertainty_sweep(pump, chunk, delta=cfg.delta, threshold=cfg.truncation_threshold, store=store)

    rows = []
    for part in _parallel_grid(taus, cfg.workers, evaluate):
        for u in part:
            rows.append(
                {
                    "n_mean": n,
                    "tau": u.tau,
                    "dphi_ep": u.dphi_ep,
                    "dphi_pa_formula": u.dphi_pa_formula,
                    "dphi_pa_adhoc": u.dphi_pa_adhoc,
                    "n_int": u.n_int,
                    "delta": u.delta,
                    "high_gain": u.tau > high_gain_edge,
                }
            )
    return ResultTable(
        columns=["n_mean", "tau", "dphi_ep", "dphi_pa_formula", "dphi_pa_adhoc", "n_int", "delta", "high_gain"],
        rows=rows,
    )


def _minima_rows(cfg: RunConfig, store: SpectralStore):
    rows, errors = [], []

    def scan_one(n):
        pump = cfg.pump(n)
        if cfg.tau_grid is not None:
            start, stop, count = cfg.tau_grid.start, cfg.tau_grid.stop, cfg.tau_grid.count
        else:
            start, stop, count = default_tau_range(n)
        return scan_minima(
            pump,
            start,
            stop,
            count,
            kind=cfg.objective,
            delta=cfg.delta,
            dphi_step=cfg.fisher_step,
            threshold=cfg.truncation_threshold,
            store=store,
        )

    with ThreadPoolExecutor(max_workers=max(1, cfg.workers)) as pool:
        futures = [(n, pool.submit(scan_one, n)) for n in cfg.n_mean]
        for n, fut in futures:
            try:
                rep = fut.result()
            except (ValueError, RuntimeError) as exc:
                errors.append(f"N={n}: {exc}")
                continue
            rows.append(
                {
                    "n_mean": n,
                    "tau_1": rep.tau_1,
                    "dphi_at_tau_1": rep.dphi_at_tau_1,
                    "tau_min": rep.tau_min,
                    "dphi_at_tau_min": rep.dphi_at_tau_min,
                    "shot_noise": n ** -0.5 if n > 0 else None,
                }
            )
    return rows, errors


_MINIMA_COLUMNS = ["n_mean", "tau_1", "dphi_at_tau_1", "tau_min", "dphi_at_tau_min", "shot_noise"]


def cmd_minima(cfg: RunConfig, store: SpectralStore) -> ResultTable:
    rows, errors = _minima_rows(cfg, store)
    table = ResultTable(columns=_MINIMA_COLUMNS, rows=rows)
    if errors:
        raise NumericalError("; ".join(errors), partial_table=table)
    return table


def cmd_scaling(cfg: RunConfig, store: SpectralStore) -> ResultTable:
    rows, errors = _minima_rows(cfg, store)
    table = ResultTable(columns=_MINIMA_COLUMNS, rows=rows)
    if not errors:
        try:
            fit = fit_heisenberg([(r["n_mean"], r["dphi_at_tau_1"]) for r in rows])
            table.metadata["fit"] = {
                "prefactor": fit.prefactor,
                "exponent_fixed": fit.exponent_fixed,
                "fit_n_min": fit.fit_n_min,
            }
        except ValueError as exc:
            errors.append(str(exc))
    if errors:
        raise NumericalError("; ".join(errors), partial_table=table)
    return table


def cmd_distribution(cfg: RunConfig, store: SpectralStore) -> ResultTable:
    if cfg.tau is None:
        raise UsageError("distribution requires --tau")
    n = cfg.n_mean[0]
    internal = run_amplifier_a(cfg.pump(n), cfg.tau, threshold=cfg.truncation_threshold, store=store)
    rows = [
        {"n_mean": n, "tau": cfg.tau, "nu": int(nu), "probability": float(p)}
        for nu, p in enumerate(internal.distribution_int)
    ]
    return ResultTable(columns=["n_mean", "tau", "nu", "probability"], rows=rows)


def cmd_fisher(cfg: RunConfig, store: SpectralStore) -> ResultTable:
    if cfg.tau_grid is None:
        raise UsageError("fisher requires --tau-grid")
    n = cfg.n_mean[0]
    pump = cfg.pump(n)
    taus = cfg.tau_grid.values()
    phi = cfg.fisher_phi if cfg.fisher_phi is not None else math.pi + cfg.delta

    def evaluate(chunk):
        f = fisher_sweep(
            pump, chunk, phi, dphi_step=cfg.fisher_step,
            threshold=cfg.truncation_threshold, store=store,
        )
        ep = uncertainty_sweep(pump, chunk, delta=cfg.delta, threshold=cfg.truncation_threshold, store=store)
        return list(zip(chunk, f, ep))

    rows = []
    for part in _parallel_grid(taus, cfg.workers, evaluate):
        for tau, f, u in part:
            rows.append(
                {
                    "n_mean": n,
                    "tau": float(tau),
                    "phi": phi,
                    "fisher_info": float(f),
                    "dphi_fi": float(f) ** -0.5 if f > 0 else None,
                    "dphi_ep": u.dphi_ep,
                }
            )
    return ResultTable(columns=["n_mean", "tau", "phi", "fisher_info", "dphi_fi", "dphi_ep"], rows=rows)


COMMANDS = {
    "pattern": cmd_pattern,
    "uncertainty": cmd_uncertainty,
    "minima": cmd_minima,
    "scaling": cmd_scaling,
    "distribution": cmd_distribution,
    "fisher": cmd_fisher,
}


def default_cache_dir() -> str:
    env = os.environ.get(ENV_CACHE_DIR)
    if env:
        return env
    return os.path.join(os.path.expanduser("~"), ".cache", "nlisim", "spectral")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nlisim",
        description="Exact phase-sensitivity simulations of a three-mode nonlinear interferometer.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--pump", choices=["fock", "coherent"], required=True, help="input pump state")
    common.add_argument("--n", required=True,
                        help="mean pump photon number; a comma list or start:stop:count grid for minima/scaling")
    common.add_argument("--delta", type=float, default=DEFAULT_DELTA,
                        help="dark-fringe offset for the difference quotient")
    common.add_argument("--threshold", type=float, default=DEFAULT_TRUNCATION,
                        help="coherent-pump sector truncation threshold")
    common.add_argument("--fisher-step", type=float, default=DEFAULT_FISHER_STEP,
                        help="phi step of the Fisher-information central difference")
    common.add_argument("-o", "--output", default=None, help="output path (default: stdout)")
    common.add_argument("--format", choices=["csv", "json"], default="csv")
    common.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    common.add_argument("--cache-dir", default=None,
                        help=f"spectral cache directory (default ${ENV_CACHE_DIR} or ~/.cache/nlisim/spectral)")
    common.add_argument("--no-cache", action="store_true", help="disable the on-disk spectral cache")

    p = sub.add_parser("pattern", parents=[common], help="output photon number versus phase")
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--phi-grid", required=True)

    p = sub.add_parser("uncertainty", parents=[common], help="dark-fringe phase uncertainty versus tau")
    p.add_argument("--tau-grid", required=True)

    for name in ("minima", "scaling"):
        p = sub.add_parser(name, parents=[common],
                           help="first/lowest uncertainty minima per N" + (" plus 1/N fit" if name == "scaling" else ""))
        p.add_argument("--tau-grid", default=None, help="override the default [N^-1/2, 20 N^-1/2] scan range")
        p.add_argument("--objective", choices=["ep", "fisher"], default="ep")

    p = sub.add_parser("distribution", parents=[common], help="internal photon-number distribution after amplifier A")
    p.add_argument("--tau", type=float, required=True)

    p = sub.add_parser("fisher", parents=[common], help="classical Fisher information versus tau")
    p.add_argument("--tau-grid", required=True)
    p.add_argument("--phi", type=float, default=None, help="evaluation phase (default pi + delta)")

    return parser


def _build_config(args) -> RunConfig:
    n_values = parse_n_values(args.n)
    if not n_values:
        raise UsageError("at least one photon number is required")
    if args.command not in ("minima", "scaling") and len(n_values) != 1:
        raise UsageError(f"{args.command} takes a single photon number")
    if args.delta <= 0 or args.threshold <= 0 or args.fisher_step <= 0:
        raise UsageError("delta, threshold and fisher-step must be positive")
    if args.pump == "fock":
        for n in n_values:
            if float(n) != int(n):
                raise UsageError(f"Fock pump requires integer photon numbers, got {n}")
    tau_grid = parse_grid(args.tau_grid) if getattr(args, "tau_grid", None) else None
    phi_grid = parse_grid(args.phi_grid) if getattr(args, "phi_grid", None) else None
    cache_dir = None if args.no_cache else (args.cache_dir or default_cache_dir())
    return RunConfig(
        command=args.command,
        pump_kind=args.pump,
        n_mean=n_values,
        tau=getattr(args, "tau", None),
        tau_grid=tau_grid,
        phi=getattr(args, "phi", None),
        phi_grid=phi_grid,
        delta=args.delta,
        truncation_threshold=args.threshold,
        fisher_step=args.fisher_step,
        fisher_phi=getattr(args, "phi", None),
        objective=getattr(args, "objective", "ep"),
        output_path=args.output,
        format=args.format,
        workers=max(1, args.workers),
        cache_dir=cache_dir,
        no_cache=bool(args.no_cache),
    )


def _emit(table: ResultTable, cfg: RunConfig, started: float):
    table.sort_rows()
    meta = cfg.metadata()
    meta["wall_time_s"] = time.monotonic() - started
    meta.update(table.metadata)
    table.metadata = meta
    if cfg.output_path:
        write_table(table, cfg.output_path, cfg.format)
    else:
        sys.stdout.write(to_csv(table) if cfg.format == "csv" else to_json(table))


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    started = time.monotonic()
    try:
        cfg = _build_config(args)
        store = SpectralStore(directory=cfg.cache_dir)
        table = COMMANDS[cfg.command](cfg, store)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        if exc.partial_table is not None:
            _emit(exc.partial_table, cfg, started)
        return EXIT_NUMERICAL
    except (ValueError, RuntimeError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    _emit(table, cfg, started)
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
