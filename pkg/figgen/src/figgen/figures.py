"""Deterministic figure rendering from nlisim result tables.

Each figure kind is pure post-processing: values are taken from the table
rows and metadata, the only computation here is axis transforms and the
evaluation of already-fitted reference lines.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .io import Table, read_table

# style pinned for byte-stable output across runs
_RC = {
    "figure.figsize": (6.4, 4.2),
    "figure.dpi": 120,
    "savefig.dpi": 120,
    "font.family": "DejaVu Sans",
    "font.size": 10,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "svg.hashsalt": "figgen",
}

_HIGH_GAIN_SHADE = {"color": "gold", "alpha": 0.25, "lw": 0}


@dataclass
class FigureSpec:
    """One figure: a kind, the input tables, and the output path."""

    figure_kind: str
    input_paths: list[str]
    output_path: str
    title: str | None = None
    log_x: bool | None = None  # default chosen per kind
    log_y: bool | None = None
    options: dict = field(default_factory=dict)


def _require_command(table: Table, path: str, allowed: tuple[str, ...]):
    if table.command not in allowed:
        raise ValueError(
            f"{path}: table was produced by command {table.command!r}, "
            f"expected one of {list(allowed)}"
        )
    if not table.rows:
        raise ValueError(f"{path}: table has no data rows")


def _label_for(table: Table) -> str:
    n = table.rows[0].get("n_mean")
    tau = table.rows[0].get("tau")
    pump = table.metadata.get("pump_kind", "")
    parts = [p for p in (pump, f"N={n:g}" if n is not None else None) if p]
    if table.command == "pattern" and tau is not None:
        parts.append(f"tau={tau:g}")
    return ", ".join(parts)


def _shade_high_gain(ax, n_mean: float):
    if n_mean and n_mean > 0:
        ax.axvspan(n_mean ** -0.5, ax.get_xlim()[1], **_HIGH_GAIN_SHADE)


def _draw_pattern(ax, spec: FigureSpec, tables):
    for path, table in tables:
        _require_command(table, path, ("pattern",))
        phi = np.array(table.column("phi"), dtype=float)
        mean = np.array(table.column("n_out_mean"), dtype=float)
        order = np.argsort(phi)
        ax.plot(phi[order], mean[order], label=_label_for(table))
    ax.set_xlabel("phase (rad)")
    ax.set_ylabel("output photon number")
    ticks = np.arange(0.0, 2.0 * math.pi + 1e-9, math.pi / 2)
    ax.set_xticks(ticks)
    ax.set_xticklabels(["0", "π/2", "π", "3π/2", "2π"])
    ax.legend()


def _draw_uncertainty(ax, spec: FigureSpec, tables):
    # first table: the uncertainty sweep; optional further tables: minima
    # reports supplying the tau_1/tau_min markers
    path, table = tables[0]
    _require_command(table, path, ("uncertainty",))
    tau = np.array(table.column("tau"), dtype=float)
    order = np.argsort(tau)
    for column, style, label in (
        ("dphi_ep", "-", "exact"),
        ("dphi_pa_formula", "--", "parametric"),
        ("dphi_pa_adhoc", ":", "parametric (numeric gain)"),
    ):
        y = np.array(table.column(column), dtype=float)
        ax.plot(tau[order], y[order], style, label=label)
    n_mean = float(table.rows[0]["n_mean"])
    if n_mean > 0:
        ax.axhline(n_mean ** -0.5, color="tab:orange", ls=":", label="shot noise")
    for mpath, mtable in tables[1:]:
        _require_command(mtable, mpath, ("minima", "scaling"))
        for row in mtable.rows:
            if row["n_mean"] == n_mean:
                ax.axvline(row["tau_1"], color="0.3", ls="--", lw=0.8)
                ax.axvline(row["tau_min"], color="0.3", ls="-.", lw=0.8)
    ax.set_xlabel("interaction strength")
    ax.set_ylabel("phase uncertainty")
    _shade_high_gain(ax, n_mean)
    ax.legend()


def _draw_minima(ax, spec: FigureSpec, tables):
    path, table = tables[0]
    _require_command(table, path, ("minima", "scaling"))
    n = np.array(table.column("n_mean"), dtype=float)
    dphi1 = np.array(table.column("dphi_at_tau_1"), dtype=float)
    order = np.argsort(n)
    ax.plot(n[order], dphi1[order], "o", ms=4, label="first minimum")
    grid = np.geomspace(n.min(), n.max(), 64)
    ax.plot(grid, grid ** -0.5, ":", color="tab:orange", label="shot noise")
    fit = table.metadata.get("fit")
    if fit:
        c = float(fit["prefactor"])
        ax.plot(grid, c * grid ** float(fit["exponent_fixed"]), "--", color="0.3",
                label=f"{c:.3g}/N fit")
    ax.set_xlabel("pump photon number")
    ax.set_ylabel("phase uncertainty")
    ax.legend()
    # odd/even detail of the lowest minimum at small N, when present
    small = [(row["n_mean"], row["dphi_at_tau_min"]) for row in table.rows if row["n_mean"] <= 10]
    if len(small) >= 4:
        inset = ax.inset_axes([0.12, 0.12, 0.35, 0.3])
        small.sort()
        inset.plot([s[0] for s in small], [s[1] for s in small], "o-", ms=3, lw=0.8)
        inset.set_title("lowest minimum", fontsize=7)
        inset.tick_params(labelsize=6)
        inset.grid(False)


def _draw_distribution(ax, spec: FigureSpec, tables):
    width = 0.8 / len(tables)
    for i, (path, table) in enumerate(tables):
        _require_command(table, path, ("distribution",))
        nu = np.array(table.column("nu"), dtype=float)
        prob = np.array(table.column("probability"), dtype=float)
        ax.bar(nu + (i - (len(tables) - 1) / 2) * width, prob, width=width, label=_label_for(table))
    ax.set_xlabel("signal photon number")
    ax.set_ylabel("probability")
    ax.legend()


def _draw_fisher(ax, spec: FigureSpec, tables):
    path, table = tables[0]
    _require_command(table, path, ("fisher",))
    tau = np.array(table.column("tau"), dtype=float)
    order = np.argsort(tau)
    for column, style, label in (("dphi_ep", "-", "error propagation"),
                                 ("dphi_fi", "--", "Fisher information")):
        y = np.array(table.column(column), dtype=float)
        ax.plot(tau[order], y[order], style, label=label)
    n_mean = float(table.rows[0]["n_mean"])
    if n_mean > 0:
        ax.axhline(n_mean ** -0.5, color="tab:orange", ls=":", label="shot noise")
    ax.set_xlabel("interaction strength")
    ax.set_ylabel("phase uncertainty")
    _shade_high_gain(ax, n_mean)
    ax.legend()


KINDS = {
    "pattern": (_draw_pattern, False, False),
    "uncertainty": (_draw_uncertainty, False, True),
    "minima": (_draw_minima, True, True),
    "distribution": (_draw_distribution, False, False),
    "fisher": (_draw_fisher, False, True),
}

# table command -> default figure kind
COMMAND_KINDS = {
    "pattern": "pattern",
    "uncertainty": "uncertainty",
    "minima": "minima",
    "scaling": "minima",
    "distribution": "distribution",
    "fisher": "fisher",
}


def render(spec: FigureSpec) -> str:
    """Render one figure; returns the output path.

    Raises ValueError (before any file is written) when the kind is
    unknown, a table's command metadata does not match, or a table has no
    rows.
    """
    if spec.figure_kind not in KINDS:
        raise ValueError(f"unknown figure kind {spec.figure_kind!r} (kinds: {sorted(KINDS)})")
    if not spec.input_paths:
        raise ValueError("at least one input table is required")
    draw, log_x, log_y = KINDS[spec.figure_kind]
    tables = [(path, read_table(path)) for path in spec.input_paths]

    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        try:
            draw(ax, spec, tables)
            if spec.log_x if spec.log_x is not None else log_x:
                ax.set_xscale("log")
            if spec.log_y if spec.log_y is not None else log_y:
                ax.set_yscale("log")
            if spec.title:
                ax.set_title(spec.title)
            fig.tight_layout()
            _save(fig, spec.output_path)
        finally:
            plt.close(fig)
    return spec.output_path


def _save(fig, path: str):
    ext = os.path.splitext(path)[1].lower()
    if ext == ".png":
        # strip the producer string so repeated runs are byte-identical
        fig.savefig(path, metadata={"Software": None})
    elif ext == ".svg":
        fig.savefig(path, metadata={"Date": None})
    else:
        raise ValueError(f"unsupported figure format {ext!r} (use .png or .svg)")
