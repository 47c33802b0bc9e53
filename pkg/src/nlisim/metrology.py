"""Phase-sensitivity figures of merit.

Error-propagation uncertainty at the dark fringe (phi = pi + delta),
parametric-approximation baselines, classical Fisher information of the
output photon-number distribution, minima scans over the interaction
strength, and fixed-slope Heisenberg-scaling fits over the pump photon
number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .engine import sweep_statistics
from .fock import SpectralStore
from .pumps import PumpSpec, DEFAULT_TRUNCATION

DEFAULT_DELTA = math.pi * 1e-9 / 2
DEFAULT_FISHER_STEP = 1e-6

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def shot_noise(n_mean: float) -> float:
    """Shot-noise phase uncertainty 1/sqrt(N)."""
    if n_mean <= 0:
        raise ValueError("n_mean must be positive")
    return n_mean ** -0.5


def gain(n_mean: float, tau: float) -> float:
    """Parametric gain g = sqrt(N) * tau."""
    return math.sqrt(n_mean) * tau


def pa_internal_photons(n_mean: float, tau: float) -> float:
    """Internal photon number sinh^2(sqrt(N) tau) of the undepleted-pump model."""
    if n_mean < 0:
        raise ValueError("n_mean must be nonnegative")
    return math.sinh(math.sqrt(n_mean) * tau) ** 2


def pa_uncertainty(n_int: float) -> float:
    """Dark-fringe phase uncertainty [4 n_int (1 + n_int)]^(-1/2)."""
    if n_int <= 0:
        raise ValueError("uncertainty is undefined at zero gain (n_int <= 0)")
    return (4.0 * n_int * (1.0 + n_int)) ** -0.5


@dataclass
class UncertaintyPoint:
    """Sensitivity figures at one (pump, tau) operating point."""

    n_mean: float
    tau: float
    dphi_ep: float
    dphi_pa_formula: float
    dphi_pa_adhoc: float
    n_int: float
    delta: float
    dphi_fi: float | None = None


@dataclass
class MinimaReport:
    n_mean: float
    tau_grid: tuple[float, float, int]  # (start, stop, count)
    tau_1: float
    dphi_at_tau_1: float
    tau_min: float
    dphi_at_tau_min: float


@dataclass
class ScalingFit:
    """Fixed-slope fit dphi ~ c / N over points with n_mean >= fit_n_min."""

    points: list[tuple[float, float]]
    prefactor: float
    exponent_fixed: float = -1.0
    fit_n_min: float = 10.0


def uncertainty_sweep(
    pump: PumpSpec,
    taus,
    *,
    delta: float = DEFAULT_DELTA,
    threshold: float = DEFAULT_TRUNCATION,
    store: SpectralStore | None = None,
) -> list[UncertaintyPoint]:
    """Error-propagation uncertainty over a tau grid.

    Evaluates Var(N_out) at phi = pi + delta and the asymmetric difference
    quotient N_out(pi + 2 delta) / (2 delta), which uses the exact identity
    N_out(pi) = 0.  All near-pi quantities are computed directly from the
    sector amplitudes.
    """
    taus = np.atleast_1d(np.asarray(taus, dtype=float))
    if delta <= 0:
        raise ValueError("delta must be positive")
    if np.any(taus <= 0):
        raise ValueError("tau must be positive for a phase uncertainty")

    phis = np.array([math.pi + delta, math.pi + 2.0 * delta])
    dist, n_int = sweep_statistics(pump, taus, phis, threshold=threshold, store=store)
    k = np.arange(dist.shape[2], dtype=float)

    p_at = dist[0]
    mean_at = p_at @ k
    var_at = np.maximum(p_at @ (k * k) - mean_at * mean_at, 0.0)
    deriv = (dist[1] @ k) / (2.0 * delta)
    if np.any(deriv <= 0.0):
        bad = taus[np.argmax(deriv <= 0.0)]
        raise ValueError(f"no phase response at tau={bad} (zero derivative of N_out)")

    dphi_ep = np.sqrt(var_at) / deriv
    points = []
    for i, tau in enumerate(taus):
        n_pa = pa_internal_photons(pump.n_mean, float(tau))
        points.append(
            UncertaintyPoint(
                n_mean=pump.n_mean,
                tau=float(tau),
                dphi_ep=float(dphi_ep[i]),
                dphi_pa_formula=pa_uncertainty(n_pa) if n_pa > 0 else math.inf,
                dphi_pa_adhoc=pa_uncertainty(float(n_int[i])) if n_int[i] > 0 else math.inf,
                n_int=float(n_int[i]),
                delta=delta,
            )
        )
    return points


def phase_uncertainty_ep(
    pump: PumpSpec,
    tau: float,
    delta: float = DEFAULT_DELTA,
    *,
    threshold: float = DEFAULT_TRUNCATION,
    store: SpectralStore | None = None,
) -> UncertaintyPoint:
    """Error-propagation uncertainty at one operating point."""
    return uncertainty_sweep(pump, [tau], delta=delta, threshold=threshold, store=store)[0]


def fisher_sweep(
    pump: PumpSpec,
    taus,
    phi: float | None = None,
    *,
    dphi_step: float = DEFAULT_FISHER_STEP,
    delta: float = DEFAULT_DELTA,
    threshold: float = DEFAULT_TRUNCATION,
    store: SpectralStore | None = None,
) -> np.ndarray:
    """Classical Fisher information of P(N_out | phi) over a tau grid.

    The phi derivative of each outcome probability is a central difference
    with step `dphi_step`; outcomes with both P and |dP/dphi| below 1e-15
    are skipped.  The default phi is the dark-fringe operating point
    pi + delta, where the summand has a finite limit.
    """
    taus = np.atleast_1d(np.asarray(taus, dtype=float))
    if dphi_step <= 0:
        raise ValueError("dphi_step must be positive")
    if phi is None:
        phi = math.pi + delta
    phis = np.array([phi, phi - dphi_step, phi + dphi_step])
    dist, _ = sweep_statistics(pump, taus, phis, threshold=threshold, store=store)
    p, p_lo, p_hi = dist
    dp = (p_hi - p_lo) / (2.0 * dphi_step)
    keep = ~((p < 1e-15) & (np.abs(dp) < 1e-15))
    contrib = np.zeros_like(p)
    np.divide(dp * dp, p, out=contrib, where=keep & (p > 0.0))
    return contrib.sum(axis=1)


def fisher_information(
    pump: PumpSpec,
    tau: float,
    phi: float | None = None,
    dphi_step: float = DEFAULT_FISHER_STEP,
    *,
    delta: float = DEFAULT_DELTA,
    threshold: float = DEFAULT_TRUNCATION,
    store: SpectralStore | None = None,
) -> float:
    """Classical Fisher information at one (tau, phi) point."""
    return float(
        fisher_sweep(
            pump, [tau], phi, dphi_step=dphi_step, delta=delta, threshold=threshold, store=store
        )[0]
    )


def fisher_uncertainty(pump: PumpSpec, tau: float, **kwargs) -> float:
    """Phase uncertainty 1/sqrt(F) from the classical Fisher information."""
    f = fisher_information(pump, tau, **kwargs)
    if f <= 0:
        raise ValueError(f"nonpositive Fisher information at tau={tau}")
    return f ** -0.5


def default_tau_range(n_mean: float, count: int = 600) -> tuple[float, float, int]:
    """High-gain scan range [N^(-1/2), 20 N^(-1/2)].

    The upper end is wide enough that the lowest uncertainty minimum (the
    two-peaked internal state) falls inside the scanned range for the pump
    photon numbers studied here; the position of that minimum does not
    scale with N^(-1/2), so a short range would only see the first dip.
    """
    lo = n_mean ** -0.5
    return (lo, 20.0 * lo, count)


def _golden_refine(f, a, b, best, rel_width: float = 1e-4):
    """Golden-section search for a minimum bracketed by [a, b].

    `best` is an already-evaluated (x, f(x)) seed; returns the best point
    seen once the bracket width is below rel_width relative to its center.
    """
    best_x, best_y = best
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    yc, yd = f(c), f(d)
    while (b - a) > rel_width * 0.5 * (a + b):
        if yc < yd:
            b, d, yd = d, c, yc
            c = b - _INV_PHI * (b - a)
            yc = f(c)
        else:
            a, c, yc = c, d, yd
            d = a + _INV_PHI * (b - a)
            yd = f(d)
        inner_x, inner_y = (c, yc) if yc < yd else (d, yd)
        if inner_y < best_y:
            best_x, best_y = inner_x, inner_y
    return best_x, best_y


def scan_minima(
    pump: PumpSpec,
    tau_start: float | None = None,
    tau_stop: float | None = None,
    tau_count: int = 600,
    *,
    objective=None,
    kind: str = "ep",
    delta: float = DEFAULT_DELTA,
    dphi_step: float = DEFAULT_FISHER_STEP,
    threshold: float = DEFAULT_TRUNCATION,
    store: SpectralStore | None = None,
) -> MinimaReport:
    """Locate the first and the lowest minimum of the uncertainty over tau.

    Scans a grid in the high-gain region (tau >= N^(-1/2)), takes the first
    interior grid point strictly lower than both neighbors as the first
    minimum and the global grid minimum as the lowest one, and refines each
    by golden-section search to 1e-4 relative bracket width.

    `kind` selects the error-propagation ("ep") or Fisher-information
    ("fisher") uncertainty; `objective` (a callable tau -> uncertainty)
    overrides both and serves as a test seam.
    """
    n_mean = pump.n_mean
    if tau_start is None or tau_stop is None:
        d_start, d_stop, _ = default_tau_range(n_mean)
        tau_start = d_start if tau_start is None else tau_start
        tau_stop = d_stop if tau_stop is None else tau_stop
    if tau_count < 100:
        raise ValueError("tau_count must be at least 100")
    if n_mean > 0 and tau_start < n_mean ** -0.5 * (1.0 - 1e-12):
        raise ValueError(
            f"tau_start={tau_start} is below the high-gain boundary N^(-1/2)={n_mean ** -0.5}"
        )
    if tau_stop <= tau_start:
        raise ValueError("tau_stop must exceed tau_start")

    taus = np.linspace(tau_start, tau_stop, tau_count)
    if objective is not None:
        values = np.array([objective(float(t)) for t in taus])
        scalar = objective
    elif kind == "fisher":
        f = fisher_sweep(pump, taus, dphi_step=dphi_step, delta=delta, threshold=threshold, store=store)
        values = f ** -0.5

        def scalar(t):
            return fisher_uncertainty(
                pump, t, dphi_step=dphi_step, delta=delta, threshold=threshold, store=store
            )
    elif kind == "ep":
        pts = uncertainty_sweep(pump, taus, delta=delta, threshold=threshold, store=store)
        values = np.array([p.dphi_ep for p in pts])

        def scalar(t):
            return phase_uncertainty_ep(pump, t, delta=delta, threshold=threshold, store=store).dphi_ep
    else:
        raise ValueError(f"unknown scan kind {kind!r}")

    interior = np.flatnonzero(
        (values[1:-1] < values[:-2]) & (values[1:-1] < values[2:])
    )
    if interior.size == 0:
        raise ValueError(
            f"no interior local minimum of the uncertainty in [{tau_start}, {tau_stop}]; "
            "try a larger tau_stop"
        )
    i = int(interior[0]) + 1
    tau_1, dphi_1 = _golden_refine(scalar, taus[i - 1], taus[i + 1], (taus[i], values[i]))

    g = int(np.argmin(values))
    if 0 < g < tau_count - 1:
        tau_min, dphi_min = _golden_refine(scalar, taus[g - 1], taus[g + 1], (taus[g], values[g]))
    else:
        tau_min, dphi_min = float(taus[g]), float(values[g])
    if dphi_1 < dphi_min:
        tau_min, dphi_min = tau_1, dphi_1

    return MinimaReport(
        n_mean=n_mean,
        tau_grid=(float(tau_start), float(tau_stop), int(tau_count)),
        tau_1=float(tau_1),
        dphi_at_tau_1=float(dphi_1),
        tau_min=float(tau_min),
        dphi_at_tau_min=float(dphi_min),
    )


def fit_heisenberg(points, fit_n_min: float = 10.0) -> ScalingFit:
    """Fixed-slope (-1) log-space fit of dphi = c / N for n_mean >= fit_n_min."""
    points = [(float(n), float(d)) for n, d in points]
    selected = [(n, d) for n, d in points if n >= fit_n_min]
    if len(selected) < 3:
        raise ValueError(f"need at least 3 points with n_mean >= {fit_n_min}, got {len(selected)}")
    logs = [math.log(d * n) for n, d in selected]
    return ScalingFit(points=points, prefactor=math.exp(sum(logs) / len(logs)), fit_n_min=fit_n_min)


def fit_power_law(points, fit_n_min: float = 10.0) -> tuple[float, float]:
    """Free-slope diagnostic fit dphi = c * N^s; returns (c, s)."""
    selected = [(n, d) for n, d in points if n >= fit_n_min]
    if len(selected) < 3:
        raise ValueError(f"need at least 3 points with n_mean >= {fit_n_min}, got {len(selected)}")
    x = np.log([n for n, _ in selected])
    y = np.log([d for _, d in selected])
    slope, intercept = np.polyfit(x, y, 1)
    return float(math.exp(intercept)), float(slope)
