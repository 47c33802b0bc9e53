"""Composition of the two parametric amplifiers and photon statistics.

Amplifier A acts at the reference phase 0, amplifier B at the
interferometer phase phi = phi_p - phi_s - phi_i, both with the same
interaction strength tau.  Signal and idler share the sector index, so
their photon-number statistics are identical by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import fock
from .fock import SpectralStore, StateVector
from .pumps import PumpSpec, SectorEnsemble, SectorEntry, expand, DEFAULT_TRUNCATION


@dataclass
class InternalState:
    """State after amplifier A, plus signal photon statistics inside the NLI."""

    tau: float
    ensemble_a: SectorEnsemble
    n_int_mean: float
    distribution_int: np.ndarray


@dataclass
class NLIResult:
    """Output of the full interferometer at one (tau, phi) point."""

    phi: float
    tau: float
    ensemble_out: SectorEnsemble
    n_out_mean: float
    n_out_var: float
    distribution: np.ndarray


def _as_ensemble(pump, threshold: float) -> SectorEnsemble:
    if isinstance(pump, SectorEnsemble):
        return pump
    if isinstance(pump, PumpSpec):
        return expand(pump, threshold=threshold)
    raise TypeError(f"expected PumpSpec or SectorEnsemble, got {type(pump).__name__}")


def _aggregate(entries, weights_sum: float, k_max: int):
    """Weighted signal photon-number distribution and its first two moments."""
    dist = np.zeros(k_max + 1)
    for e in entries:
        dist[: e.sector.dim] += e.weight * e.state.probabilities()
    dist /= weights_sum
    k = np.arange(k_max + 1, dtype=float)
    mean = float(dist @ k)
    var = float(dist @ (k * k) - mean * mean)
    return dist, mean, max(var, 0.0)


def run_amplifier_a(
    pump,
    tau: float,
    *,
    threshold: float = DEFAULT_TRUNCATION,
    store: SpectralStore | None = None,
) -> InternalState:
    """Propagate the input through amplifier A (phase 0)."""
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    ensemble = _as_ensemble(pump, threshold)
    store = store or fock.DEFAULT_STORE
    out = []
    for e in ensemble.entries:
        spec = store.get(e.sector.n_total)
        c_a = fock.evolve_coeffs(e.state.coeffs, spec, tau, 0.0)
        out.append(SectorEntry(e.sector, e.weight, StateVector(e.sector, c_a)))
    ens_a = SectorEnsemble(entries=tuple(out), weights_sum=ensemble.weights_sum)
    dist, mean, _ = _aggregate(ens_a.entries, ens_a.weights_sum, ens_a.max_n_total)
    return InternalState(tau=tau, ensemble_a=ens_a, n_int_mean=mean, distribution_int=dist)


def run_amplifier_b(internal: InternalState, phi: float, *, store: SpectralStore | None = None) -> NLIResult:
    """Propagate an amplifier-A state through amplifier B at phase phi."""
    store = store or fock.DEFAULT_STORE
    out = []
    for e in internal.ensemble_a.entries:
        spec = store.get(e.sector.n_total)
        c_b = fock.evolve_coeffs(e.state.coeffs, spec, internal.tau, phi)
        out.append(SectorEntry(e.sector, e.weight, StateVector(e.sector, c_b)))
    ens = SectorEnsemble(entries=tuple(out), weights_sum=internal.ensemble_a.weights_sum)
    dist, mean, var = _aggregate(ens.entries, ens.weights_sum, ens.max_n_total)
    return NLIResult(phi=phi, tau=internal.tau, ensemble_out=ens, n_out_mean=mean, n_out_var=var, distribution=dist)


def run_nli(
    pump,
    tau: float,
    phi: float,
    *,
    threshold: float = DEFAULT_TRUNCATION,
    store: SpectralStore | None = None,
) -> NLIResult:
    """Full interferometer: amplifier A at phase 0, then amplifier B at phase phi."""
    internal = run_amplifier_a(pump, tau, threshold=threshold, store=store)
    return run_amplifier_b(internal, phi, store=store)


def interference_pattern(
    pump,
    tau: float,
    phi_grid,
    *,
    threshold: float = DEFAULT_TRUNCATION,
    store: SpectralStore | None = None,
) -> list[NLIResult]:
    """One NLIResult per phase; the amplifier-A state is computed once."""
    phi_grid = np.asarray(phi_grid, dtype=float)
    if phi_grid.size == 0:
        raise ValueError("phi grid must be nonempty")
    internal = run_amplifier_a(pump, tau, threshold=threshold, store=store)
    store = store or fock.DEFAULT_STORE

    k_max = internal.ensemble_a.max_n_total
    n_phi = phi_grid.size
    dist = np.zeros((n_phi, k_max + 1))
    amps = []  # per sector: (entry, (n_phi, dim) output amplitudes)
    for e in internal.ensemble_a.entries:
        spec = store.get(e.sector.n_total)
        c_b = fock.evolve_thetas(e.state.coeffs, spec, tau, phi_grid)
        amps.append((e, c_b))
        dist[:, : e.sector.dim] += e.weight * np.abs(c_b) ** 2
    dist /= internal.ensemble_a.weights_sum

    k = np.arange(k_max + 1, dtype=float)
    means = dist @ k
    second = dist @ (k * k)
    variances = np.maximum(second - means * means, 0.0)

    results = []
    for j, phi in enumerate(phi_grid):
        entries = tuple(
            SectorEntry(e.sector, e.weight, StateVector(e.sector, c_b[j])) for e, c_b in amps
        )
        ens = SectorEnsemble(entries=entries, weights_sum=internal.ensemble_a.weights_sum)
        results.append(
            NLIResult(
                phi=float(phi),
                tau=tau,
                ensemble_out=ens,
                n_out_mean=float(means[j]),
                n_out_var=float(variances[j]),
                distribution=dist[j],
            )
        )
    return results


def sweep_statistics(
    pump,
    taus,
    phis,
    *,
    threshold: float = DEFAULT_TRUNCATION,
    store: SpectralStore | None = None,
):
    """Vectorized tau sweep used by the metrology scans.

    Returns (dist, n_int) where dist has shape (len(phis), len(taus), K)
    with dist[j, i] the output photon-number distribution at
    (tau=taus[i], phi=phis[j]), and n_int[i] is the mean internal signal
    photon number after amplifier A at taus[i].
    """
    taus = np.asarray(taus, dtype=float)
    phis = np.asarray(phis, dtype=float)
    if np.any(taus < 0):
        raise ValueError("tau must be nonnegative")
    ensemble = _as_ensemble(pump, threshold)
    store = store or fock.DEFAULT_STORE

    k_max = ensemble.max_n_total
    dist = np.zeros((phis.size, taus.size, k_max + 1))
    n_int = np.zeros(taus.size)
    for e in ensemble.entries:
        spec = store.get(e.sector.n_total)
        c_a = fock.evolve_taus(e.state.coeffs, spec, taus, 0.0)  # (n_tau, dim)
        nu = np.arange(e.sector.dim, dtype=float)
        n_int += e.weight * (np.abs(c_a) ** 2 @ nu)
        for j, phi in enumerate(phis):
            c_b = fock.evolve_rows(c_a, spec, taus, float(phi))
            dist[j, :, : e.sector.dim] += e.weight * np.abs(c_b) ** 2
    dist /= ensemble.weights_sum
    n_int /= ensemble.weights_sum
    return dist, n_int
