"""Interferometer input states: Fock or coherent pump, vacuum signal/idler.

A Fock pump |N> occupies a single photon-number sector.  A coherent pump
|alpha> with mean photon number N = |alpha|^2 is a Poisson-weighted
superposition of sectors; sectors whose weight falls below a configurable
fraction of the reference sector's weight are truncated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .fock import FockSector, StateVector, basis_state

DEFAULT_TRUNCATION = 1e-5

FOCK = "fock"
COHERENT = "coherent"


@dataclass(frozen=True)
class PumpSpec:
    """Input pump description: kind, mean photon number, optional phase of alpha."""

    kind: str
    n_mean: float
    alpha_phase: float = 0.0

    def __post_init__(self):
        if self.kind not in (FOCK, COHERENT):
            raise ValueError(f"pump kind must be 'fock' or 'coherent', got {self.kind!r}")
        if self.n_mean < 0:
            raise ValueError(f"n_mean must be nonnegative, got {self.n_mean}")
        if self.kind == FOCK and float(self.n_mean) != int(self.n_mean):
            raise ValueError(f"Fock pump requires an integer photon number, got {self.n_mean}")


def fock_pump(n: int) -> PumpSpec:
    return PumpSpec(FOCK, n)


def coherent_pump(n_mean: float, alpha_phase: float = 0.0) -> PumpSpec:
    return PumpSpec(COHERENT, n_mean, alpha_phase)


@dataclass(frozen=True)
class SectorEntry:
    sector: FockSector
    weight: float
    state: StateVector


@dataclass(frozen=True)
class SectorEnsemble:
    """Weighted mixture-free superposition of sectors; sectors are orthogonal,
    so photon-number statistics are weight-additive across entries."""

    entries: tuple[SectorEntry, ...]
    weights_sum: float

    @property
    def max_n_total(self) -> int:
        return max(e.sector.n_total for e in self.entries)


def expand(
    pump: PumpSpec,
    threshold: float = DEFAULT_TRUNCATION,
    reference: int | None = None,
) -> SectorEnsemble:
    """Expand a pump over photon-number sectors.

    For a coherent pump, sector n is retained when its Poisson weight is at
    least `threshold` times the weight of the reference sector (the nearest
    integer to n_mean unless overridden).  The retained set is a contiguous
    range around the Poisson mode.
    """
    if threshold <= 0:
        raise ValueError("threshold must be positive")

    if pump.kind == FOCK:
        sector = FockSector(int(pump.n_mean))
        entry = SectorEntry(sector, 1.0, basis_state(sector))
        return SectorEnsemble(entries=(entry,), weights_sum=1.0)

    n_mean = float(pump.n_mean)
    if n_mean == 0.0:
        sector = FockSector(0)
        return SectorEnsemble(entries=(SectorEntry(sector, 1.0, basis_state(sector)),), weights_sum=1.0)

    ref = int(round(n_mean)) if reference is None else int(reference)
    n_hi = int(n_mean + 12.0 * math.sqrt(n_mean) + 30.0)
    n_hi = max(n_hi, ref + 1)
    grid = np.arange(n_hi + 1)
    weights = stats.poisson.pmf(grid, n_mean)
    cut = threshold * weights[ref]
    mask = weights >= cut

    mode = int(np.argmax(weights))
    lo = mode
    while lo > 0 and mask[lo - 1]:
        lo -= 1
    hi = mode
    while hi < n_hi and mask[hi + 1]:
        hi += 1

    entries = []
    for n in range(lo, hi + 1):
        sector = FockSector(n)
        entries.append(
            SectorEntry(sector, float(weights[n]), basis_state(sector, phase=n * pump.alpha_phase))
        )
    weights_sum = float(weights[lo : hi + 1].sum())
    return SectorEnsemble(entries=tuple(entries), weights_sum=weights_sum)
