"""End-to-end acceptance gate.

Each test verifies one headline claim of the simulation: exactness of the
spectral propagation, physical conservation laws, the dark fringe, the
parametric-approximation limits, high-gain structure, Heisenberg-scaling
prefactors, the odd/even pump-number effect, the Cramer-Rao bound, and the
robustness of the dark-fringe difference quotient.  One PASS/FAIL line per
test is printed in the terminal summary (see conftest.py).
"""

import math
import time

import numpy as np
import pytest

from nlisim.engine import run_amplifier_a, run_nli
from nlisim.fock import FockSector, StateVector, build_coupling, ode_oracle, propagate, spectral
from nlisim.metrology import (
    fisher_information,
    fisher_sweep,
    fit_heisenberg,
    pa_internal_photons,
    pa_uncertainty,
    phase_uncertainty_ep,
    scan_minima,
    uncertainty_sweep,
)
from nlisim.pumps import coherent_pump, fock_pump


def interior_minima(values):
    """Indices of grid points strictly lower than both neighbors."""
    v = np.asarray(values)
    return np.flatnonzero((v[1:-1] < v[:-2]) & (v[1:-1] < v[2:])) + 1


def test_oracle_equivalence():
    # spectral propagation against a fixed-step RK4 integration of the
    # sector Schrodinger equation, random sectors/states/angles
    rng = np.random.default_rng(2024)
    started = time.monotonic()
    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(1, 31))
        sector = FockSector(n)
        c = rng.standard_normal(sector.dim) + 1j * rng.standard_normal(sector.dim)
        state = StateVector(sector, c / np.linalg.norm(c))
        tau = float(rng.uniform(0.0, 2.0))
        theta = float(rng.uniform(0.0, 2.0 * math.pi))
        got = propagate(state, spectral(n), tau, theta)
        ref = ode_oracle(state, build_coupling(sector), tau, theta=theta, step=1e-4)
        worst = max(worst, float(np.abs(got.coeffs - ref.coeffs).max()))
    assert worst < 1e-8
    assert time.monotonic() - started < 60.0


def test_unitarity_and_conservation():
    rng = np.random.default_rng(7)
    for _ in range(20):
        n = int(rng.integers(1, 41))
        sector = FockSector(n)
        c = rng.standard_normal(sector.dim) + 1j * rng.standard_normal(sector.dim)
        state = StateVector(sector, c / np.linalg.norm(c))
        out = propagate(state, spectral(n), float(rng.uniform(0.0, 3.0)), float(rng.uniform(0.0, 2 * math.pi)))
        assert abs(out.norm() - 1.0) < 1e-12
        p = out.probabilities()
        nu = np.arange(sector.dim)
        mean_signal = float(p @ nu)
        mean_idler = float(p @ nu)  # signal and idler share the pair index
        mean_pump = float(p @ (n - nu))
        assert mean_signal == mean_idler
        assert abs(mean_pump + mean_signal - n) < 1e-10
    # conservation holds through the full interferometer as well
    res = run_nli(coherent_pump(5.0), 0.7, 1.1)
    for e in res.ensemble_out.entries:
        p = e.state.probabilities()
        nu = np.arange(e.sector.dim)
        total = float(p @ (e.sector.n_total - nu)) + float(p @ nu)
        assert abs(total - e.sector.n_total) < 1e-10


def test_dark_fringe():
    for pump in (fock_pump(1), fock_pump(5), fock_pump(50),
                 coherent_pump(1.0), coherent_pump(5.0), coherent_pump(50.0)):
        for tau in (0.2, 0.5, 0.9):
            res = run_nli(pump, tau, math.pi)
            assert res.n_out_mean < 1e-10
            assert res.n_out_var < 1e-10


def test_n1_closed_forms():
    for tau in (0.3, math.pi / 4, 1.1):
        for phi in (0.0, 0.8, 2.0):
            res = run_nli(fock_pump(1), tau, phi)
            expected = math.sin(2 * tau) ** 2 * math.cos(phi / 2) ** 2
            assert res.n_out_mean == pytest.approx(expected, abs=1e-6)
        closed = 1.0 / abs(math.sin(2 * tau))
        assert phase_uncertainty_ep(fock_pump(1), tau).dphi_ep == pytest.approx(closed, rel=1e-6)
        assert fisher_information(fock_pump(1), tau) ** -0.5 == pytest.approx(closed, rel=1e-6)
    # the 1/N point at N = 1
    assert phase_uncertainty_ep(fock_pump(1), math.pi / 4).dphi_ep == pytest.approx(1.0, rel=1e-6)


def test_low_gain_parametric_agreement():
    gains = np.linspace(0.05, 0.3, 6)
    for n in (5, 50, 100):
        for pump in (fock_pump(n), coherent_pump(float(n))):
            for u in uncertainty_sweep(pump, gains / math.sqrt(n)):
                assert abs(u.dphi_ep / u.dphi_pa_formula - 1.0) < 0.05


def test_high_gain_band_structure():
    # Fock N = 50 over tau in [N^(-1/2), 6 N^(-1/2)]: several oscillation
    # minima, a bounded log-width band past the first minimum, and a clear
    # departure of the ad-hoc parametric estimate from the exact uncertainty
    n = 50
    taus = np.linspace(n ** -0.5, 6 * n ** -0.5, 400)
    pts = uncertainty_sweep(fock_pump(n), taus)
    dphi = np.array([p.dphi_ep for p in pts])
    adhoc = np.array([p.dphi_pa_adhoc for p in pts])
    minima = interior_minima(dphi)
    assert np.max(np.abs(adhoc - dphi) / dphi) > 0.10
    assert minima.size >= 1
    first = minima[0]
    band = dphi[first:]
    assert math.log10(band.max() / band.min()) < 1.5
    assert minima.size >= 3


def test_heisenberg_scaling_fits():
    ns = list(range(10, 110, 10))
    fock_ep, coh_ep, coh_fi = [], [], []
    for n in ns:
        rep = scan_minima(fock_pump(n))
        assert rep.dphi_at_tau_1 < n ** -0.5
        fock_ep.append((float(n), rep.dphi_at_tau_1))
        rep = scan_minima(coherent_pump(float(n)))
        assert rep.dphi_at_tau_1 < n ** -0.5
        coh_ep.append((float(n), rep.dphi_at_tau_1))
        rep = scan_minima(coherent_pump(float(n)), kind="fisher")
        assert rep.dphi_at_tau_1 < n ** -0.5
        coh_fi.append((float(n), rep.dphi_at_tau_1))
    assert fit_heisenberg(fock_ep).prefactor == pytest.approx(1.820, abs=0.05)
    assert fit_heisenberg(coh_ep).prefactor == pytest.approx(1.810, abs=0.05)
    assert fit_heisenberg(coh_fi).prefactor == pytest.approx(1.591, abs=0.05)


def test_odd_even_pump_structure():
    rep9 = scan_minima(fock_pump(9))
    rep10 = scan_minima(fock_pump(10))
    assert rep9.dphi_at_tau_min < rep10.dphi_at_tau_min

    # the internal state at the lowest minimum has its mass concentrated at
    # the two extreme pair numbers, and for odd N the interior even-pair
    # probabilities are strongly suppressed
    dist9 = run_amplifier_a(fock_pump(9), rep9.tau_min).distribution_int
    assert set(np.argsort(dist9)[-2:]) == {0, 9}
    smaller_peak = min(dist9[0], dist9[9])
    for nu in (2, 4, 6, 8):
        assert dist9[nu] < 0.25 * smaller_peak

    dist10 = run_amplifier_a(fock_pump(10), rep10.tau_min).distribution_int
    assert set(np.argsort(dist10)[-2:]) == {1, 10}


def test_cramer_rao_ordering():
    n = 5.0
    pump = coherent_pump(n)
    taus = np.linspace(0.05 * n ** -0.5, 6 * n ** -0.5, 200)
    dphi_fi = fisher_sweep(pump, taus) ** -0.5
    dphi_ep = np.array([u.dphi_ep for u in uncertainty_sweep(pump, taus)])
    assert np.all(dphi_fi <= dphi_ep * (1 + 1e-3))
    low_gain = taus * math.sqrt(n) <= 0.3
    assert np.max(np.abs(dphi_fi[low_gain] / dphi_ep[low_gain] - 1.0)) < 0.02


def test_delta_robustness():
    cases = [(fock_pump(7), np.linspace(0.4, 2.0, 10)),
             (coherent_pump(3.5), np.linspace(0.55, 2.2, 10))]
    for pump, taus in cases:
        a = np.array([u.dphi_ep for u in uncertainty_sweep(pump, taus)])
        b = np.array([u.dphi_ep for u in uncertainty_sweep(pump, taus, delta=math.pi * 1e-9 / 4)])
        assert np.max(np.abs(a / b - 1.0)) < 1e-4
