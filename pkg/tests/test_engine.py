"""Full interferometer: amplifier composition and photon statistics."""

import math

import numpy as np
import pytest

from nlisim import fock
from nlisim.engine import interference_pattern, run_amplifier_a, run_nli
from nlisim.pumps import coherent_pump, fock_pump


def oracle_nli_distribution(pump, tau, phi, threshold=1e-5):
    """RK4-based reference for the output distribution, independent of the
    spectral propagation path."""
    from nlisim.pumps import expand

    ens = expand(pump, threshold=threshold)
    k_max = ens.max_n_total
    dist = np.zeros(k_max + 1)
    for e in ens.entries:
        coupling = fock.build_coupling(e.sector)
        after_a = fock.ode_oracle(e.state, coupling, tau, theta=0.0, step=min(1e-4, tau / 200))
        after_b = fock.ode_oracle(after_a, coupling, tau, theta=phi, step=min(1e-4, tau / 200))
        dist[: e.sector.dim] += e.weight * after_b.probabilities()
    return dist / ens.weights_sum


def test_no_interaction():
    for pump in (fock_pump(6), coherent_pump(3.2)):
        state = run_amplifier_a(pump, 0.0)
        assert state.n_int_mean == pytest.approx(0.0, abs=1e-14)
        assert state.distribution_int[0] == pytest.approx(1.0, abs=1e-12)


def test_internal_photons_n1():
    for tau in (0.3, 1.1):
        state = run_amplifier_a(fock_pump(1), tau)
        assert state.n_int_mean == pytest.approx(math.sin(tau) ** 2, abs=1e-12)


def test_output_closed_form_n1():
    for tau, phi in ((0.4, 0.9), (1.2, 2.5)):
        res = run_nli(fock_pump(1), tau, phi)
        expected = math.sin(2 * tau) ** 2 * math.cos(phi / 2) ** 2
        assert res.n_out_mean == pytest.approx(expected, abs=1e-12)


def test_dark_fringe():
    for pump in (fock_pump(5), coherent_pump(5.0)):
        for tau in (0.2, 0.9):
            res = run_nli(pump, tau, math.pi)
            assert res.n_out_mean < 1e-10
            assert res.n_out_var < 1e-10


def test_distribution_normalized():
    res = run_nli(coherent_pump(4.0), 0.7, 1.9)
    assert res.distribution.sum() == pytest.approx(1.0, abs=1e-10)
    k = np.arange(len(res.distribution))
    assert res.n_out_mean == pytest.approx(float(res.distribution @ k), abs=1e-12)
    second = float(res.distribution @ (k * k))
    assert res.n_out_var == pytest.approx(second - res.n_out_mean**2, abs=1e-12)
    assert res.n_out_var >= 0


def test_two_pi_periodicity():
    for phi in (0.3, 2.0):
        a = run_nli(fock_pump(5), 0.8, phi)
        b = run_nli(fock_pump(5), 0.8, phi + 2 * math.pi)
        assert abs(a.n_out_mean - b.n_out_mean) < 1e-12
        assert abs(a.n_out_var - b.n_out_var) < 1e-12


def test_reflection_symmetry_about_dark_fringe():
    for pump in (fock_pump(7), coherent_pump(5.0)):
        for u in (0.1, 1.0, 2.7):
            a = run_nli(pump, 0.6, math.pi + u)
            b = run_nli(pump, 0.6, math.pi - u)
            assert abs(a.n_out_mean - b.n_out_mean) < 1e-10
            assert abs(a.n_out_var - b.n_out_var) < 1e-10


def test_sector_conservation():
    # within each sector, pump photons plus signal photons add to n_total,
    # and signal and idler counts share the index nu
    internal = run_amplifier_a(coherent_pump(6.0), 0.9)
    for e in internal.ensemble_a.entries:
        p = e.state.probabilities()
        nu = np.arange(e.sector.dim)
        mean_signal = float(p @ nu)
        mean_pump = float(p @ (e.sector.n_total - nu))
        assert mean_pump + mean_signal == pytest.approx(e.sector.n_total, abs=1e-10)


def test_pattern_matches_pointwise_runs():
    phis = np.linspace(0.0, 2 * math.pi, 11)
    pattern = interference_pattern(coherent_pump(3.0), 0.5, phis)
    for res in pattern:
        single = run_nli(coherent_pump(3.0), 0.5, res.phi)
        assert abs(res.n_out_mean - single.n_out_mean) < 1e-12
        assert abs(res.n_out_var - single.n_out_var) < 1e-12


def test_pattern_closed_form_n1():
    tau = math.pi / 8
    phis = np.linspace(0.0, 2 * math.pi, 5)
    pattern = interference_pattern(fock_pump(1), tau, phis)
    for res in pattern:
        expected = math.sin(2 * tau) ** 2 * math.cos(res.phi / 2) ** 2
        assert res.n_out_mean == pytest.approx(expected, abs=1e-12)


def test_empty_grid_rejected():
    with pytest.raises(ValueError, match="nonempty"):
        interference_pattern(fock_pump(2), 0.4, [])


def test_negative_tau_rejected():
    with pytest.raises(ValueError, match="nonnegative"):
        run_amplifier_a(fock_pump(2), -0.1)


@pytest.mark.parametrize("pump,tau", [(fock_pump(5), 0.9), (coherent_pump(5.0), 0.9)])
def test_distribution_against_ode_oracle(pump, tau):
    for phi in (0.0, 1.3, 2.2, 4.0, 5.9):
        ref = oracle_nli_distribution(pump, tau, phi)
        got = run_nli(pump, tau, phi).distribution
        assert np.abs(got - ref).max() < 1e-8


def test_fock_pattern_shape_n5():
    phis = np.linspace(0.0, 2 * math.pi, 73)
    for tau in (0.2, 0.5, 0.9):
        values = np.array([r.n_out_mean for r in interference_pattern(fock_pump(5), tau, phis)])
        assert values[36] < 1e-10  # exact null at phi = pi
        np.testing.assert_allclose(values, values[::-1], atol=1e-10)  # symmetric fringe
        # bright side of the fringe: every point off the dark fringe region
        # is higher than the null, and the pattern is phase sensitive
        assert values.max() > 0.5
    # low-gain fringes peak at phi = 0 mod 2pi
    for tau in (0.2, 0.5):
        values = np.array([r.n_out_mean for r in interference_pattern(fock_pump(5), tau, phis)])
        assert values.argmax() in (0, 72)
