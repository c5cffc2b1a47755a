import mpmath as mp
import numpy as np
import pytest

from whithamlab import theta as th
from whithamlab.errors import InvalidInputError

TAUS = [1j, 0.3 + 1.2j]


def mp_theta(z, tau, derivative=0):
    # the odd theta used here is -i exp(-i pi tau / 4) theta_1(pi z | q = exp(i pi tau))
    q = mp.exp(1j * mp.pi * tau)
    val = mp.jtheta(1, mp.pi * z, q, derivative) * mp.pi**derivative
    return complex(-1j * mp.exp(-1j * mp.pi * tau / 4) * val)


@pytest.mark.parametrize("tau", TAUS)
@pytest.mark.parametrize("z", [0.21 - 0.17j, -0.4 + 0.9j, 1.7 + 2.3j, -3.2 - 1.1j])
def test_theta_and_derivatives_match_mpmath(tau, z):
    val, d1, d2 = th.theta_all(z, tau)
    for got, order in ((val, 0), (d1, 1), (d2, 2)):
        ref = mp_theta(z, tau, order)
        assert abs(got - ref) <= 1e-12 * max(1.0, abs(ref))


@pytest.mark.parametrize("tau", TAUS)
def test_reduced_series_matches_bruteforce(tau):
    z = np.array([0.1 + 0.2j, 0.7 - 0.9j, -0.45 + 1.1j])
    assert np.allclose(th.theta(z, tau), th.theta_bruteforce(z, tau), rtol=1e-13, atol=1e-14)


@pytest.mark.parametrize("tau", TAUS)
def test_identities_hold_to_1e9(tau):
    out = th.check_theta_identities(tau, 100, seed=1)
    assert out["samples"] == 100
    for key in ("odd", "period_1", "period_tau", "heat", "four_term"):
        assert out[key] < 1e-9, key


def test_single_zero_per_cell_and_normalisation():
    tau = 0.3 + 1.2j
    assert abs(th.theta(0.0, tau)) < 1e-15
    assert abs(th.theta(1 + tau, tau)) < 1e-13
    x, y = 0.3 + 0.1j, 0.3 + 0.1j + 1e-6
    assert abs(th.prime_form_g1(x, y, tau) - (x - y)) < 1e-12


def test_prime_form_is_antisymmetric():
    tau = 1j
    x, y = 0.2 + 0.3j, -0.4 + 0.1j
    assert abs(th.prime_form_g1(x, y, tau) + th.prime_form_g1(y, x, tau)) < 1e-15


@pytest.mark.parametrize("tau", TAUS)
def test_tau_derivative_two_ways(tau):
    z = np.array([0.15 + 0.1j, -0.3 + 0.45j])
    assert np.allclose(th.theta_dtau(z, tau), th.theta_dtau_series(z, tau), rtol=1e-12)
    h = 1e-5
    fd = (th.theta(z, tau + h) - th.theta(z, tau - h)) / (2 * h)
    assert np.allclose(th.theta_dtau(z, tau), fd, rtol=1e-8)


def test_fay_identity_genus_one():
    rng = np.random.default_rng(0)
    vals = rng.uniform(-0.6, 0.6, (20, 5)) + 1j * rng.uniform(-0.6, 0.6, (20, 5))
    res = [th.fay_residual_g1(*row, 1j) for row in vals]
    assert max(res) < 1e-9


def test_lower_half_plane_rejected():
    with pytest.raises(InvalidInputError):
        th.theta(0.1, -1j)
    with pytest.raises(InvalidInputError):
        th.LatticeParam(0.5)


def test_lattice_distance():
    tau = 1j
    assert th.lattice_distance(np.array([1 + 2j]), tau)[0] < 1e-12
    assert th.lattice_distance(np.array([0.5 + 0.5j]), tau)[0] == pytest.approx(np.sqrt(0.5))
