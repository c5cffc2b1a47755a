import numpy as np
import pytest

from whithamlab import genus1 as g1
from whithamlab import suites
from whithamlab.errors import GeometryError, InvalidInputError


def cycles(cfg):
    return [k for k, d in cfg.contours.items() if not g1._z_anchored(d)]


@pytest.fixture(scope="module")
def residuals(g1_cfgs):
    out = {}
    for key, cfg in g1_cfgs.items():
        rng = np.random.default_rng(11)
        zs = g1.sample_z_g1(cfg, 8, rng, cycles(cfg), visible=True).points
        out[key] = {c: suites.derivative_residuals_g1(cfg, c, zs) for c in cycles(cfg)}
    return out


def test_exponent_sum_enforced():
    with pytest.raises(InvalidInputError, match=r"s_1 \+ \.\.\. \+ s_\(n\+1\) = 0"):
        g1.Genus1Config((0.5 + 0.5j,), (0.3, -0.2), 0.1, 0.0, 1j)


def test_lattice_and_eta_checks():
    with pytest.raises(InvalidInputError):
        g1.Genus1Config((1.0 + 1j,), (0.3, -0.3), 0.1, 0.0, 1j)
    # eta = 0.3 * 0.5 + a lands on the lattice for a = -0.15
    with pytest.raises(InvalidInputError):
        g1.Genus1Config((0.5,), (0.3, -0.3), -0.15, 0.0, 1j)
    with pytest.raises(InvalidInputError):
        g1.Genus1Config((0.5,), (0.3, -0.3), 0.1, 0.0, -1j)


@pytest.mark.parametrize("name", ["n1", "n2", "n2_b0"])
def test_z_and_u_derivatives(residuals, name):
    for c, res in residuals[name].items():
        assert max(res["dz"], *(v for k, v in res.items() if k.startswith("du"))) < 1e-6, (c, res)


@pytest.mark.parametrize("name", ["n1", "n2", "n2_b0"])
def test_sum_form_tau_derivative_at_fixed_comoving_constant(residuals, name):
    for c, res in residuals[name].items():
        assert res["dtau"] < 1e-5, c


@pytest.mark.parametrize("name", ["n1", "n2", "n2_b0"])
def test_fixed_a_tau_derivative(residuals, name):
    for c, res in residuals[name].items():
        assert res["dtau_fixed_a"] < 1e-5, c


def test_sum_form_equals_fixed_a_derivative_when_b_vanishes(residuals):
    for c, res in residuals["n2_b0"].items():
        assert res["dtau_sum_form_fixed_a"] < 1e-5, c


def test_sum_form_misses_the_a_term_when_b_nonzero(residuals):
    # documents the convention: at fixed a the extra -(b / 2 pi i) dP/da term is not small
    assert max(r["dtau_sum_form_fixed_a"] for r in residuals["n1"].values()) > 1e-2


def test_a_derivative_against_finite_difference(g1_cfgs):
    cfg = g1_cfgs["n1"]
    z = np.array([cfg.reference_point, cfg.reference_point + 0.1j])
    h = 1e-5
    plus = g1.potentials_g1(z, "g1", cfg.replace(a=cfg.a + h))[0]
    minus = g1.potentials_g1(z, "g1", cfg.replace(a=cfg.a - h))[0]
    closed = g1.dP_da_g1(z, "g1", cfg)
    assert np.abs(closed - (plus - minus) / (2 * h)).max() < 1e-8 * np.abs(closed).max()


@pytest.mark.parametrize("name", ["n1", "n2"])
def test_quasi_periodicity_every_slot(g1_cfgs, name):
    cfg = g1_cfgs[name]
    a, b = cycles(cfg)[:2]
    for l in range(1, cfg.n + 2):
        out = g1.quasi_periodicity_check(a, b, l, cfg, 20, seed=l)
        assert out["period_1"] < 1e-7 and out["period_tau"] < 1e-7
        assert out["simple_poles"]


def test_quasi_periodicity_multiplier_is_exp_minus_4_pi_i_eta(g1_cfgs):
    # the single-eta multiplier exp(-2 pi i eta) fails once eta is away from 1/2 Z
    out = g1.quasi_periodicity_check("g1", "gA", 1, g1_cfgs["n1"], 10, seed=0)
    assert out["period_tau_printed_multiplier"] > 1e-2


def test_identical_contours_give_zero_phi(g1_cfgs):
    out = g1.quasi_periodicity_check("g1", "g1", 1, g1_cfgs["n1"], 5)
    assert out["period_1"] == 0 and out["period_tau"] == 0


@pytest.mark.parametrize("name", ["n1", "n2", "n2_b0"])
def test_ranks(g1_cfgs, name):
    cfg = g1_cfgs[name]
    names = cycles(cfg)
    cross = g1.span_probe_g1(cfg, names, "cross", seed=4)
    pots = g1.span_probe_g1(cfg, names, "potentials", seed=5)
    assert cross.rank == cfg.n + 1 and cross.gap >= 100
    assert pots.rank == cfg.n + 2 and pots.gap >= 100


def test_small_circle(g1_cfgs):
    cfg = g1_cfgs["n1"]
    P, _ = g1.potential_g1(cfg.center + 0.1, "small", cfg)
    assert abs(P + 2j * np.pi) < 1e-6
    dz, du, dtau = g1.dP_closed_g1(cfg.center + 0.1, "small", cfg)
    assert dz == 0 and np.all(du == 0) and dtau == 0


def test_circle_around_puncture_is_not_a_cycle(g1_cfgs):
    cfg = g1_cfgs["n1"]
    bad = cfg.replace(contours={"c": {"type": "circle", "center": "u1", "radius": 0.1}})
    with pytest.raises(GeometryError):
        g1.f_coefficients_g1("c", bad)


@pytest.mark.parametrize("name", ["n1", "n2"])
def test_hydro_extraction(g1_cfgs, default_config, name):
    cfg = g1_cfgs[name]
    block = next(b for b in default_config["genus1"] if b["name"] == name)
    system = g1.extract_hydro_g1(cfg, block["hydro"]["triple"], seed=0)
    assert system.m == cfg.n + 1
    assert system.held_out_residual < 1e-7
    assert g1.hydro_consistency_g1(system, cfg, seed=2).residual < 1e-6
