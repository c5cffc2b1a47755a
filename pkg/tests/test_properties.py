import numpy as np
import pytest
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

from whithamlab import genus0 as g0
from whithamlab import tauflow as tf
from whithamlab import theta as th
from whithamlab.contours import BranchedWeight, Contour, integrate, monodromy_factor, weight_along
from whithamlab.errors import InvalidInputError
from whithamlab.numerics import (
    SampleSet,
    ToleranceConfig,
    finite_diff,
    fit_polynomial,
    numerical_rank,
    polyval_ascending,
)

slow = settings(max_examples=15, deadline=None, suppress_health_check=[HealthCheck.too_slow])
fast = settings(max_examples=60, deadline=None)

reals = st.floats(-1.0, 1.0, allow_nan=False)
complexes = st.builds(complex, reals, reals)
seeds = st.integers(0, 2**32 - 1)


def unit_box(lo=-0.45, hi=0.45):
    r = st.floats(lo, hi, allow_nan=False)
    return st.builds(complex, r, r)


# --------------------------------------------------------------------------- numerics


@fast
@given(seeds, st.integers(1, 5), st.floats(1e-3, 1e3) | st.floats(-1e3, -1e-3))
def test_rank_invariant_under_permutation_and_scaling(seed, rank, scale):
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(14, rank)) @ rng.normal(size=(rank, 6)) + 0j
    base = numerical_rank(m)
    permuted = m[rng.permutation(14)][:, rng.permutation(6)]
    assert numerical_rank(permuted) == base == rank
    assert numerical_rank(scale * (1 - 0.5j) * m) == base


@fast
@given(seeds, st.integers(0, 4))
def test_fit_residual_vanishes_for_polynomials(seed, degree):
    rng = np.random.default_rng(seed)
    coef = rng.normal(size=degree + 1) + 1j * rng.normal(size=degree + 1)
    z = np.exp(2j * np.pi * np.arange(degree + 6) / (degree + 6))
    _, res = fit_polynomial(z, polyval_ascending(coef, z), degree)
    assert res <= 1e-12 * max(1.0, np.abs(coef).sum())


@fast
@given(seeds, st.integers(0, 4), st.floats(0.5, 3.0))
def test_fit_residual_detects_higher_degree(seed, degree, top):
    rng = np.random.default_rng(seed)
    coef = np.append(rng.normal(size=degree + 1), top)
    z = np.exp(2j * np.pi * np.arange(degree + 6) / (degree + 6))
    _, res = fit_polynomial(z, polyval_ascending(coef, z), degree)
    # z^(d+1) is orthogonal to 1..z^d on these roots of unity, so the misfit is exactly |top|
    assert res == pytest.approx(top, rel=1e-9)


@fast
@given(complexes, complexes, complexes, st.floats(1e-8, 1e-1), st.sampled_from([2, 4]))
def test_finite_diff_exact_on_affine(slope, offset, point, step, accuracy):
    got = finite_diff(lambda x: slope * x + offset, point, step, accuracy)
    # only rounding of the function values remains, amplified by 1 / h
    h = step * max(1.0, abs(point))
    scale = abs(slope) * (abs(point) + 2 * h) + abs(offset)
    assert abs(got - slope) <= 8 * np.finfo(float).eps * scale / h + 1e-15


@fast
@given(st.floats(1e-14, 1.0), st.floats(1e-7, 1.0))
def test_tolerance_invariants(quad, fd):
    if fd**2 < quad:
        with pytest.raises(InvalidInputError):
            ToleranceConfig(quad_tol=quad, fd_step=fd)
    else:
        ToleranceConfig(quad_tol=quad, fd_step=fd)


@fast
@given(seeds, st.floats(0.01, 0.5))
def test_sample_set_invariants(seed, radius):
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=6) + 1j * rng.normal(size=6)
    sing = rng.normal(size=3) + 1j * rng.normal(size=3)
    close = np.abs(pts[:, None] - sing[None, :]).min() < radius
    if close:
        with pytest.raises(InvalidInputError):
            SampleSet(pts, radius, sing)
    else:
        assert len(SampleSet(pts, radius, sing)) == 6


# --------------------------------------------------------------------------- contours


def analytic(t, w):
    return np.exp(0.3 * t) * w / (t - 3.0)


@fast
@given(st.lists(unit_box(-1, 1), min_size=2, max_size=4, unique=True), st.floats(0.05, 0.95))
def test_reverse_negates_and_split_adds(points, cut):
    c = Contour.through(points)
    assume(min(abs(a - b) for a, b in zip(points, points[1:])) > 1e-3)
    whole, _ = integrate(analytic, c, 1e-12)
    back, _ = integrate(analytic, c.reversed(), 1e-12)
    first, second = c.split(cut)
    parts = integrate(analytic, first, 1e-12)[0] + integrate(analytic, second, 1e-12)[0]
    assert abs(whole + back) <= 2e-12 * max(1.0, abs(whole))
    assert abs(whole - parts) <= 2e-12 * max(1.0, abs(whole))


@fast
@given(st.floats(-0.9, 0.9), st.floats(-0.9, 0.9), st.floats(0.3, 2.0))
def test_weighted_integral_reverses_sign(s0, s1, r):
    # weight with branch points at 0 and 3; contour stays in between
    w = BranchedWeight.linear([0.0, 3.0], [s0, s1])
    c = Contour.arc(1.5, r * 0.5, 0.2, 2.5)
    whole, _ = integrate(lambda t, w: w, c, 1e-12, w)
    back, _ = integrate(lambda t, w: w, c.reversed(), 1e-12, w)
    assert abs(whole + back) <= 2e-11 * max(1.0, abs(whole))


@fast
@given(st.floats(-2.0, 2.0), st.floats(-2.0, 2.0), st.integers(1, 3))
def test_monodromy_of_composed_loops_multiplies(s0, s1, turns):
    w = BranchedWeight.linear([0.0, 1.0], [s0, s1])
    a = Contour.circle(0.5, 0.25 + 0.5, np.pi)  # around both points, starts at -0.25
    b = Contour.circle(0.0, 0.25, np.pi, turns=turns)  # around 0 only, same base point
    prod = monodromy_factor(w, a) * monodromy_factor(w, b)
    assert abs(monodromy_factor(w, a.then(b)) - prod) < 1e-9


@fast
@given(st.floats(-1.5, 1.5), st.floats(-1.5, 1.5), seeds)
def test_weight_along_is_continuous(s0, s1, seed):
    w = BranchedWeight.linear([0.0, 1.0], [s0, s1])
    c = Contour.circle(0.0, 0.5, 0.0, turns=2)
    params = np.sort(np.random.default_rng(seed).uniform(0, 1, 400))
    vals = weight_along(w, c, params)
    ratio = vals[1:] / vals[:-1]
    gaps = np.diff(params)
    assert np.all(np.abs(np.angle(ratio))[gaps < 0.01] < np.pi / 2)


# --------------------------------------------------------------------------- theta

taus = st.builds(complex, st.floats(-0.5, 0.5), st.floats(0.7, 2.0))


@fast
@given(complexes, taus)
def test_theta_is_odd(z, tau):
    a, b = th.theta(z, tau), th.theta(-z, tau)
    assert abs(a + b) <= 1e-11 * max(1.0, abs(a))


@fast
@given(unit_box(), taus, st.integers(-2, 2), st.integers(-2, 2))
def test_lattice_translation(z, tau, m, n):
    # relative comparison is meaningless right at the zero of theta
    assume(th.lattice_distance(np.array([z]), tau)[0] > 1e-3)
    lhs = th.theta(z + m + n * tau, tau)
    rhs = (-1) ** (m + n) * np.exp(-2j * np.pi * n * z - 1j * np.pi * n * n * tau) * th.theta(z, tau)
    assert abs(lhs - rhs) <= 1e-9 * max(abs(lhs), abs(rhs), 1e-300)


@fast
@given(unit_box(), taus)
def test_heat_equation_with_finite_difference(z, tau):
    h = 1e-5
    fd = (th.theta(z, tau + h) - th.theta(z, tau - h)) / (2 * h)
    _, _, d2 = th.theta_all(z, tau)
    rhs = -1j / (4 * np.pi) * d2 - 1j * np.pi / 4 * th.theta(z, tau)
    assert abs(fd - rhs) <= 1e-9 * max(1.0, abs(rhs))


@fast
@given(st.lists(unit_box(), min_size=5, max_size=5), taus)
def test_prime_form_fay(points, tau):
    u, v, w, t, z = points
    args = np.array([u - v, w - t, v - w, u - t, w - u, v - t])
    assume(th.lattice_distance(args, tau).min() > 1e-3)
    assert th.fay_residual_g1(u, v, w, t, z, tau) < 1e-9


# --------------------------------------------------------------------------- genus 0


def genus0_configs(n):
    pts = st.lists(st.builds(complex, st.floats(-2, 2), st.floats(0.4, 2)), min_size=n, max_size=n)
    exps = st.lists(st.floats(-0.8, 0.8).filter(lambda x: abs(x) > 0.05), min_size=n + 2, max_size=n + 2)
    return st.tuples(pts, exps)


@slow
@given(genus0_configs(2))
def test_sum_rule_and_permutation_symmetry(data):
    u, s = data
    assume(abs(u[0] - u[1]) > 0.3)
    contours = {"g": {"type": "segment", "from": "0", "to": "1"}, "h": {"type": "segment", "from": "u1", "to": "u2"}}
    cfg = g0.Genus0Config(tuple(u), tuple(s), contours, z_ref=3 - 1j)
    swapped = g0.Genus0Config((u[1], u[0]), (s[1], s[0]) + tuple(s[2:]), contours, z_ref=3 - 1j)
    fc = g0.f_coefficients_g0("g", cfg)
    assert fc.sum_residual < 1e-8 * max(1.0, np.abs(fc.f).max())
    z = -1.0 - 1.0j
    p1, p2 = g0.potential_g0(z, "g", cfg)[0], g0.potential_g0(z, "g", swapped)[0]
    assert abs(p1 - p2) <= 1e-12 * max(1.0, abs(p1))


@slow
@given(genus0_configs(1))
def test_small_circle_is_constant(data):
    u, s = data
    cfg = g0.Genus0Config(tuple(u), tuple(s), {"c": {"type": "circle", "center": "z", "radius": 0.01}})
    for z in (-1.2 - 0.7j, 2.5 - 0.3j):
        assert abs(g0.potential_g0(z, "c", cfg)[0] + 2j * np.pi) < 1e-6


@fast
@given(genus0_configs(2), st.floats(-3, 3))
def test_trivial_deformation_leaves_weight_unchanged(data, x):
    u, s = data
    assume(abs(u[0] - u[1]) > 1e-3)
    cfg = g0.Genus0Config(tuple(u), tuple(s))
    t = complex(x, -0.5)
    trivial = g0.DeformationSpec((1, 1, 1, 1, 1))
    assert g0.weight_g0(t, cfg) == g0.weight_g0(t, cfg, trivial)


# --------------------------------------------------------------------------- tau mode

partitions = st.sampled_from([(1,), (2,), (1, 1), (2, 1), (3,), (1, 1, 1), (3, 1), (2, 2), (2, 1, 1), (4,), (1, 1, 1, 1)])


@fast
@given(partitions, seeds, st.lists(unit_box(), min_size=4, max_size=4))
def test_tau_fay_identity(lam, seed, pts):
    tau = tf.TauFunction(lam, 6)
    t = np.random.default_rng(seed).normal(size=6) * (1 + 0.5j)
    assert tf.tau_fay_residual(tau, t, *pts) < 1e-10


@slow
@given(partitions, st.lists(st.builds(complex, st.floats(-0.6, 0.6), st.floats(-0.6, 0.6)), min_size=3, max_size=3))
def test_tau_mode_zero_curvature(lam, u):
    assume(min(abs(a - b) for i, a in enumerate(u) for b in u[i + 1:]) > 0.2)
    cfg = tf.AbstractConfig(tuple(u), (0.3, 0.45, 0.25), tf.GeometryData.tau_mode(tf.TauFunction(lam, 6)),
                            [0.21 + 0.13j], [0.3 - 0.1j])
    assume(abs(cfg.theta_eta) > 1e-2)
    try:
        res = tf.max_zero_curvature_residual(cfg)
    except tf.DegenerateConfigurationError:
        assume(False)
    assert res < 1e-6
