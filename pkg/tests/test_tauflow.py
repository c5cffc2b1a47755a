import numpy as np
import pytest

from whithamlab import tauflow as tf
from whithamlab import suites
from whithamlab.errors import GeometryError, InvalidInputError

PARTITIONS = [(1,), (2,), (1, 1), (3,), (2, 1), (1, 1, 1), (4,), (3, 1), (2, 2), (2, 1, 1), (1, 1, 1, 1)]


def bialternant_schur(lam, x):
    """s_lambda(x_1..x_N) as a ratio of alternants; an oracle independent of Jacobi-Trudi."""
    N = len(x)
    lam = list(lam) + [0] * (N - len(lam))
    num = np.linalg.det(np.array([[xi ** (lam[j] + N - 1 - j) for j in range(N)] for xi in x]))
    den = np.linalg.det(np.array([[xi ** (N - 1 - j) for j in range(N)] for xi in x]))
    return num / den


@pytest.mark.parametrize("lam", PARTITIONS)
def test_schur_against_bialternant(lam):
    rng = np.random.default_rng(len(lam) * 10 + lam[0])
    x = rng.uniform(-0.8, 0.8, 5) + 1j * rng.uniform(-0.8, 0.8, 5)
    K = 6
    t = np.array([np.sum(x**k) / k for k in range(1, K + 1)])
    ref = bialternant_schur(lam, x)
    assert abs(tf.schur_tau(lam, t) - ref) < 1e-12 * max(1.0, abs(ref))


def test_schur_hand_expansions():
    t = np.array([0.7 - 0.2j, 1.1, -0.4j, 0.3])
    assert tf.schur_tau((1,), t) == pytest.approx(t[0])
    assert tf.schur_tau((1, 1), t) == pytest.approx(t[0] ** 2 / 2 - t[1])
    assert tf.schur_tau((2, 1), t) == pytest.approx(t[0] ** 3 / 3 - t[2])
    assert tf.schur_tau((), t) == 1


@pytest.mark.parametrize("lam", [(), (1,), (2, 1), (2, 2), (3, 1)])
def test_gradient_against_finite_differences(lam):
    tau = tf.TauFunction(lam, 5)
    t = np.array([0.3 + 0.1j, -0.2, 0.5j, 0.1, -0.3 + 0.2j])
    grad = tau.gradient(t)
    h = 1e-6
    for k in range(5):
        e = np.zeros(5)
        e[k] = h
        fd = (tau(t + e) - tau(t - e)) / (2 * h)
        assert abs(grad[k] - fd) < 1e-8


def test_vectorised_evaluation():
    tau = tf.TauFunction((2, 1), 4)
    t = np.random.default_rng(0).normal(size=(4, 7))
    assert np.allclose(tau(t), [tau(t[:, j]) for j in range(7)])


def test_partition_validation():
    with pytest.raises(InvalidInputError):
        tf.TauFunction((1, 2), 4)
    with pytest.raises(InvalidInputError):
        tf.TauFunction((3, 1), 3)
    with pytest.raises(InvalidInputError):
        tf.TauFunction((2,), 4)(np.zeros(3))


def test_miwa_vector():
    a = 0.3 - 0.2j
    v = tf.MiwaShift(a, 4).vector
    assert np.allclose(v, [a, a**2 / 2, a**3 / 3, a**4 / 4])
    assert tf.miwa(np.array([a, 2 * a]), 3).shape == (3, 2)


@pytest.mark.parametrize("lam", PARTITIONS)
def test_kp_fay_identity(lam):
    tau = tf.TauFunction(lam, 6)
    rng = np.random.default_rng(sum(lam))
    for _ in range(10):
        t = rng.normal(size=6) + 1j * rng.normal(size=6)
        pts = rng.uniform(-0.5, 0.5, 4) + 1j * rng.uniform(-0.5, 0.5, 4)
        assert tf.tau_fay_residual(tau, t, *pts) < 1e-10


@pytest.mark.parametrize("geom,limit", [
    (tf.GeometryData.rational("linear"), 1e-12),
    (tf.GeometryData.rational("constant"), 1e-12),
    (tf.GeometryData.genus1(1j), 1e-9),
    (tf.GeometryData.genus1(0.3 + 1.2j), 1e-9),
    (tf.GeometryData.tau_mode(tf.TauFunction((2, 1), 6)), 1e-9),
])
def test_geometry_fay_identity(geom, limit):
    assert tf.fay_residual(geom, count=50, seed=3) < limit
    assert tf.normalization_residual(geom) < 1e-6


def test_rational_hand_example():
    geom = tf.GeometryData.rational("linear")
    terms = tf._fay_terms(geom, 1, 2, 3, 0, np.zeros(1))
    assert sorted(abs(complex(np.ravel(x)[0])) for x in terms) == [5, 27, 32]
    assert tf.fay_residual(geom, z_vec=[0.0], points=(1, 2, 3, 0)) == 0


def test_entrance_check_rejects_broken_geometry():
    good = tf.GeometryData.rational("linear")
    broken = tf.GeometryData("broken", 1, good.q, good.dq, lambda x, y: (x - y) * (1 + 0.1 * x), good.E1, good.E2,
                             good.theta, good.grad_theta)
    with pytest.raises(GeometryError):
        broken.entrance_check()


def test_abstract_config_validation():
    geom = tf.GeometryData.rational("linear")
    with pytest.raises(InvalidInputError):
        tf.AbstractConfig((0.1, 0.2), (0.4, 0.4), geom)
    with pytest.raises(InvalidInputError):
        tf.AbstractConfig((0.1, 0.1), (0.4, 0.6), geom)


SYSTEMS = suites.DEFAULT_TAU_SYSTEMS


def abstract(geom, system):
    a = [0.21 + 0.13j, 0.1, -0.2][: geom.dim]
    b = [0.3 - 0.1j, 0.2j, 0.1][: geom.dim]
    return tf.AbstractConfig(tuple(complex(*p) for p in system["u"]), tuple(system["s"]), geom, a, b)


@pytest.mark.parametrize("system", SYSTEMS, ids=["n2", "n3"])
@pytest.mark.parametrize("geom,limit", [
    (tf.GeometryData.genus1(1j), 1e-6),
    (tf.GeometryData.rational("linear"), 1e-8),
    (tf.GeometryData.tau_mode(tf.TauFunction((2, 1), 6)), 1e-8),
    (tf.GeometryData.tau_mode(tf.TauFunction((2, 2), 6)), 1e-8),
])
def test_zero_curvature(system, geom, limit):
    cfg = abstract(geom, system)
    assert tf.max_zero_curvature_residual(cfg) < limit
    assert tf.max_zero_curvature_residual(cfg, z_samples=suites.DEFAULT_Z_SAMPLES) < 1e-5


def test_matrix_shapes():
    cfg = abstract(tf.GeometryData.rational("linear"), SYSTEMS[1])
    mats = tf.comp_system_matrices(cfg)
    assert len(mats) == cfg.n and all(A.shape == (cfg.n, cfg.n) for A in mats)
    with_z = tf.comp_system_matrices(cfg, z_samples=suites.DEFAULT_Z_SAMPLES[:2])
    assert with_z[0].shape == (cfg.n + 2, cfg.n + 2)


def test_geometry_failing_fay_is_refused():
    geom = tf.GeometryData.rational("linear")
    twisted = tf.GeometryData("twisted", 1, geom.q, geom.dq, geom.E, geom.E1, geom.E2,
                              lambda v: np.asarray(v)[0] + 0.5 * np.asarray(v)[0] ** 2,
                              lambda v: np.array([1 + np.asarray(v)[0]]))
    with pytest.raises(GeometryError):
        tf.max_zero_curvature_residual(abstract(twisted, SYSTEMS[1]))


def test_unit_tau_is_constant_theta_rational():
    for system in SYSTEMS:
        unit = abstract(tf.GeometryData.tau_mode(tf.TauFunction((), 6)), system)
        const = abstract(tf.GeometryData.rational("constant"), system)
        for A, B in zip(tf.comp_system_matrices(unit), tf.comp_system_matrices(const)):
            assert np.array_equal(A, B)


def test_tau_potential_small_circle_and_reduction(g0_cfgs):
    block = {"u": [[0.3, 0.2], [-0.4, 0.5]], "s": [0.4, 0.6]}
    contours = {"g": {"type": "segment", "from": "u1", "to": "u2"},
                "small": {"type": "circle", "center": "z", "radius": 0.01}}
    u = tuple(complex(*p) for p in block["u"])
    for lam in [(), (1,), (2, 1)]:
        cfg = tf.AbstractConfig(u, tuple(block["s"]), tf.GeometryData.tau_mode(tf.TauFunction(lam, 4)),
                                [0.1], [0.2], contours)
        assert abs(tf.small_circle_tau(cfg, cfg.reference_point + 0.3j) + 2j * np.pi) < 1e-6
    unit = tf.AbstractConfig(u, tuple(block["s"]), tf.GeometryData.tau_mode(tf.TauFunction((), 4)),
                             [0.1], [0.0], contours)
    from whithamlab import genus0 as g0

    gz = g0.Genus0Config(u, tuple(block["s"]) + (0.0, 0.0), contours, z_ref=unit.reference_point)
    z = unit.reference_point + 0.3j
    assert abs(tf.potential_tau(z, "g", unit)[0] - g0.potential_g0(z, "g", gz)[0]) < 1e-10
