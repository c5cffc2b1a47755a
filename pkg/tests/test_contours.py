import numpy as np
import pytest
import scipy.special

from whithamlab.contours import (
    BranchedWeight,
    Contour,
    continue_logs,
    descriptor_names,
    integrate,
    monodromy_factor,
    resolve_contour,
    resolve_point,
    weight_along,
    winding_number,
)
from whithamlab.errors import GeometryError, InvalidInputError


def test_point_expressions():
    names = {"u1": 0.5 + 0.5j, "tau": 1j}
    assert resolve_point("u1+tau", names) == 0.5 + 1.5j
    assert resolve_point("2*u1 - 1", names) == 0 + 1j
    assert resolve_point([0.25, -1.0], names) == 0.25 - 1j
    assert resolve_point("0", names) == 0
    with pytest.raises(InvalidInputError):
        resolve_point("u7", names)
    with pytest.raises(InvalidInputError):
        resolve_point("u1 ** 2", names)


def test_descriptor_kinds():
    names = {"u1": 2.0, "z": 0.5j}
    seg = resolve_contour({"type": "segment", "from": "u1", "to": "0"}, names)
    assert seg.start == 2 and seg.end == 0 and not seg.closed
    circ = resolve_contour({"type": "circle", "center": "z", "radius": 0.1}, names)
    assert circ.closed and abs(circ.start - (0.5j + 0.1)) < 1e-15
    poly = resolve_contour({"type": "polyline", "points": ["0", "1", [1, 1]], "closed": True}, names)
    assert poly.closed and len(poly.segments) == 3
    with pytest.raises(InvalidInputError):
        resolve_contour({"type": "spiral"}, names)
    assert descriptor_names({"type": "segment", "from": "u1+tau", "to": "z"}) == {"u1", "tau", "z"}


def test_contour_joins_checked():
    a = Contour.segment(0, 1)
    b = Contour.segment(2, 3)
    with pytest.raises(GeometryError):
        a.then(b)
    with pytest.raises(GeometryError):
        Contour(Contour.segment(0, 1).segments, closed=True)


def test_split_and_reverse():
    c = Contour.through([0, 1, 1 + 1j])
    first, second = c.split(0.25)
    assert first.end == pytest.approx(0.5) and second.start == pytest.approx(0.5)
    r = c.reversed()
    assert r.start == c.end and r.end == c.start


@pytest.mark.parametrize("z", [0.2 + 0.1j, 3.0])
def test_winding_number(z):
    c = Contour.circle(0.0, 1.0)
    assert winding_number(c, z) == pytest.approx(1.0 if abs(z) < 1 else 0.0, abs=1e-10)
    assert winding_number(Contour.circle(0.0, 1.0, orientation=-1), 0.0) == pytest.approx(-1.0)


def test_cauchy_integral():
    val, _ = integrate(lambda t, w: np.exp(t) / (t - 0.3), Contour.circle(0, 1), 1e-12)
    assert abs(val - 2j * np.pi * np.exp(0.3)) < 1e-11


@pytest.mark.parametrize("a,b", [(0.35, 0.6), (0.8, 1.7), (2.5, 0.2)])
def test_beta_integral_with_endpoint_singularities(a, b):
    weight = BranchedWeight.linear([0.0, 1.0], [a - 1, b - 1])
    val, _ = integrate(lambda t, w: w, Contour.segment(0.0, 1.0), 1e-12, weight)
    # the principal log of t - 1 at t in (0, 1) is log|t - 1| + i pi
    val *= np.exp(-1j * np.pi * (b - 1))
    assert abs(val - scipy.special.beta(a, b)) < 1e-10 * scipy.special.beta(a, b)


def test_finite_part_matches_analytic_continuation():
    # int_0^1 t^s dt = 1 / (s + 1) continued to s = -3/2
    weight = BranchedWeight.linear([0.0], [-1.5])
    val, _ = integrate(lambda t, w: w, Contour.segment(0.0, 1.0), 1e-12, weight, finite_part=True)
    assert abs(val + 2.0) < 1e-10


@pytest.mark.parametrize("s", [0.25, -0.4, 1.3])
def test_monodromy_of_power(s):
    w = BranchedWeight.linear([0.3], [s])
    assert abs(monodromy_factor(w, Contour.circle(0.3, 0.5)) - np.exp(2j * np.pi * s)) < 1e-12
    assert abs(monodromy_factor(w, Contour.circle(3.0, 0.5)) - 1.0) < 1e-12


def test_theta_weight_monodromy_matches_simple_zero():
    w = BranchedWeight.theta([0.2], [0.3], 1j)
    assert abs(monodromy_factor(w, Contour.circle(0.2, 0.3)) - np.exp(0.6j * np.pi)) < 1e-12


def test_continuation_past_branch_cut():
    # (t)^(1/2) continued from 1 through the upper half plane to -1 gives +i
    w = BranchedWeight.linear([0.0], [0.5])
    logs = continue_logs(w, 1.0, 1j)
    logs = continue_logs(w, 1j, -1.0, logs)
    assert abs(w.from_logs(logs, -1.0) - 1j) < 1e-12
    assert abs(weight_along(w, Contour.segment(1.0, 2.0), 0.5) - np.sqrt(1.5)) < 1e-14


def test_duplicate_singular_points_rejected():
    with pytest.raises(InvalidInputError):
        BranchedWeight.linear([0.5, 0.5], [0.1, 0.2])
