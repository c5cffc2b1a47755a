"""Piecewise contours, branch tracking for multivalued weights, and quadrature.

A weight is a product  prod_k F_k(t)^{sigma_k} * exp(Omega(t))  where each F_k is
a single-valued factor with simple zeros (t - p, or theta(t - p)).  Along a
contour every log F_k is continued continuously from the start, where the
principal branch is used unless explicit starting logs are supplied.

On a line segment whose endpoint is a zero of F_k the log splits as
log(t - a) + log G_k(t) with G_k smooth and non-vanishing; log(t - a) is exact
on a straight segment and log G_k is unwrapped numerically on an anchor grid
refined until neighbouring anchors differ in argument by less than pi/4.

Endpoint singularities are integrated either with a tanh-sinh substitution
(convergent integrands) or, for integrands whose local exponent is <= -1, by
the loop regularisation

    int_a^c F dt = (1 / (mu - 1)) * oint_{|t - a| = eps, from c} F dt,

where mu is the local monodromy of F around a.  This equals the analytic
continuation in the exponent, i.e. the Hadamard finite part.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import ConvergenceError, GeometryError, InvalidInputError
from . import theta as th

TWO_PI = 2 * np.pi
_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)
_SMALL_OFFSET = 1e-6
_ZERO_TOL = 1e-10


# --------------------------------------------------------------------------- geometry


def _point_segment_distance(p, a, b):
    d = b - a
    denom = abs(d) ** 2
    if denom == 0:
        return np.abs(p - a)
    s = np.clip(((p - a) * np.conj(d)).real / denom, 0.0, 1.0)
    return np.abs(p - (a + s * d))


def _segments_distance(a, b, c, d):
    """Distance between the planar segments [a, b] and [c, d]."""
    def cross(u, v):
        return (np.conj(u) * v).imag

    r, s = b - a, d - c
    denom = cross(r, s)
    if denom != 0:
        lam = cross(c - a, s) / denom
        mu = cross(c - a, r) / denom
        if 0 <= lam <= 1 and 0 <= mu <= 1:
            return 0.0
    return float(min(
        _point_segment_distance(a, c, d), _point_segment_distance(b, c, d),
        _point_segment_distance(c, a, b), _point_segment_distance(d, a, b),
    ))


class LineSegment:
    kind = "line"

    def __init__(self, a, b):
        self.a = complex(a)
        self.b = complex(b)
        if abs(self.b - self.a) == 0:
            raise GeometryError("line segment has zero length")

    @property
    def start(self):
        return self.a

    @property
    def end(self):
        return self.b

    def point(self, x):
        return self.a + (self.b - self.a) * np.asarray(x, dtype=float)

    def deriv(self, x):
        return np.full(np.shape(x), self.b - self.a, dtype=complex)

    def reversed(self):
        return LineSegment(self.b, self.a)

    def distance(self, p):
        return _point_segment_distance(np.asarray(p, complex), self.a, self.b)

    def polyline(self):
        return np.array([self.a, self.b])

    def __repr__(self):
        return f"LineSegment({self.a}, {self.b})"


class ArcSegment:
    kind = "arc"

    def __init__(self, center, radius, phi0, phi1):
        self.center = complex(center)
        self.radius = float(radius)
        self.phi0 = float(phi0)
        self.phi1 = float(phi1)
        if self.radius <= 0 or self.phi0 == self.phi1:
            raise GeometryError("arc must have positive radius and nonzero sweep")

    @property
    def start(self):
        return self.center + self.radius * np.exp(1j * self.phi0)

    @property
    def end(self):
        return self.center + self.radius * np.exp(1j * self.phi1)

    def point(self, x):
        phi = self.phi0 + (self.phi1 - self.phi0) * np.asarray(x, dtype=float)
        return self.center + self.radius * np.exp(1j * phi)

    def deriv(self, x):
        phi = self.phi0 + (self.phi1 - self.phi0) * np.asarray(x, dtype=float)
        return 1j * (self.phi1 - self.phi0) * self.radius * np.exp(1j * phi)

    def reversed(self):
        return ArcSegment(self.center, self.radius, self.phi1, self.phi0)

    def distance(self, p):
        p = np.asarray(p, complex)
        sweep = abs(self.phi1 - self.phi0)
        radial = np.abs(np.abs(p - self.center) - self.radius)
        if sweep >= TWO_PI - 1e-12:
            return radial
        lo = min(self.phi0, self.phi1)
        ang = np.angle(p - self.center)
        rel = np.mod(ang - lo, TWO_PI)
        inside = rel <= sweep
        ends = np.minimum(np.abs(p - self.start), np.abs(p - self.end))
        return np.where(inside, radial, ends)

    def polyline(self):
        pieces = max(8, int(np.ceil(abs(self.phi1 - self.phi0) / TWO_PI * 128)))
        return self.point(np.linspace(0.0, 1.0, pieces + 1))

    def __repr__(self):
        return f"ArcSegment(center={self.center}, r={self.radius}, {self.phi0:.4f}->{self.phi1:.4f})"


@dataclass
class Contour:
    segments: list
    closed: bool = False
    endpoint_singularities: tuple | None = None

    def __post_init__(self):
        if not self.segments:
            raise GeometryError("contour needs at least one segment")
        scale = 1.0 + max(abs(s.start) for s in self.segments)
        for s0, s1 in zip(self.segments, self.segments[1:]):
            if abs(s0.end - s1.start) > 1e-10 * scale:
                raise GeometryError(f"segments do not join: {s0.end} vs {s1.start}")
        closes = abs(self.segments[-1].end - self.segments[0].start) <= 1e-10 * scale
        if self.closed and not closes:
            raise GeometryError("closed contour does not return to its start")

    # constructors
    @classmethod
    def segment(cls, a, b, endpoint_singularities=None):
        return cls([LineSegment(a, b)], False, endpoint_singularities)

    @classmethod
    def through(cls, points, closed=False):
        """Straight segments through ``points`` (closed back to the first when ``closed``)."""
        points = [complex(p) for p in points]
        if closed and points[0] != points[-1]:
            points.append(points[0])
        return cls([LineSegment(p, q) for p, q in zip(points, points[1:])], closed)

    @classmethod
    def circle(cls, center, radius, start_angle=0.0, orientation=1, turns=1):
        sweep = TWO_PI * turns * (1 if orientation >= 0 else -1)
        return cls([ArcSegment(center, radius, start_angle, start_angle + sweep)], True)

    @classmethod
    def arc(cls, center, radius, start_angle, end_angle):
        return cls([ArcSegment(center, radius, start_angle, end_angle)], False)

    @property
    def start(self):
        return self.segments[0].start

    @property
    def end(self):
        return self.segments[-1].end

    def reversed(self):
        ends = self.endpoint_singularities[::-1] if self.endpoint_singularities else None
        return Contour([s.reversed() for s in reversed(self.segments)], self.closed, ends)

    def then(self, other: "Contour") -> "Contour":
        """Concatenation; the result is closed when both pieces are closed loops at one base point."""
        return Contour(self.segments + other.segments, self.closed and other.closed)

    def locate(self, param):
        """Map a global parameter in [0, 1] to (segment index, local x)."""
        param = np.asarray(param, dtype=float)
        k = len(self.segments)
        idx = np.minimum(np.floor(param * k).astype(int), k - 1)
        return idx, param * k - idx

    def point(self, param):
        idx, x = self.locate(param)
        idx, x = np.atleast_1d(idx), np.atleast_1d(x)
        out = np.array([self.segments[i].point(xi) for i, xi in zip(idx, x)], dtype=complex)
        return out if np.ndim(param) else out[0]

    def split(self, param: float):
        """Cut at a global parameter strictly inside (0, 1); returns two open contours."""
        if not 0 < param < 1:
            raise InvalidInputError("split parameter must lie in (0, 1)")
        idx, x = self.locate(param)
        idx, x = int(idx), float(x)
        seg = self.segments[idx]
        if x == 0:
            return (Contour(self.segments[:idx]), Contour(self.segments[idx:]))
        first, second = _split_segment(seg, x)
        return (Contour(self.segments[:idx] + [first]), Contour([second] + self.segments[idx + 1:]))

    def distance(self, points):
        points = np.asarray(points, complex)
        return np.min([s.distance(points) for s in self.segments], axis=0)

    def polyline(self):
        pts = [self.segments[0].polyline()]
        for s in self.segments[1:]:
            pts.append(s.polyline()[1:])
        return np.concatenate(pts)

    def min_distance_to_path(self, a, b) -> float:
        """Distance between the straight path [a, b] and the contour."""
        poly = self.polyline()
        return min(_segments_distance(a, b, p, q) for p, q in zip(poly, poly[1:]))


def _split_segment(seg, x):
    if isinstance(seg, LineSegment):
        mid = complex(seg.point(x))
        return LineSegment(seg.a, mid), LineSegment(mid, seg.b)
    phi = seg.phi0 + (seg.phi1 - seg.phi0) * x
    return ArcSegment(seg.center, seg.radius, seg.phi0, phi), ArcSegment(seg.center, seg.radius, phi, seg.phi1)


# --------------------------------------------------------------------------- weights


class LinearFactor:
    """F(t) = scale * (t - point)."""

    def __init__(self, point, scale=1.0):
        self.point = complex(point)
        self.scale = complex(scale)

    def __call__(self, t):
        return self.scale * (np.asarray(t, complex) - self.point)

    def deriv(self, t):
        return np.full(np.shape(t), self.scale, dtype=complex)

    def zeros(self):
        return np.array([self.point])

    def __repr__(self):
        return f"LinearFactor({self.point})"


class ThetaFactor:
    """F(t) = theta(t - point, tau); zeros at point + Z + tau Z."""

    def __init__(self, point, tau, reach=3):
        self.point = complex(point)
        self.tau = complex(tau)
        self.reach = reach

    def __call__(self, t):
        return th.theta(np.asarray(t, complex) - self.point, self.tau)

    def deriv(self, t):
        return th.theta_dz(np.asarray(t, complex) - self.point, self.tau, 1)

    def zeros(self):
        return th.lattice_translates([self.point], self.tau, self.reach)

    def __repr__(self):
        return f"ThetaFactor({self.point}, tau={self.tau})"


@dataclass
class BranchedWeight:
    """prod_k factors[k](t)**exponents[k] * exp(entire_exponent(t)), continued along contours."""

    factors: list
    exponents: np.ndarray
    entire_exponent: Callable | None = None
    base_point: complex | None = None

    def __post_init__(self):
        self.exponents = np.asarray(self.exponents, dtype=float).ravel()
        if len(self.factors) != self.exponents.size:
            raise InvalidInputError("one exponent per factor required")
        pts = [f.point for f in self.factors]
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                if abs(pts[i] - pts[j]) == 0:
                    raise InvalidInputError(f"singular points must be distinct, {pts[i]} repeated")

    @classmethod
    def linear(cls, points, exponents, entire_exponent=None):
        return cls([LinearFactor(p) for p in points], exponents, entire_exponent)

    @classmethod
    def theta(cls, points, exponents, tau, entire_exponent=None):
        return cls([ThetaFactor(p, tau) for p in points], exponents, entire_exponent)

    @property
    def singular_points(self) -> np.ndarray:
        if not self.factors:
            return np.zeros(0, complex)
        return np.concatenate([f.zeros() for f in self.factors])

    def principal_logs(self, t) -> np.ndarray:
        return np.array([np.log(complex(f(t))) for f in self.factors], dtype=complex)

    def from_logs(self, logs, t):
        expo = np.tensordot(self.exponents, logs, axes=(0, 0)) if len(self.factors) else 0.0
        if self.entire_exponent is not None:
            expo = expo + self.entire_exponent(np.asarray(t, complex))
        return np.exp(expo)

    def scaled(self, factor: float) -> "BranchedWeight":
        ent = self.entire_exponent
        new_ent = None if ent is None else (lambda t, ent=ent: factor * ent(t))
        return BranchedWeight(self.factors, factor * self.exponents, new_ent, self.base_point)


def _vanishes(factor, t) -> bool:
    val = abs(complex(factor(t)))
    return val < _ZERO_TOL * max(1.0, abs(complex(factor.deriv(t))))


class _FactorTrack:
    """Continuous log of one factor on one segment."""

    def __init__(self, factor, seg, za, zb, start_log):
        self.factor = factor
        self.seg = seg
        self.za, self.zb = za, zb
        if za or zb:
            self.La = np.log(seg.b - seg.a)
            self.Lb = np.log(seg.a - seg.b)
        self.G0 = self._G_exact(0.0)
        self.G1 = self._G_exact(1.0)
        self.Gd0 = self._G_raw(np.array([_SMALL_OFFSET]))[0] if za else None
        self.Gd1 = self._G_raw(np.array([1 - _SMALL_OFFSET]))[0] if zb else None
        if za:
            g_start = np.log(self.G0)
        else:
            g_start = start_log - (self.Lb if zb else 0.0)
        self._build_anchors(g_start)

    def _G_raw(self, x, xc=None):
        x = np.asarray(x, float)
        xc = 1.0 - x if xc is None else np.asarray(xc, float)
        t = self.seg.point(x)
        val = self.factor(t)
        if self.za:
            val = val / ((self.seg.b - self.seg.a) * x)
        if self.zb:
            val = val / (-(self.seg.b - self.seg.a) * xc)
        return val

    def _G_exact(self, x):
        seg = self.seg
        if x == 0.0 and self.za:
            val = complex(self.factor.deriv(seg.a))
            return val / (seg.a - seg.b) if self.zb else val
        if x == 1.0 and self.zb:
            val = complex(self.factor.deriv(seg.b))
            return val / (seg.b - seg.a) if self.za else val
        return complex(self._G_raw(np.array([x]))[0])

    def G(self, x, xc=None):
        x = np.asarray(x, float)
        xc = 1.0 - x if xc is None else np.asarray(xc, float)
        out = self._G_raw(np.clip(x, _SMALL_OFFSET, 1.0) if self.za else x,
                          np.clip(xc, _SMALL_OFFSET, 1.0) if self.zb else xc)
        if self.za:
            near = x < _SMALL_OFFSET
            out = np.where(near, self.G0 + (self.Gd0 - self.G0) * x / _SMALL_OFFSET, out)
        if self.zb:
            near = xc < _SMALL_OFFSET
            out = np.where(near, self.G1 + (self.Gd1 - self.G1) * xc / _SMALL_OFFSET, out)
        return out

    def _build_anchors(self, g_start):
        xs = np.linspace(0.0, 1.0, 33)
        for _ in range(30):
            vals = self._anchor_values(xs)
            jumps = np.abs(np.angle(vals[1:] / vals[:-1]))
            bad = np.nonzero(jumps > np.pi / 4)[0]
            if bad.size == 0:
                break
            xs = np.sort(np.concatenate([xs, 0.5 * (xs[bad] + xs[bad + 1])]))
        else:
            raise GeometryError("branch tracking failed to resolve the argument of a weight factor")
        if np.min(np.abs(vals)) == 0:
            raise GeometryError("weight factor vanishes inside a contour segment")
        steps = np.log(vals[1:] / vals[:-1])
        self.xs = xs
        self.Gs = vals
        self.logs = g_start + np.concatenate([[0.0], np.cumsum(steps)])

    def _anchor_values(self, xs):
        vals = self.G(xs)
        if self.za:
            vals[0] = self.G0
        if self.zb:
            vals[-1] = self.G1
        return vals

    def log_G(self, x, xc=None):
        x = np.asarray(x, float)
        j = np.clip(np.searchsorted(self.xs, x), 1, self.xs.size - 1)
        left = np.abs(x - self.xs[j - 1]) <= np.abs(self.xs[j] - x)
        j = np.where(left, j - 1, j)
        return self.logs[j] + np.log(self.G(x, xc) / self.Gs[j])

    def log_F(self, x, xc=None):
        x = np.asarray(x, float)
        xc = 1.0 - x if xc is None else np.asarray(xc, float)
        out = self.log_G(x, xc)
        if self.za:
            out = out + self.La + np.log(x)
        if self.zb:
            out = out + self.Lb + np.log(xc)
        return out

    def end_log(self):
        if self.zb:
            return complex(-np.inf)
        return complex(self.logs[-1] + (self.La if self.za else 0.0))


class BranchTrack:
    """A weight continued along a contour from its start."""

    def __init__(self, weight: BranchedWeight, contour: Contour, start_logs=None, check_distance=1e-9):
        self.weight = weight
        self.contour = contour
        nseg = len(contour.segments)
        nf = len(weight.factors)
        self.flags = []
        for k, seg in enumerate(contour.segments):
            za = np.zeros(nf, bool)
            zb = np.zeros(nf, bool)
            for i, f in enumerate(weight.factors):
                za[i] = _vanishes(f, seg.start)
                zb[i] = _vanishes(f, seg.end)
            if (za.any() or zb.any()) and not isinstance(seg, LineSegment):
                raise GeometryError("branch points may only terminate straight segments")
            if za.any() and (k > 0 or contour.closed):
                raise GeometryError(f"contour passes through a singular point at {seg.start}")
            if zb.any() and (k < nseg - 1 or contour.closed):
                raise GeometryError(f"contour passes through a singular point at {seg.end}")
            if za.sum() > 1 or zb.sum() > 1:
                raise GeometryError("two weight factors vanish at the same endpoint")
            self._check_interior(seg, za, zb, check_distance)
            self.flags.append((za, zb))

        if start_logs is None:
            za0 = self.flags[0][0]
            start_logs = np.array([
                complex(-np.inf) if za0[i] else np.log(complex(f(contour.start)))
                for i, f in enumerate(weight.factors)
            ], dtype=complex)
        self.start_logs = np.asarray(start_logs, dtype=complex)

        self.tracks = []
        current = self.start_logs
        for k, seg in enumerate(contour.segments):
            za, zb = self.flags[k]
            row = [_FactorTrack(f, seg, bool(za[i]), bool(zb[i]), current[i]) for i, f in enumerate(weight.factors)]
            self.tracks.append(row)
            current = np.array([tr.end_log() for tr in row], dtype=complex)
        self.end_logs = current

    def _check_interior(self, seg, za, zb, tol):
        for i, f in enumerate(self.weight.factors):
            zeros = f.zeros()
            d = seg.distance(zeros)
            for zero, dist in zip(zeros, d):
                if za[i] and abs(zero - seg.start) < 1e-8:
                    continue
                if zb[i] and abs(zero - seg.end) < 1e-8:
                    continue
                if dist < tol:
                    raise GeometryError(f"contour passes within {dist:.2e} of singular point {zero}")

    def singular_start(self):
        return bool(self.flags[0][0].any())

    def singular_end(self):
        return bool(self.flags[-1][1].any())

    def logs(self, k: int, x, xc=None) -> np.ndarray:
        if not self.weight.factors:
            return np.zeros((0, np.size(x)), complex)
        return np.array([tr.log_F(x, xc) for tr in self.tracks[k]])

    def values(self, k: int, x, xc=None):
        t = self.contour.segments[k].point(x)
        return self.weight.from_logs(self.logs(k, x, xc), t)

    def local_exponent(self, end: str) -> float:
        za_or_zb = self.flags[0][0] if end == "start" else self.flags[-1][1]
        return float(self.weight.exponents[za_or_zb].sum())


def weight_along(weight: BranchedWeight, contour: Contour, param, start_logs=None):
    """Weight value at global contour parameter(s) in [0, 1] on the continued branch."""
    track = BranchTrack(weight, contour, start_logs)
    param = np.asarray(param, dtype=float)
    idx, x = contour.locate(param)
    idx, x = np.atleast_1d(idx), np.atleast_1d(x)
    out = np.empty(idx.shape, complex)
    for k in np.unique(idx):
        sel = idx == k
        out[sel] = track.values(int(k), x[sel])
    return out if param.ndim else out[0]


def monodromy_factor(weight: BranchedWeight, contour: Contour, start_logs=None) -> complex:
    if not contour.closed:
        raise InvalidInputError("monodromy_factor needs a closed contour")
    track = BranchTrack(weight, contour, start_logs)
    delta = track.end_logs - track.start_logs
    return complex(np.exp(np.dot(weight.exponents, delta)))


def continue_logs(weight: BranchedWeight, a, b, start_logs=None) -> np.ndarray:
    """Logs of the weight factors at b, continued along the straight path from a."""
    if abs(b - a) == 0:
        return weight.principal_logs(a) if start_logs is None else np.asarray(start_logs, complex)
    track = BranchTrack(weight, Contour.segment(a, b), start_logs)
    if track.singular_end():
        raise GeometryError(f"continuation path ends on a singular point {b}")
    return track.end_logs


def winding_number(contour: Contour, p) -> float:
    """(1 / 2 pi i) oint dt / (t - p) by quadrature; an argument-principle oracle."""
    if not contour.closed:
        raise InvalidInputError("winding number needs a closed contour")
    value, _ = integrate(lambda t, w: 1.0 / (t - p), contour, tol=1e-12)
    return float((value / (2j * np.pi)).real)


def encloses_none(contour: Contour, points) -> bool:
    """True when ``contour`` is closed and winds around none of ``points``."""
    if not contour.closed:
        return False
    poly = contour.polyline()
    lo = np.array([poly.real.min(), poly.imag.min()])
    hi = np.array([poly.real.max(), poly.imag.max()])
    pad = 0.1 * float(np.max(hi - lo)) + 1e-12
    for p in np.atleast_1d(np.asarray(points, complex)):
        inside_box = lo[0] - pad <= p.real <= hi[0] + pad and lo[1] - pad <= p.imag <= hi[1] + pad
        if inside_box and abs(winding_number(contour, p)) > 0.5:
            return False
    return True


# --------------------------------------------------------------------------- quadrature


def _gauss_panel(g, lo, hi):
    half = 0.5 * (hi - lo)
    x = lo + half * (_GL_X + 1.0)
    return (g(x) * (_GL_W * half)).sum(axis=-1)


def _adaptive_gauss(g, lo, hi, tol, budget):
    """Adaptive 16-point Gauss-Legendre panels on [lo, hi] (x-parameter space)."""
    span = hi - lo
    stack = [(lo + span * i / 4, lo + span * (i + 1) / 4) for i in range(4)]
    total = 0.0
    err = 0.0
    nodes = 0
    while stack:
        a, b = stack.pop()
        m = 0.5 * (a + b)
        coarse = _gauss_panel(g, a, b)
        fine = _gauss_panel(g, a, m) + _gauss_panel(g, m, b)
        nodes += 48
        diff = float(np.max(np.abs(fine - coarse)))
        if diff <= tol * (b - a) / span or (b - a) < 1e-12 * span:
            total = total + fine
            err += diff
        else:
            if nodes > budget:
                raise ConvergenceError("adaptive Gauss exceeded its node budget", total, err + diff)
            stack.append((a, m))
            stack.append((m, b))
    return total, err


_TS_T = 6.0


def _tanh_sinh(g, tol, budget, lo=0.0, hi=1.0):
    """Tanh-sinh on [lo, hi]; g receives (x, 1 - x) computed without cancellation."""
    span = hi - lo

    def nodes(h, offset):
        k = np.arange(offset, int(_TS_T / h) + 1, 1 if offset == 0 else 2)
        t = np.concatenate([-k[::-1] * h, k * h]) if offset else np.concatenate([-k[:0:-1] * h, k * h])
        s = np.pi * np.sinh(t)
        u = 1.0 / (1.0 + np.exp(-s))      # logistic, accurate near 0
        uc = 1.0 / (1.0 + np.exp(s))      # 1 - u, accurate near 0
        w = np.pi * np.cosh(t) * u * uc
        keep = (u > 1e-300) & (uc > 1e-300)
        return u[keep], uc[keep], w[keep]

    def evaluate(u, uc, w):
        x = lo + span * u
        xc = (1.0 - hi) + span * uc
        return (g(x, xc) * (w * span)).sum(axis=-1)

    h = 0.5
    u, uc, w = nodes(h, 0)
    raw = evaluate(u, uc, w)
    estimate = raw * h
    used = u.size
    while True:
        h /= 2
        u, uc, w = nodes(h, 1)
        used += u.size
        raw = raw + evaluate(u, uc, w)
        new = raw * h
        err = float(np.max(np.abs(new - estimate)))
        estimate = new
        if err <= tol and h <= 0.125:
            return estimate, err
        if used > budget:
            raise ConvergenceError("tanh-sinh exceeded its node budget", estimate, err)


def integrate(integrand, contour: Contour, tol: float = 1e-10, weight: BranchedWeight | None = None,
              start_logs=None, finite_part: bool = False, avoid: Sequence[complex] = (),
              node_budget: int = 2**14):
    """Integrate ``integrand(t, w) * dt`` along the contour.

    ``w`` holds the weight on its continued branch (ones when no weight is
    given).  The integrand may return an array of shape (..., N) for N nodes;
    the result then has shape (...).  With ``finite_part`` the singular
    endpoints are handled by loop regularisation, which also assigns the
    analytic-continuation value to integrals that diverge there.

    Returns ``(value, err_estimate)``.
    """
    if weight is None:
        weight = BranchedWeight([], [])
    track = BranchTrack(weight, contour, start_logs)
    nseg = len(contour.segments)
    total = 0.0
    err = 0.0
    seg_tol = tol / (nseg + 2)

    lo_first, hi_last = 0.0, 1.0
    if finite_part and track.singular_start():
        val, e, lo_first = _endpoint_loop(integrand, track, "start", seg_tol, avoid, node_budget)
        total, err = total + val, err + e
    if finite_part and track.singular_end():
        val, e, hi_last = _endpoint_loop(integrand, track, "end", seg_tol, avoid, node_budget)
        total, err = total + val, err + e

    for k, seg in enumerate(contour.segments):
        lo = lo_first if k == 0 else 0.0
        hi = hi_last if k == nseg - 1 else 1.0
        za, zb = track.flags[k]
        singular = (za.any() and lo == 0.0) or (zb.any() and hi == 1.0)

        def g(x, xc=None, k=k, seg=seg):
            t = seg.point(x)
            w = track.values(k, x, xc)
            return integrand(t, w) * seg.deriv(x)

        if singular:
            val, e = _tanh_sinh(g, seg_tol, node_budget, lo, hi)
        else:
            val, e = _adaptive_gauss(lambda x: g(x), lo, hi, seg_tol, node_budget)
        total, err = total + val, err + e
    if err > tol:
        raise ConvergenceError(f"integration error estimate {err:.3g} exceeds tolerance {tol:.3g}", total, err)
    return total, err


def _endpoint_loop(integrand, track: BranchTrack, end: str, tol, avoid, budget):
    """Loop-regularised contribution of a singular endpoint; returns (value, err, trimmed x)."""
    contour = track.contour
    k = 0 if end == "start" else len(contour.segments) - 1
    seg = contour.segments[k]
    centre = seg.start if end == "start" else seg.end
    other = seg.end if end == "start" else seg.start
    length = abs(other - centre)
    near = [p for p in np.concatenate([track.weight.singular_points, np.asarray(avoid, complex)])
            if abs(p - centre) > 1e-8]
    eps = 0.25 * length
    if near:
        eps = min(eps, 0.4 * min(abs(p - centre) for p in near))
    frac = eps / length
    x_cut = frac if end == "start" else 1.0 - frac
    xc_cut = 1.0 - frac if end == "start" else frac
    logs = np.array([tr.log_F(np.array([x_cut]), np.array([xc_cut]))[0] for tr in track.tracks[k]], dtype=complex)
    angle = float(np.angle(other - centre))
    loop = Contour.circle(centre, eps, start_angle=angle, orientation=1)
    value, e = integrate(integrand, loop, tol, track.weight, start_logs=logs, node_budget=budget)
    mu = monodromy_factor(track.weight, loop, start_logs=logs)
    expected = np.exp(2j * np.pi * track.local_exponent(end))
    if abs(mu - expected) > 1e-8 * max(1.0, abs(expected)):
        raise GeometryError(f"unexpected local monodromy {mu} at {centre} (expected {expected})")
    if abs(mu - 1) < 1e-8:
        raise GeometryError(f"integer local exponent at {centre}; loop regularisation undefined")
    if end == "start":
        return value / (mu - 1), e / abs(mu - 1), x_cut
    return value / (1 - mu), e / abs(1 - mu), x_cut


# --------------------------------------------------------------------------- symbolic descriptors

_TOKEN = re.compile(r"\s*([+-])?\s*(?:(\d+(?:\.\d*)?(?:[eE][+-]?\d+)?)\s*\*\s*)?([A-Za-z_][A-Za-z_0-9]*|\d+(?:\.\d*)?(?:[eE][+-]?\d+)?)\s*")


def resolve_point(expr, names: dict) -> complex:
    """Evaluate a point expression such as ``"u1"``, ``"u1+tau"``, ``"0.5"`` or ``[re, im]``."""
    if isinstance(expr, (int, float, complex)) and not isinstance(expr, bool):
        return complex(expr)
    if isinstance(expr, (list, tuple)) and len(expr) == 2:
        return complex(float(expr[0]), float(expr[1]))
    if not isinstance(expr, str):
        raise InvalidInputError(f"cannot read point expression {expr!r}")
    pos = 0
    total = 0j
    text = expr.strip()
    if not text:
        raise InvalidInputError("empty point expression")
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise InvalidInputError(f"cannot parse point expression {expr!r}")
        sign = -1.0 if m.group(1) == "-" else 1.0
        coef = float(m.group(2)) if m.group(2) else 1.0
        atom = m.group(3)
        if atom[0].isdigit():
            value = complex(float(atom))
        elif atom in names:
            value = complex(names[atom])
        else:
            raise InvalidInputError(f"unknown point name {atom!r} in {expr!r}")
        total += sign * coef * value
        pos = m.end()
    return total


def descriptor_names(desc) -> set:
    """Names a descriptor refers to (used to decide what moves with which field)."""
    out = set()

    def scan(expr):
        if isinstance(expr, str):
            for m in re.finditer(r"[A-Za-z_][A-Za-z_0-9]*", expr):
                out.add(m.group(0))

    kind = desc.get("type")
    if kind == "segment":
        scan(desc["from"]), scan(desc["to"])
    elif kind in ("circle", "arc"):
        scan(desc["center"])
    elif kind == "polyline":
        for p in desc["points"]:
            scan(p)
    elif kind == "path":
        for part in desc["parts"]:
            out |= descriptor_names(part)
    return out


def resolve_contour(desc: dict, names: dict) -> Contour:
    """Turn a symbolic descriptor into geometry once the named points are known."""
    kind = desc.get("type")
    if kind == "segment":
        a = resolve_point(desc["from"], names)
        b = resolve_point(desc["to"], names)
        return Contour.segment(a, b, (desc["from"], desc["to"]))
    if kind == "circle":
        orient = desc.get("orientation", "positive")
        if orient not in ("positive", "negative"):
            raise InvalidInputError(f"orientation must be positive or negative, got {orient!r}")
        return Contour.circle(resolve_point(desc["center"], names), float(desc["radius"]),
                              float(desc.get("start_angle", 0.0)), 1 if orient == "positive" else -1,
                              int(desc.get("turns", 1)))
    if kind == "arc":
        return Contour.arc(resolve_point(desc["center"], names), float(desc["radius"]),
                           float(desc["start_angle"]), float(desc["end_angle"]))
    if kind == "polyline":
        return Contour.through([resolve_point(p, names) for p in desc["points"]], bool(desc.get("closed", False)))
    if kind == "path":
        parts = [resolve_contour(p, names) for p in desc["parts"]]
        segs = [s for p in parts for s in p.segments]
        first, last = parts[0].endpoint_singularities, parts[-1].endpoint_singularities
        ends = (first[0] if first else None, last[1] if last else None)
        return Contour(segs, bool(desc.get("closed", False)), ends)
    raise InvalidInputError(f"unknown contour type {kind!r}")
