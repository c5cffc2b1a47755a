"""Abstract (q, E, theta) geometries, the linear systems they make compatible,
polynomial KP tau-functions and the tau-mode potential.

A geometry is a triple of holomorphic data q(z) in C^g, an antisymmetric
prime-form-like E(x, y) and a function theta on C^g, tied together by the
three-term Fay relation

    E(u,v) E(w,t) theta(z+q(u)+q(v)) theta(z+q(w)+q(t)) + cyclic(u, v, w) = 0.

For such data the systems

    d f_j / d u_i = A_i[j, j] f_j + A_i[j, i] f_i                  (i != j)
    d f(z) / d u_i = B_i[z, z] f(z) + B_i[z, i] f_i

are compatible.  Compatibility is checked as vanishing curvature
d_j A_i - d_i A_j + A_i A_j - A_j A_i of the connection matrices, with the
u-derivatives taken by finite differences and everything else analytic.

Row i of A_i is not fixed by the system (f_i does not appear in its own
equation), so it is set to zero and left out of every curvature residual.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .contours import (
    BranchedWeight,
    Contour,
    continue_logs,
    descriptor_names,
    integrate,
    resolve_contour,
)
from .errors import DegenerateConfigurationError, GeometryError, InvalidInputError
from .numerics import ToleranceConfig, numerical_rank, sample_annulus, singular_values
from .theta import theta as _theta, theta_dz, theta_prime_zero

FAY_ENTRANCE_TOL = 1e-9
_ZERO = 1e-12


# --------------------------------------------------------------------------- Miwa shifts and Schur tau


def miwa(a, K: int) -> np.ndarray:
    """[a] = (a, a^2/2, ..., a^K/K); vectorised over a (result has shape (K, *a.shape))."""
    a = np.asarray(a, dtype=complex)
    k = np.arange(1, K + 1).reshape((K,) + (1,) * a.ndim)
    return a[None, ...] ** k / k


@dataclass(frozen=True)
class MiwaShift:
    a: complex
    K: int

    @property
    def vector(self) -> np.ndarray:
        return miwa(self.a, self.K)


def _check_partition(partition) -> tuple:
    lam = tuple(int(x) for x in partition)
    if any(x <= 0 for x in lam) or any(lam[i] < lam[i + 1] for i in range(len(lam) - 1)):
        raise InvalidInputError(f"partition must be a non-increasing tuple of positive integers, got {partition}")
    return lam


def _complete_homogeneous(t: np.ndarray, top: int) -> list:
    """h_0..h_top from exp(sum_k t_k x^k) = sum_m h_m x^m, via m h_m = sum_k k t_k h_{m-k}."""
    K = t.shape[0]
    h = [np.ones(t.shape[1:], complex)]
    for m in range(1, top + 1):
        acc = np.zeros(t.shape[1:], complex)
        for k in range(1, min(m, K) + 1):
            acc = acc + k * t[k - 1] * h[m - k]
        h.append(acc / m)
    return h


def _jacobi_trudi(lam, h, shift: int = 0):
    """Matrix [h_{lam_a - a + b - shift}] stacked on the trailing axes, shape (..., l, l)."""
    l = len(lam)
    zero = np.zeros_like(h[0])
    rows = []
    for a in range(l):
        row = []
        for b in range(l):
            idx = lam[a] - a + b - shift
            row.append(h[idx] if 0 <= idx < len(h) else zero)
        rows.append(np.stack(row, axis=-1))
    return np.stack(rows, axis=-2)


def _adjugate(M: np.ndarray) -> np.ndarray:
    """Adjugate by cofactors, valid for singular matrices too."""
    l = M.shape[-1]
    if l == 1:
        return np.ones_like(M)
    adj = np.empty_like(M)
    for a in range(l):
        for b in range(l):
            minor = np.delete(np.delete(M, a, axis=-2), b, axis=-1)
            adj[..., b, a] = (-1) ** (a + b) * np.linalg.det(minor)
    return adj


@dataclass(frozen=True)
class TauFunction:
    """Schur polynomial s_lambda(t_1..t_K), a polynomial KP tau-function."""

    partition: tuple
    K: int

    def __post_init__(self):
        lam = _check_partition(self.partition)
        object.__setattr__(self, "partition", lam)
        if int(self.K) < sum(lam) or int(self.K) < 1:
            raise InvalidInputError(f"K = {self.K} active times is fewer than |lambda| = {sum(lam)}")
        object.__setattr__(self, "K", int(self.K))

    def _times(self, t):
        t = np.asarray(t, dtype=complex)
        if t.shape[0] != self.K:
            raise InvalidInputError(f"expected {self.K} times along the first axis, got shape {t.shape}")
        return t

    def __call__(self, t):
        t = self._times(t)
        lam = self.partition
        if not lam:
            return np.ones(t.shape[1:], complex) if t.ndim > 1 else complex(1.0)
        h = _complete_homogeneous(t, lam[0] + len(lam))
        val = np.linalg.det(_jacobi_trudi(lam, h))
        return val if t.ndim > 1 else complex(val)

    def gradient(self, t):
        """(d tau / d t_k)_k, shape (K, ...), using d h_m / d t_k = h_{m-k} and Jacobi's formula."""
        t = self._times(t)
        lam = self.partition
        if not lam:
            return np.zeros(t.shape, complex)
        h = _complete_homogeneous(t, lam[0] + len(lam))
        adj = _adjugate(_jacobi_trudi(lam, h))
        out = []
        for k in range(1, self.K + 1):
            dM = _jacobi_trudi(lam, h, shift=k)
            out.append(np.einsum("...ba,...ab->...", adj, dM))
        return np.stack(out)

    @property
    def value_at_origin(self) -> complex:
        return complex(self(np.zeros(self.K)))


def schur_tau(partition, t) -> complex:
    t = np.asarray(t, dtype=complex).ravel()
    return TauFunction(tuple(partition), t.size)(t)


def _normalized_sum(terms) -> float:
    terms = [np.asarray(x, complex) for x in terms]
    scale = np.max(np.abs(np.stack(terms)), axis=0)
    total = np.abs(sum(terms))
    out = np.where(scale > 0, total / np.where(scale > 0, scale, 1.0), 0.0)
    return float(np.max(out))


def tau_fay_residual(tau: TauFunction, t, a, b, c, d) -> float:
    """Normalised three-term Fay residual of tau at times t for Miwa points a, b, c, d."""
    t = np.asarray(t, dtype=complex).reshape(tau.K)
    K = tau.K
    T = lambda x, y: tau(t + miwa(x, K) + miwa(y, K))
    terms = (
        (a - b) * (c - d) * T(a, b) * T(c, d),
        (b - c) * (a - d) * T(b, c) * T(a, d),
        (c - a) * (b - d) * T(c, a) * T(b, d),
    )
    return _normalized_sum(terms)


# --------------------------------------------------------------------------- geometries


@dataclass(frozen=True)
class GeometryData:
    """Holomorphic data (q, E, theta) with analytic derivatives.

    ``q`` and ``dq`` map a scalar z to a length-g vector; ``theta`` and
    ``grad_theta`` take a length-g vector.  ``E1``/``E2`` differentiate E in
    its first/second slot.
    """

    label: str
    dim: int
    q: Callable
    dq: Callable
    E: Callable
    E1: Callable
    E2: Callable
    theta: Callable
    grad_theta: Callable
    tau_function: TauFunction | None = None

    @classmethod
    def rational(cls, theta_kind: str = "linear") -> "GeometryData":
        """E = x - y, q(z) = z and theta(v) = v (``linear``) or theta = 1 (``constant``)."""
        if theta_kind == "linear":
            th, grad = (lambda v: complex(v[0])), (lambda v: np.array([1.0 + 0j]))
        elif theta_kind == "constant":
            th, grad = (lambda v: 1.0 + 0j), (lambda v: np.array([0.0 + 0j]))
        else:
            raise InvalidInputError(f"unknown rational theta kind {theta_kind!r}")
        return cls(
            label=f"rational-{theta_kind}",
            dim=1,
            q=lambda z: np.array([complex(z)]),
            dq=lambda z: np.array([1.0 + 0j]),
            E=lambda x, y: complex(x - y),
            E1=lambda x, y: 1.0 + 0j,
            E2=lambda x, y: -1.0 + 0j,
            theta=th,
            grad_theta=grad,
        )

    @classmethod
    def genus1(cls, tau) -> "GeometryData":
        tau = complex(tau)
        if not tau.imag > 0:
            raise InvalidInputError(f"Im(tau) must be positive, got {tau}")
        tp0 = theta_prime_zero(tau)
        return cls(
            label=f"genus1(tau={tau})",
            dim=1,
            q=lambda z: np.array([complex(z)]),
            dq=lambda z: np.array([1.0 + 0j]),
            E=lambda x, y: complex(_theta(x - y, tau)) / tp0,
            E1=lambda x, y: complex(theta_dz(x - y, tau)) / tp0,
            E2=lambda x, y: -complex(theta_dz(x - y, tau)) / tp0,
            theta=lambda v: complex(_theta(v[0], tau)),
            grad_theta=lambda v: np.array([complex(theta_dz(v[0], tau))]),
        )

    @classmethod
    def tau_mode(cls, tau_function: TauFunction) -> "GeometryData":
        """q(z) = [z] truncated at K, E = x - y, theta = tau."""
        K = tau_function.K
        powers = np.arange(K)
        return cls(
            label=f"tau{tau_function.partition}",
            dim=K,
            q=lambda z: miwa(complex(z), K),
            dq=lambda z: complex(z) ** powers + 0j,
            E=lambda x, y: complex(x - y),
            E1=lambda x, y: 1.0 + 0j,
            E2=lambda x, y: -1.0 + 0j,
            theta=lambda v: complex(tau_function(v)),
            grad_theta=lambda v: np.asarray(tau_function.gradient(v), complex),
            tau_function=tau_function,
        )

    def entrance_check(self, count: int = 50, seed: int = 0) -> float:
        """Fay residual over ``count`` random samples; raises when above the entrance tolerance."""
        res = fay_residual(self, count=count, seed=seed)
        norm = normalization_residual(self, seed=seed)
        if not (res < FAY_ENTRANCE_TOL and norm < 1e-6):
            raise GeometryError(
                f"geometry {self.label} fails the Fay entrance check (residual {res:.3g}, normalisation {norm:.3g})"
            )
        return res


def _fay_terms(geom: GeometryData, u, v, w, t, z):
    E, q, th = geom.E, geom.q, geom.theta
    return (
        E(u, v) * E(w, t) * th(z + q(u) + q(v)) * th(z + q(w) + q(t)),
        E(v, w) * E(u, t) * th(z + q(v) + q(w)) * th(z + q(u) + q(t)),
        E(w, u) * E(v, t) * th(z + q(w) + q(u)) * th(z + q(v) + q(t)),
    )


def _shifted_theta_ok(geom, u, v, w, t, z) -> bool:
    q, th = geom.q, geom.theta
    pairs = [(u, v), (w, t), (v, w), (u, t), (w, u), (v, t)]
    return all(abs(th(z + q(x) + q(y))) > _ZERO for x, y in pairs)


def fay_residual(geom: GeometryData, z_vec=None, points=None, count: int = 50, seed: int = 0,
                 max_retries: int = 1000) -> float:
    """Max over samples of |sum of the three Fay terms| / max |term|.

    With ``points = (u, v, w, t)`` and ``z_vec`` given a single sample is
    evaluated.  Otherwise points are drawn in the box |Re|, |Im| <= 0.5 and
    z_vec from a complex normal of scale 0.5; samples where theta vanishes at
    a shifted argument are redrawn.
    """
    if points is not None:
        u, v, w, t = (complex(x) for x in points)
        z = np.zeros(geom.dim, complex) if z_vec is None else np.asarray(z_vec, complex).reshape(geom.dim)
        if not _shifted_theta_ok(geom, u, v, w, t, z):
            raise GeometryError("theta vanishes at a shifted Fay argument")
        return _normalized_sum(_fay_terms(geom, u, v, w, t, z))
    rng = np.random.default_rng(seed)
    worst, done, tries = 0.0, 0, 0
    while done < count:
        tries += 1
        if tries > count + max_retries:
            raise GeometryError("too many theta zeros while sampling Fay arguments")
        u, v, w, t = rng.uniform(-0.5, 0.5, 4) + 1j * rng.uniform(-0.5, 0.5, 4)
        z = np.asarray(z_vec, complex).reshape(geom.dim) if z_vec is not None else 0.5 * (
            rng.normal(size=geom.dim) + 1j * rng.normal(size=geom.dim)
        )
        if not _shifted_theta_ok(geom, u, v, w, t, z):
            continue
        worst = max(worst, _normalized_sum(_fay_terms(geom, u, v, w, t, z)))
        done += 1
    return worst


def normalization_residual(geom: GeometryData, count: int = 10, seed: int = 0, h: float = 1e-6) -> float:
    """Max of |E(u,v) + E(v,u)| and |E(u, u+h)/(-h) - 1| over random u."""
    rng = np.random.default_rng(seed + 1)
    worst = 0.0
    for _ in range(count):
        u, v = rng.uniform(-0.5, 0.5, 2) + 1j * rng.uniform(-0.5, 0.5, 2)
        worst = max(worst, abs(geom.E(u, v) + geom.E(v, u)) / max(abs(geom.E(u, v)), 1e-300))
        worst = max(worst, abs(geom.E(u, u + h) / (-h) - 1))
    return worst


# --------------------------------------------------------------------------- configuration


def _vector(x, dim: int, name: str) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(x, dtype=complex)).ravel()
    if arr.size > dim:
        raise InvalidInputError(f"{name} has {arr.size} components, geometry dimension is {dim}")
    return np.concatenate([arr, np.zeros(dim - arr.size, complex)])


@dataclass
class AbstractConfig:
    """Punctures u, exponents s (summing to one), constant vectors a, b and a geometry.

    ``a`` and ``b`` are zero-padded to the geometry dimension.  ``contours``
    and ``z_ref`` are only used by the tau-mode potential.
    """

    u: tuple
    s: tuple
    geometry: GeometryData
    a: object = 0.0
    b: object = 0.0
    contours: dict = field(default_factory=dict)
    tolerances: ToleranceConfig = field(default_factory=ToleranceConfig)
    z_ref: complex | None = None

    def __post_init__(self):
        self.u = tuple(complex(x) for x in self.u)
        self.s = tuple(float(x) for x in self.s)
        if len(self.u) < 1 or len(self.s) != len(self.u):
            raise InvalidInputError("need one exponent per puncture and at least one puncture")
        if abs(sum(self.s) - 1) > 1e-12:
            raise InvalidInputError(f"exponents must sum to 1, got {sum(self.s)!r}")
        for i, j in itertools.combinations(range(self.n), 2):
            if abs(self.u[i] - self.u[j]) < 1e-9:
                raise InvalidInputError(f"punctures must be pairwise distinct ({self.u[i]})")
        self.a = _vector(self.a, self.geometry.dim, "a")
        self.b = _vector(self.b, self.geometry.dim, "b")
        self.contours = dict(self.contours)
        if self.z_ref is not None:
            self.z_ref = complex(self.z_ref)
        if abs(self.theta_eta) < _ZERO:
            raise InvalidInputError(f"theta(eta) vanishes at eta = {self.eta}")

    @property
    def n(self) -> int:
        return len(self.u)

    @property
    def eta(self) -> np.ndarray:
        q = self.geometry.q
        return sum(s * q(u) for s, u in zip(self.s, self.u)) + self.a

    @property
    def theta_eta(self) -> complex:
        return self.geometry.theta(self.eta)

    @property
    def reference_point(self) -> complex:
        return self.z_ref if self.z_ref is not None else complex(np.mean(self.u)) + 2.0

    def with_u(self, i: int, value) -> "AbstractConfig":
        u = list(self.u)
        u[i] = complex(value)
        return AbstractConfig(tuple(u), self.s, self.geometry, self.a, self.b, self.contours, self.tolerances, self.z_ref)

    def names(self, z=None) -> dict:
        out = {f"u{i + 1}": u for i, u in enumerate(self.u)}
        if z is not None:
            out["z"] = complex(z)
        return out


# --------------------------------------------------------------------------- connection matrices


_checked_geometries: dict = {}


def _ensure_entrance(geom: GeometryData):
    key = id(geom)
    if _checked_geometries.get(key) is not geom:
        geom.entrance_check()
        _checked_geometries[key] = geom


def _nonzero(value, what):
    if abs(value) < _ZERO:
        raise DegenerateConfigurationError(f"{what} vanishes")
    return value


def _matrices(cfg: AbstractConfig, zs) -> list:
    G = cfg.geometry
    n, Z = cfg.n, len(zs)
    u, s = cfg.u, cfg.s
    eta = cfg.eta
    te = _nonzero(G.theta(eta), "theta(eta)")
    out = []
    for i in range(n):
        A = np.zeros((n + Z, n + Z), complex)
        for j in range(n):
            if j == i:
                continue
            Eij = _nonzero(G.E(u[i], u[j]), f"E(u{i + 1}, u{j + 1})")
            A[j, j] = -s[i] * G.E1(u[i], u[j]) / Eij
            A[j, i] = s[j] * G.theta(G.q(u[j]) - G.q(u[i]) + eta) / (te * Eij)
        for m, z in enumerate(zs):
            r = n + m
            Ezi = _nonzero(G.E(z, u[i]), f"E(z, u{i + 1})")
            A[r, r] = -(s[i] - 1) * G.E2(z, u[i]) / Ezi
            arg = G.q(z) - G.q(u[i]) + eta
            th_arg = _nonzero(G.theta(arg), "theta(q(z) - q(u_i) + eta)")
            others = np.prod([G.E(z, u[j]) for j in range(n) if j != i]) if n > 1 else 1.0
            dq = G.dq(z)
            bracket = (
                cfg.b @ dq
                + sum(s[j] * G.E1(z, u[j]) / G.E(z, u[j]) for j in range(n))
                - G.E1(z, u[i]) / Ezi
                + dq @ G.grad_theta(arg) / th_arg
            )
            A[r, i] = -th_arg * others / te * bracket
        out.append(A)
    return out


def comp_system_matrices(cfg: AbstractConfig, z_samples=None) -> list:
    """Connection matrices A_1..A_n (n x n), or B_1..B_n ((n+Z) x (n+Z)) with z-rows appended.

    Unknowns are ordered f_1..f_n followed by f(z) at each z sample.  Row i of
    the i-th matrix is left at zero.
    """
    _ensure_entrance(cfg.geometry)
    zs = [] if z_samples is None else [complex(z) for z in np.atleast_1d(z_samples)]
    for z in zs:
        if min(abs(z - u) for u in cfg.u) < 1e-9:
            raise GeometryError(f"z sample {z} coincides with a puncture")
    return _matrices(cfg, zs)


def determined_rows(n: int, pair, z_count: int = 0) -> list:
    i, k = pair
    return [j for j in range(n) if j not in (i, k)] + list(range(n, n + z_count))


def curvature(cfg: AbstractConfig, pair, fd_step: float | None = None, z_samples=None) -> np.ndarray:
    """Full curvature matrix d_k A_i - d_i A_k + A_i A_k - A_k A_i (five-point central FD in u)."""
    i, k = pair
    if i == k:
        raise InvalidInputError("curvature needs two distinct puncture indices")
    if not (0 <= i < cfg.n and 0 <= k < cfg.n):
        raise InvalidInputError(f"pair {pair} out of range for n = {cfg.n}")
    _ensure_entrance(cfg.geometry)
    zs = [] if z_samples is None else [complex(z) for z in np.atleast_1d(z_samples)]
    step = cfg.tolerances.fd_step if fd_step is None else float(fd_step)

    def deriv(idx, wrt):
        h = step * max(1.0, abs(cfg.u[wrt]))
        at = lambda x: _matrices(cfg.with_u(wrt, cfg.u[wrt] + x), zs)[idx]
        return (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12 * h)

    A = _matrices(cfg, zs)
    return deriv(i, k) - deriv(k, i) + A[i] @ A[k] - A[k] @ A[i]


def zero_curvature_residual(cfg: AbstractConfig, pair, fd_step: float | None = None, z_samples=None) -> float:
    """Max-abs curvature over the rows the systems determine.

    These are the rows j outside the pair plus any z-rows.  For n = 2
    without z-samples nothing is determined and the residual is 0.
    """
    F = curvature(cfg, pair, fd_step, z_samples)
    z_count = 0 if z_samples is None else np.atleast_1d(z_samples).size
    rows = determined_rows(cfg.n, pair, z_count)
    if not rows:
        return 0.0
    return float(np.abs(F[rows]).max())


def max_zero_curvature_residual(cfg: AbstractConfig, fd_step: float | None = None, z_samples=None) -> float:
    return max(
        zero_curvature_residual(cfg, pair, fd_step, z_samples) for pair in itertools.combinations(range(cfg.n), 2)
    )


# --------------------------------------------------------------------------- tau-mode potential


def _require_tau(cfg: AbstractConfig) -> TauFunction:
    tf = cfg.geometry.tau_function
    if tf is None:
        raise InvalidInputError("the tau-mode potential needs a tau-mode geometry")
    if abs(cfg.theta_eta) < _ZERO:
        raise DegenerateConfigurationError("tau(eta) vanishes")
    return tf


def _exp_part(cfg: AbstractConfig):
    coeffs = np.concatenate([[0.0], cfg.b / np.arange(1, cfg.b.size + 1)])
    return lambda t: np.polynomial.polynomial.polyval(np.asarray(t, complex), coeffs)


def numerator_weight_tau(cfg: AbstractConfig) -> BranchedWeight:
    return BranchedWeight.linear(cfg.u, cfg.s, _exp_part(cfg))


def integrand_weight_tau(cfg: AbstractConfig) -> BranchedWeight:
    e = _exp_part(cfg)
    return BranchedWeight.linear(cfg.u, -np.asarray(cfg.s), lambda t: -e(t))


def _resolve_tau_contour(cfg: AbstractConfig, name: str, z) -> Contour:
    if name not in cfg.contours:
        raise InvalidInputError(f"unknown contour {name!r}")
    contour = resolve_contour(cfg.contours[name], cfg.names(z))
    if not contour.closed:
        pts = np.array(cfg.u)
        for end in (contour.start, contour.end):
            k = int(np.argmin(np.abs(pts - end)))
            if abs(pts[k] - end) > 1e-12:
                continue
            s = cfg.s[k]
            if not s < 1 or abs(s - round(s)) < 1e-12:
                raise InvalidInputError(f"contour {name!r}: exponent {s} at endpoint {end} must be < 1 and non-integer")
    return contour


def potential_tau(z, contour_name: str, cfg: AbstractConfig):
    """Tau-mode potential at z; returns (value, err).

    The integrand's weight is principal at the contour start, the numerator is
    principal at ``cfg.reference_point`` and continued along the straight
    segment to z.  Contours anchored at z start on the numerator branch.
    """
    tf = _require_tau(cfg)
    z = complex(z)
    if min(abs(z - u) for u in cfg.u) < 1e-9:
        raise GeometryError("z coincides with a puncture")
    contour = _resolve_tau_contour(cfg, contour_name, z)
    if contour.distance(np.array([z])).min() < 1e-6 and "z" not in descriptor_names(cfg.contours[contour_name]):
        raise GeometryError("z lies on the contour")
    num_w = numerator_weight_tau(cfg)
    num_logs = continue_logs(num_w, cfg.reference_point, z)
    num = complex(num_w.from_logs(num_logs, z))
    start = None
    if "z" in descriptor_names(cfg.contours[contour_name]):
        start = continue_logs(num_w, z, contour.start, num_logs)
    K = tf.K
    base = cfg.eta + miwa(z, K)
    te = cfg.theta_eta

    def integrand(t, w):
        args = base[:, None] - miwa(t, K)
        return tf(args) / ((z - t) * te) * w

    val, err = integrate(integrand, contour, cfg.tolerances.quad_tol, integrand_weight_tau(cfg), start_logs=start)
    return num * val, float(err * abs(num))


def small_circle_tau(cfg: AbstractConfig, z, radius: float = 0.01) -> complex:
    """Potential over a positively oriented circle of the given radius around z."""
    probe = AbstractConfig(cfg.u, cfg.s, cfg.geometry, cfg.a, cfg.b,
                           {"_small": {"type": "circle", "center": "z", "radius": radius}},
                           cfg.tolerances, cfg.reference_point)
    return potential_tau(z, "_small", probe)[0]


def tau_potential_report(cfg: AbstractConfig, contour_names, seed: int = 0, sample_count: int = 12,
                         radius: float = 0.6) -> dict:
    """Exploratory measurements of the tau-mode potentials; nothing here is asserted.

    For every contour pair (a, b) and puncture l the cross functions
    dzP_a du_lP_b - dzP_b du_lP_a are built from central finite differences at
    random z around the reference point; their joint numerical rank and
    singular values are reported together with the small-circle value.
    """
    names = list(contour_names)
    rng = np.random.default_rng(seed)
    center = cfg.reference_point
    samples = sample_annulus(rng, sample_count, center, 0.1, radius, cfg.u, 0.1).points
    step = cfg.tolerances.fd_step * 10

    def values(c, zs):
        return np.array([potential_tau(z, name, c)[0] for name in names for z in zs]).reshape(len(names), len(zs))

    dz = (values(cfg, samples + step) - values(cfg, samples - step)) / (2 * step)
    du = []
    for l in range(cfg.n):
        plus = values(cfg.with_u(l, cfg.u[l] + step), samples)
        minus = values(cfg.with_u(l, cfg.u[l] - step), samples)
        du.append((plus - minus) / (2 * step))
    columns = []
    for a, b in itertools.combinations(range(len(names)), 2):
        for l in range(cfg.n):
            columns.append(dz[a] * du[l][b] - dz[b] * du[l][a])
    report = {
        "contours": names,
        "samples": int(sample_count),
        "small_circle": complex(small_circle_tau(cfg, center + 0.3)),
        "tau_at_origin": cfg.geometry.tau_function.value_at_origin,
    }
    if columns:
        M = np.array(columns).T
        sv = singular_values(M)
        report["cross_rank"] = numerical_rank(M, cfg.tolerances.rank_rel_tol) if M.shape[0] >= M.shape[1] else None
        report["cross_singular_values"] = [float(x) for x in sv]
    return report
