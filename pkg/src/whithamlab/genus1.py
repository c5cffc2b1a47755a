"""Genus-one potentials

    P_gamma(z) = W(z) * int_gamma theta'(0) theta(z - t + eta) / (theta(eta) theta(z - t)) dt / W(t),
    W(t) = theta(t - u_1)^{s_1} ... theta(t - u_n)^{s_n} theta(t)^{s_{n+1}} e^{b t},
    eta = s_1 u_1 + ... + s_n u_n + a,   s_1 + ... + s_{n+1} = 0,

with p = (u_1, ..., u_n, 0) and

    f_k  = s_k theta'(0)^2 / theta(eta) * int_gamma theta(t - p_k - eta) / theta(t - p_k) dt / W(t),
    D_k(z) = theta(z - p_k + eta) / (theta(eta) theta(z - p_k)),
    T_k(z) = theta'(z - p_k + eta) / (2 pi i theta(eta) theta(z - p_k)),

    dP/dz   = W(z) sum_k f_k D_k(z),
    dP/du_i = -W(z) f_i D_i(z),
    dP/dtau = -theta'(eta) / (2 pi i theta(eta)) dP/dz + W(z) sum_k f_k T_k(z).

The fields are (u_1, ..., u_n, tau).  The tau-derivative above is taken at fixed
u, b and fixed a - b tau / (2 pi i); at fixed a it acquires -(b / 2 pi i) dP/da
(see dP_dtau_fixed_a), and the two agree when b = 0.  The cross-difference
functions divided by W(z)^2 are single valued, periodic under z -> z + 1 and pick up
exp(-4 pi i eta) under z -> z + tau.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import theta as th
from .contours import (
    BranchedWeight,
    Contour,
    continue_logs,
    descriptor_names,
    encloses_none,
    integrate,
    monodromy_factor,
    resolve_contour,
)
from .errors import ExtractionError, GeometryError, InvalidInputError
from .genus0 import PAIR_ROLES, _probe
from .hydro import ConsistencyResult, HydroSystem, SpanProbe, consistency_residual
from .numerics import SampleSet, ToleranceConfig, default_sample_count, sample_annulus

PATH_MARGIN = 0.05
ETA_MIN_DISTANCE = 1e-3


@dataclass
class Genus1Config:
    u: tuple
    s: tuple
    a: complex
    b: complex
    tau: complex
    contours: dict = field(default_factory=dict)
    tolerances: ToleranceConfig = field(default_factory=ToleranceConfig)
    z_ref: complex | None = None
    sample_center: complex | None = None
    sample_radius: float = 0.4

    def __post_init__(self):
        self.u = tuple(complex(x) for x in self.u)
        self.s = tuple(float(x) for x in self.s)
        self.a, self.b = complex(self.a), complex(self.b)
        self.tau = th.LatticeParam(self.tau).tau
        n = len(self.u)
        if n < 1:
            raise InvalidInputError("need at least one puncture u_1")
        if len(self.s) != n + 1:
            raise InvalidInputError(f"expected n + 1 = {n + 1} exponents, got {len(self.s)}")
        if abs(sum(self.s)) > 1e-12:
            raise InvalidInputError(f"exponents must satisfy s_1 + ... + s_(n+1) = 0 (sum is {sum(self.s):.3g})")
        pts = self.points
        for i, j in itertools.combinations(range(n + 1), 2):
            if th.lattice_distance(pts[i] - pts[j], self.tau) < 1e-9:
                raise InvalidInputError("punctures must be pairwise distinct modulo the lattice")
        if th.lattice_distance(self.eta, self.tau) < ETA_MIN_DISTANCE:
            raise InvalidInputError(f"eta = {self.eta} is within {ETA_MIN_DISTANCE} of the lattice; theta(eta) vanishes")
        self.contours = dict(self.contours)
        if self.z_ref is not None:
            self.z_ref = complex(self.z_ref)
        if self.sample_center is not None:
            self.sample_center = complex(self.sample_center)

    @property
    def n(self) -> int:
        return len(self.u)

    @property
    def points(self) -> np.ndarray:
        return np.array(list(self.u) + [0.0], dtype=complex)

    @property
    def exponents(self) -> np.ndarray:
        return np.array(self.s, dtype=float)

    @property
    def eta(self) -> complex:
        return complex(sum(si * ui for si, ui in zip(self.s, self.u)) + self.a)

    @property
    def reference_point(self) -> complex:
        if self.z_ref is not None:
            return self.z_ref
        return complex(self.points.mean()) - 0.2 + 0.25j

    @property
    def center(self) -> complex:
        return self.sample_center if self.sample_center is not None else self.reference_point

    def names(self, z=None) -> dict:
        out = {f"u{i + 1}": u for i, u in enumerate(self.u)}
        out["tau"] = self.tau
        if z is not None:
            out["z"] = complex(z)
        return out

    def replace(self, **changes) -> "Genus1Config":
        values = dict(u=self.u, s=self.s, a=self.a, b=self.b, tau=self.tau, contours=self.contours,
                      tolerances=self.tolerances, z_ref=self.z_ref, sample_center=self.sample_center,
                      sample_radius=self.sample_radius)
        values.update(changes)
        return Genus1Config(**values)

    def with_u(self, i: int, value) -> "Genus1Config":
        u = list(self.u)
        u[i] = complex(value)
        return self.replace(u=tuple(u))

    def with_tau(self, value) -> "Genus1Config":
        return self.replace(tau=complex(value))

    @property
    def field_names(self) -> list:
        return [f"u{i + 1}" for i in range(self.n)] + ["tau"]


@dataclass
class FCoefficientsG1:
    f: np.ndarray
    err: float = 0.0


# --------------------------------------------------------------------------- weights


def numerator_weight(cfg: Genus1Config) -> BranchedWeight:
    b = cfg.b
    return BranchedWeight.theta(cfg.points, cfg.exponents, cfg.tau, lambda t: b * t)


def integrand_weight(cfg: Genus1Config) -> BranchedWeight:
    b = cfg.b
    return BranchedWeight.theta(cfg.points, -cfg.exponents, cfg.tau, lambda t: -b * t)


def numerator_logs(cfg: Genus1Config, z) -> np.ndarray:
    return continue_logs(numerator_weight(cfg), cfg.reference_point, complex(z))


def _numerator_values(cfg, zs):
    w = numerator_weight(cfg)
    return np.array([complex(w.from_logs(numerator_logs(cfg, z), z)) for z in zs])


def weight_g1(t, cfg: Genus1Config, start=None) -> complex:
    """W(t) continued along the straight path from ``start`` (default z_ref), principal there."""
    t = complex(t)
    if th.lattice_distance(cfg.points - t, cfg.tau).min() < 1e-12:
        raise GeometryError(f"weight evaluated at a puncture {t}")
    w = numerator_weight(cfg)
    base = cfg.reference_point if start is None else complex(start)
    return complex(w.from_logs(continue_logs(w, base, t), t))


# --------------------------------------------------------------------------- contours


def _z_anchored(desc) -> bool:
    return "z" in descriptor_names(desc)


def _is_zero(cfg, point):
    """Index of the puncture whose lattice class contains ``point``, or None."""
    d = th.lattice_distance(cfg.points - point, cfg.tau)
    k = int(np.argmin(d))
    return k if d[k] < 1e-12 else None


def resolve(cfg: Genus1Config, name: str, z=None) -> Contour:
    if name not in cfg.contours:
        raise InvalidInputError(f"unknown contour {name!r}")
    desc = cfg.contours[name]
    if _z_anchored(desc) and z is None:
        raise InvalidInputError(f"contour {name!r} is anchored at z; a z value is required")
    contour = resolve_contour(desc, cfg.names(z))
    if not contour.closed:
        for end in (contour.start, contour.end):
            k = _is_zero(cfg, end)
            if k is None:
                continue
            s = cfg.s[k]
            if not s < 1 or abs(s - round(s)) < 1e-12:
                raise InvalidInputError(f"contour {name!r}: exponent {s} at endpoint {end} must be < 1 and non-integer")
    return contour


def require_cycle(cfg: Genus1Config, name: str, z=None) -> Contour:
    desc = cfg.contours[name]
    contour = resolve(cfg, name, z if z is not None else (cfg.reference_point if _z_anchored(desc) else None))
    if contour.closed:
        mu = monodromy_factor(integrand_weight(cfg), contour)
        if abs(mu - 1) > 1e-9:
            raise GeometryError(f"closed contour {name!r} has monodromy {mu:.6g}; not a twisted cycle")
        return contour
    for end in (contour.start, contour.end):
        if _is_zero(cfg, end) is None:
            raise GeometryError(f"open contour {name!r} must start and end at punctures (endpoint {end})")
    return contour


def _start_logs_for(cfg, contour, desc, z):
    if not _z_anchored(desc):
        return None
    return continue_logs(numerator_weight(cfg), complex(z), contour.start, numerator_logs(cfg, z))


def _check_z(cfg, zs, contour=None):
    zs = np.asarray(zs, complex)
    if th.lattice_distance(zs[:, None] - cfg.points[None, :], cfg.tau).min() < 1e-9:
        raise GeometryError("z is congruent to a puncture")
    if contour is not None:
        translates = th.lattice_translates(zs, cfg.tau, reach=2)
        if contour.distance(translates).min() < 1e-6:
            raise GeometryError("a lattice translate of z lies within 1e-6 of the contour (kernel pole)")


# --------------------------------------------------------------------------- potentials


def _kernel(zs, t, cfg):
    tp0 = th.theta_prime_zero(cfg.tau)
    eta = cfg.eta
    diff = zs[:, None] - t[None, :]
    return tp0 * th.theta(diff + eta, cfg.tau) / (th.theta(eta, cfg.tau) * th.theta(diff, cfg.tau))


def potentials_g1(zs, contour_name: str, cfg: Genus1Config):
    zs = np.atleast_1d(np.asarray(zs, complex))
    desc = cfg.contours.get(contour_name)
    if desc is None:
        raise InvalidInputError(f"unknown contour {contour_name!r}")
    weight = integrand_weight(cfg)
    tol = cfg.tolerances.quad_tol
    num = _numerator_values(cfg, zs)
    if _z_anchored(desc):
        values = np.empty(zs.size, complex)
        err = 0.0
        for m, z in enumerate(zs):
            contour = resolve(cfg, contour_name, z)
            zz = np.array([z])
            _check_z(cfg, zz, contour)
            start = _start_logs_for(cfg, contour, desc, z)
            val, e = integrate(lambda t, w: (_kernel(zz, t, cfg) * w[None, :])[0], contour, tol, weight,
                               start_logs=start)
            values[m] = num[m] * val
            err = max(err, e * abs(num[m]))
        return values, err
    contour = resolve(cfg, contour_name)
    _check_z(cfg, zs, contour)
    val, e = integrate(lambda t, w: _kernel(zs, t, cfg) * w[None, :], contour, tol, weight)
    return num * val, float(e * np.abs(num).max())


def potential_g1(z, contour_name: str, cfg: Genus1Config):
    values, err = potentials_g1([z], contour_name, cfg)
    return complex(values[0]), err


def f_coefficients_g1(contour_name: str, cfg: Genus1Config, z=None) -> FCoefficientsG1:
    contour = require_cycle(cfg, contour_name, z)
    desc = cfg.contours[contour_name]
    start = _start_logs_for(cfg, contour, desc, z if z is not None else cfg.reference_point)
    p = cfg.points
    eta = cfg.eta
    tau = cfg.tau
    if encloses_none(contour, th.lattice_translates(p, tau)):
        return FCoefficientsG1(np.zeros(p.size, complex))

    def integrand(t, w):
        d = t[None, :] - p[:, None]
        return th.theta(d - eta, tau) / th.theta(d, tau) * w[None, :]

    vals, err = integrate(integrand, contour, cfg.tolerances.quad_tol, integrand_weight(cfg),
                          start_logs=start, finite_part=True)
    pref = cfg.exponents * th.theta_prime_zero(tau) ** 2 / th.theta(eta, tau)
    return FCoefficientsG1(pref * vals, float(err * np.abs(pref).max()))


def _D(zs, cfg):
    eta, tau = cfg.eta, cfg.tau
    d = zs[:, None] - cfg.points[None, :]
    return th.theta(d + eta, tau) / (th.theta(eta, tau) * th.theta(d, tau))


def _T(zs, cfg):
    eta, tau = cfg.eta, cfg.tau
    d = zs[:, None] - cfg.points[None, :]
    return th.theta_dz(d + eta, tau, 1) / (2j * np.pi * th.theta(eta, tau) * th.theta(d, tau))


def dP_from_f(fc: FCoefficientsG1, zs, cfg: Genus1Config, numerator=None):
    zs = np.atleast_1d(np.asarray(zs, complex))
    num = _numerator_values(cfg, zs) if numerator is None else numerator
    D = _D(zs, cfg)
    dz = num * (D @ fc.f)
    du = -num[:, None] * fc.f[None, : cfg.n] * D[:, : cfg.n]
    eta = cfg.eta
    log_d_eta = th.theta_dz(eta, cfg.tau, 1) / th.theta(eta, cfg.tau)
    dtau = -log_d_eta / (2j * np.pi) * dz + num * (_T(zs, cfg) @ fc.f)
    return dz, du, dtau


def dP_da_g1(zs, contour_name: str, cfg: Genus1Config):
    """dP/da at fixed (u, tau, b): the kernel's eta-derivative integrated against the weight."""
    zs = np.atleast_1d(np.asarray(zs, complex))
    desc = cfg.contours[contour_name]
    if _z_anchored(desc):
        return np.zeros(zs.size, complex)
    contour = resolve(cfg, contour_name)
    _check_z(cfg, zs, contour)
    eta, tau = cfg.eta, cfg.tau
    log_d_eta = th.theta_dz(eta, tau, 1) / th.theta(eta, tau)

    def integrand(t, w):
        arg = zs[:, None] - t[None, :] + eta
        th0, th1, _ = th.theta_all(arg, tau)
        return _kernel(zs, t, cfg) * (th1 / th0 - log_d_eta) * w[None, :]

    val, _ = integrate(integrand, contour, cfg.tolerances.quad_tol, integrand_weight(cfg))
    return _numerator_values(cfg, zs) * val


def dP_dtau_fixed_a(zs, contour_name: str, cfg: Genus1Config):
    """Partial tau-derivative holding a fixed.

    The theta'-sum closed form differentiates at fixed a - b tau / (2 pi i); the two
    differ by -(b / 2 pi i) dP/da.
    """
    zs = np.atleast_1d(np.asarray(zs, complex))
    _, _, dtau = dP_closed_g1(zs, contour_name, cfg)
    if cfg.b == 0:
        return dtau
    return dtau - cfg.b / (2j * np.pi) * dP_da_g1(zs, contour_name, cfg)


def tau_shifted(cfg: Genus1Config, tau, hold: str = "comoving") -> Genus1Config:
    """Config at a new tau; ``hold='comoving'`` keeps a - b tau / (2 pi i) fixed, ``hold='a'`` keeps a."""
    if hold == "a":
        return cfg.with_tau(tau)
    if hold == "comoving":
        return cfg.replace(tau=complex(tau), a=cfg.a + cfg.b * (complex(tau) - cfg.tau) / (2j * np.pi))
    raise InvalidInputError(f"unknown hold mode {hold!r}")


def _anchor_z(cfg, name, zs):
    return zs[0] if _z_anchored(cfg.contours[name]) else None


def dP_closed_g1(z, contour_name: str, cfg: Genus1Config):
    """(dP/dz, dP/du, dP/dtau); vectorised over z."""
    scalar = np.ndim(z) == 0
    zs = np.atleast_1d(np.asarray(z, complex))
    fc = f_coefficients_g1(contour_name, cfg, _anchor_z(cfg, contour_name, zs))
    dz, du, dtau = dP_from_f(fc, zs, cfg)
    if scalar:
        return complex(dz[0]), du[0], complex(dtau[0])
    return dz, du, dtau


def field_derivatives(fc: FCoefficientsG1, zs, cfg, numerator=None):
    """(dP/dz, matrix of dP/d field) with fields (u_1..u_n, tau)."""
    dz, du, dtau = dP_from_f(fc, zs, cfg, numerator)
    return dz, np.column_stack([du, dtau])


def cross_from_f(fa, fb, zs, l: int, cfg: Genus1Config, numerator=None):
    """Cross-difference function for field l (1-based; l = n + 1 is tau)."""
    dza, fa_ = field_derivatives(fa, zs, cfg, numerator)
    dzb, fb_ = field_derivatives(fb, zs, cfg, numerator)
    return dza * fb_[:, l - 1] - dzb * fa_[:, l - 1]


def phi_from_f(fa, fb, zs, l: int, cfg: Genus1Config):
    """Cross-difference function divided by W(z)^2, assembled without the multivalued weight."""
    zs = np.atleast_1d(np.asarray(zs, complex))
    D = _D(zs, cfg)
    if l <= cfg.n:
        k = l - 1
        return -(D @ fa.f) * fb.f[k] * D[:, k] + (D @ fb.f) * fa.f[k] * D[:, k]
    T = _T(zs, cfg)
    return (D @ fa.f) * (T @ fb.f) - (D @ fb.f) * (T @ fa.f)


def phi_g1(z, contour_a: str, contour_b: str, l: int, cfg: Genus1Config):
    if not 1 <= l <= cfg.n + 1:
        raise InvalidInputError(f"l must lie in 1..{cfg.n + 1}")
    scalar = np.ndim(z) == 0
    zs = np.atleast_1d(np.asarray(z, complex))
    fa = f_coefficients_g1(contour_a, cfg, _anchor_z(cfg, contour_a, zs))
    fb = fa if contour_b == contour_a else f_coefficients_g1(contour_b, cfg, _anchor_z(cfg, contour_b, zs))
    out = phi_from_f(fa, fb, zs, l, cfg)
    return complex(out[0]) if scalar else out


# --------------------------------------------------------------------------- checks


def sample_z_g1(cfg: Genus1Config, count: int, rng: np.random.Generator, contour_names=(), visible: bool = False,
                exclusion_radius: float = 0.1, r_min: float = 0.0, r_max: float | None = None) -> SampleSet:
    """Samples in a disc around ``cfg.center`` inside one cell of the contour grid.

    Lattice translates of the punctures and contours are kept at a distance,
    since the kernel has poles at t = z + lattice.  With ``visible`` the
    straight path from z_ref keeps clear of them as well.
    """
    r_max = cfg.sample_radius if r_max is None else r_max
    contours = [resolve(cfg, n) for n in contour_names if not _z_anchored(cfg.contours[n])]
    shifts = th.lattice_translates([0.0], cfg.tau, reach=2)
    singular = th.lattice_translates(cfg.points, cfg.tau, reach=2)
    zref = cfg.reference_point

    def accept(z):
        for c in contours:
            if c.distance(z + shifts).min() < PATH_MARGIN:
                return False
        if visible:
            for p in singular:
                if _point_seg(p, zref, z) < PATH_MARGIN:
                    return False
            for c in contours:
                for w in shifts:
                    if c.min_distance_to_path(zref + w, z + w) < PATH_MARGIN:
                        return False
        return True

    return sample_annulus(rng, count, cfg.center, r_min, r_max, singular, exclusion_radius, accept)


def _point_seg(p, a, b):
    d = b - a
    if d == 0:
        return abs(p - a)
    s = min(1.0, max(0.0, ((p - a) * np.conj(d)).real / abs(d) ** 2))
    return abs(p - (a + s * d))


def _generic_z(cfg, count, rng, margin=0.15):
    """z anywhere in a fundamental cell, away from the lattice translates of the punctures."""
    out = []
    while len(out) < count:
        z = rng.uniform(-0.5, 0.5) + rng.uniform(-0.5, 0.5) * cfg.tau
        if th.lattice_distance(z - cfg.points, cfg.tau).min() < margin:
            continue
        if th.lattice_distance(z + cfg.tau - cfg.points, cfg.tau).min() < margin:
            continue
        out.append(z)
    return np.array(out)


def quasi_periodicity_check(contour_a: str, contour_b: str, l: int, cfg: Genus1Config, sample_count: int = 20,
                            seed: int = 0) -> dict:
    """Residuals of phi(z + 1) = phi(z) and phi(z + tau) = exp(-4 pi i eta) phi(z), plus simple-pole probes."""
    rng = np.random.default_rng(seed)
    zs = _generic_z(cfg, sample_count, rng)
    fa = f_coefficients_g1(contour_a, cfg, _anchor_z(cfg, contour_a, zs))
    fb = f_coefficients_g1(contour_b, cfg, _anchor_z(cfg, contour_b, zs))
    phi = phi_from_f(fa, fb, zs, l, cfg)
    phi1 = phi_from_f(fa, fb, zs + 1, l, cfg)
    phit = phi_from_f(fa, fb, zs + cfg.tau, l, cfg)
    mult = np.exp(-4j * np.pi * cfg.eta)
    printed = np.exp(-2j * np.pi * cfg.eta)

    def rel(x, y):
        scale = np.maximum(np.maximum(np.abs(x), np.abs(y)), 1e-300)
        return float((np.abs(x - y) / scale).max()) if np.abs(x).max() + np.abs(y).max() > 0 else 0.0

    poles = []
    for p in cfg.points:
        rows = []
        for r in (1e-2, 1e-3, 1e-4, 1e-5):
            zz = p + r * np.exp(1j * (0.3 + np.pi / 2 * np.arange(4)))
            rows.append(np.abs((zz - p) * phi_from_f(fa, fb, zz, l, cfg)))
        rows = np.array(rows)
        base = max(rows[0].max(), 1e-300)
        poles.append(float(rows.max() / base))
    growth = max(poles)
    return {
        "period_1": rel(phi1, phi),
        "period_tau": rel(phit, mult * phi),
        "period_tau_printed_multiplier": rel(phit, printed * phi),
        "pole_growth": growth,
        "simple_poles": bool(growth < 10.0),
        "samples": int(sample_count),
    }


def span_probe_g1(cfg: Genus1Config, contour_names, mode: str = "cross", seed: int = 0,
                  sample_count: int | None = None) -> SpanProbe:
    rng = np.random.default_rng(seed)
    names = list(contour_names)
    if mode == "cross":
        if len(names) < 3:
            raise InvalidInputError("cross mode needs at least three contours")
        triple = names[:3]
        L = cfg.n + 1
        count = sample_count or default_sample_count(3 * L)
        zs = _generic_z(cfg, count, rng)
        fs = {name: f_coefficients_g1(name, cfg, _anchor_z(cfg, name, zs)) for name in set(triple)}
        cols = []
        for a, b in itertools.combinations(triple, 2):
            for l in range(1, L + 1):
                cols.append(phi_from_f(fs[a], fs[b], zs, l, cfg))
        return _probe(np.array(cols).T, cfg.n + 1, cfg.tolerances.rank_rel_tol)
    if mode == "potentials":
        expected = cfg.n + 2
        count = sample_count or default_sample_count(max(expected, len(names) + 1))
        zs = sample_z_g1(cfg, count, rng, names, visible=True).points
        cols = [potentials_g1(zs, name, cfg)[0] for name in names]
        cols.append(np.ones(zs.size, complex))
        return _probe(np.array(cols).T, expected, cfg.tolerances.rank_rel_tol)
    raise InvalidInputError(f"unknown span mode {mode!r}")


def span_dimension_g1(cfg: Genus1Config, contour_names, mode: str = "cross", seed: int = 0) -> int:
    return span_probe_g1(cfg, contour_names, mode, seed).rank


# --------------------------------------------------------------------------- extraction


def _phi_columns(fs, zs, cfg):
    cols, labels = [], []
    for role, (x, y) in PAIR_ROLES.items():
        for l in range(1, cfg.n + 2):
            cols.append(phi_from_f(fs[x], fs[y], zs, l, cfg))
            labels.append((role, l))
    return np.array(cols).T, labels


def extract_hydro_g1(cfg: Genus1Config, triple, seed: int = 0, held_out: int = 20,
                     held_out_tol: float = 1e-7) -> HydroSystem:
    """Basis chosen by column-pivoted QR among the sampled phi functions themselves."""
    triple = tuple(triple)
    if len(triple) != 3 or len(set(triple)) != 3:
        raise InvalidInputError("extraction needs three distinct contours")
    rng = np.random.default_rng(seed)
    L = cfg.n + 1
    fit_z = _generic_z(cfg, default_sample_count(3 * L), rng)
    test_z = _generic_z(cfg, held_out, rng)
    fs = [f_coefficients_g1(name, cfg, _anchor_z(cfg, name, fit_z)) for name in triple]
    fit_cols, labels = _phi_columns(fs, fit_z, cfg)
    test_cols, _ = _phi_columns(fs, test_z, cfg)
    scale = np.linalg.norm(fit_cols, axis=0)
    scale[scale == 0] = 1.0
    _, R, piv = scipy.linalg.qr(fit_cols / scale, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    m = int(np.count_nonzero(diag > cfg.tolerances.rank_rel_tol * diag[0])) if diag[0] > 0 else 0
    if m == 0:
        raise ExtractionError("all cross-difference functions vanish", {"rank": 0})
    chosen = list(piv[:m])
    basis_fit = fit_cols[:, chosen]
    basis_test = test_cols[:, chosen]
    coef, *_ = np.linalg.lstsq(basis_fit, fit_cols, rcond=None)
    col_scale = np.maximum(1.0, np.abs(fit_cols).max(axis=0))
    fit_res = float((np.abs(basis_fit @ coef - fit_cols).max(axis=0) / col_scale).max())
    held = float((np.abs(basis_test @ coef - test_cols).max(axis=0) / col_scale).max())
    mats = {role: np.zeros((m, L), complex) for role in PAIR_ROLES}
    for idx, (role, l) in enumerate(labels):
        mats[role][:, l - 1] = coef[:, idx]
    notes = []
    if m != cfg.n + 1:
        notes.append(f"measured dimension {m} differs from n + 1 = {cfg.n + 1}")
    for role, mat in mats.items():
        if np.abs(mat).max() < 1e-14:
            x, y = PAIR_ROLES[role]
            notes.append(f"{role} vanishes: pair ({triple[x]}, {triple[y]}) involves a constant potential")
    if held > held_out_tol:
        raise ExtractionError(f"held-out residual {held:.3g} above tolerance",
                              {"held_out_residual": held, "fit_residual": fit_res, "rank": m})
    basis = [f"phi[{triple[PAIR_ROLES[labels[c][0]][0]]},{triple[PAIR_ROLES[labels[c][0]][1]]}; {cfg.field_names[labels[c][1] - 1]}]"
             for c in chosen]
    return HydroSystem(basis, mats["a"], mats["b"], mats["c"], triple, cfg.field_names, 1, fit_res, held, notes,
                       [labels[c] for c in chosen])


def hydro_consistency_g1(system: HydroSystem, cfg: Genus1Config, seed: int = 0, samples: int = 20,
                         p=None, q=None) -> ConsistencyResult:
    rng = np.random.default_rng(seed)
    L = cfg.n + 1
    if p is None:
        p = rng.normal(size=L) + 1j * rng.normal(size=L)
    if q is None:
        q = rng.normal(size=L) + 1j * rng.normal(size=L)
    zs = _generic_z(cfg, samples, rng)
    fs = [f_coefficients_g1(name, cfg, _anchor_z(cfg, name, zs)) for name in system.triple]
    cross = {}
    for x, y in ((0, 1), (1, 2), (2, 0)):
        cross[(x, y)] = np.array([phi_from_f(fs[x], fs[y], zs, l, cfg) for l in range(1, L + 1)]).T
    return consistency_residual(system, cross, np.asarray(p, complex), np.asarray(q, complex))
