"""Genus-zero potentials

    P_gamma(z; u) = Pi(z) * int_gamma dt / ((z - t) Pi(t)),
    Pi(t) = (t - u_1)^{s_1} ... (t - u_n)^{s_n} t^{s_{n+1}} (t - 1)^{s_{n+2}},

their closed-form derivatives, the cross-difference functions and the
hydrodynamic-type system they define.

Branch conventions: the integrand's 1/Pi(t) uses the principal branch at the
start of the contour.  The numerator Pi(z) is principal at a reference point
z_ref (default: centroid of the punctures + 2) and continued along the straight
segment from z_ref to z.  Contours anchored at z (the small circle) start on
the numerator branch, which makes that potential exactly -2 pi i.

With p = (u_1, ..., u_n, 0, 1) and

    f_k = -s_k int_gamma dt / ((t - p_k) Pi(t))

one has  dP/dz = Pi(z) sum_k f_k / (z - p_k),   dP/du_i = -Pi(z) f_i / (z - u_i).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

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
from .errors import (
    DegenerateConfigurationError,
    ExtractionError,
    GeometryError,
    InvalidInputError,
)
from .hydro import ConsistencyResult, HydroSystem, SpanProbe, consistency_residual
from .numerics import (
    SampleSet,
    ToleranceConfig,
    default_sample_count,
    fit_polynomial,
    numerical_rank,
    normalize_columns,
    polyval_ascending,
    sample_annulus,
    singular_values,
)

PATH_MARGIN = 0.05


@dataclass
class DeformationSpec:
    """Multiplicities d (for u_1..u_n, 0, 1, infinity) and coefficients v[i][j-1] = v_{i,j}."""

    d: tuple
    v: tuple = ()

    def __post_init__(self):
        self.d = tuple(int(x) for x in self.d)
        if any(x < 1 for x in self.d):
            raise InvalidInputError("multiplicities must be positive integers")
        if not self.v:
            self.v = tuple(() for _ in self.d)
        self.v = tuple(tuple(complex(c) for c in row) for row in self.v)
        if len(self.v) != len(self.d):
            raise InvalidInputError("one coefficient row per multiplicity required")
        for di, row in zip(self.d, self.v):
            if len(row) != di - 1:
                raise InvalidInputError(f"multiplicity {di} needs {di - 1} coefficients, got {len(row)}")

    @property
    def trivial(self) -> bool:
        return all(x == 1 for x in self.d)

    @property
    def field_count(self) -> int:
        """Number of free variables actually listed: the u_i plus every v_{i,j}."""
        return (len(self.d) - 3) + sum(x - 1 for x in self.d)

    def exponent(self, points):
        """Omega(t) for the finite points (u_1..u_n, 0, 1), plus the polynomial part at infinity."""
        points = [complex(p) for p in points]
        if len(points) + 1 != len(self.d):
            raise InvalidInputError("deformation size does not match the number of punctures")
        rows = self.v

        def omega(t):
            t = np.asarray(t, complex)
            out = np.zeros(t.shape, complex)
            for p, row in zip(points, rows[:-1]):
                for j, c in enumerate(row, start=1):
                    out = out + c * (t - p) ** (-j)
            for j, c in enumerate(rows[-1], start=1):
                out = out + c * t**j
            return out

        return None if self.trivial else omega

    def with_coefficient(self, i: int, j: int, value) -> "DeformationSpec":
        rows = [list(r) for r in self.v]
        rows[i][j] = complex(value)
        return DeformationSpec(self.d, tuple(tuple(r) for r in rows))


@dataclass
class Genus0Config:
    u: tuple
    s: tuple
    contours: dict = field(default_factory=dict)
    tolerances: ToleranceConfig = field(default_factory=ToleranceConfig)
    z_ref: complex | None = None

    def __post_init__(self):
        self.u = tuple(complex(x) for x in self.u)
        self.s = tuple(float(x) for x in self.s)
        n = len(self.u)
        if n < 1:
            raise InvalidInputError("need at least one puncture u_1")
        if len(self.s) != n + 2:
            raise InvalidInputError(f"expected n + 2 = {n + 2} exponents, got {len(self.s)}")
        pts = self.points
        for i, j in itertools.combinations(range(n + 2), 2):
            if abs(pts[i] - pts[j]) < 1e-9:
                raise InvalidInputError(f"punctures must be pairwise distinct and differ from 0 and 1 ({pts[i]})")
        self.contours = dict(self.contours)
        if self.z_ref is not None:
            self.z_ref = complex(self.z_ref)

    @property
    def n(self) -> int:
        return len(self.u)

    @property
    def points(self) -> np.ndarray:
        return np.array(list(self.u) + [0.0, 1.0], dtype=complex)

    @property
    def exponents(self) -> np.ndarray:
        return np.array(self.s, dtype=float)

    @property
    def centroid(self) -> complex:
        return complex(self.points.mean())

    @property
    def reference_point(self) -> complex:
        return self.z_ref if self.z_ref is not None else self.centroid + 2.0

    def names(self, z=None) -> dict:
        out = {f"u{i + 1}": u for i, u in enumerate(self.u)}
        if z is not None:
            out["z"] = complex(z)
        return out

    def with_u(self, i: int, value) -> "Genus0Config":
        u = list(self.u)
        u[i] = complex(value)
        return Genus0Config(tuple(u), self.s, self.contours, self.tolerances, self.z_ref)

    def point_names(self) -> list:
        return [f"u{i + 1}" for i in range(self.n)] + ["0", "1"]


@dataclass
class FCoefficients:
    f: np.ndarray
    err: float = 0.0

    @property
    def sum_residual(self) -> float:
        return float(abs(np.sum(self.f)))


# --------------------------------------------------------------------------- weights


def _omega(cfg: Genus0Config, deformation: DeformationSpec | None):
    if deformation is None or deformation.trivial:
        return None
    return deformation.exponent(cfg.points)


def numerator_weight(cfg: Genus0Config, deformation=None) -> BranchedWeight:
    return BranchedWeight.linear(cfg.points, cfg.exponents, _omega(cfg, deformation))


def integrand_weight(cfg: Genus0Config, deformation=None) -> BranchedWeight:
    om = _omega(cfg, deformation)
    neg = None if om is None else (lambda t, om=om: -om(t))
    return BranchedWeight.linear(cfg.points, -cfg.exponents, neg)


def numerator_logs(cfg: Genus0Config, z, deformation=None) -> np.ndarray:
    """Logs of (z - p_k) continued from the principal branch at z_ref."""
    return continue_logs(numerator_weight(cfg, deformation), cfg.reference_point, complex(z))


def weight_g0(t, cfg: Genus0Config, deformation: DeformationSpec | None = None, start=None):
    """Pi(t) (times exp(Omega(t)) when deformed), continued along a straight path.

    The path starts at ``start`` (default z_ref) where the principal branch is used.
    """
    t = complex(t)
    if np.min(np.abs(cfg.points - t)) < 1e-12:
        raise GeometryError(f"weight evaluated at a puncture {t}")
    w = numerator_weight(cfg, deformation)
    base = cfg.reference_point if start is None else complex(start)
    logs = continue_logs(w, base, t)
    return complex(w.from_logs(logs, t))


def _numerator_values(cfg, zs, deformation=None):
    w = numerator_weight(cfg, deformation)
    return np.array([complex(w.from_logs(numerator_logs(cfg, z, deformation), z)) for z in zs])


# --------------------------------------------------------------------------- contours


def _z_anchored(desc) -> bool:
    return "z" in descriptor_names(desc)


def resolve(cfg: Genus0Config, name: str, z=None) -> Contour:
    if name not in cfg.contours:
        raise InvalidInputError(f"unknown contour {name!r}")
    desc = cfg.contours[name]
    if _z_anchored(desc) and z is None:
        raise InvalidInputError(f"contour {name!r} is anchored at z; a z value is required")
    contour = resolve_contour(desc, cfg.names(z))
    _check_endpoints(cfg, contour, name)
    return contour


def _check_endpoints(cfg, contour, name):
    if contour.closed:
        return
    for end in (contour.start, contour.end):
        k = np.argmin(np.abs(cfg.points - end))
        if abs(cfg.points[k] - end) > 1e-12:
            continue
        s = cfg.s[k]
        if not s < 1:
            raise InvalidInputError(f"contour {name!r}: exponent {s} at endpoint {end} must be < 1 for convergence")
        if abs(s - round(s)) < 1e-12:
            raise InvalidInputError(f"contour {name!r}: integer exponent {s} at endpoint {end}")


def require_cycle(cfg: Genus0Config, name: str, deformation=None, z=None) -> Contour:
    """Resolve a contour and make sure it carries no boundary terms under differentiation."""
    contour = resolve(cfg, name, z if z is not None else (cfg.reference_point if _z_anchored(cfg.contours[name]) else None))
    weight = integrand_weight(cfg, deformation)
    if contour.closed:
        mu = monodromy_factor(weight, contour)
        if abs(mu - 1) > 1e-9:
            raise GeometryError(f"closed contour {name!r} has monodromy {mu:.6g}; not a twisted cycle")
        return contour
    for end in (contour.start, contour.end):
        if np.min(np.abs(cfg.points - end)) > 1e-12:
            raise GeometryError(f"open contour {name!r} must start and end at punctures (endpoint {end})")
        if deformation is not None and not deformation.trivial:
            k = int(np.argmin(np.abs(cfg.points - end)))
            if deformation.d[k] > 1:
                raise GeometryError(f"contour {name!r} ends at an essential singularity")
    return contour


def _start_logs_for(cfg, contour, desc, z, deformation):
    if not _z_anchored(desc):
        return None
    num = numerator_logs(cfg, z, deformation)
    return continue_logs(numerator_weight(cfg, deformation), complex(z), contour.start, num)


def _check_z(cfg, zs, contour=None):
    d = np.abs(np.asarray(zs)[:, None] - cfg.points[None, :]).min(axis=1)
    if d.min() < 1e-9:
        raise GeometryError("z coincides with a puncture")
    if contour is not None and contour.distance(zs).min() < 1e-6:
        raise GeometryError("z lies within 1e-6 of the contour")


# --------------------------------------------------------------------------- potentials


def potentials_g0(zs, contour_name: str, cfg: Genus0Config, deformation=None):
    """Vectorised potential; returns (values, err)."""
    zs = np.atleast_1d(np.asarray(zs, complex))
    desc = cfg.contours.get(contour_name)
    if desc is None:
        raise InvalidInputError(f"unknown contour {contour_name!r}")
    weight = integrand_weight(cfg, deformation)
    tol = cfg.tolerances.quad_tol
    num = _numerator_values(cfg, zs, deformation)
    if _z_anchored(desc):
        values = np.empty(zs.size, complex)
        err = 0.0
        for m, z in enumerate(zs):
            contour = resolve(cfg, contour_name, z)
            _check_z(cfg, np.array([z]), contour)
            start = _start_logs_for(cfg, contour, desc, z, deformation)
            val, e = integrate(lambda t, w: w / (z - t), contour, tol, weight, start_logs=start)
            values[m] = num[m] * val
            err = max(err, e * abs(num[m]))
        return values, err
    contour = resolve(cfg, contour_name)
    _check_z(cfg, zs, contour)
    val, e = integrate(lambda t, w: w[None, :] / (zs[:, None] - t[None, :]), contour, tol, weight)
    return num * val, float(e * np.abs(num).max())


def potential_g0(z, contour_name: str, cfg: Genus0Config, deformation=None):
    values, err = potentials_g0([z], contour_name, cfg, deformation)
    return complex(values[0]), err


def f_coefficients_g0(contour_name: str, cfg: Genus0Config, z=None) -> FCoefficients:
    contour = require_cycle(cfg, contour_name, z=z)
    desc = cfg.contours[contour_name]
    zz = z if z is not None else cfg.reference_point
    start = _start_logs_for(cfg, contour, desc, zz, None)
    p = cfg.points
    s = cfg.exponents
    weight = integrand_weight(cfg)
    if encloses_none(contour, p):
        # nothing singular inside: every f vanishes by Cauchy's theorem
        return FCoefficients(np.zeros(cfg.n + 2, complex))
    vals, err = integrate(lambda t, w: w[None, :] / (t[None, :] - p[:, None]), contour,
                          cfg.tolerances.quad_tol, weight, start_logs=start, finite_part=True)
    f = -s * vals
    out = FCoefficients(f, float(err * np.abs(s).max()))
    scale = max(1.0, float(np.abs(f).max()))
    if out.sum_residual > 1e3 * cfg.tolerances.residual_tol * scale:
        raise GeometryError(f"sum rule violated for {contour_name!r} (|sum f| = {out.sum_residual:.3g})")
    return out


def dP_from_f(fc: FCoefficients, zs, cfg: Genus0Config, numerator=None):
    zs = np.atleast_1d(np.asarray(zs, complex))
    num = _numerator_values(cfg, zs) if numerator is None else numerator
    ratio = fc.f[None, :] / (zs[:, None] - cfg.points[None, :])
    dz = num * ratio.sum(axis=1)
    du = -num[:, None] * ratio[:, : cfg.n]
    return dz, du


def dP_closed_g0(z, contour_name: str, cfg: Genus0Config):
    """(dP/dz, dP/du) from the f-coefficients; vectorised over z."""
    scalar = np.ndim(z) == 0
    zs = np.atleast_1d(np.asarray(z, complex))
    fc = f_coefficients_g0(contour_name, cfg, z=zs[0] if _z_anchored(cfg.contours[contour_name]) else None)
    dz, du = dP_from_f(fc, zs, cfg)
    if scalar:
        return complex(dz[0]), du[0]
    return dz, du


def common_factor_g0(zs, cfg: Genus0Config, numerator=None):
    """Pi(z)^2 / prod_k (z - p_k): the weight that every cross-difference function carries."""
    zs = np.atleast_1d(np.asarray(zs, complex))
    num = _numerator_values(cfg, zs) if numerator is None else numerator
    return num**2 / np.prod(zs[:, None] - cfg.points[None, :], axis=1)


def cross_from_f(fa, fb, zs, l: int, cfg: Genus0Config, numerator=None):
    """dP_a/dz dP_b/du_l - dP_b/dz dP_a/du_l, with l 1-based."""
    dza, dua = dP_from_f(fa, zs, cfg, numerator)
    dzb, dub = dP_from_f(fb, zs, cfg, numerator)
    return dza * dub[:, l - 1] - dzb * dua[:, l - 1]


def phi_g0(z, contour_a: str, contour_b: str, l: int, cfg: Genus0Config):
    """Cross-difference function divided by the common factor; a polynomial of degree <= n - 1."""
    if not 1 <= l <= cfg.n:
        raise InvalidInputError(f"l must lie in 1..{cfg.n}")
    scalar = np.ndim(z) == 0
    zs = np.atleast_1d(np.asarray(z, complex))
    _check_z(cfg, zs)
    fa = f_coefficients_g0(contour_a, cfg, z=_anchor_z(cfg, contour_a, zs))
    fb = fa if contour_b == contour_a else f_coefficients_g0(contour_b, cfg, z=_anchor_z(cfg, contour_b, zs))
    num = _numerator_values(cfg, zs)
    out = cross_from_f(fa, fb, zs, l, cfg, num) / common_factor_g0(zs, cfg, num)
    return complex(out[0]) if scalar else out


def _anchor_z(cfg, name, zs):
    return zs[0] if _z_anchored(cfg.contours[name]) else None


def phi_polynomial_from_f(fa, fb, l: int, cfg: Genus0Config) -> np.ndarray:
    """Exact ascending coefficients of phi from the f-coefficients (independent of sampling)."""
    p = cfg.points
    poly = np.zeros(cfg.n + 2, complex)
    for k in range(cfg.n + 2):
        if k == l - 1:
            continue
        others = [p[j] for j in range(cfg.n + 2) if j not in (k, l - 1)]
        term = np.polynomial.polynomial.polyfromroots(others) if others else np.array([1.0])
        poly[: term.size] += (fb.f[k] * fa.f[l - 1] - fa.f[k] * fb.f[l - 1]) * term
    return poly


# --------------------------------------------------------------------------- sampling and ranks


def sample_z_g0(cfg: Genus0Config, count: int, rng: np.random.Generator, contour_names=(), visible: bool = False,
                exclusion_radius: float = 0.1) -> SampleSet:
    """Annulus samples around the centroid, away from punctures and contours.

    With ``visible`` the straight path from z_ref must also keep clear of the
    punctures and contours, so the numerator branch and the integrals are
    continued within one simply connected region.
    """
    contours = [resolve(cfg, name) for name in contour_names if not _z_anchored(cfg.contours[name])]
    zref = cfg.reference_point

    def accept(z):
        for c in contours:
            if c.distance(np.array([z]))[0] < PATH_MARGIN:
                return False
        if visible:
            for p in cfg.points:
                d = abs(p - z) if abs(z - zref) == 0 else _point_seg(p, zref, z)
                if d < PATH_MARGIN:
                    return False
            for c in contours:
                if c.min_distance_to_path(zref, z) < PATH_MARGIN:
                    return False
        return True

    return sample_annulus(rng, count, cfg.centroid, 0.3, 1.5, cfg.points, exclusion_radius, accept)


def _point_seg(p, a, b):
    d = b - a
    s = min(1.0, max(0.0, ((p - a) * np.conj(d)).real / abs(d) ** 2))
    return abs(p - (a + s * d))


def _probe(matrix, expected, tol) -> SpanProbe:
    matrix = normalize_columns(matrix)
    sv = singular_values(matrix)
    if sv[0] == 0:
        return SpanProbe(0, sv, expected, matrix.shape[0])
    if sv[0] < 1e-12:
        raise DegenerateConfigurationError(f"rank probe ill-conditioned: sigma_max = {sv[0]:.3g}")
    return SpanProbe(numerical_rank(matrix, tol), sv, expected, matrix.shape[0])


def span_probe_g0(cfg: Genus0Config, contour_names, mode: str = "cross", seed: int = 0,
                  sample_count: int | None = None) -> SpanProbe:
    rng = np.random.default_rng(seed)
    names = list(contour_names)
    if mode == "cross":
        if len(names) < 3:
            raise InvalidInputError("cross mode needs at least three contours")
        triple = names[:3]
        expected = cfg.n
        # every cross function is the common factor times a polynomial of degree < n + 2,
        # so over-determine against that ambient dimension rather than the expected rank
        count = sample_count or default_sample_count(max(expected, 3 * cfg.n))
        zs = sample_z_g0(cfg, count, rng, triple).points
        fs = {name: f_coefficients_g0(name, cfg, z=_anchor_z(cfg, name, zs)) for name in set(triple)}
        num = _numerator_values(cfg, zs)
        cols = []
        for a, b in itertools.combinations(triple, 2):
            for l in range(1, cfg.n + 1):
                cols.append(cross_from_f(fs[a], fs[b], zs, l, cfg, num))
        return _probe(np.array(cols).T, expected, cfg.tolerances.rank_rel_tol)
    if mode == "potentials":
        expected = cfg.n + 2
        count = sample_count or default_sample_count(max(expected, len(names) + 1))
        zs = sample_z_g0(cfg, count, rng, names, visible=True).points
        cols = [potentials_g0(zs, name, cfg)[0] for name in names]
        cols.append(np.ones(zs.size, complex))
        return _probe(np.array(cols).T, expected, cfg.tolerances.rank_rel_tol)
    raise InvalidInputError(f"unknown span mode {mode!r}")


def span_dimension_g0(cfg: Genus0Config, contour_names, mode: str = "cross", seed: int = 0) -> int:
    return span_probe_g0(cfg, contour_names, mode, seed).rank


# --------------------------------------------------------------------------- hydrodynamic extraction

PAIR_ROLES = {"a": (1, 2), "b": (2, 0), "c": (0, 1)}


def extract_hydro_g0(cfg: Genus0Config, triple, seed: int = 0, held_out: int = 20) -> HydroSystem:
    """Expand the cross-difference functions in the basis z^(r-1) * Pi(z)^2 / prod (z - p_k)."""
    triple = tuple(triple)
    if len(triple) != 3 or len(set(triple)) != 3:
        raise InvalidInputError("extraction needs three distinct contours")
    rng = np.random.default_rng(seed)
    n = cfg.n
    fit_z = sample_z_g0(cfg, default_sample_count(n), rng, triple).points
    test_z = sample_z_g0(cfg, held_out, rng, triple).points
    fs = [f_coefficients_g0(name, cfg, z=_anchor_z(cfg, name, fit_z)) for name in triple]
    mats = {}
    fit_res = 0.0
    held = 0.0
    notes = []
    num_fit = _numerator_values(cfg, fit_z)
    num_test = _numerator_values(cfg, test_z)
    cf_fit = common_factor_g0(fit_z, cfg, num_fit)
    cf_test = common_factor_g0(test_z, cfg, num_test)
    for role, (x, y) in PAIR_ROLES.items():
        mat = np.zeros((n, n), complex)
        for l in range(1, n + 1):
            phi = cross_from_f(fs[x], fs[y], fit_z, l, cfg, num_fit) / cf_fit
            coef, res = fit_polynomial(fit_z, phi, n - 1)
            scale = max(1.0, float(np.abs(phi).max()))
            fit_res = max(fit_res, res / scale)
            phi_test = cross_from_f(fs[x], fs[y], test_z, l, cfg, num_test) / cf_test
            held = max(held, float(np.abs(polyval_ascending(coef, test_z) - phi_test).max()) / scale)
            mat[:, l - 1] = coef
        if np.abs(mat).max() == 0:
            notes.append(f"{role} vanishes: pair ({triple[x]}, {triple[y]}) involves a constant potential")
        mats[role] = mat
    if held > cfg.tolerances.residual_tol:
        raise ExtractionError(f"held-out residual {held:.3g} above tolerance",
                              {"held_out_residual": held, "fit_residual": fit_res})
    basis = [f"z^{r} * Pi(z)^2 / prod_k (z - p_k)" for r in range(n)]
    return HydroSystem(basis, mats["a"], mats["b"], mats["c"], triple,
                       [f"u{i + 1}" for i in range(n)], 0, fit_res, held, notes)


def hydro_consistency_g0(system: HydroSystem, cfg: Genus0Config, seed: int = 0, samples: int = 20,
                         p=None, q=None) -> ConsistencyResult:
    rng = np.random.default_rng(seed)
    n = cfg.n
    if p is None:
        p = rng.normal(size=n) + 1j * rng.normal(size=n)
    if q is None:
        q = rng.normal(size=n) + 1j * rng.normal(size=n)
    zs = sample_z_g0(cfg, samples, rng, system.triple).points
    fs = [f_coefficients_g0(name, cfg, z=_anchor_z(cfg, name, zs)) for name in system.triple]
    num = _numerator_values(cfg, zs)
    cross = {}
    for x, y in ((0, 1), (1, 2), (2, 0)):
        cross[(x, y)] = np.array([cross_from_f(fs[x], fs[y], zs, l, cfg, num) for l in range(1, n + 1)]).T
    return consistency_residual(system, cross, np.asarray(p, complex), np.asarray(q, complex))


# --------------------------------------------------------------------------- oracles


def hyp2f1_oracle(a, b, c, x, rel_tail: float = 1e-12, max_terms: int = 100_000) -> complex:
    """Gauss series sum_k (a)_k (b)_k / ((c)_k k!) x^k."""
    x = complex(x)
    if abs(x) >= 1:
        raise InvalidInputError("hyp2f1_oracle needs |x| < 1")
    if isinstance(c, (int, float)) and c <= 0 and float(c).is_integer():
        raise InvalidInputError("c must not be a non-positive integer")
    term = 1.0 + 0j
    total = term
    for k in range(max_terms):
        term = term * (a + k) * (b + k) / ((c + k) * (k + 1)) * x
        total += term
        if term == 0:
            return total
        # geometric tail bound once the ratio has settled below 1
        ratio = abs((a + k + 1) * (b + k + 1) / ((c + k + 1) * (k + 2)) * x)
        if ratio < 1 and abs(term) * ratio / (1 - ratio) <= rel_tail * abs(total):
            return total
    raise InvalidInputError("hyp2f1_oracle did not converge")


def appell_f1_oracle(alpha, beta1, beta2, gamma, x, y, rel_tail: float = 1e-13) -> complex:
    """F1(alpha; beta1, beta2; gamma; x, y) = sum_m (alpha)_m (beta1)_m / ((gamma)_m m!) x^m 2F1(alpha+m, beta2; gamma+m; y)."""
    if abs(x) >= 1 or abs(y) >= 1:
        raise InvalidInputError("appell_f1_oracle needs |x|, |y| < 1")
    coeff = 1.0 + 0j
    total = 0j
    for m in range(10_000):
        term = coeff * hyp2f1_oracle(alpha + m, beta2, gamma + m, y)
        total += term
        if m > 2 and abs(term) <= rel_tail * abs(total):
            return total
        coeff = coeff * (alpha + m) * (beta1 + m) / ((gamma + m) * (m + 1)) * x
    raise InvalidInputError("appell_f1_oracle did not converge")


def segment01_integral_oracle(z, u, s) -> complex:
    """int_0^1 dt / ((z - t) (t - u)^s1 t^s2 (t - 1)^s3), principal branches at t = 0, for |z|, |u| > 1."""
    s1, s2, s3 = s
    z, u = complex(z), complex(u)
    beta = math.gamma(1 - s2) * math.gamma(1 - s3) / math.gamma(2 - s2 - s3)
    pref = np.exp(-1j * np.pi * s3) * np.exp(-s1 * np.log(-u)) / z
    return complex(pref * beta * appell_f1_oracle(1 - s2, s1, 1.0, 2 - s2 - s3, 1 / u, 1 / z))


# --------------------------------------------------------------------------- deformed case (measured only)


def deformed_cross_rank(cfg: Genus0Config, deformation: DeformationSpec, contour_names, seed: int = 0,
                        sample_count: int | None = None) -> dict:
    """Finite-difference cross rank over the fields (u_i, v_ij); reported, never asserted."""
    names = list(contour_names)
    for name in names:
        contour = resolve(cfg, name, cfg.reference_point if _z_anchored(cfg.contours[name]) else None)
        if not contour.closed:
            raise GeometryError("deformed potentials are only evaluated on closed contours")
    rng = np.random.default_rng(seed)
    fields = [("u", i, None) for i in range(cfg.n)]
    for i, row in enumerate(deformation.v):
        fields += [("v", i, j) for j in range(len(row))]
    count = sample_count or default_sample_count(len(fields) * 3)
    zs = sample_z_g0(cfg, count, rng, names).points
    h = cfg.tolerances.fd_step

    def pot(c, d, name, z_shift=0.0):
        return potentials_g0(zs + z_shift, name, c, d)[0]

    derivs = {}
    for name in names:
        hz = h * max(1.0, float(np.abs(zs).max()))
        dz = (pot(cfg, deformation, name, hz) - pot(cfg, deformation, name, -hz)) / (2 * hz)
        dfield = []
        for kind, i, j in fields:
            if kind == "u":
                step = h * max(1.0, abs(cfg.u[i]))
                plus = pot(cfg.with_u(i, cfg.u[i] + step), deformation, name)
                minus = pot(cfg.with_u(i, cfg.u[i] - step), deformation, name)
            else:
                v0 = deformation.v[i][j]
                step = h * max(1.0, abs(v0))
                plus = pot(cfg, deformation.with_coefficient(i, j, v0 + step), name)
                minus = pot(cfg, deformation.with_coefficient(i, j, v0 - step), name)
            dfield.append((plus - minus) / (2 * step))
        derivs[name] = (dz, dfield)
    cols = []
    for a, b in itertools.combinations(names[:3], 2):
        for l in range(len(fields)):
            cols.append(derivs[a][0] * derivs[b][1][l] - derivs[b][0] * derivs[a][1][l])
    raw = np.array(cols).T
    norms = np.linalg.norm(raw, axis=0)
    # columns at finite-difference noise level (constant potentials) would be blown up by normalisation
    keep = norms > 1e-6 * norms.max() if norms.max() > 0 else norms > 0
    if not keep.any():
        return {"rank": 0, "singular_values": [], "field_count_listed": deformation.field_count,
                "field_count_stated": sum(deformation.d), "fields_used": len(fields), "columns_dropped": int(norms.size)}
    matrix = normalize_columns(raw[:, keep])
    sv = singular_values(matrix)
    # finite differences limit the floor to ~fd_step^2, so a looser cut is used
    rank = int(np.count_nonzero(sv > 1e-5 * sv[0])) if sv[0] > 0 else 0
    return {
        "rank": rank,
        "singular_values": sv.tolist(),
        "field_count_listed": deformation.field_count,
        "field_count_stated": sum(deformation.d),
        "fields_used": len(fields),
        "columns_dropped": int(np.count_nonzero(~keep)),
    }
