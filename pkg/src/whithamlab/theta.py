"""Odd Jacobi theta function with the normalisation

    theta(z, tau) = exp(-pi i z) * sum_l (-1)^l exp(2 pi i (l z + l (l - 1) tau / 2)),

its z- and tau-derivatives, its identities and the genus-one prime form.

Writing m = l - 1/2 the series becomes
exp(-pi i tau / 4) * sum_m (-1)^(m + 1/2) exp(pi i m^2 tau + 2 pi i m z), which is
what is summed below after reducing z into the fundamental cell.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

DEFAULT_TOL = 1e-14


@dataclass(frozen=True)
class LatticeParam:
    tau: complex

    def __post_init__(self):
        tau = complex(self.tau)
        if not tau.imag > 0:
            raise InvalidInputError(f"Im(tau) must be positive, got tau = {tau}")
        object.__setattr__(self, "tau", tau)


def _as_tau(tau) -> complex:
    if isinstance(tau, LatticeParam):
        return tau.tau
    tau = complex(tau)
    if not tau.imag > 0:
        raise InvalidInputError(f"Im(tau) must be positive, got tau = {tau}")
    return tau


def _truncation(tau: complex, tol: float, max_order: int) -> int:
    # after reduction |Im z| <= Im(tau)/2, so the term bound only depends on tau
    im = tau.imag
    L = 1
    while True:
        m = L + 0.5
        bound = np.exp(-np.pi * im * m * m + np.pi * im * m) * (2 * np.pi * m) ** max_order
        if bound < tol * 1e-2 or L > 400:
            return L
        L += 1


def reduce_to_cell(z, tau):
    """Split z = z0 + m + n tau with |Re z0| <= 1/2 and |Im z0| <= Im(tau)/2 (roughly)."""
    tau = _as_tau(tau)
    z = np.asarray(z, dtype=complex)
    n = np.round(z.imag / tau.imag)
    z1 = z - n * tau
    m = np.round(z1.real)
    return z1 - m, m, n


def _series(z0, tau, orders, tol, tau_derivative=False):
    L = _truncation(tau, tol, max(orders) + 2)
    l = np.arange(-L + 1, L + 1)
    m = l - 0.5
    sign = np.where(l % 2 == 0, 1.0, -1.0)
    phase = np.exp(1j * np.pi * m * m * tau)
    pref = np.exp(-1j * np.pi * tau / 4)
    ez = np.exp(2j * np.pi * np.multiply.outer(z0, m))
    base = ez * (sign * phase)
    out = []
    for d in orders:
        coeff = (2j * np.pi * m) ** d
        if tau_derivative:
            coeff = coeff * (1j * np.pi * m * m - 1j * np.pi / 4)
        out.append(pref * (base * coeff).sum(axis=-1))
    return out


def theta_all(z, tau, tol: float = DEFAULT_TOL):
    """Return (theta, theta', theta'') at z, vectorised over z."""
    tau = _as_tau(tau)
    z = np.asarray(z, dtype=complex)
    z0, m, n = reduce_to_cell(z, tau)
    t0, t1, t2 = _series(z0, tau, (0, 1, 2), tol)
    # quasi-periodicity: theta(z0 + m + n tau) = (-1)^(m+n) exp(-2 pi i n z0 - pi i n^2 tau) theta(z0)
    factor = np.where((m + n) % 2 == 0, 1.0, -1.0) * np.exp(-2j * np.pi * n * z0 - 1j * np.pi * n * n * tau)
    k = -2j * np.pi * n
    th = factor * t0
    d1 = factor * (t1 + k * t0)
    d2 = factor * (t2 + 2 * k * t1 + k * k * t0)
    return th, d1, d2


def theta(z, tau, tol: float = DEFAULT_TOL):
    return theta_all(z, tau, tol)[0]


def theta_dz(z, tau, order: int = 1, tol: float = DEFAULT_TOL):
    if order not in (1, 2):
        raise InvalidInputError("theta_dz supports order 1 or 2")
    return theta_all(z, tau, tol)[order]


def theta_dtau(z, tau, tol: float = DEFAULT_TOL):
    """d theta / d tau through the heat equation -(i/4pi) theta'' - (pi i/4) theta."""
    th, _, d2 = theta_all(z, tau, tol)
    return -1j / (4 * np.pi) * d2 - 1j * np.pi / 4 * th


def theta_dtau_series(z, tau, tol: float = DEFAULT_TOL):
    """d theta / d tau by termwise differentiation of the unreduced series.

    Independent of the heat equation; meant as an oracle for moderate |Im z|.
    """
    tau = _as_tau(tau)
    z = np.asarray(z, dtype=complex)
    L = _truncation(tau, tol, 4) + int(np.ceil(np.abs(z.imag).max(initial=0.0) / tau.imag)) + 2
    l = np.arange(-L + 1, L + 1)
    m = l - 0.5
    sign = np.where(l % 2 == 0, 1.0, -1.0)
    terms = sign * np.exp(1j * np.pi * m * m * tau + 2j * np.pi * np.multiply.outer(z, m))
    terms = terms * (1j * np.pi * m * m - 1j * np.pi / 4)
    return np.exp(-1j * np.pi * tau / 4) * terms.sum(axis=-1)


def theta_bruteforce(z, tau, L: int = 64):
    """Plain symmetric partial sum of the defining series, no reduction, no tail bound."""
    tau = _as_tau(tau)
    z = np.asarray(z, dtype=complex)
    l = np.arange(-L, L + 1)
    sign = np.where(l % 2 == 0, 1.0, -1.0)
    expo = 2j * np.pi * (np.multiply.outer(z, l) + l * (l - 1) / 2 * tau)
    return np.exp(-1j * np.pi * z) * (sign * np.exp(expo)).sum(axis=-1)


def lattice_distance(z, tau) -> np.ndarray:
    """Distance from z to the nearest point of Z + tau Z."""
    tau = _as_tau(tau)
    z0, _, _ = reduce_to_cell(z, tau)
    best = np.full(np.shape(z0), np.inf)
    for a in (-1, 0, 1):
        for b in (-1, 0, 1):
            best = np.minimum(best, np.abs(z0 - a - b * tau))
    return best


def lattice_translates(points, tau, reach: int = 2) -> np.ndarray:
    tau = _as_tau(tau)
    points = np.atleast_1d(np.asarray(points, dtype=complex))
    shifts = np.array([a + b * tau for a in range(-reach, reach + 1) for b in range(-reach, reach + 1)])
    return (points[:, None] + shifts[None, :]).ravel()


def theta_prime_zero(tau, tol: float = DEFAULT_TOL) -> complex:
    return complex(theta_dz(0.0, tau, 1, tol))


def prime_form_g1(x, y, tau, tol: float = DEFAULT_TOL):
    """Genus-one prime form E(x, y) = theta(x - y) / theta'(0)."""
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    return theta(x - y, tau, tol) / theta_prime_zero(tau, tol)


def prime_form_g1_d1(x, y, tau, tol: float = DEFAULT_TOL):
    """Derivative of E(x, y) in its first slot."""
    return theta_dz(np.asarray(x, complex) - np.asarray(y, complex), tau, 1, tol) / theta_prime_zero(tau, tol)


def _rel(diff, *terms):
    scale = np.max(np.abs(np.stack(np.broadcast_arrays(*terms))), axis=0)
    return np.abs(diff) / np.maximum(scale, 1e-300)


def _identity_samples(tau, count, rng, margin=0.05, box=0.8):
    out = []
    while len(out) < count:
        z, t, u, eta = rng.uniform(-box, box, 4) + 1j * rng.uniform(-box, box, 4) * min(1.0, tau.imag)
        # theta(eta), theta(z-t+eta), theta(z-u), theta(t-u) appear in denominators
        args = np.array([eta, z - t + eta, z - u, t - u, z - t])
        if lattice_distance(args, tau).min() < margin:
            continue
        out.append((z, t, u, eta))
    return np.array(out)


def four_term_residual(z, t, u, eta, tau, tol: float = DEFAULT_TOL):
    """Relative residual of the theta four-term addition identity."""
    args = np.stack(np.broadcast_arrays(*(np.asarray(a, complex) for a in (z - t + eta, eta, t - u, z - u, z - t, z - u + eta, t - u - eta))))
    th, d1, _ = theta_all(args, tau, tol)
    log_d = d1 / th
    lhs_terms = (log_d[0], -log_d[1], log_d[2], -log_d[3])
    lhs = sum(lhs_terms)
    tp0 = theta_prime_zero(tau, tol)
    rhs = -tp0 * th[4] * th[5] * th[6] / (th[1] * th[0] * th[3] * th[2])
    return _rel(lhs - rhs, *lhs_terms, rhs)


def check_theta_identities(tau, sample_count: int = 100, seed: int = 0, tol: float = DEFAULT_TOL) -> dict:
    """Max relative residuals of the theta identities over random tuples (z, t, u, eta)."""
    tau = _as_tau(tau)
    rng = np.random.default_rng(seed)
    samples = _identity_samples(tau, sample_count, rng)
    z, t, u, eta = samples.T
    th = theta(z, tau, tol)
    shift1 = theta(z + 1, tau, tol)
    shift_tau = theta(z + tau, tau, tol)
    mult = -np.exp(-2j * np.pi * (z + tau / 2))
    odd = theta(-z, tau, tol)
    heat_lhs = theta_dtau_series(z, tau, tol)
    heat_rhs = theta_dtau(z, tau, tol)
    return {
        "odd": float(_rel(odd + th, odd, th).max()),
        "period_1": float(_rel(shift1 + th, shift1, th).max()),
        "period_tau": float(_rel(shift_tau - mult * th, shift_tau, mult * th).max()),
        "heat": float(_rel(heat_lhs - heat_rhs, heat_lhs, heat_rhs).max()),
        "four_term": float(four_term_residual(z, t, u, eta, tau, tol).max()),
        "samples": int(sample_count),
    }


def fay_residual_g1(u, v, w, t, z, tau, tol: float = DEFAULT_TOL):
    """Relative residual of the three-term Fay identity with E = theta(x-y)/theta'(0), q(z) = z."""
    E = lambda a, b: prime_form_g1(a, b, tau, tol)
    T = lambda a: theta(a, tau, tol)
    terms = (
        E(u, v) * E(w, t) * T(z + u + v) * T(z + w + t),
        E(v, w) * E(u, t) * T(z + v + w) * T(z + u + t),
        E(w, u) * E(v, t) * T(z + w + u) * T(z + v + t),
    )
    return _rel(sum(terms), *terms)
