"""Small numerical kernel: rank probes, polynomial fits, finite differences, sampling."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidInputError


@dataclass(frozen=True)
class ToleranceConfig:
    quad_tol: float = 1e-12
    fd_step: float = 1e-5
    rank_rel_tol: float = 1e-7
    residual_tol: float = 1e-8

    def __post_init__(self):
        for name in ("quad_tol", "fd_step", "rank_rel_tol", "residual_tol"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise InvalidInputError(f"tolerance {name} must be strictly positive, got {value!r}")
        if self.fd_step**2 < self.quad_tol:
            raise InvalidInputError(
                f"fd_step**2 = {self.fd_step**2:.3g} is below quad_tol = {self.quad_tol:.3g}; "
                "finite differences cannot resolve below quadrature noise"
            )

    def replace(self, **overrides) -> "ToleranceConfig":
        values = {k: getattr(self, k) for k in ("quad_tol", "fd_step", "rank_rel_tol", "residual_tol")}
        unknown = set(overrides) - set(values)
        if unknown:
            raise InvalidInputError(f"unknown tolerance field(s): {sorted(unknown)}")
        values.update(overrides)
        return ToleranceConfig(**values)


@dataclass
class SampleSet:
    points: np.ndarray
    exclusion_radius: float
    singular_points: np.ndarray = field(default_factory=lambda: np.zeros(0, complex))

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=complex).ravel()
        self.singular_points = np.asarray(self.singular_points, dtype=complex).ravel()
        if self.singular_points.size and self.points.size:
            dist = np.abs(self.points[:, None] - self.singular_points[None, :]).min()
            if dist < self.exclusion_radius:
                raise InvalidInputError(
                    f"sample point within {dist:.3g} of a singular point (exclusion {self.exclusion_radius})"
                )
        if self.points.size > 1:
            gaps = np.abs(self.points[:, None] - self.points[None, :])
            gaps[np.diag_indices_from(gaps)] = np.inf
            if gaps.min() == 0:
                raise InvalidInputError("sample points must be pairwise distinct")

    def __len__(self):
        return self.points.size

    def __iter__(self):
        return iter(self.points)


def _check_finite(matrix):
    if not np.all(np.isfinite(matrix)):
        raise InvalidInputError("matrix has non-finite entries")


def singular_values(matrix) -> np.ndarray:
    matrix = np.asarray(matrix, dtype=complex)
    if matrix.ndim != 2:
        raise InvalidInputError("expected a 2-d matrix")
    _check_finite(matrix)
    return np.linalg.svd(matrix, compute_uv=False)


def numerical_rank(matrix, rank_rel_tol: float = 1e-7) -> int:
    """Number of singular values above ``rank_rel_tol * sigma_max``.

    Rows are samples and columns are functions, so the matrix is expected to
    be tall (M >= K). The zero matrix has rank 0.
    """
    matrix = np.asarray(matrix, dtype=complex)
    if matrix.ndim != 2 or matrix.shape[1] < 1 or matrix.shape[0] < matrix.shape[1]:
        raise InvalidInputError(f"numerical_rank expects an M x K matrix with M >= K >= 1, got {matrix.shape}")
    sv = singular_values(matrix)
    if sv[0] == 0:
        return 0
    return int(np.count_nonzero(sv > rank_rel_tol * sv[0]))


def rank_gap(matrix, rank: int) -> float:
    """Ratio sigma_rank / sigma_{rank+1} (inf when nothing sits below the cut)."""
    sv = singular_values(matrix)
    if rank <= 0 or rank >= sv.size:
        return np.inf
    if sv[rank] == 0:
        return np.inf
    return float(sv[rank - 1] / sv[rank])


def normalize_columns(matrix) -> np.ndarray:
    matrix = np.asarray(matrix, dtype=complex)
    norms = np.linalg.norm(matrix, axis=0)
    norms[norms == 0] = 1.0
    return matrix / norms


def normalize_rows(matrix) -> np.ndarray:
    matrix = np.asarray(matrix, dtype=complex)
    norms = np.linalg.norm(matrix, axis=1)
    norms[norms == 0] = 1.0
    return matrix / norms[:, None]


def fit_polynomial(points, values, max_degree: int):
    """Least-squares polynomial fit of degree <= ``max_degree``.

    Returns ``(coefficients, residual)`` with coefficients in ascending order
    and residual the max absolute misfit over every supplied point.
    """
    points = np.asarray(points, dtype=complex).ravel()
    values = np.asarray(values, dtype=complex).ravel()
    if points.size != values.size:
        raise InvalidInputError("points and values differ in length")
    if max_degree < 0:
        raise InvalidInputError("max_degree must be non-negative")
    if points.size < max_degree + 3:
        raise InvalidInputError(f"need at least {max_degree + 3} points for degree {max_degree}")
    if np.unique(points).size != points.size:
        raise InvalidInputError("fit_polynomial requires pairwise distinct points")
    if not (np.all(np.isfinite(points)) and np.all(np.isfinite(values))):
        raise InvalidInputError("non-finite input to fit_polynomial")
    # scale the abscissa so the Vandermonde matrix stays well conditioned
    scale = max(1.0, float(np.abs(points).max()))
    vander = np.vander(points / scale, max_degree + 1, increasing=True)
    coef, *_ = np.linalg.lstsq(vander, values, rcond=None)
    residual = float(np.abs(vander @ coef - values).max())
    coef = coef / scale ** np.arange(max_degree + 1)
    return coef, residual


def polyval_ascending(coefficients, z):
    return np.polynomial.polynomial.polyval(z, np.asarray(coefficients))


def finite_diff(fn: Callable, point, step: float = 1e-5, accuracy: int = 2):
    """Central difference along the real direction with h = step * max(1, |point|).

    ``accuracy=2`` is the plain two-point stencil; ``accuracy=4`` uses the
    five-point stencil.
    """
    h = step * max(1.0, abs(point))
    if accuracy == 2:
        return (fn(point + h) - fn(point - h)) / (2 * h)
    if accuracy == 4:
        return (-fn(point + 2 * h) + 8 * fn(point + h) - 8 * fn(point - h) + fn(point - 2 * h)) / (12 * h)
    raise InvalidInputError("accuracy must be 2 or 4")


def sample_annulus(
    rng: np.random.Generator,
    count: int,
    center: complex,
    r_min: float,
    r_max: float,
    singular_points: Sequence[complex] = (),
    exclusion_radius: float = 0.1,
    accept: Callable[[complex], bool] | None = None,
    max_tries: int = 200_000,
) -> SampleSet:
    """Uniform rejection sampling from the annulus r_min <= |z - center| <= r_max."""
    singular = np.asarray(singular_points, dtype=complex).ravel()
    points = []
    tries = 0
    while len(points) < count:
        tries += 1
        if tries > max_tries:
            raise InvalidInputError(f"could only place {len(points)} of {count} admissible samples")
        radius = np.sqrt(rng.uniform(r_min**2, r_max**2))
        angle = rng.uniform(0.0, 2 * np.pi)
        z = complex(center + radius * np.exp(1j * angle))
        if singular.size and np.abs(singular - z).min() < exclusion_radius:
            continue
        if any(abs(z - p) < 1e-9 for p in points):
            continue
        if accept is not None and not accept(z):
            continue
        points.append(z)
    return SampleSet(np.array(points), exclusion_radius, singular)


def default_sample_count(expected_rank: int) -> int:
    return 3 * expected_rank + 5


def relative_residual(value, *terms) -> float:
    """|value| scaled by the largest term magnitude (or 1 when all terms vanish)."""
    scale = max([1e-300] + [float(np.max(np.abs(t))) for t in terms])
    return float(np.max(np.abs(value)) / scale)
