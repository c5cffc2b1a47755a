"""Containers for hydrodynamic-type systems extracted from cross-difference functions."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .numerics import relative_residual


@dataclass
class HydroSystem:
    """Coefficients of  sum_l a_rl du_l/dt_i + b_rl du_l/dt_j + c_rl du_l/dt_k = 0."""

    basis: list
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    triple: tuple
    fields: list
    genus: int
    fit_residual: float
    held_out_residual: float
    notes: list = field(default_factory=list)
    basis_columns: list = field(default_factory=list)

    @property
    def m(self) -> int:
        return self.a.shape[0]

    def with_coefficients(self, a=None, b=None, c=None) -> "HydroSystem":
        return HydroSystem(self.basis, self.a if a is None else a, self.b if b is None else b,
                           self.c if c is None else c, self.triple, self.fields, self.genus,
                           self.fit_residual, self.held_out_residual, list(self.notes), self.basis_columns)


@dataclass
class SpanProbe:
    rank: int
    singular_values: np.ndarray
    expected: int
    sample_count: int

    @property
    def gap(self) -> float:
        sv = self.singular_values
        if self.rank <= 0 or self.rank >= sv.size or sv[self.rank] == 0:
            return np.inf
        return float(sv[self.rank - 1] / sv[self.rank])


@dataclass
class ConsistencyResult:
    residual: float
    singular: bool
    condition: float
    x: np.ndarray | None = None


def consistency_residual(system: HydroSystem, cross_fns, p, q, singular_cond: float = 1e12) -> ConsistencyResult:
    """Solve a x = -(b p + c q) and evaluate the compatibility left-hand side on samples.

    ``cross_fns[(x, y)]`` is an array (samples, fields) of cross-difference values for the
    ordered contour pair (x, y) of the triple (0 = i, 1 = j, 2 = k).
    """
    a, b, c = system.a, system.b, system.c
    rhs = -(b @ p + c @ q)
    cond = float(np.linalg.cond(a)) if a.size else np.inf
    if not np.isfinite(cond) or cond > singular_cond:
        return ConsistencyResult(float("nan"), True, cond)
    x = np.linalg.lstsq(a, rhs, rcond=None)[0] if a.shape[0] != a.shape[1] else np.linalg.solve(a, rhs)
    t_ij = cross_fns[(0, 1)] @ q
    t_jk = cross_fns[(1, 2)] @ x
    t_ki = cross_fns[(2, 0)] @ p
    lhs = t_ij + t_jk + t_ki
    return ConsistencyResult(relative_residual(lhs, t_ij, t_jk, t_ki), False, cond, x)
