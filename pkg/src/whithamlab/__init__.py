"""Numerical verification of hypergeometric-type Whitham hierarchy potentials."""

from .errors import (
    ConfigError,
    ConvergenceError,
    DegenerateConfigurationError,
    ExtractionError,
    GeometryError,
    InvalidInputError,
    WhithamLabError,
)
from .genus0 import DeformationSpec, Genus0Config, extract_hydro_g0, hydro_consistency_g0, potential_g0
from .genus1 import Genus1Config, extract_hydro_g1, hydro_consistency_g1, potential_g1
from .hydro import HydroSystem
from .numerics import ToleranceConfig
from .tauflow import AbstractConfig, GeometryData, MiwaShift, TauFunction, schur_tau

__all__ = [
    "AbstractConfig",
    "ConfigError",
    "ConvergenceError",
    "DeformationSpec",
    "DegenerateConfigurationError",
    "ExtractionError",
    "GeometryData",
    "Genus0Config",
    "Genus1Config",
    "GeometryError",
    "HydroSystem",
    "InvalidInputError",
    "MiwaShift",
    "TauFunction",
    "ToleranceConfig",
    "WhithamLabError",
    "extract_hydro_g0",
    "extract_hydro_g1",
    "hydro_consistency_g0",
    "hydro_consistency_g1",
    "potential_g0",
    "potential_g1",
    "schur_tau",
]
