"""Synthetic data: finite elements, analytic transmission, point sources and noise."""

from .fem import (
    DEFAULT_H,
    FemSystem,
    Mesh,
    MeshError,
    SolverError,
    background_field,
    boundary_values,
    fem_solve,
    mesh_disk,
    scattered_trace,
    scattered_traces,
)
from .medium import ConfigError, Inclusion, Influx, MediumConfig, influx_from_dict, medium_from_dict
from .sources import PointSourceConfig, add_noise, noise_factors, point_source_coeffs, point_source_trace
from .transmission import (
    analytic_transmission,
    bounded_scattered_coefficient,
    decoupling_ratio,
    incident_influx_coefficient,
    small_inclusion_gradient_ratio,
)

__all__ = [
    "DEFAULT_H",
    "FemSystem",
    "Mesh",
    "MeshError",
    "SolverError",
    "background_field",
    "boundary_values",
    "fem_solve",
    "mesh_disk",
    "scattered_trace",
    "scattered_traces",
    "ConfigError",
    "Inclusion",
    "Influx",
    "MediumConfig",
    "influx_from_dict",
    "medium_from_dict",
    "PointSourceConfig",
    "add_noise",
    "noise_factors",
    "point_source_coeffs",
    "point_source_trace",
    "analytic_transmission",
    "bounded_scattered_coefficient",
    "decoupling_ratio",
    "incident_influx_coefficient",
    "small_inclusion_gradient_ratio",
]
