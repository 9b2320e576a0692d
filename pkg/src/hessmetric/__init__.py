"""Exact metric geometry of radial piecewise-linear potentials.

Atomic Hessian-measure calculus, weighted energies, the rooftop-envelope
metric, weak geodesics, and a finite-difference grid oracle, together with a
small HTTP service and CLI front end.
"""

from .profiles import (
    ConvexityError,
    CoordinateError,
    DualProfile,
    HessianParams,
    RadialProfile,
    combine,
    legendre,
    legendre_inverse,
    make_profile,
    max_profiles,
    profile_from_dict,
    profile_from_json,
    profile_to_dict,
    profile_to_json,
    radius_of_tau,
    reparameterize,
    scale,
    tau_of_radius,
    zero_profile,
)
from .hessian import AtomicMeasure, e1_energy, hessian_constant, hessian_measure, mixed_measure
from .energy import (
    aubin_I,
    capacity_ball,
    energy_Ew,
    metric_d,
    norm_energy_difference,
    rooftop_P,
)
from .envelope import dirichlet_solve, envelope_via_hte, hte_solve
from .geodesic import geodesic_audit, geodesic_eval, weak_geodesic

__version__ = "0.1.0"

__all__ = [
    "AtomicMeasure",
    "ConvexityError",
    "CoordinateError",
    "DualProfile",
    "HessianParams",
    "RadialProfile",
    "aubin_I",
    "capacity_ball",
    "combine",
    "dirichlet_solve",
    "e1_energy",
    "energy_Ew",
    "envelope_via_hte",
    "geodesic_audit",
    "geodesic_eval",
    "hessian_constant",
    "hessian_measure",
    "hte_solve",
    "legendre",
    "legendre_inverse",
    "make_profile",
    "max_profiles",
    "metric_d",
    "mixed_measure",
    "norm_energy_difference",
    "profile_from_dict",
    "profile_from_json",
    "profile_to_dict",
    "profile_to_json",
    "radius_of_tau",
    "reparameterize",
    "rooftop_P",
    "scale",
    "tau_of_radius",
    "weak_geodesic",
    "zero_profile",
    "__version__",
]
