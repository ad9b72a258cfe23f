"""Generating distributions, their worst-case divergence and the testing example."""

from .ddata import (
    blend_search,
    d_data,
    d_data_exponential_pointmass,
    d_data_gaussian_mixture,
    d_data_general,
    d_data_pointmass,
    d_data_sphere_mixture,
    descent_rate,
    descent_rate_for_set,
)
from .distributions import (
    GENERATOR_NAMES,
    Blend,
    GeneratingDistribution,
    GaussianMixture,
    PointMass,
    SphereMixture,
    default_generator,
)
from .neyman_pearson import P0_CHOICES, np_power, np_worst_power
from .profiles import (
    RadialNominal,
    chi2_at_radius,
    chi2_nominal_to_theta,
    profile_mass,
    radial_profile,
)

__all__ = [
    "Blend",
    "GeneratingDistribution",
    "GENERATOR_NAMES",
    "GaussianMixture",
    "P0_CHOICES",
    "PointMass",
    "RadialNominal",
    "SphereMixture",
    "blend_search",
    "chi2_at_radius",
    "chi2_nominal_to_theta",
    "d_data",
    "d_data_exponential_pointmass",
    "d_data_gaussian_mixture",
    "d_data_general",
    "d_data_pointmass",
    "d_data_sphere_mixture",
    "default_generator",
    "descent_rate",
    "descent_rate_for_set",
    "np_power",
    "np_worst_power",
    "profile_mass",
    "radial_profile",
]
