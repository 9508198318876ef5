"""Entropy-dimension estimation for probability measures on the real line.

Estimates the entropy dimension of a measure by four routes proved to agree
(smoothed-entropy slope, averaged pointwise scaling, Fisher-information
integral, curvature-dimension scan) and ships the structural facts behind
them (kernel independence, affinity, bi-Lipschitz invariance, entropy and
Fisher bounds) as executable property suites.
"""

from .measures import (
    Atomic,
    BernoulliConvolution,
    GridDensity,
    LipschitzPushforward,
    MapSpec,
    MeasureError,
    Mixture,
    affine_map,
    dirac,
    gaussian_grid,
    grid_from_function,
    interval_mass,
    interval_mass_bounds,
    sample,
    sampling_metadata,
    sine_perturbed_map,
    support_bounds,
    translated,
    two_point,
    uniform_grid,
)
from .smoothing import (
    BoxKernel,
    CustomGridKernel,
    GaussianKernel,
    SmoothedDensity,
    heat_smoothed,
    kernel_from_name,
)
from .entropy import (
    ScalingCurve,
    affinity_gap,
    entropy,
    entropy_curve,
    entropy_lower_bound,
    epi_check,
    raw_entropy,
)
from .dimension import (
    DimensionEstimate,
    affinity_report,
    delta_c_entropy,
    delta_c_fractal,
    kernel_independence_report,
    lipschitz_invariance_report,
)
from .fisher import (
    BoundViolation,
    TestFunctionBasis,
    de_bruijn_check,
    default_basis,
    delta_c_fisher,
    fisher_direct,
    fisher_variational,
    quadratic_basis,
)
from .bochner import (
    BochnerScan,
    delta_square,
    localized_fisher,
    localized_lower_bound,
    optimal_K,
    smooth_plateau,
)
from .freedim import AtomProfile, atom_profile, free_dimension_single
from .specio import dump_measure, load_measure, measure_from_dict, measure_to_dict

__version__ = "0.1.0"
