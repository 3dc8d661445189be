"""Numerical companions to the change-of-variables formula in R^d.

Transvection decompositions and determinants, covering algorithms, measure
differentiation, mesh-linearization bounds on image measures and Monte Carlo
estimates of both sides of the change-of-variables identity.
"""
__version__ = "0.1.0"

from .change_of_variables import (CoVConfig, cov_lhs, cov_rhs, gaussian_demo, image_measure_bounds,
                                  integrability_companion)
from .covering import (BallFamily, PackingResult, SubfamilyPartition, besicovitch_partition,
                       estimate_besicovitch_constant, measure_almost_cover, vitali_select)
from .differentiation import (MeasurePair, RadiusSchedule, VitaliFamilyKind, doubling_ratio, lebesgue_density,
                              rn_derivative_at)
from .geometry import Ball, Box, HalfSpace, Intersection, Norm, PredicateRegion, box_volume, mesh_cover
from .linalg import (Transvection, TransvectionDecomposition, ball_volume_scaling, determinant,
                     linear_image_measure_check, transvection_decompose)
from .maps import DifferentiableMap, numeric_jacobian, resolve_map
from .measures import AffineDensity, DensityMeasure, GridDensity, Lebesgue, WeightedSamples, mc_measure
from .metric import OpenSubsetMetric, boundary_escape_check, extended_distance
from .sampling import Estimate, SeededSampler
