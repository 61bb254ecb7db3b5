"""Nonparametric estimation of nonseparable dyadic regression models.

``Y_ij = g(X_i, X_j, e_ij)`` with ``g`` strictly increasing in a scalar
error ``e_ij``. The package estimates ``g`` and the error CDF ``F_e`` from
directed-dyad data through kernel estimates of the conditional
distribution of ``Y_ij`` given the covariates of both agents, and
provides plug-in asymptotic variances, a dyadic Nadaraya-Watson baseline
and a Monte Carlo harness.
"""
from .baseline import NwEstimate, nw_curve, nw_mean
from .conditional import (CdfCurve, ConditioningPoint, DyadConditional, cdf_curve, conditional_cdf,
                          conditional_pdf, dyad_density, invert_cdf, joint_density)
from .data import (AgentTable, DyadPanel, Partition, SubvectorSpec, build_panel,
                   complete_panel, make_grid, read_panel, subvector_values, write_panel)
from .errors import *  # noqa: F401,F403
from .inference import (AsymptoticVariance, RateDiagnostics, confidence_interval,
                        rate_diagnostics, sigma_F, sigma_g)
from .kernels import (EPANECHNIKOV, GAUSSIAN, Bandwidths, KernelSpec, k1_density,
                      k1_integrated, product_kernel, roughness_constant, rule_of_thumb)
from .montecarlo import (StudyConfig, StudyResult, coverage_study, run_study, simulate_dgp,
                         summarize, true_g)
from .structural import (FeSlice, FixedPoint, GSliceInE, GSliceInX, Homogeneous,
                         Independence, Regime, StructuralEstimate, estimate_curves,
                         error_cdf_reference, estimate_error_cdf, estimate_g)

__version__ = "0.1.0"
