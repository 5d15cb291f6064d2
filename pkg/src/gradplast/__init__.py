"""Desk-scale simulator for rate-independent single-crystal gradient
plasticity with isotropic or linear kinematic hardening.

The package solves the time-incremental minimization problem on a
structured grid and ships the oracles that certify its own identities:
exact discrete curl/divergence structure, coercivity bounds, optimality
residuals, and closed-form benchmarks.
"""

import os as _os

# GRADPLAST_THREADS caps data-parallel width; it must take effect before
# numpy binds its thread pools, hence here at package import.
_threads = _os.environ.get("GRADPLAST_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                 "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
        _os.environ.setdefault(_var, _threads)

from ._backend import BACKEND, available_backends
from .algebra import (
    ElasticModuli,
    SlipBasis,
    SlipSystem,
    dev,
    inner,
    is_mutually_orthogonal,
    norm,
    orientation_tensor,
    skew,
    sym,
    tr,
)
from .constitutive import (
    DerivedState,
    EnergyBreakdown,
    IsotropicHardening,
    MaterialParams,
    PragerHardening,
    QuadraticHardening,
    State,
    bilinear_a,
    cauchy_stress,
    derived_state,
    dislocation_density,
    dissipation_density,
    eshelby_stress,
    free_energy,
    load_pairing,
    resolved_stresses,
    validate_model,
    yield_function,
    zero_state,
)
from .errors import (
    CGStall,
    DimensionMismatch,
    GradplastError,
    InvalidModel,
    InvalidSlipSystem,
    NoConsistentPattern,
    NonConvergence,
    NonMonotoneLoad,
    ParseError,
    ValidationError,
)
from .grid import (
    GridSpec,
    TraceConstraint,
    build_trace_constraint,
    curl,
    curl_adjoint,
    divergence,
    grad,
    grad_adjoint,
    l2_inner,
    l2_norm,
    read_snapshot,
    write_snapshot,
    zeros_field,
)
from .solver import (
    CoercivityBound,
    KKTResiduals,
    LoadProgram,
    SolverConfig,
    StepReport,
    coercivity_probe,
    displacement_solve,
    eliminate_eta,
    incremental_step,
    kkt_residual,
    lipschitz_estimate,
    predicted_coercivity,
    prox_scalar_iso,
    prox_scalar_kin,
    run_evolution,
    slip_update,
)
from .verify import (
    TinyProblem,
    analytic_single_slip,
    oracle_active_set,
    oracle_smoothed,
    random_tiny_problem,
    return_map_single_slip,
    run_shear_benchmark,
)

__version__ = "0.1.0"
