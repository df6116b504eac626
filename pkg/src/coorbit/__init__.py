"""Finite frames, cross Gram matrices and weighted co-orbit norms."""
from .errors import (
    ConditioningError,
    ConsistencyError,
    CoorbitError,
    DimensionError,
    FrameError,
    GenerationError,
    PreconditionError,
    SpecError,
    WeightError,
)
from .frames import (
    DualPair,
    Frame,
    analysis,
    canonical_dual,
    frame_bounds,
    frame_operator,
    reconstruct,
    synthesis,
    verify_dual,
)
from .gallery import FrameSpec, WeightSpec, localization_profile, materialize, mercedes, truncation_family
from .gram import (
    CrossGram,
    FixedPointSpace,
    coorbit_norm,
    cross_gram,
    fixed_point_residual,
    gram_opnorm_linf_w,
    l1_majorant,
    partial_sum_lift,
    psi_coefficient_bound,
    range_basis,
    verify_projection_identity,
)
from .hilbert import Weight, inner, l1_inv_w_norm, linf_w_norm
from .topology import (
    TestSet,
    bounded_approximation_certificate,
    onb_counterexample,
    seminorm,
    trace_convergence,
)

__version__ = "0.1.0"
