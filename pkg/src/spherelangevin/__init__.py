"""Riemannian Langevin dynamics on products of spheres.

The library alternates geodesic gradient steps with exact Brownian-motion
increments, where exactness comes from simulating the Wright-Fisher
radial law through an alternating-series sampler.  On top of the chain it
ships a Burer-Monteiro Max-Cut objective, Goemans-Williamson rounding, a
parameter planner evaluating the convergence guarantees, and a
statistical validation battery.

Hot kernels run through a compiled extension when it is available; set
SPHERELANGEVIN_BACKEND=python to force the pure-Python fallback (or
=cython to require the extension).  Both backends draw from the same
uniform stream in the same order, so results are bit-identical.
"""

from ._kernels import active_backend
from .brownian import (
    EXACT_MODE,
    TANGENT_MODE,
    IncrementMode,
    ProductBrownian,
    brownian_increment_product,
    brownian_increment_sphere,
    brownian_increment_sphere_batch,
    increment_is_exact,
    langevin_time,
)
from .errors import (
    CutLocusError,
    GraphFormatError,
    NumericalFailure,
    ShapeMismatchError,
    SphereLangevinError,
)
from .geometry import (
    ManifoldShape,
    PointOnM,
    TangentVector,
    exp_map,
    factor_angles,
    geodesic_distance,
    log_map,
    project_to_tangent,
    random_point,
)
from .langevin import (
    ChainState,
    LangevinConfig,
    RunReport,
    langevin_step,
    rgd_baseline,
    run_chain,
)
from .maxcut import (
    CutAssignment,
    CutReport,
    GraphInstance,
    bm_cut_report,
    brute_force_maxcut,
    cut_value,
    gw_round,
    load_graph,
    parse_graph,
    serialize_graph,
)
from .objective import (
    BurerMonteiroObjective,
    LipschitzEstimates,
    ObjectiveHandle,
    SymmetricCostMatrix,
    bm_riemannian_grad,
    bm_value,
    lipschitz_estimates,
)
from .theory import (
    PRACTICAL_PRESET,
    TheoryInputs,
    TheoryPlan,
    build_plan,
    kl_bound,
    lsi_alpha,
    lsi_feasibility,
    plan_beta,
    plan_eta,
    plan_iterations,
)
from .wright_fisher import (
    DEFAULT_TOLERANCES,
    SeriesTolerances,
    WrightFisherParams,
    ainfty_moments,
    ainfty_sampling_is_exact,
    log_coefficient_a,
    log_coefficient_b,
    qm_pmf,
    qm_table,
    sample_ainfty,
    sample_ainfty_batch,
    sample_wf,
    sample_wf_batch,
    turning_index,
    wf_density_from_zero,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "active_backend",
    # errors
    "SphereLangevinError",
    "ShapeMismatchError",
    "CutLocusError",
    "NumericalFailure",
    "GraphFormatError",
    # geometry
    "ManifoldShape",
    "PointOnM",
    "TangentVector",
    "exp_map",
    "log_map",
    "geodesic_distance",
    "factor_angles",
    "project_to_tangent",
    "random_point",
    # wright_fisher
    "SeriesTolerances",
    "DEFAULT_TOLERANCES",
    "WrightFisherParams",
    "log_coefficient_a",
    "log_coefficient_b",
    "turning_index",
    "qm_pmf",
    "qm_table",
    "ainfty_moments",
    "ainfty_sampling_is_exact",
    "sample_ainfty",
    "sample_ainfty_batch",
    "sample_wf",
    "sample_wf_batch",
    "wf_density_from_zero",
    # brownian
    "IncrementMode",
    "EXACT_MODE",
    "TANGENT_MODE",
    "langevin_time",
    "increment_is_exact",
    "brownian_increment_sphere",
    "brownian_increment_sphere_batch",
    "brownian_increment_product",
    "ProductBrownian",
    # objective
    "SymmetricCostMatrix",
    "LipschitzEstimates",
    "ObjectiveHandle",
    "BurerMonteiroObjective",
    "bm_value",
    "bm_riemannian_grad",
    "lipschitz_estimates",
    # langevin
    "LangevinConfig",
    "ChainState",
    "RunReport",
    "langevin_step",
    "run_chain",
    "rgd_baseline",
    # maxcut
    "CutAssignment",
    "GraphInstance",
    "parse_graph",
    "load_graph",
    "serialize_graph",
    "cut_value",
    "gw_round",
    "brute_force_maxcut",
    "CutReport",
    "bm_cut_report",
    # theory
    "TheoryInputs",
    "TheoryPlan",
    "plan_beta",
    "lsi_alpha",
    "plan_eta",
    "plan_iterations",
    "kl_bound",
    "build_plan",
    "lsi_feasibility",
    "PRACTICAL_PRESET",
]
