"""Intrinsic-dimension estimation and adapter-rank planning.

Estimate the intrinsic dimension of point clouds with the two-nearest-
neighbor (TwoNN) method, profile it across a transformer's hidden layers,
and turn consecutive-layer dimension changes into a per-block low-rank-
adapter rank plan with constant alpha/rank scaling and a parameter budget.
"""

from .cloud import PointCloud, as_cloud, read_csv, write_csv
from .errors import (
    DegenerateInput,
    DimensionMismatch,
    FormatError,
    IdrankError,
    InvalidRatio,
    InvalidSpec,
    LayerEstimationError,
    LengthMismatch,
    NonFiniteInput,
    ShapeMismatch,
    TooFewPoints,
    ZeroRank,
)
from .estimator import (
    IdEstimate,
    NeighborStats,
    ScaleStats,
    StabilityReport,
    decimation_stability,
    estimate_id,
    fit_mle,
    fit_regression,
    regression_points,
    two_nearest,
)
from .ghs import HiddenStateSet, read_ghs, write_ghs
from .planner import (
    ModelShape,
    RankPlan,
    compute_ranks,
    emit_plan,
    load_plan,
    make_plan,
    plan_from_profile,
)
from .profile import (
    POOLING_MODES,
    LayerProfile,
    ProfileDiff,
    compute_profile,
    profile_diff,
    profile_digest,
    read_profile,
    write_profile,
)
from .synth import ManifoldSpec, generate, helix, hypercube, hyperplane, toy5

__version__ = "0.1.0"
