"""Numeric toolkit for uniform/absolute continuity analysis of real functions."""

from .errors import (
    BudgetError,
    ContanaError,
    DomainError,
    EmptyCollection,
    GeometryError,
    InsufficientData,
    KindError,
    ParseError,
    PreconditionError,
    ShapeError,
    Unachievable,
)
from .function_model import (
    CANTOR_DEPTH,
    FunctionSpec,
    IntervalSpec,
    SampleGrid,
    clip_window,
    eval_cantor,
    evaluate,
    parse_function,
    parse_interval,
    sample,
)
from .convexity import (
    ConvexityCheck,
    Direction,
    GSigmaCurve,
    GSigmaReport,
    Monotonicity,
    NotPiecewiseConvex,
    Partition,
    PiecewiseConvexPartition,
    Shape,
    ShapePiece,
    check_convexity_inequality,
    check_gsigma_monotone,
    detect_partition,
    expected_direction,
    g_sigma,
    refine_to_monotone,
)
from .continuity import (
    ACWorstReport,
    Anchor,
    Certificate,
    GluedChain,
    GluingCheck,
    IntervalCollection,
    ModulusCurve,
    VerificationReport,
    ac_certificate,
    ac_sum,
    glue_chain,
    glued_single_interval,
    gluing_bound_check,
    invert_modulus,
    modulus,
    modulus_on_grid,
    random_collection,
    split_collection_at_partition,
    verify_certificate,
    worst_ac_sum_oracle,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
