"""Piecewise-convexity detection and slope-monotonicity certification.

A function that is monotone and convex (or concave) on an interval has a
monotone increment curve: for a fixed step sigma > 0, x |-> |f(x+sigma) -
f(x)| never changes direction.  This module detects a finite convex/concave
partition from samples, refines its pieces to monotone pieces, and certifies
the direction of the increment curve on each piece.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import (
    DomainError,
    GeometryError,
    InsufficientData,
    ShapeError,
)
from .function_model import FunctionSpec, IntervalSpec, SampleGrid, evaluate

#: partitions with more pieces than this are reported as not piecewise convex
DEFAULT_MAX_PIECES = 64

#: zero band for second differences: eta = DEFAULT_ETA_SCALE * max |value|
DEFAULT_ETA_SCALE = 1e-8

#: ternary-search tolerance: fraction of the piece length
DEFAULT_EXTREMUM_TOL = 1e-10


class Shape(str, Enum):
    CONVEX = "Convex"
    CONCAVE = "Concave"
    AFFINE = "Affine"


class Monotonicity(str, Enum):
    INCREASING = "Increasing"
    DECREASING = "Decreasing"
    CONSTANT = "Constant"
    MIXED = "Mixed"


class Direction(str, Enum):
    NONINCREASING = "Nonincreasing"
    NONDECREASING = "Nondecreasing"
    CONSTANT = "Constant"


@dataclass(frozen=True)
class Partition:
    """Strictly increasing breakpoints a_0 < a_1 < ... < a_N."""

    points: tuple

    def __post_init__(self) -> None:
        pts = tuple(float(p) for p in self.points)
        if len(pts) < 2:
            raise InsufficientData("a partition needs at least two points")
        if any(b <= a for a, b in zip(pts, pts[1:])):
            raise InsufficientData("partition points must be strictly increasing")
        object.__setattr__(self, "points", pts)

    @property
    def piece_count(self) -> int:
        return len(self.points) - 1

    @property
    def min_piece_length(self) -> float:
        return min(b - a for a, b in zip(self.points, self.points[1:]))

    def pieces(self) -> tuple:
        return tuple(IntervalSpec(a, b)
                     for a, b in zip(self.points, self.points[1:]))


@dataclass(frozen=True)
class ShapePiece:
    """A closed finite piece with certified shape and monotonicity flags."""

    interval: IntervalSpec
    shape: Shape
    monotonicity: Monotonicity
    tolerance: float = 0.0


@dataclass(frozen=True)
class GSigmaCurve:
    """Samples of x |-> |f(x + sigma) - f(x)| along a piece."""

    sigma: float
    abscissae: tuple
    values: tuple


@dataclass(frozen=True)
class PiecewiseConvexPartition:
    partition: Partition
    shapes: tuple
    sign_change_count: int


@dataclass(frozen=True)
class NotPiecewiseConvex:
    sign_change_count: int


@dataclass(frozen=True)
class ConvexityCheck:
    holds: bool
    worst_violation: float
    witness: tuple | None
    tolerance: float


@dataclass(frozen=True)
class GSigmaReport:
    direction: Direction
    max_violation: float
    curve: GSigmaCurve


# ---------------------------------------------------------------------------
# Convexity inequality
# ---------------------------------------------------------------------------

def check_convexity_inequality(f: FunctionSpec, piece: IntervalSpec, claim: Shape,
                               theta_steps: int = 16, pair_samples: int = 64,
                               seed: int = 0, tol: float | None = None) -> ConvexityCheck:
    """Sample the chord inequality for the claimed shape on a piece.

    For a concave claim the defect at (a, b, theta) is
    ``theta*f(a) + (1-theta)*f(b) - f(theta*a + (1-theta)*b)``; for a convex
    claim the sign is flipped.  A positive defect is a violation.  Pairs are
    the piece endpoints plus seeded random pairs; thetas form an interior
    grid.  The default tolerance is four units of rounding in the largest
    value encountered.
    """
    if theta_steps < 1:
        raise ValueError("theta_steps must be >= 1")
    if claim not in (Shape.CONVEX, Shape.CONCAVE):
        raise ShapeError(f"claim must be Convex or Concave, got {claim!r}")
    if not (f.domain.contains(piece.lo) and f.domain.contains(piece.hi)):
        raise DomainError(f"piece {piece} exceeds domain {f.domain}")
    rng = np.random.default_rng(seed)
    pairs = [(piece.lo, piece.hi)]
    raw = rng.uniform(piece.lo, piece.hi, size=(pair_samples, 2))
    for a, b in raw:
        if a > b:
            a, b = b, a
        if a < b:
            pairs.append((float(a), float(b)))
    thetas = [j / (theta_steps + 1) for j in range(1, theta_steps + 1)]
    worst = -math.inf
    witness = None
    scale = 1.0
    sign = 1.0 if claim is Shape.CONCAVE else -1.0
    for a, b in pairs:
        fa, fb = evaluate(f, a), evaluate(f, b)
        scale = max(scale, abs(fa), abs(fb))
        for theta in thetas:
            mid = theta * a + (1.0 - theta) * b
            fm = evaluate(f, mid)
            scale = max(scale, abs(fm))
            defect = sign * ((theta * fa + (1.0 - theta) * fb) - fm)
            if defect > worst:
                worst = defect
                witness = (a, b, theta)
    if tol is None:
        tol = 4.0 * sys.float_info.epsilon * scale
    return ConvexityCheck(holds=worst <= tol, worst_violation=worst,
                          witness=witness, tolerance=tol)


# ---------------------------------------------------------------------------
# Partition detection
# ---------------------------------------------------------------------------

def detect_partition(grid: SampleGrid, eta: float | None = None,
                     max_pieces: int = DEFAULT_MAX_PIECES):
    """Detect a convex/concave partition from second differences.

    Works on (near-)uniform grids: raw second differences v[j+1] - 2 v[j] +
    v[j-1] carry the curvature sign.  ``eta`` is a value-scale zero band
    (default 1e-8 * max |value|); internally it is rescaled by (h / L)^2 so
    that a given true curvature keeps the same margin at every resolution,
    and floored at 16 ulps of the value scale so rounding noise on exactly
    affine data never registers as curvature.  Near-zero entries are
    treated as locally affine and absorbed into the adjacent run (leftward
    ties).  Returns a PiecewiseConvexPartition, or NotPiecewiseConvex when
    the number of sign runs exceeds ``max_pieces``.
    """
    if len(grid) < 3:
        raise InsufficientData("partition detection needs at least 3 points")
    xs = np.asarray([float(x) for x in grid.abscissae])
    vs = np.asarray([float(v) for v in grid.values])
    gaps = np.diff(xs)
    h = float(np.mean(gaps))
    if np.max(np.abs(gaps - h)) > 1e-6 * h:
        raise InsufficientData("partition detection requires a uniform grid")
    scale = float(np.max(np.abs(vs)))
    if eta is None:
        eta = DEFAULT_ETA_SCALE * scale
    if eta < 0:
        raise ValueError("eta must be nonnegative")
    length = float(xs[-1] - xs[0])
    noise_floor = 16.0 * sys.float_info.epsilon * scale
    band = max(eta * (h / length) ** 2, noise_floor)

    d2 = vs[2:] - 2.0 * vs[1:-1] + vs[:-2]
    signs = np.zeros(len(d2), dtype=np.int8)
    signs[d2 > band] = 1
    signs[d2 < -band] = -1

    # runs of nonzero sign over interior grid indices 1..m-2
    runs = []  # (sign, first_grid_idx, last_grid_idx)
    for j, s in enumerate(signs):
        if s == 0:
            continue
        gidx = j + 1
        if runs and runs[-1][0] == s:
            runs[-1][2] = gidx
        else:
            runs.append([int(s), gidx, gidx])

    m = len(grid)
    tol = float(grid.spacing)
    mono_band = max(eta * (h / length), 8.0 * sys.float_info.epsilon * scale)
    if not runs:
        piece = IntervalSpec(float(xs[0]), float(xs[-1]))
        shape = ShapePiece(piece, Shape.AFFINE,
                           _monotonicity_of(vs, 0, m - 1, mono_band), tol)
        return PiecewiseConvexPartition(
            partition=Partition((xs[0], xs[-1])), shapes=(shape,),
            sign_change_count=0)

    sign_changes = len(runs) - 1
    if len(runs) > max_pieces:
        return NotPiecewiseConvex(sign_change_count=sign_changes)

    boundaries = [0]
    for left, right in zip(runs, runs[1:]):
        boundaries.append((left[2] + right[1] + 1) // 2)
    boundaries.append(m - 1)

    points = tuple(float(xs[b]) for b in boundaries)
    shapes = []
    for run, lo_idx, hi_idx in zip(runs, boundaries, boundaries[1:]):
        piece = IntervalSpec(float(xs[lo_idx]), float(xs[hi_idx]))
        shape = Shape.CONVEX if run[0] > 0 else Shape.CONCAVE
        shapes.append(ShapePiece(piece, shape,
                                 _monotonicity_of(vs, lo_idx, hi_idx,
                                                  mono_band), tol))
    return PiecewiseConvexPartition(partition=Partition(points),
                                    shapes=tuple(shapes),
                                    sign_change_count=sign_changes)


def _monotonicity_of(vs: np.ndarray, lo_idx: int, hi_idx: int,
                     band: float) -> Monotonicity:
    d = np.diff(vs[lo_idx:hi_idx + 1])
    if len(d) == 0:
        return Monotonicity.CONSTANT
    dmin, dmax = float(np.min(d)), float(np.max(d))
    if dmax <= band and dmin >= -band:
        return Monotonicity.CONSTANT
    if dmin >= -band:
        return Monotonicity.INCREASING
    if dmax <= band:
        return Monotonicity.DECREASING
    return Monotonicity.MIXED


# ---------------------------------------------------------------------------
# Monotone refinement
# ---------------------------------------------------------------------------

def refine_to_monotone(f: FunctionSpec, piece: ShapePiece,
                       tol: float | None = None) -> tuple:
    """Split a certified convex/concave piece at its interior extremum.

    The shape certificate makes the restriction unimodal, so ternary search
    localizes the extremum (minimum for convex, maximum for concave) to
    within ``tol``.  Pieces already flagged monotone are returned unchanged;
    otherwise two monotone pieces tiling the input exactly are returned.
    """
    if piece.shape not in (Shape.CONVEX, Shape.CONCAVE, Shape.AFFINE):
        raise ShapeError(f"piece shape {piece.shape!r} is not certified")
    if piece.monotonicity in (Monotonicity.INCREASING, Monotonicity.DECREASING,
                              Monotonicity.CONSTANT):
        return (piece,)
    if piece.shape is Shape.AFFINE:
        raise ShapeError("an affine piece cannot have mixed monotonicity")
    lo, hi = piece.interval.lo, piece.interval.hi
    if tol is None:
        tol = DEFAULT_EXTREMUM_TOL * (hi - lo)
    find_min = piece.shape is Shape.CONVEX
    a, b = lo, hi
    while b - a > tol:
        m1 = a + (b - a) / 3.0
        m2 = b - (b - a) / 3.0
        f1, f2 = evaluate(f, m1), evaluate(f, m2)
        if (f1 > f2) if find_min else (f1 < f2):
            a = m1
        else:
            b = m2
    split = 0.5 * (a + b)
    if split - lo <= 2.0 * tol or hi - split <= 2.0 * tol:
        flo, fhi = evaluate(f, lo), evaluate(f, hi)
        if flo < fhi:
            mono = Monotonicity.INCREASING
        elif flo > fhi:
            mono = Monotonicity.DECREASING
        else:
            mono = Monotonicity.CONSTANT
        return (ShapePiece(piece.interval, piece.shape, mono, tol),)
    if find_min:
        flags = (Monotonicity.DECREASING, Monotonicity.INCREASING)
    else:
        flags = (Monotonicity.INCREASING, Monotonicity.DECREASING)
    return (
        ShapePiece(IntervalSpec(lo, split), piece.shape, flags[0], tol),
        ShapePiece(IntervalSpec(split, hi), piece.shape, flags[1], tol),
    )


# ---------------------------------------------------------------------------
# Increment curve
# ---------------------------------------------------------------------------

def g_sigma(f: FunctionSpec, x, sigma) -> float:
    """Increment magnitude |f(x + sigma) - f(x)|."""
    if sigma <= 0:
        raise GeometryError("sigma must be positive")
    return abs(evaluate(f, x + sigma) - evaluate(f, x))


#: (monotonicity, shape) -> certified increment-curve direction
_DIRECTION_TABLE = {
    (Monotonicity.INCREASING, Shape.CONCAVE): Direction.NONINCREASING,
    (Monotonicity.DECREASING, Shape.CONVEX): Direction.NONINCREASING,
    (Monotonicity.INCREASING, Shape.CONVEX): Direction.NONDECREASING,
    (Monotonicity.DECREASING, Shape.CONCAVE): Direction.NONDECREASING,
}


def expected_direction(piece: ShapePiece) -> Direction:
    """Increment-curve direction predicted by the (monotonicity, shape) pair."""
    if piece.shape is Shape.AFFINE or piece.monotonicity is Monotonicity.CONSTANT:
        return Direction.CONSTANT
    try:
        return _DIRECTION_TABLE[(piece.monotonicity, piece.shape)]
    except KeyError:
        raise ShapeError(
            f"piece is not certified monotone: {piece.monotonicity!r}")


def check_gsigma_monotone(f: FunctionSpec, piece: ShapePiece, sigma: float,
                          m: int = 100) -> GSigmaReport:
    """Certify the direction of the increment curve on a monotone piece.

    Builds an m-point increment curve and reports the certified direction
    with the largest adjacent-pair violation against it.  Ambiguous
    (constant) pieces are tested in both directions and the smaller
    violation wins.
    """
    if m < 3:
        raise ValueError("the increment curve needs m >= 3 samples")
    expected = expected_direction(piece)
    lo, hi = piece.interval.lo, piece.interval.hi
    if hi - lo <= sigma:
        raise GeometryError(
            f"piece length {hi - lo} must exceed sigma {sigma}")
    top = hi - sigma
    while top + sigma > hi:
        top = math.nextafter(top, -math.inf)
    step = (top - lo) / (m - 1)
    xs = [lo + i * step for i in range(m - 1)]
    xs.append(top)
    values = [g_sigma(f, x, sigma) for x in xs]
    diffs = [b - a for a, b in zip(values, values[1:])]
    viol_ni = max(0.0, max(diffs))       # violations of nonincreasing
    viol_nd = max(0.0, -min(diffs))      # violations of nondecreasing
    curve = GSigmaCurve(sigma=float(sigma), abscissae=tuple(xs),
                        values=tuple(values))
    if expected is Direction.CONSTANT:
        if piece.shape is Shape.AFFINE:
            return GSigmaReport(Direction.CONSTANT,
                                max(abs(d) for d in diffs), curve)
        if viol_ni == viol_nd:
            return GSigmaReport(Direction.CONSTANT, viol_ni, curve)
        if viol_ni < viol_nd:
            return GSigmaReport(Direction.NONINCREASING, viol_ni, curve)
        return GSigmaReport(Direction.NONDECREASING, viol_nd, curve)
    if expected is Direction.NONINCREASING:
        return GSigmaReport(expected, viol_ni, curve)
    return GSigmaReport(expected, viol_nd, curve)
