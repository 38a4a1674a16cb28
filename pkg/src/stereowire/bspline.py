"""B-spline basis evaluation, curve fitting, and arclength parameterization.

The canonical construction is a clamped knot vector (first and last knot
each repeated degree+1 times) built by knot averaging, so fitted curves
interpolate their end points. Basis functions follow the two-term
recursion with the 0/0 -> 0 convention; the degree-0 indicator is closed
on the right at the evaluation-domain end t_(m-p) so curves are defined
at their last parameter.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateCurve,
    IndexOutOfRange,
    OutOfDomain,
    SolveFailure,
    TooFewPoints,
)

DEDUP_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class KnotVector:
    """Nondecreasing knots t_0..t_m with a degree p.

    A curve over this vector has n_ctrl = m - p control points; the
    evaluation domain is [t_p, t_(m-p)].
    """

    knots: np.ndarray
    degree: int

    def __post_init__(self):
        knots = np.asarray(self.knots, dtype=float)
        p = int(self.degree)
        if p < 0:
            raise ValueError("degree must be nonnegative")
        if knots.ndim != 1 or knots.size < 2 * p + 2:
            raise ValueError("knot vector too short for its degree")
        if np.any(np.diff(knots) < 0):
            raise ValueError("knots must be nondecreasing")
        if not knots[p] < knots[knots.size - 1 - p]:
            raise ValueError("empty evaluation domain")
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "degree", p)

    @property
    def m(self) -> int:
        return self.knots.size - 1

    @property
    def n_basis(self) -> int:
        """Number of basis functions / control points (m - p)."""
        return self.m - self.degree

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.knots[self.degree]), float(self.knots[self.m - self.degree])


def clamped_uniform_knots(n_ctrl: int, degree: int, t0: float = 0.0, t1: float = 1.0) -> KnotVector:
    """Clamped knot vector with uniformly spaced interior knots."""
    p = degree
    if n_ctrl < p + 1:
        raise ValueError("need at least degree+1 control points")
    interior = np.linspace(t0, t1, n_ctrl - p + 1)[1:-1]
    knots = np.concatenate([np.full(p + 1, t0), interior, np.full(p + 1, t1)])
    return KnotVector(knots, p)


def averaged_knots(u: np.ndarray, degree: int) -> KnotVector:
    """Clamped knots for interpolation at parameters u by knot averaging.

    Interior knot t_(p+j) is the mean of p consecutive parameters
    u_j..u_(j+p-1), which satisfies the Schoenberg-Whitney conditions.
    """
    u = np.asarray(u, dtype=float)
    p = degree
    n = u.size
    interior = np.array([u[j:j + p].mean() for j in range(1, n - p)])
    knots = np.concatenate([np.full(p + 1, u[0]), interior, np.full(p + 1, u[-1])])
    return KnotVector(knots, p)


def _cox_de_boor(i: int, p: int, t: float, knots: np.ndarray, t_close: float) -> float:
    """Two-term basis recursion; the indicator closes right at t_close."""
    if p == 0:
        if knots[i] <= t < knots[i + 1]:
            return 1.0
        if t == t_close and knots[i + 1] == t_close and knots[i] < knots[i + 1]:
            return 1.0
        return 0.0
    out = 0.0
    d1 = knots[i + p] - knots[i]
    if d1 > 0.0:
        out += (t - knots[i]) / d1 * _cox_de_boor(i, p - 1, t, knots, t_close)
    d2 = knots[i + p + 1] - knots[i + 1]
    if d2 > 0.0:
        out += (knots[i + p + 1] - t) / d2 * _cox_de_boor(i + 1, p - 1, t, knots, t_close)
    return out


def basis(i: int, p: int, t: float, kv: KnotVector) -> float:
    """Value of the i-th degree-p basis function at t.

    Raises IndexOutOfRange unless 0 <= i <= m - p - 1.
    """
    knots = kv.knots
    m = knots.size - 1
    if not 0 <= i <= m - p - 1:
        raise IndexOutOfRange(f"basis index {i} outside 0..{m - p - 1}")
    t_close = float(knots[m - p])
    return _cox_de_boor(i, p, float(t), knots, t_close)


def _find_span(knots: np.ndarray, p: int, t: float) -> int:
    """Index of the knot span containing t (last nonempty span at the right end)."""
    m = knots.size - 1
    if t >= knots[m - p]:
        span = m - p - 1
        while span > p and knots[span] == knots[span + 1]:
            span -= 1
        return span
    span = int(np.searchsorted(knots, t, side="right")) - 1
    return max(span, p)


def _basis_row(knots: np.ndarray, p: int, t: float, span: int) -> np.ndarray:
    """The p+1 nonzero basis values B_(span-p..span, p)(t)."""
    N = np.empty(p + 1)
    N[0] = 1.0
    left = np.empty(p + 1)
    right = np.empty(p + 1)
    for j in range(1, p + 1):
        left[j] = t - knots[span + 1 - j]
        right[j] = knots[span + j] - t
        saved = 0.0
        for r in range(j):
            tmp = N[r] / (right[r + 1] + left[j - r])
            N[r] = saved + right[r + 1] * tmp
            saved = left[j - r] * tmp
        N[j] = saved
    return N


@dataclass(frozen=True, eq=False)
class BSplineCurve:
    """C(t) = sum_i P_i B_(i,p)(t) with control points of any dimension.

    3D instances play the SpatialCurve role (mm); 2D instances back the
    PlanarCurve annotation fit (px).
    """

    control_points: np.ndarray
    knots: KnotVector

    def __post_init__(self):
        cp = np.atleast_2d(np.asarray(self.control_points, dtype=float))
        p = self.knots.degree
        if cp.shape[0] != self.knots.n_basis:
            raise ValueError(
                f"{cp.shape[0]} control points incompatible with knot count "
                f"{self.knots.m + 1} at degree {p}"
            )
        if cp.shape[0] < p + 1:
            raise ValueError("need at least degree+1 control points")
        object.__setattr__(self, "control_points", cp)

    @property
    def degree(self) -> int:
        return self.knots.degree

    @property
    def dim(self) -> int:
        return self.control_points.shape[1]

    @property
    def domain(self) -> tuple[float, float]:
        return self.knots.domain


SpatialCurve = BSplineCurve


def _check_domain(curve: BSplineCurve, t: float) -> float:
    lo, hi = curve.domain
    tol = 1e-10 * max(1.0, abs(lo), abs(hi))
    if t < lo - tol or t > hi + tol:
        raise OutOfDomain(f"t={t} outside [{lo}, {hi}]")
    return min(max(t, lo), hi)


def eval_curve(curve: BSplineCurve, t: float) -> np.ndarray:
    """Point on the curve at parameter t; raises OutOfDomain outside it."""
    t = _check_domain(curve, float(t))
    p = curve.degree
    knots = curve.knots.knots
    span = _find_span(knots, p, t)
    row = _basis_row(knots, p, t, span)
    return row @ curve.control_points[span - p:span + 1]


def eval_curve_many(curve: BSplineCurve, ts: np.ndarray) -> np.ndarray:
    """Evaluate at an array of parameters; returns an (n, dim) array."""
    ts = np.asarray(ts, dtype=float)
    p = curve.degree
    knots = curve.knots.knots
    cp = curve.control_points
    out = np.empty((ts.size, curve.dim))
    for k, t in enumerate(ts.ravel()):
        t = _check_domain(curve, float(t))
        span = _find_span(knots, p, t)
        out[k] = _basis_row(knots, p, t, span) @ cp[span - p:span + 1]
    return out


def dedupe_points(points: np.ndarray, tol: float = DEDUP_TOL) -> np.ndarray:
    """Drop consecutive vertices closer than tol."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if len(points) == 0:
        return points
    keep = [0]
    for i in range(1, len(points)):
        if np.linalg.norm(points[i] - points[keep[-1]]) > tol:
            keep.append(i)
    return points[keep]


def parameterize_arclength(points) -> np.ndarray:
    """Normalized cumulative chord-length parameters u in [0, 1].

    u_k is the prefix sum of segment lengths divided by the total length;
    raises DegenerateCurve when the total length is <= 1e-12.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if len(points) < 2:
        raise DegenerateCurve("need at least two points")
    seg = np.linalg.norm(np.diff(points, axis=0), axis=1)
    total = float(seg.sum())
    if total <= 1e-12:
        raise DegenerateCurve("polyline has zero total length")
    u = np.concatenate([[0.0], np.cumsum(seg)]) / total
    u[0], u[-1] = 0.0, 1.0
    return u


@dataclass(frozen=True, eq=False)
class PlanarCurve:
    """A 2D annotation polyline with its arclength B-spline interpolant."""

    points: np.ndarray
    u: np.ndarray
    spline: BSplineCurve


def fit_curve(polyline, degree: int = 3):
    """Interpolating B-spline through a polyline at its arclength parameters.

    Consecutive duplicate vertices are removed first (tol 1e-9). Returns a
    PlanarCurve for 2D input, a BSplineCurve for 3D input. Raises
    TooFewPoints below degree+1 distinct vertices and SolveFailure if the
    collocation system cannot reproduce the vertices to 1e-9.
    """
    pts = dedupe_points(polyline)
    n = len(pts)
    if n < degree + 1:
        raise TooFewPoints(f"need >= {degree + 1} distinct points, got {n}")
    u = parameterize_arclength(pts)
    kv = averaged_knots(u, degree)
    knots = kv.knots

    B = np.zeros((n, n))
    for k, t in enumerate(u):
        span = _find_span(knots, degree, float(t))
        B[k, span - degree:span + 1] = _basis_row(knots, degree, float(t), span)
    try:
        ctrl = np.linalg.solve(B, pts)
    except np.linalg.LinAlgError as exc:
        raise SolveFailure("singular interpolation system") from exc
    curve = BSplineCurve(ctrl, kv)
    resid = np.abs(eval_curve_many(curve, u) - pts).max()
    if resid > 1e-9:
        raise SolveFailure(f"interpolation residual {resid:.3g} exceeds 1e-9")

    if pts.shape[1] == 2:
        return PlanarCurve(points=pts, u=u, spline=curve)
    return curve


def sample_uniform(curve, n: int) -> tuple[np.ndarray, np.ndarray]:
    """n curve samples at t_k = t_p + (k/(n-1)) (t_(m-p) - t_p), endpoints included."""
    if isinstance(curve, PlanarCurve):
        curve = curve.spline
    if n < 2:
        raise ValueError("need n >= 2 samples")
    lo, hi = curve.domain
    ts = lo + (np.arange(n) / (n - 1)) * (hi - lo)
    ts[-1] = hi
    return ts, eval_curve_many(curve, ts)
