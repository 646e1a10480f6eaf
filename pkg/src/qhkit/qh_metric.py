"""Quasihyperbolic lengths, growth bounds, coarse length, half-space oracle.

The quasihyperbolic length of an arc integrates the reciprocal boundary
distance, int |dz| / delta(z).  Straight segments are integrated by a
composite midpoint rule whose sample count doubles until two successive
refinements agree to the requested relative tolerance; the last refinement
difference is reported as the error estimate.
"""

import math
from dataclasses import dataclass

import numpy as np

from .domains import ArcPolyline, HalfSpace, as_point
from .errors import ArcExitsDomainError, InvalidInputError


@dataclass(frozen=True)
class QhLengthResult:
    value: float
    est_error: float


@dataclass(frozen=True)
class CoarseLengthResult:
    value: float
    h: float
    discretization: int


def segment_qh_lengths(domain, starts, ends, tol=1e-3, k0=4, kmax=1 << 21,
                       raise_on_exit=True):
    """Quasihyperbolic length of straight segments, vectorized.

    Returns (values, est_errors, valid_mask).  A segment is invalid when any
    midpoint sample has nonpositive boundary distance or the segment is
    blocked by a lower-dimensional obstacle; with ``raise_on_exit`` this
    raises ArcExitsDomainError instead of masking.
    """
    A = np.atleast_2d(np.asarray(starts, dtype=float))
    B = np.atleast_2d(np.asarray(ends, dtype=float))
    m = len(A)
    L = np.linalg.norm(B - A, axis=1)
    values = np.zeros(m)
    errors = np.zeros(m)
    valid = np.ones(m, dtype=bool)

    blocked = domain.segment_blocked_many(A, B)
    if np.any(blocked):
        if raise_on_exit:
            raise ArcExitsDomainError("segment crosses a boundary obstacle")
        valid &= ~blocked

    active = np.nonzero(valid & (L > 0))[0]
    prev = np.zeros(m)
    k = k0
    first = True
    while len(active) and k <= kmax:
        t = (np.arange(k) + 0.5) / k
        seg = B[active] - A[active]
        pts = A[active][:, None, :] + t[None, :, None] * seg[:, None, :]
        delta = domain.boundary_distance_many(pts.reshape(-1, pts.shape[-1]))
        delta = delta.reshape(len(active), k)
        bad = np.any(delta <= 0.0, axis=1)
        if np.any(bad):
            if raise_on_exit:
                raise ArcExitsDomainError(
                    "segment sample has nonpositive boundary distance"
                )
            idx = active[bad]
            valid[idx] = False
            active = active[~bad]
            delta = delta[~bad]
            if not len(active):
                break
        est = L[active] * np.mean(1.0 / delta, axis=1)
        if first:
            prev[active] = est
            first = False
        else:
            diff = np.abs(est - prev[active])
            done = diff <= tol * np.maximum(np.abs(est), 1e-300)
            values[active] = est
            errors[active] = diff
            prev[active] = est
            active = active[~done]
        k *= 2
    return values, errors, valid


def qh_polyline_length(domain, arc, tol=1e-3):
    """Quasihyperbolic length of a polyline by per-segment adaptive quadrature.

    ``tol`` is the relative stopping tolerance per segment; the returned
    ``est_error`` sums the final refinement differences.  A single-vertex arc
    has length 0.  Raises ArcExitsDomainError when any sample leaves the
    domain.
    """
    if not isinstance(arc, ArcPolyline):
        arc = ArcPolyline(arc)
    if not 0.0 < tol <= 1e-2:
        raise InvalidInputError("tol must lie in (0, 1e-2]")
    delta = domain.boundary_distance_many(arc.vertices)
    if np.any(delta <= 0):
        raise ArcExitsDomainError("arc vertex outside the domain")
    if arc.n == 1:
        return QhLengthResult(0.0, 0.0)
    vals, errs, _ = segment_qh_lengths(
        domain, arc.vertices[:-1], arc.vertices[1:], tol=tol, raise_on_exit=True
    )
    return QhLengthResult(float(vals.sum()), float(errs.sum()))


def growth_lower_bound(dist, delta_min):
    """log(1 + dist / delta_min): the universal quasihyperbolic lower bound."""
    if delta_min <= 0:
        raise InvalidInputError("delta_min must be positive")
    if dist < 0:
        raise InvalidInputError("dist must be nonnegative")
    return math.log1p(dist / delta_min)


def halfspace_qh_distance(x, y):
    """Exact quasihyperbolic distance in the upper half-space.

    Coincides with the hyperbolic metric: arcosh(1 + |x-y|^2 / (2 x_n y_n)).
    Requires positive last coordinates.
    """
    x = as_point(x)
    y = as_point(y, x.shape[0])
    a, b = x[-1], y[-1]
    if a <= 0 or b <= 0:
        raise InvalidInputError("points must have positive last coordinate")
    t = float(((x - y) ** 2).sum()) / (2.0 * a * b)
    # arcosh(1+t) = log1p(t + sqrt(t (t + 2))), stable for small t
    return math.log1p(t + math.sqrt(t * (t + 2.0)))


def halfspace_k_many(P, Q, axis=-1, offset=0.0):
    """Vectorized half-space distance for (m, n) point arrays."""
    P = np.atleast_2d(np.asarray(P, dtype=float))
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    a = P[:, axis] - offset
    b = Q[:, axis] - offset
    if np.any(a <= 0) or np.any(b <= 0):
        raise InvalidInputError("points must lie above the boundary plane")
    t = ((P - Q) ** 2).sum(axis=1) / (2.0 * a * b)
    return np.log1p(t + np.sqrt(t * (t + 2.0)))


def halfspace_k_eval(domain):
    """Exact pair evaluator bound to a HalfSpace domain's axis and offset."""
    if not isinstance(domain, HalfSpace):
        raise InvalidInputError("exact evaluator requires a HalfSpace domain")
    axis, offset = domain.axis, domain.offset

    def k_eval(P, Q):
        return halfspace_k_many(P, Q, axis=axis, offset=offset)

    return k_eval


def halfspace_geodesic_points(x, y, m=129, axis=-1, offset=0.0):
    """Sample the quasihyperbolic geodesic between half-space points.

    Vertical pairs follow the ray with log-spaced heights; general pairs
    follow the circle orthogonal to the boundary plane inside the vertical
    2-plane through both points.
    """
    x = as_point(x)
    y = as_point(y, x.shape[0])
    if m < 2:
        raise InvalidInputError("need at least 2 sample points")
    ax = axis % x.shape[0]
    hx, hy = x[ax] - offset, y[ax] - offset
    if hx <= 0 or hy <= 0:
        raise InvalidInputError("points must lie above the boundary plane")
    horiz = y - x
    horiz[ax] = 0.0
    s = float(np.linalg.norm(horiz))
    if s < 1e-15 * max(hx, hy):
        heights = np.exp(np.linspace(math.log(hx), math.log(hy), m))
        pts = np.repeat(x[None, :], m, axis=0)
        pts[:, ax] = heights + offset
        return pts
    u = horiz / s
    # 2-d geodesic in (span(u), axis) coordinates: circle centered on the axis
    c = (s * s + hy * hy - hx * hx) / (2.0 * s)
    R = math.hypot(c, hx)
    th0 = math.atan2(hx, -c)
    th1 = math.atan2(hy, s - c)
    th = np.linspace(th0, th1, m)
    horiz_par = c + R * np.cos(th)
    height = R * np.sin(th)
    pts = x[None, :] + horiz_par[:, None] * u[None, :]
    pts[:, ax] = height + offset
    pts[0] = x
    pts[-1] = y
    return pts


def coarse_qh_length(domain, arc, h, k_eval=None, m=64, tol=1e-9):
    """h-coarse quasihyperbolic length of an arc by dynamic programming.

    The arc is resampled into ``m`` successive points; the DP maximizes the
    sum of pairwise distances over ordered subsequences whose consecutive
    distances are >= h.  This is a lower estimate of the true supremum over
    all finite point sequences of the arc.  ``tol`` absorbs floating-point
    equality at the admission threshold.
    """
    if h < 0:
        raise InvalidInputError("h must be nonnegative")
    if not isinstance(arc, ArcPolyline):
        arc = ArcPolyline(arc)
    if k_eval is None:
        k_eval = default_k_eval(domain)
    if arc.n == 1 or arc.length == 0.0:
        return CoarseLengthResult(0.0, float(h), int(m))
    pts = arc.resample(m).vertices
    if np.any(np.diff(np.linalg.norm(np.diff(pts, axis=0), axis=1)) < -arc.length):
        raise InvalidInputError("non-monotone discretization")  # pragma: no cover
    K = pairwise_k_matrix(pts, k_eval)
    value = _coarse_dp(K, h, tol)
    return CoarseLengthResult(float(value), float(h), int(m))


def pairwise_k_matrix(pts, k_eval):
    """Symmetric matrix of k_eval over all ordered point pairs."""
    m = len(pts)
    ii, jj = np.triu_indices(m, k=1)
    vals = np.asarray(k_eval(pts[ii], pts[jj]), dtype=float)
    K = np.zeros((m, m))
    K[ii, jj] = vals
    K[jj, ii] = vals
    return K


def _coarse_dp(K, h, tol=1e-9):
    """Max sum of admissible consecutive pairs over ordered subsequences."""
    m = K.shape[0]
    thresh = h - tol
    neg = -np.inf
    dp = np.full(m, neg)  # best sum of a chain ending at j with >= 1 link
    best = 0.0
    for j in range(1, m):
        col = K[:j, j]
        adm = col >= thresh
        if not np.any(adm):
            continue
        base = np.maximum(dp[:j], 0.0)
        cand = np.where(adm, base + col, neg)
        dp[j] = cand.max()
        if dp[j] > best:
            best = dp[j]
    return best


def coarse_qh_length_all_pairs(domain, arc, h, k_eval=None, m=64, tol=1e-9):
    """Coarse lengths of every resampled subarc, plus the point set and K.

    Returns (points, K, F) where F[i, j] is the h-coarse length of the subarc
    between resample points i and j.  Shared by the solidity estimator.
    """
    if h < 0:
        raise InvalidInputError("h must be nonnegative")
    if not isinstance(arc, ArcPolyline):
        arc = ArcPolyline(arc)
    if k_eval is None:
        k_eval = default_k_eval(domain)
    pts = arc.resample(m).vertices
    K = pairwise_k_matrix(pts, k_eval)
    thresh = h - tol
    neg = -np.inf
    F = np.zeros((m, m))
    for i in range(m):
        dp = np.full(m, neg)
        run = 0.0
        for j in range(i + 1, m):
            col = K[i:j, j]
            adm = col >= thresh
            if np.any(adm):
                base = np.maximum(dp[i:j], 0.0)
                cand = np.where(adm, base + col, neg)
                dp[j] = cand.max()
                if dp[j] > run:
                    run = dp[j]
            F[i, j] = run
    return pts, K, F


def default_k_eval(domain, resolution=None):
    """Default pair evaluator: exact on half-spaces, graph-based elsewhere."""
    if isinstance(domain, HalfSpace):
        return halfspace_k_eval(domain)
    from .paths import build_path_graph, graph_k_eval  # deferred: avoid cycle

    if resolution is None:
        lo, hi = domain.sampling_window
        resolution = max(float(np.max(hi - lo)) / 48.0, 2.5 * domain.delta_floor)
    graph = build_path_graph(domain, resolution, seed=0)
    return graph_k_eval(domain, graph)
