"""Cone/cigar/uniformity/solidity estimators and explicit constant formulas.

Supremum-type constants are reported as lower estimates of the true sup with
their sample counts; acceptance comparisons against them must stay one-sided.
"""

import math
from dataclasses import dataclass

import numpy as np

from .common import LOWER_ESTIMATE_OF_SUP, ConstantEstimate
from .domains import ArcPolyline
from .errors import (
    ArcExitsDomainError,
    InvalidInputError,
    NotConnectedError,
    UndefinedRatioError,
)
from .qh_metric import coarse_qh_length_all_pairs

MIN_CONDITION_POINTS = 128


def _condition_points(arc):
    """Evaluation points along the arc: at least MIN_CONDITION_POINTS."""
    m = max(arc.n, MIN_CONDITION_POINTS)
    res = arc.resample(m)
    return res.vertices, res.cum_lengths


def _prefix_diameters(pts):
    """diam(pts[0..i]) for each i, via incremental farthest updates."""
    m = len(pts)
    out = np.zeros(m)
    cur = 0.0
    for i in range(1, m):
        d = np.linalg.norm(pts[:i] - pts[i], axis=1).max()
        cur = max(cur, d)
        out[i] = cur
    return out


def cone_constant(domain, arc, mode="length", split="endpoints"):
    """Cone-condition constant of an arc, discretized along its points.

    ``mode='length'``: sup of min(len to either endpoint) / delta(z).
    ``mode='diameter'``: arclengths replaced by subarc diameters.
    ``split='max_delta'``: one-sided sups from each endpoint up to the
    delta-maximizing point (the empirical two-sided cone constant of solid
    arcs in uniform domains).  Reported as a lower estimate of the true sup.
    """
    if mode not in ("length", "diameter"):
        raise InvalidInputError(f"unknown mode {mode!r}")
    if split not in ("endpoints", "max_delta"):
        raise InvalidInputError(f"unknown split {split!r}")
    if not isinstance(arc, ArcPolyline):
        arc = ArcPolyline(arc)
    if arc.n < 2 or arc.length == 0.0:
        return 0.0
    pts, cum = _condition_points(arc)
    delta = domain.boundary_distance_many(pts)
    if np.any(delta <= 0):
        raise ArcExitsDomainError("arc point with nonpositive boundary distance")
    if mode == "length":
        fwd = cum
        bwd = cum[-1] - cum
    else:
        fwd = _prefix_diameters(pts)
        bwd = _prefix_diameters(pts[::-1])[::-1]
    if split == "endpoints":
        return float((np.minimum(fwd, bwd) / delta).max())
    i0 = int(np.argmax(delta))
    left = (fwd[: i0 + 1] / delta[: i0 + 1]).max() if i0 >= 0 else 0.0
    right = (bwd[i0:] / delta[i0:]).max()
    return float(max(left, right))


def cigar_constant(arc, mode="length"):
    """Arc length (or diameter) divided by the endpoint distance."""
    if mode not in ("length", "diameter"):
        raise InvalidInputError(f"unknown mode {mode!r}")
    if not isinstance(arc, ArcPolyline):
        arc = ArcPolyline(arc)
    x, y = arc.endpoints
    d = float(np.linalg.norm(x - y))
    if d == 0.0:
        raise UndefinedRatioError("cigar constant undefined for coincident endpoints")
    num = arc.length if mode == "length" else arc.diameter()
    return float(num / d)


def _cone_cigar_objective(domain, arc):
    return max(cone_constant(domain, arc), cigar_constant(arc))


def _objective_on_points(domain, V):
    """max(cone, cigar) on a raw vertex array, without resampling."""
    seg = np.linalg.norm(np.diff(V, axis=0), axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    total = cum[-1]
    d = np.linalg.norm(V[0] - V[-1])
    if d == 0 or total == 0:
        return np.inf
    delta = domain.boundary_distance_many(V)
    if np.any(delta <= 0):
        return np.inf
    cone = float((np.minimum(cum, total - cum) / delta).max())
    return max(cone, total / d)


def _refine_for_uniformity(domain, arc, sweeps=10, m=40):
    """Coordinate descent on max(cone, cigar) starting from a candidate arc."""
    from ._grid import segment_interior_mask

    if arc.n < 3 or arc.length == 0:
        return arc
    work = arc.resample(m) if arc.n > m else arc
    V = work.vertices.copy()
    best = _objective_on_points(domain, V)
    for _ in range(sweeps):
        moved = False
        for parity in (1, 0):
            ids = np.arange(1, len(V) - 1)
            ids = ids[ids % 2 == parity]
            for i in ids:
                prev, cur, nxt = V[i - 1], V[i], V[i + 1]
                mid = 0.5 * (prev + nxt)
                d = nxt - prev
                if len(d) == 2:
                    nrm = np.array([-d[1], d[0]])
                else:
                    nrm = cur - mid
                nn = np.linalg.norm(nrm)
                nrm = nrm / nn if nn > 0 else nrm
                alpha = 0.3 * min(
                    np.linalg.norm(cur - prev), np.linalg.norm(nxt - cur)
                )
                for cand in (mid, cur + alpha * nrm, cur - alpha * nrm,
                             cur + 0.25 * alpha * nrm, cur - 0.25 * alpha * nrm):
                    if domain.boundary_distance(cand) <= 0:
                        continue
                    ok = segment_interior_mask(
                        domain, np.vstack([prev, cand]), np.vstack([cand, nxt]), 9
                    )
                    if not ok.all():
                        continue
                    old = V[i].copy()
                    V[i] = cand
                    val = _objective_on_points(domain, V)
                    if val < best * (1 - 1e-12):
                        best = val
                        moved = True
                        break
                    V[i] = old
        if not moved:
            break
    return ArcPolyline(V)


def uniformity_estimate(domain, pairs, resolution, seed=0, graph=None,
                        shorten_iterations=120):
    """Double-cone constant estimate over a family of point pairs.

    Per pair the best candidate arc (the quasihyperbolic shortest arc plus a
    cone/cigar descent refinement of it) gives an upper estimate; the max
    over pairs is a lower estimate of the domain constant.  Disconnected
    pairs are recorded and skipped, never fatal to the batch.
    """
    from .paths import build_path_graph, qh_shortest_arc

    pairs = [(np.asarray(x, float), np.asarray(y, float)) for x, y in pairs]
    if graph is None:
        graph = build_path_graph(domain, resolution, seed=seed)
    best_over_pairs = 0.0
    skipped = 0
    used = 0
    for x, y in pairs:
        if np.array_equal(x, y):
            skipped += 1
            continue
        cands = []
        try:
            res = qh_shortest_arc(
                domain, graph, x, y, shorten_iterations=shorten_iterations
            )
            cands.append(res.arc)
        except NotConnectedError:
            skipped += 1
            continue
        except InvalidInputError:
            skipped += 1
            continue
        cands.append(_refine_for_uniformity(domain, cands[0]))
        pair_val = math.inf
        for cand in cands:
            try:
                pair_val = min(pair_val, _cone_cigar_objective(domain, cand))
            except (ArcExitsDomainError, UndefinedRatioError):
                continue
        if math.isfinite(pair_val):
            best_over_pairs = max(best_over_pairs, pair_val)
            used += 1
        else:
            skipped += 1
    return ConstantEstimate(
        value=best_over_pairs,
        samples=used,
        seed=seed,
        sidedness=LOWER_ESTIMATE_OF_SUP,
        skipped=skipped,
    )


@dataclass(frozen=True)
class SolidityEstimate:
    nu_hat: float
    h: float
    pairs_checked: int


def solidity_estimate(domain, arc, h, k_eval, m=48):
    """Largest ratio of h-coarse subarc length to endpoint distance.

    Discretizes the arc into ``m`` points and checks every ordered pair,
    skipping pairs whose coarse length vanishes; returns nu_hat = 0 when all
    of them vanish.
    """
    if h < 0:
        raise InvalidInputError("h must be nonnegative")
    if not isinstance(arc, ArcPolyline):
        arc = ArcPolyline(arc)
    if arc.n < 2 or arc.length == 0.0:
        return SolidityEstimate(0.0, float(h), 0)
    pts, K, F = coarse_qh_length_all_pairs(domain, arc, h, k_eval, m=m)
    nu = 0.0
    checked = 0
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            checked += 1
            if F[i, j] <= 0.0:
                continue
            kij = K[i, j]
            if kij <= 0.0:
                continue
            nu = max(nu, F[i, j] / kij)
    return SolidityEstimate(float(nu), float(h), checked)


def mu1_bound(c, nu, h, r, dist):
    """Diameter bound for solid arcs with deep endpoints.

    max(6c (e^{2 nu} - 1) dist, 2 r (e^h - 1)); the caller enforces the
    hypothesis r >= 3 c dist.
    """
    if c < 1 or nu < 1 or h < 0:
        raise InvalidInputError("require c >= 1, nu >= 1, h >= 0")
    return max(6.0 * c * math.expm1(2.0 * nu) * dist, 2.0 * r * math.expm1(h))


def uniform_k_bound(b, dist, delta_min):
    """Quasihyperbolic upper bound in a b-uniform domain: 4 b^2 log(1 + ...)."""
    if b < 1:
        raise InvalidInputError("uniformity constant must be >= 1")
    if delta_min <= 0:
        raise InvalidInputError("delta_min must be positive")
    return 4.0 * b * b * math.log1p(dist / delta_min)


def mu3_constant(c, b, nu, h, mu2):
    """Diameter-cigar constant for solid arcs in uniform domains.

    (3/4) [1 + 2 (1 + 6c) (e^{h + 4 b^2 nu log(1 + 4 mu2)} - 1)], evaluated
    with the exponent formed in log-domain; returns +inf when the exponent
    exceeds the double range.
    """
    if c < 1 or b < 1 or nu < 1 or h < 0 or mu2 < 0:
        raise InvalidInputError("inputs below their defining lower bounds")
    expo = h + 4.0 * b * b * nu * math.log1p(4.0 * mu2)
    if expo > 700.0:
        return math.inf
    return 0.75 * (1.0 + 2.0 * (1.0 + 6.0 * c) * math.expm1(expo))
