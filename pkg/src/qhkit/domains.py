"""Domain catalog, boundary-distance oracles, interior sampling and arcs.

Every domain is an open proper subset of Euclidean R^n (n in {2, 3}) given by
a vectorized boundary-distance oracle ``boundary_distance_many``.  Exterior
points report a nonpositive distance so samplers can reject cheaply.  Domains
and arcs are immutable after construction; every operation is a pure function
of its arguments plus an explicit seed.
"""

import json

import numpy as np

from .errors import (
    ArcExitsDomainError,
    InvalidInputError,
    NotConnectedError,
    SamplingExhaustedError,
)


def as_point(p, dim=None):
    """Validate and convert a point to a 1-d float array."""
    a = np.asarray(p, dtype=float)
    if a.ndim != 1:
        raise InvalidInputError(f"point must be 1-d, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInputError("point has non-finite coordinates")
    if dim is not None and a.shape[0] != dim:
        raise InvalidInputError(f"expected dimension {dim}, got {a.shape[0]}")
    if a.shape[0] not in (2, 3):
        raise InvalidInputError("only dimensions 2 and 3 are supported")
    return a


def _readonly(a):
    a = np.array(a, dtype=float, order="C", copy=True)
    a.setflags(write=False)
    return a


def segment_point_distances(pts, a, b):
    """Distance from each point in ``pts`` to the segment [a, b]."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    d = b - a
    den = float(d @ d)
    if den == 0.0:
        return np.linalg.norm(pts - a, axis=1)
    t = np.clip((pts - a) @ d / den, 0.0, 1.0)
    proj = a + t[:, None] * d
    return np.linalg.norm(pts - proj, axis=1)


def point_to_segments_distance(p, A, B):
    """Distance from a fixed point to each segment [A_i, B_i]."""
    p = np.asarray(p, dtype=float)
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    d = B - A
    den = np.einsum("ij,ij->i", d, d)
    safe = np.where(den == 0, 1.0, den)
    t = np.clip(np.einsum("ij,ij->i", p[None, :] - A, d) / safe, 0.0, 1.0)
    proj = A + t[:, None] * d
    return np.linalg.norm(p[None, :] - proj, axis=1)


def _orient(p, q, r):
    # 2-d orientation of triple, vectorized over leading axis
    return (q[..., 0] - p[..., 0]) * (r[..., 1] - p[..., 1]) - (
        q[..., 1] - p[..., 1]
    ) * (r[..., 0] - p[..., 0])


def segments_cross(A, B, c, d, eps=1e-12):
    """True where segment [A_i, B_i] meets the fixed segment [c, d] (2-d).

    Touching counts as crossing: the obstacle segment is part of the boundary,
    so any contact makes the mover's segment leave the open domain.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    c = np.asarray(c, dtype=float)
    d = np.asarray(d, dtype=float)
    scale = max(float(np.linalg.norm(d - c)), 1.0)
    o1 = _orient(A, B, c[None, :])
    o2 = _orient(A, B, d[None, :])
    o3 = _orient(c[None, :], d[None, :], A)
    o4 = _orient(c[None, :], d[None, :], B)
    proper = (o1 * o2 < 0) & (o3 * o4 < 0)
    # touching / collinear contact: for non-crossing planar segments the
    # minimum distance is attained at an endpoint of one of them
    tol = eps * scale
    near = np.minimum(
        np.minimum(segment_point_distances(A, c, d), segment_point_distances(B, c, d)),
        np.minimum(point_to_segments_distance(c, A, B), point_to_segments_distance(d, A, B)),
    )
    return proper | (near <= tol)


class Domain:
    """Base class for the domain catalog.

    Subclasses implement ``boundary_distance_many``; everything else
    (membership, sampling helpers) derives from it.
    """

    kind = "abstract"

    def __init__(self, window_lo, window_hi, delta_floor=None):
        lo = _readonly(window_lo)
        hi = _readonly(window_hi)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise InvalidInputError("sampling window must be two equal-shape vectors")
        if lo.shape[0] not in (2, 3):
            raise InvalidInputError("only dimensions 2 and 3 are supported")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi)) and np.all(hi > lo)):
            raise InvalidInputError("sampling window must be finite and nonempty")
        self._lo = lo
        self._hi = hi
        if delta_floor is None:
            delta_floor = 1e-3 * self.scale
        if delta_floor <= 0:
            raise InvalidInputError("delta_floor must be positive")
        self.delta_floor = float(delta_floor)

    @property
    def dim(self):
        return self._lo.shape[0]

    @property
    def sampling_window(self):
        return self._lo, self._hi

    @property
    def scale(self):
        return float(np.linalg.norm(self._hi - self._lo))

    def boundary_distance_many(self, pts):
        raise NotImplementedError

    def boundary_distance(self, p):
        """Distance from p to the domain boundary; <= 0 signals exterior."""
        p = as_point(p, self.dim)
        return float(self.boundary_distance_many(p[None, :])[0])

    def contains(self, p):
        return self.boundary_distance(p) > 0.0

    def segment_blocked_many(self, A, B):
        """Exact obstruction test for lower-dimensional boundary pieces.

        The default catalog boundary (spheres, planes, polygons) is detected
        by sampled boundary distances; only slit/puncture obstacles override.
        """
        A = np.atleast_2d(A)
        return np.zeros(len(A), dtype=bool)

    def params_dict(self):
        raise NotImplementedError

    def spec_dict(self):
        lo, hi = self.sampling_window
        return {
            "kind": self.kind,
            "params": self.params_dict(),
            "window": [list(map(float, lo)), list(map(float, hi))],
            "delta_floor": float(self.delta_floor),
        }


class Ball(Domain):
    kind = "ball"

    def __init__(self, center, radius, window=None, delta_floor=None):
        center = as_point(center)
        if radius <= 0:
            raise InvalidInputError("radius must be positive")
        self.center = _readonly(center)
        self.radius = float(radius)
        if window is None:
            window = (center - radius, center + radius)
        super().__init__(window[0], window[1], delta_floor)
        if delta_floor is None:
            self.delta_floor = 1e-3 * self.radius

    def boundary_distance_many(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return self.radius - np.linalg.norm(pts - self.center, axis=1)

    def params_dict(self):
        return {"center": list(map(float, self.center)), "radius": self.radius}


class HalfSpace(Domain):
    """Points with coordinate ``axis`` strictly above ``offset``."""

    kind = "half_space"

    def __init__(self, axis, offset=0.0, window=None, delta_floor=None):
        if window is None:
            raise InvalidInputError("half-space requires an explicit sampling window")
        self.axis = int(axis)
        self.offset = float(offset)
        super().__init__(window[0], window[1], delta_floor)
        if not 0 <= self.axis < self.dim:
            raise InvalidInputError("normal axis index out of range")

    def boundary_distance_many(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return pts[:, self.axis] - self.offset

    def params_dict(self):
        return {"axis": self.axis, "offset": self.offset}


class PuncturedBall(Ball):
    kind = "punctured_ball"

    def __init__(self, center, radius, puncture, window=None, delta_floor=None):
        super().__init__(center, radius, window, delta_floor)
        puncture = as_point(puncture, self.dim)
        if np.linalg.norm(puncture - self.center) >= radius:
            raise InvalidInputError("puncture must lie inside the ball")
        self.puncture = _readonly(puncture)

    def boundary_distance_many(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        ball = super().boundary_distance_many(pts)
        return np.minimum(ball, np.linalg.norm(pts - self.puncture, axis=1))

    def segment_blocked_many(self, A, B):
        tol = 1e-12 * self.radius
        return point_to_segments_distance(self.puncture, A, B) <= tol

    def params_dict(self):
        d = super().params_dict()
        d["puncture"] = list(map(float, self.puncture))
        return d


class SlitDisk(Domain):
    """Disk minus a closed slit segment; the 2-d counterexample domain."""

    kind = "slit_disk"

    def __init__(self, center, radius, slit, window=None, delta_floor=None):
        center = as_point(center, 2)
        if radius <= 0:
            raise InvalidInputError("radius must be positive")
        self.center = _readonly(center)
        self.radius = float(radius)
        p0 = as_point(slit[0], 2)
        p1 = as_point(slit[1], 2)
        if np.allclose(p0, p1):
            raise InvalidInputError("slit must have distinct endpoints")
        self.slit = (_readonly(p0), _readonly(p1))
        if window is None:
            window = (center - radius, center + radius)
        super().__init__(window[0], window[1], delta_floor)
        if delta_floor is None:
            self.delta_floor = 1e-3 * self.radius

    def boundary_distance_many(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        circ = self.radius - np.linalg.norm(pts - self.center, axis=1)
        slit = segment_point_distances(pts, self.slit[0], self.slit[1])
        return np.minimum(circ, slit)

    def segment_blocked_many(self, A, B):
        return segments_cross(A, B, self.slit[0], self.slit[1])

    def params_dict(self):
        return {
            "center": list(map(float, self.center)),
            "radius": self.radius,
            "slit": [list(map(float, self.slit[0])), list(map(float, self.slit[1]))],
        }


class CustomDomain(Domain):
    """2-d domain bounded by an ordered simple closed loop of boundary samples.

    The boundary-distance error is bounded by the sampling spacing of the
    loop; ``cloud_spacing`` is carried so reports can state it.  Distance
    queries search only the segments adjacent to the nearest loop vertex
    (valid for simple loops sampled finely relative to their curvature); the
    sign comes from the loop orientation, normalized counterclockwise.
    """

    kind = "custom"
    _WINDOW = 4  # candidate segments on each side of the nearest vertex

    def __init__(self, boundary_loop, window=None, delta_floor=None):
        loop = np.asarray(boundary_loop, dtype=float)
        if loop.ndim != 2 or loop.shape[1] != 2 or loop.shape[0] < 3:
            raise InvalidInputError("boundary loop must be (m, 2) with m >= 3")
        if not np.all(np.isfinite(loop)):
            raise InvalidInputError("boundary loop has non-finite coordinates")
        area2 = float(
            np.sum(loop[:, 0] * np.roll(loop[:, 1], -1) - np.roll(loop[:, 0], -1) * loop[:, 1])
        )
        if area2 < 0:
            loop = loop[::-1]
        self.boundary = _readonly(loop)
        self._seg_a = np.asarray(loop)
        self._seg_d = np.roll(loop, -1, axis=0) - loop
        den = np.einsum("ij,ij->i", self._seg_d, self._seg_d)
        self._seg_den = np.where(den == 0, 1.0, den)
        from scipy.spatial import cKDTree

        self._tree = cKDTree(loop)
        self.cloud_spacing = float(np.sqrt(den.max()))
        if window is None:
            pad = 0.05 * (loop.max(0) - loop.min(0)).max()
            window = (loop.min(0) - pad, loop.max(0) + pad)
        super().__init__(window[0], window[1], delta_floor)

    def boundary_distance_many(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        n_seg = len(self._seg_a)
        _, idx = self._tree.query(pts, k=1)
        offs = np.arange(-self._WINDOW, self._WINDOW + 1)
        segi = (idx[:, None] + offs[None, :]) % n_seg
        a = self._seg_a[segi]
        d = self._seg_d[segi]
        den = self._seg_den[segi]
        rel = pts[:, None, :] - a
        t = np.clip(np.einsum("mkj,mkj->mk", rel, d) / den, 0.0, 1.0)
        diff = rel - t[:, :, None] * d
        dist2 = np.einsum("mkj,mkj->mk", diff, diff)
        win = np.argmin(dist2, axis=1)
        rows = np.arange(len(pts))
        dw = d[rows, win]
        diffw = diff[rows, win]
        cross = dw[:, 0] * diffw[:, 1] - dw[:, 1] * diffw[:, 0]
        dist = np.sqrt(dist2[rows, win])
        return np.where(cross >= 0, dist, -dist)

    def params_dict(self):
        return {
            "boundary": [list(map(float, p)) for p in self.boundary],
            "cloud_spacing": self.cloud_spacing,
        }


_DOMAIN_KINDS = {}
for _cls in (Ball, HalfSpace, PuncturedBall, SlitDisk, CustomDomain):
    _DOMAIN_KINDS[_cls.kind] = _cls


def domain_from_spec(spec):
    """Build a domain from its JSON specification object."""
    if isinstance(spec, str):
        spec = json.loads(spec)
    try:
        kind = spec["kind"]
        params = spec.get("params", {})
        window = spec.get("window")
        if window is not None:
            window = (np.asarray(window[0], float), np.asarray(window[1], float))
        floor = spec.get("delta_floor")
        if kind == "ball":
            return Ball(params["center"], params["radius"], window, floor)
        if kind == "half_space":
            return HalfSpace(params["axis"], params.get("offset", 0.0), window, floor)
        if kind == "punctured_ball":
            return PuncturedBall(
                params["center"], params["radius"], params["puncture"], window, floor
            )
        if kind == "slit_disk":
            return SlitDisk(
                params["center"], params["radius"], params["slit"], window, floor
            )
        if kind == "custom":
            return CustomDomain(params["boundary"], window, floor)
    except (KeyError, TypeError, IndexError) as exc:
        raise InvalidInputError(f"malformed domain spec: {exc}") from exc
    raise InvalidInputError(f"unknown domain kind {spec.get('kind')!r}")


def sample_interior(domain, n, seed, floor=None):
    """Rejection-sample n interior points with boundary distance >= floor.

    Deterministic for fixed (domain, n, seed, floor).  Raises
    SamplingExhaustedError when the acceptance rate drops below 1e-4 over the
    trial budget.
    """
    if n < 0:
        raise InvalidInputError("n must be nonnegative")
    if floor is None:
        floor = domain.delta_floor
    if floor < domain.delta_floor:
        raise InvalidInputError("floor must be at least the domain delta_floor")
    lo, hi = domain.sampling_window
    rng = np.random.default_rng(seed)
    out = np.empty((n, domain.dim), dtype=float)
    got = 0
    trials = 0
    while got < n:
        batch = max(4 * (n - got), 256)
        pts = rng.uniform(lo, hi, size=(batch, domain.dim))
        ok = domain.boundary_distance_many(pts) >= floor
        take = pts[ok][: n - got]
        out[got : got + len(take)] = take
        got += len(take)
        trials += batch
        if trials >= 200_000 and got / trials < 1e-4:
            raise SamplingExhaustedError(
                f"acceptance rate {got/trials:.2e} below 1e-4 after {trials} trials"
            )
    return out


class ArcPolyline:
    """Ordered polyline with cached cumulative Euclidean lengths."""

    def __init__(self, vertices):
        v = np.atleast_2d(np.asarray(vertices, dtype=float))
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] not in (2, 3):
            raise InvalidInputError("vertices must be (m>=1, 2 or 3)")
        if not np.all(np.isfinite(v)):
            raise InvalidInputError("vertices have non-finite coordinates")
        self.vertices = _readonly(v)
        seg = np.linalg.norm(np.diff(v, axis=0), axis=1)
        self.segment_lengths = _readonly(seg)
        self.cum_lengths = _readonly(np.concatenate([[0.0], np.cumsum(seg)]))

    @property
    def n(self):
        return self.vertices.shape[0]

    @property
    def dim(self):
        return self.vertices.shape[1]

    @property
    def length(self):
        return float(self.cum_lengths[-1])

    @property
    def endpoints(self):
        return self.vertices[0], self.vertices[-1]

    def diameter(self):
        """Max pairwise distance; attained at vertices for polylines."""
        v = self.vertices
        if len(v) == 1:
            return 0.0
        d2 = ((v[:, None, :] - v[None, :, :]) ** 2).sum(-1)
        return float(np.sqrt(d2.max()))

    def subarc(self, i, j):
        if not (0 <= i <= j < self.n):
            raise InvalidInputError("subarc indices out of range")
        return ArcPolyline(self.vertices[i : j + 1])

    def point_at(self, s):
        """Point at arclength s (clamped to [0, length])."""
        s = float(np.clip(s, 0.0, self.length))
        k = int(np.searchsorted(self.cum_lengths, s, side="right") - 1)
        k = min(k, self.n - 2) if self.n > 1 else 0
        if self.n == 1 or self.segment_lengths[k] == 0:
            return self.vertices[k].copy()
        t = (s - self.cum_lengths[k]) / self.segment_lengths[k]
        return self.vertices[k] + t * (self.vertices[k + 1] - self.vertices[k])

    def resample(self, m):
        """Equal-arclength resampling with exact endpoints, m >= 2 points."""
        if m < 2:
            raise InvalidInputError("resample needs m >= 2")
        if self.length == 0:
            return ArcPolyline(np.repeat(self.vertices[:1], m, axis=0))
        s = np.linspace(0.0, self.length, m)
        pts = np.array([self.point_at(si) for si in s])
        pts[0] = self.vertices[0]
        pts[-1] = self.vertices[-1]
        return ArcPolyline(pts)

    def reverse(self):
        return ArcPolyline(self.vertices[::-1])

    def to_json(self):
        return json.dumps([list(map(float, p)) for p in self.vertices])

    @classmethod
    def from_json(cls, text):
        return cls(json.loads(text))


def require_interior(domain, arc_or_pts, floor=0.0):
    """Raise ArcExitsDomainError unless all points have delta > floor."""
    pts = arc_or_pts.vertices if isinstance(arc_or_pts, ArcPolyline) else arc_or_pts
    delta = domain.boundary_distance_many(pts)
    if np.any(delta <= floor):
        raise ArcExitsDomainError(
            f"point with boundary distance {delta.min():.3e} <= {floor:.3e}"
        )
    return delta


def _drop_even_pass(domain, V, spacing):
    """One vectorized vertex-removal pass: drop alternate interior vertices
    whose bridging segment stays inside the domain."""
    from ._grid import segment_interior_mask

    if len(V) < 3:
        return V, False
    ids = np.arange(1, len(V) - 1)[::2]
    ns = max(9, int(np.ceil(np.linalg.norm(V[ids + 1] - V[ids - 1], axis=1).max() / spacing)) + 1)
    ok = segment_interior_mask(domain, V[ids - 1], V[ids + 1], min(ns, 512))
    drop = np.zeros(len(V), dtype=bool)
    # removals must not share a surviving neighbor; alternate ids guarantee it
    drop[ids[ok]] = True
    if not drop.any():
        return V, False
    return V[~drop], True


def _euclid_smooth(domain, V, sweeps, spacing, step_frac=0.3):
    """Midpoint / normal-perturbation descent on Euclidean length."""
    from ._grid import segment_interior_mask

    if len(V) < 3:
        return V
    V = V.copy()
    for _ in range(sweeps):
        moved_any = False
        for parity in (1, 0):
            ids = np.arange(1, len(V) - 1)
            ids = ids[ids % 2 == parity]
            if not len(ids):
                continue
            prev, cur, nxt = V[ids - 1], V[ids], V[ids + 1]
            base = np.linalg.norm(cur - prev, axis=1) + np.linalg.norm(nxt - cur, axis=1)
            mid = 0.5 * (prev + nxt)
            d = nxt - prev
            if V.shape[1] == 2:
                nrm = np.stack([-d[:, 1], d[:, 0]], axis=1)
            else:
                nrm = cur - mid
            nn = np.linalg.norm(nrm, axis=1, keepdims=True)
            nrm = np.where(nn > 0, nrm / np.maximum(nn, 1e-300), 0.0)
            alpha = step_frac * np.minimum(
                np.linalg.norm(cur - prev, axis=1), np.linalg.norm(nxt - cur, axis=1)
            )[:, None]
            # step ladder: large steps get blocked near obstacles, small ones settle
            cands = [mid]
            for scale in (1.0, 0.25, 0.0625):
                cands += [cur + scale * alpha * nrm, cur - scale * alpha * nrm]
            best_cost = base.copy()
            best_pos = cur.copy()
            for cand in cands:
                cost = np.linalg.norm(cand - prev, axis=1) + np.linalg.norm(nxt - cand, axis=1)
                better = cost < best_cost * (1.0 - 1e-12)
                if np.any(better):
                    ok = segment_interior_mask(domain, prev[better], cand[better], 9)
                    ok &= segment_interior_mask(domain, cand[better], nxt[better], 9)
                    ok &= domain.boundary_distance_many(cand[better]) > 0
                    sel = np.nonzero(better)[0][ok]
                    best_pos[sel] = cand[sel]
                    best_cost[sel] = cost[sel]
            gain = base - best_cost
            moved = gain > 0
            if np.any(moved):
                V[ids[moved]] = best_pos[moved]
                moved_any = True
        if not moved_any:
            break
    return V


def euclidean_shortest_arc(domain, x, y, resolution):
    """In-domain shortest arc upper bound on a grid graph, then local descent.

    Returns (arc, length); length / |x - y| estimates the quasiconvexity
    constant of the domain for this pair.  Raises NotConnectedError when the
    endpoints lie in different graph components.
    """
    from . import _grid

    x = as_point(x, domain.dim)
    y = as_point(y, domain.dim)
    if domain.boundary_distance(x) < domain.delta_floor or \
            domain.boundary_distance(y) < domain.delta_floor:
        raise InvalidInputError("endpoints must be interior with delta >= delta_floor")
    if np.array_equal(x, y):
        arc = ArcPolyline(x[None, :])
        return arc, 0.0

    nodes = _grid.grid_nodes(domain, resolution)
    ii, jj = _grid.neighbor_pairs(nodes, 1.5 * resolution)
    ok = _grid.segment_interior_mask(domain, nodes[ii], nodes[jj], 9)
    ii, jj = ii[ok], jj[ok]
    ww = np.linalg.norm(nodes[ii] - nodes[jj], axis=1)
    indptr, nbr, wts = _grid.csr_from_pairs(len(nodes), ii, jj, ww)

    si, _ = _grid.nearest_visible_node(domain, nodes, x, 1.0000001 * resolution)
    ti, _ = _grid.nearest_visible_node(domain, nodes, y, 1.0000001 * resolution)
    if si is None or ti is None:
        raise InvalidInputError("no graph node within one resolution of an endpoint")
    dist, pred = _grid.dijkstra(indptr, nbr, wts, si, ti)
    if not np.isfinite(dist[ti]):
        raise NotConnectedError("endpoints lie in different graph components")
    path = _grid.extract_path(pred, si, ti)
    V = np.vstack([x[None, :], nodes[path], y[None, :]])
    keep = np.concatenate([[True], np.linalg.norm(np.diff(V, axis=0), axis=1) > 1e-14])
    V = V[keep]

    spacing = max(resolution / 4.0, domain.delta_floor)
    for _ in range(3):
        for _ in range(32):
            V, changed = _drop_even_pass(domain, V, spacing)
            if not changed:
                break
        V = _euclid_smooth(domain, V, sweeps=60, spacing=spacing)
    arc = ArcPolyline(V)
    return arc, arc.length
