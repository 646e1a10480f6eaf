"""Internal grid-graph machinery shared by Euclidean and quasihyperbolic paths."""

import heapq

import numpy as np
from scipy.spatial import cKDTree

from .errors import DegenerateDomainError, NotConnectedError


def grid_nodes(domain, resolution, jitter=0.0, seed=0):
    """Interior node set: regular grid plus half-spacing boundary grading.

    Base nodes sit on a regular grid over the sampling window; wherever the
    boundary distance falls below 4 x resolution, nodes of the half-spacing
    grid are added.  All nodes satisfy delta >= delta_floor.  Ordering is
    deterministic: base grid row-major, then refinement row-major.
    """
    lo, hi = domain.sampling_window
    dim = domain.dim

    def axis_points(step):
        return [np.arange(lo[d], hi[d] + 0.5 * step, step) for d in range(dim)]

    def mesh(step):
        axes = axis_points(step)
        grids = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    base = mesh(resolution)
    delta = domain.boundary_distance_many(base)
    keep = delta >= domain.delta_floor
    nodes = [base[keep]]

    fine = mesh(resolution / 2.0)
    # drop points already on the base lattice (even multiples of half step)
    idx = np.rint((fine - lo) / (resolution / 2.0)).astype(np.int64)
    on_base = np.all(idx % 2 == 0, axis=1)
    fine = fine[~on_base]
    dfine = domain.boundary_distance_many(fine)
    keep_fine = (dfine >= domain.delta_floor) & (dfine < 4.0 * resolution)
    nodes.append(fine[keep_fine])

    out = np.vstack(nodes)
    if jitter > 0.0:
        rng = np.random.default_rng(seed)
        out = out + rng.uniform(-jitter, jitter, size=out.shape) * resolution
        d = domain.boundary_distance_many(out)
        out = out[d >= domain.delta_floor]
    if len(out) == 0:
        raise DegenerateDomainError("no interior grid nodes at this resolution")
    return np.ascontiguousarray(out)


def neighbor_pairs(nodes, radius):
    """Index pairs (i < j) within ``radius``, lexicographically sorted."""
    tree = cKDTree(nodes)
    pairs = tree.query_pairs(radius, output_type="ndarray")
    if len(pairs) == 0:
        return np.empty(0, np.int64), np.empty(0, np.int64)
    order = np.lexsort((pairs[:, 1], pairs[:, 0]))
    pairs = pairs[order]
    return pairs[:, 0], pairs[:, 1]


def segment_interior_mask(domain, A, B, n_samples=9):
    """Sampled interiority of segments: all probe deltas positive, unblocked."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    t = np.linspace(0.0, 1.0, n_samples)
    pts = A[:, None, :] + t[None, :, None] * (B - A)[:, None, :]
    delta = domain.boundary_distance_many(pts.reshape(-1, A.shape[1]))
    ok = np.all(delta.reshape(len(A), n_samples) > 0.0, axis=1)
    if np.any(ok):
        blocked = domain.segment_blocked_many(A[ok], B[ok])
        ok[np.nonzero(ok)[0][blocked]] = False
    return ok


def csr_from_pairs(n_nodes, ii, jj, ww):
    """Undirected adjacency in CSR form from i<j edge triples."""
    src = np.concatenate([ii, jj])
    dst = np.concatenate([jj, ii])
    wts = np.concatenate([ww, ww])
    order = np.lexsort((dst, src))
    src, dst, wts = src[order], dst[order], wts[order]
    indptr = np.zeros(n_nodes + 1, dtype=np.int64)
    np.add.at(indptr, src + 1, 1)
    np.cumsum(indptr, out=indptr)
    return indptr, dst.astype(np.int64), wts.astype(float)


def dijkstra(indptr, nbr, wts, source, target=None):
    """Deterministic least-weight search; ties pop the smaller node index.

    Returns (dist, pred) arrays.  When ``target`` is given the search stops
    once the target is settled.
    """
    n = len(indptr) - 1
    dist = np.full(n, np.inf)
    pred = np.full(n, -1, dtype=np.int64)
    done = np.zeros(n, dtype=bool)
    dist[source] = 0.0
    heap = [(0.0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        if target is not None and u == target:
            break
        for e in range(indptr[u], indptr[u + 1]):
            v = nbr[e]
            nd = d + wts[e]
            if nd < dist[v]:
                dist[v] = nd
                pred[v] = u
                heapq.heappush(heap, (nd, v))
    return dist, pred


def extract_path(pred, source, target):
    if source == target:
        return [source]
    path = [target]
    u = target
    while u != source:
        u = int(pred[u])
        if u < 0:
            raise NotConnectedError("endpoints are not connected in the graph")
        path.append(u)
    path.reverse()
    return path


def nearest_visible_node(domain, nodes, p, max_dist, k=8):
    """Nearest node with an interior connecting segment; ties by index.

    Returns (index, distance) or (None, inf) when no candidate qualifies
    within ``max_dist``.
    """
    d = np.linalg.norm(nodes - p[None, :], axis=1)
    order = np.argsort(d, kind="stable")[:k]
    for idx in order:
        if d[idx] > max_dist:
            break
        if d[idx] == 0.0:
            return int(idx), 0.0
        if segment_interior_mask(domain, p[None, :], nodes[idx][None, :], 17)[0]:
            return int(idx), float(d[idx])
    return None, np.inf
