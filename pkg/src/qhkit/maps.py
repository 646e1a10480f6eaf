"""Map catalog and distortion estimators: weak quasisymmetry, eta-envelopes,
coarse quasihyperbolic constants, chain construction and image bounds.

All estimators are pure given a seed; triple sampling derives independent
streams from the base seed by fixed offsets.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .common import LOWER_ESTIMATE_OF_SUP, ConstantEstimate
from .domains import ArcPolyline, as_point, domain_from_spec, sample_interior
from .errors import InvalidInputError


class MapSpec:
    """Base class: a homeomorphism with declared source and target domains."""

    kind = "abstract"

    def __init__(self, domain=None, codomain=None):
        self.domain = domain
        self.codomain = codomain

    def apply_many(self, pts):
        raise NotImplementedError

    def __call__(self, p):
        p = np.asarray(p, dtype=float)
        if p.ndim == 1:
            return self.apply_many(p[None, :])[0]
        return self.apply_many(p)

    def inverse(self):
        raise InvalidInputError(f"{self.kind} has no inverse in the catalog")

    def params_dict(self):
        return {}

    def spec_dict(self):
        out = {"kind": self.kind, "params": self.params_dict()}
        if self.domain is not None:
            out["domain"] = self.domain.spec_dict()
        if self.codomain is not None:
            out["codomain"] = self.codomain.spec_dict()
        return out


class Identity(MapSpec):
    kind = "identity"

    def apply_many(self, pts):
        return np.array(pts, dtype=float, copy=True)

    def inverse(self):
        return Identity(self.codomain, self.domain)


class Translation(MapSpec):
    kind = "translation"

    def __init__(self, vector, domain=None, codomain=None):
        super().__init__(domain, codomain)
        self.vector = as_point(vector)

    def apply_many(self, pts):
        return np.asarray(pts, dtype=float) + self.vector

    def inverse(self):
        return Translation(-self.vector, self.codomain, self.domain)

    def params_dict(self):
        return {"vector": list(map(float, self.vector))}


class Scaling(MapSpec):
    kind = "scaling"

    def __init__(self, factor, domain=None, codomain=None):
        super().__init__(domain, codomain)
        if factor <= 0:
            raise InvalidInputError("scaling factor must be positive")
        self.factor = float(factor)

    def apply_many(self, pts):
        return self.factor * np.asarray(pts, dtype=float)

    def inverse(self):
        return Scaling(1.0 / self.factor, self.codomain, self.domain)

    def params_dict(self):
        return {"factor": self.factor}


class Linear(MapSpec):
    kind = "linear"

    def __init__(self, matrix, domain=None, codomain=None):
        super().__init__(domain, codomain)
        M = np.asarray(matrix, dtype=float)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise InvalidInputError("matrix must be square")
        if abs(np.linalg.det(M)) < 1e-14:
            raise InvalidInputError("matrix must be invertible")
        self.matrix = M

    def apply_many(self, pts):
        return np.asarray(pts, dtype=float) @ self.matrix.T

    def inverse(self):
        return Linear(np.linalg.inv(self.matrix), self.codomain, self.domain)

    def params_dict(self):
        return {"matrix": [list(map(float, row)) for row in self.matrix]}


class MoebiusDiskAutomorphism(MapSpec):
    """z -> (z - a) / (1 - conj(a) z) on the unit disk, |a| < 1 (2-d only)."""

    kind = "moebius_disk"

    def __init__(self, a, domain=None, codomain=None):
        super().__init__(domain, codomain)
        a = complex(a) if np.isscalar(a) else complex(a[0], a[1])
        if abs(a) >= 1.0:
            raise InvalidInputError("parameter must satisfy |a| < 1")
        self.a = a

    def apply_many(self, pts):
        pts = np.asarray(pts, dtype=float)
        if pts.shape[1] != 2:
            raise InvalidInputError("Moebius disk automorphism is 2-d")
        z = pts[:, 0] + 1j * pts[:, 1]
        w = (z - self.a) / (1.0 - np.conj(self.a) * z)
        return np.stack([w.real, w.imag], axis=1)

    def inverse(self):
        return MoebiusDiskAutomorphism(-self.a, self.codomain, self.domain)

    def params_dict(self):
        return {"a": [self.a.real, self.a.imag]}


class PowerRadial(MapSpec):
    """x -> |x|^{alpha - 1} x, alpha > 0; a non-similarity quasisymmetry."""

    kind = "power_radial"

    def __init__(self, alpha, domain=None, codomain=None):
        super().__init__(domain, codomain)
        if alpha <= 0:
            raise InvalidInputError("exponent must be positive")
        self.alpha = float(alpha)

    def apply_many(self, pts):
        pts = np.asarray(pts, dtype=float)
        r = np.linalg.norm(pts, axis=1, keepdims=True)
        scale = np.where(r > 0, r ** (self.alpha - 1.0), 0.0)
        return scale * pts

    def inverse(self):
        return PowerRadial(1.0 / self.alpha, self.codomain, self.domain)

    def params_dict(self):
        return {"alpha": self.alpha}


class Composition(MapSpec):
    kind = "composition"

    def __init__(self, maps, domain=None, codomain=None):
        if not maps:
            raise InvalidInputError("composition needs at least one map")
        super().__init__(
            domain or maps[0].domain, codomain or maps[-1].codomain
        )
        self.maps = list(maps)

    def apply_many(self, pts):
        out = np.asarray(pts, dtype=float)
        for m in self.maps:
            out = m.apply_many(out)
        return out

    def inverse(self):
        return Composition(
            [m.inverse() for m in reversed(self.maps)], self.codomain, self.domain
        )

    def params_dict(self):
        return {"maps": [m.spec_dict() for m in self.maps]}


_MAP_KINDS = {
    c.kind: c
    for c in (
        Identity,
        Translation,
        Scaling,
        Linear,
        MoebiusDiskAutomorphism,
        PowerRadial,
        Composition,
    )
}


def map_from_spec(spec):
    """Build a map from its JSON specification object."""
    if isinstance(spec, str):
        spec = json.loads(spec)
    kind = spec.get("kind")
    params = spec.get("params", {})
    dom = domain_from_spec(spec["domain"]) if "domain" in spec else None
    cod = domain_from_spec(spec["codomain"]) if "codomain" in spec else None
    try:
        if kind == "identity":
            return Identity(dom, cod)
        if kind == "translation":
            return Translation(params["vector"], dom, cod)
        if kind == "scaling":
            return Scaling(params["factor"], dom, cod)
        if kind == "linear":
            return Linear(params["matrix"], dom, cod)
        if kind == "moebius_disk":
            a = params["a"]
            return MoebiusDiskAutomorphism(
                complex(a[0], a[1]) if isinstance(a, (list, tuple)) else a, dom, cod
            )
        if kind == "power_radial":
            return PowerRadial(params["alpha"], dom, cod)
        if kind == "composition":
            return Composition([map_from_spec(s) for s in params["maps"]], dom, cod)
    except (KeyError, TypeError) as exc:
        raise InvalidInputError(f"malformed map spec: {exc}") from exc
    raise InvalidInputError(f"unknown map kind {kind!r}")


def map_arc(mapping, arc, densify=False):
    """Image polyline of an arc, optionally midpoint-densified before mapping."""
    if not isinstance(arc, ArcPolyline):
        arc = ArcPolyline(arc)
    V = arc.vertices
    if mapping.domain is not None:
        if np.any(mapping.domain.boundary_distance_many(V) <= 0):
            raise InvalidInputError("arc vertex outside the map's domain")
    if densify and arc.n >= 2:
        mid = 0.5 * (V[:-1] + V[1:])
        out = np.empty((2 * arc.n - 1, V.shape[1]))
        out[0::2] = V
        out[1::2] = mid
        V = out
    return ArcPolyline(mapping.apply_many(V))


def _triple_batches(domain, n, rng):
    x = sample_interior(domain, n, rng.integers(2**63))
    a = sample_interior(domain, n, rng.integers(2**63))
    b = sample_interior(domain, n, rng.integers(2**63))
    return x, a, b


def weak_qs_estimate(mapping, domain, n_triples, seed=0):
    """Lower estimate of the weak quasisymmetry constant H.

    Samples triples (x, a, b) with |x-a| <= |x-b| (b resampled otherwise) and
    takes the sup of |f(x)-f(a)| / |f(x)-f(b)|.  The degenerate b = a triple
    is always included, so the estimate attains 1 for every injective map.
    """
    if n_triples < 1:
        raise InvalidInputError("need at least one triple")
    rng = np.random.default_rng([seed, 101])
    best = 1.0  # b = a triples give ratio 1 exactly
    skipped = 0
    remaining = n_triples
    while remaining > 0:
        n = min(remaining, 20000)
        x, a, b = _triple_batches(domain, n, rng)
        da = np.linalg.norm(x - a, axis=1)
        db = np.linalg.norm(x - b, axis=1)
        for _ in range(40):
            bad = da > db
            if not bad.any():
                break
            b[bad] = sample_interior(domain, int(bad.sum()), rng.integers(2**63))
            db[bad] = np.linalg.norm(x[bad] - b[bad], axis=1)
        ok = da <= db
        fx, fa, fb = mapping.apply_many(x), mapping.apply_many(a), mapping.apply_many(b)
        num = np.linalg.norm(fx - fa, axis=1)
        den = np.linalg.norm(fx - fb, axis=1)
        pos = ok & (den > 0)
        skipped += int(np.count_nonzero(~pos))
        if pos.any():
            best = max(best, float((num[pos] / den[pos]).max()))
        remaining -= n
    return ConstantEstimate(
        value=best,
        samples=n_triples,
        seed=seed,
        sidedness=LOWER_ESTIMATE_OF_SUP,
        skipped=skipped,
    )


def eta_envelope(mapping, domain, n_triples, bins=20, seed=0, t_max=2.0):
    """Per-bin sup of the image ratio against t = |x-a| / |x-b|.

    Returns a list of (t_bin_upper_edge, eta_hat) pairs made nondecreasing by
    a cumulative max, so eta_hat(1) is consistent with the weak estimate.
    """
    if bins < 1:
        raise InvalidInputError("need at least one bin")
    if n_triples < 1:
        raise InvalidInputError("need at least one triple")
    rng = np.random.default_rng([seed, 202])
    edges = np.linspace(0.0, t_max, bins + 1)
    sup = np.zeros(bins)
    remaining = n_triples
    while remaining > 0:
        n = min(remaining, 20000)
        x, a, b = _triple_batches(domain, n, rng)
        da = np.linalg.norm(x - a, axis=1)
        db = np.linalg.norm(x - b, axis=1)
        for _ in range(40):
            bad = (db <= 0) | (da / np.maximum(db, 1e-300) > t_max)
            if not bad.any():
                break
            b[bad] = sample_interior(domain, int(bad.sum()), rng.integers(2**63))
            db[bad] = np.linalg.norm(x[bad] - b[bad], axis=1)
        t = da / np.maximum(db, 1e-300)
        ok = (db > 0) & (t <= t_max)
        fx, fa, fb = mapping.apply_many(x), mapping.apply_many(a), mapping.apply_many(b)
        num = np.linalg.norm(fx - fa, axis=1)
        den = np.linalg.norm(fx - fb, axis=1)
        ok &= den > 0
        ratio = np.where(ok, num / np.maximum(den, 1e-300), 0.0)
        which = np.clip(np.searchsorted(edges, t, side="left") - 1, 0, bins - 1)
        np.maximum.at(sup, which[ok], ratio[ok])
        remaining -= n
    env = np.maximum.accumulate(sup)
    return [(float(edges[i + 1]), float(env[i])) for i in range(bins)]


def cqh_estimate(k_pairs, c_grid=None):
    """Fit coarse quasihyperbolic constants (M, C) from distance pairs.

    Each pair is ((k_lo, k_hi), (k'_lo, k'_hi)) of certified brackets for a
    source pair and its image (plain (k, k') floats are treated as exact).
    For every C on the grid the minimal M satisfying k'_hi <= M k_lo + C and
    (k_hi - C)/M <= k'_lo on all pairs is computed; the (M, C) minimizing
    M + C/4 wins, ties preferring smaller C.
    """
    if not k_pairs:
        raise InvalidInputError("need at least one distance pair")
    if c_grid is None:
        c_grid = [0.25 * i for i in range(17)]
    norm = []
    for src, img in k_pairs:
        if np.isscalar(src):
            src = (float(src), float(src))
        if np.isscalar(img):
            img = (float(img), float(img))
        norm.append((float(src[0]), float(src[1]), float(img[0]), float(img[1])))
    best = None
    for C in c_grid:
        M = 1.0
        feasible = True
        for k_lo, k_hi, i_lo, i_hi in norm:
            # right inequality: k'_hi <= M k_lo + C
            if i_hi > C:
                if k_lo <= 0:
                    feasible = False
                    break
                M = max(M, (i_hi - C) / k_lo)
            # left inequality: (k_hi - C) / M <= k'_lo
            if k_hi > C:
                if i_lo <= 0:
                    feasible = False
                    break
                M = max(M, (k_hi - C) / i_lo)
        if not feasible:
            continue
        score = M + C / 4.0
        if best is None or score < best[0] - 1e-15:
            best = (score, M, C)
    if best is None:
        raise InvalidInputError("no feasible (M, C) on the grid")
    return best[1], best[2]


def solid_params_from_cqh(M, C):
    """Solid-arc parameters guaranteed for images of short arcs under an
    (M, C)-coarsely quasihyperbolic map: nu = 4(C+1)M(M+1)/(2C+1),
    h = (2M+1)C + 2M."""
    if M < 1 or C < 0:
        raise InvalidInputError("require M >= 1 and C >= 0")
    nu = 4.0 * (C + 1.0) * M * (M + 1.0) / (2.0 * C + 1.0)
    h = (2.0 * M + 1.0) * C + 2.0 * M
    return nu, h


def chain_points(beta, step):
    """Successive points along an arc with unit progress ``step``.

    Point i is the last point of the arc (by parameter) inside the closed
    ball of radius ``step`` around point i-1; interior gaps equal ``step``
    exactly, the final gap is <= step.
    """
    if step <= 0:
        raise InvalidInputError("step must be positive")
    if not isinstance(beta, ArcPolyline):
        beta = ArcPolyline(beta)
    x, z = beta.endpoints
    if np.array_equal(x, z) and beta.length == 0:
        raise InvalidInputError("chain construction needs distinct endpoints")
    V = beta.vertices
    cum = beta.cum_lengths
    pts = [x.copy()]
    s_cur = 0.0
    max_steps = int(math.ceil(beta.length / step)) + 2
    for _ in range(max_steps):
        p = pts[-1]
        # last parameter where the arc meets the closed ball around p
        s_exit = None
        for j in range(beta.n - 2, -1, -1):
            if cum[j + 1] <= s_cur:
                break
            a, b = V[j], V[j + 1]
            d = b - a
            seg_len = cum[j + 1] - cum[j]
            if seg_len == 0:
                continue
            # |a + t d - p|^2 = step^2 on t in [t_lo, 1]
            t_lo = max(0.0, (s_cur - cum[j]) / seg_len)
            aa = float(d @ d)
            bb = 2.0 * float((a - p) @ d)
            cc = float((a - p) @ (a - p)) - step * step
            if cc <= 0 and aa == 0:
                s_exit = cum[j + 1]
                break
            disc = bb * bb - 4 * aa * cc
            if disc < 0:
                continue
            root = (-bb + math.sqrt(disc)) / (2 * aa)
            t_hi = min(1.0, root)
            if t_hi < t_lo - 1e-15:
                continue
            inside_at_end = cc + bb + aa <= 0  # |b - p| <= step
            t_star = 1.0 if inside_at_end else t_hi
            if t_star >= t_lo - 1e-15:
                s_exit = cum[j] + min(max(t_star, t_lo), 1.0) * seg_len
                break
        if s_exit is None or s_exit <= s_cur + 1e-15 * max(beta.length, 1.0):
            raise InvalidInputError("step not representable on this arc")
        s_cur = s_exit
        pts.append(beta.point_at(s_cur))
        if s_cur >= beta.length - 1e-15 * max(beta.length, 1.0):
            pts[-1] = z.copy()
            break
    return pts


def chain_image_bound(c, H):
    """Diameter distortion bound from the chain construction:
    2 (8c^2 + 1) H^{8c^2 + 1}, with an overflow guard in log-domain."""
    if c < 1 or H < 1:
        raise InvalidInputError("require c >= 1 and H >= 1")
    m = 8.0 * c * c + 1.0
    log_val = math.log(2.0 * m) + m * math.log(H) if H > 1 else math.log(2.0 * m)
    if log_val > 700.0:
        return math.inf
    return 2.0 * m * H**m


def lambda2_bound(mu3, lam, c, H):
    """Combined diameter-cigar bound: max(mu3 / lambda, chain image bound)."""
    if lam <= 0:
        raise InvalidInputError("lambda must be positive")
    return max(mu3 / lam, chain_image_bound(c, H))


def dilatation_estimate(mapping, domain, n_centers=200, n_dirs=64, r=1e-4, seed=0):
    """Metric dilatation estimate: sup over centers of L_f(x, r) / l_f(x, r)
    with both extrema sampled on the radius-r sphere (documentation-grade)."""
    rng = np.random.default_rng([seed, 303])
    centers = sample_interior(domain, n_centers, rng.integers(2**63))
    ok = domain.boundary_distance_many(centers) > 2 * r
    centers = centers[ok]
    dim = domain.dim
    if dim == 2:
        th = np.linspace(0.0, 2.0 * math.pi, n_dirs, endpoint=False)
        dirs = np.stack([np.cos(th), np.sin(th)], axis=1)
    else:
        dirs = rng.normal(size=(n_dirs, 3))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    worst = 1.0
    for c in centers:
        sphere = c[None, :] + r * dirs
        img = mapping.apply_many(np.vstack([c[None, :], sphere]))
        dist = np.linalg.norm(img[1:] - img[0], axis=1)
        lo, hi = float(dist.min()), float(dist.max())
        if lo > 0:
            worst = max(worst, hi / lo)
    return ConstantEstimate(
        value=worst,
        samples=len(centers),
        seed=seed,
        sidedness=LOWER_ESTIMATE_OF_SUP,
    )


@dataclass(frozen=True)
class MapConstants:
    """Bundle of distortion estimates for one map."""

    H_hat: float
    eta_envelope: list = field(default_factory=list)
    M_hat: float = 1.0
    C_hat: float = 0.0
    K_hat: float = 1.0
