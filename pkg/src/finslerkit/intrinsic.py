"""Lengths of polylines and sampled-graph approximations of intrinsic distances."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph
from scipy.spatial import cKDTree

from .domains import Ball, BoundaryFrame, Domain, Ellipsoid, HalfSpace, ImplicitSmooth, Slab
from .errors import CollarError, GeometryError, GraphDisconnectedError, OutsideDomainError
from .metrics import FinslerMetric

_G5_X, _G5_W = np.polynomial.legendre.leggauss(5)
_G5_X = 0.5 * (_G5_X + 1.0)
_G5_W = 0.5 * _G5_W

SEGMENT_CHECKS = 16


@dataclass(frozen=True)
class QuadratureSpec:
    """Composite rule on each segment.

    With ``tol`` set, the panel count doubles until two successive totals
    agree to ``tol`` (relative to ``max(1, length)``).
    """

    rule: str = "gauss5"
    subdivisions: int = 32
    tol: float | None = None
    max_subdivisions: int = 8192

    def __post_init__(self):
        if self.rule not in ("gauss5", "midpoint"):
            raise ValueError(f"unknown quadrature rule {self.rule!r}")
        if self.subdivisions < 1:
            raise ValueError("subdivisions must be positive")
        if self.tol is not None and not self.tol > 0:
            raise ValueError("tol must be positive")

    def nodes(self, n: int | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Nodes and weights on ``[0, 1]`` for ``n`` panels."""
        n = self.subdivisions if n is None else n
        left = np.arange(n) / n
        if self.rule == "midpoint":
            return left + 0.5 / n, np.full(n, 1.0 / n)
        t = (left[:, None] + _G5_X[None, :] / n).ravel()
        w = np.tile(_G5_W / n, n)
        return t, w


ADAPTIVE = QuadratureSpec(tol=1e-10)


class Polyline:
    def __init__(self, points, domain: Domain | None = None):
        P = np.asarray(points, dtype=float)
        if P.ndim != 2 or P.shape[0] < 2:
            raise GeometryError("a polyline needs at least two points")
        if not np.all(np.isfinite(P)):
            raise GeometryError("polyline has non-finite coordinates")
        if np.any(np.linalg.norm(np.diff(P, axis=0), axis=1) == 0):
            raise GeometryError("consecutive polyline points must differ")
        self.points = P
        if domain is not None:
            self.validate(domain)

    def validate(self, domain: Domain) -> None:
        P = self.points
        if P.shape[1] != domain.dim:
            raise GeometryError("polyline and domain dimensions differ")
        s = np.arange(SEGMENT_CHECKS + 2) / (SEGMENT_CHECKS + 1)
        probe = P[:-1, None, :] + s[None, :, None] * (P[1:] - P[:-1])[:, None, :]
        if not domain._inside(probe.reshape(-1, domain.dim)).all():
            raise OutsideDomainError("polyline leaves the domain")

    @property
    def segments(self) -> int:
        return self.points.shape[0] - 1

    def euclidean_length(self) -> float:
        return float(np.linalg.norm(np.diff(self.points, axis=0), axis=1).sum())

    def to_list(self) -> list:
        return self.points.tolist()

    def __len__(self) -> int:
        return self.points.shape[0]


def segment_lengths(F: FinslerMetric, A: np.ndarray, B: np.ndarray, n: int, quad: QuadratureSpec, chunk: int = 400_000) -> np.ndarray:
    """Quadrature length of the straight segments ``A[i] -> B[i]`` with ``n`` panels."""
    t, w = quad.nodes(n)
    m = A.shape[0]
    out = np.empty(m)
    per = max(1, chunk // t.size)
    for s in range(0, m, per):
        a, b = A[s : s + per], B[s : s + per]
        V = b - a
        X = a[:, None, :] + t[None, :, None] * V[:, None, :]
        Vr = np.broadcast_to(V[:, None, :], X.shape)
        vals = F._eval(X.reshape(-1, A.shape[1]), Vr.reshape(-1, A.shape[1]))
        out[s : s + per] = vals.reshape(a.shape[0], t.size) @ w
    return out


def _lengths(F, A, B, quad: QuadratureSpec) -> np.ndarray:
    n = quad.subdivisions
    cur = segment_lengths(F, A, B, n, quad)
    if quad.tol is None:
        return cur
    while n < quad.max_subdivisions:
        n *= 2
        nxt = segment_lengths(F, A, B, n, quad)
        done = np.abs(nxt - cur) <= quad.tol * np.maximum(1.0, np.abs(nxt))
        cur = nxt
        if done.all():
            break
    return cur


def path_length(F: FinslerMetric, path: Polyline | np.ndarray, quad: QuadratureSpec = ADAPTIVE) -> float:
    """F-length of a polyline, constant speed on each segment."""
    if not isinstance(path, Polyline):
        path = Polyline(path)
    path.validate(F.domain)
    P = path.points
    return float(_lengths(F, P[:-1], P[1:], quad).sum())


# ---------------------------------------------------------------------------
# sampled graphs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GraphConfig:
    nodes: int = 4000
    degree: int = 16
    exponent: float = 0.5
    quad: QuadratureSpec = field(default_factory=QuadratureSpec)
    seed: int = 0
    min_level: int = 256
    depth_floor: float = 0.01
    batch: int = 8192


def _sampling_box(domain: Domain, anchors: np.ndarray):
    box = domain.bounding_box()
    if box is not None:
        return np.asarray(box[0], float), np.asarray(box[1], float)
    lo, hi = anchors.min(axis=0), anchors.max(axis=0)
    depth = domain.depth_estimate(anchors)
    pad = max(float(np.max(hi - lo)), float(np.max(depth[np.isfinite(depth)], initial=1.0)))
    return lo - pad, hi + pad


def sample_nodes(domain: Domain, count: int, cfg: GraphConfig, anchors: np.ndarray) -> np.ndarray:
    """First ``count`` points of a seeded, prefix-stable, boundary-weighted stream."""
    rng = np.random.default_rng(cfg.seed)
    lo, hi = _sampling_box(domain, anchors)
    scale = float(np.max(hi - lo))
    ref = cfg.depth_floor * scale
    out, have = [], 0
    for _ in range(10_000):
        if have >= count:
            break
        X = lo + (hi - lo) * rng.random((cfg.batch, domain.dim))
        u = rng.random(cfg.batch)
        inside = domain._inside(X)
        X, u = X[inside], u[inside]
        depth = np.maximum(domain.depth_estimate(X), 1e-300)
        keep = u < np.minimum(1.0, (ref / depth) ** cfg.exponent)
        out.append(X[keep])
        have += int(keep.sum())
    if have < count:
        raise GraphDisconnectedError("could not sample enough interior nodes")
    return np.concatenate(out)[:count]


class PathGraph:
    """Geometric graph on anchors plus sampled nodes, weighted by F-length."""

    def __init__(self, F: FinslerMetric, anchors, cfg: GraphConfig = GraphConfig()):
        domain = F.domain
        A = np.atleast_2d(np.asarray(anchors, dtype=float))
        if not domain._inside(A).all():
            raise OutsideDomainError("graph anchors must be interior")
        self.F = F
        self.cfg = cfg
        self.n_anchors = A.shape[0]
        samples = sample_nodes(domain, cfg.nodes, cfg, A) if cfg.nodes > 0 else np.empty((0, domain.dim))
        self.nodes = np.vstack([A, samples])
        edges = self._edges(samples.shape[0])
        P, Q = self.nodes[edges[:, 0]], self.nodes[edges[:, 1]]
        if not domain.convex:
            mid = domain._inside(0.5 * (P + Q))
            edges, P, Q = edges[mid], P[mid], Q[mid]
        n = self.nodes.shape[0]
        w = _lengths(F, P, Q, cfg.quad)
        if F.symmetric:
            rows, cols, vals = edges[:, 0], edges[:, 1], w
            self.directed = False
        else:
            back = _lengths(F, Q, P, cfg.quad)
            rows = np.concatenate([edges[:, 0], edges[:, 1]])
            cols = np.concatenate([edges[:, 1], edges[:, 0]])
            vals = np.concatenate([w, back])
            self.directed = True
        # csgraph drops explicit zeros, so keep zero-cost edges barely positive
        vals = np.maximum(vals, 1e-300)
        self.matrix = sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))
        self.edge_count = edges.shape[0]

    def _edges(self, m: int) -> np.ndarray:
        k = self.cfg.degree
        a = self.n_anchors
        levels = [m]
        while levels[-1] // 2 >= self.cfg.min_level:
            levels.append(levels[-1] // 2)
        found = []
        for size in levels:
            pts = self.nodes[: a + size]
            kk = min(k + 1, pts.shape[0])
            _, idx = cKDTree(pts).query(pts, k=kk)
            idx = np.atleast_2d(idx)
            i = np.repeat(np.arange(pts.shape[0]), kk)
            j = idx.ravel()
            found.append(np.stack([i, j], axis=1))
        E = np.concatenate(found)
        E = E[E[:, 0] != E[:, 1]]
        E = np.sort(E, axis=1)
        return np.unique(E, axis=0)

    def distances(self, sources) -> tuple[np.ndarray, np.ndarray]:
        return csgraph.dijkstra(self.matrix, directed=self.directed, indices=sources, return_predecessors=True)

    def path_to(self, pred_row: np.ndarray, source: int, target: int) -> np.ndarray:
        chain = [target]
        while chain[-1] != source:
            nxt = pred_row[chain[-1]]
            if nxt < 0:
                raise GraphDisconnectedError("target is not reachable from source")
            chain.append(nxt)
        return self.nodes[chain[::-1]]


@dataclass(frozen=True)
class GraphResult:
    value: float
    path: Polyline | None
    nodes: int
    edges: int


def graph_distance(F: FinslerMetric, x, y, cfg: GraphConfig = GraphConfig()) -> GraphResult:
    """Shortest sampled-graph path from ``x`` to ``y`` (an upper approximation)."""
    domain = F.domain
    x = domain._require_inside(x)
    y = domain._require_inside(y)
    if np.array_equal(x, y):
        return GraphResult(0.0, None, 1, 0)
    g = PathGraph(F, np.vstack([x, y]), cfg)
    dist, pred = g.distances(0)
    if not np.isfinite(dist[1]):
        raise GraphDisconnectedError("source and target lie in different components; raise the node count")
    return GraphResult(float(dist[1]), Polyline(g.path_to(pred, 0, 1)), g.nodes.shape[0], g.edge_count)


# ---------------------------------------------------------------------------
# local improvement
# ---------------------------------------------------------------------------

def relax_path(F: FinslerMetric, path: Polyline, iters: int = 10, quad: QuadratureSpec = QuadratureSpec(),
               min_rel_step: float = 1e-6) -> Polyline:
    """Pattern-search each interior vertex against its two adjacent segments."""
    domain = F.domain
    P = path.points.copy()
    if iters <= 0 or P.shape[0] < 3:
        return Polyline(P)
    d = P.shape[1]
    moves = np.concatenate([np.eye(d), -np.eye(d)])

    def local(points, prev, nxt):
        A = np.concatenate([np.broadcast_to(prev, points.shape), points])
        B = np.concatenate([points, np.broadcast_to(nxt, points.shape)])
        L = segment_lengths(F, A, B, quad.subdivisions, quad)
        return L[: points.shape[0]] + L[points.shape[0]:]

    for _ in range(iters):
        improved = False
        for i in range(1, P.shape[0] - 1):
            depth = float(domain.depth_estimate(P[i][None, :])[0])
            step = 0.1 * depth
            cur = float(local(P[i][None, :], P[i - 1], P[i + 1])[0])
            while step > min_rel_step * depth:
                cand = P[i] + step * moves
                ok = domain._inside(cand)
                ok &= np.all(np.linalg.norm(cand - P[i - 1], axis=1) > 0)
                ok &= np.all(np.linalg.norm(cand - P[i + 1], axis=1) > 0)
                if ok.any():
                    vals = np.full(cand.shape[0], np.inf)
                    vals[ok] = local(cand[ok], P[i - 1], P[i + 1])
                    j = int(np.argmin(vals))
                    if vals[j] < cur:
                        P[i], cur, improved = cand[j], float(vals[j]), True
                        continue
                step *= 0.5
        if not improved:
            break
    return Polyline(P)


# ---------------------------------------------------------------------------
# curves adapted to the boundary projection
# ---------------------------------------------------------------------------

def normal_segment_length(F: FinslerMetric, frame: BoundaryFrame, delta1: float, delta2: float,
                          quad: QuadratureSpec = ADAPTIVE) -> float:
    """F-length of the fiber segment between two depths below ``frame.foot``."""
    if delta1 == delta2:
        return 0.0
    if not (delta1 > 0 and delta2 > 0):
        raise CollarError("depths must be positive")
    domain = F.domain
    ends = np.array([frame.foot - delta1 * frame.normal, frame.foot - delta2 * frame.normal])
    if not domain._inside(ends).all():
        raise CollarError("fiber segment leaves the domain")
    for p in ends:
        f = domain._frame(p)
        if np.linalg.norm(f.foot - frame.foot) > 1e-8 * max(1.0, np.linalg.norm(frame.foot)):
            raise CollarError("fiber endpoint projects to a different boundary point")
    return path_length(F, Polyline(ends), quad)


def _boundary_path(domain: Domain, a: np.ndarray, b: np.ndarray, na: np.ndarray, nb: np.ndarray, steps: int):
    """Boundary points and outward normals joining feet ``a`` and ``b``."""
    s = np.linspace(0.0, 1.0, steps + 1)
    if isinstance(domain, (HalfSpace, Slab)):
        if not np.allclose(na, nb, atol=1e-12):
            raise CollarError("feet lie on different faces")
        return a + s[:, None] * (b - a), np.broadcast_to(na, (s.size, domain.dim)).copy()
    if isinstance(domain, Ball):
        omega = float(np.arccos(np.clip(na @ nb, -1.0, 1.0)))
        if omega == 0.0:
            N = np.broadcast_to(na, (s.size, domain.dim)).copy()
        else:
            N = (np.sin((1 - s) * omega)[:, None] * na + np.sin(s * omega)[:, None] * nb) / np.sin(omega)
        return domain.center + domain.radius * N, N
    chord = a + s[:, None] * (b - a)
    if isinstance(domain, Ellipsoid):
        signs, xi, _, amb, _ = domain._closest(chord)
        if amb.any():
            raise CollarError("boundary path crosses the medial set")
        pts = domain.center + (signs * xi) @ domain._rot.T
        N = (pts - domain.center) @ domain._q
        return pts, N / np.linalg.norm(N, axis=1, keepdims=True)
    if isinstance(domain, ImplicitSmooth):
        pts = np.array([domain.project_to_boundary(p) for p in chord])
        N = np.array([domain.grad(p) for p in pts])
        return pts, N / np.linalg.norm(N, axis=1, keepdims=True)
    raise CollarError(f"no boundary chart for {domain.kind} domains")


def equidistant_path(domain: Domain, frame_x: BoundaryFrame, frame_y: BoundaryFrame, delta0: float,
                     steps: int = 64, tol: float = 1e-6) -> Polyline:
    """Polyline at constant depth ``delta0`` above a boundary path between the feet."""
    if not delta0 > 0:
        raise GeometryError("delta0 must be positive")
    if frame_x.normal @ frame_y.normal <= 0:
        raise CollarError("feet too far apart for a single chart")
    pts, N = _boundary_path(domain, frame_x.foot, frame_y.foot, frame_x.normal, frame_y.normal, steps)
    P = pts - delta0 * N
    if not domain._inside(P).all():
        raise CollarError("offset curve leaves the domain")
    depth = domain._depth(P)
    if np.max(np.abs(depth - delta0)) > tol:
        raise CollarError("offset depth drifts; delta0 exceeds the collar")
    keep = np.concatenate([[True], np.linalg.norm(np.diff(P, axis=0), axis=1) > 0])
    P = P[keep]
    if P.shape[0] < 2:
        raise GeometryError("feet coincide; the equidistant path is a single point")
    return Polyline(P)


# ---------------------------------------------------------------------------
# four-point condition
# ---------------------------------------------------------------------------

def gromov_delta(D: np.ndarray, chunk: int = 200_000) -> float:
    """Largest four-point constant ``(S1 - S2) / 2`` over all 4-subsets."""
    D = np.asarray(D, dtype=float)
    n = D.shape[0]
    if n < 4:
        return 0.0
    best = 0.0
    it = itertools.combinations(range(n), 4)
    while True:
        block = np.fromiter(itertools.chain.from_iterable(itertools.islice(it, chunk)), dtype=np.int64)
        if block.size == 0:
            break
        q = block.reshape(-1, 4)
        i, j, k, l = q.T
        S = np.stack([D[i, j] + D[k, l], D[i, k] + D[j, l], D[i, l] + D[j, k]], axis=1)
        S.sort(axis=1)
        best = max(best, float(np.max(S[:, 2] - S[:, 1]) / 2.0))
    return best


__all__ = [
    "QuadratureSpec",
    "Polyline",
    "GraphConfig",
    "GraphResult",
    "PathGraph",
    "path_length",
    "segment_lengths",
    "sample_nodes",
    "graph_distance",
    "relax_path",
    "normal_segment_length",
    "equidistant_path",
    "gromov_delta",
]
