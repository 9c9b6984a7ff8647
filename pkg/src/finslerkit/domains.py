"""Convex domains of R^d with membership, ray casting and boundary projection.

Every domain works on batches internally: ``X`` and ``U`` are ``(n, d)``
arrays.  The public methods accept a single point (shape ``(d,)``) or a
batch and validate their inputs; the underscored batch primitives do not and
are what the metric and path engines call in their inner loops.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np
from scipy import optimize

from ._linalg import orthonormal_completion
from .errors import (
    CollarError,
    ConvergenceError,
    DimensionError,
    GeometryError,
    NonUniqueProjectionError,
    OutsideDomainError,
    UnsupportedDomainError,
)

MIN_DIM = 2
MAX_DIM = 8
# two candidate projections closer than this in distance count as a tie
UNIQUENESS_TOL = 1e-8


@dataclass(frozen=True)
class BoundaryFrame:
    """Projection data of an interior point near the boundary."""

    foot: np.ndarray
    normal: np.ndarray
    delta: float

    @property
    def h(self) -> float:
        return math.sqrt(self.delta)

    @property
    def point(self) -> np.ndarray:
        return self.foot - self.delta * self.normal


def decompose(frame: BoundaryFrame, v) -> tuple[np.ndarray, np.ndarray]:
    """Split ``v`` into its normal and tangential parts at ``frame.foot``."""
    v = np.asarray(v, dtype=float)
    v_n = (v @ frame.normal) * frame.normal
    return v_n, v - v_n


def _as_point(x, dim: int | None = None) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DimensionError(f"expected a single point, got shape {x.shape}")
    if dim is not None and x.shape[0] != dim:
        raise DimensionError(f"point has dimension {x.shape[0]}, domain has {dim}")
    if not np.all(np.isfinite(x)):
        raise GeometryError("point has non-finite coordinates")
    return x


def _as_rows(x, dim: int) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    X = np.atleast_2d(x)
    if X.ndim != 2 or X.shape[1] != dim:
        raise DimensionError(f"expected points of dimension {dim}, got shape {x.shape}")
    return X, single


def _unit_normal(n) -> np.ndarray:
    n = np.asarray(n, dtype=float)
    norm = np.linalg.norm(n)
    if norm == 0.0 or not np.isfinite(norm):
        raise GeometryError("normal must be a nonzero finite vector")
    return n / norm


def _ball_exit(D: np.ndarray, U: np.ndarray, radius: float) -> np.ndarray:
    """Forward exit distance from ``D`` (offset from the center) along unit ``U``."""
    b = np.einsum("ij,ij->i", D, U)
    c = np.einsum("ij,ij->i", D, D) - radius * radius
    s = np.sqrt(np.maximum(b * b - c, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(b > 0, -c / (b + s), s - b)


class Domain:
    """Base class.  Subclasses implement the underscored batch primitives."""

    kind = ""
    convex = True

    def __init__(self, dim: int):
        if not MIN_DIM <= dim <= MAX_DIM:
            raise DimensionError(f"dimension {dim} outside supported range [{MIN_DIM}, {MAX_DIM}]")
        self.dim = dim

    # -- batch primitives -------------------------------------------------
    def _inside(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _ray(self, X: np.ndarray, U: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _depth(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _signed(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _frame(self, x: np.ndarray) -> BoundaryFrame:
        raise NotImplementedError

    def normal_hint(self, x: np.ndarray) -> np.ndarray | None:
        """Cheap guess of the outward normal at the projection of ``x``."""
        return None

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray] | None:
        return None

    def defining_function(self):
        """``(rho, grad, hess)`` of a C^2 defining function, or ``None``."""
        return None

    def depth_estimate(self, X: np.ndarray) -> np.ndarray:
        return self._depth(X)

    def to_dict(self) -> dict:
        raise NotImplementedError

    # -- public API -------------------------------------------------------
    def contains(self, x):
        X, single = _as_rows(x, self.dim)
        out = self._inside(X)
        return bool(out[0]) if single else out

    def ray_exits(self, X: np.ndarray, U: np.ndarray) -> np.ndarray:
        """Unchecked batch ray casting; ``U`` rows must be unit vectors."""
        return self._ray(X, U)

    def depths(self, X: np.ndarray) -> np.ndarray:
        """Unchecked batch distance to the boundary for interior rows."""
        return self._depth(X)

    def _require_inside(self, x) -> np.ndarray:
        x = _as_point(x, self.dim)
        if not self._inside(x[None, :])[0]:
            raise OutsideDomainError(f"point {x.tolist()} is not interior to the {self.kind}")
        return x

    def ray_boundary_distance(self, x, u) -> float:
        x = self._require_inside(x)
        u = _as_point(u, self.dim)
        norm = np.linalg.norm(u)
        if norm == 0.0:
            raise GeometryError("direction must be nonzero")
        return float(self._ray(x[None, :], (u / norm)[None, :])[0])

    def line_boundary_distance(self, x, v) -> float:
        x = self._require_inside(x)
        v = _as_point(v, self.dim)
        norm = np.linalg.norm(v)
        if norm == 0.0:
            raise GeometryError("direction must be nonzero")
        u = v / norm
        t = self._ray(np.vstack([x, x]), np.vstack([u, -u]))
        return float(min(t[0], t[1]))

    def boundary_distance(self, x) -> float:
        x = self._require_inside(x)
        return float(self._depth(x[None, :])[0])

    def boundary_frame(self, x) -> BoundaryFrame:
        x = self._require_inside(x)
        return self._frame(x)

    def signed_distance(self, x):
        X, single = _as_rows(x, self.dim)
        out = self._signed(X)
        return float(out[0]) if single else out

    def __repr__(self) -> str:
        return f"{type(self).__name__}({json.dumps(self.to_dict())})"


class Ball(Domain):
    kind = "ball"

    def __init__(self, center, radius: float):
        center = _as_point(center)
        super().__init__(center.shape[0])
        if not radius > 0:
            raise GeometryError("radius must be positive")
        self.center = center
        self.radius = float(radius)

    @classmethod
    def unit(cls, dim: int) -> "Ball":
        return cls(np.zeros(dim), 1.0)

    def _inside(self, X):
        return np.linalg.norm(X - self.center, axis=1) < self.radius

    def _ray(self, X, U):
        return _ball_exit(X - self.center, U, self.radius)

    def _depth(self, X):
        return self.radius - np.linalg.norm(X - self.center, axis=1)

    def _signed(self, X):
        return np.linalg.norm(X - self.center, axis=1) - self.radius

    def _frame(self, x):
        d = x - self.center
        nd = np.linalg.norm(d)
        if nd <= UNIQUENESS_TOL * self.radius:
            raise NonUniqueProjectionError("the center of a ball has no unique boundary projection")
        n = d / nd
        return BoundaryFrame(self.center + self.radius * n, n, float(self.radius - nd))

    def normal_hint(self, x):
        d = x - self.center
        nd = np.linalg.norm(d)
        return d / nd if nd > 0 else None

    def bounding_box(self):
        return self.center - self.radius, self.center + self.radius

    def defining_function(self):
        c, r2 = self.center, self.radius**2
        return (
            lambda X: np.sum((np.atleast_2d(X) - c) ** 2, axis=1) - r2,
            lambda x: 2.0 * (x - c),
            lambda x: 2.0 * np.eye(self.dim),
        )

    def to_dict(self):
        return {"kind": self.kind, "center": self.center.tolist(), "radius": self.radius}


class HalfSpace(Domain):
    """``{x : <x - base, normal> < 0}`` with ``normal`` the outward unit normal."""

    kind = "half_space"

    def __init__(self, base, normal):
        base = _as_point(base)
        super().__init__(base.shape[0])
        self.base = base
        self.normal = _unit_normal(_as_point(normal, self.dim))

    @classmethod
    def standard(cls, dim: int) -> "HalfSpace":
        """The half-space ``x_1 > 0``."""
        n = np.zeros(dim)
        n[0] = -1.0
        return cls(np.zeros(dim), n)

    def _height(self, X):
        return (X - self.base) @ self.normal

    def _inside(self, X):
        return self._height(X) < 0

    def _ray(self, X, U):
        depth = -self._height(X)
        un = U @ self.normal
        with np.errstate(divide="ignore"):
            return np.where(un > 0, depth / np.where(un > 0, un, 1.0), np.inf)

    def _depth(self, X):
        return -self._height(X)

    def _signed(self, X):
        return self._height(X)

    def _frame(self, x):
        delta = float(-self._height(x[None, :])[0])
        return BoundaryFrame(x + delta * self.normal, self.normal.copy(), delta)

    def normal_hint(self, x):
        return self.normal.copy()

    def defining_function(self):
        b, n = self.base, self.normal
        return (
            lambda X: (np.atleast_2d(X) - b) @ n,
            lambda x: n.copy(),
            lambda x: np.zeros((self.dim, self.dim)),
        )

    def to_dict(self):
        return {"kind": self.kind, "base": self.base.tolist(), "normal": self.normal.tolist()}


class Slab(Domain):
    """``{x : |<x - base, normal>| < half_width}``."""

    kind = "slab"

    def __init__(self, base, normal, half_width: float):
        base = _as_point(base)
        super().__init__(base.shape[0])
        if not half_width > 0:
            raise GeometryError("half_width must be positive")
        self.base = base
        self.normal = _unit_normal(_as_point(normal, self.dim))
        self.half_width = float(half_width)

    def _offset(self, X):
        return (X - self.base) @ self.normal

    def _inside(self, X):
        return np.abs(self._offset(X)) < self.half_width

    def _ray(self, X, U):
        p = self._offset(X)
        un = U @ self.normal
        w = self.half_width
        safe = np.where(un != 0, un, 1.0)
        return np.where(un > 0, (w - p) / safe, np.where(un < 0, (-w - p) / safe, np.inf))

    def _depth(self, X):
        return self.half_width - np.abs(self._offset(X))

    def _signed(self, X):
        return np.abs(self._offset(X)) - self.half_width

    def _frame(self, x):
        p = float(self._offset(x[None, :])[0])
        if 2.0 * abs(p) <= UNIQUENESS_TOL:
            raise NonUniqueProjectionError("midplane of a slab is equidistant from both faces")
        n = math.copysign(1.0, p) * self.normal
        delta = self.half_width - abs(p)
        return BoundaryFrame(x + delta * n, n, delta)

    def normal_hint(self, x):
        p = float(self._offset(x[None, :])[0])
        return (1.0 if p >= 0 else -1.0) * self.normal

    def defining_function(self):
        b, n, w2 = self.base, self.normal, self.half_width**2
        return (
            lambda X: ((np.atleast_2d(X) - b) @ n) ** 2 - w2,
            lambda x: 2.0 * ((x - b) @ n) * n,
            lambda x: 2.0 * np.outer(n, n),
        )

    def to_dict(self):
        return {
            "kind": self.kind,
            "base": self.base.tolist(),
            "normal": self.normal.tolist(),
            "half_width": self.half_width,
        }


class Ellipsoid(Domain):
    """``{x : (x - c)^T shape^{-1} (x - c) < 1}``.

    The eigenvalues of ``shape`` are the squared semi-axes, so
    ``shape = diag(1, 1, 0.25)`` has semi-axes ``(1, 1, 0.5)``.
    """

    kind = "ellipsoid"

    def __init__(self, center, shape):
        center = _as_point(center)
        super().__init__(center.shape[0])
        shape = np.asarray(shape, dtype=float)
        if shape.shape != (self.dim, self.dim):
            raise DimensionError("shape matrix must be d x d")
        if not np.allclose(shape, shape.T, rtol=0, atol=1e-12 * np.abs(shape).max()):
            raise GeometryError("shape matrix must be symmetric")
        shape = 0.5 * (shape + shape.T)
        a2, rot = np.linalg.eigh(shape)
        if a2[0] <= 0:
            raise GeometryError("shape matrix must be positive definite")
        self.center = center
        self.shape = shape
        self._a2 = a2
        self._rot = rot
        self._q = rot @ np.diag(1.0 / a2) @ rot.T

    @classmethod
    def axis_aligned(cls, semi_axes, center=None) -> "Ellipsoid":
        semi_axes = np.asarray(semi_axes, dtype=float)
        c = np.zeros(semi_axes.shape[0]) if center is None else center
        return cls(c, np.diag(semi_axes**2))

    @property
    def semi_axes(self) -> np.ndarray:
        return np.sqrt(self._a2)

    def _quad(self, D):
        return np.einsum("ij,jk,ik->i", D, self._q, D)

    def _inside(self, X):
        return self._quad(X - self.center) < 1.0

    def _ray(self, X, U):
        D = X - self.center
        QU = U @ self._q
        a = np.einsum("ij,ij->i", QU, U)
        b = np.einsum("ij,ij->i", QU, D)
        c = self._quad(D) - 1.0
        s = np.sqrt(np.maximum(b * b - a * c, 0.0))
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(b > 0, -c / (b + s), (s - b) / a)

    def _closest(self, X):
        """Closest boundary points in principal coordinates.

        Returns ``(signs, xi, dist, degenerate, inside)`` where ``xi`` lives in
        the positive orthant.  Follows the classical Lagrange-multiplier root
        on ``(-a_min^2, inf)`` with the degenerate branch handled explicitly.
        """
        Y = (X - self.center) @ self._rot
        signs = np.where(Y < 0, -1.0, 1.0)
        Z = np.abs(Y)
        e2 = self._a2
        e = np.sqrt(e2)
        emin2 = e2[0]
        group = e2 <= emin2 * (1.0 + 1e-12)
        others = ~group
        g0 = np.sum(Z * Z / e2, axis=1) - 1.0
        inside = g0 < 0
        zg = np.linalg.norm(Z[:, group], axis=1)
        scale = e[-1]

        xo = e2[others] * Z[:, others] / (e2[others] - emin2)
        r2 = np.sum(xo * xo / e2[others], axis=1)
        degenerate = inside & (zg <= 1e-12 * scale) & (r2 < 1.0)

        t = np.where(inside, -emin2 + e[0] * zg, 0.0)
        active = ~degenerate
        for _ in range(400):
            if not active.any():
                break
            ta = t[active]
            Za = Z[active]
            den = e2 + ta[:, None]
            q = e * Za / den
            g = np.sum(q * q, axis=1) - 1.0
            gp = -2.0 * np.sum(q * q / den, axis=1)
            step = np.where(gp < 0, -g / gp, 0.0)
            t_new = ta + step
            moving = (step > 0) & (t_new > ta)
            t[active] = np.where(moving, t_new, ta)
            idx = np.flatnonzero(active)
            active[idx[~moving]] = False
        else:
            raise ConvergenceError("ellipsoid projection did not converge")

        den = e2 + t[:, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            xi = e2 * Z / den
            diff = -t[:, None] * Z / den
        dist = np.linalg.norm(diff, axis=1)

        if degenerate.any():
            k = np.flatnonzero(degenerate)
            xi_d = np.zeros((k.size, self.dim))
            xi_d[:, others] = xo[k]
            first = np.flatnonzero(group)[0]
            xi_d[:, first] = e[0] * np.sqrt(1.0 - r2[k])
            xi[k] = xi_d
            dist[k] = np.linalg.norm(xi_d - Z[k], axis=1)
        near_degenerate = inside & (zg <= UNIQUENESS_TOL) & (r2 < 1.0)
        return signs, xi, dist, degenerate | near_degenerate, inside

    def _depth(self, X):
        return self._closest(X)[2]

    def _signed(self, X):
        _, _, dist, _, inside = self._closest(X)
        return np.where(inside, -dist, dist)

    def _frame(self, x):
        signs, xi, dist, ambiguous, _ = self._closest(x[None, :])
        if ambiguous[0]:
            raise NonUniqueProjectionError("point lies on the medial set of the ellipsoid")
        p = signs[0] * xi[0]
        foot = self.center + self._rot @ p
        normal = self._rot @ (p / self._a2)
        normal /= np.linalg.norm(normal)
        return BoundaryFrame(foot, normal, float(dist[0]))

    def normal_hint(self, x):
        g = self._q @ (x - self.center)
        ng = np.linalg.norm(g)
        if ng == 0:
            return None
        try:
            return self._frame(x).normal
        except NonUniqueProjectionError:
            return g / ng

    def bounding_box(self):
        half = np.sqrt(np.diag(self.shape))
        return self.center - half, self.center + half

    def defining_function(self):
        c, q = self.center, self._q
        return (
            lambda X: self._quad(np.atleast_2d(X) - c) - 1.0,
            lambda x: 2.0 * q @ (x - c),
            lambda x: 2.0 * q,
        )

    def to_dict(self):
        return {"kind": self.kind, "center": self.center.tolist(), "shape": self.shape.tolist()}


class Polytope(Domain):
    """Intersection of open half-spaces ``<n_i, x> < b_i`` (outward ``n_i``)."""

    kind = "polytope"

    def __init__(self, faces):
        faces = list(faces)
        if not faces:
            raise GeometryError("polytope needs at least one face")
        normals = np.array([np.asarray(n, dtype=float) for n, _ in faces])
        offsets = np.array([float(b) for _, b in faces])
        if normals.ndim != 2:
            raise DimensionError("face normals must share one dimension")
        super().__init__(normals.shape[1])
        norms = np.linalg.norm(normals, axis=1)
        if np.any(norms == 0):
            raise GeometryError("face normals must be nonzero")
        self.normals = normals / norms[:, None]
        self.offsets = offsets / norms
        self._bbox = None
        if self._chebyshev_radius() <= 0:
            raise GeometryError("polytope has empty interior")

    @classmethod
    def box(cls, lo, hi) -> "Polytope":
        lo, hi = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
        eye = np.eye(lo.shape[0])
        faces = [(eye[i], hi[i]) for i in range(lo.shape[0])]
        faces += [(-eye[i], -lo[i]) for i in range(lo.shape[0])]
        return cls(faces)

    @classmethod
    def cube(cls, dim: int, half_width: float = 1.0) -> "Polytope":
        return cls.box(-half_width * np.ones(dim), half_width * np.ones(dim))

    def _chebyshev_radius(self) -> float:
        m, d = self.normals.shape
        c = np.zeros(d + 1)
        c[-1] = -1.0
        A = np.hstack([self.normals, np.ones((m, 1))])
        res = optimize.linprog(c, A_ub=A, b_ub=self.offsets, bounds=[(None, None)] * d + [(None, 1e6)])
        if res.status == 0:
            return float(res.x[-1])
        if res.status == 3:
            return math.inf
        return 0.0

    def _slack(self, X):
        return self.offsets - X @ self.normals.T

    def _inside(self, X):
        return np.all(self._slack(X) > 0, axis=1)

    def _ray(self, X, U):
        slack = self._slack(X)
        un = U @ self.normals.T
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(un > 0, slack / np.where(un > 0, un, 1.0), np.inf)
        return t.min(axis=1)

    def _depth(self, X):
        return self._slack(X).min(axis=1)

    def _signed(self, X):
        out = np.empty(X.shape[0])
        slack = self._slack(X)
        inside = np.all(slack > 0, axis=1)
        out[inside] = -slack[inside].min(axis=1)
        for i in np.flatnonzero(~inside):
            out[i] = self._outside_distance(X[i])
        return out

    def _outside_distance(self, x):
        if np.all(self._slack(x[None, :]) >= 0):
            return 0.0
        cons = {
            "type": "ineq",
            "fun": lambda z: self.offsets - self.normals @ z,
            "jac": lambda z: -self.normals,
        }
        res = optimize.minimize(
            lambda z: 0.5 * np.sum((z - x) ** 2),
            x - np.maximum(-self._slack(x[None, :])[0].min(), 0) * 0,
            jac=lambda z: z - x,
            constraints=[cons],
            method="SLSQP",
            options={"ftol": 1e-15, "maxiter": 500},
        )
        return float(np.linalg.norm(res.x - x))

    def _frame(self, x):
        slack = self._slack(x[None, :])[0]
        order = np.argsort(slack, kind="stable")
        if slack.size > 1 and slack[order[1]] - slack[order[0]] <= UNIQUENESS_TOL:
            raise NonUniqueProjectionError("point is equidistant from two faces")
        i = order[0]
        n = self.normals[i]
        return BoundaryFrame(x + slack[i] * n, n.copy(), float(slack[i]))

    def normal_hint(self, x):
        slack = self._slack(x[None, :])[0]
        return self.normals[int(np.argmin(slack))].copy()

    def bounding_box(self):
        if self._bbox is None:
            lo, hi = np.empty(self.dim), np.empty(self.dim)
            for j in range(self.dim):
                for sign, store in ((1.0, lo), (-1.0, hi)):
                    c = np.zeros(self.dim)
                    c[j] = sign
                    res = optimize.linprog(c, A_ub=self.normals, b_ub=self.offsets, bounds=[(None, None)] * self.dim)
                    if res.status != 0:
                        self._bbox = False
                        return None
                    store[j] = res.x[j]
            self._bbox = (lo, hi)
        return self._bbox or None

    def to_dict(self):
        return {
            "kind": self.kind,
            "faces": [{"normal": n.tolist(), "offset": float(b)} for n, b in zip(self.normals, self.offsets)],
        }


# ---------------------------------------------------------------------------
# implicit domains
# ---------------------------------------------------------------------------

def _central_gradient(rho, x, step):
    d = x.shape[0]
    E = np.eye(d) * step
    return (rho(x + E) - rho(x - E)) / (2 * step)


def _central_hessian(grad, x, step):
    d = x.shape[0]
    H = np.empty((d, d))
    for j in range(d):
        e = np.zeros(d)
        e[j] = step
        H[:, j] = (grad(x + e) - grad(x - e)) / (2 * step)
    return 0.5 * (H + H.T)


def _builtin_ellipsoid_level_set(dim, center=None, shape=None):
    c = np.zeros(dim) if center is None else np.asarray(center, dtype=float)
    q = np.linalg.inv(np.asarray(shape, dtype=float))
    return (
        lambda X: np.einsum("ij,jk,ik->i", np.atleast_2d(X) - c, q, np.atleast_2d(X) - c) - 1.0,
        lambda x: 2.0 * q @ (x - c),
        lambda x: 2.0 * q,
    )


def _builtin_sphere(dim, center=None, radius=1.0):
    c = np.zeros(dim) if center is None else np.asarray(center, dtype=float)
    r2 = float(radius) ** 2
    return (
        lambda X: np.sum((np.atleast_2d(X) - c) ** 2, axis=1) - r2,
        lambda x: 2.0 * (x - c),
        lambda x: 2.0 * np.eye(dim),
    )


def _builtin_cylinder(dim, axes=(0, 1), radius=1.0, center=None):
    c = np.zeros(dim) if center is None else np.asarray(center, dtype=float)
    mask = np.zeros(dim)
    mask[list(axes)] = 1.0
    r2 = float(radius) ** 2
    return (
        lambda X: np.sum(mask * (np.atleast_2d(X) - c) ** 2, axis=1) - r2,
        lambda x: 2.0 * mask * (x - c),
        lambda x: 2.0 * np.diag(mask),
    )


def _builtin_lp_ball(dim, p=4.0, radius=1.0, center=None):
    p = float(p)
    if p < 2:
        raise GeometryError("lp_ball needs p >= 2 for a C^2 boundary")
    c = np.zeros(dim) if center is None else np.asarray(center, dtype=float)
    r = float(radius)

    def rho(X):
        return np.sum(np.abs((np.atleast_2d(X) - c) / r) ** p, axis=1) - 1.0

    def grad(x):
        y = (x - c) / r
        return p * np.sign(y) * np.abs(y) ** (p - 1) / r

    def hess(x):
        y = (x - c) / r
        return np.diag(p * (p - 1) * np.abs(y) ** (p - 2) / r**2)

    return rho, grad, hess


def _builtin_affine(dim, normal=None, offset=0.0):
    n = np.asarray(normal, dtype=float)
    return (
        lambda X: np.atleast_2d(X) @ n - float(offset),
        lambda x: n.copy(),
        lambda x: np.zeros((dim, dim)),
    )


IMPLICIT_BUILTINS: dict[str, Callable] = {
    "ellipsoid_level_set": _builtin_ellipsoid_level_set,
    "sphere_level_set": _builtin_sphere,
    "cylinder": _builtin_cylinder,
    "lp_ball": _builtin_lp_ball,
    "affine": _builtin_affine,
}


class ImplicitSmooth(Domain):
    """Sublevel set ``{rho < 0}`` restricted to a bounding ball.

    ``rho`` must accept an ``(n, d)`` array and return ``(n,)`` values;
    ``grad`` and ``hess`` act on single points.  Rays that are still inside
    when they leave the bounding ball are reported as unbounded.
    """

    kind = "implicit"
    ray_tol = 1e-10
    newton_tol = 1e-13
    max_newton = 200
    n_starts = 8

    def __init__(
        self,
        rho,
        grad=None,
        hess=None,
        *,
        dim: int,
        bounding_radius: float,
        center=None,
        convex: bool = True,
        reach: float | None = None,
        finite_difference: bool = False,
        fd_step: float = 1e-5,
        builtin: str | None = None,
        params: dict | None = None,
    ):
        super().__init__(dim)
        if not bounding_radius > 0:
            raise GeometryError("bounding_radius must be positive")
        self.rho = rho
        if grad is None or hess is None:
            if not finite_difference:
                raise GeometryError("grad and hess are required unless finite_difference=True")
            g = grad if grad is not None else (lambda x: _central_gradient(rho, x, fd_step))
            grad = g
            hess = hess if hess is not None else (lambda x: _central_hessian(g, x, fd_step))
        self.grad = grad
        self.hess = hess
        self.bounding_radius = float(bounding_radius)
        self.center = np.zeros(dim) if center is None else _as_point(center, dim)
        self.convex = bool(convex)
        self.reach = 0.2 * self.bounding_radius if reach is None else float(reach)
        self.builtin = builtin
        self.params = params or {}

    @classmethod
    def from_builtin(cls, name: str, dim: int, params: dict | None = None, **kwargs) -> "ImplicitSmooth":
        if name not in IMPLICIT_BUILTINS:
            raise GeometryError(f"unknown implicit builtin {name!r}")
        params = dict(params or {})
        rho, grad, hess = IMPLICIT_BUILTINS[name](dim, **params)
        return cls(rho, grad, hess, dim=dim, builtin=name, params=params, **kwargs)

    def _inside(self, X):
        return (self.rho(X) < 0) & (np.linalg.norm(X - self.center, axis=1) < self.bounding_radius)

    def _ray(self, X, U):
        n = X.shape[0]
        limit = _ball_exit(X - self.center, U, self.bounding_radius)
        lo = np.zeros(n)
        hi = np.minimum(np.full(n, 1e-3), limit)
        open_ = np.ones(n, dtype=bool)
        while True:
            inside = self.rho(X + hi[:, None] * U) < 0
            grow = open_ & inside & (hi < limit)
            if not grow.any():
                break
            lo = np.where(grow, hi, lo)
            hi = np.where(grow, np.minimum(2.0 * hi, limit), hi)
            open_ = grow | (open_ & ~inside)
        unbounded = inside & (hi >= limit)
        while True:
            active = (~unbounded) & (hi - lo > self.ray_tol)
            if not active.any():
                break
            mid = 0.5 * (lo + hi)
            inside_mid = self.rho(X + mid[:, None] * U) < 0
            lo = np.where(active & inside_mid, mid, lo)
            hi = np.where(active & ~inside_mid, mid, hi)
        return np.where(unbounded, np.inf, 0.5 * (lo + hi))

    def _kkt_project(self, x, start):
        """Newton on the stationarity system of ``min |xi - x|`` with ``rho(xi) = 0``."""
        d = self.dim
        xi = start.copy()
        g = self.grad(xi)
        lam = -((xi - x) @ g) / (g @ g)

        def residual(xi, lam):
            g = self.grad(xi)
            return np.concatenate([xi - x + lam * g, self.rho(xi[None, :])]), g

        r, g = residual(xi, lam)
        scale = max(1.0, self.bounding_radius)
        for _ in range(self.max_newton):
            if np.linalg.norm(r) <= self.newton_tol * scale:
                return xi, lam
            J = np.zeros((d + 1, d + 1))
            J[:d, :d] = np.eye(d) + lam * self.hess(xi)
            J[:d, d] = g
            J[d, :d] = g
            try:
                step = np.linalg.solve(J, -r)
            except np.linalg.LinAlgError:
                step = np.linalg.lstsq(J, -r, rcond=None)[0]
            a = 1.0
            while True:
                xi_new, lam_new = xi + a * step[:d], lam + a * step[d]
                r_new, g_new = residual(xi_new, lam_new)
                if np.linalg.norm(r_new) < np.linalg.norm(r) or a < 1e-6:
                    break
                a *= 0.5
            xi, lam, r, g = xi_new, lam_new, r_new, g_new
        return None

    def _starts(self, x):
        g = self.grad(x)
        if np.linalg.norm(g) == 0:
            g = np.eye(self.dim)[0]
        B = orthonormal_completion(g / np.linalg.norm(g))
        dirs = [B[:, 0]]
        for j in range(1, self.dim):
            dirs += [B[:, j], -B[:, j]]
        dirs.append(-B[:, 0])
        return np.array(dirs[: self.n_starts])

    def _stationary_points(self, x):
        U = self._starts(x)
        t = self._ray(np.repeat(x[None, :], U.shape[0], axis=0), U)
        found = []
        for ti, u in zip(t, U):
            if not np.isfinite(ti):
                continue
            sol = self._kkt_project(x, x + ti * u)
            if sol is not None and sol[1] < 0:
                found.append(sol[0])
        if not found:
            raise ConvergenceError("boundary projection did not converge from any start")
        dist = np.array([np.linalg.norm(p - x) for p in found])
        ray_min = float(np.min(t))
        return np.array(found), dist, ray_min

    def _depth(self, X):
        return np.array([self._depth_one(x) for x in X])

    def _depth_one(self, x):
        _, dist, ray_min = self._stationary_points(x)
        return float(min(dist.min(), ray_min))

    def depth_estimate(self, X):
        vals = self.rho(X)
        grads = np.array([self.grad(x) for x in X])
        return np.maximum(-vals / np.maximum(np.linalg.norm(grads, axis=1), 1e-300), 0.0)

    def _frame(self, x):
        pts, dist, _ = self._stationary_points(x)
        order = np.argsort(dist, kind="stable")
        best = pts[order[0]]
        for j in order[1:]:
            if dist[j] - dist[order[0]] <= UNIQUENESS_TOL and np.linalg.norm(pts[j] - best) > 1e-6:
                raise NonUniqueProjectionError("two boundary points are equally close")
        delta = float(dist[order[0]])
        if delta >= self.reach:
            raise CollarError(f"depth {delta:.3g} exceeds the projection collar {self.reach:.3g}")
        g = self.grad(best)
        return BoundaryFrame(best, g / np.linalg.norm(g), delta)

    def _signed(self, X):
        out = np.empty(X.shape[0])
        vals = self.rho(X)
        for i, x in enumerate(X):
            if vals[i] < 0:
                out[i] = -self._depth_one(x)
            elif vals[i] == 0:
                out[i] = 0.0
            else:
                out[i] = self._outside_distance(x)
        return out

    def _outside_distance(self, x):
        best = math.inf
        starts = [x]
        B = orthonormal_completion(np.eye(self.dim)[0])
        starts += [x + 1e-3 * self.bounding_radius * B[:, j] for j in range(self.dim)]
        for s in starts:
            xi = s.copy()
            for _ in range(100):
                g = self.grad(xi)
                r = self.rho(xi[None, :])[0]
                xi = xi - r * g / (g @ g)
                if abs(r) < 1e-14:
                    break
            sol = self._kkt_project(x, xi)
            if sol is not None:
                best = min(best, float(np.linalg.norm(sol[0] - x)))
        if not np.isfinite(best):
            raise ConvergenceError("exterior projection did not converge")
        return best

    def project_to_boundary(self, p):
        """Newton steps along the gradient until ``rho(p) = 0``."""
        p = np.asarray(p, dtype=float).copy()
        for _ in range(self.max_newton):
            r = self.rho(p[None, :])[0]
            if abs(r) < 1e-14:
                return p
            g = self.grad(p)
            p = p - r * g / (g @ g)
        raise ConvergenceError("projection onto the level set did not converge")

    def normal_hint(self, x):
        g = self.grad(x)
        ng = np.linalg.norm(g)
        return g / ng if ng > 0 else None

    def bounding_box(self):
        return self.center - self.bounding_radius, self.center + self.bounding_radius

    def defining_function(self):
        return self.rho, self.grad, self.hess

    def to_dict(self):
        if self.builtin is None:
            raise UnsupportedDomainError("only builtin implicit domains serialize")
        return {
            "kind": self.kind,
            "dim": self.dim,
            "builtin": self.builtin,
            "params": _jsonable(self.params),
            "bounding_radius": self.bounding_radius,
            "center": self.center.tolist(),
            "convex": self.convex,
            "reach": self.reach,
        }


class Intersection(Domain):
    """Intersection of convex domains (used for localized metrics)."""

    kind = "intersection"

    def __init__(self, parts):
        parts = list(parts)
        if not parts:
            raise GeometryError("intersection needs at least one part")
        dims = {p.dim for p in parts}
        if len(dims) != 1:
            raise DimensionError("parts have different dimensions")
        super().__init__(dims.pop())
        self.parts = parts
        self.convex = all(p.convex for p in parts)

    def _inside(self, X):
        return np.logical_and.reduce([p._inside(X) for p in self.parts])

    def _ray(self, X, U):
        return np.min([p._ray(X, U) for p in self.parts], axis=0)

    def _depth(self, X):
        return np.min([p._depth(X) for p in self.parts], axis=0)

    def depth_estimate(self, X):
        return np.min([p.depth_estimate(X) for p in self.parts], axis=0)

    def _signed(self, X):
        out = np.empty(X.shape[0])
        inside = self._inside(X)
        out[inside] = -self._depth(X[inside])
        for i in np.flatnonzero(~inside):
            x = X[i]
            cons = [{"type": "ineq", "fun": (lambda z, p=p: -p._signed(z[None, :]))} for p in self.parts]
            res = optimize.minimize(
                lambda z: 0.5 * np.sum((z - x) ** 2), x, jac=lambda z: z - x,
                constraints=cons, method="SLSQP", options={"ftol": 1e-14, "maxiter": 500},
            )
            out[i] = float(np.linalg.norm(res.x - x))
        return out

    def _frame(self, x):
        depths = np.array([p._depth(x[None, :])[0] for p in self.parts])
        order = np.argsort(depths, kind="stable")
        if depths.size > 1 and depths[order[1]] - depths[order[0]] <= UNIQUENESS_TOL:
            raise NonUniqueProjectionError("point is equidistant from two parts of the boundary")
        return self.parts[order[0]]._frame(x)

    def normal_hint(self, x):
        depths = [p._depth(x[None, :])[0] for p in self.parts]
        return self.parts[int(np.argmin(depths))].normal_hint(x)

    def bounding_box(self):
        boxes = [p.bounding_box() for p in self.parts]
        boxes = [b for b in boxes if b is not None]
        if not boxes:
            return None
        return np.max([b[0] for b in boxes], axis=0), np.min([b[1] for b in boxes], axis=0)

    def to_dict(self):
        return {"kind": self.kind, "parts": [p.to_dict() for p in self.parts]}


# ---------------------------------------------------------------------------
# module-level operations and serialization
# ---------------------------------------------------------------------------

def contains(domain: Domain, x) -> bool:
    return domain.contains(_as_point(x, domain.dim))


def ray_boundary_distance(domain: Domain, x, u) -> float:
    return domain.ray_boundary_distance(x, u)


def line_boundary_distance(domain: Domain, x, v) -> float:
    return domain.line_boundary_distance(x, v)


def boundary_distance(domain: Domain, x) -> float:
    return domain.boundary_distance(x)


def boundary_frame(domain: Domain, x) -> BoundaryFrame:
    return domain.boundary_frame(x)


def signed_distance(domain: Domain, x) -> float:
    return domain.signed_distance(_as_point(x, domain.dim))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def domain_from_dict(doc: dict) -> Domain:
    kind = doc.get("kind")
    try:
        if kind == "ball":
            return Ball(doc["center"], doc["radius"])
        if kind == "half_space":
            return HalfSpace(doc["base"], doc["normal"])
        if kind == "slab":
            return Slab(doc["base"], doc["normal"], doc["half_width"])
        if kind == "ellipsoid":
            return Ellipsoid(doc["center"], doc["shape"])
        if kind == "polytope":
            return Polytope([(f["normal"], f["offset"]) for f in doc["faces"]])
        if kind == "implicit":
            return ImplicitSmooth.from_builtin(
                doc["builtin"],
                int(doc["dim"]),
                doc.get("params"),
                bounding_radius=doc["bounding_radius"],
                center=doc.get("center"),
                convex=doc.get("convex", True),
                reach=doc.get("reach"),
            )
        if kind == "intersection":
            return Intersection([domain_from_dict(p) for p in doc["parts"]])
    except KeyError as exc:
        raise GeometryError(f"domain document of kind {kind!r} is missing field {exc}") from None
    raise GeometryError(f"unknown domain kind {kind!r}")


def load_domain(path) -> Domain:
    return domain_from_dict(json.loads(Path(path).read_text()))


def dump_domain(domain: Domain, path) -> None:
    Path(path).write_text(json.dumps(domain.to_dict(), indent=2, sort_keys=True) + "\n")
