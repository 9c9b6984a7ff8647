"""Finsler metrics on convex domains and their closed forms.

Every metric exposes ``evaluate(x, v)`` for a single checked input and
``_eval(X, V)`` for unchecked row batches, which is what quadrature calls.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._linalg import orthonormal_completion
from .domains import Ball, BoundaryFrame, Domain, HalfSpace, Slab, _as_point, decompose
from .errors import CollarError, GeometryError, UnsupportedDomainError
from .subspace import DeltaKOptions, solve_delta_k


class FinslerMetric:
    name = ""
    symmetric = True

    def __init__(self, domain: Domain):
        self.domain = domain

    def _eval(self, X: np.ndarray, V: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def evaluate(self, x, v) -> float:
        x = self.domain._require_inside(x)
        v = _as_point(v, self.domain.dim)
        return float(self._eval(x[None, :], v[None, :])[0])

    __call__ = evaluate

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.domain!r})"


def _split(V: np.ndarray):
    norm = np.linalg.norm(V, axis=1)
    safe = np.where(norm > 0, norm, 1.0)
    return norm, V / safe[:, None]


def _bk_unit(X: np.ndarray, V: np.ndarray) -> np.ndarray:
    s = 1.0 - np.einsum("ij,ij->i", X, X)
    xv = np.einsum("ij,ij->i", X, V)
    vv = np.einsum("ij,ij->i", V, V)
    return np.sqrt(vv / s + (xv / s) ** 2)


class BeltramiKlein(FinslerMetric):
    name = "bk"

    def __init__(self, domain: Domain):
        if not isinstance(domain, Ball):
            raise UnsupportedDomainError("the Beltrami-Klein metric is defined on balls")
        super().__init__(domain)

    def _eval(self, X, V):
        b = self.domain
        return _bk_unit((X - b.center) / b.radius, V) / b.radius


def beltrami_klein(ball: Ball, x, v) -> float:
    return BeltramiKlein(ball).evaluate(x, v)


class Funk(FinslerMetric):
    """``|v|`` over the forward exit distance; zero when the ray never leaves."""

    name = "funk"
    symmetric = False

    def _eval(self, X, V):
        norm, U = _split(V)
        t = self.domain._ray(X, U)
        with np.errstate(divide="ignore"):
            out = norm / t
        return np.where(norm > 0, out, 0.0)


class KobayashiHilbert(FinslerMetric):
    name = "kh"

    def _eval(self, X, V):
        norm, U = _split(V)
        t = self.domain._ray(np.vstack([X, X]), np.vstack([U, -U]))
        n = X.shape[0]
        with np.errstate(divide="ignore"):
            out = 0.5 * (norm / t[:n] + norm / t[n:])
        return np.where(norm > 0, out, 0.0)


def funk(domain: Domain, x, v) -> float:
    return Funk(domain).evaluate(x, v)


def kobayashi_hilbert(domain: Domain, x, v) -> float:
    return KobayashiHilbert(domain).evaluate(x, v)


def hilbert_distance_closed_form(domain: Domain, x, y) -> float:
    """Cross-ratio distance along the chord through ``x`` and ``y``."""
    if not domain.convex:
        raise UnsupportedDomainError("the cross-ratio formula needs a convex domain")
    x = domain._require_inside(x)
    y = domain._require_inside(y)
    return float(hilbert_distances(domain, x[None, :], y[None, :])[0])


def hilbert_distances(domain: Domain, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Unchecked batch version of :func:`hilbert_distance_closed_form`."""
    L, U = _split(Y - X)
    ta = domain._ray(X, -U)
    tb = domain._ray(Y, U)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = 0.5 * (np.log1p(L / ta) + np.log1p(L / tb))
    return np.where(L > 0, out, 0.0)


# ---------------------------------------------------------------------------
# k-quasi-hyperbolic metrics
# ---------------------------------------------------------------------------

def _closed_delta_k(domain: Domain, X: np.ndarray, V: np.ndarray, k: int) -> np.ndarray | None:
    d = domain.dim
    norm, U = _split(V)
    if k == d:
        return domain._depth(X)
    if k == 1 or isinstance(domain, Ball):
        t = domain._ray(np.vstack([X, X]), np.vstack([U, -U]))
        return np.minimum(t[: X.shape[0]], t[X.shape[0]:])
    if isinstance(domain, (HalfSpace, Slab)):
        un = np.abs(U @ domain.normal)
        with np.errstate(divide="ignore"):
            return np.where(un > 0, domain._depth(X) / np.where(un > 0, un, 1.0), np.inf)
    return None


def delta_k_closed_form(domain: Domain, x, v, k: int) -> float | None:
    """Exact ``delta_k`` where a formula is known, otherwise ``None``."""
    x = domain._require_inside(x)
    v = _as_point(v, domain.dim)
    if not 1 <= k <= domain.dim:
        raise GeometryError(f"k must lie in [1, {domain.dim}]")
    if np.linalg.norm(v) == 0:
        raise GeometryError("delta_k needs a nonzero vector")
    out = _closed_delta_k(domain, x[None, :], v[None, :], k)
    return None if out is None else float(out[0])


class QuasiHyperbolic(FinslerMetric):
    """``|v| / (2 delta_k(x, v))``, with 0 where ``delta_k`` is unbounded.

    ``method="auto"`` uses exact formulas where they exist (k = 1, k = d,
    balls, half-spaces, slabs) and the subspace optimizer elsewhere;
    ``method="numeric"`` always runs the optimizer.
    """

    def __init__(self, domain: Domain, k: int, method: str = "auto", options: DeltaKOptions | None = None):
        super().__init__(domain)
        if not 1 <= k <= domain.dim:
            raise GeometryError(f"k must lie in [1, {domain.dim}], got {k}")
        if method not in ("auto", "numeric"):
            raise ValueError(f"unknown method {method!r}")
        self.k = k
        self.method = method
        self.options = options or DeltaKOptions()
        self.name = f"qk:{k}"

    def deltas(self, X: np.ndarray, V: np.ndarray) -> np.ndarray:
        if self.method == "auto":
            out = _closed_delta_k(self.domain, X, V, self.k)
            if out is not None:
                return out
        norm = np.linalg.norm(V, axis=1)
        out = np.full(X.shape[0], np.inf)
        for i in np.flatnonzero(norm > 0):
            out[i] = solve_delta_k(self.domain, X[i], V[i], self.k, self.options).value
        return out

    def _eval(self, X, V):
        norm = np.linalg.norm(V, axis=1)
        if not (norm > 0).any():
            return np.zeros(X.shape[0])
        delta = self.deltas(X, V)
        with np.errstate(invalid="ignore"):
            return np.where(np.isinf(delta) | (norm == 0), 0.0, norm / (2.0 * delta))


def delta_k(domain: Domain, x, v, k: int, method: str = "numeric", options: DeltaKOptions | None = None) -> float:
    if method == "auto":
        exact = delta_k_closed_form(domain, x, v, k)
        if exact is not None:
            return exact
    return solve_delta_k(domain, x, v, k, options).value


def q_k(domain: Domain, x, v, k: int, method: str = "numeric", options: DeltaKOptions | None = None) -> float:
    return QuasiHyperbolic(domain, k, method, options).evaluate(x, v)


def _standard_height(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] < 2:
        raise GeometryError("expected a point with at least two coordinates")
    if not x[0] > 0:
        raise GeometryError("the standard half-space needs x_1 > 0")
    return x


def half_space_qk_closed_form(x, v, k: int) -> float:
    """``|v_1| / (2 x_1)`` on ``{x_1 > 0}`` for ``1 <= k <= d - 1``."""
    x = _standard_height(x)
    v = _as_point(v, x.shape[0])
    if not 1 <= k <= x.shape[0] - 1:
        raise GeometryError("the half-space formula holds for 1 <= k <= d - 1")
    return float(abs(v[0]) / (2.0 * x[0]))


def half_space_minimal(x, v) -> float:
    x = _standard_height(x)
    v = _as_point(v, x.shape[0])
    return float(abs(v[0]) / (2.0 * x[0]))


class HalfSpaceMinimal(FinslerMetric):
    name = "hs-min"

    def __init__(self, domain: Domain):
        if not isinstance(domain, HalfSpace):
            raise UnsupportedDomainError("the half-space minimal metric needs a half-space")
        super().__init__(domain)

    def _eval(self, X, V):
        return np.abs(V @ self.domain.normal) / (2.0 * self.domain._depth(X))


# ---------------------------------------------------------------------------
# two-sided bound shapes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundTemplate:
    """Normal modulus ``omega(t) = omega0 * t**alpha`` with constants ``c1 <= C1``."""

    omega0: float = 0.0
    alpha: float = 1.0
    c1: float = 1.0
    C1: float = 1.0

    def __post_init__(self):
        if self.omega0 < 0 or not self.alpha > 0:
            raise GeometryError("need omega0 >= 0 and alpha > 0")
        if not 0 < self.c1 <= self.C1:
            raise GeometryError("need 0 < c1 <= C1")

    def omega(self, t):
        return self.omega0 * np.asarray(t, dtype=float) ** self.alpha


def bound_template_values(t: BoundTemplate, side: str, delta, vn, vt) -> np.ndarray:
    """Vectorized template on depths and normal/tangential norms."""
    delta = np.asarray(delta, dtype=float)
    w = t.omega(delta)
    if side == "lower":
        if np.any(1.0 - w <= 0):
            raise CollarError("1 - omega(delta) must stay positive on the lower side")
        return np.maximum((1.0 - w) * vn / (2.0 * delta), t.c1 * vt / np.sqrt(delta))
    if side == "upper":
        return (1.0 + w) * vn / (2.0 * delta) + t.C1 * vt / np.sqrt(delta)
    raise ValueError(f"side must be 'lower' or 'upper', got {side!r}")


def bound_template_eval(t: BoundTemplate, side: str, frame: BoundaryFrame, v) -> float:
    v_n, v_t = decompose(frame, v)
    return float(bound_template_values(t, side, frame.delta, np.linalg.norm(v_n), np.linalg.norm(v_t)))


class BoundTemplateMetric(FinslerMetric):
    def __init__(self, domain: Domain, template: BoundTemplate, side: str):
        if side not in ("lower", "upper"):
            raise ValueError(f"side must be 'lower' or 'upper', got {side!r}")
        super().__init__(domain)
        self.template = template
        self.side = side
        t = template
        self.name = f"tmpl:{side}:{t.omega0:g}:{t.alpha:g}:{t.c1:g}:{t.C1:g}"

    def _eval(self, X, V):
        out = np.empty(X.shape[0])
        for i, (x, v) in enumerate(zip(X, V)):
            out[i] = bound_template_eval(self.template, self.side, self.domain._frame(x), v)
        return out


def ball_lower_bound(r: float, delta, vn, vt):
    """Lower two-sided estimate of the Beltrami-Klein metric of a radius-r ball."""
    delta = np.asarray(delta, dtype=float)
    return np.sqrt(np.asarray(vn) ** 2 / (4.0 * delta**2) + np.asarray(vt) ** 2 / (2.0 * r * delta))


def ball_upper_bound(r: float, delta, vn, vt):
    delta = np.asarray(delta, dtype=float)
    s = delta / r
    return np.sqrt(
        (1.0 + 3.0 * s) * np.asarray(vn) ** 2 / (4.0 * delta**2)
        + (1.0 + s) * np.asarray(vt) ** 2 / (2.0 * r * delta)
    )


def ball_bracket(ball: Ball, X: np.ndarray, V: np.ndarray):
    """``(lower, value, upper)`` for batches of off-center interior points."""
    D = X - ball.center
    rho = np.linalg.norm(D, axis=1)
    N = D / rho[:, None]
    vn = np.abs(np.einsum("ij,ij->i", V, N))
    vt = np.linalg.norm(V - (V * N).sum(axis=1, keepdims=True) * N, axis=1)
    delta = ball.radius - rho
    value = BeltramiKlein(ball)._eval(X, V)
    return ball_lower_bound(ball.radius, delta, vn, vt), value, ball_upper_bound(ball.radius, delta, vn, vt)


def tangent_ball_upper_bound(domain: Domain, frame: BoundaryFrame, v, eps: float) -> float:
    """Beltrami-Klein metric of the radius-``eps`` ball tangent inside at the foot."""
    if not frame.delta < eps:
        raise CollarError(f"depth {frame.delta:g} is not below the tangent radius {eps:g}")
    ball = Ball(frame.foot - eps * frame.normal, eps)
    v = _as_point(v, domain.dim)
    return float(BeltramiKlein(ball)._eval(frame.point[None, :], v[None, :])[0])


# ---------------------------------------------------------------------------
# boundary convexity classifier
# ---------------------------------------------------------------------------

EIGEN_TOL = 1e-10


@dataclass(frozen=True)
class ConvexityClass:
    eigenvalues: tuple[float, ...]
    dim: int
    positive: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "positive", sum(1 for e in self.eigenvalues if e > EIGEN_TOL))

    @property
    def strongly_convex(self) -> bool:
        return self.positive == len(self.eigenvalues)

    def k_strongly_convex(self, k: int) -> bool:
        return self.positive >= self.dim - k

    @property
    def min_k(self) -> int:
        """Smallest ``k`` for which the point is k-strongly convex."""
        return self.dim - self.positive

    @property
    def minimally_convex(self) -> bool | None:
        if len(self.eigenvalues) < 2:
            return None
        return self.eigenvalues[0] + self.eigenvalues[1] > EIGEN_TOL

    def to_dict(self) -> dict:
        return {
            "eigenvalues": list(self.eigenvalues),
            "stronglyConvex": self.strongly_convex,
            "minK": self.min_k,
            "stronglyMinimallyConvex": self.minimally_convex,
        }


def classify_boundary_point(domain: Domain, xi, on_boundary_tol: float = 1e-8) -> ConvexityClass:
    """Eigenvalues of the defining-function Hessian on the tangent space at ``xi``."""
    fns = domain.defining_function()
    if fns is None:
        raise UnsupportedDomainError(f"{domain.kind} has no smooth defining function")
    rho, grad, hess = fns
    xi = _as_point(xi, domain.dim)
    if abs(float(rho(xi[None, :])[0])) > on_boundary_tol:
        raise GeometryError("point is not on the boundary")
    g = np.asarray(grad(xi), dtype=float)
    gn = np.linalg.norm(g)
    if gn < 1e-12:
        raise GeometryError("defining function has a degenerate gradient here")
    T = orthonormal_completion(g / gn)[:, 1:]
    H = T.T @ np.asarray(hess(xi), dtype=float) @ T
    eig = np.linalg.eigvalsh(0.5 * (H + H.T))
    eig = np.where(np.abs(eig) < EIGEN_TOL, 0.0, eig)
    return ConvexityClass(tuple(float(e) for e in eig), domain.dim)


# ---------------------------------------------------------------------------
# selection strings
# ---------------------------------------------------------------------------

def parse_metric(selection: str, domain: Domain, options: DeltaKOptions | None = None) -> FinslerMetric:
    """Build a metric from ``bk``, ``funk``, ``kh``, ``qk:<k>``, ``hs-min`` or ``tmpl:...``."""
    parts = selection.strip().split(":")
    head = parts[0]
    try:
        if head == "bk" and len(parts) == 1:
            return BeltramiKlein(domain)
        if head == "funk" and len(parts) == 1:
            return Funk(domain)
        if head == "kh" and len(parts) == 1:
            return KobayashiHilbert(domain)
        if head == "hs-min" and len(parts) == 1:
            return HalfSpaceMinimal(domain)
        if head == "qk" and len(parts) in (2, 3):
            method = parts[2] if len(parts) == 3 else "auto"
            return QuasiHyperbolic(domain, int(parts[1]), method, options)
        if head == "tmpl" and len(parts) == 6:
            t = BoundTemplate(float(parts[2]), float(parts[3]), float(parts[4]), float(parts[5]))
            return BoundTemplateMetric(domain, t, parts[1])
    except ValueError as exc:
        raise ValueError(f"bad metric selection {selection!r}: {exc}") from None
    raise ValueError(f"unknown metric selection {selection!r}")


__all__ = [
    "FinslerMetric",
    "BeltramiKlein",
    "Funk",
    "KobayashiHilbert",
    "QuasiHyperbolic",
    "HalfSpaceMinimal",
    "BoundTemplate",
    "BoundTemplateMetric",
    "ConvexityClass",
    "beltrami_klein",
    "funk",
    "kobayashi_hilbert",
    "hilbert_distance_closed_form",
    "hilbert_distances",
    "delta_k",
    "delta_k_closed_form",
    "q_k",
    "half_space_qk_closed_form",
    "half_space_minimal",
    "bound_template_eval",
    "bound_template_values",
    "ball_lower_bound",
    "ball_upper_bound",
    "ball_bracket",
    "tangent_ball_upper_bound",
    "classify_boundary_point",
    "parse_metric",
]
