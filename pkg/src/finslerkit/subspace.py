"""Max-min search over k-dimensional subspaces containing a fixed vector.

``delta_k(D, x, v, k)`` is the largest, over k-planes ``V`` through ``v``, of
the smallest ray-exit distance from ``x`` in a direction of ``V``.  The outer
maximum lives on a Grassmannian and is searched by random restarts plus
Givens-rotation hill climbing; the inner minimum is over the unit sphere of
``V`` and is found by dense sampling followed by local refinement.  All
candidate subspaces of one iteration are evaluated in a single batch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._linalg import canonical_sign, orthonormal_completion
from .domains import Domain, _as_point
from .errors import GeometryError

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class DeltaKOptions:
    restarts: int = 32
    climbers: int = 3
    inner_samples: int = 128
    inner_starts: int = 2
    golden_iters: int = 24
    chart_tol: float = 1e-6
    chart_shrink: float = 0.25
    initial_step: float = 0.5
    min_step: float = 1e-6
    min_gain: float = 1e-9
    cap_tol: float = 1e-12
    use_seed: bool = True
    max_iter: int = 200
    seed: int = 0


@dataclass(frozen=True)
class SubspaceFrame:
    """Orthonormal ``d x k`` basis whose first column is the unit direction."""

    vectors: np.ndarray

    @property
    def k(self) -> int:
        return self.vectors.shape[1]

    def gram_error(self) -> float:
        V = self.vectors
        return float(np.abs(V.T @ V - np.eye(V.shape[1])).max())


@dataclass(frozen=True)
class DeltaKResult:
    value: float
    frame: SubspaceFrame | None
    evaluations: int = 0
    converged: bool = True
    notes: tuple[str, ...] = field(default_factory=tuple)


def _batch_completion(S: np.ndarray) -> np.ndarray:
    """Householder completions of many unit rows; returns ``(n, k, k)``."""
    n, k = S.shape
    s = np.where(S[:, 0] >= 0, 1.0, -1.0)
    W = S.copy()
    W[:, 0] += s
    ww = np.einsum("ij,ij->i", W, W)
    Q = np.eye(k)[None, :, :] - (2.0 / ww)[:, None, None] * np.einsum("ni,nj->nij", W, W)
    Q[:, :, 0] *= -s[:, None]
    return Q


class _SliceProblem:
    """Inner minimum ``min_{u in S(V)} ray(x, u)`` for batches of planes."""

    def __init__(self, domain: Domain, x: np.ndarray, v_hat: np.ndarray, k: int, opts: DeltaKOptions, rng):
        self.domain = domain
        self.x = x
        self.v_hat = v_hat
        self.k = k
        self.opts = opts
        self.evaluations = 0
        n = opts.inner_samples
        if k == 2:
            self.theta = 2.0 * np.pi * np.arange(n) / n
            self.samples = np.stack([np.cos(self.theta), np.sin(self.theta)], axis=1)
        else:
            S = rng.normal(size=(n, k))
            S[0] = np.eye(k)[0]
            S[1] = -np.eye(k)[0]
            self.samples = S / np.linalg.norm(S, axis=1, keepdims=True)

    def rays(self, U: np.ndarray) -> np.ndarray:
        """Ray exits for a ``(..., d)`` stack of unit directions."""
        shape = U.shape[:-1]
        flat = U.reshape(-1, U.shape[-1])
        self.evaluations += flat.shape[0]
        X = np.broadcast_to(self.x, flat.shape)
        return self.domain._ray(X, flat).reshape(shape)

    def __call__(self, bases: np.ndarray) -> np.ndarray:
        """``bases`` has shape ``(m, d, k)``; returns the inner minimum per plane."""
        U = np.einsum("sk,mdk->msd", self.samples, bases)
        R = self.rays(U)
        best = R.min(axis=1)
        finite = np.isfinite(best)
        if not finite.any():
            return best
        if self.k == 2:
            refined = self._golden(bases[finite], R[finite])
        else:
            refined = self._compass(bases[finite], R[finite])
        best[finite] = np.minimum(best[finite], refined)
        return best

    def _starts(self, R: np.ndarray) -> np.ndarray:
        n = R.shape[1]
        if self.k == 2:
            local = (R <= np.roll(R, 1, axis=1)) & (R <= np.roll(R, -1, axis=1))
            score = np.where(local, R, np.inf)
        else:
            score = R
        order = np.argsort(score, axis=1, kind="stable")[:, : self.opts.inner_starts]
        # fall back to the global best when fewer local minima exist
        first = order[:, :1]
        picked = np.take_along_axis(score, order, axis=1)
        return np.where(np.isfinite(picked), order, first) % n

    def _golden(self, bases, R):
        m = bases.shape[0]
        idx = self._starts(R)
        h = 2.0 * np.pi / self.theta.size
        a = self.theta[idx] - h
        b = self.theta[idx] + h
        c0, c1 = bases[:, :, 0], bases[:, :, 1]

        def f(t):
            U = np.cos(t)[:, :, None] * c0[:, None, :] + np.sin(t)[:, :, None] * c1[:, None, :]
            return self.rays(U)

        c = b - GOLDEN * (b - a)
        d = a + GOLDEN * (b - a)
        fc, fd = f(c), f(d)
        for _ in range(self.opts.golden_iters):
            left = fc < fd
            b = np.where(left, d, b)
            a = np.where(left, a, c)
            new_c = b - GOLDEN * (b - a)
            new_d = a + GOLDEN * (b - a)
            c_next = np.where(left, new_c, d)
            d_next = np.where(left, c, new_d)
            probe = np.where(left, new_c, new_d)
            fp = f(probe)
            fc, fd = np.where(left, fp, fd), np.where(left, fc, fp)
            c, d = c_next, d_next
        return np.minimum(fc, fd).min(axis=1).reshape(m)

    def _compass(self, bases, R):
        m = bases.shape[0]
        k = self.k
        idx = self._starts(R)
        s = idx.shape[1]
        S0 = self.samples[idx].reshape(m * s, k)
        T = _batch_completion(S0)[:, :, 1:]
        B = np.repeat(bases, s, axis=0)
        C = np.zeros((m * s, k - 1))
        cur = np.take_along_axis(R, idx, axis=1).reshape(m * s)
        step = np.full(m * s, 0.5 * math.sqrt(4.0 * np.pi / self.samples.shape[0]))
        moves = np.concatenate([np.eye(k - 1), -np.eye(k - 1)])
        for _ in range(400):
            active = step > self.opts.chart_tol
            if not active.any():
                break
            a = np.flatnonzero(active)
            cand = C[a, None, :] + step[a, None, None] * moves[None, :, :]
            Y = S0[a, None, :] + np.einsum("nkj,ncj->nck", T[a], cand)
            Y /= np.linalg.norm(Y, axis=2, keepdims=True)
            U = np.einsum("nck,ndk->ncd", Y, B[a])
            vals = self.rays(U)
            j = np.argmin(vals, axis=1)
            bv = vals[np.arange(a.size), j]
            better = bv < cur[a]
            C[a[better]] = cand[better, j[better]]
            cur[a[better]] = bv[better]
            step[a[~better]] *= self.opts.chart_shrink
        return cur.reshape(m, s).min(axis=1)


def _givens_pairs(k: int, d: int):
    # rotate a chosen complement column (i < k-1) into an unchosen one
    return [(i, j) for i in range(k - 1) for j in range(k - 1, d - 1)]


def _rotate(Q: np.ndarray, i: int, j: int, angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    out = Q.copy()
    qi, qj = Q[:, i], Q[:, j]
    out[:, i] = c * qi + s * qj
    out[:, j] = -s * qi + c * qj
    return out


def _seed_rotation(perp: np.ndarray, hint: np.ndarray | None) -> np.ndarray:
    """Rotation whose chosen columns avoid the normal component off ``v``."""
    m = perp.shape[1]
    if hint is None:
        return np.eye(m)
    coords = perp.T @ hint
    norm = np.linalg.norm(coords)
    if norm < 1e-12:
        return np.eye(m)
    Q = orthonormal_completion(coords / norm)
    # put the normal direction last so it is never part of the plane
    return np.roll(Q, -1, axis=1)


def solve_delta_k(domain: Domain, x, v, k: int, options: DeltaKOptions | None = None, rng=None) -> DeltaKResult:
    """Numerically evaluate ``delta_k`` and return the maximizing frame."""
    opts = options or DeltaKOptions()
    x = domain._require_inside(x)
    v = _as_point(v, domain.dim)
    d = domain.dim
    if not 1 <= k <= d:
        raise GeometryError(f"k must lie in [1, {d}], got {k}")
    norm = np.linalg.norm(v)
    if norm == 0.0:
        raise GeometryError("delta_k needs a nonzero vector")
    v_hat = canonical_sign(v / norm)
    if k == 1:
        t = domain._ray(np.vstack([x, x]), np.vstack([v_hat, -v_hat]))
        return DeltaKResult(float(t.min()), SubspaceFrame(v_hat[:, None]), 2)
    if k == d:
        return DeltaKResult(float(domain._depth(x[None, :])[0]), SubspaceFrame(orthonormal_completion(v_hat)), 1)

    if rng is None:
        rng = np.random.default_rng(opts.seed)
    perp = orthonormal_completion(v_hat)[:, 1:]
    problem = _SliceProblem(domain, x, v_hat, k, opts, rng)

    def bases_of(Qs):
        W = np.einsum("dm,nmj->ndj", perp, np.asarray(Qs)[:, :, : k - 1])
        V = np.broadcast_to(v_hat[None, :, None], (W.shape[0], d, 1))
        return np.concatenate([V, W], axis=2)

    hint = domain.normal_hint(x) if opts.use_seed else None
    starts = [_seed_rotation(perp, hint)]
    for _ in range(opts.restarts):
        G = rng.normal(size=(d - 1, d - 1))
        Q, R = np.linalg.qr(G)
        starts.append(Q * np.sign(np.diag(R)))
    values = problem(bases_of(starts))

    def done(value, Q):
        return DeltaKResult(float(value), SubspaceFrame(bases_of([Q])[0]), problem.evaluations)

    if np.isinf(values).any():
        i = int(np.flatnonzero(np.isinf(values))[0])
        return done(np.inf, starts[i])
    # every plane contains +-v, so the line distance caps the maximum
    cap = float(problem.rays(np.stack([v_hat, -v_hat])).min())
    if values.max() >= cap * (1.0 - opts.cap_tol):
        i = int(np.argmax(values))
        return done(values[i], starts[i])

    pairs = _givens_pairs(k, d)
    if not pairs:
        i = int(np.argmax(values))
        return done(values[i], starts[i])
    order = [0] + [int(i) for i in np.argsort(-values[1:], kind="stable")[: opts.climbers] + 1]
    Qs = [starts[i] for i in order]
    cur = values[order].copy()
    step = np.full(len(Qs), opts.initial_step)
    converged = True
    for it in range(opts.max_iter):
        active = np.flatnonzero(step >= opts.min_step)
        if active.size == 0:
            break
        cands, owner = [], []
        for a in active:
            for i, j in pairs:
                for sgn in (1.0, -1.0):
                    cands.append(_rotate(Qs[a], i, j, sgn * step[a]))
                    owner.append(a)
        vals = problem(bases_of(cands))
        owner = np.array(owner)
        if np.isinf(vals).any():
            c = int(np.flatnonzero(np.isinf(vals))[0])
            return done(np.inf, cands[c])
        for a in active:
            mine = np.flatnonzero(owner == a)
            best = mine[int(np.argmax(vals[mine]))]
            if vals[best] > cur[a] * (1.0 + opts.min_gain):
                Qs[a], cur[a] = cands[best], vals[best]
            else:
                step[a] *= 0.5
    else:
        converged = False
    b = int(np.argmax(cur))
    res = done(cur[b], Qs[b])
    if not converged:
        return DeltaKResult(res.value, res.frame, res.evaluations, False, ("hill climbing hit the iteration cap",))
    return res


def delta_k(domain: Domain, x, v, k: int, options: DeltaKOptions | None = None, rng=None) -> float:
    return solve_delta_k(domain, x, v, k, options, rng).value
