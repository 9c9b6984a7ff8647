import numpy as np


def unit(v: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v)
    if n == 0.0:
        raise ValueError("zero vector has no direction")
    return v / n


def orthonormal_completion(u: np.ndarray) -> np.ndarray:
    """Orthogonal matrix whose first column is the unit vector ``u``.

    Built from a single Householder reflection, so the result is a
    deterministic function of ``u``.
    """
    u = np.asarray(u, dtype=float)
    d = u.shape[0]
    s = 1.0 if u[0] >= 0 else -1.0
    w = u.copy()
    w[0] += s
    ww = w @ w
    basis = np.eye(d) - (2.0 / ww) * np.outer(w, w)
    basis[:, 0] *= -s
    return basis


def canonical_sign(v: np.ndarray) -> np.ndarray:
    """Flip ``v`` so its first non-negligible entry is positive."""
    idx = np.flatnonzero(np.abs(v) > 1e-300)
    if idx.size and v[idx[0]] < 0:
        return -v
    return v
