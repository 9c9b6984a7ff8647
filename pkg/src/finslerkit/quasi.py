"""Boundary quasi-distance ``a_D`` and the logarithmic family ``d^c``."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .domains import BoundaryFrame
from .errors import GeometryError


@dataclass(frozen=True)
class QuasiDistanceParams:
    c: float = 1.0

    def __post_init__(self):
        if not self.c > 0:
            raise GeometryError("c must be positive")


def _check_frame(frame: BoundaryFrame) -> None:
    if not frame.delta > 0:
        raise GeometryError("quasi-distances need interior points (positive depth)")


def a_D(frame_x: BoundaryFrame, frame_y: BoundaryFrame) -> float:
    _check_frame(frame_x)
    _check_frame(frame_y)
    if frame_x is frame_y or (
        frame_x.delta == frame_y.delta and np.array_equal(frame_x.foot, frame_y.foot)
    ):
        return 0.0
    return float(a_matrix(frame_x.foot, frame_x.delta, frame_y.foot, frame_y.delta))


def d_c(params: QuasiDistanceParams | float, frame_x: BoundaryFrame, frame_y: BoundaryFrame) -> float:
    c = params.c if isinstance(params, QuasiDistanceParams) else float(params)
    return float(2.0 * np.log1p(c * a_D(frame_x, frame_y)))


def frame_arrays(frames) -> tuple[np.ndarray, np.ndarray]:
    """Stack feet and depths of a frame list."""
    frames = list(frames)
    for f in frames:
        _check_frame(f)
    return np.array([f.foot for f in frames]), np.array([f.delta for f in frames])


def a_matrix(feet_x, delta_x, feet_y, delta_y) -> np.ndarray:
    """Broadcast ``a_D`` over arrays of feet ``(..., d)`` and depths ``(...)``.

    Written as ``gap / sqrt(hx hy) + (sqrt(h_max / h_min) - 1)`` with the
    second term in cancellation-free form, so distinct points never round
    to zero.
    """
    dx, dy = np.asarray(delta_x, dtype=float), np.asarray(delta_y, dtype=float)
    hx, hy = np.sqrt(dx), np.sqrt(dy)
    hi, lo = np.maximum(hx, hy), np.minimum(hx, hy)
    diff = np.asarray(feet_x, dtype=float) - np.asarray(feet_y, dtype=float)
    # scaled norm so tiny gaps do not underflow to zero
    scale = np.max(np.abs(diff), axis=-1)
    safe = np.where(scale > 0, scale, 1.0)
    gap = scale * np.linalg.norm(diff / safe[..., None], axis=-1)
    geo = np.sqrt(hx * hy)
    depth_term = np.abs(dx - dy) / ((hi + lo) * (geo + lo))
    return gap / geo + depth_term


def dc_values(c: float, a) -> np.ndarray:
    return 2.0 * np.log1p(c * np.asarray(a))


def quasi_triangle_constant(params: QuasiDistanceParams | float, frames, triples=None) -> float:
    """Largest ``d(x,y) / (d(x,z) + d(z,y))`` over the sampled triples.

    With ``triples=None`` every ordered triple of distinct frames is used.
    """
    c = params.c if isinstance(params, QuasiDistanceParams) else float(params)
    feet, delta = frame_arrays(frames)
    if len(delta) < 3:
        raise GeometryError("need at least three frames")
    A = a_matrix(feet[:, None, :], delta[:, None], feet[None, :, :], delta[None, :])
    Dc = dc_values(c, A)
    if triples is None:
        n = len(delta)
        triples = np.array(list(itertools.permutations(range(n), 3)))
    triples = np.asarray(triples)
    i, j, k = triples[:, 0], triples[:, 1], triples[:, 2]
    num = Dc[i, j]
    den = Dc[i, k] + Dc[k, j]
    ok = den > 0
    if not ok.any():
        raise GeometryError("fewer than three distinct points in the sample")
    return float(max(1.0, np.max(num[ok] / den[ok])))
