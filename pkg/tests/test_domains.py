import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from finslerkit import (
    Ball,
    DimensionError,
    Ellipsoid,
    HalfSpace,
    ImplicitSmooth,
    Intersection,
    NonUniqueProjectionError,
    OutsideDomainError,
    Polytope,
    Slab,
    boundary_distance,
    boundary_frame,
    contains,
    domain_from_dict,
    dump_domain,
    line_boundary_distance,
    load_domain,
    ray_boundary_distance,
    signed_distance,
)
from finslerkit.domains import decompose

SLAB = Slab(np.zeros(3), np.eye(3)[0], 1.0)
ELLIPSOID = Ellipsoid(np.zeros(3), np.diag([1.0, 1.0, 0.25]))


def parametric(d=3):
    return [
        Ball.unit(d),
        HalfSpace.standard(d),
        Slab(np.zeros(d), np.eye(d)[0], 1.0),
        Ellipsoid(np.zeros(d), np.diag(np.linspace(1.0, 0.25, d))),
        Polytope.cube(d),
    ]


def interior_points(domain, rng, n):
    lo, hi = domain.bounding_box() or (-np.full(domain.dim, 3.0), np.full(domain.dim, 3.0))
    lo, hi = np.maximum(lo, -3.0), np.minimum(hi, 3.0)
    X = lo + (hi - lo) * rng.random((8 * n, domain.dim))
    return X[domain._inside(X)][:n]


class TestExamples:
    def test_contains(self):
        assert contains(Ball.unit(3), [0, 0, 0])
        assert not contains(Ball.unit(3), [1, 0, 0])
        assert not contains(HalfSpace.standard(3), [-1, 0, 0])

    def test_ray(self):
        rng = np.random.default_rng(1)
        u = rng.normal(size=3)
        assert ray_boundary_distance(Ball.unit(3), [0, 0, 0], u / np.linalg.norm(u)) == pytest.approx(1.0)
        assert ray_boundary_distance(Ball.unit(3), [0.5, 0, 0], [0, 1, 0]) == pytest.approx(0.866025, abs=1e-6)
        assert ray_boundary_distance(HalfSpace.standard(3), [2, 0, 0], [1, 0, 0]) == math.inf

    def test_line(self):
        assert line_boundary_distance(Ball.unit(3), [0.5, 0, 0], [1, 0, 0]) == pytest.approx(0.5)
        assert line_boundary_distance(Ball.unit(3), [0.5, 0, 0], [0, 1, 0]) == pytest.approx(0.866025, abs=1e-6)
        assert line_boundary_distance(SLAB, [0, 0, 0], [0, 1, 0]) == math.inf

    def test_boundary_distance(self):
        assert boundary_distance(SLAB, [0.3, 0, 0]) == pytest.approx(0.7)
        assert boundary_distance(Ball.unit(3), [0.5, 0, 0]) == pytest.approx(0.5)
        assert boundary_distance(ELLIPSOID, [0, 0, 0]) == pytest.approx(0.5)

    def test_frames(self):
        f = boundary_frame(Ball.unit(2), [0.5, 0])
        np.testing.assert_allclose(f.foot, [1, 0])
        np.testing.assert_allclose(f.normal, [1, 0])
        assert f.delta == pytest.approx(0.5)
        f = boundary_frame(HalfSpace.standard(2), [2, 3])
        np.testing.assert_allclose(f.foot, [0, 3])
        np.testing.assert_allclose(f.normal, [-1, 0])
        assert f.delta == pytest.approx(2.0)
        with pytest.raises(NonUniqueProjectionError):
            boundary_frame(SLAB, [0, 0.4, 0])

    def test_ball_center_is_ambiguous(self):
        with pytest.raises(NonUniqueProjectionError):
            boundary_frame(Ball.unit(2), [0, 0])

    def test_signed_distance(self):
        assert signed_distance(Ball.unit(2), [0, 0]) == pytest.approx(-1.0)
        assert signed_distance(Ball.unit(2), [2, 0]) == pytest.approx(1.0)
        assert signed_distance(HalfSpace.standard(2), [-0.25, 0]) == pytest.approx(0.25)

    def test_decompose(self):
        f = boundary_frame(Ball.unit(3), [0.5, 0, 0])
        vn, vt = decompose(f, [1, 2, 0])
        np.testing.assert_allclose(vn, [1, 0, 0])
        np.testing.assert_allclose(vt, [0, 2, 0])
        vn, vt = decompose(f, f.normal)
        np.testing.assert_allclose(vt, 0, atol=1e-15)
        vn, vt = decompose(f, [0, 0, 3])
        np.testing.assert_allclose(vn, 0, atol=1e-15)


class TestErrors:
    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            contains(Ball.unit(3), [0, 0])

    def test_dimension_cap(self):
        with pytest.raises(DimensionError):
            Ball.unit(9)
        with pytest.raises(DimensionError):
            Ball.unit(1)

    def test_outside(self):
        with pytest.raises(OutsideDomainError):
            ray_boundary_distance(Ball.unit(2), [2, 0], [1, 0])
        with pytest.raises(OutsideDomainError):
            boundary_distance(Ball.unit(2), [1, 0])

    def test_empty_polytope(self):
        with pytest.raises(Exception):
            Polytope([([1.0, 0.0], 0.0), ([-1.0, 0.0], -1.0)])


class TestEllipsoid:
    def test_projection_matches_brute_force(self):
        E = Ellipsoid(np.zeros(3), np.array([[1.0, 0.2, 0.0], [0.2, 0.5, 0.1], [0.0, 0.1, 0.3]]))
        rng = np.random.default_rng(3)
        S = rng.normal(size=(200_000, 3))
        S /= np.linalg.norm(S, axis=1, keepdims=True)
        surf = (S * E.semi_axes) @ E._rot.T
        for x in interior_points(E, rng, 5):
            brute = np.min(np.linalg.norm(surf - x, axis=1))
            assert boundary_distance(E, x) == pytest.approx(brute, abs=2e-3)
            assert boundary_distance(E, x) <= brute + 1e-12

    def test_semi_axes(self):
        E = Ellipsoid.axis_aligned([2.0, 1.0])
        assert boundary_distance(E, [0, 0]) == pytest.approx(1.0)
        assert ray_boundary_distance(E, [0, 0], [1, 0]) == pytest.approx(2.0)


class TestImplicit:
    def test_sphere_level_set(self):
        S = ImplicitSmooth.from_builtin("sphere_level_set", 3, bounding_radius=2.0)
        assert ray_boundary_distance(S, [0.5, 0, 0], [0, 1, 0]) == pytest.approx(math.sqrt(0.75), abs=1e-9)
        f = boundary_frame(S, [0.9, 0, 0])
        np.testing.assert_allclose(f.foot, [1, 0, 0], atol=1e-9)
        assert f.delta == pytest.approx(0.1, abs=1e-9)

    def test_matches_ellipsoid(self):
        shape = np.diag([1.0, 0.5, 0.25])
        S = ImplicitSmooth.from_builtin("ellipsoid_level_set", 3, {"shape": shape.tolist()}, bounding_radius=2.0)
        E = Ellipsoid(np.zeros(3), shape)
        rng = np.random.default_rng(4)
        for x in interior_points(E, rng, 10):
            if E.boundary_distance(x) >= S.reach:
                continue
            assert boundary_distance(S, x) == pytest.approx(boundary_distance(E, x), abs=1e-8)

    def test_finite_difference_fallback(self):
        S = ImplicitSmooth.from_builtin("sphere_level_set", 3, bounding_radius=2.0)
        F = ImplicitSmooth(S.rho, dim=3, bounding_radius=2.0, finite_difference=True)
        np.testing.assert_allclose(F.grad(np.array([0.3, 0.4, 0.0])), [0.6, 0.8, 0.0], atol=1e-8)


class TestSerialization:
    @pytest.mark.parametrize("domain", parametric() + [
        ImplicitSmooth.from_builtin("lp_ball", 3, {"p": 4.0}, bounding_radius=2.0),
        Intersection([Ball.unit(2), HalfSpace.standard(2)]),
    ])
    def test_roundtrip(self, domain, tmp_path):
        path = tmp_path / "d.json"
        dump_domain(domain, path)
        again = load_domain(path)
        assert again.to_dict() == domain.to_dict()
        json.loads(path.read_text())

    def test_unknown_kind(self):
        with pytest.raises(Exception):
            domain_from_dict({"kind": "torus"})


@pytest.mark.parametrize("domain", parametric(3) + parametric(2))
def test_ray_exit_is_the_first_exterior_point(domain):
    rng = np.random.default_rng(5)
    X = interior_points(domain, rng, 1000)
    U = rng.normal(size=X.shape)
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    T = domain.ray_exits(X, U)
    fin = np.isfinite(T)
    assert domain._inside(X[fin] + (T[fin] * (1 - 1e-9) - 1e-12)[:, None] * U[fin]).all()
    assert not domain._inside(X[fin] + (T[fin] + 1e-6)[:, None] * U[fin]).any()
    s = rng.random(X.shape[0])
    Ts = np.where(fin, T, 10.0) * s * (1 - 1e-9)
    assert domain._inside(X + Ts[:, None] * U).all()


@pytest.mark.parametrize("domain", parametric(3))
def test_depth_is_below_every_ray(domain):
    rng = np.random.default_rng(6)
    X = interior_points(domain, rng, 50)
    depth = domain.depths(X)
    U = rng.normal(size=(64, domain.dim))
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    for x, dl in zip(X, depth):
        rays = domain.ray_exits(np.broadcast_to(x, U.shape), U)
        assert dl <= rays.min() + 1e-12


def test_closed_form_depths():
    rng = np.random.default_rng(7)
    X = rng.uniform(-0.9, 0.9, (200, 3)) / math.sqrt(3)
    np.testing.assert_allclose(Ball.unit(3).depths(X), 1 - np.linalg.norm(X, axis=1), atol=1e-12)
    np.testing.assert_allclose(SLAB.depths(X), 1 - np.abs(X[:, 0]), atol=1e-12)
    Y = np.abs(X)
    np.testing.assert_allclose(HalfSpace.standard(3).depths(Y), Y[:, 0], atol=1e-12)


@pytest.mark.parametrize("domain", parametric(3) + [ELLIPSOID])
def test_frame_reconstructs_point(domain):
    rng = np.random.default_rng(8)
    for x in interior_points(domain, rng, 100):
        try:
            f = domain.boundary_frame(x)
        except NonUniqueProjectionError:
            continue
        assert np.linalg.norm(f.point - x) <= 1e-8
        assert abs(np.linalg.norm(f.normal) - 1) <= 1e-12


@settings(max_examples=200, deadline=None)
@given(
    st.lists(st.floats(-0.55, 0.55), min_size=3, max_size=3),
    st.lists(st.floats(-5, 5), min_size=3, max_size=3),
)
def test_decompose_is_orthogonal(x, v):
    x = np.array(x)
    if np.linalg.norm(x) < 1e-3:
        x = x + 0.1
    f = Ball.unit(3).boundary_frame(x)
    vn, vt = decompose(f, v)
    assert np.linalg.norm(vn + vt - np.array(v)) <= 1e-12
    assert abs(vn @ vt) <= 1e-12 * max(1.0, np.dot(v, v))


@pytest.mark.parametrize("domain", parametric(3) + parametric(4))
def test_midpoints_are_interior(domain):
    rng = np.random.default_rng(9)
    X = interior_points(domain, rng, 500)
    Y = X[rng.permutation(X.shape[0])]
    assert domain._inside(0.5 * (X + Y)).all()


def test_intersection_ray_is_the_minimum():
    D = Intersection([Ball.unit(2), Ball([1.0, 0.0], 1.0)])
    x = np.array([0.5, 0.0])
    assert ray_boundary_distance(D, x, [1, 0]) == pytest.approx(0.5)
    assert ray_boundary_distance(D, x, [-1, 0]) == pytest.approx(0.5)
    assert boundary_distance(D, [0.5, 0.1]) == pytest.approx(min(1 - math.hypot(0.5, 0.1), 1 - math.hypot(0.5, 0.1)))
