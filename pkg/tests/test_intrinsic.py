import math

import numpy as np
import pytest

from finslerkit import (
    Ball,
    BeltramiKlein,
    BoundaryFrame,
    Ellipsoid,
    GraphConfig,
    HalfSpace,
    KobayashiHilbert,
    PathGraph,
    Polyline,
    QuadratureSpec,
    QuasiHyperbolic,
    equidistant_path,
    graph_distance,
    gromov_delta,
    normal_segment_length,
    path_length,
    relax_path,
)
from finslerkit.errors import CollarError, GeometryError, OutsideDomainError
from finslerkit.metrics import hilbert_distance_closed_form

DISK = Ball.unit(2)
KH_DISK = KobayashiHilbert(DISK)
H3 = HalfSpace.standard(3)


class TestPathLength:
    def test_vertical_fiber(self):
        P = Polyline([[0.01, 0.3, 0.0], [1.0, 0.3, 0.0]])
        for k in (1, 2):
            assert path_length(QuasiHyperbolic(H3, k), P) == pytest.approx(0.5 * math.log(100), abs=1e-6)

    def test_hilbert_chord(self):
        assert path_length(KH_DISK, Polyline([[0, 0], [0.5, 0]])) == pytest.approx(0.549306144334, abs=1e-8)

    def test_subdivision_invariance(self):
        a, b = np.array([-0.3, 0.2]), np.array([0.6, -0.1])
        one = path_length(KH_DISK, Polyline([a, b]))
        two = path_length(KH_DISK, Polyline([a, 0.37 * a + 0.63 * b, b]))
        assert one == pytest.approx(two, abs=1e-10)

    def test_rejects_degenerate_and_exterior(self):
        with pytest.raises(GeometryError):
            Polyline([[0.1, 0.1], [0.1, 0.1]])
        with pytest.raises(OutsideDomainError):
            path_length(KH_DISK, Polyline([[0.9, 0.0], [0.99, 0.5]]))

    def test_midpoint_rule(self):
        P = Polyline([[0.0, 0.0], [0.5, 0.0]])
        mid = path_length(KH_DISK, P, QuadratureSpec(rule="midpoint", tol=1e-10))
        assert mid == pytest.approx(0.5 * math.log(3), abs=1e-8)

    def test_bad_quadrature(self):
        with pytest.raises(ValueError):
            QuadratureSpec(rule="simpson")


class TestNormalSegments:
    def test_half_space(self):
        f = H3.boundary_frame([1.0, 0.2, 0.0])
        assert normal_segment_length(QuasiHyperbolic(H3, 2), f, 0.01, 1.0) == pytest.approx(2.302585, abs=1e-6)
        assert normal_segment_length(QuasiHyperbolic(H3, 2), f, 0.3, 0.3) == 0.0

    def test_ball_bracket(self):
        B = Ball.unit(3)
        f = B.boundary_frame([0.5, 0, 0])
        L = normal_segment_length(BeltramiKlein(B), f, 0.1, 0.5)
        assert L == pytest.approx(hilbert_distance_closed_form(B, [0.9, 0, 0], [0.5, 0, 0]), rel=1e-9)
        assert abs(L - 0.5 * math.log(5)) < 0.5

    def test_collar_violation(self):
        f = DISK.boundary_frame([0.5, 0])
        with pytest.raises(CollarError):
            normal_segment_length(KH_DISK, f, 0.1, 1.5)


class TestEquidistant:
    def test_sphere(self):
        B = Ball.unit(3)
        fx = B.boundary_frame([0.5, 0, 0])
        fy = B.boundary_frame([0.3, 0.4, 0.1])
        P = equidistant_path(B, fx, fy, 0.1)
        np.testing.assert_allclose(np.linalg.norm(P.points, axis=1), 0.9, atol=1e-8)

    def test_half_space(self):
        fx = H3.boundary_frame([2.0, 0.0, 0.0])
        fy = H3.boundary_frame([3.0, 1.0, 2.0])
        P = equidistant_path(H3, fx, fy, 1.0)
        np.testing.assert_allclose(P.points[:, 0], 1.0)
        d = np.diff(P.points, axis=0)
        assert np.allclose(np.cross(d[:-1], d[1:]), 0)

    def test_ellipsoid(self):
        E = Ellipsoid(np.zeros(2), np.diag([1.0, 0.25]))
        fx = E.boundary_frame([0.0, 0.45])
        fy = E.boundary_frame([0.2, 0.43])
        P = equidistant_path(E, fx, fy, 0.02)
        np.testing.assert_allclose(E.depths(P.points), 0.02, atol=1e-9)

    def test_feet_too_far(self):
        B = Ball.unit(2)
        with pytest.raises(CollarError):
            equidistant_path(B, B.boundary_frame([0.5, 0]), B.boundary_frame([-0.5, 0.01]), 0.1)


class TestGraph:
    def test_disk_against_cross_ratio(self):
        res = graph_distance(KH_DISK, [0, 0], [0.5, 0])
        oracle = 0.5 * math.log(3)
        assert oracle - 1e-9 <= res.value <= oracle * 1.02
        assert res.path.points[0].tolist() == [0, 0] and res.path.points[-1].tolist() == [0.5, 0]
        assert res.value == pytest.approx(path_length(KH_DISK, res.path, QuadratureSpec()), rel=1e-12)

    def test_same_point(self):
        assert graph_distance(KH_DISK, [0.2, 0.1], [0.2, 0.1]).value == 0.0

    def test_half_space_normal_line(self):
        F = QuasiHyperbolic(HalfSpace.standard(2), 1)
        res = graph_distance(F, [0.1, 0.0], [1.0, 0.0], GraphConfig(nodes=2000))
        oracle = 0.5 * math.log(10)
        assert oracle - 1e-9 <= res.value <= oracle * 1.02

    def test_nested_refinement_never_increases(self):
        vals = [graph_distance(KH_DISK, [-0.3, 0.4], [0.6, -0.2], GraphConfig(nodes=n)).value for n in (500, 1000, 2000)]
        assert vals[1] <= vals[0] + 1e-9 and vals[2] <= vals[1] + 1e-9
        assert vals[2] >= hilbert_distance_closed_form(DISK, [-0.3, 0.4], [0.6, -0.2]) - 1e-9

    def test_symmetry_and_triangle(self):
        A = np.array([[0.0, 0.0], [0.5, 0.1], [-0.4, 0.6], [0.2, -0.7]])
        g = PathGraph(KH_DISK, A, GraphConfig(nodes=1000))
        D, _ = g.distances(np.arange(4))
        D = D[:, :4]
        np.testing.assert_allclose(D, D.T, atol=1e-9)
        for i in range(4):
            for j in range(4):
                for k in range(4):
                    assert D[i, j] <= D[i, k] + D[k, j] + 1e-9

    def test_deterministic(self):
        a = graph_distance(KH_DISK, [0, 0], [0.5, 0.2], GraphConfig(nodes=500, seed=4)).value
        b = graph_distance(KH_DISK, [0, 0], [0.5, 0.2], GraphConfig(nodes=500, seed=4)).value
        assert a == b


class TestRelax:
    def test_kinked_path_improves(self):
        kinked = Polyline([[0.0, 0.0], [0.25, 0.3], [0.5, 0.0]])
        before = path_length(KH_DISK, kinked)
        after = path_length(KH_DISK, relax_path(KH_DISK, kinked, iters=20))
        assert after < before
        assert after == pytest.approx(0.5 * math.log(3), abs=1e-4)

    def test_monotone_across_iterations(self):
        P = Polyline([[0.0, 0.0], [0.1, 0.3], [0.3, -0.2], [0.5, 0.0]])
        lengths = [path_length(KH_DISK, relax_path(KH_DISK, P, iters=i)) for i in range(6)]
        assert all(b <= a + 1e-12 for a, b in zip(lengths, lengths[1:]))

    def test_straight_chord_unchanged(self):
        P = Polyline([[0.0, 0.0], [0.25, 0.0], [0.5, 0.0]])
        assert path_length(KH_DISK, relax_path(KH_DISK, P)) == pytest.approx(path_length(KH_DISK, P), abs=1e-9)

    def test_zero_iterations(self):
        P = Polyline([[0.0, 0.0], [0.25, 0.3], [0.5, 0.0]])
        assert np.array_equal(relax_path(KH_DISK, P, iters=0).points, P.points)


class TestGromov:
    def test_tree_metric(self):
        t = np.array([0.0, 0.3, 1.1, 2.0, 2.5])
        assert gromov_delta(np.abs(t[:, None] - t[None])) == pytest.approx(0.0, abs=1e-15)

    def test_square_cycle(self):
        # four-cycle with unit edges: delta = 1
        D = np.array([[0, 1, 2, 1], [1, 0, 1, 2], [2, 1, 0, 1], [1, 2, 1, 0]], float)
        assert gromov_delta(D) == pytest.approx(1.0)

    def test_brute_force(self):
        import itertools

        rng = np.random.default_rng(0)
        X = rng.normal(size=(9, 2))
        D = np.linalg.norm(X[:, None] - X[None], axis=-1)
        best = 0.0
        for a, b, c, d in itertools.combinations(range(9), 4):
            s = sorted([D[a, b] + D[c, d], D[a, c] + D[b, d], D[a, d] + D[b, c]])
            best = max(best, (s[2] - s[1]) / 2)
        assert gromov_delta(D) == pytest.approx(best, rel=1e-12)


def test_boundary_frame_fiber_consistency():
    f = BoundaryFrame(np.array([1.0, 0.0]), np.array([1.0, 0.0]), 0.2)
    assert normal_segment_length(KH_DISK, f, 0.2, 0.6) == pytest.approx(
        hilbert_distance_closed_form(DISK, [0.8, 0], [0.4, 0]), rel=1e-9)
