from itertools import combinations

import numpy as np
import pytest

from circumball import (
    AffinePlaneChart, ball_contains, smallest_circumball, smallest_including_ball_oracle,
    smallest_including_face,
)
from conftest import SKIPPABLE, random_cloud
from divergence import GeneratorKind, divergence, make_generator
from errors import Degenerate, NoConvergence
from models.filtration import DualBall
from settings import Tolerances

SQ = GeneratorKind.SQ_EUCLIDEAN_HALF
KL = GeneratorKind.SHANNON

# The dual circumcenter of a full simplex is an affine solve and may land
# outside a proper conjugate domain
OPEN_CIRCUMCENTER_KINDS = {
    GeneratorKind.EXPONENTIAL,
    GeneratorKind.BURG,
    GeneratorKind.BURG_CONJUGATE,
}

EQUILATERAL = [[0.0, 0.0], [1.0, 0.0], [0.5, np.sqrt(3.0) / 2.0]]
OBTUSE = [[0.0, 0.0], [4.0, 0.0], [0.1, 0.3]]


def euclidean_circumcenter(points):
    """Circumcenter in the affine hull from the bisector equations"""
    a0 = points[0]
    D = (points[1:] - a0).T
    rhs = 0.5 * np.sum((points[1:] - a0) ** 2, axis=1)
    lam = np.linalg.solve(D.T @ D, rhs)
    return a0 + D @ lam


def golden_section_max(fn, lo, hi, iters=200):
    phi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c, d = b - phi * (b - a), a + phi * (b - a)
    for _ in range(iters):
        if fn(c) > fn(d):
            b = d
        else:
            a = c
        c, d = b - phi * (b - a), a + phi * (b - a)
    return 0.5 * (a + b)


class TestSmallestCircumball:
    def test_segment(self):
        result = smallest_circumball(make_generator(SQ, 2), [[0, 0], [2, 0]])
        np.testing.assert_allclose(result.ball.center, [1, 0], atol=1e-10)
        assert result.ball.radius == pytest.approx(0.5, abs=1e-12)
        assert result.converged

    def test_equilateral(self):
        result = smallest_circumball(make_generator(SQ, 2), EQUILATERAL)
        assert result.ball.radius == pytest.approx(1.0 / 6.0, abs=1e-10)

    def test_single_point(self):
        result = smallest_circumball(make_generator(KL, 2), [[0.3, 0.4]])
        assert result.ball.radius == 0.0
        assert result.iterations == 0
        np.testing.assert_allclose(result.ball.center, [0.3, 0.4])

    def test_shannon_pair_matches_scalar_search(self):
        gen = make_generator(KL, 2)
        pts = np.array([[0.2, 0.8], [0.8, 0.2]])
        chart = AffinePlaneChart.from_points(gen, pts)
        # q(t) stays in the open orthant for t in (-1/3, 4/3)
        t = golden_section_max(lambda v: chart.objective(gen, np.array([v])),
                               -1.0 / 3.0 + 1e-9, 4.0 / 3.0 - 1e-9)
        result = smallest_circumball(gen, pts)
        np.testing.assert_allclose(result.ball.center, chart.point(np.array([t])), atol=1e-6)
        assert result.ball.radius == pytest.approx(chart.objective(gen, np.array([t])), abs=1e-6)

    def test_affine_dependence(self):
        with pytest.raises(Degenerate):
            smallest_circumball(make_generator(SQ, 2), [[0, 0], [1, 1], [2, 2]])
        with pytest.raises(Degenerate):
            smallest_circumball(make_generator(SQ, 1), [[0], [1], [2]])

    def test_iteration_cap(self):
        tol = Tolerances(max_iterations=1)
        with pytest.raises(NoConvergence):
            smallest_circumball(make_generator(KL, 3),
                                [[0.1, 2.0, 0.5], [3.0, 0.2, 1.0], [0.4, 0.4, 4.0]], tol)

    @pytest.mark.parametrize("dim", [2, 3, 4, 5])
    def test_euclidean_oracle(self, dim, rng):
        gen = make_generator(SQ, dim)
        checked = 0
        while checked < 20:
            k = int(rng.integers(1, dim + 1))
            pts = rng.normal(size=(k + 1, dim))
            if np.linalg.cond(pts[1:] - pts[0]) > 1e3:
                continue
            checked += 1
            center = euclidean_circumcenter(pts)
            radius = 0.5 * float(np.sum((pts[0] - center) ** 2))
            result = smallest_circumball(gen, pts)
            scale = 1.0 + float(np.max(np.abs(center)))
            np.testing.assert_allclose(result.ball.center, center, rtol=0, atol=1e-8 * scale)
            assert result.ball.radius == pytest.approx(radius, rel=1e-8, abs=1e-10)

    @pytest.mark.parametrize("kind", list(GeneratorKind))
    def test_vertices_on_boundary(self, kind):
        tested = 0
        for seed in range(30):
            gen, cloud = random_cloud(kind, 4, 3, seed)
            try:
                result = smallest_circumball(gen, cloud.points)
            except SKIPPABLE:
                if kind not in OPEN_CIRCUMCENTER_KINDS:
                    raise
                continue
            tested += 1
            r = result.ball.radius
            for a in cloud.points:
                assert abs(divergence(gen, a, result.ball.center) - r) <= 5e-8 * (1 + r)
            assert result.gradient_norm <= 1e-8
        assert tested >= (5 if kind in OPEN_CIRCUMCENTER_KINDS else 30)


class TestChart:
    @pytest.mark.parametrize("kind", list(GeneratorKind))
    def test_gradient_matches_finite_differences(self, kind):
        h = 1e-6
        for seed in range(40):
            gen, cloud = random_cloud(kind, 3, 3, seed)
            chart = AffinePlaneChart.from_points(gen, cloud.points)
            lam = np.full(2, 1.0 / 3.0)
            fd = np.array([
                (chart.objective(gen, lam + h * e) - chart.objective(gen, lam - h * e)) / (2 * h)
                for e in np.eye(2)
            ])
            g = chart.gradient(gen, lam)
            assert np.linalg.norm(fd - g) <= 1e-6 * max(1.0, np.linalg.norm(g))


class TestIncludingBall:
    def test_single_point(self):
        ball = smallest_including_ball_oracle(make_generator(KL, 2), [[0.5, 0.5]])
        assert ball.radius == 0.0

    def test_obtuse_triangle_uses_longest_edge(self):
        gen = make_generator(SQ, 2)
        face, ball = smallest_including_face(gen, OBTUSE)
        assert face == (0, 1)
        np.testing.assert_allclose(ball.center, [2.0, 0.0], atol=1e-9)
        assert ball.radius == pytest.approx(2.0)

    def test_acute_triangle_uses_itself(self):
        gen = make_generator(SQ, 2)
        face, ball = smallest_including_face(gen, EQUILATERAL)
        assert face == (0, 1, 2)
        assert ball.radius == pytest.approx(1.0 / 6.0)

    @pytest.mark.parametrize("kind", [SQ, KL, GeneratorKind.SIMPLEX_SHANNON])
    def test_consistency_and_monotonicity(self, kind):
        for seed in range(15):
            gen, cloud = random_cloud(kind, 4, 3, seed)
            pts = cloud.points
            including = smallest_including_ball_oracle(gen, pts)
            circum = smallest_circumball(gen, pts).ball
            assert including.radius <= circum.radius + 1e-10
            face, _ = smallest_including_face(gen, pts)
            if face == (0, 1, 2, 3):
                assert including.radius == pytest.approx(circum.radius, abs=1e-9)
            else:
                # a proper face's ball includes every vertex
                assert all(divergence(gen, a, including.center) <= including.radius + 1e-9
                           for a in pts)
            for size in (1, 2, 3):
                for face in combinations(range(4), size):
                    sub = smallest_including_ball_oracle(gen, pts[list(face)])
                    assert sub.radius <= including.radius + 1e-10


class TestBallContains:
    def test_examples(self):
        gen = make_generator(SQ, 2)
        assert ball_contains(gen, DualBall(np.array([0.0, 0.0]), 0.0), [0.0, 0.0])
        assert ball_contains(gen, DualBall(np.array([1.0, 0.0]), 0.5), [0.0, 0.0])
        assert not ball_contains(gen, DualBall(np.array([1.0, 0.0]), 0.49), [0.0, 0.0])
