import math

import numpy as np
import pytest

from conftest import ALL_KINDS
from divergence import (
    DomainConstraint, GeneratorKind, PointCloud, chart_hessian, conjugate_generator,
    conjugate_point, divergence, evaluate, gradient, hessian, make_generator,
    polarity_gap,
)
from errors import DomainViolation

SQ = GeneratorKind.SQ_EUCLIDEAN_HALF
KL = GeneratorKind.SHANNON
BURG = GeneratorKind.BURG


def sample(kind, size, dim, rng):
    """Random points comfortably inside the domain"""
    if kind is GeneratorKind.SIMPLEX_SHANNON:
        return rng.dirichlet(np.full(dim + 1, 4.0), size=size)[:, :dim]
    low, high = {
        SQ: (-2.0, 2.0),
        KL: (0.1, 3.0),
        BURG: (0.2, 3.0),
        GeneratorKind.EXPONENTIAL: (-1.0, 1.0),
        GeneratorKind.BURG_CONJUGATE: (-3.0, -0.2),
        GeneratorKind.LOG_PARTITION: (-2.0, 2.0),
    }[kind]
    return rng.uniform(low, high, size=(size, dim))


class TestClosedForms:
    def test_evaluate_examples(self):
        assert evaluate(make_generator(SQ, 2), [3, 4]) == pytest.approx(12.5)
        assert evaluate(make_generator(KL, 2), [1, 1]) == pytest.approx(-2.0)
        assert evaluate(make_generator(BURG, 3), [1, 1, 1]) == pytest.approx(3.0)

    def test_gradient_examples(self):
        np.testing.assert_allclose(gradient(make_generator(SQ, 2), [3, 4]), [3, 4])
        np.testing.assert_allclose(gradient(make_generator(KL, 2), [1, 1]), [0, 0])
        np.testing.assert_allclose(gradient(make_generator(BURG, 1), [2]), [-0.5])

    def test_divergence_examples(self):
        assert divergence(make_generator(SQ, 2), [0, 0], [2, 0]) == pytest.approx(2.0)
        assert divergence(make_generator(KL, 1), [1], [math.e]) == pytest.approx(math.e - 2)
        assert divergence(make_generator(BURG, 2), [0.3, 5], [0.3, 5]) == 0.0

    def test_conjugate_point_examples(self):
        np.testing.assert_allclose(conjugate_point(make_generator(SQ, 2), [1, 2]), [1, 2])
        np.testing.assert_allclose(conjugate_point(make_generator(KL, 2), [1, 1]), [0, 0])
        np.testing.assert_allclose(conjugate_point(make_generator(BURG, 1), [0.5]), [-2])

    def test_conjugate_generators(self):
        assert conjugate_generator(make_generator(SQ, 3)).kind is SQ
        exp = conjugate_generator(make_generator(KL, 3))
        assert exp.kind is GeneratorKind.EXPONENTIAL
        assert exp.domain.constraint is DomainConstraint.ALL
        burg_star = conjugate_generator(make_generator(BURG, 3))
        assert burg_star.kind is GeneratorKind.BURG_CONJUGATE
        assert burg_star.domain.constraint is DomainConstraint.NEGATIVE_ORTHANT
        assert burg_star.dimension == 3

    @pytest.mark.parametrize("kind", ALL_KINDS)
    def test_conjugation_is_an_involution(self, kind):
        gen = make_generator(kind, 2)
        assert conjugate_generator(conjugate_generator(gen)).kind is kind

    def test_unknown_name(self):
        with pytest.raises(ValueError):
            make_generator("hellinger", 2)
        assert make_generator("itakura_saito", 2).kind is BURG


class TestDomains:
    def test_shannon_rejects_boundary(self):
        with pytest.raises(DomainViolation) as info:
            evaluate(make_generator(KL, 2), [0.0, 1.0])
        assert info.value.context['coordinate'] == 0

    def test_margin(self):
        gen = make_generator(KL, 2)
        with pytest.raises(DomainViolation):
            gradient(gen, [1e-13, 1.0])
        assert gen.domain.contains([1e-11, 1.0])

    def test_negative_orthant(self):
        gen = make_generator(GeneratorKind.BURG_CONJUGATE, 2)
        with pytest.raises(DomainViolation):
            evaluate(gen, [-1.0, 0.5])

    def test_open_simplex(self):
        gen = make_generator(GeneratorKind.SIMPLEX_SHANNON, 2)
        assert gen.domain.contains([0.3, 0.3])
        with pytest.raises(DomainViolation) as info:
            evaluate(gen, [0.6, 0.4])
        assert info.value.context['coordinate'] == "sum"

    def test_non_finite(self):
        with pytest.raises(DomainViolation):
            evaluate(make_generator(SQ, 2), [float('nan'), 0.0])

    def test_linear_constraints_match_membership(self, rng):
        gen = make_generator(GeneratorKind.SIMPLEX_SHANNON, 3)
        A, b = gen.domain.linear_constraints(3)
        for x in rng.uniform(-0.2, 0.8, size=(200, 3)):
            assert bool(np.all(A @ x <= b)) == gen.domain.contains(x) or \
                np.min(np.abs(A @ x - b)) < 1e-9

    def test_gradient_blows_up_at_boundary(self):
        for kind in (KL, BURG):
            gen = make_generator(kind, 2)
            far = np.linalg.norm(gradient(gen, [1.0, 1.0]))
            near = np.linalg.norm(gradient(gen, [1e-10, 1.0]))
            assert near > 20.0 + far

    def test_point_cloud_reports_line(self):
        gen = make_generator(KL, 2)
        with pytest.raises(DomainViolation) as info:
            PointCloud.from_rows(gen, [[1.0, 1.0], [0.5, -1.0]], first_line=1)
        assert info.value.context['line'] == 2
        assert info.value.context['coordinate'] == 1

    def test_point_cloud_shape(self):
        gen = make_generator(SQ, 2)
        cloud = PointCloud.from_rows(gen, [[1.0, 2.0], [3.0, 4.0]])
        assert len(cloud) == 2 and cloud.n == 2
        with pytest.raises(ValueError):
            PointCloud.from_rows(gen, [[1.0, 2.0, 3.0]])


@pytest.mark.parametrize("kind", ALL_KINDS)
class TestProperties:
    def test_nonnegativity(self, kind, rng):
        gen = make_generator(kind, 3)
        xs, ys = sample(kind, 1000, 3, rng), sample(kind, 1000, 3, rng)
        for x, y in zip(xs, ys):
            assert divergence(gen, x, y) >= -1e-12
            assert divergence(gen, x, x) <= 1e-12

    def test_duality(self, kind, rng):
        gen = make_generator(kind, 3)
        conj = conjugate_generator(gen)
        xs, ys = sample(kind, 1000, 3, rng), sample(kind, 1000, 3, rng)
        for x, y in zip(xs, ys):
            d = divergence(gen, x, y)
            d_star = divergence(conj, gradient(gen, y), gradient(gen, x))
            assert abs(d - d_star) <= 1e-9 * (1.0 + abs(d))

    def test_round_trip(self, kind, rng):
        gen = make_generator(kind, 3)
        conj = conjugate_generator(gen)
        for x in sample(kind, 200, 3, rng):
            back = gradient(conj, gradient(gen, x))
            assert np.linalg.norm(back - x) <= 1e-8

    def test_gradient_matches_finite_differences(self, kind, rng):
        gen = make_generator(kind, 3)
        h = 1e-6
        for x in sample(kind, 50, 3, rng):
            fd = np.array([
                (evaluate(gen, x + h * e) - evaluate(gen, x - h * e)) / (2 * h)
                for e in np.eye(3)
            ])
            g = gradient(gen, x)
            assert np.linalg.norm(fd - g) <= 1e-6 * max(1.0, np.linalg.norm(g))

    def test_hessian_matches_gradient_differences(self, kind, rng):
        gen = make_generator(kind, 3)
        h = 1e-6
        for x in sample(kind, 20, 3, rng):
            fd = np.column_stack([
                (gradient(gen, x + h * e) - gradient(gen, x - h * e)) / (2 * h)
                for e in np.eye(3)
            ])
            H = hessian(gen, x)
            assert np.linalg.norm(fd - H) <= 1e-5 * max(1.0, np.linalg.norm(H))
            D = rng.normal(size=(3, 2))
            np.testing.assert_allclose(chart_hessian(gen, x, D), D.T @ H @ D,
                                       rtol=1e-9, atol=1e-12)

    def test_convexity_in_first_argument(self, kind, rng):
        gen = make_generator(kind, 3)
        pts = sample(kind, 600, 3, rng).reshape(200, 3, 3)
        for (x0, x1, y), t in zip(pts, rng.uniform(0.05, 0.95, size=200)):
            mixed = divergence(gen, t * x0 + (1 - t) * x1, y)
            bound = t * divergence(gen, x0, y) + (1 - t) * divergence(gen, x1, y)
            assert mixed < bound + 1e-12


def test_polarity_identity(rng):
    for _ in range(500):
        c, s = rng.normal(size=3), rng.normal(size=3)
        gamma, sigma = rng.normal(size=2)
        left, right = polarity_gap((c, gamma), (s, sigma))
        expected = gamma + sigma - float(np.dot(c, s))
        assert left == pytest.approx(expected, abs=1e-12)
        assert right == pytest.approx(expected, abs=1e-12)
