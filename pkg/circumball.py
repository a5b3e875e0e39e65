"""
circumball.py - Smallest dual circumballs of simplices

Provides:
- AffinePlaneChart: affine coordinates on the plane through the lifted vertices
- smallest_circumball: damped Newton ascent of the concave chart objective
- smallest_including_ball_oracle: face enumeration, for testing only
- ball_contains: dual ball membership
"""

import logging
from dataclasses import dataclass
from itertools import combinations
from typing import Optional, Sequence, Tuple

import numpy as np

from divergence import (
    Generator, chart_hessian, divergences_to, gradient_unchecked, value_unchecked,
)
from errors import Degenerate, DomainEscape, NoConvergence
from models.filtration import DualBall, Simplex
from settings import DEFAULT_TOLERANCES, Tolerances

logger = logging.getLogger("bregman_tda.circumball")

_EPS = float(np.finfo(float).eps)
_STAGNATION_ULPS = 8.0


@dataclass(frozen=True, eq=False)
class AffinePlaneChart:
    """
    Chart lambda -> (q, psi) on the affine hull of the lifted vertices

    q(lambda) = base + directions @ lambda
    psi(lambda) = lifted_base + lifted_directions @ lambda
    """
    base: np.ndarray
    directions: np.ndarray  # n x k, columns a_i - a_0
    lifted_base: float
    lifted_directions: np.ndarray

    @property
    def k(self) -> int:
        return int(self.directions.shape[1])

    @classmethod
    def from_points(cls, gen: Generator, points: np.ndarray,
                    tol: Tolerances = DEFAULT_TOLERANCES) -> 'AffinePlaneChart':
        pts = np.asarray(points, dtype=float)
        for row in pts:
            gen.domain.check(row)
        k = pts.shape[0] - 1
        if k > gen.dimension:
            raise Degenerate(
                f"{k + 1} points cannot be affinely independent in dimension {gen.dimension}",
                size=k + 1, rank=gen.dimension)
        base = pts[0]
        directions = (pts[1:] - base).T
        if k:
            singular = np.linalg.svd(directions, compute_uv=False)
            rank = int(np.sum(singular > tol.rank_tol * singular[0])) if singular[0] > 0 else 0
            if rank < k:
                raise Degenerate("Simplex vertices are affinely dependent",
                                 size=k + 1, rank=rank)
        lifted = value_unchecked(gen, pts)
        return cls(base=base, directions=directions,
                   lifted_base=float(lifted[0]),
                   lifted_directions=lifted[1:] - lifted[0])

    def point(self, lam: np.ndarray) -> np.ndarray:
        return self.base + self.directions @ lam

    def objective(self, gen: Generator, lam: np.ndarray) -> float:
        """g(lambda) = psi(lambda) - F(q(lambda))"""
        q = self.point(lam)
        return float(self.lifted_base + self.lifted_directions @ lam - value_unchecked(gen, q))

    def gradient(self, gen: Generator, lam: np.ndarray) -> np.ndarray:
        """dg/dlambda_i = (F(a_i) - F(a_0)) - <grad F(q), a_i - a_0>"""
        q = self.point(lam)
        return self.lifted_directions - self.directions.T @ gradient_unchecked(gen, q)


@dataclass(frozen=True)
class CircumballResult:
    ball: DualBall
    bary: np.ndarray
    iterations: int
    converged: bool
    function_evals: int = 0
    gradient_norm: float = 0.0


def _newton_direction(hess: np.ndarray, grad: np.ndarray,
                      condition_limit: float) -> Tuple[np.ndarray, bool]:
    """Solve hess @ p = grad via Cholesky; fall back to the gradient when ill-conditioned"""
    try:
        L = np.linalg.cholesky(hess)
    except np.linalg.LinAlgError:
        return grad, False
    diag = np.abs(np.diag(L))
    if diag.min() <= 0.0 or (diag.max() / diag.min()) ** 2 > condition_limit:
        return grad, False
    y = np.linalg.solve(L, grad)
    return np.linalg.solve(L.T, y), True


def smallest_circumball(gen: Generator, simplex_points: Sequence[Sequence[float]],
                        tol: Tolerances = DEFAULT_TOLERANCES) -> CircumballResult:
    """
    Smallest dual circumball of k+1 affinely independent points.

    Maximizes the strictly concave g(lambda) over the chart starting from the
    barycenter. Steps are halved until q stays inside the domain and the
    Armijo condition holds.
    """
    pts = np.asarray(simplex_points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise ValueError("smallest_circumball needs a nonempty list of points")
    chart = AffinePlaneChart.from_points(gen, pts, tol)
    evals = pts.shape[0]
    k = chart.k
    if k == 0:
        return CircumballResult(ball=DualBall(center=pts[0].copy(), radius=0.0),
                                bary=np.zeros(0), iterations=0, converged=True,
                                function_evals=evals)

    domain = gen.domain
    D = chart.directions
    lam = np.full(k, 1.0 / (k + 1))
    q = chart.point(lam)
    g = chart.lifted_base + chart.lifted_directions @ lam - float(value_unchecked(gen, q))
    evals += 1
    grad_norm = np.inf
    stagnant = False
    lifted_scale = 1.0 + float(np.max(np.abs(chart.lifted_directions)))

    for iteration in range(tol.max_iterations):
        pulled = D.T @ gradient_unchecked(gen, q)
        grad = chart.lifted_directions - pulled
        grad_norm = float(np.max(np.abs(grad)))
        # the gradient is a difference of two terms of this size
        scale = lifted_scale + float(np.max(np.abs(pulled)))
        if grad_norm <= min(tol.gradient_tol * scale, tol.accept_gradient_tol):
            return _finish(q, g, lam, iteration, evals, grad_norm)
        if stagnant and grad_norm <= tol.accept_gradient_tol:
            logger.debug("Objective stagnant at gradient %.3e after %d iterations",
                         grad_norm, iteration)
            return _finish(q, g, lam, iteration, evals, grad_norm)

        direction, newton = _newton_direction(chart_hessian(gen, q, D), grad,
                                              tol.condition_limit)
        if not newton:
            logger.debug("Ill-conditioned chart Hessian at iteration %d, using gradient step",
                         iteration)
        slope = float(grad @ direction)
        step = 1.0
        inside_seen = False
        accepted = False
        for _ in range(tol.max_backtracks):
            lam_new = lam + step * direction
            q_new = chart.point(lam_new)
            if domain.violation(q_new) is None:
                inside_seen = True
                g_new = (chart.lifted_base + chart.lifted_directions @ lam_new
                         - float(value_unchecked(gen, q_new)))
                evals += 1
                if g_new >= g + tol.armijo_slope * step * slope:
                    stagnant = abs(g_new - g) <= _STAGNATION_ULPS * _EPS * (1.0 + abs(g))
                    lam, q, g = lam_new, q_new, g_new
                    accepted = True
                    break
            step *= tol.backtrack_factor

        if accepted:
            continue
        if grad_norm <= tol.accept_gradient_tol:
            return _finish(q, g, lam, iteration, evals, grad_norm)
        if not inside_seen:
            raise DomainEscape("Line search could not stay inside the domain",
                               iteration=iteration)
        raise NoConvergence("Line search stalled before the gradient vanished",
                            iterations=iteration, gradient_norm=grad_norm)

    if grad_norm <= tol.accept_gradient_tol:
        return _finish(q, g, lam, tol.max_iterations, evals, grad_norm)
    raise NoConvergence(f"No convergence within {tol.max_iterations} iterations",
                        iterations=tol.max_iterations, gradient_norm=grad_norm)


def _finish(q: np.ndarray, g: float, lam: np.ndarray, iterations: int,
            evals: int, grad_norm: float) -> CircumballResult:
    return CircumballResult(ball=DualBall(center=q, radius=max(float(g), 0.0)),
                            bary=lam, iterations=iterations, converged=True,
                            function_evals=evals, gradient_norm=grad_norm)


def ball_contains(gen: Generator, ball: DualBall, x: Sequence[float],
                  tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
    """D_F(x, center) <= radius, with a tiny absolute slack"""
    point = np.asarray(x, dtype=float)
    gen.domain.check(point)
    gen.domain.check(ball.center)
    return float(divergences_to(gen, point, ball.center)) <= ball.radius + tol.containment_slack


def smallest_including_face(gen: Generator, simplex_points: Sequence[Sequence[float]],
                            tol: Tolerances = DEFAULT_TOLERANCES
                            ) -> Tuple[Simplex, DualBall]:
    """Face whose circumball includes every vertex with the smallest radius"""
    pts = np.asarray(simplex_points, dtype=float)
    if len(pts) > 12:
        raise ValueError("The including-ball oracle is limited to 12 points")
    best: Optional[Tuple[Simplex, DualBall]] = None
    for size in range(1, len(pts) + 1):
        for face in combinations(range(len(pts)), size):
            try:
                ball = smallest_circumball(gen, pts[list(face)], tol).ball
            except (NoConvergence, DomainEscape):
                # no circumball in the domain
                continue
            if best is not None and ball.radius >= best[1].radius:
                continue
            dists = divergences_to(gen, pts, ball.center)
            if np.all(dists <= ball.radius + tol.membership_tol * (1.0 + ball.radius)):
                best = (face, ball)
    if best is None:
        raise NoConvergence("No face of the simplex has a circumball including all vertices",
                            iterations=tol.max_iterations, gradient_norm=float('nan'))
    return best


def smallest_including_ball_oracle(gen: Generator, simplex_points: Sequence[Sequence[float]],
                                   tol: Tolerances = DEFAULT_TOLERANCES) -> DualBall:
    """Smallest including dual ball by brute force over all faces"""
    return smallest_including_face(gen, simplex_points, tol)[1]
