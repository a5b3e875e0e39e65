"""
delaunay.py - Bregman Delaunay triangulation and radius function

Provides:
- lifted_weights: weights xi = F(x) - |x|^2 of the equivalent weighted
  Euclidean Delaunay triangulation
- is_delaunay: empty dual circumball test as a linear program in the slope u
- delaunay_triangulation: lower hull of the lifted points (x, F(x))
- delaunay_radius: circumball radius when the circumball is empty
- delaunay_radius_function: values by decreasing dimension with coface
  inheritance
"""

import logging
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Set, Tuple

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, QhullError

from circumball import AffinePlaneChart, smallest_circumball
from divergence import Generator, PointCloud, conjugate_generator, divergences_to, value_unchecked
from errors import Degenerate, GeneralPositionViolation, PartitionFailure
from models.filtration import BuildStats, DelaunayComplex, DualBall, Simplex, facets, make_simplex
from settings import DEFAULT_TOLERANCES, Tolerances
from utils.worker_utils import ordered_map

logger = logging.getLogger("bregman_tda.delaunay")


def lifted_weights(gen: Generator, X: PointCloud) -> np.ndarray:
    """xi = F(x) - |x|^2, so that |x|^2 + xi lifts x onto the graph of F"""
    pts = X.points
    return value_unchecked(gen, pts) - np.sum(pts * pts, axis=1)


def _emptiness_margin(gen: Generator, X: PointCloud, P: Simplex,
                      tol: Tolerances) -> float:
    """
    Largest s such that some affine <u, x> + c touches F on P and stays at
    least s below F on every other point, with u in the conjugate domain.
    Returns -inf when no admissible u exists.
    """
    pts = X.points
    n = gen.dimension
    heights = value_unchecked(gen, pts)
    members = list(P)
    others = [i for i in range(len(pts)) if i not in set(P)]

    # variables: u (n), c, s
    cost = np.zeros(n + 2)
    cost[-1] = -1.0
    A_eq = np.hstack([pts[members], np.ones((len(members), 1)), np.zeros((len(members), 1))])
    b_eq = heights[members]

    rows: List[np.ndarray] = []
    rhs: List[np.ndarray] = []
    if others:
        rows.append(np.hstack([pts[others], np.ones((len(others), 2))]))
        rhs.append(heights[others])
    A_dual, b_dual = conjugate_generator(gen).domain.linear_constraints(n)
    if A_dual is not None:
        rows.append(np.hstack([A_dual, np.zeros((A_dual.shape[0], 2))]))
        rhs.append(b_dual)
    A_ub = np.vstack(rows) if rows else None
    b_ub = np.concatenate(rhs) if rhs else None

    bounds = [(None, None)] * (n + 1) + [(-1.0, 1.0)]
    res = linprog(cost, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
                  bounds=bounds, method='highs')
    if res.status == 2:
        return -np.inf
    if res.status != 0:
        raise GeneralPositionViolation(f"Emptiness test for {P} failed: {res.message}",
                                       simplex=list(P), slack=float('nan'))
    return float(res.x[-1])


def is_delaunay(gen: Generator, X: PointCloud, P: Sequence[int],
                tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
    """True iff P has an empty dual circumball"""
    simplex = make_simplex(P)
    if len(simplex) > gen.dimension + 1:
        raise Degenerate(f"{len(simplex)} points are affinely dependent in dimension "
                         f"{gen.dimension}", size=len(simplex), rank=gen.dimension)
    AffinePlaneChart.from_points(gen, X.points[list(simplex)], tol)
    slack = _emptiness_margin(gen, X, simplex, tol)
    if slack > tol.general_position_tol:
        return True
    if slack < -tol.general_position_tol:
        return False
    raise GeneralPositionViolation(f"Emptiness of {simplex} is marginal",
                                   simplex=list(simplex), slack=slack)


def _all_faces(tops: Set[Simplex]) -> List[Simplex]:
    out: Set[Simplex] = set()
    for top in tops:
        for size in range(1, len(top) + 1):
            out.update(combinations(top, size))
    return sorted(out, key=lambda s: (len(s), s))


def _lower_facets(gen: Generator, X: PointCloud, tol: Tolerances) -> Set[Simplex]:
    pts = X.points
    n = gen.dimension
    lifted = np.hstack([pts, value_unchecked(gen, pts)[:, None]])
    try:
        hull = ConvexHull(lifted)
    except QhullError as exc:
        raise Degenerate(f"Lifted points are not full-dimensional: {exc}",
                         size=len(pts), rank=n)

    scale = 1.0 + float(np.max(np.abs(lifted)))
    offsets = hull.equations[:, :-1] @ lifted.T + hull.equations[:, -1:]
    tops: Set[Simplex] = set()
    for facet, eq, dist in zip(hull.simplices, hull.equations, offsets):
        if eq[n] >= 0:
            continue
        simplex = tuple(sorted(int(v) for v in facet))
        near = np.abs(dist) <= tol.general_position_tol * scale
        near[list(simplex)] = False
        if np.any(near):
            point = int(np.flatnonzero(near)[0])
            raise GeneralPositionViolation(
                f"Point {point} lies on the lifted facet {simplex}",
                simplex=list(simplex), point=point, slack=float(dist[point]))
        tops.add(simplex)
    return tops


def delaunay_triangulation(gen: Generator, X: PointCloud,
                           tol: Tolerances = DEFAULT_TOLERANCES,
                           threads: int = 1) -> DelaunayComplex:
    """
    Simplices with an empty dual circumball, closed under faces.

    Candidates are the faces of the lower facets of the lifted points; when
    the conjugate domain is not all of R^n each candidate is confirmed by the
    linear program of is_delaunay.
    """
    N = len(X)
    n = gen.dimension
    if N <= n + 1:
        tops = {tuple(range(N))}
        AffinePlaneChart.from_points(gen, X.points, tol)
    else:
        tops = _lower_facets(gen, X, tol)

    candidates = _all_faces(tops)
    A_dual, _ = conjugate_generator(gen).domain.linear_constraints(n)
    if A_dual is not None or N <= n + 1:
        keep = ordered_map(lambda s: is_delaunay(gen, X, s, tol), candidates, threads)
        simplices = [s for s, ok in zip(candidates, keep) if ok]
    else:
        simplices = candidates

    logger.info("Delaunay triangulation: %d simplices from %d lower facets",
                len(simplices), len(tops))
    stats = BuildStats(num_points=N, num_simplices=len(simplices),
                       num_edges=sum(1 for s in simplices if len(s) == 2))
    return DelaunayComplex(generator=gen, points=X.points, simplices=simplices, stats=stats)


def _empty_circumball(gen: Generator, X: PointCloud, P: Simplex,
                      tol: Tolerances) -> Tuple[DualBall, bool, int]:
    result = smallest_circumball(gen, X.points[list(P)], tol)
    ball = result.ball
    dists = divergences_to(gen, X.points, ball.center)
    dists[list(P)] = np.inf
    band = tol.general_position_tol * (1.0 + ball.radius)
    if np.any(dists < ball.radius - band):
        return ball, False, result.function_evals
    near = np.abs(dists - ball.radius) <= band
    if np.any(near):
        point = int(np.flatnonzero(near)[0])
        raise GeneralPositionViolation(
            f"Point {point} lies on the smallest circumball of {P}",
            simplex=list(P), point=point, slack=float(dists[point] - ball.radius))
    return ball, True, result.function_evals


def delaunay_radius(gen: Generator, X: PointCloud, P: Sequence[int],
                    tol: Tolerances = DEFAULT_TOLERANCES) -> Optional[float]:
    """Radius of the smallest circumball of P if it is empty, else None"""
    ball, empty, _ = _empty_circumball(gen, X, make_simplex(P), tol)
    return ball.radius if empty else None


def delaunay_radius_function(gen: Generator, X: PointCloud,
                             tol: Tolerances = DEFAULT_TOLERANCES,
                             threads: int = 1) -> DelaunayComplex:
    """
    Delaunay radius function.

    Simplices are visited by decreasing dimension, lexicographic within a
    dimension. A simplex with an empty smallest circumball takes its radius;
    any other takes the minimum over its codimension-one cofaces, together with
    that coface's witness.
    """
    tri = delaunay_triangulation(gen, X, tol, threads)
    simplices = tri.simplices
    outcomes = ordered_map(lambda s: _empty_circumball(gen, X, s, tol), simplices, threads)

    cofaces: Dict[Simplex, List[Simplex]] = {}
    for s in simplices:
        for face in facets(s):
            cofaces.setdefault(face, []).append(s)

    value: Dict[Simplex, Tuple[float, int]] = {}
    witnesses: List[DualBall] = []
    owners: List[Simplex] = []
    stats = tri.stats
    stats.num_circumball_calls = len(outcomes)
    by_index = {s: i for i, s in enumerate(simplices)}

    for s in sorted(simplices, key=lambda t: (-len(t), t)):
        ball, empty, evals = outcomes[by_index[s]]
        stats.num_function_evals += evals
        if empty:
            value[s] = (ball.radius, len(witnesses))
            witnesses.append(ball)
            owners.append(s)
            continue
        options = sorted((value[c][0], c) for c in cofaces.get(s, []))
        if not options:
            raise PartitionFailure(f"Simplex {s} has no empty circumball and no coface",
                                   simplex=list(s))
        value[s] = value[options[0][1]]

    radii = np.array([value[s][0] for s in simplices])
    witness_ids = [value[s][1] for s in simplices]
    logger.info("Delaunay radius function: %d simplices, %d empty circumballs",
                len(simplices), len(witnesses))
    return DelaunayComplex(generator=gen, points=X.points, simplices=simplices,
                           radii=radii, witness_ids=witness_ids, witnesses=witnesses,
                           owners=owners, stats=stats)
