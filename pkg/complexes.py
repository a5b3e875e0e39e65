"""
complexes.py - Čech and Vietoris-Rips radius functions

Provides:
- cech_radius_function: level-by-level marking algorithm, one circumball
  solve per unmarked simplex
- rips_radius_function: pair radii plus clique expansion
- extract_intervals: interval partition of a Čech radius function
- complex_at: sublevel sets
- no_interleaving_demo / no_interleaving_table: three points near the edge
  midpoints of the standard triangle
"""

import logging
import math
from typing import Dict, FrozenSet, Iterator, List, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np

from circumball import CircumballResult, smallest_circumball
from divergence import (
    Generator, GeneratorKind, PointCloud, conjugate_generator, divergences_to,
    gradient, make_generator,
)
from errors import GeneralPositionViolation, PartitionFailure
from models.filtration import (
    BuildStats, DelaunayComplex, DualBall, IntervalRole, RadiusFiltration, Simplex,
    check_equal_value_faces,
)
from settings import DEFAULT_TOLERANCES, Tolerances
from utils.worker_utils import ordered_map

logger = logging.getLogger("bregman_tda.complexes")

INF = float('inf')


class _Witness:
    __slots__ = ("ball", "owner", "inside")

    def __init__(self, ball: DualBall, owner: Simplex, inside: FrozenSet[int]):
        self.ball = ball
        self.owner = owner
        self.inside = inside


def _check_distinct(X: PointCloud, tol: Tolerances) -> None:
    seen: Dict[Tuple[float, ...], int] = {}
    for i, row in enumerate(X.points):
        key = tuple(row)
        if key in seen:
            raise GeneralPositionViolation(
                f"Points {seen[key]} and {i} coincide", simplex=[seen[key]], point=i, slack=0.0)
        seen[key] = i


def _inside_set(gen: Generator, points: np.ndarray, simplex: Simplex, ball: DualBall,
                tol: Tolerances) -> FrozenSet[int]:
    """Indices strictly inside the ball, rejecting points on its boundary"""
    dists = divergences_to(gen, points, ball.center)
    r = ball.radius
    slack = dists - r
    band = np.abs(slack) <= tol.general_position_tol * (1.0 + r)
    band[list(simplex)] = False
    if np.any(band):
        point = int(np.flatnonzero(band)[0])
        raise GeneralPositionViolation(
            f"Point {point} lies on the smallest circumball of {simplex}",
            simplex=list(simplex), point=point, slack=float(slack[point]))
    inside = dists < r
    inside[list(simplex)] = False
    return frozenset(int(i) for i in np.flatnonzero(inside))


def _extensions(level: List[Simplex], present: Dict[Simplex, int]
                ) -> Iterator[Tuple[Simplex, List[int]]]:
    """
    Candidates one dimension up whose facets are all present, in lexicographic
    order. Yields the candidate and the witness ids of its facets, facet j
    omitting vertex j.
    """
    i = 0
    total = len(level)
    while i < total:
        prefix = level[i][:-1]
        j = i + 1
        while j < total and level[j][:-1] == prefix:
            j += 1
        run = level[i:j]
        for a in range(len(run)):
            for b in range(a + 1, len(run)):
                cand = run[a] + (run[b][-1],)
                wids = []
                for drop in range(len(cand)):
                    w = present.get(cand[:drop] + cand[drop + 1:])
                    if w is None:
                        break
                    wids.append(w)
                else:
                    yield cand, wids
        i = j


def _validate_build_args(max_dim: int, cutoff: float) -> None:
    if max_dim < 0:
        raise ValueError(f"max_dim must be nonnegative, got {max_dim}")
    if cutoff < 0 or math.isnan(cutoff):
        raise ValueError(f"cutoff must be nonnegative, got {cutoff}")


def cech_radius_function(gen: Generator, X: PointCloud, max_dim: int,
                         cutoff: float = INF, tol: Tolerances = DEFAULT_TOLERANCES,
                         threads: int = 1) -> Tuple[RadiusFiltration, BuildStats]:
    """
    Čech radius function on the max_dim-skeleton, values above cutoff dropped.

    Dimensions are processed in increasing order. Each unmarked simplex gets
    its smallest circumball (p, r); every extension P + {a} with
    D_F(a, p) < r is marked with that ball and never solved. Marks propagate
    level by level up to max_dim.
    """
    _validate_build_args(max_dim, cutoff)
    _check_distinct(X, tol)
    points = X.points
    N = len(X)
    stats = BuildStats(num_points=N)

    witnesses: List[_Witness] = []
    for i in range(N):
        witnesses.append(_Witness(DualBall(center=points[i], radius=0.0), (i,), frozenset()))

    simplices: List[Simplex] = [(i,) for i in range(N)]
    witness_ids: List[int] = list(range(N))
    level: List[Simplex] = list(simplices)
    present: Dict[Simplex, int] = {s: i for i, s in enumerate(simplices)}

    def solve(simplex: Simplex) -> CircumballResult:
        return smallest_circumball(gen, points[list(simplex)], tol)

    for dim in range(1, max_dim + 1):
        unmarked: List[Simplex] = []
        marked: Dict[Simplex, int] = {}
        order: List[Simplex] = []
        for cand, wids in _extensions(level, present):
            best: Optional[int] = None
            for drop, w in enumerate(wids):
                if cand[drop] in witnesses[w].inside:
                    if best is None or _witness_key(witnesses[w]) < _witness_key(witnesses[best]):
                        best = w
            order.append(cand)
            if best is None:
                unmarked.append(cand)
            else:
                marked[cand] = best

        if not order:
            break

        results = ordered_map(solve, unmarked, threads)
        stats.num_circumball_calls += len(results)
        solved: Dict[Simplex, int] = {}
        for cand, result in zip(unmarked, results):
            stats.num_function_evals += result.function_evals
            if result.ball.radius > cutoff:
                continue
            inside = _inside_set(gen, points, cand, result.ball, tol)
            solved[cand] = len(witnesses)
            witnesses.append(_Witness(result.ball, cand, inside))

        level = []
        present = {}
        for cand in order:
            w = solved.get(cand, marked.get(cand))
            if w is None:
                continue
            level.append(cand)
            present[cand] = w
            simplices.append(cand)
            witness_ids.append(w)

        logger.info("dim %d: %d candidates, %d marked, %d solved, %d kept",
                    dim, len(order), len(marked), len(unmarked), len(level))
        if not level:
            break

    radii = np.array([witnesses[w].ball.radius for w in witness_ids], dtype=float)
    stats.num_simplices = len(simplices)
    stats.num_edges = sum(1 for s in simplices if len(s) == 2)
    logger.info("Čech build: %d simplices, %d edges, %d circumball calls (ratio %.3f)",
                stats.num_simplices, stats.num_edges, stats.num_circumball_calls,
                stats.calls_ratio)

    filtration = RadiusFiltration(
        kind="cech", generator=gen, points=points, simplices=simplices, radii=radii,
        witness_ids=witness_ids, witnesses=[w.ball for w in witnesses],
        owners=[w.owner for w in witnesses],
        roles=_interval_roles(simplices, witness_ids, [w.owner for w in witnesses]),
        stats=stats, max_dim=max_dim, cutoff=cutoff,
    )
    return filtration, stats


def _witness_key(w: _Witness) -> Tuple[float, Tuple[float, ...]]:
    return w.ball.radius, tuple(w.ball.center)


def _interval_roles(simplices: List[Simplex], witness_ids: Sequence[int],
                    owners: List[Simplex]) -> List[IntervalRole]:
    members: Dict[int, List[int]] = {}
    for i, w in enumerate(witness_ids):
        members.setdefault(w, []).append(i)
    roles: List[IntervalRole] = [IntervalRole.INTERIOR] * len(simplices)
    for w, idx in members.items():
        if len(idx) == 1:
            roles[idx[0]] = IntervalRole.SINGLETON
            continue
        union = tuple(sorted(set().union(*(simplices[i] for i in idx))))
        for i in idx:
            if simplices[i] == owners[w]:
                roles[i] = IntervalRole.LOWER_BOUND
            elif simplices[i] == union:
                roles[i] = IntervalRole.UPPER_BOUND
    return roles


def rips_radius_function(gen: Generator, X: PointCloud, max_dim: int,
                         cutoff: float = INF, tol: Tolerances = DEFAULT_TOLERANCES,
                         threads: int = 1) -> RadiusFiltration:
    """Rips radius function: maximum pair circumball radius over the edges of a clique"""
    _validate_build_args(max_dim, cutoff)
    points = X.points
    N = len(X)
    stats = BuildStats(num_points=N)
    witnesses: List[DualBall] = [DualBall(center=points[i], radius=0.0) for i in range(N)]
    simplices: List[Simplex] = [(i,) for i in range(N)]
    witness_ids: List[int] = list(range(N))

    if max_dim >= 1 and N > 1:
        pairs = [(i, j) for i in range(N) for j in range(i + 1, N)]
        results = ordered_map(lambda e: smallest_circumball(gen, points[list(e)], tol),
                              pairs, threads)
        stats.num_circumball_calls = len(results)
        graph = nx.Graph()
        graph.add_nodes_from(range(N))
        edge_witness: Dict[Simplex, int] = {}
        for edge, result in zip(pairs, results):
            stats.num_function_evals += result.function_evals
            if result.ball.radius <= cutoff:
                edge_witness[edge] = len(witnesses)
                witnesses.append(result.ball)
                graph.add_edge(*edge)

        higher: List[Simplex] = []
        for clique in nx.enumerate_all_cliques(graph):
            if len(clique) > max_dim + 1:
                break
            if len(clique) >= 2:
                higher.append(tuple(sorted(clique)))
        higher.sort(key=lambda s: (len(s), s))
        for simplex in higher:
            edges = [(a, b) for ai, a in enumerate(simplex) for b in simplex[ai + 1:]]
            longest = max(edges, key=lambda e: (witnesses[edge_witness[e]].radius,
                                                tuple(-v for v in e)))
            simplices.append(simplex)
            witness_ids.append(edge_witness[longest])

    radii = np.array([witnesses[w].radius for w in witness_ids], dtype=float)
    stats.num_simplices = len(simplices)
    stats.num_edges = sum(1 for s in simplices if len(s) == 2)
    logger.info("Rips build: %d simplices, %d edges", stats.num_simplices, stats.num_edges)
    return RadiusFiltration(kind="rips", generator=gen, points=points, simplices=simplices,
                            radii=radii, witness_ids=witness_ids, witnesses=witnesses,
                            stats=stats, max_dim=max_dim, cutoff=cutoff)


def extract_intervals(f: RadiusFiltration, tol: Tolerances = DEFAULT_TOLERANCES,
                      value_tol: float = 1e-12) -> List[Tuple[Simplex, Simplex]]:
    """
    Partition a Čech radius function into intervals [P, R].

    P is the simplex that owns the witness ball; R is the union of the present
    simplices sharing that ball, which must lie inside P plus the points of
    the closed ball.
    """
    if f.kind != "cech" or f.owners is None:
        raise ValueError("Interval extraction needs a Čech radius function")
    gen = f.generator
    groups: Dict[int, List[int]] = {}
    for i, w in enumerate(f.witness_ids):
        if w < 0:
            raise PartitionFailure(f"Simplex {f.simplices[i]} has no interval",
                                   simplex=list(f.simplices[i]))
        groups.setdefault(int(w), []).append(i)

    intervals: List[Tuple[Simplex, Simplex]] = []
    group_of = np.empty(len(f), dtype=np.int64)
    for w in sorted(groups):
        members = groups[w]
        lower = f.owners[w]
        ball = f.witnesses[w]
        if f.index.get(lower) not in members:
            raise PartitionFailure(f"Lower bound {lower} is not in its own interval",
                                   simplex=list(lower))
        dists = divergences_to(gen, f.points, ball.center)
        closed = set(np.flatnonzero(
            dists <= ball.radius + tol.membership_tol * (1.0 + ball.radius)).tolist())
        allowed = closed | set(lower)
        upper_set = set()
        for i in members:
            s = set(f.simplices[i])
            if not set(lower) <= s <= allowed:
                raise PartitionFailure(
                    f"Simplex {f.simplices[i]} does not fit the interval of {lower}",
                    simplex=list(f.simplices[i]))
            upper_set |= s
            group_of[i] = len(intervals)
        intervals.append((lower, tuple(sorted(upper_set))))

    check_equal_value_faces(f.simplices, f.radii, group_of, f.index, value_tol)
    return intervals


def complex_at(f: Union[RadiusFiltration, DelaunayComplex], r: float) -> List[Simplex]:
    """Sublevel set {P : radius(P) <= r}"""
    if r < 0:
        return []
    return f.sublevel(r)


# ---------------------------------------------------------------------------
# no-interleaving construction
# ---------------------------------------------------------------------------

def no_interleaving_points(epsilon: float) -> np.ndarray:
    """
    Chart coordinates of (c, h, h), (h, c, h), (h, h, c) on the standard
    triangle, c = epsilon / 10, h = (1 - c) / 2
    """
    if not 0.0 < epsilon < 1.0 / 6.0:
        raise ValueError(f"epsilon must lie in (0, 1/6), got {epsilon}")
    c = epsilon / 10.0
    h = (1.0 - c) / 2.0
    return np.array([[c, h], [h, c], [h, h]])


def no_interleaving_demo(epsilon: float,
                         tol: Tolerances = DEFAULT_TOLERANCES) -> Tuple[float, float]:
    """
    Pairwise and triple Čech radii of dual Kullback-Leibler balls around the
    three points.

    The balls live on the open simplex; their Čech radii are computed on the
    conjugate side under the log-partition generator, where the dual balls
    become ordinary Bregman balls.
    """
    gen = make_generator(GeneratorKind.SIMPLEX_SHANNON, 2, margin=tol.domain_margin)
    cloud = PointCloud.from_rows(gen, no_interleaving_points(epsilon))
    conj = conjugate_generator(gen)
    dual = PointCloud.from_rows(conj, [gradient(gen, x) for x in cloud.points])
    f, _ = cech_radius_function(conj, dual, max_dim=2, tol=tol)
    pairwise = max(f.radius(e) for e in [(0, 1), (0, 2), (1, 2)])
    return pairwise, f.radius((0, 1, 2))


def no_interleaving_table(epsilons: Sequence[float],
                          tol: Tolerances = DEFAULT_TOLERANCES
                          ) -> List[Tuple[float, float, float, float]]:
    """Rows (epsilon, pairwise_radius, triple_radius, ratio)"""
    rows = []
    for eps in epsilons:
        pairwise, triple = no_interleaving_demo(eps, tol)
        rows.append((eps, pairwise, triple, triple / pairwise))
    return rows
