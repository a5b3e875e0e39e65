"""
persistence.py - Filtration ordering, Z/2 persistence and bottleneck distance

Provides:
- FiltrationOrder and order_filtration
- compute_persistence: column reduction over the two-element field, with
  optional clearing
- bottleneck_distance: exact, by threshold search with bipartite matching
- euler_characteristic
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Set, Tuple, Union

import networkx as nx
import numpy as np
from networkx.algorithms import bipartite

from errors import InfinityMismatch, MonotonicityViolation
from models.diagram import PersistenceDiagram, PersistencePoint
from models.filtration import DelaunayComplex, RadiusFiltration, Simplex, facets
from settings import DEFAULT_TOLERANCES, Tolerances

logger = logging.getLogger("bregman_tda.persistence")


@dataclass
class FiltrationOrder:
    """Simplices in filtration order with their (possibly clamped) radii"""
    simplices: List[Simplex]
    radii: np.ndarray
    _position: Optional[Dict[Simplex, int]] = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.simplices)

    def dims(self) -> List[int]:
        return [len(s) - 1 for s in self.simplices]

    @property
    def position(self) -> Dict[Simplex, int]:
        if self._position is None:
            self._position = {s: i for i, s in enumerate(self.simplices)}
        return self._position


def order_filtration(f: Union[RadiusFiltration, DelaunayComplex],
                     tol: Tolerances = DEFAULT_TOLERANCES) -> FiltrationOrder:
    """
    Sort by (radius, dimension, vertices).

    A face exceeding a coface by more than monotonicity_tol is an error;
    smaller excesses are absorbed by raising the coface to the face value.
    """
    by_dim = sorted(range(len(f.simplices)), key=lambda i: (len(f.simplices[i]), f.simplices[i]))
    clamped: Dict[Simplex, float] = {}
    for i in by_dim:
        simplex = f.simplices[i]
        r = float(f.radii[i])
        if math.isnan(r):
            raise ValueError(f"Simplex {simplex} has no radius")
        value = r
        for face in facets(simplex):
            if face not in clamped:
                raise ValueError(f"Face {face} of {simplex} is missing from the filtration")
            face_r = clamped[face]
            if face_r > r + tol.monotonicity_tol * (1.0 + abs(r)):
                raise MonotonicityViolation(
                    f"Face {face} has radius {face_r!r} above {r!r} of {simplex}",
                    face=list(face), coface=list(simplex), face_radius=face_r, radius=r)
            value = max(value, face_r)
        clamped[simplex] = value

    ordered = sorted(clamped, key=lambda s: (clamped[s], len(s), s))
    return FiltrationOrder(simplices=ordered,
                           radii=np.array([clamped[s] for s in ordered], dtype=float))


def compute_persistence(order: FiltrationOrder, max_hom_dim: int,
                        tol: Tolerances = DEFAULT_TOLERANCES) -> PersistenceDiagram:
    """
    Persistence diagram up to max_hom_dim over Z/2.

    Only simplices up to dimension max_hom_dim + 1 enter the boundary matrix.
    Pairs with equal birth and death are dropped and counted.
    """
    if max_hom_dim < 0:
        raise ValueError(f"max_hom_dim must be nonnegative, got {max_hom_dim}")
    keep = [i for i, s in enumerate(order.simplices) if len(s) - 1 <= max_hom_dim + 1]
    simplices = [order.simplices[i] for i in keep]
    radii = order.radii[keep]
    position = {s: j for j, s in enumerate(simplices)}
    columns: List[Set[int]] = [
        {position[face] for face in facets(s)} for s in simplices
    ]
    dims = [len(s) - 1 for s in simplices]

    pivot_of: Dict[int, int] = {}  # low row -> column
    cleared: Set[int] = set()
    if tol.clearing:
        sequence = sorted(range(len(simplices)), key=lambda j: (-dims[j], j))
    else:
        sequence = list(range(len(simplices)))

    for j in sequence:
        if j in cleared:
            columns[j] = set()
            continue
        col = columns[j]
        while col:
            low = max(col)
            other = pivot_of.get(low)
            if other is None:
                pivot_of[low] = j
                if tol.clearing:
                    cleared.add(low)
                break
            col ^= columns[other]

    points: List[PersistencePoint] = []
    zero = 0
    paired: Set[int] = set()
    for low, j in pivot_of.items():
        paired.add(low)
        paired.add(j)
        if dims[low] > max_hom_dim:
            continue
        birth, death = float(radii[low]), float(radii[j])
        if birth == death:
            zero += 1
            continue
        points.append(PersistencePoint(dim=dims[low], birth=birth, death=death))

    for j, s in enumerate(simplices):
        if j not in paired and dims[j] <= max_hom_dim:
            points.append(PersistencePoint(dim=dims[j], birth=float(radii[j]), death=math.inf))

    logger.debug("Reduced %d columns: %d points, %d zero-persistence pairs",
                 len(simplices), len(points), zero)
    return PersistenceDiagram(points=points, num_zero_persistence=zero)


def euler_characteristic(simplices: Iterable[Simplex]) -> int:
    return sum(1 if len(s) % 2 else -1 for s in simplices)


# ---------------------------------------------------------------------------
# bottleneck distance
# ---------------------------------------------------------------------------

def _linf(p: Tuple[float, float], q: Tuple[float, float]) -> float:
    return max(abs(p[0] - q[0]), abs(p[1] - q[1]))


def _matchable(A: List[Tuple[float, float]], B: List[Tuple[float, float]],
               delta: float) -> bool:
    """Perfect matching of A + diag(B) against B + diag(A) within delta"""
    graph = nx.Graph()
    left = [('a', i) for i in range(len(A))] + [('db', j) for j in range(len(B))]
    right = [('b', j) for j in range(len(B))] + [('da', i) for i in range(len(A))]
    graph.add_nodes_from(left, bipartite=0)
    graph.add_nodes_from(right, bipartite=1)
    for i, p in enumerate(A):
        for j, q in enumerate(B):
            if _linf(p, q) <= delta:
                graph.add_edge(('a', i), ('b', j))
        if (p[1] - p[0]) / 2.0 <= delta:
            graph.add_edge(('a', i), ('da', i))
    for j, q in enumerate(B):
        if (q[1] - q[0]) / 2.0 <= delta:
            graph.add_edge(('db', j), ('b', j))
        for i in range(len(A)):
            graph.add_edge(('db', j), ('da', i))
    matching = bipartite.hopcroft_karp_matching(graph, top_nodes=left)
    return len(matching) // 2 == len(left)


def _finite_bottleneck(A: List[Tuple[float, float]], B: List[Tuple[float, float]]) -> float:
    if not A and not B:
        return 0.0
    candidates = {0.0}
    candidates.update((p[1] - p[0]) / 2.0 for p in A)
    candidates.update((q[1] - q[0]) / 2.0 for q in B)
    candidates.update(_linf(p, q) for p in A for q in B)
    values = sorted(candidates)
    lo, hi = 0, len(values) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _matchable(A, B, values[mid]):
            hi = mid
        else:
            lo = mid + 1
    return values[lo]


def bottleneck_distance(d1: PersistenceDiagram, d2: PersistenceDiagram) -> float:
    """Maximum over homology dimensions of the exact bottleneck distance"""
    result = 0.0
    for dim in sorted(set(d1.dimensions()) | set(d2.dimensions())):
        inf1 = sorted(p.birth for p in d1.essential(dim))
        inf2 = sorted(p.birth for p in d2.essential(dim))
        if len(inf1) != len(inf2):
            raise InfinityMismatch(
                f"Dimension {dim} has {len(inf1)} vs {len(inf2)} essential classes",
                dimension=dim, counts=[len(inf1), len(inf2)])
        for b1, b2 in zip(inf1, inf2):
            result = max(result, abs(b1 - b2))
        A = [(p.birth, p.death) for p in d1.in_dimension(dim) if not p.is_essential]
        B = [(p.birth, p.death) for p in d2.in_dimension(dim) if not p.is_essential]
        result = max(result, _finite_bottleneck(A, B))
    return result
