"""
filtration.py - Simplices, dual balls and radius filtrations

Provides:
- Simplex helpers (vertex tuples in increasing order)
- DualBall certificates
- IntervalRole / FiltrationEntry records
- BuildStats counters
- RadiusFiltration (Čech and Rips) and DelaunayComplex containers
- Interval partition validation shared by the Čech and Delaunay builders
"""

from dataclasses import dataclass
from enum import Enum
from itertools import combinations
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from errors import PartitionFailure

Simplex = Tuple[int, ...]


def make_simplex(vertices: Sequence[int]) -> Simplex:
    """Normalize a vertex collection into a sorted tuple"""
    simplex = tuple(sorted(int(v) for v in vertices))
    if not simplex:
        raise ValueError("A simplex needs at least one vertex")
    if len(set(simplex)) != len(simplex):
        raise ValueError(f"Duplicate vertices in simplex {simplex}")
    if simplex[0] < 0:
        raise ValueError(f"Negative vertex index in simplex {simplex}")
    return simplex


def simplex_dim(simplex: Simplex) -> int:
    return len(simplex) - 1


def facets(simplex: Simplex) -> List[Simplex]:
    """Codimension-one faces, lexicographic"""
    if len(simplex) < 2:
        return []
    return list(combinations(simplex, len(simplex) - 1))


def faces(simplex: Simplex) -> List[Simplex]:
    """All nonempty faces including the simplex itself"""
    out: List[Simplex] = []
    for size in range(1, len(simplex) + 1):
        out.extend(combinations(simplex, size))
    return out


@dataclass(frozen=True, eq=False)
class DualBall:
    """Dual Bregman ball {x : D_F(x, center) <= radius}"""
    center: np.ndarray
    radius: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            'center': [float(c) for c in self.center],
            'radius': float(self.radius),
        }


class IntervalRole(Enum):
    LOWER_BOUND = "lower"
    UPPER_BOUND = "upper"
    INTERIOR = "interior"
    SINGLETON = "singleton"


@dataclass(frozen=True)
class FiltrationEntry:
    simplex: Simplex
    radius: float
    witness: DualBall
    interval_role: Optional[IntervalRole] = None
    parent_lower: Optional[Simplex] = None


@dataclass
class BuildStats:
    """Counters reported per build; names mirror the benchmark table"""
    num_points: int = 0
    num_simplices: int = 0
    num_edges: int = 0
    num_circumball_calls: int = 0
    num_function_evals: int = 0

    @property
    def calls_ratio(self) -> float:
        if not self.num_simplices:
            return 0.0
        return self.num_circumball_calls / self.num_simplices

    def to_dict(self) -> Dict[str, int]:
        return {
            'num_points': self.num_points,
            'num_edges': self.num_edges,
            'num_simplices': self.num_simplices,
            'num_circumball_calls': self.num_circumball_calls,
            'num_function_evals': self.num_function_evals,
        }


class _IndexedComplex:
    """Parallel arrays keyed by simplex, shared by both containers"""

    def __init__(self, simplices: List[Simplex], radii: np.ndarray,
                 witness_ids: Sequence[int], witnesses: List[DualBall],
                 owners: Optional[List[Simplex]]):
        self.simplices = simplices
        self.radii = np.asarray(radii, dtype=float)
        self.witness_ids = np.asarray(witness_ids, dtype=np.int64)
        self.witnesses = witnesses
        self.owners = owners
        self._index: Optional[Dict[Simplex, int]] = None

    def __len__(self) -> int:
        return len(self.simplices)

    def __contains__(self, simplex: Simplex) -> bool:
        return tuple(simplex) in self.index

    def __iter__(self) -> Iterator[Simplex]:
        return iter(self.simplices)

    @property
    def index(self) -> Dict[Simplex, int]:
        if self._index is None:
            self._index = {s: i for i, s in enumerate(self.simplices)}
        return self._index

    def index_of(self, simplex: Sequence[int]) -> int:
        key = make_simplex(simplex)
        try:
            return self.index[key]
        except KeyError:
            raise KeyError(f"Simplex {key} is not in the complex")

    def radius(self, simplex: Sequence[int]) -> float:
        return float(self.radii[self.index_of(simplex)])

    def witness(self, simplex: Sequence[int]) -> DualBall:
        return self.witnesses[int(self.witness_ids[self.index_of(simplex)])]

    def owner(self, simplex: Sequence[int]) -> Optional[Simplex]:
        if self.owners is None:
            return None
        return self.owners[int(self.witness_ids[self.index_of(simplex)])]

    def max_dim(self) -> int:
        return max((len(s) for s in self.simplices), default=0) - 1

    def num_edges(self) -> int:
        return sum(1 for s in self.simplices if len(s) == 2)

    def sublevel(self, r: float) -> List[Simplex]:
        return [s for s, value in zip(self.simplices, self.radii) if value <= r]


class RadiusFiltration(_IndexedComplex):
    """
    Čech or Rips radius function on a truncated skeleton

    witness_ids[i] indexes witnesses; for Čech filtrations owners[w] is the
    simplex whose circumball solve produced witness w, which is also the lower
    bound of the interval the simplex belongs to. Rips filtrations carry no
    owners and no roles.
    """

    def __init__(self, kind: str, generator: Any, points: np.ndarray,
                 simplices: List[Simplex], radii: np.ndarray,
                 witness_ids: Sequence[int], witnesses: List[DualBall],
                 owners: Optional[List[Simplex]] = None,
                 roles: Optional[List[IntervalRole]] = None,
                 stats: Optional[BuildStats] = None,
                 max_dim: int = 0, cutoff: float = float('inf')):
        super().__init__(simplices, radii, witness_ids, witnesses, owners)
        self.kind = kind
        self.generator = generator
        self.points = points
        self.roles = roles
        self.stats = stats or BuildStats()
        self.skeleton = max_dim
        self.cutoff = cutoff

    def parent_lower(self, simplex: Sequence[int]) -> Optional[Simplex]:
        return self.owner(simplex)

    def entry(self, simplex: Sequence[int]) -> FiltrationEntry:
        i = self.index_of(simplex)
        w = int(self.witness_ids[i])
        return FiltrationEntry(
            simplex=self.simplices[i],
            radius=float(self.radii[i]),
            witness=self.witnesses[w],
            interval_role=self.roles[i] if self.roles is not None else None,
            parent_lower=self.owners[w] if self.owners is not None else None,
        )

    def entries(self) -> Iterator[FiltrationEntry]:
        for simplex in self.simplices:
            yield self.entry(simplex)


class DelaunayComplex(_IndexedComplex):
    """
    Delaunay triangulation with its radius function

    owners[w] is the simplex whose own smallest circumball is witness w, the
    upper bound of the interval. Radii are None until the radius function is
    computed.
    """

    def __init__(self, generator: Any, points: np.ndarray,
                 simplices: List[Simplex], radii: Optional[np.ndarray] = None,
                 witness_ids: Optional[Sequence[int]] = None,
                 witnesses: Optional[List[DualBall]] = None,
                 owners: Optional[List[Simplex]] = None,
                 stats: Optional[BuildStats] = None):
        n = len(simplices)
        super().__init__(
            simplices,
            radii if radii is not None else np.full(n, np.nan),
            witness_ids if witness_ids is not None else np.full(n, -1),
            witnesses or [],
            owners,
        )
        self.kind = "delaunay"
        self.generator = generator
        self.points = points
        self.stats = stats or BuildStats()

    def truncated(self, max_dim: int, cutoff: float) -> 'DelaunayComplex':
        """Sub-complex of simplices with dimension <= max_dim and radius <= cutoff"""
        keep = [i for i, s in enumerate(self.simplices)
                if len(s) - 1 <= max_dim and self.radii[i] <= cutoff]
        stats = BuildStats(
            num_points=self.stats.num_points,
            num_simplices=len(keep),
            num_edges=sum(1 for i in keep if len(self.simplices[i]) == 2),
            num_circumball_calls=self.stats.num_circumball_calls,
            num_function_evals=self.stats.num_function_evals,
        )
        return DelaunayComplex(
            generator=self.generator, points=self.points,
            simplices=[self.simplices[i] for i in keep],
            radii=self.radii[keep], witness_ids=self.witness_ids[keep],
            witnesses=self.witnesses, owners=self.owners, stats=stats)

    @property
    def has_radii(self) -> bool:
        return bool(len(self.radii)) and not np.any(np.isnan(self.radii))

    def intervals(self, tol: float = 1e-12) -> List[Tuple[Simplex, Simplex]]:
        """Interval partition of the radius function, grouped by upper bound"""
        if not self.has_radii or self.owners is None:
            raise PartitionFailure("Delaunay radii have not been computed")
        groups: Dict[int, List[int]] = {}
        for i, w in enumerate(self.witness_ids):
            groups.setdefault(int(w), []).append(i)

        intervals: List[Tuple[Simplex, Simplex]] = []
        group_of = np.empty(len(self.simplices), dtype=np.int64)
        for w, members in sorted(groups.items()):
            upper = self.owners[w]
            member_sets = [set(self.simplices[i]) for i in members]
            lower = tuple(sorted(set.intersection(*member_sets)))
            if lower not in self.index or self.index[lower] not in members:
                raise PartitionFailure(
                    f"Interval with upper bound {upper} has no lower bound",
                    simplex=list(upper))
            for i in members:
                s = set(self.simplices[i])
                if not set(lower) <= s <= set(upper):
                    raise PartitionFailure(
                        f"Simplex {self.simplices[i]} lies outside [{lower}, {upper}]",
                        simplex=list(self.simplices[i]))
                group_of[i] = len(intervals)
            intervals.append((lower, upper))

        check_equal_value_faces(self.simplices, self.radii, group_of, self.index, tol)
        return intervals


def check_equal_value_faces(simplices: List[Simplex], radii: np.ndarray,
                            group_of: np.ndarray, index: Dict[Simplex, int],
                            tol: float) -> None:
    """Raise PartitionFailure if a facet pair of equal value spans two intervals"""
    for i, simplex in enumerate(simplices):
        r = radii[i]
        for face in facets(simplex):
            j = index.get(face)
            if j is None:
                raise PartitionFailure(
                    f"Face {face} of {simplex} is missing", simplex=list(face))
            if group_of[j] != group_of[i] and abs(radii[j] - r) <= tol * (1.0 + abs(r)):
                raise PartitionFailure(
                    f"Simplices {face} and {simplex} share the value {r!r} "
                    f"across distinct intervals",
                    simplex=list(simplex))
