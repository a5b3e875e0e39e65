from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence
import json
import math


def _encode_radius(value: float) -> Any:
    return "inf" if math.isinf(value) else float(value)


def _decode_radius(value: Any) -> float:
    if isinstance(value, str):
        if value.strip().lower() in ("inf", "+inf", "infinity"):
            return math.inf
        return float(value)
    return float(value)


@dataclass(frozen=True, order=True)
class PersistencePoint:
    """A (dimension, birth, death) triple; death is inf for essential classes"""
    dim: int
    birth: float
    death: float

    @property
    def persistence(self) -> float:
        return self.death - self.birth

    @property
    def is_essential(self) -> bool:
        return math.isinf(self.death)

    def alive_at(self, r: float) -> bool:
        return self.birth <= r < self.death

    def to_dict(self) -> Dict[str, Any]:
        return {
            'dim': self.dim,
            'birth': float(self.birth),
            'death': _encode_radius(self.death),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'PersistencePoint':
        return cls(dim=int(data['dim']),
                   birth=_decode_radius(data['birth']),
                   death=_decode_radius(data['death']))


@dataclass
class PersistenceDiagram:
    """Multiset of persistence points, kept sorted by (dim, birth, death)"""
    points: List[PersistencePoint] = field(default_factory=list)
    num_zero_persistence: int = 0

    def __post_init__(self):
        for p in self.points:
            if p.death < p.birth:
                raise ValueError(f"Death before birth in {p}")
        self.points = sorted(self.points)

    def __len__(self) -> int:
        return len(self.points)

    def dimensions(self) -> List[int]:
        return sorted({p.dim for p in self.points})

    def in_dimension(self, dim: int) -> List[PersistencePoint]:
        return [p for p in self.points if p.dim == dim]

    def essential(self, dim: int) -> List[PersistencePoint]:
        return [p for p in self.points if p.dim == dim and p.is_essential]

    def betti_at(self, r: float, dim: int) -> int:
        """Rank of homology in dimension dim of the complex at radius r"""
        return sum(1 for p in self.points if p.dim == dim and p.alive_at(r))

    def betti_numbers(self, r: float, max_dim: int) -> List[int]:
        return [self.betti_at(r, d) for d in range(max_dim + 1)]

    def to_list(self) -> List[Dict[str, Any]]:
        return [p.to_dict() for p in self.points]

    @classmethod
    def from_list(cls, items: Sequence[Dict[str, Any]]) -> 'PersistenceDiagram':
        return cls(points=[PersistencePoint.from_dict(item) for item in items])

    def to_json(self) -> str:
        return json.dumps(self.to_list())

    @classmethod
    def from_json(cls, text: str) -> 'PersistenceDiagram':
        return cls.from_list(json.loads(text))
