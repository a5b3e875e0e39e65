"""
divergence.py - Legendre-type generators and their Bregman divergences

Provides:
- Closed-form F, gradient and Hessian for every generator kind
- Bregman divergences D_F(x, y) = F(x) - F(y) - <grad F(y), x - y>
- Legendre conjugates (generator and point level)
- Domain descriptors and validated point clouds
- Polarity helpers relating points and affine functions
"""

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np

from errors import DomainViolation


class GeneratorKind(Enum):
    SQ_EUCLIDEAN_HALF = "sq_euclidean"
    SHANNON = "kl"
    BURG = "itakura_saito"
    EXPONENTIAL = "exponential"
    BURG_CONJUGATE = "burg_conjugate"
    SIMPLEX_SHANNON = "simplex_kl"
    LOG_PARTITION = "log_partition"


class DomainConstraint(Enum):
    ALL = "all"
    POSITIVE_ORTHANT = "positive_orthant"
    NEGATIVE_ORTHANT = "negative_orthant"
    OPEN_SIMPLEX = "open_simplex"


_DOMAIN_OF = {
    GeneratorKind.SQ_EUCLIDEAN_HALF: DomainConstraint.ALL,
    GeneratorKind.SHANNON: DomainConstraint.POSITIVE_ORTHANT,
    GeneratorKind.BURG: DomainConstraint.POSITIVE_ORTHANT,
    GeneratorKind.EXPONENTIAL: DomainConstraint.ALL,
    GeneratorKind.BURG_CONJUGATE: DomainConstraint.NEGATIVE_ORTHANT,
    GeneratorKind.SIMPLEX_SHANNON: DomainConstraint.OPEN_SIMPLEX,
    GeneratorKind.LOG_PARTITION: DomainConstraint.ALL,
}

_CONJUGATE_OF = {
    GeneratorKind.SQ_EUCLIDEAN_HALF: GeneratorKind.SQ_EUCLIDEAN_HALF,
    GeneratorKind.SHANNON: GeneratorKind.EXPONENTIAL,
    GeneratorKind.EXPONENTIAL: GeneratorKind.SHANNON,
    GeneratorKind.BURG: GeneratorKind.BURG_CONJUGATE,
    GeneratorKind.BURG_CONJUGATE: GeneratorKind.BURG,
    GeneratorKind.SIMPLEX_SHANNON: GeneratorKind.LOG_PARTITION,
    GeneratorKind.LOG_PARTITION: GeneratorKind.SIMPLEX_SHANNON,
}

# Kinds whose Hessian is diagonal
_DIAGONAL_KINDS = frozenset({
    GeneratorKind.SQ_EUCLIDEAN_HALF,
    GeneratorKind.SHANNON,
    GeneratorKind.BURG,
    GeneratorKind.EXPONENTIAL,
    GeneratorKind.BURG_CONJUGATE,
})


@dataclass(frozen=True)
class DomainDescriptor:
    """Open convex domain of a generator, shrunk by a numerical margin"""
    constraint: DomainConstraint
    margin: float = 1e-12

    def violation(self, x: np.ndarray) -> Optional[Tuple[Union[int, str], float]]:
        """Return (coordinate, value) of the first offending coordinate, or None"""
        if not np.all(np.isfinite(x)):
            idx = int(np.flatnonzero(~np.isfinite(x))[0])
            return idx, float(x[idx])
        if self.constraint is DomainConstraint.ALL:
            return None
        if self.constraint is DomainConstraint.POSITIVE_ORTHANT:
            bad = np.flatnonzero(x <= self.margin)
        elif self.constraint is DomainConstraint.NEGATIVE_ORTHANT:
            bad = np.flatnonzero(x >= -self.margin)
        else:
            bad = np.flatnonzero(x <= self.margin)
            if bad.size == 0:
                total = float(np.sum(x))
                if total >= 1.0 - self.margin:
                    return "sum", total
                return None
        if bad.size:
            return int(bad[0]), float(x[bad[0]])
        return None

    def contains(self, x: np.ndarray) -> bool:
        return self.violation(np.asarray(x, dtype=float)) is None

    def check(self, x: np.ndarray, line: Optional[int] = None) -> None:
        found = self.violation(np.asarray(x, dtype=float))
        if found is None:
            return
        coordinate, value = found
        where = f" at line {line}" if line is not None else ""
        raise DomainViolation(
            f"Point outside {self.constraint.value} domain{where}: "
            f"coordinate {coordinate} = {value!r}",
            coordinate=coordinate, value=value, line=line,
            domain=self.constraint.value,
        )

    def linear_constraints(self, n: int) -> Tuple[Optional[np.ndarray], Optional[np.ndarray]]:
        """(A, b) with the closed, margin-shrunk domain written as A x <= b"""
        if self.constraint is DomainConstraint.ALL:
            return None, None
        eye = np.eye(n)
        if self.constraint is DomainConstraint.POSITIVE_ORTHANT:
            return -eye, np.full(n, -self.margin)
        if self.constraint is DomainConstraint.NEGATIVE_ORTHANT:
            return eye, np.full(n, -self.margin)
        A = np.vstack([-eye, np.ones((1, n))])
        b = np.concatenate([np.full(n, -self.margin), [1.0 - self.margin]])
        return A, b


@dataclass(frozen=True)
class Generator:
    """A function of Legendre type from the closed catalog"""
    kind: GeneratorKind
    dimension: int
    domain: DomainDescriptor

    @property
    def name(self) -> str:
        return self.kind.value

    @property
    def diagonal_hessian(self) -> bool:
        return self.kind in _DIAGONAL_KINDS


def make_generator(kind: Union[GeneratorKind, str], dimension: int,
                   margin: float = 1e-12) -> Generator:
    """Build a generator from its kind or CLI name"""
    if isinstance(kind, str):
        try:
            kind = GeneratorKind(kind)
        except ValueError:
            names = ", ".join(k.value for k in GeneratorKind)
            raise ValueError(f"Unknown divergence '{kind}' (expected one of: {names})")
    if dimension < 1:
        raise ValueError(f"Generator dimension must be positive, got {dimension}")
    return Generator(kind=kind, dimension=int(dimension),
                     domain=DomainDescriptor(_DOMAIN_OF[kind], margin))


def conjugate_generator(gen: Generator) -> Generator:
    """Legendre conjugate of a generator, on its own domain"""
    kind = _CONJUGATE_OF[gen.kind]
    return Generator(kind=kind, dimension=gen.dimension,
                     domain=DomainDescriptor(_DOMAIN_OF[kind], gen.domain.margin))


# ---------------------------------------------------------------------------
# closed forms, vectorized over the last axis, no domain checks
# ---------------------------------------------------------------------------

def _simplex_last(x: np.ndarray) -> np.ndarray:
    return 1.0 - np.sum(x, axis=-1)


def _logsumexp1(x: np.ndarray) -> np.ndarray:
    # ln(1 + sum exp(x))
    m = np.maximum(np.max(x, axis=-1), 0.0)
    return m + np.log(np.exp(-m) + np.sum(np.exp(x - m[..., None]), axis=-1))


def _value(kind: GeneratorKind, x: np.ndarray) -> np.ndarray:
    if kind is GeneratorKind.SQ_EUCLIDEAN_HALF:
        return 0.5 * np.sum(x * x, axis=-1)
    if kind is GeneratorKind.SHANNON:
        return np.sum(x * np.log(x) - x, axis=-1)
    if kind is GeneratorKind.BURG:
        return np.sum(1.0 - np.log(x), axis=-1)
    if kind is GeneratorKind.EXPONENTIAL:
        return np.sum(np.exp(x), axis=-1)
    if kind is GeneratorKind.BURG_CONJUGATE:
        return np.sum(1.0 - np.log(-x), axis=-1)
    if kind is GeneratorKind.SIMPLEX_SHANNON:
        last = _simplex_last(x)
        return np.sum(x * np.log(x), axis=-1) + last * np.log(last)
    return _logsumexp1(x)


def _gradient(kind: GeneratorKind, x: np.ndarray) -> np.ndarray:
    if kind is GeneratorKind.SQ_EUCLIDEAN_HALF:
        return np.array(x, dtype=float, copy=True)
    if kind is GeneratorKind.SHANNON:
        return np.log(x)
    if kind in (GeneratorKind.BURG, GeneratorKind.BURG_CONJUGATE):
        return -1.0 / x
    if kind is GeneratorKind.EXPONENTIAL:
        return np.exp(x)
    if kind is GeneratorKind.SIMPLEX_SHANNON:
        return np.log(x) - np.log(_simplex_last(x))[..., None]
    m = np.maximum(np.max(x, axis=-1), 0.0)[..., None]
    e = np.exp(x - m)
    return e / (np.exp(-m) + np.sum(e, axis=-1, keepdims=True))


def _hessian_diagonal(kind: GeneratorKind, x: np.ndarray) -> np.ndarray:
    if kind is GeneratorKind.SQ_EUCLIDEAN_HALF:
        return np.ones_like(x)
    if kind is GeneratorKind.SHANNON:
        return 1.0 / x
    if kind in (GeneratorKind.BURG, GeneratorKind.BURG_CONJUGATE):
        return 1.0 / (x * x)
    return np.exp(x)


def _hessian(kind: GeneratorKind, x: np.ndarray) -> np.ndarray:
    if kind in _DIAGONAL_KINDS:
        return np.diag(_hessian_diagonal(kind, x))
    if kind is GeneratorKind.SIMPLEX_SHANNON:
        last = _simplex_last(x)
        return np.diag(1.0 / x) + np.full((x.size, x.size), 1.0 / last)
    p = _gradient(kind, x)
    return np.diag(p) - np.outer(p, p)


def chart_hessian(gen: Generator, q: np.ndarray, directions: np.ndarray) -> np.ndarray:
    """D^T H(q) D for an n x k direction matrix D, without forming H when diagonal"""
    kind = gen.kind
    if kind in _DIAGONAL_KINDS:
        h = _hessian_diagonal(kind, q)
        return (directions * h[:, None]).T @ directions
    if kind is GeneratorKind.SIMPLEX_SHANNON:
        s = directions.sum(axis=0)
        return (directions / q[:, None]).T @ directions + np.outer(s, s) / _simplex_last(q)
    p = _gradient(kind, q)
    s = directions.T @ p
    return (directions * p[:, None]).T @ directions - np.outer(s, s)


def _divergence(kind: GeneratorKind, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    if kind is GeneratorKind.SQ_EUCLIDEAN_HALF:
        d = x - y
        out = 0.5 * np.sum(d * d, axis=-1)
    elif kind is GeneratorKind.SHANNON:
        out = np.sum(x * np.log(x / y) - x + y, axis=-1)
    elif kind in (GeneratorKind.BURG, GeneratorKind.BURG_CONJUGATE):
        ratio = x / y
        out = np.sum(ratio - np.log(ratio) - 1.0, axis=-1)
    elif kind is GeneratorKind.EXPONENTIAL:
        d = x - y
        out = np.sum(np.exp(y) * (np.expm1(d) - d), axis=-1)
    elif kind is GeneratorKind.SIMPLEX_SHANNON:
        xl = _simplex_last(x)
        yl = _simplex_last(y)
        out = np.sum(x * np.log(x / y), axis=-1) + xl * np.log(xl / yl)
    else:
        out = (_logsumexp1(x) - _logsumexp1(y)
               - np.sum(_gradient(kind, y) * (x - y), axis=-1))
    return np.maximum(out, 0.0)


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------

def _as_point(gen: Generator, x: Sequence[float]) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.shape != (gen.dimension,):
        raise ValueError(f"Expected a {gen.dimension}-vector, got shape {arr.shape}")
    gen.domain.check(arr)
    return arr


def evaluate(gen: Generator, x: Sequence[float]) -> float:
    """F(x)"""
    return float(_value(gen.kind, _as_point(gen, x)))


def gradient(gen: Generator, x: Sequence[float]) -> np.ndarray:
    """grad F(x)"""
    return _gradient(gen.kind, _as_point(gen, x))


def hessian(gen: Generator, x: Sequence[float]) -> np.ndarray:
    """Hessian of F at x as a dense n x n matrix"""
    return _hessian(gen.kind, _as_point(gen, x))


def divergence(gen: Generator, x: Sequence[float], y: Sequence[float]) -> float:
    """D_F(x, y), nonnegative and zero iff x == y"""
    return float(_divergence(gen.kind, _as_point(gen, x), _as_point(gen, y)))


def divergences_to(gen: Generator, points: np.ndarray, y: np.ndarray) -> np.ndarray:
    """D_F(points[i], y) for every row; inputs must already be validated"""
    return _divergence(gen.kind, points, y)


def value_unchecked(gen: Generator, x: np.ndarray) -> np.ndarray:
    return _value(gen.kind, x)


def gradient_unchecked(gen: Generator, x: np.ndarray) -> np.ndarray:
    return _gradient(gen.kind, x)


def conjugate_point(gen: Generator, x: Sequence[float]) -> np.ndarray:
    """x* = grad F(x), a point of the conjugate domain"""
    return gradient(gen, x)


# ---------------------------------------------------------------------------
# polarity between points (c, gamma) and affine functions <c, x> - gamma
# ---------------------------------------------------------------------------

def polar_affine(point: Tuple[Sequence[float], float], x: Sequence[float]) -> float:
    """Evaluate the affine function polar to point C = (c, gamma) at x"""
    c, gamma = point
    return float(np.dot(np.asarray(c, dtype=float), np.asarray(x, dtype=float)) - gamma)


def polarity_gap(C: Tuple[Sequence[float], float],
                 S: Tuple[Sequence[float], float]) -> Tuple[float, float]:
    """(sigma - C*(s), gamma - S*(c)); both equal gamma + sigma - <c, s>"""
    s, sigma = S
    c, gamma = C
    return sigma - polar_affine(C, s), gamma - polar_affine(S, c)


# ---------------------------------------------------------------------------
# point clouds
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PointCloud:
    """Indexed finite point set inside a generator's domain"""
    points: np.ndarray

    @property
    def n(self) -> int:
        return int(self.points.shape[1])

    def __len__(self) -> int:
        return int(self.points.shape[0])

    def __getitem__(self, index: int) -> np.ndarray:
        return self.points[index]

    def subset(self, indices: Iterable[int]) -> np.ndarray:
        return self.points[list(indices)]

    @classmethod
    def from_rows(cls, gen: Generator, rows: Sequence[Sequence[float]],
                  first_line: int = 1) -> 'PointCloud':
        """Validate every row against the generator's domain"""
        arr = np.asarray(rows, dtype=float)
        if arr.ndim != 2 or arr.shape[0] == 0:
            raise ValueError("A point cloud needs at least one row")
        if arr.shape[1] != gen.dimension:
            raise ValueError(
                f"Points have dimension {arr.shape[1]}, generator expects {gen.dimension}")
        for offset, row in enumerate(arr):
            gen.domain.check(row, line=first_line + offset)
        arr.setflags(write=False)
        return cls(points=arr)
