import os
import sys
from typing import Callable, Optional, Tuple

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from cloud_io import synthesize  # noqa: E402
from divergence import Generator, GeneratorKind, PointCloud, make_generator  # noqa: E402
from errors import DomainEscape, GeneralPositionViolation, NoConvergence  # noqa: E402

ALL_KINDS = list(GeneratorKind)

# Divergence to a fixed point stays bounded as the center runs off to -inf,
# so the smallest including ball may not be attained
RESTRICTED_KINDS = {GeneratorKind.EXPONENTIAL}

SKIPPABLE = (NoConvergence, DomainEscape, GeneralPositionViolation)


def random_cloud(kind: GeneratorKind, num_points: int, dim: int,
                 seed: int) -> Tuple[Generator, PointCloud]:
    gen = make_generator(kind, dim)
    return gen, PointCloud.from_rows(gen, synthesize(gen, num_points, seed))


def try_build(kind: GeneratorKind, builder: Callable, *args, **kwargs) -> Optional[object]:
    """Run a builder, returning None when a restricted kind has no usable ball"""
    try:
        return builder(*args, **kwargs)
    except SKIPPABLE:
        if kind not in RESTRICTED_KINDS:
            raise
        return None


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def sq2():
    return make_generator(GeneratorKind.SQ_EUCLIDEAN_HALF, 2)


@pytest.fixture
def kl2():
    return make_generator(GeneratorKind.SHANNON, 2)


@pytest.fixture
def equilateral(sq2):
    pts = [[0.0, 0.0], [1.0, 0.0], [0.5, np.sqrt(3.0) / 2.0]]
    return sq2, PointCloud.from_rows(sq2, pts)


@pytest.fixture
def obtuse(sq2):
    pts = [[0.0, 0.0], [4.0, 0.0], [0.1, 0.3]]
    return sq2, PointCloud.from_rows(sq2, pts)


@pytest.fixture
def square_with_center(sq2):
    pts = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.5]]
    return sq2, PointCloud.from_rows(sq2, pts)
